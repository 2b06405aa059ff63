//! Independent configurations run in parallel.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::load_config;
use crate::run::{execute, ExitKind};

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub config: PathBuf,
    pub exit: ExitKind,
    pub message: String,
}

/// `*.ini` files directly inside `dir`, in name order.
pub fn configs_in(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "ini"))
        .collect();
    paths.sort();
    Ok(paths)
}

fn one(path: &Path, verify: bool) -> SweepEntry {
    let entry = |exit, message: String| SweepEntry {
        config: path.to_path_buf(),
        exit,
        message,
    };
    let mut cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => return entry(ExitKind::Config, e.to_string()),
    };
    cfg.verify = verify;
    let dir = cfg.output.dir.clone();
    match execute(&cfg, &dir) {
        Ok(r) => {
            let message = match (&r.error, &r.verification) {
                (Some(e), _) => e.message.clone(),
                (None, Some(v)) if !v.passed => v.failures.join("; "),
                _ => format!("wrote {}", r.csv.display()),
            };
            entry(r.exit, message)
        }
        Err(e) => entry(ExitKind::Io, e.to_string()),
    }
}

/// Runs every configuration; results keep the input order.
pub fn sweep(paths: &[PathBuf], verify: bool) -> Vec<SweepEntry> {
    paths.par_iter().map(|p| one(p, verify)).collect()
}
