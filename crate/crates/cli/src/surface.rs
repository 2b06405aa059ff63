//! Samples of the velocity-space constraint surface with `qdot3` suppressed:
//! `w^2 - x^2 - y^2 = sigma m0^2 c^2` on the sheet `w > 0`.

use std::fmt::Write as _;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SurfaceRegime {
    Massive,
    Tachyon,
    Massless,
}

impl SurfaceRegime {
    fn sign(self) -> f64 {
        match self {
            SurfaceRegime::Massive => 1.0,
            SurfaceRegime::Tachyon => -1.0,
            SurfaceRegime::Massless => 0.0,
        }
    }
}

/// `(x, y, w)` on an `n x n` grid over `[-extent, extent]^2`. Grid points
/// where the surface has no upper sheet are skipped.
pub fn sample_constraint_surface(regime: SurfaceRegime, m0: f64, c: f64, n: usize, extent: f64) -> Vec<[f64; 3]> {
    let shift = regime.sign() * m0 * m0 * c * c;
    let coord = |i: usize| {
        if n == 1 {
            0.0
        } else {
            -extent + 2.0 * extent * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (coord(i), coord(j));
            let w2 = shift + x * x + y * y;
            if w2 > 0.0 || (regime == SurfaceRegime::Massless && w2 == 0.0) {
                out.push([x, y, w2.sqrt()]);
            }
        }
    }
    out
}

pub fn surface_csv(points: &[[f64; 3]]) -> String {
    let mut out = String::from("x,y,w\n");
    for [x, y, w] in points {
        let _ = writeln!(out, "{x:?},{y:?},{w:?}");
    }
    out
}
