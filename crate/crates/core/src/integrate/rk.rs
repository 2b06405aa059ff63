//! Dormand-Prince 5(4) with step-size control on fixed-size states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// When samples are recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    /// Every accepted step.
    Steps,
    /// Multiples of the spacing; steps are shortened to land on them.
    Grid(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; `horizon / 1000` when absent.
    pub h0: Option<f64>,
    /// Disables error control and takes steps of exactly this size.
    pub fixed_step: Option<f64>,
    pub max_steps: usize,
    pub output: Output,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            rtol: 1e-9,
            atol: 1e-12,
            h0: None,
            fixed_step: None,
            max_steps: 10_000_000,
            output: Output::Steps,
        }
    }
}

impl Settings {
    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_output(mut self, output: Output) -> Self {
        self.output = output;
        self
    }

    pub fn with_fixed_step(mut self, h: f64) -> Self {
        self.fixed_step = Some(h);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (equal to the last row of `A`).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// `B5 - B4`.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const UNDERFLOW: f64 = 1e-14;
/// Stage failures tolerated before the step size recovers past the failing one.
const MAX_STRIKES: usize = 25;

enum Attempt<const N: usize> {
    Done { y: [f64; N], err: f64 },
    StageFailed(Error),
}

fn attempt<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    stats: &mut Stats,
    settings: &Settings,
) -> Attempt<N>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut k = [[0.0; N]; 7];
    k[0] = *k1;
    for s in 1..7 {
        let ys: [f64; N] = std::array::from_fn(|i| {
            y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>()
        });
        stats.rhs_evals += 1;
        match f(t + C[s] * h, &ys) {
            Ok(d) if d.iter().all(|x| x.is_finite()) => k[s] = d,
            Ok(_) => {
                return Attempt::StageFailed(Error::InsufficientSampling {
                    reason: "non-finite derivative".into(),
                })
            }
            Err(e) => return Attempt::StageFailed(e),
        }
    }
    let y_new: [f64; N] = std::array::from_fn(|i| y[i] + h * (0..7).map(|s| B5[s] * k[s][i]).sum::<f64>());
    let mut sum = 0.0;
    for i in 0..N {
        let e = h * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
        let sc = settings.atol + settings.rtol * y[i].abs().max(y_new[i].abs());
        sum += (e / sc).powi(2);
    }
    Attempt::Done {
        y: y_new,
        err: (sum / N as f64).sqrt(),
    }
}

/// Integrates `dy/dt = f(t, y)` over `[t0, t0 + horizon]`.
///
/// `on_step(t, y, is_output)` runs after every accepted step and may modify
/// `y` (renormalization) or abort with an error. It is also called once at
/// `t0`. A failing derivative evaluation inside a step is treated as a
/// rejection; only a failure at the start of a step, or one that keeps
/// recurring while the step size cannot recover, ends the run.
pub fn solve<const N: usize, F, G>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    horizon: f64,
    settings: &Settings,
    mut on_step: G,
) -> Result<Stats>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    G: FnMut(f64, &mut [f64; N], bool) -> Result<()>,
{
    assert!(horizon > 0.0 && horizon.is_finite(), "horizon must be positive");
    let t_end = t0 + horizon;
    let mut stats = Stats::default();
    let mut t = t0;
    let mut y = y0;
    on_step(t, &mut y, true).map_err(|e| e.at(t))?;

    let grid = match settings.output {
        Output::Grid(dt) => {
            assert!(dt > 0.0, "output spacing must be positive");
            Some(dt)
        }
        Output::Steps => None,
    };
    let mut next_output = 1usize;
    let output_time = |n: usize| grid.map(|dt| (t0 + n as f64 * dt).min(t_end)).unwrap_or(t_end);

    let mut h = settings
        .fixed_step
        .or(settings.h0)
        .unwrap_or(horizon / 1000.0)
        .min(horizon);
    let h_min = UNDERFLOW * horizon;
    let mut last_stage_error: Option<Error> = None;
    // the solution may sit so close to a domain edge that every step able to
    // make progress fails; repeated failures without recovery are genuine
    let mut strikes = 0usize;
    let mut failing_step = f64::INFINITY;

    while t < t_end {
        if stats.accepted >= settings.max_steps {
            return Err(Error::StepSizeUnderflow { step: h }.at(t));
        }
        let target = output_time(next_output);
        let mut lands = false;
        let mut step = h;
        if t + step >= target - 1e-12 * horizon {
            step = target - t;
            lands = true;
        }
        if step < h_min {
            let e = last_stage_error.take().unwrap_or(Error::StepSizeUnderflow { step });
            return Err(e.at(t));
        }

        stats.rhs_evals += 1;
        let k1 = f(t, &y).map_err(|e| e.at(t))?;
        match attempt(&mut f, t, &y, &k1, step, &mut stats, settings) {
            Attempt::StageFailed(e) => {
                stats.rejected += 1;
                strikes += 1;
                if strikes >= MAX_STRIKES {
                    return Err(e.at(t));
                }
                failing_step = failing_step.min(step);
                last_stage_error = Some(e);
                h = step * 0.5;
            }
            Attempt::Done { y: y_new, err } => {
                let fixed = settings.fixed_step.is_some();
                if fixed || err <= 1.0 {
                    t = if lands { target } else { t + step };
                    y = y_new;
                    stats.accepted += 1;
                    last_stage_error = None;
                    if step > failing_step {
                        strikes = 0;
                        failing_step = f64::INFINITY;
                    }
                    let is_output = grid.is_none() || lands;
                    if lands {
                        next_output += 1;
                    }
                    on_step(t, &mut y, is_output).map_err(|e| e.at(t))?;
                    if !fixed {
                        let factor = if err == 0.0 {
                            MAX_FACTOR
                        } else {
                            (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                        };
                        // a step shortened to hit an output point says little about h
                        h = if lands { h.max(step * factor) } else { step * factor };
                    }
                } else {
                    stats.rejected += 1;
                    h = step * (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                }
            }
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut last = (0.0, [0.0]);
        let stats = solve(
            |_, y: &[f64; 1]| Ok([-y[0]]),
            0.0,
            [1.0],
            5.0,
            &Settings::default(),
            |t, y, _| {
                last = (t, *y);
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(last.0, 5.0);
        assert!((last.1[0] - (-5f64).exp()).abs() < 1e-10);
        assert!(stats.accepted > 5);
    }

    #[test]
    fn grid_output_lands_exactly() {
        let mut times = Vec::new();
        solve(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            1.0,
            [0.0, 1.0],
            2.0,
            &Settings::default().with_output(Output::Grid(0.25)),
            |t, _, out| {
                if out {
                    times.push(t);
                }
                Ok(())
            },
        )
        .unwrap();
        let want: Vec<f64> = (0..=8).map(|k| 1.0 + 0.25 * k as f64).collect();
        assert_eq!(times, want);
    }

    #[test]
    fn fixed_step_order_five() {
        let run = |h: f64| {
            let mut y_end = 0.0;
            solve(
                |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
                0.0,
                [0.0, 1.0],
                2.0,
                &Settings::default().with_fixed_step(h),
                |_, y, _| {
                    y_end = y[0];
                    Ok(())
                },
            )
            .unwrap();
            (y_end - 2f64.sin()).abs()
        };
        let order = (run(0.1) / run(0.05)).log2();
        assert!(order > 4.7, "order {order}");
    }

    #[test]
    fn failing_stage_reduces_step() {
        // derivative undefined beyond y = 2; the solution reaches 1.5
        let mut end = 0.0;
        solve(
            |_, y: &[f64; 1]| {
                if y[0] > 2.0 {
                    Err(Error::OutsideConstraintDomain { value: y[0] })
                } else {
                    Ok([0.5])
                }
            },
            0.0,
            [0.0],
            3.0,
            &Settings {
                h0: Some(3.0),
                ..Settings::default()
            },
            |_, y, _| {
                end = y[0];
                Ok(())
            },
        )
        .unwrap();
        assert!((end - 1.5).abs() < 1e-12);
    }

    #[test]
    fn genuine_failure_is_reported() {
        let err = solve(
            |t, _: &[f64; 1]| {
                if t > 1.0 {
                    Err(Error::SpeedSingularity { gap: 0.0 })
                } else {
                    Ok([1.0])
                }
            },
            0.0,
            [0.0],
            3.0,
            &Settings::default(),
            |_, _, _| Ok(()),
        )
        .unwrap_err();
        assert!(matches!(err.root(), Error::SpeedSingularity { .. }));
        match err {
            Error::Integration { at, .. } => assert!(at <= 1.0 && at > 1.0 - 1e-4, "{at}"),
            e => panic!("{e:?}"),
        }
    }
}
