//! Strong Wolfe line search after Moré and Thuente (1994).
//!
//! The search keeps an interval of uncertainty `[stx, sty]` and picks trial
//! steps by safeguarded cubic and quadratic interpolation. Until a trial
//! satisfies sufficient decrease with a nonnegative slope the search works
//! on the modified function `ψ(α) = φ(α) − φ(0) − c1 α φ'(0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WolfeParams {
    /// Sufficient decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Budget of function evaluations per search.
    pub max_bracket_steps: usize,
    pub alpha_init: f64,
}

impl Default for WolfeParams {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            c2: 0.9,
            max_bracket_steps: 30,
            alpha_init: 1.0,
        }
    }
}

impl WolfeParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(Error::InvalidInput(format!(
                "Wolfe constants need 0 < c1 < c2 < 1, got c1 = {}, c2 = {}",
                self.c1, self.c2
            )));
        }
        if self.max_bracket_steps == 0 || !(self.alpha_init > 0.0 && self.alpha_init.is_finite()) {
            return Err(Error::InvalidInput(
                "line search needs a positive step budget and initial step".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchResult {
    pub step: f64,
    pub value: f64,
    pub slope: f64,
    pub evaluations: usize,
    /// Set when the step satisfies sufficient decrease only.
    pub warning: Option<String>,
}

const XTOL: f64 = 1e-12;
const STPMAX: f64 = 1e12;
const XTRAPL: f64 = 1.1;
const XTRAPU: f64 = 4.0;

/// Searches along a ray. `phi(α)` returns the value and the directional
/// derivative at `α`.
pub fn wolfe_linesearch(
    mut phi: impl FnMut(f64) -> Result<(f64, f64)>,
    f0: f64,
    slope0: f64,
    params: &WolfeParams,
) -> Result<LineSearchResult> {
    params.validate()?;
    if !(slope0 < 0.0) {
        return Err(Error::NotDescent(slope0));
    }
    let (ftol, gtol) = (params.c1, params.c2);
    let gtest = ftol * slope0;
    let mut stage_one = true;
    let mut brackt = false;
    let mut width = STPMAX;
    let mut width1 = 2.0 * width;

    let (mut stx, mut fx, mut gx) = (0.0, f0, slope0);
    let (mut sty, mut fy, mut gy) = (0.0, f0, slope0);
    let mut stp = params.alpha_init.min(STPMAX);
    let mut stmin = 0.0;
    let mut stmax = stp + XTRAPU * stp;

    let mut best: Option<(f64, f64, f64)> = None;
    let mut warning = None;
    let mut evaluations = 0;

    while evaluations < params.max_bracket_steps {
        let (f, g) = phi(stp)?;
        evaluations += 1;
        if !f.is_finite() || !g.is_finite() {
            // step into a region where the objective overflows: shrink
            brackt = true;
            sty = stp;
            fy = f64::INFINITY;
            gy = 0.0;
            stmin = stx;
            stmax = stp;
            stp = stx + 0.5 * (stp - stx);
            continue;
        }
        let ftest = f0 + stp * gtest;
        if f <= ftest && best.map_or(true, |(_, bf, _)| f < bf) {
            best = Some((stp, f, g));
        }
        if f <= ftest && g.abs() <= -gtol * slope0 {
            return Ok(LineSearchResult {
                step: stp,
                value: f,
                slope: g,
                evaluations,
                warning: None,
            });
        }
        if stage_one && f <= ftest && g >= 0.0 {
            stage_one = false;
        }
        if brackt && (stp <= stmin || stp >= stmax) {
            warning = Some("rounding errors prevent progress".to_string());
            break;
        }
        if brackt && stmax - stmin <= XTOL * stmax {
            warning = Some("interval of uncertainty below tolerance".to_string());
            break;
        }
        if stp >= STPMAX && f <= ftest && g <= gtest {
            warning = Some("step reached the upper bound".to_string());
            break;
        }

        let mut step = Step {
            stx,
            fx,
            dx: gx,
            sty,
            fy,
            dy: gy,
            brackt,
        };
        if stage_one && f <= fx && f > ftest {
            // ψ has the same minimizers but a sign-correct derivative
            step.fx -= stx * gtest;
            step.fy -= sty * gtest;
            step.dx -= gtest;
            step.dy -= gtest;
            stp = step.update(stp, f - stp * gtest, g - gtest, stmin, stmax);
            step.fx += step.stx * gtest;
            step.fy += step.sty * gtest;
            step.dx += gtest;
            step.dy += gtest;
        } else {
            stp = step.update(stp, f, g, stmin, stmax);
        }
        Step {
            stx,
            fx,
            dx: gx,
            sty,
            fy,
            dy: gy,
            brackt,
        } = step;

        if brackt {
            if (sty - stx).abs() >= 0.66 * width1 {
                stp = stx + 0.5 * (sty - stx);
            }
            width1 = width;
            width = (sty - stx).abs();
            stmin = stx.min(sty);
            stmax = stx.max(sty);
        } else {
            stmin = stp + XTRAPL * (stp - stx);
            stmax = stp + XTRAPU * (stp - stx);
        }
        if !stp.is_finite() {
            stp = stx + 0.5 * (sty - stx);
        }
        stp = stp.clamp(0.0, STPMAX);
        if brackt && (stp <= stmin || stp >= stmax || stmax - stmin <= XTOL * stmax) {
            stp = stx;
        }
    }

    match best {
        Some((step, value, slope)) => Ok(LineSearchResult {
            step,
            value,
            slope,
            evaluations,
            warning: Some(warning.unwrap_or_else(|| "evaluation budget exhausted".to_string())),
        }),
        None => Err(Error::LineSearch {
            iteration: 0,
            reason: format!(
                "no step with sufficient decrease after {evaluations} evaluations{}",
                warning.map(|w| format!(" ({w})")).unwrap_or_default()
            ),
        }),
    }
}

/// Interval state for one safeguarded step.
struct Step {
    stx: f64,
    fx: f64,
    dx: f64,
    sty: f64,
    fy: f64,
    dy: f64,
    brackt: bool,
}

impl Step {
    /// Computes the next trial step from `(stp, fp, dp)` and shrinks the
    /// interval. Follows the four cases of Moré and Thuente.
    fn update(&mut self, stp: f64, fp: f64, dp: f64, stpmin: f64, stpmax: f64) -> f64 {
        let (stx, fx, dx) = (self.stx, self.fx, self.dx);
        let sgnd = dp * dx.signum();

        let stpf = if fp > fx {
            // higher value: the minimum is bracketed
            let theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
            let s = theta.abs().max(dx.abs()).max(dp.abs());
            let mut gamma = s * ((theta / s).powi(2) - (dx / s) * (dp / s)).max(0.0).sqrt();
            if stp < stx {
                gamma = -gamma;
            }
            let p = (gamma - dx) + theta;
            let q = ((gamma - dx) + gamma) + dp;
            let stpc = stx + (p / q) * (stp - stx);
            let stpq = stx + ((dx / ((fx - fp) / (stp - stx) + dx)) / 2.0) * (stp - stx);
            self.brackt = true;
            if (stpc - stx).abs() < (stpq - stx).abs() {
                stpc
            } else {
                stpc + (stpq - stpc) / 2.0
            }
        } else if sgnd < 0.0 {
            // derivatives of opposite sign: the minimum is bracketed
            let theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
            let s = theta.abs().max(dx.abs()).max(dp.abs());
            let mut gamma = s * ((theta / s).powi(2) - (dx / s) * (dp / s)).max(0.0).sqrt();
            if stp > stx {
                gamma = -gamma;
            }
            let p = (gamma - dp) + theta;
            let q = ((gamma - dp) + gamma) + dx;
            let stpc = stp + (p / q) * (stx - stp);
            let stpq = stp + (dp / (dp - dx)) * (stx - stp);
            self.brackt = true;
            if (stpc - stp).abs() > (stpq - stp).abs() {
                stpc
            } else {
                stpq
            }
        } else if dp.abs() < dx.abs() {
            // same sign, derivative magnitude decreases
            let theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
            let s = theta.abs().max(dx.abs()).max(dp.abs());
            let mut gamma = s * ((theta / s).powi(2) - (dx / s) * (dp / s)).max(0.0).sqrt();
            if stp > stx {
                gamma = -gamma;
            }
            let p = (gamma - dp) + theta;
            let q = (gamma + (dx - dp)) + gamma;
            let r = p / q;
            let stpc = if r < 0.0 && gamma != 0.0 {
                stp + r * (stx - stp)
            } else if stp > stx {
                stpmax
            } else {
                stpmin
            };
            let stpq = stp + (dp / (dp - dx)) * (stx - stp);
            if self.brackt {
                let f = if (stpc - stp).abs() < (stpq - stp).abs() { stpc } else { stpq };
                if stp > stx {
                    f.min(stp + 0.66 * (self.sty - stp))
                } else {
                    f.max(stp + 0.66 * (self.sty - stp))
                }
            } else {
                let f = if (stpc - stp).abs() > (stpq - stp).abs() { stpc } else { stpq };
                f.clamp(stpmin, stpmax)
            }
        } else if self.brackt {
            let (sty, fy, dy) = (self.sty, self.fy, self.dy);
            let theta = 3.0 * (fp - fy) / (sty - stp) + dy + dp;
            let s = theta.abs().max(dy.abs()).max(dp.abs());
            let mut gamma = s * ((theta / s).powi(2) - (dy / s) * (dp / s)).max(0.0).sqrt();
            if stp > sty {
                gamma = -gamma;
            }
            let p = (gamma - dp) + theta;
            let q = ((gamma - dp) + gamma) + dy;
            stp + (p / q) * (sty - stp)
        } else if stp > stx {
            stpmax
        } else {
            stpmin
        };

        if fp > fx {
            self.sty = stp;
            self.fy = fp;
            self.dy = dp;
        } else {
            if sgnd < 0.0 {
                self.sty = stx;
                self.fy = fx;
                self.dy = dx;
            }
            self.stx = stp;
            self.fx = fp;
            self.dx = dp;
        }
        stpf
    }
}
