//! Dormand–Prince 5(4) integrator with per-step error control.
//!
//! Local extrapolation (the 5th-order solution is propagated), step size
//! from the embedded 4th-order estimate, every accepted step reported to an
//! observer that may stop the integration early. Backward time is handled
//! by a negative step direction.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};

/// Right-hand side `y' = F(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { rtol: 1e-10, atol: 1e-12, h_init: None, h_max: f64::INFINITY, max_steps: 1_000_000 }
    }
}

impl SolverOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        SolverOptions { rtol, atol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(invalid("rtol and atol must be positive"));
        }
        Ok(())
    }
}

/// Observer verdict after an accepted step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub t: f64,
    pub y: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    /// Last step size attempted, signed; a good hint for the next call.
    pub last_h: f64,
    pub stopped: bool,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b(5th) − b(4th)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MAX_NONFINITE_RETRIES: usize = 30;

fn err_norm(y: &[f64], ynew: &[f64], err: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = y.len() as f64;
    let s: f64 = y
        .iter()
        .zip(ynew)
        .zip(err)
        .map(|((a, b), e)| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc) * (e / sc)
        })
        .sum();
    (s / n).sqrt()
}

fn initial_step<S: OdeSystem>(sys: &S, t0: f64, y0: &[f64], f0: &[f64], dir: f64, opts: &SolverOptions) -> f64 {
    let n = y0.len();
    let sc: Vec<f64> = y0.iter().map(|y| opts.atol + opts.rtol * y.abs()).collect();
    let rms = |v: &[f64]| (v.iter().zip(&sc).map(|(a, s)| (a / s) * (a / s)).sum::<f64>() / n as f64).sqrt();
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + dir * h0 * f).collect();
    let mut f1 = vec![0.0; n];
    sys.rhs(t0 + dir * h0, &y1, &mut f1);
    let df: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&df) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    let h = (100.0 * h0).min(h1);
    if h.is_finite() && h > 0.0 {
        h
    } else {
        1e-6
    }
}

/// Integrates from `t0` to `t_end` (either direction), hitting `t_end`
/// exactly unless the observer stops early. The observer sees the initial
/// state first and then every accepted step.
pub fn solve<S, F>(sys: &S, t0: f64, y0: &[f64], t_end: f64, opts: &SolverOptions, mut observe: F) -> Result<Outcome>
where
    S: OdeSystem,
    F: FnMut(f64, &[f64]) -> Control,
{
    opts.validate()?;
    let n = sys.dim();
    if y0.len() != n {
        return Err(invalid("initial state has wrong dimension"));
    }
    if !y0.iter().all(|v| v.is_finite()) || !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::NonFinite { t: t0 });
    }
    let mut y = y0.to_vec();
    let mut t = t0;
    if observe(t, &y) == Control::Stop || t_end == t0 {
        return Ok(Outcome { t, y, accepted: 0, rejected: 0, last_h: 0.0, stopped: t_end != t0, });
    }
    let dir = if t_end > t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];

    sys.rhs(t, &y, &mut k1);
    if !k1.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { t });
    }
    let mut h = match opts.h_init {
        Some(h) if h > 0.0 => h,
        _ => initial_step(sys, t, &y, &k1, dir, opts),
    }
    .min(opts.h_max)
    .min(span);

    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut last_rejected = false;
    let mut nonfinite_retries = 0usize;

    loop {
        if accepted + rejected >= opts.max_steps {
            return Err(Error::MaxSteps { t });
        }
        let remaining = (t_end - t).abs();
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) && !last {
            return Err(Error::StepUnderflow { t });
        }
        let hs = dir * h;

        for i in 0..n {
            ytmp[i] = y[i] + hs * A21 * k1[i];
        }
        sys.rhs(t + C2 * hs, &ytmp, &mut k2);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.rhs(t + C3 * hs, &ytmp, &mut k3);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(t + C4 * hs, &ytmp, &mut k4);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(t + C5 * hs, &ytmp, &mut k5);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_next = if last { t_end } else { t + hs };
        sys.rhs(t + hs, &ytmp, &mut k6);
        for i in 0..n {
            ynew[i] = y[i] + hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        sys.rhs(t_next, &ynew, &mut k7);
        for i in 0..n {
            err[i] = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }

        let finite = ynew.iter().chain(k7.iter()).all(|v| v.is_finite());
        if !finite {
            nonfinite_retries += 1;
            if nonfinite_retries > MAX_NONFINITE_RETRIES {
                return Err(Error::NonFinite { t });
            }
            rejected += 1;
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }
        nonfinite_retries = 0;

        let e = err_norm(&y, &ynew, &err, opts.rtol, opts.atol);
        if e <= 1.0 {
            accepted += 1;
            t = t_next;
            core::mem::swap(&mut y, &mut ynew);
            core::mem::swap(&mut k1, &mut k7);
            let stop = observe(t, &y) == Control::Stop;
            if last || stop {
                return Ok(Outcome { t, y, accepted, rejected, last_h: hs, stopped: stop && !last });
            }
            let mut fac = if e == 0.0 { FAC_MAX } else { SAFETY * e.powf(-0.2) };
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            h = (h * fac).min(opts.h_max);
        } else {
            rejected += 1;
            last_rejected = true;
            let fac = (SAFETY * e.powf(-0.2)).clamp(FAC_MIN, 1.0);
            h *= fac;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay(f64);
    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = self.0 * y[0];
        }
    }

    struct Rotation;
    impl OdeSystem for Rotation {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = -2.0 * y[1];
            dy[1] = 2.0 * y[0];
        }
    }

    struct BlowUp;
    impl OdeSystem for BlowUp {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[0] * y[0];
        }
    }

    #[test]
    fn exponential_decay_forward_and_backward() {
        let opts = SolverOptions::with_tolerances(1e-10, 1e-12);
        let out = solve(&Decay(-1.0), 0.0, &[1.0], 2.0, &opts, |_, _| Control::Continue).unwrap();
        assert_eq!(out.t, 2.0);
        assert!((out.y[0] - (-2.0f64).exp()).abs() < 1e-10);
        let back = solve(&Decay(-1.0), 2.0, &out.y, 0.0, &opts, |_, _| Control::Continue).unwrap();
        assert!((back.y[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rotation_quarter_turn() {
        let opts = SolverOptions::with_tolerances(1e-10, 1e-12);
        let t_end = core::f64::consts::FRAC_PI_4;
        let out = solve(&Rotation, 0.0, &[1.0, 0.0], t_end, &opts, |_, _| Control::Continue).unwrap();
        assert!(out.y[0].abs() < 1e-9);
        assert!((out.y[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn observer_can_stop() {
        let opts = SolverOptions::default();
        let out = solve(&Decay(-1.0), 0.0, &[1.0], 100.0, &opts, |_, y| {
            if y[0] < 0.5 {
                Control::Stop
            } else {
                Control::Continue
            }
        })
        .unwrap();
        assert!(out.stopped);
        assert!(out.t < 100.0 && out.y[0] < 0.5);
    }

    #[test]
    fn finite_time_blow_up_is_reported() {
        let opts = SolverOptions::default();
        let r = solve(&BlowUp, 0.0, &[1.0], 2.0, &opts, |_, _| Control::Continue);
        match r {
            Err(Error::StepUnderflow { t }) | Err(Error::NonFinite { t }) | Err(Error::MaxSteps { t }) => {
                assert!(t < 1.0 + 1e-6 && t > 0.9)
            }
            other => panic!("expected failure, got {:?}", other),
        }
    }

    #[test]
    fn rejects_bad_tolerances() {
        let opts = SolverOptions::with_tolerances(0.0, 1e-12);
        assert!(solve(&Decay(-1.0), 0.0, &[1.0], 1.0, &opts, |_, _| Control::Continue).is_err());
    }

    #[test]
    fn zero_span_returns_initial_state() {
        let out = solve(&Decay(-1.0), 1.0, &[3.0], 1.0, &SolverOptions::default(), |_, _| Control::Continue).unwrap();
        assert_eq!(out.y, [3.0]);
        assert_eq!(out.accepted, 0);
    }
}
