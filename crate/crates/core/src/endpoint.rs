//! The endpoint map restricted to piecewise-constant controls on `[0, 1]`,
//! its Jacobian from the variational equations, the adjoint covector
//! transport, and the two singular-curve detectors built on them.
//!
//! Both detectors share one linearization: along the controlled trajectory
//! `q' = u1 Z(q) + u2 W(q)` the system carries the per-segment propagator and
//! control sensitivities (for the Jacobian) and the adjoint transport
//! `Λ' = −Aᵀ Λ` with `A = u1 DZ + u2 DW` (for the covector test). The
//! covector test looks for `λ0 ≠ 0` whose transport `λ(t) = Λ(t) λ0`
//! annihilates `Z` and `W` along the whole curve.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::charfield::{char_field, coeffs_oracle};
use crate::distribution::{frame, PfaffianPair};
use crate::error::{invalid, Error, Result};
use crate::field::CompiledField;
use crate::flow::{flow_to, Trajectory};
use crate::linalg::{dot4, mat4_det, mat4_mul, mat4_transpose_vec, mat4_vec, svd, singular_values, Mat4, Matrix, IDENTITY4};
use crate::ode::{solve, Control, OdeSystem, SolverOptions};
use crate::poly::Point4;

/// Statistic below which a curve is called singular.
pub const SINGULAR_BELOW: f64 = 1e-7;
/// Statistic above which a curve is called regular.
pub const REGULAR_ABOVE: f64 = 1e-4;
/// Finite-difference step for the Jacobian cross-check.
pub const FD_STEP: f64 = 1e-6;
/// `(c, e)` magnitude under which [`char_control`] refuses to continue.
pub const FIELD_VANISH_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Singular,
    Regular,
    Ambiguous,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Singular => "SINGULAR",
            Classification::Regular => "REGULAR",
            Classification::Ambiguous => "AMBIGUOUS",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Applies the two-sided bands. NaN is ambiguous.
pub fn classify(stat: f64) -> Classification {
    if stat < SINGULAR_BELOW {
        Classification::Singular
    } else if stat > REGULAR_ABOVE {
        Classification::Regular
    } else {
        Classification::Ambiguous
    }
}

/// `Some(agree)` when both verdicts are decisive, `None` otherwise.
pub fn detectors_agree(a: Classification, b: Classification) -> Option<bool> {
    if a == Classification::Ambiguous || b == Classification::Ambiguous {
        None
    } else {
        Some(a == b)
    }
}

/// Piecewise-constant control on `[0, 1]` with equal segments.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlPath {
    u: Vec<(f64, f64)>,
}

impl ControlPath {
    pub fn new(u: Vec<(f64, f64)>) -> Result<Self> {
        if u.is_empty() {
            return Err(invalid("a control needs at least one segment"));
        }
        if !u.iter().all(|(a, b)| a.is_finite() && b.is_finite()) {
            return Err(invalid("control entries must be finite"));
        }
        Ok(ControlPath { u })
    }

    pub fn constant(u1: f64, u2: f64, n_segments: usize) -> Result<Self> {
        ControlPath::new(vec![(u1, u2); n_segments])
    }

    pub fn n_segments(&self) -> usize {
        self.u.len()
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.u
    }

    pub fn segment(&self, k: usize) -> (f64, f64) {
        self.u[k]
    }

    /// Flat `(u1, u2, u1, u2, …)` vector, the Jacobian column order.
    pub fn flat(&self) -> Vec<f64> {
        self.u.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    pub fn from_flat(v: &[f64]) -> Result<Self> {
        if v.len() % 2 != 0 {
            return Err(invalid("flat control must have even length"));
        }
        ControlPath::new(v.chunks(2).map(|c| (c[0], c[1])).collect())
    }

    /// Splits every segment in two; the control as a function of time is
    /// unchanged.
    pub fn refine(&self) -> ControlPath {
        ControlPath { u: self.u.iter().flat_map(|&s| [s, s]).collect() }
    }

    /// Segment `k` covers `[k/n, (k+1)/n]`.
    pub fn bounds(&self, k: usize) -> (f64, f64) {
        let n = self.u.len() as f64;
        (k as f64 / n, (k + 1) as f64 / n)
    }
}

/// Entries drawn i.i.d. uniform in `[−1, 1]`.
pub fn random_control<R: Rng + ?Sized>(rng: &mut R, n_segments: usize) -> Result<ControlPath> {
    ControlPath::new((0..n_segments).map(|_| (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))).collect())
}

/// Compiled frame of a pair.
#[derive(Clone, Debug)]
pub struct Frame {
    pub z: CompiledField,
    pub w: CompiledField,
}

impl Frame {
    pub fn of(pair: &PfaffianPair) -> Self {
        let (z, w) = frame(pair);
        Frame { z: z.compile(), w: w.compile() }
    }
}

struct Horizontal<'a> {
    frame: &'a Frame,
    u: (f64, f64),
}

impl OdeSystem for Horizontal<'_> {
    fn dim(&self) -> usize {
        4
    }
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let q = [y[0], y[1], y[2], y[3]];
        let a = self.frame.z.eval(&q);
        let b = self.frame.w.eval(&q);
        for i in 0..4 {
            dy[i] = self.u.0 * a[i] + self.u.1 * b[i];
        }
    }
}

const P0: usize = 4;
const S1: usize = 20;
const S2: usize = 24;
const L0: usize = 28;
const LIN_DIM: usize = 44;

/// State, segment propagator, control sensitivities and adjoint transport.
struct Linearized<'a> {
    frame: &'a Frame,
    u: (f64, f64),
}

impl OdeSystem for Linearized<'_> {
    fn dim(&self) -> usize {
        LIN_DIM
    }
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let q = [y[0], y[1], y[2], y[3]];
        let (u1, u2) = self.u;
        let vz = self.frame.z.eval(&q);
        let vw = self.frame.w.eval(&q);
        let jz = self.frame.z.jacobian(&q);
        let jw = self.frame.w.jacobian(&q);
        let a: Mat4 = core::array::from_fn(|i| core::array::from_fn(|j| u1 * jz[i][j] + u2 * jw[i][j]));
        for i in 0..4 {
            dy[i] = u1 * vz[i] + u2 * vw[i];
        }
        for i in 0..4 {
            for j in 0..4 {
                let mut p = 0.0;
                let mut l = 0.0;
                for k in 0..4 {
                    p += a[i][k] * y[P0 + 4 * k + j];
                    l -= a[k][i] * y[L0 + 4 * k + j];
                }
                dy[P0 + 4 * i + j] = p;
                dy[L0 + 4 * i + j] = l;
            }
            let mut s1 = vz[i];
            let mut s2 = vw[i];
            for k in 0..4 {
                s1 += a[i][k] * y[S1 + k];
                s2 += a[i][k] * y[S2 + k];
            }
            dy[S1 + i] = s1;
            dy[S2 + i] = s2;
        }
    }
}

fn mat_at(y: &[f64], off: usize) -> Mat4 {
    core::array::from_fn(|i| core::array::from_fn(|j| y[off + 4 * i + j]))
}

fn vec_at(y: &[f64], off: usize) -> [f64; 4] {
    core::array::from_fn(|i| y[off + i])
}

/// One pass of the linearized system.
#[derive(Clone, Debug)]
struct Linearization {
    endpoint: Point4,
    /// `(time, state, Λ(t), P(t, 0))` at each requested sample time.
    samples: Vec<(f64, Point4, Mat4, Mat4)>,
    /// Propagator of each segment, start to end.
    transitions: Vec<Mat4>,
    /// `∂q(end of segment k)/∂u_{k,j}`.
    sensitivities: Vec<[[f64; 4]; 2]>,
}

fn segment_of(t_mid: f64, n: usize) -> usize {
    ((t_mid * n as f64) as usize).min(n - 1)
}

fn linearize(frame: &Frame, q0: Point4, ctrl: &ControlPath, sample_times: &[f64], opts: &SolverOptions) -> Result<Linearization> {
    let n = ctrl.n_segments();
    let mut breaks: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    for &t in sample_times {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid("sample times must lie in [0, 1]"));
        }
        breaks.push(t);
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

    let mut y = vec![0.0; LIN_DIM];
    y[..4].copy_from_slice(&q0.to_array());
    for i in 0..4 {
        y[P0 + 5 * i] = 1.0;
        y[L0 + 5 * i] = 1.0;
    }
    let mut cum = IDENTITY4;
    let mut transitions = Vec::with_capacity(n);
    let mut sensitivities = Vec::with_capacity(n);
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut next_sample = 0usize;
    let mut wanted: Vec<f64> = sample_times.to_vec();
    wanted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));

    let mut record = |t: f64, y: &[f64], cum: &Mat4, next: &mut usize| {
        while *next < wanted.len() && (wanted[*next] - t).abs() < 1e-14 {
            let p = mat4_mul(&mat_at(y, P0), cum);
            samples.push((wanted[*next], Point4::from_array(vec_at(y, 0)), mat_at(y, L0), p));
            *next += 1;
        }
    };
    record(0.0, &y, &cum, &mut next_sample);

    for win in breaks.windows(2) {
        let (a, b) = (win[0], win[1]);
        let k = segment_of(0.5 * (a + b), n);
        let sys = Linearized { frame, u: ctrl.segment(k) };
        let out = solve(&sys, a, &y, b, opts, |_, _| Control::Continue)?;
        y = out.y;
        let (_, seg_end) = ctrl.bounds(k);
        if (b - seg_end).abs() < 1e-14 {
            let pk = mat_at(&y, P0);
            transitions.push(pk);
            sensitivities.push([vec_at(&y, S1), vec_at(&y, S2)]);
            cum = mat4_mul(&pk, &cum);
            for i in 0..16 {
                y[P0 + i] = if i % 5 == 0 { 1.0 } else { 0.0 };
            }
            for i in 0..8 {
                y[S1 + i] = 0.0;
            }
        }
        record(b, &y, &cum, &mut next_sample);
    }
    if transitions.len() != n || samples.len() != wanted.len() {
        return Err(Error::Structural("linearization lost a segment boundary".into()));
    }
    Ok(Linearization { endpoint: Point4::from_array(vec_at(&y, 0)), samples, transitions, sensitivities })
}

fn jacobian_from(lin: &Linearization) -> Matrix {
    let n = lin.transitions.len();
    let mut jac = Matrix::zeros(4, 2 * n);
    let mut after = IDENTITY4;
    for k in (0..n).rev() {
        for j in 0..2 {
            let col = mat4_vec(&after, &lin.sensitivities[k][j]);
            for (i, v) in col.iter().enumerate() {
                jac.set(i, 2 * k + j, *v);
            }
        }
        after = mat4_mul(&after, &lin.transitions[k]);
    }
    jac
}

fn integrate_horizontal(frame: &Frame, q0: Point4, ctrl: &ControlPath, opts: &SolverOptions, keep: bool) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    let mut y = q0.to_array().to_vec();
    if !q0.is_finite() {
        return Err(Error::NonFinite { t: 0.0 });
    }
    if !keep {
        traj.times.push(0.0);
        traj.states.push(q0);
    }
    for k in 0..ctrl.n_segments() {
        let (a, b) = ctrl.bounds(k);
        let sys = Horizontal { frame, u: ctrl.segment(k) };
        let out = solve(&sys, a, &y, b, opts, |t, s| {
            // segment starts repeat the previous segment's end
            if keep && (k == 0 || t != a) {
                traj.times.push(t);
                traj.states.push(Point4::new(s[0], s[1], s[2], s[3]));
            }
            Control::Continue
        })?;
        y = out.y;
    }
    if !keep {
        traj.times.push(1.0);
        traj.states.push(Point4::new(y[0], y[1], y[2], y[3]));
    }
    Ok(traj)
}

/// Solves `q' = u1(t) Z(q) + u2(t) W(q)` on `[0, 1]`, one segment at a time.
/// The last state is the endpoint.
pub fn horizontal_integrate(pair: &PfaffianPair, q0: Point4, ctrl: &ControlPath, opts: &SolverOptions) -> Result<Trajectory> {
    integrate_horizontal(&Frame::of(pair), q0, ctrl, opts, true)
}

/// `end(u) = q(1)`.
pub fn endpoint(pair: &PfaffianPair, q0: Point4, ctrl: &ControlPath, opts: &SolverOptions) -> Result<Point4> {
    endpoint_with(&Frame::of(pair), q0, ctrl, opts)
}

fn endpoint_with(frame: &Frame, q0: Point4, ctrl: &ControlPath, opts: &SolverOptions) -> Result<Point4> {
    let traj = integrate_horizontal(frame, q0, ctrl, opts, false)?;
    traj.last().ok_or_else(|| invalid("empty trajectory"))
}

/// `4 × 2n` derivative of the endpoint in the control entries, column
/// `2k + j` for `u_j` on segment `k`.
pub fn endpoint_jacobian(pair: &PfaffianPair, q0: Point4, ctrl: &ControlPath, opts: &SolverOptions) -> Result<Matrix> {
    let lin = linearize(&Frame::of(pair), q0, ctrl, &[], opts)?;
    Ok(jacobian_from(&lin))
}

/// Central finite differences of the endpoint map with step `h`. The
/// integrator tolerances in `opts` should be far below `h²`.
pub fn fd_jacobian(pair: &PfaffianPair, q0: Point4, ctrl: &ControlPath, h: f64, opts: &SolverOptions) -> Result<Matrix> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("finite-difference step must be positive"));
    }
    let frame = Frame::of(pair);
    let base = ctrl.flat();
    let mut jac = Matrix::zeros(4, base.len());
    for c in 0..base.len() {
        let mut up = base.clone();
        let mut dn = base.clone();
        up[c] += h;
        dn[c] -= h;
        let a = endpoint_with(&frame, q0, &ControlPath::from_flat(&up)?, opts)?.to_array();
        let b = endpoint_with(&frame, q0, &ControlPath::from_flat(&dn)?, opts)?.to_array();
        for i in 0..4 {
            jac.set(i, c, (a[i] - b[i]) / (2.0 * h));
        }
    }
    Ok(jac)
}

/// Solver settings used for the finite-difference oracle.
pub fn fd_options() -> SolverOptions {
    SolverOptions::with_tolerances(1e-13, 1e-15)
}

#[derive(Clone, Debug)]
pub struct CheckedJacobian {
    pub jacobian: Matrix,
    pub finite_difference: Matrix,
    /// Largest entrywise `|J − J_fd|`.
    pub max_discrepancy: f64,
}

/// Variational Jacobian together with its central-difference check.
pub fn endpoint_jacobian_checked(pair: &PfaffianPair, q0: Point4, ctrl: &ControlPath, opts: &SolverOptions) -> Result<CheckedJacobian> {
    let jacobian = endpoint_jacobian(pair, q0, ctrl, opts)?;
    let finite_difference = fd_jacobian(pair, q0, ctrl, FD_STEP, &fd_options())?;
    let max_discrepancy = jacobian.max_abs_diff(&finite_difference);
    Ok(CheckedJacobian { jacobian, finite_difference, max_discrepancy })
}

/// `σ4 / σ1` of a `4 × k` matrix. Missing singular values (`k < 4`) count
/// as zero. NaN for the zero matrix.
pub fn singular_score(jac: &Matrix) -> f64 {
    let mut s = singular_values(jac);
    s.resize(4, 0.0);
    if s[0] == 0.0 {
        return f64::NAN;
    }
    s[3] / s[0]
}

/// Covector transport sampled along a controlled curve.
#[derive(Clone, Debug)]
pub struct AdjointRecord {
    /// States at the sample times.
    pub trajectory: Trajectory,
    /// `Λ(t_i)`: `λ(t_i) = Λ(t_i) λ0`.
    pub transports: Vec<Mat4>,
    /// `P(t_i, 0)` of the variational equation.
    pub propagators: Vec<Mat4>,
    /// Rows `(Λᵀ Z, Λᵀ W)` at each sample: `h_j(t_i) = row_j · λ0`.
    pub constraints: Vec<([f64; 4], [f64; 4])>,
    pub min_abs_det: f64,
    pub endpoint: Point4,
}

impl AdjointRecord {
    /// `max_i max |Λ(t_i)ᵀ P(t_i, 0) − I|`; zero for exact transports, since
    /// `⟨λ(t), δq(t)⟩` is then constant.
    pub fn pairing_drift(&self) -> f64 {
        let mut worst = 0.0f64;
        for (l, p) in self.transports.iter().zip(&self.propagators) {
            for i in 0..4 {
                for j in 0..4 {
                    let v: f64 = (0..4).map(|k| l[k][i] * p[k][j]).sum();
                    let id = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((v - id).abs());
                }
            }
        }
        worst
    }

    /// `⟨λ(t_i), δq(t_i)⟩` for every sample.
    pub fn pairing_series(&self, lambda0: &[f64; 4], dq0: &[f64; 4]) -> Vec<f64> {
        self.transports
            .iter()
            .zip(&self.propagators)
            .map(|(l, p)| dot4(&mat4_vec(l, lambda0), &mat4_vec(p, dq0)))
            .collect()
    }

    /// `max_i |h1(t_i)| + |h2(t_i)|` for the initial covector `lambda0`.
    pub fn h_residual(&self, lambda0: &[f64; 4]) -> f64 {
        self.constraints.iter().map(|(a, b)| dot4(a, lambda0).abs() + dot4(b, lambda0).abs()).fold(0.0, f64::max)
    }

    /// `Φ`: the stacked constraint rows scaled by `1/√m`, so `|Φ λ0|` is
    /// the RMS of the sampled pairings.
    pub fn constraint_map(&self) -> Matrix {
        let m = self.constraints.len();
        let s = 1.0 / (m as f64).sqrt();
        let mut phi = Matrix::zeros(2 * m, 4);
        for (i, (a, b)) in self.constraints.iter().enumerate() {
            for j in 0..4 {
                phi.set(2 * i, j, a[j] * s);
                phi.set(2 * i + 1, j, b[j] * s);
            }
        }
        phi
    }
}

/// Number of constraint samples for a control with `n` segments.
pub fn sample_count(n_segments: usize) -> usize {
    16.max(2 * n_segments)
}

fn uniform_times(m: usize) -> Vec<f64> {
    (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
}

fn record_from(frame: &Frame, lin: &Linearization) -> AdjointRecord {
    let mut trajectory = Trajectory::default();
    let mut transports = Vec::with_capacity(lin.samples.len());
    let mut propagators = Vec::with_capacity(lin.samples.len());
    let mut constraints = Vec::with_capacity(lin.samples.len());
    let mut min_abs_det = f64::INFINITY;
    for (t, q, l, p) in &lin.samples {
        let qa = q.to_array();
        constraints.push((mat4_transpose_vec(l, &frame.z.eval(&qa)), mat4_transpose_vec(l, &frame.w.eval(&qa))));
        min_abs_det = min_abs_det.min(mat4_det(l).abs());
        trajectory.times.push(*t);
        trajectory.states.push(*q);
        transports.push(*l);
        propagators.push(*p);
    }
    AdjointRecord { trajectory, transports, propagators, constraints, min_abs_det, endpoint: lin.endpoint }
}

/// Adjoint transport sampled at `m ≥ 2` uniform times in `[0, 1]`.
pub fn adjoint_transport(pair: &PfaffianPair, q0: Point4, ctrl: &ControlPath, m: usize, opts: &SolverOptions) -> Result<AdjointRecord> {
    if m < 2 {
        return Err(invalid("need at least two sample times"));
    }
    let frame = Frame::of(pair);
    let lin = linearize(&frame, q0, ctrl, &uniform_times(m), opts)?;
    Ok(record_from(&frame, &lin))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularVerdict {
    /// `σ4/σ1` of the endpoint Jacobian.
    pub sigma_ratio: f64,
    /// Smallest singular value of the covector constraint map.
    pub bh_smallest: f64,
    /// Band of `bh_smallest`.
    pub classification: Classification,
    /// Band of `sigma_ratio`.
    pub jacobian_classification: Classification,
    /// Unit initial covector, present when `classification` is singular.
    pub witness: Option<[f64; 4]>,
    /// `max_t |h1| + |h2|` along the curve for the witness.
    pub witness_residual: Option<f64>,
    pub min_transport_det: f64,
    pub pairing_drift: f64,
    pub endpoint: Point4,
}

impl SingularVerdict {
    pub fn detectors_agree(&self) -> Option<bool> {
        detectors_agree(self.classification, self.jacobian_classification)
    }
}

/// Runs both detectors on one linearization of the curve.
pub fn bryant_hsu_test(pair: &PfaffianPair, q0: Point4, ctrl: &ControlPath, opts: &SolverOptions) -> Result<SingularVerdict> {
    let frame = Frame::of(pair);
    let m = sample_count(ctrl.n_segments());
    let lin = linearize(&frame, q0, ctrl, &uniform_times(m), opts)?;
    let sigma_ratio = singular_score(&jacobian_from(&lin));
    let record = record_from(&frame, &lin);
    let dec = svd(&record.constraint_map());
    let bh_smallest = dec.sigma[3];
    let classification = classify(bh_smallest);
    let (witness, witness_residual) = if classification == Classification::Singular {
        let v = &dec.v[3];
        let nv = (v.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let mut lam: [f64; 4] = core::array::from_fn(|i| v[i] / nv);
        // sign convention: the largest entry is positive
        let big = (0..4).fold(0, |b, i| if lam[i].abs() > lam[b].abs() { i } else { b });
        if lam[big] < 0.0 {
            lam.iter_mut().for_each(|x| *x = -*x);
        }
        (Some(lam), Some(record.h_residual(&lam)))
    } else {
        (None, None)
    };
    Ok(SingularVerdict {
        sigma_ratio,
        bh_smallest,
        classification,
        jacobian_classification: classify(sigma_ratio),
        witness,
        witness_residual,
        min_transport_det: record.min_abs_det,
        pairing_drift: record.pairing_drift(),
        endpoint: lin.endpoint,
    })
}

/// Uniform point of the chart box `[−1, 1]⁴`.
pub fn random_base_point<R: Rng + ?Sized>(rng: &mut R) -> Point4 {
    Point4::from_array(core::array::from_fn(|_| rng.gen_range(-1.0..=1.0)))
}

/// Tally of both detectors over seeded random curves.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrialSummary {
    pub trials: usize,
    pub regular: usize,
    pub singular: usize,
    pub ambiguous: usize,
    /// Both detectors decisive and different.
    pub disagreements: usize,
    /// Both detectors decisive.
    pub decisive: usize,
    pub scores: Vec<f64>,
    pub bh_values: Vec<f64>,
}

impl TrialSummary {
    pub fn regular_fraction(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.regular as f64 / self.trials as f64
    }

    /// Fraction of decisive trials on which the detectors agree; 1 when none
    /// are decisive.
    pub fn agreement(&self) -> f64 {
        if self.decisive == 0 {
            return 1.0;
        }
        1.0 - self.disagreements as f64 / self.decisive as f64
    }
}

/// `trials` curves, each a random base point in the chart box and a random
/// control with `n_segments` segments, drawn in that order from `rng`.
pub fn random_trials<R: Rng + ?Sized>(
    pair: &PfaffianPair,
    rng: &mut R,
    trials: usize,
    n_segments: usize,
    opts: &SolverOptions,
) -> Result<TrialSummary> {
    let mut out = TrialSummary { trials, ..Default::default() };
    for _ in 0..trials {
        let q0 = random_base_point(rng);
        let ctrl = random_control(rng, n_segments)?;
        let v = bryant_hsu_test(pair, q0, &ctrl, opts)?;
        match v.classification {
            Classification::Regular => out.regular += 1,
            Classification::Singular => out.singular += 1,
            Classification::Ambiguous => out.ambiguous += 1,
        }
        if let Some(a) = v.detectors_agree() {
            out.decisive += 1;
            if !a {
                out.disagreements += 1;
            }
        }
        out.scores.push(v.sigma_ratio);
        out.bh_values.push(v.bh_smallest);
    }
    Ok(out)
}

/// Piecewise-constant approximation of the characteristic curve from `p0`
/// run for time `duration`, rescaled to unit time: segment `k` carries
/// `duration · (c, e)` evaluated at the curve's midpoint time.
pub fn char_control(pair: &PfaffianPair, p0: Point4, duration: f64, n_segments: usize, opts: &SolverOptions) -> Result<ControlPath> {
    if duration == 0.0 || !duration.is_finite() {
        return Err(invalid("duration must be finite and nonzero"));
    }
    if n_segments == 0 {
        return Err(invalid("need at least one segment"));
    }
    let k = coeffs_oracle(pair)?;
    let (c, e) = (k.c.compile(), k.e.compile());
    let field = char_field(pair, crate::charfield::Variant::Oracle)?.compile();
    let mut q = p0;
    let mut t = 0.0;
    let mut u = Vec::with_capacity(n_segments);
    for s in 0..n_segments {
        let mid = duration * (s as f64 + 0.5) / n_segments as f64;
        q = flow_to(&field, q, mid - t, opts)?;
        t = mid;
        let qa = q.to_array();
        let (cv, ev) = (c.eval(&qa), e.eval(&qa));
        if (cv * cv + ev * ev).sqrt() < FIELD_VANISH_TOL {
            return Err(Error::FieldVanishes { t: mid });
        }
        u.push((duration * cv, duration * ev));
    }
    ControlPath::new(u)
}
