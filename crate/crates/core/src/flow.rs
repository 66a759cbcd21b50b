//! Integral curves of characteristic fields, monitored quantities, the
//! closed-form solutions of the displayed degenerate fields, and the
//! reconstruction of the set of points whose characteristic curve runs into
//! the origin.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::charfield::{char_field, displayed_field, Variant};
use crate::distribution::{CatalogModel, PfaffianPair};
use crate::error::{invalid, Error, Result};
use crate::field::{CompiledField, PolyVectorField};
use crate::ode::{solve, Control, OdeSystem, SolverOptions};
use crate::poly::{Point4, SparsePoly, Var};

pub const DEFAULT_EPS_CUT: f64 = 1e-10;
pub const DEFAULT_T_MAX: f64 = 30.0;
/// Tail bound below which a surface sample counts as converged.
pub const TAIL_TOL: f64 = 1e-10;

pub(crate) struct FieldSystem<'a>(pub &'a CompiledField);

impl OdeSystem for FieldSystem<'_> {
    fn dim(&self) -> usize {
        4
    }
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let v = self.0.eval(&[y[0], y[1], y[2], y[3]]);
        dy.copy_from_slice(&v);
    }
}

/// A named polynomial sampled along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct Monitor {
    pub name: String,
    pub quantity: SparsePoly,
}

impl Monitor {
    pub fn new(name: &str, quantity: SparsePoly) -> Self {
        Monitor { name: String::from(name), quantity }
    }

    /// `rho = z² + w²`.
    pub fn rho() -> Self {
        let z = SparsePoly::var(Var::Z);
        let w = SparsePoly::var(Var::W);
        Monitor::new("rho", &z * &z + &w * &w)
    }

    /// `zw`.
    pub fn zw() -> Self {
        Monitor::new("zw", SparsePoly::var(Var::Z) * SparsePoly::var(Var::W))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonitorChannel {
    pub name: String,
    pub values: Vec<f64>,
}

/// Time-sampled solution: one entry per accepted step, starting with the
/// initial state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Point4>,
    pub monitors: Vec<MonitorChannel>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<Point4> {
        self.states.last().copied()
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.monitors.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    /// Largest coordinate norm along the path.
    pub fn max_norm(&self) -> f64 {
        self.states.iter().map(|p| p.dist(&Point4::ORIGIN)).fold(0.0, f64::max)
    }

    pub fn attach_monitors(&mut self, monitors: &[Monitor]) {
        for m in monitors {
            let values = self.states.iter().map(|q| m.quantity.eval(q)).collect();
            self.monitors.push(MonitorChannel { name: m.name.clone(), values });
        }
    }
}

/// Integrates a compiled field, stopping early when `stop` returns true.
/// Returns the trajectory without monitors and whether it stopped early.
pub fn integrate_compiled<F>(
    field: &CompiledField,
    q0: Point4,
    t_end: f64,
    opts: &SolverOptions,
    mut stop: F,
) -> Result<(Trajectory, bool)>
where
    F: FnMut(f64, &Point4) -> bool,
{
    if !q0.is_finite() {
        return Err(Error::NonFinite { t: 0.0 });
    }
    let mut traj = Trajectory::default();
    let out = solve(&FieldSystem(field), 0.0, &q0.to_array(), t_end, opts, |t, y| {
        let q = Point4::new(y[0], y[1], y[2], y[3]);
        traj.times.push(t);
        traj.states.push(q);
        if stop(t, &q) {
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    Ok((traj, out.stopped))
}

/// Adaptive Dormand–Prince solution of `q' = field(q)` from `q0` over
/// `[0, t_end]` (backward when `t_end < 0`), with monitor channels.
pub fn integrate(
    field: &PolyVectorField,
    q0: Point4,
    t_end: f64,
    opts: &SolverOptions,
    monitors: &[Monitor],
) -> Result<Trajectory> {
    if t_end == 0.0 || !t_end.is_finite() {
        return Err(invalid("t_end must be finite and nonzero"));
    }
    let (mut traj, _) = integrate_compiled(&field.compile(), q0, t_end, opts, |_, _| false)?;
    traj.attach_monitors(monitors);
    Ok(traj)
}

/// Final state of a flow, without keeping the path.
pub fn flow_to(field: &CompiledField, q0: Point4, t: f64, opts: &SolverOptions) -> Result<Point4> {
    if t == 0.0 {
        return Ok(q0);
    }
    let out = solve(&FieldSystem(field), 0.0, &q0.to_array(), t, opts, |_, _| Control::Continue)?;
    Ok(Point4::new(out.y[0], out.y[1], out.y[2], out.y[3]))
}

/// Closed-form solutions of the displayed `d224` and `d2334a` fields.
///
/// For `d224`, `(z, w)` decay like `e^{−2t}` and quadrature of
/// `x' = 2z²w`, `y' = 2zw²` gives
/// `x(t) = x_∞ − (1/3) e^{−6t} z²(0) w(0)` with `x_∞ = x(0) + (1/3) z²(0) w(0)`
/// (and likewise for `y` with `z(0) w²(0)`), so the curve passes through
/// `q_init` at `t = 0`. For `d2334a`, `z = e^{−2t} z(0)`, `w = e^{2t} w(0)`,
/// `x = x(0) − 2 z(0) w(0) t`, `y = y(0) − 2 z²(0) w²(0) t`.
pub fn closed_form(model: CatalogModel, q_init: Point4, t: f64) -> Result<Point4> {
    let Point4 { x, y, z, w } = q_init;
    match model {
        CatalogModel::D224 => {
            let d = (-2.0 * t).exp();
            let s = 1.0 - (-6.0 * t).exp();
            Ok(Point4::new(x + z * z * w * s / 3.0, y + z * w * w * s / 3.0, z * d, w * d))
        }
        CatalogModel::D2334A => {
            let zw = z * w;
            Ok(Point4::new(x - 2.0 * zw * t, y - 2.0 * zw * zw * t, z * (-2.0 * t).exp(), w * (2.0 * t).exp()))
        }
        other => Err(Error::NoClosedForm(String::from(other.name()))),
    }
}

/// `max_t |quantity(q(t)) − quantity(q(0))|`.
pub fn conserved_drift(traj: &Trajectory, quantity: &SparsePoly) -> Result<f64> {
    let first = traj.states.first().ok_or_else(|| invalid("empty trajectory"))?;
    let q0 = quantity.eval(first);
    Ok(traj.states.iter().map(|q| (quantity.eval(q) - q0).abs()).fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RhoViolation {
    pub t: f64,
    pub previous: f64,
    pub current: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovReport {
    /// `ρ` never increases between accepted steps.
    pub rho_monotone: bool,
    /// `ρ` decreases at every accepted step (vacuous at the equilibrium).
    pub strictly_decreasing: bool,
    pub violations: Vec<RhoViolation>,
    pub initial_rho: f64,
    pub final_rho: f64,
    pub steps: usize,
}

/// Checks that `ρ = z² + w²` is non-increasing along the oracle field of
/// `d224` from `q0`, which must satisfy `|z|, |w| ≤ 1/2`.
pub fn lyapunov_report(q0: Point4, t_end: f64, opts: &SolverOptions) -> Result<LyapunovReport> {
    if q0.z.abs() > 0.5 || q0.w.abs() > 0.5 {
        return Err(invalid("lyapunov_report needs |z|, |w| <= 1/2"));
    }
    let field = char_field(&CatalogModel::D224.pair(), Variant::Oracle)?;
    let traj = integrate(&field, q0, t_end, opts, &[])?;
    let rho: Vec<f64> = traj.states.iter().map(Point4::rho).collect();
    let mut violations = Vec::new();
    let mut strictly = true;
    for k in 1..rho.len() {
        if rho[k] > rho[k - 1] {
            violations.push(RhoViolation { t: traj.times[k], previous: rho[k - 1], current: rho[k] });
        }
        if rho[k] >= rho[k - 1] && rho[k - 1] > 0.0 {
            strictly = false;
        }
    }
    Ok(LyapunovReport {
        rho_monotone: violations.is_empty(),
        strictly_decreasing: strictly,
        violations,
        initial_rho: rho[0],
        final_rho: *rho.last().unwrap_or(&rho[0]),
        steps: rho.len() - 1,
    })
}

/// Which time direction carried a sample into the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowDirection {
    Forward,
    Backward,
}

impl FlowDirection {
    pub fn sign(self) -> f64 {
        match self {
            FlowDirection::Forward => 1.0,
            FlowDirection::Backward => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceParams {
    pub eps_cut: f64,
    pub t_max: f64,
    pub solver: SolverOptions,
    /// Also try negative time when forward time does not reach the origin.
    pub allow_backward: bool,
    /// Abandon a sample once `ρ` exceeds this value.
    pub escape_rho: f64,
    /// Use the shooting route even when the field is a skew product.
    pub force_full: bool,
}

impl Default for SurfaceParams {
    fn default() -> Self {
        SurfaceParams {
            eps_cut: DEFAULT_EPS_CUT,
            t_max: DEFAULT_T_MAX,
            solver: SolverOptions::default(),
            allow_backward: true,
            escape_rho: 1e6,
            force_full: false,
        }
    }
}

/// Samples of the origin-convergent set as a graph over `(z, w)`: the
/// surface point for grid entry `i` is `(−δx_i, −δy_i, z_i, w_i)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SurfaceSample {
    pub grid: Vec<(f64, f64)>,
    pub offsets: Vec<(f64, f64)>,
    pub converged: Vec<bool>,
    pub directions: Vec<Option<FlowDirection>>,
    /// Estimated remaining contribution of `|C^x| + |C^y|` after the cut.
    pub tails: Vec<f64>,
    /// Whether the fast skew-product route was used.
    pub skew_product: bool,
}

impl SurfaceSample {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn point(&self, i: usize) -> Point4 {
        let (z, w) = self.grid[i];
        let (dx, dy) = self.offsets[i];
        Point4::new(-dx, -dy, z, w)
    }

    pub fn converged_count(&self) -> usize {
        self.converged.iter().filter(|&&c| c).count()
    }
}

/// True when `(C^z, C^w)` is an autonomous planar field and `C^x`, `C^y`
/// depend on `(z, w)` only.
pub fn is_skew_product(field: &PolyVectorField) -> bool {
    field.comps.iter().all(|c| !c.depends_on(Var::X) && !c.depends_on(Var::Y))
}

struct Run {
    end: Point4,
    reached: bool,
    tail: f64,
}

fn tail_estimate(field: &CompiledField, q: &Point4, dir: f64) -> f64 {
    let c = field.eval(&q.to_array());
    let rho = q.rho();
    let xy = c[0].abs() + c[1].abs();
    if rho == 0.0 {
        return if xy == 0.0 { 0.0 } else { f64::INFINITY };
    }
    let rate = -dir * (2.0 * q.z * c[2] + 2.0 * q.w * c[3]) / rho;
    if rate <= 0.0 {
        return if xy == 0.0 { 0.0 } else { f64::INFINITY };
    }
    // C^x, C^y lie in the ideal (z, w), so they decay at least like √ρ
    xy / (0.5 * rate)
}

fn run_to_origin(field: &CompiledField, start: Point4, dir: f64, p: &SurfaceParams) -> Result<Run> {
    let eps = p.eps_cut;
    let escape = p.escape_rho.max(10.0 * start.rho());
    let (traj, _) = integrate_compiled(field, start, dir * p.t_max, &p.solver, |_, q| {
        let r = q.rho();
        r < eps || r > escape
    })?;
    let end = traj.last().unwrap_or(start);
    let reached = end.rho() < eps;
    let tail = if reached { tail_estimate(field, &end, dir) } else { f64::INFINITY };
    Ok(Run { end, reached, tail })
}

/// Newton shooting on the initial `(x, y)` so that the flow from
/// `(x, y, z, w)` ends at `x = y = 0`. Used when the field is not a skew
/// product.
fn shoot(field: &CompiledField, z: f64, w: f64, dir: f64, p: &SurfaceParams) -> Result<Option<(f64, f64, f64)>> {
    let residual = |x0: f64, y0: f64| -> Result<Option<([f64; 2], f64)>> {
        let run = run_to_origin(field, Point4::new(x0, y0, z, w), dir, p)?;
        Ok(run.reached.then_some(([run.end.x, run.end.y], run.tail)))
    };
    let (mut x0, mut y0) = (0.0, 0.0);
    let h = 1e-7;
    for _ in 0..20 {
        let Some((r, tail)) = residual(x0, y0)? else { return Ok(None) };
        if r[0].abs() + r[1].abs() < 1e-13 {
            return Ok(Some((x0, y0, tail)));
        }
        let Some((rx, _)) = residual(x0 + h, y0)? else { return Ok(None) };
        let Some((ry, _)) = residual(x0, y0 + h)? else { return Ok(None) };
        let j = [[(rx[0] - r[0]) / h, (ry[0] - r[0]) / h], [(rx[1] - r[1]) / h, (ry[1] - r[1]) / h]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 {
            return Ok(None);
        }
        x0 -= (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        y0 -= (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
    }
    Ok(None)
}

/// For each `(z, w)` in the grid, follows the oracle characteristic field of
/// `pair` until `ρ < eps_cut` and records the accumulated `(δx, δy)`.
pub fn singular_surface(pair: &PfaffianPair, grid: &[(f64, f64)], p: &SurfaceParams) -> Result<SurfaceSample> {
    if !(p.eps_cut > 0.0 && p.t_max > 0.0) {
        return Err(invalid("eps_cut and t_max must be positive"));
    }
    if grid.iter().any(|&(z, w)| z == 0.0 && w == 0.0) {
        return Err(invalid("surface grid must exclude (0, 0)"));
    }
    let field = char_field(pair, Variant::Oracle)?;
    let skew = is_skew_product(&field) && !p.force_full;
    let compiled = field.compile();
    let mut out = SurfaceSample { skew_product: skew, ..Default::default() };
    let dirs: &[FlowDirection] = if p.allow_backward {
        &[FlowDirection::Forward, FlowDirection::Backward]
    } else {
        &[FlowDirection::Forward]
    };
    for &(z, w) in grid {
        let mut result = None;
        for &d in dirs {
            if skew {
                let run = run_to_origin(&compiled, Point4::new(0.0, 0.0, z, w), d.sign(), p)?;
                if run.reached && run.tail < TAIL_TOL {
                    result = Some(((run.end.x, run.end.y), d, run.tail));
                    break;
                }
            } else if let Some((x0, y0, tail)) = shoot(&compiled, z, w, d.sign(), p)? {
                if tail < TAIL_TOL {
                    result = Some(((-x0, -y0), d, tail));
                    break;
                }
            }
        }
        out.grid.push((z, w));
        match result {
            Some((off, d, tail)) => {
                out.offsets.push(off);
                out.converged.push(true);
                out.directions.push(Some(d));
                out.tails.push(tail);
            }
            None => {
                out.offsets.push((f64::NAN, f64::NAN));
                out.converged.push(false);
                out.directions.push(None);
                out.tails.push(f64::INFINITY);
            }
        }
    }
    Ok(out)
}

/// Re-integrates from every converged surface point for `t_max` in its
/// convergence direction; returns `(ρ_final, |x| + |y|)` per converged sample.
pub fn surface_membership(pair: &PfaffianPair, s: &SurfaceSample, p: &SurfaceParams) -> Result<Vec<(f64, f64)>> {
    let field = char_field(pair, Variant::Oracle)?.compile();
    let mut out = Vec::new();
    for i in 0..s.len() {
        let Some(d) = s.directions[i] else { continue };
        let q = flow_to(&field, s.point(i), d.sign() * p.t_max, &p.solver)?;
        out.push((q.rho(), q.x.abs() + q.y.abs()));
    }
    Ok(out)
}

/// Uniform `n × n` grid over `[lo, hi]²` in `(|z|, |w|)`, replicated over
/// the four sign quadrants.
pub fn quadrant_grid(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let vals: Vec<f64> = if n <= 1 {
        alloc::vec![lo]
    } else {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    };
    let mut g = Vec::with_capacity(4 * n * n);
    for sz in [1.0, -1.0] {
        for sw in [1.0, -1.0] {
            for &a in &vals {
                for &b in &vals {
                    g.push((sz * a, sw * b));
                }
            }
        }
    }
    g
}

/// Reference offsets from the displayed surface formulas:
/// `d224`: `(x, y) = −(1/3)(wz², zw²)`; `d2334a` (for `w > 0`):
/// `(x, y) = (−zw ln w, −z²w² ln w)`.
pub fn printed_surface(model: CatalogModel, z: f64, w: f64) -> Option<(f64, f64)> {
    match model {
        CatalogModel::D224 => Some((-w * z * z / 3.0, -z * w * w / 3.0)),
        CatalogModel::D2334A if w > 0.0 => {
            let l = w.ln();
            Some((-z * w * l, -z * z * w * w * l))
        }
        _ => None,
    }
}

/// The displayed field for a catalog model, as a flow-ready field.
pub fn printed_case_field(model: CatalogModel) -> Option<PolyVectorField> {
    displayed_field(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_4;

    fn oracle(m: CatalogModel) -> PolyVectorField {
        char_field(&m.pair(), Variant::Oracle).unwrap()
    }

    #[test]
    fn case3_quarter_period() {
        let t = integrate(&oracle(CatalogModel::D2334B), Point4::new(0.0, 0.0, 1.0, 0.0), FRAC_PI_4, &SolverOptions::default(), &[Monitor::rho()]).unwrap();
        let q = t.last().unwrap();
        assert!(q.z.abs() < 1e-9 && (q.w - 1.0).abs() < 1e-9, "{:?}", q);
        let rho = t.channel("rho").unwrap();
        assert!(rho.iter().all(|r| (r - 1.0).abs() <= 1e-9));
    }

    #[test]
    fn case2_conserves_zw() {
        let t = integrate(&oracle(CatalogModel::D2334A), Point4::new(0.0, 0.0, 1.0, 1.0), 2.0, &SolverOptions::default(), &[Monitor::zw()]).unwrap();
        assert!(t.channel("zw").unwrap().iter().all(|v| (v - 1.0).abs() <= 1e-9));
    }

    #[test]
    fn zero_field_is_constant() {
        let q0 = Point4::new(0.3, -1.0, 2.0, 0.5);
        let t = integrate(&PolyVectorField::zero(), q0, 3.0, &SolverOptions::default(), &[]).unwrap();
        assert!(t.states.iter().all(|q| *q == q0));
        assert_eq!(conserved_drift(&t, &Monitor::rho().quantity).unwrap(), 0.0);
    }

    #[test]
    fn integrate_rejects_zero_time() {
        assert!(integrate(&PolyVectorField::zero(), Point4::ORIGIN, 0.0, &SolverOptions::default(), &[]).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let q = closed_form(CatalogModel::D2334A, Point4::new(0.0, 0.0, 1.0, 1.0), 1.0).unwrap();
        assert!((q.x + 2.0).abs() < 1e-15 && (q.y + 2.0).abs() < 1e-15);
        assert!((q.z - (-2.0f64).exp()).abs() < 1e-15 && (q.w - 2.0f64.exp()).abs() < 1e-12);

        let lim = closed_form(CatalogModel::D224, Point4::new(0.0, 0.0, 1.0, 1.0), 60.0).unwrap();
        assert!((lim.x - 1.0 / 3.0).abs() < 1e-15 && (lim.y - 1.0 / 3.0).abs() < 1e-15);
        let lim = closed_form(CatalogModel::D224, Point4::new(-1.0 / 3.0, -1.0 / 3.0, 1.0, 1.0), 60.0).unwrap();
        assert!(lim.dist(&Point4::ORIGIN) < 1e-15);

        for m in [CatalogModel::D224, CatalogModel::D2334A] {
            let q0 = Point4::new(0.1, 0.2, 0.3, 0.4);
            assert_eq!(closed_form(m, q0, 0.0).unwrap(), q0);
        }
        assert!(closed_form(CatalogModel::D2334B, Point4::ORIGIN, 1.0).is_err());
    }

    #[test]
    fn drift_examples() {
        let t = integrate(&oracle(CatalogModel::D2334B), Point4::new(0.0, 0.0, 1.0, 0.0), 10.0, &SolverOptions::default(), &[]).unwrap();
        assert!(conserved_drift(&t, &Monitor::rho().quantity).unwrap() <= 1e-8);
        let t = integrate(&oracle(CatalogModel::D2334A), Point4::new(0.0, 0.0, 1.0, 1.0), 2.0, &SolverOptions::default(), &[]).unwrap();
        assert!(conserved_drift(&t, &Monitor::zw().quantity).unwrap() <= 1e-8);
        assert!(conserved_drift(&Trajectory::default(), &Monitor::zw().quantity).is_err());
    }

    #[test]
    fn lyapunov_examples() {
        let opts = SolverOptions::default();
        let r = lyapunov_report(Point4::new(0.0, 0.0, 0.3, 0.3), 10.0, &opts).unwrap();
        assert!(r.rho_monotone && r.strictly_decreasing);
        assert!(r.final_rho < 1e-6);
        let r = lyapunov_report(Point4::ORIGIN, 10.0, &opts).unwrap();
        assert!(r.rho_monotone && r.final_rho == 0.0);
        let r = lyapunov_report(Point4::new(0.0, 0.0, 0.5, -0.5), 10.0, &opts).unwrap();
        assert!(r.rho_monotone && r.strictly_decreasing);
        assert!(lyapunov_report(Point4::new(0.0, 0.0, 0.6, 0.0), 1.0, &opts).is_err());
    }

    #[test]
    fn d224_surface_leading_order() {
        let s = singular_surface(&CatalogModel::D224.pair(), &[(0.1, 0.1)], &SurfaceParams::default()).unwrap();
        assert!(s.converged[0] && s.skew_product);
        let p = s.point(0);
        let want = -1.0e-3 / 3.0;
        assert!(((p.x - want) / want).abs() < 0.05 && ((p.y - want) / want).abs() < 0.05);
    }

    #[test]
    fn d224_axis_has_zero_offsets() {
        let s = singular_surface(&CatalogModel::D224.pair(), &[(0.05, 0.0), (0.0, -0.07)], &SurfaceParams::default()).unwrap();
        for i in 0..2 {
            assert!(s.converged[i]);
            assert_eq!(s.offsets[i], (0.0, 0.0));
        }
    }

    #[test]
    fn d2334b_never_converges() {
        let g: Vec<(f64, f64)> = (0..8)
            .map(|k| {
                let a = k as f64 * 0.7;
                (0.1 * a.cos(), 0.1 * a.sin())
            })
            .collect();
        let s = singular_surface(&CatalogModel::D2334B.pair(), &g, &SurfaceParams::default()).unwrap();
        assert_eq!(s.converged_count(), 0);
    }

    #[test]
    fn d2334a_converges_only_on_axes() {
        let s = singular_surface(
            &CatalogModel::D2334A.pair(),
            &[(0.05, 0.0), (0.0, 0.05), (0.05, 0.05)],
            &SurfaceParams::default(),
        )
        .unwrap();
        assert_eq!(s.converged, [true, true, false]);
        assert_eq!(s.directions[0], Some(FlowDirection::Forward));
        assert_eq!(s.directions[1], Some(FlowDirection::Backward));
    }

    #[test]
    fn surface_rejects_origin() {
        assert!(singular_surface(&CatalogModel::D224.pair(), &[(0.0, 0.0)], &SurfaceParams::default()).is_err());
    }

    #[test]
    fn shooting_route_agrees_with_skew_route() {
        let pair = CatalogModel::D224.pair();
        let g = [(0.08, -0.05), (-0.03, 0.09)];
        let fast = singular_surface(&pair, &g, &SurfaceParams::default()).unwrap();
        let slow = singular_surface(&pair, &g, &SurfaceParams { force_full: true, ..Default::default() }).unwrap();
        assert!(!slow.skew_product);
        for i in 0..g.len() {
            assert!(slow.converged[i]);
            assert!(fast.point(i).dist(&slow.point(i)) < 1e-10);
        }
    }

    #[test]
    fn printed_reference_surface() {
        assert_eq!(printed_surface(CatalogModel::D224, 0.3, 0.3), Some((-0.009, -0.009)));
        assert_eq!(printed_surface(CatalogModel::D2334A, 0.3, 1.0), Some((-0.0, -0.0)));
        assert_eq!(printed_surface(CatalogModel::D2334A, 0.3, -1.0), None);
        assert_eq!(printed_surface(CatalogModel::D2334B, 0.3, 1.0), None);
    }

    #[test]
    fn quadrant_grid_shape() {
        let g = quadrant_grid(0.01, 0.1, 3);
        assert_eq!(g.len(), 36);
        assert!(g.iter().all(|&(z, w)| z.abs() >= 0.01 && w.abs() <= 0.1));
    }
}
