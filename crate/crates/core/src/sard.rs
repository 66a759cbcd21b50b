//! Seeded sampling of singular curves through the origin and of their
//! endpoints, for each catalog model.
//!
//! * `d224`: starts on the reconstructed origin-convergent surface, flowed
//!   forward by `τ ∈ [0, 1]`; endpoints are compared against the surface
//!   recomputed at their own `(z, w)`.
//! * `d2334a`: starts on the two axes (the origin-convergent set). The
//!   displayed formula family is checked separately for invariance.
//! * `d2334b`: starts on the circle `ρ = ρ0`, flowed for `t ∈ [0, t_flow]`.
//! * `engel_std`: the integral curve of `W` through the origin.
//!
//! Every curve also gets a detector verdict on a 64-segment characteristic
//! control along its first arc of length `min(τ, DETECTOR_ARC)`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charfield::{char_field, Variant};
use crate::distribution::CatalogModel;
use crate::endpoint::{bryant_hsu_test, char_control, Classification};
use crate::error::Result;
use crate::flow::{flow_to, integrate_compiled, singular_surface, SurfaceParams, DEFAULT_EPS_CUT};
use crate::ode::SolverOptions;
use crate::poly::Point4;

/// Longest arc handed to the detectors; keeps the piecewise-constant
/// approximation of curved characteristic arcs inside the singular band.
pub const DETECTOR_ARC: f64 = 0.5;
pub const DETECTOR_SEGMENTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SardConfig {
    pub n_curves: usize,
    pub seed: u64,
    /// Range of `|z|`, `|w|` for surface starts.
    pub box_lo: f64,
    pub box_hi: f64,
    /// Start radius² for `d2334b`.
    pub rho0: f64,
    /// Flow time for `d2334b`.
    pub t_flow: f64,
    /// Largest forward flow time for surface starts.
    pub tau_max: f64,
    /// Run both detectors on every curve.
    pub detectors: bool,
    pub surface: SurfaceParams,
}

impl Default for SardConfig {
    fn default() -> Self {
        SardConfig {
            n_curves: 200,
            seed: 0,
            box_lo: 0.01,
            box_hi: 0.1,
            rho0: 0.01,
            t_flow: 10.0,
            tau_max: 1.0,
            detectors: true,
            surface: SurfaceParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SardEndpoint {
    pub start: Point4,
    pub point: Point4,
    /// Signed flow time from `start` to `point`.
    pub tau: f64,
    /// `σ4/σ1`; NaN when detectors are off.
    pub score: f64,
    pub bh_smallest: f64,
    pub classification: Option<Classification>,
    pub jacobian_classification: Option<Classification>,
    pub reaches_origin: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SardReport {
    pub model: CatalogModel,
    pub n_curves: usize,
    pub seed: u64,
    /// Largest distance of an endpoint to the origin-convergent set.
    pub max_surface_distance: Option<f64>,
    /// Smallest `ρ` seen along any trajectory (`d2334b`).
    pub min_rho: Option<f64>,
    /// Largest `|ρ(t) − ρ(0)|` along any trajectory (`d2334b`).
    pub min_rho_deviation: Option<f64>,
    /// Largest residual of the displayed formula family after flowing
    /// (`d224`: relative to the leading-order graph; `d2334a`: invariance).
    pub formula_residual: Option<f64>,
    /// Fraction of decisive curves on which the detectors agree.
    pub detector_agreement: f64,
    pub ambiguous_count: usize,
    /// Curves whose singular verdict is SINGULAR under both detectors.
    pub singular_count: usize,
    /// Sampled curves that run into the origin (`ρ < eps_cut`).
    pub origin_reaching: usize,
    /// Converged points of the surface reconstruction at the start grid.
    pub surface_converged: usize,
    pub endpoints: Vec<SardEndpoint>,
}

impl SardReport {
    fn empty(model: CatalogModel, seed: u64) -> Self {
        SardReport {
            model,
            n_curves: 0,
            seed,
            max_surface_distance: None,
            min_rho: None,
            min_rho_deviation: None,
            formula_residual: None,
            detector_agreement: 1.0,
            ambiguous_count: 0,
            singular_count: 0,
            origin_reaching: 0,
            surface_converged: 0,
            endpoints: Vec::new(),
        }
    }
}

fn signed(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let v = rng.gen_range(lo..=hi);
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

fn surface_distance(model: CatalogModel, q: &Point4, p: &SurfaceParams) -> Result<f64> {
    if model == CatalogModel::EngelStd {
        return Ok((q.x * q.x + q.y * q.y + q.z * q.z).sqrt());
    }
    if q.z == 0.0 && q.w == 0.0 {
        return Ok((q.x * q.x + q.y * q.y).sqrt());
    }
    let s = singular_surface(&model.pair(), &[(q.z, q.w)], p)?;
    if !s.converged[0] {
        return Ok(f64::INFINITY);
    }
    Ok(s.point(0).dist(q))
}

/// Samples `cfg.n_curves` singular curves for `model`.
pub fn sard_sample(model: CatalogModel, cfg: &SardConfig) -> Result<SardReport> {
    let mut report = SardReport::empty(model, cfg.seed);
    if cfg.n_curves == 0 {
        return Ok(report);
    }
    let pair = model.pair();
    let field = char_field(&pair, Variant::Oracle)?.compile();
    let solver: SolverOptions = cfg.surface.solver;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // starts and signed flow times
    let mut starts: Vec<(Point4, f64)> = Vec::with_capacity(cfg.n_curves);
    match model {
        CatalogModel::D224 => {
            let grid: Vec<(f64, f64)> = (0..cfg.n_curves)
                .map(|_| (signed(&mut rng, cfg.box_lo, cfg.box_hi), signed(&mut rng, cfg.box_lo, cfg.box_hi)))
                .collect();
            let taus: Vec<f64> = (0..cfg.n_curves).map(|_| rng.gen_range(0.0..=cfg.tau_max)).collect();
            let s = singular_surface(&pair, &grid, &cfg.surface)?;
            report.surface_converged = s.converged_count();
            for i in 0..s.len() {
                if s.converged[i] {
                    starts.push((s.point(i), taus[i]));
                }
            }
        }
        CatalogModel::D2334A => {
            let mut grid = Vec::with_capacity(cfg.n_curves);
            let mut taus = Vec::with_capacity(cfg.n_curves);
            for i in 0..cfg.n_curves {
                let a = signed(&mut rng, cfg.box_lo, cfg.box_hi);
                grid.push(if i % 2 == 0 { (a, 0.0) } else { (0.0, a) });
                taus.push(rng.gen_range(0.0..=cfg.tau_max));
            }
            let s = singular_surface(&pair, &grid, &cfg.surface)?;
            report.surface_converged = s.converged_count();
            for i in 0..s.len() {
                if let Some(d) = s.directions[i] {
                    starts.push((s.point(i), d.sign() * taus[i]));
                }
            }
            report.formula_residual = Some(formula_family_residual(cfg, &mut rng)?);
        }
        CatalogModel::D2334B => {
            let r = cfg.rho0.sqrt();
            let grid: Vec<(f64, f64)> = (0..cfg.n_curves)
                .map(|_| {
                    let th = rng.gen_range(0.0..core::f64::consts::TAU);
                    (r * th.cos(), r * th.sin())
                })
                .collect();
            let s = singular_surface(&pair, &grid, &cfg.surface)?;
            report.surface_converged = s.converged_count();
            for &(z, w) in &grid {
                starts.push((Point4::new(0.0, 0.0, z, w), cfg.t_flow));
            }
        }
        CatalogModel::EngelStd => {
            for _ in 0..cfg.n_curves {
                starts.push((Point4::ORIGIN, rng.gen_range(-cfg.tau_max..=cfg.tau_max)));
            }
        }
    }

    let mut max_dist: f64 = 0.0;
    let mut min_rho = f64::INFINITY;
    let mut max_dev: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    let mut decisive = 0usize;
    let mut agree = 0usize;
    for &(start, tau) in &starts {
        let rho0 = start.rho();
        let mut reaches = model != CatalogModel::D2334B;
        let end = if tau == 0.0 {
            start
        } else {
            let eps = cfg.surface.eps_cut.min(DEFAULT_EPS_CUT);
            let (traj, stopped) = integrate_compiled(&field, start, tau, &solver, |_, q| q.rho() < eps)?;
            if model == CatalogModel::D2334B {
                reaches = stopped;
                for q in &traj.states {
                    min_rho = min_rho.min(q.rho());
                    max_dev = max_dev.max((q.rho() - rho0).abs());
                }
            }
            traj.last().unwrap_or(start)
        };
        if model != CatalogModel::D2334B {
            max_dist = max_dist.max(surface_distance(model, &end, &cfg.surface)?);
        }
        if model == CatalogModel::D224 {
            let lead = (end.w * end.z * end.z / 3.0, end.z * end.w * end.w / 3.0);
            let rel = ((end.x + lead.0).abs() / lead.0.abs()).max((end.y + lead.1).abs() / lead.1.abs());
            max_rel = max_rel.max(rel);
        }
        if reaches {
            report.origin_reaching += 1;
        }
        let mut ep = SardEndpoint {
            start,
            point: end,
            tau,
            score: f64::NAN,
            bh_smallest: f64::NAN,
            classification: None,
            jacobian_classification: None,
            reaches_origin: reaches,
        };
        if cfg.detectors {
            let arc = tau.signum() * tau.abs().min(DETECTOR_ARC);
            let p0 = if model == CatalogModel::EngelStd { Point4::ORIGIN } else { start };
            if arc != 0.0 {
                let ctrl = char_control(&pair, p0, arc, DETECTOR_SEGMENTS, &solver)?;
                let v = bryant_hsu_test(&pair, p0, &ctrl, &solver)?;
                ep.score = v.sigma_ratio;
                ep.bh_smallest = v.bh_smallest;
                ep.classification = Some(v.classification);
                ep.jacobian_classification = Some(v.jacobian_classification);
                if v.classification == Classification::Ambiguous || v.jacobian_classification == Classification::Ambiguous {
                    report.ambiguous_count += 1;
                }
                if v.classification == Classification::Singular && v.jacobian_classification == Classification::Singular {
                    report.singular_count += 1;
                }
                if let Some(a) = v.detectors_agree() {
                    decisive += 1;
                    if a {
                        agree += 1;
                    }
                }
            }
        }
        report.endpoints.push(ep);
    }
    report.n_curves = report.endpoints.len();
    report.detector_agreement = if decisive == 0 { 1.0 } else { agree as f64 / decisive as f64 };
    match model {
        CatalogModel::D2334B => {
            report.min_rho = Some(min_rho);
            report.min_rho_deviation = Some(max_dev);
        }
        CatalogModel::D224 => {
            report.max_surface_distance = Some(max_dist);
            report.formula_residual = Some(max_rel);
        }
        _ => report.max_surface_distance = Some(max_dist),
    }
    Ok(report)
}

/// Points of the displayed `d2334a` family `x = −zw ln w`,
/// `y = −z²w² ln w` (`w > 0`), flowed by `τ ∈ [0, 1]`; returns the largest
/// residual of the two family equations at the end.
fn formula_family_residual(cfg: &SardConfig, rng: &mut ChaCha8Rng) -> Result<f64> {
    let field = char_field(&CatalogModel::D2334A.pair(), Variant::Oracle)?.compile();
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.n_curves.min(32) {
        let z = signed(rng, cfg.box_lo, cfg.box_hi);
        let w = rng.gen_range(cfg.box_lo..=cfg.box_hi);
        let tau = rng.gen_range(0.0..=cfg.tau_max);
        let l = w.ln();
        let q0 = Point4::new(-z * w * l, -z * z * w * w * l, z, w);
        let q = flow_to(&field, q0, tau, &cfg.surface.solver)?;
        let lq = q.w.ln();
        worst = worst.max((q.x + q.z * q.w * lq).abs()).max((q.y + q.z * q.z * q.w * q.w * lq).abs());
    }
    Ok(worst)
}
