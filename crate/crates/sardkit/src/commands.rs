//! Subcommand implementations. Each writes its human-readable summary to
//! `out` and its data file to `--out` when given.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sardkit_core::charfield::{assemble, cross_check, displayed_field};
use sardkit_core::distribution::{engel_certificate, sigma_check_with, BracketFlag, DEFAULT_RANK_TOL};
use sardkit_core::endpoint::{bryant_hsu_test, char_control, endpoint_jacobian_checked, random_control, SingularVerdict};
use sardkit_core::field::field_difference;
use sardkit_core::flow::{integrate, printed_surface, quadrant_grid, singular_surface, Monitor, SurfaceParams};
use sardkit_core::ode::SolverOptions;
use sardkit_core::sard::{sard_sample, SardConfig};
use sardkit_core::{char_field, CatalogModel, Error as CoreError, PfaffianPair, Point4, QueryPoint, RationalPoint, Var, Variant};
use serde::Serialize;
use serde_json::Value;

use crate::formats::{
    json_with_meta, load_pair, num, parse_control, parse_grid, parse_point, parse_point_f64, poly_to_json, read_text, Csv,
    FormatError, Meta,
};
use crate::verify;

/// Exit code 2: the input was rejected. Exit code 1: the computation or
/// the output failed.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidArgument(_) | CoreError::Parse(_) | CoreError::FieldVanishes { .. } => {
                CliError::Input(e.to_string())
            }
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

pub type CliResult = Result<(), CliError>;

/// Options shared by every subcommand.
#[derive(Clone, Debug)]
pub struct Common {
    pub model: String,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub rtol: f64,
    pub atol: f64,
}

impl Common {
    pub fn solver(&self) -> Result<SolverOptions, CliError> {
        let o = SolverOptions::with_tolerances(self.rtol, self.atol);
        o.validate().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(o)
    }

    fn meta(&self, command: &str) -> Meta {
        Meta::new(command, &self.model, self.seed).param("rtol", num(self.rtol)).param("atol", num(self.atol))
    }
}

/// A catalog model or a user file.
#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    pub pair: PfaffianPair,
    pub catalog: Option<CatalogModel>,
}

pub fn resolve_model(s: &str) -> Result<Model, CliError> {
    if let Some(m) = CatalogModel::from_name(s) {
        return Ok(Model { name: m.name().into(), pair: m.pair(), catalog: Some(m) });
    }
    let path = Path::new(s);
    if path.exists() {
        return Ok(Model { name: s.into(), pair: load_pair(path)?, catalog: None });
    }
    Err(CliError::Input(format!(
        "unknown model '{s}': expected one of engel_std, d224, d2334a, d2334b or a JSON file with keys \"f\" and \"g\""
    )))
}

fn write_file(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn fmt_point(p: &Point4) -> String {
    format!("({}, {}, {}, {})", p.x, p.y, p.z, p.w)
}

pub struct AnalyzeArgs {
    pub points: Vec<String>,
    pub grid: Option<String>,
    pub max_step: usize,
}

pub fn cmd_analyze(c: &Common, a: &AnalyzeArgs, out: &mut dyn Write) -> CliResult {
    let model = resolve_model(&c.model)?;
    if a.max_step < 2 {
        return Err(CliError::Input("--max-step must be at least 2".into()));
    }
    let mut queries: Vec<QueryPoint> = Vec::new();
    for p in &a.points {
        queries.push(QueryPoint::Exact(RationalPoint(parse_point(p)?)));
    }
    if let Some(g) = &a.grid {
        let (lo, hi, n) = parse_grid(g)?;
        for (z, w) in quadrant_grid(lo, hi, n) {
            queries.push(QueryPoint::Float(Point4::new(0.0, 0.0, z, w)));
        }
    }
    if queries.is_empty() {
        queries.push(QueryPoint::Exact(RationalPoint::origin()));
    }
    let flag = BracketFlag::new(&model.pair, a.max_step)?;
    let cert = engel_certificate(&model.pair);
    writeln!(out, "model {}: f = {}, g = {}", model.name, model.pair.f, model.pair.g)?;
    writeln!(out, "engel certificate E = {cert}")?;
    let mut meta = c.meta("analyze").param("max_step", a.max_step);
    if let Some(g) = &a.grid {
        meta = meta.param("grid", g);
    }
    if !a.points.is_empty() {
        meta = meta.param("points", a.points.join(" "));
    }
    let mut csv = Csv::new(&meta, &["x", "y", "z", "w", "growth", "bracket_generating", "certificate", "on_sigma", "disagreement"]);
    for q in &queries {
        let rep = sigma_check_with(&flag, &cert, q, DEFAULT_RANK_TOL);
        let p = q.to_point();
        writeln!(
            out,
            "point {}: growth {} certificate {} on_sigma {} disagreement {}",
            fmt_point(&p),
            rep.growth,
            rep.certificate_value,
            !rep.certificate_nonzero,
            rep.disagreement()
        )?;
        let dims: Vec<String> = rep.growth.dims.iter().map(|d| d.to_string()).collect();
        csv.row([
            num(p.x),
            num(p.y),
            num(p.z),
            num(p.w),
            dims.join(";"),
            rep.growth.bracket_generating.to_string(),
            num(rep.certificate_value),
            (!rep.certificate_nonzero).to_string(),
            rep.disagreement().to_string(),
        ]);
    }
    if let Some(path) = &c.out {
        write_file(path, &csv.finish())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct VariantJson {
    variant: &'static str,
    c: Value,
    e: Value,
}

#[derive(Serialize)]
struct PairJson {
    a: &'static str,
    b: &'static str,
    identical: bool,
    discrepancy_c: Value,
    discrepancy_e: Value,
}

#[derive(Serialize)]
struct DisplayJson {
    matches_oracle: bool,
    /// component name and `oracle − display`
    difference: Vec<(String, Value)>,
}

#[derive(Serialize)]
struct CharJson {
    model: String,
    variants: Vec<VariantJson>,
    variant_pairs: Vec<PairJson>,
    display: Option<DisplayJson>,
}

pub fn cmd_char(c: &Common, out: &mut dyn Write) -> CliResult {
    let model = resolve_model(&c.model)?;
    let cc = cross_check(&model.pair)?;
    writeln!(out, "model {}: f = {}, g = {}", model.name, model.pair.f, model.pair.g)?;
    let mut variants = Vec::new();
    for k in [&cc.printed, &cc.corrected, &cc.oracle] {
        writeln!(out, "{:>9}: c = {}, e = {}", k.variant.name(), k.c, k.e)?;
        variants.push(VariantJson { variant: k.variant.name(), c: poly_to_json(&k.c), e: poly_to_json(&k.e) });
    }
    let mut variant_pairs = Vec::new();
    for v in &cc.comparisons {
        if v.identical {
            writeln!(out, "{} vs {}: identical", v.a, v.b)?;
        } else {
            writeln!(
                out,
                "{} vs {}: differ, c_a − c_b = {}, e_a − e_b = {}{}",
                v.a,
                v.b,
                v.discrepancy_c,
                v.discrepancy_e,
                if v.same_line { " (same line field)" } else { "" }
            )?;
        }
        variant_pairs.push(PairJson {
            a: v.a.name(),
            b: v.b.name(),
            identical: v.identical,
            discrepancy_c: poly_to_json(&v.discrepancy_c),
            discrepancy_e: poly_to_json(&v.discrepancy_e),
        });
    }
    let oracle_field = assemble(&model.pair, &cc.oracle);
    let display = model.catalog.and_then(displayed_field).map(|d| {
        let diff = field_difference(&oracle_field, &d);
        DisplayJson {
            matches_oracle: diff.is_empty(),
            difference: diff.iter().map(|(v, p)| (v.name().to_string(), poly_to_json(p))).collect(),
        }
    });
    let comps: Vec<String> = Var::ALL.iter().map(|&v| format!("({}) d{}", oracle_field.comp(v), v.name())).collect();
    writeln!(out, "oracle C = {}", comps.join(" + "))?;
    if let Some(d) = &display {
        if d.matches_oracle {
            writeln!(out, "displayed field: matches oracle")?;
        } else {
            let parts: Vec<String> = d.difference.iter().map(|(v, p)| format!("d{v}: {p}")).collect();
            writeln!(out, "displayed field: differs from oracle ({})", parts.join(", "))?;
        }
    }
    if let Some(path) = &c.out {
        let body = CharJson { model: model.name.clone(), variants, variant_pairs, display };
        write_file(path, &json_with_meta(&c.meta("char"), &body)?)?;
    }
    Ok(())
}

pub struct FlowArgs {
    pub start: String,
    pub t: f64,
    pub variant: String,
    pub monitors: Vec<String>,
}

fn field_for(model: &Model, variant: &str) -> Result<sardkit_core::PolyVectorField, CliError> {
    match variant {
        "oracle" => Ok(char_field(&model.pair, Variant::Oracle)?),
        "printed" => Ok(char_field(&model.pair, Variant::Printed)?),
        "corrected" => Ok(char_field(&model.pair, Variant::Corrected)?),
        "displayed" => model
            .catalog
            .and_then(displayed_field)
            .ok_or_else(|| CliError::Input(format!("no displayed field for model {}", model.name))),
        other => Err(CliError::Input(format!("unknown variant '{other}'"))),
    }
}

fn monitor_by_name(name: &str, pair: &PfaffianPair) -> Result<Monitor, CliError> {
    match name {
        "rho" => Ok(Monitor::rho()),
        "zw" => Ok(Monitor::zw()),
        "certificate" => Ok(Monitor::new("certificate", engel_certificate(pair))),
        other => Err(CliError::Input(format!("unknown monitor '{other}' (rho, zw, certificate)"))),
    }
}

pub fn cmd_flow(c: &Common, a: &FlowArgs, out: &mut dyn Write) -> CliResult {
    let model = resolve_model(&c.model)?;
    let opts = c.solver()?;
    let start = parse_point_f64(&a.start)?;
    if a.t == 0.0 || !a.t.is_finite() {
        return Err(CliError::Input("--t must be finite and nonzero".into()));
    }
    let field = field_for(&model, &a.variant)?;
    let monitors = a.monitors.iter().map(|m| monitor_by_name(m, &model.pair)).collect::<Result<Vec<_>, _>>()?;
    let traj = integrate(&field, start, a.t, &opts, &monitors)?;
    let end = traj.last().unwrap_or(start);
    writeln!(out, "model {} variant {}: {} steps to t = {}", model.name, a.variant, traj.len() - 1, a.t)?;
    writeln!(out, "start {} end {}", fmt_point(&start), fmt_point(&end))?;
    for ch in &traj.monitors {
        let v0 = ch.values[0];
        let drift = ch.values.iter().map(|v| (v - v0).abs()).fold(0.0, f64::max);
        let (lo, hi) = ch.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        writeln!(out, "monitor {}: initial {} final {} min {} max {} drift {:.3e}", ch.name, v0, ch.values[ch.values.len() - 1], lo, hi, drift)?;
    }
    if let Some(path) = &c.out {
        let meta = c
            .meta("flow")
            .param("start", &a.start)
            .param("t", num(a.t))
            .param("variant", &a.variant)
            .param("monitors", a.monitors.join(";"));
        let mut cols = vec!["t", "x", "y", "z", "w"];
        cols.extend(traj.monitors.iter().map(|m| m.name.as_str()));
        let mut csv = Csv::new(&meta, &cols);
        for (i, (t, q)) in traj.times.iter().zip(&traj.states).enumerate() {
            let mut row = vec![num(*t), num(q.x), num(q.y), num(q.z), num(q.w)];
            row.extend(traj.monitors.iter().map(|m| num(m.values[i])));
            csv.row(row);
        }
        write_file(path, &csv.finish())?;
    }
    Ok(())
}

pub struct SurfaceArgs {
    pub grid: String,
    pub eps_cut: f64,
    pub t_max: f64,
    pub forward_only: bool,
}

pub fn cmd_surface(c: &Common, a: &SurfaceArgs, out: &mut dyn Write) -> CliResult {
    let model = resolve_model(&c.model)?;
    let (lo, hi, n) = parse_grid(&a.grid)?;
    if lo <= 0.0 {
        return Err(CliError::Input("surface grid needs lo > 0 (the origin is excluded)".into()));
    }
    let params = SurfaceParams {
        eps_cut: a.eps_cut,
        t_max: a.t_max,
        solver: c.solver()?,
        allow_backward: !a.forward_only,
        ..Default::default()
    };
    let grid = quadrant_grid(lo, hi, n);
    let s = singular_surface(&model.pair, &grid, &params)?;
    writeln!(
        out,
        "model {}: {}/{} grid points converge to the origin ({} route)",
        model.name,
        s.converged_count(),
        s.len(),
        if s.skew_product { "skew-product" } else { "shooting" }
    )?;
    if let Some(m) = model.catalog {
        let mut worst: Option<f64> = None;
        for i in 0..s.len() {
            let (z, w) = s.grid[i];
            if let (true, Some((px, py))) = (s.converged[i], printed_surface(m, z, w)) {
                let q = s.point(i);
                let rel = ((q.x - px).abs() / px.abs().max(1e-300)).max((q.y - py).abs() / py.abs().max(1e-300));
                worst = Some(worst.map_or(rel, |w: f64| w.max(rel)));
            }
        }
        if let Some(w) = worst {
            writeln!(out, "max relative deviation from the displayed surface formula: {w:.3e}")?;
        }
    }
    if let Some(path) = &c.out {
        let meta = c
            .meta("surface")
            .param("grid", &a.grid)
            .param("eps_cut", num(a.eps_cut))
            .param("t_max", num(a.t_max))
            .param("backward", !a.forward_only);
        let mut csv = Csv::new(&meta, &["z", "w", "x", "y", "converged"]);
        for i in 0..s.len() {
            let q = s.point(i);
            csv.row([num(q.z), num(q.w), num(q.x), num(q.y), s.converged[i].to_string()]);
        }
        write_file(path, &csv.finish())?;
    }
    Ok(())
}

pub struct EndpointArgs {
    pub start: String,
    pub control: Option<PathBuf>,
    pub random_segments: Option<usize>,
    pub char_duration: Option<f64>,
    pub segments: usize,
    pub fd: bool,
    pub sard: Option<usize>,
    pub cloud: Option<PathBuf>,
}

#[derive(Serialize)]
struct VerdictJson {
    endpoint: [f64; 4],
    n_segments: usize,
    sigma_ratio: f64,
    bh_smallest: f64,
    classification: &'static str,
    jacobian_classification: &'static str,
    witness: Option<[f64; 4]>,
    witness_residual: Option<f64>,
    pairing_drift: f64,
    min_transport_det: f64,
    fd_max_discrepancy: Option<f64>,
}

#[derive(Serialize)]
struct SardJson {
    model: String,
    n_curves: usize,
    seed: u64,
    max_surface_distance: Option<f64>,
    min_rho: Option<f64>,
    min_rho_deviation: Option<f64>,
    formula_residual: Option<f64>,
    detector_agreement: f64,
    ambiguous_count: usize,
    singular_count: usize,
    origin_reaching: usize,
    surface_converged: usize,
}

pub fn cmd_endpoint(c: &Common, a: &EndpointArgs, out: &mut dyn Write) -> CliResult {
    let model = resolve_model(&c.model)?;
    let opts = c.solver()?;
    if let Some(n) = a.sard {
        return sard(c, &model, n, &opts, a, out);
    }
    let start = parse_point_f64(&a.start)?;
    let modes = a.control.is_some() as u8 + a.random_segments.is_some() as u8 + a.char_duration.is_some() as u8;
    if modes != 1 {
        return Err(CliError::Input("give exactly one of --control, --random-segments, --char-duration, --sard".into()));
    }
    let (ctrl, source) = if let Some(path) = &a.control {
        (parse_control(&read_text(path)?)?, format!("file {}", path.display()))
    } else if let Some(n) = a.random_segments {
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        (random_control(&mut rng, n)?, format!("random, {n} segments"))
    } else {
        let d = a.char_duration.unwrap_or_default();
        (char_control(&model.pair, start, d, a.segments, &opts)?, format!("characteristic, duration {d}, {} segments", a.segments))
    };
    let v: SingularVerdict = bryant_hsu_test(&model.pair, start, &ctrl, &opts)?;
    let fd = if a.fd { Some(endpoint_jacobian_checked(&model.pair, start, &ctrl, &opts)?.max_discrepancy) } else { None };
    writeln!(out, "model {} control {source}", model.name)?;
    writeln!(out, "endpoint {}", fmt_point(&v.endpoint))?;
    writeln!(out, "jacobian sigma_min/sigma_max {:.6e} -> {}", v.sigma_ratio, v.jacobian_classification)?;
    writeln!(out, "covector test smallest singular value {:.6e} -> {}", v.bh_smallest, v.classification)?;
    if let (Some(w), Some(r)) = (v.witness, v.witness_residual) {
        writeln!(out, "witness covector {:?}, max |h1|+|h2| {:.3e}", w, r)?;
    }
    if let Some(d) = fd {
        writeln!(out, "finite-difference check: max discrepancy {d:.3e}")?;
    }
    if let Some(path) = &c.out {
        let mut meta = c.meta("endpoint").param("start", &a.start).param("control", &source);
        if a.char_duration.is_some() {
            meta = meta.param("segments", a.segments);
        }
        let body = VerdictJson {
            endpoint: v.endpoint.to_array(),
            n_segments: ctrl.n_segments(),
            sigma_ratio: v.sigma_ratio,
            bh_smallest: v.bh_smallest,
            classification: v.classification.name(),
            jacobian_classification: v.jacobian_classification.name(),
            witness: v.witness,
            witness_residual: v.witness_residual,
            pairing_drift: v.pairing_drift,
            min_transport_det: v.min_transport_det,
            fd_max_discrepancy: fd,
        };
        write_file(path, &json_with_meta(&meta, &body)?)?;
    }
    Ok(())
}

fn sard(c: &Common, model: &Model, n: usize, opts: &SolverOptions, a: &EndpointArgs, out: &mut dyn Write) -> CliResult {
    let m = model.catalog.ok_or_else(|| CliError::Input("--sard needs a catalog model".into()))?;
    let cfg = SardConfig {
        n_curves: n,
        seed: c.seed,
        surface: SurfaceParams { solver: *opts, ..Default::default() },
        ..Default::default()
    };
    let r = sard_sample(m, &cfg)?;
    writeln!(out, "model {} curves {} seed {}", m, r.n_curves, r.seed)?;
    if let Some(d) = r.max_surface_distance {
        writeln!(out, "max endpoint distance to the origin-convergent set {d:.3e}")?;
    }
    if let (Some(lo), Some(dev)) = (r.min_rho, r.min_rho_deviation) {
        writeln!(out, "min rho {lo} (max deviation from rho(0) {dev:.3e})")?;
    }
    if let Some(f) = r.formula_residual {
        writeln!(out, "displayed formula family residual {f:.3e}")?;
    }
    writeln!(
        out,
        "origin-reaching {} / {}; detectors: {} singular, {} ambiguous, agreement {}",
        r.origin_reaching, r.n_curves, r.singular_count, r.ambiguous_count, r.detector_agreement
    )?;
    let meta = c.meta("endpoint --sard").param("n_curves", n);
    if let Some(path) = &c.out {
        let body = SardJson {
            model: m.name().into(),
            n_curves: r.n_curves,
            seed: r.seed,
            max_surface_distance: r.max_surface_distance,
            min_rho: r.min_rho,
            min_rho_deviation: r.min_rho_deviation,
            formula_residual: r.formula_residual,
            detector_agreement: r.detector_agreement,
            ambiguous_count: r.ambiguous_count,
            singular_count: r.singular_count,
            origin_reaching: r.origin_reaching,
            surface_converged: r.surface_converged,
        };
        write_file(path, &json_with_meta(&meta, &body)?)?;
    }
    if let Some(path) = &a.cloud {
        let mut csv = Csv::new(&meta, &["x", "y", "z", "w", "score"]);
        for e in &r.endpoints {
            let q = e.point;
            csv.row([num(q.x), num(q.y), num(q.z), num(q.w), num(e.score)]);
        }
        write_file(path, &csv.finish())?;
    }
    Ok(())
}

pub struct VerifyArgs {
    pub criteria: Vec<u8>,
}

/// Runs the acceptance suite; any failing criterion is an internal failure.
pub fn cmd_verify(c: &Common, a: &VerifyArgs, out: &mut dyn Write) -> CliResult {
    let ids: Vec<u8> = if a.criteria.is_empty() { verify::CRITERIA.iter().map(|(i, _)| *i).collect() } else { a.criteria.clone() };
    let mut failed = Vec::new();
    let mut lines = Vec::new();
    for id in ids {
        let r = verify::run(id, c.seed).ok_or_else(|| CliError::Input(format!("no criterion {id} (1-10)")))?;
        writeln!(out, "{r}")?;
        lines.push(r.to_string());
        if !r.passed() {
            failed.push(id);
        }
    }
    if let Some(path) = &c.out {
        let mut text = c.meta("verify").csv_header();
        for l in &lines {
            text.push_str(l);
            text.push('\n');
        }
        write_file(path, &text)?;
    }
    if failed.is_empty() {
        writeln!(out, "all criteria passed")?;
        Ok(())
    } else {
        Err(CliError::Internal(format!("failed criteria: {failed:?}")))
    }
}
