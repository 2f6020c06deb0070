//! Subcommand implementations. Each returns a JSON report; data tables are
//! written to the side paths given on the command line.

use crate::error::{CliError, CliResult};
use crate::input::{read_json, read_rhs, write_text, BodyInput, NormalizedProblem};
use gengauss::density::{ball_mass, normalizer, support_cutoff};
use gengauss::geometry::{PolytopeJson, DEFAULT_GRID_2D, DEFAULT_GRID_3D};
use gengauss::inequalities::{
    brunn_minkowski_suite, divergence_suite, estimate_isoperimetric_half, gtilde_suite,
    lp_isoperimetric_suite, threshold_report, SuiteConfig, EPS_QUAD,
};
use gengauss::isotropic::{constant_roots, critical_constant, linearized_coefficient, ln_phi, RootKind};
use gengauss::ma2d::{
    continuity_solve, two_branch_solve, uniqueness_probe, MASolution, NewtonOptions, PeriodicField,
    DEFAULT_MA_GRID,
};
use gengauss::measures::{gauss_volume_with, weighted_surface_measure, FacetQuadrature};
use gengauss::normalized::{solve_normalized, solve_normalized_even, DiscreteMeasure, SolverOptions};
use gengauss::quadrature::QuadratureOptions;
use gengauss::{Error, Params};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Envelope shared by every report.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub version: &'static str,
    pub command: &'static str,
    pub params: Value,
    pub grid: Value,
    pub seed: Option<u64>,
    pub tolerances: Value,
    pub result: Value,
}

impl Report {
    fn new(command: &'static str, params: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION"),
            command,
            params,
            grid: Value::Null,
            seed: None,
            tolerances: json!({}),
            result: Value::Null,
        }
    }
}

fn default_grid(dim: usize) -> usize {
    if dim == 2 {
        DEFAULT_GRID_2D
    } else {
        DEFAULT_GRID_3D
    }
}

/// G with an error estimate: m vs 2m facets for named shapes, and the default
/// vs a refined quadrature for explicit facets.
pub fn volume(params: &Params, body: &Path, grid: Option<usize>, tol: Option<f64>) -> CliResult<Report> {
    let input: BodyInput = read_json(body)?;
    let mut opts = QuadratureOptions::default();
    if let Some(t) = tol {
        opts.rel_tol = t;
    }
    let quad = FacetQuadrature::new(opts.clone());
    let fine = FacetQuadrature::new(QuadratureOptions {
        segment_order: opts.segment_order + 8,
        triangle_order: opts.triangle_order + 2,
        abs_tol: opts.abs_tol * 0.1,
        rel_tol: opts.rel_tol * 0.1,
        ..opts.clone()
    });
    let n = params.n();
    let mut rep = Report::new("volume", json!(params));
    let result = match &input {
        BodyInput::Facets(_) => {
            let k = input.build(n, 0)?;
            let g = gauss_volume_with(params, &k, &quad)?;
            let g_fine = gauss_volume_with(params, &k, &fine)?;
            rep.grid = json!({ "facets": k.facets().len() });
            json!({ "G": g, "error_estimate": (g - g_fine).abs(), "refinement": "quadrature" })
        }
        BodyInput::Shape(shape) => {
            let m = grid.unwrap_or_else(|| default_grid(n));
            let k = input.build(n, m)?;
            let k2 = input.build(n, 2 * m)?;
            let g = gauss_volume_with(params, &k, &quad)?;
            let g2 = gauss_volume_with(params, &k2, &quad)?;
            rep.grid = json!({ "m": m, "facets": k.facets().len(), "refined_facets": k2.facets().len() });
            let mut r = json!({
                "G": g,
                "G_refined": g2,
                "error_estimate": (g - g2).abs(),
                "refinement": "grid",
            });
            if let crate::input::ShapeInput::Ball { radius } = shape {
                r["smooth_limit"] = json!(ball_mass(params, *radius)?);
            }
            r
        }
    };
    rep.tolerances = json!({ "quadrature_rel": opts.rel_tol, "quadrature_abs": opts.abs_tol });
    rep.result = result;
    Ok(rep)
}

pub enum AtomFormat {
    Csv,
    Json,
}

/// Atoms of the weighted surface measure, as CSV or JSON text.
pub fn surface_measure(params: &Params, body: &Path, grid: Option<usize>, format: AtomFormat) -> CliResult<String> {
    let input: BodyInput = read_json(body)?;
    let n = params.n();
    let k = input.build(n, grid.unwrap_or_else(|| default_grid(n)))?;
    let atoms = weighted_surface_measure(params, &k, params.p())?;
    Ok(match format {
        AtomFormat::Csv => atoms.to_csv(),
        AtomFormat::Json => {
            let mut rep = Report::new("surface-measure", json!(params));
            rep.grid = json!({ "facets": k.facets().len() });
            rep.result = atoms.to_json();
            to_json_text(&rep)
        }
    })
}

/// Dispatches on the sign of p: p > 0 to the general solver, p < 0 to the even one.
pub fn solve_normalized_cmd(
    params: &Params,
    problem: &Path,
    c_override: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
) -> CliResult<Report> {
    let prob: NormalizedProblem = read_json(problem)?;
    let c = c_override.unwrap_or(prob.c);
    let mu = DiscreteMeasure::from_json(params.n(), &prob.measure)?;
    let mut opts = SolverOptions::default();
    if let Some(t) = tol {
        opts.tol_measure = t;
    }
    if let Some(k) = max_iter {
        opts.max_iter = k;
    }
    let (solver, sol) = if params.p() > 0.0 {
        ("solve_normalized", solve_normalized(params, &mu, c, &opts)?)
    } else if params.p() < 0.0 {
        ("solve_normalized_even", solve_normalized_even(params, &mu, c, &opts)?)
    } else {
        return Err(Error::Domain("p = 0 is not supported".into()).into());
    };
    let mut rep = Report::new("solve-normalized", json!(params));
    rep.grid = json!({ "atoms": mu.len(), "even": mu.is_even() });
    rep.tolerances = json!(opts);
    rep.result = json!({
        "solver": solver,
        "target_volume": sol.target_volume,
        "volume": sol.volume,
        "support": sol.support,
        "multiplier": sol.multiplier,
        "first_order_residual": sol.first_order_residual,
        "projected_gradient_ratio": sol.projected_gradient_ratio,
        "objective": sol.objective,
        "iterations": sol.iterations,
        "inactive_atoms": sol.inactive_atoms,
        "even": sol.even,
        "body": PolytopeJson::from(sol.body),
    });
    Ok(rep)
}

fn ma_summary(s: &MASolution) -> Value {
    json!({
        "branch": s.branch,
        "residual_sup": s.residual_sup,
        "iterations": s.iterations,
        "volume": s.volume,
        "h_min": s.h.min(),
        "h_max": s.h.max(),
        "bounds_ok": s.bounds_ok,
        "warnings": s.warnings,
    })
}

/// Solution rows tagged by branch.
fn ma_csv(params: &Params, f: &PeriodicField, sols: &[&MASolution]) -> CliResult<String> {
    let mut out = String::from("branch,theta,h,dh,residual\n");
    for s in sols {
        let tag = match s.branch {
            gengauss::ma2d::Branch::Low => "low",
            gengauss::ma2d::Branch::High => "high",
            gengauss::ma2d::Branch::Unique => "unique",
        };
        for line in s.to_csv(params, f)?.lines().skip(1) {
            out.push_str(tag);
            out.push(',');
            out.push_str(line);
            out.push('\n');
        }
    }
    Ok(out)
}

pub struct MaArgs<'a> {
    pub rhs: &'a Path,
    pub grid: Option<usize>,
    pub steps: usize,
    pub probe: usize,
    pub threshold: Option<f64>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub csv: Option<&'a Path>,
}

/// Continuity method for p ≥ 2, both branches for 1 ≤ p < 2.
pub fn solve_ma2d(params: &Params, a: &MaArgs) -> CliResult<Report> {
    if params.n() != 2 {
        return Err(Error::Domain(format!("solve-ma2d needs n = 2, got n = {}", params.n())).into());
    }
    let f = read_rhs(a.rhs, a.grid.unwrap_or(DEFAULT_MA_GRID))?;
    let mut opts = NewtonOptions::default();
    if let Some(t) = a.tol {
        opts.tol = t;
    }
    let p = params.p();
    let mut rep = Report::new("solve-ma2d", json!(params));
    rep.grid = json!({ "m": f.m(), "steps": a.steps });
    rep.tolerances = json!(opts);
    let (result, csv) = if p >= 2.0 {
        let sol = continuity_solve(params, &f, a.steps, &opts)?;
        let mut r = json!({ "method": "continuity", "solution": ma_summary(&sol) });
        if a.probe > 0 {
            rep.seed = Some(a.seed);
            r["uniqueness_probe"] = json!(uniqueness_probe(params, &f, a.probe, a.seed, &opts)?);
        }
        (r, ma_csv(params, &f, &[&sol])?)
    } else if p >= 1.0 {
        let tb = two_branch_solve(params, &f, a.steps, a.threshold, &opts)?;
        let r = json!({
            "method": "two_branch",
            "low": ma_summary(&tb.low),
            "high": ma_summary(&tb.high),
            "seeds": tb.seeds,
            "mass": tb.mass,
            "threshold": tb.threshold,
            "below_threshold": tb.below_threshold,
            "branch_distance": tb.branch_distance,
            "seeds_invertible": tb.seeds_invertible,
        });
        (r, ma_csv(params, &f, &[&tb.low, &tb.high])?)
    } else {
        return Err(Error::Domain(format!("solve-ma2d needs p ≥ 1, got p = {p}")).into());
    };
    if let Some(path) = a.csv {
        write_text(path, &csv)?;
    }
    rep.result = result;
    Ok(rep)
}

/// Trichotomy for each c, and Φ/Z on a radial grid as CSV.
pub fn isotropic(params: &Params, cs: &[f64], points: usize, csv: Option<&Path>) -> CliResult<Report> {
    if cs.is_empty() {
        return Err(CliError::Usage("isotropic needs at least one --c".into()));
    }
    let z = normalizer(params);
    let crit = match critical_constant(params) {
        Ok(c) => Some(c),
        Err(Error::Precondition(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut cases = Vec::with_capacity(cs.len());
    let mut r_far = crit.as_ref().map_or(1.0, |c| c.r_star);
    for &c in cs {
        let tri = constant_roots(params, c)?;
        let roots: Vec<f64> = match tri.kind {
            RootKind::TwoRoots(a, b) => vec![a, b],
            RootKind::OneRoot(a) => vec![a],
            RootKind::NoRoot => vec![],
        };
        let mut per_root = Vec::with_capacity(roots.len());
        for &r in &roots {
            r_far = r_far.max(r);
            let rel = (ln_phi(params, r).exp() - c * z).abs() / (c * z);
            let lin = linearized_coefficient(params, r)?;
            per_root.push(json!({ "r": r, "relative_residual": rel, "linearized": lin }));
        }
        cases.push(json!({
            "c": c,
            "count": roots.len(),
            "kind": tri.kind,
            "roots": per_root,
        }));
    }
    let mut r_max = 2.0 * r_far;
    if let Some(cut) = support_cutoff(params) {
        r_max = r_max.min(cut * (1.0 - 1e-9));
    }
    if let Some(path) = csv {
        let mut s = String::from("r,phi,phi_over_z\n");
        for i in 1..=points {
            let r = r_max * i as f64 / points as f64;
            let ph = ln_phi(params, r).exp();
            s.push_str(&format!("{r},{ph},{}\n", ph / z));
        }
        write_text(path, &s)?;
    }
    let mut rep = Report::new("isotropic", json!(params));
    rep.grid = json!({ "curve_points": points, "curve_r_max": r_max });
    rep.tolerances = json!({ "critical_match_rel": 1e-10 });
    rep.result = json!({
        "normalizer": z,
        "critical": crit,
        "cases": cases,
    });
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    BrunnMinkowski,
    LpIsoperimetric,
    Gtilde,
    Divergence,
    Threshold,
}

pub struct CheckArgs<'a> {
    pub suite: Suite,
    pub params: &'a [Params],
    pub trials: usize,
    pub seed: u64,
    pub grid: Option<usize>,
    pub lambdas: &'a [f64],
    pub ps: &'a [f64],
    pub i_half: Option<f64>,
}

/// Runs one randomized suite; a violation is reported and then raised as a failed check.
pub fn check(a: &CheckArgs) -> CliResult<(Report, Option<String>)> {
    let first = a.params[0];
    if a.params.iter().any(|p| p.n() != first.n()) {
        return Err(CliError::Usage("all --params must share n".into()));
    }
    let n = first.n();
    let grid = a.grid.unwrap_or(if n == 2 { 64 } else { 60 });
    let cfg = SuiteConfig::new(a.trials, a.seed, grid);
    let params = a.params;
    let params_for = |i: usize| params[i % params.len()];
    let mut rep = Report::new("check", json!(params));
    rep.seed = Some(a.seed);
    rep.grid = json!({ "directions": grid, "trials": a.trials, "scale": cfg.scale });
    rep.tolerances = json!({ "eps_quad": EPS_QUAD });
    let mut failure = None;
    let (name, result) = match a.suite {
        Suite::BrunnMinkowski => {
            let d = brunn_minkowski_suite(&cfg, params_for, a.lambdas)?;
            if !d.passed() {
                failure = Some(format!("{} Brunn-Minkowski violations", d.violations.len()));
            }
            ("brunn-minkowski", json!({ "lambdas": a.lambdas, "report": d }))
        }
        Suite::LpIsoperimetric => {
            let d = lp_isoperimetric_suite(&cfg, params_for, a.ps)?;
            if !d.passed() {
                failure = Some(format!("{} L_p isoperimetric violations", d.violations.len()));
            }
            ("lp-isoperimetric", json!({ "ps": a.ps, "report": d }))
        }
        Suite::Gtilde => {
            let d = gtilde_suite(&cfg, params_for)?;
            if !d.passed() {
                failure = Some(format!("{} G ≥ G̃ violations", d.violations.len()));
            }
            ("gtilde", json!({ "report": d }))
        }
        Suite::Divergence => {
            let worst = divergence_suite(&cfg, params_for)?;
            let tol = 1e-5;
            if !(worst <= tol) {
                failure = Some(format!("divergence identity residual {worst:e} > {tol:e}"));
            }
            ("divergence", json!({ "max_residual": worst, "tolerance": tol }))
        }
        Suite::Threshold => {
            let mut rows = Vec::with_capacity(params.len());
            for p in params {
                let (i_half, estimate) = match a.i_half {
                    Some(v) => (v, Value::Null),
                    None => {
                        let e = estimate_isoperimetric_half(p, &cfg)?;
                        (e.estimate, json!(e))
                    }
                };
                rows.push(json!({
                    "params": p,
                    "i_half": i_half,
                    "i_half_estimate": estimate,
                    "threshold": threshold_report(p, i_half)?,
                }));
            }
            ("threshold", json!({ "rows": rows }))
        }
    };
    rep.result = json!({ "suite": name, "passed": failure.is_none(), "data": result });
    Ok((rep, failure))
}

pub fn to_json_text<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}
