//! Randomized checks of the Brunn-Minkowski inequality, the L_p isoperimetric
//! inequality, G ≥ G̃ and the divergence identity, plus the small-mass threshold.

use crate::density::Params;
use crate::error::{domain, Error, Result};
use crate::geometry::{canonicalize, Point, Polytope, SphereGrid, SupportVector};
use crate::measures::{divergence_body_integral, gauss_volume, gtilde, volume_and_densities};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::sync::Arc;

/// Allowance for quadrature error in every suite.
pub const EPS_QUAD: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub seed: u64,
    pub inputs: serde_json::Value,
    pub defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectReport {
    pub trials: usize,
    pub min_defect: f64,
    pub max_defect: f64,
    pub violations: Vec<Violation>,
    pub tolerance: f64,
}

impl DefectReport {
    fn empty(tolerance: f64) -> Self {
        Self {
            trials: 0,
            min_defect: f64::INFINITY,
            max_defect: f64::NEG_INFINITY,
            violations: Vec::new(),
            tolerance,
        }
    }

    fn record(&mut self, seed: u64, inputs: serde_json::Value, defect: f64) {
        self.min_defect = self.min_defect.min(defect);
        self.max_defect = self.max_defect.max(defect);
        if !(defect >= -self.tolerance) {
            self.violations.push(Violation { seed, inputs, defect });
        }
    }

    /// Merges per-trial reports in the given order.
    fn merge(reports: Vec<DefectReport>, tolerance: f64) -> Self {
        let mut out = Self::empty(tolerance);
        for r in reports {
            out.trials += r.trials;
            out.min_defect = out.min_defect.min(r.min_defect);
            out.max_defect = out.max_defect.max(r.max_defect);
            out.violations.extend(r.violations);
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn require_subcritical(params: &Params) -> Result<()> {
    if !params.q_subcritical() {
        return domain(format!(
            "needs q < α/(n+α) = {}, got q = {}",
            params.alpha() / (params.dim() + params.alpha()),
            params.q()
        ));
    }
    Ok(())
}

/// G((1−λ)K+λL)^{1/n} − (1−λ)G(K)^{1/n} − λG(L)^{1/n} for each λ, with the
/// combination formed exactly.
pub fn brunn_minkowski_defects(params: &Params, k: &Polytope, l: &Polytope, lambdas: &[f64]) -> Result<Vec<f64>> {
    let inv_n = 1.0 / params.dim();
    let gk = gauss_volume(params, k)?.powf(inv_n);
    let gl = gauss_volume(params, l)?.powf(inv_n);
    let normals = k.minkowski_normals(l)?;
    lambdas
        .iter()
        .map(|&lam| {
            let m = if lam == 0.0 {
                k.clone()
            } else if lam == 1.0 {
                l.clone()
            } else {
                k.minkowski_combination_on(l, lam, &normals)?
            };
            Ok(gauss_volume(params, &m)?.powf(inv_n) - (1.0 - lam) * gk - lam * gl)
        })
        .collect()
}

/// Brunn-Minkowski check for origin-symmetric bodies.
pub fn check_brunn_minkowski(
    params: &Params,
    k: &SupportVector,
    l: &SupportVector,
    lambdas: &[f64],
) -> Result<DefectReport> {
    require_subcritical(params)?;
    if !(k.is_even(1e-12) && l.is_even(1e-12)) {
        return Err(Error::Precondition("bodies must be origin-symmetric".into()));
    }
    let (kb, lb) = (k.to_polytope()?, l.to_polytope()?);
    let defects = brunn_minkowski_defects(params, &kb, &lb, lambdas)?;
    let mut rep = DefectReport::empty(EPS_QUAD);
    rep.trials = 1;
    for (lam, d) in lambdas.iter().zip(defects) {
        rep.record(0, json!({ "lambda": lam }), d);
    }
    Ok(rep)
}

/// |S_p(K)| − (nG(K))^{1−p}|S_1(K)|^p, both masses weighted by the density.
pub fn lp_isoperimetric_defect(params: &Params, k: &Polytope, p: f64) -> Result<f64> {
    let (g, dens) = volume_and_densities(params, k)?;
    let s1: f64 = dens.iter().sum();
    let sp: f64 = k
        .facets()
        .iter()
        .zip(&dens)
        .map(|(f, d)| f.support.powf(1.0 - p) * d)
        .sum();
    Ok(sp - (params.dim() * g).powf(1.0 - p) * s1.powf(p))
}

pub fn check_lp_isoperimetric(params: &Params, k: &Polytope) -> Result<DefectReport> {
    let p = params.p();
    if !(p >= 1.0) {
        return domain(format!("needs p ≥ 1, got {p}"));
    }
    require_subcritical(params)?;
    let d = lp_isoperimetric_defect(params, k, p)?;
    let mut rep = DefectReport::empty(EPS_QUAD);
    rep.trials = 1;
    rep.record(0, json!({ "p": p }), d);
    Ok(rep)
}

pub fn check_gtilde(params: &Params, k: &Polytope) -> Result<DefectReport> {
    require_subcritical(params)?;
    let d = gauss_volume(params, k)? - gtilde(params, k)?;
    let mut rep = DefectReport::empty(EPS_QUAD);
    rep.trials = 1;
    rep.record(0, json!({}), d);
    Ok(rep)
}

/// (n/2)^{1−p} I^p.
pub fn threshold_report(params: &Params, i_half: f64) -> Result<f64> {
    if !(i_half > 0.0 && i_half.is_finite()) {
        return domain(format!("isoperimetric value must be positive, got {i_half}"));
    }
    let p = params.p();
    if !(p >= 1.0) {
        return domain(format!("needs p ≥ 1, got {p}"));
    }
    Ok((0.5 * params.dim()).powf(1.0 - p) * i_half.powf(p))
}

/// Random positive-definite quadratic form, Gaussian matrix entries.
fn random_ellipsoid(rng: &mut ChaCha8Rng, dim: usize, aniso: f64) -> [[f64; 3]; 3] {
    let mut a = [[0.0; 3]; 3];
    for row in a.iter_mut().take(dim) {
        for v in row.iter_mut().take(dim) {
            let x: f64 = StandardNormal.sample(rng);
            *v = aniso * x;
        }
    }
    // M = I + AᵀA
    let mut m = [[0.0; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            m[i][j] = if i == j { 1.0 } else { 0.0 };
            for r in a.iter().take(dim) {
                m[i][j] += r[i] * r[j];
            }
        }
    }
    m
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Point {
    loop {
        let mut v = Point::zeros();
        for i in 0..dim {
            v[i] = StandardNormal.sample(rng);
        }
        let r = v.norm();
        if r > 1e-3 {
            return v / r;
        }
    }
}

/// h(u) = s·(√(uᵀMu) + Σ b_j|u·w_j|)/norm, a sum of an ellipsoid and segments.
fn random_support(rng: &mut ChaCha8Rng, grid: &SphereGrid, scale: (f64, f64)) -> Vec<f64> {
    let dim = grid.dim();
    let aniso = rng.random_range(0.0..0.6);
    let m = random_ellipsoid(rng, dim, aniso);
    let segs: Vec<(Point, f64)> = (0..rng.random_range(0..4))
        .map(|_| (random_unit(rng, dim), rng.random_range(0.0..0.8)))
        .collect();
    let raw: Vec<f64> = grid
        .dirs()
        .iter()
        .map(|u| {
            let mut quad = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    quad += u[i] * m[i][j] * u[j];
                }
            }
            quad.sqrt() + segs.iter().map(|(w, b)| b * u.dot(w).abs()).sum::<f64>()
        })
        .collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    let s = rng.random_range(scale.0..scale.1);
    raw.iter().map(|v| s * v / mean).collect()
}

/// Even body from a seeded generator on an antipodally closed grid, canonicalized.
pub fn random_symmetric_body(seed: u64, grid: Arc<SphereGrid>, scale: (f64, f64)) -> Result<SupportVector> {
    if grid.antipodes().is_none() {
        return Err(Error::Precondition("grid must be closed under v -> -v".into()));
    }
    check_scale(scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = random_support(&mut rng, &grid, scale);
    canonicalize(&SupportVector::new(grid, values)?)
}

/// Body with the origin interior but no symmetry: a symmetric body shifted by
/// less than half its inradius.
pub fn random_body(seed: u64, grid: Arc<SphereGrid>, scale: (f64, f64)) -> Result<SupportVector> {
    check_scale(scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = random_support(&mut rng, &grid, scale);
    let inr = values.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = random_unit(&mut rng, grid.dim()) * (0.5 * inr * rng.random_range(0.0..1.0));
    for (v, u) in values.iter_mut().zip(grid.dirs()) {
        *v += u.dot(&shift);
    }
    canonicalize(&SupportVector::new(grid, values)?)
}

fn check_scale(scale: (f64, f64)) -> Result<()> {
    if !(scale.0 > 0.0 && scale.1 > scale.0 && scale.1.is_finite()) {
        return domain(format!("invalid scale range {scale:?}"));
    }
    Ok(())
}

/// Settings shared by the randomized suites.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    /// Directions per random body.
    pub grid_size: usize,
    pub scale: (f64, f64),
}

impl SuiteConfig {
    pub fn new(trials: usize, seed: u64, grid_size: usize) -> Self {
        Self {
            trials,
            seed,
            grid_size,
            scale: (0.3, 2.5),
        }
    }
}

fn trial_seed(cfg: &SuiteConfig, i: usize) -> u64 {
    cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)
}

/// Runs `f` on every trial in parallel and merges in trial order.
fn run_trials<F>(cfg: &SuiteConfig, f: F) -> Result<DefectReport>
where
    F: Fn(usize, u64, &mut DefectReport) -> Result<()> + Sync,
{
    let reports = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut r = DefectReport::empty(EPS_QUAD);
            r.trials = 1;
            f(i, trial_seed(cfg, i), &mut r)?;
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DefectReport::merge(reports, EPS_QUAD))
}

/// Brunn-Minkowski over random symmetric pairs; `params_for` picks the density per trial.
pub fn brunn_minkowski_suite<P>(cfg: &SuiteConfig, params_for: P, lambdas: &[f64]) -> Result<DefectReport>
where
    P: Fn(usize) -> Params + Sync,
{
    run_trials(cfg, |i, seed, rep| {
        let params = params_for(i);
        require_subcritical(&params)?;
        let grid = Arc::new(SphereGrid::uniform_even(params.n(), cfg.grid_size)?);
        let k = random_symmetric_body(seed, grid.clone(), cfg.scale)?.to_polytope()?;
        let l = random_symmetric_body(seed ^ 0xABCD_EF01, grid, cfg.scale)?.to_polytope()?;
        for (lam, d) in lambdas
            .iter()
            .zip(brunn_minkowski_defects(&params, &k, &l, lambdas)?)
        {
            rep.record(seed, json!({ "params": params, "lambda": lam }), d);
        }
        Ok(())
    })
}

/// L_p isoperimetric defects over random bodies for each p.
pub fn lp_isoperimetric_suite<P>(cfg: &SuiteConfig, params_for: P, ps: &[f64]) -> Result<DefectReport>
where
    P: Fn(usize) -> Params + Sync,
{
    run_trials(cfg, |i, seed, rep| {
        let params = params_for(i);
        require_subcritical(&params)?;
        let grid = Arc::new(SphereGrid::uniform(params.n(), cfg.grid_size)?);
        let k = random_body(seed, grid, cfg.scale)?.to_polytope()?;
        for &p in ps {
            let d = lp_isoperimetric_defect(&params, &k, p)?;
            rep.record(seed, json!({ "params": params, "p": p }), d);
        }
        Ok(())
    })
}

/// G − G̃ over random bodies.
pub fn gtilde_suite<P>(cfg: &SuiteConfig, params_for: P) -> Result<DefectReport>
where
    P: Fn(usize) -> Params + Sync,
{
    run_trials(cfg, |i, seed, rep| {
        let params = params_for(i);
        require_subcritical(&params)?;
        let grid = Arc::new(SphereGrid::uniform(params.n(), cfg.grid_size)?);
        let k = random_body(seed, grid, cfg.scale)?.to_polytope()?;
        let d = gauss_volume(&params, &k)? - gtilde(&params, &k)?;
        rep.record(seed, json!({ "params": params }), d);
        Ok(())
    })
}

/// Largest |n(G − G̃) − body integral| over random bodies.
pub fn divergence_suite<P>(cfg: &SuiteConfig, params_for: P) -> Result<f64>
where
    P: Fn(usize) -> Params + Sync,
{
    let worst = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let params = params_for(i);
            let grid = Arc::new(SphereGrid::uniform(params.n(), cfg.grid_size)?);
            let k = random_body(trial_seed(cfg, i), grid, cfg.scale)?.to_polytope()?;
            let n = params.dim();
            let gap = n * (gauss_volume(&params, &k)? - gtilde(&params, &k)?);
            Ok((gap - divergence_body_integral(&params, &k)?).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoperimetricEstimate {
    /// Smallest weighted perimeter among sampled bodies scaled to G = 1/2.
    pub estimate: f64,
    pub samples: usize,
    pub best_seed: u64,
}

/// Scale s with G(sK) = target by bisection on ln s.
fn scale_to_volume(params: &Params, k: &Polytope, target: f64) -> Result<Polytope> {
    let (mut lo, mut hi) = (-30.0f64, 30.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gauss_volume(params, &k.scaled(mid.exp()))? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(k.scaled((0.5 * (lo + hi)).exp()))
}

/// Sampled estimate of I[G](1/2): the least weighted perimeter |S_1(K)| among
/// random origin-symmetric bodies rescaled to G = 1/2. The family includes
/// perturbation amplitudes down to zero, so near-round bodies are sampled.
pub fn estimate_isoperimetric_half(params: &Params, cfg: &SuiteConfig) -> Result<IsoperimetricEstimate> {
    let grid = Arc::new(SphereGrid::uniform_even(params.n(), cfg.grid_size)?);
    let vals = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(cfg, i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let amp = (i as f64 / cfg.trials.max(1) as f64) * rng.random_range(0.0..1.0);
            let base = random_symmetric_body(seed, grid.clone(), (1.0, 1.0 + 1e-9))?;
            let values: Vec<f64> = base.values().iter().map(|v| 1.0 + amp * (v - 1.0)).collect();
            let k = canonicalize(&SupportVector::new(grid.clone(), values)?)?.to_polytope()?;
            let k = scale_to_volume(params, &k, 0.5)?;
            let (_, dens) = volume_and_densities(params, &k)?;
            Ok((dens.iter().sum::<f64>(), seed))
        })
        .collect::<Result<Vec<(f64, u64)>>>()?;
    let (estimate, best_seed) = vals
        .into_iter()
        .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
    Ok(IsoperimetricEstimate {
        estimate,
        samples: cfg.trials,
        best_seed,
    })
}
