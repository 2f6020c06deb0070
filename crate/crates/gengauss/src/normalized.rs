//! The normalized L_p Minkowski problem for discrete measures: find K with
//! G(K) = c whose L_p surface measure is proportional to μ.
//!
//! Solved as min (1/p)Σ μ_i z_i^p subject to G([z]) = c in log coordinates
//! x = ln z. Every iterate is retracted onto the constraint by homothety
//! (G(e^s K) is monotone in s) and then canonicalized, so all iterates are
//! feasible and the objective decreases monotonically. Search directions come
//! from L-BFGS on the reduced gradient
//!   r_i = μ_i z_i^p − β z_i S_i,   β = Σ μ z^p / Σ z S,
//! with S_i the unweighted facet atom of direction i; r = 0 is exactly the
//! condition that the L_p atoms are proportional to μ.

use crate::density::{ball_radius_for_mass, support_cutoff, Params};
use crate::error::{domain, Error, Result};
use crate::geometry::{from_point, support_function, to_point, wulff_shape_raw, Point, Polytope};
use crate::measures::volume_and_densities;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Atoms (direction, weight) on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    dirs: Vec<Point>,
    weights: Vec<f64>,
    even: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomJson {
    pub dir: Vec<f64>,
    pub w: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureJson {
    pub atoms: Vec<AtomJson>,
    #[serde(default)]
    pub even: bool,
}

impl DiscreteMeasure {
    /// Directions are normalized; `even` requires antipodal closure with equal weights.
    pub fn new(dim: usize, dirs: Vec<Point>, weights: Vec<f64>, even: bool) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return domain(format!("only dimensions 2 and 3 are supported, got {dim}"));
        }
        if dirs.len() != weights.len() {
            return Err(Error::Shape("directions and weights differ in length".into()));
        }
        if dirs.is_empty() {
            return domain("measure has no atoms");
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return domain(format!("atom weights must be positive, got {w}"));
        }
        let mut unit = Vec::with_capacity(dirs.len());
        for v in dirs {
            let r = v.norm();
            if !(r.is_finite() && r > 0.0) || (dim == 2 && v.z != 0.0) {
                return domain(format!("invalid atom direction {v:?}"));
            }
            unit.push(v / r);
        }
        for i in 0..unit.len() {
            for j in 0..i {
                if (unit[i] - unit[j]).norm() <= 1e-12 {
                    return domain("repeated atom direction; merge the weights");
                }
            }
        }
        let mu = Self {
            dim,
            dirs: unit,
            weights,
            even,
        };
        if even && mu.antipodes().is_none() {
            return domain("even measure must be closed under v -> -v with equal weights");
        }
        Ok(mu)
    }

    pub fn from_json(dim: usize, j: &MeasureJson) -> Result<Self> {
        let dirs = j
            .atoms
            .iter()
            .map(|a| to_point(dim, &a.dir))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, dirs, j.atoms.iter().map(|a| a.w).collect(), j.even)
    }

    pub fn to_json(&self) -> MeasureJson {
        MeasureJson {
            atoms: self
                .dirs
                .iter()
                .zip(&self.weights)
                .map(|(d, w)| AtomJson {
                    dir: from_point(self.dim, d),
                    w: *w,
                })
                .collect(),
            even: self.even,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn dirs(&self) -> &[Point] {
        &self.dirs
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn is_even(&self) -> bool {
        self.even
    }
    pub fn len(&self) -> usize {
        self.dirs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(
            self.dim,
            self.dirs.clone(),
            self.weights.iter().map(|w| w * s).collect(),
            self.even,
        )
    }

    /// Antipodal partner of each atom when weights match.
    fn antipodes(&self) -> Option<Vec<usize>> {
        let mut out = Vec::with_capacity(self.dirs.len());
        for (i, v) in self.dirs.iter().enumerate() {
            let j = self.dirs.iter().position(|w| (w + v).norm() <= 1e-12)?;
            if (self.weights[i] - self.weights[j]).abs() > 1e-12 * self.weights[i] {
                return None;
            }
            out.push(j);
        }
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConcentrationMode {
    Hemisphere,
    GreatSubsphere,
}

/// Whether μ avoids concentration; when concentrated, a witness u with
/// u·v_i ≤ 0 for every atom (Hemisphere) or u·v_i = 0 (GreatSubsphere).
pub fn check_not_concentrated(mu: &DiscreteMeasure, mode: ConcentrationMode) -> (bool, Option<Point>) {
    match mode {
        ConcentrationMode::GreatSubsphere => {
            let u = smallest_direction(&mu.dirs, mu.dim, false);
            let worst = mu.dirs.iter().map(|v| u.dot(v).abs()).fold(0.0, f64::max);
            if worst <= 1e-10 {
                (false, Some(u))
            } else {
                (true, None)
            }
        }
        ConcentrationMode::Hemisphere => match hemisphere_witness(mu) {
            Some(u) => (false, Some(u)),
            None => (true, None),
        },
    }
}

/// Eigenvector of the smallest eigenvalue of Σ v vᵀ (or of the centered covariance).
fn smallest_direction(dirs: &[Point], dim: usize, centered: bool) -> Point {
    let mean = if centered {
        dirs.iter().fold(Point::zeros(), |a, v| a + v) / dirs.len() as f64
    } else {
        Point::zeros()
    };
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for v in dirs {
        let w = v - mean;
        for a in 0..dim {
            for b in 0..dim {
                m[(a, b)] += w[a] * w[b];
            }
        }
    }
    let eig = SymmetricEigen::new(m);
    let k = eig.eigenvalues.imin();
    let mut u = Point::zeros();
    for a in 0..dim {
        u[a] = eig.eigenvectors[(a, k)];
    }
    u / u.norm()
}

fn hemisphere_witness(mu: &DiscreteMeasure) -> Option<Point> {
    let tol = 1e-12;
    let oriented = |u: Point| -> Option<Point> {
        if mu.dirs.iter().all(|v| u.dot(v) <= tol) {
            Some(u)
        } else if mu.dirs.iter().all(|v| -u.dot(v) <= tol) {
            Some(-u)
        } else {
            None
        }
    };
    if mu.dim == 2 {
        let hull = crate::geometry::planar_hull(&mu.dirs, 1e-14);
        if hull.len() < 3 {
            return oriented(smallest_direction(&mu.dirs, 2, true))
                .or_else(|| oriented(smallest_direction(&mu.dirs, 2, false)));
        }
        let m = hull.len();
        for k in 0..m {
            let a = mu.dirs[hull[k]];
            let b = mu.dirs[hull[(k + 1) % m]];
            let d = b - a;
            let nu = Point::new(d.y, -d.x, 0.0) / d.norm();
            if nu.dot(&a) <= tol {
                return Some(nu);
            }
        }
        None
    } else {
        match crate::geometry::hull_face_planes(&mu.dirs, 1e-11) {
            None => oriented(smallest_direction(&mu.dirs, 3, true))
                .or_else(|| oriented(smallest_direction(&mu.dirs, 3, false))),
            Some(planes) => planes
                .into_iter()
                .find(|(_, off)| *off <= tol)
                .map(|(n, _)| n),
        }
    }
}

/// Solver settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Bound on max_i |S_i/|S| − μ_i/|μ|| for the L_p atoms.
    pub tol_measure: f64,
    pub tol_volume: f64,
    /// Bound on the projected gradient relative to the objective gradient.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Lower bound on support numbers.
    pub floor: f64,
    pub memory: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_measure: 1e-5,
            tol_volume: 1e-7,
            grad_tol: 1e-6,
            max_iter: 5000,
            floor: 1e-8,
            memory: 12,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterLog {
    pub iter: usize,
    pub phi: f64,
    pub residual: f64,
    pub projected_gradient: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalizedSolution {
    pub body: Polytope,
    /// Support numbers on the atom directions.
    pub support: Vec<f64>,
    /// λ with S_p(K) = λμ.
    pub multiplier: f64,
    pub target_volume: f64,
    pub volume: f64,
    /// max_i |S_i/|S| − μ_i/|μ||.
    pub first_order_residual: f64,
    /// |Euclidean projection of ∇φ on the constraint tangent| / |∇φ|.
    pub projected_gradient_ratio: f64,
    pub objective: f64,
    pub iterations: usize,
    /// Atoms without a facet of positive area.
    pub inactive_atoms: Vec<usize>,
    pub even: bool,
    pub log: Vec<IterLog>,
}

struct Problem<'a> {
    params: &'a Params,
    dirs: &'a [Point],
    mu: Vec<f64>,
    p: f64,
    c: f64,
    /// Free variable of each atom.
    var: Vec<usize>,
    nvar: usize,
    floor: f64,
}

#[derive(Clone)]
struct State {
    /// Canonical, retracted log support numbers per variable.
    x: Vec<f64>,
    z: Vec<f64>,
    body: Polytope,
    volume: f64,
    s1: Vec<f64>,
    f: f64,
    grad: Vec<f64>,
    residual: f64,
    proj_ratio: f64,
}

impl Problem<'_> {
    fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.var.iter().map(|&k| x[k].exp().max(self.floor)).collect()
    }

    /// Homothety factor e^s with G(e^s K) = c.
    fn retract(&self, k: &Polytope) -> Result<(f64, Polytope, f64, Vec<f64>)> {
        let vol = |s: f64| -> Result<(Polytope, f64, Vec<f64>)> {
            let ks = k.scaled(s.exp());
            let (g, d) = volume_and_densities(self.params, &ks)?;
            Ok((ks, g, d))
        };
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut s = 0.0;
        for _ in 0..200 {
            let (ks, g, d) = vol(s)?;
            let psi = g - self.c;
            if psi.abs() <= 1e-14 {
                return Ok((s, ks, g, d));
            }
            if psi < 0.0 {
                lo = lo.max(s);
            } else {
                hi = hi.min(s);
            }
            let slope: f64 = ks.facets().iter().zip(&d).map(|(f, di)| f.support * di).sum();
            let mut next = if slope > 0.0 { s - psi / slope } else { f64::NAN };
            let inside = next.is_finite() && next > lo && next < hi;
            if !inside {
                next = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (true, false) => lo + 1.0,
                    (false, true) => hi - 1.0,
                    _ => s,
                };
            }
            if (next - s).abs() <= 1e-15 * (1.0 + s.abs()) {
                return Ok((next, k.scaled(next.exp()), g, d));
            }
            s = next;
        }
        Err(Error::NonConvergence("volume retraction did not converge".into()))
    }

    fn evaluate(&self, x: &[f64]) -> Result<State> {
        let z0 = self.expand(x);
        let k0 = wulff_shape_raw(self.params.n(), self.dirs, &z0)?;
        let (s, body, volume, dens) = self.retract(&k0)?;
        let scale = s.exp();
        let mut s1 = vec![0.0; self.dirs.len()];
        for (f, d) in body.facets().iter().zip(&dens) {
            s1[f.source] = *d;
        }
        let z: Vec<f64> = self
            .dirs
            .iter()
            .zip(&z0)
            .map(|(u, zi)| (zi * scale).min(support_function(&body, u)))
            .collect();
        let mut xv = vec![0.0; self.nvar];
        let mut cnt = vec![0usize; self.nvar];
        for (i, &k) in self.var.iter().enumerate() {
            xv[k] += z[i].ln();
            cnt[k] += 1;
        }
        for k in 0..self.nvar {
            xv[k] /= cnt[k] as f64;
        }
        let p = self.p;
        let gf: Vec<f64> = self.mu.iter().zip(&z).map(|(m, zi)| m * zi.powf(p)).collect();
        let gg: Vec<f64> = z.iter().zip(&s1).map(|(zi, si)| zi * si).collect();
        let f = gf.iter().sum::<f64>() / p;
        let beta = gf.iter().sum::<f64>() / gg.iter().sum::<f64>();
        let mut grad = vec![0.0; self.nvar];
        for (i, &k) in self.var.iter().enumerate() {
            grad[k] += gf[i] - beta * gg[i];
        }
        let sp: Vec<f64> = z.iter().zip(&s1).map(|(zi, si)| zi.powf(1.0 - p) * si).collect();
        let sp_tot: f64 = sp.iter().sum();
        let mu_tot: f64 = self.mu.iter().sum();
        let residual = sp
            .iter()
            .zip(&self.mu)
            .map(|(s, m)| (s / sp_tot - m / mu_tot).abs())
            .fold(0.0, f64::max);
        // Euclidean projection in z-coordinates: ∇φ = −μ z^{p−1}, ∇G = S.
        let a: Vec<f64> = self.mu.iter().zip(&z).map(|(m, zi)| m * zi.powf(p - 1.0)).collect();
        let ab: f64 = a.iter().zip(&s1).map(|(x, y)| x * y).sum();
        let bb: f64 = s1.iter().map(|y| y * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let proj: f64 = a
            .iter()
            .zip(&s1)
            .map(|(x, y)| (x - ab / bb * y).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok(State {
            x: xv,
            z,
            body,
            volume,
            s1,
            f,
            grad,
            residual,
            proj_ratio: proj / na,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// L-BFGS two-loop recursion: approximate inverse Hessian times `g`.
fn lbfgs_direction(g: &[f64], hist: &VecDeque<(Vec<f64>, Vec<f64>)>, fallback: f64) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y) in hist.iter().rev() {
        let rho = 1.0 / dot(y, s);
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push((rho, a));
    }
    let gamma = match hist.back() {
        Some((s, y)) => dot(s, y) / dot(y, y),
        None => fallback,
    };
    for qi in q.iter_mut() {
        *qi *= gamma;
    }
    for ((s, y), (rho, a)) in hist.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

fn run(
    params: &Params,
    mu: &DiscreteMeasure,
    c: f64,
    even: bool,
    opts: &SolverOptions,
) -> Result<NormalizedSolution> {
    let n_atoms = mu.len();
    let (var, nvar) = if even {
        let anti = mu.antipodes().expect("validated even measure");
        let mut var = vec![usize::MAX; n_atoms];
        let mut k = 0;
        for i in 0..n_atoms {
            if var[i] == usize::MAX {
                var[i] = k;
                var[anti[i]] = k;
                k += 1;
            }
        }
        (var, k)
    } else {
        ((0..n_atoms).collect(), n_atoms)
    };
    let total = mu.total();
    let prob = Problem {
        params,
        dirs: &mu.dirs,
        mu: mu.weights.iter().map(|w| w / total).collect(),
        p: params.p(),
        c,
        var,
        nvar,
        floor: opts.floor,
    };
    let r0 = ball_radius_for_mass(params, c)?;
    let mut st = prob.evaluate(&vec![r0.ln(); nvar])?;
    let mut log = vec![IterLog {
        iter: 0,
        phi: -st.f,
        residual: st.residual,
        projected_gradient: st.proj_ratio,
    }];
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::new();
    let mut iterations = 0;
    let converged = |s: &State| {
        s.residual <= opts.tol_measure
            && s.proj_ratio <= opts.grad_tol
            && (s.volume - c).abs() <= opts.tol_volume
    };
    let mut stalls = 0;
    while !converged(&st) && iterations < opts.max_iter {
        iterations += 1;
        let gnorm = dot(&st.grad, &st.grad).sqrt();
        let mut dir = lbfgs_direction(&st.grad, &hist, 0.1 / gnorm.max(1e-300));
        let mut slope = dot(&dir, &st.grad);
        if !(slope < 0.0) {
            hist.clear();
            dir = st.grad.iter().map(|g| -g * 0.1 / gnorm).collect();
            slope = dot(&dir, &st.grad);
        }
        let dmax = dir.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if dmax > 0.5 {
            let sc = 0.5 / dmax;
            dir.iter_mut().for_each(|d| *d *= sc);
            slope *= sc;
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xt: Vec<f64> = st.x.iter().zip(&dir).map(|(x, d)| x + step * d).collect();
            if let Ok(trial) = prob.evaluate(&xt) {
                let noise = 1e-13 * st.f.abs();
                let armijo = trial.f <= st.f + 1e-4 * step * slope;
                let flat = (trial.f - st.f).abs() <= noise
                    && dot(&trial.grad, &trial.grad) < dot(&st.grad, &st.grad);
                if armijo || flat {
                    accepted = Some(trial);
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some(trial) => {
                stalls = 0;
                let s: Vec<f64> = trial.x.iter().zip(&st.x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = trial.grad.iter().zip(&st.grad).map(|(a, b)| a - b).collect();
                if dot(&s, &y) > 1e-16 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                    hist.push_back((s, y));
                    if hist.len() > opts.memory {
                        hist.pop_front();
                    }
                }
                st = trial;
            }
            None => {
                stalls += 1;
                hist.clear();
                if stalls >= 3 {
                    break;
                }
            }
        }
        log.push(IterLog {
            iter: iterations,
            phi: -st.f,
            residual: st.residual,
            projected_gradient: st.proj_ratio,
        });
    }
    let inactive: Vec<usize> = (0..n_atoms).filter(|&i| st.s1[i] <= 0.0).collect();
    if !converged(&st) {
        return Err(Error::NonConvergence(format!(
            "after {iterations} iterations: measure residual {:.3e}, projected gradient {:.3e}, |G − c| {:.3e}",
            st.residual,
            st.proj_ratio,
            (st.volume - c).abs()
        )));
    }
    let p = params.p();
    let sp_tot: f64 = st.z.iter().zip(&st.s1).map(|(z, s)| z.powf(1.0 - p) * s).sum();
    Ok(NormalizedSolution {
        multiplier: sp_tot / total,
        support: st.z,
        target_volume: c,
        volume: st.volume,
        first_order_residual: st.residual,
        projected_gradient_ratio: st.proj_ratio,
        objective: -st.f * total,
        iterations,
        inactive_atoms: inactive,
        even,
        log,
        body: st.body,
    })
}

fn check_measure_dim(params: &Params, mu: &DiscreteMeasure) -> Result<()> {
    if params.n() != mu.dim() {
        return Err(Error::Shape("measure and parameter dimensions differ".into()));
    }
    Ok(())
}

/// Solves the normalized problem for p > 0. Asymmetric measures need c ≥ 1/2;
/// even measures are solved in the even cone for any c ∈ (0, 1).
pub fn solve_normalized(
    params: &Params,
    mu: &DiscreteMeasure,
    c: f64,
    opts: &SolverOptions,
) -> Result<NormalizedSolution> {
    check_measure_dim(params, mu)?;
    if !(params.p() > 0.0) {
        return domain(format!(
            "solve_normalized needs p > 0, got {}; use solve_normalized_even for p < 0",
            params.p()
        ));
    }
    if !(c > 0.0 && c < 1.0) {
        return domain(format!("target volume must lie in (0, 1), got {c}"));
    }
    if c < 0.5 && !mu.is_even() {
        return Err(Error::Precondition(format!(
            "target volume {c} < 1/2 is only supported for even measures"
        )));
    }
    if let (false, Some(u)) = check_not_concentrated(mu, ConcentrationMode::Hemisphere) {
        return Err(Error::Precondition(format!(
            "measure is concentrated on the closed hemisphere {{v : v·u ≤ 0}}, u = {:?}",
            from_point(mu.dim(), &u)
        )));
    }
    check_cutoff_feasible(params, c)?;
    run(params, mu, c, mu.is_even(), opts)
}

/// Solves the normalized problem for even μ and p < 0 in the admissible range.
pub fn solve_normalized_even(
    params: &Params,
    mu: &DiscreteMeasure,
    c: f64,
    opts: &SolverOptions,
) -> Result<NormalizedSolution> {
    check_measure_dim(params, mu)?;
    if !params.p_negative_admissible() {
        return Err(Error::Precondition(format!(
            "(p, q) = ({}, {}) is not admissible: need q < 0 with α/q − α < p < 0, or 0 ≤ q < α/(n+α) = {} with p < 0",
            params.p(),
            params.q(),
            params.alpha() / (params.dim() + params.alpha())
        )));
    }
    if !mu.is_even() {
        return Err(Error::Precondition("measure must be even".into()));
    }
    if !(c > 0.0 && c < 1.0) {
        return domain(format!("target volume must lie in (0, 1), got {c}"));
    }
    if let (false, Some(u)) = check_not_concentrated(mu, ConcentrationMode::GreatSubsphere) {
        return Err(Error::Precondition(format!(
            "measure is concentrated on the great subsphere orthogonal to {:?}",
            from_point(mu.dim(), &u)
        )));
    }
    check_cutoff_feasible(params, c)?;
    run(params, mu, c, true, opts)
}

fn check_cutoff_feasible(params: &Params, c: f64) -> Result<()> {
    if support_cutoff(params).is_some() && c >= 1.0 {
        return domain("target volume must be below 1");
    }
    Ok(())
}

/// λ = |S_p(K)|/|μ|, after checking that every atom ratio agrees with λ.
pub fn recover_multiplier(
    params: &Params,
    sol: &NormalizedSolution,
    mu: &DiscreteMeasure,
    rel_tol: f64,
) -> Result<f64> {
    let p = params.p();
    let (_, dens) = volume_and_densities(params, &sol.body)?;
    let mut s1 = vec![0.0; mu.len()];
    for (f, d) in sol.body.facets().iter().zip(&dens) {
        if f.source < mu.len() {
            s1[f.source] = *d;
        }
    }
    let sp: Vec<f64> = sol.support.iter().zip(&s1).map(|(z, s)| z.powf(1.0 - p) * s).collect();
    let lambda = sp.iter().sum::<f64>() / mu.total();
    for (i, (s, m)) in sp.iter().zip(mu.weights()).enumerate() {
        if (s / m - lambda).abs() > rel_tol * lambda {
            return Err(Error::InconsistentMultiplier(format!(
                "atom {i}: ratio {} differs from λ = {lambda}",
                s / m
            )));
        }
    }
    Ok(lambda)
}
