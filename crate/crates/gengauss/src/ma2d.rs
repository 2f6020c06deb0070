//! Planar (n = 2) solver for the unnormalized equation
//!   h'' + h = Z f h^{p−1} W(h² + h'²),
//! W(Q) = [1 − (q/α)Q^{α/2}]_+^{2/α + 1 − 1/q} (e^{Q^{α/2}/α} at q = 0),
//! on a uniform periodic grid with fourth-order central differences.
//!
//! h² + h'² is |Dh|² for the 1-homogeneous extension of h, so W(|Dh|²) = 1/(Z g(|Dh|)).

use crate::density::{normalizer, support_cutoff, Params};
use crate::error::{domain, Error, Result};
use crate::geometry::{wulff_shape_raw, Point};
use crate::isotropic::{constant_roots, roots_of_phi, RootKind};
use crate::measures::gauss_volume;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_MA_GRID: usize = 512;

/// Samples at θ_j = 2πj/m, m a power of two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicField {
    values: Vec<f64>,
}

impl PeriodicField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m < 8 || !m.is_power_of_two() {
            return Err(Error::Shape(format!("grid size must be a power of two ≥ 8, got {m}")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return domain(format!("non-finite field value {v}"));
        }
        Ok(Self { values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(m: usize, f: F) -> Result<Self> {
        Self::new((0..m).map(|j| f(2.0 * PI * j as f64 / m as f64)).collect())
    }

    pub fn constant(m: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; m])
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn step(&self) -> f64 {
        2.0 * PI / self.m() as f64
    }
    pub fn theta(&self, j: usize) -> f64 {
        self.step() * j as f64
    }
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// exp of the mean of ln f.
    pub fn geometric_mean(&self) -> f64 {
        (self.values.iter().map(|v| v.ln()).sum::<f64>() / self.m() as f64).exp()
    }

    /// ∫ f dθ by the periodic trapezoid rule.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.step()
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Samples rotated by `k` grid steps: g(θ_j) = f(θ_{j−k}).
    pub fn rotated(&self, k: usize) -> Self {
        let m = self.m();
        Self {
            values: (0..m).map(|j| self.values[(j + m - k % m) % m]).collect(),
        }
    }

    fn at(&self, j: isize) -> f64 {
        let m = self.m() as isize;
        self.values[j.rem_euclid(m) as usize]
    }

    /// Fourth-order first derivative.
    pub fn d1(&self) -> Vec<f64> {
        let c = 1.0 / (12.0 * self.step());
        (0..self.m() as isize)
            .map(|j| c * (-self.at(j + 2) + 8.0 * self.at(j + 1) - 8.0 * self.at(j - 1) + self.at(j - 2)))
            .collect()
    }

    /// Fourth-order second derivative.
    pub fn d2(&self) -> Vec<f64> {
        let dt = self.step();
        let c = 1.0 / (12.0 * dt * dt);
        (0..self.m() as isize)
            .map(|j| {
                c * (-self.at(j + 2) + 16.0 * self.at(j + 1) - 30.0 * self.at(j) + 16.0 * self.at(j - 1)
                    - self.at(j - 2))
            })
            .collect()
    }

    /// Minimum of h_{j+1} − 2h_j + h_{j−1} + Δθ² h_j.
    pub fn convexity_margin(&self) -> f64 {
        let dt2 = self.step().powi(2);
        (0..self.m() as isize)
            .map(|j| self.at(j + 1) - 2.0 * self.at(j) + self.at(j - 1) + dt2 * self.at(j))
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV rows (θ, value).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,value\n");
        for (j, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{},{}\n", self.theta(j), v));
        }
        s
    }
}

/// W(Q) and d ln W/dQ at Q = h² + h'².
struct Weight {
    q: f64,
    alpha: f64,
    expo: f64,
    coef: f64,
}

impl Weight {
    fn new(params: &Params) -> Self {
        let (a, q) = (params.alpha(), params.q());
        Self {
            q,
            alpha: a,
            expo: if q == 0.0 { 0.0 } else { 2.0 / a + 1.0 - 1.0 / q },
            coef: 1.0 - 2.0 * q / a - q,
        }
    }

    /// (ln W, d ln W/dQ), or None outside the support.
    fn eval(&self, qq: f64) -> Option<(f64, f64)> {
        let s = qq.powf(0.5 * self.alpha);
        let dlog_base = |base: f64| self.coef * s / qq / (2.0 * base);
        if self.q == 0.0 {
            return Some((s / self.alpha, 0.5 * s / qq));
        }
        let base = 1.0 - (self.q / self.alpha) * s;
        if base > 0.0 {
            Some((self.expo * base.ln(), dlog_base(base)))
        } else if self.expo > 0.0 {
            Some((f64::NEG_INFINITY, 0.0))
        } else if self.expo == 0.0 {
            Some((0.0, 0.0))
        } else {
            None
        }
    }
}

fn check_planar(params: &Params) -> Result<()> {
    if params.n() != 2 {
        return domain(format!("the planar solver needs n = 2, got n = {}", params.n()));
    }
    Ok(())
}

fn check_sizes(h: &PeriodicField, f: &PeriodicField) -> Result<()> {
    if h.m() != f.m() {
        return Err(Error::Shape(format!("grid sizes differ: {} vs {}", h.m(), f.m())));
    }
    Ok(())
}

/// Residual, right-hand side T_j and the Jacobian ingredients.
struct Eval {
    r: Vec<f64>,
    t: Vec<f64>,
    d1: Vec<f64>,
    dlw: Vec<f64>,
}

fn evaluate(params: &Params, zf: &[f64], h: &PeriodicField) -> Result<Eval> {
    let w = Weight::new(params);
    let p = params.p();
    let d1 = h.d1();
    let d2 = h.d2();
    let m = h.m();
    let mut r = vec![0.0; m];
    let mut t = vec![0.0; m];
    let mut dlw = vec![0.0; m];
    for j in 0..m {
        let hj = h.values[j];
        if !(hj > 0.0) {
            return domain(format!("support value must be positive, got {hj} at node {j}"));
        }
        let qq = hj * hj + d1[j] * d1[j];
        let (lw, dl) = w.eval(qq).ok_or_else(|| {
            Error::OutOfSupport(format!(
                "|Dh| = {} reaches the density cutoff at node {j}",
                qq.sqrt()
            ))
        })?;
        t[j] = zf[j] * ((p - 1.0) * hj.ln() + lw).exp();
        dlw[j] = dl;
        r[j] = d2[j] + hj - t[j];
    }
    Ok(Eval { r, t, d1, dlw })
}

/// Pointwise residual (h'' + h) − Z f h^{p−1} W(h² + h'²).
pub fn residual(params: &Params, h: &PeriodicField, f: &PeriodicField) -> Result<PeriodicField> {
    check_planar(params)?;
    check_sizes(h, f)?;
    if f.min() <= 0.0 {
        return domain("right-hand side must be positive");
    }
    let z = normalizer(params);
    let zf: Vec<f64> = f.values.iter().map(|v| z * v).collect();
    Ok(PeriodicField {
        values: evaluate(params, &zf, h)?.r,
    })
}

/// Periodic pentadiagonal Jacobian: row j holds offsets −2..=2.
fn jacobian(params: &Params, h: &PeriodicField, ev: &Eval) -> Vec<[f64; 5]> {
    let m = h.m();
    let dt = h.step();
    let c2 = 1.0 / (12.0 * dt * dt);
    let c1 = 1.0 / (12.0 * dt);
    let s2 = [-c2, 16.0 * c2, -30.0 * c2, 16.0 * c2, -c2];
    let s1 = [c1, -8.0 * c1, 0.0, 8.0 * c1, -c1];
    let p = params.p();
    (0..m)
        .map(|j| {
            let hj = h.values[j];
            let diag = ev.t[j] * ((p - 1.0) / hj + 2.0 * hj * ev.dlw[j]);
            let grad = ev.t[j] * 2.0 * ev.d1[j] * ev.dlw[j];
            let mut row = [0.0; 5];
            for k in 0..5 {
                row[k] = s2[k] - grad * s1[k];
            }
            row[2] += 1.0 - diag;
            row
        })
        .collect()
}

/// Banded LU with partial pivoting, `kl` sub- and `kl + ku` super-diagonals after fill.
struct Band {
    m: usize,
    kl: usize,
    ku: usize,
    w: usize,
    a: Vec<f64>,
    piv: Vec<usize>,
}

impl Band {
    fn new(m: usize, kl: usize, ku: usize) -> Self {
        let w = 2 * kl + ku + 1;
        Self {
            m,
            kl,
            ku,
            w,
            a: vec![0.0; m * w],
            piv: vec![0; m],
        }
    }
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.w + (j + self.kl - i)
    }
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.a[k] = v;
    }
    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[self.idx(i, j)]
    }

    fn factor(&mut self) -> bool {
        let (m, kl, ku) = (self.m, self.kl, self.ku);
        let scale = self.a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        for k in 0..m {
            let last = (k + kl).min(m - 1);
            let mut p = k;
            for i in k + 1..=last {
                if self.get(i, k).abs() > self.get(p, k).abs() {
                    p = i;
                }
            }
            if self.get(p, k).abs() <= 1e-14 * scale {
                return false;
            }
            self.piv[k] = p;
            let hi = (k + kl + ku).min(m - 1);
            if p != k {
                for j in k..=hi {
                    let (x, y) = (self.idx(k, j), self.idx(p, j));
                    self.a.swap(x, y);
                }
            }
            let d = self.get(k, k);
            for i in k + 1..=last {
                let l = self.get(i, k) / d;
                self.set(i, k, l);
                if l != 0.0 {
                    for j in k + 1..=hi {
                        let v = self.get(i, j) - l * self.get(k, j);
                        self.set(i, j, v);
                    }
                }
            }
        }
        true
    }

    fn solve(&self, b: &mut [f64]) {
        let (m, kl, ku) = (self.m, self.kl, self.ku);
        for k in 0..m {
            let p = self.piv[k];
            b.swap(k, p);
            for i in k + 1..=(k + kl).min(m - 1) {
                b[i] -= self.get(i, k) * b[k];
            }
        }
        for k in (0..m).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + kl + ku).min(m - 1) {
                s -= self.get(k, j) * b[j];
            }
            b[k] = s / self.get(k, k);
        }
    }
}

fn dense_solve(rows: &[[f64; 5]], b: &[f64]) -> Option<Vec<f64>> {
    let m = rows.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    for (j, row) in rows.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            let c = (j + m + k - 2) % m;
            a[(j, c)] += v;
        }
    }
    a.lu().solve(&DVector::from_column_slice(b)).map(|x| x.as_slice().to_vec())
}

fn apply(rows: &[[f64; 5]], x: &[f64]) -> Vec<f64> {
    let m = rows.len();
    (0..m)
        .map(|j| (0..5).map(|k| rows[j][k] * x[(j + m + k - 2) % m]).sum())
        .collect()
}

/// Solves the periodic pentadiagonal system: banded LU on the non-wrapping
/// part plus a rank-4 Woodbury correction for the corner entries, falling back
/// to dense LU when the correction is ill-conditioned.
fn periodic_solve(rows: &[[f64; 5]], b: &[f64]) -> Result<Vec<f64>> {
    let m = rows.len();
    let mut band = Band::new(m, 2, 2);
    // corner[c] = (row, col, value) entries that wrap around.
    let mut corners = Vec::new();
    for (j, row) in rows.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            let c = j as isize + k as isize - 2;
            if (0..m as isize).contains(&c) {
                band.set(j, c as usize, *v);
            } else {
                corners.push((j, c.rem_euclid(m as isize) as usize, *v));
            }
        }
    }
    let solved = band.factor().then(|| {
        let ucols = [0, 1, m - 2, m - 1];
        let mut x = b.to_vec();
        band.solve(&mut x);
        // Y = B⁻¹U with U = [e_0, e_1, e_{m−2}, e_{m−1}], V^T rows from the corners.
        let ys: Vec<Vec<f64>> = ucols
            .iter()
            .map(|&r| {
                let mut e = vec![0.0; m];
                e[r] = 1.0;
                band.solve(&mut e);
                e
            })
            .collect();
        let vt = |row: usize, v: &[f64]| -> f64 {
            corners
                .iter()
                .filter(|(r, _, _)| *r == row)
                .map(|(_, c, w)| w * v[*c])
                .sum()
        };
        let mut cap = nalgebra::Matrix4::<f64>::identity();
        let mut rhs = nalgebra::Vector4::<f64>::zeros();
        for (a, &ra) in ucols.iter().enumerate() {
            for (bcol, y) in ys.iter().enumerate() {
                cap[(a, bcol)] += vt(ra, y);
            }
            rhs[a] = vt(ra, &x);
        }
        let w = cap.lu().solve(&rhs)?;
        for (k, y) in ys.iter().enumerate() {
            for (xi, yi) in x.iter_mut().zip(y) {
                *xi -= w[k] * yi;
            }
        }
        Some(x)
    });
    let bnorm = b.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let accept = |x: &Vec<f64>| {
        let r = apply(rows, x);
        let err = r.iter().zip(b).fold(0.0f64, |s, (u, v)| s.max((u - v).abs()));
        err <= 1e-8 * bnorm.max(1e-300)
    };
    if let Some(Some(x)) = solved {
        if accept(&x) {
            return Ok(x);
        }
    }
    dense_solve(rows, b)
        .ok_or_else(|| Error::NonConvergence("singular Jacobian".into()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Lower bound kept by every accepted iterate.
    pub floor: f64,
    pub min_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            floor: 1e-8,
            min_step: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Low,
    High,
    Unique,
}

#[derive(Debug, Clone, Serialize)]
pub struct MASolution {
    pub h: PeriodicField,
    pub residual_sup: f64,
    pub iterations: usize,
    /// G of the body with support numbers h on the grid directions.
    pub volume: f64,
    pub branch: Branch,
    /// max h below the support cutoff when q > 0, positivity otherwise.
    pub bounds_ok: bool,
    pub warnings: Vec<String>,
}

impl MASolution {
    /// CSV rows (θ, h, h', residual).
    pub fn to_csv(&self, params: &Params, f: &PeriodicField) -> Result<String> {
        let d1 = self.h.d1();
        let r = residual(params, &self.h, f)?;
        let mut s = String::from("theta,h,dh,residual\n");
        for j in 0..self.h.m() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                self.h.theta(j),
                self.h.values[j],
                d1[j],
                r.values[j]
            ));
        }
        Ok(s)
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |s, x| s.max(x.abs()))
}

fn finish(params: &Params, h: PeriodicField, residual_sup: f64, iterations: usize) -> Result<MASolution> {
    let m = h.m();
    let dirs: Vec<Point> = (0..m)
        .map(|j| {
            let t = h.theta(j);
            Point::new(t.cos(), t.sin(), 0.0)
        })
        .collect();
    let body = wulff_shape_raw(2, &dirs, h.values())?;
    let volume = gauss_volume(params, &body)?;
    let bounds_ok = match support_cutoff(params) {
        Some(cut) => h.max() < cut,
        None => h.min() > 0.0,
    };
    Ok(MASolution {
        h,
        residual_sup,
        iterations,
        volume,
        branch: Branch::Unique,
        bounds_ok,
        warnings: Vec::new(),
    })
}

/// Damped Newton with the analytic Jacobian; every accepted iterate stays
/// above the floor, inside the support and discretely convex.
pub fn newton_solve(
    params: &Params,
    f: &PeriodicField,
    h0: &PeriodicField,
    opts: &NewtonOptions,
) -> Result<MASolution> {
    check_planar(params)?;
    check_sizes(h0, f)?;
    if f.min() <= 0.0 {
        return domain("right-hand side must be positive");
    }
    if h0.min() <= 0.0 {
        return domain("initial support values must be positive");
    }
    let z = normalizer(params);
    let zf: Vec<f64> = f.values.iter().map(|v| z * v).collect();
    let mut h = h0.clone();
    let mut ev = evaluate(params, &zf, &h)?;
    let mut rn = sup(&ev.r);
    let mut iters = 0;
    while rn > opts.tol {
        if iters >= opts.max_iter {
            return Err(Error::NonConvergence(format!(
                "Newton stopped after {iters} iterations with residual {rn:.3e}"
            )));
        }
        iters += 1;
        let rows = jacobian(params, &h, &ev);
        let delta = periodic_solve(&rows, &ev.r)?;
        let mut lam = 1.0;
        let mut convexity_blocked = false;
        let accepted = loop {
            if lam < opts.min_step {
                break None;
            }
            let trial: Vec<f64> = h.values.iter().zip(&delta).map(|(a, d)| a - lam * d).collect();
            if trial.iter().any(|v| !(*v > opts.floor)) {
                lam *= 0.5;
                continue;
            }
            let th = PeriodicField { values: trial };
            if th.convexity_margin() <= -1e-10 {
                convexity_blocked = true;
                lam *= 0.5;
                continue;
            }
            match evaluate(params, &zf, &th) {
                Ok(te) => {
                    let tn = sup(&te.r);
                    if tn <= (1.0 - 1e-4 * lam) * rn || (tn < rn && lam < 1e-3) {
                        break Some((th, te, tn));
                    }
                }
                Err(Error::OutOfSupport(_)) => {}
                Err(e) => return Err(e),
            }
            lam *= 0.5;
        };
        match accepted {
            Some((th, te, tn)) => {
                h = th;
                ev = te;
                rn = tn;
            }
            None if convexity_blocked => {
                return Err(Error::Convexity(format!(
                    "no step keeps h'' + h > 0 (residual {rn:.3e})"
                )))
            }
            None => {
                return Err(Error::NonConvergence(format!(
                    "line search failed at residual {rn:.3e}"
                )))
            }
        }
    }
    // One further full step drives the solution error to the rounding floor
    // while the residual stays within tolerance.
    {
        let rows = jacobian(params, &h, &ev);
        if let Ok(delta) = periodic_solve(&rows, &ev.r) {
            let th = PeriodicField {
                values: h.values.iter().zip(&delta).map(|(a, d)| a - d).collect(),
            };
            if th.min() > opts.floor && th.convexity_margin() > -1e-10 {
                if let Ok(te) = evaluate(params, &zf, &th) {
                    let tn = sup(&te.r);
                    if tn <= opts.tol.max(rn) {
                        h = th;
                        rn = tn;
                    }
                }
            }
        }
    }
    finish(params, h, rn, iters)
}

/// Constant r with Φ(r) = cZ for p ≥ n, unique on the support.
fn constant_solution(params: &Params, c: f64) -> Result<f64> {
    let roots = roots_of_phi(params, c * normalizer(params))?;
    match roots.as_slice() {
        [r] => Ok(*r),
        [] if params.p() == params.dim() => Err(Error::Precondition(format!(
            "no constant solution for f ≡ {c}; for p = n this requires f < 1/Z = {}",
            1.0 / normalizer(params)
        ))),
        [] => Err(Error::Precondition(format!(
            "no constant solution for f ≡ {c} (q = {} with q < α/(n+α) = {} guarantees one for p > n)",
            params.q(),
            params.alpha() / (params.dim() + params.alpha())
        ))),
        _ => Err(Error::Precondition(format!(
            "{} constant solutions for f ≡ {c}; continuation needs a unique seed",
            roots.len()
        ))),
    }
}

fn blend(f: &PeriodicField, c0: f64, t: f64) -> PeriodicField {
    PeriodicField {
        values: f.values.iter().map(|v| (1.0 - t) * c0 + t * v).collect(),
    }
}

/// Warm-started Newton along f_t = (1 − t)c₀ + t f from the constant solution,
/// halving the step on failure.
fn continuation(
    params: &Params,
    f: &PeriodicField,
    c0: f64,
    start: PeriodicField,
    steps: usize,
    opts: &NewtonOptions,
) -> Result<MASolution> {
    let constant = f.max() - f.min() <= 1e-15 * f.max();
    let mut dt = if constant { 1.0 } else { 1.0 / steps.max(1) as f64 };
    let mut t = 0.0;
    let mut h = start;
    let mut total = 0;
    let mut last: Option<MASolution> = None;
    while t < 1.0 {
        let tn = (t + dt).min(1.0);
        let ft = if tn >= 1.0 { f.clone() } else { blend(f, c0, tn) };
        match newton_solve(params, &ft, &h, opts) {
            Ok(sol) => {
                total += sol.iterations;
                h = sol.h.clone();
                t = tn;
                last = Some(sol);
            }
            Err(e) => {
                dt *= 0.5;
                if dt < 1e-4 {
                    return Err(Error::Continuation {
                        last_t: t,
                        reason: e.to_string(),
                    });
                }
            }
        }
    }
    let mut sol = last.expect("at least one continuation step");
    sol.iterations = total;
    Ok(sol)
}

/// Continuity method for p ≥ n = 2.
pub fn continuity_solve(
    params: &Params,
    f: &PeriodicField,
    steps: usize,
    opts: &NewtonOptions,
) -> Result<MASolution> {
    check_planar(params)?;
    if params.p() < 2.0 {
        return domain(format!("continuity_solve needs p ≥ n = 2, got p = {}", params.p()));
    }
    if f.min() <= 0.0 {
        return domain("right-hand side must be positive");
    }
    let mut warnings = Vec::new();
    let zinv = 1.0 / normalizer(params);
    if params.p() == 2.0 && f.max() >= zinv {
        warnings.push(format!(
            "p = n requires f < 1/Z = {zinv}; max f = {}",
            f.max()
        ));
    }
    let c0 = f.geometric_mean();
    let r0 = constant_solution(params, c0)?;
    let start = PeriodicField::constant(f.m(), r0)?;
    let mut sol = continuation(params, f, c0, start, steps, opts)?;
    sol.warnings = warnings;
    Ok(sol)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub spread: f64,
    pub converged: usize,
    pub failed: usize,
    /// Initial constant range [lo, hi].
    pub box_range: (f64, f64),
}

/// Newton from k initializations (constants across the C⁰ box and seeded
/// convex perturbations); spread is the largest pairwise sup-distance.
pub fn uniqueness_probe(
    params: &Params,
    f: &PeriodicField,
    k: usize,
    seed: u64,
    opts: &NewtonOptions,
) -> Result<ProbeReport> {
    check_planar(params)?;
    if f.min() <= 0.0 {
        return domain("right-hand side must be positive");
    }
    let z = normalizer(params);
    let mut ends = roots_of_phi(params, z * f.max())?;
    ends.extend(roots_of_phi(params, z * f.min())?);
    if ends.is_empty() {
        return Err(Error::Precondition("no constant solutions bracket the data".into()));
    }
    let lo = ends.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ends.iter().copied().fold(0.0, f64::max);
    let m = f.m();
    let inits: Vec<PeriodicField> = (0..k)
        .map(|i| {
            let s = if k > 1 { i as f64 / (k - 1) as f64 } else { 0.5 };
            let r = lo * (hi / lo).powf(s);
            if i % 2 == 0 {
                PeriodicField::constant(m, r)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
                let modes: Vec<(f64, f64, f64)> = (2..=4)
                    .map(|kk| {
                        let kk = kk as f64;
                        let amp = rng.random_range(-0.1..0.1) / (kk * kk - 1.0);
                        (kk, amp, rng.random_range(0.0..2.0 * PI))
                    })
                    .collect();
                PeriodicField::from_fn(m, |t| {
                    r * (1.0 + modes.iter().map(|(kk, a, ph)| a * (kk * t + ph).cos()).sum::<f64>())
                })
            }
        })
        .collect::<Result<_>>()?;
    let sols: Vec<Option<PeriodicField>> = inits
        .par_iter()
        .map(|h0| newton_solve(params, f, h0, opts).ok().map(|s| s.h))
        .collect();
    let ok: Vec<&PeriodicField> = sols.iter().flatten().collect();
    let mut spread = 0.0f64;
    for i in 0..ok.len() {
        for j in 0..i {
            spread = spread.max(ok[i].sup_distance(ok[j]));
        }
    }
    Ok(ProbeReport {
        spread,
        converged: ok.len(),
        failed: k - ok.len(),
        box_range: (lo, hi),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoBranchReport {
    pub low: MASolution,
    pub high: MASolution,
    pub seeds: (f64, f64),
    /// ∫ f dθ.
    pub mass: f64,
    pub threshold: Option<f64>,
    pub below_threshold: Option<bool>,
    pub branch_distance: f64,
    /// Whether the seeds' Jacobians avoid the singular set.
    pub seeds_invertible: (bool, bool),
}

/// Two solutions for 1 ≤ p < n = 2 by continuation from both constant roots.
pub fn two_branch_solve(
    params: &Params,
    f: &PeriodicField,
    steps: usize,
    threshold: Option<f64>,
    opts: &NewtonOptions,
) -> Result<TwoBranchReport> {
    check_planar(params)?;
    let p = params.p();
    if !(1.0..2.0).contains(&p) {
        return domain(format!("two_branch_solve needs 1 ≤ p < 2, got {p}"));
    }
    if f.min() <= 0.0 {
        return domain("right-hand side must be positive");
    }
    let c0 = f.geometric_mean();
    let tri = constant_roots(params, c0)?;
    let (r1, r2) = match tri.kind {
        RootKind::TwoRoots(a, b) => (a, b),
        _ => {
            return Err(Error::Precondition(format!(
                "f ≡ {c0} has fewer than two constant solutions (critical constant {:?})",
                tri.critical_c
            )))
        }
    };
    let inv = |r: f64| {
        crate::isotropic::linearized_coefficient(params, r)
            .map(|c| c.invertible)
            .unwrap_or(false)
    };
    let m = f.m();
    let mut low = continuation(params, f, c0, PeriodicField::constant(m, r1)?, steps, opts)?;
    let mut high = continuation(params, f, c0, PeriodicField::constant(m, r2)?, steps, opts)?;
    let dist = low.h.sup_distance(&high.h);
    if dist <= 1e-6 {
        return Err(Error::BranchCollapse(format!(
            "both continuations reached the same solution (distance {dist:.3e}, volume {})",
            low.volume
        )));
    }
    low.branch = Branch::Low;
    high.branch = Branch::High;
    let mass = f.integral();
    Ok(TwoBranchReport {
        low,
        high,
        seeds: (r1, r2),
        mass,
        threshold,
        below_threshold: threshold.map(|t| mass < t),
        branch_distance: dist,
        seeds_invertible: (inv(r1), inv(r2)),
    })
}

/// Right-hand side making `h` an exact solution of the continuous equation,
/// given h and its exact derivatives at the grid angles.
pub fn manufactured_rhs(
    params: &Params,
    m: usize,
    h: impl Fn(f64) -> (f64, f64, f64),
) -> Result<PeriodicField> {
    check_planar(params)?;
    let w = Weight::new(params);
    let z = normalizer(params);
    let p = params.p();
    PeriodicField::from_fn(m, |t| {
        let (v, d1, d2) = h(t);
        let (lw, _) = w.eval(v * v + d1 * d1).unwrap_or((f64::NAN, 0.0));
        (d2 + v) / (z * ((p - 1.0) * v.ln() + lw).exp())
    })
}

/// Random smooth positive data c(1 + Σ a_k cos(kθ + φ_k)) with 1/C < f < C.
pub fn random_smooth_rhs(m: usize, c: f64, amp: f64, seed: u64) -> Result<PeriodicField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64)> = (1..=4)
        .map(|k| {
            (
                k as f64,
                rng.random_range(-amp..amp) / 4.0,
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();
    PeriodicField::from_fn(m, |t| {
        c * (1.0 + modes.iter().map(|(k, a, ph)| a * (k * t + ph).cos()).sum::<f64>())
    })
}
