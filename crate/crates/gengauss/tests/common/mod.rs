//! Independent oracles shared by the integration tests and the acceptance suite.
//! Nothing here calls the library's quadrature or special functions.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Surface area of the unit sphere for n = 2, 3.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("oracle covers n = 2, 3"),
    }
}

/// Unnormalized radial bracket written from the definition.
/// `dist_to_cut` is the distance to the support cutoff when q > 0 and is used
/// to keep the bracket accurate near a singular endpoint.
pub fn bracket(n: usize, alpha: f64, q: f64, r: f64, dist_to_cut: Option<f64>) -> f64 {
    let nf = n as f64;
    if q == 0.0 {
        return (-r.powf(alpha) / alpha).exp();
    }
    let e = 1.0 / q - nf / alpha - 1.0;
    let base = match (q > 0.0, dist_to_cut) {
        (true, Some(d)) => {
            let cut = (alpha / q).powf(1.0 / alpha);
            -(alpha * (-d / cut).ln_1p()).exp_m1()
        }
        _ => 1.0 - q / alpha * r.powf(alpha),
    };
    if base <= 0.0 {
        return 0.0;
    }
    (e * base.ln()).exp()
}

pub fn cutoff(alpha: f64, q: f64) -> Option<f64> {
    (q > 0.0).then(|| (alpha / q).powf(1.0 / alpha))
}

/// Tanh-sinh quadrature on [0, 1]; `f(x, 1 − x)` receives both distances to
/// the endpoints so singular endpoints are resolved.
pub fn tanh_sinh<F: Fn(f64, f64) -> f64>(f: F) -> f64 {
    let t_max = 6.5;
    let mut prev = f64::NAN;
    let mut h = 0.5;
    let mut sum = 0.0;
    for level in 0..10 {
        let step = if level == 0 { h } else { 2.0 * h };
        let start = if level == 0 { 0.0 } else { h };
        let mut t = start;
        let mut add = 0.0;
        while t <= t_max {
            let signs: &[f64] = if t == 0.0 { &[1.0] } else { &[1.0, -1.0] };
            for &s in signs {
                let tt = s * t;
                let u = 0.5 * PI * tt.sinh();
                let w = 0.5 * PI * tt.cosh() / (2.0 * u.cosh() * u.cosh());
                let x = 1.0 / (1.0 + (-2.0 * u).exp());
                let xc = 1.0 / (1.0 + (2.0 * u).exp());
                if x > 0.0 && xc > 0.0 {
                    let v = f(x, xc);
                    if v.is_finite() {
                        add += w * v;
                    }
                }
            }
            t += step;
        }
        sum += add;
        let est = sum * h;
        if level > 3 && (est - prev).abs() <= 1e-15 * est.abs().max(1e-300) {
            return est;
        }
        prev = est;
        h *= 0.5;
    }
    prev
}

/// σ_n ∫_0^ρ bracket(r) r^{n−1} dr (ρ = ∞ allowed).
pub fn radial_integral(n: usize, alpha: f64, q: f64, rho: f64) -> f64 {
    let nf = n as f64;
    let cut = cutoff(alpha, q);
    let upper = match cut {
        Some(c) => c.min(rho),
        None => rho,
    };
    let sig = sphere_area(n);
    if upper.is_finite() {
        let at_cut = cut.is_some_and(|c| upper >= c);
        sig * upper
            * tanh_sinh(|x, xc| {
                let r = upper * x;
                let d = at_cut.then_some(upper * xc);
                bracket(n, alpha, q, r, d) * r.powf(nf - 1.0)
            })
    } else {
        // r = t/(1 − t)
        sig * tanh_sinh(|x, xc| {
            let r = x / xc;
            bracket(n, alpha, q, r, None) * r.powf(nf - 1.0) / (xc * xc)
        })
    }
}

/// Z from the definition, by quadrature.
pub fn z_oracle(n: usize, alpha: f64, q: f64) -> f64 {
    radial_integral(n, alpha, q, f64::INFINITY)
}

/// Monte Carlo estimate of ∫ bracket / Z with its standard error. Radii are
/// drawn through r = s·tan(πU/2) (or a power map onto the support for q > 0)
/// and importance-weighted; directions drop out by radial symmetry.
pub fn mc_normalization(n: usize, alpha: f64, q: f64, z: f64, samples: usize, seed: u64) -> (f64, f64) {
    let nf = n as f64;
    let sig = sphere_area(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = if q == 0.0 { 0.0 } else { 1.0 / q - nf / alpha - 1.0 };
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let u: f64 = rng.random_range(0.0..1.0);
        let v = match cutoff(alpha, q) {
            Some(c) => {
                // r = c(1 − (1 − u)^k) absorbs the endpoint singularity.
                let k = if e < 0.0 { 1.0 / (1.0 + e) } else { 1.0 };
                let w = (1.0 - u).powf(k);
                let r = c * (1.0 - w);
                let jac = c * k * (1.0 - u).powf(k - 1.0);
                bracket(n, alpha, q, r, Some(c * w)) * r.powf(nf - 1.0) * jac
            }
            None => {
                let s = 1.0;
                let a = 0.5 * PI * u;
                let r = s * a.tan();
                let jac = s * 0.5 * PI / (a.cos() * a.cos());
                bracket(n, alpha, q, r, None) * r.powf(nf - 1.0) * jac
            }
        } * sig
            / z;
        s1 += v;
        s2 += v * v;
    }
    let m = s1 / samples as f64;
    let var = (s2 / samples as f64 - m * m).max(0.0);
    (m, (var / samples as f64).sqrt())
}

/// Gauss-Legendre nodes and weights on [−1, 1] by Newton on P_k.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; k];
    let mut w = vec![0.0; k];
    for i in 0..k {
        let mut z = (PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let dp = k as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (mut p0, mut p1) = (1.0, z);
                for j in 2..=k {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = k as f64 * (z * p1 - p0) / (z * z - 1.0);
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
        x[i] = z;
    }
    (x, w)
}

/// Composite rule on [a, b] with panel breaks at 0 when 0 lies inside.
pub fn composite_nodes(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (gx, gw) = gauss_legendre(order);
    let mut cuts = vec![a];
    if a < 0.0 && b > 0.0 {
        let left = ((panels as f64) * (-a) / (b - a)).round().max(1.0) as usize;
        let right = panels.saturating_sub(left).max(1);
        for i in 1..left {
            cuts.push(a + (-a) * i as f64 / left as f64);
        }
        cuts.push(0.0);
        for i in 1..right {
            cuts.push(b * i as f64 / right as f64);
        }
    } else {
        for i in 1..panels {
            cuts.push(a + (b - a) * i as f64 / panels as f64);
        }
    }
    cuts.push(b);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        let (c, h) = (0.5 * (l + r), 0.5 * (r - l));
        for (x, wt) in gx.iter().zip(&gw) {
            out.push((c + h * x, h * wt));
        }
    }
    out
}

/// Normalized density g(x) from the definition.
pub fn density(n: usize, alpha: f64, q: f64, z: f64, r: f64) -> f64 {
    bracket(n, alpha, q, r, None) / z
}

/// G of the box ∏[lo_i, hi_i] by tensor Gauss-Legendre.
pub fn box_mass(n: usize, alpha: f64, q: f64, z: f64, lo: &[f64], hi: &[f64], panels: usize, order: usize) -> f64 {
    let axes: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|i| composite_nodes(lo[i], hi[i], panels, order))
        .collect();
    let mut s = 0.0;
    match n {
        2 => {
            for (x, wx) in &axes[0] {
                for (y, wy) in &axes[1] {
                    s += wx * wy * density(2, alpha, q, z, x.hypot(*y));
                }
            }
        }
        3 => {
            for (x, wx) in &axes[0] {
                for (y, wy) in &axes[1] {
                    let rxy = x.hypot(*y);
                    for (zz, wz) in &axes[2] {
                        s += wx * wy * wz * density(3, alpha, q, z, rxy.hypot(*zz));
                    }
                }
            }
        }
        _ => panic!("oracle covers n = 2, 3"),
    }
    s
}

/// ∫ g along the planar edge {x = a, |y| ≤ b}.
pub fn edge_mass(alpha: f64, q: f64, z: f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    composite_nodes(-b, b, panels, order)
        .iter()
        .map(|(y, w)| w * density(2, alpha, q, z, a.hypot(*y)))
        .sum()
}

/// Monte Carlo G of the cube [−s, s]^n with its standard error.
pub fn mc_cube(n: usize, alpha: f64, q: f64, z: f64, s: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vol = (2.0 * s).powi(n as i32);
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let r2: f64 = (0..n).map(|_| rng.random_range(-s..s)).map(|x: f64| x * x).sum();
        let v = density(n, alpha, q, z, r2.sqrt()) * vol;
        s1 += v;
        s2 += v * v;
    }
    let m = s1 / samples as f64;
    let var = (s2 / samples as f64 - m * m).max(0.0);
    (m, (var / samples as f64).sqrt())
}

/// Φ(r) = r^{n−p}·bracket(r) written from the definition.
pub fn phi(n: usize, alpha: f64, q: f64, p: f64, r: f64) -> f64 {
    r.powf(n as f64 - p) * bracket(n, alpha, q, r, None)
}

/// Sign changes of Φ − target on a log-spaced scan, and the scan maximum.
pub fn scan_phi(n: usize, alpha: f64, q: f64, p: f64, target: f64, lo: f64, hi: f64, points: usize) -> (usize, f64, f64) {
    let mut crossings = 0;
    let mut prev: Option<bool> = None;
    let (mut best, mut arg) = (f64::NEG_INFINITY, f64::NAN);
    for i in 0..points {
        let r = lo * (hi / lo).powf(i as f64 / (points - 1) as f64);
        let v = phi(n, alpha, q, p, r);
        if v > best {
            best = v;
            arg = r;
        }
        let above = v > target;
        if let Some(pa) = prev {
            if pa != above {
                crossings += 1;
            }
        }
        prev = Some(above);
    }
    (crossings, best, arg)
}

/// Random planar atoms whose largest angular gap stays below π − margin.
pub fn random_planar_atoms(rng: &mut ChaCha8Rng, k: usize, margin: f64) -> (Vec<f64>, Vec<f64>) {
    loop {
        let mut ang: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        ang.sort_by(f64::total_cmp);
        let mut gap: f64 = 2.0 * PI - (ang[k - 1] - ang[0]);
        let mut close = false;
        for w in ang.windows(2) {
            gap = gap.max(w[1] - w[0]);
            close |= w[1] - w[0] < 1e-3;
        }
        if gap < PI - margin && !close {
            let w = (0..k).map(|_| rng.random_range(0.2..2.0)).collect();
            return (ang, w);
        }
    }
}

pub fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |s, x| s.max(x.abs()))
}

/// Half-widths (a, b) of the planar box [−a, a]×[−b, b] solving the normalized
/// problem for μ = w1(δ_{e1} + δ_{−e1}) + w2(δ_{e2} + δ_{−e2}): G = c and
/// a^{1−p}·edge(a, b) : b^{1−p}·edge(b, a) = w1 : w2. Nested bisection in the
/// polar angle of (a, b) and in the radius.
pub fn box_oracle(alpha: f64, q: f64, p: f64, z: f64, w1: f64, w2: f64, c: f64) -> (f64, f64) {
    let (panels, order) = (6, 20);
    let mass = |a: f64, b: f64| box_mass(2, alpha, q, z, &[-a, -b], &[a, b], panels, order);
    let radius = |t: f64| {
        let (ct, st) = (t.cos(), t.sin());
        let (mut lo, mut hi) = (0.0, 1.0);
        while mass(hi * ct, hi * st) < c {
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mass(mid * ct, mid * st) < c {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let gap = |t: f64| {
        let r = radius(t);
        let (a, b) = (r * t.cos(), r * t.sin());
        let s1 = a.powf(1.0 - p) * edge_mass(alpha, q, z, a, b, panels, order);
        let s2 = b.powf(1.0 - p) * edge_mass(alpha, q, z, b, a, panels, order);
        w2 * s1 - w1 * s2
    };
    let (mut lo, mut hi) = (0.05, PI / 2.0 - 0.05);
    assert!(gap(lo) < 0.0 && gap(hi) > 0.0, "box oracle bracket");
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let r = radius(t);
    (r * t.cos(), r * t.sin())
}
