//! Constant solutions h ≡ r of the isotropic equation with constant data c.
//!
//! With κ = r^{1−n} and |Dh| = r, h ≡ r solves the equation iff Φ(r) = cZ, where
//!   Φ(r) = r^{n−p} [1 − (q/α)r^α]_+^{1/q − n/α − 1}   (r^{n−p} e^{−r^α/α} at q = 0).
//! d ln Φ/d ln r = (n − p) − k r^α/B(r) with k = 1 − qn/α − q and B = 1 − (q/α)r^α,
//! which is monotone in r, so ln Φ has at most one critical point and every
//! root search reduces to bisection on monotone pieces.

use crate::density::{normalizer, support_cutoff, Params};
use crate::error::{domain, Error, Result};
use crate::ma2d::{residual, PeriodicField};
use serde::Serialize;

/// ln Φ(r); −∞ where the bracket vanishes with a positive exponent.
pub fn ln_phi(params: &Params, r: f64) -> f64 {
    let (n, a, q, p) = (params.dim(), params.alpha(), params.q(), params.p());
    let lr = r.ln();
    if q == 0.0 {
        return (n - p) * lr - (a * lr).exp() / a;
    }
    let base = 1.0 - (q / a) * (a * lr).exp();
    let e = 1.0 / q - n / a - 1.0;
    if base <= 0.0 {
        return if e > 0.0 {
            f64::NEG_INFINITY
        } else if e == 0.0 {
            (n - p) * lr
        } else {
            f64::INFINITY
        };
    }
    (n - p) * lr + e * base.ln()
}

/// Φ(r) on the support of the density.
pub fn phi(params: &Params, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("radius must be positive, got {r}"));
    }
    if let Some(cut) = support_cutoff(params) {
        if r >= cut {
            return domain(format!("radius {r} lies outside the support (cutoff {cut})"));
        }
    }
    Ok(ln_phi(params, r).exp())
}

/// d ln Φ / d ln r.
fn slope(params: &Params, lr: f64) -> f64 {
    let (n, a, q, p) = (params.dim(), params.alpha(), params.q(), params.p());
    let k = 1.0 - q * n / a - q;
    let rr = (a * lr).exp();
    let base = 1.0 - (q / a) * rr;
    if base <= 0.0 {
        return if k > 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    (n - p) - k * rr / base
}

/// Open interval of ln r on which Φ is evaluated.
fn log_range(params: &Params) -> (f64, f64) {
    let hi = match support_cutoff(params) {
        Some(c) => c.ln() - 1e-15,
        None => 700.0 / params.alpha().max(1.0),
    };
    (-700.0, hi)
}

/// Bisection for a sign change of `g` on [a, b] in ln r, to adjacent floats.
fn bisect<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64) -> f64 {
    let ga = g(a);
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (g(m) > 0.0) == (ga > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    if g(a).abs() <= g(b).abs() {
        a
    } else {
        b
    }
}

/// Critical point of ln Φ in ln r, with +1 for a maximum and −1 for a minimum.
fn critical_point(params: &Params) -> Option<(f64, f64)> {
    let (lo, hi) = log_range(params);
    let (sl, sh) = (slope(params, lo), slope(params, hi));
    if sl == 0.0 || sh == 0.0 || (sl > 0.0) == (sh > 0.0) {
        return None;
    }
    let lr = bisect(|x| slope(params, x), lo, hi);
    Some((lr, if sl > 0.0 { 1.0 } else { -1.0 }))
}

/// All r on the support with Φ(r) = target, in increasing order.
pub fn roots_of_phi(params: &Params, target: f64) -> Result<Vec<f64>> {
    if !(target > 0.0 && target.is_finite()) {
        return domain(format!("target must be positive, got {target}"));
    }
    let lt = target.ln();
    let (lo, hi) = log_range(params);
    let mut cuts = vec![lo];
    if let Some((lc, _)) = critical_point(params) {
        cuts.push(lc);
    }
    cuts.push(hi);
    let g = |x: f64| ln_phi(params, x.exp()) - lt;
    let mut roots = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ga, gb) = (g(a), g(b));
        if ga == 0.0 {
            roots.push(a.exp());
        } else if (ga > 0.0) != (gb > 0.0) && gb != 0.0 {
            roots.push(bisect(g, a, b).exp());
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * a.abs());
    Ok(roots)
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalConstant {
    pub c_star: f64,
    pub r_star: f64,
    /// Argmax and value from the closed form printed in the literature.
    pub closed_form_r: f64,
    pub closed_form_c: f64,
    pub relative_gap: f64,
}

fn require_subcritical_p(params: &Params) -> Result<()> {
    if !(params.p() < params.dim()) {
        return domain(format!("needs p < n, got p = {}", params.p()));
    }
    Ok(())
}

/// c* = max Φ / Z by bisection on (ln Φ)′ = 0.
pub fn critical_constant(params: &Params) -> Result<CriticalConstant> {
    require_subcritical_p(params)?;
    let (lr, kind) = critical_point(params)
        .filter(|(_, k)| *k > 0.0)
        .ok_or_else(|| Error::Precondition("NoCritical: Φ has no interior maximum".into()))?;
    debug_assert!(kind > 0.0);
    let z = normalizer(params);
    let r_star = lr.exp();
    let c_star = ln_phi(params, r_star).exp() / z;
    let (n, a, q, p) = (params.dim(), params.alpha(), params.q(), params.p());
    let denom = if q == 0.0 { 1.0 } else { q * (1.0 / q - n / a - 1.0) } + n - p;
    let closed_form_r = ((n - p) / denom).powf(1.0 / a);
    let closed_form_c = ln_phi(params, closed_form_r).exp() / z;
    Ok(CriticalConstant {
        c_star,
        r_star,
        closed_form_r,
        closed_form_c,
        relative_gap: (closed_form_c - c_star).abs() / c_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RootKind {
    TwoRoots(f64, f64),
    OneRoot(f64),
    NoRoot,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trichotomy {
    pub kind: RootKind,
    pub critical_c: Option<f64>,
    pub phi_max_arg: Option<f64>,
}

/// Constant solutions for data c, classified against max Φ.
pub fn constant_roots(params: &Params, c: f64) -> Result<Trichotomy> {
    require_subcritical_p(params)?;
    if !(c > 0.0 && c.is_finite()) {
        return domain(format!("constant must be positive, got {c}"));
    }
    let z = normalizer(params);
    let target = c * z;
    let crit = critical_point(params).filter(|(_, k)| *k > 0.0);
    let (critical_c, phi_max_arg) = match crit {
        Some((lr, _)) => {
            let r = lr.exp();
            (Some(ln_phi(params, r).exp() / z), Some(r))
        }
        None => (None, None),
    };
    if let (Some(cs), Some(r)) = (critical_c, phi_max_arg) {
        if (c - cs).abs() <= 1e-10 * cs {
            return Ok(Trichotomy {
                kind: RootKind::OneRoot(r),
                critical_c,
                phi_max_arg,
            });
        }
    }
    let roots = roots_of_phi(params, target)?;
    let kind = match roots.as_slice() {
        [] => RootKind::NoRoot,
        [r] => RootKind::OneRoot(*r),
        [a, b] => RootKind::TwoRoots(*a, *b),
        _ => unreachable!("Φ has at most one critical point"),
    };
    Ok(Trichotomy {
        kind,
        critical_c,
        phi_max_arg,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearizedCoefficient {
    /// a in L φ = Δφ + aφ, by differentiating the discrete residual.
    pub coefficient: f64,
    pub invertible: bool,
    /// Distance from a to the spectrum {k(k + n − 2)}.
    pub margin: f64,
    /// (n − p) + (αq + nq − α) r^α/(α − q r^α).
    pub derived: f64,
    /// The same with r^{α+1−p} in the numerator, as printed in the literature.
    pub closed_form: f64,
    pub gap: f64,
}

/// Zeroth-order coefficient of the linearization at h ≡ r, c = Φ(r)/Z.
pub fn linearized_coefficient(params: &Params, r: f64) -> Result<LinearizedCoefficient> {
    let (n, a, q, p) = (params.dim(), params.alpha(), params.q(), params.p());
    let c = phi(params, r)? / normalizer(params);
    let eps = 1e-5 * r;
    let coefficient = if params.n() == 2 {
        // k = 0 mode of the discrete planar Jacobian.
        let m = 16;
        let f = PeriodicField::constant(m, c)?;
        let rp = residual(params, &PeriodicField::constant(m, r + eps)?, &f)?;
        let rm = residual(params, &PeriodicField::constant(m, r - eps)?, &f)?;
        (rp.values()[0] - rm.values()[0]) / (2.0 * eps)
    } else {
        // r^{n−1} − cZ r^{p−1} W(r²), differentiated and divided by r^{n−2}.
        let z = normalizer(params);
        let scalar = |x: f64| x.powf(n - 1.0) - c * z * (-ln_phi(params, x)).exp() * x.powf(n - 1.0);
        (scalar(r + eps) - scalar(r - eps)) / (2.0 * eps) / r.powf(n - 2.0)
    };
    let mut margin = f64::INFINITY;
    for k in 0..10_000u64 {
        let ev = (k * (k + params.n() as u64 - 2)) as f64;
        margin = margin.min((coefficient - ev).abs());
        if ev > coefficient + margin {
            break;
        }
    }
    let ra = r.powf(a);
    let derived = (n - p) + (a * q + n * q - a) * ra / (a - q * ra);
    let closed_form = (n - p) + (a * q + n * q - a) * r.powf(a + 1.0 - p) / (a - q * ra);
    Ok(LinearizedCoefficient {
        coefficient,
        invertible: margin > 1e-6,
        margin,
        derived,
        closed_form,
        gap: (closed_form - coefficient).abs(),
    })
}
