//! The generalized Gaussian density
//! g(x) = (1/Z) [1 − (q/α)|x|^α]_+^{1/q − n/α − 1}, with the q = 0 member
//! (1/Z) e^{−|x|^α/α}, its normalizing constant, and radial mass functions.
//!
//! `Z` is the normalizing integral itself, so ∫ g = 1 holds by construction.

use crate::error::{domain, Result};
use crate::quadrature::{adaptive_1d, EmbeddedPair};
use crate::special::{
    inc_beta_pre, inc_beta_split, log_beta, log_gamma, lower_gamma_pre,
    regularized_incomplete_beta, regularized_lower_gamma,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Problem parameters (n, α, q, p) with derived admissibility flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    n: usize,
    alpha: f64,
    q: f64,
    p: f64,
    #[serde(skip)]
    z: f64,
    #[serde(skip)]
    q_subcritical: bool,
    #[serde(skip)]
    p_negative_admissible: bool,
}

#[derive(Deserialize)]
struct RawParams {
    n: usize,
    alpha: f64,
    q: f64,
    p: f64,
}

impl<'de> Deserialize<'de> for Params {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RawParams::deserialize(d)?;
        Params::new(r.n, r.alpha, r.q, r.p).map_err(serde::de::Error::custom)
    }
}

impl Params {
    pub fn new(n: usize, alpha: f64, q: f64, p: f64) -> Result<Self> {
        if n < 2 {
            return domain(format!("dimension n must be at least 2, got {n}"));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return domain(format!("alpha must be positive, got {alpha}"));
        }
        let nf = n as f64;
        if !(q.is_finite() && q < alpha / nf) {
            return domain(format!("q must satisfy q < alpha/n = {}, got {q}", alpha / nf));
        }
        if !p.is_finite() {
            return domain(format!("p must be finite, got {p}"));
        }
        let q_subcritical = q < alpha / (nf + alpha);
        let p_negative_admissible = if q < 0.0 {
            alpha / q - alpha < p && p < 0.0
        } else {
            q_subcritical && p < 0.0
        };
        let mut params = Self {
            n,
            alpha,
            q,
            p,
            z: f64::NAN,
            q_subcritical,
            p_negative_admissible,
        };
        params.z = normalizer_closed_form(&params)?;
        Ok(params)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> f64 {
        self.n as f64
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    /// q < α/(n+α).
    pub fn q_subcritical(&self) -> bool {
        self.q_subcritical
    }
    /// Parameter range in which the even normalized problem with p < 0 is solvable.
    pub fn p_negative_admissible(&self) -> bool {
        self.p_negative_admissible
    }

    /// Same density, different L_p exponent.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.n, self.alpha, self.q, p)
    }

    /// Bracket exponent 1/q − n/α − 1 (undefined for q = 0).
    pub fn exponent(&self) -> f64 {
        1.0 / self.q - self.dim() / self.alpha - 1.0
    }

    /// Coefficient 1 − qn/α − q appearing in the divergence identity; 1 when q = 0.
    pub fn divergence_coefficient(&self) -> f64 {
        1.0 - self.q * self.dim() / self.alpha - self.q
    }
}

/// Surface area of the unit sphere in R^n.
pub fn sphere_area(n: usize) -> f64 {
    let nf = n as f64;
    let half = 0.5 * nf;
    nf * PI.powf(half) * (-log_gamma_unchecked(half + 1.0)).exp()
}

fn log_gamma_unchecked(x: f64) -> f64 {
    log_gamma(x).expect("positive argument")
}

fn normalizer_closed_form(params: &Params) -> Result<f64> {
    let n = params.dim();
    let a = params.alpha;
    let q = params.q;
    let na = n / a;
    let ln_sigma = sphere_area(params.n).ln();
    let ln_z = if q == 0.0 {
        ln_sigma + (na - 1.0) * a.ln() + log_gamma(na)?
    } else if q > 0.0 {
        ln_sigma - a.ln() + na * (a / q).ln() + log_beta(na, 1.0 / q - na)?
    } else {
        ln_sigma - a.ln() + na * (a / -q).ln() + log_beta(na, 1.0 - 1.0 / q)?
    };
    Ok(ln_z.exp())
}

/// Normalizing constant Z: the integral of the unnormalized bracket over R^n.
pub fn normalizer(params: &Params) -> f64 {
    params.z
}

/// The closed form usually displayed for the partition constant. It is exactly
/// the reciprocal of [`normalizer`], i.e. the normalizing factor that multiplies
/// the bracket rather than divides it.
pub fn reciprocal_normalizer(params: &Params) -> f64 {
    let n = params.dim();
    let a = params.alpha;
    let q = params.q;
    let na = n / a;
    let lg_half = log_gamma_unchecked(0.5 * n + 1.0);
    let ln_pi = 0.5 * n * PI.ln();
    let ln_v = if q == 0.0 {
        lg_half - ln_pi - na * a.ln() - log_gamma_unchecked(na + 1.0)
    } else if q > 0.0 {
        let b = 1.0 / q - na;
        lg_half - ln_pi + na * (q / a).ln() + log_gamma_unchecked(1.0 / q)
            - log_gamma_unchecked(na + 1.0)
            - log_gamma_unchecked(b)
    } else {
        lg_half - ln_pi + na * (-q / a).ln() + log_gamma_unchecked(1.0 - 1.0 / q + na)
            - log_gamma_unchecked(na + 1.0)
            - log_gamma_unchecked(1.0 - 1.0 / q)
    };
    ln_v.exp()
}

/// Unnormalized radial profile: the bracket as a function of r = |x|.
pub fn bracket_density(params: &Params, r: f64) -> f64 {
    let a = params.alpha;
    let ra = r.powf(a);
    if params.q == 0.0 {
        return (-ra / a).exp();
    }
    let base = 1.0 - params.q / a * ra;
    if base <= 0.0 {
        return 0.0;
    }
    (params.exponent() * base.ln()).exp()
}

/// The density at any point of norm `r`.
pub fn density_at(params: &Params, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return domain(format!("radius must be nonnegative, got {r}"));
    }
    Ok(bracket_density(params, r) / params.z)
}

/// (α/q)^{1/α} for q > 0, the radius where the density vanishes.
pub fn support_cutoff(params: &Params) -> Option<f64> {
    if params.q > 0.0 {
        Some((params.alpha / params.q).powf(1.0 / params.alpha))
    } else {
        None
    }
}

/// Mass of the centered ball of radius `rho`.
pub fn ball_mass(params: &Params, rho: f64) -> Result<f64> {
    if rho.is_nan() || rho < 0.0 {
        return domain(format!("radius must be nonnegative, got {rho}"));
    }
    Ok(ball_mass_unchecked(params, rho))
}

pub(crate) fn ball_mass_unchecked(params: &Params, rho: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    if rho.is_infinite() || support_cutoff(params).is_some_and(|c| rho >= c) {
        return 1.0;
    }
    let a = params.alpha;
    let q = params.q;
    let na = params.dim() / a;
    let ra = rho.powf(a);
    let v = if q == 0.0 {
        regularized_lower_gamma(na, ra / a)
    } else if q > 0.0 {
        let u = (q / a * ra).min(1.0);
        regularized_incomplete_beta(u, na, 1.0 / q - na)
    } else {
        let s = -q / a * ra;
        Ok(inc_beta_split(s / (1.0 + s), 1.0 / (1.0 + s), na, 1.0 - 1.0 / q))
    };
    v.expect("parameters validated at construction")
}

/// Inverse of [`ball_mass`]: the radius of the centered ball of mass `c`.
pub fn ball_radius_for_mass(params: &Params, c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return domain(format!("ball mass must lie in (0, 1), got {c}"));
    }
    let mut lo = 0.0;
    let mut hi = support_cutoff(params).unwrap_or(1.0);
    if params.q <= 0.0 {
        while ball_mass_unchecked(params, hi) < c {
            lo = hi;
            hi *= 2.0;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ball_mass_unchecked(params, mid) < c {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// (1/Z)∫_0^ρ w(r) r^{n−1} dr for the divergence-identity weight
/// w(r) = (1 − qn/α − q)·(1 − (q/α)r^α)^{e−1}·r^α, e the bracket exponent
/// (for q = 0, w(r) = e^{−r^α/α} r^α).
pub fn divergence_radial_integral(params: &Params, rho: f64) -> Result<f64> {
    if rho.is_nan() || rho < 0.0 {
        return domain(format!("radius must be nonnegative, got {rho}"));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    let n = params.dim();
    let a = params.alpha;
    let q = params.q;
    let na = n / a;
    let z = params.z;
    let ra = rho.powf(a);
    if q == 0.0 {
        let ln_front = na * a.ln() + log_gamma(na + 1.0)?;
        return Ok(ln_front.exp() * regularized_lower_gamma(na + 1.0, ra / a)? / z);
    }
    let k = params.divergence_coefficient();
    let e = params.exponent();
    if q < 0.0 {
        let s = -q / a * ra;
        let bb = 1.0 - 1.0 / q;
        let ln_front = -a.ln() + (na + 1.0) * (a / -q).ln() + log_beta(na + 1.0, bb)?;
        let (t, tc) = if s.is_infinite() { (1.0, 0.0) } else { (s / (1.0 + s), 1.0 / (1.0 + s)) };
        return Ok(k * ln_front.exp() * inc_beta_split(t, tc, na + 1.0, bb) / z);
    }
    let u = q / a * ra;
    if e > 0.0 {
        let ln_front = -a.ln() + (na + 1.0) * (a / q).ln() + log_beta(na + 1.0, e)?;
        return Ok(k * ln_front.exp() * regularized_incomplete_beta(u.min(1.0), na + 1.0, e)? / z);
    }
    if u >= 1.0 {
        return domain("divergence weight is not integrable up to the support cutoff");
    }
    let pair = EmbeddedPair::segment(16);
    let f = |r: f64| {
        let base = 1.0 - q / a * r.powf(a);
        ((e - 1.0) * base.ln()).exp() * r.powf(a + n - 1.0)
    };
    Ok(k * adaptive_1d(&pair, &f, 0.0, rho, 1e-15, 1e-13, 40) / z)
}

/// Radial functions of one parameter set with their Gamma/Beta constants precomputed.
#[derive(Debug, Clone)]
pub(crate) struct RadialKernel {
    alpha: f64,
    q: f64,
    n: i32,
    shape_a: f64,
    shape_b: f64,
    ln_norm: f64,
    exponent: f64,
    inv_z: f64,
    inv_sigma: f64,
}

impl RadialKernel {
    pub fn new(params: &Params) -> Self {
        let a = params.alpha;
        let q = params.q;
        let na = params.dim() / a;
        let (shape_b, ln_norm) = if q == 0.0 {
            (0.0, log_gamma_unchecked(na))
        } else if q > 0.0 {
            let b = 1.0 / q - na;
            (b, log_beta(na, b).expect("validated"))
        } else {
            let b = 1.0 - 1.0 / q;
            (b, log_beta(na, b).expect("validated"))
        };
        Self {
            alpha: a,
            q,
            n: params.n as i32,
            shape_a: na,
            shape_b,
            ln_norm,
            exponent: if q == 0.0 { 0.0 } else { params.exponent() },
            inv_z: 1.0 / params.z,
            inv_sigma: 1.0 / sphere_area(params.n),
        }
    }

    /// Mass of the centered ball of radius r.
    pub fn mass(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let ra = if self.alpha == 2.0 { r * r } else { r.powf(self.alpha) };
        if self.q == 0.0 {
            lower_gamma_pre(self.shape_a, ra / self.alpha, self.ln_norm)
        } else if self.q > 0.0 {
            let u = self.q / self.alpha * ra;
            if u >= 1.0 {
                return 1.0;
            }
            inc_beta_pre(u, 1.0 - u, self.shape_a, self.shape_b, self.ln_norm)
        } else {
            let s = -self.q / self.alpha * ra;
            let inv = 1.0 / (1.0 + s);
            inc_beta_pre(s * inv, inv, self.shape_a, self.shape_b, self.ln_norm)
        }
    }

    /// Mass of the cone over a unit solid angle up to radius r, divided by r^n:
    /// the facet integrand of the volume.
    pub fn cone_integrand(&self, r: f64) -> f64 {
        self.mass(r) * self.inv_sigma / r.powi(self.n)
    }

    /// Normalized density at radius r.
    pub fn density(&self, r: f64) -> f64 {
        let ra = if self.alpha == 2.0 { r * r } else { r.powf(self.alpha) };
        if self.q == 0.0 {
            return (-ra / self.alpha).exp() * self.inv_z;
        }
        let base = 1.0 - self.q / self.alpha * ra;
        if base <= 0.0 {
            return 0.0;
        }
        (self.exponent * base.ln()).exp() * self.inv_z
    }
}

/// Log-profile class of the density, which governs which inequalities hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogProfile {
    LogConcave,
    LogConvex,
    PoincareRange,
    Unclassified,
}

pub fn classify_log_profile(params: &Params) -> LogProfile {
    let a = params.alpha;
    let q = params.q;
    let n = params.dim();
    let crit = a / (n + a);
    if (0.0..crit).contains(&q) && a >= 1.0 {
        LogProfile::LogConcave
    } else if (q <= 0.0 && a <= 1.0) || (q >= crit && q < a / n && a >= 1.0) {
        LogProfile::LogConvex
    } else if q > 0.0 && q < crit {
        LogProfile::PoincareRange
    } else {
        LogProfile::Unclassified
    }
}

/// ω(t) = −ln of the unnormalized bracket at radius t.
pub fn omega(params: &Params, t: f64) -> f64 {
    let a = params.alpha;
    let ta = t.powf(a);
    if params.q == 0.0 {
        ta / a
    } else {
        let base = 1.0 - params.q / a * ta;
        if base <= 0.0 {
            f64::INFINITY
        } else {
            -params.exponent() * base.ln()
        }
    }
}
