//! Generalized Gaussian volume and weighted surface measures of polytopes.
//!
//! Both reduce to integrals of radial functions over facets. The volume of the
//! cone over facet F with support h is h·∫_F m(|x|)/|x|^n dA, where m(r) is the
//! ball mass divided by the sphere area, so G(K) is exact up to facet quadrature.

use crate::density::{divergence_radial_integral, support_cutoff, Params, RadialKernel};
use crate::error::{domain, Error, Result};
use crate::geometry::{from_point, wulff_shape_raw, Facet, Point, Polytope};
use crate::quadrature::{
    adaptive_1d, adaptive_triangle, EmbeddedPair, GaussLegendre, QuadratureOptions, TriangleRule,
};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::OnceLock;

/// Facet quadrature rules built once per accuracy setting.
#[derive(Debug, Clone)]
pub struct FacetQuadrature {
    segment: EmbeddedPair<GaussLegendre>,
    triangle: EmbeddedPair<TriangleRule>,
    opts: QuadratureOptions,
}

impl FacetQuadrature {
    pub fn new(opts: QuadratureOptions) -> Self {
        Self {
            segment: EmbeddedPair::segment(opts.segment_order),
            triangle: EmbeddedPair::triangle(opts.triangle_order),
            opts,
        }
    }

    pub fn options(&self) -> &QuadratureOptions {
        &self.opts
    }

    /// ∫_F φ(|x|) dA over one facet, split at the sphere |x| = `kink` in 2D.
    pub fn facet_integral<F: Fn(f64) -> f64>(
        &self,
        k: &Polytope,
        facet: &Facet,
        phi: &F,
        kink: Option<f64>,
    ) -> f64 {
        let v = k.vertices();
        let o = &self.opts;
        if k.dim() == 2 {
            let a = v[facet.ring[0]];
            let d = v[facet.ring[1]] - a;
            let len = d.norm();
            let mut cuts = vec![0.0];
            if let Some(r) = kink {
                let aa = d.dot(&d);
                let bb = 2.0 * a.dot(&d);
                let cc = a.dot(&a) - r * r;
                let disc = bb * bb - 4.0 * aa * cc;
                if disc > 0.0 {
                    let sq = disc.sqrt();
                    for s in [(-bb - sq) / (2.0 * aa), (-bb + sq) / (2.0 * aa)] {
                        if s > 1e-12 && s < 1.0 - 1e-12 {
                            cuts.push(s);
                        }
                    }
                }
            }
            cuts.push(1.0);
            let g = |s: f64| phi((a + d * s).norm());
            cuts.windows(2)
                .map(|w| {
                    adaptive_1d(&self.segment, &g, w[0], w[1], o.abs_tol, o.rel_tol, o.max_depth_1d)
                })
                .sum::<f64>()
                * len
        } else {
            let g = |x: &Point| phi(x.norm());
            let r = &facet.ring;
            let a = v[r[0]];
            (1..r.len() - 1)
                .map(|j| {
                    adaptive_triangle(
                        &self.triangle,
                        &g,
                        &a,
                        &v[r[j]],
                        &v[r[j + 1]],
                        o.abs_tol,
                        o.rel_tol,
                        o.max_depth_2d,
                    )
                })
                .sum()
        }
    }

    /// Per-facet integrals of φ(|x|), evaluated in parallel and returned in facet order.
    pub fn per_facet<F: Fn(f64) -> f64 + Sync>(
        &self,
        k: &Polytope,
        phi: &F,
        kink: Option<f64>,
    ) -> Vec<f64> {
        k.facets()
            .par_iter()
            .map(|f| self.facet_integral(k, f, phi, kink))
            .collect()
    }
}

impl Default for FacetQuadrature {
    fn default() -> Self {
        Self::new(QuadratureOptions::default())
    }
}

fn default_quadrature() -> &'static FacetQuadrature {
    static Q: OnceLock<FacetQuadrature> = OnceLock::new();
    Q.get_or_init(FacetQuadrature::default)
}

fn check_body(k: &Polytope) -> Result<()> {
    if let Some(f) = k.facets().iter().find(|f| !(f.support > 0.0)) {
        return domain(format!("facet support must be positive, got {}", f.support));
    }
    Ok(())
}

/// G(K), the mass the density assigns to K.
pub fn gauss_volume(params: &Params, k: &Polytope) -> Result<f64> {
    gauss_volume_with(params, k, default_quadrature())
}

pub fn gauss_volume_with(params: &Params, k: &Polytope, quad: &FacetQuadrature) -> Result<f64> {
    check_body(k)?;
    check_dim(params, k)?;
    let kernel = RadialKernel::new(params);
    let cut = support_cutoff(params);
    let per = quad.per_facet(k, &|r| kernel.cone_integrand(r), cut);
    Ok(k.facets().iter().zip(&per).map(|(f, v)| f.support * v).sum())
}

fn check_dim(params: &Params, k: &Polytope) -> Result<()> {
    if params.n() != k.dim() {
        return Err(Error::Shape(format!(
            "body dimension {} differs from parameter dimension {}",
            k.dim(),
            params.n()
        )));
    }
    Ok(())
}

/// ∫_{F_i} g dA for every facet: the atoms of the unweighted (p = 1) measure.
pub fn facet_densities(params: &Params, k: &Polytope) -> Result<Vec<f64>> {
    facet_densities_with(params, k, default_quadrature())
}

pub fn facet_densities_with(params: &Params, k: &Polytope, quad: &FacetQuadrature) -> Result<Vec<f64>> {
    check_body(k)?;
    check_dim(params, k)?;
    let kernel = RadialKernel::new(params);
    let cut = support_cutoff(params);
    Ok(quad.per_facet(k, &|r| kernel.density(r), cut))
}

/// G(K) together with the p = 1 facet atoms.
pub fn volume_and_densities(params: &Params, k: &Polytope) -> Result<(f64, Vec<f64>)> {
    Ok((gauss_volume(params, k)?, facet_densities(params, k)?))
}

/// One atom of a discrete measure on the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub normal: Point,
    pub weight: f64,
    /// Index of the generating direction of the facet.
    pub source: usize,
}

/// The weighted surface measure h^{1−p} g dH^{n−1} pushed to facet normals.
#[derive(Debug, Clone)]
pub struct SurfaceMeasureAtoms {
    pub dim: usize,
    pub atoms: Vec<Atom>,
    pub p: f64,
    pub params: Params,
}

#[derive(Serialize)]
struct AtomJson {
    normal: Vec<f64>,
    weight: f64,
}

#[derive(Serialize)]
struct AtomsJson<'a> {
    params: &'a Params,
    p: f64,
    total: f64,
    atoms: Vec<AtomJson>,
}

impl SurfaceMeasureAtoms {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(AtomsJson {
            params: &self.params,
            p: self.p,
            total: total_measure(self),
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomJson {
                    normal: from_point(self.dim, &a.normal),
                    weight: a.weight,
                })
                .collect(),
        })
        .expect("atoms serialize")
    }

    /// CSV rows: normal components then weight.
    pub fn to_csv(&self) -> String {
        let axes = ["n_x", "n_y", "n_z"];
        let mut s = axes[..self.dim].join(",");
        s.push_str(",weight\n");
        for a in &self.atoms {
            for c in from_point(self.dim, &a.normal) {
                s.push_str(&format!("{c:.17e},"));
            }
            s.push_str(&format!("{:.17e}\n", a.weight));
        }
        s
    }

    /// Σ φ(ν_i) w_i.
    pub fn pairing<F: Fn(&Point) -> f64>(&self, phi: F) -> f64 {
        self.atoms.iter().map(|a| phi(&a.normal) * a.weight).sum()
    }
}

/// Atoms h_i^{1−p}·∫_{F_i} g dA, one per facet.
pub fn weighted_surface_measure(params: &Params, k: &Polytope, p: f64) -> Result<SurfaceMeasureAtoms> {
    if !p.is_finite() {
        return domain("p must be finite");
    }
    let dens = facet_densities(params, k)?;
    Ok(atoms_from_densities(params, k, &dens, p))
}

pub(crate) fn atoms_from_densities(params: &Params, k: &Polytope, dens: &[f64], p: f64) -> SurfaceMeasureAtoms {
    let atoms = k
        .facets()
        .iter()
        .zip(dens)
        .map(|(f, d)| Atom {
            normal: f.normal,
            weight: f.support.powf(1.0 - p) * d,
            source: f.source,
        })
        .collect();
    SurfaceMeasureAtoms {
        dim: k.dim(),
        atoms,
        p,
        params: *params,
    }
}

pub fn total_measure(atoms: &SurfaceMeasureAtoms) -> f64 {
    atoms.atoms.iter().map(|a| a.weight).sum()
}

/// (1/n)·Σ_i h_i·∫_{F_i} g dA.
pub fn gtilde(params: &Params, k: &Polytope) -> Result<f64> {
    let dens = facet_densities(params, k)?;
    Ok(k.facets().iter().zip(&dens).map(|(f, d)| f.support * d).sum::<f64>() / k.dim() as f64)
}

/// (1 − qn/α − q)/Z ∫_K (1 − (q/α)|x|^α)^{e−1}|x|^α dx, by facet cones and the closed-form radial integral.
pub fn divergence_body_integral(params: &Params, k: &Polytope) -> Result<f64> {
    check_body(k)?;
    check_dim(params, k)?;
    if let Some(r) = support_cutoff(params) {
        if params.exponent() <= 0.0 && k.scale() >= r {
            return domain("body reaches the support cutoff where the divergence weight is not integrable");
        }
    }
    let n = k.dim() as i32;
    let phi = |r: f64| divergence_radial_integral(params, r).unwrap_or(f64::NAN) / r.powi(n);
    let per = default_quadrature().per_facet(k, &phi, support_cutoff(params));
    let v: f64 = k.facets().iter().zip(&per).map(|(f, x)| f.support * x).sum();
    if v.is_finite() {
        Ok(v)
    } else {
        domain("divergence weight could not be integrated on this body")
    }
}

/// n·G̃(K) − [n·G(K) − body integral]; zero up to quadrature error.
pub fn divergence_defect(params: &Params, k: &Polytope) -> Result<f64> {
    let n = k.dim() as f64;
    let g = gauss_volume(params, k)?;
    let gt = gtilde(params, k)?;
    let body = divergence_body_integral(params, k)?;
    Ok(n * gt - (n * g - body))
}

/// One step of the finite-difference sweep.
#[derive(Debug, Clone, Serialize)]
pub struct FdEntry {
    pub t: f64,
    pub finite_difference: f64,
    pub relative_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FdReport {
    pub predicted: f64,
    pub entries: Vec<FdEntry>,
    /// Log-slope of the deviation between the first and last step.
    pub order: f64,
}

/// Compares [G([(h^p + t f^p)^{1/p}]) − G(K)]/t with (1/p)·Σ f_i^p S_p-atom_i.
pub fn variational_fd_check(
    params: &Params,
    k: &Polytope,
    f: &[f64],
    p: f64,
    ts: &[f64],
) -> Result<FdReport> {
    if f.len() != k.facets().len() {
        return Err(Error::Shape("perturbation needs one value per facet".into()));
    }
    if p == 0.0 || !p.is_finite() {
        return domain("p must be finite and nonzero");
    }
    if let Some(v) = f.iter().find(|v| !(**v > 0.0)) {
        return domain(format!("perturbation values must be positive, got {v}"));
    }
    let (g0, dens) = volume_and_densities(params, k)?;
    let atoms = atoms_from_densities(params, k, &dens, p);
    let predicted = atoms
        .atoms
        .iter()
        .zip(f)
        .map(|(a, fi)| fi.powf(p) * a.weight)
        .sum::<f64>()
        / p;
    let normals: Vec<Point> = k.facets().iter().map(|x| x.normal).collect();
    let h = k.supports();
    let mut entries = Vec::with_capacity(ts.len());
    for &t in ts {
        let ht = h
            .iter()
            .zip(f)
            .map(|(hi, fi)| {
                let base = hi.powf(p) + t * fi.powf(p);
                if base > 0.0 {
                    Ok(base.powf(1.0 / p))
                } else {
                    Err(Error::StepTooLarge(format!("h^p + t f^p ≤ 0 at t = {t}")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let kt = wulff_shape_raw(k.dim(), &normals, &ht)?;
        let fd = (gauss_volume(params, &kt)? - g0) / t;
        entries.push(FdEntry {
            t,
            finite_difference: fd,
            relative_deviation: ((fd - predicted) / predicted).abs(),
        });
    }
    let order = match (entries.first(), entries.last()) {
        (Some(a), Some(b)) if entries.len() >= 2 => {
            (a.relative_deviation / b.relative_deviation).ln() / (a.t.abs() / b.t.abs()).ln()
        }
        _ => f64::NAN,
    };
    Ok(FdReport {
        predicted,
        entries,
        order,
    })
}
