use super::grid::{from_point, to_point, Point, SphereGrid};
use super::hull2::convex_hull_2d;
use super::hull3::convex_hull_3d;
use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Relative area below which a facet is treated as an inactive constraint.
const DEGENERATE_AREA: f64 = 1e-12;

/// One facet: outward unit normal, support number, vertex ring (a segment in
/// 2D), (n−1)-dimensional area, and the index of the generating direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Point,
    pub support: f64,
    pub ring: Vec<usize>,
    pub area: f64,
    pub source: usize,
}

/// A convex polytope containing the origin in its interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeJson", into = "PolytopeJson")]
pub struct Polytope {
    dim: usize,
    facets: Vec<Facet>,
    vertices: Vec<Point>,
    scale: f64,
}

impl Polytope {
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }
    /// Largest vertex norm.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Intersection of the halfspaces {x·v_i ≤ h_i}.
    pub fn from_halfspaces(dim: usize, normals: &[Point], supports: &[f64]) -> Result<Self> {
        wulff_shape_raw(dim, normals, supports)
    }

    /// Convex hull of points whose hull contains the origin in its interior.
    pub fn from_vertices(dim: usize, pts: &[Point]) -> Result<Self> {
        let mut dirs = Vec::with_capacity(pts.len());
        let mut vals = Vec::with_capacity(pts.len());
        for v in pts {
            let r = v.norm();
            if r > 0.0 {
                dirs.push(v / r);
                vals.push(1.0 / r);
            }
        }
        polar_body(&wulff_shape_raw(dim, &dirs, &vals)?)
    }

    /// Facet normals of (1−λ)K + λL for every λ ∈ (0, 1): the facet normals of
    /// both bodies and, in 3D, the normals e × f of edge pairs whose edges are
    /// exposed by that normal in their own body.
    pub fn minkowski_normals(&self, other: &Self) -> Result<Vec<Point>> {
        if self.dim != other.dim {
            return Err(Error::Shape("bodies have different dimensions".into()));
        }
        let mut out: Vec<Point> = self.facets.iter().chain(&other.facets).map(|f| f.normal).collect();
        if self.dim == 3 {
            let ek = self.edges();
            let el = other.edges();
            let tk = 1e-10 * self.scale;
            let tl = 1e-10 * other.scale;
            let exposes = |k: &Self, (a, b): (usize, usize), u: &Point, t: f64| {
                let h = support_function(k, u);
                h - u.dot(&k.vertices[a]) <= t && h - u.dot(&k.vertices[b]) <= t
            };
            for &(a, b) in &ek {
                let e = self.vertices[b] - self.vertices[a];
                for &(c, d) in &el {
                    let f = other.vertices[d] - other.vertices[c];
                    let x = e.cross(&f);
                    let nx = x.norm();
                    if nx <= 1e-9 * e.norm() * f.norm() {
                        continue;
                    }
                    for u in [x / nx, -x / nx] {
                        if exposes(self, (a, b), &u, tk) && exposes(other, (c, d), &u, tl) {
                            out.push(u);
                        }
                    }
                }
            }
        }
        let mut uniq: Vec<Point> = Vec::with_capacity(out.len());
        for u in out {
            if uniq.iter().all(|w| (w - u).norm() > 1e-12) {
                uniq.push(u);
            }
        }
        Ok(uniq)
    }

    /// Undirected edges (a, b), a < b, from the facet rings.
    fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .facets
            .iter()
            .flat_map(|f| {
                let r = &f.ring;
                (0..r.len()).map(move |i| {
                    let (a, b) = (r[i], r[(i + 1) % r.len()]);
                    (a.min(b), a.max(b))
                })
            })
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Minkowski combination (1−λ)K + λL, exact: the Wulff shape of the combined
    /// support function on all of its facet normals.
    pub fn minkowski_combination(&self, other: &Self, lambda: f64) -> Result<Self> {
        let normals = self.minkowski_normals(other)?;
        self.minkowski_combination_on(other, lambda, &normals)
    }

    /// As `minkowski_combination`, with normals from `minkowski_normals`.
    pub fn minkowski_combination_on(&self, other: &Self, lambda: f64, normals: &[Point]) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return domain(format!("lambda must lie in [0, 1], got {lambda}"));
        }
        let vals: Vec<f64> = normals
            .iter()
            .map(|u| (1.0 - lambda) * support_function(self, u) + lambda * support_function(other, u))
            .collect();
        wulff_shape_raw(self.dim, normals, &vals)
    }

    /// Circumscribed polytope of the centered ball with `size` quasi-uniform facet normals.
    pub fn ball(dim: usize, radius: f64, size: usize) -> Result<Self> {
        let grid = SphereGrid::uniform(dim, size)?;
        wulff_shape_raw(dim, grid.dirs(), &vec![radius; grid.len()])
    }

    /// The cube [−s, s]^dim.
    pub fn cube(dim: usize, half: f64) -> Result<Self> {
        let grid = SphereGrid::axes(dim)?;
        wulff_shape_raw(dim, grid.dirs(), &vec![half; grid.len()])
    }

    /// Facet normals as a direction grid (facet order).
    pub fn normal_grid(&self) -> SphereGrid {
        SphereGrid::new(self.dim, self.facets.iter().map(|f| f.normal).collect())
            .expect("facet normals are unit vectors")
    }

    pub fn supports(&self) -> Vec<f64> {
        self.facets.iter().map(|f| f.support).collect()
    }

    /// Homothetic copy s·K.
    pub fn scaled(&self, s: f64) -> Self {
        let areas = s.powi(self.dim as i32 - 1);
        Self {
            dim: self.dim,
            facets: self
                .facets
                .iter()
                .map(|f| Facet {
                    normal: f.normal,
                    support: f.support * s,
                    ring: f.ring.clone(),
                    area: f.area * areas,
                    source: f.source,
                })
                .collect(),
            vertices: self.vertices.iter().map(|v| v * s).collect(),
            scale: self.scale * s,
        }
    }

    /// Lebesgue volume (area in 2D) as the sum of facet cones.
    pub fn volume(&self) -> f64 {
        self.facets.iter().map(|f| f.support * f.area).sum::<f64>() / self.dim as f64
    }

    /// Sampled support function on a grid.
    pub fn support_vector(&self, grid: Arc<SphereGrid>) -> Result<SupportVector> {
        if grid.dim() != self.dim {
            return Err(Error::Shape("grid and body dimensions differ".into()));
        }
        let values = grid.dirs().iter().map(|u| support_function(self, u)).collect();
        SupportVector::new(grid, values)
    }

    /// Every vertex satisfies every facet inequality and lies on the planes of its incident facets.
    pub fn check_consistency(&self, tol: f64) -> bool {
        let t = tol * self.scale.max(1.0);
        self.facets.iter().all(|f| {
            f.ring
                .iter()
                .all(|&v| (f.normal.dot(&self.vertices[v]) - f.support).abs() <= t)
                && self
                    .vertices
                    .iter()
                    .all(|v| f.normal.dot(v) <= f.support + t)
        })
    }
}

/// Support numbers on a fixed direction grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportVector {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl SupportVector {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} directions",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return domain(format!("support numbers must be positive and finite, got {v}"));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Whether h(v) = h(−v) on an antipodally closed grid, to relative tolerance `tol`.
    pub fn is_even(&self, tol: f64) -> bool {
        match self.grid.antipodes() {
            Some(anti) => anti.iter().enumerate().all(|(i, &j)| {
                (self.values[i] - self.values[j]).abs() <= tol * self.values[i].max(self.values[j])
            }),
            None => false,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn to_polytope(&self) -> Result<Polytope> {
        wulff_shape(self)
    }
}

/// Wulff shape of support numbers on a grid.
pub fn wulff_shape(z: &SupportVector) -> Result<Polytope> {
    wulff_shape_raw(z.dim(), z.grid.dirs(), &z.values)
}

/// Wulff shape ∩_i {x·v_i ≤ z_i} for unit `dirs` and positive `values`.
pub fn wulff_shape_raw(dim: usize, dirs: &[Point], values: &[f64]) -> Result<Polytope> {
    if dirs.len() != values.len() {
        return Err(Error::Shape("directions and values differ in length".into()));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return domain(format!("support numbers must be positive and finite, got {v}"));
    }
    let ys: Vec<Point> = dirs.iter().zip(values).map(|(v, z)| v / *z).collect();
    match dim {
        2 => wulff_2d(&ys, dirs, values),
        3 => wulff_3d(&ys, dirs, values),
        _ => domain(format!("unsupported dimension {dim}")),
    }
}

fn unbounded() -> Error {
    Error::UnboundedBody("directions lie in a closed hemisphere".into())
}

fn wulff_2d(ys: &[Point], dirs: &[Point], values: &[f64]) -> Result<Polytope> {
    let ymax = ys.iter().map(|y| y.norm()).fold(0.0, f64::max);
    let hull = convex_hull_2d(ys, 1e-13 * ymax);
    if hull.len() < 3 {
        return Err(unbounded());
    }
    let m = hull.len();
    for k in 0..m {
        let a = &ys[hull[k]];
        let b = &ys[hull[(k + 1) % m]];
        let det = a.x * b.y - a.y * b.x;
        if det / (b - a).norm() <= 1e-12 * ymax {
            return Err(unbounded());
        }
    }
    let corner = |a: &Point, b: &Point| {
        let det = a.x * b.y - a.y * b.x;
        Point::new((b.y - a.y) / det, (a.x - b.x) / det, 0.0)
    };
    let mut kept: Vec<usize> = hull.clone();
    loop {
        let m = kept.len();
        if m < 3 {
            return Err(unbounded());
        }
        let verts: Vec<Point> = (0..m)
            .map(|j| corner(&ys[kept[j]], &ys[kept[(j + 1) % m]]))
            .collect();
        let wscale = verts.iter().map(|w| w.norm()).fold(0.0, f64::max);
        // facet kept[j] runs from verts[j-1] to verts[j]
        let lengths: Vec<f64> = (0..m).map(|j| (verts[j] - verts[(j + m - 1) % m]).norm()).collect();
        let tiny: Vec<usize> = (0..m)
            .filter(|&j| lengths[j] < DEGENERATE_AREA * wscale)
            .collect();
        if tiny.is_empty() {
            let facets = (0..m)
                .map(|j| {
                    let i = kept[j];
                    Facet {
                        normal: dirs[i],
                        support: values[i],
                        ring: vec![(j + m - 1) % m, j],
                        area: lengths[j],
                        source: i,
                    }
                })
                .collect();
            return Ok(Polytope {
                dim: 2,
                facets,
                vertices: verts,
                scale: wscale,
            });
        }
        kept = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| !tiny.contains(j))
            .map(|(_, &i)| i)
            .collect();
    }
}

fn wulff_3d(ys: &[Point], dirs: &[Point], values: &[f64]) -> Result<Polytope> {
    let ymax = ys.iter().map(|y| y.norm()).fold(0.0, f64::max);
    let hull = convex_hull_3d(ys, 1e-11 * ymax).map_err(|_| unbounded())?;
    let faces: Vec<(usize, &super::hull3::Face)> = hull.alive_faces().collect();
    for (_, f) in &faces {
        if !(f.offset > 1e-12 * ymax) {
            return Err(unbounded());
        }
    }
    let slot: std::collections::HashMap<usize, usize> =
        faces.iter().enumerate().map(|(k, (id, _))| (*id, k)).collect();
    let w: Vec<Point> = faces.iter().map(|(_, f)| f.normal / f.offset).collect();
    let wscale = w.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let merge_tol = 1e-9 * wscale;

    // union of adjacent hull triangles sharing a Wulff vertex
    let mut parent: Vec<usize> = (0..faces.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (k, (_, f)) in faces.iter().enumerate() {
        for e in 0..3 {
            let (a, b) = (f.v[e], f.v[(e + 1) % 3]);
            if let Some(h) = hull.neighbor(a, b) {
                let kh = slot[&h];
                if (w[k] - w[kh]).norm() <= merge_tol {
                    let (ra, rb) = (find(&mut parent, k), find(&mut parent, kh));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
    }
    let mut cluster_of = vec![0usize; faces.len()];
    let mut cluster_pts: Vec<(Point, usize)> = Vec::new();
    let mut root_to_cluster = std::collections::HashMap::new();
    for k in 0..faces.len() {
        let r = find(&mut parent, k);
        let c = *root_to_cluster.entry(r).or_insert_with(|| {
            cluster_pts.push((Point::zeros(), 0));
            cluster_pts.len() - 1
        });
        cluster_of[k] = c;
        cluster_pts[c].0 += w[k];
        cluster_pts[c].1 += 1;
    }
    let centers: Vec<Point> = cluster_pts.iter().map(|(s, c)| s / *c as f64).collect();

    // one ring of incident hull faces per hull vertex
    let mut first_face: std::collections::BTreeMap<usize, (usize, usize)> = Default::default();
    for (k, (_, f)) in faces.iter().enumerate() {
        for e in 0..3 {
            first_face.entry(f.v[e]).or_insert((k, e));
        }
    }
    let mut facets = Vec::new();
    let mut used = vec![usize::MAX; centers.len()];
    let mut vertices = Vec::new();
    for (&i, &(k0, e0)) in &first_face {
        let mut ring_clusters: Vec<usize> = Vec::new();
        let (mut k, mut e) = (k0, e0);
        let mut guard = 0;
        loop {
            ring_clusters.push(cluster_of[k]);
            let f = faces[k].1;
            let prev = f.v[(e + 2) % 3];
            let g = hull.neighbor(prev, i).expect("closed hull surface");
            k = slot[&g];
            e = faces[k].1.v.iter().position(|&x| x == i).expect("shared vertex");
            guard += 1;
            if k == k0 || guard > faces.len() {
                break;
            }
        }
        ring_clusters.dedup();
        while ring_clusters.len() > 1 && ring_clusters.first() == ring_clusters.last() {
            ring_clusters.pop();
        }
        if ring_clusters.len() < 3 {
            continue;
        }
        let nu = dirs[i];
        let mut twice_area = 0.0;
        let len = ring_clusters.len();
        for j in 0..len {
            let a = centers[ring_clusters[j]];
            let b = centers[ring_clusters[(j + 1) % len]];
            twice_area += a.cross(&b).dot(&nu);
        }
        if twice_area < 0.0 {
            ring_clusters.reverse();
            twice_area = -twice_area;
        }
        let area = 0.5 * twice_area;
        if area < DEGENERATE_AREA * wscale * wscale {
            continue;
        }
        let ring = ring_clusters
            .iter()
            .map(|&c| {
                if used[c] == usize::MAX {
                    used[c] = vertices.len();
                    vertices.push(centers[c]);
                }
                used[c]
            })
            .collect();
        facets.push(Facet {
            normal: nu,
            support: values[i],
            ring,
            area,
            source: i,
        });
    }
    if facets.len() < 4 {
        return Err(unbounded());
    }
    let scale = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(Polytope {
        dim: 3,
        facets,
        vertices,
        scale,
    })
}

/// Sampled support function of the Wulff shape; componentwise ≤ the input.
pub fn canonicalize(z: &SupportVector) -> Result<SupportVector> {
    let k = wulff_shape(z)?;
    let values = z
        .grid
        .dirs()
        .iter()
        .zip(&z.values)
        .map(|(u, &zi)| support_function(&k, u).min(zi))
        .collect();
    SupportVector::new(z.grid.clone(), values)
}

/// h_K(u) = max over vertices of u·x.
pub fn support_function(k: &Polytope, u: &Point) -> f64 {
    k.vertices
        .iter()
        .map(|v| u.dot(v))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// ρ_K(u) = min over facets with u·ν > 0 of h/(u·ν).
pub fn radial_function(k: &Polytope, u: &Point) -> f64 {
    radial_with_facet(k, u).0
}

/// Radial function, index of the facet hit, and the runner-up ratio.
fn radial_with_facet(k: &Polytope, u: &Point) -> (f64, usize, f64) {
    let mut best = (f64::INFINITY, usize::MAX, f64::INFINITY);
    for (i, f) in k.facets.iter().enumerate() {
        let c = u.dot(&f.normal);
        if c > 1e-15 {
            let r = f.support / c;
            if r < best.0 {
                best = (r, i, best.0);
            } else if r < best.2 {
                best.2 = r;
            }
        }
    }
    best
}

/// Polar body {x : x·y ≤ 1 for all y ∈ K}.
pub fn polar_body(k: &Polytope) -> Result<Polytope> {
    if k.facets.iter().any(|f| !(f.support > 0.0)) {
        return domain("origin is not interior to the body");
    }
    let mut dirs = Vec::with_capacity(k.vertices.len());
    let mut vals = Vec::with_capacity(k.vertices.len());
    for v in &k.vertices {
        let r = v.norm();
        if !(r > 0.0) {
            return domain("origin is a vertex of the body");
        }
        dirs.push(v / r);
        vals.push(1.0 / r);
    }
    wulff_shape_raw(k.dim, &dirs, &vals)
}

/// ((1−λ)h_K^p + λh_L^p)^{1/p} on the shared grid, canonicalized.
pub fn lp_combine(k: &SupportVector, l: &SupportVector, lambda: f64, p: f64) -> Result<SupportVector> {
    if !k.grid.same_as(&l.grid) {
        return Err(Error::Shape("bodies are sampled on different grids".into()));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return domain(format!("lambda must lie in [0, 1], got {lambda}"));
    }
    if p == 0.0 || !p.is_finite() {
        return domain("p must be finite and nonzero");
    }
    let values = k
        .values
        .iter()
        .zip(&l.values)
        .map(|(a, b)| {
            if p == 1.0 {
                (1.0 - lambda) * a + lambda * b
            } else {
                ((1.0 - lambda) * a.powf(p) + lambda * b.powf(p)).powf(1.0 / p)
            }
        })
        .collect();
    canonicalize(&SupportVector::new(k.grid.clone(), values)?)
}

/// max over `grid` of |h_K − h_L|.
pub fn hausdorff_distance(k: &Polytope, l: &Polytope, grid: &SphereGrid) -> f64 {
    grid.dirs()
        .iter()
        .map(|u| (support_function(k, u) - support_function(l, u)).abs())
        .fold(0.0, f64::max)
}

/// Support-function distance sampled on the union of both bodies' facet normals.
pub fn hausdorff_distance_on_normals(k: &Polytope, l: &Polytope) -> f64 {
    k.facets
        .iter()
        .chain(&l.facets)
        .map(|f| (support_function(k, &f.normal) - support_function(l, &f.normal)).abs())
        .fold(0.0, f64::max)
}

/// Finite-difference check of the radial derivative under L_p perturbations of support numbers.
#[derive(Debug, Clone, Serialize)]
pub struct RadialPerturbationReport {
    /// (t, max |(ρ_t − ρ)/t − predicted|) per step.
    pub deviations: Vec<(f64, f64)>,
    /// max over t and samples of |ρ_t − ρ|/|t|.
    pub lipschitz: f64,
    /// Log-slope of the deviation between the largest and smallest step.
    pub order: f64,
    pub samples_used: usize,
    pub samples_excluded: usize,
}

/// Compares (ρ_{[h_t]}(u) − ρ_K(u))/t with f^p/(p h^p)·ρ_K(u) at the facet hit by u,
/// where h_t = (h^p + t f^p)^{1/p} on the facet normals of `k`.
pub fn radial_perturbation_check(
    k: &Polytope,
    f: &[f64],
    p: f64,
    ts: &[f64],
    samples: &SphereGrid,
) -> Result<RadialPerturbationReport> {
    if f.len() != k.facets.len() {
        return Err(Error::Shape("perturbation must have one value per facet".into()));
    }
    if p == 0.0 {
        return domain("p must be nonzero");
    }
    let normals: Vec<Point> = k.facets.iter().map(|x| x.normal).collect();
    let h = k.supports();
    let mut deviations = Vec::new();
    let mut lipschitz: f64 = 0.0;
    let mut used = 0;
    let mut excluded = 0;
    let bodies = ts
        .iter()
        .map(|&t| {
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
            wulff_shape_raw(k.dim, &normals, &ht)
        })
        .collect::<Result<Vec<_>>>()?;
    let tmax = ts.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    // Facet ratios h_i/(u·ν_i) move at relative rates f_i^p/(p h_i^p); the hit facet
    // cannot change while the gap to the runner-up exceeds the spread of those rates.
    let rates: Vec<f64> = f.iter().zip(&h).map(|(fi, hi)| fi.powf(p) / (p * hi.powf(p))).collect();
    let spread = rates.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - rates.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let guard = 4.0 * tmax * (spread + tmax * rates.iter().fold(0.0f64, |a, b| a.max(b.abs())).powi(2)) + 1e-12;
    let mut first = true;
    for (t, kt) in ts.iter().zip(&bodies) {
        let mut dev: f64 = 0.0;
        for u in samples.dirs() {
            let (rho, i, second) = radial_with_facet(k, u);
            if (second - rho) / rho < guard {
                if first {
                    excluded += 1;
                }
                continue;
            }
            if first {
                used += 1;
            }
            let rho_t = radial_function(kt, u);
            let fd = (rho_t - rho) / t;
            let fac = &k.facets[i];
            let pred = f[i].powf(p) / (p * fac.support.powf(p)) * rho;
            dev = dev.max((fd - pred).abs());
            lipschitz = lipschitz.max(fd.abs());
        }
        first = false;
        deviations.push((*t, dev));
    }
    let order = if deviations.len() >= 2 {
        let (t0, d0) = deviations[0];
        let (t1, d1) = deviations[deviations.len() - 1];
        (d0 / d1).ln() / (t0.abs() / t1.abs()).ln()
    } else {
        f64::NAN
    };
    Ok(RadialPerturbationReport {
        deviations,
        lipschitz,
        order,
        samples_used: used,
        samples_excluded: excluded,
    })
}

/// JSON form of a facet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FacetJson {
    pub normal: Vec<f64>,
    pub support: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
}

/// JSON form of a polytope; vertices are informational and recomputed on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub facets: Vec<FacetJson>,
    #[serde(default)]
    pub vertices: Vec<Vec<f64>>,
}

impl From<Polytope> for PolytopeJson {
    fn from(k: Polytope) -> Self {
        Self {
            facets: k
                .facets
                .iter()
                .map(|f| FacetJson {
                    normal: from_point(k.dim, &f.normal),
                    support: f.support,
                    area: Some(f.area),
                })
                .collect(),
            vertices: k.vertices.iter().map(|v| from_point(k.dim, v)).collect(),
        }
    }
}

impl TryFrom<PolytopeJson> for Polytope {
    type Error = Error;
    fn try_from(j: PolytopeJson) -> Result<Self> {
        let dim = j
            .facets
            .first()
            .map(|f| f.normal.len())
            .ok_or_else(|| Error::Shape("polytope has no facets".into()))?;
        let mut normals = Vec::with_capacity(j.facets.len());
        let mut supports = Vec::with_capacity(j.facets.len());
        for f in &j.facets {
            let v = to_point(dim, &f.normal)?;
            let norm = v.norm();
            if !(norm > 0.0) {
                return domain("facet normal must be nonzero");
            }
            if (norm - 1.0).abs() > 1e-9 {
                return domain(format!("facet normal must have unit length, got |v| = {norm}"));
            }
            normals.push(v / norm);
            supports.push(f.support);
        }
        wulff_shape_raw(dim, &normals, &supports)
    }
}
