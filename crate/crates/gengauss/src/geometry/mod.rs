//! Convex bodies as facet polytopes and as support numbers on a direction grid.
//!
//! The Wulff shape of support numbers z on directions v is computed through
//! polar duality: its polar is the convex hull of the points v_i/z_i, each hull
//! facet a·y = b yields the Wulff vertex a/b, and each hull vertex is an active
//! constraint.

mod grid;
mod hull2;
mod hull3;
mod polytope;

pub use grid::{
    from_point, to_point, GridJson, Point, SphereGrid, DEFAULT_GRID_2D, DEFAULT_GRID_3D,
};
pub use polytope::{
    canonicalize, hausdorff_distance, hausdorff_distance_on_normals, lp_combine, polar_body,
    radial_function, radial_perturbation_check, support_function, wulff_shape, wulff_shape_raw,
    Facet, Polytope, PolytopeJson, RadialPerturbationReport, SupportVector,
};

/// Counter-clockwise hull vertex indices of planar points (z ignored).
pub fn planar_hull(pts: &[Point], eps: f64) -> Vec<usize> {
    hull2::convex_hull_2d(pts, eps)
}

/// Outward unit normals and offsets of the hull faces of 3-D points, or
/// `None` when the points are coplanar.
pub fn hull_face_planes(pts: &[Point], eps: f64) -> Option<Vec<(Point, f64)>> {
    let h = hull3::convex_hull_3d(pts, eps).ok()?;
    Some(h.alive_faces().map(|(_, f)| (f.normal, f.offset)).collect())
}
