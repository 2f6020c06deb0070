//! Planar convex hull by the monotone chain, counter-clockwise, collinear points removed.

use super::grid::Point;

fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Indices of hull vertices in counter-clockwise order. Points within `eps` of a
/// hull edge are not reported as vertices.
pub(crate) fn convex_hull_2d(pts: &[Point], eps: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&i, &j| {
        pts[i]
            .x
            .total_cmp(&pts[j].x)
            .then(pts[i].y.total_cmp(&pts[j].y))
            .then(i.cmp(&j))
    });
    idx.dedup_by(|a, b| (pts[*a] - pts[*b]).norm() <= eps);
    if idx.len() < 3 {
        return idx;
    }
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && turn(pts, &lower, i) <= eps {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && turn(pts, &upper, i) <= eps {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Signed distance of `pts[i]` from the line through the last two chain points.
fn turn(pts: &[Point], chain: &[usize], i: usize) -> f64 {
    let o = &pts[chain[chain.len() - 2]];
    let a = &pts[chain[chain.len() - 1]];
    let len = (a - o).norm();
    if len == 0.0 {
        return 0.0;
    }
    cross(o, a, &pts[i]) / len
}
