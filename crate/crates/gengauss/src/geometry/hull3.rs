//! Incremental 3-D convex hull with conflict lists (quickhull ordering).
//!
//! Faces are triangles oriented counter-clockwise seen from outside. Coplanar
//! facets come out triangulated; callers merge them.

use super::grid::Point;
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub(crate) struct Face {
    pub v: [usize; 3],
    pub normal: Point,
    pub offset: f64,
    alive: bool,
    outside: Vec<usize>,
}

#[derive(Debug)]
pub(crate) struct Hull3 {
    pub faces: Vec<Face>,
    /// Directed edge (a, b) to the face that contains it.
    pub edges: HashMap<(usize, usize), usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum HullError {
    Degenerate,
}

fn plane(pts: &[Point], a: usize, b: usize, c: usize) -> (Point, f64) {
    let n = (pts[b] - pts[a]).cross(&(pts[c] - pts[a]));
    let norm = n.norm();
    let n = if norm > 0.0 { n / norm } else { n };
    (n, n.dot(&pts[a]))
}

impl Hull3 {
    fn add_face(&mut self, pts: &[Point], v: [usize; 3]) -> usize {
        let (normal, offset) = plane(pts, v[0], v[1], v[2]);
        let id = self.faces.len();
        self.faces.push(Face {
            v,
            normal,
            offset,
            alive: true,
            outside: Vec::new(),
        });
        for k in 0..3 {
            self.edges.insert((v[k], v[(k + 1) % 3]), id);
        }
        id
    }

    fn dist(&self, pts: &[Point], f: usize, i: usize) -> f64 {
        let face = &self.faces[f];
        face.normal.dot(&pts[i]) - face.offset
    }

    pub fn alive_faces(&self) -> impl Iterator<Item = (usize, &Face)> {
        self.faces.iter().enumerate().filter(|(_, f)| f.alive)
    }

    /// Face across the directed edge (a, b) of the face containing (a, b).
    pub fn neighbor(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.get(&(b, a)).copied()
    }
}

/// Convex hull of `pts`; points within `eps` of the current hull are treated as inside.
pub(crate) fn convex_hull_3d(pts: &[Point], eps: f64) -> Result<Hull3, HullError> {
    let n = pts.len();
    if n < 4 {
        return Err(HullError::Degenerate);
    }
    let lex = |i: &usize, j: &usize| {
        pts[*i]
            .x
            .total_cmp(&pts[*j].x)
            .then(pts[*i].y.total_cmp(&pts[*j].y))
            .then(pts[*i].z.total_cmp(&pts[*j].z))
            .then(i.cmp(j))
    };
    let i0 = (0..n).min_by(lex).unwrap();
    let i1 = argmax(n, |i| (pts[i] - pts[i0]).norm());
    let d01 = (pts[i1] - pts[i0]).normalize();
    let i2 = argmax(n, |i| {
        let w = pts[i] - pts[i0];
        (w - d01 * w.dot(&d01)).norm()
    });
    let (nrm, off) = plane(pts, i0, i1, i2);
    let i3 = argmax(n, |i| (nrm.dot(&pts[i]) - off).abs());
    let line_gap = {
        let w = pts[i2] - pts[i0];
        (w - d01 * w.dot(&d01)).norm()
    };
    if (pts[i1] - pts[i0]).norm() <= eps || line_gap <= eps || (nrm.dot(&pts[i3]) - off).abs() <= eps {
        return Err(HullError::Degenerate);
    }

    let mut hull = Hull3 {
        faces: Vec::new(),
        edges: HashMap::new(),
    };
    let (b, c) = if nrm.dot(&pts[i3]) - off > 0.0 { (i2, i1) } else { (i1, i2) };
    // Base (i0, b, c) faces away from i3.
    let init = [[i0, b, c], [i0, c, i3], [c, b, i3], [b, i0, i3]];
    for v in init {
        hull.add_face(pts, v);
    }

    let simplex = [i0, i1, i2, i3];
    for i in 0..n {
        if simplex.contains(&i) {
            continue;
        }
        assign(&mut hull, pts, &[0, 1, 2, 3], i, eps);
    }

    let mut cursor = 0;
    while cursor < hull.faces.len() {
        let f = cursor;
        if !hull.faces[f].alive || hull.faces[f].outside.is_empty() {
            cursor += 1;
            continue;
        }
        let eye = {
            let out = &hull.faces[f].outside;
            let mut best = out[0];
            let mut bd = hull.dist(pts, f, best);
            for &i in &out[1..] {
                let d = hull.dist(pts, f, i);
                if d > bd {
                    best = i;
                    bd = d;
                }
            }
            best
        };

        let mut visible = vec![f];
        let mut is_visible: HashMap<usize, bool> = HashMap::new();
        is_visible.insert(f, true);
        let mut k = 0;
        while k < visible.len() {
            let g = visible[k];
            k += 1;
            let v = hull.faces[g].v;
            for e in 0..3 {
                let (a, bb) = (v[e], v[(e + 1) % 3]);
                if let Some(h) = hull.neighbor(a, bb) {
                    if is_visible.contains_key(&h) {
                        continue;
                    }
                    // Visibility uses a threshold far below the outside-set one, so the
                    // eye sits well above every face it is hidden from.
                    let vis = hull.dist(pts, h, eye) > 1e-2 * eps;
                    is_visible.insert(h, vis);
                    if vis {
                        visible.push(h);
                    }
                }
            }
        }

        // Rounding can leave non-visible islands inside the visible region;
        // faces not connected to the most distant hidden face join the visible set.
        let alive: Vec<usize> = hull.alive_faces().map(|(id, _)| id).collect();
        if let Some(&anchor) = alive
            .iter()
            .filter(|g| !is_visible.get(g).copied().unwrap_or(false))
            .min_by(|a, b| hull.dist(pts, **a, eye).total_cmp(&hull.dist(pts, **b, eye)))
        {
            let mut reached: HashMap<usize, ()> = HashMap::new();
            reached.insert(anchor, ());
            let mut stack = vec![anchor];
            while let Some(g) = stack.pop() {
                let v = hull.faces[g].v;
                for e in 0..3 {
                    if let Some(h) = hull.neighbor(v[e], v[(e + 1) % 3]) {
                        if !is_visible.get(&h).copied().unwrap_or(false) && !reached.contains_key(&h) {
                            reached.insert(h, ());
                            stack.push(h);
                        }
                    }
                }
            }
            for &g in &alive {
                if !reached.contains_key(&g) && !is_visible.get(&g).copied().unwrap_or(false) {
                    is_visible.insert(g, true);
                    visible.push(g);
                }
            }
        }

        let mut horizon = Vec::new();
        for &g in &visible {
            let v = hull.faces[g].v;
            for e in 0..3 {
                let (a, bb) = (v[e], v[(e + 1) % 3]);
                let h = hull.neighbor(a, bb).expect("closed surface");
                if !is_visible.get(&h).copied().unwrap_or(false) {
                    horizon.push((a, bb));
                }
            }
        }

        let mut orphans = Vec::new();
        for &g in &visible {
            let face = &mut hull.faces[g];
            face.alive = false;
            orphans.append(&mut face.outside);
            let v = face.v;
            for e in 0..3 {
                hull.edges.remove(&(v[e], v[(e + 1) % 3]));
            }
        }
        let new_faces: Vec<usize> = horizon
            .iter()
            .map(|&(a, bb)| hull.add_face(pts, [a, bb, eye]))
            .collect();
        for i in orphans {
            if i != eye {
                assign(&mut hull, pts, &new_faces, i, eps);
            }
        }
        cursor += 1;
    }
    Ok(hull)
}

fn assign(hull: &mut Hull3, pts: &[Point], faces: &[usize], i: usize, eps: f64) {
    let mut best = None;
    let mut bd = eps;
    for &f in faces {
        let d = hull.dist(pts, f, i);
        if d > bd {
            bd = d;
            best = Some(f);
        }
    }
    if let Some(f) = best {
        hull.faces[f].outside.push(i);
    }
}

fn argmax<F: Fn(usize) -> f64>(n: usize, f: F) -> usize {
    let mut best = 0;
    let mut bv = f64::NEG_INFINITY;
    for i in 0..n {
        let v = f(i);
        if v > bv {
            bv = v;
            best = i;
        }
    }
    best
}
