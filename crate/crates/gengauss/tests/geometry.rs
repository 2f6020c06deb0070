use gengauss::geometry::{
    canonicalize, hausdorff_distance, lp_combine, polar_body, radial_function,
    radial_perturbation_check, support_function, wulff_shape, wulff_shape_raw, Point, Polytope,
    SphereGrid, SupportVector,
};
use gengauss::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Point {
    loop {
        let v = Point::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            if dim == 3 { rng.random_range(-1.0..1.0) } else { 0.0 },
        );
        let r = v.norm();
        if r > 0.1 && r <= 1.0 {
            return v / r;
        }
    }
}

/// Random directions that include ±e_i, so every halfspace system is bounded.
fn random_system(rng: &mut ChaCha8Rng, dim: usize, extra: usize) -> (Vec<Point>, Vec<f64>) {
    let mut dirs: Vec<Point> = SphereGrid::axes(dim).unwrap().dirs().to_vec();
    dirs.extend((0..extra).map(|_| random_unit(rng, dim)));
    let vals = dirs.iter().map(|_| rng.random_range(0.5..2.0)).collect();
    (dirs, vals)
}

/// Vertices of ∩{x·v_i ≤ z_i} by enumerating every line (2D) or plane (3D) intersection.
fn brute_vertices(dim: usize, dirs: &[Point], vals: &[f64]) -> Vec<Point> {
    let feasible = |x: &Point| dirs.iter().zip(vals).all(|(v, z)| v.dot(x) <= z + 1e-10);
    let mut out = Vec::new();
    let k = dirs.len();
    if dim == 2 {
        for i in 0..k {
            for j in i + 1..k {
                let (a, b) = (dirs[i], dirs[j]);
                let det = a.x * b.y - a.y * b.x;
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = Point::new((vals[i] * b.y - vals[j] * a.y) / det, (a.x * vals[j] - b.x * vals[i]) / det, 0.0);
                if feasible(&x) {
                    out.push(x);
                }
            }
        }
    } else {
        for i in 0..k {
            for j in i + 1..k {
                for l in j + 1..k {
                    let m = nalgebra::Matrix3::from_rows(&[dirs[i].transpose(), dirs[j].transpose(), dirs[l].transpose()]);
                    if m.determinant().abs() < 1e-10 {
                        continue;
                    }
                    let x = m.lu().solve(&Point::new(vals[i], vals[j], vals[l])).unwrap();
                    if feasible(&x) {
                        out.push(x);
                    }
                }
            }
        }
    }
    out
}

/// Hausdorff distance between finite point sets.
fn point_set_distance(a: &[Point], b: &[Point]) -> f64 {
    let one = |x: &[Point], y: &[Point]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

/// Shoelace area of the convex hull of planar points (monotone chain).
fn hull_area(pts: &[Point]) -> f64 {
    let mut p: Vec<(f64, f64)> = pts.iter().map(|v| (v.x, v.y)).collect();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut h: Vec<(f64, f64)> = Vec::new();
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while h.len() >= start + 2 && cross(h[h.len() - 2], h[h.len() - 1], q) <= 0.0 {
                h.pop();
            }
            h.push(q);
        }
        h.pop();
    }
    let m = h.len();
    (0..m).map(|i| h[i].0 * h[(i + 1) % m].1 - h[(i + 1) % m].0 * h[i].1).sum::<f64>() / 2.0
}

fn sq() -> Polytope {
    Polytope::cube(2, 1.0).unwrap()
}

#[test]
fn square_and_cube() {
    let k = sq();
    assert_eq!(k.facets().len(), 4);
    assert_eq!(k.vertices().len(), 4);
    assert!((k.volume() - 4.0).abs() < 1e-14);
    for v in k.vertices() {
        assert!((v.x.abs() - 1.0).abs() < 1e-14 && (v.y.abs() - 1.0).abs() < 1e-14);
    }
    assert!(k.check_consistency(1e-9));
    let c = Polytope::cube(3, 1.0).unwrap();
    assert_eq!(c.facets().len(), 6);
    assert_eq!(c.vertices().len(), 8);
    assert!((c.volume() - 8.0).abs() < 1e-13);
    for f in c.facets() {
        assert!((f.area - 4.0).abs() < 1e-13);
        assert_eq!(f.ring.len(), 4);
    }
    assert!(c.check_consistency(1e-9));
}

#[test]
fn regular_polygon_area() {
    for m in [3usize, 5, 64, 257] {
        let k = Polytope::ball(2, 1.0, m).unwrap();
        let exact = m as f64 * (PI / m as f64).tan();
        assert_eq!(k.facets().len(), m);
        assert!((k.volume() - exact).abs() < 1e-12 * exact, "m = {m}: {} vs {exact}", k.volume());
        let k = Polytope::ball(2, 2.5, m).unwrap();
        assert!((k.volume() - 6.25 * exact).abs() < 1e-12 * exact);
    }
}

#[test]
fn sphere_polytope_is_consistent() {
    for m in [20, 200, 1000] {
        let k = Polytope::ball(3, 1.0, m).unwrap();
        assert!(k.check_consistency(1e-9));
        let v = k.volume();
        assert!(v > 4.0 * PI / 3.0 && v < 4.0 * PI / 3.0 * 1.5, "m = {m}: {v}");
        let area: f64 = k.facets().iter().map(|f| f.area).sum();
        assert!((3.0 * v - area).abs() < 1e-10 * area, "inradius 1 gives 3V = S");
    }
}

#[test]
fn hemisphere_directions_are_unbounded() {
    let dirs = [Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0), Point::new(-1.0, 0.0, 0.0)];
    assert!(matches!(wulff_shape_raw(2, &dirs, &[1.0, 1.0, 1.0]), Err(Error::UnboundedBody(_))));
    let dirs = [Point::new(1.0, 0.0, 0.0), Point::new(-1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0), Point::new(0.0, -1.0, 0.0)];
    assert!(matches!(wulff_shape_raw(3, &dirs, &[1.0; 4]), Err(Error::UnboundedBody(_))));
}

#[test]
fn canonicalize_lowers_redundant_constraint() {
    let s = 0.5f64.sqrt();
    let grid = Arc::new(
        SphereGrid::new(
            2,
            vec![
                Point::new(1.0, 0.0, 0.0),
                Point::new(0.0, 1.0, 0.0),
                Point::new(-1.0, 0.0, 0.0),
                Point::new(0.0, -1.0, 0.0),
                Point::new(s, s, 0.0),
            ],
        )
        .unwrap(),
    );
    let z = SupportVector::new(grid, vec![1.0, 1.0, 1.0, 1.0, 10.0]).unwrap();
    let c = canonicalize(&z).unwrap();
    assert!((c.values()[4] - 2f64.sqrt()).abs() < 1e-12);
    for i in 0..4 {
        assert!((c.values()[i] - 1.0).abs() < 1e-12);
    }
    assert_eq!(wulff_shape(&z).unwrap().facets().len(), 4);
}

#[test]
fn canonicalize_is_a_projection_below_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for dim in [2, 3] {
        let grid = Arc::new(SphereGrid::uniform(dim, if dim == 2 { 48 } else { 80 }).unwrap());
        for _ in 0..20 {
            let vals: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(0.5..2.0)).collect();
            let z = SupportVector::new(grid.clone(), vals).unwrap();
            let c = canonicalize(&z).unwrap();
            for (a, b) in c.values().iter().zip(z.values()) {
                assert!(*a <= b + 1e-12);
            }
            let cc = canonicalize(&c).unwrap();
            for (a, b) in cc.values().iter().zip(c.values()) {
                assert!((a - b).abs() <= 1e-10, "dim {dim}: {a} vs {b}");
            }
            let k = wulff_shape(&z).unwrap();
            for (u, zi) in grid.dirs().iter().zip(z.values()) {
                assert!(support_function(&k, u) <= zi + 1e-10);
            }
        }
    }
}

#[test]
fn support_and_radial_examples() {
    let k = sq();
    let d = Point::new(1.0, 1.0, 0.0) / 2f64.sqrt();
    assert!((support_function(&k, &Point::new(1.0, 0.0, 0.0)) - 1.0).abs() < 1e-15);
    assert!((support_function(&k, &d) - 2f64.sqrt()).abs() < 1e-15);
    assert!((radial_function(&k, &d) - 2f64.sqrt()).abs() < 1e-14);
    assert!((radial_function(&k, &Point::new(0.0, -1.0, 0.0)) - 1.0).abs() < 1e-15);
    let b = Polytope::ball(3, 1.0, 2000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let u = random_unit(&mut rng, 3);
        let r = radial_function(&b, &u);
        assert!((1.0..1.05).contains(&r), "{r}");
        assert!(support_function(&b, &u) >= 1.0 - 1e-12);
    }
}

#[test]
fn polar_examples() {
    let c = Polytope::cube(3, 1.0).unwrap();
    let p = polar_body(&c).unwrap();
    assert_eq!(p.vertices().len(), 6);
    assert_eq!(p.facets().len(), 8);
    for v in p.vertices() {
        let mut a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!(a[0] < 1e-14 && a[1] < 1e-14 && (a[2] - 1.0).abs() < 1e-14);
    }
    assert!((p.volume() - 4.0 / 3.0).abs() < 1e-13);
    let b = Polytope::ball(2, 2.0, 64).unwrap();
    let pb = polar_body(&b).unwrap();
    for v in pb.vertices() {
        let r = v.norm();
        assert!((0.5 - 1e-12..=0.5 / (PI / 64.0).cos() + 1e-12).contains(&r));
    }
}

#[test]
fn polar_involution_and_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for dim in [2, 3] {
        for _ in 0..30 {
            let (dirs, vals) = random_system(&mut rng, dim, 10);
            let k = wulff_shape_raw(dim, &dirs, &vals).unwrap();
            let kpp = polar_body(&polar_body(&k).unwrap()).unwrap();
            assert!(point_set_distance(k.vertices(), kpp.vertices()) <= 1e-9);
            let kp = polar_body(&k).unwrap();
            for _ in 0..20 {
                let u = random_unit(&mut rng, dim);
                let prod = radial_function(&k, &u) * support_function(&kp, &u);
                assert!((prod - 1.0).abs() < 1e-10, "{prod}");
            }
        }
    }
}

#[test]
fn wulff_matches_brute_force_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for trial in 0..200 {
        let dim = if trial % 2 == 0 { 2 } else { 3 };
        let (dirs, vals) = random_system(&mut rng, dim, if dim == 2 { 12 } else { 10 });
        let k = wulff_shape_raw(dim, &dirs, &vals).unwrap();
        let brute = brute_vertices(dim, &dirs, &vals);
        let d = point_set_distance(k.vertices(), &brute);
        assert!(d <= 1e-8, "trial {trial}: {d}");
        assert!(k.check_consistency(1e-9));
        if dim == 2 {
            assert!((k.volume() - hull_area(&brute)).abs() < 1e-10);
        }
    }
}

#[test]
fn lp_combine_endpoints() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for dim in [2, 3] {
        let grid = Arc::new(SphereGrid::uniform(dim, 60).unwrap());
        let mk = |rng: &mut ChaCha8Rng| {
            let v = (0..grid.len()).map(|_| rng.random_range(0.7..1.5)).collect();
            canonicalize(&SupportVector::new(grid.clone(), v).unwrap()).unwrap()
        };
        let k = mk(&mut rng);
        let l = mk(&mut rng);
        for p in [-2.0, 0.5, 1.0, 2.0, 3.0] {
            let a = lp_combine(&k, &l, 0.0, p).unwrap();
            let b = lp_combine(&k, &l, 1.0, p).unwrap();
            let c = lp_combine(&k, &k, 0.37, p).unwrap();
            for i in 0..grid.len() {
                assert!((a.values()[i] - k.values()[i]).abs() < 1e-10);
                assert!((b.values()[i] - l.values()[i]).abs() < 1e-10);
                assert!((c.values()[i] - k.values()[i]).abs() < 1e-10);
            }
        }
        let other = Arc::new(SphereGrid::uniform(dim, 61).unwrap());
        let m = SupportVector::new(other.clone(), vec![1.0; other.len()]).unwrap();
        assert!(matches!(lp_combine(&k, &m, 0.5, 1.0), Err(Error::Shape(_))));
        assert!(matches!(lp_combine(&k, &l, 1.5, 1.0), Err(Error::Domain(_))));
    }
}

#[test]
fn minkowski_combination_matches_vertex_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for trial in 0..40 {
        let dim = if trial % 2 == 0 { 2 } else { 3 };
        let (d1, v1) = random_system(&mut rng, dim, 7);
        let (d2, v2) = random_system(&mut rng, dim, 7);
        let k = wulff_shape_raw(dim, &d1, &v1).unwrap();
        let l = wulff_shape_raw(dim, &d2, &v2).unwrap();
        let lambda = rng.random_range(0.05..0.95);
        let m = k.minkowski_combination(&l, lambda).unwrap();
        let sums: Vec<Point> = k
            .vertices()
            .iter()
            .flat_map(|a| l.vertices().iter().map(move |b| a * (1.0 - lambda) + b * lambda))
            .collect();
        for _ in 0..100 {
            let u = random_unit(&mut rng, dim);
            let e = sums.iter().map(|x| x.dot(&u)).fold(f64::NEG_INFINITY, f64::max);
            assert!((support_function(&m, &u) - e).abs() < 1e-10, "trial {trial}");
        }
        if dim == 2 {
            assert!((m.volume() - hull_area(&sums)).abs() < 1e-10);
        }
    }
}

#[test]
fn hausdorff_metric() {
    let grid = SphereGrid::uniform(3, 300).unwrap();
    let c = Polytope::cube(3, 1.0).unwrap();
    assert_eq!(hausdorff_distance(&c, &c, &grid), 0.0);
    let delta = 0.125;
    let cd = wulff_shape_raw(3, SphereGrid::axes(3).unwrap().dirs(), &[1.0 + delta; 6]).unwrap();
    let axes = SphereGrid::axes(3).unwrap();
    assert!((hausdorff_distance(&c, &cd, &axes) - delta).abs() < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for _ in 0..50 {
        let bodies: Vec<Polytope> = (0..3)
            .map(|_| {
                let (d, v) = random_system(&mut rng, 3, 6);
                wulff_shape_raw(3, &d, &v).unwrap()
            })
            .collect();
        let ab = hausdorff_distance(&bodies[0], &bodies[1], &grid);
        let bc = hausdorff_distance(&bodies[1], &bodies[2], &grid);
        let ac = hausdorff_distance(&bodies[0], &bodies[2], &grid);
        assert!(ac <= ab + bc + 1e-14);
        assert!((ab - hausdorff_distance(&bodies[1], &bodies[0], &grid)).abs() < 1e-15);
    }
}

#[test]
fn radial_derivative_of_a_ball() {
    for (dim, size) in [(2, 256), (3, 400)] {
        let k = Polytope::ball(dim, 1.3, size).unwrap();
        let f = k.supports();
        let samples = SphereGrid::uniform(dim, 500).unwrap();
        for p in [1.0, 2.0, -1.5] {
            let rep = radial_perturbation_check(&k, &f, p, &[1e-3, 1e-4, 1e-5], &samples).unwrap();
            assert!(rep.samples_used > 0);
            let (_, last) = rep.deviations[2];
            assert!(last < 1e-4, "dim {dim} p {p}: {:?}", rep.deviations);
            if p != 1.0 {
                assert!(rep.order > 0.9 && rep.order < 1.1, "order {}", rep.order);
            }
        }
    }
}

#[test]
fn radial_derivative_general_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    for dim in [2, 3] {
        for _ in 0..10 {
            let (d, v) = random_system(&mut rng, dim, 12);
            let k = wulff_shape_raw(dim, &d, &v).unwrap();
            let f: Vec<f64> = k.facets().iter().map(|_| rng.random_range(0.5..1.5)).collect();
            let samples = SphereGrid::uniform(dim, 400).unwrap();
            let ts = [1e-2, 1e-3, 1e-4];
            let rep = radial_perturbation_check(&k, &f, 2.0, &ts, &samples).unwrap();
            for &(t, dev) in &rep.deviations {
                assert!(dev <= rep.lipschitz * t * 10.0 + 1e-9, "t {t}: {dev}");
            }
            if rep.deviations[0].1 > 1e-9 {
                assert!(rep.order > 0.8, "order {}", rep.order);
            }
        }
    }
}

#[test]
fn perturbation_rejects_bad_inputs() {
    let k = sq();
    let s = SphereGrid::circle(16);
    assert!(matches!(radial_perturbation_check(&k, &[1.0; 3], 1.0, &[1e-3], &s), Err(Error::Shape(_))));
    assert!(matches!(radial_perturbation_check(&k, &[1.0; 4], 0.0, &[1e-3], &s), Err(Error::Domain(_))));
    assert!(matches!(
        radial_perturbation_check(&k, &[1.0; 4], 1.0, &[-2.0], &s),
        Err(Error::StepTooLarge(_))
    ));
}

#[test]
fn json_round_trip() {
    let k = Polytope::ball(3, 1.0, 50).unwrap();
    let s = serde_json::to_string(&k).unwrap();
    let back: Polytope = serde_json::from_str(&s).unwrap();
    assert!((back.volume() - k.volume()).abs() < 1e-12);
    assert_eq!(back.facets().len(), k.facets().len());
}
