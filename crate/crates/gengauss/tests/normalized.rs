mod common;

use gengauss::density::{ball_mass, normalizer};
use gengauss::geometry::{hausdorff_distance, Point, Polytope, SphereGrid};
use gengauss::measures::{gauss_volume, total_measure, weighted_surface_measure};
use gengauss::normalized::{
    check_not_concentrated, recover_multiplier, solve_normalized, solve_normalized_even,
    ConcentrationMode, DiscreteMeasure, SolverOptions,
};
use gengauss::{Error, Params};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn params(n: usize, alpha: f64, q: f64, p: f64) -> Params {
    Params::new(n, alpha, q, p).unwrap()
}

fn planar(angles: &[f64], weights: &[f64], even: bool) -> DiscreteMeasure {
    let dirs = angles.iter().map(|t| Point::new(t.cos(), t.sin(), 0.0)).collect();
    DiscreteMeasure::new(2, dirs, weights.to_vec(), even).unwrap()
}

fn uniform(m: usize, even: bool) -> DiscreteMeasure {
    let angles: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
    planar(&angles, &vec![1.0; m], even)
}

/// ±e1 with weight w1 and ±e2 with weight w2, in the order e1, −e1, e2, −e2.
fn cross(w1: f64, w2: f64) -> DiscreteMeasure {
    planar(&[0.0, PI, PI / 2.0, 3.0 * PI / 2.0], &[w1, w1, w2, w2], true)
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn concentration_examples() {
    let m = cross(1.0, 1.0);
    assert_eq!(check_not_concentrated(&m, ConcentrationMode::Hemisphere), (true, None));
    let half = planar(&[-1.2, -0.3, 0.4, 1.5], &[1.0; 4], false);
    let (ok, u) = check_not_concentrated(&half, ConcentrationMode::Hemisphere);
    assert!(!ok);
    let u = u.unwrap();
    assert!(half.dirs().iter().all(|v| u.dot(v) <= 1e-12));
    let boundary = planar(&[-PI / 2.0, 0.0, PI / 2.0], &[1.0; 3], false);
    let (ok, u) = check_not_concentrated(&boundary, ConcentrationMode::Hemisphere);
    assert!(!ok);
    assert!((u.unwrap() - Point::new(-1.0, 0.0, 0.0)).norm() < 1e-9);
    let eq: Vec<Point> = (0..6).map(|j| {
        let t = PI * j as f64 / 3.0;
        Point::new(t.cos(), t.sin(), 0.0)
    }).collect();
    let m = DiscreteMeasure::new(3, eq, vec![1.0; 6], true).unwrap();
    let (ok, u) = check_not_concentrated(&m, ConcentrationMode::GreatSubsphere);
    assert!(!ok);
    assert!((u.unwrap().z.abs() - 1.0).abs() < 1e-10);
    let full = DiscreteMeasure::new(3, SphereGrid::axes(3).unwrap().dirs().to_vec(), vec![1.0; 6], true).unwrap();
    assert_eq!(check_not_concentrated(&full, ConcentrationMode::GreatSubsphere), (true, None));
    assert_eq!(check_not_concentrated(&full, ConcentrationMode::Hemisphere), (true, None));
}

#[test]
fn measure_validation() {
    let d = vec![Point::new(1.0, 0.0, 0.0), Point::new(-1.0, 0.0, 0.0)];
    assert!(matches!(DiscreteMeasure::new(2, d.clone(), vec![1.0], false), Err(Error::Shape(_))));
    assert!(matches!(DiscreteMeasure::new(2, d.clone(), vec![1.0, 0.0], false), Err(Error::Domain(_))));
    assert!(DiscreteMeasure::new(2, d.clone(), vec![1.0, 2.0], true).is_err());
    assert!(DiscreteMeasure::new(2, d, vec![2.0, 2.0], true).unwrap().is_even());
}

#[test]
fn uniform_sixteen_gon() {
    let p = params(2, 2.0, 0.0, 1.0);
    let mu = uniform(16, false);
    let sol = solve_normalized(&p, &mu, 0.6, &opts()).unwrap();
    let h0 = sol.support[0];
    for h in &sol.support {
        assert!((h - h0).abs() <= 1e-6 * h0, "{h} vs {h0}");
    }
    let polygon = Polytope::ball(2, h0, 16).unwrap();
    assert!((gauss_volume(&p, &polygon).unwrap() - 0.6).abs() < 1e-7);
    let atoms = weighted_surface_measure(&p, &sol.body, 1.0).unwrap();
    let t = total_measure(&atoms);
    for a in &atoms.atoms {
        assert!((a.weight / t - 1.0 / 16.0).abs() < 1e-6);
    }
    assert!(sol.first_order_residual <= 1e-5);
    assert!((sol.volume - 0.6).abs() <= 1e-7);
    let lambda = recover_multiplier(&p, &sol, &mu, 1e-4).unwrap();
    assert!((lambda - t / 16.0).abs() < 1e-12 * lambda);
    assert!(sol.inactive_atoms.is_empty());
}

#[test]
fn box_example_matches_oracle() {
    let p = params(2, 2.0, 0.0, 1.0);
    let z = normalizer(&p);
    for c in [0.55, 0.5] {
        let mu = cross(2.0, 1.0);
        let sol = solve_normalized(&p, &mu, c, &opts()).unwrap();
        let (a, b) = common::box_oracle(2.0, 0.0, 1.0, z, 2.0, 1.0, c);
        assert!(b > a, "elongated along e2");
        assert!(sol.first_order_residual <= 1e-5);
        for (h, e) in sol.support.iter().zip([a, a, b, b]) {
            assert!((h - e).abs() <= 1e-4, "c = {c}: {h} vs {e}");
        }
        assert!(sol.support.iter().all(|h| *h > 1e-3));
    }
}

#[test]
fn box_oracle_across_parameters() {
    for (alpha, q, pp, c) in [(2.0, -0.3, 1.0, 0.6), (1.5, 0.2, 2.0, 0.7), (3.0, 0.0, 0.5, 0.5), (1.0, -0.5, 3.0, 0.8)] {
        let p = params(2, alpha, q, pp);
        let z = normalizer(&p);
        let sol = solve_normalized(&p, &cross(1.0, 3.0), c, &opts()).unwrap();
        let (a, b) = common::box_oracle(alpha, q, pp, z, 1.0, 3.0, c);
        for (h, e) in sol.support.iter().zip([a, a, b, b]) {
            assert!((h - e).abs() <= 1e-4, "(α,q,p,c)=({alpha},{q},{pp},{c}): {h} vs {e}");
        }
    }
}

#[test]
fn even_solver_uniform() {
    let p = params(2, 2.0, 0.0, -1.0);
    let mu = uniform(16, true);
    let sol = solve_normalized_even(&p, &mu, 0.3, &opts()).unwrap();
    let h0 = sol.support[0];
    assert!(sol.support.iter().all(|h| (h - h0).abs() <= 1e-6 * h0));
    assert!(sol.first_order_residual <= 1e-5);
    assert!(sol.even);
    let m = ball_mass(&p, h0).unwrap();
    assert!(m < 0.3, "circumscribed polygon has more mass than its inscribed disc");
}

#[test]
fn even_solver_matches_box_oracle() {
    for (alpha, q, pp, c) in [(2.0, -0.3, -0.5, 0.4), (2.0, 0.2, -1.0, 0.3), (1.5, -0.5, -1.0, 0.6)] {
        let p = params(2, alpha, q, pp);
        let z = normalizer(&p);
        let sol = solve_normalized_even(&p, &cross(1.0, 2.5), c, &opts()).unwrap();
        let (a, b) = common::box_oracle(alpha, q, pp, z, 1.0, 2.5, c);
        assert!(sol.first_order_residual <= 1e-5);
        for (h, e) in sol.support.iter().zip([a, a, b, b]) {
            assert!((h - e).abs() <= 1e-4, "(α,q,p,c)=({alpha},{q},{pp},{c}): {h} vs {e}");
        }
    }
}

#[test]
fn even_solver_in_three_dimensions() {
    let p = params(3, 2.0, -0.4, -0.5);
    let dirs = SphereGrid::fibonacci_even(40).dirs().to_vec();
    let w: Vec<f64> = dirs.iter().map(|v| 1.0 + 0.5 * v.z * v.z).collect();
    let mu = DiscreteMeasure::new(3, dirs, w, true).unwrap();
    let sol = solve_normalized_even(&p, &mu, 0.4, &opts()).unwrap();
    assert!(sol.first_order_residual <= 1e-5);
    assert!((sol.volume - 0.4).abs() <= 1e-7);
    let anti = SphereGrid::new(3, mu.dirs().to_vec()).unwrap().antipodes().unwrap();
    for (i, &j) in anti.iter().enumerate() {
        assert!((sol.support[i] - sol.support[j]).abs() <= 1e-12 * sol.support[i]);
    }
}

#[test]
fn precondition_and_domain_errors() {
    let p = params(2, 2.0, 0.0, 1.0);
    let half = planar(&[-1.2, -0.3, 0.4, 1.5], &[1.0; 4], false);
    assert!(matches!(solve_normalized(&p, &half, 0.6, &opts()), Err(Error::Precondition(_))));
    let asym = planar(&[0.0, 2.0, 4.0], &[1.0, 2.0, 1.0], false);
    assert!(matches!(solve_normalized(&p, &asym, 0.3, &opts()), Err(Error::Precondition(_))));
    assert!(matches!(solve_normalized(&p, &asym, 1.0, &opts()), Err(Error::Domain(_))));
    assert!(matches!(solve_normalized(&p, &asym, 0.0, &opts()), Err(Error::Domain(_))));
    let neg = params(2, 2.0, 0.0, -1.0);
    assert!(matches!(solve_normalized(&neg, &asym, 0.6, &opts()), Err(Error::Domain(_))));
    let bad = params(2, 2.0, -0.5, -7.0);
    assert!(matches!(solve_normalized_even(&bad, &uniform(8, true), 0.5, &opts()), Err(Error::Precondition(_))));
    let ok = params(2, 2.0, -0.5, -1.0);
    assert!(matches!(solve_normalized_even(&ok, &asym, 0.5, &opts()), Err(Error::Precondition(_))));
    let line = planar(&[0.0, PI], &[1.0, 1.0], true);
    assert!(matches!(solve_normalized_even(&ok, &line, 0.5, &opts()), Err(Error::Precondition(_))));
    let p3 = params(3, 2.0, 0.0, 1.0);
    assert!(matches!(solve_normalized(&p3, &asym, 0.6, &opts()), Err(Error::Shape(_))));
}

#[test]
fn multiplier_is_homogeneous_in_mu() {
    let p = params(2, 1.5, 0.1, 2.0);
    let angles = [0.1, 1.3, 2.2, 3.0, 4.1, 5.5];
    let w = [1.0, 2.0, 0.5, 1.5, 1.0, 0.7];
    let mu = planar(&angles, &w, false);
    let mu2 = mu.scaled(2.0).unwrap();
    let s1 = solve_normalized(&p, &mu, 0.6, &opts()).unwrap();
    let s2 = solve_normalized(&p, &mu2, 0.6, &opts()).unwrap();
    let l1 = recover_multiplier(&p, &s1, &mu, 1e-4).unwrap();
    let l2 = recover_multiplier(&p, &s2, &mu2, 1e-4).unwrap();
    assert!((l2 - l1 / 2.0).abs() <= 1e-6 * l1);
    assert!((s1.multiplier - l1).abs() <= 1e-6 * l1);
    let other = planar(&angles, &[3.0, 1.0, 1.0, 1.0, 1.0, 1.0], false);
    assert!(matches!(recover_multiplier(&p, &s1, &other, 1e-4), Err(Error::InconsistentMultiplier(_))));
}

#[test]
fn random_measures_satisfy_first_order_conditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for trial in 0..8 {
        let (ang, w) = common::random_planar_atoms(&mut rng, 7, 0.3);
        let mu = planar(&ang, &w, false);
        let (alpha, q, pp) = [(2.0, 0.0, 1.0), (1.5, -0.4, 2.0), (2.0, 0.3, 0.5), (1.0, 0.1, 1.5)][trial % 4];
        let p = params(2, alpha, q, pp);
        let c = [0.5, 0.6, 0.75][trial % 3];
        let sol = solve_normalized(&p, &mu, c, &opts()).unwrap();
        assert!(sol.first_order_residual <= 1e-5, "trial {trial}");
        assert!(sol.projected_gradient_ratio <= 1e-6, "trial {trial}: {}", sol.projected_gradient_ratio);
        assert!((gauss_volume(&p, &sol.body).unwrap() - c).abs() <= 1e-7);
        assert!(sol.support.iter().all(|h| *h > 1e-3));
        for w in sol.log.windows(2) {
            assert!(w[1].phi >= w[0].phi - 1e-12 * w[0].phi.abs(), "trial {trial}: objective decreased");
        }
        recover_multiplier(&p, &sol, &mu, 1e-4).unwrap();
    }
}

#[test]
fn rotation_equivariance() {
    let p = params(2, 2.0, -0.2, 1.5);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (ang, w) = common::random_planar_atoms(&mut rng, 6, 0.3);
    let tight = SolverOptions {
        tol_measure: 1e-9,
        grad_tol: 1e-9,
        ..SolverOptions::default()
    };
    let base = solve_normalized(&p, &planar(&ang, &w, false), 0.65, &tight).unwrap();
    let shift = 0.7;
    let rotated: Vec<f64> = ang.iter().map(|t| t + shift).collect();
    let rot = solve_normalized(&p, &planar(&rotated, &w, false), 0.65, &tight).unwrap();
    let (c, s) = (shift.cos(), shift.sin());
    let moved: Vec<Point> = base.body.vertices().iter().map(|v| Point::new(c * v.x - s * v.y, s * v.x + c * v.y, 0.0)).collect();
    let back = Polytope::from_vertices(2, &moved).unwrap();
    let d = hausdorff_distance(&back, &rot.body, &SphereGrid::circle(720));
    assert!(d <= 1e-6, "{d}");
}
