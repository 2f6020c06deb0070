//! Direction sets on the unit circle and the unit 2-sphere.

use crate::error::{domain, Error, Result};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Point = Vector3<f64>;

/// Default number of directions per dimension.
pub const DEFAULT_GRID_2D: usize = 256;
pub const DEFAULT_GRID_3D: usize = 512;

/// Unit directions in R^2 (stored with zero third coordinate) or R^3.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    dim: usize,
    dirs: Vec<Point>,
}

impl SphereGrid {
    /// Normalizes the given directions; rejects zero vectors and stray z components in 2D.
    pub fn new(dim: usize, dirs: Vec<Point>) -> Result<Self> {
        check_dim(dim)?;
        let mut out = Vec::with_capacity(dirs.len());
        for v in dirs {
            if dim == 2 && v.z != 0.0 {
                return domain("planar directions must have zero third coordinate");
            }
            let norm = v.norm();
            if !(norm.is_finite() && norm > 0.0) {
                return domain(format!("direction must be nonzero and finite, got {v:?}"));
            }
            out.push(v / norm);
        }
        if out.is_empty() {
            return domain("direction set is empty");
        }
        Ok(Self { dim, dirs: out })
    }

    pub fn from_coords(dim: usize, coords: &[Vec<f64>]) -> Result<Self> {
        let pts = coords
            .iter()
            .map(|c| to_point(dim, c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, pts)
    }

    /// `m` equally spaced angles 2πj/m.
    pub fn circle(m: usize) -> Self {
        let dirs = (0..m)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / m as f64;
                Point::new(t.cos(), t.sin(), 0.0)
            })
            .collect();
        Self { dim: 2, dirs }
    }

    /// Fibonacci lattice with `count` points.
    pub fn fibonacci(count: usize) -> Self {
        let golden = PI * (3.0 - 5f64.sqrt());
        let dirs = (0..count)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                Point::new(r * phi.cos(), r * phi.sin(), z)
            })
            .collect();
        Self { dim: 3, dirs }
    }

    /// Antipodally closed Fibonacci set: `count / 2` upper-hemisphere points and their negatives.
    pub fn fibonacci_even(count: usize) -> Self {
        let half = (count / 2).max(1);
        let golden = PI * (3.0 - 5f64.sqrt());
        let upper: Vec<Point> = (0..half)
            .map(|i| {
                let z = 1.0 - (i as f64 + 0.5) / half as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                Point::new(r * phi.cos(), r * phi.sin(), z)
            })
            .collect();
        let mut dirs = upper.clone();
        dirs.extend(upper.iter().map(|v| -v));
        Self { dim: 3, dirs }
    }

    /// Default quasi-uniform grid: `size` circle angles in 2D, Fibonacci points in 3D.
    pub fn uniform(dim: usize, size: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(if dim == 2 { Self::circle(size) } else { Self::fibonacci(size) })
    }

    /// Antipodally closed quasi-uniform grid (circle sizes are rounded up to even).
    pub fn uniform_even(dim: usize, size: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(if dim == 2 {
            Self::circle(size + size % 2)
        } else {
            Self::fibonacci_even(size)
        })
    }

    /// ±e_i.
    pub fn axes(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let mut dirs = Vec::new();
        for i in 0..dim {
            let mut v = Point::zeros();
            v[i] = 1.0;
            dirs.push(v);
            dirs.push(-v);
        }
        Ok(Self { dim, dirs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.dirs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }
    pub fn dirs(&self) -> &[Point] {
        &self.dirs
    }
    pub fn dir(&self, i: usize) -> &Point {
        &self.dirs[i]
    }

    /// Index of −v_i for every i, if the set is antipodally closed.
    pub fn antipodes(&self) -> Option<Vec<usize>> {
        let mut out = Vec::with_capacity(self.dirs.len());
        for v in &self.dirs {
            let j = self
                .dirs
                .iter()
                .position(|w| (w + v).norm() <= 1e-12)?;
            out.push(j);
        }
        Some(out)
    }

    pub fn same_as(&self, other: &SphereGrid) -> bool {
        self.dim == other.dim
            && self.dirs.len() == other.dirs.len()
            && self
                .dirs
                .iter()
                .zip(&other.dirs)
                .all(|(a, b)| (a - b).norm() <= 1e-14)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        domain(format!("only dimensions 2 and 3 are supported, got {dim}"))
    }
}

/// Embeds an `dim`-vector into the internal 3-vector representation.
pub fn to_point(dim: usize, c: &[f64]) -> Result<Point> {
    if c.len() != dim {
        return Err(Error::Shape(format!(
            "expected {dim} coordinates, got {}",
            c.len()
        )));
    }
    Ok(if dim == 2 {
        Point::new(c[0], c[1], 0.0)
    } else {
        Point::new(c[0], c[1], c[2])
    })
}

/// The first `dim` coordinates.
pub fn from_point(dim: usize, p: &Point) -> Vec<f64> {
    p.iter().take(dim).copied().collect()
}

/// Serialized direction list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridJson {
    pub dim: usize,
    pub dirs: Vec<Vec<f64>>,
}

impl From<&SphereGrid> for GridJson {
    fn from(g: &SphereGrid) -> Self {
        Self {
            dim: g.dim,
            dirs: g.dirs.iter().map(|v| from_point(g.dim, v)).collect(),
        }
    }
}
