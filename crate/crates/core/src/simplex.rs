use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::GaugeBody;
use crate::vector::{sub, Vector};

/// Relative threshold of the Gram-rank test for affine independence.
const RANK_TOL: f64 = 1e-9;

/// Ordered vertex list with its pairwise norm distances under one body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    vertices: Vec<Vector>,
    distances: Vec<Vec<f64>>,
    diameter: f64,
}

impl Simplex {
    /// Measures `vertices` in `body`; fails if they are affinely dependent.
    pub fn new(body: &dyn GaugeBody, vertices: Vec<Vector>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        for v in &vertices {
            if v.dim() != body.dim() {
                return Err(Error::DimensionMismatch {
                    expected: body.dim(),
                    found: v.dim(),
                });
            }
        }
        let rank = affine_rank(&vertices);
        if rank + 1 != vertices.len() {
            return Err(Error::DegenerateSimplex(format!(
                "{} vertices span an affine subspace of dimension {rank}",
                vertices.len()
            )));
        }
        let k = vertices.len();
        let mut distances = vec![vec![0.0; k]; k];
        let mut diameter = 0.0f64;
        for i in 0..k {
            for j in (i + 1)..k {
                let d = body.eval(&sub(&vertices[i], &vertices[j]));
                distances[i][j] = d;
                distances[j][i] = d;
                diameter = diameter.max(d);
            }
        }
        Ok(Self {
            vertices,
            distances,
            diameter,
        })
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn distances(&self) -> &[Vec<f64>] {
        &self.distances
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Affine dimension `k` of a `k`-simplex.
    pub fn affine_dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn centroid(&self) -> Vector {
        centroid(&self.vertices)
    }

    pub fn into_vertices(self) -> Vec<Vector> {
        self.vertices
    }
}

pub(crate) fn centroid(points: &[Vector]) -> Vector {
    let n = points[0].dim();
    let mut c = vec![0.0; n];
    for p in points {
        for (ci, pi) in c.iter_mut().zip(p.iter()) {
            *ci += pi;
        }
    }
    let k = points.len() as f64;
    Vector::from_raw(c.into_iter().map(|x| x / k).collect())
}

/// Dimension of the affine hull, by modified Gram-Schmidt on the edge
/// vectors from the first point.
pub fn affine_rank(points: &[Vector]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, &points[0])).collect();
    let scale = edges
        .iter()
        .map(|e| e.iter().map(|c| c * c).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for e in edges {
        let mut r = e;
        for b in &basis {
            let dot: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= dot * bi;
            }
        }
        let norm = r.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > RANK_TOL * scale {
            basis.push(r.into_iter().map(|c| c / norm).collect());
        }
    }
    basis.len()
}
