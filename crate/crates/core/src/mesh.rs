//! Graded one-dimensional meshes on `(-R, R)` and nodal grid functions with
//! zero extension outside the domain.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh1D {
    pub radius: f64,
    pub nodes: Vec<f64>,
    pub grading_origin: f64,
    pub grading_boundary: f64,
}

/// Builds a mesh symmetric about 0 with `cells` cells.
///
/// Each half `[0, R]` is split at `R/2` (for an even number of half-cells);
/// the inner part clusters as `(k/K)^grading_origin` toward 0 and the outer
/// part as `(k/K)^grading_boundary` toward `R`.
pub fn build_mesh(
    radius: f64,
    cells: usize,
    grading_origin: f64,
    grading_boundary: f64,
) -> Result<Mesh1D> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "R = {radius} must be positive"
        )));
    }
    if !cells.is_multiple_of(2) {
        return Err(Error::InvalidParameter("cells must be even".into()));
    }
    if cells < 16 {
        return Err(Error::InvalidParameter(format!(
            "cells = {cells} below the minimum of 16"
        )));
    }
    if !(grading_origin >= 1.0) || !(grading_boundary >= 1.0) {
        return Err(Error::InvalidParameter("gradings must be >= 1".into()));
    }
    let half = cells / 2;
    let inner = half.div_ceil(2);
    let outer = half - inner;
    let split = radius * inner as f64 / half as f64;

    let mut right = Vec::with_capacity(half + 1);
    for k in 0..=inner {
        right.push(split * (k as f64 / inner as f64).powf(grading_origin));
    }
    for j in 1..=outer {
        let r = (outer - j) as f64 / outer as f64;
        right.push(radius - (radius - split) * r.powf(grading_boundary));
    }
    right[0] = 0.0;
    right[half] = radius;

    let mut nodes = Vec::with_capacity(cells + 1);
    nodes.extend(right.iter().rev().map(|x| -x));
    nodes.extend(right.iter().skip(1).copied());
    let mesh = Mesh1D {
        radius,
        nodes,
        grading_origin,
        grading_boundary,
    };
    mesh.check()?;
    Ok(mesh)
}

impl Mesh1D {
    fn check(&self) -> Result<()> {
        if self.nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "mesh nodes not strictly increasing".into(),
            ));
        }
        if self.interior_count() < 8 {
            return Err(Error::InvalidParameter(
                "fewer than 8 interior nodes".into(),
            ));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn interior_count(&self) -> usize {
        self.nodes.len() - 2
    }

    /// Index of the node at the origin.
    pub fn origin_index(&self) -> usize {
        self.cells() / 2
    }

    pub fn cell_width(&self, e: usize) -> f64 {
        self.nodes[e + 1] - self.nodes[e]
    }

    pub fn min_width(&self) -> f64 {
        (0..self.cells())
            .map(|e| self.cell_width(e))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance to the boundary, `R - |x|`.
    pub fn delta(&self, i: usize) -> f64 {
        self.radius - self.nodes[i].abs()
    }

    /// Lumped mass: integral of each hat function (all nodes).
    pub fn lumped_mass(&self) -> Vec<f64> {
        let n = self.node_count();
        let mut m = vec![0.0; n];
        for e in 0..self.cells() {
            let h = self.cell_width(e);
            m[e] += 0.5 * h;
            m[e + 1] += 0.5 * h;
        }
        m
    }
}

/// Nodal values on a mesh, zero at `-R` and `R`.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub mesh: Arc<Mesh1D>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(mesh: Arc<Mesh1D>) -> Self {
        let n = mesh.node_count();
        GridFunction {
            mesh,
            values: vec![0.0; n],
        }
    }

    /// Samples `f` at interior nodes; boundary values are set to zero.
    pub fn from_fn(mesh: Arc<Mesh1D>, f: impl Fn(f64) -> f64) -> Self {
        let n = mesh.node_count();
        let mut values: Vec<f64> = mesh.nodes.iter().map(|&x| f(x)).collect();
        values[0] = 0.0;
        values[n - 1] = 0.0;
        GridFunction { mesh, values }
    }

    pub fn constant(mesh: Arc<Mesh1D>, c: f64) -> Self {
        Self::from_fn(mesh, |_| c)
    }

    pub fn from_values(mesh: Arc<Mesh1D>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                mesh.node_count(),
                values.len()
            )));
        }
        let mut g = GridFunction { mesh, values };
        let n = g.values.len();
        g.values[0] = 0.0;
        g.values[n - 1] = 0.0;
        Ok(g)
    }

    pub fn from_interior(mesh: Arc<Mesh1D>, interior: &[f64]) -> Self {
        let n = mesh.node_count();
        assert_eq!(interior.len(), n - 2);
        let mut values = Vec::with_capacity(n);
        values.push(0.0);
        values.extend_from_slice(interior);
        values.push(0.0);
        GridFunction { mesh, values }
    }

    pub fn interior(&self) -> &[f64] {
        &self.values[1..self.values.len() - 1]
    }

    pub fn interior_mut(&mut self) -> &mut [f64] {
        let n = self.values.len();
        &mut self.values[1..n - 1]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.mesh.nodes
    }

    pub fn scaled(&self, c: f64) -> Self {
        GridFunction {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Discrete L1 norm with lumped mass.
    pub fn l1_norm(&self) -> f64 {
        self.mesh
            .lumped_mass()
            .iter()
            .zip(&self.values)
            .map(|(m, v)| m * v.abs())
            .sum()
    }

    pub fn l1_distance(&self, other: &GridFunction) -> f64 {
        self.mesh
            .lumped_mass()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(m, (a, b))| m * (a - b).abs())
            .sum()
    }

    pub fn linf_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Minimum over nodes with `lo <= |x| <= hi`.
    pub fn min_on_annulus(&self, lo: f64, hi: f64) -> f64 {
        self.mesh
            .nodes
            .iter()
            .zip(&self.values)
            .filter(|(x, _)| x.abs() >= lo && x.abs() <= hi)
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum over nodes in `[a, b]`.
    pub fn min_on_interval(&self, a: f64, b: f64) -> f64 {
        self.mesh
            .nodes
            .iter()
            .zip(&self.values)
            .filter(|(x, _)| **x >= a && **x <= b)
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_interior(&self) -> f64 {
        self.interior()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Linear interpolation at `x` (zero outside the domain).
    pub fn eval(&self, x: f64) -> f64 {
        let nodes = &self.mesh.nodes;
        if x <= nodes[0] || x >= nodes[nodes.len() - 1] {
            return 0.0;
        }
        let k = nodes.partition_point(|&t| t <= x) - 1;
        let t = (x - nodes[k]) / (nodes[k + 1] - nodes[k]);
        (1.0 - t) * self.values[k] + t * self.values[k + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_mesh_is_equispaced() {
        let m = build_mesh(1.0, 16, 1.0, 1.0).unwrap();
        assert_eq!(m.node_count(), 17);
        for (k, x) in m.nodes.iter().enumerate() {
            assert!((x - (-1.0 + k as f64 / 8.0)).abs() < 1e-15);
        }
        assert_eq!(m.nodes[m.origin_index()], 0.0);
    }

    #[test]
    fn graded_mesh_is_symmetric_and_clustered() {
        let m = build_mesh(1.0, 64, 2.0, 1.0).unwrap();
        let o = m.origin_index();
        assert_eq!(m.nodes[o], 0.0);
        // 32 half-cells, 16 of them on [0, 1/2]
        assert!((m.nodes[o + 1] - 0.5 / 256.0).abs() < 1e-16);
        for k in 0..m.node_count() {
            assert_eq!(m.nodes[k], -m.nodes[m.node_count() - 1 - k]);
        }
    }

    #[test]
    fn rejects_odd_and_bad_radius() {
        let e = build_mesh(1.0, 15, 1.0, 1.0).unwrap_err();
        assert!(e.to_string().contains("cells must be even"));
        assert!(build_mesh(0.0, 16, 1.0, 1.0).is_err());
        assert!(build_mesh(1.0, 16, 0.5, 1.0).is_err());
    }

    #[test]
    fn lumped_mass_sums_to_length() {
        let m = build_mesh(2.0, 32, 2.0, 3.0).unwrap();
        let total: f64 = m.lumped_mass().iter().sum();
        assert!((total - 4.0).abs() < 1e-14);
    }
}
