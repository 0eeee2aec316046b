use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeshKind {
    Sinh,
    Uniform,
    Custom,
}

/// Nodes `0 = r_0 < r_1 < ... < r_n = r_max` of a radial finite element grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMesh {
    nodes: Vec<f64>,
    kind: MeshKind,
}

impl RadialMesh {
    /// `r_j = sinh(j δξ)` with `δξ = asinh(r_max) / n`: spacing `≈ δξ` near the
    /// origin, growing exponentially towards `r_max`.
    pub fn sinh(n: usize, r_max: f64) -> Result<Self> {
        check(n, r_max)?;
        let dxi = r_max.asinh() / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|j| (j as f64 * dxi).sinh()).collect();
        nodes[n] = r_max;
        Self::from_nodes_kind(nodes, MeshKind::Sinh)
    }

    pub fn uniform(n: usize, r_max: f64) -> Result<Self> {
        check(n, r_max)?;
        let h = r_max / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|j| j as f64 * h).collect();
        nodes[n] = r_max;
        Self::from_nodes_kind(nodes, MeshKind::Uniform)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        Self::from_nodes_kind(nodes, MeshKind::Custom)
    }

    fn from_nodes_kind(nodes: Vec<f64>, kind: MeshKind) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::Config(format!(
                "mesh needs at least 2 elements, got {}",
                nodes.len().saturating_sub(1)
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::Config("first mesh node must be r = 0".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || !nodes[nodes.len() - 1].is_finite() {
            return Err(Error::Config("mesh nodes must be strictly increasing".into()));
        }
        Ok(Self { nodes, kind })
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    /// Number of elements `n` (there are `n + 1` nodes).
    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn widths(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Index `k` of the element `[r_k, r_{k+1}]` containing `r` (clamped).
    pub fn locate(&self, r: f64) -> usize {
        let k = self.nodes.partition_point(|&x| x <= r);
        k.saturating_sub(1).min(self.n_elements() - 1)
    }

    /// Piecewise-linear interpolation of nodal values at `r`.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        assert_eq!(values.len(), self.n_nodes());
        if r >= self.r_max() {
            return values[self.n_elements()];
        }
        let k = self.locate(r);
        let (a, b) = (self.nodes[k], self.nodes[k + 1]);
        let t = ((r - a) / (b - a)).clamp(0.0, 1.0);
        values[k] + t * (values[k + 1] - values[k])
    }

    /// Same mesh with every element split in two at its midpoint.
    pub fn bisected(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(self.r_max());
        Self {
            nodes,
            kind: MeshKind::Custom,
        }
    }
}

fn check(n: usize, r_max: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::Config(format!("mesh element count n must be >= 2, got {n}")));
    }
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::Config(format!("mesh radius r_max must be positive, got {r_max}")));
    }
    Ok(())
}
