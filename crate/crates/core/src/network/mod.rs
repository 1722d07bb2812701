//! Euclidean embedded reaction networks and mass-action systems.
//!
//! A network is a directed graph whose vertices are points of ℝⁿ. Vertex
//! coordinates are arbitrary reals; they are compared for distinctness with
//! exact equality, never by tolerance.

mod format;

pub use format::{parse_network, parse_number, serialize_network};

use std::collections::BTreeMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{CrnError, Result};
use crate::linalg::{self, Matrix};

/// Directed graph embedded in ℝⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    dimension: usize,
    vertices: Vec<Vec<f64>>,
    edges: Vec<(usize, usize)>,
}

impl Network {
    pub fn new(dimension: usize, vertices: Vec<Vec<f64>>, edges: Vec<(usize, usize)>) -> Result<Self> {
        if dimension == 0 {
            return Err(CrnError::InvalidNetwork("dimension must be positive".into()));
        }
        let mut vertices = vertices;
        for (i, v) in vertices.iter_mut().enumerate() {
            if v.len() != dimension {
                return Err(CrnError::InvalidNetwork(format!(
                    "vertex {i} has {} coordinates, expected {dimension}",
                    v.len()
                )));
            }
            if let Some(c) = v.iter().position(|x| !x.is_finite()) {
                return Err(CrnError::InvalidNetwork(format!(
                    "vertex {i} coordinate {c} is not finite"
                )));
            }
            // -0.0 and 0.0 are the same point.
            for x in v.iter_mut() {
                if *x == 0.0 {
                    *x = 0.0;
                }
            }
        }
        for i in 0..vertices.len() {
            for j in 0..i {
                if vertices[i] == vertices[j] {
                    return Err(CrnError::InvalidNetwork(format!(
                        "vertices {j} and {i} coincide at {:?}",
                        vertices[i]
                    )));
                }
            }
        }
        for (k, &(i, j)) in edges.iter().enumerate() {
            if i >= vertices.len() || j >= vertices.len() {
                return Err(CrnError::InvalidNetwork(format!(
                    "edge {k} ({i} -> {j}) references a missing vertex"
                )));
            }
            if i == j {
                return Err(CrnError::InvalidNetwork(format!("edge {k} is a self-loop at {i}")));
            }
            if edges[..k].contains(&(i, j)) {
                return Err(CrnError::InvalidNetwork(format!("edge {k} ({i} -> {j}) is duplicated")));
            }
        }
        Ok(Self {
            dimension,
            vertices,
            edges,
        })
    }

    /// Complete directed graph on the given points.
    pub fn complete(dimension: usize, vertices: Vec<Vec<f64>>) -> Result<Self> {
        let m = vertices.len();
        let edges = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        Self::new(dimension, vertices, edges)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn find_vertex(&self, y: &[f64]) -> Option<usize> {
        self.vertices.iter().position(|v| v.as_slice() == y)
    }

    pub fn edge_index(&self, from: usize, to: usize) -> Option<usize> {
        self.edges.iter().position(|&e| e == (from, to))
    }

    /// Reaction vector `y_j − y_i` of edge `k`.
    pub fn reaction_vector(&self, k: usize) -> Vec<f64> {
        let (i, j) = self.edges[k];
        linalg::sub(&self.vertices[j], &self.vertices[i])
    }

    /// Indices of vertices with at least one outgoing edge, ascending.
    pub fn source_vertices(&self) -> Vec<usize> {
        let mut is_source = vec![false; self.vertices.len()];
        for &(i, _) in &self.edges {
            is_source[i] = true;
        }
        (0..self.vertices.len()).filter(|&i| is_source[i]).collect()
    }

    fn digraph(&self) -> DiGraph<(), ()> {
        let mut g = DiGraph::new();
        let nodes: Vec<_> = (0..self.vertices.len()).map(|_| g.add_node(())).collect();
        for &(i, j) in &self.edges {
            g.add_edge(nodes[i], nodes[j], ());
        }
        g
    }

    /// Strongly connected component label of every vertex.
    pub fn scc_labels(&self) -> Vec<usize> {
        let mut label = vec![0; self.vertices.len()];
        for (c, comp) in tarjan_scc(&self.digraph()).into_iter().enumerate() {
            for node in comp {
                label[node.index()] = c;
            }
        }
        label
    }

    /// True iff every linkage class is strongly connected, i.e. every edge
    /// joins two vertices of the same strongly connected component.
    pub fn is_weakly_reversible(&self) -> bool {
        let label = self.scc_labels();
        self.edges.iter().all(|&(i, j)| label[i] == label[j])
    }

    pub fn is_reversible(&self) -> bool {
        self.edges.iter().all(|&(i, j)| self.edges.contains(&(j, i)))
    }

    /// Connected components of the underlying undirected graph, each sorted,
    /// ordered by smallest member. Isolated vertices are singletons.
    pub fn linkage_classes(&self) -> Vec<Vec<usize>> {
        let m = self.vertices.len();
        let mut uf = UnionFind::<usize>::new(m);
        for &(i, j) in &self.edges {
            uf.union(i, j);
        }
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..m {
            classes.entry(uf.find(v)).or_default().push(v);
        }
        let mut out: Vec<Vec<usize>> = classes.into_values().collect();
        out.sort_by_key(|c| c[0]);
        out
    }

    /// `n × R` matrix whose column `k` is the reaction vector of edge `k`.
    pub fn stoichiometric_matrix(&self) -> Matrix {
        Matrix::from_fn(self.dimension, self.edges.len(), |r, k| {
            let (i, j) = self.edges[k];
            self.vertices[j][r] - self.vertices[i][r]
        })
    }

    /// `n × R` matrix whose column `k` is the source vertex of edge `k`.
    pub fn source_matrix(&self) -> Matrix {
        Matrix::from_fn(self.dimension, self.edges.len(), |r, k| {
            self.vertices[self.edges[k].0][r]
        })
    }

    pub fn stoichiometric_subspace(&self) -> SubspaceBasis {
        SubspaceBasis {
            dimension: self.dimension,
            vectors: linalg::column_space(&self.stoichiometric_matrix()),
        }
    }

    /// Orthonormal basis of S⊥.
    pub fn conservation_laws(&self) -> SubspaceBasis {
        let s = self.stoichiometric_matrix();
        SubspaceBasis {
            dimension: self.dimension,
            vectors: linalg::nullspace(&s.transpose()),
        }
    }

    /// Embeds the network into ℝ^`dimension` by appending zero coordinates.
    pub fn pad_dimension(&self, dimension: usize) -> Result<Self> {
        if dimension < self.dimension {
            return Err(CrnError::DimensionMismatch {
                expected: self.dimension,
                found: dimension,
            });
        }
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                let mut p = v.clone();
                p.resize(dimension, 0.0);
                p
            })
            .collect();
        Self::new(dimension, vertices, self.edges.clone())
    }

    /// Subnetwork on the same vertex list restricted to the given edges.
    pub fn with_edges(&self, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(self.dimension, self.vertices.clone(), edges)
    }
}

/// A network together with one positive rate constant per edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassActionSystem {
    network: Network,
    rates: Vec<f64>,
}

impl MassActionSystem {
    pub fn new(network: Network, rates: Vec<f64>) -> Result<Self> {
        if rates.len() != network.num_edges() {
            return Err(CrnError::DimensionMismatch {
                expected: network.num_edges(),
                found: rates.len(),
            });
        }
        if let Some(k) = rates.iter().position(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(CrnError::InvalidNetwork(format!(
                "rate of edge {k} is {}, rates must be finite and positive",
                rates[k]
            )));
        }
        Ok(Self { network, rates })
    }

    /// Convenience constructor from raw coordinates and `(from, to, rate)` triples.
    pub fn from_parts(dimension: usize, vertices: Vec<Vec<f64>>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let network = Network::new(dimension, vertices, edges.iter().map(|&(i, j, _)| (i, j)).collect())?;
        Self::new(network, edges.iter().map(|e| e.2).collect())
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn dimension(&self) -> usize {
        self.network.dimension
    }

    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.network.edge_index(from, to).map_or(0.0, |k| self.rates[k])
    }

    pub fn with_rates(&self, rates: Vec<f64>) -> Result<Self> {
        Self::new(self.network.clone(), rates)
    }

    /// `w_i = Σ_j κ_ij (y_j − y_i)` for every source vertex `i`.
    pub fn net_reaction_vectors(&self) -> NetReactionVectors {
        let n = self.network.dimension;
        let mut map: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (k, &(i, j)) in self.network.edges.iter().enumerate() {
            let w = map.entry(i).or_insert_with(|| vec![0.0; n]);
            let (yi, yj) = (&self.network.vertices[i], &self.network.vertices[j]);
            for r in 0..n {
                w[r] += self.rates[k] * (yj[r] - yi[r]);
            }
        }
        NetReactionVectors { dimension: n, vectors: map }
    }
}

/// Net reaction vectors keyed by source-vertex index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetReactionVectors {
    dimension: usize,
    vectors: BTreeMap<usize, Vec<f64>>,
}

impl NetReactionVectors {
    pub fn new(dimension: usize, vectors: BTreeMap<usize, Vec<f64>>) -> Result<Self> {
        for (i, v) in &vectors {
            if v.len() != dimension {
                return Err(CrnError::InvalidNetwork(format!(
                    "net reaction vector of vertex {i} has length {}",
                    v.len()
                )));
            }
        }
        Ok(Self { dimension, vectors })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `None` for vertices that are not sources; by convention their net vector is zero.
    pub fn get(&self, i: usize) -> Option<&[f64]> {
        self.vectors.get(&i).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.vectors.iter().map(|(&i, v)| (i, v.as_slice()))
    }

    pub fn sources(&self) -> Vec<usize> {
        self.vectors.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn all_zero(&self) -> bool {
        self.vectors.values().all(|v| v.iter().all(|&x| x == 0.0))
    }
}

/// Orthonormal basis of a linear subspace of ℝⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceBasis {
    pub dimension: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.dimension];
        for b in &self.vectors {
            let c = linalg::dot(b, v);
            for (pi, bi) in p.iter_mut().zip(b) {
                *pi += c * bi;
            }
        }
        p
    }

    /// Distance from `v` to the subspace (2-norm).
    pub fn distance(&self, v: &[f64]) -> f64 {
        linalg::norm2(&linalg::sub(v, &self.project(v)))
    }
}
