//! Communication topologies, their Laplacian algebra and the spectral
//! decomposition of the random-walk Laplacian `D⁻¹L`.
//!
//! The decomposition is always computed on the symmetric normalized Laplacian
//! `𝓛 = D^{-1/2} L D^{-1/2}` and mapped back through `D^{-1/2}`, so the
//! eigenvalues are real and sorted and `V⁻¹` is available in closed form.
//!
//! For repeated eigenvalues (complete graphs, for instance) any orthonormal
//! basis of `𝓛`'s eigenspace is accepted. Downstream code only relies on the
//! eigenvalues, the zero-mode column and the pair `(V, V⁻¹)` being consistent.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("a topology needs at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("custom edge list is empty")]
    EmptyEdgeList,
    #[error("edge ({0}, {1}) references an agent outside 0..{2}")]
    IndexOutOfRange(usize, usize, usize),
    #[error("edge ({0}, {0}) is a self-loop")]
    SelfLoop(usize),
    #[error("agent {0} has no neighbors; the degree matrix is not invertible")]
    IsolatedVertex(usize),
    #[error("graph is disconnected (second eigenvalue {0:e} is not positive)")]
    Disconnected(f64),
}

/// Requested graph family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologyKind {
    Complete,
    Path,
    Ring,
    Custom { edges: Vec<(usize, usize)> },
}

/// Undirected simple graph over agents `0..n_agents`.
///
/// Edges are stored once, as `(min, max)` pairs in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    n_agents: usize,
    edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn build(n: usize, kind: &TopologyKind) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewAgents(n));
        }
        let raw: Vec<(usize, usize)> = match kind {
            TopologyKind::Complete => (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect(),
            TopologyKind::Path => (0..n - 1).map(|i| (i, i + 1)).collect(),
            TopologyKind::Ring => (0..n).map(|i| (i, (i + 1) % n)).collect(),
            TopologyKind::Custom { edges } => {
                if edges.is_empty() {
                    return Err(GraphError::EmptyEdgeList);
                }
                edges.clone()
            }
        };
        Self::from_edges(n, raw)
    }

    /// Builds a graph from an arbitrary edge list, normalizing orientation and
    /// dropping duplicates.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewAgents(n));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::IndexOutOfRange(a, b, n));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self {
            n_agents: n,
            edges: set.into_iter().collect(),
        })
    }

    /// Edgeless graph, e.g. for a lone agent.
    pub fn empty(n: usize) -> Self {
        Self {
            n_agents: n,
            edges: Vec::new(),
        }
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor lists.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        neighbor_lists(self.n_agents, self.edges.iter().copied())
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors().iter().map(Vec::len).collect()
    }

    /// Connectivity by breadth-first reachability from agent 0.
    pub fn is_connected(&self) -> bool {
        let nbrs = self.neighbors();
        let mut seen = vec![false; self.n_agents];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &nbrs[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Same graph with agent `i` renamed to `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self, GraphError> {
        Self::from_edges(self.n_agents, self.edges.iter().map(|&(a, b)| (perm[a], perm[b])))
    }

    /// Per-round neighbor sets with each edge independently dropped with
    /// probability `drop_probability`.
    ///
    /// The realization depends only on `(seed, step_index)`.
    pub fn realize_links(&self, drop_probability: f64, seed: u64, step_index: u64) -> Vec<Vec<usize>> {
        if drop_probability <= 0.0 {
            return self.neighbors();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(step_index);
        let surviving: Vec<(usize, usize)> = self
            .edges
            .iter()
            .copied()
            .filter(|_| rng.random::<f64>() >= drop_probability)
            .collect();
        neighbor_lists(self.n_agents, surviving)
    }
}

fn neighbor_lists(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); n];
    for (a, b) in edges {
        out[a].push(b);
        out[b].push(a);
    }
    for list in &mut out {
        list.sort_unstable();
    }
    out
}

/// `L = D − A`, the degree matrix `D` and `𝓛 = D^{-1/2} L D^{-1/2}`.
#[derive(Debug, Clone)]
pub struct LaplacianMatrices<T: Real> {
    pub laplacian: DMatrix<T>,
    pub degree: DMatrix<T>,
    pub normalized: DMatrix<T>,
}

impl<T: Real> LaplacianMatrices<T> {
    pub fn new(topology: &Topology) -> Result<Self, GraphError> {
        let n = topology.n_agents();
        let degrees = topology.degrees();
        if let Some(v) = degrees.iter().position(|&d| d == 0) {
            return Err(GraphError::IsolatedVertex(v));
        }
        let mut laplacian = DMatrix::<T>::zeros(n, n);
        for &(a, b) in topology.edges() {
            laplacian[(a, b)] = -T::one();
            laplacian[(b, a)] = -T::one();
        }
        for (i, &d) in degrees.iter().enumerate() {
            laplacian[(i, i)] = T::lit(d as f64);
        }
        let degree = DMatrix::from_diagonal(&laplacian.diagonal());
        let inv_sqrt: Vec<T> = degrees.iter().map(|&d| T::one() / T::lit(d as f64).sqrt()).collect();
        let normalized = DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * laplacian[(i, j)] * inv_sqrt[j]);
        Ok(Self {
            laplacian,
            degree,
            normalized,
        })
    }

    /// The random-walk Laplacian `D⁻¹L`.
    pub fn random_walk(&self) -> DMatrix<T> {
        let n = self.laplacian.nrows();
        DMatrix::from_fn(n, n, |i, j| self.laplacian[(i, j)] / self.degree[(i, i)])
    }
}

/// Eigen-decomposition `D⁻¹L = V Λ V⁻¹` of a connected graph.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<T: Real> {
    /// Ascending; the first entry is exactly zero.
    pub eigenvalues: Vec<T>,
    /// Column `j` pairs with `eigenvalues[j]`; column 0 is the all-ones vector.
    pub vectors: DMatrix<T>,
    pub inverse: DMatrix<T>,
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn new(topology: &Topology) -> Result<Self, GraphError> {
        let mats = LaplacianMatrices::<T>::new(topology)?;
        let n = topology.n_agents();
        let degrees: Vec<T> = topology.degrees().into_iter().map(|d| T::lit(d as f64)).collect();
        let sym = (&mats.normalized + mats.normalized.transpose()) * T::lit(0.5);
        let eig = SymmetricEigen::new(sym);

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .expect("eigenvalues are finite")
        });
        let mut eigenvalues: Vec<T> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut basis = DMatrix::<T>::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);

        let tol = T::spectral_tol();
        if eigenvalues[1] <= tol {
            return Err(GraphError::Disconnected(eigenvalues[1].as_f64()));
        }

        // The null vector of 𝓛 is D^{1/2}·1; use it exactly so that column 0 of
        // V is exactly the all-ones vector.
        let total: T = degrees.iter().fold(T::zero(), |s, &d| s + d);
        let sigma = total.sqrt();
        for i in 0..n {
            basis[(i, 0)] = degrees[i].sqrt() / sigma;
        }
        eigenvalues[0] = T::zero();

        let mut vectors = DMatrix::<T>::zeros(n, n);
        let mut inverse = DMatrix::<T>::zeros(n, n);
        for j in 0..n {
            let mut col: Vec<T> = (0..n).map(|i| basis[(i, j)] / degrees[i].sqrt()).collect();
            let mut scale = T::one();
            if j == 0 {
                scale = sigma;
                col.iter_mut().for_each(|c| *c = T::one());
            } else if leading_entry(&col) < T::zero() {
                scale = -T::one();
                col.iter_mut().for_each(|c| *c = -*c);
            }
            for i in 0..n {
                vectors[(i, j)] = col[i];
                // V⁻¹ = S⁻¹ Uᵀ D^{1/2} with S the column scaling applied above.
                inverse[(j, i)] = basis[(i, j)] * degrees[i].sqrt() / scale;
            }
        }

        Ok(Self {
            eigenvalues,
            vectors,
            inverse,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `V Λ V⁻¹`.
    pub fn reconstruct(&self) -> DMatrix<T> {
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.eigenvalues.clone()));
        &self.vectors * lambda * &self.inverse
    }

    /// Max-abs residual `‖VΛV⁻¹ − D⁻¹L‖_max`.
    pub fn reconstruction_residual(&self, topology: &Topology) -> Result<T, GraphError> {
        let rw = LaplacianMatrices::<T>::new(topology)?.random_walk();
        Ok((self.reconstruct() - rw).amax())
    }
}

/// Entry of largest magnitude; the first such index wins near-ties so the
/// sign convention is stable under rounding.
fn leading_entry<T: Real>(col: &[T]) -> T {
    let max = col.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    let cutoff = max * (T::one() - T::lit(1e-6));
    col.iter().copied().find(|c| c.abs() >= cutoff).unwrap_or_else(T::zero)
}
