//! Directed graphs and the incidence-type matrices from which the rigidity
//! matrices are assembled.
//!
//! Edge order is significant everywhere: edge `k` of a graph indexes row `k`
//! of every matrix derived from it, and entry `k` of every bearing vector.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// A finite directed graph without self-loops or duplicate directed edges.
///
/// Each edge is an ordered pair `(head, tail)`: the head vertex carries the
/// sensor and measures the bearing of the tail vertex. The reversed pair is a
/// distinct edge and may coexist with the original.
///
/// Immutable after construction; cheap to clone and safe to share across
/// threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl DirectedGraph {
    /// Builds a validated graph. Edge `k` of the result is the `k`-th pair in
    /// `edges`, in the order given.
    ///
    /// Errors distinguish self-loops, out-of-range indices, and duplicate
    /// directed edges, and identify the offending edge index.
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::EmptyGraph);
        }
        for (k, &(head, tail)) in edges.iter().enumerate() {
            if head >= n_vertices || tail >= n_vertices {
                return Err(Error::EdgeIndexOutOfRange {
                    edge: k,
                    head,
                    tail,
                    n_vertices,
                });
            }
            if head == tail {
                return Err(Error::SelfLoop {
                    edge: k,
                    vertex: head,
                });
            }
            if edges[..k].contains(&(head, tail)) {
                return Err(Error::DuplicateEdge {
                    edge: k,
                    head,
                    tail,
                });
            }
        }
        Ok(Self { n_vertices, edges })
    }

    /// The complete directed graph on `n >= 2` vertices: all `n(n-1)` ordered
    /// pairs, in lexicographic `(head, tail)` order.
    pub fn complete(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewVertices { n, required: 2 });
        }
        let mut edges = Vec::with_capacity(n * (n - 1));
        for head in 0..n {
            for tail in 0..n {
                if tail != head {
                    edges.push((head, tail));
                }
            }
        }
        Ok(Self { n_vertices: n, edges })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// The `(head, tail)` pair of edge `k`.
    pub fn edge(&self, k: usize) -> Result<(usize, usize)> {
        self.edges.get(k).copied().ok_or(Error::EdgeOutOfRange {
            edge: k,
            n_edges: self.edges.len(),
        })
    }

    /// Number of edges whose head is `v` — how many bearings agent `v`
    /// measures.
    pub fn out_degree(&self, v: usize) -> Result<usize> {
        if v >= self.n_vertices {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                n_vertices: self.n_vertices,
            });
        }
        Ok(self.edges.iter().filter(|&&(head, _)| head == v).count())
    }

    /// The smallest out-degree over all vertices. Rigidity requires this to
    /// be at least 1: an agent that measures nothing is free to spin.
    pub fn min_out_degree(&self) -> usize {
        (0..self.n_vertices)
            .map(|v| self.edges.iter().filter(|&&(head, _)| head == v).count())
            .min()
            .unwrap_or(0)
    }

    /// Signed incidence matrix, `n_vertices x n_edges`: entry `(i, k)` is
    /// `+1` if vertex `i` is the head of edge `k`, `-1` if it is the tail,
    /// `0` otherwise. Every column sums to zero.
    pub fn incidence_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_vertices, self.edges.len());
        for (k, &(head, tail)) in self.edges.iter().enumerate() {
            m[(head, k)] = 1.0;
            m[(tail, k)] = -1.0;
        }
        m
    }

    /// Out-incidence matrix `E-bar`, `n_vertices x n_edges`: entry `(i, k)`
    /// is `1` iff vertex `i` is the head of edge `k`. Row `i` sums to the
    /// out-degree of `i`; every column sums to one, so `E-bar^T * 1 = 1`.
    pub fn out_incidence_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_vertices, self.edges.len());
        for (k, &(head, _)) in self.edges.iter().enumerate() {
            m[(head, k)] = 1.0;
        }
        m
    }
}
