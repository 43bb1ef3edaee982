//! Seeded random frameworks for property tests, sweeps and benchmarks.
//!
//! All draws go through the caller's RNG in a fixed order, so a given seed
//! reproduces the same framework on every platform. Edge sets are kept in
//! draw order in a `Vec` (membership checks by linear scan) — iteration
//! order must be deterministic, which rules out hashing collections.

use nalgebra::Vector2;
use rand::Rng;
use std::f64::consts::PI;

use crate::framework::Angle;
use crate::{DirectedGraph, Result, Se2Framework};

/// Side of the square positions are drawn from (`[-EXTENT, EXTENT]^2`).
const EXTENT: f64 = 2.0;
/// Minimum pairwise distance enforced between drawn positions, so edge
/// lengths (and hence `1/l^2` matrix entries) stay well conditioned.
const MIN_SEPARATION: f64 = 0.3;

/// Draws `n` positions in the square with pairwise separation at least
/// [`MIN_SEPARATION`], by rejection.
fn random_positions<R: Rng>(rng: &mut R, n: usize) -> Vec<Vector2<f64>> {
    let mut positions: Vec<Vector2<f64>> = Vec::with_capacity(n);
    while positions.len() < n {
        let candidate = Vector2::new(
            rng.random_range(-EXTENT..=EXTENT),
            rng.random_range(-EXTENT..=EXTENT),
        );
        if positions
            .iter()
            .all(|p| (p - candidate).norm() >= MIN_SEPARATION)
        {
            positions.push(candidate);
        }
    }
    positions
}

fn random_attitudes<R: Rng>(rng: &mut R, n: usize) -> Vec<Angle> {
    (0..n).map(|_| Angle::new(rng.random_range(-PI..PI))).collect()
}

/// Random directed graph on `n >= 2` vertices. With `min_out_degree_one`,
/// every vertex first gets one out-edge to a random other vertex; then a
/// random number of extra distinct edges is sprinkled on top.
fn random_graph<R: Rng>(rng: &mut R, n: usize, min_out_degree_one: bool) -> DirectedGraph {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    if min_out_degree_one {
        for head in 0..n {
            let mut tail = rng.random_range(0..n - 1);
            if tail >= head {
                tail += 1;
            }
            edges.push((head, tail));
        }
    }
    let max_edges = n * (n - 1);
    let target = rng.random_range(edges.len().max(1)..=max_edges);
    let mut attempts = 0;
    while edges.len() < target && attempts < 20 * max_edges {
        attempts += 1;
        let head = rng.random_range(0..n);
        let mut tail = rng.random_range(0..n - 1);
        if tail >= head {
            tail += 1;
        }
        if !edges.contains(&(head, tail)) {
            edges.push((head, tail));
        }
    }
    if edges.is_empty() {
        // Guarantee a nonempty graph even when no base edges were requested.
        edges.push((0, rng.random_range(1..n)));
    }
    DirectedGraph::new(n, edges).expect("generated edges are valid by construction")
}

/// Random framework on `n >= 2` agents: positions uniform in the square
/// with a separation floor, attitudes uniform in `(-pi, pi]`, and a random
/// directed graph (with one guaranteed out-edge per vertex when
/// `min_out_degree_one` is set).
pub fn random_framework<R: Rng>(
    rng: &mut R,
    n: usize,
    min_out_degree_one: bool,
) -> Result<Se2Framework> {
    let graph = random_graph(rng, n, min_out_degree_one);
    let positions = random_positions(rng, n);
    let attitudes = random_attitudes(rng, n);
    Se2Framework::new(graph, positions, attitudes)
}

/// Random framework on `n >= 2` agents in which one chosen vertex has
/// out-degree zero (it is seen by at least one other agent but measures
/// nothing itself). Returns the framework and the silent vertex.
pub fn random_framework_with_silent_vertex<R: Rng>(
    rng: &mut R,
    n: usize,
) -> Result<(Se2Framework, usize)> {
    let base = random_graph(rng, n, true);
    let silent = rng.random_range(0..n);
    let mut edges: Vec<(usize, usize)> = base
        .edges()
        .iter()
        .copied()
        .filter(|&(head, _)| head != silent)
        .collect();
    // Make sure somebody watches the silent vertex, and the graph is nonempty.
    if !edges.iter().any(|&(_, tail)| tail == silent) {
        let mut watcher = rng.random_range(0..n - 1);
        if watcher >= silent {
            watcher += 1;
        }
        let e = (watcher, silent);
        if !edges.contains(&e) {
            edges.push(e);
        }
    }
    let graph = DirectedGraph::new(n, edges)?;
    let positions = random_positions(rng, n);
    let attitudes = random_attitudes(rng, n);
    Ok((Se2Framework::new(graph, positions, attitudes)?, silent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixed_seed_reproduces_framework() {
        let a = random_framework(&mut ChaCha8Rng::seed_from_u64(11), 5, true).unwrap();
        let b = random_framework(&mut ChaCha8Rng::seed_from_u64(11), 5, true).unwrap();
        assert_eq!(a, b);
        let c = random_framework(&mut ChaCha8Rng::seed_from_u64(12), 5, true).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn min_out_degree_is_honored() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let n = rng.random_range(2..=8);
            let f = random_framework(&mut rng, n, true).unwrap();
            assert!(f.graph().min_out_degree() >= 1);
        }
    }

    #[test]
    fn positions_respect_bounds_and_separation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_framework(&mut rng, 8, false).unwrap();
        let p = f.positions();
        for pi in p {
            assert!(pi.x.abs() <= EXTENT && pi.y.abs() <= EXTENT);
        }
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                assert!((p[i] - p[j]).norm() >= MIN_SEPARATION);
            }
        }
    }

    #[test]
    fn silent_vertex_has_no_out_edges_but_is_watched() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let n = rng.random_range(2..=8);
            let (f, silent) = random_framework_with_silent_vertex(&mut rng, n).unwrap();
            assert_eq!(f.graph().out_degree(silent).unwrap(), 0);
            assert!(f.graph().edges().iter().any(|&(_, tail)| tail == silent));
            assert!(f.n_edges() >= 1);
        }
    }
}
