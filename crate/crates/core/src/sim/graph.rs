use std::collections::BTreeSet;

use crate::error::{domain_err, Result};
use crate::numerics::{Matrix, Rng};

/// Undirected simple graph; edges stored as `(min, max)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn empty(num_nodes: usize) -> Self {
        Self { num_nodes, edges: BTreeSet::new() }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Returns false for self-loops, duplicates and out-of-range nodes.
    pub fn add_edge(&mut self, a: usize, b: usize) -> bool {
        if a == b || a >= self.num_nodes || b >= self.num_nodes {
            return false;
        }
        self.edges.insert((a.min(b), a.max(b)))
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> bool {
        self.edges.remove(&(a.min(b), a.max(b)))
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == node || b == node).count()
    }

    pub fn adjacency(&self) -> Matrix {
        let mut m = Matrix::zeros(self.num_nodes, self.num_nodes);
        for &(a, b) in &self.edges {
            m.set_block(a, b, &Matrix::identity(1));
            m.set_block(b, a, &Matrix::identity(1));
        }
        m
    }
}

/// Small-world graph: ring lattice of even degree `k`, then each lattice edge `(i, i+j)` is
/// rewired with probability `p` to `(i, m)` for `m` drawn uniformly among nodes not yet
/// adjacent to `i`. Edges with no free target are kept.
pub fn watts_strogatz(num_nodes: usize, k: usize, p: f64, rng: &mut Rng) -> Result<Graph> {
    if k % 2 != 0 || k == 0 || k >= num_nodes {
        return domain_err(format!("degree k = {k} must be even, positive and below C = {num_nodes}"));
    }
    if !(0.0..=1.0).contains(&p) {
        return domain_err(format!("rewiring probability {p} outside [0, 1]"));
    }
    let mut g = Graph::empty(num_nodes);
    for i in 0..num_nodes {
        for j in 1..=k / 2 {
            g.add_edge(i, (i + j) % num_nodes);
        }
    }
    for j in 1..=k / 2 {
        for i in 0..num_nodes {
            let far = (i + j) % num_nodes;
            if !g.has_edge(i, far) || !rng.bernoulli(p) {
                continue;
            }
            let free: Vec<usize> = (0..num_nodes).filter(|&m| m != i && !g.has_edge(i, m)).collect();
            if free.is_empty() {
                continue;
            }
            let m = free[rng.below(free.len())];
            g.remove_edge(i, far);
            g.add_edge(i, m);
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_when_no_rewiring() {
        let g = watts_strogatz(8, 2, 0.0, &mut Rng::new(0)).unwrap();
        assert_eq!(g.edge_count(), 8);
        assert!((0..8).all(|i| g.degree(i) == 2 && g.has_edge(i, (i + 1) % 8)));
    }

    #[test]
    fn edge_count_preserved() {
        for seed in 0..100 {
            let mut rng = Rng::new(seed);
            let p = rng.next_f64();
            let g = watts_strogatz(30, 4, p, &mut rng).unwrap();
            assert_eq!(g.edge_count(), 60);
            assert!(g.edges().all(|(a, b)| a < b));
        }
    }

    #[test]
    fn parameter_errors() {
        let mut rng = Rng::new(0);
        assert!(watts_strogatz(8, 3, 0.1, &mut rng).is_err());
        assert!(watts_strogatz(4, 4, 0.1, &mut rng).is_err());
        assert!(watts_strogatz(8, 2, 1.5, &mut rng).is_err());
    }

    #[test]
    fn adjacency_is_symmetric() {
        let g = watts_strogatz(64, 4, 0.1, &mut Rng::new(5)).unwrap();
        let a = g.adjacency();
        assert!(a.is_symmetric(0.0));
        assert_eq!(a.as_slice().iter().sum::<f64>(), 2.0 * 128.0);
    }
}
