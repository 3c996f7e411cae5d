//! Dense indexing of directed edge states on a graph with truncated tails.
//!
//! Order is by `(edge, direction)`: internal edges by id, then entry-tail
//! edges outward, then exit-tail edges outward. Each undirected edge `k`
//! occupies indices `2k` (forward) and `2k + 1` (reverse), so reversal is
//! `i ^ 1`. Forward means the declared `a -> b` for internal edges and
//! left-to-right (entry tail toward the graph, exit tail away from it) for
//! tail edges.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{EdgeRef, EdgeState, Endpoint, Graph, Side};

/// How much of each semi-infinite tail is materialized.
///
/// The outermost tail vertex is a dead end that reflects with phase +1.
/// A run of `n` steps starting at tail depth `k` never reaches it when
/// `truncation_length >= n + k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TailConfig {
    truncation_length: usize,
}

impl TailConfig {
    pub fn new(truncation_length: usize) -> Result<Self> {
        if truncation_length == 0 {
            return Err(Error::Graph("tail truncation length must be positive".into()));
        }
        Ok(TailConfig { truncation_length })
    }

    /// Shortest truncation that keeps a run of `steps` steps away from the boundary.
    pub fn for_steps(steps: usize) -> Self {
        TailConfig {
            truncation_length: steps + 1,
        }
    }

    /// Number of tail vertices (equivalently, tail edges) materialized per side.
    pub fn truncation_length(&self) -> usize {
        self.truncation_length
    }
}

/// Bijection between edge states and `0..dim`.
#[derive(Debug, Clone)]
pub struct EdgeBasis {
    states: Vec<EdgeState>,
    index: HashMap<EdgeState, usize>,
    internal_edges: usize,
    tails: TailConfig,
}

fn inner_endpoint(graph: &Graph, side: Side, k: u32) -> Endpoint {
    if k == 0 {
        Endpoint::Vertex(graph.attachment(side))
    } else {
        Endpoint::Tail(side, k)
    }
}

/// Builds the edge basis for `graph` with both tails truncated to `tails`.
pub fn build_edge_basis(graph: &Graph, tails: TailConfig) -> EdgeBasis {
    let len = tails.truncation_length as u32;
    let mut states = Vec::with_capacity(2 * (graph.edges().len() + 2 * len as usize));
    for e in graph.edges() {
        let forward = EdgeState::new(
            Endpoint::Vertex(e.a),
            Endpoint::Vertex(e.b),
            EdgeRef::Internal(e.id.clone()),
        );
        states.push(forward.clone());
        states.push(forward.reversed());
    }
    for k in 0..len {
        let inner = inner_endpoint(graph, Side::Entry, k);
        let outer = Endpoint::Tail(Side::Entry, k + 1);
        let forward = EdgeState::new(outer, inner, EdgeRef::Tail(Side::Entry, k));
        states.push(forward.clone());
        states.push(forward.reversed());
    }
    for k in 0..len {
        let inner = inner_endpoint(graph, Side::Exit, k);
        let outer = Endpoint::Tail(Side::Exit, k + 1);
        let forward = EdgeState::new(inner, outer, EdgeRef::Tail(Side::Exit, k));
        states.push(forward.clone());
        states.push(forward.reversed());
    }
    let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    EdgeBasis {
        states,
        index,
        internal_edges: graph.edges().len(),
        tails,
    }
}

impl EdgeBasis {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Number of internal directed edge states; they occupy `0..internal_dim()`.
    pub fn internal_dim(&self) -> usize {
        2 * self.internal_edges
    }

    pub fn tails(&self) -> TailConfig {
        self.tails
    }

    pub fn state(&self, i: usize) -> &EdgeState {
        &self.states[i]
    }

    pub fn states(&self) -> &[EdgeState] {
        &self.states
    }

    pub fn index_of(&self, s: &EdgeState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn require(&self, s: &EdgeState) -> Result<usize> {
        self.index_of(s).ok_or_else(|| Error::UnknownEdge(s.to_string()))
    }

    pub fn reverse_index(&self, i: usize) -> usize {
        i ^ 1
    }

    pub fn is_internal(&self, i: usize) -> bool {
        i < self.internal_dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn diamond_basis_size() {
        let g = fixtures::diamond();
        let b = build_edge_basis(&g, TailConfig::new(3).unwrap());
        assert_eq!(b.dim(), 20);
        assert_eq!(b.internal_dim(), 8);
    }

    #[test]
    fn single_edge_basis_size() {
        let g = fixtures::line(1);
        let b = build_edge_basis(&g, TailConfig::new(1).unwrap());
        assert_eq!(b.dim(), 6);
    }

    #[test]
    fn zero_truncation_rejected() {
        assert!(TailConfig::new(0).is_err());
    }

    #[test]
    fn index_is_bijective_and_reversal_is_involution() {
        let g = fixtures::diamond();
        let b = build_edge_basis(&g, TailConfig::new(4).unwrap());
        for i in 0..b.dim() {
            assert_eq!(b.index_of(b.state(i)), Some(i));
            let r = b.reverse_index(i);
            assert_eq!(b.state(r), &b.state(i).reversed());
            assert_eq!(b.reverse_index(r), i);
        }
    }

    #[test]
    fn named_tail_states_are_in_basis() {
        let g = fixtures::diamond();
        let b = build_edge_basis(&g, TailConfig::new(2).unwrap());
        let inc = b.index_of(&g.entry_incoming()).unwrap();
        let out = b.index_of(&g.exit_outgoing()).unwrap();
        assert_eq!(inc, 8);
        assert_eq!(out, 12);
        assert_eq!(b.state(inc).to_string(), "L1>0");
        assert_eq!(b.state(out).to_string(), "2>R1");
    }
}
