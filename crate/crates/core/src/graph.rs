//! The graph-with-tails model.
//!
//! A [`Graph`] is a finite undirected multigraph with two distinguished
//! vertices. A semi-infinite line of free vertices (a tail) hangs off each of
//! them. The walker lives on directed edges: every undirected edge carries
//! two [`EdgeState`]s, one per direction of travel.
//!
//! Each vertex owns a coin, an `n x n` unitary over its incident edge slots.
//! Slot order is fixed: the tail slot first (entry and exit vertices only),
//! then internal edges sorted by `(neighbor id, edge id)`. Coin entry
//! `M[c][a]` is the amplitude to leave through slot `c` after arriving
//! through slot `a`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::coin::{make_coin, CoinMatrix, CoinSpec};
use crate::error::{Error, Result};

/// Opaque vertex label.
pub type VertexId = i64;

/// Which tail an object belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Entry,
    Exit,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Entry => Side::Exit,
            Side::Exit => Side::Entry,
        }
    }
}

/// A point an edge can end on: a graph vertex or the `k`-th tail vertex
/// (`k >= 1`, counted outward from the attachment vertex).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    Vertex(VertexId),
    Tail(Side, u32),
}

/// Identifies an undirected edge.
///
/// Tail edge `Tail(side, k)` joins tail vertex `k + 1` to tail vertex `k`,
/// where tail vertex 0 is the attachment vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeRef {
    Internal(String),
    Tail(Side, u32),
}

/// A directed edge `|from, to>`; the basis of the walk's Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeState {
    pub from: Endpoint,
    pub to: Endpoint,
    pub edge: EdgeRef,
}

impl EdgeState {
    pub fn new(from: Endpoint, to: Endpoint, edge: EdgeRef) -> Self {
        EdgeState { from, to, edge }
    }

    pub fn reversed(&self) -> EdgeState {
        EdgeState {
            from: self.to,
            to: self.from,
            edge: self.edge.clone(),
        }
    }

    /// How many tail edges separate this state from the graph (0 for internal edges).
    pub fn tail_depth(&self) -> usize {
        match self.edge {
            EdgeRef::Internal(_) => 0,
            EdgeRef::Tail(_, k) => k as usize,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Vertex(v) => write!(f, "{v}"),
            Endpoint::Tail(Side::Entry, k) => write!(f, "L{k}"),
            Endpoint::Tail(Side::Exit, k) => write!(f, "R{k}"),
        }
    }
}

impl fmt::Display for EdgeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.edge {
            EdgeRef::Internal(id) => write!(f, "{}>{}#{}", self.from, self.to, id),
            EdgeRef::Tail(..) => write!(f, "{}>{}", self.from, self.to),
        }
    }
}

/// Unresolved textual edge state, `FROM>TO[#ID]`.
///
/// Endpoints are integer vertex ids, `L<k>` for entry-tail vertices or
/// `R<k>` for exit-tail vertices (`k >= 1`). The `#ID` suffix is only needed
/// to pick one of several parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSpec {
    pub from: Endpoint,
    pub to: Endpoint,
    pub edge_id: Option<String>,
}

fn parse_endpoint(token: &str, input: &str) -> Result<Endpoint> {
    let syntax = |message: String| Error::EdgeSyntax {
        input: input.to_string(),
        message,
    };
    let token = token.trim();
    if let Some(rest) = token.strip_prefix('L').or_else(|| token.strip_prefix('R')) {
        let side = if token.starts_with('L') {
            Side::Entry
        } else {
            Side::Exit
        };
        let k: u32 = rest
            .parse()
            .map_err(|_| syntax(format!("bad tail index in {token:?}")))?;
        if k == 0 {
            return Err(syntax("tail vertices are numbered from 1".into()));
        }
        return Ok(Endpoint::Tail(side, k));
    }
    token
        .parse::<VertexId>()
        .map(Endpoint::Vertex)
        .map_err(|_| syntax(format!("bad endpoint {token:?}")))
}

impl FromStr for EdgeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (body, edge_id) = match s.split_once('#') {
            Some((body, id)) => {
                if !is_valid_edge_id(id) {
                    return Err(Error::EdgeSyntax {
                        input: s.to_string(),
                        message: format!("bad edge id {id:?}"),
                    });
                }
                (body, Some(id.to_string()))
            }
            None => (s, None),
        };
        let (from, to) = body.split_once('>').ok_or_else(|| Error::EdgeSyntax {
            input: s.to_string(),
            message: "expected FROM>TO".into(),
        })?;
        Ok(EdgeSpec {
            from: parse_endpoint(from, s)?,
            to: parse_endpoint(to, s)?,
            edge_id,
        })
    }
}

impl fmt::Display for EdgeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}>{}", self.from, self.to)?;
        if let Some(id) = &self.edge_id {
            write!(f, "#{id}")?;
        }
        Ok(())
    }
}

/// Edge ids are restricted so they survive the `FROM>TO#ID` notation.
pub fn is_valid_edge_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | ':'))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub id: String,
}

/// One coin slot: the edge through which the walker enters or leaves a vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub neighbor: Endpoint,
    pub edge: EdgeRef,
}

impl Slot {
    /// The state that arrives at `vertex` through this slot.
    pub fn incoming(&self, vertex: VertexId) -> EdgeState {
        EdgeState::new(self.neighbor, Endpoint::Vertex(vertex), self.edge.clone())
    }

    /// The state that leaves `vertex` through this slot.
    pub fn outgoing(&self, vertex: VertexId) -> EdgeState {
        EdgeState::new(Endpoint::Vertex(vertex), self.neighbor, self.edge.clone())
    }
}

#[derive(Debug, Clone)]
struct VertexData {
    spec: CoinSpec,
    slots: Vec<Slot>,
    coin: Option<CoinMatrix>,
}

/// A validated graph with its coins. Immutable once built.
#[derive(Debug, Clone)]
pub struct Graph {
    vertices: BTreeMap<VertexId, VertexData>,
    edges: Vec<Edge>,
    entry: VertexId,
    exit: VertexId,
}

impl Graph {
    /// Validates the structure and builds every coin.
    ///
    /// Vertices absent from `coins` get the Grover coin. An entry or exit
    /// vertex without internal edges has only its tail slot; it is accepted
    /// only with an explicit coin.
    pub fn new(
        vertices: Vec<VertexId>,
        edges: Vec<Edge>,
        entry: VertexId,
        exit: VertexId,
        coins: BTreeMap<VertexId, CoinSpec>,
    ) -> Result<Graph> {
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !seen.insert(*v) {
                return Err(Error::Graph(format!("duplicate vertex {v}")));
            }
        }
        if seen.is_empty() {
            return Err(Error::Graph("no vertices".into()));
        }
        if entry == exit {
            return Err(Error::Graph(format!("entry and exit are both vertex {entry}")));
        }
        for (role, v) in [("entry", entry), ("exit", exit)] {
            if !seen.contains(&v) {
                return Err(Error::Graph(format!("{role} vertex {v} is not in the vertex list")));
            }
        }

        let mut ids = BTreeSet::new();
        for e in &edges {
            if !is_valid_edge_id(&e.id) {
                return Err(Error::Graph(format!(
                    "edge id {:?} must be non-empty and use only [A-Za-z0-9_.:-]",
                    e.id
                )));
            }
            if !ids.insert(e.id.as_str()) {
                return Err(Error::Graph(format!("duplicate edge id {:?}", e.id)));
            }
            if e.a == e.b {
                return Err(Error::Graph(format!(
                    "edge {:?} is a self-loop at vertex {}",
                    e.id, e.a
                )));
            }
            for v in [e.a, e.b] {
                if !seen.contains(&v) {
                    return Err(Error::Graph(format!("edge {:?} references unknown vertex {v}", e.id)));
                }
            }
        }
        for v in coins.keys() {
            if !seen.contains(v) {
                return Err(Error::Graph(format!("coin given for unknown vertex {v}")));
            }
        }

        let mut edges = edges;
        edges.sort_by(|x, y| x.id.cmp(&y.id));

        let mut slot_lists: BTreeMap<VertexId, Vec<(Endpoint, String)>> =
            seen.iter().map(|v| (*v, Vec::new())).collect();
        for e in &edges {
            slot_lists
                .get_mut(&e.a)
                .unwrap()
                .push((Endpoint::Vertex(e.b), e.id.clone()));
            slot_lists
                .get_mut(&e.b)
                .unwrap()
                .push((Endpoint::Vertex(e.a), e.id.clone()));
        }

        let mut data = BTreeMap::new();
        for (v, mut internal) in slot_lists {
            internal.sort();
            let mut slots = Vec::with_capacity(internal.len() + 1);
            if v == entry {
                slots.push(Slot {
                    neighbor: Endpoint::Tail(Side::Entry, 1),
                    edge: EdgeRef::Tail(Side::Entry, 0),
                });
            } else if v == exit {
                slots.push(Slot {
                    neighbor: Endpoint::Tail(Side::Exit, 1),
                    edge: EdgeRef::Tail(Side::Exit, 0),
                });
            }
            let internal_count = internal.len();
            slots.extend(internal.into_iter().map(|(neighbor, id)| Slot {
                neighbor,
                edge: EdgeRef::Internal(id),
            }));

            let explicit = coins.get(&v);
            let spec = explicit.cloned().unwrap_or(CoinSpec::Grover);
            if (v == entry || v == exit) && internal_count == 0 && explicit.is_none() {
                return Err(Error::Graph(format!(
                    "vertex {v} has no internal edges; a tail-only vertex needs an explicit coin"
                )));
            }
            let coin = if slots.is_empty() {
                if explicit.is_some() {
                    return Err(Error::Coin {
                        vertex: v,
                        violation: crate::error::CoinViolation::ZeroDegree,
                    });
                }
                None
            } else {
                Some(make_coin(&spec, slots.len()).map_err(|violation| Error::Coin { vertex: v, violation })?)
            };
            data.insert(v, VertexData { spec, slots, coin });
        }

        Ok(Graph {
            vertices: data,
            edges,
            entry,
            exit,
        })
    }

    pub fn entry(&self) -> VertexId {
        self.entry
    }

    pub fn exit(&self) -> VertexId {
        self.exit
    }

    pub fn attachment(&self, side: Side) -> VertexId {
        match side {
            Side::Entry => self.entry,
            Side::Exit => self.exit,
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Internal edges, sorted by id.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Total degree of `v`, tail slot included.
    pub fn degree(&self, v: VertexId) -> usize {
        self.vertices.get(&v).map_or(0, |d| d.slots.len())
    }

    /// Coin slots of `v` in coin row/column order.
    pub fn slots(&self, v: VertexId) -> &[Slot] {
        self.vertices.get(&v).map_or(&[], |d| d.slots.as_slice())
    }

    /// The coin of `v`; `None` for isolated vertices and unknown ids.
    pub fn coin(&self, v: VertexId) -> Option<&CoinMatrix> {
        self.vertices.get(&v).and_then(|d| d.coin.as_ref())
    }

    pub fn coin_spec(&self, v: VertexId) -> Option<&CoinSpec> {
        self.vertices.get(&v).map(|d| &d.spec)
    }

    /// Slot index at `v` of the edge state arriving at (or leaving) `v` along `edge` from `neighbor`.
    pub fn slot_index(&self, v: VertexId, neighbor: Endpoint, edge: &EdgeRef) -> Option<usize> {
        self.slots(v)
            .iter()
            .position(|s| s.neighbor == neighbor && &s.edge == edge)
    }

    /// First edge state of the entry tail pointing into the graph, `|L1, entry>`.
    pub fn entry_incoming(&self) -> EdgeState {
        self.tail_incoming(Side::Entry)
    }

    /// First edge state of the exit tail pointing away from the graph, `|exit, R1>`.
    pub fn exit_outgoing(&self) -> EdgeState {
        self.tail_outgoing(Side::Exit)
    }

    pub fn tail_incoming(&self, side: Side) -> EdgeState {
        EdgeState::new(
            Endpoint::Tail(side, 1),
            Endpoint::Vertex(self.attachment(side)),
            EdgeRef::Tail(side, 0),
        )
    }

    pub fn tail_outgoing(&self, side: Side) -> EdgeState {
        self.tail_incoming(side).reversed()
    }

    /// Resolves a textual edge state against this graph's edges (tails are unbounded).
    pub fn resolve(&self, spec: &EdgeSpec) -> Result<EdgeState> {
        let unknown = || Error::UnknownEdge(spec.to_string());
        match (spec.from, spec.to) {
            (Endpoint::Vertex(a), Endpoint::Vertex(b)) => {
                let mut found = self.edges.iter().filter(|e| {
                    ((e.a == a && e.b == b) || (e.a == b && e.b == a))
                        && spec.edge_id.as_ref().is_none_or(|id| &e.id == id)
                });
                let first = found.next().ok_or_else(unknown)?;
                if found.next().is_some() {
                    return Err(Error::EdgeSyntax {
                        input: spec.to_string(),
                        message: "parallel edges: add #ID to choose one".into(),
                    });
                }
                Ok(EdgeState::new(spec.from, spec.to, EdgeRef::Internal(first.id.clone())))
            }
            (x, y) => {
                if spec.edge_id.is_some() {
                    return Err(unknown());
                }
                let (inner, outer) = match (x, y) {
                    (Endpoint::Tail(_, _), Endpoint::Tail(_, _)) => {
                        if tail_rank(x) < tail_rank(y) {
                            (x, y)
                        } else {
                            (y, x)
                        }
                    }
                    (Endpoint::Tail(..), _) => (y, x),
                    _ => (x, y),
                };
                let Endpoint::Tail(side, k) = outer else {
                    return Err(unknown());
                };
                let expected_inner = if k == 1 {
                    Endpoint::Vertex(self.attachment(side))
                } else {
                    Endpoint::Tail(side, k - 1)
                };
                if inner != expected_inner {
                    return Err(unknown());
                }
                Ok(EdgeState::new(x, y, EdgeRef::Tail(side, k - 1)))
            }
        }
    }
}

fn tail_rank(e: Endpoint) -> (Side, u32) {
    match e {
        Endpoint::Tail(s, k) => (s, k),
        Endpoint::Vertex(_) => (Side::Entry, 0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(a: VertexId, b: VertexId, id: &str) -> Edge {
        Edge { a, b, id: id.into() }
    }

    fn diamond_edges() -> Vec<Edge> {
        vec![edge(0, 1, "e0"), edge(1, 2, "e1"), edge(0, 3, "e2"), edge(3, 2, "e3")]
    }

    #[test]
    fn rejects_self_loop() {
        let err = Graph::new(
            vec![0, 1],
            vec![edge(0, 1, "a"), edge(1, 1, "b")],
            0,
            1,
            BTreeMap::new(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("self-loop"), "{err}");
    }

    #[test]
    fn rejects_entry_equal_exit() {
        assert!(matches!(
            Graph::new(vec![0, 1], vec![edge(0, 1, "a")], 0, 0, BTreeMap::new()),
            Err(Error::Graph(_))
        ));
    }

    #[test]
    fn rejects_unknown_vertex_and_duplicate_ids() {
        assert!(Graph::new(vec![0, 1], vec![edge(0, 5, "a")], 0, 1, BTreeMap::new()).is_err());
        assert!(Graph::new(
            vec![0, 1],
            vec![edge(0, 1, "a"), edge(0, 1, "a")],
            0,
            1,
            BTreeMap::new()
        )
        .is_err());
    }

    #[test]
    fn empty_edge_list_needs_explicit_coins() {
        let err = Graph::new(vec![0, 1], vec![], 0, 1, BTreeMap::new()).unwrap_err();
        assert!(matches!(err, Error::Graph(_)));

        let coins = BTreeMap::from([
            (
                0,
                CoinSpec::EqualTransmission {
                    r: 1.0.into(),
                    t: 0.0.into(),
                },
            ),
            (
                1,
                CoinSpec::EqualTransmission {
                    r: 1.0.into(),
                    t: 0.0.into(),
                },
            ),
        ]);
        let g = Graph::new(vec![0, 1], vec![], 0, 1, coins).unwrap();
        assert_eq!(g.degree(0), 1);
    }

    #[test]
    fn slot_order_puts_tail_first_then_neighbor_order() {
        let g = Graph::new(vec![0, 1, 2, 3], diamond_edges(), 0, 2, BTreeMap::new()).unwrap();
        let slots = g.slots(0);
        assert_eq!(slots.len(), 3);
        assert_eq!(slots[0].edge, EdgeRef::Tail(Side::Entry, 0));
        assert_eq!(slots[1].neighbor, Endpoint::Vertex(1));
        assert_eq!(slots[2].neighbor, Endpoint::Vertex(3));
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn parallel_edges_sort_by_id() {
        let g = Graph::new(
            vec![0, 1],
            vec![edge(0, 1, "b"), edge(0, 1, "a")],
            0,
            1,
            BTreeMap::new(),
        )
        .unwrap();
        let ids: Vec<_> = g.slots(0).iter().map(|s| s.edge.clone()).collect();
        assert_eq!(
            ids,
            vec![
                EdgeRef::Tail(Side::Entry, 0),
                EdgeRef::Internal("a".into()),
                EdgeRef::Internal("b".into())
            ]
        );
        let spec: EdgeSpec = "0>1".parse().unwrap();
        assert!(g.resolve(&spec).is_err());
        let spec: EdgeSpec = "0>1#b".parse().unwrap();
        assert_eq!(g.resolve(&spec).unwrap().edge, EdgeRef::Internal("b".into()));
    }

    #[test]
    fn resolves_tail_states() {
        let g = Graph::new(vec![0, 1, 2, 3], diamond_edges(), 0, 2, BTreeMap::new()).unwrap();
        let s = g.resolve(&"L1>0".parse().unwrap()).unwrap();
        assert_eq!(s, g.entry_incoming());
        let s = g.resolve(&"2>R1".parse().unwrap()).unwrap();
        assert_eq!(s, g.exit_outgoing());
        let s = g.resolve(&"R3>R2".parse().unwrap()).unwrap();
        assert_eq!(s.edge, EdgeRef::Tail(Side::Exit, 2));
        assert!(g.resolve(&"L1>2".parse().unwrap()).is_err());
        assert!(g.resolve(&"L1>L3".parse().unwrap()).is_err());
    }

    #[test]
    fn edge_spec_syntax_errors() {
        for bad in ["", "0", "0>", "L0>0", "x>1", "0>1#", "0>1#a b", "R>1"] {
            assert!(bad.parse::<EdgeSpec>().is_err(), "{bad:?} should not parse");
        }
        let s: EdgeSpec = "-4>17#e_1".parse().unwrap();
        assert_eq!(s.from, Endpoint::Vertex(-4));
        assert_eq!(s.to_string(), "-4>17#e_1");
    }
}
