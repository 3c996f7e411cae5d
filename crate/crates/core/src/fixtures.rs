//! Bundled graphs and a seeded random-graph generator.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coin::CoinSpec;
use crate::graph::{Edge, Graph, VertexId};
use crate::schema::GraphDocument;

/// Two three-edge Grover vertices joined by two free two-edge arms.
pub const DIAMOND_JSON: &str = include_str!("../fixtures/diamond.json");
/// Three free edges in a row.
pub const LINE_JSON: &str = include_str!("../fixtures/line.json");
/// Two-edge line whose middle vertex has a Hermitian, non-symmetric coin.
pub const TWISTED_LINE_JSON: &str = include_str!("../fixtures/twisted_line.json");
/// Diamond with an invalid equal-transmission coin (r = t = 1/2) at the entry.
pub const BAD_COIN_JSON: &str = include_str!("../fixtures/bad_coin.json");

pub fn diamond() -> Graph {
    Graph::from_json(DIAMOND_JSON).expect("bundled diamond is valid")
}

/// Path `0 - 1 - ... - edges` with entry 0 and exit `edges`; all vertices free.
/// The entry tail edge reaches the exit tail edge in `edges + 1` steps.
pub fn line(edges: usize) -> Graph {
    let n = edges as VertexId;
    let edge_list = (0..n)
        .map(|i| Edge {
            a: i,
            b: i + 1,
            id: format!("e{i}"),
        })
        .collect();
    Graph::new((0..=n).collect(), edge_list, 0, n, BTreeMap::new()).expect("line is valid")
}

/// Line with a complex coin that breaks time-reversal symmetry.
pub fn twisted_line() -> Graph {
    Graph::from_json(TWISTED_LINE_JSON).expect("bundled twisted line is valid")
}

/// Diamond whose entry vertex sends everything straight back into the entry tail.
pub fn reflecting_diamond() -> Graph {
    let mut doc = GraphDocument::from_json(DIAMOND_JSON).expect("bundled diamond is valid");
    doc.coins
        .insert(doc.entry, CoinSpec::CustomMatrix(nalgebra::DMatrix::identity(3, 3)));
    doc.build().expect("identity coin is unitary")
}

/// Coin assignment used by [`random_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoinFamily {
    /// Every vertex uses the default Grover coin.
    Grover,
    /// Random complex equal-transmission coins `a I + b J` with `|a| = |a + n b| = 1`.
    EqualTransmission,
}

#[derive(Debug, Clone, Copy)]
pub struct RandomGraphParams {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub coins: CoinFamily,
}

impl Default for RandomGraphParams {
    fn default() -> Self {
        RandomGraphParams {
            max_vertices: 6,
            max_edges: 8,
            coins: CoinFamily::Grover,
        }
    }
}

/// Connected random multigraph: a random spanning tree plus extra (possibly
/// parallel) edges. Entry is vertex 0, exit a random other vertex.
pub fn random_graph(seed: u64, params: RandomGraphParams) -> GraphDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_v = params.max_vertices.max(2);
    let n = rng.random_range(2..=max_v);
    let max_e = params.max_edges.max(n - 1);
    let total_edges = rng.random_range(n - 1..=max_e);

    let mut edges = Vec::with_capacity(total_edges);
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push((u as VertexId, v as VertexId));
    }
    while edges.len() < total_edges {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        edges.push((a as VertexId, b as VertexId));
    }
    let edges: Vec<Edge> = edges
        .into_iter()
        .enumerate()
        .map(|(k, (a, b))| Edge {
            a,
            b,
            id: format!("e{k}"),
        })
        .collect();
    let exit = rng.random_range(1..n) as VertexId;

    let mut coins = BTreeMap::new();
    if params.coins == CoinFamily::EqualTransmission {
        for v in 0..n as VertexId {
            let degree = edges.iter().filter(|e| e.a == v || e.b == v).count() + usize::from(v == 0 || v == exit);
            let a = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let ab = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let b = (ab - a) / degree as f64;
            coins.insert(v, CoinSpec::EqualTransmission { r: a + b, t: b });
        }
    }

    GraphDocument {
        vertices: (0..n as VertexId).collect(),
        edges,
        entry: 0,
        exit,
        coins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixtures_load() {
        assert_eq!(diamond().edges().len(), 4);
        assert_eq!(Graph::from_json(LINE_JSON).unwrap().edges().len(), 3);
        assert_eq!(twisted_line().degree(1), 2);
        assert!(Graph::from_json(BAD_COIN_JSON).is_err());
        assert_eq!(reflecting_diamond().degree(0), 3);
    }

    #[test]
    fn random_graphs_are_valid_and_deterministic() {
        for seed in 0..200 {
            for coins in [CoinFamily::Grover, CoinFamily::EqualTransmission] {
                let params = RandomGraphParams {
                    coins,
                    ..Default::default()
                };
                let doc = random_graph(seed, params);
                assert_eq!(doc, random_graph(seed, params));
                assert!(doc.vertices.len() <= 6 && doc.edges.len() <= 8);
                doc.build().unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            }
        }
    }
}
