//! Brute-force path sums.
//!
//! Enumerates every length-`n` sequence of directed edges starting from an
//! initial edge state, multiplying the coin entry picked up at each vertex,
//! and adds up the products that end on the target. Tails are unbounded
//! here: a walker on a tail simply keeps moving in its direction. Nothing is
//! shared with the step operator beyond the graph's coins and slots.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{EdgeRef, EdgeState, Endpoint, Graph};

/// Longest enumeration accepted.
pub const MAX_ORACLE_STEPS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct PathAmplitude {
    pub n: usize,
    pub target: EdgeState,
    pub amplitude: Complex64,
    /// Paths with a nonzero product that end on the target.
    pub path_count: u64,
}

/// Edge states reachable in one step, with their amplitudes. Zero coin entries are skipped.
fn successors(graph: &Graph, state: &EdgeState) -> Vec<(EdgeState, Complex64)> {
    match state.to {
        Endpoint::Vertex(b) => {
            let slots = graph.slots(b);
            let coin = graph.coin(b).expect("vertex with slots has a coin");
            let arrived = slots
                .iter()
                .position(|s| s.neighbor == state.from && s.edge == state.edge)
                .expect("edge state arrives through a slot");
            slots
                .iter()
                .enumerate()
                .map(|(c, s)| {
                    let next = EdgeState {
                        from: state.to,
                        to: s.neighbor,
                        edge: s.edge.clone(),
                    };
                    (next, coin[(c, arrived)])
                })
                .filter(|(_, a)| *a != Complex64::new(0.0, 0.0))
                .collect()
        }
        Endpoint::Tail(side, k) => {
            let EdgeRef::Tail(_, j) = state.edge else {
                unreachable!("tail vertices only carry tail edges")
            };
            let next = if j + 1 == k {
                // heading away from the graph
                EdgeState {
                    from: state.to,
                    to: Endpoint::Tail(side, k + 1),
                    edge: EdgeRef::Tail(side, k),
                }
            } else {
                let to = if k == 1 {
                    Endpoint::Vertex(graph.attachment(side))
                } else {
                    Endpoint::Tail(side, k - 1)
                };
                EdgeState {
                    from: state.to,
                    to,
                    edge: EdgeRef::Tail(side, k - 1),
                }
            };
            vec![(next, Complex64::new(1.0, 0.0))]
        }
    }
}

/// Edge states within reach, interned to dense ids, with successor lists.
///
/// Only a lookup table for [`successors`]; every path is still walked one by one.
struct Reach {
    states: Vec<EdgeState>,
    next: Vec<Vec<(usize, Complex64)>>,
}

impl Reach {
    /// All states reachable from `initial` in at most `n` steps.
    fn build(graph: &Graph, initial: &EdgeState, n: usize) -> Reach {
        let mut ids = BTreeMap::new();
        let mut states = vec![initial.clone()];
        ids.insert(initial.clone(), 0);
        let mut next = Vec::new();
        let mut frontier = vec![0];
        for _ in 0..n {
            let mut grown = Vec::new();
            for &id in &frontier {
                while next.len() <= id {
                    next.push(None);
                }
                if next[id].is_some() {
                    continue;
                }
                let list: Vec<(usize, Complex64)> = successors(graph, &states[id])
                    .into_iter()
                    .map(|(s, a)| {
                        let j = *ids.entry(s.clone()).or_insert_with(|| {
                            states.push(s);
                            grown.push(states.len() - 1);
                            states.len() - 1
                        });
                        (j, a)
                    })
                    .collect();
                next[id] = Some(list);
            }
            frontier = grown;
        }
        next.resize(states.len(), None);
        Reach {
            next: next.into_iter().map(Option::unwrap_or_default).collect(),
            states,
        }
    }
}

/// Neumaier-compensated complex accumulator. Path counts reach ~1e9, where
/// plain summation loses several digits.
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    sum: Complex64,
    carry: Complex64,
}

fn add_compensated(sum: &mut f64, carry: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *carry += (*sum - t) + x;
    } else {
        *carry += (x - t) + *sum;
    }
    *sum = t;
}

impl Accumulator {
    fn add(&mut self, z: Complex64) {
        add_compensated(&mut self.sum.re, &mut self.carry.re, z.re);
        add_compensated(&mut self.sum.im, &mut self.carry.im, z.im);
    }

    fn total(self) -> Complex64 {
        self.sum + self.carry
    }
}

fn enumerate(
    reach: &Reach,
    state: usize,
    amplitude: Complex64,
    remaining: usize,
    sums: &mut [Accumulator],
    counts: &mut [u64],
) {
    if remaining == 0 {
        sums[state].add(amplitude);
        counts[state] += 1;
        return;
    }
    for &(next, a) in &reach.next[state] {
        enumerate(reach, next, amplitude * a, remaining - 1, sums, counts);
    }
}

fn check_state(graph: &Graph, state: &EdgeState) -> Result<()> {
    let ok = match (&state.edge, state.from, state.to) {
        (EdgeRef::Internal(id), Endpoint::Vertex(a), Endpoint::Vertex(b)) => graph
            .edges()
            .iter()
            .any(|e| &e.id == id && ((e.a, e.b) == (a, b) || (e.a, e.b) == (b, a))),
        (EdgeRef::Tail(..), _, _) => graph
            .resolve(&crate::graph::EdgeSpec {
                from: state.from,
                to: state.to,
                edge_id: None,
            })
            .is_ok_and(|s| &s == state),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::UnknownEdge(state.to_string()))
    }
}

/// Amplitudes of every edge state reachable in exactly `n` steps from `initial`.
pub fn path_sum_all(graph: &Graph, initial: &EdgeState, n: usize) -> Result<Vec<PathAmplitude>> {
    if n > MAX_ORACLE_STEPS {
        return Err(Error::PathLengthGuard {
            requested: n,
            max: MAX_ORACLE_STEPS,
        });
    }
    check_state(graph, initial)?;
    let reach = Reach::build(graph, initial, n);
    let mut sums = vec![Accumulator::default(); reach.states.len()];
    let mut counts = vec![0u64; reach.states.len()];
    enumerate(&reach, 0, Complex64::new(1.0, 0.0), n, &mut sums, &mut counts);
    let mut out: Vec<PathAmplitude> = reach
        .states
        .into_iter()
        .zip(sums.into_iter().zip(counts))
        .filter(|(_, (_, count))| *count > 0)
        .map(|(target, (amplitude, path_count))| PathAmplitude {
            n,
            target,
            amplitude: amplitude.total(),
            path_count,
        })
        .collect();
    out.sort_by(|a, b| a.target.cmp(&b.target));
    Ok(out)
}

/// `<target| U^n |initial>` by explicit path enumeration.
pub fn path_sum(graph: &Graph, initial: &EdgeState, target: &EdgeState, n: usize) -> Result<PathAmplitude> {
    check_state(graph, target)?;
    let found = path_sum_all(graph, initial, n)?
        .into_iter()
        .find(|p| &p.target == target);
    Ok(found.unwrap_or(PathAmplitude {
        n,
        target: target.clone(),
        amplitude: Complex64::new(0.0, 0.0),
        path_count: 0,
    }))
}
