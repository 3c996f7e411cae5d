//! One-step unitary on the truncated edge basis, and walks driven by it.
//!
//! Column `|A,B>` of the step operator holds `M_B[c, a]` at row `|B,C_c>`,
//! where `a` is the slot of the arriving edge at `B`. Tail vertices are free;
//! the outermost one reflects with phase +1.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::{build_edge_basis, EdgeBasis, TailConfig};
use crate::error::{Error, Result};
use crate::graph::{EdgeRef, EdgeState, Endpoint, Graph};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Sparse unitary in compressed-column form.
#[derive(Debug, Clone)]
pub struct StepOperator {
    basis: EdgeBasis,
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
    values: Vec<Complex64>,
}

/// Assembles `U` for `graph` with tails truncated per `tails`.
pub fn build_step_operator(graph: &Graph, tails: TailConfig) -> StepOperator {
    let basis = build_edge_basis(graph, tails);
    let last = tails.truncation_length() as u32;
    let mut col_ptr = Vec::with_capacity(basis.dim() + 1);
    let mut rows = Vec::new();
    let mut values = Vec::new();
    col_ptr.push(0);

    for state in basis.states() {
        match state.to {
            Endpoint::Vertex(b) => {
                let a = graph
                    .slot_index(b, state.from, &state.edge)
                    .expect("every basis state arrives through a slot");
                let coin = graph.coin(b).expect("vertex with slots has a coin");
                for (c, slot) in graph.slots(b).iter().enumerate() {
                    let amp = coin[(c, a)];
                    if amp != ZERO {
                        let row = basis
                            .index_of(&slot.outgoing(b))
                            .expect("outgoing slot state is in the basis");
                        rows.push(row);
                        values.push(amp);
                    }
                }
            }
            Endpoint::Tail(side, k) => {
                let outward = matches!(state.edge, EdgeRef::Tail(_, j) if j + 1 == k);
                let next = if k == last {
                    state.reversed()
                } else if outward {
                    EdgeState::new(state.to, Endpoint::Tail(side, k + 1), EdgeRef::Tail(side, k))
                } else {
                    let inner = if k == 1 {
                        Endpoint::Vertex(graph.attachment(side))
                    } else {
                        Endpoint::Tail(side, k - 1)
                    };
                    EdgeState::new(state.to, inner, EdgeRef::Tail(side, k - 1))
                };
                rows.push(basis.index_of(&next).expect("tail successor is in the basis"));
                values.push(ONE);
            }
        }
        col_ptr.push(rows.len());
    }

    StepOperator {
        basis,
        col_ptr,
        rows,
        values,
    }
}

impl StepOperator {
    pub fn basis(&self) -> &EdgeBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Nonzeros of column `j` as `(row, value)`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.col_ptr[j]..self.col_ptr[j + 1];
        self.rows[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// `out = U * input`.
    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        out.fill(ZERO);
        for (j, &x) in input.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (i, u) in self.column(j) {
                out[i] += u * x;
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for j in 0..self.dim() {
            for (i, u) in self.column(j) {
                m[(i, j)] = u;
            }
        }
        m
    }

    /// `max |U^H U - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        crate::coin::unitarity_deviation(&self.to_dense())
    }

    /// Smallest truncation length under which `steps` steps from `state` never touch the boundary.
    fn check_truncation(&self, depth: usize, steps: usize) -> Result<()> {
        let needed = steps + depth + 1;
        let have = self.basis.tails().truncation_length();
        if have < needed {
            return Err(Error::TruncationTooShort { needed, have });
        }
        Ok(())
    }
}

/// Amplitudes over the edge basis after `step_count` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    pub amplitudes: Vec<Complex64>,
    pub step_count: usize,
}

impl WalkState {
    pub fn basis_vector(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        WalkState {
            amplitudes,
            step_count: 0,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<other|self>`.
    pub fn overlap(&self, other: &[Complex64]) -> Complex64 {
        other.iter().zip(&self.amplitudes).map(|(o, a)| o.conj() * a).sum()
    }
}

/// Steps a state forward in place.
pub struct Walker<'a> {
    op: &'a StepOperator,
    state: WalkState,
    scratch: Vec<Complex64>,
}

impl<'a> Walker<'a> {
    pub fn new(op: &'a StepOperator, state: WalkState) -> Self {
        let scratch = vec![ZERO; op.dim()];
        Walker { op, state, scratch }
    }

    pub fn state(&self) -> &WalkState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut WalkState {
        &mut self.state
    }

    pub fn step(&mut self) {
        self.op.apply(&self.state.amplitudes, &mut self.scratch);
        std::mem::swap(&mut self.state.amplitudes, &mut self.scratch);
        self.state.step_count += 1;
    }

    pub fn into_state(self) -> WalkState {
        self.state
    }
}

/// Starts a walker on a single edge state after checking the truncation covers `steps`.
pub fn walker_from_edge<'a>(op: &'a StepOperator, initial: &EdgeState, steps: usize) -> Result<Walker<'a>> {
    let index = op.basis().require(initial)?;
    op.check_truncation(initial.tail_depth(), steps)?;
    Ok(Walker::new(op, WalkState::basis_vector(op.dim(), index)))
}

/// Starts a walker on an arbitrary vector, checking truncation against its deepest tail component.
pub fn walker_from_vector(op: &StepOperator, amplitudes: Vec<Complex64>, steps: usize) -> Result<Walker<'_>> {
    if amplitudes.len() != op.dim() {
        return Err(Error::Graph(format!(
            "state has {} amplitudes, basis has {}",
            amplitudes.len(),
            op.dim()
        )));
    }
    let depth = amplitudes
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != ZERO)
        .map(|(i, _)| op.basis().state(i).tail_depth())
        .max()
        .unwrap_or(0);
    op.check_truncation(depth, steps)?;
    Ok(Walker::new(
        op,
        WalkState {
            amplitudes,
            step_count: 0,
        },
    ))
}

/// `U^steps |initial>`.
pub fn run_walk(op: &StepOperator, initial: &EdgeState, steps: usize) -> Result<WalkState> {
    let mut walker = walker_from_edge(op, initial, steps)?;
    for _ in 0..steps {
        walker.step();
    }
    Ok(walker.into_state())
}

/// First-arrival probabilities on one monitored edge.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstArrivalRecord {
    /// `q[n]`: probability of first detection at step `n`; `q[0] = 0`.
    pub q: Vec<f64>,
    /// Squared norm of the unnormalized state after each step's projection; `remaining[0] = 1`.
    pub remaining: Vec<f64>,
}

impl FirstArrivalRecord {
    pub fn cumulative(&self) -> Vec<f64> {
        self.q
            .iter()
            .scan(0.0, |acc, q| {
                *acc += q;
                Some(*acc)
            })
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.q.iter().sum()
    }
}

/// Walk with a projective measurement of `exit_edge` after every step.
///
/// The detected amplitude is removed and the state is not renormalized, so
/// `q[n]` is the joint probability of not being seen before step `n` and
/// being seen at step `n`.
pub fn run_measured_walk(
    op: &StepOperator,
    initial: &EdgeState,
    exit_edge: &EdgeState,
    steps: usize,
) -> Result<FirstArrivalRecord> {
    let exit = op.basis().require(exit_edge)?;
    let mut walker = walker_from_edge(op, initial, steps)?;
    let mut q = Vec::with_capacity(steps + 1);
    let mut remaining = Vec::with_capacity(steps + 1);
    q.push(0.0);
    remaining.push(walker.state().norm_sqr());
    for _ in 0..steps {
        walker.step();
        let amps = &mut walker.state_mut().amplitudes;
        q.push(amps[exit].norm_sqr());
        amps[exit] = ZERO;
        remaining.push(walker.state().norm_sqr());
    }
    Ok(FirstArrivalRecord { q, remaining })
}
