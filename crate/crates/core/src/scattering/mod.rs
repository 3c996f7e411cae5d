//! Scattering amplitudes of a graph between its two tails.
//!
//! For a wave incident from the left the eigenstate of `U` with eigenvalue
//! `e^{-i theta}` is, on the tails,
//!
//! ```text
//! sum_{j<=-1} e^{i j theta} |j, j+1>  +  r e^{-i(j+1) theta} |j+1, j>
//! sum_{j>=2}  t e^{i(j-2) theta} |j, j+1>
//! ```
//!
//! with the entry vertex at 0 and the exit vertex at 2. The state is scaled
//! by `e^{i theta}` so the incoming edge `|-1, 0>` carries amplitude 1; then
//! `t` and `r` are the amplitudes on `|2, 3>` and `|0, -1>`, and the Taylor
//! coefficient of `z^n` in `t(z)` is the amplitude to reach `|2, 3>` in
//! exactly `n` steps. Substituting into `U psi = e^{-i theta} psi` with
//! `z = e^{i theta}` gives one linear equation per internal directed edge
//! `(B, C)` plus one per outgoing tail edge:
//!
//! ```text
//! psi(B, C) - z sum_A M_B[C, A] psi(A, B) = z M_B[C, tail]   (B the incident-side vertex)
//! psi(B, C) - z sum_A M_B[C, A] psi(A, B) = 0                (otherwise)
//! ```
//!
//! The unknowns are the `2E` internal amplitudes and the two outgoing tail
//! amplitudes, which are `r` and `t`. Coefficients are polynomial in `z`, so
//! solving at `|z| < 1` evaluates the analytic extension `t(z)`.
//!
//! Bound states make the system singular at `z = 1 / lambda`. They are
//! orthogonal to the source and invariant under the coupling, so adding
//! the projector onto them leaves the physical solution unchanged and makes
//! the system invertible on the closed unit disc.

mod series;

pub use series::{
    p_out_series, p_out_spectral, transmission_series, transmission_series_converged, SeriesTotal, TransmissionSeries,
    MAX_SAMPLE_COUNT,
};

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{build_edge_basis, TailConfig};
use crate::error::{Error, Result};
use crate::graph::{EdgeRef, Endpoint, Graph, Side};
use crate::linalg::lu_factor;
use crate::spectral::find_bound_states;

/// Flux-conservation tolerance on the unit circle.
pub const FLUX_TOLERANCE: f64 = 1e-10;
/// Condition estimate above which a solve is logged as ill-conditioned.
pub const CONDITION_WARNING: f64 = 1e12;

/// Which tail the incoming wave arrives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Incident on the entry tail, transmitted to the exit tail.
    Left,
    /// Incident on the exit tail, transmitted to the entry tail.
    Right,
}

impl Direction {
    fn incident_side(self) -> Side {
        match self {
            Direction::Left => Side::Entry,
            Direction::Right => Side::Exit,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSolution {
    /// Phase of the evaluation point, in `[0, 2 pi)`.
    pub theta: f64,
    /// `|z|`; 1 for physical scattering, below 1 for the analytic extension.
    pub radius: f64,
    pub t: Complex64,
    pub r: Complex64,
    /// Amplitudes on internal directed edges, indexed like the edge basis.
    pub internal: Vec<Complex64>,
    /// `max |(I - z C) x - b|` of the undeflated system.
    pub residual: f64,
    pub condition: f64,
}

impl ScatteringSolution {
    /// `|t|^2 + |r|^2 - 1`; zero on the unit circle.
    pub fn flux_defect(&self) -> f64 {
        self.t.norm_sqr() + self.r.norm_sqr() - 1.0
    }
}

/// Precomputed coupling matrix, sources and bound-state projector for one graph.
#[derive(Debug, Clone)]
pub struct ScatteringSystem {
    internal: usize,
    coupling: DMatrix<Complex64>,
    deflation: DMatrix<Complex64>,
    sources: [Vec<Complex64>; 2],
    bound_states: usize,
}

impl ScatteringSystem {
    pub fn new(graph: &Graph) -> ScatteringSystem {
        let basis = build_edge_basis(graph, TailConfig::for_steps(0));
        let internal = basis.internal_dim();
        let dim = internal + 2;
        let tail_row = |side: Side| match side {
            Side::Entry => internal,
            Side::Exit => internal + 1,
        };
        let row_of = |vertex, slot: &crate::graph::Slot| match slot.edge {
            EdgeRef::Internal(_) => basis
                .index_of(&slot.outgoing(vertex))
                .expect("internal state is in the basis"),
            EdgeRef::Tail(side, _) => tail_row(side),
        };

        let mut coupling = DMatrix::zeros(dim, dim);
        for (col, state) in basis.states()[..internal].iter().enumerate() {
            let Endpoint::Vertex(b) = state.to else {
                unreachable!("internal edges join graph vertices")
            };
            let coin = graph.coin(b).expect("vertex with edges has a coin");
            let arrived = graph
                .slot_index(b, state.from, &state.edge)
                .expect("internal state arrives through a slot");
            for (c, slot) in graph.slots(b).iter().enumerate() {
                coupling[(row_of(b, slot), col)] += coin[(c, arrived)];
            }
        }

        let sources = [Direction::Left, Direction::Right].map(|dir| {
            let side = dir.incident_side();
            let v = graph.attachment(side);
            let coin = graph.coin(v).expect("attachment vertex has a coin");
            let mut b = vec![Complex64::new(0.0, 0.0); dim];
            // tail slot is always first
            for (c, slot) in graph.slots(v).iter().enumerate() {
                b[row_of(v, slot)] += coin[(c, 0)];
            }
            b
        });

        let bound = find_bound_states(graph);
        let mut deflation = DMatrix::zeros(dim, dim);
        for s in &bound {
            for i in 0..internal {
                for j in 0..internal {
                    deflation[(i, j)] += s.vector[i] * s.vector[j].conj();
                }
            }
        }

        ScatteringSystem {
            internal,
            coupling,
            deflation,
            sources,
            bound_states: bound.len(),
        }
    }

    /// Number of unknowns, `2E + 2`.
    pub fn dim(&self) -> usize {
        self.internal + 2
    }

    pub fn bound_state_count(&self) -> usize {
        self.bound_states
    }

    /// Solves at an arbitrary point `z` with `|z| <= 1`.
    pub fn solve_at(&self, z: Complex64, direction: Direction) -> Result<ScatteringSolution> {
        let dim = self.dim();
        let source = match direction {
            Direction::Left => &self.sources[0],
            Direction::Right => &self.sources[1],
        };
        let b: Vec<Complex64> = source.iter().map(|x| x * z).collect();
        let system = DMatrix::identity(dim, dim) - &self.coupling * z;
        let theta = z.arg().rem_euclid(TAU);
        let radius = z.norm();
        let lu = lu_factor(&system + &self.deflation).map_err(|s| Error::Singular {
            theta,
            radius,
            pivot: s.pivot,
        })?;
        let x = lu.solve(&b);
        let ax = &system * nalgebra::DVector::from_column_slice(&x);
        let residual = ax.iter().zip(&b).fold(0.0f64, |m, (l, r)| m.max((l - r).norm()));
        let condition = lu.condition_estimate();
        if condition > CONDITION_WARNING {
            log::warn!("scattering system at theta = {theta} is ill-conditioned (estimate {condition:e})");
        }
        let (entry_out, exit_out) = (x[self.internal], x[self.internal + 1]);
        let (r, t) = match direction {
            Direction::Left => (entry_out, exit_out),
            Direction::Right => (exit_out, entry_out),
        };
        Ok(ScatteringSolution {
            theta,
            radius,
            t,
            r,
            internal: x[..self.internal].to_vec(),
            residual,
            condition,
        })
    }

    /// Solves at `z = e^{i theta}`.
    pub fn solve(&self, theta: f64, direction: Direction) -> Result<ScatteringSolution> {
        self.solve_at(Complex64::from_polar(1.0, theta), direction)
    }

    /// Solutions at `z = radius * e^{2 pi i k / samples}`, `k = 0..samples`, in order.
    pub fn sweep(&self, samples: usize, radius: f64, direction: Direction) -> Result<Vec<ScatteringSolution>> {
        (0..samples)
            .into_par_iter()
            .map(|k| {
                let z = Complex64::from_polar(radius, TAU * k as f64 / samples as f64);
                self.solve_at(z, direction)
            })
            .collect()
    }
}

/// Transmission and reflection at eigenphase `theta`.
pub fn solve_scattering(graph: &Graph, theta: f64, direction: Direction) -> Result<ScatteringSolution> {
    ScatteringSystem::new(graph).solve(theta, direction)
}
