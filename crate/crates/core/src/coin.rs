//! Vertex coins.
//!
//! An equal-transmission coin of degree `n` reflects with amplitude `r` and
//! transmits into each other edge with amplitude `t`. It is unitary iff
//!
//! ```text
//! (n-1)|t|^2 + |r|^2 = 1
//! (n-2)|t|^2 + conj(r) t + conj(t) r = 0
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::CoinViolation;

/// Dense `n x n` coin, `M[(out_slot, in_slot)]`.
pub type CoinMatrix = DMatrix<Complex64>;

/// Tolerance for every coin unitarity test.
pub const COIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum CoinSpec {
    EqualTransmission {
        r: Complex64,
        t: Complex64,
    },
    /// `r = 2/n - 1`, `t = 2/n`.
    Grover,
    /// Slot order: tail first, then internal edges by `(neighbor id, edge id)`.
    CustomMatrix(CoinMatrix),
    /// Degree 2 only: `r = 0`, `t = 1`.
    Free,
}

/// Residuals of the two equal-transmission constraints for degree `n`:
/// `(n-1)|t|^2 + |r|^2 - 1` and `(n-2)|t|^2 + 2 Re(conj(r) t)`.
pub fn validate_coin_constraints(r: Complex64, t: Complex64, n: usize) -> (f64, f64) {
    let n = n as f64;
    let t2 = t.norm_sqr();
    let residual1 = (n - 1.0) * t2 + r.norm_sqr() - 1.0;
    let residual2 = (n - 2.0) * t2 + 2.0 * (r.conj() * t).re;
    (residual1, residual2)
}

/// `max |M^H M - I|`. Non-finite entries report infinity.
pub fn unitarity_deviation(m: &CoinMatrix) -> f64 {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return f64::INFINITY;
    }
    let gram = m.adjoint() * m;
    let mut worst = 0.0f64;
    for j in 0..gram.ncols() {
        for i in 0..gram.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
    }
    worst
}

/// Equal-transmission matrix: `r` on the diagonal, `t` everywhere else.
pub fn equal_transmission_matrix(r: Complex64, t: Complex64, n: usize) -> CoinMatrix {
    DMatrix::from_fn(n, n, |i, j| if i == j { r } else { t })
}

fn within(x: f64) -> bool {
    // NaN fails
    x.abs() <= COIN_TOLERANCE
}

/// Expands a coin spec for a vertex of the given degree and checks it.
pub fn make_coin(spec: &CoinSpec, degree: usize) -> Result<CoinMatrix, CoinViolation> {
    if degree == 0 {
        return Err(CoinViolation::ZeroDegree);
    }
    let m = match spec {
        CoinSpec::Grover => {
            let n = degree as f64;
            equal_transmission_matrix((2.0 / n - 1.0).into(), (2.0 / n).into(), degree)
        }
        CoinSpec::Free => {
            if degree != 2 {
                return Err(CoinViolation::FreeNeedsDegreeTwo { degree });
            }
            equal_transmission_matrix(0.0.into(), 1.0.into(), 2)
        }
        CoinSpec::EqualTransmission { r, t } => {
            let (residual1, residual2) = if degree == 1 {
                // only the reflection amplitude is used
                (r.norm_sqr() - 1.0, 0.0)
            } else {
                validate_coin_constraints(*r, *t, degree)
            };
            if !(within(residual1) && within(residual2)) {
                return Err(CoinViolation::Constraints { residual1, residual2 });
            }
            equal_transmission_matrix(*r, *t, degree)
        }
        CoinSpec::CustomMatrix(m) => {
            if m.nrows() != degree || m.ncols() != degree {
                return Err(CoinViolation::DimensionMismatch {
                    expected: degree,
                    found: m.nrows().max(m.ncols()),
                });
            }
            m.clone()
        }
    };
    let deviation = unitarity_deviation(&m);
    if deviation.is_nan() || deviation > COIN_TOLERANCE {
        return Err(CoinViolation::NotUnitary { deviation });
    }
    Ok(m)
}
