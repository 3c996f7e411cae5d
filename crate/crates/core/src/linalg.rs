//! Dense complex LU with partial pivoting, for the small scattering systems.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Pivot vanished at the given elimination column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularMatrix {
    pub column: usize,
    pub pivot: f64,
}

/// `P A = L U`, stored packed: unit-lower `L` below the diagonal, `U` on and above.
#[derive(Debug, Clone)]
pub struct Lu {
    packed: DMatrix<Complex64>,
    perm: Vec<usize>,
}

pub fn lu_factor(mut a: DMatrix<Complex64>) -> Result<Lu, SingularMatrix> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "LU needs a square matrix");
    let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let tiny = scale * n as f64 * f64::EPSILON;
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let (p, pivot_abs) =
            (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs.is_nan() || pivot_abs <= tiny {
            return Err(SingularMatrix {
                column: k,
                pivot: pivot_abs.max(0.0),
            });
        }
        if p != k {
            a.swap_rows(p, k);
            perm.swap(p, k);
        }
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let factor = a[(i, k)] / pivot;
            a[(i, k)] = factor;
            if factor != Complex64::new(0.0, 0.0) {
                for j in k + 1..n {
                    let u = a[(k, j)];
                    a[(i, j)] -= factor * u;
                }
            }
        }
    }
    Ok(Lu { packed: a, perm })
}

impl Lu {
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.packed.nrows();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(i) {
                s -= self.packed[(i, j)] * xj;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                s -= self.packed[(i, j)] * xj;
            }
            x[i] = s / self.packed[(i, i)];
        }
        x
    }

    /// Ratio of largest to smallest pivot modulus; a cheap lower bound on the condition number.
    pub fn condition_estimate(&self) -> f64 {
        let d = self.packed.diagonal();
        let (lo, hi) = d
            .iter()
            .map(|z| z.norm())
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)));
        hi / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn solves_random_systems() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..12 {
            let a = DMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let b = &a * nalgebra::DVector::from_vec(x.clone());
            let got = lu_factor(a).unwrap().solve(b.as_slice());
            for (g, e) in got.iter().zip(&x) {
                assert!((g - e).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn needs_pivoting() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0].map(|x| Complex64::new(x, 0.0)));
        let x = lu_factor(a)
            .unwrap()
            .solve(&[Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)]);
        assert_eq!(x, vec![Complex64::new(3.0, 0.0), Complex64::new(2.0, 0.0)]);
    }

    #[test]
    fn detects_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0].map(|x| Complex64::new(x, 0.0)));
        assert_eq!(lu_factor(a).unwrap_err().column, 1);
    }
}
