//! Dense complex linear algebra: LU with partial pivoting and a 1-norm
//! condition estimator, sized for the residue systems (K up to a few hundred).

use thiserror::Error;

use crate::cx::{cabs, C};
use crate::scalar::Scalar;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum LinalgError {
    #[error("singular system: pivot magnitude {pivot:.3e} below {threshold:.3e} at column {col}")]
    Singular { pivot: f64, threshold: f64, col: usize },
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug)]
pub struct CMatrix<S: Scalar> {
    data: Vec<C<S>>,
    n: usize,
}

impl<S: Scalar> CMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        CMatrix { data: vec![C::new(S::zero(), S::zero()); n * n], n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C<S> {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C<S>) {
        self.data[i * self.n + j] = v;
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> S {
        let mut worst = S::zero();
        for j in 0..self.n {
            let mut acc = S::zero();
            for i in 0..self.n {
                acc += cabs(self.get(i, j));
            }
            worst = worst.max(acc);
        }
        worst
    }
}

/// LU factors of `P A = L U` with unit-diagonal L stored in place.
pub struct Lu<S: Scalar> {
    lu: CMatrix<S>,
    perm: Vec<usize>,
}

impl<S: Scalar> Lu<S> {
    pub fn factor(a: &CMatrix<S>) -> Result<Self, LinalgError> {
        let n = a.n();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = S::from_f64(1e-14) * a.norm_one().max(S::from_f64(f64::MIN_POSITIVE));

        for col in 0..n {
            let mut piv = col;
            let mut best = cabs(lu.get(col, col));
            for r in (col + 1)..n {
                let mag = cabs(lu.get(r, col));
                if mag > best {
                    best = mag;
                    piv = r;
                }
            }
            if !(best > threshold) {
                return Err(LinalgError::Singular {
                    pivot: best.to_f64(),
                    threshold: threshold.to_f64(),
                    col,
                });
            }
            if piv != col {
                for j in 0..n {
                    let t = lu.get(col, j);
                    lu.set(col, j, lu.get(piv, j));
                    lu.set(piv, j, t);
                }
                perm.swap(col, piv);
            }
            let inv_p = C::new(S::one(), S::zero()) / lu.get(col, col);
            for r in (col + 1)..n {
                let f = lu.get(r, col) * inv_p;
                lu.set(r, col, f);
                for j in (col + 1)..n {
                    let v = lu.get(r, j) - f * lu.get(col, j);
                    lu.set(r, j, v);
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    /// Solves A x = b.
    pub fn solve(&self, b: &[C<S>]) -> Vec<C<S>> {
        let n = self.lu.n();
        let mut x: Vec<C<S>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let t = self.lu.get(i, j) * x[j];
                x[i] = x[i] - t;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let t = self.lu.get(i, j) * x[j];
                x[i] = x[i] - t;
            }
            x[i] = x[i] / self.lu.get(i, i);
        }
        x
    }

    /// Solves A^H x = b (conjugate transpose), reusing the same factors.
    pub fn solve_adjoint(&self, b: &[C<S>]) -> Vec<C<S>> {
        let n = self.lu.n();
        // A^H = U^H L^H P, so solve U^H t = b, L^H s = t, then x = P^T s
        let mut t = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                let f = self.lu.get(j, i).conj() * t[j];
                t[i] = t[i] - f;
            }
            t[i] = t[i] / self.lu.get(i, i).conj();
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let f = self.lu.get(j, i).conj() * t[j];
                t[i] = t[i] - f;
            }
        }
        let mut x = vec![C::new(S::zero(), S::zero()); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = t[i];
        }
        x
    }
}

/// 1-norm condition estimate via the Hager/Higham power method on |A^-1|.
pub fn condition_estimate<S: Scalar>(a: &CMatrix<S>, lu: &Lu<S>) -> S {
    let n = a.n();
    if n == 0 {
        return S::one();
    }
    let inv_n = S::one() / S::from_f64(n as f64);
    let mut x = vec![C::new(inv_n, S::zero()); n];
    let mut est = S::zero();
    for _ in 0..5 {
        let y = lu.solve(&x);
        let norm_y = y.iter().fold(S::zero(), |acc, v| acc + cabs(*v));
        // xi = sign(y), elementwise on the complex circle
        let xi: Vec<C<S>> = y
            .iter()
            .map(|&v| {
                let m = cabs(v);
                if m == S::zero() {
                    C::new(S::one(), S::zero())
                } else {
                    v / m
                }
            })
            .collect();
        let z = lu.solve_adjoint(&xi);
        let (mut best, mut best_j) = (S::zero(), 0);
        for (j, v) in z.iter().enumerate() {
            let m = cabs(*v);
            if m > best {
                best = m;
                best_j = j;
            }
        }
        if norm_y <= est {
            break;
        }
        est = norm_y;
        let dot = x.iter().zip(&z).fold(S::zero(), |acc, (a, b)| {
            acc + (a.conj() * b).re
        });
        if !(best > dot) {
            break;
        }
        x = vec![C::new(S::zero(), S::zero()); n];
        x[best_j] = C::new(S::one(), S::zero());
    }
    est * a.norm_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::c;

    fn rand_stream(seed: u64) -> impl FnMut() -> f64 {
        let mut state = seed;
        move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        }
    }

    fn random_matrix(n: usize, seed: u64) -> CMatrix<f64> {
        let mut next = rand_stream(seed);
        let mut a = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                a.set(i, j, c(next() * 4.0, next() * 4.0));
            }
            // diagonal lift keeps the samples comfortably nonsingular
            let d = a.get(i, i) + c(3.0, 1.0);
            a.set(i, i, d);
        }
        a
    }

    fn residual(a: &CMatrix<f64>, x: &[C<f64>], b: &[C<f64>]) -> f64 {
        let n = a.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let mut acc = c::<f64>(0.0, 0.0);
            for j in 0..n {
                acc += a.get(i, j) * x[j];
            }
            worst = worst.max((acc - b[i]).norm());
        }
        worst
    }

    #[test]
    fn solve_random_systems() {
        for (n, seed) in [(1usize, 7u64), (4, 11), (12, 13), (40, 17)] {
            let a = random_matrix(n, seed);
            let mut next = rand_stream(seed ^ 0xabcdef);
            let b: Vec<C<f64>> = (0..n).map(|_| c(next(), next())).collect();
            let lu = Lu::factor(&a).unwrap();
            let x = lu.solve(&b);
            assert!(residual(&a, &x, &b) < 1e-11, "n={n}");

            // adjoint solve: A^H y = b
            let y = lu.solve_adjoint(&b);
            let mut ah = CMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    ah.set(i, j, a.get(j, i).conj());
                }
            }
            assert!(residual(&ah, &y, &b) < 1e-11, "adjoint n={n}");
        }
    }

    #[test]
    fn singular_is_reported() {
        let mut a: CMatrix<f64> = CMatrix::zeros(3);
        for j in 0..3 {
            a.set(0, j, c(1.0, 0.0));
            a.set(1, j, c(2.0, 0.0)); // row 1 = 2 * row 0
            a.set(2, j, c(j as f64, 1.0));
        }
        assert!(matches!(Lu::factor(&a), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn condition_estimate_tracks_exact() {
        for (n, seed) in [(3usize, 5u64), (8, 23), (20, 41)] {
            let a = random_matrix(n, seed);
            let lu = Lu::factor(&a).unwrap();
            let est = condition_estimate(&a, &lu);

            // exact 1-norm of the inverse by solving for every unit vector
            let mut inv_norm: f64 = 0.0;
            for j in 0..n {
                let mut e = vec![c::<f64>(0.0, 0.0); n];
                e[j] = c(1.0, 0.0);
                let col = lu.solve(&e);
                inv_norm = inv_norm.max(col.iter().map(|v| v.norm()).sum());
            }
            let exact = inv_norm * a.norm_one();
            assert!(
                est <= exact * 1.0000001 && est >= exact * 0.3,
                "n={n}: est {est} vs exact {exact}"
            );
        }
    }
}
