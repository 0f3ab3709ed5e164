//! Dense square matrices over exact rationals.
//!
//! Inertia is computed by a fraction-free (Bareiss) symmetric elimination on
//! the integer-scaled matrix. Every intermediate entry is a minor of the
//! input, so exact division never leaves the integers and no gcd
//! normalization is needed.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    n: usize,
    data: Vec<Rational>,
}

/// Counts of positive, negative and zero eigenvalues.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn of_diagonal<'a>(diag: impl IntoIterator<Item = &'a Rational>) -> Inertia {
        let mut out = Inertia::default();
        for d in diag {
            if d.is_positive() {
                out.positive += 1;
            } else if d.is_negative() {
                out.negative += 1;
            } else {
                out.zero += 1;
            }
        }
        out
    }

    pub fn is_psd(&self) -> bool {
        self.negative == 0
    }
}

impl RationalMatrix {
    pub fn zeros(n: usize) -> RationalMatrix {
        RationalMatrix { n, data: vec![Rational::zero(); n * n] }
    }

    pub fn identity(n: usize) -> RationalMatrix {
        Self::from_fn(n, |i, j| if i == j { Rational::one() } else { Rational::zero() })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Rational>(n: usize, mut f: F) -> RationalMatrix {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        RationalMatrix { n, data }
    }

    /// Panics unless `rows` is square.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> RationalMatrix {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        RationalMatrix { n, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> RationalMatrix {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| Rational::from_integer(v.into())).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn transpose(&self) -> RationalMatrix {
        Self::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * n + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn kron(&self, other: &RationalMatrix) -> RationalMatrix {
        let m = other.n;
        Self::from_fn(self.n * m, |i, j| self.get(i / m, j / m) * other.get(i % m, j % m))
    }

    /// Principal submatrix on the given indices.
    pub fn principal(&self, idx: &[usize]) -> RationalMatrix {
        Self::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]).clone())
    }

    pub fn trace(&self) -> Rational {
        (0..self.n).map(|i| self.get(i, i).clone()).sum()
    }

    /// `v^T M v`.
    pub fn quadratic_form(&self, v: &[Rational]) -> Rational {
        assert_eq!(v.len(), self.n);
        let mut acc = Rational::zero();
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            let mut row = Rational::zero();
            for (j, vj) in v.iter().enumerate() {
                if !vj.is_zero() {
                    row += self.get(i, j) * vj;
                }
            }
            acc += vi * row;
        }
        acc
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).to_f64().unwrap_or(f64::NAN))
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs().to_f64().unwrap_or(f64::INFINITY)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Integer matrix `c * M` with `c > 0` the lcm of all denominators.
    fn scaled_integers(&self) -> Vec<BigInt> {
        let mut scale = BigInt::one();
        for v in &self.data {
            scale = scale.lcm(v.denom());
        }
        self.data.iter().map(|v| v.numer() * (&scale / v.denom())).collect()
    }

    /// Determinant by fraction-free elimination with row pivoting.
    pub fn determinant(&self) -> Rational {
        let n = self.n;
        if n == 0 {
            return Rational::one();
        }
        let mut scale = BigInt::one();
        for v in &self.data {
            scale = scale.lcm(v.denom());
        }
        let mut a = self.scaled_integers();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&r| !a[r * n + k].is_zero()) else {
                return Rational::zero();
            };
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                sign = -sign;
            }
            let pivot = a[k * n + k].clone();
            for i in (k + 1)..n {
                for j in (k + 1)..n {
                    let v = (&pivot * &a[i * n + j] - &a[i * n + k] * &a[k * n + j]) / &prev;
                    a[i * n + j] = v;
                }
                a[i * n + k] = BigInt::zero();
            }
            prev = pivot;
        }
        Rational::new(sign * &a[n * n - 1], scale.pow(n as u32))
    }

    /// Coefficients of `det(λI - M)`, highest degree first (leading 1), by
    /// the Faddeev–LeVerrier recursion.
    pub fn characteristic_polynomial(&self) -> Vec<Rational> {
        let n = self.n;
        let mut coeffs = vec![Rational::one()];
        let mut m = Self::zeros(n);
        for k in 1..=n {
            let mut next = self.mul(&m);
            let c_prev = coeffs[k - 1].clone();
            for i in 0..n {
                next.data[i * n + i] += &c_prev;
            }
            let c = -self.mul(&next).trace() / Rational::from_integer(BigInt::from(k));
            coeffs.push(c);
            m = next;
        }
        coeffs
    }

    /// Solves `M x = b`; `None` if `M` is singular.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        let n = self.n;
        let mut a: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.push(b[i].clone());
                r
            })
            .collect();
        for k in 0..n {
            let p = (k..n).find(|&r| !a[r][k].is_zero())?;
            a.swap(k, p);
            let pivot = a[k][k].clone();
            for i in 0..n {
                if i == k || a[i][k].is_zero() {
                    continue;
                }
                let factor = &a[i][k] / &pivot;
                for j in k..=n {
                    let t = &factor * &a[k][j];
                    a[i][j] -= t;
                }
            }
        }
        Some((0..n).map(|i| &a[i][n] / &a[i][i]).collect())
    }

    /// Exact symmetric pivoted `LDL^T`; see [`ExactLdl`].
    pub fn exact_ldl(&self) -> ExactLdl {
        debug_assert!(self.is_symmetric());
        let n = self.n;
        let mut a = self.scaled_integers();
        let mut rem: Vec<usize> = (0..n).collect();
        let mut pivots = Vec::new();
        let mut order = Vec::new();
        let mut prev = BigInt::one();
        let mut inertia = Inertia::default();
        let mut failure: Option<Failure> = None;

        while !rem.is_empty() {
            let pos = rem.iter().position(|&i| !a[i * n + i].is_zero());
            let pos = match pos {
                Some(p) => p,
                None => {
                    let pair = rem.iter().enumerate().find_map(|(x, &i)| {
                        rem[x + 1..].iter().find(|&&j| !a[i * n + j].is_zero()).map(|&j| (i, j))
                    });
                    let Some((i, j)) = pair else {
                        inertia.zero += rem.len();
                        break;
                    };
                    // zero diagonal with a nonzero off-diagonal entry: the
                    // remaining block is indefinite
                    if failure.is_none() {
                        let t = if a[i * n + j].is_positive() { -1 } else { 1 };
                        failure = Some(Failure {
                            pivots: order.clone(),
                            direction: vec![(i, Rational::from_integer(t.into())), (j, Rational::one())],
                        });
                    }
                    // congruence: row_i += row_j, col_i += col_j
                    for &k in &rem {
                        let v = a[j * n + k].clone();
                        a[i * n + k] += v;
                    }
                    for &k in &rem {
                        let v = a[k * n + j].clone();
                        a[k * n + i] += v;
                    }
                    rem.iter().position(|&r| r == i).expect("i is active")
                }
            };
            let p = rem.remove(pos);
            let d = a[p * n + p].clone();
            let ldl_pivot = Rational::new(d.clone(), prev.clone());
            if ldl_pivot.is_positive() {
                inertia.positive += 1;
            } else {
                inertia.negative += 1;
                if failure.is_none() {
                    failure = Some(Failure { pivots: order.clone(), direction: vec![(p, Rational::one())] });
                }
            }
            for (x, &i) in rem.iter().enumerate() {
                for &j in &rem[x..] {
                    let v = (&d * &a[i * n + j] - &a[i * n + p] * &a[p * n + j]) / &prev;
                    a[j * n + i] = v.clone();
                    a[i * n + j] = v;
                }
            }
            pivots.push(ldl_pivot);
            order.push(p);
            prev = d;
        }
        ExactLdl { inertia, pivots, order, failure }
    }

    pub fn inertia(&self) -> Inertia {
        self.exact_ldl().inertia
    }
}

#[derive(Clone, Debug)]
struct Failure {
    // pivots eliminated before the failure, all with positive LDL pivots
    pivots: Vec<usize>,
    // sparse direction in the Schur complement with negative value
    direction: Vec<(usize, Rational)>,
}

/// Result of the exact symmetric elimination.
#[derive(Clone, Debug)]
pub struct ExactLdl {
    pub inertia: Inertia,
    /// Diagonal of `D` in elimination order (nonzero pivots only).
    pub pivots: Vec<Rational>,
    /// Original row index eliminated at each step.
    pub order: Vec<usize>,
    failure: Option<Failure>,
}

impl ExactLdl {
    pub fn is_psd(&self) -> bool {
        self.failure.is_none()
    }

    /// A vector `v` with `v^T M v < 0` when the matrix is not PSD.
    pub fn witness(&self, m: &RationalMatrix) -> Option<Vec<Rational>> {
        let fail = self.failure.as_ref()?;
        let n = m.dim();
        let mut v = vec![Rational::zero(); n];
        for (i, c) in &fail.direction {
            v[*i] = c.clone();
        }
        if !fail.pivots.is_empty() {
            // v_K = -M_KK^{-1} M_K,R u makes v^T M v equal the Schur form
            let k = &fail.pivots;
            let mkk = m.principal(k);
            let rhs: Vec<Rational> = k
                .iter()
                .map(|&r| fail.direction.iter().map(|(c, u)| m.get(r, *c) * u).sum())
                .collect();
            let y = mkk.solve(&rhs).expect("leading block with positive pivots is nonsingular");
            for (&r, yr) in k.iter().zip(y) {
                v[r] = -yr;
            }
        }
        debug_assert!(m.quadratic_form(&v).is_negative());
        Some(v)
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}
