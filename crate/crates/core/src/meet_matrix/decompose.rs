use std::sync::Arc;

use fixedbitset::FixedBitSet;
use num_traits::{One, Zero};

use super::{meet_matrix, require_family, Construction, LatticeFunction, MeetMatrix};
use crate::error::{Error, Result};
use crate::incidence::{mobius_invert, mobius_of_subset, IncidenceFunction};
use crate::matrix::{Inertia, RationalMatrix};
use crate::poset::{Element, ElementSubset, LatticeFamily};
use crate::Rational;

/// Largest Kronecker product [`Decomposition::materialize_factor`] builds.
pub const MAX_MATERIALIZED: usize = 10_000;

/// The 0/1 matrix `E_ij = [x_j <= x_i]` of an ordered subset. Unit lower
/// triangular because the subset is in a linear extension order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZetaFactor {
    n: usize,
    bits: FixedBitSet,
}

impl ZetaFactor {
    pub fn of_subset(s: &ElementSubset) -> ZetaFactor {
        let n = s.len();
        let mut bits = FixedBitSet::with_capacity(n * n);
        for i in 0..n {
            for j in 0..=i {
                if s.family().leq(s.get(j), s.get(i)) {
                    bits.insert(i * n + j);
                }
            }
        }
        ZetaFactor { n, bits }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits.contains(i * self.n + j)
    }

    pub fn is_unit_lower_triangular(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) && (i + 1..self.n).all(|j| !self.get(i, j)))
    }

    pub fn to_matrix(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.n, |i, j| if self.get(i, j) { Rational::one() } else { Rational::zero() })
    }
}

/// Bijection between lexicographic multi-indices and flat indices; the last
/// axis varies fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderMap {
    dims: Vec<usize>,
}

impl OrderMap {
    pub fn new(dims: Vec<usize>) -> OrderMap {
        OrderMap { dims }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flat(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dims.len());
        multi.iter().zip(&self.dims).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn multi(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &n) in out.iter_mut().zip(&self.dims).rev() {
            *slot = flat % n;
            flat /= n;
        }
        out
    }
}

/// `(E1 ⊗ … ⊗ Ed) diag(Λ) (E1 ⊗ … ⊗ Ed)^T`, stored factor by factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub subsets: Vec<ElementSubset>,
    pub factors: Vec<ZetaFactor>,
    pub diag: Vec<Rational>,
    pub order_map: OrderMap,
}

impl Decomposition {
    /// Counts of positive, negative and zero entries of `Λ`.
    pub fn signature(&self) -> Inertia {
        Inertia::of_diagonal(&self.diag)
    }

    /// The subset indexing the reconstructed matrix.
    pub fn subset(&self) -> Result<ElementSubset> {
        ElementSubset::cartesian(&self.subsets)
    }

    /// `E1 ⊗ … ⊗ Ed` as a dense matrix; refused beyond
    /// [`MAX_MATERIALIZED`] rows.
    pub fn materialize_factor(&self) -> Result<RationalMatrix> {
        let n = self.order_map.len();
        if n > MAX_MATERIALIZED {
            return Err(Error::InvalidParameter(format!(
                "refusing to materialize a {n}x{n} Kronecker product"
            )));
        }
        let mut it = self.factors.iter().map(ZetaFactor::to_matrix);
        let first = it.next().expect("at least one factor");
        Ok(it.fold(first, |acc, e| acc.kron(&e)))
    }
}

fn evaluate_on(subset: &ElementSubset, f: &LatticeFunction) -> Result<Vec<Rational>> {
    subset.members().iter().map(|x| f.eval(x)).collect()
}

/// `A = E D E^T` for a lower closed subset, with
/// `d_i = Σ_{z <= x_i} f(z) μ(z, x_i)` computed by Möbius inversion of the
/// restricted function `f_r`.
pub fn ldl_lower_closed(subset: &ElementSubset, f: &LatticeFunction) -> Result<Decomposition> {
    require_family(subset.family(), f.family())?;
    subset.require_lower_closed()?;
    let values = evaluate_on(subset, f)?;
    let poset = Arc::new(subset.to_poset());
    let fr = IncidenceFunction::restricted(&poset, |x| values[poset.index_of(x).expect("member")].clone())?;
    let diag = mobius_invert(&fr)?.bottom_row()?;
    Ok(Decomposition {
        subsets: vec![subset.clone()],
        factors: vec![ZetaFactor::of_subset(subset)],
        diag,
        order_map: OrderMap::new(vec![subset.len()]),
    })
}

/// Two-factor decomposition over `S × T` with
/// `c(i, j) = Σ_{x_k <= x_i, y_l <= y_j} f(x_k, y_l) μ_S(x_k, x_i) μ_T(y_l, y_j)`.
pub fn kron_decompose(s: &ElementSubset, t: &ElementSubset, f: &LatticeFunction) -> Result<Decomposition> {
    let product = LatticeFamily::Product(vec![s.family().clone(), t.family().clone()]);
    require_family(&product, f.family())?;
    let (mu_s, mu_t) = (mobius_of_subset(s)?, mobius_of_subset(t)?);
    let (n, m) = (s.len(), t.len());
    let mut fv = vec![Rational::zero(); n * m];
    for k in 0..n {
        for l in 0..m {
            fv[k * m + l] = f.eval(&Element::Tuple(vec![s.get(k).clone(), t.get(l).clone()]))?;
        }
    }
    let mut diag = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            let mut c = Rational::zero();
            for k in 0..=i {
                let a = mu_s.get(k, i);
                if a.is_zero() {
                    continue;
                }
                for l in 0..=j {
                    let b = mu_t.get(l, j);
                    if !b.is_zero() {
                        c += &fv[k * m + l] * a * b;
                    }
                }
            }
            diag.push(c);
        }
    }
    Ok(Decomposition {
        subsets: vec![s.clone(), t.clone()],
        factors: vec![ZetaFactor::of_subset(s), ZetaFactor::of_subset(t)],
        diag,
        order_map: OrderMap::new(vec![n, m]),
    })
}

/// Applies `v ↦ v * μ_{S_a}` along every axis of a lexicographic tensor,
/// giving `Σ_{x_k <= x_i} v(x_k) μ_{S_1×…×S_d}(x_k, x_i)`.
pub(crate) fn mobius_transform(subsets: &[ElementSubset], mut values: Vec<Rational>) -> Result<Vec<Rational>> {
    let dims: Vec<usize> = subsets.iter().map(ElementSubset::len).collect();
    debug_assert_eq!(values.len(), dims.iter().product::<usize>());
    for (axis, s) in subsets.iter().enumerate() {
        let mu = mobius_of_subset(s)?;
        let n = dims[axis];
        // nonzero μ(k, i) for each i
        let terms: Vec<Vec<(usize, Rational)>> = (0..n)
            .map(|i| (0..=i).filter(|&k| !mu.get(k, i).is_zero()).map(|k| (k, mu.get(k, i).clone())).collect())
            .collect();
        let stride: usize = dims[axis + 1..].iter().product();
        let outer: usize = dims[..axis].iter().product();
        let mut line = vec![Rational::zero(); n];
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * n * stride + inner;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = terms[i].iter().map(|(k, c)| &values[base + k * stride] * c).sum();
                }
                for (i, v) in line.iter_mut().enumerate() {
                    values[base + i * stride] = std::mem::take(v);
                }
            }
        }
    }
    Ok(values)
}

/// `d`-factor decomposition over `S_1 × … × S_d`, `Λ` computed with the
/// product of the restricted Möbius functions. A single subset gives the
/// ordinary decomposition of a meet closed set.
pub fn kron_decompose_d(subsets: &[ElementSubset], f: &LatticeFunction) -> Result<Decomposition> {
    if subsets.is_empty() {
        return Err(Error::EmptySubset);
    }
    let expected = if subsets.len() == 1 {
        subsets[0].family().clone()
    } else {
        LatticeFamily::Product(subsets.iter().map(|s| s.family().clone()).collect())
    };
    require_family(&expected, f.family())?;
    for s in subsets {
        s.require_meet_closed()?;
    }
    let grid = ElementSubset::cartesian(subsets)?;
    let values = evaluate_on(&grid, f)?;
    let diag = mobius_transform(subsets, values)?;
    Ok(Decomposition {
        subsets: subsets.to_vec(),
        factors: subsets.iter().map(ZetaFactor::of_subset).collect(),
        diag,
        order_map: OrderMap::new(subsets.iter().map(ElementSubset::len).collect()),
    })
}

/// Multiplies the factors back together. Entry `(p, q)` sums `Λ_r` over the
/// multi-indices `r` lying below both `p` and `q` on every axis, so the
/// Kronecker product is never formed.
pub fn reconstruct(d: &Decomposition) -> Result<MeetMatrix> {
    let subset = d.subset()?;
    let map = &d.order_map;
    let n = map.len();
    // common[a][p*n_a + q] = indices r with E_a(p, r) = E_a(q, r) = 1
    let common: Vec<Vec<Vec<usize>>> = d
        .factors
        .iter()
        .map(|e| {
            let k = e.dim();
            let mut out = Vec::with_capacity(k * k);
            for p in 0..k {
                for q in 0..k {
                    out.push((0..=p.min(q)).filter(|&r| e.get(p, r) && e.get(q, r)).collect());
                }
            }
            out
        })
        .collect();
    let mut m = RationalMatrix::zeros(n);
    for p in 0..n {
        let pm = map.multi(p);
        for q in p..n {
            let qm = map.multi(q);
            let lists: Vec<&Vec<usize>> = (0..pm.len())
                .map(|a| &common[a][pm[a] * map.dims()[a] + qm[a]])
                .collect();
            let v = sum_over_product(&lists, map, &d.diag);
            if p != q {
                m.set(q, p, v.clone());
            }
            m.set(p, q, v);
        }
    }
    Ok(MeetMatrix { subset, matrix: m })
}

fn sum_over_product(lists: &[&Vec<usize>], map: &OrderMap, diag: &[Rational]) -> Rational {
    if lists.iter().any(|l| l.is_empty()) {
        return Rational::zero();
    }
    let mut acc = Rational::zero();
    let mut idx = vec![0usize; lists.len()];
    let mut multi = vec![0usize; lists.len()];
    loop {
        for a in 0..lists.len() {
            multi[a] = lists[a][idx[a]];
        }
        acc += &diag[map.flat(&multi)];
        let mut axis = lists.len();
        loop {
            if axis == 0 {
                return acc;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < lists[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Outcome of collapsing `(S^d)_f` for `f = g(x_1 ∧ … ∧ x_d)`.
#[derive(Clone, Debug)]
pub struct RankCollapse {
    /// Flat indices of the diagonal points `(x, x, …, x)`.
    pub diagonal_indices: Vec<usize>,
    /// For every flat index, the diagonal index whose row it duplicates.
    pub representatives: Vec<usize>,
    /// `(S)_g`, the principal submatrix on the diagonal indices.
    pub principal: MeetMatrix,
    pub principal_inertia: Inertia,
    /// Exact inertia of the full matrix, computed when it has at most
    /// [`RankCollapse::FULL_INERTIA_LIMIT`] rows.
    pub full_inertia: Option<Inertia>,
}

impl RankCollapse {
    pub const FULL_INERTIA_LIMIT: usize = 256;

    /// The full matrix is PSD iff `(S)_g` is.
    pub fn is_psd(&self) -> bool {
        self.principal_inertia.is_psd()
    }

    pub fn rank(&self) -> usize {
        self.principal_inertia.positive + self.principal_inertia.negative
    }
}

/// Every row of `(S^d)_f` at `(x_1, …, x_d)` equals the row at the diagonal
/// point `(z, …, z)` with `z = x_1 ∧ … ∧ x_d`, so the matrix is PSD exactly
/// when `(S)_g` is.
pub fn rank_collapse(s: &ElementSubset, d: usize, f: &LatticeFunction) -> Result<RankCollapse> {
    let Construction::MeetComposed { inner: g, arity } = f.construction() else {
        return Err(Error::NotDiagonalForm);
    };
    if *arity != d {
        return Err(Error::DimensionMismatch { expected: d, found: *arity });
    }
    require_family(s.family(), g.family())?;
    s.require_meet_closed()?;
    let parts = vec![s.clone(); d];
    let grid = ElementSubset::cartesian(&parts)?;
    let map = OrderMap::new(vec![s.len(); d]);
    let fam = s.family();
    let diagonal_indices: Vec<usize> = (0..s.len()).map(|i| map.flat(&vec![i; d])).collect();
    let representatives: Vec<usize> = (0..map.len())
        .map(|p| {
            let multi = map.multi(p);
            let mut z = s.get(multi[0]).clone();
            for &i in &multi[1..] {
                z = fam.meet(&z, s.get(i));
            }
            diagonal_indices[s.index_of(&z).expect("meet closed")]
        })
        .collect();
    let principal = meet_matrix(s, g)?;
    let principal_inertia = principal.matrix.inertia();
    let full_inertia = if grid.len() <= RankCollapse::FULL_INERTIA_LIMIT {
        Some(meet_matrix(&grid, f)?.matrix.inertia())
    } else {
        None
    };
    Ok(RankCollapse { diagonal_indices, representatives, principal, principal_inertia, full_inertia })
}
