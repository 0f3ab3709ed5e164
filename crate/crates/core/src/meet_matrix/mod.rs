//! Meet matrices `(S)_f` and their structured factorizations.

mod decompose;
mod function;

use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::poset::{ElementSubset, LatticeFamily};

pub use decompose::{
    kron_decompose, kron_decompose_d, ldl_lower_closed, rank_collapse, reconstruct, Decomposition, OrderMap,
    RankCollapse, ZetaFactor,
};
pub(crate) use decompose::mobius_transform;
pub use function::{Construction, LatticeFunction};

/// The matrix `f(x_i ∧ x_j)` over an ordered subset.
#[derive(Clone, Debug, PartialEq)]
pub struct MeetMatrix {
    pub subset: ElementSubset,
    pub matrix: RationalMatrix,
}

impl MeetMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

pub(crate) fn require_family(expected: &LatticeFamily, found: &LatticeFamily) -> Result<()> {
    if expected.arity() != found.arity() {
        return Err(Error::DimensionMismatch { expected: expected.arity(), found: found.arity() });
    }
    if expected != found {
        return Err(Error::PosetMismatch);
    }
    Ok(())
}

/// Builds `(S)_f`. The subset need not be meet closed.
pub fn meet_matrix(subset: &ElementSubset, f: &LatticeFunction) -> Result<MeetMatrix> {
    require_family(subset.family(), f.family())?;
    let fam = subset.family();
    let n = subset.len();
    let mut m = RationalMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = f.eval(&fam.meet(subset.get(i), subset.get(j)))?;
            if i != j {
                m.set(j, i, v.clone());
            }
            m.set(i, j, v);
        }
    }
    Ok(MeetMatrix { subset: subset.clone(), matrix: m })
}
