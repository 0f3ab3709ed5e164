//! Positive definiteness of lattice functions: the diagonal criterion on a
//! lower closed covering, an eigenvalue oracle, monotonicity diagnostics and
//! PD-preserving combinators.
//!
//! A function is positive definite when every finite meet matrix `(S)_f` is
//! positive *semi*definite. Verdicts are relative to the covering bound that
//! was tested unless the function's construction certifies it.

use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_traits::{FromPrimitive, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::incidence::mobius;
use crate::matrix::{Inertia, RationalMatrix};
use crate::meet_matrix::{meet_matrix, mobius_transform, require_family, Construction, LatticeFunction};
use crate::poset::{Element, ElementSubset, LatticeFamily, Poset};
use crate::Rational;

/// Default relative tolerance of the float oracle.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest matrix the oracle certifies exactly.
pub const EXACT_LIMIT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PositiveDefiniteOnTestedCovering,
    NotPositiveDefinite,
}

/// Evidence for a negative verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// An element whose Möbius-inverted value is negative.
    Element {
        element: Element,
        #[serde(with = "crate::rational_serde")]
        value: Rational,
    },
    /// A subset and a vector with `v^T (S)_f v < 0`.
    Vector {
        subset: Vec<Element>,
        #[serde(with = "crate::rational_serde::vec")]
        vector: Vec<Rational>,
        #[serde(with = "crate::rational_serde")]
        value: Rational,
    },
}

impl Witness {
    pub fn value(&self) -> &Rational {
        match self {
            Witness::Element { value, .. } | Witness::Vector { value, .. } => value,
        }
    }

    /// Recomputes the witnessed quantity from `f` alone: the inverted value
    /// `Σ_{z <= x} f(z) μ(z, x)` for an element, the quadratic form for a
    /// vector.
    pub fn replay(&self, f: &LatticeFunction) -> Result<Rational> {
        let fam = f.family();
        match self {
            Witness::Element { element, .. } => {
                let lower = fam.lower_set(element);
                let poset = Arc::new(Poset::from_order(lower.clone(), |a, b| fam.leq(a, b)));
                let mu = mobius(&poset);
                let top = poset.index_of(element).expect("x is in its lower set");
                let mut acc = Rational::zero();
                for (z, e) in lower.iter().enumerate() {
                    let c = mu.get(z, top);
                    if !c.is_zero() {
                        acc += f.eval(e)? * c;
                    }
                }
                Ok(acc)
            }
            Witness::Vector { subset, vector, .. } => {
                let mut acc = Rational::zero();
                for (x, vx) in subset.iter().zip(vector) {
                    if vx.is_zero() {
                        continue;
                    }
                    for (y, vy) in subset.iter().zip(vector) {
                        if !vy.is_zero() {
                            acc += f.eval(&fam.meet(x, y))? * vx * vy;
                        }
                    }
                }
                Ok(acc)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdVerdict {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub tested_bound: usize,
    /// Set when the construction of `f` proves positive definiteness on the
    /// whole lattice, not just the tested covering.
    #[serde(rename = "certificate_flag")]
    pub certificate: bool,
}

impl PdVerdict {
    pub fn positive(tested_bound: usize, certificate: bool) -> PdVerdict {
        PdVerdict { verdict: Verdict::PositiveDefiniteOnTestedCovering, witness: None, tested_bound, certificate }
    }

    pub fn negative(witness: Witness, tested_bound: usize) -> PdVerdict {
        PdVerdict { verdict: Verdict::NotPositiveDefinite, witness: Some(witness), tested_bound, certificate: false }
    }

    pub fn is_positive(&self) -> bool {
        self.verdict == Verdict::PositiveDefiniteOnTestedCovering
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub psd: bool,
    /// Smallest eigenvalue from the float path, when it converged.
    pub min_eigenvalue: Option<f64>,
    /// `-tol * max(1, ||M||_inf)`.
    pub threshold: f64,
    /// Exact inertia, for matrices up to [`EXACT_LIMIT`] rows.
    pub exact: Option<Inertia>,
    /// A vector with `v^T M v < 0`, verified exactly.
    #[serde(skip)]
    pub witness: Option<Vec<Rational>>,
}

/// Decides whether `m` is positive semidefinite. Small matrices are decided
/// exactly by pivoted `LDL^T`; the float eigenvalue test is used otherwise.
pub fn psd_oracle(m: &RationalMatrix, tol: f64) -> Result<OracleReport> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be nonnegative, got {tol}")));
    }
    let n = m.dim();
    let threshold = -tol * m.inf_norm().max(1.0);
    let eig = if n == 0 { None } else { SymmetricEigen::try_new(m.to_f64(), f64::EPSILON, 10_000) };
    let min_eigenvalue = eig.as_ref().map(|e| e.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min));

    if n <= EXACT_LIMIT {
        let ldl = m.exact_ldl();
        return Ok(OracleReport {
            psd: ldl.is_psd(),
            min_eigenvalue,
            threshold,
            exact: Some(ldl.inertia),
            witness: ldl.witness(m),
        });
    }
    let (Some(eig), Some(lmin)) = (eig, min_eigenvalue) else {
        return Err(Error::NumericalFailure(n));
    };
    let psd = lmin >= threshold;
    let witness = if psd {
        None
    } else {
        let k = eig.eigenvalues.iter().position(|&v| v == lmin).expect("minimum is attained");
        let v: Option<Vec<Rational>> = eig.eigenvectors.column(k).iter().map(|&x| Rational::from_f64(x)).collect();
        v.filter(|v| m.quadratic_form(v).is_negative())
    };
    Ok(OracleReport { psd, min_eigenvalue, threshold, exact: None, witness })
}

fn covering_factors(family: &LatticeFamily, bound: usize) -> Result<Vec<ElementSubset>> {
    match family {
        LatticeFamily::Product(parts) => parts.iter().map(|p| p.covering(bound)).collect(),
        other => Ok(vec![other.covering(bound)?]),
    }
}

/// Inverted values `(f_r * μ)(0̂, x)` over the covering set at `bound`, in
/// covering order.
pub fn inverted_values(f: &LatticeFunction, bound: usize) -> Result<(ElementSubset, Vec<Rational>)> {
    let family = f.family();
    family.least().ok_or(Error::NoLeastElement)?;
    let factors = covering_factors(family, bound)?;
    let covering = family.covering(bound)?;
    let values: Vec<Rational> = covering.members().iter().map(|x| f.eval(x)).collect::<Result<_>>()?;
    Ok((covering, mobius_transform(&factors, values)?))
}

/// The diagonal criterion: `f` is PD on the covering set `S_bound` iff every
/// inverted value there is nonnegative. Reports the first negative value in
/// covering order.
pub fn pd_criterion(f: &LatticeFunction, family: &LatticeFamily, bound: usize) -> Result<PdVerdict> {
    require_family(family, f.family())?;
    let (covering, values) = inverted_values(f, bound)?;
    for (x, v) in covering.members().iter().zip(values) {
        if v.is_negative() {
            return Ok(PdVerdict::negative(Witness::Element { element: x.clone(), value: v }, bound));
        }
    }
    Ok(PdVerdict::positive(bound, f.is_certified()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceRow {
    pub bound: usize,
    pub criterion: bool,
    pub oracle: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub rows: Vec<EquivalenceRow>,
}

impl EquivalenceReport {
    pub fn agree(&self) -> bool {
        self.rows.iter().all(|r| r.criterion == r.oracle)
    }
}

/// Runs the criterion and the oracle on `(S_m)_f` for every `m <= bound`.
pub fn check_covering_equivalence(f: &LatticeFunction, family: &LatticeFamily, bound: usize) -> Result<EquivalenceReport> {
    let mut rows = Vec::with_capacity(bound);
    for m in 1..=bound {
        let criterion = pd_criterion(f, family, m)?.is_positive();
        let mm = meet_matrix(&family.covering(m)?, f)?;
        let oracle = psd_oracle(&mm.matrix, DEFAULT_TOL)?.psd;
        rows.push(EquivalenceRow { bound: m, criterion, oracle });
    }
    Ok(EquivalenceReport { rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityReport {
    /// First member with `f(x) < 0`.
    pub negative_at: Option<(Element, Rational)>,
    /// First comparable pair `x <= y` with `f(x) > f(y)`.
    pub decreasing: Option<(Element, Element)>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.negative_at.is_none() && self.decreasing.is_none()
    }
}

/// Checks `f >= 0` and `f(x) <= f(y)` for `x <= y` on `S`. Every PD function
/// passes; a failure proves `f` is not PD (a 2x2 principal minor is negative).
pub fn check_monotonicity(f: &LatticeFunction, s: &ElementSubset) -> Result<MonotonicityReport> {
    require_family(s.family(), f.family())?;
    let fam = s.family();
    let vals: Vec<Rational> = s.members().iter().map(|x| f.eval(x)).collect::<Result<_>>()?;
    let negative_at = s.members().iter().zip(&vals).find(|(_, v)| v.is_negative()).map(|(x, v)| (x.clone(), v.clone()));
    let mut decreasing = None;
    'outer: for (i, x) in s.members().iter().enumerate() {
        for (j, y) in s.members().iter().enumerate().skip(i + 1) {
            if fam.leq(x, y) && vals[i] > vals[j] {
                decreasing = Some((x.clone(), y.clone()));
                break 'outer;
            }
        }
    }
    Ok(MonotonicityReport { negative_at, decreasing })
}

fn same_family(f: &LatticeFunction, g: &LatticeFunction) -> Result<()> {
    require_family(f.family(), g.family())
}

/// `a f` for `a >= 0`.
pub fn scale(f: &LatticeFunction, a: Rational) -> Result<LatticeFunction> {
    if a.is_negative() {
        return Err(Error::NegativeScalar(a.to_string()));
    }
    let inner = f.clone();
    let c = a.clone();
    Ok(LatticeFunction::build(
        format!("{a}*{}", f.name()),
        f.family().clone(),
        Construction::Scaled(a, f.clone()),
        move |x| Ok(&c * inner.eval(x)?),
    ))
}

pub fn add(f: &LatticeFunction, g: &LatticeFunction) -> Result<LatticeFunction> {
    same_family(f, g)?;
    let (a, b) = (f.clone(), g.clone());
    Ok(LatticeFunction::build(
        format!("({}+{})", f.name(), g.name()),
        f.family().clone(),
        Construction::Sum(f.clone(), g.clone()),
        move |x| Ok(a.eval(x)? + b.eval(x)?),
    ))
}

/// Pointwise product; PD is preserved because meet matrices multiply
/// entrywise.
pub fn pointwise_mul(f: &LatticeFunction, g: &LatticeFunction) -> Result<LatticeFunction> {
    same_family(f, g)?;
    let (a, b) = (f.clone(), g.clone());
    Ok(LatticeFunction::build(
        format!("({}*{})", f.name(), g.name()),
        f.family().clone(),
        Construction::Product(f.clone(), g.clone()),
        move |x| Ok(a.eval(x)? * b.eval(x)?),
    ))
}

/// `f(x, y) = g(x) h(y)` on the product of the two families.
pub fn factorable(g: &LatticeFunction, h: &LatticeFunction) -> LatticeFunction {
    let family = LatticeFamily::Product(vec![g.family().clone(), h.family().clone()]);
    let (a, b) = (g.clone(), h.clone());
    LatticeFunction::build(
        format!("{}⊗{}", g.name(), h.name()),
        family,
        Construction::Factorable(g.clone(), h.clone()),
        move |x| match x {
            Element::Tuple(items) if items.len() == 2 => Ok(a.eval(&items[0])? * b.eval(&items[1])?),
            _ => Err(Error::Evaluation(format!("{x} is not a pair"))),
        },
    )
}

/// Checks `(S × T)_f = (S)_g ⊗ (T)_h` for `f = g ⊗ h`.
pub fn kronecker_identity(g: &LatticeFunction, h: &LatticeFunction, s: &ElementSubset, t: &ElementSubset) -> Result<bool> {
    let f = factorable(g, h);
    let full = meet_matrix(&ElementSubset::cartesian(&[s.clone(), t.clone()])?, &f)?;
    let kron = meet_matrix(s, g)?.matrix.kron(&meet_matrix(t, h)?.matrix);
    Ok(full.matrix == kron)
}

/// Certifies `f = g ⊗ h`: both components must pass the criterion on the
/// covering at `bound`, and the Kronecker identity must hold on `S × T`.
pub fn factorable_pd(
    g: &LatticeFunction,
    h: &LatticeFunction,
    s: &ElementSubset,
    t: &ElementSubset,
    bound: usize,
) -> Result<PdVerdict> {
    for c in [g, h] {
        if !pd_criterion(c, c.family(), bound)?.is_positive() {
            return Err(Error::ComponentNotCertified(c.name().to_string()));
        }
    }
    if !kronecker_identity(g, h, s, t)? {
        return Err(Error::Evaluation("Kronecker identity failed".into()));
    }
    Ok(PdVerdict::positive(bound, g.is_certified() && h.is_certified()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::builtin;
    use crate::int;

    fn lift(spec: &str, fam: LatticeFamily) -> LatticeFunction {
        LatticeFunction::from_arithmetic(&builtin(spec, fam.arity()).unwrap(), fam).unwrap()
    }

    fn gcd_matrix(n: usize) -> RationalMatrix {
        meet_matrix(&LatticeFamily::Divisor.covering(n).unwrap(), &lift("gcd_pow:1", LatticeFamily::Divisor))
            .unwrap()
            .matrix
    }

    #[test]
    fn oracle_examples() {
        let r = psd_oracle(&gcd_matrix(4), DEFAULT_TOL).unwrap();
        assert!(r.psd);
        assert_eq!(r.exact.unwrap().positive, 4);

        let lcm = RationalMatrix::from_i64_rows(&[&[1, 1, 1, 1], &[1, 2, 1, 2], &[1, 1, 2, 2], &[1, 2, 2, 2]]);
        let r = psd_oracle(&lcm, DEFAULT_TOL).unwrap();
        assert!(!r.psd);
        assert_eq!(r.exact.unwrap().negative, 1);
        assert!(r.min_eigenvalue.unwrap() < 0.0);
        assert!(lcm.quadratic_form(r.witness.as_ref().unwrap()).is_negative());

        let z = psd_oracle(&RationalMatrix::zeros(5), DEFAULT_TOL).unwrap();
        assert!(z.psd);
        assert!(psd_oracle(&lcm, -1.0).is_err());
    }

    #[test]
    fn float_path_on_large_matrices() {
        let m = gcd_matrix(80);
        let r = psd_oracle(&m, DEFAULT_TOL).unwrap();
        assert!(r.psd && r.exact.is_none());
        let mut bad = m.clone();
        bad.set(79, 79, int(-1));
        let r = psd_oracle(&bad, DEFAULT_TOL).unwrap();
        assert!(!r.psd);
        assert!(bad.quadratic_form(r.witness.as_ref().unwrap()).is_negative());
    }

    #[test]
    fn criterion_examples() {
        let one = LatticeFunction::constant(LatticeFamily::divisor(2), int(1));
        let f = LatticeFunction::from_nonnegative_generator(one);
        let v = pd_criterion(&f, &LatticeFamily::divisor(2), 6).unwrap();
        assert!(v.is_positive() && v.certificate);
        let (_, vals) = inverted_values(&f, 6).unwrap();
        assert!(vals.iter().all(|v| v == &int(1)));

        let id = lift("gcd_pow:1", LatticeFamily::Divisor);
        let v = pd_criterion(&id, &LatticeFamily::Divisor, 30).unwrap();
        assert!(v.is_positive() && !v.certificate);

        let c = lift("ramanujan_C", LatticeFamily::divisor(2));
        let v = pd_criterion(&c, &LatticeFamily::divisor(2), 6).unwrap();
        assert_eq!(v.witness, Some(Witness::Element { element: Element::point(&[1, 2]), value: int(-2) }));
        assert_eq!(v.witness.unwrap().replay(&c).unwrap(), int(-2));
    }

    #[test]
    fn criterion_on_explicit_lattice() {
        let l = crate::poset::parse_hasse("elem z\nelem a\nelem b\nelem c\nedge z a\nedge z b\nedge a c\nedge b c").unwrap();
        let one = LatticeFunction::constant(l.clone(), int(1));
        assert!(pd_criterion(&one, &l, 1).unwrap().is_positive());
        let dip = LatticeFunction::new("dip", l.clone(), |x| if x == &Element::label("c") { int(0) } else { int(1) });
        let v = pd_criterion(&dip, &l, 1).unwrap();
        assert_eq!(v.witness, Some(Witness::Element { element: Element::label("c"), value: int(-1) }));
        assert!(!psd_oracle(&meet_matrix(&l.covering(1).unwrap(), &dip).unwrap().matrix, DEFAULT_TOL).unwrap().psd);
    }

    #[test]
    fn equivalence_on_small_cases() {
        let zero = LatticeFunction::constant(LatticeFamily::divisor(2), int(0));
        let r = check_covering_equivalence(&zero, &LatticeFamily::divisor(2), 4).unwrap();
        assert!(r.agree() && r.rows.iter().all(|row| row.criterion));
        let lcm = lift("lcm_pow:1", LatticeFamily::divisor(2));
        let r = check_covering_equivalence(&lcm, &LatticeFamily::divisor(2), 3).unwrap();
        assert!(r.agree());
        assert!(r.rows[0].criterion && !r.rows[1].criterion);
    }

    #[test]
    fn vector_witness_replays() {
        let lcm = lift("lcm_pow:1", LatticeFamily::divisor(2));
        let s = LatticeFamily::divisor(2).covering(2).unwrap();
        let m = meet_matrix(&s, &lcm).unwrap();
        let v = psd_oracle(&m.matrix, DEFAULT_TOL).unwrap().witness.unwrap();
        let value = m.matrix.quadratic_form(&v);
        let w = Witness::Vector { subset: s.members().to_vec(), vector: v, value: value.clone() };
        assert_eq!(w.replay(&lcm).unwrap(), value);
        assert!(value.is_negative());
    }

    #[test]
    fn monotonicity_examples() {
        let dc = lift("divisor_count", LatticeFamily::divisor(2));
        let s = LatticeFamily::divisor(2).covering(10).unwrap();
        assert!(check_monotonicity(&dc, &s).unwrap().passed());
        assert_eq!(dc.eval(&Element::point(&[2, 3])).unwrap(), int(4));

        let prod = LatticeFunction::new("x1*x2", LatticeFamily::min(2), |x| {
            let p = x.as_point().unwrap();
            int((p[0] * p[1]) as i64)
        });
        assert!(check_monotonicity(&prod, &LatticeFamily::min(2).covering(10).unwrap()).unwrap().passed());

        let down = LatticeFunction::new("down", LatticeFamily::Min, |x| int(10 - x.as_point().unwrap()[0] as i64));
        let r = check_monotonicity(&down, &LatticeFamily::Min.covering(3).unwrap()).unwrap();
        assert_eq!(r.decreasing, Some((Element::Int(1), Element::Int(2))));
        assert!(!pd_criterion(&down, &LatticeFamily::Min, 3).unwrap().is_positive());
    }

    #[test]
    fn combinators() {
        let gcd = lift("gcd_pow:1", LatticeFamily::Divisor);
        let s = LatticeFamily::Divisor.covering(5).unwrap();
        let z = scale(&gcd, int(0)).unwrap();
        assert!(z.eval(&Element::Int(5)).unwrap().is_zero());
        assert!(matches!(scale(&gcd, int(-1)), Err(Error::NegativeScalar(_))));
        for h in [add(&gcd, &gcd).unwrap(), pointwise_mul(&gcd, &gcd).unwrap()] {
            assert!(psd_oracle(&meet_matrix(&s, &h).unwrap().matrix, DEFAULT_TOL).unwrap().psd);
        }
        assert_eq!(pointwise_mul(&gcd, &gcd).unwrap().eval(&Element::Int(4)).unwrap(), int(16));
        let other = lift("gcd_pow:1", LatticeFamily::Min);
        assert!(add(&gcd, &other).is_err());

        let cert = LatticeFunction::from_nonnegative_generator(LatticeFunction::constant(LatticeFamily::Divisor, int(2)));
        assert!(scale(&cert, int(3)).unwrap().is_certified());
        assert!(add(&cert, &cert).unwrap().is_certified());
        assert!(!add(&cert, &gcd).unwrap().is_certified());
    }

    #[test]
    fn factorable_examples() {
        let gcd = lift("gcd_pow:1", LatticeFamily::Divisor);
        let s = LatticeFamily::Divisor.covering(3).unwrap();
        assert!(kronecker_identity(&gcd, &gcd, &s, &s).unwrap());
        assert!(factorable_pd(&gcd, &gcd, &s, &s, 3).unwrap().is_positive());
        let f = factorable(&gcd, &gcd);
        let m = meet_matrix(&ElementSubset::cartesian(&[s.clone(), s.clone()]).unwrap(), &f).unwrap();
        assert_eq!(m.dim(), 9);
        assert!(psd_oracle(&m.matrix, DEFAULT_TOL).unwrap().psd);

        let ones = LatticeFunction::constant(LatticeFamily::Divisor, int(1));
        assert!(factorable_pd(&gcd, &ones, &s, &s, 3).unwrap().is_positive());

        // a univariate function that fails the criterion
        let inv = lift("lcm_pow:-1", LatticeFamily::Divisor);
        let t = LatticeFamily::Divisor.covering(2).unwrap();
        assert!(kronecker_identity(&gcd, &inv, &t, &t).unwrap());
        assert!(matches!(factorable_pd(&gcd, &inv, &t, &t, 2), Err(Error::ComponentNotCertified(_))));
        let m = meet_matrix(&ElementSubset::cartesian(&[t.clone(), t]).unwrap(), &factorable(&gcd, &inv)).unwrap();
        assert!(!psd_oracle(&m.matrix, DEFAULT_TOL).unwrap().psd);
    }

    #[test]
    fn verdict_json_shape() {
        let v = PdVerdict::negative(Witness::Element { element: Element::point(&[1, 2]), value: int(-2) }, 6);
        let j = serde_json::to_value(&v).unwrap();
        assert_eq!(j["verdict"], "not_positive_definite");
        assert_eq!(j["witness"]["kind"], "element");
        assert_eq!(j["witness"]["element"], serde_json::json!([1, 2]));
        assert_eq!(j["witness"]["value"], "-2");
        assert_eq!(j["tested_bound"], 6);
        assert_eq!(j["certificate_flag"], false);
    }
}
