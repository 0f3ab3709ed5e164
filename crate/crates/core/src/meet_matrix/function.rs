use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{Signed, Zero};

use crate::arithmetic::ArithmeticFunction;
use crate::error::{Error, Result};
use crate::poset::{Element, LatticeFamily};
use crate::Rational;

type Evaluator = dyn Fn(&Element) -> Result<Rational> + Send + Sync;

/// How a function was built. Combinators record their inputs so callers can
/// tell which functions carry a positive definiteness certificate.
#[derive(Clone, Debug)]
pub enum Construction {
    Primitive,
    /// `f(x) = Σ_{z <= x} g(z)` with `g` checked nonnegative at every point
    /// evaluated.
    NonnegativeZetaSum(LatticeFunction),
    /// `f(x) = Σ_{z <= x} g(z)` with no sign requirement on `g`.
    ZetaSum(LatticeFunction),
    /// `f(x_1, …, x_d) = g(x_1 ∧ … ∧ x_d)`.
    MeetComposed { inner: LatticeFunction, arity: usize },
    Scaled(Rational, LatticeFunction),
    Sum(LatticeFunction, LatticeFunction),
    Product(LatticeFunction, LatticeFunction),
    /// `f(x, y) = g(x) h(y)` on a product of two lattices.
    Factorable(LatticeFunction, LatticeFunction),
}

struct Inner {
    name: String,
    family: LatticeFamily,
    construction: Construction,
    eval: Box<Evaluator>,
    memo: Mutex<HashMap<Element, Rational>>,
}

/// A real (rational) valued function on a lattice family, memoized.
#[derive(Clone)]
pub struct LatticeFunction {
    inner: Arc<Inner>,
}

impl fmt::Debug for LatticeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LatticeFunction({} on {})", self.inner.name, self.inner.family)
    }
}

impl LatticeFunction {
    pub(crate) fn build<F>(name: impl Into<String>, family: LatticeFamily, construction: Construction, f: F) -> Self
    where
        F: Fn(&Element) -> Result<Rational> + Send + Sync + 'static,
    {
        LatticeFunction {
            inner: Arc::new(Inner {
                name: name.into(),
                family,
                construction,
                eval: Box::new(f),
                memo: Mutex::new(HashMap::new()),
            }),
        }
    }

    pub fn new<F>(name: impl Into<String>, family: LatticeFamily, f: F) -> Self
    where
        F: Fn(&Element) -> Rational + Send + Sync + 'static,
    {
        Self::build(name, family, Construction::Primitive, move |x| Ok(f(x)))
    }

    pub fn try_new<F>(name: impl Into<String>, family: LatticeFamily, f: F) -> Self
    where
        F: Fn(&Element) -> Result<Rational> + Send + Sync + 'static,
    {
        Self::build(name, family, Construction::Primitive, f)
    }

    pub fn constant(family: LatticeFamily, c: Rational) -> Self {
        Self::new(format!("const {c}"), family, move |_| c.clone())
    }

    /// A function given by a finite value table.
    pub fn table(name: impl Into<String>, family: LatticeFamily, values: HashMap<Element, Rational>) -> Self {
        Self::try_new(name, family, move |x| {
            values.get(x).cloned().ok_or_else(|| Error::Evaluation(format!("no table value at {x}")))
        })
    }

    /// Lifts an arithmetic function to an integer family of the same arity.
    /// Functions of the form `g(gcd(i_1, …, i_d))` on the divisor lattice
    /// keep their meet-composed structure.
    pub fn from_arithmetic(af: &ArithmeticFunction, family: LatticeFamily) -> Result<Self> {
        if !family.is_integer() {
            return Err(Error::InvalidParameter(format!("{family} is not a lattice on Z_+^d")));
        }
        if family.arity() != af.arity() {
            return Err(Error::DimensionMismatch { expected: family.arity(), found: af.arity() });
        }
        let all_divisor = family.factors().iter().all(|c| *c == LatticeFamily::Divisor);
        let construction = match af.meet_inner() {
            Some(g) if all_divisor && af.arity() > 1 => Construction::MeetComposed {
                inner: Self::from_arithmetic(g, LatticeFamily::Divisor)?,
                arity: af.arity(),
            },
            _ => Construction::Primitive,
        };
        let f = af.clone();
        Ok(Self::build(af.name(), family, construction, move |x| {
            let p = x.as_point().ok_or_else(|| Error::Evaluation(format!("{x} is not an integer point")))?;
            f.eval(&p)
        }))
    }

    /// `f(x) = Σ_{z <= x} g(z)`. Evaluation fails at any `x` whose lower set
    /// contains a negative value of `g`, so every successful evaluation is
    /// backed by a nonnegative inversion and `f` is certified positive
    /// definite.
    pub fn from_nonnegative_generator(g: LatticeFunction) -> Self {
        let family = g.family().clone();
        let (fam, gen) = (family.clone(), g.clone());
        Self::build(format!("zeta_sum({})", g.name()), family, Construction::NonnegativeZetaSum(g), move |x| {
            let mut acc = Rational::zero();
            for z in fam.lower_set(x) {
                let v = gen.eval(&z)?;
                if v.is_negative() {
                    return Err(Error::Evaluation(format!("generator is negative at {z}")));
                }
                acc += v;
            }
            Ok(acc)
        })
    }

    /// `f(x) = Σ_{z <= x} g(z)`, no sign requirement.
    pub fn zeta_sum(g: LatticeFunction) -> Self {
        let family = g.family().clone();
        let (fam, gen) = (family.clone(), g.clone());
        Self::build(format!("zeta_sum({})", g.name()), family, Construction::ZetaSum(g), move |x| {
            fam.lower_set(x).iter().map(|z| gen.eval(z)).sum()
        })
    }

    /// `f(x_1, …, x_d) = g(x_1 ∧ … ∧ x_d)` on `component^d`.
    pub fn meet_composed(g: LatticeFunction, arity: usize) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidParameter("arity must be at least 1".into()));
        }
        let component = g.family().clone();
        let family = LatticeFamily::power(component.clone(), arity);
        let inner = g.clone();
        let name = format!("meet_composed({})", g.name());
        Ok(Self::build(name, family, Construction::MeetComposed { inner: g, arity }, move |x| {
            let parts: Vec<&Element> = match (arity, x) {
                (1, e) => vec![e],
                (_, Element::Tuple(items)) if items.len() == arity => items.iter().collect(),
                _ => return Err(Error::Evaluation(format!("{x} is not a point of arity {arity}"))),
            };
            let mut m = parts[0].clone();
            for p in &parts[1..] {
                m = component.meet(&m, p);
            }
            inner.eval(&m)
        }))
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn family(&self) -> &LatticeFamily {
        &self.inner.family
    }

    pub fn construction(&self) -> &Construction {
        &self.inner.construction
    }

    /// True when the construction alone guarantees positive definiteness.
    pub fn is_certified(&self) -> bool {
        match &self.inner.construction {
            Construction::Primitive | Construction::ZetaSum(_) => false,
            Construction::NonnegativeZetaSum(_) => true,
            Construction::MeetComposed { inner, .. } | Construction::Scaled(_, inner) => inner.is_certified(),
            Construction::Sum(a, b) | Construction::Product(a, b) | Construction::Factorable(a, b) => {
                a.is_certified() && b.is_certified()
            }
        }
    }

    pub fn eval(&self, x: &Element) -> Result<Rational> {
        if let Some(v) = self.inner.memo.lock().expect("memo lock").get(x) {
            return Ok(v.clone());
        }
        if !self.inner.family.contains(x) {
            return Err(Error::UnknownElement(x.to_string()));
        }
        let v = (self.inner.eval)(x)?;
        self.inner.memo.lock().expect("memo lock").insert(x.clone(), v.clone());
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::builtin;
    use crate::int;

    #[test]
    fn arithmetic_lift_keeps_meet_structure() {
        let f = LatticeFunction::from_arithmetic(&builtin("gcd_pow:1", 2).unwrap(), LatticeFamily::divisor(2)).unwrap();
        assert!(matches!(f.construction(), Construction::MeetComposed { arity: 2, .. }));
        assert_eq!(f.eval(&Element::point(&[4, 6])).unwrap(), int(2));
        let g = LatticeFunction::from_arithmetic(&builtin("gcd_pow:1", 2).unwrap(), LatticeFamily::min(2)).unwrap();
        assert!(matches!(g.construction(), Construction::Primitive));
        assert!(matches!(
            LatticeFunction::from_arithmetic(&builtin("zeta_d", 3).unwrap(), LatticeFamily::divisor(2)),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn zeta_sums_count_lower_sets() {
        let one = |fam: LatticeFamily| LatticeFunction::constant(fam, int(1));
        let div = LatticeFunction::from_nonnegative_generator(one(LatticeFamily::divisor(2)));
        let min = LatticeFunction::from_nonnegative_generator(one(LatticeFamily::min(2)));
        assert_eq!(div.eval(&Element::point(&[2, 3])).unwrap(), int(4));
        assert_eq!(min.eval(&Element::point(&[2, 3])).unwrap(), int(6));
        assert_eq!(div.eval(&Element::point(&[1, 1])).unwrap(), int(1));
        assert!(div.is_certified());
    }

    #[test]
    fn negative_generator_fails_to_certify() {
        let g = LatticeFunction::new("alt", LatticeFamily::Min, |x| match x {
            Element::Int(n) if n % 2 == 0 => int(-1),
            _ => int(1),
        });
        let f = LatticeFunction::from_nonnegative_generator(g.clone());
        assert_eq!(f.eval(&Element::Int(1)).unwrap(), int(1));
        assert!(matches!(f.eval(&Element::Int(2)), Err(Error::Evaluation(_))));
        let loose = LatticeFunction::zeta_sum(g);
        assert_eq!(loose.eval(&Element::Int(3)).unwrap(), int(1));
        assert!(!loose.is_certified());
    }

    #[test]
    fn meet_composed_evaluates_on_the_meet() {
        let g = LatticeFunction::new("id", LatticeFamily::Divisor, |x| match x {
            Element::Int(n) => int(*n as i64),
            _ => unreachable!(),
        });
        let f = LatticeFunction::meet_composed(g, 3).unwrap();
        assert_eq!(f.family(), &LatticeFamily::divisor(3));
        assert_eq!(f.eval(&Element::point(&[12, 18, 30])).unwrap(), int(6));
        assert!(matches!(f.eval(&Element::Int(3)), Err(Error::UnknownElement(_))));
    }
}
