use std::fmt;
use std::sync::Arc;

use num_integer::Integer;

use super::{Element, ElementSubset, MeetSemilattice};
use crate::arithmetic::divisors;
use crate::error::{Error, Result};

/// The ambient meet semilattice a subset or function lives in.
///
/// `Divisor` and `Min` are the one-dimensional infinite lattices on `Z_+`
/// ordered by divisibility and by `<=`. They are never materialized; every
/// operation takes explicit finite bounds.
#[derive(Clone, Debug)]
pub enum LatticeFamily {
    Explicit(Arc<MeetSemilattice>),
    Divisor,
    Min,
    Product(Vec<LatticeFamily>),
}

impl PartialEq for LatticeFamily {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (LatticeFamily::Explicit(a), LatticeFamily::Explicit(b)) => Arc::ptr_eq(a, b) || a == b,
            (LatticeFamily::Divisor, LatticeFamily::Divisor) => true,
            (LatticeFamily::Min, LatticeFamily::Min) => true,
            (LatticeFamily::Product(a), LatticeFamily::Product(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for LatticeFamily {}

/// Product of meet semilattices with componentwise order and meet. A single
/// factor is returned unchanged.
pub fn product_semilattice(factors: &[LatticeFamily]) -> Result<LatticeFamily> {
    match factors {
        [] => Err(Error::InvalidParameter("product of zero lattices".into())),
        [one] => Ok(one.clone()),
        many => Ok(LatticeFamily::Product(many.to_vec())),
    }
}

impl LatticeFamily {
    /// The `d`-dimensional divisor lattice `(Z_+^d, gcd)`.
    pub fn divisor(d: usize) -> LatticeFamily {
        Self::power(LatticeFamily::Divisor, d)
    }

    /// The `d`-dimensional MIN lattice `(Z_+^d, min)`.
    pub fn min(d: usize) -> LatticeFamily {
        Self::power(LatticeFamily::Min, d)
    }

    /// `base^d`; `d == 0` is treated as 1.
    pub fn power(base: LatticeFamily, d: usize) -> LatticeFamily {
        if d <= 1 {
            base
        } else {
            LatticeFamily::Product(vec![base; d])
        }
    }

    pub fn explicit(l: MeetSemilattice) -> LatticeFamily {
        LatticeFamily::Explicit(Arc::new(l))
    }

    /// Number of top-level coordinates.
    pub fn arity(&self) -> usize {
        match self {
            LatticeFamily::Product(f) => f.len(),
            _ => 1,
        }
    }

    /// The factors of a product, or the family itself.
    pub fn factors(&self) -> Vec<LatticeFamily> {
        match self {
            LatticeFamily::Product(f) => f.clone(),
            other => vec![other.clone()],
        }
    }

    /// True for divisor and MIN lattices and their products, whose elements
    /// are points of `Z_+^d`.
    pub fn is_integer(&self) -> bool {
        match self {
            LatticeFamily::Divisor | LatticeFamily::Min => true,
            LatticeFamily::Explicit(_) => false,
            LatticeFamily::Product(f) => f.iter().all(|c| matches!(c, LatticeFamily::Divisor | LatticeFamily::Min)),
        }
    }

    pub fn contains(&self, x: &Element) -> bool {
        match (self, x) {
            (LatticeFamily::Divisor | LatticeFamily::Min, Element::Int(n)) => *n >= 1,
            (LatticeFamily::Explicit(l), e) => l.poset().index_of(e).is_some(),
            (LatticeFamily::Product(f), Element::Tuple(items)) => {
                f.len() == items.len() && f.iter().zip(items).all(|(c, e)| c.contains(e))
            }
            _ => false,
        }
    }

    /// Order test. Both arguments must belong to the family.
    pub fn leq(&self, x: &Element, y: &Element) -> bool {
        match (self, x, y) {
            (LatticeFamily::Divisor, Element::Int(a), Element::Int(b)) => *a != 0 && b % a == 0,
            (LatticeFamily::Min, Element::Int(a), Element::Int(b)) => a <= b,
            (LatticeFamily::Explicit(l), _, _) => {
                let p = l.poset();
                p.leq(explicit_index(l, x), explicit_index(l, y))
            }
            (LatticeFamily::Product(f), Element::Tuple(a), Element::Tuple(b)) => {
                f.iter().zip(a).zip(b).all(|((c, u), v)| c.leq(u, v))
            }
            _ => panic!("elements {x} and {y} do not belong to {self}"),
        }
    }

    /// Greatest lower bound. Both arguments must belong to the family.
    pub fn meet(&self, x: &Element, y: &Element) -> Element {
        match (self, x, y) {
            (LatticeFamily::Divisor, Element::Int(a), Element::Int(b)) => Element::Int(a.gcd(b)),
            (LatticeFamily::Min, Element::Int(a), Element::Int(b)) => Element::Int(*a.min(b)),
            (LatticeFamily::Explicit(l), _, _) => {
                let i = l.meet_index(explicit_index(l, x), explicit_index(l, y));
                l.poset().element(i).clone()
            }
            (LatticeFamily::Product(f), Element::Tuple(a), Element::Tuple(b)) => {
                Element::Tuple(f.iter().zip(a).zip(b).map(|((c, u), v)| c.meet(u, v)).collect())
            }
            _ => panic!("elements {x} and {y} do not belong to {self}"),
        }
    }

    /// The least element `0̂`, if any.
    pub fn least(&self) -> Option<Element> {
        match self {
            LatticeFamily::Divisor | LatticeFamily::Min => Some(Element::Int(1)),
            LatticeFamily::Explicit(l) => l.poset().least_element().cloned(),
            LatticeFamily::Product(f) => f.iter().map(|c| c.least()).collect::<Option<Vec<_>>>().map(Element::Tuple),
        }
    }

    /// All elements below `x`, in a linear extension order.
    pub fn lower_set(&self, x: &Element) -> Vec<Element> {
        match (self, x) {
            (LatticeFamily::Divisor, Element::Int(n)) => divisors(*n).into_iter().map(Element::Int).collect(),
            (LatticeFamily::Min, Element::Int(n)) => (1..=*n).map(Element::Int).collect(),
            (LatticeFamily::Explicit(l), _) => {
                let p = l.poset();
                let down = p.down_set(explicit_index(l, x));
                p.linear_order()
                    .iter()
                    .filter(|&&i| down.contains(i))
                    .map(|&i| p.element(i).clone())
                    .collect()
            }
            (LatticeFamily::Product(f), Element::Tuple(items)) => {
                let parts: Vec<Vec<Element>> = f.iter().zip(items).map(|(c, e)| c.lower_set(e)).collect();
                cartesian_lex(&parts)
            }
            _ => panic!("element {x} does not belong to {self}"),
        }
    }

    /// The `m`-th set of the nested lower closed covering: `{1..m}^d` for
    /// integer families, the whole poset for explicit ones.
    pub fn covering(&self, m: usize) -> Result<ElementSubset> {
        if m == 0 {
            return Err(Error::InvalidParameter("covering bound must be at least 1".into()));
        }
        let members = self.covering_members(m as u64);
        Ok(ElementSubset::from_ordered(self.clone(), members))
    }

    fn covering_members(&self, m: u64) -> Vec<Element> {
        match self {
            LatticeFamily::Divisor | LatticeFamily::Min => (1..=m).map(Element::Int).collect(),
            LatticeFamily::Explicit(l) => {
                let p = l.poset();
                p.linear_order().iter().map(|&i| p.element(i).clone()).collect()
            }
            LatticeFamily::Product(f) => {
                let parts: Vec<Vec<Element>> = f.iter().map(|c| c.covering_members(m)).collect();
                cartesian_lex(&parts)
            }
        }
    }
}

fn explicit_index(l: &MeetSemilattice, x: &Element) -> usize {
    l.poset()
        .index_of(x)
        .unwrap_or_else(|| panic!("element {x} does not belong to the explicit lattice"))
}

/// Lexicographic Cartesian product; the last coordinate varies fastest.
pub(crate) fn cartesian_lex(parts: &[Vec<Element>]) -> Vec<Element> {
    let total: usize = parts.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    if total == 0 {
        return out;
    }
    let mut idx = vec![0usize; parts.len()];
    loop {
        out.push(Element::Tuple(idx.iter().zip(parts).map(|(&i, p)| p[i].clone()).collect()));
        let mut axis = parts.len();
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < parts[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
}

impl fmt::Display for LatticeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeFamily::Explicit(l) => write!(f, "explicit[{}]", l.poset().len()),
            LatticeFamily::Divisor => write!(f, "divisor"),
            LatticeFamily::Min => write!(f, "min"),
            LatticeFamily::Product(parts) => {
                if parts.iter().all(|p| p == &parts[0]) {
                    return write!(f, "{}^{}", parts[0], parts.len());
                }
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " x ")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}
