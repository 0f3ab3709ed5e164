use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::OnceLock;

use super::family::cartesian_lex;
use super::{Element, LatticeFamily, Poset};
use crate::error::{Error, Result};

/// A finite nonempty subset of a lattice family, kept in a linear extension
/// order (`x_i <= x_j` implies `i <= j`).
#[derive(Clone, Debug)]
pub struct ElementSubset {
    family: LatticeFamily,
    members: Vec<Element>,
    index: HashMap<Element, usize>,
    meet_closed: OnceLock<bool>,
    lower_closed: OnceLock<bool>,
}

impl PartialEq for ElementSubset {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.members == other.members
    }
}

/// Stable topological sort of `elements` under the family order: among the
/// elements whose predecessors are already placed, the earliest in the input
/// goes next.
pub fn linear_extension(family: &LatticeFamily, elements: &[Element]) -> Vec<Element> {
    let n = elements.len();
    let mut succ = vec![Vec::new(); n];
    let mut preds = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && family.leq(&elements[i], &elements[j]) {
                succ[i].push(j);
                preds[j] += 1;
            }
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| preds[i] == 0).collect();
    let mut out = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        out.push(elements[i].clone());
        for &j in &succ[i] {
            preds[j] -= 1;
            if preds[j] == 0 {
                ready.insert(j);
            }
        }
    }
    debug_assert_eq!(out.len(), n, "family order must be acyclic");
    out
}

impl ElementSubset {
    /// Validates membership and uniqueness, then orders the members by
    /// [`linear_extension`].
    pub fn new(family: LatticeFamily, members: Vec<Element>) -> Result<ElementSubset> {
        if members.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut seen = HashSet::with_capacity(members.len());
        for m in &members {
            if !family.contains(m) {
                return Err(Error::UnknownElement(m.to_string()));
            }
            if !seen.insert(m) {
                return Err(Error::DuplicateElement(m.to_string()));
            }
        }
        let ordered = linear_extension(&family, &members);
        Ok(Self::from_ordered(family, ordered))
    }

    /// Trusted constructor for members already distinct and linearly ordered.
    pub(crate) fn from_ordered(family: LatticeFamily, members: Vec<Element>) -> ElementSubset {
        debug_assert!(!members.is_empty());
        let index = members.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        ElementSubset {
            family,
            members,
            index,
            meet_closed: OnceLock::new(),
            lower_closed: OnceLock::new(),
        }
    }

    /// Convenience constructor for subsets of `Z_+^d` given as coordinate
    /// lists.
    pub fn from_points(family: LatticeFamily, points: &[&[u64]]) -> Result<ElementSubset> {
        Self::new(family, points.iter().map(|p| Element::point(p)).collect())
    }

    /// Lexicographically ordered Cartesian product of subsets, living in the
    /// product family. A single part is returned unchanged.
    pub fn cartesian(parts: &[ElementSubset]) -> Result<ElementSubset> {
        match parts {
            [] => Err(Error::EmptySubset),
            [one] => Ok(one.clone()),
            many => {
                let family = LatticeFamily::Product(many.iter().map(|s| s.family.clone()).collect());
                let lists: Vec<Vec<Element>> = many.iter().map(|s| s.members.clone()).collect();
                Ok(Self::from_ordered(family, cartesian_lex(&lists)))
            }
        }
    }

    pub fn family(&self) -> &LatticeFamily {
        &self.family
    }

    pub fn members(&self) -> &[Element] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, i: usize) -> &Element {
        &self.members[i]
    }

    pub fn index_of(&self, e: &Element) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.index.contains_key(e)
    }

    /// The order induced on the members, indices matching `members()`.
    pub fn to_poset(&self) -> Poset {
        Poset::from_order(self.members.clone(), |a, b| self.family.leq(a, b))
    }

    /// First pairwise meet missing from the subset, if any.
    pub fn missing_meet(&self) -> Option<Element> {
        for (i, x) in self.members.iter().enumerate() {
            for y in &self.members[i + 1..] {
                let m = self.family.meet(x, y);
                if !self.contains(&m) {
                    return Some(m);
                }
            }
        }
        None
    }

    /// First element below some member that is missing from the subset.
    pub fn missing_lower(&self) -> Option<Element> {
        self.members
            .iter()
            .flat_map(|y| self.family.lower_set(y))
            .find(|z| !self.contains(z))
    }

    pub fn is_meet_closed(&self) -> bool {
        *self.meet_closed.get_or_init(|| self.missing_meet().is_none())
    }

    pub fn is_lower_closed(&self) -> bool {
        *self.lower_closed.get_or_init(|| {
            let closed = self.missing_lower().is_none();
            if closed {
                let _ = self.meet_closed.set(true);
            }
            closed
        })
    }

    pub fn require_meet_closed(&self) -> Result<()> {
        if self.is_meet_closed() {
            return Ok(());
        }
        Err(Error::NotMeetClosed(self.missing_meet().map(|e| e.to_string()).unwrap_or_default()))
    }

    pub fn require_lower_closed(&self) -> Result<()> {
        if self.is_lower_closed() {
            return Ok(());
        }
        Err(Error::NotLowerClosed(self.missing_lower().map(|e| e.to_string()).unwrap_or_default()))
    }

    /// Smallest meet closed superset.
    pub fn meet_closure(&self) -> ElementSubset {
        let mut members = self.members.clone();
        let mut seen: HashSet<Element> = members.iter().cloned().collect();
        let mut next = 0;
        while next < members.len() {
            let x = members[next].clone();
            for j in 0..next {
                let m = self.family.meet(&x, &members[j]);
                if seen.insert(m.clone()) {
                    members.push(m);
                }
            }
            next += 1;
        }
        let ordered = linear_extension(&self.family, &members);
        let out = Self::from_ordered(self.family.clone(), ordered);
        let _ = out.meet_closed.set(true);
        out
    }

    /// Smallest lower closed superset: the union of the members' lower sets.
    pub fn lower_closure(&self) -> ElementSubset {
        let mut seen = HashSet::new();
        let mut members = Vec::new();
        for y in &self.members {
            for z in self.family.lower_set(y) {
                if seen.insert(z.clone()) {
                    members.push(z);
                }
            }
        }
        let ordered = linear_extension(&self.family, &members);
        let out = Self::from_ordered(self.family.clone(), ordered);
        let _ = out.lower_closed.set(true);
        let _ = out.meet_closed.set(true);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn div(xs: &[u64]) -> ElementSubset {
        ElementSubset::new(LatticeFamily::Divisor, xs.iter().map(|&x| Element::Int(x)).collect()).unwrap()
    }

    fn ints(s: &ElementSubset) -> Vec<u64> {
        s.members().iter().map(|e| e.as_point().unwrap()[0]).collect()
    }

    #[test]
    fn closure_flags() {
        let s = div(&[1, 2, 3, 6]);
        assert!(s.is_meet_closed() && s.is_lower_closed());
        let s = div(&[2, 3]);
        assert!(!s.is_meet_closed());
        assert_eq!(s.missing_meet(), Some(Element::Int(1)));
        let s = div(&[1, 4]);
        assert!(s.is_meet_closed());
        assert!(!s.is_lower_closed());
        assert_eq!(s.require_lower_closed(), Err(Error::NotLowerClosed("2".into())));
    }

    #[test]
    fn closures() {
        assert_eq!(ints(&div(&[6]).lower_closure()), vec![1, 2, 3, 6]);
        assert_eq!(ints(&div(&[4, 6]).meet_closure()), vec![2, 4, 6]);
        let lc = div(&[1, 2, 3, 6]);
        assert_eq!(lc.lower_closure(), lc);
    }

    #[test]
    fn linear_extension_tie_breaks_by_input_order() {
        assert_eq!(ints(&div(&[6, 1, 2, 3])), vec![1, 2, 3, 6]);
        assert_eq!(ints(&div(&[6, 1, 3, 2])), vec![1, 3, 2, 6]);
        assert_eq!(ints(&div(&[1, 2, 4, 8])), vec![1, 2, 4, 8]);
        assert_eq!(ints(&div(&[2, 3, 5])), vec![2, 3, 5]);
        let a = ints(&div(&[5, 3, 2]));
        assert_eq!(a, vec![5, 3, 2]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(ElementSubset::new(LatticeFamily::Divisor, vec![]).unwrap_err(), Error::EmptySubset);
        assert!(matches!(
            ElementSubset::new(LatticeFamily::Divisor, vec![Element::Int(2), Element::Int(2)]),
            Err(Error::DuplicateElement(_))
        ));
        assert!(matches!(
            ElementSubset::new(LatticeFamily::Divisor, vec![Element::Int(0)]),
            Err(Error::UnknownElement(_))
        ));
    }

    #[test]
    fn cartesian_product_of_subsets() {
        let s = div(&[1, 2]);
        let p = ElementSubset::cartesian(&[s.clone(), s]).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.get(1), &Element::point(&[1, 2]));
        assert!(p.is_lower_closed());
    }

    fn subset_strategy() -> impl Strategy<Value = Vec<u64>> {
        prop::collection::btree_set(1u64..=60, 1..=12).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn linear_extension_respects_order(mut xs in subset_strategy(), seed in any::<u64>()) {
            // shuffle deterministically so the input is not sorted
            let len = xs.len();
            xs.rotate_left((seed as usize) % len);
            let s = div(&xs);
            let m = s.members();
            for i in 0..m.len() {
                for j in 0..m.len() {
                    if LatticeFamily::Divisor.leq(&m[i], &m[j]) {
                        prop_assert!(i <= j);
                    }
                }
            }
        }

        #[test]
        fn closures_are_closed_and_idempotent(xs in subset_strategy()) {
            let s = div(&xs);
            let mc = s.meet_closure();
            prop_assert!(mc.missing_meet().is_none());
            prop_assert_eq!(&mc.meet_closure(), &mc);
            let lc = s.lower_closure();
            prop_assert!(lc.missing_lower().is_none());
            prop_assert!(lc.missing_meet().is_none());
            prop_assert_eq!(&lc.lower_closure(), &lc);
        }

        #[test]
        fn meet_is_glb(x in 1u64..200, y in 1u64..200, z in 1u64..200) {
            let f = LatticeFamily::Divisor;
            let (x, y, z) = (Element::Int(x), Element::Int(y), Element::Int(z));
            let m = f.meet(&x, &y);
            prop_assert!(f.leq(&m, &x) && f.leq(&m, &y));
            prop_assert_eq!(f.leq(&z, &x) && f.leq(&z, &y), f.leq(&z, &m));
            prop_assert_eq!(&m, &f.meet(&y, &x));
            prop_assert_eq!(f.meet(&x, &x), x.clone());
            prop_assert_eq!(f.meet(&f.meet(&x, &y), &z), f.meet(&x, &f.meet(&y, &z)));
        }

        #[test]
        fn product_meet_is_componentwise(
            a in prop::collection::vec(1u64..50, 3),
            b in prop::collection::vec(1u64..50, 3),
        ) {
            let fam = LatticeFamily::Product(vec![LatticeFamily::Divisor, LatticeFamily::Min, LatticeFamily::Divisor]);
            let m = fam.meet(&Element::point(&a), &Element::point(&b));
            let expect = vec![
                num_integer::gcd(a[0], b[0]),
                a[1].min(b[1]),
                num_integer::gcd(a[2], b[2]),
            ];
            prop_assert_eq!(m, Element::point(&expect));
        }
    }
}
