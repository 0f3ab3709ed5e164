//! Finite posets, meet semilattices and the lattice families used as ambient
//! spaces (explicit Hasse diagrams, the divisor lattice, the MIN lattice and
//! their Cartesian products).

mod family;
mod hasse;
mod subset;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use family::{product_semilattice, LatticeFamily};
pub use hasse::parse_hasse;
pub use subset::{linear_extension, ElementSubset};

/// An element of a lattice family.
///
/// Integer families use `Int`, explicit posets use `Label`, and points of a
/// product lattice are `Tuple`s of their components.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Element {
    Int(u64),
    Label(String),
    Tuple(Vec<Element>),
}

impl Element {
    /// A point of `Z_+^d`: a bare integer when `d == 1`, a tuple otherwise.
    pub fn point(coords: &[u64]) -> Element {
        match coords {
            [n] => Element::Int(*n),
            _ => Element::Tuple(coords.iter().map(|&c| Element::Int(c)).collect()),
        }
    }

    pub fn label(s: impl Into<String>) -> Element {
        Element::Label(s.into())
    }

    /// Integer coordinates of this element, if it is a point of `Z_+^d`.
    pub fn as_point(&self) -> Option<Vec<u64>> {
        match self {
            Element::Int(n) => Some(vec![*n]),
            Element::Tuple(items) => items
                .iter()
                .map(|e| match e {
                    Element::Int(n) => Some(*n),
                    _ => None,
                })
                .collect(),
            Element::Label(_) => None,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Int(n) => write!(f, "{n}"),
            Element::Label(s) => write!(f, "{s}"),
            Element::Tuple(items) => {
                write!(f, "(")?;
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A finite poset stored as per-element down-set bitsets.
///
/// `down[y]` contains `x` iff `x <= y`, so order queries are O(1).
#[derive(Clone, Debug)]
pub struct Poset {
    elements: Vec<Element>,
    index: HashMap<Element, usize>,
    down: Vec<FixedBitSet>,
    // stable linear extension of the element indices
    topo: Vec<usize>,
    least: Option<usize>,
}

impl PartialEq for Poset {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements && self.down == other.down
    }
}

impl Eq for Poset {}

/// Builds a poset from element ids and cover edges `(lower, upper)`.
pub fn build_poset<S: AsRef<str>>(elements: &[S], cover_edges: &[(S, S)]) -> Result<Poset> {
    if elements.is_empty() {
        return Err(Error::EmptySubset);
    }
    let elems: Vec<Element> = elements.iter().map(|s| Element::label(s.as_ref())).collect();
    let mut index = HashMap::with_capacity(elems.len());
    for (i, e) in elems.iter().enumerate() {
        if index.insert(e.clone(), i).is_some() {
            return Err(Error::DuplicateElement(e.to_string()));
        }
    }
    let lookup = |s: &str| {
        index
            .get(&Element::label(s))
            .copied()
            .ok_or_else(|| Error::UnknownElement(s.to_string()))
    };
    let n = elems.len();
    let mut lower_covers = vec![Vec::new(); n];
    let mut upper_covers = vec![Vec::new(); n];
    for (lo, hi) in cover_edges {
        let (lo, hi) = (lookup(lo.as_ref())?, lookup(hi.as_ref())?);
        if lo == hi {
            return Err(Error::Cycle(elems[lo].to_string()));
        }
        lower_covers[hi].push(lo);
        upper_covers[lo].push(hi);
    }

    // Kahn's algorithm, smallest index first so ties follow input order.
    let mut indegree: Vec<usize> = lower_covers.iter().map(Vec::len).collect();
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut topo = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        topo.push(i);
        for &j in &upper_covers[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.insert(j);
            }
        }
    }
    if topo.len() < n {
        let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
        return Err(Error::Cycle(elems[stuck].to_string()));
    }

    let mut down = vec![FixedBitSet::with_capacity(n); n];
    for &i in &topo {
        let mut set = FixedBitSet::with_capacity(n);
        set.insert(i);
        for &l in &lower_covers[i] {
            set.union_with(&down[l]);
        }
        down[i] = set;
    }
    Ok(Poset::from_parts(elems, index, down, topo))
}

impl Poset {
    fn from_parts(
        elements: Vec<Element>,
        index: HashMap<Element, usize>,
        down: Vec<FixedBitSet>,
        topo: Vec<usize>,
    ) -> Poset {
        let n = elements.len();
        let mut common = FixedBitSet::with_capacity(n);
        common.insert_range(..);
        for d in &down {
            common.intersect_with(d);
        }
        let least = common.ones().next();
        Poset { elements, index, down, topo, least }
    }

    /// Builds the poset induced on `elements` by an order predicate.
    ///
    /// The predicate must be a partial order on the given elements; elements
    /// must be distinct.
    pub fn from_order<F>(elements: Vec<Element>, leq: F) -> Poset
    where
        F: Fn(&Element, &Element) -> bool,
    {
        let n = elements.len();
        let index: HashMap<Element, usize> =
            elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let mut down = vec![FixedBitSet::with_capacity(n); n];
        let mut preds = vec![0usize; n];
        for (j, y) in elements.iter().enumerate() {
            for (i, x) in elements.iter().enumerate() {
                if leq(x, y) {
                    down[j].insert(i);
                    if i != j {
                        preds[j] += 1;
                    }
                }
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| preds[i] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            topo.push(i);
            for j in 0..n {
                if j != i && down[j].contains(i) {
                    preds[j] -= 1;
                    if preds[j] == 0 {
                        ready.insert(j);
                    }
                }
            }
        }
        Poset::from_parts(elements, index, down, topo)
    }

    /// Cartesian product with the componentwise order, elements `Tuple([p, q])`
    /// in lexicographic order.
    pub fn product(p: &Poset, q: &Poset) -> Poset {
        let elements: Vec<Element> = p
            .elements
            .iter()
            .flat_map(|a| q.elements.iter().map(move |b| Element::Tuple(vec![a.clone(), b.clone()])))
            .collect();
        let m = q.len();
        Poset::from_indexed_order(elements, |x, y| {
            p.leq(x / m, y / m) && q.leq(x % m, y % m)
        })
    }

    fn from_indexed_order<F: Fn(usize, usize) -> bool>(elements: Vec<Element>, leq: F) -> Poset {
        let idx: HashMap<&Element, usize> = elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let lookup = |e: &Element| idx[e];
        let order = |a: &Element, b: &Element| leq(lookup(a), lookup(b));
        let owned = elements.clone();
        Poset::from_order(owned, order)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Element {
        &self.elements[i]
    }

    pub fn index_of(&self, e: &Element) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// `x <= y` by index.
    #[inline]
    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.down[y].contains(x)
    }

    pub fn down_set(&self, y: usize) -> &FixedBitSet {
        &self.down[y]
    }

    /// Element indices in a linear extension, ties broken by index.
    pub fn linear_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn least(&self) -> Option<usize> {
        self.least
    }

    pub fn least_element(&self) -> Option<&Element> {
        self.least.map(|i| &self.elements[i])
    }
}

/// An explicit finite poset together with its meet table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeetSemilattice {
    poset: Arc<Poset>,
    meet: Vec<usize>,
}

impl MeetSemilattice {
    /// Computes all pairwise meets, failing if some pair has no greatest
    /// lower bound.
    pub fn new(poset: Poset) -> Result<MeetSemilattice> {
        let n = poset.len();
        let mut meet = vec![0usize; n * n];
        for x in 0..n {
            meet[x * n + x] = x;
            for y in (x + 1)..n {
                let mut common = poset.down[x].clone();
                common.intersect_with(&poset.down[y]);
                let glb = common.ones().find(|&z| common.is_subset(&poset.down[z])).ok_or_else(|| {
                    Error::NotASemilattice(poset.elements[x].to_string(), poset.elements[y].to_string())
                })?;
                meet[x * n + y] = glb;
                meet[y * n + x] = glb;
            }
        }
        Ok(MeetSemilattice { poset: Arc::new(poset), meet })
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    #[inline]
    pub fn meet_index(&self, x: usize, y: usize) -> usize {
        self.meet[x * self.poset.len() + y]
    }

    /// Meet of two elements of this semilattice, `None` if either is foreign.
    pub fn meet(&self, x: &Element, y: &Element) -> Option<&Element> {
        let (i, j) = (self.poset.index_of(x)?, self.poset.index_of(y)?);
        Some(self.poset.element(self.meet_index(i, j)))
    }
}
