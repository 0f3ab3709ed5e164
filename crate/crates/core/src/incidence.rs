//! Incidence functions on finite posets: convolution, `ζ`, `δ`, the Möbius
//! function and Möbius inversion, all over exact rationals.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poset::{Element, ElementSubset, Poset};
use crate::Rational;

/// A function on the pairs `x <= y` of a finite poset; zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct IncidenceFunction {
    poset: Arc<Poset>,
    values: Vec<Rational>,
}

impl IncidenceFunction {
    pub fn zero(poset: &Arc<Poset>) -> IncidenceFunction {
        let n = poset.len();
        IncidenceFunction { poset: Arc::clone(poset), values: vec![Rational::zero(); n * n] }
    }

    /// Builds `f(x, y)` for every comparable pair from a closure over indices.
    pub fn from_fn<F: FnMut(usize, usize) -> Rational>(poset: &Arc<Poset>, mut f: F) -> IncidenceFunction {
        let mut out = Self::zero(poset);
        let n = poset.len();
        for x in 0..n {
            for y in 0..n {
                if poset.leq(x, y) {
                    out.values[x * n + y] = f(x, y);
                }
            }
        }
        out
    }

    /// The restricted function `f_r` with `f_r(0̂, x) = f(x)` and zero on
    /// every other pair.
    pub fn restricted<F: FnMut(&Element) -> Rational>(poset: &Arc<Poset>, mut f: F) -> Result<IncidenceFunction> {
        let bottom = poset.least().ok_or(Error::NoLeastElement)?;
        let mut out = Self::zero(poset);
        let n = poset.len();
        for x in 0..n {
            out.values[bottom * n + x] = f(poset.element(x));
        }
        Ok(out)
    }

    pub fn poset(&self) -> &Arc<Poset> {
        &self.poset
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &Rational {
        &self.values[x * self.poset.len() + y]
    }

    pub fn value(&self, x: &Element, y: &Element) -> Option<&Rational> {
        Some(self.get(self.poset.index_of(x)?, self.poset.index_of(y)?))
    }

    /// The row `x ↦ f(0̂, x)`, indexed like the poset.
    pub fn bottom_row(&self) -> Result<Vec<Rational>> {
        let b = self.poset.least().ok_or(Error::NoLeastElement)?;
        let n = self.poset.len();
        Ok(self.values[b * n..(b + 1) * n].to_vec())
    }

    /// Restriction to a subposet whose elements all occur in this poset.
    pub fn restrict(&self, sub: &Arc<Poset>) -> Result<IncidenceFunction> {
        let map: Vec<usize> = sub
            .elements()
            .iter()
            .map(|e| self.poset.index_of(e).ok_or(Error::PosetMismatch))
            .collect::<Result<_>>()?;
        Ok(Self::from_fn(sub, |x, y| self.get(map[x], map[y]).clone()))
    }

    fn same_poset(&self, other: &IncidenceFunction) -> bool {
        Arc::ptr_eq(&self.poset, &other.poset) || self.poset == other.poset
    }
}

pub fn zeta(poset: &Arc<Poset>) -> IncidenceFunction {
    IncidenceFunction::from_fn(poset, |_, _| Rational::one())
}

pub fn delta(poset: &Arc<Poset>) -> IncidenceFunction {
    IncidenceFunction::from_fn(poset, |x, y| if x == y { Rational::one() } else { Rational::zero() })
}

/// `(f * g)(x, y) = Σ_{x <= z <= y} f(x, z) g(z, y)`.
pub fn convolve(f: &IncidenceFunction, g: &IncidenceFunction) -> Result<IncidenceFunction> {
    if !f.same_poset(g) {
        return Err(Error::PosetMismatch);
    }
    let p = &f.poset;
    let n = p.len();
    let ups = up_sets(p);
    let mut out = IncidenceFunction::zero(p);
    for x in 0..n {
        for &z in &ups[x] {
            let fxz = f.get(x, z);
            if fxz.is_zero() {
                continue;
            }
            for &y in &ups[z] {
                let gzy = g.get(z, y);
                if !gzy.is_zero() {
                    out.values[x * n + y] += fxz * gzy;
                }
            }
        }
    }
    Ok(out)
}

// up[x] = elements >= x, in linear extension order
fn up_sets(p: &Poset) -> Vec<Vec<usize>> {
    let mut ups = vec![Vec::new(); p.len()];
    for &y in p.linear_order() {
        for x in p.down_set(y).ones() {
            ups[x].push(y);
        }
    }
    ups
}

/// The Möbius function, by recursive inversion of `ζ` from each source:
/// `μ(x, x) = 1`, `μ(x, y) = -Σ_{x <= z < y} μ(x, z)`.
pub fn mobius(poset: &Arc<Poset>) -> IncidenceFunction {
    let n = poset.len();
    let ups = up_sets(poset);
    let mut out = IncidenceFunction::zero(poset);
    for (x, up) in ups.iter().enumerate() {
        for (k, &y) in up.iter().enumerate() {
            let v = if y == x {
                Rational::one()
            } else {
                let mut acc = Rational::zero();
                for &z in &up[..k] {
                    if poset.leq(z, y) {
                        acc += &out.values[x * n + z];
                    }
                }
                -acc
            };
            out.values[x * n + y] = v;
        }
    }
    out
}

/// Möbius function of `P × Q` as `μ_P(x1, y1) μ_Q(x2, y2)`, laid out over
/// `product`, whose elements must be the pairs `Tuple([p, q])`.
pub fn mobius_product(
    mu_p: &IncidenceFunction,
    mu_q: &IncidenceFunction,
    product: &Arc<Poset>,
) -> Result<IncidenceFunction> {
    let (p, q) = (&mu_p.poset, &mu_q.poset);
    if product.len() != p.len() * q.len() {
        return Err(Error::PosetMismatch);
    }
    let split: Vec<(usize, usize)> = product
        .elements()
        .iter()
        .map(|e| match e {
            Element::Tuple(parts) if parts.len() == 2 => {
                Some((p.index_of(&parts[0])?, q.index_of(&parts[1])?))
            }
            _ => None,
        })
        .collect::<Option<_>>()
        .ok_or(Error::PosetMismatch)?;
    for (x, &(a, b)) in split.iter().enumerate() {
        for (y, &(c, d)) in split.iter().enumerate() {
            if product.leq(x, y) != (p.leq(a, c) && q.leq(b, d)) {
                return Err(Error::PosetMismatch);
            }
        }
    }
    Ok(IncidenceFunction::from_fn(product, |x, y| {
        let ((a, b), (c, d)) = (split[x], split[y]);
        mu_p.get(a, c) * mu_q.get(b, d)
    }))
}

/// Möbius function of a meet closed subset with its induced order,
/// computed by inversion within the subset. Indices follow the subset's
/// member order.
pub fn mobius_of_subset(subset: &ElementSubset) -> Result<IncidenceFunction> {
    subset.require_meet_closed()?;
    Ok(mobius(&Arc::new(subset.to_poset())))
}

/// Given `f_r`, returns `g` with `g(0̂, x) = (f_r * μ)(0̂, x)`.
pub fn mobius_invert(fr: &IncidenceFunction) -> Result<IncidenceFunction> {
    fr.poset.least().ok_or(Error::NoLeastElement)?;
    convolve(fr, &mobius(&fr.poset))
}
