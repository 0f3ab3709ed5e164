//! Positive definite functions on meet semilattices.
//!
//! The crate builds meet matrices `(S)_f` with entries `f(x_i ∧ x_j)`,
//! factors them exactly as `E D E^T` (lower closed sets) or
//! `(E1 ⊗ … ⊗ Ed) Λ (E1 ⊗ … ⊗ Ed)^T` (Cartesian products of meet closed
//! sets), and decides whether a function is positive definite by checking
//! the sign of its Möbius-inverted values, cross-checked against an
//! eigenvalue oracle.
//!
//! Module map:
//!
//! * [`poset`]: finite posets, meet semilattices, divisor/MIN families, subsets.
//! * [`incidence`]: incidence algebra (`ζ`, `δ`, `μ`, convolution, inversion).
//! * [`meet_matrix`]: lattice functions, meet matrices and decompositions.
//! * [`pd`]: positive definiteness verdicts, oracle, closure combinators.
//! * [`arithmetic`]: multivariate arithmetic functions on `Z_+^d`.
//! * [`export`] and [`cli`]: file formats and the command-line front end.

pub mod arithmetic;
pub mod cli;
pub mod error;
pub mod export;
pub mod incidence;
pub mod matrix;
pub mod meet_matrix;
pub mod pd;
pub mod poset;

pub use error::{Error, Result};

/// Exact rational scalar used throughout.
pub type Rational = num_rational::BigRational;

/// Parses `p`, `-p` or `p/q` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("not a rational number: `{s}`"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: num_bigint::BigInt = num.parse().map_err(|_| bad())?;
    let den: num_bigint::BigInt = den.parse().map_err(|_| bad())?;
    if num_traits::Zero::is_zero(&den) {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

/// Serde helpers writing rationals as `p/q` strings.
pub mod rational_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::Rational;

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        crate::parse_rational(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&x.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let raw = Vec::<String>::deserialize(d)?;
            raw.iter()
                .map(|s| crate::parse_rational(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}
