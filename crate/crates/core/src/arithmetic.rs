//! Multivariate arithmetic functions `f: Z_+^d → Q`: the extended GCD
//! operator, `d`-variate Dirichlet convolution, `μ_d`, `ζ_d`, `δ_d`, and the
//! grid and separable positive definiteness criteria.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::pd::{PdVerdict, Witness};
use crate::poset::Element;
use crate::Rational;

const SIEVE_CAP: u64 = 1 << 24;

static SIEVE: OnceLock<RwLock<Vec<u32>>> = OnceLock::new();

// smallest prime factor table, grown on demand up to SIEVE_CAP
fn spf_table(n: u64) -> Option<std::sync::RwLockReadGuard<'static, Vec<u32>>> {
    if n >= SIEVE_CAP {
        return None;
    }
    let lock = SIEVE.get_or_init(|| RwLock::new(Vec::new()));
    {
        let t = lock.read().expect("sieve lock");
        if (n as usize) < t.len() {
            return Some(t);
        }
    }
    {
        let mut t = lock.write().expect("sieve lock");
        if (n as usize) >= t.len() {
            let limit = ((n + 1).next_power_of_two().max(1024)).min(SIEVE_CAP) as usize;
            let mut spf = vec![0u32; limit];
            for i in 2..limit {
                if spf[i] == 0 {
                    let mut j = i;
                    while j < limit {
                        if spf[j] == 0 {
                            spf[j] = i as u32;
                        }
                        j += i;
                    }
                }
            }
            *t = spf;
        }
    }
    Some(lock.read().expect("sieve lock"))
}

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factorize expects a positive integer");
    let mut out: Vec<(u64, u32)> = Vec::new();
    let mut push = |p: u64| match out.last_mut() {
        Some((q, e)) if *q == p => *e += 1,
        _ => out.push((p, 1)),
    };
    if let Some(spf) = spf_table(n) {
        while n > 1 {
            let p = spf[n as usize] as u64;
            push(p);
            n /= p;
        }
        return out;
    }
    let mut p = 2u64;
    while p * p <= n {
        while n % p == 0 {
            push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        push(n);
    }
    out
}

/// All positive divisors, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// The arithmetic Möbius function.
pub fn mobius_arith(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn divisor_count(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// Componentwise gcd `(x, y)_d`.
pub fn gcd_d(x: &[u64], y: &[u64]) -> Result<Vec<u64>> {
    if x.len() != y.len() {
        return Err(Error::ArityMismatch { expected: x.len(), found: y.len() });
    }
    Ok(x.iter().zip(y).map(|(a, b)| a.gcd(b)).collect())
}

/// Ramanujan's sum `C(m, n) = Σ_{d | gcd(m,n)} d μ(n/d)`.
pub fn ramanujan_c(m: u64, n: u64) -> i64 {
    divisors(m.gcd(&n)).into_iter().map(|d| d as i64 * mobius_arith(n / d)).sum()
}

/// `(μ *_1 μ)(n)` by direct Dirichlet convolution.
pub fn mu_star_mu(n: u64) -> i64 {
    divisors(n).into_iter().map(|d| mobius_arith(d) * mobius_arith(n / d)).sum()
}

type Evaluator = dyn Fn(&[u64]) -> Result<Rational> + Send + Sync;

struct ArithInner {
    name: String,
    arity: usize,
    eval: Box<Evaluator>,
    factors: Option<Vec<ArithmeticFunction>>,
    meet_inner: Option<ArithmeticFunction>,
    memo: Mutex<HashMap<Vec<u64>, Rational>>,
}

/// A memoized function `Z_+^d → Q`.
///
/// A function may carry a factored form `g_1(i_1)⋯g_d(i_d)` or a
/// meet-composed form `g(gcd(i_1, …, i_d))`; both are kept alongside the
/// evaluator so the structured criteria can use them.
#[derive(Clone)]
pub struct ArithmeticFunction {
    inner: Arc<ArithInner>,
}

impl fmt::Debug for ArithmeticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ArithmeticFunction({}, d={})", self.inner.name, self.inner.arity)
    }
}

impl ArithmeticFunction {
    fn build(
        name: String,
        arity: usize,
        eval: Box<Evaluator>,
        factors: Option<Vec<ArithmeticFunction>>,
        meet_inner: Option<ArithmeticFunction>,
    ) -> ArithmeticFunction {
        ArithmeticFunction {
            inner: Arc::new(ArithInner { name, arity, eval, factors, meet_inner, memo: Mutex::new(HashMap::new()) }),
        }
    }

    pub fn new<F>(name: impl Into<String>, arity: usize, f: F) -> ArithmeticFunction
    where
        F: Fn(&[u64]) -> Rational + Send + Sync + 'static,
    {
        Self::build(name.into(), arity, Box::new(move |x| Ok(f(x))), None, None)
    }

    /// A function defined by a finite value table; other points fail to
    /// evaluate.
    pub fn table(name: impl Into<String>, arity: usize, values: HashMap<Vec<u64>, Rational>) -> ArithmeticFunction {
        Self::build(
            name.into(),
            arity,
            Box::new(move |x| {
                values.get(x).cloned().ok_or_else(|| Error::Evaluation(format!("no table value at {x:?}")))
            }),
            None,
            None,
        )
    }

    /// `f(i_1, …, i_d) = g_1(i_1)⋯g_d(i_d)` for univariate `g_j`.
    pub fn separable(factors: Vec<ArithmeticFunction>) -> Result<ArithmeticFunction> {
        if factors.is_empty() {
            return Err(Error::InvalidParameter("separable function needs at least one factor".into()));
        }
        if let Some(bad) = factors.iter().find(|g| g.arity() != 1) {
            return Err(Error::ArityMismatch { expected: 1, found: bad.arity() });
        }
        let name = factors.iter().map(|g| g.name().to_string()).collect::<Vec<_>>().join("⊗");
        let parts = factors.clone();
        Ok(Self::build(
            name,
            factors.len(),
            Box::new(move |x| {
                let mut acc = Rational::one();
                for (g, &xi) in parts.iter().zip(x) {
                    acc *= g.eval(&[xi])?;
                }
                Ok(acc)
            }),
            Some(factors),
            None,
        ))
    }

    /// `f(i_1, …, i_d) = g(gcd(i_1, …, i_d))` for univariate `g`.
    pub fn meet_composed(g: ArithmeticFunction, d: usize) -> Result<ArithmeticFunction> {
        if g.arity() != 1 {
            return Err(Error::ArityMismatch { expected: 1, found: g.arity() });
        }
        let inner = g.clone();
        Ok(Self::build(
            format!("meet_composed({})", g.name()),
            d,
            Box::new(move |x| inner.eval(&[x.iter().fold(0u64, |a, b| a.gcd(b))])),
            None,
            Some(g),
        ))
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn arity(&self) -> usize {
        self.inner.arity
    }

    pub fn factors(&self) -> Option<&[ArithmeticFunction]> {
        self.inner.factors.as_deref()
    }

    /// The univariate `g` when this function is `g(gcd(i_1, …, i_d))`.
    pub fn meet_inner(&self) -> Option<&ArithmeticFunction> {
        self.inner.meet_inner.as_ref()
    }

    pub fn eval(&self, x: &[u64]) -> Result<Rational> {
        if x.len() != self.inner.arity {
            return Err(Error::ArityMismatch { expected: self.inner.arity, found: x.len() });
        }
        if x.contains(&0) {
            return Err(Error::Evaluation(format!("{} is undefined at {x:?}", self.inner.name)));
        }
        if let Some(v) = self.inner.memo.lock().expect("memo lock").get(x) {
            return Ok(v.clone());
        }
        let v = (self.inner.eval)(x)?;
        self.inner.memo.lock().expect("memo lock").insert(x.to_vec(), v.clone());
        Ok(v)
    }
}

/// `(f *_d g)(i) = Σ_{k_j | i_j} f(k) g(i/k)`.
pub fn dirichlet_convolve_d(f: &ArithmeticFunction, g: &ArithmeticFunction, point: &[u64]) -> Result<Rational> {
    if f.arity() != g.arity() {
        return Err(Error::ArityMismatch { expected: f.arity(), found: g.arity() });
    }
    if point.len() != f.arity() {
        return Err(Error::ArityMismatch { expected: f.arity(), found: point.len() });
    }
    let divs: Vec<Vec<u64>> = point.iter().map(|&n| divisors(n)).collect();
    let mut acc = Rational::zero();
    let mut idx = vec![0usize; point.len()];
    let mut k = vec![0u64; point.len()];
    let mut q = vec![0u64; point.len()];
    loop {
        for j in 0..point.len() {
            k[j] = divs[j][idx[j]];
            q[j] = point[j] / k[j];
        }
        let gv = g.eval(&q)?;
        if !gv.is_zero() {
            acc += f.eval(&k)? * gv;
        }
        let mut axis = point.len();
        loop {
            if axis == 0 {
                return Ok(acc);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < divs[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
}

fn rational_pow(n: u64, alpha: i64) -> Rational {
    let base = BigInt::from(n);
    let p = num_traits::pow(base, alpha.unsigned_abs() as usize);
    if alpha >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Built-in arithmetic functions, addressed on the command line as
/// `name` or `name:param`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    /// `gcd(i_1, …, i_d)^α`
    GcdPow(i64),
    /// `lcm(i_1, …, i_d)^α`
    LcmPow(i64),
    Zeta,
    Delta,
    Mu,
    /// `Π_j τ(i_j)` with `τ` the divisor count.
    DivisorCount,
    /// Ramanujan's sum, bivariate only.
    RamanujanC,
    /// `g(gcd(i_1, …, i_d))` for a univariate builtin `g`.
    MeetComposed(Box<Builtin>),
}

impl Builtin {
    pub fn parse(spec: &str) -> Result<Builtin> {
        let (name, rest) = match spec.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (spec, None),
        };
        let exponent = |r: Option<&str>| -> Result<i64> {
            let r = r.ok_or_else(|| Error::InvalidParameter(format!("`{name}` needs an exponent, e.g. `{name}:1`")))?;
            r.trim().parse::<i64>().map_err(|_| {
                Error::InvalidParameter(format!("exponent `{r}` must be an integer to keep values exact"))
            })
        };
        let no_param = |b: Builtin| match rest {
            None => Ok(b),
            Some(r) => Err(Error::InvalidParameter(format!("`{name}` takes no parameter, got `{r}`"))),
        };
        match name {
            "gcd_pow" => Ok(Builtin::GcdPow(exponent(rest)?)),
            "lcm_pow" => Ok(Builtin::LcmPow(exponent(rest)?)),
            "zeta_d" | "zeta" => no_param(Builtin::Zeta),
            "delta_d" | "delta" => no_param(Builtin::Delta),
            "mu_d" | "mu" => no_param(Builtin::Mu),
            "divisor_count" => no_param(Builtin::DivisorCount),
            "ramanujan_C" | "ramanujan_c" => no_param(Builtin::RamanujanC),
            "meet_composed" => {
                let inner = rest.ok_or_else(|| Error::InvalidParameter("meet_composed needs an inner builtin".into()))?;
                Ok(Builtin::MeetComposed(Box::new(Builtin::parse(inner)?)))
            }
            other => Err(Error::UnknownBuiltin(other.to_string())),
        }
    }

    /// Arity forced by the function itself, if any.
    pub fn natural_arity(&self) -> Option<usize> {
        match self {
            Builtin::RamanujanC => Some(2),
            _ => None,
        }
    }

    pub fn instantiate(&self, d: usize) -> Result<ArithmeticFunction> {
        if d == 0 {
            return Err(Error::InvalidParameter("arity must be at least 1".into()));
        }
        let univariate = |b: &Builtin| b.instantiate(1);
        Ok(match self {
            Builtin::GcdPow(a) => {
                let a = *a;
                let power = ArithmeticFunction::new(format!("id^{a}"), 1, move |x| rational_pow(x[0], a));
                let f = ArithmeticFunction::meet_composed(power, d)?;
                rename(f, format!("gcd_pow:{a}"))
            }
            Builtin::LcmPow(a) => {
                let a = *a;
                ArithmeticFunction::new(format!("lcm_pow:{a}"), d, move |x| {
                    rational_pow(x.iter().fold(1u64, |acc, v| acc.lcm(v)), a)
                })
            }
            Builtin::Zeta => separable_power("zeta_d", d, |_| Rational::one())?,
            Builtin::Delta => separable_power("delta_d", d, |n| if n == 1 { Rational::one() } else { Rational::zero() })?,
            Builtin::Mu => separable_power("mu_d", d, |n| Rational::from_integer(mobius_arith(n).into()))?,
            Builtin::DivisorCount => {
                separable_power("divisor_count", d, |n| Rational::from_integer(divisor_count(n).into()))?
            }
            Builtin::RamanujanC => {
                if d != 2 {
                    return Err(Error::ArityMismatch { expected: 2, found: d });
                }
                ArithmeticFunction::new("ramanujan_C", 2, |x| Rational::from_integer(ramanujan_c(x[0], x[1]).into()))
            }
            Builtin::MeetComposed(inner) => ArithmeticFunction::meet_composed(univariate(inner)?, d)?,
        })
    }
}

fn rename(f: ArithmeticFunction, name: String) -> ArithmeticFunction {
    let inner = f.clone();
    ArithmeticFunction::build(
        name,
        f.arity(),
        Box::new(move |x| inner.eval(x)),
        f.inner.factors.clone(),
        f.inner.meet_inner.clone(),
    )
}

fn separable_power(name: &str, d: usize, g: fn(u64) -> Rational) -> Result<ArithmeticFunction> {
    let uni = ArithmeticFunction::new(name, 1, move |x| g(x[0]));
    if d == 1 {
        return Ok(uni);
    }
    let f = ArithmeticFunction::separable(vec![uni; d])?;
    Ok(rename(f, name.to_string()))
}

/// Parses a builtin spec and instantiates it with arity `d`.
pub fn builtin(spec: &str, d: usize) -> Result<ArithmeticFunction> {
    Builtin::parse(spec)?.instantiate(d)
}

/// `μ_d(i) = μ(i_1)⋯μ(i_d)`.
pub fn mu_d(d: usize) -> ArithmeticFunction {
    Builtin::Mu.instantiate(d).expect("arity >= 1")
}

pub fn zeta_d(d: usize) -> ArithmeticFunction {
    Builtin::Zeta.instantiate(d).expect("arity >= 1")
}

pub fn delta_d(d: usize) -> ArithmeticFunction {
    Builtin::Delta.instantiate(d).expect("arity >= 1")
}

/// Lexicographic enumeration of `{1..m}^d`.
pub fn grid_points(d: usize, m: u64) -> impl Iterator<Item = Vec<u64>> {
    let total = (m as usize).pow(d as u32);
    (0..total).map(move |mut flat| {
        let mut p = vec![0u64; d];
        for j in (0..d).rev() {
            p[j] = (flat % m as usize) as u64 + 1;
            flat /= m as usize;
        }
        p
    })
}

/// Checks `(f *_d μ_d)(i) >= 0` on every point of `{1..m}^d`, reporting the
/// first negative value in lexicographic order.
pub fn pd_check_grid(f: &ArithmeticFunction, m: usize) -> Result<PdVerdict> {
    if m == 0 {
        return Err(Error::InvalidParameter("grid bound must be at least 1".into()));
    }
    let mu = mu_d(f.arity());
    for p in grid_points(f.arity(), m as u64) {
        let v = dirichlet_convolve_d(f, &mu, &p)?;
        if v.is_negative() {
            return Ok(PdVerdict::negative(Witness::Element { element: Element::point(&p), value: v }, m));
        }
    }
    Ok(PdVerdict::positive(m, false))
}

/// Sign pattern of `(g *_1 μ)(j)`, `j <= m`, for one coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    NonNegative,
    NonPositive,
    Mixed,
    /// Identically zero; counted with the nonnegative coordinates.
    Zero,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FactoredVerdict {
    pub verdict: PdVerdict,
    pub classes: Vec<SignClass>,
    /// Zero-based coordinates whose inverted values are all `<= 0` (and not
    /// all zero).
    pub nonpositive: Vec<usize>,
}

/// Positive definiteness of `g_1(i_1)⋯g_d(i_d)` from the sign pattern of the
/// univariate inversions `(g_j *_1 μ)`.
pub fn pd_check_factored(gs: &[ArithmeticFunction], m: usize) -> Result<FactoredVerdict> {
    if m == 0 {
        return Err(Error::InvalidParameter("grid bound must be at least 1".into()));
    }
    if let Some(bad) = gs.iter().find(|g| g.arity() != 1) {
        return Err(Error::ArityMismatch { expected: 1, found: bad.arity() });
    }
    let mu = mu_d(1);
    let mut classes = Vec::with_capacity(gs.len());
    let mut first_pos = Vec::with_capacity(gs.len());
    let mut first_neg = Vec::with_capacity(gs.len());
    let mut values = Vec::with_capacity(gs.len());
    for g in gs {
        let s: Vec<Rational> =
            (1..=m as u64).map(|j| dirichlet_convolve_d(g, &mu, &[j])).collect::<Result<_>>()?;
        let pos = s.iter().position(|v| v.is_positive());
        let neg = s.iter().position(|v| v.is_negative());
        classes.push(match (pos, neg) {
            (None, None) => SignClass::Zero,
            (Some(_), None) => SignClass::NonNegative,
            (None, Some(_)) => SignClass::NonPositive,
            (Some(_), Some(_)) => SignClass::Mixed,
        });
        first_pos.push(pos);
        first_neg.push(neg);
        values.push(s);
    }
    let nonpositive: Vec<usize> = (0..gs.len()).filter(|&i| classes[i] == SignClass::NonPositive).collect();

    // A zero coordinate makes every inverted value vanish, and could be
    // placed in either class to fix the parity.
    if classes.contains(&SignClass::Zero) {
        return Ok(FactoredVerdict { verdict: PdVerdict::positive(m, false), classes, nonpositive });
    }
    let mixed = classes.iter().position(|c| *c == SignClass::Mixed);
    if mixed.is_none() && nonpositive.len() % 2 == 0 {
        return Ok(FactoredVerdict { verdict: PdVerdict::positive(m, false), classes, nonpositive });
    }

    // witness: one nonzero value per coordinate, signs arranged to multiply
    // to a negative number
    let mut pick: Vec<usize> = (0..gs.len())
        .map(|i| match (first_pos[i], first_neg[i]) {
            (Some(p), Some(n)) => p.min(n),
            (Some(p), None) => p,
            (None, Some(n)) => n,
            (None, None) => unreachable!("zero coordinates handled above"),
        })
        .collect();
    let sign = |pick: &[usize]| pick.iter().enumerate().filter(|(i, &j)| values[*i][j].is_negative()).count() % 2;
    if sign(&pick) == 0 {
        let i = mixed.expect("even parity without mixed coordinate is positive");
        pick[i] = if values[i][pick[i]].is_negative() { first_pos[i].unwrap() } else { first_neg[i].unwrap() };
    }
    let value: Rational = pick.iter().enumerate().map(|(i, &j)| values[i][j].clone()).product();
    let point: Vec<u64> = pick.iter().map(|&j| j as u64 + 1).collect();
    let verdict = PdVerdict::negative(Witness::Element { element: Element::point(&point), value }, m);
    Ok(FactoredVerdict { verdict, classes, nonpositive })
}
