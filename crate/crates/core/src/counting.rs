//! Exact evaluation of the closed-form counts and bounds.
//!
//! Every function is generic over a [`Natural`] so the same code runs on
//! `u64`, `u128` or [`BigUint`](num_bigint::BigUint). Machine-word
//! instantiations report [`CountError::Overflow`] instead of wrapping; the
//! crate-level [`Count`](crate::Count) alias is the arbitrary-precision one.
//!
//! Rational quantities such as `q^k / C` are never formed: bounds are stored
//! as their exact integer floor or ceiling.

use std::fmt;

use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::field::{prime_divisors, PrimePower};

/// Exact non-negative integer type a count can be evaluated in.
pub trait Natural:
    Integer
    + Clone
    + fmt::Debug
    + fmt::Display
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromPrimitive
    + Send
    + Sync
{
}

impl<T> Natural for T where
    T: Integer
        + Clone
        + fmt::Debug
        + fmt::Display
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + FromPrimitive
        + Send
        + Sync
{
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("{name} must be at least {min}, got {value}")]
    InvalidArgument {
        name: &'static str,
        min: u64,
        value: u64,
    },
    #[error("value does not fit the chosen integer type")]
    Overflow,
    /// A quantity that must be integral (or non-negative) was not. Always an
    /// implementation bug, never bad input.
    #[error("integrality violated: {0}")]
    Integrality(String),
}

pub(crate) fn require(name: &'static str, value: u64, min: u64) -> Result<(), CountError> {
    if value < min {
        Err(CountError::InvalidArgument { name, min, value })
    } else {
        Ok(())
    }
}

pub(crate) fn lit<T: Natural>(v: u64) -> T {
    T::from_u64(v).expect("a Natural must represent every u64")
}

pub(crate) fn power<T: Natural>(base: u64, exp: u64) -> Result<T, CountError> {
    let exp = usize::try_from(exp).map_err(|_| CountError::Overflow)?;
    num_traits::checked_pow(lit::<T>(base), exp).ok_or(CountError::Overflow)
}

fn add<T: Natural>(a: &T, b: &T) -> Result<T, CountError> {
    a.checked_add(b).ok_or(CountError::Overflow)
}

fn mul<T: Natural>(a: &T, b: &T) -> Result<T, CountError> {
    a.checked_mul(b).ok_or(CountError::Overflow)
}

/// `a - b`, where a negative result breaks an invariant of the caller.
fn sub_nonneg<T: Natural>(a: &T, b: &T, what: &str) -> Result<T, CountError> {
    if b > a {
        return Err(CountError::Integrality(format!("{what} is negative")));
    }
    Ok(a.clone() - b.clone())
}

fn div_exact<T: Natural>(num: &T, den: &T, what: &str) -> Result<T, CountError> {
    let (quot, rem) = num.div_rem(den);
    if !rem.is_zero() {
        return Err(CountError::Integrality(format!(
            "{what}: {num} is not divisible by {den}"
        )));
    }
    Ok(quot)
}

fn div_ceil<T: Natural>(num: &T, den: &T) -> T {
    let (quot, rem) = num.div_rem(den);
    if rem.is_zero() {
        quot
    } else {
        quot + T::one()
    }
}

/// Positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Result<Vec<u64>, CountError> {
    require("n", n, 1)?;
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    Ok(small)
}

/// The Möbius function: `(-1)^j` on a product of `j` distinct primes, else 0.
pub fn moebius(n: u64) -> Result<i8, CountError> {
    require("n", n, 1)?;
    let primes = prime_divisors(n);
    let squarefree: u64 = primes.iter().product();
    if squarefree != n {
        return Ok(0);
    }
    Ok(if primes.len().is_multiple_of(2) { 1 } else { -1 })
}

/// `sum_{d | n} mu(d) q^{gn/d}` with a caller-supplied Möbius function.
pub fn moebius_sum<T, F>(q: PrimePower, n: u64, g: u64, mu: F) -> Result<T, CountError>
where
    T: Natural,
    F: Fn(u64) -> Result<i8, CountError>,
{
    let mut positive = T::zero();
    let mut negative = T::zero();
    for d in divisors(n)? {
        let term = power::<T>(q.value(), g * (n / d))?;
        match mu(d)? {
            1 => positive = add(&positive, &term)?,
            -1 => negative = add(&negative, &term)?,
            _ => {}
        }
    }
    sub_nonneg(&positive, &negative, "Möbius sum")
}

/// `N_{q,n}(g)`: the number of `Gal(F_{q^n}/F_q)`-orbits of generating
/// `g`-tuples of `F_{q^n}` over `F_q`, i.e. `(1/n) sum_{d|n} mu(d) q^{gn/d}`.
///
/// For `g = 0` the value is 1 when `n = 1` and 0 otherwise.
pub fn n_etale<T: Natural>(q: PrimePower, n: u64, g: u64) -> Result<T, CountError> {
    n_etale_with(q, n, g, moebius)
}

/// [`n_etale`] with a substitute Möbius function, used to check that the
/// verification harness notices a corrupted formula.
pub fn n_etale_with<T, F>(q: PrimePower, n: u64, g: u64, mu: F) -> Result<T, CountError>
where
    T: Natural,
    F: Fn(u64) -> Result<i8, CountError>,
{
    require("n", n, 1)?;
    if g == 0 {
        return Ok(if n == 1 { T::one() } else { T::zero() });
    }
    let sum = moebius_sum::<T, _>(q, n, g, mu)?;
    div_exact(&sum, &lit(n), "Möbius sum")
}

/// Orbit-partition identity `q^{gn} = sum_{d|n} d N_{q,d}(g)`.
pub fn burnside_identity_check<T: Natural>(
    q: PrimePower,
    n: u64,
    g: u64,
) -> Result<bool, CountError> {
    let mut total = T::zero();
    for d in divisors(n)? {
        let term = mul(&lit::<T>(d), &n_etale::<T>(q, d, g)?)?;
        total = add(&total, &term)?;
    }
    Ok(total == power::<T>(q.value(), g * n)?)
}

/// Where a bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSource {
    /// The exact value is known (Möbius formula).
    ExactCount,
    /// The count is non-negative.
    Trivial,
    /// `N_{q,n}(g) <= q^{gn} / n`: at most all tuples, in orbits of size `n`.
    OrbitAverage,
    /// `N_{q,n}(g) >= (q^{gn} / n)(1 - 1/q)`.
    UnitFraction,
    /// A single matrix generates a commutative algebra, so `N(g) = 0` for `g <= 1`, `m >= 2`.
    CommutativeImage,
    /// `N >= q^{(g-1) n m^2} / C`, from the explicit family of generating pairs.
    GeneratingPairs,
    /// `N >= |T_g| / C`, counting tuples that span the algebra as a vector space.
    SpanningTuples,
    /// `N <= q^{g n m^2} / C`.
    AllTuples,
    /// `N <= (q^{g n m^2} - q^{g m^2}) / C`, excluding tuples inside `M_m(F_q)` (needs `n >= 2`).
    ScalarSubalgebra,
    /// `N <= (q^{g n m^2} - q^{g n (m^2 - m + 1)}) / C`, excluding tuples with
    /// zero first column below the diagonal (needs `m >= 2`).
    FirstColumnSubalgebra,
}

/// An integer bracket `lower <= N <= upper` with the provenance of each side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundPair<T> {
    pub lower: T,
    pub upper: T,
    pub lower_source: BoundSource,
    pub upper_source: BoundSource,
}

impl<T: Natural> BoundPair<T> {
    pub fn contains(&self, value: &T) -> bool {
        &self.lower <= value && value <= &self.upper
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    fn tighten_lower(&mut self, value: T, source: BoundSource) {
        if value > self.lower {
            self.lower = value;
            self.lower_source = source;
        }
    }

    fn tighten_upper(&mut self, value: T, source: BoundSource) {
        if value < self.upper {
            self.upper = value;
            self.upper_source = source;
        }
    }

    fn checked(self) -> Result<Self, CountError> {
        if self.lower > self.upper {
            return Err(CountError::Integrality(format!(
                "lower bound {} exceeds upper bound {}",
                self.lower, self.upper
            )));
        }
        Ok(self)
    }
}

/// Integer bracket around `N_{q,n}(g)` for `n, g >= 1`:
/// `ceil(q^{gn}(q-1) / (nq)) <= N <= floor(q^{gn} / n)`.
pub fn etale_bounds<T: Natural>(q: PrimePower, n: u64, g: u64) -> Result<BoundPair<T>, CountError> {
    require("n", n, 1)?;
    require("g", g, 1)?;
    let total = power::<T>(q.value(), g * n)?;
    let num = mul(&total, &lit(q.value() - 1))?;
    let den = mul(&lit::<T>(n), &lit(q.value()))?;
    BoundPair {
        lower: div_ceil(&num, &den),
        upper: total.div_floor(&lit(n)),
        lower_source: BoundSource::UnitFraction,
        upper_source: BoundSource::OrbitAverage,
    }
    .checked()
}

/// `C = |G(q,n,m)| = n |PGL_m(F_{q^n})| = n prod_{i<m} (q^{nm} - q^{ni}) / (q^n - 1)`.
pub fn group_order_c<T: Natural>(q: PrimePower, n: u64, m: u64) -> Result<T, CountError> {
    require("n", n, 1)?;
    require("m", m, 1)?;
    let top = power::<T>(q.value(), n * m)?;
    let mut gl = T::one();
    for i in 0..m {
        let factor = sub_nonneg(&top, &power(q.value(), n * i)?, "GL factor")?;
        gl = mul(&gl, &factor)?;
    }
    let scalars = power::<T>(q.value(), n)? - T::one();
    let pgl = div_exact(&gl, &scalars, "|GL_m| / (q^n - 1)")?;
    mul(&lit(n), &pgl)
}

/// Number of `g`-tuples spanning a `d`-dimensional `F_q`-space, i.e. rank-`d`
/// `d x g` matrices: `prod_{i<d} (q^g - q^i)` when `g >= d`, else 0.
pub fn rank_count<T: Natural>(q: PrimePower, d: u64, g: u64) -> Result<T, CountError> {
    require("d", d, 1)?;
    if g < d {
        return Ok(T::zero());
    }
    let top = power::<T>(q.value(), g)?;
    let mut acc = T::one();
    for i in 0..d {
        let factor = sub_nonneg(&top, &power(q.value(), i)?, "rank factor")?;
        acc = mul(&acc, &factor)?;
    }
    Ok(acc)
}

/// `rank_count(q,d,g) / q^{dg} >= 1 - sum_{i<d} q^{i-g}`, compared after
/// multiplying through by `q^{dg}`.
pub fn rank_fraction_holds<T: Natural>(q: PrimePower, d: u64, g: u64) -> Result<bool, CountError> {
    let mut lhs = rank_count::<T>(q, d, g)?;
    for i in 0..d {
        lhs = add(&lhs, &power(q.value(), g * (d - 1) + i)?)?;
    }
    Ok(lhs >= power(q.value(), d * g)?)
}

/// Integer bracket around `N_{q,n,m}(g)`.
///
/// For `m = 1` both sides equal `N_{q,n}(g)`. For `m >= 2` the lower side is
/// the best of the generating-pair family (`g >= 2`) and the spanning-tuple
/// count; the upper side is the best of the all-tuples bound and the two
/// proper-subalgebra exclusions whose side conditions hold.
pub fn matrix_bounds<T: Natural>(
    q: PrimePower,
    n: u64,
    m: u64,
    g: u64,
) -> Result<BoundPair<T>, CountError> {
    require("n", n, 1)?;
    require("m", m, 1)?;
    if m == 1 {
        let exact = n_etale::<T>(q, n, g)?;
        return Ok(BoundPair {
            lower: exact.clone(),
            upper: exact,
            lower_source: BoundSource::ExactCount,
            upper_source: BoundSource::ExactCount,
        });
    }
    if g <= 1 {
        return Ok(BoundPair {
            lower: T::zero(),
            upper: T::zero(),
            lower_source: BoundSource::Trivial,
            upper_source: BoundSource::CommutativeImage,
        });
    }
    let qv = q.value();
    let c = group_order_c::<T>(q, n, m)?;
    let nm2 = n * m * m;
    let all = power::<T>(qv, g * nm2)?;
    let mut pair = BoundPair {
        lower: T::zero(),
        upper: all.div_floor(&c),
        lower_source: BoundSource::Trivial,
        upper_source: BoundSource::AllTuples,
    };
    pair.tighten_lower(
        div_ceil(&power(qv, (g - 1) * nm2)?, &c),
        BoundSource::GeneratingPairs,
    );
    pair.tighten_lower(
        div_ceil(&rank_count(q, nm2, g)?, &c),
        BoundSource::SpanningTuples,
    );
    if n >= 2 {
        let rest = sub_nonneg(&all, &power(qv, g * m * m)?, "scalar exclusion")?;
        pair.tighten_upper(rest.div_floor(&c), BoundSource::ScalarSubalgebra);
    }
    let rest = sub_nonneg(&all, &power(qv, g * n * (m * m - m + 1))?, "column exclusion")?;
    pair.tighten_upper(rest.div_floor(&c), BoundSource::FirstColumnSubalgebra);
    pair.checked()
}

/// Least `k >= 0` with `q^{k * step} >= x`, by exact comparison.
pub fn ceil_log<T: Natural>(q: u64, step: u64, x: &T) -> Result<u64, CountError> {
    require("q", q, 2)?;
    require("step", step, 1)?;
    // Overflowing the type means the power certainly exceeds x.
    let reaches = |k: u64| -> bool {
        match power::<T>(q, k * step) {
            Ok(v) => &v >= x,
            Err(_) => true,
        }
    };
    if reaches(0) {
        return Ok(0);
    }
    let mut hi = 1u64;
    while !reaches(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2; // reaches(lo) is false
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
