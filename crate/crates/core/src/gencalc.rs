//! `gen(A)` for products of matrix algebras over extensions of `F_q`, and
//! the sets of multiplicities on which the matrix bracket takes its lower or
//! upper value.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counting::{ceil_log, group_order_c, matrix_bounds, n_etale, CountError};
use crate::field::{FieldError, PrimePower};
use crate::oracle::{Oracle, OracleError};
use crate::Count;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid algebra spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("integrality violated: {0}")]
    Integrality(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    BoundsOnly,
    AllowOracle,
}

/// One pure factor: `M_m(F_{q^n})` repeated `r` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Part {
    pub n: u64,
    pub m: u64,
    pub r: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    q: u64,
    parts: Vec<Part>,
}

/// A separable algebra `prod_i M_{m_i}(F_{q^{n_i}})^{r_i}`, with parts sorted
/// by `(n, m)` and duplicates merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraSpec {
    q: PrimePower,
    parts: Vec<Part>,
}

impl AlgebraSpec {
    pub fn new(q: u64, parts: &[Part]) -> Result<Self, GenError> {
        let q = PrimePower::new(q)?;
        if parts.is_empty() {
            return Err(GenError::Spec("parts must not be empty".into()));
        }
        let mut merged: Vec<Part> = Vec::new();
        let mut sorted = parts.to_vec();
        sorted.sort();
        for p in sorted {
            if p.n == 0 || p.m == 0 || p.r == 0 {
                return Err(GenError::Spec(format!(
                    "n, m and r must be positive, got n={}, m={}, r={}",
                    p.n, p.m, p.r
                )));
            }
            match merged.last_mut() {
                Some(last) if (last.n, last.m) == (p.n, p.m) => {
                    last.r = last
                        .r
                        .checked_add(p.r)
                        .ok_or_else(|| GenError::Spec("multiplicity overflows".into()))?;
                }
                _ => merged.push(p),
            }
        }
        Ok(Self { q, parts: merged })
    }

    /// Parses `{"q": 4, "parts": [{"n": 3, "m": 1, "r": 5}, ...]}`.
    pub fn from_json(text: &str) -> Result<Self, GenError> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| GenError::Spec(e.to_string()))?;
        Self::new(raw.q, &raw.parts)
    }

    pub fn q(&self) -> PrimePower {
        self.q
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn is_etale(&self) -> bool {
        self.parts.iter().all(|p| p.m == 1)
    }

    /// `dim_{F_q}` of the algebra.
    pub fn dimension(&self) -> Option<u64> {
        self.parts.iter().try_fold(0u64, |acc, p| {
            p.n.checked_mul(p.m)?
                .checked_mul(p.m)?
                .checked_mul(p.r)?
                .checked_add(acc)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Formula,
    BoundResolved,
    OracleResolved,
    BracketOnly,
}

/// Result for one pure part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartResult {
    pub part: Part,
    pub lo: u64,
    pub hi: u64,
    pub method: Method,
    /// Lower end of the unconditional matrix bracket, before the floor of 2
    /// is applied; `None` for fields.
    pub g0: Option<u64>,
}

impl PartResult {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn value(&self) -> Option<u64> {
        self.is_exact().then_some(self.lo)
    }
}

/// `gen` of a whole algebra: exact, or a bracket `{lo, lo + 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenResult {
    pub lo: u64,
    pub hi: u64,
    pub method: Method,
    pub parts: Vec<PartResult>,
}

impl GenResult {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn value(&self) -> Option<u64> {
        self.is_exact().then_some(self.lo)
    }

    pub fn status(&self) -> &'static str {
        if self.is_exact() {
            "exact"
        } else {
            "bracket"
        }
    }
}

/// Least `g >= 0` with `r <= N_{q,n}(g)`.
pub fn gen_pure_etale(q: PrimePower, n: u64, r: u64) -> Result<u64, GenError> {
    if r == 0 || n == 0 {
        return Err(GenError::Spec("n and r must be positive".into()));
    }
    let r = BigUint::from(r);
    let mut g = 0;
    while n_etale::<BigUint>(q, n, g)? < r {
        g += 1;
    }
    Ok(g)
}

/// Lower end of the field bracket: the least `k` with `q^{kn} >= n r`.
pub fn etale_bracket_lower(q: PrimePower, n: u64, r: u64) -> Result<u64, GenError> {
    let nr = BigUint::from(n) * BigUint::from(r);
    Ok(ceil_log(q.value(), n, &nr)?)
}

/// Whether `gen_pure_etale(q,n,r)` lies in `{k, k + 1}` for
/// `k = etale_bracket_lower(q,n,r)`.
pub fn etale_bracket_check(q: PrimePower, n: u64, r: u64) -> Result<bool, GenError> {
    let lo = etale_bracket_lower(q, n, r)?;
    let gen = gen_pure_etale(q, n, r)?;
    Ok(lo <= gen && gen <= lo + 1)
}

/// `gen` of `M_m(F_{q^n})^r`.
///
/// Starts from the bracket `{g*, g* + 1}`, `g* = max(g0, 2)`, then decides
/// whether `r <= N(g*)`. With [`Mode::AllowOracle`] an exhaustive count is
/// preferred when it fits under the guard, and any decision the bounds also
/// make is cross-checked against it.
pub fn gen_pure_matrix(
    q: PrimePower,
    n: u64,
    m: u64,
    r: u64,
    mode: Mode,
    oracle: &Oracle,
) -> Result<PartResult, GenError> {
    let part = Part { n, m, r };
    if n == 0 || m == 0 || r == 0 {
        return Err(GenError::Spec("n, m and r must be positive".into()));
    }
    if m == 1 {
        let g = gen_pure_etale(q, n, r)?;
        return Ok(PartResult {
            part,
            lo: g,
            hi: g,
            method: Method::Formula,
            g0: None,
        });
    }
    let c = group_order_c::<BigUint>(q, n, m)?;
    let rb = BigUint::from(r);
    let g0 = ceil_log(q.value(), n * m * m, &(&c * &rb))?;
    let g = g0.max(2);

    let bounds = matrix_bounds::<BigUint>(q, n, m, g)?;
    let by_bounds = if rb <= bounds.lower {
        Some(g)
    } else if rb > bounds.upper {
        Some(g + 1)
    } else {
        None
    };

    let exact = |value: u64, method| PartResult {
        part,
        lo: value,
        hi: value,
        method,
        g0: Some(g0),
    };

    if mode == Mode::AllowOracle && oracle.matrix_feasible(q, n, m, g) {
        let counted = oracle.count_matrix(q, n, m, g)?;
        let big_n = counted
            .normalized
            .ok_or_else(|| GenError::Integrality("exhaustive count without a value".into()))?;
        let value = if rb <= big_n { g } else { g + 1 };
        if let Some(b) = by_bounds {
            if b != value {
                return Err(GenError::Integrality(format!(
                    "bounds give gen {b} but the count N({g}) = {big_n} gives {value}"
                )));
            }
        }
        return Ok(exact(value, Method::OracleResolved));
    }
    Ok(match by_bounds {
        Some(value) => exact(value, Method::BoundResolved),
        None => PartResult {
            part,
            lo: g,
            hi: g + 1,
            method: Method::BracketOnly,
            g0: Some(g0),
        },
    })
}

/// `gen` of a product: the maximum over its pure parts, taken separately on
/// lower and upper ends.
pub fn gen_algebra(spec: &AlgebraSpec, mode: Mode, oracle: &Oracle) -> Result<GenResult, GenError> {
    let parts = spec
        .parts
        .iter()
        .map(|p| gen_pure_matrix(spec.q, p.n, p.m, p.r, mode, oracle))
        .collect::<Result<Vec<_>, _>>()?;
    let lo = parts.iter().map(|p| p.lo).max().expect("nonempty spec");
    let hi = parts.iter().map(|p| p.hi).max().expect("nonempty spec");
    let method = if lo == hi {
        parts
            .iter()
            .find(|p| p.lo == lo && p.hi == hi)
            .map(|p| p.method)
            .expect("some part attains an exact maximum")
    } else {
        Method::BracketOnly
    };
    Ok(GenResult { lo, hi, method, parts })
}

/// `ceil(log_q d)` for `d = dim_{F_q} E`; the spec must be étale.
pub fn etale_dimension_bound(spec: &AlgebraSpec) -> Result<u64, GenError> {
    if !spec.is_etale() {
        return Err(GenError::Spec("every part must have m = 1".into()));
    }
    let d = spec
        .dimension()
        .ok_or_else(|| GenError::Spec("dimension overflows".into()))?;
    Ok(ceil_log(spec.q.value(), 1, &BigUint::from(d))?)
}

/// Whether `gen(E) <= ceil(log_q dim E)`.
pub fn etale_dimension_bound_check(spec: &AlgebraSpec, oracle: &Oracle) -> Result<bool, GenError> {
    let bound = etale_dimension_bound(spec)?;
    let gen = gen_algebra(spec, Mode::BoundsOnly, oracle)?;
    Ok(gen.hi <= bound)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NSource {
    Formula,
    Oracle,
    Bounds,
}

/// `N_{q,n,m}(g)` or, when unresolved, a bracket around it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NValue {
    pub g: u64,
    pub lower: Count,
    pub upper: Count,
    pub source: NSource,
}

impl NValue {
    pub fn exact(&self) -> Option<&Count> {
        (self.lower == self.upper).then_some(&self.lower)
    }
}

/// Integers in `(lo_exclusive, hi_inclusive]`. An endpoint flagged inexact
/// was replaced by its bound on the side that keeps the interval a subset of
/// the true one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntegerInterval {
    pub lo_exclusive: Count,
    pub hi_inclusive: Count,
    pub lo_exact: bool,
    pub hi_exact: bool,
}

impl IntegerInterval {
    pub fn is_exact(&self) -> bool {
        self.lo_exact && self.hi_exact
    }

    pub fn len(&self) -> Count {
        if self.hi_inclusive > self.lo_exclusive {
            &self.hi_inclusive - &self.lo_exclusive
        } else {
            Count::zero()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len().is_zero()
    }

    pub fn contains(&self, r: &Count) -> bool {
        r > &self.lo_exclusive && r <= &self.hi_inclusive
    }

    /// First and last member, if nonempty.
    pub fn first_last(&self) -> Option<(Count, Count)> {
        (!self.is_empty()).then(|| (&self.lo_exclusive + 1u32, self.hi_inclusive.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SizeBoundKind {
    /// Tuples inside `M_m(F_q)`, available when `n >= 2`.
    ScalarSubalgebra,
    /// Tuples with a zero first column below the diagonal, when `m >= 2`.
    FirstColumn,
}

/// A lower bound on `|I_1(g)|` of the form `floor(q^k / C)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeBound {
    pub kind: SizeBoundKind,
    /// `true` for the exponent built on `g - 1`, `false` for the one built on `g`.
    pub shifted: bool,
    pub exponent: u64,
    pub value: Count,
    /// `None` when `|I_1(g)|` is not known exactly.
    pub holds: Option<bool>,
}

/// `I_0(g) = (floor(q^{(g-1)nm^2}/C), N(g)]` and
/// `I_1(g) = (N(g-1), floor(q^{(g-1)nm^2}/C)]` over the integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntervalReport {
    pub q: u64,
    pub n: u64,
    pub m: u64,
    pub g: u64,
    pub c: Count,
    pub boundary_floor: Count,
    pub n_prev: NValue,
    pub n_curr: NValue,
    pub i0: IntegerInterval,
    pub i1: IntegerInterval,
    pub size_bounds: Vec<SizeBound>,
}

impl IntervalReport {
    pub fn n_exact(&self) -> bool {
        self.n_prev.exact().is_some() && self.n_curr.exact().is_some()
    }

    /// `I_1(g)` and `I_0(g)` tile `(N(g-1), N(g)]`; `None` if either `N` is
    /// unresolved.
    pub fn partition_law(&self) -> Option<bool> {
        let prev = self.n_prev.exact()?;
        let curr = self.n_curr.exact()?;
        let tiles = &self.i1.lo_exclusive == prev
            && self.i1.hi_inclusive == self.i0.lo_exclusive
            && &self.i0.hi_inclusive == curr
            && prev <= &self.boundary_floor
            && &self.boundary_floor <= curr;
        Some(tiles)
    }
}

fn resolve_n(q: PrimePower, n: u64, m: u64, g: u64, mode: Mode, oracle: &Oracle) -> Result<NValue, GenError> {
    if m == 1 {
        let v = n_etale::<BigUint>(q, n, g)?;
        return Ok(NValue {
            g,
            lower: v.clone(),
            upper: v,
            source: NSource::Formula,
        });
    }
    if g >= 2 && mode == Mode::AllowOracle && oracle.matrix_feasible(q, n, m, g) {
        let r = oracle.count_matrix(q, n, m, g)?;
        let v = r
            .normalized
            .ok_or_else(|| GenError::Integrality("exhaustive count without a value".into()))?;
        return Ok(NValue {
            g,
            lower: v.clone(),
            upper: v,
            source: NSource::Oracle,
        });
    }
    let b = matrix_bounds::<BigUint>(q, n, m, g)?;
    Ok(NValue {
        g,
        lower: b.lower,
        upper: b.upper,
        source: NSource::Bounds,
    })
}

/// The interval sets for `g >= 1`.
pub fn intervals(q: PrimePower, n: u64, m: u64, g: u64, mode: Mode, oracle: &Oracle) -> Result<IntervalReport, GenError> {
    if g == 0 || n == 0 || m == 0 {
        return Err(GenError::Spec("n, m and g must be positive".into()));
    }
    let c = group_order_c::<BigUint>(q, n, m)?;
    let nm2 = n * m * m;
    let qb = BigUint::from(q.value());
    let boundary_floor = qb.pow(((g - 1) * nm2) as u32).div_floor(&c);
    let n_prev = resolve_n(q, n, m, g - 1, mode, oracle)?;
    let n_curr = resolve_n(q, n, m, g, mode, oracle)?;

    let i0 = IntegerInterval {
        lo_exclusive: boundary_floor.clone(),
        hi_inclusive: n_curr.lower.clone(),
        lo_exact: true,
        hi_exact: n_curr.exact().is_some(),
    };
    let i1 = IntegerInterval {
        lo_exclusive: n_prev.upper.clone(),
        hi_inclusive: boundary_floor.clone(),
        lo_exact: n_prev.exact().is_some(),
        hi_exact: true,
    };

    let size = i1.is_exact().then(|| i1.len());
    let mut size_bounds = Vec::new();
    let mut push = |kind, shifted: bool, exponent: u64| {
        let value = qb.pow(exponent as u32).div_floor(&c);
        let holds = size.as_ref().map(|s| &value <= s);
        size_bounds.push(SizeBound {
            kind,
            shifted,
            exponent,
            value,
            holds,
        });
    };
    if n >= 2 {
        push(SizeBoundKind::ScalarSubalgebra, true, (g - 1) * m * m);
        push(SizeBoundKind::ScalarSubalgebra, false, g * m * m);
    }
    if m >= 2 {
        let cols = n * (m * m - m + 1);
        push(SizeBoundKind::FirstColumn, true, (g - 1) * cols);
        push(SizeBoundKind::FirstColumn, false, g * cols);
    }

    Ok(IntervalReport {
        q: q.value(),
        n,
        m,
        g,
        c,
        boundary_floor,
        n_prev,
        n_curr,
        i0,
        i1,
        size_bounds,
    })
}

/// `I_0(g)` and `I_1(g + 1)` together make up the integers in
/// `(q^{(g-1)nm^2}/C, q^{gnm^2}/C]`. `None` when an endpoint is unresolved.
pub fn adjacent_law(current: &IntervalReport, next: &IntervalReport) -> Option<bool> {
    if !(current.i0.is_exact() && next.i1.is_exact()) {
        return None;
    }
    let joined = current.i0.hi_inclusive == next.i1.lo_exclusive
        && current.i0.lo_exclusive <= current.i0.hi_inclusive
        && next.i1.lo_exclusive <= next.i1.hi_inclusive;
    let expected_lo = &current.boundary_floor;
    let expected_hi = &next.boundary_floor;
    Some(joined && &current.i0.lo_exclusive == expected_lo && &next.i1.hi_inclusive == expected_hi)
}

/// `r` lies in `I_0` or `I_1`, or neither, by exact comparison of `C r`
/// against powers of `q`.
pub fn classify(report: &IntervalReport, r: u64) -> Option<u8> {
    let r = BigUint::from(r);
    if report.i0.contains(&r) {
        Some(0)
    } else if report.i1.contains(&r) {
        Some(1)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(q: u64) -> PrimePower {
        PrimePower::new(q).unwrap()
    }

    #[test]
    fn etale_examples() {
        assert_eq!(gen_pure_etale(pp(2), 1, 5).unwrap(), 3);
        assert_eq!(gen_pure_etale(pp(7), 1, 1).unwrap(), 0);
        assert_eq!(gen_pure_etale(pp(2), 2, 2).unwrap(), 2);
        assert_eq!(gen_pure_etale(pp(2), 2, 1).unwrap(), 1);
        assert_eq!(gen_pure_etale(pp(2), 3, 1).unwrap(), 1);
    }

    #[test]
    fn etale_bracket_examples() {
        assert_eq!(etale_bracket_lower(pp(2), 1, 5).unwrap(), 3);
        assert!(etale_bracket_check(pp(2), 1, 5).unwrap());
        assert_eq!(etale_bracket_lower(pp(2), 2, 2).unwrap(), 1);
        assert!(etale_bracket_check(pp(2), 2, 2).unwrap());
        assert_eq!(etale_bracket_lower(pp(3), 1, 1).unwrap(), 0);
        for r in 1..200 {
            assert_eq!(gen_pure_etale(pp(3), 1, r).unwrap(), etale_bracket_lower(pp(3), 1, r).unwrap());
        }
    }

    #[test]
    fn matrix_examples() {
        let o = Oracle::default();
        for (r, expect) in [(1, 2), (2, 2), (3, 2), (16, 2), (17, 3)] {
            let res = gen_pure_matrix(pp(2), 1, 2, r, Mode::AllowOracle, &o).unwrap();
            assert_eq!(res.value(), Some(expect), "r = {r}");
            assert_eq!(res.method, Method::OracleResolved);
        }
        let r3 = gen_pure_matrix(pp(2), 1, 2, 3, Mode::AllowOracle, &o).unwrap();
        assert_eq!(r3.g0, Some(2));
        let r2 = gen_pure_matrix(pp(2), 1, 2, 2, Mode::AllowOracle, &o).unwrap();
        assert_eq!(r2.g0, Some(1));
    }

    #[test]
    fn matrix_bounds_only() {
        let o = Oracle::default();
        // lower bound at g = 2 is 3
        let res = gen_pure_matrix(pp(2), 1, 2, 3, Mode::BoundsOnly, &o).unwrap();
        assert_eq!((res.value(), res.method), (Some(2), Method::BoundResolved));
        // 16 sits between the bounds 3 and 32
        let res = gen_pure_matrix(pp(2), 1, 2, 16, Mode::BoundsOnly, &o).unwrap();
        assert_eq!((res.lo, res.hi, res.method), (2, 3, Method::BracketOnly));
        let tiny = Oracle::new(10);
        let res = gen_pure_matrix(pp(2), 1, 2, 16, Mode::AllowOracle, &tiny).unwrap();
        assert_eq!((res.lo, res.hi, res.method), (2, 3, Method::BracketOnly));
    }

    #[test]
    fn algebra_examples() {
        let o = Oracle::default();
        let spec = AlgebraSpec::new(2, &[Part { n: 1, m: 1, r: 5 }, Part { n: 2, m: 1, r: 2 }]).unwrap();
        let res = gen_algebra(&spec, Mode::AllowOracle, &o).unwrap();
        assert_eq!((res.value(), res.method), (Some(3), Method::Formula));
        let spec = AlgebraSpec::new(2, &[Part { n: 1, m: 1, r: 5 }, Part { n: 1, m: 2, r: 2 }]).unwrap();
        assert_eq!(gen_algebra(&spec, Mode::AllowOracle, &o).unwrap().value(), Some(3));
        let spec = AlgebraSpec::new(2, &[Part { n: 1, m: 1, r: 1 }]).unwrap();
        assert_eq!(gen_algebra(&spec, Mode::BoundsOnly, &o).unwrap().value(), Some(0));
    }

    #[test]
    fn bracket_parts_combine_by_interval_max() {
        let o = Oracle::default();
        // M_2(F_2)^16 is a bracket {2,3} without the oracle
        let spec = AlgebraSpec::new(2, &[Part { n: 1, m: 2, r: 16 }, Part { n: 1, m: 1, r: 8 }]).unwrap();
        let res = gen_algebra(&spec, Mode::BoundsOnly, &o).unwrap();
        assert_eq!((res.value(), res.method), (Some(3), Method::Formula));
        let spec = AlgebraSpec::new(2, &[Part { n: 1, m: 2, r: 16 }, Part { n: 1, m: 1, r: 4 }]).unwrap();
        let res = gen_algebra(&spec, Mode::BoundsOnly, &o).unwrap();
        assert_eq!((res.lo, res.hi, res.status()), (2, 3, "bracket"));
    }

    #[test]
    fn spec_parsing() {
        let spec = AlgebraSpec::from_json(
            r#"{"q": 4, "parts": [{"n": 3, "m": 1, "r": 5}, {"n": 2, "m": 2, "r": 7}, {"n": 3, "m": 1, "r": 1}]}"#,
        )
        .unwrap();
        assert_eq!(spec.q().value(), 4);
        assert_eq!(spec.parts(), &[Part { n: 2, m: 2, r: 7 }, Part { n: 3, m: 1, r: 6 }]);
        for bad in [
            r#"{"q": 6, "parts": [{"n": 1, "m": 1, "r": 1}]}"#,
            r#"{"q": 2, "parts": []}"#,
            r#"{"q": 2, "parts": [{"n": 0, "m": 1, "r": 1}]}"#,
            r#"{"q": 2, "parts": [{"n": 1, "m": 1, "r": 1, "x": 2}]}"#,
            r#"{"q": 2"#,
        ] {
            assert!(AlgebraSpec::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn dimension_bound_examples() {
        let o = Oracle::default();
        let spec = AlgebraSpec::new(2, &[Part { n: 2, m: 1, r: 2 }]).unwrap();
        assert_eq!(etale_dimension_bound(&spec).unwrap(), 2);
        assert!(etale_dimension_bound_check(&spec, &o).unwrap());
        let spec = AlgebraSpec::new(4, &[Part { n: 2, m: 1, r: 1 }]).unwrap();
        assert_eq!(etale_dimension_bound(&spec).unwrap(), 1);
        assert!(etale_dimension_bound_check(&spec, &o).unwrap());
        for d in 1..50 {
            let spec = AlgebraSpec::new(3, &[Part { n: 1, m: 1, r: d }]).unwrap();
            let gen = gen_algebra(&spec, Mode::BoundsOnly, &o).unwrap().value().unwrap();
            assert_eq!(gen, etale_dimension_bound(&spec).unwrap());
        }
        let matrix = AlgebraSpec::new(2, &[Part { n: 1, m: 2, r: 1 }]).unwrap();
        assert!(etale_dimension_bound(&matrix).is_err());
    }

    #[test]
    fn interval_example() {
        let o = Oracle::default();
        let rep = intervals(pp(2), 1, 2, 2, Mode::AllowOracle, &o).unwrap();
        assert_eq!(rep.i0.first_last(), Some((3u32.into(), 16u32.into())));
        assert_eq!(rep.i1.first_last(), Some((1u32.into(), 2u32.into())));
        assert_eq!(rep.partition_law(), Some(true));
        let shifted_first_column = rep
            .size_bounds
            .iter()
            .find(|b| b.kind == SizeBoundKind::FirstColumn && b.shifted)
            .unwrap();
        assert_eq!(shifted_first_column.value, 1u32.into());
        assert_eq!(shifted_first_column.holds, Some(true));
    }

    #[test]
    fn fields_have_empty_upper_sets() {
        let o = Oracle::default();
        for q in [2, 3, 4] {
            for g in 1..6 {
                let rep = intervals(pp(q), 1, 1, g, Mode::BoundsOnly, &o).unwrap();
                assert!(rep.i1.is_empty());
                assert_eq!(rep.partition_law(), Some(true));
            }
        }
        let rep = intervals(pp(2), 2, 1, 1, Mode::BoundsOnly, &o).unwrap();
        assert_eq!(rep.n_curr.source, NSource::Formula);
        assert_eq!(rep.n_curr.exact(), Some(&1u32.into()));
    }

    #[test]
    fn unresolved_endpoints_are_flagged() {
        let o = Oracle::default();
        let rep = intervals(pp(3), 1, 2, 3, Mode::BoundsOnly, &o).unwrap();
        assert!(!rep.n_exact());
        assert!(!rep.i0.hi_exact);
        assert_eq!(rep.partition_law(), None);
    }
}
