//! Explicit finite fields `F_{p^D} = F_p[x]/(f)`.
//!
//! Every field is built from a canonical modulus: the lexicographically least
//! monic irreducible polynomial of degree `D` over `F_p`, where coefficient
//! vectors are compared constant term first. A field `F_q` with `q = p^e`
//! sitting inside `F_{q^n}` is never given its own modulus; it is the fixed
//! field of `a -> a^q` inside the single field of absolute degree `e * n`.
//!
//! Elements are coefficient vectors in the power basis `1, x, ..., x^{D-1}`,
//! constant term first. Elements carry an `Arc` to their field and every
//! binary operation checks that both operands live in the same field.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use thiserror::Error;

/// Largest characteristic supported by the coefficient representation.
pub const MAX_CHARACTERISTIC: u64 = (1 << 31) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("characteristic {0} exceeds the supported maximum {MAX_CHARACTERISTIC}")]
    CharacteristicTooLarge(u64),
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("characteristic {actual} does not match q = {q}")]
    CharacteristicMismatch { q: u64, actual: u64 },
    #[error("inverse of zero")]
    DivisionByZero,
    #[error("expected {expected} coefficients, got {actual}")]
    WrongLength { expected: usize, actual: usize },
    #[error("coefficient {value} is not a residue modulo {p}")]
    CoefficientOutOfRange { value: u64, p: u64 },
    #[error("modulus is not a monic irreducible polynomial")]
    ReducibleModulus,
    #[error("field has absolute degree {actual}, expected {expected}")]
    DegreeMismatch { expected: u64, actual: u64 },
    #[error("enumerating {size} items exceeds the guard of {guard}")]
    Infeasible { size: String, guard: u64 },
}

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime divisors of `n` in ascending order.
pub fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A prime power `q = p^e`, the size of the base field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimePower {
    p: u64,
    e: u32,
    value: u64,
}

impl PrimePower {
    /// Factors `q` by trial division and checks that it is a prime power.
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if q < 2 {
            return Err(FieldError::NotPrimePower(q));
        }
        let primes = prime_divisors(q);
        if primes.len() != 1 {
            return Err(FieldError::NotPrimePower(q));
        }
        let p = primes[0];
        let mut e = 0u32;
        let mut rest = q;
        while rest > 1 {
            rest /= p;
            e += 1;
        }
        Ok(Self { p, e, value: q })
    }

    pub fn from_parts(p: u64, e: u32) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if e == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let value = p
            .checked_pow(e)
            .ok_or(FieldError::NotPrimePower(u64::MAX))?;
        Ok(Self { p, e, value })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn exponent(&self) -> u32 {
        self.e
    }

    pub fn value(&self) -> u64 {
        self.value
    }
}

impl fmt::Display for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// ---------------------------------------------------------------------------
// Dense polynomials over F_p, coefficient vectors constant term first. Only
// used for modulus search; field arithmetic has its own allocation-free path.

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a % p, p - 2, p)
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Remainder of `a` modulo a nonzero polynomial `f`.
fn poly_rem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let df = f.len() - 1;
    let lead_inv = inv_mod(f[df], p);
    while r.len() > df {
        let top = r.len() - 1;
        let c = r[top] * lead_inv % p;
        if c != 0 {
            let shift = top - df;
            for (i, &fi) in f.iter().enumerate() {
                r[shift + i] = (r[shift + i] + (p - c) * fi % p) % p;
            }
        }
        trim(&mut r);
    }
    r
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    poly_rem(&prod, f, p)
}

fn poly_powmod(a: &[u64], mut exp: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = poly_rem(&[1], f, p);
    let mut base = poly_rem(a, f, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = poly_mulmod(&acc, &base, f, p);
        }
        base = poly_mulmod(&base, &base, f, p);
        exp >>= 1;
    }
    acc
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, slot) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *slot = (x + p - y) % p;
    }
    trim(&mut out);
    out
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

/// Irreducibility certificate for a monic `f` of degree `D >= 1` over `F_p`:
/// `x^{p^D} = x (mod f)` and `gcd(x^{p^{D/l}} - x, f) = 1` for every prime `l | D`.
pub fn is_irreducible(p: u64, f: &[u64]) -> bool {
    let Some(&lead) = f.last() else {
        return false;
    };
    if lead != 1 || f.len() < 2 || f.iter().any(|&c| c >= p) {
        return false;
    }
    let d = f.len() - 1;
    let x = poly_rem(&[0, 1], f, p);
    // frob[i] = x^{p^{i+1}} mod f
    let mut frob = Vec::with_capacity(d);
    let mut h = x.clone();
    for _ in 0..d {
        h = poly_powmod(&h, p, f, p);
        frob.push(h.clone());
    }
    if frob[d - 1] != x {
        return false;
    }
    prime_divisors(d as u64).into_iter().all(|l| {
        let k = d / l as usize;
        let diff = poly_sub(&frob[k - 1], &x, p);
        poly_gcd(&diff, f, p).len() == 1
    })
}

/// The lexicographically least monic irreducible polynomial of degree `degree`
/// over `F_p`, comparing coefficient vectors constant term first.
pub fn canonical_modulus(p: u64, degree: usize) -> Result<Vec<u64>, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if degree == 0 {
        return Err(FieldError::ZeroDegree);
    }
    let mut tail = vec![0u64; degree];
    // beyond degree 1 a zero constant term means x divides f
    if degree > 1 {
        tail[0] = 1;
    }
    loop {
        let mut f = tail.clone();
        f.push(1);
        if is_irreducible(p, &f) {
            return Ok(f);
        }
        // The last coefficient varies fastest; irreducibles of every degree
        // exist, so the odometer never wraps.
        let mut i = degree;
        loop {
            i -= 1;
            tail[i] += 1;
            if tail[i] < p {
                break;
            }
            tail[i] = 0;
        }
    }
}

// ---------------------------------------------------------------------------

/// Serializable description of a field: `{"p": 2, "D": 2, "modulus": [1,1,1]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldDescriptor {
    pub p: u64,
    #[serde(rename = "D")]
    pub degree: usize,
    pub modulus: Vec<u32>,
}

/// The field `F_p[x]/(f)` for a monic irreducible `f` of degree `D`.
pub struct ExtensionField {
    p: u64,
    degree: usize,
    modulus: Vec<u32>,
    /// `fold[j] = x^{D+j} mod f` for `j < D - 1`.
    fold: Vec<Vec<u32>>,
    /// Whether `2D (p-1)^2` fits in a `u64`, so products can be accumulated
    /// before a single reduction.
    lazy_reduce: bool,
}

impl fmt::Debug for ExtensionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}{:?}", self.p, self.degree, self.modulus)
    }
}

impl PartialEq for ExtensionField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}

impl Eq for ExtensionField {}

/// Builds `F_{p^D}` with its canonical modulus.
pub fn make_field(p: u64, degree: usize) -> Result<Arc<ExtensionField>, FieldError> {
    ExtensionField::new(p, degree)
}

impl ExtensionField {
    pub fn new(p: u64, degree: usize) -> Result<Arc<Self>, FieldError> {
        if p > MAX_CHARACTERISTIC {
            return Err(FieldError::CharacteristicTooLarge(p));
        }
        let modulus = canonical_modulus(p, degree)?;
        Ok(Arc::new(Self::from_checked_modulus(p, &modulus)))
    }

    /// Builds a field from an explicit modulus, which must pass the
    /// irreducibility certificate.
    pub fn with_modulus(p: u64, modulus: &[u64]) -> Result<Arc<Self>, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if p > MAX_CHARACTERISTIC {
            return Err(FieldError::CharacteristicTooLarge(p));
        }
        if !is_irreducible(p, modulus) {
            return Err(FieldError::ReducibleModulus);
        }
        Ok(Arc::new(Self::from_checked_modulus(p, modulus)))
    }

    fn from_checked_modulus(p: u64, modulus: &[u64]) -> Self {
        let degree = modulus.len() - 1;
        let mut fold = Vec::with_capacity(degree.saturating_sub(1));
        // x^D = -(f_0 + f_1 x + ... + f_{D-1} x^{D-1})
        let mut cur: Vec<u64> = modulus[..degree].iter().map(|&c| (p - c) % p).collect();
        for _ in 0..degree.saturating_sub(1) {
            fold.push(cur.iter().map(|&c| c as u32).collect());
            // multiply by x and reduce
            let top = cur[degree - 1];
            for i in (1..degree).rev() {
                cur[i] = cur[i - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for (i, c) in cur.iter_mut().enumerate() {
                    *c = (*c + top * ((p - modulus[i]) % p)) % p;
                }
            }
        }
        let bound = (p as u128 - 1).pow(2) * (2 * degree as u128);
        Self {
            p,
            degree,
            modulus: modulus.iter().map(|&c| c as u32).collect(),
            fold,
            lazy_reduce: bound < u64::MAX as u128,
        }
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    /// Absolute degree `D` over the prime field.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Monic modulus, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn order(&self) -> BigUint {
        BigUint::from(self.p).pow(self.degree as u32)
    }

    /// `p^D` when it fits in a `u64`.
    pub fn order_u64(&self) -> Option<u64> {
        self.p.checked_pow(u32::try_from(self.degree).ok()?)
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            p: self.p,
            degree: self.degree,
            modulus: self.modulus.clone(),
        }
    }

    pub fn zero(self: &Arc<Self>) -> FieldElement {
        FieldElement {
            field: Arc::clone(self),
            coeffs: vec![0; self.degree],
        }
    }

    pub fn one(self: &Arc<Self>) -> FieldElement {
        self.from_prime(1)
    }

    /// The residue class of `x`, a root of the modulus.
    pub fn x(self: &Arc<Self>) -> FieldElement {
        if self.degree == 1 {
            // x = -f_0 modulo a linear modulus
            return self.from_prime((self.p - self.modulus[0] as u64) % self.p);
        }
        let mut coeffs = vec![0; self.degree];
        coeffs[1] = 1;
        FieldElement {
            field: Arc::clone(self),
            coeffs,
        }
    }

    /// Embeds `c mod p` from the prime field.
    pub fn from_prime(self: &Arc<Self>, c: u64) -> FieldElement {
        let mut coeffs = vec![0; self.degree];
        coeffs[0] = (c % self.p) as u32;
        FieldElement {
            field: Arc::clone(self),
            coeffs,
        }
    }

    /// Element from an explicit coefficient vector (constant term first).
    pub fn element(self: &Arc<Self>, coeffs: &[u64]) -> Result<FieldElement, FieldError> {
        if coeffs.len() != self.degree {
            return Err(FieldError::WrongLength {
                expected: self.degree,
                actual: coeffs.len(),
            });
        }
        if let Some(&bad) = coeffs.iter().find(|&&c| c >= self.p) {
            return Err(FieldError::CoefficientOutOfRange { value: bad, p: self.p });
        }
        Ok(FieldElement {
            field: Arc::clone(self),
            coeffs: coeffs.iter().map(|&c| c as u32).collect(),
        })
    }

    /// Position of `coeffs` in lexicographic order: the constant term is the
    /// most significant base-`p` digit.
    pub fn index_of_coeffs(&self, coeffs: &[u32]) -> u64 {
        coeffs
            .iter()
            .fold(0u64, |acc, &c| acc * self.p + c as u64)
    }

    pub fn decode_index_into(&self, mut index: u64, out: &mut [u32]) {
        for slot in out.iter_mut().rev() {
            *slot = (index % self.p) as u32;
            index /= self.p;
        }
    }

    /// Inverse of [`FieldElement::index`]; `index` must be below `p^D`.
    pub fn from_index(self: &Arc<Self>, index: u64) -> FieldElement {
        let mut coeffs = vec![0; self.degree];
        self.decode_index_into(index, &mut coeffs);
        FieldElement {
            field: Arc::clone(self),
            coeffs,
        }
    }

    /// Every element exactly once, in lexicographic coefficient order.
    pub fn elements(
        self: &Arc<Self>,
        guard: u64,
    ) -> Result<impl Iterator<Item = FieldElement> + '_, FieldError> {
        let size = self
            .order_u64()
            .filter(|&s| s <= guard)
            .ok_or_else(|| FieldError::Infeasible {
                size: self.order().to_string(),
                guard,
            })?;
        Ok((0..size).map(move |i| self.from_index(i)))
    }

    // -- coefficient-level arithmetic, used by the matrix and oracle code --

    pub(crate) fn add_assign_coeffs(&self, acc: &mut [u32], b: &[u32]) {
        let p = self.p as u32;
        for (x, &y) in acc.iter_mut().zip(b) {
            let s = *x + y;
            *x = if s >= p { s - p } else { s };
        }
    }

    pub(crate) fn sub_assign_coeffs(&self, acc: &mut [u32], b: &[u32]) {
        let p = self.p as u32;
        for (x, &y) in acc.iter_mut().zip(b) {
            *x = if *x >= y { *x - y } else { *x + p - y };
        }
    }

    pub(crate) fn scale_assign_coeffs(&self, acc: &mut [u32], c: u32) {
        for x in acc.iter_mut() {
            *x = (*x as u64 * c as u64 % self.p) as u32;
        }
    }

    /// `out = a * b mod f`.
    pub(crate) fn mul_coeffs(&self, a: &[u32], b: &[u32], out: &mut [u32]) {
        let d = self.degree;
        let p = self.p;
        if d == 1 {
            out[0] = (a[0] as u64 * b[0] as u64 % p) as u32;
            return;
        }
        let mut prod = [0u64; 64];
        let mut heap;
        let prod: &mut [u64] = if 2 * d - 1 <= 64 {
            &mut prod[..2 * d - 1]
        } else {
            heap = vec![0u64; 2 * d - 1];
            &mut heap
        };
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                let t = ai as u64 * bj as u64;
                prod[i + j] = if self.lazy_reduce {
                    prod[i + j] + t
                } else {
                    (prod[i + j] + t) % p
                };
            }
        }
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = 0;
            let mut acc = prod[k] % p;
            for (j, row) in self.fold.iter().enumerate() {
                let hi = prod[d + j] % p;
                if hi != 0 {
                    acc = (acc + hi * row[k] as u64) % p;
                }
            }
            *slot = acc as u32;
        }
    }
}

// ---------------------------------------------------------------------------

/// An element of an [`ExtensionField`].
#[derive(Clone)]
pub struct FieldElement {
    field: Arc<ExtensionField>,
    coeffs: Vec<u32>,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && same_field(&self.field, &other.field)
    }
}

impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}

pub(crate) fn same_field(a: &Arc<ExtensionField>, b: &Arc<ExtensionField>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl FieldElement {
    pub fn field(&self) -> &Arc<ExtensionField> {
        &self.field
    }

    /// Coefficients in the power basis, constant term first.
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    /// Lexicographic position of this element, see [`ExtensionField::elements`].
    pub fn index(&self) -> u64 {
        self.field.index_of_coeffs(&self.coeffs)
    }

    fn check(&self, other: &Self) -> Result<(), FieldError> {
        if same_field(&self.field, &other.field) {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        let mut out = self.clone();
        self.field.add_assign_coeffs(&mut out.coeffs, &other.coeffs);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        let mut out = self.clone();
        self.field.sub_assign_coeffs(&mut out.coeffs, &other.coeffs);
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.field.zero();
        self.field.sub_assign_coeffs(&mut out.coeffs, &self.coeffs);
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = vec![0; self.coeffs.len()];
        self.field.mul_coeffs(&self.coeffs, &other.coeffs, &mut out);
        Self {
            field: Arc::clone(&self.field),
            coeffs: out,
        }
    }

    /// Multiplicative inverse, `a^{p^D - 2}`.
    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let exp = self.field.order() - 2u32;
        Ok(self.pow(&exp))
    }

    /// `a^k` by square-and-multiply; `0^0 = 1`.
    pub fn pow(&self, exp: &BigUint) -> Self {
        let mut acc = self.field.one();
        if exp.is_zero() {
            return acc;
        }
        let bits = exp.bits();
        for i in (0..bits).rev() {
            acc = acc.mul_unchecked(&acc);
            if exp.bit(i) {
                acc = acc.mul_unchecked(self);
            }
        }
        acc
    }

    pub fn pow_u64(&self, mut exp: u64) -> Self {
        let mut acc = self.field.one();
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }

    /// `a^{p^k}`, the `k`-th power of the absolute Frobenius.
    pub fn frobenius(&self, k: u64) -> Self {
        // a^{p^D} = a, so only k mod D matters.
        let steps = k % self.field.degree as u64;
        let mut out = self.clone();
        for _ in 0..steps {
            out = out.pow_u64(self.field.p);
        }
        out
    }

    /// Least `d | n` with `a^{q^d} = a`: the degree of `a` over `F_q`, which is
    /// also the size of its orbit under `Gal(F_{q^n}/F_q)`.
    pub fn subfield_degree(&self, q: PrimePower, n: u64) -> Result<u64, FieldError> {
        if q.prime() != self.field.p {
            return Err(FieldError::CharacteristicMismatch {
                q: q.value(),
                actual: self.field.p,
            });
        }
        let expected = q.exponent() as u64 * n;
        if expected != self.field.degree as u64 {
            return Err(FieldError::DegreeMismatch {
                expected,
                actual: self.field.degree as u64,
            });
        }
        let mut b = self.clone();
        for d in 1..=n {
            b = b.frobenius(q.exponent() as u64);
            if b == *self {
                return Ok(d);
            }
        }
        unreachable!("the q^n-power Frobenius is the identity")
    }

    /// Embeds `n` (mod p) into the field and multiplies.
    pub fn scale_prime(&self, c: u64) -> Self {
        let mut out = self.clone();
        self.field
            .scale_assign_coeffs(&mut out.coeffs, (c % self.field.p) as u32);
        out
    }

    /// The value as a machine integer when it lies in the prime field.
    pub fn as_prime(&self) -> Option<u64> {
        self.coeffs[1..]
            .iter()
            .all(|&c| c == 0)
            .then(|| self.coeffs[0] as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force irreducibility: no monic factor of degree 1..=D/2.
    fn irreducible_by_trial(p: u64, f: &[u64]) -> bool {
        let d = f.len() - 1;
        for k in 1..=d / 2 {
            let count = p.pow(k as u32);
            for idx in 0..count {
                let mut g = Vec::with_capacity(k + 1);
                let mut t = idx;
                for _ in 0..k {
                    g.push(t % p);
                    t /= p;
                }
                g.push(1);
                if poly_rem(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn prime_power_parsing() {
        let q = PrimePower::new(9).unwrap();
        assert_eq!((q.prime(), q.exponent(), q.value()), (3, 2, 9));
        assert_eq!(PrimePower::new(12), Err(FieldError::NotPrimePower(12)));
        assert_eq!(PrimePower::new(1), Err(FieldError::NotPrimePower(1)));
        assert_eq!(PrimePower::new(0), Err(FieldError::NotPrimePower(0)));
        assert_eq!(PrimePower::from_parts(4, 1), Err(FieldError::NotPrime(4)));
        assert_eq!(PrimePower::from_parts(2, 3).unwrap().value(), 8);
    }

    #[test]
    fn make_field_rejects_bad_input() {
        assert_eq!(make_field(4, 2).unwrap_err(), FieldError::NotPrime(4));
        assert_eq!(make_field(1, 2).unwrap_err(), FieldError::NotPrime(1));
        assert_eq!(make_field(2, 0).unwrap_err(), FieldError::ZeroDegree);
    }

    #[test]
    fn canonical_moduli_small_cases() {
        assert_eq!(make_field(2, 1).unwrap().modulus(), &[0, 1]);
        assert_eq!(make_field(2, 2).unwrap().modulus(), &[1, 1, 1]);
        assert_eq!(make_field(3, 2).unwrap().modulus(), &[1, 0, 1]);
    }

    #[test]
    fn canonical_modulus_is_least_by_enumeration() {
        // Independent route: enumerate monic polynomials in lexicographic
        // order (constant first) and take the first that has no factor.
        for &(p, d) in &[(2u64, 2usize), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2), (7, 2), (2, 6)] {
            let count = p.pow(d as u32);
            let mut first = None;
            for idx in 0..count {
                let mut tail = vec![0u64; d];
                let mut t = idx;
                for slot in tail.iter_mut().rev() {
                    *slot = t % p;
                    t /= p;
                }
                tail.push(1);
                if irreducible_by_trial(p, &tail) {
                    first = Some(tail);
                    break;
                }
            }
            let field = make_field(p, d).unwrap();
            let got: Vec<u64> = field.modulus().iter().map(|&c| c as u64).collect();
            assert_eq!(Some(got), first, "p={p} D={d}");
        }
    }

    #[test]
    fn certificate_agrees_with_trial_division() {
        for &(p, d) in &[(2u64, 4usize), (3, 3), (2, 6)] {
            for idx in 0..p.pow(d as u32) {
                let mut f: Vec<u64> = (0..d).map(|i| idx / p.pow(i as u32) % p).collect();
                f.push(1);
                assert_eq!(is_irreducible(p, &f), irreducible_by_trial(p, &f), "{f:?}");
            }
        }
    }

    #[test]
    fn make_field_is_deterministic() {
        let a = make_field(3, 5).unwrap();
        let b = make_field(3, 5).unwrap();
        assert_eq!(a.modulus(), b.modulus());
        assert!(is_irreducible(
            3,
            &a.modulus().iter().map(|&c| c as u64).collect::<Vec<_>>()
        ));
    }

    #[test]
    fn f4_multiplication_and_frobenius() {
        let f4 = make_field(2, 2).unwrap();
        let x = f4.x();
        let x_plus_1 = f4.element(&[1, 1]).unwrap();
        assert_eq!(x.mul(&x).unwrap(), x_plus_1);
        assert_eq!(x.frobenius(1), x_plus_1);
        assert_eq!(x.frobenius(0), x);
    }

    #[test]
    fn inverses_in_f9() {
        let f9 = make_field(3, 2).unwrap();
        for a in f9.elements(100).unwrap().filter(|a| !a.is_zero()) {
            assert!(a.mul(&a.inv().unwrap()).unwrap().is_one());
        }
        assert_eq!(f9.zero().inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn frobenius_fixes_everything_after_full_orbit() {
        for &(p, d) in &[(2u64, 3usize), (3, 2), (5, 2), (2, 5)] {
            let field = make_field(p, d).unwrap();
            let order = field.order();
            for a in field.elements(1000).unwrap() {
                assert_eq!(a.pow(&order), a);
                assert_eq!(a.frobenius(d as u64), a);
            }
        }
    }

    #[test]
    fn mixing_fields_is_an_error() {
        let f4 = make_field(2, 2).unwrap();
        let f8 = make_field(2, 3).unwrap();
        assert_eq!(f4.one().add(&f8.one()), Err(FieldError::FieldMismatch));
        assert_eq!(f4.one().mul(&f8.one()), Err(FieldError::FieldMismatch));
    }

    #[test]
    fn subfield_degree_examples() {
        let q2 = PrimePower::new(2).unwrap();
        let f4 = make_field(2, 2).unwrap();
        assert_eq!(f4.zero().subfield_degree(q2, 2), Ok(1));
        assert_eq!(f4.x().subfield_degree(q2, 2), Ok(2));
        assert_eq!(
            f4.x().subfield_degree(q2, 3),
            Err(FieldError::DegreeMismatch { expected: 3, actual: 2 })
        );

        // F_64 over F_2: elements of F_4 (fixed by a -> a^4) but not of F_2.
        let f64_ = make_field(2, 6).unwrap();
        let mut seen = 0;
        for a in f64_.elements(64).unwrap() {
            let in_f4 = a.frobenius(2) == a;
            let in_f2 = a.frobenius(1) == a;
            if in_f4 && !in_f2 {
                assert_eq!(a.subfield_degree(q2, 6), Ok(2));
                seen += 1;
            }
        }
        assert_eq!(seen, 2);

        // q = 4 inside F_{4^3} = F_64
        let q4 = PrimePower::new(4).unwrap();
        let x = f64_.x();
        assert_eq!(x.subfield_degree(q4, 3), Ok(3));
        assert_eq!(f64_.one().subfield_degree(q4, 3), Ok(1));
    }

    #[test]
    fn subfield_degrees_partition_the_field() {
        // Sum over d | n of #{a : degree d} = q^n, and each degree divides n.
        let q3 = PrimePower::new(3).unwrap();
        let field = make_field(3, 4).unwrap();
        let mut counts = [0u64; 5];
        for a in field.elements(100).unwrap() {
            let d = a.subfield_degree(q3, 4).unwrap();
            assert_eq!(4 % d, 0);
            counts[d as usize] += 1;
        }
        assert_eq!(counts.iter().sum::<u64>(), 81);
        assert_eq!(counts[1], 3);
        assert_eq!(counts[2], 6);
        assert_eq!(counts[4], 72);
    }

    #[test]
    fn enumeration_order_and_guard() {
        let f2 = make_field(2, 1).unwrap();
        let els: Vec<_> = f2.elements(10).unwrap().map(|a| a.to_string()).collect();
        assert_eq!(els, ["[0]", "[1]"]);
        let f4 = make_field(2, 2).unwrap();
        let els: Vec<_> = f4.elements(10).unwrap().collect();
        assert_eq!(els.len(), 4);
        assert!(els[0].is_zero());
        assert_eq!(els[3], f4.element(&[1, 1]).unwrap());
        assert_eq!(make_field(3, 2).unwrap().elements(9).unwrap().count(), 9);
        assert!(matches!(
            make_field(3, 2).unwrap().elements(8).err(),
            Some(FieldError::Infeasible { .. })
        ));
    }

    #[test]
    fn index_round_trip() {
        let f = make_field(5, 3).unwrap();
        for i in [0u64, 1, 17, 124] {
            assert_eq!(f.from_index(i).index(), i);
        }
    }

    #[test]
    fn descriptor_serialization() {
        let f4 = make_field(2, 2).unwrap();
        let json = serde_json::to_string(&f4.descriptor()).unwrap();
        assert_eq!(json, r#"{"p":2,"D":2,"modulus":[1,1,1]}"#);
        let x2_1 = make_field(3, 2).unwrap().element(&[1, 0]).unwrap();
        assert_eq!(serde_json::to_string(&x2_1).unwrap(), "[1,0]");
    }

    #[test]
    fn large_degree_arithmetic_is_allowed() {
        // p^D beyond 2^63: enumeration is refused, arithmetic still works.
        let field = make_field(2, 70).unwrap();
        assert!(field.order_u64().is_none());
        assert!(field.elements(u64::MAX).is_err());
        let x = field.x();
        assert_eq!(x.frobenius(70), x);
        assert!(x.mul(&x.inv().unwrap()).unwrap().is_one());
    }
}
