//! Matrices over `F_{q^n}`, the generation test for `M_m(F_{q^n})` as an
//! `F_q`-algebra, the explicit generating pairs, and the automorphism group
//! `G(q,n,m) = Gal(F_{q^n}/F_q) ⋉ PGL_m(F_{q^n})`.
//!
//! All linear algebra that decides generation happens over the prime field:
//! a matrix is a vector of `e * n * m^2` coordinates in `F_p`, and the
//! subalgebra generated over `F_q` is the `F_p`-span of all words in the tuple
//! entries and `w * I`, where `w` generates `F_q` over `F_p`.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use serde::ser::{SerializeSeq, SerializeStruct, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::counting::{group_order_c, CountError};
use crate::field::{same_field, ExtensionField, FieldElement, FieldError, PrimePower};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error("matrix shapes or fields do not match")]
    ShapeMismatch,
    #[error("expected {expected} entries, got {actual}")]
    WrongCount { expected: usize, actual: usize },
    #[error("n and m must be at least 1")]
    EmptyShape,
    #[error("the pair construction needs m >= 2")]
    NeedsNoncommutative,
    #[error("alpha {0} is zero")]
    ZeroAlpha(usize),
    #[error("u does not generate F_{{q^n}} over F_q")]
    NotAGenerator,
    #[error("group of order {size} exceeds the guard of {guard}")]
    Infeasible { size: String, guard: u64 },
}

/// Row-reduced basis of a subspace of `F_p^len`.
pub(crate) struct FpBasis {
    p: u64,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
    scratch: Vec<u32>,
}

impl FpBasis {
    pub(crate) fn new(p: u64, len: usize) -> Self {
        Self {
            p,
            rows: Vec::new(),
            pivots: Vec::new(),
            scratch: vec![0; len],
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v` to the span; returns whether the dimension grew.
    pub(crate) fn insert(&mut self, v: &[u32]) -> bool {
        let p = self.p;
        self.scratch.copy_from_slice(v);
        for (row, &pivot) in self.rows.iter().zip(&self.pivots) {
            let c = self.scratch[pivot] as u64;
            if c == 0 {
                continue;
            }
            let neg = p - c;
            for (x, &r) in self.scratch[pivot..].iter_mut().zip(&row[pivot..]) {
                *x = ((*x as u64 + neg * r as u64) % p) as u32;
            }
        }
        let Some(pivot) = self.scratch.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = inverse_mod_prime(self.scratch[pivot] as u64, p);
        let row: Vec<u32> = self
            .scratch
            .iter()
            .map(|&x| (x as u64 * inv % p) as u32)
            .collect();
        self.rows.push(row);
        self.pivots.push(pivot);
        true
    }
}

fn inverse_mod_prime(a: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    let mut base = a % p;
    let mut exp = p - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

// ---------------------------------------------------------------------------

/// An `m x m` matrix over an explicit field, stored as `m^2` coefficient
/// vectors in row-major order.
#[derive(Clone)]
pub struct Matrix {
    field: Arc<ExtensionField>,
    dim: usize,
    data: Vec<u32>,
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.data == other.data && same_field(&self.field, &other.field)
    }
}

impl Eq for Matrix {}

impl Hash for Matrix {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.dim.hash(state);
        self.data.hash(state);
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.dim {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.dim {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.entry(r, c))?;
            }
        }
        write!(f, "]")
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dim * self.dim))?;
        for chunk in self.data.chunks(self.field.degree()) {
            seq.serialize_element(chunk)?;
        }
        seq.end()
    }
}

impl Matrix {
    pub fn zero(field: &Arc<ExtensionField>, dim: usize) -> Self {
        Self {
            field: Arc::clone(field),
            dim,
            data: vec![0; dim * dim * field.degree()],
        }
    }

    pub fn identity(field: &Arc<ExtensionField>, dim: usize) -> Self {
        let mut out = Self::zero(field, dim);
        for i in 0..dim {
            let at = out.offset(i, i);
            out.data[at] = 1;
        }
        out
    }

    /// `E_{row,col}` with 0-based indices.
    pub fn elementary(field: &Arc<ExtensionField>, dim: usize, row: usize, col: usize) -> Self {
        let mut out = Self::zero(field, dim);
        let at = out.offset(row, col);
        out.data[at] = 1;
        out
    }

    /// Builds a matrix from `dim^2` entries in row-major order.
    pub fn from_entries(
        field: &Arc<ExtensionField>,
        dim: usize,
        entries: &[FieldElement],
    ) -> Result<Self, MatrixError> {
        if entries.len() != dim * dim {
            return Err(MatrixError::WrongCount {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        let mut out = Self::zero(field, dim);
        for (k, e) in entries.iter().enumerate() {
            out.set_entry(k / dim, k % dim, e)?;
        }
        Ok(out)
    }

    /// Builds a matrix from its `F_p` coordinate vector.
    pub(crate) fn from_coords(field: &Arc<ExtensionField>, dim: usize, data: Vec<u32>) -> Self {
        debug_assert_eq!(data.len(), dim * dim * field.degree());
        Self {
            field: Arc::clone(field),
            dim,
            data,
        }
    }

    fn offset(&self, row: usize, col: usize) -> usize {
        (row * self.dim + col) * self.field.degree()
    }

    fn slot(&self, row: usize, col: usize) -> &[u32] {
        let at = self.offset(row, col);
        &self.data[at..at + self.field.degree()]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> &Arc<ExtensionField> {
        &self.field
    }

    /// Coordinates over the prime field: entries row-major, each entry's
    /// coefficients constant term first.
    pub fn coords(&self) -> &[u32] {
        &self.data
    }

    pub fn entry(&self, row: usize, col: usize) -> FieldElement {
        let coeffs: Vec<u64> = self.slot(row, col).iter().map(|&c| c as u64).collect();
        self.field
            .element(&coeffs)
            .expect("stored coefficients are reduced")
    }

    pub fn set_entry(&mut self, row: usize, col: usize, value: &FieldElement) -> Result<(), MatrixError> {
        if !same_field(&self.field, value.field()) {
            return Err(FieldError::FieldMismatch.into());
        }
        let at = self.offset(row, col);
        let d = self.field.degree();
        self.data[at..at + d].copy_from_slice(value.coeffs());
        Ok(())
    }

    pub fn entries(&self) -> Vec<FieldElement> {
        (0..self.dim * self.dim)
            .map(|k| self.entry(k / self.dim, k % self.dim))
            .collect()
    }

    fn check(&self, other: &Self) -> Result<(), MatrixError> {
        if self.dim != other.dim || !same_field(&self.field, &other.field) {
            return Err(MatrixError::ShapeMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        self.check(other)?;
        let mut out = self.clone();
        self.field.add_assign_coeffs(&mut out.data, &other.data);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        self.check(other)?;
        let mut out = self.clone();
        self.field.sub_assign_coeffs(&mut out.data, &other.data);
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let d = self.field.degree();
        let m = self.dim;
        let mut out = Self::zero(&self.field, m);
        let mut tmp = vec![0u32; d];
        for i in 0..m {
            for k in 0..m {
                let a = self.slot(i, k);
                if a.iter().all(|&c| c == 0) {
                    continue;
                }
                for j in 0..m {
                    let b = other.slot(k, j);
                    if b.iter().all(|&c| c == 0) {
                        continue;
                    }
                    self.field.mul_coeffs(a, b, &mut tmp);
                    let at = out.offset(i, j);
                    self.field.add_assign_coeffs(&mut out.data[at..at + d], &tmp);
                }
            }
        }
        out
    }

    /// Multiplies every entry by `c`.
    pub fn scale(&self, c: &FieldElement) -> Result<Self, MatrixError> {
        if !same_field(&self.field, c.field()) {
            return Err(FieldError::FieldMismatch.into());
        }
        let d = self.field.degree();
        let mut out = self.clone();
        let mut tmp = vec![0u32; d];
        for chunk in out.data.chunks_mut(d) {
            self.field.mul_coeffs(chunk, c.coeffs(), &mut tmp);
            chunk.copy_from_slice(&tmp);
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&c| c == 0)
    }

    /// Applies `a -> a^{p^k}` to every entry.
    pub fn frobenius(&self, k: u64) -> Self {
        if k.is_multiple_of(self.field.degree() as u64) {
            return self.clone();
        }
        let mut out = self.clone();
        for r in 0..self.dim {
            for c in 0..self.dim {
                let v = self.entry(r, c).frobenius(k);
                out.set_entry(r, c, &v).expect("same field");
            }
        }
        out
    }

    /// Gauss-Jordan inverse, `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let m = self.dim;
        let mut a: Vec<Vec<FieldElement>> = (0..m)
            .map(|r| (0..m).map(|c| self.entry(r, c)).collect())
            .collect();
        let mut inv: Vec<Vec<FieldElement>> = (0..m)
            .map(|r| {
                (0..m)
                    .map(|c| if r == c { self.field.one() } else { self.field.zero() })
                    .collect()
            })
            .collect();
        for col in 0..m {
            let pivot = (col..m).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let scale = a[col][col].inv().ok()?;
            for c in 0..m {
                a[col][c] = a[col][c].mul(&scale).ok()?;
                inv[col][c] = inv[col][c].mul(&scale).ok()?;
            }
            for r in 0..m {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let factor = a[r][col].clone();
                for c in 0..m {
                    let t = factor.mul(&a[col][c]).ok()?;
                    a[r][c] = a[r][c].sub(&t).ok()?;
                    let t = factor.mul(&inv[col][c]).ok()?;
                    inv[r][c] = inv[r][c].sub(&t).ok()?;
                }
            }
        }
        let flat: Vec<FieldElement> = inv.into_iter().flatten().collect();
        Self::from_entries(&self.field, m, &flat).ok()
    }

    /// Scales so that the first nonzero entry in row-major order is 1:
    /// the canonical representative of the class modulo scalars.
    pub fn projective_normalize(&self) -> Self {
        let d = self.field.degree();
        let Some(first) = self.data.chunks(d).position(|c| c.iter().any(|&x| x != 0)) else {
            return self.clone();
        };
        let lead = self.entry(first / self.dim, first % self.dim);
        self.scale(&lead.inv().expect("nonzero"))
            .expect("same field")
    }
}

// ---------------------------------------------------------------------------

/// The data `(q, n, m)` fixing the algebra `M_m(F_{q^n})`, with the explicit
/// field `F_{p^{e n}}` and a generator `w` of `F_q` over `F_p`.
pub struct MatrixContext {
    q: PrimePower,
    n: u64,
    m: usize,
    field: Arc<ExtensionField>,
    base_generator: FieldElement,
}

impl fmt::Debug for MatrixContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M_{}(F_{}^{})", self.m, self.q, self.n)
    }
}

impl MatrixContext {
    pub fn new(q: PrimePower, n: u64, m: usize) -> Result<Arc<Self>, MatrixError> {
        if n == 0 || m == 0 {
            return Err(MatrixError::EmptyShape);
        }
        let degree = q.exponent() as usize * n as usize;
        let field = ExtensionField::new(q.prime(), degree)?;
        let base_generator = find_base_generator(&field, q, n);
        Ok(Arc::new(Self {
            q,
            n,
            m,
            field,
            base_generator,
        }))
    }

    pub fn q(&self) -> PrimePower {
        self.q
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn field(&self) -> &Arc<ExtensionField> {
        &self.field
    }

    /// The fixed generator `w` of `F_q` over `F_p`.
    pub fn base_generator(&self) -> &FieldElement {
        &self.base_generator
    }

    /// `e * n * m^2`, the `F_p`-dimension of the full matrix algebra.
    pub fn full_dimension(&self) -> usize {
        self.field.degree() * self.m * self.m
    }

    pub fn identity(&self) -> Matrix {
        Matrix::identity(&self.field, self.m)
    }

    pub fn zero(&self) -> Matrix {
        Matrix::zero(&self.field, self.m)
    }

    pub fn elementary(&self, row: usize, col: usize) -> Matrix {
        Matrix::elementary(&self.field, self.m, row, col)
    }

    pub fn scalar(&self, c: &FieldElement) -> Result<Matrix, MatrixError> {
        self.identity().scale(c)
    }

    /// The `q` elements of `F_q`, as `F_p`-combinations of `1, w, ..., w^{e-1}`.
    pub fn base_field_elements(&self) -> Vec<FieldElement> {
        let e = self.q.exponent() as usize;
        let p = self.q.prime();
        let powers: Vec<FieldElement> = (0..e).map(|i| self.base_generator.pow_u64(i as u64)).collect();
        (0..self.q.value())
            .map(|idx| {
                let mut acc = self.field.zero();
                let mut t = idx;
                for w in powers.iter().rev() {
                    let c = t % p;
                    t /= p;
                    acc = acc.add(&w.scale_prime(c)).expect("same field");
                }
                acc
            })
            .collect()
    }

    /// A generator of `F_{q^n}` over `F_q`: the class of `x` when the field
    /// is a proper extension of `F_q`, otherwise 1.
    pub fn default_generator(&self) -> FieldElement {
        if self.n == 1 {
            self.field.one()
        } else {
            self.field.x()
        }
    }

    pub fn tuple(self: &Arc<Self>, matrices: Vec<Matrix>) -> Result<MatrixTuple, MatrixError> {
        MatrixTuple::new(Arc::clone(self), matrices)
    }

    /// Number of matrices, `q^{n m^2}`, if it fits a `u64`.
    pub fn matrix_count(&self) -> Option<u64> {
        self.q.prime().checked_pow(self.full_dimension() as u32)
    }

    /// The `idx`-th `g`-tuple in lexicographic order of the concatenated
    /// coordinate vectors (first matrix most significant).
    pub fn tuple_from_index(self: &Arc<Self>, idx: u64, g: usize) -> MatrixTuple {
        let per = self.matrix_count().expect("enumerable context");
        let mut digits = vec![0u64; g];
        let mut t = idx;
        for slot in digits.iter_mut().rev() {
            *slot = t % per;
            t /= per;
        }
        let matrices = digits
            .into_iter()
            .map(|d| {
                let mut coords = vec![0u32; self.full_dimension()];
                self.field.decode_index_into(d, &mut coords);
                Matrix::from_coords(&self.field, self.m, coords)
            })
            .collect();
        MatrixTuple {
            ctx: Arc::clone(self),
            matrices,
        }
    }

    /// Uniformly random matrix.
    pub fn random_matrix<R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix {
        let p = self.q.prime();
        let data = (0..self.full_dimension())
            .map(|_| rng.gen_range(0..p) as u32)
            .collect();
        Matrix::from_coords(&self.field, self.m, data)
    }

    /// Uniformly random element of `F_{q^n}`.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        let p = self.q.prime();
        let coeffs: Vec<u64> = (0..self.field.degree()).map(|_| rng.gen_range(0..p)).collect();
        self.field.element(&coeffs).expect("residues")
    }
}

/// First trace value `Tr_{F_{q^n}/F_q}(a)`, scanning `a` lexicographically,
/// that has degree `e` over `F_p`.
fn find_base_generator(field: &Arc<ExtensionField>, q: PrimePower, n: u64) -> FieldElement {
    let e = q.exponent() as u64;
    if e == 1 {
        return field.one();
    }
    let mut idx = 1u64;
    loop {
        let a = field.from_index(idx);
        let mut trace = a.clone();
        let mut conj = a;
        for _ in 1..n {
            conj = conj.frobenius(e);
            trace = trace.add(&conj).expect("same field");
        }
        let mut b = trace.frobenius(1);
        let mut degree = 1;
        while b != trace {
            b = b.frobenius(1);
            degree += 1;
        }
        if degree == e {
            return trace;
        }
        idx += 1;
    }
}

// ---------------------------------------------------------------------------

/// A `g`-tuple of matrices in `M_m(F_{q^n})`. Equality is positional.
#[derive(Clone)]
pub struct MatrixTuple {
    ctx: Arc<MatrixContext>,
    matrices: Vec<Matrix>,
}

impl PartialEq for MatrixTuple {
    fn eq(&self, other: &Self) -> bool {
        self.matrices == other.matrices
    }
}

impl Eq for MatrixTuple {}

impl Hash for MatrixTuple {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.matrices.hash(state);
    }
}

impl fmt::Debug for MatrixTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.matrices).finish()
    }
}

impl Serialize for MatrixTuple {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("MatrixTuple", 4)?;
        s.serialize_field("q", &self.ctx.q.value())?;
        s.serialize_field("n", &self.ctx.n)?;
        s.serialize_field("m", &self.ctx.m)?;
        s.serialize_field("matrices", &self.matrices)?;
        s.end()
    }
}

impl MatrixTuple {
    pub fn new(ctx: Arc<MatrixContext>, matrices: Vec<Matrix>) -> Result<Self, MatrixError> {
        for a in &matrices {
            if a.dim != ctx.m || !same_field(&a.field, &ctx.field) {
                return Err(MatrixError::ShapeMismatch);
            }
        }
        Ok(Self { ctx, matrices })
    }

    pub fn context(&self) -> &Arc<MatrixContext> {
        &self.ctx
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }
}

/// `F_p`-dimension of the unital `F_q`-subalgebra generated by the tuple.
///
/// The span starts from `I`, `w I` and the tuple entries and is closed under
/// right multiplication by every generator (`w I` included) until no new
/// direction appears. That span contains every word in the generators and is
/// closed under products, so it is the generated subalgebra.
pub fn span_closure_dim(t: &MatrixTuple) -> usize {
    generated_subalgebra_dim(&t.ctx, &t.matrices)
}

pub(crate) fn generated_subalgebra_dim(ctx: &MatrixContext, matrices: &[Matrix]) -> usize {
    let full = ctx.full_dimension();
    let mut gens: Vec<Matrix> = Vec::with_capacity(matrices.len() + 1);
    if ctx.q.exponent() > 1 {
        gens.push(ctx.scalar(&ctx.base_generator).expect("same field"));
    }
    gens.extend(matrices.iter().cloned());

    let mut basis = FpBasis::new(ctx.q.prime(), full);
    let mut queue: Vec<Matrix> = Vec::new();
    let identity = ctx.identity();
    for v in std::iter::once(&identity).chain(gens.iter()) {
        if basis.insert(v.coords()) {
            queue.push(v.clone());
        }
    }
    while let Some(v) = queue.pop() {
        if basis.dim() == full {
            break;
        }
        for g in &gens {
            let prod = v.mul_unchecked(g);
            if basis.insert(prod.coords()) {
                queue.push(prod);
            }
        }
    }
    basis.dim()
}

/// Whether the tuple generates all of `M_m(F_{q^n})` as an `F_q`-algebra.
pub fn generates_full(t: &MatrixTuple) -> bool {
    span_closure_dim(t) == t.ctx.full_dimension()
}

/// `F_p`-dimension of the plain linear span of the tuple entries together
/// with the line `F_q * I` (no products).
pub fn linear_span_dim(t: &MatrixTuple) -> usize {
    let ctx = &t.ctx;
    let mut basis = FpBasis::new(ctx.q.prime(), ctx.full_dimension());
    let mut w_power = ctx.field.one();
    for _ in 0..ctx.q.exponent() {
        basis.insert(ctx.scalar(&w_power).expect("same field").coords());
        w_power = w_power.mul(&ctx.base_generator).expect("same field");
    }
    for a in &t.matrices {
        basis.insert(a.coords());
    }
    basis.dim()
}

/// The generating pair `A = sum alpha_i E_{i,i+1}`, `B = (beta_{ij})` with
/// `beta_{m,1}` overwritten so that `alpha_1 ... alpha_{m-1} beta_{m,1} = u`.
///
/// `betas` holds all `m^2` entries of `B` in row-major order; the entry at
/// `(m, 1)` is ignored.
pub fn construct_pair(
    ctx: &MatrixContext,
    alphas: &[FieldElement],
    betas: &[FieldElement],
    u: &FieldElement,
) -> Result<(Matrix, Matrix), MatrixError> {
    let m = ctx.m;
    if m < 2 {
        return Err(MatrixError::NeedsNoncommutative);
    }
    if alphas.len() != m - 1 {
        return Err(MatrixError::WrongCount {
            expected: m - 1,
            actual: alphas.len(),
        });
    }
    if u.is_zero() || u.subfield_degree(ctx.q, ctx.n)? != ctx.n {
        return Err(MatrixError::NotAGenerator);
    }
    let mut a = ctx.zero();
    let mut product = ctx.field.one();
    for (i, alpha) in alphas.iter().enumerate() {
        if alpha.is_zero() {
            return Err(MatrixError::ZeroAlpha(i + 1));
        }
        a.set_entry(i, i + 1, alpha)?;
        product = product.mul(alpha)?;
    }
    let mut b = Matrix::from_entries(&ctx.field, m, betas)?;
    let corner = u.mul(&product.inv()?)?;
    b.set_entry(m - 1, 0, &corner)?;
    Ok((a, b))
}

/// Draws nonzero `alpha`s and arbitrary `beta`s uniformly and builds the pair
/// with the context's default generator `u`.
pub fn random_pair<R: Rng + ?Sized>(
    ctx: &MatrixContext,
    rng: &mut R,
) -> Result<(Matrix, Matrix), MatrixError> {
    let m = ctx.m;
    let alphas: Vec<FieldElement> = (0..m.saturating_sub(1))
        .map(|_| loop {
            let a = ctx.random_element(rng);
            if !a.is_zero() {
                break a;
            }
        })
        .collect();
    let betas: Vec<FieldElement> = (0..m * m).map(|_| ctx.random_element(rng)).collect();
    construct_pair(ctx, &alphas, &betas, &ctx.default_generator())
}

/// [`random_pair`] driven by a ChaCha generator seeded with `seed`.
pub fn seeded_pair(ctx: &MatrixContext, seed: u64) -> Result<(Matrix, Matrix), MatrixError> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    random_pair(ctx, &mut rng)
}

/// `(A + gamma I, B)` for every `gamma` in `F_q`.
pub fn shifted_family(ctx: &MatrixContext, a: &Matrix, b: &Matrix) -> Vec<(Matrix, Matrix)> {
    ctx.base_field_elements()
        .iter()
        .map(|gamma| {
            let shift = ctx.scalar(gamma).expect("same field");
            (a.add(&shift).expect("same shape"), b.clone())
        })
        .collect()
}

/// The tuple `(E_{1,1}, E_{1,2}, E_{2,2})` in `M_2(F_q)`: trivial stabilizer,
/// yet it only generates the upper-triangular matrices.
pub fn triangular_triple(q: PrimePower) -> Result<MatrixTuple, MatrixError> {
    let ctx = MatrixContext::new(q, 1, 2)?;
    let matrices = vec![ctx.elementary(0, 0), ctx.elementary(0, 1), ctx.elementary(1, 1)];
    ctx.tuple(matrices)
}

// ---------------------------------------------------------------------------

/// `M -> P sigma^k(M) P^{-1}` where `sigma` is `a -> a^q`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Automorphism {
    frobenius_power: u64,
    projective: Matrix,
    projective_inv: Matrix,
}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(σ^{}, {:?})", self.frobenius_power, self.projective)
    }
}

impl Automorphism {
    /// Builds the automorphism from an invertible matrix, normalizing it to
    /// its canonical projective representative.
    pub fn new(ctx: &MatrixContext, frobenius_power: u64, matrix: &Matrix) -> Option<Self> {
        let projective = matrix.projective_normalize();
        let projective_inv = projective.inverse()?;
        Some(Self {
            frobenius_power: frobenius_power % ctx.n,
            projective,
            projective_inv,
        })
    }

    pub fn identity(ctx: &MatrixContext) -> Self {
        Self::new(ctx, 0, &ctx.identity()).expect("identity is invertible")
    }

    pub fn frobenius_power(&self) -> u64 {
        self.frobenius_power
    }

    pub fn projective_matrix(&self) -> &Matrix {
        &self.projective
    }

    pub fn is_identity(&self) -> bool {
        self.frobenius_power == 0 && self.projective == Matrix::identity(&self.projective.field, self.projective.dim)
    }

    pub fn apply(&self, ctx: &MatrixContext, a: &Matrix) -> Matrix {
        let twisted = a.frobenius(ctx.q.exponent() as u64 * self.frobenius_power);
        self.projective
            .mul_unchecked(&twisted)
            .mul_unchecked(&self.projective_inv)
    }

    pub fn inverse(&self, ctx: &MatrixContext) -> Self {
        let back = (ctx.n - self.frobenius_power) % ctx.n;
        let matrix = self
            .projective_inv
            .frobenius(ctx.q.exponent() as u64 * back);
        Self::new(ctx, back, &matrix).expect("invertible")
    }
}

/// Applies `phi` entrywise: Frobenius first, then conjugation.
pub fn apply_automorphism(phi: &Automorphism, t: &MatrixTuple) -> MatrixTuple {
    MatrixTuple {
        ctx: Arc::clone(&t.ctx),
        matrices: t.matrices.iter().map(|a| phi.apply(&t.ctx, a)).collect(),
    }
}

/// All `C` elements of `G(q,n,m)`: Frobenius powers `0..n` times canonical
/// `PGL_m` representatives. Fails when `C` exceeds `guard`.
pub fn enumerate_automorphisms(ctx: &MatrixContext, guard: u64) -> Result<Vec<Automorphism>, MatrixError> {
    let order = group_order_c::<BigUint>(ctx.q, ctx.n, ctx.m as u64)?;
    if order > BigUint::from(guard) {
        return Err(MatrixError::Infeasible {
            size: order.to_string(),
            guard,
        });
    }
    let field_size = ctx.field.order_u64().expect("guarded above");
    let m2 = ctx.m * ctx.m;
    let d = ctx.field.degree();
    let mut pgl = Vec::new();
    for lead in 0..m2 {
        // entries before `lead` are zero, `lead` is 1, the rest are free
        let free = (m2 - lead - 1) as u32;
        let count = field_size.pow(free);
        for idx in 0..count {
            let mut data = vec![0u32; m2 * d];
            data[lead * d] = 1;
            let mut t = idx;
            for slot in (lead + 1..m2).rev() {
                ctx.field
                    .decode_index_into(t % field_size, &mut data[slot * d..(slot + 1) * d]);
                t /= field_size;
            }
            let candidate = Matrix::from_coords(&ctx.field, ctx.m, data);
            if let Some(inv) = candidate.inverse() {
                pgl.push((candidate, inv));
            }
        }
    }
    let mut group = Vec::with_capacity(pgl.len() * ctx.n as usize);
    for k in 0..ctx.n {
        for (p, inv) in &pgl {
            group.push(Automorphism {
                frobenius_power: k,
                projective: p.clone(),
                projective_inv: inv.clone(),
            });
        }
    }
    if BigUint::from(group.len()) != order {
        return Err(CountError::Integrality(format!(
            "enumerated {} automorphisms, expected {order}",
            group.len()
        ))
        .into());
    }
    Ok(group)
}

/// Whether only the identity of `G(q,n,m)` fixes every entry of the tuple.
pub fn stabilizer_is_trivial(t: &MatrixTuple, guard: u64) -> Result<bool, MatrixError> {
    let group = enumerate_automorphisms(&t.ctx, guard)?;
    Ok(stabilizer_is_trivial_in(t, &group))
}

pub fn stabilizer_is_trivial_in(t: &MatrixTuple, group: &[Automorphism]) -> bool {
    group
        .iter()
        .filter(|phi| !phi.is_identity())
        .all(|phi| apply_automorphism(phi, t) != *t)
}

/// The orbit of a tuple under an explicitly enumerated group.
pub fn orbit(t: &MatrixTuple, group: &[Automorphism]) -> HashSet<MatrixTuple> {
    group.iter().map(|phi| apply_automorphism(phi, t)).collect()
}

#[cfg(test)]
mod tests {
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn ctx(q: u64, n: u64, m: usize) -> Arc<MatrixContext> {
        MatrixContext::new(PrimePower::new(q).unwrap(), n, m).unwrap()
    }

    /// Closure by the literal rule: span, then all pairwise products, until
    /// the dimension stops growing.
    fn pairwise_closure_dim(t: &MatrixTuple) -> usize {
        let c = t.context();
        let mut elems = vec![c.identity(), c.scalar(c.base_generator()).unwrap()];
        elems.extend(t.matrices().iter().cloned());
        loop {
            let mut basis = FpBasis::new(c.q().prime(), c.full_dimension());
            let mut spanning = Vec::new();
            for e in &elems {
                if basis.insert(e.coords()) {
                    spanning.push(e.clone());
                }
            }
            let before = basis.dim();
            let mut next = spanning.clone();
            for a in &spanning {
                for b in &spanning {
                    next.push(a.mul(b).unwrap());
                }
            }
            let mut grown = FpBasis::new(c.q().prime(), c.full_dimension());
            for e in &next {
                grown.insert(e.coords());
            }
            if grown.dim() == before {
                return before;
            }
            elems = next;
        }
    }

    #[test]
    fn elementary_calculus() {
        let c = ctx(2, 1, 2);
        let e12 = c.elementary(0, 1);
        let e21 = c.elementary(1, 0);
        assert_eq!(e12.mul(&e21).unwrap(), c.elementary(0, 0));
        assert!(e12.mul(&e12).unwrap().is_zero());
        let a = c.random_matrix(&mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(c.identity().mul(&a).unwrap(), a);
        let other = ctx(2, 1, 3);
        assert_eq!(e12.mul(&other.identity()), Err(MatrixError::ShapeMismatch));
    }

    #[test]
    fn closure_examples() {
        let c = ctx(2, 1, 2);
        let empty = c.tuple(vec![]).unwrap();
        assert_eq!(span_closure_dim(&empty), 1);
        let tri = triangular_triple(PrimePower::new(2).unwrap()).unwrap();
        assert_eq!(span_closure_dim(&tri), 3);
        assert!(!generates_full(&tri));
        let all = c
            .tuple((0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| c.elementary(i, j)).collect())
            .unwrap();
        assert_eq!(span_closure_dim(&all), 4);
    }

    #[test]
    fn scalar_tuples_never_generate() {
        let c = ctx(3, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let s = c.scalar(&c.random_element(&mut rng)).unwrap();
            let t = c.tuple(vec![s.clone(), s]).unwrap();
            assert!(!generates_full(&t));
        }
    }

    #[test]
    fn closure_matches_pairwise_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (q, n, m) in [(2, 1, 2), (3, 1, 2), (2, 2, 2), (4, 1, 2), (2, 1, 3), (4, 2, 2)] {
            let c = ctx(q, n, m);
            for g in 0..3 {
                for _ in 0..15 {
                    let t = c.tuple((0..g).map(|_| c.random_matrix(&mut rng)).collect()).unwrap();
                    assert_eq!(span_closure_dim(&t), pairwise_closure_dim(&t), "{c:?} {t:?}");
                }
            }
        }
    }

    #[test]
    fn base_field_elements_are_the_fixed_field() {
        let c = ctx(4, 3, 2);
        let els = c.base_field_elements();
        assert_eq!(els.len(), 4);
        let distinct: HashSet<_> = els.iter().cloned().collect();
        assert_eq!(distinct.len(), 4);
        for a in &els {
            assert_eq!(a.frobenius(2), *a);
        }
        assert_ne!(c.base_generator().frobenius(1), *c.base_generator());
    }

    #[test]
    fn pair_examples() {
        let c = ctx(2, 1, 2);
        let f = c.field();
        let (a, b) = construct_pair(&c, &[f.one()], &vec![f.zero(); 4], &f.one()).unwrap();
        assert_eq!(a, c.elementary(0, 1));
        assert_eq!(b, c.elementary(1, 0));
        assert!(generates_full(&c.tuple(vec![a, b]).unwrap()));

        let c = ctx(2, 2, 2);
        let f = c.field();
        let alpha = f.x().add(&f.one()).unwrap();
        let (a, b) = construct_pair(&c, std::slice::from_ref(&alpha), &vec![f.one(); 4], &f.x()).unwrap();
        assert_eq!(b.entry(1, 0), f.x().mul(&alpha.inv().unwrap()).unwrap());
        assert_eq!(span_closure_dim(&c.tuple(vec![a, b]).unwrap()), 8);
    }

    #[test]
    fn pair_preconditions() {
        let c = ctx(2, 2, 2);
        let f = c.field();
        let betas = vec![f.zero(); 4];
        assert_eq!(
            construct_pair(&c, &[f.zero()], &betas, &f.x()),
            Err(MatrixError::ZeroAlpha(1))
        );
        assert_eq!(
            construct_pair(&c, &[f.one()], &betas, &f.one()),
            Err(MatrixError::NotAGenerator)
        );
        let c1 = ctx(2, 1, 1);
        assert_eq!(
            construct_pair(&c1, &[], &[c1.field().one()], &c1.field().one()),
            Err(MatrixError::NeedsNoncommutative)
        );
    }

    #[test]
    fn random_pairs_generate_and_shift() {
        let c = ctx(3, 1, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..100 {
            let (a, b) = random_pair(&c, &mut rng).unwrap();
            assert!(generates_full(&c.tuple(vec![a.clone(), b.clone()]).unwrap()));
            let family = shifted_family(&c, &a, &b);
            assert_eq!(family.len(), 3);
            let distinct: HashSet<_> = family.iter().map(|(x, _)| x.clone()).collect();
            assert_eq!(distinct.len(), 3);
            for (x, y) in family {
                assert!(generates_full(&c.tuple(vec![x, y]).unwrap()));
            }
        }
    }

    #[test]
    fn automorphism_group_orders() {
        assert_eq!(enumerate_automorphisms(&ctx(2, 1, 2), 100).unwrap().len(), 6);
        assert_eq!(enumerate_automorphisms(&ctx(2, 2, 1), 100).unwrap().len(), 2);
        assert_eq!(enumerate_automorphisms(&ctx(3, 1, 2), 100).unwrap().len(), 24);
        assert_eq!(enumerate_automorphisms(&ctx(4, 1, 2), 1000).unwrap().len(), 60 * 2 / 2);
        assert!(matches!(
            enumerate_automorphisms(&ctx(3, 1, 2), 10),
            Err(MatrixError::Infeasible { .. })
        ));
    }

    #[test]
    fn automorphisms_act_as_a_group() {
        let c = ctx(2, 2, 2);
        let group = enumerate_automorphisms(&c, 1000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = c.tuple(vec![c.random_matrix(&mut rng), c.random_matrix(&mut rng)]).unwrap();
        assert_eq!(apply_automorphism(&Automorphism::identity(&c), &t), t);
        for phi in &group {
            let back = apply_automorphism(&phi.inverse(&c), &apply_automorphism(phi, &t));
            assert_eq!(back, t, "{phi:?}");
            // products are preserved
            let x = &t.matrices()[0];
            let y = &t.matrices()[1];
            assert_eq!(phi.apply(&c, &x.mul(y).unwrap()), phi.apply(&c, x).mul(&phi.apply(&c, y)).unwrap());
        }
    }

    #[test]
    fn generation_is_invariant_under_automorphisms() {
        let c = ctx(2, 1, 2);
        let group = enumerate_automorphisms(&c, 100).unwrap();
        let field = c.field();
        let all: Vec<Matrix> = (0..16u64)
            .map(|idx| {
                let entries: Vec<_> = (0..4).map(|k| field.from_index((idx >> (3 - k)) & 1)).collect();
                Matrix::from_entries(field, 2, &entries).unwrap()
            })
            .collect();
        for a in &all {
            for b in &all {
                let t = c.tuple(vec![a.clone(), b.clone()]).unwrap();
                let gen = generates_full(&t);
                for phi in &group {
                    assert_eq!(generates_full(&apply_automorphism(phi, &t)), gen);
                }
                if gen {
                    assert!(stabilizer_is_trivial_in(&t, &group));
                }
            }
        }
    }

    #[test]
    fn triangular_triple_has_trivial_stabilizer() {
        for q in [2, 3] {
            let t = triangular_triple(PrimePower::new(q).unwrap()).unwrap();
            assert_eq!(t.matrices()[1], t.context().elementary(0, 1));
            assert!(stabilizer_is_trivial(&t, 1000).unwrap());
            assert!(!generates_full(&t));
            assert_eq!(span_closure_dim(&t), 3);
        }
        let empty = ctx(2, 1, 2).tuple(vec![]).unwrap();
        assert!(!stabilizer_is_trivial(&empty, 100).unwrap());
    }

    #[test]
    fn serialization_shape() {
        let c = ctx(2, 1, 2);
        let t = c.tuple(vec![c.elementary(0, 1)]).unwrap();
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"{"q":2,"n":1,"m":2,"matrices":[[[0],[1],[0],[0]]]}"#
        );
    }
}
