//! Brute-force ground truth. Exhaustive counts of generating tuples, a seeded
//! Monte-Carlo estimator, and a small on-disk result cache.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_integer::Integer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::counting::{group_order_c, CountError};
use crate::field::{ExtensionField, FieldError, PrimePower};
use crate::matrix::{generated_subalgebra_dim, linear_span_dim, Matrix, MatrixContext, MatrixError};
use crate::{Count, DEFAULT_GUARD};

/// Two-sided 99% normal quantile.
const Z_99: f64 = 2.5758293035489004;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what}: {size} tuples exceed the enumeration guard of {guard}")]
    Infeasible {
        what: &'static str,
        size: String,
        guard: u64,
    },
    #[error("integrality violated: {0}")]
    Integrality(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Count(#[from] CountError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    Exhaustive,
    Montecarlo,
}

/// Monte-Carlo point estimate with its 99% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Estimate {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Outcome of one oracle run.
///
/// `raw_count` is the number of generating tuples (hits, for Monte Carlo).
/// `divisor` is `n` for a field and `C` for a matrix algebra; exhaustive
/// results carry `normalized = raw_count / divisor`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub q: u64,
    pub n: u64,
    pub m: u64,
    pub g: u64,
    pub mode: OracleMode,
    pub raw_count: Count,
    pub divisor: Count,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized: Option<Count>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<Estimate>,
}

impl OracleResult {
    /// The normalized count; only exhaustive results have one.
    pub fn exact(&self) -> Option<&Count> {
        self.normalized.as_ref()
    }
}

/// Wilson score interval at 99% for `hits` out of `samples`.
pub fn wilson_interval(hits: u64, samples: u64) -> Estimate {
    let n = samples as f64;
    let point = hits as f64 / n;
    let z2 = Z_99 * Z_99;
    let denom = 1.0 + z2 / n;
    let center = (point + z2 / (2.0 * n)) / denom;
    let half = Z_99 * (point * (1.0 - point) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Estimate {
        point,
        lower: (center - half).clamp(0.0, 1.0).min(point),
        upper: (center + half).clamp(0.0, 1.0).max(point),
    }
}

/// Splits `0..total` into `parts` contiguous ranges.
fn partition(total: u64, parts: usize) -> Vec<Range<u64>> {
    let parts = (parts.max(1) as u64).min(total.max(1));
    let (base, extra) = total.div_rem(&parts);
    let mut out = Vec::with_capacity(parts as usize);
    let mut start = 0;
    for i in 0..parts {
        let len = base + u64::from(i < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

fn check_guard(what: &'static str, size: &BigUint, guard: u64) -> Result<u64, OracleError> {
    match u64::try_from(size) {
        Ok(v) if v <= guard => Ok(v),
        _ => Err(OracleError::Infeasible {
            what,
            size: size.to_string(),
            guard,
        }),
    }
}

/// Subfield degree over `F_q` of every element of `F_{q^n}`, indexed by
/// element index, read off the orbit lengths of `a -> a^q`.
fn degree_table(field: &Arc<ExtensionField>, q: PrimePower) -> Vec<u32> {
    let size = field.order_u64().expect("guarded by caller") as usize;
    let e = q.exponent() as u64;
    let perm: Vec<u64> = (0..size as u64)
        .into_par_iter()
        .map(|i| field.from_index(i).frobenius(e).index())
        .collect();
    let mut degree = vec![0u32; size];
    for start in 0..size {
        if degree[start] != 0 {
            continue;
        }
        let mut orbit = vec![start];
        let mut next = perm[start] as usize;
        while next != start {
            orbit.push(next);
            next = perm[next] as usize;
        }
        let len = orbit.len() as u32;
        for i in orbit {
            degree[i] = len;
        }
    }
    degree
}

/// Exhaustive and Monte-Carlo counts, bounded by an enumeration guard.
#[derive(Debug, Clone)]
pub struct Oracle {
    guard: u64,
    partitions: usize,
    cache: Option<CacheStore>,
    memo: Arc<Mutex<HashMap<CacheKey, OracleResult>>>,
}

impl Default for Oracle {
    fn default() -> Self {
        Self::new(DEFAULT_GUARD)
    }
}

impl Oracle {
    pub fn new(guard: u64) -> Self {
        Self {
            guard: guard.max(1),
            partitions: rayon::current_num_threads() * 4,
            cache: None,
            memo: Arc::default(),
        }
    }

    pub fn with_cache(mut self, store: CacheStore) -> Self {
        self.cache = Some(store);
        self
    }

    /// Number of index ranges an enumeration is split into.
    pub fn with_partitions(mut self, parts: usize) -> Self {
        self.partitions = parts.max(1);
        self
    }

    pub fn guard(&self) -> u64 {
        self.guard
    }

    pub fn cache(&self) -> Option<&CacheStore> {
        self.cache.as_ref()
    }

    fn cached<F>(&self, key: &CacheKey, compute: F) -> Result<OracleResult, OracleError>
    where
        F: FnOnce() -> Result<OracleResult, OracleError>,
    {
        if let Some(r) = self.memo.lock().expect("memo lock").get(key) {
            return Ok(r.clone());
        }
        let hit = match &self.cache {
            Some(store) => match store.lookup(key) {
                CacheLookup::Hit(r) => Some(r),
                _ => None,
            },
            None => None,
        };
        let result = match hit {
            Some(r) => r,
            None => {
                let r = compute()?;
                if let Some(store) = &self.cache {
                    // a read-only or missing directory only costs the cache
                    let _ = store.put(key, &r);
                }
                r
            }
        };
        self.memo
            .lock()
            .expect("memo lock")
            .insert(key.clone(), result.clone());
        Ok(result)
    }

    /// Whether `count_etale(q, n, g)` fits under the guard.
    pub fn etale_feasible(&self, q: PrimePower, n: u64, g: u64) -> bool {
        let size = BigUint::from(q.value()).pow((n * g) as u32);
        size <= BigUint::from(self.guard)
    }

    /// Whether `count_matrix(q, n, m, g)` fits under the guard.
    pub fn matrix_feasible(&self, q: PrimePower, n: u64, m: u64, g: u64) -> bool {
        let size = BigUint::from(q.value()).pow((n * m * m * g) as u32);
        size <= BigUint::from(self.guard)
    }

    /// Counts `g`-tuples in `F_{q^n}` that generate it over `F_q`, i.e. whose
    /// subfield degrees have lcm `n`; normalizes by `n`.
    pub fn count_etale(&self, q: PrimePower, n: u64, g: u64) -> Result<OracleResult, OracleError> {
        if n == 0 {
            return Err(OracleError::InvalidArgument("n must be at least 1".into()));
        }
        let key = CacheKey::etale(q, n, g);
        self.cached(&key, || {
            let size = BigUint::from(q.value()).pow((n * g) as u32);
            let total = check_guard("etale tuples", &size, self.guard)?;
            let raw = self.raw_etale_partitioned(q, n, g, total, self.partitions)?;
            finish_exhaustive(q, n, 1, g, BigUint::from(raw), BigUint::from(n))
        })
    }

    fn raw_etale_partitioned(
        &self,
        q: PrimePower,
        n: u64,
        g: u64,
        total: u64,
        parts: usize,
    ) -> Result<u64, OracleError> {
        let field = ExtensionField::new(q.prime(), q.exponent() as usize * n as usize)?;
        let size = field.order_u64().expect("guarded");
        let degrees = degree_table(&field, q);
        let count = partition(total, parts)
            .into_par_iter()
            .map(|range| {
                let mut hits = 0u64;
                for idx in range {
                    let mut t = idx;
                    let mut l = 1u64;
                    for _ in 0..g {
                        l = l.lcm(&(degrees[(t % size) as usize] as u64));
                        t /= size;
                    }
                    if l == n {
                        hits += 1;
                    }
                }
                hits
            })
            .sum();
        Ok(count)
    }

    /// Raw étale count with an explicit partition count; the sum must not
    /// depend on `parts`.
    pub fn raw_etale_with_partitions(
        &self,
        q: PrimePower,
        n: u64,
        g: u64,
        parts: usize,
    ) -> Result<u64, OracleError> {
        let size = BigUint::from(q.value()).pow((n * g) as u32);
        let total = check_guard("etale tuples", &size, self.guard)?;
        self.raw_etale_partitioned(q, n, g, total, parts)
    }

    /// Counts `|S_g|`, the `g`-tuples generating `M_m(F_{q^n})` over `F_q`,
    /// and normalizes by `C`.
    pub fn count_matrix(&self, q: PrimePower, n: u64, m: u64, g: u64) -> Result<OracleResult, OracleError> {
        let key = CacheKey::matrix(q, n, m, g);
        self.cached(&key, || {
            let ctx = MatrixContext::new(q, n, m as usize)?;
            let raw = self.raw_matrix_partitioned(&ctx, g, self.partitions, Test::Generates)?;
            let c = group_order_c::<BigUint>(q, n, m)?;
            finish_exhaustive(q, n, m, g, BigUint::from(raw), c)
        })
    }

    /// Raw matrix count with an explicit partition count.
    pub fn raw_matrix_with_partitions(
        &self,
        q: PrimePower,
        n: u64,
        m: u64,
        g: u64,
        parts: usize,
    ) -> Result<u64, OracleError> {
        let ctx = MatrixContext::new(q, n, m as usize)?;
        self.raw_matrix_partitioned(&ctx, g, parts, Test::Generates)
    }

    /// Number of `g`-tuples whose entries, together with `F_q * I`, span
    /// `M_m(F_{q^n})` as a vector space (no products taken).
    pub fn count_spanning_tuples(&self, q: PrimePower, n: u64, m: u64, g: u64) -> Result<u64, OracleError> {
        let ctx = MatrixContext::new(q, n, m as usize)?;
        self.raw_matrix_partitioned(&ctx, g, self.partitions, Test::Spans)
    }

    fn raw_matrix_partitioned(
        &self,
        ctx: &Arc<MatrixContext>,
        g: u64,
        parts: usize,
        test: Test,
    ) -> Result<u64, OracleError> {
        let dim = ctx.full_dimension();
        let size = BigUint::from(ctx.q().prime()).pow((dim as u64 * g) as u32);
        let total = check_guard("matrix tuples", &size, self.guard)?;
        let per_matrix = BigUint::from(ctx.q().prime()).pow(dim as u32);
        let per_matrix = u64::try_from(&per_matrix).expect("below the guard");
        let field = ctx.field();
        let count = partition(total, parts)
            .into_par_iter()
            .map(|range| {
                let mut hits = 0u64;
                let mut matrices = Vec::with_capacity(g as usize);
                for idx in range {
                    matrices.clear();
                    // first matrix most significant
                    let mut digits = vec![0u64; g as usize];
                    let mut t = idx;
                    for slot in digits.iter_mut().rev() {
                        *slot = t % per_matrix;
                        t /= per_matrix;
                    }
                    for &d in &digits {
                        let mut coords = vec![0u32; dim];
                        field.decode_index_into(d, &mut coords);
                        matrices.push(Matrix::from_coords(field, ctx.m(), coords));
                    }
                    let hit = match test {
                        Test::Generates => generated_subalgebra_dim(ctx, &matrices) == dim,
                        Test::Spans => {
                            let t = ctx.tuple(matrices.clone()).expect("same context");
                            linear_span_dim(&t) == dim
                        }
                    };
                    if hit {
                        hits += 1;
                    }
                }
                hits
            })
            .sum();
        Ok(count)
    }

    /// Estimates `|S_g| / q^{g n m^2}` from `samples` uniform tuples drawn
    /// with a seeded ChaCha generator.
    pub fn estimate_matrix_fraction(
        &self,
        q: PrimePower,
        n: u64,
        m: u64,
        g: u64,
        samples: u64,
        seed: u64,
    ) -> Result<OracleResult, OracleError> {
        if samples == 0 {
            return Err(OracleError::InvalidArgument("samples must be at least 1".into()));
        }
        let key = CacheKey::montecarlo(q, n, m, g, samples, seed);
        self.cached(&key, || {
            let ctx = MatrixContext::new(q, n, m as usize)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dim = ctx.full_dimension();
            let mut hits = 0u64;
            for _ in 0..samples {
                let matrices: Vec<Matrix> = (0..g).map(|_| ctx.random_matrix(&mut rng)).collect();
                if generated_subalgebra_dim(&ctx, &matrices) == dim {
                    hits += 1;
                }
            }
            Ok(OracleResult {
                q: q.value(),
                n,
                m,
                g,
                mode: OracleMode::Montecarlo,
                raw_count: BigUint::from(hits),
                divisor: group_order_c::<BigUint>(q, n, m)?,
                normalized: None,
                samples: Some(samples),
                seed: Some(seed),
                estimate: Some(wilson_interval(hits, samples)),
            })
        })
    }
}

#[derive(Clone, Copy)]
enum Test {
    Generates,
    Spans,
}

fn finish_exhaustive(
    q: PrimePower,
    n: u64,
    m: u64,
    g: u64,
    raw: BigUint,
    divisor: BigUint,
) -> Result<OracleResult, OracleError> {
    let (normalized, rem) = raw.div_rem(&divisor);
    if rem != BigUint::default() {
        return Err(OracleError::Integrality(format!(
            "raw count {raw} at (q={q}, n={n}, m={m}, g={g}) is not divisible by {divisor}"
        )));
    }
    Ok(OracleResult {
        q: q.value(),
        n,
        m,
        g,
        mode: OracleMode::Exhaustive,
        raw_count: raw,
        divisor,
        normalized: Some(normalized),
        samples: None,
        seed: None,
        estimate: None,
    })
}

// ---------------------------------------------------------------------------

/// Identifies one cached oracle result.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    kind: &'static str,
    q: u64,
    n: u64,
    m: u64,
    g: u64,
    mode: OracleMode,
    samples: Option<u64>,
    seed: Option<u64>,
}

impl CacheKey {
    pub fn etale(q: PrimePower, n: u64, g: u64) -> Self {
        Self {
            kind: "etale",
            q: q.value(),
            n,
            m: 1,
            g,
            mode: OracleMode::Exhaustive,
            samples: None,
            seed: None,
        }
    }

    pub fn matrix(q: PrimePower, n: u64, m: u64, g: u64) -> Self {
        Self {
            kind: "matrix",
            q: q.value(),
            n,
            m,
            g,
            mode: OracleMode::Exhaustive,
            samples: None,
            seed: None,
        }
    }

    pub fn montecarlo(q: PrimePower, n: u64, m: u64, g: u64, samples: u64, seed: u64) -> Self {
        Self {
            kind: "matrix",
            q: q.value(),
            n,
            m,
            g,
            mode: OracleMode::Montecarlo,
            samples: Some(samples),
            seed: Some(seed),
        }
    }

    fn file_name(&self) -> String {
        let mut name = format!(
            "{}-q{}-n{}-m{}-g{}-{}",
            self.kind,
            self.q,
            self.n,
            self.m,
            self.g,
            mode_str(self.mode)
        );
        if let (Some(s), Some(seed)) = (self.samples, self.seed) {
            let _ = write!(name, "-s{s}-seed{seed}");
        }
        name.push_str(".txt");
        name
    }
}

fn mode_str(mode: OracleMode) -> &'static str {
    match mode {
        OracleMode::Exhaustive => "exhaustive",
        OracleMode::Montecarlo => "montecarlo",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CacheLookup {
    Hit(OracleResult),
    Missing,
    Corrupt,
}

/// Directory of text records, one file per key. Each record is `key=value`
/// lines followed by `checksum=<sha256 of the preceding bytes>`.
#[derive(Debug, Clone)]
pub struct CacheStore {
    dir: PathBuf,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

fn encode_record(key: &CacheKey, r: &OracleResult) -> String {
    let mut body = String::new();
    let mut line = |k: &str, v: String| {
        body.push_str(k);
        body.push('=');
        body.push_str(&v);
        body.push('\n');
    };
    line("kind", key.kind.to_string());
    line("q", r.q.to_string());
    line("n", r.n.to_string());
    line("m", r.m.to_string());
    line("g", r.g.to_string());
    line("mode", mode_str(r.mode).to_string());
    line("raw_count", r.raw_count.to_string());
    line("divisor", r.divisor.to_string());
    if let Some(v) = &r.normalized {
        line("normalized", v.to_string());
    }
    if let Some(v) = r.samples {
        line("samples", v.to_string());
    }
    if let Some(v) = r.seed {
        line("seed", v.to_string());
    }
    if let Some(e) = &r.estimate {
        // Debug formatting of f64 round-trips exactly
        line("point", format!("{:?}", e.point));
        line("lower", format!("{:?}", e.lower));
        line("upper", format!("{:?}", e.upper));
    }
    let sum = sha256_hex(body.as_bytes());
    body.push_str("checksum=");
    body.push_str(&sum);
    body.push('\n');
    body
}

fn decode_record(key: &CacheKey, text: &str) -> Option<OracleResult> {
    let cut = text.rfind("checksum=")?;
    let (body, tail) = text.split_at(cut);
    let sum = tail.strip_prefix("checksum=")?.trim_end();
    if sha256_hex(body.as_bytes()) != sum {
        return None;
    }
    let mut fields = std::collections::HashMap::new();
    for line in body.lines() {
        let (k, v) = line.split_once('=')?;
        fields.insert(k, v);
    }
    let get = |k: &str| fields.get(k).copied();
    let num = |k: &str| get(k).and_then(|v| v.parse::<u64>().ok());
    let big = |k: &str| get(k).and_then(|v| v.parse::<BigUint>().ok());
    let float = |k: &str| get(k).and_then(|v| v.parse::<f64>().ok());
    let mode = match get("mode")? {
        "exhaustive" => OracleMode::Exhaustive,
        "montecarlo" => OracleMode::Montecarlo,
        _ => return None,
    };
    let estimate = match mode {
        OracleMode::Montecarlo => Some(Estimate {
            point: float("point")?,
            lower: float("lower")?,
            upper: float("upper")?,
        }),
        OracleMode::Exhaustive => None,
    };
    let r = OracleResult {
        q: num("q")?,
        n: num("n")?,
        m: num("m")?,
        g: num("g")?,
        mode,
        raw_count: big("raw_count")?,
        divisor: big("divisor")?,
        normalized: big("normalized"),
        samples: num("samples"),
        seed: num("seed"),
        estimate,
    };
    let matches = get("kind")? == key.kind
        && (r.q, r.n, r.m, r.g, r.mode, r.samples, r.seed)
            == (key.q, key.n, key.m, key.g, key.mode, key.samples, key.seed);
    matches.then_some(r)
}

impl CacheStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    pub fn lookup(&self, key: &CacheKey) -> CacheLookup {
        match fs::read_to_string(self.path_for(key)) {
            Ok(text) => match decode_record(key, &text) {
                Some(r) => CacheLookup::Hit(r),
                None => CacheLookup::Corrupt,
            },
            Err(_) => CacheLookup::Missing,
        }
    }

    pub fn get(&self, key: &CacheKey) -> Option<OracleResult> {
        match self.lookup(key) {
            CacheLookup::Hit(r) => Some(r),
            _ => None,
        }
    }

    /// Writes through a temporary file so readers never see a partial record.
    pub fn put(&self, key: &CacheKey, result: &OracleResult) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(key);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, encode_record(key, result))?;
        fs::rename(&tmp, &path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::n_etale;

    fn pp(q: u64) -> PrimePower {
        PrimePower::new(q).unwrap()
    }

    #[test]
    fn etale_examples() {
        let o = Oracle::default();
        let r = o.count_etale(pp(2), 2, 1).unwrap();
        assert_eq!((r.raw_count, r.normalized), (2u32.into(), Some(1u32.into())));
        let r = o.count_etale(pp(2), 2, 2).unwrap();
        assert_eq!((r.raw_count, r.normalized), (12u32.into(), Some(6u32.into())));
        for g in 0..5 {
            let r = o.count_etale(pp(2), 1, g).unwrap();
            assert_eq!(r.normalized, Some(BigUint::from(1u32 << g)));
        }
        assert_eq!(o.count_etale(pp(2), 2, 0).unwrap().raw_count, BigUint::default());
    }

    #[test]
    fn etale_small_grid_matches_formula() {
        let o = Oracle::default();
        for q in [2, 3, 4, 8, 9] {
            for n in 1..=4 {
                for g in 1..=2 {
                    if !o.etale_feasible(pp(q), n, g) || q.pow((n * g) as u32) > 100_000 {
                        continue;
                    }
                    let r = o.count_etale(pp(q), n, g).unwrap();
                    assert_eq!(r.normalized.unwrap(), n_etale::<BigUint>(pp(q), n, g).unwrap());
                }
            }
        }
    }

    #[test]
    fn matrix_examples() {
        let o = Oracle::default();
        let r = o.count_matrix(pp(2), 1, 2, 1).unwrap();
        assert_eq!(r.raw_count, BigUint::default());
        let r = o.count_matrix(pp(2), 1, 2, 2).unwrap();
        assert_eq!(r.raw_count, 96u32.into());
        assert_eq!(r.divisor, 6u32.into());
        assert_eq!(r.normalized, Some(16u32.into()));
        for (q, n, g) in [(2, 2, 2), (3, 2, 1), (4, 1, 2)] {
            let m1 = o.count_matrix(pp(q), n, 1, g).unwrap();
            assert_eq!(m1.normalized, o.count_etale(pp(q), n, g).unwrap().normalized);
        }
    }

    #[test]
    fn guard_is_enforced() {
        let o = Oracle::new(1000);
        assert!(matches!(o.count_matrix(pp(2), 1, 2, 3), Err(OracleError::Infeasible { .. })));
        assert!(matches!(o.count_etale(pp(2), 5, 2), Err(OracleError::Infeasible { .. })));
        assert!(o.count_etale(pp(2), 3, 3).is_ok());
    }

    #[test]
    fn partitions_do_not_change_counts() {
        let o = Oracle::default();
        let e: Vec<u64> = [1, 4, 16]
            .iter()
            .map(|&k| o.raw_etale_with_partitions(pp(3), 2, 3, k).unwrap())
            .collect();
        assert!(e.iter().all(|&x| x == e[0]));
        let mtx: Vec<u64> = [1, 4, 16]
            .iter()
            .map(|&k| o.raw_matrix_with_partitions(pp(2), 1, 2, 2, k).unwrap())
            .collect();
        assert_eq!(mtx, vec![96, 96, 96]);
    }

    #[test]
    fn partition_covers_range() {
        for total in [0u64, 1, 5, 17, 1000] {
            for parts in [1, 3, 16, 2000] {
                let ranges = partition(total, parts);
                let mut next = 0;
                for r in &ranges {
                    assert_eq!(r.start, next);
                    next = r.end;
                }
                assert_eq!(next, total);
            }
        }
    }

    #[test]
    fn wilson_interval_shape() {
        let e = wilson_interval(0, 10);
        assert_eq!(e.lower, 0.0);
        assert!(e.upper > 0.0);
        let e = wilson_interval(1, 1);
        assert_eq!((e.point, e.upper), (1.0, 1.0));
        let e = wilson_interval(3750, 10_000);
        assert!(e.contains(0.375));
        assert!(e.upper - e.lower < 0.03);
    }

    #[test]
    fn montecarlo_is_reproducible() {
        let o = Oracle::default();
        let a = o.estimate_matrix_fraction(pp(2), 1, 2, 2, 2000, 9).unwrap();
        let b = o.estimate_matrix_fraction(pp(2), 1, 2, 2, 2000, 9).unwrap();
        assert_eq!(a, b);
        let c = o.estimate_matrix_fraction(pp(2), 1, 2, 2, 2000, 10).unwrap();
        assert_ne!(a.raw_count, c.raw_count);
        assert!(o.estimate_matrix_fraction(pp(2), 1, 2, 2, 0, 1).is_err());
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let store = CacheStore::new(dir.path());
        let key = CacheKey::matrix(pp(2), 1, 2, 2);
        assert_eq!(store.lookup(&key), CacheLookup::Missing);

        let o = Oracle::default().with_cache(store.clone());
        let first = o.count_matrix(pp(2), 1, 2, 2).unwrap();
        assert_eq!(store.get(&key), Some(first.clone()));

        let mc_key = CacheKey::montecarlo(pp(2), 1, 2, 2, 500, 3);
        let mc = o.estimate_matrix_fraction(pp(2), 1, 2, 2, 500, 3).unwrap();
        assert_eq!(store.get(&mc_key), Some(mc));

        let path = store.path_for(&key);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replace("raw_count=96", "raw_count=97")).unwrap();
        assert_eq!(store.lookup(&key), CacheLookup::Corrupt);
        // a fresh oracle has no in-memory copy and must recompute
        let o = Oracle::default().with_cache(store.clone());
        assert_eq!(o.count_matrix(pp(2), 1, 2, 2).unwrap(), first);
        assert_eq!(store.lookup(&key), CacheLookup::Hit(first));
    }

    #[test]
    fn unwritable_cache_is_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("not-a-dir");
        fs::write(&file, "x").unwrap();
        let o = Oracle::default().with_cache(CacheStore::new(file.join("sub")));
        assert_eq!(o.count_etale(pp(2), 2, 2).unwrap().normalized, Some(6u32.into()));
    }

    #[test]
    fn spanning_tuples() {
        let o = Oracle::default();
        assert_eq!(o.count_spanning_tuples(pp(2), 1, 2, 2).unwrap(), 0);
        let spans = o.count_spanning_tuples(pp(2), 1, 2, 3).unwrap();
        let gens = o.count_matrix(pp(2), 1, 2, 3).unwrap().raw_count;
        // images in M / F_2 I must span all 3 dimensions; the I-components are free
        assert_eq!(spans, 168 * 8);
        assert!(BigUint::from(spans) <= gens);
    }
}
