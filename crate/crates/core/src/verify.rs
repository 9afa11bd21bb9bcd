//! Self-check suites run by `sepgen verify`. Each suite compares formulas
//! and bounds with brute-force counts and reports one row per check.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::Serialize;

use crate::counting::{
    burnside_identity_check, etale_bounds, group_order_c, matrix_bounds, moebius, n_etale, n_etale_with,
    rank_count, CountError,
};
use crate::field::PrimePower;
use crate::gencalc::{
    adjacent_law, etale_bracket_lower, gen_algebra, gen_pure_etale, gen_pure_matrix, intervals, AlgebraSpec,
    Mode, Part,
};
use crate::matrix::{
    apply_automorphism, enumerate_automorphisms, generates_full, span_closure_dim, stabilizer_is_trivial,
    triangular_triple, MatrixContext,
};
use crate::oracle::Oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Formula,
    Bounds,
    Orbits,
    Intervals,
    All,
}

impl Suite {
    fn members(self) -> &'static [Suite] {
        match self {
            Suite::All => &[Suite::Formula, Suite::Bounds, Suite::Orbits, Suite::Intervals],
            Suite::Formula => &[Suite::Formula],
            Suite::Bounds => &[Suite::Bounds],
            Suite::Orbits => &[Suite::Orbits],
            Suite::Intervals => &[Suite::Intervals],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Formula => "formula",
            Suite::Bounds => "bounds",
            Suite::Orbits => "orbits",
            Suite::Intervals => "intervals",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "formula" => Suite::Formula,
            "bounds" => Suite::Bounds,
            "orbits" => Suite::Orbits,
            "intervals" => Suite::Intervals,
            "all" => Suite::All,
            other => return Err(format!("unknown suite {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Knobs for [`run`].
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Largest `q^{ng}` on the formula grid.
    pub etale_limit: u64,
    /// Replace the Möbius function with one whose value at 2 has the wrong
    /// sign. Only useful to see the suites fail.
    pub flip_moebius_sign: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            etale_limit: 1_000_000,
            flip_moebius_sign: false,
        }
    }
}

fn faulty_moebius(d: u64) -> Result<i8, CountError> {
    let mu = moebius(d)?;
    Ok(if d == 2 { -mu } else { mu })
}

struct Report {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Report {
    fn push(&mut self, name: impl Into<String>, outcome: Result<(bool, String), String>) {
        let (passed, detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        self.checks.push(Check {
            suite: self.suite,
            name: name.into(),
            passed,
            detail,
        });
    }
}

fn pp(q: u64) -> PrimePower {
    PrimePower::new(q).expect("prime power literal")
}

/// Runs the suite(s) and returns every check, passing or not.
pub fn run(suite: Suite, cfg: &VerifyConfig, oracle: &Oracle) -> Vec<Check> {
    let mut out = Vec::new();
    for s in suite.members() {
        let mut report = Report {
            suite: s.name(),
            checks: Vec::new(),
        };
        match s {
            Suite::Formula => formula(&mut report, cfg, oracle),
            Suite::Bounds => bounds(&mut report, oracle),
            Suite::Orbits => orbits(&mut report, oracle),
            Suite::Intervals => interval_suite(&mut report, oracle),
            Suite::All => unreachable!(),
        }
        out.extend(report.checks);
    }
    out
}

fn formula(report: &mut Report, cfg: &VerifyConfig, oracle: &Oracle) {
    let eval = |q, n, g| -> Result<BigUint, CountError> {
        if cfg.flip_moebius_sign {
            n_etale_with(q, n, g, faulty_moebius)
        } else {
            n_etale(q, n, g)
        }
    };
    let mut cases = 0;
    let mut failures = Vec::new();
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        for n in 1..=8u64 {
            for g in 1..=4u64 {
                let size = BigUint::from(q).pow((n * g) as u32);
                if size > BigUint::from(cfg.etale_limit) {
                    continue;
                }
                cases += 1;
                let formula = eval(pp(q), n, g).map_err(|e| e.to_string());
                let counted = oracle
                    .count_etale(pp(q), n, g)
                    .map_err(|e| e.to_string())
                    .map(|r| r.normalized);
                match (formula, counted) {
                    (Ok(f), Ok(Some(c))) if f == c => {}
                    (f, c) => failures.push(format!("(q={q},n={n},g={g}): formula {f:?}, count {c:?}")),
                }
            }
        }
    }
    report.push(
        "moebius formula equals generating-tuple count",
        Ok((
            failures.is_empty(),
            if failures.is_empty() {
                format!("{cases} cases")
            } else {
                failures.join("; ")
            },
        )),
    );

    let mut bad = Vec::new();
    for q in [2u64, 3, 5] {
        for n in 1..=60u64 {
            for g in 1..=8u64 {
                let ok = if cfg.flip_moebius_sign {
                    orbit_sum_with_fault(pp(q), n, g)
                } else {
                    burnside_identity_check::<BigUint>(pp(q), n, g)
                };
                if !matches!(ok, Ok(true)) {
                    bad.push(format!("(q={q},n={n},g={g})"));
                }
            }
        }
    }
    report.push(
        "orbit sizes sum to q^{gn}",
        Ok((bad.is_empty(), if bad.is_empty() { "1440 cases".into() } else { bad.join(" ") })),
    );

    let spots = [(2u64, 2u64, 2u64, 6u64), (2, 6, 1, 9), (2, 3, 1, 2)];
    for (q, n, g, want) in spots {
        report.push(
            format!("N_{{{q},{n}}}({g}) = {want}"),
            eval(pp(q), n, g)
                .map(|v| (v == BigUint::from(want), v.to_string()))
                .map_err(|e| e.to_string()),
        );
    }
}

fn orbit_sum_with_fault(q: PrimePower, n: u64, g: u64) -> Result<bool, CountError> {
    let mut total = BigUint::default();
    for d in crate::counting::divisors(n)? {
        total += BigUint::from(d) * n_etale_with::<BigUint, _>(q, d, g, faulty_moebius)?;
    }
    Ok(total == BigUint::from(q.value()).pow((g * n) as u32))
}

/// Matrix cases small enough to count exhaustively in a few seconds.
const MATRIX_GRID: &[(u64, u64, u64, u64)] = &[
    (2, 1, 2, 1),
    (2, 1, 2, 2),
    (2, 1, 2, 3),
    (3, 1, 2, 1),
    (3, 1, 2, 2),
    (2, 2, 2, 1),
    (2, 2, 2, 2),
    (4, 1, 2, 2),
    (2, 1, 3, 1),
    (2, 1, 3, 2),
];

fn bounds(report: &mut Report, oracle: &Oracle) {
    for &(q, n, m, g) in MATRIX_GRID {
        let outcome = (|| -> Result<(bool, String), String> {
            let counted = oracle.count_matrix(pp(q), n, m, g).map_err(|e| e.to_string())?;
            let value = counted.normalized.clone().unwrap_or_default();
            let b = matrix_bounds::<BigUint>(pp(q), n, m, g).map_err(|e| e.to_string())?;
            let mut ok = b.contains(&value);
            if g == 2 {
                ok &= counted.raw_count >= BigUint::from(q).pow((n * m * m) as u32);
            }
            Ok((ok, format!("{} <= {} <= {}", b.lower, value, b.upper)))
        })();
        report.push(format!("matrix bounds hold at (q={q},n={n},m={m},g={g})"), outcome);
    }

    for (q, n, g) in [(2u64, 2u64, 2u64), (3, 2, 1), (4, 1, 2), (2, 3, 2)] {
        let outcome = (|| -> Result<(bool, String), String> {
            let a = oracle.count_matrix(pp(q), n, 1, g).map_err(|e| e.to_string())?;
            let b = oracle.count_etale(pp(q), n, g).map_err(|e| e.to_string())?;
            Ok((a.normalized == b.normalized, format!("{:?}", a.normalized)))
        })();
        report.push(format!("1x1 matrices count like the field at (q={q},n={n},g={g})"), outcome);
    }

    for g in [2u64, 3] {
        let outcome = (|| -> Result<(bool, String), String> {
            let spans = oracle.count_spanning_tuples(pp(2), 1, 2, g).map_err(|e| e.to_string())?;
            let gens = oracle.count_matrix(pp(2), 1, 2, g).map_err(|e| e.to_string())?;
            let floor = rank_count::<BigUint>(pp(2), 4, g).map_err(|e| e.to_string())?;
            let spans = BigUint::from(spans);
            Ok((
                floor <= spans && spans <= gens.raw_count,
                format!("{floor} <= {spans} <= {}", gens.raw_count),
            ))
        })();
        report.push(format!("spanning tuples bound generating tuples at g={g}"), outcome);
    }

    let mut bad = Vec::new();
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        for n in 1..=8u64 {
            for g in 1..=4u64 {
                let v = n_etale::<BigUint>(pp(q), n, g);
                let b = etale_bounds::<BigUint>(pp(q), n, g);
                if !matches!((v, b), (Ok(v), Ok(b)) if b.contains(&v)) {
                    bad.push(format!("(q={q},n={n},g={g})"));
                }
            }
        }
    }
    report.push("field counts lie within their bounds", Ok((bad.is_empty(), bad.join(" "))));

    let mut bad = Vec::new();
    for q in [2u64, 3, 4, 5] {
        for n in 1..=6u64 {
            for r in 1..=10_000u64 {
                let lo = etale_bracket_lower(pp(q), n, r);
                let gen = gen_pure_etale(pp(q), n, r);
                let ok = match (lo, gen) {
                    (Ok(lo), Ok(gen)) => lo <= gen && gen <= lo + 1 && (n > 1 || gen == lo),
                    _ => false,
                };
                if !ok {
                    bad.push(format!("(q={q},n={n},r={r})"));
                }
            }
        }
    }
    report.push("field gen within the log bracket", Ok((bad.is_empty(), bad.join(" "))));

    let mut bad = Vec::new();
    for q in [2u64, 3, 4] {
        for d in 1..=300u64 {
            let spec = AlgebraSpec::new(q, &[Part { n: 1, m: 1, r: d }]).expect("valid");
            let gen = gen_algebra(&spec, Mode::BoundsOnly, oracle).map(|g| g.value());
            let bound = crate::gencalc::etale_dimension_bound(&spec);
            if !matches!((gen, bound), (Ok(Some(g)), Ok(b)) if g == b) {
                bad.push(format!("(q={q},d={d})"));
            }
        }
    }
    report.push("split algebras meet the dimension bound", Ok((bad.is_empty(), bad.join(" "))));
}

fn orbits(report: &mut Report, oracle: &Oracle) {
    for q in [2u64, 3] {
        let outcome = (|| -> Result<(bool, String), String> {
            let ctx = MatrixContext::new(pp(q), 1, 2).map_err(|e| e.to_string())?;
            let group = enumerate_automorphisms(&ctx, oracle.guard()).map_err(|e| e.to_string())?;
            let c = group.len();
            let total = ctx.matrix_count().ok_or("too many matrices")?.pow(2);
            let mut seen = HashSet::new();
            let mut generating = 0u64;
            let mut orbit_count = 0u64;
            let mut ok = true;
            for idx in 0..total {
                let t = ctx.tuple_from_index(idx, 2);
                if !generates_full(&t) {
                    continue;
                }
                generating += 1;
                if seen.contains(&t) {
                    continue;
                }
                orbit_count += 1;
                let orbit: HashSet<_> = group.iter().map(|phi| apply_automorphism(phi, &t)).collect();
                ok &= orbit.len() == c;
                seen.extend(orbit);
            }
            ok &= generating == orbit_count * c as u64 && seen.len() as u64 == generating;
            Ok((ok, format!("|S_2| = {generating}, C = {c}, {orbit_count} orbits")))
        })();
        report.push(format!("free action on generating pairs, q={q}"), outcome);
    }

    for q in [2u64, 3] {
        let outcome = (|| -> Result<(bool, String), String> {
            let t = triangular_triple(pp(q)).map_err(|e| e.to_string())?;
            let trivial = stabilizer_is_trivial(&t, oracle.guard()).map_err(|e| e.to_string())?;
            let dim = span_closure_dim(&t);
            Ok((trivial && dim == 3, format!("trivial stabilizer: {trivial}, subalgebra dim {dim}")))
        })();
        report.push(format!("upper-triangular triple, q={q}"), outcome);
    }

    let outcome = (|| -> Result<(bool, String), String> {
        let c = group_order_c::<BigUint>(pp(2), 2, 2).map_err(|e| e.to_string())?;
        let ctx = MatrixContext::new(pp(2), 2, 2).map_err(|e| e.to_string())?;
        let group = enumerate_automorphisms(&ctx, oracle.guard()).map_err(|e| e.to_string())?;
        Ok((BigUint::from(group.len()) == c, format!("{} automorphisms", group.len())))
    })();
    report.push("automorphism count matches C at (q=2,n=2,m=2)", outcome);
}

fn interval_suite(report: &mut Report, oracle: &Oracle) {
    let outcome = (|| -> Result<(bool, String), String> {
        let rep = intervals(pp(2), 1, 2, 2, Mode::AllowOracle, oracle).map_err(|e| e.to_string())?;
        let i0 = rep.i0.first_last();
        let i1 = rep.i1.first_last();
        let ok = i0 == Some((3u32.into(), 16u32.into()))
            && i1 == Some((1u32.into(), 2u32.into()))
            && rep.partition_law() == Some(true);
        Ok((ok, format!("I0 = {i0:?}, I1 = {i1:?}")))
    })();
    report.push("interval sets at (q=2,n=1,m=2,g=2)", outcome);

    for &(q, n, m, g) in &[(2u64, 1u64, 2u64, 2u64), (2, 1, 2, 3), (3, 1, 2, 2), (2, 2, 2, 2), (4, 1, 2, 2)] {
        let outcome = (|| -> Result<(bool, String), String> {
            let rep = intervals(pp(q), n, m, g, Mode::AllowOracle, oracle).map_err(|e| e.to_string())?;
            let mut ok = rep.partition_law() == Some(true);
            let mut detail = format!("|I0| = {}, |I1| = {}", rep.i0.len(), rep.i1.len());
            for b in rep.size_bounds.iter().filter(|b| b.shifted) {
                ok &= b.holds == Some(true);
                detail.push_str(&format!(", {:?} bound {}", b.kind, b.value));
            }
            // every r in both sets reproduces its offset from the log bracket
            for (set, offset) in [(&rep.i0, 0u64), (&rep.i1, 1)] {
                if let Some((first, last)) = set.first_last() {
                    let first = u64::try_from(&first).map_err(|e| e.to_string())?;
                    let last = u64::try_from(&last).map_err(|e| e.to_string())?;
                    for r in first..=last {
                        let res = gen_pure_matrix(pp(q), n, m, r, Mode::AllowOracle, oracle)
                            .map_err(|e| e.to_string())?;
                        let g0 = res.g0.unwrap_or_default();
                        ok &= res.value() == Some(g) && g0 + offset == g;
                    }
                }
            }
            Ok((ok, detail))
        })();
        report.push(format!("interval laws at (q={q},n={n},m={m},g={g})"), outcome);
    }

    for &(q, n, m) in &[(2u64, 1u64, 2u64), (3, 2, 1), (2, 3, 1)] {
        let outcome = (|| -> Result<(bool, String), String> {
            let mut ok = true;
            let top = if m == 1 { 4 } else { 2 };
            for g in 1..=top {
                let cur = intervals(pp(q), n, m, g, Mode::AllowOracle, oracle).map_err(|e| e.to_string())?;
                let next = intervals(pp(q), n, m, g + 1, Mode::AllowOracle, oracle).map_err(|e| e.to_string())?;
                ok &= adjacent_law(&cur, &next) == Some(true);
            }
            Ok((ok, format!("g = 1..={top}")))
        })();
        report.push(format!("adjacent sets tile the boundary range at (q={q},n={n},m={m})"), outcome);
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Formula, Suite::Bounds, Suite::Orbits, Suite::Intervals, Suite::All] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn fault_is_detected() {
        let cfg = VerifyConfig {
            etale_limit: 1000,
            flip_moebius_sign: true,
        };
        let checks = run(Suite::Formula, &cfg, &Oracle::default());
        assert!(!all_passed(&checks));
        let cfg = VerifyConfig {
            etale_limit: 1000,
            flip_moebius_sign: false,
        };
        assert!(all_passed(&run(Suite::Formula, &cfg, &Oracle::default())));
    }

    #[test]
    fn orbits_suite_passes() {
        let checks = run(Suite::Orbits, &VerifyConfig::default(), &Oracle::default());
        assert!(all_passed(&checks), "{checks:#?}");
    }
}
