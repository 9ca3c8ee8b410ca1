//! Check suites over single instances and instance grids, seeded objective
//! generation, and the grid mini-language used by the command line.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cuts::{certify_facet, family_1212_all_shifts, full_description_report, y_count_cuts, z_count_cuts};
use crate::disjunctive::{build_phat_with, lemma_block_check, max_over, partition_z, phat_hull_check, BlockRows};
use crate::error::{invalid, Error, Result};
use crate::expanded::{build_qprime, od_paths, switch_sets};
use crate::instance::{
    derive_startups, enumerate_z, is_feasible, startup_count_range, startup_counts, construct_witness, Instance,
    YZPoint,
};
use crate::netflow::{build_q, integral_projection, projection_contains};
use crate::rat::Rat;
use crate::ratpoly::{membership_in_conv, DenseOutcome, ObjectiveSense, PreparedLp};
use crate::yzform::{build_p, integral_points_with_limit, yz_variables};

/// Seed used when neither `--seed` nor `CYCLIC_RUNPOLY_SEED` is given.
pub const DEFAULT_SEED: u64 = 0x00C0_FFEE;
pub const DEFAULT_HULL_OBJECTIVES: usize = 50;
pub const DEFAULT_SWEEP_OBJECTIVES: usize = 200;
pub const DEFAULT_LIMIT_N: usize = 8;

/// `count` integer objectives of length `dim` with entries in `[-10, 10]`.
pub fn seeded_objectives(dim: usize, count: usize, seed: u64) -> Vec<Vec<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..dim).map(|_| rng.gen_range(-10..=10)).collect()).collect()
}

/// Random instances with at least one non-constant bound vector, all four
/// vectors weakly monotone and bounded by 3, and a nonempty feasible set.
pub fn seeded_monotone_instances(count: usize, n_lo: usize, n_hi: usize, seed: u64) -> Vec<Instance> {
    assert!(4 <= n_lo && n_lo <= n_hi, "horizon range must start at 4");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(n_lo..=n_hi);
        let lower: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=2)).collect();
        let upper: Vec<usize> = lower.iter().map(|&a| a + rng.gen_range(0..=1)).collect();
        let off_lower: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=2)).collect();
        let off_upper: Vec<usize> = off_lower.iter().map(|&g| g + rng.gen_range(0..=1)).collect();
        let Ok(inst) = Instance::new(n, lower, upper, off_lower, off_upper) else { continue };
        if inst.constant_bounds().is_some() || build_p(&inst).is_err() {
            continue;
        }
        if enumerate_z(&inst).map_or(true, |z| z.is_empty()) {
            continue;
        }
        out.push(inst);
    }
    out
}

/// Expands a grid such as `n=4..8; const=(1,2,1,2)|(1,3,1,3)` or
/// `n=3..9; const=all<=3`. Tuples that do not fit a horizon are skipped.
pub fn parse_grid(grid: &str) -> Result<Vec<Instance>> {
    let mut horizons: Option<Vec<usize>> = None;
    let mut tuples: Option<Vec<(usize, usize, usize, usize)>> = None;
    for part in grid.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value in {part:?}")))?;
        match key.trim() {
            "n" => horizons = Some(parse_horizons(value.trim())?),
            "const" => tuples = Some(parse_tuples(value.trim())?),
            other => return Err(Error::Parse(format!("unknown grid key {other:?}"))),
        }
    }
    let horizons = horizons.ok_or_else(|| Error::Parse("grid needs n=".into()))?;
    let tuples = tuples.ok_or_else(|| Error::Parse("grid needs const=".into()))?;
    let mut out = Vec::new();
    for &n in &horizons {
        for &(a, b, g, d) in &tuples {
            if b < n && d < n {
                out.push(Instance::constant(n, (a, b, g, d))?);
            }
        }
    }
    Ok(out)
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| Error::Parse(format!("not a nonnegative integer: {s:?}")))
}

fn parse_horizons(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in s.split(',') {
        match item.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi) = (parse_usize(lo)?, parse_usize(hi.trim_start_matches('='))?);
                if lo > hi {
                    return Err(Error::Parse(format!("empty range {item:?}")));
                }
                out.extend(lo..=hi);
            }
            None => out.push(parse_usize(item)?),
        }
    }
    Ok(out)
}

fn parse_tuples(s: &str) -> Result<Vec<(usize, usize, usize, usize)>> {
    if let Some(cap) = s.strip_prefix("all<=") {
        let cap = parse_usize(cap)?;
        let mut out = Vec::new();
        for a in 1..=cap {
            for b in a..=cap {
                for g in 1..=cap {
                    for d in g..=cap {
                        out.push((a, b, g, d));
                    }
                }
            }
        }
        return Ok(out);
    }
    s.split('|')
        .map(|t| {
            let inner = t.trim().trim_start_matches('(').trim_end_matches(')');
            let v: Vec<usize> = inner.split(',').map(parse_usize).collect::<Result<_>>()?;
            match v[..] {
                [a, b, g, d] => Ok((a, b, g, d)),
                _ => Err(Error::Parse(format!("bound tuple needs four entries: {t:?}"))),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Prop1,
    Prop2,
    Prop6,
    QPrimeHull,
    LemmaBlocks,
    PHatHull,
    Cuts,
    FullDesc,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Prop1,
        Suite::Prop2,
        Suite::Prop6,
        Suite::QPrimeHull,
        Suite::LemmaBlocks,
        Suite::PHatHull,
        Suite::Cuts,
        Suite::FullDesc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Prop1 => "prop1",
            Suite::Prop2 => "prop2",
            Suite::Prop6 => "prop6",
            Suite::QPrimeHull => "qprime-hull",
            Suite::LemmaBlocks => "lemma-blocks",
            Suite::PHatHull => "phat-hull",
            Suite::Cuts => "cuts",
            Suite::FullDesc => "full-desc",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| invalid(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seed: u64,
    pub hull_objectives: usize,
    pub sweep_objectives: usize,
    pub limit_n: usize,
    pub block_rows: BlockRows,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: DEFAULT_SEED,
            hull_objectives: DEFAULT_HULL_OBJECTIVES,
            sweep_objectives: DEFAULT_SWEEP_OBJECTIVES,
            limit_n: DEFAULT_LIMIT_N,
            block_rows: BlockRows::AsStated,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub check: String,
    pub detail: Value,
}

/// Outcome of one suite on one instance. Wall time is kept out of the
/// serialized form so reports compare byte for byte across runs.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub instance: String,
    pub passed: usize,
    pub failed: usize,
    /// Seed of the objective generator, for suites that use one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<Value>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl CheckReport {
    fn new(suite: Suite, inst: &Instance) -> Self {
        CheckReport {
            suite: suite.name().to_string(),
            instance: inst.descriptor(),
            passed: 0,
            failed: 0,
            seed: None,
            witnesses: Vec::new(),
            notes: Vec::new(),
            records: Vec::new(),
            wall_time: Duration::ZERO,
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    fn check(&mut self, ok: bool, name: &str, detail: impl FnOnce() -> Value) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            self.witnesses.push(Witness { check: name.to_string(), detail: detail() });
        }
    }

    pub fn summary_line(&self) -> String {
        let seed = self.seed.map(|s| format!(" (seed {s:#x})")).unwrap_or_default();
        format!(
            "{} [{}] {}: {} passed, {} failed{seed}",
            if self.ok() { "PASS" } else { "FAIL" },
            self.suite,
            self.instance,
            self.passed,
            self.failed
        )
    }
}

fn point_json(p: &YZPoint) -> Value {
    json!(p.to_string())
}

fn oracle_feasible(inst: &Instance, p: &YZPoint) -> bool {
    match (p.states(), p.startups()) {
        (Some(y), Some(z)) => is_feasible(inst, &y) && derive_startups(&y) == z,
        _ => false,
    }
}

/// `y = (1, ½, 1, ½, …)`, `z = (½, 0, ½, 0, …)` for even `n`.
pub fn alternating_half_point(n: usize) -> Option<YZPoint> {
    if n % 2 != 0 {
        return None;
    }
    let half = Rat::new(1, 2);
    let y = (0..n).map(|t| if t % 2 == 0 { Rat::one() } else { half.clone() }).collect();
    let z = (0..n).map(|t| if t % 2 == 0 { half.clone() } else { Rat::zero() }).collect();
    Some(YZPoint { y, z })
}

fn in_hull(z: &[YZPoint], p: &YZPoint) -> Result<bool> {
    if z.is_empty() {
        return Ok(false);
    }
    membership_in_conv(&z.iter().map(YZPoint::to_vec).collect::<Vec<_>>(), &p.to_vec())
}

/// Points of `proj(Q)` that lie outside the hull of the feasible set: the
/// alternating half point when it applies, and every LP optimum over `Q`
/// whose value beats the enumerated maximum.
fn fractional_q_points(inst: &Instance, z: &[YZPoint], objectives: &[Vec<i64>]) -> Result<Vec<YZPoint>> {
    let q = build_q(inst);
    let compiled = q.poly.compile();
    let cols = q.yz_columns();
    let lp = PreparedLp::new(&compiled);
    let mut found = BTreeSet::new();
    if let Some(p) = alternating_half_point(inst.n) {
        if projection_contains(&compiled, &cols, &p) && !in_hull(z, &p)? {
            found.insert(p);
        }
    }
    for c in objectives {
        let mut obj = vec![Rat::zero(); compiled.nvars];
        for (&j, &a) in cols.iter().zip(c) {
            obj[j] = Rat::from_int(a);
        }
        if let DenseOutcome::Optimal { value, x } = lp.solve(&obj, ObjectiveSense::Maximize) {
            if max_over(z, c).map_or(true, |m| value > m) {
                found.insert(YZPoint::from_vec(&cols.iter().map(|&j| x[j].clone()).collect::<Vec<_>>()));
            }
        }
    }
    Ok(found.into_iter().collect())
}

fn guard(inst: &Instance, opts: &SuiteOptions) -> Result<()> {
    if inst.n > opts.limit_n {
        return Err(Error::ResourceLimit(format!(
            "n={} exceeds the desk-scale limit n<={}; lower n or raise --limit-n",
            inst.n, opts.limit_n
        )));
    }
    Ok(())
}

/// Runs one suite on one instance.
pub fn run_suite(suite: Suite, inst: &Instance, opts: &SuiteOptions) -> Result<CheckReport> {
    guard(inst, opts)?;
    let start = Instant::now();
    let mut r = CheckReport::new(suite, inst);
    if matches!(suite, Suite::QPrimeHull | Suite::LemmaBlocks | Suite::PHatHull) {
        r.seed = Some(opts.seed);
    }
    match suite {
        Suite::Prop1 => prop1(inst, &mut r)?,
        Suite::Prop2 => prop2(inst, opts, &mut r)?,
        Suite::Prop6 => prop6(inst, opts, &mut r)?,
        Suite::QPrimeHull => qprime_hull(inst, opts, &mut r)?,
        Suite::LemmaBlocks => lemma_blocks(inst, opts, &mut r)?,
        Suite::PHatHull => phat_hull(inst, opts, &mut r)?,
        Suite::Cuts => cuts(inst, &mut r)?,
        Suite::FullDesc => full_desc(inst, &mut r)?,
    }
    r.wall_time = start.elapsed();
    Ok(r)
}

/// Runs one suite over a list of instances, in order.
pub fn run_suite_on_grid(suite: Suite, instances: &[Instance], opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    instances.iter().map(|inst| run_suite(suite, inst, opts)).collect()
}

fn set_diff(a: &[YZPoint], b: &[YZPoint]) -> Vec<YZPoint> {
    let b: BTreeSet<&YZPoint> = b.iter().collect();
    a.iter().filter(|p| !b.contains(p)).cloned().collect()
}

fn compare_sets(r: &mut CheckReport, name: &str, found: &[YZPoint], z: &[YZPoint]) {
    let extra = set_diff(found, z);
    let missing = set_diff(z, found);
    r.check(extra.is_empty() && missing.is_empty(), name, || {
        json!({
            "not_feasible": extra.iter().map(point_json).collect::<Vec<_>>(),
            "missing": missing.iter().map(point_json).collect::<Vec<_>>(),
        })
    });
}

fn prop1(inst: &Instance, r: &mut CheckReport) -> Result<()> {
    let z = enumerate_z(inst)?;
    let counts: Vec<usize> = startup_counts(&z).into_iter().collect();
    let range = startup_count_range(inst)?;
    r.check(counts == range, "startup_counts", || json!({ "enumerated": counts, "range": range }));
    for &k in &range {
        let outcome = construct_witness(inst, k);
        let good = matches!(&outcome, Ok(p) if oracle_feasible(inst, p) && p.startup_count() == Rat::from(k));
        r.check(good, "witness", || {
            json!({ "k": k, "result": outcome.as_ref().map(|p| p.to_string()).map_err(|e| e.to_string()) })
        });
    }
    r.notes.push(format!("|Z|={} start-up counts {:?}", z.len(), range));
    Ok(())
}

fn prop2(inst: &Instance, opts: &SuiteOptions, r: &mut CheckReport) -> Result<()> {
    let found = integral_projection(inst, opts.limit_n)?;
    let z = enumerate_z(inst)?;
    compare_sets(r, "integral_projection", &found, &z);
    Ok(())
}

fn prop6(inst: &Instance, opts: &SuiteOptions, r: &mut CheckReport) -> Result<()> {
    let pf = build_p(inst)?;
    let found = integral_points_with_limit(&pf, opts.limit_n)?;
    let z = enumerate_z(inst)?;
    compare_sets(r, "integral_points", &found, &z);
    r.notes.push(format!("P has {} rows after dedup ({} emitted)", pf.poly.inequalities.len(), pf.raw_rows));
    Ok(())
}

fn qprime_hull(inst: &Instance, opts: &SuiteOptions, r: &mut CheckReport) -> Result<()> {
    let n = inst.n;
    let z = enumerate_z(inst)?;
    let model = build_qprime(inst);
    let compiled = model.poly.compile();
    let cols = model.yz_columns();
    let lp = PreparedLp::new(&compiled);
    let (t0, t1) = switch_sets(inst);
    r.notes.push(format!("T0={t0:?} T1={t1:?} arcs={} rows={}", model.network.arcs.len(), compiled.eq.len() + compiled.ineq.len()));

    let yz_objectives = seeded_objectives(2 * n, opts.sweep_objectives, opts.seed);
    for c in &yz_objectives {
        let mut obj = vec![Rat::zero(); compiled.nvars];
        for (&j, &a) in cols.iter().zip(c) {
            obj[j] = Rat::from_int(a);
        }
        let expected = max_over(&z, c);
        match lp.solve(&obj, ObjectiveSense::Maximize) {
            DenseOutcome::Optimal { value, x } => {
                let p = YZPoint::from_vec(&cols.iter().map(|&j| x[j].clone()).collect::<Vec<_>>());
                let good = oracle_feasible(inst, &p) && expected.as_ref() == Some(&value);
                r.check(good, "yz_objective", || {
                    json!({ "objective": c, "lp_value": value, "enumerated": expected, "point": point_json(&p) })
                });
            }
            DenseOutcome::Infeasible => {
                r.check(z.is_empty(), "yz_objective", || json!({ "objective": c, "lp": "infeasible" }))
            }
            DenseOutcome::Unbounded => return Err(Error::Unbounded),
        }
    }

    // Objectives over every column, compared with the best O-D path.
    let lifted: Vec<Vec<Rat>> = od_paths(&model.network)
        .iter()
        .map(|p| model.lift_path(p).and_then(|pt| model.poly.dense(&pt)))
        .collect::<Result<_>>()?;
    let full_objectives = seeded_objectives(compiled.nvars, opts.sweep_objectives, opts.seed ^ 0x5A5A);
    for c in &full_objectives {
        let obj: Vec<Rat> = c.iter().map(|&a| Rat::from_int(a)).collect();
        let expected: Option<Rat> =
            lifted.iter().map(|x| x.iter().zip(&obj).map(|(a, b)| a * b).sum::<Rat>()).max();
        match lp.solve(&obj, ObjectiveSense::Maximize) {
            DenseOutcome::Optimal { value, x } => {
                let p = YZPoint::from_vec(&cols.iter().map(|&j| x[j].clone()).collect::<Vec<_>>());
                let integral_arcs = x[..cols[0]].iter().all(Rat::is_integer);
                let good = integral_arcs && oracle_feasible(inst, &p) && expected.as_ref() == Some(&value);
                r.check(good, "full_objective", || {
                    json!({ "objective": c, "lp_value": value, "best_path": expected, "point": point_json(&p) })
                });
            }
            DenseOutcome::Infeasible => {
                r.check(lifted.is_empty(), "full_objective", || json!({ "objective": c, "lp": "infeasible" }))
            }
            DenseOutcome::Unbounded => return Err(Error::Unbounded),
        }
    }

    for p in fractional_q_points(inst, &z, &yz_objectives)? {
        let excluded = !projection_contains(&compiled, &cols, &p);
        r.check(excluded, "fractional_q_point_excluded", || json!({ "point": point_json(&p) }));
        if excluded {
            r.notes.push(format!("fractional point of proj(Q) excluded from proj(Q'): {p}"));
        }
    }
    Ok(())
}

fn lemma_blocks(inst: &Instance, opts: &SuiteOptions, r: &mut CheckReport) -> Result<()> {
    let z = enumerate_z(inst)?;
    let parts = partition_z(inst)?;
    let mut all: Vec<YZPoint> = parts.values().flatten().cloned().collect();
    let total = all.len();
    all.sort();
    all.dedup();
    let disjoint = all.len() == total;
    let mut sorted = z.clone();
    sorted.sort();
    r.check(disjoint && all == sorted, "partition", || {
        json!({ "parts_total": total, "distinct": all.len(), "feasible": z.len() })
    });
    let objectives = seeded_objectives(2 * inst.n, opts.hull_objectives, opts.seed);
    for b in lemma_block_check(inst, &objectives, opts.block_rows)? {
        r.check(b.mismatch.is_none(), "block", || {
            json!({ "branch": b.branch, "block_size": b.block_size, "mismatch": b.mismatch })
        });
    }
    r.notes.push(format!("block rows {:?}, {} parts", opts.block_rows, parts.len()));
    Ok(())
}

fn phat_hull(inst: &Instance, opts: &SuiteOptions, r: &mut CheckReport) -> Result<()> {
    let z = enumerate_z(inst)?;
    let objectives = seeded_objectives(2 * inst.n, opts.hull_objectives, opts.seed);
    let h = phat_hull_check(inst, &objectives, opts.block_rows)?;
    r.check(h.mismatch.is_none(), "objectives", || json!({ "mismatch": h.mismatch }));
    r.check(h.unliftable.is_none(), "liftable", || {
        json!({ "point": h.unliftable.as_ref().map(point_json) })
    });
    let phat = build_phat_with(inst, opts.block_rows)?;
    let compiled = phat.compile();
    let cols: Vec<usize> =
        yz_variables(inst.n).iter().map(|v| phat.var_index(v).expect("declared")).collect();
    for p in fractional_q_points(inst, &z, &objectives)? {
        let excluded = !projection_contains(&compiled, &cols, &p);
        r.check(excluded, "fractional_q_point_excluded", || json!({ "point": point_json(&p) }));
        if excluded {
            r.notes.push(format!("fractional point of proj(Q) excluded from P-hat: {p}"));
        }
    }
    r.notes.push(format!("block rows {:?}, {} variables", opts.block_rows, phat.dim()));
    Ok(())
}

/// Dimension conditions under which both start-up count cuts are facets.
pub fn count_cut_facet_conditions(inst: &Instance) -> bool {
    let Some((a, b, g, d)) = inst.constant_bounds() else { return false };
    let n = inst.n;
    a < b && g < d && n / (a + g) > n.div_ceil(b + d) && n % (a + g) != 0
}

fn cuts(inst: &Instance, r: &mut CheckReport) -> Result<()> {
    let (ub, lb) = z_count_cuts(inst)?;
    let (ylb, yub) = y_count_cuts(inst)?;
    let mut list = vec![ub, lb, ylb, yub];
    if inst.constant_bounds() == Some((1, 2, 1, 2)) {
        list.extend(family_1212_all_shifts(inst)?);
    }
    if enumerate_z(inst)?.is_empty() {
        r.notes.push("empty feasible set: facet status undefined".into());
        return Ok(());
    }
    let facet_claim = count_cut_facet_conditions(inst);
    for (i, cut) in list.iter().enumerate() {
        let cert = certify_facet(inst, cut)?;
        r.check(cert.valid, "valid", || json!({ "cut": cut.normalized().to_string() }));
        if i < 2 && facet_claim {
            r.check(cert.is_facet && cert.dim_pi == 2 * inst.n, "count_facet", || {
                json!({ "cut": cut.normalized().to_string(), "dim_pi": cert.dim_pi, "tight": cert.tight_points.len() })
            });
        }
        r.records.push(json!({
            "cut": cert.cut.normalized().to_string(),
            "valid": cert.valid,
            "tight_count": cert.tight_points.len(),
            "dim_pi": cert.dim_pi,
            "is_facet": cert.is_facet,
            "label": cert.cut.label,
        }));
    }
    Ok(())
}

/// The inequality system whose hull property is asserted for `inst`, if any.
pub fn claimed_description(inst: &Instance) -> Result<Option<Vec<crate::ratpoly::LinIneq>>> {
    if inst.constant_bounds() != Some((1, 2, 1, 2)) {
        return Ok(None);
    }
    let mut rows: Vec<_> = build_p(inst)?.poly.inequalities;
    let (ub, lb) = z_count_cuts(inst)?;
    match inst.n {
        4 | 5 => rows.extend([ub, lb]),
        6 => {
            rows.push(lb);
            rows.extend(family_1212_all_shifts(inst)?);
        }
        _ => return Ok(None),
    }
    Ok(Some(rows))
}

fn full_desc(inst: &Instance, r: &mut CheckReport) -> Result<()> {
    let Some(system) = claimed_description(inst)? else {
        r.notes.push("no description is asserted for this instance".into());
        return Ok(());
    };
    let rep = full_description_report(inst, &system)?;
    r.check(rep.holds(), "description", || {
        json!({
            "vertices": rep.vertex_count,
            "bad_vertex": rep.bad_vertex.as_ref().map(point_json),
            "excluded_point": rep.excluded_point.as_ref().map(point_json),
        })
    });
    r.notes.push(format!("{} rows, {} vertices", system.len(), rep.vertex_count));
    Ok(())
}
