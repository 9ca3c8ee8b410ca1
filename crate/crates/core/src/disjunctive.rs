//! Partition of the feasible set by the last switch before the wrap, the
//! non-cyclic block polytopes with scaling variable `lambda`, and their
//! disjunctive union `P̂`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::expanded::switch_sets;
use crate::instance::{enumerate_z, Instance, YZPoint};
use crate::rat::Rat;
use crate::ratpoly::{CompiledPoly, DenseOutcome, HPolytope, LinIneq, ObjectiveSense, PreparedLp};
use crate::yzform::{y_var, yz_variables, z_var};

/// Branch key `(i, tau)`: `i = 0` when the horizon ends in an on-run that
/// started at `tau`, `i = 1` for an off-run.
pub type Branch = (u8, usize);

/// Feasible points grouped by branch. Every branch of `T0 × {0}` and
/// `T1 × {1}` has an entry, possibly empty.
pub fn partition_z(inst: &Instance) -> Result<BTreeMap<Branch, Vec<YZPoint>>> {
    let (t0, t1) = switch_sets(inst);
    let mut blocks: BTreeMap<Branch, Vec<YZPoint>> =
        t0.iter().map(|&t| ((0, t), Vec::new())).chain(t1.iter().map(|&t| ((1, t), Vec::new()))).collect();
    for p in enumerate_z(inst)? {
        let key = branch_of(&p.states().expect("enumerated points are binary"));
        blocks
            .get_mut(&key)
            .ok_or_else(|| invalid(format!("point {p} falls in branch {key:?} outside T0/T1")))?
            .push(p);
    }
    Ok(blocks)
}

/// Branch of a binary state vector that has both states.
pub fn branch_of(y: &[u8]) -> Branch {
    let n = y.len();
    let last = y[n - 1];
    let mut tau = n - 1;
    while tau > 0 && y[tau - 1] == last {
        tau -= 1;
    }
    (1 - last, tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundaryParams {
    pub i: u8,
    pub tau: usize,
    /// `(alpha, beta, gamma, delta)` for the extra period `-1`.
    pub eps_minus1: [usize; 4],
}

impl BoundaryParams {
    /// The four bound vectors over `[-1, n-1]`; position 0 is period `-1`.
    pub fn extended(&self, inst: &Instance) -> [Vec<usize>; 4] {
        let ext = |first: usize, v: &[usize]| std::iter::once(first).chain(v.iter().copied()).collect();
        let [a, b, g, d] = self.eps_minus1;
        [ext(a, &inst.alpha), ext(b, &inst.beta), ext(g, &inst.gamma), ext(d, &inst.delta)]
    }
}

pub fn boundary_params(inst: &Instance, i: u8, tau: usize) -> Result<BoundaryParams> {
    let (t0, t1) = switch_sets(inst);
    let n = inst.n;
    let wrap_len = |start: usize, len: usize| (start + len).saturating_sub(n - 1);
    let eps_minus1 = match i {
        0 if t0.contains(&tau) => [
            wrap_len(tau, inst.alpha[tau]).max(1),
            wrap_len(tau, inst.beta[tau]),
            inst.gamma[n - 1],
            inst.delta[n - 1],
        ],
        1 if t1.contains(&tau) => [
            inst.alpha[n - 1],
            inst.beta[n - 1],
            wrap_len(tau, inst.gamma[tau]).max(1),
            wrap_len(tau, inst.delta[tau]),
        ],
        0 | 1 => return Err(invalid(format!("tau={tau} is not in T{i}"))),
        _ => return Err(invalid(format!("branch index {i} must be 0 or 1"))),
    };
    Ok(BoundaryParams { i, tau, eps_minus1 })
}

/// Non-cyclic weak monotonicity `eps[k+1] ≥ eps[k] − 1` on an extended vector.
pub fn extended_monotone(eps_ext: &[usize]) -> bool {
    eps_ext.windows(2).all(|w| w[1] + 1 >= w[0])
}

/// `min{k ∈ [-1, t] : k + eps_k ≥ t + 1}` for an extended vector whose
/// position 0 holds period `-1`.
pub fn s_prime(eps_ext: &[usize], t: usize) -> Result<isize> {
    if !extended_monotone(eps_ext) {
        return Err(invalid("extended bound vector violates weak monotonicity"));
    }
    if t + 1 >= eps_ext.len() {
        return Err(invalid(format!("period {t} outside 0..{}", eps_ext.len() - 1)));
    }
    let target = t as isize + 1;
    Ok((-1..=t as isize)
        .find(|&k| k + eps_ext[(k + 1) as usize] as isize >= target)
        .expect("k = t always qualifies"))
}

/// Variable names for one block copy.
#[derive(Debug, Clone)]
pub struct BlockNames {
    suffix: String,
}

impl BlockNames {
    fn plain() -> Self {
        BlockNames { suffix: String::new() }
    }

    fn scoped(branch: Branch) -> Self {
        BlockNames { suffix: format!("__{}_{}", branch.0, branch.1) }
    }

    fn index(k: isize) -> String {
        if k < 0 { "m1".to_string() } else { k.to_string() }
    }

    pub fn y(&self, k: isize) -> String {
        format!("y_{}{}", Self::index(k), self.suffix)
    }

    pub fn z(&self, k: isize) -> String {
        format!("z_{}{}", Self::index(k), self.suffix)
    }

    pub fn lambda(&self) -> String {
        format!("lambda{}", self.suffix)
    }

    fn all(&self, n: usize) -> Vec<String> {
        let periods = || -1..n as isize;
        periods().map(|k| self.y(k)).chain(periods().map(|k| self.z(k))).chain([self.lambda()]).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockPolytope {
    pub poly: HPolytope,
    pub branch: Branch,
    pub params: BoundaryParams,
    #[serde(skip)]
    names: Option<BlockNames>,
}

impl BlockPolytope {
    fn names(&self) -> &BlockNames {
        self.names.as_ref().expect("set at construction")
    }

    pub fn lambda_var(&self) -> String {
        self.names().lambda()
    }

    /// Column indices of `y_0..y_{n-1}, z_0..z_{n-1}` (the projection that
    /// drops `y_{-1}`, `z_{-1}` and `lambda`).
    pub fn yz_columns(&self, n: usize) -> Vec<usize> {
        let nm = self.names();
        (0..n as isize)
            .map(|t| nm.y(t))
            .chain((0..n as isize).map(|t| nm.z(t)))
            .map(|v| self.poly.var_index(&v).expect("declared"))
            .collect()
    }
}

/// Which off-run rows a block carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum BlockRows {
    /// The `gamma`/`delta` window rows only where `s'(·, t) ≥ 0`.
    #[default]
    AsStated,
    /// Additionally `Σ_{k∈[-1,t]} z_k ≤ y_{-1}` wherever `s'(gamma, t) = -1`,
    /// which bounds the length of an off-run that is already running in
    /// period `-1`.
    WithInitialOffRun,
}

fn block_rows(inst: &Instance, params: &BoundaryParams, nm: &BlockNames, variant: BlockRows) -> Result<Vec<LinIneq>> {
    let n = inst.n;
    let [ea, eb, eg, ed] = params.extended(inst);
    for (name, v) in [("alpha", &ea), ("beta", &eb), ("gamma", &eg), ("delta", &ed)] {
        if !extended_monotone(v) {
            return Err(invalid(format!("extended {name} for branch ({}, {}) is not weakly monotone", params.i, params.tau)));
        }
    }
    let one = Rat::one;
    let neg = || -Rat::one();
    let lam = nm.lambda();
    let zsum = |s: isize, t: isize, c: Rat| (s..=t).map(move |k| (nm.z(k), c.clone()));
    let mut rows = vec![LinIneq::eq([(nm.z(-1), one()), (nm.y(-1), neg())], 0).with_label("start_copy")];
    for t in 0..n {
        let ti = t as isize;
        rows.push(
            LinIneq::le([(nm.y(ti), one()), (nm.y(ti - 1), neg()), (nm.z(ti), neg())], 0)
                .with_label(format!("switch_on_{t}")),
        );
        let sa = s_prime(&ea, t)?;
        rows.push(LinIneq::le(zsum(sa, ti, one()).chain([(nm.y(ti), neg())]), 0).with_label(format!("on_lower_{t}")));
        let sb = s_prime(&eb, t)?;
        rows.push(LinIneq::le(zsum(sb, ti, neg()).chain([(nm.y(ti), one())]), 0).with_label(format!("on_upper_{t}")));
        let sg = s_prime(&eg, t)?;
        if sg >= 0 {
            rows.push(
                LinIneq::le(zsum(sg, ti, one()).chain([(nm.y(sg - 1), one()), (lam.clone(), neg())]), 0)
                    .with_label(format!("off_lower_{t}")),
            );
        } else if variant == BlockRows::WithInitialOffRun {
            rows.push(
                LinIneq::le(zsum(-1, ti, one()).chain([(nm.y(-1), neg())]), 0).with_label(format!("initial_off_{t}")),
            );
        }
        let sd = s_prime(&ed, t)?;
        if sd >= 0 {
            rows.push(
                LinIneq::le(zsum(sd, ti, neg()).chain([(nm.y(sd - 1), neg()), (lam.clone(), one())]), 0)
                    .with_label(format!("off_upper_{t}")),
            );
        }
    }
    for t in 0..n as isize {
        for v in [nm.y(t), nm.z(t)] {
            rows.push(LinIneq::ge([(v.clone(), one())], 0).with_label(format!("{v}_lower")));
            rows.push(LinIneq::le([(v.clone(), one()), (lam.clone(), neg())], 0).with_label(format!("{v}_upper")));
        }
    }
    rows.push(LinIneq::ge([(lam.clone(), one())], 0).with_label("lambda_lower"));
    rows.push(LinIneq::le([(lam.clone(), one())], 1).with_label("lambda_upper"));

    let tau = params.tau as isize;
    let (edge, tail) = if params.i == 0 { (Rat::zero(), one()) } else { (one(), Rat::zero()) };
    let fix = |k: isize, coef: Rat| {
        LinIneq::eq([(nm.y(k), one()), (lam.clone(), -coef)], 0).with_label(format!("fix_{}", BlockNames::index(k)))
    };
    rows.push(fix(tau - 1, edge));
    for k in (tau..n as isize).chain([-1]) {
        rows.push(fix(k, tail.clone()));
    }
    Ok(rows)
}

fn block_with(inst: &Instance, i: u8, tau: usize, nm: BlockNames, variant: BlockRows) -> Result<BlockPolytope> {
    let params = boundary_params(inst, i, tau)?;
    let mut poly = HPolytope::new(nm.all(inst.n))?;
    poly.extend(block_rows(inst, &params, &nm, variant)?)?;
    Ok(BlockPolytope { poly, branch: (i, tau), params, names: Some(nm) })
}

/// The block `P̂^{(i,tau)}` over `y_{-1..n-1}, z_{-1..n-1}, lambda`.
pub fn build_block(inst: &Instance, i: u8, tau: usize) -> Result<BlockPolytope> {
    block_with(inst, i, tau, BlockNames::plain(), BlockRows::AsStated)
}

pub fn build_block_with(inst: &Instance, i: u8, tau: usize, variant: BlockRows) -> Result<BlockPolytope> {
    block_with(inst, i, tau, BlockNames::plain(), variant)
}

/// All blocks in branch order.
pub fn build_blocks(inst: &Instance) -> Result<Vec<BlockPolytope>> {
    build_blocks_with(inst, BlockRows::AsStated)
}

pub fn build_blocks_with(inst: &Instance, variant: BlockRows) -> Result<Vec<BlockPolytope>> {
    let (t0, t1) = switch_sets(inst);
    t0.iter()
        .map(|&t| (0u8, t))
        .chain(t1.iter().map(|&t| (1u8, t)))
        .map(|(i, t)| build_block_with(inst, i, t, variant))
        .collect()
}

/// The disjunctive formulation: one scaled copy per branch, `Σ lambda = 1`,
/// and `y_t`, `z_t` as the sums of the copies.
pub fn build_phat(inst: &Instance) -> Result<HPolytope> {
    build_phat_with(inst, BlockRows::AsStated)
}

pub fn build_phat_with(inst: &Instance, variant: BlockRows) -> Result<HPolytope> {
    let n = inst.n;
    let (t0, t1) = switch_sets(inst);
    let branches: Vec<Branch> = t0.iter().map(|&t| (0, t)).chain(t1.iter().map(|&t| (1, t))).collect();
    let mut vars = yz_variables(n);
    let names: Vec<BlockNames> = branches.iter().map(|&b| BlockNames::scoped(b)).collect();
    for nm in &names {
        vars.extend(nm.all(n));
    }
    let mut poly = HPolytope::new(vars)?;
    poly.add(LinIneq::eq(names.iter().map(|nm| (nm.lambda(), Rat::one())), 1).with_label("convexity"))?;
    for (&(i, tau), nm) in branches.iter().zip(&names) {
        let params = boundary_params(inst, i, tau)?;
        poly.extend(block_rows(inst, &params, nm, variant)?.into_iter().map(|r| {
            let label = r.label.clone().unwrap_or_default();
            r.with_label(format!("{label}__{i}_{tau}"))
        }))?;
    }
    for t in 0..n {
        let ti = t as isize;
        let ys = std::iter::once((y_var(t), -Rat::one())).chain(names.iter().map(|nm| (nm.y(ti), Rat::one())));
        poly.add(LinIneq::eq(ys, 0).with_label(format!("link_y_{t}")))?;
        let zs = std::iter::once((z_var(t), -Rat::one())).chain(names.iter().map(|nm| (nm.z(ti), Rat::one())));
        poly.add(LinIneq::eq(zs, 0).with_label(format!("link_z_{t}")))?;
    }
    Ok(poly)
}

fn dense_value(c: &[i64], p: &YZPoint) -> Rat {
    c.iter().zip(p.to_vec()).map(|(&a, x)| Rat::from_int(a) * x).sum()
}

/// Maximum of `c · (y, z)` over a point list, `None` if the list is empty.
pub fn max_over(points: &[YZPoint], c: &[i64]) -> Option<Rat> {
    points.iter().map(|p| dense_value(c, p)).max()
}

/// LP maximum of `c · (y, z)` over `compiled`, whose `(y, z)` columns are `cols`.
pub fn lp_max(lp: &PreparedLp, nvars: usize, cols: &[usize], c: &[i64]) -> Result<Option<Rat>> {
    let mut obj = vec![Rat::zero(); nvars];
    for (&j, &a) in cols.iter().zip(c) {
        obj[j] = Rat::from_int(a);
    }
    match lp.solve(&obj, ObjectiveSense::Maximize) {
        DenseOutcome::Optimal { value, .. } => Ok(Some(value)),
        DenseOutcome::Infeasible => Ok(None),
        DenseOutcome::Unbounded => Err(crate::error::Error::Unbounded),
    }
}

/// A disagreement between an LP optimum and an enumerated maximum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObjectiveMismatch {
    pub objective: Vec<i64>,
    pub lp_value: Option<Rat>,
    pub enumerated: Option<Rat>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockCheck {
    pub branch: Branch,
    pub block_size: usize,
    pub objectives: usize,
    pub mismatch: Option<ObjectiveMismatch>,
}

fn compare_objectives(
    compiled: &CompiledPoly,
    cols: &[usize],
    points: &[YZPoint],
    objectives: &[Vec<i64>],
) -> Result<Option<ObjectiveMismatch>> {
    let lp = PreparedLp::new(compiled);
    for c in objectives {
        let lp_value = lp_max(&lp, compiled.nvars, cols, c)?;
        let enumerated = max_over(points, c);
        if lp_value != enumerated {
            return Ok(Some(ObjectiveMismatch { objective: c.clone(), lp_value, enumerated }));
        }
    }
    Ok(None)
}

/// For every block, LP optima over the `lambda = 1` slice equal the maxima
/// over the corresponding part of the partition.
pub fn lemma_block_check(inst: &Instance, objectives: &[Vec<i64>], variant: BlockRows) -> Result<Vec<BlockCheck>> {
    let parts = partition_z(inst)?;
    let mut out = Vec::new();
    for block in build_blocks_with(inst, variant)? {
        let lam = block.poly.var_index(&block.lambda_var()).expect("declared");
        let compiled = block.poly.compile().with_fixed(&[(lam, Rat::one())]);
        let cols = block.yz_columns(inst.n);
        let points = &parts[&block.branch];
        let mismatch = compare_objectives(&compiled, &cols, points, objectives)?;
        out.push(BlockCheck { branch: block.branch, block_size: points.len(), objectives: objectives.len(), mismatch });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct HullCheck {
    pub objectives: usize,
    pub mismatch: Option<ObjectiveMismatch>,
    /// A feasible point that has no extension in the formulation.
    pub unliftable: Option<YZPoint>,
}

impl HullCheck {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none() && self.unliftable.is_none()
    }
}

/// Whether `(y, z)` extends to a point of `P̂`.
pub fn phat_contains(phat: &HPolytope, p: &YZPoint) -> bool {
    let n = p.n();
    let cols: Vec<usize> = yz_variables(n).iter().map(|v| phat.var_index(v).expect("declared")).collect();
    crate::netflow::projection_contains(&phat.compile(), &cols, p)
}

/// Objective-value comparison of `P̂` with the feasible set in both
/// directions, plus liftability of every feasible point.
pub fn phat_hull_check(inst: &Instance, objectives: &[Vec<i64>], variant: BlockRows) -> Result<HullCheck> {
    let phat = build_phat_with(inst, variant)?;
    let z = enumerate_z(inst)?;
    let compiled = phat.compile();
    let cols: Vec<usize> = (0..2 * inst.n).collect();
    let mismatch = compare_objectives(&compiled, &cols, &z, objectives)?;
    let unliftable = z.iter().find(|p| !crate::netflow::projection_contains(&compiled, &cols, p)).cloned();
    Ok(HullCheck { objectives: objectives.len(), mismatch, unliftable })
}
