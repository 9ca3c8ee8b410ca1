//! Acceptance run: one PASS/FAIL line per criterion, exact arithmetic
//! throughout. Criteria listed in `KNOWN_FAILURES` are expected to fail with
//! a concrete counterexample; the run exits nonzero if any other criterion
//! fails or if a known failure starts passing.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cyclic_runpoly::conjecture::{conjecture_check, Verdict};
use cyclic_runpoly::cuts::{certify_facet, full_description_report, y_count_cuts, z_count_cuts};
use cyclic_runpoly::disjunctive::{build_phat, partition_z, phat_contains};
use cyclic_runpoly::expanded::{build_expanded, od_paths, path_to_point, size_report, switch_sets};
use cyclic_runpoly::instance::{construct_witness, enumerate_z, startup_count_range};
use cyclic_runpoly::netflow::{
    build_network, cycle_from_nodes, cycle_to_point, fractional_vertex_certificate, integral_projection, Node,
};
use cyclic_runpoly::ratpoly::{membership_in_conv, DEFAULT_DD_DIMENSION_LIMIT};
use cyclic_runpoly::suites::{
    claimed_description, parse_grid, run_suite, seeded_monotone_instances, Suite, SuiteOptions, DEFAULT_SEED,
};
use cyclic_runpoly::yzform::{build_p, integral_points_with_limit};
use cyclic_runpoly::{Instance, Rat, YZPoint};

const KNOWN_FAILURES: &[usize] = &[9];

type Outcome = Result<String, String>;

/// Feasibility from the run decomposition, written without the library oracle.
fn runs_feasible(inst: &Instance, y: &[u8]) -> bool {
    let n = y.len();
    let ones = y.iter().filter(|&&v| v == 1).count();
    if ones == 0 || ones == n {
        return false;
    }
    for t in 0..n {
        if y[t] == y[(t + n - 1) % n] {
            continue;
        }
        let len = (0..n).take_while(|&k| y[(t + k) % n] == y[t]).count();
        let (lo, hi) = if y[t] == 1 { (inst.alpha[t], inst.beta[t]) } else { (inst.gamma[t], inst.delta[t]) };
        if len < lo || len > hi {
            return false;
        }
    }
    true
}

fn startups_of(y: &[u8]) -> Vec<u8> {
    let n = y.len();
    (0..n).map(|t| u8::from(y[t] == 1 && y[(t + n - 1) % n] == 0)).collect()
}

fn independent_z(inst: &Instance) -> BTreeSet<(Vec<u8>, Vec<u8>)> {
    let n = inst.n;
    (0u32..1 << n)
        .map(|m| (0..n).map(|t| ((m >> t) & 1) as u8).collect::<Vec<u8>>())
        .filter(|y| runs_feasible(inst, y))
        .map(|y| {
            let z = startups_of(&y);
            (y, z)
        })
        .collect()
}

fn as_bits(points: &[YZPoint]) -> BTreeSet<(Vec<u8>, Vec<u8>)> {
    points.iter().map(|p| (p.states().expect("binary"), p.startups().expect("binary"))).collect()
}

fn constant_grid(n_lo: usize, n_hi: usize) -> Vec<Instance> {
    parse_grid(&format!("n={n_lo}..{n_hi}; const=all<=3")).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: cyclic_runpoly::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn half() -> Rat {
    Rat::new(1, 2)
}

fn example_point() -> YZPoint {
    let (o, h, z) = (Rat::one(), half(), Rat::zero());
    YZPoint {
        y: vec![o.clone(), h.clone(), o.clone(), h.clone(), o, h.clone()],
        z: vec![h.clone(), z.clone(), h.clone(), z.clone(), h, z],
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let grid = constant_grid(3, 9);
    for inst in &grid {
        let (a, b, g, d) = inst.constant_bounds().unwrap();
        let z = lib(enumerate_z(inst))?;
        ensure(as_bits(&z) == independent_z(inst), || format!("{}: enumeration differs from run oracle", inst.descriptor()))?;
        let counts: Vec<usize> = z.iter().map(|p| p.startups().unwrap().iter().map(|&v| v as usize).sum()).collect::<BTreeSet<_>>().into_iter().collect();
        let expected: Vec<usize> = (1..=inst.n).filter(|&k| k * (a + g) <= inst.n && inst.n <= k * (b + d)).collect();
        let range = lib(startup_count_range(inst))?;
        ensure(counts == expected && range == expected, || {
            format!("{}: counts {counts:?}, range {range:?}, expected {expected:?}", inst.descriptor())
        })?;
        for &k in &range {
            let w = lib(construct_witness(inst, k))?;
            let y = w.states().unwrap();
            ensure(runs_feasible(inst, &y) && startups_of(&y) == w.startups().unwrap(), || {
                format!("{}: witness for k={k} infeasible", inst.descriptor())
            })?;
            ensure(startups_of(&y).iter().map(|&v| v as usize).sum::<usize>() == k, || format!("witness count for k={k}"))?;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(30), || format!("took {t:?}"))?;
    Ok(format!("{} instances, {:.1}s", grid.len(), t.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let inst = Instance::constant(6, (1, 2, 1, 2)).unwrap();
    let net = build_network(&inst);
    let nodes: Vec<Node> = [(0, 0), (1, 2), (0, 3), (1, 4)].iter().map(|&(i, t)| Node::new(i, t)).collect();
    let cycle = lib(cycle_from_nodes(&net, &nodes))?;
    let (_, p) = lib(cycle_to_point(&net, &cycle))?;
    let want = YZPoint::from_binary(&[1, 1, 0, 1, 0, 0], &[1, 0, 0, 1, 0, 0]);
    ensure(p == want, || format!("got {p}"))?;
    Ok(format!("{p}"))
}

fn criterion_3() -> Outcome {
    let inst = Instance::constant(6, (1, 3, 1, 3)).unwrap();
    let net = build_network(&inst);
    let nodes: Vec<Node> =
        [(0, 0), (1, 3), (0, 4), (1, 1), (0, 2), (1, 5)].iter().map(|&(i, t)| Node::new(i, t)).collect();
    let walk = lib(cycle_from_nodes(&net, &nodes))?;
    ensure(walk.len() == 6, || format!("walk has {} arcs", walk.len()))?;
    let cert = lib(fractional_vertex_certificate(&inst, &walk, &half()))?;
    ensure(cert.projection == example_point(), || format!("projection {}", cert.projection))?;
    ensure(cert.extreme, || "not extreme".into())?;
    let hull: Vec<Vec<Rat>> = lib(enumerate_z(&inst))?.iter().map(YZPoint::to_vec).collect();
    ensure(!lib(membership_in_conv(&hull, &cert.projection.to_vec()))?, || "projection lies in the hull".into())?;
    Ok(format!("extreme point of Q projecting to {} outside conv(Z)", cert.projection))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let grid = constant_grid(3, 7);
    for inst in &grid {
        let found = lib(integral_projection(inst, 7))?;
        ensure(as_bits(&found) == independent_z(inst), || format!("{}: integral projection differs", inst.descriptor()))?;
    }
    Ok(format!("{} instances, {:.1}s", grid.len(), start.elapsed().as_secs_f64()))
}

fn criterion_5() -> Outcome {
    let opts = SuiteOptions::default();
    let mut checks = 0;
    for b in [(1, 2, 1, 2), (1, 3, 1, 3)] {
        let inst = Instance::constant(6, b).unwrap();
        let r = lib(run_suite(Suite::QPrimeHull, &inst, &opts))?;
        ensure(r.ok(), || format!("{}: {:?}", inst.descriptor(), r.witnesses.first()))?;
        checks += r.passed;
    }
    let (t0, t1) = switch_sets(&Instance::constant(6, (1, 2, 1, 2)).unwrap());
    ensure(t0 == [4, 5] && t1 == [4, 5], || format!("T0={t0:?} T1={t1:?}"))?;
    Ok(format!("{checks} checks with 200 objectives per sweep, T0=T1={{4,5}}"))
}

fn criterion_6() -> Outcome {
    let grid = constant_grid(4, 7);
    let mut paths_total = 0;
    for inst in &grid {
        let net = build_expanded(inst, false);
        let paths = od_paths(&net);
        let z = independent_z(inst);
        let images: Vec<YZPoint> = paths.iter().map(|p| path_to_point(&net, p)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        let image = as_bits(&images);
        ensure(paths.len() == z.len() && image.len() == paths.len() && image == z, || {
            format!("{}: {} paths, {} distinct images, |Z|={}", inst.descriptor(), paths.len(), image.len(), z.len())
        })?;
        paths_total += paths.len();
    }
    Ok(format!("{} instances, {paths_total} paths", grid.len()))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut list = constant_grid(4, 8);
    let varying = seeded_monotone_instances(10, 4, 8, DEFAULT_SEED);
    list.extend(varying.iter().cloned());
    for inst in &list {
        let pf = lib(build_p(inst))?;
        let found = lib(integral_points_with_limit(&pf, 8))?;
        ensure(as_bits(&found) == independent_z(inst), || format!("{}: integral points of P differ", inst.descriptor()))?;
    }
    Ok(format!("{} instances ({} time-varying), {:.1}s", list.len(), varying.len(), start.elapsed().as_secs_f64()))
}

fn criterion_8() -> Outcome {
    let seven = Instance::constant(7, (1, 2, 1, 2)).unwrap();
    let (ub, lb) = lib(z_count_cuts(&seven))?;
    let (ylb, yub) = lib(y_count_cuts(&seven))?;
    let expect = [(&ub, "<= 3"), (&lb, "<= -2"), (&ylb, "<= -3"), (&yub, "<= 4")];
    for (cut, rhs) in expect {
        let c = lib(certify_facet(&seven, cut))?;
        let text = cut.normalized().to_string();
        ensure(text.ends_with(rhs), || format!("unexpected cut {text}"))?;
        ensure(c.dim_pi == 14 && c.valid && c.is_facet, || format!("{text}: dim {} facet {}", c.dim_pi, c.is_facet))?;
    }
    let six = Instance::constant(6, (1, 2, 1, 2)).unwrap();
    let (ub6, _) = lib(z_count_cuts(&six))?;
    ensure(ub6.normalized().to_string().ends_with("<= 3"), || "n=6 upper cut rhs".into())?;
    let c = lib(certify_facet(&six, &ub6))?;
    ensure(c.valid && !c.is_facet, || format!("n=6: valid {} facet {}", c.valid, c.is_facet))?;
    Ok("dim 14; four count cuts are facets at n=7; sum z <= 3 valid, not a facet at n=6".into())
}

fn criterion_9() -> Outcome {
    let mut failures = Vec::new();
    let mut timings = Vec::new();
    for n in [4, 5, 6] {
        let inst = Instance::constant(n, (1, 2, 1, 2)).unwrap();
        let system = lib(claimed_description(&inst))?.expect("asserted system");
        let start = Instant::now();
        let rep = lib(full_description_report(&inst, &system))?;
        let t = start.elapsed();
        timings.push(format!("n={n} {:.2}s", t.as_secs_f64()));
        if t > Duration::from_secs(300) {
            failures.push(format!("n={n} took {t:?}"));
        }
        if let Some(v) = &rep.bad_vertex {
            failures.push(format!("n={n}: {v} is a vertex but not a feasible sequence"));
        }
        if let Some(p) = &rep.excluded_point {
            failures.push(format!("n={n}: feasible {p} is cut off"));
        }
    }
    if failures.is_empty() {
        Ok(timings.join(", "))
    } else {
        Err(format!("{} ({})", failures.join("; "), timings.join(", ")))
    }
}

fn criterion_10() -> Outcome {
    let six = Instance::constant(6, (1, 2, 1, 2)).unwrap();
    let wide = Instance::constant(6, (1, 3, 1, 3)).unwrap();
    for inst in constant_grid(3, 8) {
        let parts = lib(partition_z(&inst))?;
        let mut seen = BTreeSet::new();
        for p in parts.values().flatten() {
            ensure(seen.insert(p.clone()), || format!("{}: {p} in two parts", inst.descriptor()))?;
        }
        ensure(as_bits(&seen.into_iter().collect::<Vec<_>>()) == independent_z(&inst), || {
            format!("{}: parts do not cover Z", inst.descriptor())
        })?;
    }
    let lemma = lib(run_suite(Suite::LemmaBlocks, &six, &SuiteOptions::default()))?;
    ensure(lemma.ok(), || format!("lemma: {:?}", lemma.witnesses.first()))?;
    let opts = SuiteOptions { hull_objectives: 200, ..SuiteOptions::default() };
    for inst in [&six, &wide] {
        let r = lib(run_suite(Suite::PHatHull, inst, &opts))?;
        ensure(r.ok(), || format!("{}: {:?}", inst.descriptor(), r.witnesses.first()))?;
    }
    let phat = lib(build_phat(&wide))?;
    ensure(!phat_contains(&phat, &example_point()), || "fractional example point lies in P-hat".into())?;
    Ok(format!("{} blocks checked; hull on 200 objectives; example point excluded", lemma.passed - 1))
}

/// Exact integer coefficients (highest degree first) of the polynomial of
/// degree at most `degree` through `(lo + i, values[i])`, if one exists.
fn fit_polynomial(lo: i64, values: &[i64], degree: usize) -> Option<Vec<i64>> {
    let mut residual: Vec<i64> = values.to_vec();
    let mut coeffs = Vec::new();
    for k in (0..=degree).rev() {
        let mut diffs = residual.clone();
        for _ in 0..k {
            diffs = diffs.windows(2).map(|w| w[1] - w[0]).collect();
        }
        let factorial: i64 = (1..=k as i64).product();
        if diffs.iter().any(|&d| d != diffs[0]) || diffs[0] % factorial != 0 {
            return None;
        }
        let lead = diffs[0] / factorial;
        for (i, r) in residual.iter_mut().enumerate() {
            *r -= lead * (lo + i as i64).pow(k as u32);
        }
        coeffs.push(lead);
    }
    residual.iter().all(|&r| r == 0).then_some(coeffs)
}

fn criterion_11() -> Outcome {
    let vars: Vec<i64> =
        (4..=12).map(|n| size_report(&Instance::constant(n, (1, 2, 1, 2)).unwrap()).variables as i64).collect();
    let linear = fit_polynomial(4, &vars, 1).ok_or_else(|| format!("variable counts {vars:?} are not affine in n"))?;
    let arcs: Vec<i64> = (4..=12)
        .map(|n| size_report(&Instance::constant(n, (1, n - 1, 1, n - 1)).unwrap()).arcs as i64)
        .collect();
    let cubic = fit_polynomial(4, &arcs, 3).ok_or_else(|| format!("arc counts {arcs:?} are not cubic in n"))?;
    let c = cubic[0];
    for (i, &a) in arcs.iter().enumerate() {
        let n = 4 + i as i64;
        ensure(a <= c * n.pow(3), || format!("n={n}: {a} arcs above {c} n^3"))?;
    }
    Ok(format!(
        "variables = {} n {} {}; wide-bound arcs have cubic coefficients {:?}, c = {c}",
        linear[0],
        if linear[1] < 0 { '-' } else { '+' },
        linear[1].abs(),
        cubic
    ))
}

fn criterion_12() -> Outcome {
    let five = Instance::constant(5, (1, 2, 1, 2)).unwrap();
    let r = lib(conjecture_check(&five, DEFAULT_DD_DIMENSION_LIMIT))?;
    ensure(r.verdict == Verdict::Equal, || format!("n=5: {}", r.verdict.as_str()))?;
    let mut tally = std::collections::BTreeMap::new();
    let grid = constant_grid(3, 6);
    for inst in &grid {
        let r = lib(conjecture_check(inst, DEFAULT_DD_DIMENSION_LIMIT))?;
        ensure(r.verdict.is_definite(), || format!("{}: inconclusive", inst.descriptor()))?;
        *tally.entry(r.verdict.as_str()).or_insert(0) += 1;
    }
    Ok(format!("n=5 equal; {} instances: {tally:?}", grid.len()))
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Outcome); 12] = [
        (1, "start-up count range and witnesses", criterion_1),
        (2, "dashed cycle of the small network", criterion_2),
        (3, "fractional vertex of Q", criterion_3),
        (4, "integral points of proj(Q)", criterion_4),
        (5, "Q' integrality and hull", criterion_5),
        (6, "O-D path bijection", criterion_6),
        (7, "integral points of P", criterion_7),
        (8, "count cut facets", criterion_8),
        (9, "full descriptions by double description", criterion_9),
        (10, "partition, block lemma, P-hat hull", criterion_10),
        (11, "size audit of the expanded network", criterion_11),
        (12, "conjecture experiment", criterion_12),
    ];
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for (id, name, f) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.contains(&id);
        match &outcome {
            Ok(detail) => {
                passed += 1;
                println!("criterion {id:>2}: PASS  {name}: {detail} [{secs:.1}s]");
                if known {
                    unexpected.push(format!("criterion {id} is listed as a known failure but passed"));
                }
            }
            Err(why) => {
                let tag = if known { " (known failure)" } else { "" };
                println!("criterion {id:>2}: FAIL  {name}: {why}{tag} [{secs:.1}s]");
                if !known {
                    unexpected.push(format!("criterion {id} failed"));
                }
            }
        }
    }
    println!("acceptance: {passed}/12 criteria pass; known failures: {KNOWN_FAILURES:?}");
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        for u in &unexpected {
            println!("unexpected: {u}");
        }
        ExitCode::FAILURE
    }
}
