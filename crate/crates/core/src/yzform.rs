//! The formulation `P` in the `(y, z)` space and its constant-bound rewrite.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{all_states, require_monotone, s_index, wrap, Instance, YZPoint};
use crate::rat::Rat;
use crate::ratpoly::{HPolytope, LinIneq, Point};

/// Largest horizon for which [`integral_points`] scans all `4^n` pairs by default.
pub const DEFAULT_SCAN_LIMIT: usize = 10;

pub fn y_var(t: usize) -> String {
    format!("y_{t}")
}

pub fn z_var(t: usize) -> String {
    format!("z_{t}")
}

/// Named form of a point, keyed `y_t` and `z_t`.
pub fn named_point(p: &YZPoint) -> Point {
    let n = p.n();
    (0..n)
        .map(|t| (y_var(t), p.y[t].clone()))
        .chain((0..n).map(|t| (z_var(t), p.z[t].clone())))
        .collect()
}

/// Variable list `y_0..y_{n-1}, z_0..z_{n-1}`.
pub fn yz_variables(n: usize) -> Vec<String> {
    (0..n).map(y_var).chain((0..n).map(z_var)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PFormulation {
    pub n: usize,
    pub poly: HPolytope,
    pub s_alpha: Vec<usize>,
    pub s_beta: Vec<usize>,
    pub s_gamma: Vec<usize>,
    pub s_delta: Vec<usize>,
    /// Rows emitted before deduplication: `5n` structural plus `4n` bounds.
    pub raw_rows: usize,
}

fn s_vector(eps: &[usize]) -> Result<Vec<usize>> {
    (0..eps.len()).map(|t| s_index(eps, t)).collect()
}

fn one() -> Rat {
    Rat::one()
}

fn neg() -> Rat {
    -Rat::one()
}

fn window(s: usize, t: usize, n: usize) -> impl Iterator<Item = usize> {
    let len = wrap(t as isize - s as isize, n) + 1;
    (0..len).map(move |i| (s + i) % n)
}

fn bound_rows(n: usize) -> Vec<LinIneq> {
    let mut rows = Vec::with_capacity(4 * n);
    for t in 0..n {
        for v in [y_var(t), z_var(t)] {
            rows.push(LinIneq::ge([(v.clone(), one())], 0).with_label(format!("{v}_lower")));
            rows.push(LinIneq::le([(v.clone(), one())], 1).with_label(format!("{v}_upper")));
        }
    }
    rows
}

fn switch_on_row(t: usize, n: usize) -> LinIneq {
    // z_t ≥ y_t − y_{t−1}
    LinIneq::le(
        [(y_var(t), one()), (y_var(wrap(t as isize - 1, n)), neg()), (z_var(t), neg())],
        0,
    )
    .with_label(format!("switch_on_{t}"))
}

fn finish(n: usize, rows: Vec<LinIneq>, s: [Vec<usize>; 4]) -> PFormulation {
    let mut poly = HPolytope::new(yz_variables(n)).expect("distinct names");
    let raw_rows = rows.len();
    poly.extend(rows).expect("rows use declared variables");
    poly.normalize_and_dedup();
    let [s_alpha, s_beta, s_gamma, s_delta] = s;
    PFormulation { n, poly, s_alpha, s_beta, s_gamma, s_delta, raw_rows }
}

/// `P` for a weakly monotone instance, with cyclic windows `[s(ε,t), t]`.
pub fn build_p(inst: &Instance) -> Result<PFormulation> {
    for (name, v) in [("alpha", &inst.alpha), ("beta", &inst.beta), ("gamma", &inst.gamma), ("delta", &inst.delta)] {
        require_monotone(name, v)?;
    }
    let n = inst.n;
    let sa = s_vector(&inst.alpha)?;
    let sb = s_vector(&inst.beta)?;
    let sg = s_vector(&inst.gamma)?;
    let sd = s_vector(&inst.delta)?;
    let zsum = |s: usize, t: usize, c: Rat| window(s, t, n).map(move |k| (z_var(k), c.clone()));
    let mut rows = Vec::with_capacity(9 * n);
    for t in 0..n {
        rows.push(switch_on_row(t, n));
        rows.push(
            LinIneq::le(zsum(sa[t], t, one()).chain([(y_var(t), neg())]), 0).with_label(format!("on_lower_{t}")),
        );
        rows.push(
            LinIneq::le(zsum(sb[t], t, neg()).chain([(y_var(t), one())]), 0).with_label(format!("on_upper_{t}")),
        );
        let before = wrap(sg[t] as isize - 1, n);
        rows.push(
            LinIneq::le(zsum(sg[t], t, one()).chain([(y_var(before), one())]), 1)
                .with_label(format!("off_lower_{t}")),
        );
        let before = wrap(sd[t] as isize - 1, n);
        rows.push(
            LinIneq::le(zsum(sd[t], t, neg()).chain([(y_var(before), neg())]), -1)
                .with_label(format!("off_upper_{t}")),
        );
    }
    rows.extend(bound_rows(n));
    Ok(finish(n, rows, [sa, sb, sg, sd]))
}

/// The same polytope written with fixed offsets, for constant bounds.
pub fn build_p_const(inst: &Instance) -> Result<PFormulation> {
    let (a, b, g, d) = inst.require_constant()?;
    let n = inst.n;
    let back = |t: usize, i: usize| wrap(t as isize - i as isize, n);
    let mut rows = Vec::with_capacity(9 * n);
    for t in 0..n {
        rows.push(switch_on_row(t, n));
        rows.push(
            LinIneq::le([(y_var(t), neg())].into_iter().chain((0..a).map(|i| (z_var(back(t, i)), one()))), 0)
                .with_label(format!("on_lower_{t}")),
        );
        rows.push(
            LinIneq::le([(y_var(t), one())].into_iter().chain((0..b).map(|i| (z_var(back(t, i)), neg()))), 0)
                .with_label(format!("on_upper_{t}")),
        );
        rows.push(
            LinIneq::le([(y_var(t), one())].into_iter().chain((1..=g).map(|i| (z_var((t + i) % n), one()))), 1)
                .with_label(format!("off_lower_{t}")),
        );
        rows.push(
            LinIneq::le([(y_var(t), neg())].into_iter().chain((1..=d).map(|i| (z_var((t + i) % n), neg()))), -1)
                .with_label(format!("off_upper_{t}")),
        );
    }
    rows.extend(bound_rows(n));
    let s = |e: usize| (0..n).map(|t| back(t, e - 1)).collect::<Vec<_>>();
    Ok(finish(n, rows, [s(a), s(b), s(g), s(d)]))
}

/// An inequality row in integer form over the `2n` columns `y, z`.
struct IntRow {
    coeffs: Vec<i64>,
    rhs: i64,
    eq: bool,
}

fn integer_rows(poly: &HPolytope) -> Result<Vec<IntRow>> {
    let m = poly.dim();
    let mut out = Vec::new();
    for c in poly.constraints() {
        let nf = c.normalized();
        let mut coeffs = vec![0i64; m];
        for (k, v) in &nf.coeffs {
            let j = poly.var_index(k).expect("declared");
            coeffs[j] = v.to_i64().ok_or_else(|| Error::ResourceLimit(format!("coefficient {v} too large")))?;
        }
        let rhs = nf.rhs.to_i64().ok_or_else(|| Error::ResourceLimit(format!("rhs {} too large", nf.rhs)))?;
        out.push(IntRow { coeffs, rhs, eq: nf.sense == crate::ratpoly::Relation::Eq });
    }
    Ok(out)
}

/// Binary points of a polytope over `y_0..y_{n-1}, z_0..z_{n-1}` (in that
/// variable order), found by scanning all `4^n` pairs.
pub fn binary_points(poly: &HPolytope, n: usize, limit_n: usize) -> Result<Vec<YZPoint>> {
    if poly.variables != yz_variables(n) {
        return Err(crate::error::invalid("polytope is not over y_0..y_{n-1}, z_0..z_{n-1}"));
    }
    if n > limit_n {
        return Err(Error::ResourceLimit(format!("scan of 4^{n} binary pairs exceeds limit n<={limit_n}")));
    }
    let rows = integer_rows(poly)?;
    let states: Vec<Vec<u8>> = all_states(n).collect();
    let mut partial = vec![0i64; rows.len()];
    let mut found = Vec::new();
    for y in &states {
        for (p, r) in partial.iter_mut().zip(&rows) {
            *p = (0..n).map(|t| r.coeffs[t] * i64::from(y[t])).sum();
        }
        for z in &states {
            let ok = rows.iter().zip(&partial).all(|(r, &p)| {
                let lhs = p + (0..n).map(|t| r.coeffs[n + t] * i64::from(z[t])).sum::<i64>();
                if r.eq { lhs == r.rhs } else { lhs <= r.rhs }
            });
            if ok {
                found.push(YZPoint::from_binary(y, z));
            }
        }
    }
    Ok(found)
}

/// `P ∩ {0,1}^{2n}` with the default scan limit.
pub fn integral_points(pf: &PFormulation) -> Result<Vec<YZPoint>> {
    integral_points_with_limit(pf, DEFAULT_SCAN_LIMIT)
}

pub fn integral_points_with_limit(pf: &PFormulation, limit_n: usize) -> Result<Vec<YZPoint>> {
    binary_points(&pf.poly, pf.n, limit_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{derive_startups, enumerate_z};
    use crate::ratpoly::membership_in_conv;

    fn half() -> Rat {
        Rat::new(1, 2)
    }

    #[test]
    fn integral_points_match_enumeration_small() {
        for n in 4..=7 {
            let inst = Instance::constant(n, (1, 2, 1, 2)).unwrap();
            let pf = build_p(&inst).unwrap();
            assert_eq!(integral_points(&pf).unwrap(), enumerate_z(&inst).unwrap(), "n={n}");
        }
        let empty = Instance::constant(3, (2, 2, 2, 2)).unwrap();
        assert!(integral_points(&build_p(&empty).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn constant_rewrite_has_identical_rows() {
        for n in 4..=8 {
            for bounds in [(1, 2, 1, 2), (2, 3, 1, 3), (1, 1, 2, 2), (3, 3, 2, 3)] {
                if bounds.1 >= n || bounds.3 >= n {
                    continue;
                }
                let inst = Instance::constant(n, bounds).unwrap();
                let general = build_p(&inst).unwrap();
                let rewrite = build_p_const(&inst).unwrap();
                assert_eq!(general.poly.row_keys(), rewrite.poly.row_keys(), "{inst}");
                assert_eq!(general.s_gamma, rewrite.s_gamma);
            }
        }
    }

    #[test]
    fn raw_row_count() {
        let pf = build_p(&Instance::constant(6, (1, 2, 1, 2)).unwrap()).unwrap();
        assert_eq!(pf.raw_rows, 9 * 6);
        assert!(pf.poly.inequalities.len() <= 9 * 6);
    }

    #[test]
    fn lower_on_row_wraps() {
        let pf = build_p_const(&Instance::constant(5, (2, 2, 2, 2)).unwrap()).unwrap();
        let expected = LinIneq::le([("y_0", -Rat::one()), ("z_0", Rat::one()), ("z_4", Rat::one())], 0);
        assert!(pf.poly.row_keys().contains(&expected.key()));
    }

    #[test]
    fn half_point_in_p_outside_hull() {
        let inst = Instance::constant(6, (1, 3, 1, 3)).unwrap();
        let pf = build_p(&inst).unwrap();
        let y = vec![Rat::one(), half(), Rat::one(), half(), Rat::one(), half()];
        let z = vec![half(), Rat::zero(), half(), Rat::zero(), half(), Rat::zero()];
        let p = YZPoint::new(y, z).unwrap();
        let named = pf.poly.named(&p.to_vec());
        assert!(pf.poly.contains(&named).unwrap());
        let hull: Vec<Vec<Rat>> = enumerate_z(&inst).unwrap().iter().map(YZPoint::to_vec).collect();
        assert!(!membership_in_conv(&hull, &p.to_vec()).unwrap());
    }

    #[test]
    fn time_varying_instance() {
        let inst = Instance::new(6, vec![1, 2, 1, 2, 1, 2], vec![3; 6], vec![1; 6], vec![2; 6]).unwrap();
        let pf = build_p(&inst).unwrap();
        assert_eq!(integral_points(&pf).unwrap(), enumerate_z(&inst).unwrap());
        let bad = Instance::new(6, vec![4, 1, 1, 1, 1, 1], vec![5; 6], vec![1; 6], vec![2; 6]).unwrap();
        let err = build_p(&bad).unwrap_err();
        assert!(err.to_string().contains("t=0"), "{err}");
    }

    #[test]
    fn binary_points_respect_switch_on() {
        let inst = Instance::constant(6, (1, 2, 1, 2)).unwrap();
        for p in integral_points(&build_p(&inst).unwrap()).unwrap() {
            assert_eq!(p.startups().unwrap(), derive_startups(&p.states().unwrap()));
        }
    }
}
