//! Valid inequalities for the integer hull under constant bounds, checked and
//! certified against the enumerated feasible set.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::instance::{derive_startups, enumerate_z, is_feasible, wrap, Instance, YZPoint};
use crate::rat::Rat;
use crate::ratpoly::{affine_dim, enumerate_vertices_with_limit, HPolytope, LinIneq, Relation};
use crate::yzform::{named_point, y_var, yz_variables, z_var};

fn total(n: usize, var: fn(usize) -> String) -> impl Iterator<Item = (String, Rat)> {
    (0..n).map(move |t| (var(t), Rat::one()))
}

fn floor_div(a: isize, b: isize) -> i64 {
    a.div_euclid(b) as i64
}

/// `(Σz ≤ ⌊n/(α+γ)⌋, Σz ≥ ⌈n/(β+δ)⌉)`.
pub fn z_count_cuts(inst: &Instance) -> Result<(LinIneq, LinIneq)> {
    let (a, b, g, d) = inst.require_constant()?;
    let n = inst.n;
    let upper = n / (a + g);
    let lower = n.div_ceil(b + d);
    Ok((
        LinIneq::le(total(n, z_var), upper as i64).with_label("z_count_upper"),
        LinIneq::ge(total(n, z_var), lower as i64).with_label("z_count_lower"),
    ))
}

/// `(Σy ≥ q₁α + min(r₁, α), Σy ≤ q₂β − min(r₂, β))` where
/// `n = q₁(α+δ) + r₁` and `n = q₂(β+γ) − r₂`.
pub fn y_count_cuts(inst: &Instance) -> Result<(LinIneq, LinIneq)> {
    let (a, b, g, d) = inst.require_constant()?;
    let n = inst.n;
    let (q1, r1) = (n / (a + d), n % (a + d));
    let q2 = n.div_ceil(b + g);
    let r2 = q2 * (b + g) - n;
    let lower = q1 * a + r1.min(a);
    let upper = q2 * b - r2.min(b);
    Ok((
        LinIneq::ge(total(n, y_var), lower as i64).with_label("y_count_lower"),
        LinIneq::le(total(n, y_var), upper as i64).with_label("y_count_upper"),
    ))
}

/// The three shifted families for bounds `(1,2,1,2)` anchored at period `t`.
pub fn family_1212_cuts(inst: &Instance, t: usize) -> Result<[LinIneq; 3]> {
    if inst.constant_bounds() != Some((1, 2, 1, 2)) {
        return Err(invalid("family cuts need constant bounds (1,2,1,2)"));
    }
    let n = inst.n;
    if t >= n {
        return Err(invalid(format!("period {t} outside 0..{n}")));
    }
    let at = |k: isize| wrap(t as isize + k, n);
    let one = Rat::one;
    let neg = || -Rat::one();
    let ni = n as isize;

    let mut first = vec![(y_var(at(0)), one()), (y_var(at(1)), one()), (z_var(at(0)), neg())];
    first.extend((2..=ni - 2).map(|i| (z_var(at(i)), one())));
    let mut second = vec![(y_var(at(0)), one()), (y_var(at(-2)), neg()), (z_var(at(0)), neg()), (z_var(at(-1)), neg())];
    second.extend((1..=ni - 2).map(|i| (z_var(at(i)), one())));
    let mut third = vec![(y_var(at(0)), neg()), (y_var(at(1)), neg()), (z_var(at(2)), neg())];
    third.extend((0..=ni - 4).map(|i| (z_var(at(-i)), one())));

    Ok([
        LinIneq::le(first, floor_div(ni - 1, 2)).with_label(format!("family1_{t}")),
        LinIneq::le(second, floor_div(ni - 3, 2)).with_label(format!("family2_{t}")),
        LinIneq::le(third, floor_div(ni - 5, 2)).with_label(format!("family3_{t}")),
    ])
}

/// All shifts of the three families, normalized and deduplicated.
pub fn family_1212_all_shifts(inst: &Instance) -> Result<Vec<LinIneq>> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for t in 0..inst.n {
        for c in family_1212_cuts(inst, t)? {
            if seen.insert(c.key()) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Cut with every index moved forward by `k` (cyclically).
pub fn rotate_cut(cut: &LinIneq, k: usize, n: usize) -> Result<LinIneq> {
    let mut terms = Vec::with_capacity(cut.coeffs.len());
    for (name, c) in &cut.coeffs {
        let (head, idx) = name.split_once('_').ok_or_else(|| invalid(format!("unexpected variable {name}")))?;
        let t: usize = idx.parse().map_err(|_| invalid(format!("unexpected variable {name}")))?;
        let moved = (t + k) % n;
        let var = match head {
            "y" => y_var(moved),
            "z" => z_var(moved),
            _ => return Err(invalid(format!("unexpected variable {name}"))),
        };
        terms.push((var, c.clone()));
    }
    let mut out = LinIneq::new(terms, cut.sense, cut.rhs.clone());
    out.label = cut.label.clone();
    Ok(out)
}

fn satisfied(cut: &LinIneq, p: &YZPoint) -> Result<bool> {
    cut.satisfied_by(&named_point(p))
}

/// True iff every feasible point satisfies `cut`.
pub fn validate_cut(inst: &Instance, cut: &LinIneq) -> Result<bool> {
    for p in enumerate_z(inst)? {
        if !satisfied(cut, &p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct CutCertificate {
    pub cut: LinIneq,
    pub valid: bool,
    pub tight_points: Vec<YZPoint>,
    pub dim_pi: usize,
    pub is_facet: bool,
}

/// Validity, tight set, and facet status of `cut` for the integer hull.
pub fn certify_facet(inst: &Instance, cut: &LinIneq) -> Result<CutCertificate> {
    let z = enumerate_z(inst)?;
    if z.is_empty() {
        return Err(Error::UndefinedDimension(format!("no feasible points for {inst}")));
    }
    let hull: Vec<Vec<Rat>> = z.iter().map(YZPoint::to_vec).collect();
    let dim_pi = affine_dim(&hull)?;
    let mut valid = true;
    let mut tight_points = Vec::new();
    for p in &z {
        let named = named_point(p);
        if !cut.satisfied_by(&named)? {
            valid = false;
        }
        if cut.is_tight(&named)? {
            tight_points.push(p.clone());
        }
    }
    let is_facet = valid
        && cut.sense != Relation::Eq
        && !tight_points.is_empty()
        && dim_pi >= 1
        && affine_dim(&tight_points.iter().map(YZPoint::to_vec).collect::<Vec<_>>())? == dim_pi - 1;
    Ok(CutCertificate { cut: cut.clone(), valid, tight_points, dim_pi, is_facet })
}

#[derive(Serialize)]
struct CertificateLine<'a> {
    cut: String,
    valid: bool,
    tight_count: usize,
    dim_pi: usize,
    is_facet: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
}

/// One JSON object per certificate, newline separated.
pub fn certificates_jsonl(certs: &[CutCertificate]) -> String {
    let mut out = String::new();
    for c in certs {
        let line = CertificateLine {
            cut: c.cut.normalized().to_string(),
            valid: c.valid,
            tight_count: c.tight_points.len(),
            dim_pi: c.dim_pi,
            is_facet: c.is_facet,
            label: c.cut.label.as_deref(),
        };
        out.push_str(&serde_json::to_string(&line).expect("line serializes"));
        out.push('\n');
    }
    out
}

/// Outcome of comparing an H-system with the integer hull.
#[derive(Debug, Clone, Serialize)]
pub struct DescriptionReport {
    pub vertex_count: usize,
    /// A vertex that is fractional or not a feasible sequence.
    pub bad_vertex: Option<YZPoint>,
    /// A feasible point cut off by the system.
    pub excluded_point: Option<YZPoint>,
}

impl DescriptionReport {
    pub fn holds(&self) -> bool {
        self.bad_vertex.is_none() && self.excluded_point.is_none()
    }
}

/// Largest `2n` for which the description check runs vertex enumeration.
pub const DESCRIPTION_DIMENSION_LIMIT: usize = 16;

/// Checks whether `system` describes the convex hull of the feasible set:
/// every vertex is a feasible binary point and no feasible point is cut off.
pub fn full_description_report(inst: &Instance, system: &[LinIneq]) -> Result<DescriptionReport> {
    let n = inst.n;
    let mut poly = HPolytope::new(yz_variables(n))?;
    poly.extend(system.iter().cloned())?;
    poly.normalize_and_dedup();
    let vertices = enumerate_vertices_with_limit(&poly, DESCRIPTION_DIMENSION_LIMIT)?;
    let mut bad_vertex = None;
    for v in &vertices {
        let x = poly.dense(v)?;
        let p = YZPoint::from_vec(&x);
        let good = match (p.states(), p.startups()) {
            (Some(y), Some(z)) => is_feasible(inst, &y) && derive_startups(&y) == z,
            _ => false,
        };
        if !good {
            bad_vertex = Some(p);
            break;
        }
    }
    let mut excluded_point = None;
    for p in enumerate_z(inst)? {
        if !poly.contains(&named_point(&p))? {
            excluded_point = Some(p);
            break;
        }
    }
    Ok(DescriptionReport { vertex_count: vertices.len(), bad_vertex, excluded_point })
}

pub fn full_description_check(inst: &Instance, system: &[LinIneq]) -> Result<bool> {
    Ok(full_description_report(inst, system)?.holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{construct_witness, startup_count_range};
    use crate::yzform::build_p;

    fn c(n: usize, b: (usize, usize, usize, usize)) -> Instance {
        Instance::constant(n, b).unwrap()
    }

    fn rhs(c: &LinIneq) -> i64 {
        c.rhs.to_i64().unwrap()
    }

    #[test]
    fn z_counts_for_1212() {
        let (u, l) = z_count_cuts(&c(7, (1, 2, 1, 2))).unwrap();
        assert_eq!((rhs(&u), rhs(&l)), (3, 2));
        let (u, l) = z_count_cuts(&c(4, (1, 2, 1, 2))).unwrap();
        assert_eq!((rhs(&u), rhs(&l)), (2, 1));
        assert!(z_count_cuts(&Instance::new(4, vec![1, 2, 1, 2], vec![2; 4], vec![1; 4], vec![2; 4]).unwrap()).is_err());
    }

    #[test]
    fn z_counts_bracket_the_realized_range() {
        // The realized start-up counts must lie within the two bounds.
        for n in 3..=9 {
            for b in [(1, 2, 1, 2), (1, 3, 2, 3), (2, 2, 1, 1), (1, 1, 1, 1)] {
                if b.1 >= n || b.3 >= n {
                    continue;
                }
                let inst = c(n, b);
                let range = startup_count_range(&inst).unwrap();
                let (u, l) = z_count_cuts(&inst).unwrap();
                if let (Some(lo), Some(hi)) = (range.first(), range.last()) {
                    assert!(rhs(&l) <= *lo as i64 && *hi as i64 <= rhs(&u), "{inst}");
                }
            }
        }
    }

    #[test]
    fn y_counts() {
        let (l, u) = y_count_cuts(&c(7, (1, 2, 1, 2))).unwrap();
        assert_eq!((rhs(&l), rhs(&u)), (3, 4));
        assert_eq!(l.sense, Relation::Ge);
        let (l, u) = y_count_cuts(&c(6, (1, 2, 1, 2))).unwrap();
        assert_eq!((rhs(&l), rhs(&u)), (2, 4));
    }

    #[test]
    fn y_counts_match_extremes_of_sum_y() {
        // Independent check: extremes of Σy over Z never cross the cuts.
        for n in 4..=9 {
            let inst = c(n, (1, 2, 1, 2));
            let (l, u) = y_count_cuts(&inst).unwrap();
            assert!(validate_cut(&inst, &l).unwrap() && validate_cut(&inst, &u).unwrap());
        }
    }

    #[test]
    fn family_rows() {
        let inst = c(6, (1, 2, 1, 2));
        let [f1, _, _] = family_1212_cuts(&inst, 0).unwrap();
        let one = Rat::one;
        let expected = LinIneq::le(
            [("y_0", one()), ("y_1", one()), ("z_0", -one()), ("z_2", one()), ("z_3", one()), ("z_4", one())],
            2,
        );
        assert_eq!(f1.key(), expected.key());
        let [_, f2, _] = family_1212_cuts(&c(7, (1, 2, 1, 2)), 0).unwrap();
        assert_eq!(rhs(&f2), 2);
        assert!(family_1212_cuts(&c(6, (1, 3, 1, 3)), 0).is_err());
    }

    #[test]
    fn families_are_valid() {
        for n in 4..=9 {
            let inst = c(n, (1, 2, 1, 2));
            for cut in family_1212_all_shifts(&inst).unwrap() {
                assert!(validate_cut(&inst, &cut).unwrap(), "n={n} {cut}");
            }
        }
    }

    #[test]
    fn validate_rejects_tightened_bound() {
        let inst = c(7, (1, 2, 1, 2));
        let (u, _) = z_count_cuts(&inst).unwrap();
        assert!(validate_cut(&inst, &u).unwrap());
        let tighter = LinIneq::le(total(7, z_var), rhs(&u) - 1);
        assert!(!validate_cut(&inst, &tighter).unwrap());
        let witness = construct_witness(&inst, rhs(&u) as usize).unwrap();
        assert!(!satisfied(&tighter, &witness).unwrap());
        let tautology = LinIneq::le(Vec::<(String, Rat)>::new(), 0);
        assert!(validate_cut(&inst, &tautology).unwrap());
    }

    #[test]
    fn facets_n7_and_n6() {
        let inst = c(7, (1, 2, 1, 2));
        let (yl, yu) = y_count_cuts(&inst).unwrap();
        let (zu, zl) = z_count_cuts(&inst).unwrap();
        for cut in [&yl, &yu, &zu, &zl] {
            let cert = certify_facet(&inst, cut).unwrap();
            assert_eq!(cert.dim_pi, 14);
            assert!(cert.is_facet, "{cut}");
        }
        let six = c(6, (1, 2, 1, 2));
        let (zu, _) = z_count_cuts(&six).unwrap();
        let cert = certify_facet(&six, &zu).unwrap();
        assert!(cert.valid && !cert.is_facet);
        assert!(matches!(certify_facet(&c(3, (2, 2, 2, 2)), &zu), Err(Error::UndefinedDimension(_))));
    }

    #[test]
    fn rotation_keeps_verdict() {
        let inst = c(6, (1, 2, 1, 2));
        let [f1, _, f3] = family_1212_cuts(&inst, 0).unwrap();
        for cut in [f1, f3] {
            let base = certify_facet(&inst, &cut).unwrap();
            for k in 1..6 {
                let r = certify_facet(&inst, &rotate_cut(&cut, k, 6).unwrap()).unwrap();
                assert_eq!((r.valid, r.is_facet, r.tight_points.len()), (base.valid, base.is_facet, base.tight_points.len()));
            }
        }
    }

    #[test]
    fn jsonl_has_one_line_per_cut() {
        let inst = c(7, (1, 2, 1, 2));
        let (l, u) = y_count_cuts(&inst).unwrap();
        let certs = vec![certify_facet(&inst, &l).unwrap(), certify_facet(&inst, &u).unwrap()];
        let text = certificates_jsonl(&certs);
        assert_eq!(text.lines().count(), 2);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["is_facet"], true);
        assert_eq!(first["dim_pi"], 14);
    }

    #[test]
    fn description_small() {
        let inst = c(5, (1, 2, 1, 2));
        let mut system: Vec<LinIneq> = build_p(&inst).unwrap().poly.constraints().cloned().collect();
        let (u, l) = z_count_cuts(&inst).unwrap();
        system.extend([u, l]);
        assert!(full_description_check(&inst, &system).unwrap());

        let frac = c(6, (1, 3, 1, 3));
        let rows: Vec<LinIneq> = build_p(&frac).unwrap().poly.constraints().cloned().collect();
        let report = full_description_report(&frac, &rows).unwrap();
        assert!(report.bad_vertex.is_some() && report.excluded_point.is_none());
    }

    #[test]
    fn z_counts_do_not_close_the_gap_at_four() {
        // y = 2/3, z = 1/3 in every period meets P and both z-count cuts,
        // yet every feasible point has exactly two on-periods.
        let inst = c(4, (1, 2, 1, 2));
        let mut system: Vec<LinIneq> = build_p(&inst).unwrap().poly.constraints().cloned().collect();
        let (u, l) = z_count_cuts(&inst).unwrap();
        system.extend([u, l]);
        let uniform = YZPoint::new(vec![Rat::new(2, 3); 4], vec![Rat::new(1, 3); 4]).unwrap();
        assert!(system.iter().all(|r| satisfied(r, &uniform).unwrap()));
        assert!(enumerate_z(&inst).unwrap().iter().all(|p| p.y.iter().sum::<Rat>() == Rat::from_int(2)));
        assert!(!full_description_check(&inst, &system).unwrap());
    }
}
