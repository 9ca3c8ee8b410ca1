//! Exact two-phase simplex with Bland's rule.
//!
//! A compiled polytope is first brought into standard form `A·u = b, u ≥ 0`:
//! single-variable rows `-c·x ≤ 0` mark sign-constrained variables, other
//! inequalities receive slacks, free variables are eliminated by pivoting on a
//! row that contains them, and a light presolve fixes variables forced to a
//! single value. Phase 1 runs once per [`PreparedLp`]; every objective then
//! starts phase 2 from the same feasible basis.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::rat::Rat;

use super::{CompiledPoly, HPolytope, Objective, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveSense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rat, point: Point },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rat> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

/// Optimizes `objective` over `poly` exactly.
pub fn lp_optimize(poly: &HPolytope, objective: &Objective, sense: ObjectiveSense) -> Result<LpOutcome> {
    let c = poly.dense_objective(objective)?;
    let lp = PreparedLp::new(&poly.compile());
    Ok(match lp.solve(&c, sense) {
        DenseOutcome::Optimal { value, x } => LpOutcome::Optimal { value, point: poly.named(&x) },
        DenseOutcome::Infeasible => LpOutcome::Infeasible,
        DenseOutcome::Unbounded => LpOutcome::Unbounded,
    })
}

/// Outcome over dense variable vectors, in the compiled variable order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DenseOutcome {
    Optimal { value: Rat, x: Vec<Rat> },
    Infeasible,
    Unbounded,
}

type Row = BTreeMap<usize, Rat>;

#[derive(Debug, Clone)]
enum Status {
    /// Nonnegative column of the standard form.
    Core,
    /// Value is an affine function of other columns.
    Defined(Row, Rat),
    Fixed(Rat),
    /// Free column appearing in no row; its value is 0 unless the
    /// objective rewards it, in which case the problem is unbounded.
    Loose,
    /// Nonnegative column that is not yet placed.
    Pending,
}

/// A polytope brought to a feasible standard-form basis, ready to be
/// optimized for any number of objectives.
#[derive(Debug, Clone)]
pub struct PreparedLp {
    nvars: usize,
    status: Vec<Status>,
    /// Column index (into `status`) of each core position.
    core: Vec<usize>,
    feasible: bool,
    tableau: Vec<Vec<Rat>>,
    basis: Vec<usize>,
}

fn substitute(row: &mut Row, rhs: &mut Rat, col: usize, def: &Row, constant: &Rat) {
    // Replaces `col` in `row·u = rhs` with `def·u + constant`.
    if let Some(a) = row.remove(&col) {
        rhs.sub_mul_assign(&a, constant);
        for (k, v) in def {
            let e = row.entry(*k).or_default();
            e.sub_mul_assign(&-&a, v);
            if e.is_zero() {
                row.remove(k);
            }
        }
    }
}

impl PreparedLp {
    pub fn new(poly: &CompiledPoly) -> PreparedLp {
        let nvars = poly.nvars;
        let mut nonneg = vec![false; nvars];
        let mut rows: Vec<(Row, Rat)> = Vec::new();
        let mut inequalities = Vec::new();
        for r in &poly.ineq {
            if r.terms.len() == 1 && r.rhs.is_zero() && r.terms[0].1.is_negative() {
                nonneg[r.terms[0].0] = true;
            } else {
                inequalities.push(r);
            }
        }
        for r in &poly.eq {
            rows.push((r.terms.iter().cloned().collect(), r.rhs.clone()));
        }
        let mut status: Vec<Status> = (0..nvars)
            .map(|j| if nonneg[j] { Status::Pending } else { Status::Loose })
            .collect();
        for r in inequalities {
            let slack = status.len();
            status.push(Status::Pending);
            let mut row: Row = r.terms.iter().cloned().collect();
            row.insert(slack, Rat::one());
            rows.push((row, r.rhs.clone()));
        }

        let mut lp = PreparedLp {
            nvars,
            status,
            core: Vec::new(),
            feasible: true,
            tableau: Vec::new(),
            basis: Vec::new(),
        };

        // Free-variable elimination, preferring the shortest row that holds the variable.
        for j in 0..nvars {
            if nonneg[j] {
                continue;
            }
            let pick = rows
                .iter()
                .enumerate()
                .filter(|(_, (r, _))| r.contains_key(&j))
                .min_by_key(|(i, (r, _))| (r.len(), *i))
                .map(|(i, _)| i);
            let Some(i) = pick else { continue };
            let (mut row, rhs) = rows.swap_remove(i);
            let a = row.remove(&j).unwrap();
            let inv = a.recip();
            let def: Row = row.into_iter().map(|(k, v)| (k, -(v * &inv))).collect();
            let constant = rhs * &inv;
            lp.define(&mut rows, j, def, constant);
        }

        if !lp.presolve(&mut rows) {
            lp.feasible = false;
            return lp;
        }
        lp.phase_one(rows);
        lp
    }

    fn define(&mut self, rows: &mut [(Row, Rat)], col: usize, def: Row, constant: Rat) {
        for (r, b) in rows.iter_mut() {
            substitute(r, b, col, &def, &constant);
        }
        for s in self.status.iter_mut() {
            if let Status::Defined(d, c) = s {
                // Definitions read `value = d·u + c`, so the constant moves the other way.
                let mut moved = -&*c;
                substitute(d, &mut moved, col, &def, &constant);
                *c = -moved;
            }
        }
        self.status[col] = if def.is_empty() { Status::Fixed(constant) } else { Status::Defined(def, constant) };
    }

    /// Returns false when a row is proven infeasible.
    fn presolve(&mut self, rows: &mut Vec<(Row, Rat)>) -> bool {
        loop {
            let mut changed = false;
            let mut i = 0;
            while i < rows.len() {
                let (row, rhs) = &rows[i];
                if row.is_empty() {
                    if !rhs.is_zero() {
                        return false;
                    }
                    rows.swap_remove(i);
                    changed = true;
                    continue;
                }
                let all_pos = row.values().all(Rat::is_positive);
                let all_neg = row.values().all(Rat::is_negative);
                if (all_pos && rhs.is_negative()) || (all_neg && rhs.is_positive()) {
                    return false;
                }
                if (all_pos || all_neg) && rhs.is_zero() {
                    let cols: Vec<usize> = row.keys().copied().collect();
                    rows.swap_remove(i);
                    for c in cols {
                        self.define(rows, c, Row::new(), Rat::zero());
                    }
                    changed = true;
                    continue;
                }
                if row.len() == 1 {
                    let (&c, a) = row.iter().next().unwrap();
                    let v = rhs / a;
                    if v.is_negative() {
                        return false;
                    }
                    rows.swap_remove(i);
                    self.define(rows, c, Row::new(), v);
                    changed = true;
                    continue;
                }
                i += 1;
            }
            if !changed {
                return true;
            }
        }
    }

    fn phase_one(&mut self, mut rows: Vec<(Row, Rat)>) {
        for (r, b) in rows.iter_mut() {
            if b.is_negative() {
                *b = -&*b;
                for v in r.values_mut() {
                    *v = -&*v;
                }
            }
        }
        let mut pos = vec![usize::MAX; self.status.len()];
        for (j, s) in self.status.iter_mut().enumerate() {
            if matches!(s, Status::Pending) {
                pos[j] = self.core.len();
                *s = Status::Core;
                self.core.push(j);
            }
        }
        let ncore = self.core.len();
        let m = rows.len();

        // Crash basis: a column with a single positive entry in its row serves as that row's basic variable.
        let mut occurrences = vec![0usize; ncore];
        for (r, _) in &rows {
            for k in r.keys() {
                occurrences[pos[*k]] += 1;
            }
        }
        let mut basis = vec![usize::MAX; m];
        let mut used = vec![false; ncore];
        for (i, (r, _)) in rows.iter().enumerate() {
            if let Some((k, _)) = r
                .iter()
                .find(|(k, v)| v.is_positive() && occurrences[pos[**k]] == 1 && !used[pos[**k]])
            {
                basis[i] = pos[*k];
                used[pos[*k]] = true;
            }
        }
        let art_rows: Vec<usize> = (0..m).filter(|&i| basis[i] == usize::MAX).collect();
        let width = ncore + art_rows.len();
        let mut tab: Vec<Vec<Rat>> = Vec::with_capacity(m);
        for (i, (r, b)) in rows.iter().enumerate() {
            let mut row = vec![Rat::zero(); width + 1];
            for (k, v) in r {
                row[pos[*k]] = v.clone();
            }
            row[width] = b.clone();
            if basis[i] != usize::MAX {
                let inv = row[basis[i]].recip();
                if !inv.is_one() {
                    for v in row.iter_mut() {
                        *v *= &inv;
                    }
                }
            }
            tab.push(row);
        }
        for (a, &i) in art_rows.iter().enumerate() {
            tab[i][ncore + a] = Rat::one();
            basis[i] = ncore + a;
        }

        if !art_rows.is_empty() {
            let mut cost = vec![Rat::zero(); width];
            for c in cost.iter_mut().skip(ncore) {
                *c = Rat::one();
            }
            let mut s = Simplex::new(tab, basis, &cost, width);
            let bounded = s.run(width);
            debug_assert!(bounded, "phase one is bounded below");
            if !s.value().is_zero() {
                self.feasible = false;
                return;
            }
            // Drive remaining artificials out of the basis or drop their rows.
            let mut i = 0;
            while i < s.tab.len() {
                if s.basis[i] >= ncore {
                    match (0..ncore).find(|&k| !s.tab[i][k].is_zero()) {
                        Some(k) => {
                            s.pivot(i, k);
                            i += 1;
                        }
                        None => {
                            s.tab.swap_remove(i);
                            s.basis.swap_remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
            tab = s.tab;
            basis = s.basis;
            for row in tab.iter_mut() {
                let rhs = row.pop().unwrap();
                row.truncate(ncore);
                row.push(rhs);
            }
        }
        self.tableau = tab;
        self.basis = basis;
    }

    pub fn is_feasible(&self) -> bool {
        self.feasible
    }

    /// Optimizes a dense objective over the compiled variable order.
    pub fn solve(&self, objective: &[Rat], sense: ObjectiveSense) -> DenseOutcome {
        if !self.feasible {
            return DenseOutcome::Infeasible;
        }
        let sign = match sense {
            ObjectiveSense::Maximize => -Rat::one(),
            ObjectiveSense::Minimize => Rat::one(),
        };
        // Minimize (sign·c)·x rewritten over non-eliminated columns.
        let mut cost = vec![Rat::zero(); self.status.len()];
        for (j, c) in objective.iter().enumerate().take(self.nvars) {
            if c.is_zero() {
                continue;
            }
            let c = c * &sign;
            match &self.status[j] {
                Status::Defined(def, _) => {
                    for (k, v) in def {
                        cost[*k].sub_mul_assign(&-&c, v);
                    }
                }
                Status::Fixed(_) => {}
                _ => cost[j] += &c,
            }
        }
        for (j, s) in self.status.iter().enumerate() {
            if matches!(s, Status::Loose) && !cost[j].is_zero() {
                return DenseOutcome::Unbounded;
            }
        }
        let ncore = self.core.len();
        let core_cost: Vec<Rat> = self.core.iter().map(|&j| cost[j].clone()).collect();
        let mut s = Simplex::new(self.tableau.clone(), self.basis.clone(), &core_cost, ncore);
        if !s.run(ncore) {
            return DenseOutcome::Unbounded;
        }
        let mut values = vec![Rat::zero(); self.status.len()];
        for (i, &b) in s.basis.iter().enumerate() {
            values[self.core[b]] = s.tab[i][ncore].clone();
        }
        let mut x = Vec::with_capacity(self.nvars);
        for j in 0..self.nvars {
            x.push(match &self.status[j] {
                Status::Defined(def, c) => {
                    let mut v = c.clone();
                    for (k, a) in def {
                        v.sub_mul_assign(&-a, &values[*k]);
                    }
                    v
                }
                Status::Fixed(v) => v.clone(),
                _ => values[j].clone(),
            });
        }
        let mut value = Rat::zero();
        for (c, v) in objective.iter().zip(&x) {
            value.sub_mul_assign(&-c, v);
        }
        DenseOutcome::Optimal { value, x }
    }

    /// Feasibility only, skipping phase 2.
    pub fn feasible_point(&self) -> Option<Vec<Rat>> {
        match self.solve(&vec![Rat::zero(); self.nvars], ObjectiveSense::Minimize) {
            DenseOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }
}

/// Dense tableau in canonical form with a reduced-cost row.
struct Simplex {
    tab: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    reduced: Vec<Rat>,
    /// Negated objective value of the current basis.
    neg_value: Rat,
}

impl Simplex {
    fn new(tab: Vec<Vec<Rat>>, basis: Vec<usize>, cost: &[Rat], width: usize) -> Simplex {
        let mut reduced: Vec<Rat> = cost[..width].to_vec();
        let mut neg_value = Rat::zero();
        for (i, &b) in basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (k, v) in tab[i].iter().enumerate().take(width) {
                reduced[k].sub_mul_assign(cb, v);
            }
            neg_value.sub_mul_assign(cb, &tab[i][width]);
        }
        Simplex { tab, basis, reduced, neg_value }
    }

    fn value(&self) -> Rat {
        -&self.neg_value
    }

    /// Bland's rule iterations over the first `width` columns. Returns false if unbounded.
    fn run(&mut self, width: usize) -> bool {
        loop {
            let Some(enter) = (0..width).find(|&k| self.reduced[k].is_negative()) else {
                return true;
            };
            let rhs = self.tab.first().map_or(0, |r| r.len() - 1);
            let mut best: Option<(usize, Rat)> = None;
            for i in 0..self.tab.len() {
                let a = &self.tab[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.tab[i][rhs] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((leave, _)) = best else { return false };
            self.pivot(leave, enter);
        }
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let inv = self.tab[r][col].recip();
        if !inv.is_one() {
            for v in self.tab[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let nz: Vec<usize> = (0..self.tab[r].len()).filter(|&k| !self.tab[r][k].is_zero()).collect();
        let prow = std::mem::take(&mut self.tab[r]);
        for (i, row) in self.tab.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for &k in &nz {
                row[k].sub_mul_assign(&f, &prow[k]);
            }
        }
        if !self.reduced[col].is_zero() {
            let f = self.reduced[col].clone();
            let rhs = prow.len() - 1;
            for &k in &nz {
                if k < rhs {
                    if k < self.reduced.len() {
                        self.reduced[k].sub_mul_assign(&f, &prow[k]);
                    }
                } else {
                    self.neg_value.sub_mul_assign(&f, &prow[k]);
                }
            }
        }
        self.tab[r] = prow;
        self.basis[r] = col;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratpoly::LinIneq;

    fn r(v: i64) -> Rat {
        Rat::from_int(v)
    }

    fn obj(terms: &[(&str, i64)]) -> Objective {
        terms.iter().map(|(k, v)| (k.to_string(), r(*v))).collect()
    }

    #[test]
    fn box_with_cut() {
        let mut p = HPolytope::new(["a", "b"]).unwrap();
        for v in ["a", "b"] {
            p.add(LinIneq::ge([(v, r(1))], 0)).unwrap();
            p.add(LinIneq::le([(v, r(1))], 1)).unwrap();
        }
        p.add(LinIneq::le([("a", r(2)), ("b", r(2))], 3)).unwrap();
        let out = lp_optimize(&p, &obj(&[("a", 1), ("b", 1)]), ObjectiveSense::Maximize).unwrap();
        assert_eq!(out.value(), Some(&Rat::new(3, 2)));
        let out = lp_optimize(&p, &obj(&[("a", 1), ("b", 1)]), ObjectiveSense::Minimize).unwrap();
        assert_eq!(out.value(), Some(&r(0)));
    }

    #[test]
    fn contradictory_equality_is_infeasible() {
        let mut p = HPolytope::new(["a"]).unwrap();
        p.add(LinIneq::eq(Vec::<(String, Rat)>::new(), 1)).unwrap();
        assert_eq!(lp_optimize(&p, &obj(&[("a", 1)]), ObjectiveSense::Maximize).unwrap(), LpOutcome::Infeasible);
        let mut q = HPolytope::new(["a"]).unwrap();
        q.add(LinIneq::ge([("a", r(1))], 2)).unwrap();
        q.add(LinIneq::le([("a", r(1))], 1)).unwrap();
        assert_eq!(lp_optimize(&q, &Objective::new(), ObjectiveSense::Maximize).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn free_variables_and_unboundedness() {
        let mut p = HPolytope::new(["a", "b", "c"]).unwrap();
        p.add(LinIneq::eq([("a", r(1)), ("b", r(-1))], 2)).unwrap();
        p.add(LinIneq::le([("b", r(1))], 5)).unwrap();
        let out = lp_optimize(&p, &obj(&[("a", 1)]), ObjectiveSense::Maximize).unwrap();
        assert_eq!(out.value(), Some(&r(7)));
        assert_eq!(lp_optimize(&p, &obj(&[("a", 1)]), ObjectiveSense::Minimize).unwrap(), LpOutcome::Unbounded);
        assert_eq!(lp_optimize(&p, &obj(&[("c", 1)]), ObjectiveSense::Maximize).unwrap(), LpOutcome::Unbounded);
        let out = lp_optimize(&p, &obj(&[("a", 1), ("b", -1)]), ObjectiveSense::Minimize).unwrap();
        assert_eq!(out.value(), Some(&r(2)));
    }

    #[test]
    fn degenerate_redundant_equalities() {
        let mut p = HPolytope::new(["a", "b"]).unwrap();
        for v in ["a", "b"] {
            p.add(LinIneq::ge([(v, r(1))], 0)).unwrap();
        }
        p.add(LinIneq::eq([("a", r(1)), ("b", r(1))], 1)).unwrap();
        p.add(LinIneq::eq([("a", r(2)), ("b", r(2))], 2)).unwrap();
        let out = lp_optimize(&p, &obj(&[("a", 3), ("b", 1)]), ObjectiveSense::Maximize).unwrap();
        let LpOutcome::Optimal { value, point } = out else { panic!() };
        assert_eq!(value, r(3));
        assert_eq!(point["a"], r(1));
        assert!(p.contains(&point).unwrap());
    }

    #[test]
    fn prepared_lp_reuses_basis() {
        let mut p = HPolytope::new(["a", "b"]).unwrap();
        for v in ["a", "b"] {
            p.add(LinIneq::ge([(v, r(1))], 0)).unwrap();
        }
        p.add(LinIneq::ge([("a", r(1)), ("b", r(1))], 1)).unwrap();
        p.add(LinIneq::le([("a", r(1)), ("b", r(3))], 6)).unwrap();
        p.add(LinIneq::le([("a", r(3)), ("b", r(1))], 6)).unwrap();
        let lp = PreparedLp::new(&p.compile());
        let cases = [((1, 0), Rat::new(2, 1)), ((1, 1), Rat::new(3, 1)), ((-1, -1), r(-1))];
        for ((ca, cb), want) in cases {
            match lp.solve(&[r(ca), r(cb)], ObjectiveSense::Maximize) {
                DenseOutcome::Optimal { value, x } => {
                    assert_eq!(value, want);
                    assert!(p.compile().contains(&x));
                }
                other => panic!("{other:?}"),
            }
        }
    }
}
