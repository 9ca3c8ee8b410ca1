//! Exact rational polyhedra: linear constraints over named variables,
//! H-represented polytopes, LP solving, extreme-point tests, affine
//! dimension and vertex enumeration.

mod dd;
pub mod linalg;
mod lp;
pub mod lpfile;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::rat::{lcm_denominators, Rat};

pub use dd::{enumerate_vertices, enumerate_vertices_with_limit, DEFAULT_DD_DIMENSION_LIMIT};
pub use lp::{lp_optimize, DenseOutcome, LpOutcome, ObjectiveSense, PreparedLp};

/// Assignment of values to named variables.
pub type Point = BTreeMap<String, Rat>;

/// Coefficients of a linear form over named variables.
pub type Objective = BTreeMap<String, Rat>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// One linear constraint `coeffs · v (sense) rhs`.
#[derive(Debug, Clone, Serialize)]
pub struct LinIneq {
    pub coeffs: BTreeMap<String, Rat>,
    pub sense: Relation,
    pub rhs: Rat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Canonical identity of a constraint, independent of scaling and label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintKey {
    pub terms: Vec<(String, BigInt)>,
    pub sense: Relation,
    pub rhs: BigInt,
}

impl LinIneq {
    /// Builds a constraint, merging repeated variables and dropping zero terms.
    pub fn new<S, I>(terms: I, sense: Relation, rhs: impl Into<Rat>) -> Self
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Rat)>,
    {
        let mut coeffs: BTreeMap<String, Rat> = BTreeMap::new();
        for (name, c) in terms {
            *coeffs.entry(name.into()).or_default() += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        LinIneq { coeffs, sense, rhs: rhs.into(), label: None }
    }

    pub fn le<S: Into<String>, I: IntoIterator<Item = (S, Rat)>>(terms: I, rhs: impl Into<Rat>) -> Self {
        LinIneq::new(terms, Relation::Le, rhs)
    }

    pub fn ge<S: Into<String>, I: IntoIterator<Item = (S, Rat)>>(terms: I, rhs: impl Into<Rat>) -> Self {
        LinIneq::new(terms, Relation::Ge, rhs)
    }

    pub fn eq<S: Into<String>, I: IntoIterator<Item = (S, Rat)>>(terms: I, rhs: impl Into<Rat>) -> Self {
        LinIneq::new(terms, Relation::Eq, rhs)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn coeff(&self, var: &str) -> Rat {
        self.coeffs.get(var).cloned().unwrap_or_default()
    }

    /// Same constraint with `≥` rewritten as `≤` (no rescaling).
    pub fn as_le(&self) -> LinIneq {
        match self.sense {
            Relation::Ge => LinIneq {
                coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), -v)).collect(),
                sense: Relation::Le,
                rhs: -&self.rhs,
                label: self.label.clone(),
            },
            _ => self.clone(),
        }
    }

    /// Normal form: sense `≤` (or `=`), coefficients and right-hand side
    /// scaled to coprime integers, variables in lexicographic order. For
    /// equalities the first nonzero coefficient is made positive.
    pub fn normalized(&self) -> LinIneq {
        let base = self.as_le();
        let scale = lcm_denominators(base.coeffs.values().chain(std::iter::once(&base.rhs)));
        let ints: Vec<BigInt> = base
            .coeffs
            .values()
            .chain(std::iter::once(&base.rhs))
            .map(|v| (v.numer() * &scale) / v.denom())
            .collect();
        let mut g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        if g.is_zero() {
            g = BigInt::one();
        }
        if base.sense == Relation::Eq && ints.first().is_some_and(|v| v.is_negative()) {
            g = -g;
        }
        let mut vals = ints.into_iter().map(|v| Rat::from_bigint(v / &g));
        let coeffs = base.coeffs.keys().map(|k| (k.clone(), vals.next().unwrap())).collect();
        LinIneq { coeffs, sense: base.sense, rhs: vals.next().unwrap(), label: base.label }
    }

    pub fn key(&self) -> ConstraintKey {
        let nf = self.normalized();
        ConstraintKey {
            terms: nf.coeffs.iter().map(|(k, v)| (k.clone(), v.numer())).collect(),
            sense: nf.sense,
            rhs: nf.rhs.numer(),
        }
    }

    /// `coeffs · point`, failing on variables the point does not assign.
    pub fn lhs(&self, point: &Point) -> Result<Rat> {
        let mut acc = Rat::zero();
        for (k, c) in &self.coeffs {
            let v = point
                .get(k)
                .ok_or_else(|| invalid(format!("point does not assign variable {k}")))?;
            acc.sub_mul_assign(&-c, v);
        }
        Ok(acc)
    }

    pub fn satisfied_by(&self, point: &Point) -> Result<bool> {
        let lhs = self.lhs(point)?;
        Ok(match self.sense {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        })
    }

    pub fn is_tight(&self, point: &Point) -> Result<bool> {
        Ok(self.lhs(point)? == self.rhs)
    }

    pub fn variables(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }
}

impl fmt::Display for LinIneq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        }
        for (i, (k, c)) in self.coeffs.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if mag.is_one() {
                write!(f, "{k}")?;
            } else {
                write!(f, "{mag} {k}")?;
            }
        }
        write!(f, " {} {}", self.sense, self.rhs)
    }
}

/// Sparse row over variable indices.
#[derive(Debug, Clone)]
pub struct SparseRow {
    pub terms: Vec<(usize, Rat)>,
    pub rhs: Rat,
}

impl SparseRow {
    pub fn dot(&self, x: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (j, c) in &self.terms {
            acc.sub_mul_assign(&-c, &x[*j]);
        }
        acc
    }
}

/// Index-based form of a polytope: `eq` rows are `a·x = b`, `ineq` rows `a·x ≤ b`.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    pub nvars: usize,
    pub eq: Vec<SparseRow>,
    pub ineq: Vec<SparseRow>,
}

impl CompiledPoly {
    pub fn contains(&self, x: &[Rat]) -> bool {
        self.eq.iter().all(|r| r.dot(x) == r.rhs) && self.ineq.iter().all(|r| r.dot(x) <= r.rhs)
    }

    /// Substitutes fixed values for the given variable indices. Columns keep
    /// their positions; fixed columns simply no longer appear in any row.
    pub fn with_fixed(&self, fixed: &[(usize, Rat)]) -> CompiledPoly {
        let mut value: Vec<Option<&Rat>> = vec![None; self.nvars];
        for (j, v) in fixed {
            value[*j] = Some(v);
        }
        let fix_row = |r: &SparseRow| {
            let mut rhs = r.rhs.clone();
            let mut terms = Vec::with_capacity(r.terms.len());
            for (j, c) in &r.terms {
                match value[*j] {
                    Some(v) => rhs.sub_mul_assign(c, v),
                    None => terms.push((*j, c.clone())),
                }
            }
            SparseRow { terms, rhs }
        };
        CompiledPoly {
            nvars: self.nvars,
            eq: self.eq.iter().map(fix_row).collect(),
            ineq: self.ineq.iter().map(fix_row).collect(),
        }
    }
}

/// Polytope in H-representation over named variables.
#[derive(Debug, Clone, Serialize)]
pub struct HPolytope {
    pub variables: Vec<String>,
    pub equalities: Vec<LinIneq>,
    pub inequalities: Vec<LinIneq>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl HPolytope {
    pub fn new<S: Into<String>>(variables: impl IntoIterator<Item = S>) -> Result<Self> {
        let variables: Vec<String> = variables.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(invalid(format!("duplicate variable {v}")));
            }
        }
        Ok(HPolytope { variables, equalities: Vec::new(), inequalities: Vec::new(), index })
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    fn check_vars(&self, c: &LinIneq) -> Result<()> {
        match c.variables().find(|v| !self.index.contains_key(*v)) {
            Some(v) => Err(invalid(format!("constraint references undeclared variable {v}"))),
            None => Ok(()),
        }
    }

    /// Adds a constraint; `≥` rows are stored as `≤`.
    pub fn add(&mut self, c: LinIneq) -> Result<()> {
        self.check_vars(&c)?;
        match c.sense {
            Relation::Eq => self.equalities.push(c),
            _ => self.inequalities.push(c.as_le()),
        }
        Ok(())
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = LinIneq>) -> Result<()> {
        for c in cs {
            self.add(c)?;
        }
        Ok(())
    }

    pub fn constraints(&self) -> impl Iterator<Item = &LinIneq> {
        self.equalities.iter().chain(self.inequalities.iter())
    }

    /// Replaces every row by its normal form and drops duplicates, keeping
    /// the first occurrence.
    pub fn normalize_and_dedup(&mut self) {
        fn dedup(rows: &mut Vec<LinIneq>) {
            let mut seen = BTreeSet::new();
            let normed: Vec<LinIneq> = rows.iter().map(LinIneq::normalized).collect();
            *rows = normed.into_iter().filter(|r| seen.insert(r.key())).collect();
        }
        dedup(&mut self.equalities);
        dedup(&mut self.inequalities);
    }

    /// Sorted canonical keys of all rows, for set-of-constraints comparisons.
    pub fn row_keys(&self) -> BTreeSet<ConstraintKey> {
        self.constraints().map(LinIneq::key).collect()
    }

    fn compile_row(&self, c: &LinIneq) -> SparseRow {
        let mut terms: Vec<(usize, Rat)> =
            c.coeffs.iter().map(|(k, v)| (self.index[k], v.clone())).collect();
        terms.sort_by_key(|(j, _)| *j);
        SparseRow { terms, rhs: c.rhs.clone() }
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            nvars: self.dim(),
            eq: self.equalities.iter().map(|c| self.compile_row(c)).collect(),
            ineq: self.inequalities.iter().map(|c| self.compile_row(c)).collect(),
        }
    }

    /// Dense vector for a named point, in variable order.
    pub fn dense(&self, point: &Point) -> Result<Vec<Rat>> {
        self.variables
            .iter()
            .map(|v| point.get(v).cloned().ok_or_else(|| invalid(format!("point does not assign variable {v}"))))
            .collect()
    }

    pub fn named(&self, x: &[Rat]) -> Point {
        self.variables.iter().cloned().zip(x.iter().cloned()).collect()
    }

    pub fn dense_objective(&self, objective: &Objective) -> Result<Vec<Rat>> {
        let mut c = vec![Rat::zero(); self.dim()];
        for (k, v) in objective {
            let j = self
                .var_index(k)
                .ok_or_else(|| invalid(format!("objective references undeclared variable {k}")))?;
            c[j] = v.clone();
        }
        Ok(c)
    }

    /// True iff every equality and inequality holds exactly at `point`.
    pub fn contains(&self, point: &Point) -> Result<bool> {
        for c in self.constraints() {
            if !c.satisfied_by(point)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True iff the constraints tight at `point` have full column rank.
    pub fn is_extreme(&self, point: &Point) -> Result<bool> {
        if !self.contains(point)? {
            return Err(invalid("point is not contained in the polytope"));
        }
        let mut active = Vec::new();
        for c in self.constraints() {
            if c.is_tight(point)? {
                let mut row = vec![Rat::zero(); self.dim()];
                for (k, v) in &c.coeffs {
                    row[self.index[k]] = v.clone();
                }
                active.push(row);
            }
        }
        Ok(linalg::rank(active) == self.dim())
    }

    /// Substitutes the given values, removing those variables.
    pub fn fix(&self, values: &Point) -> Result<HPolytope> {
        for k in values.keys() {
            if !self.index.contains_key(k) {
                return Err(invalid(format!("cannot fix undeclared variable {k}")));
            }
        }
        let keep = self.variables.iter().filter(|v| !values.contains_key(*v)).cloned();
        let mut out = HPolytope::new(keep)?;
        for c in self.constraints() {
            let mut rhs = c.rhs.clone();
            let mut terms = Vec::new();
            for (k, v) in &c.coeffs {
                match values.get(k) {
                    Some(val) => rhs.sub_mul_assign(v, val),
                    None => terms.push((k.clone(), v.clone())),
                }
            }
            let mut row = LinIneq::new(terms, c.sense, rhs);
            row.label = c.label.clone();
            out.add(row)?;
        }
        Ok(out)
    }
}

/// Dimension of the affine hull of a point set.
pub fn affine_dim(points: &[Vec<Rat>]) -> Result<usize> {
    let first = points.first().ok_or_else(|| invalid("affine dimension of an empty set"))?;
    if points.iter().any(|p| p.len() != first.len()) {
        return Err(invalid("points have different dimensions"));
    }
    let diffs: Vec<Vec<Rat>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| a - b).collect())
        .collect();
    Ok(linalg::rank(diffs))
}

/// Whether `p` is a convex combination of `points`, decided by exact LP feasibility.
pub fn membership_in_conv(points: &[Vec<Rat>], p: &[Rat]) -> Result<bool> {
    if points.is_empty() {
        return Err(invalid("convex hull of an empty set"));
    }
    if points.iter().any(|q| q.len() != p.len()) {
        return Err(invalid("dimension mismatch between points and query"));
    }
    if points.iter().any(|q| q.as_slice() == p) {
        return Ok(true);
    }
    let names: Vec<String> = (0..points.len()).map(|i| format!("lambda_{i}")).collect();
    let mut poly = HPolytope::new(names.clone())?;
    poly.add(LinIneq::eq(names.iter().map(|s| (s.clone(), Rat::one())), Rat::one()))?;
    for (coord, target) in p.iter().enumerate() {
        let terms = names.iter().zip(points).map(|(s, q)| (s.clone(), q[coord].clone()));
        poly.add(LinIneq::eq(terms, target.clone()))?;
    }
    for s in &names {
        poly.add(LinIneq::ge([(s.clone(), Rat::one())], Rat::zero()))?;
    }
    Ok(!matches!(
        lp_optimize(&poly, &Objective::new(), ObjectiveSense::Maximize)?,
        LpOutcome::Infeasible
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: i64) -> Rat {
        Rat::from_int(v)
    }

    fn unit_square() -> HPolytope {
        let mut p = HPolytope::new(["a", "b"]).unwrap();
        for v in ["a", "b"] {
            p.add(LinIneq::ge([(v, r(1))], 0)).unwrap();
            p.add(LinIneq::le([(v, r(1))], 1)).unwrap();
        }
        p
    }

    fn pt(vals: &[(&str, Rat)]) -> Point {
        vals.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn normal_form_is_scale_invariant() {
        let a = LinIneq::ge([("y", Rat::new(1, 2)), ("x", Rat::new(-1, 3))], Rat::new(1, 6));
        let b = LinIneq::le([("x", r(2)), ("y", r(-3))], -1);
        assert_eq!(a.key(), b.key());
        let nf = a.normalized();
        assert_eq!(nf.to_string(), "2 x - 3 y <= -1");
        let e1 = LinIneq::eq([("x", r(-2)), ("y", r(4))], 6);
        let e2 = LinIneq::eq([("x", r(1)), ("y", r(-2))], -3);
        assert_eq!(e1.key(), e2.key());
        assert_eq!(LinIneq::le([("x", r(1)), ("x", r(-1))], 0).coeffs.len(), 0);
    }

    #[test]
    fn undeclared_variables_rejected() {
        let mut p = HPolytope::new(["a"]).unwrap();
        assert!(p.add(LinIneq::le([("b", r(1))], 0)).is_err());
        assert!(HPolytope::new(["a", "a"]).is_err());
    }

    #[test]
    fn containment_and_missing_variable() {
        let sq = unit_square();
        assert!(sq.contains(&pt(&[("a", r(1)), ("b", Rat::new(1, 2))])).unwrap());
        assert!(!sq.contains(&pt(&[("a", r(2)), ("b", r(0))])).unwrap());
        assert!(sq.contains(&pt(&[("a", r(1))])).is_err());
    }

    #[test]
    fn extreme_points_of_square() {
        let sq = unit_square();
        assert!(sq.is_extreme(&pt(&[("a", r(1)), ("b", r(0))])).unwrap());
        assert!(!sq.is_extreme(&pt(&[("a", Rat::new(1, 2)), ("b", r(0))])).unwrap());
        assert!(sq.is_extreme(&pt(&[("a", r(3)), ("b", r(0))])).is_err());
    }

    #[test]
    fn affine_dimension_examples() {
        assert_eq!(affine_dim(&[vec![r(4), r(5)]]).unwrap(), 0);
        let tri = vec![vec![r(0), r(0)], vec![r(1), r(0)], vec![r(0), r(1)]];
        assert_eq!(affine_dim(&tri).unwrap(), 2);
        let line = vec![vec![r(0), r(0)], vec![r(1), r(1)], vec![r(2), r(2)]];
        assert_eq!(affine_dim(&line).unwrap(), 1);
        assert!(affine_dim(&[]).is_err());
    }

    #[test]
    fn convex_hull_membership() {
        let pts = vec![vec![r(0), r(0)], vec![r(2), r(0)], vec![r(0), r(2)]];
        assert!(membership_in_conv(&pts, &[r(0), r(2)]).unwrap());
        assert!(membership_in_conv(&pts, &[r(1), r(1)]).unwrap());
        assert!(membership_in_conv(&pts, &[Rat::new(1, 2), Rat::new(1, 3)]).unwrap());
        assert!(!membership_in_conv(&pts, &[r(2), r(1)]).unwrap());
        assert!(membership_in_conv(&pts, &[r(1)]).is_err());
    }

    #[test]
    fn fixing_variables_substitutes() {
        let sq = unit_square();
        let fixed = sq.fix(&pt(&[("a", r(1))])).unwrap();
        assert_eq!(fixed.variables, vec!["b".to_string()]);
        assert!(fixed.contains(&pt(&[("b", r(1))])).unwrap());
        let mut bad = HPolytope::new(["a"]).unwrap();
        bad.add(LinIneq::le([("a", r(1))], 0)).unwrap();
        let emptied = bad.fix(&pt(&[("a", r(1))])).unwrap();
        assert!(!emptied.contains(&Point::new()).unwrap());
    }
}
