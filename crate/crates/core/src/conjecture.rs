//! Experimental comparison of the projection of the flow polytope `Q` onto
//! `(y, z)` with the polytope `P`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Instance, YZPoint};
use crate::netflow::{build_q, projection_contains};
use crate::rat::Rat;
use crate::ratpoly::{enumerate_vertices_with_limit, DenseOutcome, ObjectiveSense, PreparedLp};
use crate::yzform::build_p;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "equal")]
    Equal,
    /// `proj(Q) ⊊ P`.
    #[serde(rename = "P-strictly-larger")]
    PStrictlyLarger,
    /// `P ⊊ proj(Q)`.
    #[serde(rename = "proj-strictly-larger")]
    ProjStrictlyLarger,
    /// Neither contains the other.
    #[serde(rename = "incomparable")]
    Incomparable,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Equal => "equal",
            Verdict::PStrictlyLarger => "P-strictly-larger",
            Verdict::ProjStrictlyLarger => "proj-strictly-larger",
            Verdict::Incomparable => "incomparable",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn is_definite(&self) -> bool {
        *self != Verdict::Inconclusive
    }
}

/// A row of `P` whose left side exceeds its bound somewhere on `Q`.
#[derive(Debug, Clone, Serialize)]
pub struct RowWitness {
    pub row: String,
    pub max_over_q: Rat,
    pub point: YZPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjectureReport {
    pub instance: String,
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub p_rows: usize,
    pub p_vertices: Option<usize>,
    /// A point of `proj(Q)` outside `P`.
    pub outside_p: Option<RowWitness>,
    /// A vertex of `P` outside `proj(Q)`.
    pub outside_proj: Option<YZPoint>,
}

/// Runs both containment tests. Vertex enumeration of `P` beyond
/// `dimension_limit` yields an inconclusive verdict.
pub fn conjecture_check(inst: &Instance, dimension_limit: usize) -> Result<ConjectureReport> {
    let pf = build_p(inst)?;
    let q = build_q(inst);
    let compiled = q.poly.compile();
    let cols = q.yz_columns();
    let lp = PreparedLp::new(&compiled);
    let n = inst.n;

    let mut outside_p = None;
    for row in pf.poly.inequalities.iter() {
        let mut obj = vec![Rat::zero(); compiled.nvars];
        for (name, c) in &row.coeffs {
            let j = pf.poly.var_index(name).expect("declared");
            obj[cols[j]] = c.clone();
        }
        match lp.solve(&obj, ObjectiveSense::Maximize) {
            DenseOutcome::Optimal { value, x } if value > row.rhs => {
                let point = YZPoint::from_vec(&cols.iter().map(|&j| x[j].clone()).collect::<Vec<_>>());
                outside_p = Some(RowWitness { row: row.to_string(), max_over_q: value, point });
                break;
            }
            DenseOutcome::Unbounded => return Err(Error::Unbounded),
            _ => {}
        }
    }

    let vertices = match enumerate_vertices_with_limit(&pf.poly, dimension_limit) {
        Ok(v) => v,
        Err(Error::ResourceLimit(msg)) => {
            return Ok(ConjectureReport {
                instance: inst.descriptor(),
                verdict: Verdict::Inconclusive,
                reason: Some(msg),
                p_rows: pf.poly.inequalities.len(),
                p_vertices: None,
                outside_p,
                outside_proj: None,
            })
        }
        Err(e) => return Err(e),
    };
    let mut outside_proj = None;
    for v in &vertices {
        let p = YZPoint::from_vec(&pf.poly.dense(v)?);
        debug_assert_eq!(p.n(), n);
        if !projection_contains(&compiled, &cols, &p) {
            outside_proj = Some(p);
            break;
        }
    }
    let verdict = match (outside_p.is_none(), outside_proj.is_none()) {
        (true, true) => Verdict::Equal,
        (true, false) => Verdict::PStrictlyLarger,
        (false, true) => Verdict::ProjStrictlyLarger,
        (false, false) => Verdict::Incomparable,
    };
    Ok(ConjectureReport {
        instance: inst.descriptor(),
        verdict,
        reason: None,
        p_rows: pf.poly.inequalities.len(),
        p_vertices: Some(vertices.len()),
        outside_p,
        outside_proj,
    })
}
