//! Text exports of an [`HPolytope`]: an LP file in the common CPLEX-style
//! layout and a JSON dump of the normalized rows.

use std::fmt::Write as _;

use serde::Serialize;

use super::{HPolytope, LinIneq, Objective, ObjectiveSense};

const LINE_WIDTH: usize = 78;

fn row_name(label: Option<&str>, fallback: String) -> String {
    match label {
        Some(l) => l
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || "_.[]()".contains(c) { c } else { '_' })
            .collect(),
        None => fallback,
    }
}

fn push_terms(out: &mut String, head: &str, terms: &[String], tail: &str) {
    let mut line = String::from(head);
    for t in terms {
        if line.len() + t.len() + 1 > LINE_WIDTH && line.trim().len() > head.trim().len() {
            out.push_str(line.trim_end());
            out.push('\n');
            line = String::from("   ");
        }
        line.push(' ');
        line.push_str(t);
    }
    if line.len() + tail.len() + 1 > LINE_WIDTH {
        out.push_str(line.trim_end());
        out.push('\n');
        line = String::from("   ");
    }
    line.push(' ');
    line.push_str(tail);
    out.push_str(line.trim_end());
    out.push('\n');
}

fn signed_terms(row: &LinIneq) -> Vec<String> {
    let mut terms = Vec::new();
    for (i, (name, c)) in row.coeffs.iter().enumerate() {
        let sign = if c.is_negative() { "-" } else if i == 0 { "" } else { "+" };
        let mag = c.abs();
        let body = if mag.is_one() { name.clone() } else { format!("{mag} {name}") };
        terms.push(if sign.is_empty() { body } else { format!("{sign} {body}") });
    }
    terms
}

/// LP file text. Rows are written in normalized integer form; every variable
/// is declared free because nonnegativity lives in the rows themselves.
pub fn write_lp(
    poly: &HPolytope,
    objective: Option<(&Objective, ObjectiveSense)>,
    generals: &[String],
    title: &str,
) -> String {
    let mut out = String::new();
    if !title.is_empty() {
        let _ = writeln!(out, "\\ {title}");
    }
    let (obj, sense) = match objective {
        Some((o, s)) => (o.clone(), s),
        None => (Objective::new(), ObjectiveSense::Maximize),
    };
    out.push_str(match sense {
        ObjectiveSense::Maximize => "Maximize\n",
        ObjectiveSense::Minimize => "Minimize\n",
    });
    let obj_row = LinIneq::le(obj.into_iter(), 0);
    if obj_row.coeffs.is_empty() {
        out.push_str(" obj:\n");
    } else {
        push_terms(&mut out, " obj:", &signed_terms(&obj_row), "");
    }
    out.push_str("Subject To\n");
    let placeholder = poly.variables.first().map_or_else(|| "0".to_string(), |v| format!("0 {v}"));
    for (i, c) in poly.constraints().enumerate() {
        let nf = c.normalized();
        let mut terms = signed_terms(&nf);
        if terms.is_empty() {
            terms.push(placeholder.clone());
        }
        let name = row_name(c.label.as_deref(), format!("r{i}"));
        let tail = format!("{} {}", if nf.sense == super::Relation::Eq { "=" } else { "<=" }, nf.rhs);
        push_terms(&mut out, &format!(" {name}:"), &terms, &tail);
    }
    out.push_str("Bounds\n");
    for v in &poly.variables {
        let _ = writeln!(out, " {v} free");
    }
    if !generals.is_empty() {
        out.push_str("Generals\n");
        let names: Vec<String> = generals.to_vec();
        push_terms(&mut out, "", &names, "");
    }
    out.push_str("End\n");
    out
}

#[derive(Serialize)]
struct RowDump<'a> {
    variables: &'a [String],
    equalities: Vec<LinIneq>,
    inequalities: Vec<LinIneq>,
}

/// JSON with every row in normal form, in stored order.
pub fn rows_json(poly: &HPolytope) -> String {
    let dump = RowDump {
        variables: &poly.variables,
        equalities: poly.equalities.iter().map(LinIneq::normalized).collect(),
        inequalities: poly.inequalities.iter().map(LinIneq::normalized).collect(),
    };
    serde_json::to_string_pretty(&dump).expect("rows serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::Rat;

    #[test]
    fn lp_text_has_sections_and_integer_rows() {
        let mut p = HPolytope::new(["a", "b"]).unwrap();
        p.add(LinIneq::le([("a", Rat::new(1, 2)), ("b", Rat::new(1, 3))], 1).with_label("cap")).unwrap();
        p.add(LinIneq::eq([("a", Rat::from_int(-2))], -2)).unwrap();
        let obj: Objective = [("a".to_string(), Rat::one())].into_iter().collect();
        let text = write_lp(&p, Some((&obj, ObjectiveSense::Minimize)), &["a".into()], "demo");
        assert!(text.starts_with("\\ demo\nMinimize\n obj: a\nSubject To\n"));
        assert!(text.contains(" cap: 3 a + 2 b <= 6\n"));
        assert!(text.contains(" r0: a = 1\n"));
        assert!(text.contains("Bounds\n a free\n b free\nGenerals\n a\nEnd\n"));
    }

    #[test]
    fn long_rows_wrap() {
        let names: Vec<String> = (0..40).map(|i| format!("var_{i}")).collect();
        let mut p = HPolytope::new(names.clone()).unwrap();
        p.add(LinIneq::le(names.iter().map(|n| (n.clone(), Rat::one())), 1)).unwrap();
        let text = write_lp(&p, None, &[], "");
        assert!(text.lines().all(|l| l.len() <= LINE_WIDTH + 12));
        assert!(text.lines().filter(|l| l.starts_with("   ")).count() > 2);
    }

    #[test]
    fn json_rows_are_normalized() {
        let mut p = HPolytope::new(["a"]).unwrap();
        p.add(LinIneq::ge([("a", Rat::new(1, 2))], Rat::new(1, 4))).unwrap();
        let j: serde_json::Value = serde_json::from_str(&rows_json(&p)).unwrap();
        assert_eq!(j["inequalities"][0]["coeffs"]["a"], -2);
        assert_eq!(j["inequalities"][0]["rhs"], -1);
        assert_eq!(j["inequalities"][0]["sense"], "<=");
    }
}
