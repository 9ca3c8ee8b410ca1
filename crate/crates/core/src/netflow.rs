//! The cyclic switching network and its flow formulation.
//!
//! Node `(0, t)` means "switch on in period `t`", node `(1, t)` "switch off in
//! period `t`". An arc leaving `(0, t)` with length `p` is an on-interval
//! covering periods `t..t+p-1`, and symmetrically for off-intervals.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::instance::{all_states, enumerate_z, is_feasible, wrap, Instance, YZPoint};
use crate::rat::Rat;
use crate::ratpoly::{membership_in_conv, CompiledPoly, HPolytope, LinIneq, Point, PreparedLp};

/// A network node `(state, period)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Node {
    pub state: u8,
    pub period: usize,
}

impl Node {
    pub fn new(state: u8, period: usize) -> Node {
        Node { state, period }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub from: Node,
    pub to: Node,
    /// Run length in periods.
    pub len: usize,
}

/// For each period, the on-arcs and off-arcs whose run covers it.
#[derive(Debug, Clone, Serialize)]
pub struct ArcWindowIndex {
    pub on_cover: Vec<Vec<usize>>,
    pub off_cover: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleNetwork {
    pub n: usize,
    pub arcs: Vec<Arc>,
    pub windows: ArcWindowIndex,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

fn node_id(v: Node) -> usize {
    2 * v.period + v.state as usize
}

impl CycleNetwork {
    pub fn nodes(&self) -> Vec<Node> {
        (0..self.n).flat_map(|t| [Node::new(0, t), Node::new(1, t)]).collect()
    }

    pub fn out_arcs(&self, v: Node) -> &[usize] {
        &self.out[node_id(v)]
    }

    pub fn in_arcs(&self, v: Node) -> &[usize] {
        &self.inc[node_id(v)]
    }

    pub fn find_arc(&self, from: Node, to: Node) -> Option<usize> {
        self.out_arcs(from).iter().copied().find(|&a| self.arcs[a].to == to)
    }

    /// Whether arc `a` covers period `t`, i.e. `t` lies in `[r, l-1]` cyclically.
    pub fn covers(&self, a: usize, t: usize) -> bool {
        let arc = &self.arcs[a];
        wrap(t as isize - arc.from.period as isize, self.n) < arc.len
    }

    pub fn arc_var(&self, a: usize) -> String {
        let arc = &self.arcs[a];
        format!("x_{}_{}_{}", arc.from.state, arc.from.period, arc.to.period)
    }
}

pub fn build_network(inst: &Instance) -> CycleNetwork {
    let n = inst.n;
    let mut arcs = Vec::new();
    for t in 0..n {
        for p in inst.alpha[t]..=inst.beta[t] {
            arcs.push(Arc { from: Node::new(0, t), to: Node::new(1, (t + p) % n), len: p });
        }
        for p in inst.gamma[t]..=inst.delta[t] {
            arcs.push(Arc { from: Node::new(1, t), to: Node::new(0, (t + p) % n), len: p });
        }
    }
    let mut out = vec![Vec::new(); 2 * n];
    let mut inc = vec![Vec::new(); 2 * n];
    let mut on_cover = vec![Vec::new(); n];
    let mut off_cover = vec![Vec::new(); n];
    for (a, arc) in arcs.iter().enumerate() {
        out[node_id(arc.from)].push(a);
        inc[node_id(arc.to)].push(a);
        for k in 0..arc.len {
            let t = (arc.from.period + k) % n;
            if arc.from.state == 0 {
                on_cover[t].push(a);
            } else {
                off_cover[t].push(a);
            }
        }
    }
    CycleNetwork { n, arcs, windows: ArcWindowIndex { on_cover, off_cover }, out, inc }
}

/// Arc list of the closed walk through `nodes` (the first node is not repeated).
pub fn cycle_from_nodes(net: &CycleNetwork, nodes: &[Node]) -> Result<Vec<usize>> {
    if nodes.is_empty() {
        return Err(invalid("empty node sequence"));
    }
    (0..nodes.len())
        .map(|k| {
            let (u, v) = (nodes[k], nodes[(k + 1) % nodes.len()]);
            net.find_arc(u, v).ok_or_else(|| {
                invalid(format!("no arc from ({},{}) to ({},{})", u.state, u.period, v.state, v.period))
            })
        })
        .collect()
}

fn check_closed_walk(net: &CycleNetwork, walk: &[usize]) -> Result<usize> {
    if walk.is_empty() {
        return Err(invalid("empty arc list"));
    }
    for k in 0..walk.len() {
        let a = *walk.get(k).unwrap();
        if a >= net.arcs.len() {
            return Err(invalid(format!("arc index {a} out of range")));
        }
        let b = walk[(k + 1) % walk.len()];
        if b >= net.arcs.len() || net.arcs[a].to != net.arcs[b].from {
            return Err(invalid("arcs do not form a closed walk"));
        }
    }
    Ok(walk.iter().map(|&a| net.arcs[a].len).sum())
}

/// Arc indicator and `(y, z)` of a length-`n` cycle.
pub fn cycle_to_point(net: &CycleNetwork, cycle: &[usize]) -> Result<(Vec<u8>, YZPoint)> {
    let total = check_closed_walk(net, cycle)?;
    if total != net.n {
        return Err(Error::NotLengthNCycle { total, n: net.n });
    }
    let mut x = vec![0u8; net.arcs.len()];
    for &a in cycle {
        x[a] = 1;
    }
    let y: Vec<u8> = (0..net.n)
        .map(|t| u8::from(net.windows.on_cover[t].iter().any(|&a| x[a] == 1)))
        .collect();
    let z: Vec<u8> = (0..net.n)
        .map(|t| u8::from(net.out_arcs(Node::new(0, t)).iter().any(|&a| x[a] == 1)))
        .collect();
    Ok((x, YZPoint::from_binary(&y, &z)))
}

/// The length-`n` cycle whose runs are exactly the runs of a feasible `y`.
pub fn point_to_cycle(net: &CycleNetwork, y: &[u8]) -> Result<Vec<usize>> {
    let n = net.n;
    if y.len() != n || !y.iter().any(|&v| v == 1) || y.iter().all(|&v| v == 1) {
        return Err(invalid("state vector must have length n and contain both states"));
    }
    let start = (0..n).find(|&t| y[t] != y[wrap(t as isize - 1, n)]).unwrap();
    let mut arcs = Vec::new();
    let mut t = start;
    loop {
        let state = y[t];
        let mut len = 1;
        while y[(t + len) % n] == state {
            len += 1;
        }
        let from = Node::new(1 - state, t);
        let to = Node::new(state, (t + len) % n);
        let a = net
            .out_arcs(from)
            .iter()
            .copied()
            .find(|&a| net.arcs[a].to == to && net.arcs[a].len == len)
            .ok_or_else(|| invalid(format!("run of length {len} at period {t} has no arc")))?;
        arcs.push(a);
        t = (t + len) % n;
        if t == start {
            return Ok(arcs);
        }
    }
}

/// Every directed cycle of total length `n`, each listed once starting with
/// its arc that covers period 0.
pub fn length_n_cycles(net: &CycleNetwork) -> Vec<Vec<usize>> {
    let mut found = Vec::new();
    let starts: Vec<usize> = (0..net.arcs.len()).filter(|&a| net.covers(a, 0)).collect();
    for a in starts {
        let mut path = vec![a];
        extend_cycle(net, &mut path, net.arcs[a].len, &mut found);
    }
    found
}

fn extend_cycle(net: &CycleNetwork, path: &mut Vec<usize>, len: usize, found: &mut Vec<Vec<usize>>) {
    let first = net.arcs[path[0]].from;
    let last = net.arcs[*path.last().unwrap()].to;
    if len == net.n {
        if last == first {
            found.push(path.clone());
        }
        return;
    }
    for &b in net.out_arcs(last) {
        let l = net.arcs[b].len;
        if len + l <= net.n {
            path.push(b);
            extend_cycle(net, path, len + l, found);
            path.pop();
        }
    }
}

/// The flow polytope together with its network.
#[derive(Debug, Clone)]
pub struct QModel {
    pub network: CycleNetwork,
    pub poly: HPolytope,
}

impl QModel {
    pub fn y_var(t: usize) -> String {
        format!("y_{t}")
    }

    pub fn z_var(t: usize) -> String {
        format!("z_{t}")
    }

    /// Point assigning `weight` to every arc of `walk` (counted with
    /// multiplicity) and the induced `(y, z)`.
    pub fn lift_walk(&self, walk: &[usize], weight: &Rat) -> Point {
        let net = &self.network;
        let mut x = vec![Rat::zero(); net.arcs.len()];
        for &a in walk {
            x[a] += weight;
        }
        self.lift_flow(&x)
    }

    /// Completes an arc-flow vector with the `(y, z)` it defines.
    pub fn lift_flow(&self, x: &[Rat]) -> Point {
        let net = &self.network;
        let mut p = Point::new();
        for (a, v) in x.iter().enumerate() {
            p.insert(net.arc_var(a), v.clone());
        }
        for t in 0..net.n {
            let y: Rat = net.windows.on_cover[t].iter().map(|&a| &x[a]).sum();
            let z: Rat = net.out_arcs(Node::new(0, t)).iter().map(|&a| &x[a]).sum();
            p.insert(Self::y_var(t), y);
            p.insert(Self::z_var(t), z);
        }
        p
    }

    pub fn projection(&self, p: &Point) -> YZPoint {
        let n = self.network.n;
        YZPoint {
            y: (0..n).map(|t| p[&Self::y_var(t)].clone()).collect(),
            z: (0..n).map(|t| p[&Self::z_var(t)].clone()).collect(),
        }
    }

    /// Column indices of `y_0..y_{n-1}, z_0..z_{n-1}` in the compiled polytope.
    pub fn yz_columns(&self) -> Vec<usize> {
        let m = self.network.arcs.len();
        (m..m + 2 * self.network.n).collect()
    }
}

/// The flow formulation over arc variables followed by `y` and `z`.
pub fn build_q(inst: &Instance) -> QModel {
    let net = build_network(inst);
    let n = inst.n;
    let mut vars: Vec<String> = (0..net.arcs.len()).map(|a| net.arc_var(a)).collect();
    vars.extend((0..n).map(QModel::y_var));
    vars.extend((0..n).map(QModel::z_var));
    let mut poly = HPolytope::new(vars).expect("distinct names");
    let one = Rat::one;
    let xv = |a: usize| (net.arc_var(a), one());

    let injection = net.windows.off_cover[0].iter().chain(&net.windows.on_cover[0]).map(|&a| xv(a));
    poly.add(LinIneq::eq(injection, 1).with_label("injection")).unwrap();
    for v in net.nodes() {
        let terms = net
            .in_arcs(v)
            .iter()
            .map(|&a| xv(a))
            .chain(net.out_arcs(v).iter().map(|&a| (net.arc_var(a), -one())));
        poly.add(LinIneq::eq(terms, 0).with_label(format!("conserve_{}_{}", v.state, v.period))).unwrap();
    }
    for t in 0..n {
        let terms = std::iter::once((QModel::y_var(t), one()))
            .chain(net.windows.on_cover[t].iter().map(|&a| (net.arc_var(a), -one())));
        poly.add(LinIneq::eq(terms, 0).with_label(format!("ydef_{t}"))).unwrap();
    }
    for t in 0..n {
        let terms = std::iter::once((QModel::z_var(t), one()))
            .chain(net.out_arcs(Node::new(0, t)).iter().map(|&a| (net.arc_var(a), -one())));
        poly.add(LinIneq::eq(terms, 0).with_label(format!("zdef_{t}"))).unwrap();
    }
    for a in 0..net.arcs.len() {
        poly.add(LinIneq::ge([xv(a)], 0).with_label(format!("nonneg_{}", net.arc_var(a)))).unwrap();
    }
    QModel { network: net, poly }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexCertificate {
    pub extreme: bool,
    pub in_hull: bool,
    pub projection: YZPoint,
}

/// Extremality in the flow polytope and hull membership of the projection,
/// for an arbitrary point of the flow polytope.
pub fn point_certificate(inst: &Instance, model: &QModel, point: &Point) -> Result<VertexCertificate> {
    if !model.poly.contains(point)? {
        return Err(invalid("point violates the flow formulation"));
    }
    let extreme = model.poly.is_extreme(point)?;
    let projection = model.projection(point);
    let hull: Vec<Vec<Rat>> = enumerate_z(inst)?.iter().map(YZPoint::to_vec).collect();
    let in_hull = !hull.is_empty() && membership_in_conv(&hull, &projection.to_vec())?;
    Ok(VertexCertificate { extreme, in_hull, projection })
}

/// Certificate for a closed walk carrying uniform flow `weight`.
pub fn fractional_vertex_certificate(inst: &Instance, walk: &[usize], weight: &Rat) -> Result<VertexCertificate> {
    let model = build_q(inst);
    check_closed_walk(&model.network, walk)?;
    point_certificate(inst, &model, &model.lift_walk(walk, weight))
}

/// Binary `(y, z)` pairs that extend to a point of the flow polytope, found
/// by an LP feasibility test with `y, z` fixed for each of the `4^n` pairs.
pub fn integral_projection(inst: &Instance, limit_n: usize) -> Result<Vec<YZPoint>> {
    if inst.n > limit_n {
        return Err(Error::ResourceLimit(format!("scan of 4^{} pairs exceeds limit n<={limit_n}", inst.n)));
    }
    let model = build_q(inst);
    let compiled = model.poly.compile();
    let cols = model.yz_columns();
    let mut found = Vec::new();
    let states: Vec<Vec<u8>> = all_states(inst.n).collect();
    for y in &states {
        for z in &states {
            if fixed_yz_feasible(&compiled, &cols, y, z) {
                found.push(YZPoint::from_binary(y, z));
            }
        }
    }
    Ok(found)
}

pub(crate) fn fixed_yz_feasible(compiled: &CompiledPoly, cols: &[usize], y: &[u8], z: &[u8]) -> bool {
    let fixed: Vec<(usize, Rat)> =
        cols.iter().zip(y.iter().chain(z)).map(|(&c, &v)| (c, Rat::from_int(v as i64))).collect();
    PreparedLp::new(&compiled.with_fixed(&fixed)).is_feasible()
}

/// Whether the rational `(y, z)` lies in the projection of `poly`, given the
/// compiled columns of `y` and `z`.
pub fn projection_contains(compiled: &CompiledPoly, cols: &[usize], p: &YZPoint) -> bool {
    let fixed: Vec<(usize, Rat)> = cols.iter().cloned().zip(p.to_vec()).collect();
    PreparedLp::new(&compiled.with_fixed(&fixed)).is_feasible()
}

/// The proof identities on a flow vector: every period is covered by total
/// flow one, and at integral `(y, z)` the out-flow of `(0,t)` and `(1,t)`
/// equals the switch-on and switch-off indicators.
pub fn flow_identities_hold(model: &QModel, point: &Point) -> bool {
    let net = &model.network;
    let x = |a: usize| point[&net.arc_var(a)].clone();
    for t in 0..net.n {
        let cover: Rat = net.windows.on_cover[t].iter().chain(&net.windows.off_cover[t]).map(|&a| x(a)).sum();
        if !cover.is_one() {
            return false;
        }
    }
    let yz = model.projection(point);
    if let Some(y) = yz.states() {
        for t in 0..net.n {
            let prev = y[wrap(t as isize - 1, net.n)];
            let on: Rat = net.out_arcs(Node::new(0, t)).iter().map(|&a| x(a)).sum();
            let off: Rat = net.out_arcs(Node::new(1, t)).iter().map(|&a| x(a)).sum();
            if on != Rat::from_int(i64::from(prev == 0 && y[t] == 1))
                || off != Rat::from_int(i64::from(prev == 1 && y[t] == 0))
            {
                return false;
            }
        }
    }
    true
}

/// Graphviz rendering with arc labels `(p)`; arcs in `highlight` are drawn dashed and bold.
pub fn network_dot(net: &CycleNetwork, highlight: &[usize]) -> String {
    let mut s = String::from("digraph network {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    for v in net.nodes() {
        let _ = writeln!(s, "  n{}_{} [label=\"({},{})\"];", v.state, v.period, v.state, v.period);
    }
    let marked: BTreeMap<usize, ()> = highlight.iter().map(|&a| (a, ())).collect();
    for (a, arc) in net.arcs.iter().enumerate() {
        let style = if marked.contains_key(&a) { ", style=dashed, penwidth=3" } else { "" };
        let _ = writeln!(
            s,
            "  n{}_{} -> n{}_{} [label=\"({})\"{style}];",
            arc.from.state, arc.from.period, arc.to.state, arc.to.period, arc.len
        );
    }
    s.push_str("}\n");
    s
}

/// `is_feasible` restated on the cycle side, used as a cross-check.
pub fn cycle_is_feasible(inst: &Instance, net: &CycleNetwork, cycle: &[usize]) -> bool {
    cycle_to_point(net, cycle).is_ok_and(|(_, p)| p.states().is_some_and(|y| is_feasible(inst, &y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{derive_startups, enumerate_states};

    fn inst(n: usize, b: (usize, usize, usize, usize)) -> Instance {
        Instance::constant(n, b).unwrap()
    }

    fn nodes(seq: &[(u8, usize)]) -> Vec<Node> {
        seq.iter().map(|&(i, t)| Node::new(i, t)).collect()
    }

    fn bits(v: &[Rat]) -> Vec<u8> {
        v.iter().map(|x| x.to_i64().unwrap() as u8).collect()
    }

    #[test]
    fn network_sizes() {
        let net = build_network(&inst(6, (1, 2, 1, 2)));
        assert_eq!(net.nodes().len(), 12);
        assert_eq!(net.arcs.len(), 24);
        assert_eq!(build_network(&inst(6, (1, 3, 1, 3))).arcs.len(), 36);
        let alt = build_network(&inst(4, (1, 1, 1, 1)));
        assert_eq!(alt.arcs.len(), 8);
        let cycles = length_n_cycles(&alt);
        assert_eq!(cycles.len(), 2);
        let (_, p) = cycle_to_point(&alt, &cycles[0]).unwrap();
        let y = bits(&p.y);
        assert!(y == vec![1, 0, 1, 0] || y == vec![0, 1, 0, 1]);
    }

    #[test]
    fn windows_are_disjoint_and_match_cover() {
        let net = build_network(&inst(6, (1, 3, 2, 3)));
        for t in 0..6 {
            for &a in &net.windows.on_cover[t] {
                assert!(!net.windows.off_cover[t].contains(&a));
                assert!(net.covers(a, t));
            }
            let total = (0..net.arcs.len()).filter(|&a| net.covers(a, t)).count();
            assert_eq!(total, net.windows.on_cover[t].len() + net.windows.off_cover[t].len());
        }
    }

    #[test]
    fn dashed_cycle_of_the_small_network() {
        let net = build_network(&inst(6, (1, 2, 1, 2)));
        let c = cycle_from_nodes(&net, &nodes(&[(0, 0), (1, 2), (0, 3), (1, 4)])).unwrap();
        let (_, p) = cycle_to_point(&net, &c).unwrap();
        assert_eq!(bits(&p.y), vec![1, 1, 0, 1, 0, 0]);
        assert_eq!(bits(&p.z), vec![1, 0, 0, 1, 0, 0]);
        assert_eq!(point_to_cycle(&net, &[1, 1, 0, 1, 0, 0]).unwrap().len(), 4);
    }

    #[test]
    fn double_length_walk_is_rejected() {
        let net = build_network(&inst(6, (1, 3, 1, 3)));
        let walk = cycle_from_nodes(&net, &nodes(&[(0, 0), (1, 3), (0, 4), (1, 1), (0, 2), (1, 5)])).unwrap();
        assert_eq!(cycle_to_point(&net, &walk), Err(Error::NotLengthNCycle { total: 12, n: 6 }));
    }

    #[test]
    fn q_row_counts() {
        let m = build_q(&inst(6, (1, 2, 1, 2)));
        assert_eq!(m.poly.dim(), 36);
        assert_eq!(m.poly.equalities.len(), 1 + 4 * 6);
        assert_eq!(m.poly.inequalities.len(), 24);
    }

    #[test]
    fn cycles_biject_with_states() {
        for b in [(1, 2, 1, 2), (1, 3, 2, 3), (2, 3, 1, 2)] {
            for n in 4..=8 {
                let i = inst(n, b);
                let net = build_network(&i);
                let mut from_cycles: Vec<Vec<u8>> = length_n_cycles(&net)
                    .iter()
                    .map(|c| bits(&cycle_to_point(&net, c).unwrap().1.y))
                    .collect();
                from_cycles.sort();
                let n_before = from_cycles.len();
                from_cycles.dedup();
                assert_eq!(n_before, from_cycles.len());
                assert_eq!(from_cycles, enumerate_states(&i, 20).unwrap());
                for y in &from_cycles {
                    let c = point_to_cycle(&net, y).unwrap();
                    let (_, p) = cycle_to_point(&net, &c).unwrap();
                    assert_eq!(&bits(&p.y), y);
                    assert_eq!(bits(&p.z), derive_startups(y));
                }
            }
        }
    }

    #[test]
    fn lifted_cycles_satisfy_identities() {
        let i = inst(6, (1, 2, 1, 2));
        let m = build_q(&i);
        for c in length_n_cycles(&m.network) {
            let p = m.lift_walk(&c, &Rat::one());
            assert!(m.poly.contains(&p).unwrap());
            assert!(m.poly.is_extreme(&p).unwrap());
            assert!(flow_identities_hold(&m, &p));
        }
    }

    #[test]
    fn fractional_example_certificate() {
        let i = inst(6, (1, 3, 1, 3));
        let net = build_network(&i);
        let walk = cycle_from_nodes(&net, &nodes(&[(0, 0), (1, 3), (0, 4), (1, 1), (0, 2), (1, 5)])).unwrap();
        let cert = fractional_vertex_certificate(&i, &walk, &Rat::new(1, 2)).unwrap();
        assert!(cert.extreme);
        assert!(!cert.in_hull);
        let h = Rat::new(1, 2);
        let (o, z) = (Rat::one(), Rat::zero());
        assert_eq!(cert.projection.y, vec![o.clone(), h.clone(), o.clone(), h.clone(), o, h.clone()]);
        assert_eq!(cert.projection.z, vec![h.clone(), z.clone(), h.clone(), z.clone(), h, z]);
        assert!(fractional_vertex_certificate(&i, &walk, &Rat::one()).is_err());
    }

    #[test]
    fn integral_and_midpoint_certificates() {
        let i = inst(6, (1, 3, 1, 3));
        let m = build_q(&i);
        let cycles = length_n_cycles(&m.network);
        let cert = point_certificate(&i, &m, &m.lift_walk(&cycles[0], &Rat::one())).unwrap();
        assert!(cert.extreme && cert.in_hull);
        let h = Rat::new(1, 2);
        let mut walk = cycles[0].clone();
        walk.extend(&cycles[1]);
        let cert = point_certificate(&i, &m, &m.lift_walk(&walk, &h)).unwrap();
        assert!(!cert.extreme && cert.in_hull);
    }

    #[test]
    fn integral_projection_small() {
        let i = inst(4, (1, 2, 1, 2));
        let got = integral_projection(&i, 8).unwrap();
        let mut want = enumerate_z(&i).unwrap();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn dot_output_marks_cycle() {
        let net = build_network(&inst(6, (1, 2, 1, 2)));
        let c = cycle_from_nodes(&net, &nodes(&[(0, 0), (1, 2), (0, 3), (1, 4)])).unwrap();
        let dot = network_dot(&net, &c);
        assert_eq!(dot.matches("style=dashed").count(), 4);
        assert!(dot.contains("n0_0 -> n1_2 [label=\"(2)\", style=dashed, penwidth=3];"));
    }
}
