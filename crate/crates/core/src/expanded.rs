//! The expanded origin–destination network.
//!
//! For every period `tau` whose on-arcs (family 0) or off-arcs (family 1)
//! can wrap past the end of the horizon there is a non-wrapping copy of the
//! cyclic network. An O–D path enters a copy through the wrapping arc, walks
//! forward in time inside the copy and leaves to D from the copy's own
//! switching node, so every feasible cyclic sequence becomes exactly one path.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::instance::{Instance, YZPoint};
use crate::netflow::build_network;
use crate::rat::Rat;
use crate::ratpoly::{HPolytope, LinIneq, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum XNode {
    Origin,
    Dest,
    /// Node `(state, period)` inside the copy of family `family` for `tau`.
    Copy { state: u8, period: usize, family: u8, tau: usize },
}

impl XNode {
    pub fn copy(state: u8, period: usize, family: u8, tau: usize) -> XNode {
        XNode::Copy { state, period, family, tau }
    }

    /// Identifier usable inside variable names.
    pub fn key(&self) -> String {
        match self {
            XNode::Origin => "O".into(),
            XNode::Dest => "D".into(),
            XNode::Copy { state, period, family, tau } => format!("{state}_{period}_{family}_{tau}"),
        }
    }
}

impl fmt::Display for XNode {
    /// Compact label `itjτ` (digits run together when all fit in one digit).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XNode::Origin => f.write_str("O"),
            XNode::Dest => f.write_str("D"),
            XNode::Copy { state, period, family, tau } => {
                if *period < 10 && *tau < 10 {
                    write!(f, "{state}{period}{family}{tau}")
                } else {
                    write!(f, "{state},{period},{family},{tau}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ArcKind {
    /// Wrapping on-interval from O into family 0.
    WrapOn,
    /// Wrapping off-interval from O into family 1.
    WrapOff,
    /// Exit from a copy's own switching node to D.
    Exit,
    /// Arc inside a family-0 copy.
    InCopyOn,
    /// Arc inside a family-1 copy.
    InCopyOff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct XArc {
    pub from: XNode,
    pub to: XNode,
    pub kind: ArcKind,
    /// Run length of the underlying cyclic arc (0 for exits).
    pub len: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpandedNetwork {
    pub n: usize,
    pub t0: Vec<usize>,
    pub t1: Vec<usize>,
    pub nodes: Vec<XNode>,
    pub arcs: Vec<XArc>,
    /// `on_window[t]` lists the arcs whose use means `y_t = 1`.
    pub on_window: Vec<Vec<usize>>,
    #[serde(skip)]
    out: HashMap<XNode, Vec<usize>>,
    #[serde(skip)]
    inc: HashMap<XNode, Vec<usize>>,
}

/// Periods whose on-runs (`T0`) and off-runs (`T1`) can wrap past `n-1`.
pub fn switch_sets(inst: &Instance) -> (Vec<usize>, Vec<usize>) {
    let n = inst.n;
    let t0 = (0..n).filter(|&t| t + inst.beta[t] >= n).collect();
    let t1 = (0..n).filter(|&t| t + inst.delta[t] >= n).collect();
    (t0, t1)
}

impl ExpandedNetwork {
    fn from_parts(n: usize, t0: Vec<usize>, t1: Vec<usize>, nodes: Vec<XNode>, arcs: Vec<XArc>) -> Self {
        let mut out: HashMap<XNode, Vec<usize>> = nodes.iter().map(|v| (*v, Vec::new())).collect();
        let mut inc = out.clone();
        for (a, arc) in arcs.iter().enumerate() {
            out.get_mut(&arc.from).expect("arc tail is a node").push(a);
            inc.get_mut(&arc.to).expect("arc head is a node").push(a);
        }
        let mut on_window = vec![Vec::new(); n];
        for (a, arc) in arcs.iter().enumerate() {
            for (t, w) in on_window.iter_mut().enumerate() {
                if on_arc_covers(arc, t) {
                    w.push(a);
                }
            }
        }
        ExpandedNetwork { n, t0, t1, nodes, arcs, on_window, out, inc }
    }

    pub fn out_arcs(&self, v: XNode) -> &[usize] {
        self.out.get(&v).map_or(&[], Vec::as_slice)
    }

    pub fn in_arcs(&self, v: XNode) -> &[usize] {
        self.inc.get(&v).map_or(&[], Vec::as_slice)
    }

    pub fn arc_var(&self, a: usize) -> String {
        format!("xp_{}__{}", self.arcs[a].from.key(), self.arcs[a].to.key())
    }

    pub fn find_arc(&self, from: XNode, to: XNode) -> Option<usize> {
        self.out_arcs(from).iter().copied().find(|&a| self.arcs[a].to == to)
    }

    /// Arcs contributing to `z_t`: all arcs leaving an on-switch node of period `t`.
    pub fn startup_arcs(&self, t: usize) -> Vec<usize> {
        let mut v = Vec::new();
        for (family, taus) in [(0u8, &self.t0), (1u8, &self.t1)] {
            for &tau in taus {
                v.extend_from_slice(self.out_arcs(XNode::copy(0, t, family, tau)));
            }
        }
        v
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = &XNode> {
        self.nodes.iter().filter(|v| matches!(v, XNode::Copy { .. }))
    }
}

fn on_arc_covers(arc: &XArc, t: usize) -> bool {
    match (arc.kind, arc.from, arc.to) {
        (ArcKind::WrapOn, _, XNode::Copy { period: l, .. }) => l > t,
        (ArcKind::Exit, XNode::Copy { state: 0, family: 0, tau, .. }, _) => tau <= t,
        (ArcKind::InCopyOn | ArcKind::InCopyOff, XNode::Copy { state: 0, period: k, .. }, XNode::Copy { period: l, .. }) => {
            k <= t && t < l
        }
        _ => false,
    }
}

/// The expanded network; with `prune` set, nodes and arcs on no O–D path are removed.
pub fn build_expanded(inst: &Instance, prune: bool) -> ExpandedNetwork {
    let n = inst.n;
    let (t0, t1) = switch_sets(inst);
    let base = build_network(inst);
    let mut nodes = vec![XNode::Origin, XNode::Dest];
    let mut arcs = Vec::new();
    for (family, taus) in [(0u8, &t0), (1u8, &t1)] {
        for &tau in taus.iter() {
            for t in 0..n {
                for state in 0..2 {
                    nodes.push(XNode::copy(state, t, family, tau));
                }
            }
            // Entry: the run starting at tau wraps to period tau + p - n.
            let (lo, hi, target_state, kind) = if family == 0 {
                (inst.alpha[tau], inst.beta[tau], 1, ArcKind::WrapOn)
            } else {
                (inst.gamma[tau], inst.delta[tau], 0, ArcKind::WrapOff)
            };
            for p in lo..=hi {
                if tau + p >= n {
                    let t = tau + p - n;
                    arcs.push(XArc { from: XNode::Origin, to: XNode::copy(target_state, t, family, tau), kind, len: p });
                }
            }
            arcs.push(XArc {
                from: XNode::copy(family, tau, family, tau),
                to: XNode::Dest,
                kind: ArcKind::Exit,
                len: 0,
            });
            let in_kind = if family == 0 { ArcKind::InCopyOn } else { ArcKind::InCopyOff };
            for arc in &base.arcs {
                let (t, l) = (arc.from.period, arc.from.period + arc.len);
                if l < n {
                    arcs.push(XArc {
                        from: XNode::copy(arc.from.state, t, family, tau),
                        to: XNode::copy(arc.to.state, l, family, tau),
                        kind: in_kind,
                        len: arc.len,
                    });
                }
            }
        }
    }
    let net = ExpandedNetwork::from_parts(n, t0, t1, nodes, arcs);
    if prune {
        prune_network(&net)
    } else {
        net
    }
}

fn reach(net: &ExpandedNetwork, start: XNode, forward: bool) -> BTreeSet<XNode> {
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        let arcs = if forward { net.out_arcs(v) } else { net.in_arcs(v) };
        for &a in arcs {
            let w = if forward { net.arcs[a].to } else { net.arcs[a].from };
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen
}

fn prune_network(net: &ExpandedNetwork) -> ExpandedNetwork {
    let fwd = reach(net, XNode::Origin, true);
    let bwd = reach(net, XNode::Dest, false);
    let keep: BTreeSet<XNode> = fwd.intersection(&bwd).copied().collect();
    let nodes: Vec<XNode> = net.nodes.iter().copied().filter(|v| keep.contains(v)).collect();
    let arcs: Vec<XArc> = net
        .arcs
        .iter()
        .copied()
        .filter(|a| keep.contains(&a.from) && keep.contains(&a.to))
        .collect();
    ExpandedNetwork::from_parts(net.n, net.t0.clone(), net.t1.clone(), nodes, arcs)
}

/// All O–D paths as arc lists, in depth-first order.
pub fn od_paths(net: &ExpandedNetwork) -> Vec<Vec<usize>> {
    let mut found = Vec::new();
    let mut path = Vec::new();
    walk_paths(net, XNode::Origin, &mut path, &mut found);
    found
}

fn walk_paths(net: &ExpandedNetwork, v: XNode, path: &mut Vec<usize>, found: &mut Vec<Vec<usize>>) {
    if v == XNode::Dest {
        found.push(path.clone());
        return;
    }
    for &a in net.out_arcs(v) {
        path.push(a);
        walk_paths(net, net.arcs[a].to, path, found);
        path.pop();
    }
}

/// The `(y, z)` encoded by an O–D path.
pub fn path_to_point(net: &ExpandedNetwork, path: &[usize]) -> Result<YZPoint> {
    if path.is_empty() || path.iter().any(|&a| a >= net.arcs.len()) {
        return Err(invalid("path must be a nonempty list of arc indices"));
    }
    if net.arcs[path[0]].from != XNode::Origin || net.arcs[*path.last().unwrap()].to != XNode::Dest {
        return Err(invalid("path must run from O to D"));
    }
    if path.windows(2).any(|w| net.arcs[w[0]].to != net.arcs[w[1]].from) {
        return Err(invalid("arcs do not chain into a path"));
    }
    let used: BTreeSet<usize> = path.iter().copied().collect();
    let count = |arcs: &[usize]| arcs.iter().filter(|a| used.contains(a)).count() as i64;
    let y = (0..net.n).map(|t| Rat::from_int(count(&net.on_window[t]))).collect();
    let z = (0..net.n).map(|t| Rat::from_int(count(&net.startup_arcs(t)))).collect();
    YZPoint::new(y, z)
}

/// The O–D path of a feasible state vector, found by following its runs.
pub fn point_to_path(net: &ExpandedNetwork, y: &[u8]) -> Result<Vec<usize>> {
    let n = net.n;
    if y.len() != n {
        return Err(invalid("state vector length differs from n"));
    }
    // The last switch decides the copy: the run that contains period n-1 starts at tau.
    let last = y[n - 1];
    let tau = (0..n).rev().find(|&t| t == 0 || y[t - 1] != last).unwrap();
    if tau == 0 && y[0] == y[n - 1] && y.iter().all(|&v| v == last) {
        return Err(invalid("state vector has no switch"));
    }
    let family = 1 - last;
    let mut len = n - tau;
    while y[(len + tau) % n] == last {
        len += 1;
    }
    let start = XNode::copy(last, (tau + len) % n, family, tau);
    let mut path = vec![net.find_arc(XNode::Origin, start).ok_or_else(|| invalid("no entry arc"))?];
    let mut t = (tau + len) % n;
    let mut state = last;
    while t != tau {
        let mut l = t + 1;
        while l < n && y[l] == y[t] {
            l += 1;
        }
        let next = XNode::copy(1 - state, l, family, tau);
        let from = XNode::copy(state, t, family, tau);
        path.push(net.find_arc(from, next).ok_or_else(|| invalid(format!("no copy arc at period {t}")))?);
        t = l;
        state = 1 - state;
    }
    path.push(
        net.find_arc(XNode::copy(family, tau, family, tau), XNode::Dest)
            .ok_or_else(|| invalid("no exit arc"))?,
    );
    Ok(path)
}

/// Flow formulation on the expanded network: variables are the arcs, then `y`, then `z`.
#[derive(Debug, Clone)]
pub struct QPrimeModel {
    pub network: ExpandedNetwork,
    pub poly: HPolytope,
}

impl QPrimeModel {
    pub fn yz_columns(&self) -> Vec<usize> {
        let m = self.network.arcs.len();
        (m..m + 2 * self.network.n).collect()
    }

    pub fn projection(&self, p: &Point) -> YZPoint {
        let n = self.network.n;
        YZPoint {
            y: (0..n).map(|t| p[&format!("y_{t}")].clone()).collect(),
            z: (0..n).map(|t| p[&format!("z_{t}")].clone()).collect(),
        }
    }

    pub fn lift_path(&self, path: &[usize]) -> Result<Point> {
        let yz = path_to_point(&self.network, path)?;
        let mut p: Point = (0..self.network.arcs.len()).map(|a| (self.network.arc_var(a), Rat::zero())).collect();
        for &a in path {
            p.insert(self.network.arc_var(a), Rat::one());
        }
        for t in 0..self.network.n {
            p.insert(format!("y_{t}"), yz.y[t].clone());
            p.insert(format!("z_{t}"), yz.z[t].clone());
        }
        Ok(p)
    }
}

pub fn build_qprime_on(net: ExpandedNetwork) -> QPrimeModel {
    let n = net.n;
    let one = Rat::one;
    let mut vars: Vec<String> = (0..net.arcs.len()).map(|a| net.arc_var(a)).collect();
    vars.extend((0..n).map(|t| format!("y_{t}")));
    vars.extend((0..n).map(|t| format!("z_{t}")));
    let mut poly = HPolytope::new(vars).expect("distinct names");
    let xv = |a: usize| (net.arc_var(a), one());
    poly.add(LinIneq::eq(net.out_arcs(XNode::Origin).iter().map(|&a| xv(a)), 1).with_label("injection"))
        .unwrap();
    for v in net.internal_nodes() {
        let terms = net
            .in_arcs(*v)
            .iter()
            .map(|&a| xv(a))
            .chain(net.out_arcs(*v).iter().map(|&a| (net.arc_var(a), -one())));
        poly.add(LinIneq::eq(terms, 0).with_label(format!("conserve_{}", v.key()))).unwrap();
    }
    for t in 0..n {
        let terms = std::iter::once((format!("y_{t}"), one()))
            .chain(net.on_window[t].iter().map(|&a| (net.arc_var(a), -one())));
        poly.add(LinIneq::eq(terms, 0).with_label(format!("ydef_{t}"))).unwrap();
    }
    for t in 0..n {
        let terms = std::iter::once((format!("z_{t}"), one()))
            .chain(net.startup_arcs(t).into_iter().map(|a| (net.arc_var(a), -one())));
        poly.add(LinIneq::eq(terms, 0).with_label(format!("zdef_{t}"))).unwrap();
    }
    for a in 0..net.arcs.len() {
        poly.add(LinIneq::ge([xv(a)], 0).with_label(format!("nonneg_{}", net.arc_var(a)))).unwrap();
    }
    QPrimeModel { network: net, poly }
}

/// Flow formulation on the pruned expanded network.
pub fn build_qprime(inst: &Instance) -> QPrimeModel {
    build_qprime_on(build_expanded(inst, true))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SizeReport {
    pub nodes: usize,
    pub arcs: usize,
    pub variables: usize,
    pub equalities: usize,
}

/// Exact sizes of the unpruned construction.
pub fn size_report(inst: &Instance) -> SizeReport {
    let net = build_expanded(inst, false);
    let internal = net.internal_nodes().count();
    SizeReport {
        nodes: net.nodes.len(),
        arcs: net.arcs.len(),
        variables: net.arcs.len() + 2 * inst.n,
        equalities: 1 + internal + 2 * inst.n,
    }
}

/// Graphviz rendering with one cluster per copy; elements removed by pruning
/// are drawn light gray and arcs of `highlight` (indices into the unpruned
/// network) dashed.
pub fn expanded_dot(inst: &Instance, highlight: &[usize]) -> String {
    let full = build_expanded(inst, false);
    let pruned = build_expanded(inst, true);
    let live_nodes: BTreeSet<XNode> = pruned.nodes.iter().copied().collect();
    let live_arcs: BTreeSet<(XNode, XNode)> = pruned.arcs.iter().map(|a| (a.from, a.to)).collect();
    let marked: BTreeSet<usize> = highlight.iter().copied().collect();
    let id = |v: &XNode| format!("\"{}\"", v.key());
    let mut s = String::from("digraph expanded {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    let _ = writeln!(s, "  {} [label=\"O\"];\n  {} [label=\"D\"];", id(&XNode::Origin), id(&XNode::Dest));
    let mut clusters: BTreeMap<(u8, usize), Vec<XNode>> = BTreeMap::new();
    for v in &full.nodes {
        if let XNode::Copy { family, tau, .. } = v {
            clusters.entry((*family, *tau)).or_default().push(*v);
        }
    }
    for ((family, tau), members) in &clusters {
        let _ = writeln!(s, "  subgraph cluster_{family}_{tau} {{\n    label=\"copy j={family} tau={tau}\";");
        for v in members {
            let gray = if live_nodes.contains(v) { "" } else { ", color=lightgray, fontcolor=lightgray" };
            let _ = writeln!(s, "    {} [label=\"{v}\"{gray}];", id(v));
        }
        s.push_str("  }\n");
    }
    for (a, arc) in full.arcs.iter().enumerate() {
        let mut attrs = Vec::new();
        if !live_arcs.contains(&(arc.from, arc.to)) {
            attrs.push("color=lightgray".to_string());
        }
        if marked.contains(&a) {
            attrs.push("style=dashed, penwidth=3".to_string());
        }
        let attrs = if attrs.is_empty() { String::new() } else { format!(" [{}]", attrs.join(", ")) };
        let _ = writeln!(s, "  {} -> {}{attrs};", id(&arc.from), id(&arc.to));
    }
    s.push_str("}\n");
    s
}
