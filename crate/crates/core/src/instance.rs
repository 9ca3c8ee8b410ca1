//! Instances, cyclic index arithmetic, the feasibility oracle for the set of
//! admissible on/off sequences, and constant-bound feasibility theory.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rat::Rat;

/// Largest horizon `enumerate_z` will scan by default.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

/// Reduces a possibly negative period index modulo `n`.
///
/// Every module funnels its wrap-around arithmetic through this function.
#[inline]
pub fn wrap(t: isize, n: usize) -> usize {
    t.rem_euclid(n as isize) as usize
}

/// Cyclic interval `[a, b]` over `0..n`: `{a, …, b}` if `a ≤ b`, otherwise
/// `{a, …, n−1, 0, …, b}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclicInterval {
    pub a: usize,
    pub b: usize,
    pub n: usize,
}

impl CyclicInterval {
    pub fn new(a: usize, b: usize, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(invalid("modulus must be at least 1"));
        }
        if a >= n || b >= n {
            return Err(invalid(format!("interval endpoints {a},{b} outside 0..{n}")));
        }
        Ok(CyclicInterval { a, b, n })
    }

    pub fn len(&self) -> usize {
        wrap(self.b as isize - self.a as isize, self.n) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: usize) -> bool {
        t < self.n && wrap(t as isize - self.a as isize, self.n) < self.len()
    }

    /// Members in traversal order starting at `a`.
    pub fn members(&self) -> Vec<usize> {
        (0..self.len()).map(|i| (self.a + i) % self.n).collect()
    }
}

/// Members of the cyclic interval `[a, b]` modulo `n`, starting at `a`.
pub fn cyclic_interval_members(a: usize, b: usize, n: usize) -> Result<Vec<usize>> {
    Ok(CyclicInterval::new(a, b, n)?.members())
}

/// Horizon length and the per-period run-length bounds.
///
/// `alpha[t]..=beta[t]` bounds the length of an on-interval starting in
/// period `t`, `gamma[t]..=delta[t]` that of an off-interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instance {
    pub n: usize,
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub gamma: Vec<usize>,
    pub delta: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    alpha: Option<Vec<usize>>,
    beta: Option<Vec<usize>>,
    gamma: Option<Vec<usize>>,
    delta: Option<Vec<usize>>,
    #[serde(rename = "const")]
    constant: Option<[usize; 4]>,
}

impl Instance {
    pub fn new(
        n: usize,
        alpha: Vec<usize>,
        beta: Vec<usize>,
        gamma: Vec<usize>,
        delta: Vec<usize>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("horizon n={n} must be at least 2")));
        }
        for (name, v) in [("alpha", &alpha), ("beta", &beta), ("gamma", &gamma), ("delta", &delta)] {
            if v.len() != n {
                return Err(invalid(format!("{name} has length {}, expected {n}", v.len())));
            }
        }
        for t in 0..n {
            if !(1 <= alpha[t] && alpha[t] <= beta[t] && beta[t] < n) {
                return Err(invalid(format!(
                    "period {t}: need 1 <= alpha <= beta <= n-1, got ({}, {})",
                    alpha[t], beta[t]
                )));
            }
            if !(1 <= gamma[t] && gamma[t] <= delta[t] && delta[t] < n) {
                return Err(invalid(format!(
                    "period {t}: need 1 <= gamma <= delta <= n-1, got ({}, {})",
                    gamma[t], delta[t]
                )));
            }
        }
        Ok(Instance { n, alpha, beta, gamma, delta })
    }

    /// Instance whose four bounds do not change over time.
    pub fn constant(n: usize, bounds: (usize, usize, usize, usize)) -> Result<Self> {
        let (a, b, g, d) = bounds;
        Instance::new(n, vec![a; n], vec![b; n], vec![g; n], vec![d; n])
    }

    /// The common `(alpha, beta, gamma, delta)` if all bound vectors are constant.
    pub fn constant_bounds(&self) -> Option<(usize, usize, usize, usize)> {
        let c = |v: &[usize]| v.iter().all(|&x| x == v[0]).then_some(v[0]);
        Some((c(&self.alpha)?, c(&self.beta)?, c(&self.gamma)?, c(&self.delta)?))
    }

    pub(crate) fn require_constant(&self) -> Result<(usize, usize, usize, usize)> {
        self.constant_bounds()
            .ok_or_else(|| invalid("operation requires constant bounds"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        match (raw.constant, raw.alpha, raw.beta, raw.gamma, raw.delta) {
            (Some([a, b, g, d]), None, None, None, None) => Instance::constant(raw.n, (a, b, g, d)),
            (None, Some(a), Some(b), Some(g), Some(d)) => Instance::new(raw.n, a, b, g, d),
            _ => Err(Error::Parse(
                "instance needs either \"const\" or all of alpha, beta, gamma, delta".into(),
            )),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    /// Short human-readable descriptor, e.g. `n=6 const(1,2,1,2)`.
    pub fn descriptor(&self) -> String {
        match self.constant_bounds() {
            Some((a, b, g, d)) => format!("n={} const({a},{b},{g},{d})", self.n),
            None => format!(
                "n={} alpha={:?} beta={:?} gamma={:?} delta={:?}",
                self.n, self.alpha, self.beta, self.gamma, self.delta
            ),
        }
    }

    #[inline]
    pub fn at(&self, t: isize) -> usize {
        wrap(t, self.n)
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

/// A pair of state and start-up vectors, possibly fractional.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct YZPoint {
    pub y: Vec<Rat>,
    pub z: Vec<Rat>,
}

impl YZPoint {
    pub fn new(y: Vec<Rat>, z: Vec<Rat>) -> Result<Self> {
        if y.len() != z.len() {
            return Err(invalid("y and z must have equal length"));
        }
        let unit = |v: &Rat| !v.is_negative() && *v <= Rat::one();
        if !y.iter().chain(z.iter()).all(unit) {
            return Err(invalid("coordinates must lie in [0, 1]"));
        }
        Ok(YZPoint { y, z })
    }

    /// The point `(y, derive_startups(y))` for a binary state vector.
    pub fn from_states(y: &[u8]) -> Self {
        let z = derive_startups(y);
        YZPoint {
            y: y.iter().map(|&v| Rat::from_int(v as i64)).collect(),
            z: z.iter().map(|&v| Rat::from_int(v as i64)).collect(),
        }
    }

    pub fn from_binary(y: &[u8], z: &[u8]) -> Self {
        YZPoint {
            y: y.iter().map(|&v| Rat::from_int(v as i64)).collect(),
            z: z.iter().map(|&v| Rat::from_int(v as i64)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// `(y_0, …, y_{n−1}, z_0, …, z_{n−1})`.
    pub fn to_vec(&self) -> Vec<Rat> {
        self.y.iter().chain(self.z.iter()).cloned().collect()
    }

    pub fn from_vec(v: &[Rat]) -> Self {
        let n = v.len() / 2;
        YZPoint { y: v[..n].to_vec(), z: v[n..2 * n].to_vec() }
    }

    fn bits(v: &[Rat]) -> Option<Vec<u8>> {
        v.iter()
            .map(|x| match x.to_i64() {
                Some(0) => Some(0),
                Some(1) => Some(1),
                _ => None,
            })
            .collect()
    }

    /// The binary state vector if every coordinate is 0 or 1.
    pub fn states(&self) -> Option<Vec<u8>> {
        Self::bits(&self.y)
    }

    pub fn startups(&self) -> Option<Vec<u8>> {
        Self::bits(&self.z)
    }

    pub fn is_integral(&self) -> bool {
        self.states().is_some() && self.startups().is_some()
    }

    pub fn startup_count(&self) -> Rat {
        self.z.iter().sum()
    }

    /// Cyclic rotation by `k`: coordinate `t` moves to `t + k`.
    pub fn rotated(&self, k: usize) -> Self {
        let n = self.n();
        let rot = |v: &[Rat]| (0..n).map(|t| v[wrap(t as isize - k as isize, n)].clone()).collect();
        YZPoint { y: rot(&self.y), z: rot(&self.z) }
    }
}

impl fmt::Display for YZPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Rat]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "y=({}) z=({})", join(&self.y), join(&self.z))
    }
}

/// Renders a binary vector as a compact bit string such as `110100`.
pub fn bitstring(v: &[u8]) -> String {
    v.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

/// `z_t = 1` iff `y_{t−1} = 0` and `y_t = 1`, cyclically.
pub fn derive_startups(y: &[u8]) -> Vec<u8> {
    let n = y.len();
    (0..n)
        .map(|t| u8::from(y[t] == 1 && y[wrap(t as isize - 1, n)] == 0))
        .collect()
}

/// Ground-truth membership test for the feasible state sequences.
///
/// Checks the four cyclic run-length implications and requires at least one
/// on-period and one off-period.
pub fn is_feasible(inst: &Instance, y: &[u8]) -> bool {
    let n = inst.n;
    if y.len() != n {
        return false;
    }
    let ones = y.iter().filter(|&&v| v == 1).count();
    if ones == 0 || ones == n {
        return false;
    }
    let at = |t: usize| y[t % n];
    for t in 0..n {
        let prev = y[wrap(t as isize - 1, n)];
        if y[t] == 1 && prev == 0 {
            if (0..inst.alpha[t]).any(|i| at(t + i) != 1) {
                return false;
            }
            if !(inst.alpha[t]..=inst.beta[t]).any(|i| at(t + i) == 0) {
                return false;
            }
        }
        if y[t] == 0 && prev == 1 {
            if (0..inst.gamma[t]).any(|i| at(t + i) != 0) {
                return false;
            }
            if !(inst.gamma[t]..=inst.delta[t]).any(|i| at(t + i) == 1) {
                return false;
            }
        }
    }
    true
}

/// Every binary state vector of length `n`, in lexicographic order.
pub(crate) fn all_states(n: usize) -> impl Iterator<Item = Vec<u8>> {
    (0u64..1u64 << n).map(move |mask| (0..n).map(|t| ((mask >> (n - 1 - t)) & 1) as u8).collect())
}

/// Feasible state vectors, lexicographically ordered.
pub fn enumerate_states(inst: &Instance, limit_n: usize) -> Result<Vec<Vec<u8>>> {
    if inst.n > limit_n {
        return Err(Error::ResourceLimit(format!(
            "enumeration of n={} exceeds the limit n<={limit_n}",
            inst.n
        )));
    }
    Ok(all_states(inst.n).filter(|y| is_feasible(inst, y)).collect())
}

/// The feasible set as `(y, z)` points, using the default horizon limit.
pub fn enumerate_z(inst: &Instance) -> Result<Vec<YZPoint>> {
    enumerate_z_with_limit(inst, DEFAULT_ENUMERATION_LIMIT)
}

pub fn enumerate_z_with_limit(inst: &Instance, limit_n: usize) -> Result<Vec<YZPoint>> {
    Ok(enumerate_states(inst, limit_n)?
        .iter()
        .map(|y| YZPoint::from_states(y))
        .collect())
}

/// Integers `k` with `n/(β+δ) ≤ k ≤ n/(α+γ)` for constant bounds.
pub fn startup_count_range(inst: &Instance) -> Result<Vec<usize>> {
    let (a, b, g, d) = inst.require_constant()?;
    let n = inst.n;
    let lo = n.div_ceil(b + d);
    let hi = n / (a + g);
    Ok((lo..=hi).collect())
}

/// Builds a feasible point with exactly `k` start-ups by choosing block
/// lengths greedily so the remainder always stays coverable.
pub fn construct_witness(inst: &Instance, k: usize) -> Result<YZPoint> {
    let (a, b, g, d) = inst.require_constant()?;
    if !startup_count_range(inst)?.contains(&k) {
        return Err(invalid(format!("k={k} is not an achievable start-up count")));
    }
    let mut remaining = inst.n;
    let mut y = Vec::with_capacity(inst.n);
    for i in (1..=k).rev() {
        let rest_lo = (i - 1) * (a + g);
        let rest_hi = (i - 1) * (b + d);
        // block length s = p + q must leave a remainder in [rest_lo, rest_hi]
        let s_lo = (a + g).max(remaining.saturating_sub(rest_hi));
        let s_hi = (b + d).min(remaining - rest_lo);
        debug_assert!(s_lo <= s_hi, "greedy block choice must exist for k in range");
        let s = s_lo;
        let p = a.max(s.saturating_sub(d));
        let q = s - p;
        y.extend(std::iter::repeat(1u8).take(p));
        y.extend(std::iter::repeat(0u8).take(q));
        remaining -= s;
    }
    debug_assert_eq!(remaining, 0);
    Ok(YZPoint::from_states(&y))
}

/// First period `t` with `eps[t+1] < eps[t] − 1` (cyclically), if any.
pub fn monotonicity_violation(eps: &[usize]) -> Option<usize> {
    let n = eps.len();
    (0..n).find(|&t| (eps[(t + 1) % n] as isize) < eps[t] as isize - 1)
}

/// `eps[t+1] ≥ eps[t] − 1` for every `t`, including the wrap pair `(n−1, 0)`.
pub fn check_weak_monotonicity(eps: &[usize]) -> bool {
    monotonicity_violation(eps).is_none()
}

pub(crate) fn require_monotone(name: &str, eps: &[usize]) -> Result<()> {
    match monotonicity_violation(eps) {
        None => Ok(()),
        Some(t) => Err(invalid(format!(
            "{name} violates weak monotonicity at t={t}: {name}[{}]={} < {name}[{t}]-1={}",
            (t + 1) % eps.len(),
            eps[(t + 1) % eps.len()],
            eps[t] as isize - 1
        ))),
    }
}

/// Earliest period whose window `[k, k+eps_k−1]` still covers `t`: the
/// covering set is exactly the cyclic interval `[s, t]`.
pub fn s_index(eps: &[usize], t: usize) -> Result<usize> {
    require_monotone("eps", eps)?;
    let n = eps.len();
    if t >= n {
        return Err(invalid(format!("period {t} outside 0..{n}")));
    }
    let covers = |k: usize| wrap(t as isize - k as isize, n) < eps[k];
    let mut s = t;
    for step in 1..n {
        let k = wrap(t as isize - step as isize, n);
        if !covers(k) {
            break;
        }
        s = k;
    }
    Ok(s)
}

/// Set of start-up counts realized by a list of points.
pub fn startup_counts(points: &[YZPoint]) -> BTreeSet<usize> {
    points
        .iter()
        .map(|p| p.startup_count().to_i64().expect("integral point") as usize)
        .collect()
}
