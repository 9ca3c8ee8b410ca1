//! Vertex enumeration by the double-description method on the homogenized cone
//! `{(x0, x) : a·x - b·x0 ≤ 0, x0 ≥ 0}`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rat::Rat;

use super::{linalg, HPolytope, Point, SparseRow};

pub const DEFAULT_DD_DIMENSION_LIMIT: usize = 16;
const MAX_RAYS: usize = 250_000;

#[derive(Clone)]
struct Ray {
    v: Vec<Rat>,
    zeros: Vec<u64>,
}

fn bit_set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn bits_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn dot(h: &SparseRow, v: &[Rat]) -> Rat {
    // h holds the homogenized row: terms over x (shifted by one), rhs as the x0 coefficient.
    let mut acc = Rat::zero();
    for (j, c) in &h.terms {
        acc.sub_mul_assign(&-c, &v[j + 1]);
    }
    acc.sub_mul_assign(&h.rhs, &v[0]);
    acc
}

fn make_primitive(v: &mut [Rat]) {
    let den = crate::rat::lcm_denominators(v.iter());
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&den / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |a, b| a.gcd(b));
    if g.is_zero() {
        return;
    }
    for (x, i) in v.iter_mut().zip(ints) {
        *x = Rat::from_bigint(i / &g);
    }
}

fn combine(a: &Rat, u: &[Rat], b: &Rat, w: &[Rat]) -> Vec<Rat> {
    u.iter().zip(w).map(|(x, y)| a * x + b * y).collect()
}

/// Vertices with the default dimension limit.
pub fn enumerate_vertices(poly: &HPolytope) -> Result<Vec<Point>> {
    enumerate_vertices_with_limit(poly, DEFAULT_DD_DIMENSION_LIMIT)
}

/// Exact vertex list of a bounded polytope. The dimension compared against
/// `limit` is the number of variables minus the rank of the equalities.
pub fn enumerate_vertices_with_limit(poly: &HPolytope, limit: usize) -> Result<Vec<Point>> {
    let compiled = poly.compile();
    let d = compiled.nvars;
    let eq_rows: Vec<Vec<Rat>> = compiled
        .eq
        .iter()
        .map(|r| {
            let mut row = vec![Rat::zero(); d + 1];
            for (j, c) in &r.terms {
                row[*j] = c.clone();
            }
            row[d] = r.rhs.clone();
            row
        })
        .collect();
    let eq_rank = linalg::rank(eq_rows.iter().map(|r| r[..d].to_vec()).collect());
    if d - eq_rank > limit {
        return Err(Error::ResourceLimit(format!(
            "polytope dimension bound {} exceeds vertex-enumeration limit {limit}",
            d - eq_rank
        )));
    }

    let dim = d + 1;
    // Constraint list: x0 ≥ 0 first, then the inequalities in given order.
    let x0_row = SparseRow { terms: Vec::new(), rhs: Rat::one() };
    let ineqs: Vec<&SparseRow> = std::iter::once(&x0_row).chain(compiled.ineq.iter()).collect();
    let words = ineqs.len().div_ceil(64).max(1);

    let mut lineality: Vec<Vec<Rat>> = (0..dim)
        .map(|i| {
            let mut v = vec![Rat::zero(); dim];
            v[i] = Rat::one();
            v
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();

    for r in &compiled.eq {
        absorb_equality(&mut lineality, &mut rays, r);
    }

    for (ci, h) in ineqs.iter().enumerate() {
        if let Some(li) = lineality.iter().position(|l| !dot(h, l).is_zero()) {
            let l = lineality.swap_remove(li);
            let hl = dot(h, &l);
            for other in lineality.iter_mut() {
                let ho = dot(h, other);
                if !ho.is_zero() {
                    let f = &ho / &hl;
                    for (x, y) in other.iter_mut().zip(&l) {
                        x.sub_mul_assign(&f, y);
                    }
                }
            }
            for ray in rays.iter_mut() {
                let hr = dot(h, &ray.v);
                if !hr.is_zero() {
                    let f = &hr / &hl;
                    for (x, y) in ray.v.iter_mut().zip(&l) {
                        x.sub_mul_assign(&f, y);
                    }
                    make_primitive(&mut ray.v);
                }
                bit_set(&mut ray.zeros, ci);
            }
            let mut v: Vec<Rat> = if hl.is_positive() { l.iter().map(|x| -x).collect() } else { l };
            make_primitive(&mut v);
            let mut zeros = vec![0u64; words];
            for k in 0..ci {
                bit_set(&mut zeros, k);
            }
            rays.push(Ray { v, zeros });
            continue;
        }

        let vals: Vec<Rat> = rays.iter().map(|r| dot(h, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        if pos.is_empty() {
            for (ray, v) in rays.iter_mut().zip(&vals) {
                if v.is_zero() {
                    bit_set(&mut ray.zeros, ci);
                }
            }
            continue;
        }
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let needed = pointed_dimension(&lineality, &rays).saturating_sub(2);
        let mut fresh = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common: Vec<u64> = rays[p].zeros.iter().zip(&rays[q].zeros).map(|(a, b)| a & b).collect();
                let count: usize = common.iter().map(|w| w.count_ones() as usize).sum();
                if count < needed {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(k, r)| k != p && k != q && bits_subset(&common, &r.zeros));
                if blocked {
                    continue;
                }
                let mut v = combine(&vals[p], &rays[q].v, &-&vals[q], &rays[p].v);
                make_primitive(&mut v);
                let mut zeros = common;
                bit_set(&mut zeros, ci);
                fresh.push(Ray { v, zeros });
                if rays.len() + fresh.len() > MAX_RAYS {
                    return Err(Error::ResourceLimit(format!(
                        "double description exceeded {MAX_RAYS} intermediate rays"
                    )));
                }
            }
        }
        let mut kept = Vec::with_capacity(rays.len() - pos.len() + fresh.len());
        for (i, mut ray) in rays.into_iter().enumerate() {
            if vals[i].is_positive() {
                continue;
            }
            if vals[i].is_zero() {
                bit_set(&mut ray.zeros, ci);
            }
            kept.push(ray);
        }
        kept.extend(fresh);
        rays = kept;
    }

    let mut vertices = Vec::new();
    let mut recession = !lineality.is_empty();
    for ray in &rays {
        if ray.v[0].is_zero() {
            recession = true;
        } else {
            let x: Vec<Rat> = ray.v[1..].iter().map(|c| c / &ray.v[0]).collect();
            vertices.push(x);
        }
    }
    if recession && !vertices.is_empty() {
        return Err(Error::Unbounded);
    }
    if vertices.is_empty() && recession {
        // No vertex: either empty or a polyhedron containing a line.
        let lp = super::PreparedLp::new(&compiled);
        if lp.is_feasible() {
            return Err(Error::Unbounded);
        }
    }
    vertices.sort();
    vertices.dedup();
    Ok(vertices.into_iter().map(|x| poly.named(&x)).collect())
}

fn absorb_equality(lineality: &mut Vec<Vec<Rat>>, rays: &mut [Ray], h: &SparseRow) {
    let Some(li) = lineality.iter().position(|l| !dot(h, l).is_zero()) else {
        return;
    };
    debug_assert!(rays.is_empty());
    let l = lineality.swap_remove(li);
    let hl = dot(h, &l);
    for other in lineality.iter_mut() {
        let ho = dot(h, other);
        if !ho.is_zero() {
            let f = &ho / &hl;
            for (x, y) in other.iter_mut().zip(&l) {
                x.sub_mul_assign(&f, y);
            }
        }
    }
}

fn pointed_dimension(lineality: &[Vec<Rat>], rays: &[Ray]) -> usize {
    let mut rows: Vec<Vec<Rat>> = lineality.to_vec();
    rows.extend(rays.iter().map(|r| r.v.clone()));
    linalg::rank(rows) - lineality.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratpoly::LinIneq;

    fn r(v: i64) -> Rat {
        Rat::from_int(v)
    }

    fn cube(k: usize) -> HPolytope {
        let names: Vec<String> = (0..k).map(|i| format!("x{i}")).collect();
        let mut p = HPolytope::new(names.clone()).unwrap();
        for v in &names {
            p.add(LinIneq::ge([(v.clone(), r(1))], 0)).unwrap();
            p.add(LinIneq::le([(v.clone(), r(1))], 1)).unwrap();
        }
        p
    }

    #[test]
    fn unit_cube_has_eight_vertices() {
        let v = enumerate_vertices(&cube(3)).unwrap();
        assert_eq!(v.len(), 8);
        assert!(v.iter().all(|p| p.values().all(|x| x.is_zero() || x.is_one())));
    }

    #[test]
    fn simplex_with_equality() {
        let mut p = HPolytope::new(["a", "b", "c"]).unwrap();
        for v in ["a", "b", "c"] {
            p.add(LinIneq::ge([(v, r(1))], 0)).unwrap();
        }
        p.add(LinIneq::eq([("a", r(1)), ("b", r(1)), ("c", r(1))], 2)).unwrap();
        let v = enumerate_vertices(&p).unwrap();
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn unbounded_and_empty() {
        let mut p = HPolytope::new(["a"]).unwrap();
        p.add(LinIneq::ge([("a", r(1))], 0)).unwrap();
        assert_eq!(enumerate_vertices(&p), Err(Error::Unbounded));
        let mut q = HPolytope::new(["a"]).unwrap();
        q.add(LinIneq::ge([("a", r(1))], 2)).unwrap();
        q.add(LinIneq::le([("a", r(1))], 1)).unwrap();
        assert_eq!(enumerate_vertices(&q).unwrap().len(), 0);
        let line = HPolytope::new(["a"]).unwrap();
        assert_eq!(enumerate_vertices(&line), Err(Error::Unbounded));
    }

    #[test]
    fn dimension_limit() {
        assert!(matches!(enumerate_vertices_with_limit(&cube(4), 3), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn fractional_vertices() {
        let mut p = cube(2);
        p.add(LinIneq::le([("x0", r(2)), ("x1", r(2))], 3)).unwrap();
        let v = enumerate_vertices(&p).unwrap();
        assert_eq!(v.len(), 5);
        let half = Rat::new(1, 2);
        assert!(v.iter().any(|q| q["x0"] == half && q["x1"] == r(1)));
    }
}
