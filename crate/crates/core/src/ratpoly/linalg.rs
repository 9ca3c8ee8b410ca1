//! Small exact linear-algebra helpers.

use crate::rat::Rat;

/// Rank of a dense matrix given as rows, by fraction-exact Gaussian elimination.
pub fn rank(mut rows: Vec<Vec<Rat>>) -> usize {
    let ncols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| rows[i].get(col).is_some_and(|v| !v.is_zero())) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][col].clone();
        for i in r + 1..rows.len() {
            if rows[i].get(col).map_or(true, Rat::is_zero) {
                continue;
            }
            let f = &rows[i][col] / &pivot;
            let (head, tail) = rows.split_at_mut(i);
            let src = &head[r];
            for (k, v) in tail[0].iter_mut().enumerate().skip(col) {
                if let Some(s) = src.get(k) {
                    v.sub_mul_assign(&f, s);
                }
            }
        }
        r += 1;
    }
    r
}

/// Reduced row echelon form in place; returns the pivot column of each nonzero row.
pub fn rref(rows: &mut Vec<Vec<Rat>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows.len() {
            if i == r || rows[i][col].is_zero() {
                continue;
            }
            let f = rows[i][col].clone();
            let src = rows[r].clone();
            for (v, s) in rows[i].iter_mut().zip(&src) {
                v.sub_mul_assign(&f, s);
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rat>> {
        rows.iter().map(|r| r.iter().map(|&v| Rat::from_int(v)).collect()).collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(m(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(rank(m(&[&[0, 1, 0], &[1, 0, 0], &[1, 1, 0]])), 2);
        assert_eq!(rank(m(&[&[1, 0], &[0, 1], &[1, 1]])), 2);
        assert_eq!(rank(Vec::new()), 0);
        assert_eq!(rank(m(&[&[0, 0]])), 0);
    }

    #[test]
    fn rref_examples() {
        let mut a = m(&[&[2, 4, 6], &[1, 1, 1]]);
        let piv = rref(&mut a);
        assert_eq!(piv, vec![0, 1]);
        assert_eq!(a, m(&[&[1, 0, -1], &[0, 1, 2]]));
    }
}
