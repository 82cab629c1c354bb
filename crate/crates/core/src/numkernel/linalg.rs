//! Dense linear algebra over [`Scalar`] with partial pivoting.

use super::scalar::Scalar;
use crate::error::{Error, Result};

pub type Matrix<S> = Vec<Vec<S>>;

fn pivot_row<S: Scalar>(a: &Matrix<S>, col: usize, from: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    for r in from..a.len() {
        if a[r][col].is_zero() {
            continue;
        }
        best = match best {
            None => Some(r),
            Some(b) if a[r][col].cmp_abs(&a[b][col]) == std::cmp::Ordering::Greater => Some(r),
            keep => keep,
        };
    }
    best
}

/// Solve the square system `a x = b`.
pub fn solve<S: Scalar>(mut a: Matrix<S>, mut b: Vec<S>) -> Result<Vec<S>> {
    let n = a.len();
    for col in 0..n {
        let p = pivot_row(&a, col, col).ok_or_else(|| Error::VerificationFailed("singular system".into()))?;
        a.swap(col, p);
        b.swap(col, p);
        let inv = S::one(a[col][col].ctx()) / &a[col][col];
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() * &inv;
            for c in col..n {
                let t = f.clone() * &a[col][c];
                a[r][c] = a[r][c].clone() - t;
            }
            let t = f * &b[col];
            b[r] = b[r].clone() - t;
        }
    }
    let mut x = b.clone();
    for r in (0..n).rev() {
        let mut s = b[r].clone();
        for c in r + 1..n {
            s = s - a[r][c].clone() * &x[c];
        }
        x[r] = s / &a[r][r];
    }
    Ok(x)
}

/// Least-squares solution of the overdetermined system `a x = b` via the normal equations.
pub fn least_squares<S: Scalar>(a: &Matrix<S>, b: &[S]) -> Result<Vec<S>> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    if n == 0 {
        return Ok(vec![]);
    }
    let ctx = a[0][0].ctx();
    let mut ata = vec![vec![S::zero(ctx); n]; n];
    let mut atb = vec![S::zero(ctx); n];
    for r in 0..m {
        for i in 0..n {
            let ci = a[r][i].conj();
            for j in 0..n {
                ata[i][j] = ata[i][j].clone() + ci.clone() * &a[r][j];
            }
            atb[i] = atb[i].clone() + ci * &b[r];
        }
    }
    solve(ata, atb)
}

pub fn determinant<S: Scalar>(mut a: Matrix<S>) -> S {
    let n = a.len();
    let ctx = a[0][0].ctx();
    let mut det = S::one(ctx);
    for col in 0..n {
        let Some(p) = pivot_row(&a, col, col) else {
            return S::zero(ctx);
        };
        if p != col {
            a.swap(col, p);
            det = -det;
        }
        det = det * &a[col][col];
        let inv = S::one(ctx) / &a[col][col];
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() * &inv;
            for c in col..n {
                let t = f.clone() * &a[col][c];
                a[r][c] = a[r][c].clone() - t;
            }
        }
    }
    det
}

/// Basis of the null space of `a`; entries with magnitude at most `tol * scale` count as zero.
pub fn kernel<S: Scalar>(a: &Matrix<S>, ncols: usize, tol: f64) -> Vec<Vec<S>> {
    let mut m = a.clone();
    let rows = m.len();
    let scale = m
        .iter()
        .flat_map(|r| r.iter().map(|c| c.magnitude()))
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= rows {
            break;
        }
        let mut best = None;
        for i in r..rows {
            if m[i][c].is_negligible(tol, scale) {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(b) if m[i][c].cmp_abs(&m[b][c]) == std::cmp::Ordering::Greater => Some(i),
                keep => keep,
            };
        }
        let Some(p) = best else { continue };
        m.swap(r, p);
        let inv = S::one(m[r][c].ctx()) / &m[r][c];
        for k in 0..ncols {
            m[r][k] = m[r][k].clone() * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..ncols {
                    let t = f.clone() * &m[r][k];
                    m[i][k] = m[i][k].clone() - t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let ctx = a.first().and_then(|r| r.first()).map(|c| c.ctx());
    let Some(ctx) = ctx else { return vec![] };
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![S::zero(ctx); ncols];
            v[free] = S::one(ctx);
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][free].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::scalar::GaussRat;

    fn g(k: i64) -> GaussRat {
        GaussRat::from_int(k)
    }

    #[test]
    fn solve_and_determinant() {
        let a = vec![vec![g(2), g(1)], vec![g(1), g(3)]];
        let x = solve(a.clone(), vec![g(3), g(5)]).unwrap();
        assert_eq!(x, vec![GaussRat::from_ratio(4, 5), GaussRat::from_ratio(7, 5)]);
        assert_eq!(determinant(a), g(5));
    }

    #[test]
    fn kernel_of_rank_one() {
        let a = vec![vec![g(1), g(2), g(3)], vec![g(2), g(4), g(6)]];
        let k = kernel(&a, 3, 0.0);
        assert_eq!(k.len(), 2);
        for v in &k {
            let s = v.iter().zip(&a[0]).fold(g(0), |acc, (x, y)| acc + x.clone() * y);
            assert!(s.is_zero());
        }
    }
}
