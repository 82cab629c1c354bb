use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rug::{Float, Integer};

use super::poly::Poly;
use super::scalar::{Cx, GaussRat, Scalar};
use crate::error::{Error, Result};

/// A root cluster: centroid and the number of roots it absorbed.
#[derive(Clone, Debug)]
pub struct Root {
    pub value: Cx,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub converged: bool,
}

impl RootSet {
    pub fn require_converged(self) -> Result<Vec<Root>> {
        if self.converged {
            Ok(self.roots)
        } else {
            let total = self.roots.iter().map(|r| r.multiplicity).sum();
            Err(Error::NonConvergence { converged: 0, total })
        }
    }
}

/// Root found from a polynomial with possibly exact coefficients.
#[derive(Clone, Debug)]
pub struct FoundRoot {
    pub value: Cx,
    pub multiplicity: usize,
    pub exact: Option<GaussRat>,
}

fn horner64(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Double-precision Aberth-Ehrlich iteration; `None` if it fails to settle.
pub fn aberth_f64(c: &[Complex64], max_iter: usize) -> Option<Vec<Complex64>> {
    let n = c.len().checked_sub(1)?;
    if n == 0 {
        return Some(vec![]);
    }
    let lead = c[n].norm();
    if lead == 0.0 || !lead.is_finite() {
        return None;
    }
    let r = (c[0].norm() / lead).powf(1.0 / n as f64).max(1e-3);
    let r = if r.is_finite() { r } else { 1.0 };
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    let absc: Vec<f64> = c.iter().map(|a| a.norm()).collect();
    let mut done = vec![false; n];
    for _ in 0..max_iter {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp) = horner64(c, z[i]);
            let bound = absc.iter().rev().fold(0.0, |acc, a| acc * z[i].norm() + a);
            if p.norm() <= 8.0 * n as f64 * f64::EPSILON * bound {
                done[i] = true;
                continue;
            }
            all = false;
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if !w.re.is_finite() || !w.im.is_finite() {
                return None;
            }
            z[i] -= w;
        }
        if all {
            return Some(z);
        }
    }
    None
}

/// Eigenvalues of the companion matrix, after rescaling `z` so that the
/// constant and leading coefficients have equal size. `None` if the QR
/// iteration does not settle.
pub fn companion_roots(c: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = c.len().checked_sub(1)?;
    if n == 0 {
        return Some(vec![]);
    }
    let lead = c[n];
    let s = (c[0].norm() / lead.norm()).powf(1.0 / n as f64);
    let s = if s.is_finite() && s > 0.0 { s } else { 1.0 };
    // monic coefficients of p(s w) / (lead s^n)
    let scaled: Vec<Complex64> = (0..n).map(|k| c[k] / lead * s.powi(k as i32 - n as i32)).collect();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -scaled[i]
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let ev = Schur::try_new(m, f64::EPSILON, 200 * n)?.eigenvalues()?;
    Some(ev.iter().map(|w| w * s).collect())
}

fn initial_guesses(p: &Poly<Cx>) -> Vec<Complex64> {
    let n = p.deg0();
    let c64: Vec<Complex64> = p.coeffs().iter().map(|c| c.to_c64()).collect();
    let finite = c64.iter().all(|c| c.re.is_finite() && c.im.is_finite()) && c64[n].norm() > 0.0;
    let mut z = if finite {
        aberth_f64(&c64, 400).or_else(|| companion_roots(&c64))
    } else {
        None
    }
    .unwrap_or_else(|| {
        (0..n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
            .collect()
    });
    // Aberth needs pairwise distinct starting points.
    for i in 0..z.len() {
        for j in 0..i {
            if (z[i] - z[j]).norm() <= 1e-12 * (1.0 + z[i].norm()) {
                let bump = Complex64::from_polar(1e-7 * (1.0 + z[i].norm()), 0.7 + i as f64);
                z[i] += bump;
            }
        }
        if !z[i].re.is_finite() || !z[i].im.is_finite() {
            z[i] = Complex64::from_polar(1.0, i as f64);
        }
    }
    z
}

/// All roots of a nonzero polynomial at the precision of its coefficients.
///
/// Roots are refined by Aberth-Ehrlich iteration from double-precision starting
/// values and grouped into clusters of radius `eps_cluster * max(1, |z|)`;
/// each cluster is reported once with its centroid and size.
pub fn poly_roots(p: &Poly<Cx>, eps_cluster: f64) -> Result<RootSet> {
    let deg = p.degree().ok_or(Error::ZeroPolynomial)?;
    let prec = p.ctx();
    let zeros_at_origin = p.low_order();
    let reduced = Poly::new(p.coeffs()[zeros_at_origin..].to_vec(), prec);
    let n = deg - zeros_at_origin;
    let mut roots = Vec::new();
    if zeros_at_origin > 0 {
        roots.push(Root {
            value: Cx::zero(prec),
            multiplicity: zeros_at_origin,
        });
    }
    if n == 0 {
        return Ok(RootSet { roots, converged: true });
    }
    let (approx, converged) = aberth_mp(&reduced, initial_guesses(&reduced));
    roots.extend(cluster(approx, eps_cluster));
    Ok(RootSet { roots, converged })
}

fn aberth_mp(p: &Poly<Cx>, init: Vec<Complex64>) -> (Vec<Cx>, bool) {
    let prec = p.ctx();
    let n = p.deg0();
    let c = p.coeffs();
    let dp = p.derivative();
    let absc: Vec<f64> = c.iter().map(|a| a.abs_f64()).collect();
    let eps = (2.0f64).powi(-(prec as i32));
    let mut z: Vec<Cx> = init.iter().map(|w| Cx::from_c64(*w, prec)).collect();
    let mut done = vec![false; n];
    let max_iter = 100 + 2 * prec as usize;
    let one = Cx::one(prec);
    for _ in 0..max_iter {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let pv = p.eval(&z[i]);
            let zabs = z[i].abs_f64();
            let bound = absc.iter().rev().fold(0.0, |acc, a| acc * zabs + a);
            if pv.abs_f64() <= 16.0 * n as f64 * eps * bound {
                done[i] = true;
                continue;
            }
            all = false;
            let dv = dp.eval(&z[i]);
            let ratio = &pv / &dv;
            let mut s = Cx::zero(prec);
            for j in 0..n {
                if j != i {
                    s = s + (&z[i] - &z[j]).recip();
                }
            }
            let w = &ratio / &(&one - &(&ratio * &s));
            if !w.is_finite() {
                continue;
            }
            let step_small = w.abs_f64() <= eps * 4.0 * (1.0 + zabs);
            z[i] = &z[i] - &w;
            if step_small {
                done[i] = true;
            }
        }
        if all {
            return (z, true);
        }
    }
    let ok = done.iter().all(|d| *d);
    (z, ok)
}

fn cluster(z: Vec<Cx>, eps: f64) -> Vec<Root> {
    let n = z.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    let zabs: Vec<f64> = z.iter().map(|w| w.abs_f64()).collect();
    for i in 0..n {
        for j in 0..i {
            let tol = eps * 1.0f64.max(zabs[i]).max(zabs[j]);
            if (zabs[i] - zabs[j]).abs() > tol {
                continue;
            }
            if (&z[i] - &z[j]).abs_f64() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(g, _)| *g == r) {
            Some((_, v)) => v.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    groups
        .into_iter()
        .map(|(_, idx)| {
            let prec = z[idx[0]].prec();
            let mut s = Cx::zero(prec);
            for &i in &idx {
                s = s + &z[i];
            }
            let m = idx.len();
            Root {
                value: s.scale_real(&Float::with_val(prec, 1.0 / m as f64)),
                multiplicity: m,
            }
        })
        .collect()
}

/// Roots of a polynomial over either scalar type. For exact coefficients each
/// cluster is tested for an exact Gaussian-rational root of the same multiplicity.
pub fn find_roots<S: Scalar>(p: &Poly<S>, prec: u32, eps_cluster: f64) -> Result<Vec<FoundRoot>> {
    let pc = p.to_cx(prec);
    let roots = poly_roots(&pc, eps_cluster)?.require_converged()?;
    let exact_poly = if S::EXACT { p.as_gauss() } else { None };
    let max_den = Integer::from(1u64) << (prec / 8).clamp(16, 64);
    let tol = (2.0f64).powf(-(prec as f64) / 5.0);
    Ok(roots
        .into_iter()
        .map(|r| {
            let mut exact = None;
            let mut multiplicity = r.multiplicity;
            if let Some(ep) = &exact_poly {
                let mtol = if r.multiplicity > 1 { tol.powf(1.0 / r.multiplicity as f64) } else { tol };
                if let Some(g) = GaussRat::rationalize(&r.value, &max_den, mtol) {
                    let m = ep.multiplicity_at(&g);
                    if m > 0 {
                        multiplicity = m;
                        exact = Some(g);
                    }
                }
            }
            FoundRoot {
                value: match &exact {
                    Some(g) => Cx::from_gauss(g, prec),
                    None => r.value,
                },
                multiplicity,
                exact,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp(v: &[f64], prec: u32) -> Poly<Cx> {
        Poly::new(v.iter().map(|&x| Cx::from_f64(x, 0.0, prec)).collect(), prec)
    }

    #[test]
    fn roots_of_small_examples() {
        let eps = (2.0f64).powi(-64);
        let r = poly_roots(&cp(&[-1.0, 0.0, 1.0], 256), eps).unwrap();
        assert!(r.converged);
        assert_eq!(r.roots.len(), 2);
        for root in &r.roots {
            let res = cp(&[-1.0, 0.0, 1.0], 256).eval(&root.value);
            assert!(res.abs_f64() < 1e-60);
        }
        let r = poly_roots(&cp(&[0.0, 0.0, 1.0], 256), eps).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert_eq!(r.roots[0].multiplicity, 2);
        let p = cp(&[-1.0, 0.0, 0.0, 1.0], 256);
        let r = poly_roots(&p, eps).unwrap();
        assert_eq!(r.roots.len(), 3);
        assert!(r.roots.iter().all(|x| p.eval(&x.value).abs_f64() < 1e-60));
    }

    #[test]
    fn double_root_is_clustered() {
        // (z - 1/2)^2 (z + 2)
        let p = cp(&[0.5, -1.75, 1.0, 1.0], 256);
        let r = poly_roots(&p, (2.0f64).powi(-64)).unwrap();
        let mut m: Vec<usize> = r.roots.iter().map(|x| x.multiplicity).collect();
        m.sort();
        assert_eq!(m, vec![1, 2]);
        let double = r.roots.iter().find(|x| x.multiplicity == 2).unwrap();
        assert!((double.value.clone() - Cx::from_f64(0.5, 0.0, 256)).abs_f64() < 1e-30);
    }

    #[test]
    fn exact_roots_are_recognised() {
        let p: Poly<GaussRat> = Poly::new(
            vec![GaussRat::from_ratio(1, 4), GaussRat::from_int(-1), GaussRat::from_int(1)],
            (),
        );
        let r = find_roots(&p, 256, (2.0f64).powi(-64)).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 2);
        assert_eq!(r[0].exact, Some(GaussRat::from_ratio(1, 2)));
    }
}
