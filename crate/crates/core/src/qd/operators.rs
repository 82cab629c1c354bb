//! Bases of `Q(P^1, A)`, the operator `nabla_f = I - f_*` on them, and Lattes detection.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use super::rqd::RationalQD;
use super::transfer::{pullback, push, sample_points, Qd};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::numkernel::linalg::least_squares;
use crate::numkernel::{Cx, GaussRat, Poly, Scalar};
use crate::ratmap::{chordal_distance, DynMap, Mobius, Pt, RationalMap, SpherePoint};

/// Basis of the integrable differentials with simple poles in `points`.
#[derive(Clone, Debug)]
pub struct QdBasis {
    pub points: Vec<Pt>,
    pub elements: Vec<Qd>,
    /// Squared condition number of the column-normalized sample matrix.
    pub gram_condition: f64,
}

impl QdBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }
}

fn basis_generic<S: Scalar>(points: &[SpherePoint<S>]) -> Result<Vec<RationalQD<S>>> {
    let m = Mobius::to_zero_one_infinity(&points[0], &points[1], &points[2])?;
    let mm = m.to_map();
    let ctx = m.ctx();
    let mut out = Vec::new();
    for p in &points[3..] {
        let a = m
            .apply(p)
            .affine()
            .ok_or_else(|| Error::DegeneratePoints("marked point repeated".into()))?;
        // dW^2 / (W (W - 1) (W - a))
        let den = Poly::x(ctx)
            .mul(&Poly::linear_root(&S::one(ctx)))
            .mul(&Poly::linear_root(&a));
        let q = RationalQD::new(Poly::one(ctx), den)?;
        out.push(pullback(&mm, &q));
    }
    Ok(out)
}

fn avoids(z: &Complex64, pts: &[Pt]) -> bool {
    let p = SpherePoint::finite(Cx::from_c64(*z, 64));
    pts.iter().all(|x| chordal_distance(&x.approx.to_cx(64), &p) > 1e-3)
}

fn samples_avoiding(count: usize, offset: usize, pts: &[Pt], prec: u32) -> Vec<Cx> {
    sample_points(count * 4, offset)
        .into_iter()
        .filter(|z| avoids(z, pts))
        .take(count)
        .map(|z| Cx::from_c64(z, prec))
        .collect()
}

fn singular_values_of(m: &[Vec<Complex64>], ncols: usize) -> Result<Vec<f64>> {
    if m.is_empty() || ncols == 0 {
        return Ok(vec![]);
    }
    let a = DMatrix::from_fn(m.len(), ncols, |i, j| m[i][j]);
    let svd = SVD::try_new(a, false, false, f64::EPSILON, 1000 * ncols.max(m.len()))
        .ok_or_else(|| Error::VerificationFailed("singular value decomposition did not converge".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().cloned().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Basis `dW^2 / (W (W-1) (W-a_i))` after sending the first three points to `0, 1, infinity`.
pub fn basis_q(points: &[Pt], prec: u32, cfg: &Config) -> Result<QdBasis> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 marked points, got {}", points.len())));
    }
    let tol = cfg.eps_cluster();
    for i in 0..points.len() {
        for j in 0..i {
            if points[i].coincides(&points[j], tol) {
                return Err(Error::DegeneratePoints(format!(
                    "marked points {} and {} coincide",
                    points[j].literal(),
                    points[i].literal()
                )));
            }
        }
    }
    let exact: Option<Vec<SpherePoint<GaussRat>>> = points.iter().map(|p| p.exact.clone()).collect();
    let elements: Vec<Qd> = match exact {
        Some(e) => basis_generic(&e)?.into_iter().map(Qd::Exact).collect(),
        None => {
            let a: Vec<SpherePoint<Cx>> = points.iter().map(|p| p.approx.clone()).collect();
            basis_generic(&a)?.into_iter().map(Qd::Approx).collect()
        }
    };
    let dim = elements.len();
    let gram_condition = if dim == 0 {
        1.0
    } else {
        let zs = samples_avoiding(3 * dim + 8, 0, points, prec);
        let cols: Vec<RationalQD<Cx>> = elements.iter().map(|q| q.to_cx(prec)).collect();
        let mut m: Vec<Vec<Complex64>> = zs.iter().map(|z| cols.iter().map(|q| q.eval(z).to_c64()).collect()).collect();
        for j in 0..dim {
            let n = m.iter().map(|r| r[j].norm_sqr()).sum::<f64>().sqrt();
            for r in m.iter_mut() {
                r[j] /= n;
            }
        }
        let s = singular_values_of(&m, dim)?;
        let c = s[0] / s[dim - 1];
        c * c
    };
    Ok(QdBasis {
        points: points.to_vec(),
        elements,
        gram_condition,
    })
}

/// Least-squares coordinates of `q` in the basis; returns the coordinates and the
/// relative residual at fresh sample points.
pub fn coordinates(basis: &QdBasis, q: &RationalQD<Cx>, prec: u32) -> Result<(Vec<Cx>, f64)> {
    let dim = basis.dim();
    let cols: Vec<RationalQD<Cx>> = basis.elements.iter().map(|e| e.to_cx(prec)).collect();
    let fresh = samples_avoiding(8, 7000, &basis.points, prec);
    if dim == 0 {
        let scale = fresh.iter().map(|z| q.eval(z).abs_f64()).fold(0.0, f64::max);
        return Ok((vec![], if q.is_zero() { 0.0 } else { scale }));
    }
    let zs = samples_avoiding(2 * dim + 8, 0, &basis.points, prec);
    let rows: Vec<Vec<Cx>> = zs.iter().map(|z| cols.iter().map(|c| c.eval(z)).collect()).collect();
    let rhs: Vec<Cx> = zs.iter().map(|z| q.eval(z)).collect();
    let c = least_squares(&rows, &rhs)?;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for z in &fresh {
        let fit = cols.iter().zip(&c).fold(Cx::zero(prec), |acc, (b, ci)| acc + b.eval(z) * ci);
        let v = q.eval(z);
        scale = scale.max(v.abs_f64()).max(fit.abs_f64());
        worst = worst.max((fit - v).abs_f64());
    }
    Ok((c, if scale == 0.0 { 0.0 } else { worst / scale }))
}

/// Matrix of `nabla_f : Q(P^1, A) -> Q(P^1, A+)` in the bases of [`basis_q`].
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub domain: QdBasis,
    pub codomain: QdBasis,
    /// Rows indexed by the codomain basis.
    pub matrix: Vec<Vec<Cx>>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub injective: bool,
    pub solve_residual: f64,
    /// Points of `f(A)` and of the critical values that had to be added to `A`.
    pub added: Vec<Pt>,
    /// Every critical value already lies in `A`.
    pub critical_values_in_a: bool,
    pub warnings: Vec<String>,
}

fn push_unique(set: &mut Vec<Pt>, p: Pt, eps: f64) -> bool {
    if set.iter().any(|x| x.coincides(&p, eps)) {
        return false;
    }
    set.push(p);
    true
}

pub fn nabla_matrix(f: &DynMap, a: &[Pt], cfg: &Config) -> Result<OperatorMatrix> {
    let prec = f.prec();
    let eps = cfg.eps_orbit();
    let mut plus: Vec<Pt> = a.to_vec();
    let mut added = Vec::new();
    for x in a {
        let y = f.eval(x)?;
        if push_unique(&mut plus, y.clone(), eps) {
            added.push(y);
        }
    }
    let mut critical_values_in_a = true;
    for c in f.critical_points(cfg.eps_cluster(), cfg.eps_trim())? {
        let v = f.eval(&c.point)?;
        if !a.iter().any(|x| x.coincides(&v, eps)) {
            critical_values_in_a = false;
        }
        if push_unique(&mut plus, v.clone(), eps) {
            added.push(v);
        }
    }
    if plus.len() < 4 {
        return Err(Error::InvalidInput(format!("A+ has only {} points", plus.len())));
    }
    let domain = basis_q(a, prec, cfg)?;
    let codomain = basis_q(&plus, prec, cfg)?;
    let mut warnings = Vec::new();
    for (name, b) in [("domain", &domain), ("codomain", &codomain)] {
        if b.gram_condition > 1e12 {
            warnings.push(format!("IllConditionedBasis: {name} Gram condition {:.3e}", b.gram_condition));
        }
    }
    if !critical_values_in_a {
        warnings.push("A does not contain every critical value; S(f) was added to A+".into());
    }
    let rows = codomain.dim();
    let cols = domain.dim();
    let mut matrix = vec![vec![Cx::zero(prec); cols]; rows];
    let mut inclusion = vec![vec![Complex64::new(0.0, 0.0); cols]; rows];
    let mut solve_residual = 0.0f64;
    for (j, q) in domain.elements.iter().enumerate() {
        let (c, res) = coordinates(&codomain, &q.to_cx(prec), prec)?;
        solve_residual = solve_residual.max(res);
        for (i, ci) in c.into_iter().enumerate() {
            inclusion[i][j] = ci.to_c64();
        }
        let pushed = push(f, q, cfg)?;
        let nab = q.to_cx(prec).sub(&pushed.to_cx(prec));
        let (c, res) = coordinates(&codomain, &nab, prec)?;
        solve_residual = solve_residual.max(res);
        for (i, ci) in c.into_iter().enumerate() {
            matrix[i][j] = ci;
        }
    }
    if solve_residual > cfg.eps_solve().sqrt() {
        return Err(Error::VerificationFailed(format!(
            "coordinate solve residual {solve_residual:.3e} exceeds {:.3e}",
            cfg.eps_solve().sqrt()
        )));
    }
    let m64: Vec<Vec<Complex64>> = matrix.iter().map(|r| r.iter().map(|c| c.to_c64()).collect()).collect();
    let singular_values = singular_values_of(&m64, cols)?;
    // The scale includes the inclusion Q(A) -> Q(A+), so that nabla = 0 has rank 0.
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let scale = smax.max(singular_values_of(&inclusion, cols)?.first().copied().unwrap_or(0.0));
    let rank = singular_values.iter().filter(|&&s| s > cfg.eps_rank * scale).count();
    Ok(OperatorMatrix {
        domain,
        codomain,
        matrix,
        singular_values,
        rank,
        injective: rank == cols,
        solve_residual,
        added,
        critical_values_in_a,
        warnings,
    })
}

/// Outcome of [`lattes_test`].
#[derive(Clone, Debug)]
pub enum LattesVerdict {
    Lattes {
        q: Qd,
        poles: Vec<Pt>,
        /// Relative size of `f^* q - D q` (0 for exact maps).
        deviation: f64,
    },
    NotLattes {
        clause: String,
    },
}

impl LattesVerdict {
    pub fn is_lattes(&self) -> bool {
        matches!(self, LattesVerdict::Lattes { .. })
    }
}

/// Postcritical set, or `None` once it exceeds `limit` points.
pub fn postcritical_set(f: &DynMap, limit: usize, cfg: &Config) -> Result<Option<Vec<Pt>>> {
    let eps = cfg.eps_orbit();
    let mut set: Vec<Pt> = Vec::new();
    for c in f.critical_points(cfg.eps_cluster(), cfg.eps_trim())? {
        let mut x = f.eval(&c.point)?;
        while push_unique(&mut set, x.clone(), eps) {
            if set.len() > limit {
                return Ok(None);
            }
            x = f.eval(&x)?;
        }
    }
    Ok(Some(set))
}

/// `f^* q = D q` in exact arithmetic for `q = dz^2 / prod (z - p)` over the finite poles.
fn exact_identity(fe: &RationalMap<GaussRat>, poles: &[SpherePoint<GaussRat>], d: usize) -> bool {
    let den = poles
        .iter()
        .filter_map(|p| p.affine())
        .fold(Poly::one(()), |acc, v| acc.mul(&Poly::linear_root(&v)));
    match RationalQD::new(Poly::one(()), den) {
        Ok(q) => pullback(fe, &q) == q.scale(&GaussRat::from_int(d as i64)).reduced(),
        Err(_) => false,
    }
}

pub fn lattes_test(f: &DynMap, cfg: &Config) -> Result<LattesVerdict> {
    let not = |s: String| Ok(LattesVerdict::NotLattes { clause: s });
    let d = f.degree();
    if d < 2 {
        return not("degree below 2".into());
    }
    let crit = f.critical_points(cfg.eps_cluster(), cfg.eps_trim())?;
    if let Some(c) = crit.iter().find(|c| c.local_degree != 2) {
        return not(format!(
            "critical point {} has local degree {}; all critical points must be simple",
            c.point.literal(),
            c.local_degree
        ));
    }
    let post = match postcritical_set(f, 4, cfg)? {
        None => return not("postcritical set has more than four points".into()),
        Some(p) if p.len() < 4 => {
            return not(format!("postcritical set has {} points, too small for four simple poles", p.len()))
        }
        Some(p) => p,
    };
    let eps = cfg.eps_orbit();
    if let Some(c) = crit.iter().find(|c| post.iter().any(|p| p.coincides(&c.point, eps))) {
        return not(format!("critical point {} is a pole", c.point.literal()));
    }
    let prec = f.prec();
    // a rational postcritical set of an exact map is certified by the exact identity below
    let exact: Option<Vec<SpherePoint<GaussRat>>> = post
        .iter()
        .map(|p| p.exact.clone().or_else(|| p.approx.rationalize(1e-15)))
        .collect();
    match (&f.exact, exact) {
        (Some(fe), Some(poles)) if exact_identity(fe, &poles, d) => {
            let den = poles
                .iter()
                .filter_map(|p| p.affine())
                .fold(Poly::one(()), |acc, v| acc.mul(&Poly::linear_root(&v)));
            Ok(LattesVerdict::Lattes {
                q: Qd::Exact(RationalQD::new(Poly::one(()), den)?),
                poles: poles.into_iter().map(|p| Pt::from_exact(p, prec)).collect(),
                deviation: 0.0,
            })
        }
        (Some(_), Some(_)) if post.iter().all(|p| p.exact.is_some()) => not("pullback identity f*q = D q fails".into()),
        _ => {
            let den = post
                .iter()
                .filter_map(|p| p.approx.affine())
                .fold(Poly::one(prec), |acc, v| acc.mul(&Poly::linear_root(&v)));
            let q = RationalQD::new(Poly::one(prec), den)?;
            let pb = pullback(&f.approx, &q);
            let dq = q.scale(&Cx::from_i64(d as i64, prec));
            let zs = samples_avoiding(16, 300, &post, prec);
            let mut worst = 0.0f64;
            let mut scale = 0.0f64;
            for z in &zs {
                let v = dq.eval(z);
                scale = scale.max(v.abs_f64());
                worst = worst.max((pb.eval(z) - v).abs_f64());
            }
            let deviation = worst / scale;
            if deviation > 1e-25 {
                return not(format!("pullback identity f*q = D q fails (relative deviation {deviation:.3e})"));
            }
            Ok(LattesVerdict::Lattes {
                q: Qd::Approx(q),
                poles: post,
                deviation,
            })
        }
    }
}
