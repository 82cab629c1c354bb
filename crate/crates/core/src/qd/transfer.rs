//! Pullback and pushforward of rational quadratic differentials.

use num_complex::Complex64;
use rug::Float;

use super::rqd::{order_at, DivisorEntry, RationalQD};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::numkernel::linalg::least_squares;
use crate::numkernel::{find_roots, Cx, GaussRat, Poly, Scalar};
use crate::ratmap::{chordal_distance, DynMap, RationalMap, SpherePoint};

/// `f^* q = q(f(z)) f'(z)^2`; exact inputs are reduced by their gcd.
pub fn pullback<S: Scalar>(f: &RationalMap<S>, q: &RationalQD<S>) -> RationalQD<S> {
    let ctx = f.ctx();
    if q.is_zero() {
        return RationalQD::zero(ctx);
    }
    let (p, qq) = (f.num(), f.den());
    let nn = q.num.deg0();
    let nd = q.den.deg0();
    let a = q.num.hom_compose(p, qq, nn);
    let b = q.den.hom_compose(p, qq, nd);
    let w = f.wronskian();
    let k = nd.min(nn + 4);
    let num = a.mul(&w).mul(&w).mul(&qq.pow((nd - k) as u32));
    let den = b.mul(&qq.pow((nn + 4 - k) as u32));
    let out = RationalQD::new(num, den).expect("nonzero denominator");
    if S::EXACT {
        if let Some(g) = out.as_gauss() {
            let r = g.reduced();
            let conv = |p: &Poly<GaussRat>| Poly::new(p.coeffs().iter().map(|c| S::from_gauss(c, ctx)).collect(), ctx);
            return RationalQD {
                num: conv(&r.num),
                den: conv(&r.den),
            };
        }
    }
    out
}

/// Differential in either representation.
#[derive(Clone, Debug)]
pub enum Qd {
    Exact(RationalQD<GaussRat>),
    Approx(RationalQD<Cx>),
}

impl Qd {
    pub fn to_cx(&self, prec: u32) -> RationalQD<Cx> {
        match self {
            Qd::Exact(q) => q.to_cx(prec),
            Qd::Approx(q) => q.clone(),
        }
    }
}

pub fn pull(f: &DynMap, q: &Qd) -> Qd {
    match (&f.exact, q) {
        (Some(fe), Qd::Exact(qe)) => Qd::Exact(pullback(fe, qe)),
        _ => Qd::Approx(pullback(&f.approx, &q.to_cx(f.prec()))),
    }
}

/// Pushforward; exact inputs of degree at most 3 use the exact route.
pub fn push(f: &DynMap, q: &Qd, cfg: &Config) -> Result<Qd> {
    match (&f.exact, q) {
        (Some(fe), Qd::Exact(qe)) if fe.degree() <= 3 => Ok(Qd::Exact(pushforward_exact(fe, qe)?)),
        _ => Ok(Qd::Approx(pushforward(f, &q.to_cx(f.prec()), cfg)?)),
    }
}

/// Deterministic sample points on `|z| = 3/2` (Kronecker sequence in the angle).
pub fn sample_points(count: usize, offset: usize) -> Vec<Complex64> {
    let phi = 0.618_033_988_749_894_9_f64;
    (0..count)
        .map(|k| {
            let t = ((k + offset) as f64 * phi + 0.1234).fract();
            Complex64::from_polar(1.5, 2.0 * std::f64::consts::PI * t)
        })
        .collect()
}

/// Fiber of `f` over `y` with local degrees (infinity included when `deg(P - yQ) < D`).
pub fn fiber(f: &RationalMap<Cx>, y: &SpherePoint<Cx>, cfg: &Config) -> Result<Vec<(SpherePoint<Cx>, usize)>> {
    let d = f.degree();
    // z1 P - z0 Q vanishes exactly on f^{-1}((z0 : z1))
    let e = f.num().scale(y.z1()).sub(&f.den().scale(y.z0())).trim_relative(cfg.eps_trim());
    let mut out: Vec<(SpherePoint<Cx>, usize)> = if e.deg0() == 0 {
        vec![]
    } else {
        find_roots(&e, f.ctx(), cfg.eps_cluster())?
            .into_iter()
            .map(|r| (SpherePoint::finite(r.value), r.multiplicity))
            .collect()
    };
    if e.deg0() < d {
        out.push((SpherePoint::infinity(f.ctx()), d - e.deg0()));
    }
    Ok(out)
}

fn ceil_div_bound(ord: i64, d: usize) -> i64 {
    // ceil((ord + 2) / d - 2)
    let num = ord + 2 - 2 * d as i64;
    let d = d as i64;
    if num >= 0 {
        (num + d - 1) / d
    } else {
        -((-num) / d)
    }
}

/// Lower bound for `ord_x f_* q` from the orders of `q` along the fiber over `x`.
pub fn order_bound(fib: &[(SpherePoint<Cx>, usize)], div: &[DivisorEntry], tol: f64) -> i64 {
    fib.iter()
        .map(|(w, d)| ceil_div_bound(order_at(div, w, tol), *d))
        .min()
        .unwrap_or(0)
}

/// Sum over the fiber of `R(w) / f'(w)^2` at a finite non-critical value `z`,
/// together with the sum of absolute values of the terms.
pub fn fiber_sum(f: &RationalMap<Cx>, w_poly: &Poly<Cx>, q: &RationalQD<Cx>, z: &Cx, cfg: &Config) -> Result<(Cx, f64)> {
    let prec = f.ctx();
    let e = f.num().sub(&f.den().scale(z));
    let roots = find_roots(&e, prec, cfg.eps_cluster())?;
    let mut s = Cx::zero(prec);
    let mut abs = 0.0;
    for r in roots {
        let w = &r.value;
        let qv = f.den().eval(w);
        let wv = w_poly.eval(w);
        // f'(w) = W / Q^2
        let fp = &wv / &(&qv * &qv);
        let t = q.eval(w) / (&fp * &fp);
        abs += t.abs_f64() * r.multiplicity as f64;
        s = s + t.scale_real(&Float::with_val(prec, r.multiplicity as u32));
    }
    Ok((s, abs))
}

/// Pushforward `f_* q (z) = sum_{f(w) = z} q(w) / f'(w)^2` by sampling and reconstruction.
///
/// The denominator is fixed from the order bound at every candidate pole (images of
/// poles of `q` and critical values); the numerator is fitted by least squares to
/// fiber sums at points of `|z| = 3/2` and validated at fresh points.
pub fn pushforward(f: &DynMap, q: &RationalQD<Cx>, cfg: &Config) -> Result<RationalQD<Cx>> {
    let prec = f.prec();
    if q.is_zero() {
        return Ok(RationalQD::zero(prec));
    }
    let fa = &f.approx;
    let div = q.divisor(prec, cfg.eps_cluster())?;
    let tol = (2.0f64).powf(-(prec as f64) / 8.0);
    let mut cands: Vec<SpherePoint<Cx>> = Vec::new();
    let mut add = |p: SpherePoint<Cx>| {
        if !cands.iter().any(|c| chordal_distance(c, &p) <= tol) {
            cands.push(p);
        }
    };
    for e in div.iter().filter(|e| e.order < 0) {
        add(fa.evaluate(&e.point)?);
    }
    for c in f.critical_points(cfg.eps_cluster(), cfg.eps_trim())? {
        add(fa.evaluate(&c.point.approx)?);
    }
    let mut poles: Vec<(SpherePoint<Cx>, i64)> = Vec::new();
    for x in &cands {
        let fib = fiber(fa, x, cfg)?;
        let b = order_bound(&fib, &div, tol);
        if b < 0 {
            poles.push((x.clone(), -b));
        }
    }
    let w_poly = fa.wronskian();
    let mut extra = 0;
    loop {
        match reconstruct(f, q, &w_poly, &poles, extra, cfg) {
            Ok(r) => return Ok(r),
            Err(e @ Error::ReconstructionResidualTooLarge { .. }) => {
                if extra >= 1 {
                    return Err(e);
                }
                extra += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn reconstruct(
    f: &DynMap,
    q: &RationalQD<Cx>,
    w_poly: &Poly<Cx>,
    poles: &[(SpherePoint<Cx>, i64)],
    extra: i64,
    cfg: &Config,
) -> Result<RationalQD<Cx>> {
    let prec = f.prec();
    let fa = &f.approx;
    let mut den = Poly::one(prec);
    let mut m_inf = 0;
    for (x, m) in poles {
        let m = m + extra;
        match x.affine() {
            Some(a) => den = den.mul(&Poly::linear_root(&a).pow(m as u32)),
            None => m_inf = m,
        }
    }
    let nb = den.deg0() as i64 - 4 + m_inf;
    if nb < 0 {
        return Ok(RationalQD::zero(prec));
    }
    let nb = nb as usize;
    let f_inf = fa.evaluate(&SpherePoint::infinity(prec))?;
    let avoid = |z: Complex64| -> bool {
        let p = SpherePoint::finite(Cx::from_c64(z, prec));
        poles.iter().any(|(x, _)| chordal_distance(x, &p) < 1e-6) || chordal_distance(&f_inf, &p) < 1e-6
    };
    let take = |count: usize, offset: usize| -> Vec<Cx> {
        sample_points(count * 3, offset)
            .into_iter()
            .filter(|z| !avoid(*z))
            .take(count)
            .map(|z| Cx::from_c64(z, prec))
            .collect()
    };
    let fit_pts = take(2 * (nb + 1) + 4, 0);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut scale = 0.0f64;
    for z in &fit_pts {
        let (s, abs) = fiber_sum(fa, w_poly, q, z, cfg)?;
        scale = scale.max(abs * den.eval(z).abs_f64());
        let mut row = Vec::with_capacity(nb + 1);
        let mut p = Cx::one(prec);
        for _ in 0..=nb {
            row.push(p.clone());
            p = p * z;
        }
        rows.push(row);
        rhs.push(s * den.eval(z));
    }
    let coeffs = least_squares(&rows, &rhs)?;
    let num = Poly::new(coeffs, prec);
    let mut worst = 0.0f64;
    for z in take(8, 5000) {
        let (s, abs) = fiber_sum(fa, w_poly, q, &z, cfg)?;
        let r = (num.eval(&z) / den.eval(&z) - s).abs_f64() / abs.max(1e-300);
        worst = worst.max(r);
    }
    if worst > cfg.eps_push().sqrt() {
        return Err(Error::ReconstructionResidualTooLarge {
            residual: worst,
            tolerance: cfg.eps_push().sqrt(),
        });
    }
    let num = num.chop(cfg.eps_push()).trim_relative(cfg.eps_push());
    let scale_ok = num.norm_max() > cfg.eps_push() * scale.max(1e-300) / den.norm_max().max(1.0) * 1e-6;
    if !scale_ok || num.is_zero() {
        return Ok(RationalQD::zero(prec));
    }
    RationalQD::new(num, den)
}

// ---------------------------------------------------------------------------
// Exact route

fn inverse_mod<S: Scalar>(b: &Poly<S>, m: &Poly<S>) -> Result<Poly<S>> {
    let ctx = m.ctx();
    let (mut r0, mut r1) = (m.clone(), b.divrem(m)?.1);
    let (mut t0, mut t1) = (Poly::zero(ctx), Poly::one(ctx));
    while !r1.is_zero() {
        let (q, r) = r0.divrem(&r1)?;
        r0 = std::mem::replace(&mut r1, r);
        let t = t0.sub(&q.mul(&t1));
        t0 = std::mem::replace(&mut t1, t);
    }
    if r0.deg0() != 0 {
        return Err(Error::NotInvertible);
    }
    let inv = S::one(ctx) / r0.lead().unwrap();
    Ok(t0.scale(&inv).divrem(m)?.1)
}

/// `sum over roots w of F of A(w)/B(w)` computed in `Q(i)[w]/(F)`.
fn exact_trace(a: &Poly<GaussRat>, b: &Poly<GaussRat>, fz: &Poly<GaussRat>) -> Result<GaussRat> {
    let f = fz.monic();
    let d = f.deg0();
    let h = a.mul(&inverse_mod(b, &f)?).divrem(&f)?.1;
    // Newton identities for the power sums of the roots.
    let c = f.coeffs();
    let mut p = vec![GaussRat::from_int(d as i64)];
    for k in 1..d {
        let mut s = GaussRat::from_int(k as i64) * &c[d - k];
        for j in 1..k {
            s = s + c[d - j].clone() * &p[k - j];
        }
        p.push(-s);
    }
    let mut t = GaussRat::zero();
    for (j, hj) in h.coeffs().iter().enumerate() {
        t = t + hj.clone() * &p[j];
    }
    Ok(t)
}

fn interpolate(xs: &[GaussRat], ys: &[GaussRat]) -> Poly<GaussRat> {
    let n = xs.len();
    let mut coef = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            coef[i] = (coef[i].clone() - &coef[i - 1]) / (xs[i].clone() - &xs[i - j]);
        }
    }
    let mut p = Poly::constant(coef[n - 1].clone());
    for i in (0..n - 1).rev() {
        p = p.mul(&Poly::linear_root(&xs[i])).add(&Poly::constant(coef[i].clone()));
    }
    p
}

fn node(k: usize) -> GaussRat {
    GaussRat::new(
        rug::Rational::from(((2 * k + 1) as i64, 3)),
        rug::Rational::from((k as i64 % 5 - 2, 7)),
    )
}

/// Exact pushforward for Gaussian-rational data via resultants and exact traces.
pub fn pushforward_exact(f: &RationalMap<GaussRat>, q: &RationalQD<GaussRat>) -> Result<RationalQD<GaussRat>> {
    if q.is_zero() {
        return Ok(RationalQD::zero(()));
    }
    let q = q.reduced();
    let (p, qq) = (f.num(), f.den());
    let d = f.degree();
    let w = f.wronskian();
    let a = q.num.mul(&qq.pow(4));
    let b = q.den.mul(&w).mul(&w);
    let drop_value = (p.deg0() == d && qq.deg0() == d).then(|| p.lead().unwrap().clone() / qq.lead().unwrap());
    let fz = |z: &GaussRat| p.sub(&qq.scale(z));
    let usable = |z: &GaussRat| drop_value.as_ref() != Some(z);

    // Support of the poles: roots of Res_w(B_sf(w), P(w) - z Q(w)).
    let bsf = b.squarefree_part();
    let hdeg = bsf.deg0();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut k = 0;
    while xs.len() < hdeg + 1 {
        let z = node(k);
        k += 1;
        if !usable(&z) {
            continue;
        }
        ys.push(bsf.resultant(&fz(&z)));
        xs.push(z);
    }
    let h = interpolate(&xs, &ys);
    let mut support = if h.deg0() == 0 { Poly::one(()) } else { h.squarefree_part() };
    let pole_at_inf = q.ord_infinity().map_or(false, |o| o < 0);
    let crit_at_inf = w.deg0() < 2 * d - 2;
    if (pole_at_inf || crit_at_inf) && qq.deg0() == d {
        let finf = p.coeff(d) / qq.coeff(d);
        if !support.eval(&finf).is_zero() {
            support = support.mul(&Poly::linear_root(&finf));
        }
    }
    // Pole orders of f_* q never exceed the largest pole order of q (and are at least 1).
    let kmax = q
        .den
        .squarefree_decomposition()
        .iter()
        .map(|(_, m)| *m as i64)
        .chain([1, -q.ord_infinity().unwrap_or(0)])
        .max()
        .unwrap();
    let den = support.pow(kmax as u32);
    let nb = den.deg0() as i64 - 4 + kmax;
    if nb < 0 {
        return Ok(RationalQD::zero(()));
    }
    let needed = nb as usize + 1 + 3;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut k = 100;
    while xs.len() < needed {
        let z = node(k);
        k += 1;
        let dz = den.eval(&z);
        if !usable(&z) || dz.is_zero() {
            continue;
        }
        let t = exact_trace(&a, &b, &fz(&z))?;
        ys.push(t * dz);
        xs.push(z);
    }
    let n_fit = nb as usize + 1;
    let num = interpolate(&xs[..n_fit], &ys[..n_fit]);
    for (x, y) in xs[n_fit..].iter().zip(&ys[n_fit..]) {
        if num.eval(x) != *y {
            return Err(Error::VerificationFailed("exact pushforward interpolation mismatch".into()));
        }
    }
    Ok(RationalQD::new(num, den)?.reduced())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(v: &[i64]) -> Poly<GaussRat> {
        Poly::new(v.iter().map(|&k| GaussRat::from_int(k)).collect(), ())
    }

    fn qd(n: &[i64], d: &[i64]) -> RationalQD<GaussRat> {
        RationalQD::new(gp(n), gp(d)).unwrap()
    }

    fn square() -> RationalMap<GaussRat> {
        RationalMap::new(gp(&[0, 0, 1]), gp(&[1])).unwrap()
    }

    fn lattes() -> RationalMap<GaussRat> {
        // (z^2+1)^2 / (4z(z^2-1))
        RationalMap::new(gp(&[1, 0, 2, 0, 1]), gp(&[0, -4, 0, 4])).unwrap()
    }

    #[test]
    fn pullback_of_quartic_pole() {
        let q = qd(&[1], &[0, 0, 0, 0, 1]);
        assert_eq!(pullback(&square(), &q), qd(&[4], &[0, 0, 0, 0, 0, 0, 1]));
    }

    #[test]
    fn lattes_identity_exact() {
        let q = qd(&[1], &[0, -1, 0, 1]);
        let p = pullback(&lattes(), &q);
        assert_eq!(p, q.scale(&GaussRat::from_int(4)));
    }

    #[test]
    fn pushforward_even_and_odd() {
        let cfg = Config::default();
        let f = square();
        // 1 / ((w^2-1)(w^2-4))
        let q = qd(&[1], &[4, 0, -5, 0, 1]);
        let want = qd(&[1], &[0, 8, -10, 2]);
        let exact = pushforward_exact(&f, &q).unwrap();
        assert_eq!(exact, want);
        let approx = pushforward(&DynMap::from_exact(f.clone(), 256), &q.to_cx(256), &cfg).unwrap();
        assert!(approx.coeff_distance(&want.to_cx(256)) < 1e-30);

        let odd = qd(&[0, 1], &[4, 0, -5, 0, 1]);
        assert!(pushforward_exact(&f, &odd).unwrap().is_zero());
        let approx = pushforward(&DynMap::from_exact(f, 256), &odd.to_cx(256), &cfg).unwrap();
        assert!(approx.is_zero());
    }

    #[test]
    fn push_of_pull_is_degree_times() {
        let cfg = Config::default();
        let f = lattes();
        let q = qd(&[1, 3], &[2, 0, 1, 5, 1]);
        let back = pushforward_exact(&f, &pullback(&f, &q)).unwrap();
        assert_eq!(back, q.scale(&GaussRat::from_int(4)));
        let dm = DynMap::from_exact(f, 256);
        let pb = pullback(&dm.approx, &q.to_cx(256));
        let back = pushforward(&dm, &pb, &cfg).unwrap();
        assert!(back.coeff_distance(&q.scale(&GaussRat::from_int(4)).to_cx(256)) < 1e-20);
    }
}
