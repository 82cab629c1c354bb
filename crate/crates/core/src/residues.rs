//! Dynamical residues of invariant divergences: closed forms, flux limits,
//! mass decrease and the balance inequality.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Config;
use crate::cycles::{cycle_through, Cycle, CycleClass};
use crate::error::{Error, Result};
use crate::numkernel::linalg::{least_squares, solve};
use crate::numkernel::{Cx, GaussRat, Poly, Scalar, TruncatedSeries};
use crate::parabolic::{invariant_divergence_basis, pullback_polar, BasisKind, DivergenceBasis};
use crate::qd::quad::{mass_decrease, nabla_norm};
use crate::qd::{pullback, RationalQD};
use crate::ratmap::{chordal_distance, DynMap, Mobius, Pt, RationalMap, SpherePoint};

/// Standard chart at a cycle point (exact when the point is).
pub fn chart_of(x: &Pt, prec: u32) -> Mobius<Cx> {
    match &x.exact {
        Some(e) => Mobius::chart_at(e).to_cx(prec),
        None => Mobius::chart_at(&x.approx),
    }
}

/// Coefficients of `dz^2 / z^(i+2)` in the polar part of `q` at `x`, in the
/// chart `chart` with `chart(x) = 0`. Empty when the pole order is below 2.
pub fn polar_part<S: Scalar>(q: &RationalQD<S>, chart: &Mobius<S>) -> Result<Vec<S>> {
    if q.is_zero() {
        return Ok(vec![]);
    }
    let qs = pullback(&chart.inverse().to_map(), q);
    // a numerical pole sits off the chart origin by roundoff, so tiny low terms count as zero
    let low = |p: &Poly<S>| match p.coeffs().first().and_then(|c| c.precision()) {
        None => p.low_order(),
        Some(bits) => {
            let tol = 2f64.powf(-(bits as f64) / 8.0) * p.norm_max();
            p.coeffs().iter().position(|c| c.magnitude() > tol).unwrap_or(0)
        }
    };
    let ln = low(&qs.num);
    let ld = low(&qs.den);
    if ld < ln + 2 {
        return Ok(vec![]);
    }
    let m = ld - ln;
    let ctx = q.ctx();
    let order = m - 2;
    let strip = |p: &Poly<S>, k: usize| Poly::new(p.coeffs()[k..].to_vec(), ctx);
    let a = TruncatedSeries::from_poly(&strip(&qs.num, ln), order);
    let b = TruncatedSeries::from_poly(&strip(&qs.den, ld), order);
    let s = a.mul(&b.reciprocal()?);
    Ok((0..=order).map(|i| s.coeffs()[order - i].clone()).collect())
}

/// Closed-form residue with the coordinate `c` along the direction that carries it.
#[derive(Clone, Debug)]
pub struct ClosedResidue {
    pub value: f64,
    pub c: Cx,
}

/// `|c| log|rho|` for non-parabolic cycles and `|c| Re beta` for parabolic ones, where
/// `c` is the coordinate of the divergence along `dz^2/z^2`, respectively `q_f`.
pub fn residue_closed(cycle: &Cycle, basis: &DivergenceBasis, coeffs: &[Cx], cfg: &Config) -> Result<ClosedResidue> {
    let prec = cycle.multiplier.prec();
    let scale = coeffs.iter().map(|c| c.abs_f64()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(ClosedResidue {
            value: 0.0,
            c: Cx::zero(prec),
        });
    }
    if basis.elements.is_empty() {
        return Err(Error::UnsupportedDivergence);
    }
    let len = basis
        .elements
        .iter()
        .map(|e| e.coeffs.len())
        .max()
        .unwrap()
        .max(coeffs.len());
    let at = |v: &[Cx], i: usize| v.get(i).cloned().unwrap_or_else(|| Cx::zero(prec));
    let rows: Vec<Vec<Cx>> = (0..len)
        .map(|i| basis.elements.iter().map(|e| at(&e.coeffs, i)).collect())
        .collect();
    let rhs: Vec<Cx> = (0..len).map(|i| at(coeffs, i)).collect();
    let x = least_squares(&rows, &rhs)?;
    for (row, b) in rows.iter().zip(&rhs) {
        let fit = row.iter().zip(&x).fold(Cx::zero(prec), |acc, (a, xi)| acc + a.clone() * xi);
        if (fit - b).abs_f64() > cfg.eps_series() * scale {
            return Err(Error::UnsupportedDivergence);
        }
    }
    let pick = |kind: BasisKind| {
        basis
            .elements
            .iter()
            .position(|e| e.kind == kind)
            .map(|k| x[k].clone())
            .unwrap_or_else(|| Cx::zero(prec))
    };
    let (c, weight) = match cycle.class() {
        CycleClass::Parabolic => {
            let p = cycle.parabolic.as_ref().ok_or(Error::NotParabolic)?;
            (pick(BasisKind::Canonical), p.beta.re.to_f64())
        }
        _ => (pick(BasisKind::Multiplier), cycle.multiplier.abs_f64().ln()),
    };
    let value = if c.is_zero() { 0.0 } else { c.abs_f64() * weight };
    Ok(ClosedResidue { value, c })
}

// ---------------------------------------------------------------------------
// Completion of divergences

/// Series at 0 of a map with `h(0) = 0`.
fn map_series(h: &RationalMap<Cx>, order: usize) -> Result<TruncatedSeries<Cx>> {
    let a = TruncatedSeries::from_poly(h.num(), order);
    let b = TruncatedSeries::from_poly(h.den(), order);
    let mut s = a.mul(&b.reciprocal()?);
    s.set_coeff(0, Cx::zero(h.ctx()));
    Ok(s)
}

/// `M2 o f o M1^{-1}`.
fn local_map(f: &RationalMap<Cx>, m1: &Mobius<Cx>, m2: &Mobius<Cx>) -> RationalMap<Cx> {
    m2.to_map().compose(&f.compose(&m1.inverse().to_map()))
}

/// Transport a divergence at `cycle.points[0]` along the cycle: entry `i` holds the
/// chart at `points[i]` and the polar coefficients there.
pub fn transport_along_cycle(f: &DynMap, cycle: &Cycle, coeffs: &[Cx]) -> Result<Vec<(Mobius<Cx>, Vec<Cx>)>> {
    let prec = f.prec();
    let charts: Vec<Mobius<Cx>> = cycle.points.iter().map(|p| chart_of(p, prec)).collect();
    let mut out = vec![(charts[0].clone(), coeffs.to_vec())];
    for i in 0..cycle.period - 1 {
        let h = local_map(&f.approx, &charts[i], &charts[i + 1]);
        let phi = map_series(&h, coeffs.len() + 1)?.reversion()?;
        let next = pullback_polar(&phi, &out[i].1)?;
        out.push((charts[i + 1].clone(), next));
    }
    Ok(out)
}

/// Global differential realizing the given polar parts.
#[derive(Clone, Debug)]
pub struct Completion {
    pub q: RationalQD<Cx>,
    /// Global coordinate `W = G(z)` in which the auxiliary poles were placed.
    pub coordinate: Mobius<Cx>,
    /// Auxiliary simple poles, in the coordinate `W`.
    pub aux: Vec<Cx>,
}

/// Quadratic differential whose only multiple poles are the given polar parts,
/// completed by three simple poles (default `W = 3, 3+i, 3-i`) chosen away from `avoid`.
pub fn complete_divergences(parts: &[(SpherePoint<Cx>, Mobius<Cx>, Vec<Cx>)], avoid: &[Pt], prec: u32) -> Result<Completion> {
    // A global coordinate in which no marked point sits at infinity.
    let mut shift = 0i64;
    let g = loop {
        let t = Cx::from_f64(-7.25 - shift as f64, 0.5, prec);
        let g = if parts.iter().any(|(x, _, _)| x.is_infinity()) {
            // W = 1 / (z - t)
            Mobius::new(Cx::zero(prec), Cx::one(prec), Cx::one(prec), -t.clone())?
        } else {
            Mobius::identity(prec)
        };
        let ok = parts.iter().all(|(x, _, _)| !g.apply(x).is_infinity());
        if ok {
            break g;
        }
        shift += 1;
    };
    let ginv = g.inverse();
    let one = Cx::one(prec);
    let mut base = [
        Cx::from_f64(3.0, 0.0, prec),
        Cx::from_f64(3.0, 1.0, prec),
        Cx::from_f64(3.0, -1.0, prec),
    ];
    let far = |a: &Cx| {
        let z = ginv.apply(&SpherePoint::finite(a.clone()));
        parts.iter().all(|(x, _, _)| chordal_distance(x, &z) > 0.05)
            && avoid.iter().all(|p| chordal_distance(&p.approx, &z) > 0.05)
    };
    let mut tries = 0;
    while !base.iter().all(|a| far(a)) {
        tries += 1;
        if tries > 40 {
            return Err(Error::DegeneratePoints("no room for auxiliary poles".into()));
        }
        let s = Cx::from_f64(1.37, 0.21, prec);
        for a in base.iter_mut() {
            *a = a.clone() * &s;
        }
    }

    // Polar parts in the charts w_i = W - W_i.
    let mut pieces: Vec<(Cx, Vec<Cx>)> = Vec::new();
    for (x, chart, c) in parts {
        let wi = g.apply(x).affine().unwrap();
        // zeta_i as a function of w: chart o G^{-1} o (w + W_i)
        let psi = chart
            .compose(&ginv)
            .compose(&Mobius::translation(wi.clone()))
            .to_map();
        let series = map_series(&psi, c.len() + 1)?;
        pieces.push((wi, pullback_polar(&series, c)?));
    }
    // Vandermonde conditions making the sum O(W^-4) at infinity.
    let s0 = pieces
        .iter()
        .fold(Cx::zero(prec), |acc, (_, c)| acc + c.first().cloned().unwrap_or_else(|| Cx::zero(prec)));
    let s1 = pieces.iter().fold(Cx::zero(prec), |acc, (wi, c)| {
        let c0 = c.first().cloned().unwrap_or_else(|| Cx::zero(prec));
        let c1 = c.get(1).cloned().unwrap_or_else(|| Cx::zero(prec));
        acc + c1 + c0 * wi * &Cx::from_f64(2.0, 0.0, prec)
    });
    let a = &base;
    let m = vec![
        vec![one.clone(), one.clone(), one.clone()],
        a.to_vec(),
        a.iter().map(|x| x.clone() * x).collect(),
    ];
    let b = solve(m, vec![Cx::zero(prec), -s0, -s1])?;

    // Common denominator prod (W - W_i)^(m_i) prod (W - a_k).
    let mut den = Poly::one(prec);
    let factors: Vec<Poly<Cx>> = pieces
        .iter()
        .map(|(wi, c)| Poly::linear_root(wi).pow(c.len() as u32 + 1))
        .chain(a.iter().map(Poly::linear_root))
        .collect();
    for f in &factors {
        den = den.mul(f);
    }
    let others = |skip: usize| {
        factors
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != skip)
            .fold(Poly::one(prec), |acc, (_, f)| acc.mul(f))
    };
    let mut num = Poly::zero(prec);
    for (i, (wi, c)) in pieces.iter().enumerate() {
        let mi = c.len() + 1;
        let rest = others(i);
        let lin = Poly::linear_root(wi);
        for (j, cj) in c.iter().enumerate() {
            // c_j (W - W_i)^(m_i - j - 2)
            num = num.add(&lin.pow((mi - j - 2) as u32).mul(&rest).scale(cj));
        }
    }
    for (k, bk) in b.iter().enumerate() {
        num = num.add(&others(pieces.len() + k).scale(bk));
    }
    let num = num.trim_relative((2.0f64).powf(-0.6 * prec as f64));
    let qw = RationalQD::new(num, den)?;
    let q = pullback(&g.to_map(), &qw);
    Ok(Completion {
        q,
        coordinate: g,
        aux: a.to_vec(),
    })
}

/// Completion of a divergence at `cycle.points[0]` transported along the whole cycle.
pub fn complete_cycle_divergence(f: &DynMap, cycle: &Cycle, coeffs: &[Cx], avoid: &[Pt]) -> Result<Completion> {
    let parts: Vec<(SpherePoint<Cx>, Mobius<Cx>, Vec<Cx>)> = transport_along_cycle(f, cycle, coeffs)?
        .into_iter()
        .zip(&cycle.points)
        .map(|((m, c), p)| (p.approx.clone(), m, c))
        .collect();
    complete_divergences(&parts, avoid, f.prec())
}

// ---------------------------------------------------------------------------
// Flux

const GL16: [(f64, f64); 8] = [
    (0.095_012_509_837_637_44, 0.189_450_610_455_068_5),
    (0.281_603_550_779_258_9, 0.182_603_415_044_923_6),
    (0.458_016_777_657_227_4, 0.169_156_519_395_002_5),
    (0.617_876_244_402_643_7, 0.149_595_988_816_576_7),
    (0.755_404_408_355_003_0, 0.124_628_971_255_533_9),
    (0.865_631_202_387_831_7, 0.095_158_511_682_492_78),
    (0.944_575_023_073_232_6, 0.062_253_523_938_647_89),
    (0.989_400_934_991_649_9, 0.027_152_459_411_754_09),
];

/// Flux estimates over a radius schedule.
#[derive(Clone, Debug, Serialize)]
pub struct FluxReport {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    /// Fitted error exponent `p` in `value(r) = limit + C r^p`.
    pub exponent: Option<f64>,
    /// Gap between the last two extrapolated limits.
    pub spread: f64,
}

struct ChartData {
    h_num: Poly<Cx>,
    h_den: Poly<Cx>,
    q: RationalQD<Cx>,
}

fn eval_map(d: &ChartData, z: &Cx) -> (Cx, Cx) {
    let n = d.h_num.eval(z);
    let m = d.h_den.eval(z);
    let dn = d.h_num.derivative().eval(z);
    let dm = d.h_den.derivative().eval(z);
    let v = n.clone() / &m;
    let dv = (dn * &m - n * dm) / (m.clone() * &m);
    (v, dv)
}

/// `(1/2pi) int (1_{f(U)} - 1_U) |q|` near the image cycle point, for disks of radius `r`.
fn flux_at(data: &[ChartData], r: f64, samples: usize, prec: u32) -> Result<f64> {
    let mut total = 0.0;
    for d in data {
        let mut acc = 0.0;
        for j in 0..samples {
            let t = 2.0 * PI * j as f64 / samples as f64;
            let zeta = Cx::from_c64(Complex64::from_polar(r, t), prec);
            let (p, dp) = eval_map(d, &zeta);
            let p64 = p.to_c64();
            let dtheta = (dp.to_c64() * Complex64::new(0.0, 1.0) * zeta.to_c64() / p64).im;
            if !(dtheta > 0.0) || p64.norm() > 0.5 {
                return Err(Error::RadiusTooLarge(format!(
                    "image of the circle of radius {r:.3e} is not star-shaped in the chart"
                )));
            }
            let (lo, hi) = (r.ln(), p64.norm().ln());
            let theta = p64.arg();
            let (h, mid) = ((hi - lo) / 2.0, (hi + lo) / 2.0);
            let mut inner = 0.0;
            for &(x, w) in &GL16 {
                for u in [mid - h * x, mid + h * x] {
                    let s = Cx::from_c64(Complex64::from_polar(u.exp(), theta), prec);
                    inner += w * d.q.eval(&s).abs_f64() * (2.0 * u).exp();
                }
            }
            acc += inner * h * dtheta;
        }
        total += acc / samples as f64;
    }
    Ok(total)
}

fn richardson(values: &[f64]) -> (f64, Option<f64>, f64) {
    let k = values.len();
    let last = values[k - 1];
    if k < 3 {
        return (last, None, f64::INFINITY);
    }
    let est = |i: usize| -> (f64, Option<f64>) {
        let d1 = values[i - 1] - values[i - 2];
        let d2 = values[i] - values[i - 1];
        if d2.abs() <= 1e-13 * values[i].abs().max(1.0) {
            return (values[i], None);
        }
        let ratio = (d1 / d2).abs();
        if !(ratio > 1.0) {
            return (values[i], None);
        }
        let p = ratio.log2().clamp(0.25, 8.0);
        (values[i] + d2 / ((2.0f64).powf(p) - 1.0), Some(p))
    };
    let (l1, p1) = est(k - 1);
    if k < 4 {
        return (l1, p1, (l1 - last).abs());
    }
    let (l0, _) = est(k - 2);
    (l1, p1, (l1 - l0).abs())
}

/// Definitional residue: flux of `|q|` through the boundary of disks about the cycle,
/// at radii `r0 2^-k`, extrapolated to `r = 0`.
pub fn residue_flux(f: &DynMap, cycle: &Cycle, q: &RationalQD<Cx>, r0: f64, steps: usize, cfg: &Config) -> Result<FluxReport> {
    let prec = f.prec();
    let kappa = cycle.period;
    let charts: Vec<Mobius<Cx>> = cycle.points.iter().map(|p| chart_of(p, prec)).collect();
    let mut data = Vec::new();
    let div = q.divisor(prec, cfg.eps_cluster())?;
    for i in 0..kappa {
        let j = (i + 1) % kappa;
        let h = local_map(&f.approx, &charts[i], &charts[j]);
        let qj = pullback(&charts[j].inverse().to_map(), q);
        // other poles of q must stay clear of the disks
        for e in div.iter().filter(|e| e.order < 0) {
            let s = charts[j].apply(&e.point);
            if let Some(a) = s.affine() {
                let d = a.abs_f64();
                if d > 1e-10 && d < 4.0 * r0 {
                    return Err(Error::RadiusTooLarge(format!("pole of q within {d:.3e} of the cycle")));
                }
            }
        }
        for (k, p) in cycle.points.iter().enumerate() {
            if k != j {
                if let Some(a) = charts[j].apply(&p.approx).affine() {
                    if a.abs_f64() < 4.0 * r0 {
                        return Err(Error::RadiusTooLarge("disks about cycle points overlap".into()));
                    }
                }
            }
        }
        data.push(ChartData {
            h_num: h.num().clone(),
            h_den: h.den().clone(),
            q: qj,
        });
    }
    let samples = 256;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for k in 0..=steps {
        let r = r0 * (2.0f64).powi(-(k as i32));
        radii.push(r);
        values.push(flux_at(&data, r, samples, prec)?);
    }
    let (limit, exponent, spread) = richardson(&values);
    if !limit.is_finite() {
        return Err(Error::FluxNotConverged { spread });
    }
    Ok(FluxReport {
        radii,
        values,
        limit,
        exponent,
        spread,
    })
}

// ---------------------------------------------------------------------------
// Balance

/// Residue contribution of one cycle in a balance computation.
#[derive(Clone, Debug, Serialize)]
pub struct CycleResidue {
    pub point: String,
    pub class: String,
    pub residue: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BalanceReport {
    pub dec: f64,
    pub residue_total: f64,
    pub nabla_norm: f64,
    /// `||nabla_f q|| - |Dec - 2 pi Res|`.
    pub slack: f64,
    pub tol: f64,
    pub cycles: Vec<CycleResidue>,
}

/// Closed-form residues of `q` at every multiple pole; each multiple pole must lie on a
/// cycle of period at most `max_period` and carry an invariant divergence.
pub fn residues_of(f: &DynMap, q: &RationalQD<Cx>, max_period: usize, cfg: &Config) -> Result<Vec<CycleResidue>> {
    let prec = f.prec();
    let div = q.divisor(prec, cfg.eps_cluster())?;
    let mut seen: Vec<Pt> = Vec::new();
    let mut out = Vec::new();
    for e in div.iter().filter(|e| e.order <= -2) {
        let x = match &e.exact {
            Some(p) => Pt::from_exact(p.clone(), prec),
            None => Pt::from_approx(e.point.clone()),
        };
        if seen.iter().any(|p| p.coincides(&x, cfg.eps_orbit())) {
            continue;
        }
        let cyc = cycle_through(f, &x, max_period, cfg).map_err(|_| Error::UnsupportedDivergence)?;
        let k = cyc
            .points
            .iter()
            .position(|p| p.coincides(&x, cfg.eps_orbit()))
            .unwrap_or(0);
        let mut cyc = cyc.rotated(k);
        if cyc.class() == CycleClass::Parabolic {
            cyc.parabolic = Some(crate::parabolic::parabolic_invariants(f, &cyc, cfg)?);
        }
        let basis = invariant_divergence_basis(f, &cyc, cfg)?;
        let coeffs = polar_part(q, &basis.chart)?;
        let r = residue_closed(&cyc, &basis, &coeffs, cfg)?;
        seen.extend(cyc.points.iter().cloned());
        out.push(CycleResidue {
            point: x.literal(),
            class: cyc.class().name().into(),
            residue: r.value,
        });
    }
    Ok(out)
}

/// `||nabla_f q||`, `Dec(f:q)` and the residue total, with the slack of
/// `||nabla_f q|| >= |Dec - 2 pi Res|`.
pub fn balance_check(f: &DynMap, q: &RationalQD<Cx>, max_period: usize, tol: f64, cfg: &Config) -> Result<BalanceReport> {
    let cycles = residues_of(f, q, max_period, cfg)?;
    let residue_total: f64 = cycles.iter().map(|c| c.residue).sum();
    let dec = mass_decrease(f, q, tol, cfg)?.value;
    let nab = nabla_norm(f, q, tol, cfg)?.value;
    Ok(BalanceReport {
        dec,
        residue_total,
        nabla_norm: nab,
        slack: nab - (dec - 2.0 * PI * residue_total).abs(),
        tol,
        cycles,
    })
}

/// Exact polar part, when `q`, the chart and the arithmetic allow it.
pub fn polar_part_exact(q: &RationalQD<GaussRat>, x: &SpherePoint<GaussRat>) -> Result<Vec<GaussRat>> {
    polar_part(q, &Mobius::chart_at(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parabolic::attach_parabolic_data;

    fn gq(v: &[(i64, i64)]) -> Poly<GaussRat> {
        Poly::new(v.iter().map(|&(a, b)| GaussRat::from_ratio(a, b)).collect(), ())
    }

    fn dm(n: &[(i64, i64)]) -> DynMap {
        DynMap::from_exact(RationalMap::new(gq(n), gq(&[(1, 1)])).unwrap(), 256)
    }

    fn fixed(f: &DynMap, re: (i64, i64)) -> Cycle {
        let cfg = Config::default();
        let x = Pt::from_exact(SpherePoint::finite(GaussRat::from_ratio(re.0, re.1)), 256);
        let mut c = vec![cycle_through(f, &x, 1, &cfg).unwrap()];
        attach_parabolic_data(f, &mut c, &cfg).unwrap();
        c.pop().unwrap()
    }

    #[test]
    fn closed_forms() {
        let cfg = Config::default();
        let f = dm(&[(0, 1), (1, 2), (1, 1)]);
        let c = fixed(&f, (0, 1));
        let b = invariant_divergence_basis(&f, &c, &cfg).unwrap();
        let one = vec![Cx::one(256)];
        let r = residue_closed(&c, &b, &one, &cfg).unwrap();
        assert!((r.value + 2f64.ln()).abs() < 1e-14);
        assert_eq!(residue_closed(&c, &b, &[Cx::zero(256)], &cfg).unwrap().value, 0.0);
        let two = vec![Cx::one(256), Cx::one(256)];
        assert!(matches!(residue_closed(&c, &b, &two, &cfg), Err(Error::UnsupportedDivergence)));

        let g = dm(&[(1, 4), (0, 1), (1, 1)]);
        let c = fixed(&g, (1, 2));
        let b = invariant_divergence_basis(&g, &c, &cfg).unwrap();
        let qf = b.elements.iter().find(|e| e.kind == BasisKind::Canonical).unwrap();
        let r = residue_closed(&c, &b, &qf.coeffs, &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
        let flat = b.elements.iter().find(|e| matches!(e.kind, BasisKind::Flat(_))).unwrap();
        assert_eq!(residue_closed(&c, &b, &flat.coeffs, &cfg).unwrap().value, 0.0);
    }

    #[test]
    fn completion_has_requested_polar_part() {
        let cfg = Config::default();
        let g = dm(&[(1, 4), (0, 1), (1, 1)]);
        let c = fixed(&g, (1, 2));
        let b = invariant_divergence_basis(&g, &c, &cfg).unwrap();
        let qf = &b.elements.iter().find(|e| e.kind == BasisKind::Canonical).unwrap().coeffs;
        let comp = complete_cycle_divergence(&g, &c, qf, &[]).unwrap();
        let back = polar_part(&comp.q, &b.chart).unwrap();
        assert_eq!(back.len(), qf.len());
        for (a, b) in back.iter().zip(qf) {
            assert!((a.clone() - b).abs_f64() < 1e-40);
        }
        let div = comp.q.divisor(256, cfg.eps_cluster()).unwrap();
        assert_eq!(div.iter().map(|e| e.order).sum::<i64>(), -4);
        assert_eq!(div.iter().filter(|e| e.order == -1).count(), 3);
    }

    #[test]
    fn flux_matches_closed_form() {
        let cfg = Config::default();
        let f = dm(&[(0, 1), (1, 2), (1, 1)]);
        let c = fixed(&f, (0, 1));
        let comp = complete_cycle_divergence(&f, &c, &[Cx::one(256)], &[]).unwrap();
        let fl = residue_flux(&f, &c, &comp.q, 0.05, 6, &cfg).unwrap();
        assert!((fl.limit + 2f64.ln()).abs() < 1e-2, "{fl:?}");

        let sq = dm(&[(0, 1), (0, 1), (1, 1)]);
        let c = fixed(&sq, (1, 1));
        let comp = complete_cycle_divergence(&sq, &c, &[Cx::one(256)], &[]).unwrap();
        let fl = residue_flux(&sq, &c, &comp.q, 0.05, 6, &cfg).unwrap();
        assert!((fl.limit - 2f64.ln()).abs() < 1e-2, "{fl:?}");

        let g = dm(&[(1, 4), (0, 1), (1, 1)]);
        let c = fixed(&g, (1, 2));
        let b = invariant_divergence_basis(&g, &c, &cfg).unwrap();
        let qf = &b.elements.iter().find(|e| e.kind == BasisKind::Canonical).unwrap().coeffs;
        let comp = complete_cycle_divergence(&g, &c, qf, &[]).unwrap();
        let fl = residue_flux(&g, &c, &comp.q, 0.05, 6, &cfg).unwrap();
        assert!((fl.limit - 1.0).abs() < 1e-2, "{fl:?}");
    }
}
