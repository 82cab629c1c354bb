//! Germs of first-return maps, parabolic invariants and invariant divergences.

use serde::Serialize;

use crate::config::Config;
use crate::cycles::{Cycle, CycleClass};
use crate::error::{Error, Result};
use crate::numkernel::{laurent_reciprocal, Cx, GaussRat, Scalar, TruncatedSeries};
use crate::ratmap::{DynMap, Mobius, RationalMap, SpherePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ParabolicSubtype {
    #[serde(rename = "parabolic-repelling")]
    Repelling,
    #[serde(rename = "parabolic-attracting")]
    Attracting,
    #[serde(rename = "parabolic-indifferent")]
    Indifferent,
}

impl ParabolicSubtype {
    pub fn name(&self) -> &'static str {
        match self {
            ParabolicSubtype::Repelling => "parabolic-repelling",
            ParabolicSubtype::Attracting => "parabolic-attracting",
            ParabolicSubtype::Indifferent => "parabolic-indifferent",
        }
    }
}

/// Formal invariants of a parabolic cycle.
#[derive(Clone, Debug)]
pub struct ParabolicData {
    /// Order of the multiplier as a root of unity.
    pub n: usize,
    /// `f^(kappa n)(z) = z + a z^(N+1) + ...` in a local chart.
    pub big_n: usize,
    /// Number of petal cycles, `N / n`.
    pub nu: usize,
    /// Holomorphic index of `f^(kappa n)` at the cycle point.
    pub iota: Cx,
    /// Resit invariant `n ((N+1)/2 - iota)`.
    pub beta: Cx,
    pub iota_exact: Option<GaussRat>,
    pub beta_exact: Option<GaussRat>,
    pub subtype: ParabolicSubtype,
    /// Set when `Re beta` lies within `eps_beta` of zero without exact certification.
    pub within_tolerance: bool,
    /// Truncation order of the first-return germ that was used.
    pub germ_order: usize,
}

/// First-return germ in the standard chart of the first cycle point.
#[derive(Clone, Debug)]
pub enum Germ {
    Exact(TruncatedSeries<GaussRat>),
    Approx(TruncatedSeries<Cx>),
}

impl Germ {
    pub fn to_cx(&self, prec: u32) -> TruncatedSeries<Cx> {
        match self {
            Germ::Exact(g) => TruncatedSeries::new(g.coeffs().iter().map(|c| c.to_cx(prec)).collect(), g.order(), prec),
            Germ::Approx(g) => g.clone(),
        }
    }
    pub fn order(&self) -> usize {
        match self {
            Germ::Exact(g) => g.order(),
            Germ::Approx(g) => g.order(),
        }
    }
}

/// Taylor series at 0 of `M o f^kappa o M^{-1}` with `M` the standard chart at `x`.
pub fn germ_generic<S: Scalar>(
    f: &RationalMap<S>,
    x: &SpherePoint<S>,
    kappa: u32,
    order: usize,
    cfg: &Config,
) -> Result<TruncatedSeries<S>> {
    let g = f.iterate(kappa, cfg.degree_cap)?;
    let h = g.conjugate(&Mobius::chart_at(x));
    let a = TruncatedSeries::from_poly(h.num(), order);
    let b = TruncatedSeries::from_poly(h.den(), order);
    let mut s = a.mul(&b.reciprocal().map_err(|_| Error::NotPeriodic)?);
    let c0 = s.coeffs()[0].clone();
    if !c0.is_zero() {
        let scale = 1.0f64.max(s.coeffs().iter().take(2).map(|c| c.magnitude()).fold(0.0, f64::max));
        if S::EXACT || c0.magnitude() > cfg.eps_orbit() * scale {
            return Err(Error::NotPeriodic);
        }
        s.set_coeff(0, S::zero(s.ctx()));
    }
    Ok(s)
}

/// Germ of the first-return map of `cycle` at its first point, exact when possible.
pub fn germ_at(f: &DynMap, cycle: &Cycle, order: usize, cfg: &Config) -> Result<Germ> {
    let kappa = cycle.period as u32;
    if let (Some(fe), Some(xe)) = (&f.exact, &cycle.points[0].exact) {
        return Ok(Germ::Exact(germ_generic(fe, xe, kappa, order, cfg)?));
    }
    Ok(Germ::Approx(germ_generic(&f.approx, &cycle.points[0].approx, kappa, order, cfg)?))
}

/// Invariants read off a first-return germ `g` whose linear coefficient is a
/// primitive `n`-th root of unity.
#[derive(Clone, Debug)]
pub struct GermInvariants<S: Scalar> {
    pub n: usize,
    pub big_n: usize,
    pub nu: usize,
    pub iota: S,
    pub beta: S,
    /// `g^n(z) - z` through the valid order, with the vanishing terms set to zero.
    pub w: TruncatedSeries<S>,
}

pub fn germ_invariants<S: Scalar>(g: &TruncatedSeries<S>, n: usize, cfg: &Config) -> Result<GermInvariants<S>> {
    let ctx = g.ctx();
    let t = g.order();
    let rho = g.coeff(1)?.clone();
    let rho_n = rho.pow_u(n as u64) - S::one(ctx);
    if !rho_n.is_negligible(cfg.eps_unity(), 1.0) {
        return Err(Error::NotRootOfUnity);
    }
    let gn = g.iterate(n)?;
    let mut w = gn.sub(&TruncatedSeries::identity(gn.order(), ctx));
    w.set_coeff(1, S::zero(ctx));
    let mut scale = 1.0f64;
    let mut first = None;
    for k in 2..=w.order() {
        scale = scale.max(gn.coeffs()[k].magnitude());
        if !w.coeffs()[k].is_negligible(cfg.eps_series(), scale) {
            first = Some(k);
            break;
        }
    }
    let Some(k) = first else {
        return Err(Error::InsufficientOrder {
            have: t as i64,
            need: 2 * t as i64,
        });
    };
    let big_n = k - 1;
    if 2 * big_n + 2 > w.order() {
        return Err(Error::InsufficientOrder {
            have: w.order() as i64,
            need: 2 * big_n as i64 + 2,
        });
    }
    for j in 2..k {
        w.set_coeff(j, S::zero(ctx));
    }
    if big_n % n != 0 {
        return Err(Error::NonDivisible { big_n, n });
    }
    let neg = w.scale(&-S::one(ctx));
    let iota = laurent_reciprocal(&neg)?.residue()?;
    let half = S::from_ratio(big_n as i64 + 1, 2, ctx);
    let beta = S::from_i64(n as i64, ctx) * (half - &iota);
    Ok(GermInvariants {
        n,
        big_n,
        nu: big_n / n,
        iota,
        beta,
        w,
    })
}

fn subtype_of(beta: &Cx, beta_exact: Option<&GaussRat>, cfg: &Config) -> (ParabolicSubtype, bool) {
    if let Some(b) = beta_exact {
        return (
            match b.re.cmp0() {
                std::cmp::Ordering::Greater => ParabolicSubtype::Repelling,
                std::cmp::Ordering::Less => ParabolicSubtype::Attracting,
                std::cmp::Ordering::Equal => ParabolicSubtype::Indifferent,
            },
            false,
        );
    }
    let re = beta.re.to_f64();
    if re.abs() <= cfg.eps_beta() {
        (ParabolicSubtype::Indifferent, true)
    } else if re > 0.0 {
        (ParabolicSubtype::Repelling, false)
    } else {
        (ParabolicSubtype::Attracting, false)
    }
}

/// Germ of sufficient order together with its invariants; the order starts at
/// `2 kappa D + 4` and doubles up to the configured cap.
pub fn parabolic_germ(f: &DynMap, cycle: &Cycle, cfg: &Config) -> Result<(Germ, ParabolicData)> {
    if cycle.class() != CycleClass::Parabolic {
        return Err(Error::NotParabolic);
    }
    let n = cycle.classification.root_order.ok_or(Error::NotParabolic)?;
    let prec = f.prec();
    let mut order = 2 * cycle.period * f.degree() + 4;
    loop {
        let germ = germ_at(f, cycle, order, cfg)?;
        let attempt = match &germ {
            Germ::Exact(g) => germ_invariants(g, n, cfg).map(|inv| {
                (
                    inv.n,
                    inv.big_n,
                    inv.nu,
                    inv.iota.to_cx(prec),
                    inv.beta.to_cx(prec),
                    Some(inv.iota),
                    Some(inv.beta),
                )
            }),
            Germ::Approx(g) => {
                germ_invariants(g, n, cfg).map(|inv| (inv.n, inv.big_n, inv.nu, inv.iota, inv.beta, None, None))
            }
        };
        match attempt {
            Ok((n, big_n, nu, iota, beta, iota_exact, beta_exact)) => {
                let (subtype, within_tolerance) = subtype_of(&beta, beta_exact.as_ref(), cfg);
                let data = ParabolicData {
                    n,
                    big_n,
                    nu,
                    iota,
                    beta,
                    iota_exact,
                    beta_exact,
                    subtype,
                    within_tolerance,
                    germ_order: order,
                };
                return Ok((germ, data));
            }
            Err(Error::InsufficientOrder { .. }) if order < cfg.series_order_cap => {
                order = (order * 2).min(cfg.series_order_cap);
            }
            Err(e) => return Err(e),
        }
    }
}

pub fn parabolic_invariants(f: &DynMap, cycle: &Cycle, cfg: &Config) -> Result<ParabolicData> {
    parabolic_germ(f, cycle, cfg).map(|(_, d)| d)
}

/// Fill in `cycle.parabolic` for every parabolic cycle.
pub fn attach_parabolic_data(f: &DynMap, cycles: &mut [Cycle], cfg: &Config) -> Result<()> {
    for c in cycles.iter_mut() {
        if c.class() == CycleClass::Parabolic {
            c.parabolic = Some(parabolic_invariants(f, c, cfg)?);
        }
    }
    Ok(())
}

/// Number of flat invariant divergence directions carried by the cycle.
pub fn gamma_of_cycle(cycle: &Cycle) -> Result<usize> {
    Ok(match cycle.class() {
        CycleClass::Superattracting | CycleClass::Repelling => 0,
        CycleClass::Attracting | CycleClass::IrrationallyIndifferent => 1,
        CycleClass::Parabolic => {
            let p = cycle.parabolic.as_ref().ok_or(Error::NotParabolic)?;
            match p.subtype {
                ParabolicSubtype::Repelling => p.nu,
                ParabolicSubtype::Attracting | ParabolicSubtype::Indifferent => p.nu + 1,
            }
        }
    })
}

// ---------------------------------------------------------------------------
// Invariant divergences

/// Polar part of `phi^*(sum_j c_j dz^2 / z^(j+2))` as coefficients of `dz^2 / z^(i+2)`,
/// `i = 0..len-1`. Requires `phi(0) = 0`, `phi'(0) != 0` and order at least `len`.
pub fn pullback_polar<S: Scalar>(phi: &TruncatedSeries<S>, c: &[S]) -> Result<Vec<S>> {
    let ctx = phi.ctx();
    let jmax = c.len().saturating_sub(1);
    if phi.order() < jmax + 1 {
        return Err(Error::InsufficientOrder {
            have: phi.order() as i64,
            need: jmax as i64 + 1,
        });
    }
    if !phi.coeffs()[0].is_zero() {
        return Err(Error::NonzeroConstantTerm);
    }
    let h = TruncatedSeries::new(phi.coeffs()[1..].to_vec(), phi.order() - 1, ctx).truncate(jmax);
    let hinv = h.reciprocal()?;
    let dphi = phi.derivative()?.truncate(jmax);
    let d2 = dphi.mul(&dphi).truncate(jmax);
    let mut out = vec![S::zero(ctx); c.len()];
    let mut pw = hinv.mul(&hinv).truncate(jmax);
    for (j, cj) in c.iter().enumerate() {
        if j > 0 {
            pw = pw.mul(&hinv).truncate(jmax);
        }
        if cj.is_zero() {
            continue;
        }
        let term = d2.mul(&pw).truncate(jmax);
        for k in 0..=j {
            out[j - k] = out[j - k].clone() + term.coeffs()[k].clone() * cj;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    /// `dz^2 / z^2` at an attracting, repelling or indifferent non-parabolic cycle.
    Multiplier,
    /// Element of `D°` with leading term `dz^2 / z^(l n + 2)`.
    Flat(usize),
    /// The canonical divergence `q_f`.
    Canonical,
}

#[derive(Clone, Debug)]
pub struct BasisElement {
    pub kind: BasisKind,
    /// Coefficients of `dz^2 / z^(i+2)`.
    pub coeffs: Vec<Cx>,
    pub exact: Option<Vec<GaussRat>>,
    /// Residue is non-positive on this element.
    pub flat: bool,
}

/// Basis of the invariant divergences at a cycle, expressed in the standard chart
/// of its first point.
#[derive(Clone, Debug)]
pub struct DivergenceBasis {
    pub chart: Mobius<Cx>,
    pub elements: Vec<BasisElement>,
}

impl DivergenceBasis {
    pub fn flat_count(&self) -> usize {
        self.elements.iter().filter(|e| e.flat).count()
    }
}

fn invariance_matrix<S: Scalar>(g: &TruncatedSeries<S>, j: usize) -> Result<Vec<Vec<S>>> {
    let ctx = g.ctx();
    // m[r][c]: row r of (g^* - I) e_c
    let mut m = vec![vec![S::zero(ctx); j + 1]; j + 1];
    for col in 0..=j {
        let mut e = vec![S::zero(ctx); col + 1];
        e[col] = S::one(ctx);
        let p = pullback_polar(g, &e)?;
        for (r, v) in p.into_iter().enumerate() {
            m[r][col] = v;
        }
        m[col][col] = m[col][col].clone() - S::one(ctx);
    }
    Ok(m)
}

/// Fill the entries of `x` at positions in `free` so that `(g^* - I) x` vanishes there.
fn complete<S: Scalar>(m: &[Vec<S>], x: &mut [S], free: &[bool]) -> Result<()> {
    let n = x.len();
    for r in (0..n).rev() {
        if !free[r] {
            continue;
        }
        let mut s = S::zero(x[0].ctx());
        for c in r + 1..n {
            if !x[c].is_zero() {
                s = s + m[r][c].clone() * &x[c];
            }
        }
        if m[r][r].is_zero() {
            return Err(Error::VerificationFailed("resonant pivot in invariant completion".into()));
        }
        x[r] = -(s / &m[r][r]);
    }
    Ok(())
}

fn check_invariant<S: Scalar>(m: &[Vec<S>], x: &[S], cfg: &Config) -> Result<()> {
    let scale = x.iter().map(|c| c.magnitude()).fold(1.0, f64::max)
        * m.iter().flat_map(|r| r.iter().map(|c| c.magnitude())).fold(1.0, f64::max);
    for row in m {
        let mut s = S::zero(x[0].ctx());
        for (a, b) in row.iter().zip(x) {
            s = s + a.clone() * b;
        }
        if !s.is_negligible(cfg.eps_series(), scale) {
            return Err(Error::VerificationFailed("divergence is not invariant".into()));
        }
    }
    Ok(())
}

/// Raw basis over `S`: `(kind, coefficients, flat)`.
pub fn divergence_basis_generic<S: Scalar>(
    g: &TruncatedSeries<S>,
    class: CycleClass,
    parabolic: Option<&ParabolicData>,
    cfg: &Config,
) -> Result<Vec<(BasisKind, Vec<S>, bool)>> {
    let ctx = g.ctx();
    match class {
        CycleClass::Superattracting => Ok(vec![]),
        CycleClass::Attracting | CycleClass::IrrationallyIndifferent => {
            Ok(vec![(BasisKind::Multiplier, vec![S::one(ctx)], true)])
        }
        CycleClass::Repelling => Ok(vec![(BasisKind::Multiplier, vec![S::one(ctx)], false)]),
        CycleClass::Parabolic => {
            let p = parabolic.ok_or(Error::NotParabolic)?;
            let (n, big_n, nu) = (p.n, p.big_n, p.nu);
            let j = 2 * big_n;
            let m = invariance_matrix(g, j)?;
            let inv = germ_invariants(g, n, cfg)?;
            let mut out = Vec::new();
            for l in 0..nu {
                let pos = l * n;
                let mut x = vec![S::zero(ctx); j + 1];
                x[pos] = S::one(ctx);
                let free: Vec<bool> = (0..=j).map(|k| k < pos && k % n != 0).collect();
                complete(&m, &mut x, &free)?;
                check_invariant(&m, &x, cfg)?;
                out.push((BasisKind::Flat(l), x, true));
            }
            // q_f = n^2 dz^2 / v^2 with v = w - w w'/2 the truncated formal generator of g^n.
            let w = inv.w.truncate(2 * big_n + 1);
            let v = w.sub(&w.mul(&w.derivative()?).scale(&S::from_ratio(1, 2, ctx)));
            let v = TruncatedSeries::new(v.coeffs()[..=2 * big_n + 1].to_vec(), 4 * big_n + 4, ctx);
            let v2 = v.mul(&v);
            let r = laurent_reciprocal(&v2)?;
            let n2 = S::from_i64((n * n) as i64, ctx);
            let mut x: Vec<S> = (0..=j)
                .map(|i| r.coeff(-(i as i64) - 2).map(|c| c * &n2))
                .collect::<Result<_>>()?;
            let free: Vec<bool> = (0..=j).map(|k| k < big_n && k % n != 0).collect();
            complete(&m, &mut x, &free)?;
            check_invariant(&m, &x, cfg)?;
            let flat = p.subtype != ParabolicSubtype::Repelling;
            out.push((BasisKind::Canonical, x, flat));
            Ok(out)
        }
    }
}

/// Basis of the invariant divergences at `cycle` (module over the first-return map).
pub fn invariant_divergence_basis(f: &DynMap, cycle: &Cycle, cfg: &Config) -> Result<DivergenceBasis> {
    let prec = f.prec();
    let chart = match &cycle.points[0].exact {
        Some(e) => Mobius::chart_at(e).to_cx(prec),
        None => Mobius::chart_at(&cycle.points[0].approx),
    };
    let (germ, pdata) = if cycle.class() == CycleClass::Parabolic {
        let (g, d) = match &cycle.parabolic {
            Some(d) => (germ_at(f, cycle, d.germ_order, cfg)?, d.clone()),
            None => parabolic_germ(f, cycle, cfg)?,
        };
        (Some(g), Some(d))
    } else {
        (None, None)
    };
    let elements = match &germ {
        Some(Germ::Exact(g)) => divergence_basis_generic(g, cycle.class(), pdata.as_ref(), cfg)?
            .into_iter()
            .map(|(kind, c, flat)| BasisElement {
                kind,
                coeffs: c.iter().map(|x| x.to_cx(prec)).collect(),
                exact: Some(c),
                flat,
            })
            .collect(),
        Some(Germ::Approx(g)) => divergence_basis_generic(g, cycle.class(), pdata.as_ref(), cfg)?
            .into_iter()
            .map(|(kind, c, flat)| BasisElement {
                kind,
                coeffs: c,
                exact: None,
                flat,
            })
            .collect(),
        None => {
            let dummy = TruncatedSeries::identity(1, ());
            divergence_basis_generic::<GaussRat>(&dummy, cycle.class(), None, cfg)?
                .into_iter()
                .map(|(kind, c, flat)| BasisElement {
                    kind,
                    coeffs: c.iter().map(|x| x.to_cx(prec)).collect(),
                    exact: Some(c),
                    flat,
                })
                .collect()
        }
    };
    Ok(DivergenceBasis { chart, elements })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gs(v: &[i64], t: usize) -> TruncatedSeries<GaussRat> {
        TruncatedSeries::new(v.iter().map(|&k| GaussRat::from_int(k)).collect(), t, ())
    }

    #[test]
    fn synthetic_germ_invariants() {
        let cfg = Config::default();
        // w + w^2 + w^3: iota = 1, beta = 0
        let inv = germ_invariants(&gs(&[0, 1, 1, 1], 8), 1, &cfg).unwrap();
        assert_eq!((inv.big_n, inv.nu), (1, 1));
        assert_eq!(inv.iota, GaussRat::one());
        assert!(inv.beta.is_zero());
        // w + w^2: beta = 1
        let inv = germ_invariants(&gs(&[0, 1, 1], 8), 1, &cfg).unwrap();
        assert_eq!(inv.beta, GaussRat::one());
        // -w + w^2: N = 2, iota = 1/8, beta = 2 (3/2 - 1/8) = 11/4
        let inv = germ_invariants(&gs(&[0, -1, 1], 10), 2, &cfg).unwrap();
        assert_eq!((inv.big_n, inv.nu), (2, 1));
        assert_eq!(inv.iota, GaussRat::from_ratio(1, 8));
        assert_eq!(inv.beta, GaussRat::from_ratio(11, 4));
    }

    #[test]
    fn non_divisible_and_non_root() {
        let cfg = Config::default();
        let g = TruncatedSeries::new(
            vec![GaussRat::zero(), GaussRat::from_ratio(1, 2), GaussRat::one()],
            8,
            (),
        );
        assert_eq!(germ_invariants(&g, 1, &cfg).unwrap_err(), Error::NotRootOfUnity);
    }

    #[test]
    fn basis_in_normal_coordinates() {
        let cfg = Config::default();
        let g = gs(&[0, 1, 1], 8);
        let inv = germ_invariants(&g, 1, &cfg).unwrap();
        let pd = ParabolicData {
            n: 1,
            big_n: inv.big_n,
            nu: inv.nu,
            iota: inv.iota.to_cx(64),
            beta: inv.beta.to_cx(64),
            iota_exact: None,
            beta_exact: Some(inv.beta.clone()),
            subtype: ParabolicSubtype::Repelling,
            within_tolerance: false,
            germ_order: 8,
        };
        let b = divergence_basis_generic(&g, CycleClass::Parabolic, Some(&pd), &cfg).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].1, vec![GaussRat::one(), GaussRat::zero(), GaussRat::zero()]);
        // dz^2/z^4 + 2 dz^2/z^3 + 3 dz^2/z^2
        assert_eq!(b[1].1, vec![GaussRat::from_int(3), GaussRat::from_int(2), GaussRat::one()]);
        assert!(b[0].2 && !b[1].2);
    }
}
