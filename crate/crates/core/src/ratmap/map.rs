use super::mobius::Mobius;
use super::sphere::{Pt, SpherePoint};
use crate::error::{Error, Result};
use crate::numkernel::linalg::determinant;
use crate::numkernel::{find_roots, Cx, GaussRat, Poly, Scalar};

/// `f = P/Q` of degree `D = max(deg P, deg Q)`, acting on the sphere through the
/// homogeneous forms of formal degree `D`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap<S: Scalar> {
    num: Poly<S>,
    den: Poly<S>,
    degree: usize,
}

/// Sylvester resultant of two polynomials with their actual degrees.
pub fn sylvester_resultant<S: Scalar>(p: &Poly<S>, q: &Poly<S>) -> S {
    let ctx = p.ctx();
    let (Some(dp), Some(dq)) = (p.degree(), q.degree()) else {
        return S::zero(ctx);
    };
    if dp == 0 {
        return p.coeff(0).pow_u(dq as u64);
    }
    if dq == 0 {
        return q.coeff(0).pow_u(dp as u64);
    }
    let n = dp + dq;
    let mut m = vec![vec![S::zero(ctx); n]; n];
    for r in 0..dq {
        for k in 0..=dp {
            m[r][r + k] = p.coeff(dp - k);
        }
    }
    for r in 0..dp {
        for k in 0..=dq {
            m[dq + r][r + k] = q.coeff(dq - k);
        }
    }
    determinant(m)
}

impl<S: Scalar> RationalMap<S> {
    /// Validated constructor: `Q != 0`, `P` and `Q` coprime; normalizes `Q` to be monic.
    pub fn new(num: Poly<S>, den: Poly<S>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if num.is_zero() {
            return Err(Error::NotCoprime);
        }
        if S::EXACT {
            if num.gcd(&den).degree().unwrap_or(0) > 0 {
                return Err(Error::NotCoprime);
            }
        } else {
            let res = sylvester_resultant(&num, &den).magnitude();
            let (dp, dq) = (num.deg0() as i32, den.deg0() as i32);
            let scale = num.norm_max().powi(dq) * den.norm_max().powi(dp);
            let prec = num.coeff(0).precision().unwrap_or(256) as f64;
            if res <= (2.0f64).powf(-prec / 2.0) * scale {
                return Err(Error::NotCoprime);
            }
        }
        Ok(Self::normalize(num, den))
    }

    /// Divide out the common factor (exact scalars) before validating.
    pub fn new_reduced(num: Poly<S>, den: Poly<S>) -> Result<Self> {
        if S::EXACT && !num.is_zero() && !den.is_zero() {
            let g = num.gcd(&den);
            if g.degree().unwrap_or(0) > 0 {
                let num = num.divrem(&g)?.0;
                let den = den.divrem(&g)?.0;
                return Self::new(num, den);
            }
        }
        Self::new(num, den)
    }

    fn normalize(num: Poly<S>, den: Poly<S>) -> Self {
        let inv = S::one(den.ctx()) / den.lead().unwrap();
        let degree = num.deg0().max(den.deg0());
        RationalMap {
            num: num.scale(&inv),
            den: den.scale(&inv),
            degree,
        }
    }

    pub fn from_parts_unchecked(num: Poly<S>, den: Poly<S>, degree: usize) -> Self {
        RationalMap { num, den, degree }
    }

    pub fn num(&self) -> &Poly<S> {
        &self.num
    }
    pub fn den(&self) -> &Poly<S> {
        &self.den
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn ctx(&self) -> S::Ctx {
        self.num.ctx()
    }
    pub fn is_polynomial(&self) -> bool {
        self.den.deg0() == 0
    }

    pub fn evaluate(&self, x: &SpherePoint<S>) -> Result<SpherePoint<S>> {
        let w0 = self.num.eval_hom(x.z0(), x.z1(), self.degree);
        let w1 = self.den.eval_hom(x.z0(), x.z1(), self.degree);
        SpherePoint::from_homogeneous(w0, w1)
    }

    /// `self o g`.
    pub fn compose(&self, g: &RationalMap<S>) -> RationalMap<S> {
        let num = self.num.hom_compose(&g.num, &g.den, self.degree);
        let den = self.den.hom_compose(&g.num, &g.den, self.degree);
        RationalMap {
            num,
            den,
            degree: self.degree * g.degree,
        }
    }

    /// `k`-fold iterate; fails when `D^k` exceeds `cap`.
    pub fn iterate(&self, k: u32, cap: u64) -> Result<RationalMap<S>> {
        let total = (self.degree as u64).checked_pow(k).unwrap_or(u64::MAX);
        if total > cap {
            return Err(Error::DegreeCapExceeded { degree: total, cap });
        }
        if k == 0 {
            let ctx = self.ctx();
            return Ok(RationalMap::from_parts_unchecked(Poly::x(ctx), Poly::one(ctx), 1));
        }
        let mut g = self.clone();
        for _ in 1..k {
            g = self.compose(&g);
        }
        Ok(g)
    }

    /// `m o self o m^{-1}`.
    pub fn conjugate(&self, m: &Mobius<S>) -> RationalMap<S> {
        m.to_map().compose(&self.compose(&m.inverse().to_map()))
    }

    /// `P'Q - PQ'`.
    pub fn wronskian(&self) -> Poly<S> {
        self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()))
    }

    /// Numerator and denominator of `f` read between the charts `z` (unit disk) or
    /// `u = 1/z` on the source and on the target.
    pub fn chart_pair(&self, src_disk: bool, tgt_disk: bool) -> (Poly<S>, Poly<S>) {
        let d = self.degree;
        let (p, q) = if src_disk {
            (self.num.clone(), self.den.clone())
        } else {
            (self.num.reversed(d), self.den.reversed(d))
        };
        if tgt_disk {
            (p, q)
        } else {
            (q, p)
        }
    }

    /// Derivative of `f` at `x` in the standard charts of `x` and `f(x)`.
    pub fn derivative_at(&self, x: &SpherePoint<S>) -> Result<S> {
        let y = self.evaluate(x)?;
        let (n, m) = self.chart_pair(x.in_unit_disk(), y.in_unit_disk());
        let t = x.chart_coord();
        let mv = m.eval(t);
        let nv = n.eval(t);
        Ok((n.derivative().eval(t) * &mv - nv * m.derivative().eval(t)) / (mv.clone() * &mv))
    }

    pub fn to_cx(&self, prec: u32) -> RationalMap<Cx> {
        RationalMap {
            num: self.num.to_cx(prec),
            den: self.den.to_cx(prec),
            degree: self.degree,
        }
    }

    pub fn as_gauss(&self) -> Option<RationalMap<GaussRat>> {
        Some(RationalMap {
            num: self.num.as_gauss()?,
            den: self.den.as_gauss()?,
            degree: self.degree,
        })
    }
}

/// Critical point with its local degree (multiplicity of the critical point plus one).
#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub point: Pt,
    pub local_degree: usize,
}

/// Forward orbit segment; when `repeat_from = Some(j)` the last point maps to `points[j]`.
#[derive(Clone, Debug)]
pub struct Orbit {
    pub points: Vec<Pt>,
    pub repeat_from: Option<usize>,
}

/// A map known numerically at a fixed precision and, when its coefficients are
/// Gaussian rationals, exactly.
#[derive(Clone, Debug)]
pub struct DynMap {
    pub approx: RationalMap<Cx>,
    pub exact: Option<RationalMap<GaussRat>>,
    prec: u32,
}

impl DynMap {
    pub fn from_exact(f: RationalMap<GaussRat>, prec: u32) -> DynMap {
        DynMap {
            approx: f.to_cx(prec),
            exact: Some(f),
            prec,
        }
    }
    pub fn from_approx(f: RationalMap<Cx>) -> DynMap {
        let prec = f.ctx();
        DynMap {
            approx: f,
            exact: None,
            prec,
        }
    }
    pub fn prec(&self) -> u32 {
        self.prec
    }
    pub fn degree(&self) -> usize {
        self.approx.degree()
    }
    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn eval(&self, x: &Pt) -> Result<Pt> {
        if let (Some(f), Some(e)) = (&self.exact, &x.exact) {
            return Ok(Pt::from_exact(f.evaluate(e)?, self.prec));
        }
        Ok(Pt::from_approx(self.approx.evaluate(&x.approx)?))
    }

    pub fn derivative_at(&self, x: &Pt) -> Result<(Cx, Option<GaussRat>)> {
        if let (Some(f), Some(e)) = (&self.exact, &x.exact) {
            let d = f.derivative_at(e)?;
            return Ok((Cx::from_gauss(&d, self.prec), Some(d)));
        }
        Ok((self.approx.derivative_at(&x.approx)?, None))
    }

    /// Forward orbit `x, f(x), ...` until a point repeats or `max_len` points are collected.
    pub fn orbit(&self, x: &Pt, max_len: usize, eps: f64) -> Result<Orbit> {
        let mut points = vec![x.clone()];
        while points.len() < max_len {
            let y = self.eval(points.last().unwrap())?;
            if let Some(j) = points.iter().position(|p| p.coincides(&y, eps)) {
                return Ok(Orbit {
                    points,
                    repeat_from: Some(j),
                });
            }
            points.push(y);
        }
        Ok(Orbit {
            points,
            repeat_from: None,
        })
    }

    /// Critical points with local degrees; the multiplicities sum to `2D - 2`.
    pub fn critical_points(&self, eps_cluster: f64, eps_trim: f64) -> Result<Vec<CriticalPoint>> {
        let d = self.degree();
        let (found, wdeg) = match &self.exact {
            Some(f) => {
                let w = f.wronskian();
                (find_roots(&w, self.prec, eps_cluster)?, w.deg0())
            }
            None => {
                let w = self.approx.wronskian().trim_relative(eps_trim);
                (find_roots(&w, self.prec, eps_cluster)?, w.deg0())
            }
        };
        let mut out: Vec<CriticalPoint> = found
            .into_iter()
            .map(|r| CriticalPoint {
                point: match r.exact {
                    Some(g) => Pt::from_exact(SpherePoint::finite(g), self.prec),
                    None => Pt::finite_cx(r.value),
                },
                local_degree: r.multiplicity + 1,
            })
            .collect();
        let at_inf = (2 * d - 2).saturating_sub(wdeg);
        if at_inf > 0 {
            out.push(CriticalPoint {
                point: Pt::from_exact(SpherePoint::infinity(()), self.prec),
                local_degree: at_inf + 1,
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(v: &[i64]) -> Poly<GaussRat> {
        Poly::new(v.iter().map(|&k| GaussRat::from_int(k)).collect(), ())
    }

    fn map(n: &[i64], d: &[i64]) -> RationalMap<GaussRat> {
        RationalMap::new(gp(n), gp(d)).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let sq = map(&[0, 0, 1], &[1]);
        assert!(sq.evaluate(&SpherePoint::infinity(())).unwrap().is_infinity());
        let f = map(&[1, 0, 1], &[-1, 0, 1]);
        assert!(f.evaluate(&SpherePoint::finite(GaussRat::from_int(1))).unwrap().is_infinity());
        let g = RationalMap::new(
            Poly::new(vec![GaussRat::from_ratio(1, 4), GaussRat::zero(), GaussRat::one()], ()),
            gp(&[1]),
        )
        .unwrap();
        let half = SpherePoint::finite(GaussRat::from_ratio(1, 2));
        assert_eq!(g.evaluate(&half).unwrap(), half);
    }

    #[test]
    fn iterate_examples() {
        assert_eq!(map(&[0, 0, 1], &[1]).iterate(3, 4096).unwrap(), map(&[0, 0, 0, 0, 0, 0, 0, 0, 1], &[1]));
        assert_eq!(map(&[-1, 0, 1], &[1]).iterate(2, 4096).unwrap(), map(&[0, 0, -2, 0, 1], &[1]));
        let inv = RationalMap::from_parts_unchecked(gp(&[1]), gp(&[0, 1]), 1);
        let id = inv.iterate(2, 4096).unwrap();
        let x = SpherePoint::finite(GaussRat::from_int(7));
        assert_eq!(id.evaluate(&x).unwrap(), x);
        assert!(matches!(map(&[0, 0, 1], &[1]).iterate(13, 4096), Err(Error::DegreeCapExceeded { .. })));
    }

    #[test]
    fn coprimality_is_enforced() {
        assert_eq!(RationalMap::new(gp(&[-1, 0, 1]), gp(&[1, 1])), Err(Error::NotCoprime));
        let c = |p: &Poly<GaussRat>| p.to_cx(256);
        assert!(RationalMap::new(c(&gp(&[-1, 0, 1])), c(&gp(&[1, 1]))).is_err());
        assert!(RationalMap::new(c(&gp(&[1, 0, 1])), c(&gp(&[1, 1]))).is_ok());
    }

    #[test]
    fn conjugation_examples() {
        let f = RationalMap::new(
            Poly::new(vec![GaussRat::from_ratio(1, 4), GaussRat::zero(), GaussRat::one()], ()),
            gp(&[1]),
        )
        .unwrap();
        // w = z - 1/2 turns z^2 + 1/4 into w^2 + w
        let m = Mobius::translation(GaussRat::from_ratio(-1, 2));
        let g = f.conjugate(&m);
        let g = RationalMap::new_reduced(g.num().clone(), g.den().clone()).unwrap();
        assert_eq!(g, map(&[0, 1, 1], &[1]));
        let inv = Mobius::new(GaussRat::zero(), GaussRat::one(), GaussRat::one(), GaussRat::zero()).unwrap();
        let sq = map(&[0, 0, 1], &[1]).conjugate(&inv);
        let sq = RationalMap::new_reduced(sq.num().clone(), sq.den().clone()).unwrap();
        assert_eq!(sq, map(&[0, 0, 1], &[1]));
    }

    #[test]
    fn critical_point_examples() {
        let crit = |f: RationalMap<GaussRat>| {
            let mut v: Vec<(String, usize)> = DynMap::from_exact(f, 256)
                .critical_points((2.0f64).powi(-64), 1e-50)
                .unwrap()
                .into_iter()
                .map(|c| (c.point.literal(), c.local_degree))
                .collect();
            v.sort();
            v
        };
        assert_eq!(crit(map(&[0, 0, 1], &[1])), vec![("0".into(), 2), ("inf".into(), 2)]);
        assert_eq!(crit(map(&[0, 0, 0, 1], &[1])), vec![("0".into(), 3), ("inf".into(), 3)]);
        assert_eq!(crit(map(&[1, 0, 1], &[-1, 0, 1])), vec![("0".into(), 2), ("inf".into(), 2)]);
    }

    #[test]
    fn multiplier_in_charts() {
        let sq = map(&[0, 0, 1], &[1]);
        assert!(sq.derivative_at(&SpherePoint::infinity(())).unwrap().is_zero());
        assert_eq!(sq.derivative_at(&SpherePoint::finite(GaussRat::one())).unwrap(), GaussRat::from_int(2));
        // 1/z^2 swaps 0 and infinity; derivative in charts vanishes at both.
        let g = map(&[1], &[0, 0, 1]);
        assert!(g.derivative_at(&SpherePoint::infinity(())).unwrap().is_zero());
    }
}
