use crate::error::{Error, Result};
use crate::numkernel::{find_roots, Cx, GaussRat, Poly, Scalar};
use crate::ratmap::{chordal_distance, SpherePoint};

/// Rational quadratic differential `q = (N(z)/D(z)) dz^2` written in the affine chart.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalQD<S: Scalar> {
    pub num: Poly<S>,
    pub den: Poly<S>,
}

/// One entry of the divisor of a quadratic differential.
#[derive(Clone, Debug)]
pub struct DivisorEntry {
    pub point: SpherePoint<Cx>,
    pub exact: Option<SpherePoint<GaussRat>>,
    pub order: i64,
}

impl<S: Scalar> RationalQD<S> {
    /// Normalizes the denominator to be monic, and zero to `0/1`.
    pub fn new(num: Poly<S>, den: Poly<S>) -> Result<Self> {
        let lead = den.lead().ok_or(Error::ZeroPolynomial)?.clone();
        if num.is_zero() {
            return Ok(Self::zero(den.ctx()));
        }
        let inv = S::one(den.ctx()) / &lead;
        Ok(RationalQD {
            num: num.scale(&inv),
            den: den.scale(&inv),
        })
    }
    pub fn zero(ctx: S::Ctx) -> Self {
        RationalQD {
            num: Poly::zero(ctx),
            den: Poly::one(ctx),
        }
    }
    pub fn ctx(&self) -> S::Ctx {
        self.den.ctx()
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    /// `deg D - deg N - 4`; `None` for the zero differential.
    pub fn ord_infinity(&self) -> Option<i64> {
        let dn = self.num.degree()? as i64;
        Some(self.den.deg0() as i64 - dn - 4)
    }
    pub fn eval(&self, z: &S) -> S {
        self.num.eval(z) / self.den.eval(z)
    }
    pub fn scale(&self, s: &S) -> Self {
        RationalQD {
            num: self.num.scale(s),
            den: self.den.clone(),
        }
        .canonical_zero()
    }
    pub fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            return RationalQD {
                num: self.num.add(&other.num),
                den: self.den.clone(),
            }
            .canonical_zero();
        }
        RationalQD {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
        .canonical_zero()
    }
    fn canonical_zero(self) -> Self {
        if self.num.is_zero() { Self::zero(self.ctx()) } else { self }
    }
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one(self.ctx())))
    }
    pub fn to_cx(&self, prec: u32) -> RationalQD<Cx> {
        RationalQD {
            num: self.num.to_cx(prec),
            den: self.den.to_cx(prec),
        }
    }
    pub fn as_gauss(&self) -> Option<RationalQD<GaussRat>> {
        Some(RationalQD {
            num: self.num.as_gauss()?,
            den: self.den.as_gauss()?,
        })
    }

    /// Divisor: zeros and poles with orders, including the point at infinity.
    ///
    /// Exact differentials are reduced first and factored square-free, so the
    /// orders are exact; numerical ones are matched within `2^(-p/8)`.
    pub fn divisor(&self, prec: u32, eps_cluster: f64) -> Result<Vec<DivisorEntry>> {
        if self.is_zero() {
            return Ok(vec![]);
        }
        let mut raw: Vec<(Cx, Option<GaussRat>, i64)> = Vec::new();
        if let Some(q) = self.as_gauss() {
            let q = q.reduced();
            for (poly, sign) in [(&q.num, 1i64), (&q.den, -1i64)] {
                for (factor, mult) in poly.squarefree_decomposition() {
                    for r in find_roots(&factor, prec, eps_cluster)? {
                        raw.push((r.value, r.exact, sign * (mult * r.multiplicity) as i64));
                    }
                }
            }
        } else {
            for (poly, sign) in [(&self.num, 1i64), (&self.den, -1i64)] {
                if poly.deg0() == 0 {
                    continue;
                }
                for r in find_roots(&poly.to_cx(prec), prec, eps_cluster)? {
                    raw.push((r.value, None, sign * r.multiplicity as i64));
                }
            }
        }
        let tol = (2.0f64).powf(-(prec as f64) / 8.0);
        let mut out: Vec<DivisorEntry> = Vec::new();
        for (z, ex, ord) in raw {
            let p = SpherePoint::finite(z);
            match out.iter_mut().find(|e| chordal_distance(&e.point, &p) <= tol) {
                Some(e) => {
                    e.order += ord;
                    if e.exact.is_none() {
                        e.exact = ex.map(SpherePoint::finite);
                    }
                }
                None => out.push(DivisorEntry {
                    point: p,
                    exact: ex.map(SpherePoint::finite),
                    order: ord,
                }),
            }
        }
        out.retain(|e| e.order != 0);
        let oi = self.ord_infinity().unwrap();
        if oi != 0 {
            out.push(DivisorEntry {
                point: SpherePoint::infinity(prec),
                exact: Some(SpherePoint::infinity(())),
                order: oi,
            });
        }
        Ok(out)
    }
}

/// Order of `q` at `x` read off a divisor (0 if `x` is not listed).
pub fn order_at(div: &[DivisorEntry], x: &SpherePoint<Cx>, tol: f64) -> i64 {
    div.iter()
        .filter(|e| chordal_distance(&e.point, x) <= tol)
        .map(|e| e.order)
        .sum()
}

impl RationalQD<GaussRat> {
    /// Divide out the common factor of numerator and denominator.
    pub fn reduced(&self) -> Self {
        if self.num.is_zero() {
            return RationalQD::zero(());
        }
        let g = self.num.gcd(&self.den);
        if g.deg0() == 0 {
            return RationalQD::new(self.num.clone(), self.den.clone()).unwrap();
        }
        let num = self.num.divrem(&g).unwrap().0;
        let den = self.den.divrem(&g).unwrap().0;
        RationalQD::new(num, den).unwrap()
    }
}

impl RationalQD<Cx> {
    /// Largest coefficient difference after normalizing both denominators to be monic.
    pub fn coeff_distance(&self, other: &RationalQD<Cx>) -> f64 {
        let a = RationalQD::new(self.num.clone(), self.den.clone()).unwrap();
        let b = RationalQD::new(other.num.clone(), other.den.clone()).unwrap();
        let d = |x: &Poly<Cx>, y: &Poly<Cx>| {
            let n = x.coeffs().len().max(y.coeffs().len());
            (0..n).map(|k| (x.coeff(k) - y.coeff(k)).abs_f64()).fold(0.0, f64::max)
        };
        d(&a.num, &b.num).max(d(&a.den, &b.den))
    }
}
