use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkernel::{Cx, GaussRat, Scalar};

/// Point `(z0 : z1)` of the Riemann sphere with `z = z0 / z1`.
///
/// The larger coordinate (in modulus) is normalized to exactly one, so a point
/// is either `(z : 1)` with `|z| <= 1` or `(1 : u)` with `|u| < 1` and `u = 1/z`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpherePoint<S: Scalar> {
    z0: S,
    z1: S,
}

impl<S: Scalar> SpherePoint<S> {
    pub fn from_homogeneous(z0: S, z1: S) -> Result<Self> {
        if z0.is_zero() && z1.is_zero() {
            return Err(Error::IndeterminatePoint);
        }
        if !S::EXACT {
            let bad = |x: &S| x.to_cx(64).is_finite();
            if !bad(&z0) || !bad(&z1) {
                return Err(Error::IndeterminatePoint);
            }
        }
        let ctx = z0.ctx();
        Ok(if z0.cmp_abs(&z1) == Ordering::Greater {
            SpherePoint {
                z1: z1 / &z0,
                z0: S::one(ctx),
            }
        } else {
            SpherePoint {
                z0: z0 / &z1,
                z1: S::one(ctx),
            }
        })
    }
    pub fn finite(z: S) -> Self {
        let one = S::one(z.ctx());
        SpherePoint::from_homogeneous(z, one).expect("finite point")
    }
    pub fn infinity(ctx: S::Ctx) -> Self {
        SpherePoint {
            z0: S::one(ctx),
            z1: S::zero(ctx),
        }
    }
    pub fn z0(&self) -> &S {
        &self.z0
    }
    pub fn z1(&self) -> &S {
        &self.z1
    }
    pub fn ctx(&self) -> S::Ctx {
        self.z0.ctx()
    }
    pub fn is_infinity(&self) -> bool {
        self.z1.is_zero()
    }
    /// True when the point lies in the closed unit disk `|z| <= 1`.
    pub fn in_unit_disk(&self) -> bool {
        self.z1.is_one()
    }
    /// Coordinate in the preferred chart: `z` inside the unit disk, `u = 1/z` outside.
    pub fn chart_coord(&self) -> &S {
        if self.in_unit_disk() {
            &self.z0
        } else {
            &self.z1
        }
    }
    pub fn affine(&self) -> Option<S> {
        if self.in_unit_disk() {
            Some(self.z0.clone())
        } else if self.z1.is_zero() {
            None
        } else {
            Some(S::one(self.ctx()) / &self.z1)
        }
    }
    pub fn to_cx(&self, prec: u32) -> SpherePoint<Cx> {
        SpherePoint {
            z0: self.z0.to_cx(prec),
            z1: self.z1.to_cx(prec),
        }
    }
    pub fn as_gauss(&self) -> Option<SpherePoint<GaussRat>> {
        Some(SpherePoint {
            z0: self.z0.as_gauss()?,
            z1: self.z1.as_gauss()?,
        })
    }
}

impl SpherePoint<Cx> {
    /// Nearby point of small height over Q(i): chart coordinate with
    /// denominators up to 2^32, within `tol`.
    pub fn rationalize(&self, tol: f64) -> Option<SpherePoint<GaussRat>> {
        let max_den = rug::Integer::from(1u64 << 32);
        if self.in_unit_disk() {
            return Some(SpherePoint::finite(GaussRat::rationalize(&self.z0, &max_den, tol)?));
        }
        let u = GaussRat::rationalize(&self.z1, &max_den, tol)?;
        Some(if u.is_zero() {
            SpherePoint::infinity(())
        } else {
            SpherePoint::finite(GaussRat::one() / u)
        })
    }
    /// Double-precision affine value, `None` at infinity.
    pub fn to_c64(&self) -> Option<Complex64> {
        if self.in_unit_disk() {
            Some(self.z0.to_c64())
        } else if self.z1.is_zero() {
            None
        } else {
            Some(self.z1.to_c64().inv())
        }
    }
    pub fn prec(&self) -> u32 {
        self.z0.prec()
    }
}

/// Chordal distance `|z0 w1 - z1 w0| / (|(z0,z1)| |(w0,w1)|)`, at most 1.
pub fn chordal_distance(a: &SpherePoint<Cx>, b: &SpherePoint<Cx>) -> f64 {
    let num = (&a.z0 * &b.z1 - &a.z1 * &b.z0).abs();
    let na = (a.z0.norm_sqr() + a.z1.norm_sqr()).sqrt();
    let nb = (b.z0.norm_sqr() + b.z1.norm_sqr()).sqrt();
    (num / na / nb).to_f64()
}

/// Chordal distance between double-precision points (`None` is infinity).
pub fn chordal64(a: Option<Complex64>, b: Option<Complex64>) -> f64 {
    match (a, b) {
        (None, None) => 0.0,
        (Some(z), None) | (None, Some(z)) => 1.0 / (1.0 + z.norm_sqr()).sqrt(),
        (Some(z), Some(w)) => (z - w).norm() / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt()),
    }
}

/// Lexicographic order on affine values (real part, then imaginary part), infinity last.
pub fn cmp_lex(a: &SpherePoint<Cx>, b: &SpherePoint<Cx>) -> Ordering {
    match (a.affine(), b.affine()) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(x), Some(y)) => x
            .re
            .partial_cmp(&y.re)
            .unwrap_or(Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal)),
    }
}

/// A point known numerically and, when available, exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct Pt {
    pub approx: SpherePoint<Cx>,
    pub exact: Option<SpherePoint<GaussRat>>,
}

impl Pt {
    pub fn from_exact(p: SpherePoint<GaussRat>, prec: u32) -> Pt {
        Pt {
            approx: p.to_cx(prec),
            exact: Some(p),
        }
    }
    pub fn from_approx(p: SpherePoint<Cx>) -> Pt {
        Pt { approx: p, exact: None }
    }
    pub fn finite_cx(z: Cx) -> Pt {
        Pt::from_approx(SpherePoint::finite(z))
    }
    pub fn to_c64(&self) -> Option<Complex64> {
        self.approx.to_c64()
    }
    pub fn is_infinity(&self) -> bool {
        match &self.exact {
            Some(e) => e.is_infinity(),
            None => self.approx.is_infinity(),
        }
    }
    /// Decimal or exact literal for reports; infinity is rendered as `inf`.
    pub fn literal(&self) -> String {
        if let Some(e) = &self.exact {
            return match e.affine() {
                Some(g) => g.to_string(),
                None => "inf".into(),
            };
        }
        match self.approx.affine() {
            Some(z) => z.to_decimal_string(Some(30)),
            None => "inf".into(),
        }
    }
    /// True when the points agree exactly or lie within `eps` in the chordal metric.
    pub fn coincides(&self, other: &Pt, eps: f64) -> bool {
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            return a == b;
        }
        chordal_distance(&self.approx, &other.approx) <= eps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_picks_chart() {
        let p = SpherePoint::from_homogeneous(GaussRat::from_int(3), GaussRat::from_int(1)).unwrap();
        assert!(!p.in_unit_disk());
        assert_eq!(p.chart_coord(), &GaussRat::from_ratio(1, 3));
        assert_eq!(p.affine(), Some(GaussRat::from_int(3)));
        let inf = SpherePoint::<GaussRat>::infinity(());
        assert!(inf.is_infinity());
        assert_eq!(inf.affine(), None);
        assert!(SpherePoint::from_homogeneous(GaussRat::zero(), GaussRat::zero()).is_err());
    }

    #[test]
    fn chordal_metric() {
        let a = SpherePoint::finite(Cx::from_f64(0.0, 0.0, 128));
        let b = SpherePoint::<Cx>::infinity(128);
        assert!((chordal_distance(&a, &b) - 1.0).abs() < 1e-30);
        assert!((chordal64(Some(Complex64::new(1.0, 0.0)), None) - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
