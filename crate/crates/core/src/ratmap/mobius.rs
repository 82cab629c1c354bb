use super::map::RationalMap;
use super::sphere::SpherePoint;
use crate::error::{Error, Result};
use crate::numkernel::{Cx, GaussRat, Poly, Scalar};

/// `z -> (a z + b) / (c z + d)` with `ad - bc != 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mobius<S: Scalar> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
}

impl<S: Scalar> Mobius<S> {
    pub fn new(a: S, b: S, c: S, d: S) -> Result<Self> {
        let m = Mobius { a, b, c, d };
        if m.det().is_zero() {
            return Err(Error::InvalidInput("singular Mobius transformation".into()));
        }
        Ok(m)
    }
    pub fn identity(ctx: S::Ctx) -> Self {
        Mobius {
            a: S::one(ctx),
            b: S::zero(ctx),
            c: S::zero(ctx),
            d: S::one(ctx),
        }
    }
    pub fn ctx(&self) -> S::Ctx {
        self.a.ctx()
    }
    pub fn det(&self) -> S {
        self.a.clone() * &self.d - self.b.clone() * &self.c
    }
    pub fn apply(&self, p: &SpherePoint<S>) -> SpherePoint<S> {
        let w0 = self.a.clone() * p.z0() + self.b.clone() * p.z1();
        let w1 = self.c.clone() * p.z0() + self.d.clone() * p.z1();
        SpherePoint::from_homogeneous(w0, w1).expect("nonsingular Mobius map")
    }
    pub fn inverse(&self) -> Self {
        Mobius {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        }
    }
    /// `self o other`.
    pub fn compose(&self, other: &Self) -> Self {
        Mobius {
            a: self.a.clone() * &other.a + self.b.clone() * &other.c,
            b: self.a.clone() * &other.b + self.b.clone() * &other.d,
            c: self.c.clone() * &other.a + self.d.clone() * &other.c,
            d: self.c.clone() * &other.b + self.d.clone() * &other.d,
        }
    }
    pub fn to_map(&self) -> RationalMap<S> {
        let ctx = self.ctx();
        RationalMap::from_parts_unchecked(
            Poly::new(vec![self.b.clone(), self.a.clone()], ctx),
            Poly::new(vec![self.d.clone(), self.c.clone()], ctx),
            1,
        )
    }
    /// Translation `z -> z + t`.
    pub fn translation(t: S) -> Self {
        let ctx = t.ctx();
        Mobius {
            a: S::one(ctx),
            b: t,
            c: S::zero(ctx),
            d: S::one(ctx),
        }
    }
    /// Standard local chart at `x`: `z - x` when `|x| <= 1`, `1/z - 1/x` otherwise.
    /// The chart sends `x` to 0.
    pub fn chart_at(x: &SpherePoint<S>) -> Self {
        let ctx = x.ctx();
        if x.in_unit_disk() {
            Mobius::translation(-x.z0().clone())
        } else {
            Mobius {
                a: -x.z1().clone(),
                b: S::one(ctx),
                c: S::one(ctx),
                d: S::zero(ctx),
            }
        }
    }
    /// Transformation sending `p1, p2, p3` to `0, 1, infinity`.
    pub fn to_zero_one_infinity(p1: &SpherePoint<S>, p2: &SpherePoint<S>, p3: &SpherePoint<S>) -> Result<Self> {
        // L_p(z) = z0 p_1 - z1 p_0 vanishes at p.
        let l = |p: &SpherePoint<S>, q: &SpherePoint<S>| q.z0().clone() * p.z1() - q.z1().clone() * p.z0();
        let s1 = l(p3, p2);
        let s3 = l(p1, p2);
        let m = Mobius {
            a: p1.z1().clone() * &s1,
            b: -(p1.z0().clone() * &s1),
            c: p3.z1().clone() * &s3,
            d: -(p3.z0().clone() * &s3),
        };
        if m.det().is_zero() {
            return Err(Error::DegeneratePoints("repeated points".into()));
        }
        Ok(m)
    }
    /// Derivative of the map at a finite point `z`.
    pub fn derivative_at(&self, z: &S) -> S {
        let den = self.c.clone() * z + &self.d;
        self.det() / (den.clone() * &den)
    }
    pub fn to_cx(&self, prec: u32) -> Mobius<Cx> {
        Mobius {
            a: self.a.to_cx(prec),
            b: self.b.to_cx(prec),
            c: self.c.to_cx(prec),
            d: self.d.to_cx(prec),
        }
    }
    pub fn as_gauss(&self) -> Option<Mobius<GaussRat>> {
        Some(Mobius {
            a: self.a.as_gauss()?,
            b: self.b.as_gauss()?,
            c: self.c.as_gauss()?,
            d: self.d.as_gauss()?,
        })
    }
}

impl Mobius<Cx> {
    /// Rescale so that the determinant equals one.
    pub fn normalized(&self) -> Self {
        let s = self.det().sqrt().recip();
        Mobius {
            a: &self.a * &s,
            b: &self.b * &s,
            c: &self.c * &s,
            d: &self.d * &s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_ratio_normalization() {
        let p = |k: i64| SpherePoint::finite(GaussRat::from_int(k));
        let inf = SpherePoint::<GaussRat>::infinity(());
        let m = Mobius::to_zero_one_infinity(&p(2), &p(5), &inf).unwrap();
        assert_eq!(m.apply(&p(2)), p(0));
        assert_eq!(m.apply(&p(5)), p(1));
        assert!(m.apply(&inf).is_infinity());
        let m = Mobius::to_zero_one_infinity(&inf, &p(1), &p(-1)).unwrap();
        assert_eq!(m.apply(&inf), p(0));
        assert_eq!(m.apply(&p(1)), p(1));
        assert!(m.apply(&p(-1)).is_infinity());
    }

    #[test]
    fn charts_send_point_to_origin() {
        for x in [SpherePoint::finite(GaussRat::from_ratio(1, 2)), SpherePoint::finite(GaussRat::from_int(4)), SpherePoint::infinity(())] {
            let m = Mobius::chart_at(&x);
            assert_eq!(m.apply(&x), SpherePoint::finite(GaussRat::zero()));
        }
    }
}
