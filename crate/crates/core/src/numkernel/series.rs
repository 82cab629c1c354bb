use super::poly::Poly;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Power series `c_0 + c_1 z + ... + c_T z^T + O(z^(T+1))` with tracked validity order `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<S: Scalar> {
    coeffs: Vec<S>,
    ctx: S::Ctx,
}

impl<S: Scalar> TruncatedSeries<S> {
    /// Series valid through `order`; missing coefficients are zero, extra ones dropped.
    pub fn new(mut coeffs: Vec<S>, order: usize, ctx: S::Ctx) -> Self {
        coeffs.resize(order + 1, S::zero(ctx));
        TruncatedSeries { coeffs, ctx }
    }
    pub fn from_poly(p: &Poly<S>, order: usize) -> Self {
        TruncatedSeries::new(p.coeffs().to_vec(), order, p.ctx())
    }
    /// The identity series `z`.
    pub fn identity(order: usize, ctx: S::Ctx) -> Self {
        TruncatedSeries::new(vec![S::zero(ctx), S::one(ctx)], order, ctx)
    }
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
    pub fn ctx(&self) -> S::Ctx {
        self.ctx
    }
    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }
    pub fn coeff(&self, k: usize) -> Result<&S> {
        self.coeffs.get(k).ok_or(Error::InsufficientOrder {
            have: self.order() as i64,
            need: k as i64,
        })
    }
    pub fn set_coeff(&mut self, k: usize, c: S) {
        self.coeffs[k] = c;
    }
    /// Index of the first nonzero coefficient, if any within the valid range.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order());
        TruncatedSeries::new(self.coeffs[..=order].to_vec(), order, self.ctx)
    }
    pub fn to_poly(&self) -> Poly<S> {
        Poly::new(self.coeffs.clone(), self.ctx)
    }

    pub fn add(&self, other: &Self) -> Self {
        let t = self.order().min(other.order());
        let v = (0..=t).map(|k| self.coeffs[k].clone() + &other.coeffs[k]).collect();
        TruncatedSeries::new(v, t, self.ctx)
    }
    pub fn sub(&self, other: &Self) -> Self {
        let t = self.order().min(other.order());
        let v = (0..=t).map(|k| self.coeffs[k].clone() - &other.coeffs[k]).collect();
        TruncatedSeries::new(v, t, self.ctx)
    }
    pub fn scale(&self, s: &S) -> Self {
        TruncatedSeries::new(self.coeffs.iter().map(|c| c.clone() * s).collect(), self.order(), self.ctx)
    }

    /// Product; valid through `min(T_a + v_b, T_b + v_a)`.
    pub fn mul(&self, other: &Self) -> Self {
        let va = self.valuation().unwrap_or(self.order() + 1);
        let vb = other.valuation().unwrap_or(other.order() + 1);
        let t = (self.order() + vb).min(other.order() + va);
        self.mul_to(other, t)
    }

    /// Product truncated at `t`, which the caller guarantees is valid.
    fn mul_to(&self, other: &Self, t: usize) -> Self {
        let mut v = vec![S::zero(self.ctx); t + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(t + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(t + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                v[i + j] = v[i + j].clone() + a.clone() * b;
            }
        }
        TruncatedSeries { coeffs: v, ctx: self.ctx }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = TruncatedSeries::new(vec![S::one(self.ctx)], self.order(), self.ctx);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Termwise derivative, valid through `T - 1`.
    pub fn derivative(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(Error::InsufficientOrder { have: 0, need: 1 });
        }
        let v = (1..=self.order())
            .map(|k| self.coeffs[k].clone() * S::from_i64(k as i64, self.ctx))
            .collect();
        Ok(TruncatedSeries::new(v, self.order() - 1, self.ctx))
    }

    /// Multiplicative inverse of a series with nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(Error::NotInvertible);
        }
        let inv0 = S::one(self.ctx) / a0;
        let t = self.order();
        let mut b: Vec<S> = Vec::with_capacity(t + 1);
        b.push(inv0.clone());
        for k in 1..=t {
            let mut s = S::zero(self.ctx);
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    s = s + self.coeffs[j].clone() * &b[k - j];
                }
            }
            b.push(-(s * &inv0));
        }
        Ok(TruncatedSeries::new(b, t, self.ctx))
    }

    /// `self(inner(z))`; requires `inner(0) = 0`.
    /// Valid through `min(T_inner, (T_outer + 1) v - 1)` with `v` the valuation of `inner`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let v = inner.valuation().unwrap_or(inner.order() + 1);
        let t = inner.order().min((self.order() + 1) * v - 1);
        let inner_t = inner.truncate(t);
        let mut acc = TruncatedSeries::new(vec![], t, self.ctx);
        for k in (0..=self.order()).rev() {
            acc = acc.mul_to(&inner_t, t);
            acc.coeffs[0] = acc.coeffs[0].clone() + &self.coeffs[k];
        }
        Ok(acc)
    }

    /// Compositional inverse of a series `c_1 z + ...` with `c_1 != 0`.
    pub fn reversion(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let t = self.order();
        let c1 = self.coeffs.get(1).cloned().unwrap_or_else(|| S::zero(self.ctx));
        if c1.is_zero() {
            return Err(Error::NotInvertible);
        }
        let inv1 = S::one(self.ctx) / &c1;
        let id = TruncatedSeries::identity(t, self.ctx);
        let mut r = id.scale(&inv1);
        // Each pass fixes one more coefficient.
        for _ in 1..t {
            let e = self.compose(&r)?.sub(&id);
            r = r.sub(&e.scale(&inv1));
        }
        Ok(r)
    }

    /// `n`-fold composition with itself.
    pub fn iterate(&self, n: usize) -> Result<Self> {
        let mut g = self.clone();
        for _ in 1..n {
            g = self.compose(&g)?;
        }
        Ok(g)
    }
}

/// Laurent series `sum_{k >= lead} c_k z^k`, determined through exponent `valid_through`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries<S: Scalar> {
    pub lead: i64,
    coeffs: Vec<S>,
    pub valid_through: i64,
    ctx: S::Ctx,
}

impl<S: Scalar> LaurentSeries<S> {
    pub fn coeff(&self, e: i64) -> Result<S> {
        if e > self.valid_through {
            return Err(Error::InsufficientOrder {
                have: self.valid_through,
                need: e,
            });
        }
        if e < self.lead {
            return Ok(S::zero(self.ctx));
        }
        Ok(self.coeffs.get((e - self.lead) as usize).cloned().unwrap_or_else(|| S::zero(self.ctx)))
    }
    pub fn residue(&self) -> Result<S> {
        self.coeff(-1)
    }
}

/// `1/s` for a series `s = c_m z^m + ...` with `c_m != 0`, valid through exponent `T - 2m`.
pub fn laurent_reciprocal<S: Scalar>(s: &TruncatedSeries<S>) -> Result<LaurentSeries<S>> {
    let m = s.valuation().ok_or(Error::InsufficientOrder {
        have: s.order() as i64,
        need: s.order() as i64 + 1,
    })?;
    let t = s.order();
    let unit = TruncatedSeries::new(s.coeffs()[m..].to_vec(), t - m, s.ctx());
    let inv = unit.reciprocal()?;
    let lead = -(m as i64);
    let valid_through = t as i64 - 2 * m as i64;
    if valid_through < -1 {
        return Err(Error::InsufficientOrder {
            have: t as i64,
            need: 2 * m as i64 - 1,
        });
    }
    Ok(LaurentSeries {
        lead,
        coeffs: inv.coeffs().to_vec(),
        valid_through,
        ctx: s.ctx(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::scalar::GaussRat;

    fn gs(v: &[i64], t: usize) -> TruncatedSeries<GaussRat> {
        TruncatedSeries::new(v.iter().map(|&k| GaussRat::from_int(k)).collect(), t, ())
    }

    #[test]
    fn composition_examples() {
        let a = gs(&[0, 1, 1], 3);
        assert_eq!(a.compose(&a).unwrap(), gs(&[0, 1, 2, 2], 3));
        let outer = gs(&[0, 1, 1], 4);
        let inner = gs(&[0, -1, 1], 4);
        // -z + z^2 + (-z + z^2)^2 = -z + 2z^2 - 2z^3 + z^4
        assert_eq!(outer.compose(&inner).unwrap(), gs(&[0, -1, 2, -2, 1], 4));
        let by_poly = outer.to_poly().compose(&inner.to_poly());
        assert_eq!(TruncatedSeries::from_poly(&by_poly, 4), gs(&[0, -1, 2, -2, 1], 4));
        assert_eq!(a.compose(&gs(&[1, 1], 3)), Err(Error::NonzeroConstantTerm));
    }

    #[test]
    fn composition_order_tracking() {
        // outer valid through 2, inner of valuation 2: valid through min(6, 3*2-1) = 5
        let outer = gs(&[0, 1, 1], 2);
        let inner = gs(&[0, 0, 1], 6);
        assert_eq!(outer.compose(&inner).unwrap().order(), 5);
    }

    #[test]
    fn reversion_inverts() {
        let a = gs(&[0, 2, 3, -1, 5], 6);
        let r = a.reversion().unwrap();
        assert_eq!(a.compose(&r).unwrap(), TruncatedSeries::identity(6, ()));
    }

    #[test]
    fn laurent_examples() {
        let r = laurent_reciprocal(&gs(&[0, 0, -1], 6)).unwrap();
        assert_eq!(r.lead, -2);
        assert_eq!(r.coeff(-2).unwrap(), GaussRat::from_int(-1));
        assert!(r.residue().unwrap().is_zero());
        let r = laurent_reciprocal(&gs(&[0, 0, 0, 2, -1], 8)).unwrap();
        assert_eq!(r.residue().unwrap(), GaussRat::from_ratio(1, 8));
        let r = laurent_reciprocal(&gs(&[0, 0, -1, -1], 6)).unwrap();
        assert_eq!(r.residue().unwrap(), GaussRat::from_int(1));
        // T = 4, m = 3: residue needs T >= 5
        assert!(matches!(
            laurent_reciprocal(&gs(&[0, 0, 0, 2, -1], 4)),
            Err(Error::InsufficientOrder { .. })
        ));
    }
}
