use std::fmt;

use super::scalar::{Cx, GaussRat, Scalar};
use crate::error::{Error, Result};

/// Dense univariate polynomial with ascending coefficients.
///
/// Trailing zero coefficients are stripped, so the zero polynomial has no
/// coefficients and `degree()` returns `None`.
#[derive(Clone, PartialEq)]
pub struct Poly<S: Scalar> {
    coeffs: Vec<S>,
    ctx: S::Ctx,
}

impl<S: Scalar> fmt::Debug for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

impl<S: Scalar> Poly<S> {
    pub fn new(mut coeffs: Vec<S>, ctx: S::Ctx) -> Poly<S> {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs, ctx }
    }
    pub fn zero(ctx: S::Ctx) -> Poly<S> {
        Poly { coeffs: vec![], ctx }
    }
    pub fn one(ctx: S::Ctx) -> Poly<S> {
        Poly::constant(S::one(ctx))
    }
    pub fn constant(c: S) -> Poly<S> {
        let ctx = c.ctx();
        Poly::new(vec![c], ctx)
    }
    /// The identity polynomial `z`.
    pub fn x(ctx: S::Ctx) -> Poly<S> {
        Poly::new(vec![S::zero(ctx), S::one(ctx)], ctx)
    }
    /// `c * z^k`.
    pub fn monomial(c: S, k: usize) -> Poly<S> {
        let ctx = c.ctx();
        let mut v = vec![S::zero(ctx); k];
        v.push(c);
        Poly::new(v, ctx)
    }
    /// `z - a`.
    pub fn linear_root(a: &S) -> Poly<S> {
        Poly::new(vec![-a.clone(), S::one(a.ctx())], a.ctx())
    }
    pub fn ctx(&self) -> S::Ctx {
        self.ctx
    }
    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }
    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }
    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(|| S::zero(self.ctx))
    }
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }
    /// Degree with the zero polynomial mapped to 0.
    pub fn deg0(&self) -> usize {
        self.degree().unwrap_or(0)
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn lead(&self) -> Option<&S> {
        self.coeffs.last()
    }
    /// Number of vanishing low-order coefficients (multiplicity of the root 0).
    pub fn low_order(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }
    pub fn norm_max(&self) -> f64 {
        self.coeffs.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: &S) -> S {
        let mut acc = S::zero(self.ctx);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Homogeneous evaluation `sum c_k z0^k z1^(deg - k)` with formal degree `deg`.
    pub fn eval_hom(&self, z0: &S, z1: &S, deg: usize) -> S {
        assert!(self.coeffs.len() <= deg + 1, "formal degree below actual degree");
        let mut p1 = S::one(self.ctx);
        let mut terms: Vec<S> = Vec::with_capacity(deg + 1);
        for _ in 0..=deg {
            terms.push(p1.clone());
            p1 = p1 * z1;
        }
        let mut acc = S::zero(self.ctx);
        for k in (0..=deg).rev() {
            acc = acc * z0;
            if k < self.coeffs.len() && !self.coeffs[k].is_zero() {
                acc = acc + self.coeffs[k].clone() * &terms[deg - k];
            }
        }
        acc
    }

    pub fn derivative(&self) -> Poly<S> {
        if self.coeffs.len() <= 1 {
            return Poly::zero(self.ctx);
        }
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.clone() * S::from_i64(k as i64, self.ctx))
            .collect();
        Poly::new(v, self.ctx)
    }

    pub fn add(&self, other: &Poly<S>) -> Poly<S> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let v = (0..n)
            .map(|k| match (self.coeffs.get(k), other.coeffs.get(k)) {
                (Some(a), Some(b)) => a.clone() + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Poly::new(v, self.ctx)
    }
    pub fn sub(&self, other: &Poly<S>) -> Poly<S> {
        self.add(&other.neg())
    }
    pub fn neg(&self) -> Poly<S> {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect(), self.ctx)
    }
    pub fn scale(&self, s: &S) -> Poly<S> {
        Poly::new(self.coeffs.iter().map(|c| c.clone() * s).collect(), self.ctx)
    }
    pub fn mul(&self, other: &Poly<S>) -> Poly<S> {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.ctx);
        }
        let mut v = vec![S::zero(self.ctx); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                v[i + j] = v[i + j].clone() + a.clone() * b;
            }
        }
        Poly::new(v, self.ctx)
    }
    /// Multiply by `z^k`.
    pub fn shift(&self, k: usize) -> Poly<S> {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![S::zero(self.ctx); k];
        v.extend(self.coeffs.iter().cloned());
        Poly::new(v, self.ctx)
    }
    pub fn pow(&self, mut k: u32) -> Poly<S> {
        let mut base = self.clone();
        let mut acc = Poly::one(self.ctx);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Euclidean division `self = q * d + r` with `deg r < deg d`.
    pub fn divrem(&self, d: &Poly<S>) -> Result<(Poly<S>, Poly<S>)> {
        let dd = d.degree().ok_or(Error::ZeroPolynomial)?;
        let lead_inv = S::one(self.ctx) / d.lead().unwrap();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((Poly::zero(self.ctx), self.clone()));
        }
        let mut q = vec![S::zero(self.ctx); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].clone() * &lead_inv;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] = r[k + j].clone() - c.clone() * dc;
                }
            }
            r[k + dd] = S::zero(self.ctx);
            q[k] = c;
        }
        r.truncate(dd);
        Ok((Poly::new(q, self.ctx), Poly::new(r, self.ctx)))
    }

    pub fn monic(&self) -> Poly<S> {
        match self.lead() {
            Some(l) => {
                let inv = S::one(self.ctx) / l;
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }

    /// Monic greatest common divisor (meaningful for exact scalars).
    pub fn gcd(&self, other: &Poly<S>) -> Poly<S> {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b).expect("nonzero divisor");
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Horner composition `self(inner(z))`.
    pub fn compose(&self, inner: &Poly<S>) -> Poly<S> {
        let mut acc = Poly::zero(self.ctx);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// Homogeneous composition `sum c_k a^k b^(deg - k)` with formal degree `deg`.
    pub fn hom_compose(&self, a: &Poly<S>, b: &Poly<S>, deg: usize) -> Poly<S> {
        assert!(self.coeffs.len() <= deg + 1, "formal degree below actual degree");
        let mut bpow = Vec::with_capacity(deg + 1);
        bpow.push(Poly::one(self.ctx));
        for k in 1..=deg {
            let next = bpow[k - 1].mul(b);
            bpow.push(next);
        }
        let mut acc = Poly::zero(self.ctx);
        for k in (0..=deg).rev() {
            acc = acc.mul(a);
            if k < self.coeffs.len() && !self.coeffs[k].is_zero() {
                acc = acc.add(&bpow[deg - k].scale(&self.coeffs[k]));
            }
        }
        acc
    }

    /// `z^deg * p(1/z)`.
    pub fn reversed(&self, deg: usize) -> Poly<S> {
        assert!(self.coeffs.len() <= deg + 1, "formal degree below actual degree");
        let mut v = vec![S::zero(self.ctx); deg + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            v[deg - k] = c.clone();
        }
        Poly::new(v, self.ctx)
    }

    /// `p(x + z)`.
    pub fn taylor_shift(&self, x: &S) -> Poly<S> {
        self.compose(&Poly::new(vec![x.clone(), S::one(self.ctx)], self.ctx))
    }

    pub fn to_cx(&self, prec: u32) -> Poly<Cx> {
        Poly::new(self.coeffs.iter().map(|c| c.to_cx(prec)).collect(), prec)
    }

    pub fn as_gauss(&self) -> Option<Poly<GaussRat>> {
        let v: Option<Vec<GaussRat>> = self.coeffs.iter().map(|c| c.as_gauss()).collect();
        v.map(|v| Poly::new(v, ()))
    }

    /// Drop leading coefficients whose magnitude is at most `tol` times the largest one.
    pub fn trim_relative(&self, tol: f64) -> Poly<S> {
        if S::EXACT {
            return self.clone();
        }
        let norm = self.norm_max();
        let mut v = self.coeffs.clone();
        while v.last().map_or(false, |c| c.magnitude() <= tol * norm) {
            v.pop();
        }
        Poly::new(v, self.ctx)
    }

    /// Zero every coefficient below `tol` times the largest one.
    pub fn chop(&self, tol: f64) -> Poly<S> {
        if S::EXACT {
            return self.clone();
        }
        let norm = self.norm_max();
        Poly::new(
            self.coeffs
                .iter()
                .map(|c| if c.magnitude() <= tol * norm { S::zero(self.ctx) } else { c.clone() })
                .collect(),
            self.ctx,
        )
    }

    /// Yun square-free decomposition: returns `(factor, multiplicity)` with monic factors.
    pub fn squarefree_decomposition(&self) -> Vec<(Poly<S>, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.divrem(&a0).unwrap().0;
        let mut c = fp.divrem(&a0).unwrap().0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), i));
            }
            b = b.divrem(&a).unwrap().0;
            c = d.divrem(&a).unwrap().0;
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    pub fn squarefree_part(&self) -> Poly<S> {
        self.squarefree_decomposition()
            .into_iter()
            .fold(Poly::one(self.ctx), |acc, (p, _)| acc.mul(&p))
    }

    /// Resultant over a field by the Euclidean algorithm.
    pub fn resultant(&self, other: &Poly<S>) -> S {
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return S::zero(self.ctx);
        };
        if db == 0 {
            return other.coeffs[0].pow_u(da as u64);
        }
        if da == 0 {
            return self.coeffs[0].pow_u(db as u64);
        }
        let (_, r) = self.divrem(other).unwrap();
        let Some(dr) = r.degree() else {
            return S::zero(self.ctx);
        };
        let sign = if (da * db) % 2 == 1 { -S::one(self.ctx) } else { S::one(self.ctx) };
        sign * other.lead().unwrap().pow_u((da - dr) as u64) * other.resultant(&r)
    }
}

impl Poly<GaussRat> {
    /// Order of vanishing at an exact point.
    pub fn multiplicity_at(&self, x: &GaussRat) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let mut p = self.clone();
        let mut m = 0;
        while p.eval(x).is_zero() {
            m += 1;
            p = p.derivative();
        }
        m
    }
}

impl<S: Scalar> fmt::Display for Poly<S>
where
    S: fmt::Display,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono = match k {
                0 => String::new(),
                1 => "z".into(),
                _ => format!("z^{k}"),
            };
            if k == 0 {
                write!(f, "({c})")?;
            } else if c.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "({c})*{mono}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(v: &[i64]) -> Poly<GaussRat> {
        Poly::new(v.iter().map(|&k| GaussRat::from_int(k)).collect(), ())
    }

    #[test]
    fn division_and_gcd() {
        let a = gp(&[-1, 0, 1]); // z^2 - 1
        let b = gp(&[1, 1]); // z + 1
        let (q, r) = a.divrem(&b).unwrap();
        assert_eq!(q, gp(&[-1, 1]));
        assert!(r.is_zero());
        let c = gp(&[-1, 0, 0, 1]); // z^3 - 1
        assert_eq!(a.gcd(&c), gp(&[-1, 1]));
    }

    #[test]
    fn squarefree_and_resultant() {
        // (z-1)^2 (z+2)
        let p = gp(&[-1, 1]).pow(2).mul(&gp(&[2, 1]));
        let sff = p.squarefree_decomposition();
        assert_eq!(sff, vec![(gp(&[2, 1]), 1), (gp(&[-1, 1]), 2)]);
        // Res(z^2 - 1, z - 3) = 3^2 - 1 = 8
        assert_eq!(gp(&[-1, 0, 1]).resultant(&gp(&[-3, 1])), GaussRat::from_int(8));
        assert!(gp(&[-1, 0, 1]).resultant(&gp(&[1, 1])).is_zero());
    }

    #[test]
    fn homogeneous_composition() {
        // p = z^2 + 1 with formal degree 2 composed with a/b = z / (z+1)
        let p = gp(&[1, 0, 1]);
        let h = p.hom_compose(&gp(&[0, 1]), &gp(&[1, 1]), 2);
        // z^2 + (z+1)^2
        assert_eq!(h, gp(&[1, 2, 2]));
        assert_eq!(p.reversed(3), gp(&[0, 1, 0, 1]));
        assert_eq!(gp(&[0, 0, 1]).taylor_shift(&GaussRat::from_int(1)), gp(&[1, 2, 1]));
    }
}
