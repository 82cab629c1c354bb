use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use rug::float::Constant;
use rug::{Float, Integer, Rational};

/// Field element used by polynomials, series and maps.
///
/// Implemented by [`Cx`] (complex numbers at a fixed binary precision) and
/// [`GaussRat`] (exact Gaussian rationals).
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    type Ctx: Copy + fmt::Debug + PartialEq + Send + Sync;
    const EXACT: bool;

    fn ctx(&self) -> Self::Ctx;
    fn zero(ctx: Self::Ctx) -> Self;
    fn one(ctx: Self::Ctx) -> Self;
    fn from_i64(n: i64, ctx: Self::Ctx) -> Self;
    fn from_gauss(g: &GaussRat, ctx: Self::Ctx) -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn conj(&self) -> Self;
    /// |x| as a double; only used for pivoting and scale estimates.
    fn magnitude(&self) -> f64;
    /// Compare |self| with |other|.
    fn cmp_abs(&self, other: &Self) -> Ordering;
    fn to_cx(&self, prec: u32) -> Cx;
    fn as_gauss(&self) -> Option<GaussRat>;
    /// Precision in bits, `None` for exact scalars.
    fn precision(&self) -> Option<u32>;

    fn from_ratio(n: i64, d: i64, ctx: Self::Ctx) -> Self {
        Self::from_i64(n, ctx) / Self::from_i64(d, ctx)
    }

    /// Zero test: exact for exact scalars, `|x| <= tol * scale` otherwise.
    fn is_negligible(&self, tol: f64, scale: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.is_zero() || self.magnitude() <= tol * scale
        }
    }

    fn pow_u(&self, mut k: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.ctx());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * &base;
            }
        }
        acc
    }
}

macro_rules! forward_binops {
    ($T:ty, $($Tr:ident $m:ident $f:ident),*) => {$(
        impl $Tr<$T> for $T {
            type Output = $T;
            fn $m(self, rhs: $T) -> $T { $f(&self, &rhs) }
        }
        impl<'a> $Tr<&'a $T> for $T {
            type Output = $T;
            fn $m(self, rhs: &'a $T) -> $T { $f(&self, rhs) }
        }
        impl<'a> $Tr<$T> for &'a $T {
            type Output = $T;
            fn $m(self, rhs: $T) -> $T { $f(self, &rhs) }
        }
        impl<'a, 'b> $Tr<&'b $T> for &'a $T {
            type Output = $T;
            fn $m(self, rhs: &'b $T) -> $T { $f(self, rhs) }
        }
    )*};
}

// ---------------------------------------------------------------------------
// Cx

/// Complex number with real and imaginary parts carried as MPFR floats.
#[derive(Clone, PartialEq)]
pub struct Cx {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.to_c64();
        write!(f, "Cx({:e}{:+e}i)", c.re, c.im)
    }
}

impl fmt::Display for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string(None))
    }
}

impl Cx {
    pub fn new(re: Float, im: Float) -> Cx {
        let p = re.prec().max(im.prec());
        Cx {
            re: Float::with_val(p, re),
            im: Float::with_val(p, im),
        }
    }
    pub fn zero(prec: u32) -> Cx {
        Cx {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }
    pub fn one(prec: u32) -> Cx {
        Cx::from_f64(1.0, 0.0, prec)
    }
    pub fn i(prec: u32) -> Cx {
        Cx::from_f64(0.0, 1.0, prec)
    }
    pub fn from_f64(re: f64, im: f64, prec: u32) -> Cx {
        Cx {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }
    pub fn from_c64(z: Complex64, prec: u32) -> Cx {
        Cx::from_f64(z.re, z.im, prec)
    }
    pub fn from_real(x: Float) -> Cx {
        let p = x.prec();
        Cx {
            re: x,
            im: Float::new(p),
        }
    }
    pub fn from_gauss(g: &GaussRat, prec: u32) -> Cx {
        Cx {
            re: Float::with_val(prec, &g.re),
            im: Float::with_val(prec, &g.im),
        }
    }
    pub fn prec(&self) -> u32 {
        self.re.prec()
    }
    pub fn with_prec(&self, prec: u32) -> Cx {
        Cx {
            re: Float::with_val(prec, &self.re),
            im: Float::with_val(prec, &self.im),
        }
    }
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }
    pub fn abs(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.hypot_ref(&self.im))
    }
    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }
    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }
    pub fn conj(&self) -> Cx {
        Cx {
            re: self.re.clone(),
            im: Float::with_val(self.prec(), -&self.im),
        }
    }
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    pub fn scale_real(&self, s: &Float) -> Cx {
        let p = self.prec();
        Cx {
            re: Float::with_val(p, &self.re * s),
            im: Float::with_val(p, &self.im * s),
        }
    }
    pub fn mul_i(&self) -> Cx {
        Cx {
            re: Float::with_val(self.prec(), -&self.im),
            im: self.re.clone(),
        }
    }
    pub fn recip(&self) -> Cx {
        Cx::one(self.prec()) / self
    }
    pub fn powi(&self, k: i64) -> Cx {
        if k >= 0 {
            self.pow_u(k as u64)
        } else {
            self.pow_u(k.unsigned_abs()).recip()
        }
    }
    /// Principal square root.
    pub fn sqrt(&self) -> Cx {
        let p = self.prec();
        let r = self.abs();
        let half = |x: Float| -> Float { Float::with_val(p, x / 2u32).sqrt() };
        let a = half(Float::with_val(p, &r + &self.re));
        let mut b = half(Float::with_val(p, &r - &self.re));
        if self.im.is_sign_negative() {
            b = -b;
        }
        Cx { re: a, im: b }
    }
    pub fn ln(&self) -> Cx {
        Cx {
            re: self.abs().ln(),
            im: self.arg(),
        }
    }
    pub fn exp(&self) -> Cx {
        let p = self.prec();
        let m = Float::with_val(p, self.re.exp_ref());
        let (s, c) = Float::with_val(p, &self.im).sin_cos(Float::new(p));
        Cx {
            re: Float::with_val(p, &m * &c),
            im: Float::with_val(p, &m * &s),
        }
    }
    /// `exp(2 pi i k / n)`.
    pub fn root_of_unity(k: i64, n: u64, prec: u32) -> Cx {
        let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
        let t = two_pi * Float::with_val(prec, k) / Float::with_val(prec, n);
        let (s, c) = t.sin_cos(Float::new(prec));
        Cx { re: c, im: s }
    }
    /// Parse a decimal literal such as `0.1`, `-2.5e-3`.
    pub fn parse_real(s: &str, prec: u32) -> Option<Cx> {
        let f = Float::parse(s).ok()?;
        Some(Cx::from_real(Float::with_val(prec, f)))
    }
    /// Decimal string in the crate literal syntax, e.g. `0.5`, `-1.25 + 3*i`.
    pub fn to_decimal_string(&self, digits: Option<usize>) -> String {
        let digits = digits.unwrap_or_else(|| (self.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2);
        let re = float_to_decimal(&self.re, digits);
        if self.im.is_zero() {
            return re;
        }
        let im_abs = float_to_decimal(&Float::with_val(self.prec(), self.im.abs_ref()), digits);
        let sign = if self.im.is_sign_negative() { "-" } else { "+" };
        if self.re.is_zero() {
            if sign == "-" {
                format!("-{im_abs}*i")
            } else {
                format!("{im_abs}*i")
            }
        } else {
            format!("{re} {sign} {im_abs}*i")
        }
    }
}

/// Plain decimal rendering of an MPFR float (no exponent for moderate magnitudes).
pub fn float_to_decimal(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x.is_sign_negative() { "-inf".into() } else { "inf".into() };
    }
    let s = x.to_string_radix(10, Some(digits.max(1)));
    // rug renders as d.ddddde<exp>; rewrite to plain form when the exponent is small.
    let (mant, exp) = match s.find('e') {
        Some(k) => (&s[..k], s[k + 1..].parse::<i64>().unwrap_or(0)),
        None => (s.as_str(), 0),
    };
    let neg = mant.starts_with('-');
    let mant = mant.trim_start_matches('-');
    let (int_part, frac_part) = match mant.find('.') {
        Some(k) => (&mant[..k], &mant[k + 1..]),
        None => (mant, ""),
    };
    let digits_all: String = format!("{int_part}{frac_part}");
    let point = int_part.len() as i64 + exp;
    let body = if exp.abs() > 40 {
        let frac = frac_part.trim_end_matches('0');
        if frac.is_empty() {
            format!("{int_part}e{exp}")
        } else {
            format!("{int_part}.{frac}e{exp}")
        }
    } else if point <= 0 {
        let frac = format!("{}{}", "0".repeat((-point) as usize), digits_all);
        let frac = frac.trim_end_matches('0');
        format!("0.{frac}")
    } else if point as usize >= digits_all.len() {
        format!("{}{}", digits_all, "0".repeat(point as usize - digits_all.len()))
    } else {
        let (a, b) = digits_all.split_at(point as usize);
        let b = b.trim_end_matches('0');
        if b.is_empty() {
            a.to_string()
        } else {
            format!("{a}.{b}")
        }
    };
    let body = body.trim_start_matches('0');
    let body = if body.is_empty() || body.starts_with('.') { format!("0{body}") } else { body.to_string() };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn cx_add(a: &Cx, b: &Cx) -> Cx {
    let p = a.prec().max(b.prec());
    Cx {
        re: Float::with_val(p, &a.re + &b.re),
        im: Float::with_val(p, &a.im + &b.im),
    }
}
fn cx_sub(a: &Cx, b: &Cx) -> Cx {
    let p = a.prec().max(b.prec());
    Cx {
        re: Float::with_val(p, &a.re - &b.re),
        im: Float::with_val(p, &a.im - &b.im),
    }
}
fn cx_mul(a: &Cx, b: &Cx) -> Cx {
    let p = a.prec().max(b.prec());
    let ac = Float::with_val(p, &a.re * &b.re);
    let bd = Float::with_val(p, &a.im * &b.im);
    let ad = Float::with_val(p, &a.re * &b.im);
    let bc = Float::with_val(p, &a.im * &b.re);
    Cx {
        re: ac - bd,
        im: ad + bc,
    }
}
fn cx_div(a: &Cx, b: &Cx) -> Cx {
    let p = a.prec().max(b.prec());
    if b.im.is_zero() {
        return Cx {
            re: Float::with_val(p, &a.re / &b.re),
            im: Float::with_val(p, &a.im / &b.re),
        };
    }
    let d = b.norm_sqr();
    let ac = Float::with_val(p, &a.re * &b.re);
    let bd = Float::with_val(p, &a.im * &b.im);
    let bc = Float::with_val(p, &a.im * &b.re);
    let ad = Float::with_val(p, &a.re * &b.im);
    Cx {
        re: (ac + bd) / &d,
        im: (bc - ad) / &d,
    }
}

forward_binops!(Cx, Add add cx_add, Sub sub cx_sub, Mul mul cx_mul, Div div cx_div);

impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx {
            re: -self.re,
            im: -self.im,
        }
    }
}
impl<'a> Neg for &'a Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        -(self.clone())
    }
}

impl Scalar for Cx {
    type Ctx = u32;
    const EXACT: bool = false;

    fn ctx(&self) -> u32 {
        self.prec()
    }
    fn zero(ctx: u32) -> Cx {
        Cx::zero(ctx)
    }
    fn one(ctx: u32) -> Cx {
        Cx::one(ctx)
    }
    fn from_i64(n: i64, ctx: u32) -> Cx {
        Cx::from_real(Float::with_val(ctx, n))
    }
    fn from_gauss(g: &GaussRat, ctx: u32) -> Cx {
        Cx::from_gauss(g, ctx)
    }
    fn is_zero(&self) -> bool {
        Cx::is_zero(self)
    }
    fn is_one(&self) -> bool {
        self.re == 1 && self.im.is_zero()
    }
    fn conj(&self) -> Cx {
        Cx::conj(self)
    }
    fn magnitude(&self) -> f64 {
        self.abs_f64()
    }
    fn cmp_abs(&self, other: &Cx) -> Ordering {
        self.norm_sqr().partial_cmp(&other.norm_sqr()).unwrap_or(Ordering::Equal)
    }
    fn to_cx(&self, prec: u32) -> Cx {
        self.with_prec(prec)
    }
    fn as_gauss(&self) -> Option<GaussRat> {
        None
    }
    fn precision(&self) -> Option<u32> {
        Some(self.prec())
    }
}

// ---------------------------------------------------------------------------
// GaussRat

/// Exact element of Q(i).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: Rational,
    pub im: Rational,
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GaussRat {
    /// Literal syntax: `3/4`, `-1/2*i`, `1/2 - 3*i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0 {
            return write!(f, "{}", self.re);
        }
        let im_abs = Rational::from(self.im.abs_ref());
        let im_str = if im_abs == 1 { "i".to_string() } else { format!("{im_abs}*i") };
        if self.re == 0 {
            if self.im < 0 {
                write!(f, "-{im_str}")
            } else {
                write!(f, "{im_str}")
            }
        } else {
            let sign = if self.im < 0 { '-' } else { '+' };
            write!(f, "{} {} {}", self.re, sign, im_str)
        }
    }
}

impl GaussRat {
    pub fn new(re: Rational, im: Rational) -> GaussRat {
        GaussRat { re, im }
    }
    pub fn zero() -> GaussRat {
        GaussRat::new(Rational::new(), Rational::new())
    }
    pub fn one() -> GaussRat {
        GaussRat::from_int(1)
    }
    pub fn i() -> GaussRat {
        GaussRat::new(Rational::new(), Rational::from(1))
    }
    pub fn from_int(n: i64) -> GaussRat {
        GaussRat::new(Rational::from(n), Rational::new())
    }
    pub fn from_ints(re: i64, im: i64) -> GaussRat {
        GaussRat::new(Rational::from(re), Rational::from(im))
    }
    pub fn from_ratio(n: i64, d: i64) -> GaussRat {
        GaussRat::new(Rational::from((n, d)), Rational::new())
    }
    pub fn norm_sqr(&self) -> Rational {
        Rational::from(self.re.square_ref()) + Rational::from(self.im.square_ref())
    }
    pub fn conj(&self) -> GaussRat {
        GaussRat::new(self.re.clone(), Rational::from(-&self.im))
    }
    pub fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }
    pub fn is_real(&self) -> bool {
        self.im == 0
    }
    pub fn recip(&self) -> GaussRat {
        GaussRat::one() / self
    }
    /// Total bit size of numerators and denominators.
    pub fn bit_size(&self) -> u64 {
        let b = |r: &Rational| (r.numer().significant_bits() + r.denom().significant_bits()) as u64;
        b(&self.re) + b(&self.im)
    }
    /// Best rational approximation of `x` with denominators bounded by `max_den`,
    /// accepted only if it lies within `tol` of `x`.
    pub fn rationalize(x: &Cx, max_den: &Integer, tol: f64) -> Option<GaussRat> {
        let re = rationalize_real(&x.re, max_den)?;
        let im = rationalize_real(&x.im, max_den)?;
        let g = GaussRat::new(re, im);
        let err = (Cx::from_gauss(&g, x.prec()) - x).abs_f64();
        let scale = 1.0f64.max(x.abs_f64());
        (err <= tol * scale).then_some(g)
    }
}

/// Continued-fraction best approximation with bounded denominator.
fn rationalize_real(x: &Float, max_den: &Integer) -> Option<Rational> {
    let exact = x.to_rational()?;
    if exact.denom() <= max_den {
        return Some(exact);
    }
    let (mut p0, mut q0, mut p1, mut q1) = (Integer::from(0), Integer::from(1), Integer::from(1), Integer::from(0));
    let mut r = exact;
    for _ in 0..200 {
        let a = Integer::from(r.floor_ref());
        let p2 = Integer::from(&a * &p1) + &p0;
        let q2 = Integer::from(&a * &q1) + &q0;
        if &q2 > max_den {
            break;
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = r - Rational::from(&a);
        if frac == 0 {
            break;
        }
        r = frac.recip();
    }
    if q1 == 0 {
        return None;
    }
    Some(Rational::from((p1, q1)))
}

fn g_add(a: &GaussRat, b: &GaussRat) -> GaussRat {
    GaussRat::new(Rational::from(&a.re + &b.re), Rational::from(&a.im + &b.im))
}
fn g_sub(a: &GaussRat, b: &GaussRat) -> GaussRat {
    GaussRat::new(Rational::from(&a.re - &b.re), Rational::from(&a.im - &b.im))
}
fn g_mul(a: &GaussRat, b: &GaussRat) -> GaussRat {
    if a.im == 0 && b.im == 0 {
        return GaussRat::new(Rational::from(&a.re * &b.re), Rational::new());
    }
    let ac = Rational::from(&a.re * &b.re);
    let bd = Rational::from(&a.im * &b.im);
    let ad = Rational::from(&a.re * &b.im);
    let bc = Rational::from(&a.im * &b.re);
    GaussRat::new(ac - bd, ad + bc)
}
fn g_div(a: &GaussRat, b: &GaussRat) -> GaussRat {
    assert!(!b.is_zero(), "division of a Gaussian rational by zero");
    if b.im == 0 {
        return GaussRat::new(Rational::from(&a.re / &b.re), Rational::from(&a.im / &b.re));
    }
    let d = b.norm_sqr();
    let num = g_mul(a, &b.conj());
    GaussRat::new(num.re / &d, num.im / &d)
}

forward_binops!(GaussRat, Add add g_add, Sub sub g_sub, Mul mul g_mul, Div div g_div);

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re, -self.im)
    }
}
impl<'a> Neg for &'a GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        -(self.clone())
    }
}

impl Scalar for GaussRat {
    type Ctx = ();
    const EXACT: bool = true;

    fn ctx(&self) {}
    fn zero(_: ()) -> GaussRat {
        GaussRat::zero()
    }
    fn one(_: ()) -> GaussRat {
        GaussRat::one()
    }
    fn from_i64(n: i64, _: ()) -> GaussRat {
        GaussRat::from_int(n)
    }
    fn from_gauss(g: &GaussRat, _: ()) -> GaussRat {
        g.clone()
    }
    fn is_zero(&self) -> bool {
        GaussRat::is_zero(self)
    }
    fn is_one(&self) -> bool {
        self.re == 1 && self.im == 0
    }
    fn conj(&self) -> GaussRat {
        GaussRat::conj(self)
    }
    fn magnitude(&self) -> f64 {
        self.norm_sqr().to_f64().sqrt()
    }
    fn cmp_abs(&self, other: &GaussRat) -> Ordering {
        self.norm_sqr().cmp(&other.norm_sqr())
    }
    fn to_cx(&self, prec: u32) -> Cx {
        Cx::from_gauss(self, prec)
    }
    fn as_gauss(&self) -> Option<GaussRat> {
        Some(self.clone())
    }
    fn precision(&self) -> Option<u32> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_arithmetic() {
        let a = Cx::from_f64(1.0, 2.0, 128);
        let b = Cx::from_f64(3.0, -1.0, 128);
        let q = &a / &b;
        let back = q * &b;
        assert!((back - &a).abs_f64() < 1e-35);
        let s = Cx::from_f64(-4.0, 0.0, 128).sqrt();
        assert!((s - Cx::from_f64(0.0, 2.0, 128)).abs_f64() < 1e-35);
        let w = Cx::root_of_unity(1, 3, 128).powi(3);
        assert!((w - Cx::one(128)).abs_f64() < 1e-35);
    }

    #[test]
    fn gaussian_rationals() {
        let a = GaussRat::new(Rational::from((1, 2)), Rational::from(1));
        let b = GaussRat::from_ints(2, -3);
        assert_eq!((&a / &b) * &b, a);
        assert_eq!(a.to_string(), "1/2 + i");
        assert_eq!(GaussRat::from_ratio(-3, 4).to_string(), "-3/4");
        assert_eq!(GaussRat::new(Rational::new(), Rational::from((-2, 5))).to_string(), "-2/5*i");
    }

    #[test]
    fn decimal_rendering() {
        let x = Cx::from_f64(0.5, 0.0, 64);
        assert_eq!(x.to_decimal_string(None), "0.5");
        let y = Cx::from_f64(-1.25, 3.0, 64);
        assert_eq!(y.to_decimal_string(None), "-1.25 + 3*i");
        assert_eq!(Cx::from_f64(1234.0, 0.0, 64).to_decimal_string(None), "1234");
        assert_eq!(Cx::from_f64(0.0, -0.001953125, 64).to_decimal_string(None), "-0.001953125*i");
    }

    #[test]
    fn rationalize_recovers_small_fractions() {
        let x = Cx::from_gauss(&GaussRat::new(Rational::from((7, 13)), Rational::from((-2, 9))), 256);
        let g = GaussRat::rationalize(&x, &Integer::from(1u64 << 40), 1e-60).unwrap();
        assert_eq!(g, GaussRat::new(Rational::from((7, 13)), Rational::from((-2, 9))));
        let s = Cx::from_f64(2.0, 0.0, 256).sqrt();
        assert!(GaussRat::rationalize(&s, &Integer::from(1u64 << 40), 1e-60).is_none());
    }
}
