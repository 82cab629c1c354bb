//! Double-precision evaluation of densities on the sphere and adaptive cubature.
//!
//! The sphere is covered by the closed unit disks of the charts `z` and `u = 1/z`.
//! Each disk is integrated in polar coordinates; cells are refined largest-error
//! first, with the error of a cell taken as the gap between the 6x6 and 4x4
//! tensor Gauss-Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::rqd::RationalQD;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::numkernel::roots::{aberth_f64, companion_roots};
use crate::numkernel::{Cx, Poly};
use crate::ratmap::{DynMap, RationalMap};

const GL6: [(f64, f64); 6] = [
    (-0.932_469_514_203_152_1, 0.171_324_492_379_170_3),
    (-0.661_209_386_466_264_5, 0.360_761_573_048_138_6),
    (-0.238_619_186_083_196_9, 0.467_913_934_572_691_0),
    (0.238_619_186_083_196_9, 0.467_913_934_572_691_0),
    (0.661_209_386_466_264_5, 0.360_761_573_048_138_6),
    (0.932_469_514_203_152_1, 0.171_324_492_379_170_3),
];
const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

fn c64s(p: &Poly<Cx>) -> Vec<C64> {
    p.coeffs().iter().map(|c| c.to_c64()).collect()
}

fn horner(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * z + a)
}

/// `sum c_k v^(n-k)`: the reversed polynomial at `v`.
fn horner_rev(c: &[C64], v: C64) -> C64 {
    c.iter().fold(C64::new(0.0, 0.0), |acc, a| acc * v + a)
}

/// Ratio of two polynomials in double precision, evaluated through the
/// reversed polynomials outside the unit disk.
#[derive(Clone, Debug)]
pub struct Rat64 {
    num: Vec<C64>,
    den: Vec<C64>,
}

impl Rat64 {
    pub fn new(num: &Poly<Cx>, den: &Poly<Cx>) -> Self {
        Rat64 {
            num: c64s(num),
            den: c64s(den),
        }
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }
    pub fn eval(&self, w: C64) -> C64 {
        if self.num.is_empty() {
            return C64::new(0.0, 0.0);
        }
        if w.norm_sqr() <= 1.0 {
            return horner(&self.num, w) / horner(&self.den, w);
        }
        let v = w.inv();
        let shift = self.num.len() as i32 - self.den.len() as i32;
        horner_rev(&self.num, v) / horner_rev(&self.den, v) * w.powi(shift)
    }
}

/// A point of the sphere seen from one of the two charts.
#[derive(Clone, Copy, Debug)]
pub enum ChartPt {
    Z(C64),
    U(C64),
}

impl ChartPt {
    /// `(z0 : z1)` with `z = z0 / z1`.
    fn homogeneous(self) -> (C64, C64) {
        match self {
            ChartPt::Z(z) => (z, C64::new(1.0, 0.0)),
            ChartPt::U(u) => (C64::new(1.0, 0.0), u),
        }
    }
    /// Factor turning a `dz^2` coefficient into the coefficient in this chart.
    fn chart_factor(self) -> C64 {
        match self {
            ChartPt::Z(_) => C64::new(1.0, 0.0),
            ChartPt::U(u) => (u * u * u * u).inv(),
        }
    }
    fn affine(self) -> C64 {
        match self {
            ChartPt::Z(z) => z,
            ChartPt::U(u) => u.inv(),
        }
    }
}

/// Rational map in double precision with its derivative `W / Q^2`.
#[derive(Clone, Debug)]
pub struct Map64 {
    p: Vec<C64>,
    q: Vec<C64>,
    fprime: Rat64,
}

impl Map64 {
    pub fn new(f: &RationalMap<Cx>) -> Self {
        let q = f.den();
        Map64 {
            p: c64s(f.num()),
            q: c64s(q),
            fprime: Rat64::new(&f.wronskian(), &q.mul(q)),
        }
    }

    /// Finite preimages of the point, with multiplicity, as roots of `z1 P - z0 Q`.
    pub fn fiber(&self, x: ChartPt) -> Vec<C64> {
        let (z0, z1) = x.homogeneous();
        let n = self.p.len().max(self.q.len());
        let zero = C64::new(0.0, 0.0);
        let mut c: Vec<C64> = (0..n)
            .map(|k| z1 * self.p.get(k).copied().unwrap_or(zero) - z0 * self.q.get(k).copied().unwrap_or(zero))
            .collect();
        let big = c.iter().map(|a| a.norm()).fold(0.0, f64::max);
        while c.len() > 1 && c.last().unwrap().norm() <= 1e-14 * big {
            c.pop();
        }
        aberth_f64(&c, 300).or_else(|| companion_roots(&c)).unwrap_or_default()
    }

    /// Branch contributions `q(w) / f'(w)^2` to `f_* q` at the point, in its chart.
    pub fn terms(&self, q: &Rat64, x: ChartPt) -> Vec<C64> {
        let s = x.chart_factor();
        self.fiber(x)
            .into_iter()
            .map(|w| {
                let d = self.fprime.eval(w);
                q.eval(w) / (d * d) * s
            })
            .collect()
    }
}

/// `sum |t_i| - |sum t_i|`, computed without cancellation.
///
/// `(sum |t|)^2 - |sum t|^2 = 2 sum_{i<j} (|c_ij| - Re c_ij)` with `c_ij = t_i conj(t_j)`,
/// and `|c| - Re c = Im(c)^2 / (|c| + Re c)` when `Re c > 0`.
pub fn triangle_defect(t: &[C64]) -> f64 {
    let abs_sum: f64 = t.iter().map(|x| x.norm()).sum();
    let sum_abs = t.iter().sum::<C64>().norm();
    let denom = abs_sum + sum_abs;
    if denom == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            let c = t[i] * t[j].conj();
            let a = c.norm();
            acc += if c.re > 0.0 { c.im * c.im / (a + c.re) } else { a - c.re };
        }
    }
    (2.0 * acc / denom).max(0.0)
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    chart_u: bool,
    r: (f64, f64),
    t: (f64, f64),
    value: f64,
    error: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rule<F: Fn(ChartPt) -> f64>(g: &F, chart_u: bool, r: (f64, f64), t: (f64, f64), nodes: &[(f64, f64)]) -> f64 {
    let (hr, mr) = ((r.1 - r.0) / 2.0, (r.1 + r.0) / 2.0);
    let (ht, mt) = ((t.1 - t.0) / 2.0, (t.1 + t.0) / 2.0);
    let mut s = 0.0;
    for &(xr, wr) in nodes {
        let rad = mr + hr * xr;
        for &(xt, wt) in nodes {
            let z = C64::from_polar(rad, mt + ht * xt);
            let p = if chart_u { ChartPt::U(z) } else { ChartPt::Z(z) };
            let v = g(p);
            if v.is_finite() {
                s += wr * wt * rad * v;
            }
        }
    }
    s * hr * ht
}

fn make_cell<F: Fn(ChartPt) -> f64>(g: &F, chart_u: bool, r: (f64, f64), t: (f64, f64)) -> Cell {
    let hi = rule(g, chart_u, r, t, &GL6);
    let lo = rule(g, chart_u, r, t, &GL4);
    Cell {
        chart_u,
        r,
        t,
        value: hi,
        error: (hi - lo).abs(),
    }
}

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub cells: usize,
}

/// Integral over the sphere of a density given in the chart of each point
/// (so `g(U(u))` already carries the `|dz/du|^2` factor).
pub fn integrate_sphere<F: Fn(ChartPt) -> f64>(g: F, tol: f64, max_cells: usize) -> Result<Integral> {
    let mut heap = BinaryHeap::new();
    let (nr, nt) = (6, 24);
    for chart_u in [false, true] {
        for i in 0..nr {
            for j in 0..nt {
                let r = (i as f64 / nr as f64, (i + 1) as f64 / nr as f64);
                let t = (2.0 * PI * j as f64 / nt as f64, 2.0 * PI * (j + 1) as f64 / nt as f64);
                heap.push(make_cell(&g, chart_u, r, t));
            }
        }
    }
    let mut cells = heap.len();
    loop {
        let err: f64 = heap.iter().map(|c| c.error).sum();
        if err <= tol {
            let value = heap.iter().map(|c| c.value).sum();
            return Ok(Integral { value, error: err, cells });
        }
        if cells + 1 > max_cells {
            return Err(Error::QuadratureBudgetExceeded { estimate: err });
        }
        // split the worst few cells before re-summing
        let batch = (heap.len() / 16).max(1);
        for _ in 0..batch {
            let c = match heap.pop() {
                Some(c) => c,
                None => break,
            };
            // bisect along the longer physical side; cells at the origin only shrink radially
            let rm = (c.r.0 + c.r.1) / 2.0;
            let tm = (c.t.0 + c.t.1) / 2.0;
            if c.r.1 - c.r.0 >= c.r.1 * (c.t.1 - c.t.0) {
                heap.push(make_cell(&g, c.chart_u, (c.r.0, rm), c.t));
                heap.push(make_cell(&g, c.chart_u, (rm, c.r.1), c.t));
            } else {
                heap.push(make_cell(&g, c.chart_u, c.r, (c.t.0, tm)));
                heap.push(make_cell(&g, c.chart_u, c.r, (tm, c.t.1)));
            }
            cells += 1;
            if cells + 1 > max_cells {
                break;
            }
        }
    }
}

/// Total mass `||q||`, or `None` when `q` has a pole of order at least 2.
pub fn qd_norm(q: &RationalQD<Cx>, tol: f64, cfg: &Config) -> Result<Option<Integral>> {
    if q.is_zero() {
        return Ok(Some(Integral { value: 0.0, error: 0.0, cells: 0 }));
    }
    let div = q.divisor(q.ctx(), cfg.eps_cluster())?;
    if div.iter().any(|e| e.order <= -2) {
        return Ok(None);
    }
    let r = Rat64::new(&q.num, &q.den);
    integrate_sphere(|x| (r.eval(x.affine()) * x.chart_factor()).norm(), tol, cfg.quad_max_cells).map(Some)
}

/// `||f_* q||` computed from fiber sums (no reconstruction).
pub fn push_norm(f: &DynMap, q: &RationalQD<Cx>, tol: f64, cfg: &Config) -> Result<Integral> {
    let m = Map64::new(&f.approx);
    let r = Rat64::new(&q.num, &q.den);
    integrate_sphere(|x| m.terms(&r, x).iter().sum::<C64>().norm(), tol, cfg.quad_max_cells)
}

/// `Dec(f:q) = int (f_*|q| - |f_* q|)`, clamped at 0 when within `tol`.
pub fn mass_decrease(f: &DynMap, q: &RationalQD<Cx>, tol: f64, cfg: &Config) -> Result<Integral> {
    let m = Map64::new(&f.approx);
    let r = Rat64::new(&q.num, &q.den);
    let mut out = integrate_sphere(|x| triangle_defect(&m.terms(&r, x)), tol, cfg.quad_max_cells)?;
    if out.value.abs() <= tol {
        out.value = out.value.max(0.0);
    }
    Ok(out)
}

/// Cancellation ratio above which the double-precision value of `q - f_* q` is redone.
const CANCEL: f64 = 1e6;
const FINE_PREC: u32 = 192;
/// Chordal radius around multiple poles handled in extended precision.
const HOT: f64 = 0.05;

/// `q - f_* q` at one point in extended precision, starting from double-precision fiber roots.
///
/// Near a multiple pole carrying an invariant divergence both terms blow up
/// while their difference stays small, which double precision cannot resolve.
struct FineNabla {
    p: Poly<Cx>,
    q: Poly<Cx>,
    dp: Poly<Cx>,
    dq: Poly<Cx>,
    w: Poly<Cx>,
    qn: Poly<Cx>,
    qd: Poly<Cx>,
}

impl FineNabla {
    fn new(f: &RationalMap<Cx>, q: &RationalQD<Cx>) -> Self {
        let up = |p: &Poly<Cx>| Poly::new(p.coeffs().iter().map(|c| c.with_prec(FINE_PREC)).collect(), FINE_PREC);
        let (p, qq) = (up(f.num()), up(f.den()));
        FineNabla {
            dp: p.derivative(),
            dq: qq.derivative(),
            w: up(&f.wronskian()),
            qn: up(&q.num),
            qd: up(&q.den),
            p,
            q: qq,
        }
    }

    fn value(&self, m: &Map64, x: ChartPt) -> C64 {
        let c = |z: C64| Cx::from_c64(z, FINE_PREC);
        let (z0, z1) = x.homogeneous();
        let (z0, z1) = (c(z0), c(z1));
        let mut acc = Cx::from_f64(0.0, 0.0, FINE_PREC);
        for w in m.fiber(x) {
            let mut w = c(w);
            for _ in 0..6 {
                let h = z1.clone() * self.p.eval(&w) - z0.clone() * self.q.eval(&w);
                let dh = z1.clone() * self.dp.eval(&w) - z0.clone() * self.dq.eval(&w);
                if dh.is_zero() {
                    break;
                }
                w = w - h / dh;
            }
            let qw = self.q.eval(&w);
            let fp = self.w.eval(&w) / (qw.clone() * qw);
            acc = acc + self.qn.eval(&w) / self.qd.eval(&w) / (fp.clone() * fp);
        }
        let s = c(x.chart_factor());
        let a = c(x.affine());
        let own = self.qn.eval(&a) / self.qd.eval(&a);
        ((own - acc) * s).to_c64()
    }
}

/// `||nabla_f q|| = int |q - f_* q|`.
pub fn nabla_norm(f: &DynMap, q: &RationalQD<Cx>, tol: f64, cfg: &Config) -> Result<Integral> {
    let m = Map64::new(&f.approx);
    let r = Rat64::new(&q.num, &q.den);
    let fine = FineNabla::new(&f.approx, q);
    // multiple poles and their images, where double precision breaks down
    let mut hot: Vec<(C64, C64)> = Vec::new();
    for e in q.divisor(q.ctx(), cfg.eps_cluster())?.iter().filter(|e| e.order <= -2) {
        for p in [e.point.clone(), f.approx.evaluate(&e.point)?] {
            hot.push((p.z0().to_c64(), p.z1().to_c64()));
        }
    }
    let near_hot = |x: ChartPt| {
        let (a0, a1) = x.homogeneous();
        hot.iter().any(|&(b0, b1)| {
            let cross = (a0 * b1 - a1 * b0).norm();
            cross <= HOT * (a0.norm_sqr() + a1.norm_sqr()).sqrt() * (b0.norm_sqr() + b1.norm_sqr()).sqrt()
        })
    };
    integrate_sphere(
        |x| {
            if near_hot(x) {
                return fine.value(&m, x).norm();
            }
            let own = r.eval(x.affine()) * x.chart_factor();
            let terms = m.terms(&r, x);
            let diff = own - terms.iter().sum::<C64>();
            let big = terms.iter().map(|t| t.norm()).fold(own.norm(), f64::max);
            if !(big <= CANCEL * diff.norm()) {
                fine.value(&m, x).norm()
            } else {
                diff.norm()
            }
        },
        tol,
        cfg.quad_max_cells,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::GaussRat;

    fn gp(v: &[i64]) -> Poly<Cx> {
        Poly::new(v.iter().map(|&k| Cx::from_gauss(&GaussRat::from_int(k), 128)).collect(), 128)
    }

    #[test]
    fn triangle_defect_is_stable() {
        let t = [C64::new(1.0, 1e-9), C64::new(2.0, 0.0)];
        let d = triangle_defect(&t);
        assert!(d >= 0.0 && d < 1e-17);
        let t = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
        assert!((triangle_defect(&t) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn area_of_unit_disk() {
        let v = integrate_sphere(
            |x| match x {
                ChartPt::Z(_) => 1.0,
                ChartPt::U(_) => 0.0,
            },
            1e-10,
            10_000,
        )
        .unwrap();
        assert!((v.value - PI).abs() < 1e-9);
    }

    #[test]
    fn norm_flags_double_poles() {
        let cfg = Config::with_precision(128);
        let q = RationalQD::new(gp(&[1]), gp(&[0, 0, 1])).unwrap();
        assert!(qd_norm(&q, 1e-3, &cfg).unwrap().is_none());
        let q = RationalQD::new(gp(&[1]), gp(&[0, -1, 0, 1])).unwrap();
        let n = qd_norm(&q, 1e-3, &cfg).unwrap().unwrap();
        assert!(n.value > 0.0 && n.value.is_finite());
    }

    #[test]
    fn spherical_mass_of_simple_example() {
        // dz^2/(z(z-1)(z+1)) pushed by z -> 1/z is itself up to sign, so both charts carry equal mass.
        let cfg = Config::with_precision(128);
        let q = RationalQD::new(gp(&[1]), gp(&[0, -1, 0, 1])).unwrap();
        let a = qd_norm(&q, 1e-4, &cfg).unwrap().unwrap();
        let r = Rat64::new(&q.num, &q.den);
        let z_only = integrate_sphere(
            |x| match x {
                ChartPt::Z(z) => r.eval(z).norm(),
                ChartPt::U(_) => 0.0,
            },
            1e-5,
            60_000,
        )
        .unwrap();
        assert!((a.value - 2.0 * z_only.value).abs() < 1e-3);
    }

    fn dyn_map(n: &[i64], d: &[i64]) -> DynMap {
        let g = |v: &[i64]| Poly::new(v.iter().map(|&k| GaussRat::from_int(k)).collect(), ());
        DynMap::from_exact(RationalMap::new(g(n), g(d)).unwrap(), 128)
    }

    #[test]
    fn decrease_for_cancelling_and_lattes_cases() {
        let cfg = Config::with_precision(128);
        let sq = dyn_map(&[0, 0, 1], &[1]);
        let odd = RationalQD::new(gp(&[1]), gp(&[0, -1, 0, 1])).unwrap();
        let dec = mass_decrease(&sq, &odd, 1e-3, &cfg).unwrap();
        let mass = qd_norm(&odd, 1e-3, &cfg).unwrap().unwrap();
        assert!(dec.value > 0.1);
        assert!((dec.value - mass.value).abs() < 3e-3);

        let lattes = dyn_map(&[1, 0, 2, 0, 1], &[0, -4, 0, 4]);
        let dec = mass_decrease(&lattes, &odd, 1e-3, &cfg).unwrap();
        assert!(dec.value.abs() < 1e-3);
        let nab = nabla_norm(&lattes, &odd, 1e-3, &cfg).unwrap();
        assert!(nab.value < 2e-3);
    }
}
