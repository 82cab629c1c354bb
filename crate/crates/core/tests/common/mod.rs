//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use fatoulab::cli::parse_map;
use fatoulab::numkernel::{Cx, GaussRat, Poly};
use fatoulab::qd::RationalQD;
use fatoulab::ratmap::{DynMap, RationalMap};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const PREC: u32 = 256;

pub fn map(s: &str) -> DynMap {
    parse_map(s, PREC).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn g(a: i64, b: i64) -> GaussRat {
    GaussRat::from_ratio(a, b)
}

pub fn gi(re: (i64, i64), im: (i64, i64)) -> GaussRat {
    g(re.0, re.1) + g(im.0, im.1) * GaussRat::i()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small Gaussian rational with numerators in [-k, k] and denominators in [1, 4].
pub fn small_gauss(r: &mut ChaCha8Rng, k: i64) -> GaussRat {
    gi((r.gen_range(-k..=k), r.gen_range(1..=4)), (r.gen_range(-k..=k), r.gen_range(1..=4)))
}

pub fn gpoly(c: Vec<GaussRat>) -> Poly<GaussRat> {
    Poly::new(c, ())
}

/// Random exact map of degree `d` (numerator and denominator coprime, true degree `d`).
pub fn random_map(r: &mut ChaCha8Rng, d: usize) -> DynMap {
    loop {
        let num: Vec<GaussRat> = (0..=d).map(|_| small_gauss(r, 3)).collect();
        let dd = r.gen_range(0..=d);
        let den: Vec<GaussRat> = (0..=dd).map(|_| small_gauss(r, 3)).collect();
        let (num, den) = (gpoly(num), gpoly(den));
        if num.degree().unwrap_or(0).max(den.degree().unwrap_or(0)) != d || den.is_zero() {
            continue;
        }
        if let Ok(f) = RationalMap::new(num, den) {
            if f.degree() == d {
                return DynMap::from_exact(f, PREC);
            }
        }
    }
}

/// Random exact differential with the given pole count and numerator degree.
pub fn random_qd(r: &mut ChaCha8Rng, poles: usize, num_deg: usize) -> RationalQD<GaussRat> {
    let mut den = Poly::one(());
    for _ in 0..poles {
        den = den.mul(&Poly::linear_root(&small_gauss(r, 4)));
    }
    let num = gpoly((0..=num_deg).map(|_| small_gauss(r, 3)).collect());
    RationalQD::new(num, den).unwrap()
}

pub fn max_coeff_gap(a: &Poly<Cx>, b: &Poly<Cx>) -> f64 {
    let n = a.coeffs().len().max(b.coeffs().len());
    (0..n).map(|k| (a.coeff(k) - b.coeff(k)).abs_f64()).fold(0.0, f64::max)
}

/// Exact truncated power series over Q(i), coefficient `k` of `z^k`.
///
/// Deliberately independent of the crate's series module: composition is
/// plain Horner evaluation and inversion is fixed-point iteration.
pub mod series {
    use super::GaussRat;

    pub type S = Vec<GaussRat>;

    pub fn zero(t: usize) -> S {
        vec![GaussRat::zero(); t + 1]
    }

    pub fn z(t: usize) -> S {
        let mut s = zero(t);
        s[1] = GaussRat::one();
        s
    }

    pub fn mul(a: &S, b: &S) -> S {
        let t = a.len() - 1;
        let mut out = zero(t);
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(t + 1 - i) {
                out[i + j] = out[i + j].clone() + x.clone() * y.clone();
            }
        }
        out
    }

    pub fn add(a: &S, b: &S) -> S {
        a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
    }

    pub fn sub(a: &S, b: &S) -> S {
        a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
    }

    /// `outer(inner(z))`, with `inner(0) = 0`.
    pub fn compose(outer: &S, inner: &S) -> S {
        let t = outer.len() - 1;
        let mut acc = zero(t);
        for c in outer.iter().rev() {
            acc = mul(&acc, inner);
            acc[0] = acc[0].clone() + c.clone();
        }
        acc
    }

    /// Inverse of a germ `z + O(z^2)`, by `psi <- psi - (phi(psi) - z)`.
    pub fn inverse(phi: &S) -> S {
        let t = phi.len() - 1;
        let mut psi = z(t);
        for _ in 0..=t {
            let e = sub(&compose(phi, &psi), &z(t));
            psi = sub(&psi, &e);
        }
        psi
    }

    pub fn conjugate(g: &S, phi: &S) -> S {
        compose(&inverse(phi), &compose(g, phi))
    }

    pub fn iterate(g: &S, n: usize) -> S {
        let mut out = z(g.len() - 1);
        for _ in 0..n {
            out = compose(g, &out);
        }
        out
    }
}

/// Germ `rho (z + z^(N+1) + alpha z^(2N+1))` conjugated by `z + c2 z^2 + c3 z^3`,
/// truncated at order `t`.
pub fn planted_germ(rho: &GaussRat, big_n: usize, alpha: &GaussRat, c2: &GaussRat, c3: &GaussRat, t: usize) -> series::S {
    let mut h = series::zero(t);
    h[1] = rho.clone();
    h[big_n + 1] = rho.clone();
    h[2 * big_n + 1] = rho.clone() * alpha.clone();
    let mut phi = series::z(t);
    phi[2] = c2.clone();
    phi[3] = c3.clone();
    series::conjugate(&h, &phi)
}

/// Invariants of a germ by explicit reduction of its first return to the
/// form `z + a z^(N+1) + b z^(2N+1)`: returns `(N, iota = b / a^2, beta = n ((N+1)/2 - iota))`.
pub fn normal_form_beta(germ: &series::S, n: usize) -> (usize, GaussRat, GaussRat) {
    let t = germ.len() - 1;
    let mut h = series::iterate(germ, n);
    let big_n = (2..=t).find(|&k| !h[k].is_zero()).expect("not the identity") - 1;
    assert!(2 * big_n + 1 <= t, "order too low for reduction");
    // kill z^(N+k) for k = 2..N with z -> z + s z^k; the target coefficient is affine in s
    for k in 2..=big_n {
        let target = big_n + k;
        let c0 = h[target].clone();
        let mut phi = series::z(t);
        phi[k] = GaussRat::one();
        let c1 = series::conjugate(&h, &phi)[target].clone();
        let s = -(c0 / (c1 - h[target].clone()));
        let mut phi = series::z(t);
        phi[k] = s;
        h = series::conjugate(&h, &phi);
        assert!(h[target].is_zero());
    }
    let a = h[big_n + 1].clone();
    let b = h[2 * big_n + 1].clone();
    let iota = b / (a.clone() * a);
    let beta = GaussRat::from_int(n as i64) * (g(big_n as i64 + 1, 2) - iota.clone());
    (big_n, iota, beta)
}

pub mod corpus {
    use super::*;
    use fatoulab::cycles::{enumerate_cycles, CycleClass};
    use fatoulab::parabolic::{attach_parabolic_data, invariant_divergence_basis, BasisKind};
    use fatoulab::residues::complete_cycle_divergence;
    use fatoulab::Config;

    fn qd(num: Vec<GaussRat>, den: Vec<GaussRat>) -> RationalQD<Cx> {
        RationalQD::new(gpoly(num), gpoly(den)).unwrap().to_cx(PREC)
    }

    /// Completion of a divergence at the first cycle of period `period` and class `class`.
    fn completed(f: &DynMap, period: usize, class: CycleClass, canonical: bool) -> RationalQD<Cx> {
        let cfg = Config::default();
        let mut cycles = enumerate_cycles(f, period as u32, &cfg).unwrap();
        attach_parabolic_data(f, &mut cycles, &cfg).unwrap();
        let c = cycles
            .into_iter()
            .find(|c| c.period == period && c.class() == class)
            .expect("cycle of the requested kind");
        let coeffs = if canonical {
            let b = invariant_divergence_basis(f, &c, &cfg).unwrap();
            b.elements.into_iter().find(|e| e.kind == BasisKind::Canonical).unwrap().coeffs
        } else {
            vec![Cx::one(PREC)]
        };
        complete_cycle_divergence(f, &c, &coeffs, &[]).unwrap().q
    }

    /// Pairs `(f, q)` with `q` in `Q(f)`: multiple poles only at cycles, carrying invariant divergences.
    pub fn balance() -> Vec<(&'static str, DynMap, RationalQD<Cx>)> {
        let o = || g(0, 1);
        let l = || g(1, 1);
        vec![
            ("attracting 1/2, dz^2/(z^2 (z-1))", map("z^2 + 1/2*z"), qd(vec![l()], vec![o(), o(), g(-1, 1), l()])),
            ("attracting 1/3, dz^2/(z^2 (z-2))", map("z^2 + 1/3*z"), qd(vec![l()], vec![o(), o(), g(-2, 1), l()])),
            ("repelling 2 at 0, dz^2/(z^2 (z+1))", map("z^2 + 2*z"), qd(vec![l()], vec![o(), o(), l(), l()])),
            ("repelling fixed point 1 of z^2", map("z^2"), qd(vec![l()], vec![o(), l(), g(-2, 1), l()])),
            (
                "attracting and repelling together",
                map("z^2 + 1/2*z"),
                qd(vec![l(), l()], vec![o(), o(), g(1, 4), g(-1, 1), l()]),
            ),
            ("integrable, z^2 + i", map("z^2 + i"), qd(vec![l()], vec![o(), g(-1, 1), o(), l()])),
            ("parabolic canonical, z^2 + 1/4", map("z^2 + 1/4"), completed(&map("z^2 + 1/4"), 1, CycleClass::Parabolic, true)),
            ("repelling 2-cycle of z^2 + i", map("z^2 + i"), completed(&map("z^2 + i"), 2, CycleClass::Repelling, false)),
            ("repelling fixed point of z^2 - 1", map("z^2 - 1"), completed(&map("z^2 - 1"), 1, CycleClass::Repelling, false)),
            ("attracting fixed point of a cubic", map("z^3 + 1/4*z"), qd(vec![l()], vec![o(), o(), g(-3, 1), l()])),
        ]
    }
}
