mod common;

use common::*;
use fatoulab::cycles::{cycle_through, CycleClass};
use fatoulab::numkernel::{Cx, GaussRat, TruncatedSeries};
use fatoulab::parabolic::{germ_invariants, invariant_divergence_basis, parabolic_invariants, BasisKind, ParabolicSubtype};
use fatoulab::ratmap::{Pt, SpherePoint};
use fatoulab::Config;
use rand::Rng;

fn germs() -> Vec<(GaussRat, usize, usize, GaussRat, series::S)> {
    let shapes: [(GaussRat, usize, usize); 8] = [
        (g(1, 1), 1, 1),
        (g(1, 1), 1, 2),
        (g(1, 1), 1, 3),
        (g(-1, 1), 2, 2),
        (g(-1, 1), 2, 4),
        (GaussRat::i(), 4, 4),
        (-GaussRat::i(), 4, 4),
        (g(-1, 1), 2, 2),
    ];
    let mut r = rng(11);
    let mut out = Vec::new();
    for round in 0..3 {
        for (rho, n, big_n) in shapes.iter().cloned() {
            let alpha = small_gauss(&mut r, 5);
            let c2 = small_gauss(&mut r, 2);
            let c3 = if round == 0 { g(0, 1) } else { small_gauss(&mut r, 2) };
            let germ = planted_germ(&rho, big_n, &alpha, &c2, &c3, 2 * big_n + 4);
            out.push((rho, n, big_n, alpha, germ));
        }
    }
    out
}

#[test]
fn index_route_matches_normal_form_reduction() {
    let cfg = Config::default();
    let all = germs();
    assert!(all.len() >= 20);
    for (rho, n, big_n, alpha, germ) in all {
        let planted = g(big_n as i64 + 1, 2) - alpha;
        let (nn, _, oracle) = normal_form_beta(&germ, n);
        assert_eq!(nn, big_n);
        assert_eq!(oracle, planted, "rho {rho} N {big_n}");

        let exact = TruncatedSeries::new(germ.clone(), germ.len() - 1, ());
        let inv = germ_invariants(&exact, n, &cfg).unwrap();
        assert_eq!(inv.beta, planted);
        assert_eq!(inv.big_n, big_n);
        assert_eq!(inv.nu, big_n / n);

        let cx: Vec<Cx> = germ.iter().map(|c| Cx::from_gauss(c, PREC)).collect();
        let approx = TruncatedSeries::new(cx, germ.len() - 1, PREC);
        let inv = germ_invariants(&approx, n, &cfg).unwrap();
        let gap = (inv.beta - Cx::from_gauss(&planted, PREC)).abs_f64();
        assert!(gap < 1e-25, "gap {gap:e}");
    }
}

fn parabolic_at(f: &str, x: GaussRat) -> fatoulab::cycles::Cycle {
    let cfg = Config::default();
    let f = map(f);
    let p = Pt::from_exact(SpherePoint::finite(x), PREC);
    let mut c = cycle_through(&f, &p, 4, &cfg).unwrap();
    assert_eq!(c.class(), CycleClass::Parabolic);
    c.parabolic = Some(parabolic_invariants(&f, &c, &cfg).unwrap());
    c
}

#[test]
fn named_parabolic_cycles() {
    let c = parabolic_at("z^2 + 1/4", g(1, 2));
    let p = c.parabolic.unwrap();
    assert_eq!((p.n, p.big_n, p.nu), (1, 1, 1));
    assert_eq!(p.beta_exact, Some(g(1, 1)));
    assert_eq!(p.iota_exact, Some(g(0, 1)));
    assert_eq!(p.subtype, ParabolicSubtype::Repelling);

    let c = parabolic_at("-z + z^2", g(0, 1));
    let p = c.parabolic.unwrap();
    assert_eq!((p.n, p.big_n, p.nu), (2, 2, 1));
    assert_eq!(p.iota_exact, Some(g(1, 8)));
    assert_eq!(p.beta_exact, Some(g(11, 4)));

    // z + z^3: two petal pairs at 0, N = 2
    let c = parabolic_at("z + z^3", g(0, 1));
    let p = c.parabolic.unwrap();
    assert_eq!((p.n, p.big_n, p.nu), (1, 2, 2));
    assert_eq!(p.beta_exact, Some(g(3, 2)));
}

#[test]
fn beta_of_an_iterate_divides_by_m() {
    // the invariant behaves like 1 / log(rho) under iteration
    let f = parabolic_at("z^2 + 1/4", g(1, 2)).parabolic.unwrap();
    let f2 = parabolic_at("(z^2 + 1/4)^2 + 1/4", g(1, 2)).parabolic.unwrap();
    let f3 = parabolic_at("((z^2 + 1/4)^2 + 1/4)^2 + 1/4", g(1, 2)).parabolic.unwrap();
    let b = f.beta_exact.unwrap();
    assert_eq!(f2.beta_exact.unwrap() * g(2, 1), b);
    assert_eq!(f3.beta_exact.unwrap() * g(3, 1), b);
}

#[test]
fn iterate_series_coefficient() {
    // g^m = z + m z^(N+1) + ((N+1)/2 m^2 - m beta) z^(2N+1) + ...
    let mut r = rng(5);
    for big_n in 1..=3usize {
        let alpha = small_gauss(&mut r, 4);
        let beta = g(big_n as i64 + 1, 2) - alpha.clone();
        let germ = planted_germ(&g(1, 1), big_n, &alpha, &g(0, 1), &g(0, 1), 2 * big_n + 2);
        let s = TruncatedSeries::new(germ, 2 * big_n + 2, ());
        for m in 1..=4i64 {
            let it = s.iterate(m as usize).unwrap();
            assert_eq!(it.coeff(big_n + 1).unwrap(), &g(m, 1));
            let want = g((big_n as i64 + 1) * m * m, 2) - g(m, 1) * beta.clone();
            assert_eq!(it.coeff(2 * big_n + 1).unwrap(), &want);
        }
        let _ = r.gen::<u8>();
    }
}

#[test]
fn canonical_divergence_scales_by_m_squared() {
    let cfg = Config::default();
    let coeffs = |s: &str| {
        let f = map(s);
        let c = parabolic_at(s, g(1, 2));
        let b = invariant_divergence_basis(&f, &c, &cfg).unwrap();
        b.elements.into_iter().find(|e| e.kind == BasisKind::Canonical).unwrap().exact.unwrap()
    };
    let one = coeffs("z^2 + 1/4");
    let two = coeffs("(z^2 + 1/4)^2 + 1/4");
    assert_eq!(one.len(), two.len());
    for (a, b) in one.iter().zip(&two) {
        assert_eq!(a.clone(), b.clone() * g(4, 1));
    }
}
