mod common;

use common::*;
use fatoulab::numkernel::{Cx, GaussRat, Poly, Scalar};
use fatoulab::qd::quad::{push_norm, qd_norm};
use fatoulab::qd::{basis_q, fiber, order_at, pull, push, pushforward, Qd, RationalQD};
use fatoulab::ratmap::{Pt, SpherePoint};
use fatoulab::Config;
use proptest::prelude::*;
use rand::Rng;

fn degree_times(q: &RationalQD<GaussRat>, d: usize) -> RationalQD<GaussRat> {
    q.scale(&GaussRat::from_int(d as i64))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, .. ProptestConfig::default() })]

    #[test]
    fn push_of_pull_exact(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(2..=3);
        let f = random_map(&mut r, d);
        let poles = r.gen_range(1..=4);
        let nd = r.gen_range(0..=2);
        let q = random_qd(&mut r, poles, nd);
        let cfg = Config::default();
        let back = push(&f, &pull(&f, &Qd::Exact(q.clone())), &cfg).unwrap();
        match back {
            Qd::Exact(b) => prop_assert_eq!(b, degree_times(&q, d)),
            Qd::Approx(_) => prop_assert!(false, "exact route expected"),
        }
    }

    #[test]
    fn push_of_pull_sampled(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(2..=3);
        let f = random_map(&mut r, d);
        let np = r.gen_range(1..=4);
        let q = random_qd(&mut r, np, 1).to_cx(PREC);
        let cfg = Config::default();
        let pulled = pull(&f, &Qd::Approx(q.clone())).to_cx(PREC);
        let back = pushforward(&f, &pulled, &cfg).unwrap();
        let want = q.scale(&Cx::from_i64(d as i64, PREC));
        // compare after clearing denominators
        let lhs = back.num.mul(&want.den);
        let rhs = want.num.mul(&back.den);
        let scale = lhs.norm_max().max(1.0);
        prop_assert!(max_coeff_gap(&lhs, &rhs) < 1e-20 * scale);
    }

    #[test]
    fn divisor_degree_is_minus_four(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (np, nd) = (r.gen_range(0..=6), r.gen_range(0..=5));
        let q = random_qd(&mut r, np, nd);
        prop_assume!(!q.is_zero());
        let div = q.to_cx(PREC).divisor(PREC, 1e-15).unwrap();
        prop_assert_eq!(div.iter().map(|e| e.order).sum::<i64>(), -4);
    }

    #[test]
    fn pushforward_order_bound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_map(&mut r, 2);
        let cfg = Config::default();
        let q = random_qd(&mut r, 3, 0);
        let pushed = push(&f, &Qd::Exact(q.clone()), &cfg).unwrap().to_cx(PREC);
        let qdiv = q.to_cx(PREC).divisor(PREC, cfg.eps_cluster()).unwrap();
        let pdiv = pushed.divisor(PREC, cfg.eps_cluster()).unwrap();
        let tol = 1e-12;
        let mut targets: Vec<SpherePoint<Cx>> = qdiv
            .iter()
            .map(|e| f.approx.evaluate(&e.point).unwrap())
            .collect();
        targets.push(SpherePoint::finite(Cx::from_f64(0.31, -0.77, PREC)));
        for y in targets {
            let fib = fiber(&f.approx, &y, &cfg).unwrap();
            let bound = fib
                .iter()
                .map(|(w, m)| {
                    let o = order_at(&qdiv, w, tol);
                    // ceil((o + 2) / m) - 2
                    (o + 2).div_euclid(*m as i64) + i64::from((o + 2).rem_euclid(*m as i64) != 0) - 2
                })
                .min()
                .unwrap();
            prop_assert!(order_at(&pdiv, &y, tol) >= bound);
        }
    }

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(2..=4);
        let f = random_map(&mut r, d);
        let text = fatoulab::cli::print_map(&f);
        let back = fatoulab::cli::parse_map(&text, PREC).unwrap();
        prop_assert_eq!(back.exact, f.exact);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, failure_persistence: None, .. ProptestConfig::default() })]

    #[test]
    fn pushforward_contracts_mass(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_map(&mut r, 2);
        let cfg = Config::default();
        // simple poles only, integrable at infinity
        let q = random_qd(&mut r, 4, 0).to_cx(PREC);
        let tol = 1e-3;
        let before = qd_norm(&q, tol, &cfg).unwrap().unwrap();
        let after = push_norm(&f, &q, tol, &cfg).unwrap();
        prop_assert!(after.value <= before.value * (1.0 + 2.0 * tol) + after.error + before.error);
    }
}

#[test]
fn basis_dimensions() {
    let cfg = Config::default();
    let mut r = rng(3);
    for n in 3..=8 {
        let mut pts = vec![Pt::from_exact(SpherePoint::infinity(()), PREC)];
        while pts.len() < n {
            let p = Pt::from_exact(SpherePoint::finite(small_gauss(&mut r, 6)), PREC);
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        let b = basis_q(&pts, PREC, &cfg).unwrap();
        assert_eq!(b.dim(), n - 3);
        assert!(b.gram_condition < 1e12, "{}", b.gram_condition);
        for e in &b.elements {
            let div = e.to_cx(PREC).divisor(PREC, 1e-15).unwrap();
            assert!(div.iter().all(|d| d.order >= -1));
        }
    }
}

#[test]
fn closed_form_pushforward() {
    let cfg = Config::default();
    let f = map("z^2");
    let den = gpoly(vec![g(4, 1), g(0, 1), g(-5, 1), g(0, 1), g(1, 1)]);
    let q = RationalQD::new(Poly::one(()), den).unwrap();
    let want = RationalQD::new(gpoly(vec![g(1, 2)]), gpoly(vec![g(0, 1), g(4, 1), g(-5, 1), g(1, 1)])).unwrap();
    match push(&f, &Qd::Exact(q.clone()), &cfg).unwrap() {
        Qd::Exact(p) => assert_eq!(p, want),
        _ => panic!("exact route expected"),
    }
    let approx = pushforward(&f, &q.to_cx(PREC), &cfg).unwrap();
    let w = want.to_cx(PREC);
    assert!(max_coeff_gap(&approx.num.mul(&w.den), &w.num.mul(&approx.den)) < 1e-10);
}

#[test]
fn zero_differential_round_trips() {
    let mut r = rng(362131048917749043);
    let f = random_map(&mut r, 2);
    let den = random_qd(&mut r, 3, 0).den;
    let q = RationalQD::new(Poly::zero(()), den).unwrap();
    assert_eq!(q, RationalQD::zero(()));
    let back = push(&f, &pull(&f, &Qd::Exact(q.clone())), &Config::default()).unwrap();
    match back {
        Qd::Exact(b) => assert_eq!(b, degree_times(&q, 2)),
        Qd::Approx(_) => panic!("exact route expected"),
    }
}
