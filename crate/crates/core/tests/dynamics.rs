mod common;

use common::*;
use fatoulab::cycles::{enumerate_cycles, CycleClass};
use fatoulab::fscount::{check_fs, delta, dimension_check, Verdict};
use fatoulab::numkernel::{Cx, GaussRat};
use fatoulab::ratmap::{DynMap, Mobius};
use fatoulab::Config;
use proptest::prelude::*;
use rand::Rng;

fn sorted_multipliers(f: &DynMap, pmax: u32) -> Vec<(usize, Cx)> {
    let cfg = Config::default();
    let mut v: Vec<(usize, Cx)> = enumerate_cycles(f, pmax, &cfg)
        .unwrap()
        .into_iter()
        .map(|c| (c.period, c.multiplier))
        .collect();
    v.sort_by(|a, b| {
        let (x, y) = (a.1.to_c64(), b.1.to_c64());
        a.0.cmp(&b.0).then(x.re.total_cmp(&y.re)).then(x.im.total_cmp(&y.im))
    });
    v
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, .. ProptestConfig::default() })]

    #[test]
    fn multipliers_are_conjugacy_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_map(&mut r, 2);
        let m = loop {
            let (a, b, c, d) = (small_gauss(&mut r, 3), small_gauss(&mut r, 3), small_gauss(&mut r, 3), small_gauss(&mut r, 3));
            if let Ok(m) = Mobius::new(a, b, c, d) {
                break m;
            }
        };
        let h = DynMap::from_exact(f.exact.as_ref().unwrap().conjugate(&m), PREC);
        let (a, b) = (sorted_multipliers(&f, 2), sorted_multipliers(&h, 2));
        prop_assert_eq!(a.len(), b.len());
        for ((p, x), (q, y)) in a.iter().zip(&b) {
            prop_assert_eq!(p, q);
            prop_assert!((x.clone() - y.clone()).abs_f64() < 1e-30 * (1.0 + x.abs_f64()));
        }
    }

    #[test]
    fn cycle_counts_and_fs_bound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(2..=3);
        let f = random_map(&mut r, d);
        let cfg = Config::default();
        let cycles = enumerate_cycles(&f, 2, &cfg).unwrap();
        // D + 1 fixed points with multiplicity; a generic map has them all simple
        let fixed = cycles.iter().filter(|c| c.period == 1).count();
        prop_assert_eq!(fixed, d + 1);
        let rep = check_fs(&f, 2, 500, &cfg).unwrap();
        prop_assert_eq!(rep.verdict, Verdict::Pass);
        prop_assert!(rep.delta.delta <= 2 * d - 2);
        prop_assert!(rep.classical_ok);
    }
}

#[test]
fn named_examples() {
    let cfg = Config::default();
    let cases: [(&str, usize, usize, usize); 5] = [
        ("z^2", 0, 0, 2),
        ("z^2 - 1", 0, 0, 2),
        ("z^2 + i", 0, 0, 1),
        ("z^2 + 1/4", 1, 1, 2),
        ("z^2 + 0.1", 1, 1, 2),
    ];
    for (s, gamma, dl, classical) in cases {
        let f = map(s);
        let rep = check_fs(&f, 3, 1000, &cfg).unwrap();
        assert_eq!(rep.gamma_partial, gamma, "{s}");
        assert_eq!(rep.delta.delta, dl, "{s}");
        assert_eq!(rep.classical_count, classical, "{s}");
        assert_eq!(rep.verdict, Verdict::Pass);
    }
}

#[test]
fn superattracting_and_periodic_critical_orbits() {
    let cfg = Config::default();
    let f = map("z^2 - 1");
    let cycles = enumerate_cycles(&f, 2, &cfg).unwrap();
    let two = cycles.iter().find(|c| c.period == 2).unwrap();
    assert_eq!(two.class(), CycleClass::Superattracting);
    assert_eq!(two.multiplier_exact, Some(g(0, 1)));
    let d = delta(&f, 100, &cfg).unwrap();
    assert_eq!(d.delta, 0);
    assert!(!d.heuristic);
}

#[test]
fn multiplier_of_rotated_cycle() {
    // the chain-rule product does not depend on the starting point
    let cfg = Config::default();
    let f = map("z^2 - 3/4 + 1/5*i");
    for c in enumerate_cycles(&f, 3, &cfg).unwrap() {
        for k in 0..c.period {
            let rc = c.rotated(k);
            let (m, e) = fatoulab::cycles::multiplier(&f, &rc.points).unwrap();
            assert!((m - c.multiplier.clone()).abs_f64() < 1e-40);
            assert_eq!(e, c.multiplier_exact);
        }
    }
}

#[test]
fn flat_dimension_matches_gamma() {
    let cfg = Config::default();
    for s in ["z^2 + 1/4", "z^2 + 1/2*z", "-z + z^2", "z + z^3", "z^2 + i"] {
        let f = map(s);
        let dc = dimension_check(&f, 2, 2, &cfg).unwrap();
        assert_eq!(dc.flat_dimension, dc.gamma_partial, "{s}");
    }
}

#[test]
fn exact_multiplier_certifies_indifference() {
    let cfg = Config::default();
    // fixed point 0 with multiplier i: exactly indifferent, parabolic with n = 4
    let f = map("i*z + z^2");
    let c = enumerate_cycles(&f, 1, &cfg).unwrap();
    let zero = c.iter().find(|c| c.multiplier_exact == Some(GaussRat::i())).unwrap();
    assert_eq!(zero.class(), CycleClass::Parabolic);
    assert_eq!(zero.classification.root_order, Some(4));
}
