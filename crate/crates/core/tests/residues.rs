mod common;

use common::*;
use fatoulab::cycles::{cycle_through, Cycle, CycleClass};
use fatoulab::numkernel::Cx;
use fatoulab::parabolic::{invariant_divergence_basis, parabolic_invariants, BasisKind};
use fatoulab::qd::quad::{mass_decrease, nabla_norm};
use fatoulab::qd::{lattes_test, LattesVerdict};
use fatoulab::ratmap::{DynMap, Pt, SpherePoint};
use fatoulab::residues::{balance_check, complete_cycle_divergence, residue_closed, residue_flux, residues_of};
use fatoulab::Config;

fn cycle_at(f: &DynMap, x: fatoulab::numkernel::GaussRat) -> Cycle {
    let cfg = Config::default();
    let mut c = cycle_through(f, &Pt::from_exact(SpherePoint::finite(x), PREC), 4, &cfg).unwrap();
    if c.class() == CycleClass::Parabolic {
        c.parabolic = Some(parabolic_invariants(f, &c, &cfg).unwrap());
    }
    c
}

fn flux_of(f: &DynMap, c: &Cycle, coeffs: &[Cx]) -> f64 {
    let cfg = Config::default();
    let q = complete_cycle_divergence(f, c, coeffs, &[]).unwrap().q;
    residue_flux(f, c, &q, 0.05, 6, &cfg).unwrap().limit
}

#[test]
fn attracting_flux_and_iteration_law() {
    let one = [Cx::one(PREC)];
    let mut values = Vec::new();
    for s in ["z^2 + 1/2*z", "(z^2 + 1/2*z)^2 + 1/2*(z^2 + 1/2*z)"] {
        let f = map(s);
        let c = cycle_at(&f, g(0, 1));
        values.push(flux_of(&f, &c, &one));
    }
    assert!((values[0] + 2f64.ln()).abs() < 1e-2, "{values:?}");
    assert!((values[1] - 2.0 * values[0]).abs() < 2e-2, "{values:?}");
}

#[test]
fn parabolic_flux_matches_beta() {
    let cfg = Config::default();
    let f = map("z^2 + 1/4");
    let c = cycle_at(&f, g(1, 2));
    let b = invariant_divergence_basis(&f, &c, &cfg).unwrap();
    let qf = b.elements.iter().find(|e| e.kind == BasisKind::Canonical).unwrap();
    let closed = residue_closed(&c, &b, &qf.coeffs, &cfg).unwrap();
    assert!((closed.value - 1.0).abs() < 1e-30);
    let flux = flux_of(&f, &c, &qf.coeffs);
    assert!((flux - 1.0).abs() < 1e-2, "{flux}");
}

#[test]
fn closed_forms_of_the_corpus() {
    let cfg = Config::default();
    let want = [-(2f64.ln()), -(3f64.ln()) / 2.0, 2f64.ln(), 2f64.ln()];
    for ((name, f, q), w) in corpus::balance().into_iter().zip(want) {
        let r = residues_of(&f, &q, 4, &cfg).unwrap();
        let total: f64 = r.iter().map(|c| c.residue).sum();
        assert!((total - w).abs() < 1e-20, "{name}: {total}");
    }
}

#[test]
fn balance_holds_on_corpus() {
    let cfg = Config::default();
    let tol = 1e-3;
    for (name, f, q) in corpus::balance() {
        let r = balance_check(&f, &q, 4, tol, &cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(r.slack >= -2.0 * tol, "{name}: {r:?}");
        assert!(r.dec >= -tol, "{name}: {r:?}");
    }
}

#[test]
fn lattes_witness_balances_to_zero() {
    let cfg = Config::default();
    let f = map("(z^2+1)^2/(4*z*(z^2-1))");
    let LattesVerdict::Lattes { q, deviation, .. } = lattes_test(&f, &cfg).unwrap() else {
        panic!("expected a Lattes map");
    };
    assert_eq!(deviation, 0.0);
    assert!(matches!(q, fatoulab::qd::Qd::Exact(_)));
    let q = q.to_cx(PREC);
    let tol = 1e-3;
    assert!(nabla_norm(&f, &q, tol, &cfg).unwrap().value < tol);
    assert!(mass_decrease(&f, &q, tol, &cfg).unwrap().value < tol);
    assert!(residues_of(&f, &q, 4, &cfg).unwrap().is_empty());
}
