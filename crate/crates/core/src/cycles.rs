//! Periodic points, cycles, multipliers and their classification.

use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::numkernel::{find_roots, Cx, FoundRoot, GaussRat, Poly, Scalar};
use crate::parabolic::ParabolicData;
use crate::ratmap::{cmp_lex, DynMap, Pt, RationalMap, SpherePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CycleClass {
    Superattracting,
    Attracting,
    Repelling,
    Parabolic,
    IrrationallyIndifferent,
}

impl CycleClass {
    pub fn name(&self) -> &'static str {
        match self {
            CycleClass::Superattracting => "superattracting",
            CycleClass::Attracting => "attracting",
            CycleClass::Repelling => "repelling",
            CycleClass::Parabolic => "parabolic",
            CycleClass::IrrationallyIndifferent => "irrationally-indifferent",
        }
    }
    pub fn is_nonrepelling(&self) -> bool {
        !matches!(self, CycleClass::Repelling)
    }
}

/// Result of classifying a multiplier.
#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub class: CycleClass,
    /// Order `n` of the multiplier as a root of unity (parabolic cycles only).
    pub root_order: Option<usize>,
    /// Set when the decision is not certified by exact arithmetic.
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Cycle {
    /// Cycle points in orbit order, starting from the lexicographically smallest.
    pub points: Vec<Pt>,
    pub period: usize,
    pub multiplier: Cx,
    pub multiplier_exact: Option<GaussRat>,
    pub classification: Classification,
    pub parabolic: Option<ParabolicData>,
}

impl Cycle {
    pub fn class(&self) -> CycleClass {
        self.classification.class
    }
    /// The same cycle listed from `points[k]` on.
    pub fn rotated(&self, k: usize) -> Cycle {
        let mut c = self.clone();
        c.points.rotate_left(k % self.period.max(1));
        c
    }
}

#[derive(Clone, Debug)]
pub struct PeriodicPoint {
    pub point: Pt,
    /// Multiplicity as a root of `f^k(z) = z`.
    pub multiplicity: usize,
}

fn fixed_point_equation<S: Scalar>(f: &RationalMap<S>, kappa: u32, cap: u64) -> Result<Poly<S>> {
    let g = f.iterate(kappa, cap)?;
    Ok(g.num().sub(&g.den().mul(&Poly::x(f.ctx()))))
}

/// All roots of `f^k(z) = z` together with their multiplicities, including infinity.
/// The multiplicities sum to `D^k + 1`.
pub fn fixed_points_of_iterate(f: &DynMap, kappa: u32, cfg: &Config) -> Result<Vec<PeriodicPoint>> {
    let prec = f.prec();
    let total = (f.degree() as u64).pow(kappa) as usize + 1;
    let (found, deg): (Vec<FoundRoot>, usize) = match &f.exact {
        Some(fe) => {
            let e = fixed_point_equation(fe, kappa, cfg.degree_cap)?;
            (find_roots(&e, prec, cfg.eps_cluster())?, e.deg0())
        }
        None => {
            let e = fixed_point_equation(&f.approx, kappa, cfg.degree_cap)?.trim_relative(cfg.eps_trim());
            (find_roots(&e, prec, cfg.eps_cluster())?, e.deg0())
        }
    };
    let mut out: Vec<PeriodicPoint> = found
        .into_iter()
        .map(|r| PeriodicPoint {
            point: match r.exact {
                Some(g) => Pt::from_exact(SpherePoint::finite(g), prec),
                None => Pt::finite_cx(r.value),
            },
            multiplicity: r.multiplicity,
        })
        .collect();
    if total > deg {
        out.push(PeriodicPoint {
            point: Pt::from_exact(SpherePoint::infinity(()), prec),
            multiplicity: total - deg,
        });
    }
    Ok(out)
}

/// Smallest `d >= 1` with `f^d(x) = x` among the divisors of `kappa`.
pub fn exact_period(f: &DynMap, x: &Pt, kappa: usize, cfg: &Config) -> Result<usize> {
    let mut y = x.clone();
    for d in 1..=kappa {
        y = f.eval(&y)?;
        if kappa % d == 0 && y.coincides(x, cfg.eps_orbit()) {
            return Ok(d);
        }
    }
    Err(Error::NotPeriodic)
}

/// Points of exact period `kappa`.
pub fn periodic_points(f: &DynMap, kappa: u32, cfg: &Config) -> Result<Vec<PeriodicPoint>> {
    let mut out = Vec::new();
    for p in fixed_points_of_iterate(f, kappa, cfg)? {
        if exact_period(f, &p.point, kappa as usize, cfg)? == kappa as usize {
            out.push(p);
        }
    }
    Ok(out)
}

/// Partition period-`kappa` points into orbits.
pub fn group_cycles(f: &DynMap, points: &[PeriodicPoint], kappa: usize, cfg: &Config) -> Result<Vec<Vec<Pt>>> {
    let mut used = vec![false; points.len()];
    let mut cycles = Vec::new();
    // Matching tolerance is looser than eps_orbit: orbit images accumulate rounding.
    let eps = cfg.eps_orbit().sqrt();
    for i in 0..points.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut orbit = vec![points[i].point.clone()];
        let mut y = points[i].point.clone();
        for _ in 1..kappa {
            y = f.eval(&y)?;
            let hit = (0..points.len()).filter(|&j| !used[j]).find(|&j| points[j].point.coincides(&y, eps));
            match hit {
                Some(j) => {
                    used[j] = true;
                    orbit.push(points[j].point.clone());
                }
                None => orbit.push(y.clone()),
            }
        }
        let start = (0..orbit.len())
            .min_by(|&a, &b| cmp_lex(&orbit[a].approx, &orbit[b].approx))
            .unwrap_or(0);
        orbit.rotate_left(start);
        cycles.push(orbit);
    }
    Ok(cycles)
}

/// Chain-rule product of chart derivatives around the cycle.
pub fn multiplier(f: &DynMap, points: &[Pt]) -> Result<(Cx, Option<GaussRat>)> {
    let prec = f.prec();
    let mut rho = Cx::one(prec);
    let mut exact = Some(GaussRat::one());
    for p in points {
        let (d, de) = f.derivative_at(p)?;
        rho = rho * d;
        exact = match (exact, de) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        };
    }
    if let Some(e) = &exact {
        rho = Cx::from_gauss(e, prec);
    }
    Ok((rho, exact))
}

/// Classify a multiplier by the configured thresholds, exactly when `exact` is given.
pub fn classify(rho: &Cx, exact: Option<&GaussRat>, cfg: &Config) -> Classification {
    if let Some(e) = exact {
        let m = e.norm_sqr();
        let class = if e.is_zero() {
            CycleClass::Superattracting
        } else if m < 1 {
            CycleClass::Attracting
        } else if m > 1 {
            CycleClass::Repelling
        } else {
            let mut p = GaussRat::one();
            let mut order = None;
            for k in 1..=cfg.k_root as usize {
                p = p * e;
                if p == GaussRat::one() {
                    order = Some(k);
                    break;
                }
            }
            return match order {
                Some(n) => Classification {
                    class: CycleClass::Parabolic,
                    root_order: Some(n),
                    note: None,
                },
                None => Classification {
                    class: CycleClass::IrrationallyIndifferent,
                    root_order: None,
                    note: None,
                },
            };
        };
        return Classification {
            class,
            root_order: None,
            note: None,
        };
    }
    let r = rho.abs_f64();
    if r < cfg.eps_super() {
        return Classification {
            class: CycleClass::Superattracting,
            root_order: None,
            note: Some("multiplier below the superattracting threshold".into()),
        };
    }
    if (r - 1.0).abs() > cfg.eps_ind() {
        return Classification {
            class: if r < 1.0 { CycleClass::Attracting } else { CycleClass::Repelling },
            root_order: None,
            note: None,
        };
    }
    let prec = rho.prec();
    let one = Cx::one(prec);
    let mut p = one.clone();
    for k in 1..=cfg.k_root as usize {
        p = p * rho;
        if (&p - &one).abs_f64() < cfg.eps_unity() {
            return Classification {
                class: CycleClass::Parabolic,
                root_order: Some(k),
                note: Some("root of unity detected within tolerance".into()),
            };
        }
    }
    Classification {
        class: CycleClass::IrrationallyIndifferent,
        root_order: None,
        note: Some("inconclusive at finite precision: indifferent, no root of unity of small order".into()),
    }
}

/// All cycles of period `1..=period_max`, ordered by period and then by first point.
pub fn enumerate_cycles(f: &DynMap, period_max: u32, cfg: &Config) -> Result<Vec<Cycle>> {
    let mut out = Vec::new();
    for kappa in 1..=period_max {
        let pts = periodic_points(f, kappa, cfg)?;
        let mut orbits = group_cycles(f, &pts, kappa as usize, cfg)?;
        orbits.sort_by(|a, b| cmp_lex(&a[0].approx, &b[0].approx));
        for points in orbits {
            out.push(make_cycle(f, points, cfg)?);
        }
    }
    Ok(out)
}

pub fn make_cycle(f: &DynMap, points: Vec<Pt>, cfg: &Config) -> Result<Cycle> {
    let (rho, rho_exact) = multiplier(f, &points)?;
    let classification = classify(&rho, rho_exact.as_ref(), cfg);
    Ok(Cycle {
        period: points.len(),
        points,
        multiplier: rho,
        multiplier_exact: rho_exact,
        classification,
        parabolic: None,
    })
}

/// Exact orbit of an exact map through a numerically located cycle, if the
/// first point is a small-height element of Q(i) that is exactly periodic.
fn recover_exact(f: &DynMap, orbit: &[Pt]) -> Option<Vec<Pt>> {
    let fe = f.exact.as_ref()?;
    if orbit.iter().all(|p| p.exact.is_some()) {
        return None;
    }
    let start = orbit[0].approx.rationalize(1e-15)?;
    let mut out = vec![Pt::from_exact(start.clone(), f.prec())];
    let mut y = fe.evaluate(&start).ok()?;
    while y != start {
        if out.len() == orbit.len() {
            return None;
        }
        out.push(Pt::from_exact(y.clone(), f.prec()));
        y = fe.evaluate(&y).ok()?;
    }
    (out.len() == orbit.len()).then_some(out)
}

/// The cycle through `x`, if `x` is periodic with period at most `max_period`.
pub fn cycle_through(f: &DynMap, x: &Pt, max_period: usize, cfg: &Config) -> Result<Cycle> {
    let mut y = x.clone();
    let mut orbit = vec![x.clone()];
    for _ in 0..max_period {
        y = f.eval(&y)?;
        if y.coincides(x, cfg.eps_orbit()) {
            let start = (0..orbit.len())
                .min_by(|&a, &b| cmp_lex(&orbit[a].approx, &orbit[b].approx))
                .unwrap_or(0);
            orbit.rotate_left(start);
            if let Some(exact) = recover_exact(f, &orbit) {
                orbit = exact;
            }
            return make_cycle(f, orbit, cfg);
        }
        orbit.push(y.clone());
    }
    Err(Error::NotPeriodic)
}
