//! Nonrepelling cycle count, critical orbit tails and the Fatou-Shishikura check.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Config;
use crate::cycles::{enumerate_cycles, Cycle, CycleClass};
use crate::error::{Error, Result};
use crate::numkernel::GaussRat;
use crate::parabolic::{attach_parabolic_data, gamma_of_cycle, invariant_divergence_basis};
use crate::qd::nabla_matrix;
use crate::ratmap::{chordal_distance, DynMap, Pt, SpherePoint};

/// Exact iteration stops once a point needs more bits than this.
const EXACT_BIT_CAP: u64 = 4096;

/// What became of one critical orbit.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Disposition {
    /// The critical point is itself periodic.
    Periodic { period: usize },
    /// The orbit lands on a cycle after `preperiod` steps.
    Preperiodic { preperiod: usize, period: usize },
    /// Shares its tail with an earlier orbit.
    Merged { into: usize },
    /// No relation found up to the iteration cap.
    InfiniteTail {
        /// Set when the orbit was seen converging to a cycle of this period.
        converges_to_period: Option<usize>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalOrbit {
    pub critical_point: String,
    pub local_degree: usize,
    pub disposition: Disposition,
    /// The disposition rests on exact arithmetic throughout.
    pub exact: bool,
    pub steps: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaReport {
    pub delta: usize,
    pub iter_cap: usize,
    pub orbits: Vec<CriticalOrbit>,
    /// Some tail count relies on floating-point evidence or on the cap.
    pub heuristic: bool,
}

fn embed(p: &Pt) -> [f64; 3] {
    match p.to_c64() {
        None => [0.0, 0.0, 1.0],
        Some(z) => {
            let n = z.norm_sqr();
            if !n.is_finite() {
                return [0.0, 0.0, 1.0];
            }
            [2.0 * z.re / (n + 1.0), 2.0 * z.im / (n + 1.0), (n - 1.0) / (n + 1.0)]
        }
    }
}

/// Grid hash of points on the sphere, used to find near coincidences quickly.
struct Grid {
    h: f64,
    cells: HashMap<[i64; 3], Vec<usize>>,
}

impl Grid {
    fn new(h: f64) -> Self {
        Grid { h, cells: HashMap::new() }
    }
    fn key(&self, v: [f64; 3]) -> [i64; 3] {
        v.map(|x| (x / self.h).floor() as i64)
    }
    fn insert(&mut self, v: [f64; 3], idx: usize) {
        self.cells.entry(self.key(v)).or_default().push(idx);
    }
    fn near(&self, v: [f64; 3]) -> Vec<usize> {
        let k = self.key(v);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(c) = self.cells.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        out.extend(c);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn heavy(p: &SpherePoint<GaussRat>) -> bool {
    p.z0().bit_size() + p.z1().bit_size() > EXACT_BIT_CAP
}

fn same(a: &Pt, b: &Pt, eps: f64) -> bool {
    a.coincides(b, eps)
}

/// Two coincident orbit points `a[i] = b[j]` arise from an orbit relation (a landing)
/// rather than from both orbits approaching the same cycle.
fn landed(a: &[Pt], i: usize, b: &[Pt], j: usize, cfg: &Config) -> bool {
    if a[i].exact.is_some() && b[j].exact.is_some() {
        return true;
    }
    if i == 0 || j == 0 {
        return true;
    }
    let gap = chordal_distance(&a[i - 1].approx, &b[j - 1].approx);
    gap > cfg.eps_orbit().powf(1.0 / 8.0)
}

struct Trace {
    points: Vec<Pt>,
    /// `Some((j, k))`: `points[k]` coincides with `points[j]`, `j < k`.
    closes: Option<(usize, usize)>,
    exact: bool,
}

fn trace_orbit(f: &DynMap, c: &Pt, cap: usize, cfg: &Config) -> Result<Trace> {
    let eps = cfg.eps_orbit();
    let mut points = vec![c.clone()];
    let mut seen_exact: HashMap<String, usize> = HashMap::new();
    let mut grid = Grid::new(1e-6);
    let mut exact = c.exact.is_some();
    if let Some(e) = &c.exact {
        seen_exact.insert(format!("{e:?}"), 0);
    }
    grid.insert(embed(c), 0);
    for k in 1..=cap {
        let mut y = f.eval(&points[k - 1])?;
        if let Some(e) = &y.exact {
            if heavy(e) {
                y.exact = None;
            }
        }
        if y.exact.is_none() {
            exact = false;
        }
        if let Some(e) = &y.exact {
            if let Some(&j) = seen_exact.get(&format!("{e:?}")) {
                points.push(y);
                return Ok(Trace {
                    points,
                    closes: Some((j, k)),
                    exact,
                });
            }
            seen_exact.insert(format!("{e:?}"), k);
        } else {
            let v = embed(&y);
            if let Some(j) = grid.near(v).into_iter().find(|&j| same(&points[j], &y, eps)) {
                points.push(y);
                return Ok(Trace {
                    points,
                    closes: Some((j, k)),
                    exact,
                });
            }
        }
        grid.insert(embed(&y), k);
        points.push(y);
    }
    Ok(Trace {
        points,
        closes: None,
        exact,
    })
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut i = i;
    while parent[i] != r {
        let next = parent[i];
        parent[i] = r;
        i = next;
    }
    r
}

/// `delta(f)`: number of infinite tails of critical orbits, up to `iter_cap` steps.
pub fn delta(f: &DynMap, iter_cap: usize, cfg: &Config) -> Result<DeltaReport> {
    let d = f.degree();
    if d < 2 {
        return Err(Error::DegreeTooSmall(d));
    }
    let eps = cfg.eps_orbit();
    let crit = f.critical_points(cfg.eps_cluster(), cfg.eps_trim())?;
    let mut traces = Vec::new();
    for c in &crit {
        traces.push(trace_orbit(f, &c.point, iter_cap, cfg)?);
    }
    let mut disp: Vec<Disposition> = Vec::new();
    let mut heuristic = false;
    for t in &traces {
        let dsp = match t.closes {
            Some((j, k)) => {
                let p = k - j;
                if landed(&t.points, k, &t.points, j, cfg) || j == 0 {
                    if j == 0 {
                        Disposition::Periodic { period: p }
                    } else {
                        Disposition::Preperiodic { preperiod: j, period: p }
                    }
                } else {
                    Disposition::InfiniteTail {
                        converges_to_period: Some(p),
                    }
                }
            }
            None => Disposition::InfiniteTail {
                converges_to_period: None,
            },
        };
        if !t.exact || matches!(dsp, Disposition::InfiniteTail { .. }) {
            heuristic = true;
        }
        disp.push(dsp);
    }
    // Tails shared by several orbits.
    let n = traces.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let infinite: Vec<usize> = (0..n)
        .filter(|&i| matches!(disp[i], Disposition::InfiniteTail { .. }))
        .collect();
    for (a_pos, &a) in infinite.iter().enumerate() {
        let mut grid = Grid::new(1e-6);
        for (k, p) in traces[a].points.iter().enumerate() {
            grid.insert(embed(p), k);
        }
        for &b in &infinite[a_pos + 1..] {
            let pb = &traces[b].points;
            let pa = &traces[a].points;
            let hit = pb.iter().enumerate().find_map(|(j, y)| {
                grid.near(embed(y))
                    .into_iter()
                    .find(|&i| same(&pa[i], y, eps))
                    .map(|i| (i, j))
            });
            if let Some((i, j)) = hit {
                if landed(pa, i, pb, j, cfg) {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[rb.max(ra)] = ra.min(rb);
                    }
                }
            }
        }
    }
    for &b in &infinite {
        let r = find(&mut parent, b);
        if r != b {
            disp[b] = Disposition::Merged { into: r };
        }
    }
    let delta = infinite.iter().filter(|&&b| find(&mut parent, b) == b).count();
    assert!(delta <= 2 * d - 2, "delta exceeds 2D - 2");
    let orbits = crit
        .iter()
        .zip(traces.iter().zip(disp))
        .map(|(c, (t, dsp))| CriticalOrbit {
            critical_point: c.point.literal(),
            local_degree: c.local_degree,
            disposition: dsp,
            exact: t.exact,
            steps: t.points.len() - 1,
        })
        .collect();
    Ok(DeltaReport {
        delta,
        iter_cap,
        orbits,
        heuristic,
    })
}

/// Cycles of period at most `period_max` with parabolic data and their weights.
pub fn gamma(f: &DynMap, period_max: u32, cfg: &Config) -> Result<(usize, Vec<Cycle>)> {
    let mut cycles = enumerate_cycles(f, period_max, cfg)?;
    attach_parabolic_data(f, &mut cycles, cfg)?;
    let mut total = 0;
    for c in &cycles {
        total += gamma_of_cycle(c)?;
    }
    Ok((total, cycles))
}

#[derive(Clone, Debug, Serialize)]
pub struct CycleRow {
    pub points: Vec<String>,
    pub period: usize,
    pub class: String,
    pub multiplier: String,
    pub gamma: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parabolic: Option<ParabolicRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParabolicRow {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub nu: usize,
    pub iota: String,
    pub beta: String,
    pub subtype: String,
    pub within_tolerance: bool,
}

/// Decimal or exact rendering of a value that may have an exact companion.
pub fn value_literal(approx: &crate::numkernel::Cx, exact: Option<&GaussRat>) -> String {
    match exact {
        Some(e) => e.to_string(),
        None => approx.to_decimal_string(Some(30)),
    }
}

pub fn cycle_row(c: &Cycle) -> Result<CycleRow> {
    Ok(CycleRow {
        points: c.points.iter().map(|p| p.literal()).collect(),
        period: c.period,
        class: c.class().name().into(),
        multiplier: value_literal(&c.multiplier, c.multiplier_exact.as_ref()),
        gamma: gamma_of_cycle(c)?,
        parabolic: c.parabolic.as_ref().map(|p| ParabolicRow {
            n: p.n,
            big_n: p.big_n,
            nu: p.nu,
            iota: value_literal(&p.iota, p.iota_exact.as_ref()),
            beta: value_literal(&p.beta, p.beta_exact.as_ref()),
            subtype: p.subtype.name().into(),
            within_tolerance: p.within_tolerance,
        }),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct FsReport {
    pub period_max: u32,
    pub iter_cap: usize,
    pub cycles: Vec<CycleRow>,
    /// Sum of the cycle weights over the cycles found; a lower bound for gamma(f).
    pub gamma_partial: usize,
    pub gamma_is_lower_bound: bool,
    pub delta: DeltaReport,
    pub verdict: Verdict,
    /// Superattracting, attracting and indifferent cycles found.
    pub classical_count: usize,
    pub classical_bound: usize,
    pub classical_ok: bool,
}

pub fn check_fs(f: &DynMap, period_max: u32, iter_cap: usize, cfg: &Config) -> Result<FsReport> {
    let (gamma_partial, cycles) = gamma(f, period_max, cfg)?;
    let delta = delta(f, iter_cap, cfg)?;
    let classical_count = cycles.iter().filter(|c| c.class() != CycleClass::Repelling).count();
    let classical_bound = 2 * f.degree() - 2;
    let rows = cycles.iter().map(cycle_row).collect::<Result<Vec<_>>>()?;
    let verdict = if gamma_partial <= delta.delta {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(FsReport {
        period_max,
        iter_cap,
        cycles: rows,
        gamma_partial,
        gamma_is_lower_bound: true,
        delta,
        verdict,
        classical_count,
        classical_bound,
        classical_ok: classical_count <= classical_bound,
    })
}

/// Second route to the flat dimension and the injectivity used in the proof.
#[derive(Clone, Debug, Serialize)]
pub struct DimensionCheck {
    /// `sum gamma` from the classification table.
    pub gamma_partial: usize,
    /// Number of flat elements in the invariant divergence bases.
    pub flat_dimension: usize,
    pub marked_points: usize,
    pub nabla_rank: usize,
    pub nabla_columns: usize,
    pub nabla_injective: bool,
    pub sigma_ratio: f64,
}

/// Marked set: points of the nonrepelling cycles and initial segments (up to
/// `segment` points) of the critical orbits.
pub fn marked_set(f: &DynMap, cycles: &[Cycle], segment: usize, cfg: &Config) -> Result<Vec<Pt>> {
    let eps = cfg.eps_orbit();
    let mut a: Vec<Pt> = Vec::new();
    let mut add = |p: Pt| {
        if !a.iter().any(|x| x.coincides(&p, eps)) {
            a.push(p);
        }
    };
    for c in cycles.iter().filter(|c| c.class().is_nonrepelling()) {
        for p in &c.points {
            add(p.clone());
        }
    }
    for c in f.critical_points(cfg.eps_cluster(), cfg.eps_trim())? {
        let o = f.orbit(&c.point, segment, eps)?;
        for p in o.points {
            add(p);
        }
    }
    Ok(a)
}

pub fn dimension_check(f: &DynMap, period_max: u32, segment: usize, cfg: &Config) -> Result<DimensionCheck> {
    let (gamma_partial, cycles) = gamma(f, period_max, cfg)?;
    let mut flat_dimension = 0;
    for c in &cycles {
        flat_dimension += invariant_divergence_basis(f, c, cfg)?.flat_count();
    }
    let a = marked_set(f, &cycles, segment, cfg)?;
    let m = nabla_matrix(f, &a, cfg)?;
    let sigma_ratio = match (m.singular_values.first(), m.singular_values.last()) {
        (Some(hi), Some(lo)) if *hi > 0.0 => lo / hi,
        _ => 0.0,
    };
    Ok(DimensionCheck {
        gamma_partial,
        flat_dimension,
        marked_points: a.len(),
        nabla_rank: m.rank,
        nabla_columns: m.domain.dim(),
        nabla_injective: m.injective,
        sigma_ratio,
    })
}

/// Point of the sphere from a double-precision value (used by reports).
pub fn pt_from_c64(z: Option<Complex64>, prec: u32) -> Pt {
    match z {
        Some(z) => Pt::finite_cx(crate::numkernel::Cx::from_c64(z, prec)),
        None => Pt::from_exact(SpherePoint::infinity(()), prec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::Poly;
    use crate::ratmap::RationalMap;

    fn quad(re: (i64, i64), im: (i64, i64)) -> DynMap {
        let c = GaussRat::from_ratio(re.0, re.1) + GaussRat::from_ratio(im.0, im.1) * GaussRat::from_ints(0, 1);
        let p = Poly::new(vec![c, GaussRat::zero(), GaussRat::one()], ());
        DynMap::from_exact(RationalMap::new(p, Poly::one(())).unwrap(), 256)
    }

    #[test]
    fn delta_examples() {
        let cfg = Config::default();
        assert_eq!(delta(&quad((0, 1), (0, 1)), 1000, &cfg).unwrap().delta, 0);
        let r = delta(&quad((0, 1), (1, 1)), 1000, &cfg).unwrap();
        assert_eq!(r.delta, 0);
        assert!(r.orbits.iter().all(|o| o.exact));
        assert_eq!(delta(&quad((1, 4), (0, 1)), 1000, &cfg).unwrap().delta, 1);
        assert_eq!(delta(&quad((-1, 1), (0, 1)), 1000, &cfg).unwrap().delta, 0);
        // attracting fixed point: the critical orbit converges without landing
        assert_eq!(delta(&quad((1, 10), (0, 1)), 1000, &cfg).unwrap().delta, 1);
    }

    #[test]
    fn fs_examples() {
        let cfg = Config::default();
        let r = check_fs(&quad((1, 4), (0, 1)), 2, 1000, &cfg).unwrap();
        assert_eq!((r.gamma_partial, r.delta.delta, r.verdict), (1, 1, Verdict::Pass));
        let r = check_fs(&quad((-1, 1), (0, 1)), 2, 1000, &cfg).unwrap();
        assert_eq!((r.gamma_partial, r.delta.delta), (0, 0));
        assert_eq!(r.classical_count, 2);
        let r = check_fs(&quad((0, 1), (0, 1)), 3, 100, &cfg).unwrap();
        assert_eq!(r.gamma_partial, 0);
        let approx = DynMap::from_approx(quad((1, 10), (0, 1)).approx.clone());
        let (g, _) = gamma(&approx, 1, &cfg).unwrap();
        assert_eq!(g, 1);
    }
}
