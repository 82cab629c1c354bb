use serde::{Deserialize, Serialize};

pub const DEFAULT_PRECISION: u32 = 256;
pub const MIN_PRECISION: u32 = 64;
pub const MAX_PRECISION: u32 = 1000;

/// Working precision, tolerances and limits shared by every computation.
///
/// Tolerances left as `None` are derived from the precision `p`:
/// `eps_super = 2^(-p/2)`, `eps_ind = 2^(-p/4)`, `eps_unity = eps_orbit = 2^(-p/3)`,
/// `eps_cluster = eps_beta = eps_series = 2^(-p/4)`, `eps_push = eps_solve = 2^(-p/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub precision: u32,
    pub degree_cap: u64,
    pub k_root: u32,
    pub series_order_cap: usize,
    pub eps_rank: f64,
    pub quad_tol: f64,
    pub quad_max_cells: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_super: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_ind: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_unity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_orbit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_beta: Option<f64>,
}

impl Default for Config {
    fn default() -> Self {
        Config::with_precision(DEFAULT_PRECISION)
    }
}

fn pow2(e: f64) -> f64 {
    (2.0f64).powf(e)
}

impl Config {
    pub fn with_precision(precision: u32) -> Self {
        Config {
            precision: precision.clamp(MIN_PRECISION, MAX_PRECISION),
            degree_cap: 4096,
            k_root: 64,
            series_order_cap: 512,
            eps_rank: 1e-10,
            quad_tol: 1e-3,
            quad_max_cells: 60_000,
            eps_super: None,
            eps_ind: None,
            eps_unity: None,
            eps_orbit: None,
            eps_beta: None,
        }
    }

    fn p(&self) -> f64 {
        self.precision as f64
    }

    pub fn eps_super(&self) -> f64 {
        self.eps_super.unwrap_or_else(|| pow2(-self.p() / 2.0))
    }
    pub fn eps_ind(&self) -> f64 {
        self.eps_ind.unwrap_or_else(|| pow2(-self.p() / 4.0))
    }
    pub fn eps_unity(&self) -> f64 {
        self.eps_unity.unwrap_or_else(|| pow2(-self.p() / 3.0))
    }
    pub fn eps_orbit(&self) -> f64 {
        self.eps_orbit.unwrap_or_else(|| pow2(-self.p() / 3.0))
    }
    pub fn eps_beta(&self) -> f64 {
        self.eps_beta.unwrap_or_else(|| pow2(-self.p() / 4.0))
    }
    pub fn eps_cluster(&self) -> f64 {
        pow2(-self.p() / 4.0)
    }
    pub fn eps_series(&self) -> f64 {
        pow2(-self.p() / 4.0)
    }
    pub fn eps_push(&self) -> f64 {
        pow2(-self.p() / 2.0)
    }
    pub fn eps_solve(&self) -> f64 {
        pow2(-self.p() / 2.0)
    }
    /// Threshold below which a coefficient relative to the polynomial norm is dropped.
    pub fn eps_trim(&self) -> f64 {
        pow2(-self.p() * 0.6)
    }
}
