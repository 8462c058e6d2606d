use serde::{Deserialize, Serialize};

pub const THRESHOLDS_VERSION: u32 = 1;

/// Pass/fail limits of every verification procedure. Finite-n limits are
/// engineering choices; the version is bumped whenever a default changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub version: u32,
    /// Relative tolerance of `E[(B_n/n)^k]` for k = 2, 3.
    pub moment_rel_low: f64,
    /// Relative tolerance for k >= 4.
    pub moment_rel_high: f64,
    pub kappa_mean_rel: f64,
    pub kappa_ks: f64,
    pub engine_chi2_p: f64,
    pub skeleton_ks: f64,
    pub skeleton_diff_sd: f64,
    pub sandwich_rtol: f64,
    pub degree_abs: f64,
    pub profile_mean_rel: f64,
    pub profile_diff_ks: f64,
    pub profile_corr_gated: bool,
    pub reset_ks_p: f64,
    pub reciprocal_rel: f64,
    pub reciprocal_fraction: f64,
    pub height_ratio_min: f64,
    pub delta_ell_rel: f64,
    pub ct_growth_rel: f64,
    pub rrt_band: (f64, f64),
    pub oracle_chi2_p: f64,
    pub inf_ratio_min: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            version: THRESHOLDS_VERSION,
            moment_rel_low: 0.02,
            moment_rel_high: 0.05,
            kappa_mean_rel: 0.10,
            kappa_ks: 0.12,
            engine_chi2_p: 0.001,
            skeleton_ks: 0.05,
            skeleton_diff_sd: 0.05,
            sandwich_rtol: 1e-6,
            degree_abs: 0.01,
            profile_mean_rel: 0.05,
            profile_diff_ks: 0.10,
            profile_corr_gated: true,
            reset_ks_p: 0.001,
            reciprocal_rel: 0.10,
            reciprocal_fraction: 0.95,
            height_ratio_min: 2.0,
            delta_ell_rel: 0.05,
            ct_growth_rel: 0.05,
            rrt_band: (2.2, 3.2),
            oracle_chi2_p: 0.001,
            inf_ratio_min: 2.0,
        }
    }
}
