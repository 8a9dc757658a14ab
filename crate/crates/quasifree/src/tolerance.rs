use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the library lives here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Structural checks: antisymmetry, Fourier round trips, translation invariance.
    pub structural: f64,
    /// Spectral checks: purity, eigenvalue comparisons.
    pub spectral: f64,
    /// Maximum relative asymmetry accepted by `antisymmetrize`.
    pub antisymmetry_input: f64,
    /// Absolute floor of the ADR zero threshold.
    pub zero_floor: f64,
    /// Relative part of the ADR zero threshold (times max |Re λ|).
    pub zero_relative: f64,
    /// Largest allowed (2N)² for dense superoperator work.
    pub dense_dim_cap: usize,
    /// Allowed excess of the covariance eigenvalue bound during integration.
    pub cm_bound: f64,
    /// Singular value ratio below which a steady-state system counts as singular.
    pub singular_ratio: f64,
    /// Smallest admissible β_m in momentum sums.
    pub critical_beta: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-10,
            spectral: 1e-8,
            antisymmetry_input: 1e-8,
            zero_floor: 1e-10,
            zero_relative: 1e-8,
            dense_dim_cap: 10_000,
            cm_bound: 1e-6,
            singular_ratio: 1e-10,
            critical_beta: 1e-12,
        }
    }
}
