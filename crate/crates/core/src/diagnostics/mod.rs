//! Relative energy, essential/residual split, distance to the limit and the
//! ε-sweep harness.

mod norms;
mod relative;
mod sweep;

pub use norms::{error_norms_m7, fit_rate, ConvergenceRow, ConvergenceTable};
pub use relative::{
    coercivity_check, ess_res_decompose, quadratic_bound, relative_energy, thermal_gap, Decomposition, EssentialSet,
    L4Monitor, L4Record, RelEnergyReport, Reference, RelativeEnergy,
};
pub use sweep::{compare_modified_vs_naive, sweep, ComparisonReport, SweepOptions, SweepReport};
