//! Energies, the modulated energy `Θ`, the relative-entropy identity
//! balance, coercivity witnesses, and ε-sweep fits.

pub mod coercivity;
pub mod energy;
pub mod identity;
pub mod sweep;
pub mod theta;

pub use coercivity::{coercivity_check, hls_check, CoercivityCheck, HlsCheck};
pub use energy::{free_energy, total_energy, EnergyBreakdown};
pub use identity::{identity_balance, relative_entropy_residual, IdentityBalance, IdentityTerm};
pub use sweep::{compare_run, convergence_fit, RunComparison, SweepResult};
pub use theta::{diagnostics_record, theta, DiagnosticsRecord, ThetaParts};
