//! Exact fermionic Fock space over `M ≤ 24` modes.

pub mod hubbard;
pub mod ladder;
pub mod particle_hole;
pub mod properties;
pub mod quartic;
pub mod space;
pub mod spectral;
pub mod sparse;
pub mod wick;

pub use hubbard::assemble_hubbard_hamiltonian;
pub use ladder::{annihilation, creation, orbital_operator, LadderSum};
pub use particle_hole::{particle_hole_ops, ParticleHoleFrame};
pub use quartic::{assemble_quartics, BasisForm, PairPotential, QuarticSuite, VTensor};
pub use space::{FockSpace, ModeOrder, DEFAULT_FOCK_CAP, HARD_FOCK_CAP};
pub use sparse::{LinearMap, SparseOperator};
pub use spectral::{numerical_radius, operator_norm, InverseSqrt, LanczosOptions, RadiusEstimate, RadiusStructure, Sandwich};
pub use wick::{substituted_hamiltonian, wick_identity_check, wick_report, WickReport};
