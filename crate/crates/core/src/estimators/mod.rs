//! Norm estimation, commutator bounds, spectral comparisons and rate fits.

mod commutator;
mod eigen;
mod hausdorff;
mod norm;
mod rates;
mod resolvent;
mod spectral;

pub use commutator::{
    commutator_norm, commutator_rate, modulus_of_continuity, schur_commutator_bound, CommutatorMap,
    CommutatorRow, CommutatorSweep, SchurBound,
};
pub use eigen::{dense_matrix, lowest_eigenpairs, lowest_eigenvalues, EigenOptions, Eigenpairs};
pub use hausdorff::{hausdorff_distance, hausdorff_vs_norm_property, HausdorffPropertyOutcome};
pub use norm::{adjoint_mismatch, op_norm, Adjoint, DenseMap, LinearMap, NormEstimate, NormOptions};
pub use rates::{rate_fit, ConvergenceReport, RateCriterion, RateFit};
pub use resolvent::{resolvent_diff_norm, ResolventDifferenceMap};
pub use spectral::{
    default_resolvent_shift, resolvent_spectrum_hausdorff, spectral_projection_diff, HausdorffRow, HausdorffSweep, ProjectionDiff,
    SpectralOptions, SpectralWindow,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` of `seed`: independent, reproducible streams
/// for parallel trials.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
