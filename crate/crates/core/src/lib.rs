//! Subcarrier-domain representation of multicarrier continuous-variable
//! channels.
//!
//! The crate models a Gaussian link split into `l` sub-channels. Subcarriers
//! are produced with the unitary inverse CVQFT (a scaled DFT) and recombined
//! with the forward one. A channel is either flat (one complex gain per
//! sub-channel) or decomposed into paths between transmitted and received
//! phase-space directions. Projecting the channel matrix onto the Fourier
//! grid bases gives its subcarrier-domain representation, whose sparsity,
//! rank and diversity are studied in [`stats`]. [`multiuser`] generalizes the
//! grid to `K_in` transmitters and `K_out` receivers.

pub mod channel;
pub mod ensemble;
pub mod error;
pub mod fourier;
pub mod multiuser;
pub mod pairs;
pub mod stats;
pub mod trig;

pub use num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;

pub use channel::{
    domain_representation, domain_transmit, fourier_transmittance, path_matrix, path_matrix_rect,
    subcarrier_decode, subcarrier_domain, subcarrier_encode, transmit, PathComponent,
    SubcarrierDomainMatrix, Transmittance, TransmissionRecord,
};
pub use ensemble::{sample_input, sample_noise, statistical_model, GaussianEnsemble};
pub use error::{Error, Result};
pub use fourier::{
    basis_kernel_plot, basis_vector, build_cvqft, cos_omega, cos_omega_inner, cosine_grid, f_tau,
    f_tau_sinc_limit, in_domain_bin, in_domain_bin_cos, kernel_plot, AnglePair, BasisSet,
    BasisVector, Direction, FourierOperator, KernelPoint,
};
pub use multiuser::{
    build_multiuser_operators, f_kout, f_kout_maxima, multiuser_basis_sets, multiuser_path_matrix,
    multiuser_subcarrier_domain, multiuser_transmit, predicted_kout_maxima, MultiuserConfig,
    MultiuserRecord,
};
pub use stats::{
    diversity_vs_l, magnitude_profile, near_zero_monotonicity, omega_sweep, rank_report,
    rank_study, Epsilon, MagnitudeConvention, MagnitudeProfile, NearZeroReport, NearZeroSpec,
    RankReport, SweepSpec, SweepTable,
};
