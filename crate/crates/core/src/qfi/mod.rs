//! Quantum Fisher information and Cramér-Rao bounds for source localization.
//!
//! For a coherent displacement of the vacuum the QFI with respect to source
//! coordinates is J_μν = 4 Re Σ_s ∫ d³k ∂_μα* ∂_να. On the far-field shell
//! ∂_μα = −ik_μα, so for one source J_μν = 4k₀² ∫dΩ k̂_μk̂_ν ρ(k̂).

mod single;
mod single_photon;
mod two_source;

pub use single::{
    c_constants, shot_noise_bound, single_source_qfi, squeeze_factor, squeezed_bound,
    w_constants_analytic, w_constants_numeric, NamedDipole, ShotNoiseBound,
};
pub use single_photon::{repeated_trials, single_photon_qfi};
pub use two_source::{
    centroid_separation_jacobian, centroid_separation_qfi, kappa_curve, resolved_quadrature,
    two_source_qfi, QfiStatus, TwoSourceQfi, TwoSourceTemplate, SINGULAR_TOL,
};

pub(crate) const AXES: [&str; 3] = ["x", "y", "z"];
