use std::f64::consts::PI;

use super::AXES;
use crate::error::{Error, Result};
use crate::numcore::{SphereQuadrature, SymMatrix};
use crate::radiation::{direction, single_photon_density, SinglePhotonSpec};

/// QFI over (x, y, z) for the one-photon state of a decaying emitter:
/// J_μν = 4k₀² ∫dΩ k̂_μk̂_ν ρ₁(k̂) with ρ₁ the single-photon density.
pub fn single_photon_qfi(
    s: &SinglePhotonSpec,
    q: &SphereQuadrature,
    lambda0: f64,
) -> Result<SymMatrix> {
    if !(lambda0 > 0.0 && lambda0.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "wavelength must be positive, got {lambda0}"
        )));
    }
    let k0 = 2.0 * PI / lambda0;
    let mut rows = vec![vec![0.0; 3]; 3];
    for mu in 0..3 {
        for nu in mu..3 {
            let m = crate::numcore::sphere_integrate(q, |t, p| {
                let k = direction(t, p);
                k[mu] * k[nu] * single_photon_density(s, t, p)
            })?;
            rows[mu][nu] = 4.0 * k0 * k0 * m;
            rows[nu][mu] = rows[mu][nu];
        }
    }
    SymMatrix::new(AXES.to_vec(), &rows)
}

/// QFI for `trials` independent repetitions.
pub fn repeated_trials(qfi: &SymMatrix, trials: u64) -> Result<SymMatrix> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "number of trials must be positive".into(),
        ));
    }
    Ok(qfi.scaled(trials as f64))
}
