use std::f64::consts::PI;

use log::warn;

use super::AXES;
use crate::error::{Error, Result};
use crate::numcore::{SphereQuadrature, SymMatrix};
use crate::radiation::{pattern_at, DipoleKind, DipoleSpec};

/// The two dipole orientations with closed-form mode widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedDipole {
    LinearZ,
    CircularXY,
}

impl NamedDipole {
    pub fn from_kind(kind: &DipoleKind) -> Option<Self> {
        match kind {
            DipoleKind::LinearZ => Some(NamedDipole::LinearZ),
            DipoleKind::CircularXY => Some(NamedDipole::CircularXY),
            DipoleKind::General(_) => None,
        }
    }

    /// W_μ·2π√N/λ₀ for each axis.
    fn reduced_widths(self) -> [f64; 3] {
        match self {
            NamedDipole::LinearZ => [2.5f64.sqrt(), 2.5f64.sqrt(), 5f64.sqrt()],
            NamedDipole::CircularXY => [
                (10.0f64 / 3.0).sqrt(),
                (10.0f64 / 3.0).sqrt(),
                2.5f64.sqrt(),
            ],
        }
    }
}

fn check_positive_n(n: f64) -> Result<()> {
    if n > 0.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "bound undefined for photon number {n}; need N > 0"
        )))
    }
}

fn check_lambda(lambda0: f64) -> Result<()> {
    if lambda0 > 0.0 && lambda0.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "wavelength must be positive, got {lambda0}"
        )))
    }
}

/// Closed-form mode widths (W_x, W_y, W_z) in the units of `lambda0`.
pub fn w_constants_analytic(kind: NamedDipole, n: f64, lambda0: f64) -> Result<[f64; 3]> {
    check_positive_n(n)?;
    check_lambda(lambda0)?;
    let base = lambda0 / (2.0 * PI * n.sqrt());
    Ok(kind.reduced_widths().map(|r| r * base))
}

/// C_μ in 4/W_μ² = N/(C_μλ₀²), i.e. C_μ = (reduced width)²/(16π²).
pub fn c_constants(kind: NamedDipole) -> [f64; 3] {
    kind.reduced_widths().map(|r| r * r / (16.0 * PI * PI))
}

/// Mode widths from quadrature: W_μ = [k₀² ∫dΩ k̂_μ² ρ]^{−1/2}.
pub fn w_constants_numeric(d: &DipoleSpec, q: &SphereQuadrature, lambda0: f64) -> Result<[f64; 3]> {
    check_positive_n(d.photon_number())?;
    check_lambda(lambda0)?;
    let k0 = 2.0 * PI / lambda0;
    let mut w = [0.0; 3];
    for (mu, wmu) in w.iter_mut().enumerate() {
        let m = q.integrate_dir(|k| k[mu] * k[mu] * pattern_at(d, k))?;
        *wmu = 1.0 / (k0 * m.sqrt());
    }
    Ok(w)
}

/// Full 3×3 QFI over (x, y, z) for one classical source.
///
/// Diagonal for the named dipoles; general orientations couple axes.
pub fn single_source_qfi(d: &DipoleSpec, q: &SphereQuadrature, lambda0: f64) -> Result<SymMatrix> {
    check_lambda(lambda0)?;
    let k0 = 2.0 * PI / lambda0;
    let mut rows = vec![vec![0.0; 3]; 3];
    for mu in 0..3 {
        for nu in mu..3 {
            let m = q.integrate_dir(|k| k[mu] * k[nu] * pattern_at(d, k))?;
            rows[mu][nu] = 4.0 * k0 * k0 * m;
            rows[nu][mu] = rows[mu][nu];
        }
    }
    SymMatrix::new(AXES.to_vec(), &rows)
}

/// Per-axis quantum shot-noise limit Σ_μμ ≥ W_μ²/4.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotNoiseBound {
    /// Mode widths, units of `lambda0`.
    pub w: [f64; 3],
    /// W_μ²/4, squared length units.
    pub qcrb_diag: [f64; 3],
    pub photon_number: f64,
    pub lambda0: f64,
}

impl ShotNoiseBound {
    fn from_widths(w: [f64; 3], photon_number: f64, lambda0: f64) -> Self {
        ShotNoiseBound {
            w,
            qcrb_diag: w.map(|x| x * x / 4.0),
            photon_number,
            lambda0,
        }
    }

    /// λ₀/(2π√N).
    pub fn base_scale(&self) -> f64 {
        self.lambda0 / (2.0 * PI * self.photon_number.sqrt())
    }

    /// RMS error floor W_μ/2.
    pub fn rms(&self) -> [f64; 3] {
        self.qcrb_diag.map(f64::sqrt)
    }

    /// Diagonal QFI 4/W_μ².
    pub fn qfi_diag(&self) -> [f64; 3] {
        self.qcrb_diag.map(|b| 1.0 / b)
    }
}

/// Shot-noise bound; closed forms for named dipoles, quadrature otherwise
/// (default rule unless `q` is given).
pub fn shot_noise_bound(
    d: &DipoleSpec,
    lambda0: f64,
    q: Option<&SphereQuadrature>,
) -> Result<ShotNoiseBound> {
    let n = d.photon_number();
    let w = match NamedDipole::from_kind(&d.kind) {
        Some(named) => w_constants_analytic(named, n, lambda0)?,
        None => match q {
            Some(q) => w_constants_numeric(d, q, lambda0)?,
            None => w_constants_numeric(d, &SphereQuadrature::default(), lambda0)?,
        },
    };
    Ok(ShotNoiseBound::from_widths(w, n, lambda0))
}

/// Optimal squeezing factor f(N₀) = (2N₀+1)[1 − √(1 − (2N₀+1)⁻²)].
///
/// Evaluated as 1/(x(1 + √(1 − x⁻²))) with x = 2N₀+1.
pub fn squeeze_factor(n0: f64) -> Result<f64> {
    if !(n0 >= 0.0 && n0.is_finite()) {
        return Err(Error::Domain(format!(
            "squeezing photon number must be ≥ 0, got {n0}"
        )));
    }
    let x = 2.0 * n0 + 1.0;
    Ok(1.0 / (x * (1.0 + (1.0 - 1.0 / (x * x)).sqrt())))
}

/// Per-axis mean-square error W_μ²f(N₀)/4 with N₀ photons of optimally
/// squeezed light. Only valid close to a known reference position
/// (|r − r₀| ≪ λ₀).
pub fn squeezed_bound(b: &ShotNoiseBound, n0: f64) -> Result<[f64; 3]> {
    let f = squeeze_factor(n0)?;
    if n0 > 0.0 {
        warn!("squeezed bound assumes the source lies within ≪ λ₀ of the reference position");
    }
    Ok(b.qcrb_diag.map(|v| v * f))
}
