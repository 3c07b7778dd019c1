use std::borrow::Cow;
use std::f64::consts::PI;

use log::debug;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::numcore::{congruence_transform, make_gauss_sphere, SphereQuadrature, SymMatrix};
use crate::radiation::{
    is_undersampled, overlap_integral, required_n_phi, DipoleKind, DipoleSpec, Polarization,
    SourceConfig,
};

/// κ within this distance of 1 marks the QFI as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfiStatus {
    Regular,
    /// The (x, x') QFI has no inverse; the raised bound is +∞.
    Singular,
}

/// QFI over the x-coordinates (x, x') of two sources.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSourceQfi {
    pub matrix: SymMatrix,
    /// J_xx'²/(J_xx·J_x'x'), clamped to [0, 1].
    pub kappa: f64,
    /// 1/(J_xx(1 − κ)); +∞ when singular.
    pub raised_bound_xx: f64,
    pub status: QfiStatus,
    /// The raw ratio fell outside [0, 1] and was clamped.
    pub clamped: bool,
}

impl TwoSourceQfi {
    /// Assembles κ and the raised bound from the three QFI entries.
    pub fn from_entries(j_xx: f64, j_pp: f64, j_xp: f64) -> Result<Self> {
        let matrix = SymMatrix::new(vec!["x", "x'"], &[vec![j_xx, j_xp], vec![j_xp, j_pp]])?;
        let raw = j_xp * j_xp / (j_xx * j_pp);
        if !raw.is_finite() {
            return Err(Error::Domain(format!(
                "degradation factor undefined for J_xx={j_xx}, J_x'x'={j_pp}"
            )));
        }
        let kappa = raw.clamp(0.0, 1.0);
        let clamped = kappa != raw;
        if clamped {
            debug!("kappa {raw} clamped to {kappa}");
        }
        let (status, raised_bound_xx) = if 1.0 - kappa <= SINGULAR_TOL {
            (QfiStatus::Singular, f64::INFINITY)
        } else {
            (QfiStatus::Regular, 1.0 / (j_xx * (1.0 - kappa)))
        };
        Ok(TwoSourceQfi {
            matrix,
            kappa,
            raised_bound_xx,
            status,
            clamped,
        })
    }

    pub fn j_xx(&self) -> f64 {
        self.matrix.get(0, 0)
    }

    pub fn j_pp(&self) -> f64 {
        self.matrix.get(1, 1)
    }

    pub fn j_xp(&self) -> f64 {
        self.matrix.get(0, 1)
    }
}

/// `q`, or a finer product rule when `q` undersamples `separation`.
pub fn resolved_quadrature(
    q: &SphereQuadrature,
    separation: f64,
) -> Result<Cow<'_, SphereQuadrature>> {
    if !is_undersampled(q, separation) {
        return Ok(Cow::Borrowed(q));
    }
    let n_phi = required_n_phi(separation);
    let n_theta = q.n_theta().max(n_phi.div_ceil(2));
    debug!("upscaling quadrature to {n_theta}x{n_phi} for separation {separation}");
    Ok(Cow::Owned(make_gauss_sphere(n_theta, n_phi)?))
}

/// Two-source QFI over (x, x') in units of λ₀ = 1.
///
/// J_xx' = 4k₀² Re ∫dΩ k̂_x² Σ_s α*α'. Undersampling quadratures are
/// upscaled automatically.
pub fn two_source_qfi(
    a: &SourceConfig,
    b: &SourceConfig,
    q: &SphereQuadrature,
) -> Result<TwoSourceQfi> {
    if a.dipole.photon_number() <= 0.0 || b.dipole.photon_number() <= 0.0 {
        return Err(Error::Domain(
            "both sources need a positive photon number".into(),
        ));
    }
    let q = resolved_quadrature(q, a.distance_to(b))?;
    let k0 = 2.0 * PI;
    let factor = 4.0 * k0 * k0;
    let wx = |k: &[f64; 3]| k[0] * k[0];
    let j_xx = factor * overlap_integral(a, a, wx, &q)?.re;
    let j_pp = factor * overlap_integral(b, b, wx, &q)?.re;
    let j_xp = factor * overlap_integral(a, b, wx, &q)?.re;
    TwoSourceQfi::from_entries(j_xx, j_pp, j_xp)
}

/// Geometry for a κ sweep: two identical dipoles placed symmetrically at
/// ±(d/2)·`direction`, the second carrying an extra `relative_phase`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSourceTemplate {
    pub dipole: DipoleSpec,
    pub relative_phase: f64,
    pub direction: [f64; 3],
}

impl TwoSourceTemplate {
    /// x̂-polarized dipoles separated along x̂.
    pub fn x_dipoles_along_x(relative_phase: f64) -> Self {
        TwoSourceTemplate {
            dipole: DipoleSpec::new(DipoleKind::General(Polarization::x()), 1.0, 0.0)
                .expect("valid dipole"),
            relative_phase,
            direction: [1.0, 0.0, 0.0],
        }
    }

    pub fn sources(&self, separation: f64) -> Result<(SourceConfig, SourceConfig)> {
        let n = self.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n > 0.0) {
            return Err(Error::InvalidArgument(
                "separation direction is zero".into(),
            ));
        }
        let half = self.direction.map(|v| 0.5 * separation * v / n);
        let a = SourceConfig::new(half, self.dipole)?;
        let b = SourceConfig::new(
            half.map(|v| -v),
            self.dipole
                .with_phase(self.dipole.phase + self.relative_phase),
        )?;
        Ok((a, b))
    }
}

/// κ at each separation (units of λ₀), in input order.
pub fn kappa_curve(
    template: &TwoSourceTemplate,
    separations: &[f64],
    q: &SphereQuadrature,
    mode: ExecMode,
) -> Result<Vec<(f64, f64)>> {
    if separations.is_empty() {
        return Err(Error::InvalidArgument("separation list is empty".into()));
    }
    map_indexed(mode, separations.len(), |i| {
        let d = separations[i];
        let (a, b) = template.sources(d)?;
        Ok((d, two_source_qfi(&a, &b, q)?.kappa))
    })
    .into_iter()
    .collect()
}

/// ∂(x, x')/∂(c, s) for x = c + s/2, x' = c − s/2.
pub fn centroid_separation_jacobian() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 1.0, -0.5])
}

/// QFI with respect to the centroid (x + x')/2 and separation x − x'.
pub fn centroid_separation_qfi(t: &TwoSourceQfi) -> Result<SymMatrix> {
    congruence_transform(
        &t.matrix,
        &centroid_separation_jacobian(),
        vec!["centroid", "separation"],
    )
}
