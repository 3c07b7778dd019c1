//! Point dipoles and their far-field angular photon densities.
//!
//! All far-field integrals live on the shell |k| = k₀ and are written as
//! angular integrals over the unit direction k̂. A dipole with unit complex
//! polarization p̂ radiating N photons has angular density
//!
//! ρ(k̂) = N · (3/8π) · (|p̂|² − |k̂·p̂|²),
//!
//! which integrates to N over the sphere.
//!
//! Phase convention: a dipole phase ψ multiplies the radiated amplitude by
//! e^{iψ}, so [`overlap_integral`]`(a, b, …)` carries the factor
//! e^{i(ψ_b − ψ_a)}. "In phase" means equal phases.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numcore::SphereQuadrature;

const NORM_TOL: f64 = 1e-12;
const PATTERN_NORM: f64 = 3.0 / (8.0 * PI);

/// Reduced Planck constant [J·s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity [F/m].
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Wavelength bookkeeping. Internal lengths are in units of `lambda0`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitSystem {
    lambda0: f64,
    pub note: String,
}

impl UnitSystem {
    pub fn new(lambda0: f64, note: impl Into<String>) -> Result<Self> {
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "wavelength must be positive, got {lambda0}"
            )));
        }
        Ok(UnitSystem {
            lambda0,
            note: note.into(),
        })
    }

    /// λ₀ = 1.
    pub fn natural() -> Self {
        UnitSystem {
            lambda0: 1.0,
            note: "lengths in units of the wavelength".into(),
        }
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.lambda0
    }
}

/// Mean radiated photon number of a classical dipole p(t) = p₀e^{−iω₀t} + c.c.
/// oscillating for `duration` seconds, from SI inputs.
pub fn photon_number_from_dipole(p0_abs: f64, omega0: f64, duration: f64) -> f64 {
    p0_abs * p0_abs * omega0.powi(3) * duration
        / (3.0 * PI * HBAR * EPSILON_0 * SPEED_OF_LIGHT.powi(3))
}

/// Unit-norm complex polarization vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarization([Complex64; 3]);

impl Polarization {
    /// Accepts a vector with unit Hermitian norm (to 1e-12).
    pub fn new(v: [Complex64; 3]) -> Result<Self> {
        let n2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if !((n2 - 1.0).abs() <= NORM_TOL) {
            return Err(Error::InvalidArgument(format!(
                "polarization must have unit norm, |p|² = {n2}"
            )));
        }
        Ok(Polarization(v))
    }

    /// Scales an arbitrary non-zero vector to unit norm.
    pub fn normalized(v: [Complex64; 3]) -> Result<Self> {
        let n: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidArgument("zero polarization vector".into()));
        }
        Ok(Polarization(v.map(|c| c / n)))
    }

    pub fn real(v: [f64; 3]) -> Result<Self> {
        Self::normalized(v.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn z() -> Self {
        Polarization([Complex64::ZERO, Complex64::ZERO, Complex64::ONE])
    }

    pub fn x() -> Self {
        Polarization([Complex64::ONE, Complex64::ZERO, Complex64::ZERO])
    }

    pub fn y() -> Self {
        Polarization([Complex64::ZERO, Complex64::ONE, Complex64::ZERO])
    }

    /// (x̂ + iŷ)/√2.
    pub fn circular_xy() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Polarization([
            Complex64::new(s, 0.0),
            Complex64::new(0.0, s),
            Complex64::ZERO,
        ])
    }

    pub fn components(&self) -> &[Complex64; 3] {
        &self.0
    }

    /// k̂·p̂ for a real unit vector k̂.
    pub fn dot_real(&self, k: &[f64; 3]) -> Complex64 {
        self.0[0] * k[0] + self.0[1] * k[1] + self.0[2] * k[2]
    }

    /// Applies a real 3×3 rotation.
    pub fn rotated(&self, r: &[[f64; 3]; 3]) -> Polarization {
        let p = &self.0;
        Polarization(std::array::from_fn(|i| {
            p[0] * r[i][0] + p[1] * r[i][1] + p[2] * r[i][2]
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DipoleKind {
    /// p₀ ∝ ẑ
    LinearZ,
    /// p₀ ∝ (x̂ + iŷ)/√2
    CircularXY,
    General(Polarization),
}

impl DipoleKind {
    pub fn polarization(&self) -> Polarization {
        match self {
            DipoleKind::LinearZ => Polarization::z(),
            DipoleKind::CircularXY => Polarization::circular_xy(),
            DipoleKind::General(p) => *p,
        }
    }
}

/// Orientation, strength (mean radiated photon number) and phase of a
/// classical point dipole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleSpec {
    pub kind: DipoleKind,
    photon_number: f64,
    pub phase: f64,
}

impl DipoleSpec {
    pub fn new(kind: DipoleKind, photon_number: f64, phase: f64) -> Result<Self> {
        if !(photon_number >= 0.0 && photon_number.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "photon number must be finite and non-negative, got {photon_number}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidArgument("phase must be finite".into()));
        }
        Ok(DipoleSpec {
            kind,
            photon_number,
            phase,
        })
    }

    pub fn linear_z(n: f64) -> Result<Self> {
        Self::new(DipoleKind::LinearZ, n, 0.0)
    }

    pub fn circular_xy(n: f64) -> Result<Self> {
        Self::new(DipoleKind::CircularXY, n, 0.0)
    }

    pub fn photon_number(&self) -> f64 {
        self.photon_number
    }

    pub fn polarization(&self) -> Polarization {
        self.kind.polarization()
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_photon_number(self, n: f64) -> Result<Self> {
        Self::new(self.kind, n, self.phase)
    }
}

/// A dipole at a position given in units of λ₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceConfig {
    position: [f64; 3],
    pub dipole: DipoleSpec,
}

impl SourceConfig {
    pub fn new(position: [f64; 3], dipole: DipoleSpec) -> Result<Self> {
        if position.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "source position must be finite".into(),
            ));
        }
        Ok(SourceConfig { position, dipole })
    }

    pub fn position(&self) -> [f64; 3] {
        self.position
    }

    pub fn distance_to(&self, other: &SourceConfig) -> f64 {
        let d: f64 = (0..3)
            .map(|i| (self.position[i] - other.position[i]).powi(2))
            .sum();
        d.sqrt()
    }
}

/// A two-level emitter in the long-lifetime limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePhotonSpec {
    pub dipole_direction: Polarization,
    linewidth_ratio: f64,
}

impl SinglePhotonSpec {
    /// `linewidth_ratio` = 1/(ω₀T₁) must lie in (0, 0.01].
    pub fn new(dipole_direction: Polarization, linewidth_ratio: f64) -> Result<Self> {
        if !(linewidth_ratio > 0.0 && linewidth_ratio <= 0.01) {
            return Err(Error::InvalidArgument(format!(
                "linewidth ratio 1/(ω₀T₁) must lie in (0, 0.01], got {linewidth_ratio}"
            )));
        }
        Ok(SinglePhotonSpec {
            dipole_direction,
            linewidth_ratio,
        })
    }

    pub fn linewidth_ratio(&self) -> f64 {
        self.linewidth_ratio
    }
}

/// Unit direction for spherical angles.
pub fn direction(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Angular photon density ρ(θ, φ); integrates to the photon number.
pub fn angular_pattern(d: &DipoleSpec, theta: f64, phi: f64) -> f64 {
    pattern_at(d, &direction(theta, phi))
}

/// [`angular_pattern`] at a unit direction vector.
pub fn pattern_at(d: &DipoleSpec, k: &[f64; 3]) -> f64 {
    d.photon_number * unit_pattern(&d.polarization(), k)
}

/// Density per photon: (3/8π)(1 − |k̂·p̂|²).
pub fn unit_pattern(p: &Polarization, k: &[f64; 3]) -> f64 {
    PATTERN_NORM * (1.0 - p.dot_real(k).norm_sqr()).max(0.0)
}

/// Smallest φ-resolution that resolves e^{i2πd·k̂} for separation `d` (λ₀).
pub fn required_n_phi(separation: f64) -> usize {
    (32.0 * (1.0 + separation.abs())).ceil() as usize
}

pub fn is_undersampled(q: &SphereQuadrature, separation: f64) -> bool {
    q.n_phi() < required_n_phi(separation)
}

/// Complex mode overlap ∫ dΩ w(k̂) Σ_s α_a*(k̂,s) α_b(k̂,s) on the far-field
/// shell, normalized so that `overlap_integral(a, a, 1) = N_a`.
///
/// The integrand is w(k̂)·√(N_a N_b)·(3/8π)·p̂_a*·(I − k̂k̂ᵀ)·p̂_b ·
/// e^{i2πk̂·(r_a − r_b)}·e^{i(ψ_b − ψ_a)} with positions in units of λ₀.
/// Logs a warning when the quadrature undersamples the phase factor.
pub fn overlap_integral<W>(
    a: &SourceConfig,
    b: &SourceConfig,
    weight: W,
    q: &SphereQuadrature,
) -> Result<Complex64>
where
    W: Fn(&[f64; 3]) -> f64,
{
    let sep = a.distance_to(b);
    if is_undersampled(q, sep) {
        warn!(
            "quadrature with n_phi={} undersamples separation {sep} λ₀ (need n_phi ≥ {})",
            q.n_phi(),
            required_n_phi(sep)
        );
    }
    let pa = a.dipole.polarization();
    let pb = b.dipole.polarization();
    let amp = (a.dipole.photon_number * b.dipole.photon_number).sqrt() * PATTERN_NORM;
    let global = Complex64::from_polar(amp, b.dipole.phase - a.dipole.phase);
    let ra = a.position;
    let rb = b.position;
    let dr = [ra[0] - rb[0], ra[1] - rb[1], ra[2] - rb[2]];
    let pab = hermitian_dot(&pa, &pb);
    let integral = q.integrate_dir_complex(|k| {
        // p̂_a*·(I − k̂k̂ᵀ)·p̂_b
        let pol = pab - pa.dot_real(k).conj() * pb.dot_real(k);
        let phase = 2.0 * PI * (k[0] * dr[0] + k[1] * dr[1] + k[2] * dr[2]);
        pol * Complex64::from_polar(weight(k), phase)
    })?;
    Ok(global * integral)
}

fn hermitian_dot(a: &Polarization, b: &Polarization) -> Complex64 {
    let (a, b) = (a.components(), b.components());
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

/// The two transverse polarization vectors (θ̂, φ̂) at direction (θ, φ).
pub fn transverse_basis(theta: f64, phi: f64) -> [[f64; 3]; 2] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [[ct * cp, ct * sp, -st], [-sp, cp, 0.0]]
}

/// Angular density of the emitted photon of a decaying two-level emitter.
///
/// In the long-lifetime limit the Lorentzian line collapses onto the shell
/// and carries unit weight, leaving Σ_s |μ̂·ε_s*|² over the two transverse
/// polarizations, normalized to one photon.
pub fn single_photon_density(s: &SinglePhotonSpec, theta: f64, phi: f64) -> f64 {
    let mu = s.dipole_direction.components();
    let basis = transverse_basis(theta, phi);
    let pol_sum: f64 = basis
        .iter()
        .map(|e| (mu[0] * e[0] + mu[1] * e[1] + mu[2] * e[2]).norm_sqr())
        .sum();
    PATTERN_NORM * pol_sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{make_gauss_sphere, sphere_integrate};
    use proptest::prelude::*;

    fn q() -> SphereQuadrature {
        SphereQuadrature::default()
    }

    fn general(v: [f64; 3], n: f64) -> DipoleSpec {
        DipoleSpec::new(DipoleKind::General(Polarization::real(v).unwrap()), n, 0.0).unwrap()
    }

    #[test]
    fn named_patterns() {
        let z = DipoleSpec::linear_z(1.0).unwrap();
        assert!((angular_pattern(&z, PI / 2.0, 0.3) - 3.0 / (8.0 * PI)).abs() < 1e-15);
        assert!(angular_pattern(&z, 0.0, 0.0).abs() < 1e-15);
        let c = DipoleSpec::circular_xy(1.0).unwrap();
        assert!((angular_pattern(&c, 0.0, 1.0) - 3.0 / (8.0 * PI)).abs() < 1e-15);
        let t = 0.7f64;
        let expect = 3.0 / (16.0 * PI) * (1.0 + t.cos().powi(2));
        assert!((angular_pattern(&c, t, 2.0) - expect).abs() < 1e-15);
    }

    #[test]
    fn zero_photons_is_dark() {
        let d = DipoleSpec::circular_xy(0.0).unwrap();
        for (t, p) in [(0.1, 0.2), (1.0, 3.0), (2.5, 5.0)] {
            assert_eq!(angular_pattern(&d, t, p), 0.0);
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(DipoleSpec::linear_z(-1.0).is_err());
        assert!(Polarization::new([Complex64::ONE, Complex64::ONE, Complex64::ZERO]).is_err());
        assert!(SinglePhotonSpec::new(Polarization::z(), 0.0).is_err());
        assert!(SinglePhotonSpec::new(Polarization::z(), 0.02).is_err());
        assert!(SinglePhotonSpec::new(Polarization::z(), 1e-8).is_ok());
        assert!(
            SourceConfig::new([f64::NAN, 0.0, 0.0], DipoleSpec::linear_z(1.0).unwrap()).is_err()
        );
        assert!(UnitSystem::new(0.0, "").is_err());
    }

    #[test]
    fn normalization_to_photon_number() {
        let q = q();
        let specs = [
            DipoleSpec::linear_z(3.5).unwrap(),
            DipoleSpec::circular_xy(1.0).unwrap(),
            general([1.0, 0.0, 1.0], 2.0),
            DipoleSpec::new(
                DipoleKind::General(
                    Polarization::normalized([
                        Complex64::new(0.3, 0.1),
                        Complex64::new(-0.2, 0.9),
                        Complex64::new(0.5, -0.4),
                    ])
                    .unwrap(),
                ),
                7.0,
                1.1,
            )
            .unwrap(),
        ];
        for d in specs {
            let total = sphere_integrate(&q, |t, p| angular_pattern(&d, t, p)).unwrap();
            let n = d.photon_number();
            assert!(((total - n) / n).abs() < 1e-10, "{total} vs {n}");
        }
    }

    fn rotation(a: f64, b: f64, c: f64) -> [[f64; 3]; 3] {
        let (sa, ca) = a.sin_cos();
        let (sb, cb) = b.sin_cos();
        let (sc, cc) = c.sin_cos();
        // Rz(a)·Ry(b)·Rz(c)
        [
            [ca * cb * cc - sa * sc, -ca * cb * sc - sa * cc, ca * sb],
            [sa * cb * cc + ca * sc, -sa * cb * sc + ca * cc, sa * sb],
            [-sb * cc, sb * sc, cb],
        ]
    }

    fn apply(r: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]
        #[test]
        fn rotation_covariance(a in 0.0..(2.0 * PI), b in 0.0..PI, c in 0.0..(2.0 * PI),
                               t in 0.0..PI, p in 0.0..(2.0 * PI)) {
            let r = rotation(a, b, c);
            let k = direction(t, p);
            let rk = apply(&r, &k);
            for pol in [Polarization::z(), Polarization::circular_xy(), Polarization::real([1.0, -2.0, 0.5]).unwrap()] {
                let lhs = unit_pattern(&pol, &k);
                let rhs = unit_pattern(&pol.rotated(&r), &rk);
                prop_assert!((lhs - rhs).abs() < 1e-10);
            }
        }
    }

    fn src(pos: [f64; 3], d: DipoleSpec) -> SourceConfig {
        SourceConfig::new(pos, d).unwrap()
    }

    #[test]
    fn self_overlap_is_photon_number() {
        let q = q();
        let a = src(
            [0.1, -0.2, 0.3],
            DipoleSpec::circular_xy(4.0).unwrap().with_phase(0.7),
        );
        let o = overlap_integral(&a, &a, |_| 1.0, &q).unwrap();
        assert!((o.re - 4.0).abs() < 1e-10 && o.im.abs() < 1e-12);
    }

    #[test]
    fn quadrature_phase_pair_has_no_real_overlap() {
        let q = q();
        let x = general([1.0, 0.0, 0.0], 1.0);
        let a = src([0.15, 0.0, 0.0], x);
        let b = src([-0.15, 0.0, 0.0], x.with_phase(PI / 2.0));
        let o = overlap_integral(&a, &b, |k| k[0] * k[0], &q).unwrap();
        assert!(o.re.abs() < 1e-12, "{o}");
        assert!(o.im.abs() > 0.05);
    }

    #[test]
    fn coincident_x_dipoles_overlap() {
        // (3/8π)∫k̂x²(1 − k̂x²)dΩ = 1/5
        let q = q();
        let x = general([1.0, 0.0, 0.0], 1.0);
        let o =
            overlap_integral(&src([0.0; 3], x), &src([0.0; 3], x), |k| k[0] * k[0], &q).unwrap();
        assert!((o.re - 0.2).abs() < 1e-13 && o.im.abs() < 1e-15);
    }

    #[test]
    fn hermitian_symmetry_and_phase_factorization() {
        let q = q();
        let a = src(
            [0.2, 0.1, -0.3],
            DipoleSpec::circular_xy(2.0).unwrap().with_phase(0.4),
        );
        let b = src(
            [-0.1, 0.5, 0.2],
            general([1.0, 1.0, 0.0], 3.0).with_phase(-1.3),
        );
        let w = |k: &[f64; 3]| k[0] * k[0] + 0.5 * k[2];
        let ab = overlap_integral(&a, &b, w, &q).unwrap();
        let ba = overlap_integral(&b, &a, w, &q).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-12);

        let psi = 0.9;
        let b2 = src(b.position(), b.dipole.with_phase(b.dipole.phase + psi));
        let ab2 = overlap_integral(&a, &b2, w, &q).unwrap();
        assert!((ab2 - ab * Complex64::from_polar(1.0, psi)).norm() < 1e-12);
    }

    #[test]
    fn single_photon_density_matches_classical_pattern() {
        let q = make_gauss_sphere(24, 48).unwrap();
        for (mu, classical) in [
            (Polarization::z(), DipoleSpec::linear_z(1.0).unwrap()),
            (
                Polarization::circular_xy(),
                DipoleSpec::circular_xy(1.0).unwrap(),
            ),
        ] {
            let s = SinglePhotonSpec::new(mu, 1e-7).unwrap();
            for node in q.nodes() {
                let a = single_photon_density(&s, node.theta, node.phi);
                let b = angular_pattern(&classical, node.theta, node.phi);
                assert!((a - b).abs() < 1e-14);
            }
            let total = sphere_integrate(&q, |t, p| single_photon_density(&s, t, p)).unwrap();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn photon_number_helper() {
        // 1 D dipole at 500 nm for 1 ns: compare against direct arithmetic.
        let p0 = 3.335_64e-30;
        let omega = 2.0 * PI * SPEED_OF_LIGHT / 500e-9;
        let n = photon_number_from_dipole(p0, omega, 1e-9);
        let expect = p0 * p0 * omega * omega * omega * 1e-9
            / (3.0 * PI * HBAR * EPSILON_0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT * SPEED_OF_LIGHT);
        assert!(((n - expect) / expect).abs() < 1e-12);
        assert!(n > 0.0);
        let u = UnitSystem::new(342e-9, "m").unwrap();
        assert!((u.k0() * u.lambda0() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn resolution_rule() {
        assert_eq!(required_n_phi(0.0), 32);
        assert_eq!(required_n_phi(10.0), 352);
        assert!(!is_undersampled(&q(), 2.0));
        assert!(is_undersampled(&q(), 10.0));
    }
}
