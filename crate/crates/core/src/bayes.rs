//! Bayesian quantum Cramér-Rao bounds with nuisance parameters.
//!
//! With nuisance parameters Z ~ P_Z the error matrix Π is bounded by
//! E_Z[J̄⁻¹(Z)] where J̄(Z) = E_{X|Z}[J(X|Z)] + j(Z). The expectation is
//! taken after the inverse, which is never looser than inverting the
//! averaged information (Jensen).
//!
//! Nuisance draws are plain parameter vectors. Conventions used by the
//! shipped priors:
//!
//! * one source: `[N]`, the radiated photon number;
//! * two sources: `[N, N', ψ, ψ']`, photon numbers and dipole phases.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::exec::{map_chunks, merge_in_order, ExecMode, RunningStats, SimRng};
use crate::numcore::{scaled_exp_integral_e1, sym_invert, SphereQuadrature, SymMatrix};
use crate::qfi::resolved_quadrature;
use crate::radiation::{overlap_integral, SourceConfig};

/// Share of singular or clipped draws above which a Monte Carlo bound aborts.
pub const MAX_DEGENERATE_FRACTION: f64 = 0.01;

/// κ̄ values at or above `1 − KAPPA_CLIP` are clipped to it.
pub const KAPPA_CLIP: f64 = 1e-12;

pub type DrawFn = dyn Fn(&mut SimRng) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
pub enum PriorKind {
    PointMass(Vec<f64>),
    /// Exponential photon-number distribution e^{−N/N̄}/N̄, the law of N
    /// under a thermal P function.
    ThermalPhotonNumber {
        mean: f64,
    },
    DiscreteSet(Vec<(Vec<f64>, f64)>),
    Sampler(Arc<DrawFn>),
}

impl fmt::Debug for PriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorKind::PointMass(z) => f.debug_tuple("PointMass").field(z).finish(),
            PriorKind::ThermalPhotonNumber { mean } => f
                .debug_struct("ThermalPhotonNumber")
                .field("mean", mean)
                .finish(),
            PriorKind::DiscreteSet(s) => f.debug_tuple("DiscreteSet").field(s).finish(),
            PriorKind::Sampler(_) => f.write_str("Sampler(..)"),
        }
    }
}

/// Distribution of the nuisance parameters Z.
#[derive(Debug, Clone)]
pub struct NuisancePrior {
    kind: PriorKind,
    pub description: String,
}

/// Relative-phase model for two sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseModel {
    /// Fully coherent: ψ' − ψ fixed.
    Fixed(f64),
    /// Mutually incoherent: independent uniform phases.
    IndependentUniform,
}

impl NuisancePrior {
    pub fn point_mass(z: Vec<f64>) -> Self {
        let description = format!("point mass at {z:?}");
        NuisancePrior {
            kind: PriorKind::PointMass(z),
            description,
        }
    }

    pub fn thermal(mean: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "thermal mean photon number must be positive, got {mean}"
            )));
        }
        Ok(NuisancePrior {
            kind: PriorKind::ThermalPhotonNumber { mean },
            description: format!("thermal, mean photon number {mean}"),
        })
    }

    pub fn discrete(support: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidArgument(
                "discrete prior has no support".into(),
            ));
        }
        if support.iter().any(|(_, p)| !(*p >= 0.0)) {
            return Err(Error::InvalidArgument(
                "probabilities must be non-negative".into(),
            ));
        }
        let total: f64 = support.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(NuisancePrior {
            description: format!("discrete, {} points", support.len()),
            kind: PriorKind::DiscreteSet(support),
        })
    }

    pub fn sampler<F>(description: impl Into<String>, draw: F) -> Self
    where
        F: Fn(&mut SimRng) -> Vec<f64> + Send + Sync + 'static,
    {
        NuisancePrior {
            kind: PriorKind::Sampler(Arc::new(draw)),
            description: description.into(),
        }
    }

    /// Two sources with fixed photon numbers and the given phase model.
    pub fn two_source(n_a: f64, n_b: f64, phases: PhaseModel) -> Result<Self> {
        check_photons(n_a)?;
        check_photons(n_b)?;
        Ok(match phases {
            PhaseModel::Fixed(rel) => {
                let mut p = Self::point_mass(vec![n_a, n_b, 0.0, rel]);
                p.description = format!("N={n_a}, N'={n_b}, relative phase {rel}");
                p
            }
            PhaseModel::IndependentUniform => Self::sampler(
                format!("N={n_a}, N'={n_b}, independent uniform phases"),
                move |rng| {
                    let a = rng.random::<f64>() * 2.0 * PI;
                    let b = rng.random::<f64>() * 2.0 * PI;
                    vec![n_a, n_b, a, b]
                },
            ),
        })
    }

    /// Two independent thermal sources: exponential photon numbers and
    /// independent uniform phases.
    pub fn two_source_thermal(mean_a: f64, mean_b: f64) -> Result<Self> {
        check_photons(mean_a)?;
        check_photons(mean_b)?;
        if mean_a == 0.0 || mean_b == 0.0 {
            return Err(Error::InvalidArgument(
                "thermal means must be positive".into(),
            ));
        }
        Ok(Self::sampler(
            format!("independent thermal sources, N̄={mean_a}, N̄'={mean_b}"),
            move |rng| {
                let na = mean_a * rng.sample::<f64, _>(Exp1);
                let nb = mean_b * rng.sample::<f64, _>(Exp1);
                let a = rng.random::<f64>() * 2.0 * PI;
                let b = rng.random::<f64>() * 2.0 * PI;
                vec![na, nb, a, b]
            },
        ))
    }

    pub fn kind(&self) -> &PriorKind {
        &self.kind
    }

    /// Finite support with probabilities, when the prior has one.
    pub fn support(&self) -> Option<Vec<(Vec<f64>, f64)>> {
        match &self.kind {
            PriorKind::PointMass(z) => Some(vec![(z.clone(), 1.0)]),
            PriorKind::DiscreteSet(s) => Some(s.clone()),
            _ => None,
        }
    }

    pub fn draw(&self, rng: &mut SimRng) -> Vec<f64> {
        match &self.kind {
            PriorKind::PointMass(z) => z.clone(),
            PriorKind::ThermalPhotonNumber { mean } => vec![mean * rng.sample::<f64, _>(Exp1)],
            PriorKind::DiscreteSet(s) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (z, p) in s {
                    acc += p;
                    if u < acc {
                        return z.clone();
                    }
                }
                s[s.len() - 1].0.clone()
            }
            PriorKind::Sampler(f) => f(rng),
        }
    }
}

fn check_photons(n: f64) -> Result<()> {
    if n >= 0.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "photon number must be ≥ 0, got {n}"
        )))
    }
}

/// Prior Fisher information j of the wanted parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorInfo {
    pub j: SymMatrix,
}

impl PriorInfo {
    pub fn new(j: SymMatrix) -> Result<Self> {
        if j.min_eigenvalue() < -1e-12 * j.scale().max(1.0) {
            return Err(Error::InvalidArgument(
                "prior information must be positive semidefinite".into(),
            ));
        }
        Ok(PriorInfo { j })
    }

    pub fn diagonal<S: Into<String>>(labels: Vec<S>, diag: &[f64]) -> Result<Self> {
        Self::new(SymMatrix::diagonal(labels, diag)?)
    }

    pub fn zero<S: Into<String>>(labels: Vec<S>) -> Result<Self> {
        Self::new(SymMatrix::zeros(labels)?)
    }
}

/// Z ↦ E_{X|Z}[J(X|Z)] + j. The caller's `conditional_qfi` already
/// carries the average over X.
pub fn bar_qfi<F>(
    conditional_qfi: F,
    prior_info: PriorInfo,
) -> impl Fn(&[f64]) -> Result<SymMatrix> + Sync
where
    F: Fn(&[f64]) -> Result<SymMatrix> + Sync,
{
    move |z| {
        let j = conditional_qfi(z)?;
        if j.labels() != prior_info.j.labels() {
            return Err(Error::ShapeMismatch(format!(
                "QFI over {:?} but prior information over {:?}",
                j.labels(),
                prior_info.j.labels()
            )));
        }
        j.add(&prior_info.j)
    }
}

/// One-source conditional QFI: diag(N/(C_μλ₀²)) over the first `c.len()`
/// axes, with N = z[0].
pub fn one_source_conditional_qfi(
    c: Vec<f64>,
    lambda0: f64,
) -> Result<impl Fn(&[f64]) -> Result<SymMatrix> + Sync> {
    if c.is_empty() || c.len() > 3 || c.iter().any(|v| !(*v > 0.0)) || !(lambda0 > 0.0) {
        return Err(Error::InvalidArgument(
            "need 1–3 positive C constants and a positive wavelength".into(),
        ));
    }
    let labels: Vec<&'static str> = ["x", "y", "z"][..c.len()].to_vec();
    Ok(move |z: &[f64]| {
        let n = *z
            .first()
            .ok_or_else(|| Error::ShapeMismatch("one-source draw needs [N]".into()))?;
        let diag: Vec<f64> = c.iter().map(|cm| n / (cm * lambda0 * lambda0)).collect();
        SymMatrix::diagonal(labels.clone(), &diag)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesBoundReport {
    /// Estimate of E_Z[J̄⁻¹(Z)], a lower bound on Π.
    pub bound: SymMatrix,
    /// Draws used (support size for exact priors).
    pub n_samples: usize,
    /// Monte Carlo standard error per entry; zero for exact priors.
    pub std_error: SymMatrix,
    pub seed: u64,
    /// Draws dropped because J̄ was singular.
    pub singular_draws: usize,
    /// Draws whose κ̄ was clipped below 1.
    pub clipped_draws: usize,
}

enum Outcome {
    Value(Vec<f64>),
    Clipped(Vec<f64>),
    Excluded,
}

struct Moments {
    stats: Vec<RunningStats>,
    n: usize,
    excluded: usize,
    clipped: usize,
    exact: bool,
}

#[derive(Default)]
struct ChunkAcc {
    stats: Vec<RunningStats>,
    excluded: usize,
    clipped: usize,
    err: Option<Error>,
}

/// Expectation of a vector-valued summand over the prior, exactly for
/// finite supports and by chunked Monte Carlo otherwise.
fn expectation<F>(
    prior: &NuisancePrior,
    width: usize,
    n_samples: usize,
    seed: u64,
    mode: ExecMode,
    f: F,
) -> Result<Moments>
where
    F: Fn(&[f64]) -> Result<Outcome> + Sync + Send,
{
    if let Some(support) = prior.support() {
        let mut mean = vec![0.0; width];
        let (mut excluded, mut clipped) = (0, 0);
        for (z, p) in &support {
            let v = match f(z)? {
                Outcome::Value(v) => v,
                Outcome::Clipped(v) => {
                    clipped += 1;
                    v
                }
                Outcome::Excluded => {
                    excluded += 1;
                    continue;
                }
            };
            for (m, x) in mean.iter_mut().zip(&v) {
                *m += p * x;
            }
        }
        if excluded > 0 {
            return Err(Error::DegenerateDraws {
                what: "singular support points of an exact prior",
                bad: excluded,
                total: support.len(),
            });
        }
        let stats = mean
            .into_iter()
            .map(|m| {
                let mut s = RunningStats::default();
                s.push(m);
                s
            })
            .collect();
        return Ok(Moments {
            stats,
            n: support.len(),
            excluded,
            clipped,
            exact: true,
        });
    }

    if n_samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo needs at least 2 samples, got {n_samples}"
        )));
    }
    let chunks = map_chunks(mode, n_samples, seed, |_, rng, len| {
        let mut acc = ChunkAcc {
            stats: vec![RunningStats::default(); width],
            ..Default::default()
        };
        for _ in 0..len {
            let z = prior.draw(rng);
            match f(&z) {
                Ok(Outcome::Value(v)) => acc.stats.iter_mut().zip(&v).for_each(|(s, x)| s.push(*x)),
                Ok(Outcome::Clipped(v)) => {
                    acc.clipped += 1;
                    acc.stats.iter_mut().zip(&v).for_each(|(s, x)| s.push(*x));
                }
                Ok(Outcome::Excluded) => acc.excluded += 1,
                Err(e) => {
                    acc.err = Some(e);
                    break;
                }
            }
        }
        acc
    });
    let mut excluded = 0;
    let mut clipped = 0;
    for c in &chunks {
        if let Some(e) = &c.err {
            return Err(e.clone());
        }
        excluded += c.excluded;
        clipped += c.clipped;
    }
    let limit = (MAX_DEGENERATE_FRACTION * n_samples as f64).floor() as usize;
    if excluded > limit {
        return Err(Error::DegenerateDraws {
            what: "singular conditional QFI",
            bad: excluded,
            total: n_samples,
        });
    }
    if clipped > limit {
        return Err(Error::DegenerateDraws {
            what: "degradation factor clipped near 1",
            bad: clipped,
            total: n_samples,
        });
    }
    let stats = (0..width)
        .map(|k| merge_in_order(chunks.iter().map(|c| &c.stats[k])))
        .collect();
    Ok(Moments {
        stats,
        n: n_samples,
        excluded,
        clipped,
        exact: false,
    })
}

fn upper_index(dim: usize) -> Vec<(usize, usize)> {
    (0..dim)
        .flat_map(|i| (i..dim).map(move |j| (i, j)))
        .collect()
}

fn assemble(labels: &[String], idx: &[(usize, usize)], values: &[f64]) -> Result<SymMatrix> {
    let n = labels.len();
    let mut rows = vec![vec![0.0; n]; n];
    for (&(i, j), &v) in idx.iter().zip(values) {
        rows[i][j] = v;
        rows[j][i] = v;
    }
    SymMatrix::new(labels.to_vec(), &rows)
}

/// E_Z[J̄⁻¹(Z)] with per-entry standard errors. Singular J̄ draws are
/// dropped and counted; more than 1% aborts.
pub fn bound_with_nuisance<F>(
    prior: &NuisancePrior,
    bar_j: F,
    n_samples: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<BayesBoundReport>
where
    F: Fn(&[f64]) -> Result<SymMatrix> + Sync + Send,
{
    // Labels from a representative draw.
    let probe = match prior.support() {
        Some(s) => s[0].0.clone(),
        None => prior.draw(&mut crate::exec::chunk_rng(seed, usize::MAX)),
    };
    let labels = bar_j(&probe)?.labels().to_vec();
    let idx = upper_index(labels.len());
    let m = expectation(prior, idx.len(), n_samples, seed, mode, |z| {
        let j = bar_j(z)?;
        if j.labels() != labels.as_slice() {
            return Err(Error::ShapeMismatch(
                "conditional QFI labels changed between draws".into(),
            ));
        }
        match sym_invert(&j) {
            Ok(inv) => Ok(Outcome::Value(
                idx.iter().map(|&(a, b)| inv.get(a, b)).collect(),
            )),
            Err(Error::Singular { .. }) => Ok(Outcome::Excluded),
            Err(e) => Err(e),
        }
    })?;
    let means: Vec<f64> = m.stats.iter().map(|s| s.mean).collect();
    let errs: Vec<f64> = m
        .stats
        .iter()
        .map(|s| if m.exact { 0.0 } else { s.std_error() })
        .collect();
    Ok(BayesBoundReport {
        bound: assemble(&labels, &idx, &means)?,
        n_samples: m.n,
        std_error: assemble(&labels, &idx, &errs)?,
        seed,
        singular_draws: m.excluded,
        clipped_draws: m.clipped,
    })
}

/// Both sides of Jensen's inequality for a scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenGap {
    /// E[1/J̄]
    pub after_inverse: f64,
    /// 1/E[J̄]
    pub before_inverse: f64,
}

pub fn jensen_gap<F>(
    prior: &NuisancePrior,
    bar_j: F,
    n_samples: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<JensenGap>
where
    F: Fn(&[f64]) -> Result<SymMatrix> + Sync + Send,
{
    let m = expectation(prior, 2, n_samples, seed, mode, |z| {
        let j = bar_j(z)?;
        if j.dim() != 1 {
            return Err(Error::ShapeMismatch(format!(
                "Jensen comparison needs a scalar parameter, got dimension {}",
                j.dim()
            )));
        }
        let v = j.get(0, 0);
        if v <= 0.0 {
            return Ok(Outcome::Excluded);
        }
        Ok(Outcome::Value(vec![1.0 / v, v]))
    })?;
    Ok(JensenGap {
        after_inverse: m.stats[0].mean,
        before_inverse: 1.0 / m.stats[1].mean,
    })
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

/// E[1/(N/(Cλ₀²) + j)] for exponential N with mean N̄:
/// (Cλ₀²/N̄)·e^{a/N̄}E₁(a/N̄), a = Cλ₀²j.
///
/// j = 0 is rejected: the integral diverges logarithmically.
pub fn thermal_bound_closed_form(n_bar: f64, c_mu: f64, lambda0: f64, j_mumu: f64) -> Result<f64> {
    check_positive("mean photon number", n_bar)?;
    check_positive("C", c_mu)?;
    check_positive("wavelength", lambda0)?;
    check_positive("prior information j", j_mumu)?;
    let scale = c_mu * lambda0 * lambda0;
    let a = scale * j_mumu;
    Ok(scale / n_bar * scaled_exp_integral_e1(a / n_bar)?)
}

/// Large-N̄ asymptote (Cλ₀²/N̄)·ln(N̄/(Cλ₀²j)).
pub fn thermal_bound_asymptote(n_bar: f64, c_mu: f64, lambda0: f64, j_mumu: f64) -> Result<f64> {
    check_positive("mean photon number", n_bar)?;
    check_positive("C", c_mu)?;
    check_positive("wavelength", lambda0)?;
    check_positive("prior information j", j_mumu)?;
    let scale = c_mu * lambda0 * lambda0;
    Ok(scale / n_bar * (n_bar / (scale * j_mumu)).ln())
}

/// How J_xx' is averaged over the source positions X.
#[derive(Debug, Clone, PartialEq)]
pub enum PositionAveraging {
    /// Positions known: J̄_xx' = J_xx' at the given geometry.
    Fixed,
    /// Weighted displacements added to the second source's position.
    Discrete(Vec<([f64; 3], f64)>),
}

/// Positions and orientations of two sources; photon numbers and phases
/// come from the nuisance prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSourceGeometry {
    pub a: SourceConfig,
    pub b: SourceConfig,
}

impl TwoSourceGeometry {
    pub fn new(a: SourceConfig, b: SourceConfig) -> Self {
        TwoSourceGeometry { a, b }
    }
}

/// Per-photon pieces of the two-source QFI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitTwoSourceQfi {
    pub j_xx: f64,
    pub j_pp: f64,
    /// Complex overlap 4k₀²∫k̂x²α*α' for unit photon numbers and zero phases,
    /// averaged over positions.
    pub j_xp: Complex64,
}

impl UnitTwoSourceQfi {
    pub fn compute(
        g: &TwoSourceGeometry,
        averaging: &PositionAveraging,
        q: &SphereQuadrature,
    ) -> Result<Self> {
        let unit = |s: &SourceConfig| -> Result<SourceConfig> {
            SourceConfig::new(
                s.position(),
                s.dipole.with_photon_number(1.0)?.with_phase(0.0),
            )
        };
        let a = unit(&g.a)?;
        let b = unit(&g.b)?;
        let factor = 16.0 * PI * PI;
        let wx = |k: &[f64; 3]| k[0] * k[0];
        let j_xx = factor * overlap_integral(&a, &a, wx, q)?.re;
        let j_pp = factor * overlap_integral(&b, &b, wx, q)?.re;
        let cross = |b: &SourceConfig| -> Result<Complex64> {
            let q = resolved_quadrature(q, a.distance_to(b))?;
            Ok(factor * overlap_integral(&a, b, wx, &q)?)
        };
        let j_xp = match averaging {
            PositionAveraging::Fixed => cross(&b)?,
            PositionAveraging::Discrete(points) => {
                let total: f64 = points.iter().map(|(_, w)| w).sum();
                if points.is_empty()
                    || (total - 1.0).abs() > 1e-12
                    || points.iter().any(|(_, w)| *w < 0.0)
                {
                    return Err(Error::InvalidArgument(
                        "position averaging weights must be non-negative and sum to 1".into(),
                    ));
                }
                let mut acc = Complex64::ZERO;
                for (shift, w) in points {
                    let p = b.position();
                    let moved = SourceConfig::new(
                        [p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]],
                        b.dipole,
                    )?;
                    acc += *w * cross(&moved)?;
                }
                acc
            }
        };
        Ok(UnitTwoSourceQfi { j_xx, j_pp, j_xp })
    }

    /// (J̄_xx, J̄_x'x', J̄_xx') for a draw `[N, N', ψ, ψ']`.
    pub fn at(&self, z: &[f64], prior_info: &PriorInfo) -> Result<(f64, f64, f64)> {
        if z.len() != 4 {
            return Err(Error::ShapeMismatch(format!(
                "two-source draw needs [N, N', ψ, ψ'], got {} values",
                z.len()
            )));
        }
        let (na, nb, pa, pb) = (z[0], z[1], z[2], z[3]);
        let jxx = na * self.j_xx + prior_info.j.get(0, 0);
        let jpp = nb * self.j_pp + prior_info.j.get(1, 1);
        let jxp = (na * nb).sqrt() * (self.j_xp * Complex64::from_polar(1.0, pb - pa)).re
            + prior_info.j.get(0, 1);
        Ok((jxx, jpp, jxp))
    }
}

/// Monte Carlo estimate of E_{(p₀,p₀')}{1/(J̄_xx[1 − κ̄])}.
#[allow(clippy::too_many_arguments)]
pub fn two_source_partial_coherence_bound(
    geometry: &TwoSourceGeometry,
    prior: &NuisancePrior,
    prior_info: &PriorInfo,
    averaging: &PositionAveraging,
    n_samples: usize,
    seed: u64,
    q: &SphereQuadrature,
    mode: ExecMode,
) -> Result<BayesBoundReport> {
    if prior_info.j.dim() != 2 {
        return Err(Error::ShapeMismatch(
            "prior information must be 2x2 over (x, x')".into(),
        ));
    }
    let unit = UnitTwoSourceQfi::compute(geometry, averaging, q)?;
    let m = expectation(prior, 1, n_samples, seed, mode, |z| {
        let (jxx, jpp, jxp) = unit.at(z, prior_info)?;
        if !(jxx > 0.0 && jpp > 0.0) {
            return Ok(Outcome::Excluded);
        }
        let kappa = jxp * jxp / (jxx * jpp);
        if kappa >= 1.0 - KAPPA_CLIP {
            Ok(Outcome::Clipped(vec![1.0 / (jxx * KAPPA_CLIP)]))
        } else {
            Ok(Outcome::Value(vec![1.0 / (jxx * (1.0 - kappa))]))
        }
    })?;
    let se = if m.exact { 0.0 } else { m.stats[0].std_error() };
    Ok(BayesBoundReport {
        bound: SymMatrix::diagonal(vec!["x"], &[m.stats[0].mean])?,
        n_samples: m.n,
        std_error: SymMatrix::diagonal(vec!["x"], &[se])?,
        seed,
        singular_draws: m.excluded,
        clipped_draws: m.clipped,
    })
}
