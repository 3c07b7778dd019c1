//! Gaussian measurement simulators used to check that the bounds are both
//! respected and reached by concrete estimators.
//!
//! Positions and widths here are in units of λ₀ (k₀ = 2π).
//!
//! Homodyne: the matched quadrature of axis μ responds linearly to a
//! displacement δ with mean √2·δ/W_μ, so inverting the outcome gives an
//! unbiased estimate with MSE (W_μ²/2)⟨ΔQ²⟩.
//!
//! Heterodyne: the far-field shell is cut into quadrature cells, each with
//! two transverse polarizations. Cell (i, s) carries the coherent amplitude
//!
//! ```text
//! α_{i,s}(r) = Σ_a √(w_i N_a 3/8π) e^{iψ_a} (ε_s·p̂_a) e^{−i2πk̂_i·r_a}
//! ```
//!
//! plus complex Gaussian noise of unit variance (½ per quadrature). The
//! estimate is weighted least squares on the linearized model, which is the
//! maximum-likelihood estimate when the mean is linear in the parameters.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exec::{map_chunks, merge_in_order, ExecMode, RunningStats};
use crate::numcore::{sym_invert, SphereQuadrature, SymMatrix};
use crate::qfi::squeeze_factor;
use crate::radiation::{overlap_integral, transverse_basis, SourceConfig};

/// Largest displacement from the reference position, in λ₀, for which the
/// linear response is trusted.
pub const LINEAR_REGIME: f64 = 0.05;

/// Finite-difference step for `fisher_of_gaussian_model`, in λ₀.
pub const FD_STEP: f64 = 1e-6;

/// Allowed relative disagreement between the step-h gradient and its
/// Richardson extrapolation from h and 2h.
pub const RICHARDSON_TOL: f64 = 1e-6;

const PATTERN_NORM: f64 = 3.0 / (8.0 * PI);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        ["x", "y", "z"][self.index()]
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            _ => Err(Error::InvalidArgument(format!(
                "axis must be x, y or z, got {s:?}"
            ))),
        }
    }
}

/// Outcome of a Monte Carlo estimation experiment for one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub parameter: String,
    pub trials: usize,
    pub empirical_mse: f64,
    /// Standard error of the MSE from the sample variance of squared errors.
    pub mse_std_error: f64,
    /// Error floor predicted for this measurement (its inverse classical
    /// Fisher information).
    pub bound_compared: f64,
    /// Quantum Cramér-Rao bound for the same scenario.
    pub qcrb: f64,
    pub seed: u64,
}

impl SimReport {
    fn from_stats(
        parameter: String,
        s: &RunningStats,
        bound_compared: f64,
        qcrb: f64,
        seed: u64,
    ) -> Self {
        SimReport {
            parameter,
            trials: s.count as usize,
            empirical_mse: s.mean,
            mse_std_error: s.std_error(),
            bound_compared,
            qcrb,
            seed,
        }
    }

    /// Distance of the MSE from `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.empirical_mse - target) / self.mse_std_error
    }

    /// The MSE does not undercut the QCRB by more than `sigmas` standard errors.
    pub fn respects_qcrb(&self, sigmas: f64) -> bool {
        self.empirical_mse >= self.qcrb - sigmas * self.mse_std_error
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 trials for an error estimate, got {trials}"
        )));
    }
    Ok(())
}

fn check_offset(norm: f64) -> Result<()> {
    if !(norm <= LINEAR_REGIME) {
        return Err(Error::Domain(format!(
            "offset {norm} λ₀ is outside the linear regime (≤ {LINEAR_REGIME} λ₀)"
        )));
    }
    Ok(())
}

/// Homodyne detection of the quadrature matched to a displacement along
/// `axis` near `reference_position`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureModel {
    pub axis: Axis,
    /// Mode width W_μ in λ₀.
    pub w: f64,
    pub reference_position: [f64; 3],
    quadrature_variance: f64,
    n0: f64,
}

impl QuadratureModel {
    /// `quadrature_variance` must respect the floor f(N₀)/2.
    pub fn new(
        axis: Axis,
        w: f64,
        reference_position: [f64; 3],
        quadrature_variance: f64,
        n0: f64,
    ) -> Result<Self> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "mode width must be positive, got {w}"
            )));
        }
        let floor = squeeze_factor(n0)? / 2.0;
        if !(quadrature_variance >= floor * (1.0 - 1e-12)) {
            return Err(Error::InvalidArgument(format!(
                "quadrature variance {quadrature_variance} below the floor {floor} for N₀ = {n0}"
            )));
        }
        Ok(QuadratureModel {
            axis,
            w,
            reference_position,
            quadrature_variance,
            n0,
        })
    }

    pub fn vacuum(axis: Axis, w: f64, reference_position: [f64; 3]) -> Result<Self> {
        Self::new(axis, w, reference_position, 0.5, 0.0)
    }

    /// Optimally squeezed with N₀ photons: ⟨ΔQ²⟩ = f(N₀)/2.
    pub fn squeezed(axis: Axis, w: f64, reference_position: [f64; 3], n0: f64) -> Result<Self> {
        let v = squeeze_factor(n0)? / 2.0;
        Self::new(axis, w, reference_position, v, n0)
    }

    pub fn quadrature_variance(&self) -> f64 {
        self.quadrature_variance
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    /// (W²/2)⟨ΔQ²⟩.
    pub fn predicted_mse(&self) -> f64 {
        self.w * self.w * self.quadrature_variance / 2.0
    }

    /// (W²/4) f(N₀).
    pub fn qcrb(&self) -> f64 {
        self.w * self.w / 4.0 * squeeze_factor(self.n0).unwrap_or(1.0)
    }
}

pub fn simulate_homodyne(
    m: &QuadratureModel,
    truth_offset: f64,
    trials: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<SimReport> {
    check_trials(trials)?;
    check_offset(truth_offset.abs())?;
    let sigma = m.quadrature_variance.sqrt();
    let mean = SQRT_2 * truth_offset / m.w;
    let chunks = map_chunks(mode, trials, seed, |_, rng, len| {
        let mut s = RunningStats::default();
        for _ in 0..len {
            let xi: f64 = rng.sample(StandardNormal);
            let outcome = mean + sigma * xi;
            let estimate = m.w * outcome / SQRT_2;
            let err = estimate - truth_offset;
            s.push(err * err);
        }
        s
    });
    let stats = merge_in_order(chunks.iter());
    Ok(SimReport::from_stats(
        m.axis.label().to_string(),
        &stats,
        m.predicted_mse(),
        m.qcrb(),
        seed,
    ))
}

/// Real Gaussian outcome model Y ~ N(mean(θ), diag(σ²)).
pub trait GaussianModel: Sync {
    fn parameter_labels(&self) -> Vec<String>;
    /// Point at which the Fisher information is evaluated.
    fn parameters(&self) -> Vec<f64>;
    fn mean(&self, theta: &[f64]) -> Result<Vec<f64>>;
    fn noise_variances(&self) -> Vec<f64>;
}

impl GaussianModel for QuadratureModel {
    fn parameter_labels(&self) -> Vec<String> {
        vec![self.axis.label().to_string()]
    }

    fn parameters(&self) -> Vec<f64> {
        vec![self.reference_position[self.axis.index()]]
    }

    fn mean(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let r0 = self.reference_position[self.axis.index()];
        Ok(vec![SQRT_2 * (theta[0] - r0) / self.w])
    }

    fn noise_variances(&self) -> Vec<f64> {
        vec![self.quadrature_variance]
    }
}

fn central_difference<M: GaussianModel + ?Sized>(
    model: &M,
    theta: &[f64],
    k: usize,
    h: f64,
) -> Result<Vec<f64>> {
    let mut plus = theta.to_vec();
    let mut minus = theta.to_vec();
    plus[k] += h;
    minus[k] -= h;
    let mp = model.mean(&plus)?;
    let mm = model.mean(&minus)?;
    Ok(mp
        .iter()
        .zip(&mm)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// j = Σ_m ∂_p mean_m ∂_q mean_m / σ_m², with gradients by central
/// differences of step [`FD_STEP`], each checked against the Richardson
/// extrapolation from steps h and 2h.
pub fn fisher_of_gaussian_model<M: GaussianModel + ?Sized>(model: &M) -> Result<SymMatrix> {
    let var = model.noise_variances();
    if let Some(bad) = var.iter().copied().find(|v| !(*v > 0.0)) {
        return Err(Error::Singular {
            min_eigenvalue: bad,
        });
    }
    let theta = model.parameters();
    let mut grads = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        let g1 = central_difference(model, &theta, k, FD_STEP)?;
        let g2 = central_difference(model, &theta, k, 2.0 * FD_STEP)?;
        if g1.len() != var.len() {
            return Err(Error::ShapeMismatch(format!(
                "mean has {} outcomes but {} noise variances",
                g1.len(),
                var.len()
            )));
        }
        let rich: Vec<f64> = g1
            .iter()
            .zip(&g2)
            .map(|(a, b)| (4.0 * a - b) / 3.0)
            .collect();
        let diff: Vec<f64> = g1.iter().zip(&rich).map(|(a, b)| a - b).collect();
        let scale = norm(&rich);
        if norm(&diff) > RICHARDSON_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::IllConditioned(format!(
                "finite-difference gradient for parameter {k} disagrees with its Richardson extrapolation"
            )));
        }
        grads.push(g1);
    }
    let n = theta.len();
    let mut rows = vec![vec![0.0; n]; n];
    for p in 0..n {
        for q in p..n {
            let v: f64 = grads[p]
                .iter()
                .zip(&grads[q])
                .zip(&var)
                .map(|((a, b), s)| a * b / s)
                .sum();
            rows[p][q] = v;
            rows[q][p] = v;
        }
    }
    SymMatrix::new(model.parameter_labels(), &rows)
}

/// Coordinate `axis` of source `source`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Parameter {
    pub source: usize,
    pub axis: Axis,
}

/// Mode-resolved heterodyne detection of one or more sources.
#[derive(Debug, Clone)]
pub struct HeterodyneModel {
    sources: Vec<SourceConfig>,
    params: Vec<Parameter>,
    truth_offsets: Vec<[f64; 3]>,
    q: SphereQuadrature,
    refine_iterations: usize,
    /// Position-independent prefactor per source per mode, index 2i+s.
    coupling: Vec<Vec<Complex64>>,
}

impl HeterodyneModel {
    /// `sources` sit at their reference positions; `params` lists the
    /// coordinates to estimate. The truth defaults to the reference.
    pub fn new(
        sources: Vec<SourceConfig>,
        params: Vec<Parameter>,
        q: SphereQuadrature,
    ) -> Result<Self> {
        if sources.is_empty() || params.is_empty() {
            return Err(Error::InvalidArgument(
                "need at least one source and one parameter".into(),
            ));
        }
        for (i, p) in params.iter().enumerate() {
            if p.source >= sources.len() {
                return Err(Error::InvalidArgument(format!(
                    "parameter refers to missing source {}",
                    p.source
                )));
            }
            if params[..i].contains(p) {
                return Err(Error::InvalidArgument("duplicate parameter".into()));
            }
        }
        let coupling = sources
            .iter()
            .map(|src| {
                let pol = src.dipole.polarization();
                let pc = pol.components();
                let amp = (src.dipole.photon_number() * PATTERN_NORM).sqrt();
                let phase = Complex64::from_polar(1.0, src.dipole.phase);
                let mut c = Vec::with_capacity(2 * q.len());
                for (node, w) in q.iter() {
                    for eps in transverse_basis(node.theta, node.phi) {
                        let proj = pc[0] * eps[0] + pc[1] * eps[1] + pc[2] * eps[2];
                        c.push(w.sqrt() * amp * phase * proj);
                    }
                }
                c
            })
            .collect();
        let n = sources.len();
        Ok(HeterodyneModel {
            sources,
            params,
            truth_offsets: vec![[0.0; 3]; n],
            q,
            refine_iterations: 0,
            coupling,
        })
    }

    /// One source, one coordinate.
    pub fn single_source(source: SourceConfig, axis: Axis, q: SphereQuadrature) -> Result<Self> {
        Self::new(vec![source], vec![Parameter { source: 0, axis }], q)
    }

    /// True positions are reference + offset; each offset must lie in the
    /// linear regime.
    pub fn with_truth_offsets(mut self, offsets: Vec<[f64; 3]>) -> Result<Self> {
        if offsets.len() != self.sources.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} offsets for {} sources",
                offsets.len(),
                self.sources.len()
            )));
        }
        for o in &offsets {
            check_offset(norm(o))?;
        }
        self.truth_offsets = offsets;
        Ok(self)
    }

    /// Gauss-Newton steps applied after the linear estimate. Zero (the
    /// default) is exact maximum likelihood in the linear regime.
    pub fn with_refinement(mut self, iterations: usize) -> Self {
        self.refine_iterations = iterations;
        self
    }

    pub fn quadrature(&self) -> &SphereQuadrature {
        &self.q
    }

    pub fn n_modes(&self) -> usize {
        2 * self.q.len()
    }

    pub fn labels(&self) -> Vec<String> {
        self.params
            .iter()
            .map(|p| {
                if self.sources.len() == 1 {
                    p.axis.label().to_string()
                } else {
                    format!("{}{}", p.axis.label(), "'".repeat(p.source))
                }
            })
            .collect()
    }

    fn reference_positions(&self) -> Vec<[f64; 3]> {
        self.sources.iter().map(|s| s.position()).collect()
    }

    fn true_positions(&self) -> Vec<[f64; 3]> {
        self.sources
            .iter()
            .zip(&self.truth_offsets)
            .map(|(s, o)| {
                let p = s.position();
                [p[0] + o[0], p[1] + o[1], p[2] + o[2]]
            })
            .collect()
    }

    fn positions_with(&self, base: &[[f64; 3]], theta: &[f64]) -> Vec<[f64; 3]> {
        let mut pos = base.to_vec();
        for (p, v) in self.params.iter().zip(theta) {
            pos[p.source][p.axis.index()] = *v;
        }
        pos
    }

    fn parameter_values(&self, pos: &[[f64; 3]]) -> Vec<f64> {
        self.params
            .iter()
            .map(|p| pos[p.source][p.axis.index()])
            .collect()
    }

    /// Per-source phase factors e^{−i2πk̂·r} at every node.
    fn phases(&self, pos: &[[f64; 3]]) -> Vec<Vec<Complex64>> {
        pos.iter()
            .map(|r| {
                self.q
                    .nodes()
                    .iter()
                    .map(|n| {
                        let k = n.dir;
                        Complex64::from_polar(
                            1.0,
                            -2.0 * PI * (k[0] * r[0] + k[1] * r[1] + k[2] * r[2]),
                        )
                    })
                    .collect()
            })
            .collect()
    }

    /// Mode amplitudes at the given source positions.
    pub fn amplitudes(&self, pos: &[[f64; 3]]) -> Vec<Complex64> {
        let ph = self.phases(pos);
        let mut alpha = vec![Complex64::ZERO; self.n_modes()];
        for (c, e) in self.coupling.iter().zip(&ph) {
            for (m, a) in alpha.iter_mut().enumerate() {
                *a += c[m] * e[m / 2];
            }
        }
        alpha
    }

    /// ∂α/∂θ_p for every parameter, analytic.
    fn gradients(&self, pos: &[[f64; 3]]) -> Vec<Vec<Complex64>> {
        let ph = self.phases(pos);
        let nodes = self.q.nodes();
        self.params
            .iter()
            .map(|p| {
                let c = &self.coupling[p.source];
                let e = &ph[p.source];
                (0..self.n_modes())
                    .map(|m| {
                        let kmu = nodes[m / 2].dir[p.axis.index()];
                        Complex64::new(0.0, -2.0 * PI * kmu) * c[m] * e[m / 2]
                    })
                    .collect()
            })
            .collect()
    }

    fn design(grads: &[Vec<Complex64>]) -> DMatrix<f64> {
        let n = grads.len();
        DMatrix::from_fn(n, n, |p, q| {
            grads[p]
                .iter()
                .zip(&grads[q])
                .map(|(a, b)| (a.conj() * b).re)
                .sum()
        })
    }

    fn check_design(&self, a: &DMatrix<f64>) -> Result<()> {
        let eig = a.clone().symmetric_eigen().eigenvalues;
        let max = eig.iter().cloned().fold(0.0_f64, f64::max);
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(max > 0.0) || min <= 1e-12 * max {
            return Err(Error::IllConditioned(format!(
                "heterodyne design matrix has eigenvalues in [{min:e}, {max:e}]"
            )));
        }
        Ok(())
    }

    /// Classical Fisher information j = 2·Re(GᴴG) at the reference.
    pub fn analytic_fisher(&self) -> Result<SymMatrix> {
        let grads = self.gradients(&self.reference_positions());
        let a = Self::design(&grads);
        self.check_design(&a)?;
        SymMatrix::from_matrix(self.labels(), a * 2.0)
    }

    /// Quantum Fisher information of the same coordinates, from the shell
    /// overlap integrals J = 4k₀² Re∫ k̂_μ k̂_ν α_a* α_b.
    pub fn qfi(&self) -> Result<SymMatrix> {
        let n = self.params.len();
        let mut m = DMatrix::zeros(n, n);
        for p in 0..n {
            for r in p..n {
                let (pp, pr) = (self.params[p], self.params[r]);
                let (a, b) = (&self.sources[pp.source], &self.sources[pr.source]);
                let (i, j) = (pp.axis.index(), pr.axis.index());
                let v = 16.0 * PI * PI * overlap_integral(a, b, |k| k[i] * k[j], &self.q)?.re;
                m[(p, r)] = v;
                m[(r, p)] = v;
            }
        }
        SymMatrix::from_matrix(self.labels(), m)
    }

    fn solve_step(
        &self,
        a: &DMatrix<f64>,
        grads: &[Vec<Complex64>],
        resid: &[Complex64],
    ) -> Option<DVector<f64>> {
        let rhs = DVector::from_iterator(
            grads.len(),
            grads
                .iter()
                .map(|g| g.iter().zip(resid).map(|(x, y)| (x.conj() * y).re).sum()),
        );
        a.clone().cholesky().map(|c| c.solve(&rhs))
    }

    fn refine(&self, mut est: Vec<f64>, y: &[Complex64]) -> Vec<f64> {
        let base = self.reference_positions();
        for _ in 0..self.refine_iterations {
            let pos = self.positions_with(&base, &est);
            let alpha = self.amplitudes(&pos);
            let grads = self.gradients(&pos);
            let resid: Vec<Complex64> = y.iter().zip(&alpha).map(|(a, b)| a - b).collect();
            let Some(step) = self.solve_step(&Self::design(&grads), &grads, &resid) else {
                break;
            };
            est.iter_mut().zip(step.iter()).for_each(|(e, s)| *e += s);
        }
        est
    }
}

impl GaussianModel for HeterodyneModel {
    fn parameter_labels(&self) -> Vec<String> {
        self.labels()
    }

    fn parameters(&self) -> Vec<f64> {
        self.parameter_values(&self.reference_positions())
    }

    /// Real and imaginary parts of every mode amplitude, interleaved.
    fn mean(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let pos = self.positions_with(&self.reference_positions(), theta);
        Ok(self
            .amplitudes(&pos)
            .iter()
            .flat_map(|a| [a.re, a.im])
            .collect())
    }

    fn noise_variances(&self) -> Vec<f64> {
        vec![0.5; 2 * self.n_modes()]
    }
}

/// One report per parameter, compared with [j⁻¹]_pp; `qcrb` is [J⁻¹]_pp.
pub fn simulate_heterodyne(
    h: &HeterodyneModel,
    trials: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<Vec<SimReport>> {
    check_trials(trials)?;
    let reference = h.reference_positions();
    let grads = h.gradients(&reference);
    let a = HeterodyneModel::design(&grads);
    h.check_design(&a)?;
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::IllConditioned("design matrix not positive definite".into()))?;
    let alpha0 = h.amplitudes(&reference);
    let alpha_true = h.amplitudes(&h.true_positions());
    let theta0 = h.parameter_values(&reference);
    let theta_true = h.parameter_values(&h.true_positions());
    let signal: Vec<Complex64> = alpha_true.iter().zip(&alpha0).map(|(t, r)| t - r).collect();
    let n_par = grads.len();
    let refine = h.refine_iterations > 0;

    let chunks = map_chunks(mode, trials, seed, |_, rng, len| {
        let mut stats = vec![RunningStats::default(); n_par];
        let mut y = if refine {
            vec![Complex64::ZERO; alpha0.len()]
        } else {
            Vec::new()
        };
        for _ in 0..len {
            let mut rhs = DVector::<f64>::zeros(n_par);
            for m in 0..signal.len() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let resid = signal[m] + Complex64::new(re, im) * FRAC_1_SQRT_2;
                for p in 0..n_par {
                    rhs[p] += (grads[p][m].conj() * resid).re;
                }
                if refine {
                    y[m] = alpha0[m] + resid;
                }
            }
            let step = chol.solve(&rhs);
            let mut est: Vec<f64> = theta0.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
            if refine {
                est = h.refine(est, &y);
            }
            for p in 0..n_par {
                let e = est[p] - theta_true[p];
                stats[p].push(e * e);
            }
        }
        stats
    });

    let j = SymMatrix::from_matrix(h.labels(), a * 2.0)?;
    let j_inv = sym_invert(&j)?;
    let qfi_inv = sym_invert(&h.qfi()?)?;
    let labels = h.labels();
    Ok((0..n_par)
        .map(|p| {
            let s = merge_in_order(chunks.iter().map(|c| &c[p]));
            SimReport::from_stats(
                labels[p].clone(),
                &s,
                j_inv.get(p, p),
                qfi_inv.get(p, p),
                seed,
            )
        })
        .collect())
}
