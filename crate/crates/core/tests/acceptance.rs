//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is printed even
//! when every criterion passes. Exits non-zero if any criterion fails.
//! Every tolerance and runtime limit is pinned below.

// `ensure!` negates its condition so that NaN fails the check.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command as Process, ExitCode};
use std::time::{Duration, Instant};

use common::{kappa_oracle, rel, thermal_bound_oracle};
use qloc::bayes::{
    bar_qfi, bound_with_nuisance, jensen_gap, one_source_conditional_qfi, thermal_bound_asymptote,
    thermal_bound_closed_form, NuisancePrior, PriorInfo,
};
use qloc::cli::Command;
use qloc::numcore::{make_gauss_sphere, SphereQuadrature, SymMatrix};
use qloc::qfi::{
    centroid_separation_qfi, kappa_curve, shot_noise_bound, single_photon_qfi, single_source_qfi,
    squeeze_factor, squeezed_bound, two_source_qfi, w_constants_analytic, w_constants_numeric,
    NamedDipole, TwoSourceTemplate,
};
use qloc::radiation::{DipoleKind, DipoleSpec, Polarization, SinglePhotonSpec, SourceConfig};
use qloc::simulate::{
    fisher_of_gaussian_model, simulate_heterodyne, simulate_homodyne, Axis, HeterodyneModel,
    QuadratureModel, SimReport,
};
use qloc::ExecMode;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn q64() -> SphereQuadrature {
    make_gauss_sphere(64, 128).unwrap()
}

fn kappa_at(d: f64, phase: f64, q: &SphereQuadrature) -> f64 {
    let (a, b) = TwoSourceTemplate::x_dipoles_along_x(phase)
        .sources(d)
        .unwrap();
    two_source_qfi(&a, &b, q).unwrap().kappa
}

/// 1. Mode widths from quadrature equal the closed forms.
fn analytic_constants() -> Check {
    const TOL: f64 = 1e-10;
    let q = q64();
    let n = 2.0e4;
    let mut worst: f64 = 0.0;
    for (named, spec) in [
        (NamedDipole::LinearZ, DipoleSpec::linear_z(n).unwrap()),
        (NamedDipole::CircularXY, DipoleSpec::circular_xy(n).unwrap()),
    ] {
        let base = 1.0 / (2.0 * PI * n.sqrt());
        let expected = match named {
            NamedDipole::LinearZ => [2.5_f64.sqrt(), 2.5_f64.sqrt(), 5.0_f64.sqrt()],
            NamedDipole::CircularXY => [
                (10.0_f64 / 3.0).sqrt(),
                (10.0_f64 / 3.0).sqrt(),
                2.5_f64.sqrt(),
            ],
        }
        .map(|c| c * base);
        let numeric = w_constants_numeric(&spec, &q, 1.0).unwrap();
        let analytic = w_constants_analytic(named, n, 1.0).unwrap();
        for mu in 0..3 {
            worst = worst
                .max(rel(numeric[mu], expected[mu]))
                .max(rel(analytic[mu], expected[mu]));
        }
    }
    ensure!(worst <= TOL, "max relative error {worst:e} > {TOL:e}");
    Ok(format!("max relative error {worst:.1e}"))
}

/// 2. λ₀ = 520 nm / 1.52, N = 2×10⁴ gives a 0.385 nm base scale.
fn worked_example() -> Check {
    let lambda0 = 520.0 / 1.52;
    let b = shot_noise_bound(&DipoleSpec::linear_z(2.0e4).unwrap(), lambda0, None).unwrap();
    let s = b.base_scale();
    let three_sig = (s * 1000.0).round() / 1000.0;
    ensure!(
        three_sig == 0.385,
        "base scale {s} nm rounds to {three_sig}"
    );
    let rounded = shot_noise_bound(&DipoleSpec::linear_z(2.0e4).unwrap(), 342.0, None)
        .unwrap()
        .base_scale();
    ensure!(
        (rounded * 1e4).round() == 3849.0,
        "λ₀ = 342 nm gives {rounded}"
    );
    Ok(format!(
        "base scale {s:.4} nm (λ₀ = {lambda0:.1} nm), {rounded:.4} nm at 342 nm"
    ))
}

/// 3. Degradation factor curve.
fn kappa_curve_shape() -> Check {
    const UNITY: f64 = 1e-9;
    const PHASE_FLIP: f64 = 1e-9;
    const GOLDEN_REL: f64 = 1e-6;
    const CROSSING: f64 = 0.310_726_028;
    const CROSSING_TOL: f64 = 1e-6;
    const LAST_CROSSING: f64 = 0.975_039_354;
    const RUNTIME: Duration = Duration::from_secs(10);
    // 50-digit values of [(15/4)∫u²(1−u²)cos(2πdu)du]²
    const GOLDEN: [(f64, f64); 4] = [
        (0.25, 0.279_420_154_679_824_13),
        (0.5, 0.107_622_741_079_567_81),
        (1.0, 0.069_940_222_590_806_218),
        (2.0, 0.007_703_632_740_274_494_4),
    ];
    let q = q64();

    let k0 = kappa_at(0.0, 0.0, &q);
    ensure!((k0 - 1.0).abs() <= UNITY, "κ(0) = {k0}");

    for i in 0..=40 {
        let d = 0.075 * i as f64;
        let (a, b) = (kappa_at(d, 0.0, &q), kappa_at(d, PI, &q));
        ensure!(
            (a - b).abs() <= PHASE_FLIP,
            "in/out of phase differ at d={d}: {a} vs {b}"
        );
    }

    for (d, g) in GOLDEN {
        let k = kappa_at(d, 0.0, &q);
        ensure!(rel(k, g) <= GOLDEN_REL, "κ({d}) = {k}, golden {g}");
        ensure!(
            rel(kappa_oracle(d), g) <= GOLDEN_REL,
            "oracle disagrees with golden at {d}"
        );
    }

    // First drop below 0.1, located by bisection on the library κ.
    let (mut lo, mut hi) = (0.25, 0.35);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if kappa_at(mid, 0.0, &q) > 0.1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ensure!(
        (lo - CROSSING).abs() <= CROSSING_TOL,
        "first crossing at {lo}, oracle {CROSSING}"
    );

    // Stays small far from coincidence: below 0.1 past the last crossing
    // and below 0.01 from 2λ₀ on.
    for i in 0..=200 {
        let d = LAST_CROSSING + 1e-3 + 0.045 * i as f64;
        let k = kappa_at(d, 0.0, &q);
        ensure!(k < 0.1, "κ({d}) = {k} ≥ 0.1");
        if d >= 2.0 {
            ensure!(k < 0.01, "κ({d}) = {k} ≥ 0.01");
        }
    }

    let t = Instant::now();
    let seps: Vec<f64> = (0..81).map(|i| 2.0 * i as f64 / 80.0).collect();
    let curve = kappa_curve(
        &TwoSourceTemplate::x_dipoles_along_x(0.0),
        &seps,
        &q,
        ExecMode::default(),
    )
    .unwrap();
    let elapsed = t.elapsed();
    ensure!(curve.len() == 81, "curve has {} points", curve.len());
    ensure!(elapsed < RUNTIME, "81-point curve took {elapsed:?}");
    Ok(format!(
        "first crossing {lo:.9} λ₀, 81-point curve in {:.2} s",
        elapsed.as_secs_f64()
    ))
}

/// 4. Quadrature-phase sources do not interfere.
fn quadrature_phase() -> Check {
    const TOL: f64 = 1e-9;
    let q = q64();
    let worst = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0]
        .iter()
        .map(|&d| kappa_at(d, PI / 2.0, &q))
        .fold(0.0_f64, f64::max);
    ensure!(worst <= TOL, "max κ at relative phase π/2 is {worst:e}");
    Ok(format!("max κ {worst:.1e}"))
}

/// 5. Centroid and separation decouple for an in-phase symmetric pair.
fn centroid_separation() -> Check {
    const TOL: f64 = 1e-10;
    let q = q64();
    let mut worst: f64 = 0.0;
    for d in [0.05, 0.2, 0.5, 1.0, 3.0] {
        let (a, b) = TwoSourceTemplate::x_dipoles_along_x(0.0)
            .sources(d)
            .unwrap();
        let cs = centroid_separation_qfi(&two_source_qfi(&a, &b, &q).unwrap()).unwrap();
        let scale = cs.get(0, 0).abs().max(cs.get(1, 1).abs());
        worst = worst.max(cs.get(0, 1).abs() / scale);
    }
    ensure!(worst <= TOL, "off-diagonal / diagonal = {worst:e}");
    Ok(format!("max off-diagonal ratio {worst:.1e}"))
}

/// 6. One photon from a decaying emitter carries the N = 1 classical QFI.
fn single_photon() -> Check {
    const TOL: f64 = 1e-8;
    let q = q64();
    let mut worst: f64 = 0.0;
    for (pol, kind) in [
        (Polarization::z(), DipoleKind::LinearZ),
        (Polarization::circular_xy(), DipoleKind::CircularXY),
    ] {
        let sp = single_photon_qfi(&SinglePhotonSpec::new(pol, 1e-3).unwrap(), &q, 1.0).unwrap();
        let cl = single_source_qfi(&DipoleSpec::new(kind, 1.0, 0.0).unwrap(), &q, 1.0).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                worst = worst.max((sp.get(i, k) - cl.get(i, k)).abs() / cl.scale());
            }
        }
    }
    ensure!(worst <= TOL, "relative difference {worst:e}");
    Ok(format!("max relative difference {worst:.1e}"))
}

/// 7. Squeezing factor.
fn squeezing() -> Check {
    const ASYMPTOTE_TOL: f64 = 0.01;
    let f0 = squeeze_factor(0.0).unwrap();
    ensure!(f0 == 1.0, "f(0) = {f0}");
    let f100 = squeeze_factor(100.0).unwrap();
    ensure!(rel(f100, 1.0 / 400.0) <= ASYMPTOTE_TOL, "f(100) = {f100}");
    let b = shot_noise_bound(&DipoleSpec::linear_z(2.0e4).unwrap(), 342.0, None).unwrap();
    for n0 in [0.0, 0.5, 1.0, 10.0, 100.0, 1e6] {
        let f = squeeze_factor(n0).unwrap();
        let s = squeezed_bound(&b, n0).unwrap();
        let expected = b.qcrb_diag.map(|v| v * f);
        ensure!(
            s == expected,
            "squeezed bound not shot-noise × f at N₀={n0}"
        );
    }
    Ok(format!("f(0) = 1, f(100) = {f100:.7}"))
}

/// 8. Thermal-source Bayesian bound.
fn thermal_bound() -> Check {
    const ORACLE_REL: f64 = 1e-8;
    const ASYMPTOTE_REL: f64 = 0.10;
    const SIGMAS: f64 = 3.0;
    const SAMPLES: usize = 100_000;
    const RUNTIME: Duration = Duration::from_secs(30);
    let t = Instant::now();

    // 3×3 grid of (N̄, a) with a = Cλ₀²j; C = λ₀ = 1 so j = a.
    let mut worst: f64 = 0.0;
    for n_bar in [10.0, 1e3, 1e5] {
        for a in [0.1, 1.0, 10.0] {
            let cf = thermal_bound_closed_form(n_bar, 1.0, 1.0, a).unwrap();
            worst = worst.max(rel(cf, thermal_bound_oracle(n_bar, 1.0, 1.0, a)));
        }
    }
    ensure!(
        worst <= ORACLE_REL,
        "closed form vs direct integral {worst:e}"
    );

    let cf = thermal_bound_closed_form(1e4, 1.0, 1.0, 1.0).unwrap();
    let asym = thermal_bound_asymptote(1e4, 1.0, 1.0, 1.0).unwrap();
    ensure!(
        rel(cf, asym) <= ASYMPTOTE_REL,
        "asymptote off by {:.3}",
        rel(cf, asym)
    );

    let (n_bar, c, lambda0, j) = (200.0, 0.0127, 1.0, 50.0);
    let prior = NuisancePrior::thermal(n_bar).unwrap();
    let barj = bar_qfi(
        one_source_conditional_qfi(vec![c], lambda0).unwrap(),
        PriorInfo::diagonal(vec!["x"], &[j]).unwrap(),
    );
    let r = bound_with_nuisance(&prior, barj, SAMPLES, 2024, ExecMode::default()).unwrap();
    let exact = thermal_bound_closed_form(n_bar, c, lambda0, j).unwrap();
    let z = (r.bound.get(0, 0) - exact) / r.std_error.get(0, 0);
    ensure!(
        z.abs() <= SIGMAS,
        "Monte Carlo {} vs closed form {exact}: z = {z:.2}",
        r.bound.get(0, 0)
    );
    let elapsed = t.elapsed();
    ensure!(elapsed < RUNTIME, "took {elapsed:?}");
    Ok(format!(
        "oracle {worst:.1e}, asymptote ratio {:.4}, MC z = {z:+.2}",
        cf / asym
    ))
}

/// 9. Simulated estimators reach and respect the bounds.
fn simulation() -> Check {
    const TRIALS: usize = 100_000;
    const SIGMAS: f64 = 3.0;
    const IDENTITY_TOL: f64 = 1e-8;
    const RUNTIME: Duration = Duration::from_secs(60);
    let t = Instant::now();
    let mut all: Vec<SimReport> = Vec::new();

    let b = shot_noise_bound(&DipoleSpec::linear_z(1.0).unwrap(), 1.0, None).unwrap();
    let w = b.w[0];
    let vac = QuadratureModel::vacuum(Axis::X, w, [0.0; 3]).unwrap();
    let j_hom = fisher_of_gaussian_model(&vac).unwrap().get(0, 0);
    ensure!(
        rel(j_hom, 4.0 / (w * w)) <= IDENTITY_TOL,
        "homodyne Fisher {j_hom} vs 4/W²"
    );
    let r = simulate_homodyne(&vac, 0.03, TRIALS, 1, ExecMode::default()).unwrap();
    let z_vac = r.z_score(w * w / 4.0);
    ensure!(z_vac.abs() <= SIGMAS, "vacuum homodyne z = {z_vac:.2}");
    all.push(r);

    let f10 = squeeze_factor(10.0).unwrap();
    let sq = QuadratureModel::squeezed(Axis::X, w, [0.0; 3], 10.0).unwrap();
    let r = simulate_homodyne(&sq, -0.02, TRIALS, 2, ExecMode::default()).unwrap();
    let z_sq = r.z_score(w * w / 4.0 * f10);
    ensure!(z_sq.abs() <= SIGMAS, "squeezed homodyne z = {z_sq:.2}");
    all.push(r);

    let src = SourceConfig::new([0.0; 3], DipoleSpec::linear_z(1.0).unwrap()).unwrap();
    let h = HeterodyneModel::single_source(src, Axis::X, make_gauss_sphere(8, 16).unwrap())
        .unwrap()
        .with_truth_offsets(vec![[0.02, 0.0, 0.0]])
        .unwrap();
    let j_het = h.analytic_fisher().unwrap().get(0, 0);
    let big_j = 4.0 / (w * w);
    ensure!(
        rel(j_het, big_j / 2.0) <= IDENTITY_TOL,
        "heterodyne Fisher {j_het} vs J/2 = {}",
        big_j / 2.0
    );
    let r = simulate_heterodyne(&h, TRIALS, 3, ExecMode::default())
        .unwrap()
        .remove(0);
    let z_het = r.z_score(2.0 / big_j);
    ensure!(z_het.abs() <= SIGMAS, "heterodyne z = {z_het:.2}");
    all.push(r);

    for r in &all {
        ensure!(
            r.respects_qcrb(SIGMAS),
            "{} beats its QCRB: {r:?}",
            r.parameter
        );
    }
    let elapsed = t.elapsed();
    ensure!(elapsed < RUNTIME, "took {elapsed:?}");
    Ok(format!(
        "z: vacuum {z_vac:+.2}, squeezed {z_sq:+.2}, heterodyne {z_het:+.2}; {:.1} s",
        elapsed.as_secs_f64()
    ))
}

/// 10. Averaging after inversion never beats inverting the average.
fn jensen() -> Check {
    let scalar = |z: &[f64]| SymMatrix::diagonal(vec!["x"], &[z[0]]);
    let two_point = NuisancePrior::discrete(vec![(vec![4.0], 0.5), (vec![16.0], 0.5)]).unwrap();
    let g = jensen_gap(&two_point, scalar, 0, 0, ExecMode::Sequential).unwrap();
    ensure!(
        g.after_inverse == 5.0 / 32.0,
        "E[1/J] = {}",
        g.after_inverse
    );
    ensure!(
        g.before_inverse == 1.0 / 10.0,
        "1/E[J] = {}",
        g.before_inverse
    );

    let thermal = NuisancePrior::thermal(500.0).unwrap();
    let barj = bar_qfi(
        one_source_conditional_qfi(vec![0.0127], 1.0).unwrap(),
        PriorInfo::diagonal(vec!["x"], &[10.0]).unwrap(),
    );
    let g = jensen_gap(&thermal, &barj, 100_000, 5, ExecMode::default()).unwrap();
    ensure!(g.after_inverse >= g.before_inverse, "thermal: {g:?}");
    Ok(format!(
        "5/32 ≥ 1/10; thermal {:.4e} ≥ {:.4e}",
        g.after_inverse, g.before_inverse
    ))
}

/// 11. Reruns of every CLI command are byte-identical.
fn determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_qloc");
    for cmd in Command::ALL {
        let run = || {
            Process::new(bin)
                .args([cmd.name(), "--sequential", "--seed", "31337"])
                .output()
                .expect("binary runs")
        };
        let (a, b) = (run(), run());
        ensure!(
            a.status.success(),
            "{} failed: {}",
            cmd.name(),
            String::from_utf8_lossy(&a.stderr)
        );
        ensure!(!a.stdout.is_empty(), "{} printed nothing", cmd.name());
        ensure!(
            a.stdout == b.stdout,
            "{} output differs between runs",
            cmd.name()
        );
    }
    Ok(format!("{} commands", Command::ALL.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("analytic mode-width constants", analytic_constants),
        ("worked numeric example (0.385 nm)", worked_example),
        ("two-source degradation curve", kappa_curve_shape),
        ("quadrature-phase decoupling", quadrature_phase),
        ("centroid/separation diagonalization", centroid_separation),
        ("single-photon equivalence", single_photon),
        ("squeezing algebra", squeezing),
        ("thermal Bayesian bound", thermal_bound),
        ("simulation attainment and bound respect", simulation),
        ("Jensen dominance", jensen),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!(
                "PASS  criterion {:>2}: {name} [{detail}] ({secs:.2} s)",
                i + 1
            ),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {:>2}: {name}: {why} ({secs:.2} s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
