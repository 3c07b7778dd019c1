use std::borrow::Cow;
use std::f64::consts::PI;

use serde_json::{json, Value};

use super::output::{Cell, RunOutput, Table};
use super::{parse_vector, Command, RunConfig};
use crate::bayes::{
    bar_qfi, bound_with_nuisance, one_source_conditional_qfi, thermal_bound_asymptote,
    thermal_bound_closed_form, two_source_partial_coherence_bound, NuisancePrior, PhaseModel,
    PositionAveraging, PriorInfo, TwoSourceGeometry, UnitTwoSourceQfi,
};
use crate::error::{Error, Result};
use crate::numcore::{
    make_gauss_sphere, SphereQuadrature, SymMatrix, DEFAULT_N_PHI, DEFAULT_N_THETA,
};
use crate::qfi::{
    centroid_separation_qfi, kappa_curve, resolved_quadrature, shot_noise_bound, single_photon_qfi,
    single_source_qfi, squeeze_factor, squeezed_bound, two_source_qfi, TwoSourceTemplate,
};
use crate::radiation::{DipoleKind, DipoleSpec, Polarization, SinglePhotonSpec, SourceConfig};
use crate::simulate::{
    simulate_heterodyne, simulate_homodyne, Axis, HeterodyneModel, Parameter, QuadratureModel,
    SimReport,
};

/// Grid used by heterodyne simulations when none is requested. Exact for
/// the polynomial single-source integrands.
const HETERODYNE_GRID: (usize, usize) = (8, 16);

struct Computed {
    quadrature: Option<(usize, usize)>,
    result: Value,
    table: Option<Table>,
}

/// Runs one command and packages its result.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let c = match cfg.command {
        Command::QfiSingle => qfi_single(cfg)?,
        Command::Squeeze => squeeze(cfg)?,
        Command::KappaCurve => kappa(cfg)?,
        Command::Reparam => reparam(cfg)?,
        Command::BayesThermal => bayes_thermal(cfg)?,
        Command::BayesTwo => bayes_two(cfg)?,
        Command::SinglePhoton => single_photon(cfg)?,
        Command::Simulate => simulate(cfg)?,
    };
    let table = c.table.unwrap_or_else(|| Table::flattened(&c.result));
    Ok(RunOutput {
        command: cfg.command,
        config: cfg.clone(),
        quadrature: c.quadrature,
        result: c.result,
        table,
    })
}

fn quadrature(cfg: &RunConfig, default: (usize, usize)) -> Result<SphereQuadrature> {
    let (t, p) = cfg.quadrature.unwrap_or(default);
    make_gauss_sphere(t, p)
}

fn default_quadrature(cfg: &RunConfig) -> Result<SphereQuadrature> {
    quadrature(cfg, (DEFAULT_N_THETA, DEFAULT_N_PHI))
}

fn size(q: &SphereQuadrature) -> Option<(usize, usize)> {
    Some((q.n_theta(), q.n_phi()))
}

fn matrix_json(m: &SymMatrix) -> Value {
    json!({ "labels": m.labels(), "rows": m.to_rows() })
}

fn named_dipole(kind: &str, n: f64) -> Result<DipoleSpec> {
    match kind {
        "linear-z" => DipoleSpec::linear_z(n),
        "circular-xy" => DipoleSpec::circular_xy(n),
        other => Err(Error::Config(format!("unsupported dipole kind {other:?}"))),
    }
}

fn qfi_single(cfg: &RunConfig) -> Result<Computed> {
    let q = default_quadrature(cfg)?;
    let n = cfg.real("N");
    let lambda0 = cfg.real("lambda0_nm");
    let kind = cfg.text("kind");
    let d = match kind {
        "general" => {
            let v = parse_vector(cfg.text("dipole"))?;
            DipoleSpec::new(DipoleKind::General(Polarization::real(v)?), n, 0.0)?
        }
        k => named_dipole(k, n)?,
    };
    let b = shot_noise_bound(&d, lambda0, Some(&q))?;
    let qfi = single_source_qfi(&d, &q, lambda0)?;
    Ok(Computed {
        quadrature: size(&q),
        result: json!({
            "kind": kind,
            "photon_number": n,
            "lambda0_nm": lambda0,
            "base_scale_nm": b.base_scale(),
            "mode_width_nm": b.w,
            "qcrb_nm2": b.qcrb_diag,
            "rms_bound_nm": b.rms(),
            "qfi_per_nm2": matrix_json(&qfi),
        }),
        table: None,
    })
}

fn squeeze(cfg: &RunConfig) -> Result<Computed> {
    let n0 = cfg.real("N0");
    let f = squeeze_factor(n0)?;
    let d = named_dipole(cfg.text("kind"), cfg.real("N"))?;
    let b = shot_noise_bound(&d, cfg.real("lambda0_nm"), None)?;
    let sq = squeezed_bound(&b, n0)?;
    Ok(Computed {
        quadrature: None,
        result: json!({
            "n0": n0,
            "squeeze_factor": f,
            "large_n0_asymptote": if n0 > 0.0 { json!(1.0 / (4.0 * n0)) } else { Value::Null },
            "shot_noise_qcrb_nm2": b.qcrb_diag,
            "squeezed_qcrb_nm2": sq,
            "squeezed_rms_nm": sq.map(f64::sqrt),
        }),
        table: None,
    })
}

fn kappa(cfg: &RunConfig) -> Result<Computed> {
    let (dmin, dmax) = (cfg.real("dmin"), cfg.real("dmax"));
    let steps = cfg.count("steps") as usize;
    if steps < 2 || dmax <= dmin {
        return Err(Error::Config("need steps ≥ 2 and dmax > dmin".into()));
    }
    let q = default_quadrature(cfg)?;
    let phase = cfg.real("phase_over_pi") * PI;
    let seps: Vec<f64> = (0..steps)
        .map(|i| dmin + (dmax - dmin) * i as f64 / (steps - 1) as f64)
        .collect();
    let curve = kappa_curve(
        &TwoSourceTemplate::x_dipoles_along_x(phase),
        &seps,
        &q,
        cfg.exec,
    )?;
    let mut table = Table::new(vec!["separation_over_lambda0", "kappa"]);
    for &(d, k) in &curve {
        table.push(vec![Cell::Real(d), Cell::Real(k)]);
    }
    let points: Vec<Value> = curve
        .iter()
        .map(|(d, k)| json!({"separation_over_lambda0": d, "kappa": k}))
        .collect();
    Ok(Computed {
        quadrature: size(&q),
        result: json!({ "relative_phase_over_pi": cfg.real("phase_over_pi"), "points": points }),
        table: Some(table),
    })
}

fn reparam(cfg: &RunConfig) -> Result<Computed> {
    let q = default_quadrature(cfg)?;
    let d = cfg.real("d");
    let t = TwoSourceTemplate::x_dipoles_along_x(cfg.real("phase_over_pi") * PI);
    let (a, b) = t.sources(d)?;
    let r = two_source_qfi(&a, &b, &q)?;
    let cs = centroid_separation_qfi(&r)?;
    Ok(Computed {
        quadrature: size(&q),
        result: json!({
            "separation_over_lambda0": d,
            "kappa": r.kappa,
            "qfi_positions": matrix_json(&r.matrix),
            "qfi_centroid_separation": matrix_json(&cs),
        }),
        table: None,
    })
}

fn bayes_thermal(cfg: &RunConfig) -> Result<Computed> {
    let (nbar, c, j, lambda0) = (
        cfg.real("Nbar"),
        cfg.real("C"),
        cfg.real("j"),
        cfg.real("lambda0"),
    );
    let closed = thermal_bound_closed_form(nbar, c, lambda0, j)?;
    let asym = thermal_bound_asymptote(nbar, c, lambda0, j)?;
    let before = 1.0 / (nbar / (c * lambda0 * lambda0) + j);
    let samples = cfg.count("samples") as usize;
    let mc = if samples > 0 {
        let prior = NuisancePrior::thermal(nbar)?;
        let barj = bar_qfi(
            one_source_conditional_qfi(vec![c], lambda0)?,
            PriorInfo::diagonal(vec!["x"], &[j])?,
        );
        let r = bound_with_nuisance(&prior, barj, samples, cfg.seed, cfg.exec)?;
        json!({
            "bound": r.bound.get(0, 0),
            "std_error": r.std_error.get(0, 0),
            "n_samples": r.n_samples,
            "singular_draws": r.singular_draws,
        })
    } else {
        Value::Null
    };
    Ok(Computed {
        quadrature: None,
        result: json!({
            "closed_form": closed,
            "asymptote": asym,
            "ratio": closed / asym,
            "inverse_of_mean_information": before,
            "monte_carlo": mc,
        }),
        table: None,
    })
}

fn bayes_two(cfg: &RunConfig) -> Result<Computed> {
    let q = default_quadrature(cfg)?;
    let d = cfg.real("d");
    let phase = cfg.real("phase_over_pi") * PI;
    let (n_a, n_b, j) = (cfg.real("N"), cfg.real("N2"), cfg.real("j"));
    let (a, b) = TwoSourceTemplate::x_dipoles_along_x(0.0).sources(d)?;
    let g = TwoSourceGeometry::new(a, b);
    let prior = match cfg.text("phases") {
        "coherent" => NuisancePrior::two_source(n_a, n_b, PhaseModel::Fixed(phase))?,
        "incoherent" => NuisancePrior::two_source(n_a, n_b, PhaseModel::IndependentUniform)?,
        _ => NuisancePrior::two_source_thermal(n_a, n_b)?,
    };
    let info = PriorInfo::diagonal(vec!["x", "x'"], &[j, j])?;
    let r = two_source_partial_coherence_bound(
        &g,
        &prior,
        &info,
        &PositionAveraging::Fixed,
        cfg.count("samples") as usize,
        cfg.seed,
        &q,
        cfg.exec,
    )?;
    let unit = UnitTwoSourceQfi::compute(&g, &PositionAveraging::Fixed, &q)?;
    Ok(Computed {
        quadrature: size(&q),
        result: json!({
            "prior": prior.description,
            "bound": r.bound.get(0, 0),
            "std_error": r.std_error.get(0, 0),
            "n_samples": r.n_samples,
            "singular_draws": r.singular_draws,
            "clipped_draws": r.clipped_draws,
            "isolated_source_bound": 1.0 / (n_a * unit.j_xx + j),
        }),
        table: None,
    })
}

fn single_photon(cfg: &RunConfig) -> Result<Computed> {
    let q = default_quadrature(cfg)?;
    let lambda0 = cfg.real("lambda0");
    let (pol, kind) = match cfg.text("pol") {
        "linear" => (Polarization::z(), DipoleKind::LinearZ),
        _ => (Polarization::circular_xy(), DipoleKind::CircularXY),
    };
    let s = SinglePhotonSpec::new(pol, cfg.real("gamma_ratio"))?;
    let sp = single_photon_qfi(&s, &q, lambda0)?;
    let classical = single_source_qfi(&DipoleSpec::new(kind, 1.0, 0.0)?, &q, lambda0)?;
    let scale = classical.scale();
    let mut max_rel = 0.0_f64;
    for i in 0..3 {
        for k in 0..3 {
            max_rel = max_rel.max((sp.get(i, k) - classical.get(i, k)).abs() / scale);
        }
    }
    Ok(Computed {
        quadrature: size(&q),
        result: json!({
            "single_photon_qfi": matrix_json(&sp),
            "classical_qfi_one_photon": matrix_json(&classical),
            "max_relative_difference": max_rel,
        }),
        table: None,
    })
}

fn report_json(r: &SimReport) -> Value {
    json!({
        "parameter": r.parameter,
        "trials": r.trials,
        "empirical_mse": r.empirical_mse,
        "mse_std_error": r.mse_std_error,
        "bound_compared": r.bound_compared,
        "qcrb": r.qcrb,
        "z_score": r.z_score(r.bound_compared),
        "seed": r.seed,
    })
}

fn simulate(cfg: &RunConfig) -> Result<Computed> {
    let axis: Axis = cfg.text("axis").parse()?;
    let n = cfg.real("N");
    let offset = cfg.real("offset");
    let trials = cfg.count("trials") as usize;
    let d = cfg.real("d");
    let (reports, quad) = match cfg.text("method") {
        "homodyne" => {
            let b = shot_noise_bound(&named_dipole(cfg.text("kind"), n)?, 1.0, None)?;
            let w = b.w[axis.index()];
            let n0 = cfg.real("N0");
            let m = if n0 > 0.0 {
                QuadratureModel::squeezed(axis, w, [0.0; 3], n0)?
            } else {
                QuadratureModel::vacuum(axis, w, [0.0; 3])?
            };
            (
                vec![simulate_homodyne(&m, offset, trials, cfg.seed, cfg.exec)?],
                None,
            )
        }
        _ => {
            let base = quadrature(cfg, HETERODYNE_GRID)?;
            let mut shift = [0.0; 3];
            shift[axis.index()] = offset;
            let h = if d > 0.0 {
                let q: SphereQuadrature = match resolved_quadrature(&base, d)? {
                    Cow::Borrowed(q) => q.clone(),
                    Cow::Owned(q) => q,
                };
                let t = TwoSourceTemplate::x_dipoles_along_x(0.0);
                let (a, b) = t.sources(d)?;
                let with_n = |s: SourceConfig| {
                    SourceConfig::new(s.position(), s.dipole.with_photon_number(n)?)
                };
                HeterodyneModel::new(
                    vec![with_n(a)?, with_n(b)?],
                    vec![Parameter { source: 0, axis }, Parameter { source: 1, axis }],
                    q,
                )?
                .with_truth_offsets(vec![shift, shift])?
            } else {
                let src = SourceConfig::new([0.0; 3], named_dipole(cfg.text("kind"), n)?)?;
                HeterodyneModel::single_source(src, axis, base)?.with_truth_offsets(vec![shift])?
            };
            let q = h.quadrature();
            let quad = size(q);
            (simulate_heterodyne(&h, trials, cfg.seed, cfg.exec)?, quad)
        }
    };
    let mut table = Table::new(vec![
        "parameter",
        "trials",
        "empirical_mse",
        "mse_std_error",
        "bound_compared",
        "qcrb",
        "seed",
    ]);
    for r in &reports {
        table.push(vec![
            Cell::Text(r.parameter.clone()),
            Cell::Int(r.trials as u64),
            Cell::Real(r.empirical_mse),
            Cell::Real(r.mse_std_error),
            Cell::Real(r.bound_compared),
            Cell::Real(r.qcrb),
            Cell::Int(r.seed),
        ]);
    }
    Ok(Computed {
        quadrature: quad,
        result: json!({
            "method": cfg.text("method"),
            "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
        }),
        table: Some(table),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::{read_csv, ConfigLayers, Format};
    use crate::exec::ExecMode;

    fn cfg(cmd: Command, args: &[&str]) -> RunConfig {
        let layers = ConfigLayers {
            assignments: args.iter().map(|s| s.to_string()).collect(),
            sequential: true,
            ..Default::default()
        };
        RunConfig::resolve(cmd, &layers).unwrap()
    }

    #[test]
    fn qfi_single_worked_example() {
        let out = run(&cfg(
            Command::QfiSingle,
            &["kind=linear-z", "N=20000", "lambda0_nm=342"],
        ))
        .unwrap();
        let base = out.result["base_scale_nm"].as_f64().unwrap();
        assert!((base - 0.3849).abs() < 5e-5);
        assert_eq!(out.result["rms_bound_nm"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn kappa_curve_csv_first_row() {
        let c = cfg(Command::KappaCurve, &["dmin=0", "dmax=2", "steps=5"]);
        assert_eq!(c.format, Format::Csv);
        let out = run(&c).unwrap();
        let csv = read_csv(&out.to_csv()).unwrap();
        assert_eq!(csv.columns, ["separation_over_lambda0", "kappa"]);
        let k = csv.column_f64("kappa").unwrap();
        assert_eq!(csv.column_f64("separation_over_lambda0").unwrap()[0], 0.0);
        assert!((k[0] - 1.0).abs() < 1e-9);
        assert_eq!(csv.metadata.get("quadrature").unwrap(), "64x128");
    }

    #[test]
    fn bayes_thermal_reports_ratio() {
        let out = run(&cfg(
            Command::BayesThermal,
            &["Nbar=1e4", "C=1", "j=1", "lambda0=1"],
        ))
        .unwrap();
        let ratio = out.result["ratio"].as_f64().unwrap();
        assert!((ratio - 1.0).abs() < 0.1);
        assert!(out.result["monte_carlo"].is_null());
    }

    #[test]
    fn simulate_heterodyne_two_sources_uses_resolved_grid() {
        let mut c = cfg(
            Command::Simulate,
            &["method=heterodyne", "d=2", "trials=50"],
        );
        c.exec = ExecMode::Parallel;
        let out = run(&c).unwrap();
        let (_, np) = out.quadrature.unwrap();
        assert!(np >= crate::radiation::required_n_phi(2.0));
        assert_eq!(out.result["reports"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn numerical_failures_are_flagged() {
        // dark sources with no prior information: every draw is singular
        let err = run(&cfg(Command::BayesTwo, &["N=0", "N2=0", "samples=100"])).unwrap_err();
        assert!(err.is_numerical());
        assert_eq!(crate::cli::exit_code(&err), 2);
    }
}
