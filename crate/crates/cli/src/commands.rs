//! Execution of a validated [`RunConfig`].

use sfg_core::dynamics::{run_ensemble, semiclassical_trajectory, MomentTable};
use sfg_core::observables::{
    duan_simon, epr_product, fano_sum, mean_intensity, quadrature_variance, CorrelationSeries,
    QuadratureSpec, Sign,
};
use sfg_core::spectral::{spectral_duan_simon, spectral_epr, spectrum, x_index, y_index, SpectrumResult};
use sfg_core::stability::{critical_point, stability, stability_map, BoundaryOutcome};
use sfg_core::steady::solve_steady;
use sfg_core::SystemParams;

use crate::config::{Command, Mode, RunConfig};
use crate::error::CliError;
use crate::output::{emit, Artifact, EnsembleCounts, Table};
use crate::presets::{preset, FigureId};

/// Files written and human-readable summary lines.
#[derive(Debug, Default)]
pub struct Report {
    pub artifacts: Vec<Artifact>,
    pub summary: Vec<String>,
}

pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::default();
    match config.command {
        Command::Steady => steady(config, &mut report)?,
        Command::StabilityMap => {
            let t = boundary_table(config, config.gamma1)?;
            report.artifacts.push(emit(config, "stability_map", "stability boundary", &t, None)?);
        }
        Command::Spectrum => spectrum_command(config, &mut report)?,
        Command::Simulate => simulate(config, &mut report)?,
        Command::Reproduce(id) => reproduce(config, id, &mut report)?,
    }
    Ok(report)
}

fn steady(config: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let p = config.params()?;
    let s = solve_steady(&p)?;
    let st = stability(&p)?;
    let crit = if p.is_symmetric() { critical_point(&p).ok() } else { None };
    let mut t = Table::default();
    for (j, a) in s.amplitudes().iter().enumerate() {
        t.push(&format!("alpha{}_re", j + 1), "sqrt(photons)", vec![a.re]);
        t.push(&format!("alpha{}_im", j + 1), "sqrt(photons)", vec![a.im]);
    }
    for (j, n) in s.intensities().iter().enumerate() {
        t.push(&format!("n{}", j + 1), "photons", vec![*n]);
    }
    t.push("residual", "amplitude/time", vec![s.residual]);
    t.push("margin", "1/time", vec![st.margin]);
    t.push("stable", "0/1", vec![f64::from(u8::from(st.stable))]);
    for (i, l) in st.eigenvalues.iter().enumerate() {
        t.push(&format!("lambda{}_re", i + 1), "1/time", vec![l.re]);
        t.push(&format!("lambda{}_im", i + 1), "1/time", vec![l.im]);
    }
    t.push("alpha_c", "sqrt(photons)", vec![crit.map_or(f64::NAN, |c| c.alpha_c)]);
    t.push("eps_c", "amplitude/time", vec![crit.map_or(f64::NAN, |c| c.epsilon_c)]);
    report.summary.push(format!(
        "alpha1={:.6} alpha2={:.6} alpha3={:.6} residual={:.1e} ({:?})",
        s.alpha1, s.alpha2, s.alpha3, s.residual, s.method
    ));
    report.summary.push(format!(
        "{} (margin {:.6})",
        if st.stable { "stable" } else { "unstable" },
        st.margin
    ));
    if let Some(c) = crit {
        report.summary.push(format!("alpha/alpha_c = {:.4}, eps_c = {:.4}", s.alpha1.re / c.alpha_c, c.epsilon_c));
    }
    report.artifacts.push(emit(config, "steady", "steady state", &t, None)?);
    Ok(())
}

fn boundary_table(config: &RunConfig, gamma: f64) -> Result<Table, CliError> {
    let rows = stability_map(config.kappa, gamma, &config.ratios, (config.eps_min, config.eps_max))?;
    let mut t = Table::default();
    t.push("gamma3_over_gamma", "-", rows.iter().map(|r| r.gamma3_over_gamma).collect());
    t.push(
        "eps_boundary",
        "amplitude/time",
        rows.iter()
            .map(|r| match r.outcome {
                BoundaryOutcome::Boundary(e) => e,
                _ => f64::NAN,
            })
            .collect(),
    );
    t.push(
        "outcome",
        "0 boundary|1 all stable|2 all unstable",
        rows.iter()
            .map(|r| match r.outcome {
                BoundaryOutcome::Boundary(_) => 0.0,
                BoundaryOutcome::AllStable => 1.0,
                BoundaryOutcome::AllUnstable => 2.0,
            })
            .collect(),
    );
    Ok(t)
}

fn spectrum_command(config: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let p = config.params()?;
    let r = spectrum(&p, &config.grid())?;
    let mut t = Table::default();
    t.push("omega", "gamma1", omegas_in_gamma1(&p, &r));
    for j in 1..=3 {
        t.push(&format!("V_X{j}"), "shot noise", r.variance(x_index(j)));
        t.push(&format!("V_Y{j}"), "shot noise", r.variance(y_index(j)));
    }
    t.push("DS_plus", "shot noise", spectral_duan_simon(&r.output, Sign::Plus));
    t.push("DS_minus", "shot noise", spectral_duan_simon(&r.output, Sign::Minus));
    t.push("EPR12", "shot noise^2", spectral_epr(&r.output, 1, 2)?);
    t.push("EPR21", "shot noise^2", spectral_epr(&r.output, 2, 1)?);
    report.summary.push(format!(
        "margin {:.6}; min V(X3) {:.6}; max anti-Hermitian residue {:.1e}",
        r.margin,
        min_of(&r.variance(x_index(3))),
        r.asymmetry
    ));
    report.artifacts.push(emit(config, "spectrum", "output spectra", &t, None)?);
    Ok(())
}

fn omegas_in_gamma1(p: &SystemParams, r: &SpectrumResult) -> Vec<f64> {
    let g = p.gamma1.max(f64::MIN_POSITIVE);
    r.omegas.iter().map(|w| w / g).collect()
}

fn min_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Ensemble run plus bookkeeping.
struct Ensemble {
    table: MomentTable,
    counts: EnsembleCounts,
    time_unit: &'static str,
}

fn ensemble(config: &RunConfig) -> Result<Ensemble, CliError> {
    let p = config.dynamics_params()?;
    let cfg = config.trajectory(&p);
    let table = run_ensemble(&p, &config.initial_state(), &cfg)?;
    let counts = EnsembleCounts {
        requested: table.n_traj,
        included: table.included(),
        diverged: table.n_diverged,
    };
    let time_unit = match config.mode {
        Mode::TravellingWave => "zeta",
        Mode::Cavity => "1/gamma",
    };
    Ok(Ensemble { table, counts, time_unit })
}

/// Evaluates a series on the whole table, falling back to one sample at a time so a
/// single ill-conditioned sample only blanks its own row.
fn robust(
    m: &MomentTable,
    f: impl Fn(&MomentTable) -> sfg_core::Result<CorrelationSeries>,
    name: &str,
    report: &mut Report,
) -> (Vec<f64>, Vec<f64>) {
    if let Ok(s) = f(m) {
        return (s.values, s.se);
    }
    let mut failed = 0;
    let (values, se) = (0..m.len())
        .map(|i| match f(&m.slice(i..i + 1)) {
            Ok(s) => (s.values[0], s.se[0]),
            Err(_) => {
                failed += 1;
                (f64::NAN, f64::NAN)
            }
        })
        .unzip();
    report.summary.push(format!("warning: {name} undefined at {failed} of {} samples (written as NaN)", m.len()));
    (values, se)
}

fn push_intensities(t: &mut Table, m: &MomentTable, report: &mut Report) {
    for j in 1..=3 {
        let (v, se) = robust(m, |x| mean_intensity(x, j), &format!("n{j}"), report);
        t.push_with_se(&format!("n{j}"), "photons", v, se);
    }
}

fn push_squeezing(t: &mut Table, m: &MomentTable, report: &mut Report) {
    let x3 = QuadratureSpec::x(3).expect("mode 3 exists");
    let (v, se) = robust(m, |x| quadrature_variance(x, x3), "V_X3", report);
    t.push_with_se("V_X3", "shot noise", v, se);
    let (v, se) = robust(m, fano_sum, "Fano_N1+N2", report);
    t.push_with_se("Fano_N1+N2", "-", v, se);
}

fn push_entanglement(t: &mut Table, m: &MomentTable, report: &mut Report) {
    let (v, se) = robust(m, |x| duan_simon(x, Sign::Plus).map(|s| s.normalized()), "DS/4", report);
    t.push_with_se("DS/4", "-", v, se);
    for (j, k) in [(1, 2), (2, 1)] {
        let name = format!("EPR{j}{k}");
        let (v, se) = robust(m, |x| epr_product(x, j, k), &name, report);
        t.push_with_se(&name, "shot noise^2", v, se);
    }
}

fn push_semiclassical(t: &mut Table, config: &RunConfig) -> Result<(), CliError> {
    let p = config.dynamics_params()?;
    let path = semiclassical_trajectory(&p, &config.initial_state(), &config.trajectory(&p))?;
    for j in 0..3 {
        let n = path.points.iter().map(|x| (x.to_array()[2 * j + 1] * x.to_array()[2 * j]).re).collect();
        t.push(&format!("n{}_sc", j + 1), "photons", n);
    }
    Ok(())
}

fn simulate(config: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let e = ensemble(config)?;
    let m = &e.table;
    let mut t = Table::default();
    t.push("time", e.time_unit, m.times.clone());
    push_intensities(&mut t, m, report);
    push_squeezing(&mut t, m, report);
    push_entanglement(&mut t, m, report);
    push_semiclassical(&mut t, config)?;
    report.summary.push(format!(
        "{} trajectories, {} diverged, {} samples",
        e.counts.requested, e.counts.diverged, m.len()
    ));
    report.artifacts.push(emit(config, "simulate", "ensemble moments", &t, Some(e.counts))?);
    Ok(())
}

fn reproduce(config: &RunConfig, id: FigureId, report: &mut Report) -> Result<(), CliError> {
    let fp = preset(id);
    let stem = id.to_string();
    match id.0 {
        1..=3 => {
            let e = ensemble(config)?;
            let m = &e.table;
            let mut t = Table::default();
            t.push("zeta", e.time_unit, m.times.clone());
            match id.0 {
                1 => push_intensities(&mut t, m, report),
                2 => push_squeezing(&mut t, m, report),
                _ => push_entanglement(&mut t, m, report),
            }
            report.artifacts.push(emit(config, &stem, fp.title, &t, Some(e.counts))?);
            if id.0 == 3 {
                // Stability regions of the symmetric cavity, gamma = 1.
                let b = boundary_table(config, 1.0)?;
                report.artifacts.push(emit(config, "fig3_stability", "stability boundary", &b, None)?);
            }
        }
        4..=6 => {
            let mut t = Table::default();
            for (i, eps) in fp.pumps.iter().enumerate() {
                let p = SystemParams::new(
                    config.kappa,
                    config.gamma1,
                    config.gamma2,
                    config.gamma3,
                    num_complex::Complex64::new(*eps, 0.0),
                    num_complex::Complex64::new(*eps, 0.0),
                )?;
                let r = spectrum(&p, &config.grid())?;
                if i == 0 {
                    t.push("omega", "gamma1", omegas_in_gamma1(&p, &r));
                }
                let (name, unit, values) = match id.0 {
                    4 => ("V_X3", "shot noise", r.variance(x_index(3))),
                    5 => ("DS_plus", "shot noise", spectral_duan_simon(&r.output, Sign::Plus)),
                    _ => ("EPR12", "shot noise^2", spectral_epr(&r.output, 1, 2)?),
                };
                report.summary.push(format!("eps={eps}: min {name} = {:.6}", min_of(&values)));
                t.push(&format!("{name}_eps{eps}"), unit, values);
            }
            report.artifacts.push(emit(config, &stem, fp.title, &t, None)?);
        }
        7 => {
            let p = config.params()?;
            let r = spectrum(&p, &config.grid())?;
            let mut t = Table::default();
            t.push("omega", "gamma1", omegas_in_gamma1(&p, &r));
            for (j, k) in [(1, 2), (2, 1)] {
                let v = spectral_epr(&r.output, j, k)?;
                report.summary.push(format!("min EPR{j}{k} = {:.6}", min_of(&v)));
                t.push(&format!("EPR{j}{k}"), "shot noise^2", v);
            }
            report.artifacts.push(emit(config, &stem, fp.title, &t, None)?);
        }
        _ => {
            let e = ensemble(config)?;
            let m = &e.table;
            let mut t = Table::default();
            t.push("time", e.time_unit, m.times.clone());
            push_intensities(&mut t, m, report);
            push_semiclassical(&mut t, config)?;
            let fixed = solve_steady(&config.params()?)?.intensities();
            for (j, n) in fixed.iter().enumerate() {
                t.push(&format!("n{}_ss", j + 1), "photons", vec![*n; m.len()]);
            }
            let last = m.len() - 1;
            let col = |name: &str| t.column(name).map_or(f64::NAN, |c| c[last]);
            report.summary.push(format!(
                "t={}: n1={:.0}±{:.0} (fixed point {:.0}), n3={:.0}±{:.0} (fixed point {:.0})",
                m.times[last],
                col("n1"),
                col("n1_se"),
                fixed[0],
                col("n3"),
                col("n3_se"),
                fixed[2]
            ));
            report.artifacts.push(emit(config, &stem, fp.title, &t, Some(e.counts))?);
        }
    }
    for item in fp.checklist {
        report.summary.push(format!("expect: {item}"));
    }
    Ok(())
}
