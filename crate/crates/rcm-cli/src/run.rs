use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use rcm::critical::{find_lambda_c_with, gamma_bounded_ratio, ChiExponent, CriticalError, CriticalEstimate, CriticalOptions, Method};
use rcm::estimators::{
    default_radii, estimate_chi, estimate_pi0, estimate_pi1, estimate_tau, estimate_theta_n, profile_csv, results_csv,
    EstimatorError, TauProfile,
};
use rcm::fourier::{bootstrap_f_with, green_tau_hat, log_grid, rw_condition_integral, triangles, BootstrapOptions, FourierError, TauHat};
use rcm::model::ConnectionFunction;
use rcm::sampler::{BoxSpec, SamplerError};
use rcm::verify::{verify_suite, VerifyBudget};
use serde::Serialize;

use crate::config::{ExperimentConfig, MethodName, Task};
use crate::output::{write_atomic, write_plot_script, write_report, Artifacts};
use crate::CliError;

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub smoke: bool,
}

#[derive(Debug)]
pub struct Summary {
    pub task: Task,
    pub files: Vec<PathBuf>,
    pub message: String,
}

fn estimator_error(e: EstimatorError) -> CliError {
    match e {
        EstimatorError::Sampler(SamplerError::TooManyPoints { .. }) => CliError::NonConvergence(e.to_string()),
        _ => CliError::Config(e.to_string()),
    }
}

fn critical_error(e: CriticalError) -> CliError {
    match e {
        CriticalError::Estimator(e) => estimator_error(e),
        CriticalError::InvalidArgument(m) => CliError::Config(m),
        CriticalError::Fit(m) => CliError::NonConvergence(m),
    }
}

fn fourier_error(e: FourierError) -> CliError {
    match e {
        FourierError::InvalidArgument(_) | FourierError::Model(_) | FourierError::Supercritical { .. } => CliError::Config(e.to_string()),
        _ => CliError::NonConvergence(e.to_string()),
    }
}

/// Applies overrides and the task, validates, runs, and writes artifacts.
pub fn run(task: Task, mut config: ExperimentConfig, over: &Overrides) -> Result<Summary, CliError> {
    match config.task {
        Some(t) if t != task => return Err(CliError::Config(format!("task: the file asks for `{t}` but `{task}` was run"))),
        _ => config.task = Some(task),
    }
    if let Some(s) = over.seed {
        config.seed = s;
    }
    if let Some(d) = &over.out_dir {
        config.output.dir = d.clone();
    }
    if over.smoke {
        config.tolerances.smoke = true;
        config.replicas = (config.replicas / 10).max(50);
        config.critical.blocks = config.critical.blocks.min(5);
        config.critical.resamples = config.critical.resamples.min(50);
    }
    let mut art = Artifacts { dir: config.output.dir.clone(), stem: config.stem(task), written: Vec::new() };
    let message = match task {
        Task::Verify => verify(&config, &mut art)?,
        Task::Fourier => fourier(&config, &mut art)?,
        Task::Diagrams => diagrams(&config, &mut art)?,
        _ => simulate(task, &config, &mut art)?,
    };
    Ok(Summary { task, files: art.written, message })
}

fn report<R: Serialize>(config: &ExperimentConfig, art: &mut Artifacts, result: &R) -> Result<(), CliError> {
    let p = art.path("json");
    write_report(&p, config, result)?;
    art.written.push(p);
    Ok(())
}

fn csv<F>(art: &mut Artifacts, columns: &[(usize, &str)], fill: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let p = art.path("csv");
    write_atomic(&p, fill)?;
    let gp = art.path("gp");
    write_plot_script(&gp, &p, columns)?;
    art.written.push(p);
    art.written.push(gp);
    Ok(())
}

fn simulate(task: Task, config: &ExperimentConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let cf = Arc::new(config.connection_function()?);
    let d = cf.dimension();
    let reps = config.require_replicas()?;
    let seed = config.seed;
    match task {
        Task::Tau | Task::Pi0 | Task::Pi1 => {
            let lambda = config.require_lambda()?;
            let bx = config.region_box(d)?;
            let r_max = config.radii.r_max.unwrap_or(0.2 * bx.side);
            if config.radii.steps == 0 {
                return Err(CliError::Config("radii.steps: must be positive".into()));
            }
            let radii = default_radii(&cf, r_max, config.radii.steps);
            let profile: TauProfile = match task {
                Task::Tau => estimate_tau(lambda, &cf, &radii, bx, reps, seed),
                Task::Pi0 => estimate_pi0(lambda, &cf, &radii, bx, reps, seed),
                _ => estimate_pi1(lambda, &cf, &radii, bx, reps, seed),
            }
            .map_err(estimator_error)?;
            csv(art, &[(2, "value")], |w| profile_csv(&profile, w))?;
            report(config, art, &profile)?;
            let i = profile.integral();
            Ok(format!("{task} at λ={lambda}: integral {:.6} ± {:.6}", i.value, i.stderr))
        }
        Task::Chi => {
            let grid = config.lambda_grid()?;
            let bx = config.region_box(d)?;
            let res = grid
                .iter()
                .enumerate()
                .map(|(i, &l)| estimate_chi(l, &cf, bx, reps, rcm::sampler::derive_seed(seed, &[i as u64])))
                .collect::<Result<Vec<_>, _>>()
                .map_err(estimator_error)?;
            csv(art, &[(2, "chi")], |w| results_csv("lambda", &grid, &res, w))?;
            report(config, art, &res)?;
            Ok(format!("χ̂ at {} intensities", grid.len()))
        }
        Task::Theta => {
            let lambda = config.require_lambda()?;
            let ladder = config.require_ladder()?;
            let res = estimate_theta_n(lambda, &cf, &ladder, reps, seed).map_err(estimator_error)?;
            csv(art, &[(2, "theta_n")], |w| results_csv("side", &ladder, &res, w))?;
            report(config, art, &res)?;
            Ok(format!("θ̂_n at λ={lambda} over {} sides", ladder.len()))
        }
        Task::LambdaC => {
            let est = critical(config, &cf)?;
            side_fits_csv(art, &est)?;
            report(config, art, &est)?;
            Ok(critical_message(&est, &cf))
        }
        Task::Gamma => {
            let est = critical(config, &cf)?;
            let grid: Vec<f64> = config.critical.fractions.iter().map(|f| f * est.lambda_c).collect();
            let bx = BoxSpec::new(config.critical.gamma_side, d, config.region.boundary);
            let rep = gamma_bounded_ratio(&cf, &est, &grid, bx, reps, rcm::sampler::derive_seed(seed, &[0x9a]))
                .map_err(critical_error)?;
            csv(art, &[(2, "chi"), (4, "lower bound")], |w| {
                writeln!(w, "lambda,chi,chi_se,lower,holds")?;
                for p in &rep.points {
                    writeln!(w, "{},{},{},{},{}", p.lambda, p.chi, p.chi_se, p.lower, p.holds)?;
                }
                Ok(())
            })?;
            #[derive(Serialize)]
            struct Gamma<'a> {
                estimate: &'a CriticalEstimate,
                report: &'a rcm::critical::GammaReport,
            }
            report(config, art, &Gamma { estimate: &est, report: &rep })?;
            Ok(format!("{}; lower bound holds at all points: {}", critical_message(&est, &cf), rep.all_hold))
        }
        _ => unreachable!("dispatched elsewhere"),
    }
}

fn critical(config: &ExperimentConfig, cf: &Arc<ConnectionFunction>) -> Result<CriticalEstimate, CliError> {
    let ladder = config.require_ladder()?;
    let c = &config.critical;
    let method = match c.method {
        MethodName::Sigmoid => Method::CrossingSigmoid,
        MethodName::Chi => Method::ChiDivergence,
    };
    let opts = CriticalOptions {
        lambdas: config.lambdas.clone(),
        blocks: c.blocks,
        resamples: c.resamples,
        level: c.level,
        chi_exponent: c.chi_exponent.map_or(ChiExponent::Free, ChiExponent::Fixed),
        ..Default::default()
    };
    find_lambda_c_with(cf, &ladder, config.require_replicas()?, method, config.seed, &opts).map_err(critical_error)
}

fn critical_message(est: &CriticalEstimate, cf: &ConnectionFunction) -> String {
    let mut m = format!(
        "λ̂_c = {:.4} [{:.4}, {:.4}], λ̂_c·q = {:.4}",
        est.lambda_c,
        est.ci_low,
        est.ci_high,
        est.lambda_c * cf.q()
    );
    for w in &est.warnings {
        m.push_str("\nwarning: ");
        m.push_str(w);
    }
    m
}

fn side_fits_csv(art: &mut Artifacts, est: &CriticalEstimate) -> Result<(), CliError> {
    csv(art, &[(2, "pseudo-critical point")], |w| {
        writeln!(w, "side,point,point_se,shape")?;
        for s in &est.sides {
            writeln!(w, "{},{},{},{}", s.side, s.point, s.point_se, s.shape)?;
        }
        Ok(())
    })
}

fn fourier(config: &ExperimentConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let cf = config.connection_function()?;
    let f = &config.fourier;
    if !(f.k_min > 0.0 && f.k_max > f.k_min && f.points >= 2) {
        return Err(CliError::Config("fourier: need 0 < k_min < k_max and points >= 2".into()));
    }
    let tau = green_tau_hat(&cf, f.mu).map_err(fourier_error)?;
    let ks = log_grid(f.k_min, f.k_max, f.points);
    #[derive(Serialize)]
    struct Row {
        k: f64,
        phi_hat: f64,
        tau_hat: f64,
    }
    let rows: Vec<Row> = ks.iter().map(|&k| Row { k, phi_hat: cf.phi_hat(k), tau_hat: tau.eval(k) }).collect();
    csv(art, &[(2, "phi_hat"), (3, "tau_hat")], |w| {
        writeln!(w, "k,phi_hat,tau_hat")?;
        for r in &rows {
            writeln!(w, "{},{},{}", r.k, r.phi_hat, r.tau_hat)?;
        }
        Ok(())
    })?;
    report(config, art, &rows)?;
    Ok(format!("φ̂ and φ̂Ĝ_μ at μ={} on {} wave numbers", f.mu, rows.len()))
}

fn diagrams(config: &ExperimentConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let cf = config.connection_function()?;
    let lambda = config.require_lambda()?;
    let mu = config.fourier.mu;
    let tri = triangles(&cf, lambda, &TauHat::Green { mu }).map_err(fourier_error)?;
    let tau = green_tau_hat(&cf, mu).map_err(fourier_error)?;
    let ks = log_grid(config.fourier.k_min, config.fourier.k_max, 60);
    let opts = BootstrapOptions { refine_tol: config.tolerances.bootstrap_refine, ..Default::default() };
    let boot = bootstrap_f_with(&cf, lambda, &tau, &ks, &ks, opts).map_err(fourier_error)?;
    #[derive(Serialize)]
    struct Walk {
        s: u32,
        value: Option<f64>,
        error: Option<f64>,
        note: Option<String>,
    }
    let walks: Vec<Walk> = (1..=3)
        .map(|s| match rw_condition_integral(&cf, mu, 2, s) {
            Ok(q) => Walk { s, value: Some(q.value), error: Some(q.error), note: None },
            Err(e) => Walk { s, value: None, error: None, note: Some(e.to_string()) },
        })
        .collect();
    #[derive(Serialize)]
    struct Diagrams<'a> {
        lambda: f64,
        mu: f64,
        triangles: rcm::fourier::Triangles,
        bootstrap: &'a rcm::fourier::BootstrapValues,
        random_walk: Vec<Walk>,
    }
    report(config, art, &Diagrams { lambda, mu, triangles: tri, bootstrap: &boot, random_walk: walks })?;
    Ok(format!(
        "Δ = {:.4e}, Δ° = {:.4e}, Δ°° = {:.4e}; f₁ = {:.4}, f₂ = {:.4}, f₃ = {:.4e}",
        tri.triangle, tri.open, tri.double, boot.f1, boot.f2, boot.f3
    ))
}

fn verify(config: &ExperimentConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let budget = if config.tolerances.smoke { VerifyBudget::smoke(config.seed) } else { VerifyBudget::full(config.seed) };
    let rep = verify_suite(budget);
    csv(art, &[(3, "statistic"), (4, "reference")], |w| {
        writeln!(w, "name,passed,statistic,reference,tolerance,seconds")?;
        for c in &rep.checks {
            writeln!(w, "{},{},{},{},{},{}", c.name, c.passed, c.statistic, c.reference, c.tolerance, c.seconds)?;
        }
        Ok(())
    })?;
    report(config, art, &rep)?;
    let lines: Vec<String> = rep
        .checks
        .iter()
        .map(|c| format!("{} {} ({:.4e} vs {:.4e}) {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.statistic, c.reference, c.detail))
        .collect();
    if rep.all_passed {
        Ok(lines.join("\n"))
    } else {
        Err(CliError::VerifyFailed(lines.join("\n")))
    }
}
