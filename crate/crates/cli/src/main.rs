//! Command-line front end: scenario loading, bound/exact/simulate/multicell
//! computations and the combined `tables` report.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 numerical
//! accuracy problem (warnings escalate only under `--strict`).

mod config;
mod report;

use clap::{Parser, Subcommand, ValueEnum};
use ofdma_loss::error::Error as CoreError;
use ofdma_loss::exactloss::exact_loss;
use ofdma_loss::model::{compute_thresholds, Mode, OutagePolicy, Scenario};
use ofdma_loss::moments::{class_masses, moments_from_classes, ClassMasses, MomentPair};
use ofdma_loss::montecarlo::estimate_loss_with_workers;
use ofdma_loss::multicell::{
    estimate_loss_multicell_with_workers, multicell_class_masses, Association,
    MulticellScenario, UserRegion,
};
use ofdma_loss::quadrature::QuadSpec;
use ofdma_loss::tailbound::p_sup;
use report::{ReportRow, RunReport};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ofdma-loss", version, about = "Overload bounds for an OFDMA cell")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Escalate numerical-accuracy warnings to exit code 3.
    #[arg(long, global = true)]
    strict: bool,
    /// Write result rows as CSV to this path.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Clamp,
    Exclude,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegionArg {
    Disk,
    Cells,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form overload bound P_sup over a load-factor grid.
    Bound {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = default_alphas())]
        alpha: Vec<f64>,
    },
    /// Exact loss probability by compound-Poisson convolution, with the
    /// bound and the log10 gap.
    Exact {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = default_alphas())]
        alpha: Vec<f64>,
    },
    /// Monte Carlo estimate of the loss probability at one load factor.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long)]
        reps: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Multicell best-server analysis over an antenna layout.
    Multicell {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        layout: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = default_alphas())]
        alpha: Vec<f64>,
        /// Also run the Monte Carlo validation with this many replications.
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Report the literal association variant next to the max-SIR rule.
        #[arg(long)]
        both_associations: bool,
        #[arg(long, value_enum)]
        outage_policy: Option<PolicyArg>,
        /// Truncation radius; defaults to the layout extent plus one cell.
        #[arg(long)]
        region_radius: Option<f64>,
        #[arg(long, value_enum, default_value = "cells")]
        region: RegionArg,
    },
    /// Reproduce the full reference tables (bound, exact, multicell).
    Tables {
        #[arg(long, default_value = "configs")]
        config_dir: PathBuf,
        #[arg(long)]
        layout: Option<PathBuf>,
        #[arg(long, default_value = "report")]
        out: PathBuf,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

fn default_alphas() -> Vec<f64> {
    vec![1.5, 1.6, 1.7, 1.8, 1.9, 2.0]
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn accuracy(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Failure::config(e.to_string())
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Accuracy(_) => Failure::accuracy(e.to_string()),
            _ => Failure::config(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut warnings: Vec<String> = Vec::new();
    let result = run(&cli, &mut warnings);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    match result {
        Ok(()) => {
            if cli.strict && !warnings.is_empty() {
                eprintln!("error: accuracy warnings escalated under --strict");
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli, warnings: &mut Vec<String>) -> Result<(), Failure> {
    let report = match &cli.command {
        Command::Bound { config, alpha } => cmd_bound(config, alpha)?,
        Command::Exact { config, alpha } => cmd_exact(config, alpha)?,
        Command::Simulate { config, alpha, reps, seed, workers } => {
            cmd_simulate(config, *alpha, *reps, *seed, *workers, warnings)?
        }
        Command::Multicell {
            config,
            layout,
            alpha,
            reps,
            seed,
            workers,
            both_associations,
            outage_policy,
            region_radius,
            region,
        } => cmd_multicell(
            config,
            layout,
            alpha,
            *reps,
            *seed,
            *workers,
            *both_associations,
            *outage_policy,
            *region_radius,
            *region,
            warnings,
        )?,
        Command::Tables { config_dir, layout, out, reps, seed, workers } => {
            return cmd_tables(config_dir, layout.as_deref(), out, *reps, *seed, *workers, warnings);
        }
    };
    println!("{}", report.to_markdown());
    if let Some(path) = &cli.csv {
        std::fs::write(path, report.to_csv())
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn validate_alphas(alphas: &[f64]) -> Result<(), Failure> {
    if alphas.is_empty() {
        return Err(Failure::config("need at least one load factor"));
    }
    for &a in alphas {
        if !(a >= 1.0) || !a.is_finite() {
            return Err(Failure::config(format!("load factors must be >= 1, got {a}")));
        }
    }
    Ok(())
}

fn scenario_echo(sc: &Scenario) -> Vec<(String, String)> {
    let mut echo = vec![
        (
            "mode".into(),
            match sc.mode {
                Mode::Deterministic => "deterministic",
                Mode::Shadowed => "shadowed",
                Mode::Multicell => "multicell",
            }
            .to_string(),
        ),
        ("gamma".into(), sc.radio.gamma.to_string()),
        ("c0".into(), sc.radio.c0.to_string()),
        ("w".into(), sc.radio.w.to_string()),
        ("p_ratio".into(), sc.radio.p_ratio.to_string()),
        ("mean_gain".into(), sc.radio.mean_gain.to_string()),
        ("beta_min".into(), sc.radio.beta_min.to_string()),
        ("rho (s^-1 m^-2)".into(), sc.traffic.rho.to_string()),
        ("nu (s^-1)".into(), sc.traffic.nu.to_string()),
        ("radius".into(), sc.cell.radius.to_string()),
        (
            "outage_policy".into(),
            match sc.outage_policy {
                OutagePolicy::ClampToNmax => "clamp",
                OutagePolicy::Exclude => "exclude",
            }
            .to_string(),
        ),
    ];
    if let Some(sh) = sc.shadowing {
        echo.push(("mu_db".into(), sh.mu_db.to_string()));
        echo.push(("sigma_db".into(), sh.sigma_db.to_string()));
    }
    echo
}

fn provenance(extra: &[(&str, String)]) -> Vec<(String, String)> {
    let mut p = vec![("version".to_string(), env!("CARGO_PKG_VERSION").to_string())];
    p.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    p
}

fn single_cell_inputs(sc: &Scenario) -> Result<(ClassMasses, MomentPair), Failure> {
    let cm = class_masses(sc)?;
    let mp = moments_from_classes(&cm);
    Ok((cm, mp))
}

fn base_report(title: &str, sc: &Scenario, cm: &ClassMasses, mp: MomentPair) -> RunReport {
    RunReport {
        title: title.to_string(),
        scenario_echo: scenario_echo(sc),
        class_masses: cm.lambdas.clone(),
        moments: mp,
        n_max: cm.n_max(),
        rows: Vec::new(),
        provenance: provenance(&[]),
        notes: Vec::new(),
    }
}

fn cmd_bound(config: &PathBuf, alphas: &[f64]) -> Result<RunReport, Failure> {
    validate_alphas(alphas)?;
    let sc = config::load_scenario(config)?;
    let (cm, mp) = single_cell_inputs(&sc)?;
    let mut report = base_report("Overload bound", &sc, &cm, mp);
    if sc.mode == Mode::Deterministic {
        let t = compute_thresholds(&sc)?;
        report
            .notes
            .push(format!("demand radii: [{}]", t.radii.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")));
    }
    for &alpha in alphas {
        report.rows.push(ReportRow {
            alpha,
            n0: alpha * mp.m,
            p_sup: p_sup(alpha, &mp, cm.n_max())?,
            ..Default::default()
        });
    }
    Ok(report)
}

fn exact_rows(cm: &ClassMasses, mp: MomentPair, alphas: &[f64]) -> Result<Vec<ReportRow>, Failure> {
    let mut rows = Vec::new();
    for &alpha in alphas {
        let n0 = (alpha * mp.m).floor() as u64;
        let bound = p_sup(alpha, &mp, cm.n_max())?;
        let gt = exact_loss(cm, n0, true)?;
        let ge = exact_loss(cm, n0, false)?;
        rows.push(ReportRow {
            alpha,
            n0: n0 as f64,
            p_sup: bound,
            p_exact_gt: Some(gt),
            p_exact_ge: Some(ge),
            delta: (gt > 0.0).then(|| (bound / gt).log10()),
            ..Default::default()
        });
    }
    Ok(rows)
}

fn cmd_exact(config: &PathBuf, alphas: &[f64]) -> Result<RunReport, Failure> {
    validate_alphas(alphas)?;
    let sc = config::load_scenario(config)?;
    let (cm, mp) = single_cell_inputs(&sc)?;
    let mut report = base_report("Exact loss probability", &sc, &cm, mp);
    report.rows = exact_rows(&cm, mp, alphas)?;
    Ok(report)
}

fn cmd_simulate(
    config: &PathBuf,
    alpha: f64,
    reps: u64,
    seed: u64,
    workers: usize,
    warnings: &mut Vec<String>,
) -> Result<RunReport, Failure> {
    validate_alphas(&[alpha])?;
    let sc = config::load_scenario(config)?;
    let (cm, mp) = single_cell_inputs(&sc)?;
    let n0 = (alpha * mp.m).floor() as u64;
    let est = estimate_loss_with_workers(&sc, n0, reps, seed, workers)?;
    if let Some(w) = &est.warning {
        warnings.push(w.clone());
    }
    let exact = exact_loss(&cm, n0, true)?;
    let mut report = base_report("Monte Carlo loss estimate", &sc, &cm, mp);
    report.rows.push(ReportRow {
        alpha,
        n0: n0 as f64,
        p_sup: p_sup(alpha, &mp, cm.n_max())?,
        p_exact_gt: Some(exact),
        p_hat: Some(est.p_hat),
        ci_low: Some(est.ci_low),
        ci_high: Some(est.ci_high),
        n_reps: Some(est.n_reps),
        seed: Some(est.seed),
        delta: (est.p_hat > 0.0).then(|| (p_sup(alpha, &mp, cm.n_max()).unwrap() / est.p_hat).log10()),
        ..Default::default()
    });
    report.provenance.push(("seed".into(), seed.to_string()));
    report.provenance.push(("workers".into(), workers.to_string()));
    report.provenance.push(("method".into(), est.method.to_string()));
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn cmd_multicell(
    config: &PathBuf,
    layout_path: &PathBuf,
    alphas: &[f64],
    reps: Option<u64>,
    seed: u64,
    workers: usize,
    both_associations: bool,
    outage_policy: Option<PolicyArg>,
    region_radius: Option<f64>,
    region: RegionArg,
    warnings: &mut Vec<String>,
) -> Result<RunReport, Failure> {
    validate_alphas(alphas)?;
    let mut base = config::load_scenario(config)?;
    let layout = config::load_layout(layout_path)?;
    if let Some(policy) = outage_policy {
        base.outage_policy = match policy {
            PolicyArg::Clamp => OutagePolicy::ClampToNmax,
            PolicyArg::Exclude => OutagePolicy::Exclude,
        };
    }
    let region = match region {
        RegionArg::Disk => UserRegion::Disk,
        RegionArg::Cells => UserRegion::Cells,
    };
    let region_radius = region_radius
        .unwrap_or_else(|| layout.max_interferer_distance() + base.cell.radius);
    let mc = MulticellScenario {
        base,
        layout,
        region_radius,
        association: Association::MaxSir,
        region,
    };
    let spec = QuadSpec { abs_tol: 1e-7, rel_tol: 1e-6, max_subdivisions: 800 };
    let cm = multicell_class_masses(&mc, &spec)?;
    let mp = moments_from_classes(&cm);

    let mut report = base_report("Multicell best-server analysis", &mc.base, &cm, mp);
    report.scenario_echo.push(("antennas".into(), format!("{}", mc.layout.interferers.len() + 1)));
    report.scenario_echo.push(("region_radius".into(), region_radius.to_string()));
    report
        .scenario_echo
        .push(("region".into(), format!("{:?}", mc.region).to_lowercase()));
    report.notes.push(format!("max_sir association: m = {}, v = {}", mp.m, mp.v));

    if both_associations {
        let literal = MulticellScenario { association: Association::InvertedRatio, ..mc.clone() };
        let cm_lit = multicell_class_masses(&literal, &spec)?;
        let mp_lit = moments_from_classes(&cm_lit);
        report
            .notes
            .push(format!("literal association: m = {}, v = {}", mp_lit.m, mp_lit.v));
    }
    {
        // moments under the other outage policy, for comparison
        let other_policy = match mc.base.outage_policy {
            OutagePolicy::ClampToNmax => OutagePolicy::Exclude,
            OutagePolicy::Exclude => OutagePolicy::ClampToNmax,
        };
        let flipped = MulticellScenario {
            base: Scenario { outage_policy: other_policy, ..mc.base },
            ..mc.clone()
        };
        let mp_flip = moments_from_classes(&multicell_class_masses(&flipped, &spec)?);
        report.notes.push(format!(
            "{} policy instead gives m = {}, v = {}",
            match other_policy {
                OutagePolicy::ClampToNmax => "clamp",
                OutagePolicy::Exclude => "exclude",
            },
            mp_flip.m,
            mp_flip.v
        ));
    }

    for &alpha in alphas {
        let n0 = (alpha * mp.m).floor() as u64;
        let bound = p_sup(alpha, &mp, cm.n_max())?;
        // loss from the quadrature class masses: exact convolution of an
        // approximately known intensity, hence "semi-exact"
        let gt = exact_loss(&cm, n0, true)?;
        let mut row = ReportRow {
            alpha,
            n0: n0 as f64,
            p_sup: bound,
            p_exact_gt: Some(gt),
            p_exact_ge: Some(exact_loss(&cm, n0, false)?),
            delta: (gt > 0.0).then(|| (bound / gt).log10()),
            ..Default::default()
        };
        if let Some(reps) = reps {
            let est = estimate_loss_multicell_with_workers(&mc, n0, reps, seed, workers)?;
            if let Some(w) = &est.warning {
                warnings.push(format!("alpha {alpha}: {w}"));
            }
            row.p_hat = Some(est.p_hat);
            row.ci_low = Some(est.ci_low);
            row.ci_high = Some(est.ci_high);
            row.n_reps = Some(est.n_reps);
            row.seed = Some(seed);
        }
        report.rows.push(row);
    }
    report.provenance.push(("quad_rel_tol".into(), spec.rel_tol.to_string()));
    report.provenance.push(("seed".into(), seed.to_string()));
    report.notes.push("loss columns are semi-exact: exact convolution of quadrature masses".into());
    Ok(report)
}

fn cmd_tables(
    config_dir: &PathBuf,
    layout: Option<&std::path::Path>,
    out: &PathBuf,
    reps: Option<u64>,
    seed: u64,
    workers: usize,
    warnings: &mut Vec<String>,
) -> Result<(), Failure> {
    let alphas = default_alphas();
    let sec3 = config_dir.join("paper_sec3.cfg");
    let sec4 = config_dir.join("paper_sec4.cfg");
    let layout_path = layout
        .map(PathBuf::from)
        .unwrap_or_else(|| config_dir.join("hex7.layout"));

    let bound3 = cmd_exact(&sec3, &alphas)?;
    let bound4 = cmd_exact(&sec4, &alphas)?;
    let multi = cmd_multicell(
        &sec4,
        &layout_path,
        &alphas,
        reps,
        seed,
        workers,
        true,
        None,
        None,
        RegionArg::Cells,
        warnings,
    )?;

    std::fs::create_dir_all(out)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", out.display())))?;
    let mut md = String::new();
    for (name, rep) in
        [("table1", &bound3), ("table2", &bound4), ("multicell", &multi)]
    {
        md.push_str(&rep.to_markdown());
        md.push('\n');
        let csv_path = out.join(format!("{name}.csv"));
        std::fs::write(&csv_path, rep.to_csv())
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", csv_path.display())))?;
    }
    let md_path = out.join("report.md");
    std::fs::write(&md_path, &md)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", md_path.display())))?;
    println!("{md}");
    println!("wrote {}", out.display());
    Ok(())
}
