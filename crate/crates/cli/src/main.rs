//! Command-line front end: exact predictions, parameter sweeps, finite-shot
//! simulation, counts-file analysis, detector calibration and the continuum
//! tables.

mod formats;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use formats::{ensure_dir, fmt_f64, write_csv, CalibrationFixture, ProtocolFile, RunManifest};
use weakreal::calibration::{
    anticommutation_residual, calibrate, combine_effects, combine_preparations, magnitude_bounds,
    prob_matrices, AuxVectors,
};
use weakreal::continuum::{
    cat_alpha_second, fock_check, grid, wigner_cat, wigner_conditional_ratio,
};
use weakreal::imperfect::NoiseParams;
use weakreal::protocol::{
    contrast_expectations, ideal_limit_expectations, sweep, violation_lhs, ContrastConfig,
    ExpectationSet, Order, ViolationReport,
};
use weakreal::sampler::{
    bootstrap_sigma, estimate, sample_counts, violation_significance, CountsTable, Estimates,
    SimulationPlan,
};
use weakreal::FORMAT_VERSION;

#[derive(Parser)]
#[command(
    name = "weakreal",
    version,
    about = "Sequential weak-measurement toolkit"
)]
struct Cli {
    /// Emit machine-readable JSON on stdout where supported.
    #[arg(long, global = true)]
    json: bool,

    /// Master seed for anything stochastic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact expectations and the inequality ratio at one (ψ, θ).
    Predict(PredictArgs),
    /// Tabulate the ratio over a (ψ, θ) grid into a CSV file.
    Sweep(SweepArgs),
    /// Sample shot counts for both measurement orders and analyze them.
    Simulate(SimulateArgs),
    /// Estimate correlations and significance from counts files.
    Analyze(AnalyzeArgs),
    /// Run the four-outcome detector calibration on a fixture file.
    Calibrate(CalibrateArgs),
    /// Continuum tables: two-Gaussian scans, phase-space maps, oscillator
    /// eigenstates.
    #[command(subcommand)]
    Continuum(ContinuumCmd),
}

#[derive(Args)]
struct PredictArgs {
    /// Angle between initial and final state, radians in [0, π).
    #[arg(long, allow_hyphen_values = true)]
    psi: Option<f64>,
    /// Coupling angle, radians; the strength is λ = sin θ.  θ = 0 reports
    /// the weak limit.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Protocol config file (JSON); flags override its angles.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 0.0)]
    psi_min: f64,
    #[arg(long, default_value_t = 1.5)]
    psi_max: f64,
    #[arg(long, default_value_t = 16)]
    psi_steps: usize,
    #[arg(long, default_value_t = 0.0)]
    theta_min: f64,
    #[arg(long, default_value_t = 1.2)]
    theta_max: f64,
    #[arg(long, default_value_t = 13)]
    theta_steps: usize,
}

#[derive(Args)]
struct SimulateArgs {
    /// Protocol config file (JSON).
    config: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, default_value_t = 25)]
    reps: u32,
    #[arg(long, default_value_t = 4)]
    jobs: u32,
    /// Which measurement orders to run: ab, ba or both.
    #[arg(long, default_value = "both")]
    orders: String,
    /// Bootstrap resamples for the audit error bar (0 disables).
    #[arg(long, default_value_t = 200)]
    bootstrap: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Counts files (JSON), grouped by measurement order.
    files: Vec<PathBuf>,
    /// Bootstrap resamples for the audit error bar (0 disables).
    #[arg(long, default_value_t = 200)]
    bootstrap: usize,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Calibration fixture (JSON).
    fixture: PathBuf,
}

#[derive(Subcommand)]
enum ContinuumCmd {
    /// Midpoint log-amplitude curvature and conditional momentum ratio of
    /// the two-Gaussian state over a separation scan.
    Cat {
        #[arg(long, default_value_t = 2.5)]
        a_max: f64,
        #[arg(long, default_value_t = 26)]
        steps: usize,
    },
    /// Phase-space quasiprobability of the two-Gaussian state on a grid.
    Wigner {
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long, default_value_t = 81)]
        points: usize,
        #[arg(long, default_value_t = 4.0)]
        half_width: f64,
    },
    /// Oscillator-eigenstate log-concavity scan.
    Fock {
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("WEAKREAL_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Predict(args) => cmd_predict(args, cli.json),
        Command::Sweep(args) => cmd_sweep(args, cli.out.as_deref()),
        Command::Simulate(args) => cmd_simulate(args, cli.json, cli.seed, cli.out.as_deref()),
        Command::Analyze(args) => cmd_analyze(args, cli.json, cli.seed, cli.out.as_deref()),
        Command::Calibrate(args) => cmd_calibrate(args, cli.json, cli.out.as_deref()),
        Command::Continuum(cmd) => cmd_continuum(cmd, cli.out.as_deref()),
    }
}

fn scaled_components(e: &ExpectationSet, lambda: f64) -> serde_json::Value {
    let l = if lambda == 0.0 { 1.0 } else { lambda };
    json!({
        "c": e.c,
        "a_per_lambda": e.a / l,
        "b_per_lambda": e.b / l,
        "ac_per_lambda": e.ac / l,
        "bc_per_lambda": e.bc / l,
        "ab_per_lambda2": e.ab / (l * l),
        "abc_per_lambda2": e.abc / (l * l),
    })
}

fn print_report(e: &ExpectationSet, report: &ViolationReport, lambda: f64, limit_mode: bool) {
    if limit_mode {
        println!("weak limit (λ → 0); entries scaled: a,b,ac,bc per λ and ab,abc per λ²");
    } else {
        println!("exact evaluation at λ = {}", fmt_f64(lambda));
    }
    println!("  c   = {}", fmt_f64(e.c));
    println!("  a   = {}", fmt_f64(e.a));
    println!("  b   = {}", fmt_f64(e.b));
    println!("  ac  = {}", fmt_f64(e.ac));
    println!("  bc  = {}", fmt_f64(e.bc));
    println!("  ab  = {}", fmt_f64(e.ab));
    println!("  abc = {}", fmt_f64(e.abc));
    match report.lhs {
        Some(lhs) => {
            let verdict = if lhs > report.classical_bound {
                "VIOLATION"
            } else {
                "no violation"
            };
            println!(
                "lhs = {} (classical bound {}): {verdict}",
                fmt_f64(lhs),
                report.classical_bound
            );
        }
        None => println!("lhs indeterminate (0/0 at this point)"),
    }
}

fn cmd_predict(args: PredictArgs, as_json: bool) -> Result<()> {
    let mut psi = args.psi;
    let mut theta = args.theta;
    let mut noise: (Option<NoiseParams>, Option<NoiseParams>) = (None, None);
    let mut order = Order::AB;
    if let Some(path) = &args.config {
        let file = ProtocolFile::load(path)?;
        psi = psi.or(Some(file.psi));
        theta = theta.or(Some(file.theta));
        noise = (file.noise_a, file.noise_b);
        order = file.order;
    }
    let (psi, theta) = match (psi, theta) {
        (Some(p), Some(t)) => (p, t),
        _ => bail!("predict needs --psi and --theta (or --config)"),
    };
    let lambda = theta.sin();
    let limit_mode = theta == 0.0;
    let (e, report) = if limit_mode {
        if noise.0.is_some() || noise.1.is_some() {
            eprintln!("note: the weak limit is noise-independent; noise blocks ignored at θ = 0");
        }
        let e = ideal_limit_expectations(psi);
        (e, violation_lhs(&e))
    } else {
        let cfg = ContrastConfig {
            psi,
            theta,
            order,
            noise_a: noise.0,
            noise_b: noise.1,
        };
        let e = contrast_expectations(&cfg).map_err(|err| anyhow::anyhow!("{err}"))?;
        (e, violation_lhs(&e))
    };
    if report.indeterminate {
        eprintln!("warning: the ratio is indeterminate (0/0) at ψ = {psi}");
    }
    if as_json {
        let payload = json!({
            "version": FORMAT_VERSION,
            "mode": if limit_mode { "limit" } else { "exact" },
            "psi": psi,
            "theta": theta,
            "lambda": lambda,
            "components": e,
            "scaled": if limit_mode { serde_json::Value::Null } else { scaled_components(&e, lambda) },
            "lhs": report.lhs,
            "indeterminate": report.indeterminate,
            "classical_bound": report.classical_bound,
        });
        println!("{}", serde_json::to_string_pretty(&payload)?);
    } else {
        println!("psi = {} rad, theta = {} rad", fmt_f64(psi), fmt_f64(theta));
        print_report(&e, &report, lambda, limit_mode);
    }
    Ok(())
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

fn cmd_sweep(args: SweepArgs, out: Option<&Path>) -> Result<()> {
    let out = out.context("sweep needs --out FILE.csv")?;
    let psis = linspace(args.psi_min, args.psi_max, args.psi_steps);
    let lambdas: Vec<f64> = linspace(args.theta_min, args.theta_max, args.theta_steps)
        .iter()
        .map(|t| t.sin())
        .collect();
    let rows = sweep(&psis, &lambdas).map_err(|e| anyhow::anyhow!("{e}"))?;
    let lines: Vec<String> = rows
        .iter()
        .map(|r| {
            let lhs = match r.lhs {
                Some(v) => fmt_f64(v),
                None => "nan".to_string(),
            };
            format!(
                "{},{},{},{}",
                fmt_f64(r.psi),
                fmt_f64(r.lambda),
                lhs,
                u8::from(r.indeterminate)
            )
        })
        .collect();
    write_csv(out, "psi,lambda,lhs,indeterminate", &lines)?;
    println!("wrote {} rows to {}", lines.len(), out.display());
    Ok(())
}

fn order_tag(order: Order) -> &'static str {
    match order {
        Order::AB => "ab",
        Order::BA => "ba",
    }
}

fn estimates_rows(est: &Estimates) -> Vec<String> {
    est.rows()
        .iter()
        .map(|(name, e)| format!("{name},{},{}", fmt_f64(e.value), fmt_f64(e.sigma)))
        .collect()
}

fn report_group(
    order: Order,
    tables: &[CountsTable],
    bootstrap: usize,
    seed: u64,
    as_json: bool,
    out: Option<&Path>,
) -> Result<serde_json::Value> {
    let est = estimate(tables).map_err(|e| anyhow::anyhow!("{e}"))?;
    let sig = violation_significance(&est).map_err(|e| anyhow::anyhow!("{e}"))?;
    let boot = if bootstrap > 0 {
        Some(bootstrap_sigma(tables, bootstrap, seed).map_err(|e| anyhow::anyhow!("{e}"))?)
    } else {
        None
    };
    if let Some(dir) = out {
        let path = dir.join(format!("estimates_{}.csv", order_tag(order)));
        write_csv(&path, "quantity,value,sigma", &estimates_rows(&est))?;
    }
    if !as_json {
        let runs_per_setting = est.shots_per_setting / tables[0].meta.shots.max(1);
        println!(
            "order {order}: {} runs per setting x {} shots",
            runs_per_setting, tables[0].meta.shots
        );
        for (name, e) in est.rows() {
            println!("  {name:<4} = {:>13.6e} +- {:.3e}", e.value, e.sigma);
        }
        println!(
            "  lhs  = {:.6} +- {:.6} (analytic), z = {:.2}{}",
            sig.lhs.value,
            sig.lhs.sigma,
            sig.z_score,
            if sig.exact { " [exact]" } else { "" }
        );
        if let Some(b) = &boot {
            println!("  lhs  = {:.6} +- {:.6} (bootstrap)", b.value, b.sigma);
        }
    }
    Ok(json!({
        "order": format!("{order}"),
        "estimates": est,
        "lhs": sig.lhs,
        "z_score": sig.z_score,
        "exact": sig.exact,
        "bootstrap": boot,
    }))
}

fn cmd_simulate(
    args: SimulateArgs,
    as_json: bool,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<()> {
    let out = out.context("simulate needs --out DIR")?;
    ensure_dir(out)?;
    let cfg = ProtocolFile::load(&args.config)?;
    let seed = seed.unwrap_or(0);
    let orders: Vec<Order> = match args.orders.as_str() {
        "both" => vec![Order::AB, Order::BA],
        "ab" | "AB" => vec![Order::AB],
        "ba" | "BA" => vec![Order::BA],
        other => bail!("unknown orders selection {other:?} (use ab, ba or both)"),
    };
    let mut groups = Vec::new();
    for (oi, order) in orders.iter().enumerate() {
        let plan = SimulationPlan {
            psi: cfg.psi,
            theta: cfg.theta,
            order: *order,
            shots: args.shots,
            reps: args.reps,
            jobs: args.jobs,
            seed: seed.wrapping_add(oi as u64),
            noise_a: cfg.noise_a,
            noise_b: cfg.noise_b,
        };
        let tables = sample_counts(&plan).map_err(|e| anyhow::anyhow!("{e}"))?;
        for (job, table) in tables.iter().enumerate() {
            let path = out.join(format!("counts_job{job:03}_{}.json", order_tag(*order)));
            std::fs::write(&path, format!("{}\n", table.to_json()))
                .with_context(|| format!("writing {}", path.display()))?;
        }
        groups.push(report_group(
            *order,
            &tables,
            args.bootstrap,
            seed,
            as_json,
            Some(out),
        )?);
    }
    RunManifest::new("simulate", Some(&args.config), Some(seed), out).write(out)?;
    if as_json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "version": FORMAT_VERSION,
                "psi": cfg.psi,
                "theta": cfg.theta,
                "shots": args.shots,
                "reps": args.reps,
                "jobs": args.jobs,
                "seed": seed,
                "groups": groups,
            }))?
        );
    }
    Ok(())
}

fn cmd_analyze(
    args: AnalyzeArgs,
    as_json: bool,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<()> {
    if args.files.is_empty() {
        bail!("analyze needs at least one counts file");
    }
    if let Some(dir) = out {
        ensure_dir(dir)?;
    }
    let mut by_order: Vec<(Order, Vec<CountsTable>)> = Vec::new();
    for path in &args.files {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let table = CountsTable::from_json(&text)
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        match by_order.iter_mut().find(|(o, _)| *o == table.meta.order) {
            Some((_, group)) => group.push(table),
            None => by_order.push((table.meta.order, vec![table])),
        }
    }
    let seed = seed.unwrap_or(0);
    let mut groups = Vec::new();
    for (order, tables) in &by_order {
        groups.push(report_group(
            *order,
            tables,
            args.bootstrap,
            seed,
            as_json,
            out,
        )?);
    }
    if let Some(dir) = out {
        RunManifest::new("analyze", None, Some(seed), dir).write(dir)?;
    }
    if as_json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "version": FORMAT_VERSION,
                "groups": groups,
            }))?
        );
    }
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs, as_json: bool, out: Option<&Path>) -> Result<()> {
    let fixture = CalibrationFixture::load(&args.fixture)?;
    let pm = prob_matrices(
        &fixture.preparations,
        &fixture.povm,
        &fixture.q,
        fixture.lambda,
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let result = calibrate(&pm, &AuxVectors::default()).map_err(|e| anyhow::anyhow!("{e}"))?;
    let bounds = magnitude_bounds(&result, &pm.w);
    let residual = anticommutation_residual(&fixture.povm, &fixture.preparations, &result);
    let (mu0, mu) = combine_effects(&fixture.povm, &result.mbar);
    let (rho0, rho) = combine_preparations(&fixture.preparations, &result.pbar);
    let payload = json!({
        "version": FORMAT_VERSION,
        "w": pm.w,
        "v": pm.v,
        "result": result,
        "bounds": bounds,
        "reconstructed": {
            "mu0_bar": mu0,
            "mu_bar": mu,
            "rho0_bar": rho0,
            "rho_bar": rho,
            "anticommutation_residual": residual,
        },
    });
    let text = serde_json::to_string_pretty(&payload)?;
    if let Some(path) = out {
        std::fs::write(path, format!("{text}\n"))
            .with_context(|| format!("writing {}", path.display()))?;
        println!("wrote calibration report to {}", path.display());
    } else if as_json {
        println!("{text}");
    } else {
        println!("pbar = {:?}", result.pbar);
        println!("mbar = {:?}", result.mbar);
        println!("mu0' = {}", fmt_f64(result.mu0prime));
        println!(
            "|rho_bar| in [{}, {}], |mu_bar| in [{}, {}]",
            fmt_f64(bounds.rho_lower),
            fmt_f64(bounds.rho_upper),
            fmt_f64(bounds.mu_lower),
            fmt_f64(bounds.mu_upper)
        );
        println!("anticommutation residual = {residual:.3e}");
    }
    Ok(())
}

fn cmd_continuum(cmd: ContinuumCmd, out: Option<&Path>) -> Result<()> {
    match cmd {
        ContinuumCmd::Cat { a_max, steps } => {
            if a_max <= 0.0 || steps < 2 {
                bail!("cat scan needs a_max > 0 and at least 2 steps");
            }
            let rows: Vec<String> = linspace(0.0, a_max, steps)
                .iter()
                .map(|&a| {
                    format!(
                        "{},{},{}",
                        fmt_f64(a),
                        fmt_f64(cat_alpha_second(a, 0.0)),
                        fmt_f64(wigner_conditional_ratio(a))
                    )
                })
                .collect();
            match out {
                Some(path) => {
                    write_csv(path, "a,alpha_second,conditional_ratio", &rows)?;
                    println!("wrote {} rows to {}", rows.len(), path.display());
                }
                None => {
                    println!("a,alpha_second,conditional_ratio");
                    for row in rows {
                        println!("{row}");
                    }
                }
            }
        }
        ContinuumCmd::Wigner {
            a,
            points,
            half_width,
        } => {
            if points < 2 || half_width <= 0.0 {
                bail!("wigner map needs at least 2 points and a positive half width");
            }
            let xs = grid(half_width, points);
            let mut rows = Vec::with_capacity(points * points);
            for &x in &xs {
                for &q in &xs {
                    rows.push(format!(
                        "{},{},{}",
                        fmt_f64(x),
                        fmt_f64(q),
                        fmt_f64(wigner_cat(x, q, a))
                    ));
                }
            }
            let path = out.context("wigner map needs --out FILE.csv")?;
            write_csv(path, "x,q,w", &rows)?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        ContinuumCmd::Fock { n_max } => {
            let xs = grid(6.0, 2001);
            let mut rows = Vec::new();
            println!("n,max_alpha_second,violates");
            for n in 0..=n_max {
                let check = fock_check(n, &xs).map_err(|e| anyhow::anyhow!("{e}"))?;
                let line = format!(
                    "{n},{},{}",
                    fmt_f64(check.max_alpha_second),
                    u8::from(check.violates)
                );
                println!("{line}");
                rows.push(line);
            }
            if let Some(path) = out {
                write_csv(path, "n,max_alpha_second,violates", &rows)?;
            }
        }
    }
    Ok(())
}
