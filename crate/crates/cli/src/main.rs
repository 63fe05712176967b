//! `verify`: run verification suites on a scene file and write JSON/CSV reports.
//!
//! Exit status: 0 when every selected suite passes, 1 when a check fails,
//! 2 for usage or configuration errors, 3 when a computation errors out.

mod config;
mod report;
mod suites;

use clap::{CommandFactory, Parser};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;
use suites::{Ctx, Outcome, Sizes, SUITES};

#[derive(Parser, Debug)]
#[command(name = "verify", about = "Numerical verification suites for Lie groupoids and their bisection groups")]
struct Args {
    /// Scene description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Suites to run.
    #[arg(long, num_args = 1.., required = true, value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
    suite: Vec<String>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}\n");
    eprintln!("{}", Args::command().render_usage());
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            if !e.to_string().contains("Usage:") {
                eprintln!("\n{}", Args::command().render_usage());
            }
            return ExitCode::from(2);
        }
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return usage_error(&format!("cannot read {}: {e}", args.config.display())),
    };
    let cfg = match config::parse(&text) {
        Ok(c) => c,
        Err(e) => return usage_error(&format!("invalid config {}: {e}", args.config.display())),
    };
    for key in cfg.tolerances.keys() {
        let suite = key.split('.').next().unwrap_or_default();
        if !SUITES.contains(&suite) {
            return usage_error(&format!("tolerance `{key}` names no suite"));
        }
    }
    let gpd = match cfg.groupoid.build() {
        Ok(g) => g,
        Err(e) => return usage_error(&format!("invalid groupoid: {e}")),
    };
    if let Err(e) = config::validate(&cfg, &gpd) {
        return usage_error(&format!("invalid config {}: {e}", args.config.display()));
    }
    if matches!(args.grid, Some(0)) || matches!(args.steps, Some(0)) {
        return usage_error("--grid and --steps must be positive");
    }
    let sizes = Sizes {
        seed: args.seed.unwrap_or(cfg.run.seed),
        grid: args.grid.unwrap_or(cfg.run.grid),
        steps: args.steps.unwrap_or(cfg.run.steps),
        samples: cfg.run.samples,
        bracket_step: cfg.run.bracket_step,
    };
    let mut selected: Vec<&'static str> = Vec::new();
    for s in &args.suite {
        let name = SUITES.iter().copied().find(|k| k == s).expect("clap validated the name");
        if let Err(msg) = suites::compatible(name, &gpd) {
            return usage_error(&msg);
        }
        if !selected.contains(&name) {
            selected.push(name);
        }
    }
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("error: cannot create {}: {e}", args.out.display());
        return ExitCode::from(3);
    }

    // Suites are independent; run them side by side and write the reports in order.
    let results: Vec<(lie_bisections::Result<Outcome>, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|&suite| {
                let ctx = Ctx { suite, gpd: &gpd, cfg: &cfg, sizes };
                scope.spawn(move || {
                    let t = Instant::now();
                    let r = suites::run(&ctx);
                    (r, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
    });

    let (mut failed, mut errored) = (false, false);
    let mut timing = BTreeMap::new();
    for (suite, (result, secs)) in selected.iter().zip(results) {
        timing.insert(suite.to_string(), secs);
        match result {
            Ok(outcome) => {
                let status = if outcome.pass() { "PASS" } else { "FAIL" };
                println!("{status} {suite}");
                for c in &outcome.checks {
                    println!("  {} {:<28} {:e} (tol {:e})", if c.pass { "ok  " } else { "FAIL" }, c.name, c.residual, c.tol);
                }
                failed |= !outcome.pass();
                if let Err(e) = report::write_suite(&args.out, suite, &outcome, suites::base_meta(&gpd, &sizes)) {
                    eprintln!("error: writing {suite} report: {e}");
                    errored = true;
                }
            }
            Err(e) => {
                println!("ERROR {suite}: {e}");
                errored = true;
            }
        }
    }
    if let Err(e) = report::write_timing(&args.out, &timing) {
        eprintln!("error: writing timing: {e}");
        errored = true;
    }
    if errored {
        ExitCode::from(3)
    } else if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
