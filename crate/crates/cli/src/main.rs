use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eulerdeg::topology::{catalog_chi, CATALOG};
use eulerdeg_cli::{bundled, run_scenario, CliError, RunOptions, Scenario};
use serde_json::json;

#[derive(Parser)]
#[command(name = "eulerdeg", version, about = "Euler characteristics from vector fields, frames and curvature")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files or bundled scenarios by name.
    Run {
        scenarios: Vec<String>,
        /// Run every bundled scenario.
        #[arg(long)]
        bundled: bool,
        /// Multiplies all default grid and quadrature resolutions.
        #[arg(long, default_value_t = 1.0)]
        resolution_scale: f64,
        /// Print reports as JSON instead of the summary table.
        #[arg(long)]
        json: bool,
        /// Directory for `<name>.report.json` files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Treat the half-weighted boundary formula as a hard assertion.
        #[arg(long)]
        assert_paper_boundary: bool,
    },
    /// List bundled scenarios and catalog manifolds.
    List {
        #[arg(long)]
        json: bool,
        /// Keep scenarios whose name, tag or method matches.
        #[arg(long)]
        filter: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenarios,
            bundled,
            resolution_scale,
            json,
            out,
            assert_paper_boundary,
        } => run(
            &scenarios,
            bundled,
            &RunOptions {
                resolution_scale,
                assert_paper_boundary,
            },
            json,
            &out,
        ),
        Command::List { json, filter } => list(json, filter.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(args: &[String], all: bool, opts: &RunOptions, json: bool, out: &PathBuf) -> Result<ExitCode, CliError> {
    if !(opts.resolution_scale > 0.0 && opts.resolution_scale.is_finite()) {
        return Err(CliError::Scenario("--resolution-scale must be positive".into()));
    }
    let mut scenarios: Vec<Scenario> = if all { bundled::all()? } else { Vec::new() };
    for a in args {
        scenarios.push(bundled::resolve(a)?);
    }
    if scenarios.is_empty() {
        return Err(CliError::Scenario("no scenarios given (pass paths, names or --bundled)".into()));
    }
    std::fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.clone(),
        source,
    })?;
    let mut passed = true;
    for s in &scenarios {
        let report = run_scenario(s, opts)?;
        let text = report.to_json();
        let path = out.join(format!("{}.report.json", s.name));
        std::fs::write(&path, &text).map_err(|source| CliError::Io { path, source })?;
        if json {
            print!("{text}");
        } else {
            print!("{}", report.summary_table());
        }
        for w in &report.warnings {
            eprintln!("warning: {}: {w}", s.name);
        }
        passed &= report.passed();
    }
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn list(json: bool, filter: Option<&str>) -> Result<ExitCode, CliError> {
    let scenarios: Vec<Scenario> = bundled::all()?
        .into_iter()
        .filter(|s| filter.is_none_or(|t| s.matches(t)))
        .collect();
    let manifolds = CATALOG
        .iter()
        .map(|name| Ok((*name, catalog_chi(name)?)))
        .collect::<Result<Vec<_>, eulerdeg::Error>>()?;
    if json {
        let value = json!({
            "scenarios": scenarios.iter().map(|s| json!({
                "name": s.name,
                "description": s.description,
                "tags": s.tags,
                "methods": s.methods,
            })).collect::<Vec<_>>(),
            "manifolds": manifolds.iter().map(|(n, chi)| json!({"name": n, "chi": chi})).collect::<Vec<_>>(),
        });
        println!("{}", serde_json::to_string_pretty(&value).expect("listing is serializable"));
    } else {
        println!("scenarios");
        for s in &scenarios {
            let methods: Vec<String> = s.methods.iter().map(|m| m.to_string()).collect();
            println!("  {:<26} {:<40} {}", s.name, methods.join(","), s.tags.join(","));
        }
        println!("manifolds");
        for (n, chi) in &manifolds {
            println!("  {n:<4} chi = {chi}");
        }
    }
    Ok(ExitCode::SUCCESS)
}
