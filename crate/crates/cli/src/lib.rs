//! Command implementations behind the `opdiv` binary.
//!
//! Exit codes: 0 when every comparison holds, 1 when a check reports
//! violations (or the example does not reproduce), 2 on configuration or IO
//! errors.

use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use opdiv::funcs::FunctionSpec;
use opdiv::hermitian::HermitianMatrix;
use opdiv::lab::{
    check_ids, registry, run_suite_with, ExecMode, GenConfig, RunOptions, SuiteReport,
};
use opdiv::posmap::{chain_gaps, compression_fixture, CompressionFixture};
use opdiv::tolerance::ToleranceConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Largest entrywise deviation accepted when reproducing the example.
pub const EXAMPLE_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "opdiv",
    version,
    about = "Randomized checks of operator perspective inequalities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run checks and emit a JSON report.
    Verify(CliConfig),
    /// Recompute the exact refined Jensen chain for three compressions.
    ReproduceExample(CliConfig),
    /// List registered check ids.
    ListChecks(CliConfig),
}

/// Every numeric default lives here.
#[derive(Debug, Clone, Args)]
pub struct CliConfig {
    /// Comma-separated check ids, or "all".
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long = "tol-abs", default_value_t = 1e-8)]
    pub tol_abs: f64,
    #[arg(long = "tol-rel", default_value_t = 1e-8)]
    pub tol_rel: f64,
    /// Write the report here instead of standard output.
    #[arg(long = "out")]
    pub out_path: Option<PathBuf>,
    /// Function override, e.g. '{"id":"power","params":[1.5]}'.
    #[arg(long)]
    pub function: Option<String>,
    /// Machine-readable output.
    #[arg(long)]
    pub json: bool,
}

impl Default for CliConfig {
    fn default() -> Self {
        Cli::parse_from(["opdiv", "verify"]).command.into_config()
    }
}

impl Command {
    fn into_config(self) -> CliConfig {
        match self {
            Command::Verify(c) | Command::ReproduceExample(c) | Command::ListChecks(c) => c,
        }
    }
}

impl CliConfig {
    pub fn suite_ids(&self) -> Vec<String> {
        if self.suite.trim() == "all" {
            return check_ids().into_iter().map(String::from).collect();
        }
        self.suite
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    }

    pub fn gen_config(&self) -> anyhow::Result<GenConfig> {
        let gen = GenConfig::new(self.dim, self.seed, self.trials);
        gen.validate()?;
        Ok(gen)
    }

    pub fn tolerance(&self) -> anyhow::Result<ToleranceConfig> {
        Ok(ToleranceConfig::new(self.tol_abs, self.tol_rel)?)
    }

    pub fn run_options(&self) -> anyhow::Result<RunOptions> {
        let function = match &self.function {
            None => None,
            Some(s) => {
                let spec: FunctionSpec =
                    serde_json::from_str(s).with_context(|| format!("parsing --function {s}"))?;
                Some(spec.build()?)
            }
        };
        Ok(RunOptions {
            function,
            mode: ExecMode::Parallel,
        })
    }
}

fn emit(cfg: &CliConfig, text: &str) -> anyhow::Result<()> {
    match &cfg.out_path {
        Some(p) => std::fs::write(p, format!("{text}\n"))
            .with_context(|| format!("writing {}", p.display()))?,
        None => writeln!(std::io::stdout(), "{text}")?,
    }
    Ok(())
}

/// Runs the configured suite.
pub fn verify_report(cfg: &CliConfig) -> anyhow::Result<SuiteReport> {
    let report = run_suite_with(
        &cfg.suite_ids(),
        &cfg.gen_config()?,
        &cfg.tolerance()?,
        &cfg.run_options()?,
    )?;
    Ok(report)
}

pub fn cmd_verify(cfg: &CliConfig) -> anyhow::Result<i32> {
    let report = verify_report(cfg)?;
    for c in &report.checks {
        eprintln!(
            "{:<18} trials={:<5} violations={:<5} worst_margin={:.3e}",
            c.id, c.trials, c.violations, c.worst_margin
        );
    }
    emit(cfg, &serde_json::to_string_pretty(&report)?)?;
    Ok(if report.total_violations() == 0 {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    })
}

/// Computed chain against the fixture's expected matrices.
#[derive(Debug, Clone)]
pub struct ExampleComparison {
    pub computed: [HermitianMatrix; 4],
    pub expected: [HermitianMatrix; 4],
    pub max_deviation: f64,
    pub gaps: Vec<f64>,
}

impl ExampleComparison {
    pub fn passes(&self) -> bool {
        self.max_deviation <= EXAMPLE_TOL && self.gaps.iter().all(|&g| g > 0.0)
    }
}

pub fn compare_example(ex: &CompressionFixture) -> anyhow::Result<ExampleComparison> {
    let square = opdiv::builtin("square", &[])?;
    let computed = ex.compute_chain(&square)?;
    let mut max_deviation: f64 = 0.0;
    for (c, e) in computed.iter().zip(&ex.expected_chain) {
        max_deviation = max_deviation.max(c.max_abs_diff(e)?);
    }
    let gaps = chain_gaps(&computed)?;
    Ok(ExampleComparison {
        computed,
        expected: ex.expected_chain.clone(),
        max_deviation,
        gaps,
    })
}

fn real_rows(h: &HermitianMatrix) -> Vec<Vec<f64>> {
    (0..h.dim())
        .map(|i| (0..h.dim()).map(|j| h.entry(i, j).re).collect())
        .collect()
}

pub fn render_example(cmp: &ExampleComparison, as_json: bool) -> anyhow::Result<String> {
    if as_json {
        let matrices: Vec<_> = cmp
            .computed
            .iter()
            .zip(&cmp.expected)
            .enumerate()
            .map(|(k, (c, e))| {
                Ok(json!({
                    "name": format!("M{}", k + 1),
                    "computed": real_rows(c),
                    "expected": real_rows(e),
                    "max_deviation": c.max_abs_diff(e)?,
                }))
            })
            .collect::<anyhow::Result<_>>()?;
        let v = json!({
            "matrices": matrices,
            "gaps": cmp.gaps,
            "max_deviation": cmp.max_deviation,
            "tolerance": EXAMPLE_TOL,
            "pass": cmp.passes(),
        });
        return Ok(serde_json::to_string_pretty(&v)?);
    }
    let mut out = String::new();
    let fmt = |h: &HermitianMatrix| {
        let r = real_rows(h);
        format!(
            "[[{:>8.4}, {:>8.4}], [{:>8.4}, {:>8.4}]]",
            r[0][0], r[0][1], r[1][0], r[1][1]
        )
    };
    out.push_str(&format!(
        "{:<4} {:<40} {:<40}\n",
        "", "computed", "expected"
    ));
    for (k, (c, e)) in cmp.computed.iter().zip(&cmp.expected).enumerate() {
        out.push_str(&format!("M{:<3} {:<40} {:<40}\n", k + 1, fmt(c), fmt(e)));
    }
    out.push_str(&format!(
        "max deviation {:.3e} (tolerance {:.0e})\n",
        cmp.max_deviation, EXAMPLE_TOL
    ));
    for (k, g) in cmp.gaps.iter().enumerate() {
        out.push_str(&format!("lambda_min(M{} - M{}) = {:.6}\n", k + 2, k + 1, g));
    }
    out.push_str(if cmp.passes() {
        "reproduced"
    } else {
        "NOT reproduced"
    });
    Ok(out)
}

pub fn cmd_reproduce_example(cfg: &CliConfig) -> anyhow::Result<i32> {
    let cmp = compare_example(&compression_fixture())?;
    emit(cfg, &render_example(&cmp, cfg.json)?)?;
    Ok(if cmp.passes() {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    })
}

pub fn cmd_list_checks(cfg: &CliConfig) -> anyhow::Result<i32> {
    let text = if cfg.json {
        let v: Vec<_> = registry()
            .iter()
            .map(|c| json!({"id": c.id, "description": c.description, "fixture": c.fixture}))
            .collect();
        serde_json::to_string_pretty(&v)?
    } else {
        registry()
            .iter()
            .map(|c| format!("{:<18} {}", c.id, c.description))
            .collect::<Vec<_>>()
            .join("\n")
    };
    emit(cfg, &text)?;
    Ok(EXIT_OK)
}

/// Reads `OPDIV_THREADS` (0 or unset means automatic) and sizes the global
/// rayon pool.
pub fn configure_threads() -> anyhow::Result<()> {
    let n = match std::env::var("OPDIV_THREADS") {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse::<usize>()
            .with_context(|| format!("OPDIV_THREADS={s} is not a thread count"))?,
        _ => 0,
    };
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> i32 {
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Verify(c) => cmd_verify(c),
        Command::ReproduceExample(c) => cmd_reproduce_example(c),
        Command::ListChecks(c) => cmd_list_checks(c),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}
