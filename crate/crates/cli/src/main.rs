use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use escape_core::io::config::{Precision, RunConfig};
use escape_core::io::csv::read_trace_bare;
use escape_core::io::svg::{render_svg, SvgOptions};
use escape_core::io::AnyTrace;
use escape_core::params::{certify_cascade, ParameterRecord};
use escape_core::sweep::{config_files, sweep, worker_count};
use escape_core::{Extended, Scalar, Verdict};

#[derive(Parser)]
#[command(
    name = "escape-sim",
    version,
    about = "Simulate and check the recursive lion-and-man escape strategy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print the parameter cascade and certify it.
    Params {
        #[arg(long)]
        config: PathBuf,
        /// Derive up to this level instead of the configured one.
        #[arg(long)]
        level: Option<usize>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Run a game and write its trace.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Run every checker over a trace; exits 0 only if all pass.
    Verify {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Also write the verdicts as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Render a trace as SVG.
    Plot {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        show_goals: bool,
        #[arg(long, default_value_t = 900)]
        width: u32,
        /// Man levels to draw, e.g. `--levels 1,2`.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
    },
    /// Run and check every configuration in a directory.
    Sweep {
        #[arg(long)]
        config_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker count; defaults to ESCAPE_SIM_THREADS, then all cores.
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path) -> Result<RunConfig> {
    RunConfig::load(path).with_context(|| format!("configuration {}", path.display()))
}

fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Params {
            config,
            level,
            format,
        } => params(&config, level, format),
        Command::Simulate {
            config,
            out,
            manifest,
        } => simulate(&config, &out, manifest.as_deref()),
        Command::Verify {
            trace,
            config,
            json,
        } => verify(&trace, &config, json.as_deref()),
        Command::Plot {
            trace,
            out,
            config,
            show_goals,
            width,
            levels,
        } => {
            let options = SvgOptions {
                width_px: width,
                show_goals,
                level_filter: levels,
            };
            let svg = match config {
                Some(c) => AnyTrace::read(&trace, &load(&c)?)?.render_svg(&options),
                None => {
                    let file = fs::File::open(&trace)
                        .with_context(|| format!("trace {}", trace.display()))?;
                    render_svg(&read_trace_bare(std::io::BufReader::new(file))?, &options)
                }
            };
            fs::write(&out, svg).with_context(|| format!("writing {}", out.display()))?;
            Ok(true)
        }
        Command::Sweep {
            config_dir,
            out,
            threads,
        } => {
            let files = config_files(&config_dir)
                .with_context(|| format!("listing {}", config_dir.display()))?;
            if files.is_empty() {
                bail!("no .json configurations in {}", config_dir.display());
            }
            let workers = worker_count(threads);
            let report = sweep(&files, workers)?;
            for e in &report.entries {
                let status = if e.pass { "PASS" } else { "FAIL" };
                match &e.error {
                    Some(err) => println!("{status} {}: {err}", e.name),
                    None => println!("{status} {} ({} samples)", e.name, e.samples),
                }
            }
            fs::write(&out, serde_json::to_string_pretty(&report)? + "\n")
                .with_context(|| format!("writing {}", out.display()))?;
            Ok(report.all_pass)
        }
    }
}

fn params(path: &Path, level: Option<usize>, format: Format) -> Result<bool> {
    let mut config = load(path)?;
    if let Some(n) = level {
        config.level = n;
    }
    let (records, verdicts) = match config.precision {
        Precision::Standard => cascade_report::<f64>(&config)?,
        Precision::Extended => cascade_report::<Extended>(&config)?,
    };
    let ok = verdicts.iter().all(|v| v.pass);
    match format {
        Format::Json => {
            let doc = serde_json::json!({ "cascade": records, "certificates": verdicts });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Format::Table => {
            print_table(&records);
            println!();
            for v in &verdicts {
                print_verdict(v);
            }
        }
    }
    Ok(ok)
}

fn cascade_report<S: Scalar>(config: &RunConfig) -> Result<(Vec<ParameterRecord>, Vec<Verdict>)> {
    let game = config.game::<S>()?;
    let cascade = game.cascade()?;
    let verdicts = certify_cascade(&cascade, &game.start);
    Ok((cascade.records(), verdicts))
}

fn print_table(records: &[ParameterRecord]) {
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"));
    println!(
        "{:>5} {:>13} {:>13} {:>13} {:>13} {:>13} {:>8} {:>13} {:>13} {:>13} {:>13} {:>13} {:>13}",
        "level",
        "eps_n",
        "sigma_n",
        "theta",
        "c_n",
        "ell",
        "p",
        "r",
        "rho",
        "phi",
        "tau",
        "rho'",
        "delta_n"
    );
    for r in records {
        println!(
            "{:>5} {:>13} {:>13} {:>13} {:>13} {:>13} {:>8} {:>13} {:>13} {:>13} {:>13} {:>13} {:>13}",
            r.level,
            cell(Some(r.eps_n)),
            cell(Some(r.sigma_n)),
            cell(Some(r.theta)),
            cell(Some(r.c_n)),
            cell(r.ell),
            r.p.map_or_else(|| "-".to_string(), |p| p.to_string()),
            cell(r.r),
            cell(r.rho),
            cell(r.phi),
            cell(r.tau),
            cell(r.rho_prime),
            cell(r.delta_n),
        );
    }
}

fn print_verdict(v: &Verdict) {
    if v.pass {
        println!(
            "PASS {} (margin {:.3e}) {}",
            v.name, v.measured_margin, v.details
        );
    } else {
        let at = v
            .first_violation_time
            .map_or_else(String::new, |t| format!(" at t={t:.17e}"));
        let idx = v
            .first_violation_index
            .map_or_else(String::new, |i| format!(" sample {i}"));
        println!("FAIL {}{at}{idx}: {}", v.name, v.details);
    }
}

fn simulate(config_path: &Path, out: &Path, manifest: Option<&Path>) -> Result<bool> {
    let config = load(config_path)?;
    let trace = AnyTrace::simulate(&config)?;
    let bytes = trace
        .write(out)
        .with_context(|| format!("writing {}", out.display()))?;
    if let Some(m) = manifest {
        let doc = serde_json::to_string_pretty(&trace.manifest(&config))? + "\n";
        fs::write(m, doc).with_context(|| format!("writing {}", m.display()))?;
    }
    println!(
        "{} samples to t={:.6e}, {bytes} bytes",
        trace.len(),
        trace.end_time()
    );
    if let Some(c) = trace.capture() {
        println!(
            "capture by lion {} at t={:.17e} (sample {})",
            c.lion, c.time, c.sample
        );
    }
    Ok(true)
}

fn verify(trace_path: &Path, config_path: &Path, json: Option<&Path>) -> Result<bool> {
    let config = load(config_path)?;
    let trace = AnyTrace::read(trace_path, &config)
        .with_context(|| format!("reading {}", trace_path.display()))?;
    let verdicts = trace.check_all();
    for v in &verdicts {
        print_verdict(v);
    }
    if let Some(path) = json {
        fs::write(path, serde_json::to_string_pretty(&verdicts)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let failed: Vec<&str> = verdicts
        .iter()
        .filter(|v| !v.pass)
        .map(|v| v.name.as_str())
        .collect();
    if failed.is_empty() {
        println!("all {} checks passed", verdicts.len());
        Ok(true)
    } else {
        eprintln!("failed: {}", failed.join(", "));
        Ok(false)
    }
}
