//! Command-line front end: configure runs, execute simulations and sweeps,
//! compute theory, emit comparison tables and plot scripts.

use std::path::PathBuf;
use std::process::ExitCode;

use hypernet::commands::{self, CommandError};
use hypernet::config::{RunConfig, SamplerKind};

const USAGE: &str = "\
hypernet - evolving hypernetwork simulator and mean-field analytics

USAGE:
  hypernet <COMMAND> [FLAGS]

COMMANDS:
  simulate     grow one hypernetwork and export its hyperdegree statistics
  theory       solve the characteristic equation and tabulate the
               stationary hyperdegree distribution (needs alpha = 0.5)
  compare      simulate, solve, and report simulation-vs-theory agreement
               (KS distance, tail fits, plot script; needs alpha = 0.5)
  sweep-alpha  one simulation per aging exponent with a combined tail-fit
               table and CCDF overlay plot

FLAGS:
  --config PATH    key-value config file (TOML grammar; flags override it)
  --seed U64       master seed (default 42)
  --nodes N        stop after the batch reaching N nodes (default 100000)
  --alpha X        aging exponent (default 0.5)
  --alphas LIST    comma-separated exponents for sweep-alpha
  --out DIR        output directory (default runs/<command>)
  --sampler NAME   exact | bucketed (default bucketed)
  --bucket-ratio X geometric age-bucket growth factor (default 2.0)
  --replicas N     pooled independent runs for compare/sweep (default 3)
  --variant-residual  also log the alternative characteristic-equation
                      residual in theory output
  --help           show this text

EXIT CODES:
  0 success, 2 validation error, 3 numeric failure, 4 infeasible model

EXAMPLES:
  hypernet compare --nodes 50000 --seed 7 --out runs/headline
  hypernet sweep-alpha --alphas 0.1,0.5,0.9,1.0 --nodes 50000
  hypernet theory --config experiment.toml --out runs/theory
";

#[derive(Debug)]
struct CliArgs {
    command: String,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    nodes: Option<u64>,
    alpha: Option<f64>,
    alphas: Option<Vec<f64>>,
    sampler: Option<SamplerKind>,
    bucket_ratio: Option<f64>,
    replicas: Option<u32>,
    variant_residual: bool,
}

fn parse_args() -> Result<CliArgs, String> {
    let mut args = std::env::args().skip(1);
    let command = match args.next() {
        Some(c) if c == "--help" || c == "-h" => {
            print!("{USAGE}");
            std::process::exit(0);
        }
        Some(c) => c,
        None => return Err("missing command".into()),
    };
    if !matches!(
        command.as_str(),
        "simulate" | "theory" | "compare" | "sweep-alpha"
    ) {
        return Err(format!("unknown command '{command}'"));
    }
    let mut out = CliArgs {
        command,
        config: None,
        out: None,
        seed: None,
        nodes: None,
        alpha: None,
        alphas: None,
        sampler: None,
        bucket_ratio: None,
        replicas: None,
        variant_residual: false,
    };
    while let Some(flag) = args.next() {
        let mut value_of = |name: &str| {
            args.next()
                .ok_or_else(|| format!("flag {name} needs a value"))
        };
        match flag.as_str() {
            "--help" | "-h" => {
                print!("{USAGE}");
                std::process::exit(0);
            }
            "--config" => out.config = Some(PathBuf::from(value_of("--config")?)),
            "--out" => out.out = Some(PathBuf::from(value_of("--out")?)),
            "--seed" => {
                out.seed = Some(
                    value_of("--seed")?
                        .parse()
                        .map_err(|e| format!("bad --seed: {e}"))?,
                )
            }
            "--nodes" => {
                out.nodes = Some(
                    value_of("--nodes")?
                        .parse()
                        .map_err(|e| format!("bad --nodes: {e}"))?,
                )
            }
            "--alpha" => {
                out.alpha = Some(
                    value_of("--alpha")?
                        .parse()
                        .map_err(|e| format!("bad --alpha: {e}"))?,
                )
            }
            "--alphas" => {
                let list = value_of("--alphas")?;
                let parsed: Result<Vec<f64>, _> =
                    list.split(',').map(|s| s.trim().parse::<f64>()).collect();
                out.alphas = Some(parsed.map_err(|e| format!("bad --alphas: {e}"))?);
            }
            "--sampler" => {
                out.sampler = Some(match value_of("--sampler")?.as_str() {
                    "exact" => SamplerKind::Exact,
                    "bucketed" => SamplerKind::Bucketed,
                    other => return Err(format!("bad --sampler '{other}'")),
                })
            }
            "--bucket-ratio" => {
                out.bucket_ratio = Some(
                    value_of("--bucket-ratio")?
                        .parse()
                        .map_err(|e| format!("bad --bucket-ratio: {e}"))?,
                )
            }
            "--replicas" => {
                out.replicas = Some(
                    value_of("--replicas")?
                        .parse()
                        .map_err(|e| format!("bad --replicas: {e}"))?,
                )
            }
            "--variant-residual" => out.variant_residual = true,
            other => return Err(format!("unknown flag '{other}'")),
        }
    }
    Ok(out)
}

fn build_config(args: &CliArgs) -> Result<RunConfig, CommandError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(nodes) = args.nodes {
        cfg.nodes = nodes;
    }
    if let Some(alpha) = args.alpha {
        cfg.alpha = alpha;
    }
    if let Some(alphas) = &args.alphas {
        cfg.alphas = alphas.clone();
    }
    if let Some(sampler) = args.sampler {
        cfg.sampler = sampler;
    }
    if let Some(ratio) = args.bucket_ratio {
        cfg.bucket_ratio = ratio;
    }
    if let Some(replicas) = args.replicas {
        cfg.replicas = replicas;
    }
    if args.variant_residual {
        cfg.variant_residual = true;
    }
    Ok(cfg)
}

fn run() -> Result<(), CommandError> {
    let args = match parse_args() {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}\n\n{USAGE}");
            std::process::exit(2);
        }
    };
    let cfg = build_config(&args)?;
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(&args.command));

    match args.command.as_str() {
        "simulate" => {
            let o = commands::cmd_simulate(&cfg, &out_dir)?;
            println!(
                "simulate: {} nodes, {} edges, {} batches -> {}",
                o.nodes,
                o.edges,
                o.batches,
                o.dir.display()
            );
        }
        "theory" => {
            let o = commands::cmd_theory(&cfg, &out_dir)?;
            println!(
                "theory: theta = {:.9}, g = {:.9} (pdf tail exponent {:.4}) -> {}",
                o.theory.theta,
                o.theory.g,
                o.theory.g + 1.0,
                o.dir.display()
            );
            if let Some(r) = o.variant_residual {
                eprintln!("theory: alternative characteristic-form residual = {r:.6e}");
            }
        }
        "compare" => {
            let o = commands::cmd_compare(&cfg, &out_dir)?;
            println!(
                "compare: {} pooled nodes, KS = {:.4}, fitted pdf exponent = {:.3} \
                 (theory {:.3}) -> {}",
                o.pooled_nodes,
                o.ks,
                o.fit.pdf_exponent(),
                o.theory.g + 1.0,
                o.dir.display()
            );
        }
        "sweep-alpha" => {
            let o = commands::cmd_sweep_alpha(&cfg, &out_dir)?;
            for f in &o.fits {
                println!(
                    "sweep: alpha = {} -> pdf exponent {:.3}, preferred {:?}",
                    f.alpha, f.pdf_exponent, f.preferred
                );
            }
            if !o.failures.is_empty() {
                eprintln!("sweep: {} point(s) failed", o.failures.len());
            }
            println!("sweep: results in {}", o.dir.display());
        }
        _ => unreachable!("validated in parse_args"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
