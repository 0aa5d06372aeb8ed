//! Operator commands behind the CLI: simulate, theory, compare and the
//! aging-exponent sweep. Each command validates its configuration, runs
//! the work (replicas in parallel), and emits a self-describing bundle.

use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::analytics::{
    self, fit_tail, ks_distance, AnalyticsError, EmpiricalDistribution, TailFit, TheoryParams,
};
use crate::config::{ConfigError, RunConfig};
use crate::engine::{self, EngineError, RunOutput};
use crate::report::{
    write_compare_plot, write_distribution_csv, write_events_csv, write_hyperdegree_csv,
    write_log_binned_csv, write_sweep_plot, ReportBundle,
};
use crate::stochastic::AttractivenessSpec;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CommandError {
    /// Process exit code: 2 validation, 3 numeric failure, 4 infeasible
    /// model, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => 2,
            CommandError::Engine(EngineError::Attachment { .. }) => 4,
            CommandError::Engine(_) => 2,
            CommandError::Analytics(_) => 3,
            CommandError::Io(_) => 1,
        }
    }
}

#[derive(Debug)]
pub struct SimulateOutcome {
    pub dir: PathBuf,
    pub manifest: PathBuf,
    pub nodes: usize,
    pub edges: usize,
    pub batches: usize,
}

#[derive(Debug)]
pub struct TheoryOutcome {
    pub dir: PathBuf,
    pub manifest: PathBuf,
    pub theory: TheoryParams,
    pub variant_residual: Option<f64>,
}

#[derive(Debug)]
pub struct CompareOutcome {
    pub dir: PathBuf,
    pub manifest: PathBuf,
    pub theory: TheoryParams,
    pub ks: f64,
    pub fit: TailFit,
    pub bins: Vec<BinComparison>,
    pub pooled_nodes: usize,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub dir: PathBuf,
    pub manifest: PathBuf,
    pub fits: Vec<AlphaFit>,
    pub failures: Vec<(f64, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaFit {
    pub alpha: f64,
    pub power_slope: f64,
    pub power_r2: f64,
    pub exp_rate: f64,
    pub exp_r2: f64,
    pub preferred: analytics::TailModel,
    pub pdf_exponent: f64,
}

/// One log-bin of the empirical density next to the theory mass over the
/// same integer hyperdegrees.
#[derive(Debug, Clone, Serialize)]
pub struct BinComparison {
    pub k_lo: f64,
    pub k_hi: f64,
    pub center: f64,
    pub count: u64,
    pub density_emp: f64,
    pub density_theory: f64,
    pub ratio: f64,
}

#[derive(Debug, Serialize)]
struct TheoryReport<'a> {
    theta: f64,
    g: f64,
    c: f64,
    m: u32,
    m2: u32,
    m1: f64,
    a: f64,
    /// pdf tail decays as k^-(g+1)
    theory_pdf_exponent: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    variant_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<&'a FitReport>,
}

#[derive(Debug, Serialize)]
struct FitReport {
    power_slope: f64,
    power_r2: f64,
    exp_rate: f64,
    exp_r2: f64,
    preferred: analytics::TailModel,
    fitted_pdf_exponent: f64,
    ks_distance: f64,
    pooled_nodes: usize,
    replicas: u32,
    bin_comparison: Vec<BinComparison>,
}

fn require_canonical_alpha(cfg: &RunConfig, command: &str) -> Result<(), CommandError> {
    if cfg.alpha != 0.5 {
        return Err(ConfigError::Invalid(format!(
            "{command} needs alpha = 0.5: the distribution theory is derived only there \
             (got alpha = {}); use simulate or sweep-alpha for other exponents",
            cfg.alpha
        ))
        .into());
    }
    Ok(())
}

/// Run `cfg.replicas` independent simulations (consecutive seeds) in
/// parallel and return them in replica order.
pub fn run_replicas(cfg: &RunConfig) -> Result<Vec<RunOutput>, EngineError> {
    let count = cfg.replicas;
    if count == 1 {
        return Ok(vec![engine::run(cfg.model_params(0))?]);
    }
    let mut joined: Vec<Result<RunOutput, EngineError>> = Vec::with_capacity(count as usize);
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(count as usize);
        for i in 0..count {
            let params = cfg.model_params(i);
            handles.push(scope.spawn(move || engine::run(params)));
        }
        for handle in handles {
            joined.push(handle.join().expect("replica thread panicked"));
        }
    });
    joined.into_iter().collect()
}

fn pooled_distribution(outputs: &[RunOutput]) -> Result<EmpiricalDistribution, AnalyticsError> {
    let mut pooled: Vec<u64> = Vec::new();
    for out in outputs {
        pooled.extend(out.graph.hyperdegrees());
    }
    EmpiricalDistribution::from_hyperdegrees(&pooled)
}

fn solve_configured_theory(cfg: &RunConfig) -> Result<TheoryParams, AnalyticsError> {
    analytics::solve_theta(
        cfg.m,
        cfg.m2,
        cfg.batch.mean(),
        cfg.attractiveness.mean(),
        1e-10,
    )
}

/// Theory mass over the integer hyperdegrees inside `[lo, hi)`, divided by
/// the bin width: directly comparable to a log-binned empirical density.
fn theory_bin_density(
    lo: f64,
    hi: f64,
    params: &TheoryParams,
    spec: &AttractivenessSpec,
) -> Result<f64, AnalyticsError> {
    let m = f64::from(params.m);
    let k_start = lo.ceil().max(m);
    let k_end = hi.ceil().max(m);
    let mass_lo = analytics::theoretical_ccdf_mixture(k_start, params, spec)?;
    let mass_hi = analytics::theoretical_ccdf_mixture(k_end, params, spec)?;
    Ok((mass_lo - mass_hi) / (hi - lo))
}

fn write_theory_table(
    bundle: &mut ReportBundle,
    params: &TheoryParams,
    spec: &AttractivenessSpec,
) -> Result<(), CommandError> {
    let mut w = bundle.start_file("theory_table.csv")?;
    use std::io::Write;
    writeln!(w, "k,pk_theory,ccdf_theory")?;
    let m = f64::from(params.m);
    let mut k = m;
    while k <= 1e6 {
        let pk = analytics::theoretical_pk(k, params, spec)?;
        let ccdf = analytics::theoretical_ccdf_mixture(k, params, spec)?;
        writeln!(w, "{k},{pk},{ccdf}")?;
        k *= 1.1;
    }
    Ok(())
}

pub fn cmd_simulate(cfg: &RunConfig, out_dir: &Path) -> Result<SimulateOutcome, CommandError> {
    cfg.validate()?;
    let sim = engine::Simulation::with_snapshots(cfg.model_params(0), cfg.snapshot_every_batches)?;
    let out = sim.run_to_completion()?;

    let dist = EmpiricalDistribution::from_hyperdegrees(&out.graph.hyperdegrees())?;
    let mut bundle = ReportBundle::create(out_dir)?;
    {
        let mut w = bundle.start_file("hyperdegrees.csv")?;
        write_hyperdegree_csv(&mut w, &out.graph)?;
    }
    {
        let mut w = bundle.start_file("distribution.csv")?;
        write_distribution_csv(&mut w, &dist)?;
    }
    {
        let mut w = bundle.start_file("log_binned.csv")?;
        write_log_binned_csv(&mut w, &dist.log_binned_pdf(cfg.bin_ratio))?;
    }
    if cfg.export_edge_list {
        let mut w = bundle.start_file("edge_list.tsv")?;
        out.graph.write_edge_list(&mut w)?;
    }
    if cfg.export_bipartite {
        let mut w = bundle.start_file("bipartite.tsv")?;
        out.graph.write_bipartite(&mut w)?;
    }
    if cfg.export_event_log {
        let mut w = bundle.start_file("events.csv")?;
        write_events_csv(&mut w, &out.events)?;
    }
    let manifest = bundle.finish("simulate", cfg)?;
    Ok(SimulateOutcome {
        dir: out_dir.to_path_buf(),
        manifest,
        nodes: out.graph.node_count(),
        edges: out.graph.edge_count(),
        batches: out.events.len(),
    })
}

pub fn cmd_theory(cfg: &RunConfig, out_dir: &Path) -> Result<TheoryOutcome, CommandError> {
    cfg.validate()?;
    require_canonical_alpha(cfg, "theory")?;
    let theory = solve_configured_theory(cfg)?;
    let variant_residual = if cfg.variant_residual {
        Some(analytics::characteristic_residual_variant(
            theory.theta,
            cfg.m,
            cfg.m2,
            cfg.batch.mean(),
            cfg.attractiveness.mean(),
        )?)
    } else {
        None
    };
    let mut bundle = ReportBundle::create(out_dir)?;
    bundle.write_json(
        "theory.json",
        &TheoryReport {
            theta: theory.theta,
            g: theory.g,
            c: theory.c,
            m: theory.m,
            m2: theory.m2,
            m1: theory.m1,
            a: theory.a,
            theory_pdf_exponent: theory.g + 1.0,
            variant_residual,
            fit: None,
        },
    )?;
    write_theory_table(&mut bundle, &theory, &cfg.attractiveness)?;
    let manifest = bundle.finish("theory", cfg)?;
    Ok(TheoryOutcome {
        dir: out_dir.to_path_buf(),
        manifest,
        theory,
        variant_residual,
    })
}

pub fn cmd_compare(cfg: &RunConfig, out_dir: &Path) -> Result<CompareOutcome, CommandError> {
    cfg.validate()?;
    require_canonical_alpha(cfg, "compare")?;
    let theory = solve_configured_theory(cfg)?;
    let outputs = run_replicas(cfg)?;
    let dist = pooled_distribution(&outputs)?;
    let spec = &cfg.attractiveness;

    // KS over the observed support, theory evaluated at the same
    // integers; below k = m (initial nodes not yet selected) the theory
    // has all its mass above, so its ccdf is exactly 1 and density 0
    let m = f64::from(theory.m);
    let mut theory_ccdf_cache: Vec<(u64, f64)> = Vec::with_capacity(dist.counts().len());
    for &(k, _) in dist.counts() {
        let v = if (k as f64) < m {
            1.0
        } else {
            analytics::theoretical_ccdf_mixture(k as f64, &theory, spec)?
        };
        theory_ccdf_cache.push((k, v));
    }
    let lookup = |k: f64| -> f64 {
        let kk = k as u64;
        match theory_ccdf_cache.binary_search_by_key(&kk, |&(a, _)| a) {
            Ok(i) => theory_ccdf_cache[i].1,
            Err(_) => 1.0,
        }
    };
    let ks = ks_distance(&dist, lookup);
    let fit = fit_tail(&dist, 5 * u64::from(cfg.m))?;

    let bins_raw = dist.log_binned_pdf(cfg.bin_ratio);
    let mut bins = Vec::with_capacity(bins_raw.len());
    for b in &bins_raw {
        let density_theory = theory_bin_density(b.lo, b.hi, &theory, spec)?;
        let ratio = if density_theory > 0.0 {
            b.density / density_theory
        } else {
            f64::INFINITY
        };
        bins.push(BinComparison {
            k_lo: b.lo,
            k_hi: b.hi,
            center: b.center,
            count: b.count,
            density_emp: b.density,
            density_theory,
            ratio,
        });
    }

    let mut bundle = ReportBundle::create(out_dir)?;
    {
        let mut w = bundle.start_file("distribution.csv")?;
        write_distribution_csv(&mut w, &dist)?;
    }
    {
        let mut w = bundle.start_file("log_binned.csv")?;
        write_log_binned_csv(&mut w, &bins_raw)?;
    }
    write_theory_table(&mut bundle, &theory, spec)?;
    {
        let mut w = bundle.start_file("comparison.csv")?;
        use std::io::Write;
        writeln!(w, "k,pdf_emp,pdf_theory,ccdf_emp,ccdf_theory")?;
        let pdf = dist.pdf();
        let ccdf = dist.ccdf();
        for (i, &(k, _)) in dist.counts().iter().enumerate() {
            let pk = if (k as f64) < m {
                0.0
            } else {
                analytics::theoretical_pk(k as f64, &theory, spec)?
            };
            writeln!(
                w,
                "{k},{},{pk},{},{}",
                pdf[i].1, ccdf[i].1, theory_ccdf_cache[i].1
            )?;
        }
    }
    let fit_report = FitReport {
        power_slope: fit.power_slope,
        power_r2: fit.power_r2,
        exp_rate: fit.exp_rate,
        exp_r2: fit.exp_r2,
        preferred: fit.preferred,
        fitted_pdf_exponent: fit.pdf_exponent(),
        ks_distance: ks,
        pooled_nodes: dist.n() as usize,
        replicas: cfg.replicas,
        bin_comparison: bins.clone(),
    };
    bundle.write_json(
        "fit_report.json",
        &TheoryReport {
            theta: theory.theta,
            g: theory.g,
            c: theory.c,
            m: theory.m,
            m2: theory.m2,
            m1: theory.m1,
            a: theory.a,
            theory_pdf_exponent: theory.g + 1.0,
            variant_residual: None,
            fit: Some(&fit_report),
        },
    )?;
    {
        let mut w = bundle.start_file("plot_compare.gnuplot")?;
        write_compare_plot(&mut w)?;
    }
    let pooled_nodes = dist.n() as usize;
    let manifest = bundle.finish("compare", cfg)?;
    Ok(CompareOutcome {
        dir: out_dir.to_path_buf(),
        manifest,
        theory,
        ks,
        fit,
        bins,
        pooled_nodes,
    })
}

pub fn cmd_sweep_alpha(cfg: &RunConfig, out_dir: &Path) -> Result<SweepOutcome, CommandError> {
    cfg.validate()?;
    let mut bundle = ReportBundle::create(out_dir)?;
    let mut fits: Vec<AlphaFit> = Vec::new();
    let mut failures: Vec<(f64, String)> = Vec::new();
    for &alpha in &cfg.alphas {
        let mut sub = cfg.clone();
        sub.alpha = alpha;
        let result = (|| -> Result<AlphaFit, CommandError> {
            let outputs = run_replicas(&sub)?;
            let dist = pooled_distribution(&outputs)?;
            {
                let mut w = bundle.start_file(&format!("distribution_alpha_{alpha}.csv"))?;
                write_distribution_csv(&mut w, &dist)?;
            }
            let fit = fit_tail(&dist, 5 * u64::from(cfg.m))?;
            Ok(AlphaFit {
                alpha,
                power_slope: fit.power_slope,
                power_r2: fit.power_r2,
                exp_rate: fit.exp_rate,
                exp_r2: fit.exp_r2,
                preferred: fit.preferred,
                pdf_exponent: fit.pdf_exponent(),
            })
        })();
        match result {
            Ok(fit) => fits.push(fit),
            Err(e) => {
                eprintln!("sweep: alpha = {alpha} failed: {e}");
                failures.push((alpha, e.to_string()));
            }
        }
    }
    if fits.is_empty() {
        return Err(ConfigError::Invalid(format!(
            "every sweep point failed; first: {}",
            failures
                .first()
                .map(|(_, e)| e.as_str())
                .unwrap_or("none attempted")
        ))
        .into());
    }
    {
        let mut w = bundle.start_file("sweep_fits.csv")?;
        use std::io::Write;
        writeln!(
            w,
            "alpha,power_slope,power_r2,exp_rate,exp_r2,preferred,pdf_exponent"
        )?;
        for f in &fits {
            writeln!(
                w,
                "{},{},{},{},{},{:?},{}",
                f.alpha, f.power_slope, f.power_r2, f.exp_rate, f.exp_r2, f.preferred,
                f.pdf_exponent
            )?;
        }
    }
    #[derive(Serialize)]
    struct SweepReport<'a> {
        fits: &'a [AlphaFit],
        failures: &'a [(f64, String)],
    }
    bundle.write_json(
        "sweep_fits.json",
        &SweepReport {
            fits: &fits,
            failures: &failures,
        },
    )?;
    {
        let succeeded: Vec<f64> = fits.iter().map(|f| f.alpha).collect();
        let mut w = bundle.start_file("plot_sweep.gnuplot")?;
        write_sweep_plot(&mut w, &succeeded)?;
    }
    let manifest = bundle.finish("sweep-alpha", cfg)?;
    Ok(SweepOutcome {
        dir: out_dir.to_path_buf(),
        manifest,
        fits,
        failures,
    })
}
