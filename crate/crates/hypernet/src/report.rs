//! Output bundles: CSV/JSON artifacts, plot scripts, and a manifest that
//! pins the exact configuration and seed so every file can be reproduced
//! bit-identically. Nothing time-dependent is ever written.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analytics::{EmpiricalDistribution, LogBin};
use crate::config::RunConfig;
use crate::engine::GrowthEvent;
use crate::hypergraph::Hypergraph;

/// A run directory plus the registry of files written into it.
#[derive(Debug)]
pub struct ReportBundle {
    dir: PathBuf,
    files: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    version: &'a str,
    command: &'a str,
    seed: u64,
    config_hash: String,
    config: &'a RunConfig,
    files: &'a [String],
}

impl ReportBundle {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(ReportBundle {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn path_of(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Open a registered file for writing.
    pub fn start_file(&mut self, name: &str) -> io::Result<BufWriter<File>> {
        let file = File::create(self.dir.join(name))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(file))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut w = self.start_file(name)?;
        let text = serde_json::to_string_pretty(value)?;
        w.write_all(text.as_bytes())?;
        w.write_all(b"\n")
    }

    /// Write `manifest.json` listing every emitted file; must be called
    /// last. The config hash covers command, seed and the full config.
    pub fn finish(mut self, command: &str, cfg: &RunConfig) -> io::Result<PathBuf> {
        let config_json = serde_json::to_string(cfg)?;
        let hash = fnv1a64(format!("{command}|{}|{config_json}", cfg.seed).as_bytes());
        self.files.push("manifest.json".to_string());
        let manifest = Manifest {
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: cfg.seed,
            config_hash: format!("{hash:016x}"),
            config: cfg,
            files: &self.files,
        };
        let path = self.dir.join("manifest.json");
        let mut w = BufWriter::new(File::create(&path)?);
        let text = serde_json::to_string_pretty(&manifest)?;
        w.write_all(text.as_bytes())?;
        w.write_all(b"\n")?;
        Ok(path)
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn write_hyperdegree_csv<W: Write>(w: &mut W, graph: &Hypergraph) -> io::Result<()> {
    writeln!(w, "node_id,k")?;
    for (id, k) in graph.hyperdegree_sequence() {
        writeln!(w, "{id},{k}")?;
    }
    Ok(())
}

pub fn write_distribution_csv<W: Write>(
    w: &mut W,
    dist: &EmpiricalDistribution,
) -> io::Result<()> {
    writeln!(w, "k,count,pdf_emp,ccdf_emp")?;
    let pdf = dist.pdf();
    let ccdf = dist.ccdf();
    for ((&(k, count), &(_, p)), &(_, c)) in dist.counts().iter().zip(&pdf).zip(&ccdf) {
        writeln!(w, "{k},{count},{p},{c}")?;
    }
    Ok(())
}

pub fn write_log_binned_csv<W: Write>(w: &mut W, bins: &[LogBin]) -> io::Result<()> {
    writeln!(w, "k_lo,k_hi,k_center,count,density")?;
    for b in bins {
        writeln!(w, "{},{},{},{},{}", b.lo, b.hi, b.center, b.count, b.density)?;
    }
    Ok(())
}

pub fn write_events_csv<W: Write>(w: &mut W, events: &[GrowthEvent]) -> io::Result<()> {
    writeln!(w, "batch,time,eta,y,new_nodes,edge_ids")?;
    for e in events {
        let nodes: Vec<String> = e.new_nodes.iter().map(|n| n.to_string()).collect();
        let edges: Vec<String> = e.edge_ids.iter().map(|n| n.to_string()).collect();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            e.batch_index,
            e.event_time,
            e.eta,
            e.y,
            nodes.join(";"),
            edges.join(";")
        )?;
    }
    Ok(())
}

/// Gnuplot script overlaying the log-binned empirical density with the
/// theory curve (log-log axes). References only files inside the bundle.
pub fn write_compare_plot<W: Write>(w: &mut W) -> io::Result<()> {
    writeln!(
        w,
        "set datafile separator ','\n\
         set logscale xy\n\
         set xlabel 'hyperdegree k'\n\
         set ylabel 'P(k)'\n\
         set key top right\n\
         set term pngcairo size 900,650\n\
         set output 'compare.png'\n\
         plot 'log_binned.csv' skip 1 using 3:5 with points pt 1 title 'simulation', \\\n\
         \x20    'theory_table.csv' every ::1 skip 1 using 1:2 with lines lw 2 title 'theory'"
    )
}

/// Gnuplot script overlaying one CCDF per aging exponent.
pub fn write_sweep_plot<W: Write>(w: &mut W, alphas: &[f64]) -> io::Result<()> {
    writeln!(w, "set datafile separator ','")?;
    writeln!(w, "set logscale xy")?;
    writeln!(w, "set xlabel 'hyperdegree k'")?;
    writeln!(w, "set ylabel 'P(K >= k)'")?;
    writeln!(w, "set key bottom left")?;
    writeln!(w, "set term pngcairo size 900,650")?;
    writeln!(w, "set output 'sweep.png'")?;
    let mut parts = Vec::new();
    for alpha in alphas {
        parts.push(format!(
            "'distribution_alpha_{alpha}.csv' skip 1 using 1:4 with points title 'alpha = {alpha}'"
        ));
    }
    writeln!(w, "plot {}", parts.join(", \\\n     "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundle_registers_files_and_manifest() {
        let dir = std::env::temp_dir().join(format!("hypernet-report-{}", std::process::id()));
        let mut bundle = ReportBundle::create(&dir).unwrap();
        {
            let mut f = bundle.start_file("demo.csv").unwrap();
            writeln!(f, "k,v").unwrap();
        }
        let cfg = RunConfig::default();
        let manifest_path = bundle.finish("simulate", &cfg).unwrap();
        let text = fs::read_to_string(&manifest_path).unwrap();
        assert!(text.contains("\"demo.csv\""));
        assert!(text.contains("\"manifest.json\""));
        assert!(text.contains("config_hash"));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn manifest_hash_tracks_config_changes() {
        let a = fnv1a64(b"simulate|42|{}");
        let b = fnv1a64(b"simulate|43|{}");
        assert_ne!(a, b);
    }

    #[test]
    fn distribution_csv_shape() {
        let dist = EmpiricalDistribution::from_hyperdegrees(&[2, 2, 3]).unwrap();
        let mut buf = Vec::new();
        write_distribution_csv(&mut buf, &dist).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,count,pdf_emp,ccdf_emp");
        assert!(lines[1].starts_with("2,2,"));
        assert!(lines[2].starts_with("3,1,"));
    }
}
