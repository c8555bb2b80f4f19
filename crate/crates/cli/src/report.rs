//! CSV and summary writers. Floats are written with Rust's shortest
//! round-trip formatting, so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Context;

/// Accumulates `report.csv` rows: one row per term or parameter.
pub struct ReportCsv {
    buf: String,
    hash: String,
    seed: u64,
}

impl ReportCsv {
    pub fn new(hash: &str, seed: u64) -> Self {
        let mut buf = String::new();
        buf.push_str("phase,item,term,value,log10_value,config_hash,seed\n");
        Self {
            buf,
            hash: hash.to_string(),
            seed,
        }
    }

    pub fn param(&mut self, name: &str, value: impl std::fmt::Display) {
        let hash = self.hash.clone();
        let seed = self.seed;
        let _ = writeln!(self.buf, "param,{name},,{value},,{hash},{seed}");
    }

    pub fn value(&mut self, phase: &str, item: &str, term: &str, value: f64) {
        let log10 = fmt_log10(value);
        let hash = self.hash.clone();
        let seed = self.seed;
        let _ = writeln!(
            self.buf,
            "{phase},{item},{term},{value},{log10},{hash},{seed}"
        );
    }

    /// A value carried in log space; the plain column may read 0 or inf.
    pub fn log_value(&mut self, phase: &str, item: &str, term: &str, value: f64, log10: f64) {
        let hash = self.hash.clone();
        let seed = self.seed;
        let log_text = if log10 == f64::NEG_INFINITY {
            String::from("-inf")
        } else {
            format!("{log10}")
        };
        let _ = writeln!(
            self.buf,
            "{phase},{item},{term},{value},{log_text},{hash},{seed}"
        );
    }

    pub fn flag(&mut self, phase: &str, item: &str, term: &str, value: bool) {
        let hash = self.hash.clone();
        let seed = self.seed;
        let _ = writeln!(
            self.buf,
            "{phase},{item},{term},{},,{hash},{seed}",
            if value { 1 } else { 0 }
        );
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let path = dir.join("report.csv");
        fs::write(&path, &self.buf).with_context(|| format!("writing {}", path.display()))
    }
}

fn fmt_log10(value: f64) -> String {
    if value > 0.0 && value.is_finite() {
        format!("{}", value.log10())
    } else {
        String::new()
    }
}

/// Human-readable run summary; echoes the config and carries one status
/// line per checked property.
pub struct Summary {
    buf: String,
}

impl Summary {
    pub fn new(command: &str, hash: &str, seed: u64) -> Self {
        let mut buf = String::new();
        let _ = writeln!(buf, "command: {command}");
        let _ = writeln!(buf, "config_hash: {hash}");
        let _ = writeln!(buf, "seed: {seed}");
        Self { buf }
    }

    pub fn line(&mut self, text: impl AsRef<str>) {
        self.buf.push_str(text.as_ref());
        self.buf.push('\n');
    }

    pub fn status(&mut self, name: &str, pass: bool, detail: impl AsRef<str>) {
        let _ = writeln!(
            self.buf,
            "{}: {} ({})",
            name,
            if pass { "PASS" } else { "FAIL" },
            detail.as_ref()
        );
    }

    pub fn echo_config(&mut self, raw: &str) {
        self.buf.push_str("\n--- config echo ---\n");
        self.buf.push_str(raw);
        if !raw.ends_with('\n') {
            self.buf.push('\n');
        }
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let path = dir.join("summary.txt");
        fs::write(&path, &self.buf).with_context(|| format!("writing {}", path.display()))
    }
}

/// Region table: one row per boundary sample or interior node.
pub struct RegionsCsv {
    buf: String,
    hash: String,
    seed: u64,
    m: usize,
    n: usize,
}

impl RegionsCsv {
    pub fn new(hash: &str, seed: u64, m: usize, n: usize) -> Self {
        let mut buf = String::new();
        buf.push_str("kind");
        for i in 1..=m {
            let _ = write!(buf, ",t{i}");
        }
        for j in 1..=n {
            let _ = write!(buf, ",x{j}");
        }
        buf.push_str(",f_p,nf_p,weight,trace,gamma,gamma_eps,w_eps,config_hash,seed\n");
        Self {
            buf,
            hash: hash.to_string(),
            seed,
            m,
            n,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn boundary_row(
        &mut self,
        t: &[f64],
        x: &[f64],
        f_p: f64,
        nf_p: f64,
        weight: f64,
        trace: bool,
        gamma: bool,
        gamma_eps: bool,
    ) {
        debug_assert_eq!(t.len(), self.m);
        debug_assert_eq!(x.len(), self.n);
        self.buf.push_str("boundary");
        for v in t.iter().chain(x) {
            let _ = write!(self.buf, ",{v}");
        }
        let hash = self.hash.clone();
        let seed = self.seed;
        let _ = writeln!(
            self.buf,
            ",{f_p},{nf_p},{weight},{},{},{},,{hash},{seed}",
            trace as u8, gamma as u8, gamma_eps as u8
        );
    }

    pub fn interior_row(&mut self, t: &[f64], x: &[f64], f_p: f64, weight: f64, w_eps: bool) {
        self.buf.push_str("interior");
        for v in t.iter().chain(x) {
            let _ = write!(self.buf, ",{v}");
        }
        let hash = self.hash.clone();
        let seed = self.seed;
        let _ = writeln!(
            self.buf,
            ",{f_p},,{weight},,,,{},{hash},{seed}",
            w_eps as u8
        );
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let path = dir.join("regions.csv");
        fs::write(&path, &self.buf).with_context(|| format!("writing {}", path.display()))
    }
}
