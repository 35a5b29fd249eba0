//! Experiment configuration, orchestration and persistence.
//!
//! A run reads a `key = value` config, executes one command over its grid on
//! a bounded worker pool, writes CSV and JSON-lines outputs plus the resolved
//! config, and finishes with a manifest hashing every file it wrote.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::cantor::{additive_energy, build_cantor, gamma_fit, AdditiveEnergy, Alphabet};
use crate::error::{Error, Result};
use crate::fup::{
    check_energy_bound, check_submultiplicativity, check_trace_domination, check_trivial_bound,
    fekete_bounds, in_annulus, t_k_fft, t_k_quadruple, t_k_singular, trace_tt, CheckReport,
    TkRecord, TraceMethod, TraceRecord, MATRIX_TRACE_MAX_N,
};
use crate::qbaker::{
    build_baker, write_operator, BakerFamily, Cutoff, DenseOperator, DEFAULT_DENSE_CAP,
};
use crate::spectral::{eigenvalues, fit_exponent, CountingCurve, EigenOptions, SpectrumResult};
use crate::theory::{
    baker_weyl_exponent, beta_bd_sanity, exponent_grid, write_grid_csv, GapInputs,
};

/// Name of the resolved config written next to the results.
pub const RESOLVED_CONFIG: &str = "config.resolved";

/// File name of the manifest for `command`; one per command so several
/// commands can share an output directory.
pub fn manifest_name(command: Command) -> String {
    format!("manifest_{}.json", command.name())
}

/// Inequality suites and oracles run by the `fup` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Oracles,
    TraceDomination,
    Submultiplicativity,
    TrivialBound,
    EnergyBound,
    Fekete,
}

impl CheckKind {
    pub const ALL: [CheckKind; 6] = [
        CheckKind::Oracles,
        CheckKind::TraceDomination,
        CheckKind::Submultiplicativity,
        CheckKind::TrivialBound,
        CheckKind::EnergyBound,
        CheckKind::Fekete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Oracles => "oracles",
            CheckKind::TraceDomination => "trace-domination",
            CheckKind::Submultiplicativity => "submultiplicativity",
            CheckKind::TrivialBound => "trivial-bound",
            CheckKind::EnergyBound => "energy-bound",
            CheckKind::Fekete => "fekete",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        CheckKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown check {s:?}")))
    }
}

/// A fully resolved experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub alphabet: Alphabet,
    pub cutoff: Cutoff,
    pub ks: Vec<u32>,
    pub nus: Vec<f64>,
    pub rhos: Vec<f64>,
    pub dense_cap: usize,
    pub output: PathBuf,
    pub checks: Vec<CheckKind>,
    pub beta_bd: Option<f64>,
    pub beta: Option<f64>,
    pub beta_e: Option<f64>,
    pub gamma: Option<f64>,
    pub theory_nus: Vec<f64>,
    /// Inclusive depth window for exponent fits.
    pub fit_k: Option<(u32, u32)>,
    pub energy_min_k: u32,
    /// Inner radius exponent of the labeling annulus.
    pub nu0: Option<f64>,
    pub export_operator: bool,
    pub residuals: bool,
}

const KEYS: &[&str] = &[
    "base",
    "letters",
    "cutoff",
    "cutoff_a",
    "cutoff_eps",
    "k",
    "nu",
    "rho",
    "dense_cap",
    "output",
    "checks",
    "beta_bd",
    "beta",
    "beta_e",
    "gamma",
    "theory_nu",
    "fit_k",
    "energy_min_k",
    "nu0",
    "export_operator",
    "residuals",
];

fn cfg_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn parse_u64(s: &str) -> std::result::Result<u64, String> {
    s.parse()
        .map_err(|_| format!("{s:?} is not a nonnegative integer"))
}

fn items(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Depth list; entries are integers or inclusive ranges `a..b`.
fn parse_depths(v: &str) -> std::result::Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for item in items(v) {
        if let Some((a, b)) = item.split_once("..") {
            let a = parse_u64(a.trim())? as u32;
            let b = parse_u64(b.trim())? as u32;
            if a > b {
                return Err(format!("empty range {item:?}"));
            }
            out.extend(a..=b);
        } else {
            out.push(parse_u64(item)? as u32);
        }
    }
    let unique: BTreeSet<u32> = out.iter().copied().collect();
    if unique.len() != out.len() {
        return Err("depths must be distinct".to_string());
    }
    if out.windows(2).any(|w| w[1] < w[0]) {
        return Err("depths must be increasing".to_string());
    }
    Ok(out)
}

/// Real list; entries are numbers or `start:stop:count` evenly spaced grids.
fn parse_reals(v: &str) -> std::result::Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in items(v) {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        match parts.as_slice() {
            [x] => out.push(parse_f64(x)?),
            [a, b, n] => {
                let (a, b) = (parse_f64(a)?, parse_f64(b)?);
                let n = parse_u64(n)? as usize;
                if n < 2 {
                    return Err(format!("grid {item:?} needs at least 2 points"));
                }
                out.extend((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64));
            }
            _ => return Err(format!("{item:?} is neither a number nor start:stop:count")),
        }
    }
    Ok(out)
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("{v:?} is not a boolean")),
    }
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment, lists are comma separated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen: Vec<(&str, String, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(line_no, format!("expected key = value, got {line:?}")))?;
            let key = key.trim();
            let known = KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| cfg_err(line_no, format!("unknown key {key:?}")))?;
            if seen.iter().any(|(k, _, _)| k == known) {
                return Err(cfg_err(line_no, format!("duplicate key {key:?}")));
            }
            seen.push((known, value.trim().to_string(), line_no));
        }
        let get = |k: &str| {
            seen.iter()
                .find(|(key, _, _)| *key == k)
                .map(|(_, v, l)| (v.as_str(), *l))
        };
        let wrap = |l: usize| move |e: String| cfg_err(l, e);

        let (base, l) =
            get("base").ok_or_else(|| Error::Config("missing key \"base\"".to_string()))?;
        let base = parse_u64(base).map_err(wrap(l))?;
        let (letters, l) =
            get("letters").ok_or_else(|| Error::Config("missing key \"letters\"".to_string()))?;
        let letters = items(letters)
            .map(parse_u64)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(wrap(l))?;
        let alphabet = Alphabet::new(base, letters).map_err(|e| cfg_err(l, e))?;

        let kind = get("cutoff").map(|(v, l)| (v.to_string(), l));
        let a = get("cutoff_a")
            .map(|(v, l)| parse_f64(v).map_err(wrap(l)))
            .transpose()?;
        let eps = get("cutoff_eps")
            .map(|(v, l)| parse_f64(v).map_err(wrap(l)))
            .transpose()?;
        let cutoff = match kind.as_ref().map(|(v, l)| (v.as_str(), *l)) {
            None | Some(("smooth-bump", _)) => {
                let Cutoff::SmoothBump { a: da, eps: de } = Cutoff::default() else {
                    unreachable!("default cutoff is a smooth bump")
                };
                Cutoff::smooth_bump(a.unwrap_or(da), eps.unwrap_or(de))
                    .map_err(|e| Error::Config(e.to_string()))?
            }
            Some(("indicator-one", l)) => {
                if a.is_some() || eps.is_some() {
                    return Err(cfg_err(
                        l,
                        "cutoff_a and cutoff_eps apply only to smooth-bump",
                    ));
                }
                Cutoff::IndicatorOne
            }
            Some((other, l)) => return Err(cfg_err(l, format!("unknown cutoff {other:?}"))),
        };

        let ks = match get("k") {
            Some((v, l)) => parse_depths(v).map_err(wrap(l))?,
            None => Vec::new(),
        };
        let reals = |key: &str, default: &[f64]| -> Result<Vec<f64>> {
            match get(key) {
                Some((v, l)) => parse_reals(v).map_err(wrap(l)),
                None => Ok(default.to_vec()),
            }
        };
        let nus = reals("nu", &[0.25, 0.5, 1.0])?;
        if let Some(bad) = nus.iter().find(|v| **v < 0.0) {
            return Err(Error::Config(format!("nu must be >= 0, got {bad}")));
        }
        let rhos = reals("rho", &[0.6, 0.8, 0.95])?;
        if let Some(bad) = rhos.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::Config(format!("rho must lie in (0, 1), got {bad}")));
        }
        let theory_nus = reals("theory_nu", &[])?;
        let theory_nus = if get("theory_nu").is_some() {
            theory_nus
        } else {
            parse_reals("0:1:101").expect("default grid parses")
        };
        let dense_cap = match get("dense_cap") {
            Some((v, l)) => parse_u64(v).map_err(wrap(l))? as usize,
            None => DEFAULT_DENSE_CAP,
        };
        let output = get("output")
            .map(|(v, _)| PathBuf::from(v))
            .unwrap_or_else(|| PathBuf::from("out"));
        let checks = match get("checks") {
            Some((v, l)) => {
                let set: BTreeSet<CheckKind> = items(v)
                    .map(CheckKind::parse)
                    .collect::<Result<_>>()
                    .map_err(|e| cfg_err(l, e))?;
                set.into_iter().collect()
            }
            None => CheckKind::ALL.to_vec(),
        };
        let opt = |key: &str| {
            get(key)
                .map(|(v, l)| parse_f64(v).map_err(wrap(l)))
                .transpose()
        };
        let fit_k = match get("fit_k") {
            Some((v, l)) => {
                let d = parse_depths(v).map_err(wrap(l))?;
                match (d.first(), d.last()) {
                    (Some(a), Some(b)) if d.len() >= 2 => Some((*a, *b)),
                    _ => return Err(cfg_err(l, "fit_k needs a range a..b")),
                }
            }
            None => None,
        };
        let energy_min_k = match get("energy_min_k") {
            Some((v, l)) => parse_u64(v).map_err(wrap(l))? as u32,
            None => 1,
        };
        let flag = |key: &str| -> Result<bool> {
            get(key)
                .map(|(v, l)| parse_bool(v).map_err(wrap(l)))
                .transpose()
                .map(|b| b.unwrap_or(false))
        };
        Ok(ExperimentConfig {
            alphabet,
            cutoff,
            ks,
            nus,
            rhos,
            dense_cap,
            output,
            checks,
            beta_bd: opt("beta_bd")?,
            beta: opt("beta")?,
            beta_e: opt("beta_e")?,
            gamma: opt("gamma")?,
            theory_nus,
            fit_k,
            energy_min_k,
            nu0: opt("nu0")?,
            export_operator: flag("export_operator")?,
            residuals: flag("residuals")?,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical text with every key spelled out; parses back to `self`.
    pub fn to_text(&self) -> String {
        fn list<T: std::fmt::Display>(v: &[T]) -> String {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        }
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("base", self.alphabet.base().to_string());
        put("letters", list(self.alphabet.letters()));
        match self.cutoff {
            Cutoff::IndicatorOne => put("cutoff", "indicator-one".to_string()),
            Cutoff::SmoothBump { a, eps } => {
                put("cutoff", "smooth-bump".to_string());
                put("cutoff_a", a.to_string());
                put("cutoff_eps", eps.to_string());
            }
        }
        put("k", list(&self.ks));
        put("nu", list(&self.nus));
        put("rho", list(&self.rhos));
        put("dense_cap", self.dense_cap.to_string());
        put("output", self.output.display().to_string());
        put(
            "checks",
            self.checks
                .iter()
                .map(|c| c.name())
                .collect::<Vec<_>>()
                .join(", "),
        );
        for (k, v) in [
            ("beta_bd", self.beta_bd),
            ("beta", self.beta),
            ("beta_e", self.beta_e),
            ("gamma", self.gamma),
        ] {
            if let Some(v) = v {
                put(k, v.to_string());
            }
        }
        put("theory_nu", list(&self.theory_nus));
        if let Some((a, b)) = self.fit_k {
            put("fit_k", format!("{a}..{b}"));
        }
        put("energy_min_k", self.energy_min_k.to_string());
        if let Some(v) = self.nu0 {
            put("nu0", v.to_string());
        }
        put("export_operator", self.export_operator.to_string());
        put("residuals", self.residuals.to_string());
        s
    }

    pub fn family(&self) -> Result<BakerFamily> {
        BakerFamily::new(self.alphabet.clone(), self.cutoff)
    }

    fn gap_inputs(&self) -> GapInputs {
        GapInputs {
            delta: self.alphabet.dimension(),
            beta_bd: self.beta_bd,
            beta: self.beta,
            beta_e: self.beta_e,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Fup,
    Count,
    Theory,
    Energy,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Fup => "fup",
            Command::Count => "count",
            Command::Theory => "theory",
            Command::Energy => "energy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskState {
    Ok,
    Failed,
    /// Precondition not met, as in `δ ∉ (0, 1)`.
    Rejected,
    /// Nothing to do, as in an oracle beyond its scale.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskStatus {
    pub task: String,
    pub status: TaskState,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub tasks: Vec<TaskStatus>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn failed(&self) -> usize {
        self.tasks
            .iter()
            .filter(|t| t.status == TaskState::Failed)
            .count()
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the config's `output`.
    pub out: Option<PathBuf>,
    /// Worker count; `None` or `0` uses all logical cores.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
}

impl RunOutcome {
    /// `0` when every task succeeded, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.manifest.failed() > 0)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Collects outputs and task statuses; files are written serially.
struct Run {
    dir: PathBuf,
    files: Vec<FileEntry>,
    tasks: Vec<TaskStatus>,
}

impl Run {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    fn task(&mut self, task: impl Into<String>, status: TaskState, detail: impl Into<String>) {
        self.tasks.push(TaskStatus {
            task: task.into(),
            status,
            detail: detail.into(),
        });
    }

    fn ok(&mut self, task: impl Into<String>) {
        self.task(task, TaskState::Ok, "");
    }

    /// Records an error as rejected, skipped or failed by its kind.
    fn error(&mut self, task: impl Into<String>, e: &Error) {
        let state = match e {
            Error::Domain(_) => TaskState::Rejected,
            Error::ScaleExceeded { .. }
            | Error::DenseCapExceeded { .. }
            | Error::InsufficientData(_) => TaskState::Skipped,
            _ => TaskState::Failed,
        };
        let detail = match (e, &state) {
            (_, TaskState::Rejected) => format!("rejected: {e}"),
            _ => e.to_string(),
        };
        self.task(task, state, detail);
    }

    fn record<T>(&mut self, task: impl Into<String>, r: &Result<T>) {
        match r {
            Ok(_) => self.ok(task),
            Err(e) => self.error(task, e),
        }
    }
}

/// Parses `path` and runs `command`. Config problems surface as [`Error::Config`].
pub fn run_file(command: Command, path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let config = ExperimentConfig::from_file(path)?;
    run(command, &config, opts)
}

pub fn run(command: Command, config: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let started_unix = unix_now();
    let dir = opts.out.clone().unwrap_or_else(|| config.output.clone());
    fs::create_dir_all(&dir)?;
    let resolved = config.to_text();
    let mut run = Run {
        dir: dir.clone(),
        files: Vec::new(),
        tasks: Vec::new(),
    };
    run.write(RESOLVED_CONFIG, resolved.as_bytes())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(|| match command {
        Command::Spectrum => cmd_spectrum(config, &mut run),
        Command::Count => cmd_count(config, &mut run),
        Command::Fup => cmd_fup(config, &mut run),
        Command::Theory => cmd_theory(config, &mut run),
        Command::Energy => cmd_energy(config, &mut run),
    })?;
    run.files.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = RunManifest {
        version: crate::VERSION.to_string(),
        command: command.name().to_string(),
        config_sha256: sha256_hex(resolved.as_bytes()),
        started_unix,
        finished_unix: unix_now(),
        tasks: run.tasks,
        files: run.files,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join(manifest_name(command)), text)?;
    Ok(RunOutcome {
        out_dir: dir,
        manifest,
    })
}

fn jsonl<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    Ok(out)
}

type SpectrumTask = Result<(SpectrumResult, Option<DenseOperator>)>;

/// Dense spectra for every configured depth, in depth order.
fn spectra(
    config: &ExperimentConfig,
    family: &BakerFamily,
    keep_operator: bool,
) -> Vec<(u32, SpectrumTask)> {
    config
        .ks
        .par_iter()
        .map(|&k| {
            let r = (|| {
                let spec = family.at_depth(k)?;
                let b = build_baker(&spec, config.dense_cap)?;
                let s = eigenvalues(
                    &b,
                    EigenOptions {
                        residuals: config.residuals,
                    },
                )?;
                Ok((s, keep_operator.then_some(b)))
            })();
            (k, r)
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct SpectrumSummary {
    k: u32,
    #[serde(rename = "N")]
    n: usize,
    trace_re: f64,
    trace_im: f64,
    eigen_sum_re: f64,
    eigen_sum_im: f64,
    trace_rel_err: f64,
    sum_abs_sqr: f64,
    frobenius_sqr: f64,
    max_modulus: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    backward_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    annulus_count: Option<usize>,
}

fn cmd_spectrum(config: &ExperimentConfig, run: &mut Run) -> Result<()> {
    let family = config.family()?;
    let fingerprint = family.fingerprint();
    let base = config.alphabet.base();
    let mut summary = Vec::new();
    // The summary needs trace and Frobenius norm, so operators are always kept.
    for (k, r) in spectra(config, &family, true) {
        let task = format!("spectrum k={k}");
        let (s, op) = match r {
            Ok(v) => v,
            Err(e) => {
                run.error(task, &e);
                continue;
            }
        };
        let op = op.expect("operator kept");
        let mut csv = Vec::new();
        s.write_csv(&mut csv, k, &fingerprint)?;
        run.write(&format!("spectrum_k{k:02}.csv"), &csv)?;
        if config.export_operator {
            let mut bin = Vec::new();
            write_operator(&mut bin, &op)?;
            run.write(&format!("operator_k{k:02}.bin"), &bin)?;
        }
        let tr = op.trace();
        let sum = s.sum();
        summary.push(SpectrumSummary {
            k,
            n: s.n,
            trace_re: tr.re,
            trace_im: tr.im,
            eigen_sum_re: sum.re,
            eigen_sum_im: sum.im,
            trace_rel_err: (sum - tr).norm() / tr.norm().max(1.0),
            sum_abs_sqr: s.sum_abs_sqr(),
            frobenius_sqr: op.frobenius_norm_sqr(),
            max_modulus: s.max_modulus(),
            backward_error: s.backward_error,
            annulus_count: config.nu0.map(|nu0| {
                s.eigenvalues
                    .iter()
                    .filter(|z| in_annulus(**z, nu0, base))
                    .count()
            }),
        });
        run.ok(task);
    }
    run.write("spectrum_summary.jsonl", &jsonl(&summary)?)
}

fn cmd_count(config: &ExperimentConfig, run: &mut Run) -> Result<()> {
    let family = config.family()?;
    let mut ok = Vec::new();
    for (k, r) in spectra(config, &family, false) {
        let task = format!("spectrum k={k}");
        match r {
            Ok((s, _)) => {
                run.ok(task);
                ok.push((k, s));
            }
            Err(e) => run.error(task, &e),
        }
    }
    let curve = CountingCurve::from_spectra(&family, &ok, &config.nus)?;
    let mut csv = Vec::new();
    curve.write_csv(&mut csv)?;
    run.write("counting.csv", &csv)?;

    let gap = config.gap_inputs();
    let beta_e = gap.resolved_beta_e().ok().flatten();
    let mut fits = Vec::new();
    for &nu in &config.nus {
        let theory = gap
            .beta
            .zip(beta_e)
            .and_then(|(b, e)| baker_weyl_exponent(nu, gap.delta, b, e).ok());
        let range = config.fit_k.map(|(a, b)| a..=b);
        let r = fit_exponent(&curve, nu, range, theory);
        run.record(format!("fit nu={nu}"), &r);
        if let Ok(f) = r {
            fits.push(f);
        }
    }
    run.write("fits.jsonl", &jsonl(&fits)?)
}

fn cmd_fup(config: &ExperimentConfig, run: &mut Run) -> Result<()> {
    let a = &config.alphabet;
    let wants = |c: CheckKind| config.checks.contains(&c);
    let kmax = config.ks.iter().copied().max().unwrap_or(0);
    // Submultiplicativity and Fekete need every depth up to the largest.
    let depths: Vec<u32> = if wants(CheckKind::Submultiplicativity) || wants(CheckKind::Fekete) {
        (1..=kmax).collect()
    } else {
        config.ks.clone()
    };

    let fft: Vec<(u32, Result<TkRecord>)> =
        depths.par_iter().map(|&k| (k, t_k_fft(a, k))).collect();
    let mut table = std::collections::BTreeMap::new();
    let mut tk_rows = Vec::new();
    for (k, r) in fft {
        run.record(format!("t_k fft k={k}"), &r);
        if let Ok(t) = r {
            tk_rows.push(t.clone());
            table.insert(k, t);
        }
    }
    if wants(CheckKind::Oracles) {
        let oracles: Vec<(u32, Result<TkRecord>, Result<TkRecord>)> = config
            .ks
            .par_iter()
            .map(|&k| (k, t_k_quadruple(a, k), t_k_singular(a, k)))
            .collect();
        for (k, q, s) in oracles {
            run.record(format!("t_k quadruple k={k}"), &q);
            run.record(format!("t_k singular k={k}"), &s);
            tk_rows.extend(q.ok());
            tk_rows.extend(s.ok());
        }
    }
    tk_rows.sort_by_key(|t| (t.k, t.method as u8));
    run.write("tk.jsonl", &jsonl(&tk_rows)?)?;

    let mut reports: Vec<CheckReport> = Vec::new();
    let mut traces: Vec<TraceRecord> = Vec::new();
    if wants(CheckKind::TraceDomination) {
        let grid: Vec<(u32, f64)> = config
            .ks
            .iter()
            .flat_map(|&k| config.rhos.iter().map(move |&r| (k, r)))
            .collect();
        let results: Vec<_> = grid
            .par_iter()
            .map(|&(k, rho)| {
                let pair = trace_tt(a, k, rho, TraceMethod::Pairsum);
                let dense = (a.modulus(k).is_ok_and(|n| n <= MATRIX_TRACE_MAX_N))
                    .then(|| trace_tt(a, k, rho, TraceMethod::MatrixOracle));
                (k, rho, pair, dense)
            })
            .collect();
        for (k, rho, pair, dense) in results {
            let task = format!("trace-domination k={k} rho={rho}");
            if let Some(d) = dense {
                run.record(format!("trace matrix-oracle k={k} rho={rho}"), &d);
                traces.extend(d.ok());
            }
            let report = pair.and_then(|p| {
                traces.push(p.clone());
                let t = table
                    .get(&k)
                    .ok_or_else(|| Error::InsufficientData(format!("no t_k at k={k}")))?;
                check_trace_domination(&p, t)
            });
            run.record(task, &report);
            reports.extend(report.ok());
        }
    }
    if wants(CheckKind::Submultiplicativity) {
        for k1 in 1..=kmax {
            for k2 in k1..=kmax.saturating_sub(k1) {
                let task = format!("submultiplicativity k1={k1} k2={k2}");
                let r = match (table.get(&k1), table.get(&k2), table.get(&(k1 + k2))) {
                    (Some(a), Some(b), Some(c)) => check_submultiplicativity(a, b, c),
                    _ => Err(Error::InsufficientData("missing t_k".to_string())),
                };
                run.record(task, &r);
                reports.extend(r.ok());
            }
        }
    }
    if wants(CheckKind::TrivialBound) {
        for &k in &config.ks {
            let r = table
                .get(&k)
                .ok_or_else(|| Error::InsufficientData(format!("no t_k at k={k}")))
                .and_then(check_trivial_bound);
            run.record(format!("trivial-bound k={k}"), &r);
            reports.extend(r.ok());
        }
    }
    if wants(CheckKind::EnergyBound) {
        let results: Vec<(u32, Result<CheckReport>)> = config
            .ks
            .par_iter()
            .map(|&k| {
                let r = table
                    .get(&k)
                    .ok_or_else(|| Error::InsufficientData(format!("no t_k at k={k}")))
                    .and_then(check_energy_bound);
                (k, r)
            })
            .collect();
        for (k, r) in results {
            run.record(format!("energy-bound k={k}"), &r);
            reports.extend(r.ok());
        }
    }
    run.write("checks.jsonl", &jsonl(&reports)?)?;
    if !traces.is_empty() {
        run.write("trace.jsonl", &jsonl(&traces)?)?;
    }
    if wants(CheckKind::Fekete) {
        let records: Vec<TkRecord> = table.values().cloned().collect();
        let r = fekete_bounds(&records);
        run.record("fekete", &r);
        if let Ok(f) = r {
            let v = json!({
                "fekete": f,
                "trivial_gap": 0.5 - a.dimension(),
                "exceeds_trivial_gap": f.running_best > 0.5 - a.dimension(),
            });
            let mut text = serde_json::to_string_pretty(&v)?;
            text.push('\n');
            run.write("fekete.json", text.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_theory(config: &ExperimentConfig, run: &mut Run) -> Result<()> {
    let gap = config.gap_inputs();
    let rows = exponent_grid(&gap, &config.theory_nus);
    run.record("theory grid", &rows);
    if let Ok(rows) = rows {
        let mut csv = Vec::new();
        let header = format!(
            "delta={} beta_bd={:?} beta={:?} beta_e={:?} version={}",
            gap.delta,
            gap.beta_bd,
            gap.beta,
            gap.resolved_beta_e().ok().flatten(),
            crate::VERSION
        );
        write_grid_csv(&mut csv, &header, &rows)?;
        run.write("theory.csv", &csv)?;
    }
    if let Some(b) = gap.beta_bd {
        let r = beta_bd_sanity(gap.delta, b);
        run.record("beta_bd sanity", &r);
        if let Ok(s) = r {
            let mut text = serde_json::to_string_pretty(&s)?;
            text.push('\n');
            run.write("beta_bd_sanity.json", text.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_energy(config: &ExperimentConfig, run: &mut Run) -> Result<()> {
    let a = &config.alphabet;
    // Per depth: (N, |C_k|, E).
    type Row = (u64, usize, AdditiveEnergy);
    let results: Vec<(u32, Result<Row>)> = config
        .ks
        .par_iter()
        .map(|&k| {
            let r = build_cantor(a, k)
                .map(|c| (c.modulus(), c.len(), additive_energy(&c.to_index_set())));
            (k, r)
        })
        .collect();
    let mut csv = format!(
        "# M={} A={:?} version={}\nk,N,size,energy\n",
        a.base(),
        a.letters(),
        crate::VERSION
    );
    let mut energies = Vec::new();
    for (k, r) in results {
        run.record(format!("energy k={k}"), &r);
        if let Ok((n, size, e)) = r {
            let _ = writeln!(csv, "{k},{n},{size},{e}");
            energies.push((k, e));
        }
    }
    run.write("energy.csv", csv.as_bytes())?;
    let fit = gamma_fit(a, &energies, config.energy_min_k);
    run.record("gamma fit", &fit);
    if let Ok(f) = fit {
        let mut text = serde_json::to_string_pretty(&f)?;
        text.push('\n');
        run.write("gamma.json", text.as_bytes())?;
    }
    Ok(())
}
