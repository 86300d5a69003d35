//! Experiment runner behind the `compact-cn` binary: parameter sweeps over
//! `(dz, dv)` or `(alpha1, alpha2)` written as CSV plus a metadata file.
//!
//! Configuration comes from `key = value` lines and command-line flags, in
//! that order, so flags override the file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::bounds::{
    condition_report, norm_bounds, norm_ratio, unit_bound_step, ConditionOptions, PowerOptions,
};
use crate::error::{Error, Result};
use crate::problem::{intervals_for, CanonicalProblem, ExponentialOracle};
use crate::scheme::coefficients;
use crate::spectral::{min_real_part, prop1_margins, DEFAULT_DENSE_CAP};
use crate::stepper::{convergence_study, integrate, SolveOptions, StudyPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    EigenTable,
    NormRatioTable,
    EigenGrid,
    ConditionTable,
    Convergence,
    Solve,
    Prop1Margins,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::EigenTable,
        Experiment::NormRatioTable,
        Experiment::EigenGrid,
        Experiment::ConditionTable,
        Experiment::Convergence,
        Experiment::Solve,
        Experiment::Prop1Margins,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::EigenTable => "eigen-table",
            Experiment::NormRatioTable => "norm-ratio-table",
            Experiment::EigenGrid => "eigen-grid",
            Experiment::ConditionTable => "condition-table",
            Experiment::Convergence => "convergence",
            Experiment::Solve => "solve",
            Experiment::Prop1Margins => "prop1-margins",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// How `dz` relates to the stated spatial interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DomainCoords {
    /// `dz` subdivides `[xl, xr]` itself: `N = (xr - xl) / dz`.
    #[default]
    X,
    /// `dz` subdivides the transformed interval `(alpha1/alpha2) [xl, xr]`.
    Z,
}

impl FromStr for DomainCoords {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(DomainCoords::X),
            "z" => Ok(DomainCoords::Z),
            _ => Err(Error::Config(format!(
                "domain-coords must be 'x' or 'z', got '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Overrides the alpha pair when set.
    pub c: Option<f64>,
    pub xl: f64,
    pub xr: f64,
    pub zl: Option<f64>,
    pub zr: Option<f64>,
    pub horizon: f64,
    pub dz_list: Option<Vec<f64>>,
    pub dv_list: Option<Vec<f64>>,
    pub alpha1_list: Option<Vec<f64>>,
    pub alpha2_list: Option<Vec<f64>>,
    pub domain_coords: DomainCoords,
    pub dense_cap: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub workers: usize,
    /// Rate `k` of the exponential oracle.
    pub rate: f64,
    /// `dv / dz^2` for spatial studies and margin sweeps.
    pub mesh_ratio: Option<f64>,
    /// Fixed interval count of temporal studies.
    pub intervals: usize,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            alpha1: 0.25,
            alpha2: 0.1,
            c: None,
            xl: 0.0,
            xr: 1.0,
            zl: None,
            zr: None,
            horizon: 2.0,
            dz_list: None,
            dv_list: None,
            alpha1_list: None,
            alpha2_list: None,
            domain_coords: DomainCoords::X,
            dense_cap: DEFAULT_DENSE_CAP,
            out: PathBuf::from("out"),
            seed: 1,
            workers: 1,
            rate: ExponentialOracle::DEFAULT_RATE,
            mesh_ratio: None,
            intervals: 256,
        }
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_file_text(&text)
    }

    /// Sets one option by its flag name (without the leading dashes).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => self.experiment = value.parse()?,
            "alpha1" => {
                self.alpha1 = parse_number(key, value)?;
                self.c = None;
            }
            "alpha2" => {
                self.alpha2 = parse_number(key, value)?;
                self.c = None;
            }
            "c" => self.c = Some(parse_number(key, value)?),
            "xl" => self.xl = parse_number(key, value)?,
            "xr" => self.xr = parse_number(key, value)?,
            "zl" => self.zl = Some(parse_number(key, value)?),
            "zr" => self.zr = Some(parse_number(key, value)?),
            "T" | "horizon" => self.horizon = parse_number(key, value)?,
            "dz-list" => self.dz_list = Some(parse_list(key, value)?),
            "dv-list" => self.dv_list = Some(parse_list(key, value)?),
            "alpha1-list" => self.alpha1_list = Some(parse_list(key, value)?),
            "alpha2-list" => self.alpha2_list = Some(parse_list(key, value)?),
            "domain-coords" => self.domain_coords = value.parse()?,
            "dense-cap" => self.dense_cap = parse_count(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = parse_count(key, value)? as u64,
            "workers" => self.workers = parse_count(key, value)?.max(1),
            "rate" => self.rate = parse_number(key, value)?,
            "mesh-ratio" => self.mesh_ratio = Some(parse_number(key, value)?),
            "intervals" => self.intervals = parse_count(key, value)?,
            _ => return Err(Error::Config(format!("unknown option '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, list) in [("dz-list", &self.dz_list), ("dv-list", &self.dv_list)] {
            if let Some(list) = list {
                if list.is_empty() {
                    return Err(Error::Config(format!("{name} is empty")));
                }
                if list.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::Config(format!("{name} entries must be positive")));
                }
            }
        }
        if let Some(list) = &self.dz_list {
            if let Some(bad) = list.iter().find(|&&dz| dz >= 2.0) {
                return Err(Error::Config(format!("dz = {bad} must be below 2")));
            }
        }
        for (name, list) in [
            ("alpha1-list", &self.alpha1_list),
            ("alpha2-list", &self.alpha2_list),
        ] {
            if matches!(list, Some(l) if l.is_empty()) {
                return Err(Error::Config(format!("{name} is empty")));
            }
        }
        if let Some(c) = self.c {
            if !(c > 0.0) {
                return Err(Error::Config("c must be positive".into()));
            }
        } else {
            if !(self.alpha2 > 0.0) {
                return Err(Error::Config(format!(
                    "alpha2 = {} must be positive",
                    self.alpha2
                )));
            }
            if self.alpha1 == 0.0 {
                return Err(Error::Config("alpha1 must be non-zero".into()));
            }
        }
        if !(self.horizon > 0.0) {
            return Err(Error::Config("T must be positive".into()));
        }
        let (zl, zr) = self.interval();
        if !(zl < zr) {
            return Err(Error::Config(format!("empty interval [{zl}, {zr}]")));
        }
        Ok(())
    }

    /// `alpha1^2 / alpha2`, or the direct `c` override.
    pub fn c_value(&self) -> f64 {
        self.c.unwrap_or(self.alpha1 * self.alpha1 / self.alpha2)
    }

    /// Interval subdivided by `dz`.
    pub fn interval(&self) -> (f64, f64) {
        if let (Some(zl), Some(zr)) = (self.zl, self.zr) {
            return (zl, zr);
        }
        match (self.domain_coords, self.c) {
            (DomainCoords::Z, None) => mapped_interval(self.alpha1, self.alpha2, self.xl, self.xr),
            _ => (self.xl, self.xr),
        }
    }
}

fn mapped_interval(alpha1: f64, alpha2: f64, xl: f64, xr: f64) -> (f64, f64) {
    let ratio = alpha1 / alpha2;
    let (a, b) = (ratio * xl, ratio * xr);
    (a.min(b), a.max(b))
}

/// Parses `0.125`, `1e-3` or a fraction such as `1/8`.
pub fn parse_number(key: &str, value: &str) -> Result<f64> {
    let bad = || Error::Config(format!("{key}: cannot parse '{value}' as a number"));
    let v = value.trim();
    let x = match v.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            num / den
        }
        None => v.parse().map_err(|_| bad())?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_number(key, s))
        .collect()
}

fn parse_count(key: &str, value: &str) -> Result<usize> {
    value.trim().parse().map_err(|_| {
        Error::Config(format!(
            "{key}: cannot parse '{value}' as a non-negative integer"
        ))
    })
}

/// `dz = 1/8, 1/16, ..., 1/4096`.
pub fn default_dz_list() -> Vec<f64> {
    (3..=12).map(|k| 0.5f64.powi(k)).collect()
}

/// `dv = 1e-8, ..., 1e-1`.
pub fn default_dv_list() -> Vec<f64> {
    (1..=8).rev().map(|k| 10f64.powi(-k)).collect()
}

/// `-2, -1.75, ..., 2` without 0.
pub fn default_alpha1_list() -> Vec<f64> {
    (-8..=8)
        .filter(|&k| k != 0)
        .map(|k| k as f64 * 0.25)
        .collect()
}

/// `0.05, 0.10, ..., 2.00`.
pub fn default_alpha2_list() -> Vec<f64> {
    (1..=40).map(|k| k as f64 * 0.05).collect()
}

/// Reference minimum real part for a tabulated cell, if `(dz, dv)` is one.
pub fn reference_min_real_part(dz: f64, dv: f64) -> Option<f64> {
    let in_dz = (3..=12).any(|k| same(dz, 0.5f64.powi(k)));
    let in_dv = (1..=8).any(|k| same(dv, 10f64.powi(-k)));
    (in_dz && in_dv).then_some(3.16 * dv)
}

/// Reference norm ratio for a tabulated `dz` (independent of `dv`).
pub fn reference_norm_ratio(dz: f64) -> Option<f64> {
    const ROWS: [f64; 10] = [
        0.9140, 0.9543, 0.9647, 0.9673, 0.9680, 0.9681, 0.9682, 0.9682, 0.9682, 0.9682,
    ];
    (3..=12)
        .position(|k| same(dz, 0.5f64.powi(k)))
        .map(|i| ROWS[i])
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs()
}

/// C-style `%.6e`: six fraction digits and a signed exponent of at least
/// two digits.
pub fn fmt_e(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.6e}");
    let (mantissa, exp) = s.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_e).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One CSV file: header, rows, and the status of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let line = |cells: &[String]| {
            cells
                .iter()
                .map(|c| csv_field(c))
                .collect::<Vec<_>>()
                .join(",")
        };
        out.push_str(&line(&self.header));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Rows whose `status` column is not `ok`.
    pub fn failed_rows(&self) -> usize {
        match self.column("status") {
            Some(i) => self.rows.iter().filter(|r| r[i] != "ok").count(),
            None => 0,
        }
    }
}

/// Everything produced by one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    /// `key: value` lines describing inputs and artifact choices.
    pub metadata: Vec<(String, String)>,
    pub summary: String,
}

impl RunOutput {
    pub fn failed_cells(&self) -> usize {
        self.tables.iter().map(Table::failed_rows).sum()
    }

    pub fn total_cells(&self) -> usize {
        self.tables.iter().map(|t| t.rows.len()).sum()
    }

    /// Writes `<name>.csv` for each table and `<experiment>.meta.txt`.
    pub fn write(&self, dir: &Path, experiment: Experiment) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            fs::write(&path, t.to_csv())?;
            written.push(path);
        }
        let mut meta = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(meta, "{k}: {v}");
        }
        let path = dir.join(format!("{}.meta.txt", experiment.name()));
        fs::write(&path, meta)?;
        written.push(path);
        Ok(written)
    }
}

struct Cell {
    values: Vec<String>,
    status: String,
    error: String,
}

impl Cell {
    fn ok(values: Vec<String>) -> Self {
        Self {
            values,
            status: "ok".into(),
            error: String::new(),
        }
    }

    fn with_status(values: Vec<String>, status: &str) -> Self {
        Self {
            values,
            status: status.into(),
            error: String::new(),
        }
    }

    fn failed(width: usize, e: &Error) -> Self {
        let status = match e {
            Error::DenseCapExceeded { .. } => "skipped(cap)",
            _ => "error",
        };
        Self {
            values: vec![String::new(); width],
            status: status.into(),
            error: e.to_string(),
        }
    }
}

/// Runs the cells on a pool of `workers` threads; results keep input order.
fn sweep<T: Sync, R: Send>(
    workers: usize,
    inputs: &[T],
    cell: impl Fn(&T) -> R + Sync,
) -> Result<Vec<R>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| inputs.par_iter().map(&cell).collect()))
}

fn assemble(table: &mut Table, coords: Vec<Vec<String>>, cells: Vec<Cell>) {
    for (mut row, cell) in coords.into_iter().zip(cells) {
        row.extend(cell.values);
        row.push(cell.status);
        row.push(cell.error);
        table.rows.push(row);
    }
}

fn base_metadata(cfg: &ExperimentConfig) -> Vec<(String, String)> {
    let (zl, zr) = cfg.interval();
    let mut m = vec![
        ("experiment".to_string(), cfg.experiment.name().to_string()),
        ("c".to_string(), fmt_e(cfg.c_value())),
    ];
    if cfg.c.is_none() {
        m.push(("alpha1".into(), fmt_e(cfg.alpha1)));
        m.push(("alpha2".into(), fmt_e(cfg.alpha2)));
    }
    m.push((
        "domain-coords".into(),
        format!("{:?}", cfg.domain_coords).to_lowercase(),
    ));
    m.push(("interval".into(), format!("[{}, {}]", fmt_e(zl), fmt_e(zr))));
    m.push(("T".into(), fmt_e(cfg.horizon)));
    m.push(("dense-cap".into(), cfg.dense_cap.to_string()));
    m.push(("seed".into(), cfg.seed.to_string()));
    m.push(("float-format".into(), "%.6e".into()));
    m
}

/// Power iteration restarts seeded with `seed, seed + 1, seed + 2`.
fn power_options(cfg: &ExperimentConfig) -> PowerOptions {
    PowerOptions {
        seeds: (0..3).map(|i| cfg.seed + i).collect(),
        ..PowerOptions::default()
    }
}

fn grid_cells(cfg: &ExperimentConfig) -> (Vec<f64>, Vec<f64>) {
    (
        cfg.dz_list.clone().unwrap_or_else(default_dz_list),
        cfg.dv_list.clone().unwrap_or_else(default_dv_list),
    )
}

fn dz_dv_pairs(cfg: &ExperimentConfig) -> Vec<(f64, f64)> {
    let (dzs, dvs) = grid_cells(cfg);
    dzs.iter()
        .flat_map(|&dz| dvs.iter().map(move |&dv| (dz, dv)))
        .collect()
}

fn coord_rows(pairs: &[(f64, f64)]) -> Vec<Vec<String>> {
    pairs
        .iter()
        .map(|&(a, b)| vec![fmt_e(a), fmt_e(b)])
        .collect()
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::EigenTable => eigen_table(cfg),
        Experiment::NormRatioTable => norm_ratio_table(cfg),
        Experiment::EigenGrid => eigen_grid(cfg),
        Experiment::ConditionTable => condition_table(cfg),
        Experiment::Convergence => convergence(cfg),
        Experiment::Solve => solve(cfg),
        Experiment::Prop1Margins => prop1(cfg),
    }
}

/// Runs the experiment and writes its files under `cfg.out`.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<(RunOutput, Vec<PathBuf>)> {
    let output = run(cfg)?;
    let files = output.write(&cfg.out, cfg.experiment)?;
    Ok((output, files))
}

fn eigen_table(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let c = cfg.c_value();
    let (zl, zr) = cfg.interval();
    let pairs = dz_dv_pairs(cfg);
    let cells = sweep(cfg.workers, &pairs, |&(dz, dv)| {
        let cell = || -> Result<Cell> {
            let n = intervals_for(zr - zl, dz)?;
            let k = coefficients(c, dz, dv)?;
            let value = min_real_part(&k, n, cfg.dense_cap)?;
            let reference = reference_min_real_part(dz, dv);
            let deviation = reference.map(|r| (value - r) / r);
            let values = vec![fmt_e(value), fmt_opt(reference), fmt_opt(deviation)];
            Ok(if value > 0.0 {
                Cell::ok(values)
            } else {
                Cell::with_status(values, "non-positive")
            })
        };
        cell().unwrap_or_else(|e| Cell::failed(3, &e))
    })?;
    let mut table = Table::new(
        "eigen-table",
        &[
            "dz",
            "dv",
            "min_re_rho",
            "reference",
            "rel_deviation",
            "status",
            "error",
        ],
    );
    assemble(&mut table, coord_rows(&pairs), cells);
    let mut metadata = base_metadata(cfg);
    metadata.push((
        "value".into(),
        "minimum real part of the eigenvalues of W (dense eigensolver)".into(),
    ));
    metadata.push((
        "reference".into(),
        "published 3-significant-figure table values".into(),
    ));
    let summary = format!(
        "eigen-table: {} cells, {} not ok",
        table.rows.len(),
        table.failed_rows()
    );
    Ok(RunOutput {
        tables: vec![table],
        metadata,
        summary,
    })
}

fn norm_ratio_table(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let c = cfg.c_value();
    let (zl, zr) = cfg.interval();
    let pairs = dz_dv_pairs(cfg);
    let power = power_options(cfg);
    let cells = sweep(cfg.workers, &pairs, |&(dz, dv)| {
        let cell = || -> Result<Cell> {
            let n = intervals_for(zr - zl, dz)?;
            let k = coefficients(c, dz, dv)?;
            let (est, ratio) = norm_ratio(&k, n, &power)?;
            let reference = reference_norm_ratio(dz);
            let values = vec![
                fmt_e(est.value),
                fmt_e(norm_bounds(&k).w),
                fmt_e(ratio),
                fmt_opt(reference),
                fmt_opt(reference.map(|r| ratio - r)),
                est.iterations.to_string(),
            ];
            Ok(if est.converged {
                Cell::ok(values)
            } else {
                Cell::with_status(values, "unconverged")
            })
        };
        cell().unwrap_or_else(|e| Cell::failed(6, &e))
    })?;
    let mut table = Table::new(
        "norm-ratio-table",
        &[
            "dz",
            "dv",
            "w_norm",
            "w_bound",
            "ratio",
            "reference",
            "deviation",
            "iterations",
            "status",
            "error",
        ],
    );
    assemble(&mut table, coord_rows(&pairs), cells);
    let mut metadata = base_metadata(cfg);
    metadata.push((
        "value".into(),
        format!(
            "power-iteration estimate of |W|_2 over sqrt(12/5)(2c/dz^2+c/6)dv; seeds {}..{}; tol 1e-12; cap 20000",
            cfg.seed,
            cfg.seed + 2
        ),
    ));
    metadata.push((
        "status unconverged".into(),
        "estimate kept; tolerance not met within the iteration cap".into(),
    ));
    let summary = format!(
        "norm-ratio-table: {} cells, {} not ok",
        table.rows.len(),
        table.failed_rows()
    );
    Ok(RunOutput {
        tables: vec![table],
        metadata,
        summary,
    })
}

fn eigen_grid(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let a1s = cfg.alpha1_list.clone().unwrap_or_else(default_alpha1_list);
    let a2s = cfg.alpha2_list.clone().unwrap_or_else(default_alpha2_list);
    let dz = cfg.dz_list.as_ref().map_or(1.0 / 512.0, |l| l[0]);
    let pairs: Vec<(f64, f64)> = a1s
        .iter()
        .flat_map(|&a| a2s.iter().map(move |&b| (a, b)))
        .collect();
    let cells = sweep(cfg.workers, &pairs, |&(a1, a2)| {
        let cell = || -> Result<Cell> {
            if a1 == 0.0 {
                return Err(Error::DegenerateConvection);
            }
            if !(a2 > 0.0) {
                return Err(Error::NotDiffusive(a2));
            }
            let c = a1 * a1 / a2;
            let (zl, zr) = match (cfg.zl, cfg.zr, cfg.domain_coords) {
                (Some(l), Some(r), _) => (l, r),
                (_, _, DomainCoords::Z) => mapped_interval(a1, a2, cfg.xl, cfg.xr),
                _ => (cfg.xl, cfg.xr),
            };
            let n = intervals_for(zr - zl, dz)?;
            let dv = unit_bound_step(c, dz);
            let k = coefficients(c, dz, dv)?;
            let value = min_real_part(&k, n, cfg.dense_cap)?;
            let values = vec![fmt_e(c), fmt_e(dz), fmt_e(dv), fmt_e(value)];
            Ok(if value > 0.0 {
                Cell::ok(values)
            } else {
                Cell::with_status(values, "non-positive")
            })
        };
        cell().unwrap_or_else(|e| Cell::failed(4, &e))
    })?;
    let mut table = Table::new(
        "eigen-grid",
        &[
            "alpha1",
            "alpha2",
            "c",
            "dz",
            "dv",
            "min_re_rho",
            "status",
            "error",
        ],
    );
    assemble(&mut table, coord_rows(&pairs), cells);
    let mut metadata = base_metadata(cfg);
    metadata.push((
        "dv rule".into(),
        "dv = sqrt(5/12) / (2c/dz^2 + c/6), making the |W|_2 bound one".into(),
    ));
    metadata.push((
        "alpha ranges".into(),
        if cfg.alpha1_list.is_none() && cfg.alpha2_list.is_none() {
            "artifact default (alpha1 in [-2,2] step 0.25 without 0; alpha2 in [0.05,2] step 0.05); the source does not print its ranges".into()
        } else {
            "user supplied".into()
        },
    ));
    let summary = format!(
        "eigen-grid: {} cells, {} not ok",
        table.rows.len(),
        table.failed_rows()
    );
    Ok(RunOutput {
        tables: vec![table],
        metadata,
        summary,
    })
}

fn condition_table(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let c = cfg.c_value();
    let (zl, zr) = cfg.interval();
    let pairs = dz_dv_pairs(cfg);
    let opts = ConditionOptions {
        dense_cap: cfg.dense_cap,
        power: power_options(cfg),
        ..ConditionOptions::default()
    };
    let cells = sweep(cfg.workers, &pairs, |&(dz, dv)| {
        let cell = || -> Result<Cell> {
            let n = intervals_for(zr - zl, dz)?;
            let k = coefficients(c, dz, dv)?;
            let r = condition_report(&k, n, &opts)?;
            let values = vec![
                fmt_opt(r.measured_cond),
                fmt_e(r.cond_bound),
                fmt_opt(r.measured_cond.map(|m| m / r.cond_bound)),
                fmt_e(r.measured_w_norm),
                fmt_e(r.ratio),
                r.certificate.label().to_string(),
            ];
            let status = if !r.certificate.is_certified() {
                "unverified hypothesis"
            } else if !r.converged {
                "unconverged"
            } else {
                "ok"
            };
            Ok(Cell::with_status(values, status))
        };
        cell().unwrap_or_else(|e| Cell::failed(6, &e))
    })?;
    let mut table = Table::new(
        "condition-table",
        &[
            "dz",
            "dv",
            "cond",
            "cond_bound",
            "cond_ratio",
            "w_norm",
            "w_ratio",
            "certificate",
            "status",
            "error",
        ],
    );
    assemble(&mut table, coord_rows(&pairs), cells);
    let mut metadata = base_metadata(cfg);
    metadata.push((
        "cond".into(),
        "cond_2(I+W); dense singular values up to order 512, power iteration above".into(),
    ));
    metadata.push((
        "certificate".into(),
        "how positivity of Re spec(W) was established before reporting cond".into(),
    ));
    let summary = format!(
        "condition-table: {} cells, {} not ok",
        table.rows.len(),
        table.failed_rows()
    );
    Ok(RunOutput {
        tables: vec![table],
        metadata,
        summary,
    })
}

fn manufactured(cfg: &ExperimentConfig) -> Result<(CanonicalProblem, ExponentialOracle)> {
    let c = cfg.c_value();
    let (zl, zr) = cfg.interval();
    let canon = CanonicalProblem::manufactured(c, cfg.rate, zl, zr, cfg.horizon)?;
    Ok((canon, ExponentialOracle::new(c, cfg.rate)))
}

fn steps_for(horizon: f64, dv: f64) -> Result<usize> {
    let m = (horizon / dv).round();
    if m < 1.0 || (m * dv - horizon).abs() > 1e-9 * horizon {
        return Err(Error::Config(format!(
            "dv = {dv} does not divide T = {horizon}"
        )));
    }
    Ok(m as usize)
}

fn convergence(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (canon, oracle) = manufactured(cfg)?;
    let length = canon.length();
    let spatial_levels = match &cfg.dz_list {
        Some(l) => l
            .iter()
            .map(|&dz| intervals_for(length, dz))
            .collect::<Result<Vec<_>>>()?,
        None => vec![4, 8, 16, 32, 64],
    };
    let temporal_levels = match &cfg.dv_list {
        Some(l) => l
            .iter()
            .map(|&dv| steps_for(cfg.horizon, dv))
            .collect::<Result<Vec<_>>>()?,
        None => vec![4, 8, 16, 32, 64],
    };
    let plans = [
        StudyPlan::spatial(spatial_levels, cfg.mesh_ratio.unwrap_or(0.5)),
        StudyPlan::temporal(temporal_levels, cfg.intervals),
    ];
    let studies = sweep(cfg.workers, &plans, |plan| {
        convergence_study(&canon, &oracle, plan)
    })?;
    let mut table = Table::new(
        "convergence",
        &[
            "dz",
            "dv",
            "refinement",
            "error_max",
            "error_l2",
            "order_max",
            "order_l2",
            "status",
            "error",
        ],
    );
    let mut orders = Vec::new();
    for (plan, study) in plans.iter().zip(studies) {
        let refinement = format!("{:?}", plan.refinement).to_lowercase();
        match study {
            Ok(t) => {
                for r in &t.rows {
                    if let Some(order) = r.order_max {
                        orders.push(format!("{refinement} {order:.2}"));
                    }
                    table.rows.push(vec![
                        fmt_e(length / r.intervals as f64),
                        fmt_e(cfg.horizon / r.steps as f64),
                        refinement.clone(),
                        fmt_e(r.error_max),
                        fmt_e(r.error_l2),
                        fmt_opt(r.order_max),
                        fmt_opt(r.order_l2),
                        if r.reliable { "ok" } else { "roundoff" }.to_string(),
                        String::new(),
                    ]);
                }
            }
            Err(e) => {
                let mut row = vec![String::new(); 9];
                row[2] = refinement;
                row[7] = "error".into();
                row[8] = e.to_string();
                table.rows.push(row);
            }
        }
    }
    let mut metadata = base_metadata(cfg);
    metadata.push((
        "oracle".into(),
        format!("u = exp(k z + c (k^2 - k) v), k = {}", fmt_e(cfg.rate)),
    ));
    metadata.push((
        "spatial".into(),
        format!(
            "dv tied to dz^2 with ratio {}",
            fmt_e(cfg.mesh_ratio.unwrap_or(0.5))
        ),
    ));
    metadata.push(("temporal".into(), format!("fixed N = {}", cfg.intervals)));
    metadata.push((
        "note".into(),
        "generated reference values; no published error tables exist".into(),
    ));
    let summary = format!("convergence: observed orders [{}]", orders.join(", "));
    Ok(RunOutput {
        tables: vec![table],
        metadata,
        summary,
    })
}

fn solve(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (canon, oracle) = manufactured(cfg)?;
    let dz = cfg.dz_list.as_ref().map_or(1.0 / 64.0, |l| l[0]);
    let dv = cfg.dv_list.as_ref().map_or(1e-2, |l| l[0]);
    let n = intervals_for(canon.length(), dz)?;
    let m = steps_for(cfg.horizon, dv)?;
    let grid = crate::problem::build_grid(&canon, n, m)?;
    let result = integrate(&canon, &grid, SolveOptions::default())?;
    let v = grid.time(m);
    let mut table = Table::new(
        "solve",
        &["z", "v", "u", "exact", "error", "status", "error_message"],
    );
    for (q, u) in result.final_with_boundary().iter().enumerate() {
        let z = grid.node(q);
        let exact = oracle.eval(v, z);
        table.rows.push(vec![
            fmt_e(z),
            fmt_e(v),
            fmt_e(*u),
            fmt_e(exact),
            fmt_e(u - exact),
            "ok".into(),
            String::new(),
        ]);
    }
    let (emax, el2) = result.errors(|v, z| oracle.eval(v, z));
    let mut metadata = base_metadata(cfg);
    metadata.push(("grid".into(), format!("N = {n}, M = {m}")));
    metadata.push((
        "oracle".into(),
        format!("u = exp(k z + c (k^2 - k) v), k = {}", fmt_e(cfg.rate)),
    ));
    metadata.push(("error_max".into(), fmt_e(emax)));
    metadata.push(("error_l2".into(), fmt_e(el2)));
    let summary = format!(
        "solve: N = {n}, M = {m}, max error {}, l2 error {}",
        fmt_e(emax),
        fmt_e(el2)
    );
    Ok(RunOutput {
        tables: vec![table],
        metadata,
        summary,
    })
}

fn prop1(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let c = cfg.c_value();
    let b = cfg.mesh_ratio.unwrap_or(1.0);
    let dzs = cfg
        .dz_list
        .clone()
        .unwrap_or_else(|| (1..=12).map(|k| 0.5f64.powi(k)).collect());
    let pairs: Vec<(f64, f64)> = dzs.iter().map(|&dz| (dz, b * dz * dz)).collect();
    let cells = sweep(cfg.workers, &pairs, |&(dz, dv)| {
        let cell = || -> Result<Cell> {
            let (m1, m2) = prop1_margins(&coefficients(c, dz, dv)?)?;
            let values = vec![fmt_e(m1), fmt_e(m2)];
            Ok(if m1 > 0.0 && m2 > 0.0 {
                Cell::ok(values)
            } else {
                Cell::with_status(values, "non-positive")
            })
        };
        cell().unwrap_or_else(|e| Cell::failed(2, &e))
    })?;
    let mut table = Table::new(
        "prop1-margins",
        &["dz", "dv", "margin1", "margin2", "status", "error"],
    );
    assemble(&mut table, coord_rows(&pairs), cells);
    let mut metadata = base_metadata(cfg);
    metadata.push(("mesh ratio b = dv/dz^2".into(), fmt_e(b)));
    metadata.push((
        "value".into(),
        "closed-form Gerschgorin margins (a1 - r1, a2 - r2) of W for N = 3".into(),
    ));
    let summary = format!(
        "prop1-margins: {} rows, {} not ok",
        table.rows.len(),
        table.failed_rows()
    );
    Ok(RunOutput {
        tables: vec![table],
        metadata,
        summary,
    })
}
