//! Experiment configuration and runners behind the `obscon` command line.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{enumerate_basis, Domain, SpectralBasis};
use crate::error::{Error, Result};
use crate::observability::{
    asymptotic_constant, describe_mesh, describe_subset, finite_time_constant, j_functional, ConfigEcho,
};
use crate::optimizer::{maximize_relaxed, search_indicator, AscentOptions};
use crate::perturbation::{Coupling, Potential, DISK_TRUNCATION, INTERVAL_TRUNCATION};
use crate::quadrature::{Grid1D, GridDisk, Mesh, SubsetSpec};
use crate::sampling::ModeFamily;

pub const TABLE_EPS: [f64; 5] = [0.01, 0.05, 0.1, 0.5, 1.0];
pub const TABLE_DELTA: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.475];
pub const INTERVAL_CELLS: usize = 1000;
pub const DISK_INCREMENTS: usize = 301;

/// The potential shapes of the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PotentialFamily {
    /// `x² χ_[0.5-δ, 0.5+δ]` on the interval.
    #[serde(rename = "interval-x2")]
    IntervalQuadratic,
    /// `r⁻² χ_{r<=δ}` on the disk.
    #[serde(rename = "disk-inverse-square")]
    DiskInverseSquare,
    /// `r χ_{r<=δ}` on the disk.
    #[serde(rename = "disk-r")]
    DiskRadius,
}

impl PotentialFamily {
    pub fn domain(self) -> Domain {
        match self {
            PotentialFamily::IntervalQuadratic => Domain::UnitInterval,
            _ => Domain::UnitDisk,
        }
    }

    pub fn build(self, epsilon: f64, delta: f64) -> Result<Potential> {
        match self {
            PotentialFamily::IntervalQuadratic => Potential::interval_well(epsilon, delta),
            PotentialFamily::DiskInverseSquare => Potential::disk_inverse_square(epsilon, delta),
            PotentialFamily::DiskRadius => Potential::disk_radius(epsilon, delta),
        }
    }

    fn default_for(domain: Domain) -> Self {
        match domain {
            Domain::UnitInterval => PotentialFamily::IntervalQuadratic,
            Domain::UnitDisk => PotentialFamily::DiskInverseSquare,
        }
    }
}

impl fmt::Display for PotentialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PotentialFamily::IntervalQuadratic => "interval-x2",
            PotentialFamily::DiskInverseSquare => "disk-inverse-square",
            PotentialFamily::DiskRadius => "disk-r",
        })
    }
}

impl FromStr for PotentialFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval-x2" | "x2" => Ok(PotentialFamily::IntervalQuadratic),
            "disk-inverse-square" | "inverse-square" | "1/r2" => Ok(PotentialFamily::DiskInverseSquare),
            "disk-r" | "r" => Ok(PotentialFamily::DiskRadius),
            _ => Err(Error::Config(format!(
                "field `potential`: unknown family `{s}` (interval-x2, disk-inverse-square, disk-r)"
            ))),
        }
    }
}

pub fn parse_domain(s: &str) -> Result<Domain> {
    match s {
        "interval" | "unit-interval" => Ok(Domain::UnitInterval),
        "disk" | "unit-disk" => Ok(Domain::UnitDisk),
        _ => Err(Error::Config(format!("field `domain`: unknown domain `{s}` (interval, disk)"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("field `format`: expected csv or json, got `{s}`"))),
        }
    }
}

/// Number formatting for CSV cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Fixed decimals.
    Decimals(usize),
    /// Shortest representation that parses back to the same value.
    Full,
}

impl Default for Precision {
    fn default() -> Self {
        Precision::Decimals(9)
    }
}

impl Precision {
    pub fn format(self, v: f64) -> String {
        match self {
            Precision::Decimals(d) => format!("{v:.d$}"),
            Precision::Full => format!("{v:?}"),
        }
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "full" {
            return Ok(Precision::Full);
        }
        s.parse::<usize>()
            .ok()
            .filter(|d| *d <= 17)
            .map(Precision::Decimals)
            .ok_or_else(|| Error::Config(format!("field `precision`: expected 0..=17 or `full`, got `{s}`")))
    }
}

/// Experiment settings as read from a config file. Every field is optional; the
/// runners fill in defaults that depend on the domain.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: Option<String>,
    pub potential: Option<String>,
    pub eps: Option<Vec<f64>>,
    pub delta: Option<Vec<f64>>,
    pub subset: Option<String>,
    #[serde(rename = "N")]
    pub modes: Option<usize>,
    #[serde(rename = "M")]
    pub truncation: Option<usize>,
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    #[serde(rename = "L")]
    pub fraction: Option<f64>,
    pub mesh: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Option<String>,
    pub precision: Option<String>,
    /// Include wall-clock time in JSON reports.
    pub timing: Option<bool>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(self, other: ExperimentConfig) -> Self {
        Self {
            domain: other.domain.or(self.domain),
            potential: other.potential.or(self.potential),
            eps: other.eps.or(self.eps),
            delta: other.delta.or(self.delta),
            subset: other.subset.or(self.subset),
            modes: other.modes.or(self.modes),
            truncation: other.truncation.or(self.truncation),
            horizon: other.horizon.or(self.horizon),
            fraction: other.fraction.or(self.fraction),
            mesh: other.mesh.or(self.mesh),
            out: other.out.or(self.out),
            seed: other.seed.or(self.seed),
            format: other.format.or(self.format),
            precision: other.precision.or(self.precision),
            timing: other.timing.or(self.timing),
        }
    }

    pub fn format(&self) -> Result<Format> {
        self.format.as_deref().map_or(Ok(Format::Csv), str::parse)
    }

    pub fn precision(&self) -> Result<Precision> {
        self.precision.as_deref().map_or(Ok(Precision::default()), str::parse)
    }

    /// Domain from `domain`, else from `potential`, else `fallback`.
    fn domain_or(&self, fallback: Domain) -> Result<Domain> {
        let from_potential = self
            .potential
            .as_deref()
            .map(str::parse::<PotentialFamily>)
            .transpose()?
            .map(PotentialFamily::domain);
        match (self.domain.as_deref().map(parse_domain).transpose()?, from_potential) {
            (Some(d), Some(p)) if d != p => Err(Error::Config(format!(
                "field `potential`: family lives on the {p}, but `domain` is the {d}"
            ))),
            (Some(d), _) | (None, Some(d)) => Ok(d),
            (None, None) => Ok(fallback),
        }
    }
}

fn check_list(name: &str, values: &[f64], valid: impl Fn(f64) -> bool, range: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Config(format!("field `{name}`: list must not be empty")));
    }
    if let Some(v) = values.iter().find(|v| !valid(**v)) {
        return Err(Error::Config(format!("field `{name}`: value {v} outside {range}")));
    }
    Ok(())
}

fn delta_range(domain: Domain) -> (fn(f64) -> bool, &'static str) {
    match domain {
        Domain::UnitInterval => (|d| d > 0.0 && d <= 0.5, "(0, 0.5]"),
        Domain::UnitDisk => (|d| d > 0.0 && d < 1.0, "(0, 1)"),
    }
}

/// Fully resolved single-configuration settings.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub domain: Domain,
    pub family: PotentialFamily,
    pub epsilon: f64,
    pub delta: f64,
    pub subset: SubsetSpec,
    pub modes: usize,
    pub truncation: usize,
    pub mesh: Mesh,
    pub horizon: f64,
    pub fraction: f64,
    pub seed: u64,
    pub timing: bool,
}

impl RunSettings {
    pub fn resolve(config: &ExperimentConfig) -> Result<Self> {
        let domain = config.domain_or(Domain::UnitInterval)?;
        let family = config
            .potential
            .as_deref()
            .map_or(Ok(PotentialFamily::default_for(domain)), str::parse)?;
        let eps = config.eps.clone().unwrap_or_else(|| vec![0.0]);
        check_list("eps", &eps, |e| e.is_finite() && e >= 0.0, "[0, inf)")?;
        if eps.len() > 1 {
            return Err(Error::Config("field `eps`: single runs take one value".into()));
        }
        let delta = config.delta.clone().unwrap_or_else(|| vec![0.1]);
        let (valid, range) = delta_range(domain);
        check_list("delta", &delta, valid, range)?;
        if delta.len() > 1 {
            return Err(Error::Config("field `delta`: single runs take one value".into()));
        }
        let mesh = mesh_for(domain, config.mesh)?;
        let default_modes = match domain {
            Domain::UnitInterval => INTERVAL_TRUNCATION,
            Domain::UnitDisk => DISK_TRUNCATION,
        };
        let modes = config.modes.unwrap_or(default_modes);
        if modes == 0 {
            return Err(Error::Config("field `N`: must be at least 1".into()));
        }
        let truncation = config.truncation.unwrap_or(default_modes.max(modes));
        if truncation < modes {
            return Err(Error::Config(format!("field `M`: truncation {truncation} is below N = {modes}")));
        }
        let horizon = config.horizon.unwrap_or(1.0);
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Config(format!("field `T`: must be positive, got {horizon}")));
        }
        let fraction = config.fraction.unwrap_or(0.5);
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::Config(format!("field `L`: must lie in (0, 1), got {fraction}")));
        }
        let subset = match config.subset.as_deref() {
            Some(s) => parse_subset(s, &mesh)?,
            None => default_subset(domain),
        };
        Ok(Self {
            domain,
            family,
            epsilon: eps[0],
            delta: delta[0],
            subset,
            modes,
            truncation,
            mesh,
            horizon,
            fraction,
            seed: config.seed.unwrap_or(0),
            timing: config.timing.unwrap_or(true),
        })
    }

    pub fn potential(&self) -> Result<Potential> {
        self.family.build(self.epsilon, self.delta)
    }

    /// The mode family of the configured operator (unperturbed when `ε = 0`).
    pub fn family(&self) -> Result<ModeFamily> {
        let basis = enumerate_basis(self.domain, self.truncation)?;
        if self.epsilon == 0.0 {
            return ModeFamily::unperturbed(&basis, self.modes, &self.mesh);
        }
        let coupling = coupling_for(&basis, &self.potential()?, self.truncation, &self.mesh)?;
        ModeFamily::perturbed(&coupling, self.epsilon, self.modes, &self.mesh)
    }

    pub fn echo(&self) -> Result<ConfigEcho> {
        Ok(ConfigEcho {
            domain: self.domain.to_string(),
            potential: self.potential()?.describe(),
            subset: describe_subset(&self.subset),
            modes: self.modes,
            quadrature: describe_mesh(&self.mesh),
        })
    }
}

fn coupling_for(basis: &SpectralBasis, potential: &Potential, truncation: usize, mesh: &Mesh) -> Result<Coupling> {
    Coupling::new(basis, potential, truncation, mesh, basis.domain == Domain::UnitDisk)
}

pub fn mesh_for(domain: Domain, size: Option<usize>) -> Result<Mesh> {
    match domain {
        Domain::UnitInterval => Ok(Mesh::Interval(Grid1D::unit_left_point(size.unwrap_or(INTERVAL_CELLS))?)),
        Domain::UnitDisk => {
            let n = size.unwrap_or(DISK_INCREMENTS);
            Ok(Mesh::Disk(GridDisk::new(n, n)?))
        }
    }
}

pub fn default_subset(domain: Domain) -> SubsetSpec {
    match domain {
        Domain::UnitInterval => SubsetSpec::interval_union(vec![(0.0, 0.5)]).expect("valid"),
        Domain::UnitDisk => SubsetSpec::four_sectors(),
    }
}

fn parse_pieces(body: &str, what: &str) -> Result<Vec<(f64, f64)>> {
    body.split(',')
        .map(|piece| {
            let bad = || Error::Config(format!("field `subset`: cannot read {what} `{piece}` (expected a:b)"));
            let (a, b) = piece.split_once(':').ok_or_else(bad)?;
            Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

/// Parses a subset description:
///
/// * `half` (interval `[0, 0.5]`), `four-sectors` (disk), `full`,
/// * `intervals:0:0.25,0.5:0.75`,
/// * `sectors:0:0.785,3.14:3.93` (radians),
/// * `density:0.4` (constant density).
pub fn parse_subset(s: &str, mesh: &Mesh) -> Result<SubsetSpec> {
    let domain = mesh.domain();
    let subset = match s {
        "half" => SubsetSpec::interval_union(vec![(0.0, 0.5)])?,
        "four-sectors" => SubsetSpec::four_sectors(),
        "full" => match domain {
            Domain::UnitInterval => SubsetSpec::interval_union(vec![(0.0, 1.0)])?,
            Domain::UnitDisk => SubsetSpec::radial_angular(vec![(0.0, 2.0 * PI)])?,
        },
        _ => match s.split_once(':') {
            Some(("intervals", body)) => SubsetSpec::interval_union(parse_pieces(body, "interval")?)?,
            Some(("sectors", body)) => SubsetSpec::radial_angular(parse_pieces(body, "sector")?)?,
            Some(("density", level)) => {
                let level: f64 = level
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("field `subset`: bad density level `{level}`")))?;
                SubsetSpec::constant_density(level, mesh)?
            }
            _ => return Err(Error::Config(format!("field `subset`: unrecognised subset `{s}`"))),
        },
    };
    if subset.dimension().is_some_and(|d| d != domain.dimension()) {
        return Err(Error::Config(format!("field `subset`: `{s}` does not live on the {domain}")));
    }
    Ok(subset)
}

/// A grid of `J_N` values: rows are `ε`, columns are `δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub title: String,
    pub eps: Vec<f64>,
    pub delta: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self, precision: Precision) -> String {
        let mut out = String::from("eps\\delta");
        for d in &self.delta {
            out.push(',');
            out.push_str(&format!("{d}"));
        }
        out.push('\n');
        for (e, row) in self.eps.iter().zip(&self.values) {
            out.push_str(&format!("{e}"));
            for v in row {
                out.push(',');
                out.push_str(&precision.format(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialise")
    }
}

/// Grid sweep settings shared by the table runners.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub eps: Vec<f64>,
    pub delta: Vec<f64>,
    pub modes: usize,
    pub truncation: usize,
    pub mesh: Mesh,
    pub subset: SubsetSpec,
}

impl SweepSettings {
    pub fn interval_defaults() -> Self {
        Self {
            eps: TABLE_EPS.to_vec(),
            delta: TABLE_DELTA.to_vec(),
            modes: INTERVAL_TRUNCATION,
            truncation: INTERVAL_TRUNCATION,
            mesh: mesh_for(Domain::UnitInterval, None).expect("valid"),
            subset: default_subset(Domain::UnitInterval),
        }
    }

    pub fn disk_defaults() -> Self {
        Self {
            eps: TABLE_EPS.to_vec(),
            delta: TABLE_DELTA.to_vec(),
            modes: DISK_TRUNCATION,
            truncation: DISK_TRUNCATION,
            mesh: mesh_for(Domain::UnitDisk, None).expect("valid"),
            subset: default_subset(Domain::UnitDisk),
        }
    }

    /// Applies config overrides on top of `self`, validated against `domain`.
    pub fn with_config(mut self, config: &ExperimentConfig, domain: Domain) -> Result<Self> {
        if config.domain_or(domain)? != domain {
            return Err(Error::Config(format!("field `domain`: this experiment runs on the {domain}")));
        }
        if let Some(eps) = &config.eps {
            check_list("eps", eps, |e| e.is_finite() && e >= 0.0, "[0, inf)")?;
            self.eps = eps.clone();
        }
        if let Some(delta) = &config.delta {
            let (valid, range) = delta_range(domain);
            check_list("delta", delta, valid, range)?;
            self.delta = delta.clone();
        }
        if config.mesh.is_some() {
            self.mesh = mesh_for(domain, config.mesh)?;
        }
        if let Some(n) = config.modes {
            if n == 0 {
                return Err(Error::Config("field `N`: must be at least 1".into()));
            }
            self.modes = n;
            self.truncation = self.truncation.max(n);
        }
        if let Some(m) = config.truncation {
            if m < self.modes {
                return Err(Error::Config(format!("field `M`: truncation {m} is below N = {}", self.modes)));
            }
            self.truncation = m;
        }
        if let Some(s) = &config.subset {
            self.subset = parse_subset(s, &self.mesh)?;
        }
        Ok(self)
    }
}

/// `J_N` over the `(ε, δ)` grid for one potential family. Cells are independent and
/// computed in parallel; results are gathered in grid order.
pub fn sweep(family: PotentialFamily, settings: &SweepSettings) -> Result<Table> {
    let domain = family.domain();
    if settings.mesh.domain() != domain {
        return Err(Error::Config(format!("mesh is not on the {domain}")));
    }
    let basis = enumerate_basis(domain, settings.truncation)?;
    let columns = settings
        .delta
        .par_iter()
        .map(|&delta| {
            let potential = family.build(1.0, delta)?;
            let coupling = coupling_for(&basis, &potential, settings.truncation, &settings.mesh)?;
            settings
                .eps
                .par_iter()
                .map(|&eps| {
                    let modes = ModeFamily::perturbed(&coupling, eps, settings.modes, &settings.mesh)?;
                    Ok(j_functional(&modes, &settings.subset, settings.modes)?.j_value)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let values = (0..settings.eps.len())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    let title = match family {
        PotentialFamily::IntervalQuadratic => "J_N on [0,1], V = eps x^2 on [0.5-delta, 0.5+delta]",
        PotentialFamily::DiskInverseSquare => "J_N on the unit disk, V = eps / r^2 on r <= delta",
        PotentialFamily::DiskRadius => "J_N on the unit disk, V = eps r on r <= delta",
    };
    Ok(Table {
        title: title.to_string(),
        eps: settings.eps.clone(),
        delta: settings.delta.clone(),
        values,
    })
}

/// The interval table with `N = M = 200` and the 1000-cell left-point rule.
pub fn run_table1(settings: &SweepSettings) -> Result<Table> {
    sweep(PotentialFamily::IntervalQuadratic, settings)
}

/// The two disk tables (`1/r²` then `r`) with mock-degenerate corrections.
pub fn run_disk_tables(settings: &SweepSettings) -> Result<(Table, Table)> {
    let a = sweep(PotentialFamily::DiskInverseSquare, settings)?;
    let b = sweep(PotentialFamily::DiskRadius, settings)?;
    Ok((a, b))
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalOutput {
    pub config: ConfigEcho,
    pub epsilon: f64,
    pub delta: f64,
    pub per_mode_mass: Vec<f64>,
    pub value: f64,
    pub argmin_position: usize,
    pub argmin: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

pub fn run_functional(settings: &RunSettings) -> Result<FunctionalOutput> {
    let start = Instant::now();
    let family = settings.family()?;
    let mut report = j_functional(&family, &settings.subset, settings.modes)?;
    report.config_echo = settings.echo()?;
    Ok(FunctionalOutput {
        config: report.config_echo,
        epsilon: settings.epsilon,
        delta: settings.delta,
        per_mode_mass: report.per_mode_mass,
        value: report.j_value,
        argmin_position: report.argmin_position,
        argmin: report.argmin_index.to_string(),
        wall_time_seconds: settings.timing.then(|| start.elapsed().as_secs_f64()),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantOutput {
    pub config: ConfigEcho,
    pub epsilon: f64,
    pub delta: f64,
    pub horizon: f64,
    pub finite_time_constant: f64,
    pub asymptotic_constant: f64,
    pub j_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

pub fn run_constant(settings: &RunSettings) -> Result<ConstantOutput> {
    let start = Instant::now();
    let family = settings.family()?;
    let n = settings.modes;
    Ok(ConstantOutput {
        config: settings.echo()?,
        epsilon: settings.epsilon,
        delta: settings.delta,
        horizon: settings.horizon,
        finite_time_constant: finite_time_constant(&family, &settings.subset, n, settings.horizon)?,
        asymptotic_constant: asymptotic_constant(&family, &settings.subset, n)?,
        j_value: j_functional(&family, &settings.subset, n)?.j_value,
        wall_time_seconds: settings.timing.then(|| start.elapsed().as_secs_f64()),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeOutput {
    pub config: ConfigEcho,
    pub epsilon: f64,
    pub delta: f64,
    pub fraction: f64,
    pub value: f64,
    pub iterations: usize,
    pub constant_density_value: f64,
    /// Swap-search value over indicator sets (interval only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indicator_value: Option<f64>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub density: Vec<f64>,
    pub trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

pub fn run_optimize(settings: &RunSettings) -> Result<OptimizeOutput> {
    let start = Instant::now();
    let family = settings.family()?;
    let n = settings.modes;
    let solution = maximize_relaxed(&family, n, settings.fraction, &AscentOptions::default())?;
    let flat = crate::optimizer::evaluate_density(&family, n, &vec![settings.fraction; family.weights.len()])?;
    let indicator_value = match settings.domain {
        Domain::UnitInterval => Some(search_indicator(&family, n, settings.fraction, settings.seed)?.value),
        Domain::UnitDisk => None,
    };
    let mut echo = settings.echo()?;
    echo.subset = format!("relaxed density with L = {}", settings.fraction);
    Ok(OptimizeOutput {
        config: echo,
        epsilon: settings.epsilon,
        delta: settings.delta,
        fraction: settings.fraction,
        value: solution.value,
        iterations: solution.iterations,
        constant_density_value: flat,
        indicator_value,
        nodes: node_coordinates(&settings.mesh),
        weights: family.weights.clone(),
        density: solution.density,
        trace: solution.trace,
        wall_time_seconds: settings.timing.then(|| start.elapsed().as_secs_f64()),
    })
}

/// The interval coordinate, or the radius on the disk, of every mesh node.
fn node_coordinates(mesh: &Mesh) -> Vec<f64> {
    mesh.points()
        .into_iter()
        .map(|p| match p {
            crate::basis::Point::Line(x) => x,
            crate::basis::Point::Polar { r, .. } => r,
        })
        .collect()
}

/// Two-column whitespace-separated data for gnuplot.
pub fn dat_columns(xs: impl IntoIterator<Item = f64>, ys: &[f64]) -> String {
    xs.into_iter()
        .zip(ys)
        .map(|(x, y)| format!("{x:?} {y:?}\n"))
        .collect()
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.display().to_string(),
            message: e.to_string(),
        })?;
    }
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// `dir/stem.suffix` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_merge_and_parse() {
        let file = ExperimentConfig::from_toml("eps = [0.1]\nN = 20\nsubset = \"half\"\n").unwrap();
        let flags = ExperimentConfig {
            modes: Some(10),
            ..Default::default()
        };
        let merged = file.merge(flags);
        assert_eq!(merged.modes, Some(10));
        assert_eq!(merged.eps, Some(vec![0.1]));
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn validation_names_fields() {
        let cfg = ExperimentConfig {
            delta: Some(vec![0.7]),
            ..Default::default()
        };
        let err = RunSettings::resolve(&cfg).unwrap_err();
        assert!(err.to_string().contains("`delta`"), "{err}");
        let cfg = ExperimentConfig {
            domain: Some("interval".into()),
            potential: Some("disk-r".into()),
            ..Default::default()
        };
        assert!(RunSettings::resolve(&cfg).unwrap_err().is_config());
    }

    #[test]
    fn subset_strings() {
        let mesh = mesh_for(Domain::UnitInterval, Some(100)).unwrap();
        let s = parse_subset("intervals:0.5:0.75,0:0.25", &mesh).unwrap();
        assert!((s.measure_fraction - 0.5).abs() < 1e-12);
        assert!(parse_subset("four-sectors", &mesh).is_err());
        assert!(parse_subset("intervals:0.2", &mesh).is_err());
        let d = parse_subset("density:0.3", &mesh).unwrap();
        assert!((d.measure_fraction - 0.3).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let t = Table {
            title: String::new(),
            eps: vec![0.01, 1.0],
            delta: vec![0.1, 0.475],
            values: vec![vec![0.5, 0.25], vec![0.125, 1.0 / 3.0]],
        };
        let csv = t.to_csv(Precision::default());
        assert_eq!(csv, "eps\\delta,0.1,0.475\n0.01,0.500000000,0.250000000\n1,0.125000000,0.333333333\n");
        let full = t.to_csv(Precision::Full);
        let last: f64 = full.lines().last().unwrap().split(',').last().unwrap().parse().unwrap();
        assert_eq!(last, 1.0 / 3.0);
    }
}
