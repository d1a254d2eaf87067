//! Analytic Dirichlet eigenbases of `-Δ` on the unit interval and the unit disk.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{self, BesselZeroTable};

/// Relative tolerance under which two eigenvalues are treated as one cluster.
pub const CLUSTER_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// `[0, 1]`
    UnitInterval,
    /// `{ r <= 1 }`, handled in polar coordinates.
    UnitDisk,
}

impl Domain {
    /// Lebesgue measure `|Ω|`.
    pub fn measure(self) -> f64 {
        match self {
            Domain::UnitInterval => 1.0,
            Domain::UnitDisk => PI,
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            Domain::UnitInterval => 1,
            Domain::UnitDisk => 2,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::UnitInterval => "interval",
            Domain::UnitDisk => "disk",
        })
    }
}

/// A point of the domain: `Line(x)` on the interval, polar `(r, θ)` on the disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Line(f64),
    Polar { r: f64, theta: f64 },
}

impl Point {
    /// Cartesian coordinates, for output only.
    pub fn cartesian(self) -> (f64, f64) {
        match self {
            Point::Line(x) => (x, 0.0),
            Point::Polar { r, theta } => (r * theta.cos(), r * theta.sin()),
        }
    }
}

/// Mode label: `n` on the interval, `(j, k, m)` on the disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeIndex {
    Interval { n: usize },
    Disk { j: usize, k: usize, m: usize },
}

impl ModeIndex {
    /// Angular branch used by the mock-degenerate perturbation: `m` on the disk,
    /// a single branch on the interval.
    pub fn branch(self) -> usize {
        match self {
            ModeIndex::Interval { .. } => 1,
            ModeIndex::Disk { m, .. } => m,
        }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeIndex::Interval { n } => write!(f, "{n}"),
            ModeIndex::Disk { j, k, m } => write!(f, "({j},{k},{m})"),
        }
    }
}

/// An unperturbed Dirichlet eigenpair with a closed-form eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub eigenvalue: f64,
    pub index: ModeIndex,
    pub is_unperturbed: bool,
    /// Bessel zero `z_jk` on the disk, `nπ` on the interval.
    wavenumber: f64,
    /// Radial normalisation `√2 / |J'_j(z_jk)|` on the disk, `√2` on the interval.
    scale: f64,
}

impl EigenPair {
    pub fn evaluate(&self, p: Point) -> f64 {
        match (self.index, p) {
            (ModeIndex::Interval { .. }, Point::Line(x)) => self.scale * (self.wavenumber * x).sin(),
            (ModeIndex::Disk { .. }, Point::Polar { r, theta }) => self.radial(r) * self.angular(theta),
            _ => f64::NAN,
        }
    }

    /// Radial factor `R_jk(r)`; zero for interval modes.
    pub fn radial(&self, r: f64) -> f64 {
        match self.index {
            ModeIndex::Disk { j, .. } => self.scale * special::eval(j, self.wavenumber * r),
            ModeIndex::Interval { .. } => 0.0,
        }
    }

    /// Angular factor: `1/√(2π)` for `j = 0`, `cos(jθ)/√π` or `sin(jθ)/√π` otherwise.
    pub fn angular(&self, theta: f64) -> f64 {
        match self.index {
            ModeIndex::Disk { j: 0, .. } => 1.0 / (2.0 * PI).sqrt(),
            ModeIndex::Disk { j, m: 1, .. } => (j as f64 * theta).cos() / PI.sqrt(),
            ModeIndex::Disk { j, .. } => (j as f64 * theta).sin() / PI.sqrt(),
            ModeIndex::Interval { .. } => 0.0,
        }
    }
}

/// `√2 sin(nπx)` with eigenvalue `n²π²`.
pub fn interval_pair(n: usize) -> Result<EigenPair> {
    if n == 0 {
        return Err(Error::InvalidIndex("interval modes start at n = 1".into()));
    }
    let wavenumber = n as f64 * PI;
    Ok(EigenPair {
        eigenvalue: wavenumber * wavenumber,
        index: ModeIndex::Interval { n },
        is_unperturbed: true,
        wavenumber,
        scale: SQRT_2,
    })
}

/// Disk mode `(j, k, m)` with eigenvalue `z_jk²`, using the process-wide zero cache.
pub fn disk_pair(j: usize, k: usize, m: usize) -> Result<EigenPair> {
    check_disk_index(j, k, m)?;
    let z = special::bessel_zero(j, k)?;
    Ok(make_disk_pair(j, k, m, z))
}

fn check_disk_index(j: usize, k: usize, m: usize) -> Result<()> {
    match (j, m) {
        (_, 0) | (_, 3..) => Err(Error::InvalidIndex(format!("angular label m must be 1 or 2, got {m}"))),
        (0, 2) => Err(Error::InvalidIndex("j = 0 has only the m = 1 mode".into())),
        _ if k == 0 => Err(Error::InvalidIndex("radial rank k starts at 1".into())),
        _ => Ok(()),
    }
}

fn make_disk_pair(j: usize, k: usize, m: usize, z: f64) -> EigenPair {
    let scale = SQRT_2 / special::eval_prime(j, z).abs();
    EigenPair {
        eigenvalue: z * z,
        index: ModeIndex::Disk { j, k, m },
        is_unperturbed: true,
        wavenumber: z,
        scale,
    }
}

/// Ordered eigenpairs with their equal-eigenvalue clusters.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub domain: Domain,
    pub pairs: Vec<EigenPair>,
    pub clusters: Vec<Vec<usize>>,
}

impl SpectralBasis {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.eigenvalue).collect()
    }

    /// Cluster containing position `i`.
    pub fn cluster_of(&self, i: usize) -> Option<&[usize]> {
        self.clusters.iter().find(|c| c.contains(&i)).map(Vec::as_slice)
    }
}

/// Partition consecutive positions of a nondecreasing sequence into groups of equal
/// value (relative tolerance [`CLUSTER_RTOL`]).
pub fn cluster_sorted(values: &[f64]) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if {
                let head = values[c[0]];
                (v - head).abs() <= CLUSTER_RTOL * head.abs().max(v.abs())
            } =>
            {
                c.push(i)
            }
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}

/// The first `count` eigenpairs of the domain in nondecreasing eigenvalue order,
/// repeated according to multiplicity. Disk ties are broken by `(j, k, m)`.
pub fn enumerate_basis(domain: Domain, count: usize) -> Result<SpectralBasis> {
    if count == 0 {
        return Err(Error::Config("basis size must be at least 1".into()));
    }
    let pairs = match domain {
        Domain::UnitInterval => (1..=count).map(interval_pair).collect::<Result<Vec<_>>>()?,
        Domain::UnitDisk => enumerate_disk(count)?,
    };
    let clusters = cluster_sorted(&pairs.iter().map(|p| p.eigenvalue).collect::<Vec<_>>());
    Ok(SpectralBasis {
        domain,
        pairs,
        clusters,
    })
}

fn enumerate_disk(count: usize) -> Result<Vec<EigenPair>> {
    let mut table = BesselZeroTable::new();
    // Every zero below z_{60,1} belongs to an order <= 60 and a rank <= 60, so the
    // candidate set is complete up to that bound.
    let ceiling = table.zero(special::MAX_ORDER, 1)?;
    let mut bound = 16.0_f64.min(ceiling);
    loop {
        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        for j in 0..=special::MAX_ORDER {
            let zs = table.zeros_below(j, bound)?;
            if zs.is_empty() {
                break;
            }
            candidates.extend(zs.into_iter().enumerate().map(|(k, z)| (z, j, k + 1)));
        }
        let modes: usize = candidates.iter().map(|&(_, j, _)| if j == 0 { 1 } else { 2 }).sum();
        if modes >= count {
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            let mut pairs = Vec::with_capacity(count);
            'outer: for (z, j, k) in candidates {
                let branches: &[usize] = if j == 0 { &[1] } else { &[1, 2] };
                for &m in branches {
                    if pairs.len() == count {
                        break 'outer;
                    }
                    pairs.push(make_disk_pair(j, k, m, z));
                }
            }
            return Ok(pairs);
        }
        if bound >= ceiling {
            return Err(Error::Capacity(format!(
                "only {modes} disk modes lie below z_(60,1) = {ceiling:.6}; requested {count}"
            )));
        }
        bound = (bound * 1.5).min(ceiling);
    }
}
