//! Observability functionals of a mode family on an observation subset.
//!
//! * `J_N(ω) = min_{j<=N} ∫_ω φ_j²` (and its relaxed form with a density `a`),
//! * the truncated finite-time constant, the smallest eigenvalue of the normalised
//!   Gram block `α_jk ∫_ω φ_j φ_k`,
//! * the time-asymptotic constant, which groups modes sharing an eigenvalue.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{EigenPair, ModeIndex};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, jacobi_eigenvalues, Dense};
use crate::perturbation::Coupling;
use crate::quadrature::{pairwise_sum, Mesh, SubsetSpec};
use crate::sampling::{sample_pair, ModeFamily};

const JACOBI_TOL: f64 = 1e-10;

/// Configuration echoed into reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub domain: String,
    pub potential: String,
    pub subset: String,
    pub modes: usize,
    pub quadrature: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservabilityReport {
    pub per_mode_mass: Vec<f64>,
    pub j_value: f64,
    /// Position of the minimising mode (lowest position on ties).
    pub argmin_position: usize,
    pub argmin_index: ModeIndex,
    pub config_echo: ConfigEcho,
}

/// `Σ_i w_i s_i f_i²` with the subset's node factors `s_i`.
pub fn mass_of_samples(samples: &[f64], restricted_weights: &[f64]) -> f64 {
    let terms: Vec<f64> = samples
        .iter()
        .zip(restricted_weights)
        .map(|(f, w)| w * f * f)
        .collect();
    pairwise_sum(&terms)
}

/// `∫_ω φ²` (or `∫ a φ²`) for an unperturbed eigenpair on the given mesh.
pub fn mode_mass(pair: &EigenPair, subset: &SubsetSpec, mesh: &Mesh) -> Result<f64> {
    let weights = subset.restricted_weights(mesh)?;
    let samples = sample_pair(pair, mesh);
    checked_mass(&samples, &weights)
}

fn checked_mass(samples: &[f64], weights: &[f64]) -> Result<f64> {
    if let Some(i) = samples
        .iter()
        .zip(weights)
        .position(|(f, w)| *w != 0.0 && !f.is_finite())
    {
        return Err(Error::Numerical(format!("non-finite mode sample at node {i}")));
    }
    Ok(mass_of_samples(samples, weights))
}

/// Masses `∫_ω φ_j²` for the first `count` modes of the family.
pub fn family_masses(family: &ModeFamily, subset: &SubsetSpec, count: usize) -> Result<Vec<f64>> {
    check_count(family, count)?;
    let weights = subset.restricted_weights(&family.mesh)?;
    family.samples[..count]
        .par_iter()
        .map(|s| checked_mass(s, &weights))
        .collect()
}

fn check_count(family: &ModeFamily, count: usize) -> Result<()> {
    if family.is_empty() {
        return Err(Error::Config("mode family is empty".into()));
    }
    if count == 0 || count > family.len() {
        return Err(Error::Config(format!(
            "N = {count} must lie in 1..={}",
            family.len()
        )));
    }
    Ok(())
}

/// `J_N = min_{j<=N} ∫_ω φ_j²`.
pub fn j_functional(family: &ModeFamily, subset: &SubsetSpec, count: usize) -> Result<ObservabilityReport> {
    let masses = family_masses(family, subset, count)?;
    let (argmin, &value) = masses
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .expect("count >= 1");
    Ok(ObservabilityReport {
        j_value: value,
        argmin_position: argmin,
        argmin_index: family.labels[argmin],
        per_mode_mass: masses,
        config_echo: ConfigEcho {
            domain: family.mesh.domain().to_string(),
            potential: String::new(),
            subset: describe_subset(subset),
            modes: count,
            quadrature: describe_mesh(&family.mesh),
        },
    })
}

pub fn describe_subset(subset: &SubsetSpec) -> String {
    use crate::quadrature::SubsetKind;
    match &subset.kind {
        SubsetKind::IntervalUnion { intervals } => format!("interval union {intervals:?}"),
        SubsetKind::RadialAngular { sectors } => format!("angular sectors {sectors:?}"),
        SubsetKind::Density { .. } => format!("density with L = {}", subset.measure_fraction),
    }
}

pub fn describe_mesh(mesh: &Mesh) -> String {
    match mesh {
        Mesh::Interval(g) => format!("{:?} rule, {} cells on [{}, {}]", g.rule, g.n_cells, g.a, g.b),
        Mesh::Disk(g) => format!("polar trapezoid, {} x {} increments", g.n_r, g.n_theta),
    }
}

/// `α_jk = ∫_0^T e^{i(λ_j - λ_k)t} dt`; `T` when the eigenvalues coincide.
pub fn alpha(lambda_j: f64, lambda_k: f64, horizon: f64) -> Complex64 {
    let d = lambda_j - lambda_k;
    if d.abs() < 1e-12 {
        return Complex64::new(horizon, 0.0);
    }
    let phase = Complex64::new(0.0, d * horizon).exp();
    (phase - 1.0) / Complex64::new(0.0, d)
}

/// Gram block `M_jk = λ_j λ_k α_jk ∫_ω φ_j φ_k` of the time-`T` observability form.
#[derive(Debug, Clone)]
pub struct GramBlock {
    pub n: usize,
    pub entries: Vec<Complex64>,
    /// `λ_j²`, the energy weights of the initial data.
    pub weights: Vec<f64>,
}

impl GramBlock {
    pub fn assemble(family: &ModeFamily, subset: &SubsetSpec, count: usize, horizon: f64) -> Result<Self> {
        check_count(family, count)?;
        if !(horizon > 0.0) {
            return Err(Error::Config(format!("time horizon must be positive, got {horizon}")));
        }
        if let Some(l) = family.eigenvalues[..count].iter().find(|&&l| !(l > 0.0)) {
            return Err(Error::Config(format!("eigenvalue {l} is not positive")));
        }
        let cross = cross_masses(family, subset, count)?;
        let lam = &family.eigenvalues[..count];
        let mut entries = vec![Complex64::new(0.0, 0.0); count * count];
        for j in 0..count {
            for k in 0..count {
                entries[j * count + k] = lam[j] * lam[k] * alpha(lam[j], lam[k], horizon) * cross.get(j, k);
            }
        }
        Ok(Self {
            n: count,
            entries,
            weights: lam.iter().map(|l| l * l).collect(),
        })
    }

    /// `D^{-1/2} M D^{-1/2}` with `D = diag(λ_j²)`.
    pub fn normalised(&self) -> Vec<Complex64> {
        let n = self.n;
        let mut out = self.entries.clone();
        for j in 0..n {
            for k in 0..n {
                out[j * n + k] /= (self.weights[j] * self.weights[k]).sqrt();
            }
        }
        out
    }
}

/// `[∫_ω φ_j φ_k]` over the first `count` modes.
pub fn cross_masses(family: &ModeFamily, subset: &SubsetSpec, count: usize) -> Result<Dense> {
    let weights = subset.restricted_weights(&family.mesh)?;
    let rows: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|j| {
            let wj: Vec<f64> = family.samples[j].iter().zip(&weights).map(|(f, w)| f * w).collect();
            (0..count)
                .map(|k| pairwise_sum(&wj.iter().zip(&family.samples[k]).map(|(a, b)| a * b).collect::<Vec<_>>()))
                .collect()
        })
        .collect();
    let mut out = Dense::zeros(count);
    for j in 0..count {
        for k in 0..count {
            // Symmetrise so the two triangles agree bit for bit.
            out.set(j, k, 0.5 * (rows[j][k] + rows[k][j]));
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of the normalised Gram block: the infimum of the truncated
/// time-`T` observability quotient over data with `Σ λ_j² |c_j|² = 1`.
pub fn finite_time_constant(family: &ModeFamily, subset: &SubsetSpec, count: usize, horizon: f64) -> Result<f64> {
    let block = GramBlock::assemble(family, subset, count, horizon)?;
    let eig = hermitian_eigenvalues(&block.normalised(), count, JACOBI_TOL)?;
    Ok(eig[0])
}

/// Time-asymptotic constant over the first `count` modes: the minimum over
/// eigenvalue clusters of the smallest eigenvalue of `[∫_ω φ_a φ_b]_{a,b ∈ cluster}`.
/// For simple clusters this is the mode mass, so the result equals `J_N`.
pub fn asymptotic_constant(family: &ModeFamily, subset: &SubsetSpec, count: usize) -> Result<f64> {
    check_count(family, count)?;
    let clusters = family.clusters_within(count);
    if let Some(c) = clusters.iter().find(|c| c.len() > 2) {
        return Err(Error::UnsupportedDegeneracy(c.len()));
    }
    let cross = cross_masses(family, subset, count)?;
    let mut best = f64::INFINITY;
    for c in &clusters {
        let value = match c.as_slice() {
            [a] => cross.get(*a, *a),
            [a, b] => {
                let mut m = Dense::zeros(2);
                m.data = vec![cross.get(*a, *a), cross.get(*a, *b), cross.get(*b, *a), cross.get(*b, *b)];
                jacobi_eigenvalues(m, 1e-15)?[0]
            }
            _ => unreachable!("cluster sizes checked above"),
        };
        best = best.min(value);
    }
    Ok(best)
}

/// `|J_N(a)` of the perturbed family `- J_N(a)` of the unperturbed family`|` for a
/// density `a`.
pub fn relaxed_perturbation_gap(
    density: &SubsetSpec,
    coupling: &Coupling,
    epsilon: f64,
    count: usize,
    mesh: &Mesh,
) -> Result<f64> {
    if !matches!(density.kind, crate::quadrature::SubsetKind::Density { .. }) {
        return Err(Error::Config("the relaxed gap needs a density subset".into()));
    }
    let perturbed = ModeFamily::perturbed(coupling, epsilon, count, mesh)?;
    let plain = ModeFamily::unperturbed(&coupling.basis, count, mesh)?;
    let jp = j_functional(&perturbed, density, count)?.j_value;
    let j0 = j_functional(&plain, density, count)?.j_value;
    Ok((jp - j0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{disk_pair, enumerate_basis, interval_pair, Domain};
    use crate::quadrature::{Grid1D, GridDisk};
    use std::f64::consts::PI;

    fn interval_mesh() -> Mesh {
        Mesh::Interval(Grid1D::unit_left_point(1000).unwrap())
    }

    #[test]
    fn half_interval_mass() {
        let half = SubsetSpec::interval_union(vec![(0.0, 0.5)]).unwrap();
        for n in [1, 2, 7, 150] {
            let m = mode_mass(&interval_pair(n).unwrap(), &half, &interval_mesh()).unwrap();
            assert!((m - 0.5).abs() <= 1e-3 + 1e-12, "n = {n}: {m}");
        }
    }

    #[test]
    fn constant_density_mass() {
        let mesh = interval_mesh();
        let a = SubsetSpec::constant_density(0.3, &mesh).unwrap();
        for n in [1, 9, 200] {
            let m = mode_mass(&interval_pair(n).unwrap(), &a, &mesh).unwrap();
            assert!((m - 0.3).abs() < 1e-6);
        }
    }

    #[test]
    fn disk_sector_mass() {
        let mesh = Mesh::Disk(GridDisk::new(301, 301).unwrap());
        let m = mode_mass(&disk_pair(1, 1, 1).unwrap(), &SubsetSpec::four_sectors(), &mesh).unwrap();
        assert!((m - 0.5).abs() < 1e-4, "{m}");
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha(3.0, 3.0, 2.0), Complex64::new(2.0, 0.0));
        let t = 1.7;
        assert!(alpha(5.0 + 2.0 * PI / t, 5.0, t).norm() < 1e-12);
    }

    #[test]
    fn empty_or_oversized_requests_fail() {
        let basis = enumerate_basis(Domain::UnitInterval, 5).unwrap();
        let fam = ModeFamily::unperturbed(&basis, 5, &interval_mesh()).unwrap();
        let half = SubsetSpec::interval_union(vec![(0.0, 0.5)]).unwrap();
        assert!(j_functional(&fam, &half, 6).is_err());
        assert!(j_functional(&fam, &half, 0).is_err());
        assert!(finite_time_constant(&fam, &half, 3, 0.0).is_err());
    }

    #[test]
    fn one_mode_finite_time_constant() {
        let basis = enumerate_basis(Domain::UnitInterval, 3).unwrap();
        let fam = ModeFamily::unperturbed(&basis, 3, &interval_mesh()).unwrap();
        let half = SubsetSpec::interval_union(vec![(0.0, 0.5)]).unwrap();
        let t = 1.3;
        let c = finite_time_constant(&fam, &half, 1, t).unwrap();
        let m = j_functional(&fam, &half, 1).unwrap().j_value;
        assert!((c - t * m).abs() < 1e-12);
    }

    #[test]
    fn full_domain_finite_time_constant_is_horizon() {
        let basis = enumerate_basis(Domain::UnitInterval, 8).unwrap();
        let fam = ModeFamily::unperturbed(&basis, 8, &interval_mesh()).unwrap();
        let all = SubsetSpec::interval_union(vec![(0.0, 1.0)]).unwrap();
        let t = 2.5;
        let c = finite_time_constant(&fam, &all, 8, t).unwrap();
        assert!((c - t).abs() < 1e-6 * t, "{c}");
    }

    #[test]
    fn unsupported_cluster_size() {
        let mesh = interval_mesh();
        let basis = enumerate_basis(Domain::UnitInterval, 4).unwrap();
        let mut fam = ModeFamily::unperturbed(&basis, 4, &mesh).unwrap();
        fam.clusters = vec![vec![0, 1, 2], vec![3]];
        let half = SubsetSpec::interval_union(vec![(0.0, 0.5)]).unwrap();
        assert!(matches!(asymptotic_constant(&fam, &half, 4), Err(Error::UnsupportedDegeneracy(3))));
    }
}
