//! Mode families sampled on a quadrature mesh.

use rayon::prelude::*;

use crate::basis::{cluster_sorted, EigenPair, ModeIndex, Point, SpectralBasis, CLUSTER_RTOL};
use crate::error::{Error, Result};
use crate::perturbation::Coupling;
use crate::quadrature::Mesh;

/// Values of an eigenpair at every mesh node. On the disk the radial and angular
/// factors are evaluated once per ring and per ray.
pub fn sample_pair(pair: &EigenPair, mesh: &Mesh) -> Vec<f64> {
    match mesh {
        Mesh::Interval(g) => g.nodes().into_iter().map(|x| pair.evaluate(Point::Line(x))).collect(),
        Mesh::Disk(g) => {
            let angular: Vec<f64> = g.angles().into_iter().map(|t| pair.angular(t)).collect();
            g.radii()
                .into_iter()
                .flat_map(|r| {
                    let radial = pair.radial(r);
                    angular.iter().map(move |a| radial * a)
                })
                .collect()
        }
    }
}

/// An ordered family of modes (unperturbed or first-order perturbed) sampled on a mesh,
/// with clusters of equal eigenvalue.
#[derive(Debug, Clone)]
pub struct ModeFamily {
    pub mesh: Mesh,
    pub weights: Vec<f64>,
    pub labels: Vec<ModeIndex>,
    pub eigenvalues: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
    pub clusters: Vec<Vec<usize>>,
    pub perturbed: bool,
}

impl ModeFamily {
    /// The first `count` modes of `basis`.
    pub fn unperturbed(basis: &SpectralBasis, count: usize, mesh: &Mesh) -> Result<Self> {
        check_count(count, basis.len())?;
        check_domain(basis, mesh)?;
        let pairs = &basis.pairs[..count];
        let samples = pairs.par_iter().map(|p| sample_pair(p, mesh)).collect();
        let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.eigenvalue).collect();
        Ok(Self {
            mesh: *mesh,
            weights: mesh.weights(),
            labels: pairs.iter().map(|p| p.index).collect(),
            clusters: cluster_sorted(&eigenvalues),
            eigenvalues,
            samples,
            perturbed: false,
        })
    }

    /// The first `count` modes of `H = -Δ + εV₀` to first order: eigenvalues
    /// `λ_n0 + ελ̂¹` and eigenfunctions `φ_n0 + Σ_m c_m φ_m0`.
    pub fn perturbed(coupling: &Coupling, epsilon: f64, count: usize, mesh: &Mesh) -> Result<Self> {
        let basis = &coupling.basis;
        check_count(count, basis.len())?;
        check_domain(basis, mesh)?;
        let base: Vec<Vec<f64>> = basis.pairs.par_iter().map(|p| sample_pair(p, mesh)).collect();
        let modes = (0..count)
            .into_par_iter()
            .map(|n| {
                let pair = coupling.first_order_eigenvector(n, epsilon)?;
                let mut values = base[n].clone();
                for &(m, c) in &pair.vector_coeffs {
                    if c != 0.0 {
                        for (v, b) in values.iter_mut().zip(&base[m]) {
                            *v += c * b;
                        }
                    }
                }
                Ok((pair.eigenvalue(), values))
            })
            .collect::<Result<Vec<_>>>()?;
        let (eigenvalues, samples): (Vec<f64>, Vec<Vec<f64>>) = modes.into_iter().unzip();
        Ok(Self {
            mesh: *mesh,
            weights: mesh.weights(),
            labels: basis.pairs[..count].iter().map(|p| p.index).collect(),
            clusters: cluster_unsorted(&eigenvalues),
            eigenvalues,
            samples,
            perturbed: epsilon != 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Clusters that lie entirely within the first `count` modes, plus the
    /// in-range part of any cluster cut by the truncation.
    pub fn clusters_within(&self, count: usize) -> Vec<Vec<usize>> {
        self.clusters
            .iter()
            .map(|c| c.iter().copied().filter(|&i| i < count).collect::<Vec<_>>())
            .filter(|c| !c.is_empty())
            .collect()
    }
}

fn check_count(count: usize, available: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::Config("mode family must contain at least one mode".into()));
    }
    if count > available {
        return Err(Error::Config(format!(
            "requested {count} modes but only {available} are available"
        )));
    }
    Ok(())
}

fn check_domain(basis: &SpectralBasis, mesh: &Mesh) -> Result<()> {
    if basis.domain != mesh.domain() {
        return Err(Error::Config(format!(
            "basis on the {} cannot be sampled on a {} mesh",
            basis.domain,
            mesh.domain()
        )));
    }
    Ok(())
}

/// Equal-value groups of an arbitrary sequence, each group in increasing position.
fn cluster_unsorted(values: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut clusters: Vec<Vec<usize>> = cluster_sorted(&sorted)
        .into_iter()
        .map(|c| {
            let mut ids: Vec<usize> = c.into_iter().map(|k| order[k]).collect();
            ids.sort_unstable();
            ids
        })
        .collect();
    clusters.sort_by_key(|c| c[0]);
    debug_assert!(clusters.iter().all(|c| {
        let v = values[c[0]];
        c.iter().all(|&i| (values[i] - v).abs() <= 2.0 * CLUSTER_RTOL * v.abs().max(1.0))
    }));
    clusters
}
