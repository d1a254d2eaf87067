//! Maximisation of `J_N` over relaxed densities `a ∈ [0, 1]` with `∫ a = L|Ω|`, and
//! a swap search over indicator sets of fixed measure.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::observability::mass_of_samples;
use crate::quadrature::{pairwise_sum, Mesh, SubsetKind, SubsetSpec};
use crate::sampling::ModeFamily;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentOptions {
    pub max_iterations: usize,
    /// Stop once the Polyak target gap falls below this.
    pub stall_tolerance: f64,
    /// Iterations without improvement before the target gap is halved.
    pub patience: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            stall_tolerance: 1e-8,
            patience: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RelaxedSolution {
    /// `a` at each mesh node.
    pub density: Vec<f64>,
    pub value: f64,
    /// Objective at every iterate.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

impl RelaxedSolution {
    pub fn subset(&self, mesh: &Mesh) -> Result<SubsetSpec> {
        SubsetSpec::density(self.density.clone(), mesh)
    }
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("measure fraction L must lie in (0, 1), got {fraction}")));
    }
    Ok(())
}

fn check_count(family: &ModeFamily, count: usize) -> Result<()> {
    if count == 0 || count > family.len() {
        return Err(Error::Config(format!("N = {count} must lie in 1..={}", family.len())));
    }
    Ok(())
}

/// `min_{j<N} Σ_i w_i a_i φ_j(x_i)²` and the lowest minimising `j`.
fn objective(squares: &[Vec<f64>], weighted_density: &[f64]) -> (f64, usize) {
    squares
        .par_iter()
        .enumerate()
        .map(|(j, sq)| {
            let terms: Vec<f64> = sq.iter().zip(weighted_density).map(|(s, wa)| s * wa).collect();
            (pairwise_sum(&terms), j)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one mode")
}

/// Shift `y` by a constant and clip to `[0, 1]` so that `Σ w_i a_i = mass`.
/// The shift is found by bisection to a mass residual below 1e-10 (relative).
pub fn project_box_mass(y: &[f64], weights: &[f64], mass: f64) -> Vec<f64> {
    let total = |tau: f64| -> f64 {
        pairwise_sum(
            &y.iter()
                .zip(weights)
                .map(|(v, w)| w * (v + tau).clamp(0.0, 1.0))
                .collect::<Vec<_>>(),
        )
    };
    let lo0 = y.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let hi0 = y.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    // Shift -hi0 puts every value at or below 0; 1 - lo0 puts every value at or above 1.
    let (mut lo, mut hi) = (-hi0, 1.0 - lo0);
    let scale = mass.abs().max(1e-300);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let t = total(mid);
        if (t - mass).abs() <= 1e-10 * scale {
            lo = mid;
            hi = mid;
            break;
        }
        if t < mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    y.iter().map(|v| (v + tau).clamp(0.0, 1.0)).collect()
}

/// Projected supergradient ascent with a Polyak step toward a target level above the
/// best value found; the level gap is halved when progress stalls.
///
/// Starts from the constant density `a ≡ L`.
pub fn maximize_relaxed(family: &ModeFamily, count: usize, fraction: f64, opts: &AscentOptions) -> Result<RelaxedSolution> {
    check_fraction(fraction)?;
    check_count(family, count)?;
    let weights = &family.weights;
    let mass = fraction * family.mesh.domain().measure();
    let squares: Vec<Vec<f64>> = family.samples[..count]
        .iter()
        .map(|s| s.iter().map(|v| v * v).collect())
        .collect();

    let mut density = project_box_mass(&vec![fraction; weights.len()], weights, mass);
    let eval = |a: &[f64]| {
        let wa: Vec<f64> = a.iter().zip(weights).map(|(a, w)| a * w).collect();
        objective(&squares, &wa)
    };
    let (mut value, mut argmin) = eval(&density);
    let mut best = (value, density.clone());
    let mut trace = vec![value];
    let mut gap = 0.1 * value.abs().max(1e-3);
    let mut since_improvement = 0;
    let mut iterations = 0;

    while iterations < opts.max_iterations && gap >= opts.stall_tolerance {
        iterations += 1;
        // Supergradient of the active mode: w_i φ_j*(x_i)².
        let grad: Vec<f64> = squares[argmin].iter().zip(weights).map(|(s, w)| s * w).collect();
        let norm2: f64 = grad.iter().map(|g| g * g).sum();
        if norm2 == 0.0 {
            break;
        }
        let step = (best.0 + gap - value) / norm2;
        let y: Vec<f64> = density.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
        density = project_box_mass(&y, weights, mass);
        (value, argmin) = eval(&density);
        trace.push(value);
        if value > best.0 {
            best = (value, density.clone());
            since_improvement = 0;
        } else {
            since_improvement += 1;
            if since_improvement >= opts.patience {
                gap *= 0.5;
                since_improvement = 0;
            }
        }
    }
    Ok(RelaxedSolution {
        density: best.1,
        value: best.0,
        trace,
        iterations,
    })
}

/// `J_N` of the family weighted by a fixed density, without optimisation.
pub fn evaluate_density(family: &ModeFamily, count: usize, density: &[f64]) -> Result<f64> {
    check_count(family, count)?;
    if density.len() != family.weights.len() {
        return Err(Error::Config("density does not match the family mesh".into()));
    }
    let wa: Vec<f64> = density.iter().zip(&family.weights).map(|(a, w)| a * w).collect();
    Ok(family.samples[..count]
        .iter()
        .map(|s| mass_of_samples(s, &wa))
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Serialize)]
pub struct IndicatorSolution {
    /// Selected cell indices, ascending.
    pub cells: Vec<usize>,
    pub value: f64,
    pub swaps: usize,
}

impl IndicatorSolution {
    /// The selected cells as a node mask usable as a density subset.
    pub fn subset(&self, mesh: &Mesh) -> Result<SubsetSpec> {
        let mut mask = vec![0.0; mesh.len()];
        for &c in &self.cells {
            mask[c] = 1.0;
        }
        SubsetSpec::density(mask, mesh)
    }
}

/// Steepest-ascent swap search over indicator sets of `round(L · n_cells)` cells of
/// a 1D left-point mesh. Runs from an evenly spread selection and from a seeded
/// random one and keeps the better fixed point. Each step applies the swap
/// (one selected cell out, one unselected in) that most increases `min_j`, ties to
/// the lowest cell indices, until no swap improves.
pub fn search_indicator(family: &ModeFamily, count: usize, fraction: f64, seed: u64) -> Result<IndicatorSolution> {
    check_fraction(fraction)?;
    check_count(family, count)?;
    let Mesh::Interval(grid) = family.mesh else {
        return Err(Error::Config("indicator search runs on 1D meshes only".into()));
    };
    let cells = family.weights.len();
    let k = (fraction * grid.n_cells as f64).round() as usize;
    if k == 0 || k >= cells {
        return Err(Error::Config(format!("L = {fraction} selects {k} of {cells} cells")));
    }
    // gain[i][j] = w_i φ_j(x_i)²
    let gain: Vec<Vec<f64>> = (0..cells)
        .map(|i| (0..count).map(|j| family.weights[i] * family.samples[j][i].powi(2)).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..cells).collect();
    order.shuffle(&mut rng);
    let mut random = vec![false; cells];
    for &c in &order[..k] {
        random[c] = true;
    }
    // Cell i is taken when ⌊(i + 1) k / n⌋ steps up: k cells spread evenly.
    let spread: Vec<bool> = (0..cells).map(|i| (i + 1) * k / cells > i * k / cells).collect();

    let mut best: Option<IndicatorSolution> = None;
    for start in [spread, random] {
        let candidate = swap_ascent(&gain, count, start);
        if best.as_ref().is_none_or(|b| candidate.value > b.value) {
            best = Some(candidate);
        }
    }
    Ok(best.expect("two starts"))
}

fn swap_ascent(gain: &[Vec<f64>], count: usize, mut selected: Vec<bool>) -> IndicatorSolution {
    let cells = selected.len();
    let masses_of = |sel: &[bool]| -> Vec<f64> {
        (0..count)
            .map(|j| pairwise_sum(&(0..cells).filter(|&i| sel[i]).map(|i| gain[i][j]).collect::<Vec<_>>()))
            .collect()
    };
    let mut masses = masses_of(&selected);
    let min_of = |m: &[f64]| m.iter().copied().fold(f64::INFINITY, f64::min);
    let mut swaps = 0;

    loop {
        let current = min_of(&masses);
        let active = masses
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .expect("count >= 1");
        // The active mode's new mass bounds the new minimum from above; visit pairs in
        // decreasing bound order and stop once no remaining pair can beat the best.
        let mut outs: Vec<usize> = (0..cells).filter(|&i| selected[i]).collect();
        let mut ins: Vec<usize> = (0..cells).filter(|&i| !selected[i]).collect();
        outs.sort_by(|&a, &b| gain[a][active].total_cmp(&gain[b][active]).then(a.cmp(&b)));
        ins.sort_by(|&a, &b| gain[b][active].total_cmp(&gain[a][active]).then(a.cmp(&b)));
        let mut best: Option<(f64, usize, usize)> = None;
        for &u in &ins {
            let top = masses[active] - gain[outs[0]][active] + gain[u][active];
            if top <= best.map_or(current, |b| b.0) {
                break;
            }
            for &s in &outs {
                let bound = masses[active] - gain[s][active] + gain[u][active];
                if bound <= best.map_or(current, |b| b.0) {
                    break;
                }
                let value = (0..count)
                    .map(|j| masses[j] - gain[s][j] + gain[u][j])
                    .fold(f64::INFINITY, f64::min);
                let better = match best {
                    None => value > current,
                    Some((bv, bs, bu)) => value > bv || (value == bv && (s, u) < (bs, bu)),
                };
                if better {
                    best = Some((value, s, u));
                }
            }
        }
        match best {
            Some((_, s, u)) if swaps < 100 * cells => {
                selected[s] = false;
                selected[u] = true;
                for j in 0..count {
                    masses[j] += gain[u][j] - gain[s][j];
                }
                swaps += 1;
            }
            _ => break,
        }
    }
    // Recompute from scratch so the reported value carries no drift from updates.
    let masses = masses_of(&selected);
    IndicatorSolution {
        cells: (0..cells).filter(|&i| selected[i]).collect(),
        value: min_of(&masses),
        swaps,
    }
}

/// Whether a subset is a density (used by callers that accept either form).
pub fn is_density(subset: &SubsetSpec) -> bool {
    matches!(subset.kind, SubsetKind::Density { .. })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_hits_mass_and_box() {
        let y = vec![-0.3, 0.2, 0.9, 1.7, 0.5];
        let w = vec![0.2; 5];
        let a = project_box_mass(&y, &w, 0.5);
        let m: f64 = a.iter().zip(&w).map(|(a, w)| a * w).sum();
        assert!((m - 0.5).abs() < 1e-10);
        assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
        // Feasible input is a fixed point.
        let b = project_box_mass(&[0.5; 5], &w, 0.5);
        assert!(b.iter().all(|v| (v - 0.5).abs() < 1e-9));
    }

    #[test]
    fn fraction_bounds() {
        assert!(check_fraction(0.0).is_err());
        assert!(check_fraction(1.0).is_err());
        assert!(check_fraction(0.3).is_ok());
    }
}
