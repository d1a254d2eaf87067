//! First- and second-order Rayleigh-Schrödinger corrections for `H = -Δ + εV₀`
//! in the unperturbed eigenbasis, with Kato-style a-priori error bounds.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{ModeIndex, Point, SpectralBasis};
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, Dense};
use crate::quadrature::{CompositeGauss, Mesh};
use crate::sampling::sample_pair;

/// Default truncation on the interval.
pub const INTERVAL_TRUNCATION: usize = 200;
/// Default truncation on the disk.
pub const DISK_TRUNCATION: usize = 25;

const MIN_NORM: f64 = 1e-8;
const GAUSS_ORDER: usize = 16;

/// The shape `V₀` before support restriction and scaling.
#[derive(Clone)]
pub enum BasePotential {
    /// `x²`
    Quadratic,
    /// `1 / r²`
    InverseSquareRadius,
    /// `r`
    Radius,
    Constant(f64),
    Custom {
        name: String,
        f: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    },
}

impl BasePotential {
    fn eval(&self, p: Point) -> f64 {
        let coord = match p {
            Point::Line(x) => x,
            Point::Polar { r, .. } => r,
        };
        match self {
            BasePotential::Quadratic => coord * coord,
            BasePotential::InverseSquareRadius => 1.0 / (coord * coord),
            BasePotential::Radius => coord,
            BasePotential::Constant(c) => *c,
            BasePotential::Custom { f, .. } => f(p),
        }
    }
}

impl fmt::Debug for BasePotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string())
    }
}

impl fmt::Display for BasePotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasePotential::Quadratic => f.write_str("x^2"),
            BasePotential::InverseSquareRadius => f.write_str("1/r^2"),
            BasePotential::Radius => f.write_str("r"),
            BasePotential::Constant(c) => write!(f, "{c}"),
            BasePotential::Custom { name, .. } => f.write_str(name),
        }
    }
}

/// Where `V₀` may be nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Support {
    Whole,
    /// Closed interval `[lo, hi]` of the unit interval.
    Interval { lo: f64, hi: f64 },
    /// Closed ball `r <= radius` of the unit disk.
    Ball { radius: f64 },
}

impl Support {
    fn contains(&self, p: Point) -> bool {
        match (self, p) {
            (Support::Whole, _) => true,
            (Support::Interval { lo, hi }, Point::Line(x)) => x >= *lo && x <= *hi,
            (Support::Ball { radius }, Point::Polar { r, .. }) => r <= *radius,
            _ => false,
        }
    }
}

/// `V(x) = ε V₀(x)` with `V₀` restricted to its support.
#[derive(Debug, Clone)]
pub struct Potential {
    pub epsilon: f64,
    pub base: BasePotential,
    pub support: Support,
}

impl Potential {
    pub fn new(epsilon: f64, base: BasePotential, support: Support) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        Ok(Self { epsilon, base, support })
    }

    /// `x² χ_[0.5-δ, 0.5+δ]` on the interval.
    pub fn interval_well(epsilon: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 0.5) {
            return Err(Error::Config(format!("interval delta must lie in (0, 0.5], got {delta}")));
        }
        Self::new(
            epsilon,
            BasePotential::Quadratic,
            Support::Interval {
                lo: 0.5 - delta,
                hi: 0.5 + delta,
            },
        )
    }

    /// `(1/r²) χ_{r <= δ}` on the disk.
    pub fn disk_inverse_square(epsilon: f64, delta: f64) -> Result<Self> {
        Self::disk(epsilon, delta, BasePotential::InverseSquareRadius)
    }

    /// `r χ_{r <= δ}` on the disk.
    pub fn disk_radius(epsilon: f64, delta: f64) -> Result<Self> {
        Self::disk(epsilon, delta, BasePotential::Radius)
    }

    fn disk(epsilon: f64, delta: f64, base: BasePotential) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("disk delta must lie in (0, 1), got {delta}")));
        }
        Self::new(epsilon, base, Support::Ball { radius: delta })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, self.base.clone(), self.support)
    }

    /// `V₀(p)`, zero outside the support.
    pub fn base_at(&self, p: Point) -> f64 {
        if self.support.contains(p) {
            self.base.eval(p)
        } else {
            0.0
        }
    }

    /// `V(p) = ε V₀(p)`.
    pub fn at(&self, p: Point) -> f64 {
        self.epsilon * self.base_at(p)
    }

    /// `max |V₀|` over the weighted nodes of the mesh.
    pub fn sup_norm(&self, mesh: &Mesh) -> f64 {
        mesh.sample(|p| self.base_at(p).abs()).into_iter().fold(0.0, f64::max)
    }

    pub fn describe(&self) -> String {
        match self.support {
            Support::Whole => format!("{} * {}", self.epsilon, self.base),
            Support::Interval { lo, hi } => format!("{} * {} on [{lo}, {hi}]", self.epsilon, self.base),
            Support::Ball { radius } => format!("{} * {} on r <= {radius}", self.epsilon, self.base),
        }
    }
}

/// Matrix elements `⟨φ_a V₀ φ_b⟩` and norms `∫ φ_a²` over the first `M` modes.
///
/// On the interval the elements come from composite Gauss-Legendre on the support
/// of `V₀` (the integrands are explicit); on the disk they use the tensor
/// trapezoid mesh, whose centre ring carries zero weight.
#[derive(Debug, Clone)]
pub struct Coupling {
    pub basis: SpectralBasis,
    pub elements: Dense,
    pub norms: Vec<f64>,
    pub sup_norm: f64,
    pub mock_degenerate: bool,
}

impl Coupling {
    pub fn new(
        basis: &SpectralBasis,
        potential: &Potential,
        truncation: usize,
        mesh: &Mesh,
        mock_degenerate: bool,
    ) -> Result<Self> {
        if truncation == 0 || truncation > basis.len() {
            return Err(Error::Config(format!(
                "truncation {truncation} must lie in 1..={}",
                basis.len()
            )));
        }
        if mesh.domain() != basis.domain {
            return Err(Error::Config("mesh and basis live on different domains".into()));
        }
        let mut basis = basis.clone();
        basis.pairs.truncate(truncation);
        basis.clusters = crate::basis::cluster_sorted(&basis.eigenvalues());
        let (elements, norms) = match mesh {
            Mesh::Interval(_) => gauss_elements(&basis, potential)?,
            Mesh::Disk(_) => mesh_elements(&basis, potential, mesh)?,
        };
        Ok(Self {
            basis,
            elements,
            norms,
            sup_norm: potential.sup_norm(mesh),
            mock_degenerate,
        })
    }

    pub fn truncation(&self) -> usize {
        self.basis.len()
    }

    fn check_mode(&self, n: usize) -> Result<()> {
        if n >= self.truncation() {
            return Err(Error::InvalidIndex(format!(
                "mode position {n} outside truncation {}",
                self.truncation()
            )));
        }
        Ok(())
    }

    /// Modes coupled to `n` by the first-order formulas.
    ///
    /// Without the mock-degenerate flag a nontrivial cluster around `n` is an error;
    /// with it, `n` couples to every mode of its own angular branch outside its cluster.
    pub fn partners(&self, n: usize) -> Result<Vec<usize>> {
        self.check_mode(n)?;
        let cluster = self.basis.cluster_of(n).unwrap_or(&[]).to_vec();
        if cluster.len() > 1 && !self.mock_degenerate {
            return Err(Error::DegenerateSpectrum { mode: n, cluster });
        }
        let branch = self.basis.pairs[n].index.branch();
        Ok((0..self.truncation())
            .filter(|m| !cluster.contains(m) && *m != n)
            .filter(|&m| !self.mock_degenerate || self.basis.pairs[m].index.branch() == branch)
            .collect())
    }

    /// `λ̂¹ = ∫ V₀ φ_n² / ∫ φ_n²`.
    pub fn lambda1(&self, n: usize) -> Result<f64> {
        self.check_mode(n)?;
        let norm = self.norms[n];
        if norm < MIN_NORM {
            return Err(Error::Numerical(format!("mode {n} has vanishing norm {norm:e}")));
        }
        Ok(self.elements.get(n, n) / norm)
    }

    /// `λ_n0 + ε λ̂¹`.
    pub fn first_order_eigenvalue(&self, n: usize, epsilon: f64) -> Result<f64> {
        let lambda1 = self.lambda1(n)?;
        Ok(self.basis.pairs[n].eigenvalue + epsilon * lambda1)
    }

    /// `λ̂² = Σ_{k≠n} ⟨V₀φ_n, φ_k⟩⟨V₀φ_k, φ_n⟩ / (λ_n0 - λ_k0)`, the ε² coefficient.
    pub fn second_order_eigenvalue(&self, n: usize) -> Result<f64> {
        let partners = self.partners(n)?;
        let ln = self.basis.pairs[n].eigenvalue;
        Ok(partners
            .iter()
            .map(|&k| self.elements.get(n, k) * self.elements.get(k, n) / (ln - self.basis.pairs[k].eigenvalue))
            .sum())
    }

    pub fn first_order_eigenvector(&self, n: usize, epsilon: f64) -> Result<PerturbedPair> {
        let partners = self.partners(n)?;
        let ln = self.basis.pairs[n].eigenvalue;
        let vector_coeffs = partners
            .iter()
            .map(|&m| (m, epsilon * self.elements.get(n, m) / (ln - self.basis.pairs[m].eigenvalue)))
            .collect();
        Ok(PerturbedPair {
            base_index: n,
            index: self.basis.pairs[n].index,
            epsilon,
            unperturbed_eigenvalue: ln,
            lambda1: self.lambda1(n)?,
            lambda2: self.second_order_eigenvalue(n)?,
            vector_coeffs,
            truncation: self.truncation(),
        })
    }

    /// `‖ε Σ_m c_m φ_m0‖_{L²}` for the first-order eigenvector correction.
    pub fn eigenfunction_closeness(&self, n: usize, epsilon: f64) -> Result<f64> {
        let pair = self.first_order_eigenvector(n, epsilon)?;
        Ok(pair
            .vector_coeffs
            .iter()
            .map(|&(m, c)| c * c * self.norms[m])
            .sum::<f64>()
            .sqrt())
    }

    /// Truncated norms `p = ‖V₀P‖`, `q = ‖V₀S‖`, `s = ‖S - αP‖` and the resulting
    /// bound on `|λ_n(ε) - λ_n0 - ελ̂¹|`.
    pub fn kato_diagnostics(&self, n: usize, epsilon: f64, alpha: f64) -> Result<KatoBound> {
        let partners = self.partners(n)?;
        let size = self.truncation();
        let ln = self.basis.pairs[n].eigenvalue;
        let norm_n = self.norms[n].sqrt();
        // V₀P has a single nonzero column, V₀φ_n / ‖φ_n‖.
        let p = (0..size).map(|i| self.elements.get(i, n).powi(2)).sum::<f64>().sqrt() / norm_n;
        let mut resolvent = vec![0.0; size];
        for &k in &partners {
            resolvent[k] = 1.0 / (self.basis.pairs[k].eigenvalue - ln);
        }
        let s = resolvent.iter().fold(alpha.abs(), |acc, r| acc.max(r.abs()));
        let mut vs = vec![0.0; size * size];
        for i in 0..size {
            for &k in &partners {
                vs[i * size + k] = self.elements.get(i, k) * resolvent[k];
            }
        }
        let q = spectral_norm(&vs, size, size, 1e-8);
        Ok(KatoBound::evaluate(p, q, s, epsilon))
    }
}

fn gauss_elements(basis: &SpectralBasis, potential: &Potential) -> Result<(Dense, Vec<f64>)> {
    let size = basis.len();
    let (lo, hi) = match potential.support {
        Support::Whole => (0.0, 1.0),
        Support::Interval { lo, hi } => (lo.max(0.0), hi.min(1.0)),
        Support::Ball { .. } => return Err(Error::Config("ball support on the interval".into())),
    };
    // Enough panels that each holds well under one oscillation of the top mode.
    let panels_for = |len: f64| ((size as f64 * len).ceil() as usize).max(4);
    let mut elements = Dense::zeros(size);
    if hi > lo {
        let rule = CompositeGauss::new(lo, hi, panels_for(hi - lo), GAUSS_ORDER);
        let weighted: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * potential.base_at(Point::Line(x)))
            .collect();
        let rows = sample_rows(basis, &rule.nodes);
        fill_symmetric(&mut elements, &rows, &weighted);
    }
    let full = CompositeGauss::new(0.0, 1.0, panels_for(1.0), GAUSS_ORDER);
    let rows = sample_rows(basis, &full.nodes);
    let norms = rows
        .iter()
        .map(|r| r.iter().zip(&full.weights).map(|(v, w)| w * v * v).sum())
        .collect();
    Ok((elements, norms))
}

fn sample_rows(basis: &SpectralBasis, nodes: &[f64]) -> Vec<Vec<f64>> {
    basis
        .pairs
        .par_iter()
        .map(|p| nodes.iter().map(|&x| p.evaluate(Point::Line(x))).collect())
        .collect()
}

fn fill_symmetric(out: &mut Dense, rows: &[Vec<f64>], weighted: &[f64]) {
    let size = rows.len();
    let upper: Vec<Vec<f64>> = (0..size)
        .into_par_iter()
        .map(|a| {
            let wa: Vec<f64> = rows[a].iter().zip(weighted).map(|(x, w)| x * w).collect();
            (a..size)
                .map(|b| wa.iter().zip(&rows[b]).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect();
    for (a, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            out.set(a, a + off, v);
            out.set(a + off, a, v);
        }
    }
}

fn mesh_elements(basis: &SpectralBasis, potential: &Potential, mesh: &Mesh) -> Result<(Dense, Vec<f64>)> {
    let rows: Vec<Vec<f64>> = basis.pairs.par_iter().map(|p| sample_pair(p, mesh)).collect();
    let weights = mesh.weights();
    let v = mesh.sample(|p| potential.base_at(p));
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::Numerical(format!("potential is not finite at node {i}")));
    }
    let weighted: Vec<f64> = weights.iter().zip(&v).map(|(w, v)| w * v).collect();
    let mut elements = Dense::zeros(basis.len());
    fill_symmetric(&mut elements, &rows, &weighted);
    let norms = rows
        .iter()
        .map(|r| r.iter().zip(&weights).map(|(x, w)| w * x * x).sum())
        .collect();
    Ok((elements, norms))
}

/// A mode of `H` to first order: eigenvalue coefficients and eigenvector correction.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbedPair {
    /// Position of the unperturbed mode in the basis.
    pub base_index: usize,
    pub index: ModeIndex,
    pub epsilon: f64,
    pub unperturbed_eigenvalue: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `(m, ε ⟨φ_n V₀ φ_m⟩ / (λ_n0 - λ_m0))`; never contains `base_index`.
    pub vector_coeffs: Vec<(usize, f64)>,
    pub truncation: usize,
}

impl PerturbedPair {
    pub fn eigenvalue(&self) -> f64 {
        self.unperturbed_eigenvalue + self.epsilon * self.lambda1
    }

    pub fn evaluate(&self, basis: &SpectralBasis, p: Point) -> f64 {
        basis.pairs[self.base_index].evaluate(p)
            + self
                .vector_coeffs
                .iter()
                .map(|&(m, c)| c * basis.pairs[m].evaluate(p))
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KatoDiagnostics {
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub psi: f64,
    pub second_order_bound: f64,
}

/// Either a usable bound, or the signal that `ε` is outside the bound's range
/// (`Ψ(ε)` imaginary or the denominator nonpositive). Not a failure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KatoBound {
    Applicable(KatoDiagnostics),
    Inapplicable { p: f64, q: f64, s: f64, discriminant: f64 },
}

impl KatoBound {
    pub fn evaluate(p: f64, q: f64, s: f64, epsilon: f64) -> Self {
        let lead = 1.0 - (p * s + q) * epsilon;
        let discriminant = lead * lead - 4.0 * p * s * epsilon * epsilon;
        if discriminant < 0.0 || lead <= 0.0 {
            return KatoBound::Inapplicable { p, q, s, discriminant };
        }
        let psi = discriminant.sqrt();
        let second_order_bound = 2.0 * p * q * epsilon * epsilon / (lead + psi);
        KatoBound::Applicable(KatoDiagnostics {
            p,
            q,
            s,
            psi,
            second_order_bound,
        })
    }

    pub fn bound(&self) -> Option<f64> {
        match self {
            KatoBound::Applicable(d) => Some(d.second_order_bound),
            KatoBound::Inapplicable { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{enumerate_basis, Domain};
    use crate::quadrature::{Grid1D, GridDisk};

    fn interval_setup(potential: &Potential, m: usize) -> Coupling {
        let basis = enumerate_basis(Domain::UnitInterval, m).unwrap();
        let mesh = Mesh::Interval(Grid1D::unit_left_point(1000).unwrap());
        Coupling::new(&basis, potential, m, &mesh, false).unwrap()
    }

    #[test]
    fn zero_epsilon_is_unperturbed() {
        let c = interval_setup(&Potential::interval_well(0.0, 0.1).unwrap(), 50);
        assert_eq!(c.first_order_eigenvalue(0, 0.0).unwrap(), c.basis.pairs[0].eigenvalue);
        let v = c.first_order_eigenvector(3, 0.0).unwrap();
        assert!(v.vector_coeffs.iter().all(|&(_, x)| x == 0.0));
        assert!(v.vector_coeffs.iter().all(|&(m, _)| m != 3));
        assert_eq!(c.eigenfunction_closeness(3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn constant_potential_shifts_spectrum() {
        let pot = Potential::new(1.0, BasePotential::Constant(2.5), Support::Whole).unwrap();
        let c = interval_setup(&pot, 40);
        let eps = 0.3;
        let got = c.first_order_eigenvalue(0, eps).unwrap();
        assert!((got - (c.basis.pairs[0].eigenvalue + eps * 2.5)).abs() < 1e-12);
        assert!(c.second_order_eigenvalue(0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn lambda1_matches_diagonal_element() {
        let c = interval_setup(&Potential::interval_well(1.0, 0.3).unwrap(), 60);
        for n in [0, 5, 59] {
            assert!((c.lambda1(n).unwrap() - c.elements.get(n, n)).abs() < 1e-10);
        }
    }

    #[test]
    fn kato_trivial_cases() {
        let c = interval_setup(&Potential::interval_well(1.0, 0.1).unwrap(), 40);
        assert_eq!(c.kato_diagnostics(0, 0.0, 0.0).unwrap().bound(), Some(0.0));
        let zero = Potential::new(1.0, BasePotential::Constant(0.0), Support::Whole).unwrap();
        let c = interval_setup(&zero, 40);
        match c.kato_diagnostics(0, 0.5, 0.0).unwrap() {
            KatoBound::Applicable(d) => {
                assert_eq!((d.p, d.q, d.psi, d.second_order_bound), (0.0, 0.0, 1.0, 0.0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kato_signals_large_epsilon() {
        let c = interval_setup(&Potential::interval_well(1.0, 0.4).unwrap(), 40);
        assert!(matches!(c.kato_diagnostics(0, 1e4, 0.0).unwrap(), KatoBound::Inapplicable { .. }));
    }

    #[test]
    fn disk_degeneracy_requires_mock_flag() {
        let basis = enumerate_basis(Domain::UnitDisk, 25).unwrap();
        let mesh = Mesh::Disk(GridDisk::new(60, 64).unwrap());
        let pot = Potential::disk_radius(1.0, 0.4).unwrap();
        let strict = Coupling::new(&basis, &pot, 25, &mesh, false).unwrap();
        assert!(strict.first_order_eigenvector(0, 0.1).is_ok());
        match strict.first_order_eigenvector(1, 0.1) {
            Err(Error::DegenerateSpectrum { mode: 1, cluster }) => assert_eq!(cluster, vec![1, 2]),
            other => panic!("{other:?}"),
        }
        let mock = Coupling::new(&basis, &pot, 25, &mesh, true).unwrap();
        let v = mock.first_order_eigenvector(1, 0.1).unwrap();
        assert!(v.vector_coeffs.iter().all(|&(m, _)| m != 2 && mock.basis.pairs[m].index.branch() == 1));
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(Potential::interval_well(-1.0, 0.1).is_err());
        assert!(Potential::interval_well(1.0, 0.6).is_err());
        assert!(Potential::disk_radius(1.0, 1.0).is_err());
        let basis = enumerate_basis(Domain::UnitInterval, 10).unwrap();
        let mesh = Mesh::Interval(Grid1D::unit_left_point(100).unwrap());
        let pot = Potential::interval_well(1.0, 0.1).unwrap();
        assert!(Coupling::new(&basis, &pot, 11, &mesh, false).is_err());
        let c = Coupling::new(&basis, &pot, 10, &mesh, false).unwrap();
        assert!(matches!(c.lambda1(10), Err(Error::InvalidIndex(_))));
    }
}
