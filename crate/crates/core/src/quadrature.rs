//! Fixed-grid quadrature: left-point and trapezoid rules in 1D, a tensor trapezoid
//! rule in polar coordinates on the disk, composite Gauss-Legendre for smooth
//! integrands, and the observation subsets that restrict them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::basis::{Domain, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// `h Σ_{i<n} f(a + ih)`
    LeftPoint,
    Trapezoid,
}

/// Equally spaced 1D grid with `n_cells` increments on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub a: f64,
    pub b: f64,
    pub n_cells: usize,
    pub rule: Rule,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n_cells: usize, rule: Rule) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::Config("grid needs at least one cell".into()));
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Config(format!("invalid grid interval [{a}, {b}]")));
        }
        Ok(Self { a, b, n_cells, rule })
    }

    /// The unit-interval grid used for the interval experiments: left point, 1000 cells.
    pub fn unit_left_point(n_cells: usize) -> Result<Self> {
        Self::new(0.0, 1.0, n_cells, Rule::LeftPoint)
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / self.n_cells as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        let count = match self.rule {
            Rule::LeftPoint => self.n_cells,
            Rule::Trapezoid => self.n_cells + 1,
        };
        (0..count).map(|i| self.a + i as f64 * h).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        let h = self.step();
        match self.rule {
            Rule::LeftPoint => vec![h; self.n_cells],
            Rule::Trapezoid => {
                let mut w = vec![h; self.n_cells + 1];
                w[0] = 0.5 * h;
                w[self.n_cells] = 0.5 * h;
                w
            }
        }
    }
}

/// Tensor trapezoid grid on `[0, 1] × [0, 2π]` with `n_r` and `n_theta` increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDisk {
    pub n_r: usize,
    pub n_theta: usize,
}

impl GridDisk {
    pub fn new(n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r == 0 || n_theta == 0 {
            return Err(Error::Config("disk grid needs at least one increment per direction".into()));
        }
        Ok(Self { n_r, n_theta })
    }

    pub fn radii(&self) -> Vec<f64> {
        let h = 1.0 / self.n_r as f64;
        (0..=self.n_r).map(|i| i as f64 * h).collect()
    }

    pub fn angles(&self) -> Vec<f64> {
        let h = 2.0 * PI / self.n_theta as f64;
        (0..=self.n_theta).map(|l| l as f64 * h).collect()
    }

    /// Trapezoid weights in `r` times the Jacobian `r`; the `r = 0` ring gets weight 0.
    pub fn radial_weights(&self) -> Vec<f64> {
        trapezoid_weights(self.n_r, 1.0 / self.n_r as f64)
            .into_iter()
            .zip(self.radii())
            .map(|(w, r)| w * r)
            .collect()
    }

    pub fn angular_weights(&self) -> Vec<f64> {
        trapezoid_weights(self.n_theta, 2.0 * PI / self.n_theta as f64)
    }
}

fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n + 1];
    w[0] *= 0.5;
    w[n] *= 0.5;
    w
}

/// A quadrature mesh over a whole domain: node coordinates plus weights (Jacobian
/// included). Node order on the disk is radius-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mesh {
    Interval(Grid1D),
    Disk(GridDisk),
}

impl Mesh {
    pub fn domain(&self) -> Domain {
        match self {
            Mesh::Interval(_) => Domain::UnitInterval,
            Mesh::Disk(_) => Domain::UnitDisk,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Mesh::Interval(g) => g.nodes().len(),
            Mesh::Disk(g) => (g.n_r + 1) * (g.n_theta + 1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<Point> {
        match self {
            Mesh::Interval(g) => g.nodes().into_iter().map(Point::Line).collect(),
            Mesh::Disk(g) => {
                let angles = g.angles();
                g.radii()
                    .into_iter()
                    .flat_map(|r| angles.iter().map(move |&theta| Point::Polar { r, theta }))
                    .collect()
            }
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        match self {
            Mesh::Interval(g) => g.weights(),
            Mesh::Disk(g) => {
                let wt = g.angular_weights();
                g.radial_weights()
                    .into_iter()
                    .flat_map(|wr| wt.iter().map(move |&w| wr * w))
                    .collect()
            }
        }
    }

    /// Samples `f` at every node. Zero-weight nodes (the disk centre) are not
    /// evaluated and hold 0.
    pub fn sample(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.points()
            .into_iter()
            .zip(self.weights())
            .map(|(p, w)| if w == 0.0 { 0.0 } else { f(p) })
            .collect()
    }

    /// `Σ w_i f_i`, failing on the first non-finite sample at a weighted node.
    pub fn integrate_samples(&self, samples: &[f64]) -> Result<f64> {
        let weights = self.weights();
        if samples.len() != weights.len() {
            return Err(Error::Config(format!(
                "sample count {} does not match mesh size {}",
                samples.len(),
                weights.len()
            )));
        }
        let mut terms = Vec::with_capacity(samples.len());
        for (i, (&w, &f)) in weights.iter().zip(samples).enumerate() {
            if w == 0.0 {
                continue;
            }
            if !f.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite integrand {f} at node {i} ({:?})",
                    self.points()[i]
                )));
            }
            terms.push(w * f);
        }
        Ok(pairwise_sum(&terms))
    }
}

/// Pairwise (tree) summation; the association order depends only on the length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `h · Σ c_i f(x_i)` with `c_i = 1` (left point) or the trapezoid end halves.
pub fn integrate_1d(f: impl Fn(f64) -> f64, grid: &Grid1D) -> Result<f64> {
    let nodes = grid.nodes();
    let last = nodes.len() - 1;
    let mut terms = Vec::with_capacity(nodes.len());
    for (i, x) in nodes.into_iter().enumerate() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::Numerical(format!("non-finite integrand {v} at node {i} (x = {x})")));
        }
        let half = grid.rule == Rule::Trapezoid && (i == 0 || i == last);
        terms.push(if half { 0.5 * v } else { v });
    }
    Ok(grid.step() * pairwise_sum(&terms))
}

/// Tensor trapezoid rule for `∫∫ f(r, θ) r dr dθ`.
pub fn integrate_disk(f: impl Fn(f64, f64) -> f64, grid: &GridDisk) -> Result<f64> {
    let mesh = Mesh::Disk(*grid);
    let samples = mesh.sample(|p| match p {
        Point::Polar { r, theta } => f(r, theta),
        Point::Line(_) => f64::NAN,
    });
    mesh.integrate_samples(&samples)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Composite Gauss-Legendre rule: `panels` equal panels of `order` points on `[a, b]`.
#[derive(Debug, Clone)]
pub struct CompositeGauss {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeGauss {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + 0.5 * h * xi);
                weights.push(0.5 * h * wi);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).collect();
        pairwise_sum(&terms)
    }
}

/// Observation region or relaxed density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SubsetKind {
    /// Disjoint closed intervals in `[0, 1]`.
    IntervalUnion { intervals: Vec<(f64, f64)> },
    /// `{ (r, θ) : θ ∈ ω₀ }` for a union of closed angular sectors in `[0, 2π]`.
    RadialAngular { sectors: Vec<(f64, f64)> },
    /// Density `a ∈ [0, 1]` sampled at the nodes of a mesh.
    Density { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSpec {
    pub kind: SubsetKind,
    /// `L`, with `|ω| = L |Ω|` (or `∫ a = L |Ω|`).
    pub measure_fraction: f64,
}

fn normalise_union(mut parts: Vec<(f64, f64)>, lo: f64, hi: f64, what: &str) -> Result<(Vec<(f64, f64)>, f64)> {
    if parts.is_empty() {
        return Err(Error::Config(format!("{what} needs at least one piece")));
    }
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut total = 0.0;
    for (i, &(a, b)) in parts.iter().enumerate() {
        if !(a < b) || a < lo || b > hi {
            return Err(Error::Config(format!("{what} piece [{a}, {b}] must satisfy {lo} <= a < b <= {hi}")));
        }
        if i > 0 && a <= parts[i - 1].1 {
            return Err(Error::Config(format!("{what} pieces overlap at {a}")));
        }
        total += b - a;
    }
    Ok((parts, total))
}

impl SubsetSpec {
    pub fn interval_union(intervals: Vec<(f64, f64)>) -> Result<Self> {
        let (intervals, total) = normalise_union(intervals, 0.0, 1.0, "interval union")?;
        Ok(Self {
            kind: SubsetKind::IntervalUnion { intervals },
            measure_fraction: total,
        })
    }

    pub fn radial_angular(sectors: Vec<(f64, f64)>) -> Result<Self> {
        let (sectors, total) = normalise_union(sectors, 0.0, 2.0 * PI, "angular sector set")?;
        Ok(Self {
            kind: SubsetKind::RadialAngular { sectors },
            measure_fraction: total / (2.0 * PI),
        })
    }

    /// `ω₀ = [0, π/4] ∪ [π/2, 3π/4] ∪ [π, 5π/4] ∪ [3π/2, 7π/4]`.
    pub fn four_sectors() -> Self {
        let q = PI / 4.0;
        Self::radial_angular((0..4).map(|i| (2.0 * i as f64 * q, (2.0 * i as f64 + 1.0) * q)).collect())
            .expect("static sector set is valid")
    }

    pub fn density(values: Vec<f64>, mesh: &Mesh) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::Config(format!(
                "density has {} samples but the mesh has {} nodes",
                values.len(),
                mesh.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && **v <= 1.0)) {
            return Err(Error::Config(format!("density value {v} at node {i} is outside [0, 1]")));
        }
        let mass = mesh.integrate_samples(&values)?;
        Ok(Self {
            kind: SubsetKind::Density { values },
            measure_fraction: mass / mesh.domain().measure(),
        })
    }

    /// Constant density `a ≡ level`.
    pub fn constant_density(level: f64, mesh: &Mesh) -> Result<Self> {
        Self::density(vec![level; mesh.len()], mesh)
    }

    pub fn dimension(&self) -> Option<usize> {
        match self.kind {
            SubsetKind::IntervalUnion { .. } => Some(1),
            SubsetKind::RadialAngular { .. } => Some(2),
            SubsetKind::Density { .. } => None,
        }
    }

    /// Per-node factor `s_i` such that `∫_ω f ≈ Σ w_i s_i f_i`.
    ///
    /// Interval unions mask nodes (closed intervals: a node on an endpoint is in).
    /// Angular sectors integrate the piecewise-linear interpolant in `θ` exactly over
    /// the sector, so cells cut by a sector edge contribute fractionally.
    pub fn node_factors(&self, mesh: &Mesh) -> Result<Vec<f64>> {
        match (&self.kind, mesh) {
            (SubsetKind::IntervalUnion { intervals }, Mesh::Interval(g)) => Ok(g
                .nodes()
                .into_iter()
                .map(|x| {
                    if intervals.iter().any(|&(a, b)| x >= a && x <= b) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()),
            (SubsetKind::RadialAngular { sectors }, Mesh::Disk(g)) => {
                let ratios = angular_fractions(sectors, g);
                Ok((0..=g.n_r).flat_map(|_| ratios.iter().copied()).collect())
            }
            (SubsetKind::Density { values }, _) => {
                if values.len() != mesh.len() {
                    return Err(Error::Config(format!(
                        "density has {} samples but the mesh has {} nodes",
                        values.len(),
                        mesh.len()
                    )));
                }
                Ok(values.clone())
            }
            _ => Err(Error::Config(format!(
                "subset of dimension {:?} does not fit the {} mesh",
                self.dimension(),
                mesh.domain()
            ))),
        }
    }

    /// Combined weights `w_i s_i`.
    pub fn restricted_weights(&self, mesh: &Mesh) -> Result<Vec<f64>> {
        Ok(mesh.weights().into_iter().zip(self.node_factors(mesh)?).map(|(w, s)| w * s).collect())
    }
}

/// For each angular node, `∫_{ω₀} hat_l dθ` divided by the node's trapezoid weight.
fn angular_fractions(sectors: &[(f64, f64)], g: &GridDisk) -> Vec<f64> {
    let n = g.n_theta;
    let h = 2.0 * PI / n as f64;
    let weights = g.angular_weights();
    (0..=n)
        .map(|l| {
            let centre = l as f64 * h;
            let mut acc = 0.0;
            // Rising half of the hat on [centre - h, centre], falling half on [centre, centre + h].
            if l > 0 {
                acc += sectors
                    .iter()
                    .map(|&(a, b)| linear_overlap(a, b, centre - h, centre, true, h))
                    .sum::<f64>();
            }
            if l < n {
                acc += sectors
                    .iter()
                    .map(|&(a, b)| linear_overlap(a, b, centre, centre + h, false, h))
                    .sum::<f64>();
            }
            acc / weights[l]
        })
        .collect()
}

/// `∫_{[a,b] ∩ [lo,hi]}` of the hat's linear piece on `[lo, hi]` (rising to 1 at `hi`
/// when `rising`, else falling from 1 at `lo`).
fn linear_overlap(a: f64, b: f64, lo: f64, hi: f64, rising: bool, h: f64) -> f64 {
    let s = a.max(lo);
    let e = b.min(hi);
    if e <= s {
        return 0.0;
    }
    let value = |t: f64| if rising { (t - lo) / h } else { (hi - t) / h };
    0.5 * (value(s) + value(e)) * (e - s)
}

/// Masked samples `f_i s_i`; integrating them equals integrating `f` over the subset.
pub fn restrict(samples: &[f64], subset: &SubsetSpec, mesh: &Mesh) -> Result<Vec<f64>> {
    let factors = subset.node_factors(mesh)?;
    if factors.len() != samples.len() {
        return Err(Error::Config(format!(
            "sample count {} does not match mesh size {}",
            samples.len(),
            factors.len()
        )));
    }
    Ok(samples.iter().zip(factors).map(|(f, s)| f * s).collect())
}
