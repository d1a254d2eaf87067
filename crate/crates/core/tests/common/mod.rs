//! Finite-difference eigensolver used as an independent reference for the
//! perturbation formulas.
#![allow(dead_code)]

use obscon_core::quadrature::CompositeGauss;

/// `-u'' + εV u` on `[0, 1]` with Dirichlet ends, discretised by the three-point
/// Laplacian on `n` interior points. `V` enters as its exact average over each cell
/// `[x_i - h/2, x_i + h/2]` clipped to `[lo, hi]`, so jumps at the support edges do
/// not depend on where the nodes fall.
pub struct FdOperator {
    pub h: f64,
    pub diag: Vec<f64>,
    pub off: f64,
}

impl FdOperator {
    pub fn new(n: usize, epsilon: f64, v0: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Self {
        let h = 1.0 / (n + 1) as f64;
        let diag = (1..=n)
            .map(|i| {
                let x = i as f64 * h;
                let (a, b) = ((x - 0.5 * h).max(lo), (x + 0.5 * h).min(hi));
                let avg = if b > a {
                    CompositeGauss::new(a, b, 1, 20).integrate(&v0) / h
                } else {
                    0.0
                };
                2.0 / (h * h) + epsilon * avg
            })
            .collect();
        Self {
            h,
            diag,
            off: -1.0 / (h * h),
        }
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for (i, &d) in self.diag.iter().enumerate() {
            q = if i == 0 { d - x } else { d - x - self.off * self.off / q };
            if q == 0.0 {
                q = -f64::EPSILON * (d.abs() + x.abs());
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection to full precision.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let radius = 2.0 * self.off.abs();
        let mut lo = self.diag.iter().fold(f64::INFINITY, |m, d| m.min(*d)) - radius;
        let mut hi = self.diag.iter().fold(f64::NEG_INFINITY, |m, d| m.max(*d)) + radius;
        while hi - lo > 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector of the `k`-th eigenvalue by inverse iteration, scaled to unit
    /// discrete `L²` norm (`h Σ u² = 1`) and positive at its first nonzero entry.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        let n = self.diag.len();
        let shift = self.eigenvalue(k) * (1.0 + 1e-12);
        let mut u: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
        for _ in 0..4 {
            u = self.solve_shifted(shift, &u);
            let norm = (self.h * u.iter().map(|v| v * v).sum::<f64>()).sqrt();
            u.iter_mut().for_each(|v| *v /= norm);
        }
        if u.iter().find(|v| v.abs() > 1e-8).is_some_and(|v| *v < 0.0) {
            u.iter_mut().for_each(|v| *v = -*v);
        }
        u
    }

    /// Solves `(A - s I) y = b` by the Thomas algorithm with partial pivoting left out
    /// (the shifted matrix is nearly singular only along the wanted direction).
    fn solve_shifted(&self, s: f64, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut denom = self.diag[0] - s;
        c[0] = self.off / denom;
        d[0] = b[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - s - self.off * c[i - 1];
            if denom == 0.0 {
                denom = 1e-300;
            }
            c[i] = self.off / denom;
            d[i] = (b[i] - self.off * d[i - 1]) / denom;
        }
        let mut y = vec![0.0; n];
        y[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = d[i] - c[i] * y[i + 1];
        }
        y
    }

    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.diag.len()).map(|i| i as f64 * self.h).collect()
    }
}
