//! Small dense eigen-solvers: cyclic Jacobi for real symmetric and complex
//! Hermitian matrices, and a power-iteration spectral norm.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major square matrix helper.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }
}

/// Eigenvalues (ascending) of a real symmetric matrix by cyclic Jacobi rotations,
/// iterated until the off-diagonal Frobenius norm is below `tol` times the total norm.
pub fn jacobi_eigenvalues(mut a: Dense, tol: f64) -> Result<Vec<f64>> {
    let n = a.n;
    let total: f64 = a.data.iter().map(|x| x * x).sum::<f64>().sqrt();
    if total == 0.0 {
        return Ok(vec![0.0; n]);
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a.get(i, j).powi(2);
            }
        }
        if off.sqrt() <= tol * total {
            let mut ev: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
            ev.sort_by(f64::total_cmp);
            return Ok(ev);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    Err(Error::Numerical("Jacobi iteration did not converge in 100 sweeps".into()))
}

/// Eigenvalues (ascending) of a Hermitian matrix given row-major, via the real
/// symmetric embedding `[[A, -B], [B, A]]` whose spectrum doubles that of `A + iB`.
pub fn hermitian_eigenvalues(h: &[Complex64], n: usize, tol: f64) -> Result<Vec<f64>> {
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in i..n {
            let d = (h[i * n + j] - h[j * n + i].conj()).norm();
            if d > 1e-10 * scale {
                return Err(Error::Numerical(format!(
                    "matrix is not Hermitian at ({i}, {j}): deviation {d:e}"
                )));
            }
        }
    }
    let mut big = Dense::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[i * n + j];
            big.set(i, j, z.re);
            big.set(i + n, j + n, z.re);
            big.set(i, j + n, -z.im);
            big.set(i + n, j, z.im);
        }
    }
    let all = jacobi_eigenvalues(big, tol)?;
    Ok(all.into_iter().step_by(2).collect())
}

/// Largest singular value of a row-major `rows × cols` matrix, by power iteration on
/// `AᵀA` to the given relative tolerance.
pub fn spectral_norm(a: &[f64], rows: usize, cols: usize, rtol: f64) -> f64 {
    if a.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    let mut v: Vec<f64> = (0..cols).map(|i| 1.0 + 0.01 * (i % 7) as f64).collect();
    let mut sigma = 0.0;
    for _ in 0..10_000 {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let av: Vec<f64> = (0..rows)
            .map(|i| (0..cols).map(|j| a[i * cols + j] * v[j]).sum())
            .collect();
        let next = av.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut w = vec![0.0; cols];
        for i in 0..rows {
            for j in 0..cols {
                w[j] += a[i * cols + j] * av[i];
            }
        }
        v = w;
        if (next - sigma).abs() <= rtol * next {
            return next;
        }
        sigma = next;
    }
    sigma
}
