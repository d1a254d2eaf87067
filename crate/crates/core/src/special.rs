//! Bessel functions of the first kind of integer order, their derivatives and
//! their positive zeros.
//!
//! Small arguments use the ascending power series
//! `J_n(x) = Σ_m (-1)^m (x/2)^(2m+n) / (m! (m+n)!)`; larger arguments use
//! Miller's downward recurrence normalised with `J_0 + 2 Σ_k J_2k = 1`, which is
//! stable for every order at once. Zeros are found by Newton iteration from the
//! McMahon asymptotic guess, safeguarded by the interlacing bracket
//! `z_{j-1,k} < z_{j,k} < z_{j-1,k+1}`.

use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest Bessel order accepted by the public entry points.
pub const MAX_ORDER: usize = 60;
/// Largest zero rank accepted by [`bessel_zero`].
pub const MAX_RANK: usize = 60;

/// Arguments below this use the power series. Past it the alternating terms grow
/// and cancellation noise in the series exceeds that of the recurrence.
const SERIES_LIMIT: f64 = 2.0;
const MAX_NEWTON_ITERATIONS: usize = 100;
const NEWTON_STEP_TOL: f64 = 1e-13;

fn check_args(order: usize, x: f64) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order,
            max: MAX_ORDER,
        });
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "Bessel argument must be finite and nonnegative, got {x}"
        )));
    }
    Ok(())
}

/// `J_order(x)` for `0 <= x`, `order <= 60`; absolute error below 1e-12 on [0, 200].
pub fn bessel_j(order: usize, x: f64) -> Result<f64> {
    check_args(order, x)?;
    Ok(eval(order, x))
}

/// `J'_order(x)`, from `J'_0 = -J_1` and `J'_j = (J_{j-1} - J_{j+1}) / 2`.
pub fn bessel_j_prime(order: usize, x: f64) -> Result<f64> {
    check_args(order, x)?;
    Ok(eval_prime(order, x))
}

pub(crate) fn eval_prime(order: usize, x: f64) -> f64 {
    if order == 0 {
        -eval(1, x)
    } else {
        0.5 * (eval(order - 1, x) - eval(order + 1, x))
    }
}

/// Unchecked evaluation; used internally for orders up to `MAX_ORDER + 1`.
pub(crate) fn eval(order: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_LIMIT {
        series(order, x)
    } else {
        miller(order, x)
    }
}

fn series(order: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for k in 1..=order {
        lead *= half / k as f64;
    }
    let q = -half * half;
    let mut term = lead;
    let mut sum = lead;
    for m in 1..200 {
        term *= q / (m as f64 * (m + order) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && m > 2 {
            break;
        }
    }
    sum
}

fn miller(order: usize, x: f64) -> f64 {
    let top = (order as f64).max(x);
    let mut start = (top + 30.0 + (50.0 * top).sqrt()) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let two_over_x = 2.0 / x;
    // Downward recurrence J_{k-1} = (2k/x) J_k - J_{k+1} from arbitrary seeds.
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        // cur now holds J_{k-1}
        if k - 1 == order {
            wanted = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    norm += cur;
    wanted / norm
}

/// McMahon's large-zero approximation `β - (4n² - 1) / (8β)`, `β = (k + n/2 - 1/4)π`.
pub fn mcmahon_guess(order: usize, rank: usize) -> f64 {
    let beta = (rank as f64 + 0.5 * order as f64 - 0.25) * PI;
    let mu = 4.0 * (order * order) as f64;
    beta - (mu - 1.0) / (8.0 * beta)
}

/// Memoised positive zeros `z_{j,k}` of `J_j`, stored per order in increasing rank.
#[derive(Debug, Clone, Default)]
pub struct BesselZeroTable {
    zeros: Vec<Vec<f64>>,
}

impl BesselZeroTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Cached zero, if it has been computed.
    pub fn get(&self, order: usize, rank: usize) -> Option<f64> {
        if rank == 0 {
            return None;
        }
        self.zeros.get(order)?.get(rank - 1).copied()
    }

    /// All cached `(order, rank, zero)` triples.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.zeros
            .iter()
            .enumerate()
            .flat_map(|(j, zs)| zs.iter().enumerate().map(move |(k, &z)| (j, k + 1, z)))
    }

    pub fn len(&self) -> usize {
        self.zeros.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `rank`-th positive zero of `J_order`, computing and caching as needed.
    pub fn zero(&mut self, order: usize, rank: usize) -> Result<f64> {
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder {
                order,
                max: MAX_ORDER,
            });
        }
        if rank == 0 || rank > MAX_RANK {
            return Err(Error::InvalidIndex(format!(
                "Bessel zero rank must lie in 1..={MAX_RANK}, got {rank}"
            )));
        }
        self.fill(order, rank)
    }

    /// Zeros of `J_order` strictly below `bound`, in increasing order.
    pub fn zeros_below(&mut self, order: usize, bound: f64) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for rank in 1..=MAX_RANK {
            let z = self.zero(order, rank)?;
            if z >= bound {
                return Ok(out);
            }
            out.push(z);
        }
        Err(Error::Capacity(format!(
            "more than {MAX_RANK} zeros of J_{order} lie below {bound}"
        )))
    }

    // Ranks above MAX_RANK are reachable here through the interlacing brackets of
    // higher orders.
    fn fill(&mut self, order: usize, rank: usize) -> Result<f64> {
        if self.zeros.len() <= order {
            self.zeros.resize(order + 1, Vec::new());
        }
        while self.zeros[order].len() < rank {
            let k = self.zeros[order].len() + 1;
            let (lo, hi) = if order == 0 {
                ((k as f64 - 0.5) * PI, k as f64 * PI)
            } else {
                (self.fill(order - 1, k)?, self.fill(order - 1, k + 1)?)
            };
            let z = safeguarded_newton(order, k, lo, hi)?;
            self.zeros[order].push(z);
        }
        Ok(self.zeros[order][rank - 1])
    }
}

fn safeguarded_newton(order: usize, rank: usize, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let fa = eval(order, a);
    let fb = eval(order, b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!(
            "no sign change of J_{order} on [{lo}, {hi}] while locating zero {rank}"
        )));
    }
    let sign_a = fa.signum();
    let mut z = mcmahon_guess(order, rank);
    if !(z > a && z < b) {
        z = 0.5 * (a + b);
    }
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let f = eval(order, z);
        if f == 0.0 {
            return Ok(z);
        }
        if f.signum() == sign_a {
            a = z;
        } else {
            b = z;
        }
        let df = eval_prime(order, z);
        let mut next = z - f / df;
        if !(next > a && next < b) || !next.is_finite() {
            next = 0.5 * (a + b);
        }
        let step = next - z;
        z = next;
        if step.abs() < NEWTON_STEP_TOL {
            return Ok(z);
        }
    }
    Err(Error::Numerical(format!(
        "Newton iteration for zero {rank} of J_{order} did not converge in {MAX_NEWTON_ITERATIONS} iterations"
    )))
}

fn shared_table() -> &'static Mutex<BesselZeroTable> {
    static TABLE: OnceLock<Mutex<BesselZeroTable>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(BesselZeroTable::new()))
}

/// The `rank`-th positive zero of `J_order`, memoised process-wide.
pub fn bessel_zero(order: usize, rank: usize) -> Result<f64> {
    let mut table = shared_table()
        .lock()
        .map_err(|_| Error::Numerical("Bessel zero table lock poisoned".into()))?;
    table.zero(order, rank)
}
