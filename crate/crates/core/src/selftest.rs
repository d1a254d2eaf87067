//! Fast consistency checks run by `obscon selftest`.

use crate::basis::{disk_pair, enumerate_basis, Domain};
use crate::error::Result;
use crate::experiments::{default_subset, mesh_for, sweep, PotentialFamily, SweepSettings};
use crate::observability::{finite_time_constant, j_functional, mode_mass};
use crate::quadrature::{Mesh, SubsetSpec};
use crate::sampling::ModeFamily;
use crate::special::{bessel_j, bessel_zero};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> Check {
    match outcome {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

pub fn run_checks() -> Vec<Check> {
    vec![
        check("bessel zeros", bessel_zeros()),
        check("disk normalisation", disk_normalisation()),
        check("half-interval masses", half_interval()),
        check("interval sweep cell", interval_cell()),
        check("gram block, one mode", one_mode_gram()),
    ]
}

fn bessel_zeros() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for j in 0..10 {
        for k in 1..=10 {
            worst = worst.max(bessel_j(j, bessel_zero(j, k)?)?.abs());
        }
    }
    Ok((worst < 1e-12, format!("max |J_j(z_jk)| = {worst:.3e} over j < 10, k <= 10")))
}

fn disk_normalisation() -> Result<(bool, String)> {
    let mesh = mesh_for(Domain::UnitDisk, None)?;
    let full = SubsetSpec::radial_angular(vec![(0.0, 2.0 * std::f64::consts::PI)])?;
    let m = mode_mass(&disk_pair(0, 1, 1)?, &full, &mesh)?;
    Ok(((m - 1.0).abs() < 1e-4, format!("∫ φ_(0,1,1)² = {m:.9}")))
}

fn half_interval() -> Result<(bool, String)> {
    let mesh = mesh_for(Domain::UnitInterval, None)?;
    let family = ModeFamily::unperturbed(&enumerate_basis(Domain::UnitInterval, 200)?, 200, &mesh)?;
    let j = j_functional(&family, &default_subset(Domain::UnitInterval), 200)?.j_value;
    Ok(((j - 0.5).abs() <= 1e-3, format!("J_200 at eps = 0 is {j:.9}")))
}

fn interval_cell() -> Result<(bool, String)> {
    let settings = SweepSettings {
        eps: vec![0.01],
        delta: vec![0.1],
        ..SweepSettings::interval_defaults()
    };
    let v = sweep(PotentialFamily::IntervalQuadratic, &settings)?.values[0][0];
    Ok(((v - 0.499997124).abs() < 5e-6, format!("eps = 0.01, delta = 0.1 gives {v:.9}")))
}

fn one_mode_gram() -> Result<(bool, String)> {
    let mesh: Mesh = mesh_for(Domain::UnitInterval, None)?;
    let family = ModeFamily::unperturbed(&enumerate_basis(Domain::UnitInterval, 1)?, 1, &mesh)?;
    let c = finite_time_constant(&family, &default_subset(Domain::UnitInterval), 1, 1.0)?;
    Ok(((c - 0.5).abs() <= 1e-3 + 1e-12, format!("C_T with N = 1, T = 1 is {c:.9}")))
}
