//! Gamow tunneling half-life for α decay and Geiger–Nuttall regression.
//!
//! Used as a comparator for the Kramers model: the same attempt frequency
//! a_20 is assumed so the two differ only in how the barrier is crossed.

use std::f64::consts::{FRAC_PI_2, LOG10_E};

use log::warn;

use crate::data::{NuclideRecord, PhysicalConstants};
use crate::error::{Error, Estimate, Result, Warning};
use crate::params::ParameterSet;

/// Radius constant of the default Coulomb radius r0·((A−4)^{1/3} + 4^{1/3}), fm.
pub const GAMOW_R0: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GamowInputs {
    pub z: f64,
    pub a: f64,
    /// MeV
    pub e_alpha: f64,
    /// fm
    pub r_coul: f64,
    pub lg_omega_over_2pi: f64,
    /// Reduced mass 4(A−4)/A, amu.
    pub mu_alpha: f64,
    /// Classical turning radius 2e²(Z−2)/E, fm.
    pub r_turn: f64,
    /// r_coul / r_turn
    pub x: f64,
}

impl GamowInputs {
    pub fn new(
        z: f64,
        a: f64,
        e_alpha: f64,
        r_coul: f64,
        lg_omega_over_2pi: f64,
        constants: &PhysicalConstants,
    ) -> Result<Self> {
        if !(z > 2.0 && a > 4.0 && e_alpha > 0.0) {
            return Err(Error::Domain(format!(
                "Gamow inputs need Z > 2, A > 4, E > 0 (got Z={z}, A={a}, E={e_alpha})"
            )));
        }
        let r_turn = 2.0 * constants.e_squared * (z - 2.0) / e_alpha;
        Ok(GamowInputs {
            z,
            a,
            e_alpha,
            r_coul,
            lg_omega_over_2pi,
            mu_alpha: 4.0 * (a - 4.0) / a,
            r_turn,
            x: r_coul / r_turn,
        })
    }

    /// Inputs for an α record: geometric Coulomb radius and ⟨ω⟩/2π = 10^a20.
    pub fn for_record(record: &NuclideRecord, params: &ParameterSet, constants: &PhysicalConstants) -> Result<Self> {
        let a = f64::from(record.a);
        let r_coul = GAMOW_R0 * ((a - 4.0).cbrt() + 4f64.cbrt());
        Self::new(f64::from(record.z), a, record.e_tke, r_coul, params.get(20), constants)
    }

    /// Dimensionless barrier strength 4e²(Z−2)/ħc · sqrt(2μc²/E).
    fn sommerfeld(&self, constants: &PhysicalConstants) -> f64 {
        4.0 * constants.e_squared * (self.z - 2.0) / constants.hbar_c
            * (2.0 * self.mu_alpha * constants.amu / self.e_alpha).sqrt()
    }
}

/// Exact WKB barrier integral arccos√x − sqrt(x(1−x)).
pub fn barrier_bracket(x: f64) -> f64 {
    x.sqrt().acos() - (x * (1.0 - x)).sqrt()
}

pub fn gamow_log_half_life(inputs: &GamowInputs, constants: &PhysicalConstants) -> Result<f64> {
    let x = inputs.x;
    if !(x > 0.0) {
        return Err(Error::Domain(format!("x = {x} must be positive")));
    }
    if x >= 1.0 {
        return Err(Error::Domain(format!("above barrier: x = {x} >= 1")));
    }
    Ok(-inputs.lg_omega_over_2pi + LOG10_E * inputs.sommerfeld(constants) * barrier_bracket(x))
}

/// Small-x expansion with the bracket replaced by π/2 − 2√x.
pub fn gamow_log_half_life_approx(inputs: &GamowInputs, constants: &PhysicalConstants) -> Result<Estimate<f64>> {
    let x = inputs.x;
    if !(x > 0.0) {
        return Err(Error::Domain(format!("x = {x} must be positive")));
    }
    if x >= 0.5 {
        return Err(Error::Domain(format!("x = {x} outside the small-x expansion (< 0.5)")));
    }
    let mut warnings = Vec::new();
    if x > 0.3 {
        warn!("Gamow expansion used at x = {x}");
        warnings.push(Warning::ApproximationStrained { x });
    }
    let k = LOG10_E * inputs.sommerfeld(constants);
    let value = -inputs.lg_omega_over_2pi + k * FRAC_PI_2 - k * 2.0 * x.sqrt();
    Ok(Estimate { value, warnings })
}

/// Geiger–Nuttall line lg T = C/√E − B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GNFit {
    pub c: f64,
    pub b: f64,
    pub r_squared: f64,
}

impl GNFit {
    pub fn predict(&self, e: f64) -> f64 {
        self.c / e.sqrt() - self.b
    }
}

/// Least-squares Geiger–Nuttall fit of `(E_TKE, lg T)` pairs.
pub fn geiger_nuttall_fit(points: &[(f64, f64)]) -> Result<GNFit> {
    if points.iter().any(|(e, y)| !(*e > 0.0) || !y.is_finite()) {
        return Err(Error::DegenerateFit("energies must be positive and lg T finite".into()));
    }
    let first = points.first().map(|p| p.0);
    let distinct = points.iter().any(|p| Some(p.0) != first);
    if points.len() < 2 || !distinct {
        return Err(Error::DegenerateFit("need at least two distinct energies".into()));
    }
    let n = points.len() as f64;
    let u: Vec<f64> = points.iter().map(|(e, _)| 1.0 / e.sqrt()).collect();
    let u_mean = u.iter().sum::<f64>() / n;
    let y_mean = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut suu, mut suy, mut syy) = (0.0, 0.0, 0.0);
    for (ui, (_, yi)) in u.iter().zip(points) {
        suu += (ui - u_mean).powi(2);
        suy += (ui - u_mean) * (yi - y_mean);
        syy += (yi - y_mean).powi(2);
    }
    let c = suy / suu;
    let intercept = y_mean - c * u_mean;
    let r_squared = if syy == 0.0 { 1.0 } else { (suy * suy / (suu * syy)).clamp(0.0, 1.0) };
    Ok(GNFit {
        c,
        b: -intercept,
        r_squared,
    })
}
