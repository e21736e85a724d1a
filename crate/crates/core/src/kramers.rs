//! Kramers-diffusion half-life model.
//!
//! The half-life is the inverse of the thermally activated escape current
//! over the Coulomb barrier,
//!
//! ```text
//! lg T = −(a20 + 1/R) + lg e · (V_Coul − E_TKE) / ⟨ε⟩,   ⟨ε⟩ = sqrt(μ E_TKE / a)
//! ```
//!
//! with the excitation fraction μ and the radius R = [B1 (A − X)^{1/3} +
//! B1 A_cl^{1/3} − 1] B2 given by exponential parameterizations in
//! (A, Z, A_cl, Z_cl, E_TKE, Q). Half-lives are in years.

use std::f64::consts::{LOG10_E, PI};

use log::warn;

use crate::data::{NuclideRecord, PhysicalConstants};
use crate::error::{Error, Estimate, Result, Warning};
use crate::params::ParameterSet;

/// Which mass number enters the daughter term of R_Kramers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RadiusVariant {
    /// (A − Z_cl)^{1/3}, as typeset.
    AsPrinted,
    /// (A − A_cl)^{1/3}, the daughter mass number. Reproduces the tables.
    DaughterMass,
}

/// Numerical convention under which the model is evaluated.
///
/// The fitted convention is the one that regenerates the published theory
/// column from the published parameters: bare charge product over R in the
/// barrier and lg e rounded to 0.434.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convention {
    pub radius: RadiusVariant,
    /// Coulomb constant multiplying (Z − Z_cl)·Z_cl / R, MeV·fm.
    pub coulomb_e2: f64,
    pub log10_e: f64,
}

impl Convention {
    pub const FITTED: Convention = Convention {
        radius: RadiusVariant::DaughterMass,
        coulomb_e2: 1.0,
        log10_e: 0.434,
    };

    /// Formulas read literally: physical e², exact lg e, radius as typeset.
    pub fn literal(constants: &PhysicalConstants) -> Self {
        Convention {
            radius: RadiusVariant::AsPrinted,
            coulomb_e2: constants.e_squared,
            log10_e: LOG10_E,
        }
    }

    pub fn with_radius(self, radius: RadiusVariant) -> Self {
        Convention { radius, ..self }
    }
}

impl Default for Convention {
    fn default() -> Self {
        Convention::FITTED
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KramersBreakdown {
    pub mu: f64,
    pub b1: f64,
    pub b2: f64,
    /// fm
    pub r_kramers: f64,
    /// MeV
    pub v_coul: f64,
    /// ⟨ε⟩, MeV
    pub eps_avg: f64,
    /// lg(⟨ω⟩/2π) in lg(1/yr)
    pub lg_omega_over_2pi: f64,
    /// lg(T½ / yr)
    pub lg_t_half: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusTerms {
    pub r_kramers: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Dimensionless combinations shared by the μ, B1 and B2 exponents.
struct Shape {
    a: f64,
    z: f64,
    a_cl: f64,
    z_cl: f64,
    /// (A − A_cl)/A
    daughter_frac: f64,
    /// ((A − 2Z)/A)²
    asym2: f64,
    /// 1 − E_TKE/Q
    excess: f64,
    /// 1 − 1/Z_cl
    cluster: f64,
}

impl Shape {
    fn of(record: &NuclideRecord) -> Result<Self> {
        if !(record.q_total > 0.0) {
            return Err(Error::Domain(format!("{record}: Q must be positive")));
        }
        if record.a == 0 || record.z == 0 || record.a_cl == 0 || record.z_cl == 0 {
            return Err(Error::Domain(format!("{record}: mass and charge numbers must be positive")));
        }
        let a = f64::from(record.a);
        let z = f64::from(record.z);
        let a_cl = f64::from(record.a_cl);
        let z_cl = f64::from(record.z_cl);
        Ok(Shape {
            a,
            z,
            a_cl,
            z_cl,
            daughter_frac: (a - a_cl) / a,
            asym2: ((a - 2.0 * z) / a).powi(2),
            excess: 1.0 - record.e_tke / record.q_total,
            cluster: 1.0 - 1.0 / z_cl,
        })
    }
}

/// Coulomb energy (MeV) of daughter and fragment at separation `r_coul` (fm).
pub fn coulomb_barrier(record: &NuclideRecord, r_coul: f64, constants: &PhysicalConstants) -> Result<f64> {
    coulomb_energy(record, r_coul, constants.e_squared)
}

fn coulomb_energy(record: &NuclideRecord, r_coul: f64, e2: f64) -> Result<f64> {
    if !(r_coul > 0.0) {
        return Err(Error::Domain(format!("Coulomb radius must be positive, got {r_coul}")));
    }
    let charge_product = (f64::from(record.z) - f64::from(record.z_cl)) * f64::from(record.z_cl);
    Ok(e2 * charge_product / r_coul)
}

/// Fraction μ of the kinetic energy that appears as excitation heat.
pub fn mu_factor(record: &NuclideRecord, params: &ParameterSet) -> Result<f64> {
    Ok(mu_from_shape(&Shape::of(record)?, params))
}

fn mu_from_shape(s: &Shape, p: &ParameterSet) -> f64 {
    let exponent = p.get(1)
        + p.get(2) * s.asym2
        + p.get(3) * s.daughter_frac * s.excess
        + (p.get(4) * s.daughter_frac + p.get(5) / s.z_cl) * s.cluster;
    exponent.exp()
}

/// Kramers radius R (fm) and its two scale factors.
pub fn kramers_radius(record: &NuclideRecord, params: &ParameterSet, variant: RadiusVariant) -> Result<RadiusTerms> {
    let s = Shape::of(record)?;
    let terms = radius_from_shape(&s, params, variant);
    if !(terms.r_kramers > 0.0) {
        return Err(Error::DegenerateRadius {
            record: record.label(),
            radius: terms.r_kramers,
        });
    }
    Ok(terms)
}

fn radius_from_shape(s: &Shape, p: &ParameterSet, variant: RadiusVariant) -> RadiusTerms {
    let b1 = (p.get(6) * s.asym2
        + p.get(7) * s.z / s.a
        + (p.get(8) + p.get(9) * s.daughter_frac + p.get(10) / s.a_cl) * s.excess
        + (p.get(11) + p.get(12) * s.daughter_frac + p.get(13) / s.z_cl) * s.cluster)
        .exp();
    let b2 = (p.get(14) / s.z
        + p.get(15) * s.asym2
        + p.get(16) * s.z / s.a
        + p.get(17) * s.daughter_frac * s.excess
        + (p.get(18) + p.get(19) * (s.z - s.z_cl) / s.z) * s.cluster)
        .exp();
    let daughter = match variant {
        RadiusVariant::AsPrinted => s.a - s.z_cl,
        RadiusVariant::DaughterMass => s.a - s.a_cl,
    };
    let r_kramers = (b1 * daughter.cbrt() + b1 * s.a_cl.cbrt() - 1.0) * b2;
    RadiusTerms { r_kramers, b1, b2 }
}

/// Fermi-gas temperature ⟨ε⟩ = sqrt(E*/a) with a = A / (A/a).
pub fn average_energy(e_star: f64, mass_number: f64, constants: &PhysicalConstants) -> Result<f64> {
    if e_star < 0.0 || e_star.is_nan() {
        return Err(Error::Domain(format!("excitation energy must be non-negative, got {e_star}")));
    }
    if !(mass_number > 0.0) {
        return Err(Error::Domain(format!("mass number must be positive, got {mass_number}")));
    }
    Ok((e_star * constants.level_density_ratio / mass_number).sqrt())
}

/// Evaluates lg T½ (years) for one record with the full intermediate breakdown.
pub fn log_half_life(
    record: &NuclideRecord,
    params: &ParameterSet,
    constants: &PhysicalConstants,
    convention: &Convention,
) -> Result<KramersBreakdown> {
    if !(record.e_tke > 0.0) {
        return Err(Error::Domain(format!("{record}: E_TKE must be positive")));
    }
    let s = Shape::of(record)?;
    let mu = mu_from_shape(&s, params);
    let RadiusTerms { r_kramers, b1, b2 } = radius_from_shape(&s, params, convention.radius);
    if !(r_kramers > 0.0) {
        return Err(Error::DegenerateRadius {
            record: record.label(),
            radius: r_kramers,
        });
    }
    let v_coul = coulomb_energy(record, r_kramers, convention.coulomb_e2)?;
    let eps_avg = average_energy(mu * record.e_tke, s.a, constants)?;
    let lg_omega_over_2pi = params.get(20) + 1.0 / r_kramers;
    let lg_t_half = -lg_omega_over_2pi + convention.log10_e * (v_coul - record.e_tke) / eps_avg;
    Ok(KramersBreakdown {
        mu,
        b1,
        b2,
        r_kramers,
        v_coul,
        eps_avg,
        lg_omega_over_2pi,
        lg_t_half,
    })
}

/// Constants and convention bundled for repeated evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KramersModel {
    pub constants: PhysicalConstants,
    pub convention: Convention,
}

impl KramersModel {
    pub fn with_radius(radius: RadiusVariant) -> Self {
        KramersModel {
            convention: Convention::FITTED.with_radius(radius),
            ..Default::default()
        }
    }

    pub fn evaluate(&self, record: &NuclideRecord, params: &ParameterSet) -> Result<KramersBreakdown> {
        log_half_life(record, params, &self.constants, &self.convention)
    }

    pub fn lg_t_half(&self, record: &NuclideRecord, params: &ParameterSet) -> Result<f64> {
        self.evaluate(record, params).map(|b| b.lg_t_half)
    }

    pub fn solve_etke(&self, record: &NuclideRecord, params: &ParameterSet, lg_t_target: f64) -> Result<EtkeSolution> {
        solve_etke(record, params, lg_t_target, &self.constants, &self.convention)
    }
}

/// Kramers escape rate with the friction-dependent prefactor,
///
/// ```text
/// w = ω_min/2π · [sqrt(1 + (β/2ω_max)²) − β/2ω_max] · exp(−ΔU/ε)
/// ```
///
/// Warns (without failing) when β < ω_max/10.
pub fn kramers_rate_full(delta_u: f64, omega_min: f64, omega_max: f64, beta: f64, eps: f64) -> Result<Estimate<f64>> {
    if !(omega_min > 0.0 && omega_max > 0.0) {
        return Err(Error::Domain("angular frequencies must be positive".into()));
    }
    if !(beta >= 0.0) {
        return Err(Error::Domain(format!("friction must be non-negative, got {beta}")));
    }
    if !(eps >= 0.0) {
        return Err(Error::Domain(format!("temperature must be non-negative, got {eps}")));
    }
    let mut warnings = Vec::new();
    if beta < omega_max / 10.0 {
        warn!("friction {beta} below the validity bound omega_max/10 = {}", omega_max / 10.0);
        warnings.push(Warning::WeakFriction { beta, omega_max });
    }
    let boltzmann = if eps == 0.0 {
        if delta_u > 0.0 {
            0.0
        } else {
            return Err(Error::Domain("zero temperature with no barrier".into()));
        }
    } else {
        (-delta_u / eps).exp()
    };
    let ratio = beta / (2.0 * omega_max);
    let prefactor = (1.0 + ratio * ratio).sqrt() - ratio;
    Ok(Estimate {
        value: omega_min / (2.0 * PI) * prefactor * boltzmann,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtkeSolution {
    /// The root nearest the kinematic estimate Q·(A − A_cl)/A.
    pub e_tke: f64,
    /// Every root found in [Q/2, Q], ascending.
    pub roots: Vec<f64>,
    pub warnings: Vec<Warning>,
}

const ETKE_GRID: usize = 512;
const ETKE_TOL: f64 = 1e-6;

/// Finds the kinetic energy at which the model reproduces `lg_t_target`.
///
/// The interval [Q/2, Q] is scanned on a grid; every sign change between two
/// regular points is refined by bisection with secant steps. Points where the
/// parameterization degenerates (R ≤ 0) split the interval.
pub fn solve_etke(
    record: &NuclideRecord,
    params: &ParameterSet,
    lg_t_target: f64,
    constants: &PhysicalConstants,
    convention: &Convention,
) -> Result<EtkeSolution> {
    let lo = 0.5 * record.q_total;
    let hi = record.q_total;
    if !(lo > 0.0) || !lg_t_target.is_finite() {
        return Err(Error::Domain(format!("{record}: need Q > 0 and a finite target")));
    }
    let mut trial = record.clone();
    let mut mismatch = |e: f64| -> Option<f64> {
        trial.e_tke = e;
        log_half_life(&trial, params, constants, convention)
            .ok()
            .map(|b| b.lg_t_half - lg_t_target)
            .filter(|v| v.is_finite())
    };

    let grid: Vec<(f64, Option<f64>)> = (0..=ETKE_GRID)
        .map(|k| {
            let e = lo + (hi - lo) * k as f64 / ETKE_GRID as f64;
            (e, mismatch(e))
        })
        .collect();

    let mut roots = Vec::new();
    for pair in grid.windows(2) {
        let ((e0, f0), (e1, f1)) = (pair[0], pair[1]);
        let (Some(f0), Some(f1)) = (f0, f1) else { continue };
        if f0 == 0.0 {
            roots.push(e0);
            continue;
        }
        if f0.signum() == f1.signum() {
            continue;
        }
        if let Some(root) = refine(&mut mismatch, e0, f0, e1, f1) {
            roots.push(root);
        }
    }
    if let Some((e, Some(f))) = grid.last() {
        if *f == 0.0 {
            roots.push(*e);
        }
    }
    if roots.is_empty() {
        return Err(Error::NoSolution { lo, hi });
    }

    let regular: Vec<f64> = grid.iter().filter_map(|(_, f)| *f).collect();
    let increasing = regular.windows(2).all(|w| w[1] > w[0]);
    let decreasing = regular.windows(2).all(|w| w[1] < w[0]);
    let mut warnings = Vec::new();
    if !(increasing || decreasing) || regular.len() < grid.len() {
        warnings.push(Warning::NonMonotone);
    }
    if roots.len() > 1 {
        warn!("{record}: {} energies reproduce lg T = {lg_t_target}: {roots:?}", roots.len());
        warnings.push(Warning::MultipleRoots { roots: roots.clone() });
    }

    let kinematic = crate::data::etke_from_q(record);
    let e_tke = roots
        .iter()
        .copied()
        .min_by(|x, y| (x - kinematic).abs().total_cmp(&(y - kinematic).abs()))
        .expect("non-empty");
    Ok(EtkeSolution { e_tke, roots, warnings })
}

/// Illinois-style bracketed secant; falls back to bisection when the secant
/// point leaves the bracket. Returns `None` if the bracket straddles a pole.
fn refine(f: &mut impl FnMut(f64) -> Option<f64>, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64) -> Option<f64> {
    let mut side = 0i8;
    for _ in 0..200 {
        let secant = (a * fb - b * fa) / (fb - fa);
        let mid = 0.5 * (a + b);
        let x = if secant > a && secant < b { secant } else { mid };
        let fx = f(x)?;
        if fx.abs() <= 1e-3 * ETKE_TOL || (b - a) <= 1e-14 * b {
            return (fx.abs() <= ETKE_TOL).then_some(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
    }
    let x = 0.5 * (a + b);
    f(x).filter(|v| v.abs() <= ETKE_TOL).map(|_| x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use approx::assert_relative_eq;

    fn table4() -> ParameterSet {
        ParameterSet::table4()
    }

    fn u238() -> NuclideRecord {
        Dataset::embedded().records[50].clone()
    }

    #[test]
    fn barrier_unit_charges() {
        let c = PhysicalConstants::default();
        let mut r = NuclideRecord::channel("X", 10, 2, 4, 1, 1.0, 1.0, 1.0);
        r.z_cl = 1;
        assert_relative_eq!(coulomb_barrier(&r, c.e_squared, &c).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn barrier_u238() {
        let c = PhysicalConstants::default();
        assert_relative_eq!(coulomb_barrier(&u238(), 10.0, &c).unwrap(), 25.91928, max_relative = 1e-12);
        assert!(matches!(coulomb_barrier(&u238(), 0.0, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn mu_zero_params_is_one() {
        assert_eq!(mu_factor(&u238(), &ParameterSet::zero()).unwrap(), 1.0);
    }

    #[test]
    fn mu_u238_matches_high_precision() {
        // 40-digit re-evaluation of the μ parameterization
        let mu = mu_factor(&u238(), &table4()).unwrap();
        assert_relative_eq!(mu, 0.111843644895541, max_relative = 1e-12);
    }

    #[test]
    fn mu_at_full_energy_drops_excess_term() {
        let mut r = u238();
        r.e_tke = r.q_total;
        let mut p = table4();
        let with_a3 = mu_factor(&r, &p).unwrap();
        p.a[2] = 1234.0;
        assert_eq!(mu_factor(&r, &p).unwrap(), with_a3);
    }

    #[test]
    fn mu_requires_positive_q() {
        let mut r = u238();
        r.q_total = 0.0;
        assert!(matches!(mu_factor(&r, &table4()), Err(Error::Domain(_))));
    }

    #[test]
    fn radius_zero_params() {
        let r = u238();
        let t = kramers_radius(&r, &ParameterSet::zero(), RadiusVariant::AsPrinted).unwrap();
        assert_eq!((t.b1, t.b2), (1.0, 1.0));
        assert_relative_eq!(t.r_kramers, 236f64.cbrt() + 4f64.cbrt() - 1.0, max_relative = 1e-15);
        let t = kramers_radius(&r, &ParameterSet::zero(), RadiusVariant::DaughterMass).unwrap();
        assert_relative_eq!(t.r_kramers, 234f64.cbrt() + 4f64.cbrt() - 1.0, max_relative = 1e-15);
    }

    #[test]
    fn radius_u238_matches_high_precision() {
        let t = kramers_radius(&u238(), &table4(), RadiusVariant::AsPrinted).unwrap();
        assert_relative_eq!(t.b1, 32.8783665730029, max_relative = 1e-12);
        assert_relative_eq!(t.b2, 0.0473606463288853, max_relative = 1e-12);
        assert_relative_eq!(t.r_kramers, 12.0471810257415, max_relative = 1e-12);
        let t = kramers_radius(&u238(), &table4(), RadiusVariant::DaughterMass).unwrap();
        assert_relative_eq!(t.r_kramers, 12.0199210074505, max_relative = 1e-12);
    }

    #[test]
    fn radius_unit_cluster_charge_kills_cluster_terms() {
        let mut r = NuclideRecord::channel("X", 200, 80, 6, 1, 10.0, 11.0, 1.0);
        r.z_cl = 1;
        let base = kramers_radius(&r, &ParameterSet::zero(), RadiusVariant::AsPrinted).unwrap();
        let mut p = ParameterSet::zero();
        for i in [11, 12, 13, 18, 19] {
            p.a[i - 1] = 3.0;
        }
        let t = kramers_radius(&r, &p, RadiusVariant::AsPrinted).unwrap();
        assert_eq!(t, base);
    }

    #[test]
    fn radius_window_all_records() {
        let p = table4();
        for r in Dataset::embedded().records {
            let t = kramers_radius(&r, &p, RadiusVariant::DaughterMass).unwrap();
            assert!((5.0..=30.0).contains(&t.r_kramers), "{r}: {}", t.r_kramers);
        }
    }

    #[test]
    fn negative_radius_is_degenerate() {
        let mut p = ParameterSet::zero();
        p.a[6] = -20.0; // B1 → 0 so R → −B2
        assert!(matches!(
            kramers_radius(&u238(), &p, RadiusVariant::DaughterMass),
            Err(Error::DegenerateRadius { .. })
        ));
    }

    #[test]
    fn average_energy_cases() {
        let c = PhysicalConstants::default();
        assert_eq!(average_energy(0.0, 238.0, &c).unwrap(), 0.0);
        assert_relative_eq!(average_energy(238.0 / 8.0, 238.0, &c).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(average_energy(0.5, 238.0, &c).unwrap(), 0.129640744710433, max_relative = 1e-12);
        assert!(average_energy(-1.0, 238.0, &c).is_err());
    }

    #[test]
    fn published_half_lives() {
        let c = PhysicalConstants::default();
        let conv = Convention::FITTED;
        let ds = Dataset::embedded();
        let p = table4();
        for (row, printed, oracle) in [
            (51, 4.4627e9, 9.64959838613355),
            (38, 4.2241e-15, -14.3742661785544),
            (84, 8.369e3, 3.92268584527326),
        ] {
            let b = log_half_life(&ds.records[row - 1], &p, &c, &conv).unwrap();
            assert_relative_eq!(b.lg_t_half, oracle, epsilon = 1e-9);
            assert!((b.lg_t_half - f64::log10(printed)).abs() < 5e-3, "row {row}");
        }
    }

    #[test]
    fn zero_barrier_excess_leaves_attempt_frequency() {
        let c = PhysicalConstants::default();
        let mut p = ParameterSet::zero();
        p.a[19] = 27.5;
        let conv = Convention::FITTED;
        let mut r = NuclideRecord::alpha("U", 238, 92, 1.0, 40.0, 1.0);
        let radius = kramers_radius(&r, &p, conv.radius).unwrap().r_kramers;
        r.e_tke = 90.0 * 2.0 / radius;
        let b = log_half_life(&r, &p, &c, &conv).unwrap();
        assert_relative_eq!(b.v_coul, r.e_tke, max_relative = 1e-14);
        assert_relative_eq!(b.lg_t_half, -(27.5 + 1.0 / radius), max_relative = 1e-12);
    }

    #[test]
    fn log_half_life_rejects_nonpositive_energy() {
        let mut r = u238();
        r.e_tke = 0.0;
        assert!(matches!(
            log_half_life(&r, &table4(), &PhysicalConstants::default(), &Convention::FITTED),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rate_limits() {
        let r = kramers_rate_full(3.0, 2.0, 1.0, 0.0, 1.5).unwrap();
        assert_relative_eq!(r.value, 2.0 / (2.0 * PI) * (-2.0f64).exp(), max_relative = 1e-15);
        assert!(matches!(r.warnings[..], [Warning::WeakFriction { .. }]));
        let r = kramers_rate_full(0.0, 2.0, 1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(r.value, 1.0 / PI, max_relative = 1e-15);
        let r = kramers_rate_full(6.0, 1.0, 1.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(r.value, 3.08020712782929e-4, max_relative = 1e-12);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn rate_frozen_limit() {
        assert_eq!(kramers_rate_full(1.0, 1.0, 1.0, 0.5, 0.0).unwrap().value, 0.0);
        assert!(kramers_rate_full(0.0, 1.0, 1.0, 0.5, 0.0).is_err());
        assert!(kramers_rate_full(1.0, 0.0, 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn solve_predicted_rows() {
        let c = PhysicalConstants::default();
        let ds = Dataset::embedded();
        let p = table4();
        for (row, t_exp, printed) in [(90, 1.68e13f64, 40.44), (91, 2.52e18, 51.80)] {
            let sol = solve_etke(&ds.records[row - 1], &p, t_exp.log10(), &c, &Convention::FITTED).unwrap();
            assert!((sol.e_tke - printed).abs() <= 0.1, "row {row}: {}", sol.e_tke);
            assert!(sol.roots.len() > 1);
            assert!(sol.warnings.iter().any(|w| matches!(w, Warning::MultipleRoots { .. })));
        }
    }

    #[test]
    fn solve_fixed_point() {
        let c = PhysicalConstants::default();
        let conv = Convention::FITTED;
        let p = table4();
        let ds = Dataset::embedded();
        for row in [1, 51, 82, 92] {
            let r = &ds.records[row - 1];
            let target = log_half_life(r, &p, &c, &conv).unwrap().lg_t_half;
            let sol = solve_etke(r, &p, target, &c, &conv).unwrap();
            assert!((sol.e_tke - r.e_tke).abs() < 1e-6 * r.e_tke, "row {row}: {} vs {}", sol.e_tke, r.e_tke);
            let mut check = r.clone();
            check.e_tke = sol.e_tke;
            let lg = log_half_life(&check, &p, &c, &conv).unwrap().lg_t_half;
            assert!((lg - target).abs() <= 1e-6);
        }
    }

    #[test]
    fn solve_without_sign_change() {
        let c = PhysicalConstants::default();
        assert!(matches!(
            solve_etke(&u238(), &table4(), -50.0, &c, &Convention::FITTED),
            Err(Error::NoSolution { .. })
        ));
    }
}
