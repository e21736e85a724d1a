//! Regularized, damped Gauss–Newton solution of the inverse problem
//! lg T_exp ≈ lg T_model(a) over the fit records.
//!
//! Each iteration solves
//!
//! ```text
//! (JᵀJ + λI + ρI) δ = −(Jᵀr + ρ(a − a_ref))
//! ```
//!
//! where ρ is the Tikhonov weight. A step is kept only if the regularized
//! objective ‖r‖² + ρ‖a − a_ref‖² decreases; λ shrinks after an accepted step
//! and grows after a rejected one.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::data::{Dataset, NuclideRecord};
use crate::error::{Error, Result};
use crate::kramers::KramersModel;
use crate::params::{ParameterSet, N_PARAMS};

/// Per-record divisor applied to lg residuals.
#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    Unit,
    /// σ(lg T) from the tabulated half-life errors.
    ExperimentalLogSigma,
    /// Explicit σ for every fit record, in dataset order.
    Custom(Vec<f64>),
}

impl Weighting {
    fn sigmas(&self, records: &[&NuclideRecord]) -> Result<Vec<f64>> {
        let sigmas = match self {
            Weighting::Unit => vec![1.0; records.len()],
            Weighting::ExperimentalLogSigma => records.iter().map(|r| r.lg_t_sigma()).collect(),
            Weighting::Custom(s) => {
                if s.len() != records.len() {
                    return Err(Error::Config(format!(
                        "custom weighting has {} entries for {} fit records",
                        s.len(),
                        records.len()
                    )));
                }
                s.clone()
            }
        };
        if let Some(i) = sigmas.iter().position(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Config(format!("non-positive σ for {}", records[i])));
        }
        Ok(sigmas)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difference {
    Forward,
    Central,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub weighting: Weighting,
    pub damping_init: f64,
    pub damping_grow: f64,
    pub damping_shrink: f64,
    /// Tikhonov weight on ‖a − a_ref‖².
    pub regularization: f64,
    pub a_ref: ParameterSet,
    pub max_iter: usize,
    pub step_tol: f64,
    pub fd_step: f64,
    pub difference: Difference,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            weighting: Weighting::Unit,
            damping_init: 1e-3,
            damping_grow: 10.0,
            damping_shrink: 0.1,
            regularization: 0.0,
            a_ref: ParameterSet::zero(),
            max_iter: 100,
            step_tol: 1e-10,
            fd_step: 1e-6,
            difference: Difference::Forward,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.damping_init > 0.0) {
            return bad("damping_init must be positive");
        }
        if !(self.damping_grow > 1.0 && self.damping_shrink > 0.0 && self.damping_shrink < 1.0) {
            return bad("need damping_grow > 1 > damping_shrink > 0");
        }
        if !(self.regularization >= 0.0) {
            return bad("regularization must be non-negative");
        }
        if self.max_iter < 1 {
            return bad("max_iter must be at least 1");
        }
        if !(self.step_tol > 0.0) {
            return bad("step_tol must be positive");
        }
        check_fd_step(self.fd_step)
    }
}

fn check_fd_step(h: f64) -> Result<()> {
    if h > 1e-10 && h < 1e-2 {
        Ok(())
    } else {
        Err(Error::Config(format!("fd_step {h} outside (1e-10, 1e-2)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub objective: f64,
    pub lambda: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: ParameterSet,
    /// Unweighted lg T_model − lg T_exp per fit record.
    pub residuals: Vec<f64>,
    pub chi2: f64,
    pub ndf: i64,
    pub rms_lg: f64,
    /// s²·diag((JᵀJ)⁻¹); NaN where the normal matrix is singular.
    pub covariance_diag: [f64; N_PARAMS],
    /// Weighted JᵀJ at the solution.
    pub normal_matrix: DMatrix<f64>,
    /// Every attempted step, the initial point first.
    pub iterations: Vec<IterationRecord>,
    /// Number of Jacobian evaluations.
    pub n_iter: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn accepted_objectives(&self) -> impl Iterator<Item = f64> + '_ {
        self.iterations.iter().filter(|r| r.accepted).map(|r| r.objective)
    }

    /// Fit report: `#` key/value header followed by the parameter file.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# chi2 = {:.6}", self.chi2);
        let _ = writeln!(out, "# ndf = {}", self.ndf);
        let _ = writeln!(out, "# chi2_per_ndf = {:.6}", self.chi2 / self.ndf as f64);
        let _ = writeln!(out, "# rms_lg = {:.6}", self.rms_lg);
        let _ = writeln!(out, "# converged = {}", self.converged);
        let _ = writeln!(out, "# iterations = {}", self.n_iter);
        let mut params = self.params.clone();
        if let Ok(rel) = parameter_errors(self) {
            params.rel_err = rel;
        }
        out.push_str(&params.to_file_string());
        out
    }
}

fn fit_records(dataset: &Dataset) -> Result<Vec<&NuclideRecord>> {
    let records = dataset.fit_records();
    if records.is_empty() {
        return Err(Error::Config("dataset has no fit records".into()));
    }
    Ok(records)
}

fn raw_residuals(model: &KramersModel, records: &[&NuclideRecord], params: &ParameterSet) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|r| model.lg_t_half(r, params).map(|lg| lg - r.lg_t_exp()))
        .collect()
}

fn weighted(model: &KramersModel, records: &[&NuclideRecord], params: &ParameterSet, sigmas: &[f64]) -> Result<DVector<f64>> {
    let raw = raw_residuals(model, records, params)?;
    Ok(DVector::from_iterator(raw.len(), raw.iter().zip(sigmas).map(|(r, s)| r / s)))
}

/// Weighted residuals (lg T_model − lg T_exp)/σ over the fit records.
pub fn residuals(
    model: &KramersModel,
    dataset: &Dataset,
    params: &ParameterSet,
    weighting: &Weighting,
) -> Result<DVector<f64>> {
    let records = fit_records(dataset)?;
    let sigmas = weighting.sigmas(&records)?;
    weighted(model, &records, params, &sigmas)
}

fn step_size(a: f64, fd_step: f64) -> f64 {
    (fd_step * a.abs()).max(1e-8)
}

fn jacobian_inner(
    model: &KramersModel,
    records: &[&NuclideRecord],
    params: &ParameterSet,
    sigmas: &[f64],
    base: &DVector<f64>,
    fd_step: f64,
    difference: Difference,
) -> Result<DMatrix<f64>> {
    let columns: Vec<DVector<f64>> = (0..N_PARAMS)
        .into_par_iter()
        .map(|i| {
            let h = step_size(params.a[i], fd_step);
            let shifted = |delta: f64| {
                let mut p = params.clone();
                p.a[i] += delta;
                weighted(model, records, &p, sigmas).map_err(|e| Error::Jacobian {
                    index: i + 1,
                    source: Box::new(e),
                })
            };
            match difference {
                Difference::Forward => Ok((shifted(h)? - base) / h),
                Difference::Central => Ok((shifted(h)? - shifted(-h)?) / (2.0 * h)),
            }
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_columns(&columns))
}

/// Finite-difference Jacobian of the weighted residuals, records × 20.
pub fn jacobian(
    model: &KramersModel,
    dataset: &Dataset,
    params: &ParameterSet,
    weighting: &Weighting,
    fd_step: f64,
    difference: Difference,
) -> Result<DMatrix<f64>> {
    check_fd_step(fd_step)?;
    let records = fit_records(dataset)?;
    let sigmas = weighting.sigmas(&records)?;
    let base = weighted(model, &records, params, &sigmas)?;
    jacobian_inner(model, &records, params, &sigmas, &base, fd_step, difference)
}

/// χ² = Σ weighted residual² and NDF = N_fit − 20.
pub fn chi_square(model: &KramersModel, dataset: &Dataset, params: &ParameterSet, weighting: &Weighting) -> Result<(f64, i64)> {
    let r = residuals(model, dataset, params, weighting)?;
    Ok((r.norm_squared(), r.len() as i64 - N_PARAMS as i64))
}

const LAMBDA_MAX: f64 = 1e16;

/// Runs the damped Gauss–Newton iteration from `init`.
///
/// Stalling is reported through `converged = false`, not as an error.
pub fn fit(model: &KramersModel, dataset: &Dataset, init: &ParameterSet, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let records = dataset.fit_records();
    if records.len() <= N_PARAMS {
        return Err(Error::Underdetermined {
            records: records.len(),
            params: N_PARAMS,
        });
    }
    let sigmas = config.weighting.sigmas(&records)?;
    let rho = config.regularization;
    let a_ref = DVector::from_column_slice(&config.a_ref.a);
    let penalty = |a: &DVector<f64>| rho * (a - &a_ref).norm_squared();

    let mut params = init.clone();
    let mut a = DVector::from_column_slice(&params.a);
    let mut r = weighted(model, &records, &params, &sigmas).map_err(|_| Error::Initialization)?;
    let mut objective = r.norm_squared() + penalty(&a);
    if !objective.is_finite() {
        return Err(Error::Initialization);
    }

    let mut lambda = config.damping_init;
    let mut trace = vec![IterationRecord {
        objective,
        lambda,
        accepted: true,
    }];
    let mut converged = false;
    let mut n_iter = 0;

    'outer: while n_iter < config.max_iter {
        n_iter += 1;
        let jac = jacobian_inner(model, &records, &params, &sigmas, &r, config.fd_step, config.difference)?;
        let normal = jac.tr_mul(&jac);
        let gradient = jac.tr_mul(&r) + (&a - &a_ref) * rho;
        let tol = config.step_tol * (a.norm() + config.step_tol);

        loop {
            let mut damped = normal.clone();
            for k in 0..N_PARAMS {
                damped[(k, k)] += lambda + rho;
            }
            let step = damped.cholesky().map(|c| c.solve(&-&gradient));
            let Some(step) = step else {
                lambda *= config.damping_grow;
                if lambda > LAMBDA_MAX {
                    break 'outer;
                }
                continue;
            };
            let trial_a = &a + &step;
            let mut trial = params.clone();
            trial.a.copy_from_slice(trial_a.as_slice());
            let outcome = weighted(model, &records, &trial, &sigmas)
                .ok()
                .map(|tr| {
                    let phi = tr.norm_squared() + penalty(&trial_a);
                    (tr, phi)
                })
                .filter(|(_, phi)| phi.is_finite() && *phi < objective);

            match outcome {
                Some((trial_r, phi)) => {
                    a = trial_a;
                    params = trial;
                    r = trial_r;
                    objective = phi;
                    lambda *= config.damping_shrink;
                    trace.push(IterationRecord {
                        objective,
                        lambda,
                        accepted: true,
                    });
                    if step.norm() <= tol {
                        converged = true;
                        break 'outer;
                    }
                    break;
                }
                None => {
                    trace.push(IterationRecord {
                        objective: objective.max(f64::MIN_POSITIVE),
                        lambda,
                        accepted: false,
                    });
                    if step.norm() <= tol {
                        // no decrease is possible at this resolution
                        converged = true;
                        break 'outer;
                    }
                    lambda *= config.damping_grow;
                    if lambda > LAMBDA_MAX {
                        break 'outer;
                    }
                }
            }
        }
    }

    let jac = jacobian_inner(model, &records, &params, &sigmas, &r, config.fd_step, config.difference)?;
    let normal_matrix = jac.tr_mul(&jac);
    let raw = raw_residuals(model, &records, &params)?;
    let chi2 = r.norm_squared();
    let ndf = records.len() as i64 - N_PARAMS as i64;
    let rms_lg = (raw.iter().map(|v| v * v).sum::<f64>() / raw.len() as f64).sqrt();
    let mut covariance_diag = [f64::NAN; N_PARAMS];
    if let Some(inv) = normal_matrix.clone().try_inverse() {
        let s2 = chi2 / ndf as f64;
        for (k, c) in covariance_diag.iter_mut().enumerate() {
            *c = s2 * inv[(k, k)];
        }
    }
    let mut params = params;
    params.rel_err = [0.0; N_PARAMS];
    Ok(FitResult {
        params,
        residuals: raw,
        chi2,
        ndf,
        rms_lg,
        covariance_diag,
        normal_matrix,
        iterations: trace,
        n_iter,
        converged,
    })
}

/// Relative errors |Δa_i / a_i| from s²(JᵀJ)⁻¹ with s² = χ²/NDF.
pub fn parameter_errors(result: &FitResult) -> Result<[f64; N_PARAMS]> {
    if !result.converged {
        return Err(Error::DegenerateFit("fit did not converge".into()));
    }
    let eigen = SymmetricEigen::new(result.normal_matrix.clone());
    let largest = eigen.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = largest * 1e-15;
    let null: Vec<Vec<usize>> = eigen
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, v)| **v <= cutoff)
        .map(|(k, _)| {
            let v = eigen.eigenvectors.column(k);
            let mut idx: Vec<usize> = (0..N_PARAMS).filter(|&i| v[i].abs() >= 0.3).map(|i| i + 1).collect();
            idx.sort_unstable();
            idx
        })
        .collect();
    if !null.is_empty() {
        return Err(Error::RankDeficient { directions: null });
    }
    let s2 = result.chi2 / result.ndf as f64;
    let mut rel = [0.0; N_PARAMS];
    for (i, out) in rel.iter_mut().enumerate() {
        let var: f64 = (0..N_PARAMS)
            .map(|k| eigen.eigenvectors[(i, k)].powi(2) / eigen.eigenvalues[k])
            .sum();
        let sd = (s2 * var).sqrt();
        let a = result.params.a[i];
        *out = if a == 0.0 { f64::INFINITY } else { sd / a.abs() };
    }
    Ok(rel)
}
