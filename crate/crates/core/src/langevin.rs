//! One-dimensional Langevin dynamics
//!
//! ```text
//! dx = p/m dt
//! dp = −U'(x) dt − β p dt + sqrt(2 m β ε) dW
//! ```
//!
//! integrated with the BAOAB splitting (half kick, half drift, exact
//! Ornstein–Uhlenbeck update of p, half drift, half kick), and a Monte Carlo
//! estimate of the mean first-passage time over a barrier.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Estimate, Result};
use crate::kramers::kramers_rate_full;

/// Natural cubic spline through `(x, U)` samples, extrapolated linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl Spline {
    pub fn new(samples: &[(f64, f64)]) -> Result<Self> {
        let n = samples.len();
        if n < 3 {
            return Err(Error::Config("tabulated potential needs at least 3 samples".into()));
        }
        if samples.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Config("tabulated potential has non-finite samples".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Config("tabulated abscissae must increase strictly".into()));
        }
        let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
        // tridiagonal system for the interior second derivatives
        let mut m = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            diag[i] = 2.0 * (h0 + h1);
            rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        for i in 2..n - 1 {
            let h = xs[i] - xs[i - 1];
            let w = h / diag[i - 1];
            diag[i] -= w * h;
            rhs[i] -= w * rhs[i - 1];
        }
        for i in (1..n - 1).rev() {
            let h1 = xs[i + 1] - xs[i];
            m[i] = (rhs[i] - h1 * m[i + 1]) / diag[i];
        }
        Ok(Spline { xs, ys, m })
    }

    fn segment(&self, x: f64) -> usize {
        let k = self.xs.partition_point(|&v| v <= x);
        k.clamp(1, self.xs.len() - 1) - 1
    }

    fn value_and_slope(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len();
        let xs = &self.xs;
        if x < xs[0] || x > xs[n - 1] {
            let (i, edge) = if x < xs[0] { (0, xs[0]) } else { (n - 2, xs[n - 1]) };
            let (u, du) = self.interior(i, edge);
            return (u + du * (x - edge), du);
        }
        self.interior(self.segment(x), x)
    }

    fn interior(&self, i: usize, x: f64) -> (f64, f64) {
        let (xs, ys, m) = (&self.xs, &self.ys, &self.m);
        let h = xs[i + 1] - xs[i];
        let a = (xs[i + 1] - x) / h;
        let b = (x - xs[i]) / h;
        let u = a * ys[i] + b * ys[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
        let du = (ys[i + 1] - ys[i]) / h + ((1.0 - 3.0 * a * a) * m[i] + (3.0 * b * b - 1.0) * m[i + 1]) * h / 6.0;
        (u, du)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Flat,
    /// U = a x² − b x³
    Cubic { a: f64, b: f64 },
    /// U = h ((x/x0)² − 1)²
    DoubleWell { h: f64, x0: f64 },
    Tabulated(Spline),
}

impl PotentialSpec {
    /// Cubic well at x = 0 with barrier `delta_u` and ω_min = ω_max = `omega`.
    pub fn cubic_barrier(delta_u: f64, omega: f64, mass: f64) -> Result<Self> {
        if !(delta_u > 0.0 && omega > 0.0 && mass > 0.0) {
            return Err(Error::Config("cubic barrier needs positive ΔU, ω and m".into()));
        }
        let a = 0.5 * mass * omega * omega;
        let b = (4.0 * a * a * a / (27.0 * delta_u)).sqrt();
        Ok(PotentialSpec::Cubic { a, b })
    }

    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        Spline::new(samples).map(PotentialSpec::Tabulated)
    }

    pub fn energy(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Flat => 0.0,
            PotentialSpec::Cubic { a, b } => x * x * (a - b * x),
            PotentialSpec::DoubleWell { h, x0 } => {
                let s = (x / x0).powi(2) - 1.0;
                h * s * s
            }
            PotentialSpec::Tabulated(s) => s.value_and_slope(x).0,
        }
    }

    #[inline]
    pub fn force(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Flat => 0.0,
            PotentialSpec::Cubic { a, b } => x * (3.0 * b * x - 2.0 * a),
            PotentialSpec::DoubleWell { h, x0 } => {
                let u = x / x0;
                -4.0 * h * u * (u * u - 1.0) / x0
            }
            PotentialSpec::Tabulated(s) => -s.value_and_slope(x).1,
        }
    }

    /// Interval searched for extrema.
    fn domain(&self) -> (f64, f64) {
        match self {
            PotentialSpec::Flat => (-1.0, 1.0),
            PotentialSpec::Cubic { a, b } => {
                let scale = if *b != 0.0 { (2.0 * a / (3.0 * b)).abs() } else { 1.0 };
                let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
                (-1.5 * scale, 2.5 * scale)
            }
            PotentialSpec::DoubleWell { x0, .. } => (-2.0 * x0.abs(), 2.0 * x0.abs()),
            PotentialSpec::Tabulated(s) => (s.xs[0], s.xs[s.xs.len() - 1]),
        }
    }

    /// Stationary points in the search domain as `(minima, maxima)`, ascending.
    pub fn extrema(&self) -> (Vec<f64>, Vec<f64>) {
        const GRID: usize = 4000;
        let (lo, hi) = self.domain();
        let dx = (hi - lo) / GRID as f64;
        let (mut minima, mut maxima) = (Vec::new(), Vec::new());
        let mut x0 = lo;
        let mut f0 = self.force(lo);
        for k in 1..=GRID {
            let x1 = lo + k as f64 * dx;
            let f1 = self.force(x1);
            if (f0 > 0.0 && f1 <= 0.0) || (f0 < 0.0 && f1 >= 0.0) {
                let x = if f1 == 0.0 { x1 } else { bisect_force(self, x0, x1) };
                // U' = −force goes − → + at a minimum
                if f0 > 0.0 {
                    minima.push(x);
                } else {
                    maxima.push(x);
                }
            }
            x0 = x1;
            f0 = f1;
        }
        minima.dedup_by(|a, b| (*a - *b).abs() < dx);
        maxima.dedup_by(|a, b| (*a - *b).abs() < dx);
        (minima, maxima)
    }

    /// U'' by central second differences.
    pub fn curvature(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        let h = 1e-4 * (hi - lo);
        (self.energy(x + h) - 2.0 * self.energy(x) + self.energy(x - h)) / (h * h)
    }
}

fn bisect_force(u: &PotentialSpec, mut a: f64, mut b: f64) -> f64 {
    let fa_positive = u.force(a) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if (u.force(mid) > 0.0) == fa_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialFeatures {
    pub x_min: f64,
    pub x_max: f64,
    pub delta_u: f64,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl PotentialFeatures {
    /// +1 when the barrier lies to the right of the well.
    pub fn direction(&self) -> f64 {
        (self.x_max - self.x_min).signum()
    }
}

/// Leftmost well and the barrier next to it (right side preferred).
pub fn potential_features(potential: &PotentialSpec, mass: f64) -> Result<PotentialFeatures> {
    if !(mass > 0.0) {
        return Err(Error::Config(format!("mass must be positive, got {mass}")));
    }
    let (minima, maxima) = potential.extrema();
    let Some(&x_min) = minima.first() else {
        return Err(Error::Topology("no local minimum in the search domain".into()));
    };
    let right = maxima.iter().copied().find(|&x| x > x_min);
    let left = maxima.iter().copied().rev().find(|&x| x < x_min);
    let Some(x_max) = right.or(left) else {
        return Err(Error::Topology(format!("no barrier next to the minimum at x = {x_min}")));
    };
    let delta_u = potential.energy(x_max) - potential.energy(x_min);
    let k_min = potential.curvature(x_min);
    let k_max = potential.curvature(x_max);
    if !(delta_u > 0.0 && k_min > 0.0 && k_max < 0.0) {
        return Err(Error::Topology(format!(
            "degenerate extrema: ΔU = {delta_u}, U''(min) = {k_min}, U''(max) = {k_max}"
        )));
    }
    Ok(PotentialFeatures {
        x_min,
        x_max,
        delta_u,
        omega_min: (k_min / mass).sqrt(),
        omega_max: (-k_max / mass).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub mass: f64,
    /// Friction coefficient γ (mass/time); β = γ/m.
    pub gamma: f64,
    /// Temperature ⟨ε⟩.
    pub eps: f64,
    pub dt: f64,
    pub t_max: f64,
    pub x_init: f64,
    pub p_init: f64,
    pub absorb_x: f64,
    pub n_traj: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            mass: 1.0,
            gamma: 0.5,
            eps: 1.0,
            dt: 0.05,
            t_max: 1e4,
            x_init: 0.0,
            p_init: 0.0,
            absorb_x: 1.0,
            n_traj: 1000,
            seed: 0,
        }
    }
}

const LANES: usize = 8;

/// Upper bound on dt·ω.
pub const RESOLUTION_GUARD: f64 = 0.05;

impl SimConfig {
    pub fn beta(&self) -> f64 {
        self.gamma / self.mass
    }

    /// D = γ·ε
    pub fn diffusion(&self) -> f64 {
        self.gamma * self.eps
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return bad(format!("mass must be positive, got {}", self.mass));
        }
        if !(self.gamma >= 0.0 && self.eps >= 0.0) {
            return bad("gamma and eps must be non-negative".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_max >= self.dt) {
            return bad("t_max must cover at least one step".into());
        }
        if self.n_traj < 1 {
            return bad("n_traj must be at least 1".into());
        }
        if !(self.x_init.is_finite() && self.p_init.is_finite() && self.absorb_x.is_finite()) {
            return bad("initial state and absorbing boundary must be finite".into());
        }
        Ok(())
    }

    fn n_steps(&self) -> u64 {
        (self.t_max / self.dt).ceil() as u64
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Phase-space point with the force at `x` cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub x: f64,
    pub p: f64,
    pub force: f64,
}

impl State {
    pub fn new(x: f64, p: f64, potential: &PotentialSpec) -> Self {
        State {
            x,
            p,
            force: potential.force(x),
        }
    }
}

/// Step coefficients precomputed from a [`SimConfig`].
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    half_dt: f64,
    half_drift: f64,
    c1: f64,
    c2: f64,
}

impl Integrator {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let c1 = (-config.beta() * config.dt).exp();
        Ok(Integrator {
            half_dt: 0.5 * config.dt,
            half_drift: 0.5 * config.dt / config.mass,
            c1,
            c2: (config.mass * config.eps * (1.0 - c1 * c1)).sqrt(),
        })
    }

    /// Standard deviation of the momentum kick per step.
    pub fn noise_scale(&self) -> f64 {
        self.c2
    }

    /// Advances one step with the standard normal variate `xi`.
    #[inline]
    pub fn advance(&self, s: &mut State, potential: &PotentialSpec, xi: f64) {
        s.p += self.half_dt * s.force;
        s.x += self.half_drift * s.p;
        s.p = self.c1 * s.p + self.c2 * xi;
        s.x += self.half_drift * s.p;
        s.force = potential.force(s.x);
        s.p += self.half_dt * s.force;
    }
}

/// One BAOAB step from `(x, p)`; `index` is reported if the state diverges.
pub fn step(
    state: (f64, f64),
    potential: &PotentialSpec,
    config: &SimConfig,
    xi: f64,
    index: u64,
) -> Result<(f64, f64)> {
    let integrator = Integrator::new(config)?;
    let mut s = State::new(state.0, state.1, potential);
    integrator.advance(&mut s, potential, xi);
    if !(s.x.is_finite() && s.p.is_finite()) {
        return Err(Error::Divergence { step: index });
    }
    Ok((s.x, s.p))
}

/// Free-particle moments from [`equilibrium_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    /// Time-averaged ⟨p²⟩/2m.
    pub kinetic: f64,
    pub kinetic_stderr: f64,
    /// d⟨x²⟩/dt over the second half of the run.
    pub msd_slope: f64,
}

/// Runs `n_traj` free particles (U = 0) for `t_max`, starting at x = 0 with
/// Maxwellian momenta, and measures equipartition and diffusion.
pub fn equilibrium_check(config: &SimConfig) -> Result<Moments> {
    let integrator = Integrator::new(config)?;
    let n_steps = config.n_steps();
    let burn_in = if config.beta() > 0.0 {
        ((5.0 / config.beta()) / config.dt).ceil() as u64
    } else {
        0
    }
    .min(n_steps / 2);
    let n_half = n_steps / 2;
    let thermal = (config.mass * config.eps).sqrt();
    let flat = PotentialSpec::Flat;

    struct Run {
        kinetic: f64,
        x2: Vec<f64>,
    }
    let runs: Vec<Run> = (0..config.n_traj as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = config.rng(k);
            let p0: f64 = rng.sample::<f64, _>(StandardNormal) * thermal;
            let mut s = State::new(0.0, p0, &flat);
            let mut kinetic = 0.0;
            let mut x2 = Vec::with_capacity((n_steps - n_half) as usize);
            for i in 1..=n_steps {
                integrator.advance(&mut s, &flat, rng.sample(StandardNormal));
                if i > burn_in {
                    kinetic += s.p * s.p;
                }
                if i > n_half {
                    x2.push(s.x * s.x);
                }
            }
            let samples = (n_steps - burn_in).max(1) as f64;
            Run {
                kinetic: kinetic / (samples * 2.0 * config.mass),
                x2,
            }
        })
        .collect();

    let n = runs.len() as f64;
    let kinetic = runs.iter().map(|r| r.kinetic).sum::<f64>() / n;
    let var = runs.iter().map(|r| (r.kinetic - kinetic).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);

    let len = runs[0].x2.len();
    let times: Vec<f64> = (0..len).map(|j| (n_half + 1 + j as u64) as f64 * config.dt).collect();
    let mean_x2: Vec<f64> = (0..len).map(|j| runs.iter().map(|r| r.x2[j]).sum::<f64>() / n).collect();
    let t_bar = times.iter().sum::<f64>() / len as f64;
    let y_bar = mean_x2.iter().sum::<f64>() / len as f64;
    let (mut stt, mut sty) = (0.0, 0.0);
    for (t, y) in times.iter().zip(&mean_x2) {
        stt += (t - t_bar).powi(2);
        sty += (t - t_bar) * (y - y_bar);
    }
    Ok(Moments {
        kinetic,
        kinetic_stderr: (var / n).sqrt(),
        msd_slope: if stt > 0.0 { sty / stt } else { 0.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    /// First time past the absorbing boundary, or t_max if censored.
    pub escape_time: f64,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeStats {
    pub mfpt: f64,
    pub mfpt_stderr: f64,
    /// 1/mfpt
    pub rate: f64,
    pub n_escaped: usize,
    pub n_censored: usize,
    /// Censored trajectories entered through the exponential-tail estimate.
    pub tail_corrected: bool,
    /// No escapes: mfpt is a lower bound (total exposure) and rate an upper bound.
    pub rate_is_bound: bool,
    pub trajectories: Vec<Trajectory>,
}

impl EscapeStats {
    fn from_trajectories(trajectories: Vec<Trajectory>) -> Self {
        let n_escaped = trajectories.iter().filter(|t| !t.censored).count();
        let n_censored = trajectories.len() - n_escaped;
        let exposure: f64 = trajectories.iter().map(|t| t.escape_time).sum();
        let (mfpt, mfpt_stderr) = if n_escaped == 0 {
            (exposure, f64::INFINITY)
        } else if n_censored == 0 {
            let n = n_escaped as f64;
            let mean = exposure / n;
            let var = trajectories.iter().map(|t| (t.escape_time - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            (mean, (var / n).sqrt())
        } else {
            // exponential MLE: total exposure over the number of events
            let mean = exposure / n_escaped as f64;
            (mean, mean / (n_escaped as f64).sqrt())
        };
        EscapeStats {
            mfpt,
            mfpt_stderr,
            rate: 1.0 / mfpt,
            n_escaped,
            n_censored,
            tail_corrected: n_censored > 0 && n_escaped > 0,
            rate_is_bound: n_escaped == 0,
            trajectories,
        }
    }

    /// Per-trajectory CSV `traj_id,escape_time,censored`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "traj_id,escape_time,censored")?;
        for (k, t) in self.trajectories.iter().enumerate() {
            writeln!(out, "{k},{:e},{}", t.escape_time, t.censored)?;
        }
        Ok(())
    }
}

/// Runs `n_traj` trajectories from `(x_init, p_init)` until they pass
/// `absorb_x` or reach `t_max`. Trajectory k draws from stream k of the seed.
pub fn simulate_escape(potential: &PotentialSpec, config: &SimConfig) -> Result<EscapeStats> {
    let integrator = Integrator::new(config)?;
    let features = potential_features(potential, config.mass)?;
    let omega = features.omega_max.max(features.omega_min);
    if config.dt * omega > RESOLUTION_GUARD * (1.0 + 1e-9) {
        return Err(Error::Config(format!(
            "dt·ω = {} exceeds the resolution guard {RESOLUTION_GUARD}",
            config.dt * omega
        )));
    }
    let dir = features.direction();
    if (config.absorb_x - features.x_max) * dir <= 0.0 {
        return Err(Error::Config(format!(
            "absorbing boundary {} is not beyond the barrier at {}",
            config.absorb_x, features.x_max
        )));
    }
    if (config.x_init - features.x_max) * dir >= 0.0 {
        return Err(Error::Config(format!("x_init {} is not inside the well", config.x_init)));
    }
    let n_steps = config.n_steps();
    let edge = config.absorb_x * dir;

    // Trajectories advance in interleaved groups so the serial x → F → p
    // dependency of one does not stall the pipeline.
    let ids: Vec<u64> = (0..config.n_traj as u64).collect();
    let groups = ids
        .par_chunks(LANES)
        .map(|group| {
            let mut rngs: Vec<ChaCha8Rng> = group.iter().map(|&k| config.rng(k)).collect();
            let mut states = [State::new(config.x_init, config.p_init, potential); LANES];
            let mut out: Vec<Option<Trajectory>> = vec![None; group.len()];
            let mut active = group.len();
            let mut i = 0;
            while active > 0 && i < n_steps {
                i += 1;
                for (lane, rng) in rngs.iter_mut().enumerate() {
                    if out[lane].is_some() {
                        continue;
                    }
                    let s = &mut states[lane];
                    integrator.advance(s, potential, rng.sample(StandardNormal));
                    if s.x * dir >= edge {
                        out[lane] = Some(Trajectory {
                            escape_time: i as f64 * config.dt,
                            censored: false,
                        });
                        active -= 1;
                    } else if !s.x.is_finite() || !s.p.is_finite() {
                        return Err(Error::Divergence { step: i });
                    }
                }
            }
            Ok(out
                .into_iter()
                .map(|t| {
                    t.unwrap_or(Trajectory {
                        escape_time: n_steps as f64 * config.dt,
                        censored: true,
                    })
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let trajectories = groups.into_iter().flatten().collect();
    Ok(EscapeStats::from_trajectories(trajectories))
}

/// Analytic rate for `potential` under `config`.
pub fn analytic_rate(potential: &PotentialSpec, config: &SimConfig) -> Result<Estimate<f64>> {
    let f = potential_features(potential, config.mass)?;
    kramers_rate_full(f.delta_u, f.omega_min, f.omega_max, config.beta(), config.eps)
}

/// Escape study on the cubic well with ω = 1, m = 1 at barrier height
/// `height`·ε and β = `beta_ratio`·ω_max.
///
/// Returns the Monte Carlo statistics and the analytic rate.
pub fn cubic_escape_study(height: f64, beta_ratio: f64, n_traj: usize, seed: u64) -> Result<(EscapeStats, f64)> {
    let eps = 1.0;
    let potential = PotentialSpec::cubic_barrier(height * eps, 1.0, 1.0)?;
    let f = potential_features(&potential, 1.0)?;
    let analytic = kramers_rate_full(f.delta_u, f.omega_min, f.omega_max, beta_ratio, eps)?.value;
    let config = SimConfig {
        mass: 1.0,
        gamma: beta_ratio,
        eps,
        dt: RESOLUTION_GUARD,
        t_max: 50.0 / analytic,
        x_init: f.x_min,
        p_init: 0.0,
        // U(absorb_x) = U(x_min) − ΔU on the far side of the barrier
        absorb_x: f.x_min + 1.5 * (f.x_max - f.x_min),
        n_traj,
        seed,
    };
    Ok((simulate_escape(&potential, &config)?, analytic))
}

/// Summary block for a simulation report.
pub fn summary(stats: &EscapeStats, analytic_rate: f64) -> String {
    format!(
        "mfpt = {:.6e}\nmfpt_stderr = {:.6e}\nrate = {:.6e}\nanalytic_rate = {:.6e}\nratio = {:.6}\nn_escaped = {}\nn_censored = {}\ntail_corrected = {}\nrate_is_bound = {}\n",
        stats.mfpt,
        stats.mfpt_stderr,
        stats.rate,
        analytic_rate,
        stats.rate / analytic_rate,
        stats.n_escaped,
        stats.n_censored,
        stats.tail_corrected,
        stats.rate_is_bound,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn config(gamma: f64, eps: f64) -> SimConfig {
        SimConfig {
            gamma,
            eps,
            ..SimConfig::default()
        }
    }

    #[test]
    fn free_particle_drifts() {
        let c = config(0.0, 0.0);
        let (x, p) = step((1.0, 2.0), &PotentialSpec::Flat, &c, 0.7, 0).unwrap();
        assert_eq!(p, 2.0);
        assert_relative_eq!(x, 1.0 + 2.0 * c.dt, max_relative = 1e-15);
    }

    #[test]
    fn pure_damping_is_exact() {
        let c = config(0.3, 0.0);
        let integ = Integrator::new(&c).unwrap();
        let mut s = State::new(0.0, 1.5, &PotentialSpec::Flat);
        for _ in 0..1000 {
            integ.advance(&mut s, &PotentialSpec::Flat, 1.0);
        }
        assert_relative_eq!(s.p, 1.5 * (-0.3 * 1000.0 * c.dt).exp(), max_relative = 1e-12);
    }

    #[test]
    fn harmonic_energy_conserved() {
        let omega = 1.0;
        let u = PotentialSpec::Cubic { a: 0.5 * omega * omega, b: 0.0 };
        let c = SimConfig {
            dt: 0.05 / omega,
            ..config(0.0, 0.0)
        };
        let integ = Integrator::new(&c).unwrap();
        let mut s = State::new(1.0, 0.0, &u);
        let energy = |s: &State| 0.5 * s.p * s.p + u.energy(s.x);
        let e0 = energy(&s);
        let mut worst = 0.0f64;
        for _ in 0..100_000 {
            integ.advance(&mut s, &u, 0.0);
            worst = worst.max((energy(&s) - e0).abs() / e0);
        }
        // shadow-Hamiltonian oscillation is O((ω dt)²/8)
        assert!(worst <= 1e-3, "{worst}");
        let drift = (energy(&s) - e0).abs() / e0;
        assert!(drift <= 1e-3, "{drift}");
    }

    #[test]
    fn divergence_reported_with_index() {
        let c = config(0.0, 0.0);
        let err = step((f64::MAX, f64::MAX), &PotentialSpec::Flat, &c, 0.0, 42).unwrap_err();
        assert!(matches!(err, Error::Divergence { step: 42 }));
    }

    #[test]
    fn equipartition_and_einstein() {
        let c = SimConfig {
            gamma: 1.0,
            eps: 0.7,
            t_max: 60.0,
            n_traj: 4000,
            seed: 11,
            ..SimConfig::default()
        };
        let m = equilibrium_check(&c).unwrap();
        assert!((m.kinetic - 0.35).abs() <= 3.0 * m.kinetic_stderr, "{m:?}");
        let einstein = 2.0 * c.eps / c.gamma;
        assert!((m.msd_slope - einstein).abs() <= 0.05 * einstein, "{m:?}");
    }

    #[test]
    fn noiseless_damping_cools() {
        let c = SimConfig {
            gamma: 1.0,
            eps: 0.0,
            t_max: 60.0,
            n_traj: 4,
            ..SimConfig::default()
        };
        let m = equilibrium_check(&c).unwrap();
        assert_eq!(m.kinetic, 0.0);
    }

    #[test]
    fn noise_statistics() {
        let c = config(0.8, 1.3);
        let integ = Integrator::new(&c).unwrap();
        let mut rng = c.rng(0);
        let n = 1_000_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let kick = integ.noise_scale() * rng.sample::<f64, _>(StandardNormal);
            sum += kick;
            sum2 += kick * kick;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        let expected = c.mass * c.eps * (1.0 - (-2.0 * c.beta() * c.dt).exp());
        assert!(mean.abs() <= 3.0 * expected.sqrt() / (n as f64).sqrt());
        assert!((var / expected - 1.0).abs() <= 0.02);
        // 2D·dt to leading order in β dt
        assert!((expected / (2.0 * c.diffusion() * c.dt) - 1.0).abs() < c.beta() * c.dt);
    }

    #[test]
    fn fluctuation_dissipation() {
        let base = SimConfig {
            gamma: 0.5,
            eps: 1.0,
            t_max: 100.0,
            n_traj: 1000,
            seed: 5,
            ..SimConfig::default()
        };
        let doubled = SimConfig { gamma: 1.0, ..base.clone() };
        assert_relative_eq!(doubled.diffusion(), 2.0 * base.diffusion());
        let a = equilibrium_check(&base).unwrap();
        let b = equilibrium_check(&doubled).unwrap();
        let tol = 3.0 * (a.kinetic_stderr.powi(2) + b.kinetic_stderr.powi(2)).sqrt();
        assert!((a.kinetic - b.kinetic).abs() <= tol, "{a:?} {b:?}");
    }

    #[test]
    fn cubic_features_closed_form() {
        let (a, b, m) = (1.5, 0.4, 2.0);
        let f = potential_features(&PotentialSpec::Cubic { a, b }, m).unwrap();
        assert!(f.x_min.abs() < 1e-9);
        assert_relative_eq!(f.x_max, 2.0 * a / (3.0 * b), max_relative = 1e-9);
        assert_relative_eq!(f.delta_u, 4.0 * a.powi(3) / (27.0 * b * b), max_relative = 1e-9);
        assert_relative_eq!(f.omega_min, (2.0 * a / m).sqrt(), max_relative = 1e-6);
        assert_relative_eq!(f.omega_max, (2.0 * a / m).sqrt(), max_relative = 1e-6);

        let g = potential_features(&PotentialSpec::cubic_barrier(3.0, 0.8, 1.0).unwrap(), 1.0).unwrap();
        assert_relative_eq!(g.delta_u, 3.0, max_relative = 1e-9);
        assert_relative_eq!(g.omega_max, 0.8, max_relative = 1e-6);
    }

    #[test]
    fn double_well_symmetric() {
        let u = PotentialSpec::DoubleWell { h: 2.0, x0: 1.5 };
        let (minima, maxima) = u.extrema();
        assert_eq!(minima.len(), 2);
        assert_eq!(maxima.len(), 1);
        let w: Vec<f64> = minima.iter().map(|&x| u.curvature(x).sqrt()).collect();
        assert_relative_eq!(w[0], w[1], max_relative = 1e-9);
        let f = potential_features(&u, 1.0).unwrap();
        assert_relative_eq!(f.delta_u, 2.0, max_relative = 1e-9);
        assert_relative_eq!(f.x_min, -1.5, max_relative = 1e-9);
    }

    #[test]
    fn tabulated_matches_analytic() {
        let u = PotentialSpec::DoubleWell { h: 1.0, x0: 1.0 };
        let samples: Vec<(f64, f64)> = (0..=200).map(|i| {
            let x = -2.0 + 0.02 * i as f64;
            (x, u.energy(x))
        }).collect();
        let t = PotentialSpec::tabulated(&samples).unwrap();
        for x in [-1.7, -0.33, 0.0, 0.5, 1.21] {
            assert!((t.energy(x) - u.energy(x)).abs() < 1e-4);
            assert!((t.force(x) - u.force(x)).abs() < 1e-2);
        }
        let f = potential_features(&t, 1.0).unwrap();
        assert!((f.delta_u - 1.0).abs() < 1e-4);
        assert!(PotentialSpec::tabulated(&samples[..2]).is_err());
    }

    #[test]
    fn monotone_potential_has_no_barrier() {
        let ramp = PotentialSpec::tabulated(&[(0.0, 0.0), (1.0, -1.0), (2.0, -2.5)]).unwrap();
        assert!(matches!(potential_features(&ramp, 1.0), Err(Error::Topology(_))));
        assert!(matches!(potential_features(&PotentialSpec::Flat, 1.0), Err(Error::Topology(_))));
    }

    fn cubic_config(height: f64, n_traj: usize, t_max: f64) -> (PotentialSpec, SimConfig) {
        let u = PotentialSpec::cubic_barrier(height, 1.0, 1.0).unwrap();
        let f = potential_features(&u, 1.0).unwrap();
        let c = SimConfig {
            gamma: 0.5,
            eps: 1.0,
            t_max,
            absorb_x: 1.5 * f.x_max,
            n_traj,
            seed: 3,
            ..SimConfig::default()
        };
        (u, c)
    }

    #[test]
    fn frozen_barrier_never_escapes() {
        let (u, c) = cubic_config(20.0, 200, 50.0);
        let s = simulate_escape(&u, &c).unwrap();
        assert_eq!(s.n_escaped, 0);
        assert_eq!(s.n_censored, 200);
        assert!(s.rate_is_bound);
        assert!(s.mfpt > 0.0);
    }

    #[test]
    fn escape_is_deterministic() {
        let (u, c) = cubic_config(3.0, 300, 2000.0);
        let a = simulate_escape(&u, &c).unwrap();
        let b = simulate_escape(&u, &c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_escaped + a.n_censored, 300);
        let mut other = c.clone();
        other.seed += 1;
        assert_ne!(simulate_escape(&u, &other).unwrap(), a);
    }

    #[test]
    fn configuration_guards() {
        let (u, c) = cubic_config(3.0, 10, 100.0);
        let coarse = SimConfig { dt: 0.2, ..c.clone() };
        assert!(matches!(simulate_escape(&u, &coarse), Err(Error::Config(_))));
        let inside = SimConfig { absorb_x: 0.5, ..c.clone() };
        assert!(matches!(simulate_escape(&u, &inside), Err(Error::Config(_))));
        let zero = SimConfig { n_traj: 0, ..c };
        assert!(simulate_escape(&u, &zero).is_err());
    }

    #[test]
    fn censored_runs_use_tail_estimate() {
        let (u, c) = cubic_config(4.0, 400, 150.0);
        let s = simulate_escape(&u, &c).unwrap();
        assert!(s.n_escaped > 0 && s.n_censored > 0);
        assert!(s.tail_corrected);
        let exposure: f64 = s.trajectories.iter().map(|t| t.escape_time).sum();
        assert_relative_eq!(s.mfpt, exposure / s.n_escaped as f64);
    }

    #[test]
    fn report_csv_rows() {
        let (u, c) = cubic_config(2.0, 5, 500.0);
        let s = simulate_escape(&u, &c).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("traj_id,escape_time,censored\n0,"));
        assert!(summary(&s, 1e-3).contains("analytic_rate = 1.000000e-3"));
    }
}
