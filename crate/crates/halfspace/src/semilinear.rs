//! Semilinear evolution `d/dt u = (J * u - u) + |u|^alpha u` by Strang
//! splitting: half a nonlinear substep, a full linear substep, half a
//! nonlinear substep. Both substeps are exact flows (spectral multiplier and
//! the closed-form power ODE), so the splitting is the only time error and
//! the step is second order.
//!
//! The nonlinear flow from value `v` blows up at `t = 1 / (alpha |v|^alpha)`.
//! Steps are capped at a fixed fraction of that horizon measured from the
//! current sup, which keeps every substep on the regular branch until the
//! field itself leaves any bounded threshold; the reported blow-up time adds
//! the remaining ODE horizon to the time the threshold was crossed.

use crate::error::{Error, Result};
use crate::fields::{
    kahan_sum, moment_m1_full, odd_defect, odd_extend, project_odd, trace_max, Field, Grid,
    HalfField, Symmetry,
};
use crate::fft;
use crate::linear::{data_norm, probe_value, LinearFlow};
use crate::symbols::{fit_line, DiffusionSymbol};
use ndarray::ArrayD;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub symbol: DiffusionSymbol,
    pub grid: Grid,
    /// Nonlinearity exponent in `|u|^alpha u`.
    pub alpha: f64,
    pub t_max: f64,
    /// Step ceiling; the adaptive controller only ever shrinks below it.
    pub dt_initial: f64,
    /// Sup-norm level that counts as blow-up.
    pub blowup_threshold: f64,
    /// Fraction of the current ODE horizon `1/(alpha sup^alpha)` a single
    /// step may consume.
    pub dt_safety: f64,
    /// Below this step size the run is declared singular.
    pub dt_floor: f64,
    /// Accepted steps between records; the first and last step always
    /// record.
    pub record_stride: usize,
    /// Track the moving probe at this parameter, if set.
    pub probe_gamma: Option<f64>,
    /// Drop the nonlinear substeps; the stepper then reproduces the linear
    /// flow and serves as its cross-check.
    pub linear_only: bool,
}

impl SimConfig {
    pub fn new(symbol: DiffusionSymbol, grid: Grid, alpha: f64) -> SimConfig {
        SimConfig {
            symbol,
            grid,
            alpha,
            t_max: 100.0,
            dt_initial: 0.05,
            blowup_threshold: 1e8,
            dt_safety: 0.2,
            dt_floor: 1e-12,
            record_stride: 1,
            probe_gamma: None,
            linear_only: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha = {} must be positive", self.alpha)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Config(format!("t_max = {} must be positive", self.t_max)));
        }
        if !(self.dt_initial > 0.0 && self.dt_initial.is_finite()) {
            return Err(Error::Config(format!("dt = {} must be positive", self.dt_initial)));
        }
        if !(self.blowup_threshold > 1.0) {
            return Err(Error::Config(format!(
                "blow-up threshold {} must exceed 1",
                self.blowup_threshold
            )));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return Err(Error::Config(format!(
                "dt safety fraction {} outside (0, 1]",
                self.dt_safety
            )));
        }
        if !(self.dt_floor > 0.0 && self.dt_floor < self.dt_initial) {
            return Err(Error::Config(format!(
                "dt floor {} must be positive and below the initial step",
                self.dt_floor
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record stride must be at least 1".into()));
        }
        if let Some(gamma) = self.probe_gamma {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::Config(format!("probe gamma = {gamma} must be positive")));
            }
        }
        if let Some(dim) = self.symbol.required_dim() {
            if dim != self.grid.dim() {
                return Err(Error::Config(format!(
                    "sampled kernel dimension {dim} does not match grid dimension {}",
                    self.grid.dim()
                )));
            }
        }
        Ok(())
    }

    /// Decay rate `(N+1)/beta` of the global regime for this setup.
    pub fn decay_rate(&self) -> f64 {
        (self.grid.dim() as f64 + 1.0) / self.symbol.beta()
    }
}

/// Outcome of a finished run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SimStatus {
    /// The sup norm crossed the threshold (or the step collapsed);
    /// `t_star` extrapolates the remaining ODE horizon.
    BlewUp { t_star: f64 },
    /// Monotone decay over the closing window with a credible rate.
    Decayed { fitted_rate: f64 },
    /// The horizon ended before either regime was established.
    Undecided,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SimRecord {
    pub t: f64,
    pub sup_norm: f64,
    /// Half-space first moment of the current state.
    pub m1: f64,
    /// Solution value at the moving probe, when tracking is on.
    pub probe_value: Option<f64>,
    /// Step size used to leave this state.
    pub dt: f64,
}

/// Roundoff bookkeeping accumulated over a run, before any projection.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct SimDiagnostics {
    /// Largest odd-symmetry defect measured on raw FFT output.
    pub raw_odd_defect: f64,
    /// Largest boundary-trace magnitude on raw FFT output.
    pub raw_trace: f64,
    /// Most negative value seen in any accepted state.
    pub min_value: f64,
    pub steps: usize,
    pub dt_min_used: f64,
    /// A probe sample ran outside the trustworthy half of the box.
    pub probe_truncated: bool,
}

#[derive(Clone, Debug)]
pub struct SimResult {
    pub status: SimStatus,
    pub records: Vec<SimRecord>,
    /// Final state on the full box (odd in `x_N` for half-space runs).
    pub final_state: Field,
    pub t_final: f64,
    pub diagnostics: SimDiagnostics,
}

/// Singularity inside a nonlinear substep: the ODE horizon measured from the
/// substep entry state.
#[derive(Clone, Copy, Debug)]
pub struct BlowupSignal {
    pub t_sing: f64,
}

/// Exact nonlinear substep `u -> u (1 - alpha dt |u|^alpha)^{-1/alpha}`
/// applied in place. Fails with the ODE horizon when `dt` reaches the
/// singularity of any cell.
pub fn nonlinear_substep(
    values: &mut ArrayD<f64>,
    alpha: f64,
    dt: f64,
) -> std::result::Result<(), BlowupSignal> {
    let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sup > 0.0 {
        let t_sing = 1.0 / (alpha * sup.powf(alpha));
        if dt >= t_sing {
            return Err(BlowupSignal { t_sing });
        }
    }
    values.mapv_inplace(|v| {
        if v == 0.0 {
            0.0
        } else {
            v * (1.0 - alpha * dt * v.abs().powf(alpha)).powf(-1.0 / alpha)
        }
    });
    Ok(())
}

/// Strang integrator with a per-`dt` multiplier cache and symmetry
/// bookkeeping. Exposed for callers that need to drive two runs in lockstep
/// or stop at exact times; most users go through [`run_halfspace`].
pub struct Stepper {
    config: SimConfig,
    j0: ArrayD<f64>,
    multipliers: HashMap<u64, ArrayD<f64>>,
    pub field: Field,
    pub t: f64,
    pub diagnostics: SimDiagnostics,
}

impl Stepper {
    pub fn new(config: SimConfig, field: Field) -> Result<Stepper> {
        config.validate()?;
        if field.grid != config.grid {
            return Err(Error::Config("initial state lives on a different grid".into()));
        }
        let j0 = config.symbol.on_grid(&config.grid)?;
        Ok(Stepper {
            config,
            j0,
            multipliers: HashMap::new(),
            field,
            t: 0.0,
            diagnostics: SimDiagnostics {
                dt_min_used: f64::INFINITY,
                min_value: 0.0,
                ..SimDiagnostics::default()
            },
        })
    }

    /// Step ceiling from the current state: the configured `dt`, capped by
    /// the safety fraction of the ODE horizon.
    pub fn propose_dt(&self) -> f64 {
        let mut dt = self.config.dt_initial;
        if !self.config.linear_only {
            let sup = self.field.sup_norm();
            if sup > 0.0 {
                let horizon = 1.0 / (self.config.alpha * sup.powf(self.config.alpha));
                dt = dt.min(self.config.dt_safety * horizon);
            }
        }
        dt
    }

    fn multiplier(&mut self, dt: f64) -> &ArrayD<f64> {
        let j0 = &self.j0;
        self.multipliers
            .entry(dt.to_bits())
            .or_insert_with(|| j0.mapv(|j| (dt * (j - 1.0)).exp()))
    }

    fn linear_substep(&mut self, dt: f64) {
        let dx = self.field.grid.dx();
        let symmetry = self.field.symmetry;
        let mut freq = crate::fields::forward_dft(&self.field);
        let m = self.multiplier(dt);
        freq.zip_mut_with(m, |c, &v| *c *= v);
        let mut values = fft::inverse_real(&freq, dx);
        if symmetry == Symmetry::OddInXn {
            // Measure the raw drift the FFT round trip introduced, then
            // project it away so it cannot accumulate over thousands of
            // steps.
            let defect = odd_defect(&values);
            let trace = trace_max(&values);
            self.diagnostics.raw_odd_defect = self.diagnostics.raw_odd_defect.max(defect);
            self.diagnostics.raw_trace = self.diagnostics.raw_trace.max(trace);
            project_odd(&mut values);
        }
        self.field.values = values;
        self.field.symmetry = symmetry;
    }

    /// One Strang step of size `dt`.
    pub fn step(&mut self, dt: f64) -> std::result::Result<(), BlowupSignal> {
        if self.config.linear_only {
            self.linear_substep(dt);
        } else {
            let alpha = self.config.alpha;
            nonlinear_substep(&mut self.field.values, alpha, dt / 2.0)?;
            self.linear_substep(dt);
            nonlinear_substep(&mut self.field.values, alpha, dt / 2.0)?;
        }
        self.t += dt;
        self.diagnostics.steps += 1;
        self.diagnostics.dt_min_used = self.diagnostics.dt_min_used.min(dt);
        self.diagnostics.min_value = self.diagnostics.min_value.min(self.field.min_value());
        Ok(())
    }

    /// Current half-space first moment (half the signed full moment for odd
    /// states; the signed moment itself is zero for free runs).
    pub fn m1(&self) -> f64 {
        moment_m1_full(&self.field) / 2.0
    }

    fn record(&mut self, dt: f64) -> SimRecord {
        let probe = self.config.probe_gamma.and_then(|gamma| {
            match probe_value(&self.field, self.config.symbol.beta(), gamma, self.t) {
                Ok(entry) => {
                    if entry.truncated {
                        self.diagnostics.probe_truncated = true;
                    }
                    Some(entry.value)
                }
                // The probe walked out of the box; the remaining samples
                // carry no information.
                Err(_) => {
                    self.diagnostics.probe_truncated = true;
                    None
                }
            }
        });
        SimRecord {
            t: self.t,
            sup_norm: self.field.sup_norm(),
            m1: self.m1(),
            probe_value: probe,
            dt,
        }
    }
}

/// Evolve half-space data under the Dirichlet condition: odd-extend, run the
/// splitting with adaptive steps, classify the outcome.
pub fn run_halfspace(config: SimConfig, u0: &HalfField) -> Result<SimResult> {
    config.validate()?;
    if u0.grid != config.grid {
        return Err(Error::Config("initial data lives on a different grid".into()));
    }
    let min = u0.min_value();
    if min < 0.0 {
        return Err(Error::Config(format!(
            "half-space initial data must be nonnegative (min {min:.3e})"
        )));
    }
    if u0.is_zero() {
        // Zero data stays zero; report it as trivially decayed.
        let field = odd_extend(u0);
        return Ok(SimResult {
            status: SimStatus::Decayed { fitted_rate: 0.0 },
            records: vec![SimRecord { t: 0.0, sup_norm: 0.0, m1: 0.0, probe_value: None, dt: 0.0 }],
            final_state: field,
            t_final: 0.0,
            diagnostics: SimDiagnostics::default(),
        });
    }
    run_loop(config, odd_extend(u0))
}

/// Evolve arbitrary box data with no boundary condition. Used for the exact
/// ODE calibrations (constant data) and free-space experiments.
pub fn run_free(config: SimConfig, u0: Field) -> Result<SimResult> {
    config.validate()?;
    if u0.grid != config.grid {
        return Err(Error::Config("initial state lives on a different grid".into()));
    }
    run_loop(config, u0)
}

fn run_loop(config: SimConfig, initial: Field) -> Result<SimResult> {
    let alpha = config.alpha;
    let threshold = config.blowup_threshold;
    let t_max = config.t_max;
    let dt_floor = config.dt_floor;
    let stride = config.record_stride;
    let rate = config.decay_rate();
    let linear_only = config.linear_only;
    let mut stepper = Stepper::new(config, initial)?;

    let mut records: Vec<SimRecord> = Vec::new();
    let mut status: Option<SimStatus> = None;
    loop {
        let sup = stepper.field.sup_norm();
        if !sup.is_finite() {
            return Err(Error::Numerics(format!(
                "state became non-finite at t = {:.6}; shrink dt or refine the grid",
                stepper.t
            )));
        }
        if !linear_only && sup >= threshold {
            let t_star = stepper.t + 1.0 / (alpha * sup.powf(alpha));
            status = Some(SimStatus::BlewUp { t_star });
        }
        // The final partial step leaves a float-roundoff remainder; treat
        // the horizon as reached once it is negligible relative to t_max.
        let done = status.is_some() || t_max - stepper.t <= t_max * 1e-12;
        if done || stepper.diagnostics.steps % stride == 0 {
            let dt_next =
                if done { 0.0 } else { stepper.propose_dt().min(t_max - stepper.t) };
            records.push(stepper.record(dt_next));
        }
        if done {
            break;
        }
        // The floor compares against the unclamped proposal: only the ODE
        // horizon may collapse the step, never the distance to t_max.
        let proposal = stepper.propose_dt();
        if !linear_only && proposal < dt_floor {
            let t_star = stepper.t + 1.0 / (alpha * sup.powf(alpha));
            status = Some(SimStatus::BlewUp { t_star });
            continue;
        }
        let dt = proposal.min(t_max - stepper.t);
        if let Err(signal) = stepper.step(dt) {
            status = Some(SimStatus::BlewUp { t_star: stepper.t + signal.t_sing });
            continue;
        }
    }
    let status = status.unwrap_or_else(|| classify_decay(&records, t_max, rate));
    Ok(SimResult {
        status,
        records,
        t_final: stepper.t,
        final_state: stepper.field,
        diagnostics: stepper.diagnostics,
    })
}

/// Decide between `Decayed` and `Undecided` from the closing window
/// `[t_max/2, t_max]`: the sup norm must fall monotonically (up to roundoff
/// slack) and its log-log slope must reach a fixed margin of the expected
/// decay rate.
fn classify_decay(records: &[SimRecord], t_max: f64, rate: f64) -> SimStatus {
    let window: Vec<&SimRecord> =
        records.iter().filter(|r| r.t >= t_max / 2.0 && r.sup_norm > 0.0).collect();
    if window.len() < 4 {
        return SimStatus::Undecided;
    }
    let peak = window.iter().map(|r| r.sup_norm).fold(0.0f64, f64::max);
    let slack = 1e-10 * peak;
    for pair in window.windows(2) {
        if pair[1].sup_norm > pair[0].sup_norm + slack {
            return SimStatus::Undecided;
        }
    }
    let lx: Vec<f64> = window.iter().map(|r| r.t.ln()).collect();
    let ly: Vec<f64> = window.iter().map(|r| r.sup_norm.ln()).collect();
    let (slope, _) = fit_line(&lx, &ly);
    if slope <= -rate + 0.25 {
        SimStatus::Decayed { fitted_rate: slope }
    } else {
        SimStatus::Undecided
    }
}

// ---------------------------------------------------------------------------
// Order-preservation check.

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    /// Largest pointwise excess of the smaller run over the larger one,
    /// across all shared steps.
    pub max_violation: f64,
    pub steps: usize,
    /// One of the runs hit a singularity before `t_max`; the comparison
    /// covers the shared prefix.
    pub stopped_early: bool,
    pub pass: bool,
}

/// Drive two ordered initial states with a shared step sequence and verify
/// the splitting preserves their order pointwise. Both substeps are order
/// preserving (positive kernel, monotone scalar map), so any violation
/// beyond roundoff is a defect.
pub fn comparison_check(
    config: &SimConfig,
    small: &HalfField,
    big: &HalfField,
    rel_tol: f64,
) -> Result<ComparisonReport> {
    config.validate()?;
    let gap = small
        .values
        .iter()
        .zip(big.values.iter())
        .fold(f64::NEG_INFINITY, |m, (s, b)| m.max(s - b));
    if gap > 0.0 {
        return Err(Error::Config(format!(
            "initial states are not ordered (excess {gap:.3e})"
        )));
    }
    if small.min_value() < 0.0 {
        return Err(Error::Config("comparison needs nonnegative data".into()));
    }
    let mut a = Stepper::new(config.clone(), odd_extend(small))?;
    let mut b = Stepper::new(config.clone(), odd_extend(big))?;
    let mut max_violation = 0.0f64;
    let mut scale = big.sup_norm().max(1.0);
    let mut stopped_early = false;
    let mut steps = 0usize;
    while config.t_max - a.t > config.t_max * 1e-12 {
        if b.field.sup_norm() >= config.blowup_threshold {
            stopped_early = true;
            break;
        }
        let proposal = a.propose_dt().min(b.propose_dt());
        if proposal < config.dt_floor {
            stopped_early = true;
            break;
        }
        let dt = proposal.min(config.t_max - a.t);
        if a.step(dt).is_err() || b.step(dt).is_err() {
            stopped_early = true;
            break;
        }
        steps += 1;
        scale = scale.max(b.field.sup_norm());
        // Restriction order: compare on the half where the data lives; the
        // odd reflection flips both fields together.
        let n = config.grid.points();
        let last = config.grid.dim() - 1;
        for (ix, &va) in a.field.values.indexed_iter() {
            if ix[last] > n / 2 {
                max_violation = max_violation.max(va - b.field.values[ix.clone()]);
            }
        }
    }
    Ok(ComparisonReport {
        max_violation,
        steps,
        stopped_early,
        pass: max_violation <= rel_tol * scale,
    })
}

// ---------------------------------------------------------------------------
// Blow-up consistency: ODE ceiling and moment pumping.

#[derive(Clone, Debug)]
pub struct BlowupConsistency {
    /// Largest decrease of `sup^{-alpha} + alpha t` between consecutive
    /// records; nonnegative increments encode the ceiling
    /// `sup(t) <= (sup(s)^{-alpha} - alpha (t-s))^{-1/alpha}`.
    pub ceiling_defect: f64,
    /// Largest relative decrease of the first moment between records.
    pub moment_defect: f64,
    /// Best lower bound on the blow-up time over all records,
    /// `max_k (t_k + 1/(alpha sup_k^alpha))`.
    pub t_star_floor: f64,
    pub t_star: f64,
    pub pass: bool,
}

/// Check a blown-up run against the two exact monotonicity laws: the
/// pure-reaction ceiling (diffusion only defers the singularity) and the
/// pumping of the first moment. The reported `t_star` must also respect the
/// per-record ODE floors.
pub fn blowup_consistency(result: &SimResult, alpha: f64, rel_tol: f64) -> Result<BlowupConsistency> {
    let SimStatus::BlewUp { t_star } = result.status else {
        return Err(Error::Config("consistency check applies to blown-up runs".into()));
    };
    if result.records.len() < 2 {
        return Err(Error::Config("not enough records to check consistency".into()));
    }
    let mut ceiling_defect = 0.0f64;
    let mut moment_defect = 0.0f64;
    let mut t_star_floor = f64::NEG_INFINITY;
    let mut prev_h: Option<f64> = None;
    let mut prev_m1: Option<f64> = None;
    for r in &result.records {
        if r.sup_norm > 0.0 {
            let h = r.sup_norm.powf(-alpha) + alpha * r.t;
            if let Some(ph) = prev_h {
                ceiling_defect = ceiling_defect.max(ph - h);
            }
            prev_h = Some(h);
            t_star_floor = t_star_floor.max(r.t + r.sup_norm.powf(-alpha) / alpha);
        }
        if let Some(pm) = prev_m1 {
            if pm > 0.0 {
                moment_defect = moment_defect.max((pm - r.m1) / pm);
            }
        }
        prev_m1 = Some(r.m1);
    }
    let h0 = result.records[0].sup_norm.powf(-alpha);
    let pass = ceiling_defect <= rel_tol * h0.max(1.0)
        && moment_defect <= rel_tol
        && t_star >= t_star_floor - rel_tol * t_star_floor.abs().max(1.0);
    Ok(BlowupConsistency { ceiling_defect, moment_defect, t_star_floor, t_star, pass })
}

// ---------------------------------------------------------------------------
// Supersolution for the global regime.

/// Growth factor of the supersolution `g(t) v(t)`:
/// `g(t) = (1 - (C nu)^alpha alpha beta / (alpha(N+1) - beta)
///            (1 - (1+t)^{1 - alpha(N+1)/beta}))^{-1/alpha}`,
/// the closed-form solution of `g' = g^{1+alpha} (C nu)^alpha
/// (1+t)^{-alpha(N+1)/beta}` with `g(0) = 1`. Finite for all time exactly
/// when `nu` is below [`epsilon_star`].
pub fn supersolution_g(
    t: f64,
    alpha: f64,
    beta: f64,
    dim: usize,
    c_decay: f64,
    nu: f64,
) -> Result<f64> {
    check_super_args(alpha, beta, dim, c_decay)?;
    if !(nu >= 0.0 && t >= 0.0) {
        return Err(Error::Config("supersolution needs nu >= 0 and t >= 0".into()));
    }
    let n1 = dim as f64 + 1.0;
    let drain = (c_decay * nu).powf(alpha) * alpha * beta / (alpha * n1 - beta);
    let shape = 1.0 - (1.0 + t).powf(1.0 - alpha * n1 / beta);
    let base = 1.0 - drain * shape;
    if base <= 0.0 {
        return Err(Error::Numerics(format!(
            "supersolution escapes at t <= {t}: data norm {nu} is not small enough"
        )));
    }
    Ok(base.powf(-1.0 / alpha))
}

/// Data-norm threshold below which the supersolution stays finite forever:
/// `(1/C) ((alpha(N+1) - beta) / (alpha beta))^{1/alpha}`.
pub fn epsilon_star(alpha: f64, beta: f64, dim: usize, c_decay: f64) -> Result<f64> {
    check_super_args(alpha, beta, dim, c_decay)?;
    let n1 = dim as f64 + 1.0;
    Ok(((alpha * n1 - beta) / (alpha * beta)).powf(1.0 / alpha) / c_decay)
}

/// `g(infinity)` for data norm `nu` below the threshold.
pub fn supersolution_limit(
    alpha: f64,
    beta: f64,
    dim: usize,
    c_decay: f64,
    nu: f64,
) -> Result<f64> {
    check_super_args(alpha, beta, dim, c_decay)?;
    let n1 = dim as f64 + 1.0;
    let drain = (c_decay * nu).powf(alpha) * alpha * beta / (alpha * n1 - beta);
    if drain >= 1.0 {
        return Err(Error::Numerics(format!(
            "data norm {nu} at or above the smallness threshold; no finite limit"
        )));
    }
    Ok((1.0 - drain).powf(-1.0 / alpha))
}

fn check_super_args(alpha: f64, beta: f64, dim: usize, c_decay: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::Config(format!("beta = {beta} outside (0, 2]")));
    }
    if dim == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    let n1 = dim as f64 + 1.0;
    if !(alpha > beta / n1) {
        return Err(Error::Config(format!(
            "supersolution requires the supercritical range alpha > {}",
            beta / n1
        )));
    }
    if !(c_decay > 0.0 && c_decay.is_finite()) {
        return Err(Error::Config(format!("decay constant {c_decay} must be positive")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SupersolutionReport {
    pub c_decay: f64,
    pub data_norm: f64,
    pub epsilon_star: f64,
    pub g_limit: f64,
    /// Largest pointwise excess of the nonlinear solution over
    /// `g(t) v(t)` across the sampled times.
    pub max_excess: f64,
    /// Absolute slack granted to the excess.
    pub tolerance: f64,
    pub pass: bool,
}

/// Verify the global-regime domination `u(t) <= g(t) v(t)` pointwise on the
/// half-space at the sample times, with `v` the linear flow of the same data
/// and `g` driven by the measured decay constant.
pub fn supersolution_check(
    config: &SimConfig,
    u0: &HalfField,
    c_decay: f64,
    sample_times: &[f64],
    rel_tol: f64,
) -> Result<SupersolutionReport> {
    config.validate()?;
    if sample_times.is_empty() {
        return Err(Error::Config("supersolution check needs sample times".into()));
    }
    let mut times = sample_times.to_vec();
    times.sort_by(|a, b| a.partial_cmp(b).expect("sample times must not be NaN"));
    if times[0] <= 0.0 {
        return Err(Error::Config("sample times must be positive".into()));
    }
    let alpha = config.alpha;
    let beta = config.symbol.beta();
    let dim = config.grid.dim();
    let nu = data_norm(u0);
    let eps = epsilon_star(alpha, beta, dim, c_decay)?;
    let g_limit = supersolution_limit(alpha, beta, dim, c_decay, nu)?;

    let odd = odd_extend(u0);
    let flow = LinearFlow::new(&odd, &config.symbol)?;
    let mut stepper = Stepper::new(config.clone(), odd)?;
    let tolerance = rel_tol * u0.sup_norm();
    let n = config.grid.points();
    let last = dim - 1;
    let mut max_excess = f64::NEG_INFINITY;
    for &target in &times {
        while target - stepper.t > target * 1e-12 {
            let proposal = stepper.propose_dt();
            if proposal < config.dt_floor {
                return Err(Error::Numerics(format!(
                    "step collapsed at t = {:.6} during a supersolution check",
                    stepper.t
                )));
            }
            let dt = proposal.min(target - stepper.t);
            stepper.step(dt).map_err(|s| {
                Error::Numerics(format!(
                    "solution blew up (horizon {:.3e}) during a supersolution check",
                    s.t_sing
                ))
            })?;
        }
        let v = flow.at(target)?;
        let g = supersolution_g(target, alpha, beta, dim, c_decay, nu)?;
        for (ix, &uu) in stepper.field.values.indexed_iter() {
            if ix[last] > n / 2 {
                max_excess = max_excess.max(uu - g * v.values[ix.clone()]);
            }
        }
    }
    Ok(SupersolutionReport {
        c_decay,
        data_norm: nu,
        epsilon_star: eps,
        g_limit,
        max_excess,
        tolerance,
        pass: max_excess <= tolerance,
    })
}

/// Strang order probe: integrate to `t_end` with steps `dt` and `dt/2`
/// against a `dt/8` reference and return the observed order
/// `log2(e(dt) / e(dt/2))`. With exact substeps the expected value is
/// `log2(63/15) ~ 2.07`.
pub fn strang_order(config: &SimConfig, u0: &HalfField, t_end: f64, dt: f64) -> Result<f64> {
    config.validate()?;
    if !(t_end > 0.0 && dt > 0.0 && dt < t_end) {
        return Err(Error::Config("order probe needs 0 < dt < t_end".into()));
    }
    let run = |step: f64| -> Result<Field> {
        let mut stepper = Stepper::new(config.clone(), odd_extend(u0))?;
        let steps = (t_end / step).round() as usize;
        for _ in 0..steps {
            stepper
                .step(step)
                .map_err(|_| Error::Numerics("order probe hit a singularity".into()))?;
        }
        Ok(stepper.field)
    };
    let coarse = run(dt)?;
    let mid = run(dt / 2.0)?;
    let reference = run(dt / 8.0)?;
    let err = |f: &Field| -> f64 {
        let diff = kahan_sum(
            f.values
                .iter()
                .zip(reference.values.iter())
                .map(|(a, b)| (a - b) * (a - b)),
        );
        (diff * f.grid.cell_volume()).sqrt()
    };
    let e1 = err(&coarse);
    let e2 = err(&mid);
    if e2 == 0.0 || e1 == 0.0 {
        return Err(Error::Numerics("order probe errors vanished; enlarge dt".into()));
    }
    Ok((e1 / e2).log2())
}
