//! Time integration of constructed fields.
//!
//! Two methods: classical fixed-step RK4 and an adaptive embedded 5(4) pair
//! (Dormand-Prince coefficients, first-same-as-last, local extrapolation).
//! The fields are autonomous, so stages need no time argument.
//!
//! A run records every accepted state together with the integral values
//! there, and ends with one of four terminations: the horizon was reached,
//! the classification turned singular at an accepted step, the step size
//! collapsed, or a value left the finite range. Failures during trial
//! stages are handled by shrinking the step, never by accepting a bad one.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::constructor::{Case, FieldError, FieldModel, FieldSample};
use crate::expr::EvalError;
use crate::math;

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with a fixed step.
    Rk4Fixed,
    /// Embedded 5(4) pair with proportional step control.
    Adaptive45,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Rk4Fixed => "rk4-fixed",
            Method::Adaptive45 => "adaptive45",
        }
    }
}

/// Integration policy. `dt` is the fixed step for RK4 and the initial trial
/// step for the adaptive method (default: `t_end / 1000`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    pub t_end: f64,
    pub max_steps: usize,
    /// Stop once the scaled determinant at an accepted step falls to this
    /// relative level; `None` uses the model's own floor.
    pub singular_stop: Option<f64>,
}

pub const DEFAULT_RTOL: f64 = 1e-10;
pub const DEFAULT_ATOL: f64 = 1e-12;
pub const DEFAULT_MAX_STEPS: usize = 10_000_000;

/// The step is considered collapsed below this fraction of the horizon.
pub const MIN_STEP_FRACTION: f64 = 1e-14;

impl IntegratorConfig {
    /// Adaptive integration to `t_end` with default tolerances.
    pub fn adaptive(t_end: f64) -> IntegratorConfig {
        IntegratorConfig {
            method: Method::Adaptive45,
            dt: None,
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
            t_end,
            max_steps: DEFAULT_MAX_STEPS,
            singular_stop: None,
        }
    }

    /// Fixed-step RK4 to `t_end`.
    pub fn fixed(dt: f64, t_end: f64) -> IntegratorConfig {
        IntegratorConfig {
            method: Method::Rk4Fixed,
            dt: Some(dt),
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
            t_end,
            max_steps: DEFAULT_MAX_STEPS,
            singular_stop: None,
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(FlowError::InvalidConfig(format!(
                "t_end must be a positive finite number, got {}",
                self.t_end
            )));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(FlowError::InvalidConfig(format!(
                    "dt must be a positive finite number, got {dt}"
                )));
            }
        }
        if self.method == Method::Rk4Fixed && self.dt.is_none() {
            return Err(FlowError::InvalidConfig(String::from(
                "rk4-fixed requires an explicit dt",
            )));
        }
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(FlowError::InvalidConfig(format!(
                "tolerances must be positive, got rtol {} atol {}",
                self.rtol, self.atol
            )));
        }
        if self.max_steps == 0 {
            return Err(FlowError::InvalidConfig(String::from("max_steps must be at least 1")));
        }
        if let Some(s) = self.singular_stop {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(FlowError::InvalidConfig(format!(
                    "singular_stop must be a finite nonnegative number, got {s}"
                )));
            }
        }
        Ok(())
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Reached `t_end`.
    Completed,
    /// Classification turned singular, or the field became impossible to
    /// construct where the flow was headed.
    SingularLocus,
    /// Step size fell below the collapse floor (or the step budget ran out)
    /// under ordinary error control.
    StepCollapse,
    /// A state or integral value left the finite range.
    NonFinite,
}

impl Termination {
    pub fn label(self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::SingularLocus => "singular-locus",
            Termination::StepCollapse => "step-collapse",
            Termination::NonFinite => "nonfinite",
        }
    }
}

/// Accepted states of one run, with the integral values at each.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub integral_values: Vec<Vec<f64>>,
    pub termination: Termination,
    /// Accepted steps (recorded states minus the initial one).
    pub steps: usize,
    /// Rejected trial steps (adaptive only).
    pub rejected: usize,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("a trajectory always holds the initial state")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("a trajectory always holds the initial state")
    }
}

/// Worst-case drift of one integral over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralDrift {
    pub name: String,
    pub initial: f64,
    pub max_abs_drift: f64,
    /// Absolute drift over `1 + |initial|`.
    pub max_rel_drift: f64,
}

/// Conservation quality of one run.
#[derive(Debug, Clone)]
pub struct ConservationReport {
    pub integrals: Vec<IntegralDrift>,
    pub steps: usize,
    pub rejected: usize,
    pub termination: Termination,
}

/// Drift statistics of every integral over a recorded trajectory.
pub fn conservation_report(traj: &Trajectory) -> ConservationReport {
    let n = traj.integral_values.first().map_or(0, Vec::len);
    let mut integrals = Vec::with_capacity(n);
    for j in 0..n {
        let initial = traj.integral_values[0][j];
        let mut max_abs = 0.0_f64;
        for row in &traj.integral_values {
            max_abs = max_abs.max((row[j] - initial).abs());
        }
        integrals.push(IntegralDrift {
            name: format!("f{}", j + 1),
            initial,
            max_abs_drift: max_abs,
            max_rel_drift: max_abs / (1.0 + initial.abs()),
        });
    }
    ConservationReport {
        integrals,
        steps: traj.steps,
        rejected: traj.rejected,
        termination: traj.termination,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowError {
    InvalidConfig(String),
    /// The field could not be evaluated at the starting point.
    StartFailure(FieldError),
    /// A run that was required to reach its horizon ended early.
    EarlyTermination(Termination),
}

impl core::fmt::Display for FlowError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FlowError::InvalidConfig(msg) => write!(f, "invalid integrator configuration: {msg}"),
            FlowError::StartFailure(e) => write!(f, "field evaluation failed at the start: {e}"),
            FlowError::EarlyTermination(t) => {
                write!(f, "integration ended early: {}", t.label())
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FlowError {}

// Dormand-Prince 5(4) coefficients. B5 propagates (local extrapolation),
// B5 - B4 is the error estimate; stage 7 equals the next step's stage 1.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Map a mid-run field failure to the termination it indicates.
fn failure_kind(e: &FieldError) -> Termination {
    match e {
        FieldError::SingularLocus { .. }
        | FieldError::InconsistentDrift { .. }
        | FieldError::DegenerateKernel
        | FieldError::KernelResidual { .. }
        | FieldError::SolveFailed => Termination::SingularLocus,
        FieldError::Eval(_) | FieldError::Bracket(_) => Termination::NonFinite,
    }
}

struct Recorder {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    integral_values: Vec<Vec<f64>>,
}

impl Recorder {
    /// Evaluate and record the integrals at an accepted state. `false`
    /// means a value was not finite and nothing was recorded.
    fn record(&mut self, model: &FieldModel, t: f64, state: &[f64]) -> bool {
        match model.integral_values(state) {
            Ok(vals) if vals.iter().all(|v| v.is_finite()) => {
                self.times.push(t);
                self.states.push(state.to_vec());
                self.integral_values.push(vals);
                true
            }
            _ => false,
        }
    }
}

/// Integrate the model's field from `start`.
///
/// Early termination is a normal outcome reported in the trajectory; the
/// error path is reserved for invalid configuration and for a field that
/// cannot even be evaluated at `start`.
pub fn integrate(
    model: &FieldModel,
    start: &[f64],
    config: &IntegratorConfig,
) -> Result<Trajectory, FlowError> {
    config.validate()?;
    let first = model.sample(start).map_err(FlowError::StartFailure)?;
    let mut rec = Recorder { times: Vec::new(), states: Vec::new(), integral_values: Vec::new() };
    if !rec.record(model, 0.0, start) {
        return Err(FlowError::StartFailure(FieldError::Eval(EvalError::NonFinite)));
    }
    let stop_level = config.singular_stop.unwrap_or(model.thresholds().det_zero);

    let (termination, steps, rejected) = match config.method {
        Method::Adaptive45 => run_adaptive(model, first, config, stop_level, &mut rec),
        Method::Rk4Fixed => run_rk4(model, first, config, stop_level, &mut rec),
    };

    Ok(Trajectory {
        times: rec.times,
        states: rec.states,
        integral_values: rec.integral_values,
        termination,
        steps,
        rejected,
    })
}

/// True when an accepted sample says the run should stop ahead of the
/// locus: regular points whose scaled determinant has fallen to the stop
/// level. Degenerate points are a working regime, not an approach to one.
fn stop_here(sample: &FieldSample, stop_level: f64) -> bool {
    sample.case == Case::CaseI && sample.s_zero.abs() <= stop_level * sample.s_zero_scale
}

fn run_adaptive(
    model: &FieldModel,
    first: FieldSample,
    config: &IntegratorConfig,
    stop_level: f64,
    rec: &mut Recorder,
) -> (Termination, usize, usize) {
    let t_end = config.t_end;
    let dim = first.point.len();
    let mut t = 0.0_f64;
    let mut y = first.point.clone();
    let mut fsal = first;
    let mut h = config.dt.unwrap_or(t_end / 1000.0).min(t_end);
    let mut accepted = 0_usize;
    let mut rejected = 0_usize;
    // what drove the most recent shrink, reported if the step collapses
    let mut last_failure = Termination::StepCollapse;

    let mut ks: [Vec<f64>; 7] =
        [Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    while t < t_end {
        if accepted >= config.max_steps {
            return (Termination::StepCollapse, accepted, rejected);
        }
        if !h.is_finite() {
            return (Termination::NonFinite, accepted, rejected);
        }
        if h < MIN_STEP_FRACTION * t_end {
            return (last_failure, accepted, rejected);
        }
        let at_horizon = h >= t_end - t;
        if at_horizon {
            h = t_end - t;
        }

        ks[0] = fsal.velocity.clone();
        let stage = |coeffs: &[f64], ks: &[Vec<f64>; 7]| -> Vec<f64> {
            let mut p = y.clone();
            for (s, &c) in coeffs.iter().enumerate() {
                if c != 0.0 {
                    for i in 0..dim {
                        p[i] += h * c * ks[s][i];
                    }
                }
            }
            p
        };
        // trial stages; any failure shrinks the step and retries
        let mut failed: Option<Termination> = None;
        let rows: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
        for (s, row) in rows.iter().enumerate() {
            let p = stage(row, &ks);
            match model.velocity(&p) {
                Ok(v) => ks[s + 1] = v,
                Err(e) => {
                    failed = Some(failure_kind(&e));
                    break;
                }
            }
        }
        let next_sample = if failed.is_none() {
            let y5 = stage(&B5, &ks);
            if y5.iter().all(|v| v.is_finite()) {
                match model.sample(&y5) {
                    Ok(s) => Some((y5, s)),
                    Err(e) => {
                        failed = Some(failure_kind(&e));
                        None
                    }
                }
            } else {
                failed = Some(Termination::NonFinite);
                None
            }
        } else {
            None
        };
        if let Some(kind) = failed {
            last_failure = kind;
            rejected += 1;
            h *= 0.2;
            continue;
        }
        let (y5, y5_sample) = next_sample.expect("stages succeeded");
        ks[6] = y5_sample.velocity.clone();

        // weighted RMS error of the embedded pair
        let mut err_sq = 0.0_f64;
        for i in 0..dim {
            let mut e = 0.0;
            for s in 0..7 {
                let w = B5[s] - B4[s];
                if w != 0.0 {
                    e += w * ks[s][i];
                }
            }
            e *= h;
            let sc = config.atol + config.rtol * y[i].abs().max(y5[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = math::sqrt(err_sq / dim as f64);

        if err <= 1.0 {
            t = if at_horizon { t_end } else { t + h };
            y = y5;
            accepted += 1;
            if !rec.record(model, t, &y) {
                return (Termination::NonFinite, accepted, rejected);
            }
            if stop_here(&y5_sample, stop_level) {
                return (Termination::SingularLocus, accepted, rejected);
            }
            fsal = y5_sample;
            last_failure = Termination::StepCollapse;
            let factor =
                if err == 0.0 { 5.0 } else { (0.9 * math::pow(1.0 / err, 0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            rejected += 1;
            last_failure = Termination::StepCollapse;
            let factor =
                if err.is_finite() { (0.9 * math::pow(1.0 / err, 0.2)).clamp(0.2, 1.0) } else { 0.2 };
            h *= factor;
        }
    }
    (Termination::Completed, accepted, rejected)
}

fn run_rk4(
    model: &FieldModel,
    first: FieldSample,
    config: &IntegratorConfig,
    stop_level: f64,
    rec: &mut Recorder,
) -> (Termination, usize, usize) {
    let t_end = config.t_end;
    let dt = config.dt.expect("validated");
    let dim = first.point.len();
    let mut t = 0.0_f64;
    let mut y = first.point.clone();
    let mut current = first;
    let mut accepted = 0_usize;

    while t < t_end {
        if accepted >= config.max_steps {
            return (Termination::StepCollapse, accepted, 0);
        }
        let at_horizon = dt >= t_end - t;
        let h = if at_horizon { t_end - t } else { dt };

        let k1 = current.velocity.clone();
        let shifted = |k: &[f64], w: f64, y: &[f64]| -> Vec<f64> {
            (0..dim).map(|i| y[i] + h * w * k[i]).collect()
        };
        let k2 = match model.velocity(&shifted(&k1, 0.5, &y)) {
            Ok(v) => v,
            Err(e) => return (failure_kind(&e), accepted, 0),
        };
        let k3 = match model.velocity(&shifted(&k2, 0.5, &y)) {
            Ok(v) => v,
            Err(e) => return (failure_kind(&e), accepted, 0),
        };
        let k4 = match model.velocity(&shifted(&k3, 1.0, &y)) {
            Ok(v) => v,
            Err(e) => return (failure_kind(&e), accepted, 0),
        };
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return (Termination::NonFinite, accepted, 0);
        }
        t = if at_horizon { t_end } else { t + h };
        accepted += 1;
        if !rec.record(model, t, &y) {
            return (Termination::NonFinite, accepted, 0);
        }
        match model.sample(&y) {
            Ok(s) => {
                if stop_here(&s, stop_level) {
                    return (Termination::SingularLocus, accepted, 0);
                }
                current = s;
            }
            Err(e) => return (failure_kind(&e), accepted, 0),
        }
    }
    (Termination::Completed, accepted, 0)
}

/// Empirical convergence order of the fixed-step method on this problem:
/// compares errors at steps `dt` and `dt/2` against a `dt/8` reference.
pub fn convergence_order(
    model: &FieldModel,
    start: &[f64],
    dt: f64,
    t_end: f64,
) -> Result<f64, FlowError> {
    let run = |step: f64| -> Result<Vec<f64>, FlowError> {
        let traj = integrate(model, start, &IntegratorConfig::fixed(step, t_end))?;
        if traj.termination != Termination::Completed {
            return Err(FlowError::EarlyTermination(traj.termination));
        }
        Ok(traj.final_state().to_vec())
    };
    let reference = run(dt / 8.0)?;
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        math::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
    };
    let e1 = dist(&run(dt)?, &reference);
    let e2 = dist(&run(dt / 2.0)?, &reference);
    Ok(math::ln(e1 / e2) / math::ln(2.0))
}
