//! Fixed-step RK4 integration of the two-state equations for finite pulses.
//!
//! In the Schrodinger picture the integrated system is
//!
//! ```text
//! i da1/dt = -(dE/2) a1 + V(t) a2
//! i da2/dt =  (dE/2) a2 + V(t) a1
//! ```
//!
//! (for an X coupling); in the interaction picture it is `i da/dt = V_I(t) a`.
//! States are never renormalized, so the final norm is a diagnostic.

use num_complex::Complex64 as C64;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pulses::{
    coupling_integral, coupling_operator, free_hamiltonian, value_at, Representation, Schedule,
};
use crate::su2::{apply, exp_minus_i_hermitian, probabilities, Matrix2, StateVector};

/// Hard cap on the number of RK4 steps of one run.
pub const MAX_STEPS: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub representation: Representation,
    /// Keep every `record_every`-th step in the trajectory (the final time is
    /// always kept).
    pub record_every: usize,
}

impl IntegratorConfig {
    /// `dt = min(tau_min / 40, T / 400)` with `T` the Rabi period; falls back
    /// to a thousandth of the window when neither scale exists.
    pub fn default_for(s: &Schedule, representation: Representation) -> Self {
        Self {
            dt: default_step(s),
            representation,
            record_every: 1,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!(
                "step size must be positive, got {}",
                self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        Ok(())
    }

    /// Warns when `dt` exceeds `min(tau_min / 20, T / 200)`.
    pub fn resolution_warnings(&self, s: &Schedule) -> Vec<String> {
        let limit = scale_limit(s, 20.0, 200.0);
        match limit {
            Some(limit) if self.dt > limit => vec![format!(
                "step {} exceeds the resolution threshold {limit}",
                self.dt
            )],
            _ => Vec::new(),
        }
    }
}

fn scale_limit(s: &Schedule, per_width: f64, per_period: f64) -> Option<f64> {
    let a = s.min_width().map(|w| w / per_width);
    let b = s.rabi_period().map(|t| t / per_period);
    match (a, b) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

fn default_step(s: &Schedule) -> f64 {
    scale_limit(s, 40.0, 400.0).unwrap_or(s.duration() / 1000.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// Propagator from `t0` to `tf` in the integration picture.
    pub final_propagator: Matrix2,
}

impl Trajectory {
    pub fn final_state(&self) -> StateVector {
        *self
            .states
            .last()
            .expect("trajectory always holds the initial state")
    }

    pub fn final_p2(&self) -> f64 {
        probabilities(&self.final_state()).1
    }

    /// `|1 - (P1 + P2)|` at the final time.
    pub fn norm_drift(&self) -> f64 {
        (1.0 - self.final_state().norm_sqr()).abs()
    }
}

/// Right-hand side `-i H(t)` for the chosen picture.
struct Generator<'a> {
    schedule: &'a Schedule,
    rep: Representation,
    free: Matrix2,
}

impl<'a> Generator<'a> {
    fn new(schedule: &'a Schedule, rep: Representation) -> Result<Self> {
        if schedule.has_kicks() {
            return Err(Error::KickNotAllowed(
                "RK4 integration; use the kick propagators",
            ));
        }
        let free = match rep {
            Representation::Schrodinger => free_hamiltonian(schedule.delta_e()),
            Representation::Interaction => Matrix2::zero(),
        };
        Ok(Self {
            schedule,
            rep,
            free,
        })
    }

    fn hamiltonian(&self, t: f64) -> Matrix2 {
        let mut h = self.free;
        for p in self.schedule.pulses() {
            let v = value_at(p, t).unwrap_or(0.0);
            if v != 0.0 {
                h = h + coupling_operator(p.axis(), self.schedule.delta_e(), t, self.rep)
                    .scale_re(v);
            }
        }
        h
    }

    fn derivative(&self, t: f64, y: &StateVector) -> StateVector {
        let hy = apply(&self.hamiltonian(t), y);
        let mi = C64::new(0.0, -1.0);
        StateVector::new(mi * hy.a1, mi * hy.a2)
    }
}

fn axpy(y: &StateVector, h: f64, k: &StateVector) -> StateVector {
    StateVector::new(y.a1 + k.a1 * h, y.a2 + k.a2 * h)
}

fn rk4_step(g: &Generator<'_>, t: f64, h: f64, y: &StateVector) -> StateVector {
    let k1 = g.derivative(t, y);
    let k2 = g.derivative(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = g.derivative(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = g.derivative(t + h, &axpy(y, h, &k3));
    StateVector::new(
        y.a1 + (k1.a1 + (k2.a1 + k3.a1) * 2.0 + k4.a1) * (h / 6.0),
        y.a2 + (k1.a2 + (k2.a2 + k3.a2) * 2.0 + k4.a2) * (h / 6.0),
    )
}

fn step_count(span: f64, dt: f64) -> Result<u64> {
    let n = (span / dt).ceil();
    if n.is_nan() || n > MAX_STEPS as f64 {
        return Err(Error::TooManySteps(if n.is_finite() {
            n as u64
        } else {
            u64::MAX
        }));
    }
    Ok((n as u64).max(1))
}

/// Integrates both basis columns from `a` to `b` with at most `dt` per step,
/// calling `record(step, t, columns)` after every step.
fn integrate_columns(
    g: &Generator<'_>,
    a: f64,
    b: f64,
    dt: f64,
    start: [StateVector; 2],
    mut record: impl FnMut(u64, f64, &[StateVector; 2]),
) -> Result<[StateVector; 2]> {
    let n = step_count(b - a, dt)?;
    let h = (b - a) / n as f64;
    let mut cols = start;
    for k in 0..n {
        let t = a + h * k as f64;
        cols = [rk4_step(g, t, h, &cols[0]), rk4_step(g, t, h, &cols[1])];
        let t_next = if k + 1 == n {
            b
        } else {
            a + h * (k + 1) as f64
        };
        record(k + 1, t_next, &cols);
    }
    Ok(cols)
}

fn columns_to_matrix(cols: &[StateVector; 2]) -> Matrix2 {
    Matrix2::new(cols[0].a1, cols[1].a1, cols[0].a2, cols[1].a2)
}

fn combine(cols: &[StateVector; 2], initial: &StateVector) -> StateVector {
    apply(&columns_to_matrix(cols), initial)
}

const BASIS: [StateVector; 2] = [StateVector::ground(), StateVector::excited()];

fn check_initial(initial: &StateVector) -> Result<()> {
    if !initial.is_finite() || !initial.is_normalized(crate::TOL_NORM) {
        return Err(Error::invalid(
            "initial state must be finite and normalized",
        ));
    }
    Ok(())
}

/// RK4 trajectory of `initial` over the schedule window.
pub fn evolve(s: &Schedule, cfg: &IntegratorConfig, initial: &StateVector) -> Result<Trajectory> {
    cfg.validate()?;
    check_initial(initial)?;
    let g = Generator::new(s, cfg.representation)?;
    let every = cfg.record_every as u64;
    let mut times = vec![s.t0()];
    let mut states = vec![*initial];
    let n = step_count(s.duration(), cfg.dt)?;
    let cols = integrate_columns(&g, s.t0(), s.tf(), cfg.dt, BASIS, |k, t, cols| {
        if k % every == 0 || k == n {
            times.push(t);
            states.push(combine(cols, initial));
        }
    })?;
    Ok(Trajectory {
        times,
        states,
        final_propagator: columns_to_matrix(&cols),
    })
}

/// States at each requested time (ascending, all `>= t0`), integrating
/// segment by segment with at most `dt` per step.
pub fn evolve_to_times(
    s: &Schedule,
    cfg: &IntegratorConfig,
    initial: &StateVector,
    times: &[f64],
) -> Result<Vec<StateVector>> {
    cfg.validate()?;
    check_initial(initial)?;
    let g = Generator::new(s, cfg.representation)?;
    let mut out = Vec::with_capacity(times.len());
    let mut t = s.t0();
    let mut cols = BASIS;
    for &target in times {
        if target.is_nan() || target < t {
            return Err(Error::invalid(
                "observation times must be ascending and not before t0",
            ));
        }
        if target > t {
            cols = integrate_columns(&g, t, target, cfg.dt, cols, |_, _, _| {})?;
            t = target;
        }
        out.push(combine(&cols, initial));
    }
    Ok(out)
}

/// NTO transfer probability `|U21|^2` from state 1 for the schedule truncated
/// to `[t0, T_f]`, for each `T_f` in the grid. `T_f = t0` gives zero.
///
/// Coupling integrals are shared between observation times that lie past
/// every pulse, so the values equal per-time [`crate::propagators::nto_generator`] calls bitwise.
pub fn evolve_nto_reference(
    s: &Schedule,
    rep: Representation,
    tf_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if let Some(tf) = tf_grid.iter().find(|tf| tf.is_nan() || **tf < s.t0()) {
        return Err(Error::invalid(format!(
            "observation time {tf} precedes t0 = {}",
            s.t0()
        )));
    }
    let end = s
        .pulses()
        .iter()
        .map(|p| p.support().1)
        .fold(s.t0(), f64::max);
    let mut windows: Vec<f64> = tf_grid.iter().map(|tf| tf.min(end)).collect();
    windows.sort_by(f64::total_cmp);
    windows.dedup();
    let integrals: Vec<Matrix2> = windows
        .par_iter()
        .map(|&b| coupling_integral(s, rep, s.t0(), b))
        .collect();
    tf_grid
        .iter()
        .map(|&tf| {
            let k = windows
                .binary_search_by(|w| w.total_cmp(&tf.min(end)))
                .expect("every window was computed");
            let generator = match rep {
                Representation::Interaction => integrals[k],
                Representation::Schrodinger => {
                    free_hamiltonian(s.delta_e()).scale_re(tf - s.t0()) + integrals[k]
                }
            };
            Ok((tf, exp_minus_i_hermitian(&generator)?.m21.norm_sqr()))
        })
        .collect()
}

/// How informative the Richardson ratio of a [`ConvergenceReport`] is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceFlag {
    /// Differences are well above rounding; the ratio measures the order.
    Clean,
    /// Successive differences are at the rounding floor; the ratio is noise.
    RoundingFloor,
    /// Both differences vanish (no dynamics); the ratio is `NaN`.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub p2_dt: f64,
    pub p2_half_dt: f64,
    pub p2_quarter_dt: f64,
    /// `(P(dt) - P(dt/2)) / (P(dt/2) - P(dt/4))`, about 16 for RK4.
    pub ratio: f64,
    pub flag: ConvergenceFlag,
}

/// Runs [`evolve`] at `dt`, `dt/2` and `dt/4` and forms the Richardson ratio
/// of successive final-`P2` differences.
pub fn convergence_check(
    s: &Schedule,
    cfg: &IntegratorConfig,
    initial: &StateVector,
) -> Result<ConvergenceReport> {
    let run = |dt: f64| -> Result<f64> {
        let c = IntegratorConfig {
            dt,
            record_every: usize::MAX,
            ..*cfg
        };
        Ok(evolve(s, &c, initial)?.final_p2())
    };
    let p2_dt = run(cfg.dt)?;
    let p2_half_dt = run(0.5 * cfg.dt)?;
    let p2_quarter_dt = run(0.25 * cfg.dt)?;
    let coarse = p2_dt - p2_half_dt;
    let fine = p2_half_dt - p2_quarter_dt;
    let floor = 1e3 * f64::EPSILON;
    let flag = if coarse == 0.0 && fine == 0.0 || coarse.abs().max(fine.abs()) < 1e-15 {
        ConvergenceFlag::Degenerate
    } else if fine.abs() < floor {
        ConvergenceFlag::RoundingFloor
    } else {
        ConvergenceFlag::Clean
    };
    let ratio = if flag == ConvergenceFlag::Degenerate {
        f64::NAN
    } else {
        coarse / fine
    };
    Ok(ConvergenceReport {
        p2_dt,
        p2_half_dt,
        p2_quarter_dt,
        ratio,
        flag,
    })
}
