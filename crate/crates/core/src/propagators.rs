//! Closed-form kicked-qubit propagators, NTO propagators and picture changes.
//!
//! Kick propagators are interaction-picture operators: they do not depend on
//! the observation time once all kicks have acted.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pulses::{
    coupling_integral, coupling_operator, free_hamiltonian, Representation, Schedule,
};
use crate::su2::{exp_minus_i_hermitian, Matrix2, PauliAxis};

/// Off-diagonal `t_+` phase coefficient that makes the equal-and-opposite
/// kick closed forms agree with composed single kicks and with the
/// exponentiated time average: `e^{-i dE t_+ / 2}`.
pub const T_PLUS_PHASE_COMPOSED: f64 = 0.5;

/// Literature form of the coefficient for the NTO pair, `e^{-i dE t_+}`.
/// Differs from [`T_PLUS_PHASE_COMPOSED`] only by a diagonal frame phase and
/// leaves every `|U_ij|^2` unchanged.
pub const T_PLUS_PHASE_PRINTED: f64 = 1.0;

/// A delta kick of strength `alpha` at `t_k`, coupling through X or Y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickSpec {
    pub alpha: f64,
    pub t_k: f64,
    pub axis: PauliAxis,
}

impl KickSpec {
    pub fn new(alpha: f64, t_k: f64, axis: PauliAxis) -> Result<Self> {
        if axis == PauliAxis::Z {
            return Err(Error::ZAxisCoupling);
        }
        Ok(Self { alpha, t_k, axis })
    }

    pub fn x(alpha: f64, t_k: f64) -> Self {
        Self {
            alpha,
            t_k,
            axis: PauliAxis::X,
        }
    }

    pub fn y(alpha: f64, t_k: f64) -> Self {
        Self {
            alpha,
            t_k,
            axis: PauliAxis::Y,
        }
    }
}

/// Interaction-picture propagator of a single kick,
/// `cos(alpha) I - i sin(alpha) sigma(t_k)`. For an X kick:
///
/// ```text
/// [ cos a                    -i e^{-i dE t_k} sin a ]
/// [ -i e^{i dE t_k} sin a     cos a                 ]
/// ```
pub fn single_kick(delta_e: f64, k: &KickSpec) -> Result<Matrix2> {
    if k.axis == PauliAxis::Z {
        return Err(Error::ZAxisCoupling);
    }
    let rotated = coupling_operator(k.axis, delta_e, k.t_k, Representation::Interaction);
    let (s, c) = k.alpha.sin_cos();
    Ok(Matrix2::identity().scale_re(c) + rotated.scale(C64::new(0.0, -s)))
}

/// Product of kick propagators, later kicks on the left.
///
/// Kicks must be sorted by time. Kicks at the same instant are merged by
/// summing their generators before exponentiating.
pub fn kick_sequence(delta_e: f64, kicks: &[KickSpec]) -> Result<Matrix2> {
    for w in kicks.windows(2) {
        if w[1].t_k < w[0].t_k {
            return Err(Error::UnsortedKicks {
                later: w[0].t_k,
                earlier: w[1].t_k,
            });
        }
    }
    let mut u = Matrix2::identity();
    for group in kicks.chunk_by(|a, b| a.t_k == b.t_k) {
        let step = match group {
            [k] => single_kick(delta_e, k)?,
            _ => {
                let mut g = Matrix2::zero();
                for k in group {
                    if k.axis == PauliAxis::Z {
                        return Err(Error::ZAxisCoupling);
                    }
                    g = g + coupling_operator(k.axis, delta_e, k.t_k, Representation::Interaction)
                        .scale_re(k.alpha);
                }
                exp_minus_i_hermitian(&g)?
            }
        };
        u = step * u;
    }
    Ok(u)
}

fn check_order(t1: f64, t2: f64) -> Result<()> {
    if t2 < t1 {
        Err(Error::invalid(format!(
            "need t2 >= t1, got t1 = {t1}, t2 = {t2}"
        )))
    } else {
        Ok(())
    }
}

/// Kick `alpha` along X at `t1` followed by `-alpha` at `t2`, in closed form.
pub fn opposite_kick_pair(delta_e: f64, alpha: f64, t1: f64, t2: f64) -> Result<Matrix2> {
    check_order(t1, t2)?;
    Ok(opposite_pair_closed_form(delta_e, alpha, t2 - t1, t1 + t2))
}

/// Closed form of the ordered `+alpha, -alpha` pair in terms of the
/// separation `t_minus = t2 - t1` and `t_plus = t1 + t2`. Any signs allowed.
pub fn opposite_pair_closed_form(delta_e: f64, alpha: f64, t_minus: f64, t_plus: f64) -> Matrix2 {
    let half = 0.5 * delta_e * t_minus;
    let (s, c) = half.sin_cos();
    let cos2a = (2.0 * alpha).cos();
    let off = (2.0 * alpha).sin() * s;
    let frame = C64::from_polar(1.0, -T_PLUS_PHASE_COMPOSED * delta_e * t_plus);
    Matrix2::new(
        C64::from_polar(1.0, -half) * C64::new(c, cos2a * s),
        frame * off,
        -frame.conj() * off,
        C64::from_polar(1.0, half) * C64::new(c, -cos2a * s),
    )
}

/// Closed-form NTO propagator of the `+alpha, -alpha` pair,
/// `exp(-i int V dt)`:
///
/// ```text
/// [ cos(2 a eps)                        e^{-i p dE t_+} sin(2 a eps) ]
/// [ -e^{i p dE t_+} sin(2 a eps)        cos(2 a eps)                 ]
/// ```
///
/// with `eps = sin(dE t_- / 2)` and `p = t_plus_phase`. Use
/// [`T_PLUS_PHASE_COMPOSED`] to match [`nto_propagator`] exactly.
pub fn nto_opposite_pair(
    delta_e: f64,
    alpha: f64,
    t1: f64,
    t2: f64,
    t_plus_phase: f64,
) -> Result<Matrix2> {
    check_order(t1, t2)?;
    Ok(nto_pair_closed_form(
        delta_e,
        alpha,
        t2 - t1,
        t1 + t2,
        t_plus_phase,
    ))
}

/// [`nto_opposite_pair`] in separation variables; any signs allowed.
pub fn nto_pair_closed_form(
    delta_e: f64,
    alpha: f64,
    t_minus: f64,
    t_plus: f64,
    t_plus_phase: f64,
) -> Matrix2 {
    let eps = (0.5 * delta_e * t_minus).sin();
    let (s, c) = (2.0 * alpha * eps).sin_cos();
    let frame = C64::from_polar(1.0, -t_plus_phase * delta_e * t_plus);
    Matrix2::new(
        C64::new(c, 0.0),
        frame * s,
        -frame.conj() * s,
        C64::new(c, 0.0),
    )
}

/// Generator `int H dt` whose exponential is the NTO propagator over `[a, b]`.
///
/// Interaction picture: `int V_I dt`. Schrodinger picture: the full
/// Hamiltonian, `H0 (b - a) + int V_S dt`.
pub fn nto_generator(s: &Schedule, rep: Representation, a: f64, b: f64) -> Matrix2 {
    let coupling = coupling_integral(s, rep, a, b);
    match rep {
        Representation::Interaction => coupling,
        Representation::Schrodinger => free_hamiltonian(s.delta_e()).scale_re(b - a) + coupling,
    }
}

/// `exp(-i Hbar (tf - t0))` with `Hbar` the time-averaged interaction
/// (interaction picture) or time-averaged full Hamiltonian (Schrodinger).
pub fn nto_propagator(s: &Schedule, rep: Representation) -> Result<Matrix2> {
    exp_minus_i_hermitian(&nto_generator(s, rep, s.t0(), s.tf()))
}

/// Converts a propagator from `t0` to `t` into the requested picture from the
/// complementary one: `U_S = e^{-i H0 t} U_I e^{i H0 t0}` and its inverse.
pub fn change_representation(
    u: &Matrix2,
    delta_e: f64,
    t: f64,
    t0: f64,
    to: Representation,
) -> Matrix2 {
    // e^{-i H0 t} = diag(e^{i dE t/2}, e^{-i dE t/2})
    let free = |time: f64| {
        let p = C64::from_polar(1.0, 0.5 * delta_e * time);
        Matrix2::diag(p, p.conj())
    };
    match to {
        Representation::Schrodinger => free(t) * *u * free(-t0),
        Representation::Interaction => free(-t) * *u * free(t0),
    }
}
