//! Pulse shapes, schedules and the coupling in either picture.
//!
//! The unperturbed Hamiltonian is `H0 = -(dE/2) sigma_z`. The interaction
//! picture coupling is `e^{i H0 t} V_S(t) e^{-i H0 t}`; for an X coupling this
//! is `V(t) [cos(dE t) sigma_x + sin(dE t) sigma_y]`, which puts the phase
//! `e^{-i dE t}` in the (1,2) entry. Every module uses this convention.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::su2::{pauli, Matrix2, PauliAxis};
use crate::TOL_QUAD;

/// Gaussian pulses are treated as supported on `t_k +/- GAUSSIAN_SUPPORT * tau`.
pub const GAUSSIAN_SUPPORT: f64 = 6.0;

/// One external-field pulse. `alpha` is the integrated strength in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pulse {
    DeltaKick {
        alpha: f64,
        t_k: f64,
        axis: PauliAxis,
    },
    /// `V(t) = alpha / (sqrt(pi) tau) exp(-(t - t_k)^2 / tau^2)`.
    Gaussian {
        alpha: f64,
        t_k: f64,
        tau: f64,
        axis: PauliAxis,
    },
    /// `V(t) = alpha / tau` on `[t_start, t_start + tau]`.
    Rectangular {
        alpha: f64,
        t_start: f64,
        tau: f64,
        axis: PauliAxis,
    },
}

/// Which picture an evolution or average is computed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    Schrodinger,
    Interaction,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::Schrodinger => "schrodinger",
            Representation::Interaction => "interaction",
        }
    }
}

impl Pulse {
    pub fn alpha(&self) -> f64 {
        match *self {
            Pulse::DeltaKick { alpha, .. }
            | Pulse::Gaussian { alpha, .. }
            | Pulse::Rectangular { alpha, .. } => alpha,
        }
    }

    pub fn axis(&self) -> PauliAxis {
        match *self {
            Pulse::DeltaKick { axis, .. }
            | Pulse::Gaussian { axis, .. }
            | Pulse::Rectangular { axis, .. } => axis,
        }
    }

    /// Center time for kicks and Gaussians, start time for rectangles.
    pub fn anchor_time(&self) -> f64 {
        match *self {
            Pulse::DeltaKick { t_k, .. } | Pulse::Gaussian { t_k, .. } => t_k,
            Pulse::Rectangular { t_start, .. } => t_start,
        }
    }

    /// Width for finite pulses, `None` for kicks.
    pub fn width(&self) -> Option<f64> {
        match *self {
            Pulse::DeltaKick { .. } => None,
            Pulse::Gaussian { tau, .. } | Pulse::Rectangular { tau, .. } => Some(tau),
        }
    }

    pub fn is_kick(&self) -> bool {
        matches!(self, Pulse::DeltaKick { .. })
    }

    /// Closed support interval (truncated at six widths for Gaussians).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Pulse::DeltaKick { t_k, .. } => (t_k, t_k),
            Pulse::Gaussian { t_k, tau, .. } => {
                (t_k - GAUSSIAN_SUPPORT * tau, t_k + GAUSSIAN_SUPPORT * tau)
            }
            Pulse::Rectangular { t_start, tau, .. } => (t_start, t_start + tau),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.axis() == PauliAxis::Z {
            return Err(Error::ZAxisCoupling);
        }
        if !self.alpha().is_finite() || !self.anchor_time().is_finite() {
            return Err(Error::invalid("pulse strength and time must be finite"));
        }
        if let Some(tau) = self.width() {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(Error::invalid(format!(
                    "pulse width must be positive, got {tau}"
                )));
            }
        }
        Ok(())
    }
}

/// Field amplitude `V(t)` of a finite pulse.
pub fn value_at(p: &Pulse, t: f64) -> Result<f64> {
    match *p {
        Pulse::DeltaKick { .. } => Err(Error::PointwiseKick),
        Pulse::Gaussian {
            alpha, t_k, tau, ..
        } => {
            let x = (t - t_k) / tau;
            Ok(alpha / (PI.sqrt() * tau) * (-x * x).exp())
        }
        Pulse::Rectangular {
            alpha,
            t_start,
            tau,
            ..
        } => {
            if t >= t_start && t <= t_start + tau {
                Ok(alpha / tau)
            } else {
                Ok(0.0)
            }
        }
    }
}

/// `int_{t0}^{t} V(t') dt'` in closed form. Infinite limits are allowed.
///
/// A kick contributes when `t0 <= t_k <= t`.
pub fn integrated_strength(p: &Pulse, t0: f64, t: f64) -> f64 {
    match *p {
        Pulse::DeltaKick { alpha, t_k, .. } => {
            if t0 <= t_k && t_k <= t {
                alpha
            } else {
                0.0
            }
        }
        Pulse::Gaussian {
            alpha, t_k, tau, ..
        } => 0.5 * alpha * (libm::erf((t - t_k) / tau) - libm::erf((t0 - t_k) / tau)),
        Pulse::Rectangular {
            alpha,
            t_start,
            tau,
            ..
        } => {
            let lo = t0.max(t_start);
            let hi = t.min(t_start + tau);
            if hi > lo {
                alpha * (hi - lo) / tau
            } else {
                0.0
            }
        }
    }
}

/// Level splitting, time window and time-sorted pulse list.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    delta_e: f64,
    pulses: Vec<Pulse>,
    t0: f64,
    tf: f64,
}

impl Schedule {
    /// Validates and sorts the pulses by anchor time; ties keep list order.
    pub fn new(delta_e: f64, mut pulses: Vec<Pulse>, t0: f64, tf: f64) -> Result<Self> {
        if !delta_e.is_finite() {
            return Err(Error::invalid("level splitting must be finite"));
        }
        if !(t0.is_finite() && tf.is_finite() && tf > t0) {
            return Err(Error::invalid(format!(
                "need t0 < tf, got t0 = {t0}, tf = {tf}"
            )));
        }
        for p in &pulses {
            p.validate()?;
        }
        pulses.sort_by(|a, b| a.anchor_time().total_cmp(&b.anchor_time()));
        Ok(Self {
            delta_e,
            pulses,
            t0,
            tf,
        })
    }

    pub fn delta_e(&self) -> f64 {
        self.delta_e
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn duration(&self) -> f64 {
        self.tf - self.t0
    }

    /// Same schedule observed over a different window.
    pub fn with_window(&self, t0: f64, tf: f64) -> Result<Self> {
        Self::new(self.delta_e, self.pulses.clone(), t0, tf)
    }

    pub fn with_pulses(&self, pulses: Vec<Pulse>) -> Result<Self> {
        Self::new(self.delta_e, pulses, self.t0, self.tf)
    }

    pub fn has_kicks(&self) -> bool {
        self.pulses.iter().any(Pulse::is_kick)
    }

    pub fn has_smooth_pulses(&self) -> bool {
        self.pulses.iter().any(|p| !p.is_kick())
    }

    /// Narrowest finite pulse width, if any.
    pub fn min_width(&self) -> Option<f64> {
        self.pulses.iter().filter_map(Pulse::width).reduce(f64::min)
    }

    /// Rabi period `2 pi / |dE|`, `None` when degenerate.
    pub fn rabi_period(&self) -> Option<f64> {
        (self.delta_e != 0.0).then(|| 2.0 * PI / self.delta_e.abs())
    }

    /// Pulses whose support leaves `[t0, tf]`. These are reported, not rejected.
    pub fn support_warnings(&self) -> Vec<String> {
        self.pulses
            .iter()
            .enumerate()
            .filter_map(|(i, p)| {
                let (lo, hi) = p.support();
                (lo < self.t0 || hi > self.tf).then(|| {
                    format!(
                        "pulse {i} support [{lo}, {hi}] extends outside the window [{}, {}]",
                        self.t0, self.tf
                    )
                })
            })
            .collect()
    }

    fn reject_kicks(&self, what: &'static str) -> Result<()> {
        if self.has_kicks() {
            Err(Error::KickNotAllowed(what))
        } else {
            Ok(())
        }
    }
}

/// `e^{i H0 t} m e^{-i H0 t}` with `H0 = -(dE/2) sigma_z`.
pub fn rotate_to_interaction(m: &Matrix2, delta_e: f64, t: f64) -> Matrix2 {
    let phase = C64::from_polar(1.0, -delta_e * t);
    Matrix2::new(m.m11, m.m12 * phase, m.m21 * phase.conj(), m.m22)
}

/// Unit coupling operator of `axis` in the requested picture at time `t`.
pub fn coupling_operator(axis: PauliAxis, delta_e: f64, t: f64, rep: Representation) -> Matrix2 {
    let sigma = pauli(axis);
    match rep {
        Representation::Schrodinger => sigma,
        Representation::Interaction => rotate_to_interaction(&sigma, delta_e, t),
    }
}

pub fn free_hamiltonian(delta_e: f64) -> Matrix2 {
    pauli(PauliAxis::Z).scale_re(-0.5 * delta_e)
}

/// `H(t) = -(dE/2) sigma_z + sum_p V_p(t) sigma_p`.
pub fn schrodinger_hamiltonian(s: &Schedule, t: f64) -> Result<Matrix2> {
    s.reject_kicks("the pointwise Hamiltonian")?;
    coupling_sum(s, t, Representation::Schrodinger).map(|v| free_hamiltonian(s.delta_e) + v)
}

/// Interaction-picture potential `e^{i H0 t} V_S(t) e^{-i H0 t}`.
pub fn interaction_potential(s: &Schedule, t: f64) -> Result<Matrix2> {
    s.reject_kicks("the pointwise interaction potential")?;
    coupling_sum(s, t, Representation::Interaction)
}

fn coupling_sum(s: &Schedule, t: f64, rep: Representation) -> Result<Matrix2> {
    let mut total = Matrix2::zero();
    for p in &s.pulses {
        let v = value_at(p, t)?;
        if v != 0.0 {
            total = total + coupling_operator(p.axis(), s.delta_e, t, rep).scale_re(v);
        }
    }
    Ok(total)
}

/// `int_a^b` of one pulse's coupling operator in the given picture.
///
/// Kicks are exact; finite pulses use adaptive Simpson over the part of their
/// support inside `[a, b]`, so the result is bitwise independent of `b` once
/// `b` is past the support.
pub fn pulse_coupling_integral(
    p: &Pulse,
    delta_e: f64,
    rep: Representation,
    a: f64,
    b: f64,
) -> Matrix2 {
    let axis = p.axis();
    if let Pulse::DeltaKick { alpha, t_k, .. } = *p {
        return if a <= t_k && t_k <= b {
            coupling_operator(axis, delta_e, t_k, rep).scale_re(alpha)
        } else {
            Matrix2::zero()
        };
    }
    let (lo, hi) = p.support();
    let (lo, hi) = (lo.max(a), hi.min(b));
    if hi <= lo {
        return Matrix2::zero();
    }
    let oscillation = match rep {
        Representation::Schrodinger => 0.0,
        Representation::Interaction => (delta_e * (hi - lo)).abs(),
    };
    let panels = match p {
        Pulse::Gaussian { .. } => 24,
        _ => 4,
    } + oscillation.ceil().min(1e6) as usize;
    adaptive_simpson(
        |t| {
            // value_at cannot fail for finite pulses.
            let v = value_at(p, t).unwrap_or(0.0);
            coupling_operator(axis, delta_e, t, rep).scale_re(v)
        },
        lo,
        hi,
        TOL_QUAD,
        panels,
    )
}

/// `int_a^b` of the full coupling (all pulses) in the given picture.
/// The free part `H0` is never included.
pub fn coupling_integral(s: &Schedule, rep: Representation, a: f64, b: f64) -> Matrix2 {
    s.pulses
        .iter()
        .map(|p| pulse_coupling_integral(p, s.delta_e, rep, a, b))
        .fold(Matrix2::zero(), |acc, m| acc + m)
}

/// Time average of the coupling over `[t0, tf]`.
///
/// In the Schrodinger picture only `V_S(t) sigma` is averaged; the caller adds
/// the constant `H0` where the full averaged Hamiltonian is wanted.
pub fn time_average(s: &Schedule, rep: Representation) -> Matrix2 {
    coupling_integral(s, rep, s.t0, s.tf).scale_re(1.0 / s.duration())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{dagger, exp_minus_i_hermitian};

    fn gaussian(alpha: f64, t_k: f64, tau: f64) -> Pulse {
        Pulse::Gaussian {
            alpha,
            t_k,
            tau,
            axis: PauliAxis::X,
        }
    }

    fn kick(alpha: f64, t_k: f64) -> Pulse {
        Pulse::DeltaKick {
            alpha,
            t_k,
            axis: PauliAxis::X,
        }
    }

    #[test]
    fn pulse_values() {
        let g = gaussian(PI.sqrt(), 0.0, 1.0);
        assert!((value_at(&g, 0.0).unwrap() - 1.0).abs() < 1e-15);

        let r = Pulse::Rectangular {
            alpha: 2.0,
            t_start: 0.0,
            tau: 4.0,
            axis: PauliAxis::X,
        };
        assert_eq!(value_at(&r, 1.0).unwrap(), 0.5);
        assert_eq!(value_at(&r, 5.0).unwrap(), 0.0);

        assert_eq!(value_at(&kick(1.0, 0.0), 0.0), Err(Error::PointwiseKick));
    }

    #[test]
    fn strengths() {
        assert_eq!(integrated_strength(&kick(0.7, 5.0), 0.0, 10.0), 0.7);
        assert_eq!(integrated_strength(&kick(0.7, 5.0), 0.0, 5.0), 0.7);
        assert_eq!(integrated_strength(&kick(0.7, 5.0), 5.0, 10.0), 0.7);
        assert_eq!(integrated_strength(&kick(0.7, 5.0), 6.0, 10.0), 0.0);

        let g = gaussian(1.0, 0.0, 1.0);
        assert_eq!(
            integrated_strength(&g, f64::NEG_INFINITY, f64::INFINITY),
            1.0
        );
        assert!((integrated_strength(&g, f64::NEG_INFINITY, 0.0) - 0.5).abs() < 1e-15);

        let r = Pulse::Rectangular {
            alpha: 2.0,
            t_start: 0.0,
            tau: 4.0,
            axis: PauliAxis::X,
        };
        assert_eq!(integrated_strength(&r, 0.0, 2.0), 1.0);
    }

    #[test]
    fn schedule_validation_and_ordering() {
        let s = Schedule::new(1.0, vec![kick(0.1, 5.0), kick(0.2, 1.0)], 0.0, 10.0).unwrap();
        assert_eq!(s.pulses()[0].anchor_time(), 1.0);
        assert!(Schedule::new(1.0, vec![], 1.0, 1.0).is_err());
        assert!(Schedule::new(1.0, vec![gaussian(1.0, 0.0, 0.0)], 0.0, 1.0).is_err());
        let z = Pulse::DeltaKick {
            alpha: 1.0,
            t_k: 0.5,
            axis: PauliAxis::Z,
        };
        assert_eq!(
            Schedule::new(1.0, vec![z], 0.0, 1.0),
            Err(Error::ZAxisCoupling)
        );

        let s = Schedule::new(1.0, vec![gaussian(1.0, 1.0, 1.0)], 0.0, 10.0).unwrap();
        assert_eq!(s.support_warnings().len(), 1);
    }

    #[test]
    fn hamiltonians() {
        let free = Schedule::new(2.0, vec![], 0.0, 1.0).unwrap();
        let h = schrodinger_hamiltonian(&free, 0.3).unwrap();
        assert_eq!(h, Matrix2::diag(C64::new(-1.0, 0.0), C64::new(1.0, 0.0)));

        let rect = Pulse::Rectangular {
            alpha: 1.0,
            t_start: 0.0,
            tau: 1.0,
            axis: PauliAxis::X,
        };
        let s = Schedule::new(0.0, vec![rect], -1.0, 2.0).unwrap();
        let h = schrodinger_hamiltonian(&s, 0.5).unwrap();
        assert!(h.max_abs_diff(&pauli(PauliAxis::X)) < 1e-16);

        let g = gaussian(0.8, 0.0, 0.5);
        let s = Schedule::new(2.0, vec![g], -5.0, 5.0).unwrap();
        let peak = 0.8 / (PI.sqrt() * 0.5);
        let expect = -pauli(PauliAxis::Z) + pauli(PauliAxis::X).scale_re(peak);
        assert!(
            schrodinger_hamiltonian(&s, 0.0)
                .unwrap()
                .max_abs_diff(&expect)
                < 1e-15
        );

        let k = Schedule::new(2.0, vec![kick(1.0, 0.0)], -1.0, 1.0).unwrap();
        assert!(matches!(
            schrodinger_hamiltonian(&k, 0.0),
            Err(Error::KickNotAllowed(_))
        ));
        assert!(matches!(
            interaction_potential(&k, 0.0),
            Err(Error::KickNotAllowed(_))
        ));
    }

    #[test]
    fn interaction_potential_matches_conjugation() {
        let g = gaussian(1.3, 0.2, 0.7);
        let de = 1.7;
        let s = Schedule::new(de, vec![g], -5.0, 5.0).unwrap();
        for &t in &[-0.4, 0.0, 0.35, PI / de] {
            // e^{i H0 t} = diag(e^{-i dE t/2}, e^{i dE t/2})
            let r = Matrix2::diag(
                C64::from_polar(1.0, -0.5 * de * t),
                C64::from_polar(1.0, 0.5 * de * t),
            );
            let v = value_at(&g, t).unwrap();
            let expect = (r * pauli(PauliAxis::X) * dagger(&r)).scale_re(v);
            let got = interaction_potential(&s, t).unwrap();
            assert!(got.max_abs_diff(&expect) < 1e-15);
            assert!((got.m12.norm() - v.abs()).abs() < 1e-15);
            assert!(got.hermiticity_defect() < 1e-15 && got.trace().norm() < 1e-15);
        }
        // dE t = pi flips sigma_x.
        let t = PI / de;
        let got = interaction_potential(&s, t).unwrap();
        let v = value_at(&g, t).unwrap();
        assert!(got.max_abs_diff(&pauli(PauliAxis::X).scale_re(-v)) < 1e-15);

        let s0 = Schedule::new(0.0, vec![g], -5.0, 5.0).unwrap();
        assert_eq!(
            interaction_potential(&s0, 0.3).unwrap(),
            pauli(PauliAxis::X).scale_re(value_at(&g, 0.3).unwrap())
        );
    }

    #[test]
    fn kick_pair_average_generates_nto_matrix() {
        let (de, alpha, t1, t2) = (1.1, 0.6, 0.5, 2.0);
        let s = Schedule::new(de, vec![kick(alpha, t1), kick(-alpha, t2)], 0.0, 4.0).unwrap();
        let avg = time_average(&s, Representation::Interaction);
        let eps = (0.5 * de * (t2 - t1)).sin();
        let (gx, gy, gz) = avg.pauli_components();
        let norm = (gx * gx + gy * gy + gz * gz).sqrt();
        assert!((norm - 2.0 * alpha * eps.abs() / 4.0).abs() < 1e-15);
        assert_eq!(gz, 0.0);
        assert!(avg.hermiticity_defect() < 1e-16);
    }

    #[test]
    fn single_kick_average_exponentiates_to_kick() {
        let (de, alpha, tk) = (0.9, 0.45, 1.3);
        let s = Schedule::new(de, vec![kick(alpha, tk)], 0.0, 3.0).unwrap();
        let avg = time_average(&s, Representation::Interaction);
        let u = exp_minus_i_hermitian(&avg.scale_re(s.duration())).unwrap();
        let closed = Matrix2::new(
            C64::new(alpha.cos(), 0.0),
            C64::new(0.0, -alpha.sin()) * C64::from_polar(1.0, -de * tk),
            C64::new(0.0, -alpha.sin()) * C64::from_polar(1.0, de * tk),
            C64::new(alpha.cos(), 0.0),
        );
        assert!(u.max_abs_diff(&closed) < 1e-15);
        let empty = s.with_pulses(vec![]).unwrap();
        assert_eq!(
            time_average(&empty, Representation::Interaction),
            Matrix2::zero()
        );
    }

    #[test]
    fn gaussian_quadrature_matches_closed_forms() {
        let (alpha, tk, tau, de) = (1.2, 0.0, 0.8, 2.5);
        let g = gaussian(alpha, tk, tau);
        let s = Schedule::new(de, vec![g], -10.0, 10.0).unwrap();
        let schr = coupling_integral(&s, Representation::Schrodinger, -10.0, 10.0);
        assert!((schr.m12.re - alpha).abs() < 1e-10);

        // Fourier transform of the Gaussian: alpha exp(-dE^2 tau^2 / 4) e^{-i dE t_k}.
        let int = coupling_integral(&s, Representation::Interaction, -10.0, 10.0);
        let expect = alpha * (-de * de * tau * tau / 4.0).exp();
        assert!((int.m12 - C64::new(expect, 0.0)).norm() < 1e-10);
        assert!((int.m21 - C64::new(expect, 0.0)).norm() < 1e-10);

        // Partial window against erf.
        let part = coupling_integral(&s, Representation::Schrodinger, -10.0, 0.3);
        assert!((part.m12.re - integrated_strength(&g, -10.0, 0.3)).abs() < 1e-10);
    }

    #[test]
    fn degenerate_pictures_coincide() {
        let pulses = vec![
            gaussian(0.4, 1.0, 0.3),
            Pulse::Rectangular {
                alpha: -0.7,
                t_start: 2.0,
                tau: 0.5,
                axis: PauliAxis::Y,
            },
            kick(0.2, 3.0),
        ];
        let s = Schedule::new(0.0, pulses, 0.0, 5.0).unwrap();
        let a = time_average(&s, Representation::Interaction);
        let b = time_average(&s, Representation::Schrodinger);
        assert!(a.max_abs_diff(&b) < 1e-12);
    }
}
