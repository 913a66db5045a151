//! Observable-level studies: ordering-difference surfaces for the
//! equal-and-opposite kick pair, qubit-map regimes, and Gaussian pulse-width
//! and observation-time scans.
//!
//! Grid evaluations run on the rayon pool; results are always returned in
//! input order.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ode::{evolve, evolve_nto_reference, evolve_to_times, IntegratorConfig};
use crate::propagators::nto_propagator;
use crate::pulses::{Pulse, Representation, Schedule};
use crate::su2::{PauliAxis, StateVector};

/// One point of the ordering-difference surface, `eps = sin(dE t_- / 2)`,
/// `phi = 2 alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub epsilon: f64,
    pub phi: f64,
    pub p2_ordered: f64,
    pub p2_nto: f64,
    /// `p2_ordered - p2_nto`.
    pub difference: f64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_nan() || epsilon.abs() > 1.0 {
        return Err(Error::invalid(format!(
            "epsilon is a sine and must lie in [-1, 1], got {epsilon}"
        )));
    }
    Ok(())
}

/// Time-ordered transfer probability of the pair, `(eps sin phi)^2`.
pub fn p2_ordered(epsilon: f64, phi: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok((epsilon * phi.sin()).powi(2))
}

/// Transfer probability without time ordering, `sin^2(eps phi)`.
pub fn p2_nto(epsilon: f64, phi: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok((epsilon * phi).sin().powi(2))
}

pub fn surface_point(epsilon: f64, phi: f64) -> Result<SurfacePoint> {
    let p2_ordered = p2_ordered(epsilon, phi)?;
    let p2_nto = p2_nto(epsilon, phi)?;
    Ok(SurfacePoint {
        epsilon,
        phi,
        p2_ordered,
        p2_nto,
        difference: p2_ordered - p2_nto,
    })
}

/// Cartesian product of the grids, `epsilon` outer and `phi` inner.
pub fn ordering_difference_surface(
    eps_grid: &[f64],
    phi_grid: &[f64],
) -> Result<Vec<SurfacePoint>> {
    let pairs: Vec<(f64, f64)> = eps_grid
        .iter()
        .flat_map(|&e| phi_grid.iter().map(move |&p| (e, p)))
        .collect();
    pairs
        .par_iter()
        .map(|&(e, p)| surface_point(e, p))
        .collect()
}

/// `n` evenly spaced points from `min` by `step` up to `max` inclusive
/// (to within a relative 1e-9 of a step).
pub fn stepped_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && step.is_finite() && step > 0.0 && max >= min) {
        return Err(Error::invalid(format!(
            "bad grid min = {min}, max = {max}, step = {step}"
        )));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| (min + step * k as f64).min(max)).collect())
}

/// `count` points linearly spaced over `[min, max]`, endpoints included.
pub fn linear_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(min.is_finite() && max.is_finite() && max > min) {
        return Err(Error::invalid(format!(
            "bad linear grid [{min}, {max}] with {count} points"
        )));
    }
    let step = (max - min) / (count - 1) as f64;
    Ok((0..count)
        .map(|k| {
            if k + 1 == count {
                max
            } else {
                min + step * k as f64
            }
        })
        .collect())
}

/// Default epsilon grid: `[0, 1]` in steps of 0.02.
pub fn default_epsilon_grid() -> Vec<f64> {
    stepped_grid(0.0, 1.0, 0.02).expect("static grid")
}

/// Default phi grid: `[0, 2 pi]` in steps of 0.05.
pub fn default_phi_grid() -> Vec<f64> {
    stepped_grid(0.0, 2.0 * PI, 0.05).expect("static grid")
}

/// Qubit-map region in the `(dE tau / 2, int V dt)` phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapRegime {
    /// Weak pulse, slow compared to the splitting.
    Perturbative,
    /// Weak pulse, fast compared to the splitting.
    KickedPerturbative,
    /// Strong pulse, fast compared to the splitting.
    KickedAdiabatic,
    /// Strong and slow.
    Adiabatic,
    /// Either phase between the small and large thresholds.
    Intermediate,
}

impl MapRegime {
    pub fn name(self) -> &'static str {
        match self {
            MapRegime::Perturbative => "perturbative",
            MapRegime::KickedPerturbative => "kicked-perturbative",
            MapRegime::KickedAdiabatic => "kicked-adiabatic",
            MapRegime::Adiabatic => "adiabatic",
            MapRegime::Intermediate => "intermediate",
        }
    }
}

/// Phases below this fraction of `2 pi` count as small.
pub const SMALL_PHASE: f64 = 0.2 * 2.0 * PI;
/// Phases above this multiple of `2 pi` count as large.
pub const LARGE_PHASE: f64 = 5.0 * 2.0 * PI;

#[derive(PartialEq)]
enum Size {
    Small,
    Large,
    Middle,
}

fn size(phase: f64) -> Size {
    if phase < SMALL_PHASE {
        Size::Small
    } else if phase > LARGE_PHASE {
        Size::Large
    } else {
        Size::Middle
    }
}

/// Classifies `(dE tau / 2, int V dt)`. The thresholds are a presentation
/// heuristic: small below `0.2 * 2 pi`, large above `5 * 2 pi`.
pub fn classify_regime(half_split_phase: f64, strength_phase: f64) -> Result<MapRegime> {
    if !(half_split_phase >= 0.0 && strength_phase >= 0.0) {
        return Err(Error::invalid(format!(
            "map phases must be non-negative, got ({half_split_phase}, {strength_phase})"
        )));
    }
    Ok(match (size(half_split_phase), size(strength_phase)) {
        (Size::Small, Size::Small) => MapRegime::KickedPerturbative,
        (Size::Small, Size::Large) => MapRegime::KickedAdiabatic,
        (Size::Large, Size::Large) => MapRegime::Adiabatic,
        (Size::Large, Size::Small) => MapRegime::Perturbative,
        _ => MapRegime::Intermediate,
    })
}

/// A single X-coupled Gaussian pulse of strength `alpha` centered at `t_k`,
/// observed from `t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianStudy {
    pub delta_e: f64,
    pub alpha: f64,
    pub t_k: f64,
    pub t0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickLimitRow {
    pub tau: f64,
    pub p2_rk4_ordered: f64,
    pub p2_nto_interaction: f64,
    pub p2_nto_schrodinger: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationRow {
    pub tf: f64,
    pub p2_ordered: f64,
    pub p2_nto_schrodinger: f64,
    pub p2_nto_interaction: f64,
}

impl GaussianStudy {
    pub fn schedule(&self, tau: f64, tf: f64) -> Result<Schedule> {
        let pulse = Pulse::Gaussian {
            alpha: self.alpha,
            t_k: self.t_k,
            tau,
            axis: PauliAxis::X,
        };
        Schedule::new(self.delta_e, vec![pulse], self.t0, tf)
    }

    /// Rabi period, if the levels are split.
    pub fn rabi_period(&self) -> Option<f64> {
        (self.delta_e != 0.0).then(|| 2.0 * PI / self.delta_e.abs())
    }

    /// Final transfer probability with and without time ordering for each
    /// width, all observed at `tf`. Widths must be positive and descending.
    pub fn kick_limit_scan(&self, taus: &[f64], tf: f64) -> Result<Vec<KickLimitRow>> {
        if taus.iter().any(|&t| t.is_nan() || t <= 0.0) {
            return Err(Error::invalid("pulse widths must be positive"));
        }
        if taus.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("pulse widths must be strictly descending"));
        }
        taus.par_iter()
            .map(|&tau| {
                let s = self.schedule(tau, tf)?;
                let cfg = IntegratorConfig::default_for(&s, Representation::Interaction);
                let cfg = IntegratorConfig {
                    record_every: usize::MAX,
                    ..cfg
                };
                let ordered = evolve(&s, &cfg, &StateVector::ground())?.final_p2();
                let nto_i = nto_propagator(&s, Representation::Interaction)?
                    .m21
                    .norm_sqr();
                let nto_s = nto_propagator(&s, Representation::Schrodinger)?
                    .m21
                    .norm_sqr();
                Ok(KickLimitRow {
                    tau,
                    p2_rk4_ordered: ordered,
                    p2_nto_interaction: nto_i,
                    p2_nto_schrodinger: nto_s,
                })
            })
            .collect()
    }

    /// Transfer probabilities against observation time for one width.
    /// Times must be ascending and not before the pulse center.
    pub fn observation_time_scan(&self, tau: f64, tf_grid: &[f64]) -> Result<Vec<ObservationRow>> {
        let (&first, &last) = match (tf_grid.first(), tf_grid.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Ok(Vec::new()),
        };
        if first < self.t_k {
            return Err(Error::invalid(format!(
                "observation times must not precede the pulse center {}",
                self.t_k
            )));
        }
        if tf_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("observation times must be ascending"));
        }
        let s = self.schedule(tau, last)?;
        let cfg = IntegratorConfig::default_for(&s, Representation::Interaction);
        let ((ordered, nto_s), nto_i) = rayon::join(
            || {
                rayon::join(
                    || evolve_to_times(&s, &cfg, &StateVector::ground(), tf_grid),
                    || evolve_nto_reference(&s, Representation::Schrodinger, tf_grid),
                )
            },
            || evolve_nto_reference(&s, Representation::Interaction, tf_grid),
        );
        let (ordered, nto_s, nto_i) = (ordered?, nto_s?, nto_i?);
        Ok(tf_grid
            .iter()
            .enumerate()
            .map(|(k, &tf)| ObservationRow {
                tf,
                p2_ordered: ordered[k].a2.norm_sqr(),
                p2_nto_schrodinger: nto_s[k].1,
                p2_nto_interaction: nto_i[k].1,
            })
            .collect())
    }
}

/// Width ladder `tau / T in {1/2, 1/4, ..., 1/256}` for a Rabi period `T`.
pub fn default_tau_ladder(rabi_period: f64) -> Vec<f64> {
    (1..=8)
        .map(|k| rabi_period / f64::from(1u32 << k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn closed_form_probabilities() {
        assert_eq!(p2_ordered(0.0, 1.3).unwrap(), 0.0);
        assert!((p2_ordered(1.0, FRAC_PI_2).unwrap() - 1.0).abs() < 1e-15);
        assert!((p2_ordered(0.5, FRAC_PI_2).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(p2_nto(0.0, 2.0).unwrap(), 0.0);
        assert!((p2_nto(1.0, FRAC_PI_2).unwrap() - 1.0).abs() < 1e-15);
        assert!((p2_nto(0.5, PI).unwrap() - 1.0).abs() < 1e-15);
        assert!(p2_ordered(1.5, 0.1).is_err());
        assert!(p2_nto(-1.01, 0.1).is_err());
    }

    #[test]
    fn surface_layout() {
        let pts = ordering_difference_surface(&[0.0, 0.5], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[1].epsilon, pts[1].phi), (0.0, 1.0));
        assert_eq!((pts[3].epsilon, pts[3].phi), (0.5, 0.0));
        assert_eq!(pts[0].difference, 0.0);
    }

    #[test]
    fn default_grids() {
        let e = default_epsilon_grid();
        assert_eq!(e.len(), 51);
        assert_eq!(*e.last().unwrap(), 1.0);
        let p = default_phi_grid();
        assert_eq!(p.len(), 126);
        assert!(*p.last().unwrap() <= 2.0 * PI);
        assert!(stepped_grid(1.0, 0.0, 0.1).is_err());
        assert_eq!(linear_grid(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn regimes() {
        assert_eq!(
            classify_regime(0.01, 0.01).unwrap(),
            MapRegime::KickedPerturbative
        );
        assert_eq!(classify_regime(100.0, 100.0).unwrap(), MapRegime::Adiabatic);
        assert_eq!(
            classify_regime(0.01, 100.0).unwrap(),
            MapRegime::KickedAdiabatic
        );
        assert_eq!(
            classify_regime(100.0, 0.01).unwrap(),
            MapRegime::Perturbative
        );
        assert_eq!(
            classify_regime(2.0 * PI, 0.01).unwrap(),
            MapRegime::Intermediate
        );
        assert!(classify_regime(-1.0, 0.0).is_err());
        assert!(classify_regime(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn scan_preconditions() {
        let st = GaussianStudy {
            delta_e: 1.0,
            alpha: 1.0,
            t_k: 3.0,
            t0: 0.0,
        };
        assert!(st.kick_limit_scan(&[0.1, 0.2], 6.0).is_err());
        assert!(st.kick_limit_scan(&[0.1, -0.2], 6.0).is_err());
        assert!(st.observation_time_scan(0.1, &[2.0, 4.0]).is_err());
        assert!(st.observation_time_scan(0.1, &[5.0, 4.0]).is_err());
        assert!(st.observation_time_scan(0.1, &[]).unwrap().is_empty());
    }

    #[test]
    fn observation_scan_plateaus() {
        let st = GaussianStudy {
            delta_e: 1.0,
            alpha: 1.0,
            t_k: 3.0,
            t0: 0.0,
        };
        let grid = linear_grid(3.0 + 10.0 * 0.1, 12.0, 12).unwrap();
        let rows = st.observation_time_scan(0.1, &grid).unwrap();
        for r in &rows[1..] {
            assert!((r.p2_nto_interaction - rows[0].p2_nto_interaction).abs() < 1e-12);
            assert!((r.p2_ordered - rows[0].p2_ordered).abs() < 1e-10);
        }
    }

    #[test]
    fn ladder() {
        let l = default_tau_ladder(256.0);
        assert_eq!(l, vec![128.0, 64.0, 32.0, 16.0, 8.0, 4.0, 2.0, 1.0]);
    }
}
