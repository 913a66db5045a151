//! Second-order Dyson terms in the interaction picture.
//!
//! Through second order,
//!
//! ```text
//! U = I - i int V - int_{t2 < t1} V(t1) V(t2) + ...
//! ```
//!
//! Splitting `V(t1) V(t2)` into its symmetric half and `1/2 [V(t1), V(t2)]`
//! turns the ordered term into `-1/2 (int V)^2` (no time ordering) plus the
//! ordered commutator integral, which carries every ordering effect at this
//! order. The same split written with step functions is
//! `Theta(t1 - t2) = 1/2 + 1/2 sgn(t1 - t2)`.

use crate::error::{Error, Result};
use crate::pulses::{
    coupling_integral, coupling_operator, interaction_potential, Pulse, Representation, Schedule,
};
use crate::quadrature::adaptive_simpson;
use crate::su2::{Matrix2, PauliAxis};

/// Per-entry absolute tolerance of each nested quadrature level.
pub const NESTED_TOL: f64 = 1e-9;

/// The five second-order matrices of one schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderBreakdown {
    /// Identity.
    pub zeroth: Matrix2,
    /// `-i int V`.
    pub first: Matrix2,
    /// `-int_{t2 < t1} V(t1) V(t2)`.
    pub second_ordered: Matrix2,
    /// `-1/2 (int V)^2`.
    pub second_nto: Matrix2,
    /// `-1/2 int_{t2 < t1} [V(t1), V(t2)]`.
    pub commutator_correction: Matrix2,
}

impl SecondOrderBreakdown {
    /// `max |second_ordered - second_nto - commutator_correction|`.
    pub fn identity_residual(&self) -> f64 {
        (self.second_ordered - self.second_nto).max_abs_diff(&self.commutator_correction)
    }

    /// `I + first + second_ordered`.
    pub fn truncated_propagator(&self) -> Matrix2 {
        self.zeroth + self.first + self.second_ordered
    }
}

/// Ordered second-order expansion of the schedule over `[t0, tf]`.
///
/// All-kick schedules use exact finite sums (coincident kicks weigh 1/2);
/// smooth schedules use nested adaptive Simpson. Mixed schedules are rejected.
pub fn dyson_second_order(s: &Schedule) -> Result<SecondOrderBreakdown> {
    match classify(s)? {
        Path::Kicks => Ok(kick_breakdown(s)),
        Path::Smooth => Ok(smooth_breakdown(s)),
    }
}

enum Path {
    Kicks,
    Smooth,
}

fn classify(s: &Schedule) -> Result<Path> {
    match (s.has_kicks(), s.has_smooth_pulses()) {
        (true, true) => Err(Error::KickNotAllowed(
            "second-order quadrature of mixed kick and smooth schedules",
        )),
        (true, false) => Ok(Path::Kicks),
        _ => Ok(Path::Smooth),
    }
}

const MINUS_I: num_complex::Complex64 = num_complex::Complex64::new(0.0, -1.0);

/// Kicks inside the closed window as `(t_k, alpha M(t_k))`.
fn kick_terms(s: &Schedule) -> Vec<(f64, Matrix2)> {
    s.pulses()
        .iter()
        .filter_map(|p| match *p {
            Pulse::DeltaKick { alpha, t_k, axis } if s.t0() <= t_k && t_k <= s.tf() => Some((
                t_k,
                coupling_operator(axis, s.delta_e(), t_k, Representation::Interaction)
                    .scale_re(alpha),
            )),
            _ => None,
        })
        .collect()
}

fn step_weight(t1: f64, t2: f64) -> f64 {
    if t1 > t2 {
        1.0
    } else if t1 == t2 {
        0.5
    } else {
        0.0
    }
}

fn kick_breakdown(s: &Schedule) -> SecondOrderBreakdown {
    let terms = kick_terms(s);
    let total = terms.iter().fold(Matrix2::zero(), |acc, (_, m)| acc + *m);
    let mut ordered = Matrix2::zero();
    let mut commutators = Matrix2::zero();
    for (ti, mi) in &terms {
        for (tj, mj) in &terms {
            let w = step_weight(*ti, *tj);
            if w > 0.0 {
                ordered = ordered + (*mi * *mj).scale_re(w);
                commutators = commutators + mi.commutator(mj).scale_re(w);
            }
        }
    }
    SecondOrderBreakdown {
        zeroth: Matrix2::identity(),
        first: total.scale(MINUS_I),
        second_ordered: -ordered,
        second_nto: (total * total).scale_re(-0.5),
        commutator_correction: commutators.scale_re(-0.5),
    }
}

/// Support edges of every pulse clipped to the window, sorted.
fn breakpoints(s: &Schedule) -> Vec<f64> {
    let mut pts = vec![s.t0(), s.tf()];
    for p in s.pulses() {
        let (lo, hi) = p.support();
        for t in [lo, hi] {
            if t > s.t0() && t < s.tf() {
                pts.push(t);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn panels_for(s: &Schedule, a: f64, b: f64) -> usize {
    24 + (s.delta_e() * (b - a)).abs().ceil().min(1e6) as usize
}

/// Outer integral over `t1` of `f(t1, V(t1), W(t1))`, `W(t1) = int_{t0}^{t1} V`,
/// split at pulse-support edges.
fn outer_integral<T, F>(s: &Schedule, f: F) -> T
where
    T: crate::quadrature::Quadrand,
    F: Fn(Matrix2, Matrix2) -> T,
{
    let pts = breakpoints(s);
    let mut total = T::zero();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let piece = adaptive_simpson(
            |t1| {
                let v = interaction_potential(s, t1).unwrap_or_else(|_| Matrix2::zero());
                let inner = coupling_integral(s, Representation::Interaction, s.t0(), t1);
                f(v, inner)
            },
            a,
            b,
            NESTED_TOL,
            panels_for(s, a, b),
        );
        total = total.add(piece);
    }
    total
}

fn smooth_breakdown(s: &Schedule) -> SecondOrderBreakdown {
    let total = coupling_integral(s, Representation::Interaction, s.t0(), s.tf());
    let (ordered, commutators): (Matrix2, Matrix2) =
        outer_integral(s, |v, w| (v * w, v.commutator(&w)));
    SecondOrderBreakdown {
        zeroth: Matrix2::identity(),
        first: total.scale(MINUS_I),
        second_ordered: -ordered,
        second_nto: (total * total).scale_re(-0.5),
        commutator_correction: commutators.scale_re(-0.5),
    }
}

/// `Theta(t1 - t2) = average + ordering` with `average = 1/2` and
/// `ordering = sgn(t1 - t2) / 2`. Coincident times are rejected.
pub fn theta_split_weights(t1: f64, t2: f64) -> Result<(f64, f64)> {
    if t1 == t2 {
        return Err(Error::invalid("theta split is undefined at t1 = t2"));
    }
    Ok((0.5, if t1 > t2 { 0.5 } else { -0.5 }))
}

/// The second-order term `-int int Theta(t1 - t2) V(t1) V(t2)` over the full
/// square, split by the two theta weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSplit {
    /// Constant weight 1/2: reproduces `second_nto`.
    pub average_part: Matrix2,
    /// Weight `sgn / 2`: reproduces `commutator_correction`.
    pub ordering_part: Matrix2,
}

/// Recomputes the second-order term over the full square with the
/// `1/2 + sgn/2` weights instead of the simplex.
pub fn theta_split_second_order(s: &Schedule) -> Result<ThetaSplit> {
    match classify(s)? {
        Path::Kicks => {
            let terms = kick_terms(s);
            let mut average = Matrix2::zero();
            let mut ordering = Matrix2::zero();
            for (ti, mi) in &terms {
                for (tj, mj) in &terms {
                    let prod = *mi * *mj;
                    average = average + prod.scale_re(0.5);
                    if ti != tj {
                        let (_, sgn) = theta_split_weights(*ti, *tj)?;
                        ordering = ordering + prod.scale_re(sgn);
                    }
                }
            }
            Ok(ThetaSplit {
                average_part: -average,
                ordering_part: -ordering,
            })
        }
        Path::Smooth => {
            let total = coupling_integral(s, Representation::Interaction, s.t0(), s.tf());
            // int sgn(t1 - t2) V(t2) dt2 over the full window = 2 W(t1) - W(tf).
            let (average, ordering): (Matrix2, Matrix2) =
                outer_integral(s, |v, w| (v * total, v * (w.scale_re(2.0) - total)));
            Ok(ThetaSplit {
                average_part: average.scale_re(-0.5),
                ordering_part: ordering.scale_re(-0.5),
            })
        }
    }
}

/// For X-coupled schedules the commutator correction is diagonal and purely
/// imaginary. Returns `(max |off-diagonal|, max |Re diagonal|)` of the
/// correction; both should vanish to quadrature tolerance. Other couplings
/// are evaluated too, but there the values carry no expectation.
pub fn phase_orthogonality_check(s: &Schedule) -> Result<(f64, f64)> {
    let c = dyson_second_order(s)?.commutator_correction;
    let off = c.m12.norm().max(c.m21.norm());
    let re_diag = c.m11.re.abs().max(c.m22.re.abs());
    Ok((off, re_diag))
}

/// Whether every pulse couples through X (where the orthogonality check applies).
pub fn all_x_coupled(s: &Schedule) -> bool {
    s.pulses().iter().all(|p| p.axis() == PauliAxis::X)
}
