//! Complex 2x2 matrices, two-component states and SU(2) identities.
//!
//! Every propagator in the crate is a [`Matrix2`]. There is no separate
//! propagator or Hamiltonian type; unitarity and hermiticity are checked
//! explicitly where they matter.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::TOL_NORM;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Coupling axis of a Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn name(self) -> &'static str {
        match self {
            PauliAxis::X => "x",
            PauliAxis::Y => "y",
            PauliAxis::Z => "z",
        }
    }
}

/// A 2x2 complex matrix, row-major entries `m11 m12 / m21 m22`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2 {
    pub m11: C64,
    pub m12: C64,
    pub m21: C64,
    pub m22: C64,
}

impl Matrix2 {
    pub const fn new(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Self::new(d1, ZERO, ZERO, d2)
    }

    /// `gx sigma_x + gy sigma_y + gz sigma_z` for real coefficients.
    pub fn from_pauli_components(gx: f64, gy: f64, gz: f64) -> Self {
        Self::new(
            C64::new(gz, 0.0),
            C64::new(gx, -gy),
            C64::new(gx, gy),
            C64::new(-gz, 0.0),
        )
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }

    /// Entry by zero-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> C64 {
        match (row, col) {
            (0, 0) => self.m11,
            (0, 1) => self.m12,
            (1, 0) => self.m21,
            (1, 1) => self.m22,
            _ => panic!("Matrix2 index ({row}, {col}) out of range"),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn trace(&self) -> C64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> C64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn commutator(&self, other: &Matrix2) -> Matrix2 {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Matrix2) -> Matrix2 {
        *self * *other + *other * *self
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix2) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.entries()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max |U^dagger U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        (dagger(self) * *self).max_abs_diff(&Matrix2::identity())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol && (self.det().norm() - 1.0).abs() <= tol
    }

    /// `max |H - H^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&dagger(self))
    }

    /// Real coefficients `(gx, gy, gz)` of the traceless Hermitian part,
    /// so that `H = tr(H)/2 I + g . sigma` for Hermitian `H`.
    pub fn pauli_components(&self) -> (f64, f64, f64) {
        let gx = 0.5 * (self.m12.re + self.m21.re);
        let gy = 0.5 * (self.m21.im - self.m12.im);
        let gz = 0.5 * (self.m11.re - self.m22.re);
        (gx, gy, gz)
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, rhs: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.m11 + rhs.m11,
            self.m12 + rhs.m12,
            self.m21 + rhs.m21,
            self.m22 + rhs.m22,
        )
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, rhs: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.m11 - rhs.m11,
            self.m12 - rhs.m12,
            self.m21 - rhs.m21,
            self.m22 - rhs.m22,
        )
    }
}

impl Neg for Matrix2 {
    type Output = Matrix2;
    fn neg(self) -> Matrix2 {
        self.scale_re(-1.0)
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.m11 * rhs.m11 + self.m12 * rhs.m21,
            self.m11 * rhs.m12 + self.m12 * rhs.m22,
            self.m21 * rhs.m11 + self.m22 * rhs.m21,
            self.m21 * rhs.m12 + self.m22 * rhs.m22,
        )
    }
}

impl Mul<StateVector> for Matrix2 {
    type Output = StateVector;
    fn mul(self, s: StateVector) -> StateVector {
        apply(&self, &s)
    }
}

/// Amplitude pair `(a1, a2)` on the basis `|1> = (1, 0)`, `|2> = (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub a1: C64,
    pub a2: C64,
}

impl StateVector {
    pub const fn new(a1: C64, a2: C64) -> Self {
        Self { a1, a2 }
    }

    /// The initially occupied state `(1, 0)`.
    pub const fn ground() -> Self {
        Self::new(ONE, ZERO)
    }

    pub const fn excited() -> Self {
        Self::new(ZERO, ONE)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a1.norm_sqr() + self.a2.norm_sqr()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn is_finite(&self) -> bool {
        [self.a1, self.a2]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// A real unit vector; construction rejects vectors whose norm deviates from
/// one by more than [`TOL_NORM`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3 {
    ux: f64,
    uy: f64,
    uz: f64,
}

impl UnitVector3 {
    pub fn new(ux: f64, uy: f64, uz: f64) -> Result<Self> {
        let n2 = ux * ux + uy * uy + uz * uz;
        if !n2.is_finite() || (n2 - 1.0).abs() > TOL_NORM {
            return Err(Error::NotNormalized(n2.sqrt()));
        }
        Ok(Self { ux, uy, uz })
    }

    /// Rescales a nonzero vector to unit length.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotNormalized(n));
        }
        Ok(Self {
            ux: x / n,
            uy: y / n,
            uz: z / n,
        })
    }

    pub fn axis(axis: PauliAxis) -> Self {
        match axis {
            PauliAxis::X => Self {
                ux: 1.0,
                uy: 0.0,
                uz: 0.0,
            },
            PauliAxis::Y => Self {
                ux: 0.0,
                uy: 1.0,
                uz: 0.0,
            },
            PauliAxis::Z => Self {
                ux: 0.0,
                uy: 0.0,
                uz: 1.0,
            },
        }
    }

    pub fn components(&self) -> (f64, f64, f64) {
        (self.ux, self.uy, self.uz)
    }

    /// `sigma . u`.
    pub fn sigma_dot(&self) -> Matrix2 {
        Matrix2::from_pauli_components(self.ux, self.uy, self.uz)
    }
}

pub fn pauli(axis: PauliAxis) -> Matrix2 {
    match axis {
        PauliAxis::X => Matrix2::new(ZERO, ONE, ONE, ZERO),
        PauliAxis::Y => Matrix2::new(ZERO, -I, I, ZERO),
        PauliAxis::Z => Matrix2::new(ONE, ZERO, ZERO, -ONE),
    }
}

/// `exp(i phi sigma.u) = cos(phi) I + i sin(phi) sigma.u`.
pub fn exp_i_phi_sigma_u(phi: f64, u: &UnitVector3) -> Matrix2 {
    let (s, c) = phi.sin_cos();
    Matrix2::identity().scale_re(c) + u.sigma_dot().scale(C64::new(0.0, s))
}

/// `exp(-i G)` for a Hermitian traceless generator `G = c (sigma . u)`.
///
/// Fails if `G` carries a trace or an anti-Hermitian part beyond `TOL_NORM`
/// relative to its size.
pub fn exp_minus_i_hermitian(g: &Matrix2) -> Result<Matrix2> {
    if !g.is_finite() {
        return Err(Error::Numeric("non-finite generator".into()));
    }
    let scale = g.max_abs().max(1.0);
    if g.hermiticity_defect() > TOL_NORM * scale || g.trace().norm() > TOL_NORM * scale {
        return Err(Error::Numeric(
            "generator is not Hermitian and traceless".into(),
        ));
    }
    let (gx, gy, gz) = g.pauli_components();
    let c = (gx * gx + gy * gy + gz * gz).sqrt();
    if c == 0.0 {
        return Ok(Matrix2::identity());
    }
    let u = UnitVector3::normalized(gx, gy, gz)?;
    Ok(exp_i_phi_sigma_u(-c, &u))
}

/// Time-ordered product `later * earlier`.
pub fn compose(later: &Matrix2, earlier: &Matrix2) -> Matrix2 {
    *later * *earlier
}

pub fn dagger(u: &Matrix2) -> Matrix2 {
    Matrix2::new(u.m11.conj(), u.m21.conj(), u.m12.conj(), u.m22.conj())
}

pub fn apply(u: &Matrix2, s: &StateVector) -> StateVector {
    StateVector::new(u.m11 * s.a1 + u.m12 * s.a2, u.m21 * s.a1 + u.m22 * s.a2)
}

/// Occupation probabilities `(|a1|^2, |a2|^2)`.
pub fn probabilities(s: &StateVector) -> (f64, f64) {
    (s.a1.norm_sqr(), s.a2.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Truncated Taylor series of `exp(A)`.
    fn taylor_exp(a: &Matrix2, terms: usize) -> Matrix2 {
        let mut sum = Matrix2::identity();
        let mut term = Matrix2::identity();
        for k in 1..terms {
            term = (term * *a).scale_re(1.0 / k as f64);
            sum = sum + term;
        }
        sum
    }

    #[test]
    fn pauli_matrices() {
        assert_eq!(pauli(PauliAxis::X), Matrix2::new(ZERO, ONE, ONE, ZERO));
        assert_eq!(pauli(PauliAxis::Z), Matrix2::diag(ONE, -ONE));
        assert_eq!(
            pauli(PauliAxis::Y),
            Matrix2::new(ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO)
        );
        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            let p = pauli(axis);
            assert_eq!(p.hermiticity_defect(), 0.0);
            assert_eq!(p.trace(), ZERO);
            assert_eq!(p * p, Matrix2::identity());
        }
    }

    #[test]
    fn exponential_special_values() {
        let u = UnitVector3::new(0.6, 0.0, 0.8).unwrap();
        assert_eq!(exp_i_phi_sigma_u(0.0, &u), Matrix2::identity());

        let z = exp_i_phi_sigma_u(FRAC_PI_2, &UnitVector3::axis(PauliAxis::Z));
        assert!(z.max_abs_diff(&Matrix2::diag(I, -I)) < 1e-15);
    }

    #[test]
    fn exponential_matches_taylor_series() {
        let x = UnitVector3::axis(PauliAxis::X);
        let closed = exp_i_phi_sigma_u(FRAC_PI_4, &x);
        let series = taylor_exp(&pauli(PauliAxis::X).scale(c(0.0, FRAC_PI_4)), 16);
        assert!(closed.max_abs_diff(&series) < 1e-12);
    }

    #[test]
    fn rejects_unnormalized_axis() {
        assert!(matches!(
            UnitVector3::new(1.0, 1.0, 0.0),
            Err(Error::NotNormalized(_))
        ));
        assert!(UnitVector3::new(1.0 + 1e-12, 0.0, 0.0).is_ok());
    }

    #[test]
    fn composition_order() {
        let x = pauli(PauliAxis::X);
        let y = pauli(PauliAxis::Y);
        let z = pauli(PauliAxis::Z);
        assert_eq!(compose(&x, &y), z.scale(I));
        assert_eq!(compose(&y, &x), z.scale(-I));

        let u = exp_i_phi_sigma_u(0.7, &UnitVector3::normalized(1.0, 2.0, -0.5).unwrap());
        assert_eq!(compose(&Matrix2::identity(), &u), u);
        assert!(compose(&u, &dagger(&u)).max_abs_diff(&Matrix2::identity()) < 1e-15);
    }

    #[test]
    fn dagger_of_diagonal_phase() {
        assert_eq!(dagger(&Matrix2::identity()), Matrix2::identity());
        let th = 0.37;
        let d = Matrix2::diag(C64::from_polar(1.0, th), C64::from_polar(1.0, -th));
        let expect = Matrix2::diag(C64::from_polar(1.0, -th), C64::from_polar(1.0, th));
        assert!(dagger(&d).max_abs_diff(&expect) < 1e-16);
    }

    #[test]
    fn apply_and_probabilities() {
        let g = StateVector::ground();
        assert_eq!(apply(&Matrix2::identity(), &g), g);
        assert_eq!(apply(&pauli(PauliAxis::X), &g), StateVector::excited());
        assert_eq!(probabilities(&g), (1.0, 0.0));

        let s = StateVector::new(c(0.5, 0.5), c(0.5, -0.5));
        let (p1, p2) = probabilities(&s);
        assert!((p1 - 0.5).abs() < 1e-16 && (p2 - 0.5).abs() < 1e-16);
    }

    #[test]
    fn hermitian_generator_exponential() {
        let g = Matrix2::from_pauli_components(0.3, -0.2, 0.5);
        let u = exp_minus_i_hermitian(&g).unwrap();
        let series = taylor_exp(&g.scale(-I), 30);
        assert!(u.max_abs_diff(&series) < 1e-13);
        assert_eq!(
            exp_minus_i_hermitian(&Matrix2::zero()).unwrap(),
            Matrix2::identity()
        );
        assert!(exp_minus_i_hermitian(&Matrix2::identity()).is_err());
    }
}
