//! Adaptive Simpson quadrature for scalar and matrix-valued integrands.

use crate::su2::Matrix2;

const MAX_DEPTH: u32 = 40;

/// Values that can be integrated: a real vector space with a max-norm.
pub trait Quadrand: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    /// Max-norm, per entry for matrices.
    fn max_abs(self) -> f64;
}

impl Quadrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn max_abs(self) -> f64 {
        self.abs()
    }
}

impl Quadrand for Matrix2 {
    fn zero() -> Self {
        Matrix2::zero()
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self.scale_re(s)
    }
    fn max_abs(self) -> f64 {
        Matrix2::max_abs(&self)
    }
}

impl<A: Quadrand, B: Quadrand> Quadrand for (A, B) {
    fn zero() -> Self {
        (A::zero(), B::zero())
    }
    fn add(self, other: Self) -> Self {
        (self.0.add(other.0), self.1.add(other.1))
    }
    fn scale(self, s: f64) -> Self {
        (self.0.scale(s), self.1.scale(s))
    }
    fn max_abs(self) -> f64 {
        self.0.max_abs().max(self.1.max_abs())
    }
}

fn sub<T: Quadrand>(a: T, b: T) -> T {
    a.add(b.scale(-1.0))
}

struct Panel<T> {
    a: f64,
    m: f64,
    b: f64,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
}

fn simpson<T: Quadrand>(h: f64, fa: T, fm: T, fb: T) -> T {
    fa.add(fm.scale(4.0)).add(fb).scale(h / 6.0)
}

fn refine<T, F>(f: &F, p: Panel<T>, eps: f64, depth: u32) -> T
where
    T: Quadrand,
    F: Fn(f64) -> T,
{
    let Panel {
        a,
        m,
        b,
        fa,
        fm,
        fb,
        whole,
    } = p;
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(m - a, fa, flm, fm);
    let right = simpson(b - m, fm, frm, fb);
    let both = left.add(right);
    let delta = sub(both, whole);
    let err = delta.max_abs();

    // Stop at the tolerance, at the depth limit, or once the requested
    // accuracy is below what double rounding of the panel sum can resolve.
    let scale = fa.max_abs() + flm.max_abs() + fm.max_abs() + frm.max_abs() + fb.max_abs();
    let floor = 64.0 * f64::EPSILON * scale * (b - a);
    if err <= 15.0 * eps.max(floor) || depth >= MAX_DEPTH || (b - a) <= f64::EPSILON * b.abs() {
        return both.add(delta.scale(1.0 / 15.0));
    }
    let l = Panel {
        a,
        m: lm,
        b: m,
        fa,
        fm: flm,
        fb: fm,
        whole: left,
    };
    let r = Panel {
        a: m,
        m: rm,
        b,
        fa: fm,
        fm: frm,
        fb,
        whole: right,
    };
    refine(f, l, 0.5 * eps, depth + 1).add(refine(f, r, 0.5 * eps, depth + 1))
}

/// Integrates `f` over `[a, b]` to absolute (max-norm) tolerance `tol`.
///
/// The interval is first cut into `panels` equal pieces, each refined
/// adaptively with tolerance `tol / panels`. Reversed limits give the
/// negated integral; `a == b` gives zero.
pub fn adaptive_simpson<T, F>(f: F, a: f64, b: f64, tol: f64, panels: usize) -> T
where
    T: Quadrand,
    F: Fn(f64) -> T,
{
    if a == b {
        return T::zero();
    }
    if b < a {
        return adaptive_simpson(f, b, a, tol, panels).scale(-1.0);
    }
    let n = panels.max(1);
    let width = (b - a) / n as f64;
    let eps = tol / n as f64;
    let mut total = T::zero();
    let mut lo = a;
    let mut flo = f(lo);
    for k in 1..=n {
        let hi = if k == n { b } else { a + width * k as f64 };
        let mid = 0.5 * (lo + hi);
        let (fm, fhi) = (f(mid), f(hi));
        let whole = simpson(hi - lo, flo, fm, fhi);
        let panel = Panel {
            a: lo,
            m: mid,
            b: hi,
            fa: flo,
            fm,
            fb: fhi,
            whole,
        };
        total = total.add(refine(&f, panel, eps, 0));
        lo = hi;
        flo = fhi;
    }
    total
}
