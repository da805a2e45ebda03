//! Globally adaptive Gauss–Kronrod (7/15) quadrature and the few mapped
//! integrals the density checks need.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Stopping tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 4000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-10)
    }
}

/// Value and error estimate of an integral.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Piece {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Estimate {
    if a == b {
        return Estimate { value: 0.0, error: 0.0 };
    }
    let first = kronrod(&mut f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::from([first]);
    while error > tol.abs.max(tol.rel * value.abs()) && heap.len() < tol.max_intervals {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = kronrod(&mut f, worst.a, mid);
        let right = kronrod(&mut f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed accumulated cancellation from the running updates.
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Estimate { value, error }
}

/// Integrates `f` over `[a, +inf)` via `x = a + t / (1 - t)`.
pub fn integrate_upper<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: Tolerance) -> Estimate {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let one_minus = 1.0 - t;
            let v = f(a + t / one_minus) / (one_minus * one_minus);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Integrates `f` over `(-inf, b]`.
pub fn integrate_lower<F: FnMut(f64) -> f64>(mut f: F, b: f64, tol: Tolerance) -> Estimate {
    integrate_upper(|x| f(2.0 * b - x), b, tol)
}

/// Integrates `f` over the real line, split at `center`.
pub fn integrate_line<F: FnMut(f64) -> f64>(mut f: F, center: f64, tol: Tolerance) -> Estimate {
    let lo = integrate_lower(&mut f, center, tol);
    let hi = integrate_upper(&mut f, center, tol);
    Estimate {
        value: lo.value + hi.value,
        error: lo.error + hi.error,
    }
}

/// Integrates a density over the whole complex plane in polar coordinates
/// around `center`, with the radius compactified as `r = scale * tan(psi)`.
/// `scale` should be the width of the density's core.
pub fn integrate_plane<F: FnMut(Complex64) -> f64>(mut f: F, center: Complex64, scale: f64, tol: Tolerance) -> Estimate {
    let inner_tol = Tolerance::new(tol.abs * 1e-2, tol.rel * 1e-2);
    let mut inner_error = 0.0;
    let outer = integrate(
        |psi| {
            if psi >= FRAC_PI_2 {
                return 0.0;
            }
            let (sin, cos) = psi.sin_cos();
            let r = scale * sin / cos;
            let jac = scale * scale * sin / (cos * cos * cos);
            let ring = integrate(|theta| f(center + Complex64::from_polar(r, theta)), -PI, PI, inner_tol);
            inner_error += ring.error * jac;
            let v = ring.value * jac;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        FRAC_PI_2,
        tol,
    );
    Estimate {
        value: outer.value,
        error: outer.error + inner_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(|x| 3.0 * x * x - x + 2.0, -1.0, 2.0, Tolerance::default());
        assert!((e.value - 13.5).abs() < 1e-13, "{}", e.value);
    }

    #[test]
    fn peaked_integrand() {
        // Lorentzian of width 1e-3 centred inside the interval.
        let w = 1e-3;
        let e = integrate(|x| w / PI / ((x - 0.3) * (x - 0.3) + w * w), -1.0, 1.0, Tolerance::default());
        let exact = ((0.7f64 / w).atan() + (1.3f64 / w).atan()) / PI;
        assert!((e.value - exact).abs() < 1e-9, "{} vs {exact}", e.value);
    }

    #[test]
    fn gaussian_on_the_line() {
        let e = integrate_line(|x| (-x * x).exp(), 0.4, Tolerance::default());
        assert!((e.value - PI.sqrt()).abs() < 1e-9);
        let half = integrate_lower(|x| (-x * x).exp(), 0.0, Tolerance::default());
        assert!((half.value - 0.5 * PI.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn plane_gaussian() {
        let c = Complex64::new(1.5, -0.5);
        let e = integrate_plane(|z| (-(z - c).norm_sqr()).exp() / PI, c, 1.0, Tolerance::new(1e-10, 1e-9));
        assert!((e.value - 1.0).abs() < 1e-8, "{}", e.value);
    }
}
