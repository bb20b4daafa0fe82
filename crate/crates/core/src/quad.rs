//! Panel-wise Gauss-Legendre quadrature.
//!
//! Fixed 16-point rule per panel; oscillatory integrands are handled by
//! bounding the panel width against the largest phase frequency, error
//! estimates by Richardson halving.

use num_complex::Complex64;

/// Abscissae of the 16-point Gauss-Legendre rule on [-1, 1].
pub const GL16_NODES: [f64; 16] = [
    -0.989_400_934_991_649_9,
    -0.944_575_023_073_232_6,
    -0.865_631_202_387_831_7,
    -0.755_404_408_355_003_0,
    -0.617_876_244_402_643_7,
    -0.458_016_777_657_227_4,
    -0.281_603_550_779_258_9,
    -0.095_012_509_837_637_44,
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003_0,
    0.865_631_202_387_831_7,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];

/// Weights of the 16-point Gauss-Legendre rule on [-1, 1].
pub const GL16_WEIGHTS: [f64; 16] = [
    0.027_152_459_411_754_096,
    0.062_253_523_938_647_89,
    0.095_158_511_682_492_78,
    0.124_628_971_255_533_87,
    0.149_595_988_816_576_73,
    0.169_156_519_395_002_54,
    0.182_603_415_044_923_59,
    0.189_450_610_455_068_5,
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_59,
    0.169_156_519_395_002_54,
    0.149_595_988_816_576_73,
    0.124_628_971_255_533_87,
    0.095_158_511_682_492_78,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_096,
];

/// Single 16-point panel over [a, b].
pub fn gl16<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL16_NODES.iter().zip(&GL16_WEIGHTS) {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Panel-wise integration with panel width at most `max_width`.
pub fn panels<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, max_width: f64) -> f64 {
    assert!(b >= a && max_width > 0.0);
    let n = ((b - a) / max_width).ceil().max(1.0) as usize;
    let w = (b - a) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        acc += gl16(&mut f, a + i as f64 * w, a + (i + 1) as f64 * w);
    }
    acc
}

/// Complex-valued panel integration.
pub fn panels_complex<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    max_width: f64,
) -> Complex64 {
    assert!(b >= a && max_width > 0.0);
    let n = ((b - a) / max_width).ceil().max(1.0) as usize;
    let w = (b - a) / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let lo = a + i as f64 * w;
        let hi = a + (i + 1) as f64 * w;
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        for (x, wt) in GL16_NODES.iter().zip(&GL16_WEIGHTS) {
            acc += f(c + h * x) * (wt * h);
        }
    }
    acc
}

/// Adaptive bisection on top of the 16-point rule, used as the quadrature
/// oracle in tests. Not for oscillatory hot paths.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = gl16(f, a, m);
        let right = gl16(f, m, b);
        let delta = left + right - whole;
        if delta.abs() <= tol || depth >= 40 {
            left + right + delta / 255.0
        } else {
            rec(f, a, m, left, tol * 0.5, depth + 1) + rec(f, m, b, right, tol * 0.5, depth + 1)
        }
    }
    let whole = gl16(&f, a, b);
    rec(&f, a, b, whole, tol, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = gl16(|x| x * x * x * x * x * x, 0.0, 1.0);
        assert!((v - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn oscillatory_panels() {
        // int_0^10 cos(40 x) dx = sin(400)/40
        let v = panels(|x| (40.0 * x).cos(), 0.0, 10.0, 3.0 / 40.0 * std::f64::consts::PI);
        assert!((v - (400.0f64).sin() / 40.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_gaussian() {
        let v = adaptive(|x| (-x * x).exp(), -8.0, 8.0, 1e-12);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }
}
