//! Bessel functions J_nu at integer and half-integer orders, the kernels of
//! the radial reduction of the metaplectic transform.
//!
//! Integer orders use the integral representation
//! J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt evaluated by the
//! trapezoidal rule, which converges spectrally for periodic analytic
//! integrands. Half-integer orders have elementary closed forms.

/// J_{nu}(x) with nu = `twice_nu` / 2, nu >= 0, x >= 0.
pub fn bessel_j(twice_nu: u32, x: f64) -> f64 {
    assert!(x >= 0.0);
    if twice_nu % 2 == 0 {
        bessel_j_int(twice_nu / 2, x)
    } else {
        bessel_j_half(twice_nu, x)
    }
}

fn bessel_j_int(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    // trapezoid node count grows with the argument; integrand period 2 pi
    let m = 32 + (2.0 * x) as usize;
    let h = std::f64::consts::PI / m as f64;
    let nf = n as f64;
    // endpoints carry weight 1/2
    let mut acc = 0.5 * ((-0.0f64).cos() + (nf * std::f64::consts::PI).cos());
    for i in 1..m {
        let t = i as f64 * h;
        acc += (nf * t - x * t.sin()).cos();
    }
    acc * h / std::f64::consts::PI
}

fn bessel_j_half(twice_nu: u32, x: f64) -> f64 {
    let nu = twice_nu as f64 / 2.0;
    if x < 1e-6 {
        // J_nu(x) ~ (x/2)^nu / Gamma(nu+1)
        return (0.5 * x).powf(nu) / crate::types::gamma_half(twice_nu + 2);
    }
    let pref = (2.0 / (std::f64::consts::PI * x)).sqrt();
    // upward recurrence from J_{-1/2}, J_{1/2}
    let mut jm = pref * x.cos(); // J_{-1/2}
    let mut j = pref * x.sin(); // J_{1/2}
    let mut t = 1u32; // current twice-order of j
    while t < twice_nu {
        let next = (t as f64 / x) * j - jm;
        jm = j;
        j = next;
        t += 2;
    }
    j
}
