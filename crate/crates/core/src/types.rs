//! Shared domain types: the torus instance, correlation windows, and the
//! exponential-polynomial test-function algebra with closed-form transforms.

use crate::error::{domain, Result};

/// Volume of the unit ball in `k` dimensions, pi^{k/2} / Gamma(k/2 + 1).
///
/// Computed by the recursion B_k = (2 pi / k) B_{k-2} from B_1 = 2, B_2 = pi.
pub fn unit_ball_volume(k: u32) -> Result<f64> {
    if k == 0 {
        return Err(domain("unit_ball_volume requires k >= 1"));
    }
    let mut b = if k % 2 == 1 { 2.0 } else { std::f64::consts::PI };
    let mut dim = if k % 2 == 1 { 1 } else { 2 };
    while dim < k {
        dim += 2;
        b *= 2.0 * std::f64::consts::PI / dim as f64;
    }
    Ok(b)
}

/// Gamma(n/2) for positive integer `n`, exact up to rounding.
pub(crate) fn gamma_half(twice_arg: u32) -> f64 {
    assert!(twice_arg > 0);
    let mut g = if twice_arg % 2 == 0 {
        1.0
    } else {
        std::f64::consts::PI.sqrt()
    };
    let mut t = if twice_arg % 2 == 0 { 2 } else { 1 };
    while t < twice_arg {
        g *= t as f64 / 2.0;
        t += 2;
    }
    g
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// The physical problem instance: dimension `k` and shift vector `alpha`,
/// reduced mod 1 on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSpec {
    k: usize,
    alpha: Vec<f64>,
    alpha_exact: Option<Vec<(i64, i64)>>,
}

impl TorusSpec {
    pub fn new(k: usize, alpha: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(domain("TorusSpec requires k >= 2"));
        }
        if alpha.len() != k {
            return Err(domain("alpha length must equal k"));
        }
        let alpha = alpha.into_iter().map(frac).collect();
        Ok(Self {
            k,
            alpha,
            alpha_exact: None,
        })
    }

    /// Construct with exact rational shifts p_j / q_j.
    pub fn new_rational(k: usize, rationals: Vec<(i64, i64)>) -> Result<Self> {
        if k < 2 {
            return Err(domain("TorusSpec requires k >= 2"));
        }
        if rationals.len() != k {
            return Err(domain("rational count must equal k"));
        }
        let mut reduced = Vec::with_capacity(k);
        let mut alpha = Vec::with_capacity(k);
        for &(p, q) in &rationals {
            if q <= 0 {
                return Err(domain("rational denominators must be positive"));
            }
            let p = p.rem_euclid(q);
            let g = gcd(p.unsigned_abs().max(1), q.unsigned_abs()) as i64;
            reduced.push((p / g, q / g));
            alpha.push(p as f64 / q as f64);
        }
        Ok(Self {
            k,
            alpha,
            alpha_exact: Some(reduced),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_exact(&self) -> Option<&[(i64, i64)]> {
        self.alpha_exact.as_deref()
    }

    /// Common denominator q of the exact shifts, if present.
    pub fn common_denominator(&self) -> Option<i64> {
        let ex = self.alpha_exact.as_ref()?;
        let mut q = 1i64;
        for &(_, d) in ex {
            q = lcm(q, d)?;
        }
        Some(q)
    }

    /// Numerators scaled to the common denominator.
    pub fn scaled_numerators(&self) -> Option<(Vec<i64>, i64)> {
        let ex = self.alpha_exact.as_ref()?;
        let q = self.common_denominator()?;
        Some((ex.iter().map(|&(p, d)| p * (q / d)).collect(), q))
    }

    pub fn unit_ball_volume(&self) -> f64 {
        unit_ball_volume(self.k as u32).expect("k >= 2")
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn lcm(a: i64, b: i64) -> Option<i64> {
    let g = gcd(a.unsigned_abs(), b.unsigned_abs()) as i64;
    (a / g).checked_mul(b)
}

/// Closed correlation window [a, b].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub a: f64,
    pub b: f64,
}

impl Window {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a <= b) {
            return Err(domain("Window requires a <= b"));
        }
        Ok(Self { a, b })
    }

    pub fn contains(&self, s: f64) -> bool {
        self.a <= s && s <= self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

/// One term c r^p e^{-pi s r} of a test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiTerm {
    pub coeff: f64,
    pub decay: f64,
    pub power: u32,
}

/// Test function psi(r) = sum_i c_i r^{p_i} e^{-pi s_i r} on the half line.
///
/// The family is closed under products and has exact moments
/// int_0^infty r^n e^{-pi s r} dr = n! / (pi s)^{n+1}, which keeps every
/// theoretical limit in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct TestPsi {
    terms: Vec<PsiTerm>,
}

impl TestPsi {
    pub fn new(terms: Vec<PsiTerm>) -> Result<Self> {
        for t in &terms {
            if !(t.decay > 0.0) {
                return Err(domain("TestPsi decay rates must be > 0"));
            }
        }
        Ok(Self { terms })
    }

    /// psi(r) = e^{-pi r}.
    pub fn gaussian() -> Self {
        Self {
            terms: vec![PsiTerm {
                coeff: 1.0,
                decay: 1.0,
                power: 0,
            }],
        }
    }

    pub fn terms(&self) -> &[PsiTerm] {
        &self.terms
    }

    pub fn eval(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            acc += t.coeff * r.powi(t.power as i32) * (-std::f64::consts::PI * t.decay * r).exp();
        }
        acc
    }

    /// True when every term is a pure exponential (power 0); the induced
    /// radial function is then a Gaussian mixture with a closed-form
    /// Fourier transform.
    pub fn is_gaussian_mixture(&self) -> bool {
        self.terms.iter().all(|t| t.power == 0)
    }

    /// Upper envelope sum_i |c_i| r^{p_i} e^{-pi s_i r}.
    pub fn envelope(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            acc += t.coeff.abs()
                * r.powi(t.power as i32)
                * (-std::f64::consts::PI * t.decay * r).exp();
        }
        acc
    }

    /// Smallest radius beyond every term's peak with envelope <= tol.
    /// Returns 0 for the identically-zero function.
    pub fn truncation_radius(&self, tol: f64) -> f64 {
        if self.terms.iter().all(|t| t.coeff == 0.0) {
            return 0.0;
        }
        let peak = self
            .terms
            .iter()
            .map(|t| t.power as f64 / (std::f64::consts::PI * t.decay))
            .fold(0.0, f64::max);
        let mut lo = peak;
        let mut hi = peak + 1.0;
        while self.envelope(hi) > tol {
            hi *= 2.0;
            if hi > 1e6 {
                return hi;
            }
        }
        if self.envelope(lo) <= tol {
            return lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.envelope(mid) > tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Pointwise product, again in the family.
    pub fn product(&self, other: &TestPsi) -> TestPsi {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(PsiTerm {
                    coeff: a.coeff * b.coeff,
                    decay: a.decay + b.decay,
                    power: a.power + b.power,
                });
            }
        }
        TestPsi { terms }
    }

    /// int_0^infty psi(r) r^{m/2} dr with m = `twice_power` >= 0, exact via
    /// Gamma(p + m/2 + 1) / (pi s)^{p + m/2 + 1}.
    pub fn integral_with_power(&self, twice_power: u32) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let twice_arg = 2 * t.power + twice_power + 2; // 2 (p + m/2 + 1)
            let g = gamma_half(twice_arg);
            let base = std::f64::consts::PI * t.decay;
            acc += t.coeff * g / base.powf(twice_arg as f64 / 2.0);
        }
        acc
    }
}

/// Supported compactly supported weight shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightShape {
    Triangle,
    RaisedCosine,
}

/// Continuous weight h, supported on [-a, a], with closed-form transform
/// hhat(s) = int h(u) e(us/2) du under the half-argument convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightH {
    pub half_width: f64,
    pub shape: WeightShape,
    pub amplitude: f64,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x * x * x * x / 120.0
    } else {
        x.sin() / x
    }
}

impl WeightH {
    pub fn new(half_width: f64, shape: WeightShape, amplitude: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(domain("WeightH half-width must be > 0"));
        }
        Ok(Self {
            half_width,
            shape,
            amplitude,
        })
    }

    pub fn triangle(half_width: f64, amplitude: f64) -> Result<Self> {
        Self::new(half_width, WeightShape::Triangle, amplitude)
    }

    pub fn raised_cosine(half_width: f64, amplitude: f64) -> Result<Self> {
        Self::new(half_width, WeightShape::RaisedCosine, amplitude)
    }

    pub fn eval(&self, u: f64) -> f64 {
        let a = self.half_width;
        if u.abs() >= a {
            return 0.0;
        }
        match self.shape {
            WeightShape::Triangle => self.amplitude * (1.0 - u.abs() / a),
            WeightShape::RaisedCosine => {
                self.amplitude * 0.5 * (1.0 + (std::f64::consts::PI * u / a).cos())
            }
        }
    }

    /// hhat(s) = int h(u) e^{i pi u s} du; real because h is real and even.
    pub fn hat(&self, s: f64) -> f64 {
        let a = self.half_width;
        let x = (std::f64::consts::PI * s * a).abs();
        match self.shape {
            WeightShape::Triangle => {
                let t = sinc(0.5 * x);
                self.amplitude * a * t * t
            }
            WeightShape::RaisedCosine => {
                let pi = std::f64::consts::PI;
                if (x - pi).abs() < 1e-5 {
                    // removable singularity at x = pi
                    let t = x - pi;
                    self.amplitude * a * pi * pi * sinc(t) / ((pi + t) * (2.0 * pi + t))
                } else {
                    self.amplitude * a * sinc(x) * pi * pi / (pi * pi - x * x)
                }
            }
        }
    }

    /// int h = hhat(0).
    pub fn integral(&self) -> f64 {
        self.amplitude * self.half_width
    }

    /// h(0).
    pub fn at_zero(&self) -> f64 {
        self.amplitude
    }

    /// int hhat(s) ds = 2 h(0) by Fourier inversion under the e(us/2)
    /// convention.
    pub fn hat_integral(&self) -> f64 {
        2.0 * self.amplitude
    }

    /// Radius S beyond which |hhat(s)| <= tol, from the tail bounds
    /// |hhat| <= 4 A a / x^2 (triangle) and <= A a pi^2 / (x (x^2 - pi^2))
    /// (raised cosine), x = pi s a.
    pub fn hat_tail_radius(&self, tol: f64) -> f64 {
        let a = self.half_width;
        let amp = self.amplitude.abs();
        if amp == 0.0 {
            return 0.0;
        }
        let x = match self.shape {
            WeightShape::Triangle => (4.0 * amp * a / tol).sqrt(),
            WeightShape::RaisedCosine => {
                (amp * a * std::f64::consts::PI.powi(2) / tol).cbrt() + std::f64::consts::PI
            }
        };
        x / (std::f64::consts::PI * a)
    }
}
