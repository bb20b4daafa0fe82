//! The automorphic side: the group G^k = SL(2,R) x R^{2k}, Iwasawa
//! coordinates, fundamental-domain reduction, the metaplectic transform
//! U^phi, Jacobi theta sums, and the theta-integral representation of the
//! smoothed pair correlation.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::quad::{self, GL16_NODES, GL16_WEIGHTS};
use crate::spectrum::{enumerate_spectrum, SpectrumSlice};
use crate::types::{gamma_half, unit_ball_volume, PsiTerm, TestPsi, TorusSpec, WeightH};

const PI: f64 = std::f64::consts::PI;
const TAU: f64 = std::f64::consts::TAU;

/// e(x) = exp(2 pi i x).
fn e2pi(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * x)
}

fn wrap_angle(phi: f64) -> f64 {
    let mut p = phi % TAU;
    if p < 0.0 {
        p += TAU;
    }
    if p >= TAU {
        p -= TAU;
    }
    p
}

/// A point of G^k in Iwasawa coordinates: tau = u + iv, rotation angle phi
/// in [0, 2pi), and the affine part xi = (x, y) with x, y in R^k.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint {
    pub u: f64,
    pub v: f64,
    pub phi: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl GroupPoint {
    pub fn new(u: f64, v: f64, phi: f64, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if !(v > 0.0) {
            return Err(domain("GroupPoint requires v > 0"));
        }
        if x.len() != y.len() || x.is_empty() {
            return Err(domain("GroupPoint xi must split into equal nonempty x, y"));
        }
        Ok(Self {
            u,
            v,
            phi: wrap_angle(phi),
            x,
            y,
        })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            u: 0.0,
            v: 1.0,
            phi: 0.0,
            x: vec![0.0; k],
            y: vec![0.0; k],
        }
    }

    pub fn k(&self) -> usize {
        self.x.len()
    }

    /// Iwasawa composition [[1,u],[0,1]] diag(sqrt v, 1/sqrt v) R(phi),
    /// returned row-major as [a, b, c, d].
    pub fn to_matrix(&self) -> [f64; 4] {
        let sv = self.v.sqrt();
        let (s, c) = self.phi.sin_cos();
        [
            sv * c + self.u / sv * s,
            -sv * s + self.u / sv * c,
            s / sv,
            c / sv,
        ]
    }

    /// Recovers (u, v, phi) from a unimodular matrix: v = 1/(c^2+d^2),
    /// u = (ac+bd) v, phi = atan2(c, d).
    pub fn from_matrix(m: [f64; 4], x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let [a, b, c, d] = m;
        if (a * d - b * c - 1.0).abs() > 1e-9 {
            return Err(domain("from_matrix requires determinant 1"));
        }
        let v = 1.0 / (c * c + d * d);
        let u = (a * c + b * d) * v;
        let phi = wrap_angle(c.atan2(d));
        Self::new(u, v, phi, x, y)
    }

    /// (M; xi)(M'; xi') = (MM'; xi + M xi').
    pub fn group_mul(&self, rhs: &GroupPoint) -> Result<GroupPoint> {
        if self.k() != rhs.k() {
            return Err(domain("group_mul requires equal k"));
        }
        let [a, b, c, d] = self.to_matrix();
        let [a2, b2, c2, d2] = rhs.to_matrix();
        let mm = [
            a * a2 + b * c2,
            a * b2 + b * d2,
            c * a2 + d * c2,
            c * b2 + d * d2,
        ];
        let mut x = Vec::with_capacity(self.k());
        let mut y = Vec::with_capacity(self.k());
        for j in 0..self.k() {
            x.push(self.x[j] + a * rhs.x[j] + b * rhs.y[j]);
            y.push(self.y[j] + c * rhs.x[j] + d * rhs.y[j]);
        }
        GroupPoint::from_matrix(mm, x, y)
    }
}

/// Generators of the invariance group: the inversion S = ([[0,-1],[1,0]]; 0),
/// its inverse, powers of the shifted translation
/// T^n = ([[1,n],[0,1]]; (n/2, ..., n/2, 0, ..., 0)), and integer lattice
/// translations of xi.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generator {
    S,
    SInv,
    T(i64),
    Lattice(Vec<i64>),
}

impl Generator {
    pub fn inverse(&self) -> Generator {
        match self {
            Generator::S => Generator::SInv,
            Generator::SInv => Generator::S,
            Generator::T(n) => Generator::T(-n),
            Generator::Lattice(m) => Generator::Lattice(m.iter().map(|c| -c).collect()),
        }
    }

    fn as_point(&self, k: usize) -> GroupPoint {
        match self {
            Generator::S => GroupPoint {
                u: 0.0,
                v: 1.0,
                phi: 0.5 * PI,
                x: vec![0.0; k],
                y: vec![0.0; k],
            },
            Generator::SInv => GroupPoint {
                u: 0.0,
                v: 1.0,
                phi: 1.5 * PI,
                x: vec![0.0; k],
                y: vec![0.0; k],
            },
            Generator::T(n) => GroupPoint {
                u: *n as f64,
                v: 1.0,
                phi: 0.0,
                x: vec![*n as f64 * 0.5; k],
                y: vec![0.0; k],
            },
            Generator::Lattice(m) => {
                assert_eq!(m.len(), 2 * k, "lattice token length");
                GroupPoint {
                    u: 0.0,
                    v: 1.0,
                    phi: 0.0,
                    x: m[..k].iter().map(|&c| c as f64).collect(),
                    y: m[k..].iter().map(|&c| c as f64).collect(),
                }
            }
        }
    }

    /// Left multiplication by the generator.
    pub fn apply(&self, g: &GroupPoint) -> GroupPoint {
        self.as_point(g.k())
            .group_mul(g)
            .expect("generator application is total")
    }
}

/// A reduction certificate: `tokens` listed outermost first, so replaying
/// them onto `reduced` from the back recovers the original point.
#[derive(Debug, Clone)]
pub struct ReductionWord {
    pub tokens: Vec<Generator>,
    pub reduced: GroupPoint,
}

impl ReductionWord {
    pub fn replay(&self) -> GroupPoint {
        let mut g = self.reduced.clone();
        for t in self.tokens.iter().rev() {
            g = t.apply(&g);
        }
        g
    }
}

/// Brings g into the fundamental domain u in [-1/2, 1/2), |tau| >= 1,
/// phi in [0, pi), xi in [-1/2, 1/2)^{2k}, alternating u-translations and
/// inversions; each inversion strictly increases v once u is reduced.
pub fn reduce_to_fundamental(g: &GroupPoint) -> Result<ReductionWord> {
    if g.v < 1e-300 {
        return Err(domain("reduce_to_fundamental: v underflow"));
    }
    let mut cur = g.clone();
    let mut tokens = Vec::new();
    for iter in 0.. {
        if iter > 10_000 {
            return Err(domain("reduce_to_fundamental did not terminate"));
        }
        let n = (cur.u + 0.5).floor() as i64;
        if n != 0 {
            cur = Generator::T(-n).apply(&cur);
            tokens.push(Generator::T(n));
        }
        if cur.u * cur.u + cur.v * cur.v < 1.0 - 1e-15 {
            cur = Generator::S.apply(&cur);
            tokens.push(Generator::SInv);
        } else {
            break;
        }
    }
    if cur.phi >= PI {
        // S^2 = (-I; 0) shifts phi by pi and negates xi
        cur = Generator::S.apply(&Generator::S.apply(&cur));
        tokens.push(Generator::SInv);
        tokens.push(Generator::SInv);
    }
    let k = cur.k();
    let mut m = vec![0i64; 2 * k];
    for j in 0..k {
        m[j] = -((cur.x[j] + 0.5).floor() as i64);
        m[k + j] = -((cur.y[j] + 0.5).floor() as i64);
    }
    if m.iter().any(|&c| c != 0) {
        cur = Generator::Lattice(m.clone()).apply(&cur);
        tokens.push(Generator::Lattice(m.iter().map(|&c| -c).collect()));
    }
    Ok(ReductionWord {
        tokens,
        reduced: cur,
    })
}

/// Fourier transform of a pure exponential mixture in R^k: each radial term
/// c e^{-pi s r^2} maps to c s^{-k/2} e^{-pi r^2 / s}. The metaplectic phase
/// e(-k/8) is not included.
pub fn gaussian_mixture_fourier(psi: &TestPsi, k: u32) -> Result<TestPsi> {
    if !psi.is_gaussian_mixture() {
        return Err(domain("closed-form transform needs a pure exponential mixture"));
    }
    let terms = psi
        .terms()
        .iter()
        .map(|t| PsiTerm {
            coeff: t.coeff * t.decay.powf(-(k as f64) / 2.0),
            decay: 1.0 / t.decay,
            power: 0,
        })
        .collect();
    TestPsi::new(terms)
}

/// sigma_phi = 2 nu + 1 for nu pi < phi < (nu + 1) pi.
fn sigma_phi(phi: f64) -> f64 {
    2.0 * (phi / PI).floor() + 1.0
}

/// t^{-nu} J_nu(t), the spherical average of a plane wave up to constants;
/// analytic at t = 0 with value 2^{-nu} / Gamma(nu + 1).
fn bessel_kernel(twice_nu: u32, t: f64) -> f64 {
    let nu = twice_nu as f64 / 2.0;
    if t.abs() < 1e-4 {
        // two terms of the ascending series keep 1e-17 accuracy here
        let lead = 0.5f64.powf(nu) / gamma_half(twice_nu + 2);
        lead * (1.0 - t * t / (4.0 * (nu + 1.0)))
    } else {
        crate::bessel::bessel_j(twice_nu, t) / t.powf(nu)
    }
}

/// f_phi at radius `w_norm` for the radial function f(w) = psi(||w||^2):
/// the angular integral of the kernel G_phi collapses to a Bessel factor of
/// order k/2 - 1, leaving one oscillatory radial integral.
pub fn u_phi_transform(psi: &TestPsi, phi: f64, w_norm: f64, k: u32) -> Result<Complex64> {
    if k == 0 {
        return Err(domain("u_phi_transform requires k >= 1"));
    }
    let r = w_norm;
    if !(r >= 0.0) {
        return Err(domain("u_phi_transform requires w_norm >= 0"));
    }
    let p = wrap_angle(phi);
    if p == 0.0 || p.min(TAU - p) < 1e-12 {
        return Ok(Complex64::new(psi.eval(r * r), 0.0));
    }
    if (p - 0.5 * PI).abs() < 1e-12 && psi.is_gaussian_mixture() {
        let hat = gaussian_mixture_fourier(psi, k)?;
        return Ok(e2pi(-(k as f64) / 8.0) * hat.eval(r * r));
    }
    if p.sin().abs() < 1e-6 {
        return Err(domain("u_phi_transform: phi too close to a multiple of pi"));
    }

    if k < 2 {
        return Err(domain("radial reduction implemented for k >= 2"));
    }
    let sin_p = p.sin();
    let cot = p.cos() / sin_p;
    let a = TAU / sin_p.abs();
    let twice_nu = k - 2;
    let rho_max = psi.truncation_radius(1e-16).sqrt() + 1.0;
    // chirp frequency 2 pi rho |cot phi| plus the Bessel frequency a r
    let omega = TAU * rho_max * cot.abs() + a * r + 1.0;
    let width = (TAU / omega).min(0.25);
    // f_phi(w) = e(-k sigma/8) |sin phi|^{-k/2} e(r^2 cot/2) (2 pi)^{k/2}
    //            int psi(rho^2) e(rho^2 cot/2) rho^{k-1} K(a rho r) drho,
    // K(t) = t^{-nu} J_nu(t) the spherical plane-wave average
    let integral = quad::panels_complex(
        |rho| {
            let base = psi.eval(rho * rho) * rho.powi(k as i32 - 1);
            e2pi(0.5 * rho * rho * cot) * base * bessel_kernel(twice_nu, a * rho * r)
        },
        0.0,
        rho_max,
        width,
    );
    let front = e2pi(-(k as f64) * sigma_phi(p) / 8.0)
        * sin_p.abs().powf(-(k as f64) / 2.0)
        * e2pi(0.5 * r * r * cot)
        * TAU.powf(k as f64 / 2.0);
    Ok(front * integral)
}

/// One theta-sum evaluation together with the reported truncation bound.
#[derive(Debug, Clone, Copy)]
pub struct ThetaValue {
    pub value: Complex64,
    pub truncation: f64,
}

const THETA_TOL: f64 = 1e-14;

enum RadialProfile<'a> {
    Direct(&'a TestPsi),
    GaussExact { hat: TestPsi, phase: Complex64 },
    Quadrature { phi: f64, cache: HashMap<u64, Complex64> },
}

impl RadialProfile<'_> {
    fn eval(&mut self, psi: &TestPsi, r: f64, k: u32) -> Result<Complex64> {
        match self {
            RadialProfile::Direct(f) => Ok(Complex64::new(f.eval(r * r), 0.0)),
            RadialProfile::GaussExact { hat, phase } => Ok(*phase * hat.eval(r * r)),
            RadialProfile::Quadrature { phi, cache } => {
                if let Some(v) = cache.get(&r.to_bits()) {
                    return Ok(*v);
                }
                let v = u_phi_transform(psi, *phi, r, k)?;
                cache.insert(r.to_bits(), v);
                Ok(v)
            }
        }
    }
}

/// Theta_f(tau, phi; xi) = v^{k/4} sum_m f_phi((m-y) sqrt v)
/// e(||m-y||^2 u / 2 + m.x), truncated where the transformed profile drops
/// below 1e-14.
pub fn theta_sum(psi: &TestPsi, g: &GroupPoint) -> Result<ThetaValue> {
    let k = g.k() as u32;
    let p = wrap_angle(g.phi);
    let mut profile = if p == 0.0 || p.min(TAU - p) < 1e-12 {
        RadialProfile::Direct(psi)
    } else if (p - 0.5 * PI).abs() < 1e-12 && psi.is_gaussian_mixture() {
        RadialProfile::GaussExact {
            hat: gaussian_mixture_fourier(psi, k)?,
            phase: e2pi(-(k as f64) / 8.0),
        }
    } else {
        RadialProfile::Quadrature {
            phi: p,
            cache: HashMap::new(),
        }
    };

    let w_cut = match &profile {
        RadialProfile::Direct(_) => psi.truncation_radius(THETA_TOL).sqrt(),
        RadialProfile::GaussExact { hat, .. } => hat.truncation_radius(THETA_TOL).sqrt(),
        RadialProfile::Quadrature { .. } => {
            // Schwartz-tail bound c (1 + r)^{-10}, constant calibrated on a
            // coarse radial sample of the transformed profile
            let mut c: f64 = 0.0;
            for i in 0..=12 {
                let r = 0.5 * i as f64;
                let val = u_phi_transform(psi, p, r, k)?.norm();
                c = c.max(val * (1.0 + r).powi(10));
            }
            ((c.max(THETA_TOL) / THETA_TOL).powf(0.1) - 1.0).max(2.0)
        }
    };

    let sv = g.v.sqrt();
    let reach = w_cut / sv;
    // all m with ||m - y|| <= reach, nested interval enumeration
    let mut coords = vec![0i64; g.k()];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut count = 0u64;
    let mut stack_err: Option<Error> = None;
    enumerate_ball(
        &mut coords,
        0,
        reach * reach,
        &g.y,
        &mut |m: &[i64], dist2: f64| {
            if stack_err.is_some() {
                return;
            }
            let r = dist2.sqrt() * sv;
            match profile.eval(psi, r, k) {
                Ok(f_val) => {
                    let mut mx = 0.0;
                    for (mj, xj) in m.iter().zip(&g.x) {
                        mx += *mj as f64 * xj;
                    }
                    sum += f_val * e2pi(0.5 * dist2 * g.u + mx);
                    count += 1;
                }
                Err(e) => stack_err = Some(e),
            }
        },
    );
    if let Some(e) = stack_err {
        return Err(e);
    }
    Ok(ThetaValue {
        value: g.v.powf(k as f64 / 4.0) * sum,
        truncation: THETA_TOL * count.max(1) as f64,
    })
}

/// Calls `visit(m, ||m - y||^2)` for every integer vector with
/// ||m - y||^2 <= rad2.
pub(crate) fn enumerate_ball(
    coords: &mut Vec<i64>,
    depth: usize,
    rad2: f64,
    y: &[f64],
    visit: &mut impl FnMut(&[i64], f64),
) {
    enumerate_ball_inner(coords, depth, rad2, 0.0, y, visit);
}

fn enumerate_ball_inner(
    coords: &mut Vec<i64>,
    depth: usize,
    rad2: f64,
    used: f64,
    y: &[f64],
    visit: &mut impl FnMut(&[i64], f64),
) {
    let rem = rad2 - used;
    if rem < 0.0 {
        return;
    }
    if depth == y.len() {
        visit(coords, used);
        return;
    }
    let half = rem.sqrt();
    let lo = (y[depth] - half).ceil() as i64;
    let hi = (y[depth] + half).floor() as i64;
    for m in lo..=hi {
        coords[depth] = m;
        let d = m as f64 - y[depth];
        enumerate_ball_inner(coords, depth + 1, rad2, used + d * d, y, visit);
    }
}

/// Closed-form Haar mean square of the theta pair:
/// (k/2) B_k int psi1 psi2 r^{k/2-1} dr.
pub fn mean_square_haar(psi1: &TestPsi, psi2: &TestPsi, k: u32) -> Result<f64> {
    if k < 2 {
        return Err(domain("mean_square_haar requires k >= 2"));
    }
    let prod = psi1.product(psi2);
    Ok(0.5 * k as f64 * unit_ball_volume(k)? * prod.integral_with_power(k - 2))
}

/// Work cap for the panel quadrature: panels x points x nodes.
pub const MAX_LINE_WORK: f64 = 2.5e10;
const PANELS_PER_BLOCK: usize = 256;

/// v^sigma int Theta_f conj(Theta_g)(u + iv, 0; (0, alpha)) h(v^sigma u) du
/// along the horocycle at height v, computed by blocked 16-point panels with
/// a per-point phase recurrence. Block boundaries are fixed, so results do
/// not depend on the worker count.
pub fn theta_pair_line_integral(
    slice: &SpectrumSlice,
    psi1: &TestPsi,
    psi2: &TestPsi,
    h: &WeightH,
    v: f64,
    sigma: f64,
    width_scale: f64,
) -> Result<f64> {
    if !(v > 0.0) {
        return Err(domain("theta_pair_line_integral requires v > 0"));
    }
    if h.amplitude == 0.0 {
        return Ok(0.0);
    }
    let k = slice.spec().k() as f64;
    let lams = slice.lambdas();
    let tail = slice.cutoff() * v;
    if psi1.envelope(tail) > 1e-12 || psi2.envelope(tail) > 1e-12 {
        return Err(Error::InsufficientData(format!(
            "spectrum cutoff {} leaves psi mass beyond the truncation",
            slice.cutoff()
        )));
    }

    let c1: Vec<f64> = lams.iter().map(|&l| psi1.eval(l * v)).collect();
    let c2: Vec<f64> = lams.iter().map(|&l| psi2.eval(l * v)).collect();
    let lam_max = lams.last().copied().unwrap_or(0.0);
    let stretch = v.powf(-sigma); // u-range half-length is a_h v^{-sigma}
    let u_max = h.half_width * stretch;
    let width = width_scale * (2.0 / lam_max.max(1e-9)).min(0.25);
    let n_panels = (u_max / width).ceil().max(1.0) as usize;
    if n_panels as f64 * lams.len() as f64 * 16.0 > MAX_LINE_WORK {
        return Err(Error::Budget(format!(
            "panel quadrature needs {} panels x {} points",
            n_panels,
            lams.len()
        )));
    }

    // per-point unit rotations: within-panel node offsets and the panel step
    let offsets: Vec<f64> = GL16_NODES.iter().map(|t| 0.5 * width * (t + 1.0)).collect();
    let mut rot = vec![Complex64::new(0.0, 0.0); lams.len() * 16];
    let mut step = vec![Complex64::new(0.0, 0.0); lams.len()];
    for (j, &l) in lams.iter().enumerate() {
        for (q, &d) in offsets.iter().enumerate() {
            rot[j * 16 + q] = Complex64::from_polar(1.0, PI * l * d);
        }
        step[j] = Complex64::from_polar(1.0, PI * l * width);
    }

    let n_blocks = n_panels.div_ceil(PANELS_PER_BLOCK);
    let block_sums: Vec<f64> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let first = b * PANELS_PER_BLOCK;
            let last = (first + PANELS_PER_BLOCK).min(n_panels);
            let u0 = first as f64 * width;
            let mut phase: Vec<Complex64> = lams
                .iter()
                .map(|&l| Complex64::from_polar(1.0, PI * l * u0))
                .collect();
            let mut acc = 0.0;
            let mut s1 = [Complex64::new(0.0, 0.0); 16];
            let mut s2 = [Complex64::new(0.0, 0.0); 16];
            for p in first..last {
                s1.fill(Complex64::new(0.0, 0.0));
                s2.fill(Complex64::new(0.0, 0.0));
                for j in 0..lams.len() {
                    let ph = phase[j];
                    let row = &rot[j * 16..j * 16 + 16];
                    for q in 0..16 {
                        let node = ph * row[q];
                        s1[q] += c1[j] * node;
                        s2[q] += c2[j] * node;
                    }
                    phase[j] = ph * step[j];
                }
                let base = p as f64 * width;
                for q in 0..16 {
                    let u = base + offsets[q];
                    let weight = h.eval(u / stretch);
                    if weight != 0.0 {
                        // even integrand: the [-u_max, 0] half contributes
                        // the conjugate, hence the factor 2 Re
                        acc += GL16_WEIGHTS[q]
                            * (0.5 * width)
                            * 2.0
                            * (s1[q] * s2[q].conj()).re
                            * weight;
                    }
                }
            }
            acc
        })
        .collect();

    let total: f64 = block_sums.iter().sum();
    Ok(v.powf(sigma) * v.powf(0.5 * k) * total)
}

/// The exact theta-line representation of the smoothed pair correlation:
/// R_2 = (1/B_k) lambda^{-(k/2-1)} int Theta_f conj(Theta_g)(u + i/lambda,
/// 0; (0, alpha)) h(lambda^{-(k/2-1)} u) du.
pub fn r2_theta_integral(
    psi1: &TestPsi,
    psi2: &TestPsi,
    h: &WeightH,
    lambda: f64,
    spec: &TorusSpec,
) -> Result<f64> {
    r2_theta_integral_scaled(psi1, psi2, h, lambda, spec, 1.0)
}

/// Same integral with the panel width multiplied by `width_scale`, for
/// quadrature-convergence checks.
pub fn r2_theta_integral_scaled(
    psi1: &TestPsi,
    psi2: &TestPsi,
    h: &WeightH,
    lambda: f64,
    spec: &TorusSpec,
    width_scale: f64,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(domain("r2_theta_integral requires lambda > 0"));
    }
    if h.amplitude == 0.0 {
        return Ok(0.0);
    }
    let trunc = psi1
        .truncation_radius(THETA_TOL)
        .max(psi2.truncation_radius(THETA_TOL));
    let slice = enumerate_spectrum(spec, lambda * trunc)?;
    r2_theta_from_slice(&slice, psi1, psi2, h, lambda, width_scale)
}

/// The slice-level core of [`r2_theta_integral`].
pub fn r2_theta_from_slice(
    slice: &SpectrumSlice,
    psi1: &TestPsi,
    psi2: &TestPsi,
    h: &WeightH,
    lambda: f64,
    width_scale: f64,
) -> Result<f64> {
    let k = slice.spec().k() as f64;
    let sigma = 0.5 * k - 1.0;
    let line = theta_pair_line_integral(slice, psi1, psi2, h, 1.0 / lambda, sigma, width_scale)?;
    Ok(line / slice.spec().unit_ball_volume())
}
