//! Horocycle-average experiments, the dominating function F_R with its L^1
//! mean, and the block-sum diagnostics behind the diophantine condition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::quad;
use crate::spectrum::enumerate_spectrum;
use crate::theta::{enumerate_ball, theta_pair_line_integral};
use crate::types::{unit_ball_volume, TestPsi, TorusSpec, WeightH};

/// Envelope tolerance for all inner lattice sums.
const LATTICE_TOL: f64 = 1e-14;

/// The unbounded comparison function F_R: a sum of f((y_g + m) sqrt(v_g))
/// v_g^beta over cusp cosets, cut off at height R by chi_R.
#[derive(Debug, Clone)]
pub struct DominatingFn {
    pub r_cut: f64,
    pub beta: f64,
    pub psi: TestPsi,
}

impl DominatingFn {
    pub fn new(r_cut: f64, beta: f64, psi: TestPsi) -> Result<Self> {
        if !(r_cut > 1.0) {
            return Err(domain("DominatingFn requires R > 1"));
        }
        Ok(Self { r_cut, beta, psi })
    }

    /// The default exponent beta = k/2 of the theta-pair comparison.
    pub fn standard(r_cut: f64, k: u32, psi: TestPsi) -> Result<Self> {
        Self::new(r_cut, k as f64 / 2.0, psi)
    }
}

/// sum_m psi(||w + m||^2 t^2), truncated by the psi envelope.
fn lattice_sum(psi: &TestPsi, w: &[f64], t: f64) -> f64 {
    let reach = psi.truncation_radius(LATTICE_TOL).sqrt() / t;
    let center: Vec<f64> = w.iter().map(|c| -c).collect();
    let mut coords = vec![0i64; w.len()];
    let mut acc = 0.0;
    enumerate_ball(&mut coords, 0, reach * reach, &center, &mut |_, d2| {
        acc += psi.eval(d2 * t * t);
    });
    acc
}

/// Full three-part expansion of F_R(tau; xi): the height-v term, the
/// inverted-height term, and the coprime (c, d) double sum. Valid at any
/// tau in the upper half plane.
pub fn dominating_fn_eval(
    dom: &DominatingFn,
    u: f64,
    v: f64,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    if !(v > 0.0) {
        return Err(domain("dominating_fn_eval requires v > 0"));
    }
    if x.len() != y.len() || x.is_empty() {
        return Err(domain("xi must split into equal nonempty x, y"));
    }
    let r = dom.r_cut;
    let sv = v.sqrt();
    let abs2 = u * u + v * v;
    let mut acc = 0.0;

    if v >= r {
        let neg: Vec<f64> = y.iter().map(|c| -c).collect();
        acc += v.powf(dom.beta) * (lattice_sum(&dom.psi, y, sv) + lattice_sum(&dom.psi, &neg, sv));
    }
    if v / abs2 >= r {
        let t = sv / abs2.sqrt();
        let neg: Vec<f64> = x.iter().map(|c| -c).collect();
        acc += (v / abs2).powf(dom.beta)
            * (lattice_sum(&dom.psi, x, t) + lattice_sum(&dom.psi, &neg, t));
    }

    // c^2 v^2 <= |c tau + d|^2 <= v/R bounds the coprime sum
    let c_max = (1.0 / (v * r)).sqrt().floor() as i64;
    for c in -c_max..=c_max {
        if c == 0 {
            continue;
        }
        let cf = c as f64;
        let slack = v / r - cf * cf * v * v;
        if slack < 0.0 {
            continue;
        }
        let s = slack.sqrt();
        let d_lo = (-cf * u - s).ceil() as i64;
        let d_hi = (-cf * u + s).floor() as i64;
        for d in d_lo..=d_hi {
            if d == 0 || gcd(c.unsigned_abs(), d.unsigned_abs()) != 1 {
                continue;
            }
            let df = d as f64;
            let denom = (cf * u + df).powi(2) + cf * cf * v * v;
            let v_g = v / denom;
            if v_g < r {
                continue;
            }
            let w: Vec<f64> = x
                .iter()
                .zip(y)
                .map(|(xj, yj)| cf * xj + df * yj)
                .collect();
            acc += v_g.powf(dom.beta) * lattice_sum(&dom.psi, &w, v_g.sqrt());
        }
    }
    Ok(acc)
}

/// Two-term representation of F_R valid for tau in the fundamental domain
/// of the modular group: only the identity coset survives the cutoff.
pub fn dominating_fn_eval_fd(dom: &DominatingFn, v: f64, y: &[f64]) -> Result<f64> {
    if !(v > 0.0) {
        return Err(domain("dominating_fn_eval_fd requires v > 0"));
    }
    if v < dom.r_cut {
        return Ok(0.0);
    }
    let sv = v.sqrt();
    let neg: Vec<f64> = y.iter().map(|c| -c).collect();
    Ok(v.powf(dom.beta) * (lattice_sum(&dom.psi, y, sv) + lattice_sum(&dom.psi, &neg, sv)))
}

/// Number of cusp cosets of height >= R above tau.
pub fn height_indicator(r_cut: f64, u: f64, v: f64) -> u32 {
    let mut n = 0;
    if v >= r_cut {
        n += 1;
    }
    if v / (u * u + v * v) >= r_cut {
        n += 1;
    }
    let c_max = (1.0 / (v * r_cut)).sqrt().floor() as i64;
    for c in 1..=c_max {
        let cf = c as f64;
        let slack = v / r_cut - cf * cf * v * v;
        if slack < 0.0 {
            continue;
        }
        let s = slack.sqrt();
        let d_lo = (-cf * u - s).ceil() as i64;
        let d_hi = (-cf * u + s).floor() as i64;
        for d in d_lo..=d_hi {
            if d == 0 || gcd(c as u64, d.unsigned_abs()) != 1 {
                continue;
            }
            let denom = (cf * u + d as f64).powi(2) + cf * cf * v * v;
            if v / denom >= r_cut {
                n += 1;
            }
        }
    }
    n
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// int_{R^k} f(w) dw for the radial profile f(w) = psi(||w||^2).
pub fn radial_profile_integral(psi: &TestPsi, k: u32) -> Result<f64> {
    Ok(0.5 * k as f64 * unit_ball_volume(k)? * psi.integral_with_power(k.saturating_sub(2)))
}

/// Closed-form L^1 mean over the quotient:
/// mu(F_R) = 2 pi R^{-(k/2+1-beta)} / (k/2+1-beta) int f.
pub fn l1_mean_dominating(dom: &DominatingFn, k: u32) -> Result<f64> {
    let expo = k as f64 / 2.0 + 1.0 - dom.beta;
    if expo <= 0.0 {
        return Err(domain("l1 mean diverges for beta >= k/2 + 1"));
    }
    let int_f = radial_profile_integral(&dom.psi, k)?;
    Ok(2.0 * std::f64::consts::PI * dom.r_cut.powf(-expo) / expo * int_f)
}

/// Monte-Carlo estimate of mu(F_R): u and xi uniform on the fundamental
/// cell, v importance-sampled with density R/v^2 on [R, inf). The angular
/// fiber contributes the factor pi.
pub fn mc_mean_dominating(dom: &DominatingFn, k: u32, samples: u64, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(domain("mc_mean_dominating requires samples > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    let mut y = vec![0.0; k as usize];
    for _ in 0..samples {
        let _u: f64 = rng.gen::<f64>() - 0.5;
        let v = dom.r_cut / (1.0 - rng.gen::<f64>());
        for yj in y.iter_mut() {
            *yj = rng.gen::<f64>() - 0.5;
        }
        acc += dominating_fn_eval_fd(dom, v, &y)?;
    }
    Ok(std::f64::consts::PI / dom.r_cut * acc / samples as f64)
}

/// Blocked shift sum sum_{d=1}^{D} sum_m f(T (d alpha + m)).
pub fn block_sum(alpha: &[f64], d_max: u64, t: f64, psi: &TestPsi) -> Result<f64> {
    if alpha.is_empty() || d_max == 0 {
        return Err(domain("block_sum requires nonempty alpha and D >= 1"));
    }
    if !(t > 1.0) {
        return Err(domain("block_sum requires T > 1"));
    }
    let mut acc = 0.0;
    let reach2 = psi.truncation_radius(LATTICE_TOL) / (t * t);
    if reach2 <= 0.25 {
        // only the nearest lattice point can land inside the envelope;
        // fixed blocks summed in order keep the result worker-independent
        const BLOCK: u64 = 1 << 16;
        let blocks = d_max.div_ceil(BLOCK);
        let partials: Vec<f64> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let lo = b * BLOCK + 1;
                let hi = ((b + 1) * BLOCK).min(d_max);
                let mut s = 0.0;
                for d in lo..=hi {
                    let mut d2 = 0.0;
                    for aj in alpha {
                        let w = d as f64 * aj;
                        let frac = w - w.round();
                        d2 += frac * frac;
                    }
                    if d2 <= reach2 {
                        s += psi.eval(d2 * t * t);
                    }
                }
                s
            })
            .collect();
        acc = partials.iter().sum();
    } else {
        let mut w = vec![0.0; alpha.len()];
        for d in 1..=d_max {
            for (wj, aj) in w.iter_mut().zip(alpha) {
                *wj = d as f64 * aj;
            }
            acc += lattice_sum(psi, &w, t);
        }
    }
    Ok(acc)
}

/// Which unbounded observable a horocycle probe averages.
#[derive(Debug, Clone)]
pub enum Observable {
    Constant,
    ThetaPair,
    Dominating(DominatingFn),
}

/// One horocycle experiment: v^sigma int F(u + iv, 0; (0, alpha))
/// h(v^sigma u) du at cusp height v.
#[derive(Debug, Clone)]
pub struct HorocycleProbe {
    pub v: f64,
    pub sigma: f64,
    pub h: WeightH,
    pub target: Observable,
}

impl HorocycleProbe {
    pub fn new(v: f64, sigma: f64, h: WeightH, target: Observable) -> Result<Self> {
        if !(v > 0.0) {
            return Err(domain("HorocycleProbe requires v > 0"));
        }
        if !(sigma >= 0.0) {
            return Err(domain("HorocycleProbe requires sigma >= 0"));
        }
        Ok(Self {
            v,
            sigma,
            h,
            target,
        })
    }
}

pub fn horocycle_average(
    probe: &HorocycleProbe,
    spec: &TorusSpec,
    psi1: &TestPsi,
    psi2: &TestPsi,
) -> Result<f64> {
    match &probe.target {
        // the change of variable v^sigma u -> u is exact for F = 1
        Observable::Constant => Ok(probe.h.integral()),
        Observable::ThetaPair => {
            let trunc = psi1
                .truncation_radius(LATTICE_TOL)
                .max(psi2.truncation_radius(LATTICE_TOL));
            let slice = enumerate_spectrum(spec, trunc / probe.v)?;
            theta_pair_line_integral(&slice, psi1, psi2, &probe.h, probe.v, probe.sigma, 1.0)
        }
        Observable::Dominating(dom) => {
            let stretch = probe.v.powf(-probe.sigma);
            let u_max = probe.h.half_width * stretch;
            let x = vec![0.0; spec.k()];
            // F_R is even in u along (0, alpha) lines
            let half = quad::panels(
                |u| {
                    dominating_fn_eval(dom, u, probe.v, &x, spec.alpha()).unwrap_or(f64::NAN)
                        * probe.h.eval(u / stretch)
                },
                0.0,
                u_max,
                u_max / 512.0,
            );
            Ok(probe.v.powf(probe.sigma) * 2.0 * half)
        }
    }
}

/// The cusp contribution of a dominating probe: the same average restricted
/// to |u| > v^{1 - eps}, with sigma = k/2 - 1. Used only for trend charts.
pub fn cusp_restricted_average(
    dom: &DominatingFn,
    spec: &TorusSpec,
    h: &WeightH,
    v: f64,
    eps: f64,
) -> Result<f64> {
    if !(v > 0.0 && v < 1.0) {
        return Err(domain("cusp_restricted_average requires 0 < v < 1"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain("cusp_restricted_average requires 0 < eps < 1"));
    }
    let sigma = spec.k() as f64 / 2.0 - 1.0;
    let stretch = v.powf(-sigma);
    let u_max = h.half_width * stretch;
    let u_min = v.powf(1.0 - eps);
    if u_min >= u_max {
        return Ok(0.0);
    }
    let x = vec![0.0; spec.k()];
    let half = quad::panels(
        |u| {
            dominating_fn_eval(dom, u, v, &x, spec.alpha()).unwrap_or(f64::NAN)
                * h.eval(u / stretch)
        },
        u_min,
        u_max,
        (u_max - u_min) / 512.0,
    );
    Ok(v.powf(sigma) * 2.0 * half)
}
