//! Exact counting of equal-value (degenerate) spectral pairs, the mechanism
//! behind the divergence of the pair correlation at rational and critical
//! shifts, and growth-law fits for the normalized count.

use std::collections::HashMap;

use crate::error::{domain, Error, Result};
use crate::spectrum::enumerate_spectrum;
use crate::theta::enumerate_ball;
use crate::types::TorusSpec;

/// Normalized degenerate-pair counts over a grid of X values, with fitted
/// growth models. `samples` holds (X, count/X); `fitted_exponent` is the
/// power-law slope, `fitted_log_coefficient` the slope of count/X against
/// ln X (the logarithmic-growth model for borderline shifts).
#[derive(Debug, Clone)]
pub struct DegeneracyCurve {
    pub spec: TorusSpec,
    pub samples: Vec<(f64, f64)>,
    pub fitted_exponent: f64,
    pub fitted_log_coefficient: f64,
}

/// Ordered pairs m != n with equal exact key and both rescaled values in
/// [lo, hi]. Ties are decided on the integer key q^2 * lambda, never on
/// float equality.
pub fn count_equal_pairs_between(spec: &TorusSpec, lo: f64, hi: f64) -> Result<u64> {
    if !(0.0 <= lo && lo <= hi) {
        return Err(domain("count_equal_pairs needs 0 <= lo <= hi"));
    }
    let k = spec.k() as f64;
    let slice = enumerate_spectrum(spec, hi.powf(2.0 / k))?;
    let keys = slice
        .exact_keys()
        .ok_or_else(|| domain("equal-pair counting needs exact rational keys"))?;
    let rescaled = slice.rescaled();

    let mut total: u64 = 0;
    let mut i = 0;
    while i < keys.len() {
        let mut j = i + 1;
        while j < keys.len() && keys[j] == keys[i] {
            j += 1;
        }
        // whole run shares one float value, so the window test is uniform
        if rescaled[i] >= lo && rescaled[i] <= hi {
            let n = (j - i) as u64;
            total += n * (n - 1);
        }
        i = j;
    }
    Ok(total)
}

/// Ordered equal pairs with both norms^k <= x.
pub fn count_equal_pairs(spec: &TorusSpec, x: f64) -> Result<u64> {
    count_equal_pairs_between(spec, 0.0, x)
}

/// Equal-pair count for a critical shift: irrational head block (pairwise
/// ties there force identical head coordinates) followed by exact rationals.
/// Points are bucketed on (m_head, exact tail key).
pub fn count_equal_pairs_critical(head: &[f64], tail: &[(i64, i64)], x: f64) -> Result<u64> {
    if head.is_empty() || tail.is_empty() {
        return Err(domain("critical count needs nonempty head and tail blocks"));
    }
    if !(x > 0.0) {
        return Err(domain("critical count needs x > 0"));
    }
    if tail.iter().any(|&(_, d)| d <= 0) {
        return Err(domain("tail rationals need positive denominators"));
    }
    let k = head.len() + tail.len();
    let q = tail.iter().map(|&(_, d)| d).fold(1i64, lcm);
    let rad2 = x.powf(2.0 / k as f64);
    // tail key magnitude is bounded by k q^2 (sqrt(rad2)+1)^2
    let bound = k as f64 * (q as f64).powi(2) * (rad2.sqrt() + 2.0).powi(2);
    if bound >= i64::MAX as f64 / 4.0 {
        return Err(Error::Budget(format!(
            "exact tail keys overflow i64 at x = {x}"
        )));
    }

    let mut alpha: Vec<f64> = head.to_vec();
    let tail_scaled: Vec<i64> = tail.iter().map(|&(p, d)| p * (q / d)).collect();
    alpha.extend(tail.iter().map(|&(p, d)| p as f64 / d as f64));

    let mut buckets: HashMap<Vec<i64>, u64> = HashMap::new();
    let mut coords = vec![0i64; k];
    enumerate_ball(&mut coords, 0, rad2, &alpha, &mut |m, _| {
        let mut key: Vec<i64> = m[..head.len()].to_vec();
        let tail_key: i64 = m[head.len()..]
            .iter()
            .zip(&tail_scaled)
            .map(|(&mj, &pj)| {
                let t = q * mj - pj;
                t * t
            })
            .sum();
        key.push(tail_key);
        *buckets.entry(key).or_insert(0) += 1;
    });
    Ok(buckets.values().map(|&n| n * (n - 1)).sum())
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

fn build_curve(spec: TorusSpec, samples: Vec<(f64, f64)>) -> Result<DegeneracyCurve> {
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(domain("degeneracy samples must be strictly increasing in X"));
    }
    let log_pts: Vec<(f64, f64)> = samples.iter().map(|&(x, c)| (x.ln(), c.ln())).collect();
    let lin_pts: Vec<(f64, f64)> = samples.iter().map(|&(x, c)| (x.ln(), c)).collect();
    let fitted_exponent = least_squares(&log_pts).0;
    let fitted_log_coefficient = least_squares(&lin_pts).0;
    Ok(DegeneracyCurve {
        spec,
        samples,
        fitted_exponent,
        fitted_log_coefficient,
    })
}

pub fn degeneracy_curve(spec: &TorusSpec, xs: &[f64]) -> Result<DegeneracyCurve> {
    let samples = xs
        .iter()
        .map(|&x| Ok((x, count_equal_pairs(spec, x)? as f64 / x)))
        .collect::<Result<Vec<_>>>()?;
    build_curve(spec.clone(), samples)
}

pub fn degeneracy_curve_critical(
    head: &[f64],
    tail: &[(i64, i64)],
    xs: &[f64],
) -> Result<DegeneracyCurve> {
    let samples = xs
        .iter()
        .map(|&x| Ok((x, count_equal_pairs_critical(head, tail, x)? as f64 / x)))
        .collect::<Result<Vec<_>>>()?;
    let mut alpha: Vec<f64> = head.to_vec();
    alpha.extend(tail.iter().map(|&(p, d)| p as f64 / d as f64));
    build_curve(TorusSpec::new(alpha.len(), alpha)?, samples)
}

/// Power-law fit (slope of log normalized count against log X) with r^2.
/// Requires at least 5 samples spanning at least two decades.
pub fn growth_fit(curve: &DegeneracyCurve) -> Result<(f64, f64)> {
    if curve.samples.len() < 5 {
        return Err(Error::InsufficientData(
            "growth fit needs at least 5 samples".into(),
        ));
    }
    let x_min = curve.samples.first().unwrap().0;
    let x_max = curve.samples.last().unwrap().0;
    if x_max / x_min < 100.0 {
        return Err(Error::InsufficientData(
            "growth fit needs X spanning at least two decades".into(),
        ));
    }
    if curve.samples.iter().any(|&(_, c)| c <= 0.0) {
        return Err(Error::InsufficientData(
            "growth fit needs positive counts at every sample".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .map(|&(x, c)| (x.ln(), c.ln()))
        .collect();
    let (slope, _, r2) = least_squares(&pts);
    Ok((slope, r2))
}
