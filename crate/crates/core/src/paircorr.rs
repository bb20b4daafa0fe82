//! Lattice-side pair-correlation estimators: the windowed count
//! R_2[a,b](X), the smoothed bilinear form R_2(psi1, psi2, h, lambda), and
//! their theoretical limits.

use crate::error::{domain, Error, Result};
use crate::spectrum::SpectrumSlice;
use crate::types::{unit_ball_volume, TestPsi, WeightH, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrKind {
    Windowed,
    Smoothed,
}

/// A pair-correlation value together with the normalization point and the
/// limit it should approach.
#[derive(Debug, Clone)]
pub struct CorrEstimate {
    pub kind: CorrKind,
    pub value: f64,
    pub x_or_lambda: f64,
    pub window: Option<Window>,
    pub pair_count: Option<u64>,
    pub theoretical_limit: f64,
    /// Bound on the neglected truncation mass (smoothed estimator only).
    pub error_budget: f64,
}

/// R_2[a,b](X) = (1/(B_k X)) #{i != j : X_i, X_j in [X,2X], X_i - X_j in [a,b]}.
///
/// Windows are closed; ordered pairs with difference exactly a or b count,
/// and ties count when 0 lies in the window.
pub fn r2_windowed(slice: &SpectrumSlice, x: f64, w: Window) -> Result<CorrEstimate> {
    if !(x > 0.0) {
        return Err(domain("r2_windowed requires X > 0"));
    }
    if 2.0 * x > slice.rescaled_cutoff() * (1.0 + 1e-12) {
        return Err(Error::InsufficientData(format!(
            "slice cutoff covers rescaled values up to {}, window of data needs {}",
            slice.rescaled_cutoff(),
            2.0 * x
        )));
    }
    let xs = slice.rescaled();
    let seg_lo = xs.partition_point(|&v| v < x);
    let seg_hi = xs.partition_point(|&v| v <= 2.0 * x);
    let seg = &xs[seg_lo..seg_hi];

    // two-pointer sweep: for each i count j with X_j in [X_i - b, X_i - a]
    let mut count = 0u64;
    let mut lo = 0usize;
    let mut hi = 0usize;
    for &xi in seg {
        let lo_val = xi - w.b;
        let hi_val = xi - w.a;
        while lo < seg.len() && seg[lo] < lo_val {
            lo += 1;
        }
        if hi < lo {
            hi = lo;
        }
        while hi < seg.len() && seg[hi] <= hi_val {
            hi += 1;
        }
        count += (hi - lo) as u64;
        if w.contains(0.0) {
            count -= 1; // remove the i = j self pair
        }
    }

    let bk = slice.spec().unit_ball_volume();
    Ok(CorrEstimate {
        kind: CorrKind::Windowed,
        value: count as f64 / (bk * x),
        x_or_lambda: x,
        window: Some(w),
        pair_count: Some(count),
        theoretical_limit: bk * w.width(),
        error_budget: 0.0,
    })
}

/// Tolerance below which psi tails past the cutoff are accepted.
pub const PSI_TAIL_TOL: f64 = 1e-12;
/// Smoothing-kernel truncation threshold for the inner sum.
pub const HAT_TRUNC_TOL: f64 = 1e-14;

/// R_2(psi1, psi2, h, lambda) =
/// (1/(B_k lambda^{k/2})) sum_{i,j} psi1(lambda_i/lambda)
/// psi2(lambda_j/lambda) hhat(lambda^{k/2-1}(lambda_i - lambda_j)),
/// diagonal included.
pub fn r2_smoothed_direct(
    slice: &SpectrumSlice,
    psi1: &TestPsi,
    psi2: &TestPsi,
    h: &WeightH,
    lambda: f64,
) -> Result<CorrEstimate> {
    if !(lambda > 0.0) {
        return Err(domain("r2_smoothed_direct requires lambda > 0"));
    }
    let k = slice.spec().k();
    let tail = slice.cutoff() / lambda;
    if psi1.envelope(tail) > PSI_TAIL_TOL || psi2.envelope(tail) > PSI_TAIL_TOL {
        return Err(Error::InsufficientData(format!(
            "psi tail beyond cutoff/lambda = {tail:.3} exceeds {PSI_TAIL_TOL:.1e}"
        )));
    }

    let lams = slice.lambdas();
    let n = lams.len();
    let scale = lambda.powf(k as f64 / 2.0 - 1.0);
    let w1: Vec<f64> = lams.iter().map(|&l| psi1.eval(l / lambda)).collect();
    let w2: Vec<f64> = lams.iter().map(|&l| psi2.eval(l / lambda)).collect();
    let e1: Vec<f64> = lams.iter().map(|&l| psi1.envelope(l / lambda)).collect();
    let e2: Vec<f64> = lams.iter().map(|&l| psi2.envelope(l / lambda)).collect();
    // suffix maxima make the pair cut monotone even for humped psi
    let mut suf1 = e1.clone();
    let mut suf2 = e2.clone();
    for i in (0..n.saturating_sub(1)).rev() {
        suf1[i] = suf1[i].max(suf1[i + 1]);
        suf2[i] = suf2[i].max(suf2[i + 1]);
    }

    let hat_bound = h.integral().abs(); // |hhat| <= int |h|
    let s_cut = h.hat_tail_radius(HAT_TRUNC_TOL);
    let diff_cut = s_cut / scale.max(1e-300);

    let mut sum = 0.0;
    let mut budget = 0.0;
    // ordered pairs split into diagonal + twice the symmetric part
    for i in 0..n {
        sum += w1[i] * w2[i] * h.hat(0.0);
        let mut j = i + 1;
        while j < n {
            // cheap lower bound on everything this row can still contribute
            if (e1[i] * suf2[j] + e2[i] * suf1[j]) * hat_bound < HAT_TRUNC_TOL {
                budget += (n - j) as f64 * HAT_TRUNC_TOL;
                break;
            }
            let d = lams[j] - lams[i];
            if d > diff_cut {
                budget += (n - j) as f64 * HAT_TRUNC_TOL;
                break;
            }
            let hv = h.hat(scale * d);
            sum += (w1[i] * w2[j] + w1[j] * w2[i]) * hv;
            j += 1;
        }
    }

    let bk = slice.spec().unit_ball_volume();
    let norm = bk * lambda.powf(k as f64 / 2.0);
    Ok(CorrEstimate {
        kind: CorrKind::Smoothed,
        value: sum / norm,
        x_or_lambda: lambda,
        window: None,
        pair_count: None,
        theoretical_limit: limit_smoothed(psi1, psi2, h, k as u32)?,
        error_budget: budget / norm,
    })
}

/// The two-term limit of the smoothed pair correlation:
/// (k/2) hhat(0) int psi1 psi2 r^{k/2-1} dr
/// + (k^2/4) B_k int hhat  int psi1 psi2 r^{k-2} dr,
/// with int hhat = 2 h(0) and all moments in closed form.
pub fn limit_smoothed(psi1: &TestPsi, psi2: &TestPsi, h: &WeightH, k: u32) -> Result<f64> {
    if k < 2 {
        return Err(domain("limit_smoothed requires k >= 2"));
    }
    let prod = psi1.product(psi2);
    let kf = k as f64;
    let term1 = 0.5 * kf * h.hat(0.0) * prod.integral_with_power(k - 2);
    let term2 = 0.25 * kf * kf
        * unit_ball_volume(k)?
        * h.hat_integral()
        * prod.integral_with_power(2 * (k - 2));
    Ok(term1 + term2)
}

/// The divided difference (r1^{k/2} - r2^{k/2})/(r1 - r2), computed by the
/// cancellation-free summation forms; on the diagonal (k/2) r^{k/2-1}.
pub fn rho_factor(r1: f64, r2: f64, k: u32) -> Result<f64> {
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(domain("rho_factor requires positive arguments"));
    }
    if k % 2 == 0 {
        // sum_{nu=1}^{k/2} r1^{k/2-nu} r2^{nu-1}
        let half = k / 2;
        let mut acc = 0.0;
        for nu in 1..=half {
            acc += r1.powi((half - nu) as i32) * r2.powi(nu as i32 - 1);
        }
        Ok(acc)
    } else {
        // (1/(sqrt r1 + sqrt r2)) sum_{nu=1}^{k} r1^{(k-nu)/2} r2^{(nu-1)/2}
        let s1 = r1.sqrt();
        let s2 = r2.sqrt();
        let mut acc = 0.0;
        for nu in 1..=k {
            acc += s1.powi((k - nu) as i32) * s2.powi(nu as i32 - 1);
        }
        Ok(acc / (s1 + s2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::enumerate_spectrum;
    use crate::types::TorusSpec;

    fn hand_slice(xs: Vec<f64>) -> SpectrumSlice {
        let spec = TorusSpec::new(2, vec![0.0, 0.0]).unwrap();
        SpectrumSlice::from_rescaled(spec, xs)
    }

    /// Naive O(N^2) windowed counting oracle.
    fn brute_pairs(xs: &[f64], x: f64, w: Window) -> u64 {
        let mut count = 0;
        for (i, &a) in xs.iter().enumerate() {
            for (j, &b) in xs.iter().enumerate() {
                if i != j
                    && (x..=2.0 * x).contains(&a)
                    && (x..=2.0 * x).contains(&b)
                    && w.contains(a - b)
                {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn hand_count_example() {
        let s = hand_slice(vec![1.0, 1.5, 2.0]);
        let est = r2_windowed(&s, 1.0, Window::new(0.4, 0.6).unwrap()).unwrap();
        assert_eq!(est.pair_count, Some(2));
        assert!((est.value - 2.0 / std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn sweep_matches_brute_force() {
        let spec = TorusSpec::new(2, vec![0.2599, 0.5874]).unwrap();
        let s = enumerate_spectrum(&spec, 60.0).unwrap();
        for (x, a, b) in [(10.0, 0.0, 1.0), (20.0, -0.5, 0.5), (15.0, 0.25, 0.25)] {
            let w = Window::new(a, b).unwrap();
            let est = r2_windowed(&s, x, w).unwrap();
            assert_eq!(est.pair_count.unwrap(), brute_pairs(s.rescaled(), x, w));
        }
    }

    #[test]
    fn window_additivity_and_reflection() {
        let spec = TorusSpec::new(2, vec![0.37, 0.81]).unwrap();
        let s = enumerate_spectrum(&spec, 80.0).unwrap();
        let x = 25.0;
        let ab = r2_windowed(&s, x, Window::new(0.0, 0.5).unwrap()).unwrap();
        // (b, c] realized as closed [b + eps, c] on float data with no ties at b
        let bc = {
            let mut count = 0u64;
            let xs = s.rescaled();
            for (i, &p) in xs.iter().enumerate() {
                for (j, &q) in xs.iter().enumerate() {
                    if i != j
                        && (x..=2.0 * x).contains(&p)
                        && (x..=2.0 * x).contains(&q)
                        && p - q > 0.5
                        && p - q <= 1.2
                    {
                        count += 1;
                    }
                }
            }
            count
        };
        let ac = r2_windowed(&s, x, Window::new(0.0, 1.2).unwrap()).unwrap();
        assert_eq!(ab.pair_count.unwrap() + bc, ac.pair_count.unwrap());

        let pos = r2_windowed(&s, x, Window::new(0.3, 0.9).unwrap()).unwrap();
        let neg = r2_windowed(&s, x, Window::new(-0.9, -0.3).unwrap()).unwrap();
        assert_eq!(pos.pair_count, neg.pair_count);
    }

    #[test]
    fn degenerate_zero_window_counts_exact_ties() {
        let spec = TorusSpec::new_rational(3, vec![(0, 1), (0, 1), (0, 1)]).unwrap();
        let s = enumerate_spectrum(&spec, 40.0).unwrap();
        let w = Window::new(0.0, 0.0).unwrap();
        let a = r2_windowed(&s, 10.0, w).unwrap();
        let b = r2_windowed(&s, 25.0, w).unwrap();
        assert!(a.pair_count.unwrap() > 0);
        assert!(b.value > 0.0);
        assert_eq!(a.pair_count.unwrap() % 2, 0);
    }

    #[test]
    fn insufficient_cutoff_rejected() {
        let spec = TorusSpec::new(2, vec![0.0, 0.0]).unwrap();
        let s = enumerate_spectrum(&spec, 10.0).unwrap();
        assert!(matches!(
            r2_windowed(&s, 8.0, Window::new(0.0, 1.0).unwrap()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn smoothed_matches_naive_double_sum() {
        let spec = TorusSpec::new_rational(2, vec![(1, 2), (1, 2)]).unwrap();
        let s = enumerate_spectrum(&spec, 42.0).unwrap();
        let psi = TestPsi::gaussian();
        let h = WeightH::triangle(1.0, 1.0).unwrap();
        let lambda = 1.0;
        let est = r2_smoothed_direct(&s, &psi, &psi, &h, lambda).unwrap();
        // naive oracle over all pairs with lambda_i <= 40
        let lams: Vec<f64> = s.lambdas().iter().cloned().filter(|&l| l <= 42.0).collect();
        let k = 2.0f64;
        let scale = lambda.powf(k / 2.0 - 1.0);
        let mut sum = 0.0;
        for &li in &lams {
            for &lj in &lams {
                sum += psi.eval(li / lambda) * psi.eval(lj / lambda) * h.hat(scale * (li - lj));
            }
        }
        let oracle = sum / (std::f64::consts::PI * lambda.powf(k / 2.0));
        assert!(
            (est.value - oracle).abs() < 1e-10,
            "{} vs {}",
            est.value,
            oracle
        );
    }

    #[test]
    fn limit_smoothed_hand_value() {
        // psi = e^{-pi r}, k = 2, unit triangle: 1/(2 pi) + 1
        let psi = TestPsi::gaussian();
        let h = WeightH::triangle(1.0, 1.0).unwrap();
        let v = limit_smoothed(&psi, &psi, &h, 2).unwrap();
        assert!((v - (0.5 / std::f64::consts::PI + 1.0)).abs() < 1e-13);
    }

    #[test]
    fn limit_smoothed_bilinear_zero() {
        let psi = TestPsi::gaussian();
        let zero = TestPsi::new(vec![]).unwrap();
        let h = WeightH::triangle(1.0, 1.0).unwrap();
        assert_eq!(limit_smoothed(&psi, &zero, &h, 2).unwrap(), 0.0);
    }

    #[test]
    fn limit_smoothed_k3_quadrature_check() {
        let psi = TestPsi::gaussian();
        let h = WeightH::triangle(1.0, 1.0).unwrap();
        let v = limit_smoothed(&psi, &psi, &h, 3).unwrap();
        // quadrature oracle for both moments of e^{-2 pi r}
        let m1 = crate::quad::adaptive(
            |r| (-2.0 * std::f64::consts::PI * r).exp() * r.sqrt(),
            0.0,
            40.0,
            1e-13,
        );
        let m2 = crate::quad::adaptive(
            |r| (-2.0 * std::f64::consts::PI * r).exp() * r,
            0.0,
            40.0,
            1e-13,
        );
        let b3 = unit_ball_volume(3).unwrap();
        let expect = 1.5 * h.hat(0.0) * m1 + 2.25 * b3 * h.hat_integral() * m2;
        assert!((v - expect).abs() < 1e-10, "{v} vs {expect}");
    }

    #[test]
    fn rho_factor_values() {
        assert!((rho_factor(3.7, 0.4, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!((rho_factor(2.0, 1.0, 4).unwrap() - 3.0).abs() < 1e-15);
        assert!((rho_factor(4.0, 4.0, 3).unwrap() - 3.0).abs() < 1e-14);
        assert!(rho_factor(-1.0, 1.0, 2).is_err());
    }

    #[test]
    fn rho_factor_symmetric_and_continuous() {
        for k in [2u32, 3, 4, 5] {
            for (r1, r2) in [(0.5, 2.0), (1.3, 1.3000000001), (4.0, 0.01)] {
                let a = rho_factor(r1, r2, k).unwrap();
                let b = rho_factor(r2, r1, k).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs());
            }
            let r = 1.7;
            let off = rho_factor(r, r + 1e-9, k).unwrap();
            let diag = 0.5 * k as f64 * r.powf(k as f64 / 2.0 - 1.0);
            assert!((off - diag).abs() < 1e-7, "k={k}: {off} vs {diag}");
        }
    }
}
