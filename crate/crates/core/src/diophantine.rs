//! Diophantine-type estimation for shift vectors, and construction of the
//! algebraic and critical test vectors.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::types::TorusSpec;

/// Scan-bounded estimate of the diophantine type of a shift vector, from the
/// record envelope of e(q) = max_j dist(q alpha_j, Z): kappa_hat - 1 is minus
/// the log-log least-squares slope through the running minima of e(q). (A raw
/// max of log(1/e(q))/log q is useless: e(2) <= 1/2 already forces it >= 1.)
/// A finite scan only estimates the type; `q_max` is carried so reports stay
/// comparable.
#[derive(Debug, Clone)]
pub struct DiophReport {
    pub alpha: Vec<f64>,
    pub q_max: u64,
    pub kappa_hat: f64,
    pub worst_q: u64,
    pub worst_error: f64,
    pub rational_flag: bool,
    pub c_hat: f64,
}

fn dist_to_integer(t: f64) -> f64 {
    (t - t.round()).abs()
}

/// e(q) for float alpha; exact-rational specs short-circuit to integer
/// arithmetic so that rational_flag means exactly zero, not merely tiny.
fn scan_error(spec: &TorusSpec, q: u64) -> f64 {
    if let Some(exact) = spec.alpha_exact() {
        let mut worst = 0.0f64;
        for &(p, den) in exact {
            // dist(q p / den, Z) = min(r, den - r) / den with r = q p mod den
            let r = (q as i64 * p).rem_euclid(den);
            let num = r.min(den - r);
            worst = worst.max(num as f64 / den as f64);
        }
        worst
    } else {
        spec.alpha()
            .iter()
            .map(|&a| dist_to_integer(q as f64 * a))
            .fold(0.0, f64::max)
    }
}

/// (q, e(q)) trace for approximation-quality plots.
pub fn scan_trace(spec: &TorusSpec, q_max: u64) -> Vec<(u64, f64)> {
    (2..=q_max)
        .into_par_iter()
        .map(|q| (q, scan_error(spec, q)))
        .collect()
}

pub fn estimate_type(spec: &TorusSpec, q_max: u64) -> Result<DiophReport> {
    if q_max < 2 {
        return Err(domain("estimate_type requires Q_max >= 2"));
    }
    // parallel fill is deterministic; the envelope pass is sequential
    let errors: Vec<f64> = (2..=q_max)
        .into_par_iter()
        .map(|q| scan_error(spec, q))
        .collect();

    let mut records: Vec<(u64, f64)> = Vec::new();
    let mut best = f64::INFINITY;
    for (i, &e) in errors.iter().enumerate() {
        let q = i as u64 + 2;
        if e == 0.0 {
            // exact denominator hit; no finite type is claimed
            return Ok(DiophReport {
                alpha: spec.alpha().to_vec(),
                q_max,
                kappa_hat: f64::INFINITY,
                worst_q: q,
                worst_error: 0.0,
                rational_flag: true,
                c_hat: 0.0,
            });
        }
        if e < best {
            best = e;
            records.push((q, e));
        }
    }

    let kappa_hat = if records.len() >= 2 {
        let pts: Vec<(f64, f64)> = records
            .iter()
            .map(|&(q, e)| ((q as f64).ln(), e.ln()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        1.0 - sxy / sxx
    } else {
        let (q, e) = records[0];
        1.0 + (1.0 / e).ln() / (q as f64).ln()
    };

    let &(worst_q, worst_error) = records.last().unwrap();
    let c_hat = errors
        .par_iter()
        .enumerate()
        .map(|(i, &e)| e * ((i + 2) as f64).powf(kappa_hat - 1.0))
        .reduce(|| f64::INFINITY, f64::min);
    Ok(DiophReport {
        alpha: spec.alpha().to_vec(),
        q_max,
        kappa_hat,
        worst_q,
        worst_error,
        rational_flag: false,
        c_hat,
    })
}

fn is_perfect_power(n: u64) -> bool {
    for b in 2..=63u32 {
        let root = (n as f64).powf(1.0 / b as f64).round() as u64;
        for r in root.saturating_sub(1)..=root + 1 {
            if r >= 2 && r.checked_pow(b) == Some(n) {
                return true;
            }
        }
        if 2u64.checked_pow(b).map_or(true, |p| p > n) {
            break;
        }
    }
    false
}

/// alpha_j = frac(theta^j), j = 1..k, theta = base^{1/(k+1)}: the components
/// of (alpha, 1) span a degree-(k+1) field, so alpha is of type 1 + 1/k.
pub fn algebraic_vector(k: usize, base: u64) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(domain("algebraic_vector requires k >= 1"));
    }
    if base < 2 {
        return Err(domain("algebraic_vector requires base >= 2"));
    }
    if is_perfect_power(base) {
        return Err(domain("perfect-power base degenerates the field degree"));
    }
    let theta = (base as f64).powf(1.0 / (k as f64 + 1.0));
    Ok((1..=k).map(|j| theta.powi(j as i32).fract()).collect())
}

/// The borderline vector of type (k-1)/(k-2): a badly approximable
/// (k-2)-tuple followed by two rationals.
pub fn critical_vector(k: usize, r1: (i64, i64), r2: (i64, i64)) -> Result<Vec<f64>> {
    if k < 3 {
        return Err(domain("critical_vector requires k >= 3"));
    }
    for (_, den) in [r1, r2] {
        if den <= 0 {
            return Err(domain("critical_vector rationals need positive denominators"));
        }
    }
    let mut alpha = algebraic_vector(k - 2, 2)?;
    alpha.push(r1.0 as f64 / r1.1 as f64);
    alpha.push(r2.0 as f64 / r2.1 as f64);
    Ok(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_irr(alpha: Vec<f64>) -> TorusSpec {
        let k = alpha.len();
        TorusSpec::new(k, alpha).unwrap()
    }

    #[test]
    fn common_denominator_sets_rational_flag() {
        let spec = TorusSpec::new_rational(2, vec![(1, 2), (1, 3)]).unwrap();
        let rep = estimate_type(&spec, 10).unwrap();
        assert!(rep.rational_flag);
        assert_eq!(rep.worst_q, 6);
        assert!(rep.kappa_hat.is_infinite());
        assert_eq!(rep.c_hat, 0.0);
    }

    #[test]
    fn cubic_pair_scans_near_true_type() {
        let spec = spec_irr(algebraic_vector(2, 2).unwrap());
        let rep = estimate_type(&spec, 100_000).unwrap();
        assert!(!rep.rational_flag);
        assert!(rep.kappa_hat <= 1.55, "kappa_hat = {}", rep.kappa_hat);
        // Dirichlet floor for a pair, minus scan slack
        assert!(rep.kappa_hat >= 1.5 - 0.05, "kappa_hat = {}", rep.kappa_hat);
        assert!(rep.c_hat > 0.0);
        assert!(rep.worst_error > 0.0);
    }

    #[test]
    fn generic_constants_pair() {
        let spec = spec_irr(vec![
            std::f64::consts::PI.fract(),
            std::f64::consts::E.fract(),
        ]);
        let rep = estimate_type(&spec, 10_000).unwrap();
        assert!(
            (1.5..=2.0).contains(&rep.kappa_hat),
            "kappa_hat = {}",
            rep.kappa_hat
        );
    }

    #[test]
    fn shift_and_permutation_invariance() {
        let a = spec_irr(vec![0.123456, 0.654321]);
        let b = spec_irr(vec![0.654321, 0.123456]);
        let c = spec_irr(vec![3.123456, 0.654321 - 2.0]);
        let ra = estimate_type(&a, 5000).unwrap();
        let rb = estimate_type(&b, 5000).unwrap();
        let rc = estimate_type(&c, 5000).unwrap();
        assert_eq!(ra.kappa_hat, rb.kappa_hat);
        assert_eq!(ra.worst_q, rb.worst_q);
        // mod-1 reduction of shifted input perturbs the last bits only
        assert!((ra.kappa_hat - rc.kappa_hat).abs() < 1e-6);
    }

    #[test]
    fn kappa_hat_stabilizes_in_q_max() {
        // envelope fit settles toward the true type 3/2 as the scan deepens
        let spec = spec_irr(algebraic_vector(2, 3).unwrap());
        let mut prev = None;
        for q_max in [100, 1000, 10_000, 100_000] {
            let rep = estimate_type(&spec, q_max).unwrap();
            // Dirichlet floor, up to scan resolution
            assert!(rep.kappa_hat >= 1.5 - 0.2, "kappa_hat = {}", rep.kappa_hat);
            if let Some(p) = prev {
                assert!((rep.kappa_hat - p as f64).abs() < 0.3);
            }
            prev = Some(rep.kappa_hat);
        }
        assert!((1.4..1.6).contains(&prev.unwrap()));
    }

    #[test]
    fn dirichlet_consistency() {
        // simultaneous Dirichlet: some q <= N has e(q) <= N^{-1/k}
        for alpha in [
            vec![std::f64::consts::PI.fract(), std::f64::consts::E.fract()],
            algebraic_vector(2, 2).unwrap(),
            vec![0.7548776662466927, 0.5698402909980532],
        ] {
            let spec = spec_irr(alpha);
            for n in [10u64, 100, 1000] {
                let best = (1..=n)
                    .map(|q| scan_error(&spec, q))
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    best <= (n as f64).powf(-0.5) * (1.0 + 1e-12),
                    "N = {n}: min e(q) = {best}"
                );
            }
        }
    }

    #[test]
    fn algebraic_vector_values() {
        let a = algebraic_vector(2, 2).unwrap();
        assert!((a[0] - 0.2599210498948732).abs() < 1e-15);
        assert!((a[1] - 0.5874010519681994).abs() < 1e-15);
        let b = algebraic_vector(3, 2).unwrap();
        assert!((b[1] - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!(algebraic_vector(2, 4).is_err());
        assert!(algebraic_vector(2, 27).is_err());
        assert!(algebraic_vector(2, 1).is_err());
    }

    #[test]
    fn algebraic_triple_is_below_critical_type() {
        let spec = spec_irr(algebraic_vector(3, 2).unwrap());
        let rep = estimate_type(&spec, 100_000).unwrap();
        // admissibility threshold for Poisson convergence: type < (k-1)/(k-2) = 2
        assert!(rep.kappa_hat < 2.0, "kappa_hat = {}", rep.kappa_hat);
    }

    #[test]
    fn critical_vector_construction() {
        let v3 = critical_vector(3, (0, 1), (1, 2)).unwrap();
        assert_eq!(v3.len(), 3);
        assert!((v3[0] - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert_eq!(v3[1], 0.0);
        assert_eq!(v3[2], 0.5);

        let v4 = critical_vector(4, (1, 4), (3, 4)).unwrap();
        assert!((v4[0] - 0.2599210498948732).abs() < 1e-15);
        assert_eq!(&v4[2..], &[0.25, 0.75]);

        assert!(critical_vector(2, (0, 1), (1, 2)).is_err());
        assert!(critical_vector(3, (0, 0), (1, 2)).is_err());
    }

    #[test]
    fn critical_vectors_scan_at_critical_type() {
        // k = 3: even q reduce to the badly approximable single sqrt(2),
        // whose errors decay like 1/q, so the scan approaches 2
        let spec = spec_irr(critical_vector(3, (0, 1), (1, 2)).unwrap());
        let rep = estimate_type(&spec, 100_000).unwrap();
        assert!(
            (1.8..2.15).contains(&rep.kappa_hat),
            "kappa_hat = {}",
            rep.kappa_hat
        );

        // k = 4: multiples of 4 expose the cubic pair, type 3/2
        let spec = spec_irr(critical_vector(4, (1, 4), (3, 4)).unwrap());
        let rep = estimate_type(&spec, 100_000).unwrap();
        assert!(
            (1.35..1.7).contains(&rep.kappa_hat),
            "kappa_hat = {}",
            rep.kappa_hat
        );
    }
}
