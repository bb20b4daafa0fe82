//! Enumeration of the Laplace eigenvalues ||m - alpha||^2 up to a cutoff and
//! the unit-density rescaling X_j = lambda_j^{k/2}.

use crate::error::{domain, Error, Result};
use crate::types::TorusSpec;
use rayon::prelude::*;
use std::io::{Read, Write};
use std::path::Path;

/// Default enumeration budget, in entries.
pub const DEFAULT_MEMORY_BUDGET: f64 = 2e8;

/// A sorted slice of the spectrum, with exact integer keys q^2 lambda_j when
/// the shift vector is rational with common denominator q.
#[derive(Debug, Clone)]
pub struct SpectrumSlice {
    spec: TorusSpec,
    cutoff: f64,
    lambdas: Vec<f64>,
    rescaled: Vec<f64>,
    exact_keys: Option<Vec<i64>>,
}

impl SpectrumSlice {
    pub fn spec(&self) -> &TorusSpec {
        &self.spec
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn rescaled(&self) -> &[f64] {
        &self.rescaled
    }

    pub fn exact_keys(&self) -> Option<&[i64]> {
        self.exact_keys.as_deref()
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Largest rescaled value covered by the cutoff (not by the data, which
    /// may end earlier for shifted tori).
    pub fn rescaled_cutoff(&self) -> f64 {
        self.cutoff.powf(self.spec.k() as f64 / 2.0)
    }

    /// Diagnostic input path: build a slice directly from a sorted rescaled
    /// sequence. Used to inject hand lists and synthetic Poisson samples
    /// into the correlation estimators.
    pub fn from_rescaled(spec: TorusSpec, mut rescaled: Vec<f64>) -> Self {
        rescaled.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let k = spec.k() as f64;
        let lambdas: Vec<f64> = rescaled.iter().map(|x| x.powf(2.0 / k)).collect();
        let cutoff = lambdas.last().copied().unwrap_or(0.0);
        SpectrumSlice {
            spec,
            cutoff,
            lambdas,
            rescaled,
            exact_keys: None,
        }
    }
}

/// Every value ||m - alpha||^2 <= cutoff with multiplicity, sorted.
pub fn enumerate_spectrum(spec: &TorusSpec, cutoff: f64) -> Result<SpectrumSlice> {
    enumerate_spectrum_with_budget(spec, cutoff, DEFAULT_MEMORY_BUDGET)
}

pub fn enumerate_spectrum_with_budget(
    spec: &TorusSpec,
    cutoff: f64,
    budget: f64,
) -> Result<SpectrumSlice> {
    if !(cutoff > 0.0) {
        return Err(domain("enumerate_spectrum requires cutoff > 0"));
    }
    let k = spec.k();
    let predicted = spec.unit_ball_volume() * cutoff.powf(k as f64 / 2.0);
    if predicted > budget {
        return Err(Error::Budget(format!(
            "predicted count {predicted:.3e} exceeds budget {budget:.3e}"
        )));
    }

    let exact = spec.scaled_numerators();
    if let Some((_, q)) = &exact {
        // keys q^2 lambda must fit an i64 with headroom
        let max_key = (*q as f64) * (*q as f64) * cutoff;
        if max_key > 9.0e18 {
            return Err(Error::Budget(format!(
                "exact key q^2 Lambda = {max_key:.3e} overflows 64-bit keys"
            )));
        }
    }

    let alpha = spec.alpha();
    let r = cutoff.sqrt();
    let lo0 = (alpha[0] - r).ceil() as i64;
    let hi0 = (alpha[0] + r).floor() as i64;

    // fan out over outer-coordinate slabs; each slab is an independent run,
    // merged in fixed slab order so results do not depend on worker count
    let slabs: Vec<(Vec<f64>, Vec<i64>)> = (lo0..hi0 + 1)
        .into_par_iter()
        .map(|m0| {
            let mut lam = Vec::new();
            let mut keys = Vec::new();
            let d0 = m0 as f64 - alpha[0];
            let s0 = d0 * d0;
            if s0 <= cutoff {
                let mut m = vec![m0; k];
                recurse(
                    spec,
                    cutoff,
                    1,
                    s0,
                    &mut m,
                    exact.as_ref(),
                    &mut lam,
                    &mut keys,
                );
            }
            (lam, keys)
        })
        .collect();

    let mut lambdas = Vec::new();
    let mut keys = Vec::new();
    for (l, ks) in slabs {
        lambdas.extend(l);
        keys.extend(ks);
    }

    if let Some((_, q)) = &exact {
        // integer key is the primary sort key; ties are exact
        let mut idx: Vec<usize> = (0..keys.len()).collect();
        idx.sort_by_key(|&i| keys[i]);
        let q2 = (*q as f64) * (*q as f64);
        let keys: Vec<i64> = idx.iter().map(|&i| keys[i]).collect();
        // recompute lambda from the key so equal keys give identical floats
        let lambdas: Vec<f64> = keys.iter().map(|&key| key as f64 / q2).collect();
        let kf = k as f64;
        let rescaled = lambdas.iter().map(|l| l.powf(kf / 2.0)).collect();
        return Ok(SpectrumSlice {
            spec: spec.clone(),
            cutoff,
            lambdas,
            rescaled,
            exact_keys: Some(keys),
        });
    }

    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let kf = k as f64;
    let rescaled = lambdas.iter().map(|l| l.powf(kf / 2.0)).collect();
    Ok(SpectrumSlice {
        spec: spec.clone(),
        cutoff,
        lambdas,
        rescaled,
        exact_keys: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    spec: &TorusSpec,
    cutoff: f64,
    coord: usize,
    partial: f64,
    m: &mut Vec<i64>,
    exact: Option<&(Vec<i64>, i64)>,
    lam: &mut Vec<f64>,
    keys: &mut Vec<i64>,
) {
    let k = spec.k();
    if coord == k {
        lam.push(partial);
        if let Some((nums, q)) = exact {
            let mut key = 0i64;
            for (j, &mj) in m.iter().enumerate() {
                let d = q * mj - nums[j];
                key += d * d;
            }
            keys.push(key);
        }
        return;
    }
    let a = spec.alpha()[coord];
    let rem = cutoff - partial;
    let r = rem.sqrt();
    let lo = (a - r).ceil() as i64;
    let hi = (a + r).floor() as i64;
    for mj in lo..=hi {
        let d = mj as f64 - a;
        let s = partial + d * d;
        if s <= cutoff {
            m[coord] = mj;
            recurse(spec, cutoff, coord + 1, s, m, exact, lam, keys);
        }
    }
}

/// (1/X) #{j : X_j <= X}; approaches B_k as X grows.
pub fn counting_ratio(slice: &SpectrumSlice, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("counting_ratio requires X > 0"));
    }
    if x > slice.rescaled_cutoff() * (1.0 + 1e-12) {
        return Err(Error::InsufficientData(format!(
            "X = {x} exceeds the rescaled cutoff {}",
            slice.rescaled_cutoff()
        )));
    }
    let count = slice.rescaled.partition_point(|&v| v <= x);
    Ok(count as f64 / x)
}

const CACHE_MAGIC: &[u8; 8] = b"PCSPEC01";

/// Columnar binary cache: magic, k, alpha (with exact rationals when
/// present), cutoff, count, then the sorted lambda array as little-endian
/// doubles (plus the integer keys in the exact case).
pub fn write_cache(slice: &SpectrumSlice, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&(slice.spec.k() as u32).to_le_bytes());
    let exact = slice.spec.alpha_exact();
    buf.push(exact.is_some() as u8);
    for &a in slice.spec.alpha() {
        buf.extend_from_slice(&a.to_le_bytes());
    }
    if let Some(ex) = exact {
        for &(p, q) in ex {
            buf.extend_from_slice(&p.to_le_bytes());
            buf.extend_from_slice(&q.to_le_bytes());
        }
    }
    buf.extend_from_slice(&slice.cutoff.to_le_bytes());
    buf.extend_from_slice(&(slice.lambdas.len() as u64).to_le_bytes());
    for &l in &slice.lambdas {
        buf.extend_from_slice(&l.to_le_bytes());
    }
    if let Some(keys) = &slice.exact_keys {
        for &key in keys {
            buf.extend_from_slice(&key.to_le_bytes());
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn read_cache(path: &Path) -> Result<SpectrumSlice> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        if *pos + n > buf.len() {
            return Err(Error::CacheFormat("truncated cache file".into()));
        }
        let s = &buf[*pos..*pos + n];
        *pos += n;
        Ok(s)
    };
    if take(&mut pos, 8)? != CACHE_MAGIC {
        return Err(Error::CacheFormat("bad magic".into()));
    }
    let k = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    if !(2..=16).contains(&k) {
        return Err(Error::CacheFormat(format!("implausible dimension {k}")));
    }
    let has_exact = take(&mut pos, 1)?[0] != 0;
    let mut alpha = Vec::with_capacity(k);
    for _ in 0..k {
        alpha.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()));
    }
    let spec = if has_exact {
        let mut rats = Vec::with_capacity(k);
        for _ in 0..k {
            let p = i64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
            let q = i64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
            rats.push((p, q));
        }
        TorusSpec::new_rational(k, rats).map_err(|e| Error::CacheFormat(e.to_string()))?
    } else {
        TorusSpec::new(k, alpha).map_err(|e| Error::CacheFormat(e.to_string()))?
    };
    let cutoff = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    let count = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
    let mut lambdas = Vec::with_capacity(count);
    for _ in 0..count {
        lambdas.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()));
    }
    let exact_keys = if has_exact {
        let mut keys = Vec::with_capacity(count);
        for _ in 0..count {
            keys.push(i64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()));
        }
        Some(keys)
    } else {
        None
    };
    let kf = k as f64;
    let rescaled = lambdas.iter().map(|l: &f64| l.powf(kf / 2.0)).collect();
    Ok(SpectrumSlice {
        spec,
        cutoff,
        lambdas,
        rescaled,
        exact_keys,
    })
}
