//! Shift-vector syntax: comma-separated decimals or p/q rationals, or the
//! named constructors `algebraic:base` and `critical:base,r1,r2`.

use paircorr_core::{algebraic_vector, Result, TorusSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSpec {
    Rational(Vec<(i64, i64)>),
    Floats(Vec<f64>),
    Algebraic { base: u64 },
    Critical { base: u64, r1: (i64, i64), r2: (i64, i64) },
}

impl AlphaSpec {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        if let Some(rest) = text.strip_prefix("algebraic:") {
            let base = rest
                .parse::<u64>()
                .map_err(|_| format!("algebraic base `{rest}` is not an integer"))?;
            return Ok(AlphaSpec::Algebraic { base });
        }
        if let Some(rest) = text.strip_prefix("critical:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 3 {
                return Err("critical form is critical:base,r1,r2".into());
            }
            let base = parts[0]
                .parse::<u64>()
                .map_err(|_| format!("critical base `{}` is not an integer", parts[0]))?;
            return Ok(AlphaSpec::Critical {
                base,
                r1: parse_rational(parts[1])?,
                r2: parse_rational(parts[2])?,
            });
        }
        let parts: Vec<&str> = text.split(',').collect();
        if parts.iter().all(|p| p.contains('/') || p.trim().parse::<i64>().is_ok()) {
            let rats = parts
                .iter()
                .map(|p| parse_rational(p))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            return Ok(AlphaSpec::Rational(rats));
        }
        let floats = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("alpha component `{p}` is not a number"))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(AlphaSpec::Floats(floats))
    }

    pub fn to_spec(&self, k: usize) -> Result<TorusSpec> {
        match self {
            AlphaSpec::Rational(r) => TorusSpec::new_rational(k, r.clone()),
            AlphaSpec::Floats(f) => TorusSpec::new(k, f.clone()),
            AlphaSpec::Algebraic { base } => TorusSpec::new(k, algebraic_vector(k, *base)?),
            AlphaSpec::Critical { .. } => {
                let (head, tail) = self.critical_parts(k)?;
                let mut alpha = head;
                alpha.extend(tail.iter().map(|&(p, q)| p as f64 / q as f64));
                TorusSpec::new(k, alpha)
            }
        }
    }

    /// Irrational head and exact rational tail of a critical vector.
    pub fn critical_parts(&self, k: usize) -> Result<(Vec<f64>, Vec<(i64, i64)>)> {
        match self {
            AlphaSpec::Critical { base, r1, r2 } => {
                let head = algebraic_vector(k - 2, *base)?;
                Ok((head, vec![*r1, *r2]))
            }
            _ => Err(paircorr_core::Error::Domain(
                "not a critical shift vector".into(),
            )),
        }
    }
}

fn parse_rational(text: &str) -> std::result::Result<(i64, i64), String> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p = p.trim().parse::<i64>().map_err(|_| format!("bad numerator in `{t}`"))?;
        let q = q.trim().parse::<i64>().map_err(|_| format!("bad denominator in `{t}`"))?;
        if q <= 0 {
            return Err(format!("denominator in `{t}` must be positive"));
        }
        Ok((p, q))
    } else {
        let p = t.parse::<i64>().map_err(|_| format!("`{t}` is not a rational"))?;
        Ok((p, 1))
    }
}
