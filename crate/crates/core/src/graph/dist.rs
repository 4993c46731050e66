use serde::{Deserialize, Serialize};

use crate::rng::RandSource;

/// Distribution of a tunable parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistSpec {
    Uniform { lo: f64, hi: f64 },
    /// Samples 1.0 with probability `p`, else 0.0.
    Bernoulli { p: f64 },
    /// Samples a branch index; weights need not be normalized.
    Categorical { weights: Vec<f64> },
    Constant { value: f64 },
}

impl DistSpec {
    pub fn uniform(lo: f64, hi: f64) -> Self {
        DistSpec::Uniform { lo, hi }
    }

    pub fn constant(value: f64) -> Self {
        DistSpec::Constant { value }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            DistSpec::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    Err("uniform bounds must be finite".into())
                } else if lo > hi {
                    Err(format!("uniform lower bound {lo} exceeds upper bound {hi}"))
                } else {
                    Ok(())
                }
            }
            DistSpec::Bernoulli { p } => {
                if p.is_finite() && (0.0..=1.0).contains(p) {
                    Ok(())
                } else {
                    Err(format!("bernoulli p must lie in [0, 1], got {p}"))
                }
            }
            DistSpec::Categorical { weights } => validate_weights(weights),
            DistSpec::Constant { value } => {
                if value.is_finite() {
                    Ok(())
                } else {
                    Err("constant must be finite".into())
                }
            }
        }
    }

    /// Smallest and largest value the distribution can produce.
    pub fn support(&self) -> (f64, f64) {
        match self {
            DistSpec::Uniform { lo, hi } => (*lo, *hi),
            DistSpec::Bernoulli { p } => {
                let lo = if *p >= 1.0 { 1.0 } else { 0.0 };
                let hi = if *p <= 0.0 { 0.0 } else { 1.0 };
                (lo, hi)
            }
            DistSpec::Categorical { weights } => (0.0, weights.len().saturating_sub(1) as f64),
            DistSpec::Constant { value } => (*value, *value),
        }
    }

    /// Whether every sample is the same value.
    pub fn is_constant(&self) -> bool {
        let (lo, hi) = self.support();
        lo == hi
    }

    pub fn sample(&self, rng: &mut RandSource) -> f64 {
        match self {
            DistSpec::Uniform { lo, hi } => rng.uniform(*lo, *hi),
            DistSpec::Bernoulli { p } => {
                if rng.next_unit() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            DistSpec::Categorical { weights } => categorical(weights, rng) as f64,
            DistSpec::Constant { value } => *value,
        }
    }
}

pub(crate) fn validate_weights(weights: &[f64]) -> Result<(), String> {
    if weights.is_empty() {
        return Err("categorical weights must not be empty".into());
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err("categorical weights must be finite and non-negative".into());
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err("categorical weights must have a positive sum".into());
    }
    Ok(())
}

/// Index drawn with probability proportional to its weight (one draw).
pub(crate) fn categorical(weights: &[f64], rng: &mut RandSource) -> usize {
    let total: f64 = weights.iter().sum();
    let target = rng.next_unit() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if target < acc {
                return i;
            }
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(DistSpec::uniform(1.0, 0.0).validate().is_err());
        assert!(DistSpec::uniform(0.0, f64::INFINITY).validate().is_err());
        assert!(DistSpec::Bernoulli { p: 1.5 }.validate().is_err());
        assert!(DistSpec::Categorical { weights: vec![0.0, 0.0] }.validate().is_err());
        assert!(DistSpec::Categorical { weights: vec![1.0, -1.0] }.validate().is_err());
        assert!(DistSpec::constant(f64::NAN).validate().is_err());
        assert!(DistSpec::uniform(0.2, 0.2).validate().is_ok());
    }

    #[test]
    fn constant_always() {
        let mut rng = RandSource::new(0, 0);
        for _ in 0..10 {
            assert_eq!(DistSpec::constant(0.3).sample(&mut rng), 0.3);
        }
    }

    #[test]
    fn certain_categorical() {
        let mut rng = RandSource::new(1, 0);
        let d = DistSpec::Categorical { weights: vec![1.0, 0.0, 0.0] };
        for _ in 0..100 {
            assert_eq!(d.sample(&mut rng), 0.0);
        }
        let d = DistSpec::Categorical { weights: vec![0.0, 0.0, 2.0] };
        for _ in 0..100 {
            assert_eq!(d.sample(&mut rng), 2.0);
        }
    }

    #[test]
    fn uniform_in_range() {
        let mut rng = RandSource::new(2, 0);
        let d = DistSpec::uniform(-0.5, 0.25);
        for _ in 0..1000 {
            let v = d.sample(&mut rng);
            assert!((-0.5..=0.25).contains(&v));
        }
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_string(&DistSpec::uniform(0.0, 0.5)).unwrap();
        assert_eq!(s, r#"{"dist":"uniform","lo":0.0,"hi":0.5}"#);
        let back: DistSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, DistSpec::uniform(0.0, 0.5));
        assert!(serde_json::from_str::<DistSpec>(r#"{"dist":"uniform","lo":0}"#).is_err());
    }
}
