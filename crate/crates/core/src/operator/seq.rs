//! Closed-form sequence rules `k -> value` (k is 1-based).

use serde::{Deserialize, Serialize};

use crate::error::{OpError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeqRule {
    Const(f64),
    /// The index `k` itself.
    Index,
    Add(Box<SeqRule>, Box<SeqRule>),
    Sub(Box<SeqRule>, Box<SeqRule>),
    Mul(Box<SeqRule>, Box<SeqRule>),
    Div(Box<SeqRule>, Box<SeqRule>),
    Neg(Box<SeqRule>),
    Sqrt(Box<SeqRule>),
    /// `base^exponent` for a constant exponent.
    Pow(Box<SeqRule>, f64),
    /// Different rules at odd and even `k`.
    Parity { odd: Box<SeqRule>, even: Box<SeqRule> },
    /// Listed values for `k = 1..=values.len()`, then `rest` (evaluated at the same `k`).
    Prefix { values: Vec<f64>, rest: Box<SeqRule> },
    /// Finitely many values; undefined beyond.
    Explicit(Vec<f64>),
}

impl SeqRule {
    pub fn constant(c: f64) -> Self {
        SeqRule::Const(c)
    }

    /// `numerator / (scale * k + offset)`.
    pub fn reciprocal(numerator: f64, scale: f64, offset: f64) -> Self {
        SeqRule::Div(
            Box::new(SeqRule::Const(numerator)),
            Box::new(SeqRule::Add(
                Box::new(SeqRule::Mul(Box::new(SeqRule::Const(scale)), Box::new(SeqRule::Index))),
                Box::new(SeqRule::Const(offset)),
            )),
        )
    }

    pub fn add(a: SeqRule, b: SeqRule) -> Self {
        SeqRule::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: SeqRule, b: SeqRule) -> Self {
        SeqRule::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: SeqRule, b: SeqRule) -> Self {
        SeqRule::Mul(Box::new(a), Box::new(b))
    }

    pub fn sqrt(a: SeqRule) -> Self {
        SeqRule::Sqrt(Box::new(a))
    }

    pub fn parity(odd: SeqRule, even: SeqRule) -> Self {
        SeqRule::Parity { odd: Box::new(odd), even: Box::new(even) }
    }

    pub fn prefix(values: Vec<f64>, rest: SeqRule) -> Self {
        SeqRule::Prefix { values, rest: Box::new(rest) }
    }

    pub fn eval(&self, k: usize) -> Result<f64> {
        let undefined = |reason: &str| OpError::UndefinedSequenceIndex { index: k, reason: reason.to_string() };
        if k == 0 {
            return Err(undefined("indices start at 1"));
        }
        let v = match self {
            SeqRule::Const(c) => *c,
            SeqRule::Index => k as f64,
            SeqRule::Add(a, b) => a.eval(k)? + b.eval(k)?,
            SeqRule::Sub(a, b) => a.eval(k)? - b.eval(k)?,
            SeqRule::Mul(a, b) => a.eval(k)? * b.eval(k)?,
            SeqRule::Div(a, b) => {
                let d = b.eval(k)?;
                if d == 0.0 {
                    return Err(undefined("division by zero"));
                }
                a.eval(k)? / d
            }
            SeqRule::Neg(a) => -a.eval(k)?,
            SeqRule::Sqrt(a) => {
                let x = a.eval(k)?;
                if x < 0.0 {
                    return Err(undefined("square root of a negative value"));
                }
                x.sqrt()
            }
            SeqRule::Pow(a, e) => a.eval(k)?.powf(*e),
            SeqRule::Parity { odd, even } => {
                if k % 2 == 1 {
                    odd.eval(k)?
                } else {
                    even.eval(k)?
                }
            }
            SeqRule::Prefix { values, rest } => match values.get(k - 1) {
                Some(v) => *v,
                None => rest.eval(k)?,
            },
            SeqRule::Explicit(values) => *values.get(k - 1).ok_or_else(|| undefined("beyond explicit values"))?,
        };
        if !v.is_finite() {
            return Err(undefined("non-finite value"));
        }
        Ok(v)
    }

    pub fn is_constant(&self) -> Option<f64> {
        match self {
            SeqRule::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Values for `k = 1..=n`.
    pub fn take(&self, n: usize) -> Result<Vec<f64>> {
        (1..=n).map(|k| self.eval(k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal_and_parity() {
        // K = diag(0, 1/2, 0, 1/4, ...)
        let k = SeqRule::parity(SeqRule::Const(0.0), SeqRule::reciprocal(1.0, 1.0, 0.0));
        assert_eq!(k.take(4).unwrap(), vec![0.0, 0.5, 0.0, 0.25]);
    }

    #[test]
    fn undefined_indices() {
        assert!(matches!(SeqRule::Explicit(vec![1.0]).eval(2), Err(OpError::UndefinedSequenceIndex { index: 2, .. })));
        assert!(SeqRule::reciprocal(1.0, 1.0, -3.0).eval(3).is_err());
        assert!(SeqRule::sqrt(SeqRule::Const(-1.0)).eval(1).is_err());
        assert!(SeqRule::Index.eval(0).is_err());
    }

    #[test]
    fn prefix_keeps_global_index() {
        let r = SeqRule::prefix(vec![0.0], SeqRule::Index);
        assert_eq!(r.take(3).unwrap(), vec![0.0, 2.0, 3.0]);
    }

    #[test]
    fn json_shape() {
        let r = SeqRule::add(SeqRule::Const(1.0), SeqRule::Index);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"add":[{"const":1.0},"index"]}"#);
        assert_eq!(serde_json::from_str::<SeqRule>(&s).unwrap(), r);
    }
}
