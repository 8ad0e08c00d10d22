use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::DistributionError;

/// Conventional labels for the source variable and the four apparatus variables.
pub mod labels {
    pub const LAMBDA: &str = "lambda";
    pub const LAMBDA_A: &str = "lambda_a";
    pub const LAMBDA_A_PRIME: &str = "lambda_a_prime";
    pub const LAMBDA_B: &str = "lambda_b";
    pub const LAMBDA_B_PRIME: &str = "lambda_b_prime";
}

/// A finite, ordered set of hidden-variable values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct HiddenSpace {
    label: String,
    values: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    label: String,
    values: Vec<String>,
}

impl TryFrom<RawSpace> for HiddenSpace {
    type Error = DistributionError;

    fn try_from(raw: RawSpace) -> Result<Self, Self::Error> {
        HiddenSpace::new(raw.label, raw.values)
    }
}

impl From<HiddenSpace> for RawSpace {
    fn from(s: HiddenSpace) -> Self {
        RawSpace {
            label: s.label,
            values: s.values,
        }
    }
}

impl HiddenSpace {
    pub fn new<L, I, V>(label: L, values: I) -> Result<Self, DistributionError>
    where
        L: Into<String>,
        I: IntoIterator<Item = V>,
        V: Into<String>,
    {
        let label = label.into();
        if label.is_empty() {
            return Err(DistributionError::InvalidSpace("empty label".into()));
        }
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err(DistributionError::InvalidSpace(format!(
                "space `{label}` has no values"
            )));
        }
        let mut seen = HashSet::with_capacity(values.len());
        for v in &values {
            if !seen.insert(v.as_str()) {
                return Err(DistributionError::InvalidSpace(format!(
                    "space `{label}` repeats value `{v}`"
                )));
            }
        }
        Ok(HiddenSpace { label, values })
    }

    /// Space with values `"0"`, `"1"`, ... `"n-1"`.
    pub fn indexed(label: impl Into<String>, cardinality: usize) -> Result<Self, DistributionError> {
        HiddenSpace::new(label, (0..cardinality).map(|i| i.to_string()))
    }

    /// Two-valued space `{"+1", "-1"}`, in that order.
    pub fn binary(label: impl Into<String>) -> Self {
        HiddenSpace::new(label, ["+1", "-1"]).expect("binary space is well formed")
    }

    pub fn singleton(label: impl Into<String>) -> Self {
        HiddenSpace::new(label, ["*"]).expect("singleton space is well formed")
    }

    /// Collapse an ordered product of spaces into one space whose values are
    /// the row-major tuples, joined with `|`.
    pub fn flatten(label: impl Into<String>, domain: &[HiddenSpace]) -> Result<Self, DistributionError> {
        let cards: Vec<usize> = domain.iter().map(HiddenSpace::cardinality).collect();
        let total = cards.iter().product::<usize>();
        let values = (0..total).map(|flat| {
            unravel(flat, &cards)
                .iter()
                .zip(domain)
                .map(|(&i, s)| s.values[i].as_str())
                .collect::<Vec<_>>()
                .join("|")
        });
        HiddenSpace::new(label, values)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn cardinality(&self) -> usize {
        self.values.len()
    }

    pub fn index_of(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }
}

/// Row-major flat index of `index` in a product with the given cardinalities.
pub(crate) fn ravel(index: &[usize], cards: &[usize]) -> usize {
    debug_assert_eq!(index.len(), cards.len());
    index.iter().zip(cards).fold(0, |acc, (&i, &c)| acc * c + i)
}

pub(crate) fn unravel(mut flat: usize, cards: &[usize]) -> Vec<usize> {
    let mut out = vec![0; cards.len()];
    for (slot, &c) in out.iter_mut().zip(cards).rev() {
        *slot = flat % c;
        flat /= c;
    }
    out
}

/// Advance a row-major multi-index; returns false after the last point.
pub(crate) fn step(index: &mut [usize], cards: &[usize]) -> bool {
    for (i, &c) in index.iter_mut().zip(cards).rev() {
        *i += 1;
        if *i < c {
            return true;
        }
        *i = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_duplicate_values() {
        assert!(HiddenSpace::new("lambda", Vec::<String>::new()).is_err());
        assert!(HiddenSpace::new("lambda", ["x", "x"]).is_err());
        assert!(HiddenSpace::new("", ["x"]).is_err());
        let s = HiddenSpace::new("lambda", ["x", "y"]).unwrap();
        assert_eq!(s.cardinality(), 2);
        assert_eq!(s.index_of("y"), Some(1));
    }

    #[test]
    fn ravel_unravel_agree_with_step_order() {
        let cards = [2, 3, 2];
        let mut idx = vec![0; 3];
        let mut flat = 0;
        loop {
            assert_eq!(ravel(&idx, &cards), flat);
            assert_eq!(unravel(flat, &cards), idx);
            flat += 1;
            if !step(&mut idx, &cards) {
                break;
            }
        }
        assert_eq!(flat, 12);
    }

    #[test]
    fn flatten_joins_tuples_row_major() {
        let a = HiddenSpace::indexed("x", 2).unwrap();
        let b = HiddenSpace::binary("y");
        let f = HiddenSpace::flatten("xy", &[a, b]).unwrap();
        assert_eq!(f.values(), &["0|+1", "0|-1", "1|+1", "1|-1"]);
    }
}
