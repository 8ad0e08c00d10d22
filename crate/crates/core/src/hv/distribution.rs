use std::collections::HashSet;

use super::space::{ravel, step, HiddenSpace};
use crate::error::DistributionError;

/// Maximum allowed deviation of the total weight from one.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Nonnegative, normalized weights over the product of an ordered list of
/// hidden spaces, stored row-major (last space varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    domain: Vec<HiddenSpace>,
    weights: Vec<f64>,
}

/// Check sign and normalization of `weights` over `domain`.
///
/// Negative weights are reported before a bad sum, and NaN counts as negative.
pub fn validate_distribution(domain: &[HiddenSpace], weights: &[f64]) -> Result<(), DistributionError> {
    let expected = domain.iter().map(HiddenSpace::cardinality).product::<usize>();
    if weights.len() != expected {
        return Err(DistributionError::ShapeMismatch {
            expected,
            actual: weights.len(),
        });
    }
    if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| w.is_nan() || **w < 0.0) {
        return Err(DistributionError::NegativeWeight { index, value });
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(DistributionError::NotNormalized { sum });
    }
    Ok(())
}

fn check_distinct_labels<'a>(spaces: impl IntoIterator<Item = &'a HiddenSpace>) -> Result<(), DistributionError> {
    let mut seen = HashSet::new();
    for s in spaces {
        if !seen.insert(s.label()) {
            return Err(DistributionError::OverlappingDomains(s.label().to_owned()));
        }
    }
    Ok(())
}

impl Distribution {
    pub fn new(domain: Vec<HiddenSpace>, weights: Vec<f64>) -> Result<Self, DistributionError> {
        if domain.is_empty() {
            return Err(DistributionError::InvalidSpace(
                "distribution needs at least one space".into(),
            ));
        }
        check_distinct_labels(&domain)?;
        validate_distribution(&domain, &weights)?;
        Ok(Distribution { domain, weights })
    }

    /// Scale `weights` to unit sum. Negative entries are still rejected.
    pub fn renormalized(domain: Vec<HiddenSpace>, weights: Vec<f64>) -> Result<Self, DistributionError> {
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| w.is_nan() || **w < 0.0) {
            return Err(DistributionError::NegativeWeight { index, value });
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            return Err(DistributionError::NotNormalized { sum });
        }
        Distribution::new(domain, weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn uniform(domain: Vec<HiddenSpace>) -> Result<Self, DistributionError> {
        let n = domain.iter().map(HiddenSpace::cardinality).product::<usize>();
        Distribution::new(domain, vec![1.0 / n as f64; n])
    }

    pub fn point_mass(domain: Vec<HiddenSpace>, flat_index: usize) -> Result<Self, DistributionError> {
        let n = domain.iter().map(HiddenSpace::cardinality).product::<usize>();
        if flat_index >= n {
            return Err(DistributionError::ShapeMismatch {
                expected: n,
                actual: flat_index + 1,
            });
        }
        let mut w = vec![0.0; n];
        w[flat_index] = 1.0;
        Distribution::new(domain, w)
    }

    pub fn domain(&self) -> &[HiddenSpace] {
        &self.domain
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.domain.iter().map(HiddenSpace::cardinality).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.domain.iter().map(HiddenSpace::label).collect()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.domain.iter().position(|s| s.label() == label)
    }

    /// Weight at a multi-index (one coordinate per domain space).
    pub fn weight_at(&self, index: &[usize]) -> f64 {
        self.weights[ravel(index, &self.cardinalities())]
    }

    /// Largest elementwise difference, or `None` if the domains differ.
    pub fn max_abs_diff(&self, other: &Distribution) -> Option<f64> {
        (self.domain == other.domain).then(|| {
            self.weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }

    /// Independent product on the concatenated domain.
    pub fn product(parts: &[Distribution]) -> Result<Distribution, DistributionError> {
        if parts.is_empty() {
            return Err(DistributionError::InvalidSpace("product of zero parts".into()));
        }
        check_distinct_labels(parts.iter().flat_map(|p| p.domain.iter()))?;
        let mut weights = vec![1.0];
        for part in parts {
            weights = weights
                .iter()
                .flat_map(|&w| part.weights.iter().map(move |&v| w * v))
                .collect();
        }
        let domain = parts.iter().flat_map(|p| p.domain.iter().cloned()).collect();
        Distribution::new(domain, weights)
    }

    /// Sum out every space not named in `keep`. The result keeps the
    /// original domain order regardless of the order of `keep`.
    pub fn marginalize(&self, keep: &[&str]) -> Result<Distribution, DistributionError> {
        if keep.is_empty() {
            return Err(DistributionError::EmptyKeepSet);
        }
        let mut mask = vec![false; self.domain.len()];
        for label in keep {
            let pos = self
                .position(label)
                .ok_or_else(|| DistributionError::UnknownSpace((*label).to_owned()))?;
            mask[pos] = true;
        }
        let cards = self.cardinalities();
        let kept_cards: Vec<usize> = cards.iter().zip(&mask).filter(|(_, &m)| m).map(|(&c, _)| c).collect();
        let mut out = vec![0.0; kept_cards.iter().product()];
        let mut idx = vec![0; cards.len()];
        let mut kept = Vec::with_capacity(kept_cards.len());
        for &w in &self.weights {
            kept.clear();
            kept.extend(idx.iter().zip(&mask).filter(|(_, &m)| m).map(|(&i, _)| i));
            out[ravel(&kept, &kept_cards)] += w;
            step(&mut idx, &cards);
        }
        let domain = self
            .domain
            .iter()
            .zip(&mask)
            .filter(|(_, &m)| m)
            .map(|(s, _)| s.clone())
            .collect();
        Distribution::new(domain, out)
    }
}

/// Free-function form of [`Distribution::product`].
pub fn product_distribution(parts: &[Distribution]) -> Result<Distribution, DistributionError> {
    Distribution::product(parts)
}

/// Free-function form of [`Distribution::marginalize`].
pub fn marginalize(d: &Distribution, keep: &[&str]) -> Result<Distribution, DistributionError> {
    d.marginalize(keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn space(label: &str, n: usize) -> HiddenSpace {
        HiddenSpace::indexed(label, n).unwrap()
    }

    #[test]
    fn validation_examples() {
        let d = [space("lambda", 4)];
        assert!(validate_distribution(&d, &[0.25; 4]).is_ok());
        let d = [space("lambda", 2)];
        match validate_distribution(&d, &[0.5, 0.6]) {
            Err(DistributionError::NotNormalized { sum }) => assert!((sum - 1.1).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            validate_distribution(&d, &[1.2, -0.2]),
            Err(DistributionError::NegativeWeight { index: 1, value: -0.2 })
        );
        assert_eq!(
            validate_distribution(&d, &[1.0]),
            Err(DistributionError::ShapeMismatch { expected: 2, actual: 1 })
        );
    }

    #[test]
    fn product_examples() {
        let u1 = Distribution::uniform(vec![space("x", 2)]).unwrap();
        let u2 = Distribution::uniform(vec![space("y", 2)]).unwrap();
        let p = Distribution::product(&[u1, u2]).unwrap();
        assert_eq!(p.weights(), &[0.25; 4]);

        let a = Distribution::new(vec![space("x", 2)], vec![1.0, 0.0]).unwrap();
        let b = Distribution::new(vec![space("y", 2)], vec![0.3, 0.7]).unwrap();
        let p = Distribution::product(&[a, b]).unwrap();
        assert_eq!(p.weights(), &[0.3, 0.7, 0.0, 0.0]);

        let five: Vec<_> = ["lambda", "lambda_a", "lambda_a_prime", "lambda_b", "lambda_b_prime"]
            .iter()
            .map(|l| Distribution::uniform(vec![space(l, 2)]).unwrap())
            .collect();
        let p = Distribution::product(&five).unwrap();
        assert_eq!(p.len(), 32);
        assert!(p.weights().iter().all(|&w| w == 1.0 / 32.0));
    }

    #[test]
    fn product_rejects_overlapping_domains() {
        let u = Distribution::uniform(vec![space("x", 2)]).unwrap();
        assert_eq!(
            Distribution::product(&[u.clone(), u]),
            Err(DistributionError::OverlappingDomains("x".into()))
        );
    }

    #[test]
    fn marginalize_examples_and_errors() {
        let d = Distribution::uniform(vec![space("lambda", 2), space("lambda_a", 2), space("lambda_b", 2)]).unwrap();
        let m = d.marginalize(&["lambda_a", "lambda"]).unwrap();
        assert_eq!(m.labels(), vec!["lambda", "lambda_a"]);
        assert_eq!(m.weights(), &[0.25; 4]);
        assert_eq!(d.marginalize(&[]), Err(DistributionError::EmptyKeepSet));
        assert_eq!(
            d.marginalize(&["nope"]),
            Err(DistributionError::UnknownSpace("nope".into()))
        );
        assert_eq!(d.marginalize(&["lambda", "lambda_a", "lambda_b"]).unwrap(), d);
    }

    #[test]
    fn renormalize_only_on_request() {
        let d = vec![space("x", 2)];
        assert!(Distribution::new(d.clone(), vec![2.0, 2.0]).is_err());
        let r = Distribution::renormalized(d, vec![2.0, 2.0]).unwrap();
        assert_eq!(r.weights(), &[0.5, 0.5]);
    }

    fn random_dist(label: &'static str, raw: Vec<f64>) -> Distribution {
        let n = raw.len();
        Distribution::renormalized(vec![space(label, n)], raw).unwrap()
    }

    fn factors() -> impl Strategy<Value = Vec<Distribution>> {
        let labels = ["p", "q", "r", "s"];
        proptest::collection::vec(proptest::collection::vec(0.01f64..1.0, 1..4), 2..=4).prop_map(move |raws| {
            raws.into_iter()
                .enumerate()
                .map(|(i, raw)| random_dist(labels[i], raw))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn marginal_of_product_is_product_of_kept_factors(parts in factors(), mask in proptest::collection::vec(any::<bool>(), 4)) {
            let joint = Distribution::product(&parts).unwrap();
            let kept: Vec<&Distribution> = parts.iter().zip(&mask).filter(|(_, &m)| m).map(|(p, _)| p).collect();
            prop_assume!(!kept.is_empty());
            let keep: Vec<&str> = kept.iter().map(|p| p.domain()[0].label()).collect();
            let marginal = joint.marginalize(&keep).unwrap();
            let expected = Distribution::product(&kept.into_iter().cloned().collect::<Vec<_>>()).unwrap();
            prop_assert!(marginal.max_abs_diff(&expected).unwrap() <= 1e-12);
            prop_assert!((marginal.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn two_step_marginalization_matches_one_step(raw in proptest::collection::vec(0.0f64..1.0, 24)) {
            prop_assume!(raw.iter().sum::<f64>() > 0.1);
            let d = Distribution::renormalized(vec![space("x", 2), space("y", 3), space("z", 4)], raw).unwrap();
            let once = d.marginalize(&["y"]).unwrap();
            let twice = d.marginalize(&["x", "y"]).unwrap().marginalize(&["y"]).unwrap();
            prop_assert!(once.max_abs_diff(&twice).unwrap() <= 1e-12);
        }
    }
}
