use serde::Serialize;

use crate::error::EngineError;

pub const MAX_ENUMERATION_CARDINALITY: usize = 6;

/// Default cap on `cardinality · 2^(4·cardinality)` evaluated strategies.
pub const DEFAULT_ENUMERATION_WORK_LIMIT: u64 = 1 << 24;

const VERTEX_NOTE: &str = "S is affine in rho, so its maximum over the probability simplex is attained at a \
                           point mass; only point-mass distributions are enumerated";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEnumeration {
    pub cardinality: usize,
    /// Response-table pairs `(f, g)` times point masses examined.
    pub strategies: u64,
    pub max_abs_s: f64,
    /// A maximizing strategy: `f` and `g` as bitmasks (bit `s·n + λ` set means
    /// +1 for local setting `s`) and the point-mass location.
    pub witness: (u32, u32, usize),
    pub reduction: &'static str,
}

/// Maximum `|S|` over every deterministic source-only strategy on a
/// `cardinality`-point λ space and every point-mass `ρ(λ)`.
pub fn enumerate_bound(cardinality: usize, work_limit: u64) -> Result<BoundEnumeration, EngineError> {
    if cardinality == 0 {
        return Err(EngineError::InvalidCardinality(cardinality));
    }
    let required = if cardinality > MAX_ENUMERATION_CARDINALITY {
        u64::MAX
    } else {
        (cardinality as u64) << (4 * cardinality)
    };
    if required > work_limit {
        return Err(EngineError::WorkLimitExceeded {
            required,
            limit: work_limit,
        });
    }
    let n = cardinality;
    let tables = 1u32 << (2 * n);
    let sign = |mask: u32, setting: usize, lambda: usize| -> i32 {
        if mask >> (setting * n + lambda) & 1 == 1 {
            1
        } else {
            -1
        }
    };
    let mut best = (i32::MIN, (0, 0, 0));
    let mut strategies = 0u64;
    for f in 0..tables {
        for g in 0..tables {
            for lambda in 0..n {
                let (fa, fap) = (sign(f, 0, lambda), sign(f, 1, lambda));
                let (gb, gbp) = (sign(g, 0, lambda), sign(g, 1, lambda));
                let s = (fa * gb + fa * gbp + fap * gb - fap * gbp).abs();
                if s > best.0 {
                    best = (s, (f, g, lambda));
                }
                strategies += 1;
            }
        }
    }
    Ok(BoundEnumeration {
        cardinality,
        strategies,
        max_abs_s: f64::from(best.0),
        witness: best.1,
        reduction: VERTEX_NOTE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_is_two_for_small_spaces() {
        for n in 1..=4 {
            let r = enumerate_bound(n, DEFAULT_ENUMERATION_WORK_LIMIT).unwrap();
            assert_eq!(r.max_abs_s, 2.0, "cardinality {n}");
            assert_eq!(r.strategies, (n as u64) << (4 * n));
        }
    }

    #[test]
    fn work_limit_and_cardinality_guards() {
        assert!(matches!(
            enumerate_bound(6, DEFAULT_ENUMERATION_WORK_LIMIT),
            Err(EngineError::WorkLimitExceeded { .. })
        ));
        assert!(matches!(
            enumerate_bound(7, u64::MAX - 1),
            Err(EngineError::WorkLimitExceeded { .. })
        ));
        assert_eq!(enumerate_bound(0, 10), Err(EngineError::InvalidCardinality(0)));
    }
}
