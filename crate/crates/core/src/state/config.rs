use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::values::Limits;

/// Evaluation bounds and caps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalConfig {
    pub minint: BigInt,
    pub maxint: BigInt,
    /// Elements given to each deferred set.
    pub deferred_set_card: usize,
    /// Candidate budget per quantifier, comprehension or parameter search.
    pub max_enum: usize,
    pub max_set_size: usize,
    /// Use constraint-derived candidate domains instead of full type enumeration.
    pub narrowing: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            minint: BigInt::from(-128),
            maxint: BigInt::from(127),
            deferred_set_card: 2,
            max_enum: 1 << 16,
            max_set_size: 1 << 20,
            narrowing: true,
        }
    }
}

impl EvalConfig {
    pub fn limits(&self) -> Limits {
        Limits {
            max_set_size: self.max_set_size,
        }
    }

    /// Checks `minint <= 0 <= maxint` and positive caps.
    pub fn validate(&self) -> Result<(), String> {
        if self.minint.is_positive() || self.maxint < BigInt::zero() {
            return Err(format!(
                "expected minint <= 0 <= maxint, found minint={} maxint={}",
                self.minint, self.maxint
            ));
        }
        if self.deferred_set_card == 0 || self.max_enum == 0 || self.max_set_size == 0 {
            return Err("expected positive caps, found 0".into());
        }
        Ok(())
    }
}
