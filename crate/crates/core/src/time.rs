use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// A hybrid time `(t, j)`: ordinary time and jump count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridTime {
    pub t: f64,
    pub j: usize,
}

impl HybridTime {
    pub fn new(t: f64, j: usize) -> Self {
        HybridTime { t, j }
    }

    pub fn zero() -> Self {
        HybridTime { t: 0.0, j: 0 }
    }

    /// `t + j`, the scalar used to order points of a hybrid time domain.
    pub fn total(&self) -> f64 {
        self.t + self.j as f64
    }

    /// Componentwise order: `t <= t'` and `j <= j'`.
    pub fn precedes(&self, other: &HybridTime) -> bool {
        self.t <= other.t && self.j <= other.j
    }
}

impl PartialOrd for HybridTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.j.cmp(&other.j) {
            Ordering::Equal => self.t.partial_cmp(&other.t),
            o => {
                // within one hybrid time domain a larger j never has a smaller t
                let by_total = self.total().partial_cmp(&other.total())?;
                Some(if by_total == Ordering::Equal { o } else { by_total })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_matches_sum() {
        let a = HybridTime::new(1.0, 0);
        let b = HybridTime::new(1.0, 1);
        let c = HybridTime::new(0.5, 2);
        assert!(a < b);
        assert!(b < c);
        assert!(a.precedes(&b));
        assert!(!b.precedes(&c));
        assert_eq!(c.total(), 2.5);
    }
}
