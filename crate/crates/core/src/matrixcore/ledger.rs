use std::fmt;
use std::ops::{Add, AddAssign};

/// Exact operation count in thirds of one `r x r` product.
///
/// A product is 3 thirds, a solve 4 thirds, a block hitting a `r x 2r` slab
/// 6 thirds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CostLedger {
    thirds: u64,
}

impl CostLedger {
    pub const PRODUCT: u64 = 3;
    pub const SOLVE: u64 = 4;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_thirds(thirds: u64) -> Self {
        Self { thirds }
    }

    /// Ledger holding `whole + num/3` units.
    pub fn from_units(whole: u64, num_thirds: u64) -> Self {
        Self {
            thirds: 3 * whole + num_thirds,
        }
    }

    pub fn thirds(&self) -> u64 {
        self.thirds
    }

    pub fn units(&self) -> f64 {
        self.thirds as f64 / 3.0
    }

    pub fn charge_products(&mut self, n: u64) {
        self.thirds += Self::PRODUCT * n;
    }

    pub fn charge_solves(&mut self, n: u64) {
        self.thirds += Self::SOLVE * n;
    }

    pub fn charge_thirds(&mut self, n: u64) {
        self.thirds += n;
    }

    pub fn merge(&mut self, other: &CostLedger) {
        self.thirds += other.thirds;
    }

    /// Difference `self - earlier`; saturates at zero.
    pub fn since(&self, earlier: &CostLedger) -> CostLedger {
        CostLedger {
            thirds: self.thirds.saturating_sub(earlier.thirds),
        }
    }
}

impl Add for CostLedger {
    type Output = CostLedger;
    fn add(self, rhs: CostLedger) -> CostLedger {
        CostLedger {
            thirds: self.thirds + rhs.thirds,
        }
    }
}

impl AddAssign for CostLedger {
    fn add_assign(&mut self, rhs: CostLedger) {
        self.thirds += rhs.thirds;
    }
}

impl fmt::Display for CostLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.thirds / 3;
        match self.thirds % 3 {
            0 => write!(f, "{whole} C"),
            k => write!(f, "{whole}+{k}/3 C"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_uses_thirds() {
        assert_eq!(CostLedger::from_units(27, 2).to_string(), "27+2/3 C");
        assert_eq!(CostLedger::from_units(47, 0).to_string(), "47 C");
    }

    #[test]
    fn charges() {
        let mut l = CostLedger::new();
        l.charge_products(2);
        l.charge_solves(1);
        assert_eq!(l, CostLedger::from_units(3, 1));
        assert_eq!(l.since(&CostLedger::from_thirds(3)).thirds(), 7);
    }
}
