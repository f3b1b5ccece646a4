use std::fmt;

/// A closed sub-interval `[lo, up]` of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub up: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, up: 1.0 };

    /// Builds `[lo, up]` after clamping both ends to `[0, 1]`.
    ///
    /// Panics if `lo > up` after clamping.
    pub fn new(lo: f64, up: f64) -> Self {
        let lo = lo.clamp(0.0, 1.0);
        let up = up.clamp(0.0, 1.0);
        assert!(lo <= up, "empty interval [{lo}, {up}]");
        Interval { lo, up }
    }

    pub fn point(x: f64) -> Self {
        Interval::new(x, x)
    }

    pub fn width(&self) -> f64 {
        self.up - self.lo
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.up
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.up <= other.up
    }

    /// Intersection, or `None` when the two intervals are disjoint.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let up = self.up.min(other.up);
        (lo <= up).then_some(Interval { lo, up })
    }
}

impl Default for Interval {
    fn default() -> Self {
        Interval::UNIT
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.up)
    }
}
