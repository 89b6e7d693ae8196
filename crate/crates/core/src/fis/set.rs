use serde::{Deserialize, Serialize};

use super::FisError;

/// Trapezoidal fuzzy set `(a, b, c, d)`: rises on `[a, b)`, is fully true on
/// `[b, c]` and falls on `(c, d]`.
///
/// Equal neighbouring corners are allowed and give triangular sets or crisp
/// shoulders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct TrapezoidSet {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl TrapezoidSet {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FisError> {
        let finite = [a, b, c, d].iter().all(|v| v.is_finite());
        if !finite || !(a <= b && b <= c && c <= d) {
            return Err(FisError::InvalidSet([a, b, c, d]));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn corners(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Degree of membership of `x`, always in `[0, 1]`.
    #[inline]
    pub fn membership(&self, x: f64) -> f64 {
        trapezoid(x, self.a, self.b, self.c, self.d)
    }
}

/// Piecewise-linear trapezoid evaluation shared by the set type and the
/// flat-array kernels.
#[inline(always)]
pub(crate) fn trapezoid(x: f64, a: f64, b: f64, c: f64, d: f64) -> f64 {
    if x < a || x > d {
        0.0
    } else if x < b {
        (x - a) / (b - a)
    } else if x <= c {
        1.0
    } else {
        (d - x) / (d - c)
    }
}

impl TryFrom<[f64; 4]> for TrapezoidSet {
    type Error = FisError;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        TrapezoidSet::new(v[0], v[1], v[2], v[3])
    }
}

impl From<TrapezoidSet> for [f64; 4] {
    fn from(s: TrapezoidSet) -> Self {
        s.corners()
    }
}

#[derive(Deserialize)]
struct RawPartition {
    #[serde(default)]
    name: String,
    universe: [f64; 2],
    sets: Vec<TrapezoidSet>,
}

#[derive(Serialize)]
struct RawPartitionRef<'a> {
    name: &'a str,
    universe: [f64; 2],
    sets: &'a [TrapezoidSet],
}

/// Ordered linguistic sets covering one variable's universe.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "RawPartition")]
pub struct VariablePartition {
    name: String,
    universe_min: f64,
    universe_max: f64,
    sets: Vec<TrapezoidSet>,
}

impl Serialize for VariablePartition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RawPartitionRef {
            name: &self.name,
            universe: [self.universe_min, self.universe_max],
            sets: &self.sets,
        }
        .serialize(serializer)
    }
}

impl TryFrom<RawPartition> for VariablePartition {
    type Error = FisError;

    fn try_from(raw: RawPartition) -> Result<Self, Self::Error> {
        VariablePartition::new(raw.name, raw.universe[0], raw.universe[1], raw.sets)
    }
}

impl VariablePartition {
    pub fn new(
        name: impl Into<String>,
        universe_min: f64,
        universe_max: f64,
        sets: Vec<TrapezoidSet>,
    ) -> Result<Self, FisError> {
        let p = Self {
            name: name.into(),
            universe_min,
            universe_max,
            sets,
        };
        p.validate()?;
        Ok(p)
    }

    /// Evenly spaced partition: the `2n` corner positions (both shoulders
    /// included) are spread uniformly over the universe, and neighbouring
    /// sets share their overlap corners.
    pub fn uniform(
        name: impl Into<String>,
        universe_min: f64,
        universe_max: f64,
        n_sets: usize,
    ) -> Result<Self, FisError> {
        let interior: Vec<f64> = (1..=2 * n_sets.saturating_sub(1))
            .map(|k| k as f64 / (2 * n_sets - 1) as f64)
            .collect();
        Self::from_unit_corners(name, universe_min, universe_max, n_sets, &interior)
    }

    /// Build a shouldered partition from `2(n-1)` interior overlap corners
    /// given in `[0, 1]` units of the universe. The corners must already be
    /// sorted.
    pub(crate) fn from_unit_corners(
        name: impl Into<String>,
        universe_min: f64,
        universe_max: f64,
        n_sets: usize,
        unit_corners: &[f64],
    ) -> Result<Self, FisError> {
        if n_sets == 0 || unit_corners.len() != 2 * (n_sets - 1) {
            return Err(FisError::InvalidPartition(format!(
                "{n_sets} sets need {} interior corners, got {}",
                2 * n_sets.saturating_sub(1),
                unit_corners.len()
            )));
        }
        let width = universe_max - universe_min;
        let at = |g: f64| (universe_min + g * width).clamp(universe_min, universe_max);
        let mut sets = Vec::with_capacity(n_sets);
        for j in 0..n_sets {
            let (a, b) = if j == 0 {
                (universe_min, universe_min)
            } else {
                (at(unit_corners[2 * j - 2]), at(unit_corners[2 * j - 1]))
            };
            let (c, d) = if j == n_sets - 1 {
                (universe_max, universe_max)
            } else {
                (at(unit_corners[2 * j]), at(unit_corners[2 * j + 1]))
            };
            sets.push(TrapezoidSet::new(a, b, c, d)?);
        }
        Self::new(name, universe_min, universe_max, sets)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn universe(&self) -> (f64, f64) {
        (self.universe_min, self.universe_max)
    }

    pub fn sets(&self) -> &[TrapezoidSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.universe_min, self.universe_max)
    }

    fn validate(&self) -> Result<(), FisError> {
        let err = |msg: String| Err(FisError::InvalidPartition(format!("{}: {msg}", self.name)));
        if !(self.universe_min.is_finite() && self.universe_max.is_finite())
            || self.universe_min >= self.universe_max
        {
            return err(format!(
                "empty universe [{}, {}]",
                self.universe_min, self.universe_max
            ));
        }
        if self.sets.is_empty() {
            return err("no sets".into());
        }
        for (j, s) in self.sets.iter().enumerate() {
            let [a, _, _, d] = s.corners();
            if a < self.universe_min || d > self.universe_max {
                return err(format!("set {} leaves the universe", j + 1));
            }
        }
        if self.sets.windows(2).any(|w| w[0].b > w[1].b) {
            return err("set plateaus out of order".into());
        }
        if !self.covers_universe() {
            return err("some point of the universe belongs to no set".into());
        }
        Ok(())
    }

    /// Sweep over the positive-membership intervals of every set. A set is
    /// positive on `(a, d)` plus its plateau `[b, c]`, so an end is closed
    /// only where the corresponding edge is vertical.
    fn covers_universe(&self) -> bool {
        // (lo, lo_closed, hi, hi_closed)
        let mut spans: Vec<(f64, bool, f64, bool)> = self
            .sets
            .iter()
            .map(|s| (s.a, s.a == s.b, s.d, s.c == s.d))
            .collect();
        spans.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));

        let mut reach = self.universe_min;
        let mut reach_closed = false;
        for (lo, lo_closed, hi, hi_closed) in spans {
            if lo > reach || (lo == reach && !lo_closed && !reach_closed) {
                break;
            }
            if hi > reach {
                reach = hi;
                reach_closed = hi_closed;
            } else if hi == reach {
                reach_closed |= hi_closed;
            }
        }
        reach > self.universe_max || (reach == self.universe_max && reach_closed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(a: f64, b: f64, c: f64, d: f64) -> TrapezoidSet {
        TrapezoidSet::new(a, b, c, d).unwrap()
    }

    #[test]
    fn membership_examples() {
        let s = set(0.0, 0.2, 0.4, 0.6);
        assert_eq!(s.membership(0.3), 1.0);
        assert!((s.membership(0.1) - 0.5).abs() < 1e-15);
        assert_eq!(s.membership(0.7), 0.0);
        assert_eq!(s.membership(0.0), 0.0);
        assert_eq!(s.membership(0.6), 0.0);
        assert!((s.membership(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_edges_are_crisp() {
        let shoulder = set(0.0, 0.0, 0.3, 0.5);
        assert_eq!(shoulder.membership(0.0), 1.0);
        let spike = set(0.5, 0.5, 0.5, 0.5);
        assert_eq!(spike.membership(0.5), 1.0);
        assert_eq!(spike.membership(0.5 + 1e-12), 0.0);
    }

    #[test]
    fn rejects_unordered_corners() {
        assert!(TrapezoidSet::new(0.0, 0.3, 0.2, 0.6).is_err());
        assert!(TrapezoidSet::new(0.0, f64::NAN, 0.2, 0.6).is_err());
    }

    #[test]
    fn uniform_partition_is_valid_and_even() {
        let p = VariablePartition::uniform("x", 0.0, 1.0, 3).unwrap();
        let c: Vec<[f64; 4]> = p.sets().iter().map(|s| s.corners()).collect();
        assert_eq!(c[0], [0.0, 0.0, 0.2, 0.4]);
        assert!((c[1][0] - 0.2).abs() < 1e-15 && (c[1][3] - 0.8).abs() < 1e-15);
        assert_eq!(c[2][2..], [1.0, 1.0]);
    }

    #[test]
    fn coverage_gap_is_rejected() {
        let sets = vec![set(0.0, 0.0, 0.3, 0.4), set(0.5, 0.6, 1.0, 1.0)];
        assert!(VariablePartition::new("gap", 0.0, 1.0, sets).is_err());
        // touching open ends leave the single point 0.4 uncovered
        let sets = vec![set(0.0, 0.0, 0.3, 0.4), set(0.4, 0.5, 1.0, 1.0)];
        assert!(VariablePartition::new("point-gap", 0.0, 1.0, sets).is_err());
        // a vertical edge closes it
        let sets = vec![set(0.0, 0.0, 0.4, 0.4), set(0.4, 0.5, 1.0, 1.0)];
        assert!(VariablePartition::new("closed", 0.0, 1.0, sets).is_ok());
    }

    #[test]
    fn set_outside_universe_is_rejected() {
        let sets = vec![set(-0.1, 0.0, 1.0, 1.0)];
        assert!(VariablePartition::new("out", 0.0, 1.0, sets).is_err());
    }
}
