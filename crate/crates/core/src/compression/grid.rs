use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Correction grids for the Gaussian decoder, in whitened units of the
/// anchor fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Mean offsets span [−mu_range, mu_range] per coordinate.
    pub mu_range: f64,
    pub mu_step: f64,
    /// Entries of the symmetric covariance correction Δ span this range.
    pub sigma_range: (f64, f64),
    pub sigma_step: f64,
}

impl GridSpec {
    /// Grid for target accuracy `alpha`: mean step α/4 over [−3, 3] and
    /// correction step α/2 over [−0.75, 3].
    pub fn for_accuracy(alpha: f64) -> Self {
        GridSpec {
            mu_range: 3.0,
            mu_step: alpha / 4.0,
            sigma_range: (-0.75, 3.0),
            sigma_step: alpha / 2.0,
        }
    }

    /// Wider grid for contaminated public data: mean range doubled and the
    /// upper correction bound doubled.
    pub fn robust_for_accuracy(alpha: f64) -> Self {
        GridSpec {
            mu_range: 6.0,
            mu_step: alpha / 4.0,
            sigma_range: (-0.75, 6.0),
            sigma_step: alpha / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.mu_range,
            self.mu_step,
            self.sigma_range.0,
            self.sigma_range.1,
            self.sigma_step,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("grid", "all grid parameters must be finite"));
        }
        if !(self.mu_step > 0.0 && self.sigma_step > 0.0) {
            return Err(Error::invalid("grid", "steps must be positive"));
        }
        if !(self.mu_range >= 0.0) {
            return Err(Error::invalid("grid.mu_range", "must be nonnegative"));
        }
        if !(self.sigma_range.0 <= self.sigma_range.1) {
            return Err(Error::invalid("grid.sigma_range", "lo must not exceed hi"));
        }
        self.mu_axis()?;
        self.sigma_axis()?;
        Ok(())
    }

    pub fn mu_axis(&self) -> Result<Axis> {
        Axis::new(-self.mu_range, self.mu_range, self.mu_step)
    }

    pub fn sigma_axis(&self) -> Result<Axis> {
        Axis::new(self.sigma_range.0, self.sigma_range.1, self.sigma_step)
    }
}

/// Largest number of points on one axis.
pub const MAX_AXIS_POINTS: usize = 1 << 20;

/// Points j·step inside [lo, hi], indexed by code. Code 0 is the point
/// nearest zero and codes move outward alternating sides, so a zero
/// bitstring addresses the zero correction whenever the axis contains 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    step: f64,
    /// Sorted ascending.
    sorted: Vec<f64>,
    /// code → position in `sorted`.
    order: Vec<usize>,
    /// position in `sorted` → code.
    code_of: Vec<usize>,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        // tolerate rounding at the ends
        let slack = 1e-9;
        let jlo = (lo / step - slack).ceil();
        let jhi = (hi / step + slack).floor();
        if jhi < jlo {
            return Err(Error::invalid(
                "grid",
                format!("no grid point in [{lo}, {hi}]"),
            ));
        }
        let count = jhi - jlo + 1.0;
        if count > MAX_AXIS_POINTS as f64 {
            return Err(Error::invalid(
                "grid",
                format!("axis with {count} points is too fine"),
            ));
        }
        let sorted: Vec<f64> = (jlo as i64..=jhi as i64).map(|j| j as f64 * step).collect();
        let mut order: Vec<usize> = (0..sorted.len()).collect();
        order.sort_by(|&a, &b| {
            sorted[a]
                .abs()
                .total_cmp(&sorted[b].abs())
                .then(sorted[a].total_cmp(&sorted[b]))
        });
        let mut code_of = vec![0; sorted.len()];
        for (code, &pos) in order.iter().enumerate() {
            code_of[pos] = code;
        }
        Ok(Axis {
            step,
            sorted,
            order,
            code_of,
        })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Bits needed to address every point.
    pub fn width(&self) -> u32 {
        usize::BITS - (self.len() - 1).leading_zeros()
    }

    pub fn value(&self, code: usize) -> Option<f64> {
        self.order.get(code).map(|&p| self.sorted[p])
    }

    /// Values in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// Code of the `pos`-th smallest value.
    pub fn code_at(&self, pos: usize) -> usize {
        self.code_of[pos]
    }

    /// Code of the point nearest `x`, and whether `x` lies more than half a
    /// step beyond the axis ends.
    pub fn nearest(&self, x: f64) -> (usize, bool) {
        let first = self.sorted[0];
        let last = *self.sorted.last().unwrap();
        let clamped = x < first - 0.5 * self.step || x > last + 0.5 * self.step;
        let pos = ((x - first) / self.step)
            .round()
            .clamp(0.0, (self.len() - 1) as f64) as usize;
        (self.code_of[pos], clamped)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_codes() {
        let a = Axis::new(-0.5, 0.5, 0.5).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a.width(), 2);
        assert_eq!(a.value(0), Some(0.0));
        assert_eq!(a.value(1), Some(-0.5));
        assert_eq!(a.value(2), Some(0.5));
        assert_eq!(a.value(3), None);
        assert_eq!(a.nearest(0.4), (2, false));
        assert_eq!(a.nearest(100.0), (2, true));
    }

    #[test]
    fn asymmetric_range_keeps_zero_first() {
        let a = Axis::new(-0.75, 3.0, 0.25).unwrap();
        assert_eq!(a.len(), 16);
        assert_eq!(a.width(), 4);
        assert_eq!(a.value(0), Some(0.0));
        let mut seen: Vec<f64> = (0..a.len()).map(|c| a.value(c).unwrap()).collect();
        seen.sort_by(f64::total_cmp);
        assert_eq!(seen, a.values());
        assert_eq!(Axis::new(0.0, 0.0, 1.0).unwrap().width(), 0);
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::for_accuracy(0.1).validate().is_ok());
        let mut g = GridSpec::for_accuracy(0.1);
        g.mu_step = 0.0;
        assert!(g.validate().is_err());
        g = GridSpec::for_accuracy(0.1);
        g.sigma_range = (1.0, 0.5);
        assert!(g.validate().is_err());
    }
}
