//! Box-plot summary: median and quartile box, whiskers to the extreme
//! data within 1.5 box heights of the box edges, the rest as outliers.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct BoxStats {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// ceil(q N)-th order statistic of sorted data, 1-based.
fn rank_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Option<BoxStats> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q25 = rank_quantile(&sorted, 0.25);
        let median = rank_quantile(&sorted, 0.5);
        let q75 = rank_quantile(&sorted, 0.75);
        let height = q75 - q25;
        let lo_fence = q25 - 1.5 * height;
        let hi_fence = q75 + 1.5 * height;
        let whisker_low = sorted.iter().copied().find(|&v| v >= lo_fence).unwrap_or(q25);
        let whisker_high = sorted.iter().rev().copied().find(|&v| v <= hi_fence).unwrap_or(q75);
        let outliers = sorted.iter().copied().filter(|&v| v < whisker_low || v > whisker_high).collect();
        Some(BoxStats { median, q25, q75, whisker_low, whisker_high, outliers })
    }

    /// Whether the box (quartile range) covers a value.
    pub fn box_covers(&self, value: f64) -> bool {
        self.q25 <= value && value <= self.q75
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_follow_rank_convention() {
        let values: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let b = BoxStats::from_values(&values).unwrap();
        assert_eq!(b.q25, 25.0);
        assert_eq!(b.median, 50.0);
        assert_eq!(b.q75, 75.0);
        // fences at 25 - 75 = -50 and 75 + 75 = 150: no outliers
        assert_eq!(b.whisker_low, 1.0);
        assert_eq!(b.whisker_high, 100.0);
        assert!(b.outliers.is_empty());
    }

    #[test]
    fn outliers_fall_outside_the_fences() {
        let mut values: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        values.push(500.0);
        values.push(-500.0);
        let b = BoxStats::from_values(&values).unwrap();
        assert_eq!(b.outliers, vec![-500.0, 500.0]);
        assert!(b.whisker_high <= b.q75 + 1.5 * (b.q75 - b.q25));
    }

    #[test]
    fn degenerate_box_is_a_line() {
        let b = BoxStats::from_values(&[2.0; 10]).unwrap();
        assert_eq!(b.q25, 2.0);
        assert_eq!(b.q75, 2.0);
        assert_eq!(b.whisker_low, 2.0);
        assert_eq!(b.whisker_high, 2.0);
        assert!(b.outliers.is_empty());
    }

    #[test]
    fn reference_box_rule_on_known_vector() {
        // hand-computed reference for a fixed 8-point vector
        let values = [-0.9, -0.5, -0.2, 0.0, 0.1, 0.3, 0.4, 2.0];
        let b = BoxStats::from_values(&values).unwrap();
        assert_eq!(b.q25, -0.5); // ceil(0.25*8) = 2nd
        assert_eq!(b.median, 0.0); // ceil(0.5*8) = 4th
        assert_eq!(b.q75, 0.3); // ceil(0.75*8) = 6th
        // height 0.8, fences -1.7 and 1.5: 2.0 is the lone outlier
        assert_eq!(b.whisker_low, -0.9);
        assert_eq!(b.whisker_high, 0.4);
        assert_eq!(b.outliers, vec![2.0]);
    }
}
