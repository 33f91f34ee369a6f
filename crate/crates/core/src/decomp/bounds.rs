/// A rank reported as an interval `[lower, upper]`; exact when the two meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankInterval {
    pub lower: usize,
    pub upper: usize,
}

impl RankInterval {
    pub fn new(lower: usize, upper: usize) -> Self {
        debug_assert!(lower <= upper, "interval [{lower}, {upper}] is inverted");
        Self { lower, upper }
    }

    pub fn exact(value: usize) -> Self {
        Self::new(value, value)
    }

    pub fn is_closed(&self) -> bool {
        self.lower == self.upper
    }

    pub fn contains(&self, value: usize) -> bool {
        self.lower <= value && value <= self.upper
    }

    /// Two intervals for the same true value must overlap.
    pub fn consistent_with(&self, other: &RankInterval) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

/// Smallest integer `k` with `k * k >= x`.
pub fn ceil_sqrt(x: usize) -> usize {
    let mut k = (x as f64).sqrt() as usize;
    while k * k < x {
        k += 1;
    }
    while k > 0 && (k - 1) * (k - 1) >= x {
        k -= 1;
    }
    k
}

/// Purification-rank interval from the operator Schmidt rank (`osr <= puri^2`)
/// and the best certificate found.
pub fn puri_interval(osr: usize, best_osr_l: usize) -> RankInterval {
    let lower = ceil_sqrt(osr);
    RankInterval::new(lower, best_osr_l.max(lower))
}

/// `max_l min(prod_{k<=l} d_k^2, prod_{k>l} d_k^2)`, the largest matricization
/// rank any operator on these sites can have (1 for a single site).
pub fn physical_dimension_bound(dims: &[usize]) -> u128 {
    let sq: Vec<u128> = dims.iter().map(|&d| (d as u128) * (d as u128)).collect();
    (1..dims.len())
        .map(|cut| {
            let left: u128 = sq[..cut].iter().product();
            let right: u128 = sq[cut..].iter().product();
            left.min(right)
        })
        .max()
        .unwrap_or(1)
}

/// `(osr^m - 1) / (osr - 1)`, which is `m` for `osr = 1`.
pub fn q_sqrt_power_bound(osr: usize, m: usize) -> u128 {
    match osr {
        0 => 0,
        1 => m as u128,
        _ => {
            let o = osr as u128;
            let mut acc: u128 = 0;
            let mut term: u128 = 1;
            for _ in 0..m {
                acc = acc.saturating_add(term);
                term = term.saturating_mul(o);
            }
            acc
        }
    }
}

/// Number of distinct eigenvalues, clustering values closer than
/// `1e-8 * max |lambda|`. Values are clipped at zero first so that round-off
/// around a zero eigenvalue forms one cluster.
pub fn distinct_eigenvalue_count(values: &[f64]) -> usize {
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let gap = 1e-8 * scale;
    let mut sorted: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    sorted.sort_by(f64::total_cmp);
    let mut count = 0;
    let mut last: Option<f64> = None;
    for v in sorted {
        if last.is_none_or(|l| v - l > gap) {
            count += 1;
            last = Some(v);
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_sqrt_small_values() {
        let expected = [0, 1, 2, 2, 2, 3, 3, 3, 3, 3, 4];
        for (x, &e) in expected.iter().enumerate() {
            assert_eq!(ceil_sqrt(x), e, "x = {x}");
        }
    }

    #[test]
    fn physical_bound_for_qubits() {
        assert_eq!(physical_dimension_bound(&[2]), 1);
        assert_eq!(physical_dimension_bound(&[2, 2]), 4);
        assert_eq!(physical_dimension_bound(&[2, 2, 2]), 4);
        assert_eq!(physical_dimension_bound(&[2, 2, 2, 2]), 16);
        assert_eq!(physical_dimension_bound(&[2, 2, 2, 2, 2]), 16);
        assert_eq!(physical_dimension_bound(&[3, 2]), 4);
    }

    #[test]
    fn power_bound() {
        assert_eq!(q_sqrt_power_bound(1, 3), 3);
        assert_eq!(q_sqrt_power_bound(2, 3), 7);
        assert_eq!(q_sqrt_power_bound(3, 2), 4);
    }

    #[test]
    fn clusters_eigenvalues() {
        assert_eq!(distinct_eigenvalue_count(&[1.0, 1.0 + 1e-12, 0.0, -1e-15]), 2);
        assert_eq!(distinct_eigenvalue_count(&[3.0, 2.0, 1.0]), 3);
        assert_eq!(distinct_eigenvalue_count(&[]), 0);
    }

    #[test]
    fn interval_consistency() {
        let a = RankInterval::new(2, 4);
        assert!(a.consistent_with(&RankInterval::exact(3)));
        assert!(!a.consistent_with(&RankInterval::new(5, 6)));
        assert_eq!(puri_interval(4, 2), RankInterval::exact(2));
    }
}
