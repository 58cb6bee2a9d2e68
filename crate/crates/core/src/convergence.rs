//! Observed orders of convergence over a refinement ladder.

use alloc::vec::Vec;

use crate::math;

/// Observed order between consecutive ladder rungs.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Order {
    /// Differences are at round-off: the observable is reproduced exactly.
    Exact,
    Observed(f64),
    /// Errors do not decrease along the ladder.
    NonMonotone,
}

impl Order {
    pub fn value(self) -> f64 {
        match self {
            Order::Exact => f64::INFINITY,
            Order::Observed(p) => p,
            Order::NonMonotone => f64::NAN,
        }
    }

    /// True when the order is exact or at least `p`.
    pub fn at_least(self, p: f64) -> bool {
        match self {
            Order::Exact => true,
            Order::Observed(q) => q >= p,
            Order::NonMonotone => false,
        }
    }
}

fn round_off(scale: f64) -> f64 {
    1e-12 * scale.max(1.0)
}

/// Orders from values `v_h, v_{h/2}, v_{h/4}, ...` of an observable with
/// unknown limit: `log2(|v_h - v_{h/2}| / |v_{h/2} - v_{h/4}|)`.
pub fn orders_from_values(values: &[f64]) -> Vec<Order> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)));
    let diffs: Vec<f64> = values.windows(2).map(|w| math::abs(w[1] - w[0])).collect();
    ratio_orders(&diffs, round_off(scale))
}

/// Orders from errors `e_h, e_{h/2}, ...` of an observable whose exact value
/// is zero: `log2(|e_h| / |e_{h/2}|)`.
pub fn orders_from_errors(errors: &[f64]) -> Vec<Order> {
    let abs: Vec<f64> = errors.iter().map(|e| math::abs(*e)).collect();
    // Errors are absolute; the round-off floor is set by unit scale.
    let mut out = Vec::with_capacity(abs.len().saturating_sub(1));
    for w in abs.windows(2) {
        out.push(classify(w[0], w[1], round_off(1.0)));
    }
    out
}

fn ratio_orders(diffs: &[f64], floor: f64) -> Vec<Order> {
    diffs.windows(2).map(|w| classify(w[0], w[1], floor)).collect()
}

fn classify(coarse: f64, fine: f64, floor: f64) -> Order {
    if coarse <= floor && fine <= floor {
        Order::Exact
    } else if !(fine < coarse) || fine == 0.0 {
        if fine == 0.0 && coarse > 0.0 {
            Order::Exact
        } else {
            Order::NonMonotone
        }
    } else {
        Order::Observed(math::log2(coarse / fine))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn second_order_sequence() {
        let v: Vec<f64> = [1.0, 0.5, 0.25, 0.125].iter().map(|h| 3.0 + 2.0 * h * h).collect();
        let o = orders_from_values(&v);
        assert_eq!(o.len(), 2);
        for p in o {
            assert!((p.value() - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_and_nonmonotone() {
        assert_eq!(orders_from_values(&[1.0, 1.0, 1.0]), vec![Order::Exact]);
        assert_eq!(orders_from_errors(&[1e-15, 2e-16, 0.0]), vec![Order::Exact, Order::Exact]);
        assert_eq!(orders_from_errors(&[0.1, 0.2]), vec![Order::NonMonotone]);
        assert!(orders_from_errors(&[0.1, 0.2])[0].value().is_nan());
        assert!(orders_from_errors(&[0.4, 0.1])[0].at_least(1.9));
    }
}
