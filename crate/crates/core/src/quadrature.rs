//! Composite trapezoid rules.

use alloc::vec::Vec;

/// Nodes and weights of the composite trapezoid rule with `n` panels on `[a, b]`.
pub fn trapezoid(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "trapezoid rule needs at least one panel");
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|i| {
            let x = if i == n { b } else { a + i as f64 * h };
            let w = if i == 0 || i == n { 0.5 * h } else { h };
            (x, w)
        })
        .collect()
}

/// Equispaced nodes on a period starting at `a`, all with weight `period / n`.
pub fn periodic(a: f64, period: f64, n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "periodic rule needs at least one node");
    let h = period / n as f64;
    (0..n).map(|i| (a + i as f64 * h, h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let s: f64 = trapezoid(1.0, 3.0, 7)
            .iter()
            .map(|&(x, w)| w * (2.0 * x + 1.0))
            .sum();
        assert!((s - 10.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_is_second_order() {
        let err = |n| {
            let s: f64 = trapezoid(0.0, PI / 2.0, n)
                .iter()
                .map(|&(x, w)| w * x.sin())
                .sum();
            (s - 1.0).abs()
        };
        let p = (err(32) / err(64)).log2();
        assert!((p - 2.0).abs() < 0.01, "{p}");
    }

    #[test]
    fn periodic_is_spectral() {
        let s: f64 = periodic(0.3, 2.0 * PI, 16)
            .iter()
            .map(|&(x, w)| w * (x.cos()).exp())
            .sum();
        // 2π I0(1)
        assert!((s - 2.0 * PI * 1.266_065_877_752_008_4).abs() < 1e-13);
    }
}
