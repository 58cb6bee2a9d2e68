use alloc::string::String;

use super::{diagonal, Excision, MetricComponents, MetricField, Sym3};
use crate::jet::Jet;

/// The Euclidean metric on the half-space.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Flat;

pub fn make_flat() -> Flat {
    Flat
}

impl MetricComponents for Flat {
    fn components(&self, _x: &[Jet; 3]) -> Sym3 {
        diagonal(Jet::ONE)
    }
}

impl MetricField for Flat {
    fn name(&self) -> String {
        String::from("flat")
    }

    fn decay_rate(&self) -> f64 {
        f64::INFINITY
    }

    fn mirror_symmetric(&self) -> bool {
        true
    }

    fn excisions(&self) -> &[Excision] {
        &[]
    }

    fn conformal_factor(&self, _x: &[Jet; 3]) -> Option<Jet> {
        Some(Jet::ONE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_with_zero_partials() {
        let f = make_flat();
        let g = f.eval([1.0, 2.0, 3.0]).unwrap();
        assert_eq!(g, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        for k in 0..3 {
            assert_eq!(f.eval_partial([0.3, -2.0, 5.0], k).unwrap(), [[0.0; 3]; 3]);
        }
        assert!(f.decay_rate().is_infinite());
        assert!(f.mirror_symmetric());
        assert!(f.excisions().is_empty());
    }

    #[test]
    fn decay_residuals_vanish() {
        let f = make_flat();
        let prof = super::super::decay_profile(&f, [1.0, 2.0, 0.5], &[2.0, 4.0, 8.0]).unwrap();
        for p in prof {
            assert_eq!(p, [0.0; 3]);
        }
    }
}
