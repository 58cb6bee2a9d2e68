//! Convergence tables over resolution ladders.

use pmtk_core::convergence::{orders_from_errors, orders_from_values};

use crate::record::{ConvergenceRecord, Series};
use crate::run::render_order;

/// Tab-separated table: one row per observable with its ladder values and
/// observed orders between successive rungs. Errors use
/// `log2(e_h / e_{h/2})`; values with unknown limit use
/// `log2(|v_h - v_{h/2}| / |v_{h/2} - v_{h/4}|)` and need three rungs.
pub fn convergence_table(c: &ConvergenceRecord) -> String {
    let n = c.ladder.len();
    let mut out = String::from("observable\tseries");
    for l in &c.ladder {
        out.push('\t');
        out.push_str(l);
    }
    for k in 1..n {
        out.push_str(&format!("\torder{}", k));
    }
    out.push('\n');
    for o in &c.observables {
        let (series, orders) = match o.series {
            Series::Errors => ("errors", orders_from_errors(&o.values)),
            Series::Values => ("values", orders_from_values(&o.values)),
        };
        out.push_str(&o.name);
        out.push('\t');
        out.push_str(series);
        for v in &o.values {
            out.push_str(&format!("\t{v:.6e}"));
        }
        let offset = (n - 1) - orders.len();
        for _ in 0..offset {
            out.push_str("\t-");
        }
        for p in orders {
            out.push('\t');
            out.push_str(&render_order(p));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::Observable;

    fn record(series: Series, values: Vec<f64>) -> ConvergenceRecord {
        ConvergenceRecord {
            ladder: (0..values.len()).map(|k| format!("n{k}")).collect(),
            observables: vec![Observable {
                name: "x".into(),
                series,
                values,
            }],
        }
    }

    #[test]
    fn second_order_errors() {
        let t = convergence_table(&record(Series::Errors, vec![1.6e-3, 4e-4, 1e-4]));
        let row: Vec<&str> = t.lines().nth(1).unwrap().split('\t').collect();
        assert_eq!(&row[5..], ["2.000", "2.000"]);
    }

    #[test]
    fn round_off_is_exact_and_growth_is_flagged() {
        let t = convergence_table(&record(Series::Errors, vec![1e-15, 2e-16, 0.0]));
        assert!(t.lines().nth(1).unwrap().ends_with("exact\texact"));
        let t = convergence_table(&record(Series::Errors, vec![1e-3, 2e-3, 1e-3]));
        assert!(t.contains("nan (non-monotone)"));
    }

    #[test]
    fn values_need_three_rungs() {
        // v = 1 + h² on h = 1, 1/2, 1/4.
        let t = convergence_table(&record(Series::Values, vec![2.0, 1.25, 1.0625]));
        let row: Vec<&str> = t.lines().nth(1).unwrap().split('\t').collect();
        assert_eq!(&row[5..], ["-", "2.000"]);
    }
}
