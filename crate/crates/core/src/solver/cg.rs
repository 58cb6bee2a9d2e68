use alloc::vec::Vec;

use super::assemble::CsrMatrix;
use crate::error::{Error, Result};
use crate::math;
use crate::par;

#[derive(Clone, Debug, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖b - A x‖ / ‖b‖` of the returned iterate.
    pub relative_residual: f64,
    /// Relative residual before each iteration, starting with the initial guess.
    pub history: Vec<f64>,
}

/// Iteration cap `max(500, 10 √n ln(1/tol))`.
pub fn iteration_cap(n: usize, tol: f64) -> usize {
    let c = 10.0 * math::sqrt(n as f64) * math::ln(1.0 / tol);
    (math::ceil(c) as usize).max(500)
}

/// Jacobi-preconditioned conjugate gradients from the initial guess `x0`.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], x0: Vec<f64>, tol: f64) -> Result<CgOutcome> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "solver tolerance must lie in (0, 1), got {tol}"
        )));
    }
    let n = a.n;
    assert_eq!(b.len(), n);
    assert_eq!(x0.len(), n);
    let cap = iteration_cap(n, tol);
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { f64::NAN })
        .collect();
    if inv_diag.iter().any(|d| d.is_nan()) {
        return Err(Error::Domain("operator has a non-positive diagonal entry".into()));
    }
    let bnorm = math::sqrt(par::dot(b, b));
    let mut x = x0;
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
            history: alloc::vec![0.0],
        });
    }
    let mut r = alloc::vec![0.0; n];
    a.matvec(&x, &mut r);
    par::for_each_mut(&mut r, |i, ri| *ri = b[i] - *ri);
    let mut z: Vec<f64> = par::map(n, |i| inv_diag[i] * r[i]);
    let mut p = z.clone();
    let mut ap = alloc::vec![0.0; n];
    let mut rz = par::dot(&r, &z);
    let mut rel = math::sqrt(par::dot(&r, &r)) / bnorm;
    let mut history = alloc::vec![rel];
    let mut it = 0;
    while rel > tol {
        if it == cap {
            return Err(Error::NotConverged {
                iterations: it,
                residual: rel,
                history,
            });
        }
        a.matvec(&p, &mut ap);
        let pap = par::dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Domain(alloc::format!(
                "operator is not positive definite (pᵀAp = {pap:e} at iteration {it})"
            )));
        }
        let alpha = rz / pap;
        par::for_each_mut(&mut x, |i, xi| *xi += alpha * p[i]);
        par::for_each_mut(&mut r, |i, ri| *ri -= alpha * ap[i]);
        par::for_each_mut(&mut z, |i, zi| *zi = inv_diag[i] * r[i]);
        let rz_next = par::dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        par::for_each_mut(&mut p, |i, pi| *pi = z[i] + beta * *pi);
        rel = math::sqrt(par::dot(&r, &r)) / bnorm;
        history.push(rel);
        it += 1;
    }
    Ok(CgOutcome {
        x,
        iterations: it,
        relative_residual: rel,
        history,
    })
}
