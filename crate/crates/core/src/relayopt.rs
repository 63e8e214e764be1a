//! Exact solver for the relay subproblem
//!
//! ```text
//! minimize  r^H Q r − r^H q − q^H r + z   subject to  r^H Π̃ r ≤ P
//! ```
//!
//! With `Q ⪰ 0` and `Π̃ ≻ 0` the problem is convex, so the KKT conditions
//! are sufficient. The solver first tries the minimum-norm unconstrained
//! stationary point; if it is infeasible (or does not exist), the multiplier
//! `μ > 0` making the constraint active is found by bracketing and bisection
//! on the strictly decreasing map `μ ↦ r(μ)^H Π̃ r(μ)`.

use crate::error::{Error, Result};
use crate::linalg::{chol_solve, herm_min_norm_solve, max_eig, min_eig};
use crate::quadforms::{instance_objective, power_of, QcqpInstance};
use crate::scalar::{czeros, CMat, CVec, Real};

#[derive(Clone, Debug)]
pub struct QcqpSolution<T: Real> {
    pub r: CVec<T>,
    pub mu: T,
    pub objective: T,
    /// `‖(Q + μΠ̃) r − q‖`.
    pub kkt_residual: T,
    /// `P − r^H Π̃ r`.
    pub constraint_slack: T,
    /// `(μ, r(μ)^H Π̃ r(μ))` at every bisection probe, in probe order.
    pub bisection_trace: Vec<(T, T)>,
}

/// Homogenized matrices of the lifted problem.
#[derive(Clone, Debug)]
pub struct HomogenizedForm<T: Real> {
    pub b1: CMat<T>,
    pub b2: CMat<T>,
}

const MAX_DOUBLINGS: usize = 60;
const MAX_BISECTIONS: usize = 200;

fn check_instance<T: Real>(inst: &QcqpInstance<T>) -> Result<()> {
    let d = inst.q_mat.nrows();
    if inst.q_mat.shape() != (d, d) || inst.pi.shape() != (d, d) || inst.q.len() != d {
        return Err(Error::InvalidDimension("QCQP blocks disagree in size".into()));
    }
    if !(inst.p_r_max > T::zero()) {
        return Err(Error::Precondition("power budget must be positive".into()));
    }
    let qn = max_eig(&inst.q_mat).abs();
    if min_eig(&inst.q_mat) < -T::lit(1e-9) * qn {
        return Err(Error::Precondition("Q is not positive semidefinite".into()));
    }
    if !(min_eig(&inst.pi) > T::zero()) {
        return Err(Error::Precondition("power form is not positive definite".into()));
    }
    Ok(())
}

fn finish<T: Real>(inst: &QcqpInstance<T>, r: CVec<T>, mu: T, trace: Vec<(T, T)>) -> QcqpSolution<T> {
    let lhs = &inst.q_mat * &r + &inst.pi * &r * crate::scalar::cr(mu);
    let kkt_residual = (lhs - &inst.q).norm();
    let constraint_slack = inst.p_r_max - power_of(&inst.pi, &r);
    QcqpSolution { objective: instance_objective(inst, &r), r, mu, kkt_residual, constraint_slack, bisection_trace: trace }
}

/// Global minimizer of the single-constraint convex QCQP.
pub fn solve_relay_qcqp<T: Real>(inst: &QcqpInstance<T>) -> Result<QcqpSolution<T>> {
    check_instance(inst)?;
    let d = inst.q.len();
    let p = inst.p_r_max;
    if inst.q.norm() == T::zero() {
        return Ok(finish(inst, CVec::zeros(d), T::zero(), Vec::new()));
    }

    let (r0, rel_res) = herm_min_norm_solve(&inst.q_mat, &inst.q);
    if rel_res <= T::lit(1e-10) && power_of(&inst.pi, &r0) <= p {
        return Ok(finish(inst, r0, T::zero(), Vec::new()));
    }

    let r_of = |mu: T| -> Result<CVec<T>> { chol_solve(&(&inst.q_mat + &inst.pi * crate::scalar::cr(mu)), &inst.q) };
    let mut trace = Vec::new();
    let mut hi = T::one();
    let mut r_hi = r_of(hi)?;
    let mut c_hi = power_of(&inst.pi, &r_hi);
    trace.push((hi, c_hi));
    let mut doublings = 0;
    while c_hi > p {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::NumericalConsistency("failed to bracket the relay multiplier".into()));
        }
        hi *= T::lit(2.0);
        r_hi = r_of(hi)?;
        c_hi = power_of(&inst.pi, &r_hi);
        trace.push((hi, c_hi));
        doublings += 1;
    }
    let mut lo = if doublings == 0 { T::zero() } else { hi / T::lit(2.0) };
    let tol = T::lit(1e-10) * p;
    for _ in 0..MAX_BISECTIONS {
        if (p - c_hi).abs() <= tol {
            break;
        }
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let r_mid = r_of(mid)?;
        let c_mid = power_of(&inst.pi, &r_mid);
        trace.push((mid, c_mid));
        if c_mid > p {
            lo = mid;
        } else {
            hi = mid;
            r_hi = r_mid;
            c_hi = c_mid;
        }
    }
    Ok(finish(inst, r_hi, hi, trace))
}

/// `B1 = [[Q, −q], [−q^H, z]]`, `B2 = [[Π̃, 0], [0, −P]]`.
pub fn homogenize<T: Real>(inst: &QcqpInstance<T>) -> HomogenizedForm<T> {
    let d = inst.q.len();
    let mut b1 = czeros(d + 1, d + 1);
    let mut b2 = czeros(d + 1, d + 1);
    b1.view_mut((0, 0), (d, d)).copy_from(&inst.q_mat);
    b2.view_mut((0, 0), (d, d)).copy_from(&inst.pi);
    for i in 0..d {
        b1[(i, d)] = -inst.q[i];
        b1[(d, i)] = -inst.q[i].conj();
    }
    b1[(d, d)] = crate::scalar::cr(inst.z);
    b2[(d, d)] = crate::scalar::cr(-inst.p_r_max);
    HomogenizedForm { b1, b2 }
}

/// Lifts `r` to `[r; 1]`.
pub fn lift<T: Real>(r: &CVec<T>) -> CVec<T> {
    let mut out = CVec::zeros(r.len() + 1);
    out.rows_mut(0, r.len()).copy_from(r);
    out[r.len()] = crate::scalar::cr(T::one());
    out
}
