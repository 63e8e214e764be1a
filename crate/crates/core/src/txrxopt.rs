//! Per-subcarrier transceivers and source power allocation.
//!
//! [`design_transceiver`] whitens the subcarrier channel and keeps its
//! strongest `Γ` eigenmodes, turning each subcarrier into `Γ` parallel
//! scalar channels with gains `d_n[k]`. Power is then spread over all `NΓ`
//! eigen-subchannels, either for weighted MSE ([`allocate_power_mse`]) or
//! for rate ([`allocate_power_rate`]).

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, inv_sqrt_pd, inverse, svd_sorted};
use crate::scalar::{cdiag, cr, CMat, Real};

/// Transceiver state of one subcarrier.
#[derive(Clone, Debug)]
pub struct SubcarrierTransceiver<T: Real> {
    /// Orthonormal precoder directions `Ṽ_n` (`N_t × Γ`).
    pub v_tilde: CMat<T>,
    /// Stream amplitudes, the diagonal of `P̃_n`.
    pub p: Vec<T>,
    /// Receive filter applied to the subcarrier (`Γ × N_r`).
    pub u: CMat<T>,
    /// Whitening decoder from the eigenmode design, `U_w H Ṽ = diag(d)`.
    pub decoder: CMat<T>,
    /// Weights, the diagonal of `Θ_n`.
    pub theta: Vec<T>,
    /// Eigen-gains at design time, descending.
    pub d: Vec<T>,
}

impl<T: Real> SubcarrierTransceiver<T> {
    /// Precoder `V_n = Ṽ_n P̃_n`.
    pub fn precoder(&self) -> CMat<T> {
        &self.v_tilde * cdiag(&self.p)
    }
}

/// Eigenmode design: `Ṽ` = top-`Γ` right singular vectors of `Σ^{-1/2} H`,
/// `U_w` = (top-`Γ` left singular vectors)^H `Σ^{-1/2}`, `d` = singular values.
pub fn design_transceiver<T: Real>(h: &CMat<T>, sigma: &CMat<T>, gamma: usize) -> Result<(CMat<T>, CMat<T>, Vec<T>)> {
    if gamma == 0 || gamma > h.nrows().min(h.ncols()) {
        return Err(Error::InvalidDimension(format!("cannot carry {gamma} streams over a {}x{} channel", h.nrows(), h.ncols())));
    }
    if sigma.shape() != (h.nrows(), h.nrows()) {
        return Err(Error::InvalidDimension("noise covariance shape".into()));
    }
    let w = inv_sqrt_pd(sigma)?;
    let svd = svd_sorted(&(&w * h));
    let v_tilde = svd.v.columns(0, gamma).clone_owned();
    let decoder = svd.u.columns(0, gamma).adjoint() * w;
    Ok((v_tilde, decoder, svd.s[..gamma].to_vec()))
}

/// `Θ_n`: the `Γ` largest eigenvalues of `H^H Σ^{-1} H`, descending, floored at 1e-12.
pub fn rate_weights<T: Real>(h: &CMat<T>, sigma: &CMat<T>, gamma: usize) -> Result<Vec<T>> {
    let s_inv = inverse(sigma)?;
    let (vals, _) = herm_eig(&(h.adjoint() * s_inv * h));
    if gamma > vals.len() {
        return Err(Error::InvalidDimension("more streams than transmit antennas".into()));
    }
    Ok(vals[..gamma].iter().map(|&v| v.max(T::lit(1e-12))).collect())
}

/// General linear MMSE receiver `U = (HV)^H (H V V^H H^H + Σ)^{-1}`.
pub fn mmse_receiver<T: Real>(h: &CMat<T>, sigma: &CMat<T>, v: &CMat<T>) -> Result<CMat<T>> {
    let hv = h * v;
    let cov = &hv * hv.adjoint() + sigma;
    Ok(hv.adjoint() * inverse(&crate::scalar::hermitize(&cov))?)
}

/// Per-stream SINR `|u_k^H H v_k|² / (Σ_{j≠k} |u_k^H H v_j|² + u_k^H Σ u_k)`.
pub fn stream_sinr<T: Real>(h: &CMat<T>, sigma: &CMat<T>, v: &CMat<T>, u: &CMat<T>) -> Vec<T> {
    let e = u * h * v;
    let noise = u * sigma * u.adjoint();
    (0..e.nrows())
        .map(|k| {
            let sig = e[(k, k)].norm_sqr();
            let interf = (0..e.ncols()).filter(|&j| j != k).fold(T::zero(), |a, j| a + e[(k, j)].norm_sqr());
            let den = interf + noise[(k, k)].re;
            if den > T::zero() {
                sig / den
            } else {
                T::zero()
            }
        })
        .collect()
}

/// Amplitude allocation over all eigen-subchannels.
#[derive(Clone, Debug)]
pub struct PowerAllocation<T: Real> {
    /// `p[n][k]`, stream amplitudes.
    pub p: Vec<Vec<T>>,
    /// Multiplier of the source power equality.
    pub mu: T,
    /// Multipliers of `p ≥ 0`.
    pub lambda: Vec<Vec<T>>,
    /// Multiplier of the relay power constraint, when one was imposed.
    pub nu_relay: T,
    /// All gains were zero and the allocation fell back to uniform.
    pub degenerate: bool,
}

impl<T: Real> PowerAllocation<T> {
    pub fn total_power(&self) -> T {
        self.p.iter().flatten().fold(T::zero(), |a, &x| a + x * x)
    }

    fn uniform(shape: &[Vec<T>], p_s: T) -> Self {
        let count: usize = shape.iter().map(|v| v.len()).sum();
        let amp = (p_s / T::lit(count.max(1) as f64)).sqrt();
        Self {
            p: shape.iter().map(|v| vec![amp; v.len()]).collect(),
            mu: T::zero(),
            lambda: shape.iter().map(|v| vec![T::zero(); v.len()]).collect(),
            nu_relay: T::zero(),
            degenerate: true,
        }
    }
}

fn all_zero<T: Real>(d: &[Vec<T>]) -> bool {
    d.iter().flatten().all(|&x| x <= T::zero())
}

/// Bisects a decreasing function `f` on `[lo, hi]` for `f(x) = target`,
/// stepping geometrically when the bracket spans several decades.
fn bisect_decreasing<T: Real>(mut lo: T, mut hi: T, target: T, rel_tol: T, f: impl Fn(T) -> T) -> T {
    for _ in 0..400 {
        let mid = if lo > T::zero() && hi / lo > T::lit(4.0) { (lo * hi).sqrt() } else { (lo + hi) / T::lit(2.0) };
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if (v - target).abs() <= rel_tol * target.abs() {
            return mid;
        }
        if v > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::lit(2.0)
}

/// Weighted-MSE allocation `p = θd/(θd² + μ)` with `Σ p² = P`.
pub fn allocate_power_mse<T: Real>(theta: &[Vec<T>], d: &[Vec<T>], p_s: T) -> PowerAllocation<T> {
    if all_zero(d) {
        return PowerAllocation::uniform(d, p_s);
    }
    let pairs: Vec<(T, T)> = theta
        .iter()
        .flatten()
        .zip(d.iter().flatten())
        .filter(|(_, &dk)| dk > T::zero())
        .map(|(&th, &dk)| (th, dk))
        .collect();
    let mu_min = -pairs.iter().fold(T::max_value().unwrap(), |a, &(th, dk)| a.min(th * dk * dk));
    // Work in t = μ − μ_min > 0 so small denominators keep full precision.
    let g = |t: T| {
        pairs.iter().fold(T::zero(), |acc, &(th, dk)| {
            let den = th * dk * dk + mu_min + t;
            let p = th * dk / den;
            acc + p * p
        })
    };
    let mut hi = T::one().max(-mu_min);
    while g(hi) > p_s {
        hi *= T::lit(2.0);
    }
    let mut lo = hi;
    while g(lo) < p_s && lo > T::eps() * T::eps() * (T::one() + mu_min.abs()) {
        lo /= T::lit(2.0);
    }
    let t = bisect_decreasing(lo, hi, p_s, T::lit(1e-13), g);
    let mu = mu_min + t;
    let mut p = Vec::with_capacity(d.len());
    let mut lambda = Vec::with_capacity(d.len());
    for (th_n, d_n) in theta.iter().zip(d) {
        let mut pn = Vec::with_capacity(d_n.len());
        let mut ln = Vec::with_capacity(d_n.len());
        for (&th, &dk) in th_n.iter().zip(d_n) {
            let pk = if dk > T::zero() { (th * dk / (th * dk * dk + mu_min + t)).max(T::zero()) } else { T::zero() };
            pn.push(pk);
            let lam = T::lit(2.0) * (th * dk * dk + mu) * pk - T::lit(2.0) * th * dk;
            ln.push(lam.max(T::zero()));
        }
        p.push(pn);
        lambda.push(ln);
    }
    PowerAllocation { p, mu, lambda, nu_relay: T::zero(), degenerate: false }
}

/// Weighted-MSE allocation objective `Σ θ (d²p² − 2dp + c)`.
pub fn mse_allocation_objective<T: Real>(theta: &[Vec<T>], d: &[Vec<T>], c: &[Vec<T>], p: &[Vec<T>]) -> T {
    let mut acc = T::zero();
    for n in 0..d.len() {
        for k in 0..d[n].len() {
            let (th, dk, pk) = (theta[n][k], d[n][k], p[n][k]);
            acc += th * (dk * dk * pk * pk - T::lit(2.0) * dk * pk + c[n][k]);
        }
    }
    acc
}

/// Worst KKT residuals for the weighted-MSE allocation.
#[derive(Clone, Copy, Debug)]
pub struct KktReport<T> {
    pub primal: T,
    pub dual: T,
    pub slackness: T,
    pub stationarity: T,
}

pub fn kkt_report_mse<T: Real>(theta: &[Vec<T>], d: &[Vec<T>], p_s: T, alloc: &PowerAllocation<T>) -> KktReport<T> {
    let primal = (alloc.total_power() - p_s).abs() / p_s;
    let (mut dual, mut slack, mut stat) = (T::zero(), T::zero(), T::zero());
    for n in 0..d.len() {
        for k in 0..d[n].len() {
            let (th, dk, pk, lam) = (theta[n][k], d[n][k], alloc.p[n][k], alloc.lambda[n][k]);
            dual = dual.max((-lam).max(T::zero())).max((-pk).max(T::zero()));
            slack = slack.max((lam * pk).abs());
            let s = T::lit(2.0) * th * dk * dk * pk - T::lit(2.0) * th * dk + T::lit(2.0) * alloc.mu * pk - lam;
            stat = stat.max(s.abs());
        }
    }
    KktReport { primal, dual, slackness: slack, stationarity: stat }
}

/// Classical water-filling `p² = (1/ν − 1/d²)₊` with `Σ p² = P`.
pub fn allocate_power_rate<T: Real>(d: &[Vec<T>], p_s: T) -> PowerAllocation<T> {
    if all_zero(d) {
        return PowerAllocation::uniform(d, p_s);
    }
    let mut inv: Vec<T> = d.iter().flatten().filter(|&&x| x > T::zero()).map(|&x| T::one() / (x * x)).collect();
    inv.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut level = T::zero();
    let mut sum = T::zero();
    for (k, &iv) in inv.iter().enumerate() {
        sum += iv;
        let cand = (p_s + sum) / T::lit((k + 1) as f64);
        if k + 1 == inv.len() || cand <= inv[k + 1] {
            level = cand;
            break;
        }
    }
    let p = d
        .iter()
        .map(|dn| dn.iter().map(|&x| if x > T::zero() { (level - T::one() / (x * x)).max(T::zero()).sqrt() } else { T::zero() }).collect())
        .collect();
    PowerAllocation { p, mu: T::one() / level, lambda: d.iter().map(|v| vec![T::zero(); v.len()]).collect(), nu_relay: T::zero(), degenerate: false }
}

/// Water-filling with an extra linear relay budget `Σ a x ≤ b` on the
/// stream powers `x = p²`: `x = (1/(μ + ν a) − 1/d²)₊`. The source budget
/// stays an equality while the relay budget is slack.
pub fn allocate_power_rate_relay<T: Real>(d: &[Vec<T>], a: &[Vec<T>], b: T, p_s: T) -> PowerAllocation<T> {
    let plain = allocate_power_rate(d, p_s);
    let load = plain.p.iter().flatten().zip(a.iter().flatten()).fold(T::zero(), |s, (&p, &ak)| s + ak * p * p);
    if plain.degenerate || load <= b {
        return plain;
    }
    let g: Vec<T> = d.iter().flatten().map(|&x| x * x).collect();
    let af: Vec<T> = a.iter().flatten().copied().collect();
    let (x, mu, nu) = two_budget_allocation(&af, b.max(T::zero()), p_s, |i, lam| {
        if g[i] > T::zero() {
            T::one() / lam - T::one() / g[i]
        } else {
            T::zero()
        }
    });
    let mut it = x.into_iter();
    let p = d.iter().map(|dn| dn.iter().map(|_| it.next().unwrap_or_else(T::zero).sqrt()).collect()).collect();
    PowerAllocation { p, mu, lambda: d.iter().map(|v| vec![T::zero(); v.len()]).collect(), nu_relay: nu, degenerate: false }
}

/// Stream powers under a source budget `Σ x ≤ P` and a relay budget
/// `Σ a x ≤ b`, where `response(i, λ)` is the optimal power of stream `i`
/// at price `λ = μ + ν a_i` (nonincreasing in `λ`, unbounded as `λ → 0`).
/// The source budget is met with equality while the relay budget is slack.
fn two_budget_allocation<T: Real>(a: &[T], b: T, p_s: T, response: impl Fn(usize, T) -> T) -> (Vec<T>, T, T) {
    let m = a.len();
    let powers = |mu: T, nu: T| -> Vec<T> {
        (0..m)
            .map(|i| {
                let lam = mu + nu * a[i];
                if lam > T::zero() {
                    response(i, lam).max(T::zero())
                } else {
                    T::zero()
                }
            })
            .collect()
    };
    let sum = |x: &[T]| x.iter().fold(T::zero(), |s, &v| s + v);
    let load = |x: &[T]| x.iter().zip(a).fold(T::zero(), |s, (&v, &ak)| s + v * ak);
    // Smallest μ ≥ 0 meeting the source budget for a given ν.
    let mu_for = |nu: T| -> T {
        let finite = a.iter().all(|&ak| ak * nu > T::zero());
        if finite && sum(&powers(T::zero(), nu)) <= p_s {
            return T::zero();
        }
        let mut hi = T::one();
        while sum(&powers(hi, nu)) > p_s {
            hi *= T::lit(2.0);
        }
        let mut lo = hi;
        while lo > T::eps() * T::eps() && sum(&powers(lo, nu)) < p_s {
            lo /= T::lit(2.0);
        }
        bisect_decreasing(lo, hi, p_s, T::lit(1e-13), |mu| sum(&powers(mu, nu)))
    };
    let mu0 = mu_for(T::zero());
    let x0 = powers(mu0, T::zero());
    if load(&x0) <= b {
        return (x0, mu0, T::zero());
    }
    let load_at = |nu: T| load(&powers(mu_for(nu), nu));
    let mut hi = T::one();
    for _ in 0..200 {
        if load_at(hi) <= b {
            break;
        }
        hi *= T::lit(2.0);
    }
    let mut lo = hi;
    while lo > T::lit(1e-30) && load_at(lo) <= b {
        lo /= T::lit(2.0);
    }
    let mut nu = bisect_decreasing(lo, hi, b.max(T::eps()), T::lit(1e-12), load_at);
    while load_at(nu) > b * (T::one() + T::lit(1e-10)) {
        nu *= T::one() + T::lit(1e-9);
    }
    let mu = mu_for(nu);
    (powers(mu, nu), mu, nu)
}

/// Sum of `log2(1 + d²p²)`.
pub fn sum_rate_bits<T: Real>(d: &[Vec<T>], p: &[Vec<T>]) -> T {
    let mut acc = T::zero();
    for n in 0..d.len() {
        for k in 0..d[n].len() {
            acc += (T::one() + d[n][k] * d[n][k] * p[n][k] * p[n][k]).log2();
        }
    }
    acc
}

/// Stream powers `x` minimizing `Σ θ_k / (1 + g_k x_k)` with `Σ x = P`,
/// i.e. `x = ((√(θg/ν) − 1)/g)₊`. Returned as amplitudes `√x`.
pub fn subcarrier_mmse_powers<T: Real>(theta: &[T], d: &[T], p_n: T) -> Vec<T> {
    let g: Vec<T> = d.iter().map(|&x| x * x).collect();
    if g.iter().all(|&x| x <= T::zero()) || p_n <= T::zero() {
        let amp = (p_n.max(T::zero()) / T::lit(d.len() as f64)).sqrt();
        return vec![amp; d.len()];
    }
    let xs = |s: T| -> Vec<T> {
        // s = 1/√ν so that the total is increasing in s.
        theta
            .iter()
            .zip(&g)
            .map(|(&th, &gk)| if gk > T::zero() { (((th * gk).sqrt() * s - T::one()) / gk).max(T::zero()) } else { T::zero() })
            .collect()
    };
    let total = |s: T| xs(s).iter().fold(T::zero(), |a, &b| a + b);
    let mut hi = T::one();
    while total(hi) < p_n {
        hi *= T::lit(2.0);
    }
    let lo = T::zero();
    // total(s) is increasing; bisect on its negation.
    let s = bisect_decreasing(lo, hi, -p_n, T::lit(1e-14), |s| -total(s));
    let s = if s == T::zero() { hi } else { s };
    let x = xs(s);
    let sum = x.iter().fold(T::zero(), |a, &b| a + b);
    let fix = if sum > T::zero() { p_n / sum } else { T::one() };
    x.iter().map(|&v| (v * fix).sqrt()).collect()
}

/// Per-stream MMSE scaling `β = φd / (1 + d²φ²)` of the whitening decoder.
pub fn mmse_scaling<T: Real>(d: &[T], phi: &[T]) -> Vec<T> {
    d.iter().zip(phi).map(|(&dk, &pk)| pk * dk / (T::one() + dk * dk * pk * pk)).collect()
}

/// Applies per-stream scaling to a decoder's rows.
pub fn scale_rows<T: Real>(m: &CMat<T>, s: &[T]) -> CMat<T> {
    let mut out = m.clone();
    for (k, &v) in s.iter().enumerate() {
        for z in out.row_mut(k).iter_mut() {
            *z *= cr(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use crate::scalar::{fro, hermitize};
    use crate::sysmodel::random_cn_matrix;

    #[test]
    fn identity_channel_design() {
        let i2 = CMat::<f64>::identity(2, 2);
        let (v, u, d) = design_transceiver(&i2, &i2, 2).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-12 && (d[1] - 1.0).abs() < 1e-12);
        assert!(fro(&(v.adjoint() * &v - &i2)) < 1e-12);
        assert!(fro(&(u.adjoint() * &u - &i2)) < 1e-12);
    }

    #[test]
    fn dominant_mode_design() {
        let h = cdiag::<f64>(&[2.0, 1.0]);
        let (v, _, d) = design_transceiver(&h, &CMat::identity(2, 2), 1).unwrap();
        assert!((d[0] - 2.0).abs() < 1e-12);
        assert!((v[(0, 0)] - cr(1.0)).norm() < 1e-12 && v[(1, 0)].norm() < 1e-12);
    }

    #[test]
    fn random_design_invariants() {
        let mut rng = sample::rng(3);
        for _ in 0..20 {
            let h = random_cn_matrix::<f64>(&mut rng, 3, 2, 1.0);
            let a = random_cn_matrix::<f64>(&mut rng, 3, 3, 1.0);
            let sigma = hermitize(&(&a * a.adjoint() + CMat::identity(3, 3)));
            let (v, u, d) = design_transceiver(&h, &sigma, 2).unwrap();
            assert!(fro(&(v.adjoint() * &v - CMat::identity(2, 2))) < 1e-10);
            assert!(d[0] >= d[1] && d[1] >= 0.0);
            assert!(fro(&(&u * &h * &v - cdiag(&d))) < 1e-8);
            assert!(fro(&(&u * &sigma * u.adjoint() - CMat::identity(2, 2))) < 1e-8);
            let th = rate_weights(&h, &sigma, 2).unwrap();
            for k in 0..2 {
                assert!((th[k] - d[k] * d[k]).abs() < 1e-9 * (1.0 + th[k]));
            }
        }
    }

    #[test]
    fn rate_weight_examples() {
        let i2 = CMat::<f64>::identity(2, 2);
        assert_eq!(rate_weights(&i2, &i2, 2).unwrap().iter().map(|x| (x * 1e9).round()).collect::<Vec<_>>(), vec![1e9, 1e9]);
        let th = rate_weights(&cdiag::<f64>(&[2.0, 1.0]), &i2, 2).unwrap();
        assert!((th[0] - 4.0).abs() < 1e-12 && (th[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mse_allocation_examples() {
        let a = allocate_power_mse::<f64>(&[vec![1.0]], &[vec![1.0]], 1.0);
        assert!((a.p[0][0] - 1.0).abs() < 1e-10 && a.mu.abs() < 1e-9);
        let a = allocate_power_mse::<f64>(&[vec![1.0, 1.0]], &[vec![1.0, 0.0]], 1.0);
        assert!((a.p[0][0] - 1.0).abs() < 1e-10 && a.p[0][1] == 0.0);
        let z = allocate_power_mse::<f64>(&[vec![1.0, 1.0]], &[vec![0.0, 0.0]], 2.0);
        assert!(z.degenerate && (z.p[0][0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn water_filling_examples() {
        let a = allocate_power_rate::<f64>(&[vec![1.0]], 3.0);
        assert!((a.p[0][0].powi(2) - 3.0).abs() < 1e-12);
        assert!((sum_rate_bits::<f64>(&[vec![1.0]], &a.p) - 2.0).abs() < 1e-12);
        let a = allocate_power_rate::<f64>(&[vec![1.0, 1.0]], 2.0);
        assert!((a.p[0][0].powi(2) - 1.0).abs() < 1e-12 && (a.p[0][1].powi(2) - 1.0).abs() < 1e-12);
        let a = allocate_power_rate::<f64>(&[vec![2.0, 1.0]], 1.0);
        assert!((a.p[0][0].powi(2) - 7.0 / 8.0).abs() < 1e-12 && (a.p[0][1].powi(2) - 1.0 / 8.0).abs() < 1e-12);
        let a = allocate_power_rate::<f64>(&[vec![3.0, 0.1]], 1.0);
        assert_eq!(a.p[0][1], 0.0);
    }

    #[test]
    fn relay_aware_water_filling_respects_both_budgets() {
        let d = vec![vec![2.0, 1.0], vec![1.5, 0.5]];
        let a = vec![vec![4.0, 0.5], vec![1.0, 2.0]];
        let free = allocate_power_rate(&d, 4.0);
        let load = |p: &[Vec<f64>]| (0..2).flat_map(|n| (0..2).map(move |k| (n, k))).map(|(n, k)| a[n][k] * p[n][k] * p[n][k]).sum::<f64>();
        let b = 0.5 * load(&free.p);
        let al = allocate_power_rate_relay(&d, &a, b, 4.0);
        assert!(load(&al.p) <= b * (1.0 + 1e-9));
        assert!(al.total_power() <= 4.0 * (1.0 + 1e-9));
        assert!(al.nu_relay > 0.0);
        let same = allocate_power_rate_relay(&d, &a, 10.0 * load(&free.p), 4.0);
        assert_eq!(same.p, free.p);
    }

    #[test]
    fn subcarrier_mmse_powers_use_budget() {
        let phi = subcarrier_mmse_powers(&[1.0, 1.0], &[2.0, 0.5], 3.0);
        assert!((phi.iter().map(|x| x * x).sum::<f64>() - 3.0).abs() < 1e-10);
        // Objective no worse than nearby feasible splits.
        let obj = |x0: f64| 1.0 / (1.0 + 4.0 * x0) + 1.0 / (1.0 + 0.25 * (3.0 - x0));
        let best = obj(phi[0] * phi[0]);
        for k in 0..=300 {
            assert!(best <= obj(k as f64 * 0.01) + 1e-12);
        }
    }

    #[test]
    fn sinr_of_diagonal_design_is_d2p2() {
        let mut rng = sample::rng(8);
        let h = random_cn_matrix::<f64>(&mut rng, 2, 2, 1.0);
        let sigma = CMat::identity(2, 2);
        let (v, u, d) = design_transceiver(&h, &sigma, 2).unwrap();
        let p = [1.3, 0.4];
        let s = stream_sinr(&h, &sigma, &(&v * cdiag(&p)), &u);
        for k in 0..2 {
            assert!((s[k] - d[k] * d[k] * p[k] * p[k]).abs() < 1e-10);
        }
    }
}
