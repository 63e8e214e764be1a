//! Quadratic forms of the weighted MSE and relay power in the tap vector `r`.
//!
//! For fixed precoders `V_n`, receivers `U_n` and weights `Θ_n` the weighted
//! MSE of subcarrier `n` is `r^H Q_n r − r^H q_n − q_n^H r + z_n` with
//! `Q_n = Q_{1,n} + Q_{2,n}` and `z_n = c_n + tr Θ_n`, and the relay transmit
//! power is `r^H Π̃ r`.
//!
//! The production assembly sums over tap-index pairs directly. The literal
//! Kronecker/selection-matrix construction lives in [`reference`] and the two
//! are kept in agreement by tests.

use crate::error::{dim_err, Error, Result};
use crate::linalg::{block, kron};
use crate::scalar::{cdiag, cr, czeros, fro2, hermitize, tr_re, CMat, CVec, Real};
use crate::sysmodel::{ChainMatrices, ChannelRealization, RelayFilter, SystemConfig};

/// Diagonal positive weights `Θ_n`, stored as their diagonals.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrices<T: Real> {
    pub diag: Vec<Vec<T>>,
}

impl<T: Real> WeightMatrices<T> {
    pub fn identity(n: usize, gamma: usize) -> Self {
        Self { diag: vec![vec![T::one(); gamma]; n] }
    }

    pub fn new(diag: Vec<Vec<T>>) -> Result<Self> {
        if diag.iter().flatten().any(|&v| !(v > T::zero())) {
            return Err(Error::Precondition("weights must be positive".into()));
        }
        Ok(Self { diag })
    }

    pub fn theta(&self, n: usize) -> CMat<T> {
        cdiag(&self.diag[n])
    }

    pub fn theta_sqrt(&self, n: usize) -> CMat<T> {
        let s: Vec<T> = self.diag[n].iter().map(|v| v.sqrt()).collect();
        cdiag(&s)
    }

    pub fn trace(&self, n: usize) -> T {
        self.diag[n].iter().fold(T::zero(), |a, &b| a + b)
    }

    pub fn check(&self, cfg: &SystemConfig<T>) -> Result<()> {
        if self.diag.len() != cfg.n || self.diag.iter().any(|d| d.len() != cfg.gamma) {
            return dim_err("weight matrices do not match N × Γ");
        }
        Ok(())
    }
}

/// Complete data of the relay subproblem.
#[derive(Clone, Debug)]
pub struct QcqpInstance<T: Real> {
    pub q_mat: CMat<T>,
    pub q: CVec<T>,
    pub z: T,
    pub pi: CMat<T>,
    pub p_r_max: T,
}

/// Per-subcarrier pieces of the weighted MSE quadratic.
#[derive(Clone, Debug)]
pub struct QuadParts<T: Real> {
    pub q1: Vec<CMat<T>>,
    pub q2: Vec<CMat<T>>,
    pub c: Vec<T>,
    pub qv: Vec<CVec<T>>,
    pub z: Vec<T>,
}

fn check_tx<T: Real>(cfg: &SystemConfig<T>, v: &[CMat<T>], u: &[CMat<T>]) -> Result<()> {
    if v.len() != cfg.n || v.iter().any(|m| m.shape() != (cfg.n_t, cfg.gamma)) {
        return dim_err("precoders must be N matrices of size N_t × Γ");
    }
    if u.len() != cfg.n || u.iter().any(|m| m.shape() != (cfg.gamma, cfg.n_r)) {
        return dim_err("receivers must be N matrices of size Γ × N_r");
    }
    Ok(())
}

/// Coefficient matrices `C_m` (vectorized as columns) with
/// `Θ^{1/2} U_n H_n V_n = Σ_m r_m C_m`.
fn signal_coefficients<T: Real>(
    cfg: &SystemConfig<T>,
    chain: &ChainMatrices<T>,
    n: usize,
    v: &CMat<T>,
    u: &CMat<T>,
    theta: &WeightMatrices<T>,
) -> CMat<T> {
    let (mt, mr, g) = (cfg.m_t, cfg.m_r, cfg.gamma);
    let a_full = theta.theta_sqrt(n) * u * &chain.g_tilde;
    let x_full = &chain.b_n[n] * v;
    let mut cm = czeros(g * g, cfg.relay_dim());
    for j in 0..cfg.l_r {
        for a in 0..mt {
            for b in 0..mr {
                let m = crate::blockmat::relay_index(cfg.l_r, mr, j, a, b);
                let mut c = czeros(g, g);
                for i in 0..cfg.l_g {
                    let acol = a_full.column(i * mt + a);
                    let xrow = x_full.row((i + j) * mr + b);
                    c += acol * xrow;
                }
                cm.set_column(m, &CVec::from_iterator(g * g, c.iter().copied()));
            }
        }
    }
    cm
}

/// `Q_{1,n}` for every subcarrier.
pub fn assemble_q1<T: Real>(
    cfg: &SystemConfig<T>,
    chain: &ChainMatrices<T>,
    v: &[CMat<T>],
    u: &[CMat<T>],
    theta: &WeightMatrices<T>,
) -> Result<Vec<CMat<T>>> {
    check_tx(cfg, v, u)?;
    theta.check(cfg)?;
    Ok((0..cfg.n)
        .map(|n| {
            let cm = signal_coefficients(cfg, chain, n, &v[n], &u[n], theta);
            hermitize(&(cm.adjoint() * &cm))
        })
        .collect())
}

/// `q_n` for every subcarrier.
pub fn assemble_q<T: Real>(
    cfg: &SystemConfig<T>,
    chain: &ChainMatrices<T>,
    v: &[CMat<T>],
    u: &[CMat<T>],
    theta: &WeightMatrices<T>,
) -> Result<Vec<CVec<T>>> {
    check_tx(cfg, v, u)?;
    theta.check(cfg)?;
    Ok((0..cfg.n)
        .map(|n| {
            let cm = signal_coefficients(cfg, chain, n, &v[n], &u[n], theta);
            let target = crate::linalg::vec_of(&theta.theta_sqrt(n));
            cm.adjoint() * target
        })
        .collect())
}

/// Tap-pair Gram form: `out(m, m') = σ² δ_{bb'} Σ_i M[(i, a), (i+j-j', a')]`
/// over valid `i`, where `M = Ψ^H Ψ` is over `J_out` blocks of width `M_t`.
fn noise_gram<T: Real>(cfg: &SystemConfig<T>, m: &CMat<T>, scale: T) -> CMat<T> {
    let (mt, mr, lr) = (cfg.m_t, cfg.m_r, cfg.l_r);
    let jout = cfg.relay_out_blocks() as isize;
    let mut out = czeros(cfg.relay_dim(), cfg.relay_dim());
    for j in 0..lr {
        for jp in 0..lr {
            let shift = j as isize - jp as isize;
            for a in 0..mt {
                for ap in 0..mt {
                    let mut acc = cr(T::zero());
                    for i in 0..jout {
                        let ip = i + shift;
                        if ip < 0 || ip >= jout {
                            continue;
                        }
                        acc += m[(i as usize * mt + a, ip as usize * mt + ap)];
                    }
                    for b in 0..mr {
                        let row = crate::blockmat::relay_index(lr, mr, j, a, b);
                        let col = crate::blockmat::relay_index(lr, mr, jp, ap, b);
                        out[(row, col)] = acc * cr(scale);
                    }
                }
            }
        }
    }
    out
}

/// `Q_{2,n}` and `c_n = σ_d² tr(Θ_n U_n U_n^H)` for every subcarrier.
pub fn assemble_q2_c<T: Real>(
    cfg: &SystemConfig<T>,
    chain: &ChainMatrices<T>,
    u: &[CMat<T>],
    theta: &WeightMatrices<T>,
) -> Result<(Vec<CMat<T>>, Vec<T>)> {
    if u.len() != cfg.n || u.iter().any(|m| m.shape() != (cfg.gamma, cfg.n_r)) {
        return dim_err("receivers must be N matrices of size Γ × N_r");
    }
    theta.check(cfg)?;
    let mut q2 = Vec::with_capacity(cfg.n);
    let mut c = Vec::with_capacity(cfg.n);
    for n in 0..cfg.n {
        let psi = theta.theta_sqrt(n) * &u[n] * &chain.wg_n[n];
        let m = psi.adjoint() * &psi;
        q2.push(hermitize(&noise_gram(cfg, &m, cfg.sigma_r2)));
        c.push(cfg.sigma_d2 * tr_re(&(theta.theta(n) * &u[n] * u[n].adjoint())));
    }
    Ok((q2, c))
}

/// Relay power form `Π̃` with `r^H Π̃ r = E{tr(y_t y_t^H)}`.
pub fn assemble_power_form<T: Real>(cfg: &SystemConfig<T>, chain: &ChainMatrices<T>, v: &[CMat<T>]) -> Result<CMat<T>> {
    if v.len() != cfg.n || v.iter().any(|m| m.shape() != (cfg.n_t, cfg.gamma)) {
        return dim_err("precoders must be N matrices of size N_t × Γ");
    }
    let (mt, mr, lr) = (cfg.m_t, cfg.m_r, cfg.l_r);
    let rows = cfg.relay_in_blocks() * mr;
    let mut y = czeros(rows, rows);
    for n in 0..cfg.n {
        let x = &chain.x_n[n] * &v[n];
        y += &x * x.adjoint();
    }
    let jout = cfg.relay_out_blocks();
    let mut pi = czeros(cfg.relay_dim(), cfg.relay_dim());
    for j in 0..lr {
        for jp in 0..lr {
            for b in 0..mr {
                for bp in 0..mr {
                    let mut acc = cr(T::zero());
                    for i in 0..jout {
                        acc += y[((i + jp) * mr + bp, (i + j) * mr + b)];
                    }
                    for a in 0..mt {
                        let row = crate::blockmat::relay_index(lr, mr, j, a, b);
                        let col = crate::blockmat::relay_index(lr, mr, jp, a, bp);
                        pi[(row, col)] = acc;
                    }
                }
            }
        }
    }
    let noise = cr(cfg.sigma_r2 * T::lit(jout as f64));
    for k in 0..cfg.relay_dim() {
        pi[(k, k)] += noise;
    }
    Ok(hermitize(&pi))
}

/// All per-subcarrier pieces at once.
pub fn assemble_parts<T: Real>(
    cfg: &SystemConfig<T>,
    chain: &ChainMatrices<T>,
    v: &[CMat<T>],
    u: &[CMat<T>],
    theta: &WeightMatrices<T>,
) -> Result<QuadParts<T>> {
    check_tx(cfg, v, u)?;
    theta.check(cfg)?;
    let mut q1 = Vec::with_capacity(cfg.n);
    let mut qv = Vec::with_capacity(cfg.n);
    for n in 0..cfg.n {
        let cm = signal_coefficients(cfg, chain, n, &v[n], &u[n], theta);
        q1.push(hermitize(&(cm.adjoint() * &cm)));
        qv.push(cm.adjoint() * crate::linalg::vec_of(&theta.theta_sqrt(n)));
    }
    let (q2, c) = assemble_q2_c(cfg, chain, u, theta)?;
    let z = (0..cfg.n).map(|n| c[n] + theta.trace(n)).collect();
    Ok(QuadParts { q1, q2, c, qv, z })
}

impl<T: Real> QuadParts<T> {
    /// `Q_n = Q_{1,n} + Q_{2,n}`.
    pub fn q_n(&self, n: usize) -> CMat<T> {
        &self.q1[n] + &self.q2[n]
    }

    /// Sums the pieces into the relay subproblem.
    pub fn instance(&self, pi: CMat<T>, p_r_max: T) -> QcqpInstance<T> {
        let dim = pi.nrows();
        let mut q_mat = czeros(dim, dim);
        let mut q = CVec::<T>::zeros(dim);
        let mut z = T::zero();
        for n in 0..self.q1.len() {
            q_mat += &self.q1[n];
            q_mat += &self.q2[n];
            q += &self.qv[n];
            z += self.z[n];
        }
        QcqpInstance { q_mat: hermitize(&q_mat), q, z, pi, p_r_max }
    }
}

/// Assembles the relay subproblem for fixed transceivers.
pub fn assemble_instance<T: Real>(
    cfg: &SystemConfig<T>,
    chain: &ChainMatrices<T>,
    v: &[CMat<T>],
    u: &[CMat<T>],
    theta: &WeightMatrices<T>,
) -> Result<QcqpInstance<T>> {
    let parts = assemble_parts(cfg, chain, v, u, theta)?;
    let pi = assemble_power_form(cfg, chain, v)?;
    Ok(parts.instance(pi, cfg.p_r_max))
}

/// Weighted MSE per subcarrier and summed, from the quadratic pieces.
pub fn weighted_mse_quadratic<T: Real>(parts: &QuadParts<T>, r: &CVec<T>) -> Result<(Vec<T>, T)> {
    let mut per = Vec::with_capacity(parts.q1.len());
    for n in 0..parts.q1.len() {
        let quad = r.dotc(&(parts.q_n(n) * r));
        let cross = r.dotc(&parts.qv[n]);
        let val = quad - cross - cross.conj() + cr(parts.z[n]);
        let scale = T::one() + val.re.abs();
        if val.im.abs() > T::lit(1e-9) * scale {
            return Err(Error::NumericalConsistency(format!(
                "weighted MSE has imaginary residue {}",
                val.im
            )));
        }
        per.push(val.re);
    }
    let total = per.iter().fold(T::zero(), |a, &b| a + b);
    Ok((per, total))
}

/// Evaluates the instance objective `r^H Q r − 2 Re(q^H r) + z`.
pub fn instance_objective<T: Real>(inst: &QcqpInstance<T>, r: &CVec<T>) -> T {
    let quad = r.dotc(&(&inst.q_mat * r)).re;
    quad - T::lit(2.0) * inst.q.dotc(r).re + inst.z
}

/// Relay power `r^H Π̃ r`.
pub fn power_of<T: Real>(pi: &CMat<T>, r: &CVec<T>) -> T {
    r.dotc(&(pi * r)).re
}

/// Literal frequency-domain chain for a whole OFDM symbol.
struct FullChain<T: Real> {
    /// `(W^H ⊗ I) G R F W_in T_cp (W ⊗ I) V_blk`: `N N_r × N Γ`.
    signal: CMat<T>,
    /// Covariance of the destination noise after the DFT.
    noise: CMat<T>,
    /// `R F W_in T_cp (W ⊗ I) V_blk`, the relay output signal map.
    relay_signal: CMat<T>,
    relay_toeplitz: CMat<T>,
}

fn stacked_precoder<T: Real>(cfg: &SystemConfig<T>, v: &[CMat<T>]) -> CMat<T> {
    let mut vb = czeros(cfg.n * cfg.n_t, cfg.n * cfg.gamma);
    for (n, vn) in v.iter().enumerate() {
        let a = cfg.n - 1 - n;
        vb.view_mut((a * cfg.n_t, a * cfg.gamma), vn.shape()).copy_from(vn);
    }
    vb
}

fn full_chain<T: Real>(
    cfg: &SystemConfig<T>,
    ch: &ChannelRealization<T>,
    relay: &RelayFilter<T>,
    v: &[CMat<T>],
) -> Result<FullChain<T>> {
    let chain = ChainMatrices::new(cfg, ch)?;
    relay.check(cfg)?;
    let r = relay.toeplitz(cfg)?;
    let w_t = kron(&chain.w, &CMat::<T>::identity(cfg.n_t, cfg.n_t));
    let w_r = kron(&chain.w, &CMat::<T>::identity(cfg.n_r, cfg.n_r));
    let relay_signal = &r * &chain.ft_cp * w_t * stacked_precoder(cfg, v);
    let signal = w_r.adjoint() * &chain.g * &relay_signal;
    let wgr = w_r.adjoint() * &chain.g * &r;
    let eye = CMat::<T>::identity(cfg.n * cfg.n_r, cfg.n * cfg.n_r);
    let noise = &wgr * wgr.adjoint() * cr(cfg.sigma_r2) + eye * cr(cfg.sigma_d2);
    Ok(FullChain { signal, noise, relay_signal, relay_toeplitz: r })
}

/// Weighted MSE `tr(Θ_n M_n)` per subcarrier straight from the full chain.
pub fn weighted_mse_direct<T: Real>(
    cfg: &SystemConfig<T>,
    ch: &ChannelRealization<T>,
    relay: &RelayFilter<T>,
    v: &[CMat<T>],
    u: &[CMat<T>],
    theta: &WeightMatrices<T>,
) -> Result<Vec<T>> {
    check_tx(cfg, v, u)?;
    theta.check(cfg)?;
    let fc = full_chain(cfg, ch, relay, v)?;
    let (nr, g) = (cfg.n_r, cfg.gamma);
    Ok((0..cfg.n)
        .map(|n| {
            let a = cfg.n - 1 - n;
            let d_row = fc.signal.rows(a * nr, nr).clone_owned();
            let d_own = block(&fc.signal, a * nr, a * g, nr, g);
            let noise = block(&fc.noise, a * nr, a * nr, nr, nr);
            let un = &u[n];
            // E{ŝŝ^H} − E{ŝs^H} − E{sŝ^H} + E{ss^H}, noise included in the first.
            let s_hat = un * &d_row * d_row.adjoint() * un.adjoint() + un * noise * un.adjoint();
            let cross = un * d_own;
            let m = s_hat - &cross - cross.adjoint() + CMat::<T>::identity(g, g);
            tr_re(&(theta.theta(n) * m))
        })
        .collect())
}

/// `E{tr(y_t y_t^H)}` from the full chain.
pub fn relay_power_direct<T: Real>(
    cfg: &SystemConfig<T>,
    ch: &ChannelRealization<T>,
    relay: &RelayFilter<T>,
    v: &[CMat<T>],
) -> Result<T> {
    let fc = full_chain(cfg, ch, relay, v)?;
    Ok(fro2(&fc.relay_signal) + cfg.sigma_r2 * fro2(&fc.relay_toeplitz))
}

/// Relay power from precomputed chain matrices, without building `Π̃`.
pub fn relay_power<T: Real>(
    cfg: &SystemConfig<T>,
    chain: &ChainMatrices<T>,
    relay: &RelayFilter<T>,
    v: &[CMat<T>],
) -> Result<T> {
    let r = relay.toeplitz(cfg)?;
    let mut p = cfg.sigma_r2 * fro2(&r);
    for (n, vn) in v.iter().enumerate() {
        p += fro2(&(&r * &chain.x_n[n] * vn));
    }
    Ok(p)
}

/// Literal construction with explicit Kronecker products and selection
/// matrices. Slow; used to certify the production assembly.
pub mod reference {
    use super::*;
    use crate::blockmat::selection_matrices;

    fn i_q<T: Real>(cfg: &SystemConfig<T>) -> CMat<T> {
        let q = cfg.relay_in_blocks() * cfg.m_r;
        CMat::<T>::identity(q, q)
    }

    pub fn assemble_q1<T: Real>(
        cfg: &SystemConfig<T>,
        chain: &ChainMatrices<T>,
        v: &[CMat<T>],
        u: &[CMat<T>],
        theta: &WeightMatrices<T>,
    ) -> Result<Vec<CMat<T>>> {
        check_tx(cfg, v, u)?;
        let sel = selection_matrices(cfg)?;
        let e1t = sel.e1_complex().transpose();
        let big_n = cr(T::lit(cfg.n as f64));
        let iq = i_q(cfg);
        Ok((0..cfg.n)
            .map(|n| {
                let b = &chain.b_n[n] * cr(T::one() / T::lit(cfg.n as f64).sqrt());
                let k = &b * &v[n] * v[n].adjoint() * b.adjoint();
                let k_bar = kron(&CMat::<T>::identity(cfg.gamma, cfg.gamma), &k);
                let left = kron(&(theta.theta_sqrt(n) * &u[n] * &chain.g_tilde), &iq) * &e1t;
                hermitize(&(left.adjoint() * k_bar.conjugate() * &left * big_n))
            })
            .collect())
    }

    pub fn assemble_q2_c<T: Real>(
        cfg: &SystemConfig<T>,
        chain: &ChainMatrices<T>,
        u: &[CMat<T>],
        theta: &WeightMatrices<T>,
    ) -> Result<(Vec<CMat<T>>, Vec<T>)> {
        let sel = selection_matrices(cfg)?;
        let e2 = sel.e2_complex();
        let iq = i_q(cfg);
        let mut q2 = Vec::with_capacity(cfg.n);
        let mut c = Vec::with_capacity(cfg.n);
        for n in 0..cfg.n {
            let wg = &chain.wg_n[n];
            let m = wg.adjoint() * u[n].adjoint() * theta.theta(n) * &u[n] * wg;
            let m_bar = kron(&iq, &m);
            q2.push(hermitize(&(&e2 * m_bar * e2.adjoint() * cr(cfg.sigma_r2))));
            c.push(cfg.sigma_d2 * tr_re(&(theta.theta(n) * &u[n] * u[n].adjoint())));
        }
        Ok((q2, c))
    }

    pub fn assemble_q<T: Real>(
        cfg: &SystemConfig<T>,
        chain: &ChainMatrices<T>,
        v: &[CMat<T>],
        u: &[CMat<T>],
        theta: &WeightMatrices<T>,
    ) -> Result<Vec<CVec<T>>> {
        check_tx(cfg, v, u)?;
        let sel = selection_matrices(cfg)?;
        let e2 = sel.e2_complex();
        // chain.b_n already carries the √N factor.
        Ok((0..cfg.n)
            .map(|n| {
                let y = chain.g_tilde.adjoint() * u[n].adjoint() * theta.theta(n) * v[n].adjoint() * chain.b_n[n].adjoint();
                &e2 * crate::linalg::vec_of(&y)
            })
            .collect())
    }

    pub fn assemble_power_form<T: Real>(cfg: &SystemConfig<T>, chain: &ChainMatrices<T>, v: &[CMat<T>]) -> Result<CMat<T>> {
        let sel = selection_matrices(cfg)?;
        let e1 = sel.e1_complex();
        let w_t = kron(&chain.w, &CMat::<T>::identity(cfg.n_t, cfg.n_t));
        let x = &chain.ft_cp * w_t * stacked_precoder(cfg, v);
        let q = x.nrows();
        let pi = &x * x.adjoint() + CMat::<T>::identity(q, q) * cr(cfg.sigma_r2);
        let jout = cfg.relay_out_blocks() * cfg.m_t;
        let big = kron(&CMat::<T>::identity(jout, jout), &pi).conjugate();
        Ok(hermitize(&(e1.conjugate() * big * e1.transpose())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use crate::scalar::fro;
    use crate::sysmodel::generate_channel;

    fn unit_scalar() -> (SystemConfig<f64>, ChannelRealization<f64>) {
        let mut cfg = SystemConfig::<f64>::scalar(1);
        cfg.sigma_r2 = 0.0;
        let one = CMat::from_element(1, 1, cr(1.0));
        (cfg, ChannelRealization { f_taps: vec![one.clone()], g_taps: vec![one] })
    }

    #[test]
    fn scalar_unit_chain_values() {
        let (cfg, ch) = unit_scalar();
        let chain = ChainMatrices::new(&cfg, &ch).unwrap();
        let one = vec![CMat::from_element(1, 1, cr(1.0))];
        let th = WeightMatrices::identity(1, 1);
        let parts = assemble_parts(&cfg, &chain, &one, &one, &th).unwrap();
        assert!((parts.q1[0][(0, 0)] - cr(1.0)).norm() < 1e-14);
        assert!((parts.qv[0][0] - cr(1.0)).norm() < 1e-14);
        assert_eq!(parts.q2[0][(0, 0)], cr(0.0));
        let r = CVec::from_element(1, cr(1.0));
        let (_, total) = weighted_mse_quadratic(&parts, &r).unwrap();
        assert!((total - cfg.sigma_d2).abs() < 1e-14);
        let (_, at_zero) = weighted_mse_quadratic(&parts, &CVec::zeros(1)).unwrap();
        assert!((at_zero - parts.z[0]).abs() < 1e-14);
    }

    #[test]
    fn zero_precoder_and_receiver_cases() {
        let cfg = SystemConfig::<f64>::reference().with_relay_taps(2);
        let ch = generate_channel(&cfg, 4);
        let chain = ChainMatrices::new(&cfg, &ch).unwrap();
        let mut rng = sample::rng(9);
        let v0 = vec![czeros(cfg.n_t, cfg.gamma); cfg.n];
        let u0 = vec![czeros(cfg.gamma, cfg.n_r); cfg.n];
        let v = sample::precoders(&cfg, &mut rng);
        let u = sample::receivers(&cfg, &mut rng);
        let th = sample::weights(&cfg, &mut rng);
        for q1 in assemble_q1(&cfg, &chain, &v0, &u, &th).unwrap() {
            assert_eq!(fro(&q1), 0.0);
        }
        for q in assemble_q(&cfg, &chain, &v, &u0, &th).unwrap() {
            assert_eq!(q.norm(), 0.0);
        }
        let (q2, c) = assemble_q2_c(&cfg, &chain, &u0, &th).unwrap();
        assert!(q2.iter().all(|m| fro(m) == 0.0) && c.iter().all(|&x| x == 0.0));
        let pi = assemble_power_form(&cfg, &chain, &v0).unwrap();
        let expect = CMat::<f64>::identity(cfg.relay_dim(), cfg.relay_dim()) * cr(cfg.sigma_r2 * cfg.relay_out_blocks() as f64);
        assert!(fro(&(pi - expect)) < 1e-12);
    }

    #[test]
    fn structured_matches_kronecker_reference() {
        let mut rng = sample::rng(21);
        for trial in 0..6 {
            let cfg = if trial == 0 { SystemConfig::<f64>::reference().with_relay_taps(2) } else { sample::small_config(&mut rng) };
            let ch = generate_channel(&cfg, 100 + trial);
            let chain = ChainMatrices::new(&cfg, &ch).unwrap();
            let v = sample::precoders(&cfg, &mut rng);
            let u = sample::receivers(&cfg, &mut rng);
            let th = sample::weights(&cfg, &mut rng);
            let fast = assemble_parts(&cfg, &chain, &v, &u, &th).unwrap();
            let q1 = reference::assemble_q1(&cfg, &chain, &v, &u, &th).unwrap();
            let (q2, c) = reference::assemble_q2_c(&cfg, &chain, &u, &th).unwrap();
            let q = reference::assemble_q(&cfg, &chain, &v, &u, &th).unwrap();
            for n in 0..cfg.n {
                let s = 1.0 + fro(&q1[n]);
                assert!(fro(&(&fast.q1[n] - &q1[n])) <= 1e-10 * s, "Q1 trial {trial} n {n}");
                assert!(fro(&(&fast.q2[n] - &q2[n])) <= 1e-10 * (1.0 + fro(&q2[n])), "Q2 trial {trial}");
                assert!((&fast.qv[n] - &q[n]).norm() <= 1e-10 * (1.0 + q[n].norm()), "q trial {trial}");
                assert!((fast.c[n] - c[n]).abs() <= 1e-10 * (1.0 + c[n]));
            }
            let pi_fast = assemble_power_form(&cfg, &chain, &v).unwrap();
            let pi_ref = reference::assemble_power_form(&cfg, &chain, &v).unwrap();
            assert!(fro(&(&pi_fast - &pi_ref)) <= 1e-10 * fro(&pi_ref), "Pi trial {trial}");
        }
    }

    #[test]
    fn quadratic_matches_direct() {
        let mut rng = sample::rng(5);
        for trial in 0..6 {
            let cfg = if trial == 0 { SystemConfig::<f64>::reference() } else { sample::small_config(&mut rng) };
            let ch = generate_channel(&cfg, 200 + trial);
            let chain = ChainMatrices::new(&cfg, &ch).unwrap();
            let relay = sample::relay(&cfg, &mut rng);
            let v = sample::precoders(&cfg, &mut rng);
            let u = sample::receivers(&cfg, &mut rng);
            let th = sample::weights(&cfg, &mut rng);
            let parts = assemble_parts(&cfg, &chain, &v, &u, &th).unwrap();
            let (quad, _) = weighted_mse_quadratic(&parts, &relay.to_vec()).unwrap();
            let direct = weighted_mse_direct(&cfg, &ch, &relay, &v, &u, &th).unwrap();
            for n in 0..cfg.n {
                assert!((quad[n] - direct[n]).abs() <= 1e-8 * (1.0 + direct[n].abs()), "trial {trial} n {n}: {} vs {}", quad[n], direct[n]);
            }
            let pi = assemble_power_form(&cfg, &chain, &v).unwrap();
            let p_quad = power_of(&pi, &relay.to_vec());
            let p_direct = relay_power_direct(&cfg, &ch, &relay, &v).unwrap();
            let p_fast = relay_power(&cfg, &chain, &relay, &v).unwrap();
            assert!((p_quad - p_direct).abs() <= 1e-8 * p_direct);
            assert!((p_fast - p_direct).abs() <= 1e-8 * p_direct);
        }
    }
}
