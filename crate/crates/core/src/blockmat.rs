//! Block-structured complex matrices.
//!
//! This module holds the pieces of structured algebra the rest of the crate
//! builds on: the unitary DFT matrix, block Toeplitz realization of
//! multichannel FIR filters, block-circulant diagonalization, and the 0/1
//! selection matrices that move between the relay tap vector and the
//! vectorized block Toeplitz relay matrix.
//!
//! # Conventions
//!
//! Per-subcarrier lists are indexed `n = 0..N-1` in ascending order. Stacked
//! time/frequency vectors follow the `[x_{N-1}; ...; x_0]` layout, so
//! subcarrier `n` lives at block position `N-1-n` of any block-diagonal
//! frequency-domain matrix and uses DFT column `w_n = W[:, N-1-n]`.

use crate::error::{dim_err, Result};
use crate::scalar::{cr, czeros, CMat, Real};
use crate::sysmodel::SystemConfig;
use nalgebra::DMatrix;

/// First row block of a block Toeplitz matrix: `L` equally sized taps.
#[derive(Clone, Debug)]
pub struct BlockRow<T: Real> {
    blocks: Vec<CMat<T>>,
}

impl<T: Real> BlockRow<T> {
    pub fn new(blocks: Vec<CMat<T>>) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return dim_err("block row needs at least one block");
        };
        let (r, c) = first.shape();
        if blocks.iter().any(|b| b.shape() != (r, c)) {
            return dim_err("block row blocks differ in shape");
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[CMat<T>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_shape(&self) -> (usize, usize) {
        self.blocks[0].shape()
    }
}

#[derive(Clone, Debug)]
pub struct BlockToeplitzSpec<T: Real> {
    pub row_block: BlockRow<T>,
    pub num_row_blocks: usize,
}

impl<T: Real> BlockToeplitzSpec<T> {
    pub fn new(row_block: BlockRow<T>, num_row_blocks: usize) -> Result<Self> {
        if num_row_blocks == 0 {
            return dim_err("block Toeplitz needs at least one row block");
        }
        Ok(Self { row_block, num_row_blocks })
    }

    /// Shape of the realized matrix.
    pub fn shape(&self) -> (usize, usize) {
        let (r, c) = self.row_block.block_shape();
        (self.num_row_blocks * r, (self.num_row_blocks + self.row_block.len() - 1) * c)
    }
}

/// Unitary DFT matrix with `W(k, l) = exp(i 2 pi k l / N) / sqrt(N)`.
pub fn dft_matrix<T: Real>(n: usize) -> Result<CMat<T>> {
    if n == 0 {
        return dim_err("DFT size must be positive");
    }
    let scale = T::one() / T::lit(n as f64).sqrt();
    Ok(CMat::<T>::from_fn(n, n, |k, l| {
        // Reduce the exponent modulo N so large products keep full accuracy.
        let e = (k * l) % n;
        let ang = T::two_pi() * T::lit(e as f64) / T::lit(n as f64);
        crate::scalar::polar(scale, ang)
    }))
}

/// Column `w_n` of the DFT matrix used by subcarrier `n`.
pub fn subcarrier_column<T: Real>(w: &CMat<T>, n: usize) -> CMat<T> {
    let big_n = w.ncols();
    w.columns(big_n - 1 - n, 1).clone_owned()
}

/// Realizes a block Toeplitz matrix: row block `i` carries the taps shifted
/// right by `i` block positions.
pub fn blk_toeplitz<T: Real>(spec: &BlockToeplitzSpec<T>) -> CMat<T> {
    let (br, bc) = spec.row_block.block_shape();
    let (rows, cols) = spec.shape();
    let mut m = czeros(rows, cols);
    for i in 0..spec.num_row_blocks {
        for (j, b) in spec.row_block.blocks().iter().enumerate() {
            m.view_mut((i * br, (i + j) * bc), (br, bc)).copy_from(b);
        }
    }
    m
}

/// Convenience wrapper around [`blk_toeplitz`].
pub fn toeplitz_from_taps<T: Real>(taps: &[CMat<T>], num_row_blocks: usize) -> Result<CMat<T>> {
    let spec = BlockToeplitzSpec::new(BlockRow::new(taps.to_vec())?, num_row_blocks)?;
    Ok(blk_toeplitz(&spec))
}

/// Block circulant matrix whose first row block is `row`.
pub fn blk_circulant<T: Real>(row: &BlockRow<T>) -> CMat<T> {
    let n = row.len();
    let (br, bc) = row.block_shape();
    let mut m = czeros(n * br, n * bc);
    for i in 0..n {
        for (j, b) in row.blocks().iter().enumerate() {
            m.view_mut((i * br, ((i + j) % n) * bc), (br, bc)).copy_from(b);
        }
    }
    m
}

/// Per-subcarrier diagonal blocks of `(W^H ⊗ I) H_c (W ⊗ I)` for the block
/// circulant `H_c` with first row block `row`. Entry `n` is the block at
/// diagonal position `N-1-n`, i.e. `sum_l H_l exp(i 2 pi l (N-1-n) / N)`.
pub fn circulant_diag_blocks<T: Real>(row: &BlockRow<T>, n: usize) -> Result<Vec<CMat<T>>> {
    if row.len() != n {
        return dim_err(format!("expected {n} blocks, got {}", row.len()));
    }
    let (br, bc) = row.block_shape();
    let out = (0..n)
        .map(|sub| {
            let a = n - 1 - sub;
            let mut acc = czeros(br, bc);
            for (l, h) in row.blocks().iter().enumerate() {
                let e = (l * a) % n;
                let ph = crate::scalar::cis(T::two_pi() * T::lit(e as f64) / T::lit(n as f64));
                acc += h * ph;
            }
            acc
        })
        .collect();
    Ok(out)
}

/// Block-diagonal matrix from a list of blocks, first block top-left.
pub fn blkdiag<T: Real>(blocks: &[CMat<T>]) -> CMat<T> {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut m = czeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        m.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    m
}

/// Position of relay tap `j`, entry `(a, b)` inside `r = vec(R̄^T)`.
#[inline]
pub fn relay_index(lr: usize, mr: usize, j: usize, a: usize, b: usize) -> usize {
    a * lr * mr + j * mr + b
}

/// 0/1 matrices with `vec(R^T) = E1^T r` and `vec(R) = E2^T r`, where
/// `R = blkToeplitz(R̄, N+L_g-1)` and `r = vec(R̄^T)`.
#[derive(Clone, Debug)]
pub struct SelectionMatrices<T: Real> {
    pub e1: DMatrix<T>,
    pub e2: DMatrix<T>,
}

impl<T: Real> SelectionMatrices<T> {
    pub fn e1_complex(&self) -> CMat<T> {
        self.e1.map(cr)
    }

    pub fn e2_complex(&self) -> CMat<T> {
        self.e2.map(cr)
    }
}

pub fn selection_matrices<T: Real>(cfg: &SystemConfig<T>) -> Result<SelectionMatrices<T>> {
    cfg.validate_dimensions()?;
    let (mt, mr, lr) = (cfg.m_t, cfg.m_r, cfg.l_r);
    let rows_r = cfg.relay_out_blocks() * mt;
    let cols_r = cfg.relay_in_blocks() * mr;
    let dim = mt * lr * mr;
    let mut e1 = DMatrix::<T>::zeros(dim, rows_r * cols_r);
    let mut e2 = DMatrix::<T>::zeros(dim, rows_r * cols_r);
    for i in 0..cfg.relay_out_blocks() {
        for j in 0..lr {
            for a in 0..mt {
                for b in 0..mr {
                    let m = relay_index(lr, mr, j, a, b);
                    let row = i * mt + a;
                    let col = (i + j) * mr + b;
                    // vec(R^T) is the row-major scan of R; vec(R) the column-major one.
                    e1[(m, row * cols_r + col)] = T::one();
                    e2[(m, col * rows_r + row)] = T::one();
                }
            }
        }
    }
    Ok(SelectionMatrices { e1, e2 })
}
