//! Index bookkeeping and the dense-times-embedded-operator kernels.
//!
//! States are stored column-major (nalgebra), so kernels walk columns and
//! parallelise over them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

pub type CMatrix = DMatrix<Complex64>;

/// Largest element modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Splits a mixed-radix index space into a "target" factor and the "rest".
///
/// `full[t * rest_dim + r]` is the full index whose target digits encode `t`
/// (in target order) and whose remaining digits encode `r` (in mode order).
#[derive(Debug, Clone)]
pub(crate) struct Split {
    pub target_dim: usize,
    pub rest_dim: usize,
    pub full: Vec<usize>,
}

impl Split {
    pub fn new(dims: &[usize], targets: &[usize]) -> Self {
        let total: usize = dims.iter().product();
        let target_dim: usize = targets.iter().map(|&i| dims[i]).product();
        let rest_dim = total / target_dim;
        let rest: Vec<usize> = (0..dims.len()).filter(|i| !targets.contains(i)).collect();

        let mut full = vec![0; total];
        let mut digits = vec![0usize; dims.len()];
        for index in 0..total {
            let mut t = 0;
            for &m in targets {
                t = t * dims[m] + digits[m];
            }
            let mut r = 0;
            for &m in &rest {
                r = r * dims[m] + digits[m];
            }
            full[t * rest_dim + r] = index;

            for m in (0..dims.len()).rev() {
                digits[m] += 1;
                if digits[m] < dims[m] {
                    break;
                }
                digits[m] = 0;
            }
        }
        Self {
            target_dim,
            rest_dim,
            full,
        }
    }

    #[inline]
    pub fn index(&self, t: usize, r: usize) -> usize {
        self.full[t * self.rest_dim + r]
    }
}

/// Row-compressed copy of a small operator.
pub(crate) struct SparseRows(Vec<Vec<(usize, Complex64)>>);

impl SparseRows {
    pub fn new(op: &CMatrix) -> Self {
        let rows = (0..op.nrows())
            .map(|i| {
                (0..op.ncols())
                    .filter_map(|j| {
                        let v = op[(i, j)];
                        (v != Complex64::new(0.0, 0.0)).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        Self(rows)
    }
}

/// `(I ⊗ K) M` with `K` acting on the target factor of `split`.
pub(crate) fn left_apply(op: &SparseRows, split: &Split, m: &CMatrix) -> CMatrix {
    let dim = m.nrows();
    let mut out = CMatrix::zeros(dim, m.ncols());
    let src = m.as_slice();
    out.as_mut_slice()
        .par_chunks_mut(dim)
        .zip(src.par_chunks(dim))
        .for_each(|(dst, col)| {
            for r in 0..split.rest_dim {
                for (t, row) in op.0.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &(tp, k) in row {
                        acc += k * col[split.index(tp, r)];
                    }
                    dst[split.index(t, r)] = acc;
                }
            }
        });
    out
}

/// `(I ⊗ K) ρ (I ⊗ K)†`.
pub(crate) fn conjugate(op: &SparseRows, split: &Split, rho: &CMatrix) -> CMatrix {
    let half = left_apply(op, split, rho);
    left_apply(op, split, &half.adjoint()).adjoint()
}

/// Trace over the target factor of `split`.
pub(crate) fn trace_out(split: &Split, rho: &CMatrix) -> CMatrix {
    let n = split.rest_dim;
    let mut out = CMatrix::zeros(n, n);
    out.as_mut_slice().par_chunks_mut(n).enumerate().for_each(|(rc, dst)| {
        for (r, d) in dst.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..split.target_dim {
                acc += rho[(split.index(s, r), split.index(s, rc))];
            }
            *d = acc;
        }
    });
    out
}
