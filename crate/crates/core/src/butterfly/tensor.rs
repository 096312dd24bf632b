//! Axis-wise application of small real matrices to complex tensors.
//!
//! A coefficient block is a `D`-dimensional tensor (first axis slowest) followed by a
//! trailing right-hand-side axis. Tensor-product transfers (interpolation to children,
//! anterpolation to parents, evaluation at lattice points) are `D` passes of a 1D matrix.

use num_complex::Complex64;

use crate::cheb::Matrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `out[.., o, ..] = Σ_c m[o][c] · input[.., c, ..]` along `axis`.
///
/// `dims` are the input extents (without the rhs axis); `dims[axis]` must equal `m.cols`.
/// `out` must hold the input size with `dims[axis]` replaced by `m.rows`.
pub fn apply_axis(
    m: &Matrix,
    axis: usize,
    dims: &[usize],
    nrhs: usize,
    input: &[Complex64],
    out: &mut [Complex64],
) {
    debug_assert_eq!(dims[axis], m.cols);
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product::<usize>() * nrhs;
    let in_block = m.cols * inner;
    let out_block = m.rows * inner;
    debug_assert!(input.len() >= outer * in_block);
    debug_assert!(out.len() >= outer * out_block);
    for o in 0..outer {
        let src = &input[o * in_block..(o + 1) * in_block];
        let dst = &mut out[o * out_block..(o + 1) * out_block];
        for r in 0..m.rows {
            let row = &m.data[r * m.cols..(r + 1) * m.cols];
            let acc = &mut dst[r * inner..(r + 1) * inner];
            acc.iter_mut().for_each(|v| *v = ZERO);
            for (c, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let col = &src[c * inner..(c + 1) * inner];
                for (a, &x) in acc.iter_mut().zip(col) {
                    a.re += w * x.re;
                    a.im += w * x.im;
                }
            }
        }
    }
}

/// `dst[k] = Σ_s (kre[s] + i·kim[s]) · src[s·nrhs + k]` for `k < nrhs`.
pub fn kernel_row_times(kre: &[f64], kim: &[f64], src: &[Complex64], nrhs: usize, dst: &mut [Complex64]) {
    let n = kre.len();
    if nrhs == 1 {
        // four independent partial sums so the loop vectorizes
        let (mut ar, mut ai) = ([0.0f64; 4], [0.0f64; 4]);
        let chunks = n / 4;
        for c in 0..chunks {
            for l in 0..4 {
                let s = 4 * c + l;
                let v = src[s];
                ar[l] += kre[s] * v.re - kim[s] * v.im;
                ai[l] += kre[s] * v.im + kim[s] * v.re;
            }
        }
        let (mut sr, mut si) = (ar.iter().sum::<f64>(), ai.iter().sum::<f64>());
        for s in 4 * chunks..n {
            let v = src[s];
            sr += kre[s] * v.re - kim[s] * v.im;
            si += kre[s] * v.im + kim[s] * v.re;
        }
        dst[0] = Complex64::new(sr, si);
        return;
    }
    let dst = &mut dst[..nrhs];
    dst.iter_mut().for_each(|v| *v = ZERO);
    for s in 0..n {
        let w = Complex64::new(kre[s], kim[s]);
        for (d, v) in dst.iter_mut().zip(&src[s * nrhs..(s + 1) * nrhs]) {
            *d += w * v;
        }
    }
}

/// Scratch space for chains of [`apply_axis`].
#[derive(Default)]
pub struct TensorScratch {
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl TensorScratch {
    /// Applies `mats[i]` along axis `i` for every axis and writes the result to `out`.
    ///
    /// `dims` are the input extents; the output extents are `mats[i].rows`.
    pub fn apply_all(
        &mut self,
        mats: &[&Matrix],
        dims: &[usize],
        nrhs: usize,
        input: &[Complex64],
        out: &mut [Complex64],
    ) {
        let d = dims.len();
        debug_assert_eq!(mats.len(), d);
        let mut cur: Vec<usize> = dims.to_vec();
        if d == 1 {
            apply_axis(mats[0], 0, &cur, nrhs, input, out);
            return;
        }
        let size_after = |cur: &[usize], axis: usize, rows: usize| -> usize {
            cur.iter()
                .enumerate()
                .map(|(i, &v)| if i == axis { rows } else { v })
                .product::<usize>()
                * nrhs
        };
        let first = size_after(&cur, 0, mats[0].rows);
        self.a.resize(first, ZERO);
        apply_axis(mats[0], 0, &cur, nrhs, input, &mut self.a);
        cur[0] = mats[0].rows;
        for axis in 1..d {
            let len = size_after(&cur, axis, mats[axis].rows);
            if axis + 1 == d {
                apply_axis(mats[axis], axis, &cur, nrhs, &self.a, &mut out[..len]);
            } else {
                self.b.resize(len, ZERO);
                apply_axis(mats[axis], axis, &cur, nrhs, &self.a, &mut self.b);
                std::mem::swap(&mut self.a, &mut self.b);
            }
            cur[axis] = mats[axis].rows;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::multi_index;

    fn mat(rows: usize, cols: usize, seed: f64) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for (k, v) in m.data.iter_mut().enumerate() {
            *v = ((k as f64 + 1.0) * seed).sin();
        }
        m
    }

    #[test]
    fn matches_explicit_tensor_contraction() {
        let dims = [3usize, 4, 2];
        let nrhs = 2;
        let mats = [mat(2, 3, 0.7), mat(5, 4, 1.3), mat(3, 2, 0.4)];
        let n_in: usize = dims.iter().product::<usize>() * nrhs;
        let input: Vec<Complex64> = (0..n_in)
            .map(|k| Complex64::new((k as f64 * 0.37).cos(), (k as f64 * 0.11).sin()))
            .collect();
        let out_dims = [2usize, 5, 3];
        let mut out = vec![ZERO; out_dims.iter().product::<usize>() * nrhs];
        let refs: Vec<&Matrix> = mats.iter().collect();
        TensorScratch::default().apply_all(&refs, &dims, nrhs, &input, &mut out);
        for o0 in 0..2 {
            for o1 in 0..5 {
                for o2 in 0..3 {
                    for r in 0..nrhs {
                        let mut acc = ZERO;
                        for lin in 0..24 {
                            let i: [usize; 3] = {
                                let a = multi_index::<2>(lin / 2, 4);
                                [a[0], a[1], lin % 2]
                            };
                            let w = mats[0].get(o0, i[0]) * mats[1].get(o1, i[1]) * mats[2].get(o2, i[2]);
                            acc += input[((i[0] * 4 + i[1]) * 2 + i[2]) * nrhs + r] * w;
                        }
                        let got = out[((o0 * 5 + o1) * 3 + o2) * nrhs + r];
                        assert!((got - acc).norm() < 1e-12);
                    }
                }
            }
        }
    }
}
