//! Chebyshev grids adapted to dyadic boxes and tensor-product Lagrange interpolation.
//!
//! The 1D grid of order `q` is `z_i = ½ cos(iπ/(q-1))`, `i = 0…q-1` (decreasing), and a
//! box with center `c` and width `w` carries the tensor grid `c + w (z_{i_1}, …, z_{i_d})`
//! in lexicographic order with the first axis slowest. Basis polynomials are evaluated in
//! barycentric form.

use crate::geometry::{multi_index, DyadicBox};
use crate::{FioError, Result};

/// Tolerance (relative to box width) within which a point outside the box is clamped.
const CLAMP_TOL: f64 = 1e-9;

/// `{½ cos(iπ/(q-1))}` for `i = 0…q-1`.
pub fn cheb_nodes_1d(q: usize) -> Result<Vec<f64>> {
    if q < 2 {
        return Err(FioError::InvalidOrder(q));
    }
    let h = std::f64::consts::PI / (q - 1) as f64;
    Ok((0..q)
        .map(|i| {
            // exact endpoints and antisymmetry regardless of cos roundoff
            if 2 * i + 1 == q {
                0.0
            } else if 2 * i < q {
                0.5 * (i as f64 * h).cos()
            } else {
                -0.5 * ((q - 1 - i) as f64 * h).cos()
            }
        })
        .collect())
}

/// 1D Lagrange basis on arbitrary distinct nodes, evaluated in barycentric form.
#[derive(Clone, Debug)]
pub struct InterpWeights {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl InterpWeights {
    pub fn new(nodes: &[f64]) -> Self {
        let weights = nodes
            .iter()
            .enumerate()
            .map(|(j, &zj)| {
                let prod: f64 = nodes
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, &zk)| zj - zk)
                    .product();
                1.0 / prod
            })
            .collect();
        Self {
            nodes: nodes.to_vec(),
            weights,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Writes `L_t(u)` for every `t` into `out`.
    pub fn eval_all(&self, u: f64, out: &mut [f64]) {
        if let Some(hit) = self.nodes.iter().position(|&z| z == u) {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[hit] = 1.0;
            return;
        }
        let mut denom = 0.0;
        for ((o, &z), &w) in out.iter_mut().zip(&self.nodes).zip(&self.weights) {
            *o = w / (u - z);
            denom += *o;
        }
        out.iter_mut().for_each(|v| *v /= denom);
    }

    pub fn eval(&self, t: usize, u: f64) -> f64 {
        let mut vals = vec![0.0; self.len()];
        self.eval_all(u, &mut vals);
        vals[t]
    }
}

/// Dense row-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }
}

/// `T[t][s] = L_t(target_s)` where `L_t` is the Lagrange basis of `source`.
pub fn transfer_matrix_1d(source: &[f64], target: &[f64]) -> Matrix {
    let basis = InterpWeights::new(source);
    let mut m = Matrix::zeros(source.len(), target.len());
    let mut col = vec![0.0; source.len()];
    for (s, &u) in target.iter().enumerate() {
        basis.eval_all(u, &mut col);
        for (t, &v) in col.iter().enumerate() {
            m.data[t * target.len() + s] = v;
        }
    }
    m
}

/// Shift-and-scale tensor product of `nodes` onto `bx`, lexicographic order.
pub fn adapt_to_box<const D: usize>(nodes: &[f64], bx: &DyadicBox<D>) -> Vec<[f64; D]> {
    let q = nodes.len();
    (0..q.pow(D as u32))
        .map(|t| {
            let ti: [usize; D] = multi_index(t, q);
            std::array::from_fn(|i| bx.center[i] + bx.width * nodes[ti[i]])
        })
        .collect()
}

/// Order-`q` Chebyshev grid adapted to a box.
#[derive(Clone, Debug)]
pub struct ChebGrid<const D: usize> {
    q: usize,
    bx: DyadicBox<D>,
    basis: InterpWeights,
}

impl<const D: usize> ChebGrid<D> {
    pub fn new(q: usize, bx: DyadicBox<D>) -> Result<Self> {
        let nodes = cheb_nodes_1d(q)?;
        Ok(Self {
            q,
            bx,
            basis: InterpWeights::new(&nodes),
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of tensor nodes `q^D`.
    pub fn len(&self) -> usize {
        self.q.pow(D as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bx(&self) -> &DyadicBox<D> {
        &self.bx
    }

    pub fn nodes_1d(&self) -> &[f64] {
        self.basis.nodes()
    }

    pub fn weights(&self) -> &InterpWeights {
        &self.basis
    }

    pub fn node(&self, t: usize) -> [f64; D] {
        let ti: [usize; D] = multi_index(t, self.q);
        std::array::from_fn(|i| self.bx.center[i] + self.bx.width * self.basis.nodes()[ti[i]])
    }

    pub fn tensor_nodes(&self) -> Vec<[f64; D]> {
        adapt_to_box(self.basis.nodes(), &self.bx)
    }

    /// Box-normalized coordinate `(x - c)/w`, clamped to `[-½, ½]` when barely outside.
    fn local(&self, i: usize, x: f64) -> f64 {
        let u = (x - self.bx.center[i]) / self.bx.width;
        if u.abs() > 0.5 && u.abs() - 0.5 <= CLAMP_TOL {
            0.5f64.copysign(u)
        } else {
            u
        }
    }

    /// Value of the tensor basis polynomial `M_t` at `x`.
    pub fn lagrange_eval(&self, t: &[usize; D], x: &[f64; D]) -> f64 {
        (0..D)
            .map(|i| self.basis.eval(t[i], self.local(i, x[i])))
            .product()
    }

    /// All `q^D` basis values at `x`, lexicographic order.
    pub fn lagrange_eval_all(&self, x: &[f64; D]) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = (0..D)
            .map(|i| {
                let mut v = vec![0.0; self.q];
                self.basis.eval_all(self.local(i, x[i]), &mut v);
                v
            })
            .collect();
        (0..self.len())
            .map(|t| {
                let ti: [usize; D] = multi_index(t, self.q);
                (0..D).map(|i| per_axis[i][ti[i]]).product()
            })
            .collect()
    }
}
