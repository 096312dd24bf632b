//! The Cartesian butterfly for one corona.
//!
//! Spatial boxes `A ⊂ [0,1)^d` and frequency boxes `B` of the corona tree are paired so
//! that `w_A · w_B = 1`. Coefficients start on frequency Chebyshev grids at leaf width `b`
//! (initialize), are merged up the frequency tree while the spatial boxes split (ξ-steps),
//! are converted to spatial grids once `w_B ≤ √N_j` (switch), keep merging with
//! interpolation in `x` (x-steps) and are finally evaluated on the lattice (terminate).
//!
//! The traversal is depth-first over the spatial tree: each start box `A₀` of width `1/b`
//! carries one [`CoeffLayer`] per level along its current branch, so only a thin slice of
//! any level is alive at a time. Start boxes are independent and run in parallel; each
//! writes a private output block, which keeps results independent of the thread count.

mod layer;
pub mod tensor;

pub use layer::{CoeffLayer, MemoryProbe};

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cheb::{cheb_nodes_1d, transfer_matrix_1d, InterpWeights, Matrix};
use crate::cis::{cis_turns, phase_col, phase_row};
use crate::geometry::{
    child_bits, corona_bounding_tree, level_schedule, linear_index, multi_index, CoronaDecomposition,
    CoronaTree, DyadicBox, TreeLevelSchedule,
};
use crate::kernels::{Phase, Site};
use crate::Result;
use tensor::{kernel_row_times, TensorScratch};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Where the Chebyshev grid of a box is placed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GridFit {
    /// Per axis, the grid spans exactly the lattice points the box holds: `w - 1` lattice
    /// steps for an interior box. Tighter intervals lower the interpolation error by 2-4×
    /// at fixed order.
    #[default]
    Lattice,
    /// The grid spans the geometric box `[c - w/2, c + w/2]`.
    Box,
}

/// Per-axis interval `[lo, lo + len]` in lattice units (integers for `ξ`, multiples of
/// `1/N` for `x`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Span {
    lo: i64,
    len: i64,
}

/// Center and per-axis width of a box's Chebyshev grid in real coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame<const D: usize> {
    pub center: [f64; D],
    pub width: [f64; D],
}

/// Lattice points of one start-level frequency box that lie in the corona.
#[derive(Clone, Debug)]
struct BoxPoints<const D: usize> {
    /// Offset inside the `(b+1)^D` local patch.
    local: Vec<u32>,
    /// Index into the full frequency lattice.
    global: Vec<u32>,
    xi: Vec<[f64; D]>,
}

/// Butterfly plan for corona `j`: tree, schedule and transfer matrices.
pub struct CoronaButterfly<const D: usize, P: Phase<D>> {
    phase: P,
    j: usize,
    tree: CoronaTree<D>,
    schedule: TreeLevelSchedule,
    n: usize,
    b: usize,
    q: usize,
    r: usize,
    fit: GridFit,
    z: Vec<f64>,
    /// Parent basis at child nodes (`[t_child][s_parent]`) and its transpose, keyed by
    /// the child span relative to the parent: `(lo offset, child len, parent len)`.
    transfers: HashMap<(i64, i64, i64), (Matrix, Matrix)>,
    /// `L_t` at the `b + 1` lattice offsets of a start box, keyed by span length.
    init_mats: HashMap<i64, Matrix>,
    /// Stop-level spatial basis at the `m` lattice points per axis (`[p][t]`).
    term_mat: Matrix,
    m: usize,
    start_points: Vec<BoxPoints<D>>,
    probe: Option<Arc<MemoryProbe>>,
}

impl<const D: usize, P: Phase<D>> CoronaButterfly<D, P> {
    pub fn new(phase: P, dec: &CoronaDecomposition<D>, j: usize, q: usize, b: usize) -> Result<Self> {
        Self::with_fit(phase, dec, j, q, b, GridFit::default())
    }

    pub fn with_fit(
        phase: P,
        dec: &CoronaDecomposition<D>,
        j: usize,
        q: usize,
        b: usize,
        fit: GridFit,
    ) -> Result<Self> {
        let z = cheb_nodes_1d(q)?;
        let tree = corona_bounding_tree(j, dec)?;
        let schedule = level_schedule(tree.n_j, b)?;
        let n = dec.n();
        let m = n * b / tree.n_j;
        let mut bf = Self {
            phase,
            j,
            tree,
            schedule,
            n,
            b,
            q,
            r: q.pow(D as u32),
            fit,
            z,
            transfers: HashMap::new(),
            init_mats: HashMap::new(),
            term_mat: Matrix::zeros(0, 0),
            m,
            start_points: Vec::new(),
            probe: None,
        };
        bf.build_matrices();
        bf.start_points = bf.collect_start_points();
        Ok(bf)
    }

    /// `L_t((p - len/2) / len)` for each offset `p`, shape `q × offsets`.
    fn sample_matrix(&self, len: i64, offsets: impl Iterator<Item = i64>) -> Matrix {
        let pts: Vec<f64> = offsets.map(|p| (p as f64 - 0.5 * len as f64) / len as f64).collect();
        transfer_matrix_1d(&self.z, &pts)
    }

    fn build_matrices(&mut self) {
        let mut keys = Vec::new();
        let sched = self.schedule;
        for lb in sched.stop_level_b..sched.start_level_b {
            for p in 0..1usize << lb {
                let ps = self.freq_span(lb, p);
                for h in 0..2 {
                    let cs = self.freq_span(lb + 1, 2 * p + h);
                    keys.push((cs.lo - ps.lo, cs.len, ps.len));
                }
            }
        }
        for la in sched.level_a(sched.switch_level_b)..sched.level_a(sched.stop_level_b) {
            let ps = self.spatial_span(la, 0);
            for h in 0..2 {
                let cs = self.spatial_span(la + 1, h);
                keys.push((cs.lo - ps.lo, cs.len, ps.len));
            }
        }
        for key in keys {
            if self.transfers.contains_key(&key) {
                continue;
            }
            let (off, clen, plen) = key;
            // child nodes in lattice units relative to the parent's lower end
            let pts: Vec<f64> = self
                .z
                .iter()
                .map(|&zt| {
                    let y = off as f64 + clen as f64 * (0.5 + zt);
                    (y - 0.5 * plen as f64) / plen as f64
                })
                .collect();
            let interp = transfer_matrix_1d(&self.z, &pts).transpose();
            let anterp = interp.transpose();
            self.transfers.insert(key, (interp, anterp));
        }
        for p in 0..1usize << sched.start_level_b {
            let len = self.freq_span(sched.start_level_b, p).len;
            if !self.init_mats.contains_key(&len) {
                let mat = self.sample_matrix(len, 0..=self.b as i64);
                self.init_mats.insert(len, mat);
            }
        }
        let leaf = self.spatial_span(sched.level_a(sched.stop_level_b), 0);
        self.term_mat = self.sample_matrix(leaf.len, 0..self.m as i64).transpose();
    }

    /// Span along one axis of the frequency box with per-axis index `idx` at `level`.
    fn freq_span(&self, level: u32, idx: usize) -> Span {
        let w = (self.tree.n_j >> level) as i64;
        let side = 1usize << level;
        let lo = -((self.tree.n_j / 2) as i64) + idx as i64 * w;
        match self.fit {
            GridFit::Box => Span { lo, len: w },
            GridFit::Lattice => {
                // the last box holds the closed outer face, clipped to the lattice
                let hi = if idx + 1 == side { lo + w } else { lo + w - 1 };
                let hi = hi.min((self.n / 2) as i64 - 1);
                Span { lo, len: hi - lo }
            }
        }
    }

    /// Span along one axis of the spatial box with per-axis index `idx`, in units of `1/N`.
    fn spatial_span(&self, level: u32, idx: usize) -> Span {
        let m = (self.n >> level) as i64;
        let lo = idx as i64 * m;
        match self.fit {
            GridFit::Box => Span { lo, len: m },
            GridFit::Lattice => Span { lo, len: m - 1 },
        }
    }

    fn transfer(&self, child: Span, parent: Span) -> &(Matrix, Matrix) {
        &self.transfers[&(child.lo - parent.lo, child.len, parent.len)]
    }

    /// Index `j` of the corona this plan covers.
    pub fn corona(&self) -> usize {
        self.j
    }

    pub fn grid_fit(&self) -> GridFit {
        self.fit
    }

    /// Grid frame of a spatial box.
    pub fn spatial_frame(&self, a: &DyadicBox<D>) -> Frame<D> {
        let inv = 1.0 / self.n as f64;
        let spans: [Span; D] = std::array::from_fn(|i| self.spatial_span(a.level, a.index[i]));
        Frame {
            center: std::array::from_fn(|i| (spans[i].lo as f64 + 0.5 * spans[i].len as f64) * inv),
            width: std::array::from_fn(|i| spans[i].len as f64 * inv),
        }
    }

    fn freq_frame_at(&self, level_b: u32, index: &[usize; D]) -> Frame<D> {
        let spans: [Span; D] = std::array::from_fn(|i| self.freq_span(level_b, index[i]));
        Frame {
            center: std::array::from_fn(|i| spans[i].lo as f64 + 0.5 * spans[i].len as f64),
            width: std::array::from_fn(|i| spans[i].len as f64),
        }
    }

    /// Grid frame of the frequency box in a level slot.
    pub fn freq_frame(&self, level_b: u32, slot: usize) -> Frame<D> {
        let occ = self.tree.occupancy(level_b);
        self.freq_frame_at(level_b, &multi_index(occ.nonempty[slot], occ.side))
    }

    /// Chebyshev node `t` (lexicographic tensor index) of a frame.
    pub fn node(&self, f: &Frame<D>, t: usize) -> [f64; D] {
        let ti: [usize; D] = multi_index(t, self.q);
        std::array::from_fn(|i| f.center[i] + f.width[i] * self.z[ti[i]])
    }

    /// Counts every coefficient entry allocated by this plan in `probe`.
    pub fn with_probe(mut self, probe: Arc<MemoryProbe>) -> Self {
        self.probe = Some(probe);
        self
    }

    pub fn schedule(&self) -> &TreeLevelSchedule {
        &self.schedule
    }

    pub fn tree(&self) -> &CoronaTree<D> {
        &self.tree
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Coefficients per pair, `q^D`.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Spatial box at `level` of the tree over `[0,1)^D`.
    pub fn spatial_box(&self, level: u32, index: [usize; D]) -> DyadicBox<D> {
        DyadicBox::at([0.0; D], 1.0, level, index)
    }

    /// Spatial boxes of width `1/b`, where the traversal starts.
    pub fn start_boxes(&self) -> Vec<DyadicBox<D>> {
        let level = self.schedule.level_a(self.schedule.start_level_b);
        let side = 1usize << level;
        (0..side.pow(D as u32))
            .map(|lin| self.spatial_box(level, multi_index(lin, side)))
            .collect()
    }

    /// Frequency box of a level slot.
    pub fn freq_box(&self, level_b: u32, slot: usize) -> DyadicBox<D> {
        let occ = self.tree.occupancy(level_b);
        self.tree.box_at(level_b, multi_index(occ.nonempty[slot], occ.side))
    }

    pub fn slots(&self, level_b: u32) -> usize {
        self.tree.occupancy(level_b).nonempty.len()
    }

    /// Entries of a whole level stored densely: all spatial boxes × non-empty frequency
    /// boxes × `q^D` × `nrhs`. The largest such count over the schedule is the yardstick
    /// for the memory contract.
    pub fn full_level_entries(&self, nrhs: usize) -> usize {
        self.schedule
            .levels()
            .map(|lb| (1usize << (self.schedule.level_a(lb) * D as u32)) * self.slots(lb) * self.r * nrhs)
            .max()
            .unwrap_or(0)
    }

    fn node_sites(&self, f: &Frame<D>) -> Vec<Site<D>> {
        (0..self.r).map(|t| self.phase.site(&self.node(f, t))).collect()
    }

    fn in_corona(&self, xi: &[i64; D]) -> bool {
        let top = (self.n / 2) as i64 - 1;
        let quarter = (self.tree.n_j / 4) as i64;
        let half = (self.tree.n_j / 2) as i64;
        let m = xi.iter().map(|v| v.abs()).max().unwrap_or(0);
        xi.iter().all(|&v| v <= top) && m > quarter && m <= half
    }

    fn collect_start_points(&self) -> Vec<BoxPoints<D>> {
        let level = self.schedule.start_level_b;
        let occ = self.tree.occupancy(level);
        let patch = self.b + 1;
        let half_n = (self.n / 2) as i64;
        occ.nonempty
            .iter()
            .map(|&lin| {
                let index: [usize; D] = multi_index(lin, occ.side);
                let range = self.tree.point_range(level, &index);
                let mut pts = BoxPoints {
                    local: Vec::new(),
                    global: Vec::new(),
                    xi: Vec::new(),
                };
                let extent: [usize; D] = std::array::from_fn(|i| (range[i].1 - range[i].0 + 1) as usize);
                let count: usize = extent.iter().product();
                for k in 0..count {
                    let mut off = [0usize; D];
                    let mut rem = k;
                    for i in (0..D).rev() {
                        off[i] = rem % extent[i];
                        rem /= extent[i];
                    }
                    let xi: [i64; D] = std::array::from_fn(|i| range[i].0 + off[i] as i64);
                    if !self.in_corona(&xi) {
                        continue;
                    }
                    let kg: [usize; D] = std::array::from_fn(|i| (xi[i] + half_n) as usize);
                    pts.local.push(linear_index(&off, patch) as u32);
                    pts.global.push(linear_index(&kg, self.n) as u32);
                    pts.xi.push(std::array::from_fn(|i| xi[i] as f64));
                }
                pts
            })
            .collect()
    }

    /// Lattice points (frequency index, `ξ`) of `B ∩ Ω_j` for a level slot.
    pub fn box_points(&self, level_b: u32, slot: usize) -> Vec<(usize, [f64; D])> {
        let occ = self.tree.occupancy(level_b);
        let index: [usize; D] = multi_index(occ.nonempty[slot], occ.side);
        let range = self.tree.point_range(level_b, &index);
        let half_n = (self.n / 2) as i64;
        let extent: [usize; D] = std::array::from_fn(|i| (range[i].1 - range[i].0 + 1) as usize);
        let mut out = Vec::new();
        for k in 0..extent.iter().product::<usize>() {
            let mut rem = k;
            let mut xi = [0i64; D];
            for i in (0..D).rev() {
                xi[i] = range[i].0 + (rem % extent[i]) as i64;
                rem /= extent[i];
            }
            if self.in_corona(&xi) {
                let kg: [usize; D] = std::array::from_fn(|i| (xi[i] + half_n) as usize);
                out.push((linear_index(&kg, self.n), std::array::from_fn(|i| xi[i] as f64)));
            }
        }
        out
    }

    fn new_layer(&self, level_b: u32, frequency_side: bool, nrhs: usize) -> CoeffLayer {
        CoeffLayer::zeros(level_b, frequency_side, self.slots(level_b), self.r, nrhs, self.probe.as_ref())
    }

    /// Start-level coefficients of spatial box `a` (width `1/b`) against every non-empty `B`.
    ///
    /// `f_hat` is laid out `[frequency index][rhs]` over the whole `N^D` lattice; only the
    /// entries in this corona are read.
    pub fn initialize(&self, a: &DyadicBox<D>, f_hat: &[Complex64], nrhs: usize) -> CoeffLayer {
        let level = self.schedule.start_level_b;
        let mut layer = self.new_layer(level, true, nrhs);
        let site_a = self.phase.site(&self.spatial_frame(a).center);
        let patch = self.b + 1;
        let patch_dims = [patch; D];
        let mut buf = vec![ZERO; patch.pow(D as u32) * nrhs];
        let mut scratch = TensorScratch::default();
        let occ = self.tree.occupancy(level);
        for (slot, pts) in self.start_points.iter().enumerate() {
            let mut any = false;
            buf.iter_mut().for_each(|v| *v = ZERO);
            for ((&loc, &glob), xi) in pts.local.iter().zip(&pts.global).zip(&pts.xi) {
                let src = &f_hat[glob as usize * nrhs..(glob as usize + 1) * nrhs];
                if src.iter().all(|v| *v == ZERO) {
                    continue;
                }
                any = true;
                let w = cis_turns(self.phase.eval_at(&site_a, xi));
                let dst = &mut buf[loc as usize * nrhs..(loc as usize + 1) * nrhs];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = w * s;
                }
            }
            if !any {
                continue;
            }
            let index: [usize; D] = multi_index(occ.nonempty[slot], occ.side);
            let mats: [&Matrix; D] = std::array::from_fn(|i| &self.init_mats[&self.freq_span(level, index[i]).len]);
            let frame = self.freq_frame_at(level, &index);
            let out = layer.slot_mut(slot);
            scratch.apply_all(&mats, &patch_dims, nrhs, &buf, out);
            for t in 0..self.r {
                let w = cis_turns(-self.phase.eval_at(&site_a, &self.node(&frame, t)));
                out[t * nrhs..(t + 1) * nrhs].iter_mut().for_each(|v| *v *= w);
            }
        }
        layer
    }

    /// Frequency-side step from the layer of `parent(a)` at level `ℓ` to the layer of `a`
    /// at level `ℓ - 1`.
    pub fn xi_step(&self, prev: &CoeffLayer, a: &DyadicBox<D>) -> CoeffLayer {
        debug_assert!(prev.frequency_side);
        let nrhs = prev.nrhs;
        let child_level = prev.level_b - 1;
        let mut layer = self.new_layer(child_level, true, nrhs);
        let site_a = self.phase.site(&self.spatial_frame(a).center);
        let occ_prev = self.tree.occupancy(prev.level_b);
        let occ = self.tree.occupancy(child_level);
        let dims = [self.q; D];
        let block = self.r * nrhs;
        let mut y = vec![ZERO; block];
        let mut tmp = vec![ZERO; block];
        let mut scratch = TensorScratch::default();
        for (slot, &lin) in occ.nonempty.iter().enumerate() {
            let bidx: [usize; D] = multi_index(lin, occ.side);
            let acc = layer.slot_mut(slot);
            let mut any = false;
            for k in 0..1usize << D {
                let bits = child_bits::<D>(k);
                let cidx: [usize; D] = std::array::from_fn(|i| 2 * bidx[i] + bits[i]);
                let Some(cslot) = occ_prev.slot(linear_index(&cidx, occ_prev.side)) else {
                    continue;
                };
                let src = prev.slot(cslot);
                if src.iter().all(|v| *v == ZERO) {
                    continue;
                }
                any = true;
                let cframe = self.freq_frame_at(prev.level_b, &cidx);
                for s in 0..self.r {
                    let w = cis_turns(self.phase.eval_at(&site_a, &self.node(&cframe, s)));
                    for (d, v) in y[s * nrhs..(s + 1) * nrhs].iter_mut().zip(&src[s * nrhs..(s + 1) * nrhs]) {
                        *d = w * v;
                    }
                }
                let mats: [&Matrix; D] = std::array::from_fn(|i| {
                    let c = self.freq_span(prev.level_b, cidx[i]);
                    &self.transfer(c, self.freq_span(child_level, bidx[i])).1
                });
                scratch.apply_all(&mats, &dims, nrhs, &y, &mut tmp);
                for (a, t) in acc.iter_mut().zip(&tmp) {
                    *a += t;
                }
            }
            if !any {
                continue;
            }
            let bframe = self.freq_frame_at(child_level, &bidx);
            for t in 0..self.r {
                let w = cis_turns(-self.phase.eval_at(&site_a, &self.node(&bframe, t)));
                acc[t * nrhs..(t + 1) * nrhs].iter_mut().for_each(|v| *v *= w);
            }
        }
        layer
    }

    /// Re-expresses a frequency-side layer of `a` on the Chebyshev grid of `a`:
    /// `δ̃_t = Σ_s e^{2πiΦ(g_t^A, g_s^B)} δ_s`.
    pub fn switch(&self, a: &DyadicBox<D>, layer: &mut CoeffLayer) {
        debug_assert!(layer.frequency_side);
        let nrhs = layer.nrhs;
        let sites_a = self.node_sites(&self.spatial_frame(a));
        let (mut kre, mut kim) = (vec![0.0; self.r], vec![0.0; self.r]);
        let mut out = vec![ZERO; self.r * nrhs];
        for slot in 0..layer.slots {
            let src = layer.slot(slot);
            if src.iter().all(|v| *v == ZERO) {
                continue;
            }
            let bframe = self.freq_frame(layer.level_b, slot);
            let nodes_b: Vec<[f64; D]> = (0..self.r).map(|s| self.node(&bframe, s)).collect();
            for (t, site) in sites_a.iter().enumerate() {
                phase_row(&self.phase, site, &nodes_b, 1.0, &mut kre, &mut kim);
                kernel_row_times(&kre, &kim, src, nrhs, &mut out[t * nrhs..(t + 1) * nrhs]);
            }
            layer.slot_mut(slot).copy_from_slice(&out);
        }
        layer.frequency_side = false;
    }

    /// Multiplies spatial-side coefficients of `a` by `e^{-2πiΦ(g_t^A, c_B)}` in place.
    fn demodulate(&self, a: &DyadicBox<D>, layer: &mut CoeffLayer) {
        let nrhs = layer.nrhs;
        let sites_a = self.node_sites(&self.spatial_frame(a));
        for slot in 0..layer.slots {
            if layer.slot(slot).iter().all(|v| *v == ZERO) {
                continue;
            }
            let c = self.freq_frame(layer.level_b, slot).center;
            let dst = layer.slot_mut(slot);
            for (t, site) in sites_a.iter().enumerate() {
                let w = cis_turns(-self.phase.eval_at(site, &c));
                dst[t * nrhs..(t + 1) * nrhs].iter_mut().for_each(|v| *v *= w);
            }
        }
    }

    /// Spatial-side step for child `a` from a parent layer already passed through
    /// [`Self::demodulate`].
    fn x_step_demodulated(&self, prev: &CoeffLayer, a: &DyadicBox<D>) -> CoeffLayer {
        let nrhs = prev.nrhs;
        let child_level = prev.level_b - 1;
        let mut layer = self.new_layer(child_level, false, nrhs);
        let sites_a = self.node_sites(&self.spatial_frame(a));
        let mats: [&Matrix; D] = std::array::from_fn(|i| {
            let c = self.spatial_span(a.level, a.index[i]);
            &self.transfer(c, self.spatial_span(a.level - 1, a.index[i] / 2)).0
        });
        let occ_prev = self.tree.occupancy(prev.level_b);
        let occ = self.tree.occupancy(child_level);
        let dims = [self.q; D];
        let mut tmp = vec![ZERO; self.r * nrhs];
        let mut scratch = TensorScratch::default();
        for (slot, &lin) in occ.nonempty.iter().enumerate() {
            let bidx: [usize; D] = multi_index(lin, occ.side);
            let acc = layer.slot_mut(slot);
            for k in 0..1usize << D {
                let bits = child_bits::<D>(k);
                let cidx: [usize; D] = std::array::from_fn(|i| 2 * bidx[i] + bits[i]);
                let Some(cslot) = occ_prev.slot(linear_index(&cidx, occ_prev.side)) else {
                    continue;
                };
                let src = prev.slot(cslot);
                if src.iter().all(|v| *v == ZERO) {
                    continue;
                }
                scratch.apply_all(&mats, &dims, nrhs, src, &mut tmp);
                let c = self.freq_frame_at(prev.level_b, &cidx).center;
                for (t, site) in sites_a.iter().enumerate() {
                    let w = cis_turns(self.phase.eval_at(site, &c));
                    for (d, v) in acc[t * nrhs..(t + 1) * nrhs].iter_mut().zip(&tmp[t * nrhs..(t + 1) * nrhs]) {
                        *d += w * v;
                    }
                }
            }
        }
        layer
    }

    /// Spatial-side step from the layer of `parent` to the layer of its child `a`.
    pub fn x_step(&self, parent: &DyadicBox<D>, prev: &CoeffLayer, a: &DyadicBox<D>) -> CoeffLayer {
        debug_assert!(!prev.frequency_side);
        let mut work = CoeffLayer::zeros(prev.level_b, false, prev.slots, prev.r, prev.nrhs, self.probe.as_ref());
        work.data.copy_from_slice(&prev.data);
        self.demodulate(parent, &mut work);
        self.x_step_demodulated(&work, a)
    }

    /// Lattice points per axis of a stop-level spatial box.
    pub fn points_per_leaf(&self) -> usize {
        self.m
    }

    /// Potential on the lattice points of stop-level box `a` (`[point][rhs]`, points in
    /// lexicographic order) from a demodulated layer.
    fn terminate_demodulated(&self, a: &DyadicBox<D>, layer: &CoeffLayer) -> Vec<Complex64> {
        let nrhs = layer.nrhs;
        let m = self.m;
        let count = m.pow(D as u32);
        let lo = a.lower_corner();
        let inv_n = 1.0 / self.n as f64;
        let sites: Vec<Site<D>> = (0..count)
            .map(|p| {
                let pi: [usize; D] = multi_index(p, m);
                // lattice coordinates are exact multiples of 1/N
                let x: [f64; D] = std::array::from_fn(|i| ((lo[i] * self.n as f64).round() + pi[i] as f64) * inv_n);
                self.phase.site(&x)
            })
            .collect();
        let mats: Vec<&Matrix> = vec![&self.term_mat; D];
        let dims = [self.q; D];
        let mut out = vec![ZERO; count * nrhs];
        let mut tmp = vec![ZERO; count * nrhs];
        let mut scratch = TensorScratch::default();
        let (mut wre, mut wim) = (vec![0.0; count], vec![0.0; count]);
        for slot in 0..layer.slots {
            let src = layer.slot(slot);
            if src.iter().all(|v| *v == ZERO) {
                continue;
            }
            scratch.apply_all(&mats, &dims, nrhs, src, &mut tmp);
            let c = self.freq_frame(layer.level_b, slot).center;
            phase_col(&self.phase, &sites, &c, 1.0, &mut wre, &mut wim);
            for p in 0..count {
                let w = Complex64::new(wre[p], wim[p]);
                for (d, v) in out[p * nrhs..(p + 1) * nrhs].iter_mut().zip(&tmp[p * nrhs..(p + 1) * nrhs]) {
                    *d += w * v;
                }
            }
        }
        out
    }

    /// Potential of the stop-level layer of `a` at its lattice points, `[point][rhs]`.
    pub fn terminate(&self, a: &DyadicBox<D>, layer: &CoeffLayer) -> Vec<Complex64> {
        debug_assert!(!layer.frequency_side);
        let mut work = CoeffLayer::zeros(layer.level_b, false, layer.slots, layer.r, layer.nrhs, self.probe.as_ref());
        work.data.copy_from_slice(&layer.data);
        self.demodulate(a, &mut work);
        self.terminate_demodulated(a, &work)
    }

    /// `Σ_t α_t(x) δ^{AB}_t` for one pair: the potential of `B ∩ Ω_j` at `x ∈ A` as encoded
    /// by the layer, using the expansion that matches the layer's side.
    pub fn evaluate_pair(&self, a: &DyadicBox<D>, layer: &CoeffLayer, slot: usize, x: &[f64; D]) -> Vec<Complex64> {
        let nrhs = layer.nrhs;
        let bframe = self.freq_frame(layer.level_b, slot);
        let src = layer.slot(slot);
        let sx = self.phase.site(x);
        let mut out = vec![ZERO; nrhs];
        if layer.frequency_side {
            for t in 0..self.r {
                let w = cis_turns(self.phase.eval_at(&sx, &self.node(&bframe, t)));
                for (o, v) in out.iter_mut().zip(&src[t * nrhs..(t + 1) * nrhs]) {
                    *o += w * v;
                }
            }
        } else {
            let basis = InterpWeights::new(&self.z);
            let fa = self.spatial_frame(a);
            let per_axis: Vec<Vec<f64>> = (0..D)
                .map(|i| {
                    let mut v = vec![0.0; self.q];
                    basis.eval_all((x[i] - fa.center[i]) / fa.width[i], &mut v);
                    v
                })
                .collect();
            let at_x = cis_turns(self.phase.eval_at(&sx, &bframe.center));
            for t in 0..self.r {
                let ti: [usize; D] = multi_index(t, self.q);
                let mt: f64 = (0..D).map(|i| per_axis[i][ti[i]]).product();
                let g = self.phase.site(&self.node(&fa, t));
                let w = at_x * mt * cis_turns(-self.phase.eval_at(&g, &bframe.center));
                for (o, v) in out.iter_mut().zip(&src[t * nrhs..(t + 1) * nrhs]) {
                    *o += w * v;
                }
            }
        }
        out
    }

    fn descend(&self, a: &DyadicBox<D>, mut layer: CoeffLayer, a0: &DyadicBox<D>, out: &mut [Complex64]) {
        let nrhs = layer.nrhs;
        if layer.level_b == self.schedule.stop_level_b {
            self.demodulate(a, &mut layer);
            let vals = self.terminate_demodulated(a, &layer);
            drop(layer);
            // place the leaf block inside the start box's output block
            let m = self.m;
            let side = self.n / self.b;
            let shift = a.level - a0.level;
            let base: [usize; D] = std::array::from_fn(|i| (a.index[i] - (a0.index[i] << shift)) * m);
            for p in 0..m.pow(D as u32) {
                let pi: [usize; D] = multi_index(p, m);
                let gi: [usize; D] = std::array::from_fn(|i| base[i] + pi[i]);
                let g = linear_index(&gi, side);
                out[g * nrhs..(g + 1) * nrhs].copy_from_slice(&vals[p * nrhs..(p + 1) * nrhs]);
            }
            return;
        }
        if layer.frequency_side {
            for k in 0..1usize << D {
                let child = a.child(k);
                let mut next = self.xi_step(&layer, &child);
                if next.level_b == self.schedule.switch_level_b {
                    self.switch(&child, &mut next);
                }
                self.descend(&child, next, a0, out);
            }
        } else {
            self.demodulate(a, &mut layer);
            for k in 0..1usize << D {
                let child = a.child(k);
                let next = self.x_step_demodulated(&layer, &child);
                self.descend(&child, next, a0, out);
            }
        }
    }

    /// Potential of start box `a0` over its `(N/b)^D` lattice points, `[point][rhs]`.
    pub fn apply_start_box(&self, a0: &DyadicBox<D>, f_hat: &[Complex64], nrhs: usize) -> Vec<Complex64> {
        let side = self.n / self.b;
        let mut out = vec![ZERO; side.pow(D as u32) * nrhs];
        let mut layer = self.initialize(a0, f_hat, nrhs);
        if self.schedule.start_level_b == self.schedule.switch_level_b {
            self.switch(a0, &mut layer);
        }
        self.descend(a0, layer, a0, &mut out);
        out
    }

    /// `u^{Ω_j}(x) = Σ_{ξ∈Ω_j} e^{2πiΦ(x,ξ)} f̂(ξ)` (approximately) for every lattice point,
    /// `[spatial index][rhs]`.
    pub fn apply_corona(&self, f_hat: &[Complex64], nrhs: usize) -> Vec<Complex64> {
        let starts = self.start_boxes();
        let blocks: Vec<Vec<Complex64>> = starts.par_iter().map(|a0| self.apply_start_box(a0, f_hat, nrhs)).collect();
        let side = self.n / self.b;
        let mut out = vec![ZERO; self.n.pow(D as u32) * nrhs];
        for (a0, block) in starts.iter().zip(&blocks) {
            for p in 0..side.pow(D as u32) {
                let pi: [usize; D] = multi_index(p, side);
                let gi: [usize; D] = std::array::from_fn(|i| a0.index[i] * side + pi[i]);
                let g = linear_index(&gi, self.n);
                out[g * nrhs..(g + 1) * nrhs].copy_from_slice(&block[p * nrhs..(p + 1) * nrhs]);
            }
        }
        out
    }
}
