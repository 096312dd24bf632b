//! Lattices, dyadic boxes and the corona decomposition of the frequency domain.
//!
//! Spatial points are `x = (n_1, …, n_d) / N` with `0 ≤ n_i < N`; frequencies are the
//! integer points `-N/2 ≤ ξ_i < N/2`. Both lattices are linearized row-major with the
//! first coordinate slowest.
//!
//! Corona `j` (1-based) is `{ N/2^{j+1} < max_i |ξ_i| ≤ N/2^j }`, and the center is the
//! complement of all coronas. Each corona gets its own frequency tree rooted at the
//! closed box `[-N_j/2, N_j/2]^d`, `N_j = N / 2^{j-1}`.

use crate::{FioError, Result};

pub(crate) fn log2_exact(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(FioError::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros())
}

pub(crate) fn check_dim<const D: usize>() -> Result<()> {
    if D == 2 || D == 3 {
        Ok(())
    } else {
        Err(FioError::InvalidDimension(D))
    }
}

/// Row-major linear index of a multi-index on a `side^D` grid.
#[inline]
pub fn linear_index<const D: usize>(index: &[usize; D], side: usize) -> usize {
    index.iter().fold(0, |acc, &k| acc * side + k)
}

/// Inverse of [`linear_index`].
#[inline]
pub fn multi_index<const D: usize>(mut linear: usize, side: usize) -> [usize; D] {
    let mut out = [0; D];
    for slot in out.iter_mut().rev() {
        *slot = linear % side;
        linear /= side;
    }
    out
}

/// The spatial lattice `X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpatialGrid<const D: usize> {
    n: usize,
}

impl<const D: usize> SpatialGrid<D> {
    pub fn new(n: usize) -> Result<Self> {
        check_dim::<D>()?;
        log2_exact(n)?;
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n.pow(D as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coords(&self, index: usize) -> [usize; D] {
        multi_index(index, self.n)
    }

    pub fn index(&self, coords: &[usize; D]) -> usize {
        linear_index(coords, self.n)
    }

    pub fn point(&self, index: usize) -> [f64; D] {
        let c = self.coords(index);
        let inv = 1.0 / self.n as f64;
        std::array::from_fn(|i| c[i] as f64 * inv)
    }
}

/// The frequency lattice `Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrequencyGrid<const D: usize> {
    n: usize,
}

impl<const D: usize> FrequencyGrid<D> {
    pub fn new(n: usize) -> Result<Self> {
        check_dim::<D>()?;
        log2_exact(n)?;
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n.pow(D as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, index: usize) -> [i64; D] {
        let c: [usize; D] = multi_index(index, self.n);
        let half = (self.n / 2) as i64;
        std::array::from_fn(|i| c[i] as i64 - half)
    }

    pub fn point_f64(&self, index: usize) -> [f64; D] {
        let p = self.point(index);
        std::array::from_fn(|i| p[i] as f64)
    }

    pub fn index_of(&self, xi: &[i64; D]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let mut c = [0usize; D];
        for i in 0..D {
            let k = xi[i] + half;
            if k < 0 || k >= self.n as i64 {
                return None;
            }
            c[i] = k as usize;
        }
        Some(linear_index(&c, self.n))
    }
}

/// Where a frequency falls in the multiscale split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Center,
    /// 1-based corona index.
    Corona(usize),
}

/// Partition `Ω = Ω_d ⊔ Ω_1 ⊔ … ⊔ Ω_J`, `J = log2 N - s`, stored as lattice index sets.
#[derive(Clone, Debug)]
pub struct CoronaDecomposition<const D: usize> {
    n: usize,
    s: u32,
    coronas: Vec<Vec<usize>>,
    center: Vec<usize>,
}

/// Classifies `ξ` for a grid of size `n` with `count` coronas.
pub fn classify<const D: usize>(xi: &[i64; D], n: usize, count: usize) -> Region {
    let m = xi.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0);
    for j in 1..=count {
        if n >> (j + 1) < m && m <= n >> j {
            return Region::Corona(j);
        }
    }
    Region::Center
}

/// Builds the corona decomposition of the `n^D` frequency lattice.
pub fn build_corona_decomposition<const D: usize>(
    n: usize,
    s: u32,
) -> Result<CoronaDecomposition<D>> {
    let grid = FrequencyGrid::<D>::new(n)?;
    let log_n = log2_exact(n)?;
    if s >= log_n {
        return Err(FioError::NoCorona { n, s });
    }
    let count = (log_n - s) as usize;
    let mut coronas = vec![Vec::new(); count];
    let mut center = Vec::new();
    for idx in 0..grid.len() {
        match classify(&grid.point(idx), n, count) {
            Region::Center => center.push(idx),
            Region::Corona(j) => coronas[j - 1].push(idx),
        }
    }
    Ok(CoronaDecomposition {
        n,
        s,
        coronas,
        center,
    })
}

impl<const D: usize> CoronaDecomposition<D> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// Number of coronas `J`.
    pub fn count(&self) -> usize {
        self.coronas.len()
    }

    /// `N_j = N / 2^{j-1}`.
    pub fn scale(&self, j: usize) -> usize {
        self.n >> (j - 1)
    }

    /// Lattice indices of corona `j` (1-based).
    pub fn corona(&self, j: usize) -> &[usize] {
        &self.coronas[j - 1]
    }

    pub fn center(&self) -> &[usize] {
        &self.center
    }

    pub fn classify(&self, xi: &[i64; D]) -> Region {
        classify(xi, self.n, self.count())
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.count() {
            Err(FioError::CoronaOutOfRange {
                j,
                count: self.count(),
            })
        } else {
            Ok(())
        }
    }
}

/// A square (cube) node of a dyadic tree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicBox<const D: usize> {
    pub level: u32,
    pub index: [usize; D],
    pub center: [f64; D],
    pub width: f64,
}

impl<const D: usize> DyadicBox<D> {
    pub fn root(corner: [f64; D], width: f64) -> Self {
        Self {
            level: 0,
            index: [0; D],
            center: std::array::from_fn(|i| corner[i] + 0.5 * width),
            width,
        }
    }

    /// Box at `level` with multi-index `index` under a root with the given corner and width.
    pub fn at(corner: [f64; D], root_width: f64, level: u32, index: [usize; D]) -> Self {
        let width = root_width / (1u64 << level) as f64;
        Self {
            level,
            index,
            center: std::array::from_fn(|i| corner[i] + (index[i] as f64 + 0.5) * width),
            width,
        }
    }

    pub fn lower_corner(&self) -> [f64; D] {
        std::array::from_fn(|i| self.center[i] - 0.5 * self.width)
    }

    /// Child `k`, whose bit `D-1-i` selects the upper half along axis `i`.
    pub fn child(&self, k: usize) -> Self {
        let lo = self.lower_corner();
        let width = 0.5 * self.width;
        let bits = child_bits::<D>(k);
        Self {
            level: self.level + 1,
            index: std::array::from_fn(|i| 2 * self.index[i] + bits[i]),
            center: std::array::from_fn(|i| lo[i] + (bits[i] as f64 + 0.5) * width),
            width,
        }
    }

    pub fn children(&self) -> Vec<Self> {
        (0..1 << D).map(|k| self.child(k)).collect()
    }

    pub fn parent(&self) -> Option<Self> {
        if self.level == 0 {
            return None;
        }
        let lo = self.lower_corner();
        let width = 2.0 * self.width;
        let plo: [f64; D] = std::array::from_fn(|i| lo[i] - (self.index[i] % 2) as f64 * self.width);
        Some(Self {
            level: self.level - 1,
            index: std::array::from_fn(|i| self.index[i] / 2),
            center: std::array::from_fn(|i| plo[i] + 0.5 * width),
            width,
        })
    }

    /// Half-open containment `[lo, lo + w)`.
    pub fn contains(&self, p: &[f64; D]) -> bool {
        let lo = self.lower_corner();
        (0..D).all(|i| p[i] >= lo[i] && p[i] < lo[i] + self.width)
    }
}

/// Per-axis child bits of child number `k` (first axis is the most significant bit).
#[inline]
pub fn child_bits<const D: usize>(k: usize) -> [usize; D] {
    std::array::from_fn(|i| (k >> (D - 1 - i)) & 1)
}

/// Levels visited by the butterfly for one corona, expressed as frequency-tree levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeLevelSchedule {
    /// `L = log2 N_j`; every stage pairs spatial level `L - ℓ_B` with frequency level `ℓ_B`.
    pub l_total: u32,
    /// Frequency boxes of width `b`.
    pub start_level_b: u32,
    /// Largest frequency width not exceeding `√N_j`.
    pub switch_level_b: u32,
    /// Frequency boxes of width `N_j / b`.
    pub stop_level_b: u32,
}

/// Level schedule of a corona of scale `n_j` with leaf width `b`.
pub fn level_schedule(n_j: usize, b: usize) -> Result<TreeLevelSchedule> {
    let l_total = log2_exact(n_j)?;
    if b < 4 || !b.is_power_of_two() {
        return Err(FioError::InvalidBoxWidth(b));
    }
    if n_j < b * b {
        return Err(FioError::CoronaTooSmall {
            n_j,
            b_squared: b * b,
        });
    }
    let log_b = b.trailing_zeros();
    Ok(TreeLevelSchedule {
        l_total,
        start_level_b: l_total - log_b,
        switch_level_b: l_total.div_ceil(2),
        stop_level_b: log_b,
    })
}

impl TreeLevelSchedule {
    pub fn level_a(&self, level_b: u32) -> u32 {
        self.l_total - level_b
    }

    pub fn width_b(&self, level_b: u32) -> f64 {
        (1u64 << (self.l_total - level_b)) as f64
    }

    pub fn width_a(&self, level_b: u32) -> f64 {
        1.0 / (1u64 << self.level_a(level_b)) as f64
    }

    /// Frequency levels from start down to stop.
    pub fn levels(&self) -> impl Iterator<Item = u32> {
        (self.stop_level_b..=self.start_level_b).rev()
    }

    /// True when the coefficients at `level_b` are still expressed on frequency grids.
    pub fn is_frequency_side(&self, level_b: u32) -> bool {
        level_b >= self.switch_level_b
    }
}

/// Occupied boxes of one level of a corona tree.
#[derive(Clone, Debug)]
pub struct LevelOccupancy {
    pub side: usize,
    /// Linear indices of boxes intersecting the corona, ascending.
    pub nonempty: Vec<usize>,
    slot_of: Vec<u32>,
}

impl LevelOccupancy {
    pub fn slot(&self, linear: usize) -> Option<usize> {
        match self.slot_of[linear] {
            u32::MAX => None,
            s => Some(s as usize),
        }
    }

    pub fn is_empty_box(&self, linear: usize) -> bool {
        self.slot_of[linear] == u32::MAX
    }
}

/// Frequency tree of one corona with cached emptiness flags for every level.
///
/// Lattice points are assigned to boxes half-open along shared faces; the outer face at
/// `+N_j/2` is closed so points with `ξ_i = N_j/2` (present for `j ≥ 2`) land in the last box.
#[derive(Clone, Debug)]
pub struct CoronaTree<const D: usize> {
    pub j: usize,
    pub n: usize,
    pub n_j: usize,
    pub root: DyadicBox<D>,
    levels: Vec<LevelOccupancy>,
}

/// Builds the frequency tree for corona `j`.
pub fn corona_bounding_tree<const D: usize>(
    j: usize,
    corona: &CoronaDecomposition<D>,
) -> Result<CoronaTree<D>> {
    corona.check_index(j)?;
    let n = corona.n();
    let n_j = corona.scale(j);
    let l_total = n_j.trailing_zeros();
    let half = (n_j / 2) as f64;
    let root = DyadicBox::root([-half; D], n_j as f64);
    let mut tree = CoronaTree {
        j,
        n,
        n_j,
        root,
        levels: Vec::with_capacity(l_total as usize + 1),
    };
    for level in 0..=l_total {
        let side = 1usize << level;
        let count = side.pow(D as u32);
        let mut nonempty = Vec::new();
        let mut slot_of = vec![u32::MAX; count];
        for linear in 0..count {
            let index = multi_index::<D>(linear, side);
            if tree.box_intersects_corona(level, &index) {
                slot_of[linear] = nonempty.len() as u32;
                nonempty.push(linear);
            }
        }
        tree.levels.push(LevelOccupancy {
            side,
            nonempty,
            slot_of,
        });
    }
    Ok(tree)
}

impl<const D: usize> CoronaTree<D> {
    pub fn l_total(&self) -> u32 {
        self.n_j.trailing_zeros()
    }

    pub fn box_at(&self, level: u32, index: [usize; D]) -> DyadicBox<D> {
        DyadicBox::at(self.root.lower_corner(), self.root.width, level, index)
    }

    pub fn occupancy(&self, level: u32) -> &LevelOccupancy {
        &self.levels[level as usize]
    }

    pub fn is_empty(&self, level: u32, index: &[usize; D]) -> bool {
        let occ = self.occupancy(level);
        occ.is_empty_box(linear_index(index, occ.side))
    }

    /// Inclusive integer ranges of lattice coordinates assigned to a box (before
    /// intersecting with `Ω`).
    pub fn point_range(&self, level: u32, index: &[usize; D]) -> [(i64, i64); D] {
        let w = (self.n_j >> level) as i64;
        let side = 1usize << level;
        let half = (self.n_j / 2) as i64;
        std::array::from_fn(|i| {
            let lo = -half + index[i] as i64 * w;
            let hi = if index[i] + 1 == side { half } else { lo + w - 1 };
            (lo, hi)
        })
    }

    /// Box containing a lattice point of the corona at `level`.
    pub fn box_of_point(&self, level: u32, xi: &[i64; D]) -> [usize; D] {
        let w = (self.n_j >> level) as i64;
        let side = 1usize << level;
        let half = (self.n_j / 2) as i64;
        std::array::from_fn(|i| (((xi[i] + half) / w) as usize).min(side - 1))
    }

    fn box_intersects_corona(&self, level: u32, index: &[usize; D]) -> bool {
        let top = (self.n / 2) as i64 - 1;
        let quarter = (self.n_j / 4) as i64;
        self.point_range(level, index).iter().any(|&(lo, hi)| {
            let hi = hi.min(top);
            lo <= hi && lo.abs().max(hi.abs()) > quarter
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enumerate_partition<const D: usize>(n: usize, s: u32) {
        let dec = build_corona_decomposition::<D>(n, s).unwrap();
        let grid = FrequencyGrid::<D>::new(n).unwrap();
        let mut seen = vec![0u8; grid.len()];
        for &i in dec.center() {
            seen[i] += 1;
        }
        for j in 1..=dec.count() {
            for &i in dec.corona(j) {
                seen[i] += 1;
                let m = grid.point(i).iter().map(|v| v.abs()).max().unwrap() as usize;
                assert!(n >> (j + 1) < m && m <= n >> j);
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        let total: usize = dec.center().len() + (1..=dec.count()).map(|j| dec.corona(j).len()).sum::<usize>();
        assert_eq!(total, grid.len());
    }

    #[test]
    fn partition_is_exhaustive() {
        for n in [16, 32, 64] {
            enumerate_partition::<2>(n, 2);
            enumerate_partition::<2>(n, 3);
            enumerate_partition::<3>(n, 2);
            enumerate_partition::<3>(n, 3);
        }
    }

    #[test]
    fn n256_has_three_coronas_and_33_square_center() {
        let dec = build_corona_decomposition::<2>(256, 5).unwrap();
        assert_eq!(dec.count(), 3);
        assert_eq!(dec.center().len(), 33 * 33);
    }

    #[test]
    fn n16_single_corona_by_enumeration() {
        let dec = build_corona_decomposition::<2>(16, 3).unwrap();
        assert_eq!(dec.count(), 1);
        // brute force: 4 < max(|n1|,|n2|) <= 8 over n_i in [-8, 8)
        let mut corona = 0;
        for a in -8i64..8 {
            for b in -8i64..8 {
                let m = a.abs().max(b.abs());
                if 4 < m && m <= 8 {
                    corona += 1;
                }
            }
        }
        assert_eq!(dec.corona(1).len(), corona);
        assert_eq!(dec.corona(1).len() + dec.center().len(), 256);
        assert_eq!(dec.center().len(), 81);
    }

    #[test]
    fn quarter_boundary_goes_to_second_corona() {
        for n in [32usize, 64, 256] {
            let q = (n / 4) as i64;
            assert_eq!(classify(&[q, 0], n, 3), Region::Corona(2));
            assert_eq!(classify(&[0, -q], n, 3), Region::Corona(2));
            assert_eq!(classify(&[q + 1, 0], n, 3), Region::Corona(1));
        }
    }

    #[test]
    fn corona_distance_from_origin() {
        for n in [16usize, 32, 64] {
            let dec = build_corona_decomposition::<2>(n, 2).unwrap();
            let grid = FrequencyGrid::<2>::new(n).unwrap();
            for j in 1..=dec.count() {
                let min = dec
                    .corona(j)
                    .iter()
                    .map(|&i| grid.point(i).iter().map(|v| v.abs()).max().unwrap())
                    .min()
                    .unwrap();
                assert_eq!(min as usize, (n >> (j + 1)) + 1);
                assert!(min as f64 > dec.scale(j) as f64 / 4.0);
            }
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(
            build_corona_decomposition::<2>(100, 2).unwrap_err(),
            FioError::NotPowerOfTwo(100)
        );
        assert!(matches!(
            build_corona_decomposition::<2>(32, 5),
            Err(FioError::NoCorona { .. })
        ));
    }

    #[test]
    fn tree_roots_follow_corona_scale() {
        let dec = build_corona_decomposition::<2>(256, 5).unwrap();
        let t1 = corona_bounding_tree(1, &dec).unwrap();
        assert_eq!(t1.root.width, 256.0);
        assert_eq!(t1.root.center, [0.0, 0.0]);
        let t3 = corona_bounding_tree(3, &dec).unwrap();
        assert_eq!(t3.root.width, 64.0);
        assert!(corona_bounding_tree(4, &dec).is_err());
    }

    #[test]
    fn emptiness_matches_point_enumeration() {
        for (n, s) in [(64usize, 3u32), (32, 2)] {
            let dec = build_corona_decomposition::<2>(n, s).unwrap();
            let grid = FrequencyGrid::<2>::new(n).unwrap();
            for j in 1..=dec.count() {
                let tree = corona_bounding_tree(j, &dec).unwrap();
                for level in 0..=tree.l_total() {
                    let side = 1usize << level;
                    let mut hit = vec![false; side * side];
                    for &p in dec.corona(j) {
                        let b = tree.box_of_point(level, &grid.point(p));
                        hit[linear_index(&b, side)] = true;
                    }
                    for (lin, &h) in hit.iter().enumerate() {
                        assert_eq!(!tree.occupancy(level).is_empty_box(lin), h, "n={n} j={j} level={level}");
                    }
                }
            }
        }
    }

    #[test]
    fn n64_level3_center_block_is_empty() {
        let dec = build_corona_decomposition::<2>(64, 5).unwrap();
        let tree = corona_bounding_tree(1, &dec).unwrap();
        let occ = tree.occupancy(3);
        let empty: Vec<[usize; 2]> = (0..64)
            .filter(|&l| occ.is_empty_box(l))
            .map(|l| multi_index::<2>(l, 8))
            .collect();
        // boxes covering [-16, 15]^2 hold no point with max|ξ_i| > 16
        assert_eq!(empty.len(), 16);
        assert!(empty.iter().all(|b| (2..6).contains(&b[0]) && (2..6).contains(&b[1])));
    }

    #[test]
    fn dyadic_children_tile_parent() {
        let root = DyadicBox::<2>::root([0.0, 0.0], 1.0);
        let mut stack = vec![root];
        while let Some(b) = stack.pop() {
            if b.level >= 3 {
                continue;
            }
            let kids = b.children();
            assert_eq!(kids.len(), 4);
            let area: f64 = kids.iter().map(|c| c.width * c.width).sum();
            assert!((area - b.width * b.width).abs() < 1e-15);
            for c in kids {
                assert_eq!(c.parent().unwrap(), b);
                assert!(b.contains(&c.center));
                stack.push(c);
            }
        }
        let b3 = DyadicBox::<3>::at([-32.0; 3], 64.0, 2, [1, 3, 0]);
        assert_eq!(b3.width, 16.0);
        assert_eq!(b3.center, [-32.0 + 24.0, -32.0 + 56.0, -32.0 + 8.0]);
        for k in 0..8 {
            assert_eq!(b3.child(k).parent().unwrap(), b3);
        }
    }

    #[test]
    fn schedules() {
        let s = level_schedule(256, 8).unwrap();
        assert_eq!((s.start_level_b, s.switch_level_b, s.stop_level_b), (5, 4, 3));
        assert_eq!(s.width_b(4), 16.0);
        let s = level_schedule(64, 8).unwrap();
        assert_eq!((s.start_level_b, s.switch_level_b, s.stop_level_b), (3, 3, 3));
        let s = level_schedule(512, 8).unwrap();
        assert_eq!((s.start_level_b, s.switch_level_b, s.stop_level_b), (6, 5, 3));
        assert_eq!(s.width_b(5), 16.0);
        assert!(s.width_b(5) <= (512f64).sqrt() && s.width_b(4) > (512f64).sqrt());
        for n_j in [16usize, 32, 64, 128, 256, 512, 1024] {
            for b in [4usize, 8] {
                let Ok(s) = level_schedule(n_j, b) else {
                    assert!(n_j < b * b);
                    continue;
                };
                assert!(s.stop_level_b <= s.switch_level_b && s.switch_level_b <= s.start_level_b);
                for lb in s.levels() {
                    assert_eq!(s.level_a(lb) + lb, s.l_total);
                    assert_eq!(s.width_a(lb) * s.width_b(lb), 1.0);
                }
            }
        }
        assert!(matches!(level_schedule(32, 8), Err(FioError::CoronaTooSmall { .. })));
        assert_eq!(level_schedule(64, 6).unwrap_err(), FioError::InvalidBoxWidth(6));
    }
}
