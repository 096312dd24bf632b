use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use num_complex::Complex64;

/// Live and peak number of coefficient entries held by [`CoeffLayer`]s.
#[derive(Debug, Default)]
pub struct MemoryProbe {
    live: AtomicUsize,
    peak: AtomicUsize,
}

impl MemoryProbe {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    fn alloc(&self, n: usize) {
        let now = self.live.fetch_add(n, Ordering::SeqCst) + n;
        self.peak.fetch_max(now, Ordering::SeqCst);
    }

    fn free(&self, n: usize) {
        self.live.fetch_sub(n, Ordering::SeqCst);
    }

    pub fn live(&self) -> usize {
        self.live.load(Ordering::SeqCst)
    }

    pub fn peak(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }

    pub fn reset_peak(&self) {
        self.peak.store(self.live(), Ordering::SeqCst);
    }
}

/// Coefficients of one spatial box against every non-empty frequency box of a level.
///
/// Layout is `[slot][t][rhs]`: slot is the position of the frequency box in the level's
/// non-empty list, `t` the tensor Chebyshev index.
#[derive(Debug)]
pub struct CoeffLayer {
    pub level_b: u32,
    /// True while the coefficients live on frequency grids (before the switch).
    pub frequency_side: bool,
    pub slots: usize,
    pub r: usize,
    pub nrhs: usize,
    pub data: Vec<Complex64>,
    probe: Option<Arc<MemoryProbe>>,
}

impl CoeffLayer {
    pub fn zeros(
        level_b: u32,
        frequency_side: bool,
        slots: usize,
        r: usize,
        nrhs: usize,
        probe: Option<&Arc<MemoryProbe>>,
    ) -> Self {
        let len = slots * r * nrhs;
        if let Some(p) = probe {
            p.alloc(len);
        }
        Self {
            level_b,
            frequency_side,
            slots,
            r,
            nrhs,
            data: vec![Complex64::new(0.0, 0.0); len],
            probe: probe.cloned(),
        }
    }

    pub fn block_len(&self) -> usize {
        self.r * self.nrhs
    }

    pub fn slot(&self, s: usize) -> &[Complex64] {
        let n = self.block_len();
        &self.data[s * n..(s + 1) * n]
    }

    pub fn slot_mut(&mut self, s: usize) -> &mut [Complex64] {
        let n = self.block_len();
        &mut self.data[s * n..(s + 1) * n]
    }
}

impl Drop for CoeffLayer {
    fn drop(&mut self) {
        if let Some(p) = &self.probe {
            p.free(self.data.len());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_tracks_live_and_peak() {
        let probe = MemoryProbe::new();
        {
            let a = CoeffLayer::zeros(3, true, 4, 9, 2, Some(&probe));
            assert_eq!(probe.live(), 72);
            {
                let _b = CoeffLayer::zeros(2, true, 1, 9, 2, Some(&probe));
                assert_eq!(probe.live(), 90);
            }
            assert_eq!(a.slot(3).len(), 18);
            assert_eq!(probe.live(), 72);
        }
        assert_eq!(probe.live(), 0);
        assert_eq!(probe.peak(), 90);
    }
}
