use std::f64::consts::PI;

use super::SpectralError;

/// Uniform periodic grid on `[0, 2π)³` with `M` points per axis.
///
/// Spectral coefficients live on the integer lattice `−M/2 < n_i ≤ M/2`,
/// stored in standard FFT order along each axis (axis 0 slowest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    m: usize,
}

impl GridSpec {
    pub fn new(m: usize) -> Result<Self, SpectralError> {
        if m < 4 || m % 2 != 0 {
            return Err(SpectralError::InvalidGrid(m));
        }
        Ok(Self { m })
    }

    /// Points per axis.
    pub fn size(&self) -> usize {
        self.m
    }

    /// Total number of lattice modes (equivalently grid points).
    pub fn len(&self) -> usize {
        self.m * self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed frequency carried by FFT index `i` along one axis.
    #[inline]
    pub fn freq(&self, i: usize) -> i64 {
        if i <= self.m / 2 {
            i as i64
        } else {
            i as i64 - self.m as i64
        }
    }

    /// FFT index of signed frequency `n` (taken modulo `M`).
    #[inline]
    pub fn axis_index(&self, n: i64) -> usize {
        n.rem_euclid(self.m as i64) as usize
    }

    #[inline]
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let m = self.m;
        [
            self.freq(idx / (m * m)),
            self.freq((idx / m) % m),
            self.freq(idx % m),
        ]
    }

    #[inline]
    pub fn index(&self, n: [i64; 3]) -> usize {
        let m = self.m;
        (self.axis_index(n[0]) * m + self.axis_index(n[1])) * m + self.axis_index(n[2])
    }

    /// Flat index of `−n` for the mode stored at `idx`.
    #[inline]
    pub fn conj_index(&self, idx: usize) -> usize {
        let m = self.m;
        let neg = |i: usize| (m - i) % m;
        (neg(idx / (m * m)) * m + neg((idx / m) % m)) * m + neg(idx % m)
    }

    #[inline]
    pub fn norm_sq(&self, idx: usize) -> f64 {
        let n = self.mode(idx);
        (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64
    }

    #[inline]
    pub fn norm(&self, idx: usize) -> f64 {
        self.norm_sq(idx).sqrt()
    }

    /// Largest per-axis frequency kept by the 2/3 rule (`3K < M`).
    pub fn dealias_cutoff(&self) -> i64 {
        ((self.m as i64) - 1) / 3
    }

    #[inline]
    pub fn in_dealiased_band(&self, idx: usize) -> bool {
        let k = self.dealias_cutoff();
        self.mode(idx).iter().all(|c| c.abs() <= k)
    }

    /// True for modes with a component on the Nyquist plane `n_i = M/2`.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let h = (self.m / 2) as i64;
        self.mode(idx).contains(&h)
    }

    /// Physical coordinate of grid point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let m = self.m;
        let h = 2.0 * PI / m as f64;
        [
            (idx / (m * m)) as f64 * h,
            ((idx / m) % m) as f64 * h,
            (idx % m) as f64 * h,
        ]
    }

    /// Quadrature weight `(2π/M)³` of a single grid cell.
    pub fn cell_volume(&self) -> f64 {
        (2.0 * PI / self.m as f64).powi(3)
    }

    /// Whether `idx` is the lexicographically positive member of `{n, −n}`.
    /// Self-conjugate (Nyquist-aliased) modes represent themselves.
    pub fn is_pair_representative(&self, idx: usize) -> bool {
        let n = self.mode(idx);
        if n == [0, 0, 0] {
            return false;
        }
        let c = self.conj_index(idx);
        if c == idx {
            return true;
        }
        let neg = self.mode(c);
        n > neg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_tiny_grids() {
        assert!(GridSpec::new(15).is_err());
        assert!(GridSpec::new(2).is_err());
        assert!(GridSpec::new(0).is_err());
        assert!(GridSpec::new(4).is_ok());
    }

    #[test]
    fn frequency_range_is_half_open_below() {
        let g = GridSpec::new(8).unwrap();
        let f: Vec<i64> = (0..8).map(|i| g.freq(i)).collect();
        assert_eq!(f, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn index_and_mode_are_inverse() {
        let g = GridSpec::new(6).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.index(g.mode(idx)), idx);
            let n = g.mode(idx);
            assert_eq!(g.conj_index(idx), g.index([-n[0], -n[1], -n[2]]));
        }
    }

    #[test]
    fn representatives_cover_each_pair_once() {
        let g = GridSpec::new(6).unwrap();
        for idx in 1..g.len() {
            let c = g.conj_index(idx);
            if c == idx {
                assert!(g.is_pair_representative(idx));
            } else {
                assert!(g.is_pair_representative(idx) ^ g.is_pair_representative(c));
            }
        }
        assert!(!g.is_pair_representative(0));
    }

    #[test]
    fn dealias_cutoff_is_strictly_below_a_third() {
        assert_eq!(GridSpec::new(16).unwrap().dealias_cutoff(), 5);
        assert_eq!(GridSpec::new(48).unwrap().dealias_cutoff(), 15);
        assert_eq!(GridSpec::new(32).unwrap().dealias_cutoff(), 10);
    }
}
