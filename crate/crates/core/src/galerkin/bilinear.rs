//! Pseudo-spectral evaluation of `∇·(a ⊗ b)` with two real transforms
//! packed into each complex FFT.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::spectral::{Fft3, GridSpec};

/// Reusable buffers and mode tables for one grid.
pub(crate) struct Bilinear {
    grid: GridSpec,
    fft: Arc<Fft3>,
    pub(crate) modes: Vec<[f64; 3]>,
    pub(crate) band: Vec<bool>,
    conj: Vec<usize>,
    buf: Vec<Complex64>,
    fwd_scale: f64,
    inv_scale: f64,
}

const SYMMETRIC: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

impl Bilinear {
    pub(crate) fn new(grid: GridSpec) -> Self {
        let len = grid.len();
        Self {
            grid,
            fft: Fft3::for_size(grid.size()),
            modes: (0..len)
                .map(|i| {
                    let n = grid.mode(i);
                    [n[0] as f64, n[1] as f64, n[2] as f64]
                })
                .collect(),
            band: (0..len).map(|i| grid.in_dealiased_band(i)).collect(),
            conj: (0..len).map(|i| grid.conj_index(i)).collect(),
            buf: vec![Complex64::default(); len],
            fwd_scale: (2.0 * PI).powf(1.5) / len as f64,
            inv_scale: (2.0 * PI).powf(-1.5),
        }
    }

    /// Point values of `count` conjugate-symmetric scalar spectra, stored
    /// back to back in `hat`, written back to back into `out`.
    pub(crate) fn synthesize_into(&mut self, hat: &[Complex64], count: usize, out: &mut [f64]) {
        let len = self.grid.len();
        let mut c = 0;
        while c < count {
            let pair = c + 1 < count;
            let a = &hat[c * len..(c + 1) * len];
            if pair {
                let b = &hat[(c + 1) * len..(c + 2) * len];
                for ((z, &x), &y) in self.buf.iter_mut().zip(a).zip(b) {
                    *z = x + Complex64::i() * y;
                }
            } else {
                self.buf.copy_from_slice(a);
            }
            self.fft.inverse(&mut self.buf);
            for (k, z) in self.buf.iter().enumerate() {
                out[c * len + k] = z.re * self.inv_scale;
                if pair {
                    out[(c + 1) * len + k] = z.im * self.inv_scale;
                }
            }
            c += if pair { 2 } else { 1 };
        }
    }

    /// Spectra of two real fields from one forward transform.
    fn forward_pair(&mut self, p: &[f64], q: Option<&[f64]>, out_p: &mut [Complex64], out_q: &mut [Complex64]) {
        match q {
            Some(q) => {
                for ((z, &x), &y) in self.buf.iter_mut().zip(p).zip(q) {
                    *z = Complex64::new(x, y);
                }
            }
            None => {
                for (z, &x) in self.buf.iter_mut().zip(p) {
                    *z = Complex64::new(x, 0.0);
                }
            }
        }
        self.fft.forward(&mut self.buf);
        let s = self.fwd_scale;
        for idx in 0..self.buf.len() {
            let z = self.buf[idx];
            let zc = self.buf[self.conj[idx]].conj();
            if q.is_some() {
                out_p[idx] = 0.5 * (z + zc) * s;
                out_q[idx] = Complex64::new(0.0, -0.5) * (z - zc) * s;
            } else {
                out_p[idx] = z * s;
            }
        }
    }

    /// `(∇·(a ⊗ b))_i = ∂_j(a_i b_j)` on band modes (zero elsewhere), for
    /// real point values `a`, `b` of three components each.
    pub(crate) fn divergence_of_product(&mut self, a: &[f64], b: &[f64], symmetric: bool, out: &mut [Complex64]) {
        let len = self.grid.len();
        let pairs: Vec<(usize, usize)> = if symmetric {
            SYMMETRIC.to_vec()
        } else {
            (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect()
        };
        let products: Vec<Vec<f64>> = pairs
            .iter()
            .map(|&(i, j)| {
                let ai = &a[i * len..(i + 1) * len];
                let bj = &b[j * len..(j + 1) * len];
                ai.iter().zip(bj).map(|(x, y)| x * y).collect()
            })
            .collect();
        out.iter_mut().for_each(|z| *z = Complex64::default());
        let mut sp = vec![Complex64::default(); len];
        let mut sq = vec![Complex64::default(); len];
        for chunk in (0..pairs.len()).collect::<Vec<_>>().chunks(2) {
            let second = chunk.get(1).map(|&k| products[k].as_slice());
            self.forward_pair(&products[chunk[0]], second, &mut sp, &mut sq);
            for (slot, &k) in chunk.iter().enumerate() {
                let spec = if slot == 0 { &sp } else { &sq };
                let (i, j) = pairs[k];
                for idx in 0..len {
                    if !self.band[idx] {
                        continue;
                    }
                    let n = self.modes[idx];
                    let d = Complex64::i() * spec[idx];
                    out[i * len + idx] += d * n[j];
                    if symmetric && i != j {
                        out[j * len + idx] += d * n[i];
                    }
                }
            }
        }
    }
}
