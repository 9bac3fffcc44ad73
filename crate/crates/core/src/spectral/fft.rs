//! Three-dimensional complex FFT built from rustfft line transforms.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned forward/inverse transforms for an `M³` cube.
pub struct Fft3 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    /// Shared plan for cube edge `m`; plans are cached process-wide.
    pub fn for_size(m: usize) -> Arc<Fft3> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("fft plan cache poisoned");
        guard
            .entry(m)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft3 {
                    m,
                    forward: planner.plan_fft_forward(m),
                    inverse: planner.plan_fft_inverse(m),
                })
            })
            .clone()
    }

    /// Unnormalized forward DFT, `X[k] = Σ x[j] e^{−2πi j·k/M}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Unnormalized inverse DFT, `x[j] = Σ X[k] e^{+2πi j·k/M}`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        assert_eq!(data.len(), m * m * m, "buffer does not match the FFT cube");
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        let mut line = vec![Complex64::default(); m];

        // axis 2 is contiguous: every run of m values is one line
        plan.process_with_scratch(data, &mut scratch);

        // axis 1
        for slab in data.chunks_exact_mut(m * m) {
            for k in 0..m {
                for j in 0..m {
                    line[j] = slab[j * m + k];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for j in 0..m {
                    slab[j * m + k] = line[j];
                }
            }
        }

        // axis 0
        let plane = m * m;
        for jk in 0..plane {
            for i in 0..m {
                line[i] = data[i * plane + jk];
            }
            plan.process_with_scratch(&mut line, &mut scratch);
            for i in 0..m {
                data[i * plane + jk] = line[i];
            }
        }
    }
}
