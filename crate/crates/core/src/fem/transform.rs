//! Discrete sine transform on the interior nodes of a uniform mesh.
//!
//! Mode `j` of the eigenbasis restricted to the nodes `i / n` only depends on
//! `j mod 2n` up to sign, so any number of modes can be folded onto the
//! `n - 1` patterns that are visible at the nodes.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct SineTransform {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransform").field("n_cells", &self.n).finish()
    }
}

/// Scratch space for [`SineTransform::dst`].
#[derive(Clone, Debug, Default)]
pub struct DstWorkspace {
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl SineTransform {
    pub fn new(n_cells: usize) -> Self {
        assert!(n_cells >= 2);
        let fft = FftPlanner::new().plan_fft_forward(2 * n_cells);
        Self { n: n_cells, fft }
    }

    pub fn n_cells(&self) -> usize {
        self.n
    }

    pub fn workspace(&self) -> DstWorkspace {
        DstWorkspace {
            buf: vec![Complex::default(); 2 * self.n],
            scratch: vec![Complex::default(); self.fft.get_inplace_scratch_len()],
        }
    }

    /// `out[i-1] = sum_{j=1}^{n-1} a[j-1] sin(j pi i / n)` for `i = 1..n-1`.
    pub fn dst(&self, a: &[f64], out: &mut [f64], ws: &mut DstWorkspace) {
        let n = self.n;
        assert_eq!(a.len(), n - 1);
        assert_eq!(out.len(), n - 1);
        if ws.buf.len() != 2 * n {
            *ws = self.workspace();
        }
        let buf = &mut ws.buf;
        buf[0] = Complex::default();
        buf[n] = Complex::default();
        for j in 1..n {
            buf[j] = Complex::new(a[j - 1], 0.0);
            buf[2 * n - j] = Complex::new(-a[j - 1], 0.0);
        }
        self.fft.process_with_scratch(buf, &mut ws.scratch);
        for i in 1..n {
            out[i - 1] = -0.5 * buf[i].im;
        }
    }

    pub fn dst_alloc(&self, a: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n - 1];
        self.dst(a, &mut out, &mut self.workspace());
        out
    }

    /// Adds `c[j-1]` (mode `j = 1..=c.len()`) onto its node-visible pattern.
    /// `out` is overwritten.
    pub fn fold(&self, c: &[f64], out: &mut [f64]) {
        let n = self.n;
        assert_eq!(out.len(), n - 1);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (idx, &cj) in c.iter().enumerate() {
            let r = (idx + 1) % (2 * n);
            if r == 0 || r == n {
                continue;
            }
            if r < n {
                out[r - 1] += cj;
            } else {
                out[2 * n - r - 1] -= cj;
            }
        }
    }

    /// Extends `s[j-1] = sum_i v_i sin(j pi i / n)`, known for `j < n`, to any `j >= 1`.
    pub fn alias(&self, s: &[f64], j: usize) -> f64 {
        let n = self.n;
        let r = j % (2 * n);
        if r == 0 || r == n {
            0.0
        } else if r < n {
            s[r - 1]
        } else {
            -s[2 * n - r - 1]
        }
    }
}
