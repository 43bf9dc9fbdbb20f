//! Zero-padded FFT convolution for the kernel integral on full uniform grids.
//!
//! The integral term is a discrete convolution with the tap table
//! `t[o] = J(h * |o|)` over lattice offsets `o`. Padding each axis to at
//! least `n + 2l + 1` (rounded up to a power of two) makes the circular
//! convolution equal to the linear one.

use std::sync::{Arc, Mutex};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

pub(crate) struct FftConvolver {
    nx: usize,
    ny: usize,
    mx: usize,
    my: usize,
    kernel_hat: Vec<Complex<f64>>,
    fft_row_fwd: Arc<dyn Fft<f64>>,
    fft_row_inv: Arc<dyn Fft<f64>>,
    fft_col_fwd: Option<Arc<dyn Fft<f64>>>,
    fft_col_inv: Option<Arc<dyn Fft<f64>>>,
    /// Reusable scratch buffers; popped per call so `apply` stays re-entrant.
    pool: Mutex<Vec<Vec<Complex<f64>>>>,
    scale: f64,
}

fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

impl FftConvolver {
    /// `taps(dx, dy)` must return the same values the other backends use.
    pub fn new(grid: &Grid, l: usize, taps: impl Fn(usize, usize) -> f64) -> FftConvolver {
        assert!(grid.is_full(), "FFT backend requires an unmasked grid");
        let (nx, ny) = grid.lattice_shape();
        let lx = l.min(nx - 1);
        let ly = if ny > 1 { l.min(ny - 1) } else { 0 };
        let mx = next_pow2(nx + 2 * lx + 1);
        let my = if ny > 1 { next_pow2(ny + 2 * ly + 1) } else { 1 };

        // kernel laid out with negative offsets wrapped
        let mut kern = vec![Complex::new(0.0, 0.0); mx * my];
        for oy in -(ly as isize)..=(ly as isize) {
            let iy = oy.rem_euclid(my as isize) as usize;
            for ox in -(lx as isize)..=(lx as isize) {
                let ix = ox.rem_euclid(mx as isize) as usize;
                kern[ix + mx * iy] =
                    Complex::new(taps(ox.unsigned_abs(), oy.unsigned_abs()), 0.0);
            }
        }

        let mut planner = FftPlanner::new();
        let fft_row_fwd = planner.plan_fft_forward(mx);
        let fft_row_inv = planner.plan_fft_inverse(mx);
        let (fft_col_fwd, fft_col_inv) = if my > 1 {
            (
                Some(planner.plan_fft_forward(my)),
                Some(planner.plan_fft_inverse(my)),
            )
        } else {
            (None, None)
        };

        let mut conv = FftConvolver {
            nx,
            ny,
            mx,
            my,
            kernel_hat: Vec::new(),
            fft_row_fwd,
            fft_row_inv,
            fft_col_fwd,
            fft_col_inv,
            pool: Mutex::new(Vec::new()),
            scale: grid.cell_measure() / (mx as f64 * my as f64),
        };
        conv.forward_2d(&mut kern);
        conv.kernel_hat = kern;
        conv
    }

    fn forward_2d(&self, buf: &mut [Complex<f64>]) {
        self.fft_row_fwd.process(buf);
        if let Some(col) = &self.fft_col_fwd {
            self.columns(buf, |c| col.process(c));
        }
    }

    fn inverse_2d(&self, buf: &mut [Complex<f64>]) {
        self.fft_row_inv.process(buf);
        if let Some(col) = &self.fft_col_inv {
            self.columns(buf, |c| col.process(c));
        }
    }

    fn columns(&self, buf: &mut [Complex<f64>], f: impl Fn(&mut [Complex<f64>])) {
        let mut col = vec![Complex::new(0.0, 0.0); self.my];
        for x in 0..self.mx {
            for y in 0..self.my {
                col[y] = buf[x + self.mx * y];
            }
            f(&mut col);
            for y in 0..self.my {
                buf[x + self.mx * y] = col[y];
            }
        }
    }

    fn take_buffer(&self) -> Vec<Complex<f64>> {
        let mut pool = self.pool.lock().unwrap();
        match pool.pop() {
            Some(mut b) => {
                b.iter_mut().for_each(|z| *z = Complex::new(0.0, 0.0));
                b
            }
            None => vec![Complex::new(0.0, 0.0); self.mx * self.my],
        }
    }

    /// Kernel integral `(Ku)_i = cell_measure * sum_j t(i-j) u_j`.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.nx * self.ny);
        let mut buf = self.take_buffer();
        for y in 0..self.ny {
            for x in 0..self.nx {
                buf[x + self.mx * y] = Complex::new(u[x + self.nx * y], 0.0);
            }
        }
        self.forward_2d(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.inverse_2d(&mut buf);
        for y in 0..self.ny {
            for x in 0..self.nx {
                out[x + self.nx * y] = buf[x + self.mx * y].re * self.scale;
            }
        }
        self.pool.lock().unwrap().push(buf);
    }
}

impl std::fmt::Debug for FftConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftConvolver")
            .field("lattice", &(self.nx, self.ny))
            .field("padded", &(self.mx, self.my))
            .finish()
    }
}
