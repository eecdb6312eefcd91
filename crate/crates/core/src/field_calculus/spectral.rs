//! 2D FFT plumbing on the periodic grid.
//!
//! Plans are cached per thread; every call owns its scratch buffers.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::GridSpec;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Rc<Plans>>> = RefCell::new(HashMap::new());
}

fn plans(n: usize) -> Rc<Plans> {
    PLANS.with(|cell| {
        cell.borrow_mut()
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Rc::new(Plans {
                    forward: planner.plan_fft_forward(n),
                    inverse: planner.plan_fft_inverse(n),
                })
            })
            .clone()
    })
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for r in 0..n {
        for c in 0..n {
            dst[c * n + r] = src[r * n + c];
        }
    }
}

fn fft2_in_place(buf: &mut Vec<Complex64>, n: usize, fft: &Arc<dyn Fft<f64>>) {
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(buf, &mut scratch);
    let mut t = vec![Complex64::default(); n * n];
    transpose(buf, &mut t, n);
    fft.process_with_scratch(&mut t, &mut scratch);
    transpose(&t, buf, n);
}

/// Fourier coefficients of a real grid array (unnormalized forward DFT).
///
/// Bin `(kx, ky)` is stored at `ky * n + kx`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: GridSpec,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn forward(grid: GridSpec, values: &[f64]) -> Spectrum {
        let n = grid.n();
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2_in_place(&mut data, n, &plans(n).forward);
        Spectrum { grid, data }
    }

    pub fn zeros(grid: GridSpec) -> Spectrum {
        Spectrum { grid, data: vec![Complex64::default(); grid.len()] }
    }

    /// Back to physical space, keeping the real part.
    pub fn inverse(mut self) -> Vec<f64> {
        let n = self.grid.n();
        fft2_in_place(&mut self.data, n, &plans(n).inverse);
        let norm = 1.0 / (n * n) as f64;
        self.data.into_iter().map(|c| c.re * norm).collect()
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Multiply each bin by `f(kx_bin, ky_bin)`.
    pub fn apply(&mut self, f: impl Fn(usize, usize) -> Complex64) {
        let n = self.grid.n();
        for ky in 0..n {
            for kx in 0..n {
                self.data[ky * n + kx] *= f(kx, ky);
            }
        }
    }

    /// Copy multiplied by `f(kx_bin, ky_bin)`.
    pub fn multiplied(&self, f: impl Fn(usize, usize) -> Complex64) -> Spectrum {
        let mut out = self.clone();
        out.apply(f);
        out
    }

    /// Spectral first derivative along `axis` (0 = x, 1 = y).
    pub fn derivative(&self, axis: usize) -> Spectrum {
        let g = self.grid;
        self.multiplied(|kx, ky| {
            let k = if axis == 0 { g.derivative_wavenumber(kx) } else { g.derivative_wavenumber(ky) };
            Complex64::new(0.0, k)
        })
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: Complex64, other: &Spectrum) {
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += s * b);
    }

    /// Zero every bin outside the 2/3-rule square.
    pub fn truncate(&mut self) {
        let g = self.grid;
        let cut = g.dealias_cutoff();
        self.apply(|kx, ky| {
            if g.mode(kx).abs() > cut || g.mode(ky).abs() > cut {
                Complex64::default()
            } else {
                Complex64::new(1.0, 0.0)
            }
        });
    }

    /// Largest `max(|kx|, |ky|)` over bins with magnitude above `tol · max|ĉ|`.
    pub fn bandwidth(&self, tol: f64) -> i64 {
        let n = self.grid.n();
        let peak = self.data.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        if peak == 0.0 {
            return 0;
        }
        let mut band = 0;
        for ky in 0..n {
            for kx in 0..n {
                if self.data[ky * n + kx].norm() > tol * peak {
                    band = band.max(self.grid.mode(kx).abs().max(self.grid.mode(ky).abs()));
                }
            }
        }
        band
    }

    /// Evaluate the trigonometric interpolant at an arbitrary point.
    ///
    /// Nyquist bins are split symmetrically, so the result is real and
    /// reproduces grid values exactly.
    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        let g = self.grid;
        let n = g.n();
        let scale = 2.0 * std::f64::consts::PI / g.length();
        let ex: Vec<Complex64> = (0..n).map(|i| phase(g.mode(i), n, x * scale)).collect();
        let ey: Vec<Complex64> = (0..n).map(|i| phase(g.mode(i), n, y * scale)).collect();
        let mut acc = 0.0;
        for ky in 0..n {
            let mut row = Complex64::default();
            for kx in 0..n {
                row += self.data[ky * n + kx] * ex[kx];
            }
            acc += (row * ey[ky]).re;
        }
        acc / (n * n) as f64
    }
}

// e^{i k θ}, with the Nyquist mode replaced by cos(n θ / 2).
fn phase(k: i64, n: usize, theta: f64) -> Complex64 {
    if k == (n / 2) as i64 {
        Complex64::new((k as f64 * theta).cos(), 0.0)
    } else {
        Complex64::from_polar(1.0, k as f64 * theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let g = GridSpec::periodic(16).unwrap();
        let v: Vec<f64> = g.points().map(|(_, x, y)| (3.0 * x).sin() * y.cos() + 0.25).collect();
        let back = Spectrum::forward(g, &v).inverse();
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn evaluate_reproduces_grid_and_band_limited_functions() {
        let g = GridSpec::periodic(16).unwrap();
        let f = |x: f64, y: f64| (2.0 * x).cos() + (x - 3.0 * y).sin() + 0.5;
        let v: Vec<f64> = g.points().map(|(_, x, y)| f(x, y)).collect();
        let s = Spectrum::forward(g, &v);
        assert!((s.evaluate(g.point(3, 5).0, g.point(3, 5).1) - v[5 * 16 + 3]).abs() < 1e-13);
        for &(x, y) in &[(0.123, 4.5), (2.9, 0.01), (6.0, 3.3)] {
            assert!((s.evaluate(x, y) - f(x, y)).abs() < 1e-13);
        }
        assert_eq!(s.bandwidth(1e-12), 3);
    }
}
