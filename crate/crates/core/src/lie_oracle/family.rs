use std::fmt;
use std::sync::Arc;

use super::matrix::AlgebraElement;
use super::LieError;

pub type Path = Arc<dyn Fn(f64) -> AlgebraElement + Send + Sync>;

/// Smooth deterministic paths `w(t)`, `χ(t)`, `ū(t)` sampled on `t_grid`.
///
/// Paths are closures rather than tables so that central time differences
/// can be taken at any `h_t`.
#[derive(Clone)]
pub struct FlowFamily {
    pub w: Path,
    pub chi: Path,
    pub ubar: Path,
    pub t_grid: Vec<f64>,
}

impl fmt::Debug for FlowFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowFamily").field("dim", &self.dim()).field("t_grid", &self.t_grid).finish()
    }
}

impl FlowFamily {
    pub fn new(w: Path, chi: Path, ubar: Path, t_grid: Vec<f64>) -> Result<Self, LieError> {
        if t_grid.len() < 3 || t_grid.windows(2).any(|p| p[1] <= p[0]) {
            return Err(LieError::InvalidTimeGrid);
        }
        let t0 = t_grid[0];
        let d = w(t0).dim();
        for m in [chi(t0), ubar(t0)] {
            if m.dim() != d {
                return Err(LieError::DimensionMismatch(d, m.dim()));
            }
        }
        Ok(FlowFamily { w, chi, ubar, t_grid })
    }

    pub fn dim(&self) -> usize {
        (self.w)(self.t_grid[0]).dim()
    }

    /// Generic smooth so(3) family with trigonometric coefficients.
    pub fn so3_generic(t_grid: Vec<f64>) -> Result<Self, LieError> {
        Self::new(
            Arc::new(|t: f64| AlgebraElement::so3([(1.3 * t).sin(), 0.4 + 0.5 * (0.7 * t).cos(), 0.3 * t])),
            Arc::new(|t: f64| AlgebraElement::so3([0.2 * (2.1 * t).cos(), -0.6 * t, 0.8 * (0.9 * t + 0.3).sin()])),
            Arc::new(|t: f64| AlgebraElement::so3([0.5 + 0.2 * t, (0.5 * t).sin(), -0.7 * (1.1 * t).cos()])),
            t_grid,
        )
    }

    /// Family whose paths do not depend on `t`.
    pub fn constant(w: AlgebraElement, chi: AlgebraElement, ubar: AlgebraElement, t_grid: Vec<f64>) -> Result<Self, LieError> {
        Self::new(Arc::new(move |_| w.clone()), Arc::new(move |_| chi.clone()), Arc::new(move |_| ubar.clone()), t_grid)
    }
}

/// `m` evenly spaced samples on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, m: usize) -> Vec<f64> {
    (0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect()
}
