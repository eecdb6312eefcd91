//! Preconditioned conjugate gradients for the inertia operator `1 − ε² C_F`
//! restricted to divergence-free fields inside the 2/3 band.

use rustfft::num_complex::Complex64;

use crate::field_calculus::{c_operator, dealias, leray_project, GridField, Spectrum, Tensor2Field, VectorField};

use super::LaeError;

/// `x ↦ T P(x − ε² C_F x)`, the Galerkin restriction to the 2/3 band.
///
/// Without the truncation an anisotropic `F` spreads the solution over every
/// mode, and the near-Nyquist content aliases into the cubic terms.
#[derive(Debug, Clone, Copy)]
pub struct InertiaOperator<'a> {
    pub f: &'a Tensor2Field,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub x: VectorField,
    pub iters: usize,
    /// Final `‖r‖₂ / ‖b‖₂`.
    pub relative_residual: f64,
}

impl InertiaOperator<'_> {
    /// `x − ε² C_F x` without projection.
    pub fn apply_raw(&self, x: &VectorField) -> Result<VectorField, LaeError> {
        if self.eps == 0.0 {
            return Ok(x.clone());
        }
        let c = c_operator(x, self.f)?;
        Ok(x.plus_scaled(-self.eps * self.eps, &c))
    }

    pub fn apply(&self, x: &VectorField) -> Result<VectorField, LaeError> {
        Ok(dealias(&leray_project(&self.apply_raw(x)?)))
    }

    /// Inverse Fourier symbol of `1 + ε² f̄ |k|²` with `f̄` the mean of `tr F / 2`.
    fn precondition(&self, r: &VectorField, fbar: f64) -> VectorField {
        let g = r.grid();
        let s = self.eps * self.eps * fbar;
        let mut out = r.clone();
        for a in out.arrays_mut() {
            let mut spec = Spectrum::forward(g, a);
            spec.apply(|kx, ky| {
                let (p, q) = (g.derivative_wavenumber(kx), g.derivative_wavenumber(ky));
                Complex64::new(1.0 / (1.0 + s * (p * p + q * q)), 0.0)
            });
            a.copy_from_slice(&spec.inverse());
        }
        out
    }

    /// Solve `T P(1 − ε² C) x = T P b` for divergence-free, band-limited `x`.
    /// With `ε = 0` this is just `x = P b`.
    pub fn solve(&self, b: &VectorField, tol: f64, maxit: usize) -> Result<SolveOutcome, LaeError> {
        let b = leray_project(b);
        if self.eps == 0.0 {
            return Ok(SolveOutcome { x: b, iters: 0, relative_residual: 0.0 });
        }
        let b = dealias(&b);
        let grid = b.grid();
        let bnorm = b.l2_norm();
        let mut x = VectorField::zeros(grid);
        if bnorm == 0.0 {
            return Ok(SolveOutcome { x, iters: 0, relative_residual: 0.0 });
        }
        let fbar = (0.5 * self.f.trace().mean()).max(0.0);
        let dot = |a: &VectorField, c: &VectorField| -> f64 {
            a.arrays().iter().zip(c.arrays()).map(|(p, q)| p.iter().zip(q.iter()).map(|(u, v)| u * v).sum::<f64>()).sum()
        };
        let mut r = b.clone();
        let mut z = self.precondition(&r, fbar);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut rel = 1.0;
        for it in 1..=maxit {
            let ap = self.apply(&p)?;
            let alpha = rz / dot(&p, &ap);
            x.axpy(alpha, &p);
            r.axpy(-alpha, &ap);
            rel = r.l2_norm() / bnorm;
            if rel <= tol {
                return Ok(SolveOutcome { x: leray_project(&x), iters: it, relative_residual: rel });
            }
            z = self.precondition(&r, fbar);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p = z.plus_scaled(beta, &p);
        }
        Err(LaeError::LinearSolve { iters: maxit, residual: rel })
    }
}
