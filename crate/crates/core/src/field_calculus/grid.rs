//! Uniform periodic grids and the field types sampled on them.
//!
//! Storage is row-major with `y` as the slow index: the value at
//! `(x_i, y_j)` lives at `j * n + i`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use super::FieldError;

/// An `n × n` uniform grid on the periodic square `[0, length)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    length: f64,
}

impl GridSpec {
    pub fn new(n: usize, length: f64) -> Result<Self, FieldError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(FieldError::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(FieldError::InvalidGrid(format!(
                "length = {length} must be positive and finite"
            )));
        }
        Ok(Self { n, length })
    }

    /// Grid on the standard torus `[0, 2π)²`.
    pub fn periodic(n: usize) -> Result<Self, FieldError> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of grid points, `n²`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    pub fn area(&self) -> f64 {
        self.length * self.length
    }

    pub fn point(&self, ix: usize, iy: usize) -> (f64, f64) {
        let h = self.spacing();
        (ix as f64 * h, iy as f64 * h)
    }

    /// Iterate `(index, x, y)` over all grid points in storage order.
    pub fn points(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        let n = self.n;
        let h = self.spacing();
        (0..n * n).map(move |idx| (idx, (idx % n) as f64 * h, (idx / n) as f64 * h))
    }

    /// Signed integer wavenumber of FFT bin `i`; the Nyquist bin maps to `n/2`.
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Physical wavenumber used by first derivatives. The Nyquist bin is
    /// zeroed so that the discrete derivative stays real and skew-adjoint.
    pub fn derivative_wavenumber(&self, i: usize) -> f64 {
        if i == self.n / 2 {
            0.0
        } else {
            self.mode(i) as f64 * 2.0 * PI / self.length
        }
    }

    /// Largest integer wavenumber kept by the 2/3 truncation.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }
}

/// Component-array access shared by every grid field type.
pub trait GridField: Clone {
    fn grid(&self) -> GridSpec;
    fn arrays(&self) -> Vec<&[f64]>;
    fn arrays_mut(&mut self) -> Vec<&mut [f64]>;

    /// Largest absolute entry over all components.
    fn sup_norm(&self) -> f64 {
        self.arrays()
            .iter()
            .flat_map(|a| a.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `∫ Σ_c |f_c|² dμ` by the uniform-grid rule.
    fn norm_sq(&self) -> f64 {
        let s: f64 = self
            .arrays()
            .iter()
            .flat_map(|a| a.iter())
            .map(|v| v * v)
            .sum();
        s * self.grid().cell_area()
    }

    fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    fn is_finite(&self) -> bool {
        self.arrays().iter().all(|a| a.iter().all(|v| v.is_finite()))
    }

    fn scale_in_place(&mut self, s: f64) {
        for a in self.arrays_mut() {
            a.iter_mut().for_each(|v| *v *= s);
        }
    }

    /// `self += s * other`
    fn axpy(&mut self, s: f64, other: &Self) {
        assert_eq!(self.grid(), other.grid(), "axpy on mismatched grids");
        let rhs = other.arrays();
        for (a, b) in self.arrays_mut().into_iter().zip(rhs) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += s * y);
        }
    }

    fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale_in_place(s);
        out
    }

    /// `self + s * other` as a new field.
    fn plus_scaled(&self, s: f64, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(s, other);
        out
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        self.arrays()
            .iter()
            .zip(other.arrays())
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Scalar field: pressure, advected scalars, potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        Self { grid, values: grid.points().map(|(_, x, y)| f(x, y)).collect() }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self, FieldError> {
        check_len(&grid, values.len())?;
        Ok(Self { grid, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.n() + ix]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `∫ f dμ`
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise product.
    pub fn mul_pointwise(&self, other: &ScalarField) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }
}

/// Contravariant vector field with two components.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    comps: [Vec<f64>; 2],
}

/// Covariant (one-form) field; on the flat torus its components coincide
/// with those of the metric-dual vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorField {
    grid: GridSpec,
    comps: [Vec<f64>; 2],
}

macro_rules! two_component_field {
    ($ty:ident) => {
        impl $ty {
            pub fn zeros(grid: GridSpec) -> Self {
                Self { grid, comps: [vec![0.0; grid.len()], vec![0.0; grid.len()]] }
            }

            pub fn constant(grid: GridSpec, c: [f64; 2]) -> Self {
                Self { grid, comps: [vec![c[0]; grid.len()], vec![c[1]; grid.len()]] }
            }

            pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
                let mut out = Self::zeros(grid);
                for (idx, x, y) in grid.points() {
                    let v = f(x, y);
                    out.comps[0][idx] = v[0];
                    out.comps[1][idx] = v[1];
                }
                out
            }

            pub fn from_components(
                grid: GridSpec,
                c0: Vec<f64>,
                c1: Vec<f64>,
            ) -> Result<Self, FieldError> {
                check_len(&grid, c0.len())?;
                check_len(&grid, c1.len())?;
                Ok(Self { grid, comps: [c0, c1] })
            }

            pub fn from_scalars(x: ScalarField, y: ScalarField) -> Result<Self, FieldError> {
                if x.grid() != y.grid() {
                    return Err(FieldError::GridMismatch);
                }
                let grid = x.grid();
                Ok(Self { grid, comps: [x.into_values(), y.into_values()] })
            }

            pub fn component(&self, i: usize) -> &[f64] {
                &self.comps[i]
            }

            pub fn component_mut(&mut self, i: usize) -> &mut [f64] {
                &mut self.comps[i]
            }

            pub fn scalar(&self, i: usize) -> ScalarField {
                ScalarField { grid: self.grid, values: self.comps[i].clone() }
            }

            pub fn at(&self, ix: usize, iy: usize) -> [f64; 2] {
                let idx = iy * self.grid.n() + ix;
                [self.comps[0][idx], self.comps[1][idx]]
            }

            /// Pointwise Euclidean magnitude squared.
            pub fn magnitude_sq(&self) -> ScalarField {
                ScalarField {
                    grid: self.grid,
                    values: self.comps[0]
                        .iter()
                        .zip(&self.comps[1])
                        .map(|(a, b)| a * a + b * b)
                        .collect(),
                }
            }
        }

        impl GridField for $ty {
            fn grid(&self) -> GridSpec {
                self.grid
            }
            fn arrays(&self) -> Vec<&[f64]> {
                vec![&self.comps[0], &self.comps[1]]
            }
            fn arrays_mut(&mut self) -> Vec<&mut [f64]> {
                let [a, b] = &mut self.comps;
                vec![a.as_mut_slice(), b.as_mut_slice()]
            }
        }
    };
}

two_component_field!(VectorField);
two_component_field!(CovectorField);

impl VectorField {
    /// Index lowering with the flat metric.
    pub fn flat(&self) -> CovectorField {
        CovectorField { grid: self.grid, comps: self.comps.clone() }
    }
}

impl CovectorField {
    /// Index raising with the flat metric.
    pub fn sharp(&self) -> VectorField {
        VectorField { grid: self.grid, comps: self.comps.clone() }
    }
}

/// Rank-2 contravariant tensor field with components `T^{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2Field {
    grid: GridSpec,
    comps: [[Vec<f64>; 2]; 2],
}

impl Tensor2Field {
    pub fn zeros(grid: GridSpec) -> Self {
        let z = || vec![0.0; grid.len()];
        Self { grid, comps: [[z(), z()], [z(), z()]] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> [[f64; 2]; 2]) -> Self {
        let mut out = Self::zeros(grid);
        for (idx, x, y) in grid.points() {
            let t = f(x, y);
            for (i, row) in t.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    out.comps[i][j][idx] = *v;
                }
            }
        }
        out
    }

    /// Symmetric tensor from its three independent components; the two
    /// off-diagonal arrays are bitwise copies.
    pub fn symmetric(xx: ScalarField, xy: ScalarField, yy: ScalarField) -> Result<Self, FieldError> {
        if xx.grid() != xy.grid() || xx.grid() != yy.grid() {
            return Err(FieldError::GridMismatch);
        }
        let grid = xx.grid();
        let xy = xy.into_values();
        Ok(Self { grid, comps: [[xx.into_values(), xy.clone()], [xy, yy.into_values()]] })
    }

    /// `c · δ^{ij}`
    pub fn identity(grid: GridSpec, c: f64) -> Self {
        Self::from_fn(grid, |_, _| [[c, 0.0], [0.0, c]])
    }

    /// Pointwise outer product `a ⊗ b`.
    pub fn outer(a: &VectorField, b: &VectorField) -> Result<Self, FieldError> {
        if a.grid() != b.grid() {
            return Err(FieldError::GridMismatch);
        }
        let mut out = Self::zeros(a.grid());
        for i in 0..2 {
            for j in 0..2 {
                let (ai, bj) = (a.component(i), b.component(j));
                out.comps[i][j].iter_mut().enumerate().for_each(|(k, v)| *v = ai[k] * bj[k]);
            }
        }
        Ok(out)
    }

    pub fn component(&self, i: usize, j: usize) -> &[f64] {
        &self.comps[i][j]
    }

    pub fn component_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        &mut self.comps[i][j]
    }

    pub fn scalar(&self, i: usize, j: usize) -> ScalarField {
        ScalarField { grid: self.grid, values: self.comps[i][j].clone() }
    }

    pub fn at(&self, ix: usize, iy: usize) -> [[f64; 2]; 2] {
        let idx = iy * self.grid.n() + ix;
        [
            [self.comps[0][0][idx], self.comps[0][1][idx]],
            [self.comps[1][0][idx], self.comps[1][1][idx]],
        ]
    }

    /// Exact (bitwise) symmetry of the off-diagonal components.
    pub fn is_symmetric(&self) -> bool {
        self.comps[0][1]
            .iter()
            .zip(&self.comps[1][0])
            .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Replace both off-diagonals by their average.
    pub fn symmetrize(&mut self) {
        let [r0, r1] = &mut self.comps;
        for (a, b) in r0[1].iter_mut().zip(r1[0].iter_mut()) {
            let m = 0.5 * (*a + *b);
            *a = m;
            *b = m;
        }
    }

    pub fn trace(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.comps[0][0].iter().zip(&self.comps[1][1]).map(|(a, b)| a + b).collect(),
        }
    }

    /// Pointwise smallest eigenvalue of the symmetric part.
    pub fn min_eigenvalue(&self) -> ScalarField {
        let n = self.grid.len();
        let values = (0..n)
            .map(|k| {
                let a = self.comps[0][0][k];
                let d = self.comps[1][1][k];
                let b = 0.5 * (self.comps[0][1][k] + self.comps[1][0][k]);
                let half_tr = 0.5 * (a + d);
                let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
                half_tr - disc
            })
            .collect();
        ScalarField { grid: self.grid, values }
    }
}

impl GridField for ScalarField {
    fn grid(&self) -> GridSpec {
        self.grid
    }
    fn arrays(&self) -> Vec<&[f64]> {
        vec![&self.values]
    }
    fn arrays_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.values.as_mut_slice()]
    }
}

impl GridField for Tensor2Field {
    fn grid(&self) -> GridSpec {
        self.grid
    }
    fn arrays(&self) -> Vec<&[f64]> {
        vec![&self.comps[0][0], &self.comps[0][1], &self.comps[1][0], &self.comps[1][1]]
    }
    fn arrays_mut(&mut self) -> Vec<&mut [f64]> {
        let [[a, b], [c, d]] = &mut self.comps;
        vec![a.as_mut_slice(), b.as_mut_slice(), c.as_mut_slice(), d.as_mut_slice()]
    }
}

fn check_len(grid: &GridSpec, len: usize) -> Result<(), FieldError> {
    if len != grid.len() {
        return Err(FieldError::InvalidGrid(format!(
            "expected {} values for an {}x{} grid, got {len}",
            grid.len(),
            grid.n(),
            grid.n()
        )));
    }
    Ok(())
}

macro_rules! field_arith {
    ($ty:ident) => {
        impl Add for &$ty {
            type Output = $ty;
            fn add(self, rhs: &$ty) -> $ty {
                self.plus_scaled(1.0, rhs)
            }
        }
        impl Sub for &$ty {
            type Output = $ty;
            fn sub(self, rhs: &$ty) -> $ty {
                self.plus_scaled(-1.0, rhs)
            }
        }
        impl Add for $ty {
            type Output = $ty;
            fn add(mut self, rhs: $ty) -> $ty {
                self.axpy(1.0, &rhs);
                self
            }
        }
        impl Sub for $ty {
            type Output = $ty;
            fn sub(mut self, rhs: $ty) -> $ty {
                self.axpy(-1.0, &rhs);
                self
            }
        }
        impl Neg for &$ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                self.scaled(-1.0)
            }
        }
        impl Neg for $ty {
            type Output = $ty;
            fn neg(mut self) -> $ty {
                self.scale_in_place(-1.0);
                self
            }
        }
        impl Mul<f64> for &$ty {
            type Output = $ty;
            fn mul(self, s: f64) -> $ty {
                self.scaled(s)
            }
        }
        impl Mul<f64> for $ty {
            type Output = $ty;
            fn mul(mut self, s: f64) -> $ty {
                self.scale_in_place(s);
                self
            }
        }
    };
}

field_arith!(ScalarField);
field_arith!(VectorField);
field_arith!(CovectorField);
field_arith!(Tensor2Field);
