//! Periodic bicubic interpolation used to sample fields at particle positions.

use super::grid::{GridField, GridSpec, ScalarField, VectorField};

/// Wrap a coordinate into `[0, length)`.
pub fn wrap(x: f64, length: f64) -> f64 {
    let r = x.rem_euclid(length);
    // rem_euclid can return `length` itself for tiny negative inputs
    if r >= length {
        0.0
    } else {
        r
    }
}

// Four-point Lagrange weights for nodes at -1, 0, 1, 2 and offset t ∈ [0, 1).
fn weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

fn stencil(grid: GridSpec, x: f64) -> ([usize; 4], [f64; 4]) {
    let n = grid.n();
    let s = wrap(x, grid.length()) / grid.spacing();
    let base = s.floor();
    let i0 = base as i64;
    let idx = [-1i64, 0, 1, 2].map(|o| (i0 + o).rem_euclid(n as i64) as usize);
    (idx, weights(s - base))
}

fn sample(grid: GridSpec, values: &[f64], x: f64, y: f64) -> f64 {
    let n = grid.n();
    let (ix, wx) = stencil(grid, x);
    let (iy, wy) = stencil(grid, y);
    let mut acc = 0.0;
    for (b, &j) in iy.iter().enumerate() {
        let row = &values[j * n..(j + 1) * n];
        let r: f64 = ix.iter().zip(&wx).map(|(&i, w)| w * row[i]).sum();
        acc += wy[b] * r;
    }
    acc
}

pub fn interpolate_scalar(f: &ScalarField, x: f64, y: f64) -> f64 {
    sample(f.grid(), f.values(), x, y)
}

pub fn interpolate_vector(v: &VectorField, x: f64, y: f64) -> [f64; 2] {
    let g = v.grid();
    [sample(g, v.component(0), x, y), sample(g, v.component(1), x, y)]
}
