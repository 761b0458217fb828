//! Trilinear interpolation at arbitrary points, periodic in all axes.
//!
//! Error is O(dx^2) on smooth fields. Where that is not enough (probe
//! stencils for reconstruction checks), callers refine the field
//! spectrally first and sample on the finer lattice.

use super::{Grid, ScalarField, VectorField};

/// Corner indices and weights for the cell containing x.
fn weights(grid: &Grid, x: [f64; 3]) -> ([usize; 3], [usize; 3], [f64; 3]) {
    let n = grid.n;
    let dx = grid.dx();
    let mut i0 = [0usize; 3];
    let mut i1 = [0usize; 3];
    let mut f = [0.0f64; 3];
    for c in 0..3 {
        let u = (x[c] / dx).rem_euclid(n as f64);
        let base = u.floor();
        // rem_euclid can land exactly on n when x/dx is a tiny negative
        // rounded up; wrap defensively.
        let b = (base as usize) % n;
        i0[c] = b;
        i1[c] = (b + 1) % n;
        f[c] = u - base;
    }
    (i0, i1, f)
}

pub fn sample_scalar(field: &ScalarField, x: [f64; 3]) -> f64 {
    let (i0, i1, f) = weights(&field.grid, x);
    let g = &field.grid;
    let mut acc = 0.0;
    for (ix, wx) in [(i0[0], 1.0 - f[0]), (i1[0], f[0])] {
        for (iy, wy) in [(i0[1], 1.0 - f[1]), (i1[1], f[1])] {
            for (iz, wz) in [(i0[2], 1.0 - f[2]), (i1[2], f[2])] {
                acc += wx * wy * wz * field.values[g.idx(ix, iy, iz)];
            }
        }
    }
    acc
}

pub fn sample_vector(field: &VectorField, x: [f64; 3]) -> [f64; 3] {
    let (i0, i1, f) = weights(&field.grid, x);
    let g = &field.grid;
    let mut acc = [0.0; 3];
    for (ix, wx) in [(i0[0], 1.0 - f[0]), (i1[0], f[0])] {
        for (iy, wy) in [(i0[1], 1.0 - f[1]), (i1[1], f[1])] {
            for (iz, wz) in [(i0[2], 1.0 - f[2]), (i1[2], f[2])] {
                let w = wx * wy * wz;
                let s = g.idx(ix, iy, iz);
                for c in 0..3 {
                    acc[c] += w * field.values[c][s];
                }
            }
        }
    }
    acc
}
