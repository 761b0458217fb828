//! Real-space kernel of the transverse projector.
//!
//! The Helmholtz transverse projection is diagonal in k-space; its
//! real-space face is a 3x3 tensor kernel T(d) such that convolving any
//! vector field with T reproduces the transverse part. The kernel is the
//! classical transverse delta function, realized here as the exact inverse
//! transform of the mode-space projector of this grid, so the convolution
//! statement holds to rounding rather than asymptotically.

use super::spectral::Spectral;
use super::VectorField;

/// Mode-space projector at one wavenumber: identity minus k k^T / k^2,
/// with zero-measure modes (k = 0 after Nyquist zeroing) mapped to the
/// identity, matching the split convention.
fn projector(k: [f64; 3]) -> [[f64; 3]; 3] {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let mut p = [[0.0; 3]; 3];
    for a in 0..3 {
        p[a][a] = 1.0;
    }
    if k2 != 0.0 {
        for a in 0..3 {
            for b in 0..3 {
                p[a][b] -= k[a] * k[b] / k2;
            }
        }
    }
    p
}

/// T(d) for a lattice displacement d (in units of dx, may be negative),
/// normalized so that (T * v)(x) = dx^3 sum_y T(x - y) v(y) is the
/// transverse part of v.
///
/// The projector matrix follows the derivative convention (Nyquist
/// components treated as zero), but the phase must carry the true mode
/// frequency: with zeroed phases the Nyquist planes alias onto the
/// constant mode and the kernel stops being the inverse transform of the
/// mode-space projector.
pub fn transverse_projector_kernel(sp: &Spectral, d: [i64; 3]) -> [[f64; 3]; 3] {
    let g = sp.grid();
    let n = g.n;
    let k_eff = sp.k_axis();
    let two_pi = 2.0 * std::f64::consts::PI;
    let k_true: Vec<f64> = (0..n)
        .map(|i| {
            let m = if i <= n / 2 { i as i64 } else { i as i64 - n as i64 };
            two_pi * m as f64 / g.length
        })
        .collect();
    let dx = g.dx();
    let phase_step = [
        d[0] as f64 * dx,
        d[1] as f64 * dx,
        d[2] as f64 * dx,
    ];
    let mut t = [[0.0; 3]; 3];
    for i in 0..n {
        for j in 0..n {
            for kz in 0..n {
                let p = projector([k_eff[i], k_eff[j], k_eff[kz]]);
                // projector is even in k, so the imaginary parts cancel
                let c = (k_true[i] * phase_step[0]
                    + k_true[j] * phase_step[1]
                    + k_true[kz] * phase_step[2])
                    .cos();
                for a in 0..3 {
                    for b in 0..3 {
                        t[a][b] += p[a][b] * c;
                    }
                }
            }
        }
    }
    let vol = g.length * g.length * g.length;
    for row in &mut t {
        for v in row.iter_mut() {
            *v /= vol;
        }
    }
    t
}

/// Direct real-space convolution with the projector kernel. O(n^6): meant
/// for small grids, where it certifies that the kernel and the spectral
/// split are the same operator.
pub fn convolve_transverse(sp: &Spectral, v: &VectorField) -> VectorField {
    let g = sp.grid();
    let n = g.n as i64;
    // Precompute T over all displacements once.
    let mut kernel = vec![[[0.0; 3]; 3]; g.sites()];
    for (flat, slot) in kernel.iter_mut().enumerate() {
        let gz = (flat % g.n) as i64;
        let gy = ((flat / g.n) % g.n) as i64;
        let gx = (flat / (g.n * g.n)) as i64;
        *slot = transverse_projector_kernel(sp, [gx, gy, gz]);
    }
    let mut out = VectorField::zeros(g);
    let dv = g.cell_volume();
    for xi in 0..n {
        for xj in 0..n {
            for xk in 0..n {
                let xs = g.idx(xi as usize, xj as usize, xk as usize);
                let mut acc = [0.0; 3];
                for yi in 0..n {
                    for yj in 0..n {
                        for yk in 0..n {
                            let ys = g.idx(yi as usize, yj as usize, yk as usize);
                            let di = (xi - yi).rem_euclid(n) as usize;
                            let dj = (xj - yj).rem_euclid(n) as usize;
                            let dk = (xk - yk).rem_euclid(n) as usize;
                            let t = &kernel[g.idx(di, dj, dk)];
                            let vy = v.at(ys);
                            for a in 0..3 {
                                acc[a] +=
                                    t[a][0] * vy[0] + t[a][1] * vy[1] + t[a][2] * vy[2];
                            }
                        }
                    }
                }
                for a in 0..3 {
                    out.values[a][xs] = acc[a] * dv;
                }
            }
        }
    }
    out
}

/// Mean over modes of the projector trace, (1/n^3) sum_k tr P(k).
///
/// Each generic mode contributes 2 (two transverse polarizations); the 8
/// modes whose effective wavenumber vanishes after Nyquist zeroing
/// contribute 3, so the exact lattice value is 2 + 8/n^3.
pub fn projector_mode_trace_mean(sp: &Spectral) -> f64 {
    let g = sp.grid();
    let n = g.n;
    let k = sp.k_axis();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            for kz in 0..n {
                let kv = [k[i], k[j], k[kz]];
                let p = projector(kv);
                acc += p[0][0] + p[1][1] + p[2][2];
            }
        }
    }
    acc / g.sites() as f64
}

/// Convenience: the exact expected trace mean for a grid of size n.
pub fn expected_trace_mean(n: usize) -> f64 {
    2.0 + 8.0 / (n * n * n) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Grid;

    #[test]
    fn trace_mean_counts_two_polarizations_per_mode() {
        for n in [8usize, 12, 16] {
            let g = Grid::cubic(n, 1.0).unwrap();
            let sp = Spectral::new(g);
            let got = projector_mode_trace_mean(&sp);
            assert!((got - expected_trace_mean(n)).abs() < 1e-12, "n = {n}: {got}");
        }
    }

    #[test]
    fn convolution_matches_spectral_split() {
        let g = Grid::cubic(8, 1.0).unwrap();
        let sp = Spectral::new(g);
        let a = 2.0 * std::f64::consts::PI / g.length;
        let v = VectorField::from_fn(g, |x| {
            [
                (a * x[0]).sin() + 0.3 * (a * x[1]).cos(),
                (a * x[2]).cos(),
                0.2 * (a * x[0]).cos() * (a * x[1]).sin(),
            ]
        });
        let direct = convolve_transverse(&sp, &v);
        let spectral = sp.transverse_part(&v);
        let diff = direct.add_scaled(&spectral, -1.0);
        { let r = diff.norm_l2() / spectral.norm_l2(); assert!(r < 1e-10, "residual {r:.3e}"); }
    }

    #[test]
    fn convolution_fixes_transverse_and_kills_longitudinal() {
        let g = Grid::cubic(8, 1.0).unwrap();
        let sp = Spectral::new(g);
        let a = 2.0 * std::f64::consts::PI / g.length;
        // transverse input: shear mode
        let vt = VectorField::from_fn(g, |x| [0.0, (a * x[0]).sin(), 0.0]);
        let kept = convolve_transverse(&sp, &vt);
        let diff = kept.add_scaled(&vt, -1.0);
        assert!(diff.norm_l2() / vt.norm_l2() < 1e-10);
        // longitudinal input: gradient mode
        let vl = VectorField::from_fn(g, |x| [(a * x[0]).sin(), 0.0, 0.0]);
        let killed = convolve_transverse(&sp, &vl);
        assert!(killed.norm_l2() / vl.norm_l2() < 1e-10);
    }
}
