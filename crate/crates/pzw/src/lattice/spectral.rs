//! FFT-backed differential operators.
//!
//! All derivatives are exact for band-limited fields: a transform, a
//! multiplication by ik, and a transform back. The Nyquist wavenumber is
//! zeroed in every derivative and projector (the standard convention for
//! odd-order spectral derivatives of real data), so the k grid carries
//! 2 pi m / L with m = -n/2+1 .. n/2-1.
//!
//! Conventions fixed here and relied on everywhere else:
//! - Poisson solutions have zero spatial mean.
//! - The Helmholtz split assigns the k = 0 mode (and the zeroed Nyquist
//!   modes) to the transverse part; a neutral source never puts power
//!   there, so the longitudinal sector stays zero-mean.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Grid, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::tolerances::TOL_NEUTRALITY;

/// Plans and wavenumbers for one grid size. Construction is cheap enough
/// to do once per task; methods are pure and take &self.
pub struct Spectral {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

/// In-place 3D FFT composed from 1D line transforms, one axis at a time.
/// Lines along z are contiguous; x and y lines are gathered through a
/// stride buffer. Unnormalized in both directions.
fn fft3(plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64], n: usize) {
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
    for line in data.chunks_exact_mut(n) {
        plan.process_with_scratch(line, &mut scratch);
    }
    let mut buf = vec![Complex64::default(); n];
    let n2 = n * n;
    for i in 0..n {
        for kz in 0..n {
            let base = i * n2 + kz;
            for j in 0..n {
                buf[j] = data[base + j * n];
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for j in 0..n {
                data[base + j * n] = buf[j];
            }
        }
    }
    for j in 0..n {
        for kz in 0..n {
            let base = j * n + kz;
            for i in 0..n {
                buf[i] = data[base + i * n2];
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for i in 0..n {
                data[base + i * n2] = buf[i];
            }
        }
    }
}

/// Axis wavenumbers 2 pi m / L with the Nyquist entry zeroed.
fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let two_pi = 2.0 * std::f64::consts::PI;
    (0..n)
        .map(|m| {
            if m == n / 2 {
                0.0
            } else if m <= n / 2 {
                two_pi * m as f64 / length
            } else {
                two_pi * (m as f64 - n as f64) / length
            }
        })
        .collect()
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n);
        let inv = planner.plan_fft_inverse(grid.n);
        let k = wavenumbers(grid.n, grid.length);
        Spectral { grid, fwd, inv, k }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Per-axis wavenumbers (Nyquist zeroed); index m of the transform.
    pub fn k_axis(&self) -> &[f64] {
        &self.k
    }

    /// Forward transform of one real component, unnormalized.
    pub fn forward_component(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.grid.sites(), "component length");
        let mut data: Vec<Complex64> =
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft3(&self.fwd, &mut data, self.grid.n);
        data
    }

    /// Inverse transform back to a real component; divides by n^3 and
    /// drops the rounding-level imaginary part.
    pub fn inverse_component(&self, hat: &[Complex64]) -> Vec<f64> {
        assert_eq!(hat.len(), self.grid.sites(), "component length");
        let mut data = hat.to_vec();
        fft3(&self.inv, &mut data, self.grid.n);
        let norm = 1.0 / self.grid.sites() as f64;
        data.iter().map(|c| c.re * norm).collect()
    }

    fn check_grid<T>(&self, grid: &Grid, _of: &T) {
        assert_eq!(&self.grid, grid, "field grid does not match this workspace");
    }

    pub fn gradient(&self, f: &ScalarField) -> VectorField {
        self.check_grid(&f.grid, f);
        let n = self.grid.n;
        let hat = self.forward_component(&f.values);
        let mut out = VectorField::zeros(self.grid);
        for c in 0..3 {
            let mut comp = vec![Complex64::default(); hat.len()];
            let mut s = 0;
            for i in 0..n {
                for j in 0..n {
                    for kz in 0..n {
                        let kc = match c {
                            0 => self.k[i],
                            1 => self.k[j],
                            _ => self.k[kz],
                        };
                        comp[s] = Complex64::new(0.0, kc) * hat[s];
                        s += 1;
                    }
                }
            }
            out.values[c] = self.inverse_component(&comp);
        }
        out
    }

    pub fn divergence(&self, v: &VectorField) -> ScalarField {
        self.check_grid(&v.grid, v);
        let n = self.grid.n;
        let hx = self.forward_component(&v.values[0]);
        let hy = self.forward_component(&v.values[1]);
        let hz = self.forward_component(&v.values[2]);
        let mut acc = vec![Complex64::default(); hx.len()];
        let mut s = 0;
        for i in 0..n {
            for j in 0..n {
                for kz in 0..n {
                    let ik = Complex64::new(0.0, 1.0);
                    acc[s] = ik * (self.k[i] * hx[s] + self.k[j] * hy[s] + self.k[kz] * hz[s]);
                    s += 1;
                }
            }
        }
        ScalarField { grid: self.grid, values: self.inverse_component(&acc) }
    }

    pub fn curl(&self, v: &VectorField) -> VectorField {
        self.check_grid(&v.grid, v);
        let n = self.grid.n;
        let hx = self.forward_component(&v.values[0]);
        let hy = self.forward_component(&v.values[1]);
        let hz = self.forward_component(&v.values[2]);
        let mut cx = vec![Complex64::default(); hx.len()];
        let mut cy = vec![Complex64::default(); hx.len()];
        let mut cz = vec![Complex64::default(); hx.len()];
        let ik = Complex64::new(0.0, 1.0);
        let mut s = 0;
        for i in 0..n {
            for j in 0..n {
                for kz in 0..n {
                    let (kx, ky, kzv) = (self.k[i], self.k[j], self.k[kz]);
                    cx[s] = ik * (ky * hz[s] - kzv * hy[s]);
                    cy[s] = ik * (kzv * hx[s] - kx * hz[s]);
                    cz[s] = ik * (kx * hy[s] - ky * hx[s]);
                    s += 1;
                }
            }
        }
        VectorField {
            grid: self.grid,
            values: [
                self.inverse_component(&cx),
                self.inverse_component(&cy),
                self.inverse_component(&cz),
            ],
        }
    }

    /// Solve laplacian(phi) = -rho/eps0 with zero-mean phi. Refuses sources
    /// whose spatial mean is not compatible with periodicity.
    pub fn poisson_solve(&self, rho: &ScalarField) -> Result<ScalarField> {
        self.check_grid(&rho.grid, rho);
        let mean = rho.mean();
        let rms =
            (rho.values.iter().map(|v| v * v).sum::<f64>() / rho.values.len() as f64).sqrt();
        if mean.abs() > TOL_NEUTRALITY * rms {
            return Err(Error::NonNeutralSource { mean: mean.abs(), tol: TOL_NEUTRALITY });
        }
        let n = self.grid.n;
        let eps0 = self.grid.eps0;
        let mut hat = self.forward_component(&rho.values);
        let mut s = 0;
        for i in 0..n {
            for j in 0..n {
                for kz in 0..n {
                    let k2 = self.k[i] * self.k[i]
                        + self.k[j] * self.k[j]
                        + self.k[kz] * self.k[kz];
                    hat[s] = if k2 == 0.0 {
                        Complex64::default()
                    } else {
                        hat[s] / (eps0 * k2)
                    };
                    s += 1;
                }
            }
        }
        Ok(ScalarField { grid: self.grid, values: self.inverse_component(&hat) })
    }

    /// Electrostatic field -grad(poisson_solve(rho)), fused in k-space.
    pub fn electrostatic_field(&self, rho: &ScalarField) -> Result<VectorField> {
        self.check_grid(&rho.grid, rho);
        let mean = rho.mean();
        let rms =
            (rho.values.iter().map(|v| v * v).sum::<f64>() / rho.values.len() as f64).sqrt();
        if mean.abs() > TOL_NEUTRALITY * rms {
            return Err(Error::NonNeutralSource { mean: mean.abs(), tol: TOL_NEUTRALITY });
        }
        let n = self.grid.n;
        let eps0 = self.grid.eps0;
        let hat = self.forward_component(&rho.values);
        let mut ex = vec![Complex64::default(); hat.len()];
        let mut ey = vec![Complex64::default(); hat.len()];
        let mut ez = vec![Complex64::default(); hat.len()];
        let mut s = 0;
        for i in 0..n {
            for j in 0..n {
                for kz in 0..n {
                    let (kx, ky, kzv) = (self.k[i], self.k[j], self.k[kz]);
                    let k2 = kx * kx + ky * ky + kzv * kzv;
                    if k2 != 0.0 {
                        // E_hat = -ik phi_hat = -ik rho_hat / (eps0 k^2)
                        let phi = hat[s] / (eps0 * k2);
                        let mik = Complex64::new(0.0, -1.0);
                        ex[s] = mik * kx * phi;
                        ey[s] = mik * ky * phi;
                        ez[s] = mik * kzv * phi;
                    }
                    s += 1;
                }
            }
        }
        Ok(VectorField {
            grid: self.grid,
            values: [
                self.inverse_component(&ex),
                self.inverse_component(&ey),
                self.inverse_component(&ez),
            ],
        })
    }

    /// Helmholtz decomposition (transverse, longitudinal). The parts
    /// recompose to the input exactly up to rounding.
    pub fn helmholtz_split(&self, v: &VectorField) -> (VectorField, VectorField) {
        let par = self.longitudinal_part(v);
        let mut perp = v.clone();
        for c in 0..3 {
            for (p, l) in perp.values[c].iter_mut().zip(&par.values[c]) {
                *p -= l;
            }
        }
        (perp, par)
    }

    /// Longitudinal (curl-free) projection k (k . v_hat) / k^2.
    pub fn longitudinal_part(&self, v: &VectorField) -> VectorField {
        self.check_grid(&v.grid, v);
        let n = self.grid.n;
        let hx = self.forward_component(&v.values[0]);
        let hy = self.forward_component(&v.values[1]);
        let hz = self.forward_component(&v.values[2]);
        let mut lx = vec![Complex64::default(); hx.len()];
        let mut ly = vec![Complex64::default(); hx.len()];
        let mut lz = vec![Complex64::default(); hx.len()];
        let mut s = 0;
        for i in 0..n {
            for j in 0..n {
                for kz in 0..n {
                    let (kx, ky, kzv) = (self.k[i], self.k[j], self.k[kz]);
                    let k2 = kx * kx + ky * ky + kzv * kzv;
                    if k2 != 0.0 {
                        let kd = (kx * hx[s] + ky * hy[s] + kzv * hz[s]) / k2;
                        lx[s] = kx * kd;
                        ly[s] = ky * kd;
                        lz[s] = kzv * kd;
                    }
                    s += 1;
                }
            }
        }
        VectorField {
            grid: self.grid,
            values: [
                self.inverse_component(&lx),
                self.inverse_component(&ly),
                self.inverse_component(&lz),
            ],
        }
    }

    /// Transverse (divergence-free) projection; the k = 0 mode stays here.
    pub fn transverse_part(&self, v: &VectorField) -> VectorField {
        let par = self.longitudinal_part(v);
        let mut perp = v.clone();
        for c in 0..3 {
            for (p, l) in perp.values[c].iter_mut().zip(&par.values[c]) {
                *p -= l;
            }
        }
        perp
    }

    /// Exact trigonometric upsampling by an integer factor: zero-pad the
    /// spectrum and transform back on the finer grid. Band-limited fields
    /// are reproduced exactly at the old sites and interpolated exactly in
    /// between, which makes sub-cell sampling accurate far beyond
    /// trilinear order.
    pub fn refine_scalar(&self, f: &ScalarField, factor: usize) -> ScalarField {
        self.check_grid(&f.grid, f);
        assert!(factor >= 1, "refinement factor must be at least 1");
        if factor == 1 {
            return f.clone();
        }
        let values = self.refine_component(&f.values, factor);
        let grid = Grid { n: self.grid.n * factor, ..self.grid };
        ScalarField { grid, values }
    }

    pub fn refine_vector(&self, v: &VectorField, factor: usize) -> VectorField {
        self.check_grid(&v.grid, v);
        assert!(factor >= 1, "refinement factor must be at least 1");
        if factor == 1 {
            return v.clone();
        }
        let grid = Grid { n: self.grid.n * factor, ..self.grid };
        VectorField {
            grid,
            values: [
                self.refine_component(&v.values[0], factor),
                self.refine_component(&v.values[1], factor),
                self.refine_component(&v.values[2], factor),
            ],
        }
    }

    fn refine_component(&self, values: &[f64], factor: usize) -> Vec<f64> {
        let n = self.grid.n;
        let nf = n * factor;
        let h = n / 2;
        let hat = self.forward_component(values);
        // Coarse mode m maps to the fine index with the same signed
        // frequency; the coarse Nyquist goes to the negative side.
        let target: Vec<usize> =
            (0..n).map(|m| if m < h { m } else { nf - n + m }).collect();
        let mut fine = vec![Complex64::default(); nf * nf * nf];
        for i in 0..n {
            for j in 0..n {
                for kz in 0..n {
                    let src = (i * n + j) * n + kz;
                    let dst = (target[i] * nf + target[j]) * nf + target[kz];
                    fine[dst] = hat[src];
                }
            }
        }
        let mut planner = FftPlanner::new();
        let inv = planner.plan_fft_inverse(nf);
        fft3(&inv, &mut fine, nf);
        let norm = 1.0 / (n * n * n) as f64;
        fine.iter().map(|c| c.re * norm).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::cubic(16, 1.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = grid();
        let sp = Spectral::new(g);
        let f = ScalarField::from_fn(g, |_| 3.25);
        let grad = sp.gradient(&f);
        assert!(grad.norm_l2() < 1e-12);
    }

    #[test]
    fn gradient_of_single_mode_is_analytic() {
        let g = grid();
        let sp = Spectral::new(g);
        let k = TWO_PI / g.length;
        let f = ScalarField::from_fn(g, |x| (k * x[0]).sin());
        let grad = sp.gradient(&f);
        let exact = VectorField::from_fn(g, |x| [k * (k * x[0]).cos(), 0.0, 0.0]);
        let diff = grad.add_scaled(&exact, -1.0);
        assert!(diff.norm_l2() / exact.norm_l2() < 1e-12);
    }

    #[test]
    fn divergence_of_curl_vanishes() {
        let g = grid();
        let sp = Spectral::new(g);
        let w = VectorField::from_fn(g, |x| {
            [
                (TWO_PI * x[1] / g.length).sin() + 0.3 * (TWO_PI * 2.0 * x[2] / g.length).cos(),
                (TWO_PI * x[2] / g.length).cos(),
                (TWO_PI * 3.0 * x[0] / g.length).sin(),
            ]
        });
        let c = sp.curl(&w);
        let d = sp.divergence(&c);
        assert!(d.norm_l2() / c.norm_l2() < 1e-12);
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let g = grid();
        let sp = Spectral::new(g);
        let f = ScalarField::from_fn(g, |x| {
            (TWO_PI * x[0] / g.length).sin() * (TWO_PI * 2.0 * x[1] / g.length).cos()
        });
        let gr = sp.gradient(&f);
        let c = sp.curl(&gr);
        assert!(c.norm_l2() / gr.norm_l2() < 1e-12);
    }

    #[test]
    fn poisson_inverts_single_mode() {
        let g = grid();
        let sp = Spectral::new(g);
        let k = TWO_PI / g.length;
        let rho = ScalarField::from_fn(g, |x| (k * x[0]).sin());
        let phi = sp.poisson_solve(&rho).unwrap();
        // laplacian(sin kx) = -k^2 sin kx, so phi = sin(kx) / (eps0 k^2)
        let exact = ScalarField::from_fn(g, |x| (k * x[0]).sin() / (g.eps0 * k * k));
        let diff = phi.add_scaled(&exact, -1.0);
        assert!(diff.norm_l2() / exact.norm_l2() < 1e-12);
        assert!(phi.mean().abs() < 1e-14);
    }

    #[test]
    fn poisson_rejects_non_neutral_source() {
        let g = grid();
        let sp = Spectral::new(g);
        let rho = ScalarField::from_fn(g, |_| 1.0);
        assert!(matches!(
            sp.poisson_solve(&rho),
            Err(crate::error::Error::NonNeutralSource { .. })
        ));
    }

    #[test]
    fn poisson_then_gradient_then_divergence_recovers_source() {
        let g = grid();
        let sp = Spectral::new(g);
        let rho = ScalarField::from_fn(g, |x| {
            (TWO_PI * x[0] / g.length).sin() * (TWO_PI * 2.0 * x[1] / g.length).cos()
                + 0.5 * (TWO_PI * 3.0 * x[2] / g.length).sin()
        });
        let e = sp.electrostatic_field(&rho).unwrap();
        let div = sp.divergence(&e);
        // div E = rho / eps0
        let diff = div.add_scaled(&rho, -1.0 / g.eps0);
        assert!(diff.norm_l2() / rho.norm_l2() < 1e-10);
        // and E is curl-free
        assert!(sp.curl(&e).norm_l2() / e.norm_l2() < 1e-12);
    }

    #[test]
    fn helmholtz_classifies_single_modes() {
        let g = grid();
        let sp = Spectral::new(g);
        let k = TWO_PI / g.length;
        // grad-like mode: purely longitudinal
        let vl = VectorField::from_fn(g, |x| [(k * x[0]).sin(), 0.0, 0.0]);
        let (t, l) = sp.helmholtz_split(&vl);
        assert!(t.norm_l2() / vl.norm_l2() < 1e-12);
        assert!(rel(l.norm_l2(), vl.norm_l2()) < 1e-12);
        // shear mode: purely transverse
        let vt = VectorField::from_fn(g, |x| [0.0, (k * x[0]).sin(), 0.0]);
        let (t, l) = sp.helmholtz_split(&vt);
        assert!(l.norm_l2() / vt.norm_l2() < 1e-12);
        assert!(rel(t.norm_l2(), vt.norm_l2()) < 1e-12);
    }

    #[test]
    fn helmholtz_parts_recompose_and_are_orthogonal() {
        let g = grid();
        let sp = Spectral::new(g);
        let v = VectorField::from_fn(g, |x| {
            let a = TWO_PI / g.length;
            [
                (a * x[0]).sin() * (a * x[1]).cos(),
                (2.0 * a * x[2]).cos(),
                (a * x[0]).cos() + (3.0 * a * x[1]).sin(),
            ]
        });
        let (t, l) = sp.helmholtz_split(&v);
        let rebuilt = t.add_scaled(&l, 1.0);
        let diff = rebuilt.add_scaled(&v, -1.0);
        assert!(diff.norm_l2() / v.norm_l2() < 1e-12);
        assert!(sp.divergence(&t).norm_l2() / t.norm_l2() < 1e-12);
        assert!(sp.curl(&l).norm_l2() / l.norm_l2() < 1e-12);
        let cross = t.inner(&l).abs() / (t.norm_l2() * l.norm_l2());
        assert!(cross < 1e-12);
    }

    #[test]
    fn mean_mode_goes_to_transverse_part() {
        let g = grid();
        let sp = Spectral::new(g);
        let v = VectorField::from_fn(g, |_| [1.0, -2.0, 0.5]);
        let (t, l) = sp.helmholtz_split(&v);
        assert!(l.norm_l2() < 1e-13);
        assert!(rel(t.norm_l2(), v.norm_l2()) < 1e-13);
    }

    #[test]
    fn refinement_reproduces_band_limited_fields_exactly() {
        let g = grid();
        let sp = Spectral::new(g);
        let a = TWO_PI / g.length;
        let f = ScalarField::from_fn(g, |x| {
            (a * x[0]).sin() * (2.0 * a * x[1]).cos() + 0.25 * (3.0 * a * x[2]).sin()
        });
        let fine = sp.refine_scalar(&f, 2);
        assert_eq!(fine.grid.n, 2 * g.n);
        let exact = ScalarField::from_fn(fine.grid, |x| {
            (a * x[0]).sin() * (2.0 * a * x[1]).cos() + 0.25 * (3.0 * a * x[2]).sin()
        });
        let diff = fine.add_scaled(&exact, -1.0);
        assert!(diff.norm_l2() / exact.norm_l2() < 1e-12);
    }
}
