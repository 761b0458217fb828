//! A neutral atom of smeared point charges and its source fields.
//!
//! Point charges are regularized by periodic Gaussians of width sigma.
//! Because every distribution identity used downstream is linear in the
//! delta, the identities survive the smearing exactly; sigma also keeps
//! field energies finite. The same Gaussian shape is used for depositing
//! onto the lattice and for sampling lattice fields back at particle
//! locations, which makes the deposit/gather pair an exact adjoint: the
//! force a particle feels is the exact derivative of the lattice field
//! energy with respect to its position. Energy conservation in `dynamics`
//! depends on this pairing.

use crate::error::{Error, Result};
use crate::lattice::{Grid, ScalarField, Spectral, VectorField};

/// Charges, masses, positions, velocities, one smearing width.
///
/// Index 0 is the nucleus. With `nucleus_pinned` set it sits at the origin
/// with zero velocity, the multipolar sums run over the remaining charges,
/// and dynamics never moves it.
#[derive(Clone, Debug)]
pub struct ParticleSet {
    pub charges: Vec<f64>,
    pub masses: Vec<f64>,
    pub positions: Vec<[f64; 3]>,
    pub velocities: Vec<[f64; 3]>,
    pub sigma: f64,
    pub nucleus_pinned: bool,
}

impl ParticleSet {
    pub fn new(
        charges: Vec<f64>,
        masses: Vec<f64>,
        positions: Vec<[f64; 3]>,
        velocities: Vec<[f64; 3]>,
        sigma: f64,
        nucleus_pinned: bool,
    ) -> Result<Self> {
        let z = charges.len();
        if z == 0 {
            return Err(Error::Config("particle set is empty".into()));
        }
        if masses.len() != z || positions.len() != z || velocities.len() != z {
            return Err(Error::Config(format!(
                "inconsistent particle arrays: {} charges, {} masses, {} positions, {} velocities",
                z,
                masses.len(),
                positions.len(),
                velocities.len()
            )));
        }
        let total: f64 = charges.iter().sum();
        let scale: f64 = charges.iter().map(|q| q.abs()).sum::<f64>().max(1.0);
        if total.abs() > 1e-12 * scale {
            return Err(Error::NonNeutralSource { mean: total.abs(), tol: 1e-12 });
        }
        if masses.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::Config("all masses must be positive".into()));
        }
        if !(sigma > 0.0) {
            return Err(Error::Config("smearing width must be positive".into()));
        }
        if nucleus_pinned {
            let x0 = positions[0];
            let v0 = velocities[0];
            if x0 != [0.0; 3] || v0 != [0.0; 3] {
                return Err(Error::Config(
                    "pinned nucleus must sit at the origin with zero velocity".into(),
                ));
            }
        }
        Ok(ParticleSet { charges, masses, positions, velocities, sigma, nucleus_pinned })
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    /// Indices that move under dynamics and enter the multipolar sums.
    pub fn mobile_indices(&self) -> std::ops::Range<usize> {
        if self.nucleus_pinned {
            1..self.len()
        } else {
            0..self.len()
        }
    }

    /// Grid-dependent preconditions: sigma wide enough to be band-limited,
    /// every particle inside the trusted ball.
    pub fn validate_against(&self, grid: &Grid) -> Result<()> {
        let min = 3.0 * grid.dx();
        if self.sigma < min * (1.0 - 1e-12) {
            return Err(Error::SmearingTooNarrow { sigma: self.sigma, min });
        }
        let radius = grid.trusted_radius();
        for x in &self.positions {
            let c = grid.centered(*x);
            let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            if r > radius * (1.0 + 1e-12) {
                return Err(Error::OutOfTrustedRegion {
                    x: x[0],
                    y: x[1],
                    z: x[2],
                    radius,
                });
            }
        }
        Ok(())
    }
}

/// Periodic Gaussian regularization of a point: separable product of 1D
/// profiles, each an image sum over the two nearest box copies, normalized
/// so the lattice integral is 1 to well below 1e-8 whenever sigma >= 2 dx.
#[derive(Clone, Copy, Debug)]
pub struct SmearedDelta {
    pub sigma: f64,
}

impl SmearedDelta {
    pub fn new(sigma: f64) -> Self {
        assert!(sigma > 0.0, "smearing width must be positive");
        SmearedDelta { sigma }
    }

    /// 1D profile along one axis: values of the periodic Gaussian centered
    /// at `center`, including the 1/sqrt(2 pi sigma^2) normalization.
    pub fn axis_profile(&self, grid: &Grid, center: f64) -> Vec<f64> {
        let n = grid.n;
        let dx = grid.dx();
        let l = grid.length;
        let s2 = self.sigma * self.sigma;
        let norm = 1.0 / (2.0 * std::f64::consts::PI * s2).sqrt();
        (0..n)
            .map(|i| {
                let x = i as f64 * dx;
                let mut acc = 0.0;
                for m in -2..=2 {
                    let d = x - center - m as f64 * l;
                    acc += (-d * d / (2.0 * s2)).exp();
                }
                acc * norm
            })
            .collect()
    }

    /// Derivative of the 1D profile with respect to the site coordinate.
    pub fn axis_profile_dx(&self, grid: &Grid, center: f64) -> Vec<f64> {
        let n = grid.n;
        let dx = grid.dx();
        let l = grid.length;
        let s2 = self.sigma * self.sigma;
        let norm = 1.0 / (2.0 * std::f64::consts::PI * s2).sqrt();
        (0..n)
            .map(|i| {
                let x = i as f64 * dx;
                let mut acc = 0.0;
                for m in -2..=2 {
                    let d = x - center - m as f64 * l;
                    acc += -(d / s2) * (-d * d / (2.0 * s2)).exp();
                }
                acc * norm
            })
            .collect()
    }

    /// dx^3 times the lattice sum of the full 3D profile; 1 up to aliasing.
    pub fn lattice_integral(&self, grid: &Grid, center: [f64; 3]) -> f64 {
        let gx = self.axis_profile(grid, center[0]);
        let gy = self.axis_profile(grid, center[1]);
        let gz = self.axis_profile(grid, center[2]);
        let dx = grid.dx();
        let sx: f64 = gx.iter().sum();
        let sy: f64 = gy.iter().sum();
        let sz: f64 = gz.iter().sum();
        sx * sy * sz * dx * dx * dx
    }
}

/// field += weight * delta_sigma(x - center), over the whole lattice.
pub fn deposit_scalar(
    field: &mut ScalarField,
    delta: &SmearedDelta,
    center: [f64; 3],
    weight: f64,
) {
    let g = field.grid;
    let gx = delta.axis_profile(&g, center[0]);
    let gy = delta.axis_profile(&g, center[1]);
    let gz = delta.axis_profile(&g, center[2]);
    let n = g.n;
    let mut s = 0;
    for i in 0..n {
        let wx = weight * gx[i];
        for j in 0..n {
            let wxy = wx * gy[j];
            for k in 0..n {
                field.values[s] += wxy * gz[k];
                s += 1;
            }
        }
    }
}

/// field += weight_vec * delta_sigma(x - center) componentwise.
pub fn deposit_vector(
    field: &mut VectorField,
    delta: &SmearedDelta,
    center: [f64; 3],
    weight: [f64; 3],
) {
    let g = field.grid;
    let gx = delta.axis_profile(&g, center[0]);
    let gy = delta.axis_profile(&g, center[1]);
    let gz = delta.axis_profile(&g, center[2]);
    let n = g.n;
    let mut s = 0;
    for i in 0..n {
        for j in 0..n {
            let gxy = gx[i] * gy[j];
            for k in 0..n {
                let shape = gxy * gz[k];
                field.values[0][s] += weight[0] * shape;
                field.values[1][s] += weight[1] * shape;
                field.values[2][s] += weight[2] * shape;
                s += 1;
            }
        }
    }
}

/// Smeared sample of a scalar field: dx^3 sum f(x) delta_sigma(x - center).
/// Exact adjoint of `deposit_scalar`.
pub fn smeared_sample_scalar(field: &ScalarField, delta: &SmearedDelta, center: [f64; 3]) -> f64 {
    let g = field.grid;
    let gx = delta.axis_profile(&g, center[0]);
    let gy = delta.axis_profile(&g, center[1]);
    let gz = delta.axis_profile(&g, center[2]);
    let n = g.n;
    let mut acc = 0.0;
    let mut s = 0;
    for i in 0..n {
        for j in 0..n {
            let gxy = gx[i] * gy[j];
            for k in 0..n {
                acc += field.values[s] * gxy * gz[k];
                s += 1;
            }
        }
    }
    acc * g.cell_volume()
}

/// Smeared sample of a vector field; exact adjoint of `deposit_vector`.
pub fn smeared_sample_vector(
    field: &VectorField,
    delta: &SmearedDelta,
    center: [f64; 3],
) -> [f64; 3] {
    let g = field.grid;
    let gx = delta.axis_profile(&g, center[0]);
    let gy = delta.axis_profile(&g, center[1]);
    let gz = delta.axis_profile(&g, center[2]);
    let n = g.n;
    let mut acc = [0.0; 3];
    let mut s = 0;
    for i in 0..n {
        for j in 0..n {
            let gxy = gx[i] * gy[j];
            for k in 0..n {
                let shape = gxy * gz[k];
                acc[0] += field.values[0][s] * shape;
                acc[1] += field.values[1][s] * shape;
                acc[2] += field.values[2][s] * shape;
                s += 1;
            }
        }
    }
    let dv = g.cell_volume();
    [acc[0] * dv, acc[1] * dv, acc[2] * dv]
}

/// rho(x) = sum_a q_a delta_sigma(x - x_a). Mean is zero by neutrality.
pub fn charge_density(p: &ParticleSet, grid: &Grid) -> Result<ScalarField> {
    p.validate_against(grid)?;
    let delta = SmearedDelta::new(p.sigma);
    let mut rho = ScalarField::zeros(*grid);
    for a in 0..p.len() {
        if p.charges[a] != 0.0 {
            deposit_scalar(&mut rho, &delta, p.positions[a], p.charges[a]);
        }
    }
    Ok(rho)
}

/// j(x) = sum_a q_a v_a delta_sigma(x - x_a).
pub fn current_density(p: &ParticleSet, grid: &Grid) -> Result<VectorField> {
    p.validate_against(grid)?;
    let delta = SmearedDelta::new(p.sigma);
    let mut j = VectorField::zeros(*grid);
    for a in 0..p.len() {
        let q = p.charges[a];
        let v = p.velocities[a];
        if q != 0.0 && v != [0.0; 3] {
            deposit_vector(&mut j, &delta, p.positions[a], [q * v[0], q * v[1], q * v[2]]);
        }
    }
    Ok(j)
}

/// Longitudinal electric field of the instantaneous charge distribution:
/// E_par = -grad(poisson(rho)). Curl-free by construction.
pub fn longitudinal_field(p: &ParticleSet, sp: &Spectral) -> Result<VectorField> {
    let grid = sp.grid();
    let rho = charge_density(p, &grid)?;
    sp.electrostatic_field(&rho)
}

/// Relative residual of the continuity equation between two snapshots:
/// ||(rho_after - rho_before)/dt + div j_mid|| / ||d rho/dt||, with the
/// current evaluated at midpoint positions and velocities. Second order in
/// dt along smooth trajectories.
pub fn continuity_residual(
    before: &ParticleSet,
    after: &ParticleSet,
    dt: f64,
    sp: &Spectral,
) -> Result<f64> {
    let grid = sp.grid();
    if before.len() != after.len() {
        return Err(Error::Config("snapshots have different particle counts".into()));
    }
    let rho_b = charge_density(before, &grid)?;
    let rho_a = charge_density(after, &grid)?;
    let mid_x: Vec<[f64; 3]> = before
        .positions
        .iter()
        .zip(&after.positions)
        .map(|(b, a)| [0.5 * (b[0] + a[0]), 0.5 * (b[1] + a[1]), 0.5 * (b[2] + a[2])])
        .collect();
    let mid_v: Vec<[f64; 3]> = before
        .velocities
        .iter()
        .zip(&after.velocities)
        .map(|(b, a)| [0.5 * (b[0] + a[0]), 0.5 * (b[1] + a[1]), 0.5 * (b[2] + a[2])])
        .collect();
    let mid = ParticleSet::new(
        before.charges.clone(),
        before.masses.clone(),
        mid_x,
        mid_v,
        before.sigma,
        false,
    )?;
    let j_mid = current_density(&mid, &grid)?;
    let dt_rho = rho_a.add_scaled(&rho_b, -1.0).scaled(1.0 / dt);
    let resid = dt_rho.add_scaled(&sp.divergence(&j_mid), 1.0);
    let den = dt_rho.norm_l2();
    let num = resid.norm_l2();
    if den == 0.0 {
        return Ok(num);
    }
    Ok(num / den)
}
