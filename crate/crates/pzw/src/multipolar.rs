//! Line-segment polarization and magnetization of a bound charge set.
//!
//! Each mobile charge is joined to the nucleus at the origin by a straight
//! segment carrying dipole density. Minus the divergence of the resulting
//! polarization reproduces the charge density, and its time derivative plus
//! the curl of the companion magnetization reproduces the current density.
//! Both statements are distribution identities, linear in the delta, so
//! they survive the Gaussian smearing exactly; on the lattice the only
//! error left is the s-quadrature of the segment integrals, which
//! Gauss-Legendre drives to rounding for the widths admitted by
//! [`ParticleSet::validate_against`].

use crate::error::{Error, Result};
use crate::lattice::{cross3, Grid, ScalarField, Spectral, VectorField};
use crate::quadrature::SQuadrature;
use crate::sources::{
    charge_density, current_density, deposit_scalar, longitudinal_field, ParticleSet, SmearedDelta,
};
use crate::tolerances::{TOL_IDENTITY, TOL_QUAD};

/// Outcome of one lattice identity check: the relative L2 residual and the
/// gate it is judged against.
#[derive(Clone, Copy, Debug)]
pub struct IdentityResidual {
    pub residual: f64,
    pub tolerance: f64,
}

impl IdentityResidual {
    pub fn passes(&self) -> bool {
        self.residual < self.tolerance
    }
}

fn require_pinned(p: &ParticleSet) -> Result<()> {
    if !p.nucleus_pinned {
        return Err(Error::Config(
            "segment moments are defined about the origin; pin the nucleus".into(),
        ));
    }
    Ok(())
}

/// sum_i coeff(w_i, s_i) * delta_sigma(x - s_i * x_a), accumulated over the
/// quadrature nodes of one particle's segment.
fn segment_profile(
    grid: &Grid,
    delta: &SmearedDelta,
    x: [f64; 3],
    quad: &SQuadrature,
    coeff: impl Fn(f64, f64) -> f64,
) -> ScalarField {
    let mut acc = ScalarField::zeros(*grid);
    for (&s, &w) in quad.nodes.iter().zip(&quad.weights) {
        deposit_scalar(&mut acc, delta, [s * x[0], s * x[1], s * x[2]], coeff(w, s));
    }
    acc
}

/// field += weight * (dir . grad) delta_sigma(x - center), using the
/// closed-form Gaussian gradient, one axis derivative per term.
fn deposit_directional_gradient(
    field: &mut ScalarField,
    delta: &SmearedDelta,
    center: [f64; 3],
    dir: [f64; 3],
    weight: f64,
) {
    let g = field.grid;
    let gx = delta.axis_profile(&g, center[0]);
    let gy = delta.axis_profile(&g, center[1]);
    let gz = delta.axis_profile(&g, center[2]);
    let hx = delta.axis_profile_dx(&g, center[0]);
    let hy = delta.axis_profile_dx(&g, center[1]);
    let hz = delta.axis_profile_dx(&g, center[2]);
    let n = g.n;
    let mut s = 0;
    for i in 0..n {
        for j in 0..n {
            let a = dir[0] * hx[i] * gy[j] + dir[1] * gx[i] * hy[j];
            let b = dir[2] * gx[i] * gy[j];
            for k in 0..n {
                field.values[s] += weight * (a * gz[k] + b * hz[k]);
                s += 1;
            }
        }
    }
}

/// Evaluates `assemble` at the requested order and again at double order;
/// rejects the quadrature if the refinement moves the field.
fn certified(
    quad: &SQuadrature,
    assemble: impl Fn(&SQuadrature) -> VectorField,
) -> Result<VectorField> {
    let base = assemble(quad);
    let fine = assemble(&SQuadrature::gauss_legendre(2 * quad.order()));
    let scale = fine.norm_l2();
    if scale > 0.0 {
        let delta = base.add_scaled(&fine, -1.0).norm_l2() / scale;
        if delta > TOL_QUAD {
            return Err(Error::QuadratureTooCoarse { order: quad.order(), delta });
        }
    }
    Ok(base)
}

fn assemble_polarization(p: &ParticleSet, grid: &Grid, quad: &SQuadrature) -> VectorField {
    let delta = SmearedDelta::new(p.sigma);
    let mut field = VectorField::zeros(*grid);
    for a in p.mobile_indices() {
        let q = p.charges[a];
        let x = p.positions[a];
        if q == 0.0 || x == [0.0; 3] {
            continue;
        }
        let profile = segment_profile(grid, &delta, x, quad, |w, _| w);
        for c in 0..3 {
            let amp = q * x[c];
            for (out, &v) in field.values[c].iter_mut().zip(&profile.values) {
                *out += amp * v;
            }
        }
    }
    field
}

/// P(x) = sum_a q_a x_a int_0^1 ds delta_sigma(x - s x_a), the straight
/// segment from the origin to each mobile charge.
pub fn polarization_field(p: &ParticleSet, grid: &Grid, quad: &SQuadrature) -> Result<VectorField> {
    require_pinned(p)?;
    p.validate_against(grid)?;
    certified(quad, |q| assemble_polarization(p, grid, q))
}

fn assemble_magnetization(p: &ParticleSet, grid: &Grid, quad: &SQuadrature) -> VectorField {
    let delta = SmearedDelta::new(p.sigma);
    let mut field = VectorField::zeros(*grid);
    for a in p.mobile_indices() {
        let q = p.charges[a];
        let m = cross3(p.positions[a], p.velocities[a]);
        if q == 0.0 || m == [0.0; 3] {
            continue;
        }
        let profile = segment_profile(grid, &delta, p.positions[a], quad, |w, s| w * s);
        for c in 0..3 {
            let amp = q * m[c];
            for (out, &v) in field.values[c].iter_mut().zip(&profile.values) {
                *out += amp * v;
            }
        }
    }
    field
}

/// M(x) = sum_a q_a (x_a cross v_a) int_0^1 s ds delta_sigma(x - s x_a).
pub fn magnetization_field(
    p: &ParticleSet,
    grid: &Grid,
    quad: &SQuadrature,
) -> Result<VectorField> {
    require_pinned(p)?;
    p.validate_against(grid)?;
    certified(quad, |q| assemble_magnetization(p, grid, q))
}

fn assemble_polarization_rate(p: &ParticleSet, grid: &Grid, quad: &SQuadrature) -> VectorField {
    let delta = SmearedDelta::new(p.sigma);
    let mut field = VectorField::zeros(*grid);
    for a in p.mobile_indices() {
        let q = p.charges[a];
        let x = p.positions[a];
        let v = p.velocities[a];
        if q == 0.0 || v == [0.0; 3] {
            continue;
        }
        // moving endpoint: v rides the plain segment profile
        let profile = segment_profile(grid, &delta, x, quad, |w, _| w);
        for c in 0..3 {
            let amp = q * v[c];
            for (out, &pv) in field.values[c].iter_mut().zip(&profile.values) {
                *out += amp * pv;
            }
        }
        // moving shape: each node's delta slides with velocity s v
        if x == [0.0; 3] {
            continue;
        }
        let mut grad = ScalarField::zeros(*grid);
        for (&s, &w) in quad.nodes.iter().zip(&quad.weights) {
            deposit_directional_gradient(
                &mut grad,
                &delta,
                [s * x[0], s * x[1], s * x[2]],
                v,
                w * s,
            );
        }
        for c in 0..3 {
            let amp = -q * x[c];
            for (out, &gv) in field.values[c].iter_mut().zip(&grad.values) {
                *out += amp * gv;
            }
        }
    }
    field
}

/// Analytic dP/dt: dP/dt = sum_a q_a [v_a int_0^1 ds delta_sigma(x - s x_a)
/// - x_a int_0^1 s ds (v_a . grad) delta_sigma(x - s x_a)]. Closed-form
/// Gaussian gradients, so the identity check below carries no finite
/// difference noise.
pub fn polarization_time_derivative(
    p: &ParticleSet,
    grid: &Grid,
    quad: &SQuadrature,
) -> Result<VectorField> {
    require_pinned(p)?;
    p.validate_against(grid)?;
    certified(quad, |q| assemble_polarization_rate(p, grid, q))
}

fn relative_l2(num: &VectorField, scale: f64) -> f64 {
    let n = num.norm_l2();
    if scale > 0.0 {
        n / scale
    } else {
        n
    }
}

/// Residual of rho + div P over ||rho||.
pub fn verify_charge_identity(
    p: &ParticleSet,
    sp: &Spectral,
    quad: &SQuadrature,
) -> Result<IdentityResidual> {
    let grid = sp.grid();
    let rho = charge_density(p, &grid)?;
    let pol = polarization_field(p, &grid, quad)?;
    let div = sp.divergence(&pol);
    let num = rho.add_scaled(&div, 1.0);
    let scale = rho.norm_l2();
    let residual = if scale > 0.0 { num.norm_l2() / scale } else { num.norm_l2() };
    Ok(IdentityResidual { residual, tolerance: TOL_IDENTITY })
}

/// Residual of j - dP/dt - curl M over ||j||.
pub fn verify_current_identity(
    p: &ParticleSet,
    sp: &Spectral,
    quad: &SQuadrature,
) -> Result<IdentityResidual> {
    let grid = sp.grid();
    let j = current_density(p, &grid)?;
    let rate = polarization_time_derivative(p, &grid, quad)?;
    let curl = sp.curl(&magnetization_field(p, &grid, quad)?);
    let num = j.add_scaled(&rate, -1.0).add_scaled(&curl, -1.0);
    let residual = relative_l2(&num, j.norm_l2());
    Ok(IdentityResidual { residual, tolerance: TOL_IDENTITY })
}

/// Residual of eps0 E_par + P_par over ||P_par||: the longitudinal
/// electric field is minus the longitudinal polarization up to eps0, which
/// is the statement that the displacement field of the bound set is
/// transverse.
pub fn verify_longitudinal_identity(
    p: &ParticleSet,
    sp: &Spectral,
    quad: &SQuadrature,
) -> Result<IdentityResidual> {
    let grid = sp.grid();
    let e_par = longitudinal_field(p, sp)?;
    let pol = polarization_field(p, &grid, quad)?;
    let p_par = sp.longitudinal_part(&pol);
    let num = e_par.scaled(grid.eps0).add_scaled(&p_par, 1.0);
    let residual = relative_l2(&num, p_par.norm_l2());
    Ok(IdentityResidual { residual, tolerance: TOL_IDENTITY })
}
