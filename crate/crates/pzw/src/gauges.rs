//! Potentials for the lattice fields: Coulomb gauge, arbitrary gauge
//! transformations, and the radial (line-integral) gauge about the origin.
//!
//! Lattice potentials are periodic fields and live in [`Potentials`]; the
//! radial-gauge potentials are pointwise line integrals that are not
//! periodic, so they exist only as samples inside the trusted ball, where
//! probe-lattice finite differences can check that they rebuild the fields
//! they came from.

use crate::error::{Error, Result};
use crate::lattice::{
    cross3, dot3, norm3, sample_vector, Grid, ScalarField, Spectral, VectorField,
};
use crate::multipolar::IdentityResidual;
use crate::quadrature::SQuadrature;
use crate::sources::{charge_density, ParticleSet};
use crate::tolerances::{TOL_FD, TOL_ORTHOGONALITY, TOL_PROJECTION, TOL_RECONSTRUCT};

/// Which construction produced a set of potentials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeLabel {
    Coulomb,
    Poincare,
    Transformed,
}

impl GaugeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GaugeLabel::Coulomb => "coulomb",
            GaugeLabel::Poincare => "poincare",
            GaugeLabel::Transformed => "transformed",
        }
    }
}

/// Scalar potential, vector potential, and the time derivative of the
/// vector potential, as periodic lattice fields.
#[derive(Clone, Debug)]
pub struct Potentials {
    pub phi: ScalarField,
    pub a: VectorField,
    pub a_dot: VectorField,
    pub gauge_label: GaugeLabel,
}

/// A gauge function and its time derivative. No symbolic differentiation
/// happens anywhere: the caller supplies both fields.
#[derive(Clone, Debug)]
pub struct GaugeFunction {
    pub chi: ScalarField,
    pub chi_dot: ScalarField,
}

/// Dimensionless divergence content of a vector field: ||div v|| scaled by
/// the gravest wavenumber and ||v||. Zero field counts as transverse.
pub(crate) fn relative_divergence(sp: &Spectral, v: &VectorField) -> f64 {
    let norm = v.norm_l2();
    if norm == 0.0 {
        return 0.0;
    }
    let k_min = 2.0 * std::f64::consts::PI / sp.grid().length;
    sp.divergence(v).norm_l2() / (k_min * norm)
}

/// Coulomb-gauge potentials of a charge set plus a transverse radiation
/// field: the scalar potential is slaved to the instantaneous charge
/// density, the vector potential is the given transverse field, and its
/// time derivative is minus the transverse electric field.
pub fn coulomb_potentials(
    e: &VectorField,
    a_perp: &VectorField,
    p: &ParticleSet,
    sp: &Spectral,
) -> Result<Potentials> {
    let grid = sp.grid();
    e.grid.check_same(&grid, "electric field vs solver grid")?;
    a_perp.grid.check_same(&grid, "vector potential vs solver grid")?;
    let div = relative_divergence(sp, a_perp);
    if div > TOL_PROJECTION {
        return Err(Error::NonTransverseInput { div_norm: div });
    }
    let rho = charge_density(p, &grid)?;
    // Gauss law ties the longitudinal electric field to the charges; an E
    // that disagrees would make phi and a_dot describe different systems.
    let gauss = sp.divergence(e).scaled(grid.eps0).add_scaled(&rho, -1.0);
    let rho_norm = rho.norm_l2();
    let gauss_residual = if rho_norm > 0.0 {
        gauss.norm_l2() / rho_norm
    } else {
        let k_min = 2.0 * std::f64::consts::PI / grid.length;
        let e_norm = e.norm_l2();
        if e_norm > 0.0 {
            gauss.norm_l2() / (k_min * grid.eps0 * e_norm)
        } else {
            0.0
        }
    };
    if gauss_residual > 1e-6 {
        return Err(Error::InconsistentPotentials { residual: gauss_residual });
    }
    let phi = sp.poisson_solve(&rho)?;
    let a_dot = sp.transverse_part(e).scaled(-1.0);
    Ok(Potentials { phi, a: a_perp.clone(), a_dot, gauge_label: GaugeLabel::Coulomb })
}

/// phi' = phi + dchi/dt, A' = A - grad chi, dA'/dt = dA/dt - grad dchi/dt.
/// The physical fields are untouched: the scalar change cancels against
/// the time derivative of the vector change.
pub fn apply_gauge_transform(pot: &Potentials, chi: &GaugeFunction, sp: &Spectral) -> Potentials {
    let grad_chi = sp.gradient(&chi.chi);
    let grad_chi_dot = sp.gradient(&chi.chi_dot);
    Potentials {
        phi: pot.phi.add_scaled(&chi.chi_dot, 1.0),
        a: pot.a.add_scaled(&grad_chi, -1.0),
        a_dot: pot.a_dot.add_scaled(&grad_chi_dot, -1.0),
        gauge_label: GaugeLabel::Transformed,
    }
}

/// E = -dA/dt - grad phi, B = curl A.
pub fn fields_from_potentials(pot: &Potentials, sp: &Spectral) -> (VectorField, VectorField) {
    let grad_phi = sp.gradient(&pot.phi);
    let e = pot.a_dot.scaled(-1.0).add_scaled(&grad_phi, -1.0);
    let b = sp.curl(&pot.a);
    (e, b)
}

pub(crate) fn require_in_ball(grid: &Grid, x: [f64; 3]) -> Result<()> {
    let c = grid.centered(x);
    let r = norm3(c);
    let radius = grid.trusted_radius();
    if r > radius * (1.0 + 1e-12) {
        return Err(Error::OutOfTrustedRegion { x: x[0], y: x[1], z: x[2], radius });
    }
    Ok(())
}

/// Line average of E from the origin out to x: u(x) = int_0^1 E(s x) ds.
pub fn poincare_auxiliary_u(
    e: &VectorField,
    x: [f64; 3],
    quad: &SQuadrature,
) -> Result<[f64; 3]> {
    require_in_ball(&e.grid, x)?;
    let mut u = [0.0; 3];
    for (&s, &w) in quad.nodes.iter().zip(&quad.weights) {
        let sample = sample_vector(e, [s * x[0], s * x[1], s * x[2]]);
        for c in 0..3 {
            u[c] += w * sample[c];
        }
    }
    Ok(u)
}

/// First moment of B along the same ray: v(x) = int_0^1 s B(s x) ds.
pub fn poincare_auxiliary_v(
    b: &VectorField,
    x: [f64; 3],
    quad: &SQuadrature,
) -> Result<[f64; 3]> {
    require_in_ball(&b.grid, x)?;
    let mut v = [0.0; 3];
    for (&s, &w) in quad.nodes.iter().zip(&quad.weights) {
        let sample = sample_vector(b, [s * x[0], s * x[1], s * x[2]]);
        for c in 0..3 {
            v[c] += w * s * sample[c];
        }
    }
    Ok(v)
}

/// Radial-gauge potentials at one point, built from the physical fields
/// alone: phi = phi0 - x.u(x), A = -x cross v(x). The radial condition
/// x.A = 0 holds by the algebra of the cross product.
pub fn poincare_potentials(
    e: &VectorField,
    b: &VectorField,
    x: [f64; 3],
    phi0: f64,
    quad: &SQuadrature,
) -> Result<(f64, [f64; 3])> {
    let u = poincare_auxiliary_u(e, x, quad)?;
    let v = poincare_auxiliary_v(b, x, quad)?;
    let phi = phi0 - dot3(x, u);
    let a = cross3(v, x);
    Ok((phi, a))
}

/// Max of |x . A(x)| over the sample points, scaled by the largest
/// |x||A(x)|. Guards the implementation; the identity is algebraic.
pub fn verify_poincare_condition(
    b: &VectorField,
    points: &[[f64; 3]],
    quad: &SQuadrature,
) -> Result<IdentityResidual> {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for &x in points {
        let v = poincare_auxiliary_v(b, x, quad)?;
        let a = cross3(v, x);
        worst = worst.max(dot3(x, a).abs());
        scale = scale.max(norm3(x) * norm3(a));
    }
    let residual = if scale > 0.0 { worst / scale } else { worst };
    Ok(IdentityResidual { residual, tolerance: TOL_ORTHOGONALITY })
}

/// A cubic probe lattice centered on the origin, covering
/// [-half_width, half_width] per axis with per_axis points. Derivatives on
/// it use fourth-order centered stencils, so interior points keep a
/// two-point margin.
#[derive(Clone, Copy, Debug)]
pub struct ProbeGrid {
    pub half_width: f64,
    pub per_axis: usize,
}

impl ProbeGrid {
    /// Default probe coverage: the inner ball of the trusted region.
    pub fn for_grid(grid: &Grid) -> ProbeGrid {
        ProbeGrid { half_width: grid.length / 8.0, per_axis: 21 }
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.per_axis - 1) as f64
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.step();
        [
            -self.half_width + i as f64 * h,
            -self.half_width + j as f64 * h,
            -self.half_width + k as f64 * h,
        ]
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.per_axis + j) * self.per_axis + k
    }

    fn validate(&self) -> Result<()> {
        if self.per_axis < 5 {
            return Err(Error::Config(
                "probe lattice needs at least 5 points per axis for the stencils".into(),
            ));
        }
        if !(self.half_width > 0.0) {
            return Err(Error::Config("probe half width must be positive".into()));
        }
        Ok(())
    }
}

/// Fills a probe lattice with per-point 3-vectors.
fn probe_lattice(
    pg: &ProbeGrid,
    mut eval: impl FnMut([f64; 3]) -> Result<[f64; 3]>,
) -> Result<Vec<[f64; 3]>> {
    let n = pg.per_axis;
    let mut out = vec![[0.0; 3]; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[pg.idx(i, j, k)] = eval(pg.point(i, j, k))?;
            }
        }
    }
    Ok(out)
}

/// Fourth-order centered first derivative along one probe axis.
fn stencil_derivative(
    pg: &ProbeGrid,
    data: &[[f64; 3]],
    i: usize,
    j: usize,
    k: usize,
    axis: usize,
    component: usize,
) -> f64 {
    let at = |di: i64| -> f64 {
        let (mut a, mut b, mut c) = (i as i64, j as i64, k as i64);
        match axis {
            0 => a += di,
            1 => b += di,
            _ => c += di,
        }
        data[pg.idx(a as usize, b as usize, c as usize)][component]
    };
    (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * pg.step())
}

fn rms(acc: f64, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        (acc / count as f64).sqrt()
    }
}

/// Residuals of the two differential conditions the auxiliary line
/// integrals inherit from the homogeneous field equations.
#[derive(Clone, Copy, Debug)]
pub struct AuxiliaryReport {
    /// ||curl u + dv/dt|| over ||dv/dt|| (or the scaled ||u|| when static).
    pub curl_residual: f64,
    /// ||div v|| scaled by the gravest wavenumber and ||v||.
    pub div_residual: f64,
    pub tolerance: f64,
}

impl AuxiliaryReport {
    pub fn passes(&self) -> bool {
        self.curl_residual < self.tolerance && self.div_residual < self.tolerance
    }
}

/// Checks curl u = -dv/dt and div v = 0 on the probe lattice, with u and v
/// built from two field snapshots dt apart. The time derivative is a
/// centered difference at the midpoint, u is evaluated from the averaged
/// snapshot, and spatial derivatives are fourth-order stencils, so the
/// residual floor is O(step^2 from sampling) + O(dt^2). For sharper floors
/// refine the fields spectrally before calling.
pub fn verify_auxiliary_conditions(
    e0: &VectorField,
    e1: &VectorField,
    b0: &VectorField,
    b1: &VectorField,
    dt: f64,
    pg: &ProbeGrid,
    quad: &SQuadrature,
) -> Result<AuxiliaryReport> {
    pg.validate()?;
    e0.grid.check_same(&e1.grid, "electric snapshots")?;
    e0.grid.check_same(&b0.grid, "electric vs magnetic snapshots")?;
    b0.grid.check_same(&b1.grid, "magnetic snapshots")?;
    if !(dt > 0.0) {
        return Err(Error::Config("snapshot spacing dt must be positive".into()));
    }
    let e_mid = e0.add_scaled(e1, 1.0).scaled(0.5);
    let u = probe_lattice(pg, |x| poincare_auxiliary_u(&e_mid, x, quad))?;
    let v0 = probe_lattice(pg, |x| poincare_auxiliary_v(b0, x, quad))?;
    let v1 = probe_lattice(pg, |x| poincare_auxiliary_v(b1, x, quad))?;
    let n = pg.per_axis;
    let mut curl_num = 0.0;
    let mut curl_den = 0.0;
    let mut div_num = 0.0;
    let mut v_sq = 0.0;
    let mut u_sq = 0.0;
    let mut count = 0;
    for i in 2..n - 2 {
        for j in 2..n - 2 {
            for k in 2..n - 2 {
                let s = pg.idx(i, j, k);
                let dv = [
                    (v1[s][0] - v0[s][0]) / dt,
                    (v1[s][1] - v0[s][1]) / dt,
                    (v1[s][2] - v0[s][2]) / dt,
                ];
                let d = |axis: usize, comp: usize| stencil_derivative(pg, &u, i, j, k, axis, comp);
                let curl_u = [
                    d(1, 2) - d(2, 1),
                    d(2, 0) - d(0, 2),
                    d(0, 1) - d(1, 0),
                ];
                for c in 0..3 {
                    let r = curl_u[c] + dv[c];
                    curl_num += r * r;
                    curl_den += dv[c] * dv[c];
                    u_sq += u[s][c] * u[s][c];
                }
                let vm = |axis: usize, comp: usize| {
                    let (a, b) = (v0.as_slice(), v1.as_slice());
                    0.5 * (stencil_derivative(pg, a, i, j, k, axis, comp)
                        + stencil_derivative(pg, b, i, j, k, axis, comp))
                };
                let div_v = vm(0, 0) + vm(1, 1) + vm(2, 2);
                div_num += div_v * div_v;
                for c in 0..3 {
                    let mid = 0.5 * (v0[s][c] + v1[s][c]);
                    v_sq += mid * mid;
                }
                count += 1;
            }
        }
    }
    let grid_len = e0.grid.length;
    let k_min = 2.0 * std::f64::consts::PI / grid_len;
    let dv_rms = rms(curl_den, 3 * count);
    let u_rms = rms(u_sq, 3 * count);
    let curl_scale = dv_rms.max(k_min * u_rms);
    let curl_residual = if curl_scale > 0.0 {
        rms(curl_num, 3 * count) / curl_scale
    } else {
        0.0
    };
    let v_rms = rms(v_sq, 3 * count);
    let div_residual = if v_rms > 0.0 { rms(div_num, count) / (k_min * v_rms) } else { 0.0 };
    Ok(AuxiliaryReport { curl_residual, div_residual, tolerance: TOL_FD })
}

/// How well the physical fields are rebuilt from radial-gauge potentials
/// sampled on the probe lattice.
#[derive(Clone, Copy, Debug)]
pub struct ReconstructionReport {
    pub e_residual: f64,
    pub b_residual: f64,
    pub tolerance: f64,
}

impl ReconstructionReport {
    pub fn passes(&self) -> bool {
        self.e_residual < self.tolerance && self.b_residual < self.tolerance
    }
}

/// Rebuilds B = curl A and E = -grad phi - dA/dt from probe-sampled
/// radial-gauge potentials and compares against the fields themselves at
/// the midpoint of the two snapshots. phi0 drops out of E through the
/// stencil differences, leaving only subtraction rounding.
pub fn poincare_reconstruction(
    e0: &VectorField,
    e1: &VectorField,
    b0: &VectorField,
    b1: &VectorField,
    dt: f64,
    phi0: f64,
    pg: &ProbeGrid,
    quad: &SQuadrature,
) -> Result<ReconstructionReport> {
    pg.validate()?;
    e0.grid.check_same(&e1.grid, "electric snapshots")?;
    e0.grid.check_same(&b0.grid, "electric vs magnetic snapshots")?;
    b0.grid.check_same(&b1.grid, "magnetic snapshots")?;
    if !(dt > 0.0) {
        return Err(Error::Config("snapshot spacing dt must be positive".into()));
    }
    let e_mid = e0.add_scaled(e1, 1.0).scaled(0.5);
    let b_mid = b0.add_scaled(b1, 1.0).scaled(0.5);
    let a0 = probe_lattice(pg, |x| {
        poincare_auxiliary_v(b0, x, quad).map(|v| cross3(v, x))
    })?;
    let a1 = probe_lattice(pg, |x| {
        poincare_auxiliary_v(b1, x, quad).map(|v| cross3(v, x))
    })?;
    // phi rides in a vector lattice so the stencil helper applies; only
    // component 0 is used.
    let phi = probe_lattice(pg, |x| {
        poincare_auxiliary_u(&e_mid, x, quad).map(|u| [phi0 - dot3(x, u), 0.0, 0.0])
    })?;
    let a_mid: Vec<[f64; 3]> = a0
        .iter()
        .zip(&a1)
        .map(|(p, q)| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])])
        .collect();
    let n = pg.per_axis;
    let mut e_num = 0.0;
    let mut e_den = 0.0;
    let mut b_num = 0.0;
    let mut b_den = 0.0;
    for i in 2..n - 2 {
        for j in 2..n - 2 {
            for k in 2..n - 2 {
                let s = pg.idx(i, j, k);
                let x = pg.point(i, j, k);
                let da = |axis: usize, comp: usize| {
                    stencil_derivative(pg, &a_mid, i, j, k, axis, comp)
                };
                let b_rec = [
                    da(1, 2) - da(2, 1),
                    da(2, 0) - da(0, 2),
                    da(0, 1) - da(1, 0),
                ];
                let b_true = sample_vector(&b_mid, x);
                for c in 0..3 {
                    let r = b_rec[c] - b_true[c];
                    b_num += r * r;
                    b_den += b_true[c] * b_true[c];
                }
                let e_true = sample_vector(&e_mid, x);
                for c in 0..3 {
                    let grad_phi = stencil_derivative(pg, &phi, i, j, k, c, 0);
                    let a_rate = (a1[s][c] - a0[s][c]) / dt;
                    let r = -grad_phi - a_rate - e_true[c];
                    e_num += r * r;
                    e_den += e_true[c] * e_true[c];
                }
            }
        }
    }
    let e_residual = if e_den > 0.0 { (e_num / e_den).sqrt() } else { e_num.sqrt() };
    let b_residual = if b_den > 0.0 { (b_num / b_den).sqrt() } else { b_num.sqrt() };
    Ok(ReconstructionReport { e_residual, b_residual, tolerance: TOL_RECONSTRUCT })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Grid;

    fn quad() -> SQuadrature {
        SQuadrature::gauss_legendre(32)
    }

    fn static_dipole(grid: &Grid) -> ParticleSet {
        ParticleSet::new(
            vec![1.0, -1.0],
            vec![1.0e4, 1.0],
            vec![[0.0; 3], [0.2, 0.05, -0.1]],
            vec![[0.0; 3], [0.0; 3]],
            3.0 * grid.dx(),
            true,
        )
        .unwrap()
    }

    fn transverse_mode(grid: &Grid, amp: f64) -> VectorField {
        let a = 2.0 * std::f64::consts::PI / grid.length;
        VectorField::from_fn(*grid, |x| [0.0, amp * (a * x[0]).cos(), 0.0])
    }

    #[test]
    fn zero_potentials_give_zero_fields() {
        let g = Grid::cubic(16, 1.0).unwrap();
        let sp = Spectral::new(g);
        let pot = Potentials {
            phi: ScalarField::zeros(g),
            a: VectorField::zeros(g),
            a_dot: VectorField::zeros(g),
            gauge_label: GaugeLabel::Coulomb,
        };
        let (e, b) = fields_from_potentials(&pot, &sp);
        assert_eq!(e.norm_l2(), 0.0);
        assert_eq!(b.norm_l2(), 0.0);
    }

    #[test]
    fn electrostatic_round_trip_recovers_fields() {
        let g = Grid::cubic(32, 1.0).unwrap();
        let sp = Spectral::new(g);
        let p = static_dipole(&g);
        let e = crate::sources::longitudinal_field(&p, &sp).unwrap();
        let pot = coulomb_potentials(&e, &VectorField::zeros(g), &p, &sp).unwrap();
        assert_eq!(pot.gauge_label, GaugeLabel::Coulomb);
        assert_eq!(pot.a.norm_l2(), 0.0);
        // transverse projection of a longitudinal field leaves rounding dust
        assert!(pot.a_dot.norm_l2() < 1e-12);
        let (e_rec, b_rec) = fields_from_potentials(&pot, &sp);
        let diff = e_rec.add_scaled(&e, -1.0);
        assert!(diff.norm_l2() / e.norm_l2() < 1e-12);
        assert_eq!(b_rec.norm_l2(), 0.0);
    }

    #[test]
    fn radiation_round_trip_keeps_transverse_fields() {
        let g = Grid::cubic(32, 1.0).unwrap();
        let sp = Spectral::new(g);
        let p = ParticleSet::new(
            vec![1.0, -1.0],
            vec![1.0e4, 1.0],
            vec![[0.0; 3], [0.0; 3]],
            vec![[0.0; 3], [0.0; 3]],
            3.0 * g.dx(),
            true,
        )
        .unwrap();
        let a_perp = transverse_mode(&g, 0.7);
        let e_perp = transverse_mode(&g, -0.3);
        let pot = coulomb_potentials(&e_perp, &a_perp, &p, &sp).unwrap();
        assert_eq!(pot.phi.norm_l2(), 0.0);
        let (e_rec, b_rec) = fields_from_potentials(&pot, &sp);
        let e_diff = e_rec.add_scaled(&e_perp, -1.0);
        assert!(e_diff.norm_l2() / e_perp.norm_l2() < 1e-12);
        let b_want = sp.curl(&a_perp);
        let b_diff = b_rec.add_scaled(&b_want, -1.0);
        assert!(b_diff.norm_l2() / b_want.norm_l2() < 1e-12);
    }

    #[test]
    fn longitudinal_vector_potential_is_rejected() {
        let g = Grid::cubic(16, 1.0).unwrap();
        let sp = Spectral::new(g);
        let p = static_dipole(&g);
        let e = crate::sources::longitudinal_field(&p, &sp).unwrap();
        let a = 2.0 * std::f64::consts::PI / g.length;
        let bad = VectorField::from_fn(g, |x| [(a * x[0]).sin(), 0.0, 0.0]);
        assert!(matches!(
            coulomb_potentials(&e, &bad, &p, &sp),
            Err(Error::NonTransverseInput { .. })
        ));
    }

    #[test]
    fn field_inconsistent_with_charges_is_rejected() {
        let g = Grid::cubic(32, 1.0).unwrap();
        let sp = Spectral::new(g);
        let p = static_dipole(&g);
        let e = crate::sources::longitudinal_field(&p, &sp).unwrap().scaled(2.0);
        assert!(matches!(
            coulomb_potentials(&e, &VectorField::zeros(g), &p, &sp),
            Err(Error::InconsistentPotentials { .. })
        ));
    }

    #[test]
    fn gauge_transform_shifts_potentials_analytically() {
        let g = Grid::cubic(32, 1.0).unwrap();
        let sp = Spectral::new(g);
        let a = 2.0 * std::f64::consts::PI / g.length;
        let t = 0.7;
        let chi = GaugeFunction {
            chi: ScalarField::from_fn(g, |x| t * (a * x[0]).sin()),
            chi_dot: ScalarField::from_fn(g, |x| (a * x[0]).sin()),
        };
        let pot = Potentials {
            phi: ScalarField::zeros(g),
            a: VectorField::zeros(g),
            a_dot: VectorField::zeros(g),
            gauge_label: GaugeLabel::Coulomb,
        };
        let moved = apply_gauge_transform(&pot, &chi, &sp);
        assert_eq!(moved.gauge_label, GaugeLabel::Transformed);
        let phi_want = ScalarField::from_fn(g, |x| (a * x[0]).sin());
        let phi_diff = moved.phi.add_scaled(&phi_want, -1.0);
        assert!(phi_diff.norm_l2() < 1e-12 * phi_want.norm_l2());
        let a_want = VectorField::from_fn(g, |x| [-t * a * (a * x[0]).cos(), 0.0, 0.0]);
        let a_diff = moved.a.add_scaled(&a_want, -1.0);
        assert!(a_diff.norm_l2() < 1e-12 * a_want.norm_l2());
    }

    #[test]
    fn gauge_transform_preserves_fields_and_transverse_a() {
        let g = Grid::cubic(32, 1.0).unwrap();
        let sp = Spectral::new(g);
        let p = static_dipole(&g);
        let e_par = crate::sources::longitudinal_field(&p, &sp).unwrap();
        let a_perp = transverse_mode(&g, 0.4);
        let e = e_par.add_scaled(&transverse_mode(&g, -0.2), 1.0);
        let pot = coulomb_potentials(&e, &a_perp, &p, &sp).unwrap();
        let (e0, b0) = fields_from_potentials(&pot, &sp);
        let a = 2.0 * std::f64::consts::PI / g.length;
        let chi = GaugeFunction {
            chi: ScalarField::from_fn(g, |x| {
                0.3 * (a * x[0]).sin() * (2.0 * a * x[1]).cos() + 0.1 * (a * x[2]).sin()
            }),
            chi_dot: ScalarField::from_fn(g, |x| 0.8 * (a * (x[1] + x[2])).cos()),
        };
        let moved = apply_gauge_transform(&pot, &chi, &sp);
        let (e1, b1) = fields_from_potentials(&moved, &sp);
        assert!(e1.add_scaled(&e0, -1.0).norm_l2() / e0.norm_l2() < 1e-10);
        assert!(b1.add_scaled(&b0, -1.0).norm_l2() / b0.norm_l2() < 1e-10);
        let a0 = sp.transverse_part(&pot.a);
        let a1 = sp.transverse_part(&moved.a);
        assert!(a1.add_scaled(&a0, -1.0).norm_l2() / a0.norm_l2() < 1e-10);
    }

    #[test]
    fn line_average_of_constant_field_is_the_constant() {
        let g = Grid::cubic(16, 1.0).unwrap();
        let e = VectorField::from_fn(g, |_| [1.5, -0.25, 0.75]);
        let u = poincare_auxiliary_u(&e, [0.2, -0.1, 0.05], &quad()).unwrap();
        for (got, want) in u.iter().zip([1.5, -0.25, 0.75]) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn line_average_of_linear_field_halves_it() {
        let g = Grid::cubic(32, 1.0).unwrap();
        // linear in x near the origin; trilinear sampling is exact on it
        let e = VectorField::from_fn(g, |x| {
            let c = g.centered(x);
            [c[0], 0.0, 0.0]
        });
        let x = [0.2, 0.0, 0.0];
        let u = poincare_auxiliary_u(&e, x, &quad()).unwrap();
        assert!((u[0] - 0.5 * x[0]).abs() < 1e-13, "{}", u[0]);
        assert!(u[1].abs() < 1e-15 && u[2].abs() < 1e-15);
    }

    #[test]
    fn line_average_at_origin_is_the_field_there() {
        let g = Grid::cubic(16, 1.0).unwrap();
        let a = 2.0 * std::f64::consts::PI / g.length;
        let e = VectorField::from_fn(g, |x| [(a * x[1]).cos(), (a * x[2]).sin(), 0.3]);
        let u = poincare_auxiliary_u(&e, [0.0; 3], &quad()).unwrap();
        let want = sample_vector(&e, [0.0; 3]);
        for c in 0..3 {
            assert!((u[c] - want[c]).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_b_gives_the_symmetric_gauge_potential() {
        let g = Grid::cubic(16, 1.0).unwrap();
        let b0 = 1.3;
        let b = VectorField::from_fn(g, |_| [0.0, 0.0, b0]);
        let x = [0.12, -0.08, 0.2];
        let (phi, a) = poincare_potentials(&VectorField::zeros(g), &b, x, 0.0, &quad()).unwrap();
        assert_eq!(phi, 0.0);
        let want = cross3([0.0, 0.0, 0.5 * b0], x);
        for c in 0..3 {
            assert!((a[c] - want[c]).abs() < 1e-12, "component {c}");
        }
        assert!(dot3(x, a).abs() < 1e-15);
    }

    #[test]
    fn radial_potentials_at_origin_reduce_to_reference_value() {
        let g = Grid::cubic(16, 1.0).unwrap();
        let b = VectorField::from_fn(g, |_| [0.0, 1.0, 0.0]);
        let e = VectorField::from_fn(g, |_| [1.0, 0.0, 0.0]);
        let (phi, a) = poincare_potentials(&e, &b, [0.0; 3], 4.25, &quad()).unwrap();
        assert_eq!(phi, 4.25);
        assert_eq!(a, [0.0; 3]);
    }

    #[test]
    fn points_outside_the_trusted_ball_are_rejected() {
        let g = Grid::cubic(16, 1.0).unwrap();
        let e = VectorField::zeros(g);
        assert!(matches!(
            poincare_auxiliary_u(&e, [0.3, 0.0, 0.0], &quad()),
            Err(Error::OutOfTrustedRegion { .. })
        ));
    }

    #[test]
    fn radial_condition_holds_at_random_points() {
        let g = Grid::cubic(16, 1.0).unwrap();
        let a = 2.0 * std::f64::consts::PI / g.length;
        let b = VectorField::from_fn(g, |x| {
            [
                (a * x[1]).sin() + 0.2 * (a * x[2]).cos(),
                (a * x[2]).sin(),
                0.5 * (a * x[0]).cos(),
            ]
        });
        // low-discrepancy points in the ball via a fixed multiplicative rule
        let mut points = Vec::new();
        let mut state = 0.5f64;
        while points.len() < 100 {
            let mut p = [0.0; 3];
            for c in &mut p {
                state = (state * 997.0 + 0.171) % 1.0;
                *c = (state - 0.5) * 0.25;
            }
            if norm3(p) <= 0.125 {
                points.push(p);
            }
        }
        let r = verify_poincare_condition(&b, &points, &quad()).unwrap();
        assert!(r.passes(), "residual {}", r.residual);
    }

    #[test]
    fn auxiliary_conditions_hold_for_uniform_b() {
        let g = Grid::cubic(16, 1.0).unwrap();
        let b = VectorField::from_fn(g, |_| [0.0, 0.0, 2.0]);
        let e = VectorField::zeros(g);
        let pg = ProbeGrid { half_width: 0.125, per_axis: 9 };
        let r = verify_auxiliary_conditions(&e, &e, &b, &b, 0.1, &pg, &quad()).unwrap();
        // constant fields survive sampling and stencils up to ulp noise
        assert!(r.curl_residual < 1e-12, "curl residual {}", r.curl_residual);
        assert!(r.div_residual < 1e-12, "div residual {}", r.div_residual);
        assert!(r.passes());
    }

    #[test]
    fn line_average_of_electrostatic_field_is_curl_free() {
        let g = Grid::cubic(32, 1.0).unwrap();
        let sp = Spectral::new(g);
        let p = static_dipole(&g);
        let e = crate::sources::longitudinal_field(&p, &sp).unwrap();
        let e_fine = sp.refine_vector(&e, 2);
        let b = VectorField::zeros(e_fine.grid);
        let pg = ProbeGrid { half_width: 0.125, per_axis: 13 };
        let r = verify_auxiliary_conditions(&e_fine, &e_fine, &b, &b, 0.1, &pg, &quad()).unwrap();
        assert!(r.curl_residual < 2e-2, "curl residual {}", r.curl_residual);
        assert_eq!(r.div_residual, 0.0);
    }

    /// Exact vacuum standing wave: A = e_y A0 cos(k x) cos(w t) with w = k
    /// (c = 1), E = -dA/dt, B = curl A. Gives two consistent snapshots in
    /// closed form without running dynamics.
    fn standing_wave(g: &Grid, t: f64) -> (VectorField, VectorField) {
        let k = 2.0 * std::f64::consts::PI / g.length;
        let a0 = 1.0;
        let e = VectorField::from_fn(*g, |x| {
            [0.0, a0 * k * (k * x[0]).cos() * (k * t).sin(), 0.0]
        });
        let b = VectorField::from_fn(*g, |x| {
            [0.0, 0.0, -a0 * k * (k * x[0]).sin() * (k * t).cos()]
        });
        (e, b)
    }

    #[test]
    fn auxiliary_conditions_hold_for_a_vacuum_wave() {
        let g = Grid::cubic(32, 1.0).unwrap();
        let sp = Spectral::new(g);
        let dt = 1e-3;
        let (e0, b0) = standing_wave(&g, 0.2);
        let (e1, b1) = standing_wave(&g, 0.2 + dt);
        let e0 = sp.refine_vector(&e0, 2);
        let e1 = sp.refine_vector(&e1, 2);
        let b0 = sp.refine_vector(&b0, 2);
        let b1 = sp.refine_vector(&b1, 2);
        let pg = ProbeGrid { half_width: 0.125, per_axis: 13 };
        let r = verify_auxiliary_conditions(&e0, &e1, &b0, &b1, dt, &pg, &quad()).unwrap();
        assert!(r.curl_residual < 2e-2, "curl residual {}", r.curl_residual);
        assert!(r.div_residual < 2e-2, "div residual {}", r.div_residual);
    }

    #[test]
    fn vacuum_wave_fields_rebuild_from_radial_potentials() {
        let g = Grid::cubic(32, 1.0).unwrap();
        let sp = Spectral::new(g);
        let dt = 1e-3;
        let (e0, b0) = standing_wave(&g, 0.2);
        let (e1, b1) = standing_wave(&g, 0.2 + dt);
        let e0 = sp.refine_vector(&e0, 2);
        let e1 = sp.refine_vector(&e1, 2);
        let b0 = sp.refine_vector(&b0, 2);
        let b1 = sp.refine_vector(&b1, 2);
        let pg = ProbeGrid { half_width: 0.125, per_axis: 13 };
        let r = poincare_reconstruction(&e0, &e1, &b0, &b1, dt, 0.0, &pg, &quad()).unwrap();
        assert!(r.e_residual < 2e-2, "E residual {}", r.e_residual);
        assert!(r.b_residual < 2e-2, "B residual {}", r.b_residual);
        // the reference value of phi cannot reach any physical output;
        // only rounding from the large-constant subtraction survives
        let shifted =
            poincare_reconstruction(&e0, &e1, &b0, &b1, dt, 17.3, &pg, &quad()).unwrap();
        assert!((r.e_residual - shifted.e_residual).abs() < 1e-9 * r.e_residual);
        assert_eq!(r.b_residual, shifted.b_residual);
    }
}
