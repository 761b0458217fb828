//! Self-consistent time integration of particles and transverse field.
//!
//! The field evolves in mode space, where the vacuum Maxwell equations
//! dA/dt = -E, dE/dt = c^2 curl curl A decouple into independent harmonic
//! oscillators per wavevector and polarization. Each step rotates those
//! oscillators through their exact phase, so the free field propagates
//! without any dispersion error and with exactly conserved energy; all
//! discretization error lives in the operator splitting against the
//! sources and in the particle push.
//!
//! One step is the time-symmetric composition
//!
//!   drift dt/2 | rotate dt/2 | current impulse dt/2 (old v)
//!            | velocity kick dt | current impulse dt/2 (new v)
//!            | rotate dt/2 | drift dt/2
//!
//! with the velocity kick an exact rotation around the local magnetic
//! field between two half-impulses from the electric field (a Boris push
//! with the rotation evaluated by Rodrigues' formula instead of the
//! tangent half-angle). Forces are gathered with the same smeared profile
//! that deposits charge and current, making the gather the exact adjoint
//! of the deposit; that pairing is what keeps the energy drift at
//! rounding level instead of percent level.
//!
//! The longitudinal electric field is never integrated: it is rebuilt
//! from the particle positions wherever it is needed, so the Gauss law
//! holds identically at every step.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{cross3, dot3, Grid, Spectral, VectorField};
use crate::mechanics::{gaussian_self_energy, kinetic_energy, FieldState, SystemState};
use crate::sources::{
    current_density, longitudinal_field, smeared_sample_vector, ParticleSet, SmearedDelta,
};

/// Strang splitting with exact mode rotation is the only integrator; the
/// name exists so configurations state it and reports record it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegratorKind {
    Leapfrog,
}

impl IntegratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IntegratorKind::Leapfrog => "leapfrog",
        }
    }
}

impl std::str::FromStr for IntegratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leapfrog" => Ok(IntegratorKind::Leapfrog),
            other => Err(Error::UnknownVariant(other.to_string())),
        }
    }
}

/// How long, how fine, and how often to keep a snapshot.
#[derive(Clone, Copy, Debug)]
pub struct TrajectoryConfig {
    pub dt: f64,
    pub n_steps: usize,
    /// Keep every k-th state (the initial and final states always).
    pub output_stride: usize,
    pub integrator: IntegratorKind,
}

/// Largest stable step: half a cell crossing time of light. The mode
/// rotation itself is unconditionally stable; the bound protects the
/// splitting against the current and the particle push.
pub fn stability_bound(grid: &Grid) -> f64 {
    0.5 * grid.dx() / grid.c2().sqrt()
}

fn require_stable(grid: &Grid, dt: f64) -> Result<()> {
    let bound = stability_bound(grid);
    if !(dt > 0.0) {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    if dt >= bound {
        return Err(Error::StabilityViolation { dt, bound });
    }
    Ok(())
}

/// Field state in mode space plus the per-mode phase rates.
struct Modes {
    a: [Vec<Complex64>; 3],
    e: [Vec<Complex64>; 3],
    omega: Vec<f64>,
}

impl Modes {
    fn from_field(sp: &Spectral, f: &FieldState) -> Modes {
        let grid = sp.grid();
        let n = grid.n;
        let k = sp.k_axis();
        let c = grid.c2().sqrt();
        let mut omega = Vec::with_capacity(grid.sites());
        for i in 0..n {
            for j in 0..n {
                for kz in 0..n {
                    let k2 = k[i] * k[i] + k[j] * k[j] + k[kz] * k[kz];
                    omega.push(c * k2.sqrt());
                }
            }
        }
        Modes {
            a: [
                sp.forward_component(&f.a_perp.values[0]),
                sp.forward_component(&f.a_perp.values[1]),
                sp.forward_component(&f.a_perp.values[2]),
            ],
            e: [
                sp.forward_component(&f.e_perp.values[0]),
                sp.forward_component(&f.e_perp.values[1]),
                sp.forward_component(&f.e_perp.values[2]),
            ],
            omega,
        }
    }

    fn to_field(&self, sp: &Spectral) -> FieldState {
        let grid = sp.grid();
        let mut a = VectorField::zeros(grid);
        let mut e = VectorField::zeros(grid);
        for c in 0..3 {
            a.values[c] = sp.inverse_component(&self.a[c]);
            e.values[c] = sp.inverse_component(&self.e[c]);
        }
        FieldState { a_perp: a, e_perp: e }
    }

    /// Advance every mode oscillator by its exact phase over tau:
    /// a' = cos(wt) a - sin(wt)/w e, e' = w sin(wt) a + cos(wt) e.
    /// The w = 0 modes free-stream: a' = a - tau e.
    fn rotate(&mut self, tau: f64) {
        for s in 0..self.omega.len() {
            let w = self.omega[s];
            let (cw, snc, wsn) = if w == 0.0 {
                (1.0, tau, 0.0)
            } else {
                let phase = w * tau;
                let sn = phase.sin();
                (phase.cos(), sn / w, w * sn)
            };
            for c in 0..3 {
                let a = self.a[c][s];
                let e = self.e[c][s];
                self.a[c][s] = cw * a - snc * e;
                self.e[c][s] = wsn * a + cw * e;
            }
        }
    }

    /// e -= (tau / eps0) * transverse part of the current.
    fn current_impulse(&mut self, sp: &Spectral, p: &ParticleSet, tau: f64) -> Result<()> {
        let grid = sp.grid();
        let j = current_density(p, &grid)?;
        let hx = sp.forward_component(&j.values[0]);
        let hy = sp.forward_component(&j.values[1]);
        let hz = sp.forward_component(&j.values[2]);
        let n = grid.n;
        let k = sp.k_axis();
        let scale = tau / grid.eps0;
        let mut s = 0;
        for i in 0..n {
            for jj in 0..n {
                for kz in 0..n {
                    let (kx, ky, kzv) = (k[i], k[jj], k[kz]);
                    let k2 = kx * kx + ky * ky + kzv * kzv;
                    let (tx, ty, tz) = if k2 == 0.0 {
                        (hx[s], hy[s], hz[s])
                    } else {
                        let dot = (kx * hx[s] + ky * hy[s] + kzv * hz[s]) / k2;
                        (hx[s] - kx * dot, hy[s] - ky * dot, hz[s] - kzv * dot)
                    };
                    self.e[0][s] -= scale * tx;
                    self.e[1][s] -= scale * ty;
                    self.e[2][s] -= scale * tz;
                    s += 1;
                }
            }
        }
        Ok(())
    }

    /// B = curl A straight from the modes.
    fn magnetic_field(&self, sp: &Spectral) -> VectorField {
        let grid = sp.grid();
        let n = grid.n;
        let k = sp.k_axis();
        let ik = Complex64::new(0.0, 1.0);
        let sites = grid.sites();
        let mut bx = vec![Complex64::default(); sites];
        let mut by = vec![Complex64::default(); sites];
        let mut bz = vec![Complex64::default(); sites];
        let mut s = 0;
        for i in 0..n {
            for j in 0..n {
                for kz in 0..n {
                    let (kx, ky, kzv) = (k[i], k[j], k[kz]);
                    bx[s] = ik * (ky * self.a[2][s] - kzv * self.a[1][s]);
                    by[s] = ik * (kzv * self.a[0][s] - kx * self.a[2][s]);
                    bz[s] = ik * (kx * self.a[1][s] - ky * self.a[0][s]);
                    s += 1;
                }
            }
        }
        let mut b = VectorField::zeros(grid);
        b.values[0] = sp.inverse_component(&bx);
        b.values[1] = sp.inverse_component(&by);
        b.values[2] = sp.inverse_component(&bz);
        b
    }
}

/// Half electric kick, exact magnetic rotation, half electric kick.
fn boris_push(v: [f64; 3], e: [f64; 3], b: [f64; 3], q_over_m: f64, dt: f64) -> [f64; 3] {
    let half = 0.5 * dt * q_over_m;
    let mut vm = [v[0] + half * e[0], v[1] + half * e[1], v[2] + half * e[2]];
    let bn = dot3(b, b).sqrt();
    if bn > 0.0 {
        let axis = [b[0] / bn, b[1] / bn, b[2] / bn];
        let theta = -q_over_m * bn * dt;
        let (sn, cs) = theta.sin_cos();
        let axv = cross3(axis, vm);
        let ad = dot3(axis, vm) * (1.0 - cs);
        vm = [
            vm[0] * cs + axv[0] * sn + axis[0] * ad,
            vm[1] * cs + axv[1] * sn + axis[1] * ad,
            vm[2] * cs + axv[2] * sn + axis[2] * ad,
        ];
    }
    [vm[0] + half * e[0], vm[1] + half * e[1], vm[2] + half * e[2]]
}

fn drift(p: &mut ParticleSet, tau: f64) {
    for a in p.mobile_indices() {
        for c in 0..3 {
            p.positions[a][c] += tau * p.velocities[a][c];
        }
    }
}

/// Gather E and B at each mobile particle with the deposit profile and
/// rotate the velocities. E includes the position-slaved longitudinal
/// part, evaluated at the midpoint positions the drift has produced.
fn kick(sp: &Spectral, modes: &Modes, p: &mut ParticleSet, dt: f64) -> Result<()> {
    let mut e_tot = longitudinal_field(p, sp)?;
    for c in 0..3 {
        let perp = sp.inverse_component(&modes.e[c]);
        for (t, v) in e_tot.values[c].iter_mut().zip(&perp) {
            *t += v;
        }
    }
    let b = modes.magnetic_field(sp);
    let delta = SmearedDelta::new(p.sigma);
    for a in p.mobile_indices() {
        let x = p.positions[a];
        let ea = smeared_sample_vector(&e_tot, &delta, x);
        let ba = smeared_sample_vector(&b, &delta, x);
        let q_over_m = p.charges[a] / p.masses[a];
        p.velocities[a] = boris_push(p.velocities[a], ea, ba, q_over_m, dt);
    }
    Ok(())
}

fn strang_step(sp: &Spectral, modes: &mut Modes, p: &mut ParticleSet, dt: f64) -> Result<()> {
    drift(p, 0.5 * dt);
    modes.rotate(0.5 * dt);
    modes.current_impulse(sp, p, 0.5 * dt)?;
    kick(sp, modes, p, dt)?;
    modes.current_impulse(sp, p, 0.5 * dt)?;
    modes.rotate(0.5 * dt);
    drift(p, 0.5 * dt);
    p.validate_against(&sp.grid())
}

/// Advance the state by one step in place.
pub fn step(s: &mut SystemState, dt: f64, sp: &Spectral) -> Result<()> {
    let grid = sp.grid();
    require_stable(&grid, dt)?;
    s.field.a_perp.grid.check_same(&grid, "state vs solver grid")?;
    let mut modes = Modes::from_field(sp, &s.field);
    strang_step(sp, &mut modes, &mut s.particles, dt)?;
    s.field = modes.to_field(sp);
    s.time += dt;
    Ok(())
}

/// Integrate a trajectory and keep snapshots.
///
/// The initial state is always the first snapshot; afterwards every
/// `output_stride`-th state is kept, and the final state is kept whether
/// or not it falls on the stride. The field stays in mode space across
/// the whole run, so snapshot frequency does not affect the trajectory.
pub fn run(
    s0: &SystemState,
    cfg: &TrajectoryConfig,
    sp: &Spectral,
) -> Result<Vec<SystemState>> {
    let grid = sp.grid();
    require_stable(&grid, cfg.dt)?;
    if cfg.output_stride == 0 {
        return Err(Error::Config("output stride must be at least 1".into()));
    }
    s0.field.a_perp.grid.check_same(&grid, "state vs solver grid")?;
    let mut snapshots = vec![s0.clone()];
    if cfg.n_steps == 0 {
        return Ok(snapshots);
    }
    let mut particles = s0.particles.clone();
    let mut modes = Modes::from_field(sp, &s0.field);
    for i in 1..=cfg.n_steps {
        strang_step(sp, &mut modes, &mut particles, cfg.dt)?;
        if i % cfg.output_stride == 0 || i == cfg.n_steps {
            snapshots.push(SystemState {
                particles: particles.clone(),
                field: modes.to_field(sp),
                time: s0.time + i as f64 * cfg.dt,
            });
        }
    }
    Ok(snapshots)
}

/// Conserved energy of the coupled system: kinetic plus full field energy,
/// minus the uniform smeared self-interaction constant (the same zero of
/// energy the Hamiltonian forms use).
pub fn total_energy(s: &SystemState, sp: &Spectral) -> Result<f64> {
    let grid = sp.grid();
    let e_tot = s.field.e_perp.add_scaled(&longitudinal_field(&s.particles, sp)?, 1.0);
    let b = sp.curl(&s.field.a_perp);
    Ok(kinetic_energy(&s.particles) + 0.5 * grid.eps0 * e_tot.inner(&e_tot)
        + 0.5 / grid.mu0 * b.inner(&b)
        - gaussian_self_energy(&s.particles, grid.eps0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::continuity_residual;
    use crate::tolerances::{RATIO_BAND, TOL_PROJECTION};

    fn setup(n: usize) -> Spectral {
        Spectral::new(Grid::cubic(n, 1.0).unwrap())
    }

    /// A neutral pair with one mobile charge on a gentle orbit-like start.
    fn dipole(grid: &Grid) -> ParticleSet {
        ParticleSet::new(
            vec![1.0, -1.0],
            vec![1.0e4, 1.0e3],
            vec![[0.0; 3], [0.1 * grid.length, 0.0, 0.0]],
            vec![[0.0; 3], [0.0, 0.026, 0.005]],
            3.0 * grid.dx(),
            true,
        )
        .unwrap()
    }

    /// Chargeless markers: the field evolves as pure vacuum radiation.
    fn markers(grid: &Grid) -> ParticleSet {
        ParticleSet::new(
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![[0.0; 3], [0.05 * grid.length, 0.0, 0.0]],
            vec![[0.0; 3], [0.0; 3]],
            3.0 * grid.dx(),
            true,
        )
        .unwrap()
    }

    fn seeded_mode(sp: &Spectral, amp: f64) -> FieldState {
        let grid = sp.grid();
        let k = 2.0 * std::f64::consts::PI / grid.length;
        let a = VectorField::from_fn(grid, |x| [amp * (k * x[2]).cos(), 0.0, 0.0]);
        FieldState::new(a, VectorField::zeros(grid), sp).unwrap()
    }

    #[test]
    fn rejects_steps_beyond_the_stability_bound() {
        let sp = setup(16);
        let grid = sp.grid();
        let mut s = SystemState::new(dipole(&grid), FieldState::vacuum(grid), 0.0, &sp).unwrap();
        let bound = stability_bound(&grid);
        let err = step(&mut s, bound * 1.01, &sp);
        assert!(matches!(err, Err(Error::StabilityViolation { .. })));
        assert!(step(&mut s, bound * 0.5, &sp).is_ok());
    }

    #[test]
    fn free_field_follows_the_exact_dispersion() {
        let sp = setup(24);
        let grid = sp.grid();
        let amp = 1.0e-3;
        let mut s =
            SystemState::new(markers(&grid), seeded_mode(&sp, amp), 0.0, &sp).unwrap();
        let dt = 2.0e-3;
        let n_steps = 200;
        for _ in 0..n_steps {
            step(&mut s, dt, &sp).unwrap();
        }
        let k = 2.0 * std::f64::consts::PI / grid.length;
        let w = grid.c2().sqrt() * k;
        let t = dt * n_steps as f64;
        let expect_a = VectorField::from_fn(grid, |x| {
            [amp * (w * t).cos() * (k * x[2]).cos(), 0.0, 0.0]
        });
        let expect_e = VectorField::from_fn(grid, |x| {
            [amp * w * (w * t).sin() * (k * x[2]).cos(), 0.0, 0.0]
        });
        let ra = s.field.a_perp.add_scaled(&expect_a, -1.0).norm_l2() / expect_a.norm_l2();
        let re = s.field.e_perp.add_scaled(&expect_e, -1.0).norm_l2() / expect_e.norm_l2();
        assert!(ra < 1e-12, "vector potential off by {ra:.3e}");
        assert!(re < 1e-12, "electric field off by {re:.3e}");
    }

    #[test]
    fn fields_stay_transverse_through_coupled_steps() {
        let sp = setup(24);
        let grid = sp.grid();
        let mut s = SystemState::new(dipole(&grid), seeded_mode(&sp, 2.0e-3), 0.0, &sp).unwrap();
        for _ in 0..20 {
            step(&mut s, 2.0e-3, &sp).unwrap();
        }
        // Rebuilding through the validating constructor enforces both gates.
        let f = FieldState::new(s.field.a_perp.clone(), s.field.e_perp.clone(), &sp);
        assert!(f.is_ok());
        let div = sp.divergence(&s.field.e_perp).norm_l2()
            / (2.0 * std::f64::consts::PI / grid.length * s.field.e_perp.norm_l2());
        assert!(div < TOL_PROJECTION, "divergence content {div:.3e}");
    }

    #[test]
    fn continuity_holds_at_second_order_between_snapshots() {
        let sp = setup(24);
        let grid = sp.grid();
        let residual_at = |dt: f64| {
            let mut s =
                SystemState::new(dipole(&grid), seeded_mode(&sp, 2.0e-3), 0.0, &sp).unwrap();
            let before = s.particles.clone();
            step(&mut s, dt, &sp).unwrap();
            continuity_residual(&before, &s.particles, dt, &sp).unwrap()
        };
        let coarse = residual_at(4.0e-3);
        let fine = residual_at(2.0e-3);
        let ratio = coarse / fine;
        assert!(
            ratio > RATIO_BAND.0 && ratio < RATIO_BAND.1,
            "halving dt gave ratio {ratio:.2} ({coarse:.3e} -> {fine:.3e})"
        );
    }

    #[test]
    fn energy_drift_stays_at_rounding_level() {
        let sp = setup(24);
        let grid = sp.grid();
        let s0 = SystemState::new(dipole(&grid), seeded_mode(&sp, 2.0e-3), 0.0, &sp).unwrap();
        let e0 = total_energy(&s0, &sp).unwrap();
        let cfg = TrajectoryConfig {
            dt: 2.0e-3,
            n_steps: 100,
            output_stride: 100,
            integrator: IntegratorKind::Leapfrog,
        };
        let snaps = run(&s0, &cfg, &sp).unwrap();
        let e1 = total_energy(snaps.last().unwrap(), &sp).unwrap();
        let drift = (e1 - e0).abs() / e0.abs();
        assert!(drift < 1e-6, "energy drifted by {drift:.3e}");
    }

    #[test]
    fn radiating_charge_pumps_energy_into_the_field() {
        let sp = setup(24);
        let grid = sp.grid();
        let s0 = SystemState::new(dipole(&grid), FieldState::vacuum(grid), 0.0, &sp).unwrap();
        let cfg = TrajectoryConfig {
            dt: 2.0e-3,
            n_steps: 60,
            output_stride: 20,
            integrator: IntegratorKind::Leapfrog,
        };
        let snaps = run(&s0, &cfg, &sp).unwrap();
        let radiated: Vec<f64> = snaps
            .iter()
            .map(|s| {
                let b = sp.curl(&s.field.a_perp);
                0.5 * grid.eps0 * s.field.e_perp.inner(&s.field.e_perp)
                    + 0.5 / grid.mu0 * b.inner(&b)
            })
            .collect();
        assert_eq!(radiated[0], 0.0);
        for w in radiated.windows(2) {
            assert!(w[1] >= w[0] * (1.0 - 1e-9), "radiated energy decreased: {radiated:?}");
        }
        assert!(*radiated.last().unwrap() > 0.0);
    }

    #[test]
    fn trajectory_reverses_to_the_starting_point() {
        let sp = setup(24);
        let grid = sp.grid();
        let mut s = SystemState::new(dipole(&grid), seeded_mode(&sp, 2.0e-3), 0.0, &sp).unwrap();
        let x0 = s.particles.positions.clone();
        let v0 = s.particles.velocities.clone();
        let dt = 2.0e-3;
        for _ in 0..20 {
            step(&mut s, dt, &sp).unwrap();
        }
        // Time reversal: v -> -v, A -> -A (B flips, E stays).
        for v in &mut s.particles.velocities {
            for c in 0..3 {
                v[c] = -v[c];
            }
        }
        s.field.a_perp = s.field.a_perp.scaled(-1.0);
        for _ in 0..20 {
            step(&mut s, dt, &sp).unwrap();
        }
        for a in 0..s.particles.len() {
            for c in 0..3 {
                let dx = (s.particles.positions[a][c] - x0[a][c]).abs();
                let dv = (s.particles.velocities[a][c] + v0[a][c]).abs();
                assert!(dx < 1e-11, "position {a}/{c} off by {dx:.3e}");
                assert!(dv < 1e-11, "velocity {a}/{c} off by {dv:.3e}");
            }
        }
    }

    #[test]
    fn run_keeps_the_promised_snapshots() {
        let sp = setup(16);
        let grid = sp.grid();
        let s0 = SystemState::new(dipole(&grid), FieldState::vacuum(grid), 0.0, &sp).unwrap();
        let cfg = TrajectoryConfig {
            dt: 1.0e-3,
            n_steps: 0,
            output_stride: 5,
            integrator: IntegratorKind::Leapfrog,
        };
        assert_eq!(run(&s0, &cfg, &sp).unwrap().len(), 1);
        let cfg = TrajectoryConfig { n_steps: 7, ..cfg };
        let snaps = run(&s0, &cfg, &sp).unwrap();
        // Initial, step 5, and the off-stride final step 7.
        assert_eq!(snaps.len(), 3);
        assert!((snaps[1].time - 5.0e-3).abs() < 1e-15);
        assert!((snaps[2].time - 7.0e-3).abs() < 1e-15);
        let cfg = TrajectoryConfig { output_stride: 0, ..cfg };
        assert!(matches!(run(&s0, &cfg, &sp), Err(Error::Config(_))));
    }

    #[test]
    #[ignore]
    fn step_timing_probe() {
        for n in [48usize, 64] {
            let sp = Spectral::new(Grid::cubic(n, 1.0).unwrap());
            let grid = sp.grid();
            let mut s =
                SystemState::new(dipole(&grid), seeded_mode(&sp, 2.0e-3), 0.0, &sp).unwrap();
            let t0 = std::time::Instant::now();
            let mut modes = Modes::from_field(&sp, &s.field);
            for _ in 0..10 {
                strang_step(&sp, &mut modes, &mut s.particles, 1.0e-3).unwrap();
            }
            let per = t0.elapsed().as_secs_f64() / 10.0;
            println!("n={n}: {per:.3}s per step, 1000 steps ~ {:.0}s", per * 1000.0);
        }
    }

    #[test]
    fn integrator_names_round_trip() {
        assert_eq!("leapfrog".parse::<IntegratorKind>().unwrap(), IntegratorKind::Leapfrog);
        assert!(matches!(
            "rk4".parse::<IntegratorKind>(),
            Err(Error::UnknownVariant(_))
        ));
    }
}
