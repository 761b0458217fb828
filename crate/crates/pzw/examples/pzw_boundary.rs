//! Three ways to write the same Lagrangian.
//!
//! The minimal-coupling form pairs j with A; the multipolar form pairs P
//! with E and M with B; the radial-gauge form rebuilds the multipolar
//! interaction from line integrals along each particle's segment. The
//! first two differ by a total time derivative F = int P . A_perp d3x,
//! and the last two agree identically, so along any trajectory
//!
//!     L_min - L_pzw = dF/dt
//!
//! up to the O(dt^2) error of the centered difference used for dF/dt.
//!
//!     cargo run --release --example pzw_boundary

use pzw::dynamics::{self, IntegratorKind, TrajectoryConfig};
use pzw::mechanics::{self, FieldState, SystemState};
use pzw::{Grid, ParticleSet, SQuadrature, Spectral, VectorField};

fn main() -> pzw::Result<()> {
    let grid = Grid::cubic(32, 1.0)?;
    let sp = Spectral::new(grid);
    let quad = SQuadrature::gauss_legendre(32);
    let tau = std::f64::consts::TAU;

    let particles = ParticleSet::new(
        vec![1.0, -1.0],
        vec![1.0e4, 1.0],
        vec![[0.0; 3], [0.09, 0.03, -0.02]],
        vec![[0.0; 3], [0.012, -0.020, 0.008]],
        3.0 * grid.dx(),
        true,
    )?;
    let a = VectorField::from_fn(grid, |x| [2e-3 * (tau * x[1]).cos(), 0.0, 0.0]);
    let e = VectorField::from_fn(grid, |x| [2e-3 * (tau * x[1] + 0.7).cos(), 0.0, 0.0]);
    let s0 = SystemState::new(particles, FieldState::new(a, e, &sp)?, 0.0, &sp)?;

    let l_min = mechanics::lagrangian_minimal(&s0, &sp)?;
    let l_pzw = mechanics::lagrangian_pzw(&s0, &sp, &quad)?;
    let l_rad = mechanics::lagrangian_poincare(&s0, &sp, &quad, 0.4)?;
    println!("sector          minimal        multipolar     radial gauge");
    for (label, a, b, c) in [
        ("kinetic", l_min.kinetic, l_pzw.kinetic, l_rad.kinetic),
        ("electrostatic", l_min.electrostatic, l_pzw.electrostatic, l_rad.electrostatic),
        ("field", l_min.field, l_pzw.field, l_rad.field),
        ("interaction", l_min.interaction, l_pzw.interaction, l_rad.interaction),
        ("total", l_min.total, l_pzw.total, l_rad.total),
    ] {
        println!("{label:<14}  {a:+.8e}  {b:+.8e}  {c:+.8e}");
    }
    println!("multipolar vs radial gauge: {:+.3e}\n", l_pzw.total - l_rad.total);

    // Step the coupled system and difference the boundary term along the
    // trajectory; halving dt should cut the mismatch by about four.
    for dt in [2e-3, 1e-3] {
        let cfg = TrajectoryConfig {
            dt,
            n_steps: 2,
            output_stride: 1,
            integrator: IntegratorKind::Leapfrog,
        };
        let traj = dynamics::run(&s0, &cfg, &sp)?;
        let f0 = mechanics::pzw_boundary_term(&traj[0], &sp, &quad)?;
        let f2 = mechanics::pzw_boundary_term(&traj[2], &sp, &quad)?;
        let rate = (f2 - f0) / (2.0 * dt);
        let mid = &traj[1];
        let gap = mechanics::lagrangian_minimal(mid, &sp)?.total
            - mechanics::lagrangian_pzw(mid, &sp, &quad)?.total;
        println!(
            "dt {dt:.1e}   L_min - L_pzw {gap:+.8e}   dF/dt {rate:+.8e}   miss {:.2e}",
            (gap - rate).abs()
        );
    }
    Ok(())
}
