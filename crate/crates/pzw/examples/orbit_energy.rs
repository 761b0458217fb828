//! Energy bookkeeping along a coupled two-body run.
//!
//! A light charge circles a heavy one while exchanging energy with the
//! radiation field it sources. The Strang-split leapfrog is not exactly
//! energy conserving, but its drift is second order in the step: the
//! table shows the relative drift shrinking by about four when dt halves.
//!
//!     cargo run --release --example orbit_energy

use pzw::dynamics::{self, IntegratorKind, TrajectoryConfig};
use pzw::mechanics::{FieldState, SystemState};
use pzw::{Grid, ParticleSet, Spectral};

fn orbit(grid: &Grid) -> pzw::Result<ParticleSet> {
    ParticleSet::new(
        vec![1.0, -1.0],
        vec![1.0e4, 1.0],
        vec![[0.0; 3], [0.1, 0.0, 0.0]],
        vec![[0.0; 3], [0.0, 0.026, 0.005]],
        3.0 * grid.dx(),
        true,
    )
}

fn main() -> pzw::Result<()> {
    let grid = Grid::cubic(32, 1.0)?;
    let sp = Spectral::new(grid);

    println!("      time      kinetic         total energy    drift");
    let s0 = SystemState::new(orbit(&grid)?, FieldState::vacuum(grid), 0.0, &sp)?;
    let e0 = dynamics::total_energy(&s0, &sp)?;
    let cfg = TrajectoryConfig {
        dt: 2e-3,
        n_steps: 600,
        output_stride: 100,
        integrator: IntegratorKind::Leapfrog,
    };
    for s in dynamics::run(&s0, &cfg, &sp)? {
        let e = dynamics::total_energy(&s, &sp)?;
        let kin = pzw::mechanics::kinetic_energy(&s.particles);
        println!(
            "    {:6.3}   {:+.6e}   {:+.6e}   {:+.2e}",
            s.time,
            kin,
            e,
            (e - e0) / e0.abs()
        );
    }

    println!("\n    dt        steps   final relative drift");
    let mut previous: Option<f64> = None;
    for halvings in 0..3 {
        let dt = 4e-3 / f64::powi(2.0, halvings);
        let n_steps = 300 * 2usize.pow(halvings as u32);
        let cfg = TrajectoryConfig { dt, n_steps, output_stride: n_steps, integrator: IntegratorKind::Leapfrog };
        let last = dynamics::run(&s0, &cfg, &sp)?.pop().unwrap();
        let drift = (dynamics::total_energy(&last, &sp)? - e0).abs() / e0.abs();
        match previous {
            None => println!("    {dt:.1e}   {n_steps:>5}   {drift:.3e}"),
            Some(p) => println!("    {dt:.1e}   {n_steps:>5}   {drift:.3e}   ({:.2}x smaller)", p / drift),
        }
        previous = Some(drift);
    }
    Ok(())
}
