//! Conjugate momenta under the two couplings.
//!
//! Minimal coupling makes -eps0 E the momentum density of the vector
//! potential; the multipolar picture shifts it to -(eps0 E + P), which is
//! transverse by construction. The difference between the transverse
//! variants vanishes identically, and the canonical particle momentum
//! picks up the compensating -q x cross w term from the radial-gauge
//! potential.
//!
//!     cargo run --release --example momentum_split

use pzw::mechanics::{self, FieldMomentumVariant, FieldState, SystemState};
use pzw::{Grid, ParticleSet, SQuadrature, Spectral, VectorField};

fn box_total(f: &VectorField) -> [f64; 3] {
    let cell = f.grid.dx().powi(3);
    [0, 1, 2].map(|c| f.values[c].iter().sum::<f64>() * cell)
}

fn main() -> pzw::Result<()> {
    let grid = Grid::cubic(32, 1.0)?;
    let sp = Spectral::new(grid);
    let quad = SQuadrature::gauss_legendre(32);
    let tau = std::f64::consts::TAU;

    let particles = ParticleSet::new(
        vec![1.0, -1.0],
        vec![1.0e4, 1.0],
        vec![[0.0; 3], [0.09, -0.04, 0.03]],
        vec![[0.0; 3], [0.018, 0.011, -0.024]],
        3.0 * grid.dx(),
        true,
    )?;
    let a = VectorField::from_fn(grid, |x| [0.0, 2e-3 * (tau * x[2] + 0.3).cos(), 0.0]);
    let e = VectorField::from_fn(grid, |x| [0.0, 2e-3 * (tau * x[2] + 1.5).cos(), 0.0]);
    let s = SystemState::new(particles, FieldState::new(a, e, &sp)?, 0.0, &sp)?;

    println!("variant              box-integrated momentum density");
    for variant in [
        FieldMomentumVariant::MinimalTransverse,
        FieldMomentumVariant::MinimalFull,
        FieldMomentumVariant::Pzw,
        FieldMomentumVariant::PzwTransverse,
    ] {
        let pi = mechanics::field_momentum(&s, variant, &sp, &quad)?;
        let t = box_total(&pi);
        println!("{:<19}  [{:+.6e} {:+.6e} {:+.6e}]", variant.as_str(), t[0], t[1], t[2]);
    }

    // The two transverse variants are the same field, entry for entry.
    let lhs = mechanics::field_momentum(&s, FieldMomentumVariant::MinimalTransverse, &sp, &quad)?;
    let rhs = mechanics::field_momentum(&s, FieldMomentumVariant::PzwTransverse, &sp, &quad)?;
    println!("\n|minimal_transverse - pzw_transverse|  {:.1e}", lhs.add_scaled(&rhs, -1.0).norm_l2());

    // And the Pzw variant differs from them by a transverse field even
    // though it was assembled from the full E and the raw polarization.
    let pzw = mechanics::field_momentum(&s, FieldMomentumVariant::Pzw, &sp, &quad)?;
    let diff = pzw.add_scaled(&lhs, -1.0);
    println!("longitudinal leak of the pzw variant   {:.1e}", sp.longitudinal_part(&diff).norm_l2() / diff.norm_l2());

    let p_kin = {
        let v = s.particles.velocities[1];
        let m = s.particles.masses[1];
        [m * v[0], m * v[1], m * v[2]]
    };
    let p_can = mechanics::particle_momentum_pzw(&s, 1, &sp, &quad)?;
    println!("\nelectron mv       [{:+.6e} {:+.6e} {:+.6e}]", p_kin[0], p_kin[1], p_kin[2]);
    println!("electron p_canon  [{:+.6e} {:+.6e} {:+.6e}]", p_can[0], p_can[1], p_can[2]);
    println!("difference is q x cross w, the radial-gauge vector potential at the electron");
    Ok(())
}
