//! One Hamiltonian, three evaluations.
//!
//! The multipolar Hamiltonian can be computed as a Legendre transform of
//! the Lagrangian, as the plain field-plus-kinetic energy, or through the
//! displacement field D = eps0 E + P after completing the square. The
//! first two agree to rounding; the third carries the segment-quadrature
//! error of the momentum shift and lands within about 1e-6 relative.
//!
//!     cargo run --release --example hamiltonian_forms

use pzw::mechanics::{self, FieldState, SystemState};
use pzw::{Grid, ParticleSet, SQuadrature, Spectral, VectorField};

fn main() -> pzw::Result<()> {
    let grid = Grid::cubic(32, 1.0)?;
    let sp = Spectral::new(grid);
    let quad = SQuadrature::gauss_legendre(32);
    let tau = std::f64::consts::TAU;

    let cases: [(&str, ParticleSet); 3] = [
        (
            "hydrogen-like",
            ParticleSet::new(
                vec![1.0, -1.0],
                vec![1.0e4, 1.0],
                vec![[0.0; 3], [0.08, -0.02, 0.05]],
                vec![[0.0; 3], [0.015, 0.022, -0.010]],
                3.0 * grid.dx(),
                true,
            )?,
        ),
        (
            "helium-like",
            ParticleSet::new(
                vec![2.0, -1.0, -1.0],
                vec![2.0e4, 1.0, 1.0],
                vec![[0.0; 3], [0.07, 0.04, -0.03], [-0.05, -0.06, 0.02]],
                vec![[0.0; 3], [-0.012, 0.018, 0.006], [0.020, -0.004, -0.014]],
                3.0 * grid.dx(),
                true,
            )?,
        ),
        (
            "free pair",
            ParticleSet::new(
                vec![1.0, -1.0],
                vec![50.0, 1.0],
                vec![[-0.04, 0.01, 0.02], [0.06, -0.03, -0.01]],
                vec![[0.004, -0.002, 0.001], [0.010, 0.025, -0.008]],
                3.0 * grid.dx(),
                false,
            )?,
        ),
    ];

    let a = VectorField::from_fn(grid, |x| {
        [1.5e-3 * (tau * x[2] + 0.4).cos(), 0.0, 1.0e-3 * (tau * x[0]).cos()]
    });
    let e = VectorField::from_fn(grid, |x| {
        [1.5e-3 * (tau * x[2] + 1.9).cos(), 0.0, 1.0e-3 * (tau * x[0] + 0.8).cos()]
    });

    println!("case            legendre          energy            displacement      |L-E|      |D-E|/|E|");
    for (label, particles) in cases {
        let field = FieldState::new(a.clone(), e.clone(), &sp)?;
        let s = SystemState::new(particles, field, 0.0, &sp)?;
        let h = mechanics::hamiltonian_pzw(&s, &sp, &quad)?;
        println!(
            "{label:<14}  {:+.10e}  {:+.10e}  {:+.10e}  {:.1e}    {:.1e}",
            h.legendre,
            h.energy,
            h.multipolar,
            (h.legendre - h.energy).abs(),
            (h.multipolar - h.energy).abs() / h.energy.abs(),
        );
    }
    Ok(())
}
