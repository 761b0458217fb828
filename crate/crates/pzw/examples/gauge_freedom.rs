//! Gauge freedom in action: transform the Coulomb-gauge potentials by an
//! arbitrary gauge function and watch the physical fields stay put while
//! the Lagrangian shifts by exactly the total time derivative of
//! sum q chi.
//!
//!     cargo run --release --example gauge_freedom

use pzw::gauges::{self, GaugeFunction};
use pzw::mechanics::{self, FieldState, SystemState};
use pzw::{sources, Grid, ParticleSet, ScalarField, Spectral, VectorField};

fn main() -> pzw::Result<()> {
    let grid = Grid::cubic(32, 1.0)?;
    let sp = Spectral::new(grid);
    let tau = std::f64::consts::TAU;

    let p = ParticleSet::new(
        vec![1.0, -1.0],
        vec![1.0e4, 1.0],
        vec![[0.0; 3], [0.1, 0.0, 0.0]],
        vec![[0.0; 3], [0.0, 0.15, 0.02]],
        3.0 * grid.dx(),
        true,
    )?;

    // A little radiation so the potentials are not purely electrostatic.
    let a = VectorField::from_fn(grid, |x| [0.0, 1e-3 * (tau * x[2]).cos(), 0.0]);
    let e = VectorField::from_fn(grid, |x| [0.0, 1e-3 * (tau * x[2] + 0.7).cos(), 0.0]);
    let field = FieldState::new(a, e, &sp)?;
    let s = SystemState::new(p.clone(), field, 0.0, &sp)?;

    let e_tot = s.field.e_perp.add_scaled(&sources::longitudinal_field(&p, &sp)?, 1.0);
    let pot = gauges::coulomb_potentials(&e_tot, &s.field.a_perp, &p, &sp)?;
    let (e0, b0) = gauges::fields_from_potentials(&pot, &sp);

    let chi = GaugeFunction {
        chi: ScalarField::from_fn(grid, |x| 0.2 * (tau * (x[0] + x[1]) + 0.4).cos()),
        chi_dot: ScalarField::from_fn(grid, |x| 0.1 * (tau * (2.0 * x[2]) + 1.3).cos()),
    };
    let pot2 = gauges::apply_gauge_transform(&pot, &chi, &sp);
    let (e1, b1) = gauges::fields_from_potentials(&pot2, &sp);

    println!("gauge label before/after    {} / {}", pot.gauge_label.as_str(), pot2.gauge_label.as_str());
    println!("E moved by                  {:.3e}", e1.add_scaled(&e0, -1.0).norm_l2() / e0.norm_l2());
    println!("B moved by                  {:.3e}", b1.add_scaled(&b0, -1.0).norm_l2() / b0.norm_l2());
    println!(
        "div A after transform       {:.3e}  (Coulomb condition intentionally broken)",
        sp.divergence(&pot2.a).norm_l2()
    );

    // The action notices the transform in exactly one way: the Lagrangian
    // changes by -(d/dt) sum_a q_a chi(x_a, t). Both sides, differenced at
    // shrinking half-widths, converge quadratically to each other.
    for dt in [2e-3, 1e-3, 5e-4] {
        let (lhs, rhs) = mechanics::gauge_delta_lagrangian(&s, &pot, &chi, dt, &sp)?;
        println!(
            "dt {:.1e}: delta L = {:+.9e}, -d/dt sum q chi = {:+.9e}, gap {:.3e}",
            dt,
            lhs,
            rhs,
            (lhs - rhs).abs()
        );
    }
    Ok(())
}
