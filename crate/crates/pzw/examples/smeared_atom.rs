//! A neutral atom as smeared point charges, and the two distribution
//! identities its polarization and magnetization fields satisfy on the
//! lattice: rho = -div P and j = dP/dt + curl M.
//!
//!     cargo run --release --example smeared_atom

use pzw::{multipolar, Grid, ParticleSet, SQuadrature, Spectral};

fn main() -> pzw::Result<()> {
    let grid = Grid::cubic(32, 1.0)?;
    let sp = Spectral::new(grid);
    let quad = SQuadrature::gauss_legendre(32);

    // Helium-flavored: nucleus pinned at the origin, two moving electrons.
    let atom = ParticleSet::new(
        vec![2.0, -1.0, -1.0],
        vec![2.0e4, 1.0, 1.0],
        vec![[0.0; 3], [0.09, -0.02, 0.04], [-0.06, 0.07, 0.01]],
        vec![[0.0; 3], [0.012, 0.020, -0.007], [-0.015, 0.003, 0.010]],
        3.0 * grid.dx(),
        true,
    )?;

    let charge = multipolar::verify_charge_identity(&atom, &sp, &quad)?;
    let current = multipolar::verify_current_identity(&atom, &sp, &quad)?;
    let screening = multipolar::verify_longitudinal_identity(&atom, &sp, &quad)?;

    println!("rho + div P                 {:.3e}  (gate {:.0e})", charge.residual, charge.tolerance);
    println!("j - dP/dt - curl M          {:.3e}  (gate {:.0e})", current.residual, current.tolerance);
    println!("eps0 E_par + P_par          {:.3e}  (gate {:.0e})", screening.residual, screening.tolerance);

    // The same charge data, seen as energies. The raw lattice value keeps
    // each cloud's interaction with itself; subtracting that constant
    // leaves the pair energy, which tracks the free-space screened formula
    // up to the periodic images.
    let raw = pzw::mechanics::coulomb_lattice_energy(&atom, &sp)?;
    let pairs = raw - pzw::mechanics::gaussian_self_energy(&atom, grid.eps0);
    let free = pzw::mechanics::coulomb_pair_energy_freespace(&atom, grid.eps0);
    println!("pair energy, lattice        {:+.6e}  (raw {:+.6e})", pairs, raw);
    println!("pair energy, free space     {:+.6e}", free);
    println!("periodic-image difference   {:.3e}", ((pairs - free) / free).abs());
    Ok(())
}
