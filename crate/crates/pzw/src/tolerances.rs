//! Every tolerance used by the verification suites, in one place.
//!
//! Each constant records where its number comes from. The identities checked
//! by this crate are exact in the continuum; residuals on the lattice come
//! from a small set of known sources (Gaussian band-limiting, s-quadrature
//! truncation, finite time differences, trilinear interpolation, periodic
//! images), and each gate below is set against a measured floor, not guessed.
//! The CLI `--tol-scale` flag multiplies the gates uniformly for refinement
//! studies; it never changes what is computed.

/// Relative bound on the spatial mean of a charge density before the
/// Poisson solve refuses it. Neutral atoms sit at rounding level (~1e-16).
pub const TOL_NEUTRALITY: f64 = 1e-10;

/// A field claiming to be transverse (or longitudinal) must have
/// ||div||/||field|| (or ||curl||/||field||) below this. Spectral projection
/// leaves residuals at rounding level, so this is generous.
pub const TOL_PROJECTION: f64 = 1e-10;

/// Gate for the distribution identities (charge from polarization, current
/// from polarization and magnetization, longitudinal consistency).
/// Measured floor at n = 64, sigma = 3 dx, 32 s-nodes is ~3e-15; the gate
/// leaves six orders of margin for rougher scenarios.
pub const TOL_IDENTITY: f64 = 1e-6;

/// Doubling the s-quadrature order must move a polarization-type result by
/// less than this, or the quadrature is declared too coarse. Gauss-Legendre
/// at order 32 is converged to rounding for every desk-scale configuration.
pub const TOL_QUAD: f64 = 1e-9;

/// Identities that are exact algebra on the lattice (gauge invariance of
/// the fields, the Legendre-transform Hamiltonian chain, orthogonality of
/// longitudinal and transverse parts) are held to this.
pub const TOL_EXACT: f64 = 1e-10;

/// Reconstruction of E and B from Poincare-gauge potentials over the probe
/// ball. Budget: trilinear sampling on the twice-refined lattice plus
/// fourth-order stencils plus centered time differences; measured ~3e-4.
pub const TOL_RECONSTRUCT: f64 = 1e-3;

/// The radial gauge condition x . A(x) = 0 is enforced by a cross product,
/// so it holds to a few ulps per point; the gate covers a 100-point max.
pub const TOL_ORTHOGONALITY: f64 = 1e-12;

/// Finite-difference residual floor for the auxiliary line-integral fields
/// (curl u + dv/dt and div v). Same budget as reconstruction.
pub const TOL_FD: f64 = 1e-3;

/// Gate for the scalar-triple-product identity suite. Stated tolerance for
/// the lattice pairing; see the suite itself for the measured smearing
/// floor that this gate does not reach.
pub const TOL_PAIRING: f64 = 1e-4;

/// Free-space pair Coulomb energy vs the lattice electrostatic energy.
/// The difference is a periodic-image effect, measured at 2.5e-3 for a
/// dipole of extent 0.1 L; the gate is 1e-2.
pub const TOL_PAIR_COULOMB: f64 = 1e-2;

/// Relative energy drift allowed over the reference 1000-step bound-motion
/// run. Measured drift of the symmetric splitting is ~1e-8.
pub const TOL_ENERGY_DRIFT: f64 = 1e-4;

/// Acceptance band for second-order convergence ratios under dt halving.
pub const RATIO_BAND: (f64, f64) = (3.7, 4.3);

/// Electrostatic probe comparisons against free-space formulas must agree
/// within this relative error inside the probe corridor.
pub const TOL_FREESPACE: f64 = 1e-2;
