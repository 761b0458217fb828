//! Run configuration files: scenarios and particle lists, both TOML.
//!
//! A scenario names the grid, the particle file, the quadrature order and
//! the identity checks to run, plus optional tolerance overrides and a
//! `[simulate]` section for trajectory runs. A particle file declares the
//! nuclear charge, the smearing width in units of dx, and one `[[particle]]`
//! table per charge. Positions and velocities are absolute box coordinates.
//!
//! ```toml
//! name = "hydrogen-like dipole"
//! particles = "hydrogen.toml"
//! quadrature_order = 32
//! checks = ["charge-from-polarization", "current-from-polarization"]
//!
//! [grid]
//! n = 64
//! length = 1.0
//! ```
//!
//! Unknown keys are rejected so a typo fails the run instead of silently
//! falling back to a default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::lattice::Grid;
use crate::sources::ParticleSet;

/// Top-level scenario file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Path of the particle file, relative to the scenario file.
    pub particles: String,
    #[serde(default = "default_quadrature_order")]
    pub quadrature_order: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol_scale")]
    pub tol_scale: f64,
    /// Checks to run; empty means the full registry.
    #[serde(default)]
    pub checks: Vec<String>,
    pub grid: GridSection,
    /// Initial transverse radiation field; absent means vacuum.
    #[serde(default)]
    pub field: FieldSection,
    /// Per-check absolute tolerance overrides.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub length: f64,
    #[serde(default = "default_unit")]
    pub eps0: f64,
    #[serde(default = "default_unit")]
    pub mu0: f64,
}

/// Seeded initial radiation: `modes` random transverse plane waves of the
/// given amplitude, drawn deterministically from the scenario seed. All
/// wavevectors stay within one grave mode per axis so the excitation is
/// smooth on any grid the scenario runs on.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub modes: usize,
}

impl Default for FieldSection {
    fn default() -> Self {
        FieldSection { amplitude: 0.0, modes: 0 }
    }
}

/// Trajectory parameters for `simulate`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default = "default_stride")]
    pub output_stride: usize,
}

fn default_quadrature_order() -> usize {
    32
}

fn default_tol_scale() -> f64 {
    1.0
}

fn default_unit() -> f64 {
    1.0
}

fn default_stride() -> usize {
    1
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read scenario {}: {e}", path.display())))?;
        let scenario: Scenario = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("scenario {}: {e}", path.display())))?;
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("scenario name is empty".into()));
        }
        if !(self.tol_scale > 0.0) || !self.tol_scale.is_finite() {
            return Err(Error::Config(format!(
                "tol_scale must be positive and finite, got {}",
                self.tol_scale
            )));
        }
        for (check, tol) in &self.tolerances {
            if !(*tol > 0.0) || !tol.is_finite() {
                return Err(Error::Config(format!(
                    "tolerance override for `{check}` must be positive, got {tol}"
                )));
            }
        }
        if self.quadrature_order == 0 {
            return Err(Error::Config("quadrature_order must be at least 1".into()));
        }
        if self.field.amplitude < 0.0 || !self.field.amplitude.is_finite() {
            return Err(Error::Config(format!(
                "field.amplitude must be nonnegative, got {}",
                self.field.amplitude
            )));
        }
        if let Some(sim) = &self.simulate {
            if !(sim.dt > 0.0) || !sim.dt.is_finite() {
                return Err(Error::Config(format!("simulate.dt must be positive, got {}", sim.dt)));
            }
            if sim.output_stride == 0 {
                return Err(Error::Config("simulate.output_stride must be at least 1".into()));
            }
        }
        // Grid::new re-checks these, but failing at parse time points at the file.
        Grid::new(self.grid.n, self.grid.length, self.grid.eps0, self.grid.mu0)
            .map_err(|e| Error::Config(format!("grid section: {e}")))?;
        Ok(())
    }

    /// Every named check (and every tolerance override) must exist in the
    /// registry the caller is about to run.
    pub fn validate_checks(&self, known: &[&str]) -> Result<()> {
        for check in &self.checks {
            if !known.contains(&check.as_str()) {
                return Err(Error::Config(format!(
                    "unknown check `{check}`; known checks: {}",
                    known.join(", ")
                )));
            }
        }
        for check in self.tolerances.keys() {
            if !known.contains(&check.as_str()) {
                return Err(Error::Config(format!(
                    "tolerance override for unknown check `{check}`"
                )));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.length, self.grid.eps0, self.grid.mu0)
    }

    /// Particle file location, resolved against the scenario's directory.
    pub fn particle_path(&self, scenario_path: &Path) -> PathBuf {
        let reference = Path::new(&self.particles);
        if reference.is_absolute() {
            reference.to_path_buf()
        } else {
            scenario_path.parent().unwrap_or(Path::new(".")).join(reference)
        }
    }
}

/// Particle file: nuclear charge, smearing width, one table per particle.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleFile {
    /// Nuclear charge in units of e; must match the first particle's charge.
    pub z: f64,
    /// Gaussian smearing width as a multiple of dx.
    pub sigma_dx: f64,
    #[serde(default)]
    pub pinned_nucleus: bool,
    #[serde(rename = "particle")]
    pub particles: Vec<ParticleRow>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleRow {
    pub charge: f64,
    pub mass: f64,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
}

impl ParticleFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read particles {}: {e}", path.display())))?;
        let file: ParticleFile = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("particles {}: {e}", path.display())))?;
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<()> {
        if self.particles.is_empty() {
            return Err(Error::Config("particle file lists no particles".into()));
        }
        let nucleus = self.particles[0].charge;
        if (nucleus - self.z).abs() > 1e-12 * self.z.abs().max(1.0) {
            return Err(Error::Config(format!(
                "declared z = {} but the first particle carries charge {nucleus}",
                self.z
            )));
        }
        Ok(())
    }

    /// Realize the set on a grid; `sigma_dx` turns into an absolute width.
    pub fn build(&self, grid: &Grid) -> Result<ParticleSet> {
        let sigma = self.sigma_dx * grid.dx();
        let p = ParticleSet::new(
            self.particles.iter().map(|p| p.charge).collect(),
            self.particles.iter().map(|p| p.mass).collect(),
            self.particles.iter().map(|p| p.position).collect(),
            self.particles.iter().map(|p| p.velocity).collect(),
            sigma,
            self.pinned_nucleus,
        )?;
        p.validate_against(grid)?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const SCENARIO: &str = r#"
name = "dipole"
particles = "p.toml"
checks = ["alpha", "beta"]

[grid]
n = 16
length = 1.0

[tolerances]
alpha = 1e-8
"#;

    const PARTICLES: &str = r#"
z = 1.0
sigma_dx = 3.0
pinned_nucleus = true

[[particle]]
charge = 1.0
mass = 1e4
position = [0.0, 0.0, 0.0]
velocity = [0.0, 0.0, 0.0]

[[particle]]
charge = -1.0
mass = 1.0
position = [0.1, 0.05, -0.08]
velocity = [0.0, 0.21, -0.33]
"#;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_a_scenario_with_defaults_filled() {
        let f = write_temp(SCENARIO);
        let s = Scenario::load(f.path()).unwrap();
        assert_eq!(s.name, "dipole");
        assert_eq!(s.quadrature_order, 32);
        assert_eq!(s.tol_scale, 1.0);
        assert_eq!(s.seed, 0);
        assert_eq!(s.checks, vec!["alpha", "beta"]);
        assert_eq!(s.field.amplitude, 0.0);
        assert_eq!(s.field.modes, 0);
        assert!(s.simulate.is_none());
        s.validate_checks(&["alpha", "beta", "gamma"]).unwrap();
    }

    #[test]
    fn unknown_checks_and_typos_are_config_errors() {
        let f = write_temp(SCENARIO);
        let s = Scenario::load(f.path()).unwrap();
        assert!(matches!(s.validate_checks(&["alpha"]), Err(Error::Config(_))));

        let typo = SCENARIO.replace("tol_scale", "tol_scal");
        let f = write_temp(&format!("tol_scal = 1.0\n{typo}"));
        assert!(matches!(Scenario::load(f.path()), Err(Error::Config(_))));
    }

    #[test]
    fn bad_values_are_rejected() {
        let f = write_temp(&SCENARIO.replace("alpha = 1e-8", "alpha = -1.0"));
        assert!(matches!(Scenario::load(f.path()), Err(Error::Config(_))));

        let f = write_temp(&SCENARIO.replace("n = 16", "n = 7"));
        assert!(matches!(Scenario::load(f.path()), Err(Error::Config(_))));

        let missing = Path::new("/nonexistent/scenario.toml");
        assert!(matches!(Scenario::load(missing), Err(Error::Config(_))));
    }

    #[test]
    fn particle_file_builds_a_valid_set() {
        let f = write_temp(PARTICLES);
        let pf = ParticleFile::load(f.path()).unwrap();
        let grid = Grid::cubic(16, 1.0).unwrap();
        let p = pf.build(&grid).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.nucleus_pinned);
        assert_eq!(p.sigma, 3.0 * grid.dx());
    }

    #[test]
    fn particle_file_cross_checks_the_declared_charge() {
        let f = write_temp(&PARTICLES.replace("z = 1.0", "z = 2.0"));
        assert!(matches!(ParticleFile::load(f.path()), Err(Error::Config(_))));
    }

    #[test]
    fn particle_paths_resolve_against_the_scenario_directory() {
        let f = write_temp(SCENARIO);
        let s = Scenario::load(f.path()).unwrap();
        let resolved = s.particle_path(f.path());
        assert_eq!(resolved.parent(), f.path().parent());
        assert_eq!(resolved.file_name().unwrap(), "p.toml");
    }
}
