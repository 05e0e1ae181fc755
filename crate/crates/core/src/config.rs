//! Run configuration files.
//!
//! TOML with six tables. Every key except `schema_version`, `[grid]` and
//! the solver's `epsilon`/`epsilons` has a default.
//!
//! ```toml
//! schema_version = 1
//! scenario = "relaxation-2d"
//! seed = 7
//!
//! [grid]
//! dim = 2
//! n = 64
//! L = 4.0            # half width, the torus is [-L, L)^d
//!
//! [entropy]
//! m = 2.0
//! k = 1.0
//!
//! [potentials]
//! c_k = 0.05
//! kernel = { kind = "wrapped-gaussian", amplitude = -1.0, width = 1.0 }
//! confinement = { kind = "cosine-mode", amplitude = 0.1, modes = [1, 0] }
//!
//! [initial]
//! density = { kind = "gaussian-bump", base = 1.0, amplitude = 0.5, width = 1.2 }
//! velocity = { kind = "well-prepared" }
//!
//! [solver]
//! epsilons = [0.2, 0.1, 0.05, 0.025]
//! t_end = 1.0
//! snapshot_stride = 10
//!
//! [output]
//! directory = "out"
//! formats = ["csv"]
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::entropy::EntropyLaw;
use crate::error::{Error, Result, Violation};
use crate::fields::snapshot::SnapshotFormat;
use crate::fields::{PeriodicGrid, PotentialSpec, Potentials, ScalarField, VectorField};
use crate::hyperbolic::{well_prepared_velocity, PressureCoupling};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialsSection {
    #[serde(default)]
    pub c_k: f64,
    #[serde(default = "zero_potential")]
    pub kernel: PotentialSpec,
    #[serde(default = "zero_potential")]
    pub confinement: PotentialSpec,
}

fn zero_potential() -> PotentialSpec {
    PotentialSpec::Zero
}

impl Default for PotentialsSection {
    fn default() -> Self {
        Self { c_k: 0.0, kernel: PotentialSpec::Zero, confinement: PotentialSpec::Zero }
    }
}

/// Initial density, centered at the origin.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensitySpec {
    Uniform { value: f64 },
    /// `base + amplitude·exp(-|x|²/(2 width²))`
    GaussianBump { base: f64, amplitude: f64, width: f64 },
    /// `base + amplitude·cos(π (modes·x)/L)`
    CosineMode { base: f64, amplitude: f64, modes: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VelocitySpec {
    Rest,
    /// `u = -∇μ(ρ₀)`, the limit velocity of the initial density.
    WellPrepared,
    Constant { value: Vec<f64> },
    /// `u = a(sin(πy/L), sin(πx/L), 0)`, divergence free; needs `d ≥ 2`.
    Shear { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub density: DensitySpec,
    #[serde(default = "rest")]
    pub velocity: VelocitySpec,
}

fn rest() -> VelocitySpec {
    VelocitySpec::Rest
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub epsilon: Option<f64>,
    pub epsilons: Option<Vec<f64>>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "one")]
    pub snapshot_stride: usize,
    #[serde(default = "default_floor")]
    pub rho_floor: f64,
    #[serde(default)]
    pub coupling: PressureCoupling,
    pub dt_max: Option<f64>,
    /// Sweep members and the limit run share one step size.
    #[serde(default = "yes")]
    pub shared_dt: bool,
}

fn default_cfl() -> f64 {
    0.45
}
fn default_t_end() -> f64 {
    1.0
}
fn default_floor() -> f64 {
    1e-10
}
fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<SnapshotFormat>,
    /// Write density snapshots; the CSV tables are always written.
    #[serde(default = "yes")]
    pub snapshots: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<SnapshotFormat> {
    vec![SnapshotFormat::Csv]
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: default_dir(), formats: default_formats(), snapshots: true }
    }
}

/// Settings of the randomized property suites.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "default_draws")]
    pub algebraic_draws: usize,
    #[serde(default = "default_pairs")]
    pub entropy_pairs: usize,
}

fn default_draws() -> usize {
    100_000
}
fn default_pairs() -> usize {
    10_000
}

impl Default for VerifySection {
    fn default() -> Self {
        Self { algebraic_draws: default_draws(), entropy_pairs: default_pairs() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    #[serde(default = "default_scenario")]
    scenario: String,
    #[serde(default)]
    seed: u64,
    grid: GridSection,
    #[serde(default = "default_law")]
    entropy: EntropyLaw,
    #[serde(default)]
    potentials: PotentialsSection,
    initial: InitialSection,
    solver: SolverSection,
    #[serde(default)]
    output: OutputSection,
    #[serde(default)]
    verify: VerifySection,
}

fn default_scenario() -> String {
    "unnamed".into()
}
fn default_law() -> EntropyLaw {
    EntropyLaw::new(2.0, 1.0).expect("m = 2 is valid")
}

/// A non-fatal finding attached to a loaded config.
#[derive(Debug, Clone, PartialEq)]
pub struct Advisory {
    pub rule: &'static str,
    pub message: String,
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: String,
    pub seed: u64,
    pub grid: PeriodicGrid,
    pub law: EntropyLaw,
    pub potentials: PotentialsSection,
    pub initial: InitialSection,
    pub solver: SolverSection,
    pub output: OutputSection,
    pub verify: VerifySection,
    pub advisories: Vec<Advisory>,
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        Error::Parse { line, column, message: e.message().to_string() }
    })?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<RunConfig> {
    let mut bad = Vec::new();
    let mut push = |rule: &'static str, message: String| bad.push(Violation { rule, message });
    if raw.schema_version != SCHEMA_VERSION {
        push(
            "schema-version",
            format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", raw.schema_version),
        );
    }
    let grid = PeriodicGrid::new(raw.grid.dim, raw.grid.n, raw.grid.half_width);
    if let Err(e) = &grid {
        push("grid", e.to_string());
    }
    let s = &raw.solver;
    let eps = epsilon_list(s);
    match &eps {
        None => push("epsilon", "set solver.epsilon or solver.epsilons".into()),
        Some(list) => {
            if list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                push("epsilon-positive", format!("every ε must be positive and finite, got {list:?}"));
            }
            if list.windows(2).any(|w| w[1] >= w[0]) {
                push("epsilon-order", format!("solver.epsilons must be strictly decreasing, got {list:?}"));
            }
        }
    }
    if !(s.cfl > 0.0 && s.cfl <= 1.0) {
        push("cfl", format!("cfl must lie in (0, 1], got {}", s.cfl));
    }
    if !(s.t_end >= 0.0 && s.t_end.is_finite()) {
        push("t-end", format!("t_end must be finite and ≥ 0, got {}", s.t_end));
    }
    if s.snapshot_stride == 0 {
        push("snapshot-stride", "snapshot_stride must be ≥ 1".into());
    }
    if !(s.rho_floor > 0.0) {
        push("positivity", format!("rho_floor must be positive, got {}", s.rho_floor));
    }
    if let Some(dt) = s.dt_max {
        if !(dt > 0.0) {
            push("dt-max", format!("dt_max must be positive, got {dt}"));
        }
    }
    if !(raw.potentials.c_k >= 0.0 && raw.potentials.c_k.is_finite()) {
        push("c-k", format!("c_k must be finite and ≥ 0, got {}", raw.potentials.c_k));
    }
    if raw.output.formats.is_empty() {
        push("output-formats", "output.formats must name at least one format".into());
    }
    let dim = raw.grid.dim;
    match &raw.initial.density {
        DensitySpec::Uniform { value } if !(*value > 0.0) => {
            push("positivity", format!("uniform density must be positive, got {value}"))
        }
        DensitySpec::GaussianBump { base, amplitude, width } => {
            if !(*base > 0.0 && base + amplitude.min(0.0) > 0.0) {
                push("positivity", format!("density {base} + {amplitude}·bump is not positive"));
            }
            if !(*width > 0.0) {
                push("positivity", format!("bump width must be positive, got {width}"));
            }
        }
        DensitySpec::CosineMode { base, amplitude, modes } => {
            if !(base - amplitude.abs() > 0.0) {
                push("positivity", format!("density {base} ± {} is not positive", amplitude.abs()));
            }
            if modes.len() != dim {
                push("dimension", format!("density modes has {} entries for d = {dim}", modes.len()));
            }
        }
        _ => {}
    }
    match &raw.initial.velocity {
        VelocitySpec::Constant { value } if value.len() != dim => {
            push("dimension", format!("constant velocity has {} entries for d = {dim}", value.len()))
        }
        VelocitySpec::Shear { .. } if dim < 2 => push("dimension", "shear velocity needs d ≥ 2".into()),
        _ => {}
    }
    let potentials = grid.as_ref().ok().map(|g| build_potentials(*g, &raw.potentials));
    if let Some(Err(e)) = &potentials {
        push("potentials", e.to_string());
    }
    if raw.verify.algebraic_draws == 0 || raw.verify.entropy_pairs == 0 {
        push("verify", "verify sample counts must be positive".into());
    }
    if !bad.is_empty() {
        return Err(Error::Validation(bad));
    }
    let grid = grid.expect("checked above");
    let mut advisories = Vec::new();
    let m = raw.entropy.m();
    if dim >= 2 && m < 2.0 - 2.0 / dim as f64 {
        advisories.push(Advisory {
            rule: "restrict-m",
            message: format!("restrict-m: m < 2−2/d (m = {m}, 2−2/d = {:.4})", 2.0 - 2.0 / dim as f64),
        });
    }
    if let Some(Ok(p)) = &potentials {
        // Young: C* ≤ ‖K‖₁/k for the quadratic law, a rough guide otherwise
        let c_star_bound = p.kernel().l1_norm() / raw.entropy.k();
        if raw.potentials.c_k * c_star_bound >= 2.0 {
            advisories.push(Advisory {
                rule: "smallness",
                message: format!(
                    "smallness: C_k·‖K‖₁/k = {:.3} ≥ 2, coercivity of Θ may fail",
                    raw.potentials.c_k * c_star_bound
                ),
            });
        }
    }
    Ok(RunConfig {
        scenario: raw.scenario,
        seed: raw.seed,
        grid,
        law: raw.entropy,
        potentials: raw.potentials,
        initial: raw.initial,
        solver: raw.solver,
        output: raw.output,
        verify: raw.verify,
        advisories,
    })
}

fn epsilon_list(s: &SolverSection) -> Option<Vec<f64>> {
    match (&s.epsilon, &s.epsilons) {
        (_, Some(list)) if !list.is_empty() => Some(list.clone()),
        (Some(e), _) => Some(vec![*e]),
        _ => None,
    }
}

fn build_potentials(grid: PeriodicGrid, p: &PotentialsSection) -> Result<Potentials> {
    Potentials::new(grid, &p.kernel, &p.confinement, p.c_k)
}

impl RunConfig {
    /// `solver.epsilons` if given, else the single `solver.epsilon`.
    pub fn epsilons(&self) -> Vec<f64> {
        epsilon_list(&self.solver).expect("validated")
    }

    pub fn build_potentials(&self) -> Result<Potentials> {
        build_potentials(self.grid, &self.potentials)
    }

    pub fn initial_density(&self) -> ScalarField {
        let l = self.grid.half_width();
        match &self.initial.density {
            DensitySpec::Uniform { value } => ScalarField::constant(self.grid, *value),
            DensitySpec::GaussianBump { base, amplitude, width } => ScalarField::from_fn(self.grid, |x| {
                let r2: f64 = x.iter().map(|c| c * c).sum();
                base + amplitude * (-r2 / (2.0 * width * width)).exp()
            }),
            DensitySpec::CosineMode { base, amplitude, modes } => ScalarField::from_fn(self.grid, |x| {
                let phase: f64 = modes.iter().zip(x).map(|(&k, c)| k as f64 * c).sum();
                base + amplitude * (PI * phase / l).cos()
            }),
        }
    }

    pub fn initial_velocity(&self, rho0: &ScalarField, pots: &Potentials) -> VectorField {
        let l = self.grid.half_width();
        match &self.initial.velocity {
            VelocitySpec::Rest => VectorField::zeros(self.grid),
            VelocitySpec::WellPrepared => well_prepared_velocity(rho0, &self.law, pots),
            VelocitySpec::Constant { value } => VectorField::constant(self.grid, value),
            VelocitySpec::Shear { amplitude } => VectorField::from_fn(self.grid, |x| {
                [amplitude * (PI * x[1] / l).sin(), amplitude * (PI * x[0] / l).sin(), 0.0]
            }),
        }
    }
}
