//! Scenario configuration: a TOML file names a potential family, its free
//! coefficient functions, the trusted time window, and the verification
//! checks to run against it.

use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

use foliate::jet::Jet;
use foliate::{
    abel_family, compatible_from_invariant, forced_oscillator, giacomini, quadratic,
    sarlet_with_variant, FamilyInstance, FnKind, GridSpec, IntegratorConfig, PotentialSpec,
    SarletVariant, ScalarField, SpaceProfile, TimeFunction,
};

/// One closed-form coefficient function of the catalog.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FnSpec {
    /// f(x) = value
    Constant { value: f64 },
    /// f(x) = Σ coeffs[i]·xⁱ (ascending powers)
    Polynomial { coeffs: Vec<f64> },
    /// f(x) = a + b·cos(omega·x + phi)
    Trigonometric {
        a: f64,
        b: f64,
        omega: f64,
        phi: f64,
    },
    /// f(x) = a·exp(lambda·x)
    Exponential { a: f64, lambda: f64 },
}

impl FnSpec {
    fn kind(&self) -> FnKind {
        match self.clone() {
            FnSpec::Constant { value } => FnKind::Constant(value),
            FnSpec::Polynomial { coeffs } => FnKind::Polynomial(coeffs),
            FnSpec::Trigonometric { a, b, omega, phi } => {
                FnKind::Trigonometric { a, b, omega, phi }
            }
            FnSpec::Exponential { a, lambda } => FnKind::Exponential { a, lambda },
        }
    }

    fn time(&self) -> TimeFunction {
        TimeFunction(self.kind())
    }

    fn profile(&self) -> SpaceProfile {
        SpaceProfile(self.kind())
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SarletVariantConfig {
    #[default]
    Corrected,
    PrintedQuadratic,
}

/// Which family to construct and from which free functions.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    ForcedOscillator {
        rho: FnSpec,
        force: FnSpec,
    },
    Sarlet {
        rho: FnSpec,
        sigma: FnSpec,
        gamma: FnSpec,
        #[serde(default)]
        variant: SarletVariantConfig,
    },
    Quadratic {
        rho: FnSpec,
        sigma: FnSpec,
        u: FnSpec,
    },
    Giacomini {
        c2: FnSpec,
        w: FnSpec,
    },
    Abel {
        rho: FnSpec,
        k: f64,
        u: FnSpec,
    },
    /// Autonomous well V = U(q) paired with its energy invariant
    /// J = p²/2 + U(q); the compatible coefficient is rebuilt from J.
    Inverse {
        u: FnSpec,
    },
}

impl FamilyConfig {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FamilyConfig::ForcedOscillator { .. } => "forced_oscillator",
            FamilyConfig::Sarlet { .. } => "sarlet",
            FamilyConfig::Quadratic { .. } => "quadratic",
            FamilyConfig::Giacomini { .. } => "giacomini",
            FamilyConfig::Abel { .. } => "abel",
            FamilyConfig::Inverse { .. } => "inverse",
        }
    }
}

/// Integrator tolerance overrides; unset fields keep the library defaults.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorOverrides {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_steps: Option<usize>,
}

impl IntegratorOverrides {
    pub fn resolve(&self) -> IntegratorConfig {
        let mut cfg = IntegratorConfig::default();
        if let Some(r) = self.rel_tol {
            cfg.rel_tol = r;
        }
        if let Some(a) = self.abs_tol {
            cfg.abs_tol = a;
        }
        if let Some(m) = self.max_steps {
            cfg.max_steps = m;
        }
        cfg
    }
}

/// Default initial conditions for the trajectory command.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryDefaults {
    pub q0: f64,
    pub p0: f64,
    pub t0: Option<f64>,
    pub t_end: Option<f64>,
}

/// Residual scan over a lattice; unset axes take the standard lattice
/// (10 points per axis, q, p ∈ [−2, 2], t over the window).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanCheckConfig {
    pub threshold: f64,
    pub q: Option<(f64, f64, usize)>,
    pub p: Option<(f64, f64, usize)>,
    pub t: Option<(f64, f64, usize)>,
}

impl ScanCheckConfig {
    pub fn grid(&self, window: (f64, f64)) -> GridSpec {
        let mut grid = GridSpec::standard(window);
        if let Some(q) = self.q {
            grid.q = q;
        }
        if let Some(p) = self.p {
            grid.p = p;
        }
        if let Some(t) = self.t {
            grid.t = t;
        }
        grid
    }
}

fn default_drift_runs() -> usize {
    20
}

/// Invariant conservation along seeded trajectories.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftCheckConfig {
    pub threshold: f64,
    #[serde(default = "default_drift_runs")]
    pub runs: usize,
    /// Initial-condition box; defaults to q ∈ [0.4, 1.6], p ∈ [−1.5, 1.5].
    pub q_range: Option<(f64, f64)>,
    pub p_range: Option<(f64, f64)>,
    /// Integration horizon; defaults to the window end.
    pub t_end: Option<f64>,
}

impl Default for DriftCheckConfig {
    fn default() -> Self {
        Self {
            threshold: 1e-6,
            runs: default_drift_runs(),
            q_range: None,
            p_range: None,
            t_end: None,
        }
    }
}

/// Reduced-evolution-law consistency along one trajectory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiccatiCheckConfig {
    pub threshold: f64,
    pub q0: f64,
    pub p0: f64,
    pub t0: Option<f64>,
    pub t_end: Option<f64>,
}

fn default_roundtrip_samples() -> usize {
    1000
}

/// Invariant → coefficient round-trip at sampled states.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundtripCheckConfig {
    pub threshold: f64,
    #[serde(default = "default_roundtrip_samples")]
    pub samples: usize,
    pub q_range: Option<(f64, f64)>,
    pub p_range: Option<(f64, f64)>,
}

/// Frozen-time characteristic tracing (Abel-type family only).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacteristicCheckConfig {
    pub threshold: f64,
    pub t: f64,
    pub q_bar: (f64, f64),
    pub p_bar: f64,
}

/// The checks a `verify` run executes, in this order.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    pub residual_scan: Option<ScanCheckConfig>,
    pub drift: Option<DriftCheckConfig>,
    pub riccati: Option<RiccatiCheckConfig>,
    pub roundtrip: Option<RoundtripCheckConfig>,
    pub characteristic: Option<CharacteristicCheckConfig>,
}

/// A complete scenario file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub window: (f64, f64),
    pub family: FamilyConfig,
    /// Sampling seed; a `--seed` flag overrides it.
    pub seed: Option<u64>,
    /// Artifact directory; a `--out` flag overrides it.
    pub out_dir: Option<std::path::PathBuf>,
    #[serde(default)]
    pub integrator: IntegratorOverrides,
    pub trajectory: Option<TrajectoryDefaults>,
    #[serde(default)]
    pub checks: ChecksConfig,
}

pub fn load(path: &Path) -> anyhow::Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading scenario file {}", path.display()))?;
    let cfg: ScenarioConfig =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(cfg)
}

/// A constructed scenario: the evaluatable objects every command works with.
/// `instance` is absent for the `inverse` kind, which has no packaged family.
pub struct Built {
    pub kind: &'static str,
    pub instance: Option<FamilyInstance>,
    pub potential: PotentialSpec,
    pub compat: ScalarField,
    pub invariant: Option<ScalarField>,
    pub window: (f64, f64),
}

impl ScenarioConfig {
    pub fn build(&self) -> foliate::Result<Built> {
        let window = self.window;
        let kind = self.family.kind_name();
        let instance = match &self.family {
            FamilyConfig::ForcedOscillator { rho, force } => {
                Some(forced_oscillator(rho.time(), force.time(), window)?)
            }
            FamilyConfig::Sarlet {
                rho,
                sigma,
                gamma,
                variant,
            } => {
                let variant = match variant {
                    SarletVariantConfig::Corrected => SarletVariant::Corrected,
                    SarletVariantConfig::PrintedQuadratic => SarletVariant::PrintedQuadratic,
                };
                Some(sarlet_with_variant(
                    rho.time(),
                    sigma.time(),
                    gamma.time(),
                    window,
                    variant,
                )?)
            }
            FamilyConfig::Quadratic { rho, sigma, u } => {
                Some(quadratic(rho.time(), sigma.time(), u.profile(), window)?)
            }
            FamilyConfig::Giacomini { c2, w } => {
                Some(giacomini(c2.profile(), w.profile(), window)?)
            }
            FamilyConfig::Abel { rho, k, u } => {
                Some(abel_family(rho.time(), *k, u.profile(), window)?)
            }
            FamilyConfig::Inverse { u } => {
                let profile = u.profile();
                let potential = PotentialSpec::autonomous(profile.clone());
                let j = ScalarField::from_jet_fn(move |x| {
                    let mut jet = Jet::val(0.5 * x.p * x.p + profile.eval(x.q, 0)?);
                    jet.dq = profile.eval(x.q, 1)?;
                    jet.dqq = profile.eval(x.q, 2)?;
                    jet.dp = x.p;
                    jet.dpp = 1.0;
                    Ok(jet)
                });
                return Ok(Built {
                    kind,
                    instance: None,
                    compat: compatible_from_invariant(&j),
                    potential,
                    invariant: Some(j),
                    window,
                });
            }
        };
        let fam = instance.unwrap();
        Ok(Built {
            kind,
            potential: fam.potential.clone(),
            compat: fam.compat.clone(),
            invariant: fam.invariant.clone(),
            window,
            instance: Some(fam),
        })
    }
}
