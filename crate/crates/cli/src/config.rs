//! Strict JSON run configuration. Unknown keys are rejected everywhere.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use betaplane::evolution::stability_bound;
use betaplane::make_profile;
use serde::{Deserialize, Serialize};

use crate::scenarios::SCENARIOS;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Evolve,
    Spectrum,
    Bvp,
    Atlas,
    Verify,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Evolve => "evolve",
            Subcommand::Spectrum => "spectrum",
            Subcommand::Bvp => "bvp",
            Subcommand::Atlas => "atlas",
            Subcommand::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
}

fn default_n() -> usize {
    256
}
fn default_t_final() -> f64 {
    10.0
}
fn default_stride() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "default_n")]
    pub n: usize,
    /// `None` selects the default fraction of the stability bound.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    /// Exponential filter strength; off unless given.
    #[serde(default)]
    pub filter: Option<f64>,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            n: default_n(),
            dt: None,
            t_final: default_t_final(),
            sample_stride: default_stride(),
            filter: None,
        }
    }
}

/// Initial vorticity (or BVP forcing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `sin(k pi (y - y1) / L)`.
    SineMode { k: usize },
    /// `sum_k a_k sin(k pi (y - y1) / L)`, `k` from 1.
    SineSeries { coefficients: Vec<f64> },
    /// Vorticity of a closed-form sinus eigenmode on a curve.
    GammaMode { curve: String, parameter: f64 },
    /// Nodal CSV `y,re,im` on the run grid.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BvpSpec {
    /// `[re, im]`.
    pub c: [f64; 2],
    /// `plus` or `minus`; used when `c` is real and inside `Ran u`.
    #[serde(default)]
    pub side: Option<String>,
    #[serde(default)]
    pub eps_schedule: Option<Vec<f64>>,
}

fn default_atlas_n() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasSpec {
    pub alpha_range: [f64; 2],
    pub beta_range: [f64; 2],
    pub n_alpha: usize,
    pub n_beta: usize,
    /// Collocation size for each spectrum.
    #[serde(default = "default_atlas_n")]
    pub n_grid: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub physics: Option<Physics>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub initial_data: Option<InitialData>,
    /// Remove the discrete-mode projection from the initial data first.
    #[serde(default)]
    pub project_out_discrete: bool,
    #[serde(default)]
    pub bvp: Option<BvpSpec>,
    #[serde(default)]
    pub atlas: Option<AtlasSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub file: ConfigFile,
    pub out_dir: PathBuf,
    pub scenario: Option<String>,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub dt: Option<f64>,
}

/// `source` is a path, or inline JSON when it starts with `{`.
pub fn read_config_source(source: &str) -> Result<String, CliError> {
    if source.trim_start().starts_with('{') {
        Ok(source.to_string())
    } else {
        std::fs::read_to_string(Path::new(source))
            .map_err(|e| CliError::Config(format!("cannot read config `{source}`: {e}")))
    }
}

pub fn parse_config(
    json: Option<&str>,
    subcommand: Subcommand,
    scenario: Option<String>,
    out_dir: PathBuf,
    overrides: &Overrides,
) -> Result<RunConfig, CliError> {
    let mut file: ConfigFile = match json {
        Some(text) => serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?,
        None => ConfigFile::default(),
    };
    if let Some(n) = overrides.n {
        file.numerics.n = n;
    }
    if let Some(dt) = overrides.dt {
        file.numerics.dt = Some(dt);
    }
    let cfg = RunConfig {
        subcommand,
        file,
        out_dir,
        scenario,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn require<'a, T>(v: &'a Option<T>, key: &str, sub: Subcommand) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| CliError::Config(format!("`{}` requires the `{key}` section", sub.name())))
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let f = &cfg.file;
    let num = &f.numerics;
    if num.n < 4 {
        return Err(CliError::Config(format!("numerics.n must be at least 4, got {}", num.n)));
    }
    if num.sample_stride == 0 {
        return Err(CliError::Config("numerics.sample_stride must be positive".into()));
    }
    if !(num.t_final > 0.0) {
        return Err(CliError::Config(format!("numerics.t_final must be positive, got {}", num.t_final)));
    }
    if let Some(dt) = num.dt {
        if !(dt > 0.0) {
            return Err(CliError::Config(format!("numerics.dt must be positive, got {dt}")));
        }
    }
    let physics_ok = |p: &Physics| -> Result<(), CliError> {
        if !(p.alpha > 0.0) {
            return Err(CliError::Config(format!("physics.alpha must be positive, got {}", p.alpha)));
        }
        Ok(())
    };
    match cfg.subcommand {
        Subcommand::Evolve => {
            let prof = require(&f.profile, "profile", cfg.subcommand)?;
            let phys = require(&f.physics, "physics", cfg.subcommand)?;
            require(&f.initial_data, "initial_data", cfg.subcommand)?;
            physics_ok(phys)?;
            let profile = make_profile(&prof.name, &prof.params)?;
            if let Some(dt) = num.dt {
                let bound = stability_bound(&profile, phys.alpha, phys.beta);
                if dt > bound {
                    return Err(CliError::Config(format!(
                        "dt = {dt} violates the stability bound dt <= {bound:.6e}"
                    )));
                }
            }
        }
        Subcommand::Spectrum => {
            let prof = require(&f.profile, "profile", cfg.subcommand)?;
            physics_ok(require(&f.physics, "physics", cfg.subcommand)?)?;
            make_profile(&prof.name, &prof.params)?;
        }
        Subcommand::Bvp => {
            let prof = require(&f.profile, "profile", cfg.subcommand)?;
            physics_ok(require(&f.physics, "physics", cfg.subcommand)?)?;
            require(&f.initial_data, "initial_data", cfg.subcommand)?;
            let b = require(&f.bvp, "bvp", cfg.subcommand)?;
            if let Some(side) = &b.side {
                if side != "plus" && side != "minus" {
                    return Err(CliError::Config(format!("bvp.side must be `plus` or `minus`, got `{side}`")));
                }
            }
            make_profile(&prof.name, &prof.params)?;
        }
        Subcommand::Atlas => {
            let a = require(&f.atlas, "atlas", cfg.subcommand)?;
            if let Some(p) = &f.profile {
                if p.name != "sinus" {
                    return Err(CliError::Config(format!("the atlas exists for the sinus profile only, got `{}`", p.name)));
                }
            }
            if a.n_alpha == 0 || a.n_beta == 0 {
                return Err(CliError::Config("atlas grid sizes must be positive".into()));
            }
        }
        Subcommand::Verify => {
            let name = cfg
                .scenario
                .as_deref()
                .ok_or_else(|| CliError::Config(format!("`verify` needs a scenario; available: {}", scenario_list())))?;
            if name != "all" && !SCENARIOS.iter().any(|s| s.name == name) {
                return Err(CliError::Config(format!(
                    "unknown scenario `{name}`; available: {}",
                    scenario_list()
                )));
            }
        }
    }
    Ok(())
}

pub fn scenario_list() -> String {
    let mut names: Vec<&str> = SCENARIOS.iter().map(|s| s.name).collect();
    names.push("all");
    names.join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str, sub: Subcommand) -> Result<RunConfig, CliError> {
        parse_config(Some(json), sub, None, PathBuf::from("out"), &Overrides::default())
    }

    #[test]
    fn defaults_fill_numerics() {
        let cfg = parse(
            r#"{"profile": {"name": "couette"}, "physics": {"alpha": 1.0}}"#,
            Subcommand::Spectrum,
        )
        .unwrap();
        assert_eq!(cfg.file.numerics, Numerics::default());
        assert_eq!(cfg.file.physics.unwrap().beta, 0.0);
    }

    #[test]
    fn overrides_win_over_the_file() {
        let json = r#"{"profile": {"name": "couette"}, "physics": {"alpha": 1.0}, "numerics": {"n": 32}}"#;
        let o = Overrides { n: Some(80), dt: None };
        let cfg = parse_config(Some(json), Subcommand::Spectrum, None, PathBuf::from("x"), &o).unwrap();
        assert_eq!(cfg.file.numerics.n, 80);
    }

    #[test]
    fn missing_sections_are_named() {
        let e = parse(r#"{"profile": {"name": "couette"}}"#, Subcommand::Evolve).unwrap_err();
        assert!(e.to_string().contains("`physics`"), "{e}");
        let e = parse(r#"{"profile": {"name": "poly"}, "atlas": {"alpha_range": [1, 2], "beta_range": [0, 1], "n_alpha": 1, "n_beta": 1}}"#, Subcommand::Atlas)
            .unwrap_err();
        assert!(e.to_string().contains("sinus"), "{e}");
    }

    #[test]
    fn initial_data_tags() {
        let d: InitialData = serde_json::from_str(r#"{"kind": "gamma_mode", "curve": "gamma2", "parameter": 0.3}"#).unwrap();
        assert_eq!(d, InitialData::GammaMode { curve: "gamma2".into(), parameter: 0.3 });
        assert!(serde_json::from_str::<InitialData>(r#"{"kind": "sine_mode", "k": 1, "phase": 0}"#).is_err());
    }

    #[test]
    fn inline_source_is_not_a_path() {
        assert_eq!(read_config_source("  {\"a\": 1}").unwrap(), "  {\"a\": 1}");
        assert!(read_config_source("/nonexistent/cfg.json").is_err());
    }

    #[test]
    fn verify_needs_a_known_scenario() {
        let run = |s: Option<&str>| {
            parse_config(None, Subcommand::Verify, s.map(String::from), PathBuf::from("o"), &Overrides::default())
        };
        assert!(run(Some("depletion")).is_ok());
        assert!(run(Some("all")).is_ok());
        assert!(run(None).is_err());
        assert!(run(Some("deplet")).unwrap_err().to_string().contains("available"));
    }
}
