use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::micro::GpScheme;
use crate::models::MicroModelSpec;
use crate::spectral::{Grid, RealField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Kdv,
    Micro,
    Converge,
    Soliton,
    Miura,
    Hyperbolic,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Kdv => "kdv",
            Self::Micro => "micro",
            Self::Converge => "converge",
            Self::Soliton => "soliton",
            Self::Miura => "miura",
            Self::Hyperbolic => "hyperbolic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
}

impl GridConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.length)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    /// Step of the main solver; each experiment has its own default.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Number of equally spaced output times after `t = 0`.
    #[serde(default = "default_outputs")]
    pub outputs: usize,
}

fn default_outputs() -> usize {
    10
}

/// Initial profile; `direction` weights the components (default `e_0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `a (sech^2((x - L/2)/w) - mean)`.
    Sech2Bump {
        amplitude: f64,
        #[serde(default = "default_width")]
        width: f64,
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
    /// `a sin(2 pi m x / L + phase)`.
    Mode {
        amplitude: f64,
        mode: i64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
}

fn default_width() -> f64 {
    2.0
}

impl InitialData {
    fn direction(&self) -> Option<&Vec<f64>> {
        match self {
            Self::Sech2Bump { direction, .. } | Self::Mode { direction, .. } => direction.as_ref(),
        }
    }

    pub fn sample(&self, grid: Grid, dim: usize) -> Result<RealField> {
        let dir = match self.direction() {
            Some(d) if d.len() != dim => return Err(Error::config("initial.direction", format!("needs {dim} entries"))),
            Some(d) => d.clone(),
            None => (0..dim).map(|c| if c == 0 { 1.0 } else { 0.0 }).collect(),
        };
        let l = grid.length();
        let profile: Vec<f64> = match *self {
            Self::Sech2Bump { amplitude, width, .. } => {
                let raw: Vec<f64> = grid.points().iter().map(|x| ((x - 0.5 * l) / width).cosh().powi(-2)).collect();
                let mean = raw.iter().sum::<f64>() / raw.len() as f64;
                raw.into_iter().map(|v| amplitude * (v - mean)).collect()
            }
            Self::Mode { amplitude, mode, phase, .. } => {
                let k = 2.0 * PI * mode as f64 / l;
                grid.points().iter().map(|x| amplitude * (k * x + phase).sin()).collect()
            }
        };
        RealField::new(grid, dir.iter().map(|w| profile.iter().map(|p| w * p).collect()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileChoice {
    #[default]
    Exact,
    Quoted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonConfig {
    #[serde(default = "one")]
    pub speed: f64,
    #[serde(default)]
    pub profile: ProfileChoice,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiuraConfig {
    /// Scalar `Q(u,u) = q u^2`; ignored when `alpha`/`beta` are given.
    #[serde(default)]
    pub q: Option<f64>,
    /// `d = 2` complex family, `[re, im]`.
    #[serde(default)]
    pub alpha: Option<[f64; 2]>,
    #[serde(default)]
    pub beta: Option<[f64; 2]>,
    #[serde(default = "miura_tol")]
    pub tolerance: f64,
}

fn miura_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperbolicConfig {
    /// Scalar coefficient of `Q(u,u) = q u^2`.
    #[serde(default = "one")]
    pub q: f64,
    /// Growth of `max|u_x|` that counts as breakdown.
    #[serde(default = "default_factor")]
    pub factor: f64,
}

fn default_factor() -> f64 {
    crate::kdv::DEFAULT_BLOWUP_FACTOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_model")]
    pub model: MicroModelSpec,
    pub grid: GridConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub initial: Option<InitialData>,
    /// Single scale parameter for `micro` runs.
    #[serde(default)]
    pub eps: Option<f64>,
    /// Strictly decreasing list for `converge`.
    #[serde(default)]
    pub eps_list: Vec<f64>,
    #[serde(default)]
    pub gp_scheme: GpScheme,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub soliton: Option<SolitonConfig>,
    #[serde(default)]
    pub miura: Option<MiuraConfig>,
    #[serde(default)]
    pub hyperbolic: Option<HyperbolicConfig>,
}

fn default_model() -> MicroModelSpec {
    MicroModelSpec::GpScalar
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    /// Parses TOML. When `kind` is given it fills a missing `kind` key and
    /// must agree with a present one.
    pub fn from_toml_str(s: &str, kind: Option<ExperimentKind>) -> Result<Self> {
        let mut table: toml::Table = s.parse().map_err(|e: toml::de::Error| Error::config("toml", e.to_string()))?;
        if let Some(k) = kind {
            match table.get("kind").and_then(|v| v.as_str()) {
                None => {
                    table.insert("kind".into(), toml::Value::String(k.name().into()));
                }
                Some(name) if name != k.name() => {
                    return Err(Error::config("kind", format!("config says {name}, command says {}", k.name())));
                }
                Some(_) => {}
            }
        }
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| Error::config("toml", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.grid.n.is_power_of_two() || self.grid.n < 8 {
            return Err(Error::config("grid.n", format!("must be a power of two >= 8, got {}", self.grid.n)));
        }
        positive("grid.length", self.grid.length)?;
        positive("time.t_final", self.time.t_final)?;
        if let Some(dt) = self.time.dt {
            positive("time.dt", dt)?;
        }
        if self.time.outputs == 0 {
            return Err(Error::config("time.outputs", "must be at least 1"));
        }
        self.model.validate().map_err(|e| Error::config("model", e.to_string()))?;
        let check_eps = |field: &str, e: f64| {
            if e.is_finite() && e > 0.0 && e <= 1.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("must lie in (0, 1], got {e}")))
            }
        };
        match self.kind {
            ExperimentKind::Micro => {
                check_eps("eps", self.eps.ok_or_else(|| Error::config("eps", "required for micro runs"))?)?;
                self.require_initial()?;
            }
            ExperimentKind::Converge => {
                if self.eps_list.len() < 2 {
                    return Err(Error::config("eps_list", "needs at least two values"));
                }
                for e in &self.eps_list {
                    check_eps("eps_list", *e)?;
                }
                if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Error::config("eps_list", "must be strictly decreasing"));
                }
                self.require_initial()?;
            }
            ExperimentKind::Kdv | ExperimentKind::Hyperbolic => {
                self.require_initial()?;
            }
            ExperimentKind::Miura => {
                self.require_initial()?;
                let m = self.miura.as_ref().ok_or_else(|| Error::config("miura", "section required"))?;
                if m.alpha.is_some() != m.beta.is_some() {
                    return Err(Error::config("miura", "alpha and beta go together"));
                }
                if m.alpha.is_none() && m.q.is_none() {
                    return Err(Error::config("miura", "give q or alpha/beta"));
                }
                positive("miura.tolerance", m.tolerance)?;
            }
            ExperimentKind::Soliton => {
                if let Some(s) = &self.soliton {
                    positive("soliton.speed", s.speed)?;
                }
            }
        }
        if let Some(h) = &self.hyperbolic {
            positive("hyperbolic.factor", h.factor)?;
        }
        Ok(())
    }

    fn require_initial(&self) -> Result<&InitialData> {
        self.initial
            .as_ref()
            .ok_or_else(|| Error::config("initial", format!("required for {} runs", self.kind.name())))
    }

    pub fn initial_data(&self, dim: usize) -> Result<RealField> {
        self.require_initial()?.sample(self.grid.grid()?, dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONVERGE: &str = r#"
        kind = "converge"
        eps_list = [0.2, 0.1, 0.05]
        [model]
        kind = "gp_scalar"
        [grid]
        n = 512
        length = 40.0
        [time]
        t_final = 0.5
        [initial]
        profile = "sech2_bump"
        amplitude = 0.3
    "#;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_toml_str(CONVERGE, None).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Converge);
        assert_eq!(cfg.time.outputs, 10);
        assert_eq!(cfg.gp_scheme, GpScheme::Yoshida4);
        let a0 = cfg.initial_data(1).unwrap();
        assert!(a0.mean()[0].abs() < 1e-15);
    }

    #[test]
    fn kind_from_command() {
        let body = CONVERGE.replace("kind = \"converge\"", "");
        let cfg = ExperimentConfig::from_toml_str(&body, Some(ExperimentKind::Converge)).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Converge);
        assert!(ExperimentConfig::from_toml_str(CONVERGE, Some(ExperimentKind::Kdv)).is_err());
    }

    #[test]
    fn field_level_errors() {
        let bad = CONVERGE.replace("[0.2, 0.1, 0.05]", "[0.1, 0.2]");
        let err = ExperimentConfig::from_toml_str(&bad, None).unwrap_err();
        assert!(err.to_string().contains("eps_list"), "{err}");
        let bad = CONVERGE.replace("n = 512", "n = 500");
        assert!(ExperimentConfig::from_toml_str(&bad, None).unwrap_err().to_string().contains("grid.n"));
        let bad = CONVERGE.replace("t_final = 0.5", "t_final = -1.0");
        assert!(ExperimentConfig::from_toml_str(&bad, None).unwrap_err().to_string().contains("t_final"));
        let bad = CONVERGE.replace("amplitude = 0.3", "amplitude = 0.3\nbogus = 1");
        assert!(ExperimentConfig::from_toml_str(&bad, None).is_err());
    }
}
