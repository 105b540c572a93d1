//! JSON run configuration.
//!
//! Values are given in normalized units and multiplied by
//! `params.unit_scale` on load: rates, frequencies, detunings, `g_read`
//! and frequency grids scale up, Monte Carlo times scale down. Phases are
//! not scaled.

use std::path::{Path, PathBuf};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::effective_model::SystemParams;
use crate::eit_semiclassical::ProbeConfig;
use crate::error::{Error, Result};
use crate::microscopic_exchange::MicroParams;

/// [`SystemParams`] plus the unit conversion factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamsSection {
    pub system: SystemParams,
    /// rad/s per normalized unit; default 1.
    pub unit_scale: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self { system: SystemParams::default(), unit_scale: 1.0 }
    }
}

/// Removes `key` from a JSON object, deserializes the rest as `T`.
fn split_off<T: for<'a> Deserialize<'a>, E: serde::de::Error>(value: Value, key: &str) -> std::result::Result<(T, Option<Value>), E> {
    let Value::Object(mut map) = value else {
        return Err(E::custom("expected an object"));
    };
    let extra = map.remove(key);
    let rest = serde_json::from_value(Value::Object(map)).map_err(E::custom)?;
    Ok((rest, extra))
}

fn merged<S: Serializer, T: Serialize>(base: &T, key: &str, extra: Value, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::Error as _;
    let mut map: Map<String, Value> = match serde_json::to_value(base).map_err(S::Error::custom)? {
        Value::Object(m) => m,
        _ => return Err(S::Error::custom("expected an object")),
    };
    map.insert(key.to_string(), extra);
    map.serialize(s)
}

impl Serialize for ParamsSection {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        merged(&self.system, "unit_scale", Value::from(self.unit_scale), s)
    }
}

impl<'de> Deserialize<'de> for ParamsSection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (system, scale) = split_off::<SystemParams, D::Error>(Value::deserialize(d)?, "unit_scale")?;
        let unit_scale = match scale {
            None => 1.0,
            Some(v) => v.as_f64().ok_or_else(|| D::Error::custom("unit_scale must be a number"))?,
        };
        Ok(Self { system, unit_scale })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    pub n_atoms: usize,
    pub dt: f64,
    pub t_total: f64,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self { n_atoms: 10_000, dt: 0.001, t_total: 0.5 }
    }
}

/// [`MicroParams`] plus the optional Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MicroSection {
    pub params: MicroParams,
    pub monte_carlo: MonteCarloSection,
}

impl Serialize for MicroSection {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        let mc = serde_json::to_value(self.monte_carlo).map_err(S::Error::custom)?;
        merged(&self.params, "monte_carlo", mc, s)
    }
}

impl<'de> Deserialize<'de> for MicroSection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (params, mc) = split_off::<MicroParams, D::Error>(Value::deserialize(d)?, "monte_carlo")?;
        let monte_carlo = match mc {
            None => MonteCarloSection::default(),
            Some(v) => serde_json::from_value(v).map_err(D::Error::custom)?,
        };
        Ok(Self { params, monte_carlo })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// `delta0` or `phi`.
    pub variable: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl SweepSpec {
    pub fn grid(&self) -> Vec<f64> {
        linspace(self.from, self.to, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
}

impl SpectrumSpec {
    pub fn grid(&self) -> Vec<f64> {
        linspace(self.omega_min, self.omega_max, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: vec![Format::Csv] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub micro: Option<MicroSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default)]
    pub probes: ProbeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub outputs: OutputSpec,
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect(),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.params.unit_scale;
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Config(format!("unit_scale must be finite and > 0, got {s}")));
        }
        if let Some(sw) = &self.sweep {
            if sw.points < 2 {
                return Err(Error::Config("sweep.points must be >= 2".into()));
            }
            if !(sw.from.is_finite() && sw.to.is_finite()) || sw.to <= sw.from {
                return Err(Error::Config("sweep needs finite from < to".into()));
            }
        }
        if let Some(sp) = &self.spectrum {
            if sp.points < 2 {
                return Err(Error::Config("spectrum.points must be >= 2".into()));
            }
            if !(sp.omega_min.is_finite() && sp.omega_max.is_finite()) || sp.omega_max <= sp.omega_min {
                return Err(Error::Config("spectrum needs finite omega_min < omega_max".into()));
            }
        }
        if self.outputs.formats.is_empty() {
            return Err(Error::Config("outputs.formats must not be empty".into()));
        }
        Ok(())
    }

    /// System parameters in rad/s.
    pub fn system(&self) -> SystemParams {
        self.params.system.scaled(self.params.unit_scale)
    }

    /// Sweep grid in output units, checked against the expected variable.
    pub fn sweep_grid(&self, variable: &str) -> Result<Vec<f64>> {
        let sw = self.sweep.as_ref().ok_or_else(|| Error::Config("a sweep section is required".into()))?;
        if sw.variable != variable {
            return Err(Error::Config(format!("sweep.variable must be \"{variable}\", got \"{}\"", sw.variable)));
        }
        let scale = if variable == "phi" { 1.0 } else { self.params.unit_scale };
        Ok(sw.grid().into_iter().map(|x| x * scale).collect())
    }

    /// Frequency / two-photon detuning grid in rad/s.
    pub fn spectrum_grid(&self) -> Result<Vec<f64>> {
        let sp = self.spectrum.ok_or_else(|| Error::Config("a spectrum section is required".into()))?;
        Ok(sp.grid().into_iter().map(|x| x * self.params.unit_scale).collect())
    }

    /// Compartment parameters in rad/s and Monte Carlo times in seconds.
    pub fn micro_scaled(&self) -> Result<(MicroParams, MonteCarloSection)> {
        let m = self.micro.ok_or_else(|| Error::Config("a micro section is required".into()))?;
        let s = self.params.unit_scale;
        let mc = MonteCarloSection { dt: m.monte_carlo.dt / s, t_total: m.monte_carlo.t_total / s, ..m.monte_carlo };
        Ok((m.params.scaled(s), mc))
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Config("this command is stochastic and needs a seed".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"{
        "params": {"gamma_c": 2.0, "unit_scale": 10.0},
        "micro": {"r_exit": 5.0, "monte_carlo": {"n_atoms": 100, "dt": 0.001, "t_total": 0.1}},
        "sweep": {"variable": "delta0", "from": 0.0, "to": 6.0, "points": 4},
        "spectrum": {"omega_min": -5.0, "omega_max": 5.0, "points": 11},
        "probes": {"e_in_1": [1.0, 0.5], "phi_1": 0.3},
        "seed": 12,
        "outputs": {"directory": "res", "formats": ["csv", "json"]}
    }"#;

    #[test]
    fn parses_and_scales() {
        let c = RunConfig::from_json(FULL).unwrap();
        assert_eq!(c.system().gamma_c, 20.0);
        assert_eq!(c.sweep_grid("delta0").unwrap(), vec![0.0, 20.0, 40.0, 60.0]);
        assert!(c.sweep_grid("phi").is_err());
        let (mp, mc) = c.micro_scaled().unwrap();
        assert_eq!(mp.r_exit, 50.0);
        assert_eq!(mc.dt, 0.0001);
        assert_eq!(c.probes.e_in_1, crate::C64::new(1.0, 0.5));
    }

    #[test]
    fn round_trip_is_identity() {
        let c = RunConfig::from_json(FULL).unwrap();
        let again = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, again);
        let d = RunConfig::from_json("{}").unwrap();
        assert_eq!(RunConfig::from_json(&d.to_json()).unwrap(), d);
    }

    #[test]
    fn unknown_keys_rejected() {
        for bad in [
            r#"{"bogus": 1}"#,
            r#"{"params": {"gama_c": 1}}"#,
            r#"{"micro": {"r_exit": 1, "monte_carlo": {"n_atoms": 1, "dt": 1, "t_total": 1, "x": 0}}}"#,
            r#"{"probes": {"phi": 1}}"#,
            r#"{"outputs": {"formats": ["xml"]}}"#,
        ] {
            assert!(matches!(RunConfig::from_json(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn invariants_enforced() {
        assert!(RunConfig::from_json(r#"{"sweep": {"variable": "delta0", "from": 0, "to": 1, "points": 1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"spectrum": {"omega_min": 1, "omega_max": 0, "points": 5}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"params": {"unit_scale": 0}}"#).is_err());
        assert!(RunConfig::from_json("{}").unwrap().require_seed().is_err());
    }
}
