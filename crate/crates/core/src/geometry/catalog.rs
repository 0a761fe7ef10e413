use serde::{Deserialize, Serialize};

use super::factor::{ConformalFactor, NormalTerm};
use super::profile::{Bump, Profile, MAX_BASE_DIM};
use crate::error::config;
use crate::Result;

/// Identifiers accepted by [`ScenarioSpec::build`].
pub const CATALOG_IDS: [&str; 5] = ["flat", "bump-cubic", "quartic", "exp-cubic", "graded-cubic"];

const DEFAULT_CENTER: [f64; MAX_BASE_DIM] = [0.2, -0.1, 0.05];
const DEFAULT_BACKGROUND_CENTER: [f64; MAX_BASE_DIM] = [-0.15, 0.1, -0.05];
const DEFAULT_RATE: [f64; MAX_BASE_DIM] = [0.3, -0.2, 0.1];

/// Extra `x_n^power * amplitude * bump(x')` layer added on top of a catalog
/// entry. Comparison runs use it to build factors that agree up to a given
/// normal order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub power: u32,
    pub amplitude: f64,
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(default = "default_bump_power")]
    pub bump_power: u32,
    /// Multiply the layer by the background profile of the scenario.
    #[serde(default = "default_true")]
    pub scaled_by_background: bool,
}

fn default_bump_power() -> u32 {
    8
}

fn default_true() -> bool {
    true
}

/// Catalog entry plus parameters, as written in experiment configs.
///
/// | id | factor |
/// |---|---|
/// | `flat` | `level` |
/// | `bump-cubic` | `1 + alpha x_n^3 rho(x')` |
/// | `quartic` | `beta(x') (1 + gamma x_n^4 sigma(x'))` |
/// | `exp-cubic` | `exp(rate . x') (1 + alpha x_n^3 rho(x'))` |
/// | `graded-cubic` | `beta(x') (1 + alpha x_n^3 rho(x'))` |
///
/// Here `rho`, `sigma` are polynomial bumps with `center`, `radius`, `power`
/// and `beta = 1 + kappa * bump(background_center, background_radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: String,
    /// Ambient dimension `n`, the base domain has dimension `n - 1`.
    pub dim: usize,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub level: Option<f64>,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub power: Option<u32>,
    pub background_center: Option<Vec<f64>>,
    pub background_radius: Option<f64>,
    pub rate: Option<Vec<f64>>,
    pub extra_layers: Vec<LayerSpec>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            id: "bump-cubic".into(),
            dim: 3,
            alpha: None,
            gamma: None,
            kappa: None,
            level: None,
            center: None,
            radius: None,
            power: None,
            background_center: None,
            background_radius: None,
            rate: None,
            extra_layers: Vec::new(),
        }
    }
}

impl ScenarioSpec {
    pub fn new(id: &str, dim: usize) -> Self {
        ScenarioSpec {
            id: id.to_string(),
            dim,
            ..Default::default()
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_layer(mut self, layer: LayerSpec) -> Self {
        self.extra_layers.push(layer);
        self
    }

    /// Sets a parameter from a `key=value` string, as given on the command line.
    pub fn set_param(&mut self, assignment: &str) -> Result<()> {
        let Some((key, value)) = assignment.split_once('=') else {
            return config(format!("parameter `{assignment}` is not of the form key=value"));
        };
        let key = key.trim();
        let value = value.trim();
        let scalar = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| crate::Error::Config(format!("parameter `{key}` expects a number, got `{value}`")))
        };
        let vector = || -> Result<Vec<f64>> {
            value
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| crate::Error::Config(format!("parameter `{key}` expects numbers, got `{value}`")))
                })
                .collect()
        };
        match key {
            "alpha" => self.alpha = Some(scalar()?),
            "gamma" => self.gamma = Some(scalar()?),
            "kappa" => self.kappa = Some(scalar()?),
            "level" => self.level = Some(scalar()?),
            "radius" => self.radius = Some(scalar()?),
            "background_radius" => self.background_radius = Some(scalar()?),
            "power" => {
                self.power = Some(
                    value
                        .parse()
                        .map_err(|_| crate::Error::Config(format!("parameter `power` expects an integer, got `{value}`")))?,
                )
            }
            "center" => self.center = Some(vector()?),
            "background_center" => self.background_center = Some(vector()?),
            "rate" => self.rate = Some(vector()?),
            other => return config(format!("unknown scenario parameter `{other}`")),
        }
        Ok(())
    }

    fn base_dim(&self) -> usize {
        self.dim - 1
    }

    fn vec_or(&self, v: &Option<Vec<f64>>, default: &[f64; MAX_BASE_DIM], name: &str) -> Result<Vec<f64>> {
        let d = self.base_dim();
        match v {
            Some(v) if v.len() == d => Ok(v.clone()),
            Some(v) => config(format!("`{name}` has {} components, expected {d}", v.len())),
            None => Ok(default[..d].to_vec()),
        }
    }

    /// `rho`, the normal-layer bump.
    pub fn layer_bump(&self) -> Result<Bump> {
        let center = self.vec_or(&self.center, &DEFAULT_CENTER, "center")?;
        Bump::new(&center, self.radius.unwrap_or(0.7), self.power.unwrap_or(8), 1.0)
    }

    fn background(&self) -> Result<Profile> {
        let bump = Bump::new(
            &self.vec_or(&self.background_center, &DEFAULT_BACKGROUND_CENTER, "background_center")?,
            self.background_radius.unwrap_or(0.8),
            8,
            self.kappa.unwrap_or(0.5),
        )?;
        Ok(Profile::Sum {
            terms: vec![Profile::constant(1.0), Profile::Bump(bump)],
        })
    }

    /// Builds the conformal factor.
    pub fn build(&self) -> Result<ConformalFactor> {
        if !(3..=MAX_BASE_DIM + 1).contains(&self.dim) {
            return config(format!("scenario dimension must be 3 or 4, got {}", self.dim));
        }
        let n = self.dim;
        let layer = |power: u32, coef: f64, bg: &Profile| -> Result<NormalTerm> {
            let rho = Profile::Bump(self.layer_bump()?);
            let scaled = Profile::Product {
                factors: vec![Profile::constant(coef), bg.clone(), rho],
            };
            Ok(NormalTerm { power, profile: scaled })
        };
        let (background, mut terms) = match self.id.as_str() {
            "flat" => {
                let bg = Profile::constant(self.level.unwrap_or(1.0));
                (bg.clone(), vec![NormalTerm { power: 0, profile: bg }])
            }
            "bump-cubic" => {
                let bg = Profile::constant(1.0);
                let t = layer(3, self.alpha.unwrap_or(1.0), &bg)?;
                (bg.clone(), vec![NormalTerm { power: 0, profile: bg }, t])
            }
            "quartic" => {
                let bg = self.background()?;
                let t = layer(4, self.gamma.unwrap_or(1.0), &bg)?;
                (bg.clone(), vec![NormalTerm { power: 0, profile: bg }, t])
            }
            "exp-cubic" => {
                let rate = self.vec_or(&self.rate, &DEFAULT_RATE, "rate")?;
                let bg = Profile::exponential(1.0, &rate);
                let t = layer(3, self.alpha.unwrap_or(1.0), &bg)?;
                (bg.clone(), vec![NormalTerm { power: 0, profile: bg }, t])
            }
            "graded-cubic" => {
                let bg = self.background()?;
                let t = layer(3, self.alpha.unwrap_or(1.0), &bg)?;
                (bg.clone(), vec![NormalTerm { power: 0, profile: bg }, t])
            }
            other => {
                return config(format!(
                    "unknown scenario `{other}`; available: {}",
                    CATALOG_IDS.join(", ")
                ))
            }
        };
        for l in &self.extra_layers {
            if l.power < 3 {
                return config("extra layers must have normal power >= 3 to keep the factor admissible");
            }
            let mut factors = vec![Profile::Bump(Bump::new(&l.center, l.radius, l.bump_power, l.amplitude)?)];
            if l.center.len() != self.base_dim() {
                return config("extra layer centre has the wrong dimension");
            }
            if l.scaled_by_background {
                factors.push(background.clone());
            }
            terms.push(NormalTerm {
                power: l.power,
                profile: Profile::Product { factors },
            });
        }
        let label = if self.extra_layers.is_empty() {
            self.id.clone()
        } else {
            format!("{}+layers", self.id)
        };
        ConformalFactor::new(n, terms, label)
    }
}

/// Default spec for every catalog entry in ambient dimension `dim`.
pub fn catalog(dim: usize) -> Vec<ScenarioSpec> {
    CATALOG_IDS.iter().map(|id| ScenarioSpec::new(id, dim)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn every_catalog_entry_builds_and_is_admissible() {
        for dim in [3, 4] {
            for spec in catalog(dim) {
                let c = spec.build().unwrap();
                let d = dim - 1;
                let pts: Vec<Vec<f64>> = (0..50)
                    .map(|k| {
                        let mut x = vec![0.0; dim];
                        for i in 0..d {
                            x[i] = ((k * (i + 3)) % 17) as f64 / 8.5 - 1.0;
                        }
                        x
                    })
                    .collect();
                let adm = c.admissibility(pts.iter().map(|p| p.as_slice()), 3, 1e4);
                assert!(adm.admissible, "{}: {adm:?}", spec.id);
            }
        }
    }

    #[test]
    fn bump_cubic_third_normal_derivative() {
        let spec = ScenarioSpec::new("bump-cubic", 3).with_alpha(2.0);
        let c = spec.build().unwrap();
        let rho = spec.layer_bump().unwrap();
        let xp = [0.1, 0.2];
        let d3 = c.derivative(&[xp[0], xp[1], 0.0], &[0, 0, 3]);
        assert_relative_eq!(d3, 12.0 * rho.derivative(&xp, &[0, 0, 0]), max_relative = 1e-14);
    }

    #[test]
    fn params_parse_from_assignments() {
        let mut s = ScenarioSpec::new("quartic", 3);
        s.set_param("gamma=2.5").unwrap();
        s.set_param("center=0.1,0.2").unwrap();
        assert_eq!(s.gamma, Some(2.5));
        assert_eq!(s.center, Some(vec![0.1, 0.2]));
        assert!(s.set_param("nonsense=1").is_err());
        assert!(s.set_param("alpha").is_err());
        s.set_param("center=0.1,0.2,0.3").unwrap();
        assert!(s.build().is_err());
    }

    #[test]
    fn unknown_id_is_a_config_error() {
        assert!(matches!(
            ScenarioSpec::new("mystery", 3).build(),
            Err(crate::Error::Config(_))
        ));
    }

    #[test]
    fn low_power_layer_is_rejected() {
        let s = ScenarioSpec::new("flat", 3).with_layer(LayerSpec {
            power: 2,
            amplitude: 1.0,
            center: vec![0.0, 0.0],
            radius: 0.5,
            bump_power: 8,
            scaled_by_background: true,
        });
        assert!(s.build().is_err());
    }
}
