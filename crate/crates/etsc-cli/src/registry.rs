//! Algorithm registry: resolves a config entry's id and JSON parameters
//! into a ready-to-run trainer. The run seed is threaded into every
//! algorithm that uses randomness, and univariate algorithms transparently
//! become per-variable voting ensembles on multivariate data.

use crate::config::{AlgorithmSpec, ConfigError};
use etsc_algos::{
    train_ecec, train_economy_k, train_edsc, train_ects, train_fixed_prefix, train_teaser,
    AlgoError, EarlyClassifier, EcecParams, EconomyKParams, EctsParams, EdscParams, TeaserParams,
    VotingWrapper,
};
use etsc_core::Dataset;
use etsc_learners::fit_gnb;
use serde::Deserialize;

pub const KNOWN_IDS: &[&str] = &[
    "edsc",
    "ects",
    "teaser",
    "teaser-z",
    "ecec",
    "economy-k",
    "fixed",
    "sleep",
];

type Trainer =
    Box<dyn Fn(&Dataset, u64) -> Result<Box<dyn EarlyClassifier>, AlgoError> + Send + Sync>;

/// A named trainer ready to run on any loaded dataset.
pub struct Algorithm {
    id: String,
    trainer: Trainer,
}

impl std::fmt::Debug for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Algorithm").field("id", &self.id).finish()
    }
}

impl Algorithm {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn train(
        &self,
        d: &Dataset,
        seed: u64,
    ) -> Result<Box<dyn EarlyClassifier>, AlgoError> {
        (self.trainer)(d, seed)
    }
}

/// Trains on univariate data directly; on multivariate data trains one
/// voter per variable and majority-votes their (per-variable) decisions.
fn vote_wrap<F>(d: &Dataset, train: &F) -> Result<Box<dyn EarlyClassifier>, AlgoError>
where
    F: Fn(&Dataset) -> Result<Box<dyn EarlyClassifier>, AlgoError>,
{
    if d.num_variables() <= 1 {
        train(d)
    } else {
        Ok(Box::new(VotingWrapper::train_per_variable(d, train)?))
    }
}

fn parse_params<T>(id: &str, params: &serde_json::Value) -> Result<T, ConfigError>
where
    T: Default + for<'de> Deserialize<'de>,
{
    if params.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(params.clone()).map_err(|e| ConfigError::BadParams {
        id: id.to_string(),
        message: e.to_string(),
    })
}

fn bad_params(id: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::BadParams {
        id: id.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EdscCfg {
    min_len: Option<usize>,
    max_len: Option<usize>,
    k: Option<f64>,
    offset_stride: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EctsCfg {
    support: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TeaserCfg {
    s: Option<usize>,
    znorm: Option<bool>,
    nu: Option<f64>,
    reject_resets: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EcecCfg {
    n: Option<usize>,
    alpha: Option<f64>,
    folds: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EconomyCfg {
    /// Pins the cluster-count grid to a single value.
    k: Option<usize>,
    k_grid: Option<Vec<usize>>,
    lambda: Option<f64>,
    time_cost: Option<f64>,
    /// Explicit misclassification cost matrix, `cost[predicted][truth]`.
    misclass_cost: Option<Vec<Vec<f64>>>,
    /// Uniform off-diagonal misclassification cost; the matrix is built at
    /// training time once the class count is known.
    cost_scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FixedCfg {
    fractions: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SleepCfg {
    seconds: f64,
}

impl Default for SleepCfg {
    fn default() -> Self {
        SleepCfg { seconds: 2.0 }
    }
}

fn uniform_cost_matrix(num_classes: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..num_classes)
        .map(|p| {
            (0..num_classes)
                .map(|t| if p == t { 0.0 } else { scale })
                .collect()
        })
        .collect()
}

/// Builds the trainer for one config entry. Fails on an unknown id or
/// parameters that do not fit the algorithm.
pub fn build_algorithm(spec: &AlgorithmSpec) -> Result<Algorithm, ConfigError> {
    let id = spec.id.as_str();
    let trainer: Trainer = match id {
        "edsc" => {
            let cfg: EdscCfg = parse_params(id, &spec.params)?;
            let mut p = EdscParams::default();
            if let Some(v) = cfg.min_len {
                p.min_len = v;
            }
            if cfg.max_len.is_some() {
                p.max_len = cfg.max_len;
            }
            if let Some(v) = cfg.k {
                p.k = v;
            }
            if let Some(v) = cfg.offset_stride {
                p.offset_stride = v;
            }
            Box::new(move |d, _seed| {
                vote_wrap(d, &|vd| Ok(Box::new(train_edsc(vd, &p)?) as Box<dyn EarlyClassifier>))
            })
        }
        "ects" => {
            let cfg: EctsCfg = parse_params(id, &spec.params)?;
            let mut p = EctsParams::default();
            if let Some(v) = cfg.support {
                p.support = v;
            }
            Box::new(move |d, _seed| {
                vote_wrap(d, &|vd| Ok(Box::new(train_ects(vd, &p)?) as Box<dyn EarlyClassifier>))
            })
        }
        "teaser" | "teaser-z" => {
            let cfg: TeaserCfg = parse_params(id, &spec.params)?;
            let mut p = TeaserParams::default();
            p.znorm = id == "teaser-z";
            if let Some(v) = cfg.s {
                p.s = v;
            }
            if let Some(v) = cfg.znorm {
                p.znorm = v;
            }
            if let Some(v) = cfg.nu {
                p.nu = v;
            }
            if let Some(v) = cfg.reject_resets {
                p.reject_resets = v;
            }
            Box::new(move |d, _seed| {
                vote_wrap(d, &|vd| {
                    Ok(Box::new(train_teaser(vd, &p)?) as Box<dyn EarlyClassifier>)
                })
            })
        }
        "ecec" => {
            let cfg: EcecCfg = parse_params(id, &spec.params)?;
            let mut base = EcecParams::default();
            if let Some(v) = cfg.n {
                base.n = v;
            }
            if let Some(v) = cfg.alpha {
                base.alpha = v;
            }
            if let Some(v) = cfg.folds {
                base.folds = v;
            }
            Box::new(move |d, seed| {
                let mut p = base.clone();
                p.seed = seed;
                vote_wrap(d, &|vd| Ok(Box::new(train_ecec(vd, &p)?) as Box<dyn EarlyClassifier>))
            })
        }
        "economy-k" => {
            let cfg: EconomyCfg = parse_params(id, &spec.params)?;
            if cfg.k.is_some() && cfg.k_grid.is_some() {
                return Err(bad_params(id, "give either k or k_grid, not both"));
            }
            if cfg.misclass_cost.is_some() && cfg.cost_scale.is_some() {
                return Err(bad_params(
                    id,
                    "give either misclass_cost or cost_scale, not both",
                ));
            }
            let mut base = EconomyKParams::default();
            if let Some(k) = cfg.k {
                base.k_grid = vec![k];
            } else if let Some(grid) = cfg.k_grid {
                base.k_grid = grid;
            }
            if let Some(v) = cfg.lambda {
                base.lambda = v;
            }
            if let Some(v) = cfg.time_cost {
                base.time_cost = v;
            }
            base.misclass_cost = cfg.misclass_cost;
            let cost_scale = cfg.cost_scale;
            Box::new(move |d, seed| {
                let mut p = base.clone();
                p.seed = seed;
                if let Some(scale) = cost_scale {
                    p.misclass_cost = Some(uniform_cost_matrix(d.num_classes(), scale));
                }
                vote_wrap(d, &|vd| {
                    Ok(Box::new(train_economy_k(vd, &p)?) as Box<dyn EarlyClassifier>)
                })
            })
        }
        "fixed" => {
            let cfg: FixedCfg = parse_params(id, &spec.params)?;
            let fractions = cfg.fractions.unwrap_or_else(|| vec![0.4, 0.5, 0.6]);
            if fractions.is_empty() {
                return Err(bad_params(id, "fractions must not be empty"));
            }
            Box::new(move |d, seed| {
                let m = train_fixed_prefix(d, &fractions, seed, &|xs, ys, c| fit_gnb(xs, ys, c))?;
                Ok(Box::new(m) as Box<dyn EarlyClassifier>)
            })
        }
        // Harness self-test trainer: stalls for a configurable time, then
        // behaves like the fixed-prefix baseline. Exists to exercise the
        // per-job timeout path.
        "sleep" => {
            let cfg: SleepCfg = parse_params(id, &spec.params)?;
            if !(cfg.seconds >= 0.0 && cfg.seconds.is_finite()) {
                return Err(bad_params(id, "seconds must be finite and non-negative"));
            }
            Box::new(move |d, seed| {
                std::thread::sleep(std::time::Duration::from_secs_f64(cfg.seconds));
                let m = train_fixed_prefix(d, &[0.4, 0.5, 0.6], seed, &|xs, ys, c| {
                    fit_gnb(xs, ys, c)
                })?;
                Ok(Box::new(m) as Box<dyn EarlyClassifier>)
            })
        }
        _ => {
            return Err(ConfigError::UnknownAlgorithm {
                id: id.to_string(),
                known: KNOWN_IDS.join(", "),
            })
        }
    };
    Ok(Algorithm {
        id: id.to_string(),
        trainer,
    })
}
