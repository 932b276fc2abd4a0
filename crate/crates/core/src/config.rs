//! Hyperparameters for both trainers and the flat `key = value` config format.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{HebbError, Result};

/// What happens when a frozen row wins the argmax during unsupervised training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrozenWinnerPolicy {
    /// Frozen rows compete; if one wins, the sample causes no update.
    SkipUpdate,
    /// Only unfrozen rows compete for the sample.
    ExcludeFromArgmax,
}

impl FromStr for FrozenWinnerPolicy {
    type Err = HebbError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skip_update" | "skip-update" => Ok(Self::SkipUpdate),
            "exclude_from_argmax" | "exclude-from-argmax" => Ok(Self::ExcludeFromArgmax),
            other => Err(HebbError::config(
                "frozen_winner_policy",
                format!("unknown policy `{other}` (skip_update | exclude_from_argmax)"),
            )),
        }
    }
}

impl fmt::Display for FrozenWinnerPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SkipUpdate => "skip_update",
            Self::ExcludeFromArgmax => "exclude_from_argmax",
        })
    }
}

/// How supervised prediction turns activations into per-class scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceScore {
    /// Sum of raw `W x` over each class group.
    Raw,
    /// Sum over each class group after keeping the `k` largest activations.
    Kwta(usize),
    /// Like `Kwta`, but each activation is first divided by its row's L2
    /// norm, so rows with more total mass do not dominate.
    Cosine(usize),
}

impl FromStr for InferenceScore {
    type Err = HebbError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            HebbError::config(
                "inference",
                format!("unknown score `{s}` (raw | kwta:<k> | cosine:<k>)"),
            )
        };
        let s = s.trim();
        if s == "raw" {
            return Ok(Self::Raw);
        }
        let (kind, k) = s.split_once(':').ok_or_else(bad)?;
        let k: usize = k.trim().parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(HebbError::config("inference", "k must be at least 1"));
        }
        match kind.trim() {
            "kwta" => Ok(Self::Kwta(k)),
            "cosine" => Ok(Self::Cosine(k)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for InferenceScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Raw => f.write_str("raw"),
            Self::Kwta(k) => write!(f, "kwta:{k}"),
            Self::Cosine(k) => write!(f, "cosine:{k}"),
        }
    }
}

/// The four switchable ingredients: (H)ebbian updates, (F)reezing,
/// (E)xpansion and (K)-winners encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ablation {
    pub hebbian: bool,
    pub freezing: bool,
    pub expansion: bool,
    pub kwta: bool,
}

impl Default for Ablation {
    fn default() -> Self {
        Self::FULL
    }
}

impl Ablation {
    pub const FULL: Ablation = Ablation {
        hebbian: true,
        freezing: true,
        expansion: true,
        kwta: true,
    };

    pub const NONE: Ablation = Ablation {
        hebbian: false,
        freezing: false,
        expansion: false,
        kwta: false,
    };

    /// The five variants of the ablation table, in table order.
    pub const TABLE: [Ablation; 5] = [
        Ablation::FULL,
        Ablation { hebbian: true, freezing: true, expansion: false, kwta: true },
        Ablation { hebbian: true, freezing: false, expansion: false, kwta: true },
        Ablation { hebbian: true, freezing: true, expansion: true, kwta: false },
        Ablation { hebbian: true, freezing: false, expansion: false, kwta: false },
    ];

    /// Short tag such as `HFEK` or `H--K`.
    pub fn tag(&self) -> String {
        [
            (self.hebbian, 'H'),
            (self.freezing, 'F'),
            (self.expansion, 'E'),
            (self.kwta, 'K'),
        ]
        .iter()
        .map(|(on, c)| if *on { *c } else { '-' })
        .collect()
    }

    /// Parses `no-freeze,no-expand` style lists (applied to [`Ablation::FULL`])
    /// or a tag such as `HF-K`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() == 4 && s.chars().all(|c| "HFEK-".contains(c)) {
            let c: Vec<char> = s.chars().collect();
            if (c[0] == 'H' || c[0] == '-')
                && (c[1] == 'F' || c[1] == '-')
                && (c[2] == 'E' || c[2] == '-')
                && (c[3] == 'K' || c[3] == '-')
            {
                return Ok(Ablation {
                    hebbian: c[0] == 'H',
                    freezing: c[1] == 'F',
                    expansion: c[2] == 'E',
                    kwta: c[3] == 'K',
                });
            }
        }
        let mut a = Ablation::FULL;
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match item {
                "no-hebbian" | "no-hebb" => a.hebbian = false,
                "no-freeze" | "no-freezing" => a.freezing = false,
                "no-expand" | "no-expansion" => a.expansion = false,
                "no-kwta" | "no-k" => a.kwta = false,
                "all" | "full" => a = Ablation::FULL,
                other => {
                    return Err(HebbError::config(
                        "ablation",
                        format!("unknown switch `{other}` (no-hebbian, no-freeze, no-expand, no-kwta)"),
                    ))
                }
            }
        }
        Ok(a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Learning rate of the winner update.
    pub epsilon: f32,
    /// Freeze threshold on the normalized squared distance.
    pub threshold: f32,
    pub k_winners: usize,
    pub batch_size: usize,
    /// Passes over each class (supervised only).
    pub epochs: usize,
    /// Neurons added per class (supervised only).
    pub neurons_per_class: usize,
    pub initial_neurons: usize,
    pub max_neurons: usize,
    pub init_scale: f32,
    pub seed: u64,
    pub ablation: Ablation,
    pub frozen_winner_policy: FrozenWinnerPolicy,
    /// Supervised class scoring.
    pub inference: InferenceScore,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::unsupervised_mnist()
    }
}

impl TrainConfig {
    /// Unsupervised defaults sized for 28x28 inputs.
    pub fn unsupervised_mnist() -> Self {
        TrainConfig {
            epsilon: 0.3,
            threshold: 0.4,
            k_winners: 50,
            batch_size: 64,
            epochs: 3,
            neurons_per_class: 64,
            initial_neurons: 500,
            max_neurons: 2000,
            init_scale: 0.01,
            seed: 0,
            ablation: Ablation::FULL,
            frozen_winner_policy: FrozenWinnerPolicy::ExcludeFromArgmax,
            inference: InferenceScore::Raw,
        }
    }

    pub fn unsupervised_omniglot() -> Self {
        TrainConfig {
            initial_neurons: 1000,
            max_neurons: 4000,
            k_winners: 50,
            ..Self::unsupervised_mnist()
        }
    }

    /// Supervised defaults: 64 neurons per class over ten classes, scored by
    /// the best cosine match.
    pub fn supervised_mnist() -> Self {
        TrainConfig {
            epsilon: 0.05,
            epochs: 3,
            neurons_per_class: 64,
            initial_neurons: 64,
            max_neurons: 64 * 11,
            init_scale: 1.0,
            inference: InferenceScore::Cosine(1),
            ..Self::unsupervised_mnist()
        }
    }

    pub fn supervised_cifar10() -> Self {
        TrainConfig {
            neurons_per_class: 200,
            initial_neurons: 200,
            max_neurons: 200 * 11,
            ..Self::supervised_mnist()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos_f = |name: &str, v: f32| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(HebbError::config(name, format!("must be a positive number, got {v}")))
            }
        };
        let pos_u = |name: &str, v: usize| {
            if v > 0 {
                Ok(())
            } else {
                Err(HebbError::config(name, "must be a positive integer"))
            }
        };
        pos_f("epsilon", self.epsilon)?;
        pos_f("threshold", self.threshold)?;
        pos_f("init_scale", self.init_scale)?;
        pos_u("k_winners", self.k_winners)?;
        pos_u("batch_size", self.batch_size)?;
        pos_u("epochs", self.epochs)?;
        pos_u("neurons_per_class", self.neurons_per_class)?;
        pos_u("initial_neurons", self.initial_neurons)?;
        pos_u("max_neurons", self.max_neurons)?;
        if self.max_neurons < self.initial_neurons {
            return Err(HebbError::config(
                "max_neurons",
                format!(
                    "cap {} is below initial_neurons {}",
                    self.max_neurons, self.initial_neurons
                ),
            ));
        }
        Ok(())
    }

    /// Sets one field from its textual form. Keys match the field names;
    /// a few short aliases used by the CLI are accepted too.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| HebbError::config(key, format!("cannot parse `{value}`")))
        }
        fn flag(key: &str, value: &str) -> Result<bool> {
            match value.trim() {
                "true" | "1" | "yes" | "on" => Ok(true),
                "false" | "0" | "no" | "off" => Ok(false),
                _ => Err(HebbError::config(key, format!("expected a boolean, got `{value}`"))),
            }
        }
        match key.trim() {
            "epsilon" | "eps" => self.epsilon = num(key, value)?,
            "threshold" | "t" => self.threshold = num(key, value)?,
            "k_winners" | "k" => self.k_winners = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "neurons_per_class" => self.neurons_per_class = num(key, value)?,
            "initial_neurons" | "neurons" => self.initial_neurons = num(key, value)?,
            "max_neurons" => self.max_neurons = num(key, value)?,
            "init_scale" => self.init_scale = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "ablation" => self.ablation = Ablation::parse(value)?,
            "ablation.hebbian" => self.ablation.hebbian = flag(key, value)?,
            "ablation.freezing" => self.ablation.freezing = flag(key, value)?,
            "ablation.expansion" => self.ablation.expansion = flag(key, value)?,
            "ablation.kwta" => self.ablation.kwta = flag(key, value)?,
            "frozen_winner_policy" => self.frozen_winner_policy = value.trim().parse()?,
            "inference" => self.inference = value.parse()?,
            other => return Err(HebbError::config(other, "unknown key")),
        }
        Ok(())
    }

    /// Applies a `key = value` document on top of `self`. Blank lines and
    /// `#` comments are ignored. Errors name the line and key.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                HebbError::config(format!("line {}", lineno + 1), "expected `key = value`")
            })?;
            self.set(k.trim(), v.trim()).map_err(|e| match e {
                HebbError::Config { field, message } => {
                    HebbError::config(format!("line {}: {field}", lineno + 1), message)
                }
                e => e,
            })?;
        }
        Ok(())
    }

    /// Applies comma-separated `key=value` overrides, e.g. `eps=0.1,k=50`.
    pub fn apply_overrides(&mut self, overrides: &str) -> Result<()> {
        for kv in overrides.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| HebbError::config(kv, "expected `key=value`"))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_kv_file<P: AsRef<Path>>(&mut self, path: P) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_kv(&text)
    }

    /// Renders every field in the `key = value` format; feeding the output
    /// back through [`TrainConfig::apply_kv`] reproduces `self`.
    pub fn to_kv(&self) -> String {
        let a = &self.ablation;
        format!(
            "epsilon = {}\nthreshold = {}\nk_winners = {}\nbatch_size = {}\nepochs = {}\n\
             neurons_per_class = {}\ninitial_neurons = {}\nmax_neurons = {}\ninit_scale = {}\n\
             seed = {}\nablation.hebbian = {}\nablation.freezing = {}\nablation.expansion = {}\n\
             ablation.kwta = {}\nfrozen_winner_policy = {}\ninference = {}\n",
            self.epsilon,
            self.threshold,
            self.k_winners,
            self.batch_size,
            self.epochs,
            self.neurons_per_class,
            self.initial_neurons,
            self.max_neurons,
            self.init_scale,
            self.seed,
            a.hebbian,
            a.freezing,
            a.expansion,
            a.kwta,
            self.frozen_winner_policy,
            self.inference,
        )
    }
}

/// Fixed offsets that derive per-purpose seeds from one root seed.
pub mod seeds {
    pub const NETWORK: u64 = 0;
    pub const STREAM: u64 = 1;
    pub const KMEANS: u64 = 2;
    pub const EXPANSION: u64 = 3;

    pub fn derive(root: u64, offset: u64) -> u64 {
        root.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(offset)
    }
}
