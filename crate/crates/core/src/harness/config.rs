use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::adversaries::AdversaryKind;
use crate::algorithms::{tune_eta, Algorithm, BoundMode, BoundSpec, Regime};
use crate::error::{invalid, Error, Result};

/// Length of a game: a fixed number of trials, or a comparator loss
/// budget. Stochastic adversaries turn a budget into the horizon whose
/// expected comparator loss matches it; the adaptive adversary plays one
/// faulty-expert round per unit of budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GameMode {
    Horizon(usize),
    Budget(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EtaChoice {
    Explicit(f64),
    Auto,
    Sweep(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossMode {
    /// Charge the mixture's expected loss.
    Expected,
    /// Sample a subspace (or m-set) from the mixture each trial and charge
    /// its loss.
    Sampled,
}

/// How the learner sees the instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// Vector learner on the loss vectors directly.
    Vector,
    /// Matrix learner on `Q diag(loss) Qᵀ` for a seeded random rotation
    /// `Q`.
    Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameConfig {
    pub n: usize,
    pub k: usize,
    pub mode: GameMode,
    /// `None` infers the regime from the adversary.
    pub regime: Option<Regime>,
    pub algorithm: Algorithm,
    pub adversary: AdversaryKind,
    pub eta: EtaChoice,
    pub seeds: Vec<u64>,
    pub loss_mode: LossMode,
    pub representation: Representation,
}

impl GameConfig {
    /// Defaults: auto learning rate, seed 1, expected loss, vector learner.
    pub fn new(n: usize, k: usize, mode: GameMode, algorithm: Algorithm, adversary: AdversaryKind) -> Self {
        Self {
            n,
            k,
            mode,
            regime: None,
            algorithm,
            adversary,
            eta: EtaChoice::Auto,
            seeds: vec![1],
            loss_mode: LossMode::Expected,
            representation: Representation::Vector,
        }
    }

    pub fn m(&self) -> usize {
        self.n - self.k
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.k >= self.n {
            return invalid(format!("need 1 <= k < n, got n = {}, k = {}", self.n, self.k));
        }
        match self.mode {
            GameMode::Horizon(0) => return invalid("horizon must be at least 1"),
            GameMode::Budget(b) if !(b >= 0.0) || !b.is_finite() => {
                return invalid(format!("budget {b} must be finite and >= 0"))
            }
            _ => {}
        }
        if self.seeds.is_empty() {
            return invalid("at least one seed is required");
        }
        if self.adversary == AdversaryKind::GdKiller {
            if !matches!(self.mode, GameMode::Budget(_)) {
                return invalid("the gd-killer adversary is budget-driven; give a budget, not a horizon");
            }
            if 2 * self.k > self.n {
                return invalid("the gd-killer adversary needs k <= n/2");
            }
        }
        if self.adversary == AdversaryKind::SparseFirst2k && 2 * self.k > self.n {
            return invalid("the first2k adversary needs 2k <= n");
        }
        if let EtaChoice::Explicit(e) = self.eta {
            if !(e > 0.0) || !e.is_finite() {
                return invalid(format!("learning rate {e} must be positive"));
            }
        }
        if let EtaChoice::Sweep(list) = &self.eta {
            if list.is_empty() || list.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
                return invalid("learning-rate sweep needs positive values");
            }
        }
        self.effective_regime().map(|_| ())
    }

    /// The configured regime, checked against what the adversary emits.
    pub fn effective_regime(&self) -> Result<Regime> {
        let natural = match self.adversary {
            AdversaryKind::DenseBernoulli => Some(Regime::Dense),
            AdversaryKind::Zero => None,
            _ => Some(Regime::Sparse),
        };
        match (self.regime, natural) {
            (Some(r), Some(nat)) if r != nat => {
                invalid(format!("adversary {} emits {nat} instances, regime is {r}", self.adversary))
            }
            (Some(r), _) => Ok(r),
            (None, Some(nat)) => Ok(nat),
            (None, None) => Ok(Regime::Sparse),
        }
    }

    /// Number of trials a stochastic adversary plays. `None` for the
    /// adaptive adversary, which ends its own sequence.
    pub fn horizon(&self) -> Result<Option<usize>> {
        if self.adversary == AdversaryKind::GdKiller {
            return Ok(None);
        }
        let (n, m) = (self.n as f64, self.m() as f64);
        Ok(Some(match self.mode {
            GameMode::Horizon(t) => t,
            GameMode::Budget(b) => {
                let t = match self.effective_regime()? {
                    Regime::Sparse => (n * b / m).floor(),
                    Regime::Dense => (b / m).floor(),
                };
                if t < 1.0 {
                    return invalid(format!("budget {b} gives an empty game"));
                }
                t as usize
            }
        }))
    }

    /// Budget rounds of the adaptive adversary.
    pub fn killer_rounds(&self) -> usize {
        match self.mode {
            GameMode::Budget(b) => b.floor() as usize,
            GameMode::Horizon(_) => 0,
        }
    }

    /// The bound specification matching this game: horizon games use the
    /// horizon form, budget games the budget form.
    pub fn bound_spec(&self) -> Result<BoundSpec> {
        let mode = match (self.mode, self.adversary) {
            (GameMode::Budget(b), AdversaryKind::GdKiller) => BoundMode::Budget(b.floor()),
            (GameMode::Budget(b), _) => BoundMode::Budget(b),
            (GameMode::Horizon(t), _) => BoundMode::Horizon(t as f64),
        };
        Ok(BoundSpec { algorithm: self.algorithm, regime: self.effective_regime()?, mode, n: self.n, k: self.k })
    }

    /// The learning rates this configuration runs with.
    pub fn etas(&self) -> Result<Vec<f64>> {
        match &self.eta {
            EtaChoice::Explicit(e) => Ok(vec![*e]),
            EtaChoice::Auto => Ok(vec![tune_eta(&self.bound_spec()?)?]),
            EtaChoice::Sweep(list) => Ok(list.clone()),
        }
    }

    /// Builds a configuration from `key = value` pairs. Keys are the long
    /// command-line flag names without dashes.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let known = [
            "n",
            "k",
            "horizon",
            "budget",
            "regime",
            "algorithm",
            "adversary",
            "eta",
            "eta-sweep",
            "seeds",
            "loss-mode",
            "representation",
            "out",
        ];
        if let Some(bad) = pairs.keys().find(|k| !known.contains(&k.as_str())) {
            return invalid(format!("unknown configuration key '{bad}'"));
        }
        let get = |key: &str| pairs.get(key).map(String::as_str);
        let require = |key: &str| get(key).ok_or_else(|| Error::InvalidArgument(format!("missing '{key}'")));
        let n = parse(require("n")?, "n")?;
        let k = parse(require("k")?, "k")?;
        let mode = match (get("horizon"), get("budget")) {
            (Some(t), None) => GameMode::Horizon(parse(t, "horizon")?),
            (None, Some(b)) => GameMode::Budget(parse(b, "budget")?),
            (Some(_), Some(_)) => return invalid("give either a horizon or a budget, not both"),
            (None, None) => return invalid("missing 'horizon' or 'budget'"),
        };
        let algorithm = get("algorithm").unwrap_or("loss-meg").parse()?;
        let adversary = require("adversary")?.parse()?;
        let mut config = GameConfig::new(n, k, mode, algorithm, adversary);
        config.regime = get("regime").map(str::parse).transpose()?;
        config.eta = match (get("eta"), get("eta-sweep")) {
            (Some(_), Some(_)) => return invalid("give either 'eta' or 'eta-sweep', not both"),
            (None, Some(list)) => EtaChoice::Sweep(parse_list(list, "eta-sweep")?),
            (Some("auto") | None, None) => EtaChoice::Auto,
            (Some(v), None) => EtaChoice::Explicit(parse(v, "eta")?),
        };
        if let Some(s) = get("seeds") {
            config.seeds = parse_seeds(s)?;
        }
        if let Some(l) = get("loss-mode") {
            config.loss_mode = l.parse()?;
        }
        if let Some(r) = get("representation") {
            config.representation = r.parse()?;
        }
        config.validate()?;
        Ok(config)
    }
}

fn parse<T: FromStr>(value: &str, key: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("cannot parse '{value}' for '{key}'")))
}

/// Comma-separated list of numbers.
pub fn parse_list<T: FromStr>(value: &str, key: &str) -> Result<Vec<T>> {
    value.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(s, key)).collect()
}

/// Seeds as `a..b` (inclusive) or a comma-separated list.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = value.split_once("..") {
        let (a, b): (u64, u64) = (parse(a, "seeds")?, parse(b, "seeds")?);
        if b < a {
            return invalid(format!("empty seed range {value}"));
        }
        return Ok((a..=b).collect());
    }
    let seeds = parse_list(value, "seeds")?;
    if seeds.is_empty() {
        return invalid("empty seed list");
    }
    Ok(seeds)
}

/// Parses a flat `key = value` file. Blank lines and lines starting with
/// `#` are ignored.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return invalid(format!("line {}: expected 'key = value'", lineno + 1));
        };
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

impl FromStr for LossMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expected" => Ok(LossMode::Expected),
            "sampled" => Ok(LossMode::Sampled),
            other => invalid(format!("unknown loss mode '{other}'")),
        }
    }
}

impl fmt::Display for LossMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossMode::Expected => "expected",
            LossMode::Sampled => "sampled",
        })
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vector" => Ok(Representation::Vector),
            "matrix" => Ok(Representation::Matrix),
            other => invalid(format!("unknown representation '{other}'")),
        }
    }
}
