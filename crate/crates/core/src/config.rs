//! Experiment configuration files.
//!
//! Same line-oriented syntax family as network files: statements end at
//! newlines or `;`, `#` starts a comment. Statements:
//!
//! ```text
//! network <path>                  # network file, relative to this config
//! source <label>
//! sinks <label> [<label> ...]
//! field 2^8                       # or a literal size: 2, 16, 256, 65536
//! messages <K> <rho>
//! mode fixed <delta>
//! mode rateless [<cap_factor>]
//! trials <n>
//! seed <n>
//! rate <R>                        # exponent target rate
//! memory compact|raw
//! jobs <N> [<N> ...]              # fluid job-count grid, increasing
//! horizon <tau>                   # fluid scaled horizon
//! traffic <arc#|*> <injection> [loss <model>]
//! ```
//!
//! Injections: `poisson <rate>`, `det <rate>`, `renewal exp <rate>`,
//! `renewal uniform <lo> <hi>`, `renewal const <gap>`. Loss models: `none`,
//! `bernoulli <p>`, `ge <p_loss_good> <p_loss_bad> <p_good_bad> <p_bad_good>`.
//!
//! Traffic statements apply in order; `*` assigns to every arc (hyperarc for
//! wireless networks, in declaration order) and a numeric index overrides a
//! single one. Which keys are required depends on the command consuming the
//! config; parsing alone accepts any subset.

use crate::network::{Network, NetworkError};
use crate::simulator::{SimConfig, SimMode};
use crate::traffic::{InjectionModel, Interarrival, LossModel, ProcessSpec};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: validation error: {msg}")]
    Validation { line: usize, msg: String },
    #[error("config is missing required key `{0}`")]
    Missing(&'static str),
    #[error("no traffic process declared for arc index {0}")]
    MissingTraffic(usize),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

fn syntax(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError::Syntax { line, msg: msg.into() }
}

fn validation(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError::Validation { line, msg: msg.into() }
}

/// Which arcs a `traffic` statement covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrafficTarget {
    All,
    Index(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficStatement {
    pub target: TrafficTarget,
    pub spec: ProcessSpec,
    line: usize,
}

/// Parsed experiment file. Every key is optional here; consumers demand the
/// keys their command needs via the accessors below.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub network_path: Option<String>,
    pub source: Option<String>,
    pub sinks: Vec<String>,
    pub field_m: Option<u32>,
    /// (K, rho).
    pub messages: Option<(usize, usize)>,
    pub mode: Option<SimMode>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub target_rate: Option<f64>,
    pub compact_memory: bool,
    pub jobs: Option<Vec<u64>>,
    pub horizon: Option<f64>,
    pub traffic: Vec<TrafficStatement>,
}

/// Splits into (line, words) statements; `#` comments, `;` separators.
fn statements(text: &str) -> Vec<(usize, Vec<&str>)> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let content = raw.split_once('#').map_or(raw, |(before, _)| before);
        for stmt in content.split(';') {
            let words: Vec<&str> = stmt.split_whitespace().collect();
            if !words.is_empty() {
                out.push((lineno + 1, words));
            }
        }
    }
    out
}

fn parse_f64(word: &str, line: usize, what: &str) -> Result<f64, ConfigError> {
    let v: f64 = word
        .parse()
        .map_err(|_| syntax(line, format!("bad {what} {word:?}")))?;
    if !v.is_finite() {
        return Err(validation(line, format!("{what} must be finite")));
    }
    Ok(v)
}

fn parse_u64(word: &str, line: usize, what: &str) -> Result<u64, ConfigError> {
    word.parse()
        .map_err(|_| syntax(line, format!("bad {what} {word:?}")))
}

/// `2^m` or a literal power-of-two size; only the implemented field sizes
/// pass.
fn parse_field(word: &str, line: usize) -> Result<u32, ConfigError> {
    let m = if let Some((base, exp)) = word.split_once('^') {
        if base != "2" {
            return Err(validation(line, format!("field base must be 2, got {base:?}")));
        }
        parse_u64(exp, line, "field exponent")? as u32
    } else {
        match parse_u64(word, line, "field size")? {
            2 => 1,
            16 => 4,
            256 => 8,
            65536 => 16,
            other => {
                return Err(validation(line, format!("unsupported field size {other}")));
            }
        }
    };
    if ![1, 4, 8, 16].contains(&m) {
        return Err(validation(line, format!("unsupported field exponent {m}")));
    }
    Ok(m)
}

/// `<injection> [loss <model>]` starting at `words[0]`.
fn parse_process(words: &[&str], line: usize) -> Result<ProcessSpec, ConfigError> {
    let mut pos = 0;
    let next = |pos: &mut usize, what: &str| -> Result<String, ConfigError> {
        let w = words
            .get(*pos)
            .ok_or_else(|| syntax(line, format!("expected {what}")))?;
        *pos += 1;
        Ok(w.to_string())
    };
    let kind = next(&mut pos, "an injection model")?;
    let injection = match kind.as_str() {
        "poisson" => InjectionModel::Poisson {
            rate: parse_f64(&next(&mut pos, "a rate")?, line, "rate")?,
        },
        "det" | "deterministic" => InjectionModel::Deterministic {
            rate: parse_f64(&next(&mut pos, "a rate")?, line, "rate")?,
        },
        "renewal" => {
            let sub = next(&mut pos, "a renewal kind (exp|uniform|const)")?;
            let interarrival = match sub.as_str() {
                "exp" => Interarrival::Exponential {
                    rate: parse_f64(&next(&mut pos, "a rate")?, line, "rate")?,
                },
                "uniform" => Interarrival::Uniform {
                    lo: parse_f64(&next(&mut pos, "a lower gap")?, line, "gap")?,
                    hi: parse_f64(&next(&mut pos, "an upper gap")?, line, "gap")?,
                },
                "const" => Interarrival::Constant {
                    gap: parse_f64(&next(&mut pos, "a gap")?, line, "gap")?,
                },
                other => {
                    return Err(syntax(line, format!("unknown renewal kind {other:?}")));
                }
            };
            InjectionModel::Renewal { interarrival }
        }
        other => {
            return Err(syntax(line, format!("unknown injection model {other:?}")));
        }
    };
    let loss = if pos < words.len() {
        if words[pos] != "loss" {
            return Err(syntax(line, format!("expected `loss`, got {:?}", words[pos])));
        }
        pos += 1;
        let kind = next(&mut pos, "a loss model")?;
        match kind.as_str() {
            "none" => LossModel::None,
            "bernoulli" => LossModel::Bernoulli {
                p_loss: parse_f64(&next(&mut pos, "a probability")?, line, "probability")?,
            },
            "ge" => LossModel::GilbertElliott {
                p_loss_good: parse_f64(&next(&mut pos, "p_loss_good")?, line, "probability")?,
                p_loss_bad: parse_f64(&next(&mut pos, "p_loss_bad")?, line, "probability")?,
                p_good_to_bad: parse_f64(&next(&mut pos, "p_good_bad")?, line, "probability")?,
                p_bad_to_good: parse_f64(&next(&mut pos, "p_bad_good")?, line, "probability")?,
            },
            other => {
                return Err(syntax(line, format!("unknown loss model {other:?}")));
            }
        }
    } else {
        LossModel::None
    };
    if pos != words.len() {
        return Err(syntax(line, "trailing tokens after traffic process"));
    }
    let spec = ProcessSpec { injection, loss };
    spec.validate()
        .map_err(|e| validation(line, e.to_string()))?;
    Ok(spec)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for (line, words) in statements(text) {
            let key = words[0];
            let args = &words[1..];
            // Everything except `traffic` may appear at most once.
            if key != "traffic" && !seen.insert(key) {
                return Err(validation(line, format!("duplicate key {key:?}")));
            }
            let want = |n: usize| -> Result<(), ConfigError> {
                if args.len() != n {
                    return Err(syntax(
                        line,
                        format!("`{key}` takes {n} argument{}", if n == 1 { "" } else { "s" }),
                    ));
                }
                Ok(())
            };
            match key {
                "network" => {
                    want(1)?;
                    cfg.network_path = Some(args[0].to_string());
                }
                "source" => {
                    want(1)?;
                    cfg.source = Some(args[0].to_string());
                }
                "sinks" => {
                    if args.is_empty() {
                        return Err(syntax(line, "`sinks` needs at least one label"));
                    }
                    cfg.sinks = args.iter().map(|s| s.to_string()).collect();
                }
                "field" => {
                    want(1)?;
                    cfg.field_m = Some(parse_field(args[0], line)?);
                }
                "messages" => {
                    want(2)?;
                    let k = parse_u64(args[0], line, "message count")? as usize;
                    let rho = parse_u64(args[1], line, "payload length")? as usize;
                    if k == 0 {
                        return Err(validation(line, "message count must be at least 1"));
                    }
                    if rho == 0 {
                        return Err(validation(line, "payload length must be at least 1"));
                    }
                    cfg.messages = Some((k, rho));
                }
                "mode" => {
                    let sub = args
                        .first()
                        .ok_or_else(|| syntax(line, "`mode` needs fixed|rateless"))?;
                    cfg.mode = Some(match *sub {
                        "fixed" => {
                            want(2)?;
                            let delta = parse_f64(args[1], line, "delta")?;
                            if delta < 0.0 {
                                return Err(validation(line, "delta must be non-negative"));
                            }
                            SimMode::Fixed { delta }
                        }
                        "rateless" => match args.len() {
                            1 => SimMode::rateless(),
                            2 => {
                                let cap_factor = parse_f64(args[1], line, "cap factor")?;
                                if cap_factor <= 0.0 {
                                    return Err(validation(line, "cap factor must be positive"));
                                }
                                SimMode::Rateless { cap_factor }
                            }
                            _ => return Err(syntax(line, "`mode rateless` takes at most one argument")),
                        },
                        other => {
                            return Err(syntax(line, format!("unknown mode {other:?}")));
                        }
                    });
                }
                "trials" => {
                    want(1)?;
                    let n = parse_u64(args[0], line, "trial count")?;
                    if n == 0 {
                        return Err(validation(line, "trial count must be at least 1"));
                    }
                    cfg.trials = Some(n);
                }
                "seed" => {
                    want(1)?;
                    cfg.seed = Some(parse_u64(args[0], line, "seed")?);
                }
                "rate" => {
                    want(1)?;
                    let r = parse_f64(args[0], line, "rate")?;
                    if r <= 0.0 {
                        return Err(validation(line, "rate must be positive"));
                    }
                    cfg.target_rate = Some(r);
                }
                "memory" => {
                    want(1)?;
                    cfg.compact_memory = match args[0] {
                        "compact" => true,
                        "raw" => false,
                        other => {
                            return Err(syntax(line, format!("unknown memory mode {other:?}")));
                        }
                    };
                }
                "jobs" => {
                    if args.is_empty() {
                        return Err(syntax(line, "`jobs` needs at least one count"));
                    }
                    let grid = args
                        .iter()
                        .map(|w| parse_u64(w, line, "job count"))
                        .collect::<Result<Vec<_>, _>>()?;
                    if grid[0] == 0 || grid.windows(2).any(|w| w[1] <= w[0]) {
                        return Err(validation(
                            line,
                            "job counts must be positive and strictly increasing",
                        ));
                    }
                    cfg.jobs = Some(grid);
                }
                "horizon" => {
                    want(1)?;
                    let h = parse_f64(args[0], line, "horizon")?;
                    if h <= 0.0 {
                        return Err(validation(line, "horizon must be positive"));
                    }
                    cfg.horizon = Some(h);
                }
                "traffic" => {
                    let target_word = args
                        .first()
                        .ok_or_else(|| syntax(line, "`traffic` needs an arc index or `*`"))?;
                    let target = if *target_word == "*" {
                        TrafficTarget::All
                    } else {
                        TrafficTarget::Index(parse_u64(target_word, line, "arc index")? as usize)
                    };
                    let spec = parse_process(&args[1..], line)?;
                    cfg.traffic.push(TrafficStatement { target, spec, line });
                }
                other => {
                    return Err(syntax(line, format!("unknown keyword {other:?}")));
                }
            }
        }
        Ok(cfg)
    }

    /// Reads a config file and the network it references (resolved relative
    /// to the config's directory).
    pub fn load(path: &Path) -> Result<(ExperimentConfig, Network), ConfigError> {
        let read = |p: &Path| -> Result<String, ConfigError> {
            std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: p.display().to_string(),
                source,
            })
        };
        let cfg = Self::parse(&read(path)?)?;
        let net_path = cfg.resolve_network_path(path)?;
        let network = Network::parse(&read(&net_path)?)?;
        Ok((cfg, network))
    }

    /// Where the referenced network file lives, given this config's own
    /// path.
    pub fn resolve_network_path(&self, config_path: &Path) -> Result<PathBuf, ConfigError> {
        let rel = self.network_path.as_deref().ok_or(ConfigError::Missing("network"))?;
        Ok(config_path.parent().unwrap_or(Path::new("")).join(rel))
    }

    /// One process per hyperarc (arc order for wireline), applying `*` and
    /// index statements in file order. Every arc must end up covered.
    pub fn traffic_specs(&self, network: &Network) -> Result<Vec<ProcessSpec>, ConfigError> {
        let count = network.arcs().len() + network.hyperarcs().len();
        let mut specs: Vec<Option<ProcessSpec>> = vec![None; count];
        for st in &self.traffic {
            match st.target {
                TrafficTarget::All => {
                    for slot in specs.iter_mut() {
                        *slot = Some(st.spec.clone());
                    }
                }
                TrafficTarget::Index(i) => {
                    if i >= count {
                        return Err(validation(
                            st.line,
                            format!("traffic index {i} out of range (network has {count} arcs)"),
                        ));
                    }
                    specs[i] = Some(st.spec.clone());
                }
            }
        }
        specs
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or(ConfigError::MissingTraffic(i)))
            .collect()
    }

    /// Assembles the simulator configuration; errors name the first missing
    /// key. The seed defaults to 0 (callers may override from the command
    /// line first).
    pub fn sim_config(&self, network: &Network) -> Result<SimConfig, ConfigError> {
        let source_label = self.source.as_deref().ok_or(ConfigError::Missing("source"))?;
        if self.sinks.is_empty() {
            return Err(ConfigError::Missing("sinks"));
        }
        let source = network.require_node(source_label)?;
        let sinks = self
            .sinks
            .iter()
            .map(|l| network.require_node(l))
            .collect::<Result<Vec<_>, _>>()?;
        let field_m = self.field_m.ok_or(ConfigError::Missing("field"))?;
        let (k, rho) = self.messages.ok_or(ConfigError::Missing("messages"))?;
        let mode = self.mode.ok_or(ConfigError::Missing("mode"))?;
        let traffic = self.traffic_specs(network)?;
        Ok(SimConfig {
            network: network.clone(),
            source,
            sinks,
            field_m,
            k,
            rho,
            traffic,
            mode,
            seed: self.seed.unwrap_or(0),
            compact_memory: self.compact_memory,
        })
    }
}
