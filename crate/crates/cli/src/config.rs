//! Flag, config-file and default resolution. Flags win over the file, the
//! file wins over built-in defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use phycrypt::attacks::DecoderMethod;
use phycrypt::params::{min_alpha, required_log2m};
use phycrypt::protocols::Coder;
use phycrypt::SystemParams;
use serde::{Deserialize, Serialize};

pub const THREADS_ENV: &str = "PHYCRYPT_THREADS";

/// Largest `log2 M` whose symbols fit comfortably in a `u64`.
pub const MAX_LOG2M: u32 = 62;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(name = "phycrypt", version, about = "Seeded experiments for massive-MIMO physical-layer cryptography")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Minimum constellation, maximum SNR and secrecy capacity per n.
    ParamsTable,
    /// Symbol and bit error rates of Bob and the eavesdropper decoders.
    Ber,
    /// Key agreement over fresh channel draws with universal hashing.
    KeyAgreement,
    /// Symmetric cipher: Bob, Eve holding the key, and a wrong key.
    Cipher,
    /// BDD through a MIMO oracle on toy lattices, checked against exact CVP.
    ReductionDemo,
    /// Search from a decision oracle by column re-randomization.
    DecisionToSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Transmit antenna counts, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Receive antennas (default n).
    #[arg(long, global = true)]
    pub m_rx: Option<usize>,
    /// Bits per symbol; M = 2^log2m.
    #[arg(long, global = true)]
    pub log2m: Option<u32>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub k: Option<f64>,
    #[arg(long, global = true)]
    pub m_slack: Option<f64>,
    /// Multiplies the channel noise; 0 switches it off.
    #[arg(long, global = true)]
    pub noise_scale: Option<f64>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (default stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Eve's decoders for `ber`: zf, babai_lll, exact_ml.
    #[arg(long, global = true, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Key length for `key-agreement`.
    #[arg(long, global = true)]
    pub eta: Option<usize>,
    /// Channel coder for `key-agreement`: none or repetition-3.
    #[arg(long, global = true, value_parser = parse_coder)]
    pub coder: Option<Coder>,
    /// Worker threads (default from the environment, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

fn parse_coder(s: &str) -> Result<Coder, String> {
    match s {
        "none" => Ok(Coder::None),
        "repetition-3" => Ok(Coder::Repetition3),
        _ => Err(format!("unknown coder {s:?}; expected none or repetition-3")),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NList {
    One(usize),
    Many(Vec<usize>),
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    n: Option<NList>,
    m_rx: Option<usize>,
    log2m: Option<u32>,
    alpha: Option<f64>,
    k: Option<f64>,
    m_slack: Option<f64>,
    noise_scale: Option<f64>,
    trials: Option<u64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    methods: Option<Vec<String>>,
    eta: Option<usize>,
    coder: Option<Coder>,
    threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| config_error(format!("bad config {}: {e}", path.display())))
    }
}

/// Settings after merging; echoed verbatim into every JSON record.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub subcommand: Command,
    pub n: Vec<usize>,
    pub m_rx: Option<usize>,
    pub log2m: Option<u32>,
    pub alpha: Option<f64>,
    pub k: f64,
    pub m_slack: f64,
    pub noise_scale: f64,
    pub trials: u64,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub methods: Vec<DecoderMethod>,
    pub eta: usize,
    pub coder: Coder,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn resolve(command: Command, flags: CommonArgs, file: FileConfig) -> anyhow::Result<Self> {
        let n = flags
            .n
            .or(file.n.map(|v| match v {
                NList::One(n) => vec![n],
                NList::Many(v) => v,
            }))
            .unwrap_or_else(|| default_n(command));
        if n.is_empty() || n.contains(&0) {
            return Err(config_error("--n needs one or more positive integers"));
        }
        let trials = flags.trials.or(file.trials).unwrap_or_else(|| default_trials(command));
        if trials == 0 {
            return Err(config_error("trials must be at least 1"));
        }
        let methods = flags
            .methods
            .or(file.methods)
            .unwrap_or_else(|| vec!["zf".into(), "babai_lll".into()])
            .iter()
            .map(|s| DecoderMethod::parse(s.trim()).ok_or_else(|| config_error(format!("unknown decoder {s:?}"))))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let threads = match flags.threads.or(file.threads) {
            Some(t) => Some(t),
            None => match std::env::var(THREADS_ENV) {
                Ok(v) => Some(v.trim().parse().map_err(|_| config_error(format!("{THREADS_ENV}={v:?} is not a count")))?),
                Err(_) => None,
            },
        };
        if threads == Some(0) {
            return Err(config_error("thread count must be at least 1"));
        }
        let cfg = Self {
            subcommand: command,
            n,
            m_rx: flags.m_rx.or(file.m_rx),
            log2m: flags.log2m.or(file.log2m),
            alpha: flags.alpha.or(file.alpha),
            k: flags.k.or(file.k).unwrap_or(1.0),
            m_slack: flags.m_slack.or(file.m_slack).unwrap_or(1.0),
            noise_scale: flags.noise_scale.or(file.noise_scale).unwrap_or(1.0),
            trials,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            format: flags.format.or(file.format).unwrap_or(Format::Csv),
            out: flags.out.or(file.out),
            methods,
            eta: flags.eta.or(file.eta).unwrap_or(64),
            coder: flags.coder.or(file.coder).unwrap_or_default(),
            threads,
        };
        if let Some(l) = cfg.log2m {
            if l == 0 || l > MAX_LOG2M {
                return Err(config_error(format!("log2m = {l} outside [1, {MAX_LOG2M}]")));
            }
        }
        for (name, v) in [("k", Some(cfg.k)), ("m_slack", Some(cfg.m_slack)), ("alpha", cfg.alpha)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(config_error(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if !(cfg.noise_scale >= 0.0 && cfg.noise_scale.is_finite()) {
            return Err(config_error(format!("noise_scale must be non-negative, got {}", cfg.noise_scale)));
        }
        Ok(cfg)
    }

    /// `log2 M` for dimension `n`: the flag, or the smallest integer above
    /// the hardness bound.
    pub fn log2m_for(&self, n: usize) -> anyhow::Result<u32> {
        if let Some(l) = self.log2m {
            return Ok(l);
        }
        let l = match self.subcommand {
            Command::DecisionToSearch => 2,
            Command::ReductionDemo => 4,
            _ if n < 4 => 4,
            _ => required_log2m(n, self.m_slack)?.floor() as u32 + 1,
        };
        if l > MAX_LOG2M {
            return Err(config_error(format!(
                "n = {n} needs log2 M = {l}, beyond {MAX_LOG2M}-bit symbols; pass --log2m explicitly"
            )));
        }
        Ok(l)
    }

    /// System parameters for dimension `n`. Without `--alpha` the noise sits
    /// 1% above the hardness threshold (or at 0.1 for the decision demo).
    pub fn params_for(&self, n: usize) -> anyhow::Result<SystemParams> {
        let m = 1u64 << self.log2m_for(n)?;
        let alpha = self.alpha.unwrap_or_else(|| match self.subcommand {
            Command::DecisionToSearch => 0.1,
            _ => 1.01 * min_alpha(n, self.k, self.m_slack),
        });
        let p = SystemParams::new(n, m, alpha, self.k)?
            .with_m_slack(self.m_slack)?
            .with_m_rx(self.m_rx.unwrap_or(n))?
            .with_noise_scale(self.noise_scale)?;
        Ok(p)
    }
}

fn default_n(command: Command) -> Vec<usize> {
    match command {
        Command::ParamsTable => vec![80, 128, 196, 256],
        Command::ReductionDemo | Command::DecisionToSearch => vec![4],
        _ => vec![16],
    }
}

fn default_trials(command: Command) -> u64 {
    match command {
        Command::ParamsTable => 1,
        Command::Ber | Command::Cipher => 1000,
        Command::KeyAgreement => 100,
        Command::ReductionDemo => 10,
        Command::DecisionToSearch => 50,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(flags: CommonArgs, file: &str) -> anyhow::Result<ExperimentConfig> {
        ExperimentConfig::resolve(Command::Ber, flags, serde_json::from_str(file)?)
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let flags = CommonArgs { trials: Some(4), ..Default::default() };
        let cfg = resolve(flags, r#"{"trials": 9, "seed": 5, "n": 8}"#).unwrap();
        assert_eq!((cfg.trials, cfg.seed, cfg.n.clone()), (4, 5, vec![8]));
        assert_eq!(cfg.k, 1.0);
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"trails": 3}"#).is_err());
    }

    #[test]
    fn default_constellation_clears_the_bound() {
        let cfg = resolve(CommonArgs::default(), "{}").unwrap();
        let p = cfg.params_for(16).unwrap();
        assert_eq!(p.m, 512);
        assert!(phycrypt::params::check_hardness_constraints(&p).unwrap().satisfied());
        assert!(cfg.params_for(256).is_err());
    }

    #[test]
    fn coder_names() {
        assert_eq!(parse_coder("repetition-3").unwrap(), Coder::Repetition3);
        assert!(parse_coder("rep").is_err());
        let f: FileConfig = serde_json::from_str(r#"{"coder": "repetition-3", "format": "json"}"#).unwrap();
        assert_eq!(f.coder, Some(Coder::Repetition3));
    }
}
