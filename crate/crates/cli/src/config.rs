//! Run configuration: a JSON document and/or flags, flags winning.
//!
//! Unset values fall back to the reference setup (beamsplitter at pi/6, ancilla
//! squeezing 3, `b3 = 1`, input `q' = 2/3`, grid `[1, 9]` step 0.05).

use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureChoice {
    Logneg,
    Geof,
    Both,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON configuration file; flags override its values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Beamsplitter angle in radians.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Ancilla squeezing `u3` (x scaled by u3, p by 1/u3).
    #[arg(long)]
    pub u3: Option<f64>,
    /// Ancilla thermal variance (vacuum is 1/2).
    #[arg(long)]
    pub b3: Option<f64>,
    /// Input squeezing for sweep, optimize and oracle-check; optimize takes
    /// a comma list.
    #[arg(long, value_delimiter = ',')]
    pub qprime: Option<Vec<f64>>,
    /// Weaker probe input.
    #[arg(long)]
    pub q: Option<f64>,
    /// Stronger probe input.
    #[arg(long)]
    pub qb: Option<f64>,
    #[arg(long)]
    pub u_min: Option<f64>,
    #[arg(long)]
    pub u_max: Option<f64>,
    #[arg(long)]
    pub u_step: Option<f64>,
    /// Pre-processing `V = S~(u2)` for the probe.
    #[arg(long)]
    pub u2: Option<f64>,
    #[arg(long, value_enum)]
    pub measure: Option<MeasureChoice>,
    /// Probe tolerance on the ratio gap.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fock cutoff for oracle-check.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Write the output here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    channel: ChannelFile,
    #[serde(default)]
    input: InputFile,
    #[serde(default)]
    grid: GridFile,
    measure: Option<MeasureChoice>,
    tol: Option<f64>,
    seed: Option<u64>,
    cutoff: Option<usize>,
    u2: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    theta: Option<f64>,
    u3: Option<f64>,
    b3: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputFile {
    q_prime: Option<OneOrMany>,
    q: Option<f64>,
    qb: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    u_min: Option<f64>,
    u_max: Option<f64>,
    step: Option<f64>,
}

/// Fully resolved parameters, echoed into JSON outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub theta: f64,
    pub u3: f64,
    pub b3: f64,
    pub q_prime: Vec<f64>,
    pub q: f64,
    pub qb: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub u_step: f64,
    pub u2: f64,
    pub measure: MeasureChoice,
    pub tol: f64,
    pub seed: u64,
    pub cutoff: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(flags: Flags) -> Result<Self, String> {
        let file = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
                serde_json::from_str::<FileConfig>(&text)
                    .map_err(|e| format!("bad config {}: {e}", path.display()))?
            }
            None => FileConfig::default(),
        };
        let q_prime = match (flags.qprime, file.input.q_prime) {
            (Some(v), _) => v,
            (None, Some(OneOrMany::One(q))) => vec![q],
            (None, Some(OneOrMany::Many(v))) => v,
            (None, None) => vec![2.0 / 3.0],
        };
        if q_prime.is_empty() {
            return Err("q_prime list is empty".into());
        }
        let config = Self {
            theta: flags
                .theta
                .or(file.channel.theta)
                .unwrap_or(std::f64::consts::PI / 6.0),
            u3: flags.u3.or(file.channel.u3).unwrap_or(3.0),
            b3: flags.b3.or(file.channel.b3).unwrap_or(1.0),
            q_prime,
            q: flags.q.or(file.input.q).unwrap_or(0.02),
            qb: flags.qb.or(file.input.qb).unwrap_or(0.5),
            u_min: flags.u_min.or(file.grid.u_min).unwrap_or(1.0),
            u_max: flags.u_max.or(file.grid.u_max).unwrap_or(9.0),
            u_step: flags.u_step.or(file.grid.step).unwrap_or(0.05),
            u2: flags.u2.or(file.u2).unwrap_or(1.0),
            measure: flags
                .measure
                .or(file.measure)
                .unwrap_or(MeasureChoice::Both),
            tol: flags
                .tol
                .or(file.tol)
                .unwrap_or(gaussent::protocol::PROBE_TOL),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            cutoff: flags.cutoff.or(file.cutoff).unwrap_or(40),
            out: flags.out,
        };
        let finite = [
            config.theta,
            config.u3,
            config.b3,
            config.q,
            config.qb,
            config.u_min,
            config.u_max,
            config.u_step,
            config.u2,
            config.tol,
        ];
        if finite.iter().chain(&config.q_prime).any(|x| !x.is_finite()) {
            return Err("numeric parameters must be finite".into());
        }
        if config.cutoff == 0 {
            return Err("cutoff must be positive".into());
        }
        Ok(config)
    }
}
