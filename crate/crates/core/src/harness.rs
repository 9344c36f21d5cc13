//! Seeded Monte-Carlo simulation of encode → channel → decode.
//!
//! Trial `t` takes all of its randomness (information bits, then channel
//! noise) from stream `t` of the master seed, and workers only ever add
//! integer error counts. Results are therefore identical for any worker
//! count or scheduling.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{q_function, theorem1_mu};
use crate::channel::{bsc_llr, clamp_g, snr_to_sigma2, ChannelModel, SeedSpec, SnrConvention};
use crate::decoder::{Decoder, FrozenSpec};
use crate::rm_code::{CodeParams, Encoder, InfoLayout, NodePath};
use crate::{Error, Result};

/// Default cap on `n * trials` for one run.
pub const DEFAULT_MAX_SYMBOLS: u128 = 1 << 36;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

const CHUNK: u64 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Awgn,
    Bsc,
}

/// Channel as written in a config file: `{"kind":"awgn","sigma2":..}`,
/// `{"kind":"awgn","snr_db":..,"convention":"eb_n0"}` or `{"kind":"bsc","p":..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<SnrConvention>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl ChannelSpec {
    pub fn awgn_sigma2(sigma2: f64) -> Self {
        Self {
            kind: ChannelKind::Awgn,
            sigma2: Some(sigma2),
            snr_db: None,
            convention: None,
            p: None,
        }
    }

    pub fn awgn_snr(snr_db: f64, convention: SnrConvention) -> Self {
        Self {
            kind: ChannelKind::Awgn,
            sigma2: None,
            snr_db: Some(snr_db),
            convention: Some(convention),
            p: None,
        }
    }

    pub fn bsc(p: f64) -> Self {
        Self {
            kind: ChannelKind::Bsc,
            sigma2: None,
            snr_db: None,
            convention: None,
            p: Some(p),
        }
    }

    /// SNR is converted at the rate of `params`.
    pub fn resolve(&self, params: &CodeParams) -> Result<ChannelModel> {
        match self.kind {
            ChannelKind::Awgn => match (self.sigma2, self.snr_db, self.p) {
                (Some(s2), None, None) if self.convention.is_none() => ChannelModel::awgn(s2),
                (None, Some(snr), None) => {
                    let conv = self.convention.unwrap_or(SnrConvention::EbN0);
                    ChannelModel::awgn(snr_to_sigma2(snr, params.rate(), conv)?)
                }
                _ => Err(Error::Config(
                    "awgn channel needs exactly one of sigma2 or snr_db (+convention)".into(),
                )),
            },
            ChannelKind::Bsc => match (self.p, self.sigma2, self.snr_db, self.convention) {
                (Some(p), None, None, None) => ChannelModel::bsc(p),
                _ => Err(Error::Config("bsc channel needs only p".into())),
            },
        }
    }

    fn param(&self) -> f64 {
        self.sigma2.or(self.snr_db).or(self.p).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Soft,
    Hard,
}

impl Decision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Soft => "soft",
            Self::Hard => "hard",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    InfoBer,
    Bler,
    PerNode,
    #[default]
    All,
}

impl Measure {
    fn per_node(&self) -> bool {
        matches!(self, Self::PerNode | Self::All)
    }
}

/// Which end nodes are frozen. Serialized as `"none"`, `"leftmost"`,
/// `"leftmost2"` or a list of node paths such as `["VVV", "VVUV"]`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "FrozenRepr", into = "FrozenRepr")]
pub enum FrozenChoice {
    #[default]
    None,
    Leftmost,
    LeftmostTwo,
    Custom(Vec<NodePath>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FrozenRepr {
    Name(String),
    Paths(Vec<NodePath>),
}

impl TryFrom<FrozenRepr> for FrozenChoice {
    type Error = Error;

    fn try_from(repr: FrozenRepr) -> Result<Self> {
        match repr {
            FrozenRepr::Name(name) => name.parse(),
            FrozenRepr::Paths(paths) => Ok(Self::Custom(paths)),
        }
    }
}

impl From<FrozenChoice> for FrozenRepr {
    fn from(choice: FrozenChoice) -> Self {
        match choice {
            FrozenChoice::Custom(paths) => FrozenRepr::Paths(paths),
            other => FrozenRepr::Name(other.label()),
        }
    }
}

impl std::str::FromStr for FrozenChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "leftmost" => Ok(Self::Leftmost),
            "leftmost2" => Ok(Self::LeftmostTwo),
            other => Err(Error::Config(format!("unknown frozen set {other:?}"))),
        }
    }
}

impl FrozenChoice {
    pub fn label(&self) -> String {
        match self {
            Self::None => "none".into(),
            Self::Leftmost => "leftmost".into(),
            Self::LeftmostTwo => "leftmost2".into(),
            Self::Custom(paths) => paths
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join("+"),
        }
    }

    pub fn spec(&self, params: &CodeParams) -> FrozenSpec {
        match self {
            Self::None => FrozenSpec::none(),
            Self::Leftmost => FrozenSpec::leftmost(params, 1),
            Self::LeftmostTwo => FrozenSpec::leftmost(params, 2),
            Self::Custom(paths) => FrozenSpec::from_paths(paths.iter().cloned()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub m: usize,
    pub r: usize,
    pub channel: ChannelSpec,
    pub decision: Decision,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub frozen: FrozenChoice,
    #[serde(default)]
    pub measure: Measure,
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn params(&self) -> Result<CodeParams> {
        CodeParams::new(self.m, self.r)
    }

    pub fn validate(&self) -> Result<()> {
        let params = self.params()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.channel.resolve(&params)?;
        Decoder::new(params, &self.frozen.spec(&params))?;
        Ok(())
    }
}

/// Point estimate with a 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub errors: u64,
    pub total: u64,
}

impl Estimate {
    pub fn new(errors: u64, total: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(errors, total, Z95);
        let value = if total == 0 {
            0.0
        } else {
            errors as f64 / total as f64
        };
        Self {
            value,
            ci_lo,
            ci_hi,
            errors,
            total,
        }
    }

    /// Binomial standard error of the point estimate.
    pub fn std_err(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        (self.value * (1.0 - self.value) / self.total as f64).sqrt()
    }

    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.ci_lo <= other.ci_hi && other.ci_lo <= self.ci_hi
    }
}

pub fn wilson_interval(successes: u64, total: u64, z: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == total {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRate {
    pub path: NodePath,
    pub j: usize,
    pub s: usize,
    pub bits: usize,
    pub frozen: bool,
    pub errors: u64,
    pub ber: f64,
    /// Errors counted only in trials where every earlier node in decoding
    /// order was decoded correctly, i.e. errors that originate at this node.
    pub first_errors: u64,
    pub first_error_ber: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    /// Information-bit error rate over non-frozen bits.
    pub ber: Estimate,
    pub bler: Estimate,
    /// Codeword-bit error rate.
    pub coded_ber: Estimate,
    pub per_node: Vec<NodeRate>,
    pub trials_run: u64,
    pub seed: u64,
    pub wall_ms: u128,
}

impl SimResult {
    /// Non-frozen nodes, highest bit error rate first.
    pub fn worst_nodes(&self) -> Vec<&NodeRate> {
        self.ranked_nodes(|n| n.ber)
    }

    /// Non-frozen nodes, highest originating error rate first.
    pub fn worst_origin_nodes(&self) -> Vec<&NodeRate> {
        self.ranked_nodes(|n| n.first_error_ber)
    }

    fn ranked_nodes(&self, key: impl Fn(&NodeRate) -> f64) -> Vec<&NodeRate> {
        let mut nodes: Vec<&NodeRate> = self.per_node.iter().filter(|n| !n.frozen).collect();
        nodes.sort_by(|a, b| key(b).total_cmp(&key(a)));
        nodes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub max_symbols: u128,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: None,
            max_symbols: DEFAULT_MAX_SYMBOLS,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Counts {
    bit_errors: u64,
    block_errors: u64,
    coded_errors: u64,
    node_errors: Vec<u64>,
    first_errors: Vec<u64>,
}

impl Counts {
    fn merge(mut self, other: Counts) -> Counts {
        self.bit_errors += other.bit_errors;
        self.block_errors += other.block_errors;
        self.coded_errors += other.coded_errors;
        for (mine, theirs) in [
            (&mut self.node_errors, other.node_errors),
            (&mut self.first_errors, other.first_errors),
        ] {
            if mine.is_empty() {
                *mine = theirs;
            } else {
                for (a, b) in mine.iter_mut().zip(theirs) {
                    *a += b;
                }
            }
        }
        self
    }
}

/// Immutable per-run setup shared by all workers.
struct Plan {
    params: CodeParams,
    layout: InfoLayout,
    frozen: FrozenSpec,
    frozen_mask: Vec<bool>,
    channel: ChannelModel,
    decision: Decision,
    seed: SeedSpec,
}

struct Worker {
    encoder: Encoder,
    decoder: Decoder,
    info: Vec<u8>,
    word: Vec<u8>,
    g: Vec<f64>,
    decoded_word: Vec<u8>,
    decoded_info: Vec<u8>,
}

impl Plan {
    fn new(config: &SimConfig) -> Result<Self> {
        let params = config.params()?;
        let frozen = config.frozen.spec(&params);
        let decoder = Decoder::new(params, &frozen)?;
        Ok(Self {
            params,
            layout: decoder.layout().clone(),
            frozen_mask: decoder.frozen_mask().to_vec(),
            frozen,
            channel: config.channel.resolve(&params)?,
            decision: config.decision,
            seed: SeedSpec::new(config.seed),
        })
    }

    fn worker(&self) -> Worker {
        let CodeParams { n, k, .. } = self.params;
        Worker {
            encoder: Encoder::new(self.params),
            decoder: Decoder::new(self.params, &self.frozen).expect("frozen set validated"),
            info: vec![0; k],
            word: vec![0; n],
            g: vec![0.0; n],
            decoded_word: vec![0; n],
            decoded_info: vec![0; k],
        }
    }

    fn hard_magnitude(&self) -> f64 {
        let p = match self.channel {
            ChannelModel::Awgn { sigma2 } => q_function(1.0 / sigma2.sqrt()),
            ChannelModel::Bsc { p } => p,
        };
        bsc_llr(p.min(0.5), true).expect("degenerate probabilities allowed")
    }

    fn run_trial(&self, t: u64, w: &mut Worker, hard_mag: f64, counts: &mut Counts) {
        let mut rng = self.seed.trial_rng(t);
        for chunk in w.info.chunks_mut(64) {
            let bits: u64 = rng.random();
            for (i, b) in chunk.iter_mut().enumerate() {
                *b = ((bits >> i) & 1) as u8;
            }
        }
        for (node, &frozen) in self.layout.nodes.iter().zip(&self.frozen_mask) {
            if frozen {
                w.info[node.range()].fill(0);
            }
        }
        w.encoder
            .encode_into(&w.info, &mut w.word)
            .expect("buffer sizes fixed");

        match (self.channel, self.decision) {
            (ChannelModel::Awgn { sigma2 }, Decision::Soft) => {
                let sigma = sigma2.sqrt();
                let scale = 2.0 / sigma2;
                for (g, &c) in w.g.iter_mut().zip(&w.word) {
                    let z: f64 = rng.sample(StandardNormal);
                    let y = if c == 0 { 1.0 } else { -1.0 } + sigma * z;
                    *g = clamp_g(scale * y);
                }
            }
            (ChannelModel::Awgn { sigma2 }, Decision::Hard) => {
                let sigma = sigma2.sqrt();
                for (g, &c) in w.g.iter_mut().zip(&w.word) {
                    let z: f64 = rng.sample(StandardNormal);
                    let y = if c == 0 { 1.0 } else { -1.0 } + sigma * z;
                    *g = if y >= 0.0 { hard_mag } else { -hard_mag };
                }
            }
            (ChannelModel::Bsc { p }, _) => {
                for (g, &c) in w.g.iter_mut().zip(&w.word) {
                    let flip = u8::from(rng.random::<f64>() < p);
                    *g = if c ^ flip == 0 { hard_mag } else { -hard_mag };
                }
            }
        }

        w.decoder
            .decode_into(&w.g, &mut w.decoded_word, &mut w.decoded_info)
            .expect("buffer sizes fixed");

        let mut block_error = false;
        for (idx, node) in self.layout.nodes.iter().enumerate() {
            let range = node.range();
            let errs = w.info[range.clone()]
                .iter()
                .zip(&w.decoded_info[range])
                .filter(|(a, b)| a != b)
                .count() as u64;
            counts.node_errors[idx] += errs;
            if !block_error {
                counts.first_errors[idx] += errs;
            }
            counts.bit_errors += errs;
            block_error |= errs > 0;
        }
        counts.block_errors += u64::from(block_error);
        counts.coded_errors += w
            .word
            .iter()
            .zip(&w.decoded_word)
            .filter(|(a, b)| a != b)
            .count() as u64;
    }

    fn run(&self, trials: u64) -> Counts {
        let chunks = trials.div_ceil(CHUNK);
        let nodes = self.layout.len();
        let hard_mag = self.hard_magnitude();
        (0..chunks)
            .into_par_iter()
            .map_init(
                || self.worker(),
                |w, chunk| {
                    let mut counts = Counts {
                        node_errors: vec![0; nodes],
                        first_errors: vec![0; nodes],
                        ..Counts::default()
                    };
                    let end = ((chunk + 1) * CHUNK).min(trials);
                    for t in chunk * CHUNK..end {
                        self.run_trial(t, w, hard_mag, &mut counts);
                    }
                    counts
                },
            )
            .reduce(Counts::default, Counts::merge)
    }
}

fn check_resources(params: &CodeParams, trials: u64, max_symbols: u128) -> Result<()> {
    let requested = params.n as u128 * trials as u128;
    if requested > max_symbols {
        return Err(Error::ResourceCap {
            requested,
            cap: max_symbols,
            suggested_trials: (max_symbols / params.n as u128) as u64,
        });
    }
    Ok(())
}

pub fn run_montecarlo(config: &SimConfig) -> Result<SimResult> {
    run_montecarlo_with(config, &RunOptions::default())
}

pub fn run_montecarlo_with(config: &SimConfig, options: &RunOptions) -> Result<SimResult> {
    config.validate()?;
    let plan = Plan::new(config)?;
    check_resources(&plan.params, config.trials, options.max_symbols)?;

    let start = Instant::now();
    let counts = match options.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(|| plan.run(config.trials)),
        None => plan.run(config.trials),
    };
    let wall_ms = start.elapsed().as_millis();

    let counts = if counts.node_errors.is_empty() {
        let zeros = vec![0; plan.layout.len()];
        Counts {
            node_errors: zeros.clone(),
            first_errors: zeros,
            ..counts
        }
    } else {
        counts
    };
    let live_bits: usize = plan
        .layout
        .nodes
        .iter()
        .zip(&plan.frozen_mask)
        .filter(|(_, &f)| !f)
        .map(|(n, _)| n.bit_count)
        .sum();
    let per_node = if config.measure.per_node() {
        plan.layout
            .nodes
            .iter()
            .zip(&plan.frozen_mask)
            .zip(counts.node_errors.iter().zip(&counts.first_errors))
            .map(|((node, &frozen), (&errors, &first_errors))| {
                let rate = |e: u64| {
                    if frozen {
                        0.0
                    } else {
                        e as f64 / (node.bit_count as u64 * config.trials) as f64
                    }
                };
                NodeRate {
                    path: node.path.clone(),
                    j: node.j,
                    s: node.s,
                    bits: node.bit_count,
                    frozen,
                    errors,
                    ber: rate(errors),
                    first_errors,
                    first_error_ber: rate(first_errors),
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(SimResult {
        ber: Estimate::new(counts.bit_errors, live_bits as u64 * config.trials),
        bler: Estimate::new(counts.block_errors, config.trials),
        coded_ber: Estimate::new(counts.coded_errors, plan.params.n as u64 * config.trials),
        per_node,
        trials_run: config.trials,
        seed: config.seed,
        wall_ms,
    })
}

pub fn per_node_error_rates(config: &SimConfig) -> Result<SimResult> {
    let config = SimConfig {
        measure: Measure::PerNode,
        ..config.clone()
    };
    run_montecarlo(&config)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoftHard {
    pub soft: SimResult,
    pub hard: SimResult,
}

/// Soft and hard decoding on identical noise realizations.
pub fn compare_soft_hard(config: &SimConfig) -> Result<SoftHard> {
    compare_soft_hard_with(config, &RunOptions::default())
}

pub fn compare_soft_hard_with(config: &SimConfig, options: &RunOptions) -> Result<SoftHard> {
    if config.channel.kind != ChannelKind::Awgn {
        return Err(Error::Config(
            "soft/hard comparison needs an awgn channel".into(),
        ));
    }
    let soft = run_montecarlo_with(
        &SimConfig {
            decision: Decision::Soft,
            ..config.clone()
        },
        options,
    )?;
    let hard = run_montecarlo_with(
        &SimConfig {
            decision: Decision::Hard,
            ..config.clone()
        },
        options,
    )?;
    Ok(SoftHard { soft, hard })
}

pub const CSV_HEADER: &str =
    "m,r,channel_kind,channel_param,convention,decision,frozen,trials,ber,ber_ci_lo,ber_ci_hi,bler,bler_ci_lo,bler_ci_hi,seed,wall_ms";

/// One CSV row. With `timing == false` the wall-clock column is written as 0
/// so the output is a pure function of the config.
pub fn csv_row(config: &SimConfig, result: &SimResult, timing: bool) -> String {
    let kind = match config.channel.kind {
        ChannelKind::Awgn => "awgn",
        ChannelKind::Bsc => "bsc",
    };
    let convention = match (config.channel.snr_db, config.channel.convention) {
        (Some(_), conv) => conv.unwrap_or(SnrConvention::EbN0).as_str(),
        _ => "",
    };
    format!(
        "{},{},{},{},{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{},{}",
        config.m,
        config.r,
        kind,
        config.channel.param(),
        convention,
        config.decision.as_str(),
        config.frozen.label(),
        result.trials_run,
        result.ber.value,
        result.ber.ci_lo,
        result.ber.ci_hi,
        result.bler.value,
        result.bler.ci_lo,
        result.bler.ci_hi,
        result.seed,
        if timing { result.wall_ms } else { 0 },
    )
}

/// Reference values for the length-512 code at 2, 3 and 4 dB.
pub const TABLE2_SNR_DB: [f64; 3] = [2.0, 3.0, 4.0];
pub const TABLE2_REF_PLAIN_BER: [f64; 3] = [0.2, 0.03, 0.002];
pub const TABLE2_REF_SUBCODE_BER: [f64; 3] = [0.05, 0.003, 3e-5];
pub const TABLE2_REF_SUBCODE_BLER: [f64; 3] = [0.2, 0.02, 2e-4];
/// Bounded-distance recursive decoding (block error rate) and soft majority
/// decoding (bit error rate), quoted for comparison only.
pub const TABLE2_REF_BOUNDED_RECURSIVE_BLER: [f64; 3] = [0.9, 0.5, 0.2];
pub const TABLE2_REF_MAJORITY_BER: [f64; 3] = [0.3, 0.15, 0.1];

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Options {
    pub trials: u64,
    pub trials_4db: u64,
    pub seed: u64,
    pub convention: SnrConvention,
    /// Frozen set of the subcode rows; `Leftmost` or `LeftmostTwo`.
    pub subcode: FrozenChoice,
    pub run: RunOptions,
}

impl Table2Options {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            trials_4db: trials,
            seed,
            convention: SnrConvention::EbN0,
            subcode: FrozenChoice::Leftmost,
            run: RunOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table2Row {
    pub snr_db: f64,
    pub sigma2: f64,
    pub trials: u64,
    pub plain_ber: Estimate,
    pub plain_bler: Estimate,
    pub plain_coded_ber: Estimate,
    pub subcode_ber: Estimate,
    pub subcode_bler: Estimate,
    pub subcode_coded_ber: Estimate,
    pub ref_plain_ber: f64,
    pub ref_subcode_ber: f64,
    pub ref_subcode_bler: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table2 {
    pub m: usize,
    pub r: usize,
    pub convention: SnrConvention,
    pub seed: u64,
    pub subcode: FrozenChoice,
    pub rows: Vec<Table2Row>,
    pub ref_bounded_recursive_bler: [f64; 3],
    pub ref_majority_ber: [f64; 3],
}

impl Table2 {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "RM({},{}) length {}, SNR convention {}, seed {}, subcode frozen {}",
            self.r,
            self.m,
            1 << self.m,
            self.convention.as_str(),
            self.seed,
            self.subcode.label()
        );
        let _ = writeln!(out, "{:<34}{:>12}{:>12}{:>12}", "SNR (dB)", "2", "3", "4");
        let row = |out: &mut String, label: &str, vals: [f64; 3]| {
            let _ = writeln!(
                out,
                "{label:<34}{:>12.3e}{:>12.3e}{:>12.3e}",
                vals[0], vals[1], vals[2]
            );
        };
        let pick = |f: &dyn Fn(&Table2Row) -> f64| -> [f64; 3] {
            let mut v = [f64::NAN; 3];
            for (slot, r) in v.iter_mut().zip(&self.rows) {
                *slot = f(r);
            }
            v
        };
        row(
            &mut out,
            "bounded-distance recursive (ref)",
            self.ref_bounded_recursive_bler,
        );
        row(&mut out, "majority, soft (ref)", self.ref_majority_ber);
        row(&mut out, "recursive BER (ref)", pick(&|r| r.ref_plain_ber));
        row(
            &mut out,
            "recursive BER (simulated)",
            pick(&|r| r.plain_ber.value),
        );
        row(&mut out, "subcode BER (ref)", pick(&|r| r.ref_subcode_ber));
        row(
            &mut out,
            "subcode BER (simulated)",
            pick(&|r| r.subcode_ber.value),
        );
        row(
            &mut out,
            "subcode BLER (ref)",
            pick(&|r| r.ref_subcode_bler),
        );
        row(
            &mut out,
            "subcode BLER (simulated)",
            pick(&|r| r.subcode_bler.value),
        );
        row(
            &mut out,
            "recursive BLER (simulated)",
            pick(&|r| r.plain_bler.value),
        );
        row(
            &mut out,
            "recursive coded BER (simulated)",
            pick(&|r| r.plain_coded_ber.value),
        );
        row(
            &mut out,
            "subcode coded BER (simulated)",
            pick(&|r| r.subcode_coded_ber.value),
        );
        let trials: Vec<String> = self.rows.iter().map(|r| r.trials.to_string()).collect();
        let _ = writeln!(out, "trials per point: {}", trials.join(" / "));
        out
    }
}

/// Simulates RM(4,9) at 2, 3 and 4 dB, plain and as a subcode (by default
/// with the leftmost end node frozen), alongside the reference numbers.
pub fn reproduce_table2(options: &Table2Options) -> Result<Table2> {
    let (m, r) = (9, 4);
    let params = CodeParams::new(m, r)?;
    let mut rows = Vec::new();
    for (i, &snr_db) in TABLE2_SNR_DB.iter().enumerate() {
        let trials = if i == 2 {
            options.trials_4db
        } else {
            options.trials
        };
        let base = SimConfig {
            m,
            r,
            channel: ChannelSpec::awgn_snr(snr_db, options.convention),
            decision: Decision::Soft,
            trials,
            seed: options.seed,
            frozen: FrozenChoice::None,
            measure: Measure::All,
        };
        let plain = run_montecarlo_with(&base, &options.run)?;
        let sub = run_montecarlo_with(
            &SimConfig {
                frozen: options.subcode.clone(),
                ..base.clone()
            },
            &options.run,
        )?;
        let sigma2 = snr_to_sigma2(snr_db, params.rate(), options.convention)?;
        rows.push(Table2Row {
            snr_db,
            sigma2,
            trials,
            plain_ber: plain.ber,
            plain_bler: plain.bler,
            plain_coded_ber: plain.coded_ber,
            subcode_ber: sub.ber,
            subcode_bler: sub.bler,
            subcode_coded_ber: sub.coded_ber,
            ref_plain_ber: TABLE2_REF_PLAIN_BER[i],
            ref_subcode_ber: TABLE2_REF_SUBCODE_BER[i],
            ref_subcode_bler: TABLE2_REF_SUBCODE_BLER[i],
        });
    }
    Ok(Table2 {
        m,
        r,
        convention: options.convention,
        seed: options.seed,
        subcode: options.subcode.clone(),
        rows,
        ref_bounded_recursive_bler: TABLE2_REF_BOUNDED_RECURSIVE_BLER,
        ref_majority_ber: TABLE2_REF_MAJORITY_BER,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Row {
    pub p: f64,
    pub mu: f64,
    pub bound: f64,
    pub ber: Estimate,
    pub worst_node: NodePath,
    pub worst_node_ber: f64,
    /// `1.5 Q(μ) + 3 standard errors`.
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Report {
    pub m: usize,
    pub r: usize,
    pub trials: u64,
    pub rows: Vec<Theorem1Row>,
}

/// Hard-decision BER on a BSC against the `Q(μ)` estimate, per `p`.
pub fn theorem1_check(
    m: usize,
    r: usize,
    p_list: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Theorem1Report> {
    let mut rows = Vec::new();
    for &p in p_list {
        if !(p > 0.0 && p <= 0.5) {
            return Err(Error::InvalidProbability(p));
        }
        let (mu, bound) = theorem1_mu(m, r, p)?;
        let config = SimConfig {
            m,
            r,
            channel: ChannelSpec::bsc(p),
            decision: Decision::Hard,
            trials,
            seed,
            frozen: FrozenChoice::None,
            measure: Measure::All,
        };
        let result = run_montecarlo(&config)?;
        let worst = result.worst_nodes()[0].clone();
        let limit = 1.5 * bound + 3.0 * result.ber.std_err();
        rows.push(Theorem1Row {
            p,
            mu,
            bound,
            ber: result.ber,
            worst_node: worst.path,
            worst_node_ber: worst.ber,
            limit,
            pass: result.ber.value <= limit,
        });
    }
    Ok(Theorem1Report { m, r, trials, rows })
}
