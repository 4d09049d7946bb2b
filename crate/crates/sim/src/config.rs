//! Experiment configuration.
//!
//! A config file is a list of `section.key = value` lines. `#` starts a
//! comment; blank lines are ignored. Every key is optional and unknown keys are
//! rejected. Relative paths are resolved against the directory of the file.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `source.type` | `markov` | `markov`, `iid` or `matrix` |
//! | `source.p_s` | `0.2` | switching probability of the binary Markov source, in (0, 1/2) |
//! | `source.law` | `0.5, 0.5` | marginal of the i.i.d. source |
//! | `source.transition` | | transition matrix file |
//! | `channel.type` | `bsc` | `bsc`, `bec`, `identity` or `matrix` |
//! | `channel.p` | `0.1` | crossover (`bsc`, in [0, 1]) or erasure (`bec`, in [0, 1)) probability |
//! | `channel.matrix` | | channel matrix file, rows indexed by input |
//! | `loss.type` | `hamming` | `hamming`, `mse` or `matrix` |
//! | `loss.embedding` | symbol index | real value of each symbol for `mse` |
//! | `loss.matrix` | | loss matrix file, rows indexed by source symbol |
//! | `run.denoiser` | `posterior` | `posterior`, `codebook` or `bayes` |
//! | `run.n` | `4096` | block length |
//! | `run.k` | `1` | window radius / block order |
//! | `run.rate_slack_bits` | `0.1` | codebook rate above the matched rate |
//! | `run.trials` | `100` | Monte Carlo trials |
//! | `run.seed` | `1` | master seed |
//! | `run.output` | | CSV output path |
//! | `run.margin` | mixing radius | positions skipped at each end of a block |
//! | `run.baseline_trials` | `64` | trials for the posterior baselines |
//! | `run.baseline_len` | `1024` | interior positions per baseline trial |
//! | `check.rd_gap_k1_bits` | `1e-4` | matched-level identity tolerance for k = 1 |
//! | `check.rd_gap_bits` | `1e-3` | matched-level identity tolerance for k > 1 |
//! | `check.achiever_tv` | `1e-4` | achiever total-variation tolerance |
//! | `check.sigmas` | `3` | standard errors allowed in Monte Carlo comparisons |
//! | `check.distortion_rel` | `0.05` | relative distortion tolerance for codebooks |
//! | `check.loss_rel` | `0.15` | relative loss tolerance for codebooks |
//! | `check.mixing_r2` | `0.9` | minimum R² of the log-linear mixing fit |
//! | `mixing.k_max` | `8` | largest radius in the decay fit |
//! | `mixing.tails` | `512` | sampled tail pairs per center |
//! | `mixing.extra_window` | `16` | tail length beyond `k` |
//! | `codec.max_words` | `8192` | largest codebook before switching to a product code |
//! | `lemma.n` | `8` | block length |
//! | `lemma.k` | `1` | window radius |
//! | `lemma.words` | `16` | codebook size |
//! | `lemma.tail_window` | `6` | tail length of the exhaustive mixing coefficient |
//! | `figure.n` | `2000` | block length of the erasure simulations |
//! | `figure.trials` | `40` | trials per grid point |
//! | `figure.grid` | per figure | horizontal-axis values |
//! | `figure.series` | per figure | curve parameters of the erasure figures |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cbdenoise_core::empirics::LossSpec;
use cbdenoise_core::prob::{Channel, Pmf};
use cbdenoise_core::source::{MarkovSource, Source};

use crate::error::{CliError, Result};
use crate::matrix_io::read_matrix;

#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Markov { p_s: f64 },
    Iid { law: Vec<f64> },
    Transition { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Bsc { p: f64 },
    Bec { p_e: f64 },
    Identity,
    Matrix { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LossConfig {
    Hamming,
    Mse { embedding: Option<Vec<f64>> },
    Matrix { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DenoiserKind {
    Posterior,
    Codebook,
    Bayes,
}

impl DenoiserKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Posterior => "posterior",
            Self::Codebook => "codebook",
            Self::Bayes => "bayes",
        }
    }
}

impl FromStr for DenoiserKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "posterior" => Ok(Self::Posterior),
            "codebook" => Ok(Self::Codebook),
            "bayes" => Ok(Self::Bayes),
            _ => Err(format!("unknown denoiser {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub denoiser: DenoiserKind,
    pub n: usize,
    pub k: usize,
    pub rate_slack_bits: f64,
    pub trials: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub margin: Option<usize>,
    pub baseline_trials: usize,
    pub baseline_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    pub rd_gap_k1_bits: f64,
    pub rd_gap_bits: f64,
    pub achiever_tv: f64,
    pub sigmas: f64,
    pub distortion_rel: f64,
    pub loss_rel: f64,
    pub mixing_r2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingSettings {
    pub k_max: usize,
    pub tails: usize,
    pub extra_window: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodecSettings {
    pub max_words: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSettings {
    pub n: usize,
    pub k: usize,
    pub words: usize,
    pub tail_window: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSettings {
    pub n: usize,
    pub trials: usize,
    pub grid: Option<Vec<f64>>,
    pub series: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: SourceSpec,
    pub channel: ChannelSpec,
    pub loss: LossConfig,
    pub run: RunSettings,
    pub check: Thresholds,
    pub mixing: MixingSettings,
    pub codec: CodecSettings,
    pub lemma: LemmaSettings,
    pub figure: FigureSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: SourceSpec::Markov { p_s: 0.2 },
            channel: ChannelSpec::Bsc { p: 0.1 },
            loss: LossConfig::Hamming,
            run: RunSettings {
                denoiser: DenoiserKind::Posterior,
                n: 4096,
                k: 1,
                rate_slack_bits: 0.1,
                trials: 100,
                seed: 1,
                output: None,
                margin: None,
                baseline_trials: 64,
                baseline_len: 1024,
            },
            check: Thresholds {
                rd_gap_k1_bits: 1e-4,
                rd_gap_bits: 1e-3,
                achiever_tv: 1e-4,
                sigmas: 3.0,
                distortion_rel: 0.05,
                loss_rel: 0.15,
                mixing_r2: 0.9,
            },
            mixing: MixingSettings {
                k_max: 8,
                tails: 512,
                extra_window: 16,
            },
            codec: CodecSettings { max_words: 8192 },
            lemma: LemmaSettings {
                n: 8,
                k: 1,
                words: 16,
                tail_window: 6,
            },
            figure: FigureSettings {
                n: 2000,
                trials: 40,
                grid: None,
                series: None,
            },
        }
    }
}

/// Raw `key -> (line, value)` entries that are consumed as they are read.
struct Fields<'a> {
    path: &'a Path,
    entries: BTreeMap<String, (usize, String)>,
}

impl Fields<'_> {
    fn error(&self, line: usize, message: String) -> CliError {
        CliError::Parse {
            path: self.path.to_path_buf(),
            line,
            message,
        }
    }

    fn take_with<T>(&mut self, key: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Option<T>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, value)) => parse(&value)
                .map(Some)
                .map_err(|m| self.error(line, format!("{key}: {m}"))),
        }
    }

    fn take<T: FromStr>(&mut self, key: &str, check: impl Fn(&T) -> Option<String>) -> Result<Option<T>> {
        self.take_with(key, |v| {
            let parsed = v.parse::<T>().map_err(|_| format!("cannot parse {v:?}"))?;
            match check(&parsed) {
                Some(m) => Err(m),
                None => Ok(parsed),
            }
        })
    }

    fn take_list(&mut self, key: &str, check: impl Fn(&[f64]) -> Option<String>) -> Result<Option<Vec<f64>>> {
        self.take_with(key, |v| {
            let list = parse_list(v)?;
            match check(&list) {
                Some(m) => Err(m),
                None => Ok(list),
            }
        })
    }

    fn take_path(&mut self, key: &str) -> Result<Option<PathBuf>> {
        let base = self.path.parent().map(Path::to_path_buf).unwrap_or_default();
        self.take_with(key, |v| {
            let p = base.join(v);
            if p.is_file() {
                Ok(p)
            } else {
                Err(format!("file {} does not exist", p.display()))
            }
        })
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.0)
    }

    fn reject(&self, key: &str, why: &str) -> Result<()> {
        match self.line_of(key) {
            Some(line) => Err(self.error(line, format!("{key} {why}"))),
            None => Ok(()),
        }
    }
}

fn parse_list(v: &str) -> std::result::Result<Vec<f64>, String> {
    let list: std::result::Result<Vec<f64>, _> = v
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("cannot parse {s:?}")))
        .collect();
    let list = list?;
    if list.is_empty() {
        return Err("empty list".into());
    }
    Ok(list)
}

fn positive(v: &usize) -> Option<String> {
    (*v == 0).then(|| "must be positive".to_string())
}

fn any<T>(_: &T) -> Option<String> {
    None
}

fn positive_real(v: &f64) -> Option<String> {
    (!(*v > 0.0 && v.is_finite())).then(|| format!("{v} must be positive"))
}

fn in_range(lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> impl Fn(&f64) -> Option<String> {
    move |v: &f64| {
        let ok_lo = if lo_open { *v > lo } else { *v >= lo };
        let ok_hi = if hi_open { *v < hi } else { *v <= hi };
        let (l, h) = (if lo_open { '(' } else { '[' }, if hi_open { ')' } else { ']' });
        (!(ok_lo && ok_hi)).then(|| format!("{v} is outside {l}{lo}, {hi}{h}"))
    }
}

impl ExperimentConfig {
    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses config text; `path` names the file in messages and anchors
    /// relative paths.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut fields = Fields {
            path,
            entries: BTreeMap::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(fields.error(i + 1, format!("expected `section.key = value`, found {line:?}")));
            };
            let (key, value) = (key.trim(), value.trim());
            if !key.contains('.') || value.is_empty() {
                return Err(fields.error(i + 1, format!("expected `section.key = value`, found {line:?}")));
            }
            if let Some((first, _)) = fields.entries.get(key) {
                return Err(fields.error(i + 1, format!("{key} already set on line {first}")));
            }
            fields.entries.insert(key.to_string(), (i + 1, value.to_string()));
        }
        let cfg = Self::from_fields(&mut fields)?;
        if let Some((key, (line, _))) = fields.entries.iter().next() {
            return Err(fields.error(*line, format!("unknown key {key}")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn from_fields(f: &mut Fields) -> Result<Self> {
        let mut cfg = Self::default();

        let source_type = f.take::<String>("source.type", any)?.unwrap_or_else(|| "markov".into());
        cfg.source = match source_type.as_str() {
            "markov" => {
                f.reject("source.law", "does not apply to source.type = markov")?;
                f.reject("source.transition", "does not apply to source.type = markov")?;
                let p_s = f.take("source.p_s", in_range(0.0, 0.5, true, true))?.unwrap_or(0.2);
                SourceSpec::Markov { p_s }
            }
            "iid" => {
                f.reject("source.p_s", "does not apply to source.type = iid")?;
                f.reject("source.transition", "does not apply to source.type = iid")?;
                let law = f
                    .take_list("source.law", |l| Pmf::new(l.to_vec()).err().map(|e| e.to_string()))?
                    .unwrap_or_else(|| vec![0.5, 0.5]);
                SourceSpec::Iid { law }
            }
            "matrix" => {
                f.reject("source.p_s", "does not apply to source.type = matrix")?;
                f.reject("source.law", "does not apply to source.type = matrix")?;
                let path = f.take_path("source.transition")?.ok_or_else(|| {
                    CliError::Invalid("source.type = matrix needs source.transition".into())
                })?;
                SourceSpec::Transition { path }
            }
            other => return Err(CliError::Invalid(format!("unknown source.type {other:?}"))),
        };

        let channel_type = f.take::<String>("channel.type", any)?.unwrap_or_else(|| "bsc".into());
        cfg.channel = match channel_type.as_str() {
            "bsc" => {
                f.reject("channel.matrix", "does not apply to channel.type = bsc")?;
                ChannelSpec::Bsc {
                    p: f.take("channel.p", in_range(0.0, 1.0, false, false))?.unwrap_or(0.1),
                }
            }
            "bec" => {
                f.reject("channel.matrix", "does not apply to channel.type = bec")?;
                ChannelSpec::Bec {
                    p_e: f.take("channel.p", in_range(0.0, 1.0, false, true))?.unwrap_or(0.1),
                }
            }
            "identity" => {
                f.reject("channel.p", "does not apply to channel.type = identity")?;
                f.reject("channel.matrix", "does not apply to channel.type = identity")?;
                ChannelSpec::Identity
            }
            "matrix" => {
                f.reject("channel.p", "does not apply to channel.type = matrix")?;
                let path = f
                    .take_path("channel.matrix")?
                    .ok_or_else(|| CliError::Invalid("channel.type = matrix needs channel.matrix".into()))?;
                ChannelSpec::Matrix { path }
            }
            other => return Err(CliError::Invalid(format!("unknown channel.type {other:?}"))),
        };

        let loss_type = f.take::<String>("loss.type", any)?.unwrap_or_else(|| "hamming".into());
        cfg.loss = match loss_type.as_str() {
            "hamming" => {
                f.reject("loss.embedding", "does not apply to loss.type = hamming")?;
                f.reject("loss.matrix", "does not apply to loss.type = hamming")?;
                LossConfig::Hamming
            }
            "mse" => {
                f.reject("loss.matrix", "does not apply to loss.type = mse")?;
                let embedding = f.take_list("loss.embedding", |l| {
                    l.iter().any(|v| !v.is_finite()).then(|| "entries must be finite".into())
                })?;
                LossConfig::Mse { embedding }
            }
            "matrix" => {
                f.reject("loss.embedding", "does not apply to loss.type = matrix")?;
                let path = f
                    .take_path("loss.matrix")?
                    .ok_or_else(|| CliError::Invalid("loss.type = matrix needs loss.matrix".into()))?;
                LossConfig::Matrix { path }
            }
            other => return Err(CliError::Invalid(format!("unknown loss.type {other:?}"))),
        };

        let r = &mut cfg.run;
        if let Some(d) = f.take_with("run.denoiser", |v| v.parse::<DenoiserKind>())? {
            r.denoiser = d;
        }
        set(&mut r.n, f.take("run.n", positive)?);
        set(&mut r.k, f.take("run.k", any)?);
        set(&mut r.rate_slack_bits, f.take("run.rate_slack_bits", in_range(0.0, 64.0, false, false))?);
        set(&mut r.trials, f.take("run.trials", positive)?);
        set(&mut r.seed, f.take("run.seed", any)?);
        r.output = f.take_with("run.output", |v| Ok(PathBuf::from(v)))?;
        r.margin = f.take("run.margin", any)?;
        set(&mut r.baseline_trials, f.take("run.baseline_trials", positive)?);
        set(&mut r.baseline_len, f.take("run.baseline_len", positive)?);
        if let (Some(out), Some(base)) = (&r.output, f.path.parent()) {
            if out.is_relative() {
                r.output = Some(base.join(out));
            }
        }

        let c = &mut cfg.check;
        set(&mut c.rd_gap_k1_bits, f.take("check.rd_gap_k1_bits", positive_real)?);
        set(&mut c.rd_gap_bits, f.take("check.rd_gap_bits", positive_real)?);
        set(&mut c.achiever_tv, f.take("check.achiever_tv", positive_real)?);
        set(&mut c.sigmas, f.take("check.sigmas", positive_real)?);
        set(&mut c.distortion_rel, f.take("check.distortion_rel", positive_real)?);
        set(&mut c.loss_rel, f.take("check.loss_rel", positive_real)?);
        set(&mut c.mixing_r2, f.take("check.mixing_r2", in_range(0.0, 1.0, false, false))?);

        set(&mut cfg.mixing.k_max, f.take("mixing.k_max", positive)?);
        set(&mut cfg.mixing.tails, f.take("mixing.tails", positive)?);
        set(&mut cfg.mixing.extra_window, f.take("mixing.extra_window", any)?);
        set(&mut cfg.codec.max_words, f.take("codec.max_words", positive)?);
        set(&mut cfg.lemma.n, f.take("lemma.n", positive)?);
        set(&mut cfg.lemma.k, f.take("lemma.k", any)?);
        set(&mut cfg.lemma.words, f.take("lemma.words", positive)?);
        set(&mut cfg.lemma.tail_window, f.take("lemma.tail_window", any)?);
        set(&mut cfg.figure.n, f.take("figure.n", positive)?);
        set(&mut cfg.figure.trials, f.take("figure.trials", positive)?);
        cfg.figure.grid = f.take_list("figure.grid", |_| None)?;
        cfg.figure.series = f.take_list("figure.series", |_| None)?;
        Ok(cfg)
    }

    /// Cross-field checks, also run after command-line overrides.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Invalid(m));
        if self.run.n <= 2 * self.run.k {
            return bad(format!("run.n = {} must exceed 2 run.k = {}", self.run.n, 2 * self.run.k));
        }
        if self.run.trials == 0 {
            return bad("run.trials must be positive".into());
        }
        if !(self.run.rate_slack_bits >= 0.0 && self.run.rate_slack_bits.is_finite()) {
            return bad(format!("run.rate_slack_bits = {} must be non-negative", self.run.rate_slack_bits));
        }
        if let Some(m) = self.run.margin {
            if self.run.n <= 2 * m {
                return bad(format!("run.n = {} leaves no interior with run.margin = {m}", self.run.n));
            }
        }
        if self.lemma.n <= 2 * self.lemma.k {
            return bad(format!("lemma.n = {} must exceed 2 lemma.k = {}", self.lemma.n, 2 * self.lemma.k));
        }
        Ok(())
    }

    /// Canonical text form: every key in a fixed order. Parsing the result
    /// gives back the same configuration.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        let list = |l: &[f64]| l.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let path = |p: &Path| p.display().to_string();
        match &self.source {
            SourceSpec::Markov { p_s } => {
                put("source.type", "markov".into());
                put("source.p_s", p_s.to_string());
            }
            SourceSpec::Iid { law } => {
                put("source.type", "iid".into());
                put("source.law", list(law));
            }
            SourceSpec::Transition { path: p } => {
                put("source.type", "matrix".into());
                put("source.transition", path(p));
            }
        }
        match &self.channel {
            ChannelSpec::Bsc { p } => {
                put("channel.type", "bsc".into());
                put("channel.p", p.to_string());
            }
            ChannelSpec::Bec { p_e } => {
                put("channel.type", "bec".into());
                put("channel.p", p_e.to_string());
            }
            ChannelSpec::Identity => put("channel.type", "identity".into()),
            ChannelSpec::Matrix { path: p } => {
                put("channel.type", "matrix".into());
                put("channel.matrix", path(p));
            }
        }
        match &self.loss {
            LossConfig::Hamming => put("loss.type", "hamming".into()),
            LossConfig::Mse { embedding } => {
                put("loss.type", "mse".into());
                if let Some(e) = embedding {
                    put("loss.embedding", list(e));
                }
            }
            LossConfig::Matrix { path: p } => {
                put("loss.type", "matrix".into());
                put("loss.matrix", path(p));
            }
        }
        let r = &self.run;
        put("run.denoiser", r.denoiser.as_str().into());
        put("run.n", r.n.to_string());
        put("run.k", r.k.to_string());
        put("run.rate_slack_bits", r.rate_slack_bits.to_string());
        put("run.trials", r.trials.to_string());
        put("run.seed", r.seed.to_string());
        if let Some(o) = &r.output {
            put("run.output", path(o));
        }
        if let Some(m) = r.margin {
            put("run.margin", m.to_string());
        }
        put("run.baseline_trials", r.baseline_trials.to_string());
        put("run.baseline_len", r.baseline_len.to_string());
        let c = &self.check;
        put("check.rd_gap_k1_bits", c.rd_gap_k1_bits.to_string());
        put("check.rd_gap_bits", c.rd_gap_bits.to_string());
        put("check.achiever_tv", c.achiever_tv.to_string());
        put("check.sigmas", c.sigmas.to_string());
        put("check.distortion_rel", c.distortion_rel.to_string());
        put("check.loss_rel", c.loss_rel.to_string());
        put("check.mixing_r2", c.mixing_r2.to_string());
        put("mixing.k_max", self.mixing.k_max.to_string());
        put("mixing.tails", self.mixing.tails.to_string());
        put("mixing.extra_window", self.mixing.extra_window.to_string());
        put("codec.max_words", self.codec.max_words.to_string());
        put("lemma.n", self.lemma.n.to_string());
        put("lemma.k", self.lemma.k.to_string());
        put("lemma.words", self.lemma.words.to_string());
        put("lemma.tail_window", self.lemma.tail_window.to_string());
        put("figure.n", self.figure.n.to_string());
        put("figure.trials", self.figure.trials.to_string());
        if let Some(g) = &self.figure.grid {
            put("figure.grid", list(g));
        }
        if let Some(s) = &self.figure.series {
            put("figure.series", list(s));
        }
        out
    }

    pub fn build_source(&self) -> Result<Source> {
        Ok(match &self.source {
            SourceSpec::Markov { p_s } => Source::binary_symmetric(*p_s)?,
            SourceSpec::Iid { law } => Source::iid(Pmf::new(law.clone())?),
            SourceSpec::Transition { path } => Source::Markov(MarkovSource::new(read_matrix(path)?)?),
        })
    }

    pub fn build_channel(&self, inputs: usize) -> Result<Channel> {
        let ch = match &self.channel {
            ChannelSpec::Bsc { p } => Channel::binary_symmetric(*p)?,
            ChannelSpec::Bec { p_e } => Channel::binary_erasure(*p_e)?,
            ChannelSpec::Identity => Channel::identity(inputs),
            ChannelSpec::Matrix { path } => Channel::new(read_matrix(path)?)?,
        };
        if ch.inputs() != inputs {
            return Err(CliError::Invalid(format!(
                "channel has {} inputs but the source alphabet has {inputs} symbols",
                ch.inputs()
            )));
        }
        Ok(ch)
    }

    pub fn build_loss(&self, size: usize) -> Result<LossSpec> {
        let loss = match &self.loss {
            LossConfig::Hamming => LossSpec::hamming(size),
            LossConfig::Mse { embedding: Some(e) } => LossSpec::mse(e)?,
            LossConfig::Mse { embedding: None } => {
                LossSpec::mse(&(0..size).map(|i| i as f64).collect::<Vec<_>>())?
            }
            LossConfig::Matrix { path } => LossSpec::new(read_matrix(path)?)?,
        };
        if loss.sources() != size {
            return Err(CliError::Invalid(format!(
                "loss has {} rows but the source alphabet has {size} symbols",
                loss.sources()
            )));
        }
        Ok(loss)
    }

    /// Source, channel and loss built together.
    pub fn model(&self) -> Result<(Source, Channel, LossSpec)> {
        let src = self.build_source()?;
        let ch = self.build_channel(src.alphabet_size())?;
        let loss = self.build_loss(src.alphabet_size())?;
        Ok((src, ch, loss))
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
