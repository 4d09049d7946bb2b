//! The checks and experiments behind each subcommand. Every command returns a
//! CSV table plus one or more pass/fail checks.

use std::f64::consts::LN_2;
use std::fmt;

use cbdenoise_core::codec::{product_block_length, random_codebook, BlockEncoder, Denoiser, PosteriorSampler};
use cbdenoise_core::empirics::{
    bsc_hamming_figure, erasure_figure, lemma_check, posterior_baselines, run_denoiser, BaselineOptions,
    BayesDenoiser, ErasureSweep, ExperimentResult, FigureTable,
};
use cbdenoise_core::exec::Executor;
use cbdenoise_core::inference::mixing_coefficient;
use cbdenoise_core::prob::{conditional_entropy, matched_distortion, Channel, Pmf, RankClass};
use cbdenoise_core::ratedist::{
    achiever_is_posterior_check, gaussian_example, matched_level_identity_check, rdp_exponential_form_test,
    witsenhausen_reduce,
};
use cbdenoise_core::rng::derive_seed;
use cbdenoise_core::source::Source;
use cbdenoise_core::Matrix;

use crate::config::{ChannelSpec, DenoiserKind, ExperimentConfig, SourceSpec};
use crate::csv::{Cell, Table};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// A named source and channel pair.
#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub source: Source,
    pub channel: Channel,
}

/// The i.i.d. uniform source and binary Markov sources with switching
/// probability 0.1, 0.2 and 0.3, each through BSC(0.1), BSC(0.3) and BEC(0.5).
/// `with_deficient` appends BSC(0.5) cases.
pub fn standard_instances(with_deficient: bool) -> Result<Vec<Instance>> {
    let mut sources = vec![("iid(0.5,0.5)".to_string(), Source::iid(Pmf::uniform(2)))];
    for p_s in [0.1, 0.2, 0.3] {
        sources.push((format!("markov({p_s})"), Source::binary_symmetric(p_s)?));
    }
    let mut channels = vec![
        ("bsc(0.1)", Channel::binary_symmetric(0.1)?),
        ("bsc(0.3)", Channel::binary_symmetric(0.3)?),
        ("bec(0.5)", Channel::binary_erasure(0.5)?),
    ];
    if with_deficient {
        channels.push(("bsc(0.5)", Channel::binary_symmetric(0.5)?));
    }
    let mut out = Vec::new();
    for (sl, src) in &sources {
        for (cl, ch) in &channels {
            out.push(Instance {
                label: format!("{sl}/{cl}"),
                source: src.clone(),
                channel: ch.clone(),
            });
        }
    }
    Ok(out)
}

pub fn configured_instance(cfg: &ExperimentConfig) -> Result<Instance> {
    let (source, channel, _) = cfg.model()?;
    let s = match &cfg.source {
        SourceSpec::Markov { p_s } => format!("markov({p_s})"),
        SourceSpec::Iid { law } => {
            let l: Vec<String> = law.iter().map(f64::to_string).collect();
            format!("iid({})", l.join(","))
        }
        SourceSpec::Transition { path } => format!("markov[{}]", path.display()),
    };
    let c = match &cfg.channel {
        ChannelSpec::Bsc { p } => format!("bsc({p})"),
        ChannelSpec::Bec { p_e } => format!("bec({p_e})"),
        ChannelSpec::Identity => "identity".into(),
        ChannelSpec::Matrix { path } => format!("channel[{}]", path.display()),
    };
    Ok(Instance {
        label: format!("{s}/{c}"),
        source,
        channel,
    })
}

fn rd_tolerance_bits(cfg: &ExperimentConfig, k: usize) -> f64 {
    if k <= 1 {
        cfg.check.rd_gap_k1_bits
    } else {
        cfg.check.rd_gap_bits
    }
}

/// Blahut-Arimoto rate at the matched level against `H(Z^k)/k - H(Z|X)`.
pub fn verify_rd(instances: &[Instance], k: usize, cfg: &ExperimentConfig) -> Result<Outcome> {
    let tol = rd_tolerance_bits(cfg, k);
    let mut table = Table::new(["instance", "k", "level_bits", "ba_rate_bits", "closed_form_bits", "gap_bits"]);
    let mut checks = Vec::new();
    for inst in instances {
        let r = matched_level_identity_check(&inst.source, &inst.channel, k)?;
        let gap = r.gap / LN_2;
        table.push(vec![
            inst.label.clone().into(),
            k.into(),
            (r.level / LN_2).into(),
            (r.lhs_rate / LN_2).into(),
            (r.rhs_rate / LN_2).into(),
            gap.into(),
        ]);
        checks.push(Check::new(
            format!("rd {} k={k}", inst.label),
            gap <= tol,
            format!("gap={gap:.3e} bits (tol {tol:e})"),
        ));
    }
    Ok(Outcome { table, checks })
}

/// Total variation between the optimal joint and `P(Z^k, X^k)`; rank-deficient
/// channels are reported and skipped.
pub fn verify_achiever(instances: &[Instance], k: usize, cfg: &ExperimentConfig) -> Result<Outcome> {
    let tol = cfg.check.achiever_tv;
    let mut table = Table::new(["instance", "k", "rank", "tv", "checked"]);
    let mut checks = Vec::new();
    for inst in instances {
        let r = achiever_is_posterior_check(&inst.source, &inst.channel, k)?;
        let rank = match r.rank {
            RankClass::Invertible => "invertible",
            RankClass::FullRowRank => "full-row-rank",
            RankClass::Deficient => "deficient",
        };
        let name = format!("achiever {} k={k}", inst.label);
        match r.tv_gap {
            Some(tv) => {
                table.push(vec![inst.label.clone().into(), k.into(), rank.into(), tv.into(), true.into()]);
                checks.push(Check::new(name, tv < tol, format!("tv={tv:.3e} (tol {tol:e}) rank={rank}")));
            }
            None => {
                table.push(vec![inst.label.clone().into(), k.into(), rank.into(), f64::NAN.into(), false.into()]);
                checks.push(Check::new(name, true, "rank deficient: flagged, not checked"));
            }
        }
    }
    Ok(Outcome { table, checks })
}

/// Exact Markov-violation check on a small optimal code.
pub fn verify_lemma(cfg: &ExperimentConfig) -> Result<Outcome> {
    let inst = configured_instance(cfg)?;
    let l = &cfg.lemma;
    let rep = lemma_check(&inst.source, &inst.channel, l.n, l.k, l.words, l.tail_window, cfg.run.seed)?;
    let v = &rep.violation;
    let mut table = Table::new([
        "instance",
        "n",
        "k",
        "words",
        "tail_window",
        "max_tv",
        "mass_weighted_tv",
        "delta_k",
        "bound",
        "code_distortion",
    ]);
    table.push(vec![
        inst.label.clone().into(),
        l.n.into(),
        l.k.into(),
        rep.code.book.len().into(),
        l.tail_window.into(),
        v.max_tv.into(),
        v.mass_weighted_tv.into(),
        v.delta_k.into(),
        v.bound.into(),
        rep.code.expected_distortion.into(),
    ]);
    let check = Check::new(
        format!("lemma {} n={} k={}", inst.label, l.n, l.k),
        rep.holds,
        format!("max_tv={:.6} bound={:.6} (delta_k={:.6})", v.max_tv, v.bound, v.delta_k),
    );
    Ok(Outcome {
        table,
        checks: vec![check],
    })
}

/// Least-squares slope and coefficient of determination of `ln y` against `x`.
pub fn log_linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// Sampled `delta_k` for `k = 0..=k_max` and a log-linear fit of its decay.
pub fn verify_mixing<E: Executor>(cfg: &ExperimentConfig, exec: &E) -> Result<Outcome> {
    let inst = configured_instance(cfg)?;
    let m = &cfg.mixing;
    let mut table = Table::new(["k", "delta_k", "tails", "extension_window", "centers"]);
    let mut ks = Vec::new();
    let mut deltas = Vec::new();
    for k in 0..=m.k_max {
        let est = mixing_coefficient(
            &inst.source,
            &inst.channel,
            k,
            k + m.extra_window,
            m.tails,
            derive_seed(cfg.run.seed, k as u64),
            exec,
        )?;
        table.push(vec![
            k.into(),
            est.delta_k.into(),
            est.tails_sampled.into(),
            est.extension_window.into(),
            est.centers_evaluated.into(),
        ]);
        if est.delta_k > 0.0 {
            ks.push(k as f64);
            deltas.push(est.delta_k);
        }
    }
    let name = format!("mixing {}", inst.label);
    let check = if ks.len() < 2 {
        Check::new(name, true, "delta_k vanishes (memoryless source or noiseless channel)")
    } else {
        let (slope, r2) = log_linear_fit(&ks, &deltas);
        Check::new(
            name,
            slope < 0.0 && r2 >= cfg.check.mixing_r2,
            format!("slope={slope:.4} R2={r2:.4} (min {})", cfg.check.mixing_r2),
        )
    };
    Ok(Outcome {
        table,
        checks: vec![check],
    })
}

/// Runs the configured denoiser and compares it with the posterior baselines.
pub fn run_denoise<E: Executor>(cfg: &ExperimentConfig, exec: &E) -> Result<Outcome> {
    let inst = configured_instance(cfg)?;
    let (src, ch) = (&inst.source, &inst.channel);
    let loss = cfg.build_loss(src.alphabet_size())?;
    let r = &cfg.run;
    let opts = BaselineOptions {
        trials: r.baseline_trials,
        path_len: r.baseline_len,
        radius: None,
        seed: derive_seed(r.seed, 1),
    };
    let baselines = posterior_baselines(src, ch, &loss, &opts, exec)?;
    let rho = matched_distortion(ch, None)?;
    let level = conditional_entropy(ch, src.initial())?;

    let (denoiser, rate, margin): (Box<dyn Denoiser>, f64, usize) = match r.denoiser {
        DenoiserKind::Posterior => (
            Box::new(PosteriorSampler {
                src: src.clone(),
                ch: ch.clone(),
            }),
            f64::NAN,
            r.margin.unwrap_or(baselines.radius),
        ),
        DenoiserKind::Bayes => (
            Box::new(BayesDenoiser {
                src: src.clone(),
                ch: ch.clone(),
                loss: loss.clone(),
            }),
            f64::NAN,
            r.margin.unwrap_or(baselines.radius),
        ),
        DenoiserKind::Codebook => {
            let matched_rate = matched_level_identity_check(src, ch, r.k.max(1))?.rhs_rate;
            let rate = matched_rate + r.rate_slack_bits * LN_2;
            let b = product_block_length(r.n, rate, cfg.codec.max_words)?;
            let book = random_codebook(src, b, rate, derive_seed(r.seed, 2))?;
            (Box::new(BlockEncoder::new(book, rho.clone())?), rate, r.margin.unwrap_or(0))
        }
    };
    let records = run_denoiser(
        src,
        ch,
        &loss,
        denoiser.as_ref(),
        Some(&rho),
        r.n,
        margin,
        r.trials,
        derive_seed(r.seed, 3),
        exec,
    )?;
    let res = ExperimentResult::summarize(&records, &baselines, rate);

    let mut table = Table::new(["trial", "realized_distortion", "realized_loss"]);
    for rec in &records {
        table.push(vec![rec.trial.into(), rec.realized_distortion.into(), rec.realized_loss.into()]);
    }
    let sig = cfg.check.sigmas;
    let summary = format!(
        "loss={:.6}±{:.6} pair={:.6}±{:.6} bayes={:.6} upper={:.6} distortion={:.6} level={:.6}",
        res.mean_loss,
        res.std_err,
        baselines.pair.mean,
        baselines.pair.std_err,
        res.bayes_loss,
        res.upper_bound,
        res.realized_distortion,
        level
    );
    let name = format!("denoise[{}] {} n={}", r.denoiser.as_str(), inst.label, r.n);
    let checks = match r.denoiser {
        DenoiserKind::Posterior => {
            let agrees = res.loss_estimate().agrees_with(&baselines.pair, sig);
            let between = res.bayes_loss < res.mean_loss && res.mean_loss < res.upper_bound;
            vec![Check::new(name, agrees && between, summary)]
        }
        DenoiserKind::Bayes => {
            let agrees = res.loss_estimate().agrees_with(&baselines.bayes, sig);
            vec![Check::new(name, agrees, summary)]
        }
        DenoiserKind::Codebook => {
            let d_ok = (res.realized_distortion - level).abs() <= cfg.check.distortion_rel * level;
            let l_ok = (res.mean_loss - res.theoretical_loss).abs() <= cfg.check.loss_rel * res.theoretical_loss;
            vec![
                Check::new(
                    format!("{name} distortion"),
                    d_ok,
                    format!(
                        "distortion={:.6} level={:.6} rel={:.4} (tol {}) rate={:.6} bits",
                        res.realized_distortion,
                        level,
                        (res.realized_distortion - level).abs() / level,
                        cfg.check.distortion_rel,
                        rate / LN_2
                    ),
                ),
                Check::new(
                    format!("{name} loss"),
                    l_ok,
                    format!(
                        "loss={:.6} pair={:.6} rel={:.4} (tol {})",
                        res.mean_loss,
                        res.theoretical_loss,
                        (res.mean_loss - res.theoretical_loss).abs() / res.theoretical_loss,
                        cfg.check.loss_rel
                    ),
                ),
            ]
        }
    };
    Ok(Outcome { table, checks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureKind {
    BscHamming,
    ErasureVsPe,
    ErasureVsPs,
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect()
}

fn figure_table(fig: &FigureTable) -> Table {
    let mut header: Vec<&str> = Vec::new();
    if let Some(s) = fig.series_name {
        header.push(s);
    }
    header.extend([fig.parameter_name, "bayes", "theoretical", "empirical", "empirical_se", "upper_bound"]);
    let mut table = Table::new(header);
    for r in &fig.rows {
        let mut row: Vec<Cell> = Vec::new();
        if let Some(s) = r.series {
            row.push(s.into());
        }
        row.extend([
            r.parameter.into(),
            r.bayes.into(),
            r.theoretical.into(),
            r.empirical.into(),
            r.empirical_se.into(),
            r.upper_bound.into(),
        ]);
        table.push(row);
    }
    table
}

/// Data behind the three comparison figures.
pub fn figure<E: Executor>(kind: FigureKind, cfg: &ExperimentConfig, exec: &E) -> Result<Outcome> {
    let f = &cfg.figure;
    let seed = cfg.run.seed;
    let sig = cfg.check.sigmas;
    let (fig, checks) = match kind {
        FigureKind::BscHamming => {
            let grid = f.grid.clone().unwrap_or_else(|| linspace(0.0, 1.0, 20));
            let fig = bsc_hamming_figure(&grid, f.trials.max(1) * 250, seed)?;
            let mut ordered = true;
            let mut equality_ok = true;
            for r in &fig.rows {
                ordered &= r.ordered(0.0);
                let tight = r.bayes == r.theoretical || r.theoretical == r.upper_bound;
                let special = [0.0, 0.5, 1.0].contains(&r.parameter);
                equality_ok &= tight == special;
            }
            let checks = vec![
                Check::new("figure bsc-hamming ordering", ordered, "phi <= F <= 2 phi on every row"),
                Check::new(
                    "figure bsc-hamming equality",
                    equality_ok,
                    "equality exactly at alpha in {0, 1/2, 1}",
                ),
            ];
            (fig, checks)
        }
        FigureKind::ErasureVsPe | FigureKind::ErasureVsPs => {
            let sweep = if kind == FigureKind::ErasureVsPe {
                ErasureSweep::VsErasure {
                    switching: f.series.clone().unwrap_or_else(|| vec![0.05, 0.1, 0.2]),
                    erasure: f.grid.clone().unwrap_or_else(|| linspace(0.0, 0.9, 9)),
                }
            } else {
                ErasureSweep::VsSwitching {
                    erasure: f.series.clone().unwrap_or_else(|| vec![0.25, 0.5, 0.75]),
                    switching: f.grid.clone().unwrap_or_else(|| linspace(0.05, 0.45, 8)),
                }
            };
            let fig = erasure_figure(&sweep, f.n, f.trials, seed, exec)?;
            let ordered = fig.rows.iter().all(|r| r.ordered(1e-12));
            let within = fig.rows.iter().filter(|r| !r.empirical_within_bounds(sig)).count();
            let checks = vec![
                Check::new(
                    format!("figure {} ordering", fig.name),
                    ordered,
                    "bayes <= theoretical <= upper on every row",
                ),
                Check::new(
                    format!("figure {} empirical", fig.name),
                    within == 0,
                    format!("{within} of {} rows outside the bounds by more than {sig} se", fig.rows.len()),
                ),
            ];
            (fig, checks)
        }
    };
    Ok(Outcome {
        table: figure_table(&fig),
        checks,
    })
}

/// A gnuplot script plotting the CSV written by [`figure`].
pub fn gnuplot_script(kind: FigureKind, csv_path: &str) -> String {
    let (x, first) = match kind {
        FigureKind::BscHamming => ("alpha", 1),
        FigureKind::ErasureVsPe => ("p_e", 2),
        FigureKind::ErasureVsPs => ("p_s", 2),
    };
    let col = |c: usize| c + first;
    format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel '{x}'\nset ylabel 'loss'\n\
         plot '{csv_path}' using {}:{} with lines title 'bayes', \\\n\
         '' using {}:{} with lines title 'compression (theory)', \\\n\
         '' using {}:{} with points title 'compression (simulated)', \\\n\
         '' using {}:{} with lines title 'upper bound'\n",
        first,
        col(1),
        first,
        col(2),
        first,
        col(3),
        first,
        col(5),
    )
}

/// Posterior candidate and a marginal-preserving perturbation on two-letter
/// blocks of the uniform binary source through BSC(0.2), the discrete
/// counterpart of the Gaussian example.
pub fn binary_rdp_checks() -> Result<(bool, bool)> {
    let ch1 = Channel::binary_symmetric(0.2)?;
    let mut m = Matrix::zeros(4, 4);
    let mut loss = Matrix::zeros(4, 4);
    for x in 0..4usize {
        for z in 0..4usize {
            m[(x, z)] = ch1.prob(x >> 1, z >> 1) * ch1.prob(x & 1, z & 1);
            loss[(x, z)] = (x ^ z).count_ones() as f64 / 2.0;
        }
    }
    let ch = Channel::new(m)?;
    let prior = Pmf::uniform(4);
    let reduced = witsenhausen_reduce(&ch, &prior, &loss)?;
    let post = ch.posterior(&prior)?;
    let candidate = rdp_exponential_form_test(&post, &reduced, &prior)?.satisfied;
    let mut bent = post;
    let e = 0.01;
    bent[(0, 0)] += e;
    bent[(0, 1)] -= e;
    bent[(1, 0)] -= e;
    bent[(1, 1)] += e;
    let perturbed = rdp_exponential_form_test(&bent, &reduced, &prior)?.satisfied;
    Ok((candidate, perturbed))
}

pub fn gaussian(gamma: f64) -> Result<Outcome> {
    let g = gaussian_example(gamma)?;
    let mut table = Table::new([
        "gamma",
        "compress_rate_bits",
        "compress_loss",
        "indirect_loss_at_rate",
        "indirect_rate_at_loss_bits",
    ]);
    table.push(vec![
        gamma.into(),
        (g.compress_rate / LN_2).into(),
        g.compress_loss.into(),
        g.indirect_loss_at_rate.into(),
        (g.indirect_rate_at_loss / LN_2).into(),
    ]);
    let (candidate, perturbed) = binary_rdp_checks()?;
    let checks = vec![
        Check::new(
            format!("gaussian gamma={gamma}"),
            g.indirect_loss_at_rate < g.compress_loss,
            format!(
                "compress_loss={} compress_rate={} bit indirect_loss={}",
                crate::csv::format_number(g.compress_loss),
                crate::csv::format_number(g.compress_rate / LN_2),
                crate::csv::format_number(g.indirect_loss_at_rate)
            ),
        ),
        Check::new(
            "rdp exponential form",
            candidate && !perturbed,
            format!("posterior candidate satisfied={candidate}, perturbed candidate satisfied={perturbed}"),
        ),
    ];
    Ok(Outcome { table, checks })
}
