use alloc::vec::Vec;

use crate::codec::PosteriorSampler;
use crate::exec::{mean_and_stderr, Executor};
use crate::inference::mixing_radius;
use crate::prob::Channel;
use crate::rng::{derive_seed, Stream};
use crate::source::Source;
use crate::{Error, Result};

use super::baselines::run_denoiser;
use super::erasure::erasure_closed_forms;
use super::LossSpec;

const TRUNCATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureRow {
    /// Value of the curve parameter when the figure has several curves.
    pub series: Option<f64>,
    pub parameter: f64,
    pub bayes: f64,
    pub theoretical: f64,
    pub empirical: f64,
    pub empirical_se: f64,
    pub upper_bound: f64,
}

impl FigureRow {
    /// `bayes <= theoretical <= upper_bound` up to `tol`.
    pub fn ordered(&self, tol: f64) -> bool {
        self.bayes <= self.theoretical + tol && self.theoretical <= self.upper_bound + tol
    }

    /// The empirical column lies between the bounds within `sigmas` standard
    /// errors.
    pub fn empirical_within_bounds(&self, sigmas: f64) -> bool {
        let slack = sigmas * self.empirical_se + 1e-12;
        self.bayes <= self.empirical + slack && self.empirical <= self.upper_bound + slack
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub name: &'static str,
    pub series_name: Option<&'static str>,
    pub parameter_name: &'static str,
    pub rows: Vec<FigureRow>,
}

/// Bayes envelope `φ(α) = min(α, 1 - α)`, pair loss `F(α) = 2α(1 - α)` and
/// bound `2φ(α)` for a binary posterior `α`. The empirical column is the
/// disagreement rate of `trials` pairs of independent Bernoulli(α) draws.
pub fn bsc_hamming_figure(grid: &[f64], trials: usize, seed: u64) -> Result<FigureTable> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for (j, &a) in grid.iter().enumerate() {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidParameter(alloc::format!("α = {a} outside [0, 1]")));
        }
        let mut rng = Stream::derived(seed, j as u64);
        let draws: Vec<f64> = (0..trials)
            .map(|_| {
                let u = rng.uniform() < a;
                let v = rng.uniform() < a;
                if u != v { 1.0 } else { 0.0 }
            })
            .collect();
        let (empirical, empirical_se) = mean_and_stderr(&draws);
        let phi = a.min(1.0 - a);
        rows.push(FigureRow {
            series: None,
            parameter: a,
            bayes: phi,
            theoretical: 2.0 * a * (1.0 - a),
            empirical,
            empirical_se,
            upper_bound: 2.0 * phi,
        });
    }
    Ok(FigureTable {
        name: "bsc-hamming",
        series_name: None,
        parameter_name: "alpha",
        rows,
    })
}

/// Which erasure-example parameter runs along the horizontal axis.
#[derive(Debug, Clone, PartialEq)]
pub enum ErasureSweep {
    /// One curve per switching probability, swept over the erasure probability.
    VsErasure { switching: Vec<f64>, erasure: Vec<f64> },
    /// One curve per erasure probability, swept over the switching probability.
    VsSwitching { erasure: Vec<f64>, switching: Vec<f64> },
}

impl ErasureSweep {
    fn points(&self) -> Vec<(f64, f64, f64, f64)> {
        // (series, parameter, p_s, p_e)
        let mut out = Vec::new();
        match self {
            Self::VsErasure { switching, erasure } => {
                for &ps in switching {
                    out.extend(erasure.iter().map(|&pe| (ps, pe, ps, pe)));
                }
            }
            Self::VsSwitching { erasure, switching } => {
                for &pe in erasure {
                    out.extend(switching.iter().map(|&ps| (pe, ps, ps, pe)));
                }
            }
        }
        out
    }
}

/// Closed-form Bayes, pair and coupling losses for the erasure example, with
/// the posterior-sampling denoiser measured on `trials` blocks of length `n`.
pub fn erasure_figure<E: Executor>(
    sweep: &ErasureSweep,
    n: usize,
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<FigureTable> {
    let loss = LossSpec::hamming(2);
    let mut rows = Vec::new();
    for (j, (series, parameter, p_s, p_e)) in sweep.points().into_iter().enumerate() {
        let forms = erasure_closed_forms(p_s, p_e, TRUNCATION_TOL)?;
        let src = Source::binary_symmetric(p_s)?;
        let ch = Channel::binary_erasure(p_e)?;
        let point_seed = derive_seed(seed, j as u64);
        let margin = mixing_radius(&src, &ch, 1e-6, 32, point_seed, exec)?;
        let sampler = PosteriorSampler { src: src.clone(), ch: ch.clone() };
        let recs = run_denoiser(&src, &ch, &loss, &sampler, None, n, margin, trials, point_seed, exec)?;
        let losses: Vec<f64> = recs.iter().map(|r| r.realized_loss).collect();
        let (empirical, empirical_se) = mean_and_stderr(&losses);
        rows.push(FigureRow {
            series: Some(series),
            parameter,
            bayes: forms.bayes_loss,
            theoretical: forms.denoiser_loss,
            empirical,
            empirical_se,
            upper_bound: forms.upper_bound,
        });
    }
    let (name, series_name, parameter_name) = match sweep {
        ErasureSweep::VsErasure { .. } => ("erasure-vs-pe", "p_s", "p_e"),
        ErasureSweep::VsSwitching { .. } => ("erasure-vs-ps", "p_e", "p_s"),
    };
    Ok(FigureTable {
        name,
        series_name: Some(series_name),
        parameter_name,
        rows,
    })
}
