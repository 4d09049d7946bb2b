use alloc::vec;
use alloc::vec::Vec;

use crate::codec::Denoiser;
use crate::exec::{mean_and_stderr, Executor};
use crate::inference::{forward_backward, mixing_radius};
use crate::lp;
use crate::math;
use crate::matrix::Matrix;
use crate::prob::{Channel, DistortionMatrix};
use crate::rng::Stream;
use crate::source::Source;
use crate::{Error, Result};

use super::{bayes_response, block_loss, LossSpec};

/// Mixing tolerance used to pick the posterior window radius.
const RADIUS_TOL: f64 = 1e-6;
const RADIUS_MAX: usize = 32;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    pub fn exact(mean: f64) -> Self {
        Self { mean, std_err: 0.0 }
    }

    fn from_samples(values: &[f64]) -> Self {
        let (mean, std_err) = mean_and_stderr(values);
        Self { mean, std_err }
    }

    /// Whether `|a - b| <= sigmas * sqrt(se_a^2 + se_b^2)`.
    pub fn agrees_with(&self, other: &Estimate, sigmas: f64) -> bool {
        let se = math::sqrt(self.std_err * self.std_err + other.std_err * other.std_err);
        math::abs(self.mean - other.mean) <= sigmas * se
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineOptions {
    pub trials: usize,
    /// Interior positions averaged per trial.
    pub path_len: usize,
    /// Posterior window radius; chosen from the mixing estimate when absent.
    pub radius: Option<usize>,
    pub seed: u64,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        Self {
            trials: 64,
            path_len: 1024,
            radius: None,
            seed: 0,
        }
    }
}

/// Posterior-based reference losses, estimated on the same realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baselines {
    /// `E min_y E[Λ(X_0, y) | Z]`.
    pub bayes: Estimate,
    /// `E sum_{u,v} π(u|Z) π(v|Z) Λ(u, v)`.
    pub pair: Estimate,
    /// `E sup_couplings E Λ(U, V)`.
    pub upper: Estimate,
    pub radius: usize,
}

/// Largest `E Λ(U, V)` over couplings of `U, V ~ p`.
///
/// Binary alphabets have a one-parameter family of couplings and are solved in
/// closed form; larger ones go through the simplex.
pub fn pair_upper_bound(p: &[f64], loss: &LossSpec) -> Result<f64> {
    let n = p.len();
    if loss.sources() != n || loss.reproductions() != n {
        return Err(Error::DimensionMismatch { expected: n, got: loss.reproductions() });
    }
    if n == 2 {
        let t = p[0].min(p[1]);
        let l = |u, v| loss.get(u, v);
        let at = |t: f64| l(0, 0) * (p[0] - t) + l(1, 1) * (p[1] - t) + (l(0, 1) + l(1, 0)) * t;
        return Ok(at(0.0).max(at(t)));
    }
    if n * n > 36 {
        return Err(Error::BudgetExceeded { needed: (n * n) as u128, budget: 36 });
    }
    let mut a = Matrix::zeros(2 * n, n * n);
    let mut b = vec![0.0; 2 * n];
    let mut c = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            a[(u, u * n + v)] = 1.0;
            a[(n + v, u * n + v)] = 1.0;
            c[u * n + v] = loss.get(u, v);
        }
        b[u] = p[u];
        b[n + u] = p[u];
    }
    Ok(lp::maximize(&c, &a, &b)?.value)
}

fn pair_loss(p: &[f64], loss: &LossSpec) -> f64 {
    let mut total = 0.0;
    for (u, pu) in p.iter().enumerate() {
        for (v, pv) in p.iter().enumerate() {
            total += pu * pv * loss.get(u, v);
        }
    }
    total
}

/// Bayes, posterior-pair and worst-coupling losses from forward-backward
/// posteriors on simulated paths. Each trial simulates `path_len + 2r`
/// symbols and averages over the `path_len` interior positions.
pub fn posterior_baselines<E: Executor>(
    src: &Source,
    ch: &Channel,
    loss: &LossSpec,
    opts: &BaselineOptions,
    exec: &E,
) -> Result<Baselines> {
    let nx = src.alphabet_size();
    if loss.sources() != nx || loss.reproductions() != nx {
        return Err(Error::DimensionMismatch { expected: nx, got: loss.reproductions() });
    }
    if opts.trials == 0 || opts.path_len == 0 {
        return Err(Error::InvalidParameter("need positive trials and path length".into()));
    }
    let radius = match opts.radius {
        Some(r) => r,
        None => mixing_radius(src, ch, RADIUS_TOL, RADIUS_MAX, opts.seed, exec)?,
    };
    let per_trial = exec.map_indexed(opts.trials, |t| -> Result<[f64; 3]> {
        let mut rng = Stream::derived(opts.seed, t as u64);
        let x = src.sample_with(opts.path_len + 2 * radius, &mut rng);
        let z = ch.transmit(&x, &mut rng);
        let fb = forward_backward(src, ch, &z)?;
        let mut sums = [0.0; 3];
        for i in radius..radius + opts.path_len {
            let p = fb.row(i);
            sums[0] += bayes_response(p, loss).1;
            sums[1] += pair_loss(p, loss);
            sums[2] += pair_upper_bound(p, loss)?;
        }
        Ok(sums.map(|s| s / opts.path_len as f64))
    });
    let per_trial: Vec<[f64; 3]> = per_trial.into_iter().collect::<Result<_>>()?;
    let column = |j: usize| Estimate::from_samples(&per_trial.iter().map(|r| r[j]).collect::<Vec<_>>());
    Ok(Baselines {
        bayes: column(0),
        pair: column(1),
        upper: column(2),
        radius,
    })
}

/// `E_Z E Λ(U, V)` with `U, V` independent draws from the posterior of `X_0`.
pub fn theoretical_pair_loss<E: Executor>(
    src: &Source,
    ch: &Channel,
    loss: &LossSpec,
    opts: &BaselineOptions,
    exec: &E,
) -> Result<Estimate> {
    Ok(posterior_baselines(src, ch, loss, opts, exec)?.pair)
}

/// Loss of the symbol-by-symbol Bayes response to the full posterior.
pub fn bayes_loss<E: Executor>(
    src: &Source,
    ch: &Channel,
    loss: &LossSpec,
    opts: &BaselineOptions,
    exec: &E,
) -> Result<Estimate> {
    Ok(posterior_baselines(src, ch, loss, opts, exec)?.bayes)
}

/// `E_Z` of the worst-case coupling of two posterior draws.
pub fn coupling_upper_bound<E: Executor>(
    src: &Source,
    ch: &Channel,
    loss: &LossSpec,
    opts: &BaselineOptions,
    exec: &E,
) -> Result<Estimate> {
    Ok(posterior_baselines(src, ch, loss, opts, exec)?.upper)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    /// `(1/n) sum ρ(z_i, y_i)` over the full block; NaN without a distortion.
    pub realized_distortion: f64,
    /// Loss against the clean source over the interior positions.
    pub realized_loss: f64,
}

/// Runs `denoiser` on `trials` independent blocks of length `n`. The loss
/// skips `margin` positions at each end.
#[allow(clippy::too_many_arguments)]
pub fn run_denoiser<D: Denoiser + ?Sized, E: Executor>(
    src: &Source,
    ch: &Channel,
    loss: &LossSpec,
    denoiser: &D,
    dist: Option<&DistortionMatrix>,
    n: usize,
    margin: usize,
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<Vec<TrialRecord>> {
    if n <= 2 * margin {
        return Err(Error::InvalidParameter(alloc::format!(
            "block length {n} leaves no interior with margin {margin}"
        )));
    }
    let records = exec.map_indexed(trials, |trial| {
        let mut rng = Stream::derived(seed, trial as u64);
        let x = src.sample_with(n, &mut rng);
        let z = ch.transmit(&x, &mut rng);
        let y = denoiser.reconstruct(&z, rng.next_u64())?;
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: y.len() });
        }
        let realized_distortion = dist.map_or(f64::NAN, |d| d.block(&z, &y));
        let realized_loss = block_loss(&x[margin..n - margin], &y[margin..n - margin], loss)?;
        Ok(TrialRecord {
            trial,
            realized_distortion,
            realized_loss,
        })
    });
    records.into_iter().collect()
}

/// Summary of a denoising experiment against its baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentResult {
    pub mean_loss: f64,
    pub std_err: f64,
    pub theoretical_loss: f64,
    pub bayes_loss: f64,
    pub upper_bound: f64,
    pub realized_distortion: f64,
    /// Nats per symbol; NaN for schemes without a rate.
    pub rate: f64,
}

impl ExperimentResult {
    pub fn summarize(records: &[TrialRecord], baselines: &Baselines, rate: f64) -> Self {
        let losses: Vec<f64> = records.iter().map(|r| r.realized_loss).collect();
        let (mean_loss, std_err) = mean_and_stderr(&losses);
        let dist: Vec<f64> = records.iter().map(|r| r.realized_distortion).collect();
        Self {
            mean_loss,
            std_err,
            theoretical_loss: baselines.pair.mean,
            bayes_loss: baselines.bayes.mean,
            upper_bound: baselines.upper.mean,
            realized_distortion: mean_and_stderr(&dist).0,
            rate,
        }
    }

    pub fn loss_estimate(&self) -> Estimate {
        Estimate {
            mean: self.mean_loss,
            std_err: self.std_err,
        }
    }
}
