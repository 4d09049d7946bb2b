//! Exact posterior inference for a Markov (or i.i.d.) source observed through
//! a memoryless channel.

mod erasure;
mod mixing;

pub use erasure::erasure_posterior_closed_form;
pub use mixing::{
    mixing_coefficient, mixing_coefficient_exhaustive, mixing_radius, MixingEstimate,
    DEFAULT_EXTRA_WINDOW, DEFAULT_TAILS,
};

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::matrix::Matrix;
use crate::prob::{Channel, Pmf};
use crate::rng::Stream;
use crate::source::{SamplePath, Source};
use crate::{Error, Result};

/// Smoothed marginals `P(X_i | Z^n = z^n)`, one row per index.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMarginals {
    table: Matrix,
    log_likelihood: f64,
}

impl PosteriorMarginals {
    pub fn len(&self) -> usize {
        self.table.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.table.rows() == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.table.row(i)
    }

    pub fn pmf(&self, i: usize) -> Pmf {
        Pmf::from_raw(self.table.row(i).to_vec())
    }

    /// `ln P(Z^n = z^n)`.
    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    pub fn table(&self) -> &Matrix {
        &self.table
    }
}

fn check_model(src: &Source, ch: &Channel, z: &[usize]) -> Result<()> {
    if src.alphabet_size() != ch.inputs() {
        return Err(Error::DimensionMismatch {
            expected: ch.inputs(),
            got: src.alphabet_size(),
        });
    }
    if z.is_empty() {
        return Err(Error::InvalidParameter("empty observation".into()));
    }
    if let Some(&bad) = z.iter().find(|&&s| s >= ch.outputs()) {
        return Err(Error::InvalidParameter(alloc::format!(
            "observation symbol {bad} outside channel output alphabet"
        )));
    }
    Ok(())
}

/// Normalized forward messages `P(X_t | Z_1..Z_t)` and the log-likelihood.
fn forward(src: &Source, ch: &Channel, z: &[usize]) -> Result<(Matrix, f64)> {
    let nx = src.alphabet_size();
    let m = src.transition();
    let mut alpha = Matrix::zeros(z.len(), nx);
    let mut loglik = 0.0;
    let mut prev: Vec<f64> = src.initial().probs().to_vec();
    for (t, &zt) in z.iter().enumerate() {
        let predicted = if t == 0 { prev.clone() } else { m.left_mul(&prev) };
        let row = alpha.row_mut(t);
        let mut c = 0.0;
        for x in 0..nx {
            row[x] = predicted[x] * ch.prob(x, zt);
            c += row[x];
        }
        if c <= 0.0 {
            return Err(Error::ZeroLikelihood { index: t });
        }
        for v in row.iter_mut() {
            *v /= c;
        }
        loglik += math::ln(c);
        prev = row.to_vec();
    }
    Ok((alpha, loglik))
}

/// `P(Z^n = z)`, zero for impossible observations.
pub(crate) fn sequence_probability(src: &Source, ch: &Channel, z: &[usize]) -> f64 {
    match forward(src, ch, z) {
        Ok((_, loglik)) => math::exp(loglik),
        Err(_) => 0.0,
    }
}

/// Forward-backward smoothing with per-step normalization.
pub fn forward_backward(src: &Source, ch: &Channel, z: &[usize]) -> Result<PosteriorMarginals> {
    check_model(src, ch, z)?;
    let nx = src.alphabet_size();
    let n = z.len();
    let m = src.transition();
    let (mut table, log_likelihood) = forward(src, ch, z)?;
    let mut beta = vec![1.0; nx];
    let mut scratch = vec![0.0; nx];
    for t in (0..n).rev() {
        if t + 1 < n {
            let z_next = z[t + 1];
            let mut s = 0.0;
            for (x, slot) in scratch.iter_mut().enumerate() {
                let mut acc = 0.0;
                for x2 in 0..nx {
                    acc += m[(x, x2)] * ch.prob(x2, z_next) * beta[x2];
                }
                *slot = acc;
                s += acc;
            }
            for (b, v) in beta.iter_mut().zip(&scratch) {
                *b = v / s;
            }
        }
        let row = table.row_mut(t);
        let mut s = 0.0;
        for x in 0..nx {
            row[x] *= beta[x];
            s += row[x];
        }
        for v in row.iter_mut() {
            *v /= s;
        }
    }
    Ok(PosteriorMarginals {
        table,
        log_likelihood,
    })
}

/// Draws `X^n ~ P(X^n | Z^n = z)` exactly: forward filtering, backward sampling.
pub fn posterior_path_sample(
    src: &Source,
    ch: &Channel,
    z: &[usize],
    seed: u64,
) -> Result<SamplePath> {
    let mut rng = Stream::new(seed);
    Ok(SamplePath {
        symbols: posterior_path_with(src, ch, z, &mut rng)?,
        seed,
    })
}

pub(crate) fn posterior_path_with(
    src: &Source,
    ch: &Channel,
    z: &[usize],
    rng: &mut Stream,
) -> Result<Vec<usize>> {
    check_model(src, ch, z)?;
    let nx = src.alphabet_size();
    let n = z.len();
    let m = src.transition();
    let (alpha, _) = forward(src, ch, z)?;
    let mut out = vec![0usize; n];
    out[n - 1] = rng.categorical(alpha.row(n - 1));
    let mut w = vec![0.0; nx];
    for t in (0..n - 1).rev() {
        let next = out[t + 1];
        for x in 0..nx {
            w[x] = alpha[(t, x)] * m[(x, next)];
        }
        out[t] = rng.categorical(&w);
    }
    Ok(out)
}

/// Posterior of the center symbol given only the odd-length window, with the
/// window's first state drawn from the stationary law.
pub fn windowed_posterior(src: &Source, ch: &Channel, window: &[usize]) -> Result<Pmf> {
    if window.len().is_multiple_of(2) {
        return Err(Error::InvalidParameter("window length must be odd".into()));
    }
    let fb = forward_backward(src, ch, window)?;
    Ok(fb.pmf(window.len() / 2))
}
