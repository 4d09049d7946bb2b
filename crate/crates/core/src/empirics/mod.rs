//! Empirical window distributions, losses and the baselines a denoiser is
//! compared against.

mod baselines;
mod erasure;
mod expected;
mod figures;

pub use baselines::{
    bayes_loss, coupling_upper_bound, pair_upper_bound, posterior_baselines, run_denoiser,
    theoretical_pair_loss, BaselineOptions, Baselines, Estimate, ExperimentResult, TrialRecord,
};
pub use erasure::{erasure_closed_forms, ErasureForms};
pub use expected::{
    convergence_gap, expected_empirical, expected_empirical_mc, lemma_check, markov_violation,
    ExpectedEmpirical, LemmaReport, MarkovViolation, EXACT_BUDGET,
};
pub use figures::{bsc_hamming_figure, erasure_figure, ErasureSweep, FigureRow, FigureTable};

use alloc::vec;
use alloc::vec::Vec;

use crate::codec::Denoiser;
use crate::inference::forward_backward;
use crate::matrix::Matrix;
use crate::prob::{word_index, Channel, JointPmf};
use crate::source::{SamplePath, Source};
use crate::{Error, Result};

/// A bounded loss `Λ(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    table: Matrix,
    lambda_max: f64,
}

impl LossSpec {
    pub fn new(table: Matrix) -> Result<Self> {
        let mut lambda_max = 0.0f64;
        for (index, &v) in table.as_slice().iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidProbability { index, value: v });
            }
            lambda_max = lambda_max.max(v);
        }
        Ok(Self { table, lambda_max })
    }

    pub fn hamming(n: usize) -> Self {
        Self::new(crate::prob::DistortionMatrix::hamming(n).values().clone()).expect("finite")
    }

    /// Squared error between real embeddings of the symbols.
    pub fn mse(embedding: &[f64]) -> Result<Self> {
        let n = embedding.len();
        let mut t = Matrix::zeros(n, n);
        for x in 0..n {
            for y in 0..n {
                let d = embedding[x] - embedding[y];
                t[(x, y)] = d * d;
            }
        }
        Self::new(t)
    }

    pub fn table(&self) -> &Matrix {
        &self.table
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[(x, y)]
    }

    pub fn sources(&self) -> usize {
        self.table.rows()
    }

    pub fn reproductions(&self) -> usize {
        self.table.cols()
    }
}

/// Counts of `(x_0, z_{-k}^{k}, y_{-k}^{k})` over the interior positions of
/// one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalJoint {
    k: usize,
    dims: [usize; 3],
    counts: Vec<u64>,
    n_effective: usize,
}

impl EmpiricalJoint {
    pub fn k(&self) -> usize {
        self.k
    }

    /// `[|X|, |Z|^(2k+1), |Y|^(2k+1)]`.
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_effective(&self) -> usize {
        self.n_effective
    }

    pub fn count(&self, x0: usize, z_window: &[usize], y_window: &[usize], alphabets: [usize; 3]) -> u64 {
        let zi = word_index(z_window, alphabets[1]);
        let yi = word_index(y_window, alphabets[2]);
        self.counts[(x0 * self.dims[1] + zi) * self.dims[2] + yi]
    }

    pub fn to_joint(&self) -> JointPmf {
        let total = self.n_effective as f64;
        JointPmf::from_raw(
            self.dims.to_vec(),
            self.counts.iter().map(|&c| c as f64 / total).collect(),
        )
    }
}

/// Window counts for `i = k .. n-k-1` (zero based). `alphabets` gives
/// `[|X|, |Z|, |Y|]`.
pub fn empirical_joint(
    x: &[usize],
    z: &[usize],
    y: &[usize],
    k: usize,
    alphabets: [usize; 3],
) -> Result<EmpiricalJoint> {
    let n = x.len();
    if z.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if z.len() != n { z.len() } else { y.len() },
        });
    }
    if n <= 2 * k {
        return Err(Error::InvalidParameter(alloc::format!("need n > 2k, got n = {n}, k = {k}")));
    }
    let w = 2 * k + 1;
    crate::error::check_budget(
        (alphabets[0] as u128)
            .saturating_mul(crate::error::pow_count(alphabets[1], w))
            .saturating_mul(crate::error::pow_count(alphabets[2], w)),
        1 << 26,
    )?;
    let dims = [alphabets[0], alphabets[1].pow(w as u32), alphabets[2].pow(w as u32)];
    let mut counts = vec![0u64; dims[0] * dims[1] * dims[2]];
    for i in k..n - k {
        let zi = word_index(&z[i - k..=i + k], alphabets[1]);
        let yi = word_index(&y[i - k..=i + k], alphabets[2]);
        counts[(x[i] * dims[1] + zi) * dims[2] + yi] += 1;
    }
    Ok(EmpiricalJoint {
        k,
        dims,
        counts,
        n_effective: n - 2 * k,
    })
}

/// `(1/n) sum Λ(x_i, y_i)`.
pub fn block_loss(x: &[usize], y: &[usize], loss: &LossSpec) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.is_empty() {
        return Err(Error::InvalidParameter("empty sequences".into()));
    }
    Ok(x.iter().zip(y).map(|(&a, &b)| loss.get(a, b)).sum::<f64>() / x.len() as f64)
}

/// The Bayes response to a posterior: `argmin_y sum_x p(x) Λ(x, y)`, ties to
/// the lowest index. Returns the response and its expected loss.
pub fn bayes_response(posterior: &[f64], loss: &LossSpec) -> (usize, f64) {
    (0..loss.reproductions())
        .map(|y| {
            let e: f64 = posterior.iter().enumerate().map(|(x, p)| p * loss.get(x, y)).sum();
            (y, e)
        })
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Symbol-by-symbol Bayes response to the full-sequence posterior.
pub fn bayes_denoiser(src: &Source, ch: &Channel, z: &[usize], loss: &LossSpec) -> Result<SamplePath> {
    if loss.sources() != src.alphabet_size() {
        return Err(Error::DimensionMismatch {
            expected: src.alphabet_size(),
            got: loss.sources(),
        });
    }
    let fb = forward_backward(src, ch, z)?;
    Ok(SamplePath {
        symbols: (0..z.len()).map(|i| bayes_response(fb.row(i), loss).0).collect(),
        seed: 0,
    })
}

/// [`bayes_denoiser`] as a [`Denoiser`].
#[derive(Debug, Clone)]
pub struct BayesDenoiser {
    pub src: Source,
    pub ch: Channel,
    pub loss: LossSpec,
}

impl Denoiser for BayesDenoiser {
    fn reconstruct(&self, z: &[usize], _seed: u64) -> Result<Vec<usize>> {
        bayes_denoiser(&self.src, &self.ch, z, &self.loss).map(|p| p.symbols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::erasure_posterior_closed_form;
    use crate::rng::Stream;

    #[test]
    fn empirical_joint_examples() {
        let ones = [1usize; 7];
        let ej = empirical_joint(&ones, &ones, &ones, 1, [2, 2, 2]).unwrap();
        assert_eq!(ej.n_effective(), 5);
        assert_eq!(ej.count(1, &[1, 1, 1], &[1, 1, 1], [2, 2, 2]), 5);
        assert_eq!(ej.counts().iter().sum::<u64>(), 5);

        let x = [0, 1, 1, 0, 1];
        let z = [0, 1, 0, 0, 1];
        let y = [1, 1, 0, 0, 0];
        let ej = empirical_joint(&x, &z, &y, 1, [2, 2, 2]).unwrap();
        // windows at i = 1, 2, 3
        assert_eq!(ej.count(1, &[0, 1, 0], &[1, 1, 0], [2, 2, 2]), 1);
        assert_eq!(ej.count(1, &[1, 0, 0], &[1, 0, 0], [2, 2, 2]), 1);
        assert_eq!(ej.count(0, &[0, 0, 1], &[0, 0, 0], [2, 2, 2]), 1);
        assert_eq!(ej.counts().iter().sum::<u64>(), 3);
        assert!((ej.to_joint().total_mass() - 1.0).abs() < 1e-15);

        let k0 = empirical_joint(&x, &z, &y, 0, [2, 2, 2]).unwrap();
        assert_eq!(k0.counts(), &[1, 1, 0, 0, 1, 0, 1, 1]);
        assert!(empirical_joint(&x, &z, &y, 2, [2, 2, 2]).is_ok());
        assert!(empirical_joint(&x[..4], &z[..4], &y[..4], 2, [2, 2, 2]).is_err());
    }

    #[test]
    fn block_loss_examples() {
        let h = LossSpec::hamming(2);
        assert_eq!(block_loss(&[0, 1, 1], &[0, 1, 1], &h).unwrap(), 0.0);
        assert_eq!(block_loss(&[0, 1, 1], &[1, 0, 0], &h).unwrap(), 1.0);
        assert_eq!(block_loss(&[0, 1, 1, 0], &[0, 1, 0, 0], &h).unwrap(), 0.25);
    }

    #[test]
    fn bayes_responses() {
        let h = LossSpec::hamming(3);
        assert_eq!(bayes_response(&[0.2, 0.5, 0.3], &h).0, 1);
        let mse = LossSpec::mse(&[0.0, 1.0]).unwrap();
        assert_eq!(bayes_response(&[0.6, 0.4], &mse).0, 0);
        assert_eq!(bayes_response(&[0.4, 0.6], &mse).0, 1);
        let mse3 = LossSpec::mse(&[0.0, 1.0, 2.0]).unwrap();
        // mean 1.1 -> nearest point 1
        assert_eq!(bayes_response(&[0.3, 0.3, 0.4], &mse3).0, 1);
    }

    #[test]
    fn erasure_bayes_uses_nearer_neighbour() {
        let mut rng = Stream::new(31);
        let p_s = 0.15;
        let src = Source::binary_symmetric(p_s).unwrap();
        let ch = Channel::binary_erasure(0.6).unwrap();
        let h = LossSpec::hamming(2);
        for _ in 0..300 {
            let x = src.sample_with(40, &mut rng);
            let z = ch.transmit(&x, &mut rng);
            let out = bayes_denoiser(&src, &ch, &z, &h).unwrap().symbols;
            for i in 0..40 {
                let left = (0..=i).rev().find(|&j| z[j] != Channel::ERASURE).map(|j| (i - j, z[j]));
                let right = (i + 1..40).find(|&j| z[j] != Channel::ERASURE).map(|j| (j - i, z[j]));
                let rule = match (left, right) {
                    (Some((dl, vl)), Some((dr, vr))) if dl != dr || vl == vr => {
                        Some(if dl <= dr { vl } else { vr })
                    }
                    (Some((_, v)), None) | (None, Some((_, v))) => Some(v),
                    _ => None,
                };
                if let Some(v) = rule {
                    assert_eq!(out[i], v);
                    let post = erasure_posterior_closed_form(p_s, 0.6, &z, i).unwrap();
                    assert!(post[v] >= 0.5);
                }
            }
        }
    }
}
