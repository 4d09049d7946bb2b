//! Stationary sources: i.i.d. laws and finite-state Markov chains.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_budget, pow_count};
use crate::math;
use crate::matrix::{self, Matrix};
use crate::prob::{self, JointPmf, Pmf};
use crate::rng::Stream;
use crate::{Error, Result};

/// Largest `|X|^k` enumerated by [`Source::block_pmf`].
pub const BLOCK_BUDGET: u128 = 1 << 22;

/// A sampled sequence of alphabet indices and the seed that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePath {
    pub symbols: Vec<usize>,
    pub seed: u64,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Stationary, irreducible, aperiodic Markov chain started from its stationary law.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSource {
    transition: Matrix,
    stationary: Pmf,
}

impl MarkovSource {
    pub fn new(transition: Matrix) -> Result<Self> {
        let stationary = stationary_distribution(&transition)?;
        Ok(Self {
            transition,
            stationary,
        })
    }

    /// Two-state chain that switches state with probability `p_s`.
    pub fn binary_symmetric(p_s: f64) -> Result<Self> {
        Self::new(Matrix::from_rows(&[[1.0 - p_s, p_s], [p_s, 1.0 - p_s]])?)
    }

    pub fn transition(&self) -> &Matrix {
        &self.transition
    }

    pub fn stationary(&self) -> &Pmf {
        &self.stationary
    }
}

/// An i.i.d. source.
#[derive(Debug, Clone, PartialEq)]
pub struct IidSource {
    law: Pmf,
    // every row equals `law`; lets inference treat both sources alike
    transition: Matrix,
}

impl IidSource {
    pub fn new(law: Pmf) -> Self {
        let rows: Vec<Vec<f64>> = (0..law.len()).map(|_| law.probs().to_vec()).collect();
        let transition = Matrix::from_rows(&rows).expect("square");
        Self { law, transition }
    }

    pub fn law(&self) -> &Pmf {
        &self.law
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Iid(IidSource),
    Markov(MarkovSource),
}

impl From<IidSource> for Source {
    fn from(s: IidSource) -> Self {
        Source::Iid(s)
    }
}

impl From<MarkovSource> for Source {
    fn from(s: MarkovSource) -> Self {
        Source::Markov(s)
    }
}

impl Source {
    pub fn iid(law: Pmf) -> Self {
        Source::Iid(IidSource::new(law))
    }

    pub fn binary_symmetric(p_s: f64) -> Result<Self> {
        Ok(Source::Markov(MarkovSource::binary_symmetric(p_s)?))
    }

    pub fn alphabet_size(&self) -> usize {
        self.initial().len()
    }

    /// Law of every single symbol (the stationary law).
    pub fn initial(&self) -> &Pmf {
        match self {
            Source::Iid(s) => &s.law,
            Source::Markov(m) => &m.stationary,
        }
    }

    pub fn transition(&self) -> &Matrix {
        match self {
            Source::Iid(s) => &s.transition,
            Source::Markov(m) => &m.transition,
        }
    }

    pub fn is_memoryless(&self) -> bool {
        matches!(self, Source::Iid(_))
    }

    /// `X_1 ~ pi`, `X_{i+1} ~ M[X_i, .]`, driven by the stream seeded with `seed`.
    pub fn sample_path(&self, n: usize, seed: u64) -> Result<SamplePath> {
        if n == 0 {
            return Err(Error::InvalidParameter("path length must be >= 1".into()));
        }
        let mut rng = Stream::new(seed);
        Ok(SamplePath {
            symbols: self.sample_with(n, &mut rng),
            seed,
        })
    }

    pub(crate) fn sample_with(&self, n: usize, rng: &mut Stream) -> Vec<usize> {
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return out;
        }
        let mut state = rng.categorical(self.initial().probs());
        out.push(state);
        for _ in 1..n {
            state = rng.categorical(self.transition().row(state));
            out.push(state);
        }
        out
    }

    /// Exact law of `X^k`, one axis per position.
    pub fn block_pmf(&self, k: usize) -> Result<JointPmf> {
        if k == 0 {
            return Err(Error::InvalidParameter("block length must be >= 1".into()));
        }
        let nx = self.alphabet_size();
        check_budget(pow_count(nx, k), BLOCK_BUDGET)?;
        let m = self.transition();
        let mut probs = self.initial().probs().to_vec();
        for _ in 1..k {
            let mut next = Vec::with_capacity(probs.len() * nx);
            for (idx, &p) in probs.iter().enumerate() {
                let last = idx % nx;
                for x in 0..nx {
                    next.push(p * m[(last, x)]);
                }
            }
            probs = next;
        }
        Ok(JointPmf::from_raw(vec![nx; k], probs))
    }

    /// Exact joint of `(Z^k, X^k)` through `ch` as a `|Z|^k x |X|^k` table,
    /// words indexed by [`prob::word_index`].
    pub fn observed_block_joint(&self, ch: &prob::Channel, k: usize) -> Result<Matrix> {
        let nx = self.alphabet_size();
        if ch.inputs() != nx {
            return Err(Error::DimensionMismatch {
                expected: nx,
                got: ch.inputs(),
            });
        }
        let nz = ch.outputs();
        check_budget(pow_count(nx, k).saturating_mul(pow_count(nz, k)), 1 << 24)?;
        let px = self.block_pmf(k)?;
        let (rows, cols) = (nz.pow(k as u32), nx.pow(k as u32));
        let mut joint = Matrix::zeros(rows, cols);
        for (xi, &p) in px.probs().iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let xw = prob::word_symbols(xi, nx, k);
            for zi in 0..rows {
                let zw = prob::word_symbols(zi, nz, k);
                let lik: f64 = xw.iter().zip(&zw).map(|(&x, &z)| ch.prob(x, z)).product();
                joint[(zi, xi)] = p * lik;
            }
        }
        Ok(joint)
    }

    /// Entropy rate in nats per symbol.
    pub fn entropy_rate(&self) -> f64 {
        match self {
            Source::Iid(s) => prob::entropy(&s.law),
            Source::Markov(m) => {
                let pi = m.stationary.probs();
                (0..pi.len())
                    .map(|x| {
                        pi[x]
                            * m.transition
                                .row(x)
                                .iter()
                                .map(|&p| math::neg_p_ln_p(p))
                                .sum::<f64>()
                    })
                    .sum()
            }
        }
    }
}

/// Unique stationary law of an irreducible aperiodic chain.
pub fn stationary_distribution(m: &Matrix) -> Result<Pmf> {
    let n = m.rows();
    if n == 0 || m.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.cols(),
        });
    }
    for r in 0..n {
        Pmf::new(m.row(r).to_vec())?;
    }
    if !is_primitive(m) {
        return Err(Error::NotErgodic);
    }
    // pi (M - I) = 0 with the last equation replaced by sum(pi) = 1.
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(j, i)] = m[(i, j)] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for i in 0..n {
        a[(n - 1, i)] = 1.0;
    }
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let mut pi = matrix::solve(&a, &rhs)?;
    for p in pi.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let pi = Pmf::normalized_from(pi)?;
    let check = m.left_mul(pi.probs());
    let err = check
        .iter()
        .zip(pi.probs())
        .map(|(a, b)| math::abs(a - b))
        .fold(0.0, f64::max);
    if err > 1e-10 {
        return Err(Error::NotErgodic);
    }
    Ok(pi)
}

/// Some power of the support pattern is strictly positive (Wielandt bound).
fn is_primitive(m: &Matrix) -> bool {
    let n = m.rows();
    let support: Vec<bool> = m.as_slice().iter().map(|&p| p > 0.0).collect();
    let bool_mul = |a: &[bool], b: &[bool]| -> Vec<bool> {
        let mut out = vec![false; n * n];
        for i in 0..n {
            for k in 0..n {
                if !a[i * n + k] {
                    continue;
                }
                for j in 0..n {
                    if b[k * n + j] {
                        out[i * n + j] = true;
                    }
                }
            }
        }
        out
    };
    let mut exp = (n - 1) * (n - 1) + 1;
    let mut base = support;
    let mut acc: Option<Vec<bool>> = None;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => bool_mul(&a, &base),
            });
        }
        exp >>= 1;
        if exp > 0 {
            base = bool_mul(&base, &base);
        }
    }
    acc.is_some_and(|a| a.iter().all(|&b| b))
}

/// `P(X_t = . | X_s = .)` for the binary symmetric chain, `gap = t - s`.
pub fn two_point_marginal(p_s: f64, gap: u32) -> Matrix {
    let q = math::powi(1.0 - 2.0 * p_s, gap as i32);
    let same = 0.5 * (q + 1.0);
    let diff = 0.5 * (1.0 - q);
    Matrix::from_rows(&[[same, diff], [diff, same]]).expect("2x2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::binary_entropy;

    #[test]
    fn observed_block_joint_marginals() {
        let src = Source::binary_symmetric(0.2).unwrap();
        let ch = prob::Channel::binary_erasure(0.3).unwrap();
        let j = src.observed_block_joint(&ch, 2).unwrap();
        assert_eq!((j.rows(), j.cols()), (9, 4));
        let px = src.block_pmf(2).unwrap();
        for xi in 0..4 {
            let col: f64 = (0..9).map(|zi| j[(zi, xi)]).sum();
            assert!((col - px.probs()[xi]).abs() < 1e-15);
        }
        // both erased, any x: p_e^2 times the block law
        assert!((j[(8, 1)] - 0.09 * 0.1).abs() < 1e-15);
    }

    #[test]
    fn stationary_examples() {
        let s = MarkovSource::binary_symmetric(0.3).unwrap();
        assert!((s.stationary()[0] - 0.5).abs() < 1e-15);
        let m = Matrix::from_rows(&[[0.9, 0.1], [0.2, 0.8]]).unwrap();
        let pi = stationary_distribution(&m).unwrap();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-12 && (pi[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn non_ergodic_chains_rejected() {
        assert_eq!(
            stationary_distribution(&Matrix::identity(2)),
            Err(Error::NotErgodic)
        );
        // periodic
        let flip = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(stationary_distribution(&flip), Err(Error::NotErgodic));
        assert!(MarkovSource::binary_symmetric(0.0).is_err());
    }

    #[test]
    fn sticky_chain_stays_constant() {
        let src = Source::binary_symmetric(1e-9).unwrap();
        let path = src.sample_path(1000, 5).unwrap();
        assert!(path.symbols.iter().all(|&s| s == path.symbols[0]));
    }

    #[test]
    fn sampling_is_deterministic_in_seed() {
        let src = Source::binary_symmetric(0.2).unwrap();
        let a = src.sample_path(500, 11).unwrap();
        let b = src.sample_path(500, 11).unwrap();
        let c = src.sample_path(500, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.symbols, c.symbols);
        assert!(src.sample_path(0, 1).is_err());
    }

    #[test]
    fn first_symbol_follows_stationary_law() {
        let m = Matrix::from_rows(&[[0.9, 0.1], [0.2, 0.8]]).unwrap();
        let src = Source::Markov(MarkovSource::new(m).unwrap());
        let trials = 1_000_000u64;
        let ones = (0..trials)
            .filter(|&s| src.sample_path(1, crate::rng::derive_seed(3, s)).unwrap().symbols[0] == 1)
            .count() as f64;
        let p = 1.0 / 3.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((ones / trials as f64 - p).abs() < 3.0 * sigma);
    }

    #[test]
    fn long_path_frequencies_match_stationary() {
        let m = Matrix::from_rows(&[[0.9, 0.1], [0.2, 0.8]]).unwrap();
        let src = Source::Markov(MarkovSource::new(m).unwrap());
        let n = 1_000_000;
        let path = src.sample_path(n, 99).unwrap();
        let freq = path.symbols.iter().filter(|&&s| s == 1).count() as f64 / n as f64;
        // standard error of a Markov mean: var * (1 + lambda) / (1 - lambda), lambda = 0.7
        let p = 1.0 / 3.0;
        let se = (p * (1.0 - p) * (1.7 / 0.3) / n as f64).sqrt();
        assert!((freq - p).abs() < 4.0 * se, "freq {freq}");
    }

    #[test]
    fn block_pmf_examples() {
        let src = Source::binary_symmetric(0.2).unwrap();
        assert_eq!(src.block_pmf(1).unwrap().probs(), src.initial().probs());
        let b2 = src.block_pmf(2).unwrap();
        let expect = [0.4, 0.1, 0.1, 0.4];
        for (a, b) in b2.probs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let m = Matrix::from_rows(&[[0.5, 0.3, 0.2], [0.1, 0.6, 0.3], [0.3, 0.3, 0.4]]).unwrap();
        let src = Source::Markov(MarkovSource::new(m).unwrap());
        for k in 2..=6 {
            let big = src.block_pmf(k).unwrap();
            let axes: Vec<usize> = (0..k - 1).collect();
            let marg = big.marginal(&axes).unwrap();
            let small = src.block_pmf(k - 1).unwrap();
            for (a, b) in marg.probs().iter().zip(small.probs()) {
                assert!((a - b).abs() < 1e-15);
            }
            // stationarity: dropping the first coordinate gives the same law
            let tail: Vec<usize> = (1..k).collect();
            let marg = big.marginal(&tail).unwrap();
            for (a, b) in marg.probs().iter().zip(small.probs()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
        assert!(matches!(
            Source::iid(Pmf::uniform(4)).block_pmf(12),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn two_point_marginal_matches_matrix_power() {
        for &p_s in &[0.05, 0.1, 0.3, 0.45] {
            let m = MarkovSource::binary_symmetric(p_s).unwrap();
            for gap in 0..=30u32 {
                let oracle = m.transition().pow(gap).unwrap();
                assert!(two_point_marginal(p_s, gap).max_abs_diff(&oracle) < 1e-14);
            }
        }
        assert_eq!(two_point_marginal(0.3, 0), Matrix::identity(2));
        assert!((two_point_marginal(0.1, 2)[(0, 0)] - 0.82).abs() < 1e-15);
    }

    #[test]
    fn entropy_rate_examples() {
        let iid = Source::iid(Pmf::new(vec![0.2, 0.5, 0.3]).unwrap());
        assert!((iid.entropy_rate() - prob::entropy(iid.initial())).abs() < 1e-15);
        let half = Source::binary_symmetric(0.5).unwrap();
        assert!((half.entropy_rate() - core::f64::consts::LN_2).abs() < 1e-15);
        let s = Source::binary_symmetric(0.2).unwrap();
        assert!((s.entropy_rate() - 0.500_402_423_538_187_9).abs() < 1e-12);
        assert!((s.entropy_rate() - binary_entropy(0.2)).abs() < 1e-15);
    }

    #[test]
    fn block_entropy_rate_decreases_toward_entropy_rate() {
        let m = Matrix::from_rows(&[[0.7, 0.2, 0.1], [0.1, 0.8, 0.1], [0.3, 0.3, 0.4]]).unwrap();
        let src = Source::Markov(MarkovSource::new(m).unwrap());
        let rate = src.entropy_rate();
        let mut prev = f64::INFINITY;
        for k in 1..=6 {
            let per = src.block_pmf(k).unwrap().entropy() / k as f64;
            assert!(per <= prev + 1e-12);
            assert!(per >= rate - 1e-12);
            prev = per;
        }
    }
}
