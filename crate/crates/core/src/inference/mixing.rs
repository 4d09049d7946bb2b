use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_budget, pow_count};
use crate::exec::Executor;
use crate::math;
use crate::matrix::Matrix;
use crate::prob::{word_symbols, Channel};
use crate::rng::{derive_seed, Stream};
use crate::source::Source;
use crate::{Error, Result};

/// Extra tail length added to `k` when none is given.
pub const DEFAULT_EXTRA_WINDOW: usize = 16;
/// Number of sampled tail pairs when none is given.
pub const DEFAULT_TAILS: usize = 512;

const CENTER_BUDGET: u128 = 1 << 20;
const EXHAUSTIVE_BUDGET: u128 = 1 << 28;
const CHUNK: usize = 2048;

/// Estimate of the double-sided mixing coefficient at radius `k`.
///
/// Sampled estimates maximize over finitely many tails and are therefore lower
/// bounds on the true coefficient. Exhaustive estimates maximize over every
/// tail of length `extension_window` and are exact for that window.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingEstimate {
    pub k: usize,
    pub delta_k: f64,
    pub extension_window: usize,
    pub tails_sampled: usize,
    pub exhaustive: bool,
    pub centers_evaluated: usize,
}

struct Model<'a> {
    nx: usize,
    m: &'a Matrix,
    ch: &'a Channel,
    pi: &'a [f64],
}

impl<'a> Model<'a> {
    fn new(src: &'a Source, ch: &'a Channel) -> Result<Self> {
        if src.alphabet_size() != ch.inputs() {
            return Err(Error::DimensionMismatch {
                expected: ch.inputs(),
                got: src.alphabet_size(),
            });
        }
        Ok(Self {
            nx: src.alphabet_size(),
            m: src.transition(),
            ch,
            pi: src.initial().probs(),
        })
    }

    /// `P(X_{-k} | left tail)` with the tail ending just before the window.
    fn left_message(&self, tail: &[usize]) -> Option<Vec<f64>> {
        let mut f = self.pi.to_vec();
        for (t, &z) in tail.iter().enumerate() {
            if t > 0 {
                f = self.m.left_mul(&f);
            }
            for (x, v) in f.iter_mut().enumerate() {
                *v *= self.ch.prob(x, z);
            }
            normalize(&mut f)?;
        }
        if !tail.is_empty() {
            f = self.m.left_mul(&f);
        }
        Some(f)
    }

    /// Likelihood of the right tail given `X_k`, up to scale.
    fn right_message(&self, tail: &[usize]) -> Option<Vec<f64>> {
        let mut b = vec![1.0; self.nx];
        for &z in tail.iter().rev() {
            let weighted: Vec<f64> = (0..self.nx).map(|x| b[x] * self.ch.prob(x, z)).collect();
            b = self.m.right_mul(&weighted);
            normalize(&mut b)?;
        }
        Some(b)
    }

    /// Factors of the window: `alpha_0 = a^T A`, `beta_0 = B b`.
    fn center_factors(&self, window: &[usize]) -> (Matrix, Matrix) {
        let k = window.len() / 2;
        let mut a = Matrix::zeros(self.nx, self.nx);
        for x in 0..self.nx {
            a[(x, x)] = self.ch.prob(x, window[0]);
        }
        for &z in &window[1..=k] {
            a = self.step(&a, z);
        }
        let mut b = Matrix::identity(self.nx);
        for &z in &window[k + 1..] {
            b = self.step(&b, z);
        }
        (a, b)
    }

    /// `acc * M * diag(e_z)`, rescaled so the largest entry is one.
    fn step(&self, acc: &Matrix, z: usize) -> Matrix {
        let mut out = acc.mul(self.m).expect("square");
        for r in 0..self.nx {
            for c in 0..self.nx {
                out[(r, c)] *= self.ch.prob(c, z);
            }
        }
        let top = out.as_slice().iter().copied().fold(0.0, f64::max);
        if top > 0.0 {
            for r in 0..self.nx {
                for v in out.row_mut(r) {
                    *v /= top;
                }
            }
        }
        out
    }

    /// Largest deviation over the given tail pairs for one center window;
    /// `None` when the window itself has zero probability.
    fn center_deviation(&self, window: &[usize], tails: &[(Vec<f64>, Vec<f64>)]) -> Option<f64> {
        let (a, b) = self.center_factors(window);
        let ones = vec![1.0; self.nx];
        let mut base: Vec<f64> = a
            .left_mul(self.pi)
            .iter()
            .zip(b.right_mul(&ones))
            .map(|(u, v)| u * v)
            .collect();
        normalize(&mut base)?;
        let mut worst = 0.0f64;
        let mut post = vec![0.0; self.nx];
        for (left, right) in tails {
            let u = a.left_mul(left);
            let v = b.right_mul(right);
            for x in 0..self.nx {
                post[x] = u[x] * v[x];
            }
            if normalize(&mut post).is_none() {
                continue;
            }
            for x in 0..self.nx {
                worst = worst.max(math::abs(post[x] - base[x]));
            }
        }
        Some(worst)
    }
}

fn normalize(v: &mut [f64]) -> Option<()> {
    let s: f64 = v.iter().sum();
    if s.is_nan() || s <= 0.0 {
        return None;
    }
    for x in v.iter_mut() {
        *x /= s;
    }
    Some(())
}

fn max_over_centers<E: Executor>(
    model: &Model<'_>,
    nz: usize,
    k: usize,
    tails: &[(Vec<f64>, Vec<f64>)],
    exec: &E,
) -> (f64, usize) {
    let len = 2 * k + 1;
    let total = nz.pow(len as u32);
    let chunks = total.div_ceil(CHUNK);
    let parts = exec.map_indexed(chunks, |c| {
        let mut worst = 0.0f64;
        let mut seen = 0usize;
        for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
            let window = word_symbols(idx, nz, len);
            if let Some(d) = model.center_deviation(&window, tails) {
                worst = worst.max(d);
                seen += 1;
            }
        }
        (worst, seen)
    });
    parts
        .into_iter()
        .fold((0.0, 0), |(w, s), (pw, ps)| (w.max(pw), s + ps))
}

fn sampled_tails(
    src: &Source,
    model: &Model<'_>,
    k: usize,
    w: usize,
    m: usize,
    seed: u64,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let span = 2 * (k + w) + 1;
    (0..m)
        .filter_map(|j| {
            let mut rng = Stream::derived(seed, j as u64);
            let x = src.sample_with(span, &mut rng);
            let z = model.ch.transmit(&x, &mut rng);
            let left = model.left_message(&z[..w])?;
            let right = model.right_message(&z[w + 2 * k + 1..])?;
            Some((left, right))
        })
        .collect()
}

/// Sampled estimate of `delta_k`: every center window of radius `k` against
/// `m` tail pairs of length `w` drawn from the model.
pub fn mixing_coefficient<E: Executor>(
    src: &Source,
    ch: &Channel,
    k: usize,
    w: usize,
    m: usize,
    seed: u64,
    exec: &E,
) -> Result<MixingEstimate> {
    let model = Model::new(src, ch)?;
    check_budget(pow_count(ch.outputs(), 2 * k + 1), CENTER_BUDGET)?;
    let tails = sampled_tails(src, &model, k, w, m, seed);
    let (delta_k, centers) = max_over_centers(&model, ch.outputs(), k, &tails, exec);
    Ok(MixingEstimate {
        k,
        delta_k: delta_k.min(1.0),
        extension_window: w,
        tails_sampled: m,
        exhaustive: false,
        centers_evaluated: centers,
    })
}

/// `delta_k` maximized over every pair of tails of length `w`.
pub fn mixing_coefficient_exhaustive(
    src: &Source,
    ch: &Channel,
    k: usize,
    w: usize,
) -> Result<MixingEstimate> {
    let model = Model::new(src, ch)?;
    let nz = ch.outputs();
    let tails_each = pow_count(nz, w);
    check_budget(
        pow_count(nz, 2 * k + 1).saturating_mul(tails_each.saturating_mul(tails_each)),
        EXHAUSTIVE_BUDGET,
    )?;
    let count = tails_each as usize;
    let lefts: Vec<Vec<f64>> = (0..count)
        .filter_map(|i| model.left_message(&word_symbols(i, nz, w)))
        .collect();
    let rights: Vec<Vec<f64>> = (0..count)
        .filter_map(|i| model.right_message(&word_symbols(i, nz, w)))
        .collect();
    let mut tails = Vec::with_capacity(lefts.len() * rights.len());
    for l in &lefts {
        for r in &rights {
            tails.push((l.clone(), r.clone()));
        }
    }
    let (delta_k, centers) = max_over_centers(&model, nz, k, &tails, &crate::exec::Sequential);
    Ok(MixingEstimate {
        k,
        delta_k: delta_k.min(1.0),
        extension_window: w,
        tails_sampled: tails.len(),
        exhaustive: true,
        centers_evaluated: centers,
    })
}

/// Smallest radius whose sampled mixing estimate falls below `tol`, capped at
/// `k_max`.
///
/// Centers are sampled from the model together with their tails (64 of each,
/// tails of length `k + 16`), so large radii stay cheap.
pub fn mixing_radius<E: Executor>(
    src: &Source,
    ch: &Channel,
    tol: f64,
    k_max: usize,
    seed: u64,
    exec: &E,
) -> Result<usize> {
    const SAMPLES: usize = 64;
    let model = Model::new(src, ch)?;
    if src.is_memoryless() {
        return Ok(0);
    }
    for k in 0..k_max {
        let w = k + DEFAULT_EXTRA_WINDOW;
        let round = derive_seed(seed, k as u64);
        let tails = sampled_tails(src, &model, k, w, SAMPLES, round);
        let worst = exec
            .map_indexed(SAMPLES, |j| {
                let mut rng = Stream::derived(derive_seed(round, 1 << 32), j as u64);
                let x = src.sample_with(2 * k + 1, &mut rng);
                let z = ch.transmit(&x, &mut rng);
                model.center_deviation(&z, &tails).unwrap_or(0.0)
            })
            .into_iter()
            .fold(0.0, f64::max);
        if worst < tol {
            return Ok(k);
        }
    }
    Ok(k_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::inference::windowed_posterior;
    use crate::prob::Pmf;

    #[test]
    fn factorization_matches_direct_windowed_posterior() {
        let src = Source::binary_symmetric(0.2).unwrap();
        let ch = Channel::binary_erasure(0.3).unwrap();
        let model = Model::new(&src, &ch).unwrap();
        let mut rng = Stream::new(3);
        for _ in 0..200 {
            let k = rng.below(4);
            let w = 1 + rng.below(5);
            let x = src.sample_with(2 * (k + w) + 1, &mut rng);
            let z = ch.transmit(&x, &mut rng);
            let center = &z[w..w + 2 * k + 1];
            let direct_small = windowed_posterior(&src, &ch, center).unwrap();
            let direct_big = windowed_posterior(&src, &ch, &z).unwrap();
            let tails = vec![(
                model.left_message(&z[..w]).unwrap(),
                model.right_message(&z[w + 2 * k + 1..]).unwrap(),
            )];
            let dev = model.center_deviation(center, &tails).unwrap();
            let expected = (direct_small[0] - direct_big[0]).abs();
            assert!((dev - expected).abs() < 1e-12, "{dev} vs {expected}");
        }
    }

    #[test]
    fn memoryless_or_noiseless_models_do_not_mix() {
        let iid = Source::iid(Pmf::new(alloc::vec![0.3, 0.7]).unwrap());
        let bsc = Channel::binary_symmetric(0.1).unwrap();
        for k in 0..3 {
            let est = mixing_coefficient(&iid, &bsc, k, k + 4, 32, 1, &Sequential).unwrap();
            assert!(est.delta_k < 1e-15);
        }
        let markov = Source::binary_symmetric(0.2).unwrap();
        let est = mixing_coefficient(&markov, &Channel::identity(2), 0, 8, 32, 1, &Sequential).unwrap();
        assert_eq!(est.delta_k, 0.0);
        assert_eq!(mixing_radius(&iid, &bsc, 1e-6, 32, 0, &Sequential).unwrap(), 0);
    }

    #[test]
    fn exhaustive_dominates_sampled_at_same_window() {
        let src = Source::binary_symmetric(0.2).unwrap();
        let ch = Channel::binary_symmetric(0.1).unwrap();
        let ex = mixing_coefficient_exhaustive(&src, &ch, 1, 6).unwrap();
        let sampled = mixing_coefficient(&src, &ch, 1, 6, 256, 8, &Sequential).unwrap();
        assert!(ex.exhaustive && ex.tails_sampled == 4096);
        assert!(sampled.delta_k <= ex.delta_k + 1e-15);
        assert!(ex.delta_k > 0.0 && ex.delta_k < 1.0);
        assert!(mixing_coefficient_exhaustive(&src, &ch, 6, 8).is_err());
    }

    #[test]
    fn decays_with_radius() {
        let src = Source::binary_symmetric(0.2).unwrap();
        let ch = Channel::binary_symmetric(0.1).unwrap();
        let deltas: Vec<f64> = (0..6)
            .map(|k| mixing_coefficient(&src, &ch, k, k + 16, 128, 5, &Sequential).unwrap().delta_k)
            .collect();
        for pair in deltas.windows(2) {
            assert!(pair[1] < pair[0], "{deltas:?}");
        }
        let r = mixing_radius(&src, &ch, 1e-6, 32, 11, &Sequential).unwrap();
        assert!(r > 3 && r < 32, "radius {r}");
    }
}
