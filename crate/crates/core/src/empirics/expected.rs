use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::codec::{optimal_small_code, Denoiser, SmallCode};
use crate::error::{check_budget, pow_count};
use crate::exec::Executor;
use crate::inference::{mixing_coefficient_exhaustive, windowed_posterior, MixingEstimate};
use crate::math;
use crate::prob::{matched_distortion, tv_slices, word_index, word_symbols, Channel, JointPmf};
use crate::rng::Stream;
use crate::source::Source;
use crate::{Error, Result};

use super::empirical_joint;

/// Floating-point slack in the lemma comparison.
const LEMMA_TOL: f64 = 1e-12;

/// Largest `|X|^n |Z|^n` enumerated in exact mode.
pub const EXACT_BUDGET: u128 = 1 << 24;

/// Expected window distribution `Q^(n)` over `(x_0, z-window, y-window)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedEmpirical {
    pub k: usize,
    pub n: usize,
    /// `[|X|, |Z|, |Y|]`.
    pub alphabets: [usize; 3],
    /// Dimensions `[|X|, |Z|^(2k+1), |Y|^(2k+1)]`.
    pub q: JointPmf,
    /// Per-cell standard errors in Monte Carlo mode.
    pub std_err: Option<Vec<f64>>,
}

impl ExpectedEmpirical {
    fn window(&self) -> usize {
        2 * self.k + 1
    }
}

fn check_shape(n: usize, k: usize) -> Result<()> {
    if n <= 2 * k {
        return Err(Error::InvalidParameter(alloc::format!("need n > 2k, got n = {n}, k = {k}")));
    }
    Ok(())
}

/// Exact `Q^(n)` by enumerating every `(x^n, z^n)` for a deterministic code.
pub fn expected_empirical<D: Denoiser + ?Sized>(
    src: &Source,
    ch: &Channel,
    code: &D,
    n: usize,
    k: usize,
    ny: usize,
) -> Result<ExpectedEmpirical> {
    check_shape(n, k)?;
    if !code.is_deterministic() {
        return Err(Error::InvalidParameter("exact mode needs a deterministic code".into()));
    }
    let (nx, nz) = (src.alphabet_size(), ch.outputs());
    check_budget(pow_count(nx, n).saturating_mul(pow_count(nz, n)), EXACT_BUDGET)?;
    let w = 2 * k + 1;
    let dims = [nx, nz.pow(w as u32), ny.pow(w as u32)];
    let mut q = vec![0.0; dims[0] * dims[1] * dims[2]];
    let px = src.block_pmf(n)?;
    let xwords: Vec<(Vec<usize>, f64)> = px
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| (word_symbols(i, nx, n), p))
        .collect();
    let scale = 1.0 / (n - 2 * k) as f64;
    for zi in 0..nz.pow(n as u32) {
        let z = word_symbols(zi, nz, n);
        let mut weights = Vec::with_capacity(xwords.len());
        for (x, p) in &xwords {
            let lik: f64 = x.iter().zip(&z).map(|(&a, &b)| ch.prob(a, b)).product();
            if lik > 0.0 {
                weights.push((x, p * lik));
            }
        }
        if weights.is_empty() {
            continue;
        }
        let y = code.reconstruct(&z, 0)?;
        if y.len() != n || y.iter().any(|&s| s >= ny) {
            return Err(Error::InvalidParameter("code output outside reproduction space".into()));
        }
        for i in k..n - k {
            let zw = word_index(&z[i - k..=i + k], nz);
            let yw = word_index(&y[i - k..=i + k], ny);
            for (x, p) in &weights {
                q[(x[i] * dims[1] + zw) * dims[2] + yw] += p * scale;
            }
        }
    }
    Ok(ExpectedEmpirical {
        k,
        n,
        alphabets: [nx, nz, ny],
        q: JointPmf::from_raw(dims.to_vec(), q),
        std_err: None,
    })
}

/// Monte Carlo `Q^(n)`: the average of per-trial empirical joints.
#[allow(clippy::too_many_arguments)]
pub fn expected_empirical_mc<D: Denoiser + ?Sized, E: Executor>(
    src: &Source,
    ch: &Channel,
    code: &D,
    n: usize,
    k: usize,
    ny: usize,
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<ExpectedEmpirical> {
    check_shape(n, k)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let alphabets = [src.alphabet_size(), ch.outputs(), ny];
    let per_trial = exec.map_indexed(trials, |t| {
        let mut rng = Stream::derived(seed, t as u64);
        let x = src.sample_with(n, &mut rng);
        let z = ch.transmit(&x, &mut rng);
        let y = code.reconstruct(&z, rng.next_u64())?;
        empirical_joint(&x, &z, &y, k, alphabets).map(|e| e.to_joint())
    });
    let per_trial: Vec<JointPmf> = per_trial.into_iter().collect::<Result<_>>()?;
    let dims = per_trial[0].dims().to_vec();
    let cells = per_trial[0].probs().len();
    let mut mean = vec![0.0; cells];
    for j in &per_trial {
        for (m, p) in mean.iter_mut().zip(j.probs()) {
            *m += p;
        }
    }
    let t = trials as f64;
    mean.iter_mut().for_each(|m| *m /= t);
    let mut var = vec![0.0; cells];
    for j in &per_trial {
        for ((v, m), p) in var.iter_mut().zip(&mean).zip(j.probs()) {
            *v += (p - m) * (p - m);
        }
    }
    let std_err = if trials > 1 {
        var.iter().map(|v| math::sqrt(v / (t - 1.0) / t)).collect()
    } else {
        vec![0.0; cells]
    };
    Ok(ExpectedEmpirical {
        k,
        n,
        alphabets,
        q: JointPmf::from_raw(dims, mean),
        std_err: Some(std_err),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovViolation {
    pub max_tv: f64,
    pub mass_weighted_tv: f64,
    /// `|X| delta_k`.
    pub bound: f64,
    pub delta_k: f64,
}

/// Distance between `Q(X_0 | z, y)` and `P(X_0 | z)` over every window pair
/// with positive mass.
pub fn markov_violation(q: &ExpectedEmpirical, src: &Source, ch: &Channel, delta_k: f64) -> Result<MarkovViolation> {
    let [nx, nz, _] = q.alphabets;
    let dims = q.q.dims();
    let probs = q.q.probs();
    let w = q.window();
    let mut posteriors: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut max_tv = 0.0f64;
    let mut weighted = 0.0;
    let mut mass_total = 0.0;
    for zi in 0..dims[1] {
        for yi in 0..dims[2] {
            let cond: Vec<f64> = (0..nx).map(|x| probs[(x * dims[1] + zi) * dims[2] + yi]).collect();
            let mass: f64 = cond.iter().sum();
            if mass <= 0.0 {
                continue;
            }
            let post = match posteriors.entry(zi) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(windowed_posterior(src, ch, &word_symbols(zi, nz, w))?.into_vec()),
            };
            let cond: Vec<f64> = cond.iter().map(|c| c / mass).collect();
            let tv = tv_slices(&cond, post);
            max_tv = max_tv.max(tv);
            weighted += mass * tv;
            mass_total += mass;
        }
    }
    Ok(MarkovViolation {
        max_tv,
        mass_weighted_tv: if mass_total > 0.0 { weighted / mass_total } else { 0.0 },
        bound: nx as f64 * delta_k,
        delta_k,
    })
}

/// Total variation between the `(Z-window, Y-window)` marginal of `Q^(n)`
/// and the exact `P(Z-window, X-window)`.
pub fn convergence_gap(q: &ExpectedEmpirical, src: &Source, ch: &Channel) -> Result<f64> {
    let [nx, _, ny] = q.alphabets;
    if nx != ny {
        return Err(Error::DimensionMismatch { expected: nx, got: ny });
    }
    let exact = src.observed_block_joint(ch, q.window())?;
    let marginal = q.q.marginal(&[1, 2])?;
    Ok(tv_slices(marginal.probs(), exact.as_slice()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub violation: MarkovViolation,
    pub mixing: MixingEstimate,
    pub code: SmallCode,
    pub holds: bool,
}

/// The Markov-violation bound on an exhaustively enumerated instance: the
/// matched-distortion optimal code with `num_words` words, exact `Q^(n)`, and
/// `delta_k` maximized over all tails of length `w`.
///
/// With `w >= n - 2k - 1` every tail that occurs inside the block is covered.
pub fn lemma_check(
    src: &Source,
    ch: &Channel,
    n: usize,
    k: usize,
    num_words: usize,
    w: usize,
    seed: u64,
) -> Result<LemmaReport> {
    check_shape(n, k)?;
    let rho = matched_distortion(ch, None)?;
    let code = optimal_small_code(src, ch, n, num_words, &rho, seed)?;
    let q = expected_empirical(src, ch, &code, n, k, rho.reproductions())?;
    let mixing = mixing_coefficient_exhaustive(src, ch, k, w)?;
    let violation = markov_violation(&q, src, ch, mixing.delta_k)?;
    Ok(LemmaReport {
        holds: violation.max_tv <= violation.bound + LEMMA_TOL,
        violation,
        mixing,
        code,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{Identity, PosteriorSampler};
    use crate::exec::Sequential;
    use crate::prob::Pmf;

    #[test]
    fn noiseless_identity_is_diagonal() {
        let src = Source::binary_symmetric(0.3).unwrap();
        let ch = Channel::identity(2);
        let q = expected_empirical(&src, &ch, &Identity, 6, 1, 2).unwrap();
        let x0z0 = q.q.marginal(&[0, 1]).unwrap();
        // center symbol of the z window is its middle digit
        for x in 0..2 {
            for zi in 0..8 {
                let z0 = (zi >> 1) & 1;
                if x != z0 {
                    assert_eq!(x0z0.probs()[x * 8 + zi], 0.0);
                }
            }
        }
        assert!((q.q.total_mass() - 1.0).abs() < 1e-12);
        let v = markov_violation(&q, &src, &ch, 0.0).unwrap();
        assert_eq!(v.max_tv, 0.0);
        assert!(convergence_gap(&q, &src, &ch).unwrap() < 1e-12);
    }

    #[test]
    fn window_marginal_is_stationary_law() {
        let src = Source::binary_symmetric(0.2).unwrap();
        let ch = Channel::binary_erasure(0.3).unwrap();
        let rho = matched_distortion(&ch, None).unwrap();
        let code = optimal_small_code(&src, &ch, 5, 4, &rho, 1).unwrap();
        let q = expected_empirical(&src, &ch, &code, 5, 1, 2).unwrap();
        let zm = q.q.marginal(&[1]).unwrap();
        let exact = src.observed_block_joint(&ch, 3).unwrap();
        for zi in 0..27 {
            let row: f64 = exact.row(zi).iter().sum();
            assert!((zm.probs()[zi] - row).abs() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_matches_exact() {
        let src = Source::binary_symmetric(0.25).unwrap();
        let ch = Channel::binary_symmetric(0.15).unwrap();
        let rho = matched_distortion(&ch, None).unwrap();
        let code = optimal_small_code(&src, &ch, 5, 6, &rho, 2).unwrap();
        let exact = expected_empirical(&src, &ch, &code, 5, 1, 2).unwrap();
        let mc = expected_empirical_mc(&src, &ch, &code, 5, 1, 2, 40_000, 3, &Sequential).unwrap();
        let se = mc.std_err.as_ref().unwrap();
        for ((a, b), s) in exact.q.probs().iter().zip(mc.q.probs()).zip(se) {
            assert!((a - b).abs() <= 4.0 * s + 1e-12, "{a} vs {b} (se {s})");
        }
    }

    #[test]
    fn memoryless_source_has_no_violation() {
        let src = Source::iid(Pmf::new(vec![0.3, 0.7]).unwrap());
        let ch = Channel::binary_symmetric(0.2).unwrap();
        let rep = lemma_check(&src, &ch, 6, 1, 4, 3, 1).unwrap();
        assert!(rep.violation.max_tv < 1e-12);
        assert!(rep.holds);
    }

    #[test]
    fn posterior_sampler_gap_is_small_and_constant_code_gap_is_not() {
        let src = Source::binary_symmetric(0.2).unwrap();
        let ch = Channel::binary_symmetric(0.2).unwrap();
        let sampler = PosteriorSampler { src: src.clone(), ch: ch.clone() };
        let mc = expected_empirical_mc(&src, &ch, &sampler, 64, 1, 2, 400, 5, &Sequential).unwrap();
        let gap = convergence_gap(&mc, &src, &ch).unwrap();
        assert!(gap < 0.02, "gap {gap}");
        assert!(expected_empirical(&src, &ch, &sampler, 6, 1, 2).is_err());

        struct Constant;
        impl Denoiser for Constant {
            fn reconstruct(&self, z: &[usize], _seed: u64) -> Result<Vec<usize>> {
                Ok(vec![0; z.len()])
            }
        }
        let q = expected_empirical(&src, &ch, &Constant, 6, 1, 2).unwrap();
        assert!(convergence_gap(&q, &src, &ch).unwrap() > 0.5);
    }
}
