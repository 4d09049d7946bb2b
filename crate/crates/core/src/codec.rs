//! Lossy source codes under a distortion matrix.
//!
//! A [`Codebook`] is a list of reproduction words. [`encode`] picks the word
//! of minimum block distortion. Every reconstruction scheme implements
//! [`Denoiser`], so experiments can treat codebooks, exhaustively optimized
//! tables and the posterior sampler alike.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_budget, pow_count};
use crate::exec::{mean_and_stderr, Executor};
use crate::inference::{posterior_path_sample, sequence_probability};
use crate::math;
use crate::prob::{conditional_entropy, word_symbols, Channel, DistortionMatrix};
use crate::rng::{derive_seed, Stream};
use crate::source::{SamplePath, Source};
use crate::{Error, Result};

/// Most codewords a random codebook may hold.
pub const CODEBOOK_BUDGET: u128 = 1 << 22;
/// Most observation words [`optimal_small_code`] enumerates.
pub const SMALL_CODE_BUDGET: u128 = 1 << 16;
/// Default cap on words per sub-block of a product code.
pub const DEFAULT_MAX_WORDS: usize = 8192;

const RESTARTS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    words: Vec<usize>,
    n: usize,
    alphabet: usize,
    rate: f64,
    generator_seed: Option<u64>,
}

impl Codebook {
    pub fn from_words(words: &[Vec<usize>], alphabet: usize) -> Result<Self> {
        let n = words.first().map(Vec::len).ok_or_else(|| Error::InvalidParameter("empty codebook".into()))?;
        if n == 0 {
            return Err(Error::InvalidParameter("zero-length codewords".into()));
        }
        let mut flat = Vec::with_capacity(words.len() * n);
        for w in words {
            if w.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: w.len() });
            }
            if let Some(&s) = w.iter().find(|&&s| s >= alphabet) {
                return Err(Error::InvalidParameter(alloc::format!("symbol {s} outside alphabet")));
            }
            flat.extend_from_slice(w);
        }
        Ok(Self::from_flat(flat, n, alphabet, None))
    }

    fn from_flat(words: Vec<usize>, n: usize, alphabet: usize, generator_seed: Option<u64>) -> Self {
        let count = words.len() / n;
        Self {
            words,
            n,
            alphabet,
            rate: math::ln(count as f64) / n as f64,
            generator_seed,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Block length.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    /// `ln |C| / n`, nats per symbol.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn generator_seed(&self) -> Option<u64> {
        self.generator_seed
    }

    pub fn word(&self, i: usize) -> &[usize] {
        &self.words[i * self.n..(i + 1) * self.n]
    }

    pub fn words(&self) -> impl Iterator<Item = &[usize]> {
        self.words.chunks(self.n)
    }
}

/// Number of codewords for a rate, `ceil(e^{n rate})`.
pub fn codeword_count(n: usize, rate_nats: f64) -> Result<usize> {
    if !(rate_nats >= 0.0 && rate_nats.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("rate {rate_nats}")));
    }
    let exact = math::exp(n as f64 * rate_nats);
    let count = math::ceil(exact - 1e-9 * exact).max(1.0);
    if count > CODEBOOK_BUDGET as f64 {
        let needed = if count < u128::MAX as f64 { count as u128 } else { u128::MAX };
        return Err(Error::BudgetExceeded { needed, budget: CODEBOOK_BUDGET });
    }
    Ok(count as usize)
}

/// Codewords drawn i.i.d. from the source law of `X^n`; word `j` uses the
/// stream derived from `(seed, j)`.
pub fn random_codebook(src: &Source, n: usize, rate_nats: f64, seed: u64) -> Result<Codebook> {
    if n == 0 {
        return Err(Error::InvalidParameter("block length must be >= 1".into()));
    }
    let count = codeword_count(n, rate_nats)?;
    let mut words = Vec::with_capacity(count * n);
    for j in 0..count {
        let mut rng = Stream::derived(seed, j as u64);
        words.extend(src.sample_with(n, &mut rng));
    }
    Ok(Codebook::from_flat(words, n, src.alphabet_size(), Some(seed)))
}

/// Largest divisor `b` of `n` whose random codebook at `rate_nats` has at most
/// `max_words` words.
pub fn product_block_length(n: usize, rate_nats: f64, max_words: usize) -> Result<usize> {
    (1..=n)
        .rev()
        .filter(|&b| n.is_multiple_of(b))
        .find(|&b| codeword_count(b, rate_nats).is_ok_and(|c| c <= max_words))
        .ok_or(Error::BudgetExceeded {
            needed: codeword_count(1, rate_nats).map_or(u128::MAX, |c| c as u128),
            budget: max_words as u128,
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingResult {
    pub index: usize,
    pub y: Vec<usize>,
    /// Per-symbol distortion in nats.
    pub distortion: f64,
}

fn check_dist(cb: &Codebook, dist: &DistortionMatrix) -> Result<()> {
    if dist.reproductions() != cb.alphabet {
        return Err(Error::DimensionMismatch {
            expected: cb.alphabet,
            got: dist.reproductions(),
        });
    }
    Ok(())
}

/// Block sums closer than this (relative) count as ties, so that summation
/// order cannot decide between equally good words.
const TIE_TOL: f64 = 1e-12;

#[inline]
fn improves(candidate: f64, incumbent: f64) -> bool {
    candidate.is_finite() && (!incumbent.is_finite() || candidate < incumbent - TIE_TOL * incumbent)
}

fn nearest(cb: &Codebook, dist: &DistortionMatrix, z: &[usize]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, w) in cb.words().enumerate() {
        let bound = best.map_or(f64::INFINITY, |b| b.1);
        let mut total = 0.0;
        for (&zs, &ys) in z.iter().zip(w) {
            total += dist.get(zs, ys);
            if total > bound {
                break;
            }
        }
        if improves(total, bound) {
            best = Some((i, total));
        }
    }
    best
}

/// Minimum-distortion encoding; ties go to the lowest index and words with
/// infinite distortion are never chosen.
pub fn encode(cb: &Codebook, dist: &DistortionMatrix, z: &[usize]) -> Result<EncodingResult> {
    check_dist(cb, dist)?;
    if z.len() != cb.n {
        return Err(Error::DimensionMismatch { expected: cb.n, got: z.len() });
    }
    if let Some(&s) = z.iter().find(|&&s| s >= dist.sources()) {
        return Err(Error::InvalidParameter(alloc::format!("observation symbol {s}")));
    }
    let (index, total) = nearest(cb, dist, z).ok_or(Error::NoFiniteCodeword)?;
    Ok(EncodingResult {
        index,
        y: cb.word(index).to_vec(),
        distortion: total / cb.n as f64,
    })
}

/// A reconstruction scheme `z^n -> y^n`.
pub trait Denoiser: Sync {
    /// `seed` is only consulted by randomized schemes.
    fn reconstruct(&self, z: &[usize], seed: u64) -> Result<Vec<usize>>;

    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Returns the observation unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Denoiser for Identity {
    fn reconstruct(&self, z: &[usize], _seed: u64) -> Result<Vec<usize>> {
        Ok(z.to_vec())
    }
}

/// Encodes consecutive blocks of length `book.n()` independently. When the
/// input has exactly one block this is plain minimum-distortion encoding;
/// otherwise it is the product code over the blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEncoder {
    pub book: Codebook,
    pub dist: DistortionMatrix,
}

impl BlockEncoder {
    pub fn new(book: Codebook, dist: DistortionMatrix) -> Result<Self> {
        check_dist(&book, &dist)?;
        Ok(Self { book, dist })
    }

    /// Reconstruction and per-symbol distortion.
    pub fn encode_all(&self, z: &[usize]) -> Result<(Vec<usize>, f64)> {
        let b = self.book.n;
        if z.is_empty() || !z.len().is_multiple_of(b) {
            return Err(Error::InvalidParameter(alloc::format!(
                "length {} is not a multiple of the block length {b}",
                z.len()
            )));
        }
        let mut y = Vec::with_capacity(z.len());
        let mut total = 0.0;
        for chunk in z.chunks(b) {
            let enc = encode(&self.book, &self.dist, chunk)?;
            total += enc.distortion * b as f64;
            y.extend(enc.y);
        }
        Ok((y, total / z.len() as f64))
    }
}

impl Denoiser for BlockEncoder {
    fn reconstruct(&self, z: &[usize], _seed: u64) -> Result<Vec<usize>> {
        self.encode_all(z).map(|(y, _)| y)
    }
}

/// Exact posterior path sampler; the limit object of good matched codes.
#[derive(Debug, Clone)]
pub struct PosteriorSampler {
    pub src: Source,
    pub ch: Channel,
}

impl Denoiser for PosteriorSampler {
    fn reconstruct(&self, z: &[usize], seed: u64) -> Result<Vec<usize>> {
        posterior_path_sample(&self.src, &self.ch, z, seed).map(|p| p.symbols)
    }

    fn is_deterministic(&self) -> bool {
        false
    }
}

/// Draws `X^n` from its posterior given `z`.
pub fn posterior_sampling_denoiser(src: &Source, ch: &Channel, z: &[usize], seed: u64) -> Result<SamplePath> {
    posterior_path_sample(src, ch, z, seed)
}

/// A code on short blocks given by a full encoder table.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallCode {
    pub book: Codebook,
    /// Word index for every observation word (indexed by `word_index`).
    pub table: Vec<usize>,
    /// `E[rho_n(Z^n, phi(Z^n))]` under the exact law.
    pub expected_distortion: f64,
    /// Expected distortion after each alternating step of the returned run.
    pub trace: Vec<f64>,
    observations: usize,
}

impl Denoiser for SmallCode {
    fn reconstruct(&self, z: &[usize], _seed: u64) -> Result<Vec<usize>> {
        if z.len() != self.book.n {
            return Err(Error::DimensionMismatch { expected: self.book.n, got: z.len() });
        }
        let idx = crate::prob::word_index(z, self.observations);
        Ok(self.book.word(self.table[idx]).to_vec())
    }
}

struct LloydProblem {
    n: usize,
    ny: usize,
    zwords: Vec<Vec<usize>>,
    probs: Vec<f64>,
    dist: DistortionMatrix,
}

struct LloydRun {
    words: Vec<Vec<usize>>,
    table: Vec<usize>,
    objective: f64,
    trace: Vec<f64>,
}

impl LloydProblem {
    fn cost(&self, z: &[usize], w: &[usize]) -> f64 {
        z.iter().zip(w).map(|(&a, &b)| self.dist.get(a, b)).sum()
    }

    fn assign(&self, words: &[Vec<usize>]) -> (Vec<usize>, f64) {
        let mut table = vec![0usize; self.zwords.len()];
        let mut objective = 0.0;
        for (zi, z) in self.zwords.iter().enumerate() {
            if self.probs[zi] == 0.0 {
                continue;
            }
            let mut best = (0usize, f64::INFINITY);
            for (wi, w) in words.iter().enumerate() {
                let c = self.cost(z, w);
                if improves(c, best.1) {
                    best = (wi, c);
                }
            }
            table[zi] = best.0;
            objective += self.probs[zi] * best.1;
        }
        (table, objective / self.n as f64)
    }

    fn refit(&self, words: &mut [Vec<usize>], table: &[usize]) {
        for (wi, word) in words.iter_mut().enumerate() {
            for (i, slot) in word.iter_mut().enumerate() {
                let mut acc = vec![0.0; self.ny];
                let mut any = false;
                for (zi, z) in self.zwords.iter().enumerate() {
                    if table[zi] != wi || self.probs[zi] == 0.0 {
                        continue;
                    }
                    any = true;
                    for (y, a) in acc.iter_mut().enumerate() {
                        *a += self.probs[zi] * self.dist.get(z[i], y);
                    }
                }
                if !any {
                    continue;
                }
                let best = acc.iter().copied().fold(f64::INFINITY, f64::min);
                if acc[*slot] > best {
                    *slot = acc.iter().position(|&a| a == best).expect("minimum present");
                }
            }
        }
    }

    fn run(&self, mut words: Vec<Vec<usize>>) -> LloydRun {
        let (mut table, mut objective) = self.assign(&words);
        let mut trace = vec![objective];
        loop {
            self.refit(&mut words, &table);
            let (next_table, next_obj) = self.assign(&words);
            trace.push(next_obj);
            let stalled = next_table == table || next_obj >= objective;
            table = next_table;
            objective = next_obj.min(objective);
            if stalled {
                break;
            }
        }
        LloydRun {
            words,
            table,
            objective,
            trace,
        }
    }

    /// Best per-coordinate reproduction of a single observation word.
    fn best_word_for(&self, z: &[usize]) -> Vec<usize> {
        z.iter()
            .map(|&zs| {
                (0..self.ny)
                    .fold((0, f64::INFINITY), |b, y| {
                        let c = self.dist.get(zs, y);
                        if c < b.1 { (y, c) } else { b }
                    })
                    .0
            })
            .collect()
    }
}

/// Alternating minimization of the expected block distortion for a code with
/// `num_words` words, using the exact law of `Z^n`.
///
/// Each size from one word upward keeps the better of 32 random restarts and
/// a run seeded with the previous size's code plus one new word, so the
/// returned distortion never increases with `num_words`.
pub fn optimal_small_code(
    src: &Source,
    ch: &Channel,
    n: usize,
    num_words: usize,
    dist: &DistortionMatrix,
    seed: u64,
) -> Result<SmallCode> {
    if n == 0 || num_words == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and at least one word".into()));
    }
    if dist.sources() != ch.outputs() {
        return Err(Error::DimensionMismatch {
            expected: ch.outputs(),
            got: dist.sources(),
        });
    }
    let nz = ch.outputs();
    check_budget(pow_count(nz, n), SMALL_CODE_BUDGET)?;
    let total = nz.pow(n as u32);
    let zwords: Vec<Vec<usize>> = (0..total).map(|i| word_symbols(i, nz, n)).collect();
    let probs: Vec<f64> = zwords.iter().map(|z| sequence_probability(src, ch, z)).collect();
    let prob = LloydProblem {
        n,
        ny: dist.reproductions(),
        zwords,
        probs,
        dist: dist.clone(),
    };
    let support: Vec<usize> = (0..total).filter(|&i| prob.probs[i] > 0.0).collect();

    let best_run = if num_words >= support.len() {
        // one word per possible observation is globally optimal
        let mut words: Vec<Vec<usize>> = support.iter().map(|&i| prob.best_word_for(&prob.zwords[i])).collect();
        while words.len() < num_words {
            words.push(words[0].clone());
        }
        let (table, objective) = prob.assign(&words);
        LloydRun {
            words,
            table,
            objective,
            trace: vec![objective],
        }
    } else {
        let mut previous: Option<LloydRun> = None;
        for size in 1..=num_words {
            let mut best: Option<LloydRun> = None;
            let mut consider = |run: LloydRun| {
                if best.as_ref().is_none_or(|b| run.objective < b.objective) {
                    best = Some(run);
                }
            };
            for r in 0..RESTARTS {
                let mut rng = Stream::derived(derive_seed(seed, size as u64), r as u64);
                let words: Vec<Vec<usize>> = (0..size)
                    .map(|_| {
                        if prob.ny == src.alphabet_size() {
                            src.sample_with(n, &mut rng)
                        } else {
                            (0..n).map(|_| rng.below(prob.ny)).collect()
                        }
                    })
                    .collect();
                consider(prob.run(words));
            }
            if let Some(prev) = previous.take() {
                // split the observation contributing most distortion into its own word
                let worst = (0..total)
                    .filter(|&i| prob.probs[i] > 0.0)
                    .map(|i| (i, prob.probs[i] * prob.cost(&prob.zwords[i], &prev.words[prev.table[i]])))
                    .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b })
                    .0;
                let mut words = prev.words;
                words.push(prob.best_word_for(&prob.zwords[worst]));
                consider(prob.run(words));
            }
            previous = best;
        }
        previous.expect("at least one size")
    };

    let book = Codebook::from_flat(best_run.words.concat(), n, prob.ny, Some(seed));
    Ok(SmallCode {
        book,
        table: best_run.table,
        expected_distortion: best_run.objective,
        trace: best_run.trace,
        observations: nz,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoodnessReport {
    pub mean_distortion: f64,
    pub std_err: f64,
    /// `H(Z | X)`.
    pub target_d: f64,
    pub rate: f64,
    pub trials: usize,
}

/// Monte Carlo estimate of the expected block distortion of `encoder` on
/// blocks of length `n`.
pub fn goodness_report<E: Executor>(
    encoder: &BlockEncoder,
    src: &Source,
    ch: &Channel,
    n: usize,
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<GoodnessReport> {
    let results = exec.map_indexed(trials, |t| {
        let mut rng = Stream::derived(seed, t as u64);
        let x = src.sample_with(n, &mut rng);
        let z = ch.transmit(&x, &mut rng);
        encoder.encode_all(&z).map(|(_, d)| d)
    });
    let values: Vec<f64> = results.into_iter().collect::<Result<_>>()?;
    let (mean_distortion, std_err) = mean_and_stderr(&values);
    Ok(GoodnessReport {
        mean_distortion,
        std_err,
        target_d: conditional_entropy(ch, src.initial())?,
        rate: encoder.book.rate(),
        trials,
    })
}
