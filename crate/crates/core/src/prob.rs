//! Probability primitives over finite alphabets.
//!
//! Symbols are `usize` indices into an alphabet. Quantities are in nats.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::matrix::Matrix;
use crate::{Error, Result};

/// Tolerance on total mass for validated pmfs.
pub const MASS_TOL: f64 = 1e-12;

/// Relative singular-value tolerance used by [`channel_rank_class`].
pub const RANK_TOL: f64 = 1e-10;

/// A finite alphabet, optionally with display labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    size: usize,
    labels: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("alphabet size must be >= 1".into()));
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let size = labels.len();
        if size == 0 {
            return Err(Error::InvalidParameter("alphabet size must be >= 1".into()));
        }
        Ok(Self {
            size,
            labels: Some(labels),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn label(&self, symbol: usize) -> Option<&str> {
        self.labels.as_ref().and_then(|l| l.get(symbol)).map(String::as_str)
    }
}

fn validate_entries(probs: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidProbability { index, value });
        }
        sum += value;
    }
    Ok(sum)
}

/// A probability mass function.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Validates non-negativity and unit mass; never renormalizes.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("empty pmf".into()));
        }
        let sum = validate_entries(&probs)?;
        if math::abs(sum - 1.0) > MASS_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights with positive total.
    pub fn normalized_from(weights: Vec<f64>) -> Result<Self> {
        let sum = validate_entries(&weights)?;
        if weights.is_empty() || sum <= 0.0 {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self {
            probs: weights.into_iter().map(|w| w / sum).collect(),
        })
    }

    pub fn uniform(size: usize) -> Self {
        Self {
            probs: vec![1.0 / size as f64; size],
        }
    }

    pub fn point(size: usize, symbol: usize) -> Self {
        let mut probs = vec![0.0; size];
        probs[symbol] = 1.0;
        Self { probs }
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(vec![1.0 - p, p])
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

impl core::ops::Index<usize> for Pmf {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

/// A joint pmf over a product of alphabets, stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if dims.is_empty() || expected != probs.len() {
            return Err(Error::DimensionMismatch {
                expected,
                got: probs.len(),
            });
        }
        let sum = validate_entries(&probs)?;
        if math::abs(sum - 1.0) > MASS_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { dims, probs })
    }

    /// Internal constructor for tables that are exact laws up to rounding.
    pub(crate) fn from_raw(dims: Vec<usize>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), probs.len());
        Self { dims, probs }
    }

    /// Joint law of `(X, Z)` for `X ~ prior` sent through `ch`.
    pub fn from_channel(prior: &Pmf, ch: &Channel) -> Result<Self> {
        if prior.len() != ch.inputs() {
            return Err(Error::DimensionMismatch {
                expected: ch.inputs(),
                got: prior.len(),
            });
        }
        let mut probs = Vec::with_capacity(ch.inputs() * ch.outputs());
        for x in 0..ch.inputs() {
            for z in 0..ch.outputs() {
                probs.push(prior[x] * ch.prob(x, z));
            }
        }
        Ok(Self::from_raw(vec![ch.inputs(), ch.outputs()], probs))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Marginal over the listed axes, in the listed order.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointPmf> {
        for &a in axes {
            if a >= self.dims.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.dims.len(),
                    got: a,
                });
            }
        }
        let out_dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut out = vec![0.0; out_dims.iter().product()];
        let mut coord = vec![0usize; self.dims.len()];
        for &p in &self.probs {
            let mut idx = 0;
            for &a in axes {
                idx = idx * self.dims[a] + coord[a];
            }
            out[idx] += p;
            // odometer increment, last axis fastest
            for d in (0..self.dims.len()).rev() {
                coord[d] += 1;
                if coord[d] < self.dims[d] {
                    break;
                }
                coord[d] = 0;
            }
        }
        Ok(JointPmf::from_raw(out_dims, out))
    }

    /// Flattens a one-axis joint into a [`Pmf`].
    pub fn to_pmf(&self) -> Pmf {
        Pmf::from_raw(self.probs.clone())
    }

    pub fn entropy(&self) -> f64 {
        self.probs.iter().map(|&p| math::neg_p_ln_p(p)).sum()
    }
}

/// A discrete memoryless channel `P(z | x)`, one row per input symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    matrix: Matrix,
}

impl Channel {
    /// Output index of the erasure symbol in [`Channel::binary_erasure`].
    pub const ERASURE: usize = 2;

    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.rows() == 0 || matrix.cols() == 0 {
            return Err(Error::InvalidParameter("empty channel matrix".into()));
        }
        for r in 0..matrix.rows() {
            Pmf::new(matrix.row(r).to_vec())?;
        }
        Ok(Self { matrix })
    }

    pub fn binary_symmetric(p: f64) -> Result<Self> {
        Self::new(Matrix::from_rows(&[[1.0 - p, p], [p, 1.0 - p]])?)
    }

    /// Binary erasure channel with outputs `0, 1, ERASURE`.
    pub fn binary_erasure(p_e: f64) -> Result<Self> {
        Self::new(Matrix::from_rows(&[[1.0 - p_e, 0.0, p_e], [0.0, 1.0 - p_e, p_e]])?)
    }

    pub fn identity(size: usize) -> Self {
        Self {
            matrix: Matrix::identity(size),
        }
    }

    /// Additive noise over `Z_m`: `Z = X + N mod m`.
    pub fn additive(noise: &Pmf) -> Self {
        let m = noise.len();
        let mut matrix = Matrix::zeros(m, m);
        for x in 0..m {
            for z in 0..m {
                matrix[(x, z)] = noise[(z + m - x) % m];
            }
        }
        Self { matrix }
    }

    pub fn inputs(&self) -> usize {
        self.matrix.rows()
    }

    pub fn outputs(&self) -> usize {
        self.matrix.cols()
    }

    #[inline]
    pub fn prob(&self, x: usize, z: usize) -> f64 {
        self.matrix[(x, z)]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        self.matrix.row(x)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Output law for input law `prior`.
    pub fn output_law(&self, prior: &Pmf) -> Result<Pmf> {
        if prior.len() != self.inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.inputs(),
                got: prior.len(),
            });
        }
        Ok(Pmf::from_raw(self.matrix.left_mul(prior.probs())))
    }

    /// Posterior `P(x | z)` as a `|Z| x |X|` matrix; rows of zero-probability
    /// outputs are left at zero.
    pub fn posterior(&self, prior: &Pmf) -> Result<Matrix> {
        let pz = self.output_law(prior)?;
        let mut post = Matrix::zeros(self.outputs(), self.inputs());
        for z in 0..self.outputs() {
            if pz[z] <= 0.0 {
                continue;
            }
            for x in 0..self.inputs() {
                post[(z, x)] = prior[x] * self.prob(x, z) / pz[z];
            }
        }
        Ok(post)
    }

    /// Passes `x` through the channel symbol by symbol.
    pub fn transmit(&self, x: &[usize], rng: &mut crate::rng::Stream) -> Vec<usize> {
        x.iter().map(|&s| rng.categorical(self.row(s))).collect()
    }

    pub fn min_prob(&self) -> f64 {
        self.matrix.as_slice().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A `|Z| x |Y|` distortion table in nats; `+inf` marks impossible pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMatrix {
    values: Matrix,
    level: Option<f64>,
}

impl DistortionMatrix {
    /// Entries must be non-negative or `+inf`.
    pub fn new(values: Matrix) -> Result<Self> {
        for (index, &v) in values.as_slice().iter().enumerate() {
            if v.is_nan() || v < 0.0 {
                return Err(Error::InvalidProbability { index, value: v });
            }
        }
        Ok(Self {
            values,
            level: None,
        })
    }

    pub(crate) fn from_raw(values: Matrix, level: Option<f64>) -> Self {
        Self { values, level }
    }

    /// Hamming distortion on an `n`-symbol alphabet.
    pub fn hamming(n: usize) -> Self {
        let mut values = Matrix::zeros(n, n);
        for z in 0..n {
            for y in 0..n {
                if z != y {
                    values[(z, y)] = 1.0;
                }
            }
        }
        Self {
            values,
            level: None,
        }
    }

    pub fn with_level(mut self, level: f64) -> Self {
        self.level = Some(level);
        self
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn level(&self) -> Option<f64> {
        self.level
    }

    #[inline]
    pub fn get(&self, z: usize, y: usize) -> f64 {
        self.values[(z, y)]
    }

    pub fn sources(&self) -> usize {
        self.values.rows()
    }

    pub fn reproductions(&self) -> usize {
        self.values.cols()
    }

    /// Per-letter block distortion on `Z^k x Y^k`: `(1/k) sum rho(z_i, y_i)`.
    pub fn per_letter_block(&self, k: usize) -> Result<Self> {
        let nz = self.sources();
        let ny = self.reproductions();
        let rows = crate::error::pow_count(nz, k);
        let cols = crate::error::pow_count(ny, k);
        crate::error::check_budget(rows.saturating_mul(cols), 1 << 26)?;
        let (rows, cols) = (rows as usize, cols as usize);
        let mut values = Matrix::zeros(rows, cols);
        for zi in 0..rows {
            let zw = word_symbols(zi, nz, k);
            for yi in 0..cols {
                let yw = word_symbols(yi, ny, k);
                let total: f64 = zw.iter().zip(&yw).map(|(&z, &y)| self.get(z, y)).sum();
                values[(zi, yi)] = total / k as f64;
            }
        }
        Ok(Self {
            values,
            level: self.level,
        })
    }

    /// Block distortion `(1/n) sum rho(z_i, y_i)`.
    pub fn block(&self, z: &[usize], y: &[usize]) -> f64 {
        debug_assert_eq!(z.len(), y.len());
        let total: f64 = z.iter().zip(y).map(|(&a, &b)| self.get(a, b)).sum();
        total / z.len() as f64
    }
}

/// Rank classification of a channel matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankClass {
    Invertible,
    FullRowRank,
    Deficient,
}

/// Entropy in nats.
pub fn entropy(p: &Pmf) -> f64 {
    p.probs().iter().map(|&v| math::neg_p_ln_p(v)).sum()
}

/// Binary entropy `h(p)` in nats.
pub fn binary_entropy(p: f64) -> f64 {
    math::neg_p_ln_p(p) + math::neg_p_ln_p(1.0 - p)
}

/// `H(Z | X)` for `X ~ prior` through `ch`.
pub fn conditional_entropy(ch: &Channel, prior: &Pmf) -> Result<f64> {
    if prior.len() != ch.inputs() {
        return Err(Error::DimensionMismatch {
            expected: ch.inputs(),
            got: prior.len(),
        });
    }
    Ok((0..ch.inputs())
        .map(|x| {
            if prior[x] == 0.0 {
                0.0
            } else {
                prior[x] * ch.row(x).iter().map(|&p| math::neg_p_ln_p(p)).sum::<f64>()
            }
        })
        .sum())
}

/// Mutual information between the two axes of a two-axis joint.
pub fn mutual_information(joint: &JointPmf) -> Result<f64> {
    if joint.dims().len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: joint.dims().len(),
        });
    }
    let h1 = joint.marginal(&[0])?.entropy();
    let h2 = joint.marginal(&[1])?.entropy();
    Ok((h1 + h2 - joint.entropy()).max(0.0))
}

/// The channel-matched distortion `rho(z, y) = -ln P(z | y)`.
///
/// The reproduction alphabet is the channel input alphabet. When `prior` is
/// given, the level `H(Z | X)` is attached.
pub fn matched_distortion(ch: &Channel, prior: Option<&Pmf>) -> Result<DistortionMatrix> {
    let mut values = Matrix::zeros(ch.outputs(), ch.inputs());
    for z in 0..ch.outputs() {
        for y in 0..ch.inputs() {
            let p = ch.prob(y, z);
            values[(z, y)] = if p > 0.0 { -math::ln(p) } else { f64::INFINITY };
        }
    }
    let level = prior.map(|p| conditional_entropy(ch, p)).transpose()?;
    Ok(DistortionMatrix::from_raw(values, level))
}

/// Total variation distance `1/2 sum |p - q|`.
pub fn tv_distance(p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    Ok(tv_slices(p.probs(), q.probs()))
}

pub(crate) fn tv_slices(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| math::abs(a - b)).sum::<f64>()
}

/// Relative entropy `D(p || q)`; `+inf` when `p` is not dominated by `q`.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let mut d = 0.0;
    for (&a, &b) in p.probs().iter().zip(q.probs()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(f64::INFINITY);
        }
        d += a * math::ln(a / b);
    }
    Ok(d.max(0.0))
}

pub fn channel_rank_class(ch: &Channel) -> RankClass {
    let rank = ch.matrix().rank(RANK_TOL);
    if rank < ch.inputs() {
        RankClass::Deficient
    } else if ch.inputs() == ch.outputs() {
        RankClass::Invertible
    } else {
        RankClass::FullRowRank
    }
}

/// Index of a word over a `base`-ary alphabet, first symbol most significant.
pub fn word_index(symbols: &[usize], base: usize) -> usize {
    symbols.iter().fold(0, |acc, &s| acc * base + s)
}

/// Inverse of [`word_index`] for words of length `len`.
pub fn word_symbols(mut index: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LN2: f64 = core::f64::consts::LN_2;

    #[test]
    fn entropy_examples() {
        assert!((entropy(&Pmf::uniform(2)) - LN2).abs() < 1e-15);
        assert_eq!(entropy(&Pmf::point(3, 1)), 0.0);
        // h(0.1) = -0.1 ln 0.1 - 0.9 ln 0.9
        let h = entropy(&Pmf::bernoulli(0.1).unwrap());
        assert!((h - 0.325_082_973_391_448_2).abs() < 1e-12);
        assert!((h / LN2 - 0.468_995_593_589_281_2).abs() < 1e-12);
    }

    #[test]
    fn conditional_entropy_examples() {
        let bsc = Channel::binary_symmetric(0.1).unwrap();
        let prior = Pmf::new(vec![0.3, 0.7]).unwrap();
        let h = conditional_entropy(&bsc, &prior).unwrap();
        assert!((h - binary_entropy(0.1)).abs() < 1e-15);
        assert_eq!(conditional_entropy(&Channel::identity(3), &Pmf::uniform(3)).unwrap(), 0.0);
        let bec = Channel::binary_erasure(0.5).unwrap();
        let h = conditional_entropy(&bec, &Pmf::uniform(2)).unwrap();
        assert!((h - core::f64::consts::LN_2).abs() < 1e-12);
        assert!(conditional_entropy(&bec, &Pmf::uniform(3)).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let prod = JointPmf::new(vec![2, 2], vec![0.06, 0.14, 0.24, 0.56]).unwrap();
        assert!(mutual_information(&prod).unwrap() < 1e-15);
        let ident = JointPmf::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((mutual_information(&ident).unwrap() - LN2).abs() < 1e-15);
        let joint =
            JointPmf::from_channel(&Pmf::uniform(2), &Channel::binary_symmetric(0.1).unwrap())
                .unwrap();
        let mi = mutual_information(&joint).unwrap();
        assert!((mi - 0.368_064_207_168_497_1).abs() < 1e-12);
        // 1 - h(0.1) bits
        assert!((mi / LN2 - 0.531_004_406_410_718_8).abs() < 1e-12);
    }

    #[test]
    fn matched_distortion_examples() {
        let bsc = Channel::binary_symmetric(0.1).unwrap();
        let rho = matched_distortion(&bsc, Some(&Pmf::uniform(2))).unwrap();
        assert!((rho.get(0, 0) - 0.105_360_515_657_826_3).abs() < 1e-14);
        assert!((rho.get(1, 0) - core::f64::consts::LN_10).abs() < 1e-14);
        assert!((rho.level().unwrap() - binary_entropy(0.1)).abs() < 1e-15);

        let bec = Channel::binary_erasure(0.3).unwrap();
        let rho = matched_distortion(&bec, None).unwrap();
        assert_eq!(rho.get(Channel::ERASURE, 0), -(0.3f64).ln());
        assert_eq!(rho.get(Channel::ERASURE, 1), -(0.3f64).ln());
        assert!(rho.get(0, 1).is_infinite() && rho.get(1, 0).is_infinite());
        assert!(rho.level().is_none());
    }

    #[test]
    fn matched_distortion_of_additive_channel_is_difference_distortion() {
        let noise = Pmf::new(vec![0.7, 0.2, 0.1, 0.0]).unwrap();
        let ch = Channel::additive(&noise);
        let rho = matched_distortion(&ch, None).unwrap();
        for z in 0..4 {
            for y in 0..4 {
                let p = noise[(z + 4 - y) % 4];
                let expected = if p > 0.0 { -p.ln() } else { f64::INFINITY };
                assert_eq!(rho.get(z, y), expected);
            }
        }
    }

    #[test]
    fn tv_and_kl_examples() {
        let p = Pmf::new(vec![0.6, 0.4]).unwrap();
        let q = Pmf::uniform(2);
        assert!((tv_distance(&p, &q).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let a = Pmf::point(2, 0);
        let b = Pmf::point(2, 1);
        assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);
        assert!(kl_divergence(&a, &b).unwrap().is_infinite());
    }

    #[test]
    fn rank_classes() {
        assert_eq!(
            channel_rank_class(&Channel::binary_symmetric(0.1).unwrap()),
            RankClass::Invertible
        );
        assert_eq!(
            channel_rank_class(&Channel::binary_erasure(0.4).unwrap()),
            RankClass::FullRowRank
        );
        assert_eq!(
            channel_rank_class(&Channel::binary_symmetric(0.5).unwrap()),
            RankClass::Deficient
        );
    }

    #[test]
    fn pmf_validation_does_not_renormalize() {
        assert!(matches!(
            Pmf::new(vec![0.5, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(Pmf::new(vec![1.2, -0.2]).is_err());
        let p = Pmf::normalized_from(vec![1.0, 3.0]).unwrap();
        assert_eq!(p.probs(), &[0.25, 0.75]);
        assert!(Alphabet::new(0).is_err());
        let a = Alphabet::with_labels(vec!["0".into(), "1".into(), "e".into()]).unwrap();
        assert_eq!((a.size(), a.label(2)), (3, Some("e")));
    }

    #[test]
    fn marginal_orders_axes() {
        let j = JointPmf::new(vec![2, 3], vec![0.1, 0.2, 0.0, 0.3, 0.1, 0.3]).unwrap();
        let m1 = j.marginal(&[1]).unwrap();
        assert!((m1.probs()[0] - 0.4).abs() < 1e-15);
        let swapped = j.marginal(&[1, 0]).unwrap();
        assert_eq!(swapped.dims(), &[3, 2]);
        assert_eq!(swapped.probs()[1], 0.3);
    }

    fn arb_pmf(n: usize) -> impl Strategy<Value = Pmf> {
        proptest::collection::vec(0.0f64..1.0, n).prop_filter_map("positive mass", |w| {
            Pmf::normalized_from(w).ok()
        })
    }

    fn arb_channel(nx: usize, nz: usize) -> impl Strategy<Value = Channel> {
        proptest::collection::vec(arb_pmf(nz), nx).prop_map(move |rows| {
            let rows: Vec<Vec<f64>> = rows.into_iter().map(Pmf::into_vec).collect();
            Channel::new(Matrix::from_rows(&rows).unwrap()).unwrap()
        })
    }

    fn brute_entropy(p: &[f64]) -> f64 {
        let mut h = 0.0;
        for &v in p {
            if v > 0.0 {
                h -= v * v.ln();
            }
        }
        h
    }

    proptest! {
        #[test]
        fn information_identities_hold(
            (prior, ch) in (1usize..=6, 1usize..=6).prop_flat_map(|(nx, nz)| (arb_pmf(nx), arb_channel(nx, nz)))
        ) {
            let joint = JointPmf::from_channel(&prior, &ch).unwrap();
            let pz = ch.output_law(&prior).unwrap();
            // brute force over the full table
            let hj = brute_entropy(joint.probs());
            let hx = brute_entropy(prior.probs());
            let hz = brute_entropy(pz.probs());
            let h_cond = conditional_entropy(&ch, &prior).unwrap();
            prop_assert!((h_cond - (hj - hx)).abs() < 1e-12);
            let mi = mutual_information(&joint).unwrap();
            prop_assert!((mi - (hx + hz - hj).max(0.0)).abs() < 1e-12);
            prop_assert!((mi - (entropy(&pz) - h_cond)).abs() < 1e-12);
            prop_assert!(entropy(&prior) <= (prior.len() as f64).ln() + 1e-12);
            prop_assert!((pz.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(pz.probs().iter().all(|&v| v >= -1e-15));
        }

        #[test]
        fn divergences_are_nonnegative(p in arb_pmf(4), q in arb_pmf(4)) {
            let tv = tv_distance(&p, &q).unwrap();
            prop_assert!((0.0..=1.0).contains(&tv));
            prop_assert!(kl_divergence(&p, &q).unwrap() >= 0.0);
        }
    }
}
