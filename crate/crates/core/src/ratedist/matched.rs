use alloc::vec::Vec;

use crate::error::{check_budget, pow_count};
use crate::matrix::Matrix;
use crate::prob::{
    channel_rank_class, conditional_entropy, entropy, matched_distortion, tv_slices, Channel, Pmf,
    RankClass,
};
use crate::ratedist::{rd_at_distortion, RdPoint};
use crate::source::Source;
use crate::Result;

/// Largest super-alphabet `|Z|^k` handed to Blahut-Arimoto.
pub const SUPER_ALPHABET_BUDGET: u128 = 4096;

/// Both sides of `R(Z^k, H(Z|X)) = H(Z^k)/k - H(Z|X)`, in nats per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedLevelReport {
    pub k: usize,
    /// `H(Z | X)`.
    pub level: f64,
    /// Blahut-Arimoto rate at the matched level.
    pub lhs_rate: f64,
    /// `H(Z^k)/k - H(Z | X)`.
    pub rhs_rate: f64,
    pub gap: f64,
    pub point: RdPoint,
    /// `P(Z^k)`.
    pub observation_law: Pmf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AchieverReport {
    pub rank: RankClass,
    /// `None` when the channel is rank deficient and uniqueness is not claimed.
    pub tv_gap: Option<f64>,
    pub identity: MatchedLevelReport,
}

fn row_sums(m: &Matrix) -> Vec<f64> {
    (0..m.rows()).map(|r| m.row(r).iter().sum()).collect()
}

fn solve_matched(src: &Source, ch: &Channel, k: usize) -> Result<(MatchedLevelReport, Matrix)> {
    check_budget(pow_count(ch.outputs(), k), SUPER_ALPHABET_BUDGET)?;
    let joint = src.observed_block_joint(ch, k)?;
    let pz = Pmf::from_raw(row_sums(&joint));
    let level = conditional_entropy(ch, src.initial())?;
    let rho = matched_distortion(ch, None)?.per_letter_block(k)?;
    let point = rd_at_distortion(&pz, &rho, level)?;
    let lhs_rate = point.rate / k as f64;
    let rhs_rate = entropy(&pz) / k as f64 - level;
    let report = MatchedLevelReport {
        k,
        level,
        lhs_rate,
        rhs_rate,
        gap: crate::math::abs(lhs_rate - rhs_rate),
        point,
        observation_law: pz,
    };
    Ok((report, joint))
}

/// Runs Blahut-Arimoto on `Z^k` with the per-letter matched distortion at
/// level `H(Z|X)` and compares with the block-entropy expression.
pub fn matched_level_identity_check(src: &Source, ch: &Channel, k: usize) -> Result<MatchedLevelReport> {
    solve_matched(src, ch, k).map(|(r, _)| r)
}

/// Total variation between the optimal joint on `(Z^k, Y^k)` and the exact
/// `P(Z^k, X^k)`.
pub fn achiever_is_posterior_check(src: &Source, ch: &Channel, k: usize) -> Result<AchieverReport> {
    let rank = channel_rank_class(ch);
    let (identity, exact) = solve_matched(src, ch, k)?;
    let tv_gap = match rank {
        RankClass::Deficient => None,
        _ => {
            let achieved = identity.point.joint(&identity.observation_law);
            Some(tv_slices(achieved.as_slice(), exact.as_slice()))
        }
    };
    Ok(AchieverReport {
        rank,
        tv_gap,
        identity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{mutual_information, JointPmf};
    use core::f64::consts::LN_2;

    #[test]
    fn iid_bsc_k1() {
        let src = Source::iid(Pmf::uniform(2));
        let ch = Channel::binary_symmetric(0.1).unwrap();
        let r = matched_level_identity_check(&src, &ch, 1).unwrap();
        assert!((r.rhs_rate / LN_2 - 0.5310044064107189).abs() < 1e-12);
        assert!(r.gap / LN_2 < 1e-4);
    }

    #[test]
    fn k1_reduces_to_mutual_information() {
        let src = Source::binary_symmetric(0.3).unwrap();
        let ch = Channel::binary_erasure(0.5).unwrap();
        let r = matched_level_identity_check(&src, &ch, 1).unwrap();
        let mi = mutual_information(&JointPmf::from_channel(src.initial(), &ch).unwrap()).unwrap();
        assert!((r.rhs_rate - mi).abs() < 1e-12);
        assert!(r.gap < 1e-6);
    }

    #[test]
    fn markov_k2() {
        let src = Source::binary_symmetric(0.2).unwrap();
        let ch = Channel::binary_symmetric(0.1).unwrap();
        let r = matched_level_identity_check(&src, &ch, 2).unwrap();
        assert!(r.gap / LN_2 < 1e-3, "gap {}", r.gap);
    }

    #[test]
    fn achiever_examples() {
        let src = Source::iid(Pmf::uniform(2));
        let r = achiever_is_posterior_check(&src, &Channel::binary_symmetric(0.2).unwrap(), 1).unwrap();
        assert_eq!(r.rank, RankClass::Invertible);
        assert!(r.tv_gap.unwrap() < 1e-4);
        let r = achiever_is_posterior_check(&src, &Channel::binary_erasure(0.4).unwrap(), 1).unwrap();
        assert_eq!(r.rank, RankClass::FullRowRank);
        assert!(r.tv_gap.unwrap() < 1e-4);
        let r = achiever_is_posterior_check(&src, &Channel::binary_symmetric(0.5).unwrap(), 1).unwrap();
        assert_eq!(r.rank, RankClass::Deficient);
        assert!(r.tv_gap.is_none());
    }

    #[test]
    fn budget() {
        let src = Source::iid(Pmf::uniform(2));
        let ch = Channel::binary_erasure(0.4).unwrap();
        assert!(matched_level_identity_check(&src, &ch, 8).is_err());
    }
}
