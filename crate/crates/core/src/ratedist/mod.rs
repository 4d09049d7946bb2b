//! Rate-distortion computations.
//!
//! [`blahut_arimoto`] solves the Lagrangian problem at a fixed slope and
//! [`rd_at_distortion`] inverts it for a target distortion by bisection on the
//! slope. The remaining functions build the matched-level checks, the indirect
//! problem and the closed-form Gaussian example on top of these.

mod gaussian;
mod indirect;
mod matched;

pub use gaussian::{gaussian_example, gaussian_indirect_loss, gaussian_indirect_rate, GaussianReport};
pub use indirect::{
    indirect_rd_curve, rdp_exponential_form_test, rho_affinity_test, witsenhausen_reduce,
    AffinityReport, IndirectDistortion, RdpReport, AFFINE_TOL, SEPARABILITY_TOL,
};
pub use matched::{
    achiever_is_posterior_check, matched_level_identity_check, AchieverReport, MatchedLevelReport,
    SUPER_ALPHABET_BUDGET,
};

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::matrix::Matrix;
use crate::prob::{DistortionMatrix, Pmf};
use crate::{Error, Result};

/// Stop when successive rates differ by less than this relative amount.
pub const RATE_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 100_000;

/// A point on (or near) a rate-distortion curve with the conditional law that
/// achieves it.
#[derive(Debug, Clone, PartialEq)]
pub struct RdPoint {
    /// Nats per super-symbol.
    pub rate: f64,
    pub distortion: f64,
    /// `|Z| x |Y|` conditional `Q(y | z)`.
    pub conditional: Matrix,
    pub output: Pmf,
    pub beta: f64,
    pub iterations: usize,
}

impl RdPoint {
    /// Rate and distortion recomputed from `conditional` alone.
    pub fn recompute(&self, source_law: &Pmf, dist: &DistortionMatrix) -> (f64, f64) {
        rate_and_distortion(source_law.probs(), &self.conditional, dist.values())
    }

    /// Joint `P(z) Q(y | z)` as a `|Z| x |Y|` table.
    pub fn joint(&self, source_law: &Pmf) -> Matrix {
        let mut j = self.conditional.clone();
        for z in 0..j.rows() {
            let pz = source_law[z];
            for v in j.row_mut(z) {
                *v *= pz;
            }
        }
        j
    }
}

fn rate_and_distortion(p: &[f64], cond: &Matrix, rho: &Matrix) -> (f64, f64) {
    let out = cond.left_mul(p);
    let mut rate = 0.0;
    let mut dist = 0.0;
    for (z, &pz) in p.iter().enumerate() {
        if pz == 0.0 {
            continue;
        }
        for (y, &q) in cond.row(z).iter().enumerate() {
            if q > 0.0 {
                rate += pz * q * math::ln(q / out[y]);
                dist += pz * q * rho[(z, y)];
            }
        }
    }
    (rate.max(0.0), dist)
}

struct Problem<'a> {
    p: &'a [f64],
    rho: &'a Matrix,
    row_min: Vec<f64>,
    feasible_cols: Vec<bool>,
}

impl<'a> Problem<'a> {
    fn new(source_law: &'a Pmf, dist: &'a DistortionMatrix) -> Result<Self> {
        let rho = dist.values();
        if rho.rows() != source_law.len() {
            return Err(Error::DimensionMismatch {
                expected: rho.rows(),
                got: source_law.len(),
            });
        }
        let mut row_min = vec![0.0; rho.rows()];
        let mut feasible_cols = vec![false; rho.cols()];
        for (z, slot) in row_min.iter_mut().enumerate() {
            let m = rho.row(z).iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
            if !m.is_finite() && source_law[z] > 0.0 {
                return Err(Error::InfeasibleRow(z));
            }
            *slot = if m.is_finite() { m } else { 0.0 };
            if source_law[z] > 0.0 {
                for (y, v) in rho.row(z).iter().enumerate() {
                    if v.is_finite() {
                        feasible_cols[y] = true;
                    }
                }
            }
        }
        Ok(Self {
            p: source_law.probs(),
            rho,
            row_min,
            feasible_cols,
        })
    }

    fn min_distortion(&self) -> f64 {
        self.p.iter().zip(&self.row_min).map(|(p, m)| p * m).sum()
    }

    /// The best constant reproduction, if it already meets `target`.
    fn zero_rate_point(&self, target: f64) -> Option<RdPoint> {
        let (nz, ny) = (self.rho.rows(), self.rho.cols());
        let (y, d) = (0..ny)
            .map(|y| {
                let d: f64 = (0..nz)
                    .filter(|&z| self.p[z] > 0.0)
                    .map(|z| self.p[z] * self.rho[(z, y)])
                    .sum();
                (y, d)
            })
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        if d > target {
            return None;
        }
        let mut conditional = Matrix::zeros(nz, ny);
        for z in 0..nz {
            conditional[(z, y)] = 1.0;
        }
        Some(RdPoint {
            rate: 0.0,
            distortion: d,
            conditional,
            output: Pmf::point(ny, y),
            beta: 0.0,
            iterations: 0,
        })
    }

    fn uniform_start(&self) -> Vec<f64> {
        let count = self.feasible_cols.iter().filter(|&&f| f).count() as f64;
        self.feasible_cols
            .iter()
            .map(|&f| if f { 1.0 / count } else { 0.0 })
            .collect()
    }

    fn kernel(&self, beta: f64) -> Matrix {
        let mut k = Matrix::zeros(self.rho.rows(), self.rho.cols());
        for z in 0..self.rho.rows() {
            for y in 0..self.rho.cols() {
                let r = self.rho[(z, y)];
                k[(z, y)] = if r.is_finite() {
                    math::exp(-beta * (r - self.row_min[z]))
                } else {
                    0.0
                };
            }
        }
        k
    }

    fn solve(&self, beta: f64, start: Vec<f64>) -> RdPoint {
        let kernel = self.kernel(beta);
        let nz = self.rho.rows();
        let ny = self.rho.cols();
        let mut q = start;
        let mut s = vec![0.0; nz];
        let mut prev_rate = f64::INFINITY;
        let mut prev_obj = f64::INFINITY;
        let mut iterations = 0;
        while iterations < MAX_ITERATIONS {
            iterations += 1;
            let mut obj = 0.0;
            for (z, sz) in s.iter_mut().enumerate() {
                *sz = kernel.row(z).iter().zip(&q).map(|(k, q)| k * q).sum();
                if self.p[z] > 0.0 {
                    obj -= self.p[z] * math::ln(*sz);
                }
            }
            debug_assert!(
                obj <= prev_obj + 1e-12 * (1.0 + math::abs(prev_obj)),
                "objective increased: {prev_obj} -> {obj}"
            );
            prev_obj = obj;
            let mut next = vec![0.0; ny];
            let mut rate = 0.0;
            for z in 0..nz {
                if self.p[z] == 0.0 {
                    continue;
                }
                for y in 0..ny {
                    let w = q[y] * kernel[(z, y)] / s[z];
                    next[y] += self.p[z] * w;
                }
            }
            for z in 0..nz {
                if self.p[z] == 0.0 {
                    continue;
                }
                for y in 0..ny {
                    let w = q[y] * kernel[(z, y)] / s[z];
                    if w > 0.0 {
                        rate += self.p[z] * w * math::ln(w / next[y]);
                    }
                }
            }
            q = next;
            let done = math::abs(rate - prev_rate) <= RATE_TOL * math::abs(rate) + 1e-300;
            prev_rate = rate;
            if done {
                break;
            }
        }
        let mut conditional = Matrix::zeros(nz, ny);
        for z in 0..nz {
            let row = conditional.row_mut(z);
            let mut total = 0.0;
            for y in 0..ny {
                row[y] = q[y] * kernel[(z, y)];
                total += row[y];
            }
            if total > 0.0 {
                for v in row.iter_mut() {
                    *v /= total;
                }
            } else {
                // zero-probability source symbol: any feasible row will do
                let y = (0..ny).find(|&y| self.rho[(z, y)].is_finite()).unwrap_or(0);
                row[y] = 1.0;
            }
        }
        let (rate, distortion) = rate_and_distortion(self.p, &conditional, self.rho);
        let output = Pmf::from_raw(conditional.left_mul(self.p));
        RdPoint {
            rate,
            distortion,
            conditional,
            output,
            beta,
            iterations,
        }
    }
}

/// Blahut-Arimoto at slope `beta` (nats per unit distortion).
///
/// Cells with infinite distortion get zero conditional mass.
pub fn blahut_arimoto(source_law: &Pmf, dist: &DistortionMatrix, beta: f64) -> Result<RdPoint> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("beta = {beta}")));
    }
    let prob = Problem::new(source_law, dist)?;
    Ok(prob.solve(beta, prob.uniform_start()))
}

/// The point of the rate-distortion curve at distortion `target`, found by
/// bisection on the slope with warm-started Blahut-Arimoto runs.
pub fn rd_at_distortion(source_law: &Pmf, dist: &DistortionMatrix, target: f64) -> Result<RdPoint> {
    const BETA_CAP: f64 = 1e6;
    let prob = Problem::new(source_law, dist)?;
    let d_min = prob.min_distortion();
    if target < d_min - 1e-12 {
        return Err(Error::InfeasibleTarget { target, min: d_min });
    }
    let uniform = prob.uniform_start();
    let warm = |q: &[f64]| -> Vec<f64> {
        q.iter().zip(&uniform).map(|(a, u)| 0.99 * a + 0.01 * u).collect()
    };
    if let Some(zero) = prob.zero_rate_point(target) {
        return Ok(zero);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut best = prob.solve(hi, uniform.clone());
    while best.distortion > target {
        lo = hi;
        hi *= 2.0;
        if hi > BETA_CAP {
            return Ok(best);
        }
        best = prob.solve(hi, warm(best.output.probs()));
    }
    let mut hi_point = best;
    for _ in 0..200 {
        if math::abs(hi_point.distortion - target) <= 1e-13 * (1.0 + target) || hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let pt = prob.solve(mid, warm(hi_point.output.probs()));
        if pt.distortion > target {
            lo = mid;
        } else {
            hi = mid;
            hi_point = pt;
        }
    }
    Ok(hi_point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{binary_entropy, matched_distortion, Channel};

    #[test]
    fn zero_slope_gives_zero_rate() {
        let p = Pmf::new(vec![0.3, 0.7]).unwrap();
        let pt = blahut_arimoto(&p, &DistortionMatrix::hamming(2), 0.0).unwrap();
        assert!(pt.rate < 1e-15);
        let row0 = pt.conditional.row(0).to_vec();
        assert!(Matrix::from_rows(&[row0.clone(), row0]).unwrap().max_abs_diff(&pt.conditional) < 1e-15);
    }

    #[test]
    fn binary_hamming_curve() {
        let p = Pmf::uniform(2);
        let pt = rd_at_distortion(&p, &DistortionMatrix::hamming(2), 0.2).unwrap();
        let expected = core::f64::consts::LN_2 - binary_entropy(0.2);
        assert!((pt.rate - expected).abs() < 1e-9, "{} vs {expected}", pt.rate);
        assert!((pt.rate / core::f64::consts::LN_2 - 0.2780719051126377).abs() < 1e-9);
    }

    #[test]
    fn matched_bsc_at_level() {
        let ch = Channel::binary_symmetric(0.3).unwrap();
        let prior = Pmf::uniform(2);
        let rho = matched_distortion(&ch, Some(&prior)).unwrap();
        let pz = ch.output_law(&prior).unwrap();
        let pt = rd_at_distortion(&pz, &rho, rho.level().unwrap()).unwrap();
        assert!((pt.rate / core::f64::consts::LN_2 - 0.1187091007693073).abs() < 1e-9);
        assert!((pt.beta - 1.0).abs() < 1e-6);
    }

    #[test]
    fn stored_values_match_recomputation() {
        let p = Pmf::new(vec![0.2, 0.5, 0.3]).unwrap();
        let rho = DistortionMatrix::new(
            Matrix::from_rows(&[[0.0, 1.0, f64::INFINITY], [2.0, 0.0, 1.0], [1.0, 0.5, 0.0]]).unwrap(),
        )
        .unwrap();
        for beta in [0.0, 0.3, 1.0, 4.0, 20.0] {
            let pt = blahut_arimoto(&p, &rho, beta).unwrap();
            let (r, d) = pt.recompute(&p, &rho);
            assert!((r - pt.rate).abs() < 1e-9 && (d - pt.distortion).abs() < 1e-9);
            assert_eq!(pt.conditional[(0, 2)], 0.0);
        }
    }

    #[test]
    fn infeasible_inputs() {
        let p = Pmf::uniform(2);
        let rho = DistortionMatrix::new(
            Matrix::from_rows(&[[f64::INFINITY, f64::INFINITY], [0.0, 1.0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(blahut_arimoto(&p, &rho, 1.0), Err(Error::InfeasibleRow(0)));
        let ham = DistortionMatrix::hamming(2);
        assert!(matches!(rd_at_distortion(&p, &ham, -0.1), Err(Error::InfeasibleTarget { .. })));
    }

    #[test]
    fn rate_decreases_along_slopes() {
        let p = Pmf::new(vec![0.1, 0.6, 0.3]).unwrap();
        let rho = DistortionMatrix::hamming(3);
        let mut last = (f64::INFINITY, -1.0);
        for beta in [8.0, 4.0, 2.0, 1.0, 0.5] {
            let pt = blahut_arimoto(&p, &rho, beta).unwrap();
            assert!(pt.rate <= last.0 + 1e-12 && pt.distortion >= last.1 - 1e-12);
            last = (pt.rate, pt.distortion);
        }
    }
}
