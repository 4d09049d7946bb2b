use alloc::vec;
use alloc::vec::Vec;

use crate::exec::Executor;
use crate::math;
use crate::matrix::Matrix;
use crate::prob::{Channel, DistortionMatrix, Pmf};
use crate::ratedist::{rd_at_distortion, RdPoint};
use crate::{Error, Result};

/// Tolerance on the affine fit residual.
pub const AFFINE_TOL: f64 = 1e-9;
/// Tolerance on the double-centering residual.
pub const SEPARABILITY_TOL: f64 = 1e-9;

/// Observation-domain distortion `d(z, y) = E[loss(X, y) | Z = z]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndirectDistortion {
    d: Matrix,
    channel: Channel,
    prior: Pmf,
    loss: Matrix,
    excluded: Vec<usize>,
}

impl IndirectDistortion {
    pub fn values(&self) -> &Matrix {
        &self.d
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn prior(&self) -> &Pmf {
        &self.prior
    }

    pub fn loss(&self) -> &Matrix {
        &self.loss
    }

    /// Observations with zero probability. Their rows hold the prior-expected
    /// loss and take no part in fits.
    pub fn excluded(&self) -> &[usize] {
        &self.excluded
    }

    pub fn observation_law(&self) -> Pmf {
        self.channel.output_law(&self.prior).expect("dimensions checked at construction")
    }

    pub fn to_distortion(&self) -> DistortionMatrix {
        DistortionMatrix::from_raw(self.d.clone(), None)
    }
}

/// Reduces the indirect problem to a direct one on the observations.
pub fn witsenhausen_reduce(ch: &Channel, prior: &Pmf, loss: &Matrix) -> Result<IndirectDistortion> {
    if loss.rows() != ch.inputs() {
        return Err(Error::DimensionMismatch {
            expected: ch.inputs(),
            got: loss.rows(),
        });
    }
    if let Some(&v) = loss.as_slice().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidParameter(alloc::format!("loss entry {v}")));
    }
    let post = ch.posterior(prior)?;
    let pz = ch.output_law(prior)?;
    let excluded: Vec<usize> = (0..ch.outputs()).filter(|&z| pz[z] <= 0.0).collect();
    let mut d = post.mul(loss)?;
    for &z in &excluded {
        let fallback = loss.left_mul(prior.probs());
        d.row_mut(z).copy_from_slice(&fallback);
    }
    Ok(IndirectDistortion {
        d,
        channel: ch.clone(),
        prior: prior.clone(),
        loss: loss.clone(),
        excluded,
    })
}

/// Indirect rate-distortion points at each target loss.
pub fn indirect_rd_curve<E: Executor>(
    reduced: &IndirectDistortion,
    observation_law: &Pmf,
    grid: &[f64],
    exec: &E,
) -> Result<Vec<RdPoint>> {
    let dist = reduced.to_distortion();
    exec.map_indexed(grid.len(), |i| rd_at_distortion(observation_law, &dist, grid[i]))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffinityReport {
    pub affine: bool,
    pub c1: f64,
    pub c2: Vec<f64>,
    pub residual: f64,
}

fn centered(row: &[f64]) -> Vec<f64> {
    let mean = row.iter().sum::<f64>() / row.len() as f64;
    row.iter().map(|v| v - mean).collect()
}

/// Decides whether `rho(z, y) = c1 d(z, y) + c2(z)` on every observation with
/// positive probability.
pub fn rho_affinity_test(dist: &DistortionMatrix, reduced: &IndirectDistortion) -> Result<AffinityReport> {
    let rho = dist.values();
    let d = &reduced.d;
    if rho.rows() != d.rows() || rho.cols() != d.cols() {
        return Err(Error::DimensionMismatch {
            expected: d.rows() * d.cols(),
            got: rho.rows() * rho.cols(),
        });
    }
    let rows: Vec<usize> = (0..d.rows()).filter(|z| !reduced.excluded.contains(z)).collect();
    let infinite_row = rows.iter().any(|&z| rho.row(z).iter().any(|v| !v.is_finite()));
    let fit_rows: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&z| rho.row(z).iter().all(|v| v.is_finite()))
        .collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for &z in &fit_rows {
        let rc = centered(rho.row(z));
        let dc = centered(d.row(z));
        num += rc.iter().zip(&dc).map(|(a, b)| a * b).sum::<f64>();
        den += dc.iter().map(|b| b * b).sum::<f64>();
    }
    if den <= 1e-24 {
        if infinite_row {
            return Ok(AffinityReport {
                affine: false,
                c1: f64::NAN,
                c2: vec![f64::NAN; d.rows()],
                residual: f64::INFINITY,
            });
        }
        return Err(Error::Unidentifiable);
    }
    let c1 = num / den;
    let mut residual = 0.0f64;
    let mut scale = 1.0f64;
    for &z in &fit_rows {
        let rc = centered(rho.row(z));
        let dc = centered(d.row(z));
        for (a, b) in rc.iter().zip(&dc) {
            residual = residual.max(math::abs(a - c1 * b));
            scale = scale.max(math::abs(*a));
        }
    }
    let c2 = (0..d.rows())
        .map(|z| {
            if fit_rows.contains(&z) {
                let n = d.cols() as f64;
                rho.row(z).iter().zip(d.row(z)).map(|(r, dv)| r - c1 * dv).sum::<f64>() / n
            } else {
                f64::NAN
            }
        })
        .collect();
    Ok(AffinityReport {
        affine: !infinite_row && residual <= AFFINE_TOL * scale,
        c1,
        c2,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdpReport {
    pub satisfied: bool,
    pub beta: f64,
    pub residual: f64,
}

/// Removes additive row and column effects over the cells in `mask` by
/// alternating projections.
fn double_center(m: &Matrix, mask: &[Vec<bool>]) -> Matrix {
    let (rows, cols) = (m.rows(), m.cols());
    let mut r = m.clone();
    for _ in 0..100_000 {
        let mut change = 0.0f64;
        for z in 0..rows {
            let cells: Vec<usize> = (0..cols).filter(|&y| mask[z][y]).collect();
            if cells.is_empty() {
                continue;
            }
            let mean = cells.iter().map(|&y| r[(z, y)]).sum::<f64>() / cells.len() as f64;
            for &y in &cells {
                r[(z, y)] -= mean;
            }
            change = change.max(math::abs(mean));
        }
        for y in 0..cols {
            let cells: Vec<usize> = (0..rows).filter(|&z| mask[z][y]).collect();
            if cells.is_empty() {
                continue;
            }
            let mean = cells.iter().map(|&z| r[(z, y)]).sum::<f64>() / cells.len() as f64;
            for &z in &cells {
                r[(z, y)] -= mean;
            }
            change = change.max(math::abs(mean));
        }
        if change < 1e-15 {
            break;
        }
    }
    r
}

/// Tests whether `candidate(y | z) = output(y) exp(-beta d(z, y) + A(y) + B(z))`
/// for some `beta > 0`.
///
/// The candidate must reproduce `output_law` from the observation law implied
/// by `reduced`; otherwise [`Error::PerceptionViolated`] is returned.
pub fn rdp_exponential_form_test(
    candidate: &Matrix,
    reduced: &IndirectDistortion,
    output_law: &Pmf,
) -> Result<RdpReport> {
    let d = &reduced.d;
    if candidate.rows() != d.rows() || candidate.cols() != d.cols() || output_law.len() != d.cols() {
        return Err(Error::DimensionMismatch {
            expected: d.rows() * d.cols(),
            got: candidate.rows() * candidate.cols(),
        });
    }
    let pz = reduced.observation_law();
    for z in 0..candidate.rows() {
        if pz[z] > 0.0 {
            Pmf::new(candidate.row(z).to_vec())?;
        }
    }
    let induced = candidate.left_mul(pz.probs());
    let gap = induced
        .iter()
        .zip(output_law.probs())
        .map(|(a, b)| math::abs(a - b))
        .fold(0.0, f64::max);
    if gap > 1e-9 {
        return Err(Error::PerceptionViolated { gap });
    }
    let (rows, cols) = (d.rows(), d.cols());
    let mut mask = vec![vec![false; cols]; rows];
    let mut log_ratio = Matrix::zeros(rows, cols);
    let failed = RdpReport {
        satisfied: false,
        beta: f64::NAN,
        residual: f64::INFINITY,
    };
    for z in 0..rows {
        if pz[z] <= 0.0 {
            continue;
        }
        for y in 0..cols {
            if output_law[y] <= 0.0 {
                continue;
            }
            let c = candidate[(z, y)];
            match (c > 0.0, d[(z, y)].is_finite()) {
                (true, true) => {
                    mask[z][y] = true;
                    log_ratio[(z, y)] = math::ln(c / output_law[y]);
                }
                (false, false) => {}
                _ => return Ok(failed),
            }
        }
    }
    let mut dm = Matrix::zeros(rows, cols);
    for z in 0..rows {
        for y in 0..cols {
            if mask[z][y] {
                dm[(z, y)] = d[(z, y)];
            }
        }
    }
    let mc = double_center(&log_ratio, &mask);
    let dc = double_center(&dm, &mask);
    let mut num = 0.0;
    let mut den = 0.0;
    for z in 0..rows {
        for y in 0..cols {
            if mask[z][y] {
                num += mc[(z, y)] * dc[(z, y)];
                den += dc[(z, y)] * dc[(z, y)];
            }
        }
    }
    let beta = if den > 1e-24 { -num / den } else { 0.0 };
    let mut residual = 0.0f64;
    for z in 0..rows {
        for y in 0..cols {
            if mask[z][y] {
                residual = residual.max(math::abs(mc[(z, y)] + beta * dc[(z, y)]));
            }
        }
    }
    let separable_d = den <= 1e-24;
    Ok(RdpReport {
        satisfied: residual < SEPARABILITY_TOL && (beta > 0.0 || separable_d),
        beta,
        residual,
    })
}
