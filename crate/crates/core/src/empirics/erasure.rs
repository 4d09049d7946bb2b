use crate::math;
use crate::{Error, Result};

/// Closed forms for the binary symmetric Markov source seen through an
/// erasure channel, under Hamming loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErasureForms {
    pub bayes_loss: f64,
    /// Expected loss of two independent posterior draws, `E[F(α)]`.
    pub denoiser_loss: f64,
    /// `E[2 min(α, 1 - α)]`, the worst-case coupling bound.
    pub upper_bound: f64,
    pub terms_used: usize,
}

/// Evaluates both losses; the double sum is cut to an `N x N` square once the
/// neglected mass is below `truncation_tol`.
///
/// `p_s = 1/2` is accepted; there the source is i.i.d. and `0^0 = 1`.
pub fn erasure_closed_forms(p_s: f64, p_e: f64, truncation_tol: f64) -> Result<ErasureForms> {
    if !(p_s > 0.0 && p_s <= 0.5) {
        return Err(Error::InvalidParameter(alloc::format!("p_s = {p_s} outside (0, 1/2]")));
    }
    if !(0.0..1.0).contains(&p_e) {
        return Err(Error::InvalidParameter(alloc::format!("p_e = {p_e} outside [0, 1)")));
    }
    if truncation_tol.is_nan() || truncation_tol <= 0.0 {
        return Err(Error::InvalidParameter("truncation tolerance must be positive".into()));
    }
    let q = 1.0 - 2.0 * p_s;
    let bayes_loss = p_e * p_s / (1.0 - p_e * p_e * q);

    // each term is at most (1/2)(1 - p_e)^2 p_e^(s+t), so the mass outside
    // the square s, t < N is at most (1/2)(1 - (1 - p_e^N)^2)
    let tail = |side: usize| {
        let inside = 1.0 - math::powi(p_e, side as i32);
        0.5 * (1.0 - inside * inside)
    };
    let mut side = 1usize;
    while tail(side) >= truncation_tol {
        side += 1;
    }
    let q2 = q * q;
    let mut sum = 0.0;
    let mut pe_s = 1.0;
    let mut qs = 1.0;
    for _ in 0..side {
        let mut pe_t = 1.0;
        let mut qt = q2;
        let mut row = 0.0;
        for _ in 0..side {
            let den = 1.0 - qt * qs;
            if den > 0.0 {
                row += pe_t * (1.0 - qt) * (1.0 - qs) / den;
            }
            pe_t *= p_e;
            qt *= q2;
        }
        sum += pe_s * row;
        pe_s *= p_e;
        qs *= q2;
    }
    let denoiser_loss = 0.5 * (1.0 - p_e) * (1.0 - p_e) * sum;
    Ok(ErasureForms {
        bayes_loss,
        denoiser_loss,
        upper_bound: 2.0 * bayes_loss,
        terms_used: side * side,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_erasures() {
        let f = erasure_closed_forms(0.2, 0.0, 1e-12).unwrap();
        assert_eq!((f.bayes_loss, f.denoiser_loss), (0.0, 0.0));
    }

    #[test]
    fn reference_values() {
        let f = erasure_closed_forms(0.1, 0.5, 1e-12).unwrap();
        assert_eq!(f.bayes_loss, 0.0625);
        // exact enumeration over (T-, T+) and neighbour values
        assert!((f.denoiser_loss - 0.08562698350392006).abs() < 1e-12);
        let f = erasure_closed_forms(0.3, 0.7, 1e-12).unwrap();
        assert!((f.denoiser_loss - 0.31394853261345584).abs() < 1e-12);
        assert!((f.bayes_loss - 0.26119402985074625).abs() < 1e-15);
    }

    #[test]
    fn memoryless_limit() {
        for p_e in [0.1, 0.5, 0.9] {
            let f = erasure_closed_forms(0.5, p_e, 1e-13).unwrap();
            assert!((f.denoiser_loss - p_e / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn ordering_on_grid() {
        for i in 1..10 {
            for j in 0..10 {
                let f = erasure_closed_forms(0.05 * i as f64, 0.1 * j as f64, 1e-12).unwrap();
                assert!(f.bayes_loss <= f.denoiser_loss + 1e-15);
                assert!(f.denoiser_loss <= f.upper_bound + 1e-15);
            }
        }
    }
}
