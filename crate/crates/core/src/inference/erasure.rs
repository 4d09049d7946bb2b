use alloc::vec;

use crate::math;
use crate::prob::{Channel, Pmf};
use crate::{Error, Result};

/// Posterior of `X_0` for the binary symmetric Markov source (switching
/// probability `p_s`) seen through a binary erasure channel.
///
/// Only the nearest unerased observation on each side of `center` matters. A
/// side with no unerased symbol inside `z` contributes nothing.
pub fn erasure_posterior_closed_form(p_s: f64, p_e: f64, z: &[usize], center: usize) -> Result<Pmf> {
    if !(p_s > 0.0 && p_s <= 0.5) {
        return Err(Error::InvalidParameter(alloc::format!("p_s = {p_s} outside (0, 1/2]")));
    }
    if !(0.0..1.0).contains(&p_e) {
        return Err(Error::InvalidParameter(alloc::format!("p_e = {p_e} outside [0, 1)")));
    }
    if center >= z.len() {
        return Err(Error::InvalidParameter("center outside realization".into()));
    }
    if let Some(&bad) = z.iter().find(|&&s| s > Channel::ERASURE) {
        return Err(Error::InvalidParameter(alloc::format!("symbol {bad} is not 0, 1 or erasure")));
    }
    if z[center] != Channel::ERASURE {
        return Ok(Pmf::point(2, z[center]));
    }
    let q = 1.0 - 2.0 * p_s;
    let left = z[..center]
        .iter()
        .rev()
        .position(|&s| s != Channel::ERASURE)
        .map(|i| (z[center - 1 - i], i + 1));
    let right = z[center + 1..]
        .iter()
        .position(|&s| s != Channel::ERASURE)
        .map(|i| (z[center + 1 + i], i + 1));
    let mut w = vec![1.0, 1.0];
    for (x0, slot) in w.iter_mut().enumerate() {
        for &(obs, dist) in left.iter().chain(right.iter()) {
            let sign = if (x0 + obs) % 2 == 0 { 1.0 } else { -1.0 };
            *slot *= 1.0 + sign * math::powi(q, dist as i32);
        }
    }
    Pmf::normalized_from(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::forward_backward;
    use crate::rng::Stream;
    use crate::source::Source;

    const E: usize = Channel::ERASURE;

    #[test]
    fn observed_center_and_all_erased() {
        let p = erasure_posterior_closed_form(0.1, 0.5, &[E, 1, E], 1).unwrap();
        assert_eq!(p.probs(), &[0.0, 1.0]);
        let p = erasure_posterior_closed_form(0.1, 0.5, &[E; 9], 4).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn opposing_neighbours_cancel() {
        let p = erasure_posterior_closed_form(0.1, 0.5, &[0, E, 1], 1).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_neighbour_gives_two_point_marginal() {
        // one step away: P(X_0 = z | X_1 = z) = 1 - p_s
        let p = erasure_posterior_closed_form(0.1, 0.5, &[E, E, 0], 1).unwrap();
        assert!((p[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_forward_backward() {
        let mut rng = Stream::new(99);
        for trial in 0..10_000 {
            let p_s = 0.02 + 0.46 * rng.uniform();
            let p_e = 0.95 * rng.uniform();
            let src = Source::binary_symmetric(p_s).unwrap();
            let ch = Channel::binary_erasure(p_e).unwrap();
            let n = 1 + trial % 25;
            let x = src.sample_with(n, &mut rng);
            let z = ch.transmit(&x, &mut rng);
            let fb = forward_backward(&src, &ch, &z).unwrap();
            let center = rng.below(n);
            let closed = erasure_posterior_closed_form(p_s, p_e, &z, center).unwrap();
            assert!((closed[0] - fb.row(center)[0]).abs() < 1e-10, "trial {trial}");
        }
    }
}
