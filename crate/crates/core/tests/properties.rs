use cbdenoise_core::codec::{encode, Codebook};
use cbdenoise_core::empirics::{bayes_response, empirical_joint, pair_upper_bound, LossSpec};
use cbdenoise_core::inference::{forward_backward, posterior_path_sample};
use cbdenoise_core::prob::{
    entropy, kl_divergence, matched_distortion, mutual_information, tv_distance, Channel, DistortionMatrix,
    JointPmf, Pmf,
};
use cbdenoise_core::ratedist::{blahut_arimoto, rd_at_distortion};
use cbdenoise_core::source::Source;
use cbdenoise_core::Matrix;
use proptest::prelude::*;

fn pmf(size: usize) -> impl Strategy<Value = Pmf> {
    prop::collection::vec(0.01f64..1.0, size).prop_map(|w| Pmf::normalized_from(w).unwrap())
}

fn channel(rows: usize, cols: usize) -> impl Strategy<Value = Channel> {
    prop::collection::vec(pmf(cols), rows).prop_map(|rows| {
        let rows: Vec<Vec<f64>> = rows.into_iter().map(Pmf::into_vec).collect();
        Channel::new(Matrix::from_rows(&rows).unwrap()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn information_inequalities(p in pmf(3), q in pmf(3), ch in channel(3, 4)) {
        let h = entropy(&p);
        prop_assert!(h >= 0.0 && h <= 3f64.ln() + 1e-12);
        prop_assert!(kl_divergence(&p, &q).unwrap() >= -1e-12);
        let tv = tv_distance(&p, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&tv));
        prop_assert!((tv - tv_distance(&q, &p).unwrap()).abs() < 1e-15);
        let joint = JointPmf::from_channel(&p, &ch).unwrap();
        let mi = mutual_information(&joint).unwrap();
        prop_assert!(mi >= -1e-12 && mi <= h + 1e-12);
    }

    #[test]
    fn ba_points_are_consistent(p in pmf(3), beta in 0.05f64..20.0) {
        let d = DistortionMatrix::hamming(3);
        let pt = blahut_arimoto(&p, &d, beta).unwrap();
        let (r, dd) = pt.recompute(&p, &d);
        prop_assert!((r - pt.rate).abs() < 1e-9 && (dd - pt.distortion).abs() < 1e-9);
        for z in 0..3 {
            let s: f64 = pt.conditional.row(z).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
        }
        prop_assert!(pt.rate >= -1e-12 && pt.rate <= entropy(&p) + 1e-9);
    }

    #[test]
    fn rd_curve_is_nonincreasing(p in pmf(2), d1 in 0.01f64..0.3, gap in 0.01f64..0.2) {
        let d = DistortionMatrix::hamming(2);
        let a = rd_at_distortion(&p, &d, d1).unwrap();
        let b = rd_at_distortion(&p, &d, d1 + gap).unwrap();
        prop_assert!(b.rate <= a.rate + 1e-7);
    }

    #[test]
    fn posterior_marginals_are_distributions(
        ps in 0.05f64..0.45,
        ch in channel(2, 3),
        z in prop::collection::vec(0usize..3, 1..40),
    ) {
        let src = Source::binary_symmetric(ps).unwrap();
        let fb = forward_backward(&src, &ch, &z).unwrap();
        for i in 0..z.len() {
            let s: f64 = fb.row(i).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            prop_assert!(fb.row(i).iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn path_samples_are_reproducible(ps in 0.05f64..0.45, seed in any::<u64>(), z in prop::collection::vec(0usize..2, 1..30)) {
        let src = Source::binary_symmetric(ps).unwrap();
        let ch = Channel::binary_symmetric(0.2).unwrap();
        let a = posterior_path_sample(&src, &ch, &z, seed).unwrap();
        let b = posterior_path_sample(&src, &ch, &z, seed).unwrap();
        prop_assert_eq!(a.symbols, b.symbols);
    }

    #[test]
    fn window_counts_sum_to_interior(
        k in 0usize..3,
        xs in prop::collection::vec((0usize..2, 0usize..3, 0usize..2), 7..40),
    ) {
        let x: Vec<usize> = xs.iter().map(|t| t.0).collect();
        let z: Vec<usize> = xs.iter().map(|t| t.1).collect();
        let y: Vec<usize> = xs.iter().map(|t| t.2).collect();
        let ej = empirical_joint(&x, &z, &y, k, [2, 3, 2]).unwrap();
        prop_assert_eq!(ej.counts().iter().sum::<u64>() as usize, x.len() - 2 * k);
        prop_assert!((ej.to_joint().total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_ordering(p in pmf(3), emb in prop::collection::vec(-2.0f64..2.0, 3)) {
        for loss in [LossSpec::hamming(3), LossSpec::mse(&emb).unwrap()] {
            let p = p.probs();
            let bayes = bayes_response(p, &loss).1;
            let mut pair = 0.0;
            for u in 0..3 {
                for v in 0..3 {
                    pair += p[u] * p[v] * loss.get(u, v);
                }
            }
            let upper = pair_upper_bound(p, &loss).unwrap();
            prop_assert!(bayes <= pair + 1e-9, "{} > {}", bayes, pair);
            prop_assert!(pair <= upper + 1e-9, "{} > {}", pair, upper);
        }
    }

    #[test]
    fn encoding_minimizes_block_distortion(
        words in prop::collection::vec(prop::collection::vec(0usize..2, 6), 1..12),
        z in prop::collection::vec(0usize..2, 6),
    ) {
        let rho = matched_distortion(&Channel::binary_symmetric(0.15).unwrap(), None).unwrap();
        let cb = Codebook::from_words(&words, 2).unwrap();
        let enc = encode(&cb, &rho, &z).unwrap();
        for w in &words {
            prop_assert!(enc.distortion <= rho.block(&z, w) + 1e-12);
        }
    }
}
