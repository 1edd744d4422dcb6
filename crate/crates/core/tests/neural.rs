use auxgan_core::neural::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_generator(seed: u64) -> GeneratorParams {
    let dims = GeneratorDims { vocab: 12, emb: 4, hid: 8 };
    let mut p = GeneratorParams::init(dims, seed);
    // push weights away from the init scale so every path is exercised
    for x in p.data.iter_mut() {
        *x *= 2.0;
    }
    p
}

#[test]
fn lstm_gradients_match_finite_differences() {
    let allowed: Vec<bool> = (0..12).map(|t| t != 0).collect();
    for seed in 0..3 {
        let p = small_generator(seed);
        let seq = [3, 7, 1, 11, 5];
        let weights = [0.7, -0.3, 1.1, 0.4, 2.0];
        let mut grad = vec![0.0; p.data.len()];
        weighted_log_prob_grad(&p, &allowed, 2, &seq, &weights, &mut grad).unwrap();
        let f = |data: &[f64]| {
            let q = GeneratorParams::from_data(p.dims, data.to_vec()).unwrap();
            let mut g = vec![0.0; data.len()];
            weighted_log_prob_grad(&q, &allowed, 2, &seq, &weights, &mut g).unwrap()
        };
        for check in gradient_check(f, &p.data, &grad, &p.dims.layout(), 1e-4) {
            assert!(check.max_rel_error < 1e-4, "seed {seed}: {check:?}");
        }
    }
}

#[test]
fn weighted_sum_matches_log_prob() {
    let p = small_generator(5);
    let allowed = vec![true; 12];
    let seq = [1, 2, 3];
    let mut g = vec![0.0; p.data.len()];
    let w = weighted_log_prob_grad(&p, &allowed, 0, &seq, &[1.0; 3], &mut g).unwrap();
    assert!((w - sequence_log_prob(&p, &allowed, 0, &seq).unwrap()).abs() < 1e-12);
}

#[test]
fn critic_gradients_match_finite_differences() {
    let dims = CriticDims {
        vocab: 12,
        emb: 4,
        windows: vec![1, 2, 3],
        filters: 3,
        pad_to: 8,
        pad_token: 0,
    };
    for seed in 0..3 {
        let p = CriticParams::init(dims.clone(), 0.6, seed);
        let seq = [4, 9, 1, 11, 2, 6];
        let mut grad = vec![0.0; p.data.len()];
        critic_score_grad(&p, &seq, 1.0, &mut grad).unwrap();
        let f = |data: &[f64]| {
            let q = CriticParams::from_data(dims.clone(), data.to_vec()).unwrap();
            critic_score(&q, &seq).unwrap()
        };
        for check in gradient_check(f, &p.data, &grad, &dims.layout(), 1e-4) {
            assert!(check.max_rel_error < 1e-4, "seed {seed}: {check:?}");
        }
    }
}

#[test]
fn constant_loss_has_zero_gradient() {
    let dims = CriticDims {
        vocab: 5,
        emb: 2,
        windows: vec![1, 2],
        filters: 2,
        pad_to: 4,
        pad_token: 0,
    };
    let p = CriticParams::init(dims, 0.3, 1);
    let mut grad = vec![0.0; p.data.len()];
    critic_score_grad(&p, &[1, 2], 0.0, &mut grad).unwrap();
    assert!(grad.iter().all(|&g| g == 0.0));
}

/// Enumerate every stop-respecting sequence on a 3-token vocabulary
/// {pad, eos, a} with the pad masked out, max length 3.
#[test]
fn sequence_probabilities_sum_to_one() {
    let dims = GeneratorDims { vocab: 4, emb: 3, hid: 5 };
    let p = GeneratorParams::init(dims, 9);
    // token 0 start, 1 eos, 2 and 3 symbols
    let allowed = vec![false, true, true, true];
    let mut total = 0.0;
    let mut stack: Vec<Vec<usize>> = vec![vec![]];
    while let Some(prefix) = stack.pop() {
        for tok in 1..4 {
            let mut s = prefix.clone();
            s.push(tok);
            if tok == 1 || s.len() == 3 {
                total += sequence_log_prob(&p, &allowed, 0, &s).unwrap().exp();
            } else {
                stack.push(s);
            }
        }
    }
    assert!((total - 1.0).abs() < 1e-12, "{total}");
}

#[test]
fn softmax_is_normalized_along_samples() {
    let p = small_generator(3);
    let allowed: Vec<bool> = (0..12).map(|t| t != 0).collect();
    let mut state = GeneratorState::zeros(8);
    let mut tok = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..30 {
        let (probs, next) = next_distribution(&p, &state, tok, &allowed).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        tok = sample_index(&probs, &mut rng);
        state = next;
    }
}

proptest! {
    #[test]
    fn clipping_bounds_every_weight(seed in any::<u64>(), scale in 0.0f64..5.0, c in 0.001f64..1.0) {
        let dims = CriticDims { vocab: 5, emb: 2, windows: vec![1, 2], filters: 2, pad_to: 4, pad_token: 0 };
        let mut p = CriticParams::init(dims, scale, seed);
        clip_weights(&mut p, c);
        prop_assert!(p.data.iter().all(|w| w.abs() <= c));
    }

    #[test]
    fn sampled_length_never_exceeds_cap(seed in any::<u64>(), max_len in 1usize..12) {
        let p = small_generator(seed % 7);
        let spec = PolicySpec { allowed: (0..12).map(|t| t > 1).chain([]).collect(), eos: Some(2), max_len };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = sample_sequence(&p, &spec, 0, &mut rng).unwrap();
        prop_assert!(s.len() <= max_len);
        prop_assert!(s.iter().all(|&t| t > 1));
    }
}
