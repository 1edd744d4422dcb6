//! One function per acceptance criterion. Each returns a short summary of
//! the measured quantities, or what went wrong.

use std::fs;
use std::path::{Path, PathBuf};

use auxgan_core::adversarial::{
    compute_q, estimate_rewards, min_max_standardize, policy_gradient, pretrain_generator_mle, shape_rewards,
    CompletionScorer, RewardConfig, Sampled, ShapingInput,
};
use auxgan_core::auxdisc::{auc, train_random_forest, LabeledDataset, DEFAULT_TREES};
use auxgan_core::chem::{canonicalize, fingerprint, parse_smiles, tanimoto, write_smiles, Fingerprint};
use auxgan_core::config::TrainingConfig;
use auxgan_core::data::synth::{synthetic_corpus, write_corpus, SyntheticSpec};
use auxgan_core::data::{preprocess, LengthBounds, OversampledSampler, Vocabulary};
use auxgan_core::descriptors::{DescriptorVector, DESCRIPTOR_COUNT};
use auxgan_core::neural::*;
use auxgan_core::pipeline;
use rand::seq::SliceRandom;
use rand::Rng;

pub type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// The bundled toy config with the dataset path made absolute.
pub fn bundled_config() -> TrainingConfig {
    let root = repo_root();
    let mut cfg = TrainingConfig::load(&root.join("configs/synthetic.toml")).unwrap();
    cfg.dataset = root.join(&cfg.dataset).display().to_string();
    cfg
}

// 1

pub fn gradients() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut tensors = 0;
    for seed in 0..3 {
        let dims = GeneratorDims { vocab: 10, emb: 4, hid: 6 };
        let mut p = GeneratorParams::init(dims, seed);
        p.data.iter_mut().for_each(|x| *x *= 2.0);
        let allowed: Vec<bool> = (0..10).map(|t| t != 0).collect();
        let seq = [3, 7, 1, 9, 5, 2];
        let weights = [0.7, -0.3, 1.1, 0.4, 2.0, -1.2];
        let mut grad = vec![0.0; p.data.len()];
        weighted_log_prob_grad(&p, &allowed, 0, &seq, &weights, &mut grad).map_err(|e| e.to_string())?;
        let f = |data: &[f64]| {
            let q = GeneratorParams::from_data(dims, data.to_vec()).unwrap();
            let mut g = vec![0.0; data.len()];
            weighted_log_prob_grad(&q, &allowed, 0, &seq, &weights, &mut g).unwrap()
        };
        for c in gradient_check(f, &p.data, &grad, &dims.layout(), 1e-4) {
            ensure(c.max_rel_error < 1e-4, || format!("generator seed {seed}: {c:?}"))?;
            worst = worst.max(c.max_rel_error);
            tensors += 1;
        }

        let cdims = CriticDims {
            vocab: 10,
            emb: 3,
            windows: vec![1, 2, 3],
            filters: 3,
            pad_to: 7,
            pad_token: 0,
        };
        let c = CriticParams::init(cdims.clone(), 0.6, seed);
        let seq = [4, 9, 1, 8, 2];
        let mut grad = vec![0.0; c.data.len()];
        critic_score_grad(&c, &seq, 1.0, &mut grad).map_err(|e| e.to_string())?;
        let f = |data: &[f64]| critic_score(&CriticParams::from_data(cdims.clone(), data.to_vec()).unwrap(), &seq).unwrap();
        for check in gradient_check(f, &c.data, &grad, &cdims.layout(), 1e-4) {
            ensure(check.max_rel_error < 1e-4, || format!("critic seed {seed}: {check:?}"))?;
            worst = worst.max(check.max_rel_error);
            tensors += 1;
        }
    }
    Ok(format!("{tensors} tensors, max relative error {worst:.2e}"))
}

// 2

/// Generator over tokens {start=0, A=1, B=2} emitting exactly two symbols.
pub fn two_token_policy(seed: u64) -> (GeneratorParams, PolicySpec) {
    let mut p = GeneratorParams::init(GeneratorDims { vocab: 3, emb: 2, hid: 3 }, seed);
    p.data.iter_mut().for_each(|x| *x *= 3.0);
    let spec = PolicySpec {
        allowed: vec![false, true, true],
        eos: None,
        max_len: 2,
    };
    (p, spec)
}

pub fn two_token_reward(seq: &[usize]) -> f64 {
    match seq {
        [1, 1] => 1.0,
        [1, 2] => 0.2,
        [2, 1] => 0.6,
        _ => 0.0,
    }
}

pub const OUTCOMES: [[usize; 2]; 4] = [[1, 1], [1, 2], [2, 1], [2, 2]];

pub fn expected_reward(p: &GeneratorParams, allowed: &[bool]) -> f64 {
    OUTCOMES
        .iter()
        .map(|s| sequence_log_prob(p, allowed, 0, s).unwrap().exp() * two_token_reward(s))
        .sum()
}

/// Exact Q(1), Q(2) of a two-symbol sequence.
pub fn exact_q(p: &GeneratorParams, allowed: &[bool], seq: &[usize]) -> Vec<f64> {
    let first = sequence_log_prob(p, allowed, 0, &seq[..1]).unwrap();
    let q1 = [1, 2]
        .iter()
        .map(|&b| {
            let s = [seq[0], b];
            (sequence_log_prob(p, allowed, 0, &s).unwrap() - first).exp() * two_token_reward(&s)
        })
        .sum();
    vec![q1, two_token_reward(seq)]
}

pub fn policy_gradient_unbiased() -> Outcome {
    let (p, spec) = two_token_policy(5);
    let allowed = &spec.allowed;
    let n = 20000;
    let mut rng = super::rng(21);
    let batch: Vec<Sampled> = (0..n)
        .map(|_| Sampled {
            class: 0,
            start: 0,
            tokens: sample_sequence(&p, &spec, 0, &mut rng).unwrap(),
        })
        .collect();
    let q: Vec<Vec<f64>> = batch.iter().map(|s| exact_q(&p, allowed, &s.tokens)).collect();
    let mean = policy_gradient(&p, allowed, &batch, &q).map_err(|e| e.to_string())?;

    // per-sample gradients take one value per outcome
    let per_outcome: Vec<Vec<f64>> = OUTCOMES
        .iter()
        .map(|s| {
            let one = Sampled {
                class: 0,
                start: 0,
                tokens: s.to_vec(),
            };
            policy_gradient(&p, allowed, &[one], &[exact_q(&p, allowed, s)]).unwrap()
        })
        .collect();
    let counts: Vec<f64> = OUTCOMES
        .iter()
        .map(|o| batch.iter().filter(|s| s.tokens == o).count() as f64)
        .collect();

    let h = 1e-5;
    let t = 2.0;
    let mut worst_z: f64 = 0.0;
    for i in 0..p.data.len() {
        let mut plus = p.clone();
        plus.data[i] += h;
        let mut minus = p.clone();
        minus.data[i] -= h;
        let enumerated = (expected_reward(&plus, allowed) - expected_reward(&minus, allowed)) / (2.0 * h) / t;
        let m2: f64 = (0..4).map(|k| counts[k] * per_outcome[k][i].powi(2)).sum::<f64>() / n as f64;
        let var = (m2 - mean[i].powi(2)).max(0.0) * n as f64 / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        let diff = (mean[i] - enumerated).abs();
        ensure(diff <= 3.0 * se + 1e-8, || {
            format!("parameter {i}: MC {} vs enumerated {enumerated} (se {se})", mean[i])
        })?;
        if se > 0.0 {
            worst_z = worst_z.max(diff / se);
        }
    }
    Ok(format!("{} parameters, {n} samples, max |z| {worst_z:.2}", p.data.len()))
}

// 3

pub struct TableScorer;

impl CompletionScorer for TableScorer {
    fn critic(&self, seq: &[usize]) -> f64 {
        let k = seq.iter().fold(0, |acc, &t| acc * 7 + t);
        (k % 11) as f64 / 10.0 - 0.3
    }

    fn auxiliary(&self, seq: &[usize], _class: usize) -> Vec<f64> {
        let k = seq.iter().fold(0, |acc, &t| acc * 3 + t);
        vec![(k % 5) as f64 / 4.0]
    }
}

pub fn three_token_policy() -> (GeneratorParams, PolicySpec) {
    let mut p = GeneratorParams::init(GeneratorDims { vocab: 4, emb: 3, hid: 4 }, 9);
    p.data.iter_mut().for_each(|x| *x *= 3.0);
    let spec = PolicySpec {
        allowed: vec![false, true, true, true],
        eos: None,
        max_len: 3,
    };
    (p, spec)
}

pub fn plain_reward_config(lambdas: Vec<f64>, rollouts: usize) -> RewardConfig {
    RewardConfig {
        lambdas,
        rollouts,
        offset: 1,
        standardize: false,
        repetition_penalty: false,
        length_weight: false,
        ..RewardConfig::default()
    }
}

pub fn shaping_stub(n: usize) -> Vec<ShapingInput> {
    vec![
        ShapingInput {
            key: String::new(),
            length: 3,
            length_mean: 3.0,
            length_std: 1.0,
        };
        n
    ]
}

fn q1_estimate(p: &GeneratorParams, spec: &PolicySpec, cfg: &RewardConfig, seed: u64) -> f64 {
    let batch = [Sampled {
        class: 0,
        start: 0,
        tokens: vec![1, 2, 3],
    }];
    estimate_rewards(p, spec, &batch, &TableScorer, &shaping_stub(1), cfg, &[seed]).unwrap().q[0][0]
}

pub fn q_convergence() -> Outcome {
    let (p, spec) = three_token_policy();
    let lambdas = vec![0.3, 0.7];
    let reward = |s: &[usize]| compute_q(&lambdas, &[(TableScorer.critic(s), TableScorer.auxiliary(s, 0))]);
    // all 27 outcomes; Q(1) conditions on the first symbol
    let mut mass = 0.0;
    let mut first = 0.0;
    let mut second = 0.0;
    for a in 1..4 {
        for b in 1..4 {
            for c in 1..4 {
                let s = [a, b, c];
                let pr = sequence_log_prob(&p, &spec.allowed, 0, &s).unwrap().exp();
                if a == 1 {
                    mass += pr;
                    first += pr * reward(&s);
                    second += pr * reward(&s).powi(2);
                }
            }
        }
    }
    let exact = first / mass;
    let sd = (second / mass - exact * exact).sqrt();
    let m = 10000;
    let est = q1_estimate(&p, &spec, &plain_reward_config(lambdas.clone(), m), 1);
    let se = sd / (m as f64).sqrt();
    ensure((est - exact).abs() < 3.0 * se, || format!("Q(1) {est} vs exact {exact} (se {se})"))?;

    let reps = 400;
    let variance = |m: usize, base: u64| {
        let cfg = plain_reward_config(lambdas.clone(), m);
        let v: Vec<f64> = (0..reps).map(|r| q1_estimate(&p, &spec, &cfg, base + r)).collect();
        let mu = v.iter().sum::<f64>() / reps as f64;
        v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (reps - 1) as f64
    };
    let ratio = variance(50, 1000) / variance(200, 5000);
    ensure((2.0..=6.0).contains(&ratio), || format!("variance ratio {ratio}"))?;
    Ok(format!(
        "Q(1) {est:.5} vs exact {exact:.5} ({:.2} se); var(M)/var(4M) {ratio:.2}",
        (est - exact).abs() / se
    ))
}

// 4

pub fn shaping_exact() -> Outcome {
    let mut rng = super::rng(4);
    for _ in 0..500 {
        let n = rng.gen_range(2..50);
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e3..1e3)).collect();
        v[0] = v[1] + 1.0;
        let (s, _, _) = min_max_standardize(&v);
        let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ensure(lo == 0.0 && hi == 1.0, || format!("standardized range [{lo}, {hi}]"))?;
    }
    let cfg = RewardConfig::default();
    for k in 1..=6usize {
        let mut inputs = Vec::new();
        let mut blended = Vec::new();
        for i in 0..k + 2 {
            let key = if i < k { "dup".to_string() } else { format!("u{i}") };
            inputs.push(ShapingInput {
                key,
                length: 20,
                length_mean: 20.0,
                length_std: 3.0,
            });
            blended.push(vec![0.37 + i as f64 * 0.01, 0.91]);
        }
        let (shaped, audit) = shape_rewards(blended.clone(), &inputs, &cfg);
        for i in 0..k {
            for (s, b) in shaped[i].iter().zip(&blended[i]) {
                ensure(*s == b / k as f64, || format!("duplicate of {k}: {s} vs {}", b / k as f64))?;
            }
            ensure(audit[i].length_weight == 1.0, || "length weight at the mean is not 1".into())?;
        }
        for i in k..k + 2 {
            ensure(shaped[i] == blended[i], || "unique sequence changed".into())?;
        }
    }
    Ok("min 0 / max 1 on 500 batches; k-duplicates get reward/k for k = 1..6; weight 1.0 at L = mean".into())
}

// 5

pub struct SwappedScorer;

impl CompletionScorer for SwappedScorer {
    fn critic(&self, seq: &[usize]) -> f64 {
        TableScorer.auxiliary(seq, 0)[0]
    }

    fn auxiliary(&self, _seq: &[usize], _class: usize) -> Vec<f64> {
        Vec::new()
    }
}

pub fn lambda_endpoints() -> Outcome {
    let (p, spec) = three_token_policy();
    let batch: Vec<Sampled> = (0..6)
        .map(|i| Sampled {
            class: 0,
            start: 0,
            tokens: vec![1 + i % 3, 1 + (i / 3) % 3, 2],
        })
        .collect();
    let seeds: Vec<u64> = (0..6).collect();
    let run = |scorer: &dyn CompletionScorer, lambdas: Vec<f64>, standardize: bool| {
        let cfg = RewardConfig {
            standardize,
            ..plain_reward_config(lambdas, 8)
        };
        estimate_rewards(&p, &spec, &batch, scorer, &shaping_stub(6), &cfg, &seeds).unwrap().q
    };
    for standardize in [false, true] {
        let blended = run(&TableScorer, vec![1.0, 0.0], standardize);
        let pure = run(&TableScorer, vec![1.0], standardize);
        ensure(blended == pure, || format!("lambda_0 = 1 differs from the critic-only reward (standardize {standardize})"))?;
    }
    let blended = run(&TableScorer, vec![0.0, 1.0], true);
    let pure = run(&SwappedScorer, vec![1.0], false);
    ensure(blended == pure, || "lambda_0 = 0 differs from the auxiliary-only reward".into())?;

    let base = RewardConfig::default();
    let near = RewardConfig {
        lambdas: vec![0.2, 0.8 + 9e-10],
        ..base.clone()
    };
    let off = RewardConfig {
        lambdas: vec![0.2, 0.8 + 1.1e-9],
        ..base.clone()
    };
    ensure(base.validate().is_ok() && near.validate().is_ok(), || "valid lambdas rejected".into())?;
    ensure(off.validate().is_err(), || "lambdas off by 1.1e-9 accepted".into())?;
    let mut cfg = bundled_config();
    cfg.reward.lambdas = vec![0.25, 0.8];
    ensure(cfg.validate().is_err(), || "config with lambda sum 1.05 accepted".into())?;
    Ok("bit-exact endpoints for lambda_0 = 1 and 0; sums off by > 1e-9 rejected".into())
}

// 6

pub fn grammar_validity(generator: &GeneratorParams, vocab: &Vocabulary, n: usize, seed: u64) -> f64 {
    let spec = PolicySpec {
        allowed: vocab.emittable(),
        eos: Some(vocab.eos()),
        max_len: 41,
    };
    let mut rng = super::rng(seed);
    let valid = (0..n)
        .filter(|i| {
            let seq = sample_sequence(generator, &spec, vocab.start(i % 2), &mut rng).unwrap();
            // a member of the grammar's language: parses and fits its length window
            preprocess(0, &vocab.decode(&seq), LengthBounds { min: 10, max: 40 }).is_ok()
        })
        .count();
    valid as f64 / n as f64
}

pub fn mle_pretraining() -> Outcome {
    let bounds = LengthBounds { min: 10, max: 40 };
    let rows = synthetic_corpus(&SyntheticSpec::two_class(50, 50), 3);
    let records: Vec<_> = rows
        .iter()
        .map(|(l, s)| preprocess(usize::from(l == "B"), s, bounds).unwrap())
        .collect();
    ensure(records.len() == 100, || "grammar corpus size".into())?;
    let vocab = Vocabulary::build(&records, 2).map_err(|e| e.to_string())?;
    let mut p = GeneratorParams::init(GeneratorDims { vocab: vocab.len(), emb: 16, hid: 64 }, 1);
    let before = grammar_validity(&p, &vocab, 1000, 7);
    let data: Vec<(usize, Vec<usize>)> = records.iter().map(|r| (vocab.start(r.label), vocab.encode(r).unwrap())).collect();
    let labels: Vec<usize> = records.iter().map(|r| r.label).collect();
    let mut sampler = OversampledSampler::new(&labels, 2, None, 1, 5).unwrap();
    let mut adam = AdamState::new(p.data.len());
    let trace = pretrain_generator_mle(
        &mut p,
        &mut adam,
        AdamConfig::with_lr(1e-2),
        &vocab.emittable(),
        &data,
        &mut sampler,
        200,
        20,
        5,
    )
    .map_err(|e| e.to_string())?;
    let after = grammar_validity(&p, &vocab, 1000, 8);
    ensure(before <= 0.05, || format!("validity at init {before}"))?;
    ensure(after >= 0.80, || format!("validity after pretraining {after} (init {before})"))?;
    Ok(format!(
        "validity {before:.3} -> {after:.3}; token NLL {:.3} -> {:.3}",
        trace[0],
        trace[trace.len() - 1]
    ))
}

// 7

/// Run classifier, pretraining and adversarial training into `out`.
pub fn run_training(cfg: &TrainingConfig, out: &Path) -> Result<Vec<auxgan_core::adversarial::EpochMetrics>, String> {
    pipeline::train_classifier(cfg, out).map_err(|e| e.to_string())?;
    pipeline::pretrain(cfg, out).map_err(|e| e.to_string())?;
    pipeline::train(cfg, out).map_err(|e| e.to_string())
}

pub fn moving_average(v: &[f64], w: usize) -> Vec<f64> {
    v.windows(w).map(|x| x.iter().sum::<f64>() / w as f64).collect()
}

pub fn responsiveness() -> Outcome {
    let mut finals = Vec::new();
    let mut rises = Vec::new();
    let mut detail = Vec::new();
    for seed in 1..=3 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut cfg = bundled_config();
        cfg.seed = seed;
        cfg.schedule.adversarial_epochs = 30;
        let trace = run_training(&cfg, dir.path())?;
        let r: Vec<f64> = trace.iter().map(|m| m.responsiveness).collect();
        let ma = moving_average(&r, 5);
        finals.push(r[r.len() - 1]);
        rises.push(ma[ma.len() - 1] - ma[0]);
        detail.push(format!("seed {seed}: {:.2} -> {:.2}", ma[0], ma[ma.len() - 1]));
    }
    let (f, rise) = (median(finals), median(rises));
    let summary = format!("median final {f:.3}, median MA rise {rise:.3} ({})", detail.join(", "));
    ensure(f > 0.3 && rise > 0.0, || summary.clone())?;
    Ok(summary)
}

// 8

pub fn minority_config(dir: &Path, seed: u64, factor: usize) -> TrainingConfig {
    let data = dir.join("minority.csv");
    if !data.exists() {
        let rows = synthetic_corpus(&SyntheticSpec::two_class(300, 16), 0);
        write_corpus(&data, &rows).unwrap();
    }
    let mut cfg = bundled_config();
    cfg.dataset = data.display().to_string();
    cfg.seed = seed;
    cfg.schedule.mle_epochs = 60;
    cfg.schedule.adversarial_epochs = 5;
    cfg.schedule.eval_samples = 300;
    cfg.oversample.class = Some("B".into());
    cfg.oversample.factor = factor;
    cfg
}

pub fn oversampling() -> Outcome {
    let labels: Vec<usize> = (0..1000).map(|i| usize::from(i % 20 == 0)).collect();
    let p = 0.05;
    let expected = 3.0 * p / (1.0 - p + 3.0 * p);
    let mut sampler = OversampledSampler::new(&labels, 2, Some(1), 3, 17).unwrap();
    let draws = 100_000;
    let freq = (0..draws).filter(|_| labels[sampler.next_index()] == 1).count() as f64 / draws as f64;
    ensure((freq - expected).abs() <= 0.01, || format!("minority frequency {freq} vs {expected}"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut yields = [Vec::new(), Vec::new()];
    for seed in 1..=3 {
        for (k, factor) in [1, 3].into_iter().enumerate() {
            let out = dir.path().join(format!("s{seed}-f{factor}"));
            let trace = run_training(&minority_config(dir.path(), seed, factor), &out)?;
            yields[k].push(trace[trace.len() - 1].classes[1].yield_);
        }
    }
    let summary = format!(
        "sampler frequency {freq:.4} (closed form {expected:.4}); minority yield factor 1 {:?}, factor 3 {:?}",
        yields[0], yields[1]
    );
    let [y1, y3] = yields;
    ensure(median(y3) > median(y1), || summary.clone())?;
    Ok(summary)
}

// 9

pub fn separable(n: usize, seed: u64) -> LabeledDataset {
    let mut rng = super::rng(seed);
    let rows = (0..n)
        .map(|i| {
            let label = i % 2;
            let mut values: Vec<f64> = (0..DESCRIPTOR_COUNT).map(|_| rng.gen_range(-1.0..1.0)).collect();
            values[0] += if label == 1 { 1.5 } else { -1.5 };
            values[3] += if label == 1 { 0.8 } else { -0.8 };
            (DescriptorVector { values }, label)
        })
        .collect();
    LabeledDataset::new(rows, vec!["a".into(), "b".into()]).unwrap()
}

pub fn random_forest() -> Outcome {
    let train = separable(200, 1);
    let test = separable(200, 2);
    let model = train_random_forest(&train, &[0, 1, 2, 3], DEFAULT_TREES, 42).map_err(|e| e.to_string())?;
    ensure(model.trees.len() == 100, || "forest size".into())?;
    let scores: Vec<f64> = test.rows.iter().map(|(d, _)| model.predict_proba(d).unwrap()[1]).collect();
    let labels: Vec<bool> = test.rows.iter().map(|(_, l)| *l == 1).collect();
    let a = auc(&scores, &labels).map_err(|e| e.to_string())?;
    ensure(a >= 0.95, || format!("holdout AUC {a}"))?;

    let rows = (0..10)
        .map(|i| {
            let mut values = vec![0.0; DESCRIPTOR_COUNT];
            values[0] = i as f64;
            (DescriptorVector { values }, 0)
        })
        .collect();
    let one = LabeledDataset::new(rows, vec!["only".into()]).unwrap();
    let m = train_random_forest(&one, &[0], 10, 1).map_err(|e| e.to_string())?;
    let p = m.predict_proba(&one.rows[3].0).map_err(|e| e.to_string())?;
    ensure(p == vec![1.0], || format!("single-class probabilities {p:?}"))?;

    let fixtures = [
        (auc(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]), 1.0),
        (auc(&[0.3; 4], &[true, false, true, false]), 0.5),
        (auc(&[0.9, 0.4, 0.6, 0.1], &[true, true, false, false]), 0.75),
    ];
    for (got, want) in fixtures {
        ensure(got == Ok(want), || format!("AUC fixture {got:?} vs {want}"))?;
    }
    Ok(format!("holdout AUC {a:.4} with 100 trees; single class -> 1.0; fixtures exact"))
}

// 10

pub fn chemistry() -> Outcome {
    let corpus = super::fuzz_corpus(500, 11);
    let mut rng = super::rng(12);
    for s in &corpus {
        let g = parse_smiles(s).map_err(|e| format!("{s}: {e}"))?;
        let c = canonicalize(&g);
        ensure(canonicalize(&parse_smiles(&c).unwrap()) == c, || format!("not idempotent: {s}"))?;
        for _ in 0..4 {
            let mut perm: Vec<usize> = (0..g.atom_count()).collect();
            perm.shuffle(&mut rng);
            ensure(canonicalize(&g.permuted(&perm)) == c, || format!("renumbering changed {s}"))?;
            let text = write_smiles(&g, &perm);
            let back = parse_smiles(&text).map_err(|e| format!("{text}: {e}"))?;
            ensure(canonicalize(&back) == c, || format!("rendering {text} of {s}"))?;
        }
    }
    let false_valid: Vec<&str> = super::INVALID.iter().copied().filter(|s| parse_smiles(s).is_ok()).collect();
    ensure(false_valid.is_empty(), || format!("accepted invalid: {false_valid:?}"))?;

    let fps: Vec<Fingerprint> = corpus[..120]
        .iter()
        .map(|s| fingerprint(&parse_smiles(s).unwrap(), 2, 2048))
        .collect();
    for (i, a) in fps.iter().enumerate() {
        ensure(tanimoto(a, a).unwrap() == 1.0, || format!("reflexivity at {i}"))?;
        for b in &fps[..i] {
            let ab = tanimoto(a, b).unwrap();
            ensure(ab == tanimoto(b, a).unwrap(), || "symmetry".into())?;
            ensure((0.0..=1.0).contains(&ab), || format!("bounds {ab}"))?;
        }
    }
    Ok(format!(
        "500 molecules x 4 renumberings/renderings; {} invalid cases rejected; Tanimoto over {} pairs",
        super::INVALID.len(),
        fps.len() * (fps.len() - 1) / 2
    ))
}

// 11

fn artifact_files(out: &Path) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for name in ["classifier.json", "pretrain.ckpt", "pretrain_nll.tsv", "metrics.jsonl", "evaluation.jsonl", "rejections.tsv"] {
        files.push(PathBuf::from(name));
    }
    for dir in ["checkpoints", "samples", "reports"] {
        let mut names: Vec<PathBuf> = fs::read_dir(out.join(dir))
            .map(|d| d.flatten().map(|e| Path::new(dir).join(e.file_name())).collect())
            .unwrap_or_default();
        names.sort();
        files.extend(names);
    }
    files
}

pub fn full_pipeline(cfg: &TrainingConfig, out: &Path, samples: usize) -> Result<(), String> {
    run_training(cfg, out)?;
    pipeline::generate(cfg, out, samples, None).map_err(|e| e.to_string())?;
    pipeline::evaluate_samples(cfg, out, None).map_err(|e| e.to_string())?;
    Ok(())
}

pub fn determinism() -> Outcome {
    let mut cfg = bundled_config();
    cfg.schedule.adversarial_epochs = 3;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    pool.install(|| full_pipeline(&cfg, a.path(), 200))?;
    pool.install(|| full_pipeline(&cfg, b.path(), 200))?;
    let files = artifact_files(a.path());
    ensure(files == artifact_files(b.path()), || "artifact sets differ".into())?;
    ensure(files.iter().filter(|f| f.starts_with("checkpoints")).count() == 3, || "expected 3 checkpoints".into())?;
    for f in &files {
        let x = fs::read(a.path().join(f)).map_err(|e| format!("{}: {e}", f.display()))?;
        let y = fs::read(b.path().join(f)).map_err(|e| format!("{}: {e}", f.display()))?;
        ensure(x == y, || format!("{} differs between runs", f.display()))?;
    }
    Ok(format!("{} artifacts byte-identical across two runs", files.len()))
}
