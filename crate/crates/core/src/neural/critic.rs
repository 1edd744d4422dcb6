//! CNN text critic: embedding, parallel convolutions with ReLU and
//! max-over-time pooling, one highway layer and an unsquashed linear head.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::math::{add_outer, matvec, matvec_t, sigmoid, TensorSpec};
use super::NeuralError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticDims {
    pub vocab: usize,
    pub emb: usize,
    pub windows: Vec<usize>,
    pub filters: usize,
    pub pad_to: usize,
    /// token used to pad short sequences
    pub pad_token: usize,
}

impl CriticDims {
    pub fn feature_width(&self) -> usize {
        self.filters * self.windows.len()
    }

    pub fn layout(&self) -> Vec<TensorSpec> {
        let d = self.feature_width();
        let mut entries: Vec<(String, Vec<usize>)> = vec![("embedding".into(), vec![self.vocab, self.emb])];
        for w in &self.windows {
            entries.push((format!("conv{w}_weights"), vec![self.filters, w * self.emb]));
            entries.push((format!("conv{w}_bias"), vec![self.filters]));
        }
        entries.push(("highway_gate_weights".into(), vec![d, d]));
        entries.push(("highway_gate_bias".into(), vec![d]));
        entries.push(("highway_weights".into(), vec![d, d]));
        entries.push(("highway_bias".into(), vec![d]));
        entries.push(("head_weights".into(), vec![d]));
        entries.push(("head_bias".into(), vec![1]));
        let borrowed: Vec<(&str, Vec<usize>)> = entries.iter().map(|(n, s)| (n.as_str(), s.clone())).collect();
        TensorSpec::sequential(&borrowed)
    }

    pub fn parameter_count(&self) -> usize {
        self.layout().last().map(|t| t.offset + t.len()).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticParams {
    pub dims: CriticDims,
    pub data: Vec<f64>,
}

impl CriticParams {
    pub fn zeros(dims: CriticDims) -> CriticParams {
        let n = dims.parameter_count();
        CriticParams { dims, data: vec![0.0; n] }
    }

    /// Uniform(−scale, scale) for every entry.
    pub fn init(dims: CriticDims, scale: f64, seed: u64) -> CriticParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = CriticParams::zeros(dims);
        for x in p.data.iter_mut() {
            *x = rng.gen_range(-scale..=scale);
        }
        p
    }

    pub fn from_data(dims: CriticDims, data: Vec<f64>) -> Result<CriticParams, NeuralError> {
        if data.len() != dims.parameter_count() {
            return Err(NeuralError::ShapeMismatch {
                expected: dims.parameter_count(),
                found: data.len(),
            });
        }
        Ok(CriticParams { dims, data })
    }
}

/// Truncate or right-pad to `pad_to` tokens.
pub fn pad_sequence(seq: &[usize], pad_to: usize, pad_token: usize) -> Vec<usize> {
    let mut out: Vec<usize> = seq.iter().copied().take(pad_to).collect();
    out.resize(pad_to, pad_token);
    out
}

struct Forward {
    tokens: Vec<usize>,
    /// per filter column: (argmax position, pre-activation at argmax)
    pooled_at: Vec<(usize, f64)>,
    features: Vec<f64>,
    gate: Vec<f64>,
    candidate_pre: Vec<f64>,
    candidate: Vec<f64>,
    out_vec: Vec<f64>,
    score: f64,
}

fn forward(p: &CriticParams, seq: &[usize]) -> Result<Forward, NeuralError> {
    let dims = &p.dims;
    let tokens = pad_sequence(seq, dims.pad_to, dims.pad_token);
    if let Some(&t) = tokens.iter().find(|&&t| t >= dims.vocab) {
        return Err(NeuralError::IndexOutOfVocab(t));
    }
    let layout = dims.layout();
    let e = dims.emb;
    let emb = &p.data[layout[0].range()];
    let d = dims.feature_width();
    let mut features = vec![0.0; d];
    let mut pooled_at = vec![(0usize, f64::NEG_INFINITY); d];
    for (wi, &w) in dims.windows.iter().enumerate() {
        let wt = &p.data[layout[1 + 2 * wi].range()];
        let bias = &p.data[layout[2 + 2 * wi].range()];
        let positions = if tokens.len() >= w { tokens.len() - w + 1 } else { 0 };
        let mut window = vec![0.0; w * e];
        for pos in 0..positions {
            for k in 0..w {
                let t = tokens[pos + k];
                window[k * e..(k + 1) * e].copy_from_slice(&emb[t * e..(t + 1) * e]);
            }
            let mut pre = bias.to_vec();
            matvec(wt, &window, &mut pre);
            for f in 0..dims.filters {
                let col = wi * dims.filters + f;
                if pre[f] > pooled_at[col].1 {
                    pooled_at[col] = (pos, pre[f]);
                }
            }
        }
        for f in 0..dims.filters {
            let col = wi * dims.filters + f;
            features[col] = pooled_at[col].1.max(0.0);
        }
    }
    let n = layout.len();
    let (gw, gb, hw, hb, ow, ob) = (
        &p.data[layout[n - 6].range()],
        &p.data[layout[n - 5].range()],
        &p.data[layout[n - 4].range()],
        &p.data[layout[n - 3].range()],
        &p.data[layout[n - 2].range()],
        p.data[layout[n - 1].offset],
    );
    let mut gate = gb.to_vec();
    matvec(gw, &features, &mut gate);
    gate.iter_mut().for_each(|x| *x = sigmoid(*x));
    let mut candidate_pre = hb.to_vec();
    matvec(hw, &features, &mut candidate_pre);
    let candidate: Vec<f64> = candidate_pre.iter().map(|&x| x.max(0.0)).collect();
    let out_vec: Vec<f64> = (0..d)
        .map(|k| gate[k] * candidate[k] + (1.0 - gate[k]) * features[k])
        .collect();
    let score = ob + ow.iter().zip(&out_vec).map(|(a, b)| a * b).sum::<f64>();
    Ok(Forward {
        tokens,
        pooled_at,
        features,
        gate,
        candidate_pre,
        candidate,
        out_vec,
        score,
    })
}

/// Unbounded critic score of a token sequence (padded or truncated to
/// `pad_to`).
pub fn critic_score(params: &CriticParams, seq: &[usize]) -> Result<f64, NeuralError> {
    Ok(forward(params, seq)?.score)
}

/// Accumulate `weight · ∇φ score(seq)` into `grad` and return the score.
pub fn critic_score_grad(params: &CriticParams, seq: &[usize], weight: f64, grad: &mut [f64]) -> Result<f64, NeuralError> {
    if grad.len() != params.data.len() {
        return Err(NeuralError::ShapeMismatch {
            expected: params.data.len(),
            found: grad.len(),
        });
    }
    let fw = forward(params, seq)?;
    let dims = &params.dims;
    let layout = dims.layout();
    let n = layout.len();
    let d = dims.feature_width();
    let e = dims.emb;

    let ds = weight;
    grad[layout[n - 1].offset] += ds;
    let ow = &params.data[layout[n - 2].range()];
    let ow_off = layout[n - 2].offset;
    let mut dy = vec![0.0; d];
    for k in 0..d {
        grad[ow_off + k] += ds * fw.out_vec[k];
        dy[k] = ds * ow[k];
    }
    let mut dfeat = vec![0.0; d];
    let mut dzg = vec![0.0; d];
    let mut dzh = vec![0.0; d];
    for k in 0..d {
        let g = fw.gate[k];
        dfeat[k] = dy[k] * (1.0 - g);
        dzg[k] = dy[k] * (fw.candidate[k] - fw.features[k]) * g * (1.0 - g);
        dzh[k] = if fw.candidate_pre[k] > 0.0 { dy[k] * g } else { 0.0 };
    }
    add_outer(&mut grad[layout[n - 6].range()], &dzg, &fw.features);
    add_outer(&mut grad[layout[n - 4].range()], &dzh, &fw.features);
    for k in 0..d {
        grad[layout[n - 5].offset + k] += dzg[k];
        grad[layout[n - 3].offset + k] += dzh[k];
    }
    matvec_t(&params.data[layout[n - 6].range()], &dzg, &mut dfeat);
    matvec_t(&params.data[layout[n - 4].range()], &dzh, &mut dfeat);

    let emb_off = layout[0].offset;
    for (wi, &w) in dims.windows.iter().enumerate() {
        let wt_spec = &layout[1 + 2 * wi];
        let b_off = layout[2 + 2 * wi].offset;
        for f in 0..dims.filters {
            let col = wi * dims.filters + f;
            let (pos, pre) = fw.pooled_at[col];
            if pre <= 0.0 || pre == f64::NEG_INFINITY {
                continue;
            }
            let g = dfeat[col];
            if g == 0.0 {
                continue;
            }
            grad[b_off + f] += g;
            let row = wt_spec.offset + f * w * e;
            for k in 0..w {
                let t = fw.tokens[pos + k];
                for j in 0..e {
                    grad[row + k * e + j] += g * params.data[emb_off + t * e + j];
                    grad[emb_off + t * e + j] += g * params.data[row + k * e + j];
                }
            }
        }
    }
    Ok(fw.score)
}

/// Clamp every critic parameter into [−c, c].
pub fn clip_weights(params: &mut CriticParams, c: f64) {
    for x in params.data.iter_mut() {
        *x = x.clamp(-c, c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn dims() -> CriticDims {
        CriticDims {
            vocab: 6,
            emb: 3,
            windows: vec![1, 2, 3],
            filters: 2,
            pad_to: 7,
            pad_token: 0,
        }
    }

    #[test]
    fn zero_weights_score_zero() {
        let p = CriticParams::zeros(dims());
        assert_eq!(critic_score(&p, &[1, 2, 3]).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_and_padding() {
        let p = CriticParams::init(dims(), 0.5, 4);
        let a = critic_score(&p, &[1, 2, 3]).unwrap();
        assert_eq!(a, critic_score(&p, &[1, 2, 3]).unwrap());
        assert_eq!(a, critic_score(&p, &[1, 2, 3, 0, 0]).unwrap());
        // truncation beyond pad_to
        assert_eq!(
            critic_score(&p, &[1, 2, 3, 4, 5, 1, 2]).unwrap(),
            critic_score(&p, &[1, 2, 3, 4, 5, 1, 2, 3, 3]).unwrap()
        );
        assert_eq!(critic_score(&p, &[9]).unwrap_err(), NeuralError::IndexOutOfVocab(9));
    }

    #[test]
    fn window_longer_than_sequence_is_inert() {
        let d = CriticDims {
            windows: vec![9],
            ..dims()
        };
        let p = CriticParams::init(d, 0.5, 1);
        assert!(critic_score(&p, &[1, 2]).unwrap().is_finite());
    }

    #[test]
    fn clipping() {
        let mut p = CriticParams::init(dims(), 0.005, 2);
        let before = p.clone();
        clip_weights(&mut p, 0.01);
        assert_eq!(p, before);
        p.data[0] = 0.5;
        p.data[1] = -3.0;
        clip_weights(&mut p, 0.01);
        assert_eq!(p.data[0], 0.01);
        assert_eq!(p.data[1], -0.01);
    }

    #[test]
    fn pad_helper() {
        assert_eq!(pad_sequence(&[3, 4], 4, 0), vec![3, 4, 0, 0]);
        assert_eq!(pad_sequence(&[3, 4, 5], 2, 0), vec![3, 4]);
    }
}
