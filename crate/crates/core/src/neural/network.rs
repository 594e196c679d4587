use std::f64::consts::PI;

use crate::env::{Observation, NUM_ACTIONS};
use crate::error::{Error, Result};

use super::{blocks, Gradients, PolicyParams, LAYERS};

pub const ROBOT_DIM: usize = 9;
pub const PED_DIM: usize = 5;
pub const PAIR_DIM: usize = ROBOT_DIM + PED_DIM;

/// Robot-centric encoding: the robot sits at the origin and its goal on +x.
///
/// Returns the 9-value robot vector and one 5-value vector per pedestrian.
pub fn encode_observation(obs: &Observation) -> ([f64; ROBOT_DIM], Vec<[f64; PED_DIM]>) {
    let r = &obs.robot;
    let to_goal = r.goal - r.position;
    let rot = to_goal.angle();
    let v = r.velocity.rotate(-rot);
    let robot = [0.0, 0.0, v.x, v.y, r.radius, to_goal.norm(), 0.0, r.v_pref, wrap_angle(r.theta - rot)];
    let peds = obs
        .pedestrians
        .iter()
        .map(|p| {
            let pos = (p.position - r.position).rotate(-rot);
            let vel = p.velocity.rotate(-rot);
            [pos.x, pos.y, vel.x, vel.y, p.radius]
        })
        .collect();
    (robot, peds)
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Activations of one MLP: `acts[0]` is the input, `acts[k + 1]` the output
/// of layer `k` after its activation.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpCache {
    pub acts: Vec<Vec<f64>>,
}

impl MlpCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("mlp cache holds at least the input")
    }
}

/// Everything the backward pass needs, plus the network outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub robot: [f64; ROBOT_DIM],
    /// Per-pedestrian `mlp1` activations; outputs are the embeddings.
    pub embed: Vec<MlpCache>,
    pub mean_embedding: Vec<f64>,
    /// Per-pedestrian `mlp3` activations on `[e_i, mean]`.
    pub score: Vec<MlpCache>,
    pub attention: Vec<f64>,
    /// Per-pedestrian `mlp2` activations; outputs are the interaction vectors.
    pub interaction: Vec<MlpCache>,
    pub crowd: Vec<f64>,
    /// `mlp4` activations on `[robot, crowd]`.
    pub features: MlpCache,
    pub logits: Vec<f64>,
    pub policy: Vec<f64>,
    pub log_policy: Vec<f64>,
    pub value: f64,
}

impl ForwardTrace {
    pub fn pedestrian_count(&self) -> usize {
        self.embed.len()
    }

    /// Highest-probability action; ties go to the lowest index.
    pub fn greedy_action(&self) -> usize {
        let mut best = 0;
        for (i, &l) in self.logits.iter().enumerate() {
            if l > self.logits[best] {
                best = i;
            }
        }
        best
    }

    /// Inverse-CDF draw from the policy given `u` uniform in `[0, 1)`.
    pub fn sample_action(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, &p) in self.policy.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // rounding left u above the accumulated mass: take the last action with mass
        self.policy.iter().rposition(|&p| p > 0.0).unwrap_or(NUM_ACTIONS - 1)
    }

    pub fn entropy(&self) -> f64 {
        -self.policy.iter().zip(&self.log_policy).map(|(p, lp)| p * lp).sum::<f64>()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn linear(params: &PolicyParams, layer: usize, x: &[f64]) -> Vec<f64> {
    let spec = LAYERS[layer];
    let w = params.weight(layer);
    let b = params.bias(layer);
    let mut y: Vec<f64> = (0..spec.outputs)
        .map(|o| b[o] + dot(&w[o * spec.inputs..(o + 1) * spec.inputs], x))
        .collect();
    if spec.relu {
        y.iter_mut().for_each(|v| *v = v.max(0.0));
    }
    y
}

fn mlp(params: &PolicyParams, layers: std::ops::Range<usize>, input: Vec<f64>) -> MlpCache {
    let mut acts = Vec::with_capacity(layers.len() + 1);
    acts.push(input);
    for l in layers {
        let y = linear(params, l, acts.last().unwrap());
        acts.push(y);
    }
    MlpCache { acts }
}

/// Backpropagates `grad_out` through `layers`, accumulating parameter
/// gradients. Returns the gradient w.r.t. the MLP input when `want_input`.
fn mlp_backward(
    params: &PolicyParams,
    layers: std::ops::Range<usize>,
    cache: &MlpCache,
    grad_out: &[f64],
    grads: &mut Gradients,
    want_input: bool,
) -> Option<Vec<f64>> {
    let first = layers.start;
    let mut g = grad_out.to_vec();
    for l in layers.rev() {
        let spec = LAYERS[l];
        let k = l - first;
        let x = &cache.acts[k];
        let y = &cache.acts[k + 1];
        if spec.relu {
            for (gi, yi) in g.iter_mut().zip(y) {
                if *yi <= 0.0 {
                    *gi = 0.0;
                }
            }
        }
        let need_input = l > first || want_input;
        let mut g_in = if need_input { vec![0.0; spec.inputs] } else { Vec::new() };
        let w = params.weight(l);
        {
            let (gw, gb) = grads.layer_mut(l);
            for (o, &go) in g.iter().enumerate() {
                if go == 0.0 {
                    continue;
                }
                gb[o] += go;
                axpy(go, x, &mut gw[o * spec.inputs..(o + 1) * spec.inputs]);
                if need_input {
                    axpy(go, &w[o * spec.inputs..(o + 1) * spec.inputs], &mut g_in);
                }
            }
        }
        if !need_input {
            return None;
        }
        g = g_in;
    }
    Some(g)
}

/// Softmax and log-softmax of `z`.
fn softmax(z: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let log_sum = sum.ln();
    let p = exps.iter().map(|e| e / sum).collect();
    let lp = z.iter().map(|v| v - max - log_sum).collect();
    (p, lp)
}

pub fn forward(params: &PolicyParams, obs: &Observation) -> Result<ForwardTrace> {
    if obs.pedestrians.is_empty() {
        return Err(Error::ContractViolation("policy forward needs at least one pedestrian".into()));
    }
    let (robot, peds) = encode_observation(obs);
    let n = peds.len();

    let embed: Vec<MlpCache> = peds
        .iter()
        .map(|p| {
            let mut x = Vec::with_capacity(PAIR_DIM);
            x.extend_from_slice(&robot);
            x.extend_from_slice(p);
            mlp(params, blocks::MLP1, x)
        })
        .collect();

    let mut mean_embedding = vec![0.0; super::EMBED_DIM];
    for e in &embed {
        axpy(1.0, e.output(), &mut mean_embedding);
    }
    mean_embedding.iter_mut().for_each(|v| *v /= n as f64);

    let score: Vec<MlpCache> = embed
        .iter()
        .map(|e| {
            let mut z = Vec::with_capacity(2 * super::EMBED_DIM);
            z.extend_from_slice(e.output());
            z.extend_from_slice(&mean_embedding);
            mlp(params, blocks::MLP3, z)
        })
        .collect();
    let scores: Vec<f64> = score.iter().map(|s| s.output()[0]).collect();
    let (attention, _) = softmax(&scores);

    let interaction: Vec<MlpCache> =
        embed.iter().map(|e| mlp(params, blocks::MLP2, e.output().to_vec())).collect();
    let mut crowd = vec![0.0; super::INTERACTION_DIM];
    for (h, &a) in interaction.iter().zip(&attention) {
        axpy(a, h.output(), &mut crowd);
    }

    let mut joint = Vec::with_capacity(ROBOT_DIM + super::INTERACTION_DIM);
    joint.extend_from_slice(&robot);
    joint.extend_from_slice(&crowd);
    let features = mlp(params, blocks::MLP4, joint);

    let logits = linear(params, blocks::POLICY, features.output());
    let value = linear(params, blocks::VALUE, features.output())[0];
    let (policy, log_policy) = softmax(&logits);

    Ok(ForwardTrace {
        robot,
        embed,
        mean_embedding,
        score,
        attention,
        interaction,
        crowd,
        features,
        logits,
        policy,
        log_policy,
        value,
    })
}

/// Gradients of `logits . grad_logits + value * grad_value` w.r.t. every parameter.
pub fn backward(
    params: &PolicyParams,
    trace: &ForwardTrace,
    grad_logits: &[f64],
    grad_value: f64,
) -> Result<Gradients> {
    let mut grads = Gradients::zeros();
    backward_into(params, trace, grad_logits, grad_value, &mut grads)?;
    Ok(grads)
}

/// Like [`backward`] but accumulates into `grads`.
pub fn backward_into(
    params: &PolicyParams,
    trace: &ForwardTrace,
    grad_logits: &[f64],
    grad_value: f64,
    grads: &mut Gradients,
) -> Result<()> {
    if grad_logits.len() != NUM_ACTIONS {
        return Err(Error::ContractViolation(format!(
            "expected {NUM_ACTIONS} logit gradients, got {}",
            grad_logits.len()
        )));
    }
    let n = trace.pedestrian_count();
    let feat = trace.features.output();

    // heads
    let mut g_feat = vec![0.0; feat.len()];
    {
        let w = params.weight(blocks::POLICY);
        let inputs = LAYERS[blocks::POLICY].inputs;
        let (gw, gb) = grads.layer_mut(blocks::POLICY);
        for (o, &go) in grad_logits.iter().enumerate() {
            if go == 0.0 {
                continue;
            }
            gb[o] += go;
            axpy(go, feat, &mut gw[o * inputs..(o + 1) * inputs]);
            axpy(go, &w[o * inputs..(o + 1) * inputs], &mut g_feat);
        }
    }
    {
        let w = params.weight(blocks::VALUE);
        let (gw, gb) = grads.layer_mut(blocks::VALUE);
        gb[0] += grad_value;
        if grad_value != 0.0 {
            axpy(grad_value, feat, gw);
            axpy(grad_value, w, &mut g_feat);
        }
    }

    let g_joint = mlp_backward(params, blocks::MLP4, &trace.features, &g_feat, grads, true)
        .expect("input gradient requested");
    let g_crowd = &g_joint[ROBOT_DIM..];

    // crowd = sum_i a_i h_i
    let g_alpha: Vec<f64> = trace.interaction.iter().map(|h| dot(h.output(), g_crowd)).collect();
    let weighted: f64 = trace.attention.iter().zip(&g_alpha).map(|(a, g)| a * g).sum();

    let mut g_embed: Vec<Vec<f64>> = vec![vec![0.0; super::EMBED_DIM]; n];
    let mut g_mean = vec![0.0; super::EMBED_DIM];
    for i in 0..n {
        let a = trace.attention[i];
        // softmax Jacobian
        let g_score = a * (g_alpha[i] - weighted);
        if g_score != 0.0 {
            let g_z = mlp_backward(params, blocks::MLP3, &trace.score[i], &[g_score], grads, true)
                .expect("input gradient requested");
            axpy(1.0, &g_z[..super::EMBED_DIM], &mut g_embed[i]);
            axpy(1.0, &g_z[super::EMBED_DIM..], &mut g_mean);
        }
        let g_h: Vec<f64> = g_crowd.iter().map(|g| a * g).collect();
        let g_e = mlp_backward(params, blocks::MLP2, &trace.interaction[i], &g_h, grads, true)
            .expect("input gradient requested");
        axpy(1.0, &g_e, &mut g_embed[i]);
    }

    let inv_n = 1.0 / n as f64;
    for (i, g_e) in g_embed.iter_mut().enumerate() {
        axpy(inv_n, &g_mean, g_e);
        mlp_backward(params, blocks::MLP1, &trace.embed[i], g_e, grads, false);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{PedestrianObs, RobotState};
    use crate::geometry::Vec2;
    use crate::neural::init_params;
    use crate::rng::rng_for;

    fn obs(peds: &[(f64, f64, f64, f64)]) -> Observation {
        Observation {
            robot: RobotState {
                position: Vec2::new(0.3, -3.0),
                velocity: Vec2::new(0.2, 0.5),
                radius: 0.3,
                goal: Vec2::new(0.0, 4.0),
                v_pref: 1.0,
                theta: 1.2,
            },
            pedestrians: peds
                .iter()
                .map(|&(x, y, vx, vy)| PedestrianObs {
                    position: Vec2::new(x, y),
                    velocity: Vec2::new(vx, vy),
                    radius: 0.3,
                })
                .collect(),
        }
    }

    #[test]
    fn single_pedestrian_full_attention() {
        let p = init_params(&mut rng_for(1, &[]));
        let t = forward(&p, &obs(&[(1.0, 1.0, -0.5, 0.0)])).unwrap();
        assert_eq!(t.attention, vec![1.0]);
        assert_eq!(t.policy.len(), 81);
        assert!((t.policy.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_pedestrian_splits_attention() {
        let p = init_params(&mut rng_for(2, &[]));
        let one = forward(&p, &obs(&[(1.0, 1.0, -0.5, 0.0)])).unwrap();
        let two = forward(&p, &obs(&[(1.0, 1.0, -0.5, 0.0), (1.0, 1.0, -0.5, 0.0)])).unwrap();
        assert_eq!(two.attention, vec![0.5, 0.5]);
        for (a, b) in one.crowd.iter().zip(&two.crowd) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_crowd_is_rejected() {
        let p = PolicyParams::zeros();
        assert!(matches!(forward(&p, &obs(&[])), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let p = init_params(&mut rng_for(3, &[]));
        let t = forward(&p, &obs(&[(1.0, 1.0, -0.5, 0.0), (-2.0, 0.5, 0.3, 0.3)])).unwrap();
        let g = backward(&p, &t, &[0.0; 81], 0.0).unwrap();
        assert!(g.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn value_bias_gradient_is_upstream() {
        let p = init_params(&mut rng_for(4, &[]));
        let t = forward(&p, &obs(&[(1.0, 1.0, -0.5, 0.0)])).unwrap();
        let g = backward(&p, &t, &[0.0; 81], 0.37).unwrap();
        assert_eq!(g.bias(blocks::VALUE)[0], 0.37);
    }

    #[test]
    fn logit_gradient_shape_checked() {
        let p = init_params(&mut rng_for(4, &[]));
        let t = forward(&p, &obs(&[(1.0, 1.0, -0.5, 0.0)])).unwrap();
        assert!(backward(&p, &t, &[0.0; 80], 0.0).is_err());
    }

    #[test]
    fn encoding_puts_goal_on_x_axis() {
        let o = obs(&[(0.3, 0.0, 0.0, -1.0)]);
        let (robot, peds) = encode_observation(&o);
        let dg = Vec2::new(-0.3, 7.0).norm();
        assert!((robot[5] - dg).abs() < 1e-12);
        assert_eq!(robot[6], 0.0);
        // pedestrian straight ahead on the robot-goal line, walking towards the robot
        let ahead = Vec2::new(0.0, 3.0).rotate(-Vec2::new(-0.3, 7.0).angle());
        assert!((peds[0][0] - ahead.x).abs() < 1e-12 && (peds[0][1] - ahead.y).abs() < 1e-12);
    }

    #[test]
    fn sampling_respects_cdf() {
        let p = init_params(&mut rng_for(6, &[]));
        let t = forward(&p, &obs(&[(1.0, 1.0, -0.5, 0.0)])).unwrap();
        assert_eq!(t.sample_action(0.0), t.policy.iter().position(|&v| v > 0.0).unwrap());
        assert!(t.sample_action(0.999_999_999_999) < 81);
    }
}
