/// Generalized advantage estimates and return targets for one trajectory
/// segment.
///
/// `dones[t]` marks a terminal transition at step `t`; it cuts both the
/// bootstrap and the advantage recursion. `bootstrap_value` is the value of
/// the state following the last step and is ignored when that step is terminal.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap_value: f64,
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert!(values.len() == n && dones.len() == n, "gae inputs must have equal lengths");
    let mut advantages = vec![0.0; n];
    let mut next_advantage = 0.0;
    let mut next_value = bootstrap_value;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        next_advantage = delta + gamma * lambda * live * next_advantage;
        advantages[t] = next_advantage;
        next_value = values[t];
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    (advantages, returns)
}
