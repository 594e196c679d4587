//! Pedestrian-to-group assignment and per-group hulls.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, distance_to_polygon, Polygon, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupLayout {
    /// `assignment[i]` is the group of pedestrian `i`; groups are labelled `0..group_count`.
    assignment: Vec<usize>,
    group_count: usize,
    #[serde(skip)]
    hulls: Vec<Polygon>,
}

impl GroupLayout {
    /// Builds a layout from an explicit assignment. Every label in
    /// `0..=max` must be used.
    pub fn from_assignment(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Ok(Self { assignment, group_count: 0, hulls: Vec::new() });
        }
        let group_count = assignment.iter().max().copied().unwrap_or(0) + 1;
        let mut used = vec![false; group_count];
        for &g in &assignment {
            used[g] = true;
        }
        if used.iter().any(|u| !u) {
            return Err(Error::InvalidArgument("group labels must be contiguous from 0".into()));
        }
        Ok(Self { assignment, group_count, hulls: Vec::new() })
    }

    pub fn single_group(n: usize) -> Self {
        Self { assignment: vec![0; n], group_count: usize::from(n > 0), hulls: Vec::new() }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn group_of(&self, pedestrian: usize) -> usize {
        self.assignment[pedestrian]
    }

    pub fn group_count(&self) -> usize {
        self.group_count
    }

    pub fn members(&self, group: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment.iter().enumerate().filter(move |(_, &g)| g == group).map(|(i, _)| i)
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.group_count];
        for &g in &self.assignment {
            sizes[g] += 1;
        }
        sizes
    }

    /// Recomputes every group's hull from current pedestrian positions.
    pub fn update_hulls(&mut self, positions: &[Vec2]) {
        debug_assert_eq!(positions.len(), self.assignment.len());
        self.hulls = (0..self.group_count)
            .map(|g| {
                let pts: Vec<Vec2> = self.members(g).map(|i| positions[i]).collect();
                convex_hull(&pts).expect("every group has at least one finite member")
            })
            .collect();
    }

    pub fn hulls(&self) -> &[Polygon] {
        &self.hulls
    }

    /// Distance from `p` to each group's hull, paired with the group size.
    pub fn hull_distances(&self, p: Vec2) -> Vec<(usize, f64)> {
        let sizes = self.group_sizes();
        self.hulls.iter().zip(sizes).map(|(h, n)| (n, distance_to_polygon(p, h))).collect()
    }
}

/// Draws a group layout for `n_peds` pedestrians.
///
/// The group count is `min(n, 1 + Poisson(lambda))`; pedestrians are then
/// assigned by a surjection drawn uniformly from all surjections onto the groups.
pub fn sample_groups<R: Rng + ?Sized>(
    n_peds: usize,
    single_group: bool,
    lambda: f64,
    rng: &mut R,
) -> Result<GroupLayout> {
    if n_peds == 0 {
        return Err(Error::InvalidArgument("group sampling needs at least one pedestrian".into()));
    }
    if single_group {
        return Ok(GroupLayout::single_group(n_peds));
    }
    let poisson = Poisson::new(lambda)
        .map_err(|e| Error::InvalidArgument(format!("group_lambda {lambda}: {e}")))?;
    let extra = poisson.sample(rng) as usize;
    let groups = (1 + extra).min(n_peds);
    let assignment = uniform_surjection(n_peds, groups, rng);
    GroupLayout::from_assignment(assignment)
}

/// Uniformly random surjection from `n` items onto `k` labels.
///
/// Items are labelled sequentially; each choice is weighted by the number of
/// surjective completions it leaves open, so every surjection is equally likely.
fn uniform_surjection<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    // completions[r][m]: functions from r remaining items to k labels that
    // cover m specific still-unused labels.
    let mut completions = vec![vec![0.0f64; k + 1]; n + 1];
    completions[0][0] = 1.0;
    for r in 1..=n {
        for m in 0..=k {
            let cover_new = if m > 0 { m as f64 * completions[r - 1][m - 1] } else { 0.0 };
            let reuse = (k - m) as f64 * completions[r - 1][m];
            completions[r][m] = cover_new + reuse;
        }
    }

    let mut used = vec![false; k];
    let mut unused = k;
    let mut out = Vec::with_capacity(n);
    for item in 0..n {
        let remaining = n - item - 1;
        let w_new = if unused > 0 { unused as f64 * completions[remaining][unused - 1] } else { 0.0 };
        let w_old = (k - unused) as f64 * completions[remaining][unused];
        let pick_new = rng.gen::<f64>() * (w_new + w_old) < w_new;
        let label = if pick_new {
            let nth = rng.gen_range(0..unused);
            let label = (0..k).filter(|&g| !used[g]).nth(nth).unwrap();
            used[label] = true;
            unused -= 1;
            label
        } else {
            let nth = rng.gen_range(0..k - unused);
            (0..k).filter(|&g| used[g]).nth(nth).unwrap()
        };
        out.push(label);
    }
    out
}
