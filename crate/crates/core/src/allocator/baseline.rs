use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AllocationInstance, AllocationSolution, SolverStats};
use crate::error::Result;
use crate::optics::Wavelength;
use crate::scalar::Scalar;

/// Uniformly random injective assignment drawn from a seeded ChaCha8 stream.
pub fn baseline_random<T: Scalar>(
    inst: &AllocationInstance<T>,
    seed: u64,
) -> Result<AllocationSolution<T>> {
    inst.validate()?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<usize> = (0..inst.n_pairs()).collect();
    let (picked, _) = pairs.partial_shuffle(&mut rng, inst.n_users);
    let picked = picked.to_vec();
    let stats = SolverStats {
        wall_time: start.elapsed(),
        ..SolverStats::default()
    };
    inst.finish(&picked, stats)
}

/// Users in decreasing order of their best `S - N`, each taking the free pair
/// with the largest marginal surrogate given earlier picks.
pub fn baseline_greedy<T: Scalar>(inst: &AllocationInstance<T>) -> Result<AllocationSolution<T>> {
    inst.validate()?;
    let start = Instant::now();
    let n_pairs = inst.n_pairs();
    let best_link = |u: usize| {
        (0..n_pairs)
            .map(|p| inst.link_value(u, p))
            .fold(T::neg_infinity(), T::max)
    };
    let mut order: Vec<usize> = (0..inst.n_users).collect();
    order.sort_by(|&a, &b| {
        best_link(b)
            .partial_cmp(&best_link(a))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut pick: Vec<Option<usize>> = vec![None; inst.n_users];
    let mut used = vec![false; n_pairs];
    for &u in &order {
        let mut chosen: Option<(T, usize)> = None;
        for p in (0..n_pairs).filter(|&p| !used[p]) {
            let a = p / Wavelength::COUNT;
            let w = p % Wavelength::COUNT;
            let mut intf = T::zero();
            for (u2, p2) in pick.iter().enumerate() {
                if let Some(p2) = *p2 {
                    let a2 = p2 / Wavelength::COUNT;
                    if p2 % Wavelength::COUNT == w && a2 != a {
                        intf = intf + inst.cross(u, a2, w) + inst.cross(u2, a, w);
                    }
                }
            }
            let gain = inst.link_value(u, p) - inst.weights.interference * intf;
            if chosen.is_none_or(|(g, _)| gain > g) {
                chosen = Some((gain, p));
            }
        }
        let (_, p) = chosen.expect("feasible instance has a free pair");
        used[p] = true;
        pick[u] = Some(p);
    }
    let pairs: Vec<usize> = pick.into_iter().map(|p| p.expect("all users picked")).collect();
    let stats = SolverStats {
        nodes_explored: inst.n_users as u64,
        wall_time: start.elapsed(),
        ..SolverStats::default()
    };
    inst.finish(&pairs, stats)
}
