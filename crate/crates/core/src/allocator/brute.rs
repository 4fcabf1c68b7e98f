use std::time::Instant;

use super::{AllocationInstance, AllocationSolution, ObjectiveMode, SolverStats};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest instance the exhaustive oracle accepts (32·31·30·29·28 maps).
pub const BRUTE_FORCE_MAX_USERS: usize = 5;

/// Enumerates every injective user → pair map in lexicographic order and
/// keeps the first one attaining the maximum objective.
pub fn brute_force<T: Scalar>(
    inst: &AllocationInstance<T>,
    mode: ObjectiveMode,
) -> Result<AllocationSolution<T>> {
    if inst.n_users > BRUTE_FORCE_MAX_USERS {
        return Err(Error::OracleScale {
            users: inst.n_users,
            max: BRUTE_FORCE_MAX_USERS,
        });
    }
    inst.validate()?;
    let start = Instant::now();
    let mut state = Enumerate {
        inst,
        mode,
        used: vec![false; inst.n_pairs()],
        current: Vec::with_capacity(inst.n_users),
        best: Vec::new(),
        best_value: None,
        leaves: 0,
    };
    state.walk();
    let stats = SolverStats {
        nodes_explored: state.leaves,
        nodes_pruned: 0,
        wall_time: start.elapsed(),
    };
    inst.finish(&state.best, stats)
}

struct Enumerate<'a, T> {
    inst: &'a AllocationInstance<T>,
    mode: ObjectiveMode,
    used: Vec<bool>,
    current: Vec<usize>,
    best: Vec<usize>,
    best_value: Option<T>,
    leaves: u64,
}

impl<T: Scalar> Enumerate<'_, T> {
    fn walk(&mut self) {
        if self.current.len() == self.inst.n_users {
            self.leaves += 1;
            let v = self.inst.objective(self.mode, &self.current);
            if self.best_value.is_none_or(|b| v > b) {
                self.best_value = Some(v);
                self.best.clone_from(&self.current);
            }
            return;
        }
        for p in 0..self.inst.n_pairs() {
            if self.used[p] {
                continue;
            }
            self.used[p] = true;
            self.current.push(p);
            self.walk();
            self.current.pop();
            self.used[p] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::random_instance;
    use super::*;

    #[test]
    fn refuses_large_instances() {
        let inst = random_instance(6, 1);
        assert!(matches!(
            brute_force(&inst, ObjectiveMode::Surrogate),
            Err(Error::OracleScale { users: 6, max: 5 })
        ));
    }

    #[test]
    fn counts_all_injective_maps() {
        let inst = random_instance(2, 1);
        let sol = brute_force(&inst, ObjectiveMode::Surrogate).unwrap();
        assert_eq!(sol.stats.nodes_explored, 32 * 31);
    }
}
