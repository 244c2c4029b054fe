//! Filtering algorithms. Propagators hold no backtrackable state: every call
//! recomputes from the current domains, so scratch buffers are the only
//! mutable fields.

mod automaton;
mod cumulative;
mod element;
mod interval;
mod link;
mod logic;
mod objective;

pub(crate) use automaton::Automaton;
pub(crate) use cumulative::Cumulative;
pub(crate) use element::Element;
pub(crate) use interval::{Alternative, Covered, NoOverlap, StartBeforeStart, Synchronize, Within};
pub(crate) use link::{CondValue, EndOfSelected, LitImpliesStartGe, SelectOption};
pub(crate) use logic::{ExactlyOne, Implies, LinearLe};
pub(crate) use objective::{ObjectiveLink, Term};

use super::store::{PResult, Store};
use super::VarId;

/// Cheap propagators run before expensive ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Priority {
    Fast = 0,
    Slow = 1,
}

pub(crate) trait Propagator: Send {
    fn name(&self) -> &'static str;
    fn vars(&self) -> Vec<VarId>;
    fn priority(&self) -> Priority {
        Priority::Fast
    }
    fn propagate(&mut self, store: &mut Store) -> PResult;
}

pub(crate) fn div_floor(a: i64, b: i64) -> i64 {
    let (q, r) = (a / b, a % b);
    if r != 0 && ((r < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

pub(crate) fn div_ceil(a: i64, b: i64) -> i64 {
    -div_floor(-a, b)
}

#[cfg(test)]
pub(crate) mod testing {
    //! Brute-force soundness check shared by the propagator tests: every
    //! tuple of the cartesian product of the current domains that satisfies
    //! the constraint must survive propagation.

    use super::*;

    pub fn product(store: &Store, vars: &[VarId]) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for &v in vars {
            let mut vals = Vec::new();
            store.values_into(v, &mut vals);
            vals.sort();
            out = out
                .into_iter()
                .flat_map(|t| {
                    vals.iter().map(move |&x| {
                        let mut t = t.clone();
                        t.push(x);
                        t
                    })
                })
                .collect();
        }
        out
    }

    /// Runs `prop` to fixpoint and checks that no solution tuple was lost.
    /// Returns whether propagation failed.
    pub fn check_sound(
        store: &mut Store,
        prop: &mut dyn Propagator,
        vars: &[VarId],
        holds: impl Fn(&[i64]) -> bool,
    ) -> bool {
        check_sound_with(store, prop, vars, holds, |_, _| false)
    }

    /// Like [`check_sound`], but position `k` of a solution tuple may be
    /// pruned when `dont_care(tuple, k)` (the start of an absent interval).
    pub fn check_sound_with(
        store: &mut Store,
        prop: &mut dyn Propagator,
        vars: &[VarId],
        holds: impl Fn(&[i64]) -> bool,
        dont_care: impl Fn(&[i64], usize) -> bool,
    ) -> bool {
        let solutions: Vec<Vec<i64>> = product(store, vars)
            .into_iter()
            .filter(|t| holds(t))
            .collect();
        let mut failed = false;
        for _ in 0..20 {
            if prop.propagate(store).is_err() {
                failed = true;
                break;
            }
        }
        if failed {
            assert!(
                solutions.is_empty(),
                "{} failed but {:?} is a solution",
                prop.name(),
                solutions[0]
            );
            return true;
        }
        for t in &solutions {
            for (k, (&v, &x)) in vars.iter().zip(t).enumerate() {
                if dont_care(t, k) {
                    continue;
                }
                assert!(
                    store.contains(v, x),
                    "{} removed {} from {:?} (solution {:?})",
                    prop.name(),
                    x,
                    v,
                    t
                );
            }
        }
        false
    }

    /// For tuples laid out as `[start_0, pres_0, start_1, pres_1, ...]`.
    pub fn absent_start(t: &[i64], k: usize) -> bool {
        k.is_multiple_of(2) && t[k + 1] == 0
    }
}
