//! Regular-language constraint over a sequence of transition variables,
//! filtered on the layered unfolding of the automaton: a label survives at
//! position `t` only if it lies on some path from the initial state at layer 0
//! to a final state at layer `T`.

use super::Propagator;
use crate::cpcore::store::{Fail, PResult, Store};
use crate::cpcore::VarId;

pub(crate) struct Automaton {
    pub transitions: Vec<VarId>,
    n_states: usize,
    initial: usize,
    finals: Vec<bool>,
    /// `(from, label, to)`
    arcs: Vec<(usize, i64, usize)>,
    reach: Vec<bool>,
    coreach: Vec<bool>,
}

impl Automaton {
    /// Returns `None` when two arcs leave one state with the same label.
    pub fn new(
        transitions: Vec<VarId>,
        initial: usize,
        finals: &[usize],
        arcs: &[(usize, usize, i64)],
    ) -> Option<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(from, _, label) in arcs {
            if !seen.insert((from, label)) {
                return None;
            }
        }
        let n_states = arcs
            .iter()
            .flat_map(|a| [a.0, a.1])
            .chain(finals.iter().copied())
            .chain([initial])
            .max()
            .unwrap()
            + 1;
        let mut fin = vec![false; n_states];
        for &f in finals {
            fin[f] = true;
        }
        let mut arcs: Vec<(usize, i64, usize)> =
            arcs.iter().map(|&(from, to, l)| (from, l, to)).collect();
        arcs.sort_unstable();
        Some(Automaton {
            transitions,
            n_states,
            initial,
            finals: fin,
            arcs,
            reach: Vec::new(),
            coreach: Vec::new(),
        })
    }
}

impl Propagator for Automaton {
    fn name(&self) -> &'static str {
        "automaton"
    }

    fn vars(&self) -> Vec<VarId> {
        self.transitions.clone()
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        let n = self.n_states;
        let len = self.transitions.len();
        self.reach.clear();
        self.reach.resize(n * (len + 1), false);
        self.coreach.clear();
        self.coreach.resize(n * (len + 1), false);

        self.reach[self.initial] = true;
        for (t, &x) in self.transitions.iter().enumerate() {
            let (cur, next) = self.reach[t * n..(t + 2) * n].split_at_mut(n);
            for &(from, label, to) in &self.arcs {
                if cur[from] && s.contains(x, label) {
                    next[to] = true;
                }
            }
        }
        let last = len * n;
        let mut any = false;
        for q in 0..n {
            if self.reach[last + q] && self.finals[q] {
                self.coreach[last + q] = true;
                any = true;
            }
        }
        if !any {
            return Err(Fail);
        }

        let mut labels: Vec<i64> = Vec::new();
        for t in (0..len).rev() {
            let x = self.transitions[t];
            labels.clear();
            let (cur, next) = self.coreach[t * n..(t + 2) * n].split_at_mut(n);
            let reach = &self.reach[t * n..(t + 1) * n];
            for &(from, label, to) in &self.arcs {
                if reach[from] && next[to] && s.contains(x, label) {
                    cur[from] = true;
                    labels.push(label);
                }
            }
            labels.sort_unstable();
            labels.dedup();
            s.retain(x, |v| labels.binary_search(&v).is_ok())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpcore::propagators::testing::check_sound;

    /// Arcs of the batch automaton for families with the given processing
    /// times, written out independently of the encodings module.
    fn batch_arcs(p: &[usize]) -> (Vec<(usize, usize, i64)>, Vec<usize>) {
        let mut sigma = vec![];
        let mut acc = 0;
        for &pf in p {
            sigma.push(acc + 1);
            acc += pf;
        }
        let phi: Vec<usize> = sigma.iter().zip(p).map(|(s, pf)| s + pf - 1).collect();
        let mut arcs = vec![(0, 0, 0)];
        for f in 0..p.len() {
            arcs.push((0, sigma[f], sigma[f] as i64));
            for q in sigma[f]..phi[f] {
                arcs.push((q, q + 1, (q + 1) as i64));
            }
            arcs.push((phi[f], 0, 0));
            for &s in &sigma {
                arcs.push((phi[f], s, s as i64));
            }
        }
        let mut finals = phi.clone();
        finals.push(0);
        (arcs, finals)
    }

    #[test]
    fn nondeterministic_rejected() {
        assert!(Automaton::new(vec![], 0, &[0], &[(0, 1, 5), (0, 2, 5)]).is_none());
    }

    #[test]
    fn batch_run_accepted() {
        let (arcs, finals) = batch_arcs(&[10]);
        let mut s = Store::new();
        let word: Vec<i64> = [0, 0, 0].into_iter().chain(1..=10).chain([0, 0]).collect();
        let xs: Vec<_> = word.iter().map(|&w| s.new_sparse(&[w])).collect();
        Automaton::new(xs, 0, &finals, &arcs)
            .unwrap()
            .propagate(&mut s)
            .unwrap();
    }

    #[test]
    fn start_forces_chain() {
        let (arcs, finals) = batch_arcs(&[10]);
        let mut s = Store::new();
        let all: Vec<i64> = (0..=10).collect();
        let xs: Vec<_> = (0..16).map(|_| s.new_sparse(&all)).collect();
        s.fix(xs[3], 1).unwrap();
        Automaton::new(xs.clone(), 0, &finals, &arcs)
            .unwrap()
            .propagate(&mut s)
            .unwrap();
        for k in 0..10 {
            assert!(s.is_fixed(xs[3 + k]) && s.min(xs[3 + k]) == 1 + k as i64);
        }
        // label 2 at t = 0 has no arc from state 0
        assert!(!s.contains(xs[0], 2));
    }

    #[test]
    fn empty_machine_accepted() {
        let (arcs, finals) = batch_arcs(&[2, 3]);
        let mut s = Store::new();
        let xs: Vec<_> = (0..6).map(|_| s.new_sparse(&[0])).collect();
        Automaton::new(xs, 0, &finals, &arcs)
            .unwrap()
            .propagate(&mut s)
            .unwrap();
    }

    #[test]
    fn unfinished_batch_rejected() {
        let (arcs, finals) = batch_arcs(&[3]);
        let mut s = Store::new();
        let xs: Vec<_> = (0..4).map(|_| s.new_sparse(&[0, 1, 2, 3])).collect();
        s.fix(xs[2], 1).unwrap();
        assert!(Automaton::new(xs, 0, &finals, &arcs)
            .unwrap()
            .propagate(&mut s)
            .is_err());
    }

    #[test]
    fn sound_bruteforce() {
        let (arcs, finals) = batch_arcs(&[1, 2]);
        let delta = |q: usize, l: i64| arcs.iter().find(|a| a.0 == q && a.2 == l).map(|a| a.1);
        for fix in 0..4i64 {
            let mut s = Store::new();
            let xs: Vec<_> = (0..4).map(|_| s.new_sparse(&[0, 1, 2, 3])).collect();
            s.fix(xs[(fix % 4) as usize], fix % 3).unwrap();
            let mut p = Automaton::new(xs.clone(), 0, &finals, &arcs).unwrap();
            check_sound(&mut s, &mut p, &xs, |t| {
                let mut q = 0;
                for &l in t {
                    match delta(q, l) {
                        Some(n) => q = n,
                        None => return false,
                    }
                }
                finals.contains(&q)
            });
        }
    }
}
