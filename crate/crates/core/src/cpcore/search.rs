//! Depth-first branch-and-bound with chronological backtracking.

use std::time::Duration;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use web_time::Instant;

use super::store::Presence;
use super::{DecisionGroup, IntervalId, LitId, Model, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unknown,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "OPTIMAL",
            SolveStatus::Feasible => "FEASIBLE",
            SolveStatus::Infeasible => "INFEASIBLE",
            SolveStatus::Unknown => "UNKNOWN",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveParams {
    pub time_limit: Option<Duration>,
    pub seed: u64,
    /// Luby restarts with seeded tie-breaking among equally good choices.
    pub restarts: bool,
}

impl SolveParams {
    pub fn with_time_limit(limit: Duration) -> Self {
        SolveParams {
            time_limit: Some(limit),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: u64,
    pub fails: u64,
    pub propagations: u64,
    pub restarts: u64,
}

/// A full valuation at a solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<i64>,
    intervals: Vec<(VarId, VarId)>,
}

impl Assignment {
    pub fn value(&self, v: VarId) -> i64 {
        self.values[v.0 as usize]
    }

    #[cfg(test)]
    pub(crate) fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn lit(&self, l: LitId) -> bool {
        self.value(l.0) == 1
    }

    pub fn present(&self, i: IntervalId) -> bool {
        self.value(self.intervals[i.0 as usize].1) == 1
    }

    /// Start of a present interval.
    pub fn start(&self, i: IntervalId) -> i64 {
        self.value(self.intervals[i.0 as usize].0)
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub best_value: Option<i64>,
    pub best_bound: Option<i64>,
    pub assignment: Option<Assignment>,
    pub wall_time: Duration,
    pub stats: SolveStats,
    /// `(elapsed, value)` for each improving solution, in order.
    pub incumbents: Vec<(Duration, i64)>,
}

/// `var = val` on the left branch, `var ≠ val` on the right.
#[derive(Debug, Clone, Copy)]
struct Decision {
    var: VarId,
    val: i64,
}

struct Frame {
    decision: Decision,
    /// Set for `start = est` decisions, whose right branch postpones the
    /// interval instead of removing the value.
    interval: Option<u32>,
    right: bool,
    trail_len: usize,
}

enum Choice {
    Branch(Decision, Option<u32>),
    /// Only postponed intervals are left: the node is dominated.
    Dominated,
    Leaf,
}

/// Postponed intervals and the earliest start each had when postponed. An
/// interval becomes eligible again once propagation raises its earliest start.
struct Postponed {
    at: Vec<i64>,
    trail: Vec<(u32, i64)>,
}

impl Postponed {
    fn new(n: usize) -> Self {
        Postponed {
            at: vec![i64::MIN; n],
            trail: Vec::new(),
        }
    }

    fn set(&mut self, id: u32, est: i64) {
        self.trail.push((id, self.at[id as usize]));
        self.at[id as usize] = est;
    }

    fn restore(&mut self, len: usize) {
        while self.trail.len() > len {
            let (id, old) = self.trail.pop().unwrap();
            self.at[id as usize] = old;
        }
    }
}

fn luby(mut i: u64) -> u64 {
    // i is 1-based
    loop {
        let mut k = 1u32;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
        if i == (1u64 << k) - 1 {
            return 1u64 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
    }
}

const RESTART_SCALE: u64 = 100;

enum RunEnd {
    Complete,
    Timeout,
    Restart,
}

impl Model {
    /// Minimizes the objective (or finds any solution when none is set).
    /// Closes the model.
    pub fn solve(&mut self, params: &SolveParams) -> SolveOutcome {
        self.closed = true;
        self.build_followers();
        let t0 = Instant::now();
        let deadline = params.time_limit.map(|d| t0 + d);
        let props0 = self.propagations;
        let mut stats = SolveStats::default();
        let mut best: Option<(i64, Assignment)> = None;
        let mut incumbents = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

        let finish =
            |m: &Model, status, best: Option<(i64, Assignment)>, bound, stats: SolveStats, inc| {
                let mut stats = stats;
                stats.propagations = m.propagations - props0;
                let (best_value, assignment) = match best {
                    Some((v, a)) => (Some(v), Some(a)),
                    None => (None, None),
                };
                SolveOutcome {
                    status,
                    best_value,
                    best_bound: bound,
                    assignment,
                    wall_time: t0.elapsed(),
                    stats,
                    incumbents: inc,
                }
            };

        let expired = |dl: Option<Instant>| dl.is_some_and(|d| Instant::now() >= d);
        let mut timer = move || expired(deadline);
        if !self.propagate() {
            return finish(self, SolveStatus::Infeasible, None, None, stats, incumbents);
        }
        let root_bound = self.objective.map_or(0, |o| self.store.min(o));

        let mut run = 0u64;
        loop {
            run += 1;
            let fail_limit = params.restarts.then(|| luby(run) * RESTART_SCALE);
            let end = self.search_run(
                &mut timer,
                fail_limit,
                params.restarts.then_some(&mut rng),
                &mut stats,
                &mut best,
                &mut incumbents,
                t0,
            );
            match end {
                RunEnd::Complete => {
                    return match best {
                        Some((v, a)) => finish(
                            self,
                            SolveStatus::Optimal,
                            Some((v, a)),
                            Some(v),
                            stats,
                            incumbents,
                        ),
                        None => {
                            finish(self, SolveStatus::Infeasible, None, None, stats, incumbents)
                        }
                    };
                }
                RunEnd::Timeout => {
                    let status = if best.is_some() {
                        SolveStatus::Feasible
                    } else {
                        SolveStatus::Unknown
                    };
                    return finish(self, status, best, Some(root_bound), stats, incumbents);
                }
                RunEnd::Restart => stats.restarts += 1,
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn search_run(
        &mut self,
        timer: &mut dyn FnMut() -> bool,
        fail_limit: Option<u64>,
        mut rng: Option<&mut ChaCha8Rng>,
        stats: &mut SolveStats,
        best: &mut Option<(i64, Assignment)>,
        incumbents: &mut Vec<(Duration, i64)>,
        t0: Instant,
    ) -> RunEnd {
        let mut stack: Vec<Frame> = Vec::new();
        let mut postponed = Postponed::new(self.intervals.len());
        let run_fails0 = stats.fails;
        // the root is at fixpoint; a new incumbent bound is applied per node
        let mut ok = self.apply_bound(best.as_ref().map(|b| b.0), timer);
        if !ok && timer() {
            return RunEnd::Timeout;
        }
        loop {
            if ok {
                stats.nodes += 1;
                if timer() {
                    self.unwind(&mut stack);
                    return RunEnd::Timeout;
                }
                match self.choose(&postponed, rng.as_deref_mut()) {
                    Choice::Branch(d, interval) => {
                        self.store.push_level();
                        stack.push(Frame {
                            decision: d,
                            interval,
                            right: false,
                            trail_len: postponed.trail.len(),
                        });
                        ok = self.store.fix(d.var, d.val).is_ok() && self.settle(best, timer);
                        continue;
                    }
                    Choice::Dominated => {
                        if timer() {
                            self.unwind(&mut stack);
                            return RunEnd::Timeout;
                        }
                        stats.fails += 1;
                    }
                    Choice::Leaf => {
                        let value = self.objective.map_or(0, |o| self.store.min(o));
                        debug_assert!(best.as_ref().is_none_or(|b| value < b.0));
                        let values = (0..self.store.len() as u32)
                            .map(|v| self.store.min(VarId(v)))
                            .collect();
                        let intervals = self
                            .intervals
                            .iter()
                            .map(|iv| (iv.start, iv.pres))
                            .collect();
                        *best = Some((value, Assignment { values, intervals }));
                        incumbents.push((t0.elapsed(), value));
                        log::debug!("incumbent {value} after {} nodes", stats.nodes);
                    }
                }
            } else {
                if timer() {
                    self.unwind(&mut stack);
                    return RunEnd::Timeout;
                }
                stats.fails += 1;
            }

            // backtrack to the deepest unexplored right branch
            loop {
                let Some(frame) = stack.pop() else {
                    return RunEnd::Complete;
                };
                self.store.pop_level();
                self.store.clear_modified();
                postponed.restore(frame.trail_len);
                if frame.right {
                    continue;
                }
                if fail_limit.is_some_and(|l| stats.fails - run_fails0 >= l) {
                    self.unwind(&mut stack);
                    return RunEnd::Restart;
                }
                let d = frame.decision;
                self.store.push_level();
                stack.push(Frame {
                    right: true,
                    ..frame
                });
                let applied = match frame.interval {
                    Some(id) => {
                        // interchangeable twins wait as well
                        for v in self.images(d.var, &postponed) {
                            if let Some(j) = self.start_of[v.0 as usize] {
                                self.postpone(&mut postponed, j, d.val);
                            }
                        }
                        self.postpone(&mut postponed, id, d.val);
                        true
                    }
                    None => self.refute_symmetric(d, &postponed),
                };
                if applied && self.settle(best, timer) {
                    ok = true;
                    break;
                }
                // an expired deadline also aborts propagation as a failure
                if timer() {
                    self.unwind(&mut stack);
                    return RunEnd::Timeout;
                }
                stats.fails += 1;
            }
        }
    }

    /// The variables at the position of `var` in every interchangeable
    /// member still indistinguishable from its own.
    fn build_followers(&mut self) {
        let mut f = vec![Vec::new(); self.intervals.len()];
        for &(l, x, strong) in &self.order_links {
            f[l as usize].push((x, strong || self.implied.contains(&(x, l))));
        }
        self.followers = f;
    }

    /// Postpones `root` at `at`, along with every interval that can only
    /// start once `root` has: a postponed interval starts after `at`, and so
    /// must anything ordered after it.
    fn postpone(&self, postponed: &mut Postponed, root: u32, at: i64) {
        if postponed.at[root as usize] >= at {
            return;
        }
        postponed.set(root, at);
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            let present =
                u == root || self.store.presence(&self.intervals[u as usize]) == Presence::Present;
            for &(v, strong) in &self.followers[u as usize] {
                if (strong || present) && postponed.at[v as usize] < at {
                    postponed.set(v, at);
                    stack.push(v);
                }
            }
        }
    }

    fn images(&self, var: VarId, postponed: &Postponed) -> Vec<VarId> {
        let Some(places) = self.sym_index.get(&var) else {
            return Vec::new();
        };
        let mut images = Vec::new();
        for &(g, k, i) in places {
            let members = &self.symmetries[g as usize];
            let own = &members[k as usize];
            for (k2, other) in members.iter().enumerate() {
                if k2 as u32 != k && self.indistinguishable(own, other, postponed) {
                    images.push(other[i as usize]);
                }
            }
        }
        images
    }

    /// Refutes `d` and, with it, every symmetric image of `d`.
    fn refute_symmetric(&mut self, d: Decision, postponed: &Postponed) -> bool {
        let images = self.images(d.var, postponed);
        self.store.remove(d.var, d.val).is_ok()
            && images
                .into_iter()
                .all(|v| self.store.remove(v, d.val).is_ok())
    }

    fn indistinguishable(&self, a: &[VarId], b: &[VarId], postponed: &Postponed) -> bool {
        a.iter().zip(b).all(|(&x, &y)| {
            self.store.same_domain(x, y)
                && match (self.start_of[x.0 as usize], self.start_of[y.0 as usize]) {
                    (Some(i), Some(j)) => postponed.at[i as usize] == postponed.at[j as usize],
                    (None, None) => true,
                    _ => false,
                }
        })
    }

    fn unwind(&mut self, stack: &mut Vec<Frame>) {
        while stack.pop().is_some() {
            self.store.pop_level();
        }
        self.store.clear_modified();
    }

    fn apply_bound(&mut self, best: Option<i64>, timer: &mut dyn FnMut() -> bool) -> bool {
        if let (Some(o), Some(b)) = (self.objective, best) {
            if self.store.set_max(o, b - 1).is_err() {
                self.store.clear_modified();
                return false;
            }
        }
        self.fixpoint(Some(timer)).is_ok()
    }

    /// Applies the incumbent bound and propagates.
    fn settle(
        &mut self,
        best: &Option<(i64, Assignment)>,
        timer: &mut dyn FnMut() -> bool,
    ) -> bool {
        self.apply_bound(best.as_ref().map(|b| b.0), timer)
    }

    fn choose(&self, postponed: &Postponed, mut rng: Option<&mut ChaCha8Rng>) -> Choice {
        let s = &self.store;
        let mut waiting = false;
        for group in &self.decisions {
            match group {
                DecisionGroup::Intervals(ids) => {
                    let mut pick: Option<(i64, IntervalId)> = None;
                    let mut ties: Vec<IntervalId> = Vec::new();
                    for (id, lits) in ids {
                        let id = *id;
                        let iv = &self.intervals[id.0 as usize];
                        let p = s.presence(iv);
                        if p == Presence::Absent {
                            continue;
                        }
                        if p == Presence::Present && s.is_fixed(iv.start) {
                            if let Some(l) = lits.iter().find(|l| !s.is_fixed(l.0)) {
                                return Choice::Branch(Decision { var: l.0, val: 1 }, None);
                            }
                            continue;
                        }
                        let est = s.min(iv.start);
                        if p == Presence::Present && est <= postponed.at[id.0 as usize] {
                            // can never move past the point it was postponed at
                            if s.max(iv.start) <= postponed.at[id.0 as usize] {
                                return Choice::Dominated;
                            }
                            waiting = true;
                            continue;
                        }
                        match pick {
                            Some((e, _)) if e < est => {}
                            Some((e, _)) if e == est => ties.push(id),
                            _ => {
                                pick = Some((est, id));
                                ties.clear();
                                ties.push(id);
                            }
                        }
                    }
                    if let Some((est, mut id)) = pick {
                        if let Some(rng) = rng.as_deref_mut() {
                            id = *ties.choose(rng).unwrap();
                        }
                        let iv = &self.intervals[id.0 as usize];
                        return if s.presence(iv) == Presence::Unknown {
                            Choice::Branch(
                                Decision {
                                    var: iv.pres,
                                    val: 1,
                                },
                                None,
                            )
                        } else {
                            Choice::Branch(
                                Decision {
                                    var: iv.start,
                                    val: est,
                                },
                                Some(id.0),
                            )
                        };
                    }
                }
                DecisionGroup::Lits(lits) => {
                    if let Some(l) = lits.iter().find(|l| !s.is_fixed(l.0)) {
                        return Choice::Branch(Decision { var: l.0, val: 1 }, None);
                    }
                }
            }
        }
        if waiting {
            return Choice::Dominated;
        }
        let obj = self.objective;
        for v in 0..s.len() as u32 {
            let var = VarId(v);
            if s.is_fixed(var) || Some(var) == obj {
                continue;
            }
            // the start of an absent interval is irrelevant
            if let Some(i) = self.start_of[v as usize] {
                if s.presence(&self.intervals[i as usize]) == Presence::Absent {
                    continue;
                }
            }
            return Choice::Branch(
                Decision {
                    var,
                    val: s.min(var),
                },
                None,
            );
        }
        match obj.filter(|&o| !s.is_fixed(o)) {
            Some(o) => Choice::Branch(
                Decision {
                    var: o,
                    val: s.min(o),
                },
                None,
            ),
            None => Choice::Leaf,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpcore::{Expr, ObjectiveForm};

    #[test]
    fn luby_sequence() {
        let seq: Vec<u64> = (1..=15).map(luby).collect();
        assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn infeasible_toy() {
        let mut m = Model::new();
        let lits: Vec<_> = (0..3).map(|_| m.new_lit().unwrap()).collect();
        m.post_exactly_one(&lits).unwrap();
        for &l in &lits {
            m.fix_lit(l, false).unwrap();
        }
        let out = m.solve(&SolveParams::default());
        assert_eq!(out.status, SolveStatus::Infeasible);
        assert_eq!(out.best_value, None);
    }

    #[test]
    fn empty_objective_is_zero() {
        let mut m = Model::new();
        let a = m.add_optional_interval(3, 0, 5, false).unwrap();
        m.add_decision_intervals(&[a]).unwrap();
        m.set_objective(ObjectiveForm::MinSum, &[]).unwrap();
        let out = m.solve(&SolveParams::default());
        assert_eq!(out.status, SolveStatus::Optimal);
        assert_eq!(out.best_value, Some(0));
        assert_eq!(out.stats.nodes, 2);
    }

    /// Two jobs on one machine; the heavier should go first.
    fn two_jobs() -> Model {
        let mut m = Model::new();
        let a = m.add_optional_interval(4, 0, 20, false).unwrap();
        let b = m.add_optional_interval(2, 0, 20, false).unwrap();
        m.post_no_overlap(&[a, b]).unwrap();
        m.add_decision_intervals(&[a, b]).unwrap();
        m.set_objective(
            ObjectiveForm::MinSum,
            &[(1, Expr::EndOrZero(a)), (5, Expr::EndOrZero(b))],
        )
        .unwrap();
        m
    }

    #[test]
    fn branch_and_bound_finds_optimum() {
        let mut m = two_jobs();
        let out = m.solve(&SolveParams::default());
        assert_eq!(out.status, SolveStatus::Optimal);
        // b at 0 (end 2), a at 2 (end 6): 6 + 10
        assert_eq!(out.best_value, Some(16));
        assert_eq!(out.best_bound, Some(16));
        let vals: Vec<i64> = out.incumbents.iter().map(|x| x.1).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn zero_time_limit_never_claims_optimal_wrongly() {
        let mut m = two_jobs();
        let out = m.solve(&SolveParams::with_time_limit(Duration::ZERO));
        assert!(matches!(
            out.status,
            SolveStatus::Unknown | SolveStatus::Feasible | SolveStatus::Optimal
        ));
        if out.status == SolveStatus::Optimal {
            assert_eq!(out.best_value, Some(16));
        }
    }

    #[test]
    fn restarts_reach_same_optimum() {
        for seed in 0..4 {
            let mut m = two_jobs();
            let out = m.solve(&SolveParams {
                time_limit: None,
                seed,
                restarts: true,
            });
            assert_eq!(
                (out.status, out.best_value),
                (SolveStatus::Optimal, Some(16))
            );
        }
    }

    #[test]
    fn postponement_reaches_followers() {
        let mut m = Model::new();
        let [a, b, c, d, _] = [0; 5].map(|_| m.add_optional_interval(2, 0, 20, true).unwrap());
        m.post_within(a, b).unwrap();
        m.post_start_before_start(b, c).unwrap();
        m.post_synchronize(c, d).unwrap();
        m.build_followers();
        let mut p = Postponed::new(5);
        m.postpone(&mut p, b.0, 5);
        // a needs b; c follows b itself; d follows c only once c is present
        assert_eq!(p.at, vec![5, 5, 5, i64::MIN, i64::MIN]);
        p.restore(0);
        assert!(p.at.iter().all(|&x| x == i64::MIN));
    }

    #[test]
    fn deterministic_without_limit() {
        let a = two_jobs().solve(&SolveParams::default());
        let b = two_jobs().solve(&SolveParams::default());
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.assignment, b.assignment);
    }
}
