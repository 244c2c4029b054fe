//! A small constraint-programming engine: integer and boolean variables,
//! optional fixed-duration intervals, the global constraints the batch
//! scheduling encodings need, and depth-first branch-and-bound.
//!
//! Constraints are posted on a [`Model`]; [`Model::solve`] closes it and
//! runs the search. Handles are plain indices and only mean something to the
//! model that created them.

mod propagators;
mod search;
mod store;

use std::collections::VecDeque;

use thiserror::Error;

use propagators::{
    Alternative, Automaton, CondValue, Covered, Cumulative, Element, EndOfSelected, ExactlyOne,
    Implies, LinearLe, LitImpliesStartGe, NoOverlap, ObjectiveLink, Priority, Propagator,
    SelectOption, StartBeforeStart, Synchronize, Term, Within,
};
use store::{Iv, PResult, Store};

pub use search::{Assignment, SolveOutcome, SolveParams, SolveStats, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) u32);

/// A 0/1 variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LitId(pub(crate) VarId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntervalId(pub(crate) u32);

impl LitId {
    pub fn var(self) -> VarId {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("the model is closed once search has started")]
    Closed,
    #[error("invalid bounds [{0}, {1}]")]
    InvalidBounds(i64, i64),
    #[error("negative duration {0}")]
    NegativeDuration(i64),
    #[error("{0} needs a non-empty list")]
    Empty(&'static str),
    #[error("duration mismatch: {0} vs {1}")]
    DurationMismatch(i64, i64),
    #[error("{0} demands for {1} intervals")]
    LengthMismatch(usize, usize),
    #[error("negative {0}: {1}")]
    Negative(&'static str, i64),
    #[error("element index domain [{0}, {1}] exceeds the array")]
    IndexOutOfRange(i64, i64),
    #[error("automaton has two arcs with label {label} leaving state {state}")]
    Nondeterministic { state: usize, label: i64 },
    #[error("unknown handle {0}")]
    UnknownHandle(String),
}

/// How the objective terms combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveForm {
    MinSum,
    MinMax,
}

/// An objective term expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expr {
    Var(VarId),
    /// `start + duration` when present, 0 when absent.
    EndOrZero(IntervalId),
}

enum DecisionGroup {
    /// Each interval with the literals decided right after it is placed.
    Intervals(Vec<(IntervalId, Vec<LitId>)>),
    Lits(Vec<LitId>),
}

pub struct Model {
    store: Store,
    props: Vec<Box<dyn Propagator>>,
    priorities: Vec<Priority>,
    watch: Vec<Vec<u32>>,
    intervals: Vec<Iv>,
    /// For each variable, the interval whose start it is.
    start_of: Vec<Option<u32>>,
    decisions: Vec<DecisionGroup>,
    symmetries: Vec<Vec<Vec<VarId>>>,
    /// `(group, member, position)` of every variable named in a symmetry.
    sym_index: std::collections::HashMap<VarId, Vec<(u32, u32, u32)>>,
    objective: Option<VarId>,
    /// `(leader, follower, strong)`: a present follower never starts before
    /// a present leader. Strong links also make the follower's presence
    /// imply the leader's, so they chain.
    order_links: Vec<(u32, u32, bool)>,
    /// `(antecedent, consequent)` interval presence implications.
    implied: std::collections::HashSet<(u32, u32)>,
    /// Built from `order_links` when the search starts.
    followers: Vec<Vec<(u32, bool)>>,
    closed: bool,
    inconsistent: bool,
    queue: [VecDeque<u32>; 2],
    queued: Vec<bool>,
    scratch: Vec<u32>,
    propagations: u64,
}

impl Default for Model {
    fn default() -> Self {
        Self::new()
    }
}

impl Model {
    pub fn new() -> Self {
        Model {
            store: Store::new(),
            props: Vec::new(),
            priorities: Vec::new(),
            watch: Vec::new(),
            intervals: Vec::new(),
            start_of: Vec::new(),
            decisions: Vec::new(),
            symmetries: Vec::new(),
            sym_index: Default::default(),
            objective: None,
            order_links: Vec::new(),
            implied: Default::default(),
            followers: Vec::new(),
            closed: false,
            inconsistent: false,
            queue: [VecDeque::new(), VecDeque::new()],
            queued: Vec::new(),
            scratch: Vec::new(),
            propagations: 0,
        }
    }

    fn open(&self) -> Result<(), ModelError> {
        if self.closed {
            Err(ModelError::Closed)
        } else {
            Ok(())
        }
    }

    fn track(&mut self, v: VarId) -> VarId {
        self.watch.push(Vec::new());
        self.start_of.push(None);
        debug_assert_eq!(self.watch.len(), self.store.len());
        v
    }

    fn check_var(&self, v: VarId) -> Result<(), ModelError> {
        if (v.0 as usize) < self.store.len() {
            Ok(())
        } else {
            Err(ModelError::UnknownHandle(format!("{v:?}")))
        }
    }

    fn iv(&self, i: IntervalId) -> Result<Iv, ModelError> {
        self.intervals
            .get(i.0 as usize)
            .copied()
            .ok_or_else(|| ModelError::UnknownHandle(format!("{i:?}")))
    }

    fn ivs(&self, ids: &[IntervalId]) -> Result<Vec<Iv>, ModelError> {
        ids.iter().map(|&i| self.iv(i)).collect()
    }

    fn post(&mut self, p: Box<dyn Propagator>) -> Result<(), ModelError> {
        self.open()?;
        let id = self.props.len() as u32;
        let mut vars = p.vars();
        vars.sort_unstable();
        vars.dedup();
        for v in vars {
            self.check_var(v)?;
            self.watch[v.0 as usize].push(id);
        }
        self.priorities.push(p.priority());
        self.props.push(p);
        self.queued.push(false);
        Ok(())
    }

    // ---- variables ----------------------------------------------------------

    pub fn new_int_var(&mut self, lo: i64, hi: i64) -> Result<VarId, ModelError> {
        self.open()?;
        if lo > hi {
            return Err(ModelError::InvalidBounds(lo, hi));
        }
        let v = self.store.new_range(lo, hi);
        Ok(self.track(v))
    }

    /// A variable over an explicit value set; supports interior removals.
    pub fn new_int_var_values(&mut self, values: &[i64]) -> Result<VarId, ModelError> {
        self.open()?;
        if values.is_empty() {
            return Err(ModelError::Empty("new_int_var_values"));
        }
        let v = self.store.new_sparse(values);
        Ok(self.track(v))
    }

    pub fn new_lit(&mut self) -> Result<LitId, ModelError> {
        self.new_int_var(0, 1).map(LitId)
    }

    pub fn constant(&mut self, value: i64) -> Result<VarId, ModelError> {
        self.new_int_var(value, value)
    }

    pub fn add_optional_interval(
        &mut self,
        duration: i64,
        start_lo: i64,
        start_hi: i64,
        optional: bool,
    ) -> Result<IntervalId, ModelError> {
        self.open()?;
        if duration < 0 {
            return Err(ModelError::NegativeDuration(duration));
        }
        let start = self.new_int_var(start_lo, start_hi)?;
        let pres = self.new_int_var(if optional { 0 } else { 1 }, 1)?;
        let id = self.intervals.len() as u32;
        self.intervals.push(Iv {
            start,
            dur: duration,
            pres,
        });
        self.start_of[start.0 as usize] = Some(id);
        Ok(IntervalId(id))
    }

    pub fn start(&self, i: IntervalId) -> VarId {
        self.intervals[i.0 as usize].start
    }

    pub fn presence(&self, i: IntervalId) -> LitId {
        LitId(self.intervals[i.0 as usize].pres)
    }

    pub fn duration(&self, i: IntervalId) -> i64 {
        self.intervals[i.0 as usize].dur
    }

    pub fn num_vars(&self) -> usize {
        self.store.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.props.len()
    }

    // ---- search hints -------------------------------------------------------

    // Groups are branched on in the order they are added; a later group is
    // only consulted once every earlier one is decided or postponed.

    /// Intervals decided presence first, then start at the earliest
    /// possible time (schedule or postpone).
    pub fn add_decision_intervals(&mut self, ids: &[IntervalId]) -> Result<(), ModelError> {
        self.open()?;
        self.ivs(ids)?;
        let group = ids.iter().map(|&i| (i, Vec::new())).collect();
        self.decisions.push(DecisionGroup::Intervals(group));
        Ok(())
    }

    /// Like [`Model::add_decision_intervals`], but once an interval is
    /// present with a fixed start its literals are decided, true first,
    /// before the next interval is picked. Builds batches one at a time.
    pub fn add_decision_batches(
        &mut self,
        batches: &[(IntervalId, Vec<LitId>)],
    ) -> Result<(), ModelError> {
        self.open()?;
        for (i, lits) in batches {
            self.iv(*i)?;
            for l in lits {
                self.check_var(l.0)?;
            }
        }
        self.decisions
            .push(DecisionGroup::Intervals(batches.to_vec()));
        Ok(())
    }

    /// Literals decided in order, true first.
    pub fn add_decision_lits(&mut self, lits: &[LitId]) -> Result<(), ModelError> {
        self.open()?;
        for l in lits {
            self.check_var(l.0)?;
        }
        self.decisions.push(DecisionGroup::Lits(lits.to_vec()));
        Ok(())
    }

    /// Declares that exchanging any two `members` position by position maps
    /// solutions to solutions of equal objective value (identical machines,
    /// unordered batch slots). Every variable tied to a member must be
    /// listed, or the search prunes solutions it should not.
    ///
    /// When the search refutes `x = v` for a variable of one member, it also
    /// removes `v` at the same position of every member whose current
    /// domains are identical.
    pub fn add_interchangeable(&mut self, members: &[Vec<VarId>]) -> Result<(), ModelError> {
        self.open()?;
        let Some(first) = members.first() else {
            return Ok(());
        };
        for m in members {
            if m.len() != first.len() {
                return Err(ModelError::LengthMismatch(m.len(), first.len()));
            }
            for &v in m {
                self.check_var(v)?;
            }
        }
        if members.len() < 2 {
            return Ok(());
        }
        let g = self.symmetries.len() as u32;
        for (k, m) in members.iter().enumerate() {
            for (i, &v) in m.iter().enumerate() {
                self.sym_index
                    .entry(v)
                    .or_default()
                    .push((g, k as u32, i as u32));
            }
        }
        self.symmetries.push(members.to_vec());
        Ok(())
    }

    // ---- constraints --------------------------------------------------------

    pub fn post_exactly_one(&mut self, lits: &[LitId]) -> Result<(), ModelError> {
        if lits.is_empty() {
            return Err(ModelError::Empty("exactly_one"));
        }
        self.post(Box::new(ExactlyOne {
            lits: lits.iter().map(|l| l.0).collect(),
        }))
    }

    /// `a ⇒ b`.
    pub fn post_implies(&mut self, a: LitId, b: LitId) -> Result<(), ModelError> {
        self.post(Box::new(Implies { a: a.0, b: b.0 }))
    }

    pub fn post_linear_le(&mut self, terms: &[(i64, VarId)], rhs: i64) -> Result<(), ModelError> {
        self.post(Box::new(LinearLe {
            terms: terms.to_vec(),
            rhs,
        }))
    }

    pub fn post_alternative(
        &mut self,
        master: IntervalId,
        members: &[IntervalId],
    ) -> Result<(), ModelError> {
        if members.is_empty() {
            return Err(ModelError::Empty("alternative"));
        }
        let m = self.iv(master)?;
        let ivs = self.ivs(members)?;
        if let Some(bad) = ivs.iter().find(|x| x.dur != m.dur) {
            return Err(ModelError::DurationMismatch(m.dur, bad.dur));
        }
        self.post(Box::new(Alternative {
            master: m,
            members: ivs,
        }))?;
        let single = members.len() == 1;
        for &x in members {
            self.order_links.push((master.0, x.0, true));
            self.order_links.push((x.0, master.0, single));
            self.implied.insert((x.0, master.0));
        }
        Ok(())
    }

    /// `b` present ⇒ at least one member present, starting with `b`.
    pub fn post_covered(
        &mut self,
        b: IntervalId,
        members: &[IntervalId],
    ) -> Result<(), ModelError> {
        let b = self.iv(b)?;
        let members = self.ivs(members)?;
        self.post(Box::new(Covered { b, members }))
    }

    pub fn post_no_overlap(&mut self, intervals: &[IntervalId]) -> Result<(), ModelError> {
        let ivs = self.ivs(intervals)?;
        self.post(Box::new(NoOverlap::new(ivs)))
    }

    pub fn post_cumulative(
        &mut self,
        intervals: &[IntervalId],
        demands: &[i64],
        capacity: i64,
    ) -> Result<(), ModelError> {
        if intervals.len() != demands.len() {
            return Err(ModelError::LengthMismatch(demands.len(), intervals.len()));
        }
        if let Some(&d) = demands.iter().find(|&&d| d < 0) {
            return Err(ModelError::Negative("demand", d));
        }
        let ivs = self.ivs(intervals)?;
        self.post(Box::new(Cumulative::new(ivs, demands.to_vec(), capacity)))
    }

    pub fn post_element(
        &mut self,
        index: VarId,
        array: &[VarId],
        value: VarId,
    ) -> Result<(), ModelError> {
        if array.is_empty() {
            return Err(ModelError::Empty("element"));
        }
        self.check_var(index)?;
        let (lo, hi) = (self.store.min(index), self.store.max(index));
        if lo < 0 || hi >= array.len() as i64 {
            return Err(ModelError::IndexOutOfRange(lo, hi));
        }
        self.post(Box::new(Element::new(index, array.to_vec(), value)))
    }

    /// Arcs are `(from, to, label)` triples.
    pub fn post_automaton(
        &mut self,
        transitions: &[VarId],
        initial_state: usize,
        final_states: &[usize],
        arcs: &[(usize, usize, i64)],
    ) -> Result<(), ModelError> {
        let mut seen = std::collections::HashSet::new();
        for &(from, _, label) in arcs {
            if label < 0 {
                return Err(ModelError::Negative("label", label));
            }
            if !seen.insert((from, label)) {
                return Err(ModelError::Nondeterministic { state: from, label });
            }
        }
        let a = Automaton::new(transitions.to_vec(), initial_state, final_states, arcs)
            .expect("determinism checked above");
        self.post(Box::new(a))
    }

    pub fn post_implies_presence(
        &mut self,
        antecedent: IntervalId,
        consequent: IntervalId,
    ) -> Result<(), ModelError> {
        let (a, b) = (self.iv(antecedent)?, self.iv(consequent)?);
        self.post(Box::new(Implies {
            a: a.pres,
            b: b.pres,
        }))?;
        self.implied.insert((antecedent.0, consequent.0));
        Ok(())
    }

    pub fn post_synchronize(&mut self, a: IntervalId, b: IntervalId) -> Result<(), ModelError> {
        let (ia, ib) = (self.iv(a)?, self.iv(b)?);
        if ia.dur != ib.dur {
            return Err(ModelError::DurationMismatch(ia.dur, ib.dur));
        }
        self.post(Box::new(Synchronize { a: ia, b: ib }))?;
        self.order_links.push((a.0, b.0, false));
        self.order_links.push((b.0, a.0, false));
        Ok(())
    }

    /// `a` present ⇒ `b` present, both starting together: the conjunction
    /// of [`Model::post_implies_presence`] and [`Model::post_synchronize`],
    /// with stronger filtering.
    pub fn post_within(&mut self, a: IntervalId, b: IntervalId) -> Result<(), ModelError> {
        let (ia, ib) = (self.iv(a)?, self.iv(b)?);
        if ia.dur != ib.dur {
            return Err(ModelError::DurationMismatch(ia.dur, ib.dur));
        }
        self.post(Box::new(Within { a: ia, b: ib }))?;
        self.order_links.push((b.0, a.0, true));
        self.implied.insert((a.0, b.0));
        Ok(())
    }

    pub fn post_start_before_start(
        &mut self,
        a: IntervalId,
        b: IntervalId,
    ) -> Result<(), ModelError> {
        let (ia, ib) = (self.iv(a)?, self.iv(b)?);
        self.post(Box::new(StartBeforeStart { a: ia, b: ib }))?;
        self.order_links.push((a.0, b.0, false));
        Ok(())
    }

    /// `out = if lit { x } else { else_value }`.
    pub fn post_cond_value(
        &mut self,
        lit: LitId,
        x: VarId,
        else_value: i64,
        out: VarId,
    ) -> Result<(), ModelError> {
        self.post(Box::new(CondValue {
            lit: lit.0,
            x,
            else_value,
            out,
        }))
    }

    /// `target = end(iv_k)` for every option `(lit_k, iv_k)` whose literal is
    /// true; at least one must be. Each literal must imply its interval's
    /// presence.
    pub fn post_end_of_selected(
        &mut self,
        target: VarId,
        options: &[(LitId, IntervalId)],
    ) -> Result<(), ModelError> {
        if options.is_empty() {
            return Err(ModelError::Empty("end_of_selected"));
        }
        let options = options
            .iter()
            .map(|&(l, i)| {
                let iv = self.iv(i)?;
                Ok(SelectOption {
                    lit: l.0,
                    start: iv.start,
                    offset: iv.dur,
                })
            })
            .collect::<Result<_, ModelError>>()?;
        self.post(Box::new(EndOfSelected { target, options }))
    }

    /// `lit ⇒ startOf(iv) ≥ r`, an absent interval starting at 0.
    pub fn post_lit_implies_start_ge(
        &mut self,
        lit: LitId,
        iv: IntervalId,
        r: i64,
    ) -> Result<(), ModelError> {
        let iv = self.iv(iv)?;
        self.post(Box::new(LitImpliesStartGe { lit: lit.0, iv, r }))
    }

    /// Sets the minimized expression; returns the variable holding its value.
    pub fn set_objective(
        &mut self,
        form: ObjectiveForm,
        terms: &[(i64, Expr)],
    ) -> Result<VarId, ModelError> {
        self.open()?;
        let mut lowered = Vec::with_capacity(terms.len());
        // with nonnegative ends the max form is at least 0
        let (mut lo, mut hi) = (0i64, 0i64);
        for &(c, e) in terms {
            if c < 0 {
                return Err(ModelError::Negative("coefficient", c));
            }
            let t = match e {
                Expr::Var(v) => {
                    self.check_var(v)?;
                    Term::Var(v)
                }
                Expr::EndOrZero(i) => Term::EndOrZero(self.iv(i)?),
            };
            let (a, b) = match t {
                Term::Var(v) => (self.store.min(v), self.store.max(v)),
                Term::EndOrZero(iv) => (
                    0.min(self.store.min(iv.start) + iv.dur),
                    self.store.max(iv.start) + iv.dur,
                ),
            };
            match form {
                ObjectiveForm::MinSum => {
                    lo += c * a;
                    hi += c * b;
                }
                ObjectiveForm::MinMax => hi = hi.max(c * b),
            }
            lowered.push((c, t));
        }
        let obj = self.new_int_var(lo, hi)?;
        self.post(Box::new(ObjectiveLink::new(
            obj,
            form == ObjectiveForm::MinSum,
            lowered,
        )))?;
        self.objective = Some(obj);
        Ok(obj)
    }

    pub fn objective_var(&self) -> Option<VarId> {
        self.objective
    }

    // ---- root-level inspection ------------------------------------------

    /// Fixes a variable at the root, before search.
    pub fn fix(&mut self, v: VarId, value: i64) -> Result<(), ModelError> {
        self.open()?;
        self.check_var(v)?;
        if self.store.fix(v, value).is_err() {
            self.inconsistent = true;
        }
        Ok(())
    }

    pub fn fix_lit(&mut self, l: LitId, value: bool) -> Result<(), ModelError> {
        self.fix(l.0, value as i64)
    }

    /// Runs propagation to a fixpoint at the root. Returns false when the
    /// model is proven infeasible.
    pub fn propagate(&mut self) -> bool {
        if self.inconsistent {
            return false;
        }
        self.store.clear_modified();
        for p in 0..self.props.len() {
            self.enqueue(p as u32);
        }
        if self.fixpoint(None).is_err() {
            self.inconsistent = true;
        }
        !self.inconsistent
    }

    /// Whether the full valuation `values` (indexed by variable) satisfies
    /// every constraint. Leaves the domains untouched.
    #[cfg(test)]
    pub(crate) fn accepts(&mut self, values: &[i64]) -> bool {
        self.store.push_level();
        let mut ok = values
            .iter()
            .enumerate()
            .all(|(v, &x)| self.store.fix(VarId(v as u32), x).is_ok());
        if ok {
            self.store.clear_modified();
            for p in 0..self.props.len() {
                self.enqueue(p as u32);
            }
            ok = self.fixpoint(None).is_ok();
        }
        self.store.pop_level();
        self.store.clear_modified();
        ok
    }

    #[cfg(test)]
    pub(crate) fn symmetry_groups(&self) -> &[Vec<Vec<VarId>>] {
        &self.symmetries
    }

    pub fn min(&self, v: VarId) -> i64 {
        self.store.min(v)
    }

    pub fn max(&self, v: VarId) -> i64 {
        self.store.max(v)
    }

    pub fn contains(&self, v: VarId, x: i64) -> bool {
        self.store.contains(v, x)
    }

    pub fn lit_value(&self, l: LitId) -> Option<bool> {
        if self.store.is_true(l.0) {
            Some(true)
        } else if self.store.is_false(l.0) {
            Some(false)
        } else {
            None
        }
    }

    pub fn is_present(&self, i: IntervalId) -> Option<bool> {
        self.lit_value(self.presence(i))
    }

    // ---- propagation engine ---------------------------------------------

    fn enqueue(&mut self, p: u32) {
        if !self.queued[p as usize] {
            self.queued[p as usize] = true;
            self.queue[self.priorities[p as usize] as usize].push_back(p);
        }
    }

    fn clear_queue(&mut self) {
        for q in &mut self.queue {
            for p in q.drain(..) {
                self.queued[p as usize] = false;
            }
        }
        self.store.clear_modified();
    }

    /// Propagates until no propagator has pending work. `timer` is polled
    /// every few dozen propagator runs; when it reports expiry the fixpoint
    /// is abandoned as a failure.
    fn fixpoint(&mut self, mut timer: Option<&mut dyn FnMut() -> bool>) -> PResult {
        let mut since_check = 0u32;
        loop {
            self.store.take_modified(&mut self.scratch);
            for k in 0..self.scratch.len() {
                let v = self.scratch[k] as usize;
                for w in 0..self.watch[v].len() {
                    let p = self.watch[v][w];
                    self.enqueue(p);
                }
            }
            self.scratch.clear();
            let Some(p) = self.queue[0]
                .pop_front()
                .or_else(|| self.queue[1].pop_front())
            else {
                return Ok(());
            };
            self.queued[p as usize] = false;
            self.propagations += 1;
            if let Err(f) = self.props[p as usize].propagate(&mut self.store) {
                log::trace!("{} failed", self.props[p as usize].name());
                self.clear_queue();
                return Err(f);
            }
            since_check += 1;
            if since_check >= 64 {
                since_check = 0;
                if let Some(t) = timer.as_deref_mut() {
                    if t() {
                        self.clear_queue();
                        return Err(store::Fail);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mandatory_interval_is_present() {
        let mut m = Model::new();
        let i = m.add_optional_interval(10, 3, 53, false).unwrap();
        assert_eq!(m.is_present(i), Some(true));
        let p = m.add_optional_interval(0, 0, 0, true).unwrap();
        assert_eq!(m.is_present(p), None);
        assert_eq!(
            m.add_optional_interval(1, 5, 4, false),
            Err(ModelError::InvalidBounds(5, 4))
        );
    }

    #[test]
    fn exactly_one_examples() {
        let mut m = Model::new();
        let (a, b) = (m.new_lit().unwrap(), m.new_lit().unwrap());
        m.post_exactly_one(&[a, b]).unwrap();
        m.fix_lit(a, true).unwrap();
        assert!(m.propagate());
        assert_eq!(m.lit_value(b), Some(false));

        let mut m = Model::new();
        let a = m.new_lit().unwrap();
        m.post_exactly_one(&[a]).unwrap();
        assert!(m.propagate());
        assert_eq!(m.lit_value(a), Some(true));
        assert_eq!(
            m.post_exactly_one(&[]),
            Err(ModelError::Empty("exactly_one"))
        );
    }

    #[test]
    fn alternative_examples() {
        let mut m = Model::new();
        let master = m.add_optional_interval(10, 0, 50, false).unwrap();
        let m1 = m.add_optional_interval(10, 5, 50, true).unwrap();
        let m2 = m.add_optional_interval(10, 0, 50, true).unwrap();
        m.post_alternative(master, &[m1, m2]).unwrap();
        m.fix_lit(m.presence(m1), true).unwrap();
        assert!(m.propagate());
        assert_eq!(m.is_present(m2), Some(false));
        assert_eq!(m.min(m.start(master)), 5);

        let mut m = Model::new();
        let master = m.add_optional_interval(10, 0, 50, true).unwrap();
        let ms: Vec<_> = (0..3)
            .map(|_| m.add_optional_interval(10, 0, 50, true).unwrap())
            .collect();
        m.post_alternative(master, &ms).unwrap();
        m.fix_lit(m.presence(master), false).unwrap();
        assert!(m.propagate());
        assert!(ms.iter().all(|&i| m.is_present(i) == Some(false)));

        let mut m = Model::new();
        let master = m.add_optional_interval(10, 0, 50, false).unwrap();
        let ms: Vec<_> = (0..2)
            .map(|_| m.add_optional_interval(10, 0, 50, true).unwrap())
            .collect();
        m.post_alternative(master, &ms).unwrap();
        for &i in &ms {
            m.fix_lit(m.presence(i), false).unwrap();
        }
        assert!(!m.propagate());

        let mut m = Model::new();
        let a = m.add_optional_interval(10, 0, 50, false).unwrap();
        let b = m.add_optional_interval(9, 0, 50, true).unwrap();
        assert_eq!(
            m.post_alternative(a, &[b]),
            Err(ModelError::DurationMismatch(10, 9))
        );
    }

    #[test]
    fn no_overlap_examples() {
        let mut m = Model::new();
        let a = m.add_optional_interval(10, 5, 9, false).unwrap();
        let b = m.add_optional_interval(10, 5, 9, false).unwrap();
        m.post_no_overlap(&[a, b]).unwrap();
        assert!(!m.propagate());

        let mut m = Model::new();
        let a = m.add_optional_interval(10, 5, 9, false).unwrap();
        let b = m.add_optional_interval(10, 5, 9, true).unwrap();
        m.post_no_overlap(&[a, b]).unwrap();
        assert!(m.propagate());
        assert_eq!(m.is_present(b), Some(false));
        assert_eq!((m.min(m.start(a)), m.max(m.start(a))), (5, 9));

        let mut m = Model::new();
        let a = m.add_optional_interval(10, 5, 5, false).unwrap();
        let b = m.add_optional_interval(10, 15, 15, false).unwrap();
        m.post_no_overlap(&[a, b]).unwrap();
        assert!(m.propagate());
    }

    #[test]
    fn cumulative_examples() {
        let mut m = Model::new();
        let ivs: Vec<_> = (0..2)
            .map(|_| m.add_optional_interval(10, 3, 3, false).unwrap())
            .collect();
        m.post_cumulative(&ivs, &[60, 60], 100).unwrap();
        assert!(!m.propagate());

        let mut m = Model::new();
        let ivs: Vec<_> = (0..4)
            .map(|_| m.add_optional_interval(10, 12, 12, false).unwrap())
            .collect();
        m.post_cumulative(&ivs, &[25; 4], 100).unwrap();
        assert!(m.propagate());
        assert_eq!(
            m.post_cumulative(&ivs, &[25; 3], 100),
            Err(ModelError::LengthMismatch(3, 4))
        );
    }

    #[test]
    fn element_examples() {
        let mut m = Model::new();
        let idx = m.new_int_var_values(&[0, 1]).unwrap();
        let arr = [m.new_int_var(1, 3).unwrap(), m.new_int_var(1, 3).unwrap()];
        let val = m.new_int_var(5, 5).unwrap();
        m.post_element(idx, &arr, val).unwrap();
        assert!(!m.propagate());
        let far = m.new_int_var(0, 5).unwrap();
        assert_eq!(
            m.post_element(far, &arr, val),
            Err(ModelError::IndexOutOfRange(0, 5))
        );
    }

    #[test]
    fn automaton_rejects_nondeterminism() {
        let mut m = Model::new();
        let x = m.new_int_var(0, 3).unwrap();
        let err = m
            .post_automaton(&[x], 0, &[0], &[(0, 0, 0), (0, 1, 0)])
            .unwrap_err();
        assert_eq!(err, ModelError::Nondeterministic { state: 0, label: 0 });
    }

    #[test]
    fn presence_implication_examples() {
        let mut m = Model::new();
        let a = m.add_optional_interval(3, 0, 9, true).unwrap();
        let b = m.add_optional_interval(3, 0, 9, true).unwrap();
        let c = m.add_optional_interval(3, 0, 9, true).unwrap();
        let d = m.add_optional_interval(3, 0, 9, true).unwrap();
        m.post_implies_presence(a, b).unwrap();
        m.post_implies_presence(c, d).unwrap();
        m.fix_lit(m.presence(a), true).unwrap();
        m.fix_lit(m.presence(d), false).unwrap();
        assert!(m.propagate());
        assert_eq!(m.is_present(b), Some(true));
        assert_eq!(m.is_present(c), Some(false));
    }

    #[test]
    fn synchronize_examples() {
        let mut m = Model::new();
        let a = m.add_optional_interval(10, 0, 40, false).unwrap();
        let b = m.add_optional_interval(10, 15, 15, false).unwrap();
        m.post_synchronize(a, b).unwrap();
        assert!(m.propagate());
        assert_eq!((m.min(m.start(a)), m.max(m.start(a))), (15, 15));

        let mut m = Model::new();
        let a = m.add_optional_interval(10, 0, 40, true).unwrap();
        let b = m.add_optional_interval(10, 15, 20, true).unwrap();
        m.post_synchronize(a, b).unwrap();
        m.fix_lit(m.presence(a), false).unwrap();
        assert!(m.propagate());
        assert_eq!((m.min(m.start(b)), m.max(m.start(b))), (15, 20));
        assert_eq!(m.is_present(b), None);

        let mut m = Model::new();
        let a = m.add_optional_interval(10, 0, 4, false).unwrap();
        let b = m.add_optional_interval(10, 5, 9, false).unwrap();
        m.post_synchronize(a, b).unwrap();
        assert!(!m.propagate());
    }

    #[test]
    fn start_before_start_examples() {
        let mut m = Model::new();
        let a = m.add_optional_interval(2, 10, 20, false).unwrap();
        let b = m.add_optional_interval(2, 0, 15, false).unwrap();
        m.post_start_before_start(a, b).unwrap();
        assert!(m.propagate());
        assert_eq!((m.min(m.start(b)), m.max(m.start(a))), (10, 15));

        let mut m = Model::new();
        let a = m.add_optional_interval(2, 10, 20, true).unwrap();
        let b = m.add_optional_interval(2, 0, 5, false).unwrap();
        m.post_start_before_start(a, b).unwrap();
        m.fix_lit(m.presence(a), false).unwrap();
        assert!(m.propagate());
        assert_eq!(m.max(m.start(b)), 5);

        let mut m = Model::new();
        let a = m.add_optional_interval(2, 10, 20, false).unwrap();
        let b = m.add_optional_interval(2, 0, 5, false).unwrap();
        m.post_start_before_start(a, b).unwrap();
        assert!(!m.propagate());
    }

    #[test]
    fn closed_after_solve() {
        let mut m = Model::new();
        let l = m.new_lit().unwrap();
        m.post_exactly_one(&[l]).unwrap();
        m.solve(&SolveParams::default());
        assert_eq!(m.new_lit(), Err(ModelError::Closed));
        assert_eq!(m.post_exactly_one(&[l]), Err(ModelError::Closed));
    }
}
