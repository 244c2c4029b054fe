//! Interval constraints: alternative, synchronize, start-before-start and
//! the pairwise disjunctive no-overlap.

use super::{Priority, Propagator};
use crate::cpcore::store::{Fail, Iv, PResult, Presence, Store};
use crate::cpcore::VarId;

fn iv_vars(ivs: &[Iv]) -> Vec<VarId> {
    ivs.iter().flat_map(|i| [i.start, i.pres]).collect()
}

/// Master present ⇔ exactly one member present, sharing its start.
pub(crate) struct Alternative {
    pub master: Iv,
    pub members: Vec<Iv>,
}

impl Propagator for Alternative {
    fn name(&self) -> &'static str {
        "alternative"
    }

    fn vars(&self) -> Vec<VarId> {
        let mut v = iv_vars(&self.members);
        v.extend([self.master.start, self.master.pres]);
        v
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        let m = self.master;
        if s.presence(&m) == Presence::Absent {
            for iv in &self.members {
                s.set_absent(iv)?;
            }
            return Ok(());
        }

        let mut chosen: Option<Iv> = None;
        for iv in &self.members {
            if s.presence(iv) == Presence::Present {
                if chosen.is_some() {
                    return Err(Fail);
                }
                chosen = Some(*iv);
            }
        }
        if let Some(c) = chosen {
            s.set_present(&m)?;
            for iv in &self.members {
                if *iv != c {
                    s.set_absent(iv)?;
                }
            }
            loop {
                let changed = s.set_bounds(m.start, s.min(c.start), s.max(c.start))?
                    | s.set_bounds(c.start, s.min(m.start), s.max(m.start))?;
                if !changed {
                    break;
                }
            }
            return Ok(());
        }

        // no member chosen yet: members live inside the master window
        let (mlo, mhi) = (s.min(m.start), s.max(m.start));
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        let mut open = 0;
        let mut last = None;
        for iv in &self.members {
            if s.presence(iv) == Presence::Absent {
                continue;
            }
            s.iv_set_start_bounds(iv, mlo, mhi)?;
            if s.presence(iv) == Presence::Absent {
                continue;
            }
            open += 1;
            last = Some(*iv);
            lo = lo.min(s.min(iv.start));
            hi = hi.max(s.max(iv.start));
        }
        if open == 0 {
            return match s.presence(&m) {
                Presence::Present => Err(Fail),
                _ => s.set_absent(&m).map(|_| ()),
            };
        }
        s.iv_set_start_bounds(&m, lo, hi)?;
        if open == 1 && s.presence(&m) == Presence::Present {
            let c = last.unwrap();
            s.set_present(&c)?;
            s.set_bounds(c.start, s.min(m.start), s.max(m.start))?;
            s.set_bounds(m.start, s.min(c.start), s.max(c.start))?;
        }
        Ok(())
    }
}

/// `b` present ⇒ some member present with the same start. Several members
/// may be present together.
pub(crate) struct Covered {
    pub b: Iv,
    pub members: Vec<Iv>,
}

impl Propagator for Covered {
    fn name(&self) -> &'static str {
        "covered"
    }

    fn vars(&self) -> Vec<VarId> {
        let mut v = iv_vars(&self.members);
        v.extend([self.b.start, self.b.pres]);
        v
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        let b = self.b;
        if s.presence(&b) == Presence::Absent {
            return Ok(());
        }
        let (blo, bhi) = (s.min(b.start), s.max(b.start));
        let (mut lo, mut hi) = (i64::MAX, i64::MIN);
        let mut open = 0;
        let mut last = None;
        for iv in &self.members {
            if s.presence(iv) == Presence::Absent {
                continue;
            }
            let (a, z) = (s.min(iv.start).max(blo), s.max(iv.start).min(bhi));
            if a > z {
                continue;
            }
            if s.presence(iv) == Presence::Present {
                return Ok(());
            }
            open += 1;
            last = Some(*iv);
            lo = lo.min(a);
            hi = hi.max(z);
        }
        if open == 0 {
            s.set_absent(&b)?;
            return Ok(());
        }
        s.iv_set_start_bounds(&b, lo, hi)?;
        if open == 1 && s.presence(&b) == Presence::Present {
            s.set_present(&last.unwrap())?;
        }
        Ok(())
    }
}

/// Both present ⇒ equal starts. No presence coupling.
pub(crate) struct Synchronize {
    pub a: Iv,
    pub b: Iv,
}

impl Propagator for Synchronize {
    fn name(&self) -> &'static str {
        "synchronize"
    }

    fn vars(&self) -> Vec<VarId> {
        iv_vars(&[self.a, self.b])
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        let (a, b) = (self.a, self.b);
        let (pa, pb) = (s.presence(&a), s.presence(&b));
        if pa == Presence::Absent || pb == Presence::Absent {
            return Ok(());
        }
        if pa == Presence::Present {
            s.iv_set_start_bounds(&b, s.min(a.start), s.max(a.start))?;
        }
        if pb == Presence::Present {
            s.iv_set_start_bounds(&a, s.min(b.start), s.max(b.start))?;
            if pa == Presence::Present {
                s.set_bounds(b.start, s.min(a.start), s.max(a.start))?;
            }
        }
        Ok(())
    }
}

/// `a` present ⇒ `b` present with the same start. Unlike a plain
/// synchronization plus presence implication, an undecided `a` is confined
/// to the window of `b` right away.
pub(crate) struct Within {
    pub a: Iv,
    pub b: Iv,
}

impl Propagator for Within {
    fn name(&self) -> &'static str {
        "within"
    }

    fn vars(&self) -> Vec<VarId> {
        iv_vars(&[self.a, self.b])
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        let (a, b) = (self.a, self.b);
        if s.presence(&b) == Presence::Absent {
            s.set_absent(&a)?;
            return Ok(());
        }
        s.iv_set_start_bounds(&a, s.min(b.start), s.max(b.start))?;
        if s.presence(&a) == Presence::Present {
            s.set_present(&b)?;
            loop {
                let changed = s.set_bounds(b.start, s.min(a.start), s.max(a.start))?
                    | s.set_bounds(a.start, s.min(b.start), s.max(b.start))?;
                if !changed {
                    break;
                }
            }
        }
        Ok(())
    }
}

/// Both present ⇒ `start(a) ≤ start(b)`.
pub(crate) struct StartBeforeStart {
    pub a: Iv,
    pub b: Iv,
}

impl Propagator for StartBeforeStart {
    fn name(&self) -> &'static str {
        "start_before_start"
    }

    fn vars(&self) -> Vec<VarId> {
        iv_vars(&[self.a, self.b])
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        let (a, b) = (self.a, self.b);
        let (pa, pb) = (s.presence(&a), s.presence(&b));
        if pa == Presence::Absent || pb == Presence::Absent {
            return Ok(());
        }
        if pa == Presence::Present {
            s.iv_set_est(&b, s.est(&a))?;
        }
        if pb == Presence::Present {
            s.iv_set_lst(&a, s.lst(&b))?;
        }
        Ok(())
    }
}

/// Present intervals are pairwise disjoint in time.
///
/// Pairwise disjunctive reasoning: when only one order of a pair remains
/// possible, the bounds of both are pushed accordingly. An optional interval
/// only receives the pushes that hold if it is present.
pub(crate) struct NoOverlap {
    pub ivs: Vec<Iv>,
    live: Vec<usize>,
    windows: Vec<(i64, i64, i64)>,
}

impl NoOverlap {
    pub fn new(ivs: Vec<Iv>) -> Self {
        NoOverlap {
            ivs,
            live: Vec::new(),
            windows: Vec::new(),
        }
    }

    /// Overload check: the present intervals confined to any window
    /// `[est_a, lct_b)` must fit into it.
    fn overload(&mut self, s: &Store) -> PResult {
        self.windows.clear();
        for iv in &self.ivs {
            if iv.dur > 0 && s.presence(iv) == Presence::Present {
                self.windows.push((s.est(iv), s.lst(iv) + iv.dur, iv.dur));
            }
        }
        if self.windows.len() < 2 {
            return Ok(());
        }
        // by est, descending
        self.windows
            .sort_unstable_by_key(|w| std::cmp::Reverse(w.0));
        for &(_, lct, _) in &self.windows {
            let mut load = 0;
            for &(est, l, d) in &self.windows {
                if l <= lct {
                    load += d;
                    if est + load > lct {
                        return Err(Fail);
                    }
                }
            }
        }
        Ok(())
    }
}

impl Propagator for NoOverlap {
    fn name(&self) -> &'static str {
        "no_overlap"
    }

    fn vars(&self) -> Vec<VarId> {
        iv_vars(&self.ivs)
    }

    fn priority(&self) -> Priority {
        Priority::Slow
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        self.overload(s)?;
        loop {
            self.live.clear();
            for (k, iv) in self.ivs.iter().enumerate() {
                if s.presence(iv) != Presence::Absent && iv.dur > 0 {
                    self.live.push(k);
                }
            }
            let mut changed = false;
            for x in 0..self.live.len() {
                for y in (x + 1)..self.live.len() {
                    let (i, j) = (self.ivs[self.live[x]], self.ivs[self.live[y]]);
                    let (pi, pj) = (s.presence(&i), s.presence(&j));
                    if pi == Presence::Absent || pj == Presence::Absent {
                        continue;
                    }
                    if pi == Presence::Unknown && pj == Presence::Unknown {
                        continue;
                    }
                    let i_first = s.est(&i) + i.dur <= s.lst(&j);
                    let j_first = s.est(&j) + j.dur <= s.lst(&i);
                    match (i_first, j_first) {
                        (true, true) => {}
                        (false, false) => {
                            changed = true;
                            if pi == Presence::Present && pj == Presence::Present {
                                return Err(Fail);
                            } else if pi == Presence::Present {
                                s.set_absent(&j)?;
                            } else {
                                s.set_absent(&i)?;
                            }
                        }
                        (true, false) => changed |= order(s, &i, pi, &j, pj)?,
                        (false, true) => changed |= order(s, &j, pj, &i, pi)?,
                    }
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }
}

/// Enforces `first` before `second` (at least one of them is present).
fn order(s: &mut Store, first: &Iv, pf: Presence, second: &Iv, ps: Presence) -> PResult<bool> {
    let mut changed = false;
    if pf == Presence::Present {
        changed |= s.iv_set_est(second, s.est(first) + first.dur)?;
    }
    if ps == Presence::Present {
        changed |= s.iv_set_lst(first, s.lst(second) - first.dur)?;
    }
    Ok(changed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpcore::propagators::testing::{absent_start, check_sound_with};

    fn iv(s: &mut Store, lo: i64, hi: i64, dur: i64, optional: bool) -> Iv {
        let start = s.new_range(lo, hi);
        let pres = if optional {
            s.new_range(0, 1)
        } else {
            s.new_range(1, 1)
        };
        Iv { start, dur, pres }
    }

    #[test]
    fn no_overlap_tight_window_infeasible() {
        let mut s = Store::new();
        let a = iv(&mut s, 5, 9, 10, false);
        let b = iv(&mut s, 5, 9, 10, false);
        assert!(NoOverlap::new(vec![a, b]).propagate(&mut s).is_err());
    }

    #[test]
    fn no_overlap_ignores_absent_and_accepts_disjoint() {
        let mut s = Store::new();
        let a = iv(&mut s, 5, 5, 10, false);
        let b = iv(&mut s, 15, 15, 10, false);
        let c = iv(&mut s, 5, 5, 10, true);
        s.set_absent(&c).unwrap();
        NoOverlap::new(vec![a, b, c]).propagate(&mut s).unwrap();
    }

    #[test]
    fn within_confines_undecided_member() {
        let mut s = Store::new();
        let a = iv(&mut s, 0, 20, 3, true);
        let b = iv(&mut s, 5, 8, 3, true);
        Within { a, b }.propagate(&mut s).unwrap();
        assert_eq!((s.min(a.start), s.max(a.start)), (5, 8));
        assert_eq!(s.presence(&b), Presence::Unknown);
        let c = iv(&mut s, 10, 20, 3, true);
        Within { a: c, b }.propagate(&mut s).unwrap();
        assert_eq!(s.presence(&c), Presence::Absent);
    }

    #[test]
    fn within_sound_bruteforce() {
        for (lo, hi, opt_b) in [(0, 3, true), (2, 5, false), (4, 6, true)] {
            let mut s = Store::new();
            let a = iv(&mut s, 1, 4, 2, true);
            let b = iv(&mut s, lo, hi, 2, opt_b);
            let vars = [a.start, a.pres, b.start, b.pres];
            let mut p = Within { a, b };
            check_sound_with(
                &mut s,
                &mut p,
                &vars,
                |t| t[1] == 0 || (t[3] == 1 && t[0] == t[2]),
                absent_start,
            );
        }
    }

    #[test]
    fn covered_sound_bruteforce() {
        for (lo, hi) in [(0, 4), (2, 3), (5, 6)] {
            let mut s = Store::new();
            let b = iv(&mut s, lo, hi, 2, true);
            let m1 = iv(&mut s, 1, 3, 2, true);
            let m2 = iv(&mut s, 3, 5, 2, true);
            let vars = [b.start, b.pres, m1.start, m1.pres, m2.start, m2.pres];
            let mut p = Covered {
                b,
                members: vec![m1, m2],
            };
            check_sound_with(
                &mut s,
                &mut p,
                &vars,
                |t| t[1] == 0 || (t[3] == 1 && t[2] == t[0]) || (t[5] == 1 && t[4] == t[0]),
                absent_start,
            );
        }
    }

    #[test]
    fn covered_batch_waits_for_its_jobs() {
        let mut s = Store::new();
        let b = iv(&mut s, 0, 20, 3, true);
        let m1 = iv(&mut s, 4, 20, 3, true);
        let m2 = iv(&mut s, 6, 20, 3, true);
        let mut p = Covered {
            b,
            members: vec![m1, m2],
        };
        p.propagate(&mut s).unwrap();
        assert_eq!(s.min(b.start), 4);
        s.set_absent(&m1).unwrap();
        s.set_present(&b).unwrap();
        p.propagate(&mut s).unwrap();
        assert_eq!(s.presence(&m2), Presence::Present);
    }

    #[test]
    fn overload_without_pairwise_conflict() {
        // any two fit in [0, 7), all three do not
        let mut s = Store::new();
        let ivs: Vec<Iv> = (0..3).map(|_| iv(&mut s, 0, 4, 3, false)).collect();
        assert!(NoOverlap::new(ivs).propagate(&mut s).is_err());
    }

    #[test]
    fn no_overlap_forces_optional_absent() {
        let mut s = Store::new();
        let a = iv(&mut s, 0, 2, 10, false);
        let b = iv(&mut s, 3, 5, 10, true);
        NoOverlap::new(vec![a, b]).propagate(&mut s).unwrap();
        assert_eq!(s.presence(&b), Presence::Absent);
    }

    #[test]
    fn no_overlap_sound_bruteforce() {
        for (lo2, hi2) in [(0, 6), (2, 4), (3, 3)] {
            let mut s = Store::new();
            let a = iv(&mut s, 0, 4, 3, false);
            let b = iv(&mut s, lo2, hi2, 2, true);
            let c = iv(&mut s, 1, 6, 2, true);
            let all = [a, b, c];
            let vars: Vec<VarId> = all.iter().flat_map(|i| [i.start, i.pres]).collect();
            let mut p = NoOverlap::new(all.to_vec());
            check_sound_with(
                &mut s,
                &mut p,
                &vars,
                |t| {
                    let ivs: Vec<(i64, i64, bool)> = all
                        .iter()
                        .enumerate()
                        .map(|(k, i)| (t[2 * k], i.dur, t[2 * k + 1] == 1))
                        .collect();
                    ivs.iter().enumerate().all(|(x, p)| {
                        ivs[x + 1..]
                            .iter()
                            .all(|q| !(p.2 && q.2) || p.0 + p.1 <= q.0 || q.0 + q.1 <= p.0)
                    })
                },
                absent_start,
            );
        }
    }

    #[test]
    fn alternative_cases() {
        let mut s = Store::new();
        let m = iv(&mut s, 0, 20, 5, false);
        let a = iv(&mut s, 0, 20, 5, true);
        let b = iv(&mut s, 0, 20, 5, true);
        s.set_present(&a).unwrap();
        s.fix(a.start, 7).unwrap();
        Alternative {
            master: m,
            members: vec![a, b],
        }
        .propagate(&mut s)
        .unwrap();
        assert_eq!((s.min(m.start), s.max(m.start)), (7, 7));
        assert_eq!(s.presence(&b), Presence::Absent);

        let mut s = Store::new();
        let m = iv(&mut s, 0, 20, 5, true);
        let a = iv(&mut s, 0, 20, 5, true);
        s.set_absent(&m).unwrap();
        Alternative {
            master: m,
            members: vec![a],
        }
        .propagate(&mut s)
        .unwrap();
        assert_eq!(s.presence(&a), Presence::Absent);

        let mut s = Store::new();
        let m = iv(&mut s, 0, 20, 5, false);
        let a = iv(&mut s, 0, 20, 5, true);
        let b = iv(&mut s, 0, 20, 5, true);
        s.set_absent(&a).unwrap();
        s.set_absent(&b).unwrap();
        assert!(Alternative {
            master: m,
            members: vec![a, b]
        }
        .propagate(&mut s)
        .is_err());
    }

    #[test]
    fn alternative_sound_bruteforce() {
        let mut s = Store::new();
        let m = iv(&mut s, 1, 4, 2, true);
        let a = iv(&mut s, 0, 2, 2, true);
        let b = iv(&mut s, 3, 5, 2, true);
        let vars = [m.start, m.pres, a.start, a.pres, b.start, b.pres];
        let mut p = Alternative {
            master: m,
            members: vec![a, b],
        };
        check_sound_with(
            &mut s,
            &mut p,
            &vars,
            |t| {
                let members = [(t[2], t[3]), (t[4], t[5])];
                let present: Vec<_> = members.iter().filter(|x| x.1 == 1).collect();
                if t[1] == 0 {
                    present.is_empty()
                } else {
                    present.len() == 1 && present[0].0 == t[0]
                }
            },
            absent_start,
        );
    }

    #[test]
    fn synchronize_cases() {
        let mut s = Store::new();
        let a = iv(&mut s, 0, 30, 10, true);
        let b = iv(&mut s, 0, 30, 10, true);
        s.set_present(&a).unwrap();
        s.set_present(&b).unwrap();
        s.fix(b.start, 15).unwrap();
        Synchronize { a, b }.propagate(&mut s).unwrap();
        assert!(s.is_fixed(a.start) && s.min(a.start) == 15);

        let mut s = Store::new();
        let a = iv(&mut s, 0, 30, 10, true);
        let b = iv(&mut s, 4, 6, 10, true);
        s.set_absent(&a).unwrap();
        s.fix(a.start, 0).unwrap();
        Synchronize { a, b }.propagate(&mut s).unwrap();
        assert_eq!((s.min(b.start), s.max(b.start)), (4, 6));
        assert_eq!(s.presence(&b), Presence::Unknown);

        let mut s = Store::new();
        let a = iv(&mut s, 0, 3, 10, false);
        let b = iv(&mut s, 4, 6, 10, false);
        assert!(Synchronize { a, b }.propagate(&mut s).is_err());
    }

    #[test]
    fn start_before_start_cases() {
        let mut s = Store::new();
        let a = iv(&mut s, 10, 20, 3, false);
        let b = iv(&mut s, 0, 15, 3, false);
        StartBeforeStart { a, b }.propagate(&mut s).unwrap();
        assert_eq!((s.min(b.start), s.max(a.start)), (10, 15));

        let mut s = Store::new();
        let a = iv(&mut s, 10, 20, 3, true);
        let b = iv(&mut s, 0, 5, 3, false);
        s.set_absent(&a).unwrap();
        StartBeforeStart { a, b }.propagate(&mut s).unwrap();
        assert_eq!(s.min(b.start), 0);

        let mut s = Store::new();
        let a = iv(&mut s, 10, 20, 3, false);
        let b = iv(&mut s, 0, 5, 3, false);
        assert!(StartBeforeStart { a, b }.propagate(&mut s).is_err());
    }
}
