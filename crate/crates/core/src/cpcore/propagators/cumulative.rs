//! Time-table filtering for the cumulative resource.

use super::{Priority, Propagator};
use crate::cpcore::store::{Fail, Iv, PResult, Presence, Store};
use crate::cpcore::VarId;

pub(crate) struct Cumulative {
    pub ivs: Vec<Iv>,
    pub demands: Vec<i64>,
    pub capacity: i64,
    // scratch
    events: Vec<(i64, i64)>,
    segments: Vec<(i64, i64, i64)>,
}

impl Cumulative {
    pub fn new(ivs: Vec<Iv>, demands: Vec<i64>, capacity: i64) -> Self {
        Cumulative {
            ivs,
            demands,
            capacity,
            events: Vec::new(),
            segments: Vec::new(),
        }
    }

    /// Profile of compulsory parts of present intervals as
    /// `(from, to, height)` segments with positive height.
    fn build_profile(&mut self, s: &Store) -> PResult {
        self.events.clear();
        for (iv, &d) in self.ivs.iter().zip(&self.demands) {
            if d == 0 || iv.dur == 0 || s.presence(iv) != Presence::Present {
                continue;
            }
            let (from, to) = (s.lst(iv), s.est(iv) + iv.dur);
            if from < to {
                self.events.push((from, d));
                self.events.push((to, -d));
            }
        }
        self.events.sort_unstable();
        self.segments.clear();
        let mut height = 0;
        let mut k = 0;
        while k < self.events.len() {
            let t = self.events[k].0;
            while k < self.events.len() && self.events[k].0 == t {
                height += self.events[k].1;
                k += 1;
            }
            if height > self.capacity {
                return Err(Fail);
            }
            if height > 0 && k < self.events.len() {
                self.segments.push((t, self.events[k].0, height));
            }
        }
        Ok(())
    }
}

impl Propagator for Cumulative {
    fn name(&self) -> &'static str {
        "cumulative"
    }

    fn vars(&self) -> Vec<VarId> {
        self.ivs.iter().flat_map(|i| [i.start, i.pres]).collect()
    }

    fn priority(&self) -> Priority {
        Priority::Slow
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        for (iv, &d) in self.ivs.iter().zip(&self.demands) {
            if d > self.capacity {
                s.set_absent(iv)?;
            }
        }
        self.build_profile(s)?;
        if self.segments.is_empty() {
            return Ok(());
        }
        for k in 0..self.ivs.len() {
            let (iv, d) = (self.ivs[k], self.demands[k]);
            let p = s.presence(&iv);
            if d == 0
                || iv.dur == 0
                || p == Presence::Absent
                || s.is_fixed(iv.start) && p == Presence::Present
            {
                continue;
            }
            let (est, lst) = (s.est(&iv), s.lst(&iv));
            // own compulsory part, already counted in the profile
            let own = if p == Presence::Present && lst < est + iv.dur {
                (lst, est + iv.dur)
            } else {
                (0, 0)
            };
            let conflicts = |seg: &(i64, i64, i64)| {
                let self_load = if seg.0 >= own.0 && seg.1 <= own.1 {
                    d
                } else {
                    0
                };
                seg.2 - self_load + d > self.capacity
            };

            let mut lo = est;
            loop {
                let hit = self
                    .segments
                    .iter()
                    .find(|g| g.0 < lo + iv.dur && lo < g.1 && conflicts(g));
                match hit {
                    Some(g) => lo = g.1,
                    None => break,
                }
                if lo > lst {
                    break;
                }
            }
            if lo > lst {
                match p {
                    Presence::Present => return Err(Fail),
                    _ => {
                        s.set_absent(&iv)?;
                        continue;
                    }
                }
            }
            let mut hi = lst;
            loop {
                let hit = self
                    .segments
                    .iter()
                    .rev()
                    .find(|g| g.0 < hi + iv.dur && hi < g.1 && conflicts(g));
                match hit {
                    Some(g) => hi = g.0 - iv.dur,
                    None => break,
                }
                if hi < lo {
                    break;
                }
            }
            if hi < lo {
                match p {
                    Presence::Present => return Err(Fail),
                    _ => {
                        s.set_absent(&iv)?;
                        continue;
                    }
                }
            }
            s.iv_set_start_bounds(&iv, lo, hi)?;
        }
        Ok(())
    }
}
