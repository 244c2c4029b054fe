//! Links the objective variable to its terms, in both directions.

use super::{div_floor, Propagator};
use crate::cpcore::store::{Fail, Iv, PResult, Presence, Store};
use crate::cpcore::VarId;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Term {
    Var(VarId),
    /// End of the interval when present, 0 when absent.
    EndOrZero(Iv),
}

impl Term {
    fn bounds(&self, s: &Store) -> (i64, i64) {
        match self {
            Term::Var(v) => (s.min(*v), s.max(*v)),
            Term::EndOrZero(iv) => match s.presence(iv) {
                Presence::Absent => (0, 0),
                Presence::Present => (s.est(iv) + iv.dur, s.lst(iv) + iv.dur),
                Presence::Unknown => (0, s.lst(iv) + iv.dur),
            },
        }
    }

    fn set_max(&self, s: &mut Store, x: i64) -> PResult {
        match self {
            Term::Var(v) => {
                s.set_max(*v, x)?;
            }
            Term::EndOrZero(iv) => {
                if x < 0 {
                    return Err(Fail);
                }
                if s.presence(iv) != Presence::Absent {
                    s.iv_set_lst(iv, x - iv.dur)?;
                }
            }
        }
        Ok(())
    }
}

/// `obj = Σ c_i · e_i` when `sum`, else `obj = max(0, max_i c_i · e_i)`.
pub(crate) struct ObjectiveLink {
    pub obj: VarId,
    pub sum: bool,
    pub terms: Vec<(i64, Term)>,
    bounds: Vec<(i64, i64)>,
}

impl ObjectiveLink {
    pub fn new(obj: VarId, sum: bool, terms: Vec<(i64, Term)>) -> Self {
        ObjectiveLink {
            obj,
            sum,
            terms,
            bounds: Vec::new(),
        }
    }
}

impl Propagator for ObjectiveLink {
    fn name(&self) -> &'static str {
        "objective"
    }

    fn vars(&self) -> Vec<VarId> {
        let mut v: Vec<VarId> = self
            .terms
            .iter()
            .flat_map(|(_, t)| match t {
                Term::Var(v) => vec![*v],
                Term::EndOrZero(iv) => vec![iv.start, iv.pres],
            })
            .collect();
        v.push(self.obj);
        v
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        self.bounds.clear();
        self.bounds
            .extend(self.terms.iter().map(|(_, t)| t.bounds(s)));
        if self.sum {
            let lo: i64 = self
                .terms
                .iter()
                .zip(&self.bounds)
                .map(|((c, _), b)| c * b.0)
                .sum();
            let hi: i64 = self
                .terms
                .iter()
                .zip(&self.bounds)
                .map(|((c, _), b)| c * b.1)
                .sum();
            s.set_bounds(self.obj, lo, hi)?;
            let cap = s.max(self.obj);
            for ((c, t), b) in self.terms.iter().zip(&self.bounds) {
                if *c > 0 {
                    let slack = cap - (lo - c * b.0);
                    t.set_max(s, div_floor(slack, *c))?;
                }
            }
        } else {
            let scaled = self
                .terms
                .iter()
                .zip(&self.bounds)
                .map(|((c, _), b)| (c * b.0, c * b.1));
            let (lo, hi) = scaled.fold((0, 0), |acc, b| (acc.0.max(b.0), acc.1.max(b.1)));
            s.set_bounds(self.obj, lo, hi)?;
            let cap = s.max(self.obj);
            for (c, t) in &self.terms {
                if *c > 0 {
                    t.set_max(s, div_floor(cap, *c))?;
                }
            }
        }
        Ok(())
    }
}
