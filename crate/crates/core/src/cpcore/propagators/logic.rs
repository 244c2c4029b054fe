use super::{div_ceil, div_floor, Propagator};
use crate::cpcore::store::{Fail, PResult, Store};
use crate::cpcore::VarId;

/// Exactly one literal is true.
pub(crate) struct ExactlyOne {
    pub lits: Vec<VarId>,
}

impl Propagator for ExactlyOne {
    fn name(&self) -> &'static str {
        "exactly_one"
    }

    fn vars(&self) -> Vec<VarId> {
        self.lits.clone()
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        let mut chosen = None;
        let mut open = None;
        let mut open_count = 0;
        for &l in &self.lits {
            if s.is_true(l) {
                if chosen.is_some() {
                    return Err(Fail);
                }
                chosen = Some(l);
            } else if !s.is_false(l) {
                open_count += 1;
                open = Some(l);
            }
        }
        if let Some(c) = chosen {
            for &l in &self.lits {
                if l != c {
                    s.set_max(l, 0)?;
                }
            }
        } else if open_count == 0 {
            return Err(Fail);
        } else if open_count == 1 {
            s.set_min(open.unwrap(), 1)?;
        }
        Ok(())
    }
}

/// `a ⇒ b` over booleans.
pub(crate) struct Implies {
    pub a: VarId,
    pub b: VarId,
}

impl Propagator for Implies {
    fn name(&self) -> &'static str {
        "implies"
    }

    fn vars(&self) -> Vec<VarId> {
        vec![self.a, self.b]
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        if s.is_true(self.a) {
            s.set_min(self.b, 1)?;
        }
        if s.is_false(self.b) {
            s.set_max(self.a, 0)?;
        }
        Ok(())
    }
}

/// `Σ coef_i · x_i ≤ rhs` with bounds filtering.
pub(crate) struct LinearLe {
    pub terms: Vec<(i64, VarId)>,
    pub rhs: i64,
}

impl Propagator for LinearLe {
    fn name(&self) -> &'static str {
        "linear_le"
    }

    fn vars(&self) -> Vec<VarId> {
        self.terms.iter().map(|t| t.1).collect()
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        let low = |s: &Store, a: i64, x: VarId| if a > 0 { a * s.min(x) } else { a * s.max(x) };
        let min_sum: i64 = self.terms.iter().map(|&(a, x)| low(s, a, x)).sum();
        if min_sum > self.rhs {
            return Err(Fail);
        }
        for &(a, x) in &self.terms {
            let slack = self.rhs - (min_sum - low(s, a, x));
            if a > 0 {
                s.set_max(x, div_floor(slack, a))?;
            } else {
                s.set_min(x, div_ceil(slack, a))?;
            }
        }
        Ok(())
    }
}
