//! Literal-conditioned links between variables and interval starts.

use super::Propagator;
use crate::cpcore::store::{Fail, Iv, PResult, Presence, Store};
use crate::cpcore::VarId;

/// `out = if lit { x } else { else_value }`.
pub(crate) struct CondValue {
    pub lit: VarId,
    pub x: VarId,
    pub else_value: i64,
    pub out: VarId,
}

impl CondValue {
    fn equate(&self, s: &mut Store) -> PResult {
        let (x, out) = (self.x, self.out);
        loop {
            let mut changed = s.set_bounds(out, s.min(x), s.max(x))?;
            changed |= s.set_bounds(x, s.min(out), s.max(out))?;
            if !changed {
                return Ok(());
            }
        }
    }
}

impl Propagator for CondValue {
    fn name(&self) -> &'static str {
        "cond_value"
    }

    fn vars(&self) -> Vec<VarId> {
        vec![self.lit, self.x, self.out]
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        let (lit, x, out, e) = (self.lit, self.x, self.out, self.else_value);
        if s.is_false(lit) {
            s.fix(out, e)?;
            return Ok(());
        }
        if s.is_true(lit) {
            return self.equate(s);
        }
        if !s.contains(out, e) {
            s.set_min(lit, 1)?;
            return self.equate(s);
        }
        if !s.intersects(out, s.min(x), s.max(x)) {
            s.set_max(lit, 0)?;
            s.fix(out, e)?;
            return Ok(());
        }
        let lo = s.min(x).min(e);
        let hi = s.max(x).max(e);
        s.set_bounds(out, lo, hi)?;
        if s.is_sparse(out) {
            let (xl, xh) = (s.min(x), s.max(x));
            // values strictly between the else value and the range of x
            s.retain(out, |v| v == e || (xl..=xh).contains(&v))?;
        }
        Ok(())
    }
}

/// One candidate source for [`EndOfSelected`]: if `lit` holds, the target
/// equals `start + offset`. `lit` must imply presence of the interval that
/// owns `start`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SelectOption {
    pub lit: VarId,
    pub start: VarId,
    pub offset: i64,
}

/// `target = start_k + offset_k` for every option whose literal is true, and
/// at least one literal is true.
pub(crate) struct EndOfSelected {
    pub target: VarId,
    pub options: Vec<SelectOption>,
}

impl Propagator for EndOfSelected {
    fn name(&self) -> &'static str {
        "end_of_selected"
    }

    fn vars(&self) -> Vec<VarId> {
        let mut v: Vec<VarId> = self.options.iter().flat_map(|o| [o.lit, o.start]).collect();
        v.push(self.target);
        v
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        let t = self.target;
        if let Some(o) = self.options.iter().find(|o| s.is_true(o.lit)) {
            loop {
                let mut changed =
                    s.set_bounds(t, s.min(o.start) + o.offset, s.max(o.start) + o.offset)?;
                changed |= s.set_bounds(o.start, s.min(t) - o.offset, s.max(t) - o.offset)?;
                if !changed {
                    return Ok(());
                }
            }
        }
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for o in &self.options {
            if s.is_false(o.lit) {
                continue;
            }
            let (a, b) = (s.min(o.start) + o.offset, s.max(o.start) + o.offset);
            if b < s.min(t) || a > s.max(t) {
                s.set_max(o.lit, 0)?;
                continue;
            }
            lo = lo.min(a);
            hi = hi.max(b);
        }
        if lo > hi {
            return Err(Fail);
        }
        s.set_bounds(t, lo, hi)?;
        Ok(())
    }
}

/// `lit ⇒ startOf(iv) ≥ r`, where an absent interval starts at 0.
pub(crate) struct LitImpliesStartGe {
    pub lit: VarId,
    pub iv: Iv,
    pub r: i64,
}

impl Propagator for LitImpliesStartGe {
    fn name(&self) -> &'static str {
        "lit_implies_start_ge"
    }

    fn vars(&self) -> Vec<VarId> {
        vec![self.lit, self.iv.start, self.iv.pres]
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        if self.r <= 0 {
            return Ok(());
        }
        let iv = self.iv;
        if s.is_true(self.lit) {
            s.set_present(&iv)?;
            s.set_min(iv.start, self.r)?;
        } else if s.presence(&iv) == Presence::Absent || s.lst(&iv) < self.r {
            s.set_max(self.lit, 0)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpcore::propagators::testing::check_sound;

    #[test]
    fn cond_value_sound() {
        for e in [0i64, 2, 9] {
            let mut s = Store::new();
            let lit = s.new_range(0, 1);
            let x = s.new_range(1, 4);
            let out = s.new_sparse(&[0, 2, 5, 9]);
            let mut p = CondValue {
                lit,
                x,
                else_value: e,
                out,
            };
            check_sound(&mut s, &mut p, &[lit, x, out], |t| {
                if t[0] == 1 {
                    t[2] == t[1]
                } else {
                    t[2] == e
                }
            });
        }
    }

    #[test]
    fn cond_value_forces_literal() {
        let mut s = Store::new();
        let lit = s.new_range(0, 1);
        let x = s.new_range(3, 8);
        let out = s.new_sparse(&[3, 4, 53]);
        s.remove(out, 53).unwrap();
        CondValue {
            lit,
            x,
            else_value: 53,
            out,
        }
        .propagate(&mut s)
        .unwrap();
        assert!(s.is_true(lit));
        assert_eq!(s.max(x), 4);
    }

    #[test]
    fn end_of_selected_sound() {
        for lo in 0..3 {
            let mut s = Store::new();
            let l1 = s.new_range(0, 1);
            let l2 = s.new_range(0, 1);
            let a = s.new_range(lo, 4);
            let b = s.new_range(2, 3);
            let t = s.new_range(5, 9);
            let mut p = EndOfSelected {
                target: t,
                options: vec![
                    SelectOption {
                        lit: l1,
                        start: a,
                        offset: 3,
                    },
                    SelectOption {
                        lit: l2,
                        start: b,
                        offset: 5,
                    },
                ],
            };
            check_sound(&mut s, &mut p, &[l1, l2, a, b, t], |v| {
                (v[0] == 1 || v[1] == 1)
                    && (v[0] == 0 || v[4] == v[2] + 3)
                    && (v[1] == 0 || v[4] == v[3] + 5)
            });
        }
    }

    #[test]
    fn end_of_selected_all_false_fails() {
        let mut s = Store::new();
        let l = s.new_range(0, 0);
        let a = s.new_range(0, 4);
        let t = s.new_range(0, 9);
        let mut p = EndOfSelected {
            target: t,
            options: vec![SelectOption {
                lit: l,
                start: a,
                offset: 1,
            }],
        };
        assert!(p.propagate(&mut s).is_err());
    }

    #[test]
    fn release_link() {
        let mut s = Store::new();
        let lit = s.new_range(0, 1);
        let start = s.new_range(0, 20);
        let pres = s.new_range(0, 1);
        let iv = Iv {
            start,
            dur: 10,
            pres,
        };
        s.fix(lit, 1).unwrap();
        LitImpliesStartGe { lit, iv, r: 5 }
            .propagate(&mut s)
            .unwrap();
        assert_eq!(s.min(start), 5);
        assert!(s.is_true(pres));

        let lit2 = s.new_range(0, 1);
        s.set_max(start, 6).unwrap();
        LitImpliesStartGe {
            lit: lit2,
            iv,
            r: 7,
        }
        .propagate(&mut s)
        .unwrap();
        assert!(s.is_false(lit2));
    }
}
