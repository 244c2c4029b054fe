use super::Propagator;
use crate::cpcore::store::{Fail, PResult, Store};
use crate::cpcore::VarId;

/// Domains this small are compared value by value; larger ones by bounds.
const EXACT_LIMIT: u64 = 16;

/// `array[index] = value` over an array of variables.
pub(crate) struct Element {
    pub index: VarId,
    pub array: Vec<VarId>,
    pub value: VarId,
    idx_buf: Vec<i64>,
    val_buf: Vec<i64>,
}

impl Element {
    pub fn new(index: VarId, array: Vec<VarId>, value: VarId) -> Self {
        Element {
            index,
            array,
            value,
            idx_buf: Vec::new(),
            val_buf: Vec::new(),
        }
    }
}

/// Whether domains of `a` and `b` share a value; `b_vals` holds the values of
/// `b` when it is small enough to enumerate.
fn meets(s: &Store, a: VarId, b: VarId, b_vals: Option<&[i64]>) -> bool {
    match b_vals {
        Some(vals) => vals.iter().any(|&x| s.contains(a, x)),
        None => s.intersects(a, s.min(b), s.max(b)) && s.intersects(b, s.min(a), s.max(a)),
    }
}

/// Makes `a` and `b` equal as far as bounds and small domains allow.
fn channel(s: &mut Store, a: VarId, b: VarId) -> PResult {
    loop {
        let mut changed = s.set_bounds(a, s.min(b), s.max(b))?;
        changed |= s.set_bounds(b, s.min(a), s.max(a))?;
        for (x, y) in [(a, b), (b, a)] {
            if s.is_sparse(x) && s.size(x) <= EXACT_LIMIT {
                let mut vals = Vec::new();
                s.values_into(x, &mut vals);
                for v in vals {
                    if !s.contains(y, v) {
                        changed |= s.remove(x, v)?;
                    }
                }
            }
        }
        if !changed {
            return Ok(());
        }
    }
}

impl Propagator for Element {
    fn name(&self) -> &'static str {
        "element"
    }

    fn vars(&self) -> Vec<VarId> {
        let mut v = self.array.clone();
        v.extend([self.index, self.value]);
        v
    }

    fn propagate(&mut self, s: &mut Store) -> PResult {
        let n = self.array.len() as i64;
        s.set_bounds(self.index, 0, n - 1)?;

        self.val_buf.clear();
        let small = s.size(self.value) <= EXACT_LIMIT;
        if small {
            s.values_into(self.value, &mut self.val_buf);
        }
        self.idx_buf.clear();
        s.values_into(self.index, &mut self.idx_buf);
        let val_vals = small.then_some(self.val_buf.as_slice());
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for &i in &self.idx_buf {
            let cell = self.array[i as usize];
            if meets(s, cell, self.value, val_vals) {
                lo = lo.min(s.min(cell));
                hi = hi.max(s.max(cell));
            } else {
                s.remove(self.index, i)?;
            }
        }
        if lo > hi {
            return Err(Fail);
        }
        s.set_bounds(self.value, lo, hi)?;

        if s.is_fixed(self.index) {
            return channel(s, self.array[s.min(self.index) as usize], self.value);
        }
        if small {
            // drop values no remaining cell can take
            self.idx_buf.clear();
            s.values_into(self.index, &mut self.idx_buf);
            for k in 0..self.val_buf.len() {
                let x = self.val_buf[k];
                if s.contains(self.value, x)
                    && !self
                        .idx_buf
                        .iter()
                        .any(|&i| s.contains(self.array[i as usize], x))
                {
                    s.remove(self.value, x)?;
                }
            }
        }
        Ok(())
    }
}
