//! Trailed integer domains.
//!
//! A domain is either a plain range `[min, max]` (interior removals are
//! ignored) or a sparse set over a bounded universe that supports arbitrary
//! value removal. Both restore in O(1) per trailed entry: a sparse set keeps
//! removed values past `size`, so resetting `size` brings them back.

use super::VarId;

/// Signals that a domain became empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Fail;

pub(crate) type PResult<T = ()> = Result<T, Fail>;

#[derive(Debug, Clone)]
struct Sparse {
    offset: i64,
    vals: Vec<u32>,
    pos: Vec<u32>,
}

#[derive(Debug, Clone)]
struct Dom {
    min: i64,
    max: i64,
    size: u64,
    sparse: Option<Box<Sparse>>,
}

#[derive(Debug, Clone, Copy)]
struct Saved {
    var: u32,
    min: i64,
    max: i64,
    size: u64,
}

/// Fixed-duration interval as seen by propagators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Iv {
    pub start: VarId,
    pub dur: i64,
    pub pres: VarId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Presence {
    Present,
    Absent,
    Unknown,
}

#[derive(Debug, Default)]
pub(crate) struct Store {
    doms: Vec<Dom>,
    trail: Vec<Saved>,
    stamp: Vec<u64>,
    level_id: u64,
    next_level_id: u64,
    marks: Vec<usize>,
    modified: Vec<u32>,
    is_modified: Vec<bool>,
}

impl Store {
    pub fn new() -> Self {
        Store {
            next_level_id: 1,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.doms.len()
    }

    fn push_dom(&mut self, d: Dom) -> VarId {
        self.doms.push(d);
        self.stamp.push(u64::MAX);
        self.is_modified.push(false);
        VarId(self.doms.len() as u32 - 1)
    }

    pub fn new_range(&mut self, lo: i64, hi: i64) -> VarId {
        debug_assert!(lo <= hi);
        self.push_dom(Dom {
            min: lo,
            max: hi,
            size: (hi - lo) as u64 + 1,
            sparse: None,
        })
    }

    /// Sparse domain over the given values (need not be sorted or unique).
    pub fn new_sparse(&mut self, values: &[i64]) -> VarId {
        let lo = *values.iter().min().expect("non-empty");
        let hi = *values.iter().max().expect("non-empty");
        let width = (hi - lo + 1) as usize;
        let mut present = vec![false; width];
        for &v in values {
            present[(v - lo) as usize] = true;
        }
        let mut vals = Vec::with_capacity(width);
        let mut pos = vec![u32::MAX; width];
        for (i, _) in present.iter().enumerate().filter(|(_, &p)| p) {
            pos[i] = vals.len() as u32;
            vals.push(i as u32);
        }
        let size = vals.len() as u64;
        // values outside the set sit after `size` and never return
        for (i, p) in present.iter().enumerate() {
            if !p {
                pos[i] = vals.len() as u32;
                vals.push(i as u32);
            }
        }
        self.push_dom(Dom {
            min: lo,
            max: hi,
            size,
            sparse: Some(Box::new(Sparse {
                offset: lo,
                vals,
                pos,
            })),
        })
    }

    // ---- levels -----------------------------------------------------------

    pub fn push_level(&mut self) {
        self.marks.push(self.trail.len());
        self.level_id = self.next_level_id;
        self.next_level_id += 1;
    }

    pub fn pop_level(&mut self) {
        let mark = self.marks.pop().expect("level to pop");
        while self.trail.len() > mark {
            let s = self.trail.pop().unwrap();
            let d = &mut self.doms[s.var as usize];
            d.min = s.min;
            d.max = s.max;
            d.size = s.size;
        }
        self.level_id = self.next_level_id;
        self.next_level_id += 1;
    }

    fn save(&mut self, v: VarId) {
        let i = v.0 as usize;
        if self.stamp[i] != self.level_id {
            self.stamp[i] = self.level_id;
            let d = &self.doms[i];
            self.trail.push(Saved {
                var: v.0,
                min: d.min,
                max: d.max,
                size: d.size,
            });
        }
        if !self.is_modified[i] {
            self.is_modified[i] = true;
            self.modified.push(v.0);
        }
    }

    pub fn take_modified(&mut self, out: &mut Vec<u32>) {
        for &v in &self.modified {
            self.is_modified[v as usize] = false;
        }
        out.append(&mut self.modified);
    }

    pub fn clear_modified(&mut self) {
        for &v in &self.modified {
            self.is_modified[v as usize] = false;
        }
        self.modified.clear();
    }

    // ---- queries ----------------------------------------------------------

    #[inline]
    pub fn min(&self, v: VarId) -> i64 {
        self.doms[v.0 as usize].min
    }

    #[inline]
    pub fn max(&self, v: VarId) -> i64 {
        self.doms[v.0 as usize].max
    }

    #[inline]
    pub fn size(&self, v: VarId) -> u64 {
        self.doms[v.0 as usize].size
    }

    #[inline]
    pub fn is_fixed(&self, v: VarId) -> bool {
        let d = &self.doms[v.0 as usize];
        d.min == d.max
    }

    pub fn contains(&self, v: VarId, x: i64) -> bool {
        let d = &self.doms[v.0 as usize];
        if x < d.min || x > d.max {
            return false;
        }
        match &d.sparse {
            None => true,
            Some(s) => (s.pos[(x - s.offset) as usize] as u64) < d.size,
        }
    }

    /// Whether any value of `v` lies in `[lo, hi]`.
    pub fn intersects(&self, v: VarId, lo: i64, hi: i64) -> bool {
        let d = &self.doms[v.0 as usize];
        let (a, b) = (lo.max(d.min), hi.min(d.max));
        if a > b {
            return false;
        }
        match &d.sparse {
            None => true,
            Some(s) => {
                if (b - a + 1) as u64 <= d.size {
                    (a..=b).any(|x| (s.pos[(x - s.offset) as usize] as u64) < d.size)
                } else {
                    s.vals[..d.size as usize].iter().any(|&r| {
                        let x = r as i64 + s.offset;
                        x >= a && x <= b
                    })
                }
            }
        }
    }

    /// Appends the current values of `v` (unordered) to `out`.
    pub fn values_into(&self, v: VarId, out: &mut Vec<i64>) {
        let d = &self.doms[v.0 as usize];
        match &d.sparse {
            None => out.extend(d.min..=d.max),
            Some(s) => out.extend(
                s.vals[..d.size as usize]
                    .iter()
                    .map(|&r| r as i64 + s.offset),
            ),
        }
    }

    pub fn same_domain(&self, a: VarId, b: VarId) -> bool {
        let (da, db) = (&self.doms[a.0 as usize], &self.doms[b.0 as usize]);
        if (da.min, da.max, da.size) != (db.min, db.max, db.size) {
            return false;
        }
        if da.size == (da.max - da.min) as u64 + 1 {
            return true;
        }
        let s = da.sparse.as_ref().expect("holes imply a sparse domain");
        s.vals[..da.size as usize]
            .iter()
            .all(|&r| self.contains(b, r as i64 + s.offset))
    }

    pub fn is_sparse(&self, v: VarId) -> bool {
        self.doms[v.0 as usize].sparse.is_some()
    }

    // ---- updates ----------------------------------------------------------

    pub fn set_min(&mut self, v: VarId, x: i64) -> PResult<bool> {
        let i = v.0 as usize;
        let d = &self.doms[i];
        if x <= d.min {
            return Ok(false);
        }
        if x > d.max {
            return Err(Fail);
        }
        self.save(v);
        let d = &mut self.doms[i];
        match d.sparse.as_deref_mut() {
            None => {
                d.min = x;
                d.size = (d.max - x) as u64 + 1;
            }
            Some(s) => {
                let mut size = d.size;
                for y in d.min..x {
                    remove_sparse(s, &mut size, y);
                }
                d.size = size;
                let mut m = x;
                while (s.pos[(m - s.offset) as usize] as u64) >= size {
                    m += 1;
                }
                d.min = m;
            }
        }
        Ok(true)
    }

    pub fn set_max(&mut self, v: VarId, x: i64) -> PResult<bool> {
        let i = v.0 as usize;
        let d = &self.doms[i];
        if x >= d.max {
            return Ok(false);
        }
        if x < d.min {
            return Err(Fail);
        }
        self.save(v);
        let d = &mut self.doms[i];
        match d.sparse.as_deref_mut() {
            None => {
                d.max = x;
                d.size = (x - d.min) as u64 + 1;
            }
            Some(s) => {
                let mut size = d.size;
                for y in (x + 1)..=d.max {
                    remove_sparse(s, &mut size, y);
                }
                d.size = size;
                let mut m = x;
                while (s.pos[(m - s.offset) as usize] as u64) >= size {
                    m -= 1;
                }
                d.max = m;
            }
        }
        Ok(true)
    }

    pub fn set_bounds(&mut self, v: VarId, lo: i64, hi: i64) -> PResult<bool> {
        Ok(self.set_min(v, lo)? | self.set_max(v, hi)?)
    }

    pub fn fix(&mut self, v: VarId, x: i64) -> PResult<bool> {
        if !self.contains(v, x) {
            return Err(Fail);
        }
        self.set_bounds(v, x, x)
    }

    /// Removes one value. Interior removals from range domains are ignored.
    pub fn remove(&mut self, v: VarId, x: i64) -> PResult<bool> {
        let i = v.0 as usize;
        let d = &self.doms[i];
        if x < d.min || x > d.max {
            return Ok(false);
        }
        if d.min == d.max {
            return Err(Fail);
        }
        if x == d.min {
            return self.set_min(v, x + 1);
        }
        if x == d.max {
            return self.set_max(v, x - 1);
        }
        match &d.sparse {
            None => Ok(false),
            Some(s) => {
                if (s.pos[(x - s.offset) as usize] as u64) >= d.size {
                    return Ok(false);
                }
                self.save(v);
                let d = &mut self.doms[i];
                let s = d.sparse.as_deref_mut().unwrap();
                remove_sparse(s, &mut d.size, x);
                Ok(true)
            }
        }
    }

    /// Keeps only the values satisfying `keep`.
    pub fn retain(&mut self, v: VarId, mut keep: impl FnMut(i64) -> bool) -> PResult<bool> {
        if !self.is_sparse(v) {
            let (lo, hi) = (self.min(v), self.max(v));
            let Some(a) = (lo..=hi).find(|&x| keep(x)) else {
                return Err(Fail);
            };
            let b = (a..=hi).rev().find(|&x| keep(x)).unwrap();
            return self.set_bounds(v, a, b);
        }
        let mut buf = Vec::new();
        self.values_into(v, &mut buf);
        let mut changed = false;
        for x in buf {
            if !keep(x) {
                changed |= self.remove(v, x)?;
            }
        }
        Ok(changed)
    }

    // ---- booleans and intervals ------------------------------------------

    #[inline]
    pub fn is_true(&self, v: VarId) -> bool {
        self.min(v) == 1
    }

    #[inline]
    pub fn is_false(&self, v: VarId) -> bool {
        self.max(v) == 0
    }

    #[inline]
    pub fn presence(&self, iv: &Iv) -> Presence {
        if self.is_true(iv.pres) {
            Presence::Present
        } else if self.is_false(iv.pres) {
            Presence::Absent
        } else {
            Presence::Unknown
        }
    }

    #[inline]
    pub fn est(&self, iv: &Iv) -> i64 {
        self.min(iv.start)
    }

    #[inline]
    pub fn lst(&self, iv: &Iv) -> i64 {
        self.max(iv.start)
    }

    pub fn set_absent(&mut self, iv: &Iv) -> PResult<bool> {
        self.set_max(iv.pres, 0)
    }

    pub fn set_present(&mut self, iv: &Iv) -> PResult<bool> {
        self.set_min(iv.pres, 1)
    }

    /// `start >= x` if present; an optional interval that cannot satisfy it
    /// becomes absent.
    pub fn iv_set_est(&mut self, iv: &Iv, x: i64) -> PResult<bool> {
        match self.presence(iv) {
            Presence::Absent => Ok(false),
            Presence::Present => self.set_min(iv.start, x),
            Presence::Unknown => {
                if x > self.max(iv.start) {
                    self.set_absent(iv)
                } else {
                    self.set_min(iv.start, x)
                }
            }
        }
    }

    /// `start <= x` if present; see [`Store::iv_set_est`].
    pub fn iv_set_lst(&mut self, iv: &Iv, x: i64) -> PResult<bool> {
        match self.presence(iv) {
            Presence::Absent => Ok(false),
            Presence::Present => self.set_max(iv.start, x),
            Presence::Unknown => {
                if x < self.min(iv.start) {
                    self.set_absent(iv)
                } else {
                    self.set_max(iv.start, x)
                }
            }
        }
    }

    pub fn iv_set_start_bounds(&mut self, iv: &Iv, lo: i64, hi: i64) -> PResult<bool> {
        if lo > hi || !self.intersects(iv.start, lo, hi) {
            return match self.presence(iv) {
                Presence::Absent => Ok(false),
                Presence::Present => Err(Fail),
                Presence::Unknown => self.set_absent(iv),
            };
        }
        Ok(self.iv_set_est(iv, lo)? | self.iv_set_lst(iv, hi)?)
    }
}

fn remove_sparse(s: &mut Sparse, size: &mut u64, x: i64) {
    let r = (x - s.offset) as usize;
    let p = s.pos[r] as u64;
    if p >= *size {
        return;
    }
    let last = (*size - 1) as usize;
    let other = s.vals[last];
    s.vals.swap(p as usize, last);
    s.pos[other as usize] = p as u32;
    s.pos[r] = last as u32;
    *size -= 1;
}
