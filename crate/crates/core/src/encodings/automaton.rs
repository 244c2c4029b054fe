//! The batch-progress automaton: state 0 is an idle machine, and each family
//! owns a chain of states counting the elapsed processing time of its batch.

/// Which of the five arc groups an arc belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArcKind {
    /// idle stays idle
    Idle,
    /// idle machine starts a batch
    Open,
    /// one more time unit of the running batch
    Progress,
    /// finished batch, machine goes idle
    Close,
    /// finished batch, next batch starts immediately
    Chain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub label: i64,
    pub kind: ArcKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    pub n_states: usize,
    /// First state of each family's chain.
    pub sigma: Vec<usize>,
    /// Last state of each family's chain.
    pub phi: Vec<usize>,
    pub arcs: Vec<Arc>,
}

impl Automaton {
    /// States in which a machine may end the horizon.
    pub fn final_states(&self) -> Vec<usize> {
        std::iter::once(0).chain(self.phi.iter().copied()).collect()
    }

    /// `(from, to, label)` triples.
    pub fn triples(&self) -> Vec<(usize, usize, i64)> {
        self.arcs.iter().map(|a| (a.from, a.to, a.label)).collect()
    }

    pub fn count(&self, kind: ArcKind) -> usize {
        self.arcs.iter().filter(|a| a.kind == kind).count()
    }
}

/// Builds the automaton for families with the given processing times
/// (all ≥ 1). Every arc's label is its target state.
pub fn build_automaton(proc_times: &[i64]) -> Automaton {
    let mut sigma = Vec::with_capacity(proc_times.len());
    let mut phi = Vec::with_capacity(proc_times.len());
    let mut next = 1usize;
    for &p in proc_times {
        assert!(p >= 1, "processing times are positive");
        sigma.push(next);
        next += p as usize;
        phi.push(next - 1);
    }
    let arc = |from: usize, to: usize, kind| Arc {
        from,
        to,
        label: to as i64,
        kind,
    };
    let mut arcs = vec![arc(0, 0, ArcKind::Idle)];
    arcs.extend(sigma.iter().map(|&s| arc(0, s, ArcKind::Open)));
    for (&s, &e) in sigma.iter().zip(&phi) {
        arcs.extend((s..e).map(|i| arc(i, i + 1, ArcKind::Progress)));
    }
    arcs.extend(phi.iter().map(|&e| arc(e, 0, ArcKind::Close)));
    for &e in &phi {
        arcs.extend(sigma.iter().map(|&s| arc(e, s, ArcKind::Chain)));
    }
    Automaton {
        n_states: next,
        sigma,
        phi,
        arcs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triples_of(a: &Automaton, kind: ArcKind) -> Vec<(usize, usize, i64)> {
        a.arcs
            .iter()
            .filter(|x| x.kind == kind)
            .map(|x| (x.from, x.to, x.label))
            .collect()
    }

    #[test]
    fn two_families() {
        let a = build_automaton(&[2, 3]);
        assert_eq!(a.n_states, 6);
        assert_eq!((a.sigma.clone(), a.phi.clone()), (vec![1, 3], vec![2, 5]));
        assert_eq!(triples_of(&a, ArcKind::Open), vec![(0, 1, 1), (0, 3, 3)]);
        assert_eq!(
            triples_of(&a, ArcKind::Progress),
            vec![(1, 2, 2), (3, 4, 4), (4, 5, 5)]
        );
        assert_eq!(triples_of(&a, ArcKind::Close), vec![(2, 0, 0), (5, 0, 0)]);
        assert_eq!(
            triples_of(&a, ArcKind::Chain),
            vec![(2, 1, 1), (2, 3, 3), (5, 1, 1), (5, 3, 3)]
        );
    }

    #[test]
    fn unit_family() {
        let a = build_automaton(&[1]);
        assert_eq!(a.n_states, 2);
        assert_eq!((a.sigma[0], a.phi[0]), (1, 1));
        assert_eq!(a.count(ArcKind::Progress), 0);
        assert_eq!(a.final_states(), vec![0, 1]);
    }
}
