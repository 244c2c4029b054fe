//! Exhaustive reference solver for tiny instances.
//!
//! Every capacity-feasible batching of every family is combined with every
//! assignment of batches to machines and every order on each machine; each
//! order is scheduled as early as releases allow. Nothing else is pruned.

use thiserror::Error;

use crate::domain::{DomainError, ExecutedBatch, Instance, ObjectiveKind, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_jobs: usize,
    pub max_machines: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_jobs: 8,
            max_machines: 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{jobs} jobs exceed the oracle limit of {max}")]
    TooManyJobs { jobs: usize, max: usize },
    #[error("{machines} machines exceed the oracle limit of {max}")]
    TooManyMachines { machines: usize, max: usize },
    #[error("job {0} is larger than its family's batch capacity")]
    Infeasible(u32),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone)]
struct Batch {
    jobs: Vec<u32>,
    release: i64,
    proc_time: i64,
    weight: i64,
}

/// Placed batch: (machine, start, batch index).
type Placement = (u32, i64, usize);

/// `(family, start, job ids)` per batch.
type Layout = Vec<(u32, i64, Vec<u32>)>;

struct Search<'a> {
    kind: ObjectiveKind,
    machines: u32,
    batches: &'a [Batch],
    placed: Vec<Placement>,
    best: Option<(i64, Layout)>,
}

impl Search<'_> {
    fn key(&self) -> Vec<(u32, i64, Vec<u32>)> {
        let mut k: Vec<_> = self
            .placed
            .iter()
            .map(|&(m, s, b)| (m, s, self.batches[b].jobs.clone()))
            .collect();
        k.sort();
        k
    }

    fn leaf(&mut self, value: i64) {
        let better = match &self.best {
            None => true,
            Some((v, _)) if value < *v => true,
            Some((v, _)) if value > *v => false,
            Some((_, key)) => self.key() < *key,
        };
        if better {
            self.best = Some((value, self.key()));
        }
    }

    /// Appends unused batches to `machine` (currently busy until `end`), or
    /// moves on to the next machine.
    fn arrange(&mut self, machine: u32, end: i64, unused: u64, value: i64) {
        if unused == 0 {
            self.leaf(value);
            return;
        }
        let mut rest = unused;
        while rest != 0 {
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let batch = &self.batches[b];
            let start = end.max(batch.release);
            let done = start + batch.proc_time;
            let value = match self.kind {
                ObjectiveKind::Twct => value + batch.weight * done,
                ObjectiveKind::Cmax => value.max(done),
            };
            self.placed.push((machine, start, b));
            self.arrange(machine, done, unused & !(1 << b), value);
            self.placed.pop();
        }
        if machine < self.machines {
            self.arrange(machine + 1, 0, unused, value);
        }
    }
}

/// All partitions of `jobs` into blocks whose sizes fit `cap`, as
/// restricted-growth assignments.
fn partitions(jobs: &[(u32, i64)], cap: i64) -> Vec<Vec<Vec<u32>>> {
    fn go(
        jobs: &[(u32, i64)],
        cap: i64,
        blocks: &mut Vec<(Vec<u32>, i64)>,
        out: &mut Vec<Vec<Vec<u32>>>,
    ) {
        let Some((&(id, size), rest)) = jobs.split_first() else {
            out.push(blocks.iter().map(|b| b.0.clone()).collect());
            return;
        };
        for k in 0..blocks.len() {
            if blocks[k].1 + size <= cap {
                blocks[k].0.push(id);
                blocks[k].1 += size;
                go(rest, cap, blocks, out);
                blocks[k].1 -= size;
                blocks[k].0.pop();
            }
        }
        if size <= cap {
            blocks.push((vec![id], size));
            go(rest, cap, blocks, out);
            blocks.pop();
        }
    }
    let mut out = Vec::new();
    go(jobs, cap, &mut Vec::new(), &mut out);
    out
}

/// Optimal objective value and a witness schedule. Among co-optimal
/// schedules the witness has the smallest sorted list of
/// `(machine, start, jobs)` triples.
pub fn solve_exact(
    instance: &Instance,
    kind: ObjectiveKind,
    limits: OracleLimits,
) -> Result<(i64, Solution), OracleError> {
    let n = instance.jobs.len();
    if n > limits.max_jobs {
        return Err(OracleError::TooManyJobs {
            jobs: n,
            max: limits.max_jobs,
        });
    }
    let machines = instance.machines as usize;
    if machines > limits.max_machines {
        return Err(OracleError::TooManyMachines {
            machines,
            max: limits.max_machines,
        });
    }
    for job in &instance.jobs {
        if job.size > instance.family(job).max_batch_size {
            return Err(OracleError::Infeasible(job.id));
        }
    }

    let per_family: Vec<Vec<Vec<Batch>>> = instance
        .jobs_by_family()
        .iter()
        .zip(&instance.families)
        .map(|(members, fam)| {
            let items: Vec<(u32, i64)> = members
                .iter()
                .map(|&j| (instance.jobs[j].id, instance.jobs[j].size))
                .collect();
            partitions(&items, fam.max_batch_size)
                .into_iter()
                .map(|blocks| {
                    blocks
                        .into_iter()
                        .map(|jobs| {
                            let of = |id: u32| &instance.jobs[id as usize - 1];
                            Batch {
                                release: jobs.iter().map(|&id| of(id).release).max().unwrap(),
                                weight: jobs.iter().map(|&id| of(id).weight).sum(),
                                proc_time: fam.proc_time,
                                jobs,
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut best: Option<(i64, Layout)> = None;
    let mut choice = vec![0usize; per_family.len()];
    loop {
        let batches: Vec<Batch> = choice
            .iter()
            .zip(&per_family)
            .flat_map(|(&c, opts)| opts[c].clone())
            .collect();
        let mut search = Search {
            kind,
            machines: instance.machines,
            batches: &batches,
            placed: Vec::new(),
            best,
        };
        search.arrange(1, 0, (1u64 << batches.len()) - 1, 0);
        best = search.best;

        // next combination, odometer style
        let mut f = 0;
        while f < choice.len() {
            choice[f] += 1;
            if choice[f] < per_family[f].len() {
                break;
            }
            choice[f] = 0;
            f += 1;
        }
        if f == choice.len() {
            break;
        }
    }

    let (value, key) = best.expect("at least one schedule exists");
    let batches = key
        .into_iter()
        .map(|(machine, start, job_ids)| ExecutedBatch {
            family: instance.jobs[job_ids[0] as usize - 1].family,
            machine,
            start,
            job_ids,
        })
        .collect();
    let sol = Solution::evaluated(instance, kind, batches)?;
    debug_assert_eq!(sol.objective_value, value);
    Ok((value, sol))
}
