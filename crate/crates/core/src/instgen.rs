//! Seeded random instance generator.
//!
//! Draws follow a fixed order so an instance is a pure function of its
//! parameters: family assignment, family processing times, job weights, job
//! sizes, family capacities, makespan lower bound, then release times.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`. Suites derive one
//! seed per instance with [`derive_seed`] (a SplitMix64 chain over the base
//! seed and the class tuple), so every instance owns an independent stream.

use std::path::{Path, PathBuf};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{write_file, DomainError, Family, Instance, Job, FORMAT_VERSION};

/// Candidate maximum batch sizes.
pub const CAPACITY_SET: [i64; 13] = [10, 15, 20, 25, 30, 35, 40, 45, 50, 75, 100, 125, 150];
pub const MAX_PROC_TIME: i64 = 10;
pub const MAX_WEIGHT: i64 = 10;
pub const MAX_SIZE: i64 = 25;

/// Name of the generator recorded in instance metadata.
pub const RNG_NAME: &str = "ChaCha8Rng::seed_from_u64";

#[derive(Debug, Error)]
pub enum GenError {
    #[error("cannot give {families} families a job each with only {jobs} jobs")]
    TooFewJobs { jobs: usize, families: usize },
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenParams {
    pub n_jobs: usize,
    pub n_families: usize,
    pub n_machines: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub job_levels: Vec<usize>,
    pub family_levels: Vec<usize>,
    pub machine_levels: Vec<u32>,
    pub instances_per_class: usize,
    pub base_seed: u64,
}

impl SuiteConfig {
    /// The 4 × 5 × 5 class grid with 10 replicates (1,000 instances).
    pub fn paper_scale(base_seed: u64) -> Self {
        SuiteConfig {
            job_levels: vec![50, 100, 150, 200],
            family_levels: vec![4, 5, 6, 8, 10],
            machine_levels: vec![4, 5, 6, 8, 10],
            instances_per_class: 10,
            base_seed,
        }
    }

    /// Small grid meant for a laptop run.
    pub fn desk_scale(base_seed: u64) -> Self {
        SuiteConfig {
            job_levels: vec![8, 12],
            family_levels: vec![2, 3],
            machine_levels: vec![1, 2],
            instances_per_class: 10,
            base_seed,
        }
    }

    fn check(&self) -> Result<(), GenError> {
        if self.job_levels.is_empty()
            || self.family_levels.is_empty()
            || self.machine_levels.is_empty()
        {
            return Err(GenError::Params("suite levels must be non-empty".into()));
        }
        if self.instances_per_class < 1 {
            return Err(GenError::Params(
                "instances_per_class must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// `Σ_f p^f · ⌈N_f / u_f⌉ / |M|` as an exact rational.
///
/// Each entry is `(proc_time, job_count, capacity)`.
pub fn cmax_lower_bound(families: &[(i64, i64, i64)], machine_count: i64) -> Ratio<i64> {
    let work: i64 = families
        .iter()
        .map(|&(p, n, u)| p * ((n + u - 1) / u))
        .sum();
    Ratio::new(work, machine_count)
}

fn ceil_ratio(r: Ratio<i64>) -> i64 {
    r.ceil().to_integer()
}

pub fn generate_instance(params: GenParams) -> Result<Instance, GenError> {
    let GenParams {
        n_jobs,
        n_families,
        n_machines,
        seed,
    } = params;
    if n_families < 1 || n_machines < 1 {
        return Err(GenError::Params(
            "need at least one family and one machine".into(),
        ));
    }
    if n_jobs < n_families {
        return Err(GenError::TooFewJobs {
            jobs: n_jobs,
            families: n_families,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Redraw the whole assignment until no family is empty.
    let assignment: Vec<usize> = loop {
        let draw: Vec<usize> = (0..n_jobs)
            .map(|_| rng.random_range(0..n_families))
            .collect();
        let mut counts = vec![0usize; n_families];
        for &f in &draw {
            counts[f] += 1;
        }
        if counts.iter().all(|&c| c > 0) {
            break draw;
        }
    };
    let proc_times: Vec<i64> = (0..n_families)
        .map(|_| rng.random_range(1..=MAX_PROC_TIME))
        .collect();
    let weights: Vec<i64> = (0..n_jobs)
        .map(|_| rng.random_range(1..=MAX_WEIGHT))
        .collect();
    let sizes: Vec<i64> = (0..n_jobs)
        .map(|_| rng.random_range(1..=MAX_SIZE))
        .collect();

    let mut capacities = Vec::with_capacity(n_families);
    let mut counts = Vec::with_capacity(n_families);
    for f in 0..n_families {
        let members = assignment
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a == f)
            .map(|(j, _)| j);
        let largest = members.clone().map(|j| sizes[j]).max().unwrap_or(1);
        counts.push(members.count() as i64);
        let options = capacity_options(largest);
        capacities.push(options[rng.random_range(0..options.len())]);
    }

    let rows: Vec<(i64, i64, i64)> = (0..n_families)
        .map(|f| (proc_times[f], counts[f], capacities[f]))
        .collect();
    let lb = cmax_lower_bound(&rows, n_machines as i64);
    let release_max = ceil_ratio(lb).max(1);
    let releases: Vec<i64> = (0..n_jobs)
        .map(|_| rng.random_range(1..=release_max))
        .collect();

    let families = (0..n_families)
        .map(|f| Family {
            id: f as u32 + 1,
            proc_time: proc_times[f],
            max_batch_size: capacities[f],
        })
        .collect();
    let jobs = (0..n_jobs)
        .map(|j| Job {
            id: j as u32 + 1,
            family: assignment[j] as u32 + 1,
            size: sizes[j],
            weight: weights[j],
            release: releases[j],
        })
        .collect();
    let meta = serde_json::json!({
        "generator": "pbatch-instgen",
        "rng": RNG_NAME,
        "seed": seed,
        "n_jobs": n_jobs,
        "n_families": n_families,
        "n_machines": n_machines,
        "family_assignment": "uniform, redrawn until every family is non-empty",
        "cmax_lb": lb.to_string(),
    });
    let inst = Instance {
        version: FORMAT_VERSION,
        machines: n_machines,
        families,
        jobs,
        meta: Some(meta),
    };
    inst.check()?;
    Ok(inst)
}

/// The capacities that can hold a family whose largest job has size
/// `largest`.
pub fn capacity_options(largest: i64) -> Vec<i64> {
    CAPACITY_SET
        .iter()
        .copied()
        .filter(|&u| u >= largest)
        .collect()
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-instance seed for class `(jobs, families, machines)` and replicate.
pub fn derive_seed(
    base: u64,
    jobs: usize,
    families: usize,
    machines: u32,
    replicate: usize,
) -> u64 {
    [
        jobs as u64,
        families as u64,
        machines as u64,
        replicate as u64,
    ]
    .iter()
    .fold(mix(base), |acc, &x| mix(acc ^ x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub jobs: usize,
    pub families: usize,
    pub machines: u32,
    pub replicate: usize,
    pub seed: u64,
    pub instance: Instance,
}

impl SuiteEntry {
    pub fn id(&self) -> String {
        format!(
            "j{}_f{}_m{}_r{}",
            self.jobs, self.families, self.machines, self.replicate
        )
    }
}

/// One instance per (jobs, families, machines, replicate), jobs outermost.
pub fn generate_suite(config: &SuiteConfig) -> Result<Vec<SuiteEntry>, GenError> {
    config.check()?;
    let mut out = Vec::new();
    for &jobs in &config.job_levels {
        for &families in &config.family_levels {
            for &machines in &config.machine_levels {
                for replicate in 0..config.instances_per_class {
                    let seed = derive_seed(config.base_seed, jobs, families, machines, replicate);
                    let instance = generate_instance(GenParams {
                        n_jobs: jobs,
                        n_families: families,
                        n_machines: machines,
                        seed,
                    })?;
                    out.push(SuiteEntry {
                        jobs,
                        families,
                        machines,
                        replicate,
                        seed,
                        instance,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Writes each instance as `<id>.json` plus `manifest.csv` with
/// `class,seed,path` rows.
pub fn write_suite(entries: &[SuiteEntry], dir: &Path) -> Result<PathBuf, GenError> {
    std::fs::create_dir_all(dir).map_err(|source| DomainError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let manifest = dir.join("manifest.csv");
    let csv_err = |source| GenError::Csv {
        path: manifest.display().to_string(),
        source,
    };
    let mut w = csv::Writer::from_path(&manifest).map_err(csv_err)?;
    w.write_record(["class", "seed", "path"]).map_err(csv_err)?;
    for e in entries {
        let file = format!("{}.json", e.id());
        e.instance.save(&dir.join(&file))?;
        let class = format!("j{}_f{}_m{}", e.jobs, e.families, e.machines);
        w.write_record([class, e.seed.to_string(), file])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| csv_err(e.into()))?;
    Ok(manifest)
}

/// Reads a suite config from JSON.
pub fn load_suite_config(path: &Path) -> Result<SuiteConfig, DomainError> {
    let text = std::fs::read_to_string(path).map_err(|source| DomainError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| DomainError::Json {
        path: path.display().to_string(),
        source,
    })
}

pub fn save_suite_config(config: &SuiteConfig, path: &Path) -> Result<(), DomainError> {
    write_file(
        path,
        &serde_json::to_string_pretty(config).expect("config serializes"),
    )
}
