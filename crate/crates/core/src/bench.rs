//! Benchmark grids: run encodings over a suite, compute relative gaps
//! against the best known value, aggregate per instance class and write
//! CSV reports.
//!
//! Confidence intervals use the normal approximation `1.96 · sd / √k` with
//! the sample standard deviation; a single data point gives half-width 0.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpcore::{SolveParams, SolveStatus};
use crate::domain::{validate_solution, Instance, ObjectiveKind};
use crate::encodings::{build, Variant};
use crate::instgen::SuiteEntry;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("best known value is 0; relative gap undefined")]
    ZeroReference,
    #[error(
        "{encoding} reports {value} below the exact optimum {exact} on {instance} ({objective})"
    )]
    BelowExact {
        instance: String,
        encoding: String,
        objective: ObjectiveKind,
        value: i64,
        exact: i64,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

/// Solver status plus `Error` for runs that could not be built or decoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BenchStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unknown,
    Error,
}

impl BenchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchStatus::Optimal => "OPTIMAL",
            BenchStatus::Feasible => "FEASIBLE",
            BenchStatus::Infeasible => "INFEASIBLE",
            BenchStatus::Unknown => "UNKNOWN",
            BenchStatus::Error => "ERROR",
        }
    }
}

impl From<SolveStatus> for BenchStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => BenchStatus::Optimal,
            SolveStatus::Feasible => BenchStatus::Feasible,
            SolveStatus::Infeasible => BenchStatus::Infeasible,
            SolveStatus::Unknown => BenchStatus::Unknown,
        }
    }
}

/// Instance class: jobs, families, machines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassKey {
    pub jobs: usize,
    pub families: usize,
    pub machines: u32,
}

impl ClassKey {
    pub fn of(instance: &Instance) -> Self {
        ClassKey {
            jobs: instance.jobs.len(),
            families: instance.families.len(),
            machines: instance.machines,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub id: String,
    pub instance: Instance,
}

impl From<SuiteEntry> for BenchInstance {
    fn from(e: SuiteEntry) -> Self {
        BenchInstance {
            id: e.id(),
            instance: e.instance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub instance_id: String,
    pub class: ClassKey,
    pub encoding: Variant,
    pub objective: ObjectiveKind,
    pub status: BenchStatus,
    pub value: Option<i64>,
    pub bound: Option<i64>,
    /// Seconds.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSummary {
    pub class: ClassKey,
    pub encoding: Variant,
    pub objective: ObjectiveKind,
    pub n: usize,
    pub pct_optimal: f64,
    pub pct_no_solution: f64,
    /// Over records with a value; `None` when there are none.
    pub mean_gap_pct: Option<f64>,
    pub gap_ci_pct: Option<f64>,
    pub mean_time_s: f64,
    pub time_ci_s: f64,
}

/// `|value − best| / |best|`, exactly.
pub fn relative_gap(value: i64, best_known: i64) -> Result<Ratio<i64>, BenchError> {
    if best_known == 0 {
        return Err(BenchError::ZeroReference);
    }
    Ok(Ratio::new((value - best_known).abs(), best_known.abs()))
}

/// Smallest value among `values` and the exact optimum, if any. A value
/// below the exact optimum means a solver bug and is reported as such.
pub fn best_known<'a>(
    records: impl IntoIterator<Item = &'a BenchRecord>,
    exact: Option<i64>,
) -> Result<Option<i64>, BenchError> {
    let mut best = exact;
    for r in records {
        let Some(v) = r.value else { continue };
        if let Some(e) = exact {
            if v < e {
                return Err(BenchError::BelowExact {
                    instance: r.instance_id.clone(),
                    encoding: r.encoding.to_string(),
                    objective: r.objective,
                    value: v,
                    exact: e,
                });
            }
        }
        best = Some(best.map_or(v, |b| b.min(v)));
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub time_limit: Duration,
    pub workers: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            time_limit: Duration::from_secs(60),
            workers: 1,
            seed: 0,
        }
    }
}

/// Solves one (instance, encoding, objective) cell. Build failures (such as
/// the AU horizon cap) and decoding failures become `Error` records.
pub fn run_one(
    item: &BenchInstance,
    encoding: Variant,
    objective: ObjectiveKind,
    config: &BenchConfig,
) -> BenchRecord {
    let mut record = BenchRecord {
        instance_id: item.id.clone(),
        class: ClassKey::of(&item.instance),
        encoding,
        objective,
        status: BenchStatus::Error,
        value: None,
        bound: None,
        wall_time: 0.0,
    };
    let t0 = web_time::Instant::now();
    let mut enc = match build(&item.instance, encoding, objective) {
        Ok(e) => e,
        Err(e) => {
            log::warn!("{} {encoding} {objective}: {e}", item.id);
            record.wall_time = t0.elapsed().as_secs_f64();
            return record;
        }
    };
    let params = SolveParams {
        time_limit: Some(config.time_limit),
        seed: config.seed,
        restarts: false,
    };
    let out = enc.solve(&params);
    record.wall_time = t0.elapsed().as_secs_f64();
    if out.best_value.is_some() {
        let checked = enc
            .decode(&out)
            .map(|sol| validate_solution(&item.instance, &sol));
        match checked {
            Ok(report) if report.ok() => {}
            Ok(report) => {
                log::error!(
                    "{} {encoding} {objective}: decoded solution rejected: {:?}",
                    item.id,
                    report.kinds()
                );
                return record;
            }
            Err(e) => {
                log::error!("{} {encoding} {objective}: {e}", item.id);
                return record;
            }
        }
    }
    record.status = out.status.into();
    record.value = out.best_value;
    record.bound = out.best_bound;
    log::info!(
        "{} {encoding} {objective}: {} {:?} in {:.3}s",
        item.id,
        record.status.as_str(),
        record.value,
        record.wall_time
    );
    record
}

/// One record per (instance, encoding, objective), ordered by instance,
/// then encoding, then objective as given. The record set does not depend
/// on the worker count; with one worker the run is fully deterministic.
pub fn run_benchmark(
    suite: &[BenchInstance],
    encodings: &[Variant],
    objectives: &[ObjectiveKind],
    config: &BenchConfig,
) -> Vec<BenchRecord> {
    let cells: Vec<(usize, Variant, ObjectiveKind)> = (0..suite.len())
        .flat_map(|i| {
            encodings
                .iter()
                .flat_map(move |&e| objectives.iter().map(move |&o| (i, e, o)))
        })
        .collect();
    let results: Mutex<Vec<Option<BenchRecord>>> = Mutex::new(vec![None; cells.len()]);
    let next = AtomicUsize::new(0);
    let worker = || loop {
        let k = next.fetch_add(1, Ordering::Relaxed);
        let Some(&(i, e, o)) = cells.get(k) else {
            break;
        };
        let r = run_one(&suite[i], e, o, config);
        results.lock().unwrap()[k] = Some(r);
    };
    let workers = config.workers.clamp(1, cells.len().max(1));
    if workers == 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(worker);
            }
        });
    }
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}

/// Mean and normal-approximation 95% half-width. Values are summed in
/// sorted order so the result does not depend on input order.
fn mean_ci(mut xs: Vec<f64>) -> (f64, f64) {
    xs.sort_by(f64::total_cmp);
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, 1.96 * var.sqrt() / k.sqrt())
}

/// Per (class, encoding, objective) statistics, with best-known values
/// pooled over all records of an instance and objective.
pub fn aggregate(records: &[BenchRecord]) -> Result<Vec<ClassSummary>, BenchError> {
    aggregate_with_exact(records, &BTreeMap::new())
}

/// Like [`aggregate`], with exact optima (keyed by instance id and
/// objective) joining the best-known pool.
pub fn aggregate_with_exact(
    records: &[BenchRecord],
    exact: &BTreeMap<(String, ObjectiveKind), i64>,
) -> Result<Vec<ClassSummary>, BenchError> {
    let mut pools: BTreeMap<(&str, ObjectiveKind), Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        pools
            .entry((&r.instance_id, r.objective))
            .or_default()
            .push(r);
    }
    let mut best = BTreeMap::new();
    for (&(id, obj), rs) in &pools {
        let e = exact.get(&(id.to_string(), obj)).copied();
        if let Some(b) = best_known(rs.iter().copied(), e)? {
            best.insert((id, obj), b);
        }
    }

    let mut groups: BTreeMap<(ClassKey, Variant, ObjectiveKind), Vec<&BenchRecord>> =
        BTreeMap::new();
    for r in records {
        groups
            .entry((r.class, r.encoding, r.objective))
            .or_default()
            .push(r);
    }
    let mut out = Vec::with_capacity(groups.len());
    for ((class, encoding, objective), rs) in groups {
        let n = rs.len();
        let optimal = rs
            .iter()
            .filter(|r| r.status == BenchStatus::Optimal)
            .count();
        let no_solution = rs.iter().filter(|r| r.value.is_none()).count();
        let mut gaps = Vec::new();
        for r in &rs {
            if let (Some(v), Some(&b)) = (r.value, best.get(&(r.instance_id.as_str(), objective))) {
                gaps.push(100.0 * relative_gap(v, b)?.to_f64().expect("finite"));
            }
        }
        let (mean_gap_pct, gap_ci_pct) = if gaps.is_empty() {
            (None, None)
        } else {
            let (m, c) = mean_ci(gaps);
            (Some(m), Some(c))
        };
        let (mean_time_s, time_ci_s) = mean_ci(rs.iter().map(|r| r.wall_time).collect());
        out.push(ClassSummary {
            class,
            encoding,
            objective,
            n,
            pct_optimal: 100.0 * optimal as f64 / n as f64,
            pct_no_solution: 100.0 * no_solution as f64 / n as f64,
            mean_gap_pct,
            gap_ci_pct,
            mean_time_s,
            time_ci_s,
        });
    }
    Ok(out)
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

struct CsvOut {
    path: PathBuf,
    w: csv::Writer<std::fs::File>,
}

impl CsvOut {
    fn create(path: PathBuf) -> Result<Self, BenchError> {
        let w = csv::Writer::from_path(&path).map_err(|source| BenchError::Csv {
            path: path.display().to_string(),
            source,
        })?;
        Ok(CsvOut { path, w })
    }

    fn row<I, S>(&mut self, fields: I) -> Result<(), BenchError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w
            .write_record(fields)
            .map_err(|source| BenchError::Csv {
                path: self.path.display().to_string(),
                source,
            })
    }

    fn finish(mut self) -> Result<PathBuf, BenchError> {
        self.w.flush().map_err(|source| BenchError::Io {
            path: self.path.display().to_string(),
            source,
        })?;
        Ok(self.path)
    }
}

const PLOT_METRICS: [&str; 4] = ["optimal", "no_solution", "gap", "time"];

/// Writes `records.csv`, `summary.csv` and `plotdata/<objective>_<metric>.csv`.
/// Plot files have one row per class (ordered by jobs, families, machines)
/// and one column per encoding, plus a `_ci` column for gap and time.
/// Returns the written paths.
pub fn emit_report(
    summaries: &[ClassSummary],
    records: &[BenchRecord],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, BenchError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| BenchError::Io { path, source }
    };
    let plot_dir = out_dir.join("plotdata");
    std::fs::create_dir_all(&plot_dir).map_err(io(&plot_dir))?;
    let mut written = Vec::new();

    let mut w = CsvOut::create(out_dir.join("records.csv"))?;
    w.row([
        "instance_id",
        "jobs",
        "families",
        "machines",
        "encoding",
        "objective",
        "status",
        "value",
        "bound",
        "wall_time_s",
    ])?;
    for r in records {
        w.row([
            r.instance_id.clone(),
            r.class.jobs.to_string(),
            r.class.families.to_string(),
            r.class.machines.to_string(),
            r.encoding.to_string(),
            r.objective.to_string(),
            r.status.as_str().to_string(),
            opt(r.value),
            opt(r.bound),
            f4(r.wall_time),
        ])?;
    }
    written.push(w.finish()?);

    let mut sorted: Vec<&ClassSummary> = summaries.iter().collect();
    sorted.sort_by_key(|s| (s.class, s.encoding, s.objective));
    let mut w = CsvOut::create(out_dir.join("summary.csv"))?;
    w.row([
        "jobs",
        "families",
        "machines",
        "encoding",
        "objective",
        "n",
        "pct_optimal",
        "pct_no_solution",
        "mean_gap_pct",
        "gap_ci_pct",
        "mean_time_s",
        "time_ci_s",
    ])?;
    for s in &sorted {
        w.row([
            s.class.jobs.to_string(),
            s.class.families.to_string(),
            s.class.machines.to_string(),
            s.encoding.to_string(),
            s.objective.to_string(),
            s.n.to_string(),
            f4(s.pct_optimal),
            f4(s.pct_no_solution),
            opt(s.mean_gap_pct.map(f4)),
            opt(s.gap_ci_pct.map(f4)),
            f4(s.mean_time_s),
            f4(s.time_ci_s),
        ])?;
    }
    written.push(w.finish()?);

    let mut encodings: Vec<Variant> = sorted.iter().map(|s| s.encoding).collect();
    encodings.sort();
    encodings.dedup();
    for objective in ObjectiveKind::ALL {
        let mut by_class: BTreeMap<ClassKey, BTreeMap<Variant, &ClassSummary>> = BTreeMap::new();
        for s in sorted.iter().filter(|s| s.objective == objective) {
            by_class.entry(s.class).or_default().insert(s.encoding, s);
        }
        for metric in PLOT_METRICS {
            let with_ci = matches!(metric, "gap" | "time");
            let mut header = vec![
                "jobs".to_string(),
                "families".to_string(),
                "machines".to_string(),
            ];
            for e in &encodings {
                header.push(e.to_string());
                if with_ci {
                    header.push(format!("{e}_ci"));
                }
            }
            let mut w = CsvOut::create(plot_dir.join(format!("{objective}_{metric}.csv")))?;
            w.row(&header)?;
            for (class, cells) in &by_class {
                let mut row = vec![
                    class.jobs.to_string(),
                    class.families.to_string(),
                    class.machines.to_string(),
                ];
                for e in &encodings {
                    let s = cells.get(e);
                    let (v, ci) = match (metric, s) {
                        (_, None) => (None, None),
                        ("optimal", Some(s)) => (Some(s.pct_optimal), None),
                        ("no_solution", Some(s)) => (Some(s.pct_no_solution), None),
                        ("gap", Some(s)) => (s.mean_gap_pct, s.gap_ci_pct),
                        (_, Some(s)) => (Some(s.mean_time_s), Some(s.time_ci_s)),
                    };
                    row.push(opt(v.map(f4)));
                    if with_ci {
                        row.push(opt(ci.map(f4)));
                    }
                }
                w.row(&row)?;
            }
            written.push(w.finish()?);
        }
    }
    Ok(written)
}

/// Loads a suite directory written by [`crate::instgen::write_suite`]:
/// every path listed in `manifest.csv`, ids taken from the file stems.
pub fn load_suite_dir(dir: &Path) -> Result<Vec<BenchInstance>, crate::domain::DomainError> {
    use crate::domain::DomainError;
    let manifest = dir.join("manifest.csv");
    let bad = |msg: String| DomainError::InvalidInstance(format!("{}: {msg}", manifest.display()));
    let mut reader = csv::Reader::from_path(&manifest).map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = headers
        .iter()
        .position(|h| h == "path")
        .ok_or_else(|| bad("no `path` column".into()))?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let rel = row.get(col).ok_or_else(|| bad("short row".into()))?;
        let path = dir.join(rel);
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| rel.to_string());
        out.push(BenchInstance {
            id,
            instance: Instance::load(&path)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::illustrative_instance;

    fn rec(id: &str, enc: &str, status: BenchStatus, value: Option<i64>, t: f64) -> BenchRecord {
        BenchRecord {
            instance_id: id.into(),
            class: ClassKey {
                jobs: 4,
                families: 1,
                machines: 1,
            },
            encoding: enc.parse().unwrap(),
            objective: ObjectiveKind::Twct,
            status,
            value,
            bound: None,
            wall_time: t,
        }
    }

    #[test]
    fn gap_formula() {
        assert_eq!(relative_gap(110, 100).unwrap(), Ratio::new(1, 10));
        assert_eq!(relative_gap(90, 100).unwrap(), Ratio::new(1, 10));
        assert_eq!(relative_gap(1700, 1700).unwrap(), Ratio::from_integer(0));
        assert!(matches!(relative_gap(5, 0), Err(BenchError::ZeroReference)));
    }

    #[test]
    fn best_known_pools_values() {
        let rs = [
            rec("a", "au", BenchStatus::Optimal, Some(1700), 1.0),
            rec("a", "as", BenchStatus::Feasible, Some(1760), 1.0),
            rec("a", "s", BenchStatus::Unknown, None, 1.0),
        ];
        assert_eq!(best_known(&rs, None).unwrap(), Some(1700));
        assert_eq!(best_known(&rs[1..], Some(1700)).unwrap(), Some(1700));
        assert!(best_known(&rs, Some(1750)).is_err());
        assert_eq!(best_known(&rs[2..], None).unwrap(), None);
    }

    #[test]
    fn single_valued_record_has_zero_ci() {
        let rs = [rec("a", "au", BenchStatus::Feasible, Some(10), 2.0)];
        let s = &aggregate(&rs).unwrap()[0];
        assert_eq!((s.mean_gap_pct, s.gap_ci_pct), (Some(0.0), Some(0.0)));
        assert_eq!((s.mean_time_s, s.time_ci_s), (2.0, 0.0));
    }

    #[test]
    fn unvalued_class_has_no_gap() {
        let rs = [
            rec("a", "au", BenchStatus::Unknown, None, 1.0),
            rec("b", "au", BenchStatus::Unknown, None, 3.0),
        ];
        let s = &aggregate(&rs).unwrap()[0];
        assert_eq!(s.pct_no_solution, 100.0);
        assert_eq!(s.mean_gap_pct, None);
        assert_eq!(s.mean_time_s, 2.0);
    }

    #[test]
    fn grid_has_one_record_per_cell() {
        let suite = vec![BenchInstance {
            id: "t1".into(),
            instance: illustrative_instance(),
        }];
        let encs: Vec<Variant> = ["au", "rs+sb"].iter().map(|s| s.parse().unwrap()).collect();
        let config = BenchConfig {
            time_limit: Duration::from_secs(5),
            workers: 2,
            seed: 0,
        };
        let rs = run_benchmark(&suite, &encs, &ObjectiveKind::ALL, &config);
        assert_eq!(rs.len(), 4);
        for r in &rs {
            assert_eq!(r.status, BenchStatus::Optimal);
        }
        let values: Vec<i64> = rs.iter().map(|r| r.value.unwrap()).collect();
        assert_eq!(values, vec![1700, 22, 1700, 22]);
    }

    #[test]
    fn capped_horizon_is_an_error_record() {
        let mut inst = illustrative_instance();
        inst.jobs[0].release = 5000;
        let item = BenchInstance {
            id: "far".into(),
            instance: inst,
        };
        let r = run_one(
            &item,
            "au".parse().unwrap(),
            ObjectiveKind::Cmax,
            &BenchConfig::default(),
        );
        assert_eq!(r.status, BenchStatus::Error);
        assert_eq!(r.value, None);
    }
}
