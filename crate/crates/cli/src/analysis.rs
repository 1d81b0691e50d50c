//! Shared pipeline of `scan`, `evolve` and `blame`: load, filter, assess at
//! each planned instant, and group the results by interval.

use anyhow::{bail, Result};
use depthreat_core::advisories::CurationReport;
use depthreat_core::history::{MaturityCriteria, MaturityFailure};
use depthreat_core::registry::ReleaseIndex;
use depthreat_core::stats::{segment_lifespan, StatsError};
use depthreat_core::threat::{assess_snapshot, AssessError, SnapshotAssessment};
use depthreat_core::time::Timestamp;
use depthreat_core::ManifestHistory;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{AnalysisArgs, MaturityArgs, Preset, SnapshotAt};
use crate::inputs::{self, AppFailure, LoadedApp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plan {
    At(SnapshotAt),
    Intervals(u32),
}

impl Plan {
    pub fn interval_count(&self) -> usize {
        match self {
            Plan::At(_) => 1,
            Plan::Intervals(k) => *k as usize,
        }
    }

    fn times(&self, history: &ManifestHistory) -> Result<Vec<Timestamp>, StatsError> {
        match *self {
            Plan::At(SnapshotAt::End) => Ok(vec![history.last_commit_at]),
            Plan::At(SnapshotAt::Instant(t)) => Ok(vec![t]),
            Plan::Intervals(k) => {
                segment_lifespan(history.first_commit_at, history.last_commit_at, k)
            }
        }
    }

    /// Position of interval `i` (0-based) within the lifespan, when the
    /// plan is lifespan-relative.
    pub fn lifespan_fraction(&self, i: usize) -> Option<f64> {
        match *self {
            Plan::At(SnapshotAt::End) => Some(1.0),
            Plan::At(SnapshotAt::Instant(_)) => None,
            Plan::Intervals(k) => Some((i + 1) as f64 / f64::from(k)),
        }
    }
}

pub fn maturity_criteria(args: &MaturityArgs) -> Option<MaturityCriteria> {
    if !args.any() {
        return None;
    }
    let mut c = match args.preset {
        Some(Preset::Preset2019) => MaturityCriteria::preset_2019(),
        None => MaturityCriteria {
            min_commits: 0,
            min_contributors: 0,
            min_dependencies: 0,
            created_before: None,
            active_after: None,
            exclude_forks: false,
        },
    };
    c.min_commits = args.min_commits.unwrap_or(c.min_commits);
    c.min_contributors = args.min_contributors.unwrap_or(c.min_contributors);
    c.min_dependencies = args.min_dependencies.unwrap_or(c.min_dependencies);
    c.created_before = args.created_before.or(c.created_before);
    c.active_after = args.active_after.or(c.active_after);
    c.exclude_forks |= args.exclude_forks;
    Some(c)
}

#[derive(Debug, Clone, Serialize)]
pub struct FilteredApp {
    pub application: String,
    pub source: String,
    pub reasons: Vec<MaturityFailure>,
}

/// An application with no manifest yet at an interval's instant.
#[derive(Debug, Clone, Serialize)]
pub struct Absent {
    pub application: String,
    #[serde(with = "depthreat_core::time::rfc3339")]
    pub at: Timestamp,
}

#[derive(Debug, Clone)]
pub struct Interval {
    /// (source, assessment), ordered by application name.
    pub assessments: Vec<(String, SnapshotAssessment)>,
    pub absent: Vec<Absent>,
    /// Registry releases visible at each analysed application's instant,
    /// summed over applications.
    pub visible_releases: usize,
}

pub struct Analysis {
    pub index: ReleaseIndex,
    pub curation: CurationReport,
    pub requested: usize,
    pub analysed: usize,
    pub filtered: Vec<FilteredApp>,
    pub failures: Vec<AppFailure>,
    pub intervals: Vec<Interval>,
}

/// One entry per planned instant; failures keep the instant they were for.
type AppSnapshots = Vec<Result<SnapshotAssessment, (Timestamp, AssessError)>>;

pub fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

pub fn run(args: &AnalysisArgs, plan: Plan) -> Result<Analysis> {
    if plan == Plan::Intervals(0) {
        bail!(StatsError::ZeroSnapshots);
    }
    let pool = thread_pool(args.jobs)?;
    let index = inputs::load_registry(&args.registry)?;
    let (store, curation) = inputs::load_advisories(&args.advisories)?;
    let (apps, mut failures) = pool.install(|| inputs::load_apps(&args.sources));
    let requested = apps.len() + failures.len();
    if apps.is_empty() {
        let causes: Vec<String> = failures
            .iter()
            .map(|f| format!("{}: {}", f.source, f.cause))
            .collect();
        bail!("no application could be loaded\n  {}", causes.join("\n  "));
    }

    let criteria = maturity_criteria(&args.maturity);
    let mut filtered = Vec::new();
    let mut selected: Vec<LoadedApp> = Vec::new();
    for app in apps {
        match &criteria {
            Some(c) => {
                let verdict = app.history.passes_maturity_filter(c);
                if verdict.passed {
                    selected.push(app);
                } else {
                    filtered.push(FilteredApp {
                        application: app.history.application.clone(),
                        source: app.source,
                        reasons: verdict.reasons,
                    });
                }
            }
            None => selected.push(app),
        }
    }
    selected.sort_by(|a, b| a.history.application.cmp(&b.history.application));
    filtered.sort_by(|a, b| a.application.cmp(&b.application));

    let per_app: Vec<Result<AppSnapshots, StatsError>> = pool.install(|| {
        selected
            .par_iter()
            .map(|app| {
                let times = plan.times(&app.history)?;
                Ok(times
                    .into_iter()
                    .map(|t| assess_snapshot(&index, &store, &app.history, t).map_err(|e| (t, e)))
                    .collect())
            })
            .collect()
    });

    let mut intervals: Vec<Interval> = (0..plan.interval_count())
        .map(|_| Interval {
            assessments: Vec::new(),
            absent: Vec::new(),
            visible_releases: 0,
        })
        .collect();
    let mut analysed = 0;
    for (app, result) in selected.iter().zip(per_app) {
        let snapshots = match result {
            Ok(s) => s,
            Err(e) => {
                failures.push(AppFailure {
                    source: app.source.clone(),
                    cause: e.to_string(),
                });
                continue;
            }
        };
        analysed += 1;
        for (interval, snapshot) in intervals.iter_mut().zip(snapshots) {
            let t = match &snapshot {
                Ok(s) => s.at,
                Err((t, _)) => *t,
            };
            interval.visible_releases += visible_releases(&index, t);
            match snapshot {
                Ok(s) => interval.assessments.push((app.source.clone(), s)),
                Err((at, AssessError::NoneBefore)) => interval.absent.push(Absent {
                    application: app.history.application.clone(),
                    at,
                }),
            }
        }
    }
    Ok(Analysis {
        index,
        curation,
        requested,
        analysed,
        filtered,
        failures,
        intervals,
    })
}

fn visible_releases(index: &ReleaseIndex, t: Timestamp) -> usize {
    index
        .packages()
        .map(|(_, releases)| releases.iter().filter(|r| r.released_at < t).count())
        .sum()
}
