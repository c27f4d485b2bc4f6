//! In-memory job registry with forward-only state transitions.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use sashimi_core::pipeline::AnalysisConfig;

/// Artifact files written for every finished job.
pub const ARTIFACT_NAMES: [&str; 4] = ["features.csv", "curves.json", "manifest.json", "diagram.csv"];

pub fn content_type(name: &str) -> &'static str {
    if name.ends_with(".csv") {
        "text/csv; charset=utf-8"
    } else {
        "application/json"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobState {
    /// Only queued -> running -> (done | failed) is allowed.
    pub fn can_advance_to(self, next: JobState) -> bool {
        matches!(
            (self, next),
            (JobState::Queued, JobState::Running) | (JobState::Running, JobState::Done) | (JobState::Running, JobState::Failed)
        )
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Done | JobState::Failed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Job {
    pub id: String,
    pub state: JobState,
    pub progress: f64,
    pub config: AnalysisConfig,
    /// Seconds since the Unix epoch.
    pub created: f64,
    pub completed: Option<f64>,
    pub error: Option<String>,
    #[serde(skip)]
    pub dir: PathBuf,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionError {
    pub from: JobState,
    pub to: JobState,
}

impl std::fmt::Display for TransitionError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "illegal job transition {:?} -> {:?}", self.from, self.to)
    }
}

impl std::error::Error for TransitionError {}

/// All jobs of one service instance. Every mutation happens under one lock.
#[derive(Debug)]
pub struct JobStore {
    data_dir: PathBuf,
    jobs: Mutex<HashMap<String, Job>>,
}

impl JobStore {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self { data_dir: data_dir.into(), jobs: Mutex::new(HashMap::new()) }
    }

    pub fn data_dir(&self) -> &Path {
        &self.data_dir
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<String, Job>> {
        self.jobs.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Register a queued job and return a snapshot of it.
    pub fn create(&self, config: AnalysisConfig) -> Job {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let job = Job {
            dir: self.data_dir.join(&id),
            id: id.clone(),
            state: JobState::Queued,
            progress: 0.0,
            config,
            created: now(),
            completed: None,
            error: None,
        };
        self.lock().insert(id, job.clone());
        job
    }

    pub fn get(&self, id: &str) -> Option<Job> {
        self.lock().get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn advance(&self, id: &str, to: JobState, error: Option<String>) -> Result<(), TransitionError> {
        let mut jobs = self.lock();
        let Some(job) = jobs.get_mut(id) else {
            return Err(TransitionError { from: JobState::Failed, to });
        };
        if !job.state.can_advance_to(to) {
            return Err(TransitionError { from: job.state, to });
        }
        job.state = to;
        if to == JobState::Done {
            job.progress = 1.0;
        }
        if to.is_terminal() {
            job.completed = Some(now());
        }
        job.error = error;
        Ok(())
    }

    pub fn start(&self, id: &str) -> Result<(), TransitionError> {
        self.advance(id, JobState::Running, None)
    }

    pub fn finish(&self, id: &str) -> Result<(), TransitionError> {
        self.advance(id, JobState::Done, None)
    }

    pub fn fail(&self, id: &str, error: impl Into<String>) -> Result<(), TransitionError> {
        self.advance(id, JobState::Failed, Some(error.into()))
    }

    /// Progress only moves up and only while running.
    pub fn set_progress(&self, id: &str, fraction: f64) {
        if let Some(job) = self.lock().get_mut(id) {
            if job.state == JobState::Running && fraction > job.progress {
                job.progress = fraction.min(1.0);
            }
        }
    }

    /// Drop finished jobs older than `retention` and return their directories.
    pub fn expire(&self, retention: Duration) -> Vec<PathBuf> {
        let cutoff = now() - retention.as_secs_f64();
        let mut jobs = self.lock();
        let old: Vec<String> =
            jobs.values().filter(|j| j.completed.is_some_and(|t| t <= cutoff)).map(|j| j.id.clone()).collect();
        old.iter().filter_map(|id| jobs.remove(id)).map(|j| j.dir).collect()
    }
}
