//! In-memory job table and worker pool. Each job runs one single-threaded
//! drag loop; jobs are lost on restart.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread;

use dragflow_core::engine::{run_drag_observed, DragConfig, DragResult};
use dragflow_core::{Error, Point2};
use serde::{Deserialize, Serialize};

use crate::api::JobRequest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Done | JobStatus::Failed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobProgress {
    pub iteration: usize,
    pub total: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub status: JobStatus,
    pub config: DragConfig,
    pub progress: JobProgress,
    /// Loss per finished iteration so far.
    pub loss_trajectory: Vec<f64>,
    /// Per op, tracked content location per finished iteration so far.
    pub centroid_trajectory: Vec<Vec<Point2>>,
    /// Present iff `status` is `done`.
    pub result: Option<DragResult>,
    pub error: Option<String>,
}

impl JobRecord {
    fn advance(&mut self, to: JobStatus) {
        // status only moves forward
        if to > self.status {
            self.status = to;
        }
    }
}

struct Entry {
    record: JobRecord,
    cancel: Arc<AtomicBool>,
}

struct Job {
    id: String,
    request: JobRequest,
    cancel: Arc<AtomicBool>,
}

type Table = Arc<Mutex<HashMap<String, Entry>>>;

#[derive(Debug, PartialEq)]
pub enum CancelOutcome {
    /// Cancellation requested or applied; the record as it stands.
    Accepted(Box<JobRecord>),
    AlreadyFinished(JobStatus),
    NotFound,
}

/// Shared handle; clones refer to the same table and pool.
#[derive(Clone)]
pub struct JobTable {
    table: Table,
    queue: Sender<Job>,
    next_id: Arc<AtomicU64>,
}

impl JobTable {
    pub fn new(workers: usize) -> Self {
        let table: Table = Arc::default();
        let (tx, rx) = channel::<Job>();
        let rx = Arc::new(Mutex::new(rx));
        for i in 0..workers.max(1) {
            let rx = Arc::clone(&rx);
            let table = Arc::clone(&table);
            thread::Builder::new()
                .name(format!("drag-worker-{i}"))
                .spawn(move || worker(rx, table))
                .expect("spawn worker thread");
        }
        JobTable {
            table,
            queue: tx,
            next_id: Arc::new(AtomicU64::new(1)),
        }
    }

    /// Validates the request and queues it. Returns the new job id.
    pub fn submit(&self, request: JobRequest) -> dragflow_core::Result<String> {
        request.config.validate()?;
        if request.ops.is_empty() {
            return Err(Error::InvalidArgument("ops must not be empty".into()));
        }
        let id = format!("job-{:06}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let cancel = Arc::new(AtomicBool::new(false));
        let record = JobRecord {
            id: id.clone(),
            status: JobStatus::Queued,
            config: request.config.clone(),
            progress: JobProgress {
                iteration: 0,
                total: request.config.total_iterations(),
                fraction: 0.0,
            },
            loss_trajectory: Vec::new(),
            centroid_trajectory: vec![Vec::new(); request.ops.len()],
            result: None,
            error: None,
        };
        self.table.lock().unwrap().insert(
            id.clone(),
            Entry {
                record,
                cancel: Arc::clone(&cancel),
            },
        );
        let job = Job {
            id: id.clone(),
            request,
            cancel,
        };
        if self.queue.send(job).is_err() {
            return Err(Error::InvalidArgument("job workers have shut down".into()));
        }
        Ok(id)
    }

    pub fn get(&self, id: &str) -> Option<JobRecord> {
        self.table.lock().unwrap().get(id).map(|e| e.record.clone())
    }

    pub fn cancel(&self, id: &str) -> CancelOutcome {
        let mut table = self.table.lock().unwrap();
        let Some(entry) = table.get_mut(id) else {
            return CancelOutcome::NotFound;
        };
        if entry.record.status.is_terminal() {
            return CancelOutcome::AlreadyFinished(entry.record.status);
        }
        entry.cancel.store(true, Ordering::SeqCst);
        if entry.record.status == JobStatus::Queued {
            entry.record.advance(JobStatus::Failed);
            entry.record.error = Some("cancelled before start".into());
        }
        CancelOutcome::Accepted(Box::new(entry.record.clone()))
    }
}

fn update(table: &Table, id: &str, f: impl FnOnce(&mut JobRecord)) {
    if let Some(e) = table.lock().unwrap().get_mut(id) {
        f(&mut e.record);
    }
}

fn worker(rx: Arc<Mutex<Receiver<Job>>>, table: Table) {
    loop {
        let job = match rx.lock().unwrap().recv() {
            Ok(j) => j,
            Err(_) => return,
        };
        if job.cancel.load(Ordering::SeqCst) {
            continue;
        }
        update(&table, &job.id, |r| r.advance(JobStatus::Running));
        let JobRequest { z0, ops, config } = job.request;
        let outcome = run_drag_observed(&z0, &ops, &config, |p| {
            update(&table, &job.id, |r| {
                r.loss_trajectory.push(p.loss);
                for (traj, c) in r.centroid_trajectory.iter_mut().zip(&p.centroids) {
                    traj.push(*c);
                }
                r.progress = JobProgress {
                    iteration: p.iteration,
                    total: p.total,
                    fraction: p.iteration as f64 / p.total.max(1) as f64,
                };
            });
            !job.cancel.load(Ordering::SeqCst)
        });
        update(&table, &job.id, |r| match outcome {
            Ok(result) => {
                r.loss_trajectory = result.loss_trajectory.clone();
                r.centroid_trajectory = result.centroid_trajectory.clone();
                r.result = Some(result);
                r.advance(JobStatus::Done);
            }
            Err(e) => {
                r.error = Some(e.to_string());
                r.advance(JobStatus::Failed);
            }
        });
    }
}
