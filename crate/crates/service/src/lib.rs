//! Command line tool and local HTTP service over `dragflow-core`.
//!
//! Routes: `POST /preview`, `POST /jobs`, `GET /jobs/{id}`,
//! `DELETE /jobs/{id}`, `POST /eval`, `POST /intent`. The service binds to
//! loopback by default and keeps jobs in memory only.

pub mod api;
pub mod cli;
pub mod http;
pub mod jobs;

pub use http::{router, serve, AppState};
pub use jobs::{JobRecord, JobStatus, JobTable};
