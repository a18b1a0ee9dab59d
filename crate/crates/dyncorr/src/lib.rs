//! IO, file formats and batch-run plumbing around [`dyncorr_core`].
//!
//! The core crate owns the arithmetic; this crate owns everything that
//! touches the filesystem: series files (CSV and columnar-binary), plan and
//! scenario config files, the published-table fixture, CSV exports of
//! profiles and ledgers, run manifests, and the `dyncorr` CLI built on top.

pub mod export;
pub mod fixture;
pub mod formats;
pub mod manifest;
pub mod pipeline;
pub mod textcfg;
