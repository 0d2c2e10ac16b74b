//! Hospital KPI analytics engine.
//!
//! Ingests operational, clinical, financial and survey records, computes a
//! declarative KPI catalog per month or year-to-date, compares results with
//! goals, decomposes them along dimensions and raises threshold alerts.

pub mod alerting;
pub mod dataset;
pub mod domain;
pub mod dsl;
pub mod engine;
pub mod fixtures;
pub mod ingest;
pub mod number;
pub mod query;
