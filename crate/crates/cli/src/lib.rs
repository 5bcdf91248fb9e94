//! Benchmark and verification harness around the `hecache` library:
//! synthetic workload generation, timed direct-vs-cached encryption
//! runs, a desk-scale federated aggregation round, and the invariant
//! suites behind the `verify` subcommand.

pub mod fl;
pub mod report;
pub mod runner;
pub mod verify;
pub mod workload;
