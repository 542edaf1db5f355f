//! Structural analysis of generated SQL: canonical query keys, per-question
//! structure statistics, robustness under input perturbations, and a
//! deterministic compiler from a JSON query representation to SQLite SQL.

pub mod canon;
pub mod sql;
pub mod ir;
pub mod metrics;
pub mod robustness;
pub mod schema;
pub mod store;
