//! Command-line front end: body specs, result documents, geometry export.

pub mod body_spec;
pub mod document;
pub mod export;
pub mod run;

pub use body_spec::{parse_body_spec, Body, SpecError};
pub use document::{ResultDocument, SCHEMA, SCHEMA_VERSION};
pub use run::{main_with_args, Cli};
