pub mod elm;
pub mod error;
pub mod picard;
pub mod report;
pub mod ruled;
pub mod scenario;
pub mod suites;
pub mod theorems;
