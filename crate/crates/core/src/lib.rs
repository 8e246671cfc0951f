pub mod basis;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod expm;
pub mod models;
pub mod operator;
pub mod position;
pub mod report;
pub mod special;
