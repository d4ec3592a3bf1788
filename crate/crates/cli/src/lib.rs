//! Text formats, the `pagid` command line and the verification runner.

pub mod app;
pub mod format;
pub mod verify;
