//! Command-line experiments for one-dimensional L²-TGV² denoising, built on
//! `tgv1d-core`.
//!
//! * [`cli`]: argument grammar.
//! * [`commands`]: the six commands and the exit-code contract
//!   (0 success, 1 verification failure, 2 usage or input error,
//!   3 non-convergence, 4 indeterminate regime).
//! * [`io`]: Signal, solution and CSV file formats.
//! * [`manifest`]: run manifests for replaying a command.
//! * [`sweep`]: thread-pool regime sweeps.
//! * [`plot`]: gnuplot scripts for regime maps.

pub mod cli;
pub mod commands;
pub mod io;
pub mod manifest;
pub mod plot;
pub mod sweep;
