//! Report types shared between the `divcurve` binary and its tests.

pub mod report;
