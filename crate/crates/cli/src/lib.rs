//! Support library for the `flatkahler` binary: the manifold file format.

pub mod format;
