//! Numerical laboratory for quantum open baker's maps.
//!
//! * [`cantor`]: alphabets, Cantor iterates `C_k`, neighborhoods and additive energy.
//! * [`qbaker`]: the unitary DFT, cutoffs, and the baker operator `B_N` (dense and matrix-free).
//! * [`spectral`]: eigenvalues, resonance counting, operator norms and `r_k`.
//! * [`fup`]: the fractal uncertainty quantities `t_k`, `tr((T*T)²)` and the inequality checks.
//! * [`theory`]: closed-form exponent functions for overlays.
//! * [`expio`]: configuration, orchestration and file output for the CLI.

pub mod cantor;
pub mod error;
pub mod expio;
pub mod fit;
pub mod fup;
pub mod qbaker;
pub mod spectral;
pub mod theory;

pub use num_complex::Complex64;

pub use cantor::{additive_energy, build_cantor, neighborhood, Alphabet, CantorSet, IndexSet};
pub use error::{Error, Result};
pub use expio::{Command, ExperimentConfig, RunManifest, RunOptions, RunOutcome};
pub use fup::{CheckReport, TkRecord, TraceRecord};
pub use qbaker::{BakerFamily, BakerSpec, ComplexOperator, ComplexVector, Cutoff, DenseOperator};
pub use spectral::{ExponentFit, SpectrumResult};
pub use theory::GapInputs;

/// Version string written into every output header and manifest.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
