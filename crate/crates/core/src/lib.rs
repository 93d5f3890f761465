//! Layered SVM-based intrusion detection for a multiagent remote-healthcare
//! simulation.
//!
//! The pipeline has four stages, each with its own module:
//!
//! 1. [`nslkdd`] — parse NSL-KDD traffic files, extract the ten DoS/U2R
//!    attacks, build the anomaly (binary) and misuse (11-class) train/test
//!    splits, and encode records into numeric vectors.
//! 2. [`svm`] — a from-scratch soft-margin C-SVC with RBF/linear kernels,
//!    trained by sequential minimal optimization, plus one-vs-one multiclass
//!    composition and portable model files.
//! 3. [`ids`] — the three detection layers (anomaly, misuse, hybrid) and the
//!    rule-based decision unit that combines the first two.
//! 4. [`agents`] — a deterministic discrete-event simulation of the five
//!    healthcare agents whose inbound messages are screened by the layer
//!    assigned to each agent.
//!
//! [`eval`] computes confusion matrices, detection/false-positive rates and
//! resource usage, and [`cli`] wires everything into the `careguard` binary.

pub mod agents;
pub mod cli;
pub mod eval;
pub mod ids;
pub mod nslkdd;
pub mod svm;
