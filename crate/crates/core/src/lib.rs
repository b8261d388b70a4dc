//! Leak-aware compilation for masked cryptographic kernels.
//!
//! The crate takes straight-line word-level programs whose inputs are
//! annotated public/secret/random, infers a distribution type (RUD, SID or
//! UKD) for every variable, detects pairs of values that would leak through
//! register reuse under the Hamming-distance power model, and lowers the
//! program to two-address machine code whose register allocation is
//! constrained so the emitted assembly is leak free. An exhaustive
//! enumeration oracle certifies the result.
//!
//! Pipeline stages, in order:
//!
//! 1. [`ir`] — parse and validate the input program.
//! 2. [`depsets`] — per-variable support / unique-mask / dominant-mask sets.
//! 3. [`typeinfer`] — fixpoint type inference over an encoded fact base.
//! 4. [`hdleaks`] — HW-sensitive variables plus cross-instruction (hdd) and
//!    tied-operand (hds) leak pairs, filtered by the share relation.
//! 5. [`backend`] — lowering, leak-aware instruction selection, coalescing,
//!    graph-coloring allocation under extra interference edges, emission.
//! 6. [`oracle`] — ground truth by enumeration: distributions, type
//!    soundness, assembly simulation and leak certification.
//!
//! [`pipeline`] wires the stages together; [`generate`] builds seeded masked
//! test kernels and [`corpus`] embeds the worked example programs.

pub mod backend;
pub mod bitset;
pub mod corpus;
pub mod depsets;
pub mod generate;
pub mod gf256;
pub mod hdleaks;
pub mod ir;
pub mod oracle;
pub mod pipeline;
pub mod typeinfer;

pub use bitset::BitSet;
pub use depsets::DepSets;
pub use ir::{parse_program, parse_program_with_width, validate, InputClass, Op, Program, VarTable};
pub use typeinfer::{infer_types, DistType, EncodingScheme, TypeMap};
