//! The compiler backend: lowering, leak-aware instruction selection,
//! liveness, interference, coalescing, constrained graph-coloring register
//! allocation and assembly emission.

pub mod alloc;
pub mod emit;
pub mod graph;
pub mod liveness;
pub mod machine;

pub use alloc::{allocate, verify_allocation, Allocation};
pub use emit::emit;
pub use graph::{apply_leak_constraints, build_interference, coalesce, InterferenceGraph};
pub use liveness::{liveness, Liveness};
pub use machine::{
    lower, rewrite_hds, CompileError, MOp, MOperand, MachineFunction, MachineInstr,
    MitigationPlan, Slot, VReg, VRegEndpoints,
};
