//! Backward liveness over straight-line machine code.

use crate::bitset::BitSet;

use super::machine::{MachineFunction, VReg};

/// Per-vreg live ranges and per-instruction live-out sets.
#[derive(Debug, Clone)]
pub struct Liveness {
    /// `[def index, last use index]` per vreg; a dead vreg has `def == use`;
    /// `None` for vregs absent from the code.
    pub ranges: Vec<Option<(u32, u32)>>,
    /// Vregs live immediately after each instruction.
    pub live_out: Vec<BitSet>,
}

impl Liveness {
    /// Closed-interval intersection of two ranges. The interference builder
    /// is slightly finer (a move's source may die exactly where its
    /// destination is born); this is the coarse range view.
    pub fn overlap(&self, a: VReg, b: VReg) -> bool {
        match (self.ranges[a as usize], self.ranges[b as usize]) {
            (Some((d1, u1)), Some((d2, u2))) => d1.max(d2) <= u1.min(u2),
            _ => false,
        }
    }
}

/// Compute liveness. Uses are register reads (binary ops read their dst);
/// defs are register writes. Nothing is live out of the last instruction.
pub fn liveness(mf: &MachineFunction) -> Liveness {
    let n = mf.n_vregs as usize;
    let mut ranges: Vec<Option<(u32, u32)>> = vec![None; n];
    let mut live_out = vec![BitSet::new(n); mf.instrs.len()];
    let mut live = BitSet::new(n);
    for (idx, ins) in mf.instrs.iter().enumerate().rev() {
        live_out[idx] = live.clone();
        if let Some(d) = ins.def_reg() {
            // Record the def; keep the earliest (first write of the group).
            let i = idx as u32;
            ranges[d as usize] = Some(match ranges[d as usize] {
                Some((_, u)) => (i, u),
                None => (i, i),
            });
            if !ins.reads_dst() {
                live = remove(&live, d);
            }
        }
        for u in ins.used_regs() {
            live.insert(u as usize);
            let i = idx as u32;
            ranges[u as usize] = Some(match ranges[u as usize] {
                Some((d, last)) => (d.min(i), last.max(i)),
                None => (i, i),
            });
        }
    }
    Liveness { ranges, live_out }
}

fn remove(set: &BitSet, bit: VReg) -> BitSet {
    let mut s = set.clone();
    s.remove(bit as usize);
    s
}
