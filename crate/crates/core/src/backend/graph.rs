//! Interference graph, leak constraints and coalescing.
//!
//! The graph has one node per vreg. A write interferes with everything live
//! after it (except the source of a copy). Leak mitigation adds extra edges
//! so that no vreg ending in one member of a leaky pair can hand a physical
//! register directly to a vreg starting with the other member — the
//! allocator treats these like any other edge — plus coalescing bans so such
//! a pair can never merge into one node.

use std::collections::{HashMap, HashSet};

use crate::bitset::BitSet;
use crate::hdleaks::BackendShareInfo;

use super::liveness::Liveness;
use super::machine::{MOperand, MachineFunction, VReg, VRegEndpoints};

#[derive(Debug, Clone)]
pub struct InterferenceGraph {
    pub n: usize,
    /// Symmetric adjacency; includes the extra constraint edges.
    pub adj: Vec<HashSet<VReg>>,
    /// The constraint edges alone (for reports and checks).
    pub extra: Vec<HashSet<VReg>>,
    /// Pairs that must never coalesce.
    pub bans: Vec<HashSet<VReg>>,
    /// `(instr index, dst, src)` of register-to-register moves.
    pub moves: Vec<(usize, VReg, VReg)>,
}

impl InterferenceGraph {
    pub fn interferes(&self, a: VReg, b: VReg) -> bool {
        self.adj[a as usize].contains(&b)
    }

    pub fn add_edge(&mut self, a: VReg, b: VReg) {
        if a != b {
            self.adj[a as usize].insert(b);
            self.adj[b as usize].insert(a);
        }
    }

    fn add_extra_edge(&mut self, a: VReg, b: VReg) {
        if a != b {
            self.add_edge(a, b);
            self.extra[a as usize].insert(b);
            self.extra[b as usize].insert(a);
        }
    }

    fn ban(&mut self, a: VReg, b: VReg) {
        if a != b {
            self.bans[a as usize].insert(b);
            self.bans[b as usize].insert(a);
        }
    }

    pub fn banned(&self, a: VReg, b: VReg) -> bool {
        self.bans[a as usize].contains(&b)
    }

    /// Adjacency as bitsets, for the share relation.
    pub fn share_info(&self, mf: &MachineFunction) -> BackendShareInfo {
        let adjacency = self
            .adj
            .iter()
            .map(|set| {
                let mut bs = BitSet::new(self.n.max(1));
                for &v in set {
                    bs.insert(v as usize);
                }
                bs
            })
            .collect();
        BackendShareInfo {
            carriers: mf.carriers(),
            adjacency,
        }
    }
}

/// Build the interference graph from liveness: each register write draws
/// edges to everything live out of it, minus the copied value for moves.
pub fn build_interference(mf: &MachineFunction, live: &Liveness) -> InterferenceGraph {
    let n = mf.n_vregs as usize;
    let mut g = InterferenceGraph {
        n,
        adj: vec![HashSet::new(); n],
        extra: vec![HashSet::new(); n],
        bans: vec![HashSet::new(); n],
        moves: Vec::new(),
    };
    for (idx, ins) in mf.instrs.iter().enumerate() {
        let Some(d) = ins.def_reg() else { continue };
        let skip = ins.move_pair().map(|(_, s)| s);
        for l in live.live_out[idx].iter() {
            let l = l as VReg;
            if l != d && Some(l) != skip {
                g.add_edge(d, l);
            }
        }
        if let Some((dst, src)) = ins.move_pair() {
            g.moves.push((idx, dst, src));
        }
    }
    g
}

/// Install the leak constraints. A register reused across two vregs
/// transitions from the last value of the earlier to the first value of the
/// later, so for a leaky pair `{x, y}` an edge (and a coalescing ban) is
/// needed exactly between vregs ending in one member and vregs starting with
/// the other. Already-present edges are unchanged (the sets are idempotent),
/// and spill temporaries pick their constraints back up through their own
/// endpoints on the next round.
///
/// With `with_edges` off only the coalescing bans are installed; the
/// allocator uses that when the full edge set is uncolorable and the
/// remaining handovers will be broken by scrubs instead.
pub fn apply_leak_constraints(
    g: &mut InterferenceGraph,
    hdd: &[(usize, usize)],
    ends: &VRegEndpoints,
    with_edges: bool,
) {
    let mut starts_with: HashMap<usize, Vec<VReg>> = HashMap::new();
    let mut ends_with: HashMap<usize, Vec<VReg>> = HashMap::new();
    for v in 0..g.n {
        if let Some(f) = ends.first[v] {
            starts_with.entry(f).or_default().push(v as VReg);
        }
        if let Some(l) = ends.last[v] {
            ends_with.entry(l).or_default().push(v as VReg);
        }
    }
    let empty = Vec::new();
    let mut constrain = |g: &mut InterferenceGraph, from: usize, to: usize| {
        let tails = ends_with.get(&from).unwrap_or(&empty);
        let heads = starts_with.get(&to).unwrap_or(&empty);
        for &vi in tails {
            for &vj in heads {
                if vi != vj {
                    if with_edges {
                        g.add_extra_edge(vi, vj);
                    }
                    g.ban(vi, vj);
                }
            }
        }
    };
    for &(x, y) in hdd {
        constrain(g, x, y);
        constrain(g, y, x);
    }
}

/// Aggressive coalescing: merge move-related nodes that neither interfere
/// nor are banned, delete the moves, and rewrite the function. Merged nodes
/// take the union of edges and bans (conservative once moves disappear).
/// Returns the number of merged moves.
pub fn coalesce(g: &mut InterferenceGraph, mf: &mut MachineFunction) -> usize {
    let mut rep: Vec<VReg> = (0..g.n as VReg).collect();
    fn find(rep: &mut Vec<VReg>, v: VReg) -> VReg {
        let mut v = v;
        while rep[v as usize] != v {
            rep[v as usize] = rep[rep[v as usize] as usize];
            v = rep[v as usize];
        }
        v
    }

    let moves = g.moves.clone();
    let mut removed_instrs = Vec::new();
    let mut merged = 0;
    for (idx, dst, src) in moves {
        let rd = find(&mut rep, dst);
        let rs = find(&mut rep, src);
        if rd == rs {
            // Already identical: the move is redundant.
            removed_instrs.push(idx);
            continue;
        }
        if g.adj[rd as usize].contains(&rs) || g.bans[rd as usize].contains(&rs) {
            continue;
        }
        // Merge the higher-numbered rep into the lower for determinism.
        let (keep, gone) = if rd < rs { (rd, rs) } else { (rs, rd) };
        for &nb in &g.adj[gone as usize].clone() {
            let nb = find(&mut rep, nb);
            g.add_edge(keep, nb);
            g.adj[nb as usize].remove(&gone);
        }
        for &nb in &g.extra[gone as usize].clone() {
            let nb = find(&mut rep, nb);
            if nb != keep {
                g.extra[keep as usize].insert(nb);
                g.extra[nb as usize].insert(keep);
            }
            g.extra[nb as usize].remove(&gone);
        }
        for &nb in &g.bans[gone as usize].clone() {
            let nb = find(&mut rep, nb);
            if nb != keep {
                g.bans[keep as usize].insert(nb);
                g.bans[nb as usize].insert(keep);
            }
            g.bans[nb as usize].remove(&gone);
        }
        g.adj[gone as usize].clear();
        g.extra[gone as usize].clear();
        g.bans[gone as usize].clear();
        rep[gone as usize] = keep;
        removed_instrs.push(idx);
        merged += 1;
    }

    // Rewrite operands to representatives and drop the dead moves.
    let remap = |o: &mut MOperand, rep: &mut Vec<VReg>| {
        if let MOperand::Reg(r) = o {
            *r = find(rep, *r);
        }
    };
    let mut out = Vec::with_capacity(mf.instrs.len());
    for (idx, mut ins) in mf.instrs.drain(..).enumerate() {
        if removed_instrs.contains(&idx) {
            continue;
        }
        remap(&mut ins.dst, &mut rep);
        if let Some(src) = &mut ins.src {
            remap(src, &mut rep);
        }
        out.push(ins);
    }
    mf.instrs = out;
    g.moves.clear();
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::liveness::liveness;
    use crate::backend::machine::{lower, MOp, MachineInstr};
    use crate::ir::{parse_program_with_width, VarTable};

    fn build(src: &str) -> (MachineFunction, InterferenceGraph) {
        let p = parse_program_with_width(src, 1).unwrap();
        let vars = VarTable::build(&p);
        let mf = lower(&p, &vars);
        let live = liveness(&mf);
        let g = build_interference(&mf, &live);
        (mf, g)
    }

    const CHAIN: &str = "in m1 random\nin m2 random\nin k secret\n\
         t1 = xor m1 m2\nt2 = xor t1 k\nout t2";

    #[test]
    fn moves_do_not_interfere_with_their_source() {
        let (mf, g) = build(CHAIN);
        // vr1 is initialized from vr0 by a move; vr0 dies there.
        assert_eq!(g.moves.len(), 1);
        let (_, dst, src) = g.moves[0];
        assert!(!g.interferes(dst, src));
        let _ = mf;
    }

    #[test]
    fn interference_from_overlapping_lifetimes() {
        // t1 is used again later, so its vreg overlaps t2's.
        let src = "in m1 random\nin m2 random\nin k secret\n\
                   t1 = xor m1 m2\nt2 = xor t1 k\nt3 = and t1 t2\nout t3";
        let (_, g) = build(src);
        // The move target (t2's vreg) interferes with t1's vreg now.
        let (_, dst, src_v) = g.moves[0];
        assert!(g.interferes(dst, src_v));
    }

    #[test]
    fn extra_edges_and_bans_are_idempotent() {
        // Mitigated lowering of the masked-and kernel: one vreg ends in t1,
        // a later one starts with t2, and {t1, t2} is the leaky pair.
        let (_, vars, _, report, mf) = crate::backend::testutil::mitigated(
            "in k secret\nin m1 random\nin m2 random\nin m3 random\n\
             t1 = xor m1 m2\nt2 = xor t1 k\nt3 = and t2 m3\nout t3",
            1,
        );
        let live = liveness(&mf);
        let mut g = build_interference(&mf, &live);
        let ends = mf.endpoints();
        let t1 = vars.id("t1").unwrap();
        let t2 = vars.id("t2").unwrap();
        assert!(report.hdd.contains(&(t1, t2)));

        let before: usize = g.adj.iter().map(HashSet::len).sum();
        apply_leak_constraints(&mut g, &[(t1, t2)], &ends, true);
        let mid: usize = g.adj.iter().map(HashSet::len).sum();
        apply_leak_constraints(&mut g, &[(t1, t2)], &ends, true);
        let after: usize = g.adj.iter().map(HashSet::len).sum();
        assert!(mid > before, "constraint edge missing");
        assert_eq!(mid, after);

        // The edge runs from the vreg ending in t1 to the one starting with
        // t2, and it is also a coalescing ban.
        let vi = (0..g.n).find(|&v| ends.last[v] == Some(t1)).unwrap() as u32;
        let vj = (0..g.n).find(|&v| ends.first[v] == Some(t2)).unwrap() as u32;
        assert!(g.interferes(vi, vj));
        assert!(g.extra[vi as usize].contains(&vj));
        assert!(g.banned(vi, vj));
    }

    #[test]
    fn coalesce_merges_unconstrained_moves() {
        let (mut mf, mut g) = build(CHAIN);
        let n_before = mf.instrs.len();
        let merged = coalesce(&mut g, &mut mf);
        assert_eq!(merged, 1);
        assert_eq!(mf.instrs.len(), n_before - 1);
        // Every instruction now uses the representative vreg 0.
        for ins in &mf.instrs {
            for r in ins.used_regs().chain(ins.def_reg()) {
                assert_eq!(r, 0);
            }
        }
    }

    #[test]
    fn banned_moves_do_not_coalesce() {
        // Hand-built move whose target starts a different value than the
        // source ends with: the {a=0, b=1} constraint bans the merge.
        use crate::backend::machine::MachineInstr;
        let mut mf = MachineFunction {
            width: 1,
            instrs: vec![
                MachineInstr {
                    op: MOp::Mov,
                    dst: MOperand::Reg(0),
                    src: Some(MOperand::Slot(0)),
                    value: Some(0),
                },
                MachineInstr {
                    op: MOp::Mov,
                    dst: MOperand::Reg(1),
                    src: Some(MOperand::Reg(0)),
                    value: Some(1),
                },
                MachineInstr {
                    op: MOp::Mov,
                    dst: MOperand::Slot(1),
                    src: Some(MOperand::Reg(1)),
                    value: Some(1),
                },
            ],
            slots: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            n_vregs: 2,
            n_vars: 2,
        };
        let live = liveness(&mf);
        let mut g = build_interference(&mf, &live);
        apply_leak_constraints(&mut g, &[(0, 1)], &mf.endpoints(), true);
        assert!(g.banned(0, 1));
        let merged = coalesce(&mut g, &mut mf);
        assert_eq!(merged, 0);
        assert_eq!(mf.instrs.len(), 3);
    }

    #[test]
    fn interfering_moves_do_not_coalesce() {
        let src = "in m1 random\nin m2 random\nin k secret\n\
                   t1 = xor m1 m2\nt2 = xor t1 k\nt3 = and t1 t2\nout t3";
        let (mut mf, mut g) = build(src);
        let beforeern = mf.instrs.len();
        let merged = coalesce(&mut g, &mut mf);
        // The t1->t2 move cannot merge (t1 lives on); the t2->t3 move can.
        assert_eq!(merged, 1);
        assert_eq!(mf.instrs.len(), beforeern - 1);
    }

    #[test]
    fn merged_nodes_inherit_bans() {
        // vr0 -> vr1 -> vr2 move chain where vr2 starts a new value that
        // must not follow vr0's: the first merge (vr0, vr1) happens, and the
        // ban then blocks the second against the merged node.
        use crate::backend::machine::MachineInstr;
        let mov = |dst, src, value| MachineInstr {
            op: MOp::Mov,
            dst,
            src: Some(src),
            value: Some(value),
        };
        use MOperand::*;
        let mut mf = MachineFunction {
            width: 1,
            instrs: vec![
                mov(Reg(0), Slot(0), 0),
                mov(Reg(1), Reg(0), 0),
                mov(Reg(2), Reg(1), 1), // fabricated discontinuity
                mov(Slot(1), Reg(2), 1),
            ],
            slots: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            n_vregs: 3,
            n_vars: 2,
        };
        let live = liveness(&mf);
        let mut g = build_interference(&mf, &live);
        apply_leak_constraints(&mut g, &[(0, 1)], &mf.endpoints(), true);
        // last(vr0) = last(vr1) = value 0; first(vr2) = value 1.
        assert!(g.banned(0, 2));
        assert!(g.banned(1, 2));
        let merged = coalesce(&mut g, &mut mf);
        assert_eq!(merged, 1, "only the value-continuous move merges");
        // The ban survived onto the merged representative.
        assert!(g.banned(0, 2));
    }

    #[test]
    fn redundant_move_is_deleted_without_merge() {
        // mov vr0, vr0 after a prior merge collapses silently.
        let mut mf = MachineFunction {
            width: 1,
            instrs: vec![
                MachineInstr {
                    op: MOp::Mov,
                    dst: MOperand::Reg(0),
                    src: Some(MOperand::Slot(0)),
                    value: None,
                },
                MachineInstr {
                    op: MOp::Mov,
                    dst: MOperand::Reg(1),
                    src: Some(MOperand::Reg(0)),
                    value: None,
                },
                MachineInstr {
                    op: MOp::Mov,
                    dst: MOperand::Reg(2),
                    src: Some(MOperand::Reg(1)),
                    value: None,
                },
                MachineInstr {
                    op: MOp::Mov,
                    dst: MOperand::Slot(1),
                    src: Some(MOperand::Reg(2)),
                    value: None,
                },
            ],
            slots: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            n_vregs: 3,
            n_vars: 0,
        };
        let live = liveness(&mf);
        let mut g = build_interference(&mf, &live);
        let merged = coalesce(&mut g, &mut mf);
        assert_eq!(merged, 2);
        assert_eq!(mf.instrs.len(), 2);
    }
}
