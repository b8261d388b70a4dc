//! HW-sensitive variables and Hamming-distance leak pairs.
//!
//! A pair of values leaks if storing them in one register in sequence makes
//! the bit-flip depend on the secret, i.e. the type of their xor is unknown.
//! Pairs fall in two classes with different mitigations:
//!
//! * `hdd` — unordered pairs defined by distinct instructions. The
//!   allocator can keep them apart (extra interference edge, coalescing
//!   ban).
//! * `hds` — ordered (result, operand) pairs of one two-address
//!   instruction. The ISA ties these to one register, so only rewriting the
//!   instruction itself (memory-destination form) removes the transition.
//!
//! A tied pair is typed by rewriting the transition expression per operator
//! (`(a^b)^a = b`, `(a&b)^a = a&!b`, `(a|b)^a = !a&b`), which is strictly
//! more precise than typing the syntactic xor; the rewrite type is used for
//! such a pair wherever it appears. Pairs whose values can never occupy the
//! same physical register are filtered out when backend information is
//! available (the share relation).

use std::collections::HashMap;
use std::fmt;

use crate::bitset::BitSet;
use crate::depsets::DepSets;
use crate::ir::{Op, Program, VarTable};
use crate::typeinfer::{hds_transition_type, type_of_xor_pair, DistType, TypeMap};

/// How the candidate pair set is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShareMode {
    /// Assume any two values may share a register.
    All,
    /// Use lowering and liveness to keep only pairs that actually can.
    Backend,
}

impl fmt::Display for ShareMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShareMode::All => "all",
            ShareMode::Backend => "backend",
        })
    }
}

/// Backend-derived co-location data: which virtual registers carry each
/// variable's value, and which virtual registers interfere.
#[derive(Debug, Clone)]
pub struct BackendShareInfo {
    /// Per variable id: the vregs that hold its value at some point.
    pub carriers: Vec<Vec<u32>>,
    /// Per vreg: adjacency over vregs (live ranges overlap).
    pub adjacency: Vec<BitSet>,
}

impl BackendShareInfo {
    fn vregs_may_share(&self, x: usize, y: usize) -> bool {
        self.carriers[x].iter().any(|&vi| {
            self.carriers[y]
                .iter()
                .any(|&vj| vi != vj && !self.adjacency[vi as usize].contains(vj as usize))
        })
    }
}

/// The share relation: which unordered variable pairs may end up in one
/// physical register. Tied (result, operand) pairs always may; the ISA
/// forces them together unless the instruction is rewritten.
pub struct SharePairs {
    pub mode: ShareMode,
    n_vars: usize,
    tied: HashMap<(usize, usize), (Op, usize)>,
    backend: Option<BackendShareInfo>,
}

/// Build the share relation. `backend` carries lowering results when
/// filtering is requested; `None` means the conservative "any pair" mode.
pub fn compute_share(
    p: &Program,
    vars: &VarTable,
    backend: Option<BackendShareInfo>,
) -> SharePairs {
    let mut tied = HashMap::new();
    for (idx, ins) in p.instructions.iter().enumerate() {
        let Some(b) = &ins.b else { continue };
        let v = vars.n_inputs() + idx;
        let a = vars.id(&ins.a).unwrap();
        let b = vars.id(b).unwrap();
        // Both operand positions: the allocator may tie either one.
        tied.insert(key(v, a), (ins.op, b));
        tied.entry(key(v, b)).or_insert((ins.op, a));
    }
    SharePairs {
        mode: if backend.is_some() {
            ShareMode::Backend
        } else {
            ShareMode::All
        },
        n_vars: vars.len(),
        tied,
        backend,
    }
}

fn key(x: usize, y: usize) -> (usize, usize) {
    (x.min(y), x.max(y))
}

impl SharePairs {
    pub fn may_share(&self, x: usize, y: usize) -> bool {
        if x == y {
            return false;
        }
        if self.tied.contains_key(&key(x, y)) {
            return true;
        }
        match &self.backend {
            None => true,
            Some(info) => info.vregs_may_share(x, y),
        }
    }

    /// `(op, other)` when `{x, y}` is a (result, operand) pair of one
    /// instruction; `other` is the remaining operand.
    pub fn tied_info(&self, x: usize, y: usize) -> Option<(Op, usize)> {
        self.tied.get(&key(x, y)).copied()
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Number of pairs in the relation (walks all pairs; reporting only).
    pub fn count(&self) -> u64 {
        let mut n = 0;
        for x in 0..self.n_vars {
            for y in (x + 1)..self.n_vars {
                if self.may_share(x, y) {
                    n += 1;
                }
            }
        }
        n
    }
}

/// One tied-operand leak: the transition between `operand` and `result`
/// within a single instruction is unknown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HdsLeak {
    pub result: usize,
    pub operand: usize,
    pub op: Op,
}

impl HdsLeak {
    /// Human-readable transition expression after the per-operator rewrite.
    pub fn rewrite(&self, vars: &VarTable, other: usize) -> String {
        let o = vars.name(other);
        let p = vars.name(self.operand);
        match self.op {
            Op::Xor => o.to_string(),
            Op::And => format!("{p} & !{o}"),
            Op::Or => format!("!{p} & {o}"),
            Op::GMul => format!("({p} * {o}) ^ {p}"),
            Op::Not => "const".to_string(),
        }
    }
}

/// Detection result over one program and share relation.
#[derive(Debug, Clone, Default)]
pub struct LeakReport {
    /// Variables whose own register value may depend on the secret.
    pub hw: Vec<usize>,
    /// Unordered cross-pairs `{v1, v2}` (stored sorted) whose transition is
    /// unknown.
    pub hdd: Vec<(usize, usize)>,
    /// Tied (result, operand) pairs whose rewritten transition is unknown.
    pub hds: Vec<HdsLeak>,
}

impl LeakReport {
    pub fn is_clean(&self) -> bool {
        self.hdd.is_empty() && self.hds.is_empty()
    }

    pub fn hdd_contains(&self, x: usize, y: usize) -> bool {
        self.hdd.contains(&key(x, y))
    }

    pub fn hds_contains(&self, result: usize, operand: usize) -> bool {
        self.hds
            .iter()
            .any(|h| h.result == result && h.operand == operand)
    }
}

/// Type of the register transition between two distinct values, using the
/// precise per-operator rewrite when the pair is tied to one instruction.
pub fn pair_transition_type(
    d: &DepSets,
    types: &TypeMap,
    share: &SharePairs,
    x: usize,
    y: usize,
) -> DistType {
    match share.tied_info(x, y) {
        Some((op, other)) => {
            // Operand ids always precede the result id (def before use).
            let operand = x.min(y);
            hds_transition_type(d, types, op, operand, other)
        }
        None => type_of_xor_pair(d, types, x, y),
    }
}

/// Compute the leak report: HW-sensitive variables, cross-instruction pairs
/// and tied-operand pairs, all filtered by the share relation.
pub fn detect(
    p: &Program,
    vars: &VarTable,
    d: &DepSets,
    types: &TypeMap,
    share: &SharePairs,
) -> LeakReport {
    let mut report = LeakReport::default();
    for v in vars.ids() {
        if types.of(v) == DistType::Ukd {
            report.hw.push(v);
        }
    }

    // Tied pairs, in program order.
    for (idx, ins) in p.instructions.iter().enumerate() {
        if ins.b.is_none() {
            continue;
        }
        let v = vars.n_inputs() + idx;
        let mut seen = Vec::new();
        for operand in ins.operands() {
            let o = vars.id(operand).unwrap();
            if seen.contains(&o) {
                continue;
            }
            seen.push(o);
            let (op, other) = share.tied_info(v, o).unwrap();
            if hds_transition_type(d, types, op, o, other) == DistType::Ukd {
                report.hds.push(HdsLeak {
                    result: v,
                    operand: o,
                    op,
                });
            }
        }
    }

    // All shareable unordered pairs.
    for x in 0..vars.len() {
        for y in (x + 1)..vars.len() {
            if !share.may_share(x, y) {
                continue;
            }
            if pair_transition_type(d, types, share, x, y) == DistType::Ukd {
                report.hdd.push((x, y));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, sample_config};
    use crate::ir::parse_program_with_width;
    use crate::typeinfer::{infer_types, EncodingScheme};

    fn analyzed(src: &str, width: u32) -> (Program, VarTable, DepSets, TypeMap) {
        let p = parse_program_with_width(src, width).unwrap();
        let vars = VarTable::build(&p);
        let d = DepSets::compute(&p, &vars);
        let t = infer_types(&p, &vars, &d, EncodingScheme::default());
        (p, vars, d, t)
    }

    const MASKED_AND: &str = "in k secret\nin m1 random\nin m2 random\nin m3 random\n\
        t1 = xor m1 m2\nt2 = xor t1 k\nt3 = and t2 m3\nout t3";

    #[test]
    fn unfiltered_share_holds_all_pairs() {
        let (p, vars, _, _) = analyzed(MASKED_AND, 1);
        let share = compute_share(&p, &vars, None);
        assert_eq!(share.count(), 21); // C(7,2)
        assert!(share.may_share(0, 6));
        assert!(!share.may_share(3, 3));
    }

    #[test]
    fn masked_and_report() {
        let (p, vars, d, t) = analyzed(MASKED_AND, 1);
        let share = compute_share(&p, &vars, None);
        let report = detect(&p, &vars, &d, &t, &share);
        let id = |n| vars.id(n).unwrap();

        assert_eq!(report.hw, vec![id("k")]);
        // The t1/t2 pair leaks (transition = k) and is both a cross pair and
        // a tied pair of the defining xor.
        assert!(report.hdd_contains(id("t1"), id("t2")));
        assert!(report.hds_contains(id("t2"), id("t1")));
        // (t3, t2) rewrites to t2 & !m3 which is secret independent.
        assert!(!report.hds_contains(id("t3"), id("t2")));
        assert!(!report.hdd_contains(id("t2"), id("t3")));
        // (t2, k) rewrites to t1: uniform, clean.
        assert!(!report.hds_contains(id("t2"), id("k")));
    }

    #[test]
    fn secure_xor_report() {
        let src = "in txt public\nin key secret\nin mask1 random\n\
                   mk = xor mask1 key\nt = xor txt mk\nout mask1, t";
        let (p, vars, d, t) = analyzed(src, 1);
        let share = compute_share(&p, &vars, None);
        let report = detect(&p, &vars, &d, &t, &share);
        let id = |n| vars.id(n).unwrap();
        // Pairing mk with mask1 leaves exactly the key as the transition.
        assert!(report.hds_contains(id("mk"), id("mask1")));
        // Pairing mk with key transitions by mask1: clean.
        assert!(!report.hds_contains(id("mk"), id("key")));
    }

    #[test]
    fn secure_xor_shares_pairs() {
        let src = "in txt public\nin key secret\nin mask1 random\nin mask2 random\n\
                   mk = xor mask1 key\nt1 = xor txt mk\nt2 = xor t1 mask2\n\
                   t3 = xor t2 mask1\nout mask2, t3";
        let (p, vars, d, t) = analyzed(src, 1);
        let share = compute_share(&p, &vars, None);
        let report = detect(&p, &vars, &d, &t, &share);
        let id = |n| vars.id(n).unwrap();
        for (a, b) in [("mask1", "mk"), ("mask1", "t1"), ("mask2", "t3")] {
            assert!(
                report.hdd_contains(id(a), id(b)),
                "expected pair ({a}, {b})"
            );
        }
        // The re-randomized chain itself is clean between steps.
        assert!(!report.hdd_contains(id("t1"), id("t2")));
        assert!(!report.hdd_contains(id("t2"), id("t3")));
    }

    #[test]
    fn filtered_share_is_a_subset_and_report_shrinks() {
        // Hand-built filter: t2's and t3's carriers interfere; inputs and k
        // are never register resident.
        let (p, vars, d, t) = analyzed(MASKED_AND, 1);
        let n = vars.len();
        let mut carriers = vec![Vec::new(); n];
        let id = |name| vars.id(name).unwrap();
        carriers[id("t1")] = vec![0];
        carriers[id("t2")] = vec![1];
        carriers[id("t3")] = vec![2];
        let mut adjacency = vec![BitSet::new(4); 3];
        adjacency[1].insert(2);
        adjacency[2].insert(1);
        let filtered = compute_share(
            &p,
            &vars,
            Some(BackendShareInfo {
                carriers,
                adjacency,
            }),
        );
        let unfiltered = compute_share(&p, &vars, None);
        assert!(filtered.count() < unfiltered.count());

        let rf = detect(&p, &vars, &d, &t, &filtered);
        let ru = detect(&p, &vars, &d, &t, &unfiltered);
        for pair in &rf.hdd {
            assert!(ru.hdd.contains(pair), "filtered pair missing unfiltered");
        }
        assert_eq!(rf.hds, ru.hds, "tied pairs are mode independent");
        // k has no carrier: its only surviving pairs are tied ones, and
        // (t2, k) is clean, so k vanishes from the cross pairs.
        assert!(!rf.hdd.iter().any(|&(a, b)| a == id("k") || b == id("k")));
    }

    #[test]
    fn filtering_monotone_on_generated_programs() {
        for seed in 0..40 {
            let p = generate(&sample_config(seed));
            let vars = VarTable::build(&p);
            let d = DepSets::compute(&p, &vars);
            let t = infer_types(&p, &vars, &d, EncodingScheme::default());
            let unfiltered = compute_share(&p, &vars, None);
            let ru = detect(&p, &vars, &d, &t, &unfiltered);
            // Degenerate filter: no carriers at all. Tied pairs must survive.
            let empty = compute_share(
                &p,
                &vars,
                Some(BackendShareInfo {
                    carriers: vec![Vec::new(); vars.len()],
                    adjacency: Vec::new(),
                }),
            );
            let rf = detect(&p, &vars, &d, &t, &empty);
            for pair in &rf.hdd {
                assert!(ru.hdd.contains(pair), "seed {seed}");
            }
            assert_eq!(rf.hds, ru.hds, "seed {seed}");
        }
    }
}
