//! Graph-coloring register allocation with iterated spilling.
//!
//! Simplify/select in the classic style: repeatedly remove the
//! lowest-numbered node of insignificant degree; when none exists, pick the
//! cheapest spill candidate (lowest uses-to-degree ratio) and remove it
//! optimistically. Selection pops the stack and assigns the lowest free
//! color; nodes that cannot be colored are spilled for real — their uses are
//! folded to memory operands where the instruction allows it, and short
//! reload/store temporaries are inserted otherwise — and allocation reruns
//! on the rewritten code. Constraint edges count like ordinary edges
//! throughout. Spill temporaries must color; if one cannot, the register
//! count is simply too small.

use std::collections::HashSet;

use super::graph::{apply_leak_constraints, build_interference, coalesce, InterferenceGraph};
use super::liveness::liveness;
use super::machine::{CompileError, MOp, MOperand, MachineFunction, MachineInstr, Slot, VReg};

/// Final register assignment. Vregs no longer present in the code (merged
/// away or fully spilled) have no color.
#[derive(Debug, Clone)]
pub struct Allocation {
    pub assign: Vec<Option<u8>>,
    /// Original vregs that were spilled, with their slots.
    pub spilled: Vec<(VReg, Slot)>,
    pub regs: u32,
    /// Register scrubs inserted because the full constraint edge set was
    /// uncolorable (zero whenever the edges could be honored directly).
    pub scrubs: usize,
}

impl Allocation {
    pub fn reg_of(&self, v: VReg) -> Option<u8> {
        self.assign.get(v as usize).copied().flatten()
    }
}

enum ColorOutcome {
    Colored(Vec<Option<u8>>),
    Spill(Vec<VReg>),
}

fn color(
    g: &InterferenceGraph,
    regs: u32,
    present: &[bool],
    uses: &[u32],
    is_temp: &[bool],
) -> Result<ColorOutcome, CompileError> {
    let n = g.n;
    let mut degree: Vec<usize> = (0..n)
        .map(|v| g.adj[v].iter().filter(|&&nb| present[nb as usize]).count())
        .collect();
    let mut removed: Vec<bool> = (0..n).map(|v| !present[v]).collect();
    let mut remaining = present.iter().filter(|&&p| p).count();
    let mut stack: Vec<(usize, bool)> = Vec::new();

    while remaining > 0 {
        let simple = (0..n).find(|&v| !removed[v] && degree[v] < regs as usize);
        let (picked, potential) = match simple {
            Some(v) => (v, false),
            None => {
                // Chaitin cost: lowest uses/degree, then lowest index; spill
                // temporaries are never candidates.
                let cand = (0..n)
                    .filter(|&v| !removed[v] && !is_temp[v])
                    .min_by(|&a, &b| {
                        let lhs = uses[a] as u64 * degree[b] as u64;
                        let rhs = uses[b] as u64 * degree[a] as u64;
                        lhs.cmp(&rhs).then(a.cmp(&b))
                    });
                match cand {
                    Some(v) => (v, true),
                    None => return Err(CompileError::RegisterPressure { regs }),
                }
            }
        };
        removed[picked] = true;
        remaining -= 1;
        for &nb in &g.adj[picked] {
            degree[nb as usize] = degree[nb as usize].saturating_sub(1);
        }
        stack.push((picked, potential));
    }

    let mut assign: Vec<Option<u8>> = vec![None; n];
    let mut spills = Vec::new();
    for &(v, potential) in stack.iter().rev() {
        let taken: HashSet<u8> = g.adj[v]
            .iter()
            .filter_map(|&nb| assign[nb as usize])
            .collect();
        match (0..regs as u8).find(|c| !taken.contains(c)) {
            Some(c) => assign[v] = Some(c),
            None => {
                debug_assert!(potential, "low-degree node failed to color");
                spills.push(v as VReg);
            }
        }
    }
    if spills.is_empty() {
        Ok(ColorOutcome::Colored(assign))
    } else {
        spills.sort_unstable();
        Ok(ColorOutcome::Spill(spills))
    }
}

/// Rewrite the function so each spilled vreg lives in a fresh slot: source
/// uses become memory operands when the instruction allows one, otherwise a
/// reload temporary; definitions are stored back right away.
fn insert_spill_code(
    mf: &mut MachineFunction,
    spills: &[VReg],
    is_temp: &mut Vec<bool>,
    log: &mut Vec<(VReg, Slot)>,
) {
    let mut slot_of: Vec<Option<Slot>> = vec![None; mf.n_vregs as usize];
    for &v in spills {
        let slot = mf.fresh_slot(format!("spill_vr{v}"));
        slot_of[v as usize] = Some(slot);
        log.push((v, slot));
    }
    // Value each spilled vreg currently holds, for carrier metadata on the
    // inserted loads and stores.
    let mut cur_value: Vec<Option<usize>> = vec![None; mf.n_vregs as usize];

    let old = std::mem::take(&mut mf.instrs);
    let mut out = Vec::with_capacity(old.len() + spills.len() * 2);
    for mut ins in old {
        // Fold or reload a spilled source.
        if let Some(MOperand::Reg(s)) = ins.src {
            if let Some(slot) = slot_of[s as usize] {
                if !ins.dst.is_slot() {
                    ins.src = Some(MOperand::Slot(slot));
                } else {
                    let tmp = mf.fresh_vreg();
                    is_temp.push(true);
                    cur_value.push(None);
                    out.push(MachineInstr {
                        op: MOp::Mov,
                        dst: MOperand::Reg(tmp),
                        src: Some(MOperand::Slot(slot)),
                        value: cur_value[s as usize],
                    });
                    ins.src = Some(MOperand::Reg(tmp));
                }
            }
        }
        // Rewrite a spilled destination.
        if let MOperand::Reg(d) = ins.dst {
            if let Some(slot) = slot_of[d as usize] {
                let tmp = mf.fresh_vreg();
                is_temp.push(true);
                cur_value.push(None);
                if ins.reads_dst() {
                    out.push(MachineInstr {
                        op: MOp::Mov,
                        dst: MOperand::Reg(tmp),
                        src: Some(MOperand::Slot(slot)),
                        value: cur_value[d as usize],
                    });
                }
                cur_value[d as usize] = ins.value;
                ins.dst = MOperand::Reg(tmp);
                out.push(ins.clone());
                out.push(MachineInstr {
                    op: MOp::Mov,
                    dst: MOperand::Slot(slot),
                    src: Some(MOperand::Reg(tmp)),
                    value: ins.value,
                });
                continue;
            }
            cur_value[d as usize] = ins.value;
        }
        out.push(ins);
    }
    mf.instrs = out;
    while is_temp.len() < mf.n_vregs as usize {
        is_temp.push(false);
    }
}

/// The allocation driver: liveness, interference, leak constraints,
/// coalescing, coloring; on spills, rewrite and start over. The constraint
/// edges are re-derived each round so spill temporaries inherit the edges of
/// the value they carry.
///
/// The conservative pair set can exceed any register file (mutually leaky
/// cliques larger than `regs`), in which case no coloring exists no matter
/// what spills. The driver then retries without the constraint edges and
/// breaks every surviving leaky register handover with a scrub (`xor r, r`):
/// the dying value is already register safe, the register then holds the
/// constant zero, and the next occupant starts from a clean state.
pub fn allocate(
    mf: MachineFunction,
    hdd: &[(usize, usize)],
    regs: u32,
    mitigate: bool,
) -> Result<(MachineFunction, Allocation), CompileError> {
    if regs == 0 {
        return Err(CompileError::RegisterPressure { regs });
    }
    let attempts: &[bool] = if mitigate { &[true, false] } else { &[false] };
    let mut last_err = CompileError::RegisterPressure { regs };
    for &with_edges in attempts {
        match allocate_rounds(mf.clone(), hdd, regs, mitigate, with_edges) {
            Ok((mut mf, mut alloc)) => {
                peephole(&mut mf, &alloc);
                if mitigate && !with_edges {
                    alloc.scrubs = scrub_leaky_handovers(&mut mf, &alloc, hdd);
                }
                return Ok((mf, alloc));
            }
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// Drop physical no-ops after coloring: register moves whose sides share a
/// color, and a reload immediately following a store to the same slot into
/// the same physical register. The deleted destination is renamed to the
/// surviving vreg (same color, provably holding the same value), so the
/// code stays analyzable.
fn peephole(mf: &mut MachineFunction, alloc: &Allocation) {
    let mut rename: Vec<VReg> = (0..mf.n_vregs).collect();
    fn find(rename: &mut [VReg], v: VReg) -> VReg {
        let mut v = v;
        while rename[v as usize] != v {
            rename[v as usize] = rename[rename[v as usize] as usize];
            v = rename[v as usize];
        }
        v
    }
    let old = std::mem::take(&mut mf.instrs);
    let mut out: Vec<MachineInstr> = Vec::with_capacity(old.len());
    for mut ins in old {
        if let MOperand::Reg(r) = &mut ins.dst {
            *r = find(&mut rename, *r);
        }
        if let Some(MOperand::Reg(r)) = &mut ins.src {
            *r = find(&mut rename, *r);
        }
        if let (MOp::Mov, MOperand::Reg(d), Some(MOperand::Reg(s))) = (ins.op, ins.dst, ins.src) {
            if d == s || alloc.reg_of(d) == alloc.reg_of(s) {
                rename[d as usize] = s;
                continue;
            }
        }
        if let (MOp::Mov, MOperand::Reg(d), Some(MOperand::Slot(sl))) = (ins.op, ins.dst, ins.src)
        {
            if let Some(prev) = out.last() {
                if let (MOp::Mov, MOperand::Slot(psl), Some(MOperand::Reg(ps))) =
                    (prev.op, prev.dst, prev.src)
                {
                    if psl == sl && alloc.reg_of(ps) == alloc.reg_of(d) {
                        rename[d as usize] = ps;
                        continue;
                    }
                }
            }
        }
        out.push(ins);
    }
    mf.instrs = out;
}

fn allocate_rounds(
    mut mf: MachineFunction,
    hdd: &[(usize, usize)],
    regs: u32,
    mitigate: bool,
    with_edges: bool,
) -> Result<(MachineFunction, Allocation), CompileError> {
    let mut is_temp = vec![false; mf.n_vregs as usize];
    let mut spill_log = Vec::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        if rounds > 64 {
            return Err(CompileError::RegisterPressure { regs });
        }
        let live = liveness(&mf);
        let mut g = build_interference(&mf, &live);
        if mitigate {
            apply_leak_constraints(&mut g, hdd, &mf.endpoints(), with_edges);
        }
        coalesce(&mut g, &mut mf);

        let mut present = vec![false; mf.n_vregs as usize];
        let mut uses = vec![0u32; mf.n_vregs as usize];
        for ins in &mf.instrs {
            if let Some(d) = ins.def_reg() {
                present[d as usize] = true;
            }
            for u in ins.used_regs() {
                present[u as usize] = true;
                uses[u as usize] += 1;
            }
        }
        match color(&g, regs, &present, &uses, &is_temp)? {
            ColorOutcome::Colored(assign) => {
                let alloc = Allocation {
                    assign,
                    spilled: spill_log,
                    regs,
                    scrubs: 0,
                };
                return Ok((mf, alloc));
            }
            ColorOutcome::Spill(spills) => {
                insert_spill_code(&mut mf, &spills, &mut is_temp, &mut spill_log);
            }
        }
    }
}

/// Walk each physical register's write timeline and zero it wherever one
/// leaky pair member would otherwise hand the register to the other.
fn scrub_leaky_handovers(
    mf: &mut MachineFunction,
    alloc: &Allocation,
    hdd: &[(usize, usize)],
) -> usize {
    use std::collections::HashSet;
    let leaky: HashSet<(usize, usize)> = hdd
        .iter()
        .flat_map(|&(x, y)| [(x, y), (y, x)])
        .collect();
    // Current (vreg, value) occupying each physical register.
    let mut occupant: Vec<Option<(VReg, Option<usize>)>> = vec![None; alloc.regs as usize];
    let old = std::mem::take(&mut mf.instrs);
    let mut out = Vec::with_capacity(old.len());
    let mut scrubs = 0;
    for ins in old {
        if let MOperand::Reg(d) = ins.dst {
            let phys = alloc.reg_of(d).expect("colored vreg") as usize;
            match occupant[phys] {
                Some((prev_vreg, Some(prev_val))) if prev_vreg != d => {
                    let incoming = ins.value;
                    if incoming.is_some_and(|w| leaky.contains(&(prev_val, w))) {
                        // Zero through the dying occupant's vreg: same
                        // physical effect, and it only extends a dead range
                        // forward, which cannot invalidate the coloring.
                        out.push(MachineInstr {
                            op: MOp::Xor,
                            dst: MOperand::Reg(prev_vreg),
                            src: Some(MOperand::Reg(prev_vreg)),
                            value: None,
                        });
                        scrubs += 1;
                    }
                }
                _ => {}
            }
            occupant[phys] = Some((d, ins.value));
        }
        out.push(ins);
    }
    mf.instrs = out;
    scrubs
}

/// Check a finished allocation: every register operand is colored inside
/// the register file, no interfering pair (recomputed on the final code)
/// shares a color — including the constraint edges when the allocator
/// honored them directly — and no register's write timeline steps through a
/// leaky value pair without a scrub in between.
pub fn verify_allocation(
    mf: &MachineFunction,
    alloc: &Allocation,
    hdd: &[(usize, usize)],
    mitigate: bool,
) -> Result<(), String> {
    let live = liveness(mf);
    let mut g = build_interference(mf, &live);
    if mitigate && alloc.scrubs == 0 {
        apply_leak_constraints(&mut g, hdd, &mf.endpoints(), true);
    }
    for ins in &mf.instrs {
        for r in ins.used_regs().chain(ins.def_reg()) {
            match alloc.reg_of(r) {
                None => return Err(format!("vr{r} has no register")),
                Some(c) if c as u32 >= alloc.regs => {
                    return Err(format!("vr{r} colored r{c} out of range"))
                }
                _ => {}
            }
        }
    }
    for v in 0..g.n {
        let Some(cv) = alloc.reg_of(v as VReg) else { continue };
        for &nb in &g.adj[v] {
            if let Some(cn) = alloc.reg_of(nb) {
                if cv == cn {
                    let kind = if g.extra[v].contains(&nb) {
                        "constraint"
                    } else {
                        "interference"
                    };
                    return Err(format!("vr{v} and vr{nb} share r{cv} across a {kind} edge"));
                }
            }
        }
    }
    if mitigate {
        // Timeline check: consecutive tagged values in one physical register
        // never form a leaky pair (scrubs reset the register to a constant).
        use std::collections::HashSet;
        let leaky: HashSet<(usize, usize)> = hdd
            .iter()
            .flat_map(|&(x, y)| [(x, y), (y, x)])
            .collect();
        let mut cur: Vec<Option<usize>> = vec![None; alloc.regs as usize];
        for (idx, ins) in mf.instrs.iter().enumerate() {
            if let MOperand::Reg(d) = ins.dst {
                let phys = alloc.reg_of(d).unwrap() as usize;
                if let (Some(u), Some(w)) = (cur[phys], ins.value) {
                    if leaky.contains(&(u, w)) {
                        return Err(format!(
                            "instr {idx}: r{phys} transitions through a leaky pair"
                        ));
                    }
                }
                cur[phys] = ins.value;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::machine::lower;
    use crate::ir::{parse_program_with_width, VarTable};

    fn lowered(src: &str) -> (MachineFunction, VarTable) {
        let p = parse_program_with_width(src, 1).unwrap();
        let vars = VarTable::build(&p);
        (lower(&p, &vars), vars)
    }

    const MASKED_AND: &str = "in k secret\nin m1 random\nin m2 random\nin m3 random\n\
        t1 = xor m1 m2\nt2 = xor t1 k\nt3 = and t2 m3\nout t3";

    #[test]
    fn single_vreg_takes_lowest_register() {
        let (mf, _) = lowered("in a public\nin b public\nt = xor a b\nout t");
        let (mf, alloc) = allocate(mf, &[], 2, false).unwrap();
        let r: Vec<_> = mf
            .instrs
            .iter()
            .filter_map(|i| i.def_reg())
            .map(|v| alloc.reg_of(v).unwrap())
            .collect();
        assert!(r.iter().all(|&c| c == 0));
        assert!(alloc.spilled.is_empty());
    }

    #[test]
    fn constrained_pair_gets_distinct_registers() {
        // Mitigated lowering: t1's vreg ends in t1, t3's group loads t2.
        // Without the extra edge their disjoint lifetimes would share r0.
        let (_, vars, _, report, mf) = crate::backend::testutil::mitigated(MASKED_AND, 1);
        let hdd = report.hdd.clone();
        let (mf, alloc) = allocate(mf, &hdd, 4, true).unwrap();
        verify_allocation(&mf, &alloc, &hdd, true).unwrap();
        let ends = mf.endpoints();
        let t1 = vars.id("t1").unwrap();
        let t2 = vars.id("t2").unwrap();
        let vi = (0..mf.n_vregs as usize)
            .find(|&v| ends.last[v] == Some(t1))
            .unwrap() as u32;
        let vj = (0..mf.n_vregs as usize)
            .find(|&v| ends.first[v] == Some(t2))
            .unwrap() as u32;
        assert_ne!(alloc.reg_of(vi).unwrap(), alloc.reg_of(vj).unwrap());
    }

    #[test]
    fn uncoalesced_chain_fits_one_register_unmitigated() {
        let (mf, _) = lowered(MASKED_AND);
        let (mf, alloc) = allocate(mf, &[], 1, false).unwrap();
        verify_allocation(&mf, &alloc, &[], false).unwrap();
        assert!(alloc.spilled.is_empty(), "coalescing should fold the chain");
    }

    #[test]
    fn pressure_forces_spills_and_allocation_stays_proper() {
        // Six simultaneously live values: everything feeds the final or.
        let src = "in m1 random\nin m2 random\nin m3 random\nin m4 random\n\
                   in m5 random\nin m6 random\n\
                   a = xor m1 m2\nb = xor m3 m4\nc = xor m5 m6\n\
                   d = and a b\ne = and d c\nf1 = or a b\nf2 = or f1 c\n\
                   g1 = or e f2\nout g1";
        let (mf, _) = lowered(src);
        let (mf, alloc) = allocate(mf, &[], 2, false).unwrap();
        verify_allocation(&mf, &alloc, &[], false).unwrap();
        assert!(!alloc.spilled.is_empty(), "expected spills at two registers");
        mf.check().map_err(|e| panic!("{e}")).ok();
    }

    #[test]
    fn impossible_pressure_is_reported() {
        let (mf, _) = lowered(MASKED_AND);
        assert!(matches!(
            allocate(mf, &[], 0, false),
            Err(CompileError::RegisterPressure { .. })
        ));
    }

    #[test]
    fn constraints_survive_spilling() {
        // Two registers put the constrained kernel under pressure; whatever
        // spills, the final coloring still honors every edge.
        let (_, _, _, report, mf) = crate::backend::testutil::mitigated(MASKED_AND, 1);
        let hdd = report.hdd.clone();
        match allocate(mf, &hdd, 2, true) {
            Ok((mf, alloc)) => {
                verify_allocation(&mf, &alloc, &hdd, true).unwrap();
            }
            Err(CompileError::RegisterPressure { .. }) => {
                // Also acceptable: the constraint is genuinely unsatisfiable
                // at this register count.
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
