//! End-to-end drivers: analysis (detection only) and compilation
//! (detection, mitigation, allocation, emission), with per-phase timing.

use std::time::{Duration, Instant};

use crate::backend::{
    allocate, build_interference, emit, liveness, lower, rewrite_hds, Allocation, CompileError,
    MachineFunction, MitigationPlan,
};
use crate::depsets::DepSets;
use crate::hdleaks::{compute_share, detect, LeakReport, ShareMode, SharePairs};
use crate::ir::{Program, VarTable};
use crate::typeinfer::{infer_types, EncodingScheme, TypeMap};

#[derive(Debug, Clone)]
pub struct Config {
    pub regs: u32,
    pub encoding: EncodingScheme,
    pub share: ShareMode,
    pub mitigate: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            regs: 4,
            encoding: EncodingScheme::default(),
            share: ShareMode::Backend,
            mitigate: true,
        }
    }
}

/// Analysis results up to leak detection.
pub struct Analysis {
    pub vars: VarTable,
    pub depsets: DepSets,
    pub types: TypeMap,
    pub report: LeakReport,
    /// Size of the share relation the detector ran over.
    pub share_pairs: u64,
    pub phases: Vec<(&'static str, Duration)>,
}

impl Analysis {
    /// True if mitigation would have to change anything: a leaky pair, or a
    /// computed value that must stay out of registers.
    pub fn has_leaks(&self) -> bool {
        !self.report.is_clean()
            || self
                .report
                .hw
                .iter()
                .any(|&v| !self.vars.is_input(v))
    }
}

fn timed<T>(
    phases: &mut Vec<(&'static str, Duration)>,
    name: &'static str,
    f: impl FnOnce() -> T,
) -> T {
    let start = Instant::now();
    let out = f();
    phases.push((name, start.elapsed()));
    out
}

fn share_for(
    p: &Program,
    vars: &VarTable,
    mode: ShareMode,
    mf: Option<&MachineFunction>,
) -> SharePairs {
    match (mode, mf) {
        (ShareMode::All, _) | (_, None) => compute_share(p, vars, None),
        (ShareMode::Backend, Some(mf)) => {
            let live = liveness(mf);
            let g = build_interference(mf, &live);
            compute_share(p, vars, Some(g.share_info(mf)))
        }
    }
}

/// Run detection. With the backend share mode the plain lowering provides
/// the interference filter.
pub fn analyze(p: &Program, cfg: &Config) -> Analysis {
    let mut phases = Vec::new();
    let vars = VarTable::build(p);
    let depsets = timed(&mut phases, "depsets", || DepSets::compute(p, &vars));
    let types = timed(&mut phases, "typeinfer", || {
        infer_types(p, &vars, &depsets, cfg.encoding)
    });
    let mf = match cfg.share {
        ShareMode::Backend => Some(timed(&mut phases, "lower", || lower(p, &vars))),
        ShareMode::All => None,
    };
    let share = timed(&mut phases, "share", || {
        share_for(p, &vars, cfg.share, mf.as_ref())
    });
    let report = timed(&mut phases, "detect", || {
        detect(p, &vars, &depsets, &types, &share)
    });
    Analysis {
        share_pairs: share.count(),
        vars,
        depsets,
        types,
        report,
        phases,
    }
}

/// A finished compilation.
pub struct Compiled {
    pub analysis: Analysis,
    pub mf: MachineFunction,
    pub allocation: Allocation,
    pub asm: String,
    /// The cross-pair constraints handed to the allocator.
    pub constraints: Vec<(usize, usize)>,
}

/// Compile to leak-free assembly (or plain assembly with `mitigate` off).
///
/// Mitigated flow: detection runs unfiltered first so instruction selection
/// knows every tied leak and unsafe value; the code is lowered under those
/// constraints; the share filter and the cross-pair constraints are then
/// derived from the final instruction forms, and allocation runs with the
/// extra edges until it colors.
pub fn compile(p: &Program, cfg: &Config) -> Result<Compiled, CompileError> {
    let mut phases = Vec::new();
    let vars = VarTable::build(p);
    let depsets = timed(&mut phases, "depsets", || DepSets::compute(p, &vars));
    let types = timed(&mut phases, "typeinfer", || {
        infer_types(p, &vars, &depsets, cfg.encoding)
    });

    // Unfiltered pass: tied pairs and HW-sensitive values for selection.
    let full_share = compute_share(p, &vars, None);
    let full_report = timed(&mut phases, "detect", || {
        detect(p, &vars, &depsets, &types, &full_share)
    });

    let mf = timed(&mut phases, "lower", || -> Result<_, CompileError> {
        if cfg.mitigate {
            let plan = MitigationPlan::from_report(&types, &full_report);
            rewrite_hds(p, &vars, &plan)
        } else {
            Ok(lower(p, &vars))
        }
    })?;

    // Share filter and reported leaks, derived from the code being compiled.
    let share = timed(&mut phases, "share", || {
        share_for(p, &vars, cfg.share, Some(&mf))
    });
    let report = timed(&mut phases, "filter", || {
        detect(p, &vars, &depsets, &types, &share)
    });
    // Allocator constraints use the unfiltered pair set: the share filter
    // reflects pre-allocation liveness, and spilling shortens ranges enough
    // to make filtered-out pairs adjacent after all. Edges on pairs that
    // still interfere are no-ops, so this costs no coloring freedom.
    let constraints = if cfg.mitigate {
        full_report.hdd.clone()
    } else {
        Vec::new()
    };

    let (mf, allocation) = timed(&mut phases, "allocate", || {
        allocate(mf, &constraints, cfg.regs, cfg.mitigate)
    })?;
    let asm = timed(&mut phases, "emit", || emit(&mf, &allocation, &vars));

    let share_pairs = share.count();
    Ok(Compiled {
        analysis: Analysis {
            vars,
            depsets,
            types,
            report,
            share_pairs,
            phases,
        },
        mf,
        allocation,
        asm,
        constraints,
    })
}
