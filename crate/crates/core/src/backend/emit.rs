//! Assembly emission.
//!
//! One instruction per line in the textual target syntax, preceded by
//! directive comments binding inputs and outputs to slots:
//!
//! ```text
//! ; width 1 regs 4
//! ; in m1 s1 random
//! ; out t3 s5
//! mov r0, [s1]   ; r0 = m1
//! ```

use std::fmt::Write;

use crate::ir::VarTable;

use super::alloc::Allocation;
use super::machine::{MOperand, MachineFunction};

pub fn emit(mf: &MachineFunction, alloc: &Allocation, vars: &VarTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "; width {} regs {}", mf.width, alloc.regs);
    for (name, slot, class) in &mf.inputs {
        let _ = writeln!(out, "; in {name} s{slot} {class}");
    }
    for (name, slot) in &mf.outputs {
        let _ = writeln!(out, "; out {name} s{slot}");
    }
    let opnd = |o: MOperand| match o {
        MOperand::Reg(r) => format!(
            "r{}",
            alloc.reg_of(r).expect("emitted vreg must be colored")
        ),
        MOperand::Slot(s) => format!("[s{s}]"),
    };
    for ins in &mf.instrs {
        let text = match ins.src {
            Some(src) => format!("{} {}, {}", ins.op.name(), opnd(ins.dst), opnd(src)),
            None => format!("{} {}", ins.op.name(), opnd(ins.dst)),
        };
        match ins.value {
            Some(v) => {
                let loc = match ins.dst {
                    MOperand::Reg(r) => format!("r{}", alloc.reg_of(r).unwrap()),
                    MOperand::Slot(s) => format!("s{s}"),
                };
                let _ = writeln!(out, "{text:<24} ; {loc} = {}", vars.name(v));
            }
            None => {
                let _ = writeln!(out, "{text}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::alloc::allocate;
    use crate::backend::machine::lower;
    use crate::ir::parse_program_with_width;
    use crate::oracle::{parse_asm, simulate_asm};

    #[test]
    fn emitted_text_round_trips_through_the_oracle_parser() {
        let src = "in txt public\nin key secret\nt = xor txt key\nout t";
        let p = parse_program_with_width(src, 4).unwrap();
        let vars = VarTable::build(&p);
        let mf = lower(&p, &vars);
        let (mf, alloc) = allocate(mf, &[], 2, false).unwrap();
        let text = emit(&mf, &alloc, &vars);
        let asm = parse_asm(&text).unwrap();
        assert_eq!(asm.width, 4);
        assert_eq!(asm.regs, 2);
        assert_eq!(asm.inputs.len(), 2);
        assert_eq!(asm.instrs.len(), mf.instrs.len());
        // And it computes the xor.
        let trace = simulate_asm(&asm, &[0b0011, 0b0101], 4, 2).unwrap();
        assert_eq!(trace.outputs(&asm).unwrap(), vec![0b0110]);
    }

    #[test]
    fn memory_destination_lines_use_slot_first_syntax() {
        use crate::backend::machine::{MOp, MOperand, MachineInstr};
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
                    op: MOp::Xor,
                    dst: MOperand::Slot(1),
                    src: Some(MOperand::Reg(0)),
                    value: None,
                },
            ],
            slots: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            n_vregs: 1,
            n_vars: 0,
        };
        mf.fresh_slot("a".into());
        mf.fresh_slot("b".into());
        let alloc = Allocation {
            assign: vec![Some(0)],
            spilled: Vec::new(),
            regs: 1,
            scrubs: 0,
        };
        let p = parse_program_with_width("in a public\nout a", 1).unwrap();
        let vars = VarTable::build(&p);
        let text = emit(&mf, &alloc, &vars);
        assert!(text.contains("mov r0, [s0]"));
        assert!(text.contains("xor [s1], r0"));
    }
}
