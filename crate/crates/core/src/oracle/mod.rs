//! Ground truth by exhaustive enumeration.
//!
//! Everything in this module is defined directly over program semantics:
//! values are enumerated over the full input space (bounded by a budget of
//! 24 total input bits), distributions are collected as exact multisets, and
//! a claim "this distribution does not depend on the secret" is checked by
//! literally comparing multisets across secret valuations. The static
//! analyses elsewhere in the crate are conservative; this module decides
//! what is actually true.

pub mod asm;

use std::collections::BTreeMap;
use std::fmt;

use crate::gf256;
use crate::ir::{InputClass, Op, Program, VarTable};
use crate::typeinfer::{DistType, TypeMap};

pub use asm::{certify_asm, parse_asm, simulate_asm, Asm, AsmTrace, CertifyReport, LeakFinding};

/// Exhaustive enumeration is capped at this many total input bits.
pub const BUDGET_BITS: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    /// `|inputs| * width` exceeds the enumeration budget.
    Budget { bits: u32, limit: u32 },
    /// An input valuation does not fit the word width.
    WidthMismatch { input: String, value: u64 },
    AsmParse { line: usize, msg: String },
    Sim { instr: usize, msg: String },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Budget { bits, limit } => {
                write!(f, "enumeration budget exceeded: {bits} input bits > {limit}")
            }
            OracleError::WidthMismatch { input, value } => {
                write!(f, "value {value:#x} for input `{input}` exceeds the word width")
            }
            OracleError::AsmParse { line, msg } => write!(f, "asm line {line}: {msg}"),
            OracleError::Sim { instr, msg } => write!(f, "asm instruction {instr}: {msg}"),
        }
    }
}

impl std::error::Error for OracleError {}

pub fn mask_of(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

pub fn hamming(v: u64) -> u32 {
    v.count_ones()
}

/// Forward-evaluate the program under one input valuation (values indexed by
/// input declaration order). Returns a value per variable id.
pub fn interpret(p: &Program, vars: &VarTable, vals: &[u64], width: u32) -> Result<Vec<u64>, OracleError> {
    assert_eq!(vals.len(), vars.n_inputs(), "one value per input");
    let mask = mask_of(width);
    for (i, &v) in vals.iter().enumerate() {
        if v & !mask != 0 {
            return Err(OracleError::WidthMismatch {
                input: vars.name(i).to_string(),
                value: v,
            });
        }
    }
    let mut values = Vec::with_capacity(vars.len());
    values.extend_from_slice(vals);
    for ins in &p.instructions {
        let a = values[vars.id(&ins.a).unwrap()];
        let v = match (&ins.b, ins.op) {
            (None, Op::Not) => !a & mask,
            (Some(b), op) => {
                let b = values[vars.id(b).unwrap()];
                match op {
                    Op::Xor => a ^ b,
                    Op::And => a & b,
                    Op::Or => a | b,
                    Op::GMul => {
                        debug_assert_eq!(width, 8);
                        gf256::mul(a as u8, b as u8) as u64
                    }
                    Op::Not => unreachable!(),
                }
            }
            _ => unreachable!("validated program"),
        };
        values.push(v);
    }
    Ok(values)
}

/// Values of the program outputs under one valuation.
pub fn output_values(p: &Program, vars: &VarTable, vals: &[u64], width: u32) -> Result<Vec<u64>, OracleError> {
    let values = interpret(p, vars, vals, width)?;
    Ok(p.outputs.iter().map(|o| values[vars.id(o).unwrap()]).collect())
}

/// The split input space of a program: which input ids are public, secret
/// and random, and how to rebuild a valuation from the three packed codes.
#[derive(Debug, Clone)]
pub struct InputSpace {
    pub public: Vec<usize>,
    pub secret: Vec<usize>,
    pub random: Vec<usize>,
    pub width: u32,
}

impl InputSpace {
    pub fn build(vars: &VarTable, width: u32) -> InputSpace {
        let mut space = InputSpace {
            public: Vec::new(),
            secret: Vec::new(),
            random: Vec::new(),
            width,
        };
        for i in 0..vars.n_inputs() {
            match vars.class(i).unwrap() {
                InputClass::Public => space.public.push(i),
                InputClass::Secret => space.secret.push(i),
                InputClass::Random => space.random.push(i),
            }
        }
        space
    }

    pub fn total_bits(&self) -> u32 {
        (self.public.len() + self.secret.len() + self.random.len()) as u32 * self.width
    }

    pub fn check_budget(&self, limit: u32) -> Result<(), OracleError> {
        let bits = self.total_bits();
        if bits > limit {
            return Err(OracleError::Budget { bits, limit });
        }
        Ok(())
    }

    fn codes(&self, group: &[usize]) -> u64 {
        1u64 << (group.len() as u32 * self.width)
    }

    pub fn public_codes(&self) -> u64 {
        self.codes(&self.public)
    }

    pub fn secret_codes(&self) -> u64 {
        self.codes(&self.secret)
    }

    pub fn random_codes(&self) -> u64 {
        self.codes(&self.random)
    }

    /// Fill `vals` (length = number of inputs) from packed group codes.
    pub fn fill(&self, vals: &mut [u64], x: u64, k: u64, r: u64) {
        let mask = mask_of(self.width);
        for (pos, &id) in self.public.iter().enumerate() {
            vals[id] = (x >> (pos as u32 * self.width)) & mask;
        }
        for (pos, &id) in self.secret.iter().enumerate() {
            vals[id] = (k >> (pos as u32 * self.width)) & mask;
        }
        for (pos, &id) in self.random.iter().enumerate() {
            vals[id] = (r >> (pos as u32 * self.width)) & mask;
        }
    }
}

/// What to collect a distribution for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Var(usize),
    /// Value of `v1 ^ v2`: the register transition between the two.
    Xor(usize, usize),
}

/// Exact multiset of observable values over all random valuations, per
/// (public, secret) cell.
#[derive(Debug, Clone)]
pub struct DistributionTable {
    pub cells: BTreeMap<(u64, u64), BTreeMap<u64, u32>>,
    pub width: u32,
    pub randoms: u64,
}

impl DistributionTable {
    /// Multiset count of `value` in cell `(x, k)`.
    pub fn count(&self, x: u64, k: u64, value: u64) -> u32 {
        self.cells
            .get(&(x, k))
            .and_then(|h| h.get(&value).copied())
            .unwrap_or(0)
    }
}

/// Enumerate the whole input space and collect the observable's multiset.
pub fn distribution(
    p: &Program,
    vars: &VarTable,
    obs: Observable,
    width: u32,
) -> Result<DistributionTable, OracleError> {
    let space = InputSpace::build(vars, width);
    space.check_budget(BUDGET_BITS)?;
    let mut cells: BTreeMap<(u64, u64), BTreeMap<u64, u32>> = BTreeMap::new();
    let mut vals = vec![0u64; vars.n_inputs()];
    for x in 0..space.public_codes() {
        for k in 0..space.secret_codes() {
            let hist = cells.entry((x, k)).or_default();
            for r in 0..space.random_codes() {
                space.fill(&mut vals, x, k, r);
                let values = interpret(p, vars, &vals, width)?;
                let v = match obs {
                    Observable::Var(v) => values[v],
                    Observable::Xor(a, b) => values[a] ^ values[b],
                };
                *hist.entry(v).or_insert(0) += 1;
            }
        }
    }
    Ok(DistributionTable {
        cells,
        width,
        randoms: space.random_codes(),
    })
}

/// Result of checking one variable's claimed type against the enumeration.
#[derive(Debug, Clone)]
pub struct SoundnessVerdict {
    pub var: usize,
    pub claimed: DistType,
    pub ok: bool,
    /// `(x, k1, k2)` on failure: the cell pair whose multisets differ (or,
    /// for a failed uniformity check, `k1 == k2`).
    pub witness: Option<(u64, u64, u64)>,
}

/// Check every variable's claimed type against its true distribution:
/// `RUD` must be uniform in every cell (hence identical across secrets),
/// `SID` must have identical multisets across secrets for every public
/// valuation, and `UKD` promises nothing.
pub fn check_type_soundness(
    p: &Program,
    vars: &VarTable,
    types: &TypeMap,
    width: u32,
) -> Result<Vec<SoundnessVerdict>, OracleError> {
    let space = InputSpace::build(vars, width);
    space.check_budget(BUDGET_BITS)?;
    let mut vals = vec![0u64; vars.n_inputs()];
    let mut verdicts: Vec<SoundnessVerdict> = vars
        .ids()
        .map(|v| SoundnessVerdict {
            var: v,
            claimed: types.of(v),
            ok: true,
            witness: None,
        })
        .collect();

    let n_vars = vars.len();
    let randoms = space.random_codes();
    for x in 0..space.public_codes() {
        // Reference multisets from the first secret valuation of this x.
        let mut reference: Vec<BTreeMap<u64, u32>> = vec![BTreeMap::new(); n_vars];
        let mut ref_k = 0u64;
        for k in 0..space.secret_codes() {
            let mut hists: Vec<BTreeMap<u64, u32>> = vec![BTreeMap::new(); n_vars];
            for r in 0..randoms {
                space.fill(&mut vals, x, k, r);
                let values = interpret(p, vars, &vals, width)?;
                for (v, &val) in values.iter().enumerate() {
                    *hists[v].entry(val).or_insert(0) += 1;
                }
            }
            for v in 0..n_vars {
                let verdict = &mut verdicts[v];
                if !verdict.ok || verdict.claimed == DistType::Ukd {
                    continue;
                }
                if verdict.claimed == DistType::Rud {
                    let uniform = hists[v].len() as u64 == mask_of(width) + 1
                        && hists[v].values().all(|&c| c == hists[v][&0]);
                    if !uniform {
                        verdict.ok = false;
                        verdict.witness = Some((x, k, k));
                        continue;
                    }
                }
                if k == 0 {
                    reference[v] = hists[v].clone();
                    ref_k = k;
                } else if hists[v] != reference[v] {
                    verdict.ok = false;
                    verdict.witness = Some((x, ref_k, k));
                }
            }
        }
    }
    Ok(verdicts)
}

/// A printable exhaustive table: one row per input valuation, columns for
/// the inputs, the requested variables and the pairwise register
/// transitions.
#[derive(Debug, Clone)]
pub struct TruthTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<u64>>,
    n_inputs: usize,
}

impl TruthTable {
    pub fn column(&self, header: &str) -> Option<Vec<u64>> {
        let idx = self.headers.iter().position(|h| h == header)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Count of rows where `header` is non-zero among rows with `input` = v.
    pub fn count_where(&self, header: &str, input: &str, v: u64) -> usize {
        let hi = self.headers.iter().position(|h| h == header).unwrap();
        let ii = self.headers.iter().position(|h| h == input).unwrap();
        self.rows
            .iter()
            .filter(|r| r[ii] == v && r[hi] != 0)
            .count()
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let widths: Vec<usize> = self
            .headers
            .iter()
            .enumerate()
            .map(|(i, h)| {
                self.rows
                    .iter()
                    .map(|r| r[i].to_string().len())
                    .chain(std::iter::once(h.len()))
                    .max()
                    .unwrap_or(1)
            })
            .collect();
        for (i, h) in self.headers.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{:>w$}", h, w = widths[i])?;
        }
        writeln!(f)?;
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    write!(f, " | ")?;
                }
                write!(f, "{:>w$}", v, w = widths[i])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Build the exhaustive table. Rows are in lexicographic input order with
/// the first declared input as the most significant digit. Pair columns are
/// labelled `HD(a,b)` and hold the Hamming distance between the two values.
pub fn truth_table(
    p: &Program,
    vars: &VarTable,
    show: &[&str],
    pairs: &[(&str, &str)],
    width: u32,
) -> Result<TruthTable, OracleError> {
    let n_inputs = vars.n_inputs();
    let bits = n_inputs as u32 * width;
    if bits > 16 {
        return Err(OracleError::Budget { bits, limit: 16 });
    }
    let mask = mask_of(width);
    let mut headers: Vec<String> = (0..n_inputs).map(|i| vars.name(i).to_string()).collect();
    headers.extend(show.iter().map(|s| s.to_string()));
    headers.extend(pairs.iter().map(|(a, b)| format!("HD({a},{b})")));

    let mut rows = Vec::new();
    for code in 0..(1u64 << bits) {
        // First input = most significant width-bit digit.
        let mut vals = vec![0u64; n_inputs];
        for i in 0..n_inputs {
            let shift = (n_inputs - 1 - i) as u32 * width;
            vals[i] = (code >> shift) & mask;
        }
        let values = interpret(p, vars, &vals, width)?;
        let mut row = vals.clone();
        for name in show {
            row.push(values[vars.id(name).unwrap()]);
        }
        for (a, b) in pairs {
            let va = values[vars.id(a).unwrap()];
            let vb = values[vars.id(b).unwrap()];
            row.push(hamming(va ^ vb) as u64);
        }
        rows.push(row);
    }
    Ok(TruthTable {
        headers,
        rows,
        n_inputs,
    })
}
