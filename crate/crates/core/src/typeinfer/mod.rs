//! Distribution-type inference.
//!
//! Every variable gets one of three types, ordered by how much the analysis
//! can promise about its distribution:
//!
//! * `RUD` — random uniform distribution: uniform for any fixing of the
//!   public and secret inputs, hence also secret independent.
//! * `SID` — secret independent distribution: possibly non-uniform, but the
//!   distribution does not change with the secret.
//! * `UKD` — unknown: nothing could be proven, so a leak must be assumed.
//!
//! Inference evaluates the rule set ([`rules`]) to a fixpoint over a fact
//! base holding the encoded dependency sets ([`facts`]). Derivations are
//! monotone (facts only accumulate), evaluation is semi-naive (a definition
//! is revisited only when one of its operands gained a fact), and the result
//! is independent of both the iteration order and the set encoding.

pub mod facts;
pub mod rules;

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use crate::depsets::DepSets;
use crate::ir::{InputClass, Op, Program, VarTable};

pub use facts::{encode_sets, EncodingScheme, FactBase, RelKind, SetRelation, DEFAULT_SEGMENT_WIDTH};
use rules::{BinarySides, Node};

/// Distribution type, ordered `Ukd < Sid < Rud` by strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DistType {
    Ukd,
    Sid,
    Rud,
}

impl fmt::Display for DistType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistType::Rud => "RUD",
            DistType::Sid => "SID",
            DistType::Ukd => "UKD",
        })
    }
}

/// Final types per variable id, plus derivation counts for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeMap {
    types: Vec<DistType>,
    /// Facts derived during inference (monotone; includes input seeds).
    pub derived_facts: usize,
    /// Fixpoint rounds taken by the evaluator.
    pub rounds: usize,
}

impl TypeMap {
    pub fn of(&self, v: usize) -> DistType {
        self.types[v]
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let mut rud = 0;
        let mut sid = 0;
        let mut ukd = 0;
        for t in &self.types {
            match t {
                DistType::Rud => rud += 1,
                DistType::Sid => sid += 1,
                DistType::Ukd => ukd += 1,
            }
        }
        (rud, sid, ukd)
    }

    pub fn by_name<'a>(&self, vars: &'a VarTable) -> BTreeMap<&'a str, DistType> {
        vars.ids().map(|v| (vars.name(v), self.types[v])).collect()
    }

    /// Overwrite a claimed type. Only tests use this, to hand the oracle a
    /// deliberately wrong claim.
    #[cfg(test)]
    pub(crate) fn force(&mut self, v: usize, t: DistType) {
        self.types[v] = t;
    }
}

/// Monotone per-variable derivation bits.
struct Derivations {
    rud: Vec<bool>,
    sid: Vec<bool>,
}

impl Derivations {
    fn merge(&mut self, v: usize, rud: bool, sid: bool) -> bool {
        let mut changed = false;
        if rud && !self.rud[v] {
            self.rud[v] = true;
            changed = true;
        }
        if (sid || rud) && !self.sid[v] {
            self.sid[v] = true;
            changed = true;
        }
        changed
    }

    fn bits(&self, v: usize) -> (bool, bool) {
        (self.rud[v], self.sid[v])
    }
}

/// Infer types for every variable under the given set encoding.
pub fn infer_types(p: &Program, vars: &VarTable, d: &DepSets, scheme: EncodingScheme) -> TypeMap {
    let fb = encode_sets(vars, d, scheme);
    infer_with_facts(p, vars, &fb)
}

fn infer_with_facts(p: &Program, vars: &VarTable, fb: &FactBase) -> TypeMap {
    let n = vars.len();
    let mut der = Derivations {
        rud: vec![false; n],
        sid: vec![false; n],
    };
    // Input seeds: random is uniform, public is secret independent, secret
    // gets nothing and stays unknown.
    for v in 0..vars.n_inputs() {
        match vars.class(v).unwrap() {
            InputClass::Random => {
                der.merge(v, true, true);
            }
            InputClass::Public => {
                der.merge(v, false, true);
            }
            InputClass::Secret => {}
        }
    }

    // Semi-naive loop: re-evaluate a definition only when an operand (or the
    // definition itself, in round one) gained a fact. Instructions are kept
    // in program order inside each round; the fixpoint does not depend on it.
    let uses = operand_uses(p, vars);
    let mut queue: Vec<usize> = (0..p.instructions.len()).collect();
    let mut queued = vec![true; p.instructions.len()];
    let mut rounds = 0;
    while !queue.is_empty() {
        rounds += 1;
        let mut next = Vec::new();
        let mut next_queued = vec![false; p.instructions.len()];
        for &idx in &queue {
            queued[idx] = false;
            let ins = &p.instructions[idx];
            let v = vars.n_inputs() + idx;
            let a = vars.id(&ins.a).unwrap();
            let (rud, sid) = match &ins.b {
                None => der.bits(a),
                Some(b) => {
                    let b = vars.id(b).unwrap();
                    let sides = BinarySides {
                        dom_v_nonempty: fb.set_nonempty(RelKind::Dom, v),
                        supp_v_has_secret: fb.supp_has_secret(v),
                        supp_disjoint: fb.disjoint(RelKind::Supp, a, b),
                        dom1_escapes_supp2: fb
                            .difference_nonempty(RelKind::Dom, a, RelKind::Supp, b),
                        dom2_escapes_supp1: fb
                            .difference_nonempty(RelKind::Dom, b, RelKind::Supp, a),
                        dom1_escapes_dom2: fb.difference_nonempty(RelKind::Dom, a, RelKind::Dom, b),
                        dom2_escapes_dom1: fb.difference_nonempty(RelKind::Dom, b, RelKind::Dom, a),
                        same_operand: a == b,
                    };
                    rules::eval_binary(ins.op, &sides, der.bits(a), der.bits(b))
                }
            };
            if der.merge(v, rud, sid) {
                for &user in &uses[v] {
                    if !next_queued[user] && !queued[user] {
                        next_queued[user] = true;
                        next.push(user);
                    }
                }
            }
        }
        next.sort_unstable();
        for &i in &next {
            queued[i] = true;
        }
        queue = next;
    }

    let types = (0..n)
        .map(|v| match der.bits(v) {
            (true, _) => DistType::Rud,
            (false, true) => DistType::Sid,
            (false, false) => DistType::Ukd,
        })
        .collect();
    let derived_facts = der.rud.iter().filter(|&&b| b).count()
        + der.sid.iter().filter(|&&b| b).count();
    TypeMap {
        types,
        derived_facts,
        rounds,
    }
}

fn operand_uses(p: &Program, vars: &VarTable) -> Vec<Vec<usize>> {
    let mut uses = vec![Vec::new(); vars.len()];
    for (idx, ins) in p.instructions.iter().enumerate() {
        for operand in ins.operands() {
            uses[vars.id(operand).unwrap()].push(idx);
        }
    }
    uses
}

/// Reference node (plain bitsets) for a program variable, used to type
/// synthetic compositions.
pub(crate) fn var_node(d: &DepSets, types: &TypeMap, v: usize) -> Node {
    let t = types.of(v);
    Node {
        supp: d.supp[v].clone(),
        unq: d.unq[v].clone(),
        dom: d.dom[v].clone(),
        rud: t == DistType::Rud,
        sid: t != DistType::Ukd,
    }
}

fn node_type(n: &Node) -> DistType {
    if n.rud {
        DistType::Rud
    } else if n.sid {
        DistType::Sid
    } else {
        DistType::Ukd
    }
}

/// Type of the synthetic value `v1 ^ v2`: the transition observed when one
/// register holds `v1` and then `v2`. The node extends the dependency
/// recurrences over the existing sets; the program itself is unmodified.
pub fn type_of_xor_pair(d: &DepSets, types: &TypeMap, v1: usize, v2: usize) -> DistType {
    let a = var_node(d, types, v1);
    let b = var_node(d, types, v2);
    node_type(&Node::binary(Op::Xor, &a, &b, &d.secret_inputs, v1 == v2))
}

/// Type of the transition `bop(x, y) ^ paired` where `paired` is one of the
/// two operands: the value a register flips by when the result overwrites
/// that operand. Rewrites per operator before typing:
///
/// * xor: the transition is just the other operand;
/// * and: `paired & !other`;
/// * or: `!paired & other`;
/// * field multiply: the composition has no bitwise rewrite; it is unknown
///   whenever either factor is unknown, secret independent when neither is
///   and no secret occurs in either support, and unknown otherwise.
pub fn hds_transition_type(
    d: &DepSets,
    types: &TypeMap,
    op: Op,
    paired: usize,
    other: usize,
) -> DistType {
    let p_node = var_node(d, types, paired);
    let o_node = var_node(d, types, other);
    match op {
        Op::Xor => types.of(other),
        Op::And => node_type(&Node::binary(
            Op::And,
            &p_node,
            &o_node.not(),
            &d.secret_inputs,
            paired == other,
        )),
        Op::Or => node_type(&Node::binary(
            Op::And,
            &p_node.not(),
            &o_node,
            &d.secret_inputs,
            paired == other,
        )),
        Op::GMul => {
            if types.of(paired) == DistType::Ukd || types.of(other) == DistType::Ukd {
                DistType::Ukd
            } else if p_node
                .supp
                .union(&o_node.supp)
                .is_disjoint(&d.secret_inputs)
            {
                DistType::Sid
            } else {
                DistType::Ukd
            }
        }
        Op::Not => DistType::Sid, // constant all-ones transition
    }
}

/// Per-scheme measurements from [`compare_encodings`].
#[derive(Debug, Clone)]
pub struct EncodingRun {
    pub scheme: EncodingScheme,
    pub supp_facts: usize,
    pub unq_facts: usize,
    pub dom_facts: usize,
    pub derived_facts: usize,
    pub wall: Duration,
}

#[derive(Debug, Clone)]
pub struct EncodingReport {
    pub runs: Vec<EncodingRun>,
    pub types: TypeMap,
}

/// Run inference under all three encodings, insist on identical type maps,
/// and report fact counts and wall time per scheme.
pub fn compare_encodings(
    p: &Program,
    vars: &VarTable,
    d: &DepSets,
) -> Result<EncodingReport, String> {
    let schemes = [
        EncodingScheme::Element,
        EncodingScheme::Powerset,
        EncodingScheme::Segmented {
            width: DEFAULT_SEGMENT_WIDTH,
        },
    ];
    let mut runs = Vec::new();
    let mut maps: Vec<TypeMap> = Vec::new();
    for scheme in schemes {
        let start = Instant::now();
        let fb = encode_sets(vars, d, scheme);
        let map = infer_with_facts(p, vars, &fb);
        let wall = start.elapsed();
        runs.push(EncodingRun {
            scheme,
            supp_facts: fb.supp.fact_count(),
            unq_facts: fb.unq.fact_count(),
            dom_facts: fb.dom.fact_count(),
            derived_facts: map.derived_facts,
            wall,
        });
        maps.push(map);
    }
    for (i, m) in maps.iter().enumerate().skip(1) {
        if m != &maps[0] {
            return Err(format!(
                "encoding mismatch: {} and {} disagree",
                runs[0].scheme, runs[i].scheme
            ));
        }
    }
    Ok(EncodingReport {
        types: maps.into_iter().next().unwrap(),
        runs,
    })
}

/// Convenience wrapper: the synthetic-xor type for two variables given by
/// name. Panics on unknown names.
pub fn type_of_xor_pair_named(
    vars: &VarTable,
    d: &DepSets,
    types: &TypeMap,
    v1: &str,
    v2: &str,
) -> DistType {
    type_of_xor_pair(d, types, vars.id(v1).unwrap(), vars.id(v2).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, sample_config};
    use crate::ir::parse_program_with_width;

    fn analyzed(src: &str, width: u32) -> (Program, VarTable, DepSets, TypeMap) {
        let p = parse_program_with_width(src, width).unwrap();
        let vars = VarTable::build(&p);
        let d = DepSets::compute(&p, &vars);
        let t = infer_types(&p, &vars, &d, EncodingScheme::default());
        (p, vars, d, t)
    }

    fn ty(vars: &VarTable, t: &TypeMap, name: &str) -> DistType {
        t.of(vars.id(name).unwrap())
    }

    const MASKED_AND: &str = "in k secret\nin m1 random\nin m2 random\nin m3 random\n\
        t1 = xor m1 m2\nt2 = xor t1 k\nt3 = and t2 m3\nout t3";

    #[test]
    fn masked_and_type_row() {
        let (_, vars, _, t) = analyzed(MASKED_AND, 1);
        let expect = [
            ("k", DistType::Ukd),
            ("m1", DistType::Rud),
            ("m2", DistType::Rud),
            ("m3", DistType::Rud),
            ("t1", DistType::Rud),
            ("t2", DistType::Rud),
            ("t3", DistType::Sid),
        ];
        for (name, want) in expect {
            assert_eq!(ty(&vars, &t, name), want, "{name}");
        }
        assert_eq!(t.counts(), (5, 1, 1));
    }

    #[test]
    fn masked_operand_makes_and_secret_independent() {
        // One uniform operand, one public, no shared input.
        let src = "in k secret\nin m random\nin x public\nu = xor k m\nv = and u x\nout v";
        let (_, vars, _, t) = analyzed(src, 1);
        assert_eq!(ty(&vars, &t, "v"), DistType::Sid);
    }

    #[test]
    fn shared_mask_guard_blocks_promotion() {
        // v1 and v2 share the mask m: v = v1 & v2 collapses to m & !k & x.
        let src = "in m random\nin k secret\nin x public\n\
                   v1 = xor m k\nv2 = and m x\nv = and v1 v2\nout v";
        let (_, vars, _, t) = analyzed(src, 1);
        assert_eq!(ty(&vars, &t, "v"), DistType::Ukd);
    }

    #[test]
    fn shared_mask_guard_blocks_sid_pairs_too() {
        let src = "in k secret\nin m random\nin x1 public\nin x2 public\n\
                   u = xor k m\nw1 = and u x1\nw2 = and x2 m\nv = and w1 w2\nout v";
        let (_, vars, _, t) = analyzed(src, 1);
        assert_eq!(ty(&vars, &t, "w1"), DistType::Sid);
        assert_eq!(ty(&vars, &t, "w2"), DistType::Sid);
        assert_eq!(ty(&vars, &t, "v"), DistType::Ukd);
    }

    #[test]
    fn gmul_of_two_masked_shares_is_secret_independent() {
        // Both factors uniform, dominant masks differ: the product cannot
        // depend on the secret.
        let src = "in k secret\nin m1 random\nin m2 random\n\
                   a = xor m1 k\nb = xor m2 k\nv = gmul a b\nout v";
        let (_, vars, _, t) = analyzed(src, 8);
        assert_eq!(ty(&vars, &t, "a"), DistType::Rud);
        assert_eq!(ty(&vars, &t, "b"), DistType::Rud);
        assert_eq!(ty(&vars, &t, "v"), DistType::Sid);
    }

    #[test]
    fn not_copies_its_operand_type() {
        let src = "in k secret\nin m random\nin x public\n\
                   a = not k\nb = not m\nc = not x\nout b";
        let (_, vars, _, t) = analyzed(src, 1);
        assert_eq!(ty(&vars, &t, "a"), DistType::Ukd);
        assert_eq!(ty(&vars, &t, "b"), DistType::Rud);
        assert_eq!(ty(&vars, &t, "c"), DistType::Sid);
    }

    #[test]
    fn xor_pair_types() {
        let (_, vars, d, t) = analyzed(MASKED_AND, 1);
        assert_eq!(
            type_of_xor_pair_named(&vars, &d, &t, "t1", "t2"),
            DistType::Ukd
        );
        assert_eq!(
            type_of_xor_pair_named(&vars, &d, &t, "m1", "m2"),
            DistType::Rud
        );

        let secure_xor = "in txt public\nin key secret\nin mask1 random\n\
                          mk = xor mask1 key\nt = xor txt mk\nout mask1, t";
        let (_, vars, d, t) = analyzed(secure_xor, 1);
        assert_eq!(
            type_of_xor_pair_named(&vars, &d, &t, "mk", "mask1"),
            DistType::Ukd
        );
        assert_eq!(
            type_of_xor_pair_named(&vars, &d, &t, "mk", "key"),
            DistType::Rud
        );
    }

    #[test]
    fn tied_transition_rewrites() {
        let (_, vars, d, t) = analyzed(MASKED_AND, 1);
        let id = |n| vars.id(n).unwrap();
        // t2 = xor t1 k, paired with t1: transition is k.
        assert_eq!(
            hds_transition_type(&d, &t, Op::Xor, id("t1"), id("k")),
            DistType::Ukd
        );
        // t3 = and t2 m3, paired with t2: transition t2 & !m3 is secret
        // independent because t2's masks never reach m3.
        assert_eq!(
            hds_transition_type(&d, &t, Op::And, id("t2"), id("m3")),
            DistType::Sid
        );
    }

    #[test]
    fn encodings_agree_and_report_counts() {
        let (p, vars, d, _) = analyzed(MASKED_AND, 1);
        let report = compare_encodings(&p, &vars, &d).unwrap();
        let element = &report.runs[0];
        assert_eq!(element.scheme, EncodingScheme::Element);
        // supp facts for t1, t2, t3: 2 + 3 + 4.
        assert_eq!(element.supp_facts, 9);
        for run in &report.runs {
            assert_eq!(run.derived_facts, report.runs[0].derived_facts);
        }
    }

    #[test]
    fn encodings_agree_on_generated_programs() {
        for seed in 0..120 {
            let p = generate(&sample_config(seed));
            let vars = VarTable::build(&p);
            let d = DepSets::compute(&p, &vars);
            compare_encodings(&p, &vars, &d)
                .unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        }
    }

    #[test]
    fn inference_is_idempotent() {
        for seed in 0..60 {
            let p = generate(&sample_config(seed));
            let vars = VarTable::build(&p);
            let d = DepSets::compute(&p, &vars);
            let a = infer_types(&p, &vars, &d, EncodingScheme::default());
            let b = infer_types(&p, &vars, &d, EncodingScheme::default());
            assert_eq!(a, b, "seed {seed}");
        }
    }

    #[test]
    fn empty_program_types_only_inputs() {
        let (_, vars, _, t) = analyzed("in x public\nin m random\nout x", 1);
        assert_eq!(t.len(), 2);
        assert_eq!(ty(&vars, &t, "x"), DistType::Sid);
        assert_eq!(ty(&vars, &t, "m"), DistType::Rud);
    }
}
