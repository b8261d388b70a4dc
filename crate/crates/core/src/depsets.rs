//! Syntactic dependency sets: supp, unq and dom.
//!
//! For every variable `v` three subsets of the inputs are computed in one
//! forward pass each:
//!
//! * `supp(v)` — inputs `v` depends on syntactically. Inputs map to
//!   themselves, unary operators copy, binary operators union.
//! * `unq(v)` — random inputs with a unique def-use path to `v`. For
//!   `v = bop(v1, v2)` it is `(unq(v1) ∪ unq(v2)) \ (supp(v1) ∩ supp(v2))`:
//!   a mask reaching the operation from both sides no longer has a unique
//!   path and is dropped.
//! * `dom(v)` — random inputs whose unique path to `v` crosses only xor
//!   operations: for xor, `(dom(v1) ∪ dom(v2)) ∩ unq(v)`; empty for any
//!   other binary operator. A non-empty `dom(v)` certifies that `v` is
//!   uniformly distributed.
//!
//! The chain `dom(v) ⊆ unq(v) ⊆ supp(v) ∩ randoms` holds for every variable.

use crate::bitset::BitSet;
use crate::ir::{InputClass, Op, Program, VarTable};

/// Per-variable supp/unq/dom sets, indexed by [`VarTable`] id. Set elements
/// are input ordinals (the first `n_inputs` variable ids).
#[derive(Debug, Clone)]
pub struct DepSets {
    pub supp: Vec<BitSet>,
    pub unq: Vec<BitSet>,
    pub dom: Vec<BitSet>,
    /// Ordinals of secret inputs, as a mask for support tests.
    pub secret_inputs: BitSet,
    /// Ordinals of random inputs.
    pub random_inputs: BitSet,
    n_inputs: usize,
}

impl DepSets {
    /// Run the three passes. The program must be valid.
    pub fn compute(p: &Program, vars: &VarTable) -> DepSets {
        let n_inputs = vars.n_inputs();
        let supp = supp_pass(p, vars);
        let unq = unq_pass(p, vars, &supp);
        let dom = dom_pass(p, vars, &unq);

        let mut secret_inputs = BitSet::new(n_inputs);
        let mut random_inputs = BitSet::new(n_inputs);
        for id in 0..n_inputs {
            match vars.class(id) {
                Some(InputClass::Secret) => secret_inputs.insert(id),
                Some(InputClass::Random) => random_inputs.insert(id),
                _ => {}
            }
        }
        DepSets {
            supp,
            unq,
            dom,
            secret_inputs,
            random_inputs,
            n_inputs,
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    /// `supp(v) ∩ secrets ≠ ∅`
    pub fn supp_has_secret(&self, v: usize) -> bool {
        !self.supp[v].is_disjoint(&self.secret_inputs)
    }

    /// Named set views, mainly for tests and reports.
    pub fn supp_names<'a>(&self, vars: &'a VarTable, v: usize) -> Vec<&'a str> {
        self.supp[v].iter().map(|i| vars.name(i)).collect()
    }
}

fn input_base(vars: &VarTable, random_only: bool) -> Vec<BitSet> {
    let n = vars.n_inputs();
    (0..n)
        .map(|i| {
            if !random_only || vars.class(i) == Some(InputClass::Random) {
                BitSet::singleton(n, i)
            } else {
                BitSet::new(n)
            }
        })
        .collect()
}

fn supp_pass(p: &Program, vars: &VarTable) -> Vec<BitSet> {
    let mut supp = input_base(vars, false);
    for ins in &p.instructions {
        let a = vars.id(&ins.a).unwrap();
        let set = match &ins.b {
            None => supp[a].clone(),
            Some(b) => supp[a].union(&supp[vars.id(b).unwrap()]),
        };
        supp.push(set);
    }
    supp
}

fn unq_pass(p: &Program, vars: &VarTable, supp: &[BitSet]) -> Vec<BitSet> {
    let mut unq = input_base(vars, true);
    for (idx, ins) in p.instructions.iter().enumerate() {
        let v = vars.n_inputs() + idx;
        let a = vars.id(&ins.a).unwrap();
        let set = match &ins.b {
            None => unq[a].clone(),
            Some(b) => {
                let b = vars.id(b).unwrap();
                unq[a]
                    .union(&unq[b])
                    .difference(&supp[a].intersection(&supp[b]))
            }
        };
        debug_assert!(set.is_subset(&supp[v]));
        unq.push(set);
    }
    unq
}

fn dom_pass(p: &Program, vars: &VarTable, unq: &[BitSet]) -> Vec<BitSet> {
    let mut dom = input_base(vars, true);
    for (idx, ins) in p.instructions.iter().enumerate() {
        let v = vars.n_inputs() + idx;
        let a = vars.id(&ins.a).unwrap();
        let set = match (&ins.b, ins.op) {
            (None, _) => dom[a].clone(),
            (Some(b), Op::Xor) => {
                let b = vars.id(b).unwrap();
                dom[a].union(&dom[b]).intersection(&unq[v])
            }
            (Some(_), _) => BitSet::new(vars.n_inputs()),
        };
        debug_assert!(set.is_subset(&unq[v]));
        dom.push(set);
    }
    dom
}
