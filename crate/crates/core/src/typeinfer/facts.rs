//! Fact-base encodings of the precomputed dependency sets.
//!
//! Inference runs over relations rather than the raw bitsets, and the
//! relation layout is interchangeable:
//!
//! * `Element` — one fact per (variable, input) membership: relation
//!   `Supp : V × IN`. Sets cost up to `|IN|` facts; set tests walk elements.
//! * `Powerset` — one fact per variable holding the whole set as one value:
//!   relation `Supp : V × 2^IN`. Set tests are single bit-parallel ops.
//! * `Segmented` — the set is split into fixed-width segments and one fact
//!   `(variable, idx, bits)` is stored per non-empty segment. Width 1
//!   degenerates to the element form, width `|IN|` to the powerset form.
//!
//! Inputs are not encoded: their sets are trivial (the input itself, or
//! empty) and are answered from the annotations.

use crate::bitset::BitSet;
use crate::depsets::DepSets;
use crate::ir::{InputClass, VarTable};

/// Relation layout used for the encoded sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodingScheme {
    Element,
    Powerset,
    Segmented { width: usize },
}

/// Bounded segment width keeps the value universe of one fact small.
pub const DEFAULT_SEGMENT_WIDTH: usize = 4;

impl Default for EncodingScheme {
    fn default() -> Self {
        EncodingScheme::Segmented {
            width: DEFAULT_SEGMENT_WIDTH,
        }
    }
}

impl std::fmt::Display for EncodingScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EncodingScheme::Element => write!(f, "element"),
            EncodingScheme::Powerset => write!(f, "powerset"),
            EncodingScheme::Segmented { width } => write!(f, "segmented({width})"),
        }
    }
}

/// One encoded set relation (`supp`, `unq` or `dom`).
#[derive(Debug, Clone)]
pub enum SetRelation {
    /// Sorted element facts per variable.
    Element(Vec<Vec<u32>>),
    /// One bitset fact per variable.
    Powerset(Vec<BitSet>),
    /// Non-empty `(idx, bits)` facts per variable, sorted by idx.
    Segmented { width: usize, rows: Vec<Vec<(u32, u64)>> },
}

impl SetRelation {
    fn encode(scheme: EncodingScheme, sets: &[BitSet], n_inputs: usize, skip: usize) -> SetRelation {
        match scheme {
            EncodingScheme::Element => SetRelation::Element(
                sets.iter()
                    .skip(skip)
                    .map(|s| s.iter().map(|i| i as u32).collect())
                    .collect(),
            ),
            EncodingScheme::Powerset => {
                SetRelation::Powerset(sets.iter().skip(skip).cloned().collect())
            }
            EncodingScheme::Segmented { width } => {
                assert!(width > 0, "segment width must be positive");
                let n_segs = n_inputs.div_ceil(width).max(1);
                let rows = sets
                    .iter()
                    .skip(skip)
                    .map(|s| {
                        let mut row = Vec::new();
                        for idx in 0..n_segs {
                            let mut bits = 0u64;
                            for b in 0..width.min(64) {
                                let ordinal = idx * width + b;
                                if ordinal < n_inputs && s.contains(ordinal) {
                                    bits |= 1 << b;
                                }
                            }
                            if bits != 0 {
                                row.push((idx as u32, bits));
                            }
                        }
                        row
                    })
                    .collect();
                SetRelation::Segmented { width, rows }
            }
        }
    }

    /// Number of stored facts.
    pub fn fact_count(&self) -> usize {
        match self {
            SetRelation::Element(rows) => rows.iter().map(Vec::len).sum(),
            SetRelation::Powerset(rows) => rows.len(),
            SetRelation::Segmented { rows, .. } => rows.iter().map(Vec::len).sum(),
        }
    }

    /// Decode a row back to a plain set (identical across schemes).
    pub fn decode(&self, row: usize, n_inputs: usize) -> BitSet {
        let mut out = BitSet::new(n_inputs);
        match self {
            SetRelation::Element(rows) => {
                for &i in &rows[row] {
                    out.insert(i as usize);
                }
            }
            SetRelation::Powerset(rows) => out = rows[row].clone(),
            SetRelation::Segmented { width, rows } => {
                for &(idx, bits) in &rows[row] {
                    for b in 0..*width {
                        if bits & (1 << b) != 0 {
                            out.insert(idx as usize * width + b);
                        }
                    }
                }
            }
        }
        out
    }
}

/// The encoded facts for one program: input annotations, definitions, the
/// three set relations, and (while inference runs) the derived type facts.
#[derive(Debug, Clone)]
pub struct FactBase {
    pub scheme: EncodingScheme,
    n_inputs: usize,
    classes: Vec<InputClass>,
    pub supp: SetRelation,
    pub unq: SetRelation,
    pub dom: SetRelation,
    /// Secret input ordinals (for support tests under every scheme).
    secret_ordinals: Vec<u32>,
}

/// Encode the precomputed sets of every instruction-defined variable.
pub fn encode_sets(vars: &VarTable, d: &DepSets, scheme: EncodingScheme) -> FactBase {
    if let EncodingScheme::Segmented { width } = scheme {
        assert!(width > 0, "segment width must be positive");
    }
    let n_inputs = vars.n_inputs();
    let classes = (0..n_inputs).map(|i| vars.class(i).unwrap()).collect();
    let secret_ordinals = (0..n_inputs)
        .filter(|&i| vars.class(i) == Some(InputClass::Secret))
        .map(|i| i as u32)
        .collect();
    FactBase {
        scheme,
        n_inputs,
        classes,
        supp: SetRelation::encode(scheme, &d.supp, n_inputs, n_inputs),
        unq: SetRelation::encode(scheme, &d.unq, n_inputs, n_inputs),
        dom: SetRelation::encode(scheme, &d.dom, n_inputs, n_inputs),
        secret_ordinals,
    }
}

/// Query side of the fact base. Variables are [`VarTable`] ids; inputs are
/// answered from annotations, defined variables from the encoded relations.
impl FactBase {
    fn row(&self, v: usize) -> Option<usize> {
        v.checked_sub(self.n_inputs)
    }

    /// Set of an input variable under the given relation kind.
    fn input_singleton(&self, rel: RelKind, v: usize) -> Option<u32> {
        match rel {
            RelKind::Supp => Some(v as u32),
            RelKind::Unq | RelKind::Dom => {
                (self.classes[v] == InputClass::Random).then_some(v as u32)
            }
        }
    }

    pub fn set_nonempty(&self, rel: RelKind, v: usize) -> bool {
        match self.row(v) {
            None => self.input_singleton(rel, v).is_some(),
            Some(r) => match self.relation(rel) {
                SetRelation::Element(rows) => !rows[r].is_empty(),
                SetRelation::Powerset(rows) => !rows[r].is_empty(),
                SetRelation::Segmented { rows, .. } => !rows[r].is_empty(),
            },
        }
    }

    pub fn supp_has_secret(&self, v: usize) -> bool {
        match self.row(v) {
            None => self.classes[v] == InputClass::Secret,
            Some(r) => match &self.supp {
                SetRelation::Element(rows) => rows[r]
                    .iter()
                    .any(|i| self.classes[*i as usize] == InputClass::Secret),
                SetRelation::Powerset(rows) => self
                    .secret_ordinals
                    .iter()
                    .any(|&i| rows[r].contains(i as usize)),
                SetRelation::Segmented { width, rows } => rows[r].iter().any(|&(idx, bits)| {
                    (0..*width).any(|b| {
                        bits & (1 << b) != 0
                            && self
                                .classes
                                .get(idx as usize * width + b)
                                .is_some_and(|c| *c == InputClass::Secret)
                    })
                }),
            },
        }
    }

    pub fn disjoint(&self, rel: RelKind, v1: usize, v2: usize) -> bool {
        self.binary_test(rel, v1, rel, v2, SetTest::Disjoint)
    }

    /// `rel1(v1) \ rel2(v2) ≠ ∅`
    pub fn difference_nonempty(&self, rel1: RelKind, v1: usize, rel2: RelKind, v2: usize) -> bool {
        self.binary_test(rel1, v1, rel2, v2, SetTest::DifferenceNonempty)
    }

    pub fn sets_equal(&self, rel: RelKind, v1: usize, v2: usize) -> bool {
        self.binary_test(rel, v1, rel, v2, SetTest::Equal)
    }

    fn relation(&self, rel: RelKind) -> &SetRelation {
        match rel {
            RelKind::Supp => &self.supp,
            RelKind::Unq => &self.unq,
            RelKind::Dom => &self.dom,
        }
    }

    fn binary_test(&self, rel1: RelKind, v1: usize, rel2: RelKind, v2: usize, t: SetTest) -> bool {
        // Inputs have at most one element; normalize them to tiny element
        // rows so each scheme only compares its own layout.
        let a = self.row_view(rel1, v1);
        let b = self.row_view(rel2, v2);
        match t {
            SetTest::Disjoint => row_disjoint(&a, &b),
            SetTest::DifferenceNonempty => row_difference_nonempty(&a, &b),
            SetTest::Equal => row_equal(&a, &b),
        }
    }

    fn row_view(&self, rel: RelKind, v: usize) -> RowView<'_> {
        match self.row(v) {
            None => RowView::Tiny(self.input_singleton(rel, v)),
            Some(r) => match self.relation(rel) {
                SetRelation::Element(rows) => RowView::Element(&rows[r]),
                SetRelation::Powerset(rows) => RowView::Powerset(&rows[r]),
                SetRelation::Segmented { width, rows } => RowView::Segmented(*width, &rows[r]),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelKind {
    Supp,
    Unq,
    Dom,
}

#[derive(Clone, Copy)]
enum SetTest {
    Disjoint,
    DifferenceNonempty,
    Equal,
}

enum RowView<'a> {
    Tiny(Option<u32>),
    Element(&'a [u32]),
    Powerset(&'a BitSet),
    Segmented(usize, &'a [(u32, u64)]),
}

impl RowView<'_> {
    fn contains(&self, i: u32) -> bool {
        match self {
            RowView::Tiny(e) => *e == Some(i),
            RowView::Element(row) => row.binary_search(&i).is_ok(),
            RowView::Powerset(s) => s.contains(i as usize),
            RowView::Segmented(w, row) => {
                let idx = i as usize / w;
                let bit = i as usize % w;
                row.iter()
                    .any(|&(ri, bits)| ri as usize == idx && bits & (1 << bit) != 0)
            }
        }
    }

    fn for_each(&self, mut f: impl FnMut(u32)) {
        match self {
            RowView::Tiny(e) => {
                if let Some(i) = e {
                    f(*i)
                }
            }
            RowView::Element(row) => row.iter().copied().for_each(f),
            RowView::Powerset(s) => s.iter().for_each(|i| f(i as u32)),
            RowView::Segmented(w, row) => {
                for &(idx, bits) in *row {
                    for b in 0..*w {
                        if bits & (1 << b) != 0 {
                            f((idx as usize * w + b) as u32);
                        }
                    }
                }
            }
        }
    }

    fn len(&self) -> usize {
        let mut n = 0;
        self.for_each(|_| n += 1);
        n
    }
}

fn row_disjoint(a: &RowView, b: &RowView) -> bool {
    // The powerset pairing gets the bit-parallel path.
    if let (RowView::Powerset(x), RowView::Powerset(y)) = (a, b) {
        return x.is_disjoint(y);
    }
    let mut ok = true;
    a.for_each(|i| ok &= !b.contains(i));
    ok
}

fn row_difference_nonempty(a: &RowView, b: &RowView) -> bool {
    if let (RowView::Powerset(x), RowView::Powerset(y)) = (a, b) {
        return x.difference_nonempty(y);
    }
    let mut any = false;
    a.for_each(|i| any |= !b.contains(i));
    any
}

fn row_equal(a: &RowView, b: &RowView) -> bool {
    if let (RowView::Powerset(x), RowView::Powerset(y)) = (a, b) {
        return x == y;
    }
    if a.len() != b.len() {
        return false;
    }
    let mut ok = true;
    a.for_each(|i| ok &= b.contains(i));
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{parse_program_with_width, Program};

    fn fixture() -> (Program, VarTable, DepSets) {
        // IN = {i0..i3}; v1 has supp {i1, i2}, v2 has supp {i0, i1, i3}.
        let src = "in i0 random\nin i1 random\nin i2 random\nin i3 random\n\
                   v1 = xor i1 i2\nw = xor i0 i1\nv2 = xor w i3\nout v2";
        let p = parse_program_with_width(src, 1).unwrap();
        let vars = VarTable::build(&p);
        let d = DepSets::compute(&p, &vars);
        (p, vars, d)
    }

    #[test]
    fn powerset_stores_one_fact_per_variable() {
        let (_, vars, d) = fixture();
        let fb = encode_sets(&vars, &d, EncodingScheme::Powerset);
        assert_eq!(fb.supp.fact_count(), 3);
        let v1 = vars.id("v1").unwrap() - vars.n_inputs();
        // supp(v1) = {i1, i2} = bits 1 and 2.
        let set = fb.supp.decode(v1, 4);
        assert_eq!(set.iter().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn segmented_omits_empty_segments() {
        let (_, vars, d) = fixture();
        let fb = encode_sets(&vars, &d, EncodingScheme::Segmented { width: 2 });
        let SetRelation::Segmented { rows, .. } = &fb.supp else {
            panic!("expected segmented relation");
        };
        let v1 = vars.id("v1").unwrap() - vars.n_inputs();
        // supp(v1) = {i1, i2}: segment 0 holds bit 1 (b10), segment 1 bit 0 (b01).
        assert_eq!(rows[v1], vec![(0, 0b10), (1, 0b01)]);
        let v2 = vars.id("v2").unwrap() - vars.n_inputs();
        // supp(v2) = {i0, i1, i3}: segment 0 b11, segment 1 b10.
        assert_eq!(rows[v2], vec![(0, 0b11), (1, 0b10)]);
    }

    #[test]
    fn element_counts_set_sizes_and_empty_sets_cost_nothing() {
        let (_, vars, d) = fixture();
        let fb = encode_sets(&vars, &d, EncodingScheme::Element);
        // supp: 2 + 2 + 3; dom of all three defined vars is non-empty here.
        assert_eq!(fb.supp.fact_count(), 7);

        let src = "in k secret\nin m random\nv = and k m\nout v";
        let p = parse_program_with_width(src, 1).unwrap();
        let vars = VarTable::build(&p);
        let d = DepSets::compute(&p, &vars);
        let fb = encode_sets(&vars, &d, EncodingScheme::Element);
        // dom(v) is empty: zero facts.
        assert_eq!(fb.dom.fact_count(), 0);
    }

    #[test]
    fn degenerate_segment_widths_match_element_and_powerset_counts() {
        let (_, vars, d) = fixture();
        let element = encode_sets(&vars, &d, EncodingScheme::Element);
        let seg1 = encode_sets(&vars, &d, EncodingScheme::Segmented { width: 1 });
        assert_eq!(element.supp.fact_count(), seg1.supp.fact_count());
        let seg_all = encode_sets(&vars, &d, EncodingScheme::Segmented { width: 4 });
        // One non-empty segment per non-empty set.
        assert_eq!(seg_all.supp.fact_count(), 3);
    }

    #[test]
    fn decode_is_scheme_independent() {
        let (_, vars, d) = fixture();
        let schemes = [
            EncodingScheme::Element,
            EncodingScheme::Powerset,
            EncodingScheme::Segmented { width: 1 },
            EncodingScheme::Segmented { width: 3 },
            EncodingScheme::Segmented { width: 64 },
        ];
        for scheme in schemes {
            let fb = encode_sets(&vars, &d, scheme);
            for v in vars.n_inputs()..vars.len() {
                let row = v - vars.n_inputs();
                assert_eq!(fb.supp.decode(row, 4), d.supp[v].clone(), "{scheme}");
                assert_eq!(fb.unq.decode(row, 4), d.unq[v].clone(), "{scheme}");
                assert_eq!(fb.dom.decode(row, 4), d.dom[v].clone(), "{scheme}");
            }
        }
    }
}
