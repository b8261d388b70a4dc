//! The inference rule set, shared by the fact-base engine and by synthetic
//! node typing.
//!
//! Callers evaluate the set-level side conditions against their own
//! representation (an encoded relation or plain bitsets) and hand the
//! booleans to [`eval_binary`]. Derived bits are monotone: `rud` certifies a
//! uniform, secret-independent distribution; `sid` certifies secret
//! independence. A variable with a `rud` derivation always carries `sid` as
//! well (the hierarchy makes that sound), so an exact-SID premise in a rule
//! is matched by "SID or better".

use crate::bitset::BitSet;
use crate::ir::Op;

/// Set-level side conditions for one binary definition `v = bop(v1, v2)`.
#[derive(Debug, Clone, Copy)]
pub struct BinarySides {
    pub dom_v_nonempty: bool,
    pub supp_v_has_secret: bool,
    /// `supp(v1) ∩ supp(v2) = ∅`
    pub supp_disjoint: bool,
    /// `dom(v1) \ supp(v2) ≠ ∅` and the mirror image
    pub dom1_escapes_supp2: bool,
    pub dom2_escapes_supp1: bool,
    /// `dom(v1) \ dom(v2) ≠ ∅` and the mirror image
    pub dom1_escapes_dom2: bool,
    pub dom2_escapes_dom1: bool,
    /// Both operands are literally the same value. Matching sets alone are
    /// not enough here: two values with equal supp and dom (say `A ^ m` and
    /// `B ^ m`) cancel the shared mask under xor and can expose the secret,
    /// so only true identity admits the function-of-one-value rule.
    pub same_operand: bool,
}

/// `(rud, sid)` with `rud → sid`.
pub type TypeBits = (bool, bool);

/// Evaluate every rule for a binary definition and return the derived bits.
pub fn eval_binary(op: Op, s: &BinarySides, t1: TypeBits, t2: TypeBits) -> TypeBits {
    let (r1, s1) = t1;
    let (r2, s2) = t2;
    // A non-empty dom certifies uniformity.
    let rud = s.dom_v_nonempty;
    let mut sid = rud;
    // No secret in the support means no dependence on the secret at all.
    if !s.supp_v_has_secret {
        sid = true;
    }
    match op {
        Op::And | Op::Or => {
            // One uniform operand masks the other if they share no input.
            if s.supp_disjoint && ((r1 && s2) || (s1 && r2)) {
                sid = true;
            }
            // Two uniform operands, one with a mask the other never sees.
            if (s.dom1_escapes_supp2 || s.dom2_escapes_supp1) && r1 && r2 {
                sid = true;
            }
        }
        Op::GMul => {
            // Field multiply: a uniform factor with an escaping mask makes
            // the product independent of the secret (zero absorbs, anything
            // else permutes).
            if r1 && s2 && s.dom1_escapes_supp2 {
                sid = true;
            }
            if s1 && r2 && s.dom2_escapes_supp1 {
                sid = true;
            }
            if (s.dom1_escapes_dom2 || s.dom2_escapes_dom1) && r1 && r2 {
                sid = true;
            }
        }
        Op::Xor | Op::Not => {}
    }
    // Independent secret-independent operands stay secret independent under
    // any operator.
    if s.supp_disjoint && s1 && s2 {
        sid = true;
    }
    // A function of one secret-independent value is secret independent.
    if s.same_operand && s1 {
        sid = true;
    }
    if rud {
        sid = true;
    }
    (rud, sid)
}

/// A synthetic expression node carrying its own dependency sets and type
/// bits. Used to type compositions that exist only in the analysis, such as
/// the xor of a register pair or a rewritten tied-operand expression.
#[derive(Debug, Clone)]
pub struct Node {
    pub supp: BitSet,
    pub unq: BitSet,
    pub dom: BitSet,
    pub rud: bool,
    pub sid: bool,
}

impl Node {
    /// Unary bitwise negation: all sets and bits carry over.
    pub fn not(&self) -> Node {
        self.clone()
    }

    /// Combine two nodes under a binary operator, extending the dependency
    /// recurrences and running the full rule set on the composite.
    /// `same_operand` asserts the two nodes denote one program value.
    pub fn binary(op: Op, a: &Node, b: &Node, secret_inputs: &BitSet, same_operand: bool) -> Node {
        let supp = a.supp.union(&b.supp);
        let both = a.supp.intersection(&b.supp);
        let unq = a.unq.union(&b.unq).difference(&both);
        let dom = match op {
            Op::Xor => a.dom.union(&b.dom).intersection(&unq),
            _ => BitSet::new(secret_inputs.num_words() * 64),
        };
        let sides = BinarySides {
            dom_v_nonempty: !dom.is_empty(),
            supp_v_has_secret: !supp.is_disjoint(secret_inputs),
            supp_disjoint: a.supp.is_disjoint(&b.supp),
            dom1_escapes_supp2: a.dom.difference_nonempty(&b.supp),
            dom2_escapes_supp1: b.dom.difference_nonempty(&a.supp),
            dom1_escapes_dom2: a.dom.difference_nonempty(&b.dom),
            dom2_escapes_dom1: b.dom.difference_nonempty(&a.dom),
            same_operand,
        };
        let (rud, sid) = eval_binary(op, &sides, (a.rud, a.sid), (b.rud, b.sid));
        Node {
            supp,
            unq,
            dom,
            rud,
            sid,
        }
    }
}
