//! Seeded generator for masked straight-line kernels.
//!
//! Generated programs follow the shape of real masked code so the whole
//! pipeline (detection, mitigation, certification) can run end to end on
//! them:
//!
//! * every secret input is consumed exactly once, by an xor with a random
//!   mask, and is never an output;
//! * any later value whose inferred type is unknown is used at most once
//!   and never as an output, so it can always stay memory resident;
//! * at most one operand of any instruction has unknown type.
//!
//! Determinism: the same config always yields the same program.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::bitset::BitSet;
use crate::ir::{InputClass, Instruction, Op, Program};
use crate::typeinfer::rules::Node;

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub seed: u64,
    pub n_public: usize,
    pub n_secret: usize,
    pub n_random: usize,
    /// Total instruction count, including the per-secret masking xors.
    pub n_instructions: usize,
    pub width: u32,
    /// Mix field multiplies in (legal at width 8 only).
    pub use_gmul: bool,
}

/// Corpus configuration: at most 10 inputs and 30 instructions at width 1.
pub fn sample_config(seed: u64) -> GenConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n_secret = 1 + pick(&mut rng, 2); // 1..=2
    let n_public = pick(&mut rng, 3); // 0..=2
    let n_random = (n_secret + pick(&mut rng, 5)).min(10 - n_secret - n_public);
    let n_instructions = n_secret + 4 + pick(&mut rng, 27 - n_secret - 4 + 1);
    GenConfig {
        seed,
        n_public,
        n_secret,
        n_random: n_random.max(n_secret),
        n_instructions: n_instructions.min(30),
        width: 1,
        use_gmul: false,
    }
}

fn pick(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n.max(1) as u64) as usize
}

/// Index into `pool`, biased towards recently defined entries.
fn pick_recent(rng: &mut ChaCha8Rng, len: usize) -> usize {
    let window = len.min(12);
    len - 1 - pick(rng, window)
}

pub fn generate(cfg: &GenConfig) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_inputs = cfg.n_public + cfg.n_secret + cfg.n_random;
    let mut inputs = Vec::new();
    for i in 0..cfg.n_public {
        inputs.push((format!("x{i}"), InputClass::Public));
    }
    for i in 0..cfg.n_secret {
        inputs.push((format!("k{i}"), InputClass::Secret));
    }
    for i in 0..cfg.n_random {
        inputs.push((format!("m{i}"), InputClass::Random));
    }

    // Incremental analysis state, one node per defined name.
    let mut names: Vec<String> = inputs.iter().map(|(n, _)| n.clone()).collect();
    let mut nodes: Vec<Node> = Vec::new();
    let mut secret_mask = BitSet::new(n_inputs);
    for (i, (_, class)) in inputs.iter().enumerate() {
        let mut node = Node {
            supp: BitSet::singleton(n_inputs, i),
            unq: BitSet::new(n_inputs),
            dom: BitSet::new(n_inputs),
            rud: false,
            sid: false,
        };
        match class {
            InputClass::Random => {
                node.unq.insert(i);
                node.dom.insert(i);
                node.rud = true;
                node.sid = true;
            }
            InputClass::Public => node.sid = true,
            InputClass::Secret => secret_mask.insert(i),
        }
        nodes.push(node);
    }

    // Pools hold indices into `names`/`nodes`.
    let mut clean: Vec<usize> = (0..n_inputs)
        .filter(|&i| inputs[i].1 != InputClass::Secret)
        .collect();
    let mut unknown: Vec<usize> = Vec::new();
    let mut secrets: Vec<usize> = (0..n_inputs)
        .filter(|&i| inputs[i].1 == InputClass::Secret)
        .collect();
    let randoms: Vec<usize> = (0..n_inputs)
        .filter(|&i| inputs[i].1 == InputClass::Random)
        .collect();

    let mut instructions = Vec::new();
    let mut fresh = 0usize;
    while instructions.len() < cfg.n_instructions {
        let remaining = cfg.n_instructions - instructions.len();
        let dest = format!("t{fresh}");
        fresh += 1;
        let (op, a, b) = if !secrets.is_empty() && (remaining <= secrets.len() || rng.next_u64() % 2 == 0)
        {
            // Mask a raw secret with some random input; operand order varies.
            let k = secrets.pop().unwrap();
            let m = randoms[pick(&mut rng, randoms.len())];
            if rng.next_u64() % 2 == 0 {
                (Op::Xor, k, Some(m))
            } else {
                (Op::Xor, m, Some(k))
            }
        } else {
            let op = {
                let r = pick(&mut rng, 100);
                if cfg.use_gmul && cfg.width == 8 && r < 20 {
                    Op::GMul
                } else if r < 55 {
                    Op::Xor
                } else if r < 72 {
                    Op::And
                } else if r < 86 {
                    Op::Or
                } else {
                    Op::Not
                }
            };
            // First operand may be an unknown-typed value (consumed on use);
            // any second operand comes from the clean pool and differs from
            // the first (x op x is dead weight in a masked kernel).
            let take_unknown = !unknown.is_empty() && pick(&mut rng, 100) < 20;
            let a = if take_unknown {
                unknown.swap_remove(pick(&mut rng, unknown.len()))
            } else {
                clean[pick_recent(&mut rng, clean.len())]
            };
            let b = (!op.is_unary()).then(|| {
                let mut b = clean[pick_recent(&mut rng, clean.len())];
                if b == a && clean.len() > 1 {
                    let at = clean.iter().position(|&c| c == b).unwrap();
                    b = clean[(at + 1) % clean.len()];
                }
                b
            });
            if rng.next_u64() % 2 == 0 || op.is_unary() || take_unknown {
                (op, a, b)
            } else {
                (op, b.unwrap(), Some(a))
            }
        };
        let node = match b {
            None => nodes[a].not(),
            Some(b) => Node::binary(op, &nodes[a], &nodes[b], &secret_mask, a == b),
        };
        instructions.push(Instruction {
            dest: dest.clone(),
            op,
            a: names[a].clone(),
            b: b.map(|b| names[b].clone()),
        });
        let id = names.len();
        names.push(dest);
        if node.sid || node.rud {
            clean.push(id);
        } else {
            unknown.push(id);
        }
        nodes.push(node);
    }

    // Outputs: one to three clean values, preferring late definitions.
    let computed_clean: Vec<usize> = clean.iter().copied().filter(|&i| i >= n_inputs).collect();
    let candidates = if computed_clean.is_empty() {
        clean.clone()
    } else {
        computed_clean
    };
    let n_out = 1 + pick(&mut rng, candidates.len().min(3));
    let mut outputs: Vec<String> = candidates
        .iter()
        .rev()
        .take(n_out)
        .map(|&i| names[i].clone())
        .collect();
    outputs.dedup();

    Program {
        width: cfg.width,
        inputs,
        instructions,
        outputs,
    }
}
