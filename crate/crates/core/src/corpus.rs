//! The worked example kernels, embedded from `programs/`.
//!
//! These are the fixtures used across tests, benches and documentation. The
//! `*_WIDTH` constants give the word width each kernel is meant to run at.

pub const MASKED_AND: &str = include_str!("../../../programs/masked_and.ir");
pub const PLAIN_XOR: &str = include_str!("../../../programs/plain_xor.ir");
pub const SECURE_XOR: &str = include_str!("../../../programs/secure_xor.ir");
pub const SECURE_XOR_SHARES: &str = include_str!("../../../programs/secure_xor_shares.ir");
pub const ORDER2_MULTIPLY: &str = include_str!("../../../programs/order2_multiply.ir");
pub const ORDER2_MULTIPLY_BOOL: &str = include_str!("../../../programs/order2_multiply_bool.ir");
pub const REMASK: &str = include_str!("../../../programs/remask.ir");

/// `(name, source, width)` for every kernel that can be exhaustively
/// certified at width 1.
pub const CERTIFIABLE: &[(&str, &str)] = &[
    ("masked_and", MASKED_AND),
    ("plain_xor", PLAIN_XOR),
    ("secure_xor", SECURE_XOR),
    ("secure_xor_shares", SECURE_XOR_SHARES),
    ("order2_multiply_bool", ORDER2_MULTIPLY_BOOL),
    ("remask", REMASK),
];
