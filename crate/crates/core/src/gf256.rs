//! Multiplication in the 256-element binary field with the reduction
//! polynomial x^8 + x^4 + x^3 + x + 1 (0x11B).

/// Russian-peasant multiply with interleaved reduction.
pub fn mul(a: u8, b: u8) -> u8 {
    let mut a = a;
    let mut b = b;
    let mut acc: u8 = 0;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        let carry = a & 0x80 != 0;
        a <<= 1;
        if carry {
            a ^= 0x1B;
        }
        b >>= 1;
    }
    acc
}
