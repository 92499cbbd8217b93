//! Arithmetic in GF(2^s) for s ≤ 16, with a fixed table of irreducible
//! polynomials. Elements are bit-vector representatives of polynomials over
//! GF(2) modulo the table entry.

use crate::error::{Error, Result};

/// Irreducible polynomial of degree s, including the x^s term, indexed by
/// s−1. Standard primitive-polynomial table entries; irreducibility is
/// re-verified by an independent Rabin test in the test suite.
const IRREDUCIBLE: [u32; 16] = [
    0x3,     // x + 1
    0x7,     // x^2 + x + 1
    0xB,     // x^3 + x + 1
    0x13,    // x^4 + x + 1
    0x25,    // x^5 + x^2 + 1
    0x43,    // x^6 + x + 1
    0x83,    // x^7 + x + 1
    0x11B,   // x^8 + x^4 + x^3 + x + 1
    0x211,   // x^9 + x^4 + 1
    0x409,   // x^10 + x^3 + 1
    0x805,   // x^11 + x^2 + 1
    0x1053,  // x^12 + x^6 + x^4 + x + 1
    0x201B,  // x^13 + x^4 + x^3 + x + 1
    0x4443,  // x^14 + x^10 + x^6 + x + 1
    0x8003,  // x^15 + x + 1
    0x1100B, // x^16 + x^12 + x^3 + x + 1
];

/// The field GF(2^s).
#[derive(Debug, Clone, Copy)]
pub struct Field {
    s: u32,
    poly: u32,
}

impl Field {
    pub fn new(s: u32) -> Result<Self> {
        if !(1..=16).contains(&s) {
            return Err(Error::InvalidParameter(format!(
                "field exponent s={s} outside supported range 1..=16"
            )));
        }
        Ok(Self {
            s,
            poly: IRREDUCIBLE[(s - 1) as usize],
        })
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// Number of field elements, 2^s.
    pub fn size(&self) -> u32 {
        1 << self.s
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    /// Carry-less multiply followed by reduction modulo the field polynomial.
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        debug_assert!(a < self.size() && b < self.size());
        let mut acc: u64 = 0;
        let a = a as u64;
        for i in 0..self.s {
            if (b >> i) & 1 == 1 {
                acc ^= a << i;
            }
        }
        let poly = self.poly as u64;
        for bit in (self.s..2 * self.s).rev() {
            if (acc >> bit) & 1 == 1 {
                acc ^= poly << (bit - self.s);
            }
        }
        acc as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;

    // Independent irreducibility oracle: Rabin's test with polynomial
    // arithmetic over GF(2) implemented from scratch (no reuse of Field).

    fn poly_mul_mod(a: u64, b: u64, m: u64) -> u64 {
        let deg_m = 63 - m.leading_zeros() as u64;
        let mut acc: u128 = 0;
        for i in 0..64 {
            if (b >> i) & 1 == 1 {
                acc ^= (a as u128) << i;
            }
        }
        for bit in (deg_m..128).rev() {
            if (acc >> bit) & 1 == 1 {
                acc ^= (m as u128) << (bit - deg_m);
            }
        }
        acc as u64
    }

    fn poly_pow_x_2k(k: u32, m: u64) -> u64 {
        // x^(2^k) mod m by repeated squaring.
        let mut r = 0b10u64; // the polynomial x
        for _ in 0..k {
            r = poly_mul_mod(r, r, m);
        }
        r
    }

    fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            let deg_b = 63 - b.leading_zeros();
            loop {
                if a == 0 {
                    break;
                }
                let deg_a = 63 - a.leading_zeros();
                if deg_a < deg_b {
                    break;
                }
                a ^= b << (deg_a - deg_b);
            }
            std::mem::swap(&mut a, &mut b);
        }
        a
    }

    fn prime_divisors(mut n: u32) -> Vec<u32> {
        let mut out = vec![];
        let mut p = 2;
        while p * p <= n {
            if n % p == 0 {
                out.push(p);
                while n % p == 0 {
                    n /= p;
                }
            }
            p += 1;
        }
        if n > 1 {
            out.push(n);
        }
        out
    }

    #[test]
    fn table_entries_are_irreducible() {
        for s in 1..=16u32 {
            let m = IRREDUCIBLE[(s - 1) as usize] as u64;
            // Rabin: x^(2^s) ≡ x (mod m), and for every prime q | s,
            // gcd(x^(2^(s/q)) − x, m) = 1.
            let x_mod = poly_mul_mod(0b10, 1, m);
            let xs = poly_pow_x_2k(s, m);
            assert_eq!(xs, x_mod, "x^(2^{s}) != x mod table poly for s={s}");
            for q in prime_divisors(s) {
                let xq = poly_pow_x_2k(s / q, m) ^ x_mod;
                assert_eq!(poly_gcd(xq, m), 1, "reducible table poly for s={s}");
            }
        }
    }

    #[test]
    fn field_axioms_hold_on_samples() {
        let mut rng = substream(21, "test-gf", 0);
        for s in 1..=16u32 {
            let f = Field::new(s).unwrap();
            let size = f.size();
            for _ in 0..200 {
                let a = rng.gen_range(0..size);
                let b = rng.gen_range(0..size);
                let c = rng.gen_range(0..size);
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.mul(a, 0), 0);
            }
            // No zero divisors on a sample.
            for _ in 0..200 {
                let a = rng.gen_range(1..size);
                let b = rng.gen_range(1..size);
                assert_ne!(f.mul(a, b), 0, "zero divisor in GF(2^{s})");
            }
        }
    }

    #[test]
    fn small_field_multiplication_by_hand() {
        // GF(4) with x^2 + x + 1: elements 0,1,x,x+1.
        let f = Field::new(2).unwrap();
        assert_eq!(f.mul(2, 2), 3); // x*x = x+1
        assert_eq!(f.mul(2, 3), 1); // x*(x+1) = x^2+x = 1
        assert_eq!(f.mul(3, 3), 2); // (x+1)^2 = x^2+1 = x
    }

    #[test]
    fn rejects_unsupported_exponent() {
        assert!(Field::new(0).is_err());
        assert!(Field::new(17).is_err());
    }
}
