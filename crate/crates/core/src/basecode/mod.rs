//! Explicit small-bias base code.
//!
//! The code is the classical field-powering construction: coordinates are
//! indexed by pairs `(a, b)` over GF(2^s), and message `m` (read as the
//! coefficient vector of a polynomial `m(z) = Σ_i m_i z^i`) encodes to the
//! bit `⟨bits(b), bits(m(a))⟩` at coordinate `(a, b)`. A nonzero message
//! polynomial has at most `k−1` roots, and for every non-root the inner
//! product is unbiased over `b`, so the bias of every nonzero codeword is at
//! most `(k−1)/2^s`. Choosing the smallest `s` with `(k−1)/2^s ≤ ε0` gives
//! block length `n0 = 2^{2s}` and certified bias `≤ ε0`.
//!
//! Codewords live in the multiplicative `{±1}` basis throughout, so
//! encoding is a homomorphism: XOR of messages maps to entrywise product.

mod gf2x;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::spectra::SignVector;
use gf2x::Field;
use rand::Rng;

/// Enumerating all nonzero messages is refused above this dimension.
pub const EXHAUSTIVE_K_LIMIT: u32 = 20;

/// Word-operation budget for certifying bias exhaustively at construction.
const CERTIFY_BUDGET: u64 = 100_000_000;

/// Default cap on the block length 2^{2s}.
pub const DEFAULT_MAX_BLOCK_LENGTH: usize = 1 << 24;

/// A linear code over `{±1}^{n0}` with certified bias at most `eps0`.
#[derive(Debug, Clone)]
pub struct BaseCode {
    k: u32,
    s: u32,
    n0: usize,
    eps0: f64,
    /// Generator rows in the multiplicative basis: row `i` is the codeword
    /// of the unit message `e_i`.
    rows: Vec<SignVector>,
    /// Max bias over all nonzero codewords, when enumeration was affordable
    /// at construction time.
    certified_bias: Option<f64>,
}

/// How to search messages when measuring bias.
#[derive(Debug, Clone, Copy)]
pub enum BiasMode {
    Exhaustive,
    Sampled { count: u64, seed: u64 },
}

impl BaseCode {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n0 as f64
    }

    /// Bias guaranteed by the construction, `(k−1)/2^s`.
    pub fn guaranteed_bias(&self) -> f64 {
        (self.k - 1) as f64 / (1u64 << self.s) as f64
    }

    pub fn certified_bias(&self) -> Option<f64> {
        self.certified_bias
    }
}

/// Build the powering code with bias at most `eps0` and message dimension
/// `k`, with the default block-length cap.
pub fn build_base_code(eps0: f64, k: u32) -> Result<BaseCode> {
    build_base_code_capped(eps0, k, DEFAULT_MAX_BLOCK_LENGTH)
}

pub fn build_base_code_capped(eps0: f64, k: u32, max_block_length: usize) -> Result<BaseCode> {
    if !(eps0 > 0.0 && eps0 <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "eps0 must lie in (0, 1/2], got {eps0}"
        )));
    }
    if !(1..=63).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "message dimension k must lie in 1..=63, got {k}"
        )));
    }
    // Smallest s >= 1 with (k-1)/2^s <= eps0.
    let mut s: u32 = 1;
    while (k - 1) as f64 > eps0 * (1u64 << s) as f64 {
        s += 1;
        if s > 16 {
            return Err(Error::TooLarge {
                what: "field exponent s",
                value: s.to_string(),
                cap: "16".into(),
            });
        }
    }
    let n0 = 1usize << (2 * s);
    if n0 > max_block_length {
        return Err(Error::TooLarge {
            what: "block length n0",
            value: n0.to_string(),
            cap: max_block_length.to_string(),
        });
    }

    let field = Field::new(s)?;
    let q = field.size();
    // Row i holds the codeword of e_i. powers[a] tracks a^i across rows.
    let mut powers: Vec<u32> = vec![1; q as usize];
    let mut rows = Vec::with_capacity(k as usize);
    for _ in 0..k {
        let row = SignVector::from_fn(n0, |idx| {
            let a = (idx >> s) as u32;
            let b = (idx & ((q - 1) as usize)) as u32;
            (b & powers[a as usize]).count_ones() & 1 == 1
        });
        rows.push(row);
        for (a, p) in powers.iter_mut().enumerate() {
            *p = field.mul(*p, a as u32);
        }
    }

    let mut code = BaseCode {
        k,
        s,
        n0,
        eps0,
        rows,
        certified_bias: None,
    };
    if rank(&code.rows) != k as usize {
        return Err(Error::InvalidParameter(format!(
            "generator rank below k={k}; construction invariant violated"
        )));
    }
    let words_per_row = n0.div_ceil(64) as u64;
    if k <= EXHAUSTIVE_K_LIMIT && ((1u64 << k) - 1) * words_per_row <= CERTIFY_BUDGET {
        let measured = measure_base_bias(&code, BiasMode::Exhaustive)?;
        if measured > code.guaranteed_bias() + f64::EPSILON {
            return Err(Error::InvalidParameter(format!(
                "measured bias {measured} exceeds guaranteed {}; construction bug",
                code.guaranteed_bias()
            )));
        }
        code.certified_bias = Some(measured);
    }
    Ok(code)
}

/// Encode message `m` (bit `i` of `m` is the coefficient of `z^i`) into the
/// multiplicative basis.
pub fn encode_base(code: &BaseCode, m: u64) -> Result<SignVector> {
    if m >= 1u64 << code.k {
        return Err(Error::InvalidParameter(format!(
            "message {m} out of range for k={}",
            code.k
        )));
    }
    let mut acc = SignVector::all_plus(code.n0);
    for (i, row) in code.rows.iter().enumerate() {
        if (m >> i) & 1 == 1 {
            acc = acc.mul(row);
        }
    }
    Ok(acc)
}

/// Max bias over (all | sampled) nonzero messages.
///
/// Exhaustive mode walks messages in Gray-code order, one row-XOR per step.
/// A sampled mode whose count covers every nonzero message falls back to the
/// exhaustive computation.
pub fn measure_base_bias(code: &BaseCode, mode: BiasMode) -> Result<f64> {
    match mode {
        BiasMode::Exhaustive => {
            if code.k > EXHAUSTIVE_K_LIMIT {
                return Err(Error::TooLarge {
                    what: "exhaustive message dimension k",
                    value: code.k.to_string(),
                    cap: EXHAUSTIVE_K_LIMIT.to_string(),
                });
            }
            let mut acc = SignVector::all_plus(code.n0);
            let mut max_bias = 0.0f64;
            for j in 1u64..1 << code.k {
                acc = acc.mul(&code.rows[j.trailing_zeros() as usize]);
                max_bias = max_bias.max(acc.bias());
            }
            Ok(max_bias)
        }
        BiasMode::Sampled { count, seed } => {
            if code.k <= EXHAUSTIVE_K_LIMIT && count >= (1u64 << code.k) - 1 {
                return measure_base_bias(code, BiasMode::Exhaustive);
            }
            let mut rng = substream(seed, "base-bias", 0);
            let mut max_bias = 0.0f64;
            for _ in 0..count {
                let m = rng.gen_range(1..1u64 << code.k);
                max_bias = max_bias.max(encode_base(code, m)?.bias());
            }
            Ok(max_bias)
        }
    }
}

fn rank(rows: &[SignVector]) -> usize {
    let mut mat: Vec<Vec<u64>> = rows.iter().map(|r| r.words().to_vec()).collect();
    let words = mat.first().map_or(0, Vec::len);
    let mut r = 0;
    for w in 0..words {
        for bit in 0..64 {
            let Some(pivot) = (r..mat.len()).find(|&i| (mat[i][w] >> bit) & 1 == 1) else {
                continue;
            };
            mat.swap(r, pivot);
            let (head, tail) = mat.split_at_mut(r + 1);
            let prow = &head[r];
            for row in tail.iter_mut() {
                if (row[w] >> bit) & 1 == 1 {
                    for (x, y) in row.iter_mut().zip(prow) {
                        *x ^= y;
                    }
                }
            }
            r += 1;
        }
    }
    r
}

/// JSON envelope for generator export: row-major hex-encoded bit rows.
/// Bits are packed little-endian within bytes (coordinate `i` sits in byte
/// `i/8`, bit `i%8`).
#[derive(Serialize, Deserialize)]
struct GeneratorFile {
    k: u32,
    n0: usize,
    s: u32,
    eps0: f64,
    rows: Vec<String>,
}

pub fn generator_to_json(code: &BaseCode) -> String {
    let rows = code
        .rows
        .iter()
        .map(|row| {
            let nbytes = code.n0.div_ceil(8);
            let mut hex = String::with_capacity(2 * nbytes);
            for byte_idx in 0..nbytes {
                let mut byte = 0u8;
                for bit in 0..8 {
                    let i = byte_idx * 8 + bit;
                    if i < code.n0 && row.is_minus(i) {
                        byte |= 1 << bit;
                    }
                }
                hex.push_str(&format!("{byte:02x}"));
            }
            hex
        })
        .collect();
    let file = GeneratorFile {
        k: code.k,
        n0: code.n0,
        s: code.s,
        eps0: code.eps0,
        rows,
    };
    serde_json::to_string_pretty(&file).expect("generator serialization cannot fail")
}

pub fn generator_from_json(text: &str) -> Result<BaseCode> {
    let file: GeneratorFile = serde_json::from_str(text)?;
    if file.n0 != 1usize << (2 * file.s) {
        return Err(Error::InvalidParameter(format!(
            "n0={} inconsistent with s={}",
            file.n0, file.s
        )));
    }
    if file.rows.len() != file.k as usize {
        return Err(Error::InvalidParameter(format!(
            "expected {} rows, found {}",
            file.k,
            file.rows.len()
        )));
    }
    let nbytes = file.n0.div_ceil(8);
    let mut rows = Vec::with_capacity(file.rows.len());
    for hex in &file.rows {
        if hex.len() != 2 * nbytes {
            return Err(Error::InvalidParameter(format!(
                "row hex length {} != {}",
                hex.len(),
                2 * nbytes
            )));
        }
        let mut bytes = Vec::with_capacity(nbytes);
        for i in 0..nbytes {
            let b = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16)
                .map_err(|e| Error::InvalidParameter(format!("bad hex in row: {e}")))?;
            bytes.push(b);
        }
        rows.push(SignVector::from_fn(file.n0, |i| {
            (bytes[i / 8] >> (i % 8)) & 1 == 1
        }));
    }
    let code = BaseCode {
        k: file.k,
        s: file.s,
        n0: file.n0,
        eps0: file.eps0,
        rows,
        certified_bias: None,
    };
    if rank(&code.rows) != file.k as usize {
        return Err(Error::InvalidParameter(
            "imported generator does not have full rank".into(),
        ));
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_single_nonzero_codeword() {
        for eps0 in [0.5, 0.25, 0.1] {
            let code = build_base_code(eps0, 1).unwrap();
            let w = encode_base(&code, 1).unwrap();
            assert!(w.bias() <= eps0 + 1e-15);
            assert_eq!(
                measure_base_bias(&code, BiasMode::Exhaustive).unwrap(),
                w.bias()
            );
        }
    }

    #[test]
    fn k3_quarter_bias_matches_spec_parameters() {
        let code = build_base_code(0.25, 3).unwrap();
        assert_eq!(code.s(), 3);
        assert_eq!(code.n0(), 64);
        let measured = measure_base_bias(&code, BiasMode::Exhaustive).unwrap();
        assert!(measured <= 0.25 + 1e-15, "bias {measured}");
        assert_eq!(code.certified_bias(), Some(measured));
        // Single-bit messages are codewords of the same code.
        for i in 0..3 {
            assert!(encode_base(&code, 1 << i).unwrap().bias() <= 0.25);
        }
    }

    #[test]
    fn zero_message_encodes_to_all_plus() {
        let code = build_base_code(0.25, 3).unwrap();
        assert!(encode_base(&code, 0).unwrap().is_all_plus());
    }

    #[test]
    fn encoding_is_a_homomorphism() {
        let code = build_base_code(0.25, 5).unwrap();
        let mut rng = substream(31, "test-homomorphism", 0);
        for _ in 0..100 {
            let m1 = rng.gen_range(0..1u64 << 5);
            let m2 = rng.gen_range(0..1u64 << 5);
            let lhs = encode_base(&code, m1 ^ m2).unwrap();
            let rhs = encode_base(&code, m1)
                .unwrap()
                .mul(&encode_base(&code, m2).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn codewords_are_distinct() {
        let code = build_base_code(0.25, 4).unwrap();
        let mut seen = std::collections::HashSet::new();
        for m in 0..1u64 << 4 {
            let w = encode_base(&code, m).unwrap();
            assert!(seen.insert(w.words().to_vec()), "collision at message {m}");
        }
    }

    #[test]
    fn sampled_covering_all_messages_equals_exhaustive() {
        let code = build_base_code(0.25, 3).unwrap();
        let full = measure_base_bias(&code, BiasMode::Exhaustive).unwrap();
        let sampled = measure_base_bias(
            &code,
            BiasMode::Sampled {
                count: 7,
                seed: 99,
            },
        )
        .unwrap();
        assert_eq!(full, sampled);
    }

    #[test]
    fn sampled_bias_is_bounded_by_exhaustive() {
        let code = build_base_code(0.25, 6).unwrap();
        let full = measure_base_bias(&code, BiasMode::Exhaustive).unwrap();
        let sampled = measure_base_bias(&code, BiasMode::Sampled { count: 20, seed: 5 }).unwrap();
        assert!(sampled <= full + 1e-15);
    }

    #[test]
    fn exhaustive_refused_above_limit() {
        let code = build_base_code(0.5, 22).unwrap();
        assert!(measure_base_bias(&code, BiasMode::Exhaustive).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(build_base_code(0.0, 3).is_err());
        assert!(build_base_code(0.75, 3).is_err());
        assert!(build_base_code(0.25, 0).is_err());
        assert!(build_base_code(0.25, 64).is_err());
        assert!(build_base_code_capped(0.25, 3, 16).is_err());
    }

    #[test]
    fn generator_json_round_trip() {
        let code = build_base_code(0.25, 4).unwrap();
        let json = generator_to_json(&code);
        let back = generator_from_json(&json).unwrap();
        assert_eq!(back.k(), code.k());
        assert_eq!(back.n0(), code.n0());
        assert_eq!(back.s(), code.s());
        for m in 0..1u64 << 4 {
            assert_eq!(
                encode_base(&back, m).unwrap(),
                encode_base(&code, m).unwrap()
            );
        }
    }

    #[test]
    fn generator_json_rejects_corruption() {
        let code = build_base_code(0.25, 3).unwrap();
        let json = generator_to_json(&code);
        let mut file: serde_json::Value = serde_json::from_str(&json).unwrap();
        file["rows"][0] = serde_json::Value::String("zz".repeat(8)).clone();
        assert!(generator_from_json(&file.to_string()).is_err());
        // Duplicate row kills the rank.
        let mut file2: serde_json::Value = serde_json::from_str(&json).unwrap();
        let row0 = file2["rows"][0].clone();
        file2["rows"][1] = row0;
        assert!(generator_from_json(&file2.to_string()).is_err());
    }

    #[test]
    fn acceptance_parameters_give_n0_1024() {
        // eps0 = 1/sqrt(8), k = 10 is the pairing used by the verification
        // pipeline; the construction puts it on 1024 vertices.
        let code = build_base_code(1.0 / 8f64.sqrt(), 10).unwrap();
        assert_eq!(code.s(), 5);
        assert_eq!(code.n0(), 1024);
        let measured = measure_base_bias(&code, BiasMode::Exhaustive).unwrap();
        assert!(measured <= code.eps0());
    }

    use crate::rng::substream;
    use rand::Rng;
}
