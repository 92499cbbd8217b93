//! Linear algebra on functions over `[n0]` with the normalized inner
//! product `⟨f,g⟩ = E_v f(v)·g(v)`.
//!
//! Under this convention the all-ones vector is a unit vector, normalized
//! adjacency operators and sign operators are contractions, and operator
//! norms estimated here feed every inequality check in [`crate::analyzer`].
//! Norm estimates come from power iteration on the symmetrized composition
//! `transposeforward`, so they are certified *lower* bounds on the true
//! operator norm; callers compare them against paper thresholds with a small
//! additive slack.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;

/// A real-valued function on `[n0]`, dense.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    entries: Vec<f64>,
}

impl DenseVector {
    pub fn new(entries: Vec<f64>) -> Self {
        Self { entries }
    }

    /// The all-ones vector, a unit vector in the normalized norm.
    pub fn ones(n: usize) -> Self {
        Self {
            entries: vec![1.0; n],
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            entries: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    /// Normalized inner product `E_v f(v) g(v)`, accumulated with Neumaier
    /// compensation so projection and norm identities hold to 1e-12 even at
    /// n0 ~ 1e5.
    pub fn inner(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        compensated_sum(self.entries.iter().zip(&other.entries).map(|(a, b)| a * b))
            / self.len() as f64
    }

    /// Norm induced by the normalized inner product.
    pub fn norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    /// Mean of the entries, i.e. `⟨v, 1⟩`.
    pub fn mean(&self) -> f64 {
        compensated_sum(self.entries.iter().copied()) / self.len() as f64
    }

    /// Projection onto the span of the all-ones vector.
    pub fn project_one(&self) -> DenseVector {
        let m = self.mean();
        DenseVector {
            entries: vec![m; self.len()],
        }
    }

    /// Projection onto the orthogonal complement of the all-ones vector.
    pub fn project_perp(&self) -> DenseVector {
        let m = self.mean();
        DenseVector {
            entries: self.entries.iter().map(|x| x - m).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> DenseVector {
        DenseVector {
            entries: self.entries.iter().map(|x| x * c).collect(),
        }
    }

    fn project_perp_in_place(&mut self) {
        let m = self.mean();
        for x in &mut self.entries {
            *x -= m;
        }
    }

    fn scale_in_place(&mut self, c: f64) {
        for x in &mut self.entries {
            *x *= c;
        }
    }
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// An element of `{±1}^{n0}` stored as packed bits, bit 0 ↔ +1.
///
/// Entrywise product of two sign vectors is XOR of their bit words, so the
/// multiplicative code structure is exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector {
    words: Vec<u64>,
    len: usize,
}

impl SignVector {
    /// All-(+1) vector, the multiplicative identity.
    pub fn all_plus(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// Build from packed words, masking any tail bits beyond `len`.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        assert_eq!(words.len(), len.div_ceil(64));
        if len % 64 != 0 {
            let mask = (1u64 << (len % 64)) - 1;
            if let Some(last) = words.last_mut() {
                *last &= mask;
            }
        }
        Self { words, len }
    }

    pub fn from_fn(len: usize, mut is_minus: impl FnMut(usize) -> bool) -> Self {
        let mut v = Self::all_plus(len);
        for i in 0..len {
            if is_minus(i) {
                v.words[i / 64] |= 1u64 << (i % 64);
            }
        }
        v
    }

    pub fn from_signs(signs: &[i8]) -> Self {
        Self::from_fn(signs.len(), |i| signs[i] < 0)
    }

    /// A uniformly random sign vector.
    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        let mut words: Vec<u64> = (0..len.div_ceil(64)).map(|_| rng.gen()).collect();
        if len % 64 != 0 {
            let mask = (1u64 << (len % 64)) - 1;
            if let Some(last) = words.last_mut() {
                *last &= mask;
            }
        }
        Self { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// True iff entry `i` is −1.
    #[inline]
    pub fn is_minus(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    /// Entry `i` as ±1.
    #[inline]
    pub fn sign(&self, i: usize) -> f64 {
        if self.is_minus(i) {
            -1.0
        } else {
            1.0
        }
    }

    /// Number of −1 entries.
    pub fn count_minus(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `|E_i x_i|`, exactly.
    pub fn bias(&self) -> f64 {
        let minus = self.count_minus() as i64;
        let n = self.len as i64;
        ((n - 2 * minus).unsigned_abs()) as f64 / self.len as f64
    }

    /// Entrywise product (group operation of the multiplicative code).
    pub fn mul(&self, other: &SignVector) -> SignVector {
        assert_eq!(self.len, other.len);
        SignVector {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
            len: self.len,
        }
    }

    pub fn is_all_plus(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// The corresponding dense ±1 vector.
    pub fn to_dense(&self) -> DenseVector {
        DenseVector::new((0..self.len).map(|i| self.sign(i)).collect())
    }
}

/// `D_x v`: multiply entry `i` of `v` by `x_i`. Norm-preserving.
pub fn apply_sign(x: &SignVector, v: &DenseVector) -> Result<DenseVector> {
    if x.len() != v.len() {
        return Err(Error::DimensionMismatch(x.len(), v.len()));
    }
    Ok(apply_sign_unchecked(x, v))
}

pub(crate) fn apply_sign_unchecked(x: &SignVector, v: &DenseVector) -> DenseVector {
    let mut out = v.clone();
    apply_sign_in_place(x, &mut out);
    out
}

pub(crate) fn apply_sign_in_place(x: &SignVector, v: &mut DenseVector) {
    debug_assert_eq!(x.len(), v.len());
    for (i, e) in v.as_mut_slice().iter_mut().enumerate() {
        if x.is_minus(i) {
            *e = -*e;
        }
    }
}

/// A linear map on functions over `[n0]`, given by its forward action.
///
/// `apply_transpose` defaults to `apply`; nonsymmetric maps (products of
/// sign and adjacency operators) override it with the reversed composition.
pub trait LinOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &DenseVector) -> DenseVector;
    fn apply_transpose(&self, v: &DenseVector) -> DenseVector {
        self.apply(v)
    }
}

/// Result of a power-iteration operator-norm estimate.
///
/// `value` is the Rayleigh-quotient square root of the final iterate, hence
/// a certified lower bound on the true operator norm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
}

/// Options for [`operator_norm`].
#[derive(Debug, Clone)]
pub struct NormOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub restrict_to_perp: bool,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            restarts: 3,
            restrict_to_perp: false,
            seed: 0,
        }
    }
}

/// Estimate `‖op‖` (or `‖op|_{1⊥}‖` with `restrict_to_perp`) by power
/// iteration on `transposeforward`.
///
/// Returns the max over restarts; non-convergence within `max_iter` is
/// reported through the flag, never as an error.
pub fn operator_norm<O: LinOp>(op: &O, opts: &NormOptions) -> NormEstimate {
    let mut best_value = 0.0;
    let mut best_converged = false;
    let mut total_iter = 0;
    for restart in 0..opts.restarts.max(1) {
        let mut rng = substream(opts.seed, "operator-norm", restart as u64);
        let (value, iters, converged, _) = power_iteration(op, opts, &mut rng);
        total_iter += iters;
        if value > best_value || restart == 0 {
            best_value = value;
            best_converged = converged;
        }
    }
    NormEstimate {
        value: best_value,
        iterations: total_iter,
        restarts: opts.restarts.max(1),
        converged: best_converged,
    }
}

/// One power-iteration run on `opᵀ∘op`; also returns the final iterate
/// (used by the baseline demo to extract an extremal eigenvector).
pub(crate) fn power_iteration<O: LinOp>(
    op: &O,
    opts: &NormOptions,
    rng: &mut impl Rng,
) -> (f64, usize, bool, DenseVector) {
    let n = op.dim();
    let mut v = random_unit(n, opts.restrict_to_perp, rng);
    let mut prev = f64::NAN;
    for it in 1..=opts.max_iter {
        let mut w = op.apply_transpose(&op.apply(&v));
        if opts.restrict_to_perp {
            w.project_perp_in_place();
        }
        // Rayleigh quotient of vᵀ(opᵀop)v = ‖op v‖², guaranteed ≥ 0.
        let rho = v.inner(&w).max(0.0);
        let value = rho.sqrt();
        let wn = w.norm();
        if wn == 0.0 {
            // Iterate fell in the kernel: the norm along this start is 0.
            return (0.0, it, true, v);
        }
        w.scale_in_place(1.0 / wn);
        v = w;
        if !prev.is_nan() && (value - prev).abs() < opts.tol {
            return (value, it, true, v);
        }
        prev = value;
    }
    (prev, opts.max_iter, false, v)
}

fn random_unit(n: usize, perp: bool, rng: &mut impl Rng) -> DenseVector {
    loop {
        let mut v = DenseVector::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        if perp {
            v.project_perp_in_place();
        }
        let nv = v.norm();
        if nv > 1e-12 {
            v.scale_in_place(1.0 / nv);
            return v;
        }
    }
}

/// Composition `parts[k-1] ∘ ⋯ ∘ parts[0]` of symmetric contractions.
pub enum Factor<'a> {
    Sign(&'a SignVector),
    ProjectPerp,
}

pub struct ComposedOp<'a> {
    pub dim: usize,
    pub factors: Vec<Factor<'a>>,
}

impl LinOp for ComposedOp<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &DenseVector) -> DenseVector {
        let mut out = v.clone();
        for f in &self.factors {
            match f {
                Factor::Sign(x) => apply_sign_in_place(x, &mut out),
                Factor::ProjectPerp => out.project_perp_in_place(),
            }
        }
        out
    }

    fn apply_transpose(&self, v: &DenseVector) -> DenseVector {
        let mut out = v.clone();
        for f in self.factors.iter().rev() {
            match f {
                Factor::Sign(x) => apply_sign_in_place(x, &mut out),
                Factor::ProjectPerp => out.project_perp_in_place(),
            }
        }
        out
    }
}
