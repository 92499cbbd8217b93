//! Random regular multigraphs and the all-signings spectral certificate.
//!
//! A graph is stored as a port-numbered rotation map: an involution on
//! `(vertex, port)` pairs. Multi-edges and self-loops are allowed; the
//! normalized adjacency action walks ports, so edge multiplicity is counted
//! correctly everywhere downstream.
//!
//! An ensemble is `t` independent graphs on a shared vertex set. The
//! certificate checks, numerically, that each graph is near-Ramanujan
//! (`‖A_j|_{1⊥}‖ ≤ 2/√d`) and that every signed average
//! `(1/t)·Σ_j σ_j A_j` restricted to `1⊥` has norm at most `2/√(td)`.
//! Signings are enumerated exhaustively up to a cutoff (2^{t−1} of them, by
//! ±σ symmetry) and otherwise sampled with a greedy sign-flip local search
//! from the worst sample.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::map_indexed;
use crate::rng::substream;
use crate::spectra::{operator_norm, DenseVector, LinOp, NormEstimate, NormOptions};

/// Additive slack applied to every certified inequality; norm estimates are
/// lower bounds, so the slack absorbs estimation error.
pub const CERT_SLACK: f64 = 1e-6;

/// Signings are enumerated exhaustively when `t` is at most this.
pub const DEFAULT_EXHAUSTIVE_LIMIT: u32 = 20;

/// A d-regular multigraph on `[n0]` as a rotation map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularGraph {
    n0: usize,
    d: usize,
    /// Flattened pairs: `rot[2*(v*d+p)] = v'`, `rot[2*(v*d+p)+1] = p'`.
    rot: Vec<u32>,
}

impl RegularGraph {
    /// Build from a raw rotation table, validating the involution property.
    pub fn from_rotation(n0: usize, d: usize, rot: Vec<u32>) -> Result<Self> {
        if n0 == 0 || d == 0 {
            return Err(Error::MalformedGraph("empty graph".into()));
        }
        if rot.len() != 2 * n0 * d {
            return Err(Error::MalformedGraph(format!(
                "rotation table has {} entries, expected {}",
                rot.len(),
                2 * n0 * d
            )));
        }
        let g = Self { n0, d, rot };
        for v in 0..n0 {
            for p in 0..d {
                let (u, q) = g.rot(v, p);
                if u >= n0 || q >= d {
                    return Err(Error::MalformedGraph(format!(
                        "rot({v},{p}) = ({u},{q}) out of range"
                    )));
                }
                if g.rot(u, q) != (v, p) {
                    return Err(Error::MalformedGraph(format!(
                        "rotation map is not an involution at ({v},{p})"
                    )));
                }
            }
        }
        Ok(g)
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn rot(&self, v: usize, p: usize) -> (usize, usize) {
        let base = 2 * (v * self.d + p);
        (self.rot[base] as usize, self.rot[base + 1] as usize)
    }

    /// The endpoint of the edge leaving `v` through port `p`.
    #[inline]
    pub fn step(&self, v: usize, p: usize) -> usize {
        self.rot[2 * (v * self.d + p)] as usize
    }

    pub fn rotation_table(&self) -> &[u32] {
        &self.rot
    }

    /// Normalized adjacency action `(A f)(v) = (1/d) Σ_p f(step(v,p))`.
    pub fn adjacency_apply(&self, f: &DenseVector) -> DenseVector {
        debug_assert_eq!(f.len(), self.n0);
        let input = f.as_slice();
        let inv_d = 1.0 / self.d as f64;
        let out = (0..self.n0)
            .map(|v| {
                let mut acc = 0.0;
                for p in 0..self.d {
                    acc += input[self.step(v, p)];
                }
                acc * inv_d
            })
            .collect();
        DenseVector::new(out)
    }

    /// Cycle graph, d = 2. Port 0 walks forward, port 1 backward.
    pub fn cycle(n0: usize) -> Self {
        assert!(n0 >= 2);
        let mut rot = vec![0u32; 4 * n0];
        for v in 0..n0 {
            let fwd = (v + 1) % n0;
            let bwd = (v + n0 - 1) % n0;
            rot[2 * (v * 2)] = fwd as u32;
            rot[2 * (v * 2) + 1] = 1;
            rot[2 * (v * 2 + 1)] = bwd as u32;
            rot[2 * (v * 2 + 1) + 1] = 0;
        }
        Self { n0, d: 2, rot }
    }

    /// Complete graph on `n0` vertices, d = n0 − 1.
    pub fn complete(n0: usize) -> Self {
        assert!(n0 >= 2);
        let d = n0 - 1;
        let mut rot = vec![0u32; 2 * n0 * d];
        for v in 0..n0 {
            for p in 0..d {
                let u = (v + p + 1) % n0;
                let q = d - 1 - p;
                rot[2 * (v * d + p)] = u as u32;
                rot[2 * (v * d + p) + 1] = q as u32;
            }
        }
        Self { n0, d, rot }
    }

    /// Two vertices joined by `d` parallel edges.
    pub fn double_edge(d: usize) -> Self {
        let mut rot = vec![0u32; 4 * d];
        for p in 0..d {
            rot[2 * p] = 1;
            rot[2 * p + 1] = p as u32;
            rot[2 * (d + p)] = 0;
            rot[2 * (d + p) + 1] = p as u32;
        }
        Self { n0: 2, d, rot }
    }
}

/// `A_G` as a linear map; restriction to `1⊥` is handled by the norm
/// estimator.
pub struct AdjacencyOp<'a>(pub &'a RegularGraph);

impl LinOp for AdjacencyOp<'_> {
    fn dim(&self) -> usize {
        self.0.n0()
    }
    fn apply(&self, v: &DenseVector) -> DenseVector {
        self.0.adjacency_apply(v)
    }
}

/// The signed average `v ↦ (1/t) Σ_j σ_j A_j v`.
pub struct SignedAverageOp<'a> {
    pub ensemble: &'a Ensemble,
    pub signing: &'a [i8],
}

impl LinOp for SignedAverageOp<'_> {
    fn dim(&self) -> usize {
        self.ensemble.n0()
    }
    fn apply(&self, v: &DenseVector) -> DenseVector {
        let mut acc = DenseVector::zeros(self.dim());
        for (g, &s) in self.ensemble.graphs().iter().zip(self.signing) {
            let av = g.adjacency_apply(v);
            let acc_s = acc.as_mut_slice();
            let av_s = av.as_slice();
            if s >= 0 {
                for (a, b) in acc_s.iter_mut().zip(av_s) {
                    *a += b;
                }
            } else {
                for (a, b) in acc_s.iter_mut().zip(av_s) {
                    *a -= b;
                }
            }
        }
        acc.scale(1.0 / self.ensemble.t() as f64)
    }
}

/// `t` regular graphs on a shared vertex set.
#[derive(Debug, Clone)]
pub struct Ensemble {
    n0: usize,
    d: usize,
    seed: u64,
    graphs: Vec<RegularGraph>,
}

impl Ensemble {
    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn t(&self) -> usize {
        self.graphs.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn graphs(&self) -> &[RegularGraph] {
        &self.graphs
    }

    /// Graph `H_j` by its 1-based schedule label.
    pub fn graph(&self, label: u32) -> &RegularGraph {
        &self.graphs[(label - 1) as usize]
    }

    pub fn from_parts(n0: usize, d: usize, seed: u64, graphs: Vec<RegularGraph>) -> Result<Self> {
        if graphs.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "ensemble needs t >= 2 graphs, got {}",
                graphs.len()
            )));
        }
        for g in &graphs {
            if g.n0() != n0 || g.d() != d {
                return Err(Error::InvalidParameter(
                    "ensemble graphs must share n0 and d".into(),
                ));
            }
        }
        Ok(Self {
            n0,
            d,
            seed,
            graphs,
        })
    }
}

/// Sample one random d-regular multigraph.
///
/// Even d: d/2 independent uniform pairings of the 2·n0 per-layer half-edge
/// stubs. Odd d: one uniform pairing of all n0·d stubs (configuration
/// model). Either way the result is a valid involution; self-loops and
/// multi-edges stay in.
fn random_regular_graph(n0: usize, d: usize, rng: &mut impl Rng) -> RegularGraph {
    let mut rot = vec![0u32; 2 * n0 * d];
    let mut pair_up = |stubs: &mut Vec<(u32, u32)>, rng: &mut dyn rand::RngCore| {
        stubs.shuffle(rng);
        for pair in stubs.chunks_exact(2) {
            let (v, p) = pair[0];
            let (u, q) = pair[1];
            let a = 2 * (v as usize * d + p as usize);
            let b = 2 * (u as usize * d + q as usize);
            rot[a] = u;
            rot[a + 1] = q;
            rot[b] = v;
            rot[b + 1] = p;
        }
    };
    if d % 2 == 0 {
        for layer in 0..d / 2 {
            let mut stubs: Vec<(u32, u32)> = (0..n0)
                .flat_map(|v| {
                    [
                        (v as u32, 2 * layer as u32),
                        (v as u32, 2 * layer as u32 + 1),
                    ]
                })
                .collect();
            pair_up(&mut stubs, rng);
        }
    } else {
        let mut stubs: Vec<(u32, u32)> = (0..n0)
            .flat_map(|v| (0..d).map(move |p| (v as u32, p as u32)))
            .collect();
        pair_up(&mut stubs, rng);
    }
    RegularGraph { n0, d, rot }
}

/// Generate `t` independent random d-regular multigraphs on `[n0]`.
pub fn generate_ensemble(n0: usize, d: usize, t: usize, seed: u64) -> Result<Ensemble> {
    if n0 * d % 2 != 0 {
        return Err(Error::OddHalfEdges { n0, d });
    }
    if n0 < 2 || d < 2 {
        return Err(Error::InvalidParameter(format!(
            "need n0 >= 2 and d >= 2, got n0={n0} d={d}"
        )));
    }
    if t < 2 {
        return Err(Error::InvalidParameter(format!("need t >= 2, got t={t}")));
    }
    let graphs = (0..t)
        .map(|j| {
            let mut rng = substream(seed, "graph", j as u64);
            random_regular_graph(n0, d, &mut rng)
        })
        .collect();
    Ensemble::from_parts(n0, d, seed, graphs)
}

/// Operator-norm estimate of the signed average restricted to `1⊥`.
pub fn signed_norm(ensemble: &Ensemble, signing: &[i8], opts: &NormOptions) -> NormEstimate {
    assert_eq!(signing.len(), ensemble.t());
    let op = SignedAverageOp { ensemble, signing };
    operator_norm(
        &op,
        &NormOptions {
            restrict_to_perp: true,
            ..opts.clone()
        },
    )
}

/// How the signings were searched.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SigningMode {
    Exhaustive,
    /// Random signings plus greedy single-flip local search from the worst.
    Sampled { count: usize },
}

/// Numerical certificate for the all-signings near-Ramanujan property.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub per_graph_norms: Vec<f64>,
    pub max_signed_norm: f64,
    pub signing_mode: SigningMode,
    pub worst_signing: Vec<i8>,
    pub per_graph_bound: f64,
    pub signed_bound: f64,
    pub slack: f64,
    pub passed: bool,
}

/// Options for [`certify_ensemble`].
#[derive(Debug, Clone)]
pub struct CertifyOptions {
    pub exhaustive_limit: u32,
    pub sample_count: usize,
    pub seed: u64,
    pub norm: NormOptions,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
            sample_count: 64,
            seed: 0,
            norm: NormOptions::default(),
        }
    }
}

fn signing_from_index(index: u64, t: usize) -> Vec<i8> {
    // sigma_0 fixed to +1: signings come in ±σ pairs with equal norm.
    (0..t)
        .map(|j| {
            if j == 0 {
                1
            } else if (index >> (j - 1)) & 1 == 1 {
                -1
            } else {
                1
            }
        })
        .collect()
}

/// Certify an ensemble: per-graph norms against `2/√d`, signed averages
/// against `2/√(td)`. Failure is a `passed = false` certificate, never an
/// error.
pub fn certify_ensemble(ensemble: &Ensemble, opts: &CertifyOptions) -> Certificate {
    let d = ensemble.d() as f64;
    let t = ensemble.t();
    let per_graph_bound = 2.0 / d.sqrt();
    let signed_bound = 2.0 / (t as f64 * d).sqrt();

    let per_graph_norms: Vec<f64> = map_indexed(t, |j| {
        let est = operator_norm(
            &AdjacencyOp(&ensemble.graphs()[j]),
            &NormOptions {
                restrict_to_perp: true,
                seed: opts.seed.wrapping_add(j as u64),
                ..opts.norm.clone()
            },
        );
        est.value
    });

    let norm_of = |signing: &[i8], task: u64| -> f64 {
        signed_norm(
            ensemble,
            signing,
            &NormOptions {
                seed: opts.seed ^ task.wrapping_mul(0x9E37_79B9_7F4A_7C15),
                ..opts.norm.clone()
            },
        )
        .value
    };

    let (max_signed_norm, worst_signing, signing_mode) = if t as u32 <= opts.exhaustive_limit {
        let count = 1usize << (t - 1);
        let norms = map_indexed(count, |idx| {
            let signing = signing_from_index(idx as u64, t);
            (norm_of(&signing, idx as u64), signing)
        });
        let (norm, signing) = norms
            .into_iter()
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .expect("at least one signing");
        (norm, signing, SigningMode::Exhaustive)
    } else {
        let samples = map_indexed(opts.sample_count, |i| {
            let mut rng = substream(opts.seed, "signing-sample", i as u64);
            let signing: Vec<i8> = std::iter::once(1i8)
                .chain((1..t).map(|_| if rng.gen::<bool>() { 1 } else { -1 }))
                .collect();
            (norm_of(&signing, 1_000_000 + i as u64), signing)
        });
        let (mut best_norm, mut best_signing) = samples
            .into_iter()
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .expect("at least one sample");
        // Greedy adversarial search: flip the single sign that most
        // increases the norm until no flip improves.
        let mut task = 2_000_000u64;
        loop {
            let flips = map_indexed(t - 1, |j| {
                let mut cand = best_signing.clone();
                cand[j + 1] = -cand[j + 1];
                (norm_of(&cand, task + j as u64), cand)
            });
            task += t as u64;
            let (norm, cand) = flips
                .into_iter()
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .expect("t >= 2");
            if norm > best_norm {
                best_norm = norm;
                best_signing = cand;
            } else {
                break;
            }
        }
        (
            best_norm,
            best_signing,
            SigningMode::Sampled {
                count: opts.sample_count,
            },
        )
    };

    let passed = per_graph_norms
        .iter()
        .all(|&x| x <= per_graph_bound + CERT_SLACK)
        && max_signed_norm <= signed_bound + CERT_SLACK;

    Certificate {
        per_graph_norms,
        max_signed_norm,
        signing_mode,
        worst_signing,
        per_graph_bound,
        signed_bound,
        slack: CERT_SLACK,
        passed,
    }
}

/// Generate-and-certify with the retry policy: seeds `seed, seed+1, …` until
/// a certificate passes, at most `max_attempts` tries.
pub fn generate_certified(
    n0: usize,
    d: usize,
    t: usize,
    seed: u64,
    max_attempts: u32,
    opts: &CertifyOptions,
) -> Result<(Ensemble, Certificate)> {
    for attempt in 0..max_attempts {
        let ensemble = generate_ensemble(n0, d, t, seed + attempt as u64)?;
        let cert = certify_ensemble(&ensemble, opts);
        if cert.passed {
            return Ok((ensemble, cert));
        }
    }
    Err(Error::CertificationExhausted {
        attempts: max_attempts,
    })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Text format: line 1 `n0 d`, then n0*d lines `v p v' p'`, 0-indexed.
pub fn write_graph_text(g: &RegularGraph) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", g.n0(), g.d()));
    for v in 0..g.n0() {
        for p in 0..g.d() {
            let (u, q) = g.rot(v, p);
            out.push_str(&format!("{v} {p} {u} {q}\n"));
        }
    }
    out
}

pub fn read_graph_text(text: &str) -> Result<RegularGraph> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedGraph("empty graph file".into()))?;
    let mut it = header.split_whitespace();
    let n0: usize = it
        .next()
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| Error::MalformedGraph("bad header".into()))?;
    let d: usize = it
        .next()
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| Error::MalformedGraph("bad header".into()))?;
    if n0 == 0 || d == 0 {
        return Err(Error::MalformedGraph("empty graph".into()));
    }
    let mut rot = vec![u32::MAX; 2 * n0 * d];
    let mut seen = 0usize;
    for line in lines {
        let fields: Vec<usize> = line
            .split_whitespace()
            .map(|x| {
                x.parse()
                    .map_err(|e| Error::MalformedGraph(format!("bad entry {x}: {e}")))
            })
            .collect::<Result<_>>()?;
        let [v, p, u, q] = fields[..] else {
            return Err(Error::MalformedGraph(format!(
                "expected 4 fields, got {}",
                fields.len()
            )));
        };
        if v >= n0 || p >= d || u >= n0 || q >= d {
            return Err(Error::MalformedGraph(format!(
                "entry ({v},{p}) -> ({u},{q}) out of range"
            )));
        }
        rot[2 * (v * d + p)] = u as u32;
        rot[2 * (v * d + p) + 1] = q as u32;
        seen += 1;
    }
    if seen != n0 * d {
        return Err(Error::MalformedGraph(format!(
            "expected {} rotation lines, got {seen}",
            n0 * d
        )));
    }
    RegularGraph::from_rotation(n0, d, rot)
}

#[derive(Serialize, Deserialize)]
struct EnsembleFile {
    n0: usize,
    d: usize,
    t: usize,
    seed: u64,
    /// Inline rotation tables, one per graph, in the flattened pair layout.
    graphs: Vec<Vec<u32>>,
    certificate: Option<Certificate>,
}

/// JSON envelope with inline graphs plus the certificate, if any.
pub fn write_ensemble_json(ensemble: &Ensemble, cert: Option<&Certificate>) -> String {
    let file = EnsembleFile {
        n0: ensemble.n0(),
        d: ensemble.d(),
        t: ensemble.t(),
        seed: ensemble.seed(),
        graphs: ensemble
            .graphs()
            .iter()
            .map(|g| g.rotation_table().to_vec())
            .collect(),
        certificate: cert.cloned(),
    };
    serde_json::to_string(&file).expect("ensemble serialization cannot fail")
}

pub fn read_ensemble_json(text: &str) -> Result<(Ensemble, Option<Certificate>)> {
    let file: EnsembleFile = serde_json::from_str(text)?;
    if file.graphs.len() != file.t {
        return Err(Error::MalformedGraph(format!(
            "ensemble lists t={} but contains {} graphs",
            file.t,
            file.graphs.len()
        )));
    }
    let graphs: Vec<RegularGraph> = file
        .graphs
        .into_iter()
        .map(|rot| RegularGraph::from_rotation(file.n0, file.d, rot))
        .collect::<Result<_>>()?;
    let ensemble = Ensemble::from_parts(file.n0, file.d, file.seed, graphs)?;
    Ok((ensemble, file.certificate))
}
