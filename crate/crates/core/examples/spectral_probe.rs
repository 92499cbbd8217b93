use biaswalk_core::ensemble::*;
use biaswalk_core::spectra::*;

fn main() {
    // K_6: eigenvalues 1 and -1/5 -> restricted norm 0.2
    let k6 = RegularGraph::complete(6);
    let est = operator_norm(&AdjacencyOp(&k6), &NormOptions { restrict_to_perp: true, ..Default::default() });
    println!("K6 restricted norm = {} (expect 0.2), converged={}", est.value, est.converged);

    // C_9 (odd): max |cos(2 pi k/9)| = cos(pi/9) ~ 0.9397
    let c9 = RegularGraph::cycle(9);
    let est = operator_norm(&AdjacencyOp(&c9), &NormOptions { restrict_to_perp: true, ..Default::default() });
    let oracle: f64 = (1..9).map(|k| (2.0*std::f64::consts::PI*k as f64/9.0).cos().abs()).fold(0.0, f64::max);
    println!("C9 restricted norm = {} (oracle {}), converged={}", est.value, oracle, est.converged);

    // C_8 (even, bipartite): norm 1
    let c8 = RegularGraph::cycle(8);
    let est = operator_norm(&AdjacencyOp(&c8), &NormOptions { restrict_to_perp: true, ..Default::default() });
    println!("C8 restricted norm = {} (expect 1.0)", est.value);

    // Certification at acceptance parameters
    let start = std::time::Instant::now();
    let mut passes = 0;
    for seed in 0..20u64 {
        let e = generate_ensemble(512, 8, 4, seed).unwrap();
        let cert = certify_ensemble(&e, &CertifyOptions { seed, ..Default::default() });
        if seed < 3 {
            println!("seed {}: per-graph max {:.6} (bound {:.6}), signed max {:.6} (bound {:.6}), passed={}",
                seed,
                cert.per_graph_norms.iter().cloned().fold(0.0f64, f64::max),
                cert.per_graph_bound, cert.max_signed_norm, cert.signed_bound, cert.passed);
        }
        if cert.passed { passes += 1; }
    }
    println!("passes: {}/20, total time {:?}", passes, start.elapsed());

    // And at n0=1024 for the pipeline criteria
    let start = std::time::Instant::now();
    let e = generate_ensemble(1024, 8, 4, 0).unwrap();
    let cert = certify_ensemble(&e, &CertifyOptions::default());
    println!("n0=1024 seed 0: passed={} in {:?}", cert.passed, start.elapsed());
}
