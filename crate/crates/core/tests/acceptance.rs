//! One line per acceptance criterion; the test fails if any line reads FAIL.

use polar_flex_core::sim::DEFAULT_BEC_EPSILON;
use polar_flex_core::*;
use rand::Rng;
use std::sync::Arc;
use std::time::Instant;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn noisy_frame(code: &PolarCode, ebn0: f64, seed: u64, frame: u64) -> Vec<f64> {
    let mut rng = frame_rng(seed, 0, frame);
    let mut u = vec![0u8; code.len()];
    for i in code.mask().info_positions() {
        u[i] = rng.random_range(0..2);
    }
    let x = encode(&u, code.bit_reversed()).unwrap();
    AwgnChannel::new(ebn0, code.rate()).unwrap().transmit(&x, &mut rng)
}

fn identification() -> Verdict {
    let mut checked = 0;
    let mut bad = 0;
    for eps in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for n in 2..=10u32 {
            let (_, v) = bec_construct(n, eps).unwrap();
            let report = verify_identification(&v, 0..=v.len()).unwrap();
            checked += report.checked;
            bad += report.mismatches.len() + report.ambiguous as usize;
        }
    }
    verdict(bad == 0, format!("{checked} node queries, {bad} mismatches"))
}

fn bit_exactness() -> Verdict {
    let cfg = LpsclConfig::reference();
    let limits = NodeLimits::hardware();
    let frames = 1000u64;
    let mut mismatches = 0;
    let mut total = 0;
    for n in [6u32, 8, 10] {
        let len = 1usize << n;
        for k in [len / 12, len / 3, len / 2, 2 * len / 3] {
            let code = PolarCode::bec(n, k, DEFAULT_BEC_EPSILON).unwrap();
            let mut sc_fast = FastScDecoder::new(FloatDomain::min_sum(), code.clone(), limits, false).unwrap();
            let mut sc = ScDecoder::new(FloatDomain::min_sum(), code.clone());
            let mut list = ListDecoder::new(FloatDomain::min_sum(), code.clone(), cfg.clone()).unwrap();
            let mut list_fast = ListDecoder::fast(FloatDomain::min_sum(), code.clone(), cfg.clone(), limits).unwrap();
            for frame in 0..frames {
                let ebn0 = [0.5, 1.5, 2.5][(frame % 3) as usize];
                let llr = noisy_frame(&code, ebn0, 1000 + k as u64, frame);
                if sc.decode(&llr).unwrap().u_hat != sc_fast.decode(&llr).unwrap().u_hat {
                    mismatches += 1;
                }
                if list.decode(&llr).unwrap().u_hat != list_fast.decode(&llr).unwrap().u_hat {
                    mismatches += 1;
                }
                total += 2;
            }
        }
    }
    verdict(mismatches == 0, format!("{total} frame comparisons, {mismatches} mismatches"))
}

fn operation_lists() -> Verdict {
    let v = Arc::new(ReliabilityVector::new(vec![7, 6, 5, 3, 4, 2, 1, 0]).unwrap());
    let limits = NodeLimits::unlimited();
    let list = |k, ext| generate_operation_list(&PolarCode::new(v.clone(), k).unwrap(), &limits, ext).serialize();
    let got = [list(4, false), list(4, true), list(5, true)];
    let want = ["F 2\nREP 2\nG 2\nSPC 2\n", "TYPEV 3\n", "TYPEIV 3\n"];
    let ok = got.iter().zip(want).all(|(g, w)| g == w);
    verdict(ok, format!("{:?}", got.iter().map(|s| s.trim().replace('\n', ", ")).collect::<Vec<_>>()))
}

fn fer_point(decoder: DecoderKind, ebn0: f64, frames: u64, target: f64, seed: u64) -> (bool, String) {
    let cfg = SimConfig {
        n: 10,
        ks: vec![512],
        decoder,
        ebn0_db: vec![ebn0],
        max_frames: frames,
        max_frame_errors: None,
        seed,
        ..SimConfig::default()
    };
    let point = run_monte_carlo(&cfg).unwrap().points.remove(0);
    let sigma = (target * (1.0 - target) / frames as f64).sqrt();
    let ok = (point.fer - target).abs() <= 3.0 * sigma;
    let line = format!(
        "{decoder} {ebn0} dB: FER {:.3e} over {} frames, target {target:.3e} +/- {:.2e}",
        point.fer,
        point.frames,
        3.0 * sigma
    );
    (ok, line)
}

fn fer_reproduction() -> Verdict {
    let checks = [
        fer_point(DecoderKind::Scl, 2.0, 20_000, 9.78e-3, 1),
        fer_point(DecoderKind::Lpscl, 2.0, 20_000, 1.08e-2, 2),
        fer_point(DecoderKind::Scl, 3.0, 200_000, 2.71e-4, 3),
    ];
    let pass = checks.iter().all(|c| c.0);
    verdict(pass, checks.map(|c| c.1).join("; "))
}

fn memory_accounting() -> Verdict {
    let (_, v) = bec_construct(10, DEFAULT_BEC_EPSILON).unwrap();
    let sets = [RateSet::Five, RateSet::Ten, RateSet::Twenty, RateSet::All];
    let est = hw_estimate(&v, &HwParams::reference(), &sets, &NodeLimits::hardware()).unwrap();
    let bits: Vec<u64> = est.mem_ext_memory_based.iter().map(|r| r.bits).collect();
    let increasing = bits.windows(2).all(|w| w[0] < w[1]);
    let pass = est.mem_ext_proposed == 10240 && est.high_depth == 14 && est.low_depth == 126 && increasing;
    verdict(
        pass,
        format!(
            "proposed {} bits, depths {}/{}, memory-based {bits:?} bits",
            est.mem_ext_proposed, est.high_depth, est.low_depth
        ),
    )
}

fn inequality() -> Verdict {
    let slack = verify_z_bound_inequality(1e-4);
    verdict(slack >= -1e-12, format!("minimum slack {slack:.3e}"))
}

fn latency_model() -> Verdict {
    let mut sc_ok = true;
    let mut fast_ok = true;
    let mut codes = 0;
    for n in 1..=10u32 {
        let len = 1usize << n;
        let cfg = SimConfig {
            n,
            ks: vec![len / 2],
            decoder: DecoderKind::Sc,
            ebn0_db: vec![1.0],
            max_frames: 50,
            max_frame_errors: None,
            workers: 1,
            ..SimConfig::default()
        };
        let steps = run_monte_carlo(&cfg).unwrap().points[0].mean_steps;
        sc_ok &= steps == (2 * len - 2) as f64;

        let (_, v) = bec_construct(n, 0.5).unwrap();
        let v = Arc::new(v);
        for k in 0..=len {
            let code = PolarCode::new(v.clone(), k).unwrap();
            let limits = NodeLimits::unlimited();
            let has_node = generate_operation_list(&code, &limits, false).ops.iter().any(|op| op.kind != OpKind::F && op.kind != OpKind::G);
            if !has_node {
                continue;
            }
            codes += 1;
            let out = fast_decode(&vec![1.0; len], &code, &limits, &FastMode::Sc, false).unwrap();
            fast_ok &= out.steps < 2 * len - 2;
        }
    }
    verdict(sc_ok && fast_ok, format!("SC steps 2N-2 for N=2..1024: {sc_ok}; fast SC below 2N-2 on {codes} codes: {fast_ok}"))
}

fn properties() -> Verdict {
    let mut failed = Vec::new();
    let mut rng = frame_rng(77, 0, 0);

    let code = PolarCode::bec(8, 128, DEFAULT_BEC_EPSILON).unwrap();
    let mut scl1 = true;
    let mut lp1 = true;
    for frame in 0..300 {
        let llr = noisy_frame(&code, 1.0, 78, frame);
        scl1 &= scl_decode(&llr, &code, 1).unwrap().u_hat == sc_decode(&llr, &code).unwrap().u_hat;
        lp1 &= lpscl_decode(&llr, &code, &LpsclConfig::scl(4)).unwrap().u_hat == scl_decode(&llr, &code, 4).unwrap().u_hat;
    }
    if !scl1 {
        failed.push("SCL(1)=SC");
    }
    if !lp1 {
        failed.push("LPSCL(P=1)=SCL");
    }

    let mut ml = true;
    for n in 1..=4u32 {
        let len = 1usize << n;
        for k in 1..=len.min(10) {
            let code = PolarCode::bec(n, k, 0.4).unwrap();
            let info: Vec<usize> = code.mask().info_positions().collect();
            for _ in 0..20 {
                let llr: Vec<f64> = (0..len).map(|_| rng.random_range(-3.0..3.0)).collect();
                let best = (0..1u32 << k)
                    .map(|w| {
                        let mut u = vec![0u8; len];
                        for (b, &p) in info.iter().enumerate() {
                            u[p] = ((w >> b) & 1) as u8;
                        }
                        let x = encode(&u, true).unwrap();
                        x.iter().zip(&llr).filter(|(&c, &a)| c != u8::from(a < 0.0)).map(|(_, a)| a.abs()).sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min);
                let out = scl_decode(&llr, &code, 1 << k).unwrap();
                ml &= (out.pm - best).abs() < 1e-9;
            }
        }
    }
    if !ml {
        failed.push("exhaustive list = ML");
    }

    let mut enc = true;
    for n in 1..=5u32 {
        let len = 1usize << n;
        let g = generator_matrix(n, true);
        for _ in 0..50 {
            let a: Vec<u8> = (0..len).map(|_| rng.random_range(0..2)).collect();
            let b: Vec<u8> = (0..len).map(|_| rng.random_range(0..2)).collect();
            let s: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let (ea, eb, es) = (encode(&a, true).unwrap(), encode(&b, true).unwrap(), encode(&s, true).unwrap());
            enc &= es.iter().zip(ea.iter().zip(&eb)).all(|(z, (x, y))| *z == x ^ y);
            let dense: Vec<u8> = (0..len).map(|c| (0..len).fold(0, |acc, r| acc ^ (a[r] & g[r][c]))).collect();
            enc &= dense == ea;
        }
    }
    if !enc {
        failed.push("encoder linearity/matrix");
    }

    let mut transitive = true;
    for n in 1..=6u32 {
        let order = PartialOrder::new(n);
        let len = 1usize << n;
        let deg = |i, j| order.compare(i, j) == Degradation::Degraded;
        for i in 0..len {
            for j in (0..len).filter(|&j| deg(i, j)) {
                transitive &= (0..len).filter(|&k| deg(j, k)).all(|k| deg(i, k));
            }
        }
    }
    if !transitive {
        failed.push("partial-order transitivity");
    }

    let base = SimConfig {
        n: 8,
        ks: vec![128],
        decoder: DecoderKind::Lpscl,
        ebn0_db: vec![1.5],
        max_frames: 400,
        max_frame_errors: Some(30),
        seed: 5,
        ..SimConfig::default()
    };
    let one = run_monte_carlo(&SimConfig { workers: 1, ..base.clone() }).unwrap().rows();
    let four = run_monte_carlo(&SimConfig { workers: 4, ..base }).unwrap().rows();
    if one != four {
        failed.push("worker-count determinism");
    }

    let detail = if failed.is_empty() { "all six suites hold".to_string() } else { format!("failed: {}", failed.join(", ")) };
    verdict(failed.is_empty(), detail)
}

fn main() {
    type Check = (&'static str, fn() -> Verdict);
    let criteria: [Check; 8] = [
        ("node identification", identification),
        ("fast/conventional bit-exactness", bit_exactness),
        ("operation lists", operation_lists),
        ("FER reproduction", fer_reproduction),
        ("memory accounting", memory_accounting),
        ("Z-bound inequality", inequality),
        ("latency model", latency_model),
        ("property suites", properties),
    ];
    let mut failures = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {tag} {name} ({:.1} s): {}", i + 1, start.elapsed().as_secs_f64(), v.detail);
        if !v.pass {
            failures.push(i + 1);
        }
    }
    if !failures.is_empty() {
        eprintln!("failed criteria: {failures:?}");
        std::process::exit(1);
    }
}
