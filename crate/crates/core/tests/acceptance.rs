//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.
//!
//! Run with `cargo test -p onebit-csit --test acceptance`.

use std::process::{Command, ExitCode};
use std::time::Instant;

use onebit_csit::airlink::{design_pilots, pack_bits, quantize, unpack_bits};
use onebit_csit::channel::{
    draw_channels_with, draw_supports, to_antenna_domain, AngularBasis, ScenarioConfig,
};
use onebit_csit::cli::write_csv;
use onebit_csit::evaluation::{
    non_increasing, optimal_precoder, run_experiment, snr_loss_db, Algorithm, ExperimentReport,
    Sweep, SweepParam,
};
use onebit_csit::numerics::{dft_unitary, frobenius_normalize, RandomSource};
use onebit_csit::recovery::{
    genie_ls, jbiht, select_top_rows, vote_common_support, Iteration, RecoveryInput, SupportRule,
};
use onebit_csit::{ComplexMatrix, C64};

const TREND_SLACK: f64 = 0.3;
const ORDER_SLACK: f64 = 0.2;
const GAP_SLACK: f64 = 0.2;

struct SweepRun {
    flag: String,
    report: ExperimentReport,
    csv: String,
}

fn sweep(param: SweepParam, values: &[f64]) -> SweepRun {
    let cfg = ScenarioConfig::default();
    let started = Instant::now();
    let report = run_experiment(
        &cfg,
        &Sweep::new(param, values.to_vec()),
        &Algorithm::ALL,
        1,
    )
    .expect("sweep runs");
    let mut csv = Vec::new();
    write_csv(&report, &mut csv).unwrap();
    let list: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    let flag = format!("{}={}", param.name(), list.join(","));
    eprintln!("  swept {flag} in {:.1} s", started.elapsed().as_secs_f64());
    SweepRun {
        flag,
        report,
        csv: String::from_utf8(csv).unwrap(),
    }
}

fn fmt_series(s: &[f64]) -> String {
    let parts: Vec<String> = s.iter().map(|v| format!("{v:.2}")).collect();
    format!("[{}]", parts.join(", "))
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn criterion_1(t: &SweepRun) -> Verdict {
    let j = t.report.series(Algorithm::Jbiht);
    let g = t.report.series(Algorithm::GenieLs);
    let at = |v: f64| t.report.points.iter().position(|p| p.value == v).unwrap();
    let trend = non_increasing(&j, TREND_SLACK);
    let at_64 = j[at(64.0)] <= 3.0;
    let gap_128 = j[at(128.0)] - g[at(128.0)];
    verdict(
        trend && at_64 && gap_128 <= 1.0,
        format!(
            "J-BIHT over T {} (non-increasing: {trend}); T=64 {:.3} dB ≤ 3; T=128 gap to genie-LS {gap_128:.3} dB ≤ 1",
            fmt_series(&j),
            j[at(64.0)]
        ),
    )
}

fn criterion_2(t: &SweepRun) -> Verdict {
    let order = [
        Algorithm::GenieLs,
        Algorithm::JbihtOracle,
        Algorithm::Jbiht,
        Algorithm::Biht,
    ];
    let series: Vec<Vec<f64>> = order.iter().map(|&a| t.report.series(a)).collect();
    let mut worst: f64 = f64::NEG_INFINITY;
    for p in 0..t.report.points.len() {
        for w in series.windows(2) {
            worst = worst.max(w[0][p] - w[1][p]);
        }
    }
    verdict(
        worst <= ORDER_SLACK,
        format!("genie-LS ≤ oracle ≤ J-BIHT ≤ BIHT at every T, worst violation {worst:.3} dB ≤ {ORDER_SLACK}"),
    )
}

fn criterion_3(c: &SweepRun) -> Verdict {
    let j = c.report.series(Algorithm::Jbiht);
    let b = c.report.series(Algorithm::Biht);
    let trend = non_increasing(&j, 0.0);
    let diff = (j[0] - b[0]).abs();
    let in_band = (1.0..=4.5).contains(&j[0]);
    verdict(
        trend && diff < 0.5 && in_band,
        format!(
            "J-BIHT over c {} (non-increasing: {trend}); c=0 |J-BIHT − BIHT| {diff:.3} dB < 0.5; c=0 J-BIHT {:.3} dB in [1, 4.5]",
            fmt_series(&j),
            j[0]
        ),
    )
}

fn criterion_4(k: &SweepRun) -> Verdict {
    let j = k.report.series(Algorithm::Jbiht);
    let b = k.report.series(Algorithm::Biht);
    let trend = non_increasing(&j, TREND_SLACK);
    let spread =
        b.iter().cloned().fold(f64::MIN, f64::max) - b.iter().cloned().fold(f64::MAX, f64::min);
    verdict(
        trend && spread < 0.5,
        format!(
            "J-BIHT over K {} (non-increasing: {trend}); BIHT {} spread {spread:.3} dB < 0.5",
            fmt_series(&j),
            fmt_series(&b)
        ),
    )
}

fn criterion_5(n: &SweepRun) -> Verdict {
    let j = n.report.series(Algorithm::Jbiht);
    let g = n.report.series(Algorithm::GenieLs);
    let gap: Vec<f64> = j.iter().zip(&g).map(|(a, b)| a - b).collect();
    let trend = non_increasing(&j, 0.0);
    let shrinks = non_increasing(&gap, GAP_SLACK);
    verdict(
        trend && shrinks,
        format!(
            "J-BIHT over N {} (non-increasing: {trend}); gap to genie-LS {} (shrinking: {shrinks})",
            fmt_series(&j),
            fmt_series(&gap)
        ),
    )
}

fn sign_matrix(t: usize, n: usize, code: u64) -> ComplexMatrix {
    let bit = |b: usize| if code >> b & 1 == 1 { 1.0 } else { -1.0 };
    ComplexMatrix::from_fn(t, n, |r, c| {
        let e = r * n + c;
        C64::new(bit(2 * e), bit(2 * e + 1))
    })
}

fn subsets(m: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << m)
        .filter(move |b| b.count_ones() as usize == k)
        .map(move |b| (0..m).filter(|j| b >> j & 1 == 1).collect())
}

/// Each property returns `None` on success or a description of the failure.
fn properties() -> Vec<(&'static str, Option<String>)> {
    let mut out: Vec<(&'static str, Option<String>)> = Vec::new();
    let mut rng = RandomSource::new(2024);

    out.push(("quantizer", {
        let mut bad = None;
        for _ in 0..200 {
            let z = ComplexMatrix::from_fn(6, 3, |_, _| {
                let v = rng.complex_normal();
                if rng.coin() {
                    C64::new(v.re, 0.0)
                } else {
                    v
                }
            });
            let q = quantize(&z);
            let closed = q
                .as_slice()
                .iter()
                .all(|v| v.re.abs() == 1.0 && v.im.abs() == 1.0);
            if !closed || quantize(&q) != q {
                bad = Some("alphabet or idempotence violated".to_string());
            }
        }
        bad
    }));

    out.push(("wire format", {
        let mut bad = None;
        for t in 1..=8 {
            for n in 1..=8 / t {
                for code in 0..1u64 << (2 * t * n) {
                    let q = sign_matrix(t, n, code);
                    let back = unpack_bits(&pack_bits(&q).unwrap(), t, n).unwrap();
                    if back != q {
                        bad = Some(format!("{t}x{n} code {code}"));
                    }
                }
            }
        }
        bad
    }));

    out.push(("DFT unitarity", {
        [1, 2, 8, 128].iter().find_map(|&n| {
            let f = dft_unitary(n).unwrap();
            let err = f
                .adjoint_mul(&f)
                .unwrap()
                .max_abs_diff(&ComplexMatrix::identity(n));
            (err >= 1e-12).then(|| format!("n={n} error {err:e}"))
        })
    }));

    out.push(("pilot power", {
        let p = 10f64.powf(1.5);
        let pilots = design_pilots(128, 64, p, &mut rng).unwrap();
        (0..64).find_map(|t| {
            let e: f64 = pilots.x.column(t).iter().map(|z| z.norm_sqr()).sum();
            ((e - p).abs() > 1e-9 * p).then(|| format!("column {t} power {e}"))
        })
    }));

    out.push(("angular round trip", {
        let basis = AngularBasis::new(128, 2).unwrap();
        let h_a = ComplexMatrix::from_fn(2, 128, |_, _| rng.complex_normal());
        let h = to_antenna_domain(&h_a, 128, 2).unwrap();
        let back = basis
            .a_r
            .adjoint_mul(&h)
            .unwrap()
            .matmul(&basis.a_t)
            .unwrap();
        let err = back.max_abs_diff(&h_a);
        (err >= 1e-10).then(|| format!("error {err:e}"))
    }));

    out.push(("support structure", {
        let cfg = ScenarioConfig::default();
        let basis = AngularBasis::new(cfg.m, cfg.n).unwrap();
        let mut bad = None;
        for draw in 0..10_000 {
            let sup = draw_supports(&cfg, &mut rng).unwrap();
            let c_ok = (cfg.c..=cfg.c + 1).contains(&sup.common.len());
            let s_ok = sup.per_user.iter().all(|s| {
                (cfg.s - 2..=cfg.s).contains(&s.len()) && sup.common.iter().all(|j| s.contains(j))
            });
            let cols_ok = draw % 100 != 0 || {
                let ch = draw_channels_with(&sup, &basis, &mut rng).unwrap();
                ch.angular.iter().zip(&sup.per_user).all(|(h, s)| {
                    (0..cfg.m).all(|j| {
                        let nz = h.column(j).iter().all(|z| *z != C64::new(0.0, 0.0));
                        let z = h.column(j).iter().all(|z| *z == C64::new(0.0, 0.0));
                        if s.contains(&j) {
                            nz
                        } else {
                            z
                        }
                    })
                })
            };
            if !(c_ok && s_ok && cols_ok) {
                bad = Some(format!("draw {draw}"));
            }
        }
        bad
    }));

    out.push(("thresholding and vote optimality", {
        let mut bad = None;
        for case in 0..300 {
            let m = 2 + rng.uniform_index(11);
            let s = 1 + rng.uniform_index(m);
            let norms: Vec<f64> = (0..m).map(|_| rng.complex_normal().norm_sqr()).collect();
            let sum =
                |set: &[usize], w: &dyn Fn(usize) -> f64| set.iter().map(|&j| w(j)).sum::<f64>();
            let chosen = select_top_rows(&norms, s, &[]);
            let best = subsets(m, s)
                .map(|x| sum(&x, &|j| norms[j]))
                .fold(f64::MIN, f64::max);
            if chosen.len() != s || (sum(&chosen, &|j| norms[j]) - best).abs() > 1e-12 * best {
                bad = Some(format!("thresholding case {case}"));
            }
            let k = 1 + rng.uniform_index(4);
            let supports: Vec<Vec<usize>> = (0..k)
                .map(|_| {
                    let size = 1 + rng.uniform_index(m);
                    rng.sample_indices(m, size)
                })
                .collect();
            let mut votes = vec![0.0; m];
            for &j in supports.iter().flatten() {
                votes[j] += 1.0;
            }
            let c = 1 + rng.uniform_index(m);
            let common = vote_common_support(&supports, &norms, c);
            let best = subsets(m, c)
                .map(|x| sum(&x, &|j| votes[j]))
                .fold(f64::MIN, f64::max);
            if common.len() != c || sum(&common, &|j| votes[j]) != best {
                bad = Some(format!("vote case {case}"));
            }
        }
        bad
    }));

    out.push(("J-BIHT fixed point", {
        // X̂ = ½·Hadamard and Ŷ generated by row 1: X̂ᴴŶ is already consistent.
        let had = [
            [1.0, 1.0, 1.0, 1.0],
            [1.0, -1.0, 1.0, -1.0],
            [1.0, 1.0, -1.0, -1.0],
            [1.0, -1.0, -1.0, 1.0],
        ];
        let sensing = ComplexMatrix::from_fn(4, 4, |r, c| C64::new(0.5 * had[r][c], 0.0));
        let y = ComplexMatrix::from_fn(4, 2, |r, c| {
            C64::new(had[r][1], if c == 0 { 1.0 } else { -1.0 } * had[r][1])
        });
        let input = RecoveryInput {
            sensing,
            measurements: vec![y.clone(), y.clone()],
            sparsity: vec![2, 2],
            common: 1,
            mu: 0.2,
            max_iter: 50,
        };
        let basis = AngularBasis::new(4, 2).unwrap();
        let r = jbiht(&input, &basis).unwrap();
        let init = frobenius_normalize(&input.sensing.adjoint_mul(&y).unwrap().adjoint()).unwrap();
        let mut it = Iteration::new(input.clone(), basis.clone(), SupportRule::Joint).unwrap();
        it.step();
        let before = it.estimate(0).clone();
        let again = it.step();
        if r.iterations != 1 || r.mismatches != 0 || r.angular[0].max_abs_diff(&init) > 1e-12 {
            Some(format!("stopped after {} iterations", r.iterations))
        } else if again != 0 || it.estimate(0) != &before {
            Some("a further step moved a consistent estimate".into())
        } else {
            None
        }
    }));

    out.push(("genie-LS exactness", {
        let cfg = ScenarioConfig::default();
        let basis = AngularBasis::new(cfg.m, cfg.n).unwrap();
        let mut quiet = RandomSource::zero_noise(5);
        let sup = draw_supports(&cfg, &mut quiet).unwrap();
        let ch = draw_channels_with(&sup, &basis, &mut quiet).unwrap();
        let pilots = design_pilots(cfg.m, cfg.t, cfg.power(), &mut quiet).unwrap();
        (0..cfg.k).find_map(|i| {
            let y = onebit_csit::airlink::downlink_receive(&ch.antenna[i], &pilots, &mut quiet)
                .unwrap();
            let r = genie_ls(&y, &pilots, &basis, &sup.per_user[i]).unwrap();
            let truth = frobenius_normalize(&ch.antenna[i]).unwrap();
            let err = r.estimates[0].max_abs_diff(&truth);
            (err >= 1e-8).then(|| format!("user {i} error {err:e}"))
        })
    }));

    out.push(("SNR loss", {
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 0.0]]);
        let est = ComplexMatrix::from_real_rows(&[&[1.0, 1.0]]);
        let closed = snr_loss_db(&h, &est).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let a = ComplexMatrix::from_fn(2, 16, |_, _| rng.complex_normal());
            let b = ComplexMatrix::from_fn(2, 16, |_, _| rng.complex_normal());
            worst = worst.min(snr_loss_db(&a, &b).unwrap());
        }
        if (closed - 3.0103).abs() > 1e-4 {
            Some(format!("closed form gave {closed}"))
        } else if worst < -1e-6 {
            Some(format!("negative loss {worst}"))
        } else {
            None
        }
    }));

    out.push(("precoder scale invariance", {
        let h = ComplexMatrix::from_fn(2, 16, |_, _| rng.complex_normal());
        let w = optimal_precoder(&h).unwrap();
        [1e-3, 0.5, 9.0, 1e4].iter().find_map(|&a| {
            let v = optimal_precoder(&h.scale(C64::new(a, 0.0))).unwrap();
            let overlap = w
                .iter()
                .zip(&v)
                .map(|(x, y)| x.conj() * y)
                .sum::<C64>()
                .norm();
            (overlap <= 1.0 - 1e-10).then(|| format!("scale {a}: overlap {overlap}"))
        })
    }));

    out
}

fn criterion_6() -> Verdict {
    let results = properties();
    let failed: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().map(|why| format!("{name}: {why}")))
        .collect();
    verdict(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} property groups hold", results.len())
        } else {
            failed.join("; ")
        },
    )
}

fn criterion_7(runs: &[&SweepRun]) -> Verdict {
    let mut mismatched = Vec::new();
    for run in runs {
        let out = Command::new(env!("CARGO_BIN_EXE_onebit-csit"))
            .args(["--sweep", &run.flag, "--jobs", "4", "--seed", "1"])
            .output()
            .expect("binary runs");
        if String::from_utf8_lossy(&out.stdout) != run.csv {
            mismatched.push(run.flag.clone());
        }
    }
    verdict(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!(
                "{} sweeps byte-identical between --jobs 1 and --jobs 4",
                runs.len()
            )
        } else {
            format!("CSV differs for {}", mismatched.join(", "))
        },
    )
}

fn main() -> ExitCode {
    eprintln!("running acceptance sweeps (100 trials per point, seed 1)");
    let t = sweep(SweepParam::T, &[32.0, 48.0, 64.0, 96.0, 128.0]);
    let c = sweep(SweepParam::C, &[0.0, 2.0, 4.0, 6.0]);
    let k = sweep(SweepParam::K, &[2.0, 4.0, 6.0, 8.0, 10.0]);
    let n = sweep(SweepParam::N, &[1.0, 2.0, 4.0]);

    let verdicts = [
        ("pilot-length trend", criterion_1(&t)),
        ("baseline ordering", criterion_2(&t)),
        ("common-support trend", criterion_3(&c)),
        ("user-count trend", criterion_4(&k)),
        ("receive-antenna trend", criterion_5(&n)),
        ("property suite", criterion_6()),
        ("determinism", criterion_7(&[&t, &c, &k, &n])),
    ];

    let mut all = true;
    for (i, (name, v)) in verdicts.iter().enumerate() {
        all &= v.pass;
        println!(
            "criterion {} {}: {name}: {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
