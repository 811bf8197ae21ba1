//! One check per acceptance criterion, run in sequence by `main`. Each prints a
//! single PASS/FAIL line. Tolerances and time budgets are fixed constants below.

use haarlm::dyadic::nu_of_mu;
use haarlm::experiments::diagonal::run_diagonal;
use haarlm::experiments::full::{run_full_ratio, test_function_norm, FullSettings};
use haarlm::experiments::lemmas::{sweep_lemmas, LemmaRanges};
use haarlm::experiments::offdiag::run_offdiagonal;
use haarlm::experiments::{ExperimentConfig, RunMode, P1, P2};
use haarlm::kernels::{certify_admissibility, eta_translate, KernelSet};
use haarlm::norms::{local_means_norm_tol, psi_k, SpaceParams};
use haarlm::poly::{q, Q};
use haarlm::projection::{block_profile, direct_block, haar_coefficients};
use haarlm::quad::integrate_adaptive;
use haarlm::{DyadicRational, PwPoly, QuadratureSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

const SLOPE_TOL: f64 = 0.05;
const P2_TARGET: f64 = 0.2167;
const OFFDIAG_MAX_RATIO: f64 = 0.5;
const STABILITY_LIMIT: f64 = 2.0;
const F_SPREAD_MAX: f64 = 2.0;
const RATIO_SLOPE_SLACK: f64 = 0.3;
const CONV_REL_TOL: f64 = 1e-10;
const PERIODIC_REL_TOL: f64 = 1e-8;
const FACTOR_REL_TOL: f64 = 1e-8;

const BUDGET_1: f64 = 10.0;
const BUDGET_2: f64 = 5.0;
const BUDGET_3: f64 = 120.0;
const BUDGET_4: f64 = 300.0;
const BUDGET_5: f64 = 300.0;
const BUDGET_6: f64 = 180.0;
const BUDGET_7: f64 = 300.0;
const BUDGET_8: f64 = 120.0;

fn d(m: i64, e: i64) -> DyadicRational {
    DyadicRational::new(m, e)
}

fn report(id: u32, title: &str, ok: bool, elapsed: f64, budget: f64, detail: &str) {
    let timed = elapsed <= budget;
    let verdict = if ok && timed { "PASS" } else { "FAIL" };
    println!("criterion {id} [{title}]: {verdict} ({elapsed:.1} s of {budget:.0} s) {detail}");
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(timed, "criterion {id} over budget: {elapsed:.1} s > {budget} s");
}

fn kernels_warm() -> &'static KernelSet {
    KernelSet::default_set()
}

fn criterion_1_exact_coefficient_identity() {
    let ks = kernels_warm();
    let t = Instant::now();
    let mut checked = 0u64;
    let mut bad = Vec::new();
    for k in 1..=6i64 {
        for n in 2..=6i64 {
            let want = -Q::new(1.into(), 1.into()) * DyadicRational::pow2(1 - n - k).to_rational();
            for mu in 0..(1i64 << k) {
                let f = eta_translate(&ks.eta, k + n, nu_of_mu(n, mu));
                let got = haar_coefficients(&f, k).get(mu);
                checked += 1;
                if got != want {
                    bad.push(format!("(k={k},N={n},mu={mu}): {got}"));
                }
            }
        }
    }
    let half = ks.eta.restrict(&DyadicRational::zero(), &d(1, -1)).integral();
    let ok = bad.is_empty() && half == q(1);
    report(1, "exact coefficient identity", ok, t.elapsed().as_secs_f64(), BUDGET_1, &format!("{checked} coefficients, int_0^1/2 eta = {half}, mismatches {bad:?}"));
}

fn criterion_2_kernel_certification() {
    let t = Instant::now();
    let ks = KernelSet::build(&Default::default(), 1.0).expect("kernels build");
    let fails = ks.check();
    let moments = (0..=8).all(|n| ks.eta.moment(n) == q(0) && ks.psi.moment(n) == q(0));
    let adm = certify_admissibility(&ks.psi0, &ks.psi, ks.epsilon, 256).expect("admissibility");
    let in_middle = ks.j.left >= d(1, -2) && ks.j.right <= d(3, -2);
    let shifted = ks.big_psi.translate(&d(1, -1)).scale(&q(-2));
    let identity = ks.psi_haar().equals_on(&shifted, &d(1, -2), &d(3, -2));
    let ok = fails.is_empty() && moments && adm.pass && adm.psi0_margin > 0.0 && adm.psi_margin > 0.0 && ks.c0 >= 1.0 && in_middle && identity;
    report(
        2,
        "kernel certification",
        ok,
        t.elapsed().as_secs_f64(),
        BUDGET_2,
        &format!(
            "moments {moments}, checks {fails:?}, margins ({:.3e}, {:.3e}), c0 = {}, J = [{}, {}], identity {identity}",
            adm.psi0_margin, adm.psi_margin, ks.c0, ks.j.left, ks.j.right
        ),
    );
}

fn criterion_3_diagonal_growth() {
    let ks = kernels_warm();
    let mut details = Vec::new();
    let mut ok = true;
    let mut worst = 0.0f64;
    for (params, target) in [(P1, P1.target_slope()), (P2, P2_TARGET)] {
        let t = Instant::now();
        let mut cfg = ExperimentConfig::new(params, (6..=14).collect(), 8);
        cfg.mode = RunMode::Periodic;
        match run_diagonal(&cfg, ks) {
            Ok(rep) => {
                let good = (rep.fit.slope - target).abs() <= SLOPE_TOL;
                ok &= good;
                details.push(format!("(p,q,s)=({},{},{}): slope {:.5} vs {target:.4}, lower bound held", params.p, params.q, params.s, rep.fit.slope));
            }
            Err(e) => {
                ok = false;
                details.push(format!("({},{},{}): {e}", params.p, params.q, params.s));
            }
        }
        worst = worst.max(t.elapsed().as_secs_f64());
    }
    report(3, "diagonal growth", ok, worst, BUDGET_3, &details.join("; "));
}

fn criterion_4_offdiagonal_domination() {
    let ks = kernels_warm();
    let t = Instant::now();
    let mut ok = true;
    let mut details = Vec::new();
    for n in [8, 10, 12] {
        let r8 = run_offdiagonal(&ExperimentConfig::new(P1, vec![n], 8), ks, n).expect("R=8 sweep");
        let r4 = run_offdiagonal(&ExperimentConfig::new(P1, vec![n], 4), ks, n).expect("R=4 sweep");
        let dominated = r8.ratio <= OFFDIAG_MAX_RATIO;
        let improves = r8.ratio <= r4.ratio;
        ok &= dominated && improves;
        details.push(format!(
            "N={n}: U/D {:.3e} (window alone {:.2}, dominant {:?}), R=4 {:.3e}",
            r8.ratio, r8.window_ratio, r8.dominant, r4.ratio
        ));
    }
    report(4, "off-diagonal domination", ok, t.elapsed().as_secs_f64(), BUDGET_4, &details.join("; "));
}

fn criterion_5_lemma_regimes() {
    let ks = kernels_warm();
    let t = Instant::now();
    let ranges = LemmaRanges::new(vec![3, 4, 5], P1.q);
    let rep = sweep_lemmas(&ranges, ks).expect("lemma sweep");
    let unstable: Vec<String> = rep
        .summaries
        .iter()
        .filter(|s| s.lemma != "block-recounted" && !(s.stability < STABILITY_LIMIT && s.max_ratio.is_finite()))
        .map(|s| format!("{} {} x{:.2}", s.lemma, s.regime, s.stability))
        .collect();
    let families = rep.summaries.iter().filter(|s| s.lemma != "block-recounted").count();
    let ok = unstable.is_empty() && rep.zero_cases_exact && families == 13;
    report(
        5,
        "lemma regimes",
        ok,
        t.elapsed().as_secs_f64(),
        BUDGET_5,
        &format!("{families} families, {} exact zeros, unstable {unstable:?}", rep.zero_cases),
    );
}

fn criterion_6_test_function_boundedness() {
    let ks = kernels_warm();
    let t = Instant::now();
    let cfg = ExperimentConfig::new(P1, vec![2, 3, 4, 5], 2);
    let st = FullSettings::new(P1);
    let norms: Vec<f64> = cfg.n_list.iter().map(|&n| test_function_norm(&cfg.frequency_config(n).unwrap(), ks, &st).expect("norm").value).collect();
    let spread = norms.iter().cloned().fold(0.0, f64::max) / norms.iter().cloned().fold(f64::INFINITY, f64::min);
    report(6, "test-function boundedness", spread <= F_SPREAD_MAX, t.elapsed().as_secs_f64(), BUDGET_6, &format!("norms {norms:.4?}, spread {spread:.4}"));
}

fn criterion_7_full_ratio_growth() {
    let ks = kernels_warm();
    let t = Instant::now();
    let mut cfg = ExperimentConfig::new(P1, vec![2, 3, 4, 5], 2);
    cfg.mode = RunMode::Direct;
    let rep = run_full_ratio(&cfg, ks).expect("full ratio");
    let floor = P1.target_slope() - RATIO_SLOPE_SLACK;
    let ok = rep.fit.slope >= floor && rep.strictly_increasing;
    let ratios: Vec<f64> = rep.points.iter().map(|p| p.ratio).collect();
    report(
        7,
        "full ratio growth",
        ok,
        t.elapsed().as_secs_f64(),
        BUDGET_7,
        &format!("ratios {ratios:.4?}, slope {:.3} (floor {floor:.3}), increasing {}", rep.fit.slope, rep.strictly_increasing),
    );
}

fn random_spline(rng: &mut ChaCha8Rng) -> PwPoly {
    let mut f = PwPoly::zero();
    for _ in 0..rng.gen_range(1..=3) {
        let e = -rng.gen_range(2..=6);
        let a = rng.gen_range(-16..16);
        let w = rng.gen_range(1..8);
        let coeffs: Vec<Q> = (0..rng.gen_range(1..=4)).map(|_| Q::new(rng.gen_range(-9i64..10).into(), rng.gen_range(1i64..5).into())).collect();
        f = f.add(&PwPoly::from_piece(d(a, e), d(a + w, e), coeffs));
    }
    f
}

/// `(f * g)(x)` by adaptive quadrature over the joint breakpoints.
fn quadrature_convolution(f: &PwPoly, g: &PwPoly, x: f64, spec: &QuadratureSpec) -> (f64, f64) {
    let mut cuts: Vec<f64> = f.pieces().iter().flat_map(|p| [p.left.to_f64(), p.right.to_f64()]).collect();
    cuts.extend(g.pieces().iter().flat_map(|p| [x - p.left.to_f64(), x - p.right.to_f64()]));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let (mut v, mut mag) = (0.0, 0.0);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        let h = |y: f64| f.eval_f64(y) * g.eval_f64(x - y);
        v += integrate_adaptive(&h, a, b, false, false, spec, 0.0).unwrap().0;
        let rough = QuadratureSpec { rel_tol: 1e-6, ..*spec };
        mag += integrate_adaptive(&|y: f64| h(y).abs(), a, b, false, false, &rough, 1e-12).unwrap().0;
    }
    (v, mag)
}

fn criterion_8_engine_oracles() {
    let ks = kernels_warm();
    let t = Instant::now();
    let spec = QuadratureSpec { nodes: 16, refinement: 2, rel_tol: 1e-13 };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut conv_worst = 0.0f64;
    for _ in 0..100 {
        let (f, g) = (random_spline(&mut rng), random_spline(&mut rng));
        let c = f.convolve(&g);
        let (lo, hi) = c.support().map(|(a, b)| (a.to_f64(), b.to_f64())).unwrap_or((0.0, 1.0));
        let x = lo + (hi - lo) * rng.gen_range(0.05..0.95);
        let (v, mag) = quadrature_convolution(&f, &g, x, &spec);
        let err = (c.eval_f64(x) - v).abs() / mag.max(f64::MIN_POSITIVE);
        conv_worst = conv_worst.max(err);
    }

    let mut per_worst = 0.0f64;
    let mut instances = 0;
    let norm_spec = QuadratureSpec::default();
    for nn in [3i64, 4] {
        for m in -2..=2i64 {
            for n in -2..=2i64 {
                let prof = block_profile(m, n, nn, ks, P1.q, &norm_spec).unwrap();
                for k in prof.min_k()..prof.min_k() + 2 {
                    if k + m < 0 || k + nn + n < nn {
                        continue;
                    }
                    let a = prof.norm_pow(k).unwrap();
                    let b = direct_block(k, k + nn + n, k + m, nn, ks).unwrap().lq_norm_pow(P1.q, &norm_spec).unwrap();
                    if a == 0.0 && b == 0.0 {
                        continue;
                    }
                    instances += 1;
                    per_worst = per_worst.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
                }
            }
        }
    }

    // p = q: the norm is the l^q sum of per-level L^q norms; s = -1 keeps f_N exact.
    let pr = SpaceParams::new(1.5, 1.5, -1.0);
    let cfg = ExperimentConfig::new(pr, vec![2], 2).frequency_config(2).unwrap();
    let mut f_n = PwPoly::zero();
    for l in cfg.levels() {
        for t in 0..(1i64 << (l - cfg.n)) {
            f_n = f_n.add(&eta_translate(&ks.eta, l, nu_of_mu(cfg.n, t)).scale(&DyadicRational::pow2(l).to_rational()));
        }
    }
    let suite = [f_n, eta_translate(&ks.eta, 3, 5).add(&eta_translate(&ks.eta, 5, 3).scale(&q(-2))), haarlm::kernels::haar_pw(2, 1)];
    let k_max = 10;
    let mut fac_worst = 0.0f64;
    for f in &suite {
        let r = local_means_norm_tol(f, &pr, ks, k_max, &norm_spec, f64::INFINITY).unwrap();
        let want: f64 = (0..=k_max)
            .map(|k| (k as f64 * pr.s * pr.q).exp2() * psi_k(ks, k).convolve(f).lq_norm_pow(pr.q, &norm_spec).unwrap())
            .sum::<f64>()
            .powf(1.0 / pr.q);
        fac_worst = fac_worst.max((r.value - want).abs() / want);
    }

    let ok = conv_worst <= CONV_REL_TOL && per_worst <= PERIODIC_REL_TOL && instances > 0 && fac_worst <= FACTOR_REL_TOL;
    report(
        8,
        "engine oracles",
        ok,
        t.elapsed().as_secs_f64(),
        BUDGET_8,
        &format!("convolution {conv_worst:.2e} over 100, periodic/direct {per_worst:.2e} over {instances}, p=q {fac_worst:.2e}"),
    );
}

fn main() -> std::process::ExitCode {
    let criteria: [(u32, fn()); 8] = [
        (1, criterion_1_exact_coefficient_identity),
        (2, criterion_2_kernel_certification),
        (3, criterion_3_diagonal_growth),
        (4, criterion_4_offdiagonal_domination),
        (5, criterion_5_lemma_regimes),
        (6, criterion_6_test_function_boundedness),
        (7, criterion_7_full_ratio_growth),
        (8, criterion_8_engine_oracles),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = Vec::new();
    for (id, run) in criteria {
        if let Err(e) = std::panic::catch_unwind(run) {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            if !msg.starts_with("criterion") {
                println!("criterion {id}: FAIL (error) {msg}");
            }
            failed.push(id);
        }
    }
    println!("acceptance: {} of 8 criteria passed, failed {:?}", 8 - failed.len(), failed);
    if failed.is_empty() {
        std::process::ExitCode::SUCCESS
    } else {
        std::process::ExitCode::FAILURE
    }
}
