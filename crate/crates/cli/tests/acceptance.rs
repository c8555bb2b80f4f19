//! Acceptance suite: one test per shipped criterion, each printing a
//! PASS/FAIL line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines for passing criteria too.

use std::path::{Path, PathBuf};
use std::process::Command;

use ultracarl_core::domain::{DomainModel, Polynomial, SpatialShape};
use ultracarl_core::fields::{
    box_op, generate_suite, make_bump, sup_bounds, AnalyticField, CoefficientSet, Monomial,
    SuiteSpec, TrigTerm,
};
use ultracarl_core::geometry::{split_gradient, to_null_frame, Signature, SpaceTimePoint};
use ultracarl_core::par::Sequential;
use ultracarl_core::quadrature::Resolution;
use ultracarl_core::regions::convergence_scan;
use ultracarl_core::rng;
use ultracarl_core::verify::{
    calibrate, choose_a, verify_absorption, verify_boundary, verify_interior, GradientKind,
    GradientVariant, VerifyContext,
};
use ultracarl_core::weight::{derivative_bound_ratio, eval_zeta, grad_log_zeta, CarlemanParams};

fn sig(m: usize, n: usize) -> Signature {
    Signature::new(m, n).unwrap()
}

fn unit_ball(m: usize, n: usize, t_half: f64) -> DomainModel {
    DomainModel::new_static(
        sig(m, n),
        t_half,
        SpatialShape::Ball {
            center: vec![0.0; n],
            radius: 1.0,
        },
    )
    .unwrap()
}

fn ulp_diff(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let map = |x: f64| -> i128 {
        let bits = x.to_bits();
        if bits >> 63 == 1 {
            -((bits & 0x7fff_ffff_ffff_ffff) as i128)
        } else {
            bits as i128
        }
    };
    (map(a) - map(b)).unsigned_abs() as u64
}

fn pass(name: &str, detail: String) {
    println!("acceptance {name}: PASS ({detail})");
}

#[test]
fn criterion_01_geometry_identities() {
    let mut gen = rng::seeded(1001);
    let mut exterior = 0usize;
    let mut max_ulp = 0u64;
    for case in 0..10_000 {
        let (s, p) = if case % 2 == 0 {
            (sig(1, 2), SpaceTimePoint::new(vec![0.25], vec![-0.5, 0.75]))
        } else {
            (
                sig(2, 2),
                SpaceTimePoint::new(vec![0.1, -0.3], vec![0.4, 0.0]),
            )
        };
        let q = SpaceTimePoint::new(
            (0..s.m())
                .map(|_| rng::range(&mut gen, -4.0, 4.0))
                .collect(),
            (0..s.n())
                .map(|_| rng::range(&mut gen, -4.0, 4.0))
                .collect(),
        );
        let frame = to_null_frame(q.as_ref(), &p, s).unwrap();
        // Quarter form evaluated stably (factored difference of squares).
        let quarter = 0.25 * ((frame.r - frame.tau) * (frame.r + frame.tau));
        let d = ulp_diff(frame.f, quarter);
        max_ulp = max_ulp.max(d);
        assert!(d <= 4, "f two ways differ by {d} ulp");
        if frame.f > 0.0 {
            exterior += 1;
            assert!(
                0.0 < -frame.u && -frame.u < frame.r,
                "u inequality violated"
            );
            assert!(0.0 < frame.v && frame.v < frame.r, "v inequality violated");
            assert!(frame.f < frame.r * frame.r, "f inequality violated");
        }
    }
    pass(
        "1 (geometry identities)",
        format!("10^4 points, max {max_ulp} ulp, {exterior} strict exterior checks, 0 violations"),
    );
}

#[test]
fn criterion_02_gradient_decomposition() {
    let s = sig(2, 3);
    let p = SpaceTimePoint::new(vec![0.2, -0.1], vec![0.0, 0.3, -0.2]);
    let mut gen = rng::seeded(1002);
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    while checked < 1000 {
        let q = SpaceTimePoint::new(
            (0..2).map(|_| rng::range(&mut gen, -2.0, 2.0)).collect(),
            (0..3).map(|_| rng::range(&mut gen, -2.0, 2.0)).collect(),
        );
        let frame = to_null_frame(q.as_ref(), &p, s).unwrap();
        if frame.r < 1e-3 || frame.tau < 1e-3 {
            continue;
        }
        checked += 1;
        let gt: Vec<f64> = (0..2).map(|_| rng::range(&mut gen, -3.0, 3.0)).collect();
        let gx: Vec<f64> = (0..3).map(|_| rng::range(&mut gen, -3.0, 3.0)).collect();
        let split = split_gradient(&gt, &gx, q.as_ref(), &p, s).unwrap();
        let gx2: f64 = gx.iter().map(|g| g * g).sum();
        let gt2: f64 = gt.iter().map(|g| g * g).sum();
        let rel_x = (split.dr * split.dr + split.q_sph - gx2).abs() / gx2.max(1e-30);
        let rel_t = (split.dtau * split.dtau + split.q_tmp - gt2).abs() / gt2.max(1e-30);
        worst = worst.max(rel_x).max(rel_t);
        assert!(
            rel_x <= 1e-12 && rel_t <= 1e-12,
            "decomposition identity broke: {rel_x} {rel_t}"
        );
    }
    pass(
        "2 (gradient decomposition)",
        format!("10^3 pairs, worst relative error {worst:.3e}"),
    );
}

#[test]
fn criterion_03_weight_oracle() {
    // Golden table comparison.
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/tests/data/golden_zeta.csv"
    );
    let text = std::fs::read_to_string(path).expect("golden table");
    let mut count = 0usize;
    let mut worst = 0.0f64;
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let parse_vec =
            |s: &str| -> Vec<f64> { s.split(';').map(|v| v.parse().unwrap()).collect() };
        let s = sig(cols[0].parse().unwrap(), cols[1].parse().unwrap());
        let p = SpaceTimePoint::new(parse_vec(cols[2]), parse_vec(cols[3]));
        let q = SpaceTimePoint::new(parse_vec(cols[4]), parse_vec(cols[5]));
        let mut params = CarlemanParams::new(
            p,
            cols[6].parse().unwrap(),
            cols[7].parse().unwrap(),
            cols[8].parse().unwrap(),
            10.0,
        );
        params.r_bound = 10.0;
        let golden: f64 = cols[9].parse().unwrap();
        let w = eval_zeta(q.as_ref(), &params, s).unwrap();
        // Relative error of zeta equals the absolute log difference.
        let diff = (w.log_zeta - golden).abs();
        worst = worst.max(diff);
        assert!(diff <= 1e-12, "golden deviation {diff:.3e}");
        count += 1;
    }
    assert_eq!(count, 100);

    // Near-cone order scan: log zeta / log f -> 2a within 1% by f = 1e-6 R^2.
    let s = sig(1, 2);
    let params = CarlemanParams::new(SpaceTimePoint::zero(s), 9.0, 0.1, 0.01, 1.0);
    let r: f64 = 0.8;
    let mut final_ratio = f64::NAN;
    for k in 2..=6 {
        let f = 10f64.powi(-k);
        let tau2 = r * r - 4.0 * f;
        let q = SpaceTimePoint::new(vec![tau2.sqrt()], vec![r, 0.0]);
        let w = eval_zeta(q.as_ref(), &params, s).unwrap();
        let frame = to_null_frame(q.as_ref(), &params.p, s).unwrap();
        final_ratio = w.log_zeta / frame.f.ln() / (2.0 * params.a);
    }
    assert!(
        (final_ratio - 1.0).abs() < 0.01,
        "near-cone order off: {final_ratio}"
    );
    pass(
        "3 (weight correctness)",
        format!("100 golden points, worst |d log zeta| {worst:.3e}; cone order {final_ratio:.5}"),
    );
}

#[test]
fn criterion_04_derivative_bound() {
    let domains: Vec<(DomainModel, SpaceTimePoint, f64)> = vec![
        (unit_ball(1, 2, 4.0), SpaceTimePoint::zero(sig(1, 2)), 1.0),
        (
            DomainModel::new_static(
                sig(1, 2),
                4.0,
                SpatialShape::Box {
                    lo: vec![-1.0, -1.0],
                    hi: vec![1.0, 1.0],
                },
            )
            .unwrap(),
            SpaceTimePoint::zero(sig(1, 2)),
            2f64.sqrt(),
        ),
        (unit_ball(2, 2, 4.0), SpaceTimePoint::zero(sig(2, 2)), 1.0),
    ];
    let mut gen = rng::seeded(1004);
    let mut total = 0usize;
    let mut max_ratio = 0.0f64;
    let mut max_fd = 0.0f64;
    for (dom, p, r_bound) in &domains {
        let s = dom.sig();
        let a_min = (s.dim() * s.dim()) as f64;
        let param_sets = [
            CarlemanParams::from_delta(p.clone(), a_min, 0.1, *r_bound),
            CarlemanParams::from_delta(p.clone(), 2.0 * a_min, 0.05, *r_bound),
            CarlemanParams::new(
                p.clone(),
                3.0 * a_min,
                0.05 / r_bound,
                0.005 / r_bound,
                *r_bound,
            ),
        ];
        let (lo, hi) = dom.spatial_bbox();
        for params in &param_sets {
            assert!(
                params.validate(s).is_empty(),
                "parameter set must be admissible"
            );
            let mut count = 0usize;
            let mut fd_checked = 0usize;
            while count < 1200 {
                let q = SpaceTimePoint::new(
                    (0..s.m())
                        .map(|_| rng::range(&mut gen, -dom.t_half(), dom.t_half()))
                        .collect(),
                    (0..s.n())
                        .map(|j| rng::range(&mut gen, lo[j], hi[j]))
                        .collect(),
                );
                if !dom.contains(q.as_ref()) {
                    continue;
                }
                let frame = to_null_frame(q.as_ref(), p, s).unwrap();
                if frame.f <= 1e-6 {
                    continue;
                }
                count += 1;
                total += 1;
                let ratio = derivative_bound_ratio(q.as_ref(), params, s).unwrap();
                max_ratio = max_ratio.max(ratio);
                assert!(ratio <= 10.0, "derivative bound ratio {ratio} > 10");

                if frame.f >= 0.01 && fd_checked < 40 {
                    fd_checked += 1;
                    let grad = grad_log_zeta(q.as_ref(), params, s).unwrap();
                    let h = 1e-5;
                    #[allow(clippy::needless_range_loop)]
                    for axis in 0..s.dim() {
                        let mut qp = q.clone();
                        let mut qm = q.clone();
                        if axis < s.m() {
                            qp.t[axis] += h;
                            qm.t[axis] -= h;
                        } else {
                            qp.x[axis - s.m()] += h;
                            qm.x[axis - s.m()] -= h;
                        }
                        let lp = eval_zeta(qp.as_ref(), params, s).unwrap().log_zeta;
                        let lm = eval_zeta(qm.as_ref(), params, s).unwrap().log_zeta;
                        if lp == f64::NEG_INFINITY || lm == f64::NEG_INFINITY {
                            continue;
                        }
                        let fd = (lp - lm) / (2.0 * h);
                        let rel = (grad[axis] - fd).abs() / fd.abs().max(1e-9);
                        max_fd = max_fd.max(rel);
                        assert!(rel <= 1e-6, "gradient/fd relative gap {rel:.3e}");
                    }
                }
            }
        }
    }
    assert!(total >= 10_000);
    pass(
        "4 (derivative bound)",
        format!(
            "{total} admissible samples, max ratio {max_ratio:.4} <= 10, max fd gap {max_fd:.2e}"
        ),
    );
}

struct Protocol {
    res: Resolution,
    suite_a: Vec<AnalyticField>,
    suite_b: Vec<AnalyticField>,
}

fn protocol(dom: &DomainModel) -> Protocol {
    Protocol {
        res: Resolution::new(32, 32, 128),
        suite_a: generate_suite(
            dom,
            &SuiteSpec {
                count: 20,
                seed: 42,
                ..SuiteSpec::default()
            },
        ),
        suite_b: generate_suite(
            dom,
            &SuiteSpec {
                count: 20,
                seed: 43,
                ..SuiteSpec::default()
            },
        ),
    }
}

#[test]
fn criterion_05_boundary_estimate() {
    let dom = unit_ball(1, 2, 1.5);
    let params = CarlemanParams::from_delta(SpaceTimePoint::zero(sig(1, 2)), 9.0, 0.1, 1.0);
    let seq = Sequential;
    let proto = protocol(&dom);

    let ctx = VerifyContext::prepare(&dom, &params, proto.res, &seq).unwrap();
    let cal = calibrate(&ctx, &proto.suite_a, GradientKind::Boundary, 0.5).unwrap();
    assert!(cal.c_max.is_finite() && cal.c_max > 0.0);
    let consts = cal.constants();

    let mut min_margin = f64::INFINITY;
    for field in &proto.suite_b {
        let rep = verify_boundary(&ctx, field, &consts).unwrap();
        min_margin = min_margin.min(rep.margin);
        assert!(rep.pass, "holdout margin negative: {}", rep.margin);
    }

    let ctx2 = VerifyContext::prepare(&dom, &params, proto.res.doubled(), &seq).unwrap();
    let mut min_margin_2x = f64::INFINITY;
    for field in &proto.suite_b {
        let rep = verify_boundary(&ctx2, field, &consts).unwrap();
        min_margin_2x = min_margin_2x.min(rep.margin);
        assert!(rep.pass, "holdout margin negative at 2x: {}", rep.margin);
    }
    pass(
        "5 (boundary estimate)",
        format!(
            "C = {:.3e} (max {:.3e}); holdout min margins {min_margin:.3e} / {min_margin_2x:.3e}",
            consts.c, cal.c_max
        ),
    );
}

#[test]
fn criterion_06_interior_estimate() {
    let dom = unit_ball(1, 2, 1.5);
    let params = CarlemanParams::from_delta(SpaceTimePoint::zero(sig(1, 2)), 10.0, 0.1, 1.0);
    let seq = Sequential;
    let proto = protocol(&dom);

    let ctx = VerifyContext::prepare(&dom, &params, proto.res, &seq).unwrap();
    let ctx2 = VerifyContext::prepare(&dom, &params, proto.res.doubled(), &seq).unwrap();
    let mut details = Vec::new();
    for variant in [GradientVariant::Temporal, GradientVariant::Spatial] {
        let kind = GradientKind::Interior(variant);
        let cal = calibrate(&ctx, &proto.suite_a, kind, 0.5).unwrap();
        let consts = cal.constants();
        for field in &proto.suite_b {
            let rep = verify_interior(&ctx, field, &consts, variant).unwrap();
            assert!(rep.pass, "{variant:?} holdout margin {}", rep.margin);
            let rep2 = verify_interior(&ctx2, field, &consts, variant).unwrap();
            assert!(
                rep2.pass,
                "{variant:?} holdout margin at 2x {}",
                rep2.margin
            );
        }
        details.push(format!("{}: C = {:.3e}", variant.name(), consts.c));
    }
    pass("6 (interior estimate)", details.join(", "));
}

#[test]
fn criterion_07_region_convergence() {
    let deltas = [0.2, 0.1, 0.05, 0.025];
    let res = Resolution::new(64, 16, 64);

    // Moving domain, reference point spatially outside: quadratic shrink.
    let dom = DomainModel::new_moving(
        sig(1, 2),
        2.8,
        vec![Polynomial::constant(0.0), Polynomial::constant(0.0)],
        Polynomial::new(vec![1.0, 0.0, -0.08]),
    )
    .unwrap();
    let p = SpaceTimePoint::new(vec![0.0], vec![1.7, 0.0]);
    let entries = convergence_scan(&dom, &p, &deltas, res).unwrap();
    for w in entries.windows(2) {
        assert!(
            w[1].sym_diff <= w[0].sym_diff,
            "measures must be nonincreasing"
        );
    }
    assert!(entries.last().unwrap().sym_diff <= entries[0].sym_diff);
    assert!(entries.iter().all(|e| e.sym_diff > 0.0));
    let slope = (entries[0].sym_diff / entries[3].sym_diff).ln()
        / (entries[0].delta / entries[3].delta).ln();
    assert!(slope >= 1.8, "log-log slope {slope} < 1.8");

    // Reference at the ball centre: exactly zero at every delta, moving and
    // static alike.
    let p0 = SpaceTimePoint::zero(sig(1, 2));
    let center_moving = convergence_scan(&dom, &p0, &deltas, res).unwrap();
    assert!(center_moving.iter().all(|e| e.sym_diff == 0.0));
    let static_dom = unit_ball(1, 2, 1.5);
    let center_static = convergence_scan(&static_dom, &p0, &deltas, res).unwrap();
    assert!(center_static.iter().all(|e| e.sym_diff == 0.0));

    pass(
        "7 (region convergence)",
        format!(
            "sym-diff {:?}, slope {slope:.3}, centre cases exactly 0",
            entries.iter().map(|e| e.sym_diff).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_08_absorption_chain() {
    let s = sig(1, 2);
    let dom = unit_ball(1, 2, 1.5);
    let p = SpaceTimePoint::zero(s);
    let delta = 0.1;
    let r_plus = dom.r_plus(&p).unwrap();
    let mu = 0.05 * r_plus * r_plus;

    // V = 1; X of magnitude 1 active outside { f_p >= 2 mu }.
    let mut x_tilde: Vec<AnalyticField> = (0..s.dim())
        .map(|_| AnalyticField::constant(0.0, s))
        .collect();
    x_tilde[s.m()] = AnalyticField::constant(1.0, s);
    let coeffs =
        CoefficientSet::with_collar(p.clone(), mu, AnalyticField::constant(1.0, s), x_tilde, s)
            .unwrap();
    let (m0, m1) = sup_bounds(&coeffs, &dom, 16).unwrap();
    let a = choose_a(s, r_plus, delta, mu, m0, m1, 10.0);
    let mut params = CarlemanParams::from_delta(p, a, delta, r_plus);
    params.mu = mu;

    let seq = Sequential;
    let ctx = VerifyContext::prepare(&dom, &params, Resolution::new(32, 32, 128), &seq).unwrap();
    let field = make_bump(
        &dom,
        vec![Monomial {
            coef: 1.0,
            t_exp: vec![0],
            x_exp: vec![0, 0],
        }],
    );
    let rep = verify_absorption(&ctx, &coeffs, &field).unwrap();
    assert!(
        rep.dominance_ratios.0 >= 1.0,
        "zeroth ratio {}",
        rep.dominance_ratios.0
    );
    assert!(
        rep.dominance_ratios.1 >= 1.0,
        "first ratio {}",
        rep.dominance_ratios.1
    );
    assert!(rep.pass);
    pass(
        "8 (absorption chain)",
        format!(
            "a = {a:.4e}, ratios {:.3e} / {:.3e}",
            rep.dominance_ratios.0, rep.dominance_ratios.1
        ),
    );
}

#[test]
fn criterion_09_operator_sanity() {
    let s = sig(1, 2);
    let mut gen = rng::seeded(1009);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let l = vec![rng::range(&mut gen, -3.0, 3.0)];
        let angle = rng::range(&mut gen, 0.0, std::f64::consts::TAU);
        let mag = l[0].abs();
        let k = vec![mag * angle.cos(), mag * angle.sin()];
        let k2 = k.iter().map(|v| v * v).sum::<f64>();
        let wave = AnalyticField::PlaneWave {
            sig: s,
            term: TrigTerm {
                amp: 1.0,
                freq_t: l,
                freq_x: k,
                phase: rng::range(&mut gen, 0.0, 1.0),
            },
        };
        for _ in 0..20 {
            let q = SpaceTimePoint::new(
                vec![rng::range(&mut gen, -1.0, 1.0)],
                vec![
                    rng::range(&mut gen, -1.0, 1.0),
                    rng::range(&mut gen, -1.0, 1.0),
                ],
            );
            let v = box_op(&wave, q.as_ref(), s).unwrap().abs();
            worst = worst.max(v / (1.0 + k2));
            assert!(v <= 1e-10 * (1.0 + k2));
        }
    }

    let s23 = sig(2, 3);
    let q = SpaceTimePoint::new(vec![0.7, -0.4], vec![0.1, 0.9, -0.6]);
    assert_eq!(
        box_op(&AnalyticField::square_norm_x(s23), q.as_ref(), s23).unwrap(),
        6.0
    );
    assert_eq!(
        box_op(&AnalyticField::square_norm_t(s23), q.as_ref(), s23).unwrap(),
        -4.0
    );
    pass(
        "9 (operator sanity)",
        format!(
            "50 null waves, worst normalised |box z| = {worst:.2e}; squared-norm identities exact"
        ),
    );
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ultracarl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/configs")
        .join(name)
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

#[test]
fn criterion_10_figures_reproduction() {
    let configs = [
        "fig1_inside",
        "fig1_outside_trace",
        "fig1_outside_gamma",
        "fig2_inside",
        "fig2_outside_trace",
        "fig2_outside_gamma",
    ];
    let tmp = tempfile::tempdir().unwrap();
    for name in configs {
        let out = tmp.path().join(name);
        let cfg = config_path(&format!("{name}.toml"));
        let output = run_cli(&[
            "figures",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(
            output.status.success(),
            "{name} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        let produced = std::fs::read(out.join("regions.csv")).unwrap();
        let golden = std::fs::read(golden_path(&format!("{name}_regions.csv"))).unwrap();
        assert_eq!(produced, golden, "{name}: regions.csv deviates from golden");
        // The slice figures must exist alongside the table.
        assert!(out.join("slice_00.svg").exists());

        // Geometry of the pictures: with p inside, the observation region
        // covers the whole boundary trace; with p outside it is a proper
        // subset.
        let text = String::from_utf8(produced).unwrap();
        let mut trace = 0usize;
        let mut gamma = 0usize;
        for line in text.lines().skip(1).filter(|l| l.starts_with("boundary,")) {
            let cols: Vec<&str> = line.split(',').collect();
            // kind,t1,x1,x2,f_p,nf_p,weight,trace,gamma,...
            if cols[7] == "1" {
                trace += 1;
            }
            if cols[8] == "1" {
                gamma += 1;
            }
        }
        assert!(trace > 0, "{name}: empty boundary trace");
        if name.contains("inside") {
            assert_eq!(gamma, trace, "{name}: regions must coincide for p inside");
        } else {
            assert!(
                gamma > 0 && gamma < trace,
                "{name}: expected a proper subset"
            );
        }
    }
    pass(
        "10 (figures reproduction)",
        format!("{} configurations bit-exact against goldens", configs.len()),
    );
}

#[test]
fn criterion_11_determinism_across_workers() {
    let tmp = tempfile::tempdir().unwrap();

    // Figures command: worker counts 1 vs 3.
    let cfg = config_path("fig2_outside_gamma.toml");
    let mut outputs = Vec::new();
    for (label, threads) in [("a", "1"), ("b", "3")] {
        let out = tmp.path().join(format!("fig_{label}"));
        let res = run_cli(&[
            "figures",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(res.status.success());
        outputs.push(std::fs::read(out.join("regions.csv")).unwrap());
    }
    assert_eq!(
        outputs[0], outputs[1],
        "regions.csv differs across worker counts"
    );

    // Boundary verification: worker counts 1 vs 4.
    let cfg = config_path("determinism_boundary.toml");
    let mut reports = Vec::new();
    for (label, threads) in [("a", "1"), ("b", "4")] {
        let out = tmp.path().join(format!("vb_{label}"));
        let res = run_cli(&[
            "verify-boundary",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(
            res.status.success(),
            "verify-boundary failed: {}",
            String::from_utf8_lossy(&res.stderr)
        );
        reports.push(std::fs::read(out.join("report.csv")).unwrap());
    }
    assert_eq!(
        reports[0], reports[1],
        "report.csv differs across worker counts"
    );
    pass(
        "11 (determinism)",
        "figures and verify-boundary CSVs bit-identical for 1 vs 3/4 workers".to_string(),
    );
}

#[test]
fn cli_forced_failure_exits_2() {
    // A constant far above the calibrated range must fail and exit 2.
    let tmp = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(config_path("determinism_boundary.toml")).unwrap();
    let forced = base.replace(
        "calibration_safety = 0.5",
        "calibration_safety = 0.5\nc_override = 1.0e9",
    );
    let cfg_path = tmp.path().join("forced.toml");
    std::fs::write(&cfg_path, forced).unwrap();
    let out = tmp.path().join("out");
    let res = run_cli(&[
        "verify-boundary",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));

    // And a config error exits 1.
    let res = run_cli(&["verify-boundary", "--config", "/nonexistent.toml"]);
    assert_eq!(res.status.code(), Some(1));
}
