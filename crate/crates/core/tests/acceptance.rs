//! One line per acceptance criterion; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use cogrowth::axioms::{axiom_suite, AxiomSuite, SuiteParams};
use cogrowth::geometry::{measure_contraction, Axis, ScanBudget};
use cogrowth::growth::{cogrowth_ratio, growth_rate, purely_exponential_check, shell_census};
use cogrowth::pipeline::certificate::{lower_bound_from_weights, CertificateStatus};
use cogrowth::pipeline::{run, PipelineConfig, RunReport};
use cogrowth::{Group, GroupSpec, NormalSubgroupOracle};

struct Line {
    ok: bool,
    detail: String,
}

impl Line {
    fn new(ok: bool, detail: impl Into<String>) -> Line {
        Line { ok, detail: detail.into() }
    }
}

fn f2() -> Group {
    Group::free(2)
}

fn f2xf2() -> Group {
    Group::new(GroupSpec::direct_product(vec![2, 2])).unwrap()
}

fn free_ball(r: u32) -> u64 {
    2 * 3u64.pow(r) - 1
}

fn criterion_1() -> Line {
    let g = shell_census(&f2(), 12, 1, None).unwrap();
    let want: Vec<u64> = (0..=12).map(free_ball).collect();
    let p = shell_census(&f2xf2(), 6, 1, None).unwrap();
    let want_p: Vec<u64> = (0..=6).map(|r| free_ball(r).pow(2)).collect();
    Line::new(
        g.cumulative == want && p.cumulative == want_p,
        format!("|B_12(F2)| = {}, |B_6(F2xF2)| = {}", g.cumulative[12], p.cumulative[6]),
    )
}

fn criterion_2() -> Line {
    let ln3 = 3f64.ln();
    let g = shell_census(&f2(), 14, 1, None).unwrap();
    let dg = growth_rate(&g).unwrap().delta;
    let pure = purely_exponential_check(&g, dg);
    let p = shell_census(&f2xf2(), 7, 1, None).unwrap();
    let dp = growth_rate(&p).unwrap().delta;
    Line::new(
        (dg - ln3).abs() <= 0.01 && (dp - 2.0 * ln3).abs() <= 0.05 && pure.constant <= 1.5 && !pure.failure,
        format!(
            "delta(F2) = {:.5} (|err| {:.1e}), delta(F2xF2) = {:.5} (|err| {:.1e}), pure-exp constant {:.3}",
            dg,
            (dg - ln3).abs(),
            dp,
            (dp - 2.0 * ln3).abs(),
            pure.constant
        ),
    )
}

fn criterion_3() -> Line {
    let h = f2xf2();
    let oracle = NormalSubgroupOracle::parse("quotient=free_product\norders=0,0\nimages=a:e,b:e;a:0,b:1\n", &h).unwrap();
    let r = 8;
    let est = cogrowth_ratio(&h, &oracle, r, 1).unwrap();
    // The kernel is F2 x 1: balls of F2 inside balls of F2 x F2.
    let closed_n: Vec<u64> = (0..=r).map(free_ball).collect();
    let closed_g: Vec<u64> = (0..=r).map(|r| free_ball(r).pow(2)).collect();
    let censuses_exact = est.census_n.cumulative == closed_n && est.census_g.cumulative == closed_g;
    let axis = Axis::new(&h, &h.parse_element("(a,1)").unwrap()).unwrap();
    let contraction = measure_contraction(&h, &axis, 4, ScanBudget { max_pairs: 200_000, seed: 1 }).unwrap();
    Line::new(
        censuses_exact && (est.ratio - 0.5).abs() <= 0.02 && contraction.failure,
        format!(
            "ratio = {:.4}, censuses match closed form: {}, C(r) on <(a,e)>.o = {:?} (non-contracting: {})",
            est.ratio, censuses_exact, contraction.by_radius, contraction.failure
        ),
    )
}

fn criterion_4() -> Line {
    let g = f2();
    let oracles = [
        ("Z/2", "quotient=finite_permutation\nimages=a:(1 2),b:(1 2)\n"),
        ("Z", "quotient=integer\nimages=a:1,b:0\n"),
        ("[F2,F2]", "quotient=commutator\n"),
        ("Z/2*Z/3", "quotient=free_product\norders=2,3\nimages=a:0,b:1\n"),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, text) in oracles {
        let o = NormalSubgroupOracle::parse(text, &g).unwrap();
        let ratio = cogrowth_ratio(&g, &o, 14, 1).unwrap().ratio;
        ok &= ratio > 0.53;
        parts.push(format!("{} {:.4}", name, ratio));
    }
    Line::new(ok, format!("ratios at r=14: {}", parts.join(", ")))
}

fn suite(c: &str) -> AxiomSuite {
    let g = f2();
    let params = SuiteParams {
        radius: 6,
        samples: 10_000,
        chains: 2_000,
        seed: 1,
    };
    axiom_suite(&g, &g.parse_element(c).unwrap(), params).unwrap()
}

fn criterion_5(suites: &[AxiomSuite], pipeline: &RunReport) -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for s in suites {
        let sampled = s.p1.sample_size >= 10_000 && s.sp.sample_size >= 10_000;
        let ordered = s.order.comparable_pairs > 0 && s.order.in_expected_order == s.order.comparable_pairs;
        ok &= s.passed() && sampled && ordered;
        parts.push(format!(
            "c={}: theta {}, {} axes, violations P0/P1/SP {}/{}/{}, order {}/{}",
            s.c,
            s.theta,
            s.family_size,
            s.p0.violations.len(),
            s.p1.violations.len(),
            s.sp.violations.len() + s.sp_chains.violations.len(),
            s.order.in_expected_order,
            s.order.comparable_pairs
        ));
    }
    let order = &pipeline.stages.as_ref().unwrap().g2.order;
    ok &= order.radius == 6 && order.checked > 0 && order.failures.is_empty();
    parts.push(format!(
        "G2order chain on {} elements of G1 ∩ B_6 at p = {}: {} failures",
        order.checked,
        pipeline.constants.p.value,
        order.failures.len()
    ));
    Line::new(ok, parts.join("; "))
}

fn criterion_6(report: &RunReport) -> Line {
    let Some(st) = &report.stages else {
        return Line::new(false, "checklist failed, no stage ran");
    };
    let k = report.constants.k.value;
    let sandwich = st.g2.sandwich_checked == st.g1.size && st.g2.sandwich_failures.is_empty();
    let separated = st.g3.separation == 6 * k + 1 && st.g3.separation_failures.is_empty();
    let same_axis = st.g3.same_axis_failures.is_empty();
    let injective = st.injection.k_max == 2 && st.injection.norm_budget == 10 && st.injection.collisions.is_empty();
    let zigzag = st.zigzag.samples >= 1000 && st.zigzag.failures.is_empty();
    Line::new(
        report.constants.p.value >= 4 && sandwich && separated && same_axis && injective && zigzag,
        format!(
            "p = {}, |G2| = {} sandwich ok: {}, |G3| = {} separation {} ok: {}, same-axis ok: {}, \
             {} tuples with {} collisions, zig-zag {} samples max {}/{} < {}",
            report.constants.p.value,
            st.g2.size,
            sandwich,
            st.g3.size,
            st.g3.separation,
            separated,
            same_axis,
            st.injection.tuples.iter().sum::<u64>(),
            st.injection.collisions.len(),
            st.zigzag.samples,
            st.zigzag.max_consecutive,
            st.zigzag.max_far,
            3 * k
        ),
    )
}

fn criterion_7(report: &RunReport) -> Line {
    let Some(st) = &report.stages else {
        return Line::new(false, "checklist failed, no stage ran");
    };
    let half = st.growth.half_delta_g;
    let Some(g4) = &st.growth.g4 else {
        return Line::new(false, "no growth estimate for G4");
    };
    let close = (g4.delta - half).abs() <= 0.05;
    let sv = &st.g4.survival;
    let survival = if sv.admissible_reachable {
        sv.min_admissible_fraction.is_some_and(|f| f >= 0.5)
    } else {
        !sv.note.is_empty() && sv.fallback_passed
    };
    Line::new(
        close && survival,
        format!(
            "delta(G4) = {:.5} vs delta_G/2 = {:.5}; survival: {} (passed: {})",
            g4.delta, half, sv.note, survival
        ),
    )
}

/// Largest `ε` with `Σ_{r≤R} e^{−εr} ≥ e^{(δ+ε)c}`, using the closed-form
/// geometric sum.
fn geometric_threshold(delta: f64, c: f64, big_r: f64) -> f64 {
    let lhs = |e: f64| (1.0 - (-e * (big_r + 1.0)).exp()) / (1.0 - (-e).exp());
    let f = |e: f64| lhs(e).ln() - (delta + e) * c;
    let (mut lo, mut hi) = (1e-9, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn criterion_8(report: &RunReport) -> Line {
    let cert = &report.stages.as_ref().unwrap().certificate;
    let f2_ok = cert.status == CertificateStatus::Certified && cert.epsilon > 0.0;

    let (delta, c, big_r) = (0.55, 10u64, 1200usize);
    let weights: Vec<f64> = (0..=big_r).map(|r| (delta * r as f64).exp()).collect();
    let synthetic = lower_bound_from_weights(&weights, delta, c);
    let want = geometric_threshold(delta, c as f64, big_r as f64);
    let synthetic_ok = synthetic.status == CertificateStatus::Certified && (synthetic.epsilon - want).abs() <= 0.01;
    Line::new(
        f2_ok && synthetic_ok,
        format!(
            "F2 run: {:?}, epsilon {:.4}, margin at 0 = {:.2} (ok: {}); synthetic: epsilon {:.5} vs closed form {:.5} (ok: {})",
            cert.status, cert.epsilon, cert.margin_at_zero, f2_ok, synthetic.epsilon, want, synthetic_ok
        ),
    )
}

fn criterion_9(first: &RunReport, first_suite: &AxiomSuite) -> Line {
    let g = f2();
    let census = |g: &Group| shell_census(g, 10, 1, None).unwrap();
    let oracle = NormalSubgroupOracle::parse("quotient=commutator\n", &g).unwrap();
    let cog = || cogrowth_ratio(&g, &oracle, 10, 1).unwrap();
    let same_census = json(&census(&g)) == json(&census(&g));
    let same_growth = json(&growth_rate(&census(&g)).unwrap()) == json(&growth_rate(&census(&g)).unwrap());
    let same_cogrowth = json(&cog()) == json(&cog());
    let same_axioms = json(first_suite) == json(&suite("ab"));
    let same_pipeline = json(first) == json(&run(&g, &first.config).unwrap());
    Line::new(
        same_census && same_growth && same_cogrowth && same_axioms && same_pipeline,
        format!(
            "identical reports: census {}, growth {}, cogrowth {}, axioms {}, pipeline {}",
            same_census, same_growth, same_cogrowth, same_axioms, same_pipeline
        ),
    )
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap()
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut lines: Vec<(u32, Line)> = Vec::new();
    let mut record = |n: u32, line: Line| {
        println!(
            "criterion {}: {} [{:.1}s] {}",
            n,
            if line.ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            line.detail
        );
        lines.push((n, line));
    };
    record(1, criterion_1());
    record(2, criterion_2());
    record(3, criterion_3());
    record(4, criterion_4());

    let config = PipelineConfig::parse("group=f2.group\nc=ab\nr_max=12\nk_max=2\nnorm_budget=10\n").unwrap();
    let pipeline = run(&f2(), &config).unwrap();
    let suites = [suite("a"), suite("ab")];
    record(5, criterion_5(&suites, &pipeline));
    record(6, criterion_6(&pipeline));
    record(7, criterion_7(&pipeline));
    record(8, criterion_8(&pipeline));
    record(9, criterion_9(&pipeline, &suites[1]));

    let failed: Vec<u32> = lines.iter().filter(|(_, l)| !l.ok).map(|(n, _)| *n).collect();
    println!(
        "acceptance: {} of {} criteria pass",
        lines.len() - failed.len(),
        lines.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {:?}", failed);
        ExitCode::FAILURE
    }
}
