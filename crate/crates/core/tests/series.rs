use cogrowth::growth::{
    census_of, cogrowth_ratio, growth_rate, poincare_partial, shell_census, SeriesVariant, ShellCensus, Verdict,
};
use cogrowth::{Group, NormalSubgroupOracle};
use proptest::prelude::*;

fn f2_census(r: u32, delta: u32) -> ShellCensus {
    shell_census(&Group::free(2), r, delta, None).unwrap()
}

fn kernel(text: &str) -> NormalSubgroupOracle {
    NormalSubgroupOracle::parse(text, &Group::free(2)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_sums_are_monotone(s in 0.0f64..2.0, delta in 1u32..4, variant in 0usize..3) {
        let variant = [SeriesVariant::Point, SeriesVariant::Shell, SeriesVariant::Ball][variant];
        let series = poincare_partial(&f2_census(12, delta), s, variant, 64);
        prop_assert!(series.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(series.terms.iter().all(|&t| t >= 0.0));
    }

    #[test]
    fn partial_sums_decrease_in_s(s in 0.0f64..2.0, ds in 0.01f64..0.5) {
        let census = f2_census(10, 1);
        let a = poincare_partial(&census, s, SeriesVariant::Point, 11);
        let b = poincare_partial(&census, s + ds, SeriesVariant::Point, 11);
        prop_assert!(b.partial_sums.last().unwrap() < a.partial_sums.last().unwrap());
    }

    #[test]
    fn shells_of_any_width_tile_the_radius_counts(delta in 1u32..6) {
        let census = f2_census(11, delta);
        let covered = census.counts.len() * delta as usize;
        prop_assert_eq!(census.counts.iter().sum::<u64>(), census.radius_counts[..covered].iter().sum::<u64>());
        let last_ball = delta as usize * (census.counts.len() - 1);
        prop_assert_eq!(*census.cumulative.last().unwrap(), census.radius_counts[..=last_ball].iter().sum::<u64>());
        prop_assert!(census.cumulative.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn verdicts_bracket_the_critical_exponent() {
    let census = f2_census(14, 1);
    let ln3 = 3f64.ln();
    let above = poincare_partial(&census, ln3 + 0.2, SeriesVariant::Point, 15);
    let below = poincare_partial(&census, ln3 - 0.2, SeriesVariant::Point, 15);
    let at = poincare_partial(&census, ln3, SeriesVariant::Point, 15);
    assert_eq!(above.verdict, Verdict::Converging);
    assert_eq!(below.verdict, Verdict::Diverging);
    // terms are 4/3 at s = log 3: divergent type
    assert_eq!(at.verdict, Verdict::Diverging);
    assert!(at.terms[1..].iter().all(|t| (t - 4.0 / 3.0).abs() < 1e-9));
}

#[test]
fn estimators_agree_on_free_groups() {
    for rank in 2..=3usize {
        let census = shell_census(&Group::free(rank), 10, 1, None).unwrap();
        let report = growth_rate(&census).unwrap();
        let exact = ((2 * rank - 1) as f64).ln();
        assert!((report.slope_regression.delta - exact).abs() < 0.02, "{:?}", report);
        assert!((report.shell_ratio.delta - exact).abs() < 0.02, "{:?}", report);
    }
}

#[test]
fn parity_kernel_has_exactly_the_even_shells() {
    let g = Group::free(2);
    let o = kernel("quotient=finite_permutation\nimages=a:(1 2),b:(1 2)\n");
    let census = shell_census(&g, 12, 1, Some(&o)).unwrap();
    let want: Vec<u64> = (0..=12u32)
        .map(|r| match r {
            0 => 1,
            r if r % 2 == 1 => 0,
            r => 4 * 3u64.pow(r - 1),
        })
        .collect();
    assert_eq!(census.radius_counts, want);
    let est = cogrowth_ratio(&g, &o, 12, 2).unwrap();
    assert!((est.ratio - 1.0).abs() < 0.02, "{}", est.ratio);
}

#[test]
fn subgroup_censuses_are_dominated() {
    let g = Group::free(2);
    let full = f2_census(10, 1);
    for text in [
        "quotient=integer\nimages=a:1,b:0\n",
        "quotient=commutator\n",
        "quotient=free_product\norders=2,3\nimages=a:0,b:1\n",
    ] {
        let sub = shell_census(&g, 10, 1, Some(&kernel(text))).unwrap();
        assert!(sub.radius_counts.iter().zip(&full.radius_counts).all(|(s, f)| s <= f));
        assert_eq!(sub.radius_counts[0], 1);
        // brute-force membership over the ball
        let ball = g.enumerate_ball(8).unwrap();
        let o = kernel(text);
        let members: Vec<_> = ball.into_iter().filter(|x| o.contains(&g, x).unwrap()).collect();
        let brute = census_of(&members, 1, "brute");
        assert_eq!(brute.radius_counts[..], sub.radius_counts[..=8]);
    }
}

#[test]
fn commutator_subgroup_counts_match_a_walk_count() {
    // #{reduced words of length r with zero exponent sums}, by dynamic
    // programming over (last letter, sum of a, sum of b).
    let r_max = 10usize;
    let off = r_max as i64;
    let side = 2 * r_max + 1;
    let idx = |l: usize, x: i64, y: i64| (l * side + (x + off) as usize) * side + (y + off) as usize;
    let step = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)];
    let mut cur = vec![0u64; 4 * side * side];
    for (l, &(dx, dy)) in step.iter().enumerate() {
        cur[idx(l, dx, dy)] = 1;
    }
    let mut want = vec![1u64, 0];
    for _ in 2..=r_max {
        let mut next = vec![0u64; cur.len()];
        for l in 0..4 {
            for x in -off..=off {
                for y in -off..=off {
                    let n = cur[idx(l, x, y)];
                    if n == 0 {
                        continue;
                    }
                    for (m, &(dx, dy)) in step.iter().enumerate() {
                        if m != (l ^ 1) && (x + dx).abs() <= off && (y + dy).abs() <= off {
                            next[idx(m, x + dx, y + dy)] += n;
                        }
                    }
                }
            }
        }
        cur = next;
        want.push((0..4).map(|l| cur[idx(l, 0, 0)]).sum());
    }
    let got = shell_census(&Group::free(2), r_max as u32, 1, Some(&kernel("quotient=commutator\n"))).unwrap();
    assert_eq!(got.radius_counts, want);
}
