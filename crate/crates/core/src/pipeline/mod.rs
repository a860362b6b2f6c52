//! The four-stage construction of a separated, shadow-free family of
//! conjugates of a loxodromic power, with the constant ledger, the
//! injectivity scan and the cogrowth certificate.

pub mod certificate;
pub mod conj;
pub mod constants;
pub mod g1;
pub mod g2;
pub mod g3;
pub mod g4;
pub mod injection;

use serde::Serialize;

use crate::axioms::{check_p0, AxisFamily};
use crate::error::{Error, Result};
use crate::geometry::{measure_constants, primitive_root, Axis, ScanBudget};
use crate::group::{Element, Group, GroupKind};
use crate::growth::{growth_rate, shell_census, GrowthReport, ShellCensus};
use crate::keyvalue::KeyValues;
use crate::word::Word;

use certificate::{cogrowth_lower_bound, Certificate, CertificateStatus};
use conj::ConjShape;
use constants::{find_f0, ChecklistItem, F0Choice, MeasuredInputs, PipelineConstants, Setting};
use g1::{build_g1, G1Report, G1Rule};
use g2::{build_g2, G2Params, G2Report};
use g3::{build_g3, G3Report};
use g4::{build_g4, G4Report};
use injection::{injection_scan, zigzag_check, InjectionReport, ZigzagParams, ZigzagReport};

/// A pipeline configuration file.
///
/// ```text
/// group=f2.group
/// c=ab
/// p=auto
/// D=auto
/// K=auto
/// r_max=12
/// k_max=2
/// norm_budget=10
/// ```
#[derive(Clone, Debug, Serialize)]
pub struct PipelineConfig {
    /// Path of the group file, relative to the configuration file.
    pub group: String,
    pub c: String,
    pub p: Setting,
    #[serde(rename = "D")]
    pub d: Setting,
    #[serde(rename = "K")]
    pub k: Setting,
    /// Radius of the ball of conjugators enumerated for `G₁`.
    pub r_max: u32,
    pub k_max: u32,
    pub norm_budget: u32,
    /// Radius for measuring `C`, `C′` and searching for `f₀`.
    pub measure_radius: u32,
    /// Radius of the axis family used to measure `θ`.
    pub axiom_radius: u32,
    /// Conjugators of norm up to this radius get the order check.
    pub order_radius: u32,
    pub full_families: u32,
    pub zigzag_samples: u32,
    pub seed: u64,
}

const KEYS: [&str; 14] = [
    "group",
    "c",
    "p",
    "D",
    "K",
    "r_max",
    "k_max",
    "norm_budget",
    "measure_radius",
    "axiom_radius",
    "order_radius",
    "full_families",
    "zigzag_samples",
    "seed",
];

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<PipelineConfig> {
        let kv = KeyValues::parse(text)?;
        kv.check_keys(&KEYS)?;
        let setting = |key| kv.get(key).map(Setting::parse).unwrap_or(Ok(Setting::Auto));
        let config = PipelineConfig {
            group: kv.require("group")?.to_string(),
            c: kv.require("c")?.to_string(),
            p: setting("p")?,
            d: setting("D")?,
            k: setting("K")?,
            r_max: kv.parse_num("r_max")?.unwrap_or(12),
            k_max: kv.parse_num("k_max")?.unwrap_or(2),
            norm_budget: kv.parse_num("norm_budget")?.unwrap_or(10),
            measure_radius: kv.parse_num("measure_radius")?.unwrap_or(6),
            axiom_radius: kv.parse_num("axiom_radius")?.unwrap_or(4),
            order_radius: kv.parse_num("order_radius")?.unwrap_or(6),
            full_families: kv.parse_num("full_families")?.unwrap_or(4),
            zigzag_samples: kv.parse_num("zigzag_samples")?.unwrap_or(1000),
            seed: kv.parse_num("seed")?.unwrap_or(1),
        };
        if config.k_max as usize > injection::MAX_TUPLE {
            return Err(Error::parse(format!("k_max is at most {}", injection::MAX_TUPLE)));
        }
        if config.p == Setting::Fixed(0) {
            return Err(Error::parse("p must be positive"));
        }
        Ok(config)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Measurement {
    pub radius: u32,
    pub c: u32,
    pub c_prime: u32,
    pub contraction_by_radius: Vec<u32>,
    pub contraction_exhaustive: bool,
    pub bgi_exhaustive: bool,
    pub theta: u32,
    pub theta_family: u64,
    pub theta_radius: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct Censuses {
    /// `#{x ∈ G₃ : |x| = r}`.
    pub g3: Vec<u64>,
    pub g4: Vec<u64>,
    /// Every conjugate of norm at most this has a conjugator in `B_{r_max}`,
    /// so shells up to here are complete; growth rates and the certificate
    /// use only these.
    pub complete_norm: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Growth {
    pub delta_g: f64,
    pub half_delta_g: f64,
    pub group: GrowthReport,
    pub g3: Option<GrowthReport>,
    pub g4: Option<GrowthReport>,
    pub g3_error: Option<String>,
    pub g4_error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Stages {
    pub g1: G1Report,
    pub g2: G2Report,
    pub g3: G3Report,
    pub g4: G4Report,
    pub injection: InjectionReport,
    pub zigzag: ZigzagReport,
    pub censuses: Censuses,
    pub growth: Growth,
    pub certificate: Certificate,
    /// `(δ_G/2 + ε)/δ_G` when certified.
    pub ratio_lower_bound: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: PipelineConfig,
    pub group: String,
    /// The primitive root `c₀` of `c`.
    pub root: String,
    pub measurement: Measurement,
    pub f0: F0Choice,
    pub constants: PipelineConstants,
    pub checklist: Vec<ChecklistItem>,
    pub checklist_passed: bool,
    /// Absent when the checklist fails: no stage runs.
    pub stages: Option<Stages>,
    pub hard_failures: Vec<String>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checklist_passed && self.hard_failures.is_empty()
    }
}

fn free_rank(group: &Group) -> Result<usize> {
    match group.kind() {
        GroupKind::Free => Ok(group.factor_ranks()[0]),
        k => Err(Error::unsupported(format!("the pipeline needs a free group, not {}", k.name()))),
    }
}

pub fn run(group: &Group, config: &PipelineConfig) -> Result<RunReport> {
    let rank = free_rank(group)?;
    let c = Word::parse(&config.c, rank)?;
    if c.is_identity() {
        return Err(Error::usage("c must not be the identity"));
    }
    if !c.is_cyclically_reduced() {
        return Err(Error::usage(format!("c = {} is not cyclically reduced", c)));
    }
    let root = primitive_root(&c);
    let axis = Axis::new(group, &Element::Free(c.clone()))?;
    let budget = ScanBudget {
        seed: config.seed,
        ..ScanBudget::default()
    };
    let (pc, contraction, bgi) = measure_constants(group, &axis, config.measure_radius, budget)?;
    let family = AxisFamily::from_ball(group, &axis, config.axiom_radius)?;
    let p0 = check_p0(&family);
    let f0 = find_f0(rank, &root, config.measure_radius)?;
    let measured = MeasuredInputs {
        c: pc.c as u64,
        c_prime: pc.c_prime as u64,
        theta: p0.theta as u64,
        theta_prime: p0.theta_prime as u64,
        c_norm: c.len() as u64,
        tau: root.len() as u64,
        f0_norm: f0.word.len() as u64,
    };
    let constants = PipelineConstants::derive(measured, config.k, config.d, config.p);
    let checklist = constants.checklist();
    let checklist_passed = checklist.iter().all(|i| i.holds);
    let mut report = RunReport {
        config: config.clone(),
        group: group.describe(),
        root: root.to_string(),
        measurement: Measurement {
            radius: config.measure_radius,
            c: pc.c,
            c_prime: pc.c_prime,
            contraction_by_radius: contraction.by_radius,
            contraction_exhaustive: contraction.exhaustive,
            bgi_exhaustive: bgi.exhaustive,
            theta: p0.theta,
            theta_family: family.len() as u64,
            theta_radius: config.axiom_radius,
        },
        f0,
        constants,
        checklist,
        checklist_passed,
        stages: None,
        hard_failures: Vec::new(),
    };
    if checklist_passed {
        let (stages, failures) = run_stages(group, config, &report, &root, rank)?;
        report.stages = Some(stages);
        report.hard_failures = failures;
    }
    Ok(report)
}

fn run_stages(
    group: &Group,
    config: &PipelineConfig,
    report: &RunReport,
    root: &Word,
    rank: usize,
) -> Result<(Stages, Vec<String>)> {
    let k = &report.constants;
    let mut failures = Vec::new();
    let mut fail = |stage: &str, list: &[String]| {
        failures.extend(list.iter().map(|w| format!("{}: {}", stage, w)));
    };
    let (e0, e1) = report.f0.eq3;
    if e0 > k.c.value || e1 > k.c.value {
        fail("f0", &[format!("eq. (3) bounds ({}, {}) exceed C = {}", e0, e1, k.c.value)]);
    }

    let rule = G1Rule {
        root,
        two_k: 2 * k.k.value,
    };
    if config.r_max > group.radius_bound() {
        return Err(Error::resource(format!(
            "r_max = {} exceeds the declared radius bound {}",
            config.r_max,
            group.radius_bound()
        )));
    }
    let g1 = build_g1(rank, rule, &report.f0.word, config.r_max);
    fail("G1 inverse closure", &g1.report.inverse_failures);
    fail("G1 four-candidate lemma", &g1.report.phi0.lemma_failures);
    fail("phi0 displacement", &g1.report.phi0.displacement_failures);
    if g1.report.phi0.max_fiber > 4 {
        fail("phi0", &[format!("a fiber has {} > 4 elements", g1.report.phi0.max_fiber)]);
    }

    let periods = (k.p.value * k.c_norm.value / k.tau.value) as usize;
    let shape = ConjShape {
        root: root.clone(),
        periods,
    };
    let params = G2Params {
        shape: &shape,
        c_prime: k.c_prime.value,
        k: k.k.value,
        theta: k.theta.value as u32,
        order_radius: config.order_radius,
        full_families: config.full_families as usize,
    };
    let g2 = build_g2(group, &g1.elements, &params)?;
    fail("G2 norm sandwich", &g2.report.sandwich_failures);
    fail("G2 fibers", &g2.report.fiber_failures);
    fail("G2 order", &g2.report.order.failures);

    let g3 = build_g3(&g2.elements, &shape, k.k.value);
    fail("G3 separation", &g3.report.separation_failures);
    fail("G3 eq. (6)", &g3.report.eq6_failures);
    fail("G3 same axis", &g3.report.same_axis_failures);

    let g4 = build_g4(&g2.elements, &g3.accepted, &shape, k.d.value, k.delta_prime.value);

    let preimages: Vec<Word> = g2.provenance.iter().map(|&i| g1.elements[i as usize].clone()).collect();
    let costs: Vec<u32> = preimages.iter().map(|g| g.len() as u32).collect();
    let injection = injection_scan(
        &g2.elements,
        &g4.survivors,
        &costs,
        &shape,
        config.k_max,
        config.norm_budget,
    )?;
    fail("injection", &injection.collisions);
    let zigzag = zigzag_check(
        group,
        &g2.elements,
        &g4.survivors,
        &preimages,
        &shape,
        &ZigzagParams {
            samples: config.zigzag_samples,
            tuple_len: config.k_max.max(2),
            k: k.k.value,
            seed: config.seed,
        },
    )?;
    fail("eq. (13)", &zigzag.failures);

    let group_census = shell_census(group, config.r_max, 1, None)?;
    let group_growth = growth_rate(&group_census)?;
    let delta_g = group_growth.delta;
    let g3_census = g4::census(&g2.elements, &g3.accepted, &shape, "G3");
    let g4_census = g4::census(&g2.elements, &g4.survivors, &shape, "G4");
    let complete_norm = k.c_power_norm.value + 2 * (config.r_max as u64).saturating_sub(k.tau.value / 2);
    let complete = |c: &ShellCensus| {
        let n = c.radius_counts.len().min(complete_norm as usize + 1);
        ShellCensus::from_radius_counts(c.radius_counts[..n].to_vec(), 1, c.label.clone())
    };
    let (g3_complete, g4_complete) = (complete(&g3_census), complete(&g4_census));
    let split = |r: Result<GrowthReport>| match r {
        Ok(g) => (Some(g), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (g3_growth, g3_error) = split(growth_rate(&g3_complete));
    let (g4_growth, g4_error) = split(growth_rate(&g4_complete));
    let certificate = cogrowth_lower_bound(&g4_complete, delta_g, 2 * k.c_power_norm.value);
    let ratio_lower_bound =
        (certificate.status != CertificateStatus::Inconclusive).then(|| (certificate.delta + certificate.epsilon) / delta_g);

    let stages = Stages {
        g1: g1.report,
        g2: g2.report,
        g3: g3.report,
        g4: g4.report,
        injection,
        zigzag,
        censuses: Censuses {
            g3: g3_census.radius_counts,
            g4: g4_census.radius_counts,
            complete_norm,
        },
        growth: Growth {
            delta_g,
            half_delta_g: delta_g / 2.0,
            group: group_growth,
            g3: g3_growth,
            g4: g4_growth,
            g3_error,
            g4_error,
        },
        certificate,
        ratio_lower_bound,
    };
    Ok((stages, failures))
}
