//! Multiplicity certification for the reflection problem.
//!
//! A certificate pins down how many fixed points the integral operator must
//! have inside a cone of functions that are positive on a symmetric strip.
//! Each radius `rho` contributes one checkable condition:
//!
//! * an **index-1** condition asks the scaled supremum of the shifted
//!   nonlinearity over a state box to stay *below* the threshold `m`
//!   (the operator pushes the ball of radius `rho` into itself), and
//! * an **index-0** condition asks the scaled infimum over a strip box to
//!   stay *above* the threshold `M` (the operator pushes outward).
//!
//! Alternating satisfied conditions with compatible radius gaps form a
//! ladder; the ladder shape determines the guaranteed solution count.
//!
//! Thresholds come from closed forms (unit weight only), from the
//! quadrature oracles, or from a manual override. Manual values are always
//! cross-checked against the oracles and any disagreement is recorded in
//! the certificate, so an externally supplied number can never silently
//! masquerade as a verified one.

use serde::{Deserialize, Serialize};

use crate::bounds::{self, StripInterval};
use crate::error::{Error, Result};
use crate::expr::{Box3, NonlinearityExpr};
use crate::params::ProblemParams;
use crate::solver::{nodal_cone_margin, DiscreteOperator, SymmetricGrid};

/// Points in the grid check that the weight is non-negative.
const WEIGHT_CHECK_POINTS: usize = 2001;
/// Nodes of the internal solver grid used by the cone sanity check.
const SANITY_GRID_NODES: usize = 201;
/// Margin tolerance of the cone sanity check.
const SANITY_TOLERANCE: f64 = 1e-8;
/// Relative gap above which a manual threshold is flagged as disagreeing
/// with its quadrature oracle.
const DISCREPANCY_GAP: f64 = 1e-6;

/// Shape of the cone the certificate works in. All variants require
/// members to dominate `c·‖u‖` on the strip; they differ in the sign
/// constraints imposed elsewhere, which is what the state boxes encode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeVariant {
    /// Members may change sign away from the strip.
    ChangingSign,
    /// Members are non-negative everywhere.
    NonNegative,
    /// Members stay above `c·‖u‖` everywhere.
    StrictlyPositive,
}

impl ConeVariant {
    /// State box of an index-1 condition: `t` ranges over the whole
    /// interval and the state components over the radius-`rho` ball of the
    /// cone, described by its bounding box.
    pub fn index1_state_box(self, params: &ProblemParams, rho: f64, c: f64) -> Result<Box3> {
        let (u_range, v_range) = self.index1_state_ranges(rho, c)?;
        let half = params.half_period();
        Box3::new((-half, half), u_range, v_range)
    }

    /// State box of an index-0 condition: `t` ranges over the strip, the
    /// direct component over `[rho, rho/c]`, and the reflected component
    /// over the values cone members can take anywhere.
    pub fn index0_state_box(
        self,
        params: &ProblemParams,
        strip: &StripInterval,
        rho: f64,
        c: f64,
    ) -> Result<Box3> {
        let (u_range, v_range) = self.index0_state_ranges(rho, c)?;
        let half = params.half_period();
        Box3::new((strip.a() * half, strip.b() * half), u_range, v_range)
    }

    fn index1_state_ranges(self, rho: f64, c: f64) -> Result<((f64, f64), (f64, f64))> {
        check_radius_and_constant(rho, c)?;
        Ok(match self {
            ConeVariant::ChangingSign => ((-rho, rho), (-rho, rho)),
            ConeVariant::NonNegative => ((0.0, rho), (0.0, rho)),
            ConeVariant::StrictlyPositive => ((c * rho, rho), (c * rho, rho)),
        })
    }

    fn index0_state_ranges(self, rho: f64, c: f64) -> Result<((f64, f64), (f64, f64))> {
        check_radius_and_constant(rho, c)?;
        let outer = rho / c;
        Ok(match self {
            ConeVariant::ChangingSign => ((rho, outer), (-outer, outer)),
            ConeVariant::NonNegative => ((rho, outer), (0.0, outer)),
            ConeVariant::StrictlyPositive => ((rho, outer), (rho, outer)),
        })
    }
}

fn check_radius_and_constant(rho: f64, c: f64) -> Result<()> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Domain(format!(
            "condition radius must be positive and finite, got {rho}"
        )));
    }
    if !(c.is_finite() && c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!(
            "cone constant must lie in (0, 1), got {c}"
        )));
    }
    Ok(())
}

/// Direction of a radius condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadiusKind {
    /// Supremum bound: satisfied when `f_bound < m`.
    #[serde(rename = "index-1")]
    Index1,
    /// Infimum bound: satisfied when `f_bound > M`.
    #[serde(rename = "index-0")]
    Index0,
}

/// Where the thresholds of a certificate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdSource {
    /// Closed-form expressions; available for the unit weight only.
    ClosedForm,
    /// Adaptive-quadrature oracles, valid for any admissible weight.
    QuadratureOracle,
    /// Caller-supplied values; cross-checked but not self-contained.
    ManualOverride,
}

/// Requested threshold policy for a certification run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSpec {
    /// Use the closed forms (requires the weight to be the literal `1`).
    ClosedForm,
    /// Use the quadrature oracles.
    Oracle,
    /// Use the given values for `m` and `M` verbatim.
    Manual { m: f64, big_m: f64 },
}

/// A manual threshold that disagrees with its quadrature oracle.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdDiscrepancy {
    /// Which threshold: `"m"` or `"M"`.
    pub quantity: String,
    /// The manually supplied value.
    pub provided: f64,
    /// What the oracle computes for the same configuration.
    pub oracle: f64,
    /// `|provided - oracle| / max(|oracle|, tiny)`.
    pub relative_gap: f64,
}

/// Resolved thresholds together with their provenance.
#[derive(Debug, Clone, Serialize)]
pub struct Thresholds {
    pub source: ThresholdSource,
    /// Index-1 threshold: reciprocal of the largest weighted absolute
    /// kernel integral.
    pub m: f64,
    /// Index-0 threshold: reciprocal of the smallest weighted strip
    /// integral.
    #[serde(rename = "M")]
    pub big_m: f64,
    /// Oracle reference for `m`, recorded when the source is manual.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_m: Option<f64>,
    /// Oracle reference for `M`, recorded when the source is manual.
    #[serde(rename = "oracle_M", skip_serializing_if = "Option::is_none")]
    pub oracle_big_m: Option<f64>,
    /// Manual values that disagree with their oracles beyond the
    /// reporting gap.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub discrepancies: Vec<ThresholdDiscrepancy>,
}

/// Checks that the weight is non-negative on a dense grid over the
/// interval; certification is meaningless for signed weights.
pub fn weight_hypothesis_check(params: &ProblemParams, g: &NonlinearityExpr) -> Result<()> {
    let half = params.half_period();
    for i in 0..WEIGHT_CHECK_POINTS {
        let s = -half + 2.0 * half * i as f64 / (WEIGHT_CHECK_POINTS - 1) as f64;
        let value = g.eval_weight(s)?;
        if value < 0.0 {
            return Err(Error::Hypothesis(format!(
                "weight must be non-negative on the interval; g({s}) = {value}"
            )));
        }
    }
    Ok(())
}

/// Index-1 threshold `m`: closed form for the unit weight, quadrature
/// oracle otherwise.
pub fn threshold_m(params: &ProblemParams, g: &NonlinearityExpr) -> Result<f64> {
    weight_hypothesis_check(params, g)?;
    if g.is_literal_one() {
        Ok(1.0 / bounds::sup_abs_integral(params)?)
    } else {
        threshold_m_oracle(params, g)
    }
}

/// Index-1 threshold `m` from the quadrature oracle, for any admissible
/// weight.
pub fn threshold_m_oracle(params: &ProblemParams, g: &NonlinearityExpr) -> Result<f64> {
    weight_hypothesis_check(params, g)?;
    let sup = bounds::sup_weighted_abs_integral(params, |s| g.eval_weight(s))?;
    if sup.value <= 0.0 {
        return Err(Error::Hypothesis(format!(
            "weighted absolute kernel integral must be positive, got {}",
            sup.value
        )));
    }
    Ok(1.0 / sup.value)
}

/// Index-0 threshold `M`: closed form for the unit weight, quadrature
/// oracle otherwise.
pub fn threshold_big_m(
    params: &ProblemParams,
    strip: &StripInterval,
    g: &NonlinearityExpr,
) -> Result<f64> {
    weight_hypothesis_check(params, g)?;
    if g.is_literal_one() {
        let inf = bounds::inf_strip_integral(params, strip)?;
        if inf <= 0.0 {
            return Err(Error::Hypothesis(format!(
                "strip integral of the kernel must be positive, got {inf}"
            )));
        }
        Ok(1.0 / inf)
    } else {
        threshold_big_m_oracle(params, strip, g)
    }
}

/// Index-0 threshold `M` from the quadrature oracle, for any admissible
/// weight.
pub fn threshold_big_m_oracle(
    params: &ProblemParams,
    strip: &StripInterval,
    g: &NonlinearityExpr,
) -> Result<f64> {
    weight_hypothesis_check(params, g)?;
    let inf = bounds::inf_weighted_strip_integral(params, strip, |s| g.eval_weight(s))?;
    if inf.value <= 0.0 {
        return Err(Error::Hypothesis(format!(
            "weighted strip integral of the kernel must be positive, got {}",
            inf.value
        )));
    }
    Ok(1.0 / inf.value)
}

/// Resolves a threshold policy into concrete values, recording provenance
/// and (for manual values) the oracle cross-check.
pub fn resolve_thresholds(
    params: &ProblemParams,
    strip: &StripInterval,
    g: &NonlinearityExpr,
    spec: ThresholdSpec,
) -> Result<Thresholds> {
    match spec {
        ThresholdSpec::ClosedForm => {
            if !g.is_literal_one() {
                return Err(Error::Config(
                    "closed-form thresholds require the weight to be the literal 1; \
                     use the oracle threshold source for a general weight"
                        .into(),
                ));
            }
            Ok(Thresholds {
                source: ThresholdSource::ClosedForm,
                m: threshold_m(params, g)?,
                big_m: threshold_big_m(params, strip, g)?,
                oracle_m: None,
                oracle_big_m: None,
                discrepancies: Vec::new(),
            })
        }
        ThresholdSpec::Oracle => Ok(Thresholds {
            source: ThresholdSource::QuadratureOracle,
            m: threshold_m_oracle(params, g)?,
            big_m: threshold_big_m_oracle(params, strip, g)?,
            oracle_m: None,
            oracle_big_m: None,
            discrepancies: Vec::new(),
        }),
        ThresholdSpec::Manual { m, big_m } => {
            for (name, value) in [("m", m), ("M", big_m)] {
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::Config(format!(
                        "manual threshold {name} must be positive and finite, got {value}"
                    )));
                }
            }
            let oracle_m = threshold_m_oracle(params, g)?;
            let oracle_big_m = threshold_big_m_oracle(params, strip, g)?;
            let mut discrepancies = Vec::new();
            for (quantity, provided, oracle) in [("m", m, oracle_m), ("M", big_m, oracle_big_m)] {
                let relative_gap = (provided - oracle).abs() / oracle.abs().max(f64::MIN_POSITIVE);
                if relative_gap > DISCREPANCY_GAP {
                    discrepancies.push(ThresholdDiscrepancy {
                        quantity: quantity.to_string(),
                        provided,
                        oracle,
                        relative_gap,
                    });
                }
            }
            Ok(Thresholds {
                source: ThresholdSource::ManualOverride,
                m,
                big_m,
                oracle_m: Some(oracle_m),
                oracle_big_m: Some(oracle_big_m),
                discrepancies,
            })
        }
    }
}

/// Cross-checks externally quoted threshold values against resolved
/// (self-contained) thresholds and records disagreements. Used when the
/// configuration carries manual values but another source was selected:
/// the report then still documents how the quoted numbers compare to the
/// computed ones. Manual-source thresholds already carry their own oracle
/// cross-check, so this is a no-op for them.
pub fn attach_reference_thresholds(
    thresholds: &mut Thresholds,
    reference_m: Option<f64>,
    reference_big_m: Option<f64>,
) {
    if thresholds.source == ThresholdSource::ManualOverride {
        return;
    }
    for (quantity, provided, computed) in [
        ("m", reference_m, thresholds.m),
        ("M", reference_big_m, thresholds.big_m),
    ] {
        if let Some(provided) = provided {
            let relative_gap = (provided - computed).abs() / computed.abs().max(f64::MIN_POSITIVE);
            if relative_gap > DISCREPANCY_GAP {
                thresholds.discrepancies.push(ThresholdDiscrepancy {
                    quantity: quantity.to_string(),
                    provided,
                    oracle: computed,
                    relative_gap,
                });
            }
        }
    }
}

/// The infimum of the scaled nonlinearity over the state box with `t`
/// frozen at one strip endpoint. Recorded for index-0 conditions so that a
/// bound quoted at a single edge can be told apart from the true box
/// infimum.
#[derive(Debug, Clone, Serialize)]
pub struct EdgeBound {
    /// The frozen time coordinate.
    pub t: f64,
    /// `inf f / rho` over the state ranges at that time.
    pub value: f64,
    /// Where the infimum was attained.
    pub at: [f64; 3],
}

/// Edge-frozen infima at both strip endpoints.
#[derive(Debug, Clone, Serialize)]
pub struct StripEdgeBounds {
    pub at_strip_start: EdgeBound,
    pub at_strip_end: EdgeBound,
}

/// One radius condition of a certificate.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusCondition {
    pub rho: f64,
    pub kind: RadiusKind,
    /// `sup f / rho` (index-1) or `inf f / rho` (index-0) over the state
    /// box. The extremum is located numerically, not rigorously.
    pub f_bound: f64,
    /// The threshold the bound is compared against (`m` or `M`).
    pub threshold: f64,
    /// Strict inequality in the direction the condition needs.
    pub satisfied: bool,
    /// Satisfied, but with margin below the configured epsilon.
    pub marginal: bool,
    /// Where the extremum was attained, as `[t, u, v]`.
    pub attaining_point: [f64; 3],
    /// Index-0 only: infima with `t` frozen at each strip endpoint.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strip_edge_bounds: Option<StripEdgeBounds>,
}

/// Evaluates one radius condition against resolved thresholds. `f` is the
/// shifted nonlinearity and `epsilon` the margin below which a satisfied
/// condition is flagged as marginal.
#[allow(clippy::too_many_arguments)]
pub fn check_condition(
    params: &ProblemParams,
    strip: &StripInterval,
    cone: ConeVariant,
    c: f64,
    f: &NonlinearityExpr,
    rho: f64,
    kind: RadiusKind,
    thresholds: &Thresholds,
    epsilon: f64,
) -> Result<RadiusCondition> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::Domain(format!(
            "marginality epsilon must be non-negative and finite, got {epsilon}"
        )));
    }
    match kind {
        RadiusKind::Index1 => {
            let state_box = cone.index1_state_box(params, rho, c)?;
            let extremum = f.box_sup(&state_box)?;
            let f_bound = extremum.value / rho;
            let threshold = thresholds.m;
            let satisfied = f_bound < threshold;
            Ok(RadiusCondition {
                rho,
                kind,
                f_bound,
                threshold,
                satisfied,
                marginal: satisfied && threshold - f_bound < epsilon,
                attaining_point: extremum.at,
                strip_edge_bounds: None,
            })
        }
        RadiusKind::Index0 => {
            let state_box = cone.index0_state_box(params, strip, rho, c)?;
            let extremum = f.box_inf(&state_box)?;
            let f_bound = extremum.value / rho;
            let threshold = thresholds.big_m;
            let satisfied = f_bound > threshold;
            let edge = |t: f64| -> Result<EdgeBound> {
                let frozen = Box3::new((t, t), state_box.u_range(), state_box.v_range())?;
                let inf = f.box_inf(&frozen)?;
                Ok(EdgeBound {
                    t,
                    value: inf.value / rho,
                    at: inf.at,
                })
            };
            let half = params.half_period();
            Ok(RadiusCondition {
                rho,
                kind,
                f_bound,
                threshold,
                satisfied,
                marginal: satisfied && f_bound - threshold < epsilon,
                attaining_point: extremum.at,
                strip_edge_bounds: Some(StripEdgeBounds {
                    at_strip_start: edge(strip.a() * half)?,
                    at_strip_end: edge(strip.b() * half)?,
                }),
            })
        }
    }
}

/// Ladder shapes, named by the alternation pattern of their rungs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LadderTag {
    /// index-0 below index-1.
    S1,
    /// index-1 below index-0.
    S2,
    /// index-0, index-1, index-0.
    S3,
    /// index-1, index-0, index-1.
    S4,
    /// index-0, index-1, index-0, index-1.
    S5,
    /// index-1, index-0, index-1, index-0.
    S6,
}

impl LadderTag {
    /// Guaranteed number of distinct fixed points.
    pub fn solution_count(self) -> u8 {
        match self {
            LadderTag::S1 | LadderTag::S2 => 1,
            LadderTag::S3 | LadderTag::S4 => 2,
            LadderTag::S5 | LadderTag::S6 => 3,
        }
    }

    fn kinds(self) -> &'static [RadiusKind] {
        use RadiusKind::{Index0, Index1};
        match self {
            LadderTag::S1 => &[Index0, Index1],
            LadderTag::S2 => &[Index1, Index0],
            LadderTag::S3 => &[Index0, Index1, Index0],
            LadderTag::S4 => &[Index1, Index0, Index1],
            LadderTag::S5 => &[Index0, Index1, Index0, Index1],
            LadderTag::S6 => &[Index1, Index0, Index1, Index0],
        }
    }

    /// Radius gap constraints between consecutive rungs. An index-0 rung
    /// followed by an index-1 rung needs `rho_i / c < rho_{i+1}` (the
    /// inner strip box must clear the outer ball); the opposite order
    /// needs plain `rho_i < rho_{i+1}`.
    fn gaps_ok(self, rhos: &[f64], c: f64) -> bool {
        let kinds = self.kinds();
        for i in 0..kinds.len() - 1 {
            let scaled = match kinds[i] {
                RadiusKind::Index0 => rhos[i] / c,
                RadiusKind::Index1 => rhos[i],
            };
            if !(scaled < rhos[i + 1]) {
                return false;
            }
        }
        true
    }
}

/// Searches the satisfied conditions (sorted by radius) for the strongest
/// ladder. Returns the ladder tag and the guaranteed solution count, or
/// `(None, 0)` when no ladder exists.
pub fn multiplicity_verdict(conditions: &[RadiusCondition], c: f64) -> (Option<LadderTag>, u8) {
    let mut satisfied: Vec<(f64, RadiusKind)> = conditions
        .iter()
        .filter(|condition| condition.satisfied)
        .map(|condition| (condition.rho, condition.kind))
        .collect();
    satisfied.sort_by(|left, right| left.0.total_cmp(&right.0));

    for tag in [
        LadderTag::S5,
        LadderTag::S6,
        LadderTag::S3,
        LadderTag::S4,
        LadderTag::S1,
        LadderTag::S2,
    ] {
        if has_ladder(&satisfied, tag, c) {
            return (Some(tag), tag.solution_count());
        }
    }
    (None, 0)
}

/// Whether some subsequence of the satisfied conditions matches the
/// ladder's kind pattern with admissible radius gaps. Candidates are
/// explored in lexicographic index order, so the search is deterministic.
fn has_ladder(satisfied: &[(f64, RadiusKind)], tag: LadderTag, c: f64) -> bool {
    let kinds = tag.kinds();
    let mut chosen = Vec::with_capacity(kinds.len());
    search_ladder(satisfied, kinds, c, tag, 0, &mut chosen)
}

fn search_ladder(
    satisfied: &[(f64, RadiusKind)],
    kinds: &[RadiusKind],
    c: f64,
    tag: LadderTag,
    from: usize,
    chosen: &mut Vec<f64>,
) -> bool {
    if chosen.len() == kinds.len() {
        return tag.gaps_ok(chosen, c);
    }
    let want = kinds[chosen.len()];
    for i in from..satisfied.len() {
        if satisfied[i].1 != want {
            continue;
        }
        chosen.push(satisfied[i].0);
        if search_ladder(satisfied, kinds, c, tag, i + 1, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Echo of the certified problem, self-contained enough to re-run the
/// certification.
#[derive(Debug, Clone, Serialize)]
pub struct ProblemSummary {
    pub half_period: f64,
    pub omega: f64,
    /// The product `omega * half_period`.
    pub zeta: f64,
    /// The configured nonlinearity, as parsed.
    pub nonlinearity: String,
    /// The shifted nonlinearity the conditions are evaluated on.
    pub shifted_nonlinearity: String,
    /// The configured weight, as parsed.
    pub weight: String,
    pub strip: StripSummary,
    pub cone_constant: f64,
}

/// Strip endpoints as fractions of the half-period.
#[derive(Debug, Clone, Serialize)]
pub struct StripSummary {
    pub a: f64,
    pub b: f64,
}

/// The full result of a certification run.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub problem: ProblemSummary,
    pub cone: ConeVariant,
    pub thresholds: Thresholds,
    pub conditions: Vec<RadiusCondition>,
    /// The strongest ladder found among the satisfied conditions.
    pub ladder: Option<LadderTag>,
    /// Fixed points guaranteed by that ladder (0 when there is none).
    pub solution_count: u8,
    /// Caveats: `non-rigorous-f-bounds` always (box extrema are located
    /// numerically), `not-self-contained` for manual thresholds, and
    /// `threshold-discrepancy` when a manual value disagrees with its
    /// oracle.
    pub flags: Vec<String>,
}

/// Everything a certification run needs.
pub struct CertificationInput<'a> {
    pub params: &'a ProblemParams,
    pub strip: &'a StripInterval,
    pub cone: ConeVariant,
    /// The weight `g`.
    pub weight: &'a NonlinearityExpr,
    /// The unshifted nonlinearity `h`; the run shifts it internally.
    pub nonlinearity: &'a NonlinearityExpr,
    pub radii: &'a [(f64, RadiusKind)],
    pub thresholds: ThresholdSpec,
    /// Margin below which a satisfied condition is flagged marginal.
    pub epsilon: f64,
    /// Externally quoted `m` to cross-check when the source is not manual.
    pub reference_m: Option<f64>,
    /// Externally quoted `M` to cross-check when the source is not manual.
    pub reference_big_m: Option<f64>,
}

/// Runs a full certification: resolves thresholds, checks every radius
/// condition, and searches for the strongest ladder.
pub fn certify(input: &CertificationInput) -> Result<Certificate> {
    let params = input.params;
    let c = bounds::cone_constant(params, input.strip)?;
    let mut thresholds = resolve_thresholds(params, input.strip, input.weight, input.thresholds)?;
    attach_reference_thresholds(&mut thresholds, input.reference_m, input.reference_big_m);
    let shifted = input.nonlinearity.shift_to_f(params.omega());

    for &(rho, _) in input.radii {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::Config(format!(
                "condition radii must be positive and finite, got {rho}"
            )));
        }
    }
    let mut radii = input.radii.to_vec();
    radii.sort_by(|left, right| left.0.total_cmp(&right.0));

    let mut conditions = Vec::with_capacity(radii.len());
    for &(rho, kind) in &radii {
        conditions.push(check_condition(
            params,
            input.strip,
            input.cone,
            c,
            &shifted,
            rho,
            kind,
            &thresholds,
            input.epsilon,
        )?);
    }

    let (ladder, solution_count) = multiplicity_verdict(&conditions, c);

    let mut flags = vec!["non-rigorous-f-bounds".to_string()];
    if thresholds.source == ThresholdSource::ManualOverride {
        flags.push("not-self-contained".to_string());
    }
    if !thresholds.discrepancies.is_empty() {
        flags.push("threshold-discrepancy".to_string());
    }

    let problem = ProblemSummary {
        half_period: params.half_period(),
        omega: params.omega(),
        zeta: params.zeta(),
        nonlinearity: input.nonlinearity.to_string(),
        shifted_nonlinearity: shifted.to_string(),
        weight: input.weight.to_string(),
        strip: StripSummary {
            a: input.strip.a(),
            b: input.strip.b(),
        },
        cone_constant: c,
    };

    Ok(Certificate {
        problem,
        cone: input.cone,
        thresholds,
        conditions,
        ladder,
        solution_count,
        flags,
    })
}

/// Result of the empirical cone-preservation check.
#[derive(Debug, Clone, Serialize)]
pub struct ConeSanityReport {
    /// Profiles checked (the constant profiles 1 and 0, plus the random
    /// draws).
    pub samples: usize,
    /// Profiles whose image margin fell below `-tolerance`.
    pub violations: usize,
    /// Smallest image margin seen.
    pub worst_margin: f64,
    pub tolerance: f64,
}

/// Empirically verifies that the discrete operator maps cone members back
/// into the cone: piecewise-linear profiles inside the cone are pushed
/// through the operator and the image's cone margin is required to stay
/// above `-1e-8`. The nonlinearity must be non-negative over the sampled
/// state range, otherwise the run aborts with a hypothesis error.
pub fn cone_sanity_check(
    params: &ProblemParams,
    strip: &StripInterval,
    c: f64,
    g: &NonlinearityExpr,
    f: &NonlinearityExpr,
    samples: usize,
) -> Result<ConeSanityReport> {
    weight_hypothesis_check(params, g)?;
    if !(c.is_finite() && c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!(
            "cone constant must lie in (0, 1), got {c}"
        )));
    }
    let half = params.half_period();

    // Sampled profiles live in [-1, 1]; the nonlinearity must be
    // non-negative there for the preservation statement to apply.
    let probe = Box3::new((-half, half), (-1.0, 1.0), (-1.0, 1.0))?;
    let lowest = f.box_inf(&probe)?;
    if lowest.value < 0.0 {
        return Err(Error::Hypothesis(format!(
            "cone preservation requires a non-negative nonlinearity on the sampled \
             state range; f({}, {}, {}) = {}",
            lowest.at[0], lowest.at[1], lowest.at[2], lowest.value
        )));
    }

    let grid = SymmetricGrid::new(params, SANITY_GRID_NODES)?;
    let operator = DiscreteOperator::new(params, &grid, g)?;
    let spacing = grid.spacing();
    let (lo, hi) = (strip.a() * half, strip.b() * half);
    // Nodes raised to at least this level put the profile safely inside
    // the cone (norm stays <= 1, strip minimum clears c by at least the
    // smaller of 0.01 and 1 - c).
    let floor = (c + 0.01).min(1.0);

    let mut report = ConeSanityReport {
        samples: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        tolerance: SANITY_TOLERANCE,
    };

    let mut push = |profile: &[f64]| -> Result<()> {
        debug_assert!(nodal_cone_margin(&grid, profile, strip, c) >= 0.0);
        let image = operator.apply(f, profile)?;
        let margin = nodal_cone_margin(&grid, &image, strip, c);
        report.samples += 1;
        if margin < report.worst_margin {
            report.worst_margin = margin;
        }
        if margin < -SANITY_TOLERANCE {
            report.violations += 1;
        }
        Ok(())
    };

    push(&vec![1.0; grid.len()])?;
    push(&vec![0.0; grid.len()])?;

    let mut state = 0x5EED_0F_C0DE_u64;
    for _ in 0..samples {
        let mut profile = Vec::with_capacity(grid.len());
        for &t in grid.nodes() {
            // Nodes adjacent to the strip are raised too, so the linear
            // interpolant at the strip endpoints also clears the floor.
            let raised = t >= lo - spacing && t <= hi + spacing;
            let value = if raised {
                floor + (1.0 - floor) * random_unit(&mut state)
            } else {
                2.0 * random_unit(&mut state) - 1.0
            };
            profile.push(value);
        }
        push(&profile)?;
    }

    Ok(report)
}

/// SplitMix64 step; a tiny deterministic generator keeps the library free
/// of an RNG dependency.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw from `[0, 1)`.
fn random_unit(state: &mut u64) -> f64 {
    (splitmix64(state) >> 11) as f64 / (1u64 << 53) as f64
}
