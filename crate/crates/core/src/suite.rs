//! Verification suites and their JSON reports.
//!
//! Every suite is a pure function of a [`RunConfig`]. Random samples draw from
//! `ChaCha8Rng` seeded with the run seed and one stream per sample index, and
//! parallel results are merged in index order, so reports do not depend on
//! the thread count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bridge::{self, KMode, QuadraticUnit};
use crate::error::{Error, Result};
use crate::glzpoly::{self, GlzPolynomial, IntPolynomial};
use crate::isogroup::{self, GroupElement, ModelData, Point};
use crate::linalg::Matrix;
use crate::nullforms::{self, InnerProduct, NilpotentSelfAdjoint};
use crate::scalar::rat;
use crate::selectors::{self, Condition, Instance};
use crate::solspace::{self, Curve, EvalPath, FourierProfile, HomogeneityFunction, Solution, TransformedCurve};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Selectors,
    Glz,
    Group,
    Solspace,
    Canonical,
    Bridge,
    All,
}

impl Suite {
    pub const PARTS: [Suite; 6] = [
        Suite::Selectors,
        Suite::Glz,
        Suite::Group,
        Suite::Solspace,
        Suite::Canonical,
        Suite::Bridge,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Selectors => "selectors",
            Suite::Glz => "glz",
            Suite::Group => "group",
            Suite::Solspace => "solspace",
            Suite::Canonical => "canonical",
            Suite::Bridge => "bridge",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::All]
            .into_iter()
            .chain(Suite::PARTS)
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::OutOfRange {
                name: "suite",
                detail: format!("unknown suite {s:?}"),
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub residual: f64,
    pub dual_path: f64,
    pub monodromy: f64,
    pub group: f64,
    pub isometry: f64,
    pub jacobian: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-8,
            dual_path: 1e-7,
            monodromy: 1e-9,
            group: 1e-10,
            isometry: 1e-8,
            jacobian: 1e-5,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        let all = [
            ("residual", self.residual),
            ("dual_path", self.dual_path),
            ("monodromy", self.monodromy),
            ("group", self.group),
            ("isometry", self.isometry),
            ("jacobian", self.jacobian),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange {
                    name: "tolerance",
                    detail: format!("{name} must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectorParams {
    pub m_min: u32,
    pub m_max: u32,
    /// Upper `m` for the positive controls and the survivor sweep.
    pub control_m_max: u32,
    /// Upper `m` for the exact identity sweep.
    pub identity_m_max: u32,
    /// Sweep `|k| <= k_abs_max`; `None` means `|k| <= m - 1`.
    #[serde(default)]
    pub k_abs_max: Option<u32>,
    /// Extra relaxed sweep over `m_min..=m_max` with one condition removed.
    #[serde(default)]
    pub drop: Option<Condition>,
}

impl Default for SelectorParams {
    fn default() -> Self {
        Self {
            m_min: 2,
            m_max: 14,
            control_m_max: 10,
            identity_m_max: 32,
            k_abs_max: None,
            drop: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlzParams {
    pub degree: usize,
    pub coeff_bound: i64,
    pub samples: usize,
    pub sample_coeff_bound: i64,
}

impl Default for GlzParams {
    fn default() -> Self {
        Self {
            degree: 8,
            coeff_bound: 12,
            samples: 500,
            sample_coeff_bound: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupParams {
    pub n: usize,
    pub q: f64,
    pub c: f64,
    pub samples: usize,
}

impl Default for GroupParams {
    fn default() -> Self {
        Self {
            n: 4,
            q: 2.0,
            c: 2.0,
            samples: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolspaceParams {
    pub m_max: usize,
    pub c_values: Vec<f64>,
    pub q_values: Vec<f64>,
    pub points: usize,
}

impl Default for SolspaceParams {
    fn default() -> Self {
        Self {
            m_max: 4,
            c_values: vec![2.0, 6.0, 0.37],
            q_values: vec![2.0, 1.5],
            points: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalParams {
    pub m_min: usize,
    pub m_max: usize,
    pub scrambles: usize,
}

impl Default for CanonicalParams {
    fn default() -> Self {
        Self {
            m_min: 2,
            m_max: 6,
            scrambles: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeParams {
    pub m_max: u32,
    pub exponent_m_max: u32,
    pub k_mode: KMode,
}

impl Default for BridgeParams {
    fn default() -> Self {
        Self {
            m_max: 14,
            exponent_m_max: 16,
            k_mode: KMode::Full,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub suite: Suite,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub selectors: SelectorParams,
    pub glz: GlzParams,
    pub group: GroupParams,
    pub solspace: SolspaceParams,
    pub canonical: CanonicalParams,
    pub bridge: BridgeParams,
}

impl RunConfig {
    pub fn new(suite: Suite) -> Self {
        Self {
            suite,
            seed: 7,
            tolerances: Tolerances::default(),
            selectors: SelectorParams::default(),
            glz: GlzParams::default(),
            group: GroupParams::default(),
            solspace: SolspaceParams::default(),
            canonical: CanonicalParams::default(),
            bridge: BridgeParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        let bad = |name: &'static str, detail: String| Err(Error::OutOfRange { name, detail });
        let s = &self.selectors;
        if s.m_min < 2 || s.m_min > s.m_max || s.m_max > selectors::DEFAULT_M_BOUND {
            return bad("m", format!("need 2 <= m-min <= m-max <= {}", selectors::DEFAULT_M_BOUND));
        }
        if s.identity_m_max > selectors::MAX_M || s.control_m_max > selectors::DEFAULT_M_BOUND {
            return bad("m", "identity or control bound too large".into());
        }
        if s.k_abs_max.is_some_and(|b| b > 2 * s.m_max) {
            return bad("k", "need k-abs-max <= 2 m-max".into());
        }
        if self.glz.degree == 0 || self.glz.degree > 16 || self.glz.coeff_bound < 1 || self.glz.sample_coeff_bound < 1 {
            return bad("degree", "need 1 <= degree <= 16 and positive coefficient bounds".into());
        }
        if self.group.n < 4 || !(self.group.q > 0.0) || self.group.q == 1.0 || 1.0 + 4.0 * self.group.c < 0.0 {
            return bad("group", "need n >= 4, q > 0, q != 1 and 1 + 4c >= 0".into());
        }
        let sp = &self.solspace;
        if sp.m_max < 2 || sp.points == 0 || sp.q_values.iter().any(|q| !(*q > 0.0) || *q == 1.0) {
            return bad("solspace", "need m-max >= 2, points >= 1, q > 0 and q != 1".into());
        }
        if sp.c_values.iter().any(|c| 1.0 + 4.0 * c < 0.0) {
            return bad("c", "need 1 + 4c >= 0".into());
        }
        let cn = &self.canonical;
        if cn.m_min < 2 || cn.m_min > cn.m_max {
            return bad("canonical", "need 2 <= m-min <= m-max".into());
        }
        if self.bridge.m_max < 2 || self.bridge.m_max > selectors::DEFAULT_M_BOUND || self.bridge.exponent_m_max > selectors::MAX_M {
            return bad("bridge", "m-max out of range".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Warn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `defect < tolerance`.
    pub fn bounded(name: impl Into<String>, defect: f64, tolerance: f64, witness: Option<Value>) -> Self {
        Self {
            name: name.into(),
            status: if defect < tolerance { Status::Pass } else { Status::Fail },
            defect: Some(defect),
            tolerance: Some(tolerance),
            witness,
            detail: None,
        }
    }

    pub fn exact(name: impl Into<String>, ok: bool, witness: Option<Value>) -> Self {
        Self {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            defect: None,
            tolerance: None,
            witness,
            detail: None,
        }
    }

    pub fn failed(name: impl Into<String>, err: &Error) -> Self {
        Self {
            name: name.into(),
            status: Status::Fail,
            defect: None,
            tolerance: None,
            witness: None,
            detail: Some(err.to_string()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

fn check_or_fail(name: &str, body: impl FnOnce() -> Result<Check>) -> Check {
    body().unwrap_or_else(|e| Check::failed(name, &e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub warnings: usize,
}

/// Wall-clock data; excluded from the determinism comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timestamp {
    pub started_unix_ms: u128,
    pub elapsed_ms: f64,
    pub suite_ms: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub artifact_version: String,
    pub suite: Suite,
    pub config: RunConfig,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<Timestamp>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without its timestamp.
    pub fn deterministic_json(&self) -> String {
        let mut copy = self.clone();
        copy.timestamp = None;
        copy.to_json()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let wall = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    let start = Instant::now();
    let parts: Vec<Suite> = if config.suite == Suite::All {
        Suite::PARTS.to_vec()
    } else {
        vec![config.suite]
    };
    let mut checks = Vec::new();
    let mut suite_ms = BTreeMap::new();
    for part in parts {
        let t = Instant::now();
        checks.extend(run_part(part, config));
        suite_ms.insert(part.name().to_string(), t.elapsed().as_secs_f64() * 1e3);
    }
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    let warnings = checks.iter().filter(|c| c.status == Status::Warn).count();
    Ok(Report {
        artifact_version: ARTIFACT_VERSION.to_string(),
        suite: config.suite,
        config: config.clone(),
        seed: config.seed,
        summary: Summary {
            total: checks.len(),
            passed: checks.len() - failed - warnings,
            failed,
            warnings,
        },
        checks,
        timestamp: Some(Timestamp {
            started_unix_ms: wall,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            suite_ms,
        }),
    })
}

fn run_part(part: Suite, config: &RunConfig) -> Vec<Check> {
    let mut out = match part {
        Suite::Selectors => selectors_suite(config),
        Suite::Glz => glz_suite(config),
        Suite::Group => group_suite(config),
        Suite::Solspace => solspace_suite(config),
        Suite::Canonical => canonical_suite(config),
        Suite::Bridge => bridge_suite(config),
        Suite::All => unreachable!("expanded by run"),
    };
    for c in &mut out {
        c.name = format!("{}.{}", part.name(), c.name);
    }
    out
}

/// Generator for sample `index` of a run.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn k_range(m: u32) -> std::ops::RangeInclusive<i64> {
    -(m as i64 - 1)..=m as i64 - 1
}

fn sweep_k_range(m: u32, k_abs_max: Option<u32>) -> std::ops::RangeInclusive<i64> {
    let b = k_abs_max.map_or(m as i64 - 1, i64::from);
    -b..=b
}

/// Largest value and its index; the first index wins ties.
fn max_with_index(values: &[f64]) -> (f64, usize) {
    values
        .iter()
        .enumerate()
        .fold((0.0, 0), |(best, at), (i, &v)| if v > best || v.is_nan() { (v, i) } else { (best, at) })
}

// ---------------------------------------------------------------- selectors

fn selectors_suite(cfg: &RunConfig) -> Vec<Check> {
    let p = &cfg.selectors;
    let mut out = Vec::new();

    out.push(check_or_fail("theorem_sweep", || {
        let mut count = 0;
        let mut first = None;
        let mut instances = 0;
        for m in p.m_min..=p.m_max {
            for k in sweep_k_range(m, p.k_abs_max) {
                let found = selectors::exhaustive_search(Instance::new(m, k)?)?;
                instances += 1;
                if first.is_none() && !found.is_empty() {
                    first = Some(json!({"m": m, "k": k, "selector": found[0].elements()}));
                }
                count += found.len();
            }
        }
        Ok(Check::exact("theorem_sweep", count == 0, first)
            .with_detail(format!("{instances} instances, {count} selectors satisfy (a)-(e)")))
    }));

    if let Some(drop) = p.drop {
        let name = format!("relaxed_sweep_drop_{drop}");
        out.push(check_or_fail(&name, || {
            let mut witnesses = Vec::new();
            for m in p.m_min..=p.m_max {
                for k in sweep_k_range(m, p.k_abs_max) {
                    for s in selectors::relaxed_search(Instance::new(m, k)?, drop)? {
                        witnesses.push(json!({"m": m, "k": k, "selector": s.elements()}));
                    }
                }
            }
            let n = witnesses.len();
            witnesses.truncate(8);
            let mut check = Check::exact(&name, true, Some(Value::Array(witnesses)))
                .with_detail(format!("{n} selectors satisfy the remaining conditions"));
            check.status = Status::Warn;
            Ok(check)
        }));
    }

    for drop in [Condition::E, Condition::A] {
        let name = format!("positive_control_drop_{drop}");
        out.push(check_or_fail(&name, || {
            let mut witnesses = Vec::new();
            let mut scanned = 0;
            for m in 2..=p.control_m_max.max(2) {
                for k in k_range(m) {
                    scanned += 1;
                    for s in selectors::relaxed_search(Instance::new(m, k)?, drop)? {
                        witnesses.push(json!({"m": m, "k": k, "selector": s.elements()}));
                    }
                }
            }
            let n = witnesses.len();
            witnesses.truncate(8);
            let check = Check::exact(&name, n > 0, Some(Value::Array(witnesses)));
            Ok(if n > 0 {
                check.with_detail(format!("{n} witnesses over {scanned} instances"))
            } else {
                check.with_detail(format!("no witness over {scanned} instances"))
            })
        }));
    }

    out.push(check_or_fail("identities", || {
        let mut bad = None;
        let mut count = 0u64;
        for m in 2..=p.identity_m_max {
            for k in k_range(m) {
                let inst = Instance::new(m, k)?;
                let (a0, a1) = selectors::anchors(m, k);
                if a0 + a1 != 2 * m as i64 - 1 && bad.is_none() {
                    bad = Some(json!({"m": m, "k": k, "identity": "a0 + a1"}));
                }
                for a in 1..=2 * m as i64 {
                    count += 1;
                    let phi = inst.phi(a);
                    if (inst.phi(phi) != a || inst.e(phi) != -inst.e(a)) && bad.is_none() {
                        bad = Some(json!({"m": m, "k": k, "a": a}));
                    }
                }
            }
        }
        Ok(Check::exact("identities", bad.is_none(), bad).with_detail(format!("{count} labels checked")))
    }));

    out.push(check_or_fail("survivors_k_range", || {
        let mut witness = Vec::new();
        let mut ok = true;
        for m in 2..=p.control_m_max.min(12).max(2) {
            for k in -(m as i64 + 2)..=m as i64 + 2 {
                let claims = selectors::intermediate_claims(Instance::new(m, k)?)?;
                ok &= claims.all_hold();
                if !claims.survivors.is_empty() && witness.len() < 8 {
                    witness.push(json!({"m": m, "k": k, "survivors": claims.survivors.len()}));
                }
            }
        }
        Ok(Check::exact("survivors_k_range", ok, Some(Value::Array(witness))))
    }));
    out
}

// ---------------------------------------------------------------- glz

fn random_glz(rng: &mut ChaCha8Rng, dmax: usize, bound: i64) -> Vec<i64> {
    let d = rng.random_range(1..=dmax);
    let mut c: Vec<i64> = (0..=d).map(|_| rng.random_range(-bound..=bound)).collect();
    c[0] = if rng.random_bool(0.5) { 1 } else { -1 };
    c[d] = if d % 2 == 0 { 1 } else { -1 };
    c
}

/// `x^10 + x^9 - x^7 - x^6 - x^5 - x^4 - x^3 + x + 1`.
pub const LEHMER: [i64; 11] = [1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1];

fn glz_suite(cfg: &RunConfig) -> Vec<Check> {
    let p = &cfg.glz;
    let mut out = Vec::new();

    out.push(check_or_fail("companion_roundtrip", || {
        let results: Vec<Result<Option<Vec<i64>>>> = (0..p.samples as u64)
            .into_par_iter()
            .map(|i| {
                let c = random_glz(&mut sample_rng(cfg.seed, i), p.degree, p.sample_coeff_bound);
                let poly = GlzPolynomial::from_i64(&c)?;
                let back = glzpoly::char_poly(&glzpoly::companion(&poly));
                Ok((back != poly).then_some(c))
            })
            .collect();
        let mut bad = None;
        for r in results {
            if let Some(c) = r? {
                bad.get_or_insert(c);
            }
        }
        Ok(Check::exact("companion_roundtrip", bad.is_none(), bad.map(|c| json!(c)))
            .with_detail(format!("{} random polynomials", p.samples)))
    }));

    out.push(check_or_fail("cyclotomic_census", || {
        let census = glzpoly::cyclotomic_census(p.degree, p.coeff_bound)?;
        let ok = census.discrepancies.is_empty();
        Ok(Check::exact(
            "cyclotomic_census",
            ok,
            Some(json!({"discrepancies": census.discrepancies, "found": census.found.len()})),
        )
        .with_detail(format!(
            "{} candidates, {} periodic, {} reducible periodic, {} expected",
            census.candidates,
            census.periodic,
            census.reducible_periodic,
            census.expected.len()
        )))
    }));

    out.push(check_or_fail("non_cyclotomic_controls", || {
        let quad = glzpoly::is_cyclotomic(&GlzPolynomial::from_i64(&[1, -3, 1])?)?;
        let lehmer = glzpoly::is_cyclotomic(&GlzPolynomial::from_i64(&LEHMER)?)?;
        Ok(Check::exact(
            "non_cyclotomic_controls",
            !quad && !lehmer,
            Some(json!({"x^2-3x+1": quad, "lehmer": lehmer})),
        ))
    }));

    out.push(check_or_fail("power_spectrum", || {
        let got = glzpoly::power_spectrum_poly(&GlzPolynomial::from_i64(&[1, -3, 1])?, 2)?;
        let want = GlzPolynomial::from_i64(&[1, -7, 1])?;
        Ok(Check::exact("power_spectrum", got == want, Some(json!(got.poly().to_string()))))
    }));

    out.push(check_or_fail("divisibility_identity", || {
        let phi7 = GlzPolynomial::new(glzpoly::cyclotomic_polynomial(7))?;
        let mut ok = true;
        for r in [1, 2] {
            ok &= glzpoly::divisibility_identity(&phi7, 2, r)?.holds();
        }
        Ok(Check::exact("divisibility_identity", ok, None))
    }));
    out
}

// ---------------------------------------------------------------- group

#[derive(Clone, Copy, Default)]
struct GroupDefects {
    associativity: f64,
    identity: f64,
    inverse: f64,
    action: f64,
    isometry: f64,
    jacobian: f64,
    conjugation: f64,
    chart: f64,
}

fn group_sample(model: &ModelData<f64>, q: f64, seed: u64, index: u64) -> Result<GroupDefects> {
    let mut rng = sample_rng(seed, index);
    let a = isogroup::random_element(model, q, &mut rng)?;
    let b = isogroup::random_element(model, q, &mut rng)?;
    let c = isogroup::random_element(model, q, &mut rng)?;
    let pt = isogroup::random_point(model, &mut rng);
    let id = isogroup::group_identity(model);
    let mul = isogroup::group_mul;
    let ab = mul(&a, &b)?;
    let associativity = mul(&ab, &c)?.distance(&mul(&a, &mul(&b, &c)?)?)?;
    let identity = mul(&a, &id)?.distance(&a)?.max(mul(&id, &a)?.distance(&a)?);
    let inv = isogroup::group_inv(&a)?;
    let inverse = mul(&a, &inv)?.distance(&id)?.max(mul(&inv, &a)?.distance(&id)?);
    let one = isogroup::act(model, &a, &isogroup::act(model, &b, &pt)?)?;
    let action = one.relative_diff(&isogroup::act(model, &ab, &pt)?);
    let isometry = isogroup::isometry_defect(model, &a, &pt)?;
    let j = isogroup::action_jacobian(model, &a, &pt)?;
    let fd = isogroup::finite_difference_jacobian(model, &a, &pt, 1e-5)?;
    let jacobian = fd.max_abs_diff(&j) / j.max_abs().max(1.0);

    let u = isogroup::random_solution(model, &mut rng, 1.0)?;
    let r = rng.random_range(-1.0..=1.0);
    let h = GroupElement::in_h(model, r, u.clone())?;
    let conj = mul(&mul(&a, &h)?, &isogroup::group_inv(&a)?)?;
    let su = a.sigma(&u)?;
    let want = GroupElement::in_h(model, 2.0 * solspace::omega(&su, &a.u)? + r / a.q, su)?;
    let conjugation = conj.distance(&want)?;

    let (t, z) = (rng.random_range(0.5..=3.0), rng.random_range(-1.0..=1.0));
    let (z2, u2) = isogroup::h_translate(&h, z, &b.u)?;
    let lhs = isogroup::equivariant_chart(model, t, z2, &u2)?;
    let rhs = isogroup::act(model, &h, &isogroup::equivariant_chart(model, t, z, &b.u)?)?;
    let chart = lhs.max_abs_diff(&rhs);
    Ok(GroupDefects {
        associativity,
        identity,
        inverse,
        action,
        isometry,
        jacobian,
        conjugation,
        chart,
    })
}

fn group_suite(cfg: &RunConfig) -> Vec<Check> {
    let p = &cfg.group;
    let tol = &cfg.tolerances;
    let model = match ModelData::canonical(p.n - 2, 1, HomogeneityFunction::euler(p.c)) {
        Ok(m) => m,
        Err(e) => return vec![Check::failed("model", &e)],
    };
    let results: Vec<Result<GroupDefects>> = (0..p.samples as u64)
        .into_par_iter()
        .map(|i| group_sample(&model, p.q, cfg.seed, i))
        .collect();
    let mut samples = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(d) => samples.push(d),
            Err(e) => return vec![Check::failed("sampling", &e)],
        }
    }
    let column = |f: fn(&GroupDefects) -> f64| -> (f64, usize) {
        max_with_index(&samples.iter().map(f).collect::<Vec<_>>())
    };
    let mut out = Vec::new();
    let rows: [(&str, fn(&GroupDefects) -> f64, f64); 8] = [
        ("associativity", |d| d.associativity, tol.group),
        ("identity", |d| d.identity, tol.group),
        ("inverse", |d| d.inverse, tol.group),
        ("action_axiom", |d| d.action, tol.group),
        ("isometry", |d| d.isometry, tol.isometry),
        ("jacobian", |d| d.jacobian, tol.jacobian),
        ("conjugation_twist", |d| d.conjugation, 1e-9),
        ("chart_equivariance", |d| d.chart, 1e-9),
    ];
    for (name, f, t) in rows {
        let (worst, at) = column(f);
        out.push(Check::bounded(name, worst, t, Some(json!({"sample": at, "seed": cfg.seed}))));
    }

    out.push(check_or_fail("raise_dt", || {
        let m = p.n - 2;
        let g = InnerProduct::<BigRational>::antidiagonal(m, 1);
        let mut ok = true;
        for kappa in [rat(0, 1), rat(7, 3), rat(-5, 2)] {
            let v = isogroup::raise_dt(&isogroup::metric_from_kappa(kappa, g.gram()))?;
            ok &= v.iter().enumerate().all(|(i, x)| *x == if i == 1 { rat(2, 1) } else { rat(0, 1) });
        }
        Ok(Check::exact("raise_dt", ok, None))
    }));

    out.push(check_or_fail("flow_shift", || {
        let tau = 0.375;
        let h = GroupElement::in_h(&model, 2.0 * tau, Solution::zero(model.ode().clone()))?;
        let pt = Point::new(1.25, -0.5, vec![0.5; p.n - 2])?;
        let image = isogroup::act(&model, &h, &pt)?;
        let want = Point::new(1.25, -0.5 + 2.0 * tau, vec![0.5; p.n - 2])?;
        Ok(Check::exact("flow_shift", image == want, None))
    }));

    out.push(check_or_fail("signature", || {
        let m = p.n - 2;
        let g = InnerProduct::<BigRational>::antidiagonal(m, 1);
        let metric = isogroup::metric_from_kappa(rat(3, 2), g.gram());
        let (pp, nn, zz) = metric.inertia();
        let (gp, gn) = g.signature();
        Ok(Check::exact(
            "signature",
            zz == 0 && pp == gp + 1 && nn == gn + 1,
            Some(json!([pp, nn])),
        ))
    }));

    out.push(check_or_fail("homomorphism_qp", || {
        let mut ok = true;
        for i in 0..16u64 {
            let mut rng = sample_rng(cfg.seed ^ 0x9e37, i);
            let a = isogroup::random_element(&model, p.q, &mut rng)?;
            let b = isogroup::random_element(&model, p.q, &mut rng)?;
            let ab = isogroup::group_mul(&a, &b)?;
            ok &= ab.q == a.q * b.q && ab.p == a.q * b.p + a.p;
        }
        Ok(Check::exact("homomorphism_qp", ok, None))
    }));
    out
}

// ---------------------------------------------------------------- solspace

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn random_data(rng: &mut ChaCha8Rng, m: usize) -> (Vec<f64>, Vec<f64>) {
    (
        (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect(),
        (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect(),
    )
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// `(m, c, q)` combinations of the sweep.
fn sol_configs(p: &SolspaceParams) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    for m in 2..=p.m_max {
        for &c in &p.c_values {
            for &q in &p.q_values {
                out.push((m, c, q));
            }
        }
    }
    out
}

fn worst_over<T: Sync>(
    items: Vec<T>,
    f: impl Fn(&T) -> Result<f64> + Sync + Send,
) -> Result<(f64, usize)> {
    let values: Vec<Result<f64>> = items.par_iter().map(f).collect();
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    Ok(max_with_index(&values))
}

fn solspace_suite(cfg: &RunConfig) -> Vec<Check> {
    let p = &cfg.solspace;
    let tol = &cfg.tolerances;
    let seed = cfg.seed;
    let configs = sol_configs(p);
    let points = log_points(0.25, 8.0, p.points);
    let mut out = Vec::new();

    out.push(check_or_fail("residual", || {
        let (worst, at) = worst_over(configs.clone(), |&(m, c, q)| {
            let s = solspace::canonical_setup(m, 1, q, HomogeneityFunction::euler(c))?;
            let mut rng = sample_rng(seed, (m * 1000) as u64 + (c * 100.0) as u64);
            let (u0, v0) = random_data(&mut rng, m);
            let u = Solution::new(s.model, 1.0, u0, v0)?;
            points.iter().map(|&t| solspace::residual(&u, t)).try_fold(0.0, |a, r| r.map(|r| f64::max(a, r)))
        })?;
        Ok(Check::bounded("residual", worst, tol.residual, Some(json!(configs[at]))))
    }));

    out.push(check_or_fail("ct_closure", || {
        let (worst, at) = worst_over(configs.clone(), |&(m, c, q)| {
            let s = solspace::canonical_setup(m, 1, q, HomogeneityFunction::euler(c))?;
            let mut rng = sample_rng(seed, 7 + (m * 1000) as u64 + (c * 100.0) as u64);
            let (u0, v0) = random_data(&mut rng, m);
            let u = Solution::new(s.model.clone(), 1.0, u0, v0)?;
            let curve = TransformedCurve {
                inner: u.clone(),
                q,
                p: 0.0,
                c: s.c.clone(),
            };
            let ct = solspace::apply_ct(&u, &s.c, q)?;
            let mut worst: f64 = 0.0;
            for &t in &points {
                worst = worst.max(solspace::residual(&curve, t)?);
                let (a, da) = curve.state(t)?;
                let (b, db) = ct.evaluate(t)?;
                worst = worst.max(rel_diff(&a, &b)).max(rel_diff(&da, &db));
            }
            Ok(worst)
        })?;
        Ok(Check::bounded("ct_closure", worst, tol.residual, Some(json!(configs[at]))))
    }));

    out.push(check_or_fail("dual_path", || {
        let pts = log_points(1.0, 8.0, 12);
        let (worst, at) = worst_over(configs.clone(), |&(m, c, q)| {
            let s = solspace::canonical_setup(m, 1, q, HomogeneityFunction::euler(c))?;
            let numeric = s.model.rerouted(EvalPath::Numeric)?;
            let mut rng = sample_rng(seed, 13 + (m * 1000) as u64 + (c * 100.0) as u64);
            let (u0, v0) = random_data(&mut rng, m);
            let a = Solution::new(s.model.clone(), 1.0, u0.clone(), v0.clone())?;
            let b = Solution::new(numeric, 1.0, u0, v0)?;
            let mut worst: f64 = 0.0;
            for &t in &pts {
                let (x, dx) = a.evaluate(t)?;
                let (y, dy) = b.evaluate(t)?;
                worst = worst.max(rel_diff(&x, &y)).max(rel_diff(&dx, &dy));
            }
            Ok(worst)
        })?;
        Ok(Check::bounded("dual_path", worst, tol.dual_path, Some(json!(configs[at]))))
    }));

    out.push(check_or_fail("log_periodic", || {
        let q = 2.0f64;
        let f = HomogeneityFunction::LogPeriodic {
            q,
            profile: FourierProfile {
                mean: 2.0,
                cos: vec![0.3],
                sin: vec![0.1],
            },
        };
        let sym = f.symmetry_defect(q, &points);
        let s = solspace::canonical_setup(2, 1, q, f.clone())?;
        let mut rng = sample_rng(seed, 99);
        let (u0, v0) = random_data(&mut rng, 2);
        let u = Solution::new(s.model, 1.0, u0, v0)?;
        let mut worst = sym;
        for &t in &log_points(0.5, 4.0, 9) {
            worst = worst.max(solspace::residual(&u, t)?);
        }
        Ok(Check::bounded("log_periodic", worst, tol.residual, None).with_detail(format!("symmetry defect {sym:e}")))
    }));

    out.push(check_or_fail("log_periodic_monodromy", || {
        let q = 2.0f64;
        let f = HomogeneityFunction::LogPeriodic {
            q,
            profile: FourierProfile {
                mean: 2.0,
                cos: vec![0.3],
                sin: vec![0.1],
            },
        };
        let mono = solspace::scalar_monodromy(&f, q, 1.0)?;
        let defect = f64::max(mono.det_defect(q), mono.product_defect(q));
        Ok(Check::bounded("log_periodic_monodromy", defect, tol.monodromy, None))
    }));

    out.push(check_or_fail("monodromy", || {
        let mut worst: f64 = 0.0;
        let mut witness = Vec::new();
        for &c in &p.c_values {
            for &q in &p.q_values {
                let mono = solspace::scalar_monodromy(&HomogeneityFunction::euler(c), q, 1.0)?;
                worst = worst.max(mono.product_defect(q)).max(mono.det_defect(q));
                witness.push(json!({"c": c, "q": q, "mu_plus": [mono.mu_plus.re, mono.mu_plus.im], "mu_minus": [mono.mu_minus.re, mono.mu_minus.im]}));
            }
        }
        Ok(Check::bounded("monodromy", worst, tol.monodromy, Some(Value::Array(witness))))
    }));

    out.push(check_or_fail("monodromy_closed_form", || {
        let mut worst: f64 = 0.0;
        for &c in &p.c_values {
            for &q in &p.q_values {
                let mono = solspace::scalar_monodromy(&HomogeneityFunction::euler(c), q, 1.0)?;
                let root = (1.0 + 4.0 * c).sqrt();
                // T t^alpha = q^{-alpha} t^alpha
                let want = (q.powf(-(1.0 + root) / 2.0), q.powf(-(1.0 - root) / 2.0));
                worst = worst
                    .max((mono.mu_plus.re - want.0).abs() / want.0)
                    .max((mono.mu_minus.re - want.1).abs() / want.1)
                    .max(mono.mu_plus.im.abs())
                    .max(mono.mu_minus.im.abs());
            }
        }
        Ok(Check::bounded("monodromy_closed_form", worst, 1e-10, None))
    }));

    out.push(check_or_fail("omega_drift", || {
        let (worst, at) = worst_over(configs.clone(), |&(m, c, q)| {
            let s = solspace::canonical_setup(m, 1, q, HomogeneityFunction::euler(c))?;
            let mut rng = sample_rng(seed, 21 + (m * 1000) as u64 + (c * 100.0) as u64);
            let (u0, v0) = random_data(&mut rng, m);
            let (w0, x0) = random_data(&mut rng, m);
            let u = Solution::new(s.model.clone(), 1.0, u0, v0)?;
            let w = Solution::new(s.model.clone(), 1.0, w0, x0)?;
            let base = solspace::omega(&u, &w)?;
            let mut worst: f64 = 0.0;
            for t in log_points(1.0, q.powi(3), 40) {
                worst = worst.max((solspace::omega_at(&u, &w, t)? - base).abs() / base.abs().max(1.0));
            }
            Ok(worst)
        })?;
        Ok(Check::bounded("omega_drift", worst, tol.residual, Some(json!(configs[at]))))
    }));

    out.push(check_or_fail("omega_scaling", || {
        let (worst, at) = worst_over(configs.clone(), |&(m, c, q)| {
            let s = solspace::canonical_setup(m, 1, q, HomogeneityFunction::euler(c))?;
            let mut rng = sample_rng(seed, 31 + (m * 1000) as u64 + (c * 100.0) as u64);
            let (u0, v0) = random_data(&mut rng, m);
            let (w0, x0) = random_data(&mut rng, m);
            let u = Solution::new(s.model.clone(), 1.0, u0, v0)?;
            let w = Solution::new(s.model.clone(), 1.0, w0, x0)?;
            let (_, rhs, d) = solspace::omega_scaling_check(&u, &w, &s.c, q)?;
            Ok(d / rhs.abs().max(1.0))
        })?;
        Ok(Check::bounded("omega_scaling", worst, tol.residual, Some(json!(configs[at]))))
    }));

    out.push(check_or_fail("omega_example", || {
        let q = 2.0;
        let s = solspace::canonical_setup(2, 1, q, HomogeneityFunction::euler(2.0))?;
        let u = Solution::new(s.model.clone(), 1.0, vec![1.0, 0.0], vec![2.0, 0.0])?;
        let w = Solution::new(s.model, 1.0, vec![-q * q / 2.0, 1.0], vec![-q * q / 2.0, -1.0])?;
        let value: f64 = solspace::omega(&u, &w)?;
        Ok(Check::bounded("omega_example", (value - 3.0).abs(), 1e-9, Some(json!(value))))
    }));

    out.push(check_or_fail("triangular", || {
        let (q, c) = (2.0, 2.0);
        let mut below: f64 = 0.0;
        let mut diag: f64 = 0.0;
        let mut pattern_ok = true;
        let mut witness = Vec::new();
        for m in 2..=p.m_max {
            let s = solspace::canonical_setup(m, 1, q, HomogeneityFunction::euler(c))?;
            let basis = solspace::triangular_basis(&s.model, q, &s.frame)?;
            let ct = basis.ct_matrix(&s.c)?;
            below = below.max(solspace::below_diagonal_max(&ct));
            diag = diag.max(solspace::diagonal_relative_defect(&ct, &basis.labels));
            let pattern = solspace::omega_pattern(&basis)?;
            pattern_ok &= pattern.hypothesis_holds && pattern.holds(1e-8, 1e-3);
            witness.push(json!({"m": m, "labels": basis.labels}));
        }
        let check = Check::bounded("triangular", below.max(diag), 1e-8, Some(Value::Array(witness)));
        Ok(if pattern_ok {
            check
        } else {
            Check {
                status: Status::Fail,
                ..check
            }
            .with_detail("Omega pattern violated")
        })
    }));
    out
}

// ---------------------------------------------------------------- canonical

type Q = BigRational;

fn q_int(v: i64) -> Q {
    rat(v, 1)
}

/// Product of random elementary integer operations; determinant `+-1`.
pub fn random_unimodular(m: usize, rng: &mut ChaCha8Rng) -> Matrix<Q> {
    let mut p = Matrix::<Q>::identity(m);
    for _ in 0..3 * m {
        let i = rng.random_range(0..m);
        let mut j = rng.random_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        let factor = q_int(*[-2i64, -1, 1, 2].get(rng.random_range(0..4)).unwrap());
        for col in 0..m {
            let v = p[(i, col)].clone() + factor.clone() * p[(j, col)].clone();
            p[(i, col)] = v;
        }
        if rng.random_bool(0.25) {
            p.swap_rows(i, j);
        }
    }
    p
}

fn same_up_to_sign(a: &Matrix<Q>, b: &Matrix<Q>) -> bool {
    a == b || *a == -b
}

struct Scrambled {
    g: InnerProduct<Q>,
    a: NilpotentSelfAdjoint<Q>,
    p_inv: Matrix<Q>,
    epsilon: i32,
}

fn scrambled(m: usize, rng: &mut ChaCha8Rng) -> Result<Scrambled> {
    let epsilon = if rng.random_bool(0.5) { 1 } else { -1 };
    let p = random_unimodular(m, rng);
    let p_inv = p.inverse().ok_or_else(|| Error::Internal("scramble is singular".into()))?;
    let g0 = InnerProduct::<Q>::antidiagonal(m, epsilon);
    let a0 = nullforms::jordan_block::<Q>(m);
    let g = InnerProduct::new(&(&p.transpose() * g0.gram()) * &p)?;
    let a = NilpotentSelfAdjoint::new(&(&p_inv * &a0) * &p, &g)?;
    Ok(Scrambled { g, a, p_inv, epsilon })
}

fn block_diagonal(blocks: &[Matrix<Q>]) -> Matrix<Q> {
    let n: usize = blocks.iter().map(|b| b.rows()).sum();
    let mut out = Matrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        for i in 0..b.rows() {
            for j in 0..b.cols() {
                out[(at + i, at + j)] = b[(i, j)].clone();
            }
        }
        at += b.rows();
    }
    out
}

fn canonical_suite(cfg: &RunConfig) -> Vec<Check> {
    let p = &cfg.canonical;
    let mut out = Vec::new();
    let ms: Vec<usize> = (p.m_min..=p.m_max).collect();

    out.push(check_or_fail("roundtrip", || {
        let jobs: Vec<(usize, u64)> = ms
            .iter()
            .flat_map(|&m| (0..p.scrambles as u64).map(move |i| (m, i)))
            .collect();
        let results: Vec<Result<Option<Value>>> = jobs
            .par_iter()
            .map(|&(m, i)| {
                let mut rng = sample_rng(cfg.seed, (m as u64) << 32 | i);
                let s = scrambled(m, &mut rng)?;
                let quad = nullforms::canonical_basis(&s.a, &s.g)?;
                let basis = quad.basis_matrix();
                let mut ok = same_up_to_sign(&basis, &s.p_inv)
                    && quad.epsilon == s.epsilon
                    && quad.scale_square.is_one()
                    && s.g.is_semi_neutral();
                if ok {
                    for seed in nullforms::admissible_seeds(s.a.matrix(), &s.g) {
                        let other = nullforms::canonical_basis_from_seed(&s.a, &s.g, &seed)?;
                        ok &= same_up_to_sign(&other.basis_matrix(), &basis);
                    }
                }
                Ok((!ok).then(|| json!({"m": m, "sample": i})))
            })
            .collect();
        let mut bad = None;
        for r in results {
            if let Some(w) = r? {
                bad.get_or_insert(w);
            }
        }
        Ok(Check::exact("roundtrip", bad.is_none(), bad)
            .with_detail(format!("{} scrambles, every admissible seed", jobs.len())))
    }));

    out.push(check_or_fail("scaling_isometries", || {
        let mut ok = true;
        let mut count = 0;
        for &m in &ms {
            let mut rng = sample_rng(cfg.seed, 0xC0 + m as u64);
            let s = scrambled(m, &mut rng)?;
            for q in [rat(2, 1), rat(3, 2)] {
                let cs = nullforms::scaling_isometries(&s.a, &s.g, &q)?;
                ok &= cs.len() == 2;
                let a = s.a.matrix();
                let g = s.g.gram();
                for c in cs {
                    count += 1;
                    ok &= &c * a == &a.scale(&(q.clone() * q.clone())) * &c;
                    ok &= &(&c.transpose() * g) * &c == *g;
                }
            }
        }
        Ok(Check::exact("scaling_isometries", ok, None).with_detail(format!("{count} isometries checked exactly")))
    }));

    out.push(check_or_fail("commutant", || {
        let mut generic_ok = true;
        let mut degenerate_ok = true;
        let mut witness = Vec::new();
        for &m in &ms {
            let mut rng = sample_rng(cfg.seed, 0xD0 + m as u64);
            let s = scrambled(m, &mut rng)?;
            let d = nullforms::commutant_skew_dimension(s.a.matrix(), &s.g);
            generic_ok &= d == 0;
            if m >= 3 {
                let k = m / 2;
                let a = block_diagonal(&[nullforms::jordan_block(k), nullforms::jordan_block(m - k)]);
                let g = InnerProduct::new(block_diagonal(&[
                    InnerProduct::<Q>::antidiagonal(k, 1).gram().clone(),
                    InnerProduct::<Q>::antidiagonal(m - k, 1).gram().clone(),
                ]))?;
                let dd = nullforms::commutant_skew_dimension(&a, &g);
                degenerate_ok &= dd >= 1;
                witness.push(json!({"m": m, "blocks": [k, m - k], "dimension": dd}));
            }
        }
        Ok(Check::exact("commutant", generic_ok && degenerate_ok, Some(Value::Array(witness))))
    }));
    out
}

// ---------------------------------------------------------------- bridge

fn bridge_suite(cfg: &RunConfig) -> Vec<Check> {
    let p = &cfg.bridge;
    let mut out = Vec::new();

    out.push(check_or_fail("exponent_routes", || {
        let mut bad = None;
        for m in 2..=p.exponent_m_max {
            for k in k_range(m) {
                for a in 1..=2 * m as i64 {
                    let one = bridge::exponent_via_selectors(a, m, k)?;
                    let two = bridge::exponent_via_labels(a, m, k)?;
                    if one != two && bad.is_none() {
                        bad = Some(json!({"m": m, "k": k, "a": a, "routes": [one, two]}));
                    }
                }
            }
        }
        Ok(Check::exact("exponent_routes", bad.is_none(), bad))
    }));

    out.push(check_or_fail("pi_diagonal", || {
        let q = 2.0;
        let s = solspace::canonical_setup(2, 1, q, HomogeneityFunction::euler(2.0))?;
        let basis = solspace::triangular_basis(&s.model, q, &s.frame)?;
        let mut rng = sample_rng(cfg.seed, 0xB1);
        let (u0, v0) = random_data(&mut rng, 2);
        let u_hat = Solution::new(s.model.clone(), 1.0, u0, v0)?;
        let pi = bridge::pi_matrix(&basis, &s.c, &u_hat)?;
        let want = [0.5, 0.5, 4.0, 0.125, 1.0];
        let defect = solspace::diagonal_relative_defect(&pi, &want).max(solspace::below_diagonal_max(&pi));
        let diag: Vec<f64> = (0..5).map(|i| pi[(i, i)]).collect();
        Ok(Check::bounded("pi_diagonal", defect, 1e-8, Some(json!(diag))))
    }));

    out.push(check_or_fail("glz_spectrum", || {
        let unit = QuadraticUnit::new(-3, 1)?;
        let poly = bridge::glz_spectrum_polynomial(&[-1, 1], &unit);
        let ok = poly == Some(IntPolynomial::from_i64(&[1, -3, 1]))
            && !bridge::glz_spectrum_check(&[-1, 2], &unit)
            && bridge::glz_spectrum_check(&[0], &unit);
        Ok(Check::exact("glz_spectrum", ok, poly.map(|p| json!(p.to_string()))))
    }));

    out.push(check_or_fail("contradiction_replay", || {
        let report = bridge::contradiction_replay(2, p.m_max, p.k_mode)?;
        let candidates: u64 = report.instances.iter().map(|r| r.candidates).sum();
        let mismatches: u64 = report.instances.iter().map(|r| r.translation_mismatches).sum();
        Ok(Check::exact(
            "contradiction_replay",
            report.contradiction_holds(),
            Some(json!({"instances": report.instances.len(), "candidates": candidates, "hits": report.total_hits, "mismatches": mismatches})),
        ))
    }));
    out
}
