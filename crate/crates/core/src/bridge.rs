//! Links between the triangular basis of the solution space, integer
//! exponents of `q`, GL(Z)-spectra and the selector conditions.
//!
//! Labels `a` in `{1, ..., 2m}` correspond to basis elements by
//! `2j - 1 -> u+_j` and `2j -> u-_j`; with `mu+ = q^k` the label `a` carries
//! the eigenvalue `q^{E(a)}` of `CT`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glzpoly::{is_glz, IntPolynomial};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::selectors::{self, anchors, condition_c, condition_e, Instance, Selector};
use crate::solspace::{integer_exponent, omega, Solution, TriangularBasis};

/// `(m, k)` with `mu+ = q^k` and `mu- = q^{-k-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralInstance {
    pub m: u32,
    pub k: i64,
}

impl SpectralInstance {
    pub fn new(m: u32, k: i64) -> Result<Self> {
        Instance::new(m, k)?;
        Ok(Self { m, k })
    }

    /// Reads `k` off a numerically computed `mu+`.
    pub fn from_mu<R: Real>(m: u32, mu_plus: R, q: R) -> Result<Self> {
        let k = integer_exponent(mu_plus, q, 1e-9)
            .ok_or_else(|| Error::Hypothesis(format!("mu+ = {mu_plus} is not an integer power of q = {q}")))?;
        Self::new(m, k)
    }

    pub fn instance(&self) -> Instance {
        Instance {
            m: self.m,
            k: self.k,
        }
    }

    /// Exponent of `lambda+_j` and `lambda-_j`.
    pub fn label_exponents(&self, j: u32) -> (i64, i64) {
        let base = self.m as i64 + 1 - 2 * j as i64;
        (base + self.k, base - self.k - 1)
    }

    /// Exponents of all `2m` labels in the order `u+_1, u-_1, ..., u+_m, u-_m`.
    pub fn all_exponents(&self) -> Vec<i64> {
        (1..=self.m)
            .flat_map(|j| {
                let (p, n) = self.label_exponents(j);
                [p, n]
            })
            .collect()
    }
}

fn check_label(a: i64, m: u32) -> Result<()> {
    if !(1..=2 * m as i64).contains(&a) {
        return Err(Error::OutOfRange {
            name: "a",
            detail: format!("label {a} outside 1..={}", 2 * m),
        });
    }
    Ok(())
}

/// Exponent through the selector map `E`.
pub fn exponent_via_selectors(a: i64, m: u32, k: i64) -> Result<i64> {
    check_label(a, m)?;
    Ok(selectors::eval_e(a, m, k))
}

/// Exponent through `lambda+-_j = q^{m+1-2j} mu+-`.
pub fn exponent_via_labels(a: i64, m: u32, k: i64) -> Result<i64> {
    check_label(a, m)?;
    let inst = SpectralInstance { m, k };
    let j = ((a + 1) / 2) as u32;
    let (p, n) = inst.label_exponents(j);
    Ok(if a % 2 == 1 { p } else { n })
}

/// Both routes; disagreement is reported as an internal error.
pub fn exponent_of(a: i64, m: u32, k: i64) -> Result<i64> {
    let one = exponent_via_selectors(a, m, k)?;
    let two = exponent_via_labels(a, m, k)?;
    if one != two {
        return Err(Error::Internal(format!("exponent routes disagree at a = {a}, m = {m}, k = {k}: {one} vs {two}")));
    }
    Ok(one)
}

/// Matrix of `Pi(r, u) = (2 Omega(CTu, u^) + r/q, CTu)` on `R x E` in the basis
/// `(1, 0)` followed by the triangular basis.
pub fn pi_matrix<R: Real>(basis: &TriangularBasis<R>, c: &Matrix<R>, u_hat: &Solution<R>) -> Result<Matrix<R>> {
    let n = basis.elements.len();
    let ct = basis.ct_matrix(c)?;
    let q = basis.q;
    let mut pi = Matrix::zeros(n + 1, n + 1);
    pi[(0, 0)] = R::one() / q;
    for (j, b) in basis.elements.iter().enumerate() {
        let moved = crate::solspace::apply_ct(b, c, q)?;
        let w = omega(&moved, u_hat)?;
        pi[(0, j + 1)] = w + w;
        for i in 0..n {
            pi[(i + 1, j + 1)] = ct[(i, j)];
        }
    }
    Ok(pi)
}

/// `q^{-1}` times the product of the selected eigenvalues, as an exponent of `q`.
pub fn restricted_product_exponent(inst: &SpectralInstance, selection: &Selector) -> Result<i64> {
    let mut total = -1;
    for a in selection.elements() {
        total += exponent_of(a, inst.m, inst.k)?;
    }
    Ok(total)
}

/// Element `x + y q` of `Z[q]` for a root `q` of `lambda^2 + b lambda + c`, `c = +-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticUnit {
    pub b: i64,
    pub c: i64,
}

/// `x + y q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZqElement {
    pub x: i128,
    pub y: i128,
}

impl QuadraticUnit {
    pub fn new(b: i64, c: i64) -> Result<Self> {
        if c != 1 && c != -1 {
            return Err(Error::NotGlz(format!("constant term {c} is not a unit")));
        }
        let disc = b * b - 4 * c;
        let r = (disc.max(0) as f64).sqrt().round() as i64;
        if disc >= 0 && r * r == disc {
            let (r1, r2) = ((-b + r) / 2, (-b - r) / 2);
            return Err(Error::Reducible {
                factors: vec![vec![-r1, 1], vec![-r2, 1]],
            });
        }
        Ok(Self { b, c })
    }

    /// The minimal polynomial, constant term first.
    pub fn minimal_polynomial(&self) -> IntPolynomial {
        IntPolynomial::from_i64(&[self.c, self.b, 1])
    }

    pub fn one(&self) -> ZqElement {
        ZqElement { x: 1, y: 0 }
    }

    pub fn integer(&self, n: i128) -> ZqElement {
        ZqElement { x: n, y: 0 }
    }

    pub fn add(&self, u: ZqElement, v: ZqElement) -> ZqElement {
        ZqElement {
            x: u.x + v.x,
            y: u.y + v.y,
        }
    }

    pub fn neg(&self, u: ZqElement) -> ZqElement {
        ZqElement { x: -u.x, y: -u.y }
    }

    /// Uses `q^2 = -b q - c`.
    pub fn mul(&self, u: ZqElement, v: ZqElement) -> ZqElement {
        let (b, c) = (self.b as i128, self.c as i128);
        let yy = u.y * v.y;
        ZqElement {
            x: u.x * v.x - c * yy,
            y: u.x * v.y + u.y * v.x - b * yy,
        }
    }

    /// `q^e`; `q^{-1} = -c (q + b)`.
    pub fn power(&self, e: i64) -> ZqElement {
        let (b, c) = (self.b as i128, self.c as i128);
        let base = if e >= 0 {
            ZqElement { x: 0, y: 1 }
        } else {
            ZqElement { x: -c * b, y: -c }
        };
        let mut out = self.one();
        for _ in 0..e.unsigned_abs() {
            out = self.mul(out, base);
        }
        out
    }

    /// `prod (lambda - q^{e_i})` with coefficients in `Z[q]`, constant first.
    pub fn spectrum_polynomial(&self, exponents: &[i64]) -> Vec<ZqElement> {
        let mut poly = vec![self.one()];
        for &e in exponents {
            let root = self.neg(self.power(e));
            let mut next = vec![self.integer(0); poly.len() + 1];
            for (i, coef) in poly.iter().enumerate() {
                next[i + 1] = self.add(next[i + 1], *coef);
                next[i] = self.add(next[i], self.mul(*coef, root));
            }
            poly = next;
        }
        poly
    }
}

/// The integer polynomial `(-1)^d prod (lambda - q^{e_i})` if it is GL(Z).
pub fn glz_spectrum_polynomial(exponents: &[i64], unit: &QuadraticUnit) -> Option<IntPolynomial> {
    let coeffs = unit.spectrum_polynomial(exponents);
    if coeffs.iter().any(|z| z.y != 0) {
        return None;
    }
    let sign = if exponents.len() % 2 == 0 { 1 } else { -1 };
    let ints: Option<Vec<i64>> = coeffs.iter().map(|z| i64::try_from(sign * z.x).ok()).collect();
    let p = IntPolynomial::from_i64(&ints?);
    is_glz(&p).then_some(p)
}

pub fn glz_spectrum_check(exponents: &[i64], unit: &QuadraticUnit) -> bool {
    glz_spectrum_polynomial(exponents, unit).is_some()
}

/// Spectral predicates on a selection of `m` labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralPredicates {
    /// All `2m` label exponents are distinct.
    pub distinct: bool,
    /// Exactly one selected exponent equals 1.
    pub one_q: bool,
    /// Number of selected zero exponents is 1 for even `n = m + 2`, else 0.
    pub unit_count: bool,
    /// Selected exponents other than 0 and 1 pair off as `{e, -e}`.
    pub paired: bool,
}

impl SpectralPredicates {
    pub fn all(&self) -> bool {
        self.distinct && self.one_q && self.unit_count && self.paired
    }
}

pub fn spectral_predicates(inst: &SpectralInstance, selection: &Selector) -> Result<SpectralPredicates> {
    if selection.m != inst.m {
        return Err(Error::OutOfRange {
            name: "selection",
            detail: format!("selection for m = {}, instance has m = {}", selection.m, inst.m),
        });
    }
    let mut all = inst.all_exponents();
    all.sort_unstable();
    let distinct = all.windows(2).all(|w| w[0] != w[1]);
    let chosen: Vec<i64> = selection
        .elements()
        .into_iter()
        .map(|a| exponent_of(a, inst.m, inst.k))
        .collect::<Result<_>>()?;
    let ones = chosen.iter().filter(|&&e| e == 1).count();
    let zeros = chosen.iter().filter(|&&e| e == 0).count();
    let want_zeros = if (inst.m + 2) % 2 == 0 { 1 } else { 0 };
    let mut rest: Vec<i64> = chosen.iter().copied().filter(|&e| e != 0 && e != 1).collect();
    let mut neg: Vec<i64> = rest.iter().map(|e| -e).collect();
    rest.sort_unstable();
    neg.sort_unstable();
    Ok(SpectralPredicates {
        distinct,
        one_q: ones == 1,
        unit_count: zeros == want_zeros,
        paired: rest == neg,
    })
}

/// Per-instance outcome of the replay.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceReplay {
    pub m: u32,
    pub k: i64,
    /// Number of candidate selections (one label from each pair `{a, 2m+1-a}`).
    pub candidates: u64,
    /// Candidates meeting the spectral predicates together with (c) and (e).
    pub spectral_hits: u64,
    /// Result size of the selector search.
    pub search_hits: u64,
    /// Candidates where the spectral predicates and conditions (a), (b), (d) disagree.
    pub translation_mismatches: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub instances: Vec<InstanceReplay>,
    pub total_hits: u64,
    pub consistent: bool,
}

impl ReplayReport {
    pub fn contradiction_holds(&self) -> bool {
        self.consistent && self.total_hits == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KMode {
    /// `k` in `{0, -1}`.
    ProofRange,
    /// `|k| <= m - 1`.
    Full,
}

impl KMode {
    pub fn ks(&self, m: u32) -> Vec<i64> {
        match self {
            KMode::ProofRange => vec![-1, 0],
            KMode::Full => (-(m as i64 - 1)..=m as i64 - 1).collect(),
        }
    }
}

fn replay_instance(inst: SpectralInstance) -> Result<InstanceReplay> {
    let sel = inst.instance();
    let (_, a1) = anchors(inst.m, inst.k);
    let candidates = 1u64 << inst.m;
    let mut spectral_hits = 0;
    let mut mismatches = 0;
    for i in 0..candidates {
        let s = Selector::from_index(inst.m, i);
        let p = spectral_predicates(&inst, &s)?;
        let a = selectors::condition_a(&s, sel);
        let b = selectors::condition_b(&s, sel);
        let d = selectors::condition_d(&s, sel);
        // one_q + paired translate (a) + (d); unit_count translates (b)
        let translated = (p.one_q && p.paired) == (a && d) && p.unit_count == b && s.contains(a1) == p.one_q;
        if !translated || !p.distinct {
            mismatches += 1;
        }
        if p.all() && condition_c(&s, sel) && condition_e(&s, sel) {
            spectral_hits += 1;
        }
    }
    let search_hits = selectors::exhaustive_search(sel)?.len() as u64;
    Ok(InstanceReplay {
        m: inst.m,
        k: inst.k,
        candidates,
        spectral_hits,
        search_hits,
        translation_mismatches: mismatches,
    })
}

/// Translates the spectral predicates into the selector conditions on every
/// candidate and runs the selector search on each `(m, k)`.
pub fn contradiction_replay(m_min: u32, m_max: u32, mode: KMode) -> Result<ReplayReport> {
    let pairs: Vec<SpectralInstance> = (m_min..=m_max)
        .flat_map(|m| mode.ks(m).into_iter().map(move |k| SpectralInstance { m, k }))
        .collect();
    for p in &pairs {
        Instance::new(p.m, p.k)?;
    }
    let instances: Vec<InstanceReplay> = pairs.into_par_iter().map(replay_instance).collect::<Result<_>>()?;
    let total_hits = instances.iter().map(|r| r.spectral_hits + r.search_hits).sum();
    let consistent = instances
        .iter()
        .all(|r| r.translation_mismatches == 0 && r.spectral_hits == r.search_hits);
    Ok(ReplayReport {
        instances,
        total_hits,
        consistent,
    })
}
