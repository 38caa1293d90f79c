//! Exhaustive search for subsets of `{1, ..., 2m}` obeying conditions (a)-(e).
//!
//! With `E(a) = m - (-1)^a k - a` and `Phi(a) = 2m - 2(-1)^a k - a`, no subset
//! satisfies all five conditions for any `m >= 2` and integer `k`. Condition
//! (c) makes the subset a selector for the pairs `{a, 2m + 1 - a}`, so the
//! search runs over `2^m` bitmasks rather than `2^{2m}` subsets.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `m` representable by the 64-bit subset masks.
pub const MAX_M: u32 = 32;

pub const DEFAULT_M_BOUND: u32 = 20;

/// Bound for searches that drop condition (c) and scan all `2^{2m}` subsets.
pub const WIDE_M_BOUND: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Instance {
    pub m: u32,
    pub k: i64,
}

impl Instance {
    pub fn new(m: u32, k: i64) -> Result<Self> {
        if !(2..=MAX_M).contains(&m) {
            return Err(Error::OutOfRange {
                name: "m",
                detail: format!("need 2 <= m <= {MAX_M}, got {m}"),
            });
        }
        Ok(Self { m, k })
    }

    pub fn e(&self, a: i64) -> i64 {
        eval_e(a, self.m, self.k)
    }

    pub fn phi(&self, a: i64) -> i64 {
        eval_phi(a, self.m, self.k)
    }
}

fn parity_sign(a: i64) -> i64 {
    if a.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

pub fn eval_e(a: i64, m: u32, k: i64) -> i64 {
    m as i64 - parity_sign(a) * k - a
}

pub fn eval_phi(a: i64, m: u32, k: i64) -> i64 {
    2 * m as i64 - 2 * parity_sign(a) * k - a
}

pub fn e_inverse(b: i64, m: u32, k: i64) -> i64 {
    m as i64 - parity_sign(m as i64 + k + b) * k - b
}

/// `(a_0, a_1) = (E^{-1}(0), E^{-1}(1))`.
pub fn anchors(m: u32, k: i64) -> (i64, i64) {
    let s = parity_sign(m as i64 + k);
    (m as i64 - s * k, m as i64 + s * k - 1)
}

/// Subset of `{1, ..., 2m}`; bit `a - 1` marks element `a`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Selector {
    pub m: u32,
    pub bits: u64,
}

impl Selector {
    pub fn from_elements(m: u32, elements: &[i64]) -> Result<Self> {
        let mut bits = 0u64;
        for &a in elements {
            if a < 1 || a > 2 * m as i64 {
                return Err(Error::OutOfRange {
                    name: "selector element",
                    detail: format!("{a} is outside 1..={}", 2 * m),
                });
            }
            bits |= 1 << (a - 1);
        }
        Ok(Self { m, bits })
    }

    /// Selector built from an `m`-bit index: bit `j - 1` set picks `j`,
    /// clear picks `2m + 1 - j`.
    pub fn from_index(m: u32, index: u64) -> Self {
        let mut bits = 0u64;
        for j in 1..=m as u64 {
            let a = if index >> (j - 1) & 1 == 1 { j } else { 2 * m as u64 + 1 - j };
            bits |= 1 << (a - 1);
        }
        Self { m, bits }
    }

    pub fn contains(&self, a: i64) -> bool {
        a >= 1 && a <= 2 * self.m as i64 && self.bits >> (a - 1) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn elements(&self) -> Vec<i64> {
        (1..=2 * self.m as i64).filter(|&a| self.contains(a)).collect()
    }
}

impl fmt::Debug for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Selector{:?}", self.elements())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    A,
    B,
    C,
    D,
    E,
}

impl Condition {
    pub const ALL: [Condition; 5] = [Self::A, Self::B, Self::C, Self::D, Self::E];
}

impl std::str::FromStr for Condition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Self::A),
            "b" => Ok(Self::B),
            "c" => Ok(Self::C),
            "d" => Ok(Self::D),
            "e" => Ok(Self::E),
            other => Err(Error::OutOfRange {
                name: "condition",
                detail: format!("expected one of a..e, got {other:?}"),
            }),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Self::A => "a",
            Self::B => "b",
            Self::C => "c",
            Self::D => "d",
            Self::E => "e",
        };
        f.write_str(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conditions {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub d: bool,
    pub e: bool,
}

impl Conditions {
    pub fn get(&self, c: Condition) -> bool {
        match c {
            Condition::A => self.a,
            Condition::B => self.b,
            Condition::C => self.c,
            Condition::D => self.d,
            Condition::E => self.e,
        }
    }

    pub fn all(&self) -> bool {
        self.a && self.b && self.c && self.d && self.e
    }

    pub fn all_except(&self, drop: Condition) -> bool {
        Condition::ALL.iter().filter(|&&c| c != drop).all(|&c| self.get(c))
    }
}

pub fn condition_a(s: &Selector, inst: Instance) -> bool {
    let (_, a1) = anchors(inst.m, inst.k);
    s.contains(a1) && !s.contains(inst.phi(a1))
}

pub fn condition_b(s: &Selector, inst: Instance) -> bool {
    let (a0, _) = anchors(inst.m, inst.k);
    s.contains(a0) == (inst.m % 2 == 0)
}

pub fn condition_c(s: &Selector, inst: Instance) -> bool {
    let m = inst.m as i64;
    (1..=m).all(|a| s.contains(a) != s.contains(2 * m + 1 - a))
}

pub fn condition_d(s: &Selector, inst: Instance) -> bool {
    let (_, a1) = anchors(inst.m, inst.k);
    let elements = s.elements();
    elements
        .iter()
        .filter(|&&a| a != a1)
        .all(|&a| elements.iter().any(|&b| inst.e(b) == -inst.e(a)))
}

pub fn condition_e(s: &Selector, inst: Instance) -> bool {
    let mut count = 0;
    for j in 1..=inst.m as i64 {
        count += s.contains(2 * j - 1) as i64 + s.contains(2 * j) as i64;
        if count > j {
            return false;
        }
    }
    true
}

pub fn conditions(s: &Selector, inst: Instance) -> Result<Conditions> {
    if s.m != inst.m {
        return Err(Error::OutOfRange {
            name: "selector",
            detail: format!("selector built for m = {}, instance has m = {}", s.m, inst.m),
        });
    }
    Ok(Conditions {
        a: condition_a(s, inst),
        b: condition_b(s, inst),
        c: condition_c(s, inst),
        d: condition_d(s, inst),
        e: condition_e(s, inst),
    })
}

fn check_bound(inst: Instance, bound: u32) -> Result<()> {
    if inst.m > bound {
        return Err(Error::OutOfRange {
            name: "m",
            detail: format!("m = {} exceeds the search bound {bound}", inst.m),
        });
    }
    Ok(())
}

// Number of high-order index bits used to split work across threads.
const SPLIT_BITS: u32 = 6;

/// Scans `[0, total)` in contiguous chunks in parallel, keeping indices whose
/// candidate passes `keep`. The output is sorted by index.
fn scan<F>(total: u64, candidate: impl Fn(u64) -> Selector + Sync, keep: F) -> Vec<Selector>
where
    F: Fn(&Selector) -> bool + Sync,
{
    let chunks = 1u64 << SPLIT_BITS.min(total.trailing_zeros());
    let width = total / chunks;
    let mut parts: Vec<(u64, Vec<Selector>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let found = (c * width..(c + 1) * width)
                .map(&candidate)
                .filter(|s| keep(s))
                .collect();
            (c, found)
        })
        .collect();
    parts.sort_by_key(|(c, _)| *c);
    let mut out: Vec<Selector> = parts.into_iter().flat_map(|(_, v)| v).collect();
    out.sort();
    out
}

/// All condition-(c) selectors satisfying (a), (b), (d) and (e).
pub fn exhaustive_search(inst: Instance) -> Result<Vec<Selector>> {
    exhaustive_search_bounded(inst, DEFAULT_M_BOUND)
}

pub fn exhaustive_search_bounded(inst: Instance, bound: u32) -> Result<Vec<Selector>> {
    check_bound(inst, bound)?;
    let m = inst.m;
    Ok(scan(1u64 << m, |i| Selector::from_index(m, i), |s| {
        condition_a(s, inst) && condition_b(s, inst) && condition_d(s, inst) && condition_e(s, inst)
    }))
}

/// Same search with one condition dropped. Dropping (c) widens the scan to
/// every subset of `{1, ..., 2m}` and is limited to `m <= WIDE_M_BOUND`.
pub fn relaxed_search(inst: Instance, drop: Condition) -> Result<Vec<Selector>> {
    let m = inst.m;
    let keep = |s: &Selector| {
        Condition::ALL.iter().filter(|&&c| c != drop).all(|&c| match c {
            Condition::A => condition_a(s, inst),
            Condition::B => condition_b(s, inst),
            Condition::C => condition_c(s, inst),
            Condition::D => condition_d(s, inst),
            Condition::E => condition_e(s, inst),
        })
    };
    if drop == Condition::C {
        check_bound(inst, WIDE_M_BOUND)?;
        Ok(scan(1u64 << (2 * m), |bits| Selector { m, bits }, keep))
    } else {
        check_bound(inst, DEFAULT_M_BOUND)?;
        Ok(scan(1u64 << m, |i| Selector::from_index(m, i), keep))
    }
}

/// `(R_+, R_-)`: the maximal even and odd subintervals of `{1, ..., 2m}`
/// symmetric about `m - k` and `m + k` respectively.
pub fn reflection_ranges(m: u32, k: i64) -> (Vec<i64>, Vec<i64>) {
    let m = m as i64;
    let (plus, minus) = if k >= 0 {
        ((2, 2 * m - 2 * k - 2), (2 * k + 1, 2 * m - 1))
    } else {
        ((-2 * k, 2 * m), (1, 2 * m + 2 * k - 1))
    };
    let even = (plus.0..=plus.1).filter(|a| a % 2 == 0).collect();
    let odd = (minus.0..=minus.1).filter(|a| a.rem_euclid(2) == 1).collect();
    (even, odd)
}

/// Checks of the intermediate claims on every survivor of (a)-(d).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimsReport {
    pub instance: Instance,
    pub survivors: Vec<Vec<i64>>,
    /// Every survivor has exactly `m` elements.
    pub size_is_m: bool,
    /// `Phi(S \ {a_1}) = S \ {a_1}` for every survivor.
    pub phi_invariant: bool,
    /// Even and odd parts of `S \ {a_1}` lie in `R_+` and `R_-`.
    pub within_ranges: bool,
    /// Survivors exist only if `|k| <= m - 1`.
    pub k_bounded: bool,
    /// Survivors exist only if `k` is 0 or -1.
    pub k_in_zero_minus_one: bool,
}

impl ClaimsReport {
    pub fn all_hold(&self) -> bool {
        self.size_is_m && self.phi_invariant && self.within_ranges && self.k_bounded && self.k_in_zero_minus_one
    }
}

pub fn intermediate_claims(inst: Instance) -> Result<ClaimsReport> {
    let survivors = relaxed_search(inst, Condition::E)?;
    let (_, a1) = anchors(inst.m, inst.k);
    let (r_plus, r_minus) = reflection_ranges(inst.m, inst.k);
    let mut size_is_m = true;
    let mut phi_invariant = true;
    let mut within_ranges = true;
    for s in &survivors {
        size_is_m &= s.len() == inst.m as usize;
        let rest: Vec<i64> = s.elements().into_iter().filter(|&a| a != a1).collect();
        let mut image: Vec<i64> = rest.iter().map(|&a| inst.phi(a)).collect();
        image.sort();
        phi_invariant &= image == rest;
        within_ranges &= rest.iter().all(|a| {
            if a % 2 == 0 {
                r_plus.contains(a)
            } else {
                r_minus.contains(a)
            }
        });
    }
    let any = !survivors.is_empty();
    Ok(ClaimsReport {
        instance: inst,
        survivors: survivors.iter().map(Selector::elements).collect(),
        size_is_m,
        phi_invariant,
        within_ranges,
        k_bounded: !any || inst.k.abs() < inst.m as i64,
        k_in_zero_minus_one: !any || inst.k == 0 || inst.k == -1,
    })
}
