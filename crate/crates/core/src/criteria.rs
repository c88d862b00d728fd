//! Finite-horizon semi-decisions of the weight characterizations of
//! hypercyclicity, supercyclicity and `Γ`-supercyclicity, plus witness
//! extraction from a concrete orbit.
//!
//! A `Holds` verdict exhibits witnesses and is a proof of the finite
//! statement it checks. `RefutedOnHorizon` only says that no witness was
//! found below the horizon; it is not a disproof of the asymptotic claim.
//!
//! Bilateral scans work with `ln ω` so that horizons far past the range of
//! `f64` weights stay meaningful.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shift::iterate;
use crate::space::{Mode, SpaceCtx, WeightSeq};
use crate::vector::SparseVec;

/// One modulus interval of `Γ`. `lo = 0` means the interval is open at zero;
/// `hi = None` means unbounded above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaInterval {
    pub lo: f64,
    pub hi: Option<f64>,
}

impl GammaInterval {
    fn ln_bounds(&self) -> (f64, f64) {
        let lo = if self.lo == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.lo.ln()
        };
        (lo, self.hi.map_or(f64::INFINITY, f64::ln))
    }

    fn contains(&self, m: f64) -> bool {
        m > 0.0 && m >= self.lo && self.hi.map_or(true, |h| m <= h)
    }
}

/// The set of admissible scalar moduli `{|λ| : λ ∈ Γ \ {0}}`.
///
/// Phases never enter the criteria or the constructions, so only moduli are
/// stored. Intervals are kept sorted and merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, Option<f64>)>", into = "Vec<(f64, Option<f64>)>")]
pub struct GammaSet {
    intervals: Vec<GammaInterval>,
}

impl TryFrom<Vec<(f64, Option<f64>)>> for GammaSet {
    type Error = Error;

    fn try_from(raw: Vec<(f64, Option<f64>)>) -> Result<Self> {
        GammaSet::new(raw.into_iter().map(|(lo, hi)| GammaInterval { lo, hi }).collect())
    }
}

impl From<GammaSet> for Vec<(f64, Option<f64>)> {
    fn from(g: GammaSet) -> Self {
        g.intervals.iter().map(|i| (i.lo, i.hi)).collect()
    }
}

impl GammaSet {
    pub fn new(mut intervals: Vec<GammaInterval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::EmptyGamma);
        }
        for iv in &intervals {
            let hi_ok = iv.hi.map_or(true, |h| h.is_finite() && h > 0.0 && h >= iv.lo);
            if !(iv.lo.is_finite() && iv.lo >= 0.0 && hi_ok) {
                return Err(Error::InvalidParameter(format!(
                    "bad gamma interval [{}, {:?}]",
                    iv.lo, iv.hi
                )));
            }
        }
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<GammaInterval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match merged.last_mut() {
                Some(last) if last.hi.map_or(true, |h| iv.lo <= h) => {
                    last.hi = match (last.hi, iv.hi) {
                        (Some(a), Some(b)) => Some(a.max(b)),
                        _ => None,
                    };
                }
                _ => merged.push(iv),
            }
        }
        Ok(GammaSet { intervals: merged })
    }

    /// `Γ = {1}`: hypercyclicity.
    pub fn unit() -> Self {
        GammaSet::closed(1.0, 1.0).expect("valid interval")
    }

    /// `Γ = ℂ`: supercyclicity.
    pub fn positive() -> Self {
        GammaSet {
            intervals: vec![GammaInterval { lo: 0.0, hi: None }],
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        GammaSet::new(vec![GammaInterval { lo, hi: Some(hi) }])
    }

    pub fn intervals(&self) -> &[GammaInterval] {
        &self.intervals
    }

    pub fn contains(&self, m: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(m))
    }

    /// `(inf, sup)` of the moduli; `sup = None` when unbounded.
    pub fn bounds(&self) -> (f64, Option<f64>) {
        let lo = self.intervals[0].lo;
        let hi = self.intervals.last().and_then(|iv| iv.hi);
        (lo, hi)
    }

    /// Minimize the quasi-convex `ln m ↦ max(la − ln m, ln m + lb)` over the
    /// set. Returns `(ln value, ln m)`; ties go to the smaller modulus.
    fn best_log_modulus(&self, la: f64, lb: f64) -> (f64, f64) {
        let target = 0.5 * (la - lb);
        let mut best = (f64::INFINITY, f64::INFINITY);
        for iv in &self.intervals {
            let (lo, hi) = iv.ln_bounds();
            let lm = target.clamp(lo, hi);
            let v = (la - lm).max(lm + lb);
            if v < best.0 || (v == best.0 && lm < best.1) {
                best = (v, lm);
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Holds,
    RefutedOnHorizon,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub q: i64,
    pub n: u64,
    #[serde(rename = "lambda")]
    pub lambda_mod: Option<f64>,
    pub achieved: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub horizon: u64,
    pub epsilon: f64,
    pub witnesses: Vec<Witness>,
    /// Shifts `q` for which no witness was found.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failing_q: Vec<i64>,
    /// Description of a heuristic decision rule, when one was used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    /// Witness `(q, n)` pairs in scan order.
    pub fn witness_pairs(&self) -> Vec<(i64, u64)> {
        self.witnesses.iter().map(|w| (w.q, w.n)).collect()
    }
}

fn check_epsilon(eps: f64) -> Result<f64> {
    if eps.is_finite() && eps > 0.0 {
        Ok(eps.ln())
    } else {
        Err(Error::InvalidParameter(format!(
            "threshold must be positive, got {eps}"
        )))
    }
}

/// Unilateral `B` is hypercyclic iff `liminf ω_n = 0`.
pub fn check_unilateral_hypercyclic(w: &WeightSeq, horizon: u64, eps: f64) -> Result<Verdict> {
    Mode::Unilateral.expect(w.mode())?;
    let ln_eps = check_epsilon(eps)?;
    let hit = (1..=horizon).find_map(|n| {
        let l = w.ln_weight_at(n as i64).ok()?;
        (l < ln_eps).then(|| Witness {
            q: 0,
            n,
            lambda_mod: None,
            achieved: l.exp(),
        })
    });
    let status = if hit.is_some() {
        Status::Holds
    } else {
        Status::RefutedOnHorizon
    };
    Ok(Verdict {
        status,
        horizon,
        epsilon: eps,
        witnesses: hit.into_iter().collect(),
        failing_q: Vec::new(),
        rule: None,
    })
}

/// Shared scan over `q ∈ [−qmax, qmax]`, `n ∈ [1, horizon]`. `quantity`
/// maps `(ln ω_{n+q}, ln ω_{−n+q})` to `(ln value, ln modulus)`.
fn scan_bilateral<F>(w: &WeightSeq, qmax: u64, horizon: u64, eps: f64, quantity: F) -> Result<Verdict>
where
    F: Fn(f64, f64) -> (f64, Option<f64>) + Sync,
{
    Mode::Bilateral.expect(w.mode())?;
    let ln_eps = check_epsilon(eps)?;
    let qmax = qmax.min(i64::MAX as u64 / 4) as i64;
    let horizon_i = horizon.min(i64::MAX as u64 / 4) as i64;

    let per_q: Vec<(i64, Option<Witness>)> = (-qmax..=qmax)
        .into_par_iter()
        .map(|q| {
            let found = (1..=horizon_i).find_map(|n| {
                let la = w.ln_weight_at(n + q).ok()?;
                let lb = w.ln_weight_at(-n + q).ok()?;
                let (lv, lm) = quantity(la, lb);
                (lv < ln_eps).then(|| Witness {
                    q,
                    n: n as u64,
                    lambda_mod: lm.map(f64::exp),
                    achieved: lv.exp(),
                })
            });
            (q, found)
        })
        .collect();

    let mut witnesses = Vec::new();
    let mut failing_q = Vec::new();
    for (q, found) in per_q {
        match found {
            Some(wit) => witnesses.push(wit),
            None => failing_q.push(q),
        }
    }
    let status = if failing_q.is_empty() {
        Status::Holds
    } else {
        Status::RefutedOnHorizon
    };
    Ok(Verdict {
        status,
        horizon,
        epsilon: eps,
        witnesses,
        failing_q,
        rule: None,
    })
}

/// `liminf max{ω_{n+q}, ω_{−n+q}} = 0` for every scanned `q`.
pub fn check_bilateral_hypercyclic(w: &WeightSeq, qmax: u64, horizon: u64, eps: f64) -> Result<Verdict> {
    scan_bilateral(w, qmax, horizon, eps, |la, lb| (la.max(lb), None))
}

/// `liminf ω_{n+q} ω_{−n+q} = 0` for every scanned `q`.
pub fn check_bilateral_supercyclic(w: &WeightSeq, qmax: u64, horizon: u64, eps: f64) -> Result<Verdict> {
    scan_bilateral(w, qmax, horizon, eps, |la, lb| (la + lb, None))
}

/// `liminf_{m ∈ Γ} max{ω_{n+q}/m, m·ω_{−n+q}} = 0` for every scanned `q`;
/// the modulus is the minimizer `√(ω_{n+q}/ω_{−n+q})` moved into `Γ`.
pub fn check_gamma_supercyclic(
    w: &WeightSeq,
    gamma: &GammaSet,
    qmax: u64,
    horizon: u64,
    eps: f64,
) -> Result<Verdict> {
    if gamma.intervals.is_empty() {
        return Err(Error::EmptyGamma);
    }
    scan_bilateral(w, qmax, horizon, eps, |la, lb| {
        let (v, lm) = gamma.best_log_modulus(la, lb);
        (v, Some(lm))
    })
}

/// Decreasing tolerance levels `δ_i = ratio^i · δ_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaSchedule {
    /// Defaults to `min{1, ω_{k₀}|y_{k₀}|/2}` with `k₀` the coordinate
    /// maximizing `|y_k| ω_k`.
    #[serde(default)]
    pub delta0: Option<f64>,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_ratio() -> f64 {
    0.5
}

fn default_levels() -> usize {
    64
}

impl Default for DeltaSchedule {
    fn default() -> Self {
        DeltaSchedule {
            delta0: None,
            ratio: default_ratio(),
            levels: default_levels(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitWitness {
    pub n: u64,
    pub lambda: f64,
    pub error: f64,
    /// Schedule level that this witness met.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub k0: i64,
    pub delta0: f64,
    pub witnesses: Vec<OrbitWitness>,
}

/// Coordinate maximizing `|y_k| ω_k`, ties to the smaller index.
pub(crate) fn dominant_coordinate(y: &SparseVec, ctx: &SpaceCtx) -> Result<(i64, f64)> {
    let mut best: Option<(i64, f64)> = None;
    for (k, c) in y.iter() {
        let v = ctx.weight.scaled(k, c.norm())?;
        if best.map_or(true, |(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("target vector must be non-zero".into()))
}

/// Scan `n = 1..=horizon` for `λ ∈ Γ` with `‖λBⁿx − y‖ < δ_i`, advancing the
/// schedule after each hit.
pub fn extract_witnesses(
    x: &SparseVec,
    y: &SparseVec,
    ctx: &SpaceCtx,
    gamma: &GammaSet,
    horizon: u64,
    schedule: &DeltaSchedule,
) -> Result<WitnessReport> {
    ctx.mode().expect(x.mode())?;
    ctx.mode().expect(y.mode())?;
    let (k0, scale) = dominant_coordinate(y, ctx)?;
    let delta0 = schedule.delta0.unwrap_or_else(|| (scale / 2.0).min(1.0));
    if !(delta0 > 0.0 && delta0.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta0 must be positive, got {delta0}")));
    }
    if !(schedule.ratio > 0.0 && schedule.ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "schedule ratio must lie in (0, 1), got {}",
            schedule.ratio
        )));
    }
    let y_norm = ctx.norm(y)?;

    let mut witnesses = Vec::new();
    let mut delta = delta0;
    for n in 1..=horizon {
        if witnesses.len() >= schedule.levels {
            break;
        }
        let v = iterate(x, n);
        if v.is_zero() {
            continue;
        }
        let lambda = best_modulus(&v, y, ctx, gamma, y_norm)?;
        let err = ctx.norm(&v.scale_real(lambda).try_sub(y)?)?;
        if err < delta {
            witnesses.push(OrbitWitness {
                n,
                lambda,
                error: err,
                delta,
            });
            delta *= schedule.ratio;
        }
    }
    if witnesses.is_empty() {
        return Err(Error::NoWitnessFound { delta0, horizon });
    }
    Ok(WitnessReport {
        k0,
        delta0,
        witnesses,
    })
}

/// Ternary search of the convex `t ↦ ‖t v − y‖` on each interval of `Γ`.
fn best_modulus(v: &SparseVec, y: &SparseVec, ctx: &SpaceCtx, gamma: &GammaSet, y_norm: f64) -> Result<f64> {
    let w = &ctx.weight;
    let p = ctx.p;
    let mut rows = Vec::new();
    let mut idx: Vec<i64> = v.iter().map(|(k, _)| k).chain(y.iter().map(|(k, _)| k)).collect();
    idx.sort_unstable();
    idx.dedup();
    for k in idx {
        // scale factor ω_k applied through the magnitude
        let wk = w.scaled(k, 1.0)?;
        rows.push((wk, v.get(k), y.get(k)));
    }
    let g = |t: f64| -> f64 {
        let terms: Vec<f64> = rows.iter().map(|(wk, vk, yk)| (vk * t - yk).norm() * wk).collect();
        crate::space::p_norm(&terms, p)
    };
    let v_norm = ctx.norm(v)?;
    // beyond this point g(t) > g(0) = ‖y‖
    let cap = if v_norm > 0.0 { 2.0 * y_norm / v_norm } else { 1.0 };

    let mut best = (f64::INFINITY, f64::INFINITY);
    for iv in gamma.intervals() {
        let lo = iv.lo;
        let hi = iv.hi.unwrap_or(f64::INFINITY).min(cap.max(lo));
        let (mut a, mut b) = (lo, hi);
        while b - a > 1e-10 * b.max(f64::MIN_POSITIVE) {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if g(m1) <= g(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        let mut t = 0.5 * (a + b);
        if t <= 0.0 {
            // open at zero; stay strictly inside
            t = b.max(f64::MIN_POSITIVE);
        }
        for cand in [t, lo, hi] {
            if cand > 0.0 && cand.is_finite() && iv.contains(cand) {
                let val = g(cand);
                if val < best.0 || (val == best.0 && cand < best.1) {
                    best = (val, cand);
                }
            }
        }
    }
    if !best.1.is_finite() {
        return Err(Error::EmptyGamma);
    }
    Ok(best.1)
}
