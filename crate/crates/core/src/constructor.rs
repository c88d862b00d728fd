//! Inductive construction of `z = Σ_j S^{m_j} y_j / μ_j` from a witness
//! schedule, with a per-target certificate for `‖μ_j B^{m_j} z − y_j‖`.
//!
//! Shift exponents roughly grow with the schedule, so every selection test
//! runs on logarithms: a condition `Q < 2^{-j}` is checked as
//! `ln Q < −j ln 2`.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::criteria::WitnessReport;
use crate::error::{Error, Result};
use crate::shift::{iterate, iterate_forward};
use crate::space::{weighted_norm, Mode, WeightSeq};
use crate::vector::SparseVec;

/// Witness data `(n_k, |λ_k|)` and the anchor coordinate `k₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleDoc", into = "ScheduleDoc")]
pub struct WitnessSchedule {
    k0: i64,
    pairs: Vec<(u64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleDoc {
    k0: i64,
    pairs: Vec<(u64, f64)>,
}

impl TryFrom<ScheduleDoc> for WitnessSchedule {
    type Error = Error;

    fn try_from(d: ScheduleDoc) -> Result<Self> {
        WitnessSchedule::new(d.k0, d.pairs)
    }
}

impl From<WitnessSchedule> for ScheduleDoc {
    fn from(s: WitnessSchedule) -> Self {
        ScheduleDoc {
            k0: s.k0,
            pairs: s.pairs,
        }
    }
}

impl WitnessSchedule {
    pub fn new(k0: i64, pairs: Vec<(u64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidSchedule("schedule is empty".into()));
        }
        for (i, &(n, lambda)) in pairs.iter().enumerate() {
            if n == 0 || n > i64::MAX as u64 / 4 {
                return Err(Error::InvalidSchedule(format!("n at position {i} out of range")));
            }
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(Error::InvalidSchedule(format!(
                    "modulus at position {i} must be positive, got {lambda}"
                )));
            }
            if i > 0 && pairs[i - 1].0 >= n {
                return Err(Error::InvalidSchedule(format!(
                    "n must be strictly increasing (position {i})"
                )));
            }
        }
        if k0.unsigned_abs() > i64::MAX as u64 / 8 {
            return Err(Error::InvalidSchedule("k0 out of range".into()));
        }
        Ok(WitnessSchedule { k0, pairs })
    }

    /// `n_k = start + step·k`, `k = 0..count`, `λ_k = f(n_k)`.
    pub fn arithmetic(k0: i64, start: u64, step: u64, count: usize, lambda: impl Fn(u64) -> f64) -> Result<Self> {
        let pairs = (0..count as u64)
            .map(|k| {
                let n = start + step * k;
                (n, lambda(n))
            })
            .collect();
        WitnessSchedule::new(k0, pairs)
    }

    pub fn from_report(report: &WitnessReport) -> Result<Self> {
        WitnessSchedule::new(
            report.k0,
            report.witnesses.iter().map(|w| (w.n, w.lambda)).collect(),
        )
    }

    pub fn k0(&self) -> i64 {
        self.k0
    }

    pub fn pairs(&self) -> &[(u64, f64)] {
        &self.pairs
    }

    fn n(&self, k: usize) -> i64 {
        self.pairs[k].0 as i64
    }

    fn ln_lambda(&self, k: usize) -> f64 {
        self.pairs[k].1.ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValue {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Diagnostic evaluation of the two limit displays a schedule must satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCheck {
    /// `ω_{k₀+n_i}/|λ_i|` for every position `i`.
    pub first: Vec<f64>,
    /// `(|λ_j|/|λ_i|) ω_{−n_j+n_i+k₀}` for `i < j` inside the leading window.
    pub cross: Vec<CrossValue>,
    /// Every `first` value in the second half of the schedule is below tol.
    pub first_tail_below: bool,
    /// For each `i` in the first half of the window, every cross value with
    /// `j` in the last quarter of the window is below tol.
    pub cross_tail_below: bool,
    pub tol: f64,
    pub warnings: Vec<String>,
}

impl WitnessCheck {
    pub fn passes(&self) -> bool {
        self.first_tail_below && self.cross_tail_below
    }
}

/// Size of the leading window on which cross values are tabulated.
pub const CROSS_WINDOW: usize = 32;

pub fn validate_witnesses(ws: &WitnessSchedule, w: &WeightSeq, tol: f64) -> Result<WitnessCheck> {
    Mode::Bilateral.expect(w.mode())?;
    let k = ws.pairs.len();
    let mut first = Vec::with_capacity(k);
    for i in 0..k {
        first.push(scaled_ratio(w, ws.k0 + ws.n(i), 1.0, ws.pairs[i].1)?);
    }
    let win = k.min(CROSS_WINDOW);
    let mut cross = Vec::new();
    for i in 0..win {
        for j in i + 1..win {
            let value = scaled_ratio(w, -ws.n(j) + ws.n(i) + ws.k0, ws.pairs[j].1, ws.pairs[i].1)?;
            cross.push(CrossValue { i, j, value });
        }
    }
    let first_tail_below = first[k / 2..].iter().all(|v| *v < tol);
    let (head, tail_from) = (win / 2, win - win / 4);
    let cross_tail_below = cross
        .iter()
        .filter(|c| c.i < head.max(1) && c.j >= tail_from)
        .all(|c| c.value < tol);
    let mut warnings = Vec::new();
    if win < 4 {
        warnings.push(format!("schedule has {k} entries; cross tail test is vacuous"));
    }
    Ok(WitnessCheck {
        first,
        cross,
        first_tail_below,
        cross_tail_below,
        tol,
        warnings,
    })
}

/// `num · ω_n / den`, directly when every factor is a normal double, else
/// through logarithms.
fn scaled_ratio(w: &WeightSeq, n: i64, num: f64, den: f64) -> Result<f64> {
    if let Ok(v) = w.weight_at(n) {
        let r = num * v / den;
        if v.is_normal() && r.is_normal() {
            return Ok(r);
        }
    }
    Ok((num.ln() + w.ln_weight_at(n)? - den.ln()).exp())
}

/// `ln(e^a + e^b + …)` without overflow; `−∞` for an empty input.
fn log_sum_exp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

fn ln_k_constant(y: &SparseVec, w: &WeightSeq, p: f64, ln_b: f64) -> Result<f64> {
    let s = y.radius() as i64;
    let ln_norm = weighted_norm(w, y, p)?.ln();
    let mut terms = Vec::new();
    for k in w.mode().window(s as u64) {
        terms.push(p * (s - k) as f64 * ln_b - p * w.ln_weight_at(k)?);
    }
    Ok(ln_norm + log_sum_exp(terms) / p)
}

/// `K = ‖y‖ (Σ_{|k|≤s} ‖B‖^{p(s−k)} / ω_kᵖ)^{1/p}`, so that
/// `‖Sⁿy‖ ≤ K ω_{s+n}` for every `n ≥ 0`.
pub fn k_constant(y: &SparseVec, w: &WeightSeq, p: f64, b_norm: f64) -> Result<f64> {
    w.mode().expect(y.mode())?;
    if y.is_zero() {
        return Err(Error::InvalidTargets("target vector is zero".into()));
    }
    Ok(ln_k_constant(y, w, p, b_norm.ln())?.exp())
}

/// Finite list of non-zero targets `y_1, …, y_J`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSet {
    targets: Vec<SparseVec>,
}

impl TargetSet {
    pub fn new(targets: Vec<SparseVec>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidTargets("no targets".into()));
        }
        let mode = targets[0].mode();
        for (j, y) in targets.iter().enumerate() {
            if y.is_zero() {
                return Err(Error::InvalidTargets(format!("target {} is zero", j + 1)));
            }
            mode.expect(y.mode())?;
        }
        Ok(TargetSet { targets })
    }

    pub fn targets(&self) -> &[SparseVec] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// `s_j = max |index|` over the support of each target.
    pub fn supports(&self) -> Vec<u64> {
        self.targets.iter().map(SparseVec::radius).collect()
    }
}

/// Grid values of a given level: level 0 is `{1, −1}`, level `g ≥ 1` is
/// `±k/2^g` for odd `k ≤ 4^g`, in increasing `k` with `+` before `−`.
fn grid_level(g: u32) -> Vec<f64> {
    if g == 0 {
        return vec![1.0, -1.0];
    }
    let den = 2f64.powi(g as i32);
    let kmax = 4u64.saturating_pow(g);
    let mut out = Vec::new();
    let mut k = 1;
    while k <= kmax {
        out.push(k as f64 / den);
        out.push(-(k as f64) / den);
        k += 2;
    }
    out
}

/// Lexicographic successor of `ranks` in `[0, base)^len`; false after the last.
fn advance(ranks: &mut [usize], base: usize) -> bool {
    for pos in (0..ranks.len()).rev() {
        ranks[pos] += 1;
        if ranks[pos] < base {
            return true;
        }
        ranks[pos] = 0;
    }
    false
}

/// The first `J` vectors of a fixed enumeration of finitely supported
/// vectors with support in `[−max_support, max_support]` and coefficients
/// in the dyadic grid up to `max_level`.
///
/// Order: support radius, then grid level (the deepest level used), then the
/// sorted support index list lexicographically, then the tuple of coefficient
/// ranks lexicographically.
pub fn default_dense_targets(j: usize, mode: Mode, max_support: u64, max_level: u32) -> Result<TargetSet> {
    if j == 0 {
        return Err(Error::InvalidTargets("J must be at least 1".into()));
    }
    if max_support > 8 || max_level > 6 {
        return Err(Error::InvalidTargets(
            "max_support must be <= 8 and max_level <= 6".into(),
        ));
    }
    let mut out: Vec<SparseVec> = Vec::with_capacity(j);
    let mut values: Vec<(f64, u32)> = Vec::new();
    for g in 0..=max_level {
        values.extend(grid_level(g).into_iter().map(|v| (v, g)));
    }
    'radius: for r in 0..=max_support as i64 {
        let window: Vec<i64> = mode.window(r as u64).collect();
        let mut supports: Vec<Vec<i64>> = (1u64..(1u64 << window.len()))
            .map(|mask| {
                window
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, k)| *k)
                    .collect::<Vec<i64>>()
            })
            .filter(|s| s.iter().any(|k| k.abs() == r))
            .collect();
        supports.sort();
        for g in 0..=max_level {
            let usable = values.iter().take_while(|(_, lv)| *lv <= g).count();
            for support in &supports {
                let mut ranks = vec![0usize; support.len()];
                loop {
                    if ranks.iter().any(|&i| values[i].1 == g) {
                        let v = SparseVec::from_real(
                            mode,
                            support.iter().zip(&ranks).map(|(k, &i)| (*k, values[i].0)),
                        )?;
                        out.push(v);
                        if out.len() == j {
                            break 'radius;
                        }
                    }
                    if !advance(&mut ranks, usable) {
                        break;
                    }
                }
            }
        }
    }
    if out.len() < j {
        return Err(Error::InvalidTargets(format!(
            "only {} vectors exist with radius <= {max_support} and level <= {max_level}",
            out.len()
        )));
    }
    TargetSet::new(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertRow {
    /// 1-based target number.
    pub j: usize,
    /// Selected schedule position `k_j` (0-based).
    pub k_index: usize,
    /// `r_j` (0-based); absent for `j = 1`.
    pub r_index: Option<usize>,
    pub m: i64,
    pub mu: f64,
    pub measured_error: f64,
    #[serde(rename = "bound")]
    pub analytic_bound: f64,
    pub ln_k: f64,
    pub ln_c: Option<f64>,
    pub ln_l: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionCert {
    pub b_norm: f64,
    pub k0: i64,
    pub rows: Vec<CertRow>,
    pub z: SparseVec,
    pub warnings: Vec<String>,
}

/// `(j−1)/2^j + Σ_{l=j+1}^{J} 2^{−l}`.
pub fn analytic_bound(j: usize, total: usize) -> f64 {
    let tail: f64 = (j + 1..=total).map(|l| 2f64.powi(-(l as i32))).sum();
    (j as f64 - 1.0) * 2f64.powi(-(j as i32)) + tail
}

pub fn build_supercyclic(w: &WeightSeq, ws: &WitnessSchedule, targets: &TargetSet, p: f64) -> Result<ConstructionCert> {
    Mode::Bilateral.expect(w.mode())?;
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must satisfy 1 <= p < inf, got {p}")));
    }
    for y in targets.targets() {
        Mode::Bilateral.expect(y.mode())?;
    }
    let ys = targets.targets();
    let s: Vec<i64> = targets.supports().into_iter().map(|v| v as i64).collect();
    let max_s = s.iter().copied().max().unwrap_or(0) as u64;
    let k0 = ws.k0;
    let abs_k0 = k0.unsigned_abs() as i64;
    let max_n = ws.pairs.last().map_or(0, |x| x.0);
    let horizon = max_n + 2 * max_s + 2 * abs_k0 as u64 + 1;
    let b_norm = w.shift_norm_bound(horizon);
    if !(b_norm.is_finite() && b_norm > 0.0) {
        return Err(Error::UnboundedRatio { horizon });
    }
    let ln_b = b_norm.ln();

    let mut warnings = Vec::new();
    let mut chosen: Vec<(usize, i64, f64)> = Vec::new(); // (k_j, m_j, ln μ_j)
    let mut rows = Vec::new();
    let mut ln_norms = Vec::with_capacity(ys.len());
    for y in ys {
        ln_norms.push(weighted_norm(w, y, p)?.ln());
    }

    for (jj, y) in ys.iter().enumerate() {
        let j = jj + 1;
        let ln_thr = -(j as f64) * LN_2;
        let ln_k = ln_k_constant(y, w, p, ln_b)?;
        let s_j = s[jj];

        let (start, r_index, ln_c, ln_l) = if jj == 0 {
            let start = ws.pairs.iter().position(|&(n, _)| n as i64 > s_j - k0);
            let start = start.ok_or(Error::WitnessExhausted { target: j })?;
            (start, None, None, None)
        } else {
            let ln_c = chosen.iter().map(|c| c.1 as f64 * ln_b).fold(f64::NEG_INFINITY, f64::max) + ln_k;
            let reach = chosen
                .iter()
                .enumerate()
                .map(|(l, c)| c.1 + s[l] + s_j + 2 * abs_k0)
                .max()
                .expect("j > 1");
            let r = ws
                .pairs
                .iter()
                .position(|&(n, _)| n as i64 > reach)
                .ok_or(Error::WitnessExhausted { target: j })?;
            let n_r = ws.n(r);
            let mut ln_l = f64::NEG_INFINITY;
            for (l, c) in chosen.iter().enumerate() {
                let mut terms = Vec::new();
                for k in Mode::Bilateral.window(s[l] as u64) {
                    let e = n_r - s_j - c.1 + 2 * k0 - k;
                    if e < 0 {
                        warnings.push(format!(
                            "target {j}: negative exponent {e} in L (l = {}, k = {k})",
                            l + 1
                        ));
                    }
                    terms.push(p * e as f64 * ln_b - p * w.ln_weight_at(k)?);
                }
                ln_l = ln_l.max(ln_norms[l] + log_sum_exp(terms) / p);
            }
            let prev = chosen.last().expect("j > 1").0;
            (prev.max(r) + 1, Some(r), Some(ln_c), Some(ln_l))
        };

        let max_ln_mu = chosen.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
        let min_ln_mu = chosen.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
        let mut pick = None;
        for kk in start..ws.pairs.len() {
            let n = ws.n(kk);
            let ln_lam = ws.ln_lambda(kk);
            let ln_wn = w.ln_weight_at(k0 + n)?;
            if ln_k + ln_wn - ln_lam >= ln_thr {
                continue;
            }
            if let (Some(lc), Some(ll), Some(r)) = (ln_c, ln_l, r_index) {
                if lc + max_ln_mu + ln_wn - ln_lam >= ln_thr {
                    continue;
                }
                let ln_back = w.ln_weight_at(-n + ws.n(r) + k0)?;
                if ll + ln_lam + ln_back - min_ln_mu >= ln_thr {
                    continue;
                }
            }
            pick = Some(kk);
            break;
        }
        let kj = pick.ok_or(Error::WitnessExhausted { target: j })?;
        let m = ws.n(kj) - s_j + k0;
        chosen.push((kj, m, ws.ln_lambda(kj)));
        rows.push(CertRow {
            j,
            k_index: kj,
            r_index,
            m,
            mu: ws.pairs[kj].1,
            measured_error: f64::NAN,
            analytic_bound: analytic_bound(j, ys.len()),
            ln_k,
            ln_c,
            ln_l,
        });
    }

    for pair in chosen.windows(2) {
        if pair[1].1 <= pair[0].1 {
            return Err(Error::InvalidSchedule(
                "shift exponents m_j are not strictly increasing".into(),
            ));
        }
    }

    let mut acc: BTreeMap<i64, Complex64> = BTreeMap::new();
    for (row, y) in rows.iter().zip(ys) {
        for (k, c) in y.iter() {
            *acc.entry(k + row.m).or_insert(Complex64::new(0.0, 0.0)) += c / row.mu;
        }
    }
    let z = SparseVec::from_map(Mode::Bilateral, acc);

    for (row, y) in rows.iter_mut().zip(ys) {
        let approx = iterate(&z, row.m as u64).scale_real(row.mu);
        row.measured_error = weighted_norm(w, &approx.try_sub(y)?, p)?;
    }
    warnings.dedup();
    Ok(ConstructionCert {
        b_norm,
        k0,
        rows,
        z,
        warnings,
    })
}

/// Direct evaluation of the three selection conditions at each `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub j: usize,
    /// `‖S^{m_j} y_j‖ / |μ_j|`
    pub a: f64,
    /// `max_{l<j} (|μ_j|/|μ_l|) ‖B^{m_j} S^{m_l} y_l‖`
    pub b: f64,
    /// `max_{l<j} (|μ_l|/|μ_j|) ‖B^{m_l} S^{m_j} y_j‖`
    pub c: f64,
    pub threshold: f64,
}

impl ConditionRow {
    pub fn holds(&self) -> bool {
        self.a < self.threshold && self.b < self.threshold && self.c < self.threshold
    }
}

pub fn evaluate_conditions(cert: &ConstructionCert, w: &WeightSeq, targets: &TargetSet, p: f64) -> Result<Vec<ConditionRow>> {
    let ys = targets.targets();
    if ys.len() != cert.rows.len() {
        return Err(Error::InvalidTargets("certificate and target set differ in length".into()));
    }
    let shifted = |y: &SparseVec, up: i64, down: i64| -> SparseVec {
        // B^{down} S^{up} y, one translation
        let d = up - down;
        if d >= 0 {
            iterate_forward(y, d as u64)
        } else {
            iterate(y, d.unsigned_abs())
        }
    };
    let mut out = Vec::with_capacity(ys.len());
    for (jj, row) in cert.rows.iter().enumerate() {
        let a = weighted_norm(w, &shifted(&ys[jj], row.m, 0), p)? / row.mu;
        let mut b: f64 = 0.0;
        let mut c: f64 = 0.0;
        for (ll, prev) in cert.rows[..jj].iter().enumerate() {
            let bv = weighted_norm(w, &shifted(&ys[ll], prev.m, row.m), p)? * (row.mu / prev.mu);
            let cv = weighted_norm(w, &shifted(&ys[jj], row.m, prev.m), p)? * (prev.mu / row.mu);
            b = b.max(bv);
            c = c.max(cv);
        }
        out.push(ConditionRow {
            j: row.j,
            a,
            b,
            c,
            threshold: 2f64.powi(-(row.j as i32)),
        });
    }
    Ok(out)
}
