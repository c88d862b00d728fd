//! Weight sequences and the weighted `ℓᵖ` spaces they induce.
//!
//! A space is described by an index set (`ℕ` or `ℤ`), a positive weight
//! sequence `ω` and an exponent `p ≥ 1`; the norm is
//! `‖x‖ = (Σ |x_k|ᵖ ω_kᵖ)^{1/p}`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::SparseVec;

/// Index set of the space: `ℕ` (unilateral) or `ℤ` (bilateral).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Unilateral,
    Bilateral,
}

impl Mode {
    pub fn contains(self, index: i64) -> bool {
        match self {
            Mode::Unilateral => index >= 0,
            Mode::Bilateral => true,
        }
    }

    pub fn check_index(self, index: i64) -> Result<()> {
        if self.contains(index) {
            Ok(())
        } else {
            Err(Error::IndexOutOfMode { index, mode: self })
        }
    }

    pub fn expect(self, found: Mode) -> Result<()> {
        if self == found {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                expected: self,
                found,
            })
        }
    }

    /// Indices `n` with `|n| ≤ horizon` that belong to this index set.
    pub fn window(self, horizon: u64) -> std::ops::RangeInclusive<i64> {
        let h = horizon.min(i64::MAX as u64 / 2) as i64;
        match self {
            Mode::Unilateral => 0..=h,
            Mode::Bilateral => -h..=h,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Unilateral => "unilateral",
            Mode::Bilateral => "bilateral",
        })
    }
}

/// Closed-form or tabulated description of a weight sequence.
///
/// The JSON form is tagged by `family`, e.g. `{"family":"geometric","r":0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum WeightFamily {
    /// `ω_n = c`
    Constant { c: f64 },
    /// `ω_n = rⁿ`
    Geometric { r: f64 },
    /// `ω_n = r^{|n|}`
    ExpAbs { r: f64 },
    /// `ω_n = (1+|n|)^α`
    PowerLaw { alpha: f64 },
    /// `left` for `n < 0`, `right` for `n ≥ 0`.
    Piecewise {
        left: Box<WeightFamily>,
        right: Box<WeightFamily>,
    },
    /// Explicit values overriding `fill` pointwise.
    Table {
        entries: Vec<(i64, f64)>,
        fill: Box<WeightFamily>,
    },
    Product { of: (Box<WeightFamily>, Box<WeightFamily>) },
    Min { of: (Box<WeightFamily>, Box<WeightFamily>) },
}

fn positive_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be a positive finite real, got {v}"
        )))
    }
}

impl WeightFamily {
    pub fn constant(c: f64) -> Self {
        WeightFamily::Constant { c }
    }

    pub fn geometric(r: f64) -> Self {
        WeightFamily::Geometric { r }
    }

    pub fn exp_abs(r: f64) -> Self {
        WeightFamily::ExpAbs { r }
    }

    pub fn power_law(alpha: f64) -> Self {
        WeightFamily::PowerLaw { alpha }
    }

    pub fn piecewise(left: WeightFamily, right: WeightFamily) -> Self {
        WeightFamily::Piecewise {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn table(entries: impl IntoIterator<Item = (i64, f64)>, fill: WeightFamily) -> Self {
        WeightFamily::Table {
            entries: entries.into_iter().collect(),
            fill: Box::new(fill),
        }
    }

    pub fn product(a: WeightFamily, b: WeightFamily) -> Self {
        WeightFamily::Product {
            of: (Box::new(a), Box::new(b)),
        }
    }

    pub fn min(a: WeightFamily, b: WeightFamily) -> Self {
        WeightFamily::Min {
            of: (Box::new(a), Box::new(b)),
        }
    }

    fn validate(&self, mode: Mode) -> Result<()> {
        match self {
            WeightFamily::Constant { c } => positive_finite("c", *c),
            WeightFamily::Geometric { r } | WeightFamily::ExpAbs { r } => positive_finite("r", *r),
            WeightFamily::PowerLaw { alpha } => {
                if alpha.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "alpha must be finite, got {alpha}"
                    )))
                }
            }
            WeightFamily::Piecewise { left, right } => {
                left.validate(mode)?;
                right.validate(mode)
            }
            WeightFamily::Table { entries, fill } => {
                let mut seen = std::collections::BTreeSet::new();
                for &(index, value) in entries {
                    mode.check_index(index)?;
                    positive_finite("table entry", value)?;
                    if !seen.insert(index) {
                        return Err(Error::InvalidParameter(format!(
                            "duplicate table index {index}"
                        )));
                    }
                }
                fill.validate(mode)
            }
            WeightFamily::Product { of } | WeightFamily::Min { of } => {
                of.0.validate(mode)?;
                of.1.validate(mode)
            }
        }
    }

    fn has_table(&self) -> bool {
        match self {
            WeightFamily::Table { .. } => true,
            WeightFamily::Piecewise { left, right } => left.has_table() || right.has_table(),
            WeightFamily::Product { of } | WeightFamily::Min { of } => {
                of.0.has_table() || of.1.has_table()
            }
            _ => false,
        }
    }

    fn value(&self, n: i64) -> f64 {
        match self {
            WeightFamily::Constant { c } => *c,
            WeightFamily::Geometric { r } => int_pow(*r, n),
            WeightFamily::ExpAbs { r } => int_pow(*r, n.unsigned_abs() as i64),
            WeightFamily::PowerLaw { alpha } => (1.0 + n.unsigned_abs() as f64).powf(*alpha),
            WeightFamily::Piecewise { left, right } => {
                if n < 0 {
                    left.value(n)
                } else {
                    right.value(n)
                }
            }
            WeightFamily::Table { entries, fill } => entries
                .iter()
                .find(|(i, _)| *i == n)
                .map(|(_, v)| *v)
                .unwrap_or_else(|| fill.value(n)),
            WeightFamily::Product { of } => of.0.value(n) * of.1.value(n),
            WeightFamily::Min { of } => of.0.value(n).min(of.1.value(n)),
        }
    }

    fn ln_value(&self, n: i64) -> f64 {
        match self {
            WeightFamily::Constant { c } => c.ln(),
            WeightFamily::Geometric { r } => n as f64 * r.ln(),
            WeightFamily::ExpAbs { r } => n.unsigned_abs() as f64 * r.ln(),
            WeightFamily::PowerLaw { alpha } => alpha * (n.unsigned_abs() as f64).ln_1p(),
            WeightFamily::Piecewise { left, right } => {
                if n < 0 {
                    left.ln_value(n)
                } else {
                    right.ln_value(n)
                }
            }
            WeightFamily::Table { entries, fill } => entries
                .iter()
                .find(|(i, _)| *i == n)
                .map(|(_, v)| v.ln())
                .unwrap_or_else(|| fill.ln_value(n)),
            WeightFamily::Product { of } => of.0.ln_value(n) + of.1.ln_value(n),
            WeightFamily::Min { of } => of.0.ln_value(n).min(of.1.ln_value(n)),
        }
    }
}

fn int_pow(r: f64, n: i64) -> f64 {
    match i32::try_from(n) {
        Ok(k) => r.powi(k),
        Err(_) => r.powf(n as f64),
    }
}

/// A validated weight sequence over a fixed index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightDoc", into = "WeightDoc")]
pub struct WeightSeq {
    mode: Mode,
    family: WeightFamily,
    // Table lookups are the hot path in scans; keep a map next to the list.
    #[serde(skip)]
    overrides: Option<BTreeMap<i64, f64>>,
}

#[derive(Serialize, Deserialize)]
struct WeightDoc {
    mode: Mode,
    #[serde(flatten)]
    family: WeightFamily,
}

impl TryFrom<WeightDoc> for WeightSeq {
    type Error = Error;

    fn try_from(doc: WeightDoc) -> Result<Self> {
        WeightSeq::new(doc.mode, doc.family)
    }
}

impl From<WeightSeq> for WeightDoc {
    fn from(w: WeightSeq) -> Self {
        WeightDoc {
            mode: w.mode,
            family: w.family,
        }
    }
}

impl WeightSeq {
    pub fn new(mode: Mode, family: WeightFamily) -> Result<Self> {
        family.validate(mode)?;
        let overrides = match &family {
            WeightFamily::Table { entries, .. } if entries.len() > 8 => {
                Some(entries.iter().copied().collect())
            }
            _ => None,
        };
        Ok(WeightSeq {
            mode,
            family,
            overrides,
        })
    }

    /// Parse a JSON weight descriptor such as
    /// `{"mode":"bilateral","family":"expabs","r":0.5}`.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(e.to_string()))
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    fn raw(&self, n: i64) -> f64 {
        if let Some(map) = &self.overrides {
            if let Some(v) = map.get(&n) {
                return *v;
            }
            if let WeightFamily::Table { fill, .. } = &self.family {
                return fill.value(n);
            }
        }
        self.family.value(n)
    }

    fn raw_ln(&self, n: i64) -> f64 {
        if let Some(map) = &self.overrides {
            if let Some(v) = map.get(&n) {
                return v.ln();
            }
            if let WeightFamily::Table { fill, .. } = &self.family {
                return fill.ln_value(n);
            }
        }
        self.family.ln_value(n)
    }

    /// `ω_n`, required to be a positive finite double.
    pub fn weight_at(&self, n: i64) -> Result<f64> {
        self.mode.check_index(n)?;
        let v = self.raw(n);
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::WeightOutOfRange { index: n, value: v })
        }
    }

    /// `ln ω_n`; finite even where `ω_n` itself under- or overflows.
    pub fn ln_weight_at(&self, n: i64) -> Result<f64> {
        self.mode.check_index(n)?;
        Ok(self.raw_ln(n))
    }

    /// `mag · ω_n`, falling back to the log domain when `ω_n` is not
    /// representable.
    pub fn scaled(&self, n: i64, mag: f64) -> Result<f64> {
        self.mode.check_index(n)?;
        let v = self.raw(n);
        if v.is_normal() && v > 0.0 {
            Ok(mag * v)
        } else if mag == 0.0 {
            Ok(0.0)
        } else {
            Ok((mag.ln() + self.raw_ln(n)).exp())
        }
    }

    /// Upper bound for `‖B‖ = sup ω_n/ω_{n+1}`.
    ///
    /// Exact for `Constant`, `Geometric` and `ExpAbs`; otherwise the maximum
    /// ratio over `|n| ≤ horizon` (`n ∈ [0, horizon]` when unilateral).
    pub fn shift_norm_bound(&self, horizon: u64) -> f64 {
        match (&self.family, self.mode) {
            (WeightFamily::Constant { .. }, _) => 1.0,
            (WeightFamily::Geometric { r }, _) => 1.0 / r,
            (WeightFamily::ExpAbs { r }, Mode::Unilateral) => 1.0 / r,
            (WeightFamily::ExpAbs { r }, Mode::Bilateral) => r.max(1.0 / r),
            _ => self
                .mode
                .window(horizon.max(1))
                .map(|n| (self.raw_ln(n) - self.raw_ln(n + 1)).exp())
                .fold(0.0, f64::max),
        }
    }

    /// `sup ω_{k+1}/ω_k`, closed form where available, otherwise scanned over
    /// the same window as [`WeightSeq::shift_norm_bound`].
    pub fn forward_ratio_bound(&self, horizon: u64) -> f64 {
        match (&self.family, self.mode) {
            (WeightFamily::Constant { .. }, _) => 1.0,
            (WeightFamily::Geometric { r }, _) => *r,
            (WeightFamily::ExpAbs { r }, Mode::Unilateral) => *r,
            (WeightFamily::ExpAbs { r }, Mode::Bilateral) => r.max(1.0 / r),
            _ => self
                .mode
                .window(horizon.max(1))
                .map(|n| (self.raw_ln(n + 1) - self.raw_ln(n)).exp())
                .fold(0.0, f64::max),
        }
    }

    /// Whether the tabulated overrides are present anywhere in the family.
    pub fn has_table(&self) -> bool {
        self.family.has_table()
    }

    /// Check positivity, finiteness and a finite shift ratio on a window.
    pub fn validate_horizon(&self, horizon: u64) -> Result<()> {
        for n in self.mode.window(horizon) {
            let l = self.raw_ln(n);
            if !l.is_finite() {
                return Err(Error::WeightOutOfRange {
                    index: n,
                    value: self.raw(n),
                });
            }
        }
        let b = self.shift_norm_bound(horizon);
        if !b.is_finite() {
            return Err(Error::UnboundedRatio { horizon });
        }
        Ok(())
    }
}

/// A weighted `ℓᵖ(I, ω)` space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceCtx {
    pub weight: WeightSeq,
    pub p: f64,
    /// Relative tolerance used when comparing computed values against bounds.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-9
}

impl SpaceCtx {
    pub fn new(weight: WeightSeq, p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must satisfy 1 <= p < inf, got {p}"
            )));
        }
        Ok(SpaceCtx {
            weight,
            p,
            tol: default_tol(),
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn mode(&self) -> Mode {
        self.weight.mode()
    }

    /// Conjugate exponent; `None` for `p = 1`.
    pub fn q(&self) -> Option<f64> {
        (self.p > 1.0).then(|| self.p / (self.p - 1.0))
    }

    /// The conjugate exponent, or `UnsupportedExponent` when `p = 1`.
    pub fn require_dual(&self) -> Result<f64> {
        self.q().ok_or(Error::UnsupportedExponent { p: self.p })
    }

    pub fn norm(&self, x: &SparseVec) -> Result<f64> {
        self.mode().expect(x.mode())?;
        weighted_norm(&self.weight, x, self.p)
    }

    /// Norm in `ℓ^q(I, ω)` with the same weights.
    pub fn dual_norm(&self, y: &SparseVec) -> Result<f64> {
        self.mode().expect(y.mode())?;
        let q = self.require_dual()?;
        weighted_norm(&self.weight, y, q)
    }

    /// `⟨x, y⟩ = Σ x_k · conj(y_k) · ω_k²`, so that `⟨x, e_j⟩ = x_j ω_j²`.
    pub fn pairing(&self, x: &SparseVec, y: &SparseVec) -> Result<Complex64> {
        self.mode().expect(x.mode())?;
        self.mode().expect(y.mode())?;
        let (small, large, conj_small) = if x.len() <= y.len() {
            (x, y, false)
        } else {
            (y, x, true)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in small.iter() {
            let b = large.get(k);
            if b == Complex64::new(0.0, 0.0) {
                continue;
            }
            let w = self.weight.weight_at(k)?;
            let term = if conj_small { b * a.conj() } else { a * b.conj() };
            acc += term * (w * w);
        }
        Ok(acc)
    }
}

/// `(Σ |x_k|ᵖ ω_kᵖ)^{1/p}`, computed with max-scaling so neither the weights
/// nor the sum overflow prematurely.
pub(crate) fn weighted_norm(w: &WeightSeq, x: &SparseVec, p: f64) -> Result<f64> {
    let mut terms = Vec::with_capacity(x.len());
    for (k, c) in x.iter() {
        terms.push(w.scaled(k, c.norm())?);
    }
    Ok(p_norm(&terms, p))
}

pub(crate) fn p_norm(terms: &[f64], p: f64) -> f64 {
    let m = terms.iter().copied().fold(0.0, f64::max);
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s: f64 = if p == 2.0 {
        terms.iter().map(|t| (t / m) * (t / m)).sum()
    } else if p == 1.0 {
        terms.iter().map(|t| t / m).sum()
    } else {
        terms.iter().map(|t| (t / m).powf(p)).sum()
    };
    if p == 2.0 {
        m * s.sqrt()
    } else {
        m * s.powf(1.0 / p)
    }
}
