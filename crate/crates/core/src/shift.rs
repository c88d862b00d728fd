//! The backward shift `B`, its right inverse `S`, polynomials in `B`, and the
//! adjoint of the unilateral `B` on `ℓ^q(ℕ, ω)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Result;
use crate::space::{Mode, SpaceCtx};
use crate::vector::SparseVec;

/// `(Bx)_k = x_{k+1}`. In unilateral mode the entry at index 0 falls off.
pub fn backward(x: &SparseVec) -> SparseVec {
    x.translate(-1)
}

/// `(Sx)_k = x_{k-1}`.
pub fn forward(x: &SparseVec) -> SparseVec {
    x.translate(1)
}

/// `Bⁿx` by a single index translation.
pub fn iterate(x: &SparseVec, n: u64) -> SparseVec {
    match i64::try_from(n) {
        Ok(n) => x.translate(-n),
        Err(_) => SparseVec::zero(x.mode()),
    }
}

/// `Sⁿx`.
pub fn iterate_forward(x: &SparseVec, n: u64) -> SparseVec {
    match i64::try_from(n) {
        Ok(n) => x.translate(n),
        Err(_) => SparseVec::zero(x.mode()),
    }
}

/// Dense polynomial `a_0 + a_1 z + … + a_m z^m`; trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `c · z^k`
    pub fn monomial(k: usize, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Polynomial::new(coeffs)
    }

    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `z^k · self`
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k];
        coeffs.extend_from_slice(&self.coeffs);
        Polynomial { coeffs }
    }

    /// `self + lambda · other`
    pub fn axpy(&self, lambda: Complex64, other: &Polynomial) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n, Complex64::new(0.0, 0.0));
        for (c, o) in coeffs.iter_mut().zip(&other.coeffs) {
            *c += lambda * o;
        }
        Polynomial::new(coeffs)
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&[c.re, c.im])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(Polynomial::new(
            raw.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        ))
    }
}

/// `P(B)x = Σ_i a_i Bⁱx`, accumulated per index.
pub fn poly_apply(poly: &Polynomial, x: &SparseVec) -> SparseVec {
    let mode = x.mode();
    let mut acc: BTreeMap<i64, Complex64> = BTreeMap::new();
    for (i, a) in poly.coeffs().iter().enumerate() {
        if *a == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (k, c) in x.iter() {
            let j = k - i as i64;
            if mode.contains(j) {
                *acc.entry(j).or_insert(Complex64::new(0.0, 0.0)) += a * c;
            }
        }
    }
    SparseVec::from_map(mode, acc)
}

/// Adjoint of the unilateral `B` with respect to the weighted pairing:
/// `(S*y)_{k+1} = y_k ω_k² / ω_{k+1}²`, `(S*y)_0 = 0`.
pub fn adjoint_forward(y: &SparseVec, ctx: &SpaceCtx) -> Result<SparseVec> {
    Mode::Unilateral.expect(ctx.mode())?;
    Mode::Unilateral.expect(y.mode())?;
    ctx.require_dual()?;
    let w = &ctx.weight;
    let mut out = BTreeMap::new();
    for (k, c) in y.iter() {
        let ratio = (2.0 * (w.ln_weight_at(k)? - w.ln_weight_at(k + 1)?)).exp();
        out.insert(k + 1, c * ratio);
    }
    Ok(SparseVec::from_map(Mode::Unilateral, out))
}
