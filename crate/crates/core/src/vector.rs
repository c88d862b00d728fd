//! Finitely supported vectors with complex coefficients.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::space::Mode;

/// Coefficients at or below this magnitude are dropped after arithmetic.
pub const PRUNE_BELOW: f64 = 1e-300;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    mode: Mode,
    entries: BTreeMap<i64, Complex64>,
}

impl SparseVec {
    pub fn zero(mode: Mode) -> Self {
        SparseVec {
            mode,
            entries: BTreeMap::new(),
        }
    }

    /// The basis vector `e_n`.
    pub fn basis(mode: Mode, n: i64) -> Result<Self> {
        mode.check_index(n)?;
        let mut v = SparseVec::zero(mode);
        v.entries.insert(n, Complex64::new(1.0, 0.0));
        Ok(v)
    }

    /// Build from `(index, coefficient)` pairs. Zero coefficients are dropped;
    /// repeated indices and indices outside the mode are rejected.
    pub fn from_entries(
        mode: Mode,
        entries: impl IntoIterator<Item = (i64, Complex64)>,
    ) -> Result<Self> {
        let mut out = SparseVec::zero(mode);
        for (k, c) in entries {
            mode.check_index(k)?;
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "coefficient at index {k} is not finite"
                )));
            }
            if out.entries.contains_key(&k) {
                return Err(Error::InvalidParameter(format!("duplicate index {k}")));
            }
            if c.norm() > PRUNE_BELOW {
                out.entries.insert(k, c);
            }
        }
        Ok(out)
    }

    pub fn from_real(mode: Mode, entries: impl IntoIterator<Item = (i64, f64)>) -> Result<Self> {
        SparseVec::from_entries(
            mode,
            entries.into_iter().map(|(k, v)| (k, Complex64::new(v, 0.0))),
        )
    }

    /// Internal constructor for index maps already known to be valid.
    pub(crate) fn from_map(mode: Mode, mut entries: BTreeMap<i64, Complex64>) -> Self {
        entries.retain(|k, c| mode.contains(*k) && c.norm() > PRUNE_BELOW);
        SparseVec { mode, entries }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn get(&self, k: i64) -> Complex64 {
        self.entries.get(&k).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.entries.iter().map(|(k, c)| (*k, *c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_index(&self) -> Option<i64> {
        self.entries.keys().next().copied()
    }

    pub fn max_index(&self) -> Option<i64> {
        self.entries.keys().next_back().copied()
    }

    /// `max |k|` over the support, `0` for the zero vector.
    pub fn radius(&self) -> u64 {
        self.entries
            .keys()
            .map(|k| k.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, lambda: Complex64) -> SparseVec {
        SparseVec::from_map(
            self.mode,
            self.entries.iter().map(|(k, c)| (*k, c * lambda)).collect(),
        )
    }

    pub fn scale_real(&self, lambda: f64) -> SparseVec {
        self.scale(Complex64::new(lambda, 0.0))
    }

    /// `self + lambda · other`.
    pub fn axpy(&self, lambda: Complex64, other: &SparseVec) -> Result<SparseVec> {
        self.mode.expect(other.mode)?;
        let mut out = self.entries.clone();
        for (k, c) in &other.entries {
            *out.entry(*k).or_insert(ZERO) += c * lambda;
        }
        Ok(SparseVec::from_map(self.mode, out))
    }

    pub fn try_add(&self, other: &SparseVec) -> Result<SparseVec> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn try_sub(&self, other: &SparseVec) -> Result<SparseVec> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// Translate every index by `delta`, dropping entries that leave the mode.
    pub(crate) fn translate(&self, delta: i64) -> SparseVec {
        SparseVec::from_map(
            self.mode,
            self.entries
                .iter()
                .filter_map(|(k, c)| k.checked_add(delta).map(|j| (j, *c)))
                .collect(),
        )
    }
}

// JSON form: a list of `[index, re]` or `[index, re, im]`.
impl Serialize for SparseVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.entries.len()))?;
        for (k, c) in &self.entries {
            if c.im == 0.0 {
                seq.serialize_element(&(*k, c.re))?;
            } else {
                seq.serialize_element(&(*k, c.re, c.im))?;
            }
        }
        seq.end()
    }
}

/// Entry list of a vector without the mode; the mode comes from context.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VecEntries(pub Vec<(i64, Complex64)>);

impl VecEntries {
    pub fn into_vec(self, mode: Mode) -> Result<SparseVec> {
        SparseVec::from_entries(mode, self.0)
    }
}

impl From<&SparseVec> for VecEntries {
    fn from(v: &SparseVec) -> Self {
        VecEntries(v.iter().collect())
    }
}

impl Serialize for VecEntries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for (k, c) in &self.0 {
            if c.im == 0.0 {
                seq.serialize_element(&(*k, c.re))?;
            } else {
                seq.serialize_element(&(*k, c.re, c.im))?;
            }
        }
        seq.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Real(i64, f64),
    Complex(i64, f64, f64),
}

impl<'de> Deserialize<'de> for VecEntries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = VecEntries;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a list of [index, re] or [index, re, im] entries")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<VecEntries, A::Error> {
                let mut out = Vec::new();
                while let Some(e) = seq.next_element::<RawEntry>()? {
                    out.push(match e {
                        RawEntry::Real(k, re) => (k, Complex64::new(re, 0.0)),
                        RawEntry::Complex(k, re, im) => (k, Complex64::new(re, im)),
                    });
                }
                Ok(VecEntries(out))
            }
        }
        d.deserialize_seq(V).map_err(de::Error::custom)
    }
}
