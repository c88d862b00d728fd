//! Exact arithmetic on finite doubles, used where polynomial coefficients are
//! large enough that floating-point evaluation cancels catastrophically.
//!
//! Every finite `f64` is `m · 2^e` with integer `m`; sums and products of such
//! values stay in that form, so accumulation is exact and only the final
//! conversion rounds.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Float, ToPrimitive, Zero};

use crate::shift::Polynomial;
use crate::vector::SparseVec;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub(crate) fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    /// Exact image of a finite double.
    pub(crate) fn from_f64(v: f64) -> Self {
        debug_assert!(v.is_finite());
        if v == 0.0 {
            return Dyadic::zero();
        }
        let (m, e, s) = Float::integer_decode(v);
        let mant = BigInt::from(m) * i64::from(s);
        Dyadic { mant, exp: i64::from(e) }
    }

    pub(crate) fn add(&self, other: &Dyadic) -> Dyadic {
        if self.mant.is_zero() {
            return other.clone();
        }
        if other.mant.is_zero() {
            return self.clone();
        }
        let (lo, hi) = if self.exp <= other.exp {
            (self, other)
        } else {
            (other, self)
        };
        let shift = (hi.exp - lo.exp) as usize;
        Dyadic {
            mant: &lo.mant + (&hi.mant << shift),
            exp: lo.exp,
        }
    }

    pub(crate) fn mul(&self, other: &Dyadic) -> Dyadic {
        if self.mant.is_zero() || other.mant.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
    }

    pub(crate) fn neg(&self) -> Dyadic {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    /// Nearest double, up to one extra rounding below 2^-100 relative.
    pub(crate) fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let drop = (bits - 120).max(0);
        let top = (&self.mant >> drop as usize).to_i128().expect("fits in 120 bits");
        ldexp(top as f64, self.exp + drop)
    }
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CDyadic {
    pub(crate) re: Dyadic,
    pub(crate) im: Dyadic,
}

impl CDyadic {
    pub(crate) fn zero() -> Self {
        CDyadic {
            re: Dyadic::zero(),
            im: Dyadic::zero(),
        }
    }

    pub(crate) fn from_c64(c: Complex64) -> Self {
        CDyadic {
            re: Dyadic::from_f64(c.re),
            im: Dyadic::from_f64(c.im),
        }
    }

    pub(crate) fn add(&self, o: &CDyadic) -> CDyadic {
        CDyadic {
            re: self.re.add(&o.re),
            im: self.im.add(&o.im),
        }
    }

    pub(crate) fn mul(&self, o: &CDyadic) -> CDyadic {
        CDyadic {
            re: self.re.mul(&o.re).add(&self.im.mul(&o.im).neg()),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub(crate) fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// `P(B)x` with every output coordinate accumulated exactly and rounded once.
pub(crate) fn poly_apply_exact(poly: &Polynomial, x: &SparseVec) -> SparseVec {
    let mode = x.mode();
    let xs: Vec<(i64, CDyadic)> = x.iter().map(|(k, c)| (k, CDyadic::from_c64(c))).collect();
    let mut acc: BTreeMap<i64, CDyadic> = BTreeMap::new();
    for (i, a) in poly.coeffs().iter().enumerate() {
        if *a == Complex64::new(0.0, 0.0) {
            continue;
        }
        let a = CDyadic::from_c64(*a);
        for (k, c) in &xs {
            let j = k - i as i64;
            if mode.contains(j) {
                let slot = acc.entry(j).or_insert_with(CDyadic::zero);
                *slot = slot.add(&a.mul(c));
            }
        }
    }
    SparseVec::from_map(mode, acc.into_iter().map(|(k, v)| (k, v.to_c64())).collect())
}
