//! Independent oracles shared by the integration suites. Nothing here calls
//! the library's own norms or evaluators.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use shiftlab::{Mode, Polynomial, SparseVec, WeightFamily, WeightSeq};

pub fn factorial_vector(k: usize) -> SparseVec {
    let mut f = 1.0f64;
    let mut entries = Vec::new();
    for j in 0..=k {
        if j > 0 {
            f *= j as f64;
        }
        entries.push((j as i64, 1.0 / f));
    }
    SparseVec::from_real(Mode::Unilateral, entries).unwrap()
}

fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

/// Unweighted `‖q(B)x − e_n‖₂` with every step in exact rationals; real data only.
pub fn exact_residual_l2(q: &Polynomial, x: &SparseVec, n: i64) -> f64 {
    let mut coords: std::collections::BTreeMap<i64, BigRational> = Default::default();
    for (i, a) in q.coeffs().iter().enumerate() {
        assert_eq!(a.im, 0.0);
        if a.re == 0.0 {
            continue;
        }
        let ar = rat(a.re);
        for (k, c) in x.iter() {
            let j = k - i as i64;
            if j >= 0 {
                let e = coords.entry(j).or_insert_with(BigRational::zero);
                *e += &ar * rat(c.re);
            }
        }
    }
    *coords.entry(n).or_insert_with(BigRational::zero) -= BigRational::from_integer(BigInt::from(1));
    let sum: BigRational = coords.values().map(|v| v * v).sum();
    sum.to_f64().unwrap().sqrt()
}

/// `(Σ |c_k|ᵖ ω_kᵖ)^{1/p}` by plain summation with `ω_k = exp(ln_w(k))`.
pub fn plain_norm(x: &SparseVec, ln_w: impl Fn(i64) -> f64, p: f64) -> f64 {
    let s: f64 = x
        .iter()
        .map(|(k, c)| (c.norm().ln() + ln_w(k)).exp().powf(p))
        .sum();
    s.powf(1.0 / p)
}

pub fn bilateral(f: WeightFamily) -> WeightSeq {
    WeightSeq::new(Mode::Bilateral, f).unwrap()
}

pub fn unilateral(f: WeightFamily) -> WeightSeq {
    WeightSeq::new(Mode::Unilateral, f).unwrap()
}

/// The bilateral family suite used by the reduction checks.
pub fn bilateral_suite() -> Vec<(&'static str, WeightSeq)> {
    vec![
        ("Constant(1)", bilateral(WeightFamily::constant(1.0))),
        ("Geometric(1/2)", bilateral(WeightFamily::geometric(0.5))),
        ("ExpAbs(1/2)", bilateral(WeightFamily::exp_abs(0.5))),
        ("ExpAbs(2)", bilateral(WeightFamily::exp_abs(2.0))),
        (
            "Piecewise(1|2^-n)",
            bilateral(WeightFamily::piecewise(WeightFamily::constant(1.0), WeightFamily::geometric(0.5))),
        ),
        (
            "Piecewise(2^-n|4^-n)",
            bilateral(WeightFamily::piecewise(WeightFamily::geometric(0.5), WeightFamily::geometric(0.25))),
        ),
    ]
}

/// Every built-in family kind, in both modes where it makes sense.
pub fn all_bilateral_families() -> Vec<(&'static str, WeightSeq)> {
    let mut v = bilateral_suite();
    v.push(("PowerLaw(-1)", bilateral(WeightFamily::power_law(-1.0))));
    v.push(("PowerLaw(2)", bilateral(WeightFamily::power_law(2.0))));
    v.push((
        "Table",
        bilateral(WeightFamily::table([(-3, 0.01), (5, 0.001)], WeightFamily::exp_abs(0.7))),
    ));
    v.push((
        "Product",
        bilateral(WeightFamily::product(WeightFamily::exp_abs(0.8), WeightFamily::power_law(-1.0))),
    ));
    v.push((
        "Min",
        bilateral(WeightFamily::min(WeightFamily::geometric(0.5), WeightFamily::geometric(2.0))),
    ));
    v
}

pub fn all_unilateral_families() -> Vec<(&'static str, WeightSeq)> {
    vec![
        ("Constant(1)", unilateral(WeightFamily::constant(1.0))),
        ("Geometric(1/2)", unilateral(WeightFamily::geometric(0.5))),
        ("Geometric(2)", unilateral(WeightFamily::geometric(2.0))),
        ("ExpAbs(0.9)", unilateral(WeightFamily::exp_abs(0.9))),
        ("PowerLaw(-1)", unilateral(WeightFamily::power_law(-1.0))),
        ("PowerLaw(1)", unilateral(WeightFamily::power_law(1.0))),
        (
            "Table",
            unilateral(WeightFamily::table([(0, 2.0), (3, 0.5)], WeightFamily::geometric(0.8))),
        ),
        (
            "Product",
            unilateral(WeightFamily::product(WeightFamily::geometric(0.9), WeightFamily::power_law(1.0))),
        ),
        (
            "Min",
            unilateral(WeightFamily::min(WeightFamily::constant(0.3), WeightFamily::geometric(0.7))),
        ),
    ]
}

pub mod identities {
    //! Algebraic identities checked on one sampled input; each returns a
    //! description of the first violation.

    use num_complex::Complex64;
    use shiftlab::{adjoint_forward, backward, forward, iterate, poly_apply, Mode, Polynomial, SpaceCtx, SparseVec};

    pub const REL: f64 = 1e-12;

    fn close(a: f64, b: f64, scale: f64, what: &str) -> Result<(), String> {
        if (a - b).abs() <= REL * scale.max(f64::MIN_POSITIVE) {
            Ok(())
        } else {
            Err(format!("{what}: {a:e} vs {b:e}"))
        }
    }

    fn close_c(a: Complex64, b: Complex64, scale: f64, what: &str) -> Result<(), String> {
        if (a - b).norm() <= REL * scale.max(f64::MIN_POSITIVE) {
            Ok(())
        } else {
            Err(format!("{what}: {a} vs {b}"))
        }
    }

    /// `Σ |x_k| |y_k| ω_k²`, the scale of a pairing sum.
    fn pairing_scale(x: &SparseVec, y: &SparseVec, ctx: &SpaceCtx) -> f64 {
        x.iter()
            .map(|(k, a)| {
                let w = ctx.weight.weight_at(k).unwrap();
                a.norm() * y.get(k).norm() * w * w
            })
            .sum()
    }

    pub fn norm_laws(x: &SparseVec, y: &SparseVec, c: Complex64, ctx: &SpaceCtx) -> Result<(), String> {
        let nx = ctx.norm(x).unwrap();
        let ny = ctx.norm(y).unwrap();
        let oracle = super::plain_norm(x, |k| ctx.weight.ln_weight_at(k).unwrap(), ctx.p);
        close(nx, oracle, nx, "norm vs plain sum")?;
        let ncx = ctx.norm(&x.scale(c)).unwrap();
        close(ncx, c.norm() * nx, c.norm() * nx, "homogeneity")?;
        let nsum = ctx.norm(&x.try_add(y).unwrap()).unwrap();
        if nsum > (nx + ny) * (1.0 + REL) {
            return Err(format!("triangle: {nsum:e} > {nx:e} + {ny:e}"));
        }
        if x.is_zero() != (nx == 0.0) {
            return Err("definiteness".into());
        }
        Ok(())
    }

    pub fn pairing_laws(x: &SparseVec, y: &SparseVec, z: &SparseVec, c: Complex64, ctx: &SpaceCtx) -> Result<(), String> {
        let xy = ctx.pairing(x, y).unwrap();
        let yx = ctx.pairing(y, x).unwrap();
        close_c(xy, yx.conj(), pairing_scale(x, y, ctx), "conjugate symmetry")?;
        let lhs = ctx.pairing(&x.scale(c).try_add(z).unwrap(), y).unwrap();
        let rhs = c * xy + ctx.pairing(z, y).unwrap();
        let scale = c.norm() * pairing_scale(x, y, ctx) + pairing_scale(z, y, ctx);
        close_c(lhs, rhs, scale, "linearity")?;
        let xx = ctx.pairing(x, x).unwrap();
        if xx.re < 0.0 || xx.im.abs() > REL * xx.re.max(f64::MIN_POSITIVE) {
            return Err(format!("positivity: {xx}"));
        }
        if ctx.p > 1.0 {
            // Hölder with ω² split as ω·ω
            let bound = ctx.norm(x).unwrap() * ctx.dual_norm(y).unwrap();
            if xy.norm() > bound * (1.0 + REL) + f64::MIN_POSITIVE {
                return Err(format!("Hölder: {} > {bound:e}", xy.norm()));
            }
        }
        Ok(())
    }

    pub fn shift_laws(x: &SparseVec, y: &SparseVec, n: u64, ctx: &SpaceCtx) -> Result<(), String> {
        if backward(&forward(x)) != *x {
            return Err("B S x != x".into());
        }
        let mut r = x.clone();
        for _ in 0..n {
            r = backward(&r);
        }
        if iterate(x, n) != r {
            return Err(format!("iterate({n}) differs from repeated B"));
        }
        let bx = ctx.norm(&backward(x)).unwrap();
        let bound = ctx.weight.shift_norm_bound(x.radius() + 2) * ctx.norm(x).unwrap();
        if bx > bound * (1.0 + REL) + f64::MIN_POSITIVE {
            return Err(format!("‖Bx‖ {bx:e} exceeds ‖B‖‖x‖ {bound:e}"));
        }
        if x.mode() == Mode::Unilateral && ctx.p > 1.0 {
            let sy = adjoint_forward(y, ctx).unwrap();
            let lhs = ctx.pairing(&backward(x), y).unwrap();
            let rhs = ctx.pairing(x, &sy).unwrap();
            close_c(lhs, rhs, pairing_scale(&backward(x), y, ctx), "⟨Bx, y⟩ = ⟨x, S*y⟩")?;
        }
        Ok(())
    }

    pub fn poly_laws(p: &Polynomial, q: &Polynomial, c: Complex64, x: &SparseVec) -> Result<(), String> {
        let lhs = poly_apply(&p.axpy(c, q), x);
        let rhs = poly_apply(p, x).axpy(c, &poly_apply(q, x)).unwrap();
        let scale: f64 = x.iter().map(|(_, v)| v.norm()).sum::<f64>()
            * (p.coeffs().iter().map(|a| a.norm()).sum::<f64>() + c.norm() * q.coeffs().iter().map(|a| a.norm()).sum::<f64>());
        for k in lhs.iter().map(|e| e.0).chain(rhs.iter().map(|e| e.0)) {
            close_c(lhs.get(k), rhs.get(k), scale, "polynomial linearity")?;
        }
        let exact = shiftlab::poly_apply_exact(p, x);
        for (k, v) in exact.iter() {
            close_c(v, poly_apply(p, x).get(k), scale, "exact vs rounded apply")?;
        }
        Ok(())
    }
}

pub mod strategies {
    use num_complex::Complex64;
    use proptest::prelude::*;
    use shiftlab::{Mode, Polynomial, SparseVec, WeightFamily, WeightSeq};

    pub fn complex() -> impl Strategy<Value = Complex64> {
        (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(a, b)| Complex64::new(a, b))
    }

    pub fn sparse(mode: Mode) -> impl Strategy<Value = SparseVec> {
        let lo = match mode {
            Mode::Unilateral => 0i64,
            Mode::Bilateral => -24,
        };
        proptest::collection::btree_map(lo..24i64, complex(), 0..10)
            .prop_map(move |m| SparseVec::from_entries(mode, m).unwrap())
    }

    pub fn polynomial() -> impl Strategy<Value = Polynomial> {
        proptest::collection::vec(complex(), 0..6).prop_map(Polynomial::new)
    }

    /// Weights with moderate dynamic range on `|n| ≤ 40`.
    pub fn weight(mode: Mode) -> impl Strategy<Value = WeightSeq> {
        prop_oneof![
            (0.1f64..10.0).prop_map(WeightFamily::constant),
            (0.5f64..2.0).prop_map(WeightFamily::geometric),
            (0.5f64..1.0).prop_map(WeightFamily::exp_abs),
            (-2.0f64..2.0).prop_map(WeightFamily::power_law),
            ((0.5f64..2.0), (0.5f64..2.0))
                .prop_map(|(a, b)| WeightFamily::piecewise(WeightFamily::geometric(a), WeightFamily::geometric(b))),
            ((0.5f64..1.0), (-1.0f64..1.0))
                .prop_map(|(a, b)| WeightFamily::product(WeightFamily::exp_abs(a), WeightFamily::power_law(b))),
            ((0.5f64..2.0), (0.1f64..3.0))
                .prop_map(|(a, c)| WeightFamily::min(WeightFamily::geometric(a), WeightFamily::constant(c))),
            ((0.1f64..5.0), (0.6f64..1.0))
                .prop_map(|(v, r)| WeightFamily::table([(0, v), (3, v / 2.0)], WeightFamily::exp_abs(r))),
        ]
        .prop_map(move |f| WeightSeq::new(mode, f).unwrap())
    }

    pub fn exponent() -> impl Strategy<Value = f64> {
        prop_oneof![Just(1.0), Just(2.0), 1.0f64..4.0]
    }
}

pub mod construction {
    //! Greedy selection for `ExpAbs(2^{-t})` with `k₀ = 0`, written directly
    //! from the closed forms `log₂ ω_n = −t|n|` and `log₂ ‖B‖ = t`, all in
    //! base-2 logarithms.

    use std::collections::BTreeMap;

    use num_complex::Complex64;
    use shiftlab::SparseVec;

    pub struct Selection {
        pub k: Vec<usize>,
        pub m: Vec<i64>,
        pub mu: Vec<f64>,
        pub z: BTreeMap<i64, Complex64>,
    }

    fn lw(t: f64, n: i64) -> f64 {
        -t * n.abs() as f64
    }

    fn log2_sum(terms: impl Iterator<Item = f64>) -> f64 {
        let v: Vec<f64> = terms.collect();
        let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        top + v.iter().map(|x| (x - top).exp2()).sum::<f64>().log2()
    }

    fn log2_norm(y: &SparseVec, t: f64, p: f64) -> f64 {
        log2_sum(y.iter().map(|(k, c)| p * (c.norm().log2() + lw(t, k)))) / p
    }

    fn log2_k(y: &SparseVec, t: f64, p: f64) -> f64 {
        let s = y.radius() as i64;
        log2_norm(y, t, p) + log2_sum((-s..=s).map(|k| p * (t * (s - k) as f64 - lw(t, k)))) / p
    }

    pub fn select(t: f64, p: f64, ns: &[i64], lams: &[f64], ys: &[SparseVec]) -> Option<Selection> {
        let s: Vec<i64> = ys.iter().map(|y| y.radius() as i64).collect();
        let mut sel = Selection {
            k: vec![],
            m: vec![],
            mu: vec![],
            z: BTreeMap::new(),
        };
        for (jj, y) in ys.iter().enumerate() {
            let thr = -(jj as f64 + 1.0);
            let kk = log2_k(y, t, p);
            let (start, extra) = if jj == 0 {
                (ns.iter().position(|&n| n > s[0])?, None)
            } else {
                let c = sel.m.iter().map(|&m| t * m as f64).fold(f64::NEG_INFINITY, f64::max) + kk;
                let reach = (0..jj).map(|l| sel.m[l] + s[l] + s[jj]).max().unwrap();
                let rr = ns.iter().position(|&n| n > reach)?;
                let mut big_l = f64::NEG_INFINITY;
                for l in 0..jj {
                    let sum = log2_sum(
                        (-s[l]..=s[l]).map(|k| p * (t * (ns[rr] - s[jj] - sel.m[l] - k) as f64 - lw(t, k))),
                    );
                    big_l = big_l.max(log2_norm(&ys[l], t, p) + sum / p);
                }
                (sel.k[jj - 1].max(rr) + 1, Some((c, big_l, rr)))
            };
            let max_mu = sel.mu.iter().copied().fold(0.0, f64::max).log2();
            let min_mu = sel.mu.iter().copied().fold(f64::INFINITY, f64::min).log2();
            let pick = (start..ns.len()).find(|&i| {
                let n = ns[i];
                let lam = lams[i].log2();
                if kk + lw(t, n) - lam >= thr {
                    return false;
                }
                match extra {
                    None => true,
                    Some((c, big_l, rr)) => {
                        c + max_mu + lw(t, n) - lam < thr && big_l + lam + lw(t, ns[rr] - n) - min_mu < thr
                    }
                }
            })?;
            sel.k.push(pick);
            sel.m.push(ns[pick] - s[jj]);
            sel.mu.push(lams[pick]);
        }
        for (j, y) in ys.iter().enumerate() {
            for (k, c) in y.iter() {
                *sel.z.entry(k + sel.m[j]).or_default() += c / sel.mu[j];
            }
        }
        Some(sel)
    }

    /// `‖μ B^m z − y‖` coordinate by coordinate.
    pub fn error(sel: &Selection, j: usize, y: &SparseVec, t: f64, p: f64) -> f64 {
        let mut diff: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (k, c) in &sel.z {
            *diff.entry(k - sel.m[j]).or_default() += c * sel.mu[j];
        }
        for (k, c) in y.iter() {
            *diff.entry(k).or_default() -= c;
        }
        diff.iter()
            .map(|(k, c)| (c.norm().log2() + lw(t, *k)).exp2().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}
