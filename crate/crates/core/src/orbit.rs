//! Orbits of `B`: traces, return sets, limit points, a weak-limit proxy, and
//! the bounded-set and adjoint-orbit diagnostics.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{Status, Verdict, Witness};
use crate::error::{Error, Result};
use crate::shift::iterate;
use crate::space::{Mode, SpaceCtx, WeightSeq};
use crate::vector::SparseVec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub n: u64,
    pub norm: f64,
    /// Raw coordinates of `Bⁿx` at the probe indices.
    pub coords: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitTrace {
    pub source: SparseVec,
    pub probes: Vec<i64>,
    pub steps: Vec<TraceStep>,
}

impl OrbitTrace {
    /// CSV with header `n,norm,coord_<i>…`; imaginary parts get their own
    /// `coord_<i>_im` columns only when some probe value is non-real.
    pub fn to_csv(&self) -> String {
        let complex = self
            .steps
            .iter()
            .any(|s| s.coords.iter().any(|c| c.im != 0.0));
        let mut out = String::from("n,norm");
        for i in &self.probes {
            let _ = write!(out, ",coord_{i}");
            if complex {
                let _ = write!(out, ",coord_{i}_im");
            }
        }
        out.push('\n');
        for s in &self.steps {
            let _ = write!(out, "{},{:?}", s.n, s.norm);
            for c in &s.coords {
                let _ = write!(out, ",{:?}", c.re);
                if complex {
                    let _ = write!(out, ",{:?}", c.im);
                }
            }
            out.push('\n');
        }
        out
    }
}

/// `‖Bⁿx‖` and probe coordinates for `n = 0..=horizon`.
pub fn trace_orbit(x: &SparseVec, ctx: &SpaceCtx, horizon: u64, probes: &[i64]) -> Result<OrbitTrace> {
    ctx.mode().expect(x.mode())?;
    for &i in probes {
        ctx.mode().check_index(i)?;
    }
    let steps = (0..=horizon)
        .into_par_iter()
        .map(|n| {
            let v = iterate(x, n);
            Ok(TraceStep {
                n,
                norm: ctx.norm(&v)?,
                coords: probes.iter().map(|&i| v.get(i)).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrbitTrace {
        source: x.clone(),
        probes: probes.to_vec(),
        steps,
    })
}

/// Open ball `B(y, δ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball {
    pub center: SparseVec,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: SparseVec, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    /// Whether the closed ball misses zero, i.e. `‖y‖ > δ`.
    pub fn avoids_zero(&self, ctx: &SpaceCtx) -> Result<bool> {
        Ok(ctx.norm(&self.center)? > self.radius)
    }
}

/// `{n ≤ horizon : Bⁿ(A) ∩ B(y, δ) ≠ ∅}`.
pub fn return_set(a: &[SparseVec], ball: &Ball, ctx: &SpaceCtx, horizon: u64) -> Result<Vec<u64>> {
    if a.is_empty() {
        return Err(Error::InvalidParameter("return set needs a nonempty family".into()));
    }
    ctx.mode().expect(ball.center.mode())?;
    for x in a {
        ctx.mode().expect(x.mode())?;
    }
    let hits = (0..=horizon)
        .into_par_iter()
        .map(|n| {
            for x in a {
                if ctx.norm(&iterate(x, n).try_sub(&ball.center)?)? < ball.radius {
                    return Ok(Some(n));
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(hits.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitPoint {
    pub representative: SparseVec,
    pub rep_n: u64,
    pub indices: Vec<u64>,
    /// Largest pairwise distance inside the cluster.
    pub diameter: f64,
}

/// Minimum cluster size reported as a limit point.
pub const MIN_CLUSTER: usize = 3;

/// Complete-linkage clustering of `{Bⁿx : n ≤ horizon}` at threshold `tol`.
///
/// Clusters of at least [`MIN_CLUSTER`] points are reported, with the member
/// of least eccentricity as representative; representatives of norm `≤ tol`
/// are dropped.
pub fn detect_limit_points(x: &SparseVec, ctx: &SpaceCtx, horizon: u64, tol: f64) -> Result<Vec<LimitPoint>> {
    ctx.mode().expect(x.mode())?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let pts: Vec<SparseVec> = (0..=horizon).map(|n| iterate(x, n)).collect();
    let m = pts.len();
    let rows = (0..m)
        .into_par_iter()
        .map(|i| {
            (0..m)
                .map(|j| {
                    if i == j {
                        Ok(0.0)
                    } else {
                        ctx.norm(&pts[i].try_sub(&pts[j])?)
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut clusters: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
    // linkage[a][b] = max pairwise distance between clusters a and b
    let mut link: Vec<Vec<f64>> = rows.clone();
    let mut alive: Vec<bool> = vec![true; m];
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..m {
            if !alive[a] {
                continue;
            }
            for b in a + 1..m {
                if alive[b] && link[a][b] < tol && best.map_or(true, |(d, _, _)| link[a][b] < d) {
                    best = Some((link[a][b], a, b));
                }
            }
        }
        let Some((_, a, b)) = best else { break };
        let moved = std::mem::take(&mut clusters[b]);
        clusters[a].extend(moved);
        alive[b] = false;
        for c in 0..m {
            let d = link[a][c].max(link[b][c]);
            link[a][c] = d;
            link[c][a] = d;
        }
    }

    let mut out = Vec::new();
    for (c, members) in clusters.iter_mut().enumerate() {
        if !alive[c] || members.len() < MIN_CLUSTER {
            continue;
        }
        members.sort_unstable();
        let ecc = |i: usize| members.iter().map(|&j| rows[i][j]).fold(0.0, f64::max);
        let rep = *members
            .iter()
            .min_by(|&&i, &&j| ecc(i).total_cmp(&ecc(j)).then(i.cmp(&j)))
            .expect("nonempty");
        if ctx.norm(&pts[rep])? <= tol {
            continue;
        }
        let diameter = members.iter().map(|&i| ecc(i)).fold(0.0, f64::max);
        out.push(LimitPoint {
            representative: pts[rep].clone(),
            rep_n: rep as u64,
            indices: members.iter().map(|&i| i as u64).collect(),
            diameter,
        });
    }
    out.sort_by_key(|lp| lp.indices[0]);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakLimitReport {
    pub holds: bool,
    pub max_norm: f64,
    /// Norm maxima grow across prefixes and the last third exceeds twice the
    /// first third.
    pub norm_growth: bool,
    pub tail_start: usize,
    /// Probe indices where some tail pairing misses `⟨y, e_i⟩` by `≥ tol`.
    pub probe_failures: Vec<i64>,
    pub tol: f64,
}

fn prefix_max(norms: &[f64], end: usize) -> f64 {
    norms[..end].iter().copied().fold(0.0, f64::max)
}

/// Weak convergence proxy: bounded norms plus convergence of the pairings
/// `⟨v, e_i⟩` for `|i| ≤ probe_radius` over the last third of the list.
pub fn weak_limit_check(
    vectors: &[SparseVec],
    y: &SparseVec,
    ctx: &SpaceCtx,
    probe_radius: u64,
    tol: f64,
) -> Result<WeakLimitReport> {
    ctx.require_dual()?;
    if vectors.is_empty() {
        return Err(Error::InvalidParameter("weak limit check needs vectors".into()));
    }
    ctx.mode().expect(y.mode())?;
    let len = vectors.len();
    let norms = vectors
        .iter()
        .map(|v| ctx.norm(v))
        .collect::<Result<Vec<f64>>>()?;
    let max_norm = norms.iter().copied().fold(0.0, f64::max);

    let third = len / 3;
    let norm_growth = third > 0 && {
        let (m1, m2, m3) = (
            prefix_max(&norms, third),
            prefix_max(&norms, len - third),
            max_norm,
        );
        let last = norms[len - third..].iter().copied().fold(0.0, f64::max);
        let first = norms[..third].iter().copied().fold(0.0, f64::max);
        m1 < m2 && m2 < m3 && last > 2.0 * first
    };

    let tail_start = len - third.max(1);
    let probes: Vec<i64> = ctx.mode().window(probe_radius).collect();
    let mut probe_failures = Vec::new();
    for &i in &probes {
        let e = SparseVec::basis(ctx.mode(), i)?;
        let target = ctx.pairing(y, &e)?;
        for v in &vectors[tail_start..] {
            ctx.mode().expect(v.mode())?;
            if (ctx.pairing(v, &e)? - target).norm() >= tol {
                probe_failures.push(i);
                break;
            }
        }
    }
    Ok(WeakLimitReport {
        holds: probe_failures.is_empty() && !norm_growth,
        max_norm,
        norm_growth,
        tail_start,
        probe_failures,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub holds: bool,
    /// Largest pairwise distance among the last third of the list.
    pub tail_diameter: f64,
    pub tail_start: usize,
    pub tol: f64,
}

/// Finite stand-in for convergence of a sequence: the last third of the list
/// has diameter below `tol`.
pub fn tail_cauchy(vectors: &[SparseVec], ctx: &SpaceCtx, tol: f64) -> Result<CauchyReport> {
    if vectors.is_empty() {
        return Err(Error::InvalidParameter("Cauchy check needs vectors".into()));
    }
    let len = vectors.len();
    let tail_start = len - (len / 3).max(1);
    let tail = &vectors[tail_start..];
    let mut diam: f64 = 0.0;
    for (a, u) in tail.iter().enumerate() {
        for v in &tail[a + 1..] {
            diam = diam.max(ctx.norm(&u.try_sub(v)?)?);
        }
    }
    Ok(CauchyReport {
        holds: diam < tol,
        tail_diameter: diam,
        tail_start,
        tol,
    })
}

/// Finite-horizon rule for the existence of `n_k ↑` with `sup ω_{n_k} < ∞`.
///
/// With `g = min ω` over `[0, H]` and `t = min ω` over `[H/2, H]`: `Holds`
/// when `t ≤ 2g`, witnesses are all `n` with `ω_n ≤ t` and `epsilon = 2g`.
/// `RefutedOnHorizon` when `ω` is strictly increasing on `[0, H]`.
/// Otherwise `Inconclusive`.
pub fn bounded_orbit_criterion(w: &WeightSeq, horizon: u64) -> Result<Verdict> {
    Mode::Unilateral.expect(w.mode())?;
    let h = horizon.min(i64::MAX as u64 / 2) as i64;
    let ln: Vec<f64> = (0..=h)
        .map(|n| w.ln_weight_at(n))
        .collect::<Result<Vec<_>>>()?;
    let global = ln.iter().copied().fold(f64::INFINITY, f64::min);
    let tail = ln[(h / 2) as usize..].iter().copied().fold(f64::INFINITY, f64::min);
    let ln2 = std::f64::consts::LN_2;
    let rule = Some(format!(
        "holds iff min over [{}, {h}] <= 2 * min over [0, {h}]; refuted iff strictly increasing",
        h / 2
    ));
    if tail <= global + ln2 {
        let witnesses = ln
            .iter()
            .enumerate()
            .filter(|(_, l)| **l <= tail)
            .map(|(n, l)| Witness {
                q: 0,
                n: n as u64,
                lambda_mod: None,
                achieved: l.exp(),
            })
            .collect();
        return Ok(Verdict {
            status: Status::Holds,
            horizon,
            epsilon: (global + ln2).exp(),
            witnesses,
            failing_q: Vec::new(),
            rule,
        });
    }
    let increasing = ln.windows(2).all(|p| p[1] > p[0]);
    Ok(Verdict {
        status: if increasing {
            Status::RefutedOnHorizon
        } else {
            Status::Inconclusive
        },
        horizon,
        epsilon: (global + ln2).exp(),
        witnesses: Vec::new(),
        failing_q: Vec::new(),
        rule,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointNorms {
    /// `ω_0²/ω_n` for `n = 0..=N`.
    pub values: Vec<f64>,
    /// max/min over the second half of the list exceeds [`UNBOUNDED_RATIO`].
    pub unbounded: bool,
}

pub const UNBOUNDED_RATIO: f64 = 1e6;

/// Norms `‖Sⁿe_0‖_q = ω_0²/ω_n` of the adjoint orbit of `e_0`.
pub fn adjoint_orbit_norms(ctx: &SpaceCtx, n_max: u64) -> Result<AdjointNorms> {
    Mode::Unilateral.expect(ctx.mode())?;
    ctx.require_dual()?;
    let w = &ctx.weight;
    let l0 = w.ln_weight_at(0)?;
    let w0 = w.weight_at(0)?;
    let values = (0..=n_max.min(i64::MAX as u64 / 2) as i64)
        .map(|n| {
            if let Ok(wn) = w.weight_at(n) {
                let v = w0 * w0 / wn;
                if wn.is_normal() && v.is_normal() {
                    return Ok(v);
                }
            }
            Ok((2.0 * l0 - w.ln_weight_at(n)?).exp())
        })
        .collect::<Result<Vec<f64>>>()?;
    let tail = &values[values.len() / 2..];
    let hi = tail.iter().copied().fold(0.0, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(AdjointNorms {
        unbounded: hi > UNBOUNDED_RATIO * lo,
        values,
    })
}
