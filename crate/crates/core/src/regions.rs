//! The good/bad-region boundary `K_n` and the geometric inequalities it
//! controls.
//!
//! `K_n(b)` is the largest `j` such that every point of
//! `W_n^0(j) ∩ I^h x I^h` stays `b ||eps_n||` away from the tip in the
//! x-coordinate. Rescaling levels `j <= K_n` form the good region (the map
//! behaves one-dimensionally there); deeper levels form the bad region.

use crate::henon::Point;
use crate::renorm::{level_manifolds, RenormTower};
use crate::unimodal::unimodal_points;
use crate::{Error, Result};
use serde::Serialize;

/// Cap on the rescaling level for manifold pullbacks; beyond this
/// `lambda^{-2j} < 1e-9` and double precision cannot separate the graphs
/// from the tip.
pub const J_MAX_CAP: usize = 12;

/// The boundary value: finite, or unbounded within the computed cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum KBound {
    #[serde(rename = "finite")]
    Finite { k: usize },
    #[serde(rename = "infinite")]
    InfiniteCapped { cap: usize },
}

impl KBound {
    pub fn is_good(&self, j: usize) -> bool {
        match *self {
            KBound::Finite { k } => j <= k,
            KBound::InfiniteCapped { .. } => true,
        }
    }

    pub fn finite(&self) -> Option<usize> {
        match *self {
            KBound::Finite { k } => Some(k),
            KBound::InfiniteCapped { .. } => None,
        }
    }
}

/// `K_n` with its witnesses: per `j`, the minimum of
/// `|pi_x z - pi_x tau_n|` over `W_n^0(j) ∩ I^h x I^h`.
#[derive(Debug, Clone, Serialize)]
pub struct RegionBoundary {
    pub n: usize,
    pub b: f64,
    pub k: KBound,
    pub eps_norm: f64,
    pub witnesses: Vec<(usize, f64)>,
}

/// Witness distance of one pulled-back graph to the tip, restricted to
/// `I^h x I^h`.
fn witness(graph: &crate::manifolds::VerticalGraph, tip: Point, ih: crate::fnrep::Interval) -> f64 {
    graph
        .heights
        .iter()
        .zip(&graph.xs)
        .filter(|(&y, &x)| ih.contains(y) && ih.contains(x))
        .map(|(_, &x)| (x - tip.x).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Compute `K_n(b)`: walk `j = 1, 2, ...` until the witness condition
/// fails. Degenerate levels (or `||eps_n|| = 0`) report the infinite marker
/// with the cap.
pub fn compute_k(tower: &RenormTower, n: usize, b: f64) -> Result<RegionBoundary> {
    if n >= tower.levels.len() {
        return Err(Error::Tip(format!("level {n} not built")));
    }
    let level = tower.level(n);
    let eps_norm = level.eps_norm;
    let tip = level
        .tip
        .ok_or_else(|| Error::Tip(format!("tip unavailable at level {n}")))?;
    let ih = level.map.ih;
    let avail = (tower.levels.len() - 1 - n).min(J_MAX_CAP);
    let set = level_manifolds(tower, n, avail)?;
    let mut witnesses = Vec::new();
    for lm in set.sets.iter().filter(|lm| lm.j >= 1) {
        witnesses.push((lm.j, witness(&lm.w0, tip, ih)));
    }
    if level.map.is_degenerate() || eps_norm == 0.0 {
        return Ok(RegionBoundary {
            n,
            b,
            k: KBound::InfiniteCapped { cap: avail },
            eps_norm,
            witnesses,
        });
    }
    let threshold = b * eps_norm;
    let mut k = 0usize;
    for &(j, w) in &witnesses {
        if w > threshold {
            k = j;
        } else {
            return Ok(RegionBoundary {
                n,
                b,
                k: KBound::Finite { k },
                eps_norm,
                witnesses,
            });
        }
    }
    // The condition never failed within the computable range.
    if let Some(reason) = &set.truncated {
        return Err(Error::Partition(format!(
            "K_{n} undetermined: witnesses all pass up to j = {k} but manifolds stop ({reason}); \
             partial witnesses: {witnesses:?}"
        )));
    }
    Err(Error::Partition(format!(
        "K_{n} undetermined: witnesses all pass up to the cap j = {k}; \
         partial witnesses: {witnesses:?}"
    )))
}

/// Good/bad classification of a rescaling level `j >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RegionKind {
    Good,
    Bad,
}

pub fn region_of(boundary: &RegionBoundary, j: usize) -> RegionKind {
    assert!(j >= 1, "rescaling levels start at 1");
    if boundary.k.is_good(j) {
        RegionKind::Good
    } else {
        RegionKind::Bad
    }
}

/// Report of the sampled geometry checks behind the good/bad split.
#[derive(Debug, Clone, Serialize)]
pub struct RegionGeometryReport {
    pub n: usize,
    pub b: f64,
    pub k: KBound,
    /// (i) `C_n^r(j) ∩ F_n(D_n) = ∅` for good `j`: number of image samples
    /// violating it (0 = pass).
    pub right_component_hits: usize,
    /// (ii) min of `|pi_x z - pi_x tau_n| / (b ||eps||)` over image samples
    /// in good-region `C_n(j)` (pass when > 1).
    pub good_tip_clearance: f64,
    /// (iii) min of `|pi_x z - v_n| / sqrt(b ||eps||)` over `B_n(j)`,
    /// `j <= K` (the fitted constant of the lower bound).
    pub good_center_clearance: f64,
    /// (iv) max of `|pi_x z - pi_x tau_n| / (b ||eps||)` over bad-region
    /// image samples, and max of `|pi_x z - v_n| / sqrt(b ||eps||)` over
    /// bad-region `B` samples (the fitted constants of the upper bounds).
    pub bad_tip_bound: f64,
    pub bad_center_bound: f64,
    /// Quadratic bridge: min `|pi_x z - v_n| / sqrt(b ||eps||)` over
    /// `I^B`-grid points whose image stays `b ||eps||` from the tip.
    pub quadratic_bridge: f64,
    pub samples_good: usize,
    pub samples_bad: usize,
}

/// Classify an image point into a left/right rescaling-level component by
/// the pulled-back manifolds. Returns `(j, is_right_component)`.
fn c_level_of(sets: &[crate::renorm::LevelManifolds], z: Point) -> Option<(usize, bool)> {
    // sets[j].w0 / w2 are W^0(j), W^2(j); C^l(j) lies between W^0(j-1) and
    // W^0(j), C^r(j) between W^2(j) and W^2(j-1).
    for j in 1..sets.len() {
        let l_prev = sets[j - 1].w0.eval(z.y);
        let l_cur = sets[j].w0.eval(z.y);
        if z.x > l_prev && z.x < l_cur {
            return Some((j, false));
        }
        let r_cur = sets[j].w2.eval(z.y);
        let r_prev = sets[j - 1].w2.eval(z.y);
        if z.x > r_cur && z.x < r_prev {
            return Some((j, true));
        }
    }
    None
}

/// Sampled verification of the good/bad-region geometry at level `n`.
pub fn verify_region_geometry(
    tower: &RenormTower,
    n: usize,
    boundary: &RegionBoundary,
) -> Result<RegionGeometryReport> {
    let level = tower.level(n);
    let map = &level.map;
    let tip = level
        .tip
        .ok_or_else(|| Error::Tip(format!("tip unavailable at level {n}")))?;
    let pts = unimodal_points(&map.f)?;
    let v_n = pts.c;
    let eps = level.eps_norm.max(f64::MIN_POSITIVE);
    let b = boundary.b;
    let scale_tip = b * eps;
    let scale_center = (b * eps).sqrt();
    let avail = (tower.levels.len() - 1 - n).min(J_MAX_CAP);
    let set = level_manifolds(tower, n, avail)?;
    let k_good = match boundary.k {
        KBound::Finite { k } => k,
        KBound::InfiniteCapped { cap } => cap,
    };

    let mut right_hits = 0usize;
    let mut good_tip = f64::INFINITY;
    let mut good_center = f64::INFINITY;
    let mut bad_tip: f64 = 0.0;
    let mut bad_center: f64 = 0.0;
    let mut n_good = 0usize;
    let mut n_bad = 0usize;

    // Forward images of a D-sample grid.
    let grid = 100;
    let strip = crate::fnrep::Interval::new(
        level.partition.w0_m1.x_hull().0.max(map.iv.lo),
        level.partition.w2_m1.x_hull().1.min(map.iv.hi),
    );
    for i in 0..grid {
        let y = strip.lo + (i as f64 + 0.5) / grid as f64 * strip.len();
        let (dlo, dhi) = level.partition.d_interval_at(y);
        for jx in 0..grid {
            let x = dlo + (jx as f64 + 0.5) / grid as f64 * (dhi - dlo);
            let z = Point::new(x, y);
            let img = map.apply(z);
            if !map.ih.contains(img.x) || !map.ih.contains(img.y) {
                continue;
            }
            if let Some((j, right)) = c_level_of(&set.sets, img) {
                let tip_ratio = (img.x - tip.x).abs() / scale_tip;
                let center_ratio = (z.x - v_n).abs() / scale_center;
                if j <= k_good {
                    n_good += 1;
                    if right {
                        right_hits += 1;
                    }
                    good_tip = good_tip.min(tip_ratio);
                    good_center = good_center.min(center_ratio);
                } else {
                    n_bad += 1;
                    bad_tip = bad_tip.max(tip_ratio);
                    bad_center = bad_center.max(center_ratio);
                }
            }
        }
    }

    // Quadratic bridge on the central interval: points whose image stays
    // b||eps|| from the tip keep sqrt(b||eps||) from the center.
    let mut bridge = f64::INFINITY;
    let ib = crate::fnrep::Interval::new(pts.p1, pts.q0);
    for i in 0..257 {
        let x = ib.lo + (i as f64 + 0.5) / 257.0 * ib.len();
        for &y in &strip.linspace(17) {
            let hx = map.h(x, y);
            if (hx - tip.x).abs() >= scale_tip {
                bridge = bridge.min((x - v_n).abs() / scale_center);
            }
        }
    }

    Ok(RegionGeometryReport {
        n,
        b,
        k: boundary.k,
        right_component_hits: right_hits,
        good_tip_clearance: good_tip,
        good_center_clearance: good_center,
        bad_tip_bound: bad_tip,
        bad_center_bound: bad_center,
        quadratic_bridge: bridge,
        samples_good: n_good,
        samples_bad: n_bad,
    })
}

/// Fitted quadratic-behavior constant on `I^B`: the smallest `a` with
/// `(1/a) |x - v| <= |f'(x)| <= a |x - v|` on sampled points.
pub fn quadratic_center_constant(tower: &RenormTower, n: usize) -> Result<f64> {
    let map = &tower.level(n).map;
    let pts = unimodal_points(&map.f)?;
    let df = map.f.deriv();
    let mut a: f64 = 1.0;
    let ib = crate::fnrep::Interval::new(pts.p1, pts.q0);
    for i in 0..257 {
        let x = ib.lo + (i as f64 + 0.5) / 257.0 * ib.len();
        let d = (x - pts.c).abs();
        if d < 1e-6 {
            continue;
        }
        let ratio = df.eval(x).abs() / d;
        a = a.max(ratio).max(1.0 / ratio);
    }
    Ok(a)
}
