//! Local stable manifolds as vertical graphs, the contraction-mapping graph
//! pullback, and the `A/B/C` partition of the dynamical domain `D`.
//!
//! Every stable manifold here is the graph of a function `x = gamma(y)` over
//! the vertical domain, with a certified Lipschitz bound
//! `||eps|| / (delta (m - L))` coming from the contraction-mapping argument:
//! the preimage point at height `y` is the unique fixed point of
//! `T = h_y^{-1} . gamma`, which contracts by `L/m`.

use crate::fnrep::Interval;
use crate::henon::{HenonMap, Point, SaddlePoint};
use crate::unimodal::unimodal_points;
use crate::{Error, Result};
use rayon::prelude::*;

/// Number of graph heights (Chebyshev-Lobatto spaced over `I^v`).
pub const GRAPH_HEIGHTS: usize = 257;

/// Sup-change threshold for the graph-transform iteration.
const GRAPH_FIXED_TOL: f64 = 1e-11;

/// Per-height fixed-point iteration tolerance.
const HEIGHT_FIXED_TOL: f64 = 1e-13;

/// Allowed excess of measured slope over the certified Lipschitz bound.
const LIPSCHITZ_SLACK: f64 = 1e-6;

/// Maximum graph-transform sweeps when converging a stable manifold.
const MAX_SWEEPS: usize = 500;

/// A sampled vertical graph `x = gamma(y)` with a certified Lipschitz bound.
#[derive(Debug, Clone)]
pub struct VerticalGraph {
    /// Sample heights, ascending, spanning the vertical domain.
    pub heights: Vec<f64>,
    /// Graph values `gamma(heights[i])`.
    pub xs: Vec<f64>,
    /// Certified Lipschitz constant (`0` for exact vertical lines).
    pub lipschitz: f64,
    pub label: String,
}

/// Chebyshev-Lobatto heights (endpoints included), ascending.
pub fn lobatto_heights(iv: Interval, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| iv.from_unit(-(std::f64::consts::PI * k as f64 / (n - 1) as f64).cos()))
        .collect()
}

impl VerticalGraph {
    pub fn vertical_line(x0: f64, iv: Interval, label: impl Into<String>) -> Self {
        let heights = lobatto_heights(iv, GRAPH_HEIGHTS);
        let xs = vec![x0; GRAPH_HEIGHTS];
        Self {
            heights,
            xs,
            lipschitz: 0.0,
            label: label.into(),
        }
    }

    /// Local cubic interpolation between samples (clamped at the ends).
    /// Linear interpolation at 257 heights leaves a ~1e-9 discretization
    /// bias mid-domain, which is exactly the saddle-containment tolerance;
    /// cubic keeps the graph-transform fixed point well below it.
    pub fn eval(&self, y: f64) -> f64 {
        let n = self.heights.len();
        if y <= self.heights[0] {
            return self.xs[0];
        }
        if y >= self.heights[n - 1] {
            return self.xs[n - 1];
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.heights[mid] <= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Four-point stencil around the bracketing segment.
        let first = lo.saturating_sub(1).min(n - 4);
        let hs = &self.heights[first..first + 4];
        let vs = &self.xs[first..first + 4];
        // Lagrange interpolation on the stencil.
        let mut acc = 0.0;
        for i in 0..4 {
            let mut w = vs[i];
            for j in 0..4 {
                if i != j {
                    w *= (y - hs[j]) / (hs[i] - hs[j]);
                }
            }
            acc += w;
        }
        acc
    }

    /// Max slope between adjacent samples.
    pub fn measured_lipschitz(&self) -> f64 {
        self.heights
            .windows(2)
            .zip(self.xs.windows(2))
            .map(|(h, x)| ((x[1] - x[0]) / (h[1] - h[0])).abs())
            .fold(0.0, f64::max)
    }

    /// Hull of the graph values.
    pub fn x_hull(&self) -> (f64, f64) {
        let lo = self.xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Sup distance to another graph sampled at shared heights.
    pub fn sup_distance(&self, other: &VerticalGraph) -> f64 {
        self.heights
            .iter()
            .zip(&self.xs)
            .map(|(&y, &x)| (x - other.eval(y)).abs())
            .fold(0.0, f64::max)
    }

    /// CSV export: header names the label and certified Lipschitz bound,
    /// rows are `y,x`.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# label={} lipschitz={:.17e}\ny,x\n",
            self.label, self.lipschitz
        );
        for (y, x) in self.heights.iter().zip(&self.xs) {
            out.push_str(&format!("{y:.17e},{x:.17e}\n"));
        }
        out
    }
}

/// Pullback statistics alongside the resulting graph.
#[derive(Debug, Clone)]
pub struct PullbackOutcome {
    pub graph: VerticalGraph,
    /// Max observed per-height iteration contraction factor (`<= L/m`).
    pub contraction: f64,
    /// Max per-height iteration count.
    pub iters: usize,
}

/// Pull a vertical graph back through `F` on the monotone branch `uprime`.
///
/// Preconditions (verified numerically per sampled height): `h_y(U') ⊇ U`,
/// `inf_{U'} |dh/dx| >= m`, `L < m`, and the input graph is `L`-Lipschitz.
/// The output carries the certified Lipschitz bound
/// `||eps|| / (delta (m - L))` and its measured slope must not exceed the
/// bound plus slack.
pub fn graph_pullback(
    map: &HenonMap,
    gamma: &VerticalGraph,
    u: Interval,
    uprime: Interval,
    m: f64,
    lip: f64,
    label: impl Into<String>,
) -> Result<PullbackOutcome> {
    if gamma.lipschitz > lip * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::PullbackPrecondition {
            y: f64::NAN,
            reason: format!(
                "input graph certificate {} exceeds L = {lip}",
                gamma.lipschitz
            ),
        });
    }
    if lip >= m {
        return Err(Error::PullbackPrecondition {
            y: f64::NAN,
            reason: format!("need L < m, got L = {lip}, m = {m}"),
        });
    }
    let heights = lobatto_heights(map.iv, GRAPH_HEIGHTS);
    // Precondition sweep on a subsample of heights: branch expansion and
    // interval coverage.
    for &y in heights.iter().step_by(8) {
        let mut min_d = f64::INFINITY;
        let mut sign = 0.0;
        for &x in &uprime.linspace(33) {
            let d = map.dh_dx(x, y);
            if sign == 0.0 {
                sign = d.signum();
            } else if d.signum() != sign {
                return Err(Error::PullbackPrecondition {
                    y,
                    reason: format!("h_y not monotone on [{}, {}]", uprime.lo, uprime.hi),
                });
            }
            min_d = min_d.min(d.abs());
        }
        if min_d < m {
            return Err(Error::PullbackPrecondition {
                y,
                reason: format!("sampled |dh/dx| = {min_d} below certified m = {m}"),
            });
        }
        let (ha, hb) = (map.h(uprime.lo, y), map.h(uprime.hi, y));
        if ha.min(hb) > u.lo || ha.max(hb) < u.hi {
            return Err(Error::PullbackPrecondition {
                y,
                reason: format!(
                    "h_y(U') = [{:.6}, {:.6}] does not cover U = [{:.6}, {:.6}]",
                    ha.min(hb),
                    ha.max(hb),
                    u.lo,
                    u.hi
                ),
            });
        }
    }

    let solved: Vec<Result<(f64, f64, usize)>> = crate::with_pool(|| {
        heights
            .par_iter()
            .map(|&y| {
                let mut x = gamma.eval(y).clamp(uprime.lo, uprime.hi);
                let mut prev_step = f64::NAN;
                let mut contraction: f64 = 0.0;
                for it in 0..200 {
                    let target = gamma.eval(x);
                    let next = map.invert_h_warm(y, target, uprime, x)?;
                    let step = (next - x).abs();
                    if prev_step.is_finite() && prev_step > 1e-300 {
                        contraction = contraction.max(step / prev_step);
                    }
                    x = next;
                    if step < HEIGHT_FIXED_TOL {
                        return Ok((x, contraction, it + 1));
                    }
                    prev_step = step;
                }
                Err(Error::ContractionFailure { y, iters: 200 })
            })
            .collect()
    });
    let mut xs = Vec::with_capacity(heights.len());
    let mut contraction: f64 = 0.0;
    let mut iters = 0;
    for r in solved {
        let (x, c, it) = r?;
        xs.push(x);
        contraction = contraction.max(c);
        iters = iters.max(it);
    }
    let certified = if map.eps_norm() == 0.0 {
        0.0
    } else {
        map.eps_norm() / (map.delta * (m - lip))
    };
    let graph = VerticalGraph {
        heights,
        xs,
        lipschitz: certified,
        label: label.into(),
    };
    let measured = graph.measured_lipschitz();
    if measured > certified + LIPSCHITZ_SLACK {
        return Err(Error::LipschitzCertificate {
            measured,
            certified,
        });
    }
    Ok(PullbackOutcome {
        graph,
        contraction,
        iters,
    })
}

/// Estimate the branch expansion constant `m`: sampled minimum of
/// `|dh/dx|` over `U' x I^v` minus a 1% safety margin.
pub fn estimate_branch_expansion(map: &HenonMap, uprime: Interval) -> f64 {
    let mut min_d = f64::INFINITY;
    for &y in &map.iv.linspace(33) {
        for &x in &uprime.linspace(65) {
            min_d = min_d.min(map.dh_dx(x, y).abs());
        }
    }
    0.99 * min_d
}

/// X-positions of the five degenerate partition lines
/// `[q(-1), p1, q0, p2, qhat(-1)]` of the unimodal part.
pub fn degenerate_lines(map: &HenonMap) -> Result<[f64; 5]> {
    let pts = unimodal_points(&map.f)?;
    // Reflection of q(-1): right preimage of the fixed-point value.
    let qhat = crate::fnrep::find_root(|x| map.f.eval(x) - pts.q_minus1, pts.c, map.ih.hi, 1e-13)
        .map_err(|_| Error::Partition("no right preimage of q(-1)".into()))?;
    Ok([pts.q_minus1, pts.p1, pts.q0, pts.p2, qhat])
}

/// The monotone side of the unimodal part containing `x0`, kept clear of
/// the critical point.
fn monotone_side(map: &HenonMap, c: f64, x0: f64) -> Result<Interval> {
    let gap = 0.1 * (x0 - c).abs();
    if gap <= 0.0 {
        return Err(Error::Partition(format!(
            "branch center {x0} coincides with c"
        )));
    }
    Ok(if x0 > c {
        Interval::new(c + gap, map.ih.hi)
    } else {
        Interval::new(map.ih.lo, c - gap)
    })
}

/// Choose `U'` as the preimage of `U` on the monotone side, sampled over
/// heights and padded 5%: coverage `h_y(U') ⊇ U` then holds by
/// construction, even when the image center wanders by `O(||eps||)` with
/// the height.
fn coverage_branch(map: &HenonMap, u: Interval, side: Interval) -> Result<Interval> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &y in &map.iv.linspace(33) {
        for target in [u.lo, u.hi] {
            let x = map.invert_h(y, target, side)?;
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    let margin = 0.05 * (hi - lo) + 1e-6;
    Ok(clip_to(side, Interval::new(lo - margin, hi + margin)))
}

/// Converge the local stable manifold through a saddle by iterating the
/// graph pullback on the monotone branch through the fixed point, starting
/// from the vertical line `x = p.x`.
pub fn local_stable_at_saddle(
    map: &HenonMap,
    p: &SaddlePoint,
    label: impl Into<String>,
) -> Result<VerticalGraph> {
    let pts = unimodal_points(&map.f)?;
    let side = monotone_side(map, pts.c, p.x)?;
    // The sweep iteration contracts like 1/(m - L) with the certificate
    // L = ||eps||/(delta (m - L)); m >= 1.05 + ||eps||/delta guarantees
    // m - L >= 1.05.
    let m_min = 1.05 + map.eps_norm() / map.delta;
    let label = label.into();
    let mut graph = VerticalGraph::vertical_line(p.x, map.iv, label.clone());
    for _ in 0..MAX_SWEEPS {
        let (ulo, uhi) = graph.x_hull();
        let pad = 1e-9 + 0.01 * (uhi - ulo);
        let u = Interval::new(ulo - pad, uhi + pad);
        let uprime = coverage_branch(map, u, side)?;
        let m = estimate_branch_expansion(map, uprime);
        if m < m_min {
            return Err(Error::Partition(format!(
                "branch through saddle x = {} too weak: m = {m} < {m_min}",
                p.x
            )));
        }
        let out = graph_pullback(map, &graph, u, uprime, m, graph.lipschitz, label.clone())?;
        let change = out.graph.sup_distance(&graph);
        graph = out.graph;
        if change < GRAPH_FIXED_TOL {
            let at_p = graph.eval(p.y);
            if (at_p - p.x).abs() > 1e-9 {
                return Err(Error::Partition(format!(
                    "converged graph misses saddle: |gamma(p.y) - p.x| = {:.2e}",
                    (at_p - p.x).abs()
                )));
            }
            return Ok(graph);
        }
    }
    Err(Error::ContractionFailure {
        y: p.y,
        iters: MAX_SWEEPS,
    })
}

fn clip_to(outer: Interval, inner: Interval) -> Interval {
    Interval::new(inner.lo.max(outer.lo), inner.hi.min(outer.hi))
}

/// The five ordered local stable manifolds and the saddles they hang off.
#[derive(Debug, Clone)]
pub struct Partition {
    /// `W^0(-1) < W^1(0) < W^0(0) < W^2(0) < W^2(-1)` at every height.
    pub w0_m1: VerticalGraph,
    pub w1_0: VerticalGraph,
    pub w0_0: VerticalGraph,
    pub w2_0: VerticalGraph,
    pub w2_m1: VerticalGraph,
    pub p_minus1: SaddlePoint,
    pub p0: SaddlePoint,
}

/// Region labels for [`classify_point`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum Region {
    OutsideD,
    A,
    B,
    C,
    OnManifold(String),
}

impl Region {
    pub fn short(&self) -> String {
        match self {
            Region::OutsideD => "outside-D".into(),
            Region::A => "A".into(),
            Region::B => "B".into(),
            Region::C => "C".into(),
            Region::OnManifold(w) => format!("on({w})"),
        }
    }
}

/// Tolerance for classifying a point as lying on a manifold.
pub const ON_MANIFOLD_TOL: f64 = 1e-9;

/// Build the five local stable manifolds and assemble the partition.
///
/// `W^0(-1)` and `W^0(0)` come from the graph transform at the saddles;
/// `W^1(0)` is the preimage component of `W^0(0)` on the increasing branch
/// through `p1`; `W^2(0)` the preimage of `W^1(0)` right of `W^0(0)`;
/// `W^2(-1)` the preimage of `W^0(-1)` disjoint from it.
pub fn build_partition(map: &HenonMap) -> Result<Partition> {
    let (pm1, p0) = crate::henon::fixed_points(map)?;
    let lines = degenerate_lines(map)?;
    let [_, p1_line, _, p2_line, qhat_line] = lines;
    let w0_m1 = local_stable_at_saddle(map, &pm1, "W0(-1)")?;
    let w0_0 = local_stable_at_saddle(map, &p0, "W0(0)")?;
    let pts = unimodal_points(&map.f)?;

    let pull = |source: &VerticalGraph, center: f64, label: &str| -> Result<VerticalGraph> {
        let side = monotone_side(map, pts.c, center)?;
        let (ulo, uhi) = source.x_hull();
        let pad = 1e-9 + 0.01 * (uhi - ulo);
        let u = Interval::new(ulo - pad, uhi + pad);
        let uprime = coverage_branch(map, u, side)?;
        let m = estimate_branch_expansion(map, uprime);
        // A single pullback only needs m > L.
        if m <= 1.2 * source.lipschitz + 1e-3 {
            return Err(Error::Partition(format!(
                "{label}: branch around {center} not expanding past L (m = {m})"
            )));
        }
        let out = graph_pullback(map, source, u, uprime, m, source.lipschitz, label)?;
        Ok(out.graph)
    };

    let w1_0 = pull(&w0_0, p1_line, "W1(0)")?;
    let w2_0 = pull(&w1_0, p2_line, "W2(0)")?;
    let w2_m1 = pull(&w0_m1, qhat_line, "W2(-1)")?;

    let partition = Partition {
        w0_m1,
        w1_0,
        w0_0,
        w2_0,
        w2_m1,
        p_minus1: pm1,
        p0,
    };
    partition.verify_order()?;
    Ok(partition)
}

impl Partition {
    pub fn graphs(&self) -> [&VerticalGraph; 5] {
        [&self.w0_m1, &self.w1_0, &self.w0_0, &self.w2_0, &self.w2_m1]
    }

    fn verify_order(&self) -> Result<()> {
        let gs = self.graphs();
        for &y in &self.w0_m1.heights {
            for w in gs.windows(2) {
                if w[0].eval(y) >= w[1].eval(y) {
                    return Err(Error::Partition(format!(
                        "graphs {} and {} out of order at height {y}",
                        w[0].label, w[1].label
                    )));
                }
            }
        }
        Ok(())
    }

    /// The `B` strip bounds `(W^1(0), W^0(0))` at height `y`.
    pub fn b_interval_at(&self, y: f64) -> (f64, f64) {
        (self.w1_0.eval(y), self.w0_0.eval(y))
    }

    /// The `C` strip bounds `(W^0(0), W^2(0))` at height `y`.
    pub fn c_interval_at(&self, y: f64) -> (f64, f64) {
        (self.w0_0.eval(y), self.w2_0.eval(y))
    }

    /// The `D` domain bounds `(W^0(-1), W^2(-1))` at height `y`.
    pub fn d_interval_at(&self, y: f64) -> (f64, f64) {
        (self.w0_m1.eval(y), self.w2_m1.eval(y))
    }
}

/// Classify `z` against the partition graphs at its height.
pub fn classify_point(partition: &Partition, z: Point) -> Region {
    let x = z.x;
    for g in partition.graphs() {
        if (x - g.eval(z.y)).abs() <= ON_MANIFOLD_TOL {
            return Region::OnManifold(g.label.clone());
        }
    }
    let [x0m1, x10, x00, x20, x2m1] = partition.graphs().map(|g| g.eval(z.y));
    if x < x0m1 || x > x2m1 {
        Region::OutsideD
    } else if x < x10 {
        Region::A
    } else if x < x00 {
        Region::B
    } else if x < x20 {
        Region::C
    } else {
        Region::A
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::henon::{EpsKind, EpsSpec, MapSpec};

    fn example_map() -> HenonMap {
        MapSpec::worked_example().build().unwrap()
    }

    fn degenerate_map() -> HenonMap {
        let mut spec = MapSpec::worked_example();
        spec.eps = EpsSpec::Tagged(EpsKind::Zero);
        spec.build().unwrap()
    }

    #[test]
    fn degenerate_pullback_of_vertical_line_is_vertical() {
        let m = degenerate_map();
        // f monotone decreasing on C-side branch; preimage of x = 0.2 line.
        let branch = Interval::new(0.2, 1.05);
        let mexp = estimate_branch_expansion(&m, branch);
        let gamma = VerticalGraph::vertical_line(0.2, m.iv, "line");
        let out = graph_pullback(
            &m,
            &gamma,
            Interval::new(0.2 - 1e-9, 0.2 + 1e-9),
            branch,
            mexp,
            0.0,
            "pre",
        )
        .unwrap();
        assert_eq!(out.graph.lipschitz, 0.0, "eps = 0 collapses the bound");
        assert!(out.graph.measured_lipschitz() < 1e-12);
        // x = f^{-1}(0.2) on that branch.
        let x = m.invert_h(0.0, 0.2, branch).unwrap();
        assert!((out.graph.eval(0.3) - x).abs() < 1e-10);
    }

    #[test]
    fn pullback_fixed_point_property_on_example() {
        let m = example_map();
        let (_, p0) = crate::henon::fixed_points(&m).unwrap();
        let w00 = local_stable_at_saddle(&m, &p0, "W0(0)").unwrap();
        // Forward image of graph points lands on the same graph (invariance).
        for k in 0..50 {
            let y = m.ih.lo + (k as f64 + 0.5) / 50.0 * m.ih.len();
            let z = Point::new(w00.eval(y), y);
            let img = m.apply(z);
            let dist = (img.x - w00.eval(img.y)).abs();
            assert!(dist < 1e-8, "invariance off by {dist:.2e} at y = {y}");
        }
    }

    #[test]
    fn pullback_lipschitz_bound_on_example() {
        let m = example_map();
        let (_, p0) = crate::henon::fixed_points(&m).unwrap();
        let w00 = local_stable_at_saddle(&m, &p0, "W0(0)").unwrap();
        assert!(w00.measured_lipschitz() <= w00.lipschitz + 1e-6);
        assert!(w00.lipschitz < 0.2, "bound should be O(||eps||)");
    }

    #[test]
    fn pullback_contraction_factor_within_certificate() {
        // The reported per-height iteration contraction stays below L/m.
        let m = example_map();
        let (_, p0) = crate::henon::fixed_points(&m).unwrap();
        let w00 = local_stable_at_saddle(&m, &p0, "W0(0)").unwrap();
        let uprime = Interval::new(p0.x - 0.08, p0.x + 0.08);
        let mest = estimate_branch_expansion(&m, uprime);
        let (ulo, uhi) = w00.x_hull();
        let u = Interval::new(ulo - 1e-9, uhi + 1e-9);
        let out = graph_pullback(&m, &w00, u, uprime, mest, w00.lipschitz, "again").unwrap();
        assert!(
            out.contraction <= w00.lipschitz / mest + 1e-3,
            "contraction {} vs L/m = {}",
            out.contraction,
            w00.lipschitz / mest
        );
    }

    #[test]
    fn pullback_precondition_failures_name_the_height() {
        let m = example_map();
        let gamma = VerticalGraph::vertical_line(0.2, m.iv, "line");
        // Branch straddling the critical point: not monotone.
        let res = graph_pullback(
            &m,
            &gamma,
            Interval::new(0.19, 0.21),
            Interval::new(-0.4, 0.4),
            1.0,
            0.0,
            "bad",
        );
        match res {
            Err(Error::PullbackPrecondition { y, .. }) => assert!(y.is_finite()),
            other => panic!("expected precondition failure, got {other:?}"),
        }
    }

    #[test]
    fn partition_of_degenerate_map_is_five_vertical_lines() {
        let m = degenerate_map();
        let p = build_partition(&m).unwrap();
        for g in p.graphs() {
            assert!(
                g.measured_lipschitz() < 1e-10,
                "{} has slope {:.2e}",
                g.label,
                g.measured_lipschitz()
            );
        }
        // 1-D oracle: roots of f for the five lines.
        let pts = unimodal_points(&m.f).unwrap();
        let a = 1.7996565_f64;
        let q0 = (-1.0 + (1.0 + 4.0 * a * (a - 1.0)).sqrt()) / (2.0 * a);
        assert!((p.w0_m1.eval(0.0) + 1.0).abs() < 1e-9);
        assert!((p.w0_0.eval(0.0) - q0).abs() < 1e-9);
        assert!((p.w1_0.eval(0.0) - pts.p1).abs() < 1e-9);
        assert!((p.w2_0.eval(0.0) - pts.p2).abs() < 1e-9);
        assert!((p.w2_m1.eval(0.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn partition_of_example_map_keeps_order_and_small_slopes() {
        let m = example_map();
        let p = build_partition(&m).unwrap();
        let eps = m.eps_norm();
        for g in p.graphs() {
            assert!(
                g.measured_lipschitz() < 3.0 * eps / (m.delta),
                "{}: {}",
                g.label,
                g.measured_lipschitz()
            );
        }
    }

    #[test]
    fn invariance_chain_of_preimages() {
        // F(W^1(0)) lies on W^0(0), F(W^2(0)) on W^1(0), F(W^2(-1)) on W^0(-1).
        let m = example_map();
        let p = build_partition(&m).unwrap();
        let pairs = [(&p.w1_0, &p.w0_0), (&p.w2_0, &p.w1_0), (&p.w2_m1, &p.w0_m1)];
        for (src, dst) in pairs {
            for k in 0..25 {
                let y = m.ih.lo + (k as f64 + 0.5) / 25.0 * m.ih.len();
                let img = m.apply(Point::new(src.eval(y), y));
                let dist = (img.x - dst.eval(img.y)).abs();
                assert!(
                    dist < 1e-8,
                    "F({}) misses {} by {dist:.2e}",
                    src.label,
                    dst.label
                );
            }
        }
    }

    #[test]
    fn classify_points_of_example() {
        let m = example_map();
        let p = build_partition(&m).unwrap();
        assert_eq!(
            classify_point(&p, p.p0.point()),
            Region::OnManifold("W0(0)".into())
        );
        // Degenerate-oracle interval membership: x = 0 is inside B.
        assert_eq!(classify_point(&p, Point::new(0.0, 0.0)), Region::B);
        let far_left = Point::new(m.ih.lo + 1e-3, 0.0);
        assert_eq!(classify_point(&p, far_left), Region::OutsideD);
        assert_eq!(classify_point(&p, Point::new(0.6, 0.0)), Region::C);
        assert_eq!(classify_point(&p, Point::new(-0.8, 0.2)), Region::A);
        assert_eq!(classify_point(&p, Point::new(0.95, -0.2)), Region::A);
    }

    #[test]
    fn dynamics_f_of_c_lands_in_b() {
        let m = example_map();
        let p = build_partition(&m).unwrap();
        let mut checked = 0;
        for i in 0..20 {
            let y = m.ih.lo + (i as f64 + 0.5) / 20.0 * m.ih.len();
            let (clo, chi) = p.c_interval_at(y);
            for j in 0..10 {
                let x = clo + (j as f64 + 0.5) / 10.0 * (chi - clo);
                let img = m.apply(Point::new(x, y));
                let r = classify_point(&p, img);
                assert!(
                    matches!(r, Region::B | Region::OnManifold(_)),
                    "F(C) point ({x}, {y}) -> {r:?}"
                );
                checked += 1;
            }
        }
        assert_eq!(checked, 200);
    }

    #[test]
    fn dynamics_f_of_a_stays_in_a_w1_b_and_escapes() {
        let m = example_map();
        let p = build_partition(&m).unwrap();
        let mut samples = Vec::new();
        for i in 0..10 {
            let y = m.ih.lo + (i as f64 + 0.5) / 10.0 * m.ih.len();
            let (dlo, _) = p.d_interval_at(y);
            let (alo_hi, _) = p.b_interval_at(y); // left A component ends at W^1(0)
            for j in 0..5 {
                let x = dlo + (j as f64 + 1.0) / 6.0 * (alo_hi - dlo);
                samples.push(Point::new(x, y));
            }
        }
        for z in samples {
            if classify_point(&p, z) != Region::A {
                continue;
            }
            let img = m.apply(z);
            let r = classify_point(&p, img);
            assert!(
                matches!(r, Region::A | Region::B | Region::OnManifold(_)),
                "F(A) -> {r:?}"
            );
            // Orbit escapes A within 10^4 iterations.
            let mut w = z;
            let mut escaped = false;
            for _ in 0..10_000 {
                w = m.apply(w);
                if classify_point(&p, w) != Region::A {
                    escaped = true;
                    break;
                }
            }
            assert!(escaped, "orbit of ({}, {}) never left A", z.x, z.y);
        }
    }
}
