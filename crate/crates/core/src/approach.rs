//! Candidate wandering-domain tracking: the closest-approach recursion,
//! horizontal/vertical sizes, thickness (largest inscribed axis-aligned
//! square), regularity, the double sequence, and rate diagnostics.
//!
//! Sets are carried as a boundary polyline plus an interior sample grid,
//! both mapped forward pointwise; the sets in play are small diffeomorphic
//! images of rectangles.
//!
//! A trace reports itineraries and inequality diagnostics only. It never
//! tests whether orbit elements are pairwise disjoint, and it cannot
//! certify that a given set is or is not a wandering domain; a straddle
//! event only records that the set touched a stable manifold.

use crate::fnrep::Interval;
use crate::henon::Point;
use crate::manifolds::{classify_point, Region};
use crate::regions::{compute_k, RegionBoundary};
use crate::renorm::RenormTower;
use crate::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;

/// Boundary polyline resolution.
pub const BOUNDARY_POINTS: usize = 256;
/// Interior sample grid (per axis).
pub const INTERIOR_GRID: usize = 32;
/// Bisection steps for the largest-square search.
const SQUARE_BISECTIONS: usize = 40;

/// A planar set: closed boundary polyline plus interior samples.
#[derive(Debug, Clone)]
pub struct PlanarSet {
    /// Closed polyline (first point is not repeated at the end).
    pub boundary: Vec<Point>,
    pub interior: Vec<Point>,
}

impl PlanarSet {
    /// Axis-aligned rectangle `[x1, x2] x [y1, y2]`.
    pub fn rect(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        assert!(x1 <= x2 && y1 <= y2, "bad rectangle");
        let per_side = BOUNDARY_POINTS / 4;
        let mut boundary = Vec::with_capacity(BOUNDARY_POINTS);
        for k in 0..per_side {
            let t = k as f64 / per_side as f64;
            boundary.push(Point::new(x1 + t * (x2 - x1), y1));
        }
        for k in 0..per_side {
            let t = k as f64 / per_side as f64;
            boundary.push(Point::new(x2, y1 + t * (y2 - y1)));
        }
        for k in 0..per_side {
            let t = k as f64 / per_side as f64;
            boundary.push(Point::new(x2 - t * (x2 - x1), y2));
        }
        for k in 0..per_side {
            let t = k as f64 / per_side as f64;
            boundary.push(Point::new(x1, y2 - t * (y2 - y1)));
        }
        let mut interior = Vec::with_capacity(INTERIOR_GRID * INTERIOR_GRID);
        for i in 0..INTERIOR_GRID {
            let u = (i as f64 + 0.5) / INTERIOR_GRID as f64;
            for j in 0..INTERIOR_GRID {
                let v = (j as f64 + 0.5) / INTERIOR_GRID as f64;
                interior.push(Point::new(x1 + u * (x2 - x1), y1 + v * (y2 - y1)));
            }
        }
        Self { boundary, interior }
    }

    /// A single point (degenerate set).
    pub fn point(p: Point) -> Self {
        Self {
            boundary: vec![p; 4],
            interior: vec![p],
        }
    }

    pub fn map_forward(&self, f: impl Fn(Point) -> Point) -> Self {
        Self {
            boundary: self.boundary.iter().map(|&p| f(p)).collect(),
            interior: self.interior.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn all_points(&self) -> impl Iterator<Item = &Point> {
        self.boundary.iter().chain(self.interior.iter())
    }

    /// Exact projections of the boundary polyline: `(l, h)`.
    pub fn sizes(&self) -> Result<(f64, f64)> {
        if self.boundary.is_empty() {
            return Err(Error::EmptySet("no boundary points".into()));
        }
        let (mut xlo, mut xhi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &self.boundary {
            xlo = xlo.min(p.x);
            xhi = xhi.max(p.x);
            ylo = ylo.min(p.y);
            yhi = yhi.max(p.y);
        }
        Ok((xhi - xlo, yhi - ylo))
    }

    pub fn hull(&self) -> (Interval, Interval) {
        let (mut xlo, mut xhi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &self.boundary {
            xlo = xlo.min(p.x);
            xhi = xhi.max(p.x);
            ylo = ylo.min(p.y);
            yhi = yhi.max(p.y);
        }
        // Degenerate hulls get a representable positive width.
        let bump = |lo: f64, hi: f64| {
            let pad = (lo.abs() * f64::EPSILON).max(f64::MIN_POSITIVE);
            Interval::new(lo, hi.max(lo + pad))
        };
        (bump(xlo, xhi), bump(ylo, yhi))
    }

    /// Ray-casting point-in-polygon on the boundary polyline.
    pub fn contains(&self, p: Point) -> bool {
        let n = self.boundary.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.boundary[i];
            let b = self.boundary[(i + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let t = (p.y - a.y) / (b.y - a.y);
                let xi = a.x + t * (b.x - a.x);
                if p.x < xi {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Check that the boundary is simple (no crossing segments) at the
    /// sampled resolution.
    pub fn boundary_is_simple(&self) -> bool {
        let n = self.boundary.len();
        let seg = |i: usize| (self.boundary[i], self.boundary[(i + 1) % n]);
        for i in 0..n {
            let (a, b) = seg(i);
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = seg(j);
                if segments_cross(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    /// Boundary CSV (`x,y` rows).
    pub fn boundary_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for p in &self.boundary {
            out.push_str(&format!("{:.17e},{:.17e}\n", p.x, p.y));
        }
        out
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

/// An axis-aligned square, for thickness results.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Square {
    pub cx: f64,
    pub cy: f64,
    pub side: f64,
}

impl Square {
    pub fn as_planar_set(&self) -> PlanarSet {
        let h = self.side / 2.0;
        PlanarSet::rect(self.cx - h, self.cx + h, self.cy - h, self.cy + h)
    }
}

fn square_fits(set: &PlanarSet, cx: f64, cy: f64, side: f64) -> bool {
    // Center first: most candidate centers are rejected by one test.
    if !set.contains(Point::new(cx, cy)) {
        return false;
    }
    let h = side / 2.0;
    // Perimeter samples of the candidate square (corners included).
    let m = 8;
    for k in 0..m {
        let t = -h + 2.0 * h * k as f64 / (m - 1) as f64;
        for p in [
            Point::new(cx + t, cy - h),
            Point::new(cx + t, cy + h),
            Point::new(cx - h, cy + t),
            Point::new(cx + h, cy + t),
        ] {
            if !set.contains(p) {
                return false;
            }
        }
    }
    true
}

/// Largest inscribed axis-aligned square by bisection on the side length.
/// Centers are searched over the interior grid, the area centroid, and a
/// local refinement around the best candidate; `w` is accurate to about the
/// requested resolution for convex inputs.
pub fn thickness(set: &PlanarSet, resolution: f64) -> (f64, Option<Square>) {
    let (l, h) = match set.sizes() {
        Ok(v) => v,
        Err(_) => return (0.0, None),
    };
    let cap = l.min(h);
    if cap <= 0.0 || resolution <= 0.0 {
        return (0.0, None);
    }
    // Candidate centers: interior samples plus the boundary centroid.
    let mut centers: Vec<Point> = set.interior.clone();
    let centroid = {
        let n = set.boundary.len() as f64;
        let (sx, sy) = set
            .boundary
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point::new(sx / n, sy / n)
    };
    centers.push(centroid);

    let feasible = |s: f64, centers: &[Point]| -> Option<Point> {
        // Shrink the candidate square a hair so suprema (exact squares)
        // count as feasible despite boundary-exact corners.
        let s_test = s * (1.0 - 1e-12);
        centers
            .iter()
            .find(|c| square_fits(set, c.x, c.y, s_test))
            .copied()
    };

    let mut lo = 0.0;
    let mut hi = cap * (1.0 + 1e-12);
    let mut best: Option<Point> = None;
    for _ in 0..SQUARE_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if let Some(c) = feasible(mid, &centers) {
            best = Some(c);
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < resolution * 0.25 {
            break;
        }
    }
    let mut side = lo;
    let mut center = match best {
        Some(c) => c,
        None => return (0.0, None),
    };
    // Local center refinement: the interior grid quantizes the center to
    // ~1/32 of the set, which truncates w; polish around the best center.
    for _ in 0..3 {
        let step = side * 0.06;
        let mut improved = false;
        'outer: for di in -2i32..=2 {
            for dj in -2i32..=2 {
                let c = Point::new(center.x + di as f64 * step, center.y + dj as f64 * step);
                let mut s_try = side + resolution;
                let mut grew = false;
                while square_fits(set, c.x, c.y, s_try * (1.0 - 1e-12)) {
                    s_try += resolution;
                    grew = true;
                }
                if grew {
                    side = s_try - resolution;
                    center = c;
                    improved = true;
                    break 'outer;
                }
            }
        }
        if !improved {
            break;
        }
    }
    (
        side,
        Some(Square {
            cx: center.x,
            cy: center.y,
            side,
        }),
    )
}

/// Thickness with a refining resolution ladder: thin strips (forward images
/// under a strongly dissipative map) carry squares far smaller than
/// `min(l, h) / 128`.
pub fn adaptive_thickness(set: &PlanarSet) -> f64 {
    adaptive_thickness_square(set).0
}

pub fn adaptive_thickness_square(set: &PlanarSet) -> (f64, Option<Square>) {
    let (l, h) = match set.sizes() {
        Ok(v) => v,
        Err(_) => return (0.0, None),
    };
    let scale = l.min(h);
    if scale <= 0.0 {
        return (0.0, None);
    }
    let mut res = scale / 128.0;
    loop {
        let (w, sq) = thickness(set, res);
        if w > 0.0 {
            return (w, sq);
        }
        res /= 64.0;
        if res < 1e-12 * scale.max(1.0) {
            return (0.0, None);
        }
    }
}

/// `h/l <= R eps^{-1/4}`, evaluated multiplicatively so degenerate sets
/// (`l = h = 0`) count as regular and `eps = 0` always passes.
pub fn is_r_regular(l: f64, h: f64, r: f64, eps_norm: f64) -> bool {
    if eps_norm <= 0.0 {
        return true;
    }
    h <= r * eps_norm.powf(-0.25) * l
}

/// One step record of a closest approach.
#[derive(Debug, Clone, Serialize)]
pub struct ApproachStep {
    pub index: usize,
    /// Renormalization level `r(n)` the set lives in.
    pub level: usize,
    /// Rescaling level used by the step out of this set (0 for `A` steps).
    pub k: usize,
    pub region: String,
    pub l: f64,
    pub h: f64,
    pub w: f64,
    pub r_regular: bool,
    /// Good/bad flag of `B` steps (None for `A` steps).
    pub good_region: Option<bool>,
}

/// Why a closest approach stopped.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Terminal {
    #[serde(rename = "max_steps")]
    MaxSteps,
    #[serde(rename = "tower_exhausted")]
    TowerExhausted { level: usize },
    #[serde(rename = "straddle")]
    Straddle { level: usize, regions: Vec<String> },
    /// Double-sequence rows only: the post-bad set's largest square is
    /// numerically degenerate (thickness 0), so no further row exists.
    #[serde(rename = "degenerate_square")]
    DegenerateSquare,
}

/// A closest-approach trace.
#[derive(Debug, Serialize)]
pub struct Trace {
    pub steps: Vec<ApproachStep>,
    pub terminal: Terminal,
    #[serde(skip)]
    pub sets: Vec<PlanarSet>,
}

/// Classification of a whole set against a partition: unanimous region or
/// the list of labels it straddles.
fn classify_set(
    partition: &crate::manifolds::Partition,
    set: &PlanarSet,
) -> std::result::Result<Region, Vec<String>> {
    let mut labels: Vec<String> = Vec::new();
    let mut region: Option<Region> = None;
    let mut mixed = false;
    for &p in set.all_points() {
        let r = classify_point(partition, p);
        let name = r.short();
        if !labels.contains(&name) {
            labels.push(name);
        }
        match (&region, &r) {
            (None, _) => region = Some(r),
            (Some(a), b) if a == b => {}
            _ => mixed = true,
        }
    }
    if mixed || matches!(region, Some(Region::OnManifold(_))) {
        Err(labels)
    } else {
        Ok(region.expect("nonempty set"))
    }
}

/// Options for trace construction.
#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    pub max_steps: usize,
    /// Good/bad-region parameter `b`.
    pub b: f64,
    /// Regularity constant; `None` derives it from the first step
    /// (measured `h/l` times 2).
    pub r_param: Option<f64>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            max_steps: 64,
            b: 10.0,
            r_param: None,
        }
    }
}

/// Run the closest-approach recursion for `j0` under the tower.
///
/// `A` steps iterate `F_{r(n)}`; `B` steps apply
/// `Phi_{r(n)}^{k_n} . F_{r(n)}` and advance the level by `k_n`. The trace
/// stops at `max_steps`, at tower exhaustion, or when a set straddles a
/// stable manifold (terminal event; a true wandering domain never does).
pub fn closest_approach(tower: &RenormTower, j0: PlanarSet, opts: TraceOptions) -> Result<Trace> {
    let mut kcache: BTreeMap<usize, Option<RegionBoundary>> = BTreeMap::new();
    closest_approach_inner(tower, j0, opts, 0, &mut kcache)
}

fn k_at<'a>(
    tower: &RenormTower,
    level: usize,
    b: f64,
    cache: &'a mut BTreeMap<usize, Option<RegionBoundary>>,
) -> &'a Option<RegionBoundary> {
    cache
        .entry(level)
        .or_insert_with(|| compute_k(tower, level, b).ok())
}

fn closest_approach_inner(
    tower: &RenormTower,
    j0: PlanarSet,
    opts: TraceOptions,
    base_level: usize,
    kcache: &mut BTreeMap<usize, Option<RegionBoundary>>,
) -> Result<Trace> {
    let mut steps = Vec::new();
    let mut sets = Vec::new();
    let mut cur = j0;
    let mut level = base_level;
    let mut r_param = opts.r_param;
    let max_level = tower.levels.len() - 1;

    for index in 0..=opts.max_steps {
        let lvl = tower.level(level);
        let (l, h) = cur.sizes()?;
        let w = adaptive_thickness(&cur);
        let eps = lvl.eps_norm;
        let r = *r_param.get_or_insert_with(|| {
            if l > 0.0 && eps > 0.0 {
                2.0 * (h / l) * eps.powf(0.25)
            } else {
                2.0
            }
        });
        let regular = is_r_regular(l, h, r, eps);

        let region = match classify_set(&lvl.partition, &cur) {
            Ok(r) => r,
            Err(labels) => {
                if index == 0 {
                    return Err(Error::StraddleAtStart(labels.join(", ")));
                }
                steps.push(ApproachStep {
                    index,
                    level,
                    k: 0,
                    region: format!("straddle({})", labels.join("|")),
                    l,
                    h,
                    w,
                    r_regular: regular,
                    good_region: None,
                });
                sets.push(cur);
                return Ok(Trace {
                    steps,
                    terminal: Terminal::Straddle {
                        level,
                        regions: labels,
                    },
                    sets,
                });
            }
        };

        if index == opts.max_steps {
            steps.push(ApproachStep {
                index,
                level,
                k: 0,
                region: region.short(),
                l,
                h,
                w,
                r_regular: regular,
                good_region: None,
            });
            sets.push(cur);
            return Ok(Trace {
                steps,
                terminal: Terminal::MaxSteps,
                sets,
            });
        }

        match region {
            Region::A => {
                steps.push(ApproachStep {
                    index,
                    level,
                    k: 0,
                    region: "A".into(),
                    l,
                    h,
                    w,
                    r_regular: regular,
                    good_region: None,
                });
                sets.push(cur.clone());
                let map = &lvl.map;
                cur = cur.map_forward(|p| map.apply(p));
            }
            Region::B => {
                // Determine the rescaling level by iterating + rescaling
                // until the image lands out of C.
                let map = &lvl.map;
                let mut img = cur.map_forward(|p| map.apply(p));
                let mut k = 0usize;
                loop {
                    let at = level + k;
                    let lv = tower.level(at);
                    match classify_set(&lv.partition, &img) {
                        Ok(Region::C) => {
                            if lv.resc.is_none() || at == max_level {
                                steps.push(ApproachStep {
                                    index,
                                    level,
                                    k,
                                    region: format!("B({})", k.max(1)),
                                    l,
                                    h,
                                    w,
                                    r_regular: regular,
                                    good_region: None,
                                });
                                sets.push(cur);
                                return Ok(Trace {
                                    steps,
                                    terminal: Terminal::TowerExhausted { level: at },
                                    sets,
                                });
                            }
                            let resc = lv.resc.as_ref().unwrap();
                            let mapped: Result<Vec<Point>> = img
                                .all_points()
                                .map(|&p| Ok(resc.phi(&lv.map, p)))
                                .collect();
                            let pts = mapped?;
                            let nb = img.boundary.len();
                            img = PlanarSet {
                                boundary: pts[..nb].to_vec(),
                                interior: pts[nb..].to_vec(),
                            };
                            k += 1;
                        }
                        Ok(Region::A) | Ok(Region::B) => break,
                        Ok(other) => {
                            steps.push(ApproachStep {
                                index,
                                level,
                                k,
                                region: format!("B->{}", other.short()),
                                l,
                                h,
                                w,
                                r_regular: regular,
                                good_region: None,
                            });
                            sets.push(cur);
                            return Ok(Trace {
                                steps,
                                terminal: Terminal::Straddle {
                                    level: at,
                                    regions: vec![other.short()],
                                },
                                sets,
                            });
                        }
                        Err(labels) => {
                            // Landing across A/W^1(0)/B is inside C(0);
                            // anything touching C or other manifolds is a
                            // straddle event.
                            let benign = labels
                                .iter()
                                .all(|s| s == "A" || s == "B" || s == "on(W1(0))");
                            if benign {
                                break;
                            }
                            steps.push(ApproachStep {
                                index,
                                level,
                                k,
                                region: format!("straddle({})", labels.join("|")),
                                l,
                                h,
                                w,
                                r_regular: regular,
                                good_region: None,
                            });
                            sets.push(cur);
                            return Ok(Trace {
                                steps,
                                terminal: Terminal::Straddle {
                                    level: at,
                                    regions: labels,
                                },
                                sets,
                            });
                        }
                    }
                }
                let good = k_at(tower, level, opts.b, kcache)
                    .as_ref()
                    .map(|kb| kb.k.is_good(k));
                steps.push(ApproachStep {
                    index,
                    level,
                    k,
                    region: format!("B({k})"),
                    l,
                    h,
                    w,
                    r_regular: regular,
                    good_region: good,
                });
                sets.push(cur);
                cur = img;
                level += k;
            }
            Region::C => {
                return Err(Error::StraddleAtStart(format!(
                    "set in C at step {index}; closest approach is defined on A u B"
                )));
            }
            Region::OutsideD => {
                return Err(Error::StraddleAtStart(format!(
                    "set outside D at step {index}"
                )));
            }
            Region::OnManifold(name) => {
                return Err(Error::StraddleAtStart(name));
            }
        }
    }
    unreachable!("loop returns at max_steps");
}

/// One row of a double sequence.
#[derive(Debug, Serialize)]
pub struct DoubleSequenceRow {
    pub row: usize,
    /// Tower level of the row's base map `F_0^{(j)}`.
    pub base_level: usize,
    pub steps: Vec<ApproachStep>,
    /// Time span in the good regions `n^{(j)}` (None = never bad).
    pub n_bad: Option<usize>,
    /// `||eps^{(j)}||` at the bad-entry level.
    pub eps_at_bad: Option<f64>,
    /// `k^{(j)}` at the bad entry.
    pub k_at_bad: Option<usize>,
    /// Initial square side (`l_0 = w_0`).
    pub l0: f64,
    /// Terminal event of the row when it never goes bad.
    pub terminal: Option<Terminal>,
}

/// Run the double sequence: rows of closest approaches, each restarted
/// from a largest square subset after the first bad-region entry.
pub fn double_sequence(
    tower: &RenormTower,
    j0: Square,
    max_rows: usize,
    opts: TraceOptions,
) -> Result<Vec<DoubleSequenceRow>> {
    let mut rows = Vec::new();
    let mut square = j0;
    let mut base_level = 0usize;
    let mut kcache: BTreeMap<usize, Option<RegionBoundary>> = BTreeMap::new();
    for row in 0..max_rows {
        let set = square.as_planar_set();
        let l0 = square.side;
        // Row trace: walk steps, watching for the first bad-region B step.
        let mut trace_opts = opts;
        trace_opts.r_param = opts.r_param;
        let trace = closest_approach_inner(tower, set, trace_opts, base_level, &mut kcache)?;
        let mut n_bad = None;
        let mut eps_at_bad = None;
        let mut k_at_bad = None;
        for step in &trace.steps {
            if step.k >= 1 && step.good_region == Some(false) {
                n_bad = Some(step.index);
                eps_at_bad = Some(tower.level(step.level).eps_norm);
                k_at_bad = Some(step.k);
                break;
            }
        }
        match n_bad {
            None => {
                rows.push(DoubleSequenceRow {
                    row,
                    base_level,
                    steps: trace.steps,
                    n_bad: None,
                    eps_at_bad: None,
                    k_at_bad: None,
                    l0,
                    terminal: Some(trace.terminal),
                });
                break;
            }
            Some(nj) => {
                // Re-run the recursion up to and including step n_bad to
                // recover J_{n_bad + 1} (the trace stores pre-step sets).
                let mut cur = square.as_planar_set();
                let mut level = base_level;
                for step in trace.steps.iter().take(nj + 1) {
                    let lvl = tower.level(level);
                    if step.k == 0 {
                        cur = cur.map_forward(|p| lvl.map.apply(p));
                    } else {
                        let mut img = cur.map_forward(|p| lvl.map.apply(p));
                        for kk in 0..step.k {
                            let lv = tower.level(level + kk);
                            let resc = lv.resc.as_ref().expect("resc");
                            img = img.map_forward(|p| resc.phi(&lv.map, p));
                        }
                        cur = img;
                        level += step.k;
                    }
                }
                let steps: Vec<ApproachStep> = trace.steps.into_iter().take(nj + 1).collect();
                let (w, sq) = adaptive_thickness_square(&cur);
                rows.push(DoubleSequenceRow {
                    row,
                    base_level,
                    steps,
                    n_bad: Some(nj),
                    eps_at_bad,
                    k_at_bad,
                    l0,
                    terminal: None,
                });
                match sq {
                    Some(s) if w > 0.0 => {
                        square = s;
                        base_level = level;
                    }
                    _ => {
                        if let Some(last) = rows.last_mut() {
                            last.terminal = Some(Terminal::DegenerateSquare);
                        }
                        break;
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Rate diagnostics across a double sequence.
#[derive(Debug, Serialize)]
pub struct RateReport {
    pub alpha: f64,
    pub rows: Vec<RowRates>,
    pub two_row: Vec<TwoRowCheck>,
}

#[derive(Debug, Serialize)]
pub struct RowRates {
    pub row: usize,
    /// `m^{(j)} = n^{(j)} + 1` (None when the row never goes bad).
    pub m: Option<usize>,
    pub eps: Option<f64>,
    pub k: Option<usize>,
    /// Per-step horizontal expansion factors over good-region steps.
    pub expansion_factors: Vec<f64>,
    pub l0: f64,
}

/// The two-row inequality
/// `m^{(j)} > ln E / (-2 ln eps_j) m^{(j+1)} + eps_j^{-alpha}
///  + ln l0_j / (-2 ln eps_j)` evaluated numerically.
#[derive(Debug, Serialize)]
pub struct TwoRowCheck {
    pub row: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub fitted_e: f64,
}

pub fn rate_report(rows: &[DoubleSequenceRow]) -> RateReport {
    let alpha = (2.0_f64).ln() / (6.0 * crate::FEIGENBAUM_LAMBDA.ln());
    let mut row_rates = Vec::new();
    let mut fitted_e = f64::INFINITY;
    for row in rows {
        let mut factors = Vec::new();
        for w in row.steps.windows(2) {
            let good = w[0].good_region.unwrap_or(true);
            if good && w[0].l > 0.0 {
                factors.push(w[1].l / w[0].l);
            }
        }
        for &f in &factors {
            if f > 1.0 {
                fitted_e = fitted_e.min(f);
            }
        }
        row_rates.push(RowRates {
            row: row.row,
            m: row.n_bad.map(|n| n + 1),
            eps: row.eps_at_bad,
            k: row.k_at_bad,
            expansion_factors: factors,
            l0: row.l0,
        });
    }
    if !fitted_e.is_finite() {
        fitted_e = 1.1;
    }
    let mut two_row = Vec::new();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if let (Some(na), Some(nb), Some(eps_a)) = (a.n_bad, b.n_bad, a.eps_at_bad) {
            let m_j = (na + 1) as f64;
            let m_next = (nb + 1) as f64;
            let le = -2.0 * eps_a.ln();
            let rhs = fitted_e.ln() / le * m_next + eps_a.powf(-alpha) + a.l0.ln() / le;
            two_row.push(TwoRowCheck {
                row: a.row,
                lhs: m_j,
                rhs,
                holds: m_j > rhs,
                fitted_e,
            });
        }
    }
    RateReport {
        alpha,
        rows: row_rates,
        two_row,
    }
}

/// Preimage of the vertical line `x = x0` under `h`, restricted to the
/// central strip: solves `h(x, y) = x0` for `y` per sampled `x`. Near the
/// tip this is the concave arch of the vertical line argument.
pub fn vertical_line_preimage(
    map: &crate::henon::HenonMap,
    x0: f64,
    xrange: Interval,
    samples: usize,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 0..samples {
        let x = xrange.lo + (i as f64 + 0.5) / samples as f64 * xrange.len();
        // Solve f(x) - eps(x, y) = x0 in y over I^v by bracketed search.
        let g = |y: f64| map.h(x, y) - x0;
        let (lo, hi) = (map.iv.lo, map.iv.hi);
        let (glo, ghi) = (g(lo), g(hi));
        if glo == 0.0 {
            out.push((x, lo));
            continue;
        }
        if glo * ghi > 0.0 {
            continue;
        }
        if let Ok(y) = crate::fnrep::find_root(g, lo, hi, 1e-12) {
            out.push((x, y));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::henon::MapSpec;
    use crate::renorm::build_tower;

    #[test]
    fn sizes_of_rectangles() {
        let sq = PlanarSet::rect(0.0, 1.0, 0.0, 1.0);
        assert_eq!(sq.sizes().unwrap(), (1.0, 1.0));
        let j = PlanarSet::rect(-0.950, -0.947, 0.042, 0.045);
        let (l, h) = j.sizes().unwrap();
        assert!((l - 0.003).abs() < 1e-12 && (h - 0.003).abs() < 1e-12);
    }

    #[test]
    fn h_of_image_equals_l_of_source() {
        let m = MapSpec::worked_example().build().unwrap();
        let mut seed = 42u64;
        let mut rnd = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let x1 = -1.0 + 1.6 * rnd();
            let y1 = -1.0 + 1.6 * rnd();
            let (dx, dy) = (0.01 + 0.2 * rnd(), 0.01 + 0.2 * rnd());
            let j = PlanarSet::rect(x1, x1 + dx, y1, y1 + dy);
            let img = j.map_forward(|p| m.apply(p));
            let (l, _) = j.sizes().unwrap();
            let (_, h_img) = img.sizes().unwrap();
            assert!((h_img - l).abs() < 1e-12, "h(F(J)) = l(J)");
        }
    }

    #[test]
    fn thickness_of_squares_and_rectangles() {
        let res = 1e-4;
        let (w, sq) = thickness(&PlanarSet::rect(0.0, 0.5, 0.0, 0.5), res);
        assert!(
            (w - 0.5).abs() < 2.0 * res,
            "square side s -> w = s, got {w}"
        );
        assert!(sq.is_some());
        let (w2, _) = thickness(&PlanarSet::rect(0.0, 2.0, 0.0, 1.0), 1e-3);
        assert!((w2 - 1.0).abs() < 2e-3, "2x1 rectangle -> w = 1, got {w2}");
        let (w3, _) = thickness(&PlanarSet::point(Point::new(0.3, 0.4)), res);
        assert_eq!(w3, 0.0, "degenerate set has w = 0");
    }

    #[test]
    fn thickness_matches_brute_force_on_convex_quadrilaterals() {
        let mut seed = 0xfeedbeef_u64;
        let mut rnd = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for case in 0..20 {
            // Random convex quadrilateral: perturbed square corners.
            let corners = [
                Point::new(0.0 + 0.3 * rnd(), 0.0 + 0.3 * rnd()),
                Point::new(1.0 - 0.3 * rnd(), 0.0 + 0.3 * rnd()),
                Point::new(1.0 - 0.3 * rnd(), 1.0 - 0.3 * rnd()),
                Point::new(0.0 + 0.3 * rnd(), 1.0 - 0.3 * rnd()),
            ];
            let set = quad_set(&corners);
            let res = 2e-3;
            let (w, _) = thickness(&set, res);
            let w_oracle = brute_force_square(&set, 48);
            assert!(
                (w - w_oracle).abs() <= 2.0 * res + 1.0 / 48.0,
                "case {case}: w = {w}, oracle = {w_oracle}"
            );
        }
    }

    pub(crate) fn quad_set(corners: &[Point; 4]) -> PlanarSet {
        let mut boundary = Vec::new();
        for i in 0..4 {
            let a = corners[i];
            let b = corners[(i + 1) % 4];
            for k in 0..64 {
                let t = k as f64 / 64.0;
                boundary.push(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
            }
        }
        // Interior: grid samples inside the hull filtered by containment.
        let tmp = PlanarSet {
            boundary: boundary.clone(),
            interior: vec![],
        };
        let (hx, hy) = tmp.hull();
        let mut interior = Vec::new();
        for i in 0..INTERIOR_GRID {
            for j in 0..INTERIOR_GRID {
                let p = Point::new(
                    hx.lo + (i as f64 + 0.5) / INTERIOR_GRID as f64 * hx.len(),
                    hy.lo + (j as f64 + 0.5) / INTERIOR_GRID as f64 * hy.len(),
                );
                if tmp.contains(p) {
                    interior.push(p);
                }
            }
        }
        PlanarSet { boundary, interior }
    }

    /// Exhaustive oracle: grid of centers x grid of sides.
    pub(crate) fn brute_force_square(set: &PlanarSet, n: usize) -> f64 {
        let (hx, hy) = set.hull();
        let cap = hx.len().min(hy.len());
        let mut best = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let c = Point::new(
                    hx.lo + (i as f64 + 0.5) / n as f64 * hx.len(),
                    hy.lo + (j as f64 + 0.5) / n as f64 * hy.len(),
                );
                if !set.contains(c) {
                    continue;
                }
                for s in 1..n {
                    let side = cap * s as f64 / n as f64;
                    if square_fits(set, c.x, c.y, side) {
                        best = best.max(side);
                    } else {
                        break;
                    }
                }
            }
        }
        best
    }

    #[test]
    fn point_set_hull_does_not_panic() {
        let p = PlanarSet::point(Point::new(0.5, -0.25));
        let (hx, hy) = p.hull();
        assert!(hx.len() > 0.0 && hy.len() > 0.0);
        assert_eq!(adaptive_thickness(&p), 0.0);
    }

    #[test]
    fn thickness_monotone_under_inclusion() {
        let inner = PlanarSet::rect(0.2, 0.7, 0.3, 0.8);
        let outer = PlanarSet::rect(0.0, 1.0, 0.0, 1.0);
        let (wi, _) = thickness(&inner, 1e-4);
        let (wo, _) = thickness(&outer, 1e-4);
        assert!(wi <= wo + 1e-6);
        // w <= min(l, h) always.
        let thin = PlanarSet::rect(0.0, 1.0, 0.0, 0.05);
        let (wt, _) = thickness(&thin, 1e-4);
        let (l, h) = thin.sizes().unwrap();
        assert!(wt <= l.min(h) + 1e-6);
    }

    #[test]
    fn r_regular_arithmetic() {
        assert!(
            is_r_regular(1.0, 1.0, 1.0, 1e-4),
            "square is regular for R >= eps^(1/4)"
        );
        // h/l = 1e6, eps = 1e-4, R = 1: bound = 10 -> false.
        assert!(!is_r_regular(1e-6, 1.0, 1.0, 1e-4));
        assert!(
            is_r_regular(0.0, 0.0, 1.0, 1e-4),
            "point sets count as regular"
        );
        assert!(
            is_r_regular(1e-9, 5.0, 1.0, 0.0),
            "eps floor: degenerate always regular"
        );
    }

    #[test]
    fn worked_itinerary_of_the_example_set() {
        let tower = build_tower(MapSpec::worked_example().build().unwrap(), 8).unwrap();
        let j0 = PlanarSet::rect(-0.950, -0.947, 0.042, 0.045);
        let trace = closest_approach(&tower, j0, TraceOptions::default()).unwrap();
        let regions: Vec<&str> = trace.steps.iter().map(|s| s.region.as_str()).collect();
        assert!(regions.len() >= 5, "trace: {regions:?}");
        assert_eq!(regions[0], "A");
        assert_eq!(regions[1], "A");
        assert_eq!(regions[2], "B(1)");
        assert_eq!(trace.steps[3].level, 1, "rescaled to level 1");
        assert_eq!(regions[3], "A");
        assert!(
            matches!(trace.terminal, Terminal::Straddle { .. }),
            "level-1 B set straddles stable manifolds: {:?}",
            trace.terminal
        );
        // Horizontal size strictly increases on good-region steps.
        for w in trace.steps.windows(2) {
            if w[0].good_region.unwrap_or(true)
                && w[1].l > 0.0
                && !w[1].region.starts_with("straddle")
            {
                assert!(w[1].l > w[0].l, "l not expanding: {:?} -> {:?}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn single_point_trace_runs() {
        let tower = build_tower(MapSpec::worked_example().build().unwrap(), 4).unwrap();
        let j0 = PlanarSet::point(Point::new(-0.9485, 0.0435));
        let trace = closest_approach(
            &tower,
            j0,
            TraceOptions {
                max_steps: 6,
                ..Default::default()
            },
        );
        let trace = trace.unwrap();
        for s in &trace.steps {
            assert_eq!(s.l, 0.0);
            assert_eq!(s.h, 0.0);
            assert_eq!(s.w, 0.0);
        }
    }

    #[test]
    fn degenerate_g_lift_interval_expands_every_step() {
        let sol = crate::unimodal::solve_feigenbaum(40, 1e-12).unwrap();
        let ih = Interval::new(-1.3, 1.1);
        let f = crate::fnrep::AnalyticFn::fit_cheb(|x| sol.g.f.eval(x), ih, 80);
        let tower =
            build_tower(crate::henon::HenonMap::degenerate_lift(f, ih, ih, 0.2), 7).unwrap();
        // A tiny interval in A (lifted to a thin rectangle).
        let j0 = PlanarSet::rect(-0.9, -0.899, 0.0, 1e-6);
        let trace = closest_approach(
            &tower,
            j0,
            TraceOptions {
                max_steps: 10,
                ..Default::default()
            },
        )
        .unwrap();
        let mut count = 0;
        for w in trace.steps.windows(2) {
            if w[1].region.starts_with("straddle") {
                break;
            }
            assert!(w[1].l > w[0].l, "l must strictly increase: {:?}", w);
            count += 1;
        }
        assert!(count >= 3, "too few expanding steps ({count})");
    }

    #[test]
    fn straddle_at_start_is_an_input_error() {
        let tower = build_tower(MapSpec::worked_example().build().unwrap(), 2).unwrap();
        // Rectangle containing W^0(0) at x ~ 0.44.
        let j0 = PlanarSet::rect(0.3, 0.6, -0.1, 0.1);
        assert!(matches!(
            closest_approach(&tower, j0, TraceOptions::default()),
            Err(Error::StraddleAtStart(_))
        ));
    }

    #[test]
    fn double_sequence_on_example_map() {
        let tower = build_tower(MapSpec::worked_example().build().unwrap(), 8).unwrap();
        let j0 = Square {
            cx: -0.6637,
            cy: 0.3205,
            side: 0.001,
        };
        let rows = double_sequence(&tower, j0, 4, TraceOptions::default()).unwrap();
        assert!(!rows.is_empty());
        // At level 0 with the published eps, K_0 = 0: the first B step is
        // already a bad-region entry.
        assert!(rows[0].n_bad.is_some(), "row 0 should enter the bad region");
        let report = rate_report(&rows);
        assert!(
            (report.alpha - 0.1258).abs() < 1e-3,
            "alpha = ln2/(6 ln lambda)"
        );
        // Good-region steps expand the horizontal size.
        for rr in &report.rows {
            for &f in &rr.expansion_factors {
                assert!(f > 1.0, "good-region factor {f} <= 1 in row {}", rr.row);
            }
        }
        if rows.len() >= 2 {
            assert!(rows[1].base_level > 0, "row 1 re-bases to a deeper level");
            let rel = (rows[1].l0 - rows[1].steps[0].l).abs() / rows[1].l0;
            assert!(rel < 1e-9, "row square side mismatch: {rel}");
        }
        for tr in &report.two_row {
            assert!(tr.lhs.is_finite() && tr.rhs.is_finite());
        }
    }

    #[test]
    fn degenerate_double_sequence_has_one_row() {
        let sol = crate::unimodal::solve_feigenbaum(40, 1e-12).unwrap();
        let ih = Interval::new(-1.3, 1.1);
        let f = crate::fnrep::AnalyticFn::fit_cheb(|x| sol.g.f.eval(x), ih, 80);
        let tower =
            build_tower(crate::henon::HenonMap::degenerate_lift(f, ih, ih, 0.2), 6).unwrap();
        let j0 = Square {
            cx: -0.9,
            cy: 0.0,
            side: 0.001,
        };
        let rows = double_sequence(&tower, j0, 5, TraceOptions::default()).unwrap();
        assert_eq!(rows.len(), 1, "no bad region for the degenerate case");
        assert!(rows[0].n_bad.is_none());
    }

    #[test]
    fn vertical_line_preimage_is_concave_arch() {
        // Depth 5 so the tip has a degenerate anchor (level 4).
        let tower = build_tower(MapSpec::worked_example().build().unwrap(), 5).unwrap();
        let lvl = tower.level(0);
        let tip = lvl.tip.unwrap();
        let b = 10.0;
        let x0 = tip.x - 0.5 * b * lvl.eps_norm;
        let pts = unimodal_arch_range(&lvl.map);
        let curve = vertical_line_preimage(&lvl.map, x0, pts, 101);
        assert!(curve.len() > 10, "arch should be sampled");
        let (mut argmax, mut ymax) = (0usize, f64::NEG_INFINITY);
        for (i, &(_, y)) in curve.iter().enumerate() {
            if y > ymax {
                ymax = y;
                argmax = i;
            }
        }
        assert!(
            argmax > 0 && argmax < curve.len() - 1,
            "y-extremum interior to B (index {argmax} of {})",
            curve.len()
        );
    }

    fn unimodal_arch_range(map: &crate::henon::HenonMap) -> Interval {
        let pts = crate::unimodal::unimodal_points(&map.f).unwrap();
        Interval::new(pts.p1, pts.q0)
    }

    #[test]
    fn square_propagation_under_f_and_phi() {
        let tower = build_tower(MapSpec::worked_example().build().unwrap(), 4).unwrap();
        let lvl = tower.level(0);
        let resc = lvl.resc.as_ref().unwrap();
        let mut seed = 77u64;
        let mut rnd = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut c_fit = f64::INFINITY;
        let lam = resc.lambda();
        let mut phi_checked = 0;
        for _ in 0..20 {
            let side = 0.002 + 0.01 * rnd();
            let cx = -0.8 + 1.6 * rnd();
            let cy = -0.8 + 1.6 * rnd();
            let sq = PlanarSet::rect(cx, cx + side, cy, cy + side);
            let img = sq.map_forward(|p| lvl.map.apply(p));
            let res = side * lvl.eps_norm / 100.0;
            let (w_img, _) = thickness(&img, res);
            assert!(w_img > 0.0, "image square degenerated");
            c_fit = c_fit.min(w_img / (side * lvl.eps_norm / lvl.map.iv.len()));
            // phi expands squares in C by exactly lambda.
            let (clo, chi) = lvl.partition.c_interval_at(cy);
            if clo < cx && cx + side < chi && clo < cx && cy + side < 1.0 {
                let csq = PlanarSet::rect(cx.max(clo), cx.max(clo) + side, cy, cy + side);
                let inside = csq
                    .all_points()
                    .all(|&p| matches!(classify_point(&lvl.partition, p), Region::C));
                if inside {
                    let pimg = csq.map_forward(|p| resc.phi(&lvl.map, p));
                    let (w_phi, _) = thickness(&pimg, side * 1e-3);
                    assert!(
                        w_phi >= lam * side * 0.98,
                        "phi square expansion: {w_phi} vs {}",
                        lam * side
                    );
                    phi_checked += 1;
                }
            }
        }
        assert!(
            c_fit > 0.0 && c_fit.is_finite(),
            "fitted square-contraction c = {c_fit}"
        );
        assert!(phi_checked > 0, "no squares landed fully inside C");
    }
}
