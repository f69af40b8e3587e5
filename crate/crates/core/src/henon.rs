//! The Hénon-like map `F(x,y) = (f(x) - eps(x,y), x)` and its pointwise
//! dynamics: evaluation, the `x`-component `h_y`, Jacobian, branch
//! inversion of `h_y`, and the two saddle fixed points.

use crate::fnrep::{find_root, sup_norm_grid, AnalyticFn, AnalyticFn2, Interval, SUP_GRID_N};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default horizontal domain `I^h`, slightly larger than `I = [-1, 1]`.
pub const DEFAULT_IH: (f64, f64) = (-1.3, 1.1);
/// Default analyticity pad `delta`.
pub const DEFAULT_DELTA: f64 = 0.2;
/// Default tensor degree for the perturbation term.
pub const DEFAULT_EPS_DEGREE: usize = 24;
/// Default Chebyshev degree for the unimodal part.
pub const DEFAULT_F_DEGREE: usize = 80;
/// Multipliers within this distance of the unit circle are rejected.
const HYPERBOLICITY_MARGIN: f64 = 1e-6;

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// A Hénon-like map on `I^h x I^v` with analyticity pad `delta`.
///
/// Derivative spectra are cached at construction; the map is immutable and
/// safe to share across threads.
#[derive(Debug, Clone)]
pub struct HenonMap {
    pub f: AnalyticFn,
    pub eps: AnalyticFn2,
    pub ih: Interval,
    pub iv: Interval,
    pub delta: f64,
    eps_norm: f64,
    degenerate: bool,
    df: AnalyticFn,
    deps_dx: AnalyticFn2,
    deps_dy: AnalyticFn2,
}

impl HenonMap {
    pub fn new(f: AnalyticFn, eps: AnalyticFn2, ih: Interval, iv: Interval, delta: f64) -> Self {
        assert!(iv.lo <= ih.lo && ih.hi <= iv.hi, "require I^v contains I^h");
        let eps_norm = if eps.is_zero() {
            0.0
        } else {
            sup_norm_grid(|x, y| eps.eval(x, y), (ih, iv), SUP_GRID_N)
        };
        let deps_dx = eps.deriv_x();
        let deps_dy = eps.deriv_y();
        let degenerate =
            eps.is_zero() || sup_norm_grid(|x, y| deps_dy.eval(x, y), (ih, iv), 65) < 1e-14;
        let df = f.deriv();
        Self {
            f,
            eps,
            ih,
            iv,
            delta,
            eps_norm,
            degenerate,
            df,
            deps_dx,
            deps_dy,
        }
    }

    /// A degenerate lift `(f(x), x)` of a one-dimensional map.
    pub fn degenerate_lift(f: AnalyticFn, ih: Interval, iv: Interval, delta: f64) -> Self {
        let eps = AnalyticFn2::zero(ih, iv);
        Self::new(f, eps, ih, iv, delta)
    }

    /// `sup |eps|` over the 257-per-axis grid of `I^h x I^v`.
    pub fn eps_norm(&self) -> f64 {
        self.eps_norm
    }

    /// True when `d eps / d y` vanishes on the grid (to 1e-14).
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// The `x`-component `h_y(x) = f(x) - eps(x, y)`.
    pub fn h(&self, x: f64, y: f64) -> f64 {
        self.f.eval(x) - self.eps.eval(x, y)
    }

    /// `d h / d x` at `(x, y)`.
    pub fn dh_dx(&self, x: f64, y: f64) -> f64 {
        self.df.eval(x) - self.deps_dx.eval(x, y)
    }

    /// One application of the map.
    pub fn apply(&self, z: Point) -> Point {
        Point::new(self.h(z.x, z.y), z.x)
    }

    /// `F` iterated `n` times.
    pub fn iterate(&self, z: Point, n: usize) -> Point {
        let mut w = z;
        for _ in 0..n {
            w = self.apply(w);
        }
        w
    }

    /// Domain-checked `h` evaluation per the module contract.
    pub fn h_checked(&self, x: f64, y: f64) -> Result<f64> {
        if !self.ih.contains_pad(x, self.delta) {
            return Err(Error::OutsideDomain {
                x,
                lo: self.ih.lo,
                hi: self.ih.hi,
                pad: self.delta,
            });
        }
        if !self.iv.contains_pad(y, self.delta) {
            return Err(Error::OutsideDomain {
                x: y,
                lo: self.iv.lo,
                hi: self.iv.hi,
                pad: self.delta,
            });
        }
        Ok(self.h(x, y))
    }

    /// Jacobian `det DF = d eps / d y`, computed spectrally.
    pub fn jacobian(&self, z: Point) -> f64 {
        if self.eps.is_zero() {
            return 0.0;
        }
        self.deps_dy.eval(z.x, z.y)
    }

    /// Invert `x -> h_y(x)` on a monotone branch: returns `x` in `branch`
    /// with `h_y(x) = target` (to ~1e-13). Monotonicity of the branch is
    /// verified on samples.
    pub fn invert_h(&self, y: f64, target: f64, branch: Interval) -> Result<f64> {
        let n = 17;
        let mut sign = 0.0;
        for &x in &branch.linspace(n) {
            let d = self.dh_dx(x, y);
            if d == 0.0 || (sign != 0.0 && d.signum() != sign) {
                return Err(Error::NonMonotoneBranch {
                    lo: branch.lo,
                    hi: branch.hi,
                    y,
                });
            }
            sign = d.signum();
        }
        let (ha, hb) = (self.h(branch.lo, y), self.h(branch.hi, y));
        let (lo_img, hi_img) = (ha.min(hb), ha.max(hb));
        if target < lo_img || target > hi_img {
            return Err(Error::TargetOutsideImage {
                target,
                lo: lo_img,
                hi: hi_img,
                y,
            });
        }
        self.invert_h_warm(y, target, branch, branch.mid())
    }

    /// Branch inversion without the per-call monotonicity sweep: Newton from
    /// `x0` clamped to the branch, bracketed fallback. Callers verify the
    /// branch once up front (hot loops in the graph pullback and the
    /// renormalization refit).
    pub(crate) fn invert_h_warm(
        &self,
        y: f64,
        target: f64,
        branch: Interval,
        x0: f64,
    ) -> Result<f64> {
        let tol = 1e-14 * target.abs().max(1.0);
        let mut x = x0.clamp(branch.lo, branch.hi);
        for _ in 0..30 {
            let r = self.h(x, y) - target;
            if r.abs() < tol {
                return Ok(x);
            }
            let d = self.dh_dx(x, y);
            if d == 0.0 {
                break;
            }
            let next = (x - r / d).clamp(branch.lo, branch.hi);
            if (next - x).abs() < f64::EPSILON * x.abs().max(1.0) {
                let r2 = self.h(next, y) - target;
                if r2.abs() < 1e-10 * target.abs().max(1.0) {
                    return Ok(next);
                }
                break;
            }
            x = next;
        }
        let (ha, hb) = (self.h(branch.lo, y), self.h(branch.hi, y));
        let (lo_img, hi_img) = (ha.min(hb), ha.max(hb));
        if target < lo_img || target > hi_img {
            return Err(Error::TargetOutsideImage {
                target,
                lo: lo_img,
                hi: hi_img,
                y,
            });
        }
        find_root(
            |x| self.h(x, y) - target,
            branch.lo,
            branch.hi,
            tol.max(1e-14),
        )
    }
}

/// A saddle fixed point of the map with its multipliers.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SaddlePoint {
    pub x: f64,
    pub y: f64,
    /// Eigenvalues of `DF`, expanding one first.
    pub multipliers: (f64, f64),
}

impl SaddlePoint {
    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Both saddle fixed points: `p(-1)` with expanding positive multiplier and
/// `p(0)` with expanding negative multiplier.
///
/// A fixed point of `F` necessarily has `y = x`, so the search reduces to
/// Newton on the diagonal `f(x) - eps(x,x) - x = 0`; the 2-D residual is
/// verified afterwards.
pub fn fixed_points(map: &HenonMap) -> Result<(SaddlePoint, SaddlePoint)> {
    let pts = crate::unimodal::unimodal_points(&map.f)?;
    let diag = |x: f64| map.f.eval(x) - map.eps.eval(x, x) - x;
    let p_minus1_x = find_root(diag, map.ih.lo, pts.c, 1e-14)
        .map_err(|e| Error::FixedPoint(format!("p(-1) search: {e}")))?;
    let p0_x = find_root(diag, pts.c, map.ih.hi.min(1.05), 1e-14)
        .map_err(|e| Error::FixedPoint(format!("p(0) search: {e}")))?;
    let mk = |x: f64| -> Result<SaddlePoint> {
        let z = Point::new(x, x);
        let img = map.apply(z);
        let res = ((img.x - z.x).powi(2) + (img.y - z.y).powi(2)).sqrt();
        if res > 1e-10 {
            return Err(Error::FixedPoint(format!("residual {res:.2e} at x = {x}")));
        }
        let a = map.dh_dx(x, x);
        let b = -map.jacobian(z);
        // Eigenvalues of [[a, b], [1, 0]].
        let disc = a * a + 4.0 * b;
        if disc < 0.0 {
            return Err(Error::FixedPoint(format!("complex multipliers at x = {x}")));
        }
        let r = disc.sqrt();
        let (m1, m2) = ((a + r) / 2.0, (a - r) / 2.0);
        let (expanding, contracting) = if m1.abs() >= m2.abs() {
            (m1, m2)
        } else {
            (m2, m1)
        };
        for m in [expanding, contracting] {
            if (m.abs() - 1.0).abs() < HYPERBOLICITY_MARGIN {
                return Err(Error::NonHyperbolic { value: m });
            }
        }
        if expanding.abs() < 1.0 {
            return Err(Error::FixedPoint(format!(
                "no expanding multiplier at x = {x}"
            )));
        }
        Ok(SaddlePoint {
            x,
            y: x,
            multipliers: (expanding, contracting),
        })
    };
    let pm1 = mk(p_minus1_x)?;
    let p0 = mk(p0_x)?;
    if pm1.multipliers.0 <= 1.0 {
        return Err(Error::FixedPoint(format!(
            "p(-1) multiplier {} not expanding positive",
            pm1.multipliers.0
        )));
    }
    if p0.multipliers.0 >= -1.0 {
        return Err(Error::FixedPoint(format!(
            "p(0) multiplier {} not expanding negative",
            p0.multipliers.0
        )));
    }
    Ok((pm1, p0))
}

/// JSON map-definition schema.
///
/// ```json
/// {
///   "f":   {"kind": "quadratic", "a": 1.7996565}   or  {"coeffs": [...]},
///   "eps": {"kind": "linear_y", "b": 0.025}        or  {"grid": [[...], ...]},
///   "Ih":  [-1.3, 1.1],
///   "Iv":  [-1.3, 1.1],
///   "delta": 0.2
/// }
/// ```
///
/// `coeffs` are Chebyshev coefficients on `Ih`; `grid` is the tensor
/// Chebyshev coefficient matrix (`grid[i][j]` multiplies `T_i(x) T_j(y)`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapSpec {
    pub f: FSpec,
    pub eps: EpsSpec,
    #[serde(rename = "Ih", default = "default_ih")]
    pub ih: [f64; 2],
    #[serde(rename = "Iv", default = "default_ih")]
    pub iv: [f64; 2],
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_ih() -> [f64; 2] {
    [DEFAULT_IH.0, DEFAULT_IH.1]
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FSpec {
    Tagged(FKind),
    Coeffs { coeffs: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FKind {
    /// `f(x) = a (1 + x)(1 - x) - 1`.
    #[serde(rename = "quadratic")]
    Quadratic { a: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsSpec {
    Tagged(EpsKind),
    Grid { grid: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EpsKind {
    /// `eps(x, y) = b y`; the classical Hénon family is `quadratic` + this.
    #[serde(rename = "linear_y")]
    LinearY { b: f64 },
    /// `eps(x, y) = b y + c x y`.
    #[serde(rename = "bilinear")]
    Bilinear { b: f64, c: f64 },
    /// `eps = 0` (degenerate map).
    #[serde(rename = "zero")]
    Zero,
}

impl MapSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MapSpec =
            serde_json::from_str(text).map_err(|e| Error::MapSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ih[0] < self.ih[1]) {
            return Err(Error::MapSpec(format!(
                "Ih: need lo < hi, got {:?}",
                self.ih
            )));
        }
        if self.ih[0] > -1.0 || self.ih[1] < 1.0 {
            return Err(Error::MapSpec(format!(
                "Ih must contain [-1, 1], got {:?}",
                self.ih
            )));
        }
        if !(self.iv[0] < self.iv[1]) {
            return Err(Error::MapSpec(format!(
                "Iv: need lo < hi, got {:?}",
                self.iv
            )));
        }
        if self.iv[0] > self.ih[0] || self.iv[1] < self.ih[1] {
            return Err(Error::MapSpec("Iv must contain Ih".into()));
        }
        if !(self.delta > 0.0) {
            return Err(Error::MapSpec(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if let FSpec::Coeffs { coeffs } = &self.f {
            if coeffs.is_empty() {
                return Err(Error::MapSpec("f.coeffs must be nonempty".into()));
            }
        }
        if let EpsSpec::Grid { grid } = &self.eps {
            if grid.is_empty() || grid.iter().any(|row| row.len() != grid[0].len()) {
                return Err(Error::MapSpec(
                    "eps.grid must be a nonempty rectangular matrix".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<HenonMap> {
        self.validate()?;
        let ih = Interval::new(self.ih[0], self.ih[1]);
        let iv = Interval::new(self.iv[0], self.iv[1]);
        let f = match &self.f {
            FSpec::Tagged(FKind::Quadratic { a }) => {
                let a = *a;
                AnalyticFn::fit_cheb(
                    move |x| a * (1.0 + x) * (1.0 - x) - 1.0,
                    ih,
                    DEFAULT_F_DEGREE,
                )
            }
            FSpec::Coeffs { coeffs } => AnalyticFn::from_coeffs(coeffs.clone(), ih),
        };
        let eps = match &self.eps {
            EpsSpec::Tagged(EpsKind::LinearY { b }) => {
                let b = *b;
                if b == 0.0 {
                    AnalyticFn2::zero(ih, iv)
                } else {
                    AnalyticFn2::fit_cheb(
                        move |_, y| b * y,
                        ih,
                        iv,
                        DEFAULT_EPS_DEGREE,
                        DEFAULT_EPS_DEGREE,
                    )
                }
            }
            EpsSpec::Tagged(EpsKind::Bilinear { b, c }) => {
                let (b, c) = (*b, *c);
                AnalyticFn2::fit_cheb(
                    move |x, y| b * y + c * x * y,
                    ih,
                    iv,
                    DEFAULT_EPS_DEGREE,
                    DEFAULT_EPS_DEGREE,
                )
            }
            EpsSpec::Tagged(EpsKind::Zero) => AnalyticFn2::zero(ih, iv),
            EpsSpec::Grid { grid } => AnalyticFn2 {
                xdom: ih,
                ydom: iv,
                coeffs: grid.clone(),
            },
        };
        Ok(HenonMap::new(f, eps, ih, iv, self.delta))
    }

    /// The worked example used across the test suite: `f(x) = 1.7996565 (1+x)(1-x) - 1`,
    /// `eps(x, y) = 0.025 y` on the default domain.
    pub fn worked_example() -> Self {
        MapSpec {
            f: FSpec::Tagged(FKind::Quadratic { a: 1.7996565 }),
            eps: EpsSpec::Tagged(EpsKind::LinearY { b: 0.025 }),
            ih: default_ih(),
            iv: default_ih(),
            delta: DEFAULT_DELTA,
        }
    }
}
