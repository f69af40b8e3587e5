//! Chebyshev representations of real-analytic functions on closed intervals.
//!
//! Everything downstream (unimodal maps, Hénon-like maps, manifolds, the
//! renormalization tower) is built on [`AnalyticFn`] (one variable) and
//! [`AnalyticFn2`] (tensor product, two variables). Coefficients live in the
//! Chebyshev basis mapped to the working interval, evaluation is Clenshaw
//! recursion, differentiation is the exact spectral recurrence.

use crate::{Error, Result};

/// Default extrapolation pad beyond the fit domain. Plays the role of the
/// analyticity margin `delta`; evaluation up to `domain + pad` is allowed.
pub const DEFAULT_PAD: f64 = 0.2;

/// Default absolute tolerance for bracketed root finding.
pub const ROOT_TOL: f64 = 1e-12;

/// Maximum bisection/secant steps for bracketed root finding.
pub const MAX_ROOT_ITERS: usize = 200;

/// Grid points per axis for sup-norm estimation (endpoints included).
pub const SUP_GRID_N: usize = 257;

/// A closed interval with finite endpoints, `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(
            lo.is_finite() && hi.is_finite() && lo < hi,
            "bad interval [{lo}, {hi}]"
        );
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_pad(&self, x: f64, pad: f64) -> bool {
        self.lo - pad <= x && x <= self.hi + pad
    }

    /// Expand both endpoints by `pad`.
    pub fn pad(&self, pad: f64) -> Self {
        Self::new(self.lo - pad, self.hi + pad)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then(|| Interval::new(lo, hi))
    }

    /// Map to the reference interval `[-1, 1]`.
    pub fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - (self.lo + self.hi)) / (self.hi - self.lo)
    }

    pub fn from_unit(&self, t: f64) -> f64 {
        0.5 * ((self.hi - self.lo) * t + (self.hi + self.lo))
    }

    /// `n` Chebyshev points of the first kind mapped into the interval,
    /// in increasing order.
    pub fn cheb_points(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| {
                let t = (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos();
                self.from_unit(-t)
            })
            .collect()
    }

    /// `n >= 2` equispaced points including both endpoints.
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        let d = self.len() / (n - 1) as f64;
        (0..n).map(|k| self.lo + d * k as f64).collect()
    }
}

/// An affine map `x -> a*x + b`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
}

impl Affine {
    /// The affine map sending `x0 -> y0` and `x1 -> y1`.
    pub fn through(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        let a = (y1 - y0) / (x1 - x0);
        Self { a, b: y0 - a * x0 }
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.a * x + self.b
    }

    pub fn inv(&self) -> Affine {
        Affine {
            a: 1.0 / self.a,
            b: -self.b / self.a,
        }
    }

    pub fn map_interval(&self, iv: &Interval) -> Interval {
        let (u, v) = (self.apply(iv.lo), self.apply(iv.hi));
        Interval::new(u.min(v), u.max(v))
    }
}

/// Spectral (Chebyshev) representation of a real-analytic function on an
/// interval. `coeffs[k]` multiplies `T_k` on the domain; `degree + 1`
/// coefficients are stored.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AnalyticFn {
    pub domain: Interval,
    pub coeffs: Vec<f64>,
    pub pad: f64,
}

impl AnalyticFn {
    pub fn from_coeffs(coeffs: Vec<f64>, domain: Interval) -> Self {
        assert!(!coeffs.is_empty());
        Self {
            domain,
            coeffs,
            pad: DEFAULT_PAD,
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn constant(value: f64, domain: Interval) -> Self {
        Self::from_coeffs(vec![value], domain)
    }

    /// Interpolate `fun` at the `degree + 1` Chebyshev points of the domain.
    /// This is exact (to round-off) for polynomials of degree `<= degree` and
    /// geometrically accurate for analytic functions.
    pub fn fit_cheb(fun: impl Fn(f64) -> f64, domain: Interval, degree: usize) -> Self {
        let n = degree + 1;
        let vals: Vec<f64> = domain.cheb_points(n).iter().map(|&x| fun(x)).collect();
        // cheb_points are ordered by increasing x, i.e. t_k reversed; undo that.
        let mut v = vals;
        v.reverse();
        let coeffs = cheb_coeffs_from_node_values(&v);
        Self::from_coeffs(coeffs, domain)
    }

    /// Least-squares fit to arbitrary `(x, y)` samples. Requires at least
    /// `degree + 1` distinct nodes; returns the fitted function and the
    /// maximum residual over the provided samples.
    pub fn fit(samples: &[(f64, f64)], domain: Interval, degree: usize) -> Result<(Self, f64)> {
        let n = degree + 1;
        if samples.len() < n {
            return Err(Error::FitUnderdetermined {
                needed: n,
                got: samples.len(),
            });
        }
        let rows: Vec<Vec<f64>> = samples
            .iter()
            .map(|&(x, _)| cheb_basis_row(domain.to_unit(x), n))
            .collect();
        let rhs: Vec<f64> = samples.iter().map(|&(_, y)| y).collect();
        let coeffs = lstsq(&rows, &rhs)?;
        let f = Self::from_coeffs(coeffs, domain);
        let resid = samples
            .iter()
            .map(|&(x, y)| (f.eval(x) - y).abs())
            .fold(0.0, f64::max);
        Ok((f, resid))
    }

    /// Clenshaw evaluation. No domain check; Chebyshev extrapolation is
    /// numerically harmless within the configured pad.
    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, self.domain.to_unit(x))
    }

    /// Evaluation with the domain-plus-pad check from the module contract.
    pub fn eval_checked(&self, x: f64) -> Result<f64> {
        if !self.domain.contains_pad(x, self.pad) {
            return Err(Error::OutsideDomain {
                x,
                lo: self.domain.lo,
                hi: self.domain.hi,
                pad: self.pad,
            });
        }
        Ok(self.eval(x))
    }

    /// Exact spectral derivative of the representation.
    pub fn deriv(&self) -> AnalyticFn {
        let coeffs = cheb_deriv(&self.coeffs, 2.0 / self.domain.len());
        AnalyticFn {
            domain: self.domain,
            coeffs,
            pad: self.pad,
        }
    }

    /// Ratio of the trailing coefficient pair to the leading scale; small
    /// values certify that the representation is resolved.
    pub fn tail_ratio(&self) -> f64 {
        let scale = self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.coeffs.len();
        let tail = if n >= 2 {
            self.coeffs[n - 1].abs().max(self.coeffs[n - 2].abs())
        } else {
            self.coeffs[n - 1].abs()
        };
        tail / scale
    }
}

/// Compose `outer . inner`, refit on `domain` at the given degree.
/// The range of `inner` over the domain is checked against `outer.domain`
/// (with pad) by sampling; the reported residual compares the refit against
/// direct evaluation at 64 off-node points.
pub fn compose_refit(
    outer: &AnalyticFn,
    inner: &AnalyticFn,
    domain: Interval,
    degree: usize,
) -> Result<(AnalyticFn, f64)> {
    // Range check on a grid denser than the refit nodes.
    for &x in &domain.linspace(2 * (degree + 1) + 1) {
        let y = inner.eval(x);
        if !outer.domain.contains_pad(y, outer.pad) {
            return Err(Error::CompositionRange {
                x,
                y,
                lo: outer.domain.lo,
                hi: outer.domain.hi,
            });
        }
    }
    let composed = AnalyticFn::fit_cheb(|x| outer.eval(inner.eval(x)), domain, degree);
    let resid = domain
        .linspace(64)
        .iter()
        .map(|&x| (composed.eval(x) - outer.eval(inner.eval(x))).abs())
        .fold(0.0, f64::max);
    Ok((composed, resid))
}

/// Root of `f` on a bracket with a sign change; `|f(root)| < tol`.
pub fn find_root_monotone(f: &AnalyticFn, bracket: Interval) -> Result<f64> {
    find_root(|x| f.eval(x), bracket.lo, bracket.hi, ROOT_TOL)
}

/// Bracketed root finding: bisection with secant acceleration.
/// Requires a sign change; returns x with `|f(x)| < ftol` (or the bracket
/// collapsed to machine width, whichever is tighter).
pub fn find_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64, ftol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::NoBracket {
            lo,
            hi,
            flo: fa,
            fhi: fb,
        });
    }
    let mut best = if fa.abs() < fb.abs() {
        (a, fa)
    } else {
        (b, fb)
    };
    for _ in 0..MAX_ROOT_ITERS {
        // Secant candidate from the bracket endpoints, fall back to bisection.
        let mut x = b - fb * (b - a) / (fb - fa);
        if !x.is_finite() || x <= a || x >= b {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 || fx.abs() < ftol {
            return Ok(x);
        }
        if fa * fx < 0.0 {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
        if (b - a).abs() <= f64::EPSILON * (a.abs() + b.abs() + 1.0) {
            if best.1.abs() < ftol.max(1e-9) {
                return Ok(best.0);
            }
            return Err(Error::RootTolerance {
                resid: best.1.abs(),
                iters: MAX_ROOT_ITERS,
            });
        }
        // Force a bisection step every other iteration to guarantee progress.
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm.abs() < best.1.abs() {
            best = (m, fm);
        }
        if fm == 0.0 || fm.abs() < ftol {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    if best.1.abs() < ftol.max(1e-9) {
        Ok(best.0)
    } else {
        Err(Error::RootTolerance {
            resid: best.1.abs(),
            iters: MAX_ROOT_ITERS,
        })
    }
}

/// Max of `|f|` over an `n x n` tensor grid of the rectangle, corners
/// included. Monotone nondecreasing in `n`.
pub fn sup_norm_grid(f: impl Fn(f64, f64) -> f64, rect: (Interval, Interval), n: usize) -> f64 {
    assert!(n >= 2, "sup_norm_grid needs n >= 2 per axis");
    let xs = rect.0.linspace(n);
    let ys = rect.1.linspace(n);
    let mut m: f64 = 0.0;
    for &x in &xs {
        for &y in &ys {
            m = m.max(f(x, y).abs());
        }
    }
    m
}

/// Tensor-Chebyshev representation of a two-variable analytic function on a
/// rectangle. `coeffs[i][j]` multiplies `T_i(x) * T_j(y)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AnalyticFn2 {
    pub xdom: Interval,
    pub ydom: Interval,
    pub coeffs: Vec<Vec<f64>>,
}

impl AnalyticFn2 {
    pub fn zero(xdom: Interval, ydom: Interval) -> Self {
        Self {
            xdom,
            ydom,
            coeffs: vec![vec![0.0]],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|row| row.iter().all(|&c| c == 0.0))
    }

    /// Interpolate `fun` on the `(dx + 1) x (dy + 1)` tensor Chebyshev grid.
    pub fn fit_cheb(
        fun: impl Fn(f64, f64) -> f64,
        xdom: Interval,
        ydom: Interval,
        dx: usize,
        dy: usize,
    ) -> Self {
        let nx = dx + 1;
        let ny = dy + 1;
        let xs = xdom.cheb_points(nx);
        let ys = ydom.cheb_points(ny);
        // Values with node index order matching decreasing-t convention.
        let vals: Vec<Vec<f64>> = (0..nx)
            .map(|ix| {
                let x = xs[nx - 1 - ix];
                (0..ny).map(|iy| fun(x, ys[ny - 1 - iy])).collect()
            })
            .collect();
        Self::from_node_values_t(&vals, xdom, ydom)
    }

    /// Build from a value matrix `vals[i][j]` sampled at the first-kind
    /// tensor nodes in decreasing-`t` order (`t_k = cos(pi (k+1/2)/n)`).
    pub(crate) fn from_node_values_t(vals: &[Vec<f64>], xdom: Interval, ydom: Interval) -> Self {
        let nx = vals.len();
        let ny = vals[0].len();
        let rows: Vec<Vec<f64>> = vals
            .iter()
            .map(|v| cheb_coeffs_from_node_values(v))
            .collect();
        let mut coeffs = vec![vec![0.0; ny]; nx];
        let mut col = vec![0.0; nx];
        for j in 0..ny {
            for i in 0..nx {
                col[i] = rows[i][j];
            }
            let c = cheb_coeffs_from_node_values(&col);
            for i in 0..nx {
                coeffs[i][j] = c[i];
            }
        }
        Self { xdom, ydom, coeffs }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let ty = self.ydom.to_unit(y);
        let inner: Vec<f64> = self.coeffs.iter().map(|row| clenshaw(row, ty)).collect();
        clenshaw(&inner, self.xdom.to_unit(x))
    }

    /// Exact spectral partial derivative in `y`.
    pub fn deriv_y(&self) -> AnalyticFn2 {
        let scale = 2.0 / self.ydom.len();
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| {
                if row.len() == 1 {
                    vec![0.0]
                } else {
                    cheb_deriv(row, scale)
                }
            })
            .collect();
        AnalyticFn2 {
            xdom: self.xdom,
            ydom: self.ydom,
            coeffs,
        }
    }

    /// Exact spectral partial derivative in `x`.
    pub fn deriv_x(&self) -> AnalyticFn2 {
        let nx = self.coeffs.len();
        if nx == 1 {
            return AnalyticFn2::zero(self.xdom, self.ydom);
        }
        let ny = self.coeffs[0].len();
        let scale = 2.0 / self.xdom.len();
        let mut coeffs = vec![vec![0.0; ny]; nx - 1];
        let mut col = vec![0.0; nx];
        for j in 0..ny {
            for i in 0..nx {
                col[i] = self.coeffs[i][j];
            }
            let d = cheb_deriv(&col, scale);
            for i in 0..nx - 1 {
                coeffs[i][j] = d[i];
            }
        }
        AnalyticFn2 {
            xdom: self.xdom,
            ydom: self.ydom,
            coeffs,
        }
    }

    /// Sup norm over the default 257-per-axis grid of the fit rectangle.
    pub fn sup_norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        sup_norm_grid(|x, y| self.eval(x, y), (self.xdom, self.ydom), SUP_GRID_N)
    }
}

/// Clenshaw recursion for a Chebyshev series at reference coordinate `t`.
pub fn clenshaw(coeffs: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + t * b1 - b2
}

/// Chebyshev coefficients from values at first-kind nodes
/// `t_k = cos(pi (k + 1/2) / n)`, `k = 0..n` (decreasing in `t`).
pub(crate) fn cheb_coeffs_from_node_values(vals: &[f64]) -> Vec<f64> {
    let n = vals.len();
    let mut coeffs = vec![0.0; n];
    for (j, c) in coeffs.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &v) in vals.iter().enumerate() {
            acc += v * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / n as f64).cos();
        }
        *c = 2.0 * acc / n as f64;
    }
    coeffs[0] *= 0.5;
    coeffs
}

/// Derivative coefficients: `b_k = b_{k+2} + 2 (k+1) a_{k+1}`, scaled by the
/// interval chain factor.
fn cheb_deriv(coeffs: &[f64], scale: f64) -> Vec<f64> {
    let n = coeffs.len();
    if n == 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n - 1];
    let mut bkp2 = 0.0;
    let mut bkp1 = 0.0;
    for k in (0..n - 1).rev() {
        let bk = bkp2 + 2.0 * (k as f64 + 1.0) * coeffs[k + 1];
        d[k] = bk;
        bkp2 = bkp1;
        bkp1 = bk;
    }
    d[0] *= 0.5;
    for v in d.iter_mut() {
        *v *= scale;
    }
    d
}

/// Basis row `[T_0(t), ..., T_{n-1}(t)]`.
fn cheb_basis_row(t: f64, n: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(n);
    let mut tkm1 = 1.0;
    let mut tk = t;
    row.push(1.0);
    if n > 1 {
        row.push(t);
    }
    for _ in 2..n {
        let tkp1 = 2.0 * t * tk - tkm1;
        row.push(tkp1);
        tkm1 = tk;
        tk = tkp1;
    }
    row
}

/// Dense least squares min ||A x - b|| via Householder QR.
/// Also used by the Feigenbaum Gauss-Newton solver.
pub fn lstsq(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let m = a.len();
    let n = a[0].len();
    if m < n {
        return Err(Error::FitUnderdetermined { needed: n, got: m });
    }
    let mut r: Vec<Vec<f64>> = a.to_vec();
    let mut y = b.to_vec();
    for k in 0..n {
        // Householder vector for column k.
        let mut norm = 0.0;
        for i in k..m {
            norm += r[i][k] * r[i][k];
        }
        let norm = norm.sqrt();
        if norm < 1e-300 {
            return Err(Error::IllConditioned(format!("zero column {k} in QR")));
        }
        let alpha = if r[k][k] >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| r[i][k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for j in k..n {
                let dot: f64 = (k..m).map(|i| v[i - k] * r[i][j]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..m {
                    r[i][j] -= f * v[i - k];
                }
            }
            let dot: f64 = (k..m).map(|i| v[i - k] * y[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                y[i] -= f * v[i - k];
            }
        }
        r[k][k] = alpha;
    }
    // Back substitution on the upper-triangular system.
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = y[k];
        for j in k + 1..n {
            s -= r[k][j] * x[j];
        }
        if r[k][k].abs() < 1e-300 {
            return Err(Error::IllConditioned(format!("singular pivot at {k}")));
        }
        x[k] = s / r[k][k];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Interval {
        Interval::new(-1.0, 1.0)
    }

    #[test]
    fn fit_constant_gives_unit_leading_coefficient() {
        let samples: Vec<(f64, f64)> = unit().linspace(9).iter().map(|&x| (x, 1.0)).collect();
        let (f, resid) = AnalyticFn::fit(&samples, unit(), 4).unwrap();
        assert!(resid < 1e-12);
        assert!((f.coeffs[0] - 1.0).abs() < 1e-12);
        for &c in &f.coeffs[1..] {
            assert!(c.abs() < 1e-12);
        }
    }

    #[test]
    fn fit_square_evaluates_exactly() {
        let samples: Vec<(f64, f64)> = unit().linspace(9).iter().map(|&x| (x, x * x)).collect();
        let (f, _) = AnalyticFn::fit(&samples, unit(), 2).unwrap();
        assert!((f.eval(0.5) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn fit_example_map_critical_value() {
        let a = 1.7996565;
        let g = |x: f64| a * (1.0 + x) * (1.0 - x) - 1.0;
        let f = AnalyticFn::fit_cheb(g, Interval::new(-1.3, 1.1), 40);
        assert!((f.eval(0.0) - 0.7996565).abs() < 1e-12);
    }

    #[test]
    fn fit_underdetermined_is_an_error() {
        let samples = vec![(0.0, 1.0), (0.5, 2.0)];
        assert!(matches!(
            AnalyticFn::fit(&samples, unit(), 4),
            Err(Error::FitUnderdetermined { .. })
        ));
    }

    #[test]
    fn deriv_of_square_is_linear() {
        let f = AnalyticFn::fit_cheb(|x| x * x, unit(), 8);
        let df = f.deriv();
        assert!((df.eval(0.3) - 0.6).abs() < 1e-12);
        assert!((df.eval(-0.7) + 1.4).abs() < 1e-12);
    }

    #[test]
    fn deriv_of_fitted_example_map_vanishes_at_critical_point() {
        let a = 1.7996565;
        let f = AnalyticFn::fit_cheb(|x| a * (1.0 - x * x) - 1.0, Interval::new(-1.3, 1.1), 40);
        assert!(f.deriv().eval(0.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_derivative_matches_finite_difference() {
        let f = AnalyticFn::fit_cheb(|x| (2.0 * x).sin() * x.exp(), unit(), 60);
        let df = f.deriv();
        let h = 1e-6;
        for &x in &Interval::new(-0.9, 0.9).linspace(21) {
            let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
            let rel = (df.eval(x) - fd).abs() / fd.abs().max(1.0);
            assert!(rel < 1e-5, "x = {x}: spectral {} vs fd {}", df.eval(x), fd);
        }
    }

    #[test]
    fn eval_outside_pad_is_domain_error() {
        let f = AnalyticFn::fit_cheb(|x| x, unit(), 2);
        assert!(f.eval_checked(1.1).is_ok());
        assert!(matches!(
            f.eval_checked(1.5),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn compose_squares_gives_fourth_power() {
        let sq = AnalyticFn::fit_cheb(|x| x * x, unit(), 4);
        let (f4, resid) = compose_refit(&sq, &sq, unit(), 8).unwrap();
        assert!(resid < 1e-12);
        assert!((f4.eval(0.5) - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn compose_identity_preserves_coefficients() {
        let a = 1.7996565;
        let f = AnalyticFn::fit_cheb(|x| a * (1.0 - x * x) - 1.0, unit(), 12);
        let id = AnalyticFn::fit_cheb(|x| x, unit(), 12);
        let (g, _) = compose_refit(&f, &id, unit(), 12).unwrap();
        for (c, d) in f.coeffs.iter().zip(&g.coeffs) {
            assert!((c - d).abs() < 1e-12);
        }
    }

    #[test]
    fn compose_range_escape_is_detected() {
        let outer = AnalyticFn::fit_cheb(|x| x, Interval::new(-0.5, 0.5), 2);
        let inner = AnalyticFn::fit_cheb(|x| 2.0 * x, unit(), 2);
        assert!(matches!(
            compose_refit(&outer, &inner, unit(), 4),
            Err(Error::CompositionRange { .. })
        ));
    }

    #[test]
    fn root_of_affine() {
        let f = AnalyticFn::fit_cheb(|x| x - 0.5, Interval::new(0.0, 1.0), 2);
        let r = find_root_monotone(&f, Interval::new(0.0, 1.0)).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn root_of_example_fixed_point_matches_quadratic_formula() {
        // f(x) - x = 0 with f = 1.7996565 (1 - x^2) - 1 on [0, 1]:
        // 1.7996565 x^2 + x - 0.7996565 = 0.
        let a = 1.7996565_f64;
        let oracle = (-1.0 + (1.0 + 4.0 * a * (a - 1.0)).sqrt()) / (2.0 * a);
        let f = AnalyticFn::fit_cheb(
            |x| a * (1.0 - x * x) - 1.0 - x,
            Interval::new(-1.3, 1.1),
            20,
        );
        let r = find_root_monotone(&f, Interval::new(0.0, 1.0)).unwrap();
        assert!((r - oracle).abs() < 1e-10);
        assert!((r - 0.4443).abs() < 1e-4);
    }

    #[test]
    fn root_at_minus_one_exactly() {
        let a = 1.7996565_f64;
        let f = AnalyticFn::fit_cheb(
            |x| a * (1.0 - x * x) - 1.0 - x,
            Interval::new(-1.6, 1.1),
            20,
        );
        let r = find_root_monotone(&f, Interval::new(-1.5, -0.5)).unwrap();
        assert!((r + 1.0).abs() < 1e-10, "f(-1) = -1 by substitution");
    }

    #[test]
    fn missing_bracket_is_an_error() {
        let f = AnalyticFn::fit_cheb(|x| x * x + 1.0, unit(), 4);
        assert!(matches!(
            find_root_monotone(&f, unit()),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn sup_norm_linear_eps() {
        let v = sup_norm_grid(|_, y| 0.025 * y, (unit(), unit()), 33);
        assert!((v - 0.025).abs() < 1e-14);
        let z = sup_norm_grid(|_, _| 0.0, (unit(), unit()), 33);
        assert_eq!(z, 0.0);
        let c = sup_norm_grid(|x, y| x * y, (unit(), unit()), 3);
        assert!((c - 1.0).abs() < 1e-14, "corner attains the max");
    }

    #[test]
    fn tensor_fit_and_partials() {
        let e = AnalyticFn2::fit_cheb(|x, y| 0.025 * y + 0.001 * x * y, unit(), unit(), 8, 8);
        assert!((e.eval(0.3, -0.7) - (0.025 * -0.7 + 0.001 * 0.3 * -0.7)).abs() < 1e-14);
        let ey = e.deriv_y();
        assert!((ey.eval(0.4, 0.2) - (0.025 + 0.001 * 0.4)).abs() < 1e-12);
        let ex = e.deriv_x();
        assert!((ex.eval(0.4, 0.2) - 0.001 * 0.2).abs() < 1e-12);
    }

    #[test]
    fn fit_eval_round_trip_on_random_polynomials() {
        // Polynomials of degree <= d refit at degree d reproduce themselves.
        let mut seed = 0x9e3779b97f4a7c15_u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for d in [3usize, 7, 12] {
            let monos: Vec<f64> = (0..=d).map(|_| next()).collect();
            let p = move |x: f64| monos.iter().rev().fold(0.0, |acc, &c| acc * x + c);
            let f = AnalyticFn::fit_cheb(&p, Interval::new(-2.0, 1.5), d);
            for _ in 0..100 {
                let x = -2.0 + 3.5 * (next() * 0.5 + 0.5);
                assert!((f.eval(x) - p(x)).abs() < 1e-10 * (1.0 + p(x).abs()));
            }
        }
    }

    #[test]
    fn lstsq_recovers_exact_solution() {
        let a = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        let x_true = [1.5, -0.5];
        let b: Vec<f64> = a
            .iter()
            .map(|r| r[0] * x_true[0] + r[1] * x_true[1])
            .collect();
        let x = lstsq(&a, &b).unwrap();
        assert!((x[0] - 1.5).abs() < 1e-12 && (x[1] + 0.5).abs() < 1e-12);
    }
}
