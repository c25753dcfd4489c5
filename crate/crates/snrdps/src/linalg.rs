//! Dense numerical kernels: largest eigenvalue of a real symmetric matrix,
//! upper concave envelopes, and scalar minimization on an interval.
//!
//! Everything here works on tiny matrices (≤ 40×40 on the analytic paths,
//! ≤ 384 in full-space verification), so a hand-rolled cyclic Jacobi sweep
//! beats pulling in an external solver.

use crate::error::{invalid, Result};

/// Default absolute tolerance used by eigenvalue computations.
pub const DEFAULT_EIG_TOL: f64 = 1e-12;

/// Dense real symmetric matrix. Symmetry is enforced at construction:
/// builders only ever evaluate the upper triangle and mirror it, so
/// `entries[i][j] == entries[j][i]` holds exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SymOperator {
    dim: usize,
    data: Vec<f64>,
}

impl SymOperator {
    /// Zero operator of dimension `dim` (`dim ≥ 1`).
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "SymOperator requires dim >= 1");
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    /// Identity of dimension `dim`.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Builds a symmetric matrix by evaluating `f` on the upper triangle
    /// (`i ≤ j`) and mirroring.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets entry (i, j) and its mirror.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    /// Adds `(i, j)` and its mirror by `v`.
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] += v;
        if i != j {
            self.data[j * self.dim + i] += v;
        }
    }

    /// `self + c * other`.
    pub fn scaled_add(&self, c: f64, other: &SymOperator) -> SymOperator {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        let n = self.dim;
        let mut out = vec![0.0; n];
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(n)) {
            *o = row.iter().zip(v).map(|(a, x)| a * x).sum();
        }
        out
    }

    /// Rayleigh quotient `vᵀ M v / vᵀ v`.
    pub fn rayleigh(&self, v: &[f64]) -> f64 {
        let mv = self.matvec(v);
        let num: f64 = v.iter().zip(&mv).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|a| a * a).sum();
        num / den
    }

    /// `tr(self · other)`.
    pub fn trace_product(&self, other: &SymOperator) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Principal submatrix on the given (strictly increasing) index set.
    pub fn principal_submatrix(&self, idx: &[usize]) -> SymOperator {
        SymOperator::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    pub fn max_abs_diff(&self, other: &SymOperator) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// All eigenvalues (ascending) by cyclic Jacobi sweeps.
    ///
    /// Terminates when the off-diagonal Frobenius norm drops below
    /// `max(tol, 4·ε·‖M‖_F)`; the absolute eigenvalue error is bounded by
    /// that threshold. Deterministic for fixed input.
    pub fn eigenvalues(&self, tol: f64) -> Result<Vec<f64>> {
        if tol <= 0.0 {
            return Err(invalid("eigenvalue tolerance must be positive"));
        }
        if self.data.iter().any(|x| !x.is_finite()) {
            return Err(invalid("matrix has non-finite entries"));
        }
        let n = self.dim;
        if n == 1 {
            return Ok(vec![self.data[0]]);
        }
        let mut a = self.data.clone();
        let stop = tol.max(4.0 * f64::EPSILON * self.frobenius());
        const MAX_SWEEPS: usize = 64;
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += 2.0 * a[i * n + j] * a[i * n + j];
                }
            }
            if off.sqrt() <= stop {
                break;
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (theta * theta + 1.0).sqrt())
                    } else {
                        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    a[p * n + p] = app - t * apq;
                    a[q * n + q] = aqq + t * apq;
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    for k in 0..n {
                        if k == p || k == q {
                            continue;
                        }
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[p * n + k] = a[k * n + p];
                        a[k * n + q] = s * akp + c * akq;
                        a[q * n + k] = a[k * n + q];
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        Ok(eig)
    }

    /// Largest eigenvalue with absolute error ≤ `max(tol, 4·ε·‖M‖_F)`.
    pub fn largest_eigenvalue(&self, tol: f64) -> Result<f64> {
        Ok(*self
            .eigenvalues(tol)?
            .last()
            .expect("dim >= 1 guarantees an eigenvalue"))
    }

    pub fn smallest_eigenvalue(&self, tol: f64) -> Result<f64> {
        Ok(self.eigenvalues(tol)?[0])
    }
}

/// Piecewise-linear curve on `[min x, max x]` with strictly increasing
/// knot abscissae. Evaluation clamps to the end values outside the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct PLCurve {
    knots: Vec<(f64, f64)>,
}

impl PLCurve {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(invalid("PLCurve needs at least 2 knots"));
        }
        if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(invalid("PLCurve knots must be finite"));
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(invalid("PLCurve knot x values must strictly increase"));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x <= k[0].0 {
            return k[0].1;
        }
        if x >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|&(kx, _)| kx <= x);
        let (x0, y0) = k[i - 1];
        let (x1, y1) = k[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// True when chord slopes are nonincreasing (within `tol`).
    pub fn is_concave(&self, tol: f64) -> bool {
        let slopes: Vec<f64> = self
            .knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        slopes.windows(2).all(|s| s[1] <= s[0] + tol)
    }
}

/// Least concave majorant of a finite point set, restricted to
/// `[min x, max x]`. Duplicate abscissae keep the larger ordinate.
pub fn upper_concave_envelope(points: &[(f64, f64)]) -> Result<PLCurve> {
    if points.len() < 2 {
        return Err(invalid("envelope needs at least 2 points"));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(invalid("envelope points must be finite"));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    // duplicate x: keep max y
    let mut dedup: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        match dedup.last_mut() {
            Some(last) if last.0 == p.0 => last.1 = last.1.max(p.1),
            _ => dedup.push(p),
        }
    }
    if dedup.len() < 2 {
        return Err(invalid("envelope needs at least 2 distinct x values"));
    }
    // monotone chain, upper hull
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(dedup.len());
    for p in dedup {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    PLCurve::new(hull)
}

/// Golden-section minimum of `f` on `[a, b]`; returns `(x*, f(x*))`.
/// Assumes `f` is unimodal on the bracket.
pub fn golden_min(f: &mut impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while (b - a).abs() > tol && iters < 200 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        iters += 1;
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Minimum of `f` over an explicit grid, refined by golden section between
/// the neighbours of the best grid point. Returns `(x*, f(x*))`.
pub fn minimize_on_grid(
    f: &mut impl FnMut(f64) -> f64,
    grid: &[f64],
    tol: f64,
) -> Result<(f64, f64)> {
    if grid.len() < 2 {
        return Err(invalid("grid needs at least 2 points"));
    }
    let mut best = (grid[0], f(grid[0]));
    let mut best_i = 0;
    for (i, &x) in grid.iter().enumerate().skip(1) {
        let v = f(x);
        if !v.is_finite() {
            return Err(invalid("objective returned a non-finite value"));
        }
        if v < best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    if hi > lo {
        let refined = golden_min(f, lo, hi, tol);
        if refined.1 < best.1 {
            best = refined;
        }
    }
    Ok(best)
}

/// Scalar minimization on `[lo, hi]`: coarse uniform grid (default 256
/// cells, a config knob via `minimize_scalar_with`) plus golden-section
/// refinement around the best grid point. Exact only for unimodal `f`;
/// otherwise returns the best value the refined grid sees.
pub fn minimize_scalar(
    f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    minimize_scalar_with(f, lo, hi, tol, 256)
}

/// [`minimize_scalar`] with an explicit coarse grid size.
pub fn minimize_scalar_with(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
    grid_cells: usize,
) -> Result<(f64, f64)> {
    if tol <= 0.0 {
        return Err(invalid("tolerance must be positive"));
    }
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(invalid("need finite lo < hi"));
    }
    if grid_cells < 2 {
        return Err(invalid("grid needs at least 2 cells"));
    }
    let grid: Vec<f64> = (0..=grid_cells)
        .map(|i| lo + (hi - lo) * i as f64 / grid_cells as f64)
        .collect();
    minimize_on_grid(&mut f, &grid, tol)
}

/// Logarithmically spaced grid on `[lo, hi]` (both positive), `count ≥ 2`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
