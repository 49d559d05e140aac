//! Direct sparse LU solves with residual certification.

use std::time::{Duration, Instant};

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::assembly::SaddleSystem;
use crate::sparse::CsrMatrix;

/// Largest accepted relative residual.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
const MAX_REFINEMENTS: usize = 3;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("singular system: the {block} block has a null space")]
    Singular { block: &'static str },
    #[error("matrix is {rows}x{cols} but the right-hand side has length {rhs}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        rhs: usize,
    },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("relative residual {residual:e} above tolerance {RESIDUAL_TOLERANCE:e}")]
    ResidualTooLarge { residual: f64 },
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    /// `|Ax - b| / |b|` (Euclidean norms; absolute when `b = 0`).
    pub relative_residual: f64,
    /// Relative residual before and after each refinement step.
    pub residual_history: Vec<f64>,
    /// Estimate of the 1-norm condition number from the LU factors.
    pub condition_estimate: f64,
    /// `eps |(|A| |x|)| / |b|`: the relative residual that rounding the exact
    /// solution to working precision already produces.
    pub rounding_floor: f64,
    pub wall_time: Duration,
}

/// LU factors of a square sparse matrix.
///
/// A dense last row and column (the mean-value multiplier) would make the
/// symbolic structure of the factors dense. Such a border is split off: the
/// sparse part is factored with one diagonal entry shifted (`pin`), which
/// also removes the null space the border constrains, and the border is
/// restored by a rank-3 Woodbury correction.
pub struct Factorization {
    lu: Lu<usize, f64>,
    n: usize,
    border: Option<Border>,
}

/// `A = A0 + U V^T` with `A0 = diag(K + alpha e_j e_j^T, 1)`,
/// `U = [-alpha e_j, c, e_m]`, `V = [e_j, e_m, r + (d - 1) e_m]`.
struct Border {
    pin: usize,
    alpha: f64,
    /// Last column and last row without the corner entry.
    col: Vec<(usize, f64)>,
    row: Vec<(usize, f64)>,
    corner: f64,
    /// `A0^-1 U`, `A0^-T V` and the two capacitance matrices.
    w: [Vec<f64>; 3],
    wt: [Vec<f64>; 3],
    cap: [[f64; 3]; 3],
    cap_t: [[f64; 3]; 3],
}

fn is_dense(count: usize, n: usize) -> bool {
    count as f64 > 16.0 + 2.0 * (n as f64).sqrt()
}

fn sparse_lu(
    n: usize,
    triplets: &[Triplet<usize, usize, f64>],
) -> Result<Lu<usize, f64>, SolverError> {
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, triplets)
        .map_err(|e| SolverError::Factorization(format!("{e:?}")))?;
    a.sp_lu()
        .map_err(|e| SolverError::Factorization(format!("{e:?}")))
}

/// Solves the 3x3 system `m x = b` by Gaussian elimination with partial pivoting.
fn solve3(m: &[[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut a = *m;
    let mut x = b;
    let scale = a.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs()));
    for k in 0..3 {
        let p = (k..3).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(k, p);
        x.swap(k, p);
        for i in k + 1..3 {
            let f = a[i][k] / a[k][k];
            for j in k..3 {
                a[i][j] -= f * a[k][j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..3).rev() {
        let s: f64 = (k + 1..3).map(|j| a[k][j] * x[j]).sum();
        x[k] = (x[k] - s) / a[k][k];
    }
    Some(x)
}

fn dot_sparse(v: &[(usize, f64)], x: &[f64]) -> f64 {
    v.iter().map(|&(i, a)| a * x[i]).sum()
}

impl Factorization {
    pub fn new(matrix: &CsrMatrix) -> Result<Self, SolverError> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(SolverError::DimensionMismatch {
                rows: n,
                cols: matrix.ncols(),
                rhs: n,
            });
        }
        faer::set_global_parallelism(Par::Seq);
        let m = n.wrapping_sub(1);
        let row_count = if n > 1 { matrix.row(m).count() } else { 0 };
        let col_count = if n > 1 {
            matrix.triplets().filter(|&(_, c, _)| c == m).count()
        } else {
            0
        };
        if n > 1 && (is_dense(row_count, n) || is_dense(col_count, n)) {
            return Self::bordered(matrix);
        }
        let triplets: Vec<_> = matrix
            .triplets()
            .map(|(r, c, v)| Triplet::new(r, c, v))
            .collect();
        Ok(Self {
            lu: sparse_lu(n, &triplets)?,
            n,
            border: None,
        })
    }

    fn bordered(matrix: &CsrMatrix) -> Result<Self, SolverError> {
        let n = matrix.nrows();
        let m = n - 1;
        let mut col = Vec::new();
        let mut row = Vec::new();
        let mut corner = 0.0;
        let mut triplets = Vec::with_capacity(matrix.nnz());
        for (r, c, v) in matrix.triplets() {
            match (r == m, c == m) {
                (true, true) => corner += v,
                (false, true) => col.push((r, v)),
                (true, false) => row.push((c, v)),
                (false, false) => triplets.push(Triplet::new(r, c, v)),
            }
        }
        let pin = col
            .iter()
            .chain(&row)
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|&(i, _)| i)
            .ok_or(SolverError::Singular {
                block: "multiplier",
            })?;
        let alpha = matrix.max_abs();
        triplets.push(Triplet::new(pin, pin, alpha));
        triplets.push(Triplet::new(m, m, 1.0));
        let lu = sparse_lu(n, &triplets)?;
        let mut f = Self {
            lu,
            n,
            border: None,
        };
        let unit = |i: usize, a: f64| {
            let mut v = vec![0.0; n];
            v[i] = a;
            v
        };
        let mut c_full = vec![0.0; n];
        for &(i, v) in &col {
            c_full[i] = v;
        }
        let mut r_full = unit(m, corner - 1.0);
        for &(i, v) in &row {
            r_full[i] = v;
        }
        let u = [unit(pin, -alpha), c_full, unit(m, 1.0)];
        let v = [unit(pin, 1.0), unit(m, 1.0), r_full];
        let w = [
            f.plain_solve(&u[0]),
            f.plain_solve(&u[1]),
            f.plain_solve(&u[2]),
        ];
        let wt = [
            f.plain_solve_transpose(&v[0]),
            f.plain_solve_transpose(&v[1]),
            f.plain_solve_transpose(&v[2]),
        ];
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut cap = [[0.0; 3]; 3];
        let mut cap_t = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let id = if i == j { 1.0 } else { 0.0 };
                cap[i][j] = id + dot(&v[i], &w[j]);
                cap_t[i][j] = id + dot(&u[i], &wt[j]);
            }
        }
        if solve3(&cap, [1.0, 0.0, 0.0]).is_none() {
            return Err(SolverError::Singular {
                block: "multiplier",
            });
        }
        f.border = Some(Border {
            pin,
            alpha,
            col,
            row,
            corner,
            w,
            wt,
            cap,
            cap_t,
        });
        Ok(f)
    }

    fn plain_solve(&self, b: &[f64]) -> Vec<f64> {
        let x = self.lu.solve(to_mat(b));
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    fn plain_solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let x = self.lu.solve_transpose(to_mat(b));
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = self.plain_solve(b);
        if let Some(bd) = &self.border {
            let m = self.n - 1;
            let vy = [
                y[bd.pin],
                y[m],
                dot_sparse(&bd.row, &y) + (bd.corner - 1.0) * y[m],
            ];
            let z = solve3(&bd.cap, vy).unwrap_or([f64::NAN; 3]);
            for k in 0..3 {
                for (yi, wi) in y.iter_mut().zip(&bd.w[k]) {
                    *yi -= wi * z[k];
                }
            }
        }
        y
    }

    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let mut y = self.plain_solve_transpose(b);
        if let Some(bd) = &self.border {
            let m = self.n - 1;
            let uy = [-bd.alpha * y[bd.pin], dot_sparse(&bd.col, &y), y[m]];
            let z = solve3(&bd.cap_t, uy).unwrap_or([f64::NAN; 3]);
            for k in 0..3 {
                for (yi, wi) in y.iter_mut().zip(&bd.wt[k]) {
                    *yi -= wi * z[k];
                }
            }
        }
        y
    }

    /// Hager's estimate of `|A^-1|_1`.
    pub fn inverse_norm_estimate(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 0.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut estimate = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            let norm: f64 = y.iter().map(|v| v.abs()).sum();
            if !norm.is_finite() {
                return f64::INFINITY;
            }
            if norm <= estimate {
                break;
            }
            estimate = norm;
            let signs: Vec<f64> = y
                .iter()
                .map(|&v| if v >= 0.0 { 1.0 } else { -1.0 })
                .collect();
            let z = self.solve_transpose(&signs);
            let (j, zmax) = z.iter().enumerate().fold((0, 0.0), |(bj, bz), (j, &v)| {
                if v.abs() > bz {
                    (j, v.abs())
                } else {
                    (bj, bz)
                }
            });
            let zx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= zx {
                break;
            }
            x = vec![0.0; n];
            x[j] = 1.0;
        }
        estimate
    }
}

fn to_mat(b: &[f64]) -> Mat<f64> {
    Mat::from_fn(b.len(), 1, |i, _| b[i])
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `Ax - b` with compensated (twice working precision) row sums, so that
/// refinement can reach residuals below `eps |A| |x|`.
fn residual(matrix: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    (0..matrix.nrows())
        .map(|r| {
            let (mut sum, mut comp) = (-b[r], 0.0);
            for (c, v) in matrix.row(r) {
                let p = v * x[c];
                let p_err = v.mul_add(x[c], -p);
                let t = sum + p;
                let z = t - sum;
                comp += (sum - (t - z)) + (p - z) + p_err;
                sum = t;
            }
            sum + comp
        })
        .collect()
}

fn relative(r: &[f64], b: &[f64]) -> f64 {
    let nb = norm2(b);
    if nb > 0.0 {
        norm2(r) / nb
    } else {
        norm2(r)
    }
}

/// Up to three rounds of residual correction from `x0`. A correction is only
/// kept if it lowers the residual, so the residual never increases.
pub fn refine_iteratively(
    matrix: &CsrMatrix,
    factors: &Factorization,
    b: &[f64],
    x0: Vec<f64>,
) -> SolveReport {
    let start = Instant::now();
    let mut x = x0;
    let mut r = residual(matrix, &x, b);
    let mut history = vec![relative(&r, b)];
    for _ in 0..MAX_REFINEMENTS {
        let current = *history.last().expect("history is never empty");
        if current == 0.0 || !current.is_finite() {
            break;
        }
        let dx = factors.solve(&r);
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - d).collect();
        let rc = residual(matrix, &candidate, b);
        let rel = relative(&rc, b);
        if !(rel < current) {
            break;
        }
        x = candidate;
        r = rc;
        history.push(rel);
    }
    SolveReport {
        rounding_floor: rounding_floor(matrix, &x, b),
        solution: x,
        relative_residual: *history.last().expect("history is never empty"),
        residual_history: history,
        condition_estimate: f64::NAN,
        wall_time: start.elapsed(),
    }
}

fn rounding_floor(matrix: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let abs: Vec<f64> = (0..matrix.nrows())
        .map(|r| matrix.row(r).map(|(c, v)| (v * x[c]).abs()).sum())
        .collect();
    let nb = norm2(b);
    f64::EPSILON * norm2(&abs) / if nb > 0.0 { nb } else { 1.0 }
}

/// When a solve is accepted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Acceptance {
    /// Relative residual below [`RESIDUAL_TOLERANCE`].
    #[default]
    Strict,
    /// As `Strict`, or a residual no larger than the rounding floor. For
    /// systems such as nearly incompressible elasticity where the floor
    /// itself exceeds the tolerance.
    WorkingPrecision,
}

/// Factors `matrix`, solves, refines and certifies the residual.
pub fn solve_matrix(matrix: &CsrMatrix, b: &[f64]) -> Result<SolveReport, SolverError> {
    solve_matrix_with(matrix, b, Acceptance::Strict)
}

pub fn solve_matrix_with(
    matrix: &CsrMatrix,
    b: &[f64],
    acceptance: Acceptance,
) -> Result<SolveReport, SolverError> {
    let start = Instant::now();
    if matrix.nrows() != b.len() || matrix.ncols() != b.len() {
        return Err(SolverError::DimensionMismatch {
            rows: matrix.nrows(),
            cols: matrix.ncols(),
            rhs: b.len(),
        });
    }
    let factors = Factorization::new(matrix)?;
    let x0 = factors.solve(b);
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::Singular { block: "full" });
    }
    let mut report = refine_iteratively(matrix, &factors, b, x0);
    report.condition_estimate = matrix.norm_one() * factors.inverse_norm_estimate();
    report.wall_time = start.elapsed();
    log::debug!(
        "solved n={} nnz={} residual={:e} cond~{:e}",
        matrix.nrows(),
        matrix.nnz(),
        report.relative_residual,
        report.condition_estimate
    );
    let accepted = report.relative_residual < RESIDUAL_TOLERANCE
        || (acceptance == Acceptance::WorkingPrecision
            && report.relative_residual <= report.rounding_floor);
    if !accepted {
        return Err(SolverError::ResidualTooLarge {
            residual: report.relative_residual,
        });
    }
    Ok(report)
}

/// Solves an assembled system. A pressure block that admits constants in
/// its null space (no multiplier, no traction edge) is reported as such
/// before factorizing.
pub fn solve(system: &SaddleSystem) -> Result<SolveReport, SolverError> {
    solve_with(system, Acceptance::Strict)
}

pub fn solve_with(
    system: &SaddleSystem,
    acceptance: Acceptance,
) -> Result<SolveReport, SolverError> {
    if system.layout.pressure > 0 && system.layout.multiplier == 0 {
        let v = system.constant_pressure();
        let image = system.matrix.mul_vec(&v);
        let scale = system.matrix.max_abs().max(f64::MIN_POSITIVE);
        if image.iter().all(|x| x.abs() <= 1e-12 * scale) {
            return Err(SolverError::Singular { block: "pressure" });
        }
    }
    solve_matrix_with(&system.matrix, &system.rhs, acceptance).map_err(|e| match e {
        SolverError::Singular { .. }
            if system.layout.pressure > 0 && system.layout.multiplier == 0 =>
        {
            SolverError::Singular { block: "pressure" }
        }
        e => e,
    })
}

/// Largest `|w^T (Ax - b)| / (|w| scale)` over `probes` random vectors `w`,
/// with `scale = |A|_max |x| + |b|`.
pub fn galerkin_residual(
    matrix: &CsrMatrix,
    x: &[f64],
    b: &[f64],
    probes: usize,
    seed: u64,
) -> f64 {
    let r = residual(matrix, x, b);
    let scale = matrix.max_abs() * norm2(x) + norm2(b);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..probes)
        .map(|_| {
            let w: Vec<f64> = (0..r.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let dot: f64 = w.iter().zip(&r).map(|(a, b)| a * b).sum();
            dot.abs() / (norm2(&w) * scale.max(f64::MIN_POSITIVE))
        })
        .fold(0.0, f64::max)
}
