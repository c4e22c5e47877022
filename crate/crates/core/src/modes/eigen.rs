//! Shift-invert Arnoldi iteration with explicit restarts.

use faer::Mat;
use num_complex::Complex64;

use super::sparse::{CsrMatrix, ShiftedSolver};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `‖A x − λ x‖ / (|λ| ‖x‖)`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ArnoldiOptions {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub tolerance: f64,
    pub residual_target: f64,
}

impl Default for ArnoldiOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 60,
            max_restarts: 30,
            tolerance: 1e-12,
            residual_target: 1e-10,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Deterministic start vector (splitmix64 stream in [-1, 1]).
fn start_vector(n: usize) -> Vec<f64> {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    (0..n)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect()
}

/// Relative eigen-residual of `(value, x)` for operator `a`.
pub(crate) fn relative_residual(a: &CsrMatrix, value: f64, x: &[f64]) -> f64 {
    let mut ax = vec![0.0; x.len()];
    a.matvec(x, &mut ax);
    let r: f64 = ax
        .iter()
        .zip(x)
        .map(|(p, q)| (p - value * q).powi(2))
        .sum::<f64>()
        .sqrt();
    r / (value.abs() * norm(x))
}

struct RitzPair {
    theta: Complex64,
    coeffs: Vec<Complex64>,
    estimate: f64,
}

/// Finds the `nev` eigenvalues of `a` nearest to `shift` that lie above
/// `floor`, keeping only those that are real to working precision. Ritz
/// values below `floor` are neither converged nor returned.
pub(crate) fn nearest_eigenpairs(
    a: &CsrMatrix,
    shift: f64,
    nev: usize,
    floor: f64,
    opts: ArnoldiOptions,
) -> Result<Vec<EigenPair>> {
    let n = a.n;
    let nev = nev.min(n.saturating_sub(1)).max(1);
    let m = opts.krylov_dim.max(2 * nev + 10).min(n);
    let solver = ShiftedSolver::new(a, shift)?;

    let mut v0 = start_vector(n);
    let mut best = f64::INFINITY;
    for restart in 0..=opts.max_restarts {
        let nrm = norm(&v0);
        v0.iter_mut().for_each(|x| *x /= nrm);
        let mut basis: Vec<Vec<f64>> = vec![v0.clone()];
        let mut h = Mat::<f64>::zeros(m + 1, m);
        let mut steps = m;
        for j in 0..m {
            let mut w = basis[j].clone();
            solver.solve_in_place(&mut w);
            // classical Gram-Schmidt, applied twice
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = dot(b, &w);
                    h[(i, j)] += c;
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let beta = norm(&w);
            h[(j + 1, j)] = beta;
            if beta < 1e-300 {
                steps = j + 1;
                break;
            }
            w.iter_mut().for_each(|x| *x /= beta);
            basis.push(w);
        }

        let hm = Mat::<f64>::from_fn(steps, steps, |r, c| h[(r, c)]);
        let evd = hm
            .eigen()
            .map_err(|e| Error::LinearSolver(format!("dense eigensolver: {e:?}")))?;
        let s = evd.S();
        let u = evd.U();
        let tail = h[(steps, steps - 1)];
        let mut ritz: Vec<RitzPair> = (0..steps)
            .map(|k| {
                let coeffs: Vec<Complex64> = (0..steps).map(|r| u[(r, k)]).collect();
                let cn = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                let coeffs: Vec<Complex64> = coeffs.iter().map(|c| c / cn).collect();
                let estimate = (tail * coeffs[steps - 1].norm()).abs();
                RitzPair {
                    theta: s[k],
                    coeffs,
                    estimate,
                }
            })
            .collect();
        ritz.sort_by(|p, q| q.theta.norm().total_cmp(&p.theta.norm()));
        ritz.truncate(nev);

        ritz.retain(|p| (shift + p.theta.inv()).re > floor);
        let worst = ritz
            .iter()
            .map(|p| p.estimate / p.theta.norm())
            .fold(0.0, f64::max);
        best = best.min(worst);
        let converged = worst < opts.tolerance || steps < m;

        if converged || restart == opts.max_restarts {
            if !converged {
                return Err(Error::NoConvergence {
                    iterations: (restart + 1) * m,
                    residual: worst,
                });
            }
            let mut pairs = Vec::new();
            for p in &ritz {
                let lambda = shift + p.theta.inv();
                if lambda.im.abs() > 1e-8 * lambda.norm() {
                    continue;
                }
                // rotate so the largest coefficient is real, then take the real part
                let pivot = p
                    .coeffs
                    .iter()
                    .copied()
                    .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                    .unwrap_or(Complex64::new(1.0, 0.0));
                let phase = pivot.conj() / pivot.norm();
                let mut x = vec![0.0; n];
                for (b, c) in basis.iter().zip(&p.coeffs) {
                    let c = (c * phase).re;
                    x.iter_mut().zip(b).for_each(|(xi, bi)| *xi += c * bi);
                }
                let mut value = lambda.re;
                let mut residual = relative_residual(a, value, &x);
                if residual > opts.residual_target {
                    // Rayleigh-shifted inverse iteration polish
                    let polish = ShiftedSolver::new(a, value * (1.0 + 1e-12))?;
                    for _ in 0..3 {
                        polish.solve_in_place(&mut x);
                        let nrm = norm(&x);
                        x.iter_mut().for_each(|v| *v /= nrm);
                        let mut ax = vec![0.0; n];
                        a.matvec(&x, &mut ax);
                        value = dot(&x, &ax);
                        residual = relative_residual(a, value, &x);
                        if residual <= opts.residual_target {
                            break;
                        }
                    }
                }
                let nrm = norm(&x);
                x.iter_mut().for_each(|v| *v /= nrm);
                pairs.push(EigenPair {
                    value,
                    vector: x,
                    residual,
                });
            }
            return Ok(pairs);
        }

        // explicit restart from the combination of wanted Ritz vectors
        let mut next = vec![0.0; n];
        for p in &ritz {
            for (b, c) in basis.iter().zip(&p.coeffs) {
                let c = c.re + c.im;
                next.iter_mut().zip(b).for_each(|(xi, bi)| *xi += c * bi);
            }
        }
        v0 = next;
    }
    Err(Error::NoConvergence {
        iterations: (opts.max_restarts + 1) * m,
        residual: best,
    })
}
