//! Full-vector finite-difference operator for the transverse electric field.
//!
//! Unknowns are `Ex` and `Ey` at cell centers, interleaved as
//! `[Ex(0), Ey(0), Ex(1), Ey(1), ...]` with cell order `Grid2D::index`.
//! Lengths are scaled by `k0`, so the eigenvalue is `n_eff²`. The operator is
//!
//! ```text
//! Pxx Ex = ∂x[(1/ε) ∂x(ε Ex)] + ∂y² Ex + ε Ex
//! Pxy Ey = ∂x[(1/ε) ∂y(ε Ey)] − ∂x∂y Ey
//! Pyx Ex = ∂y[(1/ε) ∂x(ε Ex)] − ∂y∂x Ex
//! Pyy Ey = ∂x² Ey + ∂y[(1/ε) ∂y(ε Ey)] + ε Ey
//! ```
//!
//! with zero field outside the window. Face permittivities are arithmetic
//! means of the two adjacent cells, which keeps the normal displacement flux
//! continuous across material steps (the slot field jump).

use super::sparse::CsrMatrix;
use crate::materials::PermittivityMap;

pub(crate) fn assemble(eps: &PermittivityMap, k0: f64) -> CsrMatrix {
    let g = eps.grid;
    let (nx, ny) = (g.nx, g.ny);
    let h = k0 * g.spacing;
    let h2 = h * h;
    let at = |i: isize, j: isize| -> Option<f64> {
        (i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny)
            .then(|| eps.get(i as usize, j as usize))
    };
    let unknown = |i: isize, j: isize, comp: usize| 2 * g.index(i as usize, j as usize) + comp;

    let mut rows = Vec::with_capacity(2 * g.len());
    for i in 0..nx as isize {
        for j in 0..ny as isize {
            let e = at(i, j).unwrap();
            for comp in 0..2 {
                let mut row = Vec::with_capacity(9);
                let me = unknown(i, j, comp);
                // (di, dj) steps along the "normal" axis for this component
                let (ni, nj, ti, tj) = if comp == 0 {
                    (1, 0, 0, 1)
                } else {
                    (0, 1, 1, 0)
                };
                let mut diag = e - 2.0 / h2;
                for s in [1isize, -1] {
                    // ∂n[(1/ε) ∂n(ε E)] with face ε = mean
                    let (pi, pj) = (i + s * ni, j + s * nj);
                    let en = at(pi, pj).unwrap_or(e);
                    let face = 2.0 / (e + en);
                    diag -= face * e / h2;
                    if at(pi, pj).is_some() {
                        row.push((unknown(pi, pj, comp), face * en / h2));
                    }
                    // plain second derivative along the tangential axis
                    let (qi, qj) = (i + s * ti, j + s * tj);
                    if at(qi, qj).is_some() {
                        row.push((unknown(qi, qj, comp), 1.0 / h2));
                    }
                }
                row.push((me, diag));
                // cross term: ∂n[E_t ∂t ln ε] = ∂n[(1/ε)∂t(ε E_t) − ∂t E_t]
                let other = 1 - comp;
                for sn in [1isize, -1] {
                    let (ai, aj) = (i + sn * ni, j + sn * nj);
                    let Some(ea) = at(ai, aj) else { continue };
                    for st in [1isize, -1] {
                        let (bi, bj) = (ai + st * ti, aj + st * tj);
                        let Some(eb) = at(bi, bj) else { continue };
                        let coef = (sn * st) as f64 * (eb / ea - 1.0) / (4.0 * h2);
                        if coef != 0.0 {
                            row.push((unknown(bi, bj, other), coef));
                        }
                    }
                }
                rows.push(row);
            }
        }
    }
    CsrMatrix::from_rows(rows)
}
