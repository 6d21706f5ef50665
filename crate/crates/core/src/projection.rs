//! Chebyshev projection (best approximation) onto the span of finitely many
//! atoms.
//!
//! In ℓ_2 this is an orthogonal projection computed by re-orthogonalized
//! Gram-Schmidt. Atoms that are numerically dependent on earlier ones are
//! dropped in order and reported in [`ProjectionResult::dropped`].
//!
//! In ℓ_q, 1 < q < 2, the objective `c -> ||f - sum c_i phi_i||_q` is strictly
//! convex and smooth away from a zero residual. It is minimized by a damped
//! Newton iteration on `sum |r_k|^q` with a backtracking line search, warm
//! started from the ℓ_2 solution. The stopping test is first-order
//! stationarity: the vector `(F_r(phi_i))_i`, with `F_r` the norming
//! functional of the residual, must have ℓ_2 norm at most `tol`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpspace::{dot, lq_norm, norming_weights, LqSpace, SeqVector, ZERO_RESIDUAL};

/// Default stationarity tolerance for the ℓ_q solver.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Iteration cap for the ℓ_q solver.
pub const MAX_ITERATIONS: usize = 100_000;

/// Relative orthogonalized norm below which an atom counts as dependent.
const RANK_TOL: f64 = 1e-10;

/// Floor on `|r_k| / ||r||` inside the Hessian weights `|r_k|^(q-2)`.
const CURVATURE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    /// One coefficient per span atom; dropped atoms get zero.
    pub coefficients: Vec<f64>,
    pub approximant: SeqVector,
    pub residual: SeqVector,
    pub residual_norm: f64,
    pub solver_iterations: usize,
    pub converged: bool,
    /// Indices of span atoms discarded as linearly dependent.
    pub dropped: Vec<usize>,
}

impl ProjectionResult {
    pub fn rank_deficient(&self) -> bool {
        !self.dropped.is_empty()
    }

    fn assemble(
        f: &SeqVector,
        span: &[SeqVector],
        coefficients: Vec<f64>,
        q: f64,
        solver_iterations: usize,
        converged: bool,
        dropped: Vec<usize>,
    ) -> Self {
        let mut approximant = SeqVector::zeros(f.dim());
        for (c, atom) in coefficients.iter().zip(span) {
            if *c != 0.0 {
                approximant.add_scaled(*c, atom);
            }
        }
        let residual = f.sub(&approximant);
        let residual_norm = lq_norm(residual.as_slice(), q);
        Self {
            coefficients,
            approximant,
            residual,
            residual_norm,
            solver_iterations,
            converged,
            dropped,
        }
    }
}

fn check_span(f: &SeqVector, span: &[SeqVector]) -> Result<()> {
    for atom in span {
        if atom.dim() != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                got: atom.dim(),
            });
        }
    }
    Ok(())
}

/// Incremental orthonormal basis with the triangular factor `span = Q R`.
struct GramSchmidt {
    q: Vec<Vec<f64>>,
    /// Column `j` of R restricted to kept atoms, stored per kept atom.
    r: Vec<Vec<f64>>,
    kept: Vec<usize>,
    dropped: Vec<usize>,
}

impl GramSchmidt {
    fn new(span: &[SeqVector]) -> Self {
        let mut gs = Self {
            q: Vec::new(),
            r: Vec::new(),
            kept: Vec::new(),
            dropped: Vec::new(),
        };
        for (i, atom) in span.iter().enumerate() {
            gs.push(i, atom.as_slice());
        }
        gs
    }

    fn push(&mut self, index: usize, atom: &[f64]) {
        let scale = lq_norm(atom, 2.0);
        let mut w = atom.to_vec();
        let mut col = vec![0.0; self.q.len() + 1];
        for _ in 0..2 {
            for (j, qj) in self.q.iter().enumerate() {
                let c = dot(qj, &w);
                col[j] += c;
                for (wk, qk) in w.iter_mut().zip(qj) {
                    *wk -= c * qk;
                }
            }
        }
        let norm = lq_norm(&w, 2.0);
        if scale == 0.0 || norm <= RANK_TOL * scale {
            self.dropped.push(index);
            return;
        }
        for wk in &mut w {
            *wk /= norm;
        }
        col[self.q.len()] = norm;
        self.q.push(w);
        self.r.push(col);
        self.kept.push(index);
    }

    /// Least-squares coefficients of `f` on the kept atoms.
    fn solve(&self, f: &[f64]) -> Vec<f64> {
        let k = self.q.len();
        let mut b: Vec<f64> = self.q.iter().map(|qj| dot(qj, f)).collect();
        // One refinement pass against the first-pass residual.
        let mut r = f.to_vec();
        for (qj, bj) in self.q.iter().zip(&b) {
            for (rk, qk) in r.iter_mut().zip(qj) {
                *rk -= bj * qk;
            }
        }
        for (qj, bj) in self.q.iter().zip(b.iter_mut()) {
            *bj += dot(qj, &r);
        }
        let mut c = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| self.r[j][i] * c[j]).sum();
            c[i] = (b[i] - s) / self.r[i][i];
        }
        c
    }
}

/// Orthogonal projection of `f` onto `span` in ℓ_2.
pub fn project_hilbert(f: &SeqVector, span: &[SeqVector]) -> Result<ProjectionResult> {
    check_span(f, span)?;
    let gs = GramSchmidt::new(span);
    let mut coefficients = vec![0.0; span.len()];
    for (c, &i) in gs.solve(f.as_slice()).into_iter().zip(&gs.kept) {
        coefficients[i] = c;
    }
    Ok(ProjectionResult::assemble(f, span, coefficients, 2.0, 0, true, gs.dropped))
}

/// Best ℓ_q approximation of `f` from `span`, to first-order stationarity
/// `tol`. Non-convergence is reported through `converged = false` with the
/// best iterate, not as an error.
pub fn project_lq(f: &SeqVector, span: &[SeqVector], space: &LqSpace, tol: f64) -> Result<ProjectionResult> {
    space.check_dim(f)?;
    check_span(f, span)?;
    if !(tol > 0.0) {
        return Err(crate::error::invalid("tol", format!("{tol} is not positive")));
    }
    let q = space.q();
    let gs = GramSchmidt::new(span);
    let atoms: Vec<&[f64]> = gs.kept.iter().map(|&i| span[i].as_slice()).collect();
    let start = gs.solve(f.as_slice());
    let (c, iterations, converged) = newton(f.as_slice(), &atoms, start, q, tol);

    let mut coefficients = vec![0.0; span.len()];
    for (ci, &i) in c.into_iter().zip(&gs.kept) {
        coefficients[i] = ci;
    }
    Ok(ProjectionResult::assemble(
        f,
        span,
        coefficients,
        q,
        iterations,
        converged,
        gs.dropped,
    ))
}

/// Dispatches to the Hilbert closed form when `q = 2`.
pub fn project(space: &LqSpace, f: &SeqVector, span: &[SeqVector], tol: f64) -> Result<ProjectionResult> {
    if space.is_hilbert() {
        space.check_dim(f)?;
        project_hilbert(f, span)
    } else {
        project_lq(f, span, space, tol)
    }
}

/// `||phi - P_span(phi)||`, the part of `atom` not explained by `prior_span`.
pub fn projection_defect(atom: &SeqVector, prior_span: &[SeqVector], space: &LqSpace) -> Result<f64> {
    let dist = project(space, atom, prior_span, DEFAULT_TOL)?.residual_norm;
    // The zero element of the span is a candidate, so rounding above it is noise.
    Ok(dist.min(space.norm(atom)?))
}

fn residual_of(f: &[f64], atoms: &[&[f64]], c: &[f64]) -> Vec<f64> {
    let mut r = f.to_vec();
    for (atom, ci) in atoms.iter().zip(c) {
        for (rk, ak) in r.iter_mut().zip(atom.iter()) {
            *rk -= ci * ak;
        }
    }
    r
}

/// `(F_r(phi_i))_i`; the gradient of `||r||` is its negative.
fn span_gradient(r: &[f64], norm: f64, atoms: &[&[f64]], q: f64) -> Vec<f64> {
    let w = norming_weights(r, norm, q);
    atoms.iter().map(|a| dot(&w, a)).collect()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn newton_direction(r: &[f64], norm: f64, atoms: &[&[f64]], q: f64, grad: &[f64]) -> Option<Vec<f64>> {
    let k = atoms.len();
    let weights: Vec<f64> = r
        .iter()
        .map(|x| (x.abs() / norm).max(CURVATURE_FLOOR).powf(q - 2.0))
        .collect();
    let mut h = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let s: f64 = weights
                .iter()
                .zip(atoms[i].iter().zip(atoms[j].iter()))
                .map(|(w, (a, b))| w * a * b)
                .sum();
            h[(i, j)] = s;
            h[(j, i)] = s;
        }
    }
    // Newton step for sum |r_k/||r|| |^q, rescaled back to coefficient units.
    let rhs = DVector::from_iterator(k, grad.iter().map(|g| g * norm / (q - 1.0)));
    let trace = h.trace().max(f64::MIN_POSITIVE);
    let mut ridge = 0.0;
    for _ in 0..8 {
        let mut m = h.clone();
        for i in 0..k {
            m[(i, i)] += ridge;
        }
        if let Some(chol) = m.cholesky() {
            let d = chol.solve(&rhs);
            if d.iter().all(|x| x.is_finite()) {
                return Some(d.iter().copied().collect());
            }
        }
        ridge = if ridge == 0.0 { 1e-14 * trace } else { ridge * 100.0 };
    }
    None
}

fn newton(f: &[f64], atoms: &[&[f64]], mut c: Vec<f64>, q: f64, tol: f64) -> (Vec<f64>, usize, bool) {
    if atoms.is_empty() {
        return (c, 0, true);
    }
    let mut r = residual_of(f, atoms, &c);
    let mut norm = lq_norm(&r, q);
    for iter in 0..MAX_ITERATIONS {
        if norm <= ZERO_RESIDUAL {
            return (c, iter, true);
        }
        let grad = span_gradient(&r, norm, atoms, q);
        let gnorm = l2(&grad);
        if gnorm <= tol {
            return (c, iter, true);
        }

        // `grad` points along the descent direction in coefficient space.
        let mut dir = newton_direction(&r, norm, atoms, q, &grad).unwrap_or_else(|| grad.clone());
        let mut slope = -dot(&grad, &dir);
        if !(slope < 0.0) {
            dir = grad.clone();
            slope = -gnorm * gnorm;
        }

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = c.iter().zip(&dir).map(|(ci, di)| ci + step * di).collect();
            let tr = residual_of(f, atoms, &trial);
            let tn = lq_norm(&tr, q);
            let armijo = tn <= norm + 1e-4 * step * slope;
            // Near the optimum objective changes drop below rounding; fall
            // back to requiring a smaller stationarity residual.
            let flat = (tn - norm).abs() <= 8.0 * f64::EPSILON * norm
                && tn > ZERO_RESIDUAL
                && l2(&span_gradient(&tr, tn, atoms, q)) < gnorm;
            if armijo || flat || tn <= ZERO_RESIDUAL {
                c = trial;
                r = tr;
                norm = tn;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            log::debug!("l_q projection line search stalled at gradient {gnorm:e}");
            return (c, iter, false);
        }
    }
    let norm_ok = norm <= ZERO_RESIDUAL || l2(&span_gradient(&r, norm, atoms, q)) <= tol;
    (c, MAX_ITERATIONS, norm_ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{build_bt1, build_btq};
    use approx::assert_abs_diff_eq;

    fn first_atoms(d: &crate::dictionary::Dictionary, m: usize) -> Vec<SeqVector> {
        d.atoms()[..m].to_vec()
    }

    #[test]
    fn bt1_projection_has_equal_coefficients() {
        let (d, f) = build_bt1(6).unwrap();
        let p = project_hilbert(&f, &first_atoms(&d, 3)).unwrap();
        for c in &p.coefficients {
            assert_abs_diff_eq!(*c, 0.25, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(p.residual_norm, 1.0 / 8f64.sqrt(), epsilon = 1e-14);
        for g in d.atoms().iter().take(3) {
            assert!(p.residual.dot(g).abs() <= 1e-10);
        }
    }

    #[test]
    fn trivial_spans() {
        let (_, f) = build_bt1(5).unwrap();
        let p = project_hilbert(&f, std::slice::from_ref(&f)).unwrap();
        assert_abs_diff_eq!(p.residual_norm, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coefficients[0], 1.0, epsilon = 1e-15);

        let p = project_hilbert(&f, &[]).unwrap();
        assert_eq!(p.residual, f);
        assert_abs_diff_eq!(p.residual_norm, 1.0 / 2f64.sqrt(), epsilon = 1e-15);

        let s = LqSpace::new(1.5, 5).unwrap();
        let p = project_lq(&f, std::slice::from_ref(&f), &s, DEFAULT_TOL).unwrap();
        assert!(p.converged);
        assert_abs_diff_eq!(p.residual_norm, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(p.coefficients[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dependent_atoms_are_dropped() {
        let (d, f) = build_bt1(5).unwrap();
        let span = vec![d.atom(0).clone(), d.atom(1).clone(), d.atom(0).scaled(-1.0)];
        let p = project_hilbert(&f, &span).unwrap();
        assert!(p.rank_deficient());
        assert_eq!(p.dropped, vec![2]);
        assert_eq!(p.coefficients[2], 0.0);
        assert_abs_diff_eq!(p.residual_norm, 1.0 / 6f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn btq_single_atom_optimum() {
        let q = 1.5;
        let (d, f) = build_btq(5, q).unwrap();
        let s = LqSpace::new(q, 5).unwrap();
        let p = project_lq(&f, &first_atoms(&d, 1), &s, DEFAULT_TOL).unwrap();
        assert!(p.converged);
        assert_abs_diff_eq!(p.coefficients[0], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(p.residual_norm, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn btq_single_atom_matches_golden_section() {
        // Independent 1-D oracle for min_c 2^{-1/q}(|1-c|^q + |c|^q)^{1/q}.
        let q = 1.5;
        let obj = |c: f64| 2f64.powf(-1.0 / q) * ((1.0 - c).abs().powf(q) + c.abs().powf(q)).powf(1.0 / q);
        let grid_best = (0..=1000)
            .map(|i| -1.0 + 3.0 * i as f64 / 1000.0)
            .min_by(|a, b| obj(*a).total_cmp(&obj(*b)))
            .unwrap();
        let (mut lo, mut hi) = (grid_best - 0.01, grid_best + 0.01);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - phi * (hi - lo);
            let b = lo + phi * (hi - lo);
            if obj(a) < obj(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let c_star = 0.5 * (lo + hi);
        assert_abs_diff_eq!(c_star, 0.5, epsilon = 1e-7);
        assert_abs_diff_eq!(obj(c_star), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn btq_symmetric_coefficients() {
        let q = 1.5;
        let p_exp = q / (q - 1.0);
        let (d, f) = build_btq(12, q).unwrap();
        let s = LqSpace::new(q, 12).unwrap();
        for m in [2, 5, 8] {
            let p = project_lq(&f, &first_atoms(&d, m), &s, DEFAULT_TOL).unwrap();
            assert!(p.converged, "m = {m}");
            let expected = 2f64.powf(-1.0 / q) * (m as f64 + 1.0).powf(-1.0 / p_exp);
            assert_abs_diff_eq!(p.residual_norm, expected, epsilon = 1e-10);
            for c in &p.coefficients {
                assert_abs_diff_eq!(*c, 1.0 / (m as f64 + 1.0), epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn defect_examples() {
        let (d, _) = build_bt1(5).unwrap();
        let h = LqSpace::hilbert(5).unwrap();
        assert_abs_diff_eq!(projection_defect(d.atom(0), &[], &h).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            projection_defect(d.atom(0), &[d.atom(0).clone()], &h).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            projection_defect(d.atom(1), &[d.atom(0).clone()], &h).unwrap(),
            3f64.sqrt() / 2.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn dimension_mismatch() {
        let f = SeqVector::zeros(3);
        assert!(project_hilbert(&f, &[SeqVector::zeros(4)]).is_err());
        let s = LqSpace::new(1.5, 4).unwrap();
        assert!(project_lq(&f, &[], &s, 1e-10).is_err());
    }
}
