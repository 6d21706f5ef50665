//! Error bounds: exact and bracketed best m-term errors for the lower-bound
//! constructions, brute-force best m-term errors, the a-priori and
//! a-posteriori convergence bounds, the one-step error reduction estimate, and
//! the two recurrence bounds behind them.

use itertools::Itertools;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;
use crate::error::{invalid, Error, Result};
use crate::greedy::WeaknessSequence;
use crate::lpspace::{dot, LqSpace, SeqVector};
use crate::projection::{project, DEFAULT_TOL};

/// Largest number of m-subsets [`sigma_bruteforce`] will enumerate.
pub const BRUTE_FORCE_BUDGET: u128 = 1_000_000;

/// Largest number of search-tree nodes [`sigma_profile_hilbert`] will visit.
pub const PROFILE_BUDGET: u128 = 16_000_000;

/// Closed-form and numerical minima further apart than this are logged.
const REDUCTION_DISCREPANCY: f64 = 1e-8;

/// Inputs shared by the convergence bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub epsilon: f64,
    /// `A(epsilon)`: `f^epsilon / A(epsilon)` lies in the closed convex hull.
    pub a_eps: f64,
    pub q: f64,
    pub p: f64,
    pub gamma: f64,
    pub tau: WeaknessSequence,
}

impl BoundParams {
    /// Takes `q`, `p` and `gamma` from `space`.
    pub fn new(space: &LqSpace, epsilon: f64, a_eps: f64, tau: WeaknessSequence) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(invalid("epsilon", format!("{epsilon} is negative or not finite")));
        }
        if !(a_eps.is_finite() && a_eps > 0.0) {
            return Err(invalid("A(epsilon)", format!("{a_eps} is not positive")));
        }
        Ok(Self {
            epsilon,
            a_eps,
            q: space.q(),
            p: space.p(),
            gamma: space.gamma(),
            tau,
        })
    }

    /// `C(q, gamma) = 4 (2 gamma)^{1/q}`
    pub fn constant(&self) -> f64 {
        4.0 * (2.0 * self.gamma).powf(1.0 / self.q)
    }

    fn weakness(&self, m: usize) -> Result<Vec<f64>> {
        self.tau.validate(m)?;
        Ok((1..=m).map(|k| self.tau.get(k).expect("validated")).collect())
    }
}

/// `1 / sqrt(2(m+1))`
pub fn sigma_bt1_exact(m: usize) -> f64 {
    1.0 / (2.0 * (m as f64 + 1.0)).sqrt()
}

/// `(2^{-1-1/q} m^{-1/p}, 2^{-1/q} (m+1)^{-1/p})`
pub fn sigma_btq_bracket(m: usize, q: f64) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(invalid("m", "the bracket needs m >= 1"));
    }
    if !(q > 1.0 && q < 2.0) {
        return Err(invalid("q", format!("{q} is outside (1, 2)")));
    }
    let p = q / (q - 1.0);
    let m = m as f64;
    let lower = 2f64.powf(-1.0 - 1.0 / q) * m.powf(-1.0 / p);
    let upper = 2f64.powf(-1.0 / q) * (m + 1.0).powf(-1.0 / p);
    Ok((lower, upper))
}

/// `C(n, k)` without overflow for the sizes we care about.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Exact best m-term error over a finite dictionary: the smallest projection
/// residual over all m-subsets. `m` larger than the dictionary uses all atoms.
pub fn sigma_bruteforce(f: &SeqVector, dict: &Dictionary, m: usize, space: &LqSpace) -> Result<f64> {
    space.check_dim(f)?;
    let n = dict.len();
    let m = m.min(n);
    if m == 0 {
        return space.norm(f);
    }
    let subsets = binomial(n, m);
    if subsets > BRUTE_FORCE_BUDGET {
        return Err(Error::BudgetExceeded {
            subsets,
            budget: BRUTE_FORCE_BUDGET,
        });
    }
    let eval = |subset: Vec<usize>| -> Result<f64> {
        let span: Vec<SeqVector> = subset.iter().map(|&i| dict.atom(i).clone()).collect();
        Ok(project(space, f, &span, DEFAULT_TOL)?.residual_norm)
    };
    let combos: Vec<Vec<usize>> = (0..n).combinations(m).collect();
    #[cfg(feature = "parallel")]
    let values: Vec<f64> = combos.into_par_iter().map(eval).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let values: Vec<f64> = combos.into_iter().map(eval).collect::<Result<_>>()?;
    Ok(values.into_iter().fold(f64::INFINITY, f64::min))
}

/// Best k-term errors in ℓ_2 for every `k = 0..=m_max` from a single
/// depth-first search over subsets with incremental orthogonalization.
pub fn sigma_profile_hilbert(f: &SeqVector, dict: &Dictionary, m_max: usize, budget: u128) -> Result<Vec<f64>> {
    if f.dim() != dict.dim() {
        return Err(Error::DimensionMismatch {
            expected: dict.dim(),
            got: f.dim(),
        });
    }
    let n = dict.len();
    let m_max = m_max.min(n);
    let nodes: u128 = (0..=m_max).map(|k| binomial(n, k)).sum();
    if nodes > budget {
        return Err(Error::BudgetExceeded { subsets: nodes, budget });
    }
    let dim = f.dim();
    let atoms: Vec<&[f64]> = dict.atoms().iter().map(|a| a.as_slice()).collect();

    let mut best = vec![f64::INFINITY; m_max + 1];
    best[0] = dot(f.as_slice(), f.as_slice()).sqrt();
    if m_max == 0 {
        return Ok(best);
    }

    let run_prefix = |prefix: &[usize]| -> Vec<f64> {
        let mut search = SubsetSearch::new(dim, m_max, &atoms, f.as_slice());
        for (depth, &i) in prefix.iter().enumerate() {
            search.extend(depth, i);
        }
        let start = prefix.last().map_or(0, |&i| i + 1);
        search.descend(prefix.len(), start);
        search.best
    };

    let prefixes: Vec<Vec<usize>> = if m_max >= 2 {
        (0..n).combinations(2).chain((0..n).map(|i| vec![i])).collect()
    } else {
        (0..n).map(|i| vec![i]).collect()
    };
    // Singletons only need their own node when pairs already cover descendants.
    let covered = m_max >= 2;
    let task = |prefix: Vec<usize>| -> Vec<f64> {
        if covered && prefix.len() == 1 {
            let mut search = SubsetSearch::new(dim, m_max, &atoms, f.as_slice());
            search.extend(0, prefix[0]);
            search.best
        } else {
            run_prefix(&prefix)
        }
    };
    #[cfg(feature = "parallel")]
    let partial: Vec<Vec<f64>> = prefixes.into_par_iter().map(task).collect();
    #[cfg(not(feature = "parallel"))]
    let partial: Vec<Vec<f64>> = prefixes.into_iter().map(task).collect();
    for row in partial {
        for (b, v) in best.iter_mut().zip(row) {
            *b = b.min(v);
        }
    }
    Ok(best)
}

struct SubsetSearch<'a> {
    dim: usize,
    m_max: usize,
    atoms: &'a [&'a [f64]],
    /// Orthonormal direction added at each depth (zero when dependent).
    basis: Vec<f64>,
    /// Residual after each depth; slot 0 holds `f`.
    residuals: Vec<f64>,
    scratch: Vec<f64>,
    best: Vec<f64>,
}

impl<'a> SubsetSearch<'a> {
    fn new(dim: usize, m_max: usize, atoms: &'a [&'a [f64]], f: &[f64]) -> Self {
        let mut residuals = vec![0.0; (m_max + 1) * dim];
        residuals[..dim].copy_from_slice(f);
        Self {
            dim,
            m_max,
            atoms,
            basis: vec![0.0; m_max * dim],
            residuals,
            scratch: vec![0.0; dim],
            best: vec![f64::INFINITY; m_max + 1],
        }
    }

    /// Adds atom `i` as the element at `depth`, filling residual `depth + 1`.
    fn extend(&mut self, depth: usize, i: usize) {
        let dim = self.dim;
        let atom = self.atoms[i];
        let w = &mut self.scratch;
        w.copy_from_slice(atom);
        let atom_norm = dot(atom, atom).sqrt();
        let mut passes = 0;
        loop {
            let before = dot(w, w).sqrt();
            for d in 0..depth {
                let qd = &self.basis[d * dim..(d + 1) * dim];
                let c = dot(qd, w);
                if c != 0.0 {
                    for (wk, qk) in w.iter_mut().zip(qd) {
                        *wk -= c * qk;
                    }
                }
            }
            passes += 1;
            let after = dot(w, w).sqrt();
            if passes == 2 || after >= 0.5 * before {
                break;
            }
        }
        let norm = dot(w, w).sqrt();
        let (head, tail) = self.residuals.split_at_mut((depth + 1) * dim);
        let prev = &head[depth * dim..];
        let next = &mut tail[..dim];
        let slot = &mut self.basis[depth * dim..(depth + 1) * dim];
        if norm <= 1e-10 * atom_norm {
            slot.fill(0.0);
            next.copy_from_slice(prev);
        } else {
            for (s, wk) in slot.iter_mut().zip(w.iter()) {
                *s = wk / norm;
            }
            let c = dot(prev, slot);
            for ((nk, pk), sk) in next.iter_mut().zip(prev).zip(slot.iter()) {
                *nk = pk - c * sk;
            }
        }
        let r = dot(next, next).sqrt();
        let b = &mut self.best[depth + 1];
        *b = b.min(r);
    }

    fn descend(&mut self, depth: usize, start: usize) {
        if depth == self.m_max {
            return;
        }
        for i in start..self.atoms.len() {
            self.extend(depth, i);
            self.descend(depth + 1, i + 1);
        }
    }
}

fn check_defects(defects: &[f64], m: usize) -> Result<()> {
    if defects.len() < m {
        return Err(invalid("defects", format!("{} defects for m = {m}", defects.len())));
    }
    if let Some(d) = defects[..m].iter().find(|d| !(**d >= 0.0)) {
        return Err(invalid("defects", format!("negative or undefined defect {d}")));
    }
    Ok(())
}

/// `max{2 eps, C (A + eps) (1 + sum_{k<=m} t_k^p)^{-1/p}}`
pub fn apriori_bound(m: usize, params: &BoundParams) -> Result<f64> {
    let ts = params.weakness(m)?;
    let sum: f64 = ts.iter().map(|t| t.powf(params.p)).sum();
    let main = params.constant() * (params.a_eps + params.epsilon) * (1.0 + sum).powf(-1.0 / params.p);
    Ok(main.max(2.0 * params.epsilon))
}

/// `max{2 eps, C A (1 + sum_{k<=m} (t_k/v_k)^p)^{-1/p}}`
///
/// A zero defect with `t_k > 0` makes the sum infinite and the bound `2 eps`;
/// a term with `t_k = 0` contributes nothing.
pub fn aposteriori_bound(m: usize, params: &BoundParams, defects: &[f64]) -> Result<f64> {
    check_defects(defects, m)?;
    let ts = params.weakness(m)?;
    let mut sum = 0.0;
    for (t, v) in ts.iter().zip(defects) {
        if *t == 0.0 {
            continue;
        }
        if *v == 0.0 {
            return Ok(2.0 * params.epsilon);
        }
        sum += (t / v).powf(params.p);
    }
    let main = params.constant() * params.a_eps * (1.0 + sum).powf(-1.0 / params.p);
    Ok(main.max(2.0 * params.epsilon))
}

/// The WGAFR analogue of [`aposteriori_bound`], driven by the defects `u_k`.
pub fn wgafr_bound(m: usize, params: &BoundParams, defects: &[f64]) -> Result<f64> {
    aposteriori_bound(m, params, defects)
}

/// Modulus of smoothness used by [`error_reduction_rhs`].
#[derive(Clone, Copy)]
pub enum Modulus<'a> {
    /// `rho(u) = gamma u^q`
    Power { gamma: f64, q: f64 },
    Custom(&'a dyn Fn(f64) -> f64),
}

impl Modulus<'_> {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Self::Power { gamma, q } => gamma * u.powf(*q),
            Self::Custom(rho) => rho(u),
        }
    }
}

/// Both evaluations of the infimum in the error reduction estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionEstimate {
    /// `||f'||` times the smaller of the two minima.
    pub value: f64,
    /// Minimum of the bracket at its stationary point (power modulus only).
    pub closed_form: Option<f64>,
    /// Minimum found by grid search and golden-section refinement.
    pub numeric: f64,
}

/// `||f'|| inf_{lambda>=0} (1 - lambda theta (1 - eps/||f'||)/A + 2 rho(lambda/||f'||))`
pub fn error_reduction_rhs(norm_fprime: f64, theta: f64, params: &BoundParams, modulus: Modulus<'_>) -> Result<f64> {
    Ok(error_reduction_estimate(norm_fprime, theta, params, modulus)?.value)
}

pub fn error_reduction_estimate(
    norm_fprime: f64,
    theta: f64,
    params: &BoundParams,
    modulus: Modulus<'_>,
) -> Result<ReductionEstimate> {
    if !(theta >= 0.0) {
        return Err(invalid("theta", format!("{theta} is negative")));
    }
    if !(norm_fprime.is_finite() && norm_fprime > 0.0) {
        return Err(invalid("norm_fprime", format!("{norm_fprime} is not positive")));
    }
    let a = norm_fprime;
    let slope = theta * (1.0 - params.epsilon / a) / params.a_eps;
    let bracket = |lambda: f64| 1.0 - lambda * slope + 2.0 * modulus.eval(lambda / a);

    let closed_form = match modulus {
        Modulus::Power { gamma, q } => {
            let lambda = if slope > 0.0 {
                (slope * a.powf(q) / (2.0 * gamma * q)).powf(1.0 / (q - 1.0))
            } else {
                0.0
            };
            Some(bracket(lambda))
        }
        Modulus::Custom(_) => None,
    };
    let numeric = minimize_nonneg(&bracket, a);
    if let Some(cf) = closed_form {
        if (cf - numeric).abs() > REDUCTION_DISCREPANCY {
            log::warn!("error reduction minima disagree: closed form {cf}, numeric {numeric}");
        }
    }
    let min = closed_form.map_or(numeric, |cf| cf.min(numeric));
    Ok(ReductionEstimate {
        value: a * min,
        closed_form,
        numeric,
    })
}

/// Minimum of a convex-ish function on `[0, inf)`: expanding bracket, grid,
/// then golden-section refinement around the best grid point.
fn minimize_nonneg(fun: &dyn Fn(f64) -> f64, scale: f64) -> f64 {
    let mut hi = scale.max(f64::MIN_POSITIVE);
    while hi < 1e12 * scale && fun(2.0 * hi) < fun(hi) {
        hi *= 2.0;
    }
    hi *= 2.0;
    const GRID: usize = 400;
    let step = hi / GRID as f64;
    let (best_i, best_v) = (0..=GRID)
        .map(|i| (i, fun(i as f64 * step)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is non-empty");
    let mut lo = best_i.saturating_sub(1) as f64 * step;
    let mut up = (best_i + 1) as f64 * step;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = up - ratio * (up - lo);
    let mut x2 = lo + ratio * (up - lo);
    let (mut f1, mut f2) = (fun(x1), fun(x2));
    for _ in 0..200 {
        if f1 < f2 {
            up = x2;
            x2 = x1;
            f2 = f1;
            x1 = up - ratio * (up - lo);
            f1 = fun(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (up - lo);
            f2 = fun(x2);
        }
    }
    best_v.min(f1).min(f2)
}

/// `A (1 + sum r_k)^{-1}`
pub fn el1_bound(a: f64, r: &[f64]) -> Result<f64> {
    if !(a > 0.0) {
        return Err(invalid("A", format!("{a} is not positive")));
    }
    if r.iter().any(|x| !(*x >= 0.0)) {
        return Err(invalid("r", "entries must be nonnegative"));
    }
    Ok(a / (1.0 + r.iter().sum::<f64>()))
}

/// `2 (2 gamma)^{1/q} B (1 + sum r_k^p)^{-1/p}`, requiring `gamma 2^q >= 1`.
pub fn el2_bound(b: f64, gamma: f64, q: f64, r: &[f64]) -> Result<f64> {
    if !(b > 0.0) {
        return Err(invalid("B", format!("{b} is not positive")));
    }
    if !(q > 1.0 && q <= 2.0) {
        return Err(invalid("q", format!("{q} is outside (1, 2]")));
    }
    if !(gamma > 0.0) || gamma * 2f64.powf(q) < 1.0 {
        return Err(invalid("gamma", format!("gamma * 2^q = {} < 1", gamma * 2f64.powf(q))));
    }
    if r.iter().any(|x| !(*x >= 0.0)) {
        return Err(invalid("r", "entries must be nonnegative"));
    }
    let p = q / (q - 1.0);
    let sum: f64 = r.iter().map(|x| x.powf(p)).sum();
    Ok(2.0 * (2.0 * gamma).powf(1.0 / q) * b * (1.0 + sum).powf(-1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{build_bt1, build_bt3, build_btq};
    use approx::assert_abs_diff_eq;

    fn hilbert_params(gamma: f64, epsilon: f64, a: f64) -> BoundParams {
        let space = LqSpace::hilbert(4).unwrap().with_gamma(gamma).unwrap();
        BoundParams::new(&space, epsilon, a, WeaknessSequence::Constant(1.0)).unwrap()
    }

    #[test]
    fn bt1_exact_values() {
        assert_abs_diff_eq!(sigma_bt1_exact(0), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(sigma_bt1_exact(3), 1.0 / 8f64.sqrt(), epsilon = 1e-15);
        assert_eq!(sigma_bt1_exact(7), 0.25);
    }

    #[test]
    fn btq_bracket_values() {
        let (lo, hi) = sigma_btq_bracket(2, 1.5).unwrap();
        assert_abs_diff_eq!(lo, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 2f64.powf(-2.0 / 3.0) * 3f64.powf(-1.0 / 3.0), epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 0.43679, epsilon = 1e-5);
        for m in [1, 5, 40] {
            let (lo, hi) = sigma_btq_bracket(m, 1.5).unwrap();
            let ratio = 0.5 * ((m as f64 + 1.0) / m as f64).powf(1.0 / 3.0);
            assert_abs_diff_eq!(lo / hi, ratio, epsilon = 1e-14);
            assert!(lo < hi);
        }
        // Near q = 2 the exact Hilbert value sits inside the bracket.
        let (lo, hi) = sigma_btq_bracket(3, 1.999_999).unwrap();
        assert!(lo < sigma_bt1_exact(3) && sigma_bt1_exact(3) < hi + 1e-6);
        assert!(sigma_btq_bracket(0, 1.5).is_err());
        assert!(sigma_btq_bracket(2, 2.0).is_err());
    }

    #[test]
    fn bruteforce_bt1() {
        let (d, f) = build_bt1(9).unwrap();
        let h = LqSpace::hilbert(9).unwrap();
        assert_abs_diff_eq!(sigma_bruteforce(&f, &d, 3, &h).unwrap(), 1.0 / 8f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(sigma_bruteforce(&f, &d, 0, &h).unwrap(), h.norm(&f).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn bruteforce_btq() {
        let q = 1.5;
        let (d, f) = build_btq(9, q).unwrap();
        let s = LqSpace::new(q, 9).unwrap();
        let sigma = sigma_bruteforce(&f, &d, 2, &s).unwrap();
        let (lo, hi) = sigma_btq_bracket(2, q).unwrap();
        assert!(sigma >= lo && sigma <= hi + 1e-6);
        assert_abs_diff_eq!(sigma, hi, epsilon = 1e-6);
    }

    #[test]
    fn bruteforce_budget() {
        let (d, f) = build_bt1(30).unwrap();
        let h = LqSpace::hilbert(30).unwrap();
        assert!(matches!(sigma_bruteforce(&f, &d, 14, &h), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(sigma_profile_hilbert(&f, &d, 20, 1000), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn profile_matches_per_m_bruteforce() {
        let (d, f) = build_bt3(8).unwrap();
        let h = LqSpace::hilbert(8).unwrap();
        let profile = sigma_profile_hilbert(&f, &d, 5, PROFILE_BUDGET).unwrap();
        for (m, value) in profile.iter().enumerate() {
            assert_abs_diff_eq!(*value, sigma_bruteforce(&f, &d, m, &h).unwrap(), epsilon = 1e-12);
        }
        assert!(profile[2] <= 1e-12);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(23, 11), 1_352_078);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn apriori_examples() {
        let params = hilbert_params(1.0, 0.0, 1.0);
        for m in [0, 1, 5, 30] {
            let expected = 4.0 * 2f64.sqrt() / (1.0 + m as f64).sqrt();
            assert_abs_diff_eq!(apriori_bound(m, &params).unwrap(), expected, epsilon = 1e-14);
        }
        let mut p = hilbert_params(1.0, 0.1, 2.0);
        let c = p.constant();
        assert_abs_diff_eq!(apriori_bound(0, &p).unwrap(), c * 2.1, epsilon = 1e-14);
        p.tau = WeaknessSequence::Constant(0.0);
        assert_abs_diff_eq!(apriori_bound(17, &p).unwrap(), c * 2.1, epsilon = 1e-14);
        p.epsilon = 100.0;
        assert_abs_diff_eq!(apriori_bound(3, &p).unwrap(), c * 102.0, epsilon = 1e-12);
        p.tau = WeaknessSequence::Constant(1.0);
        assert_eq!(apriori_bound(30, &p).unwrap(), 200.0);
    }

    #[test]
    fn aposteriori_examples() {
        let params = hilbert_params(1.0, 0.0, 1.0);
        assert_abs_diff_eq!(
            aposteriori_bound(1, &params, &[0.5]).unwrap(),
            4.0 * 2f64.sqrt() / 5f64.sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(aposteriori_bound(1, &params, &[0.5]).unwrap(), 2.5298, epsilon = 1e-4);
        let ones = [1.0; 6];
        assert_abs_diff_eq!(
            aposteriori_bound(6, &params, &ones).unwrap(),
            apriori_bound(6, &params).unwrap(),
            epsilon = 1e-15
        );
        assert!(aposteriori_bound(2, &params, &[0.5, -0.1]).is_err());
        assert!(aposteriori_bound(3, &params, &[0.5]).is_err());

        let p = hilbert_params(1.0, 0.05, 1.0);
        assert_eq!(aposteriori_bound(2, &p, &[0.5, 0.0]).unwrap(), 0.1);
        let defects = [0.9, 0.3, 0.7];
        let scaled = p.a_eps / (p.a_eps + p.epsilon) * apriori_bound(3, &p).unwrap();
        assert!(aposteriori_bound(3, &p, &defects).unwrap() <= scaled);
        assert_eq!(
            wgafr_bound(3, &p, &defects).unwrap(),
            aposteriori_bound(3, &p, &defects).unwrap()
        );
    }

    #[test]
    fn error_reduction_examples() {
        let params = hilbert_params(1.0, 0.0, 1.0);
        let power = Modulus::Power { gamma: 1.0, q: 2.0 };
        assert_abs_diff_eq!(error_reduction_rhs(1.0, 0.0, &params, power).unwrap(), 1.0, epsilon = 1e-15);
        let est = error_reduction_estimate(1.0, 1.0, &params, power).unwrap();
        assert_abs_diff_eq!(est.value, 0.875, epsilon = 1e-15);
        assert_abs_diff_eq!(est.numeric, 0.875, epsilon = 1e-12);

        let mut last = f64::INFINITY;
        for theta in [0.0, 0.2, 0.5, 1.0, 1.5, 2.5] {
            let v = error_reduction_rhs(0.7, theta, &params, power).unwrap();
            assert!(v <= last + 1e-15);
            last = v;
        }
        assert!(error_reduction_rhs(1.0, -0.1, &params, power).is_err());

        let rho = |u: f64| (1.0 + u * u).sqrt() - 1.0;
        let custom = error_reduction_estimate(1.0, 1.0, &params, Modulus::Custom(&rho)).unwrap();
        assert!(custom.closed_form.is_none());
        assert!(custom.value < 0.875);
    }

    #[test]
    fn recurrence_bounds() {
        assert_abs_diff_eq!(el1_bound(1.0, &[1.0, 1.0, 1.0]).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(el1_bound(3.0, &[0.0, 0.0]).unwrap(), 3.0);
        assert_abs_diff_eq!(el2_bound(1.0, 1.0, 2.0, &[1.0, 1.0, 1.0]).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert!(el2_bound(1.0, 0.2, 2.0, &[1.0]).is_err());
        assert!(el1_bound(1.0, &[-1.0]).is_err());
    }
}
