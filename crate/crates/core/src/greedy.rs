//! Greedy m-term approximation: WCGA (and its Hilbert special case OGA), the
//! Relaxed Greedy Algorithm, the Weak Greedy Algorithm with Free Relaxation,
//! and the two-stage approximant for elements with an absolutely summable
//! expansion.


use serde::{Deserialize, Serialize};

use crate::dictionary::{Dictionary, Selection, TieBreakPolicy};
use crate::error::{invalid, Error, Result};
use crate::lpspace::{LqSpace, SeqVector, ZERO_RESIDUAL};
use crate::projection::{project, projection_defect, DEFAULT_TOL};

/// Default number of iterations.
pub const DEFAULT_M_MAX: usize = 50;

/// Greedy values at or below this mean no atom can reduce the residual.
const STALL_TOL: f64 = 1e-15;

/// The weakness parameters `t_1, t_2, ...`, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeaknessSequence {
    Constant(f64),
    List(Vec<f64>),
}

impl Default for WeaknessSequence {
    fn default() -> Self {
        Self::Constant(1.0)
    }
}

impl WeaknessSequence {
    pub fn constant(t: f64) -> Result<Self> {
        let s = Self::Constant(t);
        s.validate(1)?;
        Ok(s)
    }

    pub fn list(ts: Vec<f64>) -> Result<Self> {
        let s = Self::List(ts);
        let len = match &s {
            Self::List(v) => v.len(),
            Self::Constant(_) => unreachable!(),
        };
        s.validate(len)?;
        Ok(s)
    }

    /// `t_k` for `k >= 1`.
    pub fn get(&self, k: usize) -> Option<f64> {
        match self {
            Self::Constant(t) => Some(*t),
            Self::List(ts) => ts.get(k.checked_sub(1)?).copied(),
        }
    }

    /// Checks that `t_1..t_m` exist and lie in `[0, 1]`.
    pub fn validate(&self, m: usize) -> Result<()> {
        for k in 1..=m {
            match self.get(k) {
                Some(t) if (0.0..=1.0).contains(&t) => {}
                Some(t) => return Err(invalid("tau", format!("t_{k} = {t} is outside [0, 1]"))),
                None => return Err(invalid("tau", format!("sequence has no t_{k}"))),
            }
        }
        Ok(())
    }
}

/// Step timer. `std::time::Instant` is unavailable on `wasm32-unknown-unknown`,
/// where timings read zero.
#[derive(Debug, Clone, Copy)]
struct Clock {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Clock {
    fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn elapsed_secs(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.start.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}

/// `"0.5"` is a constant sequence, `"1,0.5,0.25"` an explicit list.
impl std::str::FromStr for WeaknessSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid("tau", format!("`{t}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        if s.contains(',') {
            Self::list(values)
        } else {
            Self::constant(values[0])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Wcga,
    Oga,
    Rga,
    Wgafr,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Wcga => "wcga",
            Self::Oga => "oga",
            Self::Rga => "rga",
            Self::Wgafr => "wgafr",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wcga" => Ok(Self::Wcga),
            "oga" => Ok(Self::Oga),
            "rga" => Ok(Self::Rga),
            "wgafr" => Ok(Self::Wgafr),
            other => Err(invalid("algorithm", format!("unknown algorithm `{other}`"))),
        }
    }
}

/// One iteration of a greedy run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyStep {
    pub m: usize,
    pub residual_norm: f64,
    pub atom_index: usize,
    pub atom_label: String,
    pub sign: f64,
    /// `||F_{f_{m-1}}||_D` at selection time.
    pub greedy_value: f64,
    /// `F_{f_{m-1}}(phi_m)`
    pub selected_value: f64,
    pub weakness: f64,
    /// `v_m` (WCGA/OGA) or `u_m` (WGAFR); absent for RGA.
    pub defect: Option<f64>,
    pub solver_iterations: usize,
    pub elapsed_secs: f64,
}

/// Why a run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "detail")]
pub enum Termination {
    /// All requested iterations were performed.
    Completed,
    /// The residual reached zero.
    ConvergedExactly,
    /// `||F||_D = 0`: no atom correlates with the residual.
    Stalled,
    /// A projection failed to converge; the trace stops before that step.
    SolverFailure(String),
}

/// Per-iteration record of a greedy run together with the final approximant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub algorithm: Algorithm,
    pub policy: TieBreakPolicy,
    pub initial_norm: f64,
    pub steps: Vec<GreedyStep>,
    pub termination: Termination,
    pub approximant: SeqVector,
    /// The approximant as `(coefficient, atom index)` pairs.
    pub expansion: Vec<(f64, usize)>,
}

impl GreedyTrace {
    fn new(algorithm: Algorithm, policy: TieBreakPolicy, f: &SeqVector, initial_norm: f64) -> Self {
        Self {
            algorithm,
            policy,
            initial_norm,
            steps: Vec::new(),
            termination: Termination::Completed,
            approximant: SeqVector::zeros(f.dim()),
            expansion: Vec::new(),
        }
    }

    /// `a_0, a_1, ..., a_M` with `a_0 = ||f||`.
    pub fn residual_norms(&self) -> Vec<f64> {
        std::iter::once(self.initial_norm)
            .chain(self.steps.iter().map(|s| s.residual_norm))
            .collect()
    }

    pub fn defects(&self) -> Vec<f64> {
        self.steps.iter().filter_map(|s| s.defect).collect()
    }

    pub fn weaknesses(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.weakness).collect()
    }

    pub fn final_residual_norm(&self) -> f64 {
        self.steps.last().map_or(self.initial_norm, |s| s.residual_norm)
    }

    /// `sum |c_i|` of the recorded expansion.
    pub fn coefficient_mass(&self) -> f64 {
        self.expansion.iter().map(|(c, _)| c.abs()).sum()
    }
}

fn check_inputs(f: &SeqVector, dict: &Dictionary, space: &LqSpace, m_max: usize) -> Result<()> {
    space.check_dim(f)?;
    if dict.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: dict.dim(),
        });
    }
    if m_max == 0 {
        return Err(invalid("m_max", "at least one iteration is required"));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn step_record(
    dict: &Dictionary,
    m: usize,
    sel: &Selection,
    weakness: f64,
    residual_norm: f64,
    defect: Option<f64>,
    solver_iterations: usize,
    started: Clock,
) -> GreedyStep {
    GreedyStep {
        m,
        residual_norm,
        atom_index: sel.index,
        atom_label: dict.label(sel.index).to_string(),
        sign: sel.sign,
        greedy_value: sel.greedy_value,
        selected_value: sel.value,
        weakness,
        defect,
        solver_iterations,
        elapsed_secs: started.elapsed_secs(),
    }
}

/// Merges `(coefficient, atom)` pairs that refer to the same atom.
fn accumulate(expansion: &mut Vec<(f64, usize)>, c: f64, index: usize) {
    match expansion.iter_mut().find(|(_, i)| *i == index) {
        Some(entry) => entry.0 += c,
        None => expansion.push((c, index)),
    }
}

/// Weak Chebyshev Greedy Algorithm.
///
/// Each step selects `phi_m` with `F_{f_{m-1}}(phi_m) >= t_m ||F_{f_{m-1}}||_D`,
/// records `v_m = ||phi_m - P_{Phi_{m-1}}(phi_m)||`, and sets `G_m` to the
/// Chebyshev projection of `f` onto `span(phi_1..phi_m)`. A zero `f`
/// yields an empty trace.
pub fn run_wcga(
    f: &SeqVector,
    dict: &Dictionary,
    tau: &WeaknessSequence,
    m_max: usize,
    space: &LqSpace,
    policy: TieBreakPolicy,
) -> Result<GreedyTrace> {
    run_chebyshev(Algorithm::Wcga, f, dict, tau, m_max, space, policy)
}

/// Orthogonal Greedy Algorithm: the WCGA in ℓ_2 with `t_k = 1`.
pub fn run_oga(f: &SeqVector, dict: &Dictionary, m_max: usize, policy: TieBreakPolicy) -> Result<GreedyTrace> {
    let space = LqSpace::hilbert(f.dim())?;
    run_chebyshev(Algorithm::Oga, f, dict, &WeaknessSequence::Constant(1.0), m_max, &space, policy)
}

fn run_chebyshev(
    algorithm: Algorithm,
    f: &SeqVector,
    dict: &Dictionary,
    tau: &WeaknessSequence,
    m_max: usize,
    space: &LqSpace,
    policy: TieBreakPolicy,
) -> Result<GreedyTrace> {
    check_inputs(f, dict, space, m_max)?;
    tau.validate(m_max)?;
    let started = Clock::start();
    let initial_norm = space.norm(f)?;
    let mut trace = GreedyTrace::new(algorithm, policy, f, initial_norm);

    let mut residual = f.clone();
    let mut residual_norm = initial_norm;
    let mut span: Vec<SeqVector> = Vec::new();
    let mut span_atoms: Vec<(f64, usize)> = Vec::new();

    for m in 1..=m_max {
        if residual_norm <= ZERO_RESIDUAL {
            trace.termination = Termination::ConvergedExactly;
            break;
        }
        let functional = space.norming_functional(&residual)?;
        let t = tau.get(m).expect("validated");
        let sel = dict.greedy_select_with(&functional, t, policy, |_, atom| {
            projection_defect(atom, &span, space)
        })?;
        if sel.greedy_value <= STALL_TOL {
            trace.termination = Termination::Stalled;
            break;
        }
        let phi = dict.atom(sel.index).scaled(sel.sign);
        let defect = projection_defect(&phi, &span, space)?;
        span.push(phi);
        span_atoms.push((sel.sign, sel.index));

        let proj = project(space, f, &span, DEFAULT_TOL)?;
        if !proj.converged {
            trace.termination = Termination::SolverFailure(format!(
                "projection at step {m} did not converge after {} iterations",
                proj.solver_iterations
            ));
            break;
        }
        residual = proj.residual;
        residual_norm = proj.residual_norm;
        trace.approximant = proj.approximant;
        trace.expansion.clear();
        for (c, &(sign, index)) in proj.coefficients.iter().zip(&span_atoms) {
            accumulate(&mut trace.expansion, c * sign, index);
        }
        trace.steps.push(step_record(
            dict,
            m,
            &sel,
            t,
            residual_norm,
            Some(defect),
            proj.solver_iterations,
            started,
        ));
    }
    Ok(trace)
}

/// Relaxed Greedy Algorithm:
/// `G_m = (1 - 1/(m+1)) G_{m-1} + g(f_{m-1})/(m+1)`, no projections.
///
/// `g(h)` maximizes the norming functional of `h` over the symmetric
/// closure, which in ℓ_2 is the maximizer of `<h, g>`.
pub fn run_rga(
    f: &SeqVector,
    dict: &Dictionary,
    m_max: usize,
    space: &LqSpace,
    policy: TieBreakPolicy,
) -> Result<GreedyTrace> {
    check_inputs(f, dict, space, m_max)?;
    let started = Clock::start();
    let initial_norm = space.norm(f)?;
    let mut trace = GreedyTrace::new(Algorithm::Rga, policy, f, initial_norm);
    let mut approximant = SeqVector::zeros(f.dim());
    let mut residual = f.clone();
    let mut residual_norm = initial_norm;

    for m in 1..=m_max {
        if residual_norm <= ZERO_RESIDUAL {
            trace.termination = Termination::ConvergedExactly;
            break;
        }
        let functional = space.norming_functional(&residual)?;
        let sel = dict.greedy_select(&functional, 1.0, policy);
        if sel.greedy_value <= STALL_TOL {
            trace.termination = Termination::Stalled;
            break;
        }
        let weight = 1.0 / (m as f64 + 1.0);
        approximant = approximant.scaled(1.0 - weight);
        approximant.add_scaled(weight * sel.sign, dict.atom(sel.index));
        for entry in &mut trace.expansion {
            entry.0 *= 1.0 - weight;
        }
        accumulate(&mut trace.expansion, weight * sel.sign, sel.index);

        residual = f.sub(&approximant);
        residual_norm = space.norm(&residual)?;
        trace
            .steps
            .push(step_record(dict, m, &sel, 1.0, residual_norm, None, 0, started));
    }
    trace.approximant = approximant;
    Ok(trace)
}

/// Weak Greedy Algorithm with Free Relaxation.
///
/// Step `m` picks `phi_m` by the weak greedy rule, then minimizes
/// `||f - ((1 - w) G_{m-1} + lambda phi_m)||` over `(w, lambda)`, which is the
/// Chebyshev projection of `f` onto `span(G_{m-1}, phi_m)`. The recorded
/// defect is `u_m = ||phi_m - P_{span(phi_{m-1}, G_{m-2})}(phi_m)||`, with
/// the empty span at `m = 1`.
pub fn run_wgafr(
    f: &SeqVector,
    dict: &Dictionary,
    tau: &WeaknessSequence,
    m_max: usize,
    space: &LqSpace,
    policy: TieBreakPolicy,
) -> Result<GreedyTrace> {
    check_inputs(f, dict, space, m_max)?;
    tau.validate(m_max)?;
    let started = Clock::start();
    let initial_norm = space.norm(f)?;
    let mut trace = GreedyTrace::new(Algorithm::Wgafr, policy, f, initial_norm);

    let mut approximant = SeqVector::zeros(f.dim());
    let mut residual = f.clone();
    let mut residual_norm = initial_norm;
    // Phi_{m-1}^e = span(phi_{m-1}, G_{m-2}); empty before the first step.
    let mut previous_span: Vec<SeqVector> = Vec::new();

    for m in 1..=m_max {
        if residual_norm <= ZERO_RESIDUAL {
            trace.termination = Termination::ConvergedExactly;
            break;
        }
        let functional = space.norming_functional(&residual)?;
        let t = tau.get(m).expect("validated");
        let sel = dict.greedy_select_with(&functional, t, policy, |_, atom| {
            projection_defect(atom, &previous_span, space)
        })?;
        if sel.greedy_value <= STALL_TOL {
            trace.termination = Termination::Stalled;
            break;
        }
        let phi = dict.atom(sel.index).scaled(sel.sign);
        let defect = projection_defect(&phi, &previous_span, space)?;

        let span = if approximant.is_zero() {
            vec![phi.clone()]
        } else {
            vec![approximant.clone(), phi.clone()]
        };
        let proj = project(space, f, &span, DEFAULT_TOL)?;
        if !proj.converged {
            trace.termination = Termination::SolverFailure(format!(
                "two-dimensional projection at step {m} did not converge after {} iterations",
                proj.solver_iterations
            ));
            break;
        }
        let (keep, lambda) = match proj.coefficients.as_slice() {
            [lambda] => (0.0, *lambda),
            [keep, lambda] => (*keep, *lambda),
            _ => unreachable!("span has one or two elements"),
        };
        for entry in &mut trace.expansion {
            entry.0 *= keep;
        }
        accumulate(&mut trace.expansion, lambda * sel.sign, sel.index);
        trace.expansion.retain(|(c, _)| *c != 0.0);

        let previous_g = std::mem::replace(&mut approximant, proj.approximant);
        previous_span = if previous_g.is_zero() {
            vec![phi]
        } else {
            vec![phi, previous_g]
        };
        residual = proj.residual;
        residual_norm = proj.residual_norm;
        trace.steps.push(step_record(
            dict,
            m,
            &sel,
            t,
            residual_norm,
            Some(defect),
            proj.solver_iterations,
            started,
        ));
    }
    trace.approximant = approximant;
    Ok(trace)
}

/// An expansion `f = sum c_i g_i` with `sum |c_i| <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A1Representation {
    terms: Vec<(f64, usize)>,
}

impl A1Representation {
    pub fn new(terms: Vec<(f64, usize)>) -> Result<Self> {
        let mass: f64 = terms.iter().map(|(c, _)| c.abs()).sum();
        if !mass.is_finite() || mass > 1.0 + 1e-12 {
            return Err(invalid("representation", format!("coefficient mass {mass} exceeds 1")));
        }
        Ok(Self { terms })
    }

    /// `c_i = 2^{-i}` on atoms `0..count` of the dictionary.
    pub fn geometric(count: usize) -> Self {
        Self {
            terms: (0..count).map(|i| (0.5f64.powi(i as i32 + 1), i)).collect(),
        }
    }

    pub fn terms(&self) -> &[(f64, usize)] {
        &self.terms
    }

    /// `beta_m = sum_{i > m} |c_i|`
    pub fn tail_mass(&self, m: usize) -> f64 {
        self.terms.iter().skip(m).map(|(c, _)| c.abs()).sum()
    }

    pub fn element(&self, dict: &Dictionary) -> SeqVector {
        dict.combination(&self.terms)
    }
}

/// The two-stage approximant `s_m = s_m^1 + s_m^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStageApproximant {
    pub approximant: SeqVector,
    pub beta: f64,
    /// `||f - s_m||`
    pub error: f64,
    pub expansion: Vec<(f64, usize)>,
    /// The relaxed greedy run on the normalized tail, when one was needed.
    pub tail_trace: Option<GreedyTrace>,
}

/// Builds `s_m^1 = sum_{i<=m} c_i g_i` from the head of the expansion and
/// `s_m^2 = beta_m G_m(h_m)` with `h_m = (f - s_m^1)/beta_m` and `G_m` from
/// [`run_rga`] under lowest-index selection.
pub fn build_al1_approximant(
    rep: &A1Representation,
    dict: &Dictionary,
    m: usize,
    space: &LqSpace,
) -> Result<TwoStageApproximant> {
    if m == 0 {
        return Err(invalid("m", "at least one term is required"));
    }
    if let Some(&(_, i)) = rep.terms.iter().find(|(_, i)| *i >= dict.len()) {
        return Err(invalid("representation", format!("atom index {i} out of range")));
    }
    let f = rep.element(dict);
    let head: Vec<(f64, usize)> = rep.terms.iter().take(m).copied().collect();
    let head_sum = dict.combination(&head);
    let beta = rep.tail_mass(m);

    let mut expansion = Vec::new();
    for &(c, i) in &head {
        accumulate(&mut expansion, c, i);
    }
    if beta == 0.0 {
        let error = space.norm(&f.sub(&head_sum))?;
        return Ok(TwoStageApproximant {
            approximant: head_sum,
            beta,
            error,
            expansion,
            tail_trace: None,
        });
    }

    let h = f.sub(&head_sum).scaled(1.0 / beta);
    let tail = run_rga(&h, dict, m, space, TieBreakPolicy::LowestIndex)?;
    let mut approximant = head_sum;
    approximant.add_scaled(beta, &tail.approximant);
    for &(c, i) in &tail.expansion {
        accumulate(&mut expansion, beta * c, i);
    }
    let error = space.norm(&f.sub(&approximant))?;
    Ok(TwoStageApproximant {
        approximant,
        beta,
        error,
        expansion,
        tail_trace: Some(tail),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{build_bt1, build_bt3, parse_dictionary};
    use approx::assert_abs_diff_eq;

    #[test]
    fn weakness_validation() {
        assert!(WeaknessSequence::constant(1.5).is_err());
        assert!(WeaknessSequence::constant(-0.1).is_err());
        let tau = WeaknessSequence::list(vec![1.0, 0.5]).unwrap();
        assert_eq!(tau.get(2), Some(0.5));
        assert_eq!(tau.get(3), None);
        assert!(tau.validate(3).is_err());
        assert_eq!(tau.get(0), None);
    }

    #[test]
    fn oga_bt3_adversarial() {
        let (d, f) = build_bt3(12).unwrap();
        let trace = run_oga(&f, &d, 10, TieBreakPolicy::PreferGAscending).unwrap();
        assert_eq!(trace.steps.len(), 10);
        assert_abs_diff_eq!(trace.initial_norm, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        for s in &trace.steps {
            assert_eq!(s.atom_label, format!("g{}", s.m));
            assert_abs_diff_eq!(s.residual_norm, 1.0 / (2.0 * (s.m as f64 + 1.0)).sqrt(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(trace.steps[6].residual_norm, 0.25, epsilon = 1e-14);
    }

    #[test]
    fn oga_bt3_lowest_index_finds_two_term_representation() {
        let (d, f) = build_bt3(12).unwrap();
        let trace = run_oga(&f, &d, 10, TieBreakPolicy::LowestIndex).unwrap();
        assert_eq!(trace.steps.len(), 2);
        assert_eq!(trace.termination, Termination::ConvergedExactly);
        assert!(trace.final_residual_norm() <= 1e-15);
    }

    #[test]
    fn single_atom_target() {
        let (d, _) = build_bt1(5).unwrap();
        let f = d.atom(2).clone();
        let trace = run_oga(&f, &d, 5, TieBreakPolicy::LowestIndex).unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_abs_diff_eq!(trace.steps[0].residual_norm, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn orthonormal_dictionary_selects_by_coefficient() {
        let h = LqSpace::hilbert(4).unwrap();
        let d = parse_dictionary("1,0,0,0\n0,1,0,0\n0,0,1,0\n", &h).unwrap();
        let raw = SeqVector::new(vec![0.6, 0.3, 0.1, 0.0]).unwrap();
        let f = raw.scaled(1.0 / h.norm(&raw).unwrap());
        let trace = run_wcga(&f, &d, &WeaknessSequence::default(), 3, &h, TieBreakPolicy::LowestIndex).unwrap();
        let order: Vec<usize> = trace.steps.iter().map(|s| s.atom_index).collect();
        assert_eq!(order, vec![0, 1, 2]);
        let n = h.norm(&raw).unwrap();
        let tails = [(0.09f64 + 0.01).sqrt() / n, 0.1 / n, 0.0];
        for (s, t) in trace.steps.iter().zip(tails) {
            assert_abs_diff_eq!(s.residual_norm, t, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_target_gives_empty_trace() {
        let (d, _) = build_bt1(5).unwrap();
        let h = LqSpace::hilbert(5).unwrap();
        let trace = run_wcga(&SeqVector::zeros(5), &d, &WeaknessSequence::default(), 3, &h, TieBreakPolicy::LowestIndex).unwrap();
        assert!(trace.steps.is_empty());
        assert_eq!(trace.termination, Termination::ConvergedExactly);
    }

    #[test]
    fn rga_bt3_adversarial() {
        let (d, f) = build_bt3(12).unwrap();
        let h = LqSpace::hilbert(12).unwrap();
        let trace = run_rga(&f, &d, 10, &h, TieBreakPolicy::PreferGAscending).unwrap();
        for s in &trace.steps {
            assert!(s.defect.is_none());
            assert_abs_diff_eq!(s.residual_norm, 1.0 / (2.0 * (s.m as f64 + 1.0)).sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn rga_single_atom_halves() {
        let (d, _) = build_bt1(5).unwrap();
        let h = LqSpace::hilbert(5).unwrap();
        let f = d.atom(1).clone();
        let trace = run_rga(&f, &d, 1, &h, TieBreakPolicy::LowestIndex).unwrap();
        assert_abs_diff_eq!(trace.steps[0].residual_norm, 0.5, epsilon = 1e-15);
        assert_eq!(trace.approximant, f.scaled(0.5));
    }

    #[test]
    fn wgafr_orthonormal_one_step() {
        let h = LqSpace::hilbert(3).unwrap();
        let d = parse_dictionary("1,0,0\n0,1,0\n0,0,1\n", &h).unwrap();
        let f = SeqVector::basis(3, 0);
        let trace = run_wgafr(&f, &d, &WeaknessSequence::default(), 4, &h, TieBreakPolicy::LowestIndex).unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].defect, Some(1.0));
        assert_abs_diff_eq!(trace.steps[0].residual_norm, 0.0, epsilon = 1e-15);
        assert_eq!(trace.expansion, vec![(1.0, 0)]);
    }

    #[test]
    fn al1_finite_representation_is_exact() {
        let (d, _) = build_bt1(8).unwrap();
        let h = LqSpace::hilbert(8).unwrap();
        let rep = A1Representation::new(vec![(0.5, 0), (-0.25, 3)]).unwrap();
        let s = build_al1_approximant(&rep, &d, 2, &h).unwrap();
        assert_eq!(s.beta, 0.0);
        assert_eq!(s.error, 0.0);
        assert!(s.tail_trace.is_none());
    }

    #[test]
    fn al1_geometric_tail_mass() {
        let rep = A1Representation::geometric(60);
        assert_abs_diff_eq!(rep.tail_mass(10), 2f64.powi(-10), epsilon = 1e-15);
        assert!(A1Representation::new(vec![(0.7, 0), (0.4, 1)]).is_err());
    }

    #[test]
    fn al1_output_in_convex_hull() {
        let (d, _) = build_bt1(41).unwrap();
        let h = LqSpace::hilbert(41).unwrap();
        let rep = A1Representation::geometric(40);
        for m in [3, 6, 12] {
            let s = build_al1_approximant(&rep, &d, m, &h).unwrap();
            let mass: f64 = s.expansion.iter().map(|(c, _)| c.abs()).sum();
            assert!(mass <= 1.0 + 1e-12);
            assert!(s.expansion.len() <= 2 * m);
            assert_abs_diff_eq!(d.combination(&s.expansion).sub(&s.approximant).as_slice().iter().map(|x| x.abs()).sum::<f64>(), 0.0, epsilon = 1e-14);
        }
    }
}
