//! Symmetric dictionaries, the explicit lower-bound constructions, and greedy
//! atom selection.
//!
//! The constructions are countably infinite families truncated to an ambient
//! dimension `N`. Each of them only involves the first `m + 2` coordinates
//! after `m` greedy steps, so choosing `N >= m_max + 2` makes the truncation
//! exact for every reported step.
//!
//! In [`build_bt3`] and [`build_br1`] the two `u` atoms are stored first, so
//! [`TieBreakPolicy::LowestIndex`] and [`TieBreakPolicy::PreferGAscending`]
//! realize different runs of the same algorithm.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lpspace::{lq_norm, DualFunctional, LqSpace, SeqVector};

/// Two greedy values closer than this are an exact tie.
pub const TIE_TOL: f64 = 1e-10;

const NORM_SLACK: f64 = 1e-12;

/// An indexed family of atoms of norm at most one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dictionary {
    atoms: Vec<SeqVector>,
    labels: Vec<String>,
    symmetric: bool,
    dim: usize,
}

impl Dictionary {
    /// Builds a symmetric dictionary, checking atom norms in `space`.
    /// Missing labels are generated as `a1, a2, ...`.
    pub fn new(space: &LqSpace, atoms: Vec<SeqVector>, labels: Option<Vec<String>>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyDictionary);
        }
        for (index, atom) in atoms.iter().enumerate() {
            let norm = space.norm(atom)?;
            if norm > 1.0 + NORM_SLACK {
                return Err(Error::AtomNorm { index, norm });
            }
        }
        let labels = match labels {
            Some(l) if l.len() == atoms.len() => l,
            Some(l) => {
                return Err(invalid(
                    "labels",
                    format!("{} labels for {} atoms", l.len(), atoms.len()),
                ))
            }
            None => (1..=atoms.len()).map(|i| format!("a{i}")).collect(),
        };
        Ok(Self {
            atoms,
            labels,
            symmetric: true,
            dim: space.dim(),
        })
    }

    /// Like [`Dictionary::new`] but rescales every atom to unit norm first.
    pub fn normalized(
        space: &LqSpace,
        atoms: Vec<SeqVector>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let mut unit = Vec::with_capacity(atoms.len());
        for (i, atom) in atoms.into_iter().enumerate() {
            let n = space.norm(&atom)?;
            if n == 0.0 {
                return Err(Error::ZeroAtom(i));
            }
            unit.push(atom.scaled(1.0 / n));
        }
        Self::new(space, unit, labels)
    }

    /// Only `+g` is eligible during selection.
    pub fn one_sided(mut self) -> Self {
        self.symmetric = false;
        self
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn atom(&self, i: usize) -> &SeqVector {
        &self.atoms[i]
    }

    pub fn atoms(&self) -> &[SeqVector] {
        &self.atoms
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// `sum c_i g_i` for `(c_i, index_i)` pairs.
    pub fn combination(&self, terms: &[(f64, usize)]) -> SeqVector {
        let mut out = SeqVector::zeros(self.dim);
        for &(c, i) in terms {
            out.add_scaled(c, &self.atoms[i]);
        }
        out
    }

    /// Signed value of `F` on each atom's best orientation.
    fn oriented_values(&self, functional: &DualFunctional) -> Vec<(f64, f64)> {
        self.atoms
            .iter()
            .map(|g| {
                let s = functional.apply(g);
                if self.symmetric && s < 0.0 {
                    (-s, -1.0)
                } else {
                    (s, 1.0)
                }
            })
            .collect()
    }

    /// `||F||_D = sup_{g in D} F(g)` over the symmetric closure.
    pub fn dual_norm(&self, functional: &DualFunctional) -> f64 {
        self.oriented_values(functional)
            .into_iter()
            .map(|(v, _)| v)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Weak greedy selection without a defect oracle. Under
    /// [`TieBreakPolicy::VMinimizing`] this degrades to lowest-index.
    pub fn greedy_select(&self, functional: &DualFunctional, t: f64, policy: TieBreakPolicy) -> Selection {
        self.select_inner(functional, t, policy, None::<fn(usize, &SeqVector) -> Result<f64>>)
            .expect("selection without a defect oracle cannot fail")
    }

    /// Weak greedy selection. `defect(i, atom)` is consulted only under
    /// [`TieBreakPolicy::VMinimizing`], once per threshold-meeting atom.
    pub fn greedy_select_with<D>(
        &self,
        functional: &DualFunctional,
        t: f64,
        policy: TieBreakPolicy,
        defect: D,
    ) -> Result<Selection>
    where
        D: FnMut(usize, &SeqVector) -> Result<f64>,
    {
        self.select_inner(functional, t, policy, Some(defect))
    }

    fn select_inner<D>(
        &self,
        functional: &DualFunctional,
        t: f64,
        policy: TieBreakPolicy,
        defect: Option<D>,
    ) -> Result<Selection>
    where
        D: FnMut(usize, &SeqVector) -> Result<f64>,
    {
        let values = self.oriented_values(functional);
        let greedy_value = values.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
        let threshold = t * greedy_value - TIE_TOL;
        let maximizers = || {
            values
                .iter()
                .enumerate()
                .filter(|(_, v)| v.0 >= greedy_value - TIE_TOL)
                .map(|(i, _)| i)
        };
        let lowest_meeting = || {
            values
                .iter()
                .position(|v| v.0 >= threshold)
                .expect("the maximizer always meets the threshold")
        };

        let index = match (policy, defect) {
            (TieBreakPolicy::LowestIndex, _) | (TieBreakPolicy::VMinimizing, None) => lowest_meeting(),
            (TieBreakPolicy::PreferGAscending, _) => maximizers()
                .find(|&i| self.labels[i].starts_with('g'))
                .or_else(|| maximizers().next())
                .expect("at least one maximizer exists"),
            (TieBreakPolicy::VMinimizing, Some(mut defect)) => {
                let mut best: Option<(usize, f64)> = None;
                for (i, v) in values.iter().enumerate() {
                    if v.0 < threshold {
                        continue;
                    }
                    let d = defect(i, &self.atoms[i])?;
                    if best.is_none_or(|(_, bd)| d < bd - TIE_TOL) {
                        best = Some((i, d));
                    }
                }
                best.map(|(i, _)| i).unwrap_or_else(lowest_meeting)
            }
        };
        let (value, sign) = values[index];
        Ok(Selection {
            index,
            sign,
            value,
            greedy_value,
        })
    }
}

/// Outcome of one greedy step: the atom `sign * D[index]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub sign: f64,
    /// `F(sign * D[index])`
    pub value: f64,
    /// `||F||_D`
    pub greedy_value: f64,
}

/// How to choose among atoms that satisfy the weak greedy inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreakPolicy {
    /// Smallest index meeting the threshold.
    #[default]
    LowestIndex,
    /// Smallest-index `g`-labeled atom among the exact maximizers.
    PreferGAscending,
    /// Threshold-meeting atom with the smallest projection defect.
    VMinimizing,
}

impl fmt::Display for TieBreakPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LowestIndex => "lowest-index",
            Self::PreferGAscending => "prefer-g-ascending",
            Self::VMinimizing => "v-minimizing",
        })
    }
}

impl FromStr for TieBreakPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowest-index" => Ok(Self::LowestIndex),
            "prefer-g-ascending" => Ok(Self::PreferGAscending),
            "v-minimizing" => Ok(Self::VMinimizing),
            other => Err(invalid("policy", format!("unknown tie-break policy `{other}`"))),
        }
    }
}

fn e(dim: usize, k: usize) -> SeqVector {
    SeqVector::basis(dim, k - 1)
}

fn scaled_difference(dim: usize, plus: usize, minus: usize, c: f64) -> SeqVector {
    let mut v = e(dim, plus);
    v.add_scaled(-1.0, &e(dim, minus));
    v.scaled(c)
}

/// `g_k = (e_{k+1} - e_1)/sqrt(2)`, `k = 1..N-1`, and `f = -e_1/sqrt(2)`.
pub fn build_bt1(n: usize) -> Result<(Dictionary, SeqVector)> {
    if n < 3 {
        return Err(invalid("N", format!("{n} < 3")));
    }
    let space = LqSpace::hilbert(n)?;
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let atoms = (1..n).map(|k| scaled_difference(n, k + 1, 1, c)).collect();
    let labels = (1..n).map(|k| format!("g{k}")).collect();
    let dict = Dictionary::new(&space, atoms, Some(labels))?;
    Ok((dict, e(n, 1).scaled(-c)))
}

/// The ℓ_q analogue: `g_k = 2^{-1/q}(e_{k+1} - e_1)`, `f = -2^{-1/q} e_1`.
pub fn build_btq(n: usize, q: f64) -> Result<(Dictionary, SeqVector)> {
    if n < 3 {
        return Err(invalid("N", format!("{n} < 3")));
    }
    if !(q > 1.0 && q < 2.0) {
        return Err(invalid("q", format!("{q} is outside (1, 2)")));
    }
    let space = LqSpace::new(q, n)?;
    let c = 2f64.powf(-1.0 / q);
    let atoms = (1..n).map(|k| scaled_difference(n, k + 1, 1, c)).collect();
    let labels = (1..n).map(|k| format!("g{k}")).collect();
    let dict = Dictionary::new(&space, atoms, Some(labels))?;
    Ok((dict, e(n, 1).scaled(-c)))
}

/// `u_1 = (e_1 - e_2)/sqrt(2)`, `u_2 = (-e_1 - e_2)/sqrt(2)`,
/// `g_k = (e_{k+2} - e_2)/sqrt(2)` for `k = 1..N-2`, and
/// `f = -e_2/sqrt(2) = (u_1 + u_2)/2`. Atom order: `u1, u2, g1, g2, ...`.
pub fn build_bt3(n: usize) -> Result<(Dictionary, SeqVector)> {
    if n < 4 {
        return Err(invalid("N", format!("{n} < 4")));
    }
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let u1 = scaled_difference(n, 1, 2, c);
    let u2 = e(n, 1).add(&e(n, 2)).scaled(-c);
    let f = e(n, 2).scaled(-c);
    with_u_atoms(n, u1, u2, f)
}

/// Perturbed variant: `u_1 = (1/sqrt2 + d', -1/sqrt2 + delta, 0, ...)`,
/// `u_2 = (-1/sqrt2 - d', -1/sqrt2 + delta, 0, ...)` with `d'` fixing unit
/// norm, same `g_k` as [`build_bt3`], and `f = (u_1 + u_2)/2`.
pub fn build_br1(n: usize, delta: f64) -> Result<(Dictionary, SeqVector)> {
    if n < 4 {
        return Err(invalid("N", format!("{n} < 4")));
    }
    let c = std::f64::consts::FRAC_1_SQRT_2;
    if !(delta > 0.0 && delta < c) {
        return Err(invalid("delta", format!("{delta} is outside (0, 1/sqrt(2))")));
    }
    let first = br1_first_coordinate(delta);
    let second = -c + delta;
    let mut u1 = SeqVector::zeros(n);
    u1.add_scaled(first, &e(n, 1));
    u1.add_scaled(second, &e(n, 2));
    let mut u2 = SeqVector::zeros(n);
    u2.add_scaled(-first, &e(n, 1));
    u2.add_scaled(second, &e(n, 2));
    let f = e(n, 2).scaled(second);
    with_u_atoms(n, u1, u2, f)
}

/// `1/sqrt2 + d'`, the nonnegative root of `x^2 + (1/sqrt2 - delta)^2 = 1`.
pub fn br1_first_coordinate(delta: f64) -> f64 {
    let b = std::f64::consts::FRAC_1_SQRT_2 - delta;
    (1.0 - b * b).sqrt()
}

/// `d' = sqrt(1 - (1/sqrt2 - delta)^2) - 1/sqrt2`
pub fn br1_delta_prime(delta: f64) -> f64 {
    br1_first_coordinate(delta) - std::f64::consts::FRAC_1_SQRT_2
}

fn with_u_atoms(n: usize, u1: SeqVector, u2: SeqVector, f: SeqVector) -> Result<(Dictionary, SeqVector)> {
    let space = LqSpace::hilbert(n)?;
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let mut atoms = vec![u1, u2];
    let mut labels = vec!["u1".to_string(), "u2".to_string()];
    for k in 1..=n - 2 {
        atoms.push(scaled_difference(n, k + 2, 2, c));
        labels.push(format!("g{k}"));
    }
    let dict = Dictionary::new(&space, atoms, Some(labels))?;
    Ok((dict, f))
}

/// Reads a CSV dictionary: one atom per row. A first line starting with `#`
/// marks labeled rows (`label,c1,c2,...`). Atoms are rescaled to unit norm.
pub fn load_dictionary(path: impl AsRef<Path>, space: &LqSpace) -> Result<Dictionary> {
    let text = std::fs::read_to_string(path)?;
    parse_dictionary(&text, space)
}

pub fn parse_dictionary(text: &str, space: &LqSpace) -> Result<Dictionary> {
    let labeled = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.trim_start().starts_with('#'));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(labeled)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut atoms = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let mut fields = record.iter();
        if labeled {
            let label = fields
                .next()
                .ok_or_else(|| Error::Parse(format!("row {}: missing label", row + 1)))?;
            labels.push(label.to_string());
        }
        let coords = fields
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: `{s}` is not a number", row + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let atom = SeqVector::new(coords)
            .map_err(|_| Error::Parse(format!("row {}: non-finite coordinate", row + 1)))?;
        space.check_dim(&atom)?;
        atoms.push(atom);
    }
    Dictionary::normalized(space, atoms, labeled.then_some(labels))
}

/// `count` atoms with i.i.d. uniform `[-1, 1]` entries, rescaled to unit norm.
pub fn random_dictionary(space: &LqSpace, count: usize, seed: u64) -> Result<Dictionary> {
    if count == 0 {
        return Err(Error::EmptyDictionary);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut atoms = Vec::with_capacity(count);
    while atoms.len() < count {
        let v: Vec<f64> = (0..space.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if lq_norm(&v, space.q()) > 1e-8 {
            atoms.push(SeqVector::new(v)?);
        }
    }
    Dictionary::normalized(space, atoms, None)
}
