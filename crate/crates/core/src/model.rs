//! Discrete pairwise graphical models and exact enumeration-based inference.
//!
//! A [`DiscreteModel`] scores a full assignment `x` by
//! `theta(x) = offset + sum_i unary_i(x_i) + sum_{i<j} pair_ij(x_i, x_j)`,
//! with an optional set of forbidden assignments that score `-inf`.
//! Labels are addressed by their index in each variable's ordered label list;
//! the lexicographic order of index tuples is the canonical configuration
//! order used for tie-breaking everywhere in the crate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gumbel::LogSumExp;
use crate::score::Score;

/// Default cap on the number of configurations any enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 20;

/// A user-facing label as it appears in model files.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Text(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(v) => write!(f, "{v}"),
            Label::Text(s) => f.write_str(s),
        }
    }
}

/// A full (or partial, when used as a prefix) assignment of label indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(pub Vec<usize>);

impl Configuration {
    pub fn new(labels: Vec<usize>) -> Self {
        Configuration(labels)
    }

    /// `x_{0..j}`, the first `j` coordinates.
    pub fn prefix(&self, j: usize) -> &[usize] {
        &self.0[..j]
    }

    /// `x_{j..n}`.
    pub fn suffix(&self, j: usize) -> &[usize] {
        &self.0[j..]
    }

    pub fn concat(prefix: &[usize], suffix: &[usize]) -> Self {
        let mut v = Vec::with_capacity(prefix.len() + suffix.len());
        v.extend_from_slice(prefix);
        v.extend_from_slice(suffix);
        Configuration(v)
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for Configuration {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Configuration {
    fn from(v: Vec<usize>) -> Self {
        Configuration(v)
    }
}

/// Dense pairwise score table for variables `i < j`, row-major in `(x_i, x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFactor {
    pub i: usize,
    pub j: usize,
    cols: usize,
    table: Vec<f64>,
}

impl PairFactor {
    #[inline]
    pub fn score(&self, xi: usize, xj: usize) -> f64 {
        self.table[xi * self.cols + xj]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteModel {
    labels: Vec<Vec<Label>>,
    unary: Vec<Vec<f64>>,
    pairwise: Vec<PairFactor>,
    forbidden: BTreeSet<Configuration>,
    offset: f64,
    cap: u128,
}

/// Incremental constructor for [`DiscreteModel`]. Repeated factors on the same
/// variables (or variable pair) accumulate.
#[derive(Debug)]
pub struct ModelBuilder {
    labels: Vec<Vec<Label>>,
    unary: Vec<Vec<f64>>,
    pairwise: BTreeMap<(usize, usize), Vec<f64>>,
    forbidden: BTreeSet<Configuration>,
    offset: f64,
    cap: u128,
    error: Option<Error>,
}

impl ModelBuilder {
    pub fn new(labels: Vec<Vec<Label>>) -> Self {
        let unary = labels.iter().map(|l| vec![0.0; l.len()]).collect();
        let error = labels
            .iter()
            .position(|l| l.is_empty())
            .map(|i| Error::invalid(format!("variable {i} has an empty domain")));
        ModelBuilder {
            labels,
            unary,
            pairwise: BTreeMap::new(),
            forbidden: BTreeSet::new(),
            offset: 0.0,
            cap: DEFAULT_ENUMERATION_CAP,
            error,
        }
    }

    /// Variables with labels `0..size` rendered as integers.
    pub fn with_domain_sizes(sizes: &[usize]) -> Self {
        Self::new(sizes.iter().map(|&k| (0..k as i64).map(Label::Int).collect()).collect())
    }

    /// `n` spin variables with labels `[-1, +1]` in that order.
    pub fn spins(n: usize) -> Self {
        Self::new(vec![vec![Label::Int(-1), Label::Int(1)]; n])
    }

    fn fail(&mut self, err: Error) {
        if self.error.is_none() {
            self.error = Some(err);
        }
    }

    fn check_score(&mut self, score: f64) -> bool {
        if score.is_finite() {
            true
        } else {
            self.fail(Error::invalid(format!("score {score} is not finite")));
            false
        }
    }

    pub fn unary(mut self, var: usize, label: usize, score: f64) -> Self {
        if !self.check_score(score) {
            return self;
        }
        match self.unary.get_mut(var).and_then(|u| u.get_mut(label)) {
            Some(slot) => *slot += score,
            None => self.fail(Error::invalid(format!("unary factor references invalid (var {var}, label {label})"))),
        }
        self
    }

    /// Sets every label score of `var` at once (added to existing scores).
    pub fn unary_scores(mut self, var: usize, scores: &[f64]) -> Self {
        if self.labels.get(var).map(Vec::len) != Some(scores.len()) {
            self.fail(Error::invalid(format!("unary score vector for variable {var} has the wrong length")));
            return self;
        }
        for (label, &s) in scores.iter().enumerate() {
            self = self.unary(var, label, s);
        }
        self
    }

    pub fn pairwise(mut self, var_i: usize, var_j: usize, li: usize, lj: usize, score: f64) -> Self {
        if !self.check_score(score) {
            return self;
        }
        let n = self.labels.len();
        if var_i == var_j || var_i >= n || var_j >= n {
            self.fail(Error::invalid(format!(
                "pairwise factor must reference two distinct valid variables, got ({var_i}, {var_j})"
            )));
            return self;
        }
        let (i, j, xi, xj) = if var_i < var_j { (var_i, var_j, li, lj) } else { (var_j, var_i, lj, li) };
        let (ki, kj) = (self.labels[i].len(), self.labels[j].len());
        if xi >= ki || xj >= kj {
            self.fail(Error::invalid(format!("pairwise factor ({i}, {j}) references an invalid label")));
            return self;
        }
        self.pairwise.entry((i, j)).or_insert_with(|| vec![0.0; ki * kj])[xi * kj + xj] += score;
        self
    }

    /// Adds a full score table for the pair, row-major in `(x_i, x_j)`.
    pub fn pairwise_table(mut self, i: usize, j: usize, table: &[f64]) -> Self {
        let n = self.labels.len();
        if i >= n || j >= n || i == j {
            self.fail(Error::invalid(format!("invalid pairwise variables ({i}, {j})")));
            return self;
        }
        let kj = self.labels[j].len();
        if table.len() != self.labels[i].len() * kj {
            self.fail(Error::invalid(format!("pairwise table for ({i}, {j}) has the wrong size")));
            return self;
        }
        for (idx, &s) in table.iter().enumerate() {
            self = self.pairwise(i, j, idx / kj, idx % kj, s);
        }
        self
    }

    pub fn forbid(mut self, x: Configuration) -> Self {
        self.forbidden.insert(x);
        self
    }

    pub fn offset(mut self, offset: f64) -> Self {
        if self.check_score(offset) {
            self.offset += offset;
        }
        self
    }

    pub fn enumeration_cap(mut self, cap: u128) -> Self {
        self.cap = cap;
        self
    }

    pub fn build(self) -> Result<DiscreteModel> {
        if let Some(err) = self.error {
            return Err(err);
        }
        let model = DiscreteModel {
            pairwise: self
                .pairwise
                .into_iter()
                .map(|((i, j), table)| PairFactor { i, j, cols: self.labels[j].len(), table })
                .collect(),
            labels: self.labels,
            unary: self.unary,
            forbidden: self.forbidden,
            offset: self.offset,
            cap: self.cap,
        };
        for x in &model.forbidden {
            model.validate(x)?;
        }
        if let Some(count) = model.config_count() {
            if model.forbidden.len() as u128 >= count {
                return Err(Error::Infeasible);
            }
        }
        Ok(model)
    }
}

impl DiscreteModel {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn domain_size(&self, var: usize) -> usize {
        self.labels[var].len()
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.labels.iter().map(Vec::len).collect()
    }

    pub fn labels(&self, var: usize) -> &[Label] {
        &self.labels[var]
    }

    pub fn unary(&self, var: usize) -> &[f64] {
        &self.unary[var]
    }

    pub fn pairwise(&self) -> &[PairFactor] {
        &self.pairwise
    }

    pub fn forbidden(&self) -> &BTreeSet<Configuration> {
        &self.forbidden
    }

    /// Constant added to every configuration's score.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn enumeration_cap(&self) -> u128 {
        self.cap
    }

    pub fn with_enumeration_cap(mut self, cap: u128) -> Self {
        self.cap = cap;
        self
    }

    /// `sum_i |X_i|`, the number of low-dimensional perturbation entries.
    pub fn total_labels(&self) -> usize {
        self.labels.iter().map(Vec::len).sum()
    }

    /// `|X|`, or `None` when it does not fit in a `u128`.
    pub fn config_count(&self) -> Option<u128> {
        self.labels.iter().try_fold(1u128, |acc, l| acc.checked_mul(l.len() as u128))
    }

    /// Returns `|X|` if enumeration is allowed under the configured cap.
    pub fn check_enumerable(&self) -> Result<u128> {
        match self.config_count() {
            Some(count) if count <= self.cap => Ok(count),
            Some(count) => Err(Error::ResourceLimit { count, cap: self.cap }),
            None => Err(Error::ResourceLimit { count: u128::MAX, cap: self.cap }),
        }
    }

    pub fn validate(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::invalid(format!(
                "configuration has {} coordinates, model has {} variables",
                x.len(),
                self.n()
            )));
        }
        self.validate_partial(x)
    }

    fn validate_partial(&self, x: &[usize]) -> Result<()> {
        if x.len() > self.n() {
            return Err(Error::invalid(format!(
                "partial configuration has {} coordinates, model has {} variables",
                x.len(),
                self.n()
            )));
        }
        for (i, &xi) in x.iter().enumerate() {
            if xi >= self.labels[i].len() {
                return Err(Error::invalid(format!("label index {xi} out of range for variable {i}")));
            }
        }
        Ok(())
    }

    pub fn is_forbidden(&self, x: &[usize]) -> bool {
        !self.forbidden.is_empty() && self.forbidden.contains(&Configuration(x.to_vec()))
    }

    /// Sum of factor scores, ignoring the forbidden set. `x` must be valid.
    #[inline]
    pub(crate) fn factor_sum(&self, x: &[usize]) -> f64 {
        let mut total = self.offset;
        for (u, &xi) in self.unary.iter().zip(x) {
            total += u[xi];
        }
        for f in &self.pairwise {
            total += f.score(x[f.i], x[f.j]);
        }
        total
    }

    /// `theta(x)` for a valid configuration, without validation.
    #[inline]
    pub(crate) fn score_unchecked(&self, x: &[usize]) -> Score {
        if self.is_forbidden(x) {
            Score::NegInf
        } else {
            Score::Finite(self.factor_sum(x))
        }
    }

    /// `theta(x)`: the sum of all factor scores, or the `-inf` sentinel when
    /// `x` is forbidden.
    pub fn potential(&self, x: &[usize]) -> Result<Score> {
        self.validate(x)?;
        Ok(self.score_unchecked(x))
    }

    /// All configurations in lexicographic order (last variable fastest).
    pub fn configurations(&self) -> Result<ConfigIter> {
        self.check_enumerable()?;
        Ok(ConfigIter::new(self.domain_sizes()))
    }

    /// Mixed-radix index of `x` in the lexicographic order.
    pub fn config_rank(&self, x: &[usize]) -> usize {
        x.iter().zip(&self.labels).fold(0usize, |acc, (&xi, l)| acc * l.len() + xi)
    }

    pub fn config_from_rank(&self, mut rank: usize) -> Configuration {
        let mut x = vec![0; self.n()];
        for (i, l) in self.labels.iter().enumerate().rev() {
            x[i] = rank % l.len();
            rank /= l.len();
        }
        Configuration(x)
    }

    /// `log Z = log sum_x exp(theta(x))`, by max-shifted enumeration.
    pub fn log_partition_exact(&self) -> Result<f64> {
        let mut acc = LogSumExp::new();
        for x in self.configurations()? {
            acc.push(self.score_unchecked(&x));
        }
        acc.value().ok_or(Error::Infeasible)
    }

    /// Gibbs probability `exp(theta(x) - log Z)`.
    pub fn gibbs_probability(&self, x: &[usize]) -> Result<f64> {
        self.validate(x)?;
        let log_z = self.log_partition_exact()?;
        Ok(match self.score_unchecked(x) {
            Score::Finite(s) => (s - log_z).exp(),
            Score::NegInf => 0.0,
        })
    }

    /// The full Gibbs distribution, indexed by [`config_rank`](Self::config_rank).
    pub fn gibbs_distribution(&self) -> Result<Vec<f64>> {
        let log_z = self.log_partition_exact()?;
        Ok(self
            .configurations()?
            .map(|x| match self.score_unchecked(&x) {
                Score::Finite(s) => (s - log_z).exp(),
                Score::NegInf => 0.0,
            })
            .collect())
    }

    /// Fixes the first `prefix.len()` variables and returns the model over the
    /// remaining ones. Factors touching the prefix are folded into unary scores
    /// of the remaining variables or into the constant offset, so the slice's
    /// potential of any suffix equals `theta(prefix ++ suffix)`.
    pub fn conditional_slice(&self, prefix: &[usize]) -> Result<DiscreteModel> {
        self.validate_partial(prefix)?;
        let j = prefix.len();
        if j == 0 {
            return Ok(self.clone());
        }
        let mut offset = self.offset;
        for (i, &xi) in prefix.iter().enumerate() {
            offset += self.unary[i][xi];
        }
        let mut unary: Vec<Vec<f64>> = self.unary[j..].to_vec();
        let mut pairwise = Vec::new();
        for f in &self.pairwise {
            if f.j < j {
                offset += f.score(prefix[f.i], prefix[f.j]);
            } else if f.i < j {
                let row = prefix[f.i];
                for (xj, u) in unary[f.j - j].iter_mut().enumerate() {
                    *u += f.score(row, xj);
                }
            } else {
                pairwise.push(PairFactor { i: f.i - j, j: f.j - j, cols: f.cols, table: f.table.clone() });
            }
        }
        let forbidden = self
            .forbidden
            .iter()
            .filter(|x| x.prefix(j) == prefix)
            .map(|x| Configuration(x.suffix(j).to_vec()))
            .collect();
        Ok(DiscreteModel { labels: self.labels[j..].to_vec(), unary, pairwise, forbidden, offset, cap: self.cap })
    }

    #[cfg(test)]
    pub(crate) fn unary_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.unary
    }

    pub fn label_values(&self, x: &[usize]) -> Vec<Label> {
        x.iter().enumerate().map(|(i, &xi)| self.labels[i][xi].clone()).collect()
    }

    /// Looks up label indices for a configuration given by label values.
    pub fn config_from_labels(&self, labels: &[Label]) -> Result<Configuration> {
        if labels.len() != self.n() {
            return Err(Error::invalid(format!("expected {} labels, got {}", self.n(), labels.len())));
        }
        labels.iter().enumerate().map(|(i, l)| self.label_index(i, l)).collect::<Result<Vec<_>>>().map(Configuration)
    }

    fn label_index(&self, var: usize, label: &Label) -> Result<usize> {
        self.labels
            .get(var)
            .ok_or_else(|| Error::invalid(format!("variable {var} does not exist")))?
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::invalid(format!("label {label} not in domain of variable {var}")))
    }

    pub fn from_file_format(file: ModelFile) -> Result<DiscreteModel> {
        let probe = ModelBuilder::new(file.domains.clone()).build()?;
        let mut b = ModelBuilder::new(file.domains);
        for u in &file.unary {
            let li = probe.label_index(u.var, &u.label)?;
            b = b.unary(u.var, li, u.score);
        }
        for p in &file.pairwise {
            let li = probe.label_index(p.var_i, &p.label_i)?;
            let lj = probe.label_index(p.var_j, &p.label_j)?;
            b = b.pairwise(p.var_i, p.var_j, li, lj, p.score);
        }
        for x in &file.forbidden {
            b = b.forbid(probe.config_from_labels(x)?);
        }
        b.build()
    }

    /// The file representation. A nonzero offset is folded into the first
    /// variable's unary scores.
    pub fn to_file_format(&self) -> ModelFile {
        let mut unary = Vec::new();
        for (var, scores) in self.unary.iter().enumerate() {
            for (li, &s) in scores.iter().enumerate() {
                let s = if var == 0 { s + self.offset } else { s };
                if s != 0.0 {
                    unary.push(UnaryEntry { var, label: self.labels[var][li].clone(), score: s });
                }
            }
        }
        let mut pairwise = Vec::new();
        for f in &self.pairwise {
            for (idx, &s) in f.table.iter().enumerate() {
                if s != 0.0 {
                    pairwise.push(PairwiseEntry {
                        var_i: f.i,
                        var_j: f.j,
                        label_i: self.labels[f.i][idx / f.cols].clone(),
                        label_j: self.labels[f.j][idx % f.cols].clone(),
                        score: s,
                    });
                }
            }
        }
        ModelFile {
            domains: self.labels.clone(),
            unary,
            pairwise,
            forbidden: self.forbidden.iter().map(|x| self.label_values(x)).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<DiscreteModel> {
        let file: ModelFile = serde_json::from_str(text)?;
        Self::from_file_format(file)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file_format())?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<DiscreteModel> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// JSON document describing a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub domains: Vec<Vec<Label>>,
    #[serde(default)]
    pub unary: Vec<UnaryEntry>,
    #[serde(default)]
    pub pairwise: Vec<PairwiseEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forbidden: Vec<Vec<Label>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnaryEntry {
    pub var: usize,
    pub label: Label,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseEntry {
    pub var_i: usize,
    pub var_j: usize,
    pub label_i: Label,
    pub label_j: Label,
    pub score: f64,
}

/// Odometer over all configurations, last coordinate varying fastest.
#[derive(Debug, Clone)]
pub struct ConfigIter {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl ConfigIter {
    pub fn new(sizes: Vec<usize>) -> Self {
        let next = if sizes.contains(&0) { None } else { Some(vec![0; sizes.len()]) };
        ConfigIter { sizes, next }
    }
}

impl Iterator for ConfigIter {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carry = true;
        for i in (0..succ.len()).rev() {
            succ[i] += 1;
            if succ[i] < self.sizes[i] {
                carry = false;
                break;
            }
            succ[i] = 0;
        }
        if !carry {
            self.next = Some(succ);
        }
        Some(Configuration(current))
    }
}
