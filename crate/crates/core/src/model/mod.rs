//! Normalized nonnegative models.
//!
//! A user is a probability distribution over `D` latent elementary events
//! ([`StateVector`]). An item is a measurement with `Z` outcomes, described
//! by `Z` nonnegative vectors that sum componentwise to the all-ones vector
//! ([`OutcomeSystem`]). The probability that user `u` rates item `i` with
//! outcome `z` is the inner product of the user state with the `z`-th
//! outcome vector.
//!
//! In binary mode an item is a single [`LikeVector`] `f` in `[0,1]^D`; it is
//! the two-outcome system `(f, 1 - f)` and `p . f` is the probability that
//! the user likes the item.

mod io;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

pub use io::{deserialize_model, read_model, serialize_model, write_model};

/// Absolute tolerance for simplex and normalization checks.
pub const SIMPLEX_TOL: f64 = 1e-9;
/// Tolerance accepted on optimizer output.
pub const TRAINED_TOL: f64 = 1e-6;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// A user's taste: a probability distribution on the `D` elementary events.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    /// Checked constructor: entries must be nonnegative and sum to one
    /// within [`SIMPLEX_TOL`].
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        check_finite(&entries, "state vector")?;
        if entries.is_empty() {
            return Err(Error::invalid("state vector must have at least one entry"));
        }
        let v = StateVector(entries);
        match v.violations(SIMPLEX_TOL).first() {
            Some(msg) => Err(Error::invalid(msg.clone())),
            None => Ok(v),
        }
    }

    /// Wraps the entries without checking the simplex constraints.
    pub fn new_unchecked(entries: Vec<f64>) -> Self {
        StateVector(entries)
    }

    /// The canonical basis vector `e_j`.
    pub fn basis(dim: usize, j: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[j] = 1.0;
        StateVector(v)
    }

    pub fn uniform(dim: usize) -> Self {
        StateVector(vec![1.0 / dim as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    fn violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (j, &x) in self.0.iter().enumerate() {
            if x < -tol {
                out.push(format!("state component {j} negative = {}", fmt_num(x)));
            }
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > tol {
            out.push(format!("state sum = {}", fmt_num(sum)));
        }
        out
    }
}

/// Binary-mode item: probabilities of liking the item, one per elementary event.
#[derive(Clone, Debug, PartialEq)]
pub struct LikeVector(Vec<f64>);

impl LikeVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        check_finite(&entries, "like vector")?;
        let v = LikeVector(entries);
        match v.violations(SIMPLEX_TOL).first() {
            Some(msg) => Err(Error::invalid(msg.clone())),
            None => Ok(v),
        }
    }

    pub fn new_unchecked(entries: Vec<f64>) -> Self {
        LikeVector(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// The equivalent two-outcome system `(f, 1 - f)`; outcome 0 is "like".
    pub fn to_outcome_system(&self) -> OutcomeSystem {
        let like = self.0.clone();
        let dislike = self.0.iter().map(|f| 1.0 - f).collect();
        OutcomeSystem {
            vectors: vec![like, dislike],
        }
    }

    fn violations(&self, tol: f64) -> Vec<String> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &x)| x < -tol || x > 1.0 + tol)
            .map(|(j, &x)| format!("like component {j} outside [0,1] = {}", fmt_num(x)))
            .collect()
    }
}

/// Categorical item: `Z` nonnegative outcome vectors of dimension `D`
/// summing componentwise to the all-ones vector.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeSystem {
    vectors: Vec<Vec<f64>>,
}

impl OutcomeSystem {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let sys = Self::new_unchecked(vectors)?;
        match sys.violations(SIMPLEX_TOL).first() {
            Some(msg) => Err(Error::invalid(msg.clone())),
            None => Ok(sys),
        }
    }

    /// Checks shape and finiteness only.
    pub fn new_unchecked(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::invalid("outcome system needs at least one outcome"));
        };
        let dim = first.len();
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            check_finite(v, "outcome vector")?;
        }
        Ok(OutcomeSystem { vectors })
    }

    /// An item whose outcome `z` is certain on the elementary events mapped to
    /// `z` by `assignment` (a deterministic random variable).
    pub fn deterministic(assignment: &[usize], levels: usize) -> Result<Self> {
        let mut vectors = vec![vec![0.0; assignment.len()]; levels];
        for (j, &z) in assignment.iter().enumerate() {
            if z >= levels {
                return Err(Error::IndexOutOfRange {
                    kind: "outcome",
                    index: z,
                    len: levels,
                });
            }
            vectors[z][j] = 1.0;
        }
        Ok(OutcomeSystem { vectors })
    }

    pub fn levels(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn outcome(&self, z: usize) -> &[f64] {
        &self.vectors[z]
    }

    /// Entry `(j, z)` of the `D x Z` item matrix.
    pub fn entry(&self, j: usize, z: usize) -> f64 {
        self.vectors[z][j]
    }

    /// Outcome distribution `(p . E_z)_z` for a user state.
    pub fn distribution(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.len(),
            });
        }
        Ok(self.vectors.iter().map(|e| dot(p, e)).collect())
    }

    fn violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (z, v) in self.vectors.iter().enumerate() {
            for (j, &x) in v.iter().enumerate() {
                if x < -tol {
                    out.push(format!("outcome {z} component {j} negative = {}", fmt_num(x)));
                }
            }
        }
        for j in 0..self.dim() {
            let s: f64 = self.vectors.iter().map(|v| v[j]).sum();
            if (s - 1.0).abs() > tol {
                out.push(format!("outcome sum component {j} = {}", fmt_num(s)));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Binary,
    Categorical,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Binary => "binary",
            Mode::Categorical => "categorical",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Mode::Binary),
            "categorical" => Ok(Mode::Categorical),
            other => Err(Error::invalid(format!("unknown model mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Items {
    Binary(Vec<LikeVector>),
    Categorical(Vec<OutcomeSystem>),
}

impl Items {
    pub fn len(&self) -> usize {
        match self {
            Items::Binary(v) => v.len(),
            Items::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A full model: dimension, user states and item representations.
#[derive(Clone, Debug, PartialEq)]
pub struct NNModel {
    dim: usize,
    levels: usize,
    users: Vec<StateVector>,
    items: Items,
}

impl NNModel {
    /// Builds a model after checking that every vector has dimension `dim`
    /// and (categorical mode) every item has exactly `levels` outcomes.
    /// Simplex constraints are reported by [`validate_model`], not enforced.
    pub fn new(dim: usize, levels: usize, users: Vec<StateVector>, items: Items) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("model dimension must be positive"));
        }
        if levels == 0 {
            return Err(Error::invalid("rating levels must be positive"));
        }
        let same_dim = |d: usize| {
            if d == dim {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                })
            }
        };
        for u in &users {
            same_dim(u.dim())?;
        }
        match &items {
            Items::Binary(fs) => {
                for f in fs {
                    same_dim(f.dim())?;
                }
            }
            Items::Categorical(es) => {
                for e in es {
                    same_dim(e.dim())?;
                    if e.levels() != levels {
                        return Err(Error::DimensionMismatch {
                            expected: levels,
                            found: e.levels(),
                        });
                    }
                }
            }
        }
        Ok(NNModel {
            dim,
            levels,
            users,
            items,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn mode(&self) -> Mode {
        match self.items {
            Items::Binary(_) => Mode::Binary,
            Items::Categorical(_) => Mode::Categorical,
        }
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn users(&self) -> &[StateVector] {
        &self.users
    }

    pub fn items(&self) -> &Items {
        &self.items
    }

    pub fn user(&self, u: usize) -> Result<&StateVector> {
        self.users.get(u).ok_or(Error::IndexOutOfRange {
            kind: "user",
            index: u,
            len: self.users.len(),
        })
    }

    fn check_item(&self, i: usize) -> Result<()> {
        if i < self.num_items() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                kind: "item",
                index: i,
                len: self.num_items(),
            })
        }
    }

    /// Item `i` as an outcome system; binary items are expanded to `(f, 1 - f)`.
    pub fn item_outcomes(&self, i: usize) -> Result<OutcomeSystem> {
        self.check_item(i)?;
        Ok(match &self.items {
            Items::Binary(fs) => fs[i].to_outcome_system(),
            Items::Categorical(es) => es[i].clone(),
        })
    }

    /// Probability that user `u` likes item `i` (binary mode).
    pub fn predict_like(&self, u: usize, i: usize) -> Result<f64> {
        let Items::Binary(fs) = &self.items else {
            return Err(Error::ModeMismatch {
                expected: Mode::Binary,
            });
        };
        let p = self.user(u)?;
        self.check_item(i)?;
        Ok(dot(p.as_slice(), fs[i].as_slice()))
    }

    /// Rating distribution of user `u` on item `i` (categorical mode).
    pub fn predict_distribution(&self, u: usize, i: usize) -> Result<Vec<f64>> {
        let Items::Categorical(es) = &self.items else {
            return Err(Error::ModeMismatch {
                expected: Mode::Categorical,
            });
        };
        let p = self.user(u)?;
        self.check_item(i)?;
        es[i].distribution(p.as_slice())
    }

    /// Prediction on the rating scale: `Z * like` in binary mode, the
    /// expected rating (outcomes numbered `1..=Z`) in categorical mode.
    pub fn predict_rating(&self, u: usize, i: usize) -> Result<f64> {
        match self.mode() {
            Mode::Binary => Ok(self.levels as f64 * self.predict_like(u, i)?),
            Mode::Categorical => Ok(self
                .predict_distribution(u, i)?
                .iter()
                .enumerate()
                .map(|(z, p)| (z + 1) as f64 * p)
                .sum()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Subject {
    Model,
    User(usize),
    Item(usize),
}

/// A single broken constraint found by [`validate_model`].
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub subject: Subject,
    pub description: String,
    /// Size of the breach (distance outside the feasible range).
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.subject {
            Subject::Model => write!(f, "model: {}", self.description),
            Subject::User(u) => write!(f, "user {u}: {}", self.description),
            Subject::Item(i) => write!(f, "item {i}: {}", self.description),
        }
    }
}

/// Lists every constraint of `model` violated by more than `tol`.
pub fn validate_model(model: &NNModel, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for (u, p) in model.users.iter().enumerate() {
        for (j, &x) in p.0.iter().enumerate() {
            if !x.is_finite() || x < -tol {
                out.push(Violation {
                    subject: Subject::User(u),
                    description: format!("state component {j} negative = {}", fmt_num(x)),
                    magnitude: -x,
                });
            }
        }
        let sum: f64 = p.0.iter().sum();
        if !((sum - 1.0).abs() <= tol) {
            out.push(Violation {
                subject: Subject::User(u),
                description: format!("state sum = {}", fmt_num(sum)),
                magnitude: (sum - 1.0).abs(),
            });
        }
    }
    match &model.items {
        Items::Binary(fs) => {
            for (i, f) in fs.iter().enumerate() {
                for (j, &x) in f.0.iter().enumerate() {
                    let breach = if x < 0.0 { -x } else { x - 1.0 };
                    if !(breach <= tol) {
                        out.push(Violation {
                            subject: Subject::Item(i),
                            description: format!(
                                "like component {j} outside [0,1] = {}",
                                fmt_num(x)
                            ),
                            magnitude: breach,
                        });
                    }
                }
            }
        }
        Items::Categorical(es) => {
            for (i, e) in es.iter().enumerate() {
                for (z, v) in e.vectors.iter().enumerate() {
                    for (j, &x) in v.iter().enumerate() {
                        if !(x >= -tol) {
                            out.push(Violation {
                                subject: Subject::Item(i),
                                description: format!(
                                    "outcome {z} component {j} negative = {}",
                                    fmt_num(x)
                                ),
                                magnitude: -x,
                            });
                        }
                    }
                }
                for j in 0..e.dim() {
                    let s: f64 = e.vectors.iter().map(|v| v[j]).sum();
                    if !((s - 1.0).abs() <= tol) {
                        out.push(Violation {
                            subject: Subject::Item(i),
                            description: format!("outcome sum component {j} = {}", fmt_num(s)),
                            magnitude: (s - 1.0).abs(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Compact decimal for messages: 12 significant digits, trailing zeros trimmed.
pub(crate) fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{:.*e}", 11, x);
    let v: f64 = s.parse().unwrap_or(x);
    v.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(users: Vec<Vec<f64>>, items: Vec<Vec<f64>>) -> NNModel {
        let d = users[0].len();
        NNModel::new(
            d,
            2,
            users.into_iter().map(StateVector::new_unchecked).collect(),
            Items::Binary(items.into_iter().map(LikeVector::new_unchecked).collect()),
        )
        .unwrap()
    }

    fn categorical(users: Vec<Vec<f64>>, items: Vec<Vec<Vec<f64>>>) -> NNModel {
        let d = users[0].len();
        let z = items[0].len();
        NNModel::new(
            d,
            z,
            users.into_iter().map(StateVector::new_unchecked).collect(),
            Items::Categorical(
                items
                    .into_iter()
                    .map(|e| OutcomeSystem::new_unchecked(e).unwrap())
                    .collect(),
            ),
        )
        .unwrap()
    }

    #[test]
    fn valid_model_has_no_violations() {
        let m = binary(vec![vec![0.5, 0.5]], vec![vec![1.0, 0.0]]);
        assert!(validate_model(&m, SIMPLEX_TOL).is_empty());
    }

    #[test]
    fn state_sum_violation() {
        let m = binary(vec![vec![0.6, 0.6]], vec![vec![1.0, 0.0]]);
        let v = validate_model(&m, SIMPLEX_TOL);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].subject, Subject::User(0));
        assert_eq!(v[0].description, "state sum = 1.2");
        assert!((v[0].magnitude - 0.2).abs() < 1e-12);
    }

    #[test]
    fn outcome_sum_violation() {
        let m = categorical(vec![vec![0.5, 0.5]], vec![vec![vec![0.5, 0.5], vec![0.6, 0.5]]]);
        let v = validate_model(&m, SIMPLEX_TOL);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].subject, Subject::Item(0));
        assert_eq!(v[0].description, "outcome sum component 0 = 1.1");
        assert_eq!(v[0].to_string(), "item 0: outcome sum component 0 = 1.1");
    }

    #[test]
    fn like_out_of_box_and_negative_state() {
        let m = binary(vec![vec![1.2, -0.2]], vec![vec![1.5, -0.1]]);
        let v = validate_model(&m, SIMPLEX_TOL);
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn predict_like_examples() {
        let m = binary(
            vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.25, 0.75]],
            vec![vec![0.7, 0.2], vec![1.0, 1.0], vec![0.8, 0.4]],
        );
        assert_eq!(m.predict_like(0, 0).unwrap(), 0.7);
        assert_eq!(m.predict_like(1, 1).unwrap(), 1.0);
        assert!((m.predict_like(2, 2).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn predict_errors() {
        let m = binary(vec![vec![1.0]], vec![vec![0.3]]);
        assert!(matches!(m.predict_like(1, 0), Err(Error::IndexOutOfRange { kind: "user", .. })));
        assert!(matches!(m.predict_like(0, 4), Err(Error::IndexOutOfRange { kind: "item", .. })));
        assert!(matches!(
            m.predict_distribution(0, 0),
            Err(Error::ModeMismatch { expected: Mode::Categorical })
        ));
    }

    #[test]
    fn predict_distribution_examples() {
        let m = categorical(
            vec![vec![1.0, 0.0], vec![0.5, 0.5]],
            vec![
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            ],
        );
        assert_eq!(m.predict_distribution(0, 0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(m.predict_distribution(1, 0).unwrap(), vec![0.5, 0.5]);
        assert_eq!(m.predict_distribution(0, 1).unwrap(), vec![0.5, 0.5]);
        assert!(matches!(
            m.predict_like(0, 0),
            Err(Error::ModeMismatch { expected: Mode::Binary })
        ));
    }

    #[test]
    fn uninformative_item_gives_uniform() {
        let z = 4;
        let e = vec![vec![0.25; 3]; z];
        let m = categorical(vec![vec![0.2, 0.3, 0.5]], vec![e]);
        for p in m.predict_distribution(0, 0).unwrap() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn like_expansion_matches_like_probability() {
        let f = LikeVector::new(vec![0.8, 0.4]).unwrap();
        let p = [0.25, 0.75];
        let dist = f.to_outcome_system().distribution(&p).unwrap();
        assert_eq!(dist[0], dot(&p, f.as_slice()));
        assert!((dist[0] + dist[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn checked_constructors() {
        assert!(StateVector::new(vec![0.5, 0.5]).is_ok());
        assert!(StateVector::new(vec![0.5, 0.6]).is_err());
        assert!(StateVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(LikeVector::new(vec![1.2]).is_err());
        assert!(OutcomeSystem::new(vec![vec![0.5, 0.5], vec![0.6, 0.5]]).is_err());
        assert!(OutcomeSystem::new(vec![vec![0.5], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn model_shape_checks() {
        let r = NNModel::new(
            2,
            2,
            vec![StateVector::uniform(3)],
            Items::Binary(vec![]),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { expected: 2, found: 3 })));
        let r = NNModel::new(
            1,
            3,
            vec![StateVector::uniform(1)],
            Items::Categorical(vec![OutcomeSystem::new(vec![vec![1.0], vec![0.0]]).unwrap()]),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { expected: 3, found: 2 })));
    }

    #[test]
    fn fmt_num_trims() {
        assert_eq!(fmt_num(1.2), "1.2");
        assert_eq!(fmt_num(0.6 + 0.5), "1.1");
        assert_eq!(fmt_num(1.0), "1");
    }
}
