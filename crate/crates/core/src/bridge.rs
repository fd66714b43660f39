//! Conversions between normalized nonnegative models and plain nonnegative
//! matrix factorizations, plus tools showing why the normalization matters.
//!
//! A model is a factorization `A^T B` with `A = [p_1 .. p_U]` and
//! `B = [E_11 .. E_1Z E_21 ..]`. Conversely a nonnegative factorization of a
//! table of rating probabilities can be rescaled by a positive diagonal into
//! a model, provided both factors have full row rank.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::dataset::ProbabilityTable;
use crate::error::{Error, Result};
use crate::model::{validate_model, Items, Mode, NNModel, OutcomeSystem, StateVector};
use crate::rng;

/// Default agreement band for [`nmf_to_nnm`], relative to `max(eta)`.
pub const DEFAULT_BRIDGE_TOL: f64 = 1e-8;

/// Relative cutoff on singular values used by [`numerical_rank`].
pub const RANK_CUTOFF: f64 = 1e-10;

const MAX_CONDITION: f64 = 1e12;

/// Nonnegative factors `A` (`D x U`) and `B` (`D x I*Z`); column `i*Z + z`
/// of `B` belongs to item `i`, outcome `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonnegFactorization {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    levels: usize,
}

impl NonnegFactorization {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, levels: usize) -> Result<Self> {
        if a.nrows() != b.nrows() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: b.nrows(),
            });
        }
        if a.nrows() == 0 {
            return Err(Error::invalid("factorization needs at least one row"));
        }
        if levels == 0 || !b.ncols().is_multiple_of(levels) {
            return Err(Error::invalid(format!(
                "B has {} columns, not a multiple of {levels} rating levels",
                b.ncols()
            )));
        }
        for (name, m) in [("A", &a), ("B", &b)] {
            if let Some(v) = m.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::invalid(format!("{name} has entry {v}, expected finite and nonnegative")));
            }
        }
        Ok(NonnegFactorization { a, b, levels })
    }

    /// The factorization realized by a model (binary items expanded).
    pub fn from_model(model: &NNModel) -> Result<Self> {
        let d = model.dim();
        let a = DMatrix::from_fn(d, model.num_users(), |j, u| model.users()[u].as_slice()[j]);
        let z = match model.mode() {
            Mode::Binary => 2,
            Mode::Categorical => model.levels(),
        };
        let mut b = DMatrix::zeros(d, model.num_items() * z);
        for i in 0..model.num_items() {
            let e = model.item_outcomes(i)?;
            for k in 0..z {
                for j in 0..d {
                    b[(j, i * z + k)] = e.entry(j, k);
                }
            }
        }
        Self::new(a, b, z)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.a.ncols()
    }

    pub fn num_items(&self) -> usize {
        self.b.ncols() / self.levels
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// `A^T B`, one row per user.
    pub fn products(&self) -> DMatrix<f64> {
        self.a.transpose() * &self.b
    }

    /// Rescales row `j` of `A` by `s_j` and row `j` of `B` by `1 / s_j`,
    /// leaving the products unchanged.
    pub fn rescaled(&self, s: &[f64]) -> Result<Self> {
        if s.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: s.len(),
            });
        }
        if s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("scale factors must be positive"));
        }
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        for (j, &sj) in s.iter().enumerate() {
            a.row_mut(j).scale_mut(sj);
            b.row_mut(j).scale_mut(1.0 / sj);
        }
        Self::new(a, b, self.levels)
    }
}

/// Number of singular values above `RANK_CUTOFF` times the largest.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let top = sv.max();
    if top <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_CUTOFF * top).count()
}

/// Turns a nonnegative factorization of rating probabilities into a
/// categorical model: with `eta = sum_z b_iz` (the same for every item),
/// `p_u = diag(eta) a_u` and `E_iz = diag(eta)^-1 b_iz`.
///
/// `tol` is the agreement band for `eta` across items, relative to
/// `max(eta)`, and the threshold below which an `eta_j` counts as zero.
pub fn nmf_to_nnm(fact: &NonnegFactorization, tol: f64) -> Result<NNModel> {
    let d = fact.dim();
    let z = fact.levels();
    let items = fact.num_items();
    if items == 0 {
        return Err(Error::Bridge("factorization has no items".into()));
    }
    let item_eta = |i: usize| -> Vec<f64> {
        (0..d)
            .map(|j| (0..z).map(|k| fact.b[(j, i * z + k)]).sum())
            .collect()
    };
    let etas: Vec<Vec<f64>> = (0..items).map(item_eta).collect();
    let scale = etas.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
    let band = tol * scale.max(f64::MIN_POSITIVE);
    for (i, e) in etas.iter().enumerate().skip(1) {
        for j in 0..d {
            if (e[j] - etas[0][j]).abs() > band {
                return Err(Error::Bridge(format!(
                    "factorization violates normalization structure: item {i} row sum {j} is {} but item 0 has {}",
                    e[j], etas[0][j]
                )));
            }
        }
    }
    let eta: Vec<f64> = (0..d)
        .map(|j| etas.iter().map(|e| e[j]).sum::<f64>() / items as f64)
        .collect();
    if let Some(j) = eta.iter().position(|&v| v <= tol) {
        return Err(Error::Bridge(format!(
            "rank condition violated: eta component {j} = {} is not positive",
            eta[j]
        )));
    }
    for (name, m) in [("A", &fact.a), ("B", &fact.b)] {
        let r = numerical_rank(m);
        if r < d {
            return Err(Error::Bridge(format!(
                "rank condition violated: rank({name}) = {r} < {d}"
            )));
        }
    }

    let users: Vec<StateVector> = (0..fact.num_users())
        .map(|u| StateVector::new_unchecked((0..d).map(|j| eta[j] * fact.a[(j, u)]).collect()))
        .collect();
    for (u, p) in users.iter().enumerate() {
        let s: f64 = p.as_slice().iter().sum();
        if (s - 1.0).abs() > 1e-9_f64.max(tol) {
            return Err(Error::Bridge(format!(
                "products are not rating distributions: user {u} probabilities sum to {s}"
            )));
        }
    }
    let systems = (0..items)
        .map(|i| {
            let vectors = (0..z)
                .map(|k| (0..d).map(|j| fact.b[(j, i * z + k)] / eta[j]).collect())
                .collect();
            OutcomeSystem::new_unchecked(vectors)
        })
        .collect::<Result<Vec<_>>>()?;
    NNModel::new(d, z, users, Items::Categorical(systems))
}

/// Input to the model-fitting problem: a probability table and the
/// dimension a model must have.
#[derive(Clone, Debug, PartialEq)]
pub struct NNMInstance {
    pub table: ProbabilityTable,
    pub target_dimension: usize,
}

/// Maps a nonnegative matrix to a fitting instance with one item: row `u`
/// normalized to sum 1 becomes user `u`'s rating distribution. The target
/// dimension is `rank` if given, else the numerical rank of `m`.
pub fn reduce_exact_nmf(m: &DMatrix<f64>, rank: Option<usize>) -> Result<NNMInstance> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::invalid("matrix is empty"));
    }
    if let Some(v) = m.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::invalid(format!("matrix has entry {v}, expected finite and nonnegative")));
    }
    let mut entries = Vec::with_capacity(m.len());
    for (u, row) in m.row_iter().enumerate() {
        let s = row.sum();
        if s <= 0.0 {
            return Err(Error::Bridge(format!("row normalization undefined: row {u} sums to 0")));
        }
        entries.extend(row.iter().map(|v| v / s));
    }
    let target_dimension = match rank {
        Some(0) => return Err(Error::invalid("target dimension must be positive")),
        Some(r) => r,
        None => numerical_rank(m),
    };
    Ok(NNMInstance {
        table: ProbabilityTable::complete(m.nrows(), 1, m.ncols(), entries)?,
        target_dimension,
    })
}

/// Outcome of [`certify_extremal_uniqueness`].
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// Item `i`'s outcome `z` is the indicator of elementary event
    /// `permutations[i][z]`.
    Certified { permutations: Vec<Vec<usize>> },
    Refused { reason: String },
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certificate::Certified { .. })
    }
}

/// Checks that a model fitting an extremal table is the unique one up to
/// relabeling the sample space.
///
/// Hypotheses: `D = Z`, the model reproduces the table within `tol`, and for
/// every item and outcome some user gives that outcome with probability at
/// least `1 - tol`. Under them every item must be a permutation of the
/// standard basis and every witness user the matching basis vector; both
/// conclusions are verified rather than assumed.
pub fn certify_extremal_uniqueness(table: &ProbabilityTable, model: &NNModel, tol: f64) -> Result<Certificate> {
    if model.mode() != Mode::Categorical {
        return Err(Error::ModeMismatch {
            expected: Mode::Categorical,
        });
    }
    for (want, got) in [
        (table.num_users(), model.num_users()),
        (table.num_items(), model.num_items()),
        (table.levels(), model.levels()),
    ] {
        if want != got {
            return Err(Error::DimensionMismatch {
                expected: want,
                found: got,
            });
        }
    }
    let refuse = |reason: String| Ok(Certificate::Refused { reason });
    if let Some(v) = validate_model(model, tol).first() {
        return refuse(format!("model is not valid: {v}"));
    }
    let (d, z) = (model.dim(), model.levels());
    if d != z {
        return refuse(format!("dimension {d} differs from rating levels {z}"));
    }
    if !table.is_complete() {
        return refuse("table is not complete".into());
    }
    for u in 0..model.num_users() {
        for i in 0..model.num_items() {
            let pred = model.predict_distribution(u, i)?;
            for (k, p) in pred.iter().enumerate() {
                let t = table.get(u, i, k).expect("complete table");
                if (p - t).abs() > tol {
                    return refuse("model does not reproduce table".into());
                }
            }
        }
    }

    let mut permutations = Vec::with_capacity(model.num_items());
    for i in 0..model.num_items() {
        let e = model.item_outcomes(i)?;
        let mut witnesses = Vec::with_capacity(z);
        for k in 0..z {
            match (0..model.num_users()).find(|&u| table.get(u, i, k).expect("complete table") >= 1.0 - tol) {
                Some(u) => witnesses.push(u),
                None => return refuse(format!("no user rates item {i} with outcome {k} almost surely")),
            }
        }
        for a in 0..z {
            for b in a..z {
                let g = crate::model::dot(e.outcome(a), e.outcome(b));
                let want = if a == b { 1.0 } else { 0.0 };
                if (g - want).abs() > tol {
                    return refuse(format!("outcome vectors of item {i} are not orthonormal"));
                }
            }
        }
        let mut perm = Vec::with_capacity(z);
        for k in 0..z {
            let v = e.outcome(k);
            let j = (0..d).fold(0, |best, j| if v[j] > v[best] { j } else { best });
            let basis = StateVector::basis(d, j);
            if linf(v, basis.as_slice()) > tol {
                return refuse(format!("item {i} outcome {k} is not a basis vector"));
            }
            if linf(model.users()[witnesses[k]].as_slice(), basis.as_slice()) > tol {
                return refuse(format!(
                    "witness user {} for item {i} outcome {k} is not a basis vector",
                    witnesses[k]
                ));
            }
            perm.push(j);
        }
        permutations.push(perm);
    }
    Ok(Certificate::Certified { permutations })
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// A planted extremal instance: `D = Z`, every item a random permutation of
/// the basis, users `0..D` the basis vectors and the rest random states.
#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub table: ProbabilityTable,
    pub model: NNModel,
    pub permutations: Vec<Vec<usize>>,
}

pub fn planted_extremal_instance(dim: usize, num_users: usize, num_items: usize, seed: u64) -> Result<PlantedInstance> {
    if dim == 0 || num_users < dim {
        return Err(Error::invalid(format!(
            "planted instance needs 0 < dim <= users, got dim {dim}, {num_users} users"
        )));
    }
    let mut r = rng::seeded(seed);
    let mut users: Vec<StateVector> = (0..dim).map(|j| StateVector::basis(dim, j)).collect();
    for _ in dim..num_users {
        let w: Vec<f64> = (0..dim).map(|_| r.random::<f64>() + 1e-3).collect();
        let s: f64 = w.iter().sum();
        users.push(StateVector::new_unchecked(w.iter().map(|x| x / s).collect()));
    }
    let mut permutations = Vec::with_capacity(num_items);
    let mut systems = Vec::with_capacity(num_items);
    for _ in 0..num_items {
        let mut perm: Vec<usize> = (0..dim).collect();
        perm.shuffle(&mut r);
        // outcome z is the indicator of event perm[z]
        let mut assignment = vec![0; dim];
        for (z, &j) in perm.iter().enumerate() {
            assignment[j] = z;
        }
        systems.push(OutcomeSystem::deterministic(&assignment, dim)?);
        permutations.push(perm);
    }
    let model = NNModel::new(dim, dim, users, Items::Categorical(systems))?;
    let table = table_from_model(&model)?;
    Ok(PlantedInstance {
        table,
        model,
        permutations,
    })
}

/// Complete table of the model's rating distributions.
pub fn table_from_model(model: &NNModel) -> Result<ProbabilityTable> {
    let mut entries = Vec::new();
    for u in 0..model.num_users() {
        for i in 0..model.num_items() {
            entries.extend(model.predict_distribution(u, i)?);
        }
    }
    let levels = entries.len() / (model.num_users() * model.num_items()).max(1);
    ProbabilityTable::complete(model.num_users(), model.num_items(), levels, entries)
}

/// Reparametrizes an unconstrained factorization `X^T Y` as
/// `(A^-T X)^T (A Y)`, which has the same products.
pub fn apply_gauge(x: &DMatrix<f64>, y: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let d = a.nrows();
    if a.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: a.ncols(),
        });
    }
    for m in [x, y] {
        if m.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.nrows(),
            });
        }
    }
    let sv = a.clone().singular_values();
    let (top, bottom) = (sv.max(), sv.min());
    if !(bottom > 0.0 && top / bottom < MAX_CONDITION) {
        return Err(Error::invalid("gauge matrix is numerically singular"));
    }
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::invalid("gauge matrix is numerically singular"))?;
    Ok((inv.transpose() * x, a * y))
}
