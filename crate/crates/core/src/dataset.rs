//! Rating data and probability tables.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::model::SIMPLEX_TOL;

/// One observed rating with dense 0-based indices; `value` is in `1..=Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rating {
    pub user: usize,
    pub item: usize,
    pub value: u8,
}

/// Sparse ratings partitioned into a training set `M` and a test set `T`.
///
/// `train` and `test` hold indices into `ratings`; they are sorted, disjoint
/// and together cover every stored rating.
#[derive(Clone, Debug, PartialEq)]
pub struct RatingDataset {
    num_users: usize,
    num_items: usize,
    levels: usize,
    ratings: Vec<Rating>,
    train: Vec<usize>,
    test: Vec<usize>,
}

impl RatingDataset {
    /// Builds an unsplit dataset (every rating in the training set).
    pub fn new(num_users: usize, num_items: usize, levels: usize, ratings: Vec<Rating>) -> Result<Self> {
        if levels == 0 || levels > u8::MAX as usize {
            return Err(Error::invalid(format!("rating levels must be in 1..=255, got {levels}")));
        }
        let mut seen = HashSet::with_capacity(ratings.len());
        for r in &ratings {
            if r.user >= num_users {
                return Err(Error::IndexOutOfRange {
                    kind: "user",
                    index: r.user,
                    len: num_users,
                });
            }
            if r.item >= num_items {
                return Err(Error::IndexOutOfRange {
                    kind: "item",
                    index: r.item,
                    len: num_items,
                });
            }
            if r.value == 0 || r.value as usize > levels {
                return Err(Error::invalid(format!(
                    "rating {} outside [1, {levels}] for user {} item {}",
                    r.value, r.user, r.item
                )));
            }
            if !seen.insert((r.user, r.item)) {
                return Err(Error::invalid(format!(
                    "duplicate rating for user {} item {}",
                    r.user, r.item
                )));
            }
        }
        let train = (0..ratings.len()).collect();
        Ok(RatingDataset {
            num_users,
            num_items,
            levels,
            ratings,
            train,
            test: Vec::new(),
        })
    }

    /// Moves the ratings at the given indices into the test set.
    pub fn with_test_set(mut self, mut test: Vec<usize>) -> Result<Self> {
        test.sort_unstable();
        test.dedup();
        if let Some(&last) = test.last() {
            if last >= self.ratings.len() {
                return Err(Error::IndexOutOfRange {
                    kind: "rating",
                    index: last,
                    len: self.ratings.len(),
                });
            }
        }
        let mut in_test = vec![false; self.ratings.len()];
        for &t in &test {
            in_test[t] = true;
        }
        self.train = (0..self.ratings.len()).filter(|&k| !in_test[k]).collect();
        self.test = test;
        Ok(self)
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn ratings(&self) -> &[Rating] {
        &self.ratings
    }

    pub fn train_indices(&self) -> &[usize] {
        &self.train
    }

    pub fn test_indices(&self) -> &[usize] {
        &self.test
    }

    pub fn train_ratings(&self) -> impl Iterator<Item = &Rating> + '_ {
        self.train.iter().map(|&k| &self.ratings[k])
    }

    pub fn test_ratings(&self) -> impl Iterator<Item = &Rating> + '_ {
        self.test.iter().map(|&k| &self.ratings[k])
    }

    /// Number of training ratings per item.
    pub fn item_popularity(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_items];
        for r in self.train_ratings() {
            counts[r.item] += 1;
        }
        counts
    }

    /// Items each user rated in either the training or the test set, sorted.
    pub fn items_rated_by_user(&self) -> Vec<Vec<usize>> {
        let mut rated = vec![Vec::new(); self.num_users];
        for r in &self.ratings {
            rated[r.user].push(r.item);
        }
        for v in &mut rated {
            v.sort_unstable();
        }
        rated
    }
}

/// Probabilities `P_u[E_i = z]` on a known subset of `(u, i, z)` triples.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTable {
    users: usize,
    items: usize,
    levels: usize,
    entries: Vec<f64>,
    known: Vec<bool>,
}

impl ProbabilityTable {
    /// A table with every entry known. `entries` is laid out as
    /// `[(u * items + i) * levels + z]`.
    pub fn complete(users: usize, items: usize, levels: usize, entries: Vec<f64>) -> Result<Self> {
        let known = vec![true; entries.len()];
        Self::with_mask(users, items, levels, entries, known)
    }

    pub fn with_mask(
        users: usize,
        items: usize,
        levels: usize,
        entries: Vec<f64>,
        known: Vec<bool>,
    ) -> Result<Self> {
        let n = users * items * levels;
        if entries.len() != n || known.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: entries.len().min(known.len()),
            });
        }
        let table = ProbabilityTable {
            users,
            items,
            levels,
            entries,
            known,
        };
        for (k, (&v, &known)) in table.entries.iter().zip(&table.known).enumerate() {
            if known && !(-SIMPLEX_TOL..=1.0 + SIMPLEX_TOL).contains(&v) {
                return Err(Error::invalid(format!(
                    "probability entry {k} = {v} outside [0,1]"
                )));
            }
        }
        for u in 0..users {
            for i in 0..items {
                let base = (u * items + i) * levels;
                if table.known[base..base + levels].iter().all(|&k| k) {
                    let s: f64 = table.entries[base..base + levels].iter().sum();
                    if (s - 1.0).abs() > SIMPLEX_TOL {
                        return Err(Error::invalid(format!(
                            "probabilities for user {u} item {i} sum to {s}"
                        )));
                    }
                }
            }
        }
        Ok(table)
    }

    pub fn num_users(&self) -> usize {
        self.users
    }

    pub fn num_items(&self) -> usize {
        self.items
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    fn index(&self, u: usize, i: usize, z: usize) -> usize {
        (u * self.items + i) * self.levels + z
    }

    /// The entry if it is known.
    pub fn get(&self, u: usize, i: usize, z: usize) -> Option<f64> {
        let k = self.index(u, i, z);
        self.known[k].then(|| self.entries[k])
    }

    /// Row `(u, i)` over all outcomes, unknown entries as `None`.
    pub fn row(&self, u: usize, i: usize) -> Vec<Option<f64>> {
        (0..self.levels).map(|z| self.get(u, i, z)).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.known.iter().all(|&k| k)
    }
}
