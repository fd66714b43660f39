//! Top-N evaluation by negative sampling.
//!
//! Every held-out top rating `(u, i)` is ranked against items `u` never
//! rated; a case is a hit at `N` when `i` lands in the first `N` places.
//! Recall at `N` is the hit rate over cases and precision at `N` is
//! recall divided by `N`.

use std::fmt::Write as _;

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{Rating, RatingDataset};
use crate::error::{Error, Result};
use crate::model::{dot, Items, NNModel};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    AllItems,
    /// Test ratings of the most popular items are dropped.
    LongTail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalConfig {
    pub n_sampled_unrated: usize,
    pub max_n: usize,
    pub test_fraction: f64,
    pub longtail_head_fraction: f64,
    pub seed: u64,
    pub mode: EvalMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            n_sampled_unrated: 1000,
            max_n: 20,
            test_fraction: 0.014,
            longtail_head_fraction: 0.06,
            seed: 0,
            mode: EvalMode::AllItems,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "test fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if !(0.0..1.0).contains(&self.longtail_head_fraction) {
            return Err(Error::invalid(format!(
                "head fraction must lie in [0, 1), got {}",
                self.longtail_head_fraction
            )));
        }
        if self.max_n == 0 {
            return Err(Error::invalid("max N must be positive"));
        }
        Ok(())
    }
}

/// Ranks items for a user. Higher scores rank first.
pub trait Scorer: Sync {
    fn name(&self) -> &str;

    fn score(&self, user: usize, item: usize) -> f64;

    /// Prediction on the rating scale, if the scorer has one.
    fn predict_rating(&self, _user: usize, _item: usize) -> Option<f64> {
        None
    }

    /// Checks that the scorer covers the dataset.
    fn check(&self, _num_users: usize, _num_items: usize) -> Result<()> {
        Ok(())
    }
}

impl Scorer for NNModel {
    fn name(&self) -> &str {
        "nnm"
    }

    /// Like-probability (binary) or expected rating (categorical).
    fn score(&self, user: usize, item: usize) -> f64 {
        let p = self.users()[user].as_slice();
        match self.items() {
            Items::Binary(fs) => dot(p, fs[item].as_slice()),
            Items::Categorical(es) => (0..self.levels())
                .map(|z| (z + 1) as f64 * dot(p, es[item].outcome(z)))
                .sum(),
        }
    }

    fn predict_rating(&self, user: usize, item: usize) -> Option<f64> {
        NNModel::predict_rating(self, user, item).ok()
    }

    fn check(&self, num_users: usize, num_items: usize) -> Result<()> {
        if self.num_users() != num_users {
            return Err(Error::DimensionMismatch {
                expected: num_users,
                found: self.num_users(),
            });
        }
        if self.num_items() != num_items {
            return Err(Error::DimensionMismatch {
                expected: num_items,
                found: self.num_items(),
            });
        }
        Ok(())
    }
}

/// Non-personalized baseline: number of training ratings of the item.
#[derive(Clone, Debug)]
pub struct TopPop {
    counts: Vec<usize>,
}

pub fn toppop_scores(dataset: &RatingDataset) -> TopPop {
    TopPop {
        counts: dataset.item_popularity(),
    }
}

impl Scorer for TopPop {
    fn name(&self) -> &str {
        "toppop"
    }

    fn score(&self, _user: usize, item: usize) -> f64 {
        self.counts[item] as f64
    }

    fn check(&self, _num_users: usize, num_items: usize) -> Result<()> {
        if self.counts.len() == num_items {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: num_items,
                found: self.counts.len(),
            })
        }
    }
}

/// Uniform scores hashed from `(seed, user, item)`.
#[derive(Clone, Copy, Debug)]
pub struct RandomScores {
    seed: u64,
}

pub fn random_scores(seed: u64) -> RandomScores {
    RandomScores { seed }
}

impl Scorer for RandomScores {
    fn name(&self) -> &str {
        "random"
    }

    fn score(&self, user: usize, item: usize) -> f64 {
        rng::unit_hash(self.seed, user as u64, item as u64)
    }
}

/// Arbitrary scoring function.
pub struct FnScorer<F>(pub F);

impl<F: Fn(usize, usize) -> f64 + Sync> Scorer for FnScorer<F> {
    fn name(&self) -> &str {
        "custom"
    }

    fn score(&self, user: usize, item: usize) -> f64 {
        (self.0)(user, item)
    }
}

/// Holds out `floor(fraction * total)` ratings chosen uniformly without
/// replacement.
pub fn split_dataset(dataset: RatingDataset, test_fraction: f64, seed: u64) -> Result<RatingDataset> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let total = dataset.ratings().len();
    if total == 0 {
        return Err(Error::NoRatings);
    }
    // the epsilon keeps exact products like 0.014 * 1000 from rounding down
    let n_test = (test_fraction * total as f64 + 1e-9).floor() as usize;
    if n_test == 0 {
        return Err(Error::TestSetEmpty);
    }
    let mut r = rng::seeded(seed);
    let mut test = index::sample(&mut r, total, n_test).into_vec();
    test.sort_unstable();
    dataset.with_test_set(test)
}

/// The `ceil(fraction * I)` items with the most training ratings, ties
/// going to the lower index.
pub fn head_items(popularity: &[usize], head_fraction: f64) -> Vec<usize> {
    let n = (head_fraction * popularity.len() as f64 - 1e-9).ceil().max(0.0) as usize;
    let mut order: Vec<usize> = (0..popularity.len()).collect();
    order.sort_by(|&a, &b| popularity[b].cmp(&popularity[a]).then(a.cmp(&b)));
    order.truncate(n.min(popularity.len()));
    order
}

/// Number of head items and the share of all ratings they receive.
pub fn head_coverage(popularity: &[usize], head_fraction: f64) -> (usize, f64) {
    let head = head_items(popularity, head_fraction);
    let total: usize = popularity.iter().sum();
    let covered: usize = head.iter().map(|&i| popularity[i]).sum();
    let share = if total == 0 { 0.0 } else { covered as f64 / total as f64 };
    (head.len(), share)
}

/// Test rating indices whose item is outside the popularity head
/// (popularity from training ratings only).
pub fn longtail_test_filter(dataset: &RatingDataset, head_fraction: f64) -> Vec<usize> {
    let head = head_items(&dataset.item_popularity(), head_fraction);
    let mut in_head = vec![false; dataset.num_items()];
    for i in head {
        in_head[i] = true;
    }
    let kept: Vec<usize> = dataset
        .test_indices()
        .iter()
        .copied()
        .filter(|&k| !in_head[dataset.ratings()[k].item])
        .collect();
    if kept.is_empty() && !dataset.test_indices().is_empty() {
        log::warn!("every test rating falls on a head item; long-tail test set is empty");
    }
    kept
}

/// Outcome of one test case.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseResult {
    pub user: usize,
    pub item: usize,
    /// 1-based position of the test item among itself and the sampled items.
    pub rank: usize,
    pub candidates: usize,
    /// Fewer unrated items than requested were available.
    pub short: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub scorer: String,
    pub config: EvalConfig,
    /// `recall[n - 1]` is recall at `n`, for `n = 1..=max_n`.
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
    /// Hits at `max_n`.
    pub hits: usize,
    pub eligible_test_cases: usize,
    /// Test ratings below the top level, which are not ranked.
    pub skipped_submaximal: usize,
    pub short_cases: usize,
    pub cases: Vec<CaseResult>,
    pub rmse: Option<f64>,
    pub mae: Option<f64>,
}

#[derive(Serialize)]
struct CurvePoint {
    n: usize,
    recall: f64,
    precision: f64,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    scorer: &'a str,
    config: &'a EvalConfig,
    eligible_test_cases: usize,
    skipped_submaximal: usize,
    short_cases: usize,
    hits: usize,
    rmse: Option<f64>,
    mae: Option<f64>,
    curve: Vec<CurvePoint>,
}

impl EvalReport {
    /// Recall at any cutoff, including ones above `max_n`.
    pub fn recall_at(&self, n: usize) -> f64 {
        if self.eligible_test_cases == 0 {
            return 0.0;
        }
        let hits = self.cases.iter().filter(|c| c.rank <= n).count();
        hits as f64 / self.eligible_test_cases as f64
    }

    pub fn to_json(&self) -> String {
        let doc = ReportJson {
            scorer: &self.scorer,
            config: &self.config,
            eligible_test_cases: self.eligible_test_cases,
            skipped_submaximal: self.skipped_submaximal,
            short_cases: self.short_cases,
            hits: self.hits,
            rmse: self.rmse,
            mae: self.mae,
            curve: (0..self.recall.len())
                .map(|k| CurvePoint {
                    n: k + 1,
                    recall: self.recall[k],
                    precision: self.precision[k],
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    /// `N,recall,precision` rows for `N = 1..=max_n`.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("N,recall,precision\n");
        for k in 0..self.recall.len() {
            writeln!(out, "{},{},{}", k + 1, self.recall[k], self.precision[k]).unwrap();
        }
        out
    }

    /// `user,item,rank,hit` per case, hit meaning rank <= max_n.
    pub fn cases_csv(&self) -> String {
        let mut out = String::from("user,item,rank,hit\n");
        for c in &self.cases {
            let hit = u8::from(c.rank <= self.config.max_n);
            writeln!(out, "{},{},{},{hit}", c.user, c.item, c.rank).unwrap();
        }
        out
    }
}

fn rank_case<S: Scorer + ?Sized>(
    scorer: &S,
    rating: &Rating,
    rated: &[usize],
    num_items: usize,
    config: &EvalConfig,
) -> CaseResult {
    let (u, i) = (rating.user, rating.item);
    let mut unrated = Vec::with_capacity(num_items - rated.len());
    let mut next = rated.iter().peekable();
    for j in 0..num_items {
        if next.peek() == Some(&&j) {
            next.next();
        } else {
            unrated.push(j);
        }
    }
    let short = unrated.len() < config.n_sampled_unrated;
    let sampled: Vec<usize> = if short {
        unrated
    } else {
        let mut r = rng::seeded(rng::derive_seed_pair(config.seed, u as u64, i as u64));
        index::sample(&mut r, unrated.len(), config.n_sampled_unrated)
            .into_iter()
            .map(|k| unrated[k])
            .collect()
    };
    let target = scorer.score(u, i);
    let ahead = sampled
        .iter()
        .filter(|&&j| {
            let s = scorer.score(u, j);
            s > target || (s == target && j < i)
        })
        .count();
    CaseResult {
        user: u,
        item: i,
        rank: ahead + 1,
        candidates: sampled.len() + 1,
        short,
    }
}

/// Runs the top-N protocol on the dataset's test set (reduced to the long
/// tail in [`EvalMode::LongTail`]). Only test ratings at the top level are
/// ranked; negatives are items the user rated neither in training nor in
/// test.
pub fn evaluate_topn<S: Scorer + ?Sized>(scorer: &S, dataset: &RatingDataset, config: &EvalConfig) -> Result<EvalReport> {
    config.validate()?;
    scorer.check(dataset.num_users(), dataset.num_items())?;
    if dataset.test_indices().is_empty() {
        return Err(Error::TestSetEmpty);
    }
    let test: Vec<usize> = match config.mode {
        EvalMode::AllItems => dataset.test_indices().to_vec(),
        EvalMode::LongTail => longtail_test_filter(dataset, config.longtail_head_fraction),
    };
    let top = dataset.levels();
    let eligible: Vec<&Rating> = test
        .iter()
        .map(|&k| &dataset.ratings()[k])
        .filter(|r| r.value as usize == top)
        .collect();
    let skipped_submaximal = test.len() - eligible.len();
    let rated = dataset.items_rated_by_user();

    let cases: Vec<CaseResult> = eligible
        .par_iter()
        .map(|r| rank_case(scorer, r, &rated[r.user], dataset.num_items(), config))
        .collect();
    let short_cases = cases.iter().filter(|c| c.short).count();
    if short_cases > 0 {
        log::warn!("{short_cases} test cases had fewer than {} unrated items", config.n_sampled_unrated);
    }

    let n_cases = cases.len();
    let mut hits_at = vec![0usize; config.max_n];
    for c in &cases {
        if c.rank <= config.max_n {
            hits_at[c.rank - 1] += 1;
        }
    }
    let mut recall = Vec::with_capacity(config.max_n);
    let mut cumulative = 0;
    for h in &hits_at {
        cumulative += h;
        recall.push(if n_cases == 0 { 0.0 } else { cumulative as f64 / n_cases as f64 });
    }
    let precision = recall.iter().enumerate().map(|(k, r)| r / (k + 1) as f64).collect();

    let test_ratings: Vec<&Rating> = test.iter().map(|&k| &dataset.ratings()[k]).collect();
    let (rmse, mae) = match test_ratings.first().and_then(|r| scorer.predict_rating(r.user, r.item)) {
        Some(_) => {
            let preds: Vec<(f64, f64)> = test_ratings
                .iter()
                .map(|r| (r.value as f64, scorer.predict_rating(r.user, r.item).unwrap_or(f64::NAN)))
                .collect();
            let (rmse, mae) = rmse_mae(&preds)?;
            (Some(rmse), Some(mae))
        }
        None => (None, None),
    };

    Ok(EvalReport {
        scorer: scorer.name().to_string(),
        config: config.clone(),
        recall,
        precision,
        hits: cumulative,
        eligible_test_cases: n_cases,
        skipped_submaximal,
        short_cases,
        cases,
        rmse,
        mae,
    })
}

/// Root mean squared and mean absolute error over `(rating, prediction)`
/// pairs.
pub fn rmse_mae(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pairs.is_empty() {
        return Err(Error::TestSetEmpty);
    }
    if pairs.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(Error::NonFinite("prediction"));
    }
    let n = pairs.len() as f64;
    let sq: f64 = pairs.iter().map(|(r, p)| (r - p) * (r - p)).sum();
    let abs: f64 = pairs.iter().map(|(r, p)| (r - p).abs()).sum();
    Ok(((sq / n).sqrt(), abs / n))
}
