//! Alternating constrained least squares for binary-mode models.
//!
//! Users start at random canonical basis vectors. Every unobserved
//! `(user, item)` pair is treated as a rating of zero, observed ratings as
//! the like-probability `R/Z`. Each sweep first refits every item's like
//! vector on the unit box with users fixed, then every user's state on the
//! simplex with items fixed.
//!
//! Because zero-filling makes every item subproblem involve all users, the
//! item step shares one Gram matrix `P'P` across items; the linear term
//! `sum_u t_ui p_u` only needs the observed ratings. The user step mirrors
//! this with `F'F`. The dense `U x I` target matrix is never built.

mod lsq;
mod projection;

use std::fmt;

use rand::Rng as _;
use rayon::prelude::*;

use crate::dataset::RatingDataset;
use crate::error::{Error, Result};
use crate::model::{dot, Items, LikeVector, Mode, NNModel, StateVector};
use crate::rng;

pub use lsq::{solve_constrained_ls, Constraint, Gram, GramSystem, LsSolution};
pub use projection::{project_box, project_simplex};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub max_sweeps: usize,
    pub subproblem_max_iters: usize,
    /// Projected-gradient stationarity tolerance for each subproblem.
    pub subproblem_tol: f64,
    pub seed: u64,
    /// Emit one `log::info!` line per half-sweep.
    pub objective_log: bool,
    /// Stop early once a full sweep improves the objective by less than this
    /// relative amount. `None` always runs `max_sweeps`.
    pub early_stop: Option<f64>,
}

impl TrainConfig {
    pub fn new(dim: usize) -> Self {
        TrainConfig {
            dim,
            max_sweeps: 10,
            subproblem_max_iters: 200,
            subproblem_tol: 1e-8,
            seed: 0,
            objective_log: false,
            early_stop: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sweeps(mut self, sweeps: usize) -> Self {
        self.max_sweeps = sweeps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if self.max_sweeps < 1 {
            return Err(Error::invalid("max_sweeps must be at least 1"));
        }
        if self.subproblem_max_iters < 1 {
            return Err(Error::invalid("subproblem_max_iters must be at least 1"));
        }
        if !(self.subproblem_tol >= 0.0) {
            return Err(Error::invalid("subproblem_tol must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfSweep {
    Item,
    User,
}

impl fmt::Display for HalfSweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HalfSweep::Item => "item",
            HalfSweep::User => "user",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry {
    pub sweep: usize,
    pub half: HalfSweep,
    pub objective: f64,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sweep={} half={} objective={}",
            self.sweep, self.half, self.objective
        )
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub model: NNModel,
    /// Objective at the initial point (basis-vector users, zero like vectors).
    pub initial_objective: f64,
    /// Objective after every half-sweep, in order.
    pub trace: Vec<TraceEntry>,
}

impl TrainOutput {
    pub fn final_objective(&self) -> f64 {
        self.trace.last().map_or(self.initial_objective, |e| e.objective)
    }
}

/// Random canonical basis states, one per user.
pub fn init_states(num_users: usize, dim: usize, seed: u64) -> Vec<StateVector> {
    let mut rng = rng::seeded(seed);
    (0..num_users)
        .map(|_| StateVector::basis(dim, rng.random_range(0..dim)))
        .collect()
}

/// Observed training targets `R/Z`, grouped both by item and by user.
struct Targets {
    by_item: Vec<Vec<(usize, f64)>>,
    by_user: Vec<Vec<(usize, f64)>>,
    sum_sq: f64,
}

impl Targets {
    fn new(dataset: &RatingDataset) -> Self {
        let z = dataset.levels() as f64;
        let mut by_item = vec![Vec::new(); dataset.num_items()];
        let mut by_user = vec![Vec::new(); dataset.num_users()];
        let mut sum_sq = 0.0;
        for r in dataset.train_ratings() {
            let t = f64::from(r.value) / z;
            by_item[r.item].push((r.user, t));
            by_user[r.user].push((r.item, t));
            sum_sq += t * t;
        }
        Targets {
            by_item,
            by_user,
            sum_sq,
        }
    }

    /// `sum_{u,i} (p_u . f_i - t_ui)^2` through the Grams:
    /// `<P'P, F'F> - 2 sum_M t p.f + sum_M t^2`.
    fn objective(&self, dim: usize, gp: &Gram, gf: &Gram, p: &[f64], f: &[f64]) -> f64 {
        let quad: f64 = gp
            .as_slice()
            .iter()
            .zip(gf.as_slice())
            .map(|(a, b)| a * b)
            .sum();
        let mut cross = 0.0;
        for (i, row) in self.by_item.iter().enumerate() {
            let fi = &f[i * dim..(i + 1) * dim];
            for &(u, t) in row {
                cross += t * dot(&p[u * dim..(u + 1) * dim], fi);
            }
        }
        (quad - 2.0 * cross + self.sum_sq).max(0.0)
    }
}

fn half_step(
    gram: &Gram,
    fixed: &[f64],
    current: &[f64],
    groups: &[Vec<(usize, f64)>],
    constraint: Constraint,
    config: &TrainConfig,
) -> Result<Vec<f64>> {
    let dim = config.dim;
    let solved: Vec<Vec<f64>> = groups
        .par_iter()
        .enumerate()
        .map(|(k, obs)| {
            let mut linear = vec![0.0; dim];
            for &(other, t) in obs {
                let row = &fixed[other * dim..(other + 1) * dim];
                for (c, v) in linear.iter_mut().zip(row) {
                    *c += t * v;
                }
            }
            let system = GramSystem {
                gram,
                linear,
                constant: 0.0,
            };
            let x0 = &current[k * dim..(k + 1) * dim];
            solve_constrained_ls(
                &system,
                x0,
                constraint,
                config.subproblem_tol,
                config.subproblem_max_iters,
            )
            .map(|s| s.x)
        })
        .collect::<Result<_>>()?;
    Ok(solved.concat())
}

/// Fits a binary-mode model with alternating constrained least squares.
pub fn train(dataset: &RatingDataset, config: &TrainConfig) -> Result<TrainOutput> {
    config.validate()?;
    if dataset.train_indices().is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let dim = config.dim;
    let targets = Targets::new(dataset);

    let mut p: Vec<f64> = init_states(dataset.num_users(), dim, config.seed)
        .into_iter()
        .flat_map(StateVector::into_inner)
        .collect();
    let mut f = vec![0.0; dataset.num_items() * dim];

    let mut gp = Gram::from_factor_rows(dim, &p);
    let mut gf = Gram::from_factor_rows(dim, &f);
    let initial_objective = targets.objective(dim, &gp, &gf, &p, &f);
    let mut trace = Vec::with_capacity(2 * config.max_sweeps);
    let mut last_full = initial_objective;

    for sweep in 1..=config.max_sweeps {
        f = half_step(&gp, &p, &f, &targets.by_item, Constraint::Box, config)?;
        gf = Gram::from_factor_rows(dim, &f);
        record(&mut trace, config, sweep, HalfSweep::Item, targets.objective(dim, &gp, &gf, &p, &f));

        p = half_step(&gf, &f, &p, &targets.by_user, Constraint::Simplex, config)?;
        gp = Gram::from_factor_rows(dim, &p);
        let objective = targets.objective(dim, &gp, &gf, &p, &f);
        record(&mut trace, config, sweep, HalfSweep::User, objective);

        if let Some(rel) = config.early_stop {
            let improvement = (last_full - objective) / last_full.max(f64::MIN_POSITIVE);
            if improvement < rel {
                break;
            }
        }
        last_full = objective;
    }

    let users = p
        .chunks_exact(dim)
        .map(|row| StateVector::new_unchecked(row.to_vec()))
        .collect();
    let items = f
        .chunks_exact(dim)
        .map(|row| LikeVector::new_unchecked(row.to_vec()))
        .collect();
    let model = NNModel::new(dim, dataset.levels(), users, Items::Binary(items))?;
    Ok(TrainOutput {
        model,
        initial_objective,
        trace,
    })
}

fn record(trace: &mut Vec<TraceEntry>, config: &TrainConfig, sweep: usize, half: HalfSweep, objective: f64) {
    let entry = TraceEntry {
        sweep,
        half,
        objective,
    };
    if config.objective_log {
        log::info!("{entry}");
    }
    trace.push(entry);
}

/// Zero-filled squared error of a binary model over all `U x I` pairs.
pub fn training_objective(model: &NNModel, dataset: &RatingDataset) -> Result<f64> {
    if model.mode() != Mode::Binary {
        return Err(Error::ModeMismatch {
            expected: Mode::Binary,
        });
    }
    if model.num_users() != dataset.num_users() {
        return Err(Error::DimensionMismatch {
            expected: dataset.num_users(),
            found: model.num_users(),
        });
    }
    if model.num_items() != dataset.num_items() {
        return Err(Error::DimensionMismatch {
            expected: dataset.num_items(),
            found: model.num_items(),
        });
    }
    let Items::Binary(fs) = model.items() else {
        unreachable!()
    };
    let dim = model.dim();
    let p: Vec<f64> = model.users().iter().flat_map(|s| s.as_slice().to_vec()).collect();
    let f: Vec<f64> = fs.iter().flat_map(|s| s.as_slice().to_vec()).collect();
    let targets = Targets::new(dataset);
    let gp = Gram::from_factor_rows(dim, &p);
    let gf = Gram::from_factor_rows(dim, &f);
    Ok(targets.objective(dim, &gp, &gf, &p, &f))
}
