//! Random games for property checks and the `verify` subcommand.

use rand::Rng;

use crate::detection::{detection_matrix, sample_observations};
use crate::matrix::Matrix;
use crate::preferences::{build_preferences_with, ListPolicy, ProposalOrder, ProposalTable};
use crate::scenario::{rate_matrix, sample_instance, ScenarioConfig};

/// A game as both matching algorithms see it.
#[derive(Clone, Debug)]
pub struct Game {
    /// Every band, ranked.
    pub full: ProposalTable<f64>,
    /// Same ranking with non-positive proposals removed.
    pub filtered: ProposalTable<f64>,
    pub pu_active: Vec<bool>,
}

impl Game {
    fn from_parts(delta: &Matrix<f64>, eta: &Matrix<f64>, alpha: &[f64], pu_active: Vec<bool>) -> Self {
        let full = build_preferences_with(delta, eta, alpha, ProposalOrder::Detection, ListPolicy::Full);
        let filtered = full.truncated();
        Self { full, filtered, pu_active }
    }
}

/// Detection statistics, rates and weights drawn directly, on scales where
/// a good share of proposals have non-positive utility.
pub fn synthetic_game(rng: &mut impl Rng, num_sus: usize, num_pus: usize) -> Game {
    let delta = Matrix::from_fn(num_sus, num_pus, |_, _| rng.random_range(-4.0..4.0));
    let eta = Matrix::from_fn(num_sus, num_pus, |_, _| rng.random_range(0.0..6.0));
    let alpha: Vec<f64> = (0..num_sus).map(|_| rng.random_range(0.0..=1.0)).collect();
    let pu_active = (0..num_pus).map(|_| rng.random_bool(0.3)).collect();
    Game::from_parts(&delta, &eta, &alpha, pu_active)
}

/// A game produced by the full sensing pipeline with randomized activity,
/// weights and noise level.
pub fn simulated_game(rng: &mut impl Rng, num_sus: usize, num_pus: usize) -> Game {
    let mut cfg = ScenarioConfig::<f64>::new(num_sus, num_pus);
    cfg.pu_active = (0..num_pus).map(|_| rng.random_bool(0.3)).collect();
    cfg.alpha = (0..num_sus).map(|_| rng.random_range(0.0..=1.0)).collect();
    cfg.noise_dbm = rng.random_range(-90.0..-20.0);
    let inst = sample_instance(&cfg, rng.random());
    let obs = sample_observations(&cfg, &inst, rng.random());
    let delta = detection_matrix(&cfg, &inst, &obs).expect("default priors are valid");
    let eta = rate_matrix(&cfg, &inst);
    Game::from_parts(delta.matrix(), &eta, &cfg.alphas(), inst.pu_active)
}

/// Alternates between the two generators.
pub fn random_game(rng: &mut impl Rng, num_sus: usize, num_pus: usize) -> Game {
    if rng.random_bool(0.5) {
        synthetic_game(rng, num_sus, num_pus)
    } else {
        simulated_game(rng, num_sus, num_pus)
    }
}
