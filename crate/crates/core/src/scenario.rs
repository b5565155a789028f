//! Network geometry, channel gains and achievable rates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::{Error, Result, Scalar};

/// Prior row used when none is configured. Bands beyond the fourth cycle
/// through it again.
pub const DEFAULT_PRIOR_ROW: [f64; 4] = [0.1, 0.2, 0.3, 0.4];

const SU_STREAM: u64 = 1;
const PU_STREAM: u64 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig<T> {
    pub num_sus: usize,
    pub num_pus: usize,
    /// Side of the square deployment area, meters.
    pub area_side: T,
    pub su_tx_power_dbm: T,
    pub pu_tx_power_dbm: T,
    pub noise_dbm: T,
    pub path_loss_exponent: T,
    pub path_loss_constant: T,
    /// Radius of the disk around each SU transmitter its receiver is drawn from.
    pub link_radius: T,
    /// Interval the per-band coefficients of both the sensing and the data
    /// channel are drawn from.
    pub beta_range: (T, T),
    /// Empty: cycle [`DEFAULT_PRIOR_ROW`]. One row: shared by every SU.
    /// Otherwise one row per SU. Rows have one entry per band.
    pub priors: Vec<Vec<T>>,
    /// One weight shared by every SU, or one per SU.
    pub alpha: Vec<T>,
    /// Empty means every PU is inactive.
    pub pu_active: Vec<bool>,
    #[serde(alias = "base_seed")]
    pub rng_seed: u64,
}

impl<T: Scalar> Default for ScenarioConfig<T> {
    fn default() -> Self {
        Self::new(10, 4)
    }
}

impl<T: Scalar> ScenarioConfig<T> {
    /// Default deployment with `num_sus` SU pairs and `num_pus` bands.
    pub fn new(num_sus: usize, num_pus: usize) -> Self {
        Self {
            num_sus,
            num_pus,
            area_side: T::lit(100.0),
            su_tx_power_dbm: T::lit(13.0),
            pu_tx_power_dbm: T::lit(17.0),
            noise_dbm: T::lit(-90.0),
            path_loss_exponent: T::lit(3.0),
            path_loss_constant: T::one(),
            link_radius: T::lit(10.0),
            beta_range: (T::lit(0.5), T::lit(1.5)),
            priors: Vec::new(),
            alpha: vec![T::lit(0.5)],
            pu_active: Vec::new(),
            rng_seed: 0,
        }
    }

    pub fn with_size(mut self, num_sus: usize, num_pus: usize) -> Self {
        self.num_sus = num_sus;
        self.num_pus = num_pus;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.num_sus == 0 || self.num_pus == 0 {
            return bad(format!(
                "need at least one SU and one PU, got M = {}, N = {}",
                self.num_sus, self.num_pus
            ));
        }
        let finite = [
            ("area_side", self.area_side),
            ("su_tx_power_dbm", self.su_tx_power_dbm),
            ("pu_tx_power_dbm", self.pu_tx_power_dbm),
            ("noise_dbm", self.noise_dbm),
            ("path_loss_exponent", self.path_loss_exponent),
            ("path_loss_constant", self.path_loss_constant),
            ("link_radius", self.link_radius),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return bad(format!("{name} must be finite, got {value}"));
            }
        }
        for (name, value) in [
            ("area_side", self.area_side),
            ("link_radius", self.link_radius),
            ("path_loss_constant", self.path_loss_constant),
            ("path_loss_exponent", self.path_loss_exponent),
        ] {
            if value < T::zero() {
                return bad(format!("{name} must be non-negative, got {value}"));
            }
        }
        let (lo, hi) = self.beta_range;
        if !(lo > T::zero() && lo <= hi && hi.is_finite()) {
            return bad(format!("beta_range must satisfy 0 < lo <= hi, got ({lo}, {hi})"));
        }
        if !self.priors.is_empty() {
            if self.priors.len() != 1 && self.priors.len() != self.num_sus {
                return bad(format!(
                    "priors must have 1 or {} rows, got {}",
                    self.num_sus,
                    self.priors.len()
                ));
            }
            for row in &self.priors {
                if row.len() != self.num_pus {
                    return bad(format!(
                        "prior rows must have {} entries, got {}",
                        self.num_pus,
                        row.len()
                    ));
                }
                if let Some(p) = row.iter().find(|p| !(**p > T::zero() && **p < T::one())) {
                    return Err(Error::InvalidPrior(p.as_f64()));
                }
            }
        }
        if self.alpha.len() != 1 && self.alpha.len() != self.num_sus {
            return bad(format!(
                "alpha must have 1 or {} entries, got {}",
                self.num_sus,
                self.alpha.len()
            ));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a >= T::zero() && **a <= T::one())) {
            return bad(format!("alpha must lie in [0, 1], got {a}"));
        }
        if !self.pu_active.is_empty() && self.pu_active.len() != self.num_pus {
            return bad(format!(
                "pu_active must have {} entries, got {}",
                self.num_pus,
                self.pu_active.len()
            ));
        }
        Ok(())
    }

    /// Probability, as seen by SU `m`, that PU `n` is active.
    pub fn prior(&self, m: usize, n: usize) -> T {
        match self.priors.len() {
            0 => T::lit(DEFAULT_PRIOR_ROW[n % DEFAULT_PRIOR_ROW.len()]),
            1 => self.priors[0][n],
            _ => self.priors[m][n],
        }
    }

    pub fn alpha(&self, m: usize) -> T {
        if self.alpha.len() == 1 {
            self.alpha[0]
        } else {
            self.alpha[m]
        }
    }

    pub fn alphas(&self) -> Vec<T> {
        (0..self.num_sus).map(|m| self.alpha(m)).collect()
    }

    pub fn is_pu_active(&self, n: usize) -> bool {
        self.pu_active.get(n).copied().unwrap_or(false)
    }

    pub fn su_power_mw(&self) -> T {
        dbm_to_linear(self.su_tx_power_dbm)
    }

    pub fn pu_power_mw(&self) -> T {
        dbm_to_linear(self.pu_tx_power_dbm)
    }

    pub fn noise_mw(&self) -> T {
        dbm_to_linear(self.noise_dbm)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One sampled deployment. Distances are in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkInstance<T> {
    pub su_tx_pos: Vec<Point<T>>,
    pub su_rx_pos: Vec<Point<T>>,
    pub pu_tx_pos: Vec<Point<T>>,
    /// Sensing-channel coefficient per band.
    pub beta: Vec<T>,
    /// Data-channel coefficient per band.
    pub beta_prime: Vec<T>,
    /// SU transmitter `m` to PU transmitter `n`.
    pub d_su_pu: Matrix<T>,
    /// SU transmitter `m` to its own receiver.
    pub d_su_link: Vec<T>,
    /// Entry `(i, m)`: SU transmitter `i` to SU receiver `m`.
    pub d_su_su: Matrix<T>,
    pub pu_active: Vec<bool>,
}

impl<T: Scalar> NetworkInstance<T> {
    pub fn num_sus(&self) -> usize {
        self.su_tx_pos.len()
    }

    pub fn num_pus(&self) -> usize {
        self.pu_tx_pos.len()
    }

    /// Rebuilds every distance table from the stored positions.
    pub fn from_positions(
        su_tx_pos: Vec<Point<T>>,
        su_rx_pos: Vec<Point<T>>,
        pu_tx_pos: Vec<Point<T>>,
        beta: Vec<T>,
        beta_prime: Vec<T>,
        pu_active: Vec<bool>,
    ) -> Self {
        let m = su_tx_pos.len();
        let n = pu_tx_pos.len();
        let d_su_pu = Matrix::from_fn(m, n, |i, j| su_tx_pos[i].distance(&pu_tx_pos[j]));
        let d_su_su = Matrix::from_fn(m, m, |i, j| su_tx_pos[i].distance(&su_rx_pos[j]));
        let d_su_link = (0..m).map(|i| su_tx_pos[i].distance(&su_rx_pos[i])).collect();
        Self { su_tx_pos, su_rx_pos, pu_tx_pos, beta, beta_prime, d_su_pu, d_su_link, d_su_su, pu_active }
    }

    /// Sensing-channel amplitude between SU `m` and PU `n`.
    pub fn sensing_gain(&self, cfg: &ScenarioConfig<T>, m: usize, n: usize) -> T {
        channel_gain(self.beta[n], cfg.path_loss_constant, self.d_su_pu[(m, n)], cfg.path_loss_exponent)
    }

    /// Data-channel amplitude of SU `m`'s own link on band `n`.
    pub fn link_gain(&self, cfg: &ScenarioConfig<T>, m: usize, n: usize) -> T {
        channel_gain(self.beta_prime[n], cfg.path_loss_constant, self.d_su_link[m], cfg.path_loss_exponent)
    }

    /// Amplitude from SU transmitter `from` to SU receiver `to` on band `n`.
    pub fn cross_gain(&self, cfg: &ScenarioConfig<T>, from: usize, to: usize, n: usize) -> T {
        channel_gain(self.beta_prime[n], cfg.path_loss_constant, self.d_su_su[(from, to)], cfg.path_loss_exponent)
    }
}

pub fn dbm_to_linear<T: Scalar>(p_dbm: T) -> T {
    T::lit(10.0).powf(p_dbm / T::lit(10.0))
}

/// Amplitude gain `sqrt(beta / (1 + k d^gamma))`; finite at `d = 0`.
pub fn channel_gain<T: Scalar>(beta: T, k: T, d: T, gamma: T) -> T {
    (beta / (T::one() + k * d.powf(gamma))).sqrt()
}

/// Shannon rate in bits/s/Hz of a link with amplitude gain `g`.
pub fn achievable_rate<T: Scalar>(p_tx_mw: T, g: T, noise_mw: T) -> T {
    (T::one() + p_tx_mw * g * g / noise_mw).log2()
}

/// Interference-free rate of every SU on every band at the configured SU power.
pub fn rate_matrix<T: Scalar>(cfg: &ScenarioConfig<T>, inst: &NetworkInstance<T>) -> Matrix<T> {
    let p = cfg.su_power_mw();
    let noise = cfg.noise_mw();
    Matrix::from_fn(inst.num_sus(), inst.num_pus(), |m, n| {
        achievable_rate(p, inst.link_gain(cfg, m, n), noise)
    })
}

/// Draws one deployment.
///
/// SU and PU quantities come from separate ChaCha streams of the same seed,
/// and each user's draws are consumed in index order, so growing `M` or `N`
/// with a fixed seed keeps the users already present in place.
pub fn sample_instance<T: Scalar>(cfg: &ScenarioConfig<T>, seed: u64) -> NetworkInstance<T> {
    let side = cfg.area_side.as_f64();
    let radius = cfg.link_radius.as_f64();

    let mut su_rng = ChaCha8Rng::seed_from_u64(seed);
    su_rng.set_stream(SU_STREAM);
    let mut su_tx_pos = Vec::with_capacity(cfg.num_sus);
    let mut su_rx_pos = Vec::with_capacity(cfg.num_sus);
    for _ in 0..cfg.num_sus {
        let tx = (su_rng.random::<f64>() * side, su_rng.random::<f64>() * side);
        let rx = receiver_near(&mut su_rng, tx, radius, side);
        su_tx_pos.push(point(tx));
        su_rx_pos.push(point(rx));
    }

    let mut pu_rng = ChaCha8Rng::seed_from_u64(seed);
    pu_rng.set_stream(PU_STREAM);
    let (lo, hi) = (cfg.beta_range.0.as_f64(), cfg.beta_range.1.as_f64());
    let mut pu_tx_pos = Vec::with_capacity(cfg.num_pus);
    let mut beta = Vec::with_capacity(cfg.num_pus);
    let mut beta_prime = Vec::with_capacity(cfg.num_pus);
    for _ in 0..cfg.num_pus {
        pu_tx_pos.push(point((pu_rng.random::<f64>() * side, pu_rng.random::<f64>() * side)));
        beta.push(T::lit(lo + (hi - lo) * pu_rng.random::<f64>()));
        beta_prime.push(T::lit(lo + (hi - lo) * pu_rng.random::<f64>()));
    }

    let pu_active = (0..cfg.num_pus).map(|n| cfg.is_pu_active(n)).collect();
    NetworkInstance::from_positions(su_tx_pos, su_rx_pos, pu_tx_pos, beta, beta_prime, pu_active)
}

fn point<T: Scalar>((x, y): (f64, f64)) -> Point<T> {
    Point::new(T::lit(x), T::lit(y))
}

/// Uniform point in the intersection of the disk of `radius` around `tx` and
/// the square `[0, side]^2`, by rejection from the intersection's bounding box.
fn receiver_near(rng: &mut ChaCha8Rng, tx: (f64, f64), radius: f64, side: f64) -> (f64, f64) {
    let (x0, x1) = ((tx.0 - radius).max(0.0), (tx.0 + radius).min(side));
    let (y0, y1) = ((tx.1 - radius).max(0.0), (tx.1 + radius).min(side));
    loop {
        let x = x0 + (x1 - x0) * rng.random::<f64>();
        let y = y0 + (y1 - y0) * rng.random::<f64>();
        if (x - tx.0).hypot(y - tx.1) <= radius {
            return (x, y);
        }
    }
}
