//! Sensing observations and the log a-posteriori ratio of PU activity.
//!
//! Each SU takes one observation per band. Under `H0` it sees noise only,
//! under `H1` the PU's known constant-amplitude signal through the sensing
//! channel plus noise. The statistic `delta` is positive when the SU
//! believes the band is occupied; its magnitude is the confidence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::scenario::{NetworkInstance, ScenarioConfig};
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// No PU signal on the band.
    H0,
    /// PU signal present.
    H1,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationMatrix<T>(pub Matrix<T>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionMatrix<T>(pub Matrix<T>);

impl<T> DetectionMatrix<T> {
    pub fn matrix(&self) -> &Matrix<T> {
        &self.0
    }
}

/// Amplitude of the pilot each PU transmits, taken from its power.
pub fn pu_signal_amplitude<T: Scalar>(cfg: &ScenarioConfig<T>) -> T {
    cfg.pu_power_mw().sqrt()
}

/// One observation per SU-band pair under the instance's true PU activity.
pub fn sample_observations<T: Scalar>(
    cfg: &ScenarioConfig<T>,
    inst: &NetworkInstance<T>,
    seed: u64,
) -> ObservationMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = cfg.noise_mw().sqrt();
    let s = pu_signal_amplitude(cfg);
    ObservationMatrix(Matrix::from_fn(inst.num_sus(), inst.num_pus(), |m, n| {
        let z: f64 = StandardNormal.sample(&mut rng);
        let w = sigma * T::lit(z);
        if inst.pu_active[n] {
            inst.sensing_gain(cfg, m, n) * s + w
        } else {
            w
        }
    }))
}

/// `log(P(H1|x) / P(H0|x))` for a Gaussian observation of a known signal
/// `h * s` in noise of variance `noise_var`, with prior `prior = P(H1)`.
///
/// Uses the closed form with the Gaussian normalizers cancelled, so it stays
/// finite at SNRs where the densities themselves underflow.
pub fn log_posterior_ratio<T: Scalar>(x: T, h: T, s: T, noise_var: T, prior: T) -> Result<T> {
    if !(prior > T::zero() && prior < T::one()) {
        return Err(Error::InvalidPrior(prior.as_f64()));
    }
    if !(noise_var > T::zero()) {
        return Err(Error::InvalidNoise(noise_var.as_f64()));
    }
    let mu = h * s;
    let two = T::lit(2.0);
    Ok((prior / (T::one() - prior)).ln() + (two * x * mu - mu * mu) / (two * noise_var))
}

/// Zero resolves to `H0`.
pub fn detect<T: Scalar>(delta: T) -> Hypothesis {
    if delta > T::zero() {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    }
}

pub fn detection_matrix<T: Scalar>(
    cfg: &ScenarioConfig<T>,
    inst: &NetworkInstance<T>,
    obs: &ObservationMatrix<T>,
) -> Result<DetectionMatrix<T>> {
    let s = pu_signal_amplitude(cfg);
    let noise = cfg.noise_mw();
    let (rows, cols) = (inst.num_sus(), inst.num_pus());
    let mut out = Matrix::filled(rows, cols, T::zero());
    for m in 0..rows {
        for n in 0..cols {
            let h = inst.sensing_gain(cfg, m, n);
            out[(m, n)] = log_posterior_ratio(obs.0[(m, n)], h, s, noise, cfg.prior(m, n))?;
        }
    }
    Ok(DetectionMatrix(out))
}
