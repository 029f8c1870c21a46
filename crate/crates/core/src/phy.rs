//! Physical-layer check of the OR-channel abstraction.
//!
//! A site with `M` antennas receives, on each shared pilot RE, the sum of the
//! channels of proximate users that transmit there plus white noise. It
//! forms the per-antenna energy `‖y‖²/M` and compares it with
//! `Γ = g/2 + N_o`. As `M` grows the energy concentrates on
//! `Σ b_k z_k g + N_o`, so the thresholded pattern converges to the ideal OR.
//!
//! The pilot energy is normalized to one, so noise has variance `N_o` per
//! antenna and `g/N_o` is the only level that matters.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::pilotcode::{decode, or_channel, CodeError, OnOffCode, ProximityVector};
use crate::rng::{Purpose, SimRng, StreamKey};
use crate::stats::{Estimate, RunningStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhyError {
    #[error("need at least one antenna")]
    NoAntennas,
    #[error("gain g must be non-negative and finite, got {0}")]
    BadGain(f64),
    #[error("noise power must be positive and finite, got {0}")]
    BadNoise(f64),
    #[error("tap profile must be non-empty with non-negative powers")]
    BadTaps,
    #[error("FFT size {fft} must be at least the number of pilot REs {res}")]
    FftTooSmall { fft: usize, res: usize },
    #[error("tone {tone} outside FFT of size {fft}")]
    ToneOutOfRange { tone: usize, fft: usize },
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Multipath power-delay profile.
#[derive(Debug, Clone, PartialEq)]
pub struct TapProfile {
    /// Power of each tap relative to `g`; sums to one.
    weights: Vec<f64>,
    pub fft_size: usize,
}

impl TapProfile {
    /// Equal power on `taps` taps.
    pub fn uniform(taps: usize, fft_size: usize) -> Result<Self, PhyError> {
        TapProfile::new(vec![1.0; taps], fft_size)
    }

    /// Arbitrary profile; powers are normalized to sum to one.
    pub fn new(powers: Vec<f64>, fft_size: usize) -> Result<Self, PhyError> {
        let total: f64 = powers.iter().sum();
        if powers.is_empty()
            || powers.iter().any(|&p| p.is_nan() || p < 0.0)
            || total.is_nan()
            || total <= 0.0
            || fft_size == 0
        {
            return Err(PhyError::BadTaps);
        }
        Ok(TapProfile {
            weights: powers.iter().map(|p| p / total).collect(),
            fft_size,
        })
    }

    pub fn taps(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhyParams {
    pub antennas: usize,
    /// Large-scale gain of an in-proximity user.
    pub gain: f64,
    /// Noise power per antenna after pilot-energy normalization.
    pub noise: f64,
    pub taps: Option<TapProfile>,
}

impl PhyParams {
    pub fn new(antennas: usize, gain: f64, noise: f64) -> Result<Self, PhyError> {
        if antennas == 0 {
            return Err(PhyError::NoAntennas);
        }
        if !(gain >= 0.0 && gain.is_finite()) {
            return Err(PhyError::BadGain(gain));
        }
        if !(noise > 0.0 && noise.is_finite()) {
            return Err(PhyError::BadNoise(noise));
        }
        Ok(PhyParams {
            antennas,
            gain,
            noise,
            taps: None,
        })
    }

    /// Unit gain with noise set by `g/N_o` in dB.
    pub fn from_snr_db(antennas: usize, snr_db: f64) -> Result<Self, PhyError> {
        PhyParams::new(antennas, 1.0, 10f64.powf(-snr_db / 10.0))
    }

    pub fn with_taps(mut self, taps: TapProfile) -> Self {
        self.taps = Some(taps);
        self
    }

    /// Detection threshold `g/2 + N_o`.
    pub fn threshold(&self) -> f64 {
        0.5 * self.gain + self.noise
    }
}

fn cn<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// `M` i.i.d. `CN(0, g)` entries.
pub fn gen_channel_flat<R: Rng + ?Sized>(
    antennas: usize,
    gain: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    (0..antennas).map(|_| cn(rng, gain)).collect()
}

/// Time-domain taps of one user: `taps × M`, tap `τ` with variance
/// `g·w_τ`.
pub fn gen_taps<R: Rng + ?Sized>(
    antennas: usize,
    gain: f64,
    profile: &TapProfile,
    rng: &mut R,
) -> Vec<Vec<Complex64>> {
    profile
        .weights
        .iter()
        .map(|w| gen_channel_flat(antennas, gain * w, rng))
        .collect()
}

/// Frequency response on `tone`: `Σ_τ h̃[τ] e^{-j2π nτ/N}`.
pub fn tone_response(taps: &[Vec<Complex64>], tone: usize, fft_size: usize) -> Vec<Complex64> {
    let m = taps.first().map_or(0, Vec::len);
    let mut h = vec![Complex64::new(0.0, 0.0); m];
    for (tau, tap) in taps.iter().enumerate() {
        let phase = Complex64::from_polar(
            1.0,
            -TAU * ((tone * tau) % fft_size) as f64 / fft_size as f64,
        );
        for (acc, &x) in h.iter_mut().zip(tap) {
            *acc += x * phase;
        }
    }
    h
}

/// One user's channel on `tone` under the tap model.
pub fn gen_channel_taps<R: Rng + ?Sized>(
    params: &PhyParams,
    tone: usize,
    rng: &mut R,
) -> Result<Vec<Complex64>, PhyError> {
    let profile = params.taps.as_ref().ok_or(PhyError::BadTaps)?;
    if tone >= profile.fft_size {
        return Err(PhyError::ToneOutOfRange {
            tone,
            fft: profile.fft_size,
        });
    }
    let taps = gen_taps(params.antennas, params.gain, profile, rng);
    Ok(tone_response(&taps, tone, profile.fft_size))
}

/// Received vector on one RE and its per-antenna energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyObservation {
    pub y: Vec<Complex64>,
    pub energy: f64,
}

impl PhyObservation {
    pub fn from_vector(y: Vec<Complex64>) -> Self {
        let energy = y.iter().map(|c| c.norm_sqr()).sum::<f64>() / y.len() as f64;
        PhyObservation { y, energy }
    }
}

/// Superposition of the channels of proximate users transmitting on this
/// RE, plus noise. Each channel is drawn fresh from the flat model.
pub fn received_pilot<R: Rng + ?Sized>(
    params: &PhyParams,
    codebits: &[bool],
    z: &ProximityVector,
    rng: &mut R,
) -> Result<PhyObservation, PhyError> {
    if codebits.len() != z.len() {
        return Err(CodeError::LengthMismatch {
            expected: z.len(),
            got: codebits.len(),
        }
        .into());
    }
    let mut y: Vec<Complex64> = gen_channel_flat(params.antennas, params.noise, rng);
    for (_, _) in codebits
        .iter()
        .zip(z.as_slice())
        .filter(|(&b, &zk)| b && zk)
    {
        for (acc, h) in y
            .iter_mut()
            .zip(gen_channel_flat(params.antennas, params.gain, rng))
        {
            *acc += h;
        }
    }
    Ok(PhyObservation::from_vector(y))
}

/// Observations on all `L'` REs of a code.
///
/// With a tap profile, each proximate user's taps are drawn once and the
/// REs sit on tones spread evenly over the FFT; otherwise channels are
/// independent per RE.
pub fn observe_code<R: Rng + ?Sized>(
    params: &PhyParams,
    code: &OnOffCode,
    z: &ProximityVector,
    rng: &mut R,
) -> Result<Vec<PhyObservation>, PhyError> {
    if z.len() != code.users() {
        return Err(CodeError::LengthMismatch {
            expected: code.users(),
            got: z.len(),
        }
        .into());
    }
    let n_res = code.length();
    match &params.taps {
        None => (0..n_res)
            .map(|n| {
                let bits: Vec<bool> = code.codewords().iter().map(|c| c.bits()[n]).collect();
                received_pilot(params, &bits, z, rng)
            })
            .collect(),
        Some(profile) => {
            if profile.fft_size < n_res {
                return Err(PhyError::FftTooSmall {
                    fft: profile.fft_size,
                    res: n_res,
                });
            }
            let present: Vec<usize> = (0..z.len()).filter(|&k| z.as_slice()[k]).collect();
            let taps: Vec<_> = present
                .iter()
                .map(|_| gen_taps(params.antennas, params.gain, profile, rng))
                .collect();
            let spacing = profile.fft_size / n_res;
            Ok((0..n_res)
                .map(|n| {
                    let tone = n * spacing;
                    let mut y = gen_channel_flat(params.antennas, params.noise, rng);
                    for (k, t) in present.iter().zip(&taps) {
                        if code.codeword(*k).bits()[n] {
                            for (acc, h) in
                                y.iter_mut().zip(tone_response(t, tone, profile.fft_size))
                            {
                                *acc += h;
                            }
                        }
                    }
                    PhyObservation::from_vector(y)
                })
                .collect())
        }
    }
}

/// Energy detector: on iff `Ê > Γ`.
pub fn detect(energy: f64, params: &PhyParams) -> bool {
    energy > params.threshold()
}

/// Agreement of the energy detector with the ideal OR channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    /// Fraction of (trial, RE) pairs where `ε̂ = ε`.
    pub per_re: Estimate,
    /// Fraction of trials where decoding `ε̂` gives the ideal outcome.
    pub decode: Estimate,
}

/// [`or_agreement`] with the proximity pattern redrawn every trial.
pub fn or_agreement_with<F>(
    params: &PhyParams,
    code: &OnOffCode,
    trials: usize,
    key: StreamKey,
    pattern: F,
) -> Result<Agreement, PhyError>
where
    F: Fn(&mut SimRng) -> ProximityVector + Sync,
{
    if trials == 0 {
        return Err(PhyError::NoTrials);
    }
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let tk = key.trial(t as u64);
            let z = pattern(&mut tk.purpose(Purpose::Pattern).rng());
            let ideal = or_channel(code, &z)?;
            let obs = observe_code(params, code, &z, &mut tk.purpose(Purpose::Channel).rng())?;
            let detected: Vec<bool> = obs.iter().map(|o| detect(o.energy, params)).collect();
            let matches = ideal.iter().zip(&detected).filter(|(a, b)| a == b).count();
            let same_decision = decode(code, &ideal)? == decode(code, &detected)?;
            Ok((matches as f64 / ideal.len() as f64, same_decision))
        })
        .collect::<Result<Vec<_>, PhyError>>()?;
    let per_re: RunningStats = per_trial.iter().map(|p| p.0).collect();
    let decode: RunningStats = per_trial
        .iter()
        .map(|p| if p.1 { 1.0 } else { 0.0 })
        .collect();
    Ok(Agreement {
        per_re: per_re.estimate(),
        decode: decode.estimate(),
    })
}

/// Monte Carlo agreement between `ε̂` and the ideal OR output for a fixed
/// proximity pattern.
pub fn or_agreement(
    params: &PhyParams,
    code: &OnOffCode,
    z: &ProximityVector,
    trials: usize,
    key: StreamKey,
) -> Result<Agreement, PhyError> {
    or_agreement_with(params, code, trials, key, |_| z.clone())
}

/// Pattern with 0, 1 or 2 proximate users (equally likely), users chosen
/// uniformly.
pub fn mixed_pattern(users: usize, rng: &mut SimRng) -> ProximityVector {
    let w = rng.random_range(0..3usize).min(users);
    let mut present = Vec::with_capacity(w);
    while present.len() < w {
        let k = rng.random_range(0..users);
        if !present.contains(&k) {
            present.push(k);
        }
    }
    ProximityVector::from_indices(users, &present)
}
