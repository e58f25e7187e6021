//! Brute-force oracle: scatterers drawn uniformly in the semi-ellipsoid,
//! their empirical statistics, and sum-of-rays waveform synthesis.
//!
//! Sample `i` draws from its own ChaCha8 stream (`seed`, stream `i`), so an
//! ensemble is reproducible bit for bit and independent of evaluation order.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::angular_pdf::wrap_turn;
use crate::geometry::{rotate_to_global, ElevationAngle, EllipsoidAxes, RotatedPoint};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// One scatterer and the ray it reflects toward the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    /// Azimuth in `[0, 2 pi)`.
    pub alpha: f64,
    /// Elevation in `[0, pi/2]`.
    pub beta: f64,
    /// Distance from the receiver, metres.
    pub r: f64,
    /// Seconds.
    pub excess_delay: f64,
    /// `cos(alpha) cos(beta)`.
    pub doppler_norm: f64,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayEnsemble {
    pub rays: Vec<Ray>,
    pub axes: EllipsoidAxes,
    pub elevation: ElevationAngle,
    pub seed: u64,
    /// Points drawn in the full ellipsoid, accepted or not.
    pub attempts: u64,
}

/// Draws `n` scatterers uniformly in the part of the ellipsoid above ground.
///
/// Each candidate is a uniform point of the unit ball (a normalized Gaussian
/// triple scaled by `U^(1/3)`), stretched by the axes in the ellipsoid frame
/// and rotated to the ground frame; candidates below ground are redrawn.
pub fn sample_rays(axes: &EllipsoidAxes, elevation: ElevationAngle, n: usize, seed: u64) -> Result<RayEnsemble> {
    if n == 0 {
        return Err(Error::invalid("need at least one ray"));
    }
    let amplitude = 1.0 / (n as f64).sqrt();
    let mut rays = Vec::with_capacity(n);
    let mut attempts = 0u64;
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let (prime, global) = loop {
            attempts += 1;
            let g: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
            let radius = rng.random::<f64>().cbrt();
            if !(norm > 0.0) {
                continue;
            }
            let s = radius / norm;
            let prime = RotatedPoint {
                x: axes.a * g[0] * s,
                y: axes.b * g[1] * s,
                z: axes.c * g[2] * s,
            };
            let global = rotate_to_global(prime, elevation);
            if global.z >= 0.0 && global.norm() > 0.0 {
                break (prime, global);
            }
        };
        let r = global.norm();
        let alpha = wrap_turn(global.y.atan2(global.x));
        let beta = (global.z / r).clamp(0.0, 1.0).asin();
        let phase = rng.random::<f64>() * TAU;
        rays.push(Ray {
            alpha,
            beta,
            r,
            excess_delay: (r - prime.x).max(0.0) / SPEED_OF_LIGHT,
            doppler_norm: (global.x / r).clamp(-1.0, 1.0),
            amplitude,
            phase,
        });
    }
    Ok(RayEnsemble {
        rays,
        axes: *axes,
        elevation,
        seed,
        attempts,
    })
}

/// Histogram normalized to unit integral. Bins are right-open except the
/// last, which also holds the upper edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub densities: Vec<f64>,
}

impl EmpiricalHistogram {
    pub fn new(values: impl IntoIterator<Item = f64>, lo: f64, hi: f64, n_bins: usize) -> Result<Self> {
        if n_bins == 0 || !(hi > lo) {
            return Err(Error::invalid(format!(
                "bad histogram range [{lo}, {hi}] with {n_bins} bins"
            )));
        }
        let w = (hi - lo) / n_bins as f64;
        let edges: Vec<f64> = (0..=n_bins)
            .map(|k| if k == n_bins { hi } else { lo + k as f64 * w })
            .collect();
        let mut counts = alloc::vec![0u64; n_bins];
        for v in values {
            if !(v >= lo && v <= hi) {
                continue;
            }
            let mut k = (((v - lo) / w) as usize).min(n_bins - 1);
            // Division can land one bin off near an edge.
            if v < edges[k] {
                k -= 1;
            } else if k + 1 < n_bins && v >= edges[k + 1] {
                k += 1;
            }
            counts[k] += 1;
        }
        let total: u64 = counts.iter().sum();
        let densities = counts
            .iter()
            .zip(edges.windows(2))
            .map(|(&c, e)| {
                if total == 0 {
                    0.0
                } else {
                    c as f64 / (total as f64 * (e[1] - e[0]))
                }
            })
            .collect();
        Ok(EmpiricalHistogram {
            edges,
            counts,
            densities,
        })
    }

    pub fn centres(&self) -> Vec<f64> {
        self.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `sum |h_i - g_i| width_i` against densities on the same bins.
    pub fn l1_distance(&self, densities: &[f64]) -> Result<f64> {
        if densities.len() != self.densities.len() {
            return Err(Error::invalid(format!(
                "bin counts differ: {} vs {}",
                self.densities.len(),
                densities.len()
            )));
        }
        Ok(self
            .densities
            .iter()
            .zip(densities)
            .zip(self.edges.windows(2))
            .map(|((h, g), e)| (h - g).abs() * (e[1] - e[0]))
            .sum())
    }
}

/// Histogram of `f_l / f_d` over `[-1, 1]`.
pub fn empirical_doppler(ensemble: &RayEnsemble, n_bins: usize) -> Result<EmpiricalHistogram> {
    if n_bins < 8 {
        return Err(Error::invalid(format!("need at least 8 bins, got {n_bins}")));
    }
    EmpiricalHistogram::new(ensemble.rays.iter().map(|r| r.doppler_norm), -1.0, 1.0, n_bins)
}

/// Sample statistics of the excess delay, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySample {
    pub mean: f64,
    /// Population standard deviation.
    pub rms: f64,
    pub max: f64,
}

pub fn empirical_delay_stats(ensemble: &RayEnsemble) -> DelaySample {
    let n = ensemble.rays.len() as f64;
    let mean = ensemble.rays.iter().map(|r| r.excess_delay).sum::<f64>() / n;
    let var = ensemble
        .rays
        .iter()
        .map(|r| (r.excess_delay - mean).powi(2))
        .sum::<f64>()
        / n;
    let max = ensemble.rays.iter().map(|r| r.excess_delay).fold(0.0, f64::max);
    DelaySample {
        mean,
        rms: var.sqrt(),
        max,
    }
}

/// Histograms of azimuth over `[0, 2 pi)` and elevation over `[0, pi/2]`.
pub fn empirical_marginals(ensemble: &RayEnsemble, n_bins: usize) -> Result<(EmpiricalHistogram, EmpiricalHistogram)> {
    let az = EmpiricalHistogram::new(ensemble.rays.iter().map(|r| r.alpha), 0.0, TAU, n_bins)?;
    let el = EmpiricalHistogram::new(ensemble.rays.iter().map(|r| r.beta), 0.0, FRAC_PI_2, n_bins)?;
    Ok((az, el))
}

/// Uniformly sampled complex baseband field.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    /// Hz.
    pub sample_rate: f64,
    pub samples: Vec<Complex64>,
}

impl Waveform {
    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.sample_rate
    }

    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }
}

/// `E(t_k) = sum_l a_l exp(-j (2 pi f_d nu_l (t_k - tau_l) + phi_l))` at
/// `t_k = k / sample_rate` for `k < duration * sample_rate`.
pub fn synthesize_waveform(ensemble: &RayEnsemble, f_d: f64, duration: f64, sample_rate: f64) -> Result<Waveform> {
    if !(f_d.is_finite() && duration > 0.0 && duration.is_finite()) {
        return Err(Error::invalid(format!(
            "bad Doppler scale {f_d} Hz or duration {duration} s"
        )));
    }
    if !(sample_rate > 4.0 * f_d.abs()) || !sample_rate.is_finite() {
        return Err(Error::invalid(format!(
            "sample rate {sample_rate} Hz must exceed four times |f_d| = {} Hz",
            f_d.abs()
        )));
    }
    let n = (duration * sample_rate).floor() as usize;
    if n == 0 {
        return Err(Error::invalid("duration shorter than one sample"));
    }
    let mut samples = alloc::vec![Complex64::new(0.0, 0.0); n];
    for ray in &ensemble.rays {
        let omega = TAU * f_d * ray.doppler_norm;
        let offset = ray.phase - omega * ray.excess_delay;
        for (k, s) in samples.iter_mut().enumerate() {
            let theta = omega * (k as f64 / sample_rate) + offset;
            *s += Complex64::from_polar(ray.amplitude, -theta);
        }
    }
    Ok(Waveform { sample_rate, samples })
}
