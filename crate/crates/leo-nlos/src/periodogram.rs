//! Averaged (Welch) periodogram of complex baseband series.

use num_complex::Complex64;
use rustfft::FftPlanner;

use leo_nlos_core::spectrum::DopplerSpectrum;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Window {
    /// No taper; a tone centred on a bin stays in that bin.
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|k| 0.5 - 0.5 * (std::f64::consts::TAU * k as f64 / n as f64).cos())
                .collect(),
        }
    }
}

/// Power per FFT bin, normalized to unit total.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    /// Bin centres in Hz, ascending.
    pub freqs: Vec<f64>,
    /// Fraction of total power per bin.
    pub power: Vec<f64>,
    /// Bin spacing in Hz.
    pub resolution: f64,
    pub segments: usize,
}

/// Averages `|FFT(w x)|^2` over segments of `segment_length` samples that
/// overlap by `overlap` (a fraction in `[0, 0.9]`).
pub fn welch(
    series: &[Complex64],
    sample_rate: f64,
    segment_length: usize,
    overlap: f64,
    window: Window,
) -> Result<Periodogram, CliError> {
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(CliError::Usage(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    if segment_length < 2 || segment_length > series.len() {
        return Err(CliError::Usage(format!(
            "segment length {segment_length} must lie in [2, {}]",
            series.len()
        )));
    }
    if !(0.0..=0.9).contains(&overlap) {
        return Err(CliError::Usage(format!("overlap must lie in [0, 0.9], got {overlap}")));
    }
    let hop = ((segment_length as f64 * (1.0 - overlap)).round() as usize).max(1);
    let taper = window.coefficients(segment_length);
    let fft = FftPlanner::new().plan_fft_forward(segment_length);
    let mut acc = vec![0.0; segment_length];
    let mut buf = vec![Complex64::new(0.0, 0.0); segment_length];
    let mut segments = 0;
    let mut start = 0;
    while start + segment_length <= series.len() {
        for (b, (x, w)) in buf.iter_mut().zip(series[start..].iter().zip(&taper)) {
            *b = x * w;
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let total: f64 = acc.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(CliError::Usage("series carries no finite power".into()));
    }
    let resolution = sample_rate / segment_length as f64;
    let half = segment_length.div_ceil(2);
    // fftshift: negative frequencies first.
    let order = (half..segment_length).chain(0..half);
    let (mut freqs, mut power) = (Vec::with_capacity(segment_length), Vec::with_capacity(segment_length));
    for k in order {
        let signed = if k >= half {
            k as f64 - segment_length as f64
        } else {
            k as f64
        };
        freqs.push(signed * resolution);
        power.push(acc[k] / total);
    }
    Ok(Periodogram {
        freqs,
        power,
        resolution,
        segments,
    })
}

impl Periodogram {
    /// Moves the power onto `n_bins` cells tiling `nu = f / f_d` in
    /// `[-1, 1]`, treating each FFT bin as a uniform cell. Power outside the
    /// band is dropped.
    pub fn to_spectrum(&self, f_d: f64, n_bins: usize) -> Result<DopplerSpectrum, CliError> {
        if f_d == 0.0 || !f_d.is_finite() {
            return Err(CliError::Usage(format!("Doppler scale must be non-zero, got {f_d}")));
        }
        if n_bins < 2 {
            return Err(CliError::Usage("need at least two bins".into()));
        }
        let w = 2.0 / n_bins as f64;
        let half_width = 0.5 * self.resolution / f_d.abs();
        let mut mass = vec![0.0; n_bins];
        for (&f, &p) in self.freqs.iter().zip(&self.power) {
            let nu = f / f_d;
            let (lo, hi) = (nu - half_width, nu + half_width);
            if hi <= -1.0 || lo >= 1.0 {
                continue;
            }
            let first = (((lo.max(-1.0) + 1.0) / w) as usize).min(n_bins - 1);
            for (k, m) in mass.iter_mut().enumerate().skip(first) {
                let (clo, chi) = (-1.0 + k as f64 * w, -1.0 + (k + 1) as f64 * w);
                if clo >= hi {
                    break;
                }
                let overlap = hi.min(chi) - lo.max(clo);
                if overlap > 0.0 {
                    *m += p * overlap / (hi - lo);
                }
            }
        }
        Ok(DopplerSpectrum::from_density(
            mass.into_iter().map(|m| m / w).collect(),
            f_d,
        )?)
    }

    /// Mirror image: the spectrum of the conjugate series.
    pub fn mirrored(&self) -> Periodogram {
        Periodogram {
            freqs: self.freqs.iter().rev().map(|f| -f).collect(),
            power: self.power.iter().rev().copied().collect(),
            ..self.clone()
        }
    }
}
