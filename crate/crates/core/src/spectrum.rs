//! Autocorrelation and Doppler power spectral density.
//!
//! Spectra live on the normalized axis `nu = f / f_d`, tiled by `n` equal
//! cells over `[-1, 1]`. Two independent estimators are provided:
//! [`psd_delta`] collapses the delta function through the `(u, v)` density
//! and needs a mirror-symmetric azimuth support; [`psd_binned`] integrates
//! the joint density over the region of each frequency cell and accepts any
//! support.
//!
//! Both are computed on the folded geometry. For a receding satellite the
//! result is mirrored with [`flip_spectrum`], so the spectrum at `180 - e`
//! is bit-identical to the flipped spectrum at `e`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::angular_pdf::{uv_density, JointAoaPdf};
use crate::geometry::{inverse_square_range, primed_direction};
use crate::numerics::{self, QuadratureSpec};
use crate::{Error, Result};

/// Discrete LOS component of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    /// Normalized frequency `f / f_d`.
    pub freq: f64,
    /// Fraction of total power.
    pub power: f64,
}

/// Power spectral density on `n` uniform cells tiling `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerSpectrum {
    density: Vec<f64>,
    f_d: f64,
    lines: Vec<SpectralLine>,
    continuous_power: f64,
    support_mass: f64,
}

impl DopplerSpectrum {
    /// Builds a spectrum from per-cell densities (per unit normalized
    /// frequency). The continuous power is the cell sum of the density.
    pub fn from_density(density: Vec<f64>, f_d: f64) -> Result<Self> {
        if density.len() < 2 {
            return Err(Error::invalid("a spectrum needs at least two cells"));
        }
        if let Some(d) = density.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(Error::invalid(format!(
                "spectral density must be finite and non-negative, got {d}"
            )));
        }
        if !f_d.is_finite() {
            return Err(Error::invalid(format!("Doppler scale must be finite, got {f_d}")));
        }
        let mut s = DopplerSpectrum {
            density,
            f_d,
            lines: Vec::new(),
            continuous_power: 0.0,
            support_mass: 1.0,
        };
        s.continuous_power = s.mass();
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    pub fn bin_width(&self) -> f64 {
        2.0 / self.density.len() as f64
    }

    /// Centre of cell `i` on the normalized axis.
    pub fn freq(&self, i: usize) -> f64 {
        -1.0 + (i as f64 + 0.5) * self.bin_width()
    }

    pub fn freq_grid(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.freq(i)).collect()
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Density at normalized frequency `nu`; zero outside `[-1, 1]`.
    pub fn density_at(&self, nu: f64) -> f64 {
        if !(-1.0..=1.0).contains(&nu) {
            return 0.0;
        }
        let i = (((nu + 1.0) / self.bin_width()) as usize).min(self.len() - 1);
        self.density[i]
    }

    /// Doppler scale in Hz; physical frequency is `nu * f_d`.
    pub fn f_d(&self) -> f64 {
        self.f_d
    }

    pub fn lines(&self) -> &[SpectralLine] {
        &self.lines
    }

    /// Nominal power carried by the continuous part.
    pub fn continuous_power(&self) -> f64 {
        self.continuous_power
    }

    /// Probability mass of the azimuth support under the untruncated
    /// density; 1 for full support.
    pub fn support_mass(&self) -> f64 {
        self.support_mass
    }

    pub fn total_power(&self) -> f64 {
        self.continuous_power + self.lines.iter().map(|l| l.power).sum::<f64>()
    }

    /// Cell sum of the continuous density. Mirrored cells are paired before
    /// summing so the result is unchanged by [`flip_spectrum`].
    pub fn mass(&self) -> f64 {
        let n = self.len();
        let mut acc: f64 = (0..n / 2).map(|i| self.density[i] + self.density[n - 1 - i]).sum();
        if n % 2 == 1 {
            acc += self.density[n / 2];
        }
        acc * self.bin_width()
    }

    fn signed_masses(&self) -> (f64, f64) {
        let n = self.len();
        let w = self.bin_width();
        let neg: f64 = self.density[..n / 2].iter().sum::<f64>() * w;
        let pos: f64 = self.density[n.div_ceil(2)..].iter().sum::<f64>() * w;
        let centre = if n % 2 == 1 { 0.5 * self.density[n / 2] * w } else { 0.0 };
        (pos + centre, neg + centre)
    }

    /// Continuous mass above zero. With an odd cell count the centre cell
    /// is split evenly.
    pub fn positive_mass(&self) -> f64 {
        self.signed_masses().0
    }

    pub fn negative_mass(&self) -> f64 {
        self.signed_masses().1
    }

    pub fn positive_fraction(&self) -> f64 {
        let (p, n) = self.signed_masses();
        p / (p + n)
    }

    /// `sum |S(nu) - S(-nu)| d nu` over the grid.
    pub fn mirrored_l1(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| (self.density[i] - self.density[n - 1 - i]).abs())
            .sum::<f64>()
            * self.bin_width()
    }

    /// Density of the first cell lying entirely above zero.
    pub fn density_above_zero(&self) -> f64 {
        self.density[self.len().div_ceil(2)]
    }

    /// Density of the first cell lying entirely below zero.
    pub fn density_below_zero(&self) -> f64 {
        self.density[self.len() / 2 - 1]
    }

    /// `density(0-) - density(0+)`.
    pub fn discontinuity_gap(&self) -> f64 {
        self.density_below_zero() - self.density_above_zero()
    }

    /// `sum |S1 - S2| d nu`; both spectra must share the grid.
    pub fn l1_distance(&self, other: &DopplerSpectrum) -> Result<f64> {
        l1_distance(&self.density, &other.density)
    }

    /// Mass-conserving transfer onto `n` cells: each old cell spreads its
    /// mass over the new cells it overlaps.
    pub fn rebin(&self, n: usize) -> Result<DopplerSpectrum> {
        let density = rebin_density(&self.density, n)?;
        let mut out = self.clone();
        out.density = density;
        Ok(out)
    }

    /// `sum_i S_i int_cell exp(j 2 pi f_d tau nu) d nu` plus the lines: the
    /// autocorrelation implied by this spectrum, treating the density as
    /// constant over each cell.
    pub fn inverse_transform(&self, lags: &[f64]) -> CorrelationTrace {
        let w = self.bin_width();
        let values = lags
            .iter()
            .map(|&tau| {
                let omega = TAU * self.f_d * tau;
                let x = 0.5 * omega * w;
                let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, &d) in self.density.iter().enumerate() {
                    acc += Complex64::from_polar(d * w * sinc, omega * self.freq(i));
                }
                for l in &self.lines {
                    acc += Complex64::from_polar(l.power, omega * l.freq);
                }
                acc
            })
            .collect();
        CorrelationTrace {
            lags: lags.to_vec(),
            values,
        }
    }
}

/// `sum |a_i - b_i| * (2 / n)` for densities on the same `n`-cell grid.
pub fn l1_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::invalid(format!(
            "grids differ: {} vs {} cells",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * 2.0 / a.len() as f64)
}

/// Moves piecewise-constant densities on a uniform tiling of `[-1, 1]` onto
/// a tiling with `n` cells, conserving mass.
pub fn rebin_density(density: &[f64], n: usize) -> Result<Vec<f64>> {
    if n == 0 || density.is_empty() {
        return Err(Error::invalid("rebinning needs non-empty grids"));
    }
    let m = density.len();
    let (wo, wn) = (2.0 / m as f64, 2.0 / n as f64);
    let mut mass = alloc::vec![0.0; n];
    let mut j = 0;
    for (i, &d) in density.iter().enumerate() {
        let (lo, hi) = (-1.0 + i as f64 * wo, -1.0 + (i + 1) as f64 * wo);
        while j + 1 < n && -1.0 + (j + 1) as f64 * wn <= lo {
            j += 1;
        }
        let mut k = j;
        while k < n {
            let (clo, chi) = (-1.0 + k as f64 * wn, -1.0 + (k + 1) as f64 * wn);
            let overlap = hi.min(chi) - lo.max(clo);
            if overlap > 0.0 {
                mass[k] += d * overlap;
            }
            if chi >= hi {
                break;
            }
            k += 1;
        }
    }
    Ok(mass.into_iter().map(|m| m / wn).collect())
}

/// Complex autocorrelation samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace {
    /// Seconds.
    pub lags: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl CorrelationTrace {
    /// Largest `|R1 - R2|` over shared lags.
    pub fn sup_distance(&self, other: &CorrelationTrace) -> Result<f64> {
        if self.lags != other.lags {
            return Err(Error::invalid("traces are sampled at different lags"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// `R(tau) = iint p(alpha, beta) exp(j 2 pi f_d tau cos(alpha) cos(beta))`.
///
/// The quadrature sum is divided by the same sum at `tau = 0`, so `R(0)` is
/// exactly one.
pub fn autocorrelation(pdf: &JointAoaPdf, f_d: f64, lags: &[f64], quad: &QuadratureSpec) -> Result<CorrelationTrace> {
    quad.validate()?;
    let sign = pdf.elevation.doppler_sign();
    let n = quad.points_per_axis;
    let beta = numerics::nodes(numerics::Bracket::new(0.0, FRAC_PI_2)?, n, quad.rule);
    let mut weighted: Vec<(f64, f64)> = Vec::new();
    for &(lo, hi) in pdf.support.intervals() {
        let cells = ((n as f64) * (hi - lo) / TAU).ceil().max(2.0) as usize;
        for (a, wa) in numerics::nodes(numerics::Bracket::new(lo, hi)?, cells, quad.rule) {
            let ca = a.cos();
            for &(b, wb) in &beta {
                let p = pdf.density(a, b);
                if !p.is_finite() {
                    return Err(Error::Evaluation2d { alpha: a, beta: b });
                }
                weighted.push((wa * wb * p, sign * ca * b.cos()));
            }
        }
    }
    let total: f64 = weighted.iter().map(|w| w.0).sum();
    let values = lags
        .iter()
        .map(|&tau| {
            let omega = TAU * f_d * tau;
            let mut acc = Complex64::new(0.0, 0.0);
            for &(w, nu) in &weighted {
                let (s, c) = (omega * nu).sin_cos();
                acc += Complex64::new(w * c, w * s);
            }
            acc / total
        })
        .collect();
    Ok(CorrelationTrace {
        lags: lags.to_vec(),
        values,
    })
}

fn finish(mut s: DopplerSpectrum, pdf: &JointAoaPdf) -> DopplerSpectrum {
    s.support_mass = pdf.support_mass();
    if pdf.elevation.is_receding() {
        flip_spectrum(&s)
    } else {
        s
    }
}

/// Default number of cells and inner nodes for [`psd_delta`].
pub const DELTA_GRID: usize = 1000;

/// PSD by collapsing the delta function in the `(u, v)` plane:
/// `S(nu) = int_{|nu|}^1 p_uv(nu / v, v) / v dv`, the change of variable
/// `u = nu / v` of `int p_uv(u, nu / u) / |u| du`.
///
/// `grid.points_per_axis` sets both the number of frequency cells and the
/// number of inner nodes. The inner integral uses the midpoint rule after
/// `v = |nu| + (1 - |nu|)(1 - cos phi) / 2`, which cancels the
/// inverse-square-root endpoint singularities.
pub fn psd_delta(pdf: &JointAoaPdf, f_d: f64, grid: &QuadratureSpec) -> Result<DopplerSpectrum> {
    grid.validate()?;
    if !pdf.support.is_mirror_symmetric() {
        return Err(Error::UnsupportedTransform);
    }
    let n = grid.points_per_axis;
    let hphi = PI / n as f64;
    let phi: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let (s, c) = ((k as f64 + 0.5) * hphi).sin_cos();
            ((1.0 - c) / 2.0, s / 2.0)
        })
        .collect();
    let w = 2.0 / n as f64;
    let mut density = Vec::with_capacity(n);
    for i in 0..n {
        let nu = -1.0 + (i as f64 + 0.5) * w;
        let span = 1.0 - nu.abs();
        let mut acc = 0.0;
        for &(t, dt) in &phi {
            let v = nu.abs() + span * t;
            acc += uv_density(pdf, nu / v, v) / v * span * dt;
        }
        let s = acc * hphi;
        if !s.is_finite() {
            return Err(Error::Evaluation { node: nu });
        }
        density.push(s);
    }
    Ok(finish(DopplerSpectrum::from_density(density, f_d)?, pdf))
}

/// Default cell count for [`psd_binned`].
pub const DEFAULT_BINS: usize = 201;
/// Azimuth cells per full turn used by [`psd_binned`].
pub const BINNED_AZIMUTH_CELLS: usize = 8192;

const GAUSS5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// PSD as spectral mass per cell: the probability of
/// `nu_lo <= cos(alpha) cos(beta) < nu_hi` divided by the cell width.
pub fn psd_binned(pdf: &JointAoaPdf, f_d: f64, n_bins: usize) -> Result<DopplerSpectrum> {
    psd_binned_with(pdf, f_d, n_bins, BINNED_AZIMUTH_CELLS)
}

/// [`psd_binned`] with an explicit azimuth resolution.
///
/// For each azimuth midpoint the map `beta -> cos(alpha) cos(beta)` is
/// monotone, so the elevation range splits exactly at the cell edges; each
/// piece is integrated with 5-point Gauss-Legendre.
pub fn psd_binned_with(
    pdf: &JointAoaPdf,
    f_d: f64,
    n_bins: usize,
    azimuth_cells_per_turn: usize,
) -> Result<DopplerSpectrum> {
    if n_bins < 8 {
        return Err(Error::invalid(format!("need at least 8 frequency bins, got {n_bins}")));
    }
    if azimuth_cells_per_turn < 4 {
        return Err(Error::invalid("azimuth resolution too coarse"));
    }
    let axes = &pdf.axes;
    let se_ce = pdf.elevation.folded_sin_cos();
    let scale = pdf.normalization / (TAU * axes.a * axes.b * axes.c);
    let w = 2.0 / n_bins as f64;
    let edges: Vec<f64> = (0..=n_bins).map(|k| -1.0 + k as f64 * w).collect();
    let mut mass = alloc::vec![0.0; n_bins];
    let mut cuts: Vec<f64> = Vec::with_capacity(n_bins + 2);

    for &(lo, hi) in pdf.support.intervals() {
        let cells = ((azimuth_cells_per_turn as f64) * (hi - lo) / TAU).ceil().max(1.0) as usize;
        let ha = (hi - lo) / cells as f64;
        for i in 0..cells {
            let sc_a = (lo + (i as f64 + 0.5) * ha).sin_cos();
            let ca = sc_a.1;
            cuts.clear();
            cuts.push(0.0);
            for &e in &edges {
                let t = e / ca;
                if t > 0.0 && t < 1.0 {
                    cuts.push(t.acos());
                }
            }
            cuts.push(FRAC_PI_2);
            cuts.sort_by(f64::total_cmp);
            for seg in cuts.windows(2) {
                let (b0, b1) = (seg[0], seg[1]);
                if !(b1 > b0) {
                    continue;
                }
                let (mid, half) = (0.5 * (b0 + b1), 0.5 * (b1 - b0));
                let nu = ca * mid.cos();
                let bin = (((nu + 1.0) / w) as usize).min(n_bins - 1);
                let mut acc = 0.0;
                for &(x, gw) in &GAUSS5 {
                    let sc_b = (mid + half * x).sin_cos();
                    let q = inverse_square_range(axes, primed_direction(sc_a, sc_b, se_ce));
                    acc += gw * sc_b.1 / (q * q.sqrt());
                }
                let m = acc * half * ha * scale;
                if !m.is_finite() {
                    return Err(Error::Evaluation2d {
                        alpha: lo + (i as f64 + 0.5) * ha,
                        beta: mid,
                    });
                }
                mass[bin] += m;
            }
        }
    }
    let density = mass.into_iter().map(|m| m / w).collect();
    Ok(finish(DopplerSpectrum::from_density(density, f_d)?, pdf))
}

/// Adds a LOS line with Rician factor `k` at normalized frequency `f_los`.
///
/// The continuous part is renormalized to unit mass and then scaled by
/// `1 / (k + 1)`; the line carries `k / (k + 1)`.
pub fn compose_rician(nlos: &DopplerSpectrum, k: f64, f_los: f64) -> Result<DopplerSpectrum> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::invalid(format!(
            "Rician factor must be finite and non-negative, got {k}"
        )));
    }
    if !(-1.0..=1.0).contains(&f_los) {
        return Err(Error::invalid(format!(
            "LOS frequency must lie in [-1, 1], got {f_los}"
        )));
    }
    if !nlos.lines.is_empty() {
        return Err(Error::invalid("spectrum already has a line component"));
    }
    let mass = nlos.mass();
    if !(mass > 0.0) {
        return Err(Error::invalid("NLOS spectrum carries no power"));
    }
    let continuous = 1.0 / (k + 1.0);
    let mut out = nlos.clone();
    for d in &mut out.density {
        *d *= continuous / mass;
    }
    out.continuous_power = continuous;
    out.lines.push(SpectralLine {
        freq: f_los,
        power: k / (k + 1.0),
    });
    Ok(out)
}

/// Mirrors the spectrum about `nu = 0`.
pub fn flip_spectrum(s: &DopplerSpectrum) -> DopplerSpectrum {
    let mut out = s.clone();
    out.density.reverse();
    for l in &mut out.lines {
        l.freq = -l.freq;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular_pdf::AzimuthSupport;
    use crate::geometry::{ElevationAngle, EllipsoidAxes};
    use proptest::prelude::*;

    fn deg(d: f64) -> ElevationAngle {
        ElevationAngle::from_degrees(d).unwrap()
    }

    fn pdf(e: f64) -> JointAoaPdf {
        JointAoaPdf::new(EllipsoidAxes::new(150.0, 90.0, 60.0).unwrap(), deg(e))
    }

    fn sphere(e: f64) -> JointAoaPdf {
        JointAoaPdf::new(EllipsoidAxes::sphere(10.0).unwrap(), deg(e))
    }

    #[test]
    fn autocorrelation_examples() {
        let q = QuadratureSpec::trapezoid(300);
        let lags = [0.0, 1e-3, -1e-3, 2.5e-3, -2.5e-3, 7e-3, -7e-3];
        let r = autocorrelation(&pdf(35.0), 200.0, &lags, &q).unwrap();
        assert_eq!(r.values[0], Complex64::new(1.0, 0.0));
        for k in (1..lags.len()).step_by(2) {
            assert!((r.values[k] - r.values[k + 1].conj()).norm() < 1e-12);
        }
        let s = autocorrelation(&sphere(35.0), 200.0, &lags, &q).unwrap();
        assert!(s.values.iter().all(|v| v.im.abs() < 1e-6));
    }

    // Uniform direction over the upper hemisphere: nu = cos(a) cos(b) is
    // uniform on [-1, 1], so the sphere spectrum is flat at 1/2.
    #[test]
    fn sphere_spectrum_is_flat() {
        let d = psd_delta(&sphere(20.0), 1.0, &QuadratureSpec::midpoint(400)).unwrap();
        assert!(
            d.density().iter().all(|x| (x - 0.5).abs() < 2e-3),
            "{:?}",
            &d.density()[..5]
        );
        let b = psd_binned(&sphere(20.0), 1.0, 51).unwrap();
        assert!(b.density().iter().all(|x| (x - 0.5).abs() < 1e-3), "{:?}", b.density());
        assert!(d.mirrored_l1() < 1e-3);
    }

    #[test]
    fn methods_agree() {
        for e in [0.0, 50.0, 90.0] {
            let p = pdf(e);
            let d = psd_delta(&p, 1.0, &QuadratureSpec::midpoint(1000)).unwrap();
            let b = psd_binned(&p, 1.0, 201).unwrap();
            let l1 = d.rebin(201).unwrap().l1_distance(&b).unwrap();
            assert!(l1 < 0.02, "{e}: {l1}");
            assert!((b.mass() - 1.0).abs() < 1e-3);
            assert!((d.mass() - 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn delta_rejects_asymmetric_support() {
        let support = AzimuthSupport::arc_degrees(0.0, 270.0).unwrap();
        let p = JointAoaPdf::with_support(pdf(30.0).axes, deg(30.0), support, &QuadratureSpec::trapezoid(300)).unwrap();
        assert_eq!(
            psd_delta(&p, 1.0, &QuadratureSpec::default()),
            Err(Error::UnsupportedTransform)
        );
        let b = psd_binned(&p, 1.0, 101).unwrap();
        assert!((b.mass() - 1.0).abs() < 1e-3);
        assert!(b.density_above_zero() < b.density_below_zero());
        assert!((b.support_mass() - p.support_mass()).abs() == 0.0);
    }

    #[test]
    fn binned_argument_checks() {
        assert!(psd_binned(&pdf(10.0), 1.0, 7).is_err());
        assert!(psd_binned(&pdf(10.0), 1.0, 8).is_ok());
    }

    #[test]
    fn skew_and_receding_flip() {
        let fwd = psd_binned(&pdf(20.0), 1.0, 101).unwrap();
        assert!(fwd.positive_fraction() > 0.5);
        let back = psd_binned(&pdf(160.0), 1.0, 101).unwrap();
        assert_eq!(back, flip_spectrum(&fwd));
        let lags = [0.0, 3e-3, 1e-2];
        let q = QuadratureSpec::trapezoid(200);
        let r_fwd = autocorrelation(&pdf(20.0), 100.0, &lags, &q).unwrap();
        let r_back = autocorrelation(&pdf(160.0), 100.0, &lags, &q).unwrap();
        for (a, b) in r_fwd.values.iter().zip(&r_back.values) {
            assert!((a.conj() - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fourier_consistency() {
        let p = pdf(40.0);
        let f_d = 50.0;
        let lags: Vec<f64> = (0..10).map(|k| k as f64 * 0.37 / f_d).collect();
        let r = autocorrelation(&p, f_d, &lags, &QuadratureSpec::default()).unwrap();
        let s = psd_binned(&p, f_d, 201).unwrap();
        let d = r.sup_distance(&s.inverse_transform(&lags)).unwrap();
        assert!(d < 1e-2, "{d}");
    }

    #[test]
    fn rician_examples() {
        let s = psd_binned(&pdf(30.0), 1.0, 41).unwrap();
        for (k, line) in [(0.0, 0.0), (1.0, 0.5), (9.0, 0.9)] {
            let c = compose_rician(&s, k, 0.3).unwrap();
            assert_eq!(c.lines()[0].power, line);
            assert_eq!(c.continuous_power(), 1.0 / (k + 1.0));
            assert_eq!(c.total_power(), 1.0);
            assert!((c.mass() - 1.0 / (k + 1.0)).abs() < 1e-12);
        }
        assert!(compose_rician(&s, -0.1, 0.0).is_err());
        let c = compose_rician(&s, 1.0, 0.0).unwrap();
        assert!(compose_rician(&c, 1.0, 0.0).is_err());
    }

    #[test]
    fn discontinuity_cells() {
        let odd = DopplerSpectrum::from_density((0..9).map(|i| i as f64).collect(), 1.0).unwrap();
        assert_eq!((odd.density_below_zero(), odd.density_above_zero()), (3.0, 5.0));
        let even = DopplerSpectrum::from_density((0..8).map(|i| i as f64).collect(), 1.0).unwrap();
        assert_eq!((even.density_below_zero(), even.density_above_zero()), (3.0, 4.0));
        assert_eq!(odd.positive_mass(), (5.0 + 6.0 + 7.0 + 8.0 + 2.0) * 2.0 / 9.0);
    }

    #[test]
    fn rebin_conserves_mass() {
        let s = DopplerSpectrum::from_density((0..1000).map(|i| ((i * 37) % 11) as f64).collect(), 1.0).unwrap();
        for n in [201, 101, 7, 1000, 3001] {
            let r = s.rebin(n).unwrap();
            assert!((r.mass() - s.mass()).abs() < 1e-12 * s.mass(), "{n}");
        }
        let flat = DopplerSpectrum::from_density(alloc::vec![0.5; 1000], 1.0).unwrap();
        assert!(flat
            .rebin(201)
            .unwrap()
            .density()
            .iter()
            .all(|d| (d - 0.5).abs() < 1e-12));
    }

    proptest! {
        #[test]
        fn flip_is_an_exact_involution(
            density in proptest::collection::vec(0.0..10.0f64, 2..64),
            k in 0.0..20.0f64,
            f in -1.0..1.0f64,
        ) {
            let s = compose_rician(&DopplerSpectrum::from_density(density, 3.0).unwrap(), k, f).unwrap();
            let f1 = flip_spectrum(&s);
            prop_assert_eq!(&flip_spectrum(&f1), &s);
            prop_assert_eq!(f1.mass(), s.mass());
            prop_assert_eq!(f1.total_power(), s.total_power());
        }

        #[test]
        fn symmetric_spectra_are_fixed_by_flip(half in proptest::collection::vec(0.0..10.0f64, 1..32)) {
            let mut d = half.clone();
            d.extend(half.iter().rev());
            let s = DopplerSpectrum::from_density(d, 1.0).unwrap();
            prop_assert_eq!(flip_spectrum(&s), s);
        }
    }
}
