//! Excess-path moments, RMS delay spread and the elevation-to-delay-spread
//! schedule.
//!
//! Moments are computed in metres over the uniform scatterer volume and
//! converted to seconds once at the end.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::{inverse_square_range, primed_direction, ElevationAngle, EllipsoidAxes};
use crate::numerics::{self, Bracket, QuadratureSpec};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// First and second moments of the excess path length `r - x'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcessMoments {
    /// Metres.
    pub mean: f64,
    /// Square metres.
    pub second: f64,
}

impl ExcessMoments {
    pub fn variance(&self) -> f64 {
        self.second - self.mean * self.mean
    }
}

/// Both excess-path moments from one pass over the angular grid.
///
/// Integrating the range out analytically leaves
/// `E[r - x'] = 3/(8 pi abc) * iint (1 - x'_hat) cos(beta) r_max^4` and
/// `E[(r - x')^2] = 3/(10 pi abc) * iint (1 - x'_hat)^2 cos(beta) r_max^5`
/// over `alpha in [0, 2 pi]`, `beta in [0, pi/2]`.
pub fn excess_moments(axes: &EllipsoidAxes, elevation: ElevationAngle, quad: &QuadratureSpec) -> Result<ExcessMoments> {
    let alpha_bracket = Bracket::new(0.0, TAU)?;
    let beta_bracket = Bracket::new(0.0, FRAC_PI_2)?;
    let se_ce = elevation.folded_sin_cos();
    let abc = axes.a * axes.b * axes.c;

    let [m1, m2] = numerics::refine(quad, |n| {
        let alpha: Vec<_> = numerics::nodes(alpha_bracket, n, quad.rule)
            .into_iter()
            .map(|(a, w)| (a.sin_cos(), w))
            .collect();
        let beta: Vec<_> = numerics::nodes(beta_bracket, n, quad.rule)
            .into_iter()
            .map(|(b, w)| (b.sin_cos(), w))
            .collect();
        let (mut s1, mut s2) = (0.0, 0.0);
        for &(sc_a, wa) in &alpha {
            let (mut r1, mut r2) = (0.0, 0.0);
            for &(sc_b, wb) in &beta {
                let dir = primed_direction(sc_a, sc_b, se_ce);
                let q = inverse_square_range(axes, dir);
                let r4 = 1.0 / (q * q);
                let r5 = r4 / q.sqrt();
                let excess = 1.0 - dir.0;
                let w = wb * sc_b.1;
                r1 += w * excess * r4;
                r2 += w * excess * excess * r5;
            }
            s1 += wa * r1;
            s2 += wa * r2;
        }
        if !s1.is_finite() || !s2.is_finite() {
            return Err(Error::Inconsistent(format!("non-finite moment integral for {axes:?}")));
        }
        Ok([3.0 / (8.0 * PI * abc) * s1, 3.0 / (10.0 * PI * abc) * s2])
    })?;
    Ok(ExcessMoments { mean: m1, second: m2 })
}

/// Mean of `r - x'` over the scatterer volume (m).
pub fn mean_excess_distance(axes: &EllipsoidAxes, elevation: ElevationAngle, quad: &QuadratureSpec) -> Result<f64> {
    Ok(excess_moments(axes, elevation, quad)?.mean)
}

/// Mean of `(r - x')^2` over the scatterer volume (m^2).
pub fn second_moment_excess(axes: &EllipsoidAxes, elevation: ElevationAngle, quad: &QuadratureSpec) -> Result<f64> {
    Ok(excess_moments(axes, elevation, quad)?.second)
}

/// RMS delay spread in seconds.
pub fn rms_delay_spread(axes: &EllipsoidAxes, elevation: ElevationAngle, quad: &QuadratureSpec) -> Result<f64> {
    let m = excess_moments(axes, elevation, quad)?;
    let var = m.variance();
    if var < -1e-12 * m.second {
        return Err(Error::Inconsistent(format!(
            "negative excess-delay variance {var} m^2 for {axes:?}"
        )));
    }
    Ok(var.max(0.0).sqrt() / SPEED_OF_LIGHT)
}

/// Piecewise-linear RMS delay spread target as a function of elevation.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySpreadSchedule {
    knots: Vec<(f64, f64)>,
}

/// Default knots: (elevation in degrees, RMS delay spread in ns).
pub const DEFAULT_KNOTS: [(f64, f64); 10] = [
    (0.0, 250.0),
    (10.0, 183.7667),
    (20.0, 125.1762),
    (30.0, 85.4138),
    (40.0, 63.7133),
    (50.0, 50.0438),
    (60.0, 40.9588),
    (70.0, 34.9798),
    (80.0, 31.5052),
    (90.0, 30.0),
];

impl Default for DelaySpreadSchedule {
    fn default() -> Self {
        DelaySpreadSchedule {
            knots: DEFAULT_KNOTS.to_vec(),
        }
    }
}

impl DelaySpreadSchedule {
    /// Knots must start at 0 degrees, end at 90 and increase strictly; every
    /// delay spread must be positive.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        let (first, last) = match (knots.first(), knots.last()) {
            (Some(f), Some(l)) if knots.len() >= 2 => (f.0, l.0),
            _ => return Err(Error::invalid("schedule needs at least two knots")),
        };
        if first != 0.0 || last != 90.0 {
            return Err(Error::invalid(format!(
                "schedule must span 0 to 90 degrees, got {first} to {last}"
            )));
        }
        if knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::invalid("schedule elevations must increase strictly"));
        }
        if let Some(&(e, s)) = knots.iter().find(|(_, s)| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::invalid(format!(
                "non-positive delay spread {s} ns at {e} degrees"
            )));
        }
        Ok(DelaySpreadSchedule { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }
}

/// Target RMS delay spread in nanoseconds at `elevation_deg`.
pub fn delay_spread_target(elevation_deg: f64, schedule: &DelaySpreadSchedule) -> Result<f64> {
    if !(0.0..=90.0).contains(&elevation_deg) {
        return Err(Error::invalid(format!(
            "elevation must lie in [0, 90] degrees, got {elevation_deg}"
        )));
    }
    let k = &schedule.knots;
    let i = k.partition_point(|&(e, _)| e <= elevation_deg).clamp(1, k.len() - 1);
    let ((e0, s0), (e1, s1)) = (k[i - 1], k[i]);
    if elevation_deg == e1 {
        return Ok(s1);
    }
    let t = (elevation_deg - e0) / (e1 - e0);
    Ok(s0 + t * (s1 - s0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(d: f64) -> ElevationAngle {
        ElevationAngle::from_degrees(d).unwrap()
    }

    // Closed forms for a sphere of radius R (scatterers in the upper half):
    // E[r - x'] = (3R/8)(2 - sin e), E[(r - x')^2] at e = 0 is 4R^2/5.
    #[test]
    fn sphere_moments_match_closed_form() {
        let q = QuadratureSpec::default();
        let r = 7.0;
        let s = EllipsoidAxes::sphere(r).unwrap();
        for e in [0.0, 30.0, 90.0] {
            let m = mean_excess_distance(&s, deg(e), &q).unwrap();
            let want = 3.0 * r / 8.0 * (2.0 - deg(e).radians().sin());
            assert!((m - want).abs() < 1e-3 * r, "{e}: {m} vs {want}");
        }
        let m2 = second_moment_excess(&s, deg(0.0), &q).unwrap();
        assert!((m2 - 0.8 * r * r).abs() < 1e-3 * r * r, "{m2}");
    }

    #[test]
    fn sphere_rms_delay() {
        let s = EllipsoidAxes::sphere(1.0).unwrap();
        let sigma = rms_delay_spread(&s, deg(0.0), &QuadratureSpec::default()).unwrap();
        let want = (0.8f64 - 0.5625).sqrt() / SPEED_OF_LIGHT;
        assert!((sigma / want - 1.0).abs() < 1e-3);
        assert!((want * SPEED_OF_LIGHT - 0.48734).abs() < 1e-5);
    }

    #[test]
    fn tiny_volume_has_vanishing_spread() {
        let s = EllipsoidAxes::sphere(1e-9).unwrap();
        let sigma = rms_delay_spread(&s, deg(20.0), &QuadratureSpec::default()).unwrap();
        assert!(sigma < 1e-17);
    }

    #[test]
    fn mean_is_bounded_and_variance_non_negative() {
        let q = QuadratureSpec::trapezoid(300);
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let axes = EllipsoidAxes::new(10.0 + 140.0 * next(), 10.0 + 140.0 * next(), 10.0 + 140.0 * next()).unwrap();
            let e = deg(90.0 * next());
            let m = excess_moments(&axes, e, &q).unwrap();
            let longest = axes.a.max(axes.b).max(axes.c);
            assert!(m.mean >= 0.0 && m.mean <= 2.0 * longest);
            assert!(m.second >= m.mean * m.mean);
        }
    }

    #[test]
    fn schedule_interpolation() {
        let s = DelaySpreadSchedule::default();
        assert_eq!(delay_spread_target(0.0, &s).unwrap(), 250.0);
        assert_eq!(delay_spread_target(90.0, &s).unwrap(), 30.0);
        assert!((delay_spread_target(45.0, &s).unwrap() - 56.87855).abs() < 1e-9);
        assert_eq!(delay_spread_target(40.0, &s).unwrap(), 63.7133);
        assert!(delay_spread_target(-0.5, &s).is_err());
        assert!(delay_spread_target(90.5, &s).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(DelaySpreadSchedule::new(alloc::vec![(0.0, 10.0), (90.0, 5.0)]).is_ok());
        assert!(DelaySpreadSchedule::new(alloc::vec![(0.0, 10.0)]).is_err());
        assert!(DelaySpreadSchedule::new(alloc::vec![(1.0, 10.0), (90.0, 5.0)]).is_err());
        assert!(DelaySpreadSchedule::new(alloc::vec![(0.0, 10.0), (50.0, 7.0), (50.0, 6.0), (90.0, 5.0)]).is_err());
        assert!(DelaySpreadSchedule::new(alloc::vec![(0.0, 10.0), (90.0, 0.0)]).is_err());
    }
}
