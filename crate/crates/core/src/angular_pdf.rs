//! Angle-of-arrival densities of the semi-ellipsoid scatterer model.
//!
//! Integrating the uniform volume density over range gives the joint density
//! `p(alpha, beta) = r_max^3(alpha, beta) cos(beta) / (2 pi abc)` on
//! `alpha in [0, 2 pi)`, `beta in [0, pi/2]`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::{self, ElevationAngle, EllipsoidAxes};
use crate::numerics::{self, Bracket, QuadratureSpec};
use crate::{Error, Result};

/// Allowed azimuths as disjoint half-open intervals inside `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AzimuthSupport {
    intervals: Vec<(f64, f64)>,
}

impl Default for AzimuthSupport {
    fn default() -> Self {
        Self::full()
    }
}

impl AzimuthSupport {
    pub fn full() -> Self {
        AzimuthSupport {
            intervals: alloc::vec![(0.0, TAU)],
        }
    }

    /// Single arc from `lo` to `hi` (radians, `hi > lo`), wrapped into
    /// `[0, 2 pi)`. Arcs of a full turn or more give the full circle.
    pub fn arc(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || !(hi > lo) {
            return Err(Error::invalid(format!("bad azimuth arc [{lo}, {hi}]")));
        }
        if hi - lo >= TAU {
            return Ok(Self::full());
        }
        let start = wrap_turn(lo);
        let end = start + (hi - lo);
        let intervals = if end <= TAU {
            alloc::vec![(start, end)]
        } else {
            alloc::vec![(0.0, end - TAU), (start, TAU)]
        };
        Ok(AzimuthSupport { intervals })
    }

    pub fn arc_degrees(lo: f64, hi: f64) -> Result<Self> {
        if hi - lo >= 360.0 {
            return Ok(Self::full());
        }
        Self::arc(lo.to_radians(), hi.to_radians())
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_full(&self) -> bool {
        self.intervals == [(0.0, TAU)]
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn contains(&self, alpha: f64) -> bool {
        let a = wrap_turn(alpha);
        self.intervals.iter().any(|&(lo, hi)| a >= lo && a < hi)
    }

    /// True when the support is unchanged by `alpha -> -alpha`.
    pub fn is_mirror_symmetric(&self) -> bool {
        if self.is_full() {
            return true;
        }
        let mut mirrored: Vec<(f64, f64)> = self.intervals.iter().map(|&(lo, hi)| (TAU - hi, TAU - lo)).collect();
        mirrored.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut own = self.intervals.clone();
        own.sort_by(|x, y| x.0.total_cmp(&y.0));
        merge(&own)
            .iter()
            .zip(merge(&mirrored).iter())
            .all(|(p, q)| (p.0 - q.0).abs() < 1e-12 && (p.1 - q.1).abs() < 1e-12)
            && merge(&own).len() == merge(&mirrored).len()
    }
}

fn merge(sorted: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for &(lo, hi) in sorted {
        match out.last_mut() {
            Some(last) if lo <= last.1 + 1e-12 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    // An arc touching both 0 and 2 pi is one arc across the seam.
    if out.len() > 1 && out[0].0 < 1e-12 && out[out.len() - 1].1 > TAU - 1e-12 {
        let first = out.remove(0);
        let last = out.last_mut().unwrap();
        last.1 = TAU + first.1;
    }
    out
}

/// Joint AoA density for one geometry and azimuth support.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAoaPdf {
    pub axes: EllipsoidAxes,
    pub elevation: ElevationAngle,
    pub support: AzimuthSupport,
    /// `1 / (probability mass of the support)`; 1 on the full circle.
    pub normalization: f64,
}

impl JointAoaPdf {
    pub fn new(axes: EllipsoidAxes, elevation: ElevationAngle) -> Self {
        JointAoaPdf {
            axes,
            elevation,
            support: AzimuthSupport::full(),
            normalization: 1.0,
        }
    }

    /// Density restricted to `support` and renormalized to unit mass.
    pub fn with_support(
        axes: EllipsoidAxes,
        elevation: ElevationAngle,
        support: AzimuthSupport,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        let mut pdf = Self::new(axes, elevation);
        if support.is_full() {
            return Ok(pdf);
        }
        let mut mass = 0.0;
        for &(lo, hi) in support.intervals() {
            mass += numerics::integrate_2d(
                |a, b| pdf.unnormalized(a, b),
                Bracket::new(lo, hi)?,
                Bracket::new(0.0, FRAC_PI_2)?,
                quad,
            )?;
        }
        if !(mass > 0.0) {
            return Err(Error::invalid("azimuth support carries no probability mass"));
        }
        pdf.support = support;
        pdf.normalization = 1.0 / mass;
        Ok(pdf)
    }

    /// Probability mass of the support under the untruncated density.
    pub fn support_mass(&self) -> f64 {
        1.0 / self.normalization
    }

    #[inline]
    pub(crate) fn unnormalized(&self, alpha: f64, beta: f64) -> f64 {
        let r = geometry::r_max(alpha, beta, &self.axes, self.elevation);
        r * r * r * beta.cos() / (TAU * self.axes.a * self.axes.b * self.axes.c)
    }

    /// `p(alpha, beta)` per rad^2; zero outside the azimuth support.
    pub fn density(&self, alpha: f64, beta: f64) -> f64 {
        if !self.support.contains(alpha) {
            return 0.0;
        }
        self.normalization * self.unnormalized(alpha, beta)
    }
}

pub fn joint_pdf(pdf: &JointAoaPdf, alpha: f64, beta: f64) -> f64 {
    pdf.density(alpha, beta)
}

/// `p(alpha)`, integrating over elevation.
pub fn marginal_azimuth(pdf: &JointAoaPdf, alpha: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !pdf.support.contains(alpha) {
        return Ok(0.0);
    }
    numerics::integrate_1d(|b| pdf.density(alpha, b), Bracket::new(0.0, FRAC_PI_2)?, quad)
}

/// `p(beta)`, integrating over the azimuth support.
pub fn marginal_elevation(pdf: &JointAoaPdf, beta: f64, quad: &QuadratureSpec) -> Result<f64> {
    let mut total = 0.0;
    for &(lo, hi) in pdf.support.intervals() {
        total += numerics::integrate_1d(
            |a| pdf.normalization * pdf.unnormalized(a, beta),
            Bracket::new(lo, hi)?,
            quad,
        )?;
    }
    Ok(total)
}

/// Joint density in `(u, v) = (cos alpha, cos beta)`.
///
/// `alpha -> cos alpha` is two-to-one, so both branches `+-arccos u` are
/// summed. Only defined for supports symmetric under `alpha -> -alpha`; zero
/// outside the open square `(-1, 1) x (0, 1)`.
pub fn uv_pdf(pdf: &JointAoaPdf, u: f64, v: f64) -> Result<f64> {
    if !pdf.support.is_mirror_symmetric() {
        return Err(Error::UnsupportedTransform);
    }
    Ok(uv_density(pdf, u, v))
}

pub(crate) fn uv_density(pdf: &JointAoaPdf, u: f64, v: f64) -> f64 {
    if !(u > -1.0 && u < 1.0 && v > 0.0 && v < 1.0) {
        return 0.0;
    }
    let alpha = u.acos();
    let beta = v.acos();
    let branches = pdf.density(alpha, beta) + pdf.density(-alpha, beta);
    branches / ((1.0 - u * u).sqrt() * (1.0 - v * v).sqrt())
}

/// The representative of an angle in `[0, 2 pi)`.
pub fn wrap_turn(x: f64) -> f64 {
    let r = x % TAU;
    let r = if r < 0.0 { r + TAU } else { r };
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// The `alpha in [-pi, pi)` representative of an azimuth.
pub fn wrap_azimuth(alpha: f64) -> f64 {
    wrap_turn(alpha + PI) - PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GlobalPoint;
    use proptest::prelude::*;

    fn deg(d: f64) -> ElevationAngle {
        ElevationAngle::from_degrees(d).unwrap()
    }

    fn sample_axes() -> EllipsoidAxes {
        EllipsoidAxes::new(140.0, 84.0, 52.0).unwrap()
    }

    #[test]
    fn sphere_joint_density() {
        let pdf = JointAoaPdf::new(EllipsoidAxes::sphere(4.0).unwrap(), deg(25.0));
        for alpha in [0.0, 1.0, 4.0] {
            assert!((joint_pdf(&pdf, alpha, PI / 3.0) - 0.0795775).abs() < 1e-6);
        }
        assert!(joint_pdf(&pdf, 0.3, FRAC_PI_2).abs() < 1e-16);
    }

    #[test]
    fn outside_support_is_zero() {
        let support = AzimuthSupport::arc_degrees(0.0, 270.0).unwrap();
        let pdf = JointAoaPdf::with_support(sample_axes(), deg(30.0), support, &QuadratureSpec::default()).unwrap();
        assert_eq!(joint_pdf(&pdf, 300f64.to_radians(), 0.2), 0.0);
        assert_eq!(joint_pdf(&pdf, -10f64.to_radians(), 0.2), 0.0);
        assert!(joint_pdf(&pdf, 100f64.to_radians(), 0.2) > 0.0);
    }

    #[test]
    fn sphere_marginals() {
        let q = QuadratureSpec::default();
        let pdf = JointAoaPdf::new(EllipsoidAxes::sphere(1.0).unwrap(), deg(60.0));
        for alpha in [0.1, 2.0, 5.0] {
            assert!((marginal_azimuth(&pdf, alpha, &q).unwrap() - 1.0 / TAU).abs() < 1e-6);
        }
        for beta in [0.0, 0.4, 1.2] {
            assert!((marginal_elevation(&pdf, beta, &q).unwrap() - beta.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn marginals_integrate_to_one() {
        let q = QuadratureSpec::trapezoid(400);
        for e in [0.0, 40.0, 90.0] {
            let pdf = JointAoaPdf::new(sample_axes(), deg(e));
            let az = numerics::integrate_1d(
                |a| marginal_azimuth(&pdf, a, &q).unwrap(),
                Bracket::new(0.0, TAU).unwrap(),
                &q,
            )
            .unwrap();
            let el = numerics::integrate_1d(
                |b| marginal_elevation(&pdf, b, &q).unwrap(),
                Bracket::new(0.0, FRAC_PI_2).unwrap(),
                &q,
            )
            .unwrap();
            assert!((az - 1.0).abs() < 1e-3, "{e}: {az}");
            assert!((el - 1.0).abs() < 1e-3, "{e}: {el}");
        }
    }

    #[test]
    fn truncated_support_is_renormalized() {
        let q = QuadratureSpec::midpoint(400);
        let support = AzimuthSupport::arc_degrees(0.0, 270.0).unwrap();
        let pdf = JointAoaPdf::with_support(sample_axes(), deg(45.0), support, &q).unwrap();
        assert!(pdf.support_mass() > 0.5 && pdf.support_mass() < 1.0);
        let total = numerics::integrate_2d(
            |a, b| pdf.density(a, b),
            Bracket::new(0.0, 1.5 * PI).unwrap(),
            Bracket::new(0.0, FRAC_PI_2).unwrap(),
            &q,
        )
        .unwrap();
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }

    #[test]
    fn zero_elevation_azimuth_peaks_along_los() {
        let q = QuadratureSpec::trapezoid(400);
        let pdf = JointAoaPdf::new(EllipsoidAxes::new(155.0, 93.0, 65.0).unwrap(), deg(0.0));
        let at = |d: f64| marginal_azimuth(&pdf, d.to_radians(), &q).unwrap();
        for peak in [0.0, 180.0] {
            assert!(at(peak) > at(peak - 2.0) && at(peak) > at(peak + 2.0));
            assert!(at(peak) > at(90.0));
        }
    }

    #[test]
    fn uv_examples() {
        let sphere = JointAoaPdf::new(EllipsoidAxes::sphere(2.0).unwrap(), deg(10.0));
        assert!((uv_pdf(&sphere, 0.0, 0.5).unwrap() - 0.18377).abs() < 1e-4);
        for (u, v) in [(0.3, 0.2), (0.8, 0.9), (0.05, 0.5)] {
            let p = uv_pdf(&sphere, u, v).unwrap();
            let m = uv_pdf(&sphere, -u, v).unwrap();
            assert!((p - m).abs() < 1e-12 * p);
            let closed = v / (PI * (1.0 - u * u).sqrt() * (1.0 - v * v).sqrt());
            assert!((p - closed).abs() < 1e-12 * closed);
        }
        let cut = AzimuthSupport::arc_degrees(0.0, 270.0).unwrap();
        let pdf = JointAoaPdf::with_support(sample_axes(), deg(30.0), cut, &QuadratureSpec::trapezoid(200)).unwrap();
        assert_eq!(uv_pdf(&pdf, 0.1, 0.1), Err(Error::UnsupportedTransform));
    }

    // Both axes carry inverse-square-root edges, so the midpoint error only
    // shrinks like sqrt(h).
    #[test]
    fn uv_density_is_normalized() {
        let pdf = JointAoaPdf::new(sample_axes(), deg(35.0));
        let q = QuadratureSpec::midpoint(4000);
        let total = numerics::integrate_2d(
            |u, v| uv_pdf(&pdf, u, v).unwrap(),
            Bracket::new(-1.0, 1.0).unwrap(),
            Bracket::new(0.0, 1.0).unwrap(),
            &q,
        )
        .unwrap();
        assert!((total - 1.0).abs() < 2e-2, "{total}");
    }

    #[test]
    fn support_symmetry() {
        assert!(AzimuthSupport::full().is_mirror_symmetric());
        assert!(AzimuthSupport::arc_degrees(-90.0, 90.0).unwrap().is_mirror_symmetric());
        assert!(AzimuthSupport::arc_degrees(90.0, 270.0).unwrap().is_mirror_symmetric());
        assert!(!AzimuthSupport::arc_degrees(0.0, 270.0).unwrap().is_mirror_symmetric());
        assert!(AzimuthSupport::arc_degrees(0.0, 360.0).unwrap().is_full());
        assert!(AzimuthSupport::arc(1.0, 1.0).is_err());
        let wrapped = AzimuthSupport::arc_degrees(300.0, 400.0).unwrap();
        assert_eq!(wrapped.intervals().len(), 2);
        assert!(wrapped.contains(10f64.to_radians()) && !wrapped.contains(50f64.to_radians()));
    }

    // Finite-difference Jacobian of (r, alpha, beta) -> (x, y, z): |J| = r^2 cos(beta).
    #[test]
    fn spherical_jacobian() {
        let map = |r: f64, a: f64, b: f64| {
            let p = GlobalPoint::from_spherical(r, a, b);
            [p.x, p.y, p.z]
        };
        let h = 1e-6;
        for &(r, a, b) in &[(3.0, 0.4, 0.2), (50.0, -2.0, 1.1), (0.7, 3.0, 0.05)] {
            let col = |k: usize| {
                let mut lo = [r, a, b];
                let mut hi = [r, a, b];
                lo[k] -= h;
                hi[k] += h;
                let (p, q) = (map(lo[0], lo[1], lo[2]), map(hi[0], hi[1], hi[2]));
                [
                    (q[0] - p[0]) / (2.0 * h),
                    (q[1] - p[1]) / (2.0 * h),
                    (q[2] - p[2]) / (2.0 * h),
                ]
            };
            let (c0, c1, c2) = (col(0), col(1), col(2));
            let det = c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) - c1[0] * (c0[1] * c2[2] - c0[2] * c2[1])
                + c2[0] * (c0[1] * c1[2] - c0[2] * c1[1]);
            let want = r * r * b.cos();
            assert!((det.abs() - want).abs() < 1e-6 * want.max(1.0), "{det} vs {want}");
        }
    }

    proptest! {
        #[test]
        fn joint_density_is_even_in_azimuth(
            a in 5.0..200.0f64, b in 5.0..200.0f64, c in 5.0..200.0f64,
            alpha in 0.0..PI, beta in 0.0..FRAC_PI_2, e in 0.0..90.0f64
        ) {
            let pdf = JointAoaPdf::new(EllipsoidAxes::new(a, b, c).unwrap(), deg(e));
            let p = pdf.density(alpha, beta);
            let m = pdf.density(-alpha, beta);
            prop_assert!((p - m).abs() <= 1e-12 * p.max(1e-300));
        }

        #[test]
        fn joint_density_normalizes(
            a in 10.0..200.0f64, b in 10.0..200.0f64, c in 10.0..200.0f64, e in 0.0..90.0f64
        ) {
            // Thin volumes need a finer grid than the default; keep the axes
            // within a factor 20 of one another.
            prop_assume!(a.max(b).max(c) < 20.0 * a.min(b).min(c));
            let pdf = JointAoaPdf::new(EllipsoidAxes::new(a, b, c).unwrap(), deg(e));
            let total = numerics::integrate_2d(
                |x, y| pdf.density(x, y),
                Bracket::new(0.0, TAU).unwrap(),
                Bracket::new(0.0, FRAC_PI_2).unwrap(),
                &QuadratureSpec::default(),
            ).unwrap();
            prop_assert!((total - 1.0).abs() < 1e-3, "{}", total);
        }
    }
}
