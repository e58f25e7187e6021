//! Rotated semi-ellipsoid scatterer geometry.
//!
//! The receiver sits at the origin of a global frame `(x, y, z)` with `z` up.
//! The ellipsoid `x'^2/a^2 + y'^2/b^2 + z'^2/c^2 <= 1` lives in a primed frame
//! obtained by rotating about `y` by the elevation angle, so that `a` points
//! along the line of sight. Only the part with `z >= 0` holds scatterers.
//!
//! Elevations above 90 degrees describe a receding satellite. They are folded
//! to `180 - elevation` for all geometry; the Doppler sign carries the rest.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::delay_stats;
use crate::numerics::{self, Bracket, QuadratureSpec};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Satellite line-of-sight elevation. Stored in degrees so that folding
/// `180 - e` is exact.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ElevationAngle {
    degrees: f64,
}

impl ElevationAngle {
    pub fn from_degrees(degrees: f64) -> Result<Self> {
        if !(0.0..=180.0).contains(&degrees) {
            return Err(Error::invalid(format!(
                "elevation must lie in [0, 180] degrees, got {degrees}"
            )));
        }
        Ok(ElevationAngle { degrees })
    }

    pub fn from_radians(radians: f64) -> Result<Self> {
        Self::from_degrees(radians.to_degrees())
    }

    pub fn degrees(&self) -> f64 {
        self.degrees
    }

    pub fn radians(&self) -> f64 {
        self.degrees.to_radians()
    }

    /// Elevation used to build the scatterer geometry, in `[0, 90]` degrees.
    pub fn folded_degrees(&self) -> f64 {
        if self.degrees > 90.0 {
            180.0 - self.degrees
        } else {
            self.degrees
        }
    }

    pub fn folded_radians(&self) -> f64 {
        self.folded_degrees().to_radians()
    }

    pub fn folded(&self) -> ElevationAngle {
        ElevationAngle {
            degrees: self.folded_degrees(),
        }
    }

    /// Satellite moving away from the receiver (`f_d < 0`).
    pub fn is_receding(&self) -> bool {
        self.degrees > 90.0
    }

    pub fn doppler_sign(&self) -> f64 {
        if self.is_receding() {
            -1.0
        } else {
            1.0
        }
    }

    pub fn is_zenith(&self) -> bool {
        self.folded_degrees() == 90.0
    }

    /// `(sin, cos)` of the folded angle, with the exact values at 0 and 90.
    pub(crate) fn folded_sin_cos(&self) -> (f64, f64) {
        let d = self.folded_degrees();
        if d == 0.0 {
            (0.0, 1.0)
        } else if d == 90.0 {
            (1.0, 0.0)
        } else {
            d.to_radians().sin_cos()
        }
    }
}

/// Semi-axis lengths in metres: `a` along the line of sight, `b` cross-track,
/// `c` along the rotated vertical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidAxes {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl EllipsoidAxes {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("semi-axis {name} must be positive, got {v}")));
            }
        }
        Ok(EllipsoidAxes { a, b, c })
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        Self::new(radius, radius, radius)
    }

    /// Volume of the full ellipsoid divided by two.
    pub fn half_volume(&self) -> f64 {
        2.0 / 3.0 * core::f64::consts::PI * self.a * self.b * self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl GlobalPoint {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Point at range `r` in direction `(alpha, beta)`.
    pub fn from_spherical(r: f64, alpha: f64, beta: f64) -> Self {
        let (sa, ca) = alpha.sin_cos();
        let (sb, cb) = beta.sin_cos();
        GlobalPoint {
            x: r * ca * cb,
            y: r * sa * cb,
            z: r * sb,
        }
    }
}

impl RotatedPoint {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Left-hand side of the ellipsoid inequality.
    pub fn ellipsoid_level(&self, axes: &EllipsoidAxes) -> f64 {
        let (x, y, z) = (self.x / axes.a, self.y / axes.b, self.z / axes.c);
        x * x + y * y + z * z
    }
}

/// Rotates global coordinates into the ellipsoid frame (rotation about `y`).
/// Uses the raw, unfolded angle.
pub fn rotate_to_prime(p: GlobalPoint, elevation: ElevationAngle) -> RotatedPoint {
    let (s, c) = elevation.radians().sin_cos();
    RotatedPoint {
        x: p.x * c + p.z * s,
        y: p.y,
        z: -p.x * s + p.z * c,
    }
}

/// Transpose of [`rotate_to_prime`].
pub fn rotate_to_global(p: RotatedPoint, elevation: ElevationAngle) -> GlobalPoint {
    let (s, c) = elevation.radians().sin_cos();
    GlobalPoint {
        x: p.x * c - p.z * s,
        y: p.y,
        z: p.x * s + p.z * c,
    }
}

/// Components of the unit direction `(alpha, beta)` in the primed frame,
/// given `(sin, cos)` of the folded elevation.
#[inline]
pub(crate) fn primed_direction((sa, ca): (f64, f64), (sb, cb): (f64, f64), (se, ce): (f64, f64)) -> (f64, f64, f64) {
    let xp = ca * cb * ce + sb * se;
    let yp = sa * cb;
    let zp = sb * ce - ca * cb * se;
    (xp, yp, zp)
}

#[inline]
pub(crate) fn inverse_square_range(axes: &EllipsoidAxes, (xp, yp, zp): (f64, f64, f64)) -> f64 {
    let (x, y, z) = (xp / axes.a, yp / axes.b, zp / axes.c);
    x * x + y * y + z * z
}

/// Distance from the receiver to the ellipsoid surface in direction
/// `(alpha, beta)`.
pub fn r_max(alpha: f64, beta: f64, axes: &EllipsoidAxes, elevation: ElevationAngle) -> f64 {
    let dir = primed_direction(alpha.sin_cos(), beta.sin_cos(), elevation.folded_sin_cos());
    1.0 / inverse_square_range(axes, dir).sqrt()
}

/// Excess delay (s) of the single-bounce path through a scatterer at range
/// `r` in direction `(alpha, beta)`, relative to the direct path.
pub fn relative_delay(alpha: f64, beta: f64, r: f64, elevation: ElevationAngle) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::invalid(format!("range must be non-negative, got {r}")));
    }
    let (xp, _, _) = primed_direction(alpha.sin_cos(), beta.sin_cos(), elevation.folded_sin_cos());
    Ok(r * (1.0 - xp) / SPEED_OF_LIGHT)
}

fn los_plane_extent(axes: &EllipsoidAxes, elevation: ElevationAngle) -> f64 {
    let (s, c) = elevation.folded_sin_cos();
    1.0 / (c * c / (axes.a * axes.a) + s * s / (axes.c * axes.c)).sqrt()
}

/// Smallest `x'` reached by a scatterer (the point farthest from the
/// satellite), attained at `alpha = -pi`, `beta = 0`.
pub fn x_prime_min(axes: &EllipsoidAxes, elevation: ElevationAngle) -> f64 {
    let (_, c) = elevation.folded_sin_cos();
    -c * los_plane_extent(axes, elevation)
}

/// Largest excess delay over the scatterer volume, in seconds.
pub fn max_relative_delay(axes: &EllipsoidAxes, elevation: ElevationAngle) -> f64 {
    let (_, c) = elevation.folded_sin_cos();
    (1.0 + c) * los_plane_extent(axes, elevation) / SPEED_OF_LIGHT
}

/// Highest point of the scatterer volume above the receiver.
pub fn max_height(axes: &EllipsoidAxes, elevation: ElevationAngle) -> f64 {
    let (s, c) = elevation.folded_sin_cos();
    ((axes.a * s).powi(2) + (axes.c * c).powi(2)).sqrt()
}

/// Rotated-vertical semi-axis that makes the volume exactly `height` tall.
pub fn c_from_a(a: f64, height: f64, elevation: ElevationAngle) -> Result<f64> {
    if elevation.is_zenith() {
        return Err(Error::DegenerateAngle(
            "c is undetermined by the height at 90 degrees elevation; a equals the height there".into(),
        ));
    }
    let (s, c) = elevation.folded_sin_cos();
    if a * s > height {
        return Err(Error::InfeasibleGeometry(format!(
            "a = {a} m rises above the height limit {height} m at {} degrees",
            elevation.folded_degrees()
        )));
    }
    let num = (height * height - (a * s).powi(2)).max(0.0);
    Ok((num / (c * c)).sqrt())
}

/// How the third condition on the axes is closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Closure {
    /// Fix `b / a`.
    AxisRatio(f64),
    /// Fix the maximum excess delay (s).
    MaxRelativeDelay(f64),
}

impl Default for Closure {
    fn default() -> Self {
        Closure::AxisRatio(0.6)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentSpec {
    /// Maximum building height (m).
    pub height: f64,
    pub elevation: ElevationAngle,
    /// Target RMS delay spread (s).
    pub target_rms_delay: f64,
    pub closure: Closure,
}

impl EnvironmentSpec {
    pub fn new(height: f64, elevation: ElevationAngle, target_rms_delay: f64, closure: Closure) -> Result<Self> {
        let spec = EnvironmentSpec {
            height,
            elevation,
            target_rms_delay,
            closure,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.height > 0.0) || !self.height.is_finite() {
            return Err(Error::invalid(format!("height must be positive, got {}", self.height)));
        }
        if !(self.target_rms_delay > 0.0) || !self.target_rms_delay.is_finite() {
            return Err(Error::invalid(format!(
                "target RMS delay spread must be positive, got {}",
                self.target_rms_delay
            )));
        }
        match self.closure {
            Closure::AxisRatio(r) if !(r > 0.0 && r <= 1.0) => {
                Err(Error::invalid(format!("axis ratio must lie in (0, 1], got {r}")))
            }
            Closure::MaxRelativeDelay(d) if !(d > 0.0) || !d.is_finite() => Err(Error::invalid(format!(
                "maximum relative delay must be positive, got {d}"
            ))),
            _ => Ok(()),
        }
    }

    /// Smallest axis length the solver will consider.
    pub fn epsilon(&self) -> f64 {
        1e-3 * self.height
    }
}

/// Number of residual samples used to locate sign changes before refining.
const SCAN_POINTS: usize = 48;
/// Cheap quadrature for the scan; every bracket is re-checked at full
/// resolution before it is refined.
const SCAN_QUADRATURE: usize = 160;
/// Largest ratio between two semi-axes the solver will visit. Beyond this the
/// scatterer volume is a needle or a sheet and the angular quadrature no
/// longer resolves it.
pub const MAX_ASPECT: f64 = 64.0;

/// Solves for the ellipsoid that reproduces the target RMS delay spread.
///
/// The solution is restricted to `a >= c` (`a` stays the semi-major axis in
/// the line-of-sight plane), which under the height constraint is the same as
/// `a >= H`. The free axis is scanned starting from the best-conditioned end
/// and the first root found is returned. With a delay closure `b` is scanned
/// downwards, giving the largest root.
pub fn solve_axes(spec: &EnvironmentSpec, quad: &QuadratureSpec) -> Result<EllipsoidAxes> {
    spec.validate()?;
    let h = spec.height;
    let elevation = spec.elevation.folded();
    let eps = spec.epsilon();
    let target = spec.target_rms_delay;
    let coarse = QuadratureSpec {
        points_per_axis: SCAN_QUADRATURE,
        refine: false,
        ..*quad
    };
    let tol = 1e-12 * h;

    match spec.closure {
        Closure::AxisRatio(ratio) => {
            if elevation.is_zenith() {
                // a = H exactly; c is only bounded by a >= c.
                let build = |c: f64| EllipsoidAxes::new(h, ratio * h, c);
                let grid = linspace(h, eps.max(h / MAX_ASPECT), SCAN_POINTS);
                solve_on_grid(&grid, build, elevation, target, &coarse, quad, tol)
            } else {
                let (s, ce) = elevation.folded_sin_cos();
                let build = |a: f64| {
                    let c = c_from_a(a, h, elevation)?;
                    EllipsoidAxes::new(a, ratio * a, c)
                };
                let grid = if s == 0.0 {
                    geomspace(h, MAX_ASPECT * h, SCAN_POINTS)
                } else {
                    // Walk the height-constraint ellipse a sin(e) = H cos(t),
                    // c cos(e) = H sin(t) from a = c = H towards thinner
                    // volumes, stopping at c = eps or c = a / MAX_ASPECT.
                    let t_eps = (eps * ce / h).asin();
                    let t_aspect = (ce / (MAX_ASPECT * s)).atan();
                    let t_hi = core::f64::consts::FRAC_PI_2 - elevation.folded_radians();
                    let t_lo = t_eps.max(t_aspect).min(t_hi);
                    let mut grid: Vec<f64> = linspace(t_hi, t_lo, SCAN_POINTS)
                        .into_iter()
                        .map(|t| h * t.cos() / s)
                        .collect();
                    grid[0] = h;
                    grid
                };
                solve_on_grid(&grid, build, elevation, target, &coarse, quad, tol)
            }
        }
        Closure::MaxRelativeDelay(max_delay) => {
            let (a, c) = axes_from_height_and_delay(h, max_delay, elevation)?;
            let b_lo = eps.max(a.max(c) / MAX_ASPECT);
            let b_hi = MAX_ASPECT * a.min(c);
            if !(b_lo < b_hi) {
                return Err(Error::InfeasibleGeometry(format!(
                    "a = {a} m and c = {c} m are too eccentric to solve for b"
                )));
            }
            let build = |b: f64| EllipsoidAxes::new(a, b, c);
            // The spread dips slightly as b grows from zero before rising, so
            // a target can have two roots. Scanning down from the top picks
            // the one on the rising branch.
            let grid = geomspace(b_hi, b_lo, SCAN_POINTS);
            solve_on_grid(&grid, build, elevation, target, &coarse, quad, tol)
        }
    }
}

/// `(a, c)` satisfying both the height and the maximum-delay conditions.
///
/// Eliminating `c` leaves a quadratic in `a^2`; of its two roots the one with
/// `a >= c` is taken, or the larger one if neither qualifies.
pub fn axes_from_height_and_delay(height: f64, max_delay: f64, elevation: ElevationAngle) -> Result<(f64, f64)> {
    let elevation = elevation.folded();
    let reach = SPEED_OF_LIGHT * max_delay;
    if elevation.is_zenith() {
        return Ok((height, reach));
    }
    let (s, c) = elevation.folded_sin_cos();
    // Extent of the ellipse along the direction opposite the satellite.
    let extent = reach / (1.0 + c);
    if s == 0.0 {
        return Ok((extent, height));
    }
    let (s2, c2, h2) = (s * s, c * c, height * height);
    let disc = h2 * h2 - 4.0 * s2 * c2 * h2 * extent * extent;
    if disc < 0.0 {
        return Err(Error::InfeasibleGeometry(format!(
            "maximum delay {max_delay} s cannot be met with height {height} m at {} degrees",
            elevation.folded_degrees()
        )));
    }
    let q = 0.5 * (h2 + disc.sqrt());
    let big = q / s2;
    let small = c2 * h2 * extent * extent / q;
    let a_sq = if small >= h2 { small } else { big };
    let a = a_sq.sqrt();
    let c_axis = c_from_a(a, height, elevation)?;
    Ok((a, c_axis))
}

fn linspace(from: f64, to: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i == n - 1 {
                to
            } else {
                from + (to - from) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn geomspace(from: f64, to: f64, n: usize) -> Vec<f64> {
    let ratio = to / from;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                to
            } else {
                from * ratio.powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// Finds the first sign change of `rms(build(x)) - target` along `grid` (in
/// scan order), confirms it at full resolution and refines it.
fn solve_on_grid(
    grid: &[f64],
    build: impl Fn(f64) -> Result<EllipsoidAxes>,
    elevation: ElevationAngle,
    target: f64,
    coarse: &QuadratureSpec,
    fine: &QuadratureSpec,
    abs_tol: f64,
) -> Result<EllipsoidAxes> {
    let residual = |x: f64, q: &QuadratureSpec| -> Result<f64> {
        let axes = build(x)?;
        Ok(delay_stats::rms_delay_spread(&axes, elevation, q)? - target)
    };

    let mut scan = Vec::with_capacity(grid.len());
    for &x in grid {
        scan.push(residual(x, coarse)?);
    }
    for k in 0..grid.len() - 1 {
        if scan[k].signum() == scan[k + 1].signum() {
            continue;
        }
        let (lo, hi) = (grid[k].min(grid[k + 1]), grid[k].max(grid[k + 1]));
        let (r_lo, r_hi) = (residual(lo, fine)?, residual(hi, fine)?);
        if r_lo.signum() == r_hi.signum() && r_lo != 0.0 && r_hi != 0.0 {
            continue;
        }
        let mut failure = None;
        let root = numerics::find_root(
            |x| match residual(x, fine) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            Bracket::new(lo, hi)?,
            abs_tol.max(1e-12 * hi),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        return build(root?);
    }

    let (min, max) = scan.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
        (lo.min(r), hi.max(r))
    });
    Err(Error::UnreachableTarget {
        target,
        min: min + target,
        max: max + target,
    })
}
