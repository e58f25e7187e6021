//! Composite quadrature and bracketed root finding.
//!
//! Everything here is deterministic: nodes are visited in a fixed order and
//! summed sequentially, so repeated calls give bit-identical results.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Maximum number of doublings tried when refinement is enabled.
pub const MAX_DOUBLINGS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Closed rule, endpoints included with half weight.
    Trapezoid,
    /// Open rule: cell midpoints only, safe for integrable endpoint
    /// singularities.
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub points_per_axis: usize,
    pub rule: Rule,
    pub refinement_tolerance: f64,
    /// When set, the point count is doubled until two successive estimates
    /// agree to `refinement_tolerance` (relative), at most [`MAX_DOUBLINGS`]
    /// times.
    pub refine: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            points_per_axis: 1000,
            rule: Rule::Trapezoid,
            refinement_tolerance: 1e-4,
            refine: false,
        }
    }
}

impl QuadratureSpec {
    pub fn trapezoid(points_per_axis: usize) -> Self {
        QuadratureSpec {
            points_per_axis,
            rule: Rule::Trapezoid,
            ..Default::default()
        }
    }

    pub fn midpoint(points_per_axis: usize) -> Self {
        QuadratureSpec {
            points_per_axis,
            rule: Rule::Midpoint,
            ..Default::default()
        }
    }

    pub fn with_refinement(mut self, tolerance: f64) -> Self {
        self.refine = true;
        self.refinement_tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_axis < 2 {
            return Err(Error::invalid(format!(
                "points_per_axis must be at least 2, got {}",
                self.points_per_axis
            )));
        }
        if !(self.refinement_tolerance > 0.0) || !self.refinement_tolerance.is_finite() {
            return Err(Error::invalid(format!(
                "refinement_tolerance must be positive, got {}",
                self.refinement_tolerance
            )));
        }
        Ok(())
    }
}

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
            return Err(Error::invalid(format!("bad bracket [{lo}, {hi}]")));
        }
        Ok(Bracket { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Nodes and weights of the composite `rule` with `n` points on `bracket`.
///
/// For the trapezoid rule the nodes include both endpoints; for the midpoint
/// rule they are the centres of `n` equal cells.
pub fn nodes(bracket: Bracket, n: usize, rule: Rule) -> Vec<(f64, f64)> {
    let (lo, hi) = (bracket.lo, bracket.hi);
    match rule {
        Rule::Trapezoid => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    let x = if i == n - 1 { hi } else { lo + i as f64 * h };
                    let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
                    (x, w)
                })
                .collect()
        }
        Rule::Midpoint => {
            let h = (hi - lo) / n as f64;
            (0..n).map(|i| (lo + (i as f64 + 0.5) * h, h)).collect()
        }
    }
}

/// Runs `estimate` at the configured resolution and, if refinement is on,
/// keeps doubling until every component settles.
pub fn refine<const K: usize>(
    spec: &QuadratureSpec,
    mut estimate: impl FnMut(usize) -> Result<[f64; K]>,
) -> Result<[f64; K]> {
    spec.validate()?;
    let mut n = spec.points_per_axis;
    let mut current = estimate(n)?;
    if !spec.refine {
        return Ok(current);
    }
    let mut previous = current;
    for _ in 0..MAX_DOUBLINGS {
        n *= 2;
        let next = estimate(n)?;
        let settled = current.iter().zip(next.iter()).all(|(&p, &q)| {
            let scale = q.abs().max(f64::MIN_POSITIVE);
            (q - p).abs() <= spec.refinement_tolerance * scale
        });
        if settled {
            return Ok(next);
        }
        previous = current;
        current = next;
    }
    let idx = (0..K)
        .find(|&k| {
            let scale = current[k].abs().max(f64::MIN_POSITIVE);
            (current[k] - previous[k]).abs() > spec.refinement_tolerance * scale
        })
        .unwrap_or(0);
    Err(Error::Convergence {
        previous: previous[idx],
        last: current[idx],
    })
}

// Nodes with weights in units of the step (1/2 or 1 for the trapezoid
// ends and interior, 1 for midpoints) and the step divisor. Scaling once at
// the end keeps constant integrands exact.
fn unit_nodes(bracket: Bracket, n: usize, rule: Rule) -> (Vec<(f64, f64)>, f64) {
    let divisor = match rule {
        Rule::Trapezoid => (n - 1) as f64,
        Rule::Midpoint => n as f64,
    };
    let nodes = nodes(bracket, n, rule)
        .into_iter()
        .enumerate()
        .map(|(i, (x, _))| {
            let w = if rule == Rule::Trapezoid && (i == 0 || i == n - 1) {
                0.5
            } else {
                1.0
            };
            (x, w)
        })
        .collect();
    (nodes, divisor)
}

pub fn integrate_1d(mut f: impl FnMut(f64) -> f64, bracket: Bracket, spec: &QuadratureSpec) -> Result<f64> {
    let [v] = refine(spec, |n| {
        let (nodes, divisor) = unit_nodes(bracket, n, spec.rule);
        let mut sum = 0.0;
        for (x, w) in nodes {
            let y = f(x);
            if !y.is_finite() {
                return Err(Error::Evaluation { node: x });
            }
            sum += w * y;
        }
        Ok([sum * bracket.width() / divisor])
    })?;
    Ok(v)
}

/// Tensor-product composite rule over `alpha_bracket x beta_bracket`.
pub fn integrate_2d(
    mut f: impl FnMut(f64, f64) -> f64,
    alpha_bracket: Bracket,
    beta_bracket: Bracket,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let [v] = refine(spec, |n| {
        let (alpha, da) = unit_nodes(alpha_bracket, n, spec.rule);
        let (beta, db) = unit_nodes(beta_bracket, n, spec.rule);
        let mut sum = 0.0;
        for &(a, wa) in &alpha {
            let mut row = 0.0;
            for &(b, wb) in &beta {
                let y = f(a, b);
                if !y.is_finite() {
                    return Err(Error::Evaluation2d { alpha: a, beta: b });
                }
                row += wb * y;
            }
            sum += wa * (row * beta_bracket.width() / db);
        }
        Ok([sum * alpha_bracket.width() / da])
    })?;
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Acceleration {
    /// Plain bisection.
    None,
    /// Illinois false-position steps, falling back to bisection whenever the
    /// bracket fails to halve over two steps.
    #[default]
    Illinois,
}

/// Bracketed root of `g` to bracket width `tol`.
pub fn find_root(g: impl FnMut(f64) -> f64, bracket: Bracket, tol: f64) -> Result<f64> {
    find_root_with(g, bracket, tol, Acceleration::default())
}

pub fn find_root_with(
    mut g: impl FnMut(f64) -> f64,
    bracket: Bracket,
    tol: f64,
    acceleration: Acceleration,
) -> Result<f64> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::invalid(format!("root tolerance must be positive, got {tol}")));
    }
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (g(a), g(b));
    if !fa.is_finite() {
        return Err(Error::Evaluation { node: a });
    }
    if !fb.is_finite() {
        return Err(Error::Evaluation { node: b });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracketing {
            lo: a,
            hi: b,
            g_lo: fa,
            g_hi: fb,
        });
    }

    // Which end was retained on the previous Illinois step (-1 = a, 1 = b).
    let mut retained = 0i8;
    let mut width_two_ago = f64::INFINITY;
    let mut width_one_ago = b - a;
    // Bisection alone needs ~log2(width / tol) steps; the cap only guards
    // against tolerances below the float spacing.
    for _ in 0..400 {
        if b - a < tol {
            break;
        }
        let bisect = acceleration == Acceleration::None || (b - a) > 0.5 * width_two_ago;
        let mut x = if bisect {
            0.5 * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        if x <= a || x >= b {
            // Bracket is down to adjacent floats.
            break;
        }
        let fx = g(x);
        if !fx.is_finite() {
            return Err(Error::Evaluation { node: x });
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if retained == 1 && !bisect {
                fb *= 0.5;
            }
            retained = 1;
        } else {
            b = x;
            fb = fx;
            if retained == -1 && !bisect {
                fa *= 0.5;
            }
            retained = -1;
        }
        width_two_ago = width_one_ago;
        width_one_ago = b - a;
    }
    Ok(0.5 * (a + b))
}
