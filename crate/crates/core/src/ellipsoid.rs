//! Central-cut ellipsoid method for minimizing a convex dual function of the
//! two multipliers `(lambda, mu)` over the non-negative quadrant.
//!
//! Objective cuts use the supplied subgradient. When the center leaves the
//! quadrant the cut uses the violated coordinate's unit normal instead, and
//! the dual function is not evaluated there.
//!
//! If the best point ends up near the boundary of the starting ellipsoid, the
//! optimum may lie outside it; the search then restarts around the best point
//! with a ten-times larger radius, up to `max_expansions` times.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

/// Lagrange multipliers for the sum-power (`lambda`) and energy-harvesting
/// (`mu`) constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    pub lambda: f64,
    pub mu: f64,
}

impl DualPoint {
    pub fn new(lambda: f64, mu: f64) -> Self {
        DualPoint { lambda, mu }
    }

    fn from_vec(v: &Vector2<f64>) -> Self {
        DualPoint { lambda: v[0], mu: v[1] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub center: Vector2<f64>,
    /// Symmetric positive-definite shape matrix `P` of
    /// `{x : (x - c)^T P^-1 (x - c) <= 1}`.
    pub shape: Matrix2<f64>,
}

impl Ellipsoid {
    pub fn ball(center: [f64; 2], radius_sq: f64) -> Self {
        Ellipsoid { center: Vector2::new(center[0], center[1]), shape: Matrix2::identity() * radius_sq }
    }

    /// Area of the ellipsoid, `pi * sqrt(det P)`.
    pub fn volume(&self) -> f64 {
        let det = self.shape.determinant();
        if det <= 0.0 {
            0.0
        } else {
            std::f64::consts::PI * det.sqrt()
        }
    }

    /// Squared Mahalanobis distance of `x` from the center.
    pub fn normalized_distance_sq(&self, x: &Vector2<f64>) -> f64 {
        let d = x - self.center;
        match self.shape.try_inverse() {
            Some(inv) => (d.transpose() * inv * d)[(0, 0)],
            None => f64::INFINITY,
        }
    }

    /// Central cut keeping `{x : g^T (x - c) <= 0}`. Returns `false` when the
    /// cut is degenerate (`g^T P g` not positive) and the ellipsoid is left
    /// unchanged.
    pub fn cut(&mut self, g: &Vector2<f64>) -> bool {
        const N: f64 = 2.0;
        let pg = self.shape * g;
        let denom = g.dot(&pg);
        if !(denom > 0.0) || !denom.is_finite() {
            return false;
        }
        let gt = pg / denom.sqrt();
        self.center -= gt / (N + 1.0);
        let next = (self.shape - gt * gt.transpose() * (2.0 / (N + 1.0))) * (N * N / (N * N - 1.0));
        self.shape = (next + next.transpose()) * 0.5;
        true
    }
}

/// Area ratio after one central cut in two dimensions.
pub const VOLUME_RATIO_2D: f64 = (2.0 / 3.0) * 1.154_700_538_379_251_7; // (2/3) * sqrt(4/3)

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EllipsoidConfig {
    pub center: [f64; 2],
    pub radius_sq: f64,
    /// Stop once the ellipsoid area drops below this.
    pub volume_tol: f64,
    /// Iteration cap for each (re)start.
    pub max_iters: usize,
    pub max_expansions: usize,
}

impl Default for EllipsoidConfig {
    fn default() -> Self {
        EllipsoidConfig {
            center: [100.0, 100.0],
            radius_sq: 20100.0,
            volume_tol: 1e-4,
            max_iters: 500,
            max_expansions: 8,
        }
    }
}

pub struct DualEvaluation<T> {
    pub value: f64,
    /// Subgradient of the dual function with respect to `(lambda, mu)`.
    pub subgradient: [f64; 2],
    pub payload: T,
}

#[derive(Debug, Clone)]
pub struct EllipsoidOutcome<T> {
    pub best_point: DualPoint,
    pub best_value: f64,
    pub best_payload: T,
    /// Total iterations over all restarts.
    pub iterations: usize,
    pub expansions: usize,
    pub cap_reached: bool,
}

/// Minimizes a convex function over `lambda, mu >= 0`.
///
/// `eval` returns the function value, a subgradient and a payload at a
/// quadrant point. `visit` sees every evaluation (used for primal recovery).
pub fn minimize<T, F, V>(config: &EllipsoidConfig, mut eval: F, mut visit: V) -> EllipsoidOutcome<T>
where
    T: Clone,
    F: FnMut(DualPoint) -> DualEvaluation<T>,
    V: FnMut(&DualPoint, &DualEvaluation<T>),
{
    let start = DualPoint::new(config.center[0].max(0.0), config.center[1].max(0.0));
    let first = eval(start);
    visit(&start, &first);
    let mut best_point = start;
    let mut best_value = first.value;
    let mut best_payload = first.payload;
    let mut iterations = 0;
    let mut expansions = 0;
    let mut cap_reached = false;
    let mut radius_sq = config.radius_sq;
    let mut center = config.center;

    loop {
        let initial = Ellipsoid::ball(center, radius_sq);
        let mut ell = initial.clone();
        let mut round_iters = 0;
        loop {
            if ell.volume() < config.volume_tol {
                break;
            }
            if round_iters >= config.max_iters {
                cap_reached = true;
                break;
            }
            round_iters += 1;
            iterations += 1;
            let c = ell.center;
            let g = if c[0] < 0.0 {
                Vector2::new(-1.0, 0.0)
            } else if c[1] < 0.0 {
                Vector2::new(0.0, -1.0)
            } else {
                let x = DualPoint::from_vec(&c);
                let ev = eval(x);
                visit(&x, &ev);
                let g = Vector2::new(ev.subgradient[0], ev.subgradient[1]);
                if ev.value < best_value {
                    best_value = ev.value;
                    best_point = x;
                    best_payload = ev.payload;
                }
                if g[0] == 0.0 && g[1] == 0.0 {
                    // x minimizes the convex function.
                    return EllipsoidOutcome {
                        best_point,
                        best_value,
                        best_payload,
                        iterations,
                        expansions,
                        cap_reached,
                    };
                }
                g
            };
            if !ell.cut(&g) {
                break;
            }
        }

        let bp = Vector2::new(best_point.lambda, best_point.mu);
        let near_rim = initial.normalized_distance_sq(&bp) > 0.81;
        if !near_rim || expansions >= config.max_expansions || cap_reached {
            break;
        }
        expansions += 1;
        radius_sq *= 100.0;
        center = [best_point.lambda, best_point.mu];
    }

    EllipsoidOutcome { best_point, best_value, best_payload, iterations, expansions, cap_reached }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_shrinks_by_fixed_ratio() {
        let mut e = Ellipsoid::ball([1.0, -2.0], 4.0);
        let mut prev = e.volume();
        for k in 0..40 {
            let g = Vector2::new((k as f64).cos(), (k as f64 * 0.7).sin() + 0.1);
            assert!(e.cut(&g));
            let v = e.volume();
            assert!(v < prev);
            assert!((v / prev - VOLUME_RATIO_2D).abs() < 1e-9, "ratio {}", v / prev);
            prev = v;
        }
        assert!((VOLUME_RATIO_2D - (2.0 / 3.0) * (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    fn quadratic(target: [f64; 2]) -> impl FnMut(DualPoint) -> DualEvaluation<()> {
        move |x| {
            let dl = x.lambda - target[0];
            let dm = x.mu - target[1];
            DualEvaluation { value: dl * dl + 3.0 * dm * dm, subgradient: [2.0 * dl, 6.0 * dm], payload: () }
        }
    }

    #[test]
    fn finds_interior_minimum() {
        let cfg = EllipsoidConfig { volume_tol: 1e-12, ..Default::default() };
        let out = minimize(&cfg, quadratic([37.0, 140.0]), |_, _| {});
        assert!((out.best_point.lambda - 37.0).abs() < 1e-4);
        assert!((out.best_point.mu - 140.0).abs() < 1e-4);
        assert!(!out.cap_reached);
    }

    #[test]
    fn respects_quadrant() {
        let cfg = EllipsoidConfig { volume_tol: 1e-12, ..Default::default() };
        let out = minimize(&cfg, quadratic([-20.0, 50.0]), |x, _| {
            assert!(x.lambda >= 0.0 && x.mu >= 0.0);
        });
        assert!(out.best_point.lambda < 1e-3);
        assert!((out.best_point.mu - 50.0).abs() < 1e-3);
    }

    #[test]
    fn expands_when_optimum_outside_initial_ball() {
        let cfg = EllipsoidConfig { volume_tol: 1e-10, ..Default::default() };
        let out = minimize(&cfg, quadratic([3.0, 25_000.0]), |_, _| {});
        assert!(out.expansions >= 1);
        assert!((out.best_point.mu - 25_000.0).abs() < 1e-2, "{:?}", out.best_point);
        assert!((out.best_point.lambda - 3.0).abs() < 1e-2);
    }

    #[test]
    fn nonsmooth_minimum() {
        // |l - 5| + 2 |m - 8|
        let cfg = EllipsoidConfig { volume_tol: 1e-12, ..Default::default() };
        let f = |x: DualPoint| DualEvaluation {
            value: (x.lambda - 5.0).abs() + 2.0 * (x.mu - 8.0).abs(),
            subgradient: [(x.lambda - 5.0).signum(), 2.0 * (x.mu - 8.0).signum()],
            payload: (),
        };
        let out = minimize(&cfg, f, |_, _| {});
        assert!(out.best_value < 1e-4, "{}", out.best_value);
    }
}
