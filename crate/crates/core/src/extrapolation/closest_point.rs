//! Closest-point search along the averaged level-set normal.
//!
//! Starting at a query point `x_Q` the search walks the line
//! `x(xi) = x_Q + xi * p_Q` with navigation vector `p_Q = sign(phi(x_Q)) n_Q`,
//! `n_Q = -q(x_Q) / |q(x_Q)|`, until the level set changes sign. Two
//! strategies are provided: a cell-by-cell traversal that solves the
//! restricted bilinear exactly, and a bracketing bisection around the
//! distance-function estimate `xi* = |phi(x_Q)|`.

use crate::error::{Error, Result};
use crate::interface::LevelSetField;
use crate::mesh_fe::{UniformQuadMesh, Vec2};

/// Normals shorter than this are treated as undefined.
pub const DEGENERATE_NORMAL: f64 = 1e-12;

/// Interval width at which bisection stops.
const BISECTION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SearchMethod {
    #[default]
    Traversal,
    Bisection,
}

impl std::str::FromStr for SearchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "traversal" => Ok(Self::Traversal),
            "bisection" => Ok(Self::Bisection),
            other => Err(Error::InvalidArgument(format!("unknown search method '{other}'"))),
        }
    }
}

impl std::fmt::Display for SearchMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Traversal => "traversal",
            Self::Bisection => "bisection",
        })
    }
}

/// Projection of a query point onto the zero level set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosestPoint {
    /// `x_Q`
    pub query: Vec2,
    /// `x_Gamma`
    pub point: Vec2,
    /// Line parameter of `x_Gamma` along the navigation vector.
    pub xi: f64,
    /// Unit outward normal `n_Gamma = -q(x_Gamma) / |q(x_Gamma)|`.
    pub normal: Vec2,
    /// `x_P = x_Gamma - eps n_Gamma`, the inner edge of the diffuse band.
    pub shifted: Vec2,
    /// Number of cells visited (traversal) or bracket expansions (bisection).
    pub steps: usize,
}

impl ClosestPoint {
    /// `tau_Gamma`, the counter-clockwise rotation of the normal.
    #[inline]
    pub fn tangent(&self) -> Vec2 {
        Vec2::new(-self.normal.y, self.normal.x)
    }
}

/// Closest-point search on a fixed level set.
#[derive(Clone, Copy, Debug)]
pub struct ClosestPointSearch<'a> {
    pub mesh: &'a UniformQuadMesh,
    pub ls: &'a LevelSetField,
    /// Interface thickness, used to place the shifted point.
    pub eps: f64,
}

impl<'a> ClosestPointSearch<'a> {
    pub fn new(mesh: &'a UniformQuadMesh, ls: &'a LevelSetField, eps: f64) -> Self {
        Self { mesh, ls, eps }
    }

    pub fn project(&self, x_q: Vec2, method: SearchMethod) -> Result<ClosestPoint> {
        match method {
            SearchMethod::Traversal => self.traversal(x_q),
            SearchMethod::Bisection => self.bisection(x_q),
        }
    }

    /// Level-set value and navigation vector at the query point.
    fn navigation(&self, x_q: Vec2) -> Result<(f64, Vec2)> {
        if !self.mesh.contains(x_q) {
            return Err(Error::OutOfDomain { x: x_q.x, y: x_q.y });
        }
        let phi = self.ls.value(x_q)?;
        let q = self.ls.normal_field(x_q)?;
        let len = q.norm();
        if len <= DEGENERATE_NORMAL {
            return Err(Error::DegenerateNormal { x: x_q.x, y: x_q.y });
        }
        let n_q = -q / len;
        Ok((phi, n_q * phi.signum()))
    }

    fn finish(&self, x_q: Vec2, x_gamma: Vec2, xi: f64, steps: usize) -> Result<ClosestPoint> {
        let q = self.ls.normal_field(x_gamma)?;
        let len = q.norm();
        if len <= DEGENERATE_NORMAL {
            return Err(Error::DegenerateNormal {
                x: x_gamma.x,
                y: x_gamma.y,
            });
        }
        let normal = -q / len;
        Ok(ClosestPoint {
            query: x_q,
            point: x_gamma,
            xi,
            normal,
            shifted: x_gamma - normal * self.eps,
            steps,
        })
    }

    /// Level-set value at `x` using the bilinear of `cell` (exact continuation
    /// for points on the cell boundary).
    fn value_in_cell(&self, cell: usize, x: Vec2) -> f64 {
        match self.ls {
            LevelSetField::Analytic(a) => a.value(x),
            LevelSetField::Discrete(d) => {
                let o = self.mesh.cell_origin(cell);
                let local = [(x.x - o.x) / self.mesh.h, (x.y - o.y) / self.mesh.h];
                d.phi.eval_at(crate::mesh_fe::CellPoint { cell, local })
            }
        }
    }

    /// Cell-by-cell traversal with an exact root solve in the last segment.
    pub fn traversal(&self, x_q: Vec2) -> Result<ClosestPoint> {
        let phi_q = self.ls.value(x_q)?;
        if phi_q == 0.0 {
            return self.finish(x_q, x_q, 0.0, 0);
        }
        let (_, p) = self.navigation(x_q)?;
        let mut cell = self.mesh.locate_cell(x_q)?.cell;
        let mut origin = x_q;
        let mut xi_prev = 0.0;
        let mut f_prev = phi_q;
        let max_steps = self.mesh.nx + self.mesh.ny;
        let mut steps = 0;
        loop {
            steps += 1;
            if steps > max_steps {
                return Err(Error::SearchFailure {
                    x: x_q.x,
                    y: x_q.y,
                    steps,
                });
            }
            let exit = self.mesh.ray_exit(cell, origin, p);
            let xi_next = xi_prev + exit.t;
            let f_next = self.value_in_cell(cell, exit.point);
            if f_next == 0.0 {
                return self.finish(x_q, exit.point, xi_next, steps);
            }
            if f_prev * f_next < 0.0 {
                let tau = self.segment_root(cell, origin, exit.point, f_prev, f_next);
                let x_gamma = origin + (exit.point - origin) * tau;
                return self.finish(x_q, x_gamma, xi_prev + tau * exit.t, steps);
            }
            match exit.next {
                Some(next) => {
                    cell = next;
                    origin = exit.point;
                    xi_prev = xi_next;
                    f_prev = f_next;
                }
                None => {
                    return Err(Error::NoInterfaceFound { x: x_q.x, y: x_q.y });
                }
            }
        }
    }

    /// Root `tau in [0, 1]` of the level set on the segment `a -> b` inside `cell`,
    /// given opposite-sign end values.
    fn segment_root(&self, cell: usize, a: Vec2, b: Vec2, fa: f64, fb: f64) -> f64 {
        match self.ls {
            LevelSetField::Discrete(_) => {
                // bilinear restricted to a line: f(tau) = fa + B tau + A tau^2
                let fm = self.value_in_cell(cell, (a + b) * 0.5);
                let quad_a = 2.0 * (fb - 2.0 * fm + fa);
                let quad_b = fb - fa - quad_a;
                solve_quadratic_in_unit(quad_a, quad_b, fa).unwrap_or_else(|| fa / (fa - fb))
            }
            LevelSetField::Analytic(_) => {
                bisect(|tau| self.value_in_cell(cell, a + (b - a) * tau), 0.0, 1.0, fa, fb, BISECTION_TOL / (b - a).norm().max(1e-300))
            }
        }
    }

    /// Bracketing search on `[xi* - m h, xi* + m h]` followed by bisection.
    pub fn bisection(&self, x_q: Vec2) -> Result<ClosestPoint> {
        let phi_q = self.ls.value(x_q)?;
        if phi_q == 0.0 {
            return self.finish(x_q, x_q, 0.0, 0);
        }
        let (_, p) = self.navigation(x_q)?;
        let xi_star = phi_q.abs();
        let xi_exit = self.exit_parameter(x_q, p);
        let eval = |xi: f64| self.ls.value(x_q + p * xi);
        let h = self.mesh.h;
        let max_m = self.mesh.nx + self.mesh.ny;
        for m in 1..=max_m {
            let lo = (xi_star - m as f64 * h).max(0.0);
            let hi = (xi_star + m as f64 * h).min(xi_exit);
            let (f_lo, f_hi) = (eval(lo)?, eval(hi)?);
            if f_lo == 0.0 {
                return self.finish(x_q, x_q + p * lo, lo, m);
            }
            if f_hi == 0.0 {
                return self.finish(x_q, x_q + p * hi, hi, m);
            }
            if f_lo * f_hi < 0.0 {
                let mut err = None;
                let xi = bisect(
                    |xi| match eval(xi) {
                        Ok(v) => v,
                        Err(e) => {
                            err = Some(e);
                            0.0
                        }
                    },
                    lo,
                    hi,
                    f_lo,
                    f_hi,
                    BISECTION_TOL,
                );
                if let Some(e) = err {
                    return Err(e);
                }
                return self.finish(x_q, x_q + p * xi, xi, m);
            }
            if lo == 0.0 && hi >= xi_exit {
                break;
            }
        }
        Err(Error::SearchFailure {
            x: x_q.x,
            y: x_q.y,
            steps: max_m,
        })
    }

    /// Parameter at which the ray from `x` along `dir` leaves the box.
    fn exit_parameter(&self, x: Vec2, dir: Vec2) -> f64 {
        let lo = self.mesh.origin;
        let hi = lo + Vec2::new(self.mesh.extent, self.mesh.extent);
        let axis = |o: f64, d: f64, lo: f64, hi: f64| {
            if d > 0.0 {
                ((hi - o) / d).max(0.0)
            } else if d < 0.0 {
                ((lo - o) / d).max(0.0)
            } else {
                f64::INFINITY
            }
        };
        axis(x.x, dir.x, lo.x, hi.x).min(axis(x.y, dir.y, lo.y, hi.y))
    }
}

/// Smallest root in `[0, 1]` of `a t^2 + b t + c`, if any.
fn solve_quadratic_in_unit(a: f64, b: f64, c: f64) -> Option<f64> {
    let tol = 1e-12;
    let in_unit = |t: f64| t >= -tol && t <= 1.0 + tol;
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return None;
    }
    if a.abs() <= 1e-14 * scale {
        if b == 0.0 {
            return None;
        }
        let t = -c / b;
        return in_unit(t).then(|| t.clamp(0.0, 1.0));
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    // numerically stable pair of roots
    let s = disc.sqrt();
    let qq = -0.5 * (b + b.signum() * s);
    let mut roots = [f64::NAN, f64::NAN];
    roots[0] = qq / a;
    if qq != 0.0 {
        roots[1] = c / qq;
    }
    roots
        .into_iter()
        .filter(|t| t.is_finite() && in_unit(*t))
        .map(|t| t.clamp(0.0, 1.0))
        .min_by(|x, y| x.partial_cmp(y).unwrap())
}

/// Bisection on `[lo, hi]` with `f(lo) f(hi) < 0`; returns the midpoint of the
/// final interval.
fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64, _f_hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interface::{AnalyticLevelSet, DiscreteLevelSet, DEFAULT_SIGMA};
    use crate::mesh_fe::{CellQuadrature, FEField};
    use approx::assert_abs_diff_eq;

    fn circle() -> LevelSetField {
        LevelSetField::Analytic(AnalyticLevelSet::circle(Vec2::new(0.5, 0.5), 0.25))
    }

    #[test]
    fn radial_projection_on_analytic_circle() {
        let mesh = UniformQuadMesh::unit_square(32).unwrap();
        let ls = circle();
        let search = ClosestPointSearch::new(&mesh, &ls, 2.0 * mesh.h);
        for method in [SearchMethod::Traversal, SearchMethod::Bisection] {
            let cp = search.project(Vec2::new(0.9, 0.5), method).unwrap();
            assert_abs_diff_eq!(cp.point.x, 0.75, epsilon = 1e-10);
            assert_abs_diff_eq!(cp.point.y, 0.5, epsilon = 1e-10);
            assert_abs_diff_eq!(cp.xi, 0.15, epsilon = 1e-10);
            assert_abs_diff_eq!(cp.normal.x, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(cp.normal.y, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(cp.shifted.x, 0.75 - 2.0 * mesh.h, epsilon = 1e-10);
        }
    }

    #[test]
    fn point_on_interface_is_its_own_projection() {
        let mesh = UniformQuadMesh::unit_square(16).unwrap();
        let ls = circle();
        let search = ClosestPointSearch::new(&mesh, &ls, 0.1);
        let x = Vec2::new(0.5, 0.75);
        for method in [SearchMethod::Traversal, SearchMethod::Bisection] {
            let cp = search.project(x, method).unwrap();
            assert_eq!(cp.point, x);
            assert_eq!(cp.xi, 0.0);
        }
    }

    #[test]
    fn interpolated_circle_projection_is_second_order() {
        let mesh = UniformQuadMesh::unit_square(128).unwrap();
        let quad = CellQuadrature::with_default_rule(mesh);
        let c = Vec2::new(0.5, 0.5);
        let phi = FEField::interpolate(mesh, |x| 0.25 - (x - c).norm());
        let ls = LevelSetField::Discrete(DiscreteLevelSet::new(phi, DEFAULT_SIGMA, &quad).unwrap());
        let search = ClosestPointSearch::new(&mesh, &ls, 2.0 * mesh.h);
        let x_q = Vec2::new(0.62, 0.61);
        let cp = search.traversal(x_q).unwrap();
        let exact = c + (x_q - c).normalize() * 0.25;
        assert!((cp.point - exact).norm() <= 2.0 * mesh.h * mesh.h);
        let cp_b = search.bisection(x_q).unwrap();
        assert!((cp.point - cp_b.point).norm() <= 1e-8);
    }

    #[test]
    fn no_interface_and_degenerate_normal() {
        let mesh = UniformQuadMesh::unit_square(8).unwrap();
        let flat = LevelSetField::Analytic(AnalyticLevelSet::half_plane(
            Vec2::new(-1.0, 0.0),
            Vec2::new(1.0, 0.0),
        ));
        let search = ClosestPointSearch::new(&mesh, &flat, 0.1);
        assert!(matches!(
            search.traversal(Vec2::new(0.5, 0.5)),
            Err(Error::NoInterfaceFound { .. })
        ));
        assert!(matches!(
            search.bisection(Vec2::new(0.5, 0.5)),
            Err(Error::SearchFailure { .. })
        ));

        let ls = circle();
        let search = ClosestPointSearch::new(&mesh, &ls, 0.1);
        assert!(matches!(
            search.traversal(Vec2::new(0.5, 0.5)),
            Err(Error::DegenerateNormal { .. })
        ));
    }

    #[test]
    fn quadratic_root_selection() {
        // (t - 0.25)(t - 0.75) = t^2 - t + 3/16
        let t = solve_quadratic_in_unit(1.0, -1.0, 3.0 / 16.0).unwrap();
        assert_abs_diff_eq!(t, 0.25, epsilon = 1e-14);
        assert_eq!(solve_quadratic_in_unit(0.0, 2.0, -1.0), Some(0.5));
        assert_eq!(solve_quadratic_in_unit(1.0, 0.0, 1.0), None);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(1000))]
        #[test]
        fn band_projection_is_radial(theta in 0.0f64..std::f64::consts::TAU, s in -4.0f64..4.0) {
            let mesh = UniformQuadMesh::unit_square(64).unwrap();
            let eps = 2.0 * mesh.h;
            let c = Vec2::new(0.5, 0.5);
            let ls = circle();
            let search = ClosestPointSearch::new(&mesh, &ls, eps);
            let x_q = c + Vec2::new(theta.cos(), theta.sin()) * (0.25 + s * eps);
            let exact = c + (x_q - c).normalize() * 0.25;
            let a = search.traversal(x_q).unwrap();
            let b = search.bisection(x_q).unwrap();
            proptest::prop_assert!(((a.point - c).norm() - 0.25).abs() <= 1e-9);
            proptest::prop_assert!(((b.point - c).norm() - 0.25).abs() <= 1e-9);
            proptest::prop_assert!((a.point - exact).norm() <= 1e-8);
            proptest::prop_assert!((b.point - exact).norm() <= 1e-8);
            proptest::prop_assert!((a.normal.norm() - 1.0).abs() <= 1e-12);
        }
    }
}
