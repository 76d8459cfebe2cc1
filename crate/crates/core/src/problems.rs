//! Built-in benchmark problems with manufactured solutions.
//!
//! Each problem bundles the interface, the diffusion coefficient per side,
//! the exact solution/flux pair, the load and the Dirichlet boundary trace,
//! all as globally valid closed forms (each side's formula extends smoothly
//! beyond its subdomain, which edge quadrature near the interface relies
//! on). The flux is `p = diffusion * grad u` and the load satisfies
//! `-div p = f` on each side.

use crate::geometry::LevelSet;
use crate::Vec2;

type ScalarFn = dyn Fn(Vec2) -> f64 + Send + Sync;
type VectorFn = dyn Fn(Vec2) -> Vec2 + Send + Sync;

/// An interface problem instance with manufactured exact solution.
pub struct ProblemSpec {
    pub name: String,
    pub level_set: LevelSet,
    /// Diffusion coefficient per side (the PDE coefficient).
    pub beta_tilde_plus: Box<ScalarFn>,
    pub beta_tilde_minus: Box<ScalarFn>,
    /// Reciprocal coefficients, the weights of the flux bilinear form.
    pub beta_plus: Box<ScalarFn>,
    pub beta_minus: Box<ScalarFn>,
    pub exact_u_plus: Box<ScalarFn>,
    pub exact_u_minus: Box<ScalarFn>,
    pub exact_p_plus: Box<VectorFn>,
    pub exact_p_minus: Box<VectorFn>,
    pub f_plus: Box<ScalarFn>,
    pub f_minus: Box<ScalarFn>,
    /// Dirichlet trace of the exact solution on the outer boundary.
    pub boundary_g: Box<ScalarFn>,
}

impl ProblemSpec {
    /// Exact solution at `x`, dispatching on the true interface side.
    pub fn exact_u(&self, x: Vec2) -> f64 {
        if self.level_set.is_plus(x) {
            (self.exact_u_plus)(x)
        } else {
            (self.exact_u_minus)(x)
        }
    }

    /// Exact flux at `x`, dispatching on the true interface side.
    pub fn exact_p(&self, x: Vec2) -> Vec2 {
        if self.level_set.is_plus(x) {
            (self.exact_p_plus)(x)
        } else {
            (self.exact_p_minus)(x)
        }
    }

    /// Load at `x`, dispatching on the true interface side.
    pub fn load(&self, x: Vec2) -> f64 {
        if self.level_set.is_plus(x) {
            (self.f_plus)(x)
        } else {
            (self.f_minus)(x)
        }
    }
}

/// Default interface center.
///
/// The benchmark circle of radius 1/2 in `(-1,1)^2` passes exactly through
/// the mesh vertices `(+-1/2, 0)` and `(0, +-1/2)` of every uniform mesh
/// with even subdivision count, which the cut classification rejects. A
/// sub-nanometer off-lattice shift of the whole continuous problem (level
/// set, solution, load and boundary data together) restores the generic
/// position without changing any reported digit.
pub fn interface_center() -> Vec2 {
    Vec2::new(1.0e-9 * std::f64::consts::SQRT_2, 1.0e-9 * 3.0f64.sqrt())
}

/// Piecewise `r^3` benchmark: kink-free flux across a circular interface.
///
/// `u = r^3 / diff` per side (shifted to be continuous), so the flux
/// `p = 3 r (x - c)` is globally smooth and tangential along the circle.
/// The solution is constant along the interface, the case where even the
/// standard method keeps its rate on unfitted meshes.
pub fn example1(r0: f64, diff_plus: f64, diff_minus: f64) -> ProblemSpec {
    assert!(r0 > 0.0 && diff_plus > 0.0 && diff_minus > 0.0);
    let c = interface_center();
    let shift = (1.0 / diff_minus - 1.0 / diff_plus) * r0.powi(3);
    let u_minus = move |x: Vec2| (x - c).norm().powi(3) / diff_minus;
    let u_plus = move |x: Vec2| (x - c).norm().powi(3) / diff_plus + shift;
    let p = move |x: Vec2| {
        let s = x - c;
        3.0 * s.norm() * s
    };
    let f = move |x: Vec2| -9.0 * (x - c).norm();
    ProblemSpec {
        name: "example1".into(),
        level_set: LevelSet::circle(c, r0),
        beta_tilde_plus: Box::new(move |_| diff_plus),
        beta_tilde_minus: Box::new(move |_| diff_minus),
        beta_plus: Box::new(move |_| 1.0 / diff_plus),
        beta_minus: Box::new(move |_| 1.0 / diff_minus),
        exact_u_plus: Box::new(u_plus),
        exact_u_minus: Box::new(u_minus),
        exact_p_plus: Box::new(p),
        exact_p_minus: Box::new(p),
        f_plus: Box::new(f),
        f_minus: Box::new(f),
        boundary_g: Box::new(u_plus),
    }
}

/// Radial bump profile `exp(-1 / (1 - s^2))` with `s = (r - r0) / width`,
/// together with its first two radial derivatives. Zero outside the
/// support, including the regime where intermediate terms would overflow.
fn bump(r: f64, r0: f64, width: f64) -> (f64, f64, f64) {
    let s = (r - r0) / width;
    let om = 1.0 - s * s;
    // exp(-1/om) underflows to zero long before 1/om^k can overflow.
    if om < 1.5e-3 {
        return (0.0, 0.0, 0.0);
    }
    let j = (-1.0 / om).exp();
    let phi1 = 2.0 * s / (om * om);
    let phi2 = (2.0 + 6.0 * s * s) / (om * om * om);
    let dj = -phi1 / width * j;
    let ddj = (phi1 * phi1 - phi2) / (width * width) * j;
    (j, dj, ddj)
}

/// Bump-modulated benchmark with a genuinely two-sided tangential flux.
///
/// `u = j(r) v(r) sin(theta)` with `v = 1 + (r^2 - r0^2) / diff` per side;
/// the tangential derivative of `u` does not vanish on the interface, which
/// defeats the standard method on unfitted meshes. The load comes from the
/// polar Laplacian of the radial profile; the bump support keeps all data
/// zero on the outer boundary.
pub fn example2(r0: f64, diff_plus: f64, diff_minus: f64, bump_width: f64) -> ProblemSpec {
    assert!(r0 > 0.0 && diff_plus > 0.0 && diff_minus > 0.0 && bump_width > 0.0);
    assert!(bump_width < r0, "bump support must exclude the origin");
    let c = interface_center();

    // Per-side closures over g(r) = j(r) v(r).
    let radial = move |r: f64, diff: f64| {
        let (j, dj, ddj) = bump(r, r0, bump_width);
        let v = 1.0 + (r * r - r0 * r0) / diff;
        let dv = 2.0 * r / diff;
        let ddv = 2.0 / diff;
        let g = j * v;
        let dg = dj * v + j * dv;
        let ddg = ddj * v + 2.0 * dj * dv + j * ddv;
        (g, dg, ddg)
    };
    let u_side = move |x: Vec2, diff: f64| {
        let s = x - c;
        let r = s.norm();
        let (g, _, _) = radial(r, diff);
        if g == 0.0 {
            return 0.0;
        }
        g * s.y / r // sin(theta) = y/r
    };
    let p_side = move |x: Vec2, diff: f64| {
        let s = x - c;
        let r = s.norm();
        let (g, dg, _) = radial(r, diff);
        if g == 0.0 && dg == 0.0 {
            return Vec2::zeros();
        }
        let e_r = s / r;
        let e_t = Vec2::new(-s.y, s.x) / r;
        let sin_t = s.y / r;
        let cos_t = s.x / r;
        diff * (dg * sin_t * e_r + g * cos_t / r * e_t)
    };
    let f_side = move |x: Vec2, diff: f64| {
        let s = x - c;
        let r = s.norm();
        let (g, dg, ddg) = radial(r, diff);
        if g == 0.0 && dg == 0.0 && ddg == 0.0 {
            return 0.0;
        }
        let sin_t = s.y / r;
        -diff * (ddg + dg / r - g / (r * r)) * sin_t
    };

    ProblemSpec {
        name: "example2".into(),
        level_set: LevelSet::circle(c, r0),
        beta_tilde_plus: Box::new(move |_| diff_plus),
        beta_tilde_minus: Box::new(move |_| diff_minus),
        beta_plus: Box::new(move |_| 1.0 / diff_plus),
        beta_minus: Box::new(move |_| 1.0 / diff_minus),
        exact_u_plus: Box::new(move |x| u_side(x, diff_plus)),
        exact_u_minus: Box::new(move |x| u_side(x, diff_minus)),
        exact_p_plus: Box::new(move |x| p_side(x, diff_plus)),
        exact_p_minus: Box::new(move |x| p_side(x, diff_minus)),
        f_plus: Box::new(move |x| f_side(x, diff_plus)),
        f_minus: Box::new(move |x| f_side(x, diff_minus)),
        boundary_g: Box::new(move |x| u_side(x, diff_plus)),
    }
}

/// Patch test: `u = x1`, unit coefficient, no interface inside the domain.
///
/// The exact flux `(1, 0)` lies in the discrete space, so the method must
/// reproduce it to solver precision on any mesh.
pub fn patch() -> ProblemSpec {
    // A circle far outside (-1,1)^2: every element is a minus element.
    let ls = LevelSet::circle(Vec2::zeros(), 3.0);
    ProblemSpec {
        name: "patch".into(),
        level_set: ls,
        beta_tilde_plus: Box::new(|_| 1.0),
        beta_tilde_minus: Box::new(|_| 1.0),
        beta_plus: Box::new(|_| 1.0),
        beta_minus: Box::new(|_| 1.0),
        exact_u_plus: Box::new(|x| x.x),
        exact_u_minus: Box::new(|x| x.x),
        exact_p_plus: Box::new(|_| Vec2::new(1.0, 0.0)),
        exact_p_minus: Box::new(|_| Vec2::new(1.0, 0.0)),
        f_plus: Box::new(|_| 0.0),
        f_minus: Box::new(|_| 0.0),
        boundary_g: Box::new(|x| x.x),
    }
}

/// The piecewise `r^3` problem with equal coefficients: the interface is
/// present geometrically but carries no jump, so immersed and standard
/// discretizations must coincide.
pub fn conforming(r0: f64) -> ProblemSpec {
    let mut p = example1(r0, 1.0, 1.0);
    p.name = "conforming".into();
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_interface(p: &ProblemSpec, r0: f64, n: usize) -> Vec<Vec2> {
        let c = interface_center();
        (0..n)
            .map(|k| {
                let t = k as f64 / n as f64 * std::f64::consts::TAU + 0.05;
                c + r0 * Vec2::new(t.cos(), t.sin())
            })
            .collect()
    }

    #[test]
    fn example1_interface_conditions() {
        let (r0, dp, dm) = (0.5, 1e-2, 1.0);
        let p = example1(r0, dp, dm);
        for x in sample_interface(&p, r0, 64) {
            let n = p.level_set.normal(x);
            let t = p.level_set.tangent(x);
            let (up, um) = ((p.exact_u_plus)(x), (p.exact_u_minus)(x));
            assert!((up - um).abs() < 1e-10);
            let (pp, pm) = ((p.exact_p_plus)(x), (p.exact_p_minus)(x));
            assert!(((pp - pm).dot(&n)).abs() < 1e-8);
            let jt = (p.beta_plus)(x) * pp.dot(&t) - (p.beta_minus)(x) * pm.dot(&t);
            assert!(jt.abs() < 1e-8);
        }
        // Flux is diffusion * grad u: finite-difference check off the interface.
        let x = Vec2::new(0.7, 0.2);
        let h = 1e-6;
        let grad = Vec2::new(
            ((p.exact_u_plus)(x + Vec2::new(h, 0.0)) - (p.exact_u_plus)(x - Vec2::new(h, 0.0)))
                / (2.0 * h),
            ((p.exact_u_plus)(x + Vec2::new(0.0, h)) - (p.exact_u_plus)(x - Vec2::new(0.0, h)))
                / (2.0 * h),
        );
        assert!((dp * grad - (p.exact_p_plus)(x)).norm() < 1e-6);
        // Load: f = -9 r on both sides.
        assert!(((p.f_plus)(x) + 9.0 * (x - interface_center()).norm()).abs() < 1e-12);
    }

    #[test]
    fn example2_interface_conditions_and_tangential_activity() {
        let (r0, dp, dm, w) = (0.5, 1e-2, 1.0, 0.45);
        let p = example2(r0, dp, dm, w);
        let mut max_tangential = 0.0f64;
        for x in sample_interface(&p, r0, 64) {
            let n = p.level_set.normal(x);
            let t = p.level_set.tangent(x);
            let (up, um) = ((p.exact_u_plus)(x), (p.exact_u_minus)(x));
            assert!((up - um).abs() < 1e-10);
            let (pp, pm) = ((p.exact_p_plus)(x), (p.exact_p_minus)(x));
            assert!(((pp - pm).dot(&n)).abs() < 1e-8, "normal jump {}", (pp - pm).dot(&n));
            let jt = (p.beta_plus)(x) * pp.dot(&t) - (p.beta_minus)(x) * pm.dot(&t);
            assert!(jt.abs() < 1e-8);
            // The tangential derivative of u must NOT vanish identically.
            max_tangential = max_tangential.max(pp.dot(&t).abs());
        }
        assert!(max_tangential > 1e-2, "tangential flux {max_tangential}");
        // Compact support: all data vanish on the outer boundary.
        for x in [Vec2::new(1.0, 0.3), Vec2::new(-0.7, 1.0), Vec2::new(1.0, -1.0)] {
            assert_eq!((p.boundary_g)(x), 0.0);
            assert_eq!(p.exact_u(x), 0.0);
            assert_eq!(p.exact_p(x).norm(), 0.0);
        }
        // ... and near the origin.
        assert_eq!(p.exact_u(Vec2::new(0.01, 0.02)), 0.0);
    }

    /// The load of the bump benchmark is derived symbolically; validate it
    /// against a 4th-order finite-difference Laplacian of the closed-form
    /// solution, per side, at 1000 interior points each.
    #[test]
    fn example2_load_matches_fd_laplacian() {
        let (r0, dp, dm, w) = (0.5, 1e-2, 1.0, 0.45);
        let p = example2(r0, dp, dm, w);
        let c = interface_center();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let h = 5e-4;
        let lap = |u: &ScalarFn, x: Vec2| {
            let mut acc = 0.0;
            for dir in [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)] {
                acc += (-u(x + 2.0 * h * dir) + 16.0 * u(x + h * dir) - 30.0 * u(x)
                    + 16.0 * u(x - h * dir)
                    - u(x - 2.0 * h * dir))
                    / (12.0 * h * h);
            }
            acc
        };
        for side in 0..2 {
            let (u, f, diff, rlo, rhi): (&ScalarFn, &ScalarFn, f64, f64, f64) = if side == 0 {
                (&*p.exact_u_minus, &*p.f_minus, dm, 0.10, 0.45)
            } else {
                (&*p.exact_u_plus, &*p.f_plus, dp, 0.55, 0.90)
            };
            for _ in 0..1000 {
                let r = rng.random_range(rlo..rhi);
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                let x = c + r * Vec2::new(t.cos(), t.sin());
                let fd = -diff * lap(u, x);
                let closed = f(x);
                assert!(
                    (fd - closed).abs() <= 1e-6 * (1.0 + closed.abs()),
                    "side {side} at r={r:.3}: fd {fd} vs closed {closed}"
                );
            }
        }
    }

    #[test]
    fn coefficient_bounds() {
        let p = example1(0.5, 1e-2, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            for b in [&p.beta_tilde_plus, &p.beta_tilde_minus, &p.beta_plus, &p.beta_minus] {
                let v = b(x);
                assert!(v > 0.0 && v.is_finite());
            }
        }
    }

    #[test]
    fn patch_problem_is_interface_free() {
        use crate::geometry::{build_uniform_mesh, classify_mesh, Rect};
        let p = patch();
        let mesh = build_uniform_mesh(8, Rect::symmetric_unit());
        let cls = classify_mesh(
            &mesh,
            &p.level_set,
            1e-12 * mesh.h,
            &*p.beta_plus,
            &*p.beta_minus,
        )
        .unwrap();
        assert_eq!(cls.n_interface_elements(), 0);
    }
}
