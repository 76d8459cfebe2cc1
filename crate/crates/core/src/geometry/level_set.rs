//! Level-set representation of the interface.

use crate::{rotate_cw, Vec2};

type ScalarFn = dyn Fn(Vec2) -> f64 + Send + Sync;
type VectorFn = dyn Fn(Vec2) -> Vec2 + Send + Sync;

/// Signed-distance description of a smooth closed interface.
///
/// Negative inside (the minus subdomain), positive outside. The gradient is
/// the unit normal pointing into the plus subdomain wherever the distance is
/// differentiable.
pub struct LevelSet {
    signed_distance: Box<ScalarFn>,
    gradient: Box<VectorFn>,
}

impl LevelSet {
    pub fn new(
        signed_distance: impl Fn(Vec2) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static,
    ) -> Self {
        LevelSet {
            signed_distance: Box::new(signed_distance),
            gradient: Box::new(gradient),
        }
    }

    /// Circle of radius `r0` around `center`: distance `|x - c| - r0`.
    pub fn circle(center: Vec2, r0: f64) -> Self {
        assert!(r0 > 0.0);
        LevelSet::new(
            move |x: Vec2| (x - center).norm() - r0,
            move |x: Vec2| {
                let d = x - center;
                let n = d.norm();
                if n == 0.0 {
                    Vec2::new(1.0, 0.0) // arbitrary at the center
                } else {
                    d / n
                }
            },
        )
    }

    #[inline]
    pub fn value(&self, x: Vec2) -> f64 {
        (self.signed_distance)(x)
    }

    /// Unit normal pointing into the plus subdomain.
    #[inline]
    pub fn normal(&self, x: Vec2) -> Vec2 {
        (self.gradient)(x)
    }

    /// Unit tangent, the normal rotated 90 degrees clockwise.
    #[inline]
    pub fn tangent(&self, x: Vec2) -> Vec2 {
        rotate_cw(self.normal(x))
    }

    #[inline]
    pub fn is_plus(&self, x: Vec2) -> bool {
        self.value(x) > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_distance_and_normal() {
        let ls = LevelSet::circle(Vec2::zeros(), 0.5);
        assert!((ls.value(Vec2::new(0.5, 0.0))).abs() < 1e-15);
        assert!(ls.value(Vec2::new(1.0, 0.0)) > 0.0);
        assert!(ls.value(Vec2::new(0.1, 0.1)) < 0.0);
        let x = Vec2::new(0.3, 0.4);
        let n = ls.normal(x);
        assert!((n.norm() - 1.0).abs() < 1e-15);
        assert!((n - x / 0.5).norm() < 1e-15);
        let t = ls.tangent(x);
        assert!(n.dot(&t).abs() < 1e-15);
        // 90 degrees clockwise: (x,y) -> (y,-x).
        assert!((t - Vec2::new(n.y, -n.x)).norm() < 1e-16);
    }
}
