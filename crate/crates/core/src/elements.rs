//! Local finite-element algebra on triangles.
//!
//! The lowest-order Raviart-Thomas space on a triangle consists of fields
//! `(a, c) + b (x1, x2)`; their normal component is constant along any
//! straight line and there is one degree of freedom per edge, the mean
//! outward normal flux. On elements cut by the interface the space is
//! replaced by pairs of such fields coupled through three conditions across
//! the chord: continuous normal component, a weighted tangential-component
//! match at one chord point, and matching divergence. The coupled basis is
//! available in closed form; the denominator it involves stays bounded away
//! from zero whenever the triangle has no obtuse angle, which makes the
//! construction unconditionally solvable on such meshes.

use crate::error::{Error, Result};
use crate::geometry::{CutTopology, Triangle};
use crate::quadrature::integrate_segment_split;
use crate::Vec2;

/// Field of the form `(a, c) + b (x1, x2)`; divergence `2 b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineVectorField {
    pub a: f64,
    pub c: f64,
    pub b: f64,
}

impl AffineVectorField {
    pub const ZERO: AffineVectorField = AffineVectorField { a: 0.0, c: 0.0, b: 0.0 };

    pub fn constant(v: Vec2) -> Self {
        AffineVectorField { a: v.x, c: v.y, b: 0.0 }
    }

    #[inline]
    pub fn eval(&self, x: Vec2) -> Vec2 {
        Vec2::new(self.a + self.b * x.x, self.c + self.b * x.y)
    }

    #[inline]
    pub fn divergence(&self) -> f64 {
        2.0 * self.b
    }
}

impl std::ops::Add for AffineVectorField {
    type Output = AffineVectorField;
    fn add(self, o: AffineVectorField) -> AffineVectorField {
        AffineVectorField { a: self.a + o.a, c: self.c + o.c, b: self.b + o.b }
    }
}

impl std::ops::Sub for AffineVectorField {
    type Output = AffineVectorField;
    fn sub(self, o: AffineVectorField) -> AffineVectorField {
        AffineVectorField { a: self.a - o.a, c: self.c - o.c, b: self.b - o.b }
    }
}

impl std::ops::Mul<AffineVectorField> for f64 {
    type Output = AffineVectorField;
    fn mul(self, f: AffineVectorField) -> AffineVectorField {
        AffineVectorField { a: self * f.a, c: self * f.c, b: self * f.b }
    }
}

/// Two-piece field on a cut element: `plus` on the plus side of the chord,
/// `minus` on the other.
#[derive(Debug, Clone)]
pub struct PiecewiseRTFunction {
    pub plus: AffineVectorField,
    pub minus: AffineVectorField,
    /// A point on the chord and its plus-pointing normal, for side dispatch.
    chord_point: Vec2,
    chord_normal: Vec2,
}

impl PiecewiseRTFunction {
    pub fn new(plus: AffineVectorField, minus: AffineVectorField, cut: &CutTopology) -> Self {
        PiecewiseRTFunction { plus, minus, chord_point: cut.d, chord_normal: cut.n_h }
    }

    /// Side dispatch against the chord (not the exact interface).
    #[inline]
    pub fn is_plus(&self, x: Vec2) -> bool {
        (x - self.chord_point).dot(&self.chord_normal) >= 0.0
    }

    #[inline]
    pub fn eval(&self, x: Vec2) -> Vec2 {
        if self.is_plus(x) {
            self.plus.eval(x)
        } else {
            self.minus.eval(x)
        }
    }

    #[inline]
    pub fn piece(&self, plus: bool) -> &AffineVectorField {
        if plus {
            &self.plus
        } else {
            &self.minus
        }
    }

    /// Single-valued divergence (the two pieces match by construction).
    pub fn divergence(&self) -> f64 {
        self.plus.divergence()
    }
}

/// Standard RT0 basis on `tri`: `lambda_i = |e_i| / (2|T|) (x - A_i)`,
/// with `N_j(lambda_i) = delta_ij` for the mean outward flux DOFs.
pub fn rt_basis(tri: &Triangle) -> Result<[AffineVectorField; 3]> {
    let area = tri.signed_area();
    if area <= 0.0 {
        return Err(Error::DegenerateTriangle(area));
    }
    let mut basis = [AffineVectorField::ZERO; 3];
    for (i, slot) in basis.iter_mut().enumerate() {
        let b = tri.edge_length(i) / (2.0 * area);
        let anchor = tri.vertices[i];
        *slot = AffineVectorField { a: -b * anchor.x, c: -b * anchor.y, b };
    }
    Ok(basis)
}

/// Mean outward normal flux of `q` across local edge `i` of `tri`:
/// `(1/|e_i|) int_{e_i} q . n ds`.
///
/// Exact for [`AffineVectorField`] (constant normal trace); general fields
/// use a degree-6 segment rule, split at `split` when the trace is only
/// piecewise smooth there.
pub fn dof_functional(
    q: &dyn Fn(Vec2) -> Vec2,
    tri: &Triangle,
    i: usize,
    split: Option<Vec2>,
) -> Result<f64> {
    let (p, r) = tri.edge(i);
    let n = tri.outward_normal(i);
    let len = (r - p).norm();
    let v = integrate_segment_split(p, r, split, &mut |x| q(x).dot(&n), 6)?;
    Ok(v / len)
}

/// Exact DOF of an affine RT field: its normal trace is constant along
/// any straight edge, so one midpoint evaluation suffices.
pub fn dof_of_affine(f: &AffineVectorField, tri: &Triangle, i: usize) -> f64 {
    // Normal trace of an affine RT field is constant along the edge.
    f.eval(tri.edge_midpoint(i)).dot(&tri.outward_normal(i))
}

/// Mean outward flux of a two-piece field, split exactly at the edge's
/// chord crossing.
pub fn dof_of_piecewise(
    q: &PiecewiseRTFunction,
    tri: &Triangle,
    i: usize,
    split: Option<Vec2>,
) -> f64 {
    let (p, r) = tri.edge(i);
    let n = tri.outward_normal(i);
    let len = (r - p).norm();
    match split {
        None => {
            let side = q.is_plus(tri.edge_midpoint(i));
            q.piece(side).eval(tri.edge_midpoint(i)).dot(&n)
        }
        Some(m) => {
            // Piecewise-constant trace: exact with sub-segment midpoints.
            let mut acc = 0.0;
            for (s0, s1) in [(p, m), (m, r)] {
                let mid = 0.5 * (s0 + s1);
                let side = q.is_plus(mid);
                acc += q.piece(side).eval(mid).dot(&n) * (s1 - s0).norm();
            }
            acc / len
        }
    }
}

/// Length of the part of local edge `i` lying on the plus side of the chord.
fn plus_edge_length(tri: &Triangle, cut: &CutTopology, i: usize) -> f64 {
    let (p, r) = tri.edge(i);
    if let Some(slot) = cut.cut_edges_local.iter().position(|&c| c == i) {
        let x = if slot == 0 { cut.d } else { cut.e };
        let mut acc = 0.0;
        for (s0, s1) in [(p, x), (x, r)] {
            if cut.is_plus(0.5 * (s0 + s1)) {
                acc += (s1 - s0).norm();
            }
        }
        acc
    } else if cut.is_plus(0.5 * (p + r)) {
        (r - p).norm()
    } else {
        0.0
    }
}

/// The chord-aligned generator of tangential jumps and its RT0 projection.
///
/// The generator equals the chord tangent on the plus piece and vanishes on
/// the minus piece; subtracting its RT0 interpolant yields the unique
/// two-piece field with zero DOFs, continuous normal component, matching
/// divergence and unit tangential jump (up to the `theta` denominator).
#[derive(Debug, Clone)]
pub struct PlusTangentProjection {
    /// RT0 interpolant of the generator (zero divergence).
    pub projection: AffineVectorField,
    /// Tangential component of the projection at the chord evaluation
    /// point; lies in [0,1] exactly when the triangle has no obtuse angle.
    pub theta: f64,
}

/// Computes the RT0 projection of the plus-side tangent generator.
///
/// Errors with [`Error::MaxAngleViolation`] when `theta` leaves `[0,1]`
/// beyond roundoff, which signals an obtuse interface triangle.
pub fn plus_tangent_projection(tri: &Triangle, cut: &CutTopology) -> Result<PlusTangentProjection> {
    let basis = rt_basis(tri)?;
    let mut projection = AffineVectorField::ZERO;
    for i in 0..3 {
        // DOFs of the generator: exact plus-side edge-length fractions.
        let dof = cut.t_h.dot(&tri.outward_normal(i)) * plus_edge_length(tri, cut, i)
            / tri.edge_length(i);
        projection = projection + dof * basis[i];
    }
    let theta = projection.eval(cut.x_t).dot(&cut.t_h);
    const SLACK: f64 = 1e-12;
    if !(-SLACK..=1.0 + SLACK).contains(&theta) {
        return Err(Error::MaxAngleViolation { element: cut.element, theta });
    }
    Ok(PlusTangentProjection { projection, theta })
}

/// The immersed local basis on a cut element.
#[derive(Debug, Clone)]
pub struct LocalBasis {
    pub functions: [PiecewiseRTFunction; 3],
    /// `theta` of the underlying tangent projection.
    pub theta: f64,
    /// Tangential-jump multiplier of each basis function.
    pub mu: [f64; 3],
}

/// Builds the immersed basis from the closed-form expression
///
/// `phi_i = lambda_i + mu_i (w - Pw)`, where `w` is the plus-tangent
/// generator, `Pw` its RT0 projection, and
/// `mu_i = (r - 1) (lambda_i(x_T) . t_h) / (1 + (r - 1) theta)` with
/// `r = beta_minus / beta_plus`.
///
/// The denominator is bounded below by `min(1, r)`, so the basis exists for
/// every positive coefficient pair on non-obtuse triangles.
pub fn ife_basis(tri: &Triangle, cut: &CutTopology) -> Result<LocalBasis> {
    if !(cut.beta_plus > 0.0 && cut.beta_minus > 0.0) {
        return Err(Error::NonPositiveCoefficient(cut.beta_plus, cut.beta_minus));
    }
    let basis = rt_basis(tri)?;
    let proj = plus_tangent_projection(tri, cut)?;
    let ratio = cut.beta_minus / cut.beta_plus;
    let denom = 1.0 + (ratio - 1.0) * proj.theta;
    debug_assert!(denom >= ratio.min(1.0) - 1e-12);

    let tangent_const = AffineVectorField::constant(cut.t_h);
    let mut mu = [0.0; 3];
    let mut functions: [Option<PiecewiseRTFunction>; 3] = [None, None, None];
    for i in 0..3 {
        mu[i] = (ratio - 1.0) * basis[i].eval(cut.x_t).dot(&cut.t_h) / denom;
        let plus = basis[i] + mu[i] * (tangent_const - proj.projection);
        let minus = basis[i] - mu[i] * proj.projection;
        functions[i] = Some(PiecewiseRTFunction::new(plus, minus, cut));
    }
    Ok(LocalBasis {
        functions: functions.map(Option::unwrap),
        theta: proj.theta,
        mu,
    })
}

/// Interpolates `q` into the standard RT0 space on `tri` by matching DOFs.
pub fn rt_interpolate(q: &dyn Fn(Vec2) -> Vec2, tri: &Triangle) -> Result<AffineVectorField> {
    let basis = rt_basis(tri)?;
    let mut out = AffineVectorField::ZERO;
    for (i, lam) in basis.iter().enumerate() {
        out = out + dof_functional(q, tri, i, None)? * *lam;
    }
    Ok(out)
}

/// Interpolates `q` into the immersed space on a cut element.
///
/// Edge DOFs are integrated with the chord crossing as split point, so
/// fields defined piecewise across the interface are handled exactly up to
/// quadrature degree.
pub fn ife_interpolate(
    q: &dyn Fn(Vec2) -> Vec2,
    tri: &Triangle,
    cut: &CutTopology,
) -> Result<PiecewiseRTFunction> {
    let local = ife_basis(tri, cut)?;
    let mut plus = AffineVectorField::ZERO;
    let mut minus = AffineVectorField::ZERO;
    for i in 0..3 {
        let split = cut
            .cut_edges_local
            .iter()
            .position(|&c| c == i)
            .map(|slot| if slot == 0 { cut.d } else { cut.e });
        let dof = dof_functional(q, tri, i, split)?;
        plus = plus + dof * local.functions[i].plus;
        minus = minus + dof * local.functions[i].minus;
    }
    Ok(PiecewiseRTFunction::new(plus, minus, cut))
}

/// The three jump correctors of a cut element.
///
/// Each has zero edge DOFs and produces exactly one unit jump across the
/// chord: of the normal component, of the weighted tangential component, or
/// of the divergence. They span, together with the immersed basis, every
/// two-piece RT0 pair on the element.
#[derive(Debug, Clone)]
pub struct JumpCorrectors {
    /// Unit jump of the normal component at the chord point.
    pub normal: PiecewiseRTFunction,
    /// Unit jump of the weighted tangential component.
    pub tangential: PiecewiseRTFunction,
    /// Unit jump of the divergence.
    pub divergence: PiecewiseRTFunction,
}

/// Builds the jump correctors by interpolating explicit one-sided seeds and
/// subtracting; the seed choices keep all three norms of the expected size
/// (two scale like the element diameter, the divergence one quadratically).
pub fn jump_correctors(tri: &Triangle, cut: &CutTopology) -> Result<JumpCorrectors> {
    let interpolate_pair =
        |plus_seed: AffineVectorField, minus_seed: AffineVectorField| -> Result<PiecewiseRTFunction> {
            let seeded = PiecewiseRTFunction::new(plus_seed, minus_seed, cut);
            let local = ife_basis(tri, cut)?;
            let mut plus = plus_seed;
            let mut minus = minus_seed;
            for i in 0..3 {
                let split = cut
                    .cut_edges_local
                    .iter()
                    .position(|&c| c == i)
                    .map(|slot| if slot == 0 { cut.d } else { cut.e });
                let dof = dof_of_piecewise(&seeded, tri, i, split);
                plus = plus - dof * local.functions[i].plus;
                minus = minus - dof * local.functions[i].minus;
            }
            Ok(PiecewiseRTFunction::new(plus, minus, cut))
        };

    // Unit normal jump: seed with the chord normal on the plus side.
    let normal = interpolate_pair(AffineVectorField::constant(cut.n_h), AffineVectorField::ZERO)?;

    // Unit weighted tangential jump: one-sided tangent scaled by the
    // reciprocal coefficient; the side is chosen by the larger coefficient.
    let tangential = if cut.beta_plus > cut.beta_minus {
        interpolate_pair(
            AffineVectorField::constant(cut.t_h / cut.beta_plus),
            AffineVectorField::ZERO,
        )?
    } else {
        interpolate_pair(
            AffineVectorField::ZERO,
            AffineVectorField::constant(-cut.t_h / cut.beta_minus),
        )?
    };

    // Unit divergence jump: seed `(x - x_T) / 2` on the plus side. Anchoring
    // at the chord evaluation point makes the seed's normal and tangential
    // jumps vanish there, so only the divergence jump survives.
    let divergence = interpolate_pair(
        AffineVectorField { a: -0.5 * cut.x_t.x, c: -0.5 * cut.x_t.y, b: 0.5 },
        AffineVectorField::ZERO,
    )?;

    Ok(JumpCorrectors { normal, tangential, divergence })
}

/// L2 norm of a two-piece field over the cut element, by cut-aware
/// quadrature of the given degree.
pub fn piecewise_l2_norm(q: &PiecewiseRTFunction, cut: &CutTopology, degree: usize) -> Result<f64> {
    let v = crate::quadrature::integrate_cut_element(
        cut,
        &mut |x| q.plus.eval(x).norm_squared(),
        &mut |x| q.minus.eval(x).norm_squared(),
        degree,
    )?;
    Ok(v.max(0.0).sqrt())
}

/// Evaluation helpers shared by tests and property suites.
pub mod checks {
    use super::*;

    /// Kronecker matrix `N_j(phi_i)` of a local immersed basis; identity to
    /// roundoff when the basis is consistent.
    pub fn kronecker_matrix(tri: &Triangle, cut: &CutTopology, basis: &LocalBasis) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (i, phi) in basis.functions.iter().enumerate() {
            for j in 0..3 {
                let split = cut
                    .cut_edges_local
                    .iter()
                    .position(|&c| c == j)
                    .map(|slot| if slot == 0 { cut.d } else { cut.e });
                m[i][j] = dof_of_piecewise(phi, tri, j, split);
            }
        }
        m
    }

    /// The three coupling residuals of a two-piece field: normal jump at
    /// the chord point, weighted tangential jump, divergence jump.
    pub fn coupling_residuals(q: &PiecewiseRTFunction, cut: &CutTopology) -> [f64; 3] {
        let jump_n = (q.plus.eval(cut.x_t) - q.minus.eval(cut.x_t)).dot(&cut.n_h);
        let jump_t = cut.beta_plus * q.plus.eval(cut.x_t).dot(&cut.t_h)
            - cut.beta_minus * q.minus.eval(cut.x_t).dot(&cut.t_h);
        let jump_div = q.plus.divergence() - q.minus.divergence();
        [jump_n, jump_t, jump_div]
    }

    /// Max of |q| over the piece polygons' vertices; exact for affine
    /// pieces since the maximum of an affine field over a convex polygon is
    /// attained at a vertex.
    pub fn piecewise_sup_norm(q: &PiecewiseRTFunction, cut: &CutTopology) -> f64 {
        let mut sup: f64 = 0.0;
        for p in &cut.plus_polygon {
            sup = sup.max(q.plus.eval(*p).norm());
        }
        for p in &cut.minus_polygon {
            sup = sup.max(q.minus.eval(*p).norm());
        }
        sup
    }

    /// Mean outward normal flux DOFs of an arbitrary field.
    pub fn dofs_of(
        q: &dyn Fn(Vec2) -> Vec2,
        tri: &Triangle,
        cut: &CutTopology,
    ) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (i, slot) in out.iter_mut().enumerate() {
            let split = cut
                .cut_edges_local
                .iter()
                .position(|&c| c == i)
                .map(|s| if s == 0 { cut.d } else { cut.e });
            *slot = dof_functional(q, tri, i, split)?;
        }
        Ok(out)
    }
}
