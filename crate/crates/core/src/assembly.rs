//! Global degrees of freedom and saddle-point system assembly.
//!
//! One flux DOF per edge (mean normal flux against the edge's canonical
//! normal) and one scalar DOF per triangle. The flux block `A` is the
//! weighted mass form plus, for the immersed method, the unscaled penalty
//! on normal-trace jumps across cut edges. The divergence block `B` has the
//! exact entries `sign * |e_i|` for both methods: the immersed basis keeps
//! the standard divergence row because its divergence is single-valued and
//! its edge DOFs are the standard ones.

use crate::elements::{ife_basis, rt_basis, AffineVectorField, LocalBasis, PiecewiseRTFunction};
use crate::error::{Error, Result};
use crate::geometry::{Classification, CutTopology, ElementClass, Mesh, Side};
use crate::problems::ProblemSpec;
use crate::quadrature::TriangleRule;
use crate::Vec2;

/// Discretization variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Standard lowest-order Raviart-Thomas on every element.
    Traditional,
    /// Immersed basis on interface elements, plus the jump penalty.
    Immersed,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        match s {
            "traditional" => Ok(Method::Traditional),
            "immersed" => Ok(Method::Immersed),
            other => Err(Error::InvalidConfig(format!(
                "unknown method '{other}' (expected 'traditional' or 'immersed')"
            ))),
        }
    }
}

/// Edge-flux and cell-scalar DOF layout with orientation signs.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub n_flux: usize,
    pub n_scalar: usize,
    /// `signs[t][i]`: +-1 relating the outward normal of element `t` on its
    /// local edge `i` to the canonical normal of the global edge.
    pub signs: Vec<[f64; 3]>,
}

pub fn build_dof_map(mesh: &Mesh) -> DofMap {
    let mut signs = vec![[0.0; 3]; mesh.n_triangles()];
    for t in 0..mesh.n_triangles() {
        for i in 0..3 {
            signs[t][i] = mesh.orientation_sign(t, i);
        }
    }
    DofMap {
        n_flux: mesh.n_edges(),
        n_scalar: mesh.n_triangles(),
        signs,
    }
}

/// Local flux basis of one element under a given method.
pub enum LocalFluxBasis {
    Affine([AffineVectorField; 3]),
    Immersed(LocalBasis),
}

impl LocalFluxBasis {
    /// The affine piece of basis function `i` on the requested chord side.
    pub fn piece(&self, i: usize, plus: bool) -> &AffineVectorField {
        match self {
            LocalFluxBasis::Affine(b) => &b[i],
            LocalFluxBasis::Immersed(b) => b.functions[i].piece(plus),
        }
    }
}

/// Builds the local flux basis of element `t`.
pub fn local_basis(
    mesh: &Mesh,
    cls: &Classification,
    t: usize,
    method: Method,
) -> Result<LocalFluxBasis> {
    let tri = mesh.triangle(t);
    match (method, cls.cut_for(t)) {
        (Method::Immersed, Some(cut)) => Ok(LocalFluxBasis::Immersed(ife_basis(&tri, cut)?)),
        _ => Ok(LocalFluxBasis::Affine(rt_basis(&tri)?)),
    }
}

/// Assembled saddle-point system `[[A, B^T], [B, 0]] [p; u] = [g; f]`.
///
/// `A` (flux x flux) is stored as triplets including the penalty; `B`
/// (scalar x flux) holds the exact divergence rows.
pub struct MixedSystem {
    pub n_flux: usize,
    pub n_scalar: usize,
    pub a_triplets: Vec<(usize, usize, f64)>,
    pub b_triplets: Vec<(usize, usize, f64)>,
    /// Flux-equation right side (Dirichlet boundary term).
    pub g: Vec<f64>,
    /// Scalar-equation right side (`-int f v`).
    pub f: Vec<f64>,
    pub eta: f64,
}

impl MixedSystem {
    pub fn total_dim(&self) -> usize {
        self.n_flux + self.n_scalar
    }

    pub fn rhs(&self) -> Vec<f64> {
        let mut rhs = Vec::with_capacity(self.total_dim());
        rhs.extend_from_slice(&self.g);
        rhs.extend_from_slice(&self.f);
        rhs
    }

    /// Applies the full saddle-point operator to `x = [p; u]`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.total_dim());
        assert_eq!(y.len(), self.total_dim());
        y.fill(0.0);
        for &(i, j, v) in &self.a_triplets {
            y[i] += v * x[j];
        }
        let nf = self.n_flux;
        for &(t, e, v) in &self.b_triplets {
            y[nf + t] += v * x[e]; // B p
            y[e] += v * x[nf + t]; // B^T u
        }
    }
}

/// Reciprocal-coefficient sampler bound to the classification: Gamma_h side
/// on cut elements, the element's own side elsewhere.
struct BetaField<'a> {
    problem: &'a ProblemSpec,
}

impl BetaField<'_> {
    fn eval(&self, plus: bool, x: Vec2) -> f64 {
        if plus {
            (self.problem.beta_plus)(x)
        } else {
            (self.problem.beta_minus)(x)
        }
    }
}

/// Weighted mass block: `int beta_h psi_i . psi_j` accumulated over
/// elements, with cut-aware quadrature on interface elements.
pub fn assemble_a(
    mesh: &Mesh,
    cls: &Classification,
    problem: &ProblemSpec,
    method: Method,
) -> Result<Vec<(usize, usize, f64)>> {
    let beta = BetaField { problem };
    let rule = TriangleRule::with_degree(2)?;
    let mut triplets = Vec::with_capacity(9 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let basis = local_basis(mesh, cls, t, method)?;
        let mut local = [[0.0; 3]; 3];
        match cls.element_class[t] {
            ElementClass::NonInterface(side) => {
                let tri = mesh.triangle(t);
                let plus = side == Side::Plus;
                for (x, w) in rule.mapped(&tri.vertices) {
                    let b = beta.eval(plus, x) * w;
                    let vals: [Vec2; 3] =
                        std::array::from_fn(|i| basis.piece(i, plus).eval(x));
                    for i in 0..3 {
                        for j in i..3 {
                            local[i][j] += b * vals[i].dot(&vals[j]);
                        }
                    }
                }
            }
            ElementClass::Interface(ci) => {
                let cut = &cls.cuts[ci];
                for (sub_tris, plus) in [
                    (&cut.sub_triangles_plus, true),
                    (&cut.sub_triangles_minus, false),
                ] {
                    for st in sub_tris {
                        for (x, w) in rule.mapped(st) {
                            let b = beta.eval(plus, x) * w;
                            let vals: [Vec2; 3] =
                                std::array::from_fn(|i| basis.piece(i, plus).eval(x));
                            for i in 0..3 {
                                for j in i..3 {
                                    local[i][j] += b * vals[i].dot(&vals[j]);
                                }
                            }
                        }
                    }
                }
            }
        }
        for i in 0..3 {
            for j in i..3 {
                local[j][i] = local[i][j];
            }
        }
        let edges = mesh.triangle_edges[t];
        for i in 0..3 {
            for j in 0..3 {
                let v = local[i][j] * mesh.orientation_sign(t, i) * mesh.orientation_sign(t, j);
                triplets.push((edges[i], edges[j], v));
            }
        }
    }
    Ok(triplets)
}

/// Over-penalization block: `eta * sum over cut edges of
/// int_e [p . n_e] [q . n_e]`, integrated exactly on the two sub-segments
/// of each cut edge (traces are piecewise constant).
///
/// Only the immersed basis produces nonzero jumps: the standard RT0 basis
/// has single-valued normal traces, so the same routine returns zero
/// contributions when applied to the traditional method.
pub fn assemble_penalty(
    mesh: &Mesh,
    cls: &Classification,
    method: Method,
    eta: f64,
) -> Result<Vec<(usize, usize, f64)>> {
    assert!(eta >= 0.0);
    let mut triplets = Vec::new();
    if eta == 0.0 {
        return Ok(triplets);
    }
    for &e in &cls.interface_edges {
        let split = cls.edge_cuts[e].expect("interface edge carries a cut").point;
        let (p0, p1) = mesh.edge_endpoints(e);
        let n_e = mesh.edges[e].normal;
        let (t1, t2) = mesh.edge_elements[e];
        let t2 = t2.ok_or_else(|| {
            Error::AssumptionViolation(format!("cut edge {e} lies on the boundary"))
        })?;

        // Up to 5 distinct global DOFs: the shared edge plus two per element.
        let mut dofs: Vec<usize> = Vec::with_capacity(6);
        let mut weight_rows = [[0.0f64; 6]; 2]; // per sub-segment, per stacked local slot
        let mut slot = 0usize;
        for (k, &t) in [t1, t2].iter().enumerate() {
            let basis = local_basis(mesh, cls, t, method)?;
            let orient = if k == 0 { 1.0 } else { -1.0 };
            let cut = cls.cut_for(t);
            for i in 0..3 {
                dofs.push(mesh.triangle_edges[t][i]);
                for (seg, (s0, s1)) in [(p0, split), (split, p1)].into_iter().enumerate() {
                    let mid = 0.5 * (s0 + s1);
                    let plus = cut.map_or(true, |c| c.is_plus(mid));
                    let trace = basis.piece(i, plus).eval(mid).dot(&n_e);
                    weight_rows[seg][slot] =
                        orient * mesh.orientation_sign(t, i) * trace;
                }
                slot += 1;
            }
        }
        for (seg, (s0, s1)) in [(p0, split), (split, p1)].into_iter().enumerate() {
            let len = (s1 - s0).norm();
            let w = &weight_rows[seg];
            for a in 0..slot {
                if w[a] == 0.0 {
                    continue;
                }
                for b in 0..slot {
                    if w[b] != 0.0 {
                        triplets.push((dofs[a], dofs[b], eta * len * w[a] * w[b]));
                    }
                }
            }
        }
    }
    Ok(triplets)
}

/// Divergence block: `B[t, edge_i(t)] = sign * |e_i|`, exact for both
/// methods.
pub fn assemble_b(mesh: &Mesh, dofmap: &DofMap) -> Vec<(usize, usize, f64)> {
    let mut triplets = Vec::with_capacity(3 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangle(t);
        for i in 0..3 {
            triplets.push((
                t,
                mesh.triangle_edges[t][i],
                dofmap.signs[t][i] * tri.edge_length(i),
            ));
        }
    }
    triplets
}

/// Right sides: `f[t] = -int_T f` (cut-aware, degree 4, true-side load) and
/// `g[e] = sign * int_e g ds` on boundary edges (the natural Dirichlet
/// term; the local basis has unit normal trace on its own edge).
pub fn assemble_rhs(
    mesh: &Mesh,
    cls: &Classification,
    problem: &ProblemSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = TriangleRule::with_degree(4)?;
    let mut f_vec = vec![0.0; mesh.n_triangles()];
    for t in 0..mesh.n_triangles() {
        let mut acc = 0.0;
        match cls.element_class[t] {
            ElementClass::NonInterface(_) => {
                let tri = mesh.triangle(t);
                for (x, w) in rule.mapped(&tri.vertices) {
                    acc += w * problem.load(x);
                }
            }
            ElementClass::Interface(ci) => {
                let cut = &cls.cuts[ci];
                for st in cut
                    .sub_triangles_plus
                    .iter()
                    .chain(cut.sub_triangles_minus.iter())
                {
                    for (x, w) in rule.mapped(st) {
                        acc += w * problem.load(x);
                    }
                }
            }
        }
        f_vec[t] = -acc;
    }

    let segment = crate::quadrature::SegmentRule::with_degree(4)?;
    let mut g_vec = vec![0.0; mesh.n_edges()];
    for e in 0..mesh.n_edges() {
        if !mesh.edges[e].boundary {
            continue;
        }
        let (p0, p1) = mesh.edge_endpoints(e);
        let (t, _) = mesh.edge_elements[e];
        let local = mesh.triangle_edges[t]
            .iter()
            .position(|&ge| ge == e)
            .expect("boundary edge belongs to its element");
        let sign = mesh.orientation_sign(t, local);
        let integral: f64 = segment
            .mapped(p0, p1)
            .map(|(x, w)| w * (problem.boundary_g)(x))
            .sum();
        g_vec[e] = sign * integral;
    }
    Ok((g_vec, f_vec))
}

/// Assembles the complete system for a problem/method/penalty combination.
pub fn assemble_system(
    mesh: &Mesh,
    cls: &Classification,
    problem: &ProblemSpec,
    method: Method,
    eta: f64,
) -> Result<MixedSystem> {
    let dofmap = build_dof_map(mesh);
    let mut a_triplets = assemble_a(mesh, cls, problem, method)?;
    if method == Method::Immersed {
        a_triplets.extend(assemble_penalty(mesh, cls, method, eta)?);
    }
    let b_triplets = assemble_b(mesh, &dofmap);
    let (g, f) = assemble_rhs(mesh, cls, problem)?;
    if g.len() != dofmap.n_flux || f.len() != dofmap.n_scalar {
        return Err(Error::DimensionMismatch(format!(
            "rhs sizes ({}, {}) vs dofs ({}, {})",
            g.len(),
            f.len(),
            dofmap.n_flux,
            dofmap.n_scalar
        )));
    }
    Ok(MixedSystem {
        n_flux: dofmap.n_flux,
        n_scalar: dofmap.n_scalar,
        a_triplets,
        b_triplets,
        g,
        f,
        eta,
    })
}

/// Read-only view of a solved flux field: reconstructs the local basis of
/// any element and evaluates the discrete flux there.
pub struct FluxField<'a> {
    pub mesh: &'a Mesh,
    pub cls: &'a Classification,
    pub method: Method,
    pub coefficients: &'a [f64],
}

impl FluxField<'_> {
    /// The element-local flux as an affine field per chord side.
    pub fn local(&self, t: usize) -> Result<LocalElementFlux> {
        let basis = local_basis(self.mesh, self.cls, t, self.method)?;
        let edges = self.mesh.triangle_edges[t];
        let mut plus = AffineVectorField::ZERO;
        let mut minus = AffineVectorField::ZERO;
        for i in 0..3 {
            let c = self.coefficients[edges[i]] * self.mesh.orientation_sign(t, i);
            plus = plus + c * *basis.piece(i, true);
            minus = minus + c * *basis.piece(i, false);
        }
        Ok(LocalElementFlux {
            plus,
            minus,
            cut: self.cls.cut_for(t).cloned(),
        })
    }
}

/// Element-local reconstruction of the discrete flux.
pub struct LocalElementFlux {
    pub plus: AffineVectorField,
    pub minus: AffineVectorField,
    cut: Option<CutTopology>,
}

impl LocalElementFlux {
    pub fn eval(&self, x: Vec2) -> Vec2 {
        match &self.cut {
            Some(cut) if !cut.is_plus(x) => self.minus.eval(x),
            _ => self.plus.eval(x),
        }
    }

    pub fn piece(&self, plus: bool) -> &AffineVectorField {
        if plus {
            &self.plus
        } else {
            &self.minus
        }
    }

    /// Single-valued element divergence.
    pub fn divergence(&self) -> f64 {
        self.plus.divergence()
    }

    pub fn as_piecewise(&self, cut: &CutTopology) -> PiecewiseRTFunction {
        PiecewiseRTFunction::new(self.plus, self.minus, cut)
    }
}
