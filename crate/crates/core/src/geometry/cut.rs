//! Cut-cell classification and per-element cut geometry.
//!
//! Each element crossed by the interface is intersected on exactly two of
//! its edges. The chord through the two intersection points splits the
//! element into a triangle (containing the vertex shared by the cut edges)
//! and a convex quadrilateral; both are recorded with fan triangulations so
//! that composite quadrature can integrate piecewise-smooth integrands.
//!
//! The classification rejects, rather than repairs, configurations excluded
//! by the construction: interfaces passing through (or too close to) a
//! vertex, edges crossed twice, cut boundary edges, and interface loops
//! contained in a single element.

use super::level_set::LevelSet;
use super::mesh::{Mesh, Triangle};
use crate::error::{Error, Result};
use crate::{rotate_cw, Vec2};

/// Which side of the interface an uncut element lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn from_sign(v: f64) -> Side {
        if v > 0.0 {
            Side::Plus
        } else {
            Side::Minus
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ElementClass {
    NonInterface(Side),
    /// Index into [`Classification::cuts`].
    Interface(usize),
}

/// Intersection of the interface with a mesh edge.
#[derive(Debug, Clone, Copy)]
pub struct EdgeCut {
    pub point: Vec2,
    /// Parameter along the edge from its first stored vertex, in (0,1).
    pub t: f64,
}

/// Cut geometry of one interface element.
#[derive(Debug, Clone)]
pub struct CutTopology {
    pub element: usize,
    /// Local ids (ascending) of the two cut edges.
    pub cut_edges_local: [usize; 2],
    /// Intersection point on `cut_edges_local[0]`.
    pub d: Vec2,
    /// Intersection point on `cut_edges_local[1]`.
    pub e: Vec2,
    /// Unit normal of the chord, pointing into the plus piece.
    pub n_h: Vec2,
    /// Unit tangent of the chord, the normal rotated 90 degrees clockwise.
    pub t_h: Vec2,
    /// Evaluation point on the chord (its midpoint).
    pub x_t: Vec2,
    /// Reciprocal-coefficient samples at `x_t`.
    pub beta_plus: f64,
    pub beta_minus: f64,
    /// Vertices of the plus piece, counterclockwise (3 or 4 points).
    pub plus_polygon: Vec<Vec2>,
    pub minus_polygon: Vec<Vec2>,
    pub sub_triangles_plus: Vec<[Vec2; 3]>,
    pub sub_triangles_minus: Vec<[Vec2; 3]>,
}

impl CutTopology {
    /// True if `x` lies on the plus side of the chord.
    ///
    /// Piecewise evaluation is always resolved against the chord, not the
    /// exact interface; the two differ only in an O(h^2)-thin band.
    #[inline]
    pub fn is_plus(&self, x: Vec2) -> bool {
        (x - self.d).dot(&self.n_h) >= 0.0
    }

    pub fn plus_area(&self) -> f64 {
        polygon_area(&self.plus_polygon)
    }

    pub fn minus_area(&self) -> f64 {
        polygon_area(&self.minus_polygon)
    }

    /// Swaps the plus/minus roles, flipping the chord frame accordingly.
    /// Used by property checks of the two-case symmetry.
    pub fn swapped(&self) -> CutTopology {
        CutTopology {
            element: self.element,
            cut_edges_local: self.cut_edges_local,
            d: self.d,
            e: self.e,
            n_h: -self.n_h,
            t_h: -self.t_h,
            x_t: self.x_t,
            beta_plus: self.beta_minus,
            beta_minus: self.beta_plus,
            plus_polygon: self.minus_polygon.clone(),
            minus_polygon: self.plus_polygon.clone(),
            sub_triangles_plus: self.sub_triangles_minus.clone(),
            sub_triangles_minus: self.sub_triangles_plus.clone(),
        }
    }
}

fn polygon_area(poly: &[Vec2]) -> f64 {
    let mut acc = 0.0;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        acc += p.x * q.y - q.x * p.y;
    }
    0.5 * acc
}

/// Fan triangulation from the first listed vertex; valid for convex polygons.
fn fan_triangulate(poly: &[Vec2]) -> Vec<[Vec2; 3]> {
    (1..poly.len() - 1)
        .map(|i| [poly[0], poly[i], poly[i + 1]])
        .collect()
}

/// Builds the cut topology of `tri` from the chord through `points`,
/// lying on the two local edges `cut_local` (ascending ids).
///
/// `apex_is_plus` states whether the piece containing the vertex shared by
/// the two cut edges is the plus piece. Coefficient samples are taken at the
/// chord midpoint.
pub fn cut_from_chord(
    element: usize,
    tri: &Triangle,
    cut_local: [usize; 2],
    points: [Vec2; 2],
    apex_is_plus: bool,
    beta_plus: &dyn Fn(Vec2) -> f64,
    beta_minus: &dyn Fn(Vec2) -> f64,
) -> Result<CutTopology> {
    assert!(cut_local[0] < cut_local[1] && cut_local[1] < 3);
    let area = tri.signed_area();
    if area <= 0.0 {
        return Err(Error::DegenerateTriangle(area));
    }
    let chord = points[1] - points[0];
    if chord.norm() <= 1e-13 * tri.diameter() {
        return Err(Error::AssumptionViolation(format!(
            "degenerate chord on element {element}: intersection points coincide"
        )));
    }

    // Vertex shared by the two cut edges: the one that is an endpoint of
    // neither. Local edge i is opposite local vertex i.
    let apex = 3 - cut_local[0] - cut_local[1];

    // Walk the boundary counterclockwise, inserting the cut points on their
    // edges: between vertices v_k and v_{k+1} lies local edge (k+2)%3.
    // Splitting the cyclic walk at the two cut points yields the two pieces,
    // each starting at a chord endpoint, both counterclockwise.
    let mut seq: Vec<(Option<usize>, Vec2)> = Vec::with_capacity(5);
    for k in 0..3 {
        seq.push((Some(k), tri.vertices[k]));
        let edge_here = (k + 2) % 3;
        if let Some(slot) = cut_local.iter().position(|&c| c == edge_here) {
            seq.push((None, points[slot]));
        }
    }
    let cut_pos: Vec<usize> = seq
        .iter()
        .enumerate()
        .filter_map(|(i, (id, _))| id.is_none().then_some(i))
        .collect();
    let (c1, c2) = (cut_pos[0], cut_pos[1]);
    let poly_a = seq[c1..=c2].to_vec();
    let mut poly_b = seq[c2..].to_vec();
    poly_b.extend_from_slice(&seq[..=c1]);

    let a_has_apex = poly_a.iter().any(|(id, _)| *id == Some(apex));
    let (apex_items, other_items) = if a_has_apex { (poly_a, poly_b) } else { (poly_b, poly_a) };
    let apex_poly: Vec<Vec2> = apex_items.into_iter().map(|(_, p)| p).collect();
    let other_poly: Vec<Vec2> = other_items.into_iter().map(|(_, p)| p).collect();
    debug_assert_eq!(apex_poly.len(), 3);
    debug_assert_eq!(other_poly.len(), 4);

    let (plus_polygon, minus_polygon) = if apex_is_plus {
        (apex_poly, other_poly)
    } else {
        (other_poly, apex_poly)
    };

    let a_plus = polygon_area(&plus_polygon);
    let a_minus = polygon_area(&minus_polygon);
    debug_assert!(a_plus > 0.0 && a_minus > 0.0);
    debug_assert!((a_plus + a_minus - area).abs() <= 1e-12 * area);

    let d = points[0];
    let e = points[1];
    let x_t = 0.5 * (d + e);
    // Chord normal oriented toward the plus piece.
    let mut n_h = rotate_cw((e - d).normalize());
    let plus_centroid = plus_polygon.iter().sum::<Vec2>() / plus_polygon.len() as f64;
    if n_h.dot(&(plus_centroid - x_t)) < 0.0 {
        n_h = -n_h;
    }
    let t_h = rotate_cw(n_h);

    let bp = beta_plus(x_t);
    let bm = beta_minus(x_t);
    if !(bp > 0.0 && bm > 0.0) {
        return Err(Error::NonPositiveCoefficient(bp, bm));
    }

    Ok(CutTopology {
        element,
        cut_edges_local: cut_local,
        d,
        e,
        n_h,
        t_h,
        x_t,
        beta_plus: bp,
        beta_minus: bm,
        sub_triangles_plus: fan_triangulate(&plus_polygon),
        sub_triangles_minus: fan_triangulate(&minus_polygon),
        plus_polygon,
        minus_polygon,
    })
}

/// Classification of every element and edge of a mesh against a level set.
#[derive(Debug)]
pub struct Classification {
    pub element_class: Vec<ElementClass>,
    pub cuts: Vec<CutTopology>,
    /// Per global edge: the intersection point, if cut.
    pub edge_cuts: Vec<Option<EdgeCut>>,
    /// Global ids of cut edges, ascending.
    pub interface_edges: Vec<usize>,
}

impl Classification {
    pub fn cut_for(&self, t: usize) -> Option<&CutTopology> {
        match self.element_class[t] {
            ElementClass::Interface(i) => Some(&self.cuts[i]),
            ElementClass::NonInterface(_) => None,
        }
    }

    pub fn n_interface_elements(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_interface_edge(&self, e: usize) -> bool {
        self.edge_cuts[e].is_some()
    }
}

/// Root of the signed distance along the segment `p0 + t (p1 - p0)`.
///
/// Bisection on the guaranteed sign change; no level-set derivatives needed.
/// Converges to 1e-13 in position.
fn edge_root(ls: &LevelSet, p0: Vec2, p1: Vec2, v0: f64) -> EdgeCut {
    let len = (p1 - p0).norm();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut f_lo = v0;
    let mut iter = 0;
    while (hi - lo) * len > 1e-13 && iter < 200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = ls.value(p0 + mid * (p1 - p0));
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        iter += 1;
    }
    let t = 0.5 * (lo + hi);
    EdgeCut {
        point: p0 + t * (p1 - p0),
        t,
    }
}

/// Classifies all elements and edges of `mesh` against `ls`.
///
/// `tol` is the vertex exclusion distance (use `1e-12 * mesh.h`): the
/// interface must not pass within `tol` of any vertex. The reciprocal
/// coefficients `beta_plus`/`beta_minus` must be globally valid closed
/// forms; they are sampled at the chord midpoint of every cut element.
pub fn classify_mesh(
    mesh: &Mesh,
    ls: &LevelSet,
    tol: f64,
    beta_plus: &dyn Fn(Vec2) -> f64,
    beta_minus: &dyn Fn(Vec2) -> f64,
) -> Result<Classification> {
    let vertex_values: Vec<f64> = mesh.vertices.iter().map(|&v| ls.value(v)).collect();
    if let Some(v) = vertex_values.iter().position(|r| r.abs() <= tol) {
        return Err(Error::AssumptionViolation(format!(
            "interface passes within {tol:e} of vertex {v}; refine the mesh or perturb the interface"
        )));
    }

    // Edge cuts are computed once per edge so that the two incident elements
    // agree bit-for-bit on the intersection point.
    let mut edge_cuts: Vec<Option<EdgeCut>> = vec![None; mesh.n_edges()];
    let mut interface_edges = Vec::new();
    for e in 0..mesh.n_edges() {
        let [a, b] = mesh.edges[e].vertices;
        let (va, vb) = (vertex_values[a], vertex_values[b]);
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        if (va > 0.0) != (vb > 0.0) {
            if mesh.edges[e].boundary {
                return Err(Error::AssumptionViolation(format!(
                    "interface crosses boundary edge {e}; it must stay inside the domain"
                )));
            }
            edge_cuts[e] = Some(edge_root(ls, pa, pb, va));
            interface_edges.push(e);
        } else {
            // Same endpoint signs: a differing midpoint sign means the edge
            // is crossed twice, which the construction excludes.
            let vm = ls.value(0.5 * (pa + pb));
            if vm != 0.0 && (vm > 0.0) != (va > 0.0) {
                return Err(Error::AssumptionViolation(format!(
                    "edge {e} is crossed by the interface more than once"
                )));
            }
        }
    }

    let mut element_class = Vec::with_capacity(mesh.n_triangles());
    let mut cuts = Vec::new();
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangle(t);
        let cut_local: Vec<usize> = (0..3)
            .filter(|&i| edge_cuts[mesh.triangle_edges[t][i]].is_some())
            .collect();
        match cut_local.len() {
            0 => {
                let sign = vertex_values[mesh.triangles[t][0]];
                if (ls.value(tri.centroid()) > 0.0) != (sign > 0.0) {
                    return Err(Error::AssumptionViolation(format!(
                        "interface enters element {t} without crossing its edges"
                    )));
                }
                element_class.push(ElementClass::NonInterface(Side::from_sign(sign)));
            }
            2 => {
                if tri.max_angle() > std::f64::consts::FRAC_PI_2 + 1e-12 {
                    return Err(Error::AssumptionViolation(format!(
                        "interface element {t} has maximum angle {:.6} > pi/2",
                        tri.max_angle()
                    )));
                }
                let local = [cut_local[0], cut_local[1]];
                let points = [
                    edge_cuts[mesh.triangle_edges[t][local[0]]].unwrap().point,
                    edge_cuts[mesh.triangle_edges[t][local[1]]].unwrap().point,
                ];
                let apex = 3 - local[0] - local[1];
                let apex_is_plus = vertex_values[mesh.triangles[t][apex]] > 0.0;
                let cut = cut_from_chord(t, &tri, local, points, apex_is_plus, beta_plus, beta_minus)?;
                element_class.push(ElementClass::Interface(cuts.len()));
                cuts.push(cut);
            }
            k => {
                return Err(Error::AssumptionViolation(format!(
                    "element {t} has {k} cut edges; the interface must cross exactly two"
                )));
            }
        }
    }

    Ok(Classification {
        element_class,
        cuts,
        edge_cuts,
        interface_edges,
    })
}

/// Closed polygonal approximation of the interface: the chain of chords of
/// all interface elements.
#[derive(Debug, Clone)]
pub struct InterfacePolyline {
    /// Chained intersection points; the segment `points[i] -> points[i+1]`
    /// (cyclically) is the chord of one interface element.
    pub points: Vec<Vec2>,
}

impl InterfacePolyline {
    pub fn n_segments(&self) -> usize {
        self.points.len()
    }

    /// Largest signed-distance magnitude over segment midpoints; the chord
    /// endpoints lie on the interface, so this measures the sagitta.
    pub fn max_deviation(&self, ls: &LevelSet) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let m = 0.5 * (self.points[i] + self.points[(i + 1) % n]);
                ls.value(m).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Chains the per-element chords into the closed interface polyline.
pub fn polyline_interface(mesh: &Mesh, cls: &Classification) -> Result<InterfacePolyline> {
    if cls.cuts.is_empty() {
        return Err(Error::Topology(
            "no interface elements: nothing to chain".into(),
        ));
    }
    // Each cut edge joins exactly two interface elements; walk the chords.
    let global_cut_edges = |cut: &CutTopology| -> [usize; 2] {
        [
            mesh.triangle_edges[cut.element][cut.cut_edges_local[0]],
            mesh.triangle_edges[cut.element][cut.cut_edges_local[1]],
        ]
    };
    let mut elements_of_edge: std::collections::HashMap<usize, Vec<usize>> =
        std::collections::HashMap::new();
    for (i, cut) in cls.cuts.iter().enumerate() {
        for ge in global_cut_edges(cut) {
            elements_of_edge.entry(ge).or_default().push(i);
        }
    }
    for (e, els) in &elements_of_edge {
        if els.len() != 2 {
            return Err(Error::Topology(format!(
                "cut edge {e} borders {} interface elements, expected 2",
                els.len()
            )));
        }
    }

    let start = 0usize;
    let mut visited = vec![false; cls.cuts.len()];
    let start_edges = global_cut_edges(&cls.cuts[start]);
    let mut chain_edges = vec![start_edges[0], start_edges[1]];
    visited[start] = true;
    let mut current = start;
    loop {
        let last_edge = *chain_edges.last().unwrap();
        let next = elements_of_edge[&last_edge]
            .iter()
            .copied()
            .find(|&i| i != current)
            .expect("interior cut edge has two incident interface elements");
        if next == start {
            break;
        }
        if visited[next] {
            return Err(Error::Topology(
                "interface segments do not form a single closed loop".into(),
            ));
        }
        visited[next] = true;
        let edges = global_cut_edges(&cls.cuts[next]);
        let other = if edges[0] == last_edge { edges[1] } else { edges[0] };
        chain_edges.push(other);
        current = next;
    }
    // The walk must close at the starting chord and visit every element.
    if *chain_edges.last().unwrap() != start_edges[0] || visited.iter().any(|&v| !v) {
        return Err(Error::Topology(
            "interface segments do not form a single closed loop".into(),
        ));
    }
    chain_edges.pop();

    let points = chain_edges
        .iter()
        .map(|&ge| cls.edge_cuts[ge].expect("chained edge is cut").point)
        .collect();
    Ok(InterfacePolyline { points })
}
