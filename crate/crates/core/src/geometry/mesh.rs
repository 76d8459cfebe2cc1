//! Conforming triangulations of a rectangle.
//!
//! The uniform construction partitions the rectangle into `N x N` cells and
//! splits every cell along the diagonal from its lower-left to its upper-right
//! corner, so all diagonals run in the same direction. Every triangle of the
//! resulting mesh is right isosceles, hence satisfies the maximum-angle
//! condition required on interface elements.
//!
//! Local edge convention: edge `i` of a triangle is the edge opposite local
//! vertex `i`, i.e. it connects vertices `(i+1)%3` and `(i+2)%3`.

use crate::{rotate_cw, Vec2};

/// Axis-aligned rectangle `(x0,x1) x (y0,y1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        assert!(x1 > x0 && y1 > y0, "empty rectangle");
        Rect { x0, x1, y0, y1 }
    }

    /// The square `(-1,1) x (-1,1)` used by the built-in benchmark problems.
    pub fn symmetric_unit() -> Self {
        Rect::new(-1.0, 1.0, -1.0, 1.0)
    }
}

/// A triangle given by its vertices in counterclockwise order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub vertices: [Vec2; 3],
}

impl Triangle {
    pub fn new(a: Vec2, b: Vec2, c: Vec2) -> Self {
        Triangle { vertices: [a, b, c] }
    }

    /// Signed area; positive for counterclockwise orientation.
    pub fn signed_area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Vec2 {
        (self.vertices[0] + self.vertices[1] + self.vertices[2]) / 3.0
    }

    /// Endpoints of local edge `i` (opposite vertex `i`), in CCW traversal order.
    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        (self.vertices[(i + 1) % 3], self.vertices[(i + 2) % 3])
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let (p, q) = self.edge(i);
        (q - p).norm()
    }

    /// Unit normal of local edge `i` pointing out of the triangle.
    pub fn outward_normal(&self, i: usize) -> Vec2 {
        let (p, q) = self.edge(i);
        rotate_cw((q - p).normalize())
    }

    pub fn edge_midpoint(&self, i: usize) -> Vec2 {
        let (p, q) = self.edge(i);
        0.5 * (p + q)
    }

    pub fn diameter(&self) -> f64 {
        (0..3).map(|i| self.edge_length(i)).fold(0.0, f64::max)
    }

    /// Largest interior angle, in radians.
    pub fn max_angle(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            let v = self.vertices[i];
            let u = self.vertices[(i + 1) % 3] - v;
            let w = self.vertices[(i + 2) % 3] - v;
            let angle = (u.dot(&w) / (u.norm() * w.norm())).clamp(-1.0, 1.0).acos();
            worst = worst.max(angle);
        }
        worst
    }

    /// Interior angle at local vertex `i`.
    pub fn angle_at(&self, i: usize) -> f64 {
        let v = self.vertices[i];
        let u = self.vertices[(i + 1) % 3] - v;
        let w = self.vertices[(i + 2) % 3] - v;
        (u.dot(&w) / (u.norm() * w.norm())).clamp(-1.0, 1.0).acos()
    }

    /// Incenter: center of the largest inscribed circle.
    pub fn incenter(&self) -> Vec2 {
        let [a, b, c] = self.vertices;
        let la = (c - b).norm();
        let lb = (a - c).norm();
        let lc = (b - a).norm();
        (la * a + lb * b + lc * c) / (la + lb + lc)
    }
}

/// Mesh edge: vertex pair, canonical unit normal and boundary flag.
///
/// The canonical normal fixes the sign of the global flux degree of freedom
/// living on the edge. For boundary edges it points out of the domain, so the
/// boundary DOF is the outward flux.
#[derive(Debug, Clone, Copy)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub normal: Vec2,
    pub boundary: bool,
}

/// A conforming triangulation with edge connectivity.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Vec2>,
    /// Vertex index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    /// Global edge id of each local edge (local edge `i` opposite vertex `i`).
    pub triangle_edges: Vec<[usize; 3]>,
    /// Incident triangles per edge: one for boundary edges, two otherwise.
    pub edge_elements: Vec<(usize, Option<usize>)>,
    /// Largest triangle diameter.
    pub h: f64,
    /// Subdivision count of the uniform construction.
    pub n_subdivisions: usize,
    pub domain: Rect,
}

impl Mesh {
    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle(&self, t: usize) -> Triangle {
        let [a, b, c] = self.triangles[t];
        Triangle::new(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn edge_endpoints(&self, e: usize) -> (Vec2, Vec2) {
        let [a, b] = self.edges[e].vertices;
        (self.vertices[a], self.vertices[b])
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let (p, q) = self.edge_endpoints(e);
        (q - p).norm()
    }

    /// Sign relating the outward normal of `t` on its local edge `i` to the
    /// canonical normal of the corresponding global edge.
    pub fn orientation_sign(&self, t: usize, i: usize) -> f64 {
        let d = self.triangle(t).outward_normal(i).dot(&self.edges[self.triangle_edges[t][i]].normal);
        if d > 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Builds the uniform `N x N` triangulation of `domain` with all cell
/// diagonals running lower-left to upper-right.
///
/// Counts satisfy `triangles = 2N^2`, `edges = 3N^2 + 2N`,
/// `vertices = (N+1)^2`.
pub fn build_uniform_mesh(n: usize, domain: Rect) -> Mesh {
    assert!(n >= 1, "subdivision count must be positive");
    let np = n + 1;
    let dx = (domain.x1 - domain.x0) / n as f64;
    let dy = (domain.y1 - domain.y0) / n as f64;

    let mut vertices = Vec::with_capacity(np * np);
    for j in 0..np {
        for i in 0..np {
            vertices.push(Vec2::new(
                domain.x0 + i as f64 * dx,
                domain.y0 + j as f64 * dy,
            ));
        }
    }
    let vid = |i: usize, j: usize| j * np + i;

    // Cell (i,j): lower-left ll, lower-right lr, upper-right ur, upper-left ul.
    // Diagonal ll-ur gives the lower-right triangle (ll,lr,ur) and the
    // upper-left triangle (ll,ur,ul), both counterclockwise.
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (ll, lr) = (vid(i, j), vid(i + 1, j));
            let (ul, ur) = (vid(i, j + 1), vid(i + 1, j + 1));
            triangles.push([ll, lr, ur]);
            triangles.push([ll, ur, ul]);
        }
    }

    // Dedup edges through a sorted-pair map.
    let mut edge_of: std::collections::HashMap<(usize, usize), usize> =
        std::collections::HashMap::with_capacity(3 * n * n + 2 * n);
    let mut edges: Vec<Edge> = Vec::with_capacity(3 * n * n + 2 * n);
    let mut edge_elements: Vec<(usize, Option<usize>)> = Vec::new();
    let mut triangle_edges = vec![[usize::MAX; 3]; triangles.len()];

    for (t, tri) in triangles.iter().enumerate() {
        for i in 0..3 {
            let a = tri[(i + 1) % 3];
            let b = tri[(i + 2) % 3];
            let key = (a.min(b), a.max(b));
            let e = *edge_of.entry(key).or_insert_with(|| {
                let dir = (vertices[key.1] - vertices[key.0]).normalize();
                edges.push(Edge {
                    vertices: [key.0, key.1],
                    normal: rotate_cw(dir),
                    boundary: false,
                });
                edge_elements.push((t, None));
                edges.len() - 1
            });
            if edge_elements[e].0 != t {
                edge_elements[e].1 = Some(t);
            }
            triangle_edges[t][i] = e;
        }
    }

    let mut mesh = Mesh {
        vertices,
        triangles,
        edges,
        triangle_edges,
        edge_elements,
        h: (dx * dx + dy * dy).sqrt(),
        n_subdivisions: n,
        domain,
    };

    // Boundary edges get an outward canonical normal so that the boundary
    // flux DOF is the outward flux.
    for e in 0..mesh.edges.len() {
        if mesh.edge_elements[e].1.is_none() {
            mesh.edges[e].boundary = true;
            let (t, _) = mesh.edge_elements[e];
            let local = mesh.triangle_edges[t]
                .iter()
                .position(|&ge| ge == e)
                .expect("edge belongs to its incident triangle");
            mesh.edges[e].normal = mesh.triangle(t).outward_normal(local);
        }
    }

    debug_assert!(mesh
        .triangles
        .iter()
        .enumerate()
        .all(|(t, _)| mesh.triangle(t).signed_area() > 0.0));
    mesh
}
