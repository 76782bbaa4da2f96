//! Base diagrams: polygons with focus-focus nodes, eigenlines and cut rays.
//!
//! The singular affine structure is presented concretely: away from the cut
//! rays the period lattice is the standard `Z dx + Z dy`, and crossing a cut
//! ray counterclockwise around its node applies the node's shear.  This is
//! the finitely-describable chart the classification works in; cut rays are
//! straight segments here even though in other charts they may curve.
//!
//! Two conventions are fixed once and used everywhere.  Eigen directions are
//! stored as primitive integer vectors normalized to point upward (or
//! rightward when horizontal), and the `+` cut ray leaves the node in the
//! normalized direction.  Walking the polygon boundary counterclockwise
//! winds once counterclockwise around every interior node, so boundary
//! transport across a cut always applies the shear itself, never its
//! inverse.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::One;

use crate::coeff::Rational;
use crate::numerics::continue_log;
use crate::par;

const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BaseError {
    #[error("the standard lattice model needs 0 < |z| < 1, got |z| = {abs}")]
    OutsideModelDomain { abs: f64 },
    #[error("multiplicity must be positive")]
    ZeroMultiplicity,
    #[error("continuation needs at least {min} steps, got {steps}")]
    TooFewSteps { steps: u32, min: u32 },
    #[error("continued basis is off the integer lattice by {deviation}")]
    MonodromyNotIntegral { deviation: f64 },
    #[error("linear part has determinant {det}, expected +1")]
    NotUnimodular { det: i64 },
    #[error("basis covectors are linearly dependent")]
    DegenerateBasis,
}

/// Angle-range convention for `ln z` in the lattice formula: winding `k`
/// picks arguments in (-pi + 2*pi*k, pi + 2*pi*k].  The default is the
/// principal branch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Branch {
    pub winding: i32,
}

/// A fiber of the period bundle: base point plus two independent covectors
/// generating the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeBasis {
    pub at: (f64, f64),
    pub v1: (f64, f64),
    pub v2: (f64, f64),
}

impl LatticeBasis {
    pub fn new(at: (f64, f64), v1: (f64, f64), v2: (f64, f64)) -> Result<Self, BaseError> {
        if v1.0 * v2.1 - v1.1 * v2.0 == 0.0 {
            return Err(BaseError::DegenerateBasis);
        }
        Ok(LatticeBasis { at, v1, v2 })
    }

    /// Matrix with the two covectors as columns.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.v1.0, self.v2.0], [self.v1.1, self.v2.1]]
    }

    /// Coordinates of `other`'s covectors in this basis.
    pub fn change_of_basis(&self, other: &LatticeBasis) -> [[f64; 2]; 2] {
        let m = self.matrix();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        let o = other.matrix();
        let mut out = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = inv[r][0] * o[0][c] + inv[r][1] * o[1][c];
            }
        }
        out
    }

    /// Whether the two bases generate the same lattice: the change of basis
    /// must be an integer matrix of determinant +-1, up to `tol` entrywise.
    pub fn same_lattice(&self, other: &LatticeBasis, tol: f64) -> bool {
        let c = self.change_of_basis(other);
        let mut rounded = [[0i64; 2]; 2];
        for r in 0..2 {
            for s in 0..2 {
                rounded[r][s] = c[r][s].round() as i64;
                if (c[r][s] - rounded[r][s] as f64).abs() > tol {
                    return false;
                }
            }
        }
        (rounded[0][0] * rounded[1][1] - rounded[0][1] * rounded[1][0]).abs() == 1
    }
}

/// Fiber of the standard focus-focus lattice of multiplicity `m` over `z`:
/// `Z dx + Z (-(m/2pi) Im ln z dx - (m/2pi) Re ln z dy)`.
///
/// The model is used only near the puncture, so `|z| < 1` is required; there
/// `Re ln z < 0` and the two covectors are automatically independent.  (At
/// `|z| = 1` the stated fiber degenerates; the source formula appears to
/// carry a typo there and no global reading is guessed.)
pub fn standard_lattice(m: u32, z: Complex64, branch: Branch) -> Result<LatticeBasis, BaseError> {
    if m == 0 {
        return Err(BaseError::ZeroMultiplicity);
    }
    let abs = z.norm();
    if !(abs > 0.0 && abs < 1.0) {
        return Err(BaseError::OutsideModelDomain { abs });
    }
    let l = z.ln() + Complex64::new(0.0, TAU * branch.winding as f64);
    let scale = -(m as f64) / TAU;
    LatticeBasis::new((z.re, z.im), (1.0, 0.0), (scale * l.im, scale * l.re))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopDirection {
    Ccw,
    Cw,
}

const MONODROMY_MIN_STEPS: u32 = 360;
const MONODROMY_DEFAULT_STEPS: u32 = 3600;
const MONODROMY_TOL: f64 = 1e-6;

/// Parallel transport of the standard lattice basis once around the node,
/// by numerical continuation of the logarithm along a circle of the given
/// radius.  Returns the integer matrix expressing the transported basis in
/// the starting basis at `z = radius`.
pub fn node_monodromy(m: u32, dir: LoopDirection, radius: f64) -> Result<[[i64; 2]; 2], BaseError> {
    node_monodromy_steps(m, dir, radius, MONODROMY_DEFAULT_STEPS)
}

pub fn node_monodromy_steps(
    m: u32,
    dir: LoopDirection,
    radius: f64,
    steps: u32,
) -> Result<[[i64; 2]; 2], BaseError> {
    if m == 0 {
        return Err(BaseError::ZeroMultiplicity);
    }
    if !(radius > 0.0 && radius < 1.0) {
        return Err(BaseError::OutsideModelDomain { abs: radius });
    }
    if steps < MONODROMY_MIN_STEPS {
        return Err(BaseError::TooFewSteps { steps, min: MONODROMY_MIN_STEPS });
    }
    let sign = match dir {
        LoopDirection::Ccw => 1.0,
        LoopDirection::Cw => -1.0,
    };
    let start = Complex64::new(radius.ln(), 0.0);
    let mut w = start;
    for k in 1..=steps {
        let th = sign * TAU * k as f64 / steps as f64;
        let z = Complex64::new(radius * th.cos(), radius * th.sin());
        w = continue_log(w, z);
    }
    // Basis as a function of the tracked logarithm; the first covector never
    // moves, so the change of basis is triangular.
    let scale = -(m as f64) / TAU;
    let basis = |l: Complex64| [[1.0, scale * l.im], [0.0, scale * l.re]];
    let b0 = basis(start);
    let b1 = basis(w);
    let det = b0[0][0] * b0[1][1] - b0[0][1] * b0[1][0];
    let inv = [[b0[1][1] / det, -b0[0][1] / det], [-b0[1][0] / det, b0[0][0] / det]];
    let mut out = [[0i64; 2]; 2];
    let mut worst: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let v = inv[r][0] * b1[0][c] + inv[r][1] * b1[1][c];
            out[r][c] = v.round() as i64;
            worst = worst.max((v - out[r][c] as f64).abs());
        }
    }
    if worst > MONODROMY_TOL {
        return Err(BaseError::MonodromyNotIntegral { deviation: worst });
    }
    Ok(out)
}

/// Elementary divisors (d1, d2) with d1 | d2 of an integer 2x2 matrix; zero
/// entries follow the usual convention (the zero matrix gives (0, 0), a
/// singular nonzero matrix (g, 0)).
pub fn smith_normal_form_2x2(m: [[i64; 2]; 2]) -> (i64, i64) {
    let g = m[0][0]
        .abs()
        .gcd(&m[0][1].abs())
        .gcd(&m[1][0].abs())
        .gcd(&m[1][1].abs());
    if g == 0 {
        return (0, 0);
    }
    let det = (m[0][0] as i128 * m[1][1] as i128 - m[0][1] as i128 * m[1][0] as i128).unsigned_abs();
    (g, (det / g as u128) as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutSign {
    Plus,
    Minus,
}

impl CutSign {
    pub fn flip(self) -> CutSign {
        match self {
            CutSign::Plus => CutSign::Minus,
            CutSign::Minus => CutSign::Plus,
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            CutSign::Plus => 1,
            CutSign::Minus => -1,
        }
    }
}

impl std::fmt::Display for CutSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CutSign::Plus => "+",
            CutSign::Minus => "-",
        })
    }
}

/// A focus-focus value in the diagram: position, multiplicity, eigenline
/// direction, and which half of the eigenline is the cut ray.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub pos: (Rational, Rational),
    pub mult: u32,
    pub eigen: (i64, i64),
    pub cut: CutSign,
}

/// Marked almost-toric closed disk: counterclockwise polygon plus ordered
/// nodes.  Vertices are the corner stratum, open edges the boundary stratum,
/// the interior minus the nodes the top stratum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseDiagram {
    pub polygon: Vec<(Rational, Rational)>,
    pub nodes: Vec<Node>,
}

/// Integral affine transformation of the plane with determinant +1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineIso {
    pub linear: [[i64; 2]; 2],
    pub translate: (Rational, Rational),
}

fn det2(m: [[i64; 2]; 2]) -> i64 {
    let d = m[0][0] as i128 * m[1][1] as i128 - m[0][1] as i128 * m[1][0] as i128;
    d.clamp(i64::MIN as i128, i64::MAX as i128) as i64
}

impl AffineIso {
    pub fn new(linear: [[i64; 2]; 2], translate: (Rational, Rational)) -> Result<Self, BaseError> {
        let det = det2(linear);
        if det != 1 {
            return Err(BaseError::NotUnimodular { det });
        }
        Ok(AffineIso { linear, translate })
    }

    pub fn identity() -> Self {
        AffineIso { linear: [[1, 0], [0, 1]], translate: (Rational::zero(), Rational::zero()) }
    }

    pub fn apply_point(&self, p: &(Rational, Rational)) -> (Rational, Rational) {
        let a = &self.linear;
        let x = p
            .0
            .mul(&Rational::from_int(a[0][0]))
            .add(&p.1.mul(&Rational::from_int(a[0][1])))
            .add(&self.translate.0);
        let y = p
            .0
            .mul(&Rational::from_int(a[1][0]))
            .add(&p.1.mul(&Rational::from_int(a[1][1])))
            .add(&self.translate.1);
        (x, y)
    }

    /// Image of an integer vector under the linear part; `None` on overflow.
    pub fn apply_vec(&self, v: (i64, i64)) -> Option<(i64, i64)> {
        let a = &self.linear;
        let x = (a[0][0] as i128 * v.0 as i128 + a[0][1] as i128 * v.1 as i128).try_into().ok()?;
        let y = (a[1][0] as i128 * v.0 as i128 + a[1][1] as i128 * v.1 as i128).try_into().ok()?;
        Some((x, y))
    }

    /// `self` after `inner`.
    pub fn compose(&self, inner: &AffineIso) -> AffineIso {
        let a = &self.linear;
        let b = &inner.linear;
        let mut lin = [[0i64; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                lin[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        let t = self.apply_point(&inner.translate);
        AffineIso { linear: lin, translate: t }
    }

    pub fn invert(&self) -> AffineIso {
        let a = &self.linear;
        // Adjugate equals the inverse since the determinant is +1.
        let lin = [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]];
        let inv = AffineIso { linear: lin, translate: (Rational::zero(), Rational::zero()) };
        let t = inv.apply_point(&self.translate);
        AffineIso { linear: lin, translate: (t.0.neg(), t.1.neg()) }
    }
}

/// Normalized eigen representative: upward, or rightward when horizontal.
pub fn canonical_eigen(v: (i64, i64)) -> (i64, i64) {
    if v.1 > 0 || (v.1 == 0 && v.0 > 0) {
        v
    } else {
        (-v.0, -v.1)
    }
}

impl BaseDiagram {
    /// Image diagram under an affine isomorphism.  Eigen directions are
    /// re-normalized; when normalization flips the vector the cut sign flips
    /// with it, so the cut ray as a set is exactly the image of the old one.
    pub fn transformed(&self, g: &AffineIso) -> BaseDiagram {
        let polygon = self.polygon.iter().map(|v| g.apply_point(v)).collect();
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let image = g.apply_vec(n.eigen).expect("eigen image overflows i64");
                let eigen = canonical_eigen(image);
                let cut = if eigen == image { n.cut } else { n.cut.flip() };
                Node { pos: g.apply_point(&n.pos), mult: n.mult, eigen, cut }
            })
            .collect();
        BaseDiagram { polygon, nodes }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiagramFinding {
    #[error("polygon has {vertices} vertices, need at least 3")]
    PolygonTooSmall { vertices: usize },
    #[error("vertices {vertex} and its successor coincide")]
    RepeatedVertex { vertex: usize },
    #[error("polygon is not counterclockwise")]
    PolygonNotCounterclockwise,
    #[error("polygon boundary self-intersects")]
    PolygonNotSimple,
    #[error("corner at vertex {vertex} has determinant {det} after transport, expected 1")]
    CornerNotUnimodular { vertex: usize, det: BigInt },
    #[error("node {node} has zero multiplicity")]
    ZeroMultiplicity { node: usize },
    #[error("node {node} eigen direction is not primitive")]
    EigenNotPrimitive { node: usize },
    #[error("node {node} eigen direction is not normalized")]
    EigenNotCanonical { node: usize },
    #[error("node {node} eigen direction is not fixed by its shear")]
    EigenNotShearFixed { node: usize },
    #[error("node {node} is not strictly inside the polygon")]
    NodeNotInterior { node: usize },
    #[error("nodes {first} and {second} coincide")]
    DuplicateNode { first: usize, second: usize },
    #[error("cut ray of node {node} does not end at a listed vertex")]
    CutMissesVertex { node: usize },
    #[error("cut ray of node {cut} passes through node {node}")]
    CutHitsNode { cut: usize, node: usize },
    #[error("cut rays of nodes {first} and {second} meet")]
    CutsIntersect { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramReport {
    findings: Vec<DiagramFinding>,
}

impl DiagramReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn findings(&self) -> &[DiagramFinding] {
        &self.findings
    }
}

impl std::fmt::Display for DiagramReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.findings.is_empty() {
            return f.write_str("diagram is valid");
        }
        writeln!(f, "{} finding(s):", self.findings.len())?;
        for x in &self.findings {
            writeln!(f, "  - {x}")?;
        }
        Ok(())
    }
}

type RPt = (Rational, Rational);

fn rsub(a: &RPt, b: &RPt) -> RPt {
    (a.0.sub(&b.0), a.1.sub(&b.1))
}

fn rcross(a: &RPt, b: &RPt) -> Rational {
    a.0.mul(&b.1).sub(&a.1.mul(&b.0))
}

fn orient(a: &RPt, b: &RPt, c: &RPt) -> i32 {
    rcross(&rsub(b, a), &rsub(c, a)).signum()
}

fn between(x: &Rational, a: &Rational, b: &Rational) -> bool {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    lo <= x && x <= hi
}

fn on_segment(p: &RPt, a: &RPt, b: &RPt) -> bool {
    orient(a, b, p) == 0 && between(&p.0, &a.0, &b.0) && between(&p.1, &a.1, &b.1)
}

/// Whether two closed segments share any point.
fn segments_touch(p1: &RPt, p2: &RPt, q1: &RPt, q2: &RPt) -> bool {
    let o1 = orient(p1, p2, q1);
    let o2 = orient(p1, p2, q2);
    let o3 = orient(q1, q2, p1);
    let o4 = orient(q1, q2, p2);
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && on_segment(q1, p1, p2))
        || (o2 == 0 && on_segment(q2, p1, p2))
        || (o3 == 0 && on_segment(p1, q1, q2))
        || (o4 == 0 && on_segment(p2, q1, q2))
}

fn shoelace_sign(poly: &[RPt]) -> i32 {
    let mut acc = Rational::zero();
    for i in 0..poly.len() {
        let a = &poly[i];
        let b = &poly[(i + 1) % poly.len()];
        acc = acc.add(&rcross(a, b));
    }
    acc.signum()
}

/// Strict interiority by crossing number; boundary points are outside.
fn point_strictly_inside(p: &RPt, poly: &[RPt]) -> bool {
    let n = poly.len();
    for i in 0..n {
        if on_segment(p, &poly[i], &poly[(i + 1) % n]) {
            return false;
        }
    }
    let mut crossings = 0;
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        let (lo, hi) = if a.1 <= b.1 { (a, b) } else { (b, a) };
        // Half-open in y so a vertex at the ray height counts once.
        if &lo.1 <= &p.1 && &p.1 < &hi.1 {
            let dy = b.1.sub(&a.1);
            let x_at = a.0.add(&p.1.sub(&a.1).mul(&b.0.sub(&a.0)).div(&dy));
            if p.0 < x_at {
                crossings += 1;
            }
        }
    }
    crossings % 2 == 1
}

/// Primitive integer direction of a rational vector; `None` for zero.
fn primitive_dir(d: &RPt) -> Option<(BigInt, BigInt)> {
    if d.0.is_zero() && d.1.is_zero() {
        return None;
    }
    let bx = d.0.to_big();
    let by = d.1.to_big();
    let nx = bx.numer() * by.denom();
    let ny = by.numer() * bx.denom();
    let g = nx.gcd(&ny);
    Some((nx / &g, ny / &g))
}

fn det_big(u: &(BigInt, BigInt), v: &(BigInt, BigInt)) -> BigInt {
    &u.0 * &v.1 - &u.1 * &v.0
}

/// The shear fixing `eigen` with parameter `mult`: I + mult * e * (rot_cw e)^T.
fn shear_big(eigen: (i64, i64), mult: u32) -> [[BigInt; 2]; 2] {
    let e1 = BigInt::from(eigen.0);
    let e2 = BigInt::from(eigen.1);
    let m = BigInt::from(mult);
    [
        [BigInt::one() + &m * &e1 * &e2, -(&m * &e1 * &e1)],
        [&m * &e2 * &e2, BigInt::one() - &m * &e1 * &e2],
    ]
}

fn apply_big(m: &[[BigInt; 2]; 2], v: &(BigInt, BigInt)) -> (BigInt, BigInt) {
    (&m[0][0] * &v.0 + &m[0][1] * &v.1, &m[1][0] * &v.0 + &m[1][1] * &v.1)
}

/// First boundary point hit by the ray `from + t*dir`, `t > 0`, together
/// with the index of the vertex it lands on when it lands on one.
fn ray_exit(poly: &[RPt], from: &RPt, dir: &(BigInt, BigInt)) -> Option<(RPt, Option<usize>)> {
    let dr: RPt = (Rational::from_bigint(dir.0.clone()), Rational::from_bigint(dir.1.clone()));
    let n = poly.len();
    let mut best: Option<Rational> = None;
    let push = |t: Rational, best: &mut Option<Rational>| {
        if t.signum() > 0 && best.as_ref().map_or(true, |b| &t < b) {
            *best = Some(t);
        }
    };
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        let edge = rsub(b, a);
        let w = rsub(a, from);
        let denom = rcross(&dr, &edge);
        if denom.is_zero() {
            if rcross(&w, &dr).is_zero() {
                // Edge lies on the ray line; its endpoints are candidates.
                let dd = dr.0.mul(&dr.0).add(&dr.1.mul(&dr.1));
                for e in [a, b] {
                    let we = rsub(e, from);
                    let t = we.0.mul(&dr.0).add(&we.1.mul(&dr.1)).div(&dd);
                    push(t, &mut best);
                }
            }
            continue;
        }
        let t = rcross(&w, &edge).div(&denom);
        let s = rcross(&w, &dr).div(&denom);
        if s.signum() >= 0 && s <= Rational::one() {
            push(t, &mut best);
        }
    }
    let t = best?;
    let hit = (from.0.add(&t.mul(&dr.0)), from.1.add(&t.mul(&dr.1)));
    let vertex = poly.iter().position(|v| *v == hit);
    Some((hit, vertex))
}

/// Endpoint of the cut ray of node `i` on the polygon boundary, if the ray
/// reaches it.
pub fn cut_endpoint(d: &BaseDiagram, i: usize) -> Option<(Rational, Rational)> {
    let node = d.nodes.get(i)?;
    let s = node.cut.sign();
    let dir = (BigInt::from(s * node.eigen.0), BigInt::from(s * node.eigen.1));
    ray_exit(&d.polygon, &node.pos, &dir).map(|(p, _)| p)
}

/// Endpoint of the half-eigenline opposite the cut, if it reaches the
/// boundary.
pub fn opposite_endpoint(d: &BaseDiagram, i: usize) -> Option<(Rational, Rational)> {
    let node = d.nodes.get(i)?;
    let s = -node.cut.sign();
    let dir = (BigInt::from(s * node.eigen.0), BigInt::from(s * node.eigen.1));
    ray_exit(&d.polygon, &node.pos, &dir).map(|(p, _)| p)
}

/// Full structural check of a diagram.  All findings are collected in the
/// report; gross polygon defects (too few, repeated, or misordered vertices,
/// self-intersection) stop the run early since the remaining geometry is
/// meaningless.  Edge tangents are rational by representation, which
/// discharges the integral-affine compatibility of edge directions.
pub fn validate_diagram(d: &BaseDiagram) -> DiagramReport {
    let mut findings = Vec::new();
    let poly = &d.polygon;
    let n = poly.len();

    if n < 3 {
        findings.push(DiagramFinding::PolygonTooSmall { vertices: n });
        return DiagramReport { findings };
    }
    for i in 0..n {
        if poly[i] == poly[(i + 1) % n] {
            findings.push(DiagramFinding::RepeatedVertex { vertex: i });
        }
    }
    if !findings.is_empty() {
        return DiagramReport { findings };
    }
    if shoelace_sign(poly) <= 0 {
        findings.push(DiagramFinding::PolygonNotCounterclockwise);
        return DiagramReport { findings };
    }
    'simple: for i in 0..n {
        let (a1, a2) = (&poly[i], &poly[(i + 1) % n]);
        for j in i + 1..n {
            let (b1, b2) = (&poly[j], &poly[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Sharing one endpoint is fine; a fold-back is not.
                let (shared, pa, pb) =
                    if j == i + 1 { (a2, a1, b2) } else { (a1, b1, a2) };
                if orient(pa, shared, pb) == 0
                    && (on_segment(pa, shared, pb)
                        || on_segment(pb, shared, pa)
                        || pa == pb)
                {
                    findings.push(DiagramFinding::PolygonNotSimple);
                    break 'simple;
                }
            } else if segments_touch(a1, a2, b1, b2) {
                findings.push(DiagramFinding::PolygonNotSimple);
                break 'simple;
            }
        }
    }
    if !findings.is_empty() {
        return DiagramReport { findings };
    }

    // Per-node structure.  Nodes failing these checks are left out of the
    // cut geometry below.
    let mut usable = vec![true; d.nodes.len()];
    for (i, node) in d.nodes.iter().enumerate() {
        if node.mult == 0 {
            findings.push(DiagramFinding::ZeroMultiplicity { node: i });
            usable[i] = false;
        }
        let (e1, e2) = node.eigen;
        if (e1, e2) == (0, 0) || e1.abs().gcd(&e2.abs()) != 1 {
            findings.push(DiagramFinding::EigenNotPrimitive { node: i });
            usable[i] = false;
        } else if canonical_eigen(node.eigen) != node.eigen {
            findings.push(DiagramFinding::EigenNotCanonical { node: i });
            usable[i] = false;
        } else if node.mult > 0 {
            let s = shear_big(node.eigen, node.mult);
            let e = (BigInt::from(e1), BigInt::from(e2));
            if apply_big(&s, &e) != e {
                findings.push(DiagramFinding::EigenNotShearFixed { node: i });
                usable[i] = false;
            }
        }
        if !point_strictly_inside(&node.pos, poly) {
            findings.push(DiagramFinding::NodeNotInterior { node: i });
            usable[i] = false;
        }
        for j in 0..i {
            if d.nodes[j].pos == node.pos {
                findings.push(DiagramFinding::DuplicateNode { first: j, second: i });
                usable[i] = false;
            }
        }
    }

    // Cut rays: each must end at a listed vertex, stay clear of other nodes,
    // and stay clear of other cuts.
    let mut cuts: Vec<Option<(RPt, usize)>> = vec![None; d.nodes.len()];
    for (i, node) in d.nodes.iter().enumerate() {
        if !usable[i] {
            continue;
        }
        let s = node.cut.sign();
        let dir = (BigInt::from(s * node.eigen.0), BigInt::from(s * node.eigen.1));
        match ray_exit(poly, &node.pos, &dir) {
            Some((hit, Some(v))) => cuts[i] = Some((hit, v)),
            _ => findings.push(DiagramFinding::CutMissesVertex { node: i }),
        }
    }
    for i in 0..d.nodes.len() {
        let Some((end_i, _)) = &cuts[i] else { continue };
        for (j, other) in d.nodes.iter().enumerate() {
            if j != i && on_segment(&other.pos, &d.nodes[i].pos, end_i) {
                findings.push(DiagramFinding::CutHitsNode { cut: i, node: j });
            }
        }
        for j in i + 1..d.nodes.len() {
            let Some((end_j, _)) = &cuts[j] else { continue };
            if segments_touch(&d.nodes[i].pos, end_i, &d.nodes[j].pos, end_j) {
                findings.push(DiagramFinding::CutsIntersect { first: i, second: j });
            }
        }
    }

    // Corner conditions.  At a plain vertex the primitive edge tangents must
    // have determinant 1.  At a vertex where a cut arrives, the outgoing
    // tangent is first transported by the node's shear; the result must give
    // either determinant 1 (a corner the cut hides) or the incoming tangent
    // itself (a bend the shear unfolds into a straight edge).
    let mut cut_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, c) in cuts.iter().enumerate() {
        if let Some((_, v)) = c {
            cut_at[*v].push(i);
        }
    }
    for k in 0..n {
        let prev = &poly[(k + n - 1) % n];
        let next = &poly[(k + 1) % n];
        let p = primitive_dir(&rsub(&poly[k], prev)).expect("degenerate edges were rejected");
        let q = primitive_dir(&rsub(next, &poly[k])).expect("degenerate edges were rejected");
        match cut_at[k].as_slice() {
            [] => {
                let det = det_big(&p, &q);
                if det != BigInt::one() {
                    findings.push(DiagramFinding::CornerNotUnimodular { vertex: k, det });
                }
            }
            [i] => {
                let node = &d.nodes[*i];
                let qq = apply_big(&shear_big(node.eigen, node.mult), &q);
                let det = det_big(&p, &qq);
                if det != BigInt::one() && qq != p {
                    findings.push(DiagramFinding::CornerNotUnimodular { vertex: k, det });
                }
            }
            // Several cuts into one vertex were already reported as meeting.
            _ => {}
        }
    }

    DiagramReport { findings }
}

/// Whether `g` is an isomorphism of marked diagrams from `d` to `dp`: the
/// polygon maps onto the polygon (cyclically, orientation preserved), node i
/// to node i with the same multiplicity, eigenlines by the linear part, and
/// cut rays to cut rays.  Both diagrams are assumed valid.
pub fn verify_iso(d: &BaseDiagram, dp: &BaseDiagram, g: &AffineIso) -> bool {
    if det2(g.linear) != 1 {
        return false;
    }
    let n = d.polygon.len();
    if n != dp.polygon.len() || d.nodes.len() != dp.nodes.len() || n == 0 {
        return false;
    }
    let mapped: Vec<RPt> = d.polygon.iter().map(|v| g.apply_point(v)).collect();
    if !(0..n).any(|k| (0..n).all(|i| mapped[i] == dp.polygon[(i + k) % n])) {
        return false;
    }
    for (a, b) in d.nodes.iter().zip(&dp.nodes) {
        if g.apply_point(&a.pos) != b.pos || a.mult != b.mult {
            return false;
        }
        let Some(image) = g.apply_vec(a.eigen) else { return false };
        if canonical_eigen(image) != b.eigen {
            return false;
        }
        // Cut directions must agree as vectors, not just as lines.
        let sa = a.cut.sign();
        let sb = b.cut.sign();
        if (sa * image.0, sa * image.1) != (sb * b.eigen.0, sb * b.eigen.1) {
            return false;
        }
    }
    true
}

/// Bounded search for an isomorphism: all integer linear parts with entries
/// in [-bound, bound] and determinant +1, translations anchored by matching
/// the first node (or the first vertex to every vertex when there are no
/// nodes).  Returns the lexicographically smallest match, or `None` meaning
/// "none within bound" -- never a claim of nonexistence.
pub fn find_iso(d: &BaseDiagram, dp: &BaseDiagram, bound: i64) -> Option<AffineIso> {
    if d.nodes.len() != dp.nodes.len() || d.polygon.len() != dp.polygon.len() {
        return None;
    }
    if d.polygon.is_empty() {
        return None;
    }
    let bound = bound.max(1);
    let mut linears = Vec::new();
    for a in -bound..=bound {
        for b in -bound..=bound {
            for c in -bound..=bound {
                for e in -bound..=bound {
                    if a * e - b * c == 1 {
                        linears.push([[a, b], [c, e]]);
                    }
                }
            }
        }
    }
    type Key = (i64, i64, i64, i64, Rational, Rational);
    let best: Option<Key> = par::filter_min(linears, |lin| {
        let anchors: Vec<RPt> = if d.nodes.is_empty() {
            dp.polygon.clone()
        } else {
            vec![dp.nodes[0].pos.clone()]
        };
        let source = if d.nodes.is_empty() { &d.polygon[0] } else { &d.nodes[0].pos };
        let probe = AffineIso { linear: lin, translate: (Rational::zero(), Rational::zero()) };
        let base = probe.apply_point(source);
        anchors
            .into_iter()
            .filter_map(|target| {
                let t = (target.0.sub(&base.0), target.1.sub(&base.1));
                let iso = AffineIso { linear: lin, translate: t };
                if verify_iso(d, dp, &iso) {
                    let (tx, ty) = iso.translate;
                    Some((lin[0][0], lin[0][1], lin[1][0], lin[1][1], tx, ty))
                } else {
                    None
                }
            })
            .min()
    });
    best.map(|(a, b, c, e, tx, ty)| AffineIso { linear: [[a, b], [c, e]], translate: (tx, ty) })
}
