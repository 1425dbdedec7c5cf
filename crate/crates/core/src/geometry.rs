//! Constant-curvature model surfaces.
//!
//! Spherical points live on the unit sphere, hyperbolic points on the upper
//! sheet of the Minkowski hyperboloid `x² + y² − z² = −1`, and Euclidean points
//! in the plane (stored with `z = 0`, acted on in homogeneous coordinates).
//! Everything is in units where the curvature is +1, 0 or −1.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

const QUADRIC_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("geometry mismatch: {0} vs {1}")]
    Mismatch(GeometryClass, GeometryClass),
    #[error("point {coords:?} is not on the {geometry} model surface")]
    OffSurface { coords: [f64; 3], geometry: GeometryClass },
    #[error("stereographic projection is singular at the antipode of the center")]
    Singular,
    #[error("{projection:?} projection cannot be used in {geometry} geometry")]
    IncompatibleProjection {
        projection: ProjectionKind,
        geometry: GeometryClass,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeometryClass {
    Spherical,
    Euclidean,
    Hyperbolic,
}

impl GeometryClass {
    /// Sign of the curvature: +1, 0 or −1.
    pub fn curvature_sign(self) -> i32 {
        match self {
            GeometryClass::Spherical => 1,
            GeometryClass::Euclidean => 0,
            GeometryClass::Hyperbolic => -1,
        }
    }

    /// Geometry of the regular tessellation `{p,q}`.
    pub fn of_schlafli(p: usize, q: usize) -> GeometryClass {
        let k = (p as i64 - 2) * (q as i64 - 2);
        match k.cmp(&4) {
            std::cmp::Ordering::Less => GeometryClass::Spherical,
            std::cmp::Ordering::Equal => GeometryClass::Euclidean,
            std::cmp::Ordering::Greater => GeometryClass::Hyperbolic,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GeometryClass::Spherical => "spherical",
            GeometryClass::Euclidean => "euclidean",
            GeometryClass::Hyperbolic => "hyperbolic",
        }
    }
}

impl fmt::Display for GeometryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; 3],
    geometry: GeometryClass,
}

impl Point {
    /// Validates that `coords` lies on the model surface of `geometry`.
    pub fn new(geometry: GeometryClass, coords: [f64; 3]) -> Result<Point, GeometryError> {
        let [x, y, z] = coords;
        let ok = match geometry {
            GeometryClass::Spherical => (x * x + y * y + z * z - 1.0).abs() <= QUADRIC_TOL,
            GeometryClass::Hyperbolic => {
                let q = x * x + y * y + 1.0 - z * z;
                z > 0.0 && q.abs() <= QUADRIC_TOL * z * z.max(1.0)
            }
            GeometryClass::Euclidean => x.is_finite() && y.is_finite(),
        };
        if !ok {
            return Err(GeometryError::OffSurface { coords, geometry });
        }
        let coords = if geometry == GeometryClass::Euclidean {
            [x, y, 0.0]
        } else {
            coords
        };
        Ok(Point { coords, geometry })
    }

    /// Projects arbitrary coordinates back onto the model surface.
    pub fn normalized(geometry: GeometryClass, coords: [f64; 3]) -> Point {
        let [x, y, z] = coords;
        let coords = match geometry {
            GeometryClass::Spherical => {
                let n = (x * x + y * y + z * z).sqrt();
                [x / n, y / n, z / n]
            }
            GeometryClass::Hyperbolic => {
                let m = z * z - x * x - y * y;
                if m > 0.0 && z > 0.0 {
                    let s = m.sqrt();
                    [x / s, y / s, z / s]
                } else {
                    // far outside the valid cone; keep x, y and recompute z
                    [x, y, (1.0 + x * x + y * y).sqrt()]
                }
            }
            GeometryClass::Euclidean => [x, y, 0.0],
        };
        Point { coords, geometry }
    }

    pub fn origin(geometry: GeometryClass) -> Point {
        let coords = match geometry {
            GeometryClass::Euclidean => [0.0, 0.0, 0.0],
            _ => [0.0, 0.0, 1.0],
        };
        Point { coords, geometry }
    }

    /// Planar Euclidean point.
    pub fn planar(x: f64, y: f64) -> Point {
        Point {
            coords: [x, y, 0.0],
            geometry: GeometryClass::Euclidean,
        }
    }

    /// The point at distance `dist` from the origin in direction `angle`.
    pub fn polar(geometry: GeometryClass, dist: f64, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        let coords = match geometry {
            GeometryClass::Spherical => [dist.sin() * c, dist.sin() * s, dist.cos()],
            GeometryClass::Hyperbolic => [dist.sinh() * c, dist.sinh() * s, dist.cosh()],
            GeometryClass::Euclidean => [dist * c, dist * s, 0.0],
        };
        Point { coords, geometry }
    }

    pub fn coords(&self) -> [f64; 3] {
        self.coords
    }

    pub fn geometry(&self) -> GeometryClass {
        self.geometry
    }

    fn homogeneous(&self) -> [f64; 3] {
        match self.geometry {
            GeometryClass::Euclidean => [self.coords[0], self.coords[1], 1.0],
            _ => self.coords,
        }
    }

    /// Geodesic distance.
    pub fn distance(&self, other: &Point) -> Result<f64, GeometryError> {
        if self.geometry != other.geometry {
            return Err(GeometryError::Mismatch(self.geometry, other.geometry));
        }
        let [dx, dy, dz] = [
            self.coords[0] - other.coords[0],
            self.coords[1] - other.coords[1],
            self.coords[2] - other.coords[2],
        ];
        Ok(match self.geometry {
            GeometryClass::Spherical => {
                let chord = (dx * dx + dy * dy + dz * dz).sqrt();
                2.0 * (chord / 2.0).min(1.0).asin()
            }
            GeometryClass::Hyperbolic => {
                let m = (dx * dx + dy * dy - dz * dz).max(0.0).sqrt();
                2.0 * (m / 2.0).asinh()
            }
            GeometryClass::Euclidean => (dx * dx + dy * dy).sqrt(),
        })
    }

    /// Distance to the model origin.
    pub fn distance_from_origin(&self) -> f64 {
        self.distance(&Point::origin(self.geometry)).expect("same geometry")
    }
}

type Mat3 = [[f64; 3]; 3];

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn mat_vec(a: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

/// An isometry of one of the model surfaces, as a 3×3 matrix acting on
/// model coordinates (homogeneous coordinates for the plane).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    matrix: Mat3,
    geometry: GeometryClass,
}

impl Isometry {
    pub fn identity(geometry: GeometryClass) -> Isometry {
        Isometry {
            matrix: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            geometry,
        }
    }

    /// Rotation by `angle` about the origin.
    pub fn rotation(geometry: GeometryClass, angle: f64) -> Isometry {
        let (s, c) = angle.sin_cos();
        Isometry {
            matrix: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
            geometry,
        }
    }

    /// Translation moving the origin a distance `dist` along the x axis.
    pub fn translation_x(geometry: GeometryClass, dist: f64) -> Isometry {
        let matrix = match geometry {
            GeometryClass::Spherical => {
                let (s, c) = dist.sin_cos();
                [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
            }
            GeometryClass::Hyperbolic => {
                let (s, c) = (dist.sinh(), dist.cosh());
                [[c, 0.0, s], [0.0, 1.0, 0.0], [s, 0.0, c]]
            }
            GeometryClass::Euclidean => [[1.0, 0.0, dist], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
        Isometry { matrix, geometry }
    }

    /// Planar translation by `(dx, dy)`.
    pub fn translation_planar(dx: f64, dy: f64) -> Isometry {
        Isometry {
            matrix: [[1.0, 0.0, dx], [0.0, 1.0, dy], [0.0, 0.0, 1.0]],
            geometry: GeometryClass::Euclidean,
        }
    }

    /// Reflection in the x axis (`y ↦ −y`).
    pub fn reflection_y(geometry: GeometryClass) -> Isometry {
        Isometry {
            matrix: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]],
            geometry,
        }
    }

    pub fn geometry(&self) -> GeometryClass {
        self.geometry
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.matrix
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        debug_assert_eq!(self.geometry, other.geometry);
        Isometry {
            matrix: mat_mul(&self.matrix, &other.matrix),
            geometry: self.geometry,
        }
    }

    pub fn inverse(&self) -> Isometry {
        let m = &self.matrix;
        let matrix = match self.geometry {
            // orthogonal
            GeometryClass::Spherical => [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
            // J Mᵀ J with J = diag(1, 1, −1)
            GeometryClass::Hyperbolic => [
                [m[0][0], m[1][0], -m[2][0]],
                [m[0][1], m[1][1], -m[2][1]],
                [-m[0][2], -m[1][2], m[2][2]],
            ],
            GeometryClass::Euclidean => {
                let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
                let det = a * d - b * c;
                let (ia, ib, ic, id) = (d / det, -b / det, -c / det, a / det);
                let (tx, ty) = (m[0][2], m[1][2]);
                [
                    [ia, ib, -(ia * tx + ib * ty)],
                    [ic, id, -(ic * tx + id * ty)],
                    [0.0, 0.0, 1.0],
                ]
            }
        };
        Isometry {
            matrix,
            geometry: self.geometry,
        }
    }

    /// Applies the isometry and renormalizes the result onto the model surface.
    pub fn apply(&self, p: &Point) -> Point {
        debug_assert_eq!(self.geometry, p.geometry);
        let v = mat_vec(&self.matrix, p.homogeneous());
        match self.geometry {
            GeometryClass::Euclidean => Point::planar(v[0] / v[2], v[1] / v[2]),
            g => Point::normalized(g, v),
        }
    }

    /// Whether the matrix preserves the defining quadratic form within `tol`.
    pub fn preserves_form(&self, tol: f64) -> bool {
        let m = &self.matrix;
        match self.geometry {
            GeometryClass::Euclidean => {
                let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
                (a * a + c * c - 1.0).abs() <= tol
                    && (b * b + d * d - 1.0).abs() <= tol
                    && (a * b + c * d).abs() <= tol
                    && m[2][0].abs() <= tol
                    && m[2][1].abs() <= tol
                    && (m[2][2] - 1.0).abs() <= tol
            }
            g => {
                let j = if g == GeometryClass::Hyperbolic { -1.0 } else { 1.0 };
                let form = [1.0, 1.0, j];
                (0..3).all(|a| {
                    (0..3).all(|b| {
                        let v: f64 = (0..3).map(|k| m[k][a] * m[k][b] * form[k]).sum();
                        let want = if a == b { form[a] } else { 0.0 };
                        (v - want).abs() <= tol * (1.0 + v.abs())
                    })
                })
            }
        }
    }
}

/// An isometry mapping `target` to the model origin.
pub fn recentering_isometry(target: &Point) -> Isometry {
    let g = target.geometry;
    let [x, y, _] = target.coords;
    match g {
        GeometryClass::Euclidean => Isometry::translation_planar(-x, -y),
        _ => {
            let angle = y.atan2(x);
            let dist = target.distance_from_origin();
            Isometry::translation_x(g, -dist).compose(&Isometry::rotation(g, -angle))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjectionKind {
    PoincareDisk,
    Orthographic,
    Stereographic,
    PlanarIdentity,
}

impl ProjectionKind {
    pub fn compatible_with(self, geometry: GeometryClass) -> bool {
        matches!(
            (self, geometry),
            (ProjectionKind::PoincareDisk, GeometryClass::Hyperbolic)
                | (ProjectionKind::Orthographic, GeometryClass::Spherical)
                | (ProjectionKind::Stereographic, GeometryClass::Spherical)
                | (ProjectionKind::PlanarIdentity, GeometryClass::Euclidean)
        )
    }

    /// The conventional projection for a geometry.
    pub fn default_for(geometry: GeometryClass) -> ProjectionKind {
        match geometry {
            GeometryClass::Spherical => ProjectionKind::Stereographic,
            GeometryClass::Euclidean => ProjectionKind::PlanarIdentity,
            GeometryClass::Hyperbolic => ProjectionKind::PoincareDisk,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Projection {
    kind: ProjectionKind,
    recenter: Isometry,
}

impl Projection {
    pub fn new(kind: ProjectionKind, center: Point) -> Result<Projection, GeometryError> {
        if !kind.compatible_with(center.geometry) {
            return Err(GeometryError::IncompatibleProjection {
                projection: kind,
                geometry: center.geometry,
            });
        }
        Ok(Projection {
            kind,
            recenter: recentering_isometry(&center),
        })
    }

    /// Projection centered on an arbitrary isometry (applied before projecting).
    pub fn with_isometry(kind: ProjectionKind, recenter: Isometry) -> Result<Projection, GeometryError> {
        if !kind.compatible_with(recenter.geometry) {
            return Err(GeometryError::IncompatibleProjection {
                projection: kind,
                geometry: recenter.geometry,
            });
        }
        Ok(Projection { kind, recenter })
    }

    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    /// `p` moved by the recentering isometry, before projecting.
    pub fn recentered(&self, p: &Point) -> Point {
        self.recenter.apply(p)
    }

    pub fn project(&self, p: &Point) -> Result<[f64; 2], GeometryError> {
        if !self.kind.compatible_with(p.geometry) {
            return Err(GeometryError::IncompatibleProjection {
                projection: self.kind,
                geometry: p.geometry,
            });
        }
        let [x, y, z] = self.recenter.apply(p).coords;
        match self.kind {
            ProjectionKind::PoincareDisk => Ok([x / (1.0 + z), y / (1.0 + z)]),
            ProjectionKind::Orthographic | ProjectionKind::PlanarIdentity => Ok([x, y]),
            ProjectionKind::Stereographic => {
                if 1.0 + z <= 1e-12 {
                    Err(GeometryError::Singular)
                } else {
                    Ok([2.0 * x / (1.0 + z), 2.0 * y / (1.0 + z)])
                }
            }
        }
    }
}

/// Circumradius and inradius of the regular `p`-gon in the `{p,q}` tessellation.
///
/// In the Euclidean case the scale is free; it is fixed so that adjacent face
/// centers are at distance 1.
pub fn regular_polygon_radii(p: usize, q: usize) -> (f64, f64) {
    let (pf, qf) = (p as f64, q as f64);
    let (a, b) = (PI / pf, PI / qf);
    match GeometryClass::of_schlafli(p, q) {
        GeometryClass::Hyperbolic => {
            let r_out = (1.0 / a.tan() / b.tan()).acosh();
            let r_in = (b.cos() / a.sin()).acosh();
            (r_out, r_in)
        }
        GeometryClass::Spherical => {
            let r_out = (1.0 / a.tan() / b.tan()).acos();
            let r_in = (b.cos() / a.sin()).acos();
            (r_out, r_in)
        }
        GeometryClass::Euclidean => {
            let r_in = 0.5;
            (r_in / a.cos(), r_in)
        }
    }
}

/// Area of one face of `{p,q}` by Gauss–Bonnet: `|(p−2)π − 2πp/q|` in
/// curved geometries; in the plane, the area at unit center spacing.
pub fn regular_face_area(p: usize, q: usize) -> f64 {
    let (pf, qf) = (p as f64, q as f64);
    match GeometryClass::of_schlafli(p, q) {
        GeometryClass::Hyperbolic => PI * (pf * (qf - 2.0) / qf - 2.0),
        GeometryClass::Spherical => PI * (2.0 - pf * (qf - 2.0) / qf),
        GeometryClass::Euclidean => {
            let (r_out, r_in) = regular_polygon_radii(p, q);
            let side = 2.0 * (r_out * r_out - r_in * r_in).sqrt();
            pf * side * r_in / 2.0
        }
    }
}

/// Area of a geodesic triangle (spherical excess or hyperbolic defect).
pub fn triangle_area(a: &Point, b: &Point, c: &Point) -> Result<f64, GeometryError> {
    let g = a.geometry;
    let ab = a.distance(b)?;
    let bc = b.distance(c)?;
    let ca = c.distance(a)?;
    let angle = |opp: f64, s1: f64, s2: f64| -> f64 {
        let v = match g {
            GeometryClass::Spherical => (opp.cos() - s1.cos() * s2.cos()) / (s1.sin() * s2.sin()),
            GeometryClass::Hyperbolic => (s1.cosh() * s2.cosh() - opp.cosh()) / (s1.sinh() * s2.sinh()),
            GeometryClass::Euclidean => (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2),
        };
        v.clamp(-1.0, 1.0).acos()
    };
    let (alpha, beta, gamma) = (angle(bc, ab, ca), angle(ca, ab, bc), angle(ab, bc, ca));
    Ok(match g {
        GeometryClass::Spherical => alpha + beta + gamma - PI,
        GeometryClass::Hyperbolic => PI - alpha - beta - gamma,
        GeometryClass::Euclidean => {
            let s = (ab + bc + ca) / 2.0;
            (s * (s - ab) * (s - bc) * (s - ca)).max(0.0).sqrt()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyp(x: f64, y: f64) -> Point {
        Point::new(GeometryClass::Hyperbolic, [x, y, (1.0 + x * x + y * y).sqrt()]).unwrap()
    }

    #[test]
    fn distance_examples() {
        let n = Point::new(GeometryClass::Spherical, [0.0, 0.0, 1.0]).unwrap();
        let s = Point::new(GeometryClass::Spherical, [0.0, 0.0, -1.0]).unwrap();
        assert!((n.distance(&s).unwrap() - PI).abs() < 1e-12);

        let o = Point::origin(GeometryClass::Hyperbolic);
        let p = Point::new(GeometryClass::Hyperbolic, [0.0, 1f64.sinh(), 1f64.cosh()]).unwrap();
        assert!((o.distance(&p).unwrap() - 1.0).abs() < 1e-12);

        let a = Point::planar(0.0, 0.0);
        let b = Point::planar(3.0, 4.0);
        assert!((a.distance(&b).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_geometry_is_an_error() {
        let a = Point::origin(GeometryClass::Hyperbolic);
        let b = Point::origin(GeometryClass::Spherical);
        assert!(matches!(a.distance(&b), Err(GeometryError::Mismatch(..))));
    }

    #[test]
    fn off_surface_points_are_rejected() {
        assert!(Point::new(GeometryClass::Spherical, [1.0, 1.0, 0.0]).is_err());
        assert!(Point::new(GeometryClass::Hyperbolic, [0.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn projection_examples() {
        let o = Point::origin(GeometryClass::Hyperbolic);
        let pd = Projection::new(ProjectionKind::PoincareDisk, o).unwrap();
        assert_eq!(pd.project(&o).unwrap(), [0.0, 0.0]);

        let north = Point::origin(GeometryClass::Spherical);
        let ortho = Projection::new(ProjectionKind::Orthographic, north).unwrap();
        let p = Point::new(GeometryClass::Spherical, [0.6, 0.8, 0.0]).unwrap();
        let xy = ortho.project(&p).unwrap();
        assert!((xy[0] - 0.6).abs() < 1e-12 && (xy[1] - 0.8).abs() < 1e-12);

        let stereo = Projection::new(ProjectionKind::Stereographic, north).unwrap();
        assert_eq!(stereo.project(&north).unwrap(), [0.0, 0.0]);
        let south = Point::new(GeometryClass::Spherical, [0.0, 0.0, -1.0]).unwrap();
        assert_eq!(stereo.project(&south), Err(GeometryError::Singular));
    }

    #[test]
    fn incompatible_projection() {
        let o = Point::origin(GeometryClass::Euclidean);
        assert!(Projection::new(ProjectionKind::PoincareDisk, o).is_err());
    }

    #[test]
    fn recentering_origin_is_identity() {
        for g in [
            GeometryClass::Spherical,
            GeometryClass::Euclidean,
            GeometryClass::Hyperbolic,
        ] {
            let iso = recentering_isometry(&Point::origin(g));
            let id = Isometry::identity(g).matrix();
            for i in 0..3 {
                for j in 0..3 {
                    assert!((iso.matrix()[i][j] - id[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn recentering_maps_target_to_origin() {
        let p = hyp(2.0, -1.5);
        let iso = recentering_isometry(&p);
        assert!(iso.apply(&p).distance_from_origin() < 1e-9);
        assert!(iso.preserves_form(1e-9));
    }

    #[test]
    fn inverse_undoes() {
        let g = GeometryClass::Hyperbolic;
        let iso = Isometry::translation_x(g, 1.3).compose(&Isometry::rotation(g, 0.4));
        let p = hyp(0.3, 0.7);
        let q = iso.inverse().apply(&iso.apply(&p));
        assert!(p.distance(&q).unwrap() < 1e-9);
    }

    #[test]
    fn polygon_radii_match_face_area() {
        // {7,3}: triangulate the heptagon from its center and sum the defects
        let (r_out, _) = regular_polygon_radii(7, 3);
        let g = GeometryClass::Hyperbolic;
        let c = Point::origin(g);
        let mut total = 0.0;
        for k in 0..7 {
            let a = Point::polar(g, r_out, 2.0 * PI * k as f64 / 7.0);
            let b = Point::polar(g, r_out, 2.0 * PI * (k + 1) as f64 / 7.0);
            total += triangle_area(&c, &a, &b).unwrap();
        }
        assert!((total - PI / 3.0).abs() < 1e-9);
        assert!((regular_face_area(7, 3) - total).abs() < 1e-9);
        // the dodecahedron covers the sphere
        assert!((12.0 * regular_face_area(5, 3) - 4.0 * PI).abs() < 1e-9);
    }
}
