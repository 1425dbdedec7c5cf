//! Exact arithmetic in the Eisenstein integers `Z[ρ]`, `ρ = e^{iπ/3}`.
//!
//! These serve as coordinates on the triangular lattice inside each dual
//! triangle during the Goldberg–Coxeter construction.

use std::ops::{Add, Neg, Sub};

/// `self.0 + self.1·ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Eis(pub i64, pub i64);

/// The six units in counter-clockwise order starting at 1.
pub const UNITS: [Eis; 6] = [Eis(1, 0), Eis(0, 1), Eis(-1, 1), Eis(-1, 0), Eis(0, -1), Eis(1, -1)];

const HALF_SQRT3: f64 = 0.866_025_403_784_438_6;

impl Eis {
    pub const ZERO: Eis = Eis(0, 0);
    pub const RHO: Eis = Eis(0, 1);

    pub fn mul(self, o: Eis) -> Eis {
        // ρ² = ρ − 1
        Eis(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0 + self.1 * o.1)
    }

    pub fn conj(self) -> Eis {
        Eis(self.0 + self.1, -self.1)
    }

    pub fn norm(self) -> i64 {
        self.0 * self.0 + self.0 * self.1 + self.1 * self.1
    }

    /// Exact quotient, if it exists in `Z[ρ]`.
    pub fn div(self, o: Eis) -> Option<Eis> {
        let n = o.norm();
        if n == 0 {
            return None;
        }
        let num = self.mul(o.conj());
        if num.0 % n == 0 && num.1 % n == 0 {
            Some(Eis(num.0 / n, num.1 / n))
        } else {
            None
        }
    }

    pub fn is_unit(self) -> bool {
        self.norm() == 1
    }

    /// Twice the signed area spanned by `self` and `o`, in units of `√3/2`.
    pub fn cross(self, o: Eis) -> i64 {
        self.0 * o.1 - self.1 * o.0
    }

    pub fn to_real(self) -> [f64; 2] {
        [self.0 as f64 + self.1 as f64 / 2.0, self.1 as f64 * HALF_SQRT3]
    }
}

impl Add for Eis {
    type Output = Eis;
    fn add(self, o: Eis) -> Eis {
        Eis(self.0 + o.0, self.1 + o.1)
    }
}

impl Sub for Eis {
    type Output = Eis;
    fn sub(self, o: Eis) -> Eis {
        Eis(self.0 - o.0, self.1 - o.1)
    }
}

impl Neg for Eis {
    type Output = Eis;
    fn neg(self) -> Eis {
        Eis(-self.0, -self.1)
    }
}

/// A lattice isometry `x ↦ u·x + t` or `x ↦ u·conj(x) + t` with `u` a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeMap {
    pub u: Eis,
    pub reflect: bool,
    pub t: Eis,
}

impl LatticeMap {
    pub fn apply(&self, x: Eis) -> Eis {
        self.linear(x) + self.t
    }

    pub fn linear(&self, x: Eis) -> Eis {
        let x = if self.reflect { x.conj() } else { x };
        self.u.mul(x)
    }

    /// The lattice isometry sending `p0 ↦ q0`, `p1 ↦ q1` and putting the image
    /// of `p2` on the opposite side of the segment `q0 q1` from `q2`.
    pub fn gluing(p: [Eis; 3], q: [Eis; 3]) -> Option<LatticeMap> {
        let d = p[1] - p[0];
        let dq = q[1] - q[0];
        let other = dq.cross(q[2] - q[0]).signum();
        for reflect in [false, true] {
            let dd = if reflect { d.conj() } else { d };
            let Some(u) = dq.div(dd) else { continue };
            if !u.is_unit() {
                continue;
            }
            let m0 = LatticeMap {
                u,
                reflect,
                t: Eis::ZERO,
            };
            let m = LatticeMap {
                u,
                reflect,
                t: q[0] - m0.apply(p[0]),
            };
            let side = dq.cross(m.apply(p[2]) - q[0]).signum();
            if side == -other {
                return Some(m);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_squared() {
        assert_eq!(Eis::RHO.mul(Eis::RHO), Eis(-1, 1));
        // ρ⁶ = 1
        let mut x = Eis(1, 0);
        for _ in 0..6 {
            x = x.mul(Eis::RHO);
        }
        assert_eq!(x, Eis(1, 0));
    }

    #[test]
    fn units_are_ccw() {
        for k in 0..6 {
            assert_eq!(UNITS[k].mul(Eis::RHO), UNITS[(k + 1) % 6]);
            assert!(UNITS[k].is_unit());
        }
    }

    #[test]
    fn conj_matches_complex_conjugate() {
        let z = Eis(3, 2);
        let [x, y] = z.to_real();
        let [cx, cy] = z.conj().to_real();
        assert!((x - cx).abs() < 1e-12 && (y + cy).abs() < 1e-12);
        assert_eq!(z.norm(), 19);
    }

    #[test]
    fn gluing_flips_third_corner() {
        let z = Eis(2, 1);
        let tri = [Eis::ZERO, z, z.mul(Eis::RHO)];
        // glue edge 0→1 of `tri` onto edge 1→0 of itself
        let m = LatticeMap::gluing([tri[0], tri[1], tri[2]], [tri[1], tri[0], tri[2]]).unwrap();
        assert_eq!(m.apply(tri[0]), tri[1]);
        assert_eq!(m.apply(tri[1]), tri[0]);
        let s = (tri[0] - tri[1]).cross(m.apply(tri[2]) - tri[1]);
        let s2 = (tri[0] - tri[1]).cross(tri[2] - tri[1]);
        assert!(s * s2 < 0);
    }
}
