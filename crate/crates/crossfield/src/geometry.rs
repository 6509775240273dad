//! Antenna array geometry: element layouts (linear, planar, circular),
//! local/global frame transforms, aperture, and spherical coordinates of
//! points relative to an array.
//!
//! Local frame convention: the array lies in the local xy-plane with its
//! broadside normal along local z. Row index m offsets elements along local
//! x, column index n along local y, so a linear array runs along local y.
//! Element ordering is row-major: flat index s = m * cols + n (0-based).

use crate::error::{Error, Result};
use crate::vec3::{vec3, Vec3};

/// Propagation speed in m/s (exact convention used by all delay math).
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Supported array layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    /// Uniform linear array (1 row of `cols` elements along local y).
    Ula,
    /// Uniform planar array (`rows` x `cols` grid in the local xy-plane).
    Upa,
    /// Uniform circular array (`cols` elements on a circle of `radius`,
    /// element 0 at local azimuth 0, counter-clockwise).
    Uca,
}

/// An antenna array: layout, element spacing, and placement in the global
/// frame. Orientation is the orthonormal triad (a1, a2, a3) giving the
/// global directions of the local x, y, z axes.
#[derive(Debug, Clone)]
pub struct ArrayGeometry {
    pub kind: ArrayKind,
    /// Row count M (1 for ULA; unused for UCA).
    pub rows: usize,
    /// Column count N (element count for ULA/UCA).
    pub cols: usize,
    /// Element spacing d in meters (for UCA: adjacent-element chord length).
    pub spacing: f64,
    /// Circle radius in meters (UCA only; 0 otherwise).
    pub radius: f64,
    /// Array centroid in the global frame.
    pub center: Vec3,
    a1: Vec3,
    a2: Vec3,
    a3: Vec3,
}

impl ArrayGeometry {
    /// Uniform linear array of `count` elements spaced `d` meters apart,
    /// running along local y, centered at the origin.
    pub fn ula(count: usize, d: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::config("array.count", "element count must be >= 1"));
        }
        if !(d > 0.0) {
            return Err(Error::config("array.spacing", "element spacing must be > 0"));
        }
        Ok(Self {
            kind: ArrayKind::Ula,
            rows: 1,
            cols: count,
            spacing: d,
            radius: 0.0,
            center: Vec3::ZERO,
            a1: Vec3::X,
            a2: Vec3::Y,
            a3: Vec3::Z,
        })
    }

    /// Uniform planar array of `rows` x `cols` elements spaced `d` meters
    /// apart in the local xy-plane, centered at the origin.
    pub fn upa(rows: usize, cols: usize, d: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::config("array.rows", "row/column counts must be >= 1"));
        }
        if !(d > 0.0) {
            return Err(Error::config("array.spacing", "element spacing must be > 0"));
        }
        Ok(Self {
            kind: ArrayKind::Upa,
            rows,
            cols,
            spacing: d,
            radius: 0.0,
            center: Vec3::ZERO,
            a1: Vec3::X,
            a2: Vec3::Y,
            a3: Vec3::Z,
        })
    }

    /// Uniform circular array of `count` elements on a circle of `radius`
    /// meters in the local xy-plane; element 0 sits at local azimuth 0 and
    /// the ordering is counter-clockwise.
    pub fn uca(count: usize, radius: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::config("array.count", "element count must be >= 1"));
        }
        if !(radius > 0.0) {
            return Err(Error::config("array.radius", "circle radius must be > 0"));
        }
        let chord = 2.0 * radius * (std::f64::consts::PI / count as f64).sin();
        Ok(Self {
            kind: ArrayKind::Uca,
            rows: 1,
            cols: count,
            spacing: chord,
            radius,
            center: Vec3::ZERO,
            a1: Vec3::X,
            a2: Vec3::Y,
            a3: Vec3::Z,
        })
    }

    /// Place the array center at a global position.
    pub fn with_center(mut self, center: Vec3) -> Self {
        self.center = center;
        self
    }

    /// Orient the array: `a1` and `a2` become the global directions of the
    /// local x and y axes; the broadside normal is their cross product.
    pub fn with_orientation(mut self, a1: Vec3, a2: Vec3) -> Result<Self> {
        let a1 = a1
            .try_normalized()
            .ok_or_else(|| Error::config("array.orientation", "axis a1 must be nonzero"))?;
        let a2 = a2
            .try_normalized()
            .ok_or_else(|| Error::config("array.orientation", "axis a2 must be nonzero"))?;
        if a1.dot(a2).abs() > 1e-9 {
            return Err(Error::config(
                "array.orientation",
                "axes a1 and a2 must be orthogonal",
            ));
        }
        self.a1 = a1;
        self.a2 = a2;
        self.a3 = a1.cross(a2);
        Ok(self)
    }

    /// Global direction of the local x axis (row direction).
    pub fn axis_x(&self) -> Vec3 {
        self.a1
    }

    /// Global direction of the local y axis (column / linear-array direction).
    pub fn axis_y(&self) -> Vec3 {
        self.a2
    }

    /// Global direction of the broadside normal (local z).
    pub fn normal(&self) -> Vec3 {
        self.a3
    }

    /// Total number of elements.
    pub fn element_count(&self) -> usize {
        match self.kind {
            ArrayKind::Ula | ArrayKind::Uca => self.cols,
            ArrayKind::Upa => self.rows * self.cols,
        }
    }

    /// Element positions in the local frame, row-major (s = m * cols + n).
    pub fn element_positions_local(&self) -> Vec<Vec3> {
        match self.kind {
            ArrayKind::Ula | ArrayKind::Upa => {
                let mut out = Vec::with_capacity(self.rows * self.cols);
                for m in 0..self.rows {
                    let dx = (m as f64 - (self.rows as f64 - 1.0) / 2.0) * self.spacing;
                    for n in 0..self.cols {
                        let dy = (n as f64 - (self.cols as f64 - 1.0) / 2.0) * self.spacing;
                        out.push(vec3(dx, dy, 0.0));
                    }
                }
                out
            }
            ArrayKind::Uca => (0..self.cols)
                .map(|k| {
                    let az = 2.0 * std::f64::consts::PI * k as f64 / self.cols as f64;
                    vec3(self.radius * az.cos(), self.radius * az.sin(), 0.0)
                })
                .collect(),
        }
    }

    /// Element positions in the global frame.
    pub fn element_positions(&self) -> Vec<Vec3> {
        self.element_positions_local()
            .into_iter()
            .map(|p| self.to_global(p))
            .collect()
    }

    /// Positions (local frame) of the outermost vertex elements: the two
    /// endpoints of a linear array or the four corners of a planar array.
    /// Circular arrays have no distinguished vertices and return all
    /// elements.
    pub fn vertex_elements_local(&self) -> Vec<Vec3> {
        let half_x = (self.rows as f64 - 1.0) / 2.0 * self.spacing;
        let half_y = (self.cols as f64 - 1.0) / 2.0 * self.spacing;
        match self.kind {
            ArrayKind::Ula => vec![vec3(0.0, -half_y, 0.0), vec3(0.0, half_y, 0.0)],
            ArrayKind::Upa => vec![
                vec3(-half_x, -half_y, 0.0),
                vec3(-half_x, half_y, 0.0),
                vec3(half_x, -half_y, 0.0),
                vec3(half_x, half_y, 0.0),
            ],
            ArrayKind::Uca => self.element_positions_local(),
        }
    }

    /// Map a local-frame point to the global frame.
    pub fn to_global(&self, local: Vec3) -> Vec3 {
        self.center + self.rotate_to_global(local)
    }

    /// Map a global-frame point to the local frame.
    pub fn to_local(&self, global: Vec3) -> Vec3 {
        self.rotate_to_local(global - self.center)
    }

    /// Rotate a direction from the local to the global frame (no translation).
    pub fn rotate_to_global(&self, v: Vec3) -> Vec3 {
        self.a1 * v.x + self.a2 * v.y + self.a3 * v.z
    }

    /// Rotate a direction from the global to the local frame (no translation).
    pub fn rotate_to_local(&self, v: Vec3) -> Vec3 {
        vec3(v.dot(self.a1), v.dot(self.a2), v.dot(self.a3))
    }

    /// Array aperture in meters: end-to-end length for a linear array, the
    /// grid diagonal for a planar array, the diameter for a circular array.
    /// Zero for a single element.
    pub fn aperture(&self) -> f64 {
        match self.kind {
            ArrayKind::Ula => (self.cols as f64 - 1.0) * self.spacing,
            ArrayKind::Upa => {
                let mx = self.rows as f64 - 1.0;
                let ny = self.cols as f64 - 1.0;
                self.spacing * (mx * mx + ny * ny).sqrt()
            }
            ArrayKind::Uca => 2.0 * self.radius,
        }
    }

    /// Spherical coordinates of a global-frame point relative to the array
    /// center, expressed in the array's local frame.
    pub fn relative_position(&self, point: Vec3) -> Result<ScattererSpherical> {
        let v = self.to_local(point);
        let r = v.norm();
        if r <= 0.0 {
            return Err(Error::domain(
                "cannot take spherical coordinates of the array center itself",
            ));
        }
        let zenith = (v.z / r).clamp(-1.0, 1.0).acos();
        let mut azimuth = v.y.atan2(v.x);
        if azimuth <= -std::f64::consts::PI {
            azimuth = std::f64::consts::PI;
        }
        ScattererSpherical::new(r, zenith, azimuth)
    }

    /// Signed elevation of a target relative to the array, in radians within
    /// [-pi/2, pi/2]. For a linear array this is the angle between the
    /// target direction and the plane perpendicular to the array axis (so a
    /// target on the axis gives +/-pi/2 and a broadside target gives 0). For
    /// planar and circular arrays it is the elevation above the array plane,
    /// i.e. 90 degrees minus the angle from the broadside normal.
    pub fn elevation_wrt_array(&self, target: Vec3) -> Result<f64> {
        let v = (target - self.center)
            .try_normalized()
            .ok_or_else(|| Error::domain("elevation target coincides with the array center"))?;
        let s = match self.kind {
            ArrayKind::Ula => v.dot(self.a2),
            ArrayKind::Upa | ArrayKind::Uca => v.dot(self.a3),
        };
        Ok(s.clamp(-1.0, 1.0).asin())
    }
}

/// Spherical coordinates (range, zenith, azimuth) of a scatterer or probe
/// point relative to an array center, in that array's local frame. Zenith is
/// measured from the local +z axis; azimuth from local +x toward +y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScattererSpherical {
    /// Range in meters (> 0).
    pub r: f64,
    /// Zenith angle in radians, [0, pi].
    pub zenith: f64,
    /// Azimuth angle in radians, (-pi, pi].
    pub azimuth: f64,
}

impl ScattererSpherical {
    /// Validate ranges and build.
    pub fn new(r: f64, zenith: f64, azimuth: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain("spherical range must be finite and > 0"));
        }
        if !(0.0..=std::f64::consts::PI).contains(&zenith) {
            return Err(Error::domain("zenith angle must lie in [0, pi]"));
        }
        if azimuth <= -std::f64::consts::PI || azimuth > std::f64::consts::PI {
            return Err(Error::domain("azimuth angle must lie in (-pi, pi]"));
        }
        Ok(Self { r, zenith, azimuth })
    }

    /// Unit direction vector in the local frame:
    /// (sin(zenith)cos(azimuth), sin(zenith)sin(azimuth), cos(zenith)).
    pub fn unit_local(&self) -> Vec3 {
        let (sz, cz) = self.zenith.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        vec3(sz * ca, sz * sa, cz)
    }

    /// Cartesian position in the local frame.
    pub fn position_local(&self) -> Vec3 {
        self.unit_local() * self.r
    }
}

/// Unit direction vector for a (zenith, azimuth) pair in radians.
pub fn direction_unit_vector(zenith: f64, azimuth: f64) -> Vec3 {
    let (sz, cz) = zenith.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    vec3(sz * ca, sz * sa, cz)
}

/// Wrap an azimuth angle into (-pi, pi].
pub fn wrap_azimuth(a: f64) -> f64 {
    let x = a.rem_euclid(2.0 * std::f64::consts::PI);
    if x > std::f64::consts::PI {
        x - 2.0 * std::f64::consts::PI
    } else {
        x
    }
}

/// Reflect a zenith angle into [0, pi] (angles past a pole fold back).
pub fn reflect_zenith(t: f64) -> f64 {
    let x = t.rem_euclid(2.0 * std::f64::consts::PI);
    if x > std::f64::consts::PI {
        2.0 * std::f64::consts::PI - x
    } else {
        x
    }
}

/// Spherical (zenith, azimuth) of a direction vector; zenith in [0, pi],
/// azimuth in (-pi, pi]. Returns None for a zero vector.
pub fn spherical_of_direction(v: Vec3) -> Option<(f64, f64)> {
    let n = v.norm();
    if n <= 0.0 {
        return None;
    }
    let zenith = (v.z / n).clamp(-1.0, 1.0).acos();
    let azimuth = wrap_azimuth(v.y.atan2(v.x));
    Some((zenith, azimuth))
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn assert_vec_eq(a: Vec3, b: Vec3, eps: f64) {
        assert_abs_diff_eq!(a.x, b.x, epsilon = eps);
        assert_abs_diff_eq!(a.y, b.y, epsilon = eps);
        assert_abs_diff_eq!(a.z, b.z, epsilon = eps);
    }

    #[test]
    fn upa_2x2_positions() {
        let g = ArrayGeometry::upa(2, 2, 1.0).unwrap();
        let p = g.element_positions_local();
        assert_vec_eq(p[0], vec3(-0.5, -0.5, 0.0), 1e-15);
        assert_vec_eq(p[1], vec3(-0.5, 0.5, 0.0), 1e-15);
        assert_vec_eq(p[2], vec3(0.5, -0.5, 0.0), 1e-15);
        assert_vec_eq(p[3], vec3(0.5, 0.5, 0.0), 1e-15);
    }

    #[test]
    fn ula_1x3_positions_along_y() {
        let g = ArrayGeometry::ula(3, 2.0).unwrap();
        let p = g.element_positions_local();
        let ys: Vec<f64> = p.iter().map(|v| v.y).collect();
        assert_eq!(ys, vec![-2.0, 0.0, 2.0]);
        assert!(p.iter().all(|v| v.x == 0.0 && v.z == 0.0));
    }

    #[test]
    fn uca_4_positions() {
        let g = ArrayGeometry::uca(4, 1.0).unwrap();
        let p = g.element_positions_local();
        assert_vec_eq(p[0], vec3(1.0, 0.0, 0.0), 1e-12);
        assert_vec_eq(p[1], vec3(0.0, 1.0, 0.0), 1e-12);
        assert_vec_eq(p[2], vec3(-1.0, 0.0, 0.0), 1e-12);
        assert_vec_eq(p[3], vec3(0.0, -1.0, 0.0), 1e-12);
    }

    #[test]
    fn apertures() {
        let ula = ArrayGeometry::ula(256, 1.5e-3).unwrap();
        assert_abs_diff_eq!(ula.aperture(), 0.3825, epsilon = 1e-15);
        let upa = ArrayGeometry::upa(2, 2, 1.0).unwrap();
        assert_abs_diff_eq!(upa.aperture(), 2.0_f64.sqrt(), epsilon = 1e-15);
        let uca = ArrayGeometry::uca(8, 0.5).unwrap();
        assert_abs_diff_eq!(uca.aperture(), 1.0, epsilon = 1e-15);
        let single = ArrayGeometry::ula(1, 0.01).unwrap();
        assert_eq!(single.aperture(), 0.0);
    }

    #[test]
    fn aperture_is_max_pairwise_distance() {
        // Circular arrays need an even element count for a full diameter.
        let arrays = [
            ArrayGeometry::ula(7, 0.013).unwrap(),
            ArrayGeometry::upa(3, 5, 0.4).unwrap(),
            ArrayGeometry::uca(8, 0.75).unwrap(),
        ];
        for g in arrays {
            let p = g.element_positions_local();
            let mut max = 0.0f64;
            for i in 0..p.len() {
                for j in (i + 1)..p.len() {
                    max = max.max(p[i].distance(p[j]));
                }
            }
            assert_abs_diff_eq!(g.aperture(), max, epsilon = 1e-12);
        }
    }

    #[test]
    fn centroid_matches_center() {
        let g = ArrayGeometry::upa(3, 4, 0.02)
            .unwrap()
            .with_center(vec3(5.0, -2.0, 25.0))
            .with_orientation(vec3(0.0, 1.0, 0.0), vec3(0.0, 0.0, 1.0))
            .unwrap();
        let p = g.element_positions();
        let mut sum = Vec3::ZERO;
        for v in &p {
            sum = sum + *v;
        }
        let centroid = sum / p.len() as f64;
        assert_vec_eq(centroid, g.center, 1e-12);
    }

    #[test]
    fn direction_examples() {
        assert_vec_eq(direction_unit_vector(0.0, 1.23), vec3(0.0, 0.0, 1.0), 1e-15);
        assert_vec_eq(direction_unit_vector(FRAC_PI_2, 0.0), vec3(1.0, 0.0, 0.0), 1e-15);
        let v = direction_unit_vector(FRAC_PI_4, FRAC_PI_2);
        assert_vec_eq(v, vec3(0.0, 0.5_f64.sqrt(), 0.5_f64.sqrt()), 1e-12);
        assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn elevation_examples() {
        // Linear array along global y: a target on the axis is at +pi/2.
        let ula = ArrayGeometry::ula(8, 0.01).unwrap();
        assert_abs_diff_eq!(
            ula.elevation_wrt_array(vec3(0.0, 3.0, 0.0)).unwrap(),
            FRAC_PI_2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            ula.elevation_wrt_array(vec3(4.0, 0.0, 0.0)).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        // Planar array in the xy-plane: broadside target is at +pi/2,
        // in-plane target at 0.
        let upa = ArrayGeometry::upa(4, 4, 0.01).unwrap();
        assert_abs_diff_eq!(
            upa.elevation_wrt_array(vec3(0.0, 0.0, 9.0)).unwrap(),
            FRAC_PI_2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            upa.elevation_wrt_array(vec3(1.0, 1.0, 0.0)).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        // Signed: target below the plane is negative.
        assert!(upa.elevation_wrt_array(vec3(1.0, 0.0, -1.0)).unwrap() < 0.0);
    }

    #[test]
    fn rigid_motion_preserves_distances() {
        let local = ArrayGeometry::upa(3, 3, 0.21).unwrap();
        let moved = ArrayGeometry::upa(3, 3, 0.21)
            .unwrap()
            .with_center(vec3(-7.0, 2.0, 13.0))
            .with_orientation(vec3(0.0, 1.0, 0.0), vec3(0.0, 0.0, 1.0))
            .unwrap();
        let a = local.element_positions_local();
        let b = moved.element_positions();
        for i in 0..a.len() {
            for j in 0..a.len() {
                assert_abs_diff_eq!(
                    a[i].distance(a[j]),
                    b[i].distance(b[j]),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn spherical_round_trip() {
        let g = ArrayGeometry::upa(2, 3, 0.1)
            .unwrap()
            .with_center(vec3(1.0, 2.0, 3.0))
            .with_orientation(vec3(0.0, 0.0, 1.0), vec3(1.0, 0.0, 0.0))
            .unwrap();
        let targets = [
            vec3(10.0, -4.0, 2.0),
            vec3(1.0, 2.0, 4.5),
            vec3(-3.0, 7.0, -9.0),
        ];
        for t in targets {
            let s = g.relative_position(t).unwrap();
            let back = g.to_global(s.position_local());
            let rel_err = back.distance(t) / t.norm().max(1.0);
            assert!(rel_err < 1e-12, "round trip error {rel_err}");
            assert!(s.zenith >= 0.0 && s.zenith <= PI);
            assert!(s.azimuth > -PI && s.azimuth <= PI);
        }
    }

    #[test]
    fn orientation_rejects_non_orthogonal_axes() {
        let r = ArrayGeometry::upa(2, 2, 0.1)
            .unwrap()
            .with_orientation(vec3(1.0, 0.0, 0.0), vec3(1.0, 1.0, 0.0));
        assert!(r.is_err());
    }

    #[test]
    fn vertex_elements() {
        let ula = ArrayGeometry::ula(5, 2.0).unwrap();
        let v = ula.vertex_elements_local();
        assert_eq!(v.len(), 2);
        assert_vec_eq(v[0], vec3(0.0, -4.0, 0.0), 1e-15);
        assert_vec_eq(v[1], vec3(0.0, 4.0, 0.0), 1e-15);
        let upa = ArrayGeometry::upa(3, 4, 1.0).unwrap();
        assert_eq!(upa.vertex_elements_local().len(), 4);
    }
}
