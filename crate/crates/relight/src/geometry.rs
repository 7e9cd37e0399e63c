//! Depth maps, 3D point grids and surface normals.
//!
//! Camera convention: orthographic, looking down −z. Pixel (i, j) maps to
//! world position (j·spacing, (H−1−i)·spacing, −depth(i, j)), so image row 0
//! is the top of the frame (largest y) and smaller depth means closer to the
//! camera.

use crate::grid::Grid;
use crate::vec3::Vec3;
use crate::{RelightError, Result};

/// Scalar depth per pixel with a validity mask.
#[derive(Debug, Clone)]
pub struct DepthMap {
    pub values: Grid<f64>,
    pub valid: Grid<bool>,
    /// World units per pixel, uniform and isotropic.
    pub pixel_spacing: f64,
}

impl DepthMap {
    pub fn new(values: Grid<f64>, valid: Grid<bool>, pixel_spacing: f64) -> Result<Self> {
        if values.width() < 2 || values.height() < 2 {
            return Err(RelightError::InvalidInput(format!(
                "depth map must be at least 2x2, got {}x{}",
                values.width(),
                values.height()
            )));
        }
        if !values.same_shape(&valid) {
            return Err(RelightError::DimensionMismatch(
                "depth values and validity mask differ in shape".into(),
            ));
        }
        // Negated form deliberately rejects NaN.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(pixel_spacing > 0.0) {
            return Err(RelightError::InvalidInput(format!(
                "pixel_spacing must be positive, got {pixel_spacing}"
            )));
        }
        for (i, j, &v) in values.iter() {
            if valid.at(i, j) && !v.is_finite() {
                return Err(RelightError::InvalidInput(format!(
                    "non-finite depth at valid pixel ({i}, {j})"
                )));
            }
        }
        Ok(DepthMap { values, valid, pixel_spacing })
    }

    /// All-valid depth map.
    pub fn from_values(values: Grid<f64>, pixel_spacing: f64) -> Result<Self> {
        let valid = Grid::new(values.width(), values.height(), true);
        DepthMap::new(values, valid, pixel_spacing)
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    /// Inclusive (row0, col0, row1, col1) bounding box of the valid region.
    pub fn valid_bbox(&self) -> Option<(usize, usize, usize, usize)> {
        let (mut i0, mut j0) = (usize::MAX, usize::MAX);
        let (mut i1, mut j1) = (0usize, 0usize);
        let mut any = false;
        for (i, j, &v) in self.valid.iter() {
            if v {
                any = true;
                i0 = i0.min(i);
                j0 = j0.min(j);
                i1 = i1.max(i);
                j1 = j1.max(j);
            }
        }
        any.then_some((i0, j0, i1, j1))
    }
}

/// One world-space point per pixel; bijective with the source depth map on
/// valid pixels (depth can be read back as −z).
#[derive(Debug, Clone)]
pub struct PointGrid {
    pub points: Grid<Vec3>,
    pub pixel_spacing: f64,
}

/// Unit, camera-facing normals. `degenerate` flags pixels where no stable
/// normal could be formed (isolated pixels, zero cross products); those carry
/// the placeholder normal (0, 0, 1).
#[derive(Debug, Clone)]
pub struct NormalMap {
    pub normals: Grid<Vec3>,
    pub degenerate: Grid<bool>,
    pub valid: Grid<bool>,
}

pub fn depth_to_points(d: &DepthMap) -> PointGrid {
    let s = d.pixel_spacing;
    let h = d.height();
    let points = Grid::from_fn(d.width(), h, |i, j| {
        Vec3::new(j as f64 * s, (h - 1 - i) as f64 * s, -d.values.at(i, j))
    });
    PointGrid { points, pixel_spacing: s }
}

/// Finite-difference stencil along one axis, picked from neighbor validity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stencil {
    Central,
    Forward,
    Backward,
    None,
}

/// Stencil selection for the x (column) and y (row) tangents at (i, j).
/// Shared by the forward normal computation and its adjoint so both always
/// agree on which neighbors participate.
pub(crate) fn stencils(valid: &Grid<bool>, i: usize, j: usize) -> (Stencil, Stencil) {
    let w = valid.width();
    let h = valid.height();
    let left = j > 0 && valid.at(i, j - 1);
    let right = j + 1 < w && valid.at(i, j + 1);
    let sx = match (left, right) {
        (true, true) => Stencil::Central,
        (false, true) => Stencil::Forward,
        (true, false) => Stencil::Backward,
        (false, false) => Stencil::None,
    };
    // +y points toward smaller row indices.
    let below = i + 1 < h && valid.at(i + 1, j);
    let above = i > 0 && valid.at(i - 1, j);
    let sy = match (below, above) {
        (true, true) => Stencil::Central,
        (false, true) => Stencil::Forward,
        (true, false) => Stencil::Backward,
        (false, false) => Stencil::None,
    };
    (sx, sy)
}

/// Tangent along +x at (i, j) for the given stencil.
pub(crate) fn tangent_x(p: &Grid<Vec3>, i: usize, j: usize, s: Stencil) -> Vec3 {
    match s {
        Stencil::Central => p.at(i, j + 1) - p.at(i, j - 1),
        Stencil::Forward => p.at(i, j + 1) - p.at(i, j),
        Stencil::Backward => p.at(i, j) - p.at(i, j - 1),
        Stencil::None => Vec3::ZERO,
    }
}

/// Tangent along +y at (i, j); +y is row i−1.
pub(crate) fn tangent_y(p: &Grid<Vec3>, i: usize, j: usize, s: Stencil) -> Vec3 {
    match s {
        Stencil::Central => p.at(i - 1, j) - p.at(i + 1, j),
        Stencil::Forward => p.at(i - 1, j) - p.at(i, j),
        Stencil::Backward => p.at(i, j) - p.at(i + 1, j),
        Stencil::None => Vec3::ZERO,
    }
}

pub fn compute_normals(p: &PointGrid, valid: &Grid<bool>) -> NormalMap {
    let w = p.points.width();
    let h = p.points.height();
    let mut normals = Grid::new(w, h, Vec3::new(0.0, 0.0, 1.0));
    let mut degenerate = Grid::new(w, h, false);
    for i in 0..h {
        for j in 0..w {
            if !valid.at(i, j) {
                continue;
            }
            let (sx, sy) = stencils(valid, i, j);
            if sx == Stencil::None || sy == Stencil::None {
                *degenerate.get_mut(i, j) = true;
                continue;
            }
            let tx = tangent_x(&p.points, i, j, sx);
            let ty = tangent_y(&p.points, i, j, sy);
            let mut c = tx.cross(ty);
            if c.z < 0.0 {
                c = -c;
            }
            match c.normalized() {
                Some(n) => *normals.get_mut(i, j) = n,
                None => *degenerate.get_mut(i, j) = true,
            }
        }
    }
    NormalMap { normals, degenerate, valid: valid.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(w: usize, h: usize, depth: f64, spacing: f64) -> DepthMap {
        DepthMap::from_values(Grid::new(w, h, depth), spacing).unwrap()
    }

    #[test]
    fn constant_depth_plane_points() {
        let d = flat(2, 2, 1.0, 1.0);
        let p = depth_to_points(&d);
        for (i, j, pt) in p.points.iter() {
            assert_eq!(pt.z, -1.0);
            assert_eq!(pt.x, j as f64);
            assert_eq!(pt.y, (1 - i) as f64);
        }
    }

    #[test]
    fn point_formula_at_origin_pixel() {
        let mut values = Grid::new(2, 2, 1.0);
        *values.get_mut(0, 0) = 0.0;
        let d = DepthMap::from_values(values, 0.5).unwrap();
        let p = depth_to_points(&d);
        assert_eq!(p.points.at(0, 0), Vec3::new(0.0, 0.5, 0.0));
    }

    #[test]
    fn gaussian_bump_apex_reaches_zero() {
        // depth(x, y) = 1 − exp(−r²) with r measured from the grid center.
        let n = 65;
        let s = 2.0 / (n as f64 - 1.0);
        let c = (n - 1) as f64 / 2.0;
        let values = Grid::from_fn(n, n, |i, j| {
            let x = (j as f64 - c) * s;
            let y = (c - i as f64) * s;
            1.0 - (-(x * x + y * y)).exp()
        });
        let d = DepthMap::from_values(values, s).unwrap();
        let p = depth_to_points(&d);
        assert!(p.points.at(32, 32).z.abs() < 1e-12);
    }

    #[test]
    fn depth_to_points_is_invertible() {
        let values = Grid::from_fn(7, 5, |i, j| 0.3 + 0.11 * i as f64 - 0.07 * j as f64);
        let d = DepthMap::from_values(values.clone(), 0.25).unwrap();
        let p = depth_to_points(&d);
        for (i, j, pt) in p.points.iter() {
            assert_eq!(-pt.z, values.at(i, j));
        }
    }

    #[test]
    fn flat_plane_normals_point_up() {
        let d = flat(6, 6, 2.0, 1.0);
        let n = compute_normals(&depth_to_points(&d), &d.valid);
        for (_, _, v) in n.normals.iter() {
            assert_eq!(*v, Vec3::new(0.0, 0.0, 1.0));
        }
        assert!(n.degenerate.data().iter().all(|&b| !b));
    }

    #[test]
    fn tilted_plane_normal_matches_closed_form() {
        // depth(x) = −x·tan(30°) → n = (−sin 30°, 0, cos 30°).
        let t = (30f64).to_radians().tan();
        let values = Grid::from_fn(9, 9, |_, j| -(j as f64) * t);
        let d = DepthMap::from_values(values, 1.0).unwrap();
        let n = compute_normals(&depth_to_points(&d), &d.valid);
        let expect = Vec3::new(-(30f64).to_radians().sin(), 0.0, (30f64).to_radians().cos());
        for (_, _, v) in n.normals.iter() {
            assert!((v.x - expect.x).abs() < 1e-12);
            assert!((v.y - expect.y).abs() < 1e-12);
            assert!((v.z - expect.z).abs() < 1e-12);
        }
    }

    #[test]
    fn single_valid_pixel_is_degenerate() {
        let values = Grid::new(4, 4, 1.0);
        let mut valid = Grid::new(4, 4, false);
        *valid.get_mut(2, 2) = true;
        let d = DepthMap::new(values, valid, 1.0).unwrap();
        let n = compute_normals(&depth_to_points(&d), &d.valid);
        assert!(n.degenerate.at(2, 2));
        assert_eq!(n.normals.at(2, 2), Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn normals_are_unit_and_camera_facing() {
        let values = Grid::from_fn(16, 16, |i, j| {
            (0.3 * i as f64).sin() * 0.2 + (0.4 * j as f64).cos() * 0.3
        });
        let d = DepthMap::from_values(values, 0.1).unwrap();
        let n = compute_normals(&depth_to_points(&d), &d.valid);
        for (_, _, v) in n.normals.iter() {
            assert!((v.norm() - 1.0).abs() < 1e-6);
            assert!(v.z >= 0.0);
        }
    }
}
