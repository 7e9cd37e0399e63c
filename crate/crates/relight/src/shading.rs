//! Lambertian shading composition: diffuse term, shadow-masked term, and the
//! final albedo × shading render.

use crate::geometry::NormalMap;
use crate::grid::Grid;
use crate::shadow::{LightDirection, ShadowMask};
use crate::{RelightError, Result};

/// Upper bound on i_a + i_d unless overridden; keeps renders representable.
pub const DEFAULT_MAX_TOTAL_INTENSITY: f64 = 4.0;

#[derive(Debug, Clone, Copy)]
pub struct LightingParams {
    pub omega: LightDirection,
    pub ambient: f64,
    pub directional: f64,
}

impl LightingParams {
    pub fn new(omega: LightDirection, ambient: f64, directional: f64) -> Result<Self> {
        Self::with_max_intensity(omega, ambient, directional, DEFAULT_MAX_TOTAL_INTENSITY)
    }

    pub fn with_max_intensity(
        omega: LightDirection,
        ambient: f64,
        directional: f64,
        max_total: f64,
    ) -> Result<Self> {
        // Negated form deliberately rejects NaN.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(ambient >= 0.0) || !(directional >= 0.0) {
            return Err(RelightError::InvalidInput(format!(
                "intensities must be nonnegative (i_a = {ambient}, i_d = {directional})"
            )));
        }
        if ambient + directional > max_total {
            return Err(RelightError::InvalidInput(format!(
                "i_a + i_d = {} exceeds the configured maximum {max_total}",
                ambient + directional
            )));
        }
        Ok(LightingParams { omega, ambient, directional })
    }

    /// Bypasses the intensity checks; used by the optimizer while parameters
    /// are in flight.
    pub(crate) fn unchecked(omega: LightDirection, ambient: f64, directional: f64) -> Self {
        LightingParams { omega, ambient, directional }
    }
}

/// H×W×C grid of linear-light floats, row-major, channel-interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImagePlane {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        ImagePlane { width, height, channels, data: vec![0.0; width * height * channels] }
    }

    pub fn constant(width: usize, height: usize, channels: usize, value: f64) -> Self {
        let mut p = Self::new(width, height, channels);
        p.data.fill(value);
        p
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, c: usize) -> f64 {
        self.data[(row * self.width + col) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, c: usize, v: f64) {
        self.data[(row * self.width + col) * self.channels + c] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn same_shape(&self, other: &ImagePlane) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.channels == other.channels
    }
}

/// s = i_a + i_d·max(0, ⟨n, ω⟩). The Lambert term is clamped: back-facing
/// normals receive only ambient light. Invalid pixels get 0.
pub fn diffuse_shading(n: &NormalMap, light: &LightingParams) -> ImagePlane {
    let w = n.normals.width();
    let h = n.normals.height();
    let omega = light.omega.as_vec();
    let mut out = ImagePlane::new(w, h, 1);
    for i in 0..h {
        for j in 0..w {
            if !n.valid.at(i, j) {
                continue;
            }
            let lambert = n.normals.at(i, j).dot(omega).max(0.0);
            out.set(i, j, 0, light.ambient + light.directional * lambert);
        }
    }
    out
}

/// s' = i_a + M·i_d·max(0, ⟨n, ω⟩); algebraically identical to
/// M·s + (1−M)·i_a.
pub fn shadowed_shading(n: &NormalMap, light: &LightingParams, mask: &ShadowMask) -> ImagePlane {
    let w = n.normals.width();
    let h = n.normals.height();
    let omega = light.omega.as_vec();
    let mut out = ImagePlane::new(w, h, 1);
    for i in 0..h {
        for j in 0..w {
            if !n.valid.at(i, j) {
                continue;
            }
            let lambert = n.normals.at(i, j).dot(omega).max(0.0);
            let m = mask.values.at(i, j);
            out.set(i, j, 0, light.ambient + m * light.directional * lambert);
        }
    }
    out
}

/// I = A ∘ s, with the single shading channel broadcast across albedo
/// channels.
pub fn render(albedo: &ImagePlane, shading: &ImagePlane) -> Result<ImagePlane> {
    if shading.channels() != 1 {
        return Err(RelightError::DimensionMismatch("shading must be single-channel".into()));
    }
    if albedo.width() != shading.width() || albedo.height() != shading.height() {
        return Err(RelightError::DimensionMismatch(format!(
            "albedo {}x{} vs shading {}x{}",
            albedo.width(),
            albedo.height(),
            shading.width(),
            shading.height()
        )));
    }
    let mut out = albedo.clone();
    let c = albedo.channels();
    for i in 0..albedo.height() {
        for j in 0..albedo.width() {
            let s = shading.get(i, j, 0);
            for k in 0..c {
                out.set(i, j, k, albedo.get(i, j, k) * s);
            }
        }
    }
    Ok(out)
}

/// Convenience mask grid of a given shape, all ones.
pub fn full_mask(width: usize, height: usize) -> Grid<bool> {
    Grid::new(width, height, true)
}
