//! Soft shadow mask estimation by ray sampling over the height field.
//!
//! For each valid pixel a shadow ray is cast toward the light. The ray's 2D
//! projection is walked in `m` regular steps; at each step the surface point
//! under the walk position is reconstructed from bilinearly interpolated
//! depth, and the minimum point-to-ray distance over all samples is pushed
//! through a sigmoid to produce a visibility value in [0, 1].

use rayon::prelude::*;

use crate::geometry::{DepthMap, PointGrid};
use crate::grid::Grid;
use crate::vec3::Vec3;
use crate::{RelightError, Result};

/// Unit vector pointing from the surface toward the light, with a positive z
/// component (the light is in front of the height field).
#[derive(Debug, Clone, Copy)]
pub struct LightDirection(Vec3);

impl LightDirection {
    pub fn new(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n < 1e-12 {
            return Err(RelightError::NonUnitDirection(n));
        }
        let u = v * (1.0 / n);
        if u.z <= 0.0 {
            return Err(RelightError::InvalidInput(format!(
                "light direction must have positive z (got z = {})",
                u.z
            )));
        }
        Ok(LightDirection(u))
    }

    /// Azimuth measured in the image plane from +x toward +y, elevation above
    /// the image plane; both in degrees. Elevation must be in (0, 90].
    pub fn from_azimuth_elevation(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        if !(elevation_deg > 0.0 && elevation_deg <= 90.0) {
            return Err(RelightError::InvalidInput(format!(
                "elevation must be in (0, 90] degrees, got {elevation_deg}"
            )));
        }
        let az = azimuth_deg.to_radians();
        let el = elevation_deg.to_radians();
        LightDirection::new(Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin()))
    }

    pub fn as_vec(self) -> Vec3 {
        self.0
    }
}

/// Treatment of walk positions whose bilinear footprint touches pixels
/// outside the valid region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OobPolicy {
    /// Stop sampling at the first such position (no phantom occluders at the
    /// image border).
    #[default]
    Terminate,
    /// Clamp the position back into the valid bounding box and keep going.
    Clamp,
}

#[derive(Debug, Clone, Copy)]
pub struct ShadowConfig {
    /// Number of samples per shadow ray.
    pub samples: usize,
    /// World units skipped along the projected ray before the first sample.
    /// `None` means 2·pixel_spacing (guards against self-intersection).
    pub start_offset: Option<f64>,
    /// Multiplier applied to d_min before the sigmoid. Controls shadow edge
    /// hardness in world units; the default suits height fields normalized to
    /// roughly unit half-width.
    pub distance_scale: f64,
    pub oob_policy: OobPolicy,
}

pub const DEFAULT_SAMPLES: usize = 160;
pub const DEFAULT_DISTANCE_SCALE: f64 = 100.0;

impl Default for ShadowConfig {
    fn default() -> Self {
        ShadowConfig {
            samples: DEFAULT_SAMPLES,
            start_offset: None,
            distance_scale: DEFAULT_DISTANCE_SCALE,
            oob_policy: OobPolicy::Terminate,
        }
    }
}

impl ShadowConfig {
    pub fn effective_start_offset(&self, pixel_spacing: f64) -> f64 {
        self.start_offset.unwrap_or(2.0 * pixel_spacing)
    }

    // `!(x >= 0.0)` guards deliberately reject NaN alongside negatives.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(RelightError::InvalidInput("samples must be >= 1".into()));
        }
        if let Some(o) = self.start_offset {
            if !(o >= 0.0) {
                return Err(RelightError::InvalidInput("start_offset must be >= 0".into()));
            }
        }
        if !(self.distance_scale > 0.0) {
            return Err(RelightError::InvalidInput("distance_scale must be > 0".into()));
        }
        Ok(())
    }
}

/// Per-pixel soft visibility: 0 = fully shadowed, 1 = fully lit.
#[derive(Debug, Clone)]
pub struct ShadowMask {
    pub values: Grid<f64>,
}

/// What the sampler recorded for one pixel; consumed by the reverse pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleRecord {
    /// Pixel outside the valid region; mask forced to 1.
    Invalid,
    /// Degenerate projection or immediate exit; mask is exactly 1.
    NoSamples,
    /// A minimum was found at the given sample index and 2D world position.
    Min { d_min: f64, index: usize, pos: (f64, f64) },
    /// A sampled surface point lies above the ray: the ray intersects the
    /// height field, so the pixel is fully shadowed (mask exactly 0). The
    /// index/pos identify the first such sample. The mask is locally
    /// constant here, so no gradient flows through this record.
    Crossing { index: usize, pos: (f64, f64) },
}

/// Bilinear depth lookup at continuous pixel coordinates (row `v`, col `u`).
/// Returns the interpolated depth together with the participating corner
/// indices and weights, or None if the footprint leaves the grid or touches
/// an invalid pixel.
#[inline]
#[allow(clippy::type_complexity)]
pub(crate) fn bilinear_depth(
    d: &DepthMap,
    v: f64,
    u: f64,
) -> Option<(f64, [(usize, usize, f64); 4])> {
    let w = d.width();
    let h = d.height();
    // Negated form deliberately rejects NaN coordinates.
    #[allow(clippy::manual_range_contains, clippy::neg_cmp_op_on_partial_ord)]
    if !(u >= 0.0 && v >= 0.0 && u <= (w - 1) as f64 && v <= (h - 1) as f64) {
        return None;
    }
    let mut j0 = u.floor() as usize;
    let mut i0 = v.floor() as usize;
    if j0 >= w - 1 {
        j0 = w - 2;
    }
    if i0 >= h - 1 {
        i0 = h - 2;
    }
    let fu = u - j0 as f64;
    let fv = v - i0 as f64;
    let corners = [
        (i0, j0, (1.0 - fv) * (1.0 - fu)),
        (i0, j0 + 1, (1.0 - fv) * fu),
        (i0 + 1, j0, fv * (1.0 - fu)),
        (i0 + 1, j0 + 1, fv * fu),
    ];
    let mut val = 0.0;
    for &(i, j, wgt) in &corners {
        if !d.valid.at(i, j) {
            return None;
        }
        val += wgt * d.values.at(i, j);
    }
    Some((val, corners))
}

/// 2D geometry of one shadow ray's projected walk.
pub(crate) struct RayWalk {
    /// World-space 2D start (x, y).
    pub(crate) origin: (f64, f64),
    /// Unit 2D direction.
    pub(crate) dir: (f64, f64),
    /// Arc-length parameters of the samples.
    pub(crate) t0: f64,
    pub(crate) dt: f64,
    pub(crate) count: usize,
    /// Arc length at which the projected ray leaves the valid bbox.
    pub(crate) t_exit: f64,
    /// Which border bounds the walk: 0 = x, 1 = y.
    pub(crate) exit_axis: u8,
}

/// Threshold under which the light is treated as aligned with the view axis;
/// a height field cannot occlude a vertical ray above itself.
const DEGENERATE_PROJECTION_EPS: f64 = 1e-6;

pub(crate) type Bbox = (usize, usize, usize, usize);

pub(crate) fn plan_walk(
    d: &DepthMap,
    bbox: Bbox,
    i: usize,
    j: usize,
    omega: Vec3,
    cfg: &ShadowConfig,
) -> Option<RayWalk> {
    let planar = (omega.x * omega.x + omega.y * omega.y).sqrt();
    if planar < DEGENERATE_PROJECTION_EPS {
        return None;
    }
    let dir = (omega.x / planar, omega.y / planar);
    let s = d.pixel_spacing;
    let h = d.height();
    let origin = (j as f64 * s, (h - 1 - i) as f64 * s);

    let (i0, j0, i1, j1) = bbox;
    let x_min = j0 as f64 * s;
    let x_max = j1 as f64 * s;
    let y_min = (h - 1 - i1) as f64 * s;
    let y_max = (h - 1 - i0) as f64 * s;

    // Distance until the projected ray leaves the valid bounding box.
    let mut t_exit = f64::INFINITY;
    let mut exit_axis = 0u8;
    if dir.0 > 0.0 {
        t_exit = (x_max - origin.0) / dir.0;
    } else if dir.0 < 0.0 {
        t_exit = (x_min - origin.0) / dir.0;
    }
    let t_y = if dir.1 > 0.0 {
        (y_max - origin.1) / dir.1
    } else if dir.1 < 0.0 {
        (y_min - origin.1) / dir.1
    } else {
        f64::INFINITY
    };
    if t_y < t_exit {
        t_exit = t_y;
        exit_axis = 1;
    }

    let t0 = cfg.effective_start_offset(s);
    if !t_exit.is_finite() || t_exit <= t0 {
        return None;
    }
    let count = cfg.samples;
    let dt = if count > 1 { (t_exit - t0) / (count - 1) as f64 } else { 0.0 };
    Some(RayWalk { origin, dir, t0, dt, count, t_exit, exit_axis })
}

/// Walk the projected ray, reconstructing a 3D surface point at each sample.
/// Calls `f(sample_index, point, world_2d_pos)`; stops early when the oob
/// policy says to terminate.
fn for_each_sample(
    d: &DepthMap,
    bbox: Bbox,
    i: usize,
    j: usize,
    omega: Vec3,
    cfg: &ShadowConfig,
    mut f: impl FnMut(usize, Vec3, (f64, f64)),
) {
    let Some(walk) = plan_walk(d, bbox, i, j, omega, cfg) else {
        return;
    };
    let s = d.pixel_spacing;
    let h = d.height();
    for k in 0..walk.count {
        let t = walk.t0 + walk.dt * k as f64;
        let mut x = walk.origin.0 + walk.dir.0 * t;
        let mut y = walk.origin.1 + walk.dir.1 * t;
        if cfg.oob_policy == OobPolicy::Clamp {
            let (i0, j0, i1, j1) = bbox;
            x = x.clamp(j0 as f64 * s, j1 as f64 * s);
            y = y.clamp((h - 1 - i1) as f64 * s, (h - 1 - i0) as f64 * s);
        }
        let u = x / s;
        let v = (h - 1) as f64 - y / s;
        match bilinear_depth(d, v, u) {
            Some((depth, _)) => f(k, Vec3::new(x, y, -depth), (x, y)),
            None => match cfg.oob_policy {
                OobPolicy::Terminate => return,
                OobPolicy::Clamp => continue,
            },
        }
    }
}

/// Sampled surface points along the shadow ray of pixel (i, j).
///
/// Empty when the projection is degenerate (near-vertical light) or the
/// projected ray exits the valid region before the start offset.
pub fn sample_ray_points(
    d: &DepthMap,
    pixel: (usize, usize),
    omega: LightDirection,
    cfg: &ShadowConfig,
) -> Result<Vec<Vec3>> {
    let (i, j) = pixel;
    if i >= d.height() || j >= d.width() || !d.valid.at(i, j) {
        return Err(RelightError::InvalidPixel { row: i, col: j });
    }
    cfg.validate()?;
    let mut out = Vec::new();
    if let Some(bbox) = d.valid_bbox() {
        for_each_sample(d, bbox, i, j, omega.as_vec(), cfg, |_, p, _| out.push(p));
    }
    Ok(out)
}

/// Minimum point-to-ray distance over the samples (Euclidean distance from
/// each sample to the line through `x_i` with direction `omega`), plus the
/// index of the first sample attaining it. None for empty input; the caller
/// substitutes the fully-lit sentinel.
pub fn min_ray_distance(x_i: Vec3, samples: &[Vec3], omega: LightDirection) -> Option<(f64, usize)> {
    let w = omega.as_vec();
    let mut best: Option<(f64, usize)> = None;
    for (k, &p) in samples.iter().enumerate() {
        let dist = (p - x_i).cross(w).norm();
        match best {
            Some((b, _)) if dist >= b => {}
            _ => best = Some((dist, k)),
        }
    }
    best
}

/// Sigmoid visibility M(d) = 1 − 4·e^{−d}/(1+e^{−d})², with the
/// distance pre-multiplied by `distance_scale`. `f64::INFINITY` is the
/// fully-lit sentinel and maps to exactly 1.
pub fn visibility(d_min: f64, cfg: &ShadowConfig) -> f64 {
    if d_min.is_infinite() {
        return 1.0;
    }
    let d = cfg.distance_scale * d_min;
    let e = (-d).exp();
    let denom = 1.0 + e;
    1.0 - 4.0 * e / (denom * denom)
}

/// d/d(d_min) of `visibility`, including the distance_scale factor.
pub(crate) fn visibility_derivative(d_min: f64, cfg: &ShadowConfig) -> f64 {
    if d_min.is_infinite() {
        return 0.0;
    }
    let d = cfg.distance_scale * d_min;
    let e = (-d).exp();
    let sig = 1.0 / (1.0 + e);
    let sig_p = sig * (1.0 - sig);
    // M'(d) = 4·σ'(d)·(2σ(d) − 1)
    4.0 * sig_p * (2.0 * sig - 1.0) * cfg.distance_scale
}

fn mask_pixel(
    d: &DepthMap,
    bbox: Bbox,
    points: &PointGrid,
    i: usize,
    j: usize,
    omega: Vec3,
    cfg: &ShadowConfig,
) -> (f64, SampleRecord) {
    if !d.valid.at(i, j) {
        return (1.0, SampleRecord::Invalid);
    }
    let x_i = points.points.at(i, j);
    let w = omega;
    // The walk lies in the vertical plane of ω, so the point-to-ray distance
    // is |σ| with σ the signed in-plane perpendicular offset; σ < 0 means
    // the surface sample is above the ray, i.e. the ray has entered the
    // height field. The sigmoid alone cannot see this (160 samples can
    // straddle a steep wall without any of them landing near the ray), so
    // an intersection forces the mask to 0. The transition is continuous:
    // as the closest approach σ → 0⁺ the sigmoid already reaches M(0) = 0.
    let planar = w.x.hypot(w.y);
    let mut best: Option<(f64, usize, (f64, f64))> = None;
    let mut crossing: Option<(usize, (f64, f64))> = None;
    for_each_sample(d, bbox, i, j, omega, cfg, |k, p, pos| {
        let delta = p - x_i;
        let along = (delta.x * w.x + delta.y * w.y) / planar;
        if along * w.z - delta.z * planar < 0.0 && crossing.is_none() {
            crossing = Some((k, pos));
        }
        let dist = delta.cross(w).norm();
        match best {
            Some((b, _, _)) if dist >= b => {}
            _ => best = Some((dist, k, pos)),
        }
    });
    if let Some((index, pos)) = crossing {
        return (0.0, SampleRecord::Crossing { index, pos });
    }
    match best {
        None => (1.0, SampleRecord::NoSamples),
        Some((d_min, index, pos)) => {
            (visibility(d_min, cfg), SampleRecord::Min { d_min, index, pos })
        }
    }
}

/// Estimate the shadow mask for the whole depth map. Invalid pixels get 1.
/// Embarrassingly parallel over rows; the per-pixel arithmetic is identical
/// regardless of worker count, so the output does not depend on threading.
pub fn estimate_shadow_mask(d: &DepthMap, omega: LightDirection, cfg: &ShadowConfig) -> ShadowMask {
    estimate_shadow_mask_with_records(d, omega, cfg).0
}

pub(crate) fn estimate_shadow_mask_with_records(
    d: &DepthMap,
    omega: LightDirection,
    cfg: &ShadowConfig,
) -> (ShadowMask, Vec<SampleRecord>) {
    let w = d.width();
    let h = d.height();
    let points = crate::geometry::depth_to_points(d);
    let mut values = vec![0.0f64; w * h];
    let mut records = vec![SampleRecord::Invalid; w * h];
    let ov = omega.as_vec();
    let Some(bbox) = d.valid_bbox() else {
        return (ShadowMask { values: Grid::new(w, h, 1.0) }, records);
    };
    values
        .par_chunks_mut(w)
        .zip(records.par_chunks_mut(w))
        .enumerate()
        .for_each(|(i, (vrow, rrow))| {
            for j in 0..w {
                let (m, rec) = mask_pixel(d, bbox, &points, i, j, ov, cfg);
                vrow[j] = m;
                rrow[j] = rec;
            }
        });
    let mut grid = Grid::new(w, h, 0.0);
    grid.data_mut().copy_from_slice(&values);
    (ShadowMask { values: grid }, records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize, spacing: f64) -> DepthMap {
        DepthMap::from_values(Grid::new(n, n, 1.0), spacing).unwrap()
    }

    #[test]
    fn vertical_ray_has_no_samples() {
        let d = flat(8, 1.0);
        let omega = LightDirection::new(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let pts = sample_ray_points(&d, (4, 4), omega, &ShadowConfig::default()).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn samples_step_regularly_toward_border() {
        let d = flat(64, 1.0);
        let omega = LightDirection::new(Vec3::new(1.0, 0.0, 1.0)).unwrap();
        let cfg = ShadowConfig::default();
        let pts = sample_ray_points(&d, (32, 32), omega, &cfg).unwrap();
        assert_eq!(pts.len(), cfg.samples);
        // x walks from 32 + offset to the +x border in equal increments.
        let t0 = cfg.effective_start_offset(1.0);
        let dt = (63.0 - 32.0 - t0) / (cfg.samples - 1) as f64;
        for (k, p) in pts.iter().enumerate() {
            let expect = 32.0 + t0 + dt * k as f64;
            assert!((p.x - expect).abs() < 1e-9, "sample {k}");
            assert_eq!(p.y, 31.0);
        }
        assert!((pts.last().unwrap().x - 63.0).abs() < 1e-9);
    }

    #[test]
    fn immediate_exit_gives_empty_list() {
        let d = flat(16, 1.0);
        let omega = LightDirection::new(Vec3::new(1.0, 0.0, 1.0)).unwrap();
        let cfg = ShadowConfig { start_offset: Some(5.0), ..ShadowConfig::default() };
        // One pixel from the +x border: remaining extent 1 < offset 5.
        let pts = sample_ray_points(&d, (8, 14), omega, &cfg).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn invalid_pixel_is_an_error() {
        let values = Grid::new(8, 8, 1.0);
        let mut valid = Grid::new(8, 8, true);
        *valid.get_mut(3, 3) = false;
        let d = DepthMap::new(values, valid, 1.0).unwrap();
        let omega = LightDirection::new(Vec3::new(1.0, 0.0, 1.0)).unwrap();
        let err = sample_ray_points(&d, (3, 3), omega, &ShadowConfig::default());
        assert!(matches!(err, Err(RelightError::InvalidPixel { row: 3, col: 3 })));
    }

    #[test]
    fn collinear_sample_has_zero_distance() {
        let omega = LightDirection::new(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let (d, k) =
            min_ray_distance(Vec3::ZERO, &[Vec3::new(0.0, 0.0, 5.0)], omega).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(k, 0);
    }

    #[test]
    fn point_to_line_distance_hand_computed() {
        // ‖(3,4,7)×(0,0,1)‖ = ‖(4,−3,0)‖ = 5.
        let omega = LightDirection::new(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let (d, _) = min_ray_distance(Vec3::ZERO, &[Vec3::new(3.0, 4.0, 7.0)], omega).unwrap();
        assert!((d - 5.0).abs() < 1e-15);
    }

    #[test]
    fn tie_break_picks_first_index() {
        let omega = LightDirection::new(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let samples = [Vec3::new(2.0, 0.0, 1.0), Vec3::new(0.0, 2.0, 3.0)];
        let (_, k) = min_ray_distance(Vec3::ZERO, &samples, omega).unwrap();
        assert_eq!(k, 0);
    }

    #[test]
    fn visibility_unit_values() {
        let cfg = ShadowConfig { distance_scale: 1.0, ..ShadowConfig::default() };
        assert_eq!(visibility(0.0, &cfg), 0.0);
        assert!((visibility(3f64.ln(), &cfg) - 0.25).abs() < 1e-15);
        assert_eq!(visibility(f64::INFINITY, &cfg), 1.0);
    }

    #[test]
    fn visibility_is_monotone() {
        let cfg = ShadowConfig { distance_scale: 1.0, ..ShadowConfig::default() };
        let mut prev = visibility(0.0, &cfg);
        for k in 1..10_000 {
            let d = 20.0 * k as f64 / 10_000.0;
            let v = visibility(d, &cfg);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn visibility_derivative_matches_finite_difference() {
        let cfg = ShadowConfig { distance_scale: 3.0, ..ShadowConfig::default() };
        for &d in &[0.0, 0.1, 0.5, 1.3, 4.0] {
            let h = 1e-6;
            // The curve extends smoothly (and evenly) to negative d, so the
            // central difference is valid at d = 0 too.
            let fd = (visibility(d + h, &cfg) - visibility(d - h, &cfg)) / (2.0 * h);
            let an = visibility_derivative(d, &cfg);
            assert!((fd - an).abs() < 1e-6, "d = {d}: {fd} vs {an}");
        }
    }

    #[test]
    fn flat_plane_mask_is_nearly_lit() {
        let n = 128;
        let s = 1.0 / 32.0;
        let d = flat(n, s);
        let omega = LightDirection::from_azimuth_elevation(0.0, 45.0).unwrap();
        let mask = estimate_shadow_mask(&d, omega, &ShadowConfig::default());
        for (_, _, &v) in mask.values.iter() {
            assert!(v > 0.9, "flat plane visibility {v}");
        }
    }

    #[test]
    fn vertical_light_mask_is_exactly_one() {
        let values = Grid::from_fn(32, 32, |i, j| 1.0 + 0.3 * ((i * j) as f64 * 0.1).sin());
        let d = DepthMap::from_values(values, 1.0 / 16.0).unwrap();
        let omega = LightDirection::new(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let mask = estimate_shadow_mask(&d, omega, &ShadowConfig::default());
        assert!(mask.values.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn mask_values_stay_in_range() {
        let values = Grid::from_fn(48, 48, |i, j| {
            1.0 + 0.4 * ((i as f64) * 0.3).sin() * ((j as f64) * 0.2).cos()
        });
        let d = DepthMap::from_values(values, 1.0 / 24.0).unwrap();
        let omega = LightDirection::from_azimuth_elevation(30.0, 35.0).unwrap();
        let mask = estimate_shadow_mask(&d, omega, &ShadowConfig::default());
        for (_, _, &v) in mask.values.iter() {
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn translation_equivariance_along_ray_perpendicular() {
        // A bump translated in y, lit along x: every ray sees identical
        // geometry, so the mask translates exactly.
        let n = 64;
        let s = 1.0 / 16.0;
        let bump = |xc: f64, yc: f64| 1.0 - 0.5 * (-(xc * xc + yc * yc) / 0.1).exp();
        let shift = 5usize;
        let mk = |dy: usize| {
            let values = Grid::from_fn(n, n, |i, j| {
                let x = (j as f64 - 32.0) * s;
                let y = ((n - 1 - i) as f64 - 20.0 - dy as f64) * s;
                bump(x, y)
            });
            DepthMap::from_values(values, s).unwrap()
        };
        let omega = LightDirection::from_azimuth_elevation(0.0, 40.0).unwrap();
        let cfg = ShadowConfig::default();
        let m0 = estimate_shadow_mask(&mk(0), omega, &cfg);
        let m1 = estimate_shadow_mask(&mk(shift), omega, &cfg);
        // dy shifts the bump toward larger y, i.e. smaller row index.
        for i in shift..n {
            for j in 0..n {
                let a = m0.values.at(i, j);
                let b = m1.values.at(i - shift, j);
                assert!(
                    (a - b).abs() < 1e-12,
                    "mask not equivariant at ({i}, {j}): {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn mask_is_thread_count_invariant() {
        let values = Grid::from_fn(40, 40, |i, j| 1.0 + 0.2 * ((i + 2 * j) as f64 * 0.17).sin());
        let d = DepthMap::from_values(values, 1.0 / 20.0).unwrap();
        let omega = LightDirection::from_azimuth_elevation(15.0, 40.0).unwrap();
        let cfg = ShadowConfig::default();
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let m1 = pool1.install(|| estimate_shadow_mask(&d, omega, &cfg));
        let m4 = pool4.install(|| estimate_shadow_mask(&d, omega, &cfg));
        assert_eq!(m1.values.data(), m4.values.data());
    }
}
