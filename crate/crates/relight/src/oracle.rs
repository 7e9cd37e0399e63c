//! Brute-force ground-truth visibility by dense ray marching.
//!
//! Deliberately slow and simple: each shadow ray is marched in thousands of
//! uniform 3D steps against the bilinearly interpolated surface, giving a
//! binary lit/shadowed reference the soft mask can be validated against.
//! Shares the shadow module's surface model (bilinear depth) so that
//! disagreements reflect the algorithms, not the geometry.

use rayon::prelude::*;

use crate::geometry::DepthMap;
use crate::grid::Grid;
use crate::shadow::{bilinear_depth, LightDirection, ShadowMask};
use crate::{RelightError, Result};

/// Offset along ω before the first march step, to avoid a self-hit at t = 0.
const START_OFFSET: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct BinaryVisibility {
    /// true = lit. Invalid pixels are marked lit and carry no hit.
    pub lit: Grid<bool>,
    /// Ray parameter of the first hit; +∞ when lit or invalid.
    pub hit_t: Grid<f64>,
    pub valid: Grid<bool>,
}

/// Marches the shadow ray of every valid pixel in `steps` uniform increments
/// until it leaves the volume; an above-to-below crossing of the surface
/// marks an intersection.
pub fn trace_exact(d: &DepthMap, omega: LightDirection, steps: usize) -> Result<BinaryVisibility> {
    if steps < 1000 {
        return Err(RelightError::InvalidInput(format!(
            "oracle needs at least 1000 steps, got {steps}"
        )));
    }
    let w = d.width();
    let h = d.height();
    let o = omega.as_vec();
    let s = d.pixel_spacing;
    let bbox = d.valid_bbox();

    let mut lit = Grid::new(w, h, true);
    let mut hit_t = Grid::new(w, h, f64::INFINITY);
    let Some((bi0, bj0, bi1, bj1)) = bbox else {
        return Ok(BinaryVisibility { lit, hit_t, valid: d.valid.clone() });
    };

    // Physical extents of the valid bounding box and the depth range, used to
    // bound the march.
    let x_min = bj0 as f64 * s;
    let x_max = bj1 as f64 * s;
    let y_min = (h - 1 - bi1) as f64 * s;
    let y_max = (h - 1 - bi0) as f64 * s;
    let mut min_depth = f64::INFINITY;
    for (i, j, &v) in d.values.iter() {
        if d.valid.at(i, j) {
            min_depth = min_depth.min(v);
        }
    }

    let rows: Vec<(Vec<bool>, Vec<f64>)> = (0..h)
        .into_par_iter()
        .map(|i| {
            let mut row_lit = vec![true; w];
            let mut row_t = vec![f64::INFINITY; w];
            for j in 0..w {
                if !d.valid.at(i, j) {
                    continue;
                }
                let origin_x = j as f64 * s;
                let origin_y = (h - 1 - i) as f64 * s;
                let origin_z = -d.values.at(i, j);

                // Exit distance from the volume: leave the bbox in x or y, or
                // climb above the highest surface in z.
                let mut t_exit = f64::INFINITY;
                if o.x > 0.0 {
                    t_exit = t_exit.min((x_max - origin_x) / o.x);
                } else if o.x < 0.0 {
                    t_exit = t_exit.min((x_min - origin_x) / o.x);
                }
                if o.y > 0.0 {
                    t_exit = t_exit.min((y_max - origin_y) / o.y);
                } else if o.y < 0.0 {
                    t_exit = t_exit.min((y_min - origin_y) / o.y);
                }
                // o.z > 0 always (enforced by LightDirection + elevation > 0).
                t_exit = t_exit.min((-min_depth - origin_z) / o.z);
                if t_exit <= START_OFFSET {
                    continue;
                }

                let dt = (t_exit - START_OFFSET) / steps as f64;
                let mut prev_above = true;
                for k in 0..=steps {
                    let t = START_OFFSET + k as f64 * dt;
                    let px = origin_x + t * o.x;
                    let py = origin_y + t * o.y;
                    let pz = origin_z + t * o.z;
                    let u = px / s;
                    let v = (h - 1) as f64 - py / s;
                    let Some((depth, _)) = bilinear_depth(d, v, u) else {
                        prev_above = true;
                        continue;
                    };
                    let above = pz >= -depth;
                    if prev_above && !above {
                        row_lit[j] = false;
                        row_t[j] = t;
                        break;
                    }
                    prev_above = above;
                }
            }
            (row_lit, row_t)
        })
        .collect();

    for (i, (row_lit, row_t)) in rows.into_iter().enumerate() {
        for j in 0..w {
            *lit.get_mut(i, j) = row_lit[j];
            *hit_t.get_mut(i, j) = row_t[j];
        }
    }
    Ok(BinaryVisibility { lit, hit_t, valid: d.valid.clone() })
}

/// Fraction of valid pixels where thresholding the soft mask agrees with the
/// oracle, excluding pixels within `boundary_band` (Chebyshev) of an oracle
/// shadow boundary. An image with no counted pixels scores 1.
pub fn compare_mask(
    mask: &ShadowMask,
    vis: &BinaryVisibility,
    threshold: f64,
    boundary_band: usize,
) -> Result<f64> {
    if !mask.values.same_shape(&vis.lit) {
        return Err(RelightError::DimensionMismatch("mask vs oracle shapes".into()));
    }
    let w = vis.lit.width();
    let h = vis.lit.height();
    let band = boundary_band as isize;
    let mut counted = 0usize;
    let mut agree = 0usize;
    for i in 0..h {
        for j in 0..w {
            if !vis.valid.at(i, j) {
                continue;
            }
            let own = vis.lit.at(i, j);
            let mut near_boundary = false;
            'scan: for di in -band..=band {
                for dj in -band..=band {
                    let ni = i as isize + di;
                    let nj = j as isize + dj;
                    if ni < 0 || nj < 0 || ni >= h as isize || nj >= w as isize {
                        continue;
                    }
                    let (ni, nj) = (ni as usize, nj as usize);
                    if vis.valid.at(ni, nj) && vis.lit.at(ni, nj) != own {
                        near_boundary = true;
                        break 'scan;
                    }
                }
            }
            if near_boundary {
                continue;
            }
            counted += 1;
            let soft_shadowed = mask.values.at(i, j) < threshold;
            if soft_shadowed == !own {
                agree += 1;
            }
        }
    }
    if counted == 0 {
        return Ok(1.0);
    }
    Ok(agree as f64 / counted as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{SceneKind, SceneSpec};
    use crate::shadow::{estimate_shadow_mask, ShadowConfig};

    fn step_scene(res: usize, spacing: f64, height: f64) -> DepthMap {
        let mut spec = SceneSpec::new(SceneKind::Step { height }, res).unwrap();
        spec.pixel_spacing = spacing;
        spec.build().unwrap()
    }

    fn light(az: f64, el: f64) -> LightDirection {
        LightDirection::from_azimuth_elevation(az, el).unwrap()
    }

    /// Column whose centered x-coordinate is closest to `x`.
    fn col_at_x(d: &DepthMap, x: f64) -> usize {
        let half = (d.width() - 1) as f64 / 2.0;
        (x / d.pixel_spacing + half).round() as usize
    }

    #[test]
    fn flat_plane_fully_lit() {
        let d = SceneSpec::new(SceneKind::Flat, 32).unwrap().build().unwrap();
        let vis = trace_exact(&d, light(30.0, 35.0), 2000).unwrap();
        assert!(vis.lit.data().iter().all(|&b| b));
        assert!(vis.hit_t.data().iter().all(|&t| t.is_infinite()));
    }

    #[test]
    fn vertical_light_fully_lit() {
        let d = step_scene(64, 1.0 / 16.0, 1.0);
        let vis = trace_exact(&d, LightDirection::new(crate::vec3::Vec3::new(0.0, 0.0, 1.0)).unwrap(), 2000).unwrap();
        assert!(vis.lit.data().iter().all(|&b| b));
    }

    #[test]
    fn step_shadow_boundary_at_minus_height() {
        // Light from +x at 45°: the raised half (x ≥ 0, 1 unit higher)
        // shadows ground out to x = −1.
        let d = step_scene(128, 1.0 / 32.0, 1.0);
        let vis = trace_exact(&d, light(0.0, 45.0), 5000).unwrap();
        let mid = d.height() / 2;
        assert!(!vis.lit.at(mid, col_at_x(&d, -0.5)), "x=-0.5 should be shadowed");
        assert!(vis.lit.at(mid, col_at_x(&d, -1.5)), "x=-1.5 should be lit");
        // Raised side lit.
        assert!(vis.lit.at(mid, col_at_x(&d, 0.5)));
    }

    #[test]
    fn step_lit_from_unoccluded_side() {
        let d = step_scene(128, 1.0 / 32.0, 1.0);
        let vis = trace_exact(&d, light(180.0, 45.0), 5000).unwrap();
        // Light from −x: the raised half cannot shadow anything above itself
        // and the ground slopes away from the step.
        let mid = d.height() / 2;
        for j in 0..d.width() {
            assert!(vis.lit.at(mid, j), "column {j} unexpectedly shadowed");
        }
    }

    #[test]
    fn shadow_length_matches_analytic_within_one_pixel() {
        for &(el, h) in &[(45.0, 1.0), (30.0, 0.5), (60.0, 2.0)] {
            let d = step_scene(256, 1.0 / 64.0, h);
            let vis = trace_exact(&d, light(0.0, el), 10000).unwrap();
            let mid = d.height() / 2;
            // Leftmost shadowed column on the ground half.
            let first_shadowed = (0..d.width())
                .find(|&j| !vis.lit.at(mid, j))
                .expect("some shadow expected");
            let half = (d.width() - 1) as f64 / 2.0;
            let x_boundary = (first_shadowed as f64 - half) * d.pixel_spacing;
            // The occluder silhouette sits at the first column with x ≥ 0,
            // which is half a pixel right of 0 at even resolutions.
            let edge = (half.ceil() - half) * d.pixel_spacing;
            let expected = edge - h / el.to_radians().tan();
            // A pixel exactly on the analytic line is tangent to the corner
            // and correctly lit, so allow one pixel plus roundoff.
            assert!(
                (x_boundary - expected).abs() <= d.pixel_spacing * (1.0 + 1e-9),
                "elevation {el}, h {h}: boundary {x_boundary} vs analytic {expected}"
            );
        }
    }

    #[test]
    fn refining_steps_never_flips_shadowed_to_lit() {
        for res in [64usize, 128] {
            let spacing = 4.0 / (res as f64 - 1.0);
            let d = step_scene(res, spacing, 1.0);
            let coarse = trace_exact(&d, light(10.0, 40.0), 2000).unwrap();
            let fine = trace_exact(&d, light(10.0, 40.0), 20000).unwrap();
            for (i, j, &lit_fine) in fine.lit.iter() {
                if !coarse.lit.at(i, j) {
                    assert!(!lit_fine, "({i},{j}) flipped shadowed→lit under refinement");
                }
            }
        }
    }

    #[test]
    fn compare_mask_against_itself_is_one() {
        let d = step_scene(96, 1.0 / 24.0, 1.0);
        let vis = trace_exact(&d, light(0.0, 45.0), 3000).unwrap();
        // Binarize the oracle into a mask and compare.
        let values = crate::grid::Grid::from_fn(d.width(), d.height(), |i, j| {
            if vis.lit.at(i, j) {
                1.0
            } else {
                0.0
            }
        });
        let mask = ShadowMask { values };
        assert_eq!(compare_mask(&mask, &vis, 0.5, 2).unwrap(), 1.0);
        assert_eq!(compare_mask(&mask, &vis, 0.5, 0).unwrap(), 1.0);
    }

    #[test]
    fn soft_mask_agrees_with_oracle_on_step_scene() {
        let d = step_scene(128, 1.0 / 32.0, 1.0);
        let omega = light(0.0, 45.0);
        let vis = trace_exact(&d, omega, 5000).unwrap();
        let mask = estimate_shadow_mask(&d, omega, &ShadowConfig::default());
        let agreement = compare_mask(&mask, &vis, 0.5, 2).unwrap();
        assert!(agreement >= 0.95, "agreement {agreement}");
    }

    #[test]
    fn rejects_too_few_steps() {
        let d = step_scene(32, 0.125, 1.0);
        assert!(trace_exact(&d, light(0.0, 45.0), 999).is_err());
    }
}
