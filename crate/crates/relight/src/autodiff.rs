//! Reverse-mode differentiation of the render pipeline.
//!
//! `record_and_render` runs the exact same forward code as the plain
//! pipeline (so outputs are bit-identical) while keeping the intermediate
//! state the reverse pass needs: the point grid, normals, shadow mask and the
//! per-pixel argmin sample records. `backward` then pushes a per-pixel loss
//! seed through every recorded operation by hand-written adjoints.
//!
//! Differentiation policy:
//! - gradient of the min distance routes through the argmin sample only
//!   (first index on ties);
//! - the Lambert clamp takes subgradient 0 at the kink;
//! - the 2D sample positions along shadow rays are constants with respect to
//!   depth (gradients flow through the sampled depth values and the ray
//!   origin) but differentiated with respect to ω, whose projection sets the
//!   walk direction and exit distance;
//! - the reported light-direction gradient is projected onto the tangent
//!   space of the unit sphere.

use crate::geometry::{
    compute_normals, depth_to_points, stencils, tangent_x, tangent_y, DepthMap, NormalMap,
    PointGrid, Stencil,
};
use crate::grid::Grid;
use crate::losses;
use crate::shading::{render, shadowed_shading, ImagePlane, LightingParams};
use crate::shadow::{
    bilinear_depth, estimate_shadow_mask_with_records, plan_walk, visibility_derivative, Bbox,
    SampleRecord, ShadowConfig, ShadowMask,
};
use crate::vec3::Vec3;
use crate::{RelightError, Result};

/// Recorded forward pass: inputs plus every intermediate the adjoints need.
#[derive(Debug, Clone)]
pub struct Tape {
    depth: DepthMap,
    albedo: ImagePlane,
    lighting: LightingParams,
    cfg: ShadowConfig,
    points: PointGrid,
    normals: NormalMap,
    mask: ShadowMask,
    records: Vec<SampleRecord>,
    shading: ImagePlane,
    image: ImagePlane,
}

#[derive(Debug, Clone)]
pub struct GradientSet {
    pub depth: Grid<f64>,
    pub albedo: ImagePlane,
    /// Projected onto the tangent space of the unit sphere at ω.
    pub omega: Vec3,
    pub ambient: f64,
    pub directional: f64,
}

/// Plain forward render without keeping a tape.
pub fn forward_render(
    depth: &DepthMap,
    albedo: &ImagePlane,
    lighting: &LightingParams,
    cfg: &ShadowConfig,
) -> Result<ImagePlane> {
    record_and_render(depth, albedo, lighting, cfg).map(|(img, _)| img)
}

pub fn record_and_render(
    depth: &DepthMap,
    albedo: &ImagePlane,
    lighting: &LightingParams,
    cfg: &ShadowConfig,
) -> Result<(ImagePlane, Tape)> {
    cfg.validate()?;
    if albedo.width() != depth.width() || albedo.height() != depth.height() {
        return Err(RelightError::DimensionMismatch(format!(
            "albedo {}x{} vs depth {}x{}",
            albedo.width(),
            albedo.height(),
            depth.width(),
            depth.height()
        )));
    }
    let points = depth_to_points(depth);
    let normals = compute_normals(&points, &depth.valid);
    let (mask, records) = estimate_shadow_mask_with_records(depth, lighting.omega, cfg);
    let shading = shadowed_shading(&normals, lighting, &mask);
    let image = render(albedo, &shading)?;
    let tape = Tape {
        depth: depth.clone(),
        albedo: albedo.clone(),
        lighting: *lighting,
        cfg: *cfg,
        points,
        normals,
        mask,
        records,
        shading,
        image: image.clone(),
    };
    Ok((image, tape))
}

impl Tape {
    pub fn image(&self) -> &ImagePlane {
        &self.image
    }

    pub fn mask(&self) -> &ShadowMask {
        &self.mask
    }

    pub fn normals(&self) -> &NormalMap {
        &self.normals
    }

    /// Re-run the forward pass from the recorded inputs. Deterministic, so
    /// the result reproduces the recorded output exactly.
    pub fn replay(&self) -> ImagePlane {
        forward_render(&self.depth, &self.albedo, &self.lighting, &self.cfg)
            .expect("tape inputs were validated at record time")
    }

    /// Number of valid pixels whose recorded minimum marks them as occluded
    /// (mask value below 0.5).
    pub fn occluding_records(&self) -> usize {
        let w = self.depth.width();
        self.records
            .iter()
            .enumerate()
            .filter(|(k, rec)| {
                matches!(rec, SampleRecord::Min { .. } | SampleRecord::Crossing { .. })
                    && self.mask.values.at(k / w, k % w) < 0.5
            })
            .count()
    }

    /// Compact per-pixel branch signature: record kind, argmin index, Lambert
    /// clamp sign, degeneracy and stencil choice. Two evaluations took the
    /// same differentiation branches iff their signatures are equal.
    pub fn branch_signature(&self) -> Vec<u64> {
        let w = self.depth.width();
        let h = self.depth.height();
        let omega = self.lighting.omega.as_vec();
        let bbox = self.depth.valid_bbox();
        let mut out = Vec::with_capacity(w * h);
        for i in 0..h {
            for j in 0..w {
                let mut sig: u64 = 0;
                if self.depth.valid.at(i, j) {
                    sig |= 1;
                    let (sx, sy) = stencils(&self.depth.valid, i, j);
                    sig |= (sx as u64) << 1;
                    sig |= (sy as u64) << 3;
                    if self.normals.degenerate.at(i, j) {
                        sig |= 1 << 5;
                    }
                    if self.normals.normals.at(i, j).dot(omega) > 0.0 {
                        sig |= 1 << 6;
                    }
                    match self.records[i * w + j] {
                        SampleRecord::Invalid => {}
                        SampleRecord::NoSamples => sig |= 1 << 7,
                        SampleRecord::Min { index, .. } => {
                            sig |= 1 << 8;
                            if let Some(walk) =
                                bbox.and_then(|b| plan_walk(&self.depth, b, i, j, omega, &self.cfg))
                            {
                                sig |= (walk.exit_axis as u64) << 9;
                            }
                            sig |= (index as u64) << 10;
                        }
                        SampleRecord::Crossing { index, .. } => {
                            sig |= 3 << 7;
                            sig |= (index as u64) << 10;
                        }
                    }
                }
                out.push(sig);
            }
        }
        out
    }
}

/// Reverse pass: exact adjoints of the recorded computation.
pub fn backward(tape: &Tape, seed: &ImagePlane) -> Result<GradientSet> {
    if !seed.same_shape(&tape.image) {
        return Err(RelightError::DimensionMismatch(
            "seed shape does not match rendered image".into(),
        ));
    }
    let w = tape.depth.width();
    let h = tape.depth.height();
    let channels = tape.albedo.channels();
    let omega = tape.lighting.omega.as_vec();
    let id = tape.lighting.directional;

    let bbox = tape.depth.valid_bbox();
    let mut g_depth = Grid::new(w, h, 0.0f64);
    let mut g_albedo = ImagePlane::new(w, h, channels);
    let mut g_omega = Vec3::ZERO;
    let mut g_ia = 0.0;
    let mut g_id = 0.0;

    // Fixed row-major order keeps accumulation deterministic.
    for i in 0..h {
        for j in 0..w {
            if !tape.depth.valid.at(i, j) {
                continue;
            }
            let s_val = tape.shading.get(i, j, 0);
            let m = tape.mask.values.at(i, j);
            let n = tape.normals.normals.at(i, j);
            let dot = n.dot(omega);
            let lambert = dot.max(0.0);

            // render: I_c = A_c · s'
            let mut g_s = 0.0;
            for c in 0..channels {
                let sd = seed.get(i, j, c);
                g_albedo.set(i, j, c, sd * s_val);
                g_s += sd * tape.albedo.get(i, j, c);
            }
            if g_s == 0.0 {
                continue;
            }

            // shadowed shading: s' = i_a + M·i_d·max(0, ⟨n, ω⟩)
            g_ia += g_s;
            g_id += g_s * m * lambert;
            let g_mask = g_s * id * lambert;

            if dot > 0.0 && !tape.normals.degenerate.at(i, j) {
                let g_dot = g_s * m * id;
                let g_n = omega * g_dot;
                g_omega = g_omega + n * g_dot;
                normal_adjoint(tape, i, j, g_n, &mut g_depth);
            }

            // shadow mask: M = vis(d_min); chain through the argmin sample.
            if g_mask != 0.0 {
                if let SampleRecord::Min { d_min, pos, .. } = tape.records[i * w + j] {
                    if d_min > 0.0 && d_min.is_finite() {
                        let g_dmin = g_mask * visibility_derivative(d_min, &tape.cfg);
                        min_distance_adjoint(
                            tape,
                            bbox.expect("valid pixel implies nonempty bbox"),
                            i,
                            j,
                            d_min,
                            pos,
                            g_dmin,
                            &mut g_depth,
                            &mut g_omega,
                        );
                    }
                    // d_min == 0: the visibility curve is even in d, so the
                    // derivative vanishes; nothing to propagate.
                }
            }
        }
    }

    // Report the ω gradient in the tangent space of the unit sphere.
    g_omega = g_omega - omega * g_omega.dot(omega);

    for &g in g_depth.data() {
        if !g.is_finite() {
            return Err(RelightError::NonFiniteGradient("depth"));
        }
    }
    if !g_omega.is_finite() {
        return Err(RelightError::NonFiniteGradient("omega"));
    }
    if !g_ia.is_finite() || !g_id.is_finite() {
        return Err(RelightError::NonFiniteGradient("intensity"));
    }

    Ok(GradientSet { depth: g_depth, albedo: g_albedo, omega: g_omega, ambient: g_ia, directional: g_id })
}

/// Adjoint of n = normalize(±(t_x × t_y)) back to the depth stencil.
fn normal_adjoint(tape: &Tape, i: usize, j: usize, g_n: Vec3, g_depth: &mut Grid<f64>) {
    let (sx, sy) = stencils(&tape.depth.valid, i, j);
    if sx == Stencil::None || sy == Stencil::None {
        return;
    }
    let tx = tangent_x(&tape.points.points, i, j, sx);
    let ty = tangent_y(&tape.points.points, i, j, sy);
    let mut c = tx.cross(ty);
    let flip = if c.z < 0.0 { -1.0 } else { 1.0 };
    c = c * flip;
    let norm = c.norm();
    if norm <= 0.0 {
        return;
    }
    let n = c * (1.0 / norm);
    // normalize adjoint: g_c = (g_n − n⟨g_n, n⟩)/‖c‖, then undo the sign flip.
    let g_c = (g_n - n * g_n.dot(n)) * (1.0 / norm) * flip;
    // cross product adjoints: for c = a × b, g_a = b × g_c, g_b = g_c × a.
    let g_tx = ty.cross(g_c);
    let g_ty = g_c.cross(tx);

    // Tangent z components are signed differences of depth values.
    match sx {
        Stencil::Central => {
            // t_x.z = −d(i, j+1) + d(i, j−1)
            *g_depth.get_mut(i, j + 1) -= g_tx.z;
            *g_depth.get_mut(i, j - 1) += g_tx.z;
        }
        Stencil::Forward => {
            *g_depth.get_mut(i, j + 1) -= g_tx.z;
            *g_depth.get_mut(i, j) += g_tx.z;
        }
        Stencil::Backward => {
            *g_depth.get_mut(i, j) -= g_tx.z;
            *g_depth.get_mut(i, j - 1) += g_tx.z;
        }
        Stencil::None => unreachable!(),
    }
    match sy {
        Stencil::Central => {
            // t_y.z = −d(i−1, j) + d(i+1, j)
            *g_depth.get_mut(i - 1, j) -= g_ty.z;
            *g_depth.get_mut(i + 1, j) += g_ty.z;
        }
        Stencil::Forward => {
            *g_depth.get_mut(i - 1, j) -= g_ty.z;
            *g_depth.get_mut(i, j) += g_ty.z;
        }
        Stencil::Backward => {
            *g_depth.get_mut(i, j) -= g_ty.z;
            *g_depth.get_mut(i + 1, j) += g_ty.z;
        }
        Stencil::None => unreachable!(),
    }
}

/// Adjoint of d_min = ‖(x_s − x_i) × ω‖ for the argmin sample at `pos`.
///
/// Routes gradients into the depth values (bilinear corners and the ray
/// origin's z) and into ω, both through the cross product directly and
/// through the sample position, which ω's 2D projection places along the
/// walk: pos = origin + t_k·dir(ω), t_k = t0 + α·(t_exit(ω) − t0).
#[allow(clippy::too_many_arguments)]
fn min_distance_adjoint(
    tape: &Tape,
    bbox: Bbox,
    i: usize,
    j: usize,
    d_min: f64,
    pos: (f64, f64),
    g_dmin: f64,
    g_depth: &mut Grid<f64>,
    g_omega: &mut Vec3,
) {
    let s = tape.depth.pixel_spacing;
    let h = tape.depth.height();
    let u = pos.0 / s;
    let v = (h - 1) as f64 - pos.1 / s;
    let Some((interp, corners)) = bilinear_depth(&tape.depth, v, u) else {
        return;
    };
    let x_s = Vec3::new(pos.0, pos.1, -interp);
    let x_i = tape.points.points.at(i, j);
    let omega = tape.lighting.omega.as_vec();
    let vdiff = x_s - x_i;
    let c = vdiff.cross(omega);
    // ‖c‖ equals the recorded d_min up to replay roundoff.
    let g_c = c * (g_dmin / d_min);
    let g_v = omega.cross(g_c);
    *g_omega = *g_omega + g_c.cross(vdiff);
    // x_i.z = −depth(i, j); x_s.z = −interp.
    *g_depth.get_mut(i, j) += g_v.z;
    for (ci, cj, wgt) in corners {
        *g_depth.get_mut(ci, cj) += -g_v.z * wgt;
    }

    // ω moves the sample position itself. Recover the walk geometry and push
    // the in-plane components of g_v (plus the surface-slope coupling of the
    // z component) back to ω through dir and t_exit.
    let Some(walk) = plan_walk(&tape.depth, bbox, i, j, omega, &tape.cfg) else {
        return;
    };
    let t_k = (pos.0 - walk.origin.0) * walk.dir.0 + (pos.1 - walk.origin.1) * walk.dir.1;
    // A clamped (off-ray) sample position does not follow the walk geometry;
    // treat it as constant, matching the clamp's zero subgradient.
    let rx = walk.origin.0 + t_k * walk.dir.0 - pos.0;
    let ry = walk.origin.1 + t_k * walk.dir.1 - pos.1;
    if rx * rx + ry * ry > 1e-18 * (1.0 + t_k * t_k) {
        return;
    }

    // In-cell surface slope, ∂D/∂(pos_x, pos_y).
    let (i0, j0, _) = (corners[0].0, corners[0].1, ());
    let fu = u - j0 as f64;
    let fv = v - i0 as f64;
    let dval = |ci: usize, cj: usize| tape.depth.values.at(ci, cj);
    let d_du = (1.0 - fv) * (dval(i0, j0 + 1) - dval(i0, j0))
        + fv * (dval(i0 + 1, j0 + 1) - dval(i0 + 1, j0));
    let d_dv = (1.0 - fu) * (dval(i0 + 1, j0) - dval(i0, j0))
        + fu * (dval(i0 + 1, j0 + 1) - dval(i0, j0 + 1));
    let slope_x = d_du / s;
    let slope_y = -d_dv / s;

    // x_s = (pos_x, pos_y, −D(pos)).
    let g_pos = (g_v.x - g_v.z * slope_x, g_v.y - g_v.z * slope_y);

    // pos = origin + t_k·dir; t_k = t0 + α·(t_exit − t0).
    let alpha = if walk.t_exit > walk.t0 { (t_k - walk.t0) / (walk.t_exit - walk.t0) } else { 0.0 };
    let g_tk = g_pos.0 * walk.dir.0 + g_pos.1 * walk.dir.1;
    let mut g_dir = (t_k * g_pos.0, t_k * g_pos.1);
    let g_texit = alpha * g_tk;
    // t_exit = (border − origin_axis)/dir_axis on the active axis.
    if walk.exit_axis == 0 {
        g_dir.0 += g_texit * (-walk.t_exit / walk.dir.0);
    } else {
        g_dir.1 += g_texit * (-walk.t_exit / walk.dir.1);
    }

    // dir = p/‖p‖ with p = (ω_x, ω_y).
    let planar = (omega.x * omega.x + omega.y * omega.y).sqrt();
    let dot = g_dir.0 * walk.dir.0 + g_dir.1 * walk.dir.1;
    g_omega.x += (g_dir.0 - walk.dir.0 * dot) / planar;
    g_omega.y += (g_dir.1 - walk.dir.1 * dot) / planar;
}

// ---------------------------------------------------------------------------
// Finite-difference check
// ---------------------------------------------------------------------------

/// A self-contained differentiation test problem: the loss is the masked MSE
/// between the rendered image and `target`.
#[derive(Debug, Clone)]
pub struct FdScene {
    pub depth: DepthMap,
    pub albedo: ImagePlane,
    pub lighting: LightingParams,
    pub cfg: ShadowConfig,
    pub target: ImagePlane,
}

#[derive(Debug, Clone)]
pub enum FdParam {
    /// A set of depth pixels to perturb individually.
    DepthPixels(Vec<(usize, usize)>),
    Ambient,
    Directional,
    /// Both tangent directions of the unit sphere at ω.
    OmegaTangents,
}

#[derive(Debug, Clone)]
pub struct FdEntry {
    pub label: String,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_err: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct FdReport {
    pub entries: Vec<FdEntry>,
    /// Coordinates skipped because a perturbation changed a branch (argmin
    /// routing, clamp sign, stencil or degeneracy).
    pub excluded: Vec<String>,
    pub max_rel_err: f64,
    pub all_passed: bool,
}

fn scene_loss(scene: &FdScene, depth: &DepthMap, lighting: &LightingParams) -> Result<(f64, Tape)> {
    let (image, tape) = record_and_render(depth, &scene.albedo, lighting, &scene.cfg)?;
    let loss = losses::recon_loss(&image, &scene.target, &depth.valid)?;
    Ok((loss, tape))
}

/// Relative error with an absolute floor. Gradients of this loss are of
/// order 1e-6 and up; below the floor the central-difference truncation
/// error dominates and a pure ratio would report noise, not a defect.
fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

/// Compare the analytic gradient against central finite differences
/// (f(x+h) − f(x−h)) / 2h for the selected parameters, excluding any
/// coordinate whose perturbation is not branch-stable.
pub fn finite_difference_check(
    scene: &FdScene,
    params: &[FdParam],
    h: f64,
    tol: f64,
) -> Result<FdReport> {
    let (_, base_tape) = scene_loss(scene, &scene.depth, &scene.lighting)?;
    let base_sig = base_tape.branch_signature();
    let seed = losses::recon_loss_grad(&base_tape.image, &scene.target, &scene.depth.valid)?;
    let grads = backward(&base_tape, &seed)?;

    let mut entries = Vec::new();
    let mut excluded = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn probe(
        entries: &mut Vec<FdEntry>,
        excluded: &mut Vec<String>,
        base_sig: &[u64],
        h: f64,
        tol: f64,
        label: String,
        analytic: f64,
        eval: &dyn Fn(f64) -> Result<(f64, Tape)>,
    ) -> Result<()> {
        let (lp, tp) = eval(h)?;
        let (lm, tm) = eval(-h)?;
        if tp.branch_signature() != base_sig || tm.branch_signature() != base_sig {
            excluded.push(label);
            return Ok(());
        }
        let numeric = (lp - lm) / (2.0 * h);
        let err = rel_err(analytic, numeric);
        entries.push(FdEntry { label, analytic, numeric, rel_err: err, passed: err < tol });
        Ok(())
    }

    for param in params {
        match param {
            FdParam::DepthPixels(pixels) => {
                for &(pi, pj) in pixels {
                    if !scene.depth.valid.at(pi, pj) {
                        excluded.push(format!("depth({pi},{pj}): invalid pixel"));
                        continue;
                    }
                    let analytic = grads.depth.at(pi, pj);
                    probe(
                        &mut entries,
                        &mut excluded,
                        &base_sig,
                        h,
                        tol,
                        format!("depth({pi},{pj})"),
                        analytic,
                        &|delta: f64| {
                            let mut d = scene.depth.clone();
                            *d.values.get_mut(pi, pj) += delta;
                            scene_loss(scene, &d, &scene.lighting)
                        },
                    )?;
                }
            }
            FdParam::Ambient => {
                probe(&mut entries, &mut excluded, &base_sig, h, tol, "ambient".into(), grads.ambient, &|delta: f64| {
                    let l = LightingParams::unchecked(
                        scene.lighting.omega,
                        scene.lighting.ambient + delta,
                        scene.lighting.directional,
                    );
                    scene_loss(scene, &scene.depth, &l)
                })?;
            }
            FdParam::Directional => {
                probe(&mut entries, &mut excluded, &base_sig, h, tol, "directional".into(), grads.directional, &|delta: f64| {
                    let l = LightingParams::unchecked(
                        scene.lighting.omega,
                        scene.lighting.ambient,
                        scene.lighting.directional + delta,
                    );
                    scene_loss(scene, &scene.depth, &l)
                })?;
            }
            FdParam::OmegaTangents => {
                let omega = scene.lighting.omega.as_vec();
                let helper = if omega.z.abs() < 0.9 {
                    Vec3::new(0.0, 0.0, 1.0)
                } else {
                    Vec3::new(1.0, 0.0, 0.0)
                };
                let t1 = omega.cross(helper).normalized().expect("tangent basis");
                let t2 = omega.cross(t1);
                for (k, t) in [t1, t2].into_iter().enumerate() {
                    let analytic = grads.omega.dot(t);
                    probe(&mut entries, &mut excluded, &base_sig, h, tol, format!("omega_t{}", k + 1), analytic, &|delta: f64| {
                        let v = (omega + t * delta).normalized().expect("perturbed omega");
                        let l = LightingParams::unchecked(
                            crate::shadow::LightDirection::new(v)?,
                            scene.lighting.ambient,
                            scene.lighting.directional,
                        );
                        scene_loss(scene, &scene.depth, &l)
                    })?;
                }
            }
        }
    }

    let max_rel_err = entries.iter().map(|e| e.rel_err).fold(0.0, f64::max);
    let all_passed = entries.iter().all(|e| e.passed);
    Ok(FdReport { entries, excluded, max_rel_err, all_passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{SceneKind, SceneSpec};
    use crate::shadow::LightDirection;

    fn bump_scene() -> (DepthMap, ImagePlane, LightingParams, ShadowConfig) {
        let spec = SceneSpec {
            kind: SceneKind::GaussianBump { sigma: 0.3, amplitude: 0.35, base: 1.0 },
            resolution: 48,
            pixel_spacing: 1.0 / 32.0,
        };
        let depth = spec.build().unwrap();
        let albedo = ImagePlane::constant(48, 48, 3, 0.65);
        let lighting = LightingParams::new(
            LightDirection::from_azimuth_elevation(20.0, 50.0).unwrap(),
            0.5,
            0.5,
        )
        .unwrap();
        (depth, albedo, lighting, ShadowConfig::default())
    }

    #[test]
    fn forward_matches_plain_pipeline_bit_for_bit() {
        let (depth, albedo, lighting, cfg) = bump_scene();
        let (img, tape) = record_and_render(&depth, &albedo, &lighting, &cfg).unwrap();
        let plain = forward_render(&depth, &albedo, &lighting, &cfg).unwrap();
        assert_eq!(img.data(), plain.data());
        assert_eq!(tape.replay().data(), img.data());
    }

    #[test]
    fn flat_plane_tape_has_no_occluding_records() {
        let spec = SceneSpec { kind: SceneKind::Flat, resolution: 32, pixel_spacing: 1.0 / 32.0 };
        let depth = spec.build().unwrap();
        let albedo = ImagePlane::constant(32, 32, 3, 0.65);
        let lighting = LightingParams::new(
            LightDirection::from_azimuth_elevation(0.0, 45.0).unwrap(),
            0.5,
            0.5,
        )
        .unwrap();
        let (_, tape) = record_and_render(&depth, &albedo, &lighting, &ShadowConfig::default()).unwrap();
        assert_eq!(tape.occluding_records(), 0);
    }

    #[test]
    fn zero_seed_gives_zero_gradients() {
        let (depth, albedo, lighting, cfg) = bump_scene();
        let (img, tape) = record_and_render(&depth, &albedo, &lighting, &cfg).unwrap();
        let seed = ImagePlane::new(img.width(), img.height(), img.channels());
        let g = backward(&tape, &seed).unwrap();
        assert!(g.depth.data().iter().all(|&v| v == 0.0));
        assert!(g.albedo.data().iter().all(|&v| v == 0.0));
        assert_eq!(g.omega, Vec3::ZERO);
        assert_eq!(g.ambient, 0.0);
        assert_eq!(g.directional, 0.0);
    }

    #[test]
    fn sum_loss_ambient_gradient_is_albedo_sum() {
        // loss = Σ I over a flat lit plane → dL/di_a = Σ A.
        let spec = SceneSpec { kind: SceneKind::Flat, resolution: 16, pixel_spacing: 1.0 / 16.0 };
        let depth = spec.build().unwrap();
        let albedo = ImagePlane::constant(16, 16, 3, 0.4);
        let lighting = LightingParams::new(
            LightDirection::from_azimuth_elevation(0.0, 60.0).unwrap(),
            0.5,
            0.5,
        )
        .unwrap();
        let (img, tape) =
            record_and_render(&depth, &albedo, &lighting, &ShadowConfig::default()).unwrap();
        let seed = ImagePlane::constant(img.width(), img.height(), img.channels(), 1.0);
        let g = backward(&tape, &seed).unwrap();
        let albedo_sum: f64 = albedo.data().iter().sum();
        assert!((g.ambient - albedo_sum).abs() < 1e-9 * albedo_sum);
    }

    #[test]
    fn omega_gradient_is_tangent() {
        let (depth, albedo, lighting, cfg) = bump_scene();
        let (img, tape) = record_and_render(&depth, &albedo, &lighting, &cfg).unwrap();
        let seed = ImagePlane::constant(img.width(), img.height(), img.channels(), 0.3);
        let g = backward(&tape, &seed).unwrap();
        assert!(g.omega.dot(lighting.omega.as_vec()).abs() < 1e-10);
    }

    #[test]
    fn dependency_cone_is_local() {
        // Seeding a single pixel yields depth gradients only on that pixel's
        // normal stencil and its shadow-ray sample footprint.
        let (depth, albedo, lighting, cfg) = bump_scene();
        let (img, tape) = record_and_render(&depth, &albedo, &lighting, &cfg).unwrap();
        let mut seed = ImagePlane::new(img.width(), img.height(), img.channels());
        let (pi, pj) = (30, 14);
        for c in 0..img.channels() {
            seed.set(pi, pj, c, 1.0);
        }
        let g = backward(&tape, &seed).unwrap();
        // Albedo gradient exactly on the seeded pixel.
        for ((i, j), c) in (0..img.height())
            .flat_map(|i| (0..img.width()).map(move |j| (i, j)))
            .flat_map(|p| (0..img.channels()).map(move |c| (p, c)))
        {
            if (i, j) != (pi, pj) {
                assert_eq!(g.albedo.get(i, j, c), 0.0);
            }
        }
        // Depth gradient support: stencil neighbors or on the pixel's ray
        // (which leaves (pi, pj) in direction of ω's 2D projection).
        let omega = lighting.omega.as_vec();
        let dir = (omega.x, omega.y);
        for (i, j, &gd) in g.depth.iter() {
            if gd == 0.0 {
                continue;
            }
            let near = i.abs_diff(pi) <= 1 && j.abs_diff(pj) <= 1;
            if near {
                continue;
            }
            // Must lie near the projected ray path.
            let dx = j as f64 - pj as f64;
            let dy = pi as f64 - i as f64; // +y is up
            let along = dx * dir.0 + dy * dir.1;
            let across = (dx * dir.1 - dy * dir.0).abs() / (dir.0 * dir.0 + dir.1 * dir.1).sqrt();
            assert!(
                along > 0.0 && across <= 1.5,
                "unexpected depth gradient at ({i}, {j})"
            );
        }
    }

    #[test]
    fn finite_difference_depth_and_lighting() {
        let (depth, albedo, lighting, cfg) = bump_scene();
        // Target from slightly different lighting so residuals are nonzero.
        let target_light = LightingParams::new(
            LightDirection::from_azimuth_elevation(35.0, 55.0).unwrap(),
            0.45,
            0.55,
        )
        .unwrap();
        let target = forward_render(&depth, &albedo, &target_light, &cfg).unwrap();
        let scene = FdScene { depth, albedo, lighting, cfg, target };
        let pixels: Vec<(usize, usize)> =
            (0..20).map(|k| (5 + (k * 7) % 40, 4 + (k * 11) % 40)).collect();
        let report = finite_difference_check(
            &scene,
            &[
                FdParam::DepthPixels(pixels),
                FdParam::Ambient,
                FdParam::Directional,
                FdParam::OmegaTangents,
            ],
            1e-4,
            1e-3,
        )
        .unwrap();
        assert!(!report.entries.is_empty());
        assert!(
            report.all_passed,
            "max rel err {} (entries: {:?})",
            report.max_rel_err,
            report.entries.iter().filter(|e| !e.passed).collect::<Vec<_>>()
        );
    }
}
