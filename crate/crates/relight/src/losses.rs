//! Supervision losses and their weighted total.
//!
//! Conventions the underlying formulas leave open, fixed here: masked means
//! are normalized by the mask sum, multi-channel residuals are averaged over
//! channels, grayscale conversion uses ITU-R luma weights, and SSIM uses the
//! standard 11×11 Gaussian window with σ = 1.5 and K1/K2 = 0.01/0.03.

use crate::grid::Grid;
use crate::shading::ImagePlane;
use crate::vec3::Vec3;
use crate::{RelightError, Result};

pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Weights of the total loss. The adversarial slot of the published weighting
/// is intentionally absent (no discriminator in this artifact).
#[derive(Debug, Clone, Copy)]
pub struct LossWeights {
    pub depth: f64,
    pub albedo: f64,
    pub ambient: f64,
    pub light: f64,
    pub recon: f64,
    pub dssim: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { depth: 1.0, albedo: 5.0, ambient: 2.5, light: 1.0, recon: 20.0, dssim: 8.0 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SsimParams {
    pub window_radius: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        SsimParams { window_radius: 5, sigma: 1.5, k1: 0.01, k2: 0.03, dynamic_range: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LossComponents {
    pub depth: f64,
    pub albedo: f64,
    pub ambient: f64,
    pub light: f64,
    pub recon: f64,
    pub dssim: f64,
}

fn mask_sum(mask: &Grid<bool>) -> f64 {
    mask.data().iter().filter(|&&b| b).count() as f64
}

/// Masked mean absolute difference: Σ M·|a−b| / Σ M.
pub fn depth_loss(dp: &Grid<f64>, dt: &Grid<f64>, mask: &Grid<bool>) -> Result<f64> {
    if !dp.same_shape(dt) || !dp.same_shape(mask) {
        return Err(RelightError::DimensionMismatch("depth loss inputs".into()));
    }
    let denom = mask_sum(mask);
    if denom == 0.0 {
        return Err(RelightError::EmptyMask);
    }
    let mut acc = 0.0;
    for (i, j, &v) in dp.iter() {
        if mask.at(i, j) {
            acc += (v - dt.at(i, j)).abs();
        }
    }
    Ok(acc / denom)
}

/// Subgradient of `depth_loss` with respect to `dp` (sign convention 0 at
/// zero residual).
pub fn depth_loss_grad(dp: &Grid<f64>, dt: &Grid<f64>, mask: &Grid<bool>) -> Result<Grid<f64>> {
    if !dp.same_shape(dt) || !dp.same_shape(mask) {
        return Err(RelightError::DimensionMismatch("depth loss inputs".into()));
    }
    let denom = mask_sum(mask);
    if denom == 0.0 {
        return Err(RelightError::EmptyMask);
    }
    let mut g = Grid::new(dp.width(), dp.height(), 0.0);
    for (i, j, &v) in dp.iter() {
        if mask.at(i, j) {
            *g.get_mut(i, j) = (v - dt.at(i, j)).signum_or_zero() / denom;
        }
    }
    Ok(g)
}

trait SignumOrZero {
    fn signum_or_zero(self) -> f64;
}

impl SignumOrZero for f64 {
    fn signum_or_zero(self) -> f64 {
        if self > 0.0 {
            1.0
        } else if self < 0.0 {
            -1.0
        } else {
            0.0
        }
    }
}

pub fn luma(r: f64, g: f64, b: f64) -> f64 {
    LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b
}

/// Grayscale masked L1: both RGB images are converted to luma first.
pub fn albedo_loss(ap: &ImagePlane, at: &ImagePlane, mask: &Grid<bool>) -> Result<f64> {
    if !ap.same_shape(at) || ap.width() != mask.width() || ap.height() != mask.height() {
        return Err(RelightError::DimensionMismatch("albedo loss inputs".into()));
    }
    if ap.channels() != 3 {
        return Err(RelightError::DimensionMismatch("albedo loss expects RGB".into()));
    }
    let denom = mask_sum(mask);
    if denom == 0.0 {
        return Err(RelightError::EmptyMask);
    }
    let mut acc = 0.0;
    for i in 0..ap.height() {
        for j in 0..ap.width() {
            if mask.at(i, j) {
                let gp = luma(ap.get(i, j, 0), ap.get(i, j, 1), ap.get(i, j, 2));
                let gt = luma(at.get(i, j, 0), at.get(i, j, 1), at.get(i, j, 2));
                acc += (gp - gt).abs();
            }
        }
    }
    Ok(acc / denom)
}

pub fn ambient_loss(ia_pred: f64, ia_true: f64) -> f64 {
    (ia_pred - ia_true).abs()
}

/// 1 − ⟨ωp, ωt⟩. Rejects inputs that are not unit length within 1e-4.
pub fn light_loss(omega_pred: Vec3, omega_true: Vec3) -> Result<f64> {
    for v in [omega_pred, omega_true] {
        if (v.norm() - 1.0).abs() > 1e-4 {
            return Err(RelightError::NonUnitDirection(v.norm()));
        }
    }
    Ok(1.0 - omega_pred.dot(omega_true))
}

/// Masked mean squared difference, channel-averaged.
pub fn recon_loss(ip: &ImagePlane, it: &ImagePlane, mask: &Grid<bool>) -> Result<f64> {
    if !ip.same_shape(it) || ip.width() != mask.width() || ip.height() != mask.height() {
        return Err(RelightError::DimensionMismatch("recon loss inputs".into()));
    }
    let denom = mask_sum(mask) * ip.channels() as f64;
    if denom == 0.0 {
        return Err(RelightError::EmptyMask);
    }
    let mut acc = 0.0;
    for i in 0..ip.height() {
        for j in 0..ip.width() {
            if mask.at(i, j) {
                for c in 0..ip.channels() {
                    let r = ip.get(i, j, c) - it.get(i, j, c);
                    acc += r * r;
                }
            }
        }
    }
    Ok(acc / denom)
}

/// dL/dIp for `recon_loss`.
pub fn recon_loss_grad(ip: &ImagePlane, it: &ImagePlane, mask: &Grid<bool>) -> Result<ImagePlane> {
    if !ip.same_shape(it) || ip.width() != mask.width() || ip.height() != mask.height() {
        return Err(RelightError::DimensionMismatch("recon loss inputs".into()));
    }
    let denom = mask_sum(mask) * ip.channels() as f64;
    if denom == 0.0 {
        return Err(RelightError::EmptyMask);
    }
    let mut g = ImagePlane::new(ip.width(), ip.height(), ip.channels());
    for i in 0..ip.height() {
        for j in 0..ip.width() {
            if mask.at(i, j) {
                for c in 0..ip.channels() {
                    let r = ip.get(i, j, c) - it.get(i, j, c);
                    g.set(i, j, c, 2.0 * r / denom);
                }
            }
        }
    }
    Ok(g)
}

/// Masked mean absolute difference on images, channel-averaged. Used as an
/// alternative fit objective; constant-magnitude gradients suit small fixed
/// learning rates.
pub fn l1_recon_loss(ip: &ImagePlane, it: &ImagePlane, mask: &Grid<bool>) -> Result<f64> {
    if !ip.same_shape(it) || ip.width() != mask.width() || ip.height() != mask.height() {
        return Err(RelightError::DimensionMismatch("l1 recon loss inputs".into()));
    }
    let denom = mask_sum(mask) * ip.channels() as f64;
    if denom == 0.0 {
        return Err(RelightError::EmptyMask);
    }
    let mut acc = 0.0;
    for i in 0..ip.height() {
        for j in 0..ip.width() {
            if mask.at(i, j) {
                for c in 0..ip.channels() {
                    acc += (ip.get(i, j, c) - it.get(i, j, c)).abs();
                }
            }
        }
    }
    Ok(acc / denom)
}

pub fn l1_recon_loss_grad(
    ip: &ImagePlane,
    it: &ImagePlane,
    mask: &Grid<bool>,
) -> Result<ImagePlane> {
    if !ip.same_shape(it) || ip.width() != mask.width() || ip.height() != mask.height() {
        return Err(RelightError::DimensionMismatch("l1 recon loss inputs".into()));
    }
    let denom = mask_sum(mask) * ip.channels() as f64;
    if denom == 0.0 {
        return Err(RelightError::EmptyMask);
    }
    let mut g = ImagePlane::new(ip.width(), ip.height(), ip.channels());
    for i in 0..ip.height() {
        for j in 0..ip.width() {
            if mask.at(i, j) {
                for c in 0..ip.channels() {
                    let r = ip.get(i, j, c) - it.get(i, j, c);
                    g.set(i, j, c, r.signum_or_zero() / denom);
                }
            }
        }
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// SSIM / DSSIM
// ---------------------------------------------------------------------------

fn gaussian_window(radius: usize, sigma: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..=2 * radius)
        .map(|k| {
            let d = k as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = w.iter().sum();
    for v in &mut w {
        *v /= sum;
    }
    w
}

struct SsimMaps {
    /// One entry per valid window center, row-major over the valid area.
    mu_x: Vec<f64>,
    mu_y: Vec<f64>,
    sig_x: Vec<f64>,
    sig_y: Vec<f64>,
    sig_xy: Vec<f64>,
    s: Vec<f64>,
    cw: usize,
    ch: usize,
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Separable valid-mode Gaussian filter of a single-channel plane.
fn filter_valid(plane: &[f64], w: usize, h: usize, win: &[f64]) -> Vec<f64> {
    let r = win.len() / 2;
    let cw = w - 2 * r;
    let ch = h - 2 * r;
    let mut horiz = vec![0.0; cw * h];
    for i in 0..h {
        for j in 0..cw {
            let mut acc = 0.0;
            for (k, &wk) in win.iter().enumerate() {
                acc += wk * plane[i * w + j + k];
            }
            horiz[i * cw + j] = acc;
        }
    }
    let mut out = vec![0.0; cw * ch];
    for i in 0..ch {
        for j in 0..cw {
            let mut acc = 0.0;
            for (k, &wk) in win.iter().enumerate() {
                acc += wk * horiz[(i + k) * cw + j];
            }
            out[i * cw + j] = acc;
        }
    }
    out
}

fn ssim_channel(x: &[f64], y: &[f64], w: usize, h: usize, p: &SsimParams) -> SsimMaps {
    let win = gaussian_window(p.window_radius, p.sigma);
    let r = p.window_radius;
    let cw = w - 2 * r;
    let ch = h - 2 * r;
    let sq = |v: &[f64]| -> Vec<f64> { v.iter().map(|a| a * a).collect() };
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = filter_valid(x, w, h, &win);
    let mu_y = filter_valid(y, w, h, &win);
    let ex2 = filter_valid(&sq(x), w, h, &win);
    let ey2 = filter_valid(&sq(y), w, h, &win);
    let exy = filter_valid(&xy, w, h, &win);

    let c1 = (p.k1 * p.dynamic_range).powi(2);
    let c2 = (p.k2 * p.dynamic_range).powi(2);

    let n = cw * ch;
    let mut sig_x = vec![0.0; n];
    let mut sig_y = vec![0.0; n];
    let mut sig_xy = vec![0.0; n];
    let mut s = vec![0.0; n];
    for k in 0..n {
        sig_x[k] = ex2[k] - mu_x[k] * mu_x[k];
        sig_y[k] = ey2[k] - mu_y[k] * mu_y[k];
        sig_xy[k] = exy[k] - mu_x[k] * mu_y[k];
        let a1 = 2.0 * mu_x[k] * mu_y[k] + c1;
        let a2 = 2.0 * sig_xy[k] + c2;
        let b1 = mu_x[k] * mu_x[k] + mu_y[k] * mu_y[k] + c1;
        let b2 = sig_x[k] + sig_y[k] + c2;
        s[k] = (a1 * a2) / (b1 * b2);
    }
    SsimMaps { mu_x, mu_y, sig_x, sig_y, sig_xy, s, cw, ch }
}

fn channel_planes(img: &ImagePlane) -> Vec<Vec<f64>> {
    (0..img.channels())
        .map(|c| {
            let mut v = Vec::with_capacity(img.width() * img.height());
            for i in 0..img.height() {
                for j in 0..img.width() {
                    v.push(clamp01(img.get(i, j, c)));
                }
            }
            v
        })
        .collect()
}

/// Mean SSIM over valid window centers, channel-averaged; inputs clamped to
/// [0, 1] first.
pub fn ssim(ip: &ImagePlane, it: &ImagePlane, p: &SsimParams) -> Result<f64> {
    if !ip.same_shape(it) {
        return Err(RelightError::DimensionMismatch("ssim inputs".into()));
    }
    let r = p.window_radius;
    if ip.width() < 2 * r + 1 || ip.height() < 2 * r + 1 {
        return Err(RelightError::ImageTooSmall);
    }
    let xs = channel_planes(ip);
    let ys = channel_planes(it);
    let mut total = 0.0;
    for c in 0..ip.channels() {
        let maps = ssim_channel(&xs[c], &ys[c], ip.width(), ip.height(), p);
        let mean: f64 = maps.s.iter().sum::<f64>() / maps.s.len() as f64;
        total += mean;
    }
    Ok(total / ip.channels() as f64)
}

/// (1 − SSIM)/2.
pub fn dssim_loss(ip: &ImagePlane, it: &ImagePlane, p: &SsimParams) -> Result<f64> {
    Ok((1.0 - ssim(ip, it, p)?) / 2.0)
}

/// Analytic dL/dIp of `dssim_loss`. The Gaussian-window statistics are
/// differentiated exactly; the clamp to [0, 1] zeroes gradients outside.
pub fn dssim_loss_grad(ip: &ImagePlane, it: &ImagePlane, p: &SsimParams) -> Result<ImagePlane> {
    if !ip.same_shape(it) {
        return Err(RelightError::DimensionMismatch("ssim inputs".into()));
    }
    let r = p.window_radius;
    let w = ip.width();
    let h = ip.height();
    if w < 2 * r + 1 || h < 2 * r + 1 {
        return Err(RelightError::ImageTooSmall);
    }
    let win = gaussian_window(p.window_radius, p.sigma);
    let c1 = (p.k1 * p.dynamic_range).powi(2);
    let c2 = (p.k2 * p.dynamic_range).powi(2);
    let xs = channel_planes(ip);
    let ys = channel_planes(it);
    let channels = ip.channels();
    let mut grad = ImagePlane::new(w, h, channels);

    for c in 0..channels {
        let maps = ssim_channel(&xs[c], &ys[c], w, h, p);
        let n_centers = (maps.cw * maps.ch) as f64;
        // d(dssim)/dS at each center.
        let ds = -0.5 / (n_centers * channels as f64);
        for ci in 0..maps.ch {
            for cj in 0..maps.cw {
                let k = ci * maps.cw + cj;
                let a1 = 2.0 * maps.mu_x[k] * maps.mu_y[k] + c1;
                let a2 = 2.0 * maps.sig_xy[k] + c2;
                let b1 = maps.mu_x[k] * maps.mu_x[k] + maps.mu_y[k] * maps.mu_y[k] + c1;
                let b2 = maps.sig_x[k] + maps.sig_y[k] + c2;
                let s = maps.s[k];
                let ds_dmu = (2.0 * maps.mu_y[k] * a2) / (b1 * b2)
                    - (2.0 * maps.mu_x[k] * s) / b1;
                let ds_dsig_x = -s / b2;
                let ds_dsig_xy = 2.0 * a1 / (b1 * b2);
                // Scatter into the window's pixels.
                for (wi, &wyi) in win.iter().enumerate() {
                    for (wj, &wxj) in win.iter().enumerate() {
                        let pi = ci + wi;
                        let pj = cj + wj;
                        let wgt = wyi * wxj;
                        let xv = xs[c][pi * w + pj];
                        let yv = ys[c][pi * w + pj];
                        let d = wgt
                            * (ds_dmu
                                + 2.0 * (xv - maps.mu_x[k]) * ds_dsig_x
                                + (yv - maps.mu_y[k]) * ds_dsig_xy);
                        let raw = ip.get(pi, pj, c);
                        if (0.0..=1.0).contains(&raw) {
                            let cur = grad.get(pi, pj, c);
                            grad.set(pi, pj, c, cur + ds * d);
                        }
                    }
                }
            }
        }
    }
    Ok(grad)
}

/// λ-weighted sum of the component losses.
pub fn total_loss(c: &LossComponents, w: &LossWeights) -> f64 {
    w.depth * c.depth
        + w.albedo * c.albedo
        + w.ambient * c.ambient
        + w.light * c.light
        + w.recon * c.recon
        + w.dssim * c.dssim
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng_image(w: usize, h: usize, c: usize, seed: u64) -> ImagePlane {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut img = ImagePlane::new(w, h, c);
        for v in img.data_mut() {
            *v = rng.gen_range(0.0..1.0);
        }
        img
    }

    #[test]
    fn depth_loss_examples() {
        let m = Grid::new(2, 1, true);
        let a = Grid::from_fn(2, 1, |_, j| j as f64);
        assert_eq!(depth_loss(&a, &a, &m).unwrap(), 0.0);
        let b = Grid::from_fn(2, 1, |_, j| j as f64 + 0.7);
        assert!((depth_loss(&a, &b, &m).unwrap() - 0.7).abs() < 1e-15);
        // Residuals 1 and 3 on a two-pixel mask → mean 2.
        let c = Grid::from_fn(2, 1, |_, j| j as f64 + if j == 0 { 1.0 } else { 3.0 });
        assert!((depth_loss(&a, &c, &m).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn depth_loss_empty_mask_errors() {
        let a = Grid::new(2, 2, 0.0);
        let m = Grid::new(2, 2, false);
        assert!(matches!(depth_loss(&a, &a, &m), Err(RelightError::EmptyMask)));
    }

    #[test]
    fn albedo_loss_ignores_equal_luma_hues() {
        let m = Grid::new(1, 1, true);
        let mut a = ImagePlane::new(1, 1, 3);
        a.set(0, 0, 0, 0.5);
        a.set(0, 0, 1, 0.5);
        a.set(0, 0, 2, 0.5);
        // Different hue, same luma.
        let mut b = ImagePlane::new(1, 1, 3);
        let (r, g) = (0.7, 0.4);
        let bl = (0.5 - LUMA_WEIGHTS[0] * r - LUMA_WEIGHTS[1] * g) / LUMA_WEIGHTS[2];
        b.set(0, 0, 0, r);
        b.set(0, 0, 1, g);
        b.set(0, 0, 2, bl);
        assert!(albedo_loss(&a, &b, &m).unwrap().abs() < 1e-12);
        assert_eq!(albedo_loss(&a, &a, &m).unwrap(), 0.0);
    }

    #[test]
    fn ambient_loss_examples() {
        assert_eq!(ambient_loss(0.5, 0.5), 0.0);
        assert!((ambient_loss(0.7, 0.5) - 0.2).abs() < 1e-15);
        assert_eq!(ambient_loss(0.0, 0.5), 0.5);
    }

    #[test]
    fn light_loss_examples() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        let y = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(light_loss(x, x).unwrap(), 0.0);
        assert_eq!(light_loss(x, y).unwrap(), 1.0);
        assert_eq!(light_loss(x, -x).unwrap(), 2.0);
        assert!(light_loss(Vec3::new(2.0, 0.0, 0.0), x).is_err());
    }

    #[test]
    fn recon_loss_examples() {
        let m = Grid::new(1, 1, true);
        let a = ImagePlane::constant(1, 1, 3, 0.4);
        assert_eq!(recon_loss(&a, &a, &m).unwrap(), 0.0);
        let b = ImagePlane::constant(1, 1, 3, 0.5);
        assert!((recon_loss(&a, &b, &m).unwrap() - 0.01).abs() < 1e-15);
        // One pixel residual (0.3, 0, 0) → 0.09/3 = 0.03.
        let mut cimg = ImagePlane::constant(1, 1, 3, 0.4);
        cimg.set(0, 0, 0, 0.7);
        assert!((recon_loss(&cimg, &a, &m).unwrap() - 0.03).abs() < 1e-15);
    }

    #[test]
    fn dssim_identical_is_zero() {
        let a = rng_image(16, 16, 3, 1);
        assert!(dssim_loss(&a, &a, &SsimParams::default()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn dssim_vs_black_is_in_half_open_interval() {
        let a = rng_image(16, 16, 1, 2);
        let black = ImagePlane::new(16, 16, 1);
        let v = dssim_loss(&a, &black, &SsimParams::default()).unwrap();
        assert!(v > 0.0 && v <= 0.5, "dssim {v}");
    }

    #[test]
    fn dssim_rejects_small_images() {
        let a = ImagePlane::constant(8, 8, 1, 0.5);
        assert!(matches!(
            dssim_loss(&a, &a, &SsimParams::default()),
            Err(RelightError::ImageTooSmall)
        ));
    }

    #[test]
    fn dssim_gradient_matches_finite_differences() {
        let p = SsimParams::default();
        let a = rng_image(14, 13, 1, 3);
        let b = rng_image(14, 13, 1, 4);
        let g = dssim_loss_grad(&a, &b, &p).unwrap();
        let h = 1e-6;
        for &(i, j) in &[(0usize, 0usize), (6, 7), (12, 3), (5, 13), (9, 9)] {
            let mut ap = a.clone();
            ap.set(i, j, 0, a.get(i, j, 0) + h);
            let mut am = a.clone();
            am.set(i, j, 0, a.get(i, j, 0) - h);
            let fd = (dssim_loss(&ap, &b, &p).unwrap() - dssim_loss(&am, &b, &p).unwrap())
                / (2.0 * h);
            let an = g.get(i, j, 0);
            assert!((fd - an).abs() < 1e-8, "({i},{j}): fd {fd} vs analytic {an}");
        }
    }

    #[test]
    fn recon_gradient_matches_finite_differences() {
        let m = Grid::new(6, 5, true);
        let a = rng_image(6, 5, 3, 5);
        let b = rng_image(6, 5, 3, 6);
        let g = recon_loss_grad(&a, &b, &m).unwrap();
        let h = 1e-6;
        let mut ap = a.clone();
        ap.set(2, 3, 1, a.get(2, 3, 1) + h);
        let mut am = a.clone();
        am.set(2, 3, 1, a.get(2, 3, 1) - h);
        let fd =
            (recon_loss(&ap, &b, &m).unwrap() - recon_loss(&am, &b, &m).unwrap()) / (2.0 * h);
        assert!((fd - g.get(2, 3, 1)).abs() < 1e-9);
    }

    #[test]
    fn total_loss_weighting() {
        let w = LossWeights::default();
        let zero = LossComponents::default();
        assert_eq!(total_loss(&zero, &w), 0.0);
        let recon_only = LossComponents { recon: 0.01, ..Default::default() };
        assert!((total_loss(&recon_only, &w) - 0.2).abs() < 1e-15);
        let dssim_only = LossComponents { dssim: 0.1, ..Default::default() };
        assert!((total_loss(&dssim_only, &w) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn l1_recon_matches_manual() {
        let m = Grid::new(2, 1, true);
        let a = ImagePlane::constant(2, 1, 1, 0.2);
        let mut b = ImagePlane::constant(2, 1, 1, 0.2);
        b.set(0, 0, 0, 0.5);
        assert!((l1_recon_loss(&a, &b, &m).unwrap() - 0.15).abs() < 1e-15);
        let g = l1_recon_loss_grad(&a, &b, &m).unwrap();
        assert_eq!(g.get(0, 0, 0), -0.5);
        assert_eq!(g.get(0, 1, 0), 0.0);
    }
}
