//! Self-validation gates: quick numerical checks of the visibility curve,
//! the shading identity, oracle agreement, the analytic shadow length, and
//! gradient correctness. Exposed as a library so both the CLI `check`
//! subcommand and the test suite run the same code.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{finite_difference_check, forward_render, FdParam, FdScene};
use crate::geometry::DepthMap;
use crate::oracle::{compare_mask, trace_exact};
use crate::scene::{SceneKind, SceneSpec};
use crate::shading::{ImagePlane, LightingParams};
use crate::shadow::{estimate_shadow_mask, visibility, LightDirection, ShadowConfig};
use crate::vec3::Vec3;
use crate::Result;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
}

fn finish(name: &'static str, start: Instant, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail, elapsed_s: start.elapsed().as_secs_f64() }
}

/// Visibility curve units: M(0) = 0, M(ln 3) = 1/4, monotone, sentinel → 1.
pub fn check_visibility_units() -> CheckResult {
    let start = Instant::now();
    let cfg = ShadowConfig { distance_scale: 1.0, ..ShadowConfig::default() };
    let mut failures = Vec::new();
    if visibility(0.0, &cfg) != 0.0 {
        failures.push(format!("M(0) = {}", visibility(0.0, &cfg)));
    }
    let quarter = visibility(3.0f64.ln(), &cfg);
    if (quarter - 0.25).abs() > 1e-12 {
        failures.push(format!("M(ln 3) = {quarter}"));
    }
    let mut prev = f64::NEG_INFINITY;
    for k in 0..10_000 {
        let d = 20.0 * k as f64 / 9_999.0;
        let v = visibility(d, &cfg);
        if v < prev {
            failures.push(format!("not monotone at d = {d}"));
            break;
        }
        prev = v;
    }
    if visibility(f64::INFINITY, &cfg) != 1.0 {
        failures.push("sentinel not exactly 1".into());
    }
    let passed = failures.is_empty();
    let detail = if passed { "M(0)=0, M(ln 3)=1/4, monotone, sentinel=1".into() } else { failures.join("; ") };
    finish("visibility-units", start, passed, detail)
}

fn ulp_distance(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let to_ordered = |v: f64| -> i64 {
        let bits = v.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    to_ordered(a).abs_diff(to_ordered(b))
}

/// The two algebraic forms of shadowed shading,
/// i_a + M·i_d·⌊n·ω⌋ and (1 − M)·i_a + M·(i_a + i_d·⌊n·ω⌋),
/// agree within 4 ULP over 10⁶ random tuples.
pub fn check_shading_identity() -> CheckResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ead);
    let mut worst = 0u64;
    for _ in 0..1_000_000 {
        let n = loop {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..1.0),
            );
            if let Some(u) = v.normalized() {
                break u;
            }
        };
        let omega = loop {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(1e-3..1.0),
            );
            if let Some(u) = v.normalized() {
                break u;
            }
        };
        let m: f64 = rng.gen_range(0.0..1.0);
        let ia: f64 = rng.gen_range(0.0..2.0);
        let id: f64 = rng.gen_range(0.0..2.0);
        let lambert = n.dot(omega).max(0.0);
        let form_a = ia + m * id * lambert;
        let form_b = (1.0 - m) * ia + m * (ia + id * lambert);
        worst = worst.max(ulp_distance(form_a, form_b));
    }
    let passed = worst <= 4;
    finish("shading-identity", start, passed, format!("max deviation {worst} ULP over 1e6 tuples"))
}

fn agreement_on(d: &DepthMap, az: f64, el: f64, oracle_steps: usize) -> Result<f64> {
    let omega = LightDirection::from_azimuth_elevation(az, el)?;
    let vis = trace_exact(d, omega, oracle_steps)?;
    let mask = estimate_shadow_mask(d, omega, &ShadowConfig::default());
    compare_mask(&mask, &vis, 0.5, 2)
}

/// Thresholded soft mask vs brute-force oracle: ≥ 95% agreement on step and
/// bump scenes, exactly 100% on the flat plane.
pub fn check_oracle_agreement() -> CheckResult {
    let start = Instant::now();
    let spacing = 1.0 / 32.0;
    let mut failures = Vec::new();
    let mut min_agreement = 1.0f64;
    let run = |kind: SceneKind| -> Result<DepthMap> {
        let mut spec = SceneSpec::new(kind, 128)?;
        spec.pixel_spacing = spacing;
        spec.build()
    };
    let outcome = (|| -> Result<()> {
        for h in [0.5, 1.0, 2.0] {
            let d = run(SceneKind::Step { height: h })?;
            for el in [30.0, 45.0, 60.0] {
                let a = agreement_on(&d, 0.0, el, 2000)?;
                min_agreement = min_agreement.min(a);
                if a < 0.95 {
                    failures.push(format!("step h={h} el={el}: {a:.4}"));
                }
            }
        }
        let bump = run(SceneKind::GaussianBump { sigma: 0.4, amplitude: 0.6, base: 1.0 })?;
        for el in [30.0, 45.0] {
            let a = agreement_on(&bump, 25.0, el, 2000)?;
            min_agreement = min_agreement.min(a);
            if a < 0.95 {
                failures.push(format!("bump el={el}: {a:.4}"));
            }
        }
        let flat = run(SceneKind::Flat)?;
        let a = agreement_on(&flat, 0.0, 45.0, 2000)?;
        if a != 1.0 {
            failures.push(format!("flat: {a:.6} (must be exactly 1)"));
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        failures.push(format!("error: {e}"));
    }
    let passed = failures.is_empty();
    let detail = if passed {
        format!("min agreement {min_agreement:.4}, flat exact")
    } else {
        failures.join("; ")
    };
    finish("oracle-agreement", start, passed, detail)
}

/// Step scene, h = 1, elevation 45°: the dark band (mask < 0.5) must be
/// 1 world unit wide within 2 pixels at spacing 1/32.
pub fn check_shadow_length() -> CheckResult {
    let start = Instant::now();
    let spacing = 1.0 / 32.0;
    let result = (|| -> Result<(f64, usize)> {
        let mut spec = SceneSpec::new(SceneKind::Step { height: 1.0 }, 128)?;
        spec.pixel_spacing = spacing;
        let d = spec.build()?;
        let omega = LightDirection::from_azimuth_elevation(0.0, 45.0)?;
        let mask = estimate_shadow_mask(&d, omega, &ShadowConfig::default());
        let mid = d.height() / 2;
        let dark = (0..d.width()).filter(|&j| mask.values.at(mid, j) < 0.5).count();
        Ok((dark as f64 * spacing, dark))
    })();
    match result {
        Ok((width, px)) => {
            let err_px = (width - 1.0).abs() / spacing;
            finish(
                "shadow-length",
                start,
                err_px <= 2.0,
                format!("dark band {px} px = {width:.4} world units (err {err_px:.2} px)"),
            )
        }
        Err(e) => finish("shadow-length", start, false, format!("error: {e}")),
    }
}

/// Finite-difference check of the analytic gradients on a 48×48 bump scene:
/// 100 random depth pixels, i_a, i_d, and the ω tangent directions.
pub fn check_gradients() -> CheckResult {
    let start = Instant::now();
    let result = (|| -> Result<(f64, f64, usize, bool)> {
        let spec = SceneSpec {
            kind: SceneKind::GaussianBump { sigma: 0.3, amplitude: 0.35, base: 1.0 },
            resolution: 48,
            pixel_spacing: 1.0 / 32.0,
        };
        let depth = spec.build()?;
        let albedo = ImagePlane::constant(48, 48, 3, 0.65);
        let lighting = LightingParams::new(
            LightDirection::from_azimuth_elevation(20.0, 50.0)?,
            0.5,
            0.5,
        )?;
        let cfg = ShadowConfig::default();
        let target_light = LightingParams::new(
            LightDirection::from_azimuth_elevation(35.0, 55.0)?,
            0.45,
            0.55,
        )?;
        let target = forward_render(&depth, &albedo, &target_light, &cfg)?;
        let scene = FdScene { depth, albedo, lighting, cfg, target };

        let mut rng = ChaCha8Rng::seed_from_u64(0xd1ff);
        let mut pixels = Vec::new();
        while pixels.len() < 100 {
            let p = (rng.gen_range(0..48), rng.gen_range(0..48));
            if !pixels.contains(&p) {
                pixels.push(p);
            }
        }
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
        )?;
        let intensity_err = report
            .entries
            .iter()
            .filter(|e| e.label == "ambient" || e.label == "directional")
            .map(|e| e.rel_err)
            .fold(0.0, f64::max);
        Ok((report.max_rel_err, intensity_err, report.excluded.len(), report.all_passed))
    })();
    match result {
        Ok((max_err, intensity_err, excluded, all_passed)) => {
            let passed = all_passed && intensity_err < 1e-6;
            finish(
                "gradient-correctness",
                start,
                passed,
                format!(
                    "max rel err {max_err:.2e}, intensity err {intensity_err:.2e}, {excluded} branch-unstable excluded"
                ),
            )
        }
        Err(e) => finish("gradient-correctness", start, false, format!("error: {e}")),
    }
}

/// Gates 1–5 in order.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        check_visibility_units(),
        check_shading_identity(),
        check_oracle_agreement(),
        check_shadow_length(),
        check_gradients(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ulp_distance_basics() {
        assert_eq!(ulp_distance(1.0, 1.0), 0);
        assert_eq!(ulp_distance(1.0, f64::from_bits(1.0f64.to_bits() + 1)), 1);
        assert_eq!(ulp_distance(-0.0, 0.0), 0);
        assert!(ulp_distance(1.0, 2.0) > 1_000_000);
    }

    #[test]
    fn fast_checks_pass() {
        assert!(check_visibility_units().passed);
        assert!(check_shadow_length().passed);
    }
}
