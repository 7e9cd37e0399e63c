//! Procedural depth-map test scenes.
//!
//! Scenes are defined over centered coordinates: with the default pixel
//! spacing of 2/(res − 1) the grid spans [−1, 1] in both axes. All scenes
//! produce fully valid depth maps; partial validity comes from file input.

use crate::geometry::DepthMap;
use crate::grid::Grid;
use crate::{RelightError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SceneKind {
    /// Constant depth 1.
    Flat,
    /// Raised half-plane: depth 2 for x < 0, depth 2 − height for x ≥ 0.
    Step { height: f64 },
    /// Isotropic Gaussian bump toward the camera, apex depth base − amplitude.
    GaussianBump { sigma: f64, amplitude: f64, base: f64 },
    /// Anisotropic Gaussian ridge along y; a crude nose-like relief.
    NoseRidge,
}

#[derive(Debug, Clone, Copy)]
pub struct SceneSpec {
    pub kind: SceneKind,
    pub resolution: usize,
    pub pixel_spacing: f64,
}

impl SceneSpec {
    pub fn new(kind: SceneKind, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(RelightError::InvalidInput(format!(
                "scene resolution must be at least 2, got {resolution}"
            )));
        }
        Ok(SceneSpec { kind, resolution, pixel_spacing: 2.0 / (resolution as f64 - 1.0) })
    }

    /// Parses "kind:RES[,key=value,...]". Kinds: flat, step (height),
    /// bump (sigma, amplitude, base), ridge. Key "spacing" overrides the
    /// default pixel spacing on any kind.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |msg: String| RelightError::InvalidInput(msg);
        let (kind_str, rest) = s
            .split_once(':')
            .ok_or_else(|| bad(format!("scene '{s}' is missing ':RES'")))?;
        let mut parts = rest.split(',');
        let res_str = parts.next().unwrap_or("");
        let resolution: usize = res_str
            .parse()
            .map_err(|_| bad(format!("bad scene resolution '{res_str}'")))?;

        let mut params: Vec<(&str, f64)> = Vec::new();
        for p in parts {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| bad(format!("bad scene parameter '{p}', expected key=value")))?;
            let v: f64 =
                v.parse().map_err(|_| bad(format!("bad numeric value in '{p}'")))?;
            params.push((k, v));
        }
        let mut take = |key: &str, default: f64| -> f64 {
            params
                .iter()
                .position(|&(k, _)| k == key)
                .map(|idx| params.remove(idx).1)
                .unwrap_or(default)
        };

        let kind = match kind_str {
            "flat" => SceneKind::Flat,
            "step" => {
                let mut height = take("height", f64::NAN);
                if height.is_nan() {
                    height = take("h", 0.5);
                }
                SceneKind::Step { height }
            }
            "bump" => SceneKind::GaussianBump {
                sigma: take("sigma", 0.25),
                amplitude: take("amplitude", 0.35),
                base: take("base", 1.0),
            },
            "ridge" => SceneKind::NoseRidge,
            other => return Err(bad(format!("unknown scene kind '{other}'"))),
        };
        let mut spec = SceneSpec::new(kind, resolution)?;
        let spacing = take("spacing", spec.pixel_spacing);
        if !params.is_empty() {
            let keys: Vec<&str> = params.iter().map(|&(k, _)| k).collect();
            return Err(bad(format!("unknown scene parameters {keys:?} for '{kind_str}'")));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(bad(format!("pixel spacing must be positive, got {spacing}")));
        }
        spec.pixel_spacing = spacing;
        Ok(spec)
    }

    pub fn build(&self) -> Result<DepthMap> {
        let n = self.resolution;
        if n < 2 {
            return Err(RelightError::InvalidInput(format!(
                "scene resolution must be at least 2, got {n}"
            )));
        }
        let s = self.pixel_spacing;
        let half = (n - 1) as f64 / 2.0;
        let kind = self.kind;
        let values = Grid::from_fn(n, n, |i, j| {
            let x = (j as f64 - half) * s;
            let y = ((n - 1 - i) as f64 - half) * s;
            match kind {
                SceneKind::Flat => 1.0,
                SceneKind::Step { height } => {
                    if x >= 0.0 {
                        2.0 - height
                    } else {
                        2.0
                    }
                }
                SceneKind::GaussianBump { sigma, amplitude, base } => {
                    base - amplitude * (-(x * x + y * y) / (2.0 * sigma * sigma)).exp()
                }
                SceneKind::NoseRidge => {
                    let rx = x / 0.12;
                    let ry = y / 0.55;
                    1.2 - 0.35 * (-(rx * rx + ry * ry) / 2.0).exp()
                }
            }
        });
        DepthMap::from_values(values, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_scene_is_constant_one() {
        let d = SceneSpec::new(SceneKind::Flat, 8).unwrap().build().unwrap();
        assert!(d.values.data().iter().all(|&v| v == 1.0));
        assert!((d.pixel_spacing - 2.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn step_scene_splits_at_center() {
        let d = SceneSpec::new(SceneKind::Step { height: 0.5 }, 9).unwrap().build().unwrap();
        // Column 4 sits at x = 0, on the raised side.
        assert_eq!(d.values.at(0, 3), 2.0);
        assert_eq!(d.values.at(0, 4), 1.5);
        assert_eq!(d.values.at(0, 8), 1.5);
    }

    #[test]
    fn bump_apex_at_center() {
        let spec = SceneSpec::new(
            SceneKind::GaussianBump { sigma: 0.3, amplitude: 0.4, base: 1.0 },
            65,
        )
        .unwrap();
        let d = spec.build().unwrap();
        let c = 32;
        assert!((d.values.at(c, c) - 0.6).abs() < 1e-12);
        let min = d.values.data().iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(min, d.values.at(c, c));
        // Symmetry across both axes.
        assert!((d.values.at(c, c - 5) - d.values.at(c, c + 5)).abs() < 1e-12);
        assert!((d.values.at(c - 5, c) - d.values.at(c + 5, c)).abs() < 1e-12);
    }

    #[test]
    fn parse_round_trips_parameters() {
        let spec = SceneSpec::parse("bump:48,sigma=0.3,amplitude=0.35,base=1.0").unwrap();
        assert_eq!(spec.resolution, 48);
        assert_eq!(
            spec.kind,
            SceneKind::GaussianBump { sigma: 0.3, amplitude: 0.35, base: 1.0 }
        );
        let spec = SceneSpec::parse("flat:16,spacing=0.0625").unwrap();
        assert_eq!(spec.pixel_spacing, 0.0625);
        assert_eq!(SceneSpec::parse("step:32").unwrap().kind, SceneKind::Step { height: 0.5 });
        assert_eq!(
            SceneSpec::parse("step:128,h=1").unwrap().kind,
            SceneKind::Step { height: 1.0 }
        );
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(SceneSpec::parse("flat").is_err());
        assert!(SceneSpec::parse("blob:32").is_err());
        assert!(SceneSpec::parse("flat:zero").is_err());
        assert!(SceneSpec::parse("flat:32,height=1.0").is_err());
        assert!(SceneSpec::parse("step:32,height").is_err());
        assert!(SceneSpec::parse("flat:32,spacing=-1").is_err());
        assert!(SceneSpec::parse("flat:1").is_err());
    }
}
