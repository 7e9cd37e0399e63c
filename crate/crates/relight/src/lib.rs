//! Differentiable relighting of 2.5D height fields.
//!
//! A depth map plus an albedo image and a directional-plus-ambient light are
//! composed into a Lambertian render with ray-traced cast shadows. The whole
//! pipeline is differentiable: reverse-mode gradients of any scalar loss are
//! available with respect to the depth values, the albedo, the light
//! direction, and the two light intensities.

pub mod autodiff;
pub mod checks;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod imgio;
pub mod losses;
pub mod optimizer;
pub mod oracle;
pub mod pfm;
pub mod scene;
pub mod shading;
pub mod shadow;
pub mod vec3;

pub use error::RelightError;
pub use vec3::Vec3;

pub type Result<T> = std::result::Result<T, RelightError>;
