//! Sphere to plane mappings.
//!
//! All projections share one convention: the viewport plane is tangent to the
//! unit sphere at `(phi, theta) = (0, 0)`, `x` grows to the right with
//! longitude and `y` grows upwards with latitude. The 3D direction of a sphere
//! point is `(cos(theta) sin(phi), sin(theta), cos(theta) cos(phi))`, so the
//! view axis is `+z`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use thiserror::Error;

/// Guard band applied at every trigonometric domain edge, in radians.
pub const EPS_DOMAIN: f64 = 1e-6;

/// Raised when a point falls outside the domain of a projection.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("sphere point (phi={phi:.6}, theta={theta:.6}) is outside the {projection} domain")]
    Sphere {
        projection: &'static str,
        phi: f64,
        theta: f64,
    },
    #[error("plane point (x={x:.6}, y={y:.6}) has no preimage under the {projection} projection")]
    Plane {
        projection: &'static str,
        x: f64,
        y: f64,
    },
    #[error("invalid projection parameters: {0}")]
    Params(String),
}

/// A direction on the unit viewing sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    /// Longitude in radians, in `(-pi, pi]`.
    pub phi: f64,
    /// Latitude in radians, in `[-pi/2, pi/2]`.
    pub theta: f64,
}

impl SpherePoint {
    pub fn new(phi: f64, theta: f64) -> Self {
        Self { phi, theta }
    }

    pub fn from_degrees(phi: f64, theta: f64) -> Self {
        Self::new(phi.to_radians(), theta.to_radians())
    }

    /// Unit vector for this direction.
    pub fn to_vector(self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [ct * sp, st, ct * cp]
    }

    /// Direction of a (not necessarily unit) 3D vector.
    pub fn from_vector(v: [f64; 3]) -> Self {
        let horiz = v[0].hypot(v[2]);
        let theta = v[1].atan2(horiz);
        let phi = if horiz == 0.0 { 0.0 } else { v[0].atan2(v[2]) };
        Self { phi, theta }.normalized()
    }

    /// Wraps longitude into `(-pi, pi]` and clamps latitude to `[-pi/2, pi/2]`.
    pub fn normalized(self) -> Self {
        let mut phi = self.phi.rem_euclid(2.0 * PI);
        if phi > PI {
            phi -= 2.0 * PI;
        }
        Self {
            phi,
            theta: self.theta.clamp(-FRAC_PI_2, FRAC_PI_2),
        }
    }
}

/// A point on the tangent viewport plane, in length units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Pannini projection parameters: center distance `d` and vertical
/// compression strength `vc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanniniParams {
    pub d: f64,
    pub vc: f64,
}

impl PanniniParams {
    pub fn new(d: f64, vc: f64) -> Result<Self, DomainError> {
        if !d.is_finite() || d < 0.0 {
            return Err(DomainError::Params(format!("d must be finite and >= 0, got {d}")));
        }
        if !vc.is_finite() || !(0.0..=1.0).contains(&vc) {
            return Err(DomainError::Params(format!("vc must lie in [0, 1], got {vc}")));
        }
        Ok(Self { d, vc })
    }

    /// Plain Pannini with `d = 0`, `vc = 0`, identical to rectilinear.
    pub const RECTILINEAR: Self = Self { d: 0.0, vc: 0.0 };

    fn scale(&self, cos_phi: f64) -> f64 {
        (self.d + 1.0) / (self.d + cos_phi)
    }
}

impl fmt::Display for PanniniParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(d={:.3}, vc={:.3})", self.d, self.vc)
    }
}

/// Pannini forward projection.
///
/// The compression term `vc * tan(theta) / cos(phi)` carries no `S` factor.
pub fn pannini_forward(p: SpherePoint, params: PanniniParams) -> Result<PlanePoint, DomainError> {
    let cos_phi = p.phi.cos();
    let out_of_domain = params.d + cos_phi <= EPS_DOMAIN
        || p.phi.abs() >= PI - EPS_DOMAIN
        || p.theta.abs() >= FRAC_PI_2 - EPS_DOMAIN
        || (params.vc > 0.0 && cos_phi <= EPS_DOMAIN);
    if out_of_domain {
        return Err(DomainError::Sphere {
            projection: "pannini",
            phi: p.phi,
            theta: p.theta,
        });
    }
    let s = params.scale(cos_phi);
    let tan_theta = p.theta.tan();
    let x = s * p.phi.sin();
    let y = (1.0 - params.vc) * s * tan_theta + params.vc * tan_theta / cos_phi;
    Ok(PlanePoint { x, y })
}

/// Closed-form inverse of [`pannini_forward`].
pub fn pannini_backward(q: PlanePoint, params: PanniniParams) -> Result<SpherePoint, DomainError> {
    let err = || DomainError::Plane {
        projection: "pannini",
        x: q.x,
        y: q.y,
    };
    if !q.x.is_finite() || !q.y.is_finite() {
        return Err(err());
    }
    let d = params.d;
    let k = (q.x / (d + 1.0)).powi(2);
    // (k+1) c^2 + 2 k d c + (k d^2 - 1) = 0, root with d + c > 0
    let disc = 1.0 + k * (1.0 - d * d);
    if disc < 0.0 {
        return Err(err());
    }
    let cos_phi = (-k * d + disc.sqrt()) / (k + 1.0);
    if cos_phi + d <= 0.0 || cos_phi > 1.0 + 1e-12 {
        return Err(err());
    }
    let cos_phi = cos_phi.min(1.0);
    // sin(phi) from x = S sin(phi) is better conditioned than acos near the axis.
    let sin_phi = q.x * (d + cos_phi) / (d + 1.0);
    let phi = sin_phi.atan2(cos_phi);
    let denom = (1.0 - params.vc) * params.scale(cos_phi)
        + if params.vc > 0.0 {
            if cos_phi <= EPS_DOMAIN {
                return Err(err());
            }
            params.vc / cos_phi
        } else {
            0.0
        };
    let theta = (q.y / denom).atan();
    Ok(SpherePoint { phi, theta })
}

/// Rectilinear (gnomonic) projection.
pub fn rectilinear_forward(p: SpherePoint) -> Result<PlanePoint, DomainError> {
    if p.phi.abs() >= FRAC_PI_2 - EPS_DOMAIN || p.theta.abs() >= FRAC_PI_2 - EPS_DOMAIN {
        return Err(DomainError::Sphere {
            projection: "rectilinear",
            phi: p.phi,
            theta: p.theta,
        });
    }
    let cos_phi = p.phi.cos();
    Ok(PlanePoint {
        x: p.phi.tan(),
        y: p.theta.tan() / cos_phi,
    })
}

pub fn rectilinear_backward(q: PlanePoint) -> Result<SpherePoint, DomainError> {
    gpp_backward(q, 0.0).map_err(|_| DomainError::Plane {
        projection: "rectilinear",
        x: q.x,
        y: q.y,
    })
}

/// Generalized perspective projection with the center at `(0, 0, -d)`.
/// `d = 0` is rectilinear and `d = 1` is stereographic.
pub fn gpp_forward(p: SpherePoint, d: f64) -> Result<PlanePoint, DomainError> {
    let [px, py, pz] = p.to_vector();
    let denom = pz + d;
    if denom <= EPS_DOMAIN || !d.is_finite() || d < 0.0 {
        return Err(DomainError::Sphere {
            projection: "gpp",
            phi: p.phi,
            theta: p.theta,
        });
    }
    Ok(PlanePoint {
        x: (1.0 + d) * px / denom,
        y: (1.0 + d) * py / denom,
    })
}

/// Inverse of [`gpp_forward`]: intersects the ray from the projection center
/// through the plane point with the far side of the unit sphere.
pub fn gpp_backward(q: PlanePoint, d: f64) -> Result<SpherePoint, DomainError> {
    let err = || DomainError::Plane {
        projection: "gpp",
        x: q.x,
        y: q.y,
    };
    if !q.x.is_finite() || !q.y.is_finite() || !d.is_finite() || d < 0.0 {
        return Err(err());
    }
    let u = [q.x, q.y, 1.0 + d];
    let uu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let half_b = d * (1.0 + d);
    let disc = half_b * half_b - uu * (d * d - 1.0);
    if disc < 0.0 {
        return Err(err());
    }
    let t = (half_b + disc.sqrt()) / uu;
    let v = [t * u[0], t * u[1], t * u[2] - d];
    if v[2] + d <= 0.0 {
        return Err(err());
    }
    Ok(SpherePoint::from_vector(v))
}

pub fn stereographic_forward(p: SpherePoint) -> Result<PlanePoint, DomainError> {
    gpp_forward(p, 1.0)
}

pub fn stereographic_backward(q: PlanePoint) -> Result<SpherePoint, DomainError> {
    gpp_backward(q, 1.0)
}

/// Any of the supported sphere to plane projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Pannini(PanniniParams),
    Gpp(f64),
    Rectilinear,
    Stereographic,
}

impl Projection {
    pub fn forward(&self, p: SpherePoint) -> Result<PlanePoint, DomainError> {
        match *self {
            Projection::Pannini(params) => pannini_forward(p, params),
            Projection::Gpp(d) => gpp_forward(p, d),
            Projection::Rectilinear => rectilinear_forward(p),
            Projection::Stereographic => stereographic_forward(p),
        }
    }

    pub fn backward(&self, q: PlanePoint) -> Result<SpherePoint, DomainError> {
        match *self {
            Projection::Pannini(params) => pannini_backward(q, params),
            Projection::Gpp(d) => gpp_backward(q, d),
            Projection::Rectilinear => rectilinear_backward(q),
            Projection::Stereographic => stereographic_backward(q),
        }
    }

    /// Half extents of the viewport plane for a horizontal FoV and aspect ratio.
    pub fn plane_extent(&self, f_h: f64, ar: f64) -> Result<PlaneExtent, DomainError> {
        match *self {
            Projection::Pannini(params) => viewport_plane_extent(params, f_h, ar),
            _ => {
                check_fov(f_h, ar)?;
                let edge = self.forward(SpherePoint::new(f_h / 2.0, 0.0))?;
                Ok(PlaneExtent::from_half_width(edge.x, ar))
            }
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Projection::Pannini(p) => format!("pannini(d={:.2},vc={:.2})", p.d, p.vc),
            Projection::Gpp(d) => format!("gpp(d={d:.2})"),
            Projection::Rectilinear => "rectilinear".to_string(),
            Projection::Stereographic => "stereographic".to_string(),
        }
    }
}

/// Half extents of the viewport plane and the resulting vertical FoV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneExtent {
    pub half_width: f64,
    pub half_height: f64,
    /// Vertical field of view in radians.
    pub f_v: f64,
}

impl PlaneExtent {
    fn from_half_width(half_width: f64, ar: f64) -> Self {
        let half_height = half_width / ar;
        Self {
            half_width,
            half_height,
            f_v: 2.0 * half_height.atan(),
        }
    }
}

fn check_fov(f_h: f64, ar: f64) -> Result<(), DomainError> {
    if !(f_h > 0.0 && f_h < 2.0 * PI) {
        return Err(DomainError::Params(format!("horizontal FoV {f_h} rad out of (0, 2pi)")));
    }
    if !(ar > 0.0 && ar.is_finite()) {
        return Err(DomainError::Params(format!("aspect ratio {ar} must be positive")));
    }
    Ok(())
}

/// Pannini viewport extent: `half_width = (d+1) sin(F_h/2) / (d + cos(F_h/2))`,
/// `F_v = 2 atan(half_width / AR)`.
pub fn viewport_plane_extent(
    params: PanniniParams,
    f_h: f64,
    ar: f64,
) -> Result<PlaneExtent, DomainError> {
    check_fov(f_h, ar)?;
    let half = f_h / 2.0;
    let denom = params.d + half.cos();
    if denom <= 0.0 {
        return Err(DomainError::Params(format!(
            "d + cos(F_h/2) = {denom} <= 0 for {params}"
        )));
    }
    let half_width = (params.d + 1.0) * half.sin() / denom;
    Ok(PlaneExtent::from_half_width(half_width, ar))
}

/// Rotation taking the viewport center `(0, 0)` to the viewing direction
/// `vd`: pitch by `vd.theta` about the x axis, then yaw by `vd.phi` about the
/// vertical axis. Roll is always zero.
pub fn rotate_to_vd(p: SpherePoint, vd: SpherePoint) -> SpherePoint {
    let [x, y, z] = p.to_vector();
    let (sp, cp) = vd.theta.sin_cos();
    let (y1, z1) = (y * cp + z * sp, -y * sp + z * cp);
    let (sy, cy) = vd.phi.sin_cos();
    let (x2, z2) = (x * cy + z1 * sy, -x * sy + z1 * cy);
    SpherePoint::from_vector([x2, y1, z2])
}

/// Inverse of [`rotate_to_vd`].
pub fn unrotate_from_vd(p: SpherePoint, vd: SpherePoint) -> SpherePoint {
    let [x, y, z] = p.to_vector();
    let (sy, cy) = vd.phi.sin_cos();
    let (x1, z1) = (x * cy - z * sy, x * sy + z * cy);
    let (sp, cp) = vd.theta.sin_cos();
    let (y2, z2) = (y * cp - z1 * sp, y * sp + z1 * cp);
    SpherePoint::from_vector([x1, y2, z2])
}

/// Viewing direction, horizontal FoV and output size of a viewport.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewportSpec {
    pub vd: SpherePoint,
    /// Horizontal FoV in radians.
    pub f_h: f64,
    pub width_px: usize,
    pub height_px: usize,
}

impl ViewportSpec {
    pub fn new(vd: SpherePoint, f_h: f64, width_px: usize, height_px: usize) -> Result<Self, DomainError> {
        if !(f_h > 0.0 && f_h < 2.0 * PI) {
            return Err(DomainError::Params(format!("horizontal FoV {f_h} rad out of (0, 2pi)")));
        }
        if width_px < 2 || height_px < 2 {
            return Err(DomainError::Params(format!(
                "viewport must be at least 2x2 pixels, got {width_px}x{height_px}"
            )));
        }
        Ok(Self {
            vd,
            f_h,
            width_px,
            height_px,
        })
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.width_px as f64 / self.height_px as f64
    }

    /// Same view at a different resolution (aspect ratio follows the new size).
    pub fn with_size(&self, width_px: usize, height_px: usize) -> Self {
        Self {
            width_px: width_px.max(2),
            height_px: height_px.max(2),
            ..*self
        }
    }

    /// Same view downscaled by an integer factor.
    pub fn downscaled(&self, factor: usize) -> Self {
        let factor = factor.max(1);
        self.with_size(self.width_px / factor, self.height_px / factor)
    }
}
