use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Rotation by `theta` about `(cx, cy)` followed by translation `(tx, ty)`:
/// `p ↦ R(θ)(p − c) + c + t`.
///
/// Coordinates are pixel centres with `y` pointing down, so a positive
/// `theta` turns clockwise on screen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidTransform {
    #[serde(rename = "theta_rad")]
    pub theta: f64,
    pub tx: f64,
    pub ty: f64,
    pub cx: f64,
    pub cy: f64,
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut t = theta % two_pi;
    if t <= -std::f64::consts::PI {
        t += two_pi;
    } else if t > std::f64::consts::PI {
        t -= two_pi;
    }
    t
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            theta: 0.0,
            tx: 0.0,
            ty: 0.0,
            cx: 0.0,
            cy: 0.0,
        }
    }

    pub fn new(theta: f64, tx: f64, ty: f64, center: Point) -> Result<Self> {
        let t = RigidTransform {
            theta,
            tx,
            ty,
            cx: center[0],
            cy: center[1],
        };
        t.validate()?;
        Ok(t)
    }

    /// Pivot at the centre of a `width × height` pixel grid.
    pub fn image_center(width: usize, height: usize) -> Point {
        [(width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0]
    }

    pub fn validate(&self) -> Result<()> {
        if [self.theta, self.tx, self.ty, self.cx, self.cy]
            .iter()
            .all(|v| v.is_finite())
        {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "transform parameters must be finite: {self:?}"
            )))
        }
    }

    pub fn center(&self) -> Point {
        [self.cx, self.cy]
    }

    fn rotation(&self) -> (f64, f64) {
        self.theta.sin_cos()
    }

    /// Affine form `p ↦ R p + b`.
    fn offset(&self) -> Point {
        let (s, c) = self.rotation();
        [
            self.cx + self.tx - (c * self.cx - s * self.cy),
            self.cy + self.ty - (s * self.cx + c * self.cy),
        ]
    }

    fn from_affine(theta: f64, b: Point, center: Point) -> Self {
        let (s, c) = theta.sin_cos();
        RigidTransform {
            theta,
            tx: b[0] - center[0] + (c * center[0] - s * center[1]),
            ty: b[1] - center[1] + (s * center[0] + c * center[1]),
            cx: center[0],
            cy: center[1],
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        let (s, c) = self.rotation();
        let dx = p[0] - self.cx;
        let dy = p[1] - self.cy;
        [
            c * dx - s * dy + self.cx + self.tx,
            s * dx + c * dy + self.cy + self.ty,
        ]
    }

    /// Same pivot, `θ' = −θ`, `t' = −Rᵀ t`.
    pub fn inverse(&self) -> Self {
        let (s, c) = self.rotation();
        RigidTransform {
            theta: -self.theta,
            tx: -(c * self.tx + s * self.ty),
            ty: -(-s * self.tx + c * self.ty),
            cx: self.cx,
            cy: self.cy,
        }
    }

    /// `self ∘ other`: applies `other` first. The result keeps `self`'s pivot.
    pub fn compose(&self, other: &RigidTransform) -> Self {
        let (s, c) = self.rotation();
        let b1 = self.offset();
        let b2 = other.offset();
        let b = [c * b2[0] - s * b2[1] + b1[0], s * b2[0] + c * b2[1] + b1[1]];
        RigidTransform::from_affine(wrap_angle(self.theta + other.theta), b, self.center())
    }

    /// The same mapping expressed about a different pivot.
    pub fn recentered(&self, center: Point) -> Self {
        RigidTransform::from_affine(self.theta, self.offset(), center)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Point, b: Point, tol: f64) -> bool {
        (a[0] - b[0]).abs() < tol && (a[1] - b[1]).abs() < tol
    }

    #[test]
    fn quarter_turn_about_center() {
        let t = RigidTransform::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0, [1.0, 1.0]).unwrap();
        assert!(close(t.apply([2.0, 1.0]), [1.0, 2.0], 1e-15));
        assert!(close(t.apply([1.0, 1.0]), [1.0, 1.0], 1e-15));
    }

    #[test]
    fn json_field_names() {
        let t = RigidTransform::new(0.1, 2.0, -3.0, [4.0, 5.0]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(
            s,
            r#"{"theta_rad":0.1,"tx":2.0,"ty":-3.0,"cx":4.0,"cy":5.0}"#
        );
        assert_eq!(serde_json::from_str::<RigidTransform>(&s).unwrap(), t);
        assert!(RigidTransform::new(f64::NAN, 0.0, 0.0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn wrap_angle_range() {
        use std::f64::consts::PI;
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    fn transform() -> impl Strategy<Value = RigidTransform> {
        (
            -4.0f64..4.0,
            -200.0f64..200.0,
            -200.0f64..200.0,
            0.0f64..900.0,
            0.0f64..900.0,
        )
            .prop_map(|(th, tx, ty, cx, cy)| RigidTransform::new(th, tx, ty, [cx, cy]).unwrap())
    }

    proptest! {
        #[test]
        fn inverse_round_trips_random_points(t in transform(), seed in 0u64..1000) {
            use rand::Rng;
            let mut rng = crate::rng::seeded(seed);
            let inv = t.inverse();
            let both = t.compose(&inv);
            for _ in 0..100 {
                let p = [rng.gen_range(-50.0..900.0), rng.gen_range(-50.0..900.0)];
                prop_assert!(close(inv.apply(t.apply(p)), p, 1e-9));
                prop_assert!(close(both.apply(p), p, 1e-9));
            }
        }

        #[test]
        fn compose_matches_sequential_application(a in transform(), b in transform(), x in -100.0f64..900.0, y in -100.0f64..900.0) {
            let ab = a.compose(&b);
            prop_assert!(close(ab.apply([x, y]), a.apply(b.apply([x, y])), 1e-8));
            prop_assert_eq!(ab.center(), a.center());
        }

        #[test]
        fn recentering_preserves_the_map(t in transform(), cx in -100.0f64..900.0, cy in -100.0f64..900.0, x in 0.0f64..834.0, y in 0.0f64..834.0) {
            let r = t.recentered([cx, cy]);
            prop_assert!(close(r.apply([x, y]), t.apply([x, y]), 1e-9));
            prop_assert_eq!(r.theta, t.theta);
        }
    }
}
