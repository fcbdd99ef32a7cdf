//! CORDIC-backed plane rotations.

use crate::cordic::{CordicConfig, CordicError, RotationPlan};

/// Rotation of `(x, y)` pairs by a fixed angle, precomputed as a CORDIC
/// direction plan. The identity is kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaneRotation {
    angle: i64,
    plan: Option<(RotationPlan, bool)>,
}

impl PlaneRotation {
    pub fn identity() -> Self {
        PlaneRotation {
            angle: 0,
            plan: None,
        }
    }

    /// Rotation by `angle` (raw, radians). Angles beyond `pi/2` in magnitude
    /// are reduced by `pi` with a sign flip; a few reductions cover any word
    /// an approximate angle path can produce.
    pub fn new(cfg: &CordicConfig, angle: i64) -> Result<Self, CordicError> {
        if angle == 0 {
            return Ok(Self::identity());
        }
        let pi = cfg.pi_raw();
        let half = pi / 2;
        let mut a = angle;
        let mut flip = false;
        for _ in 0..4 {
            if a > half {
                a = cfg.sub_raw(a, pi);
            } else if a < -half {
                a = cfg.add_raw(a, pi);
            } else {
                break;
            }
            flip = !flip;
        }
        let plan = cfg.plan_raw(a)?;
        Ok(PlaneRotation {
            angle,
            plan: Some((plan, flip)),
        })
    }

    /// Replays a vectoring plan; `angle` is the rotation it approximates.
    pub fn from_plan(angle: i64, plan: (RotationPlan, bool)) -> Self {
        PlaneRotation {
            angle,
            plan: Some(plan),
        }
    }

    pub fn angle_raw(&self) -> i64 {
        self.angle
    }

    pub fn is_identity(&self) -> bool {
        self.plan.is_none()
    }

    #[inline]
    pub fn apply(&self, cfg: &CordicConfig, x: i64, y: i64) -> (i64, i64) {
        match self.plan {
            None => (x, y),
            Some(p) => cfg.apply_any_raw(p, x, y),
        }
    }

    /// The same micro-rotations in the opposite directions.
    pub fn inverse(&self, cfg: &CordicConfig) -> Self {
        match self.plan {
            None => *self,
            Some((p, flip)) => PlaneRotation {
                angle: cfg.format().wrap(-self.angle),
                plan: Some((cfg.invert_plan(p), flip)),
            },
        }
    }
}

/// A rotation taking `(x, y)` to `(r, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Givens {
    /// `|(x, y)|`, from vectoring.
    pub r: i64,
    /// `atan2(y, x)`, from vectoring.
    pub theta: i64,
    /// Rotation by `-theta`.
    pub rotation: PlaneRotation,
}

/// Vectoring on `(x, y)` gives `r` and `theta`; the returned rotation by
/// `-theta` replays the vectoring directions and zeroes `y`. Pairs that are already `(x >= 0, 0)` give the exact
/// identity.
///
/// CORDIC resolves angles only to about `1/|v|` in LSB units, so the pair is
/// first shifted left until its larger component reaches `1/2`, and `r` is
/// shifted back afterwards.
pub fn givens_from(cfg: &CordicConfig, x: i64, y: i64) -> Result<Givens, CordicError> {
    if y == 0 && x >= 0 {
        return Ok(Givens {
            r: x,
            theta: 0,
            rotation: PlaneRotation::identity(),
        });
    }
    let shift = normalizing_shift(cfg, x, y);
    let (r, theta, plan) = cfg.vector_plan_raw(x << shift, y << shift);
    Ok(Givens {
        r: r >> shift,
        theta,
        rotation: PlaneRotation::from_plan(cfg.format().wrap(-theta), plan),
    })
}

/// Left shift that brings `max(|x|, |y|)` into `[1/2, 1)`, or 0 if it is
/// already at least `1/2`.
fn normalizing_shift(cfg: &CordicConfig, x: i64, y: i64) -> u32 {
    let m = x.unsigned_abs().max(y.unsigned_abs());
    if m == 0 {
        return 0;
    }
    let top = 63 - m.leading_zeros();
    (cfg.format().frac() - 1).saturating_sub(top)
}

/// `(|z|, arg z, rotation by -arg z)` for `z = re + j·im`. Applying the
/// rotation to `(re, im)` pairs multiplies them by `exp(-j·arg z)`.
pub fn phase_normalize(
    cfg: &CordicConfig,
    re: i64,
    im: i64,
) -> Result<(i64, i64, PlaneRotation), CordicError> {
    let g = givens_from(cfg, re, im)?;
    Ok((g.r, g.theta, g.rotation))
}
