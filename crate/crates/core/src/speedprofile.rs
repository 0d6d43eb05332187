//! Lower convex hull of operating points and two-speed profiles.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("no operating points given")]
    Empty,
    #[error("speed {0} appears more than once")]
    DuplicateSpeed(f64),
    #[error("operating point ({speed}, {power}) is not finite and positive")]
    BadPoint { speed: f64, power: f64 },
    #[error("infeasible demand {demand}: fastest level is {max}")]
    InfeasibleDemand { demand: f64, max: f64 },
    #[error("speed {0} is not in the level set")]
    UnknownSpeed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedPoint {
    pub speed: f64,
    /// Active power in mW.
    pub power: f64,
}

impl SpeedPoint {
    pub fn new(speed: f64, power: f64) -> Self {
        Self { speed, power }
    }
}

fn sorted_points(points: &[SpeedPoint]) -> Result<Vec<SpeedPoint>, ProfileError> {
    if points.is_empty() {
        return Err(ProfileError::Empty);
    }
    for p in points {
        if !(p.speed.is_finite() && p.power.is_finite() && p.speed >= 0.0 && p.power >= 0.0) {
            return Err(ProfileError::BadPoint {
                speed: p.speed,
                power: p.power,
            });
        }
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.speed.total_cmp(&b.speed));
    if let Some(w) = pts.windows(2).find(|w| w[0].speed == w[1].speed) {
        return Err(ProfileError::DuplicateSpeed(w[0].speed));
    }
    Ok(pts)
}

/// Lower convex envelope, sorted by speed. Points lying exactly on a hull
/// edge are kept, so the slowest adequate pair is always available.
pub fn lower_hull(points: &[SpeedPoint]) -> Result<Vec<SpeedPoint>, ProfileError> {
    let pts = sorted_points(points)?;
    let mut hull: Vec<SpeedPoint> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.speed - a.speed) * (p.power - a.power) - (b.power - a.power) * (p.speed - a.speed);
            if cross < 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    Ok(hull)
}

/// Piecewise-linear hull power at `speed`, which must lie in the hull's range.
pub fn hull_power(hull: &[SpeedPoint], speed: f64) -> f64 {
    match hull.iter().position(|p| p.speed >= speed) {
        Some(0) | None => hull.iter().min_by(|a, b| (a.speed - speed).abs().total_cmp(&(b.speed - speed).abs())).unwrap().power,
        Some(k) => {
            let (a, b) = (hull[k - 1], hull[k]);
            let t = (speed - a.speed) / (b.speed - a.speed);
            a.power + t * (b.power - a.power)
        }
    }
}

/// `lambda` of the interval at `low`, the rest at `high`, lower speed first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSpeedProfile {
    pub low: SpeedPoint,
    pub high: SpeedPoint,
    pub lambda: f64,
    pub t0: f64,
    pub tf: f64,
}

impl TwoSpeedProfile {
    /// No work: the whole interval idles at `idle_power`.
    pub fn idle(t0: f64, tf: f64, idle_power: f64) -> Self {
        let p = SpeedPoint::new(0.0, idle_power);
        Self {
            low: p,
            high: p,
            lambda: 1.0,
            t0,
            tf,
        }
    }

    pub fn duration(&self) -> f64 {
        self.tf - self.t0
    }

    pub fn is_idle(&self) -> bool {
        self.low.speed == 0.0 && self.high.speed == 0.0
    }

    pub fn average_speed(&self) -> f64 {
        self.lambda * self.low.speed + (1.0 - self.lambda) * self.high.speed
    }

    pub fn average_power(&self) -> f64 {
        self.lambda * self.low.power + (1.0 - self.lambda) * self.high.power
    }

    pub fn work(&self) -> f64 {
        self.duration() * self.average_speed()
    }

    pub fn energy(&self) -> f64 {
        self.duration() * self.average_power()
    }

    /// The switch instant between the two speeds.
    pub fn switch_time(&self) -> f64 {
        self.t0 + self.lambda * self.duration()
    }
}

/// Cheapest way to average `demand` over a unit interval using the given
/// levels. Below the slowest level the job runs at that level and idles at
/// `idle_power` for the rest; a zero demand idles throughout.
pub fn two_speed_for_demand(
    points: &[SpeedPoint],
    demand: f64,
    idle_power: f64,
) -> Result<TwoSpeedProfile, ProfileError> {
    let hull = lower_hull(points)?;
    let (first, last) = (hull[0], *hull.last().unwrap());
    if demand > last.speed + 1e-12 {
        return Err(ProfileError::InfeasibleDemand {
            demand,
            max: last.speed,
        });
    }
    if demand <= 0.0 {
        return Ok(TwoSpeedProfile::idle(0.0, 1.0, idle_power));
    }
    let single = |p: SpeedPoint| TwoSpeedProfile {
        low: p,
        high: p,
        lambda: 1.0,
        t0: 0.0,
        tf: 1.0,
    };
    if demand < first.speed {
        return Ok(TwoSpeedProfile {
            low: SpeedPoint::new(0.0, idle_power),
            high: first,
            lambda: 1.0 - demand / first.speed,
            t0: 0.0,
            tf: 1.0,
        });
    }
    let demand = demand.min(last.speed);
    if let Some(p) = hull.iter().find(|p| p.speed == demand) {
        return Ok(single(*p));
    }
    let k = hull.iter().position(|p| p.speed > demand).expect("demand inside hull range");
    let (low, high) = (hull[k - 1], hull[k]);
    Ok(TwoSpeedProfile {
        low,
        high,
        lambda: (high.speed - demand) / (high.speed - low.speed),
        t0: 0.0,
        tf: 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSegment {
    pub duration: f64,
    pub speed: f64,
}

/// Replace a piecewise-constant profile by at most one switch between two
/// of the speeds it already uses, keeping the work and not raising energy.
pub fn compress_profile(
    segments: &[ProfileSegment],
    points: &[SpeedPoint],
) -> Result<TwoSpeedProfile, ProfileError> {
    let total: f64 = segments.iter().map(|s| s.duration).sum();
    let mut used: Vec<SpeedPoint> = Vec::new();
    for seg in segments.iter().filter(|s| s.duration > 0.0) {
        let p = points
            .iter()
            .find(|p| p.speed == seg.speed)
            .ok_or(ProfileError::UnknownSpeed(seg.speed))?;
        if !used.iter().any(|u| u.speed == p.speed) {
            used.push(*p);
        }
    }
    if used.is_empty() {
        return Ok(TwoSpeedProfile::idle(0.0, total.max(0.0), 0.0));
    }
    let work: f64 = segments.iter().map(|s| s.duration * s.speed).sum();
    let hull = lower_hull(&used)?;
    let demand = (work / total).clamp(hull[0].speed, hull.last().unwrap().speed);
    let mut profile = two_speed_for_demand(&hull, demand, 0.0)?;
    profile.tf = total;
    Ok(profile)
}
