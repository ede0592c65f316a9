//! Classical stroboscopic map of the kicked particle in the finite square
//! well: impulsive kick at integer times, then event-driven free flight with
//! energy-conserving barrier crossings and elastic reflections.
//!
//! The flight is exact: within each region the speed is constant; at a region
//! edge the particle either crosses with `|p| → √(p² − 2ΔV)` (kinetic energy
//! above the step, sign of motion kept) or reflects (`p → −p`). Degenerate
//! hits with kinetic energy exactly equal to the step transmit with `p = 0`.

use alloc::vec::Vec;
use core::fmt;

use crate::fmath;
use crate::model::{eval_square_well, reduce_angle, ModelParams};
use crate::rng::SplitMix64;
use crate::TWO_PI;

/// Safety limit on region-edge events per flight.
const EVENT_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    /// Angle in `[0, 2π)`.
    pub theta: f64,
    pub p: f64,
    pub kick_index: u64,
}

impl ClassicalState {
    pub fn new(theta: f64, p: f64) -> Self {
        Self { theta: reduce_angle(theta), p, kick_index: 0 }
    }

    /// Total energy `p²/2 + V_sq(θ)`.
    pub fn energy(&self, params: &ModelParams) -> f64 {
        0.5 * self.p * self.p + eval_square_well(params, self.theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassicalError {
    /// Pathological chatter: too many region-edge events in one period.
    EventLimit { events: usize },
}

impl fmt::Display for ClassicalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassicalError::EventLimit { events } => {
                write!(f, "free flight exceeded {events} interface events")
            }
        }
    }
}

impl core::error::Error for ClassicalError {}

/// Impulse from the kick potential: `p ← p + k sinθ`, position unchanged.
pub fn kick_update(s: &ClassicalState, params: &ModelParams) -> ClassicalState {
    ClassicalState {
        theta: s.theta,
        p: s.p + params.k * fmath::sin(s.theta),
        kick_index: s.kick_index,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Well,
    Barrier,
}

fn positive_mod(x: f64) -> f64 {
    let r = x % TWO_PI;
    if r < 0.0 {
        r + TWO_PI
    } else {
        r
    }
}

/// Free flight for one kick period under the stationary potential.
pub fn free_flight(
    s: &ClassicalState,
    params: &ModelParams,
) -> Result<ClassicalState, ClassicalError> {
    let spec = params.potential_spec();
    let (a, b) = (spec.barrier_start, spec.barrier_end);
    let mut theta = reduce_angle(s.theta);
    let mut p = s.p;
    let mut region = if params.v0 == 0.0 {
        Region::Well
    } else if theta >= a && theta < b {
        Region::Barrier
    } else {
        Region::Well
    };
    let mut t_left = 1.0;
    let mut events = 0usize;

    if params.v0 == 0.0 {
        // free rotor
        return Ok(ClassicalState {
            theta: reduce_angle(theta + p * t_left),
            p,
            kick_index: s.kick_index,
        });
    }

    while p != 0.0 && t_left > 0.0 {
        let moving_right = p > 0.0;
        let speed = fmath::abs(p);
        // distance to the next interface in the direction of motion
        let (dist, boundary, next_region) = match (region, moving_right) {
            (Region::Barrier, true) => (b - theta, b, Region::Well),
            (Region::Barrier, false) => (theta - a, a, Region::Well),
            (Region::Well, true) => (positive_mod(a - theta), a, Region::Barrier),
            (Region::Well, false) => (positive_mod(theta - b), b, Region::Barrier),
        };
        let t_hit = dist / speed;
        if t_hit >= t_left {
            theta = reduce_angle(theta + p * t_left);
            break;
        }
        t_left -= t_hit;
        theta = reduce_angle(boundary);
        let step = match next_region {
            Region::Barrier => params.v0,
            Region::Well => -params.v0,
        };
        let kinetic = 0.5 * p * p;
        if kinetic >= step {
            let sign = if moving_right { 1.0 } else { -1.0 };
            p = sign * fmath::sqrt(p * p - 2.0 * step);
            region = next_region;
        } else {
            p = -p;
        }
        events += 1;
        if events > EVENT_LIMIT {
            return Err(ClassicalError::EventLimit { events });
        }
    }

    Ok(ClassicalState { theta, p, kick_index: s.kick_index })
}

/// One period of the stroboscopic map: kick at the integer time, flight after.
pub fn period_map(
    s: &ClassicalState,
    params: &ModelParams,
) -> Result<ClassicalState, ClassicalError> {
    let kicked = kick_update(s, params);
    let mut flown = free_flight(&kicked, params)?;
    flown.kick_index = s.kick_index + 1;
    Ok(flown)
}

/// Phase-space points sampled once per period, trajectory-major.
#[derive(Debug, Clone)]
pub struct SectionCloud {
    pub points: Vec<(f64, f64)>,
    pub ensemble_size: usize,
    pub steps: usize,
}

impl SectionCloud {
    /// (trajectory, step) of point `i`.
    pub fn id_of(&self, i: usize) -> (usize, usize) {
        (i / self.steps, i % self.steps)
    }
}

/// Iterate the period map over an ensemble, recording one point per period.
pub fn stroboscopic_section(
    ensemble: &[ClassicalState],
    params: &ModelParams,
    steps: usize,
) -> Result<SectionCloud, ClassicalError> {
    assert!(!ensemble.is_empty(), "empty ensemble");
    let mut points = Vec::with_capacity(ensemble.len() * steps);
    for start in ensemble {
        let mut s = *start;
        for _ in 0..steps {
            s = period_map(&s, params)?;
            points.push((s.theta, s.p));
        }
    }
    Ok(SectionCloud { points, ensemble_size: ensemble.len(), steps })
}

/// Stratified ensemble over the window `[0, 2π) × [−p_max, p_max]`: evenly
/// spaced momentum strata with seeded jitter, seeded-uniform angles.
pub fn stratified_ensemble(seed: u64, n: usize, p_max: f64) -> Vec<ClassicalState> {
    let mut rng = SplitMix64::new(seed);
    let stratum = 2.0 * p_max / n as f64;
    (0..n)
        .map(|i| {
            let theta = TWO_PI * rng.next_f64();
            let jitter = (rng.next_f64() - 0.5) * 0.5 * stratum;
            let p = -p_max + (i as f64 + 0.5) * stratum + jitter;
            ClassicalState::new(theta, p)
        })
        .collect()
}

/// Fraction of grid cells inside the window `[0, 2π) × [−p_max, p_max]`
/// visited by at least one point.
pub fn coverage_fraction(
    cloud: &SectionCloud,
    grid_theta: usize,
    grid_p: usize,
    p_max: f64,
) -> f64 {
    assert!(grid_theta >= 32 && grid_p >= 32, "grid must be at least 32×32");
    let mut visited = alloc::vec![false; grid_theta * grid_p];
    for &(theta, p) in &cloud.points {
        if fmath::abs(p) > p_max {
            continue;
        }
        let ti = ((theta / TWO_PI) * grid_theta as f64) as usize;
        let ti = ti.min(grid_theta - 1);
        let pi = (((p + p_max) / (2.0 * p_max)) * grid_p as f64) as usize;
        let pi = pi.min(grid_p - 1);
        visited[ti * grid_p + pi] = true;
    }
    visited.iter().filter(|&&v| v).count() as f64 / (grid_theta * grid_p) as f64
}
