//! The exact linear flow inside the neighborhood `Ω` of the saddle, the
//! Poincaré sections `Σ0` and `Σ1`, and the local transition map `P₀¹` with
//! its flight time.
//!
//! `Σ0` points are stored as offsets from the homoclinic trace `w(+)`;
//! `Σ1` points as offsets from `w(-)`. `Σ1` itself is represented implicitly
//! through the constraint function of [`crate::global_map`].

use nalgebra::DVector;

use crate::error::FlightError;
use crate::global_map;
use crate::model::{ModelSpec, StateVec};

/// `Ω` is the box of half-width `OMEGA_FACTOR * eta`; the factor keeps the
/// whole local transit from `Σ0` to `Σ1` inside the linear region.
pub const OMEGA_FACTOR: f64 = 4.0;

/// A point of `Σ0` in offsets at `w(+)`: absolute coordinates are
/// `x = x* + x0`, `y = 0`, `z = z0`, `v⁺ = v_plus0`, `v⁻ = v*⁻ + v_minus0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sigma0Point {
    pub x0: f64,
    pub z0: f64,
    pub v_plus0: DVector<f64>,
    pub v_minus0: DVector<f64>,
}

impl Sigma0Point {
    pub fn zeros(spec: &ModelSpec) -> Self {
        Sigma0Point {
            x0: 0.0,
            z0: 0.0,
            v_plus0: DVector::zeros(spec.n_unstable()),
            v_minus0: DVector::zeros(spec.m_stable()),
        }
    }

    /// Absolute phase-space coordinates.
    pub fn to_state(&self, spec: &ModelSpec) -> StateVec {
        StateVec {
            x: spec.geometry.x_star + self.x0,
            y: 0.0,
            z: self.z0,
            v_plus: self.v_plus0.clone(),
            v_minus: DVector::from_column_slice(&spec.geometry.v_star_minus) + &self.v_minus0,
        }
    }

    /// Whether the absolute coordinates satisfy the open `Σ0` constraints.
    pub fn in_section(&self, spec: &ModelSpec) -> bool {
        let g = &spec.geometry;
        let s = &spec.spectrum;
        let x = g.x_star + self.x0;
        let x_lo = g.eta * (-2.0 * std::f64::consts::PI * s.alpha / s.beta).exp();
        let vm_abs = (DVector::from_column_slice(&g.v_star_minus) + &self.v_minus0).norm();
        x > x_lo
            && x < g.eta
            && self.z0 > 0.0
            && self.z0 < g.eta
            && self.v_plus0.norm() < g.eta
            && vm_abs < g.eta
    }

    /// Flattened coordinates `(x0, z0, v_plus0, v_minus0)`.
    pub fn to_vector(&self) -> DVector<f64> {
        let mut out = DVector::zeros(2 + self.v_plus0.len() + self.v_minus0.len());
        out[0] = self.x0;
        out[1] = self.z0;
        out.rows_mut(2, self.v_plus0.len()).copy_from(&self.v_plus0);
        out.rows_mut(2 + self.v_plus0.len(), self.v_minus0.len())
            .copy_from(&self.v_minus0);
        out
    }

    pub fn from_vector(v: &DVector<f64>, spec: &ModelSpec) -> Self {
        let n = spec.n_unstable();
        let m = spec.m_stable();
        Sigma0Point {
            x0: v[0],
            z0: v[1],
            v_plus0: v.rows(2, n).into_owned(),
            v_minus0: v.rows(2 + n, m).into_owned(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x0.is_finite()
            && self.z0.is_finite()
            && self.v_plus0.iter().all(|v| v.is_finite())
            && self.v_minus0.iter().all(|v| v.is_finite())
    }
}

/// A point of `Σ1` in offsets at `w(-)`: absolute coordinates are
/// `x = x1`, `y = y1`, `z = eta + z1`, `v⁺ = v*⁺ + v_plus1`, `v⁻ = v_minus1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sigma1Point {
    pub x1: f64,
    pub y1: f64,
    pub z1: f64,
    pub v_plus1: DVector<f64>,
    pub v_minus1: DVector<f64>,
}

impl Sigma1Point {
    /// Flattened offsets `(x1, y1, z1, v_plus1, v_minus1)`.
    pub fn to_vector(&self) -> DVector<f64> {
        let mut out = DVector::zeros(3 + self.v_plus1.len() + self.v_minus1.len());
        out[0] = self.x1;
        out[1] = self.y1;
        out[2] = self.z1;
        out.rows_mut(3, self.v_plus1.len()).copy_from(&self.v_plus1);
        out.rows_mut(3 + self.v_plus1.len(), self.v_minus1.len())
            .copy_from(&self.v_minus1);
        out
    }

    pub fn from_vector(v: &DVector<f64>, spec: &ModelSpec) -> Self {
        let n = spec.n_unstable();
        let m = spec.m_stable();
        Sigma1Point {
            x1: v[0],
            y1: v[1],
            z1: v[2],
            v_plus1: v.rows(3, n).into_owned(),
            v_minus1: v.rows(3 + n, m).into_owned(),
        }
    }

    /// Absolute phase-space coordinates.
    pub fn to_state(&self, spec: &ModelSpec) -> StateVec {
        StateVec {
            x: self.x1,
            y: self.y1,
            z: spec.geometry.eta + self.z1,
            v_plus: DVector::from_column_slice(&spec.geometry.v_star_plus) + &self.v_plus1,
            v_minus: self.v_minus1.clone(),
        }
    }
}

/// Flight solve result: the smallest admissible crossing time and the `Σ1`
/// offsets of the image.
#[derive(Debug, Clone)]
pub struct FlightResult {
    pub t_star: f64,
    pub point: Sigma1Point,
}

/// Closed-form linear flow: the focus pair rotates at rate `beta` while
/// contracting at rate `alpha`, `z` expands at rate `gamma`, and the extra
/// modes evolve by their diagonal exponentials. Negative `t` flows backward.
pub fn local_flow(w: &StateVec, t: f64, spec: &ModelSpec) -> Result<StateVec, FlightError> {
    if !w.is_finite() || !t.is_finite() {
        return Err(FlightError::NonFinite { t });
    }
    let bound = OMEGA_FACTOR * spec.geometry.eta;
    if w.x.abs() >= bound
        || w.y.abs() >= bound
        || w.z.abs() >= bound
        || w.v_plus.norm() >= bound
        || w.v_minus.norm() >= bound
    {
        return Err(FlightError::PreconditionViolated {
            reason: format!("state outside the linearization box of half-width {bound}"),
        });
    }
    let s = &spec.spectrum;
    let decay = (-s.alpha * t).exp();
    let (sin, cos) = (s.beta * t).sin_cos();
    Ok(StateVec {
        x: decay * (w.x * cos - w.y * sin),
        y: decay * (w.x * sin + w.y * cos),
        z: w.z * (s.gamma * t).exp(),
        v_plus: DVector::from_fn(w.v_plus.len(), |j, _| {
            w.v_plus[j] * (s.lambda_plus[j] * t).exp()
        }),
        v_minus: DVector::from_fn(w.v_minus.len(), |j, _| {
            w.v_minus[j] * (-s.lambda_minus[j] * t).exp()
        }),
    })
}

/// `Σ1` offsets of the flow image of a `Σ0` point after time `t`, in closed
/// form. No domain checks: this is the raw representation of `P₀¹` used by
/// the flight solver and by the map itself.
pub fn sigma1_offsets_at(w: &Sigma0Point, t: f64, spec: &ModelSpec) -> Sigma1Point {
    let s = &spec.spectrum;
    let g = &spec.geometry;
    let radius = (-s.alpha * t).exp() * (w.x0 + g.x_star);
    let (sin, cos) = (s.beta * t).sin_cos();
    Sigma1Point {
        x1: radius * cos,
        y1: radius * sin,
        z1: w.z0 * (s.gamma * t).exp() - g.eta,
        v_plus1: DVector::from_fn(spec.n_unstable(), |j, _| {
            (s.lambda_plus[j] * t).exp() * w.v_plus0[j] - g.v_star_plus[j]
        }),
        v_minus1: DVector::from_fn(spec.m_stable(), |j, _| {
            (-s.lambda_minus[j] * t).exp() * (w.v_minus0[j] + g.v_star_minus[j])
        }),
    }
}

/// Constraint value along the flight from `w` at time `t`; roots are the
/// `Σ1` crossings.
pub fn flight_constraint(w: &Sigma0Point, t: f64, spec: &ModelSpec) -> f64 {
    global_map::constraint_value(&sigma1_offsets_at(w, t, spec), spec)
}

/// Search window for the flight time of `w`: the image must climb from
/// `z(0)` to the vicinity of `eta`, which pins `t*` near
/// `ln(eta / z0) / gamma`.
pub fn flight_window(w: &Sigma0Point, spec: &ModelSpec) -> (f64, f64) {
    let g = spec.spectrum.gamma;
    let eta = spec.geometry.eta;
    let t_min = ((eta / 2.0) / w.z0).ln() / g;
    let t_max = ((2.0 * eta) / w.z0).ln() / g + 4.0 * std::f64::consts::PI / spec.spectrum.beta;
    (t_min.max(0.0), t_max)
}

/// Solves for the smallest admissible crossing time of `Σ1`.
///
/// Brackets by scanning the constraint sign on a grid fine enough to resolve
/// the rotation (step `(π/beta)/8`), refines by bisection and polishes with
/// a bracket-safeguarded 1-D Newton. Fails with [`FlightError::NoCrossing`]
/// when no sign change exists in the window.
pub fn flight_time(w: &Sigma0Point, spec: &ModelSpec) -> Result<FlightResult, FlightError> {
    if !w.is_finite() {
        return Err(FlightError::NonFinite { t: f64::NAN });
    }
    if w.z0 <= 0.0 {
        return Err(FlightError::PreconditionViolated {
            reason: format!("z0 must be strictly positive, found {}", w.z0),
        });
    }
    if !w.in_section(spec) {
        return Err(FlightError::PreconditionViolated {
            reason: "point violates the open Σ0 constraints".to_string(),
        });
    }
    let (t_min, t_max) = flight_window(w, spec);
    let step = std::f64::consts::PI / spec.spectrum.beta / 8.0;
    let g = |t: f64| flight_constraint(w, t, spec);

    // Coarse scan for the first sign change.
    let mut evals = 0usize;
    let mut t_prev = t_min;
    let mut g_prev = g(t_prev);
    evals += 1;
    if !g_prev.is_finite() {
        return Err(FlightError::NonFinite { t: t_prev });
    }
    let mut bracket = None;
    if g_prev == 0.0 {
        bracket = Some((t_prev, t_prev));
    }
    let mut t = t_min;
    while bracket.is_none() && t < t_max {
        t = (t + step).min(t_max);
        let g_t = g(t);
        evals += 1;
        if !g_t.is_finite() {
            return Err(FlightError::NonFinite { t });
        }
        if g_t == 0.0 {
            bracket = Some((t, t));
            break;
        }
        if g_prev.signum() != g_t.signum() {
            bracket = Some((t_prev, t));
            break;
        }
        t_prev = t;
        g_prev = g_t;
    }
    let (mut lo, mut hi) = bracket.ok_or(FlightError::NoCrossing {
        t_min,
        t_max,
        evals,
    })?;

    // Bisection.
    if lo < hi {
        let mut g_lo = g(lo);
        for _ in 0..200 {
            if hi - lo <= 1e-15 * hi.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let g_mid = g(mid);
            if g_mid == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if g_lo.signum() != g_mid.signum() {
                hi = mid;
            } else {
                lo = mid;
                g_lo = g_mid;
            }
        }
    }

    // Newton polish, clipped to the bracket so it cannot escape to another
    // root.
    let mut t_star = 0.5 * (lo + hi);
    for _ in 0..8 {
        let p = sigma1_offsets_at(w, t_star, spec);
        let value = global_map::constraint_value(&p, spec);
        let slope = global_map::constraint_time_derivative(w, t_star, spec);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let mut next = t_star - value / slope;
        if !(next >= lo && next <= hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t_star).abs() <= f64::EPSILON * t_star.max(1.0) {
            t_star = next;
            break;
        }
        t_star = next;
    }

    let point = sigma1_offsets_at(w, t_star, spec);
    let residual = global_map::constraint_value(&point, spec);
    if residual.abs() > spec.tolerances.root_tol {
        return Err(FlightError::NoCrossing {
            t_min,
            t_max,
            evals,
        });
    }
    Ok(FlightResult { t_star, point })
}

/// The local map `P₀¹`: flight solve followed by the closed-form image.
pub fn map_p01(w: &Sigma0Point, spec: &ModelSpec) -> Result<(Sigma1Point, f64), FlightError> {
    let flight = flight_time(w, spec)?;
    Ok((flight.point, flight.t_star))
}
