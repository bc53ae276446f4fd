//! The global return map `P₁⁰` (linearization `A` plus optional quadratic
//! corrections), the `Σ1` membership constraint, the composed Poincaré map
//! `P = P₁⁰ ∘ P₀¹`, and its Jacobians: finite-difference with one Richardson
//! refinement, and the analytic chain rule including the implicit flight-time
//! derivative.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::FlightError;
use crate::local_dynamics::{self, Sigma0Point, Sigma1Point};
use crate::model::ModelSpec;

/// Per-image data flags. Out-of-section images are data, not errors: slab
/// iteration needs to detect departure, not crash.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionFlags {
    /// Whether the image satisfies the open `Σ0` constraints.
    pub in_sigma0: bool,
}

/// Result of one Poincaré return.
#[derive(Debug, Clone)]
pub struct PoincareResult {
    pub point: Sigma0Point,
    pub t_star: f64,
    pub flags: SectionFlags,
}

fn quad_form_raw(form: &[Vec<f64>], v: &DVector<f64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..v.len() {
        for j in 0..v.len() {
            // Symmetrized on the fly; equals v' * sym(Q) * v.
            acc += 0.5 * (form[i][j] + form[j][i]) * v[i] * v[j];
        }
    }
    acc
}

fn quad_grad_raw(form: &[Vec<f64>], v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for i in 0..v.len() {
        let mut acc = 0.0;
        for j in 0..v.len() {
            acc += (form[i][j] + form[j][i]) * v[j];
        }
        out[i] = acc;
    }
    out
}

/// The constraint function whose zero set is `Σ1`:
/// `B · p + quad_scale · pᵀ Q_y p` over `Σ1` offsets.
pub fn constraint_value(p: &Sigma1Point, spec: &ModelSpec) -> f64 {
    let b = &spec.global_map.b;
    let n = spec.n_unstable();
    let mut val = b[0] * p.x1 + b[1] * p.y1 + b[2] * p.z1;
    for j in 0..n {
        val += b[3 + j] * p.v_plus1[j];
    }
    for m in 0..spec.m_stable() {
        val += b[3 + n + m] * p.v_minus1[m];
    }
    if spec.global_map.quad_scale != 0.0 {
        if let Some(q) = &spec.global_map.quad {
            val += spec.global_map.quad_scale * quad_form_raw(&q.constraint, &p.to_vector());
        }
    }
    val
}

/// Gradient of the constraint with respect to the `Σ1` offsets.
pub fn constraint_gradient(p: &Sigma1Point, spec: &ModelSpec) -> DVector<f64> {
    let mut grad = spec.b_vector();
    if spec.global_map.quad_scale != 0.0 {
        if let Some(q) = &spec.global_map.quad {
            grad += spec.global_map.quad_scale * quad_grad_raw(&q.constraint, &p.to_vector());
        }
    }
    grad
}

/// Time derivative of the `Σ1` offsets along the local flow, evaluated at the
/// flow image of `w` at time `t`.
pub fn flow_time_derivative(w: &Sigma0Point, t: f64, spec: &ModelSpec) -> DVector<f64> {
    let s = &spec.spectrum;
    let p = local_dynamics::sigma1_offsets_at(w, t, spec);
    let g = &spec.geometry;
    let n = spec.n_unstable();
    let m = spec.m_stable();
    let mut out = DVector::zeros(3 + n + m);
    out[0] = -s.alpha * p.x1 - s.beta * p.y1;
    out[1] = s.beta * p.x1 - s.alpha * p.y1;
    out[2] = s.gamma * (p.z1 + g.eta);
    for j in 0..n {
        out[3 + j] = s.lambda_plus[j] * (p.v_plus1[j] + g.v_star_plus[j]);
    }
    for k in 0..m {
        out[3 + n + k] = -s.lambda_minus[k] * p.v_minus1[k];
    }
    out
}

/// Derivative of the constraint along the flight from `w`, used by the
/// Newton polish of the flight solver.
pub fn constraint_time_derivative(w: &Sigma0Point, t: f64, spec: &ModelSpec) -> f64 {
    let p = local_dynamics::sigma1_offsets_at(w, t, spec);
    constraint_gradient(&p, spec).dot(&flow_time_derivative(w, t, spec))
}

/// The global map `P₁⁰` on `Σ1` offsets: `A · p` plus the optional quadratic
/// correction, landing in `Σ0` offsets at `w(+)`. The image is returned even
/// when it violates the open `Σ0` constraints; the flag says which.
pub fn map_p10(p: &Sigma1Point, spec: &ModelSpec) -> (Sigma0Point, SectionFlags) {
    let v = p.to_vector();
    let mut image = spec.a_matrix() * &v;
    if spec.global_map.quad_scale != 0.0 {
        if let Some(q) = &spec.global_map.quad {
            for (i, form) in q.map.iter().enumerate() {
                image[i] += spec.global_map.quad_scale * quad_form_raw(form, &v);
            }
        }
    }
    let point = Sigma0Point::from_vector(&image, spec);
    let flags = SectionFlags {
        in_sigma0: point.in_section(spec),
    };
    (point, flags)
}

/// The full Poincaré return map `P = P₁⁰ ∘ P₀¹`.
pub fn poincare_map(w: &Sigma0Point, spec: &ModelSpec) -> Result<PoincareResult, FlightError> {
    let (p1, t_star) = local_dynamics::map_p01(w, spec)?;
    let (point, flags) = map_p10(&p1, spec);
    Ok(PoincareResult {
        point,
        t_star,
        flags,
    })
}

/// Analytic derivative of `P₀¹` at `w` with solved flight time `t_star`:
/// the partial flow derivative plus the rank-one flight-time correction from
/// implicit differentiation of the constraint.
pub fn dp01_analytic(w: &Sigma0Point, t_star: f64, spec: &ModelSpec) -> DMatrix<f64> {
    let s = &spec.spectrum;
    let n = spec.n_unstable();
    let m = spec.m_stable();
    let dim0 = spec.dim_sigma0();
    let dim1 = spec.dim_sigma1();

    let decay = (-s.alpha * t_star).exp();
    let (sin, cos) = (s.beta * t_star).sin_cos();
    let mut base = DMatrix::zeros(dim1, dim0);
    base[(0, 0)] = decay * cos;
    base[(1, 0)] = decay * sin;
    base[(2, 1)] = (s.gamma * t_star).exp();
    for j in 0..n {
        base[(3 + j, 2 + j)] = (s.lambda_plus[j] * t_star).exp();
    }
    for k in 0..m {
        base[(3 + n + k, 2 + n + k)] = (-s.lambda_minus[k] * t_star).exp();
    }

    let p = local_dynamics::sigma1_offsets_at(w, t_star, spec);
    let grad = constraint_gradient(&p, spec);
    let p_t = flow_time_derivative(w, t_star, spec);
    let denom = grad.dot(&p_t);
    let mut dt_dw = DVector::zeros(dim0);
    for k in 0..dim0 {
        let col = base.column(k);
        dt_dw[k] = -grad.dot(&col.into_owned()) / denom;
    }
    // Guard against g not depending on t at all; the caller has a solved
    // crossing, so a vanishing denominator means a tangential crossing.
    debug_assert!(denom.abs() > 0.0);

    base + p_t * dt_dw.transpose()
}

/// Derivative of `P₁⁰` at the `Σ1` offsets `p`.
pub fn dp10_analytic(p: &Sigma1Point, spec: &ModelSpec) -> DMatrix<f64> {
    let mut da = spec.a_matrix();
    if spec.global_map.quad_scale != 0.0 {
        if let Some(q) = &spec.global_map.quad {
            let v = p.to_vector();
            for (i, form) in q.map.iter().enumerate() {
                let grad = quad_grad_raw(form, &v);
                for j in 0..v.len() {
                    da[(i, j)] += spec.global_map.quad_scale * grad[j];
                }
            }
        }
    }
    da
}

/// Exact chain-rule Jacobian of the Poincaré map at `w`, including the
/// implicit flight-time term. Valid for any `quad_scale` because the map
/// family is closed form.
pub fn analytic_jacobian(
    w: &Sigma0Point,
    spec: &ModelSpec,
) -> Result<(DMatrix<f64>, f64), FlightError> {
    let (p1, t_star) = local_dynamics::map_p01(w, spec)?;
    let dp01 = dp01_analytic(w, t_star, spec);
    let dp10 = dp10_analytic(&p1, spec);
    Ok((dp10 * dp01, t_star))
}

fn fd_jacobian_with_step(
    w: &Sigma0Point,
    spec: &ModelSpec,
    h: f64,
    t_center: f64,
) -> Result<DMatrix<f64>, FlightError> {
    let dim = spec.dim_sigma0();
    let base = w.to_vector();
    let branch_guard = std::f64::consts::PI / (2.0 * spec.spectrum.beta);
    let mut jac = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let probe = |offset: f64| -> Result<DVector<f64>, FlightError> {
            let mut v = base.clone();
            v[k] += offset;
            let wp = Sigma0Point::from_vector(&v, spec);
            let result = poincare_map(&wp, spec).map_err(|e| FlightError::ProbeDeparture {
                index: k,
                offset,
                reason: e.to_string(),
            })?;
            if (result.t_star - t_center).abs() > branch_guard {
                return Err(FlightError::ProbeDeparture {
                    index: k,
                    offset,
                    reason: format!(
                        "flight time jumped from {t_center:.6} to {:.6}",
                        result.t_star
                    ),
                });
            }
            Ok(result.point.to_vector())
        };
        let plus = probe(h)?;
        let minus = probe(-h)?;
        let col = (plus - minus) / (2.0 * h);
        jac.set_column(k, &col);
    }
    Ok(jac)
}

/// Finite-difference Jacobian of the Poincaré map: central differences with
/// step `max(1e-6, 1e-7 ‖w‖)` and one Richardson refinement. Probes that
/// leave the domain or hop to a different constraint root are reported with
/// the offending coordinate.
pub fn jacobian_p(w: &Sigma0Point, spec: &ModelSpec) -> Result<DMatrix<f64>, FlightError> {
    let t_center = local_dynamics::flight_time(w, spec)?.t_star;
    let h = (1e-7 * w.to_vector().norm()).max(1e-6);
    let coarse = fd_jacobian_with_step(w, spec, h, t_center)?;
    let fine = fd_jacobian_with_step(w, spec, h / 2.0, t_center)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// Finite-difference Jacobian without Richardson refinement, exposed for
/// convergence-order tests.
pub fn jacobian_p_plain(
    w: &Sigma0Point,
    spec: &ModelSpec,
    h: f64,
) -> Result<DMatrix<f64>, FlightError> {
    let t_center = local_dynamics::flight_time(w, spec)?.t_star;
    fd_jacobian_with_step(w, spec, h, t_center)
}
