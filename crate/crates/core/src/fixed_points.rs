//! Fixed points of the Poincaré map: the leading-order family obtained from
//! the reduced root equation `Δ₁ cos(βt) + Δ₂ sin(βt) = 0`, and Newton
//! refinement of the full system combining the exact global map with the
//! section constraint.

use nalgebra::{DMatrix, DVector};

use crate::error::{FixedPointError, ModelError};
use crate::global_map;
use crate::local_dynamics::{Sigma0Point, Sigma1Point};
use crate::model::{ModelSpec, COND_BOUND, DEGENERACY_TOL};

/// Leading-order data extracted from `A` and `B`.
#[derive(Debug, Clone)]
pub struct LeadingOrderData {
    /// `(z, v⁺) × (z, v⁺)` block of `A`, size `(1+N)²`.
    pub c: DMatrix<f64>,
    /// `(z, v⁺) × (x, y)` block of `A`, size `(1+N) × 2`.
    pub d: DMatrix<f64>,
    pub delta1: f64,
    pub delta2: f64,
    /// `arctan(Δ₁/Δ₂)`, with `φ = π/2` when `Δ₂ = 0`.
    pub phi: f64,
}

/// Rescaled Shilnikov coordinates of a fixed point: the raw coordinates are
/// recovered by multiplying each hatted value by `e^{-alpha t*}`.
#[derive(Debug, Clone)]
pub struct RescaledCoords {
    pub t_star: f64,
    pub x0_hat: f64,
    pub vm0_hat: DVector<f64>,
    pub z1_hat: f64,
    pub vp1_hat: DVector<f64>,
}

/// One refined fixed point of the Poincaré map.
#[derive(Debug, Clone)]
pub struct FixedPointRecord {
    pub ell: usize,
    /// Converged flight time `T^(ℓ)`.
    pub t_ell: f64,
    pub coords: RescaledCoords,
    pub raw: Sigma0Point,
    /// Independent re-check `‖P(raw) - raw‖`, or the final Newton residual
    /// when the re-check flight fails.
    pub residual: f64,
    pub newton_iters: usize,
    pub converged: bool,
}

impl FixedPointRecord {
    /// Raw `Σ1` offsets of the fixed point's local image.
    pub fn sigma1_offsets(&self, spec: &ModelSpec) -> Sigma1Point {
        let s = &spec.spectrum;
        let scale = (-s.alpha * self.t_ell).exp();
        let radius = scale * (self.raw.x0 + spec.geometry.x_star);
        let (sin, cos) = (s.beta * self.t_ell).sin_cos();
        Sigma1Point {
            x1: radius * cos,
            y1: radius * sin,
            z1: self.coords.z1_hat * scale,
            v_plus1: &self.coords.vp1_hat * scale,
            v_minus1: DVector::from_fn(spec.m_stable(), |k, _| {
                (-s.lambda_minus[k] * self.t_ell).exp()
                    * (self.raw.v_minus0[k] + spec.geometry.v_star_minus[k])
            }),
        }
    }
}

/// Result of a family sweep with the empirically discovered threshold `ℓ₀`:
/// the smallest index from which every requested record converged.
#[derive(Debug, Clone)]
pub struct FixedPointFamily {
    pub records: Vec<FixedPointRecord>,
    pub ell_0: Option<usize>,
}

impl FixedPointFamily {
    pub fn record(&self, ell: usize) -> Option<&FixedPointRecord> {
        self.records.iter().find(|r| r.ell == ell)
    }
}

/// The `(z, v⁺) × (z, v⁺)` block of `A`.
pub(crate) fn c_block(spec: &ModelSpec) -> DMatrix<f64> {
    let n = spec.n_unstable();
    DMatrix::from_fn(1 + n, 1 + n, |i, j| spec.global_map.a[1 + i][2 + j])
}

/// The `(z, v⁺) × (x, y)` block of `A`.
pub(crate) fn d_block(spec: &ModelSpec) -> DMatrix<f64> {
    let n = spec.n_unstable();
    DMatrix::from_fn(1 + n, 2, |i, j| spec.global_map.a[1 + i][j])
}

/// `Δ₁, Δ₂` assuming `C` is invertible.
pub(crate) fn deltas_unchecked(spec: &ModelSpec) -> (f64, f64) {
    let n = spec.n_unstable();
    let c = c_block(spec);
    let d = d_block(spec);
    let cinv_d = c.lu().solve(&d).expect("C invertibility checked by caller");
    let b = &spec.global_map.b;
    let b_zv = DVector::from_fn(1 + n, |i, _| b[2 + i]);
    let red = DVector::from_column_slice(&[b[0], b[1]]) - cinv_d.transpose() * b_zv;
    let x_star = spec.geometry.x_star;
    (x_star * red[0], x_star * red[1])
}

/// Principal-branch `arctan(Δ₁/Δ₂)` with the `Δ₂ = 0 → π/2` convention.
/// Only `φ mod π` matters: the family index absorbs branch shifts.
pub(crate) fn phi_from_deltas(delta1: f64, delta2: f64) -> f64 {
    if delta2 == 0.0 {
        std::f64::consts::FRAC_PI_2
    } else {
        (delta1 / delta2).atan()
    }
}

/// Extracts `C`, `D`, `Δ₁`, `Δ₂` and `φ`, failing on a singular `C`
/// (Lemma 3) or on simultaneously vanishing deltas (assumption A5).
pub fn leading_order_data(spec: &ModelSpec) -> Result<LeadingOrderData, ModelError> {
    let c = c_block(spec);
    let svd = c.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let cond = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !cond.is_finite() || cond >= COND_BOUND {
        return Err(ModelError::SingularC { cond });
    }
    let (delta1, delta2) = deltas_unchecked(spec);
    let b_norm = spec
        .global_map
        .b
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let scale = spec.geometry.x_star.abs() * b_norm;
    if delta1.hypot(delta2) <= DEGENERACY_TOL * scale.max(1e-300) {
        return Err(ModelError::DegenerateDeltas);
    }
    let phi = phi_from_deltas(delta1, delta2);
    Ok(LeadingOrderData {
        c,
        d: d_block(spec),
        delta1,
        delta2,
        phi,
    })
}

/// Leading-order root of the reduced equation for index `ell`.
pub fn leading_return_time(ell: usize, phi: f64, beta: f64) -> f64 {
    (ell as f64 * std::f64::consts::PI - phi) / beta
}

/// Leading-order fixed point in rescaled coordinates: flight time from the
/// reduced root equation, `(ẑ, v̂⁺)` from the `C`/`D` solve, and
/// `(x̂, v̂⁻)` read off the matching rows of `A`.
pub fn leading_fixed_point(ell: usize, spec: &ModelSpec) -> Result<RescaledCoords, ModelError> {
    let lod = leading_order_data(spec)?;
    let s = &spec.spectrum;
    let n = spec.n_unstable();
    let m = spec.m_stable();
    let t_star = leading_return_time(ell, lod.phi, s.beta);
    let (sin, cos) = (s.beta * t_star).sin_cos();
    let x_star = spec.geometry.x_star;
    let rhs = DVector::from_column_slice(&[x_star * cos, x_star * sin]);
    let zv = -(lod.c.lu().solve(&(&lod.d * &rhs)).expect("C invertible"));

    // Assemble the leading Σ1 offset vector (x*cos, x*sin, ẑ, v̂⁺, 0).
    let dim1 = spec.dim_sigma1();
    let mut q = DVector::zeros(dim1);
    q[0] = rhs[0];
    q[1] = rhs[1];
    q[2] = zv[0];
    for j in 0..n {
        q[3 + j] = zv[1 + j];
    }
    let a = spec.a_matrix();
    let x0_hat = (a.row(0) * &q)[0];
    let vm0_hat = DVector::from_fn(m, |k, _| (a.row(2 + n + k) * &q)[0]);

    Ok(RescaledCoords {
        t_star,
        x0_hat,
        vm0_hat,
        z1_hat: zv[0],
        vp1_hat: DVector::from_fn(n, |j, _| zv[1 + j]),
    })
}

/// Unknown layout for the Newton solve: `(t, x0, v⁻0, z1, v⁺1)`.
struct Unknowns<'a> {
    u: &'a DVector<f64>,
    n: usize,
    m: usize,
}

impl<'a> Unknowns<'a> {
    fn t(&self) -> f64 {
        self.u[0]
    }
    fn x0(&self) -> f64 {
        self.u[1]
    }
    fn vm0(&self) -> DVector<f64> {
        self.u.rows(2, self.m).into_owned()
    }
    fn z1(&self) -> f64 {
        self.u[2 + self.m]
    }
    fn vp1(&self) -> DVector<f64> {
        self.u.rows(3 + self.m, self.n).into_owned()
    }
}

/// Σ1 offsets generated by the unknowns: the `(x1, y1, v⁻1)` components come
/// from the local-map formulas, `(z1, v⁺1)` are unknowns themselves.
fn sigma1_from_unknowns(u: &Unknowns, spec: &ModelSpec) -> Sigma1Point {
    let s = &spec.spectrum;
    let g = &spec.geometry;
    let t = u.t();
    let radius = (-s.alpha * t).exp() * (u.x0() + g.x_star);
    let (sin, cos) = (s.beta * t).sin_cos();
    let vm0 = u.vm0();
    Sigma1Point {
        x1: radius * cos,
        y1: radius * sin,
        z1: u.z1(),
        v_plus1: u.vp1(),
        v_minus1: DVector::from_fn(spec.m_stable(), |k, _| {
            (-s.lambda_minus[k] * t).exp() * (vm0[k] + g.v_star_minus[k])
        }),
    }
}

/// Residual of the full fixed-point system: the `(x, z, v⁺, v⁻)` rows of the
/// return condition with the exact global map, plus the constraint.
fn fixed_point_residual(u_vec: &DVector<f64>, spec: &ModelSpec) -> DVector<f64> {
    let n = spec.n_unstable();
    let m = spec.m_stable();
    let u = Unknowns { u: u_vec, n, m };
    let s = &spec.spectrum;
    let g = &spec.geometry;
    let t = u.t();

    let p = sigma1_from_unknowns(&u, spec);
    let (image, _) = global_map::map_p10(&p, spec);

    let mut f = DVector::zeros(spec.dim_sigma1());
    f[0] = image.x0 - u.x0();
    f[1] = image.z0 - (u.z1() + g.eta) * (-s.gamma * t).exp();
    let vp1 = u.vp1();
    for j in 0..n {
        f[2 + j] = image.v_plus0[j] - (-s.lambda_plus[j] * t).exp() * (vp1[j] + g.v_star_plus[j]);
    }
    let vm0 = u.vm0();
    for k in 0..m {
        f[2 + n + k] = image.v_minus0[k] - vm0[k];
    }
    f[2 + n + m] = global_map::constraint_value(&p, spec);
    f
}

/// Central-difference Jacobian of the residual. The system is quadratic in
/// every unknown except `t`, so modest steps are exact there.
fn fixed_point_jacobian(u: &DVector<f64>, spec: &ModelSpec) -> DMatrix<f64> {
    let dim = u.len();
    let eta = spec.geometry.eta;
    let mut jac = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let h = if k == 0 {
            1e-7 * u[0].abs().max(1.0)
        } else {
            1e-6 * u[k].abs().max(1e-2 * eta)
        };
        let mut up = u.clone();
        let mut dn = u.clone();
        up[k] += h;
        dn[k] -= h;
        let col = (fixed_point_residual(&up, spec) - fixed_point_residual(&dn, spec)) / (2.0 * h);
        jac.set_column(k, &col);
    }
    jac
}

fn equilibrated_solve(jac: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let dim = jac.nrows();
    let mut scaled = jac.clone();
    let mut b = rhs.clone();
    for i in 0..dim {
        let row_max = (0..dim).map(|j| jac[(i, j)].abs()).fold(0.0f64, f64::max);
        if row_max > 0.0 {
            for j in 0..dim {
                scaled[(i, j)] /= row_max;
            }
            b[i] /= row_max;
        }
    }
    scaled.lu().solve(&b)
}

/// Newton refinement of the fixed point with index `ell`, seeded from the
/// leading-order solution. Damped steps (halving up to 20 times) widen the
/// basin at small indices. Non-convergence is reported in the record, not
/// as an error.
pub fn refine_fixed_point(
    ell: usize,
    spec: &ModelSpec,
) -> Result<FixedPointRecord, FixedPointError> {
    let seed = leading_fixed_point(ell, spec)?;
    let s = &spec.spectrum;
    let n = spec.n_unstable();
    let m = spec.m_stable();
    let dim = spec.dim_sigma1();
    let tol = spec.tolerances.newton_tol;

    let rescale = (-s.alpha * seed.t_star).exp();
    let mut u = DVector::zeros(dim);
    u[0] = seed.t_star;
    u[1] = seed.x0_hat * rescale;
    for k in 0..m {
        u[2 + k] = seed.vm0_hat[k] * rescale;
    }
    u[2 + m] = seed.z1_hat * rescale;
    for j in 0..n {
        u[3 + m + j] = seed.vp1_hat[j] * rescale;
    }

    let mut residual = fixed_point_residual(&u, spec);
    let mut norm = residual.amax();
    let mut iters = 0usize;
    let mut newton_ok = norm <= tol;
    while iters < spec.tolerances.newton_max_iter {
        if norm <= tol && iters > 0 {
            newton_ok = true;
            break;
        }
        let jac = fixed_point_jacobian(&u, spec);
        let Some(step) = equilibrated_solve(&jac, &residual) else {
            break;
        };
        if !step.iter().all(|v| v.is_finite()) {
            break;
        }
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let candidate = &u - &step * damping;
            let cand_res = fixed_point_residual(&candidate, spec);
            let cand_norm = cand_res.amax();
            if cand_norm.is_finite() && cand_norm < norm {
                u = candidate;
                residual = cand_res;
                norm = cand_norm;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        iters += 1;
        if !accepted {
            break;
        }
        if step.amax() * damping <= 1e-15 * (1.0 + u.amax()) {
            newton_ok = norm <= tol;
            break;
        }
        newton_ok = norm <= tol;
    }

    let unknowns = Unknowns { u: &u, n, m };
    let t_ell = unknowns.t();
    let back = (-s.alpha * t_ell).exp();
    let raw = Sigma0Point {
        x0: unknowns.x0(),
        z0: (unknowns.z1() + spec.geometry.eta) * (-s.gamma * t_ell).exp(),
        v_plus0: DVector::from_fn(n, |j, _| {
            (-s.lambda_plus[j] * t_ell).exp() * (unknowns.vp1()[j] + spec.geometry.v_star_plus[j])
        }),
        v_minus0: unknowns.vm0(),
    };
    let coords = RescaledCoords {
        t_star: t_ell,
        x0_hat: unknowns.x0() / back,
        vm0_hat: unknowns.vm0() / back,
        z1_hat: unknowns.z1() / back,
        vp1_hat: unknowns.vp1() / back,
    };

    // Independent re-check: apply the full Poincaré map to the raw point.
    let mut converged = newton_ok && raw.in_section(spec);
    let residual_out = if converged {
        match global_map::poincare_map(&raw, spec) {
            Ok(result) => {
                let displacement = (result.point.to_vector() - raw.to_vector()).norm();
                if displacement > 10.0 * tol || (result.t_star - t_ell).abs() > 1e-6 {
                    converged = false;
                }
                displacement
            }
            Err(_) => {
                converged = false;
                norm
            }
        }
    } else {
        norm
    };

    Ok(FixedPointRecord {
        ell,
        t_ell,
        coords,
        raw,
        residual: residual_out,
        newton_iters: iters,
        converged,
    })
}

/// Sweeps an inclusive index range, reporting the empirical convergence
/// threshold.
pub fn fixed_point_family(
    ell_lo: usize,
    ell_hi: usize,
    spec: &ModelSpec,
) -> Result<FixedPointFamily, FixedPointError> {
    assert!(
        ell_lo >= 1 && ell_lo <= ell_hi,
        "range must satisfy 1 <= lo <= hi"
    );
    let mut records = Vec::with_capacity(ell_hi - ell_lo + 1);
    for ell in ell_lo..=ell_hi {
        records.push(refine_fixed_point(ell, spec)?);
    }
    let mut ell_0 = None;
    for record in records.iter().rev() {
        if record.converged {
            ell_0 = Some(record.ell);
        } else {
            break;
        }
    }
    Ok(FixedPointFamily { records, ell_0 })
}

/// CSV rendering of a family sweep, 17 significant digits throughout.
pub fn family_to_csv(family: &FixedPointFamily, spec: &ModelSpec) -> String {
    let n = spec.n_unstable();
    let m = spec.m_stable();
    let phi = leading_order_data(spec).map(|l| l.phi).unwrap_or(f64::NAN);
    let mut out = String::new();
    out.push_str("ell,T_ell,leading_T,gap,residual,converged,x0,z0");
    for j in 0..n {
        out.push_str(&format!(",vp0_{j}"));
    }
    for k in 0..m {
        out.push_str(&format!(",vm0_{k}"));
    }
    out.push_str(",z1_hat");
    for j in 0..n {
        out.push_str(&format!(",vp1_hat_{j}"));
    }
    out.push('\n');
    for r in &family.records {
        let lead = leading_return_time(r.ell, phi, spec.spectrum.beta);
        out.push_str(&format!(
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            r.ell,
            r.t_ell,
            lead,
            (r.t_ell - lead).abs(),
            r.residual,
            r.converged
        ));
        out.push_str(&format!(",{:.17e},{:.17e}", r.raw.x0, r.raw.z0));
        for j in 0..n {
            out.push_str(&format!(",{:.17e}", r.raw.v_plus0[j]));
        }
        for k in 0..m {
            out.push_str(&format!(",{:.17e}", r.raw.v_minus0[k]));
        }
        out.push_str(&format!(",{:.17e}", r.coords.z1_hat));
        for j in 0..n {
            out.push_str(&format!(",{:.17e}", r.coords.vp1_hat[j]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::default_model;
    use approx::assert_relative_eq;

    #[test]
    fn pure_y_constraint_gives_zero_phi() {
        let mut spec = default_model();
        spec.global_map.b = vec![0.0, 0.8, 0.0, 0.0, 0.0];
        // Zero the y-column of D so the reduction leaves B untouched.
        spec.global_map.a[1][1] = 0.0;
        spec.global_map.a[2][1] = 0.0;
        let lod = leading_order_data(&spec).unwrap();
        assert_relative_eq!(lod.delta1, 0.0, epsilon = 1e-15);
        assert_relative_eq!(lod.delta2, spec.geometry.x_star * 0.8, max_relative = 1e-14);
        assert_eq!(lod.phi, 0.0);
    }

    #[test]
    fn phi_zero_family_lands_on_half_pi() {
        let mut spec = default_model();
        spec.global_map.b = vec![0.0, 0.8, 0.0, 0.0, 0.0];
        spec.global_map.a[1][1] = 0.0;
        spec.global_map.a[2][1] = 0.0;
        let coords = leading_fixed_point(5, &spec).unwrap();
        assert_relative_eq!(
            coords.t_star,
            std::f64::consts::FRAC_PI_2,
            max_relative = 1e-15
        );
    }

    #[test]
    fn doubling_b_doubles_deltas_but_not_phi() {
        let spec = default_model();
        let lod = leading_order_data(&spec).unwrap();
        let mut doubled = spec.clone();
        for b in &mut doubled.global_map.b {
            *b *= 2.0;
        }
        let lod2 = leading_order_data(&doubled).unwrap();
        assert_relative_eq!(lod2.delta1, 2.0 * lod.delta1, max_relative = 1e-14);
        assert_relative_eq!(lod2.delta2, 2.0 * lod.delta2, max_relative = 1e-14);
        assert_relative_eq!(lod2.phi, lod.phi, max_relative = 1e-14);
    }

    #[test]
    fn deltas_match_dense_grid_fit() {
        let spec = default_model();
        let lod = leading_order_data(&spec).unwrap();
        // Fit a*cos(beta t) + b*sin(beta t) to the reduced constraint on a
        // dense grid by least squares.
        let beta = spec.spectrum.beta;
        let x_star = spec.geometry.x_star;
        let cinv_d = lod.c.clone().lu().solve(&lod.d).unwrap();
        let b = &spec.global_map.b;
        let n = spec.n_unstable();
        let mut sum_cc = 0.0;
        let mut sum_ss = 0.0;
        let mut sum_cs = 0.0;
        let mut sum_cv = 0.0;
        let mut sum_sv = 0.0;
        let samples = 4000;
        let mut i = 0;
        while i < samples {
            let t = i as f64 * 2.37e-3;
            let (sin, cos) = (beta * t).sin_cos();
            let rhs = DVector::from_column_slice(&[x_star * cos, x_star * sin]);
            let zv = -(&cinv_d * &rhs);
            let mut value = b[0] * rhs[0] + b[1] * rhs[1] + b[2] * zv[0];
            for j in 0..n {
                value += b[3 + j] * zv[1 + j];
            }
            sum_cc += cos * cos;
            sum_ss += sin * sin;
            sum_cs += cos * sin;
            sum_cv += cos * value;
            sum_sv += sin * value;
            i += 1;
        }
        let det = sum_cc * sum_ss - sum_cs * sum_cs;
        let a_fit = (sum_cv * sum_ss - sum_sv * sum_cs) / det;
        let b_fit = (sum_sv * sum_cc - sum_cv * sum_cs) / det;
        assert_relative_eq!(a_fit, lod.delta1, max_relative = 1e-10);
        assert_relative_eq!(b_fit, lod.delta2, max_relative = 1e-10);
    }

    #[test]
    fn leading_zv_alternates_sign_with_parity() {
        let spec = default_model();
        let a = leading_fixed_point(20, &spec).unwrap();
        let b = leading_fixed_point(21, &spec).unwrap();
        assert_relative_eq!(a.z1_hat, -b.z1_hat, max_relative = 1e-12);
        assert_relative_eq!(a.vp1_hat[0], -b.vp1_hat[0], max_relative = 1e-12);
    }

    #[test]
    fn refine_converges_at_moderate_index() {
        let spec = default_model();
        let record = refine_fixed_point(12, &spec).unwrap();
        assert!(record.converged, "{record:?}");
        assert!(record.residual <= 10.0 * spec.tolerances.newton_tol);
        // z-coordinate law is built into the unknown layout.
        let z1 = record.coords.z1_hat * (-spec.spectrum.alpha * record.t_ell).exp();
        let expected = (z1 + spec.geometry.eta) * (-spec.spectrum.gamma * record.t_ell).exp();
        assert_relative_eq!(record.raw.z0, expected, max_relative = 1e-14);
    }

    #[test]
    fn rescaling_consistency() {
        let spec = default_model();
        let record = refine_fixed_point(14, &spec).unwrap();
        let back = (-spec.spectrum.alpha * record.t_ell).exp();
        assert_relative_eq!(
            record.coords.x0_hat * back,
            record.raw.x0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            record.coords.vm0_hat[0] * back,
            record.raw.v_minus0[0],
            max_relative = 1e-12
        );
    }

    #[test]
    fn below_threshold_indices_are_reported_unconverged() {
        let spec = default_model();
        // The raw solution at index 2 leaves the section, so the record is
        // flagged rather than silently accepted.
        let family = fixed_point_family(2, 2, &spec).unwrap();
        assert!(family.records.iter().all(|r| !r.converged));
        assert_eq!(family.ell_0, None);
    }

    #[test]
    fn empirical_threshold_is_discovered() {
        let spec = default_model();
        let family = fixed_point_family(1, 12, &spec).unwrap();
        assert_eq!(family.ell_0, Some(3));
        assert!(family.record(2).map(|r| !r.converged).unwrap_or(false));
    }

    #[test]
    fn eleven_records_above_threshold_converge_with_increasing_times() {
        let spec = default_model();
        let family = fixed_point_family(3, 13, &spec).unwrap();
        assert_eq!(family.records.len(), 11);
        assert!(family.records.iter().all(|r| r.converged));
        for pair in family.records.windows(2) {
            assert!(pair[1].t_ell > pair[0].t_ell);
        }
    }
}
