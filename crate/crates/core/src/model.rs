//! Model description: spectrum, section geometry, global-map data and
//! tolerances, together with structural checks (dimensions, ranges) and the
//! semantic validation report covering the standing assumptions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::StructuralError;
use crate::fixed_points;
use crate::horseshoe;

/// Condition-number bound for the Lemma-3 block `C`. Separates genuine
/// singularity from floating-point noise.
pub const COND_BOUND: f64 = 1e8;

/// Relative singular-value threshold below which a spanning set is treated
/// as rank deficient.
pub const RANK_TOL: f64 = 1e-9;

/// Relative threshold for "vanishes" in the Lemma-1 and A5 checks.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Spectral data of the saddle: focus pair `-alpha ± i beta`, expanding rate
/// `gamma`, `N` additional unstable rates and `M` truncated stable rates
/// (stored as positive decay rates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spectrum {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda_plus: Vec<f64>,
    pub lambda_minus: Vec<f64>,
}

impl Spectrum {
    pub fn n_unstable(&self) -> usize {
        self.lambda_plus.len()
    }

    pub fn m_stable(&self) -> usize {
        self.lambda_minus.len()
    }
}

/// A point of the phase space with named blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVec {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub v_plus: DVector<f64>,
    pub v_minus: DVector<f64>,
}

impl StateVec {
    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.z.is_finite()
            && self.v_plus.iter().all(|v| v.is_finite())
            && self.v_minus.iter().all(|v| v.is_finite())
    }
}

/// Geometry of the Poincaré sections: section size `eta`, the homoclinic
/// trace `w(+) = (x*, 0, 0, 0, v*⁻)` on the `z = 0` boundary of `Σ0`, the
/// point `w(-) = (0, 0, eta, v*⁺, 0)` and the global flight time `T` with
/// `w(-) = F^{-T}(w(+))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionGeometry {
    pub eta: f64,
    pub x_star: f64,
    pub v_star_plus: Vec<f64>,
    pub v_star_minus: Vec<f64>,
    #[serde(rename = "T_global")]
    pub t_global: f64,
}

/// Optional homogeneous quadratic corrections: one symmetric form for the
/// section constraint and one per output row of the global map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadTensor {
    /// Symmetric `(3+N+M)²` form added to the constraint.
    pub constraint: Vec<Vec<f64>>,
    /// One symmetric `(3+N+M)²` form per global-map output row (`2+N+M`).
    pub map: Vec<Vec<Vec<f64>>>,
}

/// Global-map data: the Jacobian blocks `A` of `(x, z, v⁺, v⁻)` outputs with
/// respect to `(x, y, z, v⁺, v⁻)` section offsets, the constraint row `B`,
/// and optional quadratic corrections scaled by `quad_scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalMapSpec {
    /// Row-major, `(2+N+M) × (3+N+M)`.
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    /// Length `3+N+M`.
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    pub quad_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<QuadTensor>,
}

/// Solver tolerances carried by the model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub root_tol: f64,
    pub cm_samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            newton_tol: 1e-10,
            newton_max_iter: 50,
            root_tol: 1e-12,
            cm_samples: 512,
        }
    }
}

/// A complete synthetic Shilnikov system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub spectrum: Spectrum,
    pub geometry: SectionGeometry,
    pub global_map: GlobalMapSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn require_finite(field: &str, value: f64) -> Result<(), StructuralError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(StructuralError::SchemaViolation {
            field: field.to_string(),
            reason: format!("non-finite value {value}"),
        })
    }
}

fn require_positive(field: &str, value: f64) -> Result<(), StructuralError> {
    require_finite(field, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(StructuralError::SchemaViolation {
            field: field.to_string(),
            reason: format!("must be strictly positive, found {value}"),
        })
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_square(field: &str, m: &[Vec<f64>], dim: usize) -> Result<(), StructuralError> {
    if m.len() != dim || m.iter().any(|row| row.len() != dim) {
        return Err(StructuralError::DimensionMismatch {
            field: field.to_string(),
            expected: format!("{dim}x{dim}"),
            found: format!("{}x{}", m.len(), m.first().map(|r| r.len()).unwrap_or(0)),
        });
    }
    for row in m {
        for &v in row {
            require_finite(field, v)?;
        }
    }
    Ok(())
}

impl ModelSpec {
    /// Builds a spec after checking every structural invariant: dimensions,
    /// positivity and finiteness, and the placement of `w(+)` inside `Σ0`.
    /// Semantic assumptions (A1, Lemma 1, Lemma 3, A5, A6) are *not* checked
    /// here; they belong to [`validate_model`].
    pub fn new(
        spectrum: Spectrum,
        geometry: SectionGeometry,
        global_map: GlobalMapSpec,
        tolerances: Tolerances,
    ) -> Result<Self, StructuralError> {
        let spec = ModelSpec {
            spectrum,
            geometry,
            global_map,
            tolerances,
        };
        spec.check_structure()?;
        Ok(spec)
    }

    fn check_structure(&self) -> Result<(), StructuralError> {
        let s = &self.spectrum;
        require_positive("spectrum.alpha", s.alpha)?;
        require_positive("spectrum.beta", s.beta)?;
        require_positive("spectrum.gamma", s.gamma)?;
        for (j, &l) in s.lambda_plus.iter().enumerate() {
            require_positive(&format!("spectrum.lambda_plus[{j}]"), l)?;
        }
        for (j, &l) in s.lambda_minus.iter().enumerate() {
            require_positive(&format!("spectrum.lambda_minus[{j}]"), l)?;
        }

        let n = s.n_unstable();
        let m = s.m_stable();
        let g = &self.geometry;
        require_positive("geometry.eta", g.eta)?;
        require_finite("geometry.x_star", g.x_star)?;
        require_positive("geometry.T_global", g.t_global)?;
        if g.v_star_plus.len() != n {
            return Err(StructuralError::DimensionMismatch {
                field: "geometry.v_star_plus".to_string(),
                expected: format!("length {n}"),
                found: format!("length {}", g.v_star_plus.len()),
            });
        }
        if g.v_star_minus.len() != m {
            return Err(StructuralError::DimensionMismatch {
                field: "geometry.v_star_minus".to_string(),
                expected: format!("length {m}"),
                found: format!("length {}", g.v_star_minus.len()),
            });
        }
        for (j, &v) in g.v_star_plus.iter().enumerate() {
            require_finite(&format!("geometry.v_star_plus[{j}]"), v)?;
        }
        for (j, &v) in g.v_star_minus.iter().enumerate() {
            require_finite(&format!("geometry.v_star_minus[{j}]"), v)?;
        }
        let x_lo = g.eta * (-2.0 * std::f64::consts::PI * s.alpha / s.beta).exp();
        if !(g.x_star > x_lo && g.x_star < g.eta) {
            return Err(StructuralError::SchemaViolation {
                field: "geometry.x_star".to_string(),
                reason: format!(
                    "w(+) must lie inside Σ0's x-range ({x_lo:.6e}, {:.6e}), found {:.6e}",
                    g.eta, g.x_star
                ),
            });
        }
        if norm2(&g.v_star_minus) >= g.eta {
            return Err(StructuralError::SchemaViolation {
                field: "geometry.v_star_minus".to_string(),
                reason: "norm must be below eta".to_string(),
            });
        }
        if norm2(&g.v_star_plus) >= g.eta {
            return Err(StructuralError::SchemaViolation {
                field: "geometry.v_star_plus".to_string(),
                reason: "norm must be below eta".to_string(),
            });
        }

        let rows = 2 + n + m;
        let cols = 3 + n + m;
        let gm = &self.global_map;
        if gm.a.len() != rows || gm.a.iter().any(|r| r.len() != cols) {
            return Err(StructuralError::DimensionMismatch {
                field: "global_map.A".to_string(),
                expected: format!("{rows}x{cols} for N={n}, M={m}"),
                found: format!(
                    "{}x{}",
                    gm.a.len(),
                    gm.a.first().map(|r| r.len()).unwrap_or(0)
                ),
            });
        }
        for row in &gm.a {
            for &v in row {
                require_finite("global_map.A", v)?;
            }
        }
        if gm.b.len() != cols {
            return Err(StructuralError::DimensionMismatch {
                field: "global_map.B".to_string(),
                expected: format!("length {cols}"),
                found: format!("length {}", gm.b.len()),
            });
        }
        for &v in &gm.b {
            require_finite("global_map.B", v)?;
        }
        require_finite("global_map.quad_scale", gm.quad_scale)?;
        if gm.quad_scale < 0.0 {
            return Err(StructuralError::SchemaViolation {
                field: "global_map.quad_scale".to_string(),
                reason: "must be nonnegative".to_string(),
            });
        }
        if let Some(q) = &gm.quad {
            check_square("global_map.quad.constraint", &q.constraint, cols)?;
            if q.map.len() != rows {
                return Err(StructuralError::DimensionMismatch {
                    field: "global_map.quad.map".to_string(),
                    expected: format!("{rows} forms"),
                    found: format!("{} forms", q.map.len()),
                });
            }
            for (i, form) in q.map.iter().enumerate() {
                check_square(&format!("global_map.quad.map[{i}]"), form, cols)?;
            }
        }

        let t = &self.tolerances;
        require_positive("tolerances.newton_tol", t.newton_tol)?;
        require_positive("tolerances.root_tol", t.root_tol)?;
        if t.newton_max_iter == 0 {
            return Err(StructuralError::SchemaViolation {
                field: "tolerances.newton_max_iter".to_string(),
                reason: "must be at least 1".to_string(),
            });
        }
        if t.cm_samples == 0 {
            return Err(StructuralError::SchemaViolation {
                field: "tolerances.cm_samples".to_string(),
                reason: "must be at least 1".to_string(),
            });
        }
        Ok(())
    }

    pub fn n_unstable(&self) -> usize {
        self.spectrum.n_unstable()
    }

    pub fn m_stable(&self) -> usize {
        self.spectrum.m_stable()
    }

    /// Dimension of `Σ0` (coordinates `x, z, v⁺, v⁻`).
    pub fn dim_sigma0(&self) -> usize {
        2 + self.n_unstable() + self.m_stable()
    }

    /// Dimension of the ambient offset frame on `Σ1`
    /// (coordinates `x, y, z, v⁺, v⁻`).
    pub fn dim_sigma1(&self) -> usize {
        3 + self.n_unstable() + self.m_stable()
    }

    /// `A` as a dense matrix.
    pub fn a_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim_sigma0(), self.dim_sigma1(), |i, j| {
            self.global_map.a[i][j]
        })
    }

    /// `B` as a dense row.
    pub fn b_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.global_map.b)
    }

    /// Symmetrized constraint quadratic form, if present.
    pub fn quad_constraint(&self) -> Option<DMatrix<f64>> {
        self.global_map.quad.as_ref().map(|q| {
            let d = self.dim_sigma1();
            let raw = DMatrix::from_fn(d, d, |i, j| q.constraint[i][j]);
            (&raw + raw.transpose()) * 0.5
        })
    }

    /// Symmetrized map quadratic forms, one per output row, if present.
    pub fn quad_map(&self) -> Option<Vec<DMatrix<f64>>> {
        self.global_map.quad.as_ref().map(|q| {
            let d = self.dim_sigma1();
            q.map
                .iter()
                .map(|form| {
                    let raw = DMatrix::from_fn(d, d, |i, j| form[i][j]);
                    (&raw + raw.transpose()) * 0.5
                })
                .collect()
        })
    }

    /// The homoclinic trace on the `z = 0` boundary of `Σ0`.
    pub fn w_plus(&self) -> StateVec {
        StateVec {
            x: self.geometry.x_star,
            y: 0.0,
            z: 0.0,
            v_plus: DVector::zeros(self.n_unstable()),
            v_minus: DVector::from_column_slice(&self.geometry.v_star_minus),
        }
    }

    /// The homoclinic point with `z = eta` anchoring `Σ1`.
    pub fn w_minus(&self) -> StateVec {
        StateVec {
            x: 0.0,
            y: 0.0,
            z: self.geometry.eta,
            v_plus: DVector::from_column_slice(&self.geometry.v_star_plus),
            v_minus: DVector::zeros(self.m_stable()),
        }
    }
}

/// Outcome of a single validation check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not evaluated because a prerequisite check failed.
    Skipped,
}

/// One named check with its measured quantities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationCheck {
    pub name: String,
    pub status: CheckStatus,
    pub details: String,
    pub quantities: Vec<(String, f64)>,
}

impl ValidationCheck {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

/// Result of [`validate_model`]: one entry per standing assumption.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&ValidationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Evaluates the semantic assumptions on a structurally valid spec:
///
/// * `A1` — spectral gaps `alpha < gamma`, `alpha < min lambda⁻`,
///   `gamma < min lambda⁺`;
/// * `lemma1` — the constraint row does not annihilate all of `(z, v⁺)`;
/// * `lemma3` — the `(z, v⁺) × (z, v⁺)` block `C` of `A` is invertible with
///   condition number below [`COND_BOUND`];
/// * `A5` — the leading-order coefficients `Δ₁, Δ₂` do not vanish together;
/// * `A6` — the spanning set built from the section frame and the
///   leading-order unstable directions has full rank.
///
/// Checks whose prerequisites fail are reported as `skipped`, never as
/// spurious failures. The report passes only if every check passes.
pub fn validate_model(spec: &ModelSpec) -> ValidationReport {
    let mut checks = Vec::new();

    // A1: spectral gap inequalities.
    let s = &spec.spectrum;
    let min_lm = s.lambda_minus.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_lp = s.lambda_plus.iter().cloned().fold(f64::INFINITY, f64::min);
    let a1_ok = s.alpha < s.gamma && s.alpha < min_lm && s.gamma < min_lp;
    checks.push(ValidationCheck {
        name: "A1".to_string(),
        status: if a1_ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        details: "alpha < gamma, alpha < min(lambda_minus), gamma < min(lambda_plus)".to_string(),
        quantities: vec![
            ("alpha".to_string(), s.alpha),
            ("gamma".to_string(), s.gamma),
            ("min_lambda_minus".to_string(), min_lm),
            ("min_lambda_plus".to_string(), min_lp),
        ],
    });

    // Lemma 1: d f^(y)/dz and d f^(y)/dv⁺_j cannot vanish simultaneously.
    let b = &spec.global_map.b;
    let n = spec.n_unstable();
    let b_norm = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let zv_max = (2..3 + n).map(|k| b[k].abs()).fold(0.0f64, f64::max);
    let lemma1_ok = zv_max > DEGENERACY_TOL * b_norm.max(1e-300);
    checks.push(ValidationCheck {
        name: "lemma1".to_string(),
        status: if lemma1_ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        details: "constraint row has a nonzero entry over the (z, v⁺) block".to_string(),
        quantities: vec![("max_abs_zv".to_string(), zv_max)],
    });

    // Lemma 3: C invertible with bounded condition number.
    let c = fixed_points::c_block(spec);
    let svd = c.svd(false, false);
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
    let lemma3_ok = cond.is_finite() && cond < COND_BOUND;
    checks.push(ValidationCheck {
        name: "lemma3".to_string(),
        status: if lemma3_ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        details: format!("C invertible with condition number below {COND_BOUND:.1e}"),
        quantities: vec![("cond".to_string(), cond)],
    });

    // A5: Delta_1, Delta_2 not simultaneously zero. Needs C^{-1}.
    let mut phi_for_a6 = None;
    if lemma3_ok {
        let (d1, d2) = fixed_points::deltas_unchecked(spec);
        let scale = spec.geometry.x_star.abs() * b_norm;
        let a5_ok = d1.hypot(d2) > DEGENERACY_TOL * scale.max(1e-300);
        if a5_ok {
            phi_for_a6 = Some(fixed_points::phi_from_deltas(d1, d2));
        }
        checks.push(ValidationCheck {
            name: "A5".to_string(),
            status: if a5_ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            details: "Delta_1 and Delta_2 do not vanish simultaneously".to_string(),
            quantities: vec![("Delta_1".to_string(), d1), ("Delta_2".to_string(), d2)],
        });
    } else {
        checks.push(ValidationCheck {
            name: "A5".to_string(),
            status: CheckStatus::Skipped,
            details: "skipped: Lemma 3 failed, C is not invertible".to_string(),
            quantities: vec![],
        });
    }

    // A6: span condition on the leading-order frame. Needs Lemma 1 (for the
    // ξ selection) and A5 (for the phase of the unstable tangent). Evaluated
    // from the leading-order phase so the check does not depend on solved
    // fixed points.
    match phi_for_a6 {
        Some(phi) if lemma1_ok => {
            let (rank, ratio) = horseshoe::leading_span_rank(spec, phi);
            let full = spec.dim_sigma0();
            let a6_ok = rank == full;
            checks.push(ValidationCheck {
                name: "A6".to_string(),
                status: if a6_ok {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                },
                details: format!("span of the section frame has rank {rank} of {full}"),
                quantities: vec![
                    ("rank".to_string(), rank as f64),
                    ("sv_ratio".to_string(), ratio),
                ],
            });
        }
        _ => {
            checks.push(ValidationCheck {
                name: "A6".to_string(),
                status: CheckStatus::Skipped,
                details: "skipped: Lemma 1 or A5 prerequisite failed".to_string(),
                quantities: vec![],
            });
        }
    }

    let passed = checks.iter().all(|c| c.passed());
    ValidationReport { checks, passed }
}

/// Loads a model from the JSON schema, running all structural checks.
pub fn load_model(path: impl AsRef<std::path::Path>) -> Result<ModelSpec, StructuralError> {
    let text = std::fs::read_to_string(path)?;
    load_model_str(&text)
}

/// Parses a model from JSON text.
pub fn load_model_str(text: &str) -> Result<ModelSpec, StructuralError> {
    let spec: ModelSpec = serde_json::from_str(text)?;
    spec.check_structure()?;
    Ok(spec)
}

/// Serializes a model to pretty JSON. Reals use the shortest decimal that
/// round-trips exactly, so `load_model ∘ save_model` is the identity.
pub fn save_model(
    spec: &ModelSpec,
    path: impl AsRef<std::path::Path>,
) -> Result<(), StructuralError> {
    let text = serde_json::to_string_pretty(spec).map_err(StructuralError::Parse)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// The canonical model `M0` used throughout tests and docs. All validation
/// checks pass; the constants are mirrored in `configs/m0.json`.
pub fn default_model() -> ModelSpec {
    let spectrum = Spectrum {
        alpha: 1.0,
        beta: 10.0,
        gamma: 2.0,
        lambda_plus: vec![3.0],
        lambda_minus: vec![4.0],
    };
    let geometry = SectionGeometry {
        eta: 0.1,
        x_star: 0.07,
        v_star_plus: vec![0.005],
        v_star_minus: vec![0.004],
        t_global: 1.0,
    };
    let mut q_constraint = vec![vec![0.0; 5]; 5];
    q_constraint[0][0] = 0.5;
    q_constraint[0][1] = -0.25;
    q_constraint[1][0] = -0.25;
    q_constraint[2][2] = 0.3;
    let mut q_map = vec![vec![vec![0.0; 5]; 5]; 4];
    q_map[0][0][0] = 0.3;
    q_map[1][0][1] = 0.2;
    q_map[1][1][0] = 0.2;
    q_map[2][1][1] = -0.4;
    q_map[3][2][2] = 0.25;
    let global_map = GlobalMapSpec {
        a: vec![
            vec![1.0, 0.3, 0.2, 0.1, 0.2],
            vec![0.7, -0.4, 1.0, 0.3, 0.1],
            vec![-0.5, 0.6, 0.2, 1.0, -0.2],
            vec![0.2, 0.1, -0.3, 0.2, 1.0],
        ],
        b: vec![0.2, 0.6, 1.0, 0.4, 0.15],
        quad_scale: 0.4,
        quad: Some(QuadTensor {
            constraint: q_constraint,
            map: q_map,
        }),
    };
    ModelSpec::new(spectrum, geometry, global_map, Tolerances::default())
        .expect("M0 constants are structurally valid")
}

/// A second validated model with two unstable and two stable extra modes,
/// used to exercise dimension-generic paths. Mirrored in `configs/m1.json`.
pub fn model_m1() -> ModelSpec {
    let spectrum = Spectrum {
        alpha: 0.9,
        beta: 8.0,
        gamma: 1.8,
        lambda_plus: vec![2.8, 3.4],
        lambda_minus: vec![3.2, 4.1],
    };
    let geometry = SectionGeometry {
        eta: 0.08,
        x_star: 0.055,
        v_star_plus: vec![0.004, -0.003],
        v_star_minus: vec![0.003, 0.002],
        t_global: 1.2,
    };
    let mut q_constraint = vec![vec![0.0; 7]; 7];
    q_constraint[0][0] = 0.4;
    q_constraint[0][1] = -0.2;
    q_constraint[1][0] = -0.2;
    q_constraint[2][2] = 0.25;
    let mut q_map = vec![vec![vec![0.0; 7]; 7]; 6];
    q_map[0][0][0] = 0.25;
    q_map[1][0][1] = 0.15;
    q_map[1][1][0] = 0.15;
    q_map[2][1][1] = -0.3;
    q_map[4][2][2] = 0.2;
    let global_map = GlobalMapSpec {
        a: vec![
            vec![1.0, 0.25, 0.15, 0.1, -0.1, 0.15, 0.05],
            vec![0.6, -0.35, 1.0, 0.25, 0.15, 0.1, -0.05],
            vec![-0.45, 0.5, 0.15, 1.0, 0.1, -0.1, 0.05],
            vec![0.3, 0.4, -0.1, 0.2, 1.0, 0.05, 0.1],
            vec![0.2, 0.1, -0.25, 0.15, 0.1, 1.0, 0.1],
            vec![-0.1, 0.2, 0.1, -0.05, 0.2, 0.15, 1.0],
        ],
        b: vec![0.25, 0.55, 1.0, 0.35, -0.2, 0.12, 0.08],
        quad_scale: 0.3,
        quad: Some(QuadTensor {
            constraint: q_constraint,
            map: q_map,
        }),
    };
    ModelSpec::new(spectrum, geometry, global_map, Tolerances::default())
        .expect("M1 constants are structurally valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m0_passes_all_checks() {
        let spec = default_model();
        let report = validate_model(&spec);
        for check in &report.checks {
            assert!(
                check.passed(),
                "check {} failed: {} {:?}",
                check.name,
                check.details,
                check.quantities
            );
        }
        assert!(report.passed);
    }

    #[test]
    fn m1_passes_all_checks() {
        let report = validate_model(&model_m1());
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn default_model_is_deterministic() {
        assert_eq!(default_model(), default_model());
    }

    #[test]
    fn a1_mutant_fails_only_a1() {
        let mut spec = default_model();
        spec.spectrum.gamma = 0.5;
        let report = validate_model(&spec);
        assert!(report.check("A1").unwrap().failed());
        for name in ["lemma1", "lemma3", "A5", "A6"] {
            assert!(
                !report.check(name).unwrap().failed(),
                "cross-talk: {name} failed on the A1 mutant"
            );
        }
        assert!(!report.passed);
    }

    #[test]
    fn lemma3_mutant_reports_condition_number() {
        let mut spec = default_model();
        // Make the v⁺ row of the (z, v⁺) block a multiple of the z row.
        spec.global_map.a[1] = vec![0.7, -0.4, 1.0, 0.5, 0.1];
        spec.global_map.a[2] = vec![-0.5, 0.6, 2.0, 1.0, -0.2];
        let report = validate_model(&spec);
        let lemma3 = report.check("lemma3").unwrap();
        assert!(lemma3.failed());
        let cond = lemma3
            .quantities
            .iter()
            .find(|(k, _)| k == "cond")
            .unwrap()
            .1;
        assert!(cond.is_infinite() || cond >= COND_BOUND);
        assert!(!report.check("A1").unwrap().failed());
        assert!(!report.check("lemma1").unwrap().failed());
    }

    #[test]
    fn dimension_mismatch_names_the_field() {
        let mut spec_json: serde_json::Value = serde_json::to_value(default_model()).unwrap();
        spec_json["spectrum"]["lambda_plus"] = serde_json::json!([3.0, 3.5]);
        let err = load_model_str(&spec_json.to_string()).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("global_map.A") || msg.contains("v_star_plus"),
            "{msg}"
        );
    }

    #[test]
    fn negative_eta_is_a_schema_violation() {
        let mut spec_json: serde_json::Value = serde_json::to_value(default_model()).unwrap();
        spec_json["geometry"]["eta"] = serde_json::json!(-0.1);
        let err = load_model_str(&spec_json.to_string()).unwrap_err();
        assert!(err.to_string().contains("geometry.eta"), "{err}");
    }

    #[test]
    fn json_round_trip_is_identity() {
        let spec = default_model();
        let text = serde_json::to_string_pretty(&spec).unwrap();
        let back = load_model_str(&text).unwrap();
        assert_eq!(spec, back);
    }
}
