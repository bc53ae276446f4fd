//! Horseshoe construction: slabs, tangent frames, Conley–Moser
//! certification, itineraries, shadowing and the finite-depth conjugacy to
//! the full shift.

mod conley_moser;
mod shadow;
mod slab;

pub use conley_moser::{CmParams, ConeStats, ConleyMoserReport, StripSummary, Verdict};
pub use shadow::{
    certificates_to_csv, CantorPointCertificate, ConjugacyReport, ConjugacySummary, Itinerary,
    SensitivityReport, SensitivityRow, MAX_WORD_LEN, VERIFY_CAP,
};
pub use slab::{build_slab, Slab, SlabMembership, StripRegion};

use nalgebra::{DMatrix, DVector};

use crate::error::HorseshoeError;
use crate::model::{ModelSpec, RANK_TOL};
use crate::symbols::SymbolWord;

/// Minimum relative size of the constraint derivative along the selected
/// coordinate `ξ`, required for the implicit-function representation of
/// `Σ1` near `w(-)`.
pub const XI_MIN_DERIV_REL: f64 = 1e-6;

/// Cone half-angle for the invariance checks, in the metric of the
/// orthonormalized basis frame.
pub const CONE_HALF_ANGLE: f64 = std::f64::consts::FRAC_PI_6;

/// Tangent frame at the section anchors: `Σ1` tangent vectors corrected
/// along `ξ`, their images under `A`, and the unstable-curve tangent at the
/// resident fixed point `p⁺`.
#[derive(Debug, Clone)]
pub struct BasisFrame {
    /// Offset-coordinate index of `ξ` on `Σ1` (2 is `z`, `3+j` is `v⁺_j`).
    pub xi_index: usize,
    /// Constraint derivative along `ξ` at `w(-)`.
    pub xi_deriv: f64,
    /// `E_{x1}, E_{y1}, E_{v⁻}, E_{v₊}` in `Σ1` offset coordinates.
    pub e_vectors: Vec<DVector<f64>>,
    /// The images `A · E` in `Σ0` coordinates.
    pub image_vectors: Vec<DVector<f64>>,
    /// Unit tangent to the unstable coordinate curve at `p⁺`.
    pub exi_plus: DVector<f64>,
    /// Orthonormal columns spanning the unstable reference subspace
    /// `{ℰ_ξ⁺, ℰ_{v₊}}`.
    pub unstable_basis: DMatrix<f64>,
    /// Orthonormal columns spanning the stable reference subspace
    /// `{e_{x0}, e_{v⁻0}}`.
    pub stable_basis: DMatrix<f64>,
    /// Rank of the combined spanning set (assumption A6); full rank is
    /// `dim Σ0`.
    pub span_rank: usize,
    pub span_sv_ratio: f64,
}

fn xi_selection(spec: &ModelSpec) -> Result<(usize, f64), HorseshoeError> {
    let b = &spec.global_map.b;
    let n = spec.n_unstable();
    let (mut best, mut best_abs) = (2usize, b[2].abs());
    for j in 0..n {
        if b[3 + j].abs() > best_abs {
            best = 3 + j;
            best_abs = b[3 + j].abs();
        }
    }
    let b_norm = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    if best_abs < XI_MIN_DERIV_REL * b_norm {
        return Err(HorseshoeError::XiDerivativeTooSmall {
            value: best_abs,
            min: XI_MIN_DERIV_REL * b_norm,
        });
    }
    Ok((best, b[best]))
}

/// `Σ1` tangent vector along offset coordinate `coord`, corrected in the
/// `ξ` slot so the constraint's linearization annihilates it.
fn e_vector(coord: usize, xi_index: usize, xi_deriv: f64, spec: &ModelSpec) -> DVector<f64> {
    let dim1 = spec.dim_sigma1();
    let b = &spec.global_map.b;
    let mut e = DVector::zeros(dim1);
    e[coord] = 1.0;
    e[xi_index] -= b[coord] / xi_deriv;
    e
}

/// Ordered `Σ1` tangent frame `(E_{x1}, E_{y1}, E_{v⁻,k}, E_{v₊,j})`, where
/// the `v₊` block runs over `(z, v⁺)` coordinates without `ξ`.
fn e_frame(xi_index: usize, xi_deriv: f64, spec: &ModelSpec) -> Vec<DVector<f64>> {
    let n = spec.n_unstable();
    let m = spec.m_stable();
    let mut frame = Vec::with_capacity(2 + m + n);
    frame.push(e_vector(0, xi_index, xi_deriv, spec));
    frame.push(e_vector(1, xi_index, xi_deriv, spec));
    for k in 0..m {
        frame.push(e_vector(3 + n + k, xi_index, xi_deriv, spec));
    }
    for coord in 2..3 + n {
        if coord != xi_index {
            frame.push(e_vector(coord, xi_index, xi_deriv, spec));
        }
    }
    frame
}

/// Unstable-curve tangent at phase data `(x1, y1)`: the image under `A` of
/// the spiral tangent direction within the `(E_{x1}, E_{y1})` plane.
fn unstable_tangent(
    x1: f64,
    y1: f64,
    e_x: &DVector<f64>,
    e_y: &DVector<f64>,
    spec: &ModelSpec,
) -> DVector<f64> {
    let s = &spec.spectrum;
    let a = -s.alpha * x1 - s.beta * y1;
    let b = s.beta * x1 - s.alpha * y1;
    let tangent = e_x * a + e_y * b;
    let image = spec.a_matrix() * tangent;
    let norm = image.norm();
    image / norm
}

fn span_rank_of(columns: &[DVector<f64>]) -> (usize, f64) {
    let dim = columns[0].len();
    let mut mat = DMatrix::zeros(dim, columns.len());
    for (j, col) in columns.iter().enumerate() {
        let norm = col.norm();
        mat.set_column(j, &(col / norm.max(1e-300)));
    }
    let svd = mat.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&sv| sv > RANK_TOL * smax)
        .count();
    (rank, if smax > 0.0 { smin / smax } else { 0.0 })
}

fn span_columns(
    exi: &DVector<f64>,
    image_vp: &[DVector<f64>],
    spec: &ModelSpec,
) -> Vec<DVector<f64>> {
    let dim0 = spec.dim_sigma0();
    let n = spec.n_unstable();
    let m = spec.m_stable();
    let mut cols = Vec::with_capacity(2 + n + m);
    let mut e_x0 = DVector::zeros(dim0);
    e_x0[0] = 1.0;
    cols.push(e_x0);
    for k in 0..m {
        let mut e = DVector::zeros(dim0);
        e[2 + n + k] = 1.0;
        cols.push(e);
    }
    cols.push(exi.clone());
    cols.extend(image_vp.iter().cloned());
    cols
}

/// Fixed-point-free variant of the A6 span check used by model validation:
/// the unstable-curve phase comes from the leading-order root equation
/// (`β t* ≡ -φ mod 2π` at even indices) instead of a solved fixed point.
pub(crate) fn leading_span_rank(spec: &ModelSpec, phi: f64) -> (usize, f64) {
    let Ok((xi_index, xi_deriv)) = xi_selection(spec) else {
        return (0, 0.0);
    };
    let frame = e_frame(xi_index, xi_deriv, spec);
    let (sin, cos) = (-phi).sin_cos();
    let exi = unstable_tangent(cos, sin, &frame[0], &frame[1], spec);
    let m = spec.m_stable();
    let image_vp: Vec<DVector<f64>> = frame[2 + m..].iter().map(|e| spec.a_matrix() * e).collect();
    span_rank_of(&span_columns(&exi, &image_vp, spec))
}

fn orthonormal_basis(columns: &[DVector<f64>]) -> DMatrix<f64> {
    let dim = columns[0].len();
    let mut mat = DMatrix::zeros(dim, columns.len());
    for (j, col) in columns.iter().enumerate() {
        mat.set_column(j, col);
    }
    let qr = mat.qr();
    let q = qr.q();
    q.columns(0, columns.len()).into_owned()
}

/// Builds the tangent frame for slab `ell`, anchoring the unstable tangent
/// at the resident fixed point `p⁺`.
pub fn build_basis_frame(ell: usize, spec: &ModelSpec) -> Result<BasisFrame, HorseshoeError> {
    let slab = build_slab(ell, spec)?;
    basis_frame_for(&slab, spec)
}

pub(crate) fn basis_frame_for(slab: &Slab, spec: &ModelSpec) -> Result<BasisFrame, HorseshoeError> {
    let (xi_index, xi_deriv) = xi_selection(spec)?;
    let e_vectors = e_frame(xi_index, xi_deriv, spec);
    let image_vectors: Vec<DVector<f64>> = e_vectors.iter().map(|e| spec.a_matrix() * e).collect();

    let p1 = slab.fp_plus.sigma1_offsets(spec);
    let exi_plus = unstable_tangent(p1.x1, p1.y1, &e_vectors[0], &e_vectors[1], spec);

    let m = spec.m_stable();
    let image_vp = &image_vectors[2 + m..];
    let (span_rank, span_sv_ratio) = span_rank_of(&span_columns(&exi_plus, image_vp, spec));

    let mut unstable_cols = vec![exi_plus.clone()];
    unstable_cols.extend(image_vp.iter().cloned());
    let unstable_basis = orthonormal_basis(&unstable_cols);

    let dim0 = spec.dim_sigma0();
    let n = spec.n_unstable();
    let mut stable_cols = Vec::with_capacity(1 + m);
    let mut e_x0 = DVector::zeros(dim0);
    e_x0[0] = 1.0;
    stable_cols.push(e_x0);
    for k in 0..m {
        let mut e = DVector::zeros(dim0);
        e[2 + n + k] = 1.0;
        stable_cols.push(e);
    }
    let stable_basis = orthonormal_basis(&stable_cols);

    Ok(BasisFrame {
        xi_index,
        xi_deriv,
        e_vectors,
        image_vectors,
        exi_plus,
        unstable_basis,
        stable_basis,
        span_rank,
        span_sv_ratio,
    })
}

/// Shared context for the per-slab operations: the slab, its strips and the
/// tangent frame, over an immutable model.
#[derive(Debug, Clone)]
pub struct Horseshoe {
    pub spec: ModelSpec,
    pub slab: Slab,
    pub frame: BasisFrame,
    pub strips: [StripRegion; 2],
}

impl Horseshoe {
    pub fn new(ell: usize, spec: &ModelSpec) -> Result<Self, HorseshoeError> {
        let slab = build_slab(ell, spec)?;
        let frame = basis_frame_for(&slab, spec)?;
        let strips = slab.strips(spec);
        Ok(Horseshoe {
            spec: spec.clone(),
            slab,
            frame,
            strips,
        })
    }

    pub fn ell(&self) -> usize {
        self.slab.ell
    }
}

/// Standalone form of the Conley–Moser verification.
pub fn verify_conley_moser(
    ell: usize,
    spec: &ModelSpec,
    seed: u64,
) -> Result<ConleyMoserReport, HorseshoeError> {
    let hs = Horseshoe::new(ell, spec)?;
    hs.verify_conley_moser(seed)
}

/// Standalone form of the itinerary read-off.
pub fn itinerary_of(
    w: &crate::local_dynamics::Sigma0Point,
    n_fwd: usize,
    n_bwd: usize,
    ell: usize,
    spec: &ModelSpec,
) -> Result<Itinerary, HorseshoeError> {
    let hs = Horseshoe::new(ell, spec)?;
    Ok(hs.itinerary_of(w, n_fwd, n_bwd))
}

/// Standalone form of orbit shadowing. Callers are expected to have seen
/// [`verify_conley_moser`] pass for this slab first.
pub fn shadow_orbit(
    word: &SymbolWord,
    ell: usize,
    spec: &ModelSpec,
) -> Result<CantorPointCertificate, HorseshoeError> {
    let hs = Horseshoe::new(ell, spec)?;
    hs.shadow_orbit(word)
}

/// Standalone form of the conjugacy check; `mu_s`/`mu_u` come from a passed
/// Conley–Moser report.
pub fn check_conjugacy(
    word: &SymbolWord,
    ell: usize,
    spec: &ModelSpec,
    mu_u: f64,
    mu_s: f64,
) -> Result<ConjugacyReport, HorseshoeError> {
    let hs = Horseshoe::new(ell, spec)?;
    hs.check_conjugacy(word, mu_u, mu_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::global_map::constraint_value;
    use crate::local_dynamics::Sigma1Point;
    use crate::model::default_model;

    #[test]
    fn xi_is_the_dominant_constraint_coordinate() {
        let spec = default_model();
        let (xi, deriv) = xi_selection(&spec).unwrap();
        assert_eq!(xi, 2, "B_z dominates for M0");
        assert_eq!(deriv, 1.0);
    }

    #[test]
    fn e_vectors_are_annihilated_by_the_constraint_linearization() {
        let spec = default_model();
        let frame = build_basis_frame(5, &spec).unwrap();
        for e in &frame.e_vectors {
            // With zero quadratic contribution at w(-), the linearization is
            // exactly B.
            let p = Sigma1Point::from_vector(&(e * 1e-9), &spec);
            let linear: f64 = spec
                .global_map
                .b
                .iter()
                .zip(p.to_vector().iter())
                .map(|(b, v)| b * v)
                .sum();
            assert!(linear.abs() < 1e-20, "E vector not tangent: {linear}");
            let _ = constraint_value(&p, &spec);
        }
    }

    #[test]
    fn implicit_gradient_matches_linear_constraint() {
        let mut spec = default_model();
        spec.global_map.b = vec![0.1, 0.3, 1.0, 0.2, 0.05];
        let (xi, deriv) = xi_selection(&spec).unwrap();
        assert_eq!(xi, 2);
        let e_x = e_vector(0, xi, deriv, &spec);
        assert_eq!(e_x[2], -0.1 / 1.0);
    }

    #[test]
    fn m0_frame_has_full_span() {
        let spec = default_model();
        let frame = build_basis_frame(5, &spec).unwrap();
        assert_eq!(frame.span_rank, spec.dim_sigma0());
        assert!(frame.span_sv_ratio > 1e-3, "ratio {}", frame.span_sv_ratio);
    }
}
