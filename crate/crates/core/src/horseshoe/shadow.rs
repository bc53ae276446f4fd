//! Itineraries and shadowing: reading symbol sequences off orbits, Newton
//! inversion for backward steps, and the finite-window realization of
//! `φ_ℓ` by solving orbit segments with prescribed strip symbols.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::HorseshoeError;
use crate::global_map::{dp01_analytic, dp10_analytic, poincare_map};
use crate::local_dynamics::{flight_time, Sigma0Point};
use crate::symbols::SymbolWord;

use super::Horseshoe;

/// Iteration-verified depth cap for certificates. One return step amplifies
/// round-off by roughly `e^{λ⁺ T}` forward and `e^{λ⁻ T}` backward, so bare
/// iteration can confirm only a few symbols before the strip tests drown in
/// noise; orbit segments beyond the cap are certified by the shooting
/// residuals instead.
pub const VERIFY_CAP: usize = 3;

/// Largest shadowable window; beyond this the contraction per symbol is
/// below round-off at typical measured rates.
pub const MAX_WORD_LEN: usize = 12;

const SHADOW_TOL: f64 = 1e-11;

/// Effective residual tolerance for scaled orbit solves: the cancellation
/// noise of one map evaluation is of order `eps` times the intermediate
/// term scale, and dividing by the smallest coordinate scale turns that
/// into a floor on the achievable scaled residual.
fn scaled_tol(hs: &Horseshoe, sigma: &DVector<f64>) -> f64 {
    let spec = &hs.spec;
    let term_scale = spec.geometry.eta * (-spec.spectrum.alpha * hs.slab.t_anchor[0]).exp();
    let sigma_min = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    SHADOW_TOL.max(256.0 * f64::EPSILON * term_scale / sigma_min)
}

/// Symbol read-off along an orbit. Departures are data: the step index at
/// which an iterate left both strips.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Itinerary {
    pub anchor: Option<u8>,
    /// Symbols at steps `1, 2, …`.
    pub forward: Vec<u8>,
    /// Symbols at steps `-1, -2, …`.
    pub backward: Vec<u8>,
    pub departed_forward: Option<usize>,
    pub departed_backward: Option<usize>,
}

impl Itinerary {
    /// Whether the read-off reproduces `word` wherever the window and the
    /// recovered symbols overlap.
    pub fn matches(&self, word: &SymbolWord) -> bool {
        if self.anchor != Some(word.anchor()) {
            return false;
        }
        for (i, &bit) in self.forward.iter().enumerate() {
            if word
                .bit(i as i64 + 1)
                .is_some_and(|expected| expected != bit)
            {
                return false;
            }
        }
        for (i, &bit) in self.backward.iter().enumerate() {
            if word
                .bit(-(i as i64) - 1)
                .is_some_and(|expected| expected != bit)
            {
                return false;
            }
        }
        true
    }

    pub fn word(&self) -> Option<SymbolWord> {
        let anchor = self.anchor?;
        let mut past: Vec<u8> = self.backward.clone();
        past.reverse();
        SymbolWord::new(past, anchor, self.forward.clone()).ok()
    }
}

/// A finite-depth element of the invariant set: the shadow point, the solved
/// orbit segment, and how far plain iteration re-verified the word.
#[derive(Debug, Clone)]
pub struct CantorPointCertificate {
    pub word: SymbolWord,
    pub point: Sigma0Point,
    /// Orbit segment `w_{-k} … w_j` with `point` at index `k`.
    pub orbit: Vec<Sigma0Point>,
    pub forward_check: usize,
    pub backward_check: usize,
    /// Largest scaled step residual `‖P(w_i) - w_{i+1}‖` of the segment.
    pub max_drift: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConjugacyReport {
    pub word: SymbolWord,
    pub shifted: SymbolWord,
    /// `‖P(φ(word)) - φ(χ word)‖`.
    pub distance: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConjugacySummary {
    pub ell: usize,
    pub reports: Vec<ConjugacyReport>,
    pub max_distance: f64,
    pub max_tol: f64,
    pub all_passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub j: usize,
    /// Initial separation of the two shadow points.
    pub delta: f64,
    /// Orbit separation at step `j`.
    pub separation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub ell: usize,
    pub rows: Vec<SensitivityRow>,
    /// Distance from `p⁺` to the other strip's `z` window.
    pub strip_gap: f64,
    pub deltas_strictly_decreasing: bool,
    pub separations_reach_gap: bool,
}

/// Boundary pins for an orbit-segment solve: contracting coordinates at the
/// backward end, the expanding chart at the forward end.
#[derive(Debug, Clone)]
pub(crate) struct SegmentPins {
    pub start_x0: f64,
    pub start_vm0: DVector<f64>,
    pub end_t_hat: f64,
    pub end_vp_chart: DVector<f64>,
}

impl Horseshoe {
    /// Pins anchored at the resident fixed points of the end symbols.
    pub(crate) fn fixed_point_pins(&self, first: u8, last: u8) -> SegmentPins {
        let spec = &self.spec;
        let fp_first = &self.slab.resident(first).raw;
        let fp_last = &self.slab.resident(last).raw;
        let gamma = spec.spectrum.gamma;
        let eta = spec.geometry.eta;
        let th = (eta / fp_last.z0).ln() / gamma;
        SegmentPins {
            start_x0: fp_first.x0,
            start_vm0: fp_first.v_minus0.clone(),
            end_t_hat: th,
            end_vp_chart: DVector::from_fn(spec.n_unstable(), |j, _| {
                (spec.spectrum.lambda_plus[j] * th).exp() * fp_last.v_plus0[j]
                    - spec.geometry.v_star_plus[j]
            }),
        }
    }

    /// Per-coordinate scales of the slab, used to make residual norms
    /// comparable across the wildly different coordinate magnitudes.
    pub(crate) fn coordinate_scales(&self) -> DVector<f64> {
        let spec = &self.spec;
        let n = spec.n_unstable();
        let m = spec.m_stable();
        let mut sigma = DVector::zeros(spec.dim_sigma0());
        sigma[0] = self.slab.x_bound;
        sigma[1] = self.slab.z_hi - self.slab.z_lo;
        let t_center = 0.5 * (self.strips[0].t_lo + self.strips[1].t_hi);
        let vp_star: f64 = spec
            .geometry
            .v_star_plus
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        for j in 0..n {
            sigma[2 + j] =
                (-spec.spectrum.lambda_plus[j] * t_center).exp() * (self.slab.vp_bound + vp_star);
        }
        let vs: f64 = spec
            .geometry
            .v_star_minus
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        for k in 0..m {
            sigma[2 + n + k] = 0.8 * (spec.geometry.eta - vs);
        }
        sigma
    }

    /// Classifies a point: `Some(symbol)` when it lies in a strip (all four
    /// slab families plus the section constraints), `None` otherwise.
    pub fn classify(&self, w: &Sigma0Point) -> Option<u8> {
        let membership = self.slab.membership(w, &self.spec).ok()?;
        if membership.contains() {
            Some(self.slab.strip_symbol(w, &self.spec))
        } else {
            None
        }
    }

    /// Reads the itinerary of `w`: forward by iterating the return map,
    /// backward by Newton inversion seeded at the strip's resident fixed
    /// point. Departure from both strips truncates with a flag.
    pub fn itinerary_of(&self, w: &Sigma0Point, n_fwd: usize, n_bwd: usize) -> Itinerary {
        let anchor = self.classify(w);
        let mut itinerary = Itinerary {
            anchor,
            forward: Vec::new(),
            backward: Vec::new(),
            departed_forward: None,
            departed_backward: None,
        };
        if anchor.is_none() {
            itinerary.departed_forward = Some(0);
            itinerary.departed_backward = Some(0);
            return itinerary;
        }

        let mut current = w.clone();
        for step in 1..=n_fwd {
            match poincare_map(&current, &self.spec) {
                Ok(result) => match self.classify(&result.point) {
                    Some(symbol) => {
                        itinerary.forward.push(symbol);
                        current = result.point;
                    }
                    None => {
                        itinerary.departed_forward = Some(step);
                        break;
                    }
                },
                Err(_) => {
                    itinerary.departed_forward = Some(step);
                    break;
                }
            }
        }

        let mut current = w.clone();
        for step in 1..=n_bwd {
            match self.invert_step(&current) {
                Some((pre, symbol)) => {
                    itinerary.backward.push(symbol);
                    current = pre;
                }
                None => {
                    itinerary.departed_backward = Some(step);
                    break;
                }
            }
        }
        itinerary
    }

    /// One backward step: the preimage of `target` inside one of the two
    /// strips, found by damped Newton on `P(w) = target` with the forward
    /// Jacobian. At most one strip can host the preimage; both are tried.
    fn invert_step(&self, target: &Sigma0Point) -> Option<(Sigma0Point, u8)> {
        let sigma = self.coordinate_scales();
        let target_vec = target.to_vector();
        let mut found: Option<(Sigma0Point, u8)> = None;
        for symbol in [0u8, 1u8] {
            let seed = self.slab.resident(symbol).raw.clone();
            if let Some(pre) = self.newton_invert(&seed, &target_vec, &sigma) {
                if self.classify(&pre) == Some(symbol) && found.is_none() {
                    found = Some((pre, symbol));
                }
            }
        }
        found
    }

    fn newton_invert(
        &self,
        seed: &Sigma0Point,
        target: &DVector<f64>,
        sigma: &DVector<f64>,
    ) -> Option<Sigma0Point> {
        let spec = &self.spec;
        let scaled_residual = |w: &Sigma0Point| -> Option<DVector<f64>> {
            let image = poincare_map(w, spec).ok()?.point.to_vector();
            let mut r = image - target;
            for i in 0..r.len() {
                r[i] /= sigma[i];
            }
            Some(r)
        };
        let tol = scaled_tol(self, sigma);
        let mut w = seed.clone();
        let mut residual = scaled_residual(&w)?;
        let mut norm = residual.amax();
        // Iterate to stagnation rather than stopping at the tolerance: the
        // backward-expanding coordinates need every digit the arithmetic
        // can give.
        for _ in 0..40 {
            let flight = flight_time(&w, spec).ok()?;
            let mut jac =
                dp10_analytic(&flight.point, spec) * dp01_analytic(&w, flight.t_star, spec);
            for i in 0..jac.nrows() {
                for j in 0..jac.ncols() {
                    jac[(i, j)] /= sigma[i];
                }
            }
            let step = jac.lu().solve(&residual)?;
            let mut damping = 1.0;
            let mut accepted = false;
            for _ in 0..20 {
                let cand_vec = w.to_vector() - &step * damping;
                let cand = Sigma0Point::from_vector(&cand_vec, spec);
                if let Some(r) = scaled_residual(&cand) {
                    let cand_norm = r.amax();
                    if cand_norm < norm {
                        w = cand;
                        residual = r;
                        norm = cand_norm;
                        accepted = true;
                        break;
                    }
                }
                damping *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (norm <= tol).then_some(w)
    }

    /// Solves the orbit-segment system for prescribed strip symbols: step
    /// equations `P(w_i) = w_{i+1}`, the contracting coordinates pinned at
    /// the backward end (they propagate forward stably), and the expanding
    /// chart pinned at the forward end (it propagates backward stably).
    /// Returns the points and the final scaled residual.
    pub(crate) fn solve_segment(
        &self,
        symbols: &[u8],
        seeds: Vec<Sigma0Point>,
        pins: &SegmentPins,
    ) -> Option<(Vec<Sigma0Point>, f64)> {
        let spec = &self.spec;
        let dim = spec.dim_sigma0();
        let n = spec.n_unstable();
        let count = symbols.len();
        let sigma = self.coordinate_scales();
        let total = count * dim;
        let gamma = spec.spectrum.gamma;
        let eta = spec.geometry.eta;
        let t_scale = self.strips[1].t_hi - self.strips[0].t_lo;

        let t_hat = |z0: f64| (eta / z0).ln() / gamma;
        let vp_chart = |w: &Sigma0Point| -> DVector<f64> {
            let th = t_hat(w.z0);
            DVector::from_fn(n, |j, _| {
                (spec.spectrum.lambda_plus[j] * th).exp() * w.v_plus0[j]
                    - spec.geometry.v_star_plus[j]
            })
        };

        let residual = |points: &[Sigma0Point]| -> Option<DVector<f64>> {
            let mut r = DVector::zeros(total);
            let mut row = 0;
            for i in 0..count - 1 {
                let image = poincare_map(&points[i], spec).ok()?.point.to_vector();
                let next = points[i + 1].to_vector();
                for c in 0..dim {
                    r[row + c] = (image[c] - next[c]) / sigma[c];
                }
                row += dim;
            }
            let w0 = &points[0];
            r[row] = (w0.x0 - pins.start_x0) / sigma[0];
            row += 1;
            for k in 0..spec.m_stable() {
                r[row + k] = (w0.v_minus0[k] - pins.start_vm0[k]) / sigma[2 + n + k];
            }
            row += spec.m_stable();
            let wl = &points[count - 1];
            r[row] = (t_hat(wl.z0) - pins.end_t_hat) / t_scale;
            row += 1;
            let chart = vp_chart(wl);
            for j in 0..n {
                r[row + j] = (chart[j] - pins.end_vp_chart[j]) / self.slab.vp_bound;
            }
            Some(r)
        };

        let jacobian = |points: &[Sigma0Point]| -> Option<DMatrix<f64>> {
            let mut jac = DMatrix::zeros(total, total);
            let mut row = 0;
            for i in 0..count - 1 {
                let flight = flight_time(&points[i], spec).ok()?;
                let dp = dp10_analytic(&flight.point, spec)
                    * dp01_analytic(&points[i], flight.t_star, spec);
                for r_c in 0..dim {
                    for c in 0..dim {
                        jac[(row + r_c, i * dim + c)] = dp[(r_c, c)] / sigma[r_c];
                    }
                    jac[(row + r_c, (i + 1) * dim + r_c)] = -1.0 / sigma[r_c];
                }
                row += dim;
            }
            jac[(row, 0)] = 1.0 / sigma[0];
            row += 1;
            for k in 0..spec.m_stable() {
                jac[(row + k, 2 + n + k)] = 1.0 / sigma[2 + n + k];
            }
            row += spec.m_stable();
            let last = (count - 1) * dim;
            let wl = &points[count - 1];
            jac[(row, last + 1)] = -1.0 / (gamma * wl.z0) / t_scale;
            row += 1;
            let th = t_hat(wl.z0);
            for j in 0..n {
                let lam = spec.spectrum.lambda_plus[j];
                let growth = (lam * th).exp();
                jac[(row + j, last + 2 + j)] = growth / self.slab.vp_bound;
                jac[(row + j, last + 1)] =
                    -lam * growth * wl.v_plus0[j] / (gamma * wl.z0) / self.slab.vp_bound;
            }
            Some(jac)
        };

        let tol = scaled_tol(self, &sigma);
        let mut points = seeds;
        let mut r = residual(&points)?;
        let mut norm = r.amax();
        for _ in 0..60 {
            if norm <= tol {
                break;
            }
            let jac = jacobian(&points)?;
            let step = jac.lu().solve(&r)?;
            if !step.iter().all(|v| v.is_finite()) {
                return None;
            }
            let mut damping = 1.0;
            let mut accepted = false;
            for _ in 0..20 {
                let mut cand = points.clone();
                for (i, point) in cand.iter_mut().enumerate() {
                    let mut v = point.to_vector();
                    for c in 0..dim {
                        v[c] -= damping * step[i * dim + c];
                    }
                    *point = Sigma0Point::from_vector(&v, spec);
                }
                if let Some(cr) = residual(&cand) {
                    let cn = cr.amax();
                    if cn < norm {
                        points = cand;
                        r = cr;
                        norm = cn;
                        accepted = true;
                        break;
                    }
                }
                damping *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (norm <= tol).then_some((points, norm))
    }

    /// Orbit segment with the word's symbols, grown window by window:
    /// the anchor alone first, then alternately one future and one past
    /// symbol, re-solving after each extension (each step intersects one
    /// more image or preimage of the strips).
    fn solve_word_orbit(
        &self,
        word: &SymbolWord,
    ) -> Result<(Vec<Sigma0Point>, f64), HorseshoeError> {
        let k = word.past_len() as i64;
        let j = word.future_len() as i64;
        let bit_at = |idx: i64| word.bit(idx).expect("index inside window");

        let mut lo = 0i64;
        let mut hi = 0i64;
        let mut points = vec![self.slab.resident(bit_at(0)).raw.clone()];
        let mut drift = 0.0;
        loop {
            let mut extended = false;
            if hi < j {
                hi += 1;
                points.push(self.slab.resident(bit_at(hi)).raw.clone());
                extended = true;
            }
            if extended {
                let symbols: Vec<u8> = (lo..=hi).map(bit_at).collect();
                let pins = self.fixed_point_pins(symbols[0], symbols[symbols.len() - 1]);
                let (solved, norm) =
                    self.solve_segment(&symbols, points, &pins).ok_or_else(|| {
                        HorseshoeError::EmptyIntersection {
                            depth: (hi.max(-lo)) as usize,
                            word: word.to_string(),
                        }
                    })?;
                points = solved;
                drift = norm;
            }
            let mut extended_past = false;
            if lo > -k {
                lo -= 1;
                points.insert(0, self.slab.resident(bit_at(lo)).raw.clone());
                extended_past = true;
            }
            if extended_past {
                let symbols: Vec<u8> = (lo..=hi).map(bit_at).collect();
                let pins = self.fixed_point_pins(symbols[0], symbols[symbols.len() - 1]);
                let (solved, norm) =
                    self.solve_segment(&symbols, points, &pins).ok_or_else(|| {
                        HorseshoeError::EmptyIntersection {
                            depth: (hi.max(-lo)) as usize,
                            word: word.to_string(),
                        }
                    })?;
                points = solved;
                drift = norm;
            }
            if !extended && !extended_past {
                break;
            }
        }

        // Every solved point must really live in its prescribed strip.
        for (offset, point) in points.iter().enumerate() {
            let idx = lo + offset as i64;
            let expected = bit_at(idx);
            if self.classify(point) != Some(expected) {
                return Err(HorseshoeError::EmptyIntersection {
                    depth: idx.unsigned_abs() as usize,
                    word: word.to_string(),
                });
            }
        }
        Ok((points, drift))
    }

    /// Finite-depth realization of `φ_ℓ`: a point whose itinerary matches
    /// the word over its window. The certificate re-verifies the symbols by
    /// plain iteration up to [`VERIFY_CAP`] each way.
    pub fn shadow_orbit(
        &self,
        word: &SymbolWord,
    ) -> Result<CantorPointCertificate, HorseshoeError> {
        if word.len() > MAX_WORD_LEN {
            return Err(HorseshoeError::WordTooLong {
                len: word.len(),
                max: MAX_WORD_LEN,
            });
        }
        let (orbit, max_drift) = self.solve_word_orbit(word)?;
        let k = word.past_len();
        let point = orbit[k].clone();

        let f_depth = word.future_len().min(VERIFY_CAP);
        let b_depth = word.past_len().min(VERIFY_CAP);
        let itinerary = self.itinerary_of(&point, f_depth, b_depth);
        if !itinerary.matches(word)
            || itinerary.forward.len() < f_depth
            || itinerary.backward.len() < b_depth
        {
            let got = itinerary
                .word()
                .map(|w| w.to_string())
                .unwrap_or_else(|| "departed".to_string());
            return Err(HorseshoeError::ItineraryMismatch {
                word: word.to_string(),
                step: itinerary
                    .departed_forward
                    .map(|s| s as i64)
                    .or(itinerary.departed_backward.map(|s| -(s as i64)))
                    .unwrap_or(0),
                expected: word.to_string(),
                got,
            });
        }

        Ok(CantorPointCertificate {
            word: word.clone(),
            point,
            orbit,
            forward_check: f_depth,
            backward_check: b_depth,
            max_drift,
        })
    }

    /// Conjugacy check `‖P(φ(a)) - φ(χ a)‖ ≤ tol` at the word's depth, with
    /// the tolerance derived from the measured cone rates: both sides lie in
    /// the rectangle of the shifted word, whose diameter contracts like
    /// `μ_s` backward and `μ_u⁻¹` forward.
    pub fn check_conjugacy(
        &self,
        word: &SymbolWord,
        mu_u: f64,
        mu_s: f64,
    ) -> Result<ConjugacyReport, HorseshoeError> {
        let shifted = word.shift()?;
        let cert_a = self.shadow_orbit(word)?;
        let cert_b = self.shadow_orbit(&shifted)?;
        let image = poincare_map(&cert_a.point, &self.spec)
            .map_err(HorseshoeError::Flight)?
            .point;
        let distance = (image.to_vector() - cert_b.point.to_vector()).norm();
        let tol = self.conjugacy_tol(&shifted, mu_u, mu_s);
        Ok(ConjugacyReport {
            word: word.clone(),
            shifted,
            distance,
            tol,
            passed: distance <= tol,
        })
    }

    pub fn conjugacy_tol(&self, window: &SymbolWord, mu_u: f64, mu_s: f64) -> f64 {
        let spec = &self.spec;
        let vs: f64 = spec
            .geometry
            .v_star_minus
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        let d_stable = (2.0 * self.slab.x_bound).hypot(2.0 * 0.8 * (spec.geometry.eta - vs));
        let d_unstable = (self.slab.z_hi - self.slab.z_lo).hypot(2.0 * self.slab.vp_bound);
        let back = mu_s.powi(window.past_len() as i32);
        let fwd = mu_u.powi(-(window.future_len() as i32));
        10.0 * (d_stable * back + d_unstable * fwd) + 100.0 * spec.tolerances.newton_tol
    }

    /// Runs the conjugacy check over every anchored word of length `len`.
    pub fn conjugacy_sweep(
        &self,
        len: usize,
        mu_u: f64,
        mu_s: f64,
    ) -> Result<ConjugacySummary, HorseshoeError> {
        let mut reports = Vec::new();
        for word in SymbolWord::enumerate(len) {
            reports.push(self.check_conjugacy(&word, mu_u, mu_s)?);
        }
        let max_distance = reports.iter().map(|r| r.distance).fold(0.0, f64::max);
        let max_tol = reports.iter().map(|r| r.tol).fold(0.0, f64::max);
        let all_passed = reports.iter().all(|r| r.passed);
        Ok(ConjugacySummary {
            ell: self.slab.ell,
            reports,
            max_distance,
            max_tol,
            all_passed,
        })
    }

    /// Sensitive-dependence experiment: for each `j`, two words agreeing on
    /// `|k| < j` and differing at `k = j` are shadowed; their initial
    /// separation shrinks with `j` while the orbits are a strip gap apart by
    /// step `j`. Orbit positions come from the certified segments, whose
    /// accuracy does not degrade with depth.
    pub fn sensitivity(&self, j_max: usize) -> Result<SensitivityReport, HorseshoeError> {
        let strip_gap = self.slab.fp_plus.raw.z0 - self.slab.z_split(&self.spec);
        let mut rows = Vec::new();
        for j in 2..=j_max {
            let word_a = SymbolWord::constant(0, j - 1, j);
            let mut future = vec![0u8; j];
            future[j - 1] = 1;
            let word_b = SymbolWord::new(vec![0; j - 1], 0, future)?;
            let (orbit_a, _) = self.solve_word_orbit(&word_a)?;
            let (orbit_b, _) = self.solve_word_orbit(&word_b)?;
            let k = j - 1;
            let delta = (orbit_a[k].to_vector() - orbit_b[k].to_vector()).norm();
            let separation = (orbit_a[k + j].to_vector() - orbit_b[k + j].to_vector()).norm();
            rows.push(SensitivityRow {
                j,
                delta,
                separation,
            });
        }
        let deltas_strictly_decreasing = rows.windows(2).all(|w| w[1].delta < w[0].delta);
        let separations_reach_gap = rows.iter().all(|r| r.separation >= strip_gap);
        Ok(SensitivityReport {
            ell: self.slab.ell,
            rows,
            strip_gap,
            deltas_strictly_decreasing,
            separations_reach_gap,
        })
    }
}

/// CSV rendering of shadow certificates, 17 significant digits.
pub fn certificates_to_csv(certs: &[CantorPointCertificate]) -> String {
    let mut out = String::from("word,x0,z0,vp0,vm0,forward_check,backward_check,max_drift\n");
    for cert in certs {
        let vp: Vec<String> = cert
            .point
            .v_plus0
            .iter()
            .map(|v| format!("{v:.17e}"))
            .collect();
        let vm: Vec<String> = cert
            .point
            .v_minus0
            .iter()
            .map(|v| format!("{v:.17e}"))
            .collect();
        out.push_str(&format!(
            "{},{:.17e},{:.17e},{},{},{},{},{:.17e}\n",
            cert.word,
            cert.point.x0,
            cert.point.z0,
            vp.join(";"),
            vm.join(";"),
            cert.forward_check,
            cert.backward_check,
            cert.max_drift
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::default_model;

    fn horseshoe() -> Horseshoe {
        // Slab 4 keeps the per-step round-off amplification low enough for
        // depth-3 verification both ways.
        Horseshoe::new(4, &default_model()).unwrap()
    }

    #[test]
    fn fixed_point_itineraries_are_constant() {
        let hs = horseshoe();
        let plus = hs.itinerary_of(&hs.slab.fp_plus.raw.clone(), 3, 3);
        assert_eq!(plus.anchor, Some(0));
        assert_eq!(plus.forward, vec![0, 0, 0]);
        assert_eq!(plus.backward, vec![0, 0, 0]);
        let minus = hs.itinerary_of(&hs.slab.fp_minus.raw.clone(), 3, 3);
        assert_eq!(minus.anchor, Some(1));
        assert_eq!(minus.forward, vec![1, 1, 1]);
        assert_eq!(minus.backward, vec![1, 1, 1]);
    }

    #[test]
    fn all_zero_word_shadows_to_p_plus() {
        let hs = horseshoe();
        let word = SymbolWord::constant(0, 2, 2);
        let cert = hs.shadow_orbit(&word).unwrap();
        let dist = (cert.point.to_vector() - hs.slab.fp_plus.raw.to_vector()).norm();
        assert!(
            dist <= 10.0 * hs.spec.tolerances.newton_tol,
            "distance to p+ = {dist:e}"
        );
    }

    #[test]
    fn period_two_word_gives_a_period_two_orbit() {
        let hs = horseshoe();
        // Full-length window: the finite-depth resolution of the shadow
        // point scales with the window, so the deepest word gives the
        // tightest periodic orbit.
        let word = SymbolWord::parse("010101,010101").unwrap();
        let cert = hs.shadow_orbit(&word).unwrap();
        let once = poincare_map(&cert.point, &hs.spec).unwrap().point;
        let twice = poincare_map(&once, &hs.spec).unwrap().point;
        let dist = (twice.to_vector() - cert.point.to_vector()).norm();
        assert!(dist < 1e-6, "period-2 displacement {dist:e}");
    }

    #[test]
    fn alternating_word_round_trips() {
        let hs = horseshoe();
        let word = SymbolWord::parse("010,101").unwrap();
        let cert = hs.shadow_orbit(&word).unwrap();
        let itinerary = hs.itinerary_of(&cert.point, 3, 2);
        assert!(itinerary.matches(&word));
        assert_eq!(itinerary.forward, vec![1, 0, 1]);
        assert_eq!(itinerary.backward, vec![1, 0]);
    }

    #[test]
    fn constant_word_conjugacy_is_exact() {
        let hs = horseshoe();
        let word = SymbolWord::constant(1, 2, 2);
        let report = hs.check_conjugacy(&word, 100.0, 0.3).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.distance < 1e-8, "distance {:e}", report.distance);
    }
}
