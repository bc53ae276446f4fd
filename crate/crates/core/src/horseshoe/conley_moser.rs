//! Numerical certificate for the Conley–Moser conditions on a slab: the two
//! sub-slab images cross the slab as disjoint full-height vertical strips,
//! the return-map Jacobian expands a phase-adapted unstable cone field and
//! contracts a stable cone, and both cone fields are invariant.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::HorseshoeError;
use crate::global_map::{dp01_analytic, dp10_analytic, poincare_map};
use crate::local_dynamics::{flight_time, Sigma0Point};
use crate::model::ModelSpec;

use super::{Horseshoe, StripRegion, CONE_HALF_ANGLE};

/// Margins smaller than this (in their dimensionless units) are treated as
/// statistically indistinct from zero: the verdict degrades to
/// `inconclusive` instead of a hard pass or fail.
pub const STAT_MARGIN: f64 = 1e-6;

/// Number of fibers per strip scanned for the crossing bookkeeping.
const FIBERS_PER_STRIP: usize = 64;

/// Grid resolution along each fiber.
const FIBER_GRID: usize = 48;

/// In-window samples drawn per fiber once its crossing interval is known.
const IN_WINDOW_PER_FIBER: usize = 8;

/// Ball shrink factors keeping samples strictly inside their bounds.
const VP_SAFETY: f64 = 0.9;
const VM_SAFETY: f64 = 0.8;
const SECTION_SAFETY: f64 = 0.995;

/// Relative inset of face samples, keeping the closed-boundary tests clear
/// of round-off.
const FACE_INSET: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CmParams {
    pub kappa: f64,
    pub cm_samples: usize,
    pub stat_margin: f64,
    pub seed: u64,
    pub fibers_per_strip: usize,
}

/// Cone-check aggregates over all tested points and directions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeStats {
    pub mu_u_min: f64,
    pub mu_s_max: f64,
    /// Worst unstable image angle to the image point's cone axis, over the
    /// samples whose image admits a frame.
    pub max_angle_u: f64,
    pub max_angle_s: f64,
    pub points: usize,
    /// Samples with forward cone-invariance checked (image inside the slab
    /// window).
    pub invariance_points: usize,
    pub directions_per_point: usize,
    pub solver_failures: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StripSummary {
    pub symbol: u8,
    pub z_window: (f64, f64),
    pub t_window: (f64, f64),
    /// Hull of the flight-time preimage of the slab crossing over all
    /// scanned fibers.
    pub preimage_t_window: (f64, f64),
    pub preimage_z_window: (f64, f64),
    /// Return phase `β t* mod 2π` at the crossing center.
    pub image_phase: f64,
    pub in_window_samples: usize,
    pub crossing_count_ok: bool,
    /// Image sides of the two fiber endpoints: -1 below the slab, +1 above,
    /// 0 when inconsistent across fibers.
    pub entry_side: i8,
    pub exit_side: i8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CmMargins {
    /// `mu_u - 1`.
    pub expansion: f64,
    /// `1 - mu_s`.
    pub contraction: f64,
    /// `kappa` minus the worst unstable image angle (radians).
    pub cone_unstable: f64,
    /// `kappa` minus the worst stable preimage angle (radians).
    pub cone_stable: f64,
    /// Smallest relative `x` slack of in-window images.
    pub strip_containment_x: f64,
    /// Gap between the two preimage windows relative to the slab height.
    pub strip_gap_rel: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleStats {
    pub boundary_valid: usize,
    pub interior_valid: usize,
    pub fiber_in_window: usize,
    pub intersection_valid: usize,
    pub intersection_misses: usize,
    pub rejected: usize,
    pub flight_failures: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConleyMoserReport {
    pub verdict: Verdict,
    pub ell: usize,
    pub mu_u: f64,
    pub mu_s: f64,
    pub margins: CmMargins,
    pub strips: [StripSummary; 2],
    /// Gap between the two strips' flight-time preimage windows.
    pub gap_t: f64,
    /// The same gap measured in the expanding coordinate `z`.
    pub gap_z: f64,
    pub cone: ConeStats,
    pub samples: SampleStats,
    pub failures: Vec<String>,
    pub params: CmParams,
}

impl ConleyMoserReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn gaussian(rng: &mut ChaCha12Rng) -> f64 {
    // Box-Muller; the tiny floor keeps the log finite.
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn ball_sample(rng: &mut ChaCha12Rng, dim: usize, radius: f64) -> DVector<f64> {
    if dim == 0 {
        return DVector::zeros(0);
    }
    let mut v = DVector::from_fn(dim, |_, _| gaussian(rng));
    let norm = v.norm();
    if norm == 0.0 {
        return DVector::zeros(dim);
    }
    let u: f64 = rng.random::<f64>();
    v *= radius * u.powf(1.0 / dim as f64) / norm;
    v
}

fn sphere_sample(rng: &mut ChaCha12Rng, dim: usize, radius: f64) -> DVector<f64> {
    if dim == 0 {
        return DVector::zeros(0);
    }
    let v = DVector::from_fn(dim, |_, _| gaussian(rng));
    let norm = v.norm();
    if norm == 0.0 {
        let mut e = DVector::zeros(dim);
        e[0] = radius;
        return e;
    }
    v * (radius / norm)
}

/// Admissible `x0` interval: the slab bound clipped to the open section.
fn x_range(hs: &Horseshoe) -> (f64, f64) {
    let g = &hs.spec.geometry;
    let s = &hs.spec.spectrum;
    let x_sec_lo = g.eta * (-2.0 * std::f64::consts::PI * s.alpha / s.beta).exp();
    let lo = (-hs.slab.x_bound).max(SECTION_SAFETY * (x_sec_lo - g.x_star));
    let hi = hs.slab.x_bound.min(SECTION_SAFETY * (g.eta - g.x_star));
    (lo, hi)
}

fn vm_radius(spec: &ModelSpec) -> f64 {
    let vs: f64 = spec
        .geometry
        .v_star_minus
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    VM_SAFETY * (spec.geometry.eta - vs)
}

/// v⁺ chart radius for fiber probes: half the spiral radius at the slab, or
/// the slab bound if that is smaller.
fn fiber_vp_radius(hs: &Horseshoe) -> f64 {
    let spiral =
        hs.spec.geometry.x_star.abs() * (-hs.spec.spectrum.alpha * hs.slab.t_anchor[0]).exp();
    (0.5 * spiral).min(VP_SAFETY * hs.slab.vp_bound)
}

/// Builds the slab point with flight parameter `t_hat`, free coordinates
/// `(x0, vm0)` and the v⁺ chart target `vp1_t` (the v⁺ coordinate is slaved
/// to `t_hat` so the image-norm inequality can hold).
fn chart_point(
    hs: &Horseshoe,
    t_hat: f64,
    x0: f64,
    vp1_t: &DVector<f64>,
    vm0: &DVector<f64>,
) -> Sigma0Point {
    let spec = &hs.spec;
    let s = &spec.spectrum;
    Sigma0Point {
        x0,
        z0: spec.geometry.eta * (-s.gamma * t_hat).exp(),
        v_plus0: DVector::from_fn(spec.n_unstable(), |j, _| {
            (-s.lambda_plus[j] * t_hat).exp() * (vp1_t[j] + spec.geometry.v_star_plus[j])
        }),
        v_minus0: vm0.clone(),
    }
}

enum Face {
    TLo,
    THi,
    XLo,
    XHi,
    VpSphere,
    VmSphere,
}

/// One validated sample of a strip, or `None` when the draw landed outside
/// (the caller retries).
fn draw_sample(
    hs: &Horseshoe,
    strip: &StripRegion,
    rng: &mut ChaCha12Rng,
    face: Option<&Face>,
) -> Option<Sigma0Point> {
    let spec = &hs.spec;
    let n = spec.n_unstable();
    let m = spec.m_stable();
    let (x_lo, x_hi) = x_range(hs);
    let r_vm = vm_radius(spec);
    let vp_r = VP_SAFETY * hs.slab.vp_bound;
    let t_width = strip.t_hi - strip.t_lo;

    let mut t_hat = rng.random_range(strip.t_lo..strip.t_hi);
    let mut x0 = rng.random_range(x_lo..x_hi);
    let mut vp1_t = ball_sample(rng, n, vp_r);
    let mut vm0 = ball_sample(rng, m, r_vm);
    match face {
        Some(Face::TLo) => t_hat = strip.t_lo + FACE_INSET * t_width,
        Some(Face::THi) => t_hat = strip.t_hi - FACE_INSET * t_width,
        Some(Face::XLo) => x0 = x_lo,
        Some(Face::XHi) => x0 = x_hi,
        Some(Face::VpSphere) => vp1_t = sphere_sample(rng, n, vp_r),
        Some(Face::VmSphere) => vm0 = sphere_sample(rng, m, r_vm),
        None => {}
    }
    let w = chart_point(hs, t_hat, x0, &vp1_t, &vm0);
    let membership = hs.slab.membership(&w, spec).ok()?;
    if membership.contains() && hs.slab.strip_symbol(&w, spec) == strip.symbol {
        Some(w)
    } else {
        None
    }
}

/// Image `z` along a fiber, for the crossing bookkeeping.
fn image_z(
    hs: &Horseshoe,
    t_hat: f64,
    x0: f64,
    vp1_t: &DVector<f64>,
    vm0: &DVector<f64>,
) -> Option<(f64, f64)> {
    let w = chart_point(hs, t_hat, x0, vp1_t, vm0);
    let result = poincare_map(&w, &hs.spec).ok()?;
    Some((result.point.z0, result.t_star))
}

struct FiberScan {
    t_in: f64,
    t_out: f64,
    phase: f64,
    entry_side: i8,
    exit_side: i8,
    crossing_ok: bool,
    in_window_points: Vec<Sigma0Point>,
    image_x_margin: f64,
    image_in_sigma0: bool,
}

fn side_of(z: f64, z_lo: f64, z_hi: f64) -> i8 {
    if z > z_hi {
        1
    } else if z < z_lo {
        -1
    } else {
        0
    }
}

/// Scans one fiber (fixed transverse coordinates, flight parameter sweeping
/// the strip) for its crossing of the slab `z` window: locates the entry and
/// exit parameters by bisection and samples the in-window piece.
fn scan_fiber(
    hs: &Horseshoe,
    strip: &StripRegion,
    rng: &mut ChaCha12Rng,
    failures: &mut Vec<String>,
) -> Option<FiberScan> {
    let spec = &hs.spec;
    let n = spec.n_unstable();
    let m = spec.m_stable();
    let (x_lo, x_hi) = x_range(hs);
    let x0 = rng.random_range(x_lo..x_hi);
    // Fiber probes stay inside the spiral-radius tube in v⁺: beyond it the
    // v⁺ feedthrough into the image exceeds the spiral amplitude and the
    // one-parameter crossing picture no longer applies (that part of the
    // slab is covered by the cone and intersection checks).
    let vp1_t = ball_sample(rng, n, fiber_vp_radius(hs));
    let vm0 = ball_sample(rng, m, vm_radius(spec));
    let (z_lo, z_hi) = (hs.slab.z_lo, hs.slab.z_hi);
    let z_mid = 0.5 * (z_lo + z_hi);
    let t_width = strip.t_hi - strip.t_lo;
    let (t_a, t_b) = (
        strip.t_lo + FACE_INSET * t_width,
        strip.t_hi - FACE_INSET * t_width,
    );

    let mut grid = Vec::with_capacity(FIBER_GRID + 1);
    for i in 0..=FIBER_GRID {
        let t_hat = t_a + (t_b - t_a) * i as f64 / FIBER_GRID as f64;
        let Some((z, t_star)) = image_z(hs, t_hat, x0, &vp1_t, &vm0) else {
            failures.push(format!(
                "strip {}: fiber flight failed at t_hat={t_hat:.6}",
                strip.symbol
            ));
            return None;
        };
        grid.push((t_hat, z, t_star));
    }

    let crossings: Vec<usize> = (1..grid.len())
        .filter(|&i| (grid[i - 1].1 - z_mid).signum() != (grid[i].1 - z_mid).signum())
        .collect();
    let crossing_ok = crossings.len() == 1;
    if !crossing_ok {
        failures.push(format!(
            "strip {}: fiber crossed the window center {} times",
            strip.symbol,
            crossings.len()
        ));
        return Some(FiberScan {
            t_in: f64::NAN,
            t_out: f64::NAN,
            phase: f64::NAN,
            entry_side: side_of(grid[0].1, z_lo, z_hi),
            exit_side: side_of(grid[grid.len() - 1].1, z_lo, z_hi),
            crossing_ok,
            in_window_points: Vec::new(),
            image_x_margin: f64::INFINITY,
            image_in_sigma0: true,
        });
    }

    // Bisection helper for a level crossing between grid nodes.
    let refine = |mut lo: f64, mut hi: f64, level: f64| -> Option<f64> {
        let eval = |t: f64| image_z(hs, t, x0, &vp1_t, &vm0).map(|(z, _)| z - level);
        let mut f_lo = eval(lo)?;
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            let f_mid = eval(mid)?;
            if f_lo.signum() != f_mid.signum() {
                hi = mid;
            } else {
                lo = mid;
                f_lo = f_mid;
            }
        }
        Some(0.5 * (lo + hi))
    };

    // Locate both window-boundary crossings nearest the center crossing.
    let center_idx = crossings[0];
    let mut t_bounds = Vec::new();
    for level in [z_hi, z_lo] {
        let mut found: Option<(usize, (f64, f64))> = None;
        for i in 1..grid.len() {
            let (a, b) = (&grid[i - 1], &grid[i]);
            if (a.1 - level).signum() != (b.1 - level).signum() {
                let dist = i.abs_diff(center_idx);
                if found.map(|(d, _)| dist < d).unwrap_or(true) {
                    found = Some((dist, (a.0, b.0)));
                }
            }
        }
        let Some((_, (lo, hi))) = found else {
            failures.push(format!(
                "strip {}: window boundary {level:.3e} not bracketed on the fiber",
                strip.symbol
            ));
            return None;
        };
        t_bounds.push(refine(lo, hi, level)?);
    }
    let (t_in, t_out) = (t_bounds[0].min(t_bounds[1]), t_bounds[0].max(t_bounds[1]));

    // Sample the in-window piece and check strip containment of the images.
    let mut in_window_points = Vec::new();
    let mut image_x_margin = f64::INFINITY;
    let mut image_in_sigma0 = true;
    let mut phase = f64::NAN;
    for i in 0..IN_WINDOW_PER_FIBER {
        let frac = rng.random::<f64>().clamp(0.02, 0.98);
        let t_hat = t_in + (t_out - t_in) * frac;
        let w = chart_point(hs, t_hat, x0, &vp1_t, &vm0);
        if let Ok(result) = poincare_map(&w, &hs.spec) {
            if i == 0 {
                phase =
                    (hs.spec.spectrum.beta * result.t_star).rem_euclid(2.0 * std::f64::consts::PI);
            }
            if result.point.z0 >= z_lo && result.point.z0 <= z_hi {
                image_x_margin =
                    image_x_margin.min((hs.slab.x_bound - result.point.x0.abs()) / hs.slab.x_bound);
                image_in_sigma0 &= result.point.in_section(&hs.spec);
                in_window_points.push(w);
            }
        }
    }

    Some(FiberScan {
        t_in,
        t_out,
        phase,
        entry_side: side_of(grid[0].1, z_lo, z_hi),
        exit_side: side_of(grid[grid.len() - 1].1, z_lo, z_hi),
        crossing_ok,
        in_window_points,
        image_x_margin,
        image_in_sigma0,
    })
}

/// One Jacobian sample with its phase-adapted unstable basis and, when the
/// image stays in the slab, the image point's basis for the invariance
/// check.
pub(crate) struct ConeSample {
    pub jac: DMatrix<f64>,
    pub u_basis: DMatrix<f64>,
    pub u_basis_image: Option<DMatrix<f64>>,
}

/// Cone expansion/contraction/invariance statistics over a set of samples.
pub(crate) fn cone_stats(
    samples: &[ConeSample],
    stable_basis: &DMatrix<f64>,
    kappa: f64,
    rng: &mut ChaCha12Rng,
) -> ConeStats {
    let sin_in = kappa.sin();
    let cos_in = kappa.cos();

    let mut stats = ConeStats {
        mu_u_min: f64::INFINITY,
        mu_s_max: 0.0,
        max_angle_u: 0.0,
        max_angle_s: 0.0,
        points: samples.len(),
        invariance_points: 0,
        directions_per_point: 0,
        solver_failures: 0,
    };
    if samples.is_empty() {
        return stats;
    }
    let dim = samples[0].jac.nrows();

    let span_dirs = |q: &DMatrix<f64>, rng: &mut ChaCha12Rng| -> Vec<DVector<f64>> {
        let mut dirs: Vec<DVector<f64>> =
            (0..q.ncols()).map(|j| q.column(j).into_owned()).collect();
        for _ in 0..2 {
            let coeffs = DVector::from_fn(q.ncols(), |_, _| gaussian(rng));
            let v = q * &coeffs;
            let norm = v.norm();
            if norm > 0.0 {
                dirs.push(v / norm);
            }
        }
        dirs
    };
    // Unit vectors at exactly the cone boundary: cos(kappa) inside the span
    // plus sin(kappa) along a random orthogonal direction.
    let cone_dirs = |q: &DMatrix<f64>, rng: &mut ChaCha12Rng| -> Vec<DVector<f64>> {
        let core = span_dirs(q, rng);
        let mut dirs = Vec::with_capacity(core.len() * 3);
        for u in &core {
            dirs.push(u.clone());
            for _ in 0..2 {
                let raw = DVector::from_fn(dim, |_, _| gaussian(rng));
                let mut perp = &raw - q * (q.transpose() * &raw);
                let norm = perp.norm();
                if norm > 0.0 {
                    perp /= norm;
                    dirs.push(u * cos_in + perp * sin_in);
                }
            }
        }
        dirs
    };

    let angle_to = |v: &DVector<f64>, q: &DMatrix<f64>| -> f64 {
        let norm = v.norm();
        if norm == 0.0 {
            return std::f64::consts::FRAC_PI_2;
        }
        let out = v - q * (q.transpose() * v);
        (out.norm() / norm).min(1.0).asin()
    };

    for sample in samples {
        let lu = sample.jac.clone().lu();
        let u_dirs = cone_dirs(&sample.u_basis, rng);
        let s_dirs = cone_dirs(stable_basis, rng);
        stats.directions_per_point = u_dirs.len() + s_dirs.len();
        for u in &u_dirs {
            let image = &sample.jac * u;
            stats.mu_u_min = stats.mu_u_min.min(image.norm());
            if let Some(q_img) = &sample.u_basis_image {
                stats.max_angle_u = stats.max_angle_u.max(angle_to(&image, q_img));
            }
        }
        if sample.u_basis_image.is_some() {
            stats.invariance_points += 1;
        }
        for s in &s_dirs {
            match lu.solve(s) {
                Some(pre) => {
                    let growth = pre.norm();
                    if growth > 0.0 {
                        stats.mu_s_max = stats.mu_s_max.max(1.0 / growth);
                        stats.max_angle_s = stats.max_angle_s.max(angle_to(&pre, stable_basis));
                    } else {
                        stats.solver_failures += 1;
                    }
                }
                None => stats.solver_failures += 1,
            }
        }
    }
    stats
}

impl Horseshoe {
    /// Jacobian plus cone data for one sample point: the reference cone is
    /// the constant frame anchored at `p⁺`. Invariance is checked only where
    /// the image is known to continue on the invariant tube.
    fn cone_sample(&self, w: &Sigma0Point, check_invariance: bool) -> Option<ConeSample> {
        let spec = &self.spec;
        let flight = flight_time(w, spec).ok()?;
        let jac = dp10_analytic(&flight.point, spec) * dp01_analytic(w, flight.t_star, spec);
        Some(ConeSample {
            jac,
            u_basis: self.frame.unstable_basis.clone(),
            u_basis_image: check_invariance.then(|| self.frame.unstable_basis.clone()),
        })
    }

    /// Draws one point of strip `from` whose image lies in strip `to`, by a
    /// two-point segment solve. The stable pins range over the full slab;
    /// the image's expanding chart is pinned inside the v⁺ tube, which is
    /// where orbits that continue in the slab family live — the incoming
    /// phases of such points cluster at the fixed-point phase mod π, so a
    /// fixed cone can be forward invariant over them.
    fn draw_intersection_sample(
        &self,
        from: u8,
        to: u8,
        preimage_t_center: f64,
        rng: &mut ChaCha12Rng,
    ) -> Option<(Sigma0Point, Sigma0Point)> {
        let spec = &self.spec;
        let n = spec.n_unstable();
        let m = spec.m_stable();
        let (x_lo, x_hi) = x_range(self);
        let strip_to = &self.strips[to as usize];
        let t_width = strip_to.t_hi - strip_to.t_lo;
        let pins = super::shadow::SegmentPins {
            start_x0: rng.random_range(x_lo..x_hi),
            start_vm0: ball_sample(rng, m, vm_radius(spec)),
            end_t_hat: rng
                .random_range(strip_to.t_lo + 0.02 * t_width..strip_to.t_hi - 0.02 * t_width),
            end_vp_chart: ball_sample(rng, n, fiber_vp_radius(self)),
        };
        // Seed the preimage end at the measured crossing window of its strip;
        // every admissible image target has its preimage close to it.
        let fp_from = &self.slab.resident(from).raw;
        let s = &spec.spectrum;
        let z0_seed = spec.geometry.eta * (-s.gamma * preimage_t_center).exp();
        let w0_seed = Sigma0Point {
            x0: pins.start_x0,
            z0: z0_seed,
            v_plus0: DVector::from_fn(n, |j, _| {
                (-s.lambda_plus[j] * preimage_t_center).exp() * spec.geometry.v_star_plus[j]
            }),
            v_minus0: pins.start_vm0.clone(),
        };
        let _ = fp_from;
        let w1_seed = chart_point(
            self,
            pins.end_t_hat,
            self.slab.resident(to).raw.x0,
            &pins.end_vp_chart,
            &self.slab.resident(to).raw.v_minus0.clone(),
        );
        let (points, _) = self.solve_segment(&[from, to], vec![w0_seed, w1_seed], &pins)?;
        (self.classify(&points[0]) == Some(from) && self.classify(&points[1]) == Some(to))
            .then(|| (points[0].clone(), points[1].clone()))
    }

    /// Runs the full Conley–Moser certificate with a seeded sampler:
    /// strip-crossing bookkeeping on scanned fibers, image containment,
    /// preimage-window disjointness, and cone expansion, contraction and
    /// invariance.
    pub fn verify_conley_moser(&self, seed: u64) -> Result<ConleyMoserReport, HorseshoeError> {
        let spec = &self.spec;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let cm_samples = spec.tolerances.cm_samples;
        let mut failures: Vec<String> = Vec::new();
        let mut rejected = 0usize;
        let mut flight_failures = 0usize;

        let faces = [
            Face::TLo,
            Face::THi,
            Face::XLo,
            Face::XHi,
            Face::VpSphere,
            Face::VmSphere,
        ];

        let mut points: Vec<Sigma0Point> = Vec::new();
        let mut boundary_valid = 0usize;
        let mut interior_valid = 0usize;
        for strip in &self.strips {
            for i in 0..cm_samples {
                let face = &faces[i % faces.len()];
                let mut got = None;
                for _ in 0..60 {
                    if let Some(w) = draw_sample(self, strip, &mut rng, Some(face)) {
                        got = Some(w);
                        break;
                    }
                    rejected += 1;
                }
                match got {
                    Some(w) => {
                        boundary_valid += 1;
                        points.push(w);
                    }
                    None => failures.push(format!(
                        "strip {}: boundary sampling exhausted retries",
                        strip.symbol
                    )),
                }
            }
            for _ in 0..cm_samples {
                let mut got = None;
                for _ in 0..60 {
                    if let Some(w) = draw_sample(self, strip, &mut rng, None) {
                        got = Some(w);
                        break;
                    }
                    rejected += 1;
                }
                match got {
                    Some(w) => {
                        interior_valid += 1;
                        points.push(w);
                    }
                    None => failures.push(format!(
                        "strip {}: interior sampling exhausted retries",
                        strip.symbol
                    )),
                }
            }
        }

        // Strip structure: fiber scans.
        let mut summaries = Vec::with_capacity(2);
        let mut fiber_in_window = 0usize;
        let mut strip_x_margin = f64::INFINITY;
        let mut crossing_all_ok = true;
        let mut t_windows = Vec::with_capacity(2);
        for strip in &self.strips {
            let mut t_in = f64::INFINITY;
            let mut t_out = f64::NEG_INFINITY;
            let mut phase_sum = 0.0;
            let mut phase_count = 0usize;
            let mut entry_sides = Vec::new();
            let mut exit_sides = Vec::new();
            let mut crossing_ok = true;
            let mut strip_in_window = 0usize;
            for _ in 0..FIBERS_PER_STRIP {
                match scan_fiber(self, strip, &mut rng, &mut failures) {
                    Some(scan) => {
                        crossing_ok &= scan.crossing_ok;
                        entry_sides.push(scan.entry_side);
                        exit_sides.push(scan.exit_side);
                        if scan.crossing_ok {
                            t_in = t_in.min(scan.t_in);
                            t_out = t_out.max(scan.t_out);
                            if scan.phase.is_finite() {
                                phase_sum += scan.phase;
                                phase_count += 1;
                            }
                            strip_in_window += scan.in_window_points.len();
                            strip_x_margin = strip_x_margin.min(scan.image_x_margin);
                            if !scan.image_in_sigma0 {
                                crossing_ok = false;
                                failures.push(format!(
                                    "strip {}: in-window image left the section",
                                    strip.symbol
                                ));
                            }
                            points.extend(scan.in_window_points);
                        }
                    }
                    None => {
                        flight_failures += 1;
                        crossing_ok = false;
                    }
                }
            }
            fiber_in_window += strip_in_window;
            // Endpoint sides must be consistent per face, strictly outside
            // the window, and opposite across the fiber.
            let side_consistent = |sides: &[i8]| -> Option<i8> {
                let first = *sides.first()?;
                if first != 0 && sides.iter().all(|&s| s == first) {
                    Some(first)
                } else {
                    None
                }
            };
            let entry = side_consistent(&entry_sides);
            let exit = side_consistent(&exit_sides);
            let full_height = match (entry, exit) {
                (Some(a), Some(b)) => a != b,
                _ => false,
            };
            if !full_height {
                crossing_ok = false;
                failures.push(format!(
                    "strip {}: fiber endpoints do not exit the slab on opposite sides",
                    strip.symbol
                ));
            }
            crossing_all_ok &= crossing_ok;
            t_windows.push((t_in, t_out));
            let eta = spec.geometry.eta;
            let gamma = spec.spectrum.gamma;
            summaries.push(StripSummary {
                symbol: strip.symbol,
                z_window: (strip.z_lo, strip.z_hi),
                t_window: (strip.t_lo, strip.t_hi),
                preimage_t_window: (t_in, t_out),
                preimage_z_window: (eta * (-gamma * t_out).exp(), eta * (-gamma * t_in).exp()),
                image_phase: if phase_count > 0 {
                    phase_sum / phase_count as f64
                } else {
                    f64::NAN
                },
                in_window_samples: strip_in_window,
                crossing_count_ok: crossing_ok,
                entry_side: entry.unwrap_or(0),
                exit_side: exit.unwrap_or(0),
            });
        }

        // Disjointness of the preimage windows in the expanding coordinate.
        let gap_t = t_windows[1].0 - t_windows[0].1;
        let eta = spec.geometry.eta;
        let gamma = spec.spectrum.gamma;
        let gap_z = eta * (-gamma * t_windows[0].1).exp() - eta * (-gamma * t_windows[1].0).exp();
        let gap_rel = gap_z / (self.slab.z_hi - self.slab.z_lo);

        // Points of strip i mapping into strip j, where forward cone
        // invariance is checked against the image's own frame.
        let n_intersection = (2 * cm_samples).max(1024);
        let mut intersection_pairs = Vec::with_capacity(n_intersection);
        let mut intersection_misses = 0usize;
        let mut round = 0usize;
        let pre_centers = [
            0.5 * (t_windows[0].0 + t_windows[0].1),
            0.5 * (t_windows[1].0 + t_windows[1].1),
        ];
        while intersection_pairs.len() < n_intersection && round < 4 * n_intersection {
            let from = (round % 2) as u8;
            let to = ((round / 2) % 2) as u8;
            round += 1;
            match self.draw_intersection_sample(from, to, pre_centers[from as usize], &mut rng) {
                Some(pair) => intersection_pairs.push(pair),
                None => intersection_misses += 1,
            }
        }
        if intersection_pairs.len() < n_intersection {
            failures.push(format!(
                "intersection sampling fell short: {} of {n_intersection}",
                intersection_pairs.len()
            ));
        }

        // Cone checks with the exact chain-rule Jacobian at every sample.
        let mut cone_samples = Vec::with_capacity(points.len() + intersection_pairs.len());
        for w in &points {
            match self.cone_sample(w, false) {
                Some(sample) => cone_samples.push(sample),
                None => {
                    flight_failures += 1;
                    failures.push("cone sample flight failure".to_string());
                }
            }
        }
        for (w, _image) in &intersection_pairs {
            match self.cone_sample(w, true) {
                Some(sample) => cone_samples.push(sample),
                None => {
                    flight_failures += 1;
                    failures.push("intersection cone sample flight failure".to_string());
                }
            }
        }
        let cone = cone_stats(
            &cone_samples,
            &self.frame.stable_basis,
            CONE_HALF_ANGLE,
            &mut rng,
        );

        let margins = CmMargins {
            expansion: cone.mu_u_min - 1.0,
            contraction: 1.0 - cone.mu_s_max,
            cone_unstable: CONE_HALF_ANGLE - cone.max_angle_u,
            cone_stable: CONE_HALF_ANGLE - cone.max_angle_s,
            strip_containment_x: strip_x_margin,
            strip_gap_rel: gap_rel,
        };

        let core_margins = [
            margins.expansion,
            margins.contraction,
            margins.cone_unstable,
            margins.cone_stable,
            margins.strip_containment_x,
            margins.strip_gap_rel,
        ];
        let sampling_ok = boundary_valid + interior_valid >= 2 * cm_samples
            && cone.invariance_points >= n_intersection
            && flight_failures == 0
            && cone.solver_failures == 0;
        let any_hard_fail = core_margins.iter().any(|&m| m < -STAT_MARGIN) || !crossing_all_ok;
        let all_clear = core_margins.iter().all(|&m| m > STAT_MARGIN);
        let verdict = if any_hard_fail {
            Verdict::Fail
        } else if !sampling_ok || !all_clear {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };

        failures.truncate(32);
        Ok(ConleyMoserReport {
            verdict,
            ell: self.slab.ell,
            mu_u: cone.mu_u_min,
            mu_s: cone.mu_s_max,
            margins,
            strips: [summaries[0].clone(), summaries[1].clone()],
            gap_t,
            gap_z,
            cone,
            samples: SampleStats {
                boundary_valid,
                interior_valid,
                fiber_in_window,
                intersection_valid: intersection_pairs.len(),
                intersection_misses,
                rejected,
                flight_failures,
            },
            failures,
            params: CmParams {
                kappa: CONE_HALF_ANGLE,
                cm_samples,
                stat_margin: STAT_MARGIN,
                seed,
                fibers_per_strip: FIBERS_PER_STRIP,
            },
        })
    }
}
