//! Slabs: thin regions of `Σ0` indexed by `ell`, bounded by return-time
//! dependent inequalities, each containing two fixed points of the return
//! map. The slab splits into two sub-slabs (the symbol strips) at the
//! phase midpoint between its resident fixed points.

use serde::{Deserialize, Serialize};

use crate::error::{FlightError, HorseshoeError};
use crate::fixed_points::{refine_fixed_point, FixedPointRecord};
use crate::local_dynamics::{flight_time, Sigma0Point};
use crate::model::ModelSpec;

/// The slab `S_ell` with its four inequality families and resident fixed
/// points. `z` bounds come from the return times of indices `2ell` and
/// `2(ell+1)` shifted back by a quarter phase; the `x` bound and the two
/// image-norm bounds share the value `eta·exp(-alpha T^(2ell) / 2)`.
#[derive(Debug, Clone)]
pub struct Slab {
    pub ell: usize,
    pub z_lo: f64,
    pub z_hi: f64,
    pub x_bound: f64,
    pub vm_bound: f64,
    pub vp_bound: f64,
    pub fp_plus: FixedPointRecord,
    pub fp_minus: FixedPointRecord,
    /// Return times `T^(2ell)`, `T^(2ell+1)`, `T^(2(ell+1))`.
    pub t_anchor: [f64; 3],
}

/// One of the two symbol strips: a `z`-subinterval of the slab around a
/// resident fixed point, described both in `z` and in the flight-time
/// parameterization `z = eta·exp(-gamma t)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StripRegion {
    pub symbol: u8,
    pub z_lo: f64,
    pub z_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Membership diagnostics of a point against every slab inequality family.
#[derive(Debug, Clone, Copy)]
pub struct SlabMembership {
    pub in_sigma0: bool,
    pub z_in: bool,
    pub x_in: bool,
    pub vp1_in: bool,
    pub vm1_in: bool,
    /// Signed margins, positive inside: `z` distance to the nearer bound,
    /// `x_bound - |x0|`, and the two image-norm slacks.
    pub z_margin: f64,
    pub x_margin: f64,
    pub vp1_margin: f64,
    pub vm1_margin: f64,
    pub t_star: f64,
    pub vp1_norm: f64,
    pub vm1_norm: f64,
}

impl SlabMembership {
    pub fn contains(&self) -> bool {
        self.in_sigma0 && self.z_in && self.x_in && self.vp1_in && self.vm1_in
    }

    pub fn min_margin(&self) -> f64 {
        self.z_margin
            .min(self.x_margin)
            .min(self.vp1_margin)
            .min(self.vm1_margin)
    }
}

impl Slab {
    /// Evaluates all four inequality families. The third and fourth bound
    /// the local image of the point, so a flight solve is required; flight
    /// failure means the point is nowhere near the slab's dynamics.
    pub fn membership(
        &self,
        w: &Sigma0Point,
        spec: &ModelSpec,
    ) -> Result<SlabMembership, FlightError> {
        let flight = flight_time(w, spec)?;
        let vp1_norm = flight.point.v_plus1.norm();
        let vm1_norm = flight.point.v_minus1.norm();
        let z_margin = (w.z0 - self.z_lo).min(self.z_hi - w.z0);
        let x_margin = self.x_bound - w.x0.abs();
        let vp1_margin = self.vp_bound - vp1_norm;
        let vm1_margin = self.vm_bound - vm1_norm;
        Ok(SlabMembership {
            in_sigma0: w.in_section(spec),
            z_in: z_margin >= 0.0,
            x_in: x_margin >= 0.0,
            vp1_in: vp1_margin >= 0.0,
            vm1_in: vm1_margin >= 0.0,
            z_margin,
            x_margin,
            vp1_margin,
            vm1_margin,
            t_star: flight.t_star,
            vp1_norm,
            vm1_norm,
        })
    }

    /// Splitting value between the two strips: the `z` image of the phase
    /// midpoint of the two resident return times.
    pub fn z_split(&self, spec: &ModelSpec) -> f64 {
        let t_mid = 0.5 * (self.t_anchor[0] + self.t_anchor[1]);
        spec.geometry.eta * (-spec.spectrum.gamma * t_mid).exp()
    }

    /// The two symbol strips: symbol 0 holds `p⁺` (larger `z`), symbol 1
    /// holds `p⁻`.
    pub fn strips(&self, spec: &ModelSpec) -> [StripRegion; 2] {
        let g = spec.spectrum.gamma;
        let eta = spec.geometry.eta;
        let z_split = self.z_split(spec);
        let t_of = |z: f64| (eta / z).ln() / g;
        [
            StripRegion {
                symbol: 0,
                z_lo: z_split,
                z_hi: self.z_hi,
                t_lo: t_of(self.z_hi),
                t_hi: t_of(z_split),
            },
            StripRegion {
                symbol: 1,
                z_lo: self.z_lo,
                z_hi: z_split,
                t_lo: t_of(z_split),
                t_hi: t_of(self.z_lo),
            },
        ]
    }

    /// Strip symbol of a slab member, decided by the `z` coordinate.
    pub fn strip_symbol(&self, w: &Sigma0Point, spec: &ModelSpec) -> u8 {
        if w.z0 >= self.z_split(spec) {
            0
        } else {
            1
        }
    }

    pub fn resident(&self, symbol: u8) -> &FixedPointRecord {
        if symbol == 0 {
            &self.fp_plus
        } else {
            &self.fp_minus
        }
    }
}

/// Builds the slab for index `ell`: solves the anchor fixed points, computes
/// the bounds, and scans the nearby family for residents. Exactly two
/// converged fixed points must satisfy all four inequality families.
pub fn build_slab(ell: usize, spec: &ModelSpec) -> Result<Slab, HorseshoeError> {
    if ell == 0 {
        return Err(HorseshoeError::MissingFixedPoint { ell: 0 });
    }
    let anchor = |index: usize| -> Result<FixedPointRecord, HorseshoeError> {
        let record = refine_fixed_point(index, spec)?;
        if !record.converged {
            return Err(HorseshoeError::MissingFixedPoint { ell: index });
        }
        Ok(record)
    };
    let fp_a = anchor(2 * ell)?;
    let fp_b = anchor(2 * ell + 1)?;
    let fp_c = anchor(2 * ell + 2)?;

    let s = &spec.spectrum;
    let eta = spec.geometry.eta;
    let quarter = std::f64::consts::PI / (2.0 * s.beta);
    let z_hi = eta * (-s.gamma * (fp_a.t_ell - quarter)).exp();
    let z_lo = eta * (-s.gamma * (fp_c.t_ell - quarter)).exp();
    let shared_bound = eta * (-0.5 * s.alpha * fp_a.t_ell).exp();
    let mut slab = Slab {
        ell,
        z_lo,
        z_hi,
        x_bound: shared_bound,
        vm_bound: shared_bound,
        vp_bound: shared_bound,
        fp_plus: fp_a.clone(),
        fp_minus: fp_b.clone(),
        t_anchor: [fp_a.t_ell, fp_b.t_ell, fp_c.t_ell],
    };

    // Residency scan over the nearby family.
    let scan_lo = (2 * ell).saturating_sub(3).max(1);
    let scan_hi = 2 * ell + 5;
    let mut residents = Vec::new();
    for index in scan_lo..=scan_hi {
        let record = if index == 2 * ell {
            fp_a.clone()
        } else if index == 2 * ell + 1 {
            fp_b.clone()
        } else if index == 2 * ell + 2 {
            fp_c.clone()
        } else {
            refine_fixed_point(index, spec)?
        };
        if !record.converged {
            continue;
        }
        if let Ok(membership) = slab.membership(&record.raw, spec) {
            if membership.contains() {
                residents.push(record);
            }
        }
    }
    if residents.len() != 2 {
        return Err(HorseshoeError::ResidencyCount {
            ell,
            found: residents.len(),
        });
    }
    residents.sort_by(|a, b| b.raw.z0.partial_cmp(&a.raw.z0).unwrap());
    slab.fp_plus = residents[0].clone();
    slab.fp_minus = residents[1].clone();
    Ok(slab)
}
