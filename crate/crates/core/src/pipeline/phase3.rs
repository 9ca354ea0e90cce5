use serde::{Deserialize, Serialize};

use super::phase2::{refine_ranges, state_from_pair, Phase2Diagnostics, RangePair};
use super::{Phase2Config, PipelineError};
use crate::ads::{run_ads, AdsConfig, AdsError, EntryStatus, Manifold, SerialManifold, SubDomain};
use crate::astro::{
    angle_diff_deg, cart_to_reduced, radec_to_los, reduced_elements, slant_range_rate, wrap_deg,
    Epoch, RadarGeometry, ReducedElements, StateVector, MU_EARTH,
};
use crate::da::{RealInterval, TaylorMap, TaylorPoly};
use crate::iod::{lambert_solve, TransferDirection};
use crate::measproc::PolarTrack;
use crate::scalar::v3;
use crate::Vec3;

pub const ORBIT_SET_SCHEMA: &str = "daiod.orbitset/1";

/// Element bounds over the whole unit box of measurement deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementBounds {
    /// Per element `(a, e, i, Ω, u)`; angles are unwrapped around the nominal.
    pub intervals: [RealInterval; 5],
    /// Half-widths of the intervals.
    pub half_widths: [f64; 5],
}

impl ElementBounds {
    /// Whether `el` lies inside every interval (angles modulo 360°).
    pub fn contains(&self, el: &ReducedElements) -> bool {
        let x = el.to_array();
        (0..5).all(|k| {
            let iv = self.intervals[k];
            if k >= 3 {
                // bring the angle to the branch nearest the interval midpoint
                let v = iv.mid() + angle_diff_deg(x[k], wrap_deg(iv.mid()));
                iv.contains(v)
            } else {
                iv.contains(x[k])
            }
        })
    }
}

/// Phase-3 result: the orbit set at the first epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSet {
    pub reference_epoch: Epoch,
    pub nominal: ReducedElements,
    /// Nominal measurements `(α₁°, δ₁°, ḋ₁, α_N°, δ_N°, ḋ_N)`.
    pub center: [f64; 6],
    /// Confidence half-widths scaling each deviation variable.
    pub scalings: [f64; 6],
    pub ranges: RangePair,
    pub manifold: Manifold,
    pub bounds: ElementBounds,
    pub diagnostics: Phase2Diagnostics,
    /// Seconds spent in phases 1, 2 and 3.
    pub timing_s: [f64; 3],
}

impl OrbitSet {
    /// Number of sub-domains.
    pub fn n_s(&self) -> usize {
        self.manifold.len()
    }

    pub fn to_json(&self) -> Result<String, PipelineError> {
        let f = OrbitSetFile {
            schema: ORBIT_SET_SCHEMA.to_string(),
            reference_epoch: self.reference_epoch.to_iso(),
            nominal: self.nominal,
            center: self.center,
            scalings: self.scalings,
            ranges: self.ranges,
            bounds: self.bounds,
            n_s: self.n_s(),
            diagnostics: self.diagnostics.clone(),
            timing_s: self.timing_s,
            manifold: self.manifold.to_serial(),
        };
        serde_json::to_string_pretty(&f).map_err(|e| PipelineError::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<OrbitSet, PipelineError> {
        let v: serde_json::Value =
            serde_json::from_str(s).map_err(|e| PipelineError::Format(e.to_string()))?;
        let schema = v.get("schema").and_then(|x| x.as_str()).unwrap_or("");
        if schema != ORBIT_SET_SCHEMA {
            return Err(PipelineError::Format(format!("unsupported schema {schema:?}")));
        }
        let f: OrbitSetFile =
            serde_json::from_value(v).map_err(|e| PipelineError::Format(e.to_string()))?;
        Ok(OrbitSet {
            reference_epoch: Epoch::from_iso(&f.reference_epoch)?,
            nominal: f.nominal,
            center: f.center,
            scalings: f.scalings,
            ranges: f.ranges,
            manifold: Manifold::from_serial(&f.manifold)?,
            bounds: f.bounds,
            diagnostics: f.diagnostics,
            timing_s: f.timing_s,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct OrbitSetFile {
    schema: String,
    reference_epoch: String,
    nominal: ReducedElements,
    center: [f64; 6],
    scalings: [f64; 6],
    ranges: RangePair,
    bounds: ElementBounds,
    n_s: usize,
    diagnostics: Phase2Diagnostics,
    timing_s: [f64; 3],
    manifold: SerialManifold,
}

/// Fixed problem data shared by every sub-domain expansion.
struct Problem<'a> {
    geom: &'a RadarGeometry,
    t: [Epoch; 2],
    /// Nominal measurements, angles in radians.
    center: [f64; 6],
    /// Half-widths, angles in radians.
    ci: [f64; 6],
    seed: (f64, f64),
    nominal: [f64; 5],
    p2: &'a Phase2Config,
}

impl Problem<'_> {
    fn measurements_at(&self, dev: &[f64]) -> [f64; 6] {
        std::array::from_fn(|j| self.center[j] + self.ci[j] * dev[j])
    }

    /// Range pair solving the measurements at `dev`.
    fn ranges_at(&self, dev: &[f64]) -> Result<RangePair, PipelineError> {
        let m = self.measurements_at(dev);
        refine_ranges(
            self.geom,
            self.t,
            [radec_to_los(&m[0], &m[1]).0, radec_to_los(&m[3], &m[4]).0],
            [m[2], m[5]],
            self.seed,
            self.p2,
            0,
        )
    }

    /// Taylor map of the reduced elements over the sub-domain, in the
    /// sub-domain's local variables ordered `(α₁, δ₁, ḋ₁, α_N, δ_N, ḋ_N)`.
    fn expand(&self, dom: &SubDomain, order: usize) -> Result<TaylorMap, PipelineError> {
        let c = &dom.center;
        let h = &dom.half_width;
        let m = self.measurements_at(c);
        let pair = self.ranges_at(c)?;
        // internal space: (α₁, δ₁, α_N, δ_N, ρ₁, ρ_N)
        let var = |value: f64, idx: usize, scale: f64| TaylorPoly::variable(value, idx, scale, 6, order);
        let a1 = var(m[0], 0, self.ci[0] * h[0])?;
        let d1 = var(m[1], 1, self.ci[1] * h[1])?;
        let an = var(m[3], 2, self.ci[3] * h[3])?;
        let dn = var(m[4], 3, self.ci[4] * h[4])?;
        let p1 = var(pair.rho1, 4, 1.0)?;
        let pn = var(pair.rho_n, 5, 1.0)?;
        let s1 = self.geom.receiver_state(self.t[0]).r;
        let sn = self.geom.receiver_state(self.t[1]).r;
        let r1 = radec_to_los(&a1, &d1).scale(&p1).add_f(&s1);
        let rn = radec_to_los(&an, &dn).scale(&pn).add_f(&sn);
        let normal = v3::cross(&r1.value(), &rn.value());
        let sol = lambert_solve(&r1, &rn, self.t[1] - self.t[0], MU_EARTH, TransferDirection::Along(normal))
            .map_err(|source| PipelineError::Lambert { corner: 0, source })?;
        let (_, rr1) = slant_range_rate(&r1, &sol.v1, self.geom, self.t[0]);
        let (_, rrn) = slant_range_rate(&rn, &sol.v2, self.geom, self.t[1]);
        let f1 = rr1 - m[2];
        let fn_ = rrn - m[5];
        let (c1, cn) = (f1.constant_part(), fn_.constant_part());
        let x = |j: usize| TaylorPoly::variable(0.0, j, 1.0, 6, order);
        // (x_α, x_δ, δρ) ↦ (x_α, x_δ, δḋ), origin preserving
        let forward = TaylorMap::new(vec![
            x(0)?,
            x(1)?,
            x(2)?,
            x(3)?,
            f1.nonconstant_part(),
            fn_.nonconstant_part(),
        ])?;
        // external (α₁, δ₁, ḋ₁, α_N, δ_N, ḋ_N) to the inverse's inputs; the
        // range-rate slots take the measured deviation minus the mismatch left
        // at the expansion point
        let ext = TaylorMap::new(vec![
            x(0)?,
            x(1)?,
            x(3)?,
            x(4)?,
            &(&x(2)? * (self.ci[2] * h[2])) - c1,
            &(&x(5)? * (self.ci[5] * h[5])) - cn,
        ])?;
        let internal = forward.invert()?.compose(&ext)?;
        let els = reduced_elements(&r1, &sol.v1, MU_EARTH)?;
        let mut out = TaylorMap::new(els.to_vec())?.compose(&internal)?.into_outputs();
        // keep angle constants on the branch of the nominal elements
        for k in 3..5 {
            let c0 = out[k].constant_part();
            let target = self.nominal[k] + angle_diff_deg(wrap_deg(c0), wrap_deg(self.nominal[k]));
            out[k] = &out[k] + (target - c0);
        }
        Ok(TaylorMap::new(out)?)
    }
}

fn problem<'a>(pair: &RangePair, track: &'a PolarTrack, p2: &'a Phase2Config) -> Result<Problem<'a>, PipelineError> {
    let n = track.obs.len();
    let (f, l) = (&track.obs[0], &track.obs[n - 1]);
    let x1 = state_from_pair(track, pair.rho1, pair.rho_n)?;
    let nominal = cart_to_reduced(&x1, MU_EARTH)?.to_array();
    Ok(Problem {
        geom: &track.geometry,
        t: [f.epoch, l.epoch],
        center: [
            f.ra_deg.to_radians(),
            f.dec_deg.to_radians(),
            f.rr_kms,
            l.ra_deg.to_radians(),
            l.dec_deg.to_radians(),
            l.rr_kms,
        ],
        ci: [
            f.ci_ra_deg.to_radians(),
            f.ci_dec_deg.to_radians(),
            f.ci_rr_kms,
            l.ci_ra_deg.to_radians(),
            l.ci_dec_deg.to_radians(),
            l.ci_rr_kms,
        ],
        seed: (pair.rho1, pair.rho_n),
        nominal,
        p2,
    })
}

/// Expands the selected solution over the measurement uncertainty box.
pub fn phase3_expand(
    selected: &RangePair,
    track: &PolarTrack,
    p2: &Phase2Config,
    ads: &AdsConfig,
) -> Result<OrbitSet, PipelineError> {
    if !selected.converged {
        return Err(PipelineError::Phase3("selected range pair did not converge".into()));
    }
    if ads.tolerances.len() != 5 {
        return Err(AdsError::InvalidConfig("orbit sets need five tolerances".into()).into());
    }
    let prob = problem(selected, track, p2)?;
    let manifold = run_ads(6, |d: &SubDomain| prob.expand(d, ads.order), ads)?;
    if manifold.usable().next().is_none() {
        let why = match &manifold.entries[0].status {
            EntryStatus::Failed(m) => m.clone(),
            s => format!("{s:?}"),
        };
        return Err(PipelineError::Phase3(why));
    }
    let root = manifold.eval(&[0.0; 6])?;
    let nominal = ReducedElements::from_array([root[0], root[1], root[2], wrap_deg(root[3]), wrap_deg(root[4])]);
    let n = track.obs.len();
    let (f, l) = (&track.obs[0], &track.obs[n - 1]);
    let mut os = OrbitSet {
        reference_epoch: f.epoch,
        nominal,
        center: [f.ra_deg, f.dec_deg, f.rr_kms, l.ra_deg, l.dec_deg, l.rr_kms],
        scalings: [f.ci_ra_deg, f.ci_dec_deg, f.ci_rr_kms, l.ci_ra_deg, l.ci_dec_deg, l.ci_rr_kms],
        ranges: *selected,
        manifold,
        bounds: ElementBounds {
            intervals: [RealInterval::point(0.0); 5],
            half_widths: [0.0; 5],
        },
        diagnostics: Phase2Diagnostics::default(),
        timing_s: [0.0; 3],
    };
    os.bounds = orbit_set_bounds(&os);
    Ok(os)
}

/// Elements at a point of the unit deviation box.
pub fn evaluate_orbit_set(os: &OrbitSet, deviations: &[f64; 6]) -> Result<ReducedElements, PipelineError> {
    let x = os.manifold.eval(deviations)?;
    Ok(ReducedElements::from_array([x[0], x[1], x[2], wrap_deg(x[3]), wrap_deg(x[4])]))
}

/// Union of the entry bounds over the unit box.
pub fn orbit_set_bounds(os: &OrbitSet) -> ElementBounds {
    let b = os
        .manifold
        .bounds()
        .unwrap_or_else(|| vec![RealInterval::point(f64::NAN); 5]);
    let intervals: [RealInterval; 5] = std::array::from_fn(|k| b[k]);
    ElementBounds {
        intervals,
        half_widths: intervals.map(|iv| 0.5 * iv.width()),
    }
}

/// Reference solution by direct re-solve: perturbs the six measurements by
/// `deviations` times their half-widths, re-runs the range loop from the
/// selected pair and converts the Lambert state to elements.
pub fn pointwise_solve(
    selected: &RangePair,
    track: &PolarTrack,
    p2: &Phase2Config,
    deviations: &[f64; 6],
) -> Result<ReducedElements, PipelineError> {
    let prob = problem(selected, track, p2)?;
    let pair = prob.ranges_at(deviations)?;
    let m = prob.measurements_at(deviations);
    let r1 = v3::add(&prob.geom.receiver_state(prob.t[0]).r, &v3::scale(&radec_to_los(&m[0], &m[1]).0, pair.rho1));
    let rn = v3::add(&prob.geom.receiver_state(prob.t[1]).r, &v3::scale(&radec_to_los(&m[3], &m[4]).0, pair.rho_n));
    let sol = lambert_solve(
        &Vec3(r1),
        &Vec3(rn),
        prob.t[1] - prob.t[0],
        MU_EARTH,
        TransferDirection::Along(v3::cross(&r1, &rn)),
    )
    .map_err(|source| PipelineError::Lambert { corner: 0, source })?;
    Ok(cart_to_reduced(&StateVector::new(r1, sol.v1.0), MU_EARTH)?)
}
