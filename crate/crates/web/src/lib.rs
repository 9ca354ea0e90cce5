//! Browser front end. [`Demo`] holds the last solved pass; its plain Rust
//! methods carry the logic and the `wasm_bindgen` exports wrap them.

use daiod::astro::{ClassicalElements, ReducedElements};
use daiod::measproc::ProcessingMode;
use daiod::pipeline::{evaluate_orbit_set, solve_track, OrbitSet};
use daiod::sim::{campaign_pipeline, generate_pass, NoiseLevel, PassSpec, PassTruth};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Pass to simulate and solve.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRequest {
    pub a_km: f64,
    pub i_deg: f64,
    /// Noise ladder rung, 1 to 10.
    pub noise: u32,
    pub arc_fraction: f64,
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: ProcessingMode,
    #[serde(default = "default_entries")]
    pub max_entries: usize,
}

fn default_mode() -> ProcessingMode {
    ProcessingMode::Regress
}

fn default_entries() -> usize {
    64
}

#[derive(Debug, Clone, Serialize)]
pub struct ElementRow {
    pub name: &'static str,
    pub nominal: f64,
    pub truth: f64,
    pub lo: f64,
    pub hi: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub n_obs: usize,
    pub duration_s: f64,
    pub n_s: usize,
    pub selected_corner: usize,
    pub truth_inside: bool,
    pub elements: Vec<ElementRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub elements: ReducedElements,
    pub error: [f64; 5],
}

#[wasm_bindgen]
#[derive(Default)]
pub struct Demo {
    solved: Option<(OrbitSet, PassTruth)>,
}

impl Demo {
    pub fn solve_request(&mut self, req: &SolveRequest) -> Result<SolveSummary, String> {
        self.solved = None;
        let noise = NoiseLevel::ladder(req.noise).map_err(|e| e.to_string())?;
        if !(req.max_entries >= 1 && req.max_entries <= 4096) {
            return Err("max_entries must lie in 1..=4096".into());
        }
        let elements = ClassicalElements {
            a: req.a_km,
            e: 0.001,
            i: req.i_deg,
            raan: 30.0,
            argp: 10.0,
            nu: 20.0,
        };
        let mut spec = PassSpec::new(elements, noise, req.seed);
        spec.arc_fraction = Some(req.arc_fraction);
        let (track, truth) = generate_pass(&spec).map_err(|e| e.to_string())?;
        let mut cfg = campaign_pipeline();
        cfg.meas.mode = req.mode;
        cfg.meas.seed = req.seed;
        cfg.ads.max_entries = Some(req.max_entries);
        let os = solve_track(&track, &cfg).map_err(|e| e.to_string())?;
        let nominal = os.nominal.to_array();
        let t = truth.elements.to_array();
        let err = os.nominal.abs_error(&truth.elements);
        let elements = (0..5)
            .map(|q| ElementRow {
                name: ReducedElements::NAMES[q],
                nominal: nominal[q],
                truth: t[q],
                lo: os.bounds.intervals[q].lo,
                hi: os.bounds.intervals[q].hi,
                error: err[q],
            })
            .collect();
        let summary = SolveSummary {
            n_obs: track.obs.len(),
            duration_s: track.obs[track.obs.len() - 1].epoch - track.obs[0].epoch,
            n_s: os.n_s(),
            selected_corner: os.diagnostics.selected_corner,
            truth_inside: os.bounds.contains(&truth.elements),
            elements,
        };
        self.solved = Some((os, truth));
        Ok(summary)
    }

    pub fn evaluate_at(&self, deviations: &[f64]) -> Result<Evaluation, String> {
        let (os, truth) = self.solved.as_ref().ok_or("no solved pass yet")?;
        let d: [f64; 6] = deviations.try_into().map_err(|_| "need six deviations")?;
        if d.iter().any(|x| !(x.abs() <= 1.0)) {
            return Err("deviations must lie in [-1, 1]".into());
        }
        let el = evaluate_orbit_set(os, &d).map_err(|e| e.to_string())?;
        Ok(Evaluation {
            error: el.abs_error(&truth.elements),
            elements: el,
        })
    }

    pub fn orbit_set(&self) -> Option<&OrbitSet> {
        self.solved.as_ref().map(|s| &s.0)
    }
}

fn js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
        .and_then(|v| serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string())))
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Demo {
        Demo::default()
    }

    /// Simulates and solves a pass; `request` is a JSON `SolveRequest`.
    pub fn solve(&mut self, request: &str) -> Result<String, JsError> {
        let req: SolveRequest = serde_json::from_str(request).map_err(|e| JsError::new(&e.to_string()))?;
        js(self.solve_request(&req))
    }

    /// Elements at six normalized deviations.
    pub fn evaluate(&self, deviations: &[f64]) -> Result<String, JsError> {
        js(self.evaluate_at(deviations))
    }

    /// Element bounds of the current orbit set.
    pub fn bounds(&self) -> Result<String, JsError> {
        js(self.orbit_set().map(|os| os.bounds).ok_or_else(|| "no solved pass yet".to_string()))
    }
}
