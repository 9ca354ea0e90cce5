use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{generate_pass, NoiseLevel, PassSpec, PassTruth, Sector, SimError};
use crate::astro::{ClassicalElements, RadarGeometry, MU_EARTH};
use crate::measproc::{empirical_quantile, RawTrack};
use crate::pipeline::{solve_track, PipelineConfig};

/// Upper edges of the arc-fraction bins, as fractions of the period. Bin `j`
/// holds passes with `ARC_BINS[j-1] ≤ Δt/T < ARC_BINS[j]`.
pub const ARC_BINS: [f64; 5] = [0.01, 0.02, 0.03, 0.04, 0.05];

/// Bin of an observed arc fraction, or `None` beyond the last edge.
pub fn arc_bin(fraction: f64) -> Option<usize> {
    ARC_BINS.iter().position(|&hi| fraction < hi)
}

fn bin_lower(j: usize) -> f64 {
    if j == 0 {
        0.0
    } else {
        ARC_BINS[j - 1]
    }
}

/// Ranges from which LEO elements are drawn uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub a_km: [f64; 2],
    pub e_max: f64,
    pub i_deg: [f64; 2],
}

impl Default for Population {
    fn default() -> Population {
        Population {
            a_km: [6878.0, 7578.0],
            e_max: 0.02,
            i_deg: [60.0, 100.0],
        }
    }
}

/// Draws one element set; node, perigee and anomaly are uniform on the circle.
pub fn sample_population(pop: &Population, rng: &mut impl Rng) -> ClassicalElements {
    ClassicalElements {
        a: rng.random_range(pop.a_km[0]..=pop.a_km[1]),
        e: rng.random_range(0.0..=pop.e_max),
        i: rng.random_range(pop.i_deg[0]..=pop.i_deg[1]),
        raan: rng.random_range(0.0..360.0),
        argp: rng.random_range(0.0..360.0),
        nu: rng.random_range(0.0..360.0),
    }
}

/// A campaign: passes are spread round-robin over the noise rungs and arc
/// bins, with the arc fraction uniform inside the bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub n_passes: usize,
    pub seed: u64,
    #[serde(default)]
    pub population: Population,
    /// Explicit element sets used in turn instead of sampling when non-empty.
    #[serde(default)]
    pub elements: Vec<ClassicalElements>,
    pub noise_rungs: Vec<u32>,
    /// Indices into [`ARC_BINS`] to populate.
    pub bins: Vec<usize>,
    /// Shortest arc simulated in the first bin, fraction of the period.
    pub min_arc_fraction: f64,
    pub ts: f64,
    pub mask_deg: f64,
    pub geometry: RadarGeometry,
    #[serde(default)]
    pub sector: Option<Sector>,
    pub pipeline: PipelineConfig,
}

impl Default for CampaignConfig {
    fn default() -> CampaignConfig {
        CampaignConfig {
            n_passes: 10,
            seed: 1,
            population: Population::default(),
            elements: Vec::new(),
            noise_rungs: vec![1, 5, 10],
            bins: (0..ARC_BINS.len()).collect(),
            min_arc_fraction: 0.005,
            ts: 5.0,
            mask_deg: 10.0,
            geometry: RadarGeometry::graves_like(),
            sector: None,
            pipeline: campaign_pipeline(),
        }
    }
}

/// Solver defaults with the manifold capped at 64 entries so a pass costs
/// at most about a second.
pub fn campaign_pipeline() -> PipelineConfig {
    let mut p = PipelineConfig::default();
    p.ads.max_entries = Some(64);
    p
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidSpec(m.into()));
        if self.n_passes == 0 {
            return bad("campaign has no passes");
        }
        if self.noise_rungs.is_empty() || self.bins.is_empty() {
            return bad("campaign needs at least one noise rung and one arc bin");
        }
        if self.bins.iter().any(|&b| b >= ARC_BINS.len()) {
            return bad("arc bin index out of range");
        }
        if !(self.min_arc_fraction > 0.0 && self.min_arc_fraction < ARC_BINS[0]) {
            return bad("min_arc_fraction must lie inside the first bin");
        }
        let p = &self.population;
        if !(p.a_km[0] > 0.0 && p.a_km[0] <= p.a_km[1] && p.e_max >= 0.0 && p.e_max < 1.0)
            || p.i_deg[0] > p.i_deg[1]
        {
            return bad("invalid population ranges");
        }
        for &k in &self.noise_rungs {
            NoiseLevel::ladder(k)?;
        }
        Ok(())
    }
}

/// Seed of pass `index`, independent of how many passes precede it.
pub fn pass_seed(campaign_seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(campaign_seed);
    rng.set_stream(index as u64);
    rng.next_u64()
}

/// Builds the pass specifications. Element draws without a long enough
/// visible window are redrawn, so every returned spec simulates.
pub fn plan_campaign(cfg: &CampaignConfig) -> Result<Vec<PassSpec>, SimError> {
    cfg.validate()?;
    let nr = cfg.noise_rungs.len();
    let mut specs = Vec::with_capacity(cfg.n_passes);
    for j in 0..cfg.n_passes {
        let seed = pass_seed(cfg.seed, j);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = NoiseLevel::ladder(cfg.noise_rungs[j % nr])?;
        let bin = cfg.bins[(j / nr) % cfg.bins.len()];
        let lo = bin_lower(bin).max(cfg.min_arc_fraction);
        let mut found = None;
        for attempt in 0..50 {
            let elements = if cfg.elements.is_empty() {
                sample_population(&cfg.population, &mut rng)
            } else {
                cfg.elements[(j + attempt) % cfg.elements.len()]
            };
            let mut spec = PassSpec::new(elements, noise.clone(), rng.next_u64());
            spec.ts = cfg.ts;
            spec.mask_deg = cfg.mask_deg;
            spec.geometry = cfg.geometry;
            spec.sector = cfg.sector;
            spec.arc_fraction = Some(rng.random_range(lo..ARC_BINS[bin]));
            match generate_pass(&spec) {
                Ok(_) => {
                    found = Some(spec);
                    break;
                }
                Err(SimError::NoVisibility) => continue,
                Err(e) => return Err(e),
            }
        }
        specs.push(found.ok_or(SimError::NoVisibility)?);
    }
    Ok(specs)
}

/// Outcome of one simulated pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassResult {
    pub index: usize,
    pub seed: u64,
    pub noise: String,
    pub arc_fraction: f64,
    pub n_obs: usize,
    pub success: bool,
    pub error: Option<String>,
    /// Absolute errors in (a, e, i, Ω, u); angles by shortest distance.
    pub eps: Option<[f64; 5]>,
    /// Bound half-widths in the same order.
    pub b: Option<[f64; 5]>,
    pub truth_inside: Option<bool>,
    pub n_s: usize,
    pub selected_corner: Option<usize>,
    pub wall_time_s: f64,
}

/// Mean and 75th percentile per element over the successful passes of a
/// (noise, arc bin) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinStats {
    pub noise: String,
    pub bin: usize,
    pub n_passes: usize,
    pub n_success: usize,
    pub success_rate: f64,
    /// Statistics are absent when the cell has no successful pass.
    pub mean_eps: Option<[f64; 5]>,
    pub q3_eps: Option<[f64; 5]>,
    pub mean_b: Option<[f64; 5]>,
    pub q3_b: Option<[f64; 5]>,
    pub mean_n_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub passes: Vec<PassResult>,
    pub bins: Vec<BinStats>,
    pub success_rate: f64,
}

fn run_one(index: usize, spec: &PassSpec, cfg: &PipelineConfig) -> PassResult {
    let start = crate::clock::Instant::now();
    let mut out = PassResult {
        index,
        seed: spec.seed,
        noise: spec.noise.label.clone(),
        arc_fraction: spec.arc_fraction.unwrap_or(0.0),
        n_obs: 0,
        success: false,
        error: None,
        eps: None,
        b: None,
        truth_inside: None,
        n_s: 0,
        selected_corner: None,
        wall_time_s: 0.0,
    };
    let (track, truth): (RawTrack, PassTruth) = match generate_pass(spec) {
        Ok(x) => x,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    out.arc_fraction = truth.arc_fraction;
    out.n_obs = truth.n_obs;
    let mut cfg = cfg.clone();
    cfg.meas.seed = spec.seed;
    match solve_track(&track, &cfg) {
        Ok(os) => {
            out.success = true;
            out.eps = Some(os.nominal.abs_error(&truth.elements));
            out.b = Some(os.bounds.half_widths);
            out.truth_inside = Some(os.bounds.contains(&truth.elements));
            out.n_s = os.n_s();
            out.selected_corner = Some(os.diagnostics.selected_corner);
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out.wall_time_s = start.elapsed().as_secs_f64();
    out
}

fn map_passes(specs: &[PassSpec], cfg: &PipelineConfig, jobs: usize) -> Vec<PassResult> {
    #[cfg(feature = "parallel")]
    if jobs != 1 {
        use rayon::prelude::*;
        let work = || {
            specs
                .par_iter()
                .enumerate()
                .map(|(i, s)| run_one(i, s, cfg))
                .collect::<Vec<_>>()
        };
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build();
        if let Ok(pool) = pool {
            return pool.install(work);
        }
    }
    let _ = jobs;
    specs.iter().enumerate().map(|(i, s)| run_one(i, s, cfg)).collect()
}

/// Solves every pass and aggregates per (noise, arc bin) cell. `jobs` caps
/// the worker threads; 0 uses all cores. Results do not depend on `jobs`.
pub fn run_campaign(specs: &[PassSpec], cfg: &PipelineConfig, jobs: usize) -> CampaignResult {
    let passes = map_passes(specs, cfg, jobs);
    let bins = aggregate(&passes);
    let success_rate = if passes.is_empty() {
        0.0
    } else {
        passes.iter().filter(|p| p.success).count() as f64 / passes.len() as f64
    };
    CampaignResult {
        passes,
        bins,
        success_rate,
    }
}

fn noise_rank(label: &str) -> u32 {
    label.trim_start_matches('k').parse().unwrap_or(u32::MAX)
}

fn aggregate(passes: &[PassResult]) -> Vec<BinStats> {
    let mut keys: Vec<(String, usize)> = passes
        .iter()
        .filter_map(|p| arc_bin(p.arc_fraction).map(|b| (p.noise.clone(), b)))
        .collect();
    keys.sort_by(|a, b| (noise_rank(&a.0), &a.0, a.1).cmp(&(noise_rank(&b.0), &b.0, b.1)));
    keys.dedup();
    keys.into_iter()
        .map(|(noise, bin)| {
            let cell: Vec<&PassResult> = passes
                .iter()
                .filter(|p| p.noise == noise && arc_bin(p.arc_fraction) == Some(bin))
                .collect();
            let ok: Vec<&PassResult> = cell.iter().copied().filter(|p| p.success).collect();
            let stat = |get: &dyn Fn(&PassResult) -> [f64; 5]| {
                if ok.is_empty() {
                    return (None, None);
                }
                let mut mean = [0.0; 5];
                let mut q3 = [0.0; 5];
                for q in 0..5 {
                    let mut v: Vec<f64> = ok.iter().map(|p| get(p)[q]).collect();
                    mean[q] = v.iter().sum::<f64>() / v.len() as f64;
                    q3[q] = empirical_quantile(&mut v, 0.75);
                }
                (Some(mean), Some(q3))
            };
            let (mean_eps, q3_eps) = stat(&|p| p.eps.unwrap());
            let (mean_b, q3_b) = stat(&|p| p.b.unwrap());
            let mean_n_s = (!ok.is_empty())
                .then(|| ok.iter().map(|p| p.n_s as f64).sum::<f64>() / ok.len() as f64);
            BinStats {
                noise,
                bin,
                n_passes: cell.len(),
                n_success: ok.len(),
                success_rate: ok.len() as f64 / cell.len() as f64,
                mean_eps,
                q3_eps,
                mean_b,
                q3_b,
                mean_n_s,
            }
        })
        .collect()
}

const ELEMENT_NAMES: [&str; 5] = ["a", "e", "i", "raan", "u"];

impl CampaignResult {
    /// Copy with wall-clock times zeroed, for byte-level comparisons.
    pub fn canonical(&self) -> CampaignResult {
        let mut c = self.clone();
        for p in &mut c.passes {
            p.wall_time_s = 0.0;
        }
        c
    }

    pub fn to_json(&self) -> Result<String, SimError> {
        serde_json::to_string_pretty(self).map_err(|e| SimError::InvalidSpec(e.to_string()))
    }

    pub fn bin(&self, noise: &str, bin: usize) -> Option<&BinStats> {
        self.bins.iter().find(|b| b.noise == noise && b.bin == bin)
    }

    /// Table with one row per (noise, statistic, quantity) and one column
    /// per arc bin; empty cells have no successful pass.
    pub fn to_csv_table(&self) -> String {
        let mut noises: Vec<&str> = self.bins.iter().map(|b| b.noise.as_str()).collect();
        noises.dedup();
        let mut out = String::from("noise,statistic,quantity");
        for hi in ARC_BINS {
            out.push_str(&format!(",<{hi}T"));
        }
        out.push('\n');
        let cell = |v: Option<f64>| match v {
            Some(x) if x.is_finite() => format!("{x:e}"),
            _ => String::new(),
        };
        for noise in noises {
            type Getter = Box<dyn Fn(&BinStats) -> Option<f64>>;
            let mut rows: Vec<(&str, String, Getter)> = vec![
                ("count", "passes".into(), Box::new(|b| Some(b.n_passes as f64))),
                ("rate", "success".into(), Box::new(|b| Some(b.success_rate))),
                ("mean", "n_s".into(), Box::new(|b| b.mean_n_s)),
            ];
            for (q, name) in ELEMENT_NAMES.iter().enumerate() {
                rows.push(("q3", format!("eps_{name}"), Box::new(move |b| b.q3_eps.map(|v| v[q]))));
                rows.push(("q3", format!("b_{name}"), Box::new(move |b| b.q3_b.map(|v| v[q]))));
                rows.push(("mean", format!("eps_{name}"), Box::new(move |b| b.mean_eps.map(|v| v[q]))));
                rows.push(("mean", format!("b_{name}"), Box::new(move |b| b.mean_b.map(|v| v[q]))));
            }
            for (stat, qty, get) in rows {
                out.push_str(&format!("{noise},{stat},{qty}"));
                for j in 0..ARC_BINS.len() {
                    out.push(',');
                    out.push_str(&cell(self.bin(noise, j).and_then(&get)));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Success rates with and without the corner scan on the same passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessComparison {
    pub n_passes: usize,
    pub centre_only_success: usize,
    pub corner_scan_success: usize,
    pub centre_only_rate: f64,
    pub corner_scan_rate: f64,
}

impl SuccessComparison {
    pub fn to_csv(&self) -> String {
        format!(
            "method,passes,successes,rate\ncentre_only,{},{},{}\ncorner_scan,{},{},{}\n",
            self.n_passes,
            self.centre_only_success,
            self.centre_only_rate,
            self.n_passes,
            self.corner_scan_success,
            self.corner_scan_rate
        )
    }
}

/// Runs the passes once with the centre sample only and once with the full
/// corner scan.
pub fn success_comparison(specs: &[PassSpec], cfg: &PipelineConfig, jobs: usize) -> SuccessComparison {
    let mut centre = cfg.clone();
    centre.phase2.corner_scan = false;
    let mut corners = cfg.clone();
    corners.phase2.corner_scan = true;
    let a = run_campaign(specs, &centre, jobs);
    let b = run_campaign(specs, &corners, jobs);
    let count = |r: &CampaignResult| r.passes.iter().filter(|p| p.success).count();
    let n = specs.len().max(1) as f64;
    SuccessComparison {
        n_passes: specs.len(),
        centre_only_success: count(&a),
        corner_scan_success: count(&b),
        centre_only_rate: count(&a) as f64 / n,
        corner_scan_rate: count(&b) as f64 / n,
    }
}

/// Orbital period of the sampled population's extremes, s; helpers for
/// sizing arcs.
pub fn period_range(pop: &Population) -> (f64, f64) {
    let t = |a: f64| 2.0 * std::f64::consts::PI * (a.powi(3) / MU_EARTH).sqrt();
    (t(pop.a_km[0]), t(pop.a_km[1]))
}
