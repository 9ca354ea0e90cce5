//! Track files.
//!
//! JSON files carry a schema tag, the radar geometry and the observations.
//! CSV files carry observations only; the geometry is supplied separately.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MeasError, PolarObs, PolarTrack, RawObs, RawTrack};
use crate::astro::{Epoch, RadarGeometry};

pub const TRACK_SCHEMA: &str = "daiod.track/1";
pub const POLAR_SCHEMA: &str = "daiod.polar/1";

#[derive(Debug, Serialize, Deserialize)]
struct RawRow {
    epoch: String,
    #[serde(rename = "A_deg")]
    a_deg: f64,
    #[serde(rename = "E_deg")]
    e_deg: f64,
    rr_kms: f64,
    #[serde(rename = "sigma_A_deg")]
    sigma_a_deg: f64,
    #[serde(rename = "sigma_E_deg")]
    sigma_e_deg: f64,
    sigma_rr_kms: f64,
}

impl RawRow {
    fn from_obs(o: &RawObs) -> RawRow {
        RawRow {
            epoch: o.epoch.to_iso(),
            a_deg: o.az_deg,
            e_deg: o.el_deg,
            rr_kms: o.rr_kms,
            sigma_a_deg: o.sigma_az_deg,
            sigma_e_deg: o.sigma_el_deg,
            sigma_rr_kms: o.sigma_rr_kms,
        }
    }

    fn to_obs(&self) -> Result<RawObs, MeasError> {
        Ok(RawObs {
            epoch: Epoch::from_iso(&self.epoch)?,
            az_deg: self.a_deg,
            el_deg: self.e_deg,
            rr_kms: self.rr_kms,
            sigma_az_deg: self.sigma_a_deg,
            sigma_el_deg: self.sigma_e_deg,
            sigma_rr_kms: self.sigma_rr_kms,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TrackFile {
    schema: String,
    geometry: RadarGeometry,
    observations: Vec<RawRow>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PolarRow {
    epoch: String,
    ra_deg: f64,
    dec_deg: f64,
    rr_kms: f64,
    ci_ra_deg: f64,
    ci_dec_deg: f64,
    ci_rr_kms: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PolarFile {
    schema: String,
    iota: f64,
    geometry: RadarGeometry,
    observations: Vec<PolarRow>,
}

fn io_err(e: impl std::fmt::Display) -> MeasError {
    MeasError::Io(e.to_string())
}

fn fmt_err(e: impl std::fmt::Display) -> MeasError {
    MeasError::Format(e.to_string())
}

pub fn track_to_json_string(track: &RawTrack) -> Result<String, MeasError> {
    let f = TrackFile {
        schema: TRACK_SCHEMA.to_string(),
        geometry: track.geometry,
        observations: track.obs.iter().map(RawRow::from_obs).collect(),
    };
    serde_json::to_string_pretty(&f).map_err(fmt_err)
}

pub fn track_from_json_str(s: &str) -> Result<RawTrack, MeasError> {
    let v: serde_json::Value = serde_json::from_str(s).map_err(fmt_err)?;
    let schema = v.get("schema").and_then(|x| x.as_str()).unwrap_or("");
    if schema != TRACK_SCHEMA {
        return Err(MeasError::Schema(schema.to_string()));
    }
    let f: TrackFile = serde_json::from_value(v).map_err(fmt_err)?;
    let obs = f
        .observations
        .iter()
        .map(RawRow::to_obs)
        .collect::<Result<Vec<_>, _>>()?;
    let track = RawTrack {
        geometry: f.geometry,
        obs,
    };
    track.validate()?;
    Ok(track)
}

pub fn write_track_json(path: &Path, track: &RawTrack) -> Result<(), MeasError> {
    std::fs::write(path, track_to_json_string(track)?).map_err(io_err)
}

pub fn read_track_json(path: &Path) -> Result<RawTrack, MeasError> {
    track_from_json_str(&std::fs::read_to_string(path).map_err(io_err)?)
}

pub fn write_track_csv(path: &Path, track: &RawTrack) -> Result<(), MeasError> {
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    for o in &track.obs {
        w.serialize(RawRow::from_obs(o)).map_err(fmt_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_track_csv(path: &Path, geometry: RadarGeometry) -> Result<RawTrack, MeasError> {
    let mut r = csv::Reader::from_path(path).map_err(io_err)?;
    let mut obs = Vec::new();
    for row in r.deserialize::<RawRow>() {
        obs.push(row.map_err(fmt_err)?.to_obs()?);
    }
    let track = RawTrack { geometry, obs };
    track.validate()?;
    Ok(track)
}

pub fn polar_to_json_string(track: &PolarTrack) -> Result<String, MeasError> {
    let rows = track
        .obs
        .iter()
        .map(|o: &PolarObs| PolarRow {
            epoch: o.epoch.to_iso(),
            ra_deg: o.ra_deg,
            dec_deg: o.dec_deg,
            rr_kms: o.rr_kms,
            ci_ra_deg: o.ci_ra_deg,
            ci_dec_deg: o.ci_dec_deg,
            ci_rr_kms: o.ci_rr_kms,
        })
        .collect();
    let f = PolarFile {
        schema: POLAR_SCHEMA.to_string(),
        iota: track.iota,
        geometry: track.geometry,
        observations: rows,
    };
    serde_json::to_string_pretty(&f).map_err(fmt_err)
}

pub fn polar_from_json_str(s: &str) -> Result<PolarTrack, MeasError> {
    let v: serde_json::Value = serde_json::from_str(s).map_err(fmt_err)?;
    let schema = v.get("schema").and_then(|x| x.as_str()).unwrap_or("");
    if schema != POLAR_SCHEMA {
        return Err(MeasError::Schema(schema.to_string()));
    }
    let f: PolarFile = serde_json::from_value(v).map_err(fmt_err)?;
    let mut obs = Vec::with_capacity(f.observations.len());
    for r in &f.observations {
        obs.push(PolarObs {
            epoch: Epoch::from_iso(&r.epoch)?,
            ra_deg: r.ra_deg,
            dec_deg: r.dec_deg,
            rr_kms: r.rr_kms,
            ci_ra_deg: r.ci_ra_deg,
            ci_dec_deg: r.ci_dec_deg,
            ci_rr_kms: r.ci_rr_kms,
        });
    }
    let t = PolarTrack {
        geometry: f.geometry,
        iota: f.iota,
        obs,
    };
    t.validate()?;
    Ok(t)
}

pub fn write_polar_json(path: &Path, track: &PolarTrack) -> Result<(), MeasError> {
    std::fs::write(path, polar_to_json_string(track)?).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track() -> RawTrack {
        RawTrack {
            geometry: RadarGeometry::graves_like(),
            obs: (0..4)
                .map(|i| RawObs {
                    epoch: Epoch::new(8.0e8 + 2.5 * i as f64),
                    az_deg: 100.0 + i as f64,
                    el_deg: 30.0,
                    rr_kms: -2.0,
                    sigma_az_deg: 0.05,
                    sigma_el_deg: 0.05,
                    sigma_rr_kms: 5e-4,
                })
                .collect(),
        }
    }

    #[test]
    fn json_roundtrip_and_schema_check() {
        let t = track();
        let s = track_to_json_string(&t).unwrap();
        assert!(s.contains("\"A_deg\"") && s.contains("daiod.track/1"));
        assert_eq!(track_from_json_str(&s).unwrap(), t);
        let bad = s.replace("daiod.track/1", "daiod.track/9");
        assert_eq!(
            track_from_json_str(&bad),
            Err(MeasError::Schema("daiod.track/9".into()))
        );
    }

    #[test]
    fn csv_roundtrip() {
        let t = track();
        let dir = std::env::temp_dir().join(format!("daiod-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("t.csv");
        write_track_csv(&p, &t).unwrap();
        let head = std::fs::read_to_string(&p).unwrap();
        assert!(head.starts_with("epoch,A_deg,E_deg,rr_kms,sigma_A_deg,sigma_E_deg,sigma_rr_kms"));
        assert_eq!(read_track_csv(&p, t.geometry).unwrap(), t);
        std::fs::remove_dir_all(&dir).ok();
    }
}
