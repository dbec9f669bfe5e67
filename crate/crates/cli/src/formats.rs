//! File schemas for the pipeline stages and atomic write helpers.
//!
//! JSON carries structured artifacts, CSV carries point clouds and traces.
//! Floats round-trip exactly (shortest-representation serialization), so
//! rewriting a parsed file reproduces it byte for byte.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use mfcforge::analysis::{CandidateReport, Margins, StepMetrics};
use mfcforge::bridge::{FilterConfig, IpdGains, UltraLocalOrder};
use mfcforge::plant::{Mat, StateSpace, VehicleParams};
use mfcforge::stabset::{ControllerKind, SignatureInfo, StabRegionSlice, SweepConfig};

/// Vehicle parameter file (input).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub m: f64,
    pub vx: f64,
    #[serde(rename = "Iz")]
    pub iz: f64,
    #[serde(rename = "Cf")]
    pub cf: f64,
    #[serde(rename = "Cr")]
    pub cr: f64,
    pub lf: f64,
    pub lr: f64,
}

impl From<ParamsFile> for VehicleParams {
    fn from(p: ParamsFile) -> Self {
        VehicleParams {
            m: p.m,
            vx: p.vx,
            iz: p.iz,
            cf: p.cf,
            cr: p.cr,
            lf: p.lf,
            lr: p.lr,
        }
    }
}

/// State-space block in the plant file, matrices as nested row arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SsBlock {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

fn mat_to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.rows)
        .map(|i| (0..m.cols).map(|j| m[(i, j)]).collect())
        .collect()
}

impl SsBlock {
    pub fn from_ss(ss: &StateSpace) -> Self {
        SsBlock {
            a: mat_to_rows(&ss.a),
            b: mat_to_rows(&ss.b),
            c: mat_to_rows(&ss.c),
            d: mat_to_rows(&ss.d),
        }
    }
}

/// Transfer-function block, ascending coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfBlock {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
    pub ts: f64,
}

/// Plant file: continuous and discrete models plus the design TF.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantFile {
    pub params: ParamsFile,
    pub ts: f64,
    pub continuous: SsBlock,
    pub discrete: SsBlock,
    pub tf: TfBlock,
}

impl PlantFile {
    pub fn design_tf(&self) -> Result<mfcforge::plant::DiscreteTF> {
        mfcforge::plant::DiscreteTF::new(
            mfcforge::poly::Poly::new(self.tf.num.clone()),
            mfcforge::poly::Poly::new(self.tf.den.clone()),
            self.tf.ts,
        )
        .map_err(|e| anyhow::anyhow!("invalid_plant_tf: {e}"))
    }

    pub fn discrete_ss(&self) -> StateSpace {
        let rows_to_mat = |rows: &Vec<Vec<f64>>| {
            let r = rows.len();
            let c = rows.first().map_or(0, |x| x.len());
            let mut m = Mat::zeros(r, c);
            for (i, row) in rows.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    m[(i, j)] = v;
                }
            }
            m
        };
        StateSpace {
            a: rows_to_mat(&self.discrete.a),
            b: rows_to_mat(&self.discrete.b),
            c: rows_to_mat(&self.discrete.c),
            d: rows_to_mat(&self.discrete.d),
            domain: mfcforge::plant::Domain::Discrete { ts: self.ts },
        }
    }
}

/// Stabilizing-set file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetFile {
    pub kind: ControllerKind,
    pub ts: f64,
    pub filter_c: f64,
    pub sweep: SweepConfig,
    pub signature: SignatureInfo,
    pub empty: bool,
    pub slices: Vec<StabRegionSlice>,
}

/// Controller file: the canonical schema is the iPD record
/// `{Kp, Kd, alpha, n, C, Ts}`; PI/PID records use a tagged `type` field.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ControllerFile {
    Tagged {
        #[serde(flatten)]
        gains: mfcforge::bridge::ControllerGains,
        #[serde(rename = "C")]
        c: f64,
        #[serde(rename = "Ts")]
        ts: f64,
    },
    Ipd {
        #[serde(rename = "Kp")]
        kp: f64,
        #[serde(rename = "Kd")]
        kd: f64,
        alpha: f64,
        n: usize,
        #[serde(rename = "C")]
        c: f64,
        #[serde(rename = "Ts")]
        ts: f64,
    },
}

impl ControllerFile {
    pub fn into_record(self) -> Result<mfcforge::bridge::GainsRecord> {
        match self {
            ControllerFile::Tagged { gains, c, ts } => Ok(mfcforge::bridge::GainsRecord {
                gains,
                filter: FilterConfig::new(c, ts).map_err(|e| anyhow::anyhow!("{e}"))?,
            }),
            ControllerFile::Ipd {
                kp,
                kd,
                alpha,
                n,
                c,
                ts,
            } => {
                let order = UltraLocalOrder::from_n(n).map_err(|e| anyhow::anyhow!("{e}"))?;
                let gains =
                    IpdGains::new(kp, kd, alpha, order).map_err(|e| anyhow::anyhow!("{e}"))?;
                Ok(mfcforge::bridge::GainsRecord {
                    gains: mfcforge::bridge::ControllerGains::Ipd(gains),
                    filter: FilterConfig::new(c, ts).map_err(|e| anyhow::anyhow!("{e}"))?,
                })
            }
        }
    }
}

/// Step-metrics output of `simulate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsFile {
    pub os_pct: f64,
    pub st_s: f64,
    pub band: f64,
    pub settled: bool,
    pub final_value: f64,
    pub diverged: bool,
}

impl MetricsFile {
    pub fn from_metrics(m: &StepMetrics, diverged: bool) -> Self {
        MetricsFile {
            os_pct: m.overshoot_pct,
            st_s: m.settling_time_s,
            band: m.settling_band,
            settled: m.settled,
            final_value: m.final_value,
            diverged,
        }
    }
}

/// Margins output of the `margins` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginsFile {
    pub gain_margin_db: Option<f64>,
    pub phase_crossover_rad_s: Option<f64>,
    pub phase_margin_deg: Option<f64>,
    pub gain_crossover_rad_s: Option<f64>,
}

impl From<&Margins> for MarginsFile {
    fn from(m: &Margins) -> Self {
        MarginsFile {
            gain_margin_db: m.gain_margin_db,
            phase_crossover_rad_s: m.phase_crossover_rad_s,
            phase_margin_deg: m.phase_margin_deg,
            gain_crossover_rad_s: m.gain_crossover_rad_s,
        }
    }
}

/// Filter-stage report: per-candidate metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub spec: mfcforge::analysis::PerformanceSpec,
    pub candidates: Vec<CandidateReport>,
}

/// One row of the iPD cloud CSV.
#[derive(Debug, Clone, Copy)]
pub struct CloudRow {
    pub k3: f64,
    pub k1: f64,
    pub k2: f64,
    pub kp: f64,
    pub kd: f64,
    pub alpha: f64,
}

pub const CLOUD_HEADER: &str = "K3,K1,K2,Kp,Kd,alpha";

pub fn cloud_to_csv(rows: &[CloudRow]) -> String {
    let mut out = String::from(CLOUD_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.k3, r.k1, r.k2, r.kp, r.kd, r.alpha
        ));
    }
    out
}

pub fn cloud_from_csv(text: &str) -> Result<Vec<CloudRow>> {
    let mut lines = text.lines();
    let header = lines.next().context("empty cloud file")?;
    if header.trim() != CLOUD_HEADER {
        bail!("bad_cloud_header: expected `{CLOUD_HEADER}`");
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("bad_cloud_row: line {}", i + 2))?;
        if vals.len() != 6 {
            bail!("bad_cloud_row: line {} has {} fields", i + 2, vals.len());
        }
        rows.push(CloudRow {
            k3: vals[0],
            k1: vals[1],
            k2: vals[2],
            kp: vals[3],
            kd: vals[4],
            alpha: vals[5],
        });
    }
    Ok(rows)
}

/// Write a file atomically (temp file in the same directory, then rename).
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name()
                .map(|s| s.to_string_lossy())
                .unwrap_or_default()
        )),
        None => Path::new(&format!(
            ".{}.tmp",
            path.file_name()
                .map(|s| s.to_string_lossy())
                .unwrap_or_default()
        ))
        .to_path_buf(),
    };
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
