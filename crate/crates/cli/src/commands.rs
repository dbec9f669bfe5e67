//! Implementations of the pipeline subcommands.

use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};

use mfcforge::analysis::{
    check_candidate, margins, step_metrics, CandidateReport, PerformanceSpec,
};
use mfcforge::bridge::{
    controller_tf, map_set, ControllerGains, FilterConfig, GainsRecord, InverseMethod, PidGains,
};
use mfcforge::plant::{
    augment_with_filter_poles, build_lateral_ss, ss_to_tf, zoh_discretize, DiscreteTF,
};
use mfcforge::sim::{simulate_tracking, ReferenceSignal};
use mfcforge::stabset::{stabilizing_set, ControllerKind, StabilizingSet, SweepConfig};

use crate::formats::{
    cloud_from_csv, cloud_to_csv, read_json, write_atomic, write_json, CloudRow, ControllerFile,
    MarginsFile, MetricsFile, ParamsFile, PlantFile, ReportFile, SetFile, SsBlock, TfBlock,
};
use crate::{
    FilterArgs, GmUnit, KindArg, MarginsArgs, MethodArg, PlantArgs, RefArg, SimulateArgs,
    StabsetArgs, TransformArgs,
};

pub fn cmd_plant(args: PlantArgs) -> Result<ExitCode> {
    let params: ParamsFile = read_json(&args.params)?;
    let continuous = build_lateral_ss(&params.clone().into()).map_err(|e| anyhow!("{e}"))?;
    let discrete = zoh_discretize(&continuous, args.ts).map_err(|e| anyhow!("{e}"))?;
    let tf = ss_to_tf(&discrete, 0, 0).map_err(|e| anyhow!("{e}"))?;
    let out = PlantFile {
        params,
        ts: args.ts,
        continuous: SsBlock::from_ss(&continuous),
        discrete: SsBlock::from_ss(&discrete),
        tf: TfBlock {
            num: tf.num().coeffs().to_vec(),
            den: tf.den().coeffs().to_vec(),
            ts: tf.ts(),
        },
    };
    write_json(&args.out, &out)?;
    println!(
        "plant: wrote {} (deg D = {}, deg N = {})",
        args.out.display(),
        out.tf.den.len() - 1,
        out.tf.num.len().saturating_sub(1),
    );
    Ok(ExitCode::SUCCESS)
}

fn augmented_plant(plant: &PlantFile, kind: ControllerKind, filter_c: f64) -> Result<DiscreteTF> {
    let g = plant.design_tf()?;
    let order = match kind {
        ControllerKind::Pi => 1,
        ControllerKind::Pid => 2,
    };
    augment_with_filter_poles(&g, filter_c, order).map_err(|e| anyhow!("{e}"))
}

pub fn cmd_stabset(args: StabsetArgs) -> Result<ExitCode> {
    let plant: PlantFile = read_json(&args.plant)?;
    let kind = match args.kind {
        KindArg::Pi => ControllerKind::Pi,
        KindArg::Pid => ControllerKind::Pid,
    };
    let g_aug = augmented_plant(&plant, kind, args.filter_c)?;
    let sweep = SweepConfig::new(args.gate_lo, args.gate_hi, args.steps)
        .with_param_box(args.param_lo, args.param_hi);
    let set = stabilizing_set(&g_aug, kind, &sweep).map_err(|e| anyhow!("{e}"))?;
    let out = SetFile {
        kind,
        ts: set.ts,
        filter_c: args.filter_c,
        sweep,
        signature: set.signature,
        empty: set.is_empty(),
        slices: set.slices,
    };
    write_json(&args.out, &out)?;
    println!(
        "stabset: wrote {} ({} slices{})",
        args.out.display(),
        out.slices.len(),
        if out.empty { ", empty set" } else { "" }
    );
    Ok(ExitCode::SUCCESS)
}

fn set_from_file(file: &SetFile) -> StabilizingSet {
    StabilizingSet {
        kind: file.kind,
        ts: file.ts,
        sweep: file.sweep,
        signature: file.signature,
        slices: file.slices.clone(),
    }
}

pub fn cmd_transform(args: TransformArgs) -> Result<ExitCode> {
    let file: SetFile = read_json(&args.set)?;
    if file.kind != ControllerKind::Pid {
        bail!("kind_mismatch: transform expects a PID set (iPD2 target)");
    }
    let set = set_from_file(&file);
    let filter = FilterConfig::new(file.filter_c, file.ts).map_err(|e| anyhow!("{e}"))?;
    let method = match args.method {
        MethodArg::Semilinear => InverseMethod::Semilinear,
        MethodArg::Nonlinear => InverseMethod::Nonlinear,
    };
    let mapped = map_set(&set, &filter, args.grid, method).map_err(|e| anyhow!("{e}"))?;
    let rows: Vec<CloudRow> = mapped
        .points
        .iter()
        .map(|p| CloudRow {
            k3: p.k3,
            k1: p.k1,
            k2: p.k2,
            kp: p.ipd.kp,
            kd: p.ipd.kd,
            alpha: p.ipd.alpha,
        })
        .collect();
    write_atomic(&args.out, &cloud_to_csv(&rows))?;
    println!(
        "transform: wrote {} ({} points, {} singular skipped)",
        args.out.display(),
        rows.len(),
        mapped.singular_skipped
    );
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_filter(args: FilterArgs) -> Result<ExitCode> {
    let plant: PlantFile = read_json(&args.plant)?;
    let spec = PerformanceSpec {
        gm_min_db: args.gm_min.map(|v| match args.gm_unit {
            GmUnit::Ratio => 20.0 * v.log10(),
            GmUnit::Db => v,
        }),
        pm_min_deg: args.pm_min_deg,
        os_max_pct: args.os_max,
        st_max_s: args.st_max,
        st_band: args.band,
    };
    spec.validate().map_err(|e| {
        anyhow!("{e} (pass at least one of --gm-min/--pm-min-deg/--os-max/--st-max)")
    })?;

    // Candidates and their output representation.
    enum Input {
        Cloud(Vec<CloudRow>),
        Set { filter_c: f64 },
    }
    let (input, records): (Input, Vec<GainsRecord>) = if let Some(cloud_path) = &args.cloud {
        let text = std::fs::read_to_string(cloud_path)
            .with_context(|| format!("reading {}", cloud_path.display()))?;
        let rows = cloud_from_csv(&text)?;
        let filter = FilterConfig::new(args.filter_c, plant.ts).map_err(|e| anyhow!("{e}"))?;
        // Cloud rows carry their PID image exactly; candidates are the PID
        // gains on the augmented plant (same loop as iPD on the raw plant).
        let records = rows
            .iter()
            .map(|r| GainsRecord {
                gains: ControllerGains::Pid(PidGains::from_gate_point(r.k3, r.k1, r.k2)),
                filter,
            })
            .collect();
        (Input::Cloud(rows), records)
    } else if let Some(set_path) = &args.set {
        let file: SetFile = read_json(set_path)?;
        if file.kind != ControllerKind::Pid {
            bail!("kind_mismatch: filter expects a PID set");
        }
        let filter = FilterConfig::new(file.filter_c, file.ts).map_err(|e| anyhow!("{e}"))?;
        let set = set_from_file(&file);
        // Sample regions on the same grid the transform stage uses, keeping
        // PID coordinates.
        let mapped = map_set(&set, &filter, args.grid, InverseMethod::Nonlinear)
            .map_err(|e| anyhow!("{e}"))?;
        let records: Vec<GainsRecord> = mapped
            .points
            .iter()
            .map(|p| GainsRecord {
                gains: ControllerGains::Pid(PidGains::from_gate_point(p.k3, p.k1, p.k2)),
                filter,
            })
            .collect();
        (
            Input::Set {
                filter_c: file.filter_c,
            },
            records,
        )
    } else {
        bail!("missing_input: pass --set or --cloud");
    };

    let filter_c = match &input {
        Input::Cloud(_) => args.filter_c,
        Input::Set { filter_c } => *filter_c,
    };
    let g_aug = augmented_plant(&plant, ControllerKind::Pid, filter_c)?;
    let reports: Vec<CandidateReport> = records
        .iter()
        .map(|rec| check_candidate(rec, &g_aug, &spec).map_err(|e| anyhow!("{e}")))
        .collect::<Result<_>>()?;

    let kept: Vec<usize> = reports
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.passed.then_some(i))
        .collect();

    match &input {
        Input::Cloud(rows) => {
            let survivors: Vec<CloudRow> = kept.iter().map(|&i| rows[i]).collect();
            write_atomic(&args.out, &cloud_to_csv(&survivors))?;
        }
        Input::Set { .. } => {
            let mut text = String::from("K3,K1,K2\n");
            for &i in &kept {
                if let ControllerGains::Pid(p) = records[i].gains {
                    text.push_str(&format!("{},{},{}\n", p.k3(), p.k1, p.k2));
                }
            }
            write_atomic(&args.out, &text)?;
        }
    }
    if let Some(report_path) = &args.report {
        write_json(
            report_path,
            &ReportFile {
                spec,
                candidates: reports,
            },
        )?;
    }
    println!(
        "filter: wrote {} ({} of {} candidates pass)",
        args.out.display(),
        kept.len(),
        records.len()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let plant: PlantFile = read_json(&args.plant)?;
    let controller: ControllerFile = read_json(&args.controller)?;
    let record = controller.into_record()?;
    let gains = match record.gains {
        ControllerGains::Ipd(g) => g,
        _ => bail!("kind_mismatch: simulate expects an iPD controller record"),
    };
    let reference = match args.r#ref {
        RefArg::Step => ReferenceSignal::step(args.amplitude),
        RefArg::Smoothstep => {
            ReferenceSignal::smoothed_step(args.amplitude, args.tau).map_err(|e| anyhow!("{e}"))?
        }
    };
    let ss = plant.discrete_ss();
    let trace = simulate_tracking(&ss, &gains, &record.filter, &reference, args.n)
        .map_err(|e| anyhow!("{e}"))?;
    write_atomic(&args.out, &trace.to_csv())?;
    let metrics = step_metrics(&trace, args.band).ok();
    if let Some(metrics_path) = &args.metrics {
        match &metrics {
            Some(m) => write_json(metrics_path, &MetricsFile::from_metrics(m, trace.diverged))?,
            None => write_json(
                metrics_path,
                &serde_json::json!({ "diverged": trace.diverged, "metrics": null }),
            )?,
        }
    }
    if trace.diverged {
        eprintln!("error: divergence: output exceeded limit, partial trace written");
        return Ok(ExitCode::from(3));
    }
    match metrics {
        Some(m) => println!(
            "simulate: wrote {} (OS = {:.2}%, ST({:.0}%) = {:.2} s, settled = {})",
            args.out.display(),
            m.overshoot_pct,
            m.settling_band * 100.0,
            m.settling_time_s,
            m.settled
        ),
        None => println!("simulate: wrote {} (metrics undefined)", args.out.display()),
    }
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_margins(args: MarginsArgs) -> Result<ExitCode> {
    let plant: PlantFile = read_json(&args.plant)?;
    let controller: ControllerFile = read_json(&args.controller)?;
    let record = controller.into_record()?;
    let g = plant.design_tf()?;
    let ctf = controller_tf(&record.gains, &record.filter).map_err(|e| anyhow!("{e}"))?;
    // Open loop C*G; PI/PID records act on the filter-augmented plant.
    let open = match record.gains {
        ControllerGains::Ipd(_) => {
            DiscreteTF::new(ctf.num().mul(g.num()), ctf.den().mul(g.den()), g.ts())
                .map_err(|e| anyhow!("{e}"))?
        }
        ControllerGains::Pi(_) | ControllerGains::Pid(_) => {
            let order = if matches!(record.gains, ControllerGains::Pi(_)) {
                1
            } else {
                2
            };
            let g_aug = augment_with_filter_poles(&g, record.filter.c, order)
                .map_err(|e| anyhow!("{e}"))?;
            DiscreteTF::new(
                ctf.num().mul(g_aug.num()),
                ctf.den().mul(g_aug.den()),
                g.ts(),
            )
            .map_err(|e| anyhow!("{e}"))?
        }
    };
    let m = margins(&open).map_err(|e| anyhow!("{e}"))?;
    let out = MarginsFile::from(&m);
    let text = serde_json::to_string_pretty(&out)?;
    match &args.out {
        Some(path) => {
            write_atomic(path, &format!("{text}\n"))?;
            println!("margins: wrote {}", path.display());
        }
        None => println!("{text}"),
    }
    // Round-trip check for the Table-style summary on stdout.
    let gm = out
        .gain_margin_db
        .map(|v| format!("{v:.2} dB"))
        .unwrap_or_else(|| "inf".into());
    let pm = out
        .phase_margin_deg
        .map(|v| format!("{v:.2} deg"))
        .unwrap_or_else(|| "undefined".into());
    println!("margins: GM = {gm}, PM = {pm}");
    Ok(ExitCode::SUCCESS)
}
