use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::json;
use xrtraffic::analysis::{
    calibrate_profile, fit_logistic_scale, plot_data_csv, report_json, summarize, FitResult,
};
use xrtraffic::burst::{
    fragment_frame, frame_data_for, read_fragment_stream, write_fragment_stream, Reassembler,
    WIRE_PACKET_BYTES,
};
use xrtraffic::model::{synthesize_trace, FrameRate, RateMode, StreamConfig};
use xrtraffic::netsim::{
    parse_results_csv, report_csv, results_csv, summary_json, sweep, Campaign, PointStatus,
};
use xrtraffic::trace::{Trace, TraceError, TraceOrigin};

use crate::io::{invalid, resolve_profile, write_atomic};
use crate::{AnalyzeArgs, CalibrateArgs, FragmentArgs, ReportArgs, RunArgs, SynthesizeArgs};

fn load_trace(path: &Path) -> anyhow::Result<Trace> {
    Trace::load(path).map_err(|e| match e {
        TraceError::Io(_) => anyhow::Error::new(e).context(format!("cannot read {}", path.display())),
        other => invalid(format!("{}: {other}", path.display())),
    })
}

pub fn synthesize(a: SynthesizeArgs) -> anyhow::Result<()> {
    let profile = resolve_profile(&a.app)?;
    let mode = match (a.empirical_rate, a.empirical_factor) {
        (Some(r), _) => RateMode::EmpiricalRate(r),
        (None, Some(f)) => RateMode::EmpiricalRate(a.rate * f),
        (None, None) => RateMode::TargetRate,
    };
    let config = StreamConfig::new(profile, a.fps, a.rate, a.duration, a.seed)
        .map_err(invalid)?
        .with_rate_mode(mode)
        .with_dispersion_scale(a.dispersion_scale);
    config.validate().map_err(invalid)?;
    for w in config.warnings() {
        eprintln!("{w}");
    }
    let trace = synthesize_trace(&config).map_err(invalid)?;
    write_atomic(&a.out, trace.to_csv_string().as_bytes())?;
    println!(
        "frames={} measured_rate_bps={} out={}",
        trace.len(),
        trace.metadata.measured_rate_bps,
        a.out.display()
    );
    Ok(())
}

fn fit_json(fit: &Option<FitResult>) -> serde_json::Value {
    match fit {
        Some(f) => json!({
            "location": f.params.location(),
            "scale": f.params.scale(),
            "dispersion": f.params.scale() / f.params.location(),
            "ks": f.ks,
        }),
        None => serde_json::Value::Null,
    }
}

pub fn analyze(a: AnalyzeArgs) -> anyhow::Result<()> {
    let trace = load_trace(&a.trace)?;
    let m = &trace.metadata;
    let stats = summarize(&trace).map_err(invalid)?;
    // Fits need a supported frame rate to pin the locations.
    let (size_fit, ifi_fit) = match FrameRate::try_from(m.fps) {
        Ok(fr) => {
            let f = fr.fps() as f64;
            (
                fit_logistic_scale(&trace.sizes(), m.target_rate_bps / (8.0 * f)).ok(),
                fit_logistic_scale(&trace.ifis(), 1.0 / f).ok(),
            )
        }
        Err(_) => (None, None),
    };
    let origin = match m.origin {
        TraceOrigin::Synthetic { seed } => seed.to_string(),
        TraceOrigin::Captured => "captured".to_string(),
    };
    if a.json {
        let v = json!({
            "metadata": {
                "app": m.app,
                "fps": m.fps,
                "target_rate_bps": m.target_rate_bps,
                "measured_rate_bps": m.measured_rate_bps,
                "seed": origin,
                "duration_s": m.duration_s,
                "extra": m.extra,
            },
            "stats": stats,
            "frame_size_fit": fit_json(&size_fit),
            "ifi_fit": fit_json(&ifi_fit),
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
        return Ok(());
    }
    println!("app={}", m.app);
    println!("fps={}", m.fps);
    println!("target_rate_bps={}", m.target_rate_bps);
    println!("measured_rate_bps={}", m.measured_rate_bps);
    println!("seed={origin}");
    println!("duration_s={}", m.duration_s);
    println!("frames={}", stats.n_frames);
    println!("mean_size_bytes={}", stats.mean_size);
    println!("std_size_bytes={}", stats.std_size);
    println!("mean_ifi_s={}", stats.mean_ifi);
    println!("std_ifi_s={}", stats.std_ifi);
    println!("empirical_rate_bps={}", stats.measured_rate);
    for (name, fit) in [("size", &size_fit), ("ifi", &ifi_fit)] {
        if let Some(f) = fit {
            println!("{name}_location={}", f.params.location());
            println!("{name}_scale={}", f.params.scale());
            println!("{name}_dispersion={}", f.params.scale() / f.params.location());
            println!("{name}_ks={}", f.ks);
        }
    }
    Ok(())
}

pub fn calibrate(a: CalibrateArgs) -> anyhow::Result<()> {
    let paths: Vec<PathBuf> = glob::glob(&a.traces)
        .map_err(|e| invalid(format!("bad glob '{}': {e}", a.traces)))?
        .filter_map(Result::ok)
        .filter(|p| p.is_file())
        .collect();
    if paths.is_empty() {
        return Err(invalid(format!("no trace files match '{}'", a.traces)));
    }
    let traces: Vec<Trace> = paths.iter().map(|p| load_trace(p)).collect::<Result<_, _>>()?;
    let name = a.name.clone().unwrap_or_else(|| traces[0].metadata.app.clone());
    let cal = calibrate_profile(&traces, &name).map_err(|e| {
        use xrtraffic::analysis::AnalysisError::*;
        match e {
            InsufficientData(missing) => invalid(format!("insufficient data: {}", missing.join("; "))),
            ConflictingApps(apps) => invalid(format!("traces mix applications: {}", apps.join(", "))),
            Trace { index, source } => invalid(format!("{}: {source}", paths[index].display())),
            other => invalid(other),
        }
    })?;
    write_atomic(&a.out, cal.profile.to_kv_string().as_bytes())?;
    if let Some(p) = &a.report {
        write_atomic(p, report_json(&cal).as_bytes())?;
    }
    if let Some(p) = &a.plot {
        write_atomic(p, plot_data_csv(&cal.report).as_bytes())?;
    }
    println!("traces={} {}", traces.len(), cal.profile);
    Ok(())
}

pub fn fragment(a: FragmentArgs) -> anyhow::Result<()> {
    let trace = load_trace(&a.trace)?;
    let mut fragments = Vec::new();
    for f in &trace.frames {
        fragments.extend(fragment_frame(f).map_err(|e| invalid(format!("frame {}: {e}", f.index)))?);
    }
    let mut buf = Vec::new();
    write_fragment_stream(&mut buf, &fragments)?;
    write_atomic(&a.out, &buf)?;
    let video: u64 = trace.frames.iter().map(|f| f.size).sum();
    let wire = fragments.len() as u64 * WIRE_PACKET_BYTES as u64;
    println!(
        "frames={} fragments={} video_bytes={} wire_bytes={} overhead_ratio={}",
        trace.len(),
        fragments.len(),
        video,
        wire,
        wire as f64 / video as f64
    );
    if a.check {
        let bytes = fs::read(&a.out).with_context(|| format!("cannot read {}", a.out.display()))?;
        let back = read_fragment_stream(&bytes[..])?;
        let mut r = Reassembler::new();
        let mut done = 0usize;
        for frag in back {
            if let Some(frame) = r.push(frag)? {
                let src = &trace.frames[done];
                if frame.frame_seq as u64 != src.index || frame.data != frame_data_for(src) {
                    anyhow::bail!("frame {} did not reassemble to its source", src.index);
                }
                done += 1;
            }
        }
        if done != trace.len() {
            anyhow::bail!("only {done} of {} frames reassembled", trace.len());
        }
        println!("check=ok reassembled={done}");
    }
    Ok(())
}

pub fn run_campaign(a: RunArgs, is_sweep: bool) -> anyhow::Result<()> {
    let text = fs::read_to_string(&a.config)
        .with_context(|| format!("cannot read {}", a.config.display()))?;
    let base = a.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolve = |app: &str| {
        let local = base.join(app);
        let target = if local.is_file() {
            local.to_string_lossy().into_owned()
        } else {
            app.to_string()
        };
        resolve_profile(&target).map_err(|e| format!("{e:#}"))
    };
    let mut campaign = Campaign::from_toml_str(&text, &resolve).map_err(invalid)?;
    if let Some(seeds) = a.seeds {
        if seeds.is_empty() {
            return Err(invalid("--seeds must not be empty"));
        }
        campaign.seeds = seeds;
    }
    if !is_sweep && campaign.points.len() > 1 {
        return Err(invalid(
            "campaign defines a sweep; run it with `xrtraffic sweep`",
        ));
    }
    let warnings: BTreeSet<String> = campaign
        .points
        .iter()
        .flat_map(|p| p.flows.iter().flat_map(|f| f.stream.warnings()))
        .map(|w| w.to_string())
        .collect();
    for w in warnings {
        eprintln!("{w}");
    }

    let results = sweep(&campaign.points, &campaign.seeds).map_err(invalid)?;
    fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("cannot create {}", a.out_dir.display()))?;
    write_atomic(
        &a.out_dir.join("results.csv"),
        results_csv(&campaign, &results).as_bytes(),
    )?;
    write_atomic(
        &a.out_dir.join("summary.json"),
        summary_json(&campaign, &results).as_bytes(),
    )?;

    let mut failed = 0;
    for r in &results {
        let n = r.flows.len().max(1) as f64;
        let delay: f64 = r.flows.iter().map(|f| f.avg_frame_delay_s).sum::<f64>() / n;
        let thr: f64 = r.flows.iter().map(|f| f.avg_throughput_bps).sum::<f64>() / n;
        match &r.status {
            PointStatus::Failed(e) => {
                failed += 1;
                println!("{}={} status=FAILED error={e}", campaign.variable, r.x);
            }
            s => println!(
                "{}={} status={} flows={} mean_throughput_mbps={:.3} mean_delay_ms={:.3}",
                campaign.variable,
                r.x,
                s.label(),
                r.flows.len(),
                thr / 1e6,
                delay * 1e3
            ),
        }
    }
    if failed > 0 {
        anyhow::bail!("{failed} of {} points failed", results.len());
    }
    Ok(())
}

pub fn report(a: ReportArgs) -> anyhow::Result<()> {
    let labels = a.labels.unwrap_or_default();
    if !labels.is_empty() && labels.len() != a.results.len() {
        return Err(invalid(format!(
            "{} labels given for {} results files",
            labels.len(),
            a.results.len()
        )));
    }
    let mut variable: Option<String> = None;
    let mut series = Vec::new();
    for (i, path) in a.results.iter().enumerate() {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let (var, rows) = parse_results_csv(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        match &variable {
            Some(v) if *v != var => {
                return Err(invalid(format!(
                    "{} sweeps '{var}' but earlier files sweep '{v}'",
                    path.display()
                )))
            }
            _ => variable = Some(var),
        }
        let label = labels.get(i).cloned().unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("series{i}"))
        });
        series.push((label, rows));
    }
    let out = report_csv(variable.as_deref().unwrap_or("x"), &series);
    write_atomic(&a.out, out.as_bytes())?;
    println!("series={} out={}", series.len(), a.out.display());
    Ok(())
}
