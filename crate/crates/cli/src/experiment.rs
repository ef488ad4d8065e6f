//! Experiment orchestration: generate, simulate, decode, analyze, and write
//! the output bundle (config echo, JSONL shots, CSV summaries, Markdown
//! report). All files carry the config hash; writes go through a temp file
//! rename so partially written outputs never look complete.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde_json::json;
use thiserror::Error;

use zqsim::analysis::{self, fit_exponential_decay};
use zqsim::circuit::{to_text, Circuit, ZoneKind, ZoneLayout};
use zqsim::decoder;
use zqsim::engine::noise::NoiseModel;
use zqsim::engine::record::ShotRecord;
use zqsim::engine::run_batch;
use zqsim::lindblad::{self, integrate::StepControl};
use zqsim::logistics::{self, ZoneOccupancy};
use zqsim::qec::meta::CircuitMeta;
use zqsim::qec::ramsey::RamseySpec;
use zqsim::qec::{distill, gerb, ramsey, repcode};
use zqsim::rng::ShotRng;

use crate::config::{config_hash, ExperimentConfig, ExperimentKind};

#[derive(Debug, Error)]
pub enum RunError {
    /// Invalid configuration → exit code 2.
    #[error("invalid config: {0}")]
    Config(String),
    /// Structural simulation error → exit code 3.
    #[error("simulation structural error: {0}")]
    Structural(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Structural(_) => 3,
            RunError::Other(_) => 1,
        }
    }
}

/// Key quantities of a finished run, for tests and terminal output.
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub config_hash: String,
    pub shots: u64,
    pub logical_failure_rate: Option<f64>,
    pub mean_attempts: Option<f64>,
    pub fill_fraction_ok: Option<f64>,
}

struct Bundle {
    out_dir: PathBuf,
    hash: String,
}

impl Bundle {
    fn new(cfg: &ExperimentConfig, base: &Path) -> Result<Bundle> {
        let out_dir = base.join(&cfg.out_dir);
        fs::create_dir_all(&out_dir)
            .with_context(|| format!("creating {}", out_dir.display()))?;
        let echo = cfg.echo_toml();
        let hash = config_hash(&echo);
        let b = Bundle { out_dir, hash };
        b.write("config.toml", &echo)?;
        Ok(b)
    }

    /// Temp-file + rename write.
    fn write(&self, name: &str, content: &str) -> Result<()> {
        let tmp = self.out_dir.join(format!(".{name}.tmp"));
        // config.toml is itself the hashed content; everything else carries
        // the hash inline (checked in the e2e tests).

        let dst = self.out_dir.join(name);
        fs::write(&tmp, content).with_context(|| format!("writing {}", tmp.display()))?;
        fs::rename(&tmp, &dst).with_context(|| format!("renaming to {}", dst.display()))?;
        Ok(())
    }

    fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> Result<()> {
        let mut s = format!("# config_hash={}\n{header}\n", self.hash);
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        self.write(name, &s)
    }

    fn write_shots(&self, name: &str, kind: &str, records: &[ShotRecord]) -> Result<()> {
        let mut s = String::new();
        s.push_str(
            &json!({"schema": 1, "kind": kind, "config_hash": self.hash}).to_string(),
        );
        s.push('\n');
        for rec in records {
            s.push_str(&serde_json::to_string(rec)?);
            s.push('\n');
        }
        self.write(name, &s)
    }

    fn write_circuit(&self, circuit: &Circuit, meta: &CircuitMeta, suffix: &str) -> Result<()> {
        let text = format!("# config_hash={}
{}", self.hash, to_text(circuit));
        self.write(&format!("circuit{suffix}.txt"), &text)?;
        let mut value: serde_json::Value = serde_json::from_str(&meta.to_json())?;
        value["config_hash"] = serde_json::Value::String(self.hash.clone());
        self.write(&format!("meta{suffix}.json"), &serde_json::to_string_pretty(&value)?)
    }
}

fn validated(circuit: Circuit) -> Result<Circuit, RunError> {
    let report = circuit.validate();
    if !report.is_ok() {
        return Err(RunError::Structural(report.to_string()));
    }
    Ok(circuit)
}

/// Runs one experiment end to end. `base` anchors relative paths.
pub fn run_experiment(cfg: &ExperimentConfig, base: &Path) -> Result<RunSummary, RunError> {
    cfg.validate().map_err(|e| RunError::Config(e.to_string()))?;
    if cfg.threads > 0 {
        // Results are seed-derived per shot, so the pool size never changes
        // outputs; ignore failure when a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    let noise = cfg.load_noise(base).map_err(|e| RunError::Config(e.to_string()))?;
    noise.validate().map_err(|e| RunError::Config(e.to_string()))?;
    let bundle = Bundle::new(cfg, base).map_err(RunError::Other)?;
    bundle
        .write("noise.toml", &format!("# config_hash={}
{}", bundle.hash, noise.to_toml()))
        .map_err(RunError::Other)?;

    let mut summary = RunSummary {
        out_dir: bundle.out_dir.clone(),
        config_hash: bundle.hash.clone(),
        shots: cfg.shots,
        ..Default::default()
    };

    match cfg.kind {
        ExperimentKind::Repcode => run_repcode(cfg, &noise, &bundle, &mut summary)?,
        ExperimentKind::Distill => run_distill(cfg, &noise, &bundle, &mut summary)?,
        ExperimentKind::Gerb => run_gerb(cfg, &noise, &bundle, &mut summary)?,
        ExperimentKind::RamseyMcm => run_ramsey(cfg, &noise, &bundle, &mut summary)?,
        ExperimentKind::Replenish => run_replenish(cfg, &noise, &bundle, &mut summary)?,
        ExperimentKind::LeakageMap => run_leakage_map(cfg, &bundle)?,
    }
    Ok(summary)
}

fn run_repcode(
    cfg: &ExperimentConfig,
    noise: &NoiseModel,
    bundle: &Bundle,
    summary: &mut RunSummary,
) -> Result<(), RunError> {
    let spec = cfg.repcode_spec();
    let (circuit, meta) =
        repcode::gen_walking_repcode(&spec).map_err(|e| RunError::Config(e.to_string()))?;
    let circuit = validated(circuit)?;
    let rep = meta.repcode.clone().expect("repcode meta");
    bundle.write_circuit(&circuit, &meta, "")?;
    if cfg.shots == 0 {
        return Ok(());
    }

    let records = run_batch(&circuit, noise, cfg.shots, cfg.base_seed)
        .map_err(|e| RunError::Structural(e.to_string()))?;
    bundle.write_shots("shots.jsonl", "repcode", &records)?;

    let graph = decoder::build_matching_graph(&circuit, &rep, noise)
        .map_err(|e| RunError::Structural(e.to_string()))?;
    bundle.write("matching_graph.txt", &format!("# config_hash={}\n{}", bundle.hash, graph.to_text()))?;
    let stats = decoder::logical_failure_rate(&records, &rep, &graph)
        .map_err(|e| RunError::Structural(e.to_string()))?;
    summary.logical_failure_rate = Some(stats.rate);

    let det_records: Vec<_> = records
        .iter()
        .map(|r| decoder::extract_detectors(r, &rep))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| RunError::Structural(e.to_string()))?;
    let freqs = analysis::detection_frequency(&det_records, cfg.base_seed ^ BOOTSTRAP_SALT)
        .map_err(|e| RunError::Structural(e.to_string()))?;

    bundle.write_csv(
        "detection_frequency.csv",
        "cycle,mean,std,detectors_per_shot",
        &freqs
            .iter()
            .map(|f| format!("{},{:.6e},{:.6e},{}", f.cycle, f.mean, f.std, f.detectors_per_shot))
            .collect::<Vec<_>>(),
    )?;
    bundle.write_csv(
        "summary.csv",
        "distance,cycles,phase_sensitive,shots,failures,rate,wilson_lo,wilson_hi",
        &[format!(
            "{},{},{},{},{},{:.6e},{:.6e},{:.6e}",
            spec.distance,
            spec.cycles,
            spec.phase_sensitive,
            stats.shots,
            stats.failures,
            stats.rate,
            stats.wilson_95.0,
            stats.wilson_95.1
        )],
    )?;

    let mut md = String::new();
    writeln!(md, "# Walking repetition code run\n").ok();
    writeln!(md, "config hash: `{}`\n", bundle.hash).ok();
    writeln!(
        md,
        "- distance {}, {} cycles, phase-{}",
        spec.distance,
        spec.cycles,
        if spec.phase_sensitive { "sensitive" } else { "insensitive" }
    )
    .ok();
    writeln!(
        md,
        "- logical failures: {} / {} = {:.3e} (Wilson 95% [{:.3e}, {:.3e}])",
        stats.failures, stats.shots, stats.rate, stats.wilson_95.0, stats.wilson_95.1
    )
    .ok();
    let bulk: Vec<f64> = freqs
        .iter()
        .filter(|f| f.cycle > 0 && f.cycle < spec.cycles)
        .map(|f| f.mean)
        .collect();
    if !bulk.is_empty() {
        writeln!(md, "- mean bulk detection frequency: {:.4}", mean(&bulk)).ok();
    }
    bundle.write("report.md", &md)?;
    Ok(())
}

/// Decouples the analysis bootstrap stream from the shot seed stream.
const BOOTSTRAP_SALT: u64 = 0xb001;

fn run_distill(
    cfg: &ExperimentConfig,
    noise: &NoiseModel,
    bundle: &Bundle,
    summary: &mut RunSummary,
) -> Result<(), RunError> {
    let spec = cfg.distill_spec().map_err(|e| RunError::Config(e.to_string()))?;
    let (circuit, meta) =
        distill::gen_distillation(&spec).map_err(|e| RunError::Config(e.to_string()))?;
    let circuit = validated(circuit)?;
    let dmeta = meta.distill.clone().expect("distill meta");
    bundle.write_circuit(&circuit, &meta, "")?;
    if cfg.shots == 0 {
        return Ok(());
    }

    let records = run_batch(&circuit, noise, cfg.shots, cfg.base_seed)
        .map_err(|e| RunError::Structural(e.to_string()))?;
    bundle.write_shots("shots.jsonl", "distill", &records)?;

    let hist = analysis::retry_histogram(&records)
        .map_err(|e| RunError::Structural(e.to_string()))?;
    let post = distill::tally(&records, &dmeta);
    let pre = distill::tally_preherald(&records, &dmeta);
    summary.mean_attempts = Some(hist.mean_attempts);

    bundle.write_csv(
        "retry_histogram.csv",
        "retries,count",
        &hist
            .counts
            .iter()
            .enumerate()
            .map(|(r, c)| format!("{r},{c}"))
            .collect::<Vec<_>>(),
    )?;
    bundle.write_csv(
        "summary.csv",
        "basis,encoded,shots,herald_exhausted,successes,failures,uncorrectable,mean_attempts,pre_failures,pre_successes,pre_uncorrectable",
        &[format!(
            "{},{},{},{},{},{},{},{:.4},{},{},{}",
            dmeta.basis.as_str(),
            dmeta.encoded,
            post.shots,
            post.herald_exhausted,
            post.successes,
            post.failures,
            post.uncorrectable,
            hist.mean_attempts,
            pre.failures,
            pre.successes,
            pre.uncorrectable
        )],
    )?;

    let mut md = String::new();
    writeln!(md, "# Heralded Bell distillation run\n").ok();
    writeln!(md, "config hash: `{}`\n", bundle.hash).ok();
    writeln!(
        md,
        "- {} blocks, basis {}, mean attempts {:.3} (mean retries {:.3})",
        if dmeta.encoded { "encoded" } else { "unencoded" },
        dmeta.basis.as_str(),
        hist.mean_attempts,
        hist.mean_retries
    )
    .ok();
    writeln!(
        md,
        "- post-herald: {} failures / {} kept ({} uncorrectable excluded)",
        post.failures,
        post.failures + post.successes,
        post.uncorrectable
    )
    .ok();
    writeln!(
        md,
        "- pre-herald (rejected attempts, computational basis): {} failures / {} readouts",
        pre.failures,
        pre.failures + pre.successes
    )
    .ok();
    writeln!(md, "\n## Retry histogram\n").ok();
    for (r, c) in hist.counts.iter().enumerate() {
        writeln!(md, "- {r} retries: {c}").ok();
    }
    bundle.write("report.md", &md)?;
    Ok(())
}

fn run_gerb(
    cfg: &ExperimentConfig,
    noise: &NoiseModel,
    bundle: &Bundle,
    _summary: &mut RunSummary,
) -> Result<(), RunError> {
    let spec = cfg.gerb_spec();
    let (circuit, meta) = gerb::gen_gerb(&spec).map_err(|e| RunError::Config(e.to_string()))?;
    let circuit = validated(circuit)?;
    let gmeta = meta.gerb.clone().expect("gerb meta");
    bundle.write_circuit(&circuit, &meta, "")?;
    if cfg.shots == 0 {
        return Ok(());
    }
    let records = run_batch(&circuit, noise, cfg.shots, cfg.base_seed)
        .map_err(|e| RunError::Structural(e.to_string()))?;
    bundle.write_shots("shots.jsonl", "gerb", &records)?;
    let t = gerb::tally(&records, &gmeta);
    bundle.write_csv(
        "summary.csv",
        "n_blocks,pairs,shots,success_probability,survival_probability,success_given_survival",
        &[format!(
            "{},{},{},{:.6},{:.6},{:.6}",
            spec.n_blocks,
            spec.pair_count,
            cfg.shots,
            t.total_success_probability,
            t.survival_probability,
            t.success_given_survival
        )],
    )?;
    let mut md = String::new();
    writeln!(md, "# Global-echo randomized benchmarking run\n").ok();
    writeln!(md, "config hash: `{}`\n", bundle.hash).ok();
    writeln!(
        md,
        "- {} blocks on {} pairs: success {:.4}, survival {:.4}, success|survival {:.4}",
        spec.n_blocks,
        spec.pair_count,
        t.total_success_probability,
        t.survival_probability,
        t.success_given_survival
    )
    .ok();
    bundle.write("report.md", &md)?;
    Ok(())
}

fn run_ramsey(
    cfg: &ExperimentConfig,
    noise: &NoiseModel,
    bundle: &Bundle,
    _summary: &mut RunSummary,
) -> Result<(), RunError> {
    let section = cfg.ramsey.as_ref().expect("validated");
    let mut phases = Vec::new();
    for _ in 0..section.replicas.max(1) {
        phases.extend(section.phases.iter().copied());
    }
    let mut rows = Vec::new();
    let mut xs = Vec::new();
    let mut survivals = Vec::new();
    let mut contrasts = Vec::new();
    for (i, &n) in section.cycle_counts.iter().enumerate() {
        let spec = RamseySpec {
            n_mcm_cycles: n,
            include_light: section.include_light,
            phase_scan: phases.clone(),
            block_ms: section.block_ms,
        };
        let (circuit, meta) =
            ramsey::gen_ramsey_mcm(&spec).map_err(|e| RunError::Config(e.to_string()))?;
        let circuit = validated(circuit)?;
        let rmeta = meta.ramsey.clone().expect("ramsey meta");
        if i == 0 {
            bundle.write_circuit(&circuit, &meta, "_first")?;
        }
        if cfg.shots == 0 {
            continue;
        }
        let records = run_batch(&circuit, noise, cfg.shots, cfg.base_seed.wrapping_add(n as u64))
            .map_err(|e| RunError::Structural(e.to_string()))?;
        let t = ramsey::tally(&records, &rmeta);
        rows.push(format!("{n},{:.6},{:.6}", t.survival, t.contrast));
        xs.push(n as f64);
        survivals.push(t.survival);
        contrasts.push(t.contrast);
    }
    bundle.write_csv("ramsey.csv", "mcm_cycles,survival,contrast", &rows)?;

    let mut md = String::new();
    writeln!(md, "# Ramsey with interleaved MCM cycles\n").ok();
    writeln!(md, "config hash: `{}`\n", bundle.hash).ok();
    writeln!(md, "light {}.\n", if section.include_light { "on" } else { "off" }).ok();
    if xs.len() >= 3 {
        if let Ok(fit) = fit_exponential_decay(&xs, &survivals) {
            writeln!(
                md,
                "- per-cycle register loss: {:.5} ± {:.5}",
                fit.params[1], fit.errors[1]
            )
            .ok();
        }
        if let Ok(fit) = fit_exponential_decay(&xs, &contrasts) {
            writeln!(
                md,
                "- per-cycle contrast loss: {:.5} ± {:.5}",
                fit.params[1], fit.errors[1]
            )
            .ok();
        }
    }
    bundle.write("report.md", &md)?;
    Ok(())
}

fn run_replenish(
    cfg: &ExperimentConfig,
    noise: &NoiseModel,
    bundle: &Bundle,
    summary: &mut RunSummary,
) -> Result<(), RunError> {
    let section = cfg.replenish.as_ref().expect("validated");
    let layout = ZoneLayout::default();
    let sz_cap = layout.zone(ZoneKind::Sz).capacity;
    if section.sz_vacancies > sz_cap {
        return Err(RunError::Config(format!(
            "sz_vacancies {} exceeds storage capacity {sz_cap}",
            section.sz_vacancies
        )));
    }
    let mut ok = 0u64;
    let mut fill_sum = 0.0;
    let mut duration_sum = 0.0;
    let mut rows = Vec::new();
    for trial in 0..section.trials {
        let mut occ = ZoneOccupancy::empty(layout.clone());
        for i in 0..(sz_cap - section.sz_vacancies) {
            occ.set(zqsim::circuit::Site::new(ZoneKind::Sz, i), true);
        }
        let mut rng = ShotRng::from_seed(zqsim::rng::derive_seed(cfg.base_seed, trial as u64));
        let report = logistics::replenish(&mut occ, noise, &mut rng);
        ok += (report.fill_fraction > logistics::SZ_FILL_TARGET) as u64;
        fill_sum += report.fill_fraction;
        duration_sum += report.sequence.total_ms;
        if trial < 50 {
            rows.push(format!(
                "{trial},{},{:.4},{:.1},{}",
                report.passes, report.fill_fraction, report.sequence.total_ms, report.partial
            ));
        }
    }
    let n = section.trials.max(1) as f64;
    let frac_ok = ok as f64 / n;
    summary.fill_fraction_ok = Some(frac_ok);
    bundle.write_csv("replenish_trials.csv", "trial,passes,fill_fraction,total_ms,partial", &rows)?;
    bundle.write_csv(
        "summary.csv",
        "trials,target_fill,frac_above_target,mean_fill,mean_duration_ms",
        &[format!(
            "{},{},{:.5},{:.5},{:.1}",
            section.trials,
            logistics::SZ_FILL_TARGET,
            frac_ok,
            fill_sum / n,
            duration_sum / n
        )],
    )?;
    let mut md = String::new();
    writeln!(md, "# Reservoir replenishment trials\n").ok();
    writeln!(md, "config hash: `{}`\n", bundle.hash).ok();
    writeln!(
        md,
        "- {} trials, {} storage vacancies: {:.2}% reach fill > {:.0}% (mean fill {:.3})",
        section.trials,
        section.sz_vacancies,
        100.0 * frac_ok,
        100.0 * logistics::SZ_FILL_TARGET,
        fill_sum / n
    )
    .ok();
    bundle.write("report.md", &md)?;
    Ok(())
}

fn run_leakage_map(cfg: &ExperimentConfig, bundle: &Bundle) -> Result<(), RunError> {
    let section = cfg.leakage_map.as_ref().expect("validated");
    let grid = |(a, b, n): (f64, f64, usize)| -> Vec<f64> {
        if n <= 1 {
            return vec![a];
        }
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    };
    let d_regs = grid(section.register_detuning);
    let d_imgs = grid(section.imaging_detuning);
    let scale = section.scale;
    let omega_img = section.imaging_rabi;
    let ctrl = StepControl { n_outputs: 2, ..StepControl::default() };
    let map = lindblad::leakage_map(
        |dr, di| lindblad::hiding::system(dr, di, omega_img, scale),
        &d_regs,
        &d_imgs,
        0,
        section.image_duration,
        &ctrl,
    )
    .map_err(|e| RunError::Structural(e.to_string()))?;

    let mut rows = Vec::new();
    for (i, &dr) in d_regs.iter().enumerate() {
        for (j, &di) in d_imgs.iter().enumerate() {
            rows.push(format!("{dr:.6e},{di:.6e},{:.6e}", map[i][j]));
        }
    }
    bundle.write_csv("leakage_map.csv", "register_detuning,imaging_detuning,loss", &rows)?;
    let mut md = String::new();
    writeln!(md, "# Per-image leakage map\n").ok();
    writeln!(md, "config hash: `{}`\n", bundle.hash).ok();
    writeln!(
        md,
        "- {}×{} grid, image duration {} (scale {scale})",
        d_regs.len(),
        d_imgs.len(),
        section.image_duration
    )
    .ok();
    let flat_max = map
        .iter()
        .flat_map(|r| r.iter().copied())
        .fold(0.0f64, f64::max);
    writeln!(md, "- peak per-image loss on grid: {flat_max:.3e}").ok();
    bundle.write("report.md", &md)?;
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Decode an existing shots file against a circuit/meta/noise triple.
pub fn decode_bundle(dir: &Path) -> Result<decoder::FailureStats> {
    let circuit = zqsim::circuit::from_text(
        &fs::read_to_string(dir.join("circuit.txt")).context("reading circuit.txt")?,
    )
    .map_err(|e| anyhow!("{e}"))?;
    let meta = CircuitMeta::from_json(
        &fs::read_to_string(dir.join("meta.json")).context("reading meta.json")?,
    )?;
    let rep = meta.repcode.ok_or_else(|| anyhow!("meta.json is not a repcode sidecar"))?;
    let noise = NoiseModel::from_toml(
        &fs::read_to_string(dir.join("noise.toml")).context("reading noise.toml")?,
    )?;
    let records = read_shots(&dir.join("shots.jsonl"))?;
    let graph = decoder::build_matching_graph(&circuit, &rep, &noise)
        .map_err(|e| anyhow!("{e}"))?;
    decoder::logical_failure_rate(&records, &rep, &graph).map_err(|e| anyhow!("{e}"))
}

/// Recompute analysis summaries for an existing repcode shots file.
pub fn analyze_bundle(dir: &Path) -> Result<Vec<analysis::CycleFrequency>> {
    let meta = CircuitMeta::from_json(
        &fs::read_to_string(dir.join("meta.json")).context("reading meta.json")?,
    )?;
    let rep = meta.repcode.ok_or_else(|| anyhow!("meta.json is not a repcode sidecar"))?;
    let records = read_shots(&dir.join("shots.jsonl"))?;
    let det_records: Vec<_> = records
        .iter()
        .map(|r| decoder::extract_detectors(r, &rep))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| anyhow!("{e}"))?;
    analysis::detection_frequency(&det_records, 0xb001).map_err(|e| anyhow!("{e}"))
}

pub fn read_shots(path: &Path) -> Result<Vec<ShotRecord>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if i == 0 && line.contains("\"schema\"") {
            continue; // header line
        }
        out.push(serde_json::from_str(line).with_context(|| format!("shots line {}", i + 1))?);
    }
    Ok(out)
}
