use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use apwt::apwf::{self, ApwfFile, Kind};
use apwt::field::{field_slice, solve_halfplane};
use apwt::lattice::{forward_fourier, sector_mask};
use apwt::sources::{calibrate_frequency, experiment_field, ExperimentConfig};
use apwt::transform::{apwt_grid, dominant_parameters, reconstruct as reconstruct_field, DiagramConfig, FrequencyCalibration, MuSampling};
use apwt::wavelets::{admissibility_constant, QuadratureControl};
use apwt::{BoundarySignal, MotherSpec, Sector};
use apwt_verify::{run_suite, Check, Level, Tamper};

use crate::failure::Failure;
use crate::manifest::{beside, Recorder};
use crate::plot;

pub struct Context {
    pub seed: Option<u64>,
    pub config: Option<PathBuf>,
}

fn load_config<T: DeserializeOwned>(ctx: &Context, rec: &mut Recorder) -> Result<Option<T>, Failure> {
    let Some(path) = &ctx.config else { return Ok(None) };
    let bytes = rec.read(path)?;
    serde_json::from_slice(&bytes).map(Some).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn refuse_config(ctx: &Context, command: &str) -> Result<(), Failure> {
    match &ctx.config {
        Some(p) => Err(Failure::Validation(format!("{command} takes no configuration, got {}", p.display()))),
        None => Ok(()),
    }
}

fn read_apwf(rec: &mut Recorder, path: &Path) -> Result<ApwfFile, Failure> {
    let bytes = rec.read(path)?;
    ApwfFile::read_from(&bytes[..]).map_err(|e| Failure::io(path, e))
}

/// Boundary data from a SIGNAL or FIELD file.
fn read_signal(rec: &mut Recorder, path: &Path) -> Result<BoundarySignal, Failure> {
    let file = read_apwf(rec, path)?;
    match file.kind {
        Kind::Signal => Ok(apwf::decode_signal(&file)?),
        Kind::Field => {
            let (y, _, signal) = apwf::decode_field(&file)?;
            if y != 0.0 {
                warn!("{} holds the field at y = {y}; treating it as boundary data", path.display());
            }
            Ok(signal)
        }
        other => Err(Failure::Validation(format!("{}: expected a SIGNAL or FIELD file, found {other}", path.display()))),
    }
}

fn encode(file: &ApwfFile) -> Vec<u8> {
    let mut out = Vec::new();
    file.write_to(&mut out).expect("writing to memory");
    out
}

pub fn gen_sources(ctx: &Context, out: &Path) -> Result<(), Failure> {
    let mut rec = Recorder::new("gen-sources", &(), ctx.seed);
    let mut config: ExperimentConfig = load_config(ctx, &mut rec)?.unwrap_or_else(ExperimentConfig::six_groups);
    if let Some(seed) = ctx.seed {
        config.seed = seed;
    }
    let field = experiment_field(&config)?;
    info!("{} sources on a {:?} grid", field.sources.len(), field.signal.grid().shape());
    let mut rec = rec.with_config(&config);
    rec.write(out, &encode(&apwf::encode_field(0.0, None, field.signal.grid(), field.signal.values())))?;
    rec.detail("sources", &field.sources);
    rec.detail("redraws", field.redraws);
    rec.finish(&beside(out))?;
    Ok(())
}

/// Mother and `(φ, a)` lattice for `transform`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    pub mother: MotherSpec,
    /// Defaults to the production lattice around the signal's dominant scale.
    #[serde(default)]
    pub sampling: Option<MuSampling>,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self { mother: MotherSpec::new(Sector::D1, 4.0, 1.0, 2.0).expect("valid mother"), sampling: None }
    }
}

pub fn transform(ctx: &Context, input: &Path, out: &Path, max_bytes: u64) -> Result<(), Failure> {
    let mut rec = Recorder::new("transform", &(), ctx.seed);
    let mut config: TransformConfig = load_config(ctx, &mut rec)?.unwrap_or_default();
    let f = read_signal(&mut rec, input)?;
    let sampling = match config.sampling {
        Some(s) => s,
        None => MuSampling::production(dominant_parameters(&forward_fourier(&f), &config.mother)?.0)?,
    };
    config.sampling = Some(sampling);
    let (nt, nx) = f.grid().shape();
    let bytes = (sampling.len() * nt * nx * 16) as u64;
    if bytes > max_bytes {
        return Err(Failure::Validation(format!(
            "coefficient grid needs {bytes} bytes, above --max-bytes {max_bytes}; coarsen the sampling"
        )));
    }
    let coeffs = apwt_grid(&f, &config.mother, &sampling)?;
    let mut rec = rec.with_config(&config);
    rec.write(out, &encode(&apwf::encode_coefficients(&coeffs)))?;
    rec.finish(&beside(out))?;
    Ok(())
}

#[derive(Serialize)]
struct DiagramRun<'a> {
    wavelet: &'a DiagramConfig,
    c: f64,
    calibrate: bool,
}

pub fn diagram(ctx: &Context, input: &Path, out_dir: &Path, c: f64, calibrate: bool) -> Result<(), Failure> {
    let mut rec = Recorder::new("diagram", &(), ctx.seed);
    let config: DiagramConfig = load_config(ctx, &mut rec)?.unwrap_or_else(DiagramConfig::moving_source);
    config.validate()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Failure::Validation(format!("--c must be positive, got {c}")));
    }
    let f = read_signal(&mut rec, input)?;
    let d = config.diagram(&forward_fourier(&f))?;
    let calibration = if calibrate && config.mother.sector == Sector::D1 {
        calibrate_frequency(&config.mother, f.grid(), c)?
    } else {
        FrequencyCalibration::nominal(&config.mother, c)
    };
    let peaks = config.dominant_peaks(&d, &calibration)?;
    if d.max() <= 0.0 {
        warn!("the diagram is identically zero; no peaks reported");
    }
    let mut rec = rec.with_config(&DiagramRun { wavelet: &config, c, calibrate });
    let (pgm, scaling) = plot::diagram_pgm(&d);
    rec.write(&out_dir.join("diagram.csv"), &plot::diagram_csv(&d))?;
    rec.write(&out_dir.join("diagram.pgm"), &pgm)?;
    rec.write(&out_dir.join("peaks.csv"), &plot::peaks_csv(&peaks))?;
    rec.detail("heatmap_scaling", scaling);
    rec.detail("calibration", calibration);
    rec.detail("peaks", peaks.len());
    rec.finish(&out_dir.join("manifest.json"))?;
    Ok(())
}

#[derive(Serialize)]
struct ReconstructRun {
    y: f64,
}

pub fn reconstruct(ctx: &Context, input: &Path, y: f64, out: &Path, reference: Option<&Path>) -> Result<(), Failure> {
    refuse_config(ctx, "reconstruct")?;
    let mut rec = Recorder::new("reconstruct", &ReconstructRun { y }, ctx.seed);
    let file = read_apwf(&mut rec, input)?;
    if file.kind != Kind::Coeff4d {
        return Err(Failure::Validation(format!("{}: expected a COEFF4D file, found {}", input.display(), file.kind)));
    }
    let coeffs = apwf::decode_coefficients(&file)?;
    let spec = coeffs.mother;
    let c = admissibility_constant(&spec, &QuadratureControl::default())?;
    let u = reconstruct_field(&coeffs, &spec, &c, y, &coeffs.b_grid)?;
    if let Some(path) = reference {
        let f = read_signal(&mut rec, path)?;
        let target = field_slice(&sector_mask(&forward_fourier(&f), spec.sector), spec.sector, y)?.to_signal()?;
        let error = u.relative_l2_error(&target)?;
        info!("relative L2 error against {}: {error:.3e}", path.display());
        rec.detail("relative_l2_error", error);
    }
    rec.detail("admissibility_constant", c);
    rec.write(out, &encode(&apwf::encode_field(y, Some(spec.sector), u.grid(), u.values())))?;
    rec.finish(&beside(out))?;
    Ok(())
}

#[derive(Serialize)]
struct PropagateRun<'a> {
    y: &'a [f64],
}

#[derive(Serialize)]
struct LevelNorms {
    y: f64,
    sector_norm_sq: [f64; 4],
}

/// Writes `y{i}_d{j}.apwf` per sector and `y{i}_total.apwf` for the `i`-th height.
pub fn propagate(ctx: &Context, input: &Path, ys: &[f64], out_dir: &Path) -> Result<(), Failure> {
    refuse_config(ctx, "propagate")?;
    if let Some(y) = ys.iter().find(|y| !(**y >= 0.0 && y.is_finite())) {
        return Err(Failure::Validation(format!("heights must be finite and nonnegative, got {y}")));
    }
    let mut rec = Recorder::new("propagate", &PropagateRun { y: ys }, ctx.seed);
    let f = read_signal(&mut rec, input)?;
    let levels = solve_halfplane(&f, ys)?;
    let mut norms = Vec::new();
    for (i, level) in levels.iter().enumerate() {
        for slice in &level.slices {
            let name = format!("y{i}_d{}.apwf", slice.sector.index());
            rec.write(&out_dir.join(name), &encode(&apwf::encode_field_slice(slice)))?;
        }
        let total = apwf::encode_field(level.y, None, f.grid(), &level.total());
        rec.write(&out_dir.join(format!("y{i}_total.apwf")), &encode(&total))?;
        norms.push(LevelNorms { y: level.y, sector_norm_sq: level.slices.each_ref().map(|s| s.norm_sq()) });
    }
    rec.detail("levels", norms);
    rec.finish(&out_dir.join("manifest.json"))?;
    Ok(())
}

#[derive(Serialize)]
struct SelfcheckReport {
    level: Level,
    passed: bool,
    checks: Vec<Check>,
}

pub fn selfcheck(ctx: &Context, level: Level, report: Option<&Path>, tamper: Option<f64>) -> Result<(), Failure> {
    refuse_config(ctx, "selfcheck")?;
    let tamper = Tamper { mother_normalization: tamper };
    let checks = run_suite(level, tamper, |c| eprintln!("{c}"));
    let failed: Vec<u8> = checks.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    let summary = SelfcheckReport { level, passed: failed.is_empty(), checks };
    let mut text = serde_json::to_vec_pretty(&summary).expect("report serializes");
    text.push(b'\n');
    match report {
        Some(path) => {
            let mut rec = Recorder::new("selfcheck", &level, ctx.seed);
            rec.detail("tamper", tamper.mother_normalization);
            rec.write(path, &text)?;
            rec.finish(&beside(path))?;
        }
        None => print!("{}", String::from_utf8(text).expect("JSON is UTF-8")),
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("criteria {failed:?} did not pass")))
    }
}
