//! End-to-end analysis runs: ingest, detrend, stationarity report, EMD
//! first-IMF spectrum, denoise, SSA scree, standardize, wavelet scalogram,
//! then cross-wavelet and coherence per configured pair. Every artifact is
//! written under the output directory and listed in a JSON manifest with its
//! SHA-256 digest; identical config and seed give byte-identical manifests.

use crate::detrend::{DetrendConfig, DetrendMethod};
use crate::emd;
use crate::error::{Error, Result};
use crate::ingest::{annualize, parse_csv, AnnualSeries, ColumnSchema, MeanPolicy};
use crate::rng::SeededStream;
use crate::series::standardize;
use crate::spectral::periodogram;
use crate::ssa;
use crate::stattests::{adf_test, kpss_test, ModelVariant, TestReport};
use crate::svgplot::{emit_svg_heatmap, Overlays};
use crate::wavelet::{coi_mask, cwt_morlet_at, fourier_period, ScaleGrid, Scalogram};
use crate::xwavelet::{coherence, cross_wavelet, SmoothSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Environment variable that overrides the configured seed.
pub const SEED_ENV_VAR: &str = "ANNULI_SEED";

/// One input series of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub label: String,
    pub path: String,
    /// Schema name: "plain", "fao" or "silso".
    pub schema: String,
    #[serde(default)]
    pub unit: String,
    /// Skip first-IMF removal for this series even when denoise = "emd"
    /// (for series whose first component carries the main oscillation).
    #[serde(default)]
    pub skip_first_imf: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetrendSection {
    /// "spline" or "friedman".
    #[serde(default = "default_detrend_method")]
    pub method: String,
    #[serde(default = "default_stiffness")]
    pub stiffness: f64,
    #[serde(default)]
    pub bass: f64,
}

fn default_detrend_method() -> String {
    "spline".into()
}

fn default_stiffness() -> f64 {
    crate::detrend::DEFAULT_STIFFNESS
}

impl Default for DetrendSection {
    fn default() -> Self {
        DetrendSection {
            method: default_detrend_method(),
            stiffness: default_stiffness(),
            bass: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenoiseSection {
    /// "emd", "ssa" or "none".
    #[serde(default = "default_denoise_method")]
    pub method: String,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// SSA window; defaults to min(N/2, 25).
    #[serde(default)]
    pub ssa_window: Option<usize>,
    #[serde(default = "default_ssa_threshold")]
    pub ssa_threshold: f64,
}

fn default_denoise_method() -> String {
    "emd".into()
}

fn default_epsilon() -> f64 {
    emd::DEFAULT_EPSILON
}

fn default_ssa_threshold() -> f64 {
    0.05
}

impl Default for DenoiseSection {
    fn default() -> Self {
        DenoiseSection {
            method: default_denoise_method(),
            epsilon: default_epsilon(),
            ssa_window: None,
            ssa_threshold: default_ssa_threshold(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveletSection {
    #[serde(default = "default_s0")]
    pub s0: f64,
    #[serde(default = "default_dj")]
    pub dj: f64,
    /// Number of scales; defaults to reaching N/2.
    #[serde(default)]
    pub n_scales: Option<usize>,
    #[serde(default = "default_omega0")]
    pub omega0: f64,
}

fn default_s0() -> f64 {
    crate::wavelet::DEFAULT_S0
}

fn default_dj() -> f64 {
    crate::wavelet::DEFAULT_DJ
}

fn default_omega0() -> f64 {
    crate::wavelet::DEFAULT_OMEGA0
}

impl Default for WaveletSection {
    fn default() -> Self {
        WaveletSection {
            s0: default_s0(),
            dj: default_dj(),
            n_scales: None,
            omega0: default_omega0(),
        }
    }
}

/// Flat JSON run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub series: Vec<SeriesConfig>,
    #[serde(default)]
    pub detrend: DetrendSection,
    #[serde(default)]
    pub denoise: DenoiseSection,
    #[serde(default)]
    pub wavelet: WaveletSection,
    /// Pairs of series labels for cross-wavelet and coherence analysis.
    #[serde(default)]
    pub pairs: Vec<(String, String)>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub out_dir: String,
}

fn default_seed() -> u64 {
    42
}

/// Manifest of a completed run: effective config, seed, inputs and every
/// artifact with its SHA-256 digest. Paths are relative to the output
/// directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub seed: u64,
    pub inputs: Vec<InputRecord>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputRecord {
    pub label: String,
    pub path: String,
    pub sha256: String,
}

/// A pipeline failure carries the stage where it happened.
#[derive(Debug, Clone, PartialEq)]
pub struct StageError {
    pub stage: String,
    pub error: Error,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "stage {}: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

// Tracks written artifacts so a failed run can remove its partial outputs.
struct ArtifactSink {
    root: PathBuf,
    written: Vec<PathBuf>,
    outputs: BTreeMap<String, String>,
}

impl ArtifactSink {
    fn new(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(ArtifactSink {
            root: root.to_path_buf(),
            written: Vec::new(),
            outputs: BTreeMap::new(),
        })
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        self.written.push(path);
        self.outputs.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    fn rollback(&self) {
        for path in &self.written {
            let _ = std::fs::remove_file(path);
        }
    }
}

fn fmt_float(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

fn decomposition_csv(d: &crate::series::Decomposition) -> String {
    let mut out = String::from("year,value,trend,cycle,noise\n");
    for (i, year) in d.source().years().enumerate() {
        out.push_str(&format!(
            "{year},{},{},{},{}\n",
            fmt_float(d.source().values()[i]),
            fmt_float(d.trend()[i]),
            fmt_float(d.cycle()[i]),
            fmt_float(d.noise()[i])
        ));
    }
    out
}

fn imfs_csv(series: &AnnualSeries, set: &emd::ImfSet) -> String {
    let mut header = String::from("year");
    for j in 1..=set.n_imfs() {
        header.push_str(&format!(",imf{j}"));
    }
    header.push_str(",residual\n");
    let mut out = header;
    for (i, year) in series.years().enumerate() {
        out.push_str(&year.to_string());
        for imf in &set.imfs {
            out.push_str(&format!(",{}", fmt_float(imf[i])));
        }
        out.push_str(&format!(",{}\n", fmt_float(set.residual[i])));
    }
    out
}

fn periodogram_csv(p: &crate::spectral::Periodogram) -> String {
    let mut out = String::from("frequency,period_years,power\n");
    for (f, pw) in p.frequencies.iter().zip(p.power.iter()) {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_float(*f),
            fmt_float(1.0 / f),
            fmt_float(*pw)
        ));
    }
    out
}

fn scree_csv(model: &ssa::SsaModel) -> String {
    let mut out = String::from("component,singular_value,share\n");
    let shares = model.scree();
    for (i, (sv, share)) in model.singular_values.iter().zip(shares.iter()).enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            i + 1,
            fmt_float(*sv),
            fmt_float(*share)
        ));
    }
    out
}

fn scalogram_csv(sc: &Scalogram) -> String {
    let mut out = String::from("year,scale,period_years,power,sig90,sig95,in_coi\n");
    let periods = sc.periods();
    let coi = coi_mask(sc);
    for (j, &scale) in sc.grid.scales.iter().enumerate() {
        for (t, &year) in sc.times.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt_float(year),
                fmt_float(scale),
                fmt_float(periods[j]),
                fmt_float(sc.power[j][t]),
                u8::from(sc.sig90[j][t]),
                u8::from(sc.sig95[j][t]),
                u8::from(coi[j][t])
            ));
        }
    }
    out
}

fn reports_json(reports: &[TestReport]) -> Result<String> {
    serde_json::to_string_pretty(reports)
        .map_err(|e| Error::Io(format!("serializing reports: {e}")))
}

fn stage<T>(name: &str, r: Result<T>) -> std::result::Result<T, StageError> {
    r.map_err(|error| StageError {
        stage: name.to_string(),
        error,
    })
}

/// Execute the full pipeline described by `config`. On failure the partial
/// outputs are removed and the failing stage is named.
pub fn run_pipeline(config: &RunConfig) -> std::result::Result<RunManifest, StageError> {
    let seed = match std::env::var(SEED_ENV_VAR) {
        Ok(v) => stage(
            "config",
            v.parse::<u64>().map_err(|_| {
                Error::Config(format!("{SEED_ENV_VAR} must be an integer, got {v:?}"))
            }),
        )?,
        Err(_) => config.seed,
    };

    let validated = stage("config", validate(config))?;
    let mut sink = stage("setup", ArtifactSink::new(Path::new(&config.out_dir)))?;
    match run_stages(config, &validated, seed, &mut sink) {
        Ok(manifest) => Ok(manifest),
        Err(e) => {
            sink.rollback();
            Err(e)
        }
    }
}

struct Validated {
    schemas: Vec<ColumnSchema>,
    detrend: DetrendConfig,
}

fn validate(config: &RunConfig) -> Result<Validated> {
    if config.series.is_empty() {
        return Err(Error::Config("at least one series is required".into()));
    }
    let mut schemas = Vec::new();
    for s in &config.series {
        if !Path::new(&s.path).exists() {
            return Err(Error::Config(format!("input file not found: {}", s.path)));
        }
        let schema = ColumnSchema::by_name(&s.schema)
            .ok_or_else(|| Error::Config(format!("unknown schema {:?}", s.schema)))?;
        schemas.push(schema);
    }
    let mut labels: Vec<&str> = config.series.iter().map(|s| s.label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() != config.series.len() {
        return Err(Error::Config("series labels must be unique".into()));
    }
    for (a, b) in &config.pairs {
        for label in [a, b] {
            if !config.series.iter().any(|s| &s.label == label) {
                return Err(Error::Config(format!(
                    "pair references unknown series {label:?}"
                )));
            }
        }
    }
    let method = match config.detrend.method.as_str() {
        "spline" => DetrendMethod::Spline,
        "friedman" => DetrendMethod::Friedman,
        other => return Err(Error::Config(format!("unknown detrend method {other:?}"))),
    };
    match config.denoise.method.as_str() {
        "emd" | "ssa" | "none" => {}
        other => return Err(Error::Config(format!("unknown denoise method {other:?}"))),
    }
    Ok(Validated {
        schemas,
        detrend: DetrendConfig {
            method,
            spline_stiffness: config.detrend.stiffness,
            friedman_bass: config.detrend.bass,
        },
    })
}

fn run_stages(
    config: &RunConfig,
    validated: &Validated,
    seed: u64,
    sink: &mut ArtifactSink,
) -> std::result::Result<RunManifest, StageError> {
    let mut inputs = Vec::new();
    let mut scalograms: BTreeMap<String, Scalogram> = BTreeMap::new();
    let mut root_stream = SeededStream::new(seed);

    for (series_cfg, schema) in config.series.iter().zip(validated.schemas.iter()) {
        let label = &series_cfg.label;
        // per-series child stream, reserved for future stochastic stages;
        // keeps artifacts independent of series order in the config
        let _series_stream = root_stream.split();

        let bytes = stage(
            &format!("ingest:{label}"),
            std::fs::read(&series_cfg.path).map_err(|e| Error::Io(e.to_string())),
        )?;
        inputs.push(InputRecord {
            label: label.clone(),
            path: series_cfg.path.clone(),
            sha256: sha256_hex(&bytes),
        });

        let records = stage(&format!("ingest:{label}"), parse_csv(&bytes, schema))?;
        let annual = stage(
            &format!("annualize:{label}"),
            annualize(&records, MeanPolicy::default(), label, &series_cfg.unit),
        )?;

        let decomposition = stage(&format!("detrend:{label}"), validated.detrend.run(&annual))?;
        stage(
            &format!("detrend:{label}"),
            sink.write(
                &format!("{label}/detrend.csv"),
                decomposition_csv(&decomposition).as_bytes(),
            ),
        )?;

        let detrended = stage(
            &format!("detrend:{label}"),
            annual.with_values(
                decomposition.cycle().to_vec(),
                &format!("{label} detrended"),
            ),
        )?;

        // stationarity reports on the detrended series
        let mut reports = Vec::new();
        for (test, variant) in [
            ("kpss", ModelVariant::NoDriftNoTrend),
            ("adf", ModelVariant::NoDriftNoTrend),
        ] {
            let report = stage(
                &format!("tests:{label}"),
                match test {
                    "kpss" => kpss_test(detrended.values(), variant),
                    _ => adf_test(detrended.values(), variant),
                },
            )?;
            reports.push(report);
        }
        let json = stage(&format!("tests:{label}"), reports_json(&reports))?;
        stage(
            &format!("tests:{label}"),
            sink.write(&format!("{label}/stationarity.json"), json.as_bytes()),
        )?;

        // EMD decomposition and the first-IMF spectrum report
        let imf_set = stage(
            &format!("emd:{label}"),
            emd::sift(
                detrended.values(),
                config.denoise.epsilon,
                emd::DEFAULT_MAX_IMFS,
                emd::DEFAULT_MAX_SIFTS,
            ),
        )?;
        stage(
            &format!("emd:{label}"),
            sink.write(
                &format!("{label}/imfs.csv"),
                imfs_csv(&detrended, &imf_set).as_bytes(),
            ),
        )?;
        if !imf_set.imfs.is_empty() {
            let spectrum = stage(&format!("emd:{label}"), periodogram(&imf_set.imfs[0]))?;
            stage(
                &format!("emd:{label}"),
                sink.write(
                    &format!("{label}/imf1_periodogram.csv"),
                    periodogram_csv(&spectrum).as_bytes(),
                ),
            )?;
        }

        // denoise
        let denoised_values: Vec<f64> = match config.denoise.method.as_str() {
            "emd" if !series_cfg.skip_first_imf => {
                let d = stage(
                    &format!("denoise:{label}"),
                    emd::denoise_first_imf(&detrended, config.denoise.epsilon),
                )?;
                d.cycle().to_vec()
            }
            "ssa" => {
                let window = config
                    .denoise
                    .ssa_window
                    .unwrap_or_else(|| ssa::default_window(detrended.len()));
                let d = stage(
                    &format!("denoise:{label}"),
                    ssa::denoise_low_eigen(&detrended, window, config.denoise.ssa_threshold),
                )?;
                d.cycle().to_vec()
            }
            _ => detrended.values().to_vec(),
        };

        // SSA scree on the detrended series
        let window = config
            .denoise
            .ssa_window
            .unwrap_or_else(|| ssa::default_window(detrended.len()));
        let model = stage(
            &format!("ssa:{label}"),
            ssa::embed_decompose(detrended.values(), window),
        )?;
        stage(
            &format!("ssa:{label}"),
            sink.write(
                &format!("{label}/ssa_scree.csv"),
                scree_csv(&model).as_bytes(),
            ),
        )?;

        // standardize and transform
        let standardized = stage(
            &format!("standardize:{label}"),
            standardize(&denoised_values),
        )?;
        let grid = stage(
            &format!("wavelet:{label}"),
            match config.wavelet.n_scales {
                Some(n) => {
                    ScaleGrid::new(config.wavelet.s0, config.wavelet.dj, n, standardized.len())
                }
                None => ScaleGrid::with_resolution(
                    standardized.len(),
                    config.wavelet.s0,
                    config.wavelet.dj,
                ),
            },
        )?;
        let sc = stage(
            &format!("wavelet:{label}"),
            cwt_morlet_at(
                &standardized,
                &grid,
                config.wavelet.omega0,
                annual.start_year() as f64,
            ),
        )?;
        stage(
            &format!("wavelet:{label}"),
            sink.write(
                &format!("{label}/scalogram.csv"),
                scalogram_csv(&sc).as_bytes(),
            ),
        )?;
        let svg = stage(
            &format!("wavelet:{label}"),
            emit_svg_heatmap(
                &sc.power,
                &sc.times,
                &sc.grid.scales,
                &format!("{label}: wavelet power"),
                &Overlays {
                    coi: Some(sc.coi.clone()),
                    sig90: Some(sc.sig90.clone()),
                    sig95: Some(sc.sig95.clone()),
                    phase: None,
                    arrow_stride: 0,
                },
            ),
        )?;
        stage(
            &format!("wavelet:{label}"),
            sink.write(&format!("{label}/scalogram.svg"), svg.as_bytes()),
        )?;

        scalograms.insert(label.clone(), sc);
    }

    // pairwise cross-wavelet and coherence
    for (a, b) in &config.pairs {
        let stage_name = format!("xwavelet:{a}~{b}");
        let sa = &scalograms[a];
        let sb = &scalograms[b];
        let mut cross = stage(&stage_name, cross_wavelet(sa, sb))?;
        cross.label_x = a.clone();
        cross.label_y = b.clone();
        let map = stage(&stage_name, coherence(sa, sb, SmoothSpec::default()))?;

        let mut cross_csv = String::from("year,scale,period_years,cross_power,phase,sig95\n");
        for (j, &scale) in cross.scales.iter().enumerate() {
            let period = fourier_period(scale, cross.omega0);
            for (t, &year) in cross.times.iter().enumerate() {
                cross_csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt_float(year),
                    fmt_float(scale),
                    fmt_float(period),
                    fmt_float(cross.power[j][t]),
                    fmt_float(cross.phase[j][t]),
                    u8::from(cross.sig95[j][t])
                ));
            }
        }
        stage(
            &stage_name,
            sink.write(&format!("pairs/{a}~{b}/cross.csv"), cross_csv.as_bytes()),
        )?;

        let cross_svg = stage(
            &stage_name,
            emit_svg_heatmap(
                &cross.power,
                &cross.times,
                &cross.scales,
                &format!("{a} x {b}: cross-wavelet power"),
                &Overlays {
                    coi: Some(cross.coi.clone()),
                    sig90: Some(cross.sig90.clone()),
                    sig95: Some(cross.sig95.clone()),
                    phase: Some(cross.phase.clone()),
                    arrow_stride: 4,
                },
            ),
        )?;
        stage(
            &stage_name,
            sink.write(&format!("pairs/{a}~{b}/cross.svg"), cross_svg.as_bytes()),
        )?;

        let mut coh_csv = String::from("year,scale,period_years,r2\n");
        for (j, &scale) in map.scales.iter().enumerate() {
            let period = fourier_period(scale, map.omega0);
            for (t, &year) in map.times.iter().enumerate() {
                coh_csv.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_float(year),
                    fmt_float(scale),
                    fmt_float(period),
                    fmt_float(map.r2[j][t])
                ));
            }
        }
        stage(
            &stage_name,
            sink.write(&format!("pairs/{a}~{b}/coherence.csv"), coh_csv.as_bytes()),
        )?;
        let coh_svg = stage(
            &stage_name,
            emit_svg_heatmap(
                &map.r2,
                &map.times,
                &map.scales,
                &format!("{a} x {b}: squared coherence"),
                &Overlays {
                    coi: Some(map.coi.clone()),
                    ..Overlays::default()
                },
            ),
        )?;
        stage(
            &stage_name,
            sink.write(&format!("pairs/{a}~{b}/coherence.svg"), coh_svg.as_bytes()),
        )?;
    }

    let mut effective = config.clone();
    effective.seed = seed;
    let manifest = RunManifest {
        config: effective,
        seed,
        inputs,
        outputs: sink.outputs.clone(),
    };
    let manifest_json = stage(
        "manifest",
        serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Io(format!("serializing manifest: {e}"))),
    )?;
    stage(
        "manifest",
        std::fs::write(
            Path::new(&config.out_dir).join("manifest.json"),
            manifest_json,
        )
        .map_err(|e| Error::Io(e.to_string())),
    )?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gen_sum_of_tones, Tone};
    use std::sync::Mutex;

    // run_pipeline reads SEED_ENV_VAR, so tests touching it must not overlap
    static ENV_LOCK: Mutex<()> = Mutex::new(());

    fn write_fixture(dir: &Path, name: &str, seed: u64) -> String {
        let mut stream = SeededStream::new(seed);
        let values = gen_sum_of_tones(
            64,
            &[Tone {
                period: 11.0,
                amplitude: 1.0,
                phase: 0.0,
            }],
            0.3,
            &mut stream,
        );
        let mut csv = String::from("year,value\n");
        for (i, v) in values.iter().enumerate() {
            csv.push_str(&format!("{},{}\n", 1950 + i as i32, v));
        }
        let path = dir.join(name);
        std::fs::write(&path, csv).unwrap();
        path.to_string_lossy().into_owned()
    }

    fn temp_dir(tag: &str) -> PathBuf {
        let dir =
            std::env::temp_dir().join(format!("annuli-pipeline-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn base_config(dir: &Path) -> RunConfig {
        let a = write_fixture(dir, "a.csv", 7);
        let b = write_fixture(dir, "b.csv", 8);
        RunConfig {
            series: vec![
                SeriesConfig {
                    label: "a".into(),
                    path: a,
                    schema: "plain".into(),
                    unit: "".into(),
                    skip_first_imf: false,
                },
                SeriesConfig {
                    label: "b".into(),
                    path: b,
                    schema: "plain".into(),
                    unit: "".into(),
                    skip_first_imf: false,
                },
            ],
            detrend: DetrendSection::default(),
            denoise: DenoiseSection::default(),
            wavelet: WaveletSection::default(),
            pairs: vec![("a".into(), "b".into())],
            seed: 42,
            out_dir: dir.join("out").to_string_lossy().into_owned(),
        }
    }

    #[test]
    fn pipeline_writes_expected_artifacts() {
        let _guard = ENV_LOCK.lock().unwrap();
        let dir = temp_dir("artifacts");
        let config = base_config(&dir);
        let manifest = run_pipeline(&config).unwrap();
        for key in [
            "a/detrend.csv",
            "a/stationarity.json",
            "a/imfs.csv",
            "a/imf1_periodogram.csv",
            "a/ssa_scree.csv",
            "a/scalogram.csv",
            "a/scalogram.svg",
            "b/detrend.csv",
            "pairs/a~b/cross.csv",
            "pairs/a~b/cross.svg",
            "pairs/a~b/coherence.csv",
            "pairs/a~b/coherence.svg",
        ] {
            assert!(manifest.outputs.contains_key(key), "missing artifact {key}");
            assert!(
                Path::new(&config.out_dir).join(key).exists(),
                "file missing: {key}"
            );
        }
        assert_eq!(manifest.inputs.len(), 2);
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let _guard = ENV_LOCK.lock().unwrap();
        let dir = temp_dir("determinism");
        let config = base_config(&dir);
        run_pipeline(&config).unwrap();
        let first = std::fs::read(Path::new(&config.out_dir).join("manifest.json")).unwrap();
        run_pipeline(&config).unwrap();
        let second = std::fs::read(Path::new(&config.out_dir).join("manifest.json")).unwrap();
        assert_eq!(first, second);
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn missing_input_aborts_with_path() {
        let _guard = ENV_LOCK.lock().unwrap();
        let dir = temp_dir("missing");
        let mut config = base_config(&dir);
        config.series[0].path = dir.join("absent.csv").to_string_lossy().into_owned();
        let err = run_pipeline(&config).unwrap_err();
        assert_eq!(err.stage, "config");
        assert!(err.error.to_string().contains("absent.csv"));
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn failed_run_removes_partial_outputs() {
        let _guard = ENV_LOCK.lock().unwrap();
        let dir = temp_dir("rollback");
        let mut config = base_config(&dir);
        // second series too short for the pipeline: constant -> standardize fails
        let path = dir.join("flat.csv");
        let mut csv = String::from("year,value\n");
        for year in 1950..2014 {
            csv.push_str(&format!("{year},5.0\n"));
        }
        std::fs::write(&path, csv).unwrap();
        config.series[1].path = path.to_string_lossy().into_owned();
        let err = run_pipeline(&config).unwrap_err();
        assert!(err.stage.contains("b"), "stage = {}", err.stage);
        // artifacts from the successful first series were rolled back
        assert!(!Path::new(&config.out_dir).join("a/detrend.csv").exists());
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn identical_pair_has_unit_coherence() {
        let _guard = ENV_LOCK.lock().unwrap();
        let dir = temp_dir("selfpair");
        let mut config = base_config(&dir);
        config.series[1].path = config.series[0].path.clone();
        config.pairs = vec![("a".into(), "b".into())];
        run_pipeline(&config).unwrap();
        let csv =
            std::fs::read_to_string(Path::new(&config.out_dir).join("pairs/a~b/coherence.csv"))
                .unwrap();
        // parse and check R2 ~ 1 inside the COI region via the scalogram csv
        let sc_csv =
            std::fs::read_to_string(Path::new(&config.out_dir).join("a/scalogram.csv")).unwrap();
        let coi: std::collections::HashSet<(String, String)> = sc_csv
            .lines()
            .skip(1)
            .filter(|l| l.ends_with(",1"))
            .map(|l| {
                let mut parts = l.split(',');
                (
                    parts.next().unwrap().to_string(),
                    parts.next().unwrap().to_string(),
                )
            })
            .collect();
        let mut checked = 0;
        for line in csv.lines().skip(1) {
            let parts: Vec<&str> = line.split(',').collect();
            let key = (parts[0].to_string(), parts[1].to_string());
            if coi.contains(&key) {
                let r2: f64 = parts[3].parse().unwrap();
                assert!((r2 - 1.0).abs() < 1e-6, "r2 = {r2} at {key:?}");
                checked += 1;
            }
        }
        assert!(checked > 100, "checked only {checked} in-COI cells");
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn env_seed_overrides_config() {
        let _guard = ENV_LOCK.lock().unwrap();
        // the env var is read inside run_pipeline; emulate by direct call
        let dir = temp_dir("envseed");
        let config = base_config(&dir);
        std::env::set_var(SEED_ENV_VAR, "777");
        let manifest = run_pipeline(&config).unwrap();
        std::env::remove_var(SEED_ENV_VAR);
        assert_eq!(manifest.seed, 777);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
