//! Command-line front end for the annual-series analysis chain.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error,
//! 4 numeric failure.

use annuli_core::detrend::{detrend_friedman, detrend_spline};
use annuli_core::emd;
use annuli_core::error::Error;
use annuli_core::ingest::{annualize, parse_csv, AnnualSeries, ColumnSchema, MeanPolicy};
use annuli_core::pipeline::{run_pipeline, RunConfig, StageError};
use annuli_core::rng::{gen_ar1, gen_sum_of_tones, SeededStream, Tone};
use annuli_core::spectral::periodogram;
use annuli_core::ssa;
use annuli_core::stattests::{
    adf_test, keenan_test, kpss_test, mcleod_li_test, tsay_test, ModelVariant,
};
use annuli_core::svgplot::{emit_svg_heatmap, Overlays};
use annuli_core::wavelet::{coi_mask, cwt_morlet_at, fourier_period, ScaleGrid};
use annuli_core::xwavelet::{coherence, cross_wavelet, dump_lowfreq_mask, SmoothSpec};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "annuli",
    version,
    about = "Decomposition and spectral analysis of annual time series",
    long_about = "Detrend annual series, test stationarity and nonlinearity, denoise by \
                  EMD or SSA, and locate oscillations with Morlet wavelet, cross-wavelet \
                  and coherence analysis under an AR(1) red-noise null."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Input data file (delimiter-separated, one header row).
    #[arg(long)]
    input: PathBuf,
    /// Column schema: plain (year,value), fao (Year/Value by name), silso
    /// (year, month, value by index with -1 as missing marker).
    #[arg(long, default_value = "plain")]
    schema: String,
    /// Label used in outputs.
    #[arg(long, default_value = "series")]
    label: String,
    /// Unit carried through outputs, never interpreted.
    #[arg(long, default_value = "")]
    unit: String,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a data file and print the annualized series as year,value CSV.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split a series into trend and residual.
    Detrend {
        #[command(flatten)]
        input: InputArgs,
        /// spline or friedman.
        #[arg(long, default_value = "spline")]
        method: String,
        /// Spline 50%-response wavelength as a fraction of series length.
        #[arg(long, default_value_t = 0.67)]
        stiffness: f64,
        /// Supersmoother bass enhancer in [0,10].
        #[arg(long, default_value_t = 0.0)]
        bass: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run KPSS, ADF, Keenan, Tsay and McLeod-Li tests; print JSON reports.
    Test {
        #[command(flatten)]
        input: InputArgs,
        /// Detrend (spline) before testing.
        #[arg(long)]
        detrend: bool,
        #[arg(long, default_value_t = 0.67)]
        stiffness: f64,
        /// Deterministic component: none, drift or trend.
        #[arg(long, default_value = "none")]
        variant: String,
        /// AR order for the Keenan and Tsay tests.
        #[arg(long, default_value_t = 2)]
        ar_order: usize,
        /// Lag count for the McLeod-Li test.
        #[arg(long, default_value_t = 10)]
        max_lag: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical mode decomposition; writes year,imf1..imfN,residual CSV.
    Emd {
        #[command(flatten)]
        input: InputArgs,
        /// Sifting tolerance in (0,1).
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 10)]
        max_imfs: usize,
        #[arg(long, default_value_t = 50)]
        max_sifts: usize,
        /// Also write the first-IMF periodogram next to --out.
        #[arg(long)]
        imf1_spectrum: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Singular spectrum analysis; writes the eigenvalue scree CSV.
    Ssa {
        #[command(flatten)]
        input: InputArgs,
        /// Window length L (2..=N/2); default min(N/2, 25).
        #[arg(long)]
        window: Option<usize>,
        /// Comma-separated 1-based component indices to reconstruct.
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Morlet wavelet scalogram with COI and AR(1) significance layers.
    Wavelet {
        #[command(flatten)]
        input: InputArgs,
        /// Detrend (spline, default stiffness) before the transform.
        #[arg(long)]
        detrend: bool,
        /// Smallest scale in years.
        #[arg(long, default_value_t = 2.0)]
        s0: f64,
        /// Scale resolution in octave fractions.
        #[arg(long, default_value_t = 0.05)]
        dj: f64,
        /// Number of scales; defaults to reaching N/2.
        #[arg(long)]
        n_scales: Option<usize>,
        /// Morlet base frequency (>= 5).
        #[arg(long, default_value_t = 6.0)]
        omega0: f64,
        /// Write an SVG heatmap here.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-wavelet power and coherence of two series.
    Xwavelet {
        /// First input file.
        #[arg(long)]
        input_x: PathBuf,
        /// Second input file.
        #[arg(long)]
        input_y: PathBuf,
        #[arg(long, default_value = "plain")]
        schema_x: String,
        #[arg(long, default_value = "plain")]
        schema_y: String,
        #[arg(long, default_value = "x")]
        label_x: String,
        #[arg(long, default_value = "y")]
        label_y: String,
        /// Detrend (spline, default stiffness) both series first.
        #[arg(long)]
        detrend: bool,
        #[arg(long, default_value_t = 2.0)]
        s0: f64,
        #[arg(long, default_value_t = 0.05)]
        dj: f64,
        #[arg(long, default_value_t = 6.0)]
        omega0: f64,
        /// Zero cross power at Fourier periods longer than this many years.
        #[arg(long)]
        cutoff_period: Option<f64>,
        /// Seed for coherence significance surrogates.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Monte Carlo surrogate pairs for the coherence 95% contour;
        /// 0 disables the contour.
        #[arg(long, default_value_t = 0)]
        coherence_surrogates: usize,
        /// Output directory for CSV and SVG artifacts.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the whole analysis chain from a JSON config file.
    Pipeline {
        /// JSON run configuration; see the README for the schema.
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate a synthetic annual series fixture as year,value CSV.
    Synth {
        /// Number of years.
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Tone spec period:amplitude[:phase], repeatable.
        #[arg(long = "tone")]
        tones: Vec<String>,
        /// AR(1) persistence of the additive noise.
        #[arg(long, default_value_t = 0.0)]
        ar1: f64,
        /// Noise standard deviation.
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1967)]
        start_year: i32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Config(_) | Error::Parameter(_) => 2,
        Error::Parse { .. }
        | Error::MissingYear { .. }
        | Error::Io(_)
        | Error::InsufficientData { .. }
        | Error::NonFinite => 3,
        Error::Degenerate(_) | Error::GridMismatch | Error::UnsmoothedCoherence => 4,
    }
}

fn fail(error: Error) -> ExitCode {
    eprintln!("error: {error}");
    ExitCode::from(exit_code_for(&error))
}

fn fail_stage(e: StageError) -> ExitCode {
    let code = exit_code_for(&e.error);
    eprintln!("error: {e}");
    ExitCode::from(code)
}

fn load_series(input: &InputArgs) -> Result<AnnualSeries, Error> {
    let schema = ColumnSchema::by_name(&input.schema)
        .ok_or_else(|| Error::Config(format!("unknown schema {:?}", input.schema)))?;
    let bytes = std::fs::read(&input.input)
        .map_err(|e| Error::Io(format!("{}: {e}", input.input.display())))?;
    let records = parse_csv(&bytes, &schema)?;
    annualize(&records, MeanPolicy::default(), &input.label, &input.unit)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            std::fs::write(path, content).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn annual_csv(series: &AnnualSeries) -> String {
    let mut out = String::from("year,value\n");
    for (year, v) in series.years().zip(series.values()) {
        out.push_str(&format!("{year},{v}\n"));
    }
    out
}

fn variant_of(name: &str) -> Result<ModelVariant, Error> {
    match name {
        "none" => Ok(ModelVariant::NoDriftNoTrend),
        "drift" => Ok(ModelVariant::Drift),
        "trend" => Ok(ModelVariant::DriftTrend),
        other => Err(Error::Config(format!("unknown variant {other:?}"))),
    }
}

fn scalogram_csv(sc: &annuli_core::wavelet::Scalogram) -> String {
    let mut out = String::from("year,scale,period_years,power,sig90,sig95,in_coi\n");
    let periods = sc.periods();
    let coi = coi_mask(sc);
    for (j, &scale) in sc.grid.scales.iter().enumerate() {
        for (t, &year) in sc.times.iter().enumerate() {
            out.push_str(&format!(
                "{year},{scale},{},{},{},{},{}\n",
                periods[j],
                sc.power[j][t],
                u8::from(sc.sig90[j][t]),
                u8::from(sc.sig95[j][t]),
                u8::from(coi[j][t])
            ));
        }
    }
    out
}

fn run() -> Result<(), ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Ingest { input, out } => {
            let series = load_series(&input).map_err(fail)?;
            emit(&out, &annual_csv(&series)).map_err(fail)?;
        }
        Command::Detrend {
            input,
            method,
            stiffness,
            bass,
            out,
        } => {
            let series = load_series(&input).map_err(fail)?;
            let d = match method.as_str() {
                "spline" => detrend_spline(&series, stiffness).map_err(fail)?,
                "friedman" => detrend_friedman(&series, bass).map_err(fail)?,
                other => {
                    return Err(fail(Error::Config(format!(
                        "unknown detrend method {other:?}"
                    ))))
                }
            };
            let mut csv = String::from("year,value,trend,cycle\n");
            for (i, year) in series.years().enumerate() {
                csv.push_str(&format!(
                    "{year},{},{},{}\n",
                    series.values()[i],
                    d.trend()[i],
                    d.cycle()[i]
                ));
            }
            emit(&out, &csv).map_err(fail)?;
        }
        Command::Test {
            input,
            detrend,
            stiffness,
            variant,
            ar_order,
            max_lag,
            out,
        } => {
            let series = load_series(&input).map_err(fail)?;
            let values: Vec<f64> = if detrend {
                detrend_spline(&series, stiffness)
                    .map_err(fail)?
                    .cycle()
                    .to_vec()
            } else {
                series.values().to_vec()
            };
            let variant = variant_of(&variant).map_err(fail)?;
            let reports = vec![
                kpss_test(&values, variant).map_err(fail)?,
                adf_test(&values, variant).map_err(fail)?,
                keenan_test(&values, ar_order).map_err(fail)?,
                tsay_test(&values, ar_order).map_err(fail)?,
                mcleod_li_test(&values, max_lag).map_err(fail)?,
            ];
            let json = serde_json::to_string_pretty(&reports)
                .map_err(|e| fail(Error::Io(e.to_string())))?;
            emit(&out, &format!("{json}\n")).map_err(fail)?;
        }
        Command::Emd {
            input,
            epsilon,
            max_imfs,
            max_sifts,
            imf1_spectrum,
            out,
        } => {
            let series = load_series(&input).map_err(fail)?;
            let set = emd::sift(series.values(), epsilon, max_imfs, max_sifts).map_err(fail)?;
            let mut csv = String::from("year");
            for j in 1..=set.n_imfs() {
                csv.push_str(&format!(",imf{j}"));
            }
            csv.push_str(",residual\n");
            for (i, year) in series.years().enumerate() {
                csv.push_str(&year.to_string());
                for imf in &set.imfs {
                    csv.push_str(&format!(",{}", imf[i]));
                }
                csv.push_str(&format!(",{}\n", set.residual[i]));
            }
            emit(&out, &csv).map_err(fail)?;
            if imf1_spectrum {
                if set.imfs.is_empty() {
                    eprintln!("note: no IMFs extracted, skipping the first-IMF spectrum");
                } else {
                    let p = periodogram(&set.imfs[0]).map_err(fail)?;
                    let mut spec = String::from("frequency,period_years,power\n");
                    for (f, pw) in p.frequencies.iter().zip(p.power.iter()) {
                        spec.push_str(&format!("{f},{},{pw}\n", 1.0 / f));
                    }
                    let path = out
                        .as_ref()
                        .map(|p| p.with_extension("imf1.csv"))
                        .ok_or_else(|| {
                            fail(Error::Config("--imf1-spectrum requires --out".into()))
                        })?;
                    std::fs::write(&path, spec)
                        .map_err(|e| fail(Error::Io(format!("{}: {e}", path.display()))))?;
                }
            }
        }
        Command::Ssa {
            input,
            window,
            group,
            out,
        } => {
            let series = load_series(&input).map_err(fail)?;
            let window = window.unwrap_or_else(|| ssa::default_window(series.len()));
            let model = ssa::embed_decompose(series.values(), window).map_err(fail)?;
            let shares = model.scree();
            let mut csv = String::from("component,singular_value,share\n");
            for (i, (sv, share)) in model.singular_values.iter().zip(shares.iter()).enumerate() {
                csv.push_str(&format!("{},{sv},{share}\n", i + 1));
            }
            if let Some(spec) = group {
                let indices: Result<Vec<usize>, Error> = spec
                    .split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::Config(format!("bad component index {tok:?}")))
                            .and_then(|i| {
                                if i == 0 {
                                    Err(Error::Config("component indices are 1-based".into()))
                                } else {
                                    Ok(i - 1)
                                }
                            })
                    })
                    .collect();
                let rec = model.reconstruct(&indices.map_err(fail)?).map_err(fail)?;
                csv.push_str("year,reconstruction\n");
                for (year, v) in series.years().zip(rec.iter()) {
                    csv.push_str(&format!("{year},{v}\n"));
                }
            }
            emit(&out, &csv).map_err(fail)?;
        }
        Command::Wavelet {
            input,
            detrend,
            s0,
            dj,
            n_scales,
            omega0,
            svg,
            out,
        } => {
            let series = load_series(&input).map_err(fail)?;
            let values: Vec<f64> = if detrend {
                detrend_spline(&series, 0.67)
                    .map_err(fail)?
                    .cycle()
                    .to_vec()
            } else {
                series.values().to_vec()
            };
            let grid = match n_scales {
                Some(n) => ScaleGrid::new(s0, dj, n, values.len()),
                None => ScaleGrid::with_resolution(values.len(), s0, dj),
            }
            .map_err(fail)?;
            let sc =
                cwt_morlet_at(&values, &grid, omega0, series.start_year() as f64).map_err(fail)?;
            emit(&out, &scalogram_csv(&sc)).map_err(fail)?;
            if let Some(path) = svg {
                let doc = emit_svg_heatmap(
                    &sc.power,
                    &sc.times,
                    &sc.grid.scales,
                    &format!("{}: wavelet power", input.label),
                    &Overlays {
                        coi: Some(sc.coi.clone()),
                        sig90: Some(sc.sig90.clone()),
                        sig95: Some(sc.sig95.clone()),
                        phase: None,
                        arrow_stride: 0,
                    },
                )
                .map_err(fail)?;
                std::fs::write(&path, doc)
                    .map_err(|e| fail(Error::Io(format!("{}: {e}", path.display()))))?;
            }
        }
        Command::Xwavelet {
            input_x,
            input_y,
            schema_x,
            schema_y,
            label_x,
            label_y,
            detrend,
            s0,
            dj,
            omega0,
            cutoff_period,
            seed,
            coherence_surrogates,
            out_dir,
        } => {
            let sx = load_series(&InputArgs {
                input: input_x,
                schema: schema_x,
                label: label_x.clone(),
                unit: String::new(),
            })
            .map_err(fail)?;
            let sy = load_series(&InputArgs {
                input: input_y,
                schema: schema_y,
                label: label_y.clone(),
                unit: String::new(),
            })
            .map_err(fail)?;
            // align on the overlapping year range
            let start = sx.start_year().max(sy.start_year());
            let end = (sx.start_year() + sx.len() as i32).min(sy.start_year() + sy.len() as i32);
            if end - start < 16 {
                return Err(fail(Error::InsufficientData {
                    len: (end - start).max(0) as usize,
                    min: 16,
                }));
            }
            let slice = |s: &AnnualSeries| -> Vec<f64> {
                let from = (start - s.start_year()) as usize;
                let to = (end - s.start_year()) as usize;
                s.values()[from..to].to_vec()
            };
            let mut vx = slice(&sx);
            let mut vy = slice(&sy);
            if detrend {
                let ax = AnnualSeries::new(start, vx.clone(), &label_x, "").map_err(fail)?;
                let ay = AnnualSeries::new(start, vy.clone(), &label_y, "").map_err(fail)?;
                vx = detrend_spline(&ax, 0.67).map_err(fail)?.cycle().to_vec();
                vy = detrend_spline(&ay, 0.67).map_err(fail)?.cycle().to_vec();
            }
            let grid = ScaleGrid::with_resolution(vx.len(), s0, dj).map_err(fail)?;
            let wx = cwt_morlet_at(&vx, &grid, omega0, start as f64).map_err(fail)?;
            let wy = cwt_morlet_at(&vy, &grid, omega0, start as f64).map_err(fail)?;
            let mut cross = cross_wavelet(&wx, &wy).map_err(fail)?;
            cross.label_x = label_x.clone();
            cross.label_y = label_y.clone();
            if let Some(cutoff) = cutoff_period {
                cross = dump_lowfreq_mask(&cross, cutoff);
            }
            let map = coherence(&wx, &wy, SmoothSpec::default()).map_err(fail)?;

            std::fs::create_dir_all(&out_dir)
                .map_err(|e| fail(Error::Io(format!("{}: {e}", out_dir.display()))))?;
            let mut cross_csv =
                String::from("year,scale,period_years,cross_power,phase,sig90,sig95\n");
            for (j, &scale) in cross.scales.iter().enumerate() {
                let period = fourier_period(scale, omega0);
                for (t, &year) in cross.times.iter().enumerate() {
                    cross_csv.push_str(&format!(
                        "{year},{scale},{period},{},{},{},{}\n",
                        cross.power[j][t],
                        cross.phase[j][t],
                        u8::from(cross.sig90[j][t]),
                        u8::from(cross.sig95[j][t])
                    ));
                }
            }
            std::fs::write(out_dir.join("cross.csv"), cross_csv)
                .map_err(|e| fail(Error::Io(e.to_string())))?;
            let cross_svg = emit_svg_heatmap(
                &cross.power,
                &cross.times,
                &cross.scales,
                &format!("{label_x} x {label_y}: cross-wavelet power"),
                &Overlays {
                    coi: Some(cross.coi.clone()),
                    sig90: Some(cross.sig90.clone()),
                    sig95: Some(cross.sig95.clone()),
                    phase: Some(cross.phase.clone()),
                    arrow_stride: 4,
                },
            )
            .map_err(fail)?;
            std::fs::write(out_dir.join("cross.svg"), cross_svg)
                .map_err(|e| fail(Error::Io(e.to_string())))?;

            let thresholds = if coherence_surrogates > 0 {
                let mut stream = SeededStream::new(seed);
                Some(
                    annuli_core::xwavelet::coherence_significance(
                        vx.len(),
                        wx.background_model.alpha,
                        wy.background_model.alpha,
                        &grid,
                        omega0,
                        SmoothSpec::default(),
                        coherence_surrogates,
                        0.95,
                        &mut stream,
                    )
                    .map_err(fail)?,
                )
            } else {
                None
            };
            let mut coh_csv = String::from("year,scale,period_years,r2,sig95\n");
            for (j, &scale) in map.scales.iter().enumerate() {
                let period = fourier_period(scale, omega0);
                for (t, &year) in map.times.iter().enumerate() {
                    let sig = thresholds
                        .as_ref()
                        .map(|th| u8::from(map.r2[j][t] > th[j][t]))
                        .unwrap_or(0);
                    coh_csv.push_str(&format!("{year},{scale},{period},{},{sig}\n", map.r2[j][t]));
                }
            }
            std::fs::write(out_dir.join("coherence.csv"), coh_csv)
                .map_err(|e| fail(Error::Io(e.to_string())))?;
            let coh_svg = emit_svg_heatmap(
                &map.r2,
                &map.times,
                &map.scales,
                &format!("{label_x} x {label_y}: squared coherence"),
                &Overlays {
                    coi: Some(map.coi.clone()),
                    ..Overlays::default()
                },
            )
            .map_err(fail)?;
            std::fs::write(out_dir.join("coherence.svg"), coh_svg)
                .map_err(|e| fail(Error::Io(e.to_string())))?;
        }
        Command::Pipeline { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| fail(Error::Io(format!("{}: {e}", config.display()))))?;
            let parsed: RunConfig = serde_json::from_str(&text)
                .map_err(|e| fail(Error::Config(format!("parsing config: {e}"))))?;
            let manifest = run_pipeline(&parsed).map_err(fail_stage)?;
            println!(
                "pipeline complete: {} artifacts in {}",
                manifest.outputs.len(),
                parsed.out_dir
            );
        }
        Command::Synth {
            n,
            tones,
            ar1,
            noise_sd,
            seed,
            start_year,
            out,
        } => {
            let mut parsed_tones = Vec::new();
            for spec in &tones {
                let parts: Vec<&str> = spec.split(':').collect();
                if parts.len() < 2 || parts.len() > 3 {
                    return Err(fail(Error::Config(format!(
                        "tone spec must be period:amplitude[:phase], got {spec:?}"
                    ))));
                }
                let parse = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad number in tone spec {spec:?}")))
                };
                let period = parse(parts[0]).map_err(fail)?;
                if period <= 2.0 {
                    return Err(fail(Error::Config(format!(
                        "tone period must exceed 2 years, got {period}"
                    ))));
                }
                parsed_tones.push(Tone {
                    period,
                    amplitude: parse(parts[1]).map_err(fail)?,
                    phase: if parts.len() == 3 {
                        parse(parts[2]).map_err(fail)?
                    } else {
                        0.0
                    },
                });
            }
            let mut stream = SeededStream::new(seed);
            let mut values = gen_sum_of_tones(n, &parsed_tones, 0.0, &mut stream);
            if noise_sd > 0.0 {
                let noise = gen_ar1(n, ar1, noise_sd, &mut stream).map_err(fail)?;
                for (v, e) in values.iter_mut().zip(noise.iter()) {
                    *v += e;
                }
            }
            let mut csv = String::from("year,value\n");
            for (i, v) in values.iter().enumerate() {
                csv.push_str(&format!("{},{v}\n", start_year + i as i32));
            }
            emit(&out, &csv).map_err(fail)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
