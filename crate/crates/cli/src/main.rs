//! `allatonce`: reproduces the engine's reference results from the command line.

use std::f64::consts::TAU;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use allatonce_core::io::{
    audit_csv, audit_text, born_scan_csv, chsh_csv, distribution_csv, distribution_text,
    format_sig12, ChshRow, DocumentError, EnsembleDocument, GraphDocument,
};
use allatonce_core::ising::{Configuration, Distribution, Enumerator, Site};
use allatonce_core::knowledge::{
    double_slit_demo, independence_audit_with_tolerance, AuditReport, KnowledgeState, SlitGeometry,
    AUDIT_TOLERANCE,
};
use allatonce_core::presets::{self, FIG1A, FIG1B};
use allatonce_core::retro_spin::{
    born_limit_scan, chsh_value, duality_check, max_deviation_by_gamma, theta_grid, AnsatzParams,
    ChshAngles, MeasurementSettings,
};
use allatonce_core::Error;
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

const EXIT_CODES: &str = "\
Exit status:
  0  success (a geometry-dependent audit is a finding, not an error)
  1  I/O failure
  2  usage error
  3  input file does not parse
  4  input file parses but is invalid
  5  enumeration capacity exceeded
  6  duality sweep residual above tolerance";

#[derive(Parser, Debug)]
#[command(name = "allatonce", version, about, after_help = EXIT_CODES)]
struct Cli {
    /// Output format. Defaults: fractions for fig1, csv for born and chsh,
    /// text otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Audit threshold for floating-point tables, or the duality residual bound.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Conditional tables of the reference geometries 1a and 1b, and P(σ₂ = σ₃).
    Fig1,
    /// Geometry-independence audit of an ensemble file or a preset.
    Audit {
        /// Ensemble document (TOML).
        file: Option<PathBuf>,
        #[arg(long, value_enum, conflicts_with = "file")]
        preset: Option<Preset>,
    },
    /// Deviation from cos²(θ/2) over a θ grid, for each γ.
    Born {
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        gamma: Vec<f64>,
        /// Number of evenly spaced angles in [0, 2π).
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
    /// CHSH value at a = 0, a' = π/2, b = π/4, b' = -π/4 for each γ.
    Chsh {
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        gamma: Vec<f64>,
    },
    /// Entangled vs sequential correlation over seeded random settings.
    Dual {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw a single angle per sample and use it for both analysers.
        #[arg(long)]
        equal_settings: bool,
    },
    /// P(N | G) for the two-slit detector arrangements.
    Slits,
    /// Joint or marginal distribution of a graph document.
    Dist {
        /// Graph document (TOML).
        file: PathBuf,
        /// Sites to keep, e.g. `--marginal 2,3`.
        #[arg(long, value_delimiter = ',')]
        marginal: Option<Vec<u32>>,
        /// Largest number of free sites to enumerate.
        #[arg(long)]
        max_free_sites: Option<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Text,
    Fractions,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Preset {
    Fig1,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Capacity(String),
    #[error("duality residual {residual} exceeds tolerance {tolerance}")]
    Duality { residual: String, tolerance: String },
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Parse { .. } => 3,
            CliError::Invalid(_) => 4,
            CliError::Capacity(_) => 5,
            CliError::Duality { .. } => 6,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Capacity { .. } | Error::CapTooLarge(_) => CliError::Capacity(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

fn document_error(path: &Path, e: DocumentError) -> CliError {
    let path = path.display().to_string();
    match e {
        DocumentError::Parse(message) => CliError::Parse { path, message },
        DocumentError::Invalid { ref source, .. } => match CliError::from(source.clone()) {
            CliError::Capacity(_) => CliError::Capacity(format!("{path}: {e}")),
            _ => CliError::Invalid(format!("{path}: {e}")),
        },
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn gamma_params(gammas: &[f64]) -> Result<Vec<AnsatzParams>, CliError> {
    gammas
        .iter()
        .map(|&g| {
            AnsatzParams::new(g)
                .map_err(|_| CliError::Usage(format!("gamma must be positive, got {g}")))
        })
        .collect()
}

fn tolerance_or(tolerance: Option<f64>, default: f64) -> Result<f64, CliError> {
    match tolerance {
        None => Ok(default),
        Some(t) if t.is_finite() && t > 0.0 => Ok(t),
        Some(t) => Err(CliError::Usage(format!(
            "tolerance must be positive, got {t}"
        ))),
    }
}

fn needs_exact(what: &str) -> CliError {
    CliError::Usage(format!(
        "--format fractions needs exact rational values, which {what} does not have"
    ))
}

/// Rounds to the 12 significant digits used by every float output.
fn sig12(x: f64) -> f64 {
    format_sig12(x).parse().expect("formatted float parses")
}

fn toml_string<T: Serialize>(value: &T) -> String {
    toml::to_string(value).expect("report serializes")
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 output")
}

#[derive(Serialize)]
struct Entry {
    config: String,
    probability: String,
}

fn entries(d: &Distribution) -> Vec<Entry> {
    d.iter()
        .map(|(c, p)| Entry {
            config: c.to_string(),
            probability: p.to_string(),
        })
        .collect()
}

fn fig1(format: Format) -> Result<String, CliError> {
    let state = KnowledgeState::new(presets::fig1_ensemble(), Default::default());
    let tables = state.conditional_distributions()?;
    let equal = |c: &Configuration| c.get(Site(2)) == c.get(Site(3));
    let events: Vec<(String, String)> = [FIG1A, FIG1B]
        .iter()
        .map(|&g| {
            (
                format!("P(s2==s3|{g})"),
                tables[g].event_probability(equal).to_string(),
            )
        })
        .collect();

    Ok(match format {
        Format::Fractions => {
            let mut out = String::new();
            for (label, d) in &tables {
                out.push_str(&format!("# P_{label}(s2,s3 | s1=+1)\n"));
                for (c, p) in d.iter() {
                    out.push_str(&format!("{c} {p}\n"));
                }
            }
            for (name, p) in &events {
                out.push_str(&format!("{name}={p}\n"));
            }
            out
        }
        Format::Csv => csv_string(
            &["geometry", "config", "probability"],
            tables.iter().flat_map(|(label, d)| {
                d.iter()
                    .map(|(c, p)| vec![label.clone(), c.to_string(), format_sig12(p.to_f64())])
                    .collect::<Vec<_>>()
            }),
        ),
        Format::Text => {
            #[derive(Serialize)]
            struct Table {
                geometry: String,
                scope: Vec<u32>,
                entries: Vec<Entry>,
            }
            #[derive(Serialize)]
            struct Report {
                events: std::collections::BTreeMap<String, String>,
                tables: Vec<Table>,
            }
            toml_string(&Report {
                events: events.into_iter().collect(),
                tables: tables
                    .iter()
                    .map(|(label, d)| Table {
                        geometry: label.clone(),
                        scope: d.scope().iter().map(|s| s.0).collect(),
                        entries: entries(d),
                    })
                    .collect(),
            })
        }
    })
}

fn audit(
    file: Option<&Path>,
    preset: Option<Preset>,
    format: Format,
    tolerance: f64,
) -> Result<String, CliError> {
    let (ensemble, beta) = match (file, preset) {
        (Some(path), _) => {
            let spec = EnsembleDocument::parse(&read(path)?)
                .and_then(|doc| doc.validate())
                .map_err(|e| document_error(path, e))?;
            (spec.ensemble, spec.beta)
        }
        (None, Some(Preset::Fig1)) => (presets::fig1_ensemble(), Default::default()),
        (None, None) => {
            return Err(CliError::Usage("audit needs a FILE or --preset".into()));
        }
    };
    let report = independence_audit_with_tolerance(&ensemble, beta, tolerance)?;
    Ok(match format {
        Format::Text => audit_text(&report),
        Format::Csv => audit_csv(&report),
        Format::Fractions => audit_fractions(&report)?,
    })
}

fn audit_fractions(report: &AuditReport) -> Result<String, CliError> {
    let mut out = format!("geometry_dependent={}\n", report.geometry_dependent);
    for pair in &report.pairs {
        let (Some(d), Some(tv)) = (pair.max_diff.as_exact(), pair.tv_distance.as_exact()) else {
            return Err(needs_exact("this audit"));
        };
        out.push_str(&format!(
            "max_diff({},{})={d} at {}\ntv_distance({},{})={tv}\n",
            pair.label_a, pair.label_b, pair.entry, pair.label_a, pair.label_b
        ));
    }
    Ok(out)
}

fn born(gammas: &[f64], points: usize, format: Format) -> Result<(String, String), CliError> {
    if format == Format::Fractions {
        return Err(needs_exact("the Born scan"));
    }
    if points == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    gamma_params(gammas)?;
    let rows = born_limit_scan(&theta_grid(points), gammas)?;
    let maxima = max_deviation_by_gamma(&rows);

    #[derive(Serialize)]
    struct GammaSummary {
        gamma: f64,
        max_deviation: f64,
        gamma_squared: f64,
        /// Previous γ's maximum divided by this one's.
        #[serde(skip_serializing_if = "Option::is_none")]
        reduction: Option<f64>,
    }
    let summary: Vec<GammaSummary> = maxima
        .iter()
        .enumerate()
        .map(|(i, &(gamma, max_deviation))| GammaSummary {
            gamma: sig12(gamma),
            max_deviation: sig12(max_deviation),
            gamma_squared: sig12(gamma * gamma),
            reduction: (i > 0).then(|| sig12(maxima[i - 1].1 / max_deviation)),
        })
        .collect();
    let lines: String = summary
        .iter()
        .map(|s| {
            let mut line = format!(
                "gamma={} max_deviation={}",
                format_sig12(s.gamma),
                format_sig12(s.max_deviation)
            );
            if let Some(r) = s.reduction {
                line.push_str(&format!(" reduction={}", format_sig12(r)));
            }
            line + "\n"
        })
        .collect();

    Ok(match format {
        Format::Csv => (born_scan_csv(&rows), lines),
        _ => {
            #[derive(Serialize)]
            struct Report {
                points: usize,
                gammas: Vec<GammaSummary>,
            }
            (
                toml_string(&Report {
                    points,
                    gammas: summary,
                }),
                String::new(),
            )
        }
    })
}

fn chsh(gammas: &[f64], format: Format) -> Result<String, CliError> {
    if format == Format::Fractions {
        return Err(needs_exact("the CHSH value"));
    }
    let rows = gamma_params(gammas)?
        .into_iter()
        .map(|p| {
            Ok(ChshRow {
                angles: ChshAngles::STANDARD,
                gamma: p.gamma(),
                chsh: chsh_value(ChshAngles::STANDARD, p)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(match format {
        Format::Csv => chsh_csv(&rows),
        _ => {
            #[derive(Serialize)]
            struct Row {
                gamma: f64,
                chsh: f64,
                bell_violating: bool,
            }
            #[derive(Serialize)]
            struct Report {
                a: f64,
                a_prime: f64,
                b: f64,
                b_prime: f64,
                rows: Vec<Row>,
            }
            let ChshAngles {
                a,
                a_prime,
                b,
                b_prime,
            } = ChshAngles::STANDARD;
            toml_string(&Report {
                a: sig12(a),
                a_prime: sig12(a_prime),
                b: sig12(b),
                b_prime: sig12(b_prime),
                rows: rows
                    .iter()
                    .map(|r| Row {
                        gamma: sig12(r.gamma),
                        chsh: sig12(r.chsh),
                        bell_violating: r.chsh > 2.0,
                    })
                    .collect(),
            })
        }
    })
}

fn dual(
    samples: usize,
    seed: u64,
    equal_settings: bool,
    format: Format,
    tolerance: f64,
) -> Result<(String, Option<CliError>), CliError> {
    if format == Format::Fractions {
        return Err(needs_exact("the duality sweep"));
    }
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(samples);
    for _ in 0..samples {
        let alpha = rng.gen_range(0.0..TAU);
        let beta = if equal_settings {
            alpha
        } else {
            rng.gen_range(0.0..TAU)
        };
        // γ uniform in (0.01, 2]
        let gamma = 2.0 - rng.gen_range(0.0..1.99);
        let check = duality_check(
            MeasurementSettings::new(alpha, beta)?,
            AnsatzParams::new(gamma)?,
            tolerance,
        )?;
        rows.push((alpha, beta, gamma, check));
    }
    let worst = rows.iter().enumerate().fold(0, |w, (i, r)| {
        if r.3.residual > rows[w].3.residual {
            i
        } else {
            w
        }
    });
    let max_residual = rows[worst].3.residual;
    let holds = max_residual <= tolerance;

    let out = match format {
        Format::Csv => csv_string(
            &[
                "alpha",
                "beta",
                "gamma",
                "entangled",
                "sequential",
                "residual",
            ],
            rows.iter().map(|(a, b, g, c)| {
                [*a, *b, *g, c.entangled, c.sequential, c.residual]
                    .iter()
                    .map(|&x| format_sig12(x))
                    .collect()
            }),
        ),
        _ => {
            #[derive(Serialize)]
            struct Worst {
                alpha: f64,
                beta: f64,
                gamma: f64,
            }
            #[derive(Serialize)]
            struct Report {
                samples: usize,
                seed: u64,
                equal_settings: bool,
                tolerance: f64,
                max_residual: f64,
                holds: bool,
                worst: Worst,
            }
            let (alpha, beta, gamma, _) = rows[worst];
            toml_string(&Report {
                samples,
                seed,
                equal_settings,
                tolerance: sig12(tolerance),
                max_residual: sig12(max_residual),
                holds,
                worst: Worst {
                    alpha: sig12(alpha),
                    beta: sig12(beta),
                    gamma: sig12(gamma),
                },
            })
        }
    };
    let failure = (!holds).then(|| CliError::Duality {
        residual: format_sig12(max_residual),
        tolerance: format_sig12(tolerance),
    });
    Ok((out, failure))
}

fn slits(format: Format) -> String {
    let rows: Vec<_> = [SlitGeometry::WhichPath, SlitGeometry::Interference]
        .into_iter()
        .map(double_slit_demo)
        .collect();
    match format {
        Format::Fractions => rows
            .iter()
            .map(|r| {
                let g = r.geometry.label();
                format!("P(N=1|{g})={}\nP(N=2|{g})={}\n", r.one_slit, r.two_slits)
            })
            .collect(),
        Format::Csv => csv_string(
            &["geometry", "p_n1", "p_n2"],
            rows.iter().map(|r| {
                vec![
                    r.geometry.label().to_string(),
                    r.one_slit.to_string(),
                    r.two_slits.to_string(),
                ]
            }),
        ),
        Format::Text => {
            #[derive(Serialize)]
            struct Row {
                geometry: &'static str,
                p_n1: String,
                p_n2: String,
            }
            #[derive(Serialize)]
            struct Report {
                rows: Vec<Row>,
            }
            toml_string(&Report {
                rows: rows
                    .iter()
                    .map(|r| Row {
                        geometry: r.geometry.label(),
                        p_n1: r.one_slit.to_string(),
                        p_n2: r.two_slits.to_string(),
                    })
                    .collect(),
            })
        }
    }
}

fn dist(
    path: &Path,
    marginal: Option<&[u32]>,
    max_free_sites: Option<usize>,
    format: Format,
) -> Result<String, CliError> {
    let spec = GraphDocument::parse(&read(path)?)
        .and_then(|doc| doc.validate())
        .map_err(|e| document_error(path, e))?;
    let enumerator = match max_free_sites {
        Some(cap) => Enumerator::with_cap(cap)?,
        None => Enumerator::default(),
    };
    let mut d = enumerator.joint_distribution(&spec.graph, spec.beta, &spec.evidence)?;
    if let Some(keep) = marginal {
        let keep: Vec<Site> = keep.iter().map(|&s| Site(s)).collect();
        d = d.marginal(&keep)?;
    }
    Ok(match format {
        Format::Text => distribution_text(&d),
        Format::Csv => distribution_csv(&d),
        Format::Fractions => {
            if !d.is_exact() {
                return Err(needs_exact("this distribution"));
            }
            d.iter().map(|(c, p)| format!("P{c}={p}\n")).collect()
        }
    })
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    let result = match output {
        Some(path) => fs::write(path, text).map_err(|e| (path.display().to_string(), e)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| ("<stdout>".to_string(), e)),
    };
    result.map_err(|(path, source)| CliError::Io { path, source })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let output = cli.output.as_deref();
    match cli.command {
        Command::Fig1 => emit(output, &fig1(cli.format.unwrap_or(Format::Fractions))?),
        Command::Audit { file, preset } => {
            let tolerance = tolerance_or(cli.tolerance, AUDIT_TOLERANCE)?;
            let format = cli.format.unwrap_or(Format::Text);
            emit(output, &audit(file.as_deref(), preset, format, tolerance)?)
        }
        Command::Born { gamma, points } => {
            let (out, summary) = born(&gamma, points, cli.format.unwrap_or(Format::Csv))?;
            emit(output, &out)?;
            eprint!("{summary}");
            Ok(())
        }
        Command::Chsh { gamma } => emit(output, &chsh(&gamma, cli.format.unwrap_or(Format::Csv))?),
        Command::Dual {
            samples,
            seed,
            equal_settings,
        } => {
            let tolerance = tolerance_or(cli.tolerance, 1e-10)?;
            let format = cli.format.unwrap_or(Format::Text);
            let (out, failure) = dual(samples, seed, equal_settings, format, tolerance)?;
            emit(output, &out)?;
            failure.map_or(Ok(()), Err)
        }
        Command::Slits => emit(output, &slits(cli.format.unwrap_or(Format::Text))),
        Command::Dist {
            file,
            marginal,
            max_free_sites,
        } => {
            let format = cli.format.unwrap_or(Format::Text);
            emit(
                output,
                &dist(&file, marginal.as_deref(), max_free_sites, format)?,
            )
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
