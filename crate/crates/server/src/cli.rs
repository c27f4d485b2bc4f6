//! `sashimi extract | generate | serve`.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sashimi_core::generators::{assign_marks, matern_ii, poisson_csr, thomas_cluster};
use sashimi_core::pipeline::{AnalysisConfig, Family, MAX_TYPES};
use sashimi_core::{parse_csv, CellType, Error, MarkedPointPattern, ObservationWindow};

use crate::artifacts::{compute, resolve_types};
use crate::service::{self, ServiceConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_COMPUTE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sashimi", version, about = "Spatial features for multiplexed tissue images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the feature table, curves and manifest for one or more images.
    Extract(ExtractArgs),
    /// Simulate a marked point pattern and write it as x,y,type CSV.
    Generate(GenerateArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FeatureArg {
    All,
    Summaries,
    Areal,
    Topology,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rmax {
    Auto,
    Value(f64),
}

impl FromStr for Rmax {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Rmax::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(Rmax::Value(v)),
            _ => Err(format!("expected `auto` or a positive number, got {s:?}")),
        }
    }
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Input CSV with x,y,type rows; repeat for several images.
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    /// Up to three cell types, comma separated. Defaults to the labels in the input.
    #[arg(long, value_delimiter = ',')]
    types: Option<Vec<String>>,
    #[arg(long, value_enum, value_delimiter = ',')]
    features: Option<Vec<FeatureArg>>,
    /// Quadrats per window side.
    #[arg(long)]
    grid: Option<usize>,
    /// Number of distance grid points.
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    rmax: Option<Rmax>,
    #[arg(long)]
    seed: Option<u64>,
    /// Feature table path; manifest.json is written next to it.
    #[arg(long, default_value = "features.csv")]
    out: PathBuf,
    /// Directory for per-image curves and persistence diagrams.
    #[arg(long)]
    curves_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// JSON analysis config; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Process {
    Csr,
    Thomas,
    Matern,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = Process::Csr)]
    process: Process,
    /// Points per unit area (parents for thomas, proposals for matern).
    #[arg(long)]
    intensity: f64,
    #[arg(long, default_value_t = 1000.0)]
    width: f64,
    #[arg(long, default_value_t = 1000.0)]
    height: f64,
    /// Labels with relative weights, e.g. `tumor:2,immune:1`.
    #[arg(long, value_delimiter = ',', default_value = "a")]
    types: Vec<String>,
    /// Mean offspring per parent (thomas).
    #[arg(long, default_value_t = 10.0)]
    offspring: f64,
    /// Offspring displacement standard deviation (thomas).
    #[arg(long, default_value_t = 10.0)]
    sigma: f64,
    /// Hard-core distance (matern).
    #[arg(long, default_value_t = 5.0)]
    hardcore: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "SASHIMI_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "SASHIMI_HOST", default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Upload size limit in bytes.
    #[arg(long, env = "SASHIMI_MAX_UPLOAD", default_value_t = service::DEFAULT_MAX_UPLOAD)]
    max_upload: usize,
    /// Concurrent extraction jobs; defaults to the hardware parallelism.
    #[arg(long, env = "SASHIMI_WORKERS")]
    workers: Option<usize>,
    #[arg(long, env = "SASHIMI_DATA_DIR", default_value = "sashimi-data")]
    data_dir: PathBuf,
    /// Directory with the web UI assets.
    #[arg(long, env = "SASHIMI_STATIC_DIR")]
    static_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 24)]
    retention_hours: u64,
    #[arg(long, default_value_t = service::DEFAULT_MAX_POINTS)]
    max_points: usize,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    fn from_core(e: Error) -> Self {
        let code = match e {
            Error::BadConfig(_) => EXIT_USAGE,
            ref e if e.is_input_error() => EXIT_INPUT,
            _ => EXIT_COMPUTE,
        };
        Self::new(code, e.to_string())
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let res = match cli.command {
        Command::Extract(a) => extract(a),
        Command::Generate(a) => generate(a),
        Command::Serve(a) => serve(a),
    };
    match res {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn build_config(a: &ExtractArgs) -> Result<AnalysisConfig, Failure> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str::<AnalysisConfig>(&text)
                .map_err(|e| Failure::new(EXIT_USAGE, format!("invalid config {}: {e}", path.display())))?
        }
        None => AnalysisConfig::default(),
    };
    if let Some(types) = &a.types {
        if types.len() > MAX_TYPES {
            return Err(Failure::new(EXIT_USAGE, format!("at most three types can be selected, got {}", types.len())));
        }
        cfg.selected_types =
            types.iter().map(CellType::new).collect::<Result<_, _>>().map_err(Failure::from_core)?;
    }
    if let Some(fs) = &a.features {
        cfg.feature_families = if fs.contains(&FeatureArg::All) {
            Family::ALL.into_iter().collect()
        } else {
            fs.iter()
                .map(|f| match f {
                    FeatureArg::Summaries => Family::Summaries,
                    FeatureArg::Areal => Family::Areal,
                    _ => Family::Topology,
                })
                .collect()
        };
    }
    if let Some(q) = a.grid {
        cfg.q = q;
    }
    if let Some(b) = a.bins {
        cfg.bins = b;
    }
    match a.rmax {
        Some(Rmax::Auto) => cfg.rmax = None,
        Some(Rmax::Value(v)) => cfg.rmax = Some(v),
        None => {}
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn image_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "image".into())
}

fn write(path: &Path, bytes: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::new(EXIT_IO, format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn extract(a: ExtractArgs) -> Result<(), Failure> {
    let mut cfg = build_config(&a)?;
    let mut patterns: Vec<(String, MarkedPointPattern)> = Vec::with_capacity(a.input.len());
    for path in &a.input {
        let bytes = std::fs::read(path)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))?;
        let pattern = parse_csv(&bytes, usize::MAX)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
        let id = image_id(path);
        if patterns.iter().any(|(n, _)| *n == id) {
            return Err(Failure::new(EXIT_USAGE, format!("two inputs share the image id {id:?}")));
        }
        patterns.push((id, pattern));
    }
    resolve_types(&mut cfg, &patterns).map_err(Failure::from_core)?;
    cfg.validate().map_err(Failure::from_core)?;
    let arts = compute(&patterns, &cfg, &|_| {}).map_err(Failure::from_core)?;

    write(&a.out, if a.format == Format::Csv { &arts.features_csv } else { &arts.features_json })?;
    let manifest = a.out.with_file_name("manifest.json");
    write(&manifest, &arts.manifest_json)?;
    if let Some(dir) = &a.curves_out {
        for img in &arts.images {
            write(&dir.join(format!("{}.curves.json", img.image)), &img.curves_json)?;
            write(&dir.join(format!("{}.diagram.csv", img.image)), &img.diagram_csv)?;
        }
    }
    println!("{}", manifest.display());
    Ok(())
}

fn parse_label_weights(specs: &[String]) -> Result<Vec<(CellType, f64)>, Failure> {
    specs
        .iter()
        .map(|s| {
            let (label, w) = match s.rsplit_once(':') {
                Some((l, w)) => {
                    let w = w
                        .parse::<f64>()
                        .map_err(|_| Failure::new(EXIT_USAGE, format!("bad weight in {s:?}")))?;
                    (l, w)
                }
                None => (s.as_str(), 1.0),
            };
            Ok((CellType::new(label).map_err(Failure::from_core)?, w))
        })
        .collect()
}

fn generate(a: GenerateArgs) -> Result<(), Failure> {
    let usage = |e: Error| Failure::new(EXIT_USAGE, e.to_string());
    let window = ObservationWindow::new(0.0, a.width, 0.0, a.height).map_err(usage)?;
    let labels = parse_label_weights(&a.types)?;
    let points = match a.process {
        Process::Csr => poisson_csr(a.intensity, &window, a.seed),
        Process::Thomas => thomas_cluster(a.intensity, a.offspring, a.sigma, &window, a.seed),
        Process::Matern => matern_ii(a.intensity, a.hardcore, &window, a.seed),
    }
    .map_err(usage)?;
    let pattern = assign_marks(points, &labels, window, a.seed).map_err(usage)?;
    let csv = pattern.to_csv();
    match &a.out {
        Some(path) => write(path, &csv),
        None => std::io::stdout()
            .lock()
            .write_all(csv.as_bytes())
            .map_err(|e| Failure::new(EXIT_IO, e.to_string())),
    }
}

fn serve(a: ServeArgs) -> Result<(), Failure> {
    let cfg = ServiceConfig {
        max_upload: a.max_upload,
        workers: a.workers.unwrap_or_else(service::default_workers),
        data_dir: a.data_dir,
        static_dir: a.static_dir,
        retention: Duration::from_secs(a.retention_hours * 3600),
        max_points: a.max_points,
    };
    let addr = SocketAddr::new(a.host, a.port);
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    rt.block_on(async move {
        let (bound, handle) = service::start(cfg, addr).await?;
        eprintln!("listening on http://{bound}");
        handle.await.map_err(std::io::Error::other)?
    })
    .map_err(|e| Failure::new(EXIT_IO, e.to_string()))
}
