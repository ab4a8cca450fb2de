//! `lsbmark`: embed, extract, attack, and evaluate image watermarks.
//!
//! Exit codes: 0 success, 1 usage error, 2 file/image error, 3 watermark
//! does not fit, 4 no watermark found.

mod report;

use std::env;
use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lsbmark::attacks::{AttackError, AttackSpec, Rect};
use lsbmark::codec::{self, CodecError, DEFAULT_DETECT_THRESHOLD};
use lsbmark::keystream::KeyError;
use lsbmark::metrics;
use lsbmark::pixmap::{self, PixmapError};
use lsbmark::{detect, embed, extract, ArgbImage, Method, SecretKey};
use report::{CaseRecord, Dims, EvaluationReport, Meta, PsnrDb};

#[derive(Parser)]
#[command(
    name = "lsbmark",
    version,
    about = "Blind spatial-domain image watermarking",
    after_help = "Keys come from --key, --key-file, or the LSBMARK_KEY environment \
                  variable, in that order. Prefix with 'hex:' for raw bytes."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hide a grayscale watermark in a PNG host image
    Embed {
        /// Host PNG
        host: PathBuf,
        /// Watermark image (PGM or grayscale PNG)
        watermark: PathBuf,
        /// Where to write the watermarked PNG
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Modified)]
        method: MethodArg,
        #[command(flatten)]
        key: KeyArgs,
    },
    /// Recover the watermark from an image using only the key
    Extract {
        /// Watermarked PNG
        image: PathBuf,
        /// Where to write the recovered watermark (PGM, or PNG by extension)
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Modified)]
        method: MethodArg,
        #[command(flatten)]
        key: KeyArgs,
    },
    /// Degrade an image with a parameterized attack
    Attack {
        /// Input PNG
        image: PathBuf,
        /// Attack spec: zero-lsb:k=N | crop:x=..,y=..,w=..,h=..,fill=.. |
        /// noise:amp=..,seed=..
        spec: String,
        /// Where to write the degraded PNG
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run both methods through a fixed attack grid and write a JSON report
    Evaluate {
        /// Host PNG
        host: PathBuf,
        /// Watermark image (PGM or grayscale PNG)
        watermark: PathBuf,
        /// Where to write the JSON report
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        key: KeyArgs,
    },
    /// Show how many payload bits an image can carry
    Capacity {
        /// Host PNG
        image: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Modified,
    Classic,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Modified => Method::Modified,
            MethodArg::Classic => Method::Classic,
        }
    }
}

// default_value_t renders through Display; stay in lockstep with the
// library's method names
impl fmt::Display for MethodArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Method::from(*self).fmt(f)
    }
}

#[derive(Args)]
struct KeyArgs {
    /// Secret key text
    #[arg(long, conflicts_with = "key_file")]
    key: Option<String>,
    /// File holding the key; one trailing newline is stripped
    #[arg(long)]
    key_file: Option<PathBuf>,
}

impl KeyArgs {
    fn resolve(&self) -> Result<SecretKey, CliError> {
        let text = if let Some(k) = &self.key {
            k.clone()
        } else if let Some(path) = &self.key_file {
            let raw = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read key file {}: {e}", path.display())))?;
            raw.strip_suffix("\r\n").or_else(|| raw.strip_suffix('\n')).unwrap_or(&raw).to_string()
        } else if let Ok(v) = env::var("LSBMARK_KEY") {
            v
        } else {
            return Err(CliError::Usage(
                "no key given: pass --key, --key-file, or set LSBMARK_KEY".to_string(),
            ));
        };
        Ok(SecretKey::parse(&text)?)
    }
}

enum CliError {
    Usage(String),
    Io(String),
    Capacity(String),
    NoWatermark(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::NoWatermark(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (CliError::Usage(m) | CliError::Io(m) | CliError::Capacity(m) | CliError::NoWatermark(m)) =
            self;
        f.write_str(m)
    }
}

impl From<PixmapError> for CliError {
    fn from(e: PixmapError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<KeyError> for CliError {
    fn from(e: KeyError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<AttackError> for CliError {
    fn from(e: AttackError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        let msg = e.to_string();
        match e {
            CodecError::WatermarkTooLarge { .. }
            | CodecError::DimensionsExceedHeader { .. }
            | CodecError::EmptyWatermark
            | CodecError::ReferenceTooLarge { .. } => CliError::Capacity(msg),
            CodecError::NoWatermarkFound | CodecError::HeaderExceedsCapacity { .. } => {
                CliError::NoWatermark(msg)
            }
            CodecError::ConstantReference => CliError::Usage(msg),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Embed { host, watermark, output, method, key } => {
            run_embed(&host, &watermark, &output, method.into(), &key)
        }
        Command::Extract { image, output, method, key } => {
            run_extract(&image, &output, method.into(), &key)
        }
        Command::Attack { image, spec, output } => run_attack(&image, &spec, &output),
        Command::Evaluate { host, watermark, output, key } => {
            run_evaluate(&host, &watermark, &output, &key)
        }
        Command::Capacity { image } => run_capacity(&image),
    }
}

fn format_psnr(psnr: f64) -> String {
    if psnr.is_infinite() {
        "inf".to_string()
    } else {
        format!("{psnr:.2}")
    }
}

fn run_embed(
    host: &PathBuf,
    watermark: &PathBuf,
    output: &PathBuf,
    method: Method,
    key: &KeyArgs,
) -> Result<(), CliError> {
    let host_img = pixmap::load_argb(host)?;
    let mark = pixmap::load_gray(watermark)?;
    let k = key.resolve()?;
    let marked = embed(&host_img, &mark, &k, method)?;
    let psnr = metrics::psnr(&host_img, &marked).expect("same dimensions by construction");
    pixmap::save_argb(&marked, output)?;
    println!("method: {method}");
    println!("capacity: {} bits", codec::capacity(&host_img, method));
    println!(
        "payload: {} bits ({}x{} watermark + 64-bit header)",
        64 + 8 * mark.pixel_count(),
        mark.width(),
        mark.height()
    );
    println!("psnr: {} dB", format_psnr(psnr));
    println!("wrote {}", output.display());
    Ok(())
}

fn run_extract(
    image: &PathBuf,
    output: &PathBuf,
    method: Method,
    key: &KeyArgs,
) -> Result<(), CliError> {
    let img = pixmap::load_argb(image)?;
    let k = key.resolve()?;
    let result = extract(&img, &k, method)?;
    pixmap::save_gray(&result.watermark, output)?;
    println!("watermark: {}x{}", result.watermark.width(), result.watermark.height());
    println!("header: ok");
    println!(
        "checksum: {}",
        if result.checksum_valid { "ok" } else { "MISMATCH (best-effort output)" }
    );
    println!("wrote {}", output.display());
    Ok(())
}

fn run_attack(image: &PathBuf, spec: &str, output: &PathBuf) -> Result<(), CliError> {
    let img = pixmap::load_argb(image)?;
    let spec: AttackSpec = spec.parse()?;
    let degraded = spec.apply(&img)?;
    pixmap::save_argb(&degraded, output)?;
    println!("applied {spec}");
    println!("wrote {}", output.display());
    Ok(())
}

fn run_capacity(image: &PathBuf) -> Result<(), CliError> {
    let img = pixmap::load_argb(image)?;
    println!("image: {}x{} ({} pixels)", img.width(), img.height(), img.pixel_count());
    for method in [Method::Modified, Method::Classic] {
        let bits = codec::capacity(&img, method);
        let pixels = method.max_watermark_pixels(img.pixel_count() as u64);
        println!("{method}: {bits} bits ({pixels} watermark pixels max)");
    }
    Ok(())
}

/// The fixed grid: every method against the clean image and four attacks.
fn attack_grid(host: &ArgbImage) -> Vec<Option<AttackSpec>> {
    vec![
        None,
        Some(AttackSpec::ZeroLsb { bits: 1 }),
        Some(AttackSpec::ZeroLsb { bits: 2 }),
        Some(AttackSpec::Crop {
            rect: Rect::centered_keep(host.width(), host.height(), 0.75),
            fill: 0,
        }),
        Some(AttackSpec::Noise { amplitude: 4, seed: 1 }),
    ]
}

fn run_evaluate(
    host: &PathBuf,
    watermark: &PathBuf,
    output: &PathBuf,
    key: &KeyArgs,
) -> Result<(), CliError> {
    let host_img = pixmap::load_argb(host)?;
    let mark = pixmap::load_gray(watermark)?;
    let k = key.resolve()?;

    let mut cases = Vec::new();
    for method in [Method::Classic, Method::Modified] {
        let marked = embed(&host_img, &mark, &k, method)?;
        for attack in attack_grid(&host_img) {
            let attacked = match &attack {
                None => marked.clone(),
                Some(spec) => spec.apply(&marked)?,
            };
            let psnr = metrics::psnr(&host_img, &attacked).expect("same dimensions");
            let header_valid = extract(&attacked, &k, method).is_ok();
            let forced =
                codec::decode_payload(&attacked, &k, method, mark.width(), mark.height())?;
            let ber = metrics::ber(mark.pixels(), forced.pixels()).expect("same pixel count");
            let d = detect(&attacked, &k, &mark, method, DEFAULT_DETECT_THRESHOLD)?;
            cases.push(CaseRecord {
                method: method.to_string(),
                attack: attack.map_or_else(|| "none".to_string(), |s| s.to_string()),
                psnr_db: PsnrDb(psnr),
                ber,
                nc: d.score,
                detected: d.detected,
                header_valid,
            });
        }
    }

    let report = EvaluationReport {
        meta: Meta {
            key_fingerprint: k.fingerprint(),
            host: Dims { width: host_img.width(), height: host_img.height() },
            watermark: Dims { width: mark.width(), height: mark.height() },
            detect_threshold: DEFAULT_DETECT_THRESHOLD,
        },
        cases,
    };
    let json = serde_json::to_string_pretty(&report)
        .expect("report serialization cannot fail");
    fs::write(output, json + "\n")
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", output.display())))?;

    println!(
        "{:<9} {:<28} {:>8} {:>7} {:>7}  {:<8} header",
        "method", "attack", "psnr_db", "ber", "nc", "detected"
    );
    for c in &report.cases {
        println!(
            "{:<9} {:<28} {:>8} {:>7.4} {:>7.4}  {:<8} {}",
            c.method,
            c.attack,
            format_psnr(c.psnr_db.0),
            c.ber,
            c.nc,
            if c.detected { "yes" } else { "no" },
            if c.header_valid { "ok" } else { "lost" }
        );
    }
    println!("report: {}", output.display());
    Ok(())
}
