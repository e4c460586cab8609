//! Argument parsing and subcommand dispatch for the `tanprimes` binary.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::asymptotics::{classical_main_term, compare_report};
use crate::circle::{circle_integral, sample_sum, SumKind};
use crate::error::{Error, Result};
use crate::exponents::exponent_chain;
use crate::repcount::{
    classical_table, count_classical, count_ternary_mitm, count_ternary_naive, find_binary, scan_band,
    write_reports_csv, RepReport,
};
use crate::selftest;
use crate::seqeval::ValueTable;
use crate::window::{solve_for_target, window_from_index, WindowParams};

pub const THREADS_ENV: &str = "TANPRIMES_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

const EXIT_HELP: &str = "\
Exit status:
  0  success
  1  a selftest check failed
  2  usage error
  3  domain error (parameters outside the supported range, ambiguous floors, ...)
  4  resource error (range, grid or band too large; i/o)";

#[derive(Parser, Debug, Clone, PartialEq)]
#[command(name = "tanprimes", version, about = "Windows, representation counts and circle-method numerics for [n^c tan^θ(log n)]", after_help = EXIT_HELP)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true, env = THREADS_ENV, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 20_240_601)]
    pub seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Print the window parameters.
    Window(WindowArgs),
    /// Count ternary representations of one target.
    Count {
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        target: TargetArgs,
        /// Use the triple loop instead of the pair map.
        #[arg(long)]
        naive: bool,
    },
    /// Count every target in a band around the target.
    Scan {
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        band: BandArgs,
    },
    /// Compare a band scan with the main term.
    Compare {
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        band: BandArgs,
    },
    /// Smallest prime pair with f(p1) + f(p2) = N.
    Binary {
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Ternary count for [p^c] with the classical main term.
    Classical {
        #[arg(long, default_value_t = 1.02)]
        c: f64,
        #[arg(long = "N", value_name = "N")]
        n: i64,
    },
    /// Sample S, Θ or A on the grid j/M, or integrate S³ over the full circle.
    Expsum {
        #[command(flatten)]
        window: WindowArgs,
        /// Which sum: S, theta or A.
        #[arg(long, default_value = "S")]
        kind: SumKind,
        /// Grid size M [default: 256, or 3 max f + 1 with --integral].
        #[arg(long)]
        grid: Option<usize>,
        /// Print the full-circle integral of S³ e(-Nα) at the target instead.
        #[arg(long)]
        integral: bool,
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Print the exponent chain.
    Exponents,
    /// Run the built-in consistency checks.
    Selftest,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct WindowArgs {
    /// Window index k, with log Δ1 = πk + π/4.
    #[arg(long, conflicts_with = "n", required_unless_present = "n")]
    pub k: Option<i64>,
    /// Canonical target N*; the window is solved for it.
    #[arg(long = "N", id = "n", value_name = "N")]
    pub n: Option<i64>,
    #[arg(long, default_value_t = 1.05)]
    pub c: f64,
    #[arg(long, default_value_t = 2.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Largest accepted distance of the solved window index from an integer.
    #[arg(long = "tol-k", default_value_t = 1e-6)]
    pub tol_k: f64,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct TargetArgs {
    /// Use the canonical target N* (the default).
    #[arg(long = "N-star", conflicts_with = "target")]
    pub n_star: bool,
    /// Explicit target inside the window.
    #[arg(long)]
    pub target: Option<i64>,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct BandArgs {
    /// Offsets LO:HI relative to the target.
    #[arg(long, allow_hyphen_values = true, default_value = "-100:100", value_parser = parse_band)]
    pub band: Band,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Band {
    pub lo: i64,
    pub hi: i64,
}

fn parse_band(s: &str) -> std::result::Result<Band, String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("`{s}` is not of the form LO:HI"))?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("lower offset `{lo}`: {e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("upper offset `{hi}`: {e}"))?;
    if lo > hi {
        return Err(format!("lower offset {lo} exceeds upper offset {hi}"));
    }
    Ok(Band { lo, hi })
}

/// Command-line parse failure, or a request for help or version text.
#[derive(Debug)]
pub struct UsageError(clap::Error);

impl UsageError {
    pub fn exit_code(&self) -> i32 {
        if self.0.use_stderr() {
            EXIT_USAGE
        } else {
            EXIT_OK
        }
    }

    pub fn message(&self) -> String {
        self.0.render().to_string()
    }
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message())
    }
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    RunConfig::try_parse_from(argv).map_err(UsageError)
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_resource() {
        EXIT_RESOURCE
    } else {
        EXIT_DOMAIN
    }
}

impl WindowArgs {
    pub fn resolve(&self) -> Result<WindowParams> {
        match (self.k, self.n) {
            (Some(k), _) => window_from_index(k, self.c, self.theta, self.epsilon),
            (None, Some(n)) => solve_for_target(n, self.c, self.theta, self.epsilon, self.tol_k),
            (None, None) => Err(Error::InvalidParameter("one of --k or --N is required".into())),
        }
    }
}

impl TargetArgs {
    fn resolve(&self, w: &WindowParams) -> i64 {
        self.target.unwrap_or(w.n_star)
    }
}

fn emit_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn warn_window(w: &WindowParams) {
    for msg in w.warnings() {
        eprintln!("warning: {msg}");
    }
}

#[derive(Serialize)]
struct Rows<'a, T> {
    window: &'a WindowParams,
    rows: &'a [T],
}

fn write_reports(format: Format, w: &WindowParams, reports: &[RepReport], out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => write_reports_csv(reports, out),
        Format::Json => emit_json(&Rows { window: w, rows: reports }, out),
    }
}

fn band_targets(w: &WindowParams, target: &TargetArgs, band: &BandArgs) -> (i64, i64) {
    let center = target.resolve(w);
    (center + band.band.lo, center + band.band.hi)
}

/// Run the configured subcommand, writing its output to `out`; returns the exit status.
pub fn execute_to(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let format = cfg.format;
    match &cfg.command {
        Command::Window(args) => {
            let w = args.resolve()?;
            warn_window(&w);
            match format {
                Format::Json => emit_json(&w, &mut *out)?,
                Format::Csv => {
                    let value = serde_json::to_value(w)?;
                    let mut wtr = csv_writer(&mut *out);
                    wtr.write_record(["field", "value"])?;
                    if let Some(map) = value.as_object() {
                        for (key, v) in map {
                            let text = match v {
                                serde_json::Value::Null => String::new(),
                                other => other.to_string(),
                            };
                            wtr.write_record([key.as_str(), text.as_str()])?;
                        }
                    }
                    wtr.flush()?;
                }
            }
        }
        Command::Count { window, target, naive } => {
            let w = window.resolve()?;
            warn_window(&w);
            let table = ValueTable::for_window(&w)?;
            let n = target.resolve(&w);
            let report = if *naive {
                count_ternary_naive(&table.entries, &table.logs, n)?
            } else {
                count_ternary_mitm(&table.entries, &table.logs, n)?
            };
            match format {
                Format::Csv => write_reports_csv(std::slice::from_ref(&report), &mut *out)?,
                Format::Json => emit_json(&report.with_window(&w), &mut *out)?,
            }
        }
        Command::Scan { window, target, band } => {
            let w = window.resolve()?;
            warn_window(&w);
            let table = ValueTable::for_window(&w)?;
            let (lo, hi) = band_targets(&w, target, band);
            let reports = scan_band(&table.entries, &table.logs, lo, hi)?;
            write_reports(format, &w, &reports, &mut *out)?;
        }
        Command::Compare { window, target, band } => {
            let w = window.resolve()?;
            warn_window(&w);
            let table = ValueTable::for_window(&w)?;
            let (lo, hi) = band_targets(&w, target, band);
            let reports = scan_band(&table.entries, &table.logs, lo, hi)?;
            let cmp = compare_report(&reports, &w)?;
            match format {
                Format::Csv => cmp.write_csv(&mut *out)?,
                Format::Json => emit_json(&cmp, &mut *out)?,
            }
            eprintln!("mean ratio {}, median ratio {}", cmp.mean_ratio, cmp.median_ratio);
        }
        Command::Binary { window, target } => {
            let w = window.resolve()?;
            warn_window(&w);
            let table = ValueTable::for_window(&w)?;
            let n = target.resolve(&w);
            let pair = find_binary(&table.entries, &table.logs, n)?;
            match format {
                Format::Csv => {
                    let mut wtr = csv_writer(&mut *out);
                    wtr.write_record(["N", "p1", "p2"])?;
                    let (p1, p2) = pair.map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
                    wtr.write_record([n.to_string(), p1, p2])?;
                    wtr.flush()?;
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct BinaryOut<'a> {
                        #[serde(rename = "N")]
                        n: i64,
                        pair: Option<(u64, u64)>,
                        window: &'a WindowParams,
                    }
                    emit_json(&BinaryOut { n, pair, window: &w }, &mut *out)?;
                }
            }
        }
        Command::Classical { c, n } => {
            let report = count_classical(*c, *n)?;
            let main = classical_main_term(*c, *n)?;
            let ratio = report.weighted / main;
            match format {
                Format::Csv => {
                    let mut wtr = csv_writer(&mut *out);
                    wtr.write_record(["N", "count", "weighted", "main_term", "ratio"])?;
                    wtr.write_record([
                        n.to_string(),
                        report.count.to_string(),
                        report.weighted.to_string(),
                        main.to_string(),
                        ratio.to_string(),
                    ])?;
                    wtr.flush()?;
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct ClassicalOut {
                        c: f64,
                        #[serde(rename = "N")]
                        n: i64,
                        primes: usize,
                        count: u64,
                        weighted: f64,
                        main_term: f64,
                        ratio: f64,
                    }
                    let primes = classical_table(*c, *n)?.len();
                    emit_json(
                        &ClassicalOut {
                            c: *c,
                            n: *n,
                            primes,
                            count: report.count,
                            weighted: report.weighted,
                            main_term: main,
                            ratio,
                        },
                        out,
                    )?;
                }
            }
        }
        Command::Expsum { window, kind, grid, integral, target } => {
            let w = window.resolve()?;
            warn_window(&w);
            if *integral {
                let table = ValueTable::for_window(&w)?;
                let n = target.resolve(&w);
                let m = grid.unwrap_or(3 * table.max_f().unwrap_or(0) as usize + 1);
                let ci = circle_integral(&table.entries, &table.logs, n, (0.0, 1.0), m)?;
                if ci.grid_too_coarse {
                    eprintln!("warning: grid {m} does not exceed 3 max f; the sum may alias");
                }
                match format {
                    Format::Csv => {
                        let mut wtr = csv_writer(&mut *out);
                        wtr.write_record(["N", "grid", "re", "im"])?;
                        wtr.write_record([n.to_string(), m.to_string(), ci.value.re.to_string(), ci.value.im.to_string()])?;
                        wtr.flush()?;
                    }
                    Format::Json => {
                        #[derive(Serialize)]
                        struct IntegralOut<'a> {
                            #[serde(rename = "N")]
                            n: i64,
                            grid: usize,
                            re: f64,
                            im: f64,
                            grid_too_coarse: bool,
                            window: &'a WindowParams,
                        }
                        emit_json(
                            &IntegralOut {
                                n,
                                grid: m,
                                re: ci.value.re,
                                im: ci.value.im,
                                grid_too_coarse: ci.grid_too_coarse,
                                window: &w,
                            },
                            out,
                        )?;
                    }
                }
            } else {
                let rep = sample_sum(&w, *kind, grid.unwrap_or(256))?;
                match format {
                    Format::Csv => rep.write_csv(&mut *out)?,
                    Format::Json => emit_json(&rep, &mut *out)?,
                }
            }
        }
        Command::Exponents => {
            let chain = exponent_chain();
            match format {
                Format::Csv => chain.write_csv(&mut *out)?,
                Format::Json => emit_json(&chain, &mut *out)?,
            }
        }
        Command::Selftest => {
            let checks = selftest::run_all(cfg.seed)?;
            let mut all = true;
            for check in &checks {
                writeln!(out, "{check}")?;
                all &= check.passed;
            }
            out.flush()?;
            return Ok(if all { EXIT_OK } else { EXIT_FAILED_CHECK });
        }
    }
    out.flush()?;
    Ok(EXIT_OK)
}

/// Run with the configured thread count and output destination.
pub fn execute(cfg: &RunConfig) -> Result<i32> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t as usize);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Io(format!("thread pool: {e}")))?;
    pool.install(|| match &cfg.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            execute_to(cfg, &mut file)
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            execute_to(cfg, &mut lock)
        }
    })
}

/// Parse, execute and report errors; returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match parse_args(argv) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = e.exit_code();
            if code == EXIT_OK {
                print!("{}", e.message());
            } else {
                eprint!("{}", e.message());
            }
            return code;
        }
    };
    match execute(&cfg) {
        Ok(code) => code,
        // downstream closed early, e.g. `| head`
        Err(Error::Io(msg)) if msg.contains("Broken pipe") => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &str) -> std::result::Result<RunConfig, UsageError> {
        parse_args(std::iter::once("tanprimes").chain(args.split_whitespace()))
    }

    fn run_to_string(args: &str) -> String {
        let cfg = parse(args).unwrap();
        let mut buf = Vec::new();
        assert_eq!(execute_to(&cfg, &mut buf).unwrap(), EXIT_OK);
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn count_with_n_star() {
        let cfg = parse("count --k 2 --c 1.05 --theta 2 --N-star").unwrap();
        match cfg.command {
            Command::Count { window, target, naive } => {
                assert_eq!(window.k, Some(2));
                assert_eq!(window.n, None);
                assert!(target.n_star && !naive);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn selectors_are_exclusive() {
        let e = parse("count --k 2 --N 100").unwrap_err();
        assert_eq!(e.exit_code(), EXIT_USAGE);
        assert!(e.message().contains("--N"), "{}", e.message());
        let e = parse("count --c 1.05").unwrap_err();
        assert_eq!(e.exit_code(), EXIT_USAGE);
        assert!(e.message().contains("--k"));
        assert!(parse("count --k 2 --N-star --target 9000").is_err());
    }

    #[test]
    fn exponents_needs_no_flags() {
        assert_eq!(parse("exponents").unwrap().command, Command::Exponents);
        assert!(parse("selftest").is_ok());
    }

    #[test]
    fn band_parsing() {
        let cfg = parse("compare --k 3 --c 1.02 --theta 1.5 --band -100:100").unwrap();
        match cfg.command {
            Command::Compare { band, .. } => assert_eq!(band.band, Band { lo: -100, hi: 100 }),
            other => panic!("{other:?}"),
        }
        let e = parse("scan --k 2 --band 5:-5").unwrap_err();
        assert!(e.message().contains("--band"));
        assert!(parse("scan --k 2 --band 5").is_err());
        assert_eq!(parse_band("-3:-1").unwrap(), Band { lo: -3, hi: -1 });
    }

    #[test]
    fn help_and_threads() {
        let e = parse("--help").unwrap_err();
        assert_eq!(e.exit_code(), EXIT_OK);
        for sub in ["window", "count", "scan", "compare", "binary", "classical", "expsum", "exponents", "selftest"] {
            assert!(e.message().contains(sub), "{sub} missing from help");
        }
        assert!(parse("exponents --threads 0").is_err());
        assert_eq!(parse("exponents --threads 3").unwrap().threads, Some(3));
    }

    #[test]
    fn window_json() {
        let text = run_to_string("window --k 3 --c 1.02 --theta 1.5 --format json");
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["k"], 3);
        assert_eq!(v["n_star"], 130_913);
        let csv = run_to_string("window --k 2");
        assert!(csv.starts_with("field,value\n"));
        assert!(csv.contains("\nn_star,9378\n"));
    }

    #[test]
    fn count_outputs() {
        let text = run_to_string("count --k 0 --c 1.05 --theta 2 --target 36");
        assert_eq!(text, "N,count,weighted\n36,1,1.3259689601439075\n");
        let naive = run_to_string("count --k 0 --target 36 --naive");
        assert_eq!(naive, text);
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::TooLarge("x".into())), EXIT_RESOURCE);
        assert_eq!(exit_code(&Error::DomainError(5)), EXIT_DOMAIN);
        let cfg = parse("window --k 2 --c 0.5").unwrap();
        let err = execute_to(&cfg, &mut Vec::new()).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_DOMAIN);
    }
}
