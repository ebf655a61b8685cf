mod parse;
mod report;
mod verify;

use clap::{Parser, Subcommand, ValueEnum};
use lightcone::counting::{count_sharp, count_smoothed, Bump};
use lightcone::eisenstein::{
    cusp_volume_vp1, eisenstein_direct, fourier_eval, omega, r_closed, r_series, volume_closed, FormParams,
    HalfSpacePoint, TruncationConfig,
};
use lightcone::{Complex64, Error};
use report::{Record, RunReport};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lightcone", version, about = "Light-cone Eisenstein series: evaluation, checks and tables")]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Print the report as CSV.
    #[arg(long, global = true)]
    csv: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate E(s, z) by its Fourier expansion, and by the direct sum when it converges.
    Eval {
        #[arg(short, long)]
        n: usize,
        #[arg(short, long, default_value_t = 1)]
        d: u64,
        /// Complex s as a+bi.
        #[arg(short, long, allow_hyphen_values = true)]
        s: String,
        /// The point z as x1,...,xn,y.
        #[arg(short, long, allow_hyphen_values = true)]
        z: String,
        /// Cap on ‖λ‖ in the Fourier series.
        #[arg(long)]
        lambda_bound: Option<f64>,
        /// Largest height v_{n+2} in the direct sum.
        #[arg(long)]
        height: Option<u64>,
    },
    /// Run a verification battery.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Regenerate a table of constants.
    Table {
        #[arg(value_enum)]
        which: Table,
        /// Number of terms in the R-series.
        #[arg(long, default_value_t = 2000)]
        qmax: usize,
    },
    /// Count primitive points of height at most T.
    Count {
        #[arg(short, long, default_value_t = 1)]
        n: usize,
        #[arg(short, long, default_value_t = 1)]
        d: u64,
        /// One or more heights, comma-separated.
        #[arg(short = 'T', long = "T")]
        t: String,
        /// Use the smooth bump cutoff instead of the sharp one.
        #[arg(long)]
        smoothed: bool,
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Expsums,
    Localzeta,
    Lfunc,
    Funceq,
    Poles,
    Identities,
    Counting,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    Omega,
    CuspVolume,
    RSeries,
}

/// Failures that end the run before a report exists; all map to exit code 2.
enum Fail {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval {
            n,
            d,
            s,
            z,
            lambda_bound,
            height,
        } => cmd_eval(n, d, &s, &z, lambda_bound, height),
        Command::Verify { suite } => cmd_verify(suite),
        Command::Table { which, qmax } => cmd_table(which, qmax),
        Command::Count {
            n,
            d,
            t,
            smoothed,
            a,
            b,
        } => cmd_count(n, d, &t, smoothed.then_some((a, b))),
    };
    let mut report = match result {
        Ok(r) => r,
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Fail::Lib(e @ Error::Pole { .. })) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
        Err(Fail::Lib(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    report.sanitize();
    if cli.json {
        println!("{}", report.to_json());
    } else if cli.csv {
        if let Err(e) = report.write_csv(std::io::stdout()) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    } else {
        print!("{}", report.to_text());
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn complex_record(name: &str, v: Complex64) -> Record {
    Record::new(name).with("re", v.re).with("im", v.im)
}

fn cmd_eval(n: usize, d: u64, s: &str, z: &str, lambda_bound: Option<f64>, height: Option<u64>) -> Result<RunReport, Fail> {
    let params = FormParams::new(n, d)?;
    let s = parse::complex(s).map_err(Fail::Usage)?;
    let mut coords = parse::reals(z).map_err(Fail::Usage)?;
    if coords.len() != n + 1 {
        return Err(Fail::Usage(format!("z needs n + 1 = {} coordinates, got {}", n + 1, coords.len())));
    }
    let y = coords.pop().unwrap_or_default();
    let point = HalfSpacePoint::new(coords, y)?;
    let mut cfg = TruncationConfig::default();
    if let Some(b) = lambda_bound {
        if !(b > 0.0) {
            return Err(Fail::Usage("--lambda-bound must be positive".into()));
        }
        cfg.lambda_norm_bound = b;
    }
    if let Some(h) = height {
        cfg.direct_height_bound = h;
    }

    let mut report = RunReport::new("eval");
    report.param("n", n);
    report.param("d", d);
    report.param("s", s);
    report.param("z", z);

    let f = fourier_eval(&params, s, &point, &cfg)?;
    report.results.push(
        complex_record("fourier", f.value)
            .with("lambda_bound", f.lambda_bound)
            .with("terms", f.terms as f64)
            .with("classes", f.classes as f64)
            .with("tail_estimate", f.tail_estimate),
    );
    if s.re > n as f64 {
        match eisenstein_direct(&params, s, &point, &cfg) {
            Ok(direct) => {
                let diff = (f.value - direct.value).norm() / direct.value.norm().max(1e-300);
                report.results.push(
                    complex_record("direct", direct.value)
                        .with("cutoff", direct.cutoff)
                        .with("points", direct.points as f64)
                        .with("tail_estimate", direct.tail_estimate),
                );
                report.results.push(Record::new("comparison").with("relative_difference", diff));
            }
            // the direct path needs a margin beyond Re s > n
            Err(Error::Divergent(_)) => report.param("direct", "skipped: Re(s) too close to n"),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(report)
}

fn cmd_verify(suite: Suite) -> Result<RunReport, Fail> {
    let name = suite.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let mut report = RunReport::new("verify");
    report.param("suite", &name);
    verify::run(&name, &mut report)?;
    Ok(report)
}

fn cmd_table(which: Table, qmax: usize) -> Result<RunReport, Fail> {
    let mut report = RunReport::new("table");
    match which {
        Table::Omega | Table::CuspVolume => {
            report.param("which", if matches!(which, Table::Omega) { "omega" } else { "cusp-volume" });
            for n in 1..=12 {
                let w = omega(&FormParams::new(n, 1)?)?;
                let vol = volume_closed(n).unwrap_or(f64::NAN);
                let (num, den) = cusp_volume_vp1(n);
                report.results.push(
                    Record::new(format!("n={n}"))
                        .with("n", n as f64)
                        .with("omega", w)
                        .with("volume", vol)
                        .with("volume_times_omega", vol * w)
                        .with("vp1_num", num as f64)
                        .with("vp1_den", den as f64)
                        .with("vp1", num as f64 / den as f64),
                );
            }
        }
        Table::RSeries => {
            report.param("which", "R-series");
            report.param("qmax", qmax);
            if qmax == 0 {
                return Err(Fail::Usage("--qmax must be positive".into()));
            }
            // R_8 has a pole at s = 7
            for (k, s) in [(2usize, 5.0), (3, 5.0), (4, 5.0), (6, 7.0), (8, 9.0)] {
                let sc = Complex64::new(s, 0.0);
                let closed = r_closed(k, sc)?;
                let series = r_series(k, sc, qmax)?;
                let diff = (series.value - closed).norm() / closed.norm();
                report.results.push(
                    Record::new(format!("k={k} s={s}"))
                        .with("k", k as f64)
                        .with("s", s)
                        .with("closed", closed.re)
                        .with("series", series.value.re)
                        .with("tail", series.tail.re)
                        .with("relative_difference", diff),
                );
            }
        }
    }
    Ok(report)
}

fn cmd_count(n: usize, d: u64, t: &str, smoothed: Option<(f64, f64)>) -> Result<RunReport, Fail> {
    let params = FormParams::new(n, d)?;
    let ts = parse::reals(t).map_err(Fail::Usage)?;
    if let Some(bad) = ts.iter().find(|&&t| t < 0.0) {
        return Err(Fail::Usage(format!("T = {bad} must be non-negative")));
    }
    let mut report = RunReport::new("count");
    report.param("n", n);
    report.param("d", d);
    report.param("T", t);
    match smoothed {
        None => {
            report.param("cutoff", "sharp");
            for &t in &ts {
                let r = count_sharp(&params, t)?;
                report.results.push(verify::count_record(&format!("T={t}"), &r));
            }
        }
        Some((a, b)) => {
            let h = Bump::new(a, b)?;
            report.param("cutoff", format!("smoothed [{a}, {b}]"));
            for &t in &ts {
                let (v, main) = count_smoothed(&params, &h, t)?;
                let err = if main > 0.0 { (v - main).abs() / main } else { 0.0 };
                report.results.push(
                    Record::new(format!("T={t}"))
                        .with("T", t)
                        .with("count", v)
                        .with("main_term", main)
                        .with("relative_error", err),
                );
            }
        }
    }
    Ok(report)
}
