//! Command-line front end. Every subcommand writes CSV (with header) or JSON
//! Lines to standard output and diagnostics to standard error. Output is a
//! function of the arguments alone: parallel work is collected in input
//! order and every sampled quantity is driven by `--seed`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::class_numbers::{deuring_count, hurwitz, HurwitzTable};
use crate::curves::{collect_curves, enumerate_curves, CurveModel, HeightBound};
use crate::error::{Error, Result};
use crate::galois_image::{classify_image_with, FieldSpec, ImageStatus, ImageTarget, TklStatus};
use crate::ingest::{load_rank_csv, RankTable, SHA_PROVENANCE};
use crate::matgroup::{count_trace_det, delta_density, sl2_order, DensityParams};
use crate::primes::{is_prime, primes_up_to};
use crate::sieve_stats::{curve_count_check, fitted_exponent, t_a_density_curve, variance_stat};
use crate::stability::{census_from_reports, DsVerdict, StabilityChecker, StabilityReport};
use crate::store::TraceCache;
use crate::traces::{batch_trace_census, TraceContext};
use crate::Rational;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "dstab",
    version,
    about = "Elliptic curve statistics and diophantine-stability checks"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Height parameter(s) X; curves satisfy |A| <= X^2, |B| <= X^3.
    #[arg(long = "X", global = true, value_delimiter = ',', num_args = 1..)]
    pub x: Vec<u64>,

    #[arg(long, global = true, default_value_t = 5)]
    pub ell: u64,

    /// Prime bound B for trace sampling and sweeps.
    #[arg(long, global = true, default_value_t = 1000)]
    pub prime_bound: u64,

    /// Degree of K.
    #[arg(long, global = true, default_value_t = 2)]
    pub degree: u64,

    /// Degree of the Galois closure of K over Q.
    #[arg(long, global = true)]
    pub closure_degree: Option<u64>,

    #[arg(long, global = true, default_value_t = 1)]
    pub t1: u64,

    #[arg(long, global = true, default_value_t = 2)]
    pub t2: u64,

    #[arg(long, global = true, default_value_t = 1)]
    pub d: u64,

    #[arg(long, global = true, default_value_t = 100_000)]
    pub samples: u64,

    /// Required by every subcommand that samples.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Trace cache file (read, merged and rewritten by `trace`).
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,

    /// External rank table with header `A,B,rank`.
    #[arg(long, global = true)]
    pub ranks: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// List C(X) in lexicographic order.
    Enumerate,
    /// Traces of C(X) at 5 <= p <= B, into --cache or as CSV.
    Trace,
    /// Compare the trace census with the class-number prediction for 5 <= p <= B.
    Census,
    /// Hurwitz class numbers H(n) for --n, or partial sums over 5 <= p <= B.
    Hurwitz {
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        n: Vec<i64>,
    },
    /// δ(t, d, ℓ) for every t and d != 0 against the matrix count.
    Delta,
    /// Classify the mod-ℓ image for every curve in C(X).
    Image,
    /// Stability reports for C(X), or with --summary the census row.
    Stability {
        #[arg(long)]
        summary: bool,
    },
    /// Variance statistic for each X.
    Sieve,
    /// Proxy ratio against X for a reference curve (default: first of C(1)).
    Decay {
        /// Reference curve as `A,B`.
        #[arg(long = "curve", value_delimiter = ',', allow_hyphen_values = true)]
        curve: Vec<i64>,
    },
    /// #C(X) against C_1 X^5.
    Countcheck,
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.ell < 5 || !is_prime(self.ell) {
            return Err(Error::UnsupportedPrime(self.ell));
        }
        if self.d.is_multiple_of(self.ell) {
            return Err(Error::ZeroResidue(self.d as i64));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("--threads must be positive".into()));
        }
        Ok(())
    }

    fn heights(&self) -> Result<Vec<u64>> {
        if self.x.is_empty() {
            return Err(Error::InvalidConfig("--X is required".into()));
        }
        Ok(self.x.clone())
    }

    fn height(&self) -> Result<HeightBound> {
        match self.heights()?.as_slice() {
            [x] => HeightBound::new(*x),
            _ => Err(Error::InvalidConfig("this subcommand takes a single --X".into())),
        }
    }

    fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidConfig("--seed is required for sampling".into()))
    }

    fn field(&self) -> Result<FieldSpec> {
        FieldSpec::new(self.degree, self.closure_degree)
    }
}

fn write_rows<W: Write, T: Serialize>(out: &mut W, format: Format, rows: impl IntoIterator<Item = T>) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            for row in rows {
                w.serialize(row).map_err(|e| Error::Io(e.into()))?;
            }
            w.flush()?;
        }
        Format::Json => {
            for row in rows {
                serde_json::to_writer(&mut *out, &row).map_err(|e| Error::Io(e.into()))?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CensusRow {
    p: u64,
    a: i64,
    census: u64,
    deuring: u64,
    #[serde(rename = "match")]
    matches: bool,
}

#[derive(Serialize)]
struct HurwitzRow {
    n: u64,
    #[serde(rename = "H")]
    h: String,
    six_h: u64,
}

#[derive(Serialize)]
struct DeltaRow {
    ell: u64,
    t: u64,
    d: u64,
    delta: String,
    count: u64,
    sl2_order: u64,
    #[serde(rename = "match")]
    matches: bool,
}

#[derive(Serialize)]
struct ImageRow {
    #[serde(rename = "A")]
    a: i64,
    #[serde(rename = "B")]
    b: i64,
    ell: u64,
    status: ImageStatus,
    target: ImageTarget,
    split: Option<u64>,
    nonsplit: Option<u64>,
    exceptional: Option<u64>,
    determinant: String,
}

#[derive(Serialize)]
struct StabilityRow {
    #[serde(rename = "A")]
    a: i64,
    #[serde(rename = "B")]
    b: i64,
    ell: u64,
    image: ImageStatus,
    t_kl: TklStatus,
    ds_verdict: DsVerdict,
    rank: Option<u32>,
}

#[derive(Serialize)]
struct SummaryRow {
    #[serde(rename = "X")]
    x: u64,
    ell: u64,
    members: u64,
    ds_satisfied: u64,
    rank1_ds: u64,
    total: u64,
}

#[derive(Serialize)]
struct SieveRow {
    #[serde(rename = "X")]
    x: u64,
    ell: u64,
    t1: u64,
    t2: u64,
    d: u64,
    delta: String,
    pi: u64,
    #[serde(rename = "V")]
    v: f64,
    #[serde(rename = "V_over_X")]
    v_over_x: f64,
    pairs: u64,
    exhaustive: bool,
}

#[derive(Serialize)]
struct DecayRow {
    #[serde(rename = "X")]
    x: u64,
    members: u64,
    total: u64,
    ratio: f64,
}

#[derive(Serialize)]
struct CountRow {
    #[serde(rename = "X")]
    x: u64,
    count: u64,
    main_term: f64,
    relative_error: f64,
}

/// Runs one configured subcommand.
pub fn run<W: Write, E: Write>(cfg: &RunConfig, out: &mut W, err: &mut E) -> Result<()> {
    cfg.validate()?;
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            // writers need not be Send, so buffer inside the pool
            let (mut buf_out, mut buf_err) = (Vec::new(), Vec::new());
            let res = pool.install(|| dispatch(cfg, &mut buf_out, &mut buf_err));
            out.write_all(&buf_out)?;
            err.write_all(&buf_err)?;
            res
        }
        None => dispatch(cfg, out, err),
    }
}

fn dispatch<W: Write, E: Write>(cfg: &RunConfig, out: &mut W, err: &mut E) -> Result<()> {
    let fmt = cfg.format;
    match &cfg.command {
        Command::Enumerate => write_rows(out, fmt, enumerate_curves(cfg.height()?)),
        Command::Trace => {
            let bound = cfg.height()?;
            let curves = collect_curves(bound);
            let mut cache = TraceCache::build(&curves, bound.x(), cfg.prime_bound)?;
            match &cfg.cache {
                Some(path) => {
                    if path.exists() {
                        cache = TraceCache::load(path)?.merge(&cache)?;
                    }
                    cache.save(path)?;
                    writeln!(err, "cache {}: {} entries", path.display(), cache.len())?;
                    Ok(())
                }
                None => cache.write_csv(out),
            }
        }
        Command::Census => {
            let mut rows = Vec::new();
            for p in primes_up_to(cfg.prime_bound).into_iter().filter(|&p| p >= 5) {
                let census = batch_trace_census(p)?;
                for (&a, &count) in &census {
                    let deuring = deuring_count(p, a)?;
                    rows.push(CensusRow {
                        p,
                        a,
                        census: count,
                        deuring,
                        matches: count == deuring,
                    });
                }
            }
            write_rows(out, fmt, rows)
        }
        Command::Hurwitz { n } if !n.is_empty() => {
            let rows = n
                .iter()
                .map(|&n| {
                    let h = hurwitz(n)?;
                    Ok(HurwitzRow {
                        n: h.n,
                        h: h.value().to_string(),
                        six_h: h.six_h,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            write_rows(out, fmt, rows)
        }
        Command::Hurwitz { .. } => {
            let table = HurwitzTable::new(4 * cfg.prime_bound);
            let mut rows = Vec::new();
            for p in primes_up_to(cfg.prime_bound)
                .into_iter()
                .filter(|&p| p >= 5 && p != cfg.ell)
            {
                for t in 0..cfg.ell {
                    rows.push(table.partial_sum(p, t, cfg.ell)?);
                }
            }
            write_rows(out, fmt, rows)
        }
        Command::Delta => {
            let ell = cfg.ell;
            let order = sl2_order(ell);
            let mut rows = Vec::new();
            for d in 1..ell {
                for t in 0..ell {
                    let delta = delta_density(t, d, ell)?;
                    let count = count_trace_det(t, d, ell)?;
                    rows.push(DeltaRow {
                        ell,
                        t,
                        d,
                        delta: delta.to_string(),
                        count,
                        sl2_order: order,
                        matches: delta == Rational::new(count as i64, order as i64),
                    });
                }
            }
            write_rows(out, fmt, rows)
        }
        Command::Image => {
            let curves = collect_curves(cfg.height()?);
            let ctx = TraceContext::new(cfg.prime_bound);
            let rows = par_map(&curves, |c| {
                let v = classify_image_with(&ctx, c, cfg.ell, cfg.prime_bound)?;
                Ok(ImageRow {
                    a: c.a(),
                    b: c.b(),
                    ell: v.ell,
                    status: v.status,
                    target: v.target,
                    split: v.witnesses.split,
                    nonsplit: v.witnesses.nonsplit,
                    exceptional: v.witnesses.exceptional,
                    determinant: join(&v.witnesses.determinant),
                })
            })?;
            let proven = rows
                .iter()
                .filter(|r| r.status == ImageStatus::SurjectiveProven)
                .count();
            writeln!(err, "surjective proven: {proven} of {}", rows.len())?;
            write_rows(out, fmt, rows)
        }
        Command::Stability { summary } => {
            let bound = cfg.height()?;
            let field = cfg.field()?;
            let ranks = match &cfg.ranks {
                Some(path) => load_rank_csv(path)?,
                None => RankTable::new(),
            };
            let checker = StabilityChecker::new(cfg.ell)?;
            let ctx = TraceContext::new(cfg.prime_bound);
            let curves = collect_curves(bound);
            let reports: Vec<StabilityReport> =
                par_map(&curves, |c| checker.check_with(&ctx, c, &field, cfg.prime_bound))?;
            writeln!(err, "note: {SHA_PROVENANCE}")?;
            if *summary {
                let census = census_from_reports(&reports, &ranks, cfg.ell);
                write_rows(
                    out,
                    fmt,
                    [SummaryRow {
                        x: bound.x(),
                        ell: census.ell,
                        members: census.members,
                        ds_satisfied: census.ds_satisfied,
                        rank1_ds: census.rank1_ds,
                        total: census.total,
                    }],
                )
            } else {
                write_rows(
                    out,
                    fmt,
                    reports.iter().map(|r| StabilityRow {
                        a: r.curve.a(),
                        b: r.curve.b(),
                        ell: r.ell,
                        image: r.image.status,
                        t_kl: r.t_kl,
                        ds_verdict: r.ds_verdict,
                        rank: ranks.get(&r.curve),
                    }),
                )
            }
        }
        Command::Sieve => {
            let seed = cfg.seed()?;
            let params = DensityParams::new(cfg.t1, cfg.t2, cfg.d, cfg.ell)?;
            let rows = cfg
                .heights()?
                .into_iter()
                .map(|x| {
                    let s = variance_stat(x, params.t1, params.t2, params.d, params.ell, cfg.samples, seed)?;
                    Ok(SieveRow {
                        x,
                        ell: params.ell,
                        t1: params.t1,
                        t2: params.t2,
                        d: params.d,
                        delta: params.delta.to_string(),
                        pi: s.pi,
                        v: s.v_f64(),
                        v_over_x: s.v_over_x(),
                        pairs: s.num_pairs_sampled,
                        exhaustive: s.exhaustive,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            write_rows(out, fmt, rows)
        }
        Command::Decay { curve } => {
            let a = match curve.as_slice() {
                [a, b] => CurveModel::new(*a, *b)?,
                [] => enumerate_curves(HeightBound::new(1)?).next().expect("C(1) is nonempty"),
                _ => return Err(Error::InvalidConfig("--curve takes exactly A,B".into())),
            };
            let points = t_a_density_curve(&a, &cfg.heights()?, cfg.ell, cfg.prime_bound)?;
            match fitted_exponent(&points) {
                Some(e) => writeln!(err, "reference {a}: fitted exponent {e:.6}")?,
                None => writeln!(err, "reference {a}: too few points for a fit")?,
            }
            write_rows(
                out,
                fmt,
                points.iter().map(|p| DecayRow {
                    x: p.x,
                    members: p.members,
                    total: p.total,
                    ratio: p.ratio,
                }),
            )
        }
        Command::Countcheck => {
            let rows = curve_count_check(&cfg.heights()?)?;
            write_rows(
                out,
                fmt,
                rows.iter().map(|r| CountRow {
                    x: r.x,
                    count: r.count,
                    main_term: r.main_term,
                    relative_error: r.relative_error,
                }),
            )
        }
    }
}

fn par_map<T: Send>(curves: &[CurveModel], f: impl Fn(&CurveModel) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    use rayon::prelude::*;
    curves.par_iter().map(f).collect()
}

fn join(xs: &[u64]) -> String {
    xs.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
}

/// Parses `args`, runs, and reports failures as `error: <Class>: <message>`.
/// Returns the process exit code.
pub fn main_with_args<I, T, W, E>(args: I, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    W: Write,
    E: Write,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(err, "error: InvalidConfig: {first}");
            return 2;
        }
    };
    match run(&cfg, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = out.flush();
            let _ = writeln!(err, "error: {}: {}", e.class(), e.to_string().replace('\n', " "));
            1
        }
    }
}
