//! `hlie`: construct, verify, transform, classify, and search two-step
//! metric nilpotent Lie algebras with constant J-spectrum.
//!
//! Exit codes encode the verdict lattice so shell pipelines can branch
//! without parsing JSON:
//!
//! - `analyze`: 0 = H-type or H-like, 2 = constant spectrum with abelian
//!   factor, 3 = not constant, 1 = I/O or validation error.
//! - `classify-rank2`: 0 = classified, 4 = not applicable.
//! - `search`: 0 = verified, 5 = best candidate unverified.
//!
//! `HLIE_THREADS` caps internal parallelism (the multi-start search).

mod file_format;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hlie_core::algebra::{fixture, Fixture, GmVariant};
use hlie_core::classify::{classify_rank_two, RankTwoClass};
use hlie_core::construct;
use hlie_core::linalg::{Subspace, SymMatrix};
use hlie_core::nalgebra::DVector;
use hlie_core::scalar::Scalar;
use hlie_core::search::{run_search, SearchProblem};
use hlie_core::verify::{classify, ClassReport, Mode, Verdict};
use hlie_core::MetricAlgebra;

use file_format::{
    parse_matrix_literal, parse_spectrum_literal, read_algebra, read_subspace_sum, write_algebra,
};

#[derive(Parser)]
#[command(name = "hlie", version, about = "H-like Lie algebra toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Sampled => Mode::Sampled,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify an algebra file in the hierarchy H-type => H-like =>
    /// constant J-spectrum.
    Analyze {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Emit the full report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Build a new algebra from existing ones.
    Construct {
        #[command(subcommand)]
        kind: ConstructCmd,
    },
    /// Decide the rank-two class (almost abelian star vs free f_{3,2}) and
    /// emit the witness isometry as JSON.
    ClassifyRank2 {
        path: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Search for a p-dimensional subspace of the cone over a conjugacy
    /// class.
    Search(SearchArgs),
    /// Write a named example algebra.
    Examples {
        /// One of: h3, h5, gornet-mast, f32, star, htype34, abelian.
        name: String,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        /// Gornet-Mast variant: one of "-b,a", "b,-a", "-a,b", "a,-b".
        #[arg(long, allow_hyphen_values = true)]
        variant: Option<String>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// Orthogonal direct sum of two algebras.
    DirectSum {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Tensor product with a symmetric nonsingular matrix, e.g. --sym "1,0;0,2".
    Tensor {
        alg: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        sym: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Central sum along the centers via an orthogonal matrix
    /// (--phi identity or --phi "0,1;1,0").
    CentralSum {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "identity", allow_hyphen_values = true)]
        phi: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Quotient by a subspace of the center spanned by the given vectors,
    /// e.g. --kernel "0,0,1" or --kernel "1,0,0;0,1,0".
    Submersion {
        alg: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        kernel: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Block subspace sum from a hlie-subspace-sum-v1 JSON file.
    SubspaceSum {
        spec: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    q: usize,
    #[arg(long)]
    p: usize,
    /// Target spectrum as "b:mult,...", e.g. "1:1,2:1" or "1:2,0:1".
    #[arg(long, allow_hyphen_values = true)]
    spectrum: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    starts: usize,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    #[arg(long, default_value_t = 32)]
    samples: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol_objective: f64,
    #[arg(short, long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("HLIE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze {
            path,
            mode,
            tol,
            json,
        } => cmd_analyze(&path, mode.into(), tol, json),
        Command::Construct { kind } => cmd_construct(kind),
        Command::ClassifyRank2 { path, tol } => cmd_classify_rank2(&path, tol),
        Command::Search(args) => cmd_search(&args),
        Command::Examples {
            name,
            a,
            b,
            variant,
            m,
            q,
            out,
        } => cmd_examples(&name, a, b, variant, m, q, &out),
    }
}

#[derive(Serialize)]
struct AnalyzeOutput<'a> {
    file: String,
    label: Option<&'a str>,
    p: usize,
    q: usize,
    skew_adjustment: f64,
    report: &'a ClassReport,
}

fn cmd_analyze(path: &Path, mode: Mode, tol: f64, json: bool) -> Result<u8> {
    let loaded = read_algebra(path)?;
    let report = classify(&loaded.algebra, mode, tol)?;
    if json {
        let out = AnalyzeOutput {
            file: path.display().to_string(),
            label: loaded.algebra.label(),
            p: loaded.algebra.p(),
            q: loaded.algebra.q(),
            skew_adjustment: loaded.skew_adjustment,
            report: &report,
        };
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        print_report(path, &loaded.algebra, loaded.skew_adjustment, &report);
    }
    Ok(match report.verdict {
        Verdict::HType | Verdict::HLike => 0,
        Verdict::ConstantSpectrumWithAbelianFactor => 2,
        Verdict::NotConstantSpectrum => 3,
    })
}

fn print_report(path: &Path, alg: &MetricAlgebra, skew_adjustment: f64, report: &ClassReport) {
    println!(
        "{}: type ({}, {}){}",
        path.display(),
        alg.p(),
        alg.q(),
        alg.label().map(|l| format!("  [{l}]")).unwrap_or_default()
    );
    println!("verdict: {}", report.verdict);
    if let Some(s) = &report.spectrum {
        println!("unit-sphere spectrum: {s}");
    }
    if let Some(r) = report.j_rank {
        println!("J-rank: {r}");
    }
    println!(
        "mode: {} ({} arithmetic)",
        report.mode,
        if report.exact_arithmetic {
            "exact"
        } else {
            "float"
        }
    );
    if skew_adjustment > 0.0 {
        println!("skew symmetrization adjustment: {skew_adjustment:e}");
    }
    if let Some(w) = &report.witness {
        println!(
            "witness direction: {:?}  (power index {}: observed {}, expected {})",
            w.direction, w.power_index, w.observed, w.expected
        );
    }
    for (k, v) in &report.margins {
        println!("margin {k}: {v}");
    }
}

fn measured_line(alg: &MetricAlgebra, tol: f64) -> String {
    match classify(alg, Mode::Exact, tol) {
        Ok(report) => match report.spectrum {
            Some(s) => format!("{s}  (verdict {})", report.verdict),
            None => format!("none  (verdict {})", report.verdict),
        },
        Err(e) => format!("unavailable ({e})"),
    }
}

fn cmd_construct(kind: ConstructCmd) -> Result<u8> {
    let tol = 1e-8;
    let (alg, record, out) = match kind {
        ConstructCmd::DirectSum { a, b, out } => {
            let a = read_algebra(&a)?.algebra;
            let b = read_algebra(&b)?.algebra;
            let (alg, record) = construct::direct_sum(&a, &b);
            (alg, record, out)
        }
        ConstructCmd::Tensor { alg, sym, out } => {
            let a = read_algebra(&alg)?.algebra;
            let rows = parse_matrix_literal(&sym)?;
            let s = SymMatrix::from_scalar_rows(&rows)?;
            let (alg, record) = construct::tensor_product(&a, &s)?;
            (alg, record, out)
        }
        ConstructCmd::CentralSum { a, b, phi, out } => {
            let a = read_algebra(&a)?.algebra;
            let b = read_algebra(&b)?.algebra;
            let phi_rows = if phi == "identity" {
                let p = a.p();
                (0..p)
                    .map(|i| {
                        (0..p)
                            .map(|j| Scalar::from_int(i64::from(i == j)))
                            .collect()
                    })
                    .collect()
            } else {
                parse_matrix_literal(&phi)?
            };
            let (alg, record) = construct::central_sum(&a, &b, &phi_rows)?;
            (alg, record, out)
        }
        ConstructCmd::Submersion { alg, kernel, out } => {
            let a = read_algebra(&alg)?.algebra;
            let rows = parse_matrix_literal(&kernel)?;
            let vectors: Vec<DVector<f64>> = rows
                .iter()
                .map(|r| {
                    if r.len() != a.p() {
                        bail!(
                            "kernel vector has length {}, expected p = {}",
                            r.len(),
                            a.p()
                        );
                    }
                    Ok(DVector::from_iterator(
                        r.len(),
                        r.iter().map(|s| s.to_f64()),
                    ))
                })
                .collect::<Result<_>>()?;
            let k = Subspace::from_columns(a.p(), &vectors);
            let (alg, record) = construct::submersion_quotient(&a, &k)?;
            (alg, record, out)
        }
        ConstructCmd::SubspaceSum { spec, out } => {
            let (blocks, spectra) = read_subspace_sum(&spec)?;
            let (alg, record) = construct::subspace_sum(&blocks, &spectra, tol)?;
            (alg, record, out)
        }
    };

    write_algebra(&out, &alg)?;
    println!("wrote {}  (type ({}, {}))", out.display(), alg.p(), alg.q());
    match &record.predicted_spectrum {
        Some(s) => println!("predicted spectrum: {s}"),
        None => println!("predicted spectrum: none (no guarantee for these inputs)"),
    }
    println!("measured spectrum:  {}", measured_line(&alg, tol));
    Ok(0)
}

fn cmd_classify_rank2(path: &Path, tol: f64) -> Result<u8> {
    let loaded = read_algebra(path)?;
    let verdict = classify_rank_two(&loaded.algebra, tol)?;
    println!("{}", serde_json::to_string_pretty(&verdict)?);
    Ok(match verdict.class {
        RankTwoClass::NotApplicable(_) => 4,
        _ => 0,
    })
}

fn cmd_search(args: &SearchArgs) -> Result<u8> {
    let target = parse_spectrum_literal(&args.spectrum)?;
    let problem = SearchProblem::new(args.q, args.p, target)?
        .with_seed(args.seed)
        .with_starts(args.starts)
        .with_max_iters(args.iters)
        .with_samples(args.samples)
        .with_tol_objective(args.tol_objective);
    let result = run_search(&problem);

    #[derive(Serialize)]
    struct SearchOutput<'a> {
        problem: &'a SearchProblem,
        result: &'a hlie_core::search::SearchResult,
    }
    let text = serde_json::to_string_pretty(&SearchOutput {
        problem: &problem,
        result: &result,
    })?;
    std::fs::write(&args.out, text + "\n")
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    println!(
        "search (q={}, p={}, target {}): objective {:e}, verified = {}{}",
        problem.q,
        problem.p,
        problem.target,
        result.objective,
        result.verified,
        if result.verified_exact {
            " (exact)"
        } else {
            ""
        }
    );
    println!("wrote {}", args.out.display());

    if result.verified {
        let alg = hlie_core::algebra::standard_from_subspace(&result.basis)?.with_label(format!(
            "search(q={}, p={}, target={}, seed={})",
            problem.q, problem.p, problem.target, problem.seed
        ));
        let alg_path = args.out.with_extension("algebra.json");
        write_algebra(&alg_path, &alg)?;
        println!("wrote {}", alg_path.display());
        Ok(0)
    } else {
        Ok(5)
    }
}

fn cmd_examples(
    name: &str,
    a: Option<String>,
    b: Option<String>,
    variant: Option<String>,
    m: Option<usize>,
    q: Option<usize>,
    out: &Path,
) -> Result<u8> {
    let scalar_arg = |v: &Option<String>, name: &str| -> Result<Scalar> {
        let s = v
            .as_deref()
            .with_context(|| format!("example requires --{name}"))?;
        Ok(Scalar::parse(s)?)
    };
    let fx = match name {
        "h3" => Fixture::H3,
        "h5" => Fixture::H5 {
            a: scalar_arg(&a, "a")?,
            b: scalar_arg(&b, "b")?,
        },
        "gornet-mast" | "gornet_mast" => Fixture::GornetMast {
            a: scalar_arg(&a, "a")?,
            b: scalar_arg(&b, "b")?,
            variant: GmVariant::parse(variant.as_deref().unwrap_or("-b,a"))?,
        },
        "f32" => Fixture::F32,
        "star" => Fixture::Star {
            m: m.context("star requires --m")?,
        },
        "htype34" => Fixture::HType34,
        "abelian" => Fixture::Abelian {
            q: q.context("abelian requires --q")?,
        },
        other => bail!(
            "unknown example {other:?}; expected one of h3, h5, gornet-mast, f32, star, htype34, abelian"
        ),
    };
    let alg = fixture(fx)?;
    write_algebra(out, &alg)?;
    println!(
        "wrote {}  (type ({}, {}){})",
        out.display(),
        alg.p(),
        alg.q(),
        alg.label().map(|l| format!(", {l}")).unwrap_or_default()
    );
    Ok(0)
}
