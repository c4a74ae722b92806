use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use paraunit::genseed::{self, random_permutation};
use paraunit::io::{read_csv, write_csv};
use paraunit::seedpu::{self, sq_from_catalog, DEFAULT_GUARD};
use paraunit::{
    are_equivalent, build_seed, catalog, enumerate_s, named_construction, Error, FamilyFile, FamilyKind, NamedParams, PhaseMatrix, PlanFile,
    PolyMatrix, Provenance, QSequence, SeedSpec,
};

#[derive(Parser)]
#[command(name = "paraunit", version, about = "Complementary sets and codes from para-unitary matrices")]
struct Cli {
    /// Worker threads for verification and enumeration.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Seed PU matrices and the families they generate.
    #[command(subcommand)]
    Seed(SeedCmd),
    /// Generalized seeds of order 2^n over Boolean variables.
    #[command(subcommand)]
    Genseed(GenseedCmd),
    /// Recursive block constructions.
    #[command(subcommand)]
    Recur(RecurCmd),
    /// Re-check a family file from its raw values.
    Verify {
        #[arg(long)]
        family: PathBuf,
    },
    /// Enumerate the seed family S(q, N) over m variables.
    Enum(EnumArgs),
    /// PMEPR of every sequence in a family (JSON or CSV).
    Pmepr {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = 16)]
        oversample: usize,
    },
    /// Butson-type Hadamard catalog.
    #[command(subcommand)]
    Bh(BhCmd),
    /// Convert a family file to a sequence table.
    Export {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum SeedCmd {
    /// Random seed from the catalog; writes its CCC.
    Gen {
        #[arg(long)]
        q: usize,
        #[arg(long = "N", alias = "n")]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the polynomial matrix as JSON.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Canonical quadratic term classes.
    Sq {
        #[arg(long)]
        q: usize,
        #[arg(long = "N", alias = "n")]
        n: usize,
    },
    /// Same as the top-level `enum`.
    Enum(EnumArgs),
    /// Named constructions 1-4; writes the CSS containing f (or the CCC).
    Named {
        #[arg(long)]
        id: u8,
        #[arg(long)]
        m: usize,
        /// Parameters as inline JSON or a path to a JSON file.
        #[arg(long, default_value = "{}")]
        params: String,
        #[arg(long)]
        ccc: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenseedCmd {
    /// Random generalized seed, variables permuted by --pi; writes its CCC.
    Gen {
        #[arg(long)]
        q: usize,
        /// Block width; the matrix order is 2^n.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Comma-separated permutation of the mn Boolean variables; random when absent.
        #[arg(long, value_delimiter = ',')]
        pi: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RecurCmd {
    /// Build a plan, check para-unitarity and write the extracted CCA.
    Build {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        matrix_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BhCmd {
    /// Catalog representatives, all or for one (q, N).
    List {
        #[arg(long)]
        q: Option<usize>,
        #[arg(long = "N", alias = "n")]
        n: Option<usize>,
    },
    /// Exit 0 iff the phase matrix in the file is Butson-type Hadamard.
    Check {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Exit 0 iff the two phase matrices are equivalent.
    Equiv { a: PathBuf, b: PathBuf },
}

#[derive(Args)]
struct EnumArgs {
    #[arg(long)]
    q: usize,
    #[arg(long = "N", alias = "n")]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    count_only: bool,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure kinds mapped to exit codes.
enum Failure {
    Verification(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn guard() -> std::result::Result<u128, Failure> {
    match std::env::var("PARAUNIT_GUARD") {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Usage(format!("PARAUNIT_GUARD={v:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_GUARD),
    }
}

fn require(ok: bool, what: &str) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification(what.to_string()))
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Seed(cmd) => seed(cmd),
        Command::Genseed(GenseedCmd::Gen { q, n, m, pi, seed, out }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let reps = catalog(q, 1 << n)?;
            let hs = (0..=m).map(|_| reps[rand::Rng::gen_range(&mut rng, 0..reps.len())].random_equivalent(&mut rng)).collect();
            let spec = genseed::GenSeedSpec::new(n, hs)?;
            let pi = pi.unwrap_or_else(|| random_permutation(m * n, &mut rng));
            let grid = seedpu::seed_function_matrix(&SeedSpec::new(spec.hs.clone())?);
            let fam = genseed::theorem7_families(&grid, &pi)?;
            require(fam.ccc.is_ccc()?, "generated grid is not complementary")?;
            let prov = Provenance { construction: "genseed".into(), parameters: json!({ "spec": spec, "pi": pi }) };
            emit(out.as_deref(), &FamilyFile::from_grid(FamilyKind::Cca, &fam.ccc, prov).to_json_string()?)
        }
        Command::Recur(RecurCmd::Build { plan, matrix_out, out }) => {
            let plan: PlanFile = read_json(&plan)?;
            let m = plan.build::<i64>()?;
            let c = m.is_paraunitary().ok_or_else(|| Failure::Verification("matrix is not para-unitary".into()))?;
            if let Some(path) = matrix_out {
                fs::write(path, serde_json::to_string_pretty(&m.to_json()?)?)?;
            }
            let fm = m.extract_function_matrix(2)?;
            require(fm.is_ccc()?, "extracted arrays are not complete complementary")?;
            let prov = Provenance { construction: "recur".into(), parameters: json!({ "plan": plan.root, "c": c.to_string() }) };
            emit(out.as_deref(), &FamilyFile::from_grid(FamilyKind::Cca, &fm, prov).to_json_string()?)
        }
        Command::Verify { family } => {
            let fam: FamilyFile = read_json(&family)?;
            require(fam.verify()?, &format!("{:?} property does not hold", fam.kind))?;
            println!("ok {:?} q={} N={} p={} m={}", fam.kind, fam.q, fam.n, fam.p, fam.m);
            Ok(())
        }
        Command::Enum(args) => enumerate(args),
        Command::Pmepr { family, oversample } => {
            let seqs = load_sequences(&family)?;
            use rayon::prelude::*;
            let values: Vec<f64> = seqs.par_iter().map(|s| s.pmepr::<f64>(oversample)).collect();
            let mut text = String::new();
            for (id, v) in values.iter().enumerate() {
                text.push_str(&format!("{id} {v:.6}\n"));
            }
            text.push_str(&format!("max {:.6}\n", values.iter().copied().fold(0.0, f64::max)));
            emit(None, &text)
        }
        Command::Bh(cmd) => bh(cmd),
        Command::Export { family, format, out } => {
            let fam: FamilyFile = read_json(&family)?;
            let seqs = fam.sequences()?;
            let text = match format {
                Format::Csv => csv_string(&seqs)?,
                Format::Json => serde_json::to_string_pretty(&seqs.iter().map(|s| s.values().to_vec()).collect::<Vec<_>>())?,
            };
            emit(out.as_deref(), &text)
        }
    }
}

fn csv_string(seqs: &[QSequence]) -> std::result::Result<String, Failure> {
    let mut buf = Vec::new();
    write_csv(&mut buf, seqs)?;
    String::from_utf8(buf).map_err(|e| Failure::Usage(e.to_string()))
}

fn load_sequences(path: &Path) -> std::result::Result<Vec<QSequence>, Failure> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        Ok(read_csv(fs::File::open(path)?)?)
    } else {
        Ok(read_json::<FamilyFile>(path)?.sequences()?)
    }
}

fn enumerate(args: EnumArgs) -> Outcome {
    let e = enumerate_s(args.q, args.n, args.m, guard()?)?;
    if args.count_only {
        return emit(args.out.as_deref(), &e.sequences.len().to_string());
    }
    emit(args.out.as_deref(), &csv_string(&e.sequences)?)
}

fn seed(cmd: SeedCmd) -> Outcome {
    match cmd {
        SeedCmd::Gen { q, n, m, seed, matrix_out, out } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = SeedSpec::random(q, n, m, &mut rng)?;
            let matrix: PolyMatrix<i64> = build_seed(&spec)?;
            let c = matrix.is_paraunitary().ok_or_else(|| Failure::Verification("seed is not para-unitary".into()))?;
            if let Some(path) = matrix_out {
                fs::write(path, serde_json::to_string_pretty(&matrix.to_json()?)?)?;
            }
            let fm = matrix.extract_function_matrix(n)?;
            require(fm.is_ccc()?, "extracted arrays are not complete complementary")?;
            let prov = Provenance { construction: "seed".into(), parameters: json!({ "spec": spec, "c": c.to_string() }) };
            emit(out.as_deref(), &FamilyFile::from_grid(FamilyKind::Cca, &fm, prov).to_json_string()?)
        }
        SeedCmd::Sq { q, n } => {
            let sq = sq_from_catalog(q, n)?;
            let tables: Vec<_> = sq.iter().map(|t| &t.table).collect();
            emit(None, &serde_json::to_string(&json!({ "q": q, "N": n, "count": sq.len(), "classes": tables }))?)
        }
        SeedCmd::Enum(args) => enumerate(args),
        SeedCmd::Named { id, m, params, ccc, out } => {
            let raw = if Path::new(&params).is_file() { fs::read_to_string(&params)? } else { params };
            let parsed: NamedParams = serde_json::from_str(&raw)?;
            let fam = named_construction(id, m, &parsed)?;
            let prov = Provenance { construction: format!("named-{id}"), parameters: serde_json::to_value(&parsed)? };
            let file = if ccc {
                FamilyFile::from_grid(FamilyKind::Ccc, &fam.ccc, prov)
            } else {
                FamilyFile::from_set(FamilyKind::Css, &fam.css, prov)?
            };
            require(file.verify()?, "construction output failed verification")?;
            emit(out.as_deref(), &file.to_json_string()?)
        }
    }
}

fn bh(cmd: BhCmd) -> Outcome {
    match cmd {
        BhCmd::List { q, n } => {
            let keys: Vec<(usize, usize)> = match (q, n) {
                (Some(q), Some(n)) => vec![(q, n)],
                (None, None) => vec![(2, 2), (4, 2), (6, 2), (3, 3), (2, 4), (4, 4)],
                _ => return Err(Failure::Usage("give both --q and --N, or neither".into())),
            };
            let mut entries = Vec::new();
            for (q, n) in keys {
                entries.push(json!({ "q": q, "N": n, "representatives": catalog(q, n)? }));
            }
            emit(None, &serde_json::to_string_pretty(&entries)?)
        }
        BhCmd::Check { matrix } => {
            let h: PhaseMatrix = read_json(&matrix)?;
            require(h.is_bh(), "not a Butson-type Hadamard matrix")?;
            println!("BH q={} N={}", h.q, h.n);
            Ok(())
        }
        BhCmd::Equiv { a, b } => {
            let (a, b): (PhaseMatrix, PhaseMatrix) = (read_json(&a)?, read_json(&b)?);
            require(are_equivalent(&a, &b)?, "matrices are not equivalent")?;
            println!("equivalent");
            Ok(())
        }
    }
}
