use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};

use volent::entropy::{self, Method};
use volent::freeproduct::{self as fp, FactorModel};
use volent::l1norm::{self, NormProblem, Ring};
use volent::permutahedron as perm;
use volent::systole::{self, MarkedGroup, SubgroupSpec};
use volent::table::{export_csv, format_float, Table};
use volent::verify::{self, VerifyOptions};
use volent::{CoverSpec, DeltaComplex, Error, MetricGraph};

#[derive(Parser, Debug)]
#[command(name = "volent", version, about = "Volume entropy, l1 norms and systoles of small complexes")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Cap on explored states for enumerations.
    #[arg(long, global = true, default_value_t = 10_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Directory for CSV artifacts; CSV goes to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, hide = true)]
    corrupt_dual: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Volume entropy of a metric graph, optionally relative to a quotient.
    Entropy {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        cover: Option<PathBuf>,
        #[arg(long, default_value_t = 20.0)]
        t_max: f64,
    },
    /// Entropy of a dumbbell of two factors joined by a bar of length d.
    Dumbbell {
        /// Graph file or `cyclic:N`.
        #[arg(long)]
        factor1: String,
        #[arg(long)]
        factor2: String,
        #[arg(long)]
        cover1: Option<PathBuf>,
        #[arg(long)]
        cover2: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        d: Vec<f64>,
        /// Report the raw factors instead of rescaling them to equal entropy.
        #[arg(long)]
        unbalanced: bool,
    },
    /// Least l1 norm of a cycle.
    L1norm {
        #[arg(long)]
        complex: PathBuf,
        /// Chain file; the fundamental cycle is used when absent.
        #[arg(long)]
        cycle: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RingArg::Rat)]
        ring: RingArg,
        /// Print and check the dual certificate.
        #[arg(long)]
        dual: bool,
    },
    /// Permutahedron tiling of the isospectral manifold and its constants.
    Tomei {
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 30.0)]
        t_max: f64,
    },
    /// Systoles along a family of finite-index subgroups of a free group.
    Systole {
        #[arg(long, default_value = "free:2")]
        group: String,
        #[arg(long, default_value = "sl2modp:3,5,7,11,13")]
        family: String,
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
    /// Run built-in invariant checks.
    Verify {
        #[arg(value_parser = ["entropy", "dumbbell", "l1", "tomei", "systole", "all"])]
        suite: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RingArg {
    Int,
    Rat,
}

enum Failure {
    Usage(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(table: &Table, name: &str, g: &Global) -> Outcome {
    match &g.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            export_csv(table, &path)?;
            println!("wrote {}", path.display());
        }
        None => print!("{}", table.to_csv()?),
    }
    Ok(())
}

fn load_cover(path: Option<&PathBuf>, g: &MetricGraph) -> Result<CoverSpec, Failure> {
    match path {
        Some(p) => Ok(CoverSpec::parse(&read(p)?, g)?),
        None => Ok(CoverSpec::Trivial),
    }
}

fn load_factor(src: &str, cover: Option<&PathBuf>, budget: usize) -> Result<FactorModel, Failure> {
    if let Some(n) = src.strip_prefix("cyclic:") {
        if cover.is_some() {
            return Err(Failure::Usage("cyclic factors take no cover".into()));
        }
        let n: usize = n.parse().map_err(|_| Failure::Usage(format!("bad cyclic order {n:?}")))?;
        if n < 2 {
            return Err(Failure::Usage("cyclic order must be at least 2".into()));
        }
        return Ok(FactorModel::cyclic(n));
    }
    let g = MetricGraph::parse(&read(Path::new(src))?)?;
    let spec = load_cover(cover, &g)?;
    let radius = 40.0 * g.min_length();
    Ok(FactorModel::with_radius(g, spec, radius, budget)?)
}

fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    let budget = g.budget as usize;
    match &cli.command {
        Command::Entropy { graph, cover, t_max } => {
            let graph = MetricGraph::parse(&read(graph)?)?;
            let spec = load_cover(cover.as_ref(), &graph)?;
            let est = entropy::entropy_relative(&graph, &spec)?;
            println!("entropy {} in [{}, {}] ({})", format_float(est.value), format_float(est.lower), format_float(est.upper), est.method.label());
            let scan = entropy::orbit_count_scan(&graph, &spec, *t_max, budget)?;
            if est.method != Method::OrbitCount && !scan.estimate.contains(est.value) {
                return Err(Failure::Invariant(format!(
                    "orbit count bracket [{}, {}] misses {}",
                    format_float(scan.estimate.lower),
                    format_float(scan.estimate.upper),
                    format_float(est.value)
                )));
            }
            let mut t = Table::new(&["t", "count", "log_count", "slope_estimate"]);
            for r in &scan.rows {
                t.push(vec![r.t.into(), r.count.into(), r.log_count.into(), r.slope_estimate.into()]);
            }
            emit(&t, "entropy.csv", g)
        }
        Command::Dumbbell { factor1, factor2, cover1, cover2, d, unbalanced } => {
            let f1 = load_factor(factor1, cover1.as_ref(), budget)?;
            let f2 = load_factor(factor2, cover2.as_ref(), budget)?;
            if d.iter().any(|&x| !(x > 0.0)) {
                return Err(Failure::Usage("bar lengths must be positive".into()));
            }
            let rep = if *unbalanced {
                let mut rows = Vec::new();
                let mut alpha = 0.0;
                for &di in d {
                    let m = fp::DumbbellModel::new(f1.clone(), f2.clone(), di)?;
                    alpha = m.alpha;
                    let h = fp::dumbbell_entropy_exact(&m)?;
                    rows.push(fp::AdditivityRow { d: di, h_d: h, gap: h - m.alpha });
                }
                println!("unbalanced factors, alpha {}", format_float(alpha));
                rows
            } else {
                let rep = fp::additivity_report(&f1, &f2, d)?;
                println!(
                    "alpha {} lambda1 {} lambda2 {} balanced {} lower_ok {} monotone {}",
                    format_float(rep.alpha),
                    format_float(rep.lambda1),
                    format_float(rep.lambda2),
                    rep.balanced,
                    rep.lower_ok,
                    rep.monotone
                );
                if !rep.lower_ok || !rep.monotone {
                    return Err(Failure::Invariant("dumbbell entropy left the additivity sandwich".into()));
                }
                rep.rows
            };
            let alpha = rep.first().map_or(0.0, |r| r.h_d - r.gap);
            let mut t = Table::new(&["d", "alpha", "h_d", "gap"]);
            for r in &rep {
                t.push(vec![r.d.into(), alpha.into(), r.h_d.into(), r.gap.into()]);
            }
            emit(&t, "dumbbell.csv", g)
        }
        Command::L1norm { complex, cycle, ring, dual } => {
            let x = DeltaComplex::parse(&read(complex)?)?;
            let z = match cycle {
                Some(p) => l1norm::parse_chain(&read(p)?, &x)?,
                None => x
                    .check_pseudomanifold()
                    .fundamental_cycle
                    .ok_or_else(|| Failure::Usage("complex has no fundamental cycle; pass --cycle".into()))?,
            };
            let ring = match ring {
                RingArg::Int => Ring::Integers,
                RingArg::Rat => Ring::Rationals,
            };
            let p = NormProblem::new(x, z, ring)?;
            let mut r = match ring {
                Ring::Integers => l1norm::l1_ilp(&p)?,
                Ring::Rationals => l1norm::l1_lp(&p)?,
            };
            println!("value {}", r.value);
            if *dual {
                if g.corrupt_dual {
                    if let Some(c) = r.certificate.as_mut() {
                        c[0] += volent::linalg::qf(1, 7);
                    }
                }
                match &r.certificate {
                    Some(c) => println!("dual {}", c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")),
                    None => println!("dual none"),
                }
                let ok = l1norm::dual_certificate_check(&r, &p);
                println!("dual check {}", if ok { "pass" } else { "fail" });
                if !ok {
                    return Err(Failure::Invariant("dual certificate rejected".into()));
                }
            }
            let mut t = Table::new(&["simplex", "coefficient"]);
            for (i, c) in r.chain.iter() {
                t.push(vec![p.complex.name(p.degree(), i).into(), c.clone().into()]);
            }
            emit(&t, "l1norm.csv", g)
        }
        Command::Tomei { m, t_max } => {
            let rep = perm::constants_report_with_budget(*m, *t_max, budget)?;
            print!("{}", rep.to_text());
            let (_, rows) = perm::tomei_growth(*m, *t_max, budget)?;
            let mut t = Table::new(&["t", "count", "log_count", "slope_estimate"]);
            for r in &rows {
                t.push(vec![r.t.into(), r.count.into(), r.log_count.into(), r.slope_estimate.into()]);
            }
            if t.rows.is_empty() {
                println!("skeleton has no growth to tabulate");
                return Ok(());
            }
            emit(&t, "tomei.csv", g)
        }
        Command::Systole { group, family, m } => {
            let rank: usize = group
                .strip_prefix("free:")
                .and_then(|r| r.parse().ok())
                .filter(|&r| r >= 1)
                .ok_or_else(|| Failure::Usage(format!("unsupported group {group:?}; expected free:<rank>")))?;
            let primes = family
                .strip_prefix("sl2modp:")
                .ok_or_else(|| Failure::Usage(format!("unsupported family {family:?}; expected sl2modp:<list>")))?;
            if rank != 2 {
                return Err(Failure::Usage("sl2modp families need free:2".into()));
            }
            let fam = primes
                .split(',')
                .map(|s| s.trim().parse::<u64>().ok().filter(|&p| p >= 2).map(SubgroupSpec::sl2_congruence))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Failure::Usage(format!("bad modulus list {primes:?}")))?;
            let scan = systole::sigma_scan_multiples(&MarkedGroup::free(rank), &fam, *m)?;
            println!(
                "fit c {} ratio constant {} sys nondecreasing {}",
                format_float(scan.fit_c),
                format_float(scan.fit_ratio_c),
                scan.sys_nondecreasing()
            );
            let mut t = Table::new(&["k", "sys", "vol", "ratio", "fit_c"]);
            for r in &scan.rows {
                t.push(vec![r.k.into(), r.sys.into(), r.vol.into(), r.ratio.into(), scan.fit_c.into()]);
            }
            emit(&t, "systole.csv", g)
        }
        Command::Verify { suite } => {
            let opts = VerifyOptions { seed: g.seed, budget, corrupt_dual: g.corrupt_dual };
            let rep = verify::run_verify_suite(suite, &opts)?;
            for c in &rep.checks {
                println!("{} {}/{}: {}", if c.passed { "PASS" } else { "FAIL" }, c.suite, c.name, c.detail);
            }
            println!("{} checks, {} failed", rep.checks.len(), rep.failures());
            if let Some(dir) = &g.out {
                std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
                export_csv(&rep.to_table(), &dir.join("verify.csv"))?;
            }
            if rep.all_passed() {
                Ok(())
            } else {
                Err(Failure::Invariant(format!("{} verify checks failed", rep.failures())))
            }
        }
    }
}
