use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use faer::c64;
use sfvem::assembly;
use sfvem::eigensolve::{self, Strategy};
use sfvem::mesh::{read_mesh, validate_mesh, write_mesh};
use sfvem::study::{self, ConvergenceReport, SourceReport};
use sfvem::{generate_mesh, Case, MeshFamily, MeshKind, Scheme, StudyConfig};

#[derive(Parser)]
#[command(name = "sfvem", version, about = "Virtual element eigenvalue solver and convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh of the unit square.
    Mesh {
        /// quad, pentagon or octagon (t1, t2, t3).
        family: MeshKind,
        n: usize,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check shape regularity of a mesh file.
    Validate {
        meshfile: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        ct: f64,
    },
    /// Solve one eigenvalue (or, for `manufactured`, source) problem.
    Solve {
        #[arg(long)]
        case: Case,
        #[arg(long)]
        family: MeshKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ell: Option<usize>,
        #[arg(long, default_value = "sfvem")]
        scheme: Scheme,
        #[arg(long, default_value_t = 5)]
        nev: usize,
        #[arg(long)]
        delta: Option<f64>,
        /// auto, dense or shift-invert.
        #[arg(long, default_value = "auto")]
        strategy: Strategy,
        #[arg(long, default_value_t = 1.0)]
        shift: f64,
    },
    /// Run a convergence study described by a JSON config.
    Convergence {
        #[arg(long)]
        config: PathBuf,
    },
    /// First-eigenvalue errors of both schemes side by side.
    Compare {
        #[arg(long)]
        case: Case,
        #[arg(long)]
        k: usize,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        levels: Vec<usize>,
        /// Defaults to all three families.
        #[arg(long)]
        family: Vec<MeshKind>,
        #[arg(long, default_value_t = 5)]
        nev: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

type CliResult = Result<(), Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Mesh { family, n, delta, out } => {
            let fam = delta.map_or(MeshFamily::new(family), |d| MeshFamily::with_delta(family, d));
            let mesh = generate_mesh(fam, n)?;
            match out {
                Some(path) => write_mesh(&mesh, BufWriter::new(File::create(&path)?))?,
                None => write_mesh(&mesh, BufWriter::new(io::stdout().lock()))?,
            }
            eprintln!("{} vertices, {} cells, h = {}", mesh.vertices().len(), mesh.num_cells(), mesh.mesh_size());
        }
        Command::Validate { meshfile, ct } => {
            let mesh = read_mesh(BufReader::new(File::open(&meshfile)?))?;
            let report = validate_mesh(&mesh, ct);
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.passed {
                return Err(format!("mesh fails shape regularity at c_T = {ct}").into());
            }
        }
        Command::Solve {
            case,
            family,
            n,
            k,
            ell,
            scheme,
            nev,
            delta,
            strategy,
            shift,
        } => {
            let mut cfg = StudyConfig::new(case, family, vec![n], k);
            cfg.ell = ell;
            cfg.delta = delta;
            cfg.nev = nev;
            cfg.schemes = vec![scheme];
            cfg.validate()?;
            if case == Case::Manufactured {
                print_source(&study::run_source_study(&cfg)?[0]);
                return Ok(());
            }
            solve_one(&cfg, scheme, strategy, shift)?;
        }
        Command::Convergence { config } => {
            let cfg = StudyConfig::load(&config)?;
            let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
            if cfg.case == Case::Manufactured {
                for r in study::run_source_study(&cfg)? {
                    print_source(&r);
                    report_paths(study::emit_source_outputs(&r, &dir)?);
                }
            } else {
                for r in study::run_convergence(&cfg)? {
                    print_report(&r);
                    report_paths(study::emit_outputs(&r, &dir)?);
                }
            }
        }
        Command::Compare {
            case,
            k,
            levels,
            family,
            nev,
            out_dir,
        } => {
            let families = if family.is_empty() {
                vec![MeshKind::Quad, MeshKind::Pentagon, MeshKind::Octagon]
            } else {
                family
            };
            for fam in families {
                let mut cfg = StudyConfig::new(case, fam, levels.clone(), k);
                cfg.schemes = vec![Scheme::Sfvem, Scheme::Svem];
                cfg.nev = nev;
                let reports = study::run_convergence(&cfg)?;
                compare_table(fam, &reports);
                if let Some(dir) = &out_dir {
                    for r in &reports {
                        report_paths(study::emit_outputs(r, dir)?);
                    }
                }
            }
        }
    }
    Ok(())
}

fn solve_one(cfg: &StudyConfig, scheme: Scheme, strategy: Strategy, shift: f64) -> CliResult {
    let mesh = generate_mesh(cfg.mesh_family(), cfg.levels[0])?;
    let spec = cfg.problem(scheme);
    let (pair, dofs) = assembly::assemble(&mesh, &spec)?;
    let mut grouped: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, w) in &pair.warnings {
        *grouped.entry(w.as_str()).or_default() += 1;
    }
    for (w, count) in grouped {
        eprintln!("warning: {count} cells: {w}");
    }
    let res = eigensolve::solve_gevp(&pair, cfg.nev, strategy, c64::new(shift, 0.0))?;
    let exact: Vec<f64> = study::exact_reference(cfg.case, cfg.nev)?
        .iter()
        .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity))
        .collect();
    println!(
        "# {} {} n={} k={} {} ndof={} h={} strategy={:?}",
        cfg.case,
        cfg.family,
        cfg.levels[0],
        cfg.k,
        scheme,
        dofs.num_free(),
        mesh.mesh_size(),
        res.strategy
    );
    println!("index,lambda_re,lambda_im,exact,abs_error,residual");
    for (i, l) in res.eigenvalues.iter().enumerate() {
        let ex = exact[i];
        println!(
            "{},{},{},{},{:.3e},{:.1e}",
            i + 1,
            l.re,
            l.im,
            ex,
            (l - c64::new(ex, 0.0)).norm(),
            res.residuals[i]
        );
    }
    Ok(())
}

fn print_report(r: &ConvergenceReport) {
    println!("# {} {} k={} {}", r.case, r.family, r.k, r.scheme);
    print!("{}", study::report_csv(r));
    for c in &r.clusters {
        println!("# n={} cluster multiplicities {:?} (tol {:.1e})", c.level, c.multiplicities, c.tolerance);
    }
    for w in &r.warnings {
        println!("# warning: {w}");
    }
    if let Some(f) = &r.failure {
        println!("# failed: {f}");
    }
}

fn print_source(r: &SourceReport) {
    println!("# {} {} k={} {} source problem", r.case, r.family, r.k, r.scheme);
    print!("{}", study::source_csv(r));
    if let Some(f) = &r.failure {
        println!("# failed: {f}");
    }
}

fn compare_table(fam: MeshKind, reports: &[ConvergenceReport]) {
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "# {fam}: first eigenvalue error");
    let _ = writeln!(out, "level,h,{}", reports.iter().map(|r| r.scheme.to_string()).collect::<Vec<_>>().join(","));
    let Some(first) = reports.first() else { return };
    for row in first.series(1) {
        let errs: Vec<String> = reports
            .iter()
            .map(|r| {
                r.series(1)
                    .iter()
                    .find(|x| x.level == row.level)
                    .map_or("-".into(), |x| format!("{:.6e}", x.abs_error))
            })
            .collect();
        let _ = writeln!(out, "{},{},{}", row.level, row.h, errs.join(","));
    }
    for r in reports {
        if let Some(f) = &r.failure {
            let _ = writeln!(out, "# {} failed: {f}", r.scheme);
        }
    }
}

fn report_paths((csv, svg): (PathBuf, PathBuf)) {
    eprintln!("wrote {} and {}", show(&csv), show(&svg));
}

fn show(p: &Path) -> String {
    p.display().to_string()
}
