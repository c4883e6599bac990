mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use gv_core::bgg::{bgg, codim_bound_check, generic_cohomology, graded_cohomology, jump_locus_dims, support_locus};
use gv_core::examples::{abelian, blowup_example, macdonald_symmetric_product};
use gv_core::exterior::{MODULE_SCHEMA, STRATA_SCHEMA};
use gv_core::lincplx::{
    fiber_cohomology, is_minimal, linearize_summand, madic_pages, quasilinearity_diagnostics, HomotopyFile,
    HomotopyPair, JetComplex, HOMOTOPY_SCHEMA, JET_SCHEMA,
};
use gv_core::perversity::{classify, heart_bound_check, support_profile, FreeGradedComplex, COMPLEX_SCHEMA};
use gv_core::polymatrix::RankMethod;
use gv_core::tor::{eisenbud_crosscheck, regularity_from_table, regularity_violation, tor_table};
use gv_core::{ExteriorModule, StrataSpec};

use report::{Markdown, Report};

#[derive(Parser)]
#[command(
    name = "gv",
    version,
    about = "Exterior modules, BGG complexes, Tor and jump loci in exact arithmetic"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for random points and restriction maps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest homological degree of Tor.
    #[arg(long, global = true, default_value_t = 8)]
    imax: usize,
    /// Largest filtration index of the m-adic pages.
    #[arg(long, global = true, default_value_t = 4)]
    pmax: usize,
    /// Largest page of the m-adic spectral sequence.
    #[arg(long, global = true, default_value_t = 3)]
    rmax: usize,
    /// Rank computation for polynomial matrices.
    #[arg(long, global = true, value_enum, default_value_t = Method::Symbolic)]
    method: Method,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Symbolic,
    Randomized,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Markdown,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Abelian,
    Macdonald,
    Blowup,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a builtin exterior module as exterior-module/v1 JSON.
    Example {
        #[arg(long, value_enum)]
        family: Family,
        /// Genus (abelian, macdonald) or genus of the blown-up curve (blowup).
        #[arg(long)]
        g: Option<usize>,
        /// Symmetric power (macdonald).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Parse and validate an input file.
    Validate(Inputs),
    /// The BGG linear complex, its generic and graded cohomology and one support locus.
    Bgg {
        #[arg(long)]
        module: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        position: Option<i64>,
        #[arg(long, default_value_t = 1)]
        mult: usize,
        #[arg(long)]
        delta: Option<i64>,
    },
    /// Support loci at every position and the codimension bound 2(|c| − δ).
    JumpLoci {
        #[arg(long)]
        module: PathBuf,
        #[arg(long, default_value_t = 1)]
        mult: usize,
        #[arg(long, default_value_t = 0)]
        delta: i64,
    },
    /// Tor table over the exterior algebra.
    Tor {
        #[arg(long)]
        module: PathBuf,
    },
    /// Regularity from the Tor table, with a witness one below it.
    Regularity {
        #[arg(long)]
        module: PathBuf,
        /// Also check reg ≤ n + δ, with n the top degree of the module.
        #[arg(long)]
        delta: Option<i64>,
    },
    /// Tor vanishing against exactness of the BGG complex.
    Crosscheck {
        #[arg(long)]
        module: PathBuf,
        /// Defaults to δ ∈ {0, 1, 2}.
        #[arg(long)]
        delta: Option<i64>,
    },
    /// Support profile and perverse t-structure membership of a graded complex.
    Perversity {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        k: i64,
    },
    /// Defect of semismallness of a strata description.
    Delta {
        #[arg(long)]
        strata: PathBuf,
    },
    /// m-adic spectral sequence and quasilinearity diagnostics of a complex over a local ring.
    Lincplx {
        #[arg(long)]
        complex: PathBuf,
        /// A minimal summand of `--complex` (up to homotopy) to linearize.
        #[arg(long, requires = "homotopy")]
        summand: Option<PathBuf>,
        #[arg(long, requires = "summand")]
        homotopy: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Inputs {
    #[arg(long)]
    module: Option<PathBuf>,
    #[arg(long)]
    complex: Option<PathBuf>,
    #[arg(long)]
    jet: Option<PathBuf>,
    #[arg(long)]
    strata: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: invalid input at {pointer}: {message}")]
    Input {
        path: String,
        pointer: String,
        message: String,
    },
    #[error("{0}")]
    Core(#[from] gv_core::Error),
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Attaches the file name to parse errors.
fn load<T>(path: &Path, parse: impl FnOnce(&str) -> gv_core::Result<T>) -> CliResult<T> {
    let text = read(path)?;
    parse(&text).map_err(|e| match e {
        gv_core::Error::Parse { pointer, message } => CliError::Input {
            path: path.display().to_string(),
            pointer: if pointer.is_empty() { "/".into() } else { pointer },
            message,
        },
        other => CliError::Input {
            path: path.display().to_string(),
            pointer: "/".into(),
            message: other.to_string(),
        },
    })
}

fn load_module(path: &Path) -> CliResult<ExteriorModule> {
    load(path, ExteriorModule::from_json)
}

fn load_jet(path: &Path) -> CliResult<JetComplex> {
    load(path, JetComplex::from_json)
}

fn load_homotopy(path: &Path, k: &JetComplex, l: &JetComplex) -> CliResult<HomotopyPair> {
    load(path, |s| {
        let f: HomotopyFile = serde_json::from_str(s).map_err(|e| gv_core::Error::Parse {
            pointer: String::new(),
            message: e.to_string(),
        })?;
        HomotopyPair::from_file(&f, k, l)
    })
}

fn method(m: Method) -> RankMethod {
    match m {
        Method::Symbolic => RankMethod::Symbolic,
        Method::Randomized => RankMethod::Randomized,
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Symbolic => "symbolic",
        Method::Randomized => "randomized",
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// Module degree bound `n` with `P` concentrated in `[−n, n]`.
fn top_degree(p: &ExteriorModule) -> i64 {
    p.degrees().map(i64::abs).max().unwrap_or(0)
}

fn run(cli: &Cli) -> CliResult<Option<Report>> {
    let c = &cli.common;
    let base = json!({
        "seed": c.seed,
        "imax": c.imax,
        "pmax": c.pmax,
        "rmax": c.rmax,
        "method": method_name(c.method),
    });
    let with = |extra: Value| {
        let mut v = base.clone();
        if let (Value::Object(a), Value::Object(b)) = (&mut v, extra) {
            a.extend(b);
        }
        v
    };
    let report = match &cli.command {
        Command::Example { family, g, n } => {
            let module = match family {
                Family::Abelian => abelian(g.unwrap_or(1))?,
                Family::Macdonald => {
                    let built = macdonald_symmetric_product(g.unwrap_or(3), n.unwrap_or(2))?;
                    for w in &built.warnings {
                        eprintln!("warning: {w}");
                    }
                    built.module
                }
                Family::Blowup => blowup_example(g.unwrap_or(2), None, c.seed)?,
            };
            write_output(c, &(module.to_json() + "\n"))?;
            return Ok(None);
        }
        Command::Validate(inputs) => validate(inputs, with(json!({})))?,
        Command::Bgg {
            module,
            position,
            mult,
            delta,
        } => {
            let p = load_module(module)?;
            let l = bgg(&p)?;
            let generic = generic_cohomology(&l, Some(method(c.method)), c.seed);
            let mut result = json!({
                "term_dims": to_value(&l.term_dims()),
                "euler_characteristic": l.euler_characteristic(),
                "generic_cohomology": to_value(&generic),
            });
            let mut pass = true;
            let mut md = Markdown::new("bgg");
            md.dim_table(
                "Terms and generic cohomology",
                &l.term_dims(),
                &[("h^c", &generic.dims)],
            );
            if let Some(pos) = position {
                let graded = graded_cohomology(&l, *pos);
                let locus = support_locus(&l, *pos, *mult, c.seed)?;
                pass &= graded.consistent;
                md.graded(&graded);
                md.locus(&locus);
                result["graded_cohomology"] = to_value(&graded);
                result["support_locus"] = to_value(&locus);
            }
            if let Some(d) = delta {
                let check = codim_bound_check(&l, *d, c.seed)?;
                pass &= check.pass;
                md.codim(&check);
                result["codim_check"] = to_value(&check);
            }
            Report::new(
                "bgg",
                with(json!({"module": path_str(module), "position": position, "mult": mult, "delta": delta})),
                &[("module", MODULE_SCHEMA)],
                json!({}),
                pass,
                result,
                md,
            )
        }
        Command::JumpLoci { module, mult, delta } => {
            let p = load_module(module)?;
            let l = bgg(&p)?;
            let loci = l
                .positions()
                .map(|pos| support_locus(&l, pos, *mult, c.seed))
                .collect::<gv_core::Result<Vec<_>>>()?;
            let dims = jump_locus_dims(&l, c.seed);
            let check = codim_bound_check(&l, *delta, c.seed)?;
            let mut md = Markdown::new("jump-loci");
            for locus in &loci {
                md.locus(locus);
            }
            md.codim(&check);
            Report::new(
                "jump-loci",
                with(json!({"module": path_str(module), "mult": mult, "delta": delta})),
                &[("module", MODULE_SCHEMA)],
                json!({}),
                check.pass,
                json!({
                    "loci": to_value(&loci),
                    "first_jump_dims": to_value(&dims),
                    "codim_check": to_value(&check),
                }),
                md,
            )
        }
        Command::Tor { module } => {
            let p = load_module(module)?;
            let table = tor_table(&p, c.imax);
            let mut md = Markdown::new("tor");
            md.tor(&table);
            Report::new(
                "tor",
                with(json!({"module": path_str(module)})),
                &[("module", MODULE_SCHEMA)],
                json!({"i_max": c.imax}),
                true,
                json!({"minimal_generators": to_value(&p.minimal_generators()), "tor": to_value(&table)}),
                md,
            )
        }
        Command::Regularity { module, delta } => {
            let p = load_module(module)?;
            if p.is_zero() {
                return Err(CliError::Input {
                    path: path_str(module),
                    pointer: "/degrees".into(),
                    message: "regularity of the zero module".into(),
                });
            }
            let table = tor_table(&p, c.imax);
            let reg = regularity_from_table(&table);
            let below = regularity_violation(&table, reg.reg_at_imax - 1);
            let n = top_degree(&p);
            let bound = delta.map(|d| n + d);
            let pass = bound.is_none_or(|b| reg.reg_at_imax <= b);
            let mut md = Markdown::new("regularity");
            md.tor(&table);
            md.regularity(&reg, below, bound);
            Report::new(
                "regularity",
                with(json!({"module": path_str(module), "delta": delta})),
                &[("module", MODULE_SCHEMA)],
                json!({"i_max": c.imax}),
                pass,
                json!({
                    "regularity": to_value(&reg),
                    "not_regular_below": below.map(|(i, j)| json!({"i": i, "j": j, "dim": table.get(i, j)})),
                    "top_degree": n,
                    "bound": bound,
                }),
                md,
            )
        }
        Command::Crosscheck { module, delta } => {
            let p = load_module(module)?;
            let deltas: Vec<i64> = delta.map_or_else(|| vec![0, 1, 2], |d| vec![d]);
            let reports = deltas
                .iter()
                .map(|&d| eisenbud_crosscheck(&p, d, c.imax))
                .collect::<gv_core::Result<Vec<_>>>()?;
            let pass = reports.iter().all(|r| r.agree);
            let mut md = Markdown::new("crosscheck");
            md.crosscheck(&reports);
            Report::new(
                "crosscheck",
                with(json!({"module": path_str(module), "delta": deltas})),
                &[("module", MODULE_SCHEMA)],
                json!({"i_max": c.imax}),
                pass,
                json!({"checks": to_value(&reports)}),
                md,
            )
        }
        Command::Perversity { complex, k } => {
            let cx = load(complex, FreeGradedComplex::from_json)?;
            let profile = support_profile(&cx);
            let class = classify(&cx, *k);
            let heart = heart_bound_check(&cx, *k)?;
            let mut md = Markdown::new("perversity");
            md.profile(&profile);
            md.classification(&class);
            Report::new(
                "perversity",
                with(json!({"complex": path_str(complex), "k": k})),
                &[("complex", COMPLEX_SCHEMA)],
                json!({}),
                heart.pass,
                json!({
                    "rank_table": to_value(&cx.rank_table()),
                    "support_profile": to_value(&profile),
                    "classification": to_value(&class),
                    "heart_check": to_value(&heart),
                }),
                md,
            )
        }
        Command::Delta { strata } => {
            let spec = load(strata, StrataSpec::from_json)?;
            let delta = spec.delta_defect()?;
            let mut md = Markdown::new("delta");
            md.line(&format!(
                "dim X = {}, δ = {delta}, semismall: {}",
                spec.dim_x,
                delta == 0
            ));
            Report::new(
                "delta",
                with(json!({"strata": path_str(strata)})),
                &[("strata", STRATA_SCHEMA)],
                json!({}),
                true,
                json!({"dim_x": spec.dim_x, "strata": spec.strata, "delta": delta, "semismall": delta == 0}),
                md,
            )
        }
        Command::Lincplx {
            complex,
            summand,
            homotopy,
        } => {
            let k = load_jet(complex)?;
            if !is_minimal(&k) {
                return Err(CliError::Input {
                    path: path_str(complex),
                    pointer: "/differentials".into(),
                    message: "the complex is not minimal (a differential has a unit entry)".into(),
                });
            }
            let pages = madic_pages(&k, c.pmax, c.rmax)?;
            let jet = (c.pmax + 1) as u32;
            let diagnostics = quasilinearity_diagnostics(&k, jet)?;
            let mut pass = pages.e1_formula_holds;
            let mut result = json!({
                "linear": k.is_linear(),
                "fiber_cohomology": to_value(&fiber_cohomology(&k)),
                "pages": to_value(&pages),
                "quasilinearity": to_value(&diagnostics),
            });
            let mut md = Markdown::new("lincplx");
            md.pages(&pages);
            md.quasilinearity(&diagnostics);
            if let (Some(s), Some(h)) = (summand, homotopy) {
                let l = load_jet(s)?;
                let hp = load_homotopy(h, &k, &l)?;
                let outcome = match linearize_summand(&k, &l, &hp) {
                    Ok(lin) => {
                        json!({"certified": true, "linear_model": serde_json::from_str::<Value>(&lin.l0.to_json()).expect("json")})
                    }
                    Err(gv_core::Error::Certificate(msg)) | Err(gv_core::Error::Precondition(msg)) => {
                        pass = false;
                        json!({"certified": false, "reason": msg})
                    }
                    Err(e) => return Err(e.into()),
                };
                md.line(&format!("summand linearization certified: {}", outcome["certified"]));
                result["linearization"] = outcome;
            }
            let mut schemas = vec![("complex", JET_SCHEMA)];
            if homotopy.is_some() {
                schemas.push(("homotopy", HOMOTOPY_SCHEMA));
            }
            Report::new(
                "lincplx",
                with(json!({
                    "complex": path_str(complex),
                    "summand": summand.as_deref().map(path_str),
                    "homotopy": homotopy.as_deref().map(path_str),
                })),
                &schemas,
                json!({"p_max": c.pmax, "r_max": c.rmax, "jet_order": pages.jet_order, "diagnostic_jet": jet}),
                pass,
                result,
                md,
            )
        }
    };
    Ok(Some(report))
}

fn validate(inputs: &Inputs, config: Value) -> CliResult<Report> {
    let mut md = Markdown::new("validate");
    let (kind, path, schema, summary) = if let Some(p) = &inputs.module {
        let m = load_module(p)?;
        m.validate()?;
        md.dim_table("Dimensions", &m.dimension_table(), &[]);
        let summary = json!({"m": m.m(), "dimensions": to_value(&m.dimension_table()), "minimal_generators": to_value(&m.minimal_generators())});
        ("module", p, MODULE_SCHEMA, summary)
    } else if let Some(p) = &inputs.complex {
        let cx = load(p, FreeGradedComplex::from_json)?;
        (
            "complex",
            p,
            COMPLEX_SCHEMA,
            json!({"ranks": to_value(&cx.rank_table())}),
        )
    } else if let Some(p) = &inputs.jet {
        let k = load_jet(p)?;
        (
            "jet",
            p,
            JET_SCHEMA,
            json!({"ranks": to_value(&k.ranks()), "minimal": is_minimal(&k), "linear": k.is_linear()}),
        )
    } else if let Some(p) = &inputs.strata {
        let s = load(p, StrataSpec::from_json)?;
        s.validate()?;
        (
            "strata",
            p,
            STRATA_SCHEMA,
            json!({"dim_x": s.dim_x, "strata": s.strata}),
        )
    } else {
        unreachable!("clap requires one input")
    };
    md.line(&format!("{kind} `{}` is valid ({schema})", path.display()));
    let mut config = config;
    config[kind] = json!(path_str(path));
    Ok(Report::new(
        "validate",
        config,
        &[(kind, schema)],
        json!({}),
        true,
        json!({"valid": true, "summary": summary}),
        md,
    ))
}

fn write_output(c: &Common, text: &str) -> CliResult<()> {
    match &c.output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path_str(path),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|report| {
        let Some(report) = report else {
            return Ok(true);
        };
        let text = match cli.common.format {
            Format::Json => report.to_json(),
            Format::Markdown => report.to_markdown(),
        };
        write_output(&cli.common, &text)?;
        Ok(report.pass)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
