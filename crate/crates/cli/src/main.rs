//! `oplab`: batch front end for classification, decomposition, normality
//! checks, convergence studies and operator generation.
//!
//! Exit status: 0 success, 1 premise or verification failure, 2 bad input.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info};
use serde::Serialize;

use oplab_core::classification::{classify, ClassifyOptions, Layers};
use oplab_core::decomposition::{
    adjoint_block_form, analyze_positive_form, block_reduce_positive, hyponormal_block_form, matrix_csv, normality_from_blocks,
    positive_form_of, quasinormal_decompose, DecomposeOptions,
};
use oplab_core::generate::{generate, GeneratorClass, GeneratorRecipe};
use oplab_core::kernels::svd;
use oplab_core::normality::{
    check_compact_hyponormal, check_equal_kernels_normal, check_invertible_normal, check_weyl_condition_normal, NormalityOptions,
    NormalityVerdict,
};
use oplab_core::operator::{from_json_str, to_json_string};
use oplab_core::report::{self, convergence_study};
use oplab_core::{ComplexMatrix, OpError, StructuredOperator, ToleranceConfig};

#[derive(Parser)]
#[command(name = "oplab", version, about = "Finite-section analysis of structured operators on l2(N)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify an operator: symbolic flags, section predicates, essential spectrum estimate.
    Analyze {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        #[command(flatten)]
        common: Common,
    },
    /// Canonical decomposition at the largest dimension.
    Decompose {
        spec: PathBuf,
        #[arg(long, value_enum)]
        form: Form,
        #[command(flatten)]
        common: Common,
    },
    /// Normality criteria as implications.
    Verify {
        spec: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
        criterion: Vec<CriterionArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Per-dimension corroboration table (`n,metric,value`).
    Study {
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write an operator spec from a seeded recipe.
    Generate {
        /// Class name, e.g. quasinormal-AN or hyponormal-closure.
        #[arg(long)]
        class: Option<String>,
        /// Full recipe as JSON; `--class` and `--seed` override its fields.
        #[arg(long)]
        recipe: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Section dimensions, ascending.
    #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
    dims: Vec<usize>,
    #[arg(long)]
    tol_eq: Option<f64>,
    #[arg(long)]
    tol_psd: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for report.json, summary.txt and CSV tables.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Symbolic,
    Numeric,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Positive,
    Quasinormal,
    Hyponormal,
    Adjoint,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum CriterionArg {
    Invertible,
    EqualKernels,
    Weyl,
    Compact,
    All,
}

enum Failure {
    /// Premise or verification failure.
    Check(String),
    Input(String),
}

impl From<OpError> for Failure {
    fn from(e: OpError) -> Self {
        match e {
            OpError::Parse { .. }
            | OpError::Invalid(_)
            | OpError::DimensionMismatch(_)
            | OpError::ShapeMismatch(_)
            | OpError::UndefinedSequenceIndex { .. }
            | OpError::RecipeInfeasible(_) => Failure::Input(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

/// Resolved settings shared by every command.
struct RunConfig {
    dims: Vec<usize>,
    tol: ToleranceConfig,
    seed: u64,
    out: Option<PathBuf>,
}

impl RunConfig {
    fn from_common(c: &Common) -> Result<Self, Failure> {
        if c.dims.is_empty() || c.dims.contains(&0) {
            return Err(Failure::Input("--dims needs positive dimensions".into()));
        }
        if c.dims.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Failure::Input(format!("--dims must be strictly ascending, got {:?}", c.dims)));
        }
        let mut tol = ToleranceConfig::default();
        if let Some(e) = c.tol_eq {
            tol.eq_tol = e;
        }
        if let Some(p) = c.tol_psd {
            tol.psd_tol = p;
        }
        tol.validate()?;
        Ok(Self { dims: c.dims.clone(), tol, seed: c.seed.unwrap_or(0), out: c.out.clone() })
    }

    fn largest(&self) -> usize {
        *self.dims.last().expect("dims checked nonempty")
    }

    fn decompose_opts(&self) -> DecomposeOptions {
        DecomposeOptions::with_tol(self.tol)
    }
}

/// Artifacts are collected first and written in one pass.
#[derive(Default)]
struct Artifacts {
    summary: String,
    files: Vec<(String, String)>,
}

impl Artifacts {
    fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
        s.push('\n');
        self.files.push((name.to_string(), s));
    }

    fn file(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }

    fn flush(&self, out: Option<&Path>) -> Result<(), Failure> {
        print!("{}", self.summary);
        if let Some(dir) = out {
            fs::create_dir_all(dir)?;
            for (name, content) in &self.files {
                fs::write(dir.join(name), content)?;
                debug!("wrote {}", dir.join(name).display());
            }
            fs::write(dir.join("summary.txt"), &self.summary)?;
        }
        Ok(())
    }
}

fn load(path: &Path) -> Result<StructuredOperator, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    from_json_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn analyze(op: &StructuredOperator, mode: ModeArg, cfg: &RunConfig, art: &mut Artifacts) -> Result<Option<String>, Failure> {
    let mut opts = ClassifyOptions::new(cfg.dims.clone());
    opts.tol = cfg.tol;
    opts.seed = cfg.seed;
    opts.layers = match mode {
        ModeArg::Symbolic => Layers::Symbolic,
        ModeArg::Numeric => Layers::Numeric,
        ModeArg::Both => Layers::Both,
    };
    let r = classify(op, &opts)?;
    art.summary.push_str(&report::summarize_classification(&r));
    #[derive(Serialize)]
    struct AnalyzeReport<'a> {
        classification: &'a oplab_core::classification::ClassificationReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        decomposition: Option<oplab_core::decomposition::QuasinormalDecomposition>,
    }
    let quasinormal = r.flags.get("quasinormal").is_some_and(|f| !f.is_empty() && f.iter().all(|x| x.holds));
    let decomposition = if quasinormal && opts.layers.numeric() {
        match quasinormal_decompose(op, cfg.largest(), &cfg.decompose_opts()) {
            Ok(q) => {
                art.summary.push_str(&report::summarize_quasinormal(&q));
                Some(q)
            }
            Err(e) => {
                info!("no quasinormal decomposition: {e}");
                None
            }
        }
    } else {
        None
    };
    art.json("report.json", &AnalyzeReport { classification: &r, decomposition });
    Ok(r.estimate_mismatch.clone())
}

/// Nonzero entries as `(row, col, re, im)`.
fn entries(m: &ComplexMatrix, floor: f64) -> Vec<(usize, usize, f64, f64)> {
    let mut v = Vec::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            if z.norm() > floor {
                v.push((i, j, z.re, z.im));
            }
        }
    }
    v
}

fn decompose(op: &StructuredOperator, form: Form, cfg: &RunConfig, art: &mut Artifacts) -> Result<Option<String>, Failure> {
    let n = cfg.largest();
    let opts = cfg.decompose_opts();
    let tol = &cfg.tol;
    match form {
        Form::Positive => {
            let (f, alpha) = positive_form_of(op, n, &opts)?;
            let t = oplab_core::operator::render(op, n)?.hermitian_part();
            let defects = f.defects(&t)?;
            let analysis = analyze_positive_form(&f, tol)?;
            let reduction = block_reduce_positive(&f, tol);
            let _ = writeln!(
                art.summary,
                "positive form at n = {n}: alpha = {:.12}, rank K1 = {}, rank K2 = {}, kernel dim = {}\n  reassembly {:.3e}, ||K1 K2|| {:.3e}, alpha - ||K1|| margin {:.3e}",
                f.alpha, f.rank_k1, f.rank_k2, analysis.kernel_dim, defects.reassembly, defects.k1k2, defects.k1_alpha_margin
            );
            #[derive(Serialize)]
            struct R<'a> {
                alpha: oplab_core::decomposition::AlphaChoice,
                form: &'a oplab_core::decomposition::PositiveCanonicalForm,
                defects: oplab_core::decomposition::FormDefects,
                analysis: oplab_core::decomposition::PositiveFormAnalysis,
                #[serde(skip_serializing_if = "Option::is_none")]
                reduction: Option<oplab_core::decomposition::PositiveBlockReduction>,
                #[serde(skip_serializing_if = "Option::is_none")]
                reduction_error: Option<String>,
            }
            let ok = defects.holds(tol);
            let (reduction, reduction_error) = match reduction {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            art.json("report.json", &R { alpha, form: &f, defects, analysis, reduction, reduction_error });
            art.file("k1.csv", matrix_csv(&f.k1));
            art.file("k2.csv", matrix_csv(&f.k2));
            Ok((!ok).then(|| "positive form invariants fail".to_string()))
        }
        Form::Quasinormal => {
            let q = quasinormal_decompose(op, n, &opts)?;
            art.summary.push_str(&report::summarize_quasinormal(&q));
            let ok = q.reassembly_error <= tol.eq_tol * q.norm.max(1.0) && q.max_unitarity_defect() <= tol.eq_tol;
            art.json("report.json", &q);
            if let Some(e) = &q.essential_block {
                art.file("essential_v.csv", matrix_csv(&e.v));
            }
            Ok((!ok).then(|| "quasinormal reassembly or unitarity defect above tolerance".to_string()))
        }
        Form::Hyponormal => {
            let f = hyponormal_block_form(op, n, &opts)?;
            let nb = normality_from_blocks(&f, tol)?;
            art.summary.push_str(&report::summarize_hyponormal(&f));
            let a_sv = if f.a.rows() * f.a.cols() > 0 { svd(&f.a)?.sigma } else { vec![] };
            let floor = tol.rank_tol * f.norm.max(1.0);
            let a_entries = entries(&f.a, floor);
            for &(i, j, re, im) in &a_entries {
                let _ = writeln!(art.summary, "  A[{i},{j}] = {re:.16} {im:+.3e}i");
            }
            let _ = writeln!(art.summary, "  normal from blocks: {} (V1 unitary {}, B normal {})", nb.normal, nb.v1_unitary, nb.b_normal);
            #[derive(Serialize)]
            struct R<'a> {
                form: &'a oplab_core::decomposition::HyponormalBlockForm,
                a_entries: Vec<(usize, usize, f64, f64)>,
                a_singular_values: Vec<f64>,
                normality: oplab_core::decomposition::BlockNormality,
            }
            let ok = f.holds(tol);
            art.json("report.json", &R { form: &f, a_entries, a_singular_values: a_sv, normality: nb });
            art.file("a.csv", matrix_csv(&f.a));
            art.file("b.csv", matrix_csv(&f.b));
            art.file("v1.csv", matrix_csv(&f.v1));
            Ok((!ok).then(|| "hyponormal block identities fail".to_string()))
        }
        Form::Adjoint => {
            let f = adjoint_block_form(op, n, &opts)?;
            let d = &f.defects;
            let _ = writeln!(
                art.summary,
                "adjoint block form at n = {n}\n  ||S1 S1* - I|| = {:.3e}\n  ||S1 A1*|| = {:.3e}\n  ||A1 A1* + B1 B1* - beta^2|| = {:.3e}\n  B1*B1 margin = {:.3e}",
                d.s1_coisometry, d.s1_a1_star, d.gram_identity, d.b1_margin
            );
            let ok = f.holds(tol);
            art.json("report.json", &f);
            art.file("s1.csv", matrix_csv(&f.s1));
            art.file("a1.csv", matrix_csv(&f.a1));
            Ok((!ok).then(|| "adjoint block identities fail".to_string()))
        }
    }
}

fn verify(op: &StructuredOperator, criteria: &[CriterionArg], cfg: &RunConfig, art: &mut Artifacts) -> Result<Option<String>, Failure> {
    let all = criteria.contains(&CriterionArg::All);
    let pick = |c| all || criteria.contains(&c);
    let mut opts = NormalityOptions::new(cfg.dims.clone());
    opts.tol = cfg.tol;
    type Check = fn(&StructuredOperator, &NormalityOptions) -> oplab_core::Result<NormalityVerdict>;
    let table: [(CriterionArg, &str, Check); 4] = [
        (CriterionArg::Invertible, "invertible", check_invertible_normal),
        (CriterionArg::EqualKernels, "equal_kernels", check_equal_kernels_normal),
        (CriterionArg::Weyl, "weyl", check_weyl_condition_normal),
        (CriterionArg::Compact, "compact", check_compact_hyponormal),
    ];
    let mut verdicts = Vec::new();
    let mut errors = Vec::new();
    let mut failed = Vec::new();
    for (c, name, check) in table {
        if !pick(c) {
            continue;
        }
        match check(op, &opts) {
            Ok(v) => {
                art.summary.push_str(&report::summarize_verdict(&v));
                art.file(&format!("decay_{name}.csv"), v.study.to_csv());
                if !(v.premise_holds && v.conclusion_normal) {
                    failed.push(name);
                }
                verdicts.push(v);
            }
            Err(e) => {
                let e = Failure::from(e);
                match e {
                    Failure::Input(m) => return Err(Failure::Input(m)),
                    Failure::Check(m) => {
                        let _ = writeln!(art.summary, "{name}: {m}");
                        failed.push(name);
                        errors.push((name.to_string(), m));
                    }
                }
            }
        }
    }
    #[derive(Serialize)]
    struct R {
        verdicts: Vec<NormalityVerdict>,
        errors: Vec<(String, String)>,
    }
    art.json("report.json", &R { verdicts, errors });
    Ok((!failed.is_empty()).then(|| format!("not established: {}", failed.join(", "))))
}

fn study(op: &StructuredOperator, cfg: &RunConfig, art: &mut Artifacts) -> Result<Option<String>, Failure> {
    let t = convergence_study(op, &cfg.dims, &cfg.decompose_opts())?;
    for m in report::STUDY_METRICS {
        let col = t.column(m);
        if let Some((n, v)) = col.last() {
            let _ = writeln!(art.summary, "{m:<30} n = {n:<5} {}", report::fmt_real(*v));
        }
    }
    art.file("study.csv", t.to_csv());
    Ok(None)
}

fn generate_cmd(class: Option<&str>, recipe: Option<&Path>, common: &Common) -> Result<(), Failure> {
    let mut r = match recipe {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            serde_json::from_str::<GeneratorRecipe>(&text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?
        }
        None => GeneratorRecipe::default(),
    };
    match (class, recipe) {
        (Some(c), _) => r.class = GeneratorClass::parse(c)?,
        (None, None) => return Err(Failure::Input("generate needs --class or --recipe".into())),
        _ => {}
    }
    if let Some(s) = common.seed {
        r.seed = s;
    }
    let g = generate(&r)?;
    let spec = to_json_string(&g.op) + "\n";
    match &common.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let stem = format!("{}-{}", r.class.name(), r.seed);
            fs::write(dir.join(format!("{stem}.json")), &spec)?;
            let mut c = serde_json::to_string_pretty(&serde_json::json!({ "recipe": g.recipe, "construction": g.construction }))
                .expect("construction serializes");
            c.push('\n');
            fs::write(dir.join(format!("{stem}.construction.json")), c)?;
            println!("wrote {}", dir.join(format!("{stem}.json")).display());
        }
        None => print!("{spec}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (common, outcome, art) = match &cli.command {
        Command::Generate { class, recipe, common } => return generate_cmd(class.as_deref(), recipe.as_deref(), common),
        Command::Analyze { spec, mode, common } => {
            let cfg = RunConfig::from_common(common)?;
            let op = load(spec)?;
            let mut art = Artifacts::default();
            let o = analyze(&op, *mode, &cfg, &mut art)?;
            (cfg, o, art)
        }
        Command::Decompose { spec, form, common } => {
            let cfg = RunConfig::from_common(common)?;
            let op = load(spec)?;
            let mut art = Artifacts::default();
            let o = decompose(&op, *form, &cfg, &mut art)?;
            (cfg, o, art)
        }
        Command::Verify { spec, criterion, common } => {
            let cfg = RunConfig::from_common(common)?;
            let op = load(spec)?;
            let mut art = Artifacts::default();
            let o = verify(&op, criterion, &cfg, &mut art)?;
            (cfg, o, art)
        }
        Command::Study { spec, common } => {
            let cfg = RunConfig::from_common(common)?;
            let op = load(spec)?;
            let mut art = Artifacts::default();
            let o = study(&op, &cfg, &mut art)?;
            (cfg, o, art)
        }
    };
    art.flush(common.out.as_deref())?;
    match outcome {
        Some(m) => Err(Failure::Check(m)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("OPSPEC_LOG")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("input error: {m}");
            ExitCode::from(2)
        }
    }
}
