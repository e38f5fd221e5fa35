//! Command line front end: dataset preparation, training, prediction,
//! cross-validation benchmarking and two diagnostic commands.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

use dnpi::ci::{ci_multinomial, ci_polytope_oracle, Direction};
use dnpi::contingency::ContingencyView;
use dnpi::data::{
    binarize_by_gain_ratio, discretize_equal_frequency, impute_modal, load_csv_path,
    AttributeSchema, ClassColumn, ClassSchema, LoadOptions, SchemaSidecar, Value,
};
use dnpi::entropy::GAIN_EPS;
use dnpi::eval::{cross_validate, raw_log, report_table, CvConfig, ReportFormat};
use dnpi::tree::{build, inspect_root};
use dnpi::{Algorithm, BuildParams, Dataset, DecisionTree};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "dnpi", version, about = "D-NPI classification trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Impute, discretize or binarize a CSV and write it back out
    Prep(PrepArgs),
    /// Build a tree and write it as a model file
    Train(TrainArgs),
    /// Classify a CSV with a trained model
    Predict(PredictArgs),
    /// Repeated k-fold cross-validation over datasets and algorithms
    Bench(BenchArgs),
    /// Show the D-NPI split decision surface at the root node
    InspectSplits(InspectArgs),
    /// Compare the greedy CI optimizer against the polytope vertex oracle
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV file
    #[arg(long)]
    data: PathBuf,
    /// Schema sidecar JSON (default: DATA with a .schema.json extension, if present)
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Class column name (default: sidecar declaration, then last column)
    #[arg(long)]
    class: Option<String>,
    /// Missing-value marker
    #[arg(long, default_value = "?")]
    missing: String,
}

#[derive(Args)]
struct PrepArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Replace missing categorical cells with the column's modal value
    #[arg(long)]
    impute: bool,
    /// Equal-frequency discretization, NAME:BINS (repeatable)
    #[arg(long, value_name = "NAME:BINS")]
    discretize: Vec<String>,
    /// Binarize a numeric attribute at its best gain-ratio threshold (repeatable)
    #[arg(long, value_name = "NAME")]
    binarize: Vec<String>,
    /// Output CSV path; a schema sidecar is written next to it
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = Algorithm::Dnpi)]
    algo: Algorithm,
    #[arg(long, default_value_t = 2)]
    min_split: usize,
    /// Model file path (JSON)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Input CSV file; the class column is optional
    #[arg(long)]
    data: PathBuf,
    /// Class column name, if it does not match the one the model was trained with
    #[arg(long)]
    class: Option<String>,
    /// Missing-value marker
    #[arg(long, default_value = "?")]
    missing: String,
    #[arg(long)]
    model: PathBuf,
    /// Prediction CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Dataset CSV paths (repeatable or comma separated)
    #[arg(long, required = true, value_delimiter = ',')]
    data: Vec<PathBuf>,
    /// Algorithms to run
    #[arg(long, value_delimiter = ',', default_values_t = [Algorithm::Dnpi, Algorithm::GainRatio])]
    algo: Vec<Algorithm>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    min_split: usize,
    /// Stratify folds by class
    #[arg(long)]
    stratified: bool,
    /// Class column name, applied to every dataset without a sidecar
    #[arg(long)]
    class: Option<String>,
    /// Missing-value marker
    #[arg(long, default_value = "?")]
    missing: String,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one JSON line per (dataset, algorithm, repeat, fold) here
    #[arg(long)]
    raw_log: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Largest attribute arity to draw (3..=8)
    #[arg(long, default_value_t = 7)]
    max_categories: usize,
    /// Largest per-category count to draw
    #[arg(long, default_value_t = 30)]
    max_count: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

impl From<OutputFormat> for ReportFormat {
    fn from(f: OutputFormat) -> ReportFormat {
        match f {
            OutputFormat::Text => ReportFormat::Text,
            OutputFormat::Json => ReportFormat::Json,
        }
    }
}

/// Everything needed to classify new rows: the tree plus the schema it
/// was grown against and the build configuration, for provenance.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: String,
    algorithm: Algorithm,
    min_split: usize,
    trained_rows: usize,
    attributes: Vec<AttributeSchema>,
    class: ClassSchema,
    tree: DecisionTree,
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Prep(args) => cmd_prep(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Bench(args) => cmd_bench(args),
        Command::InspectSplits(args) => cmd_inspect_splits(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    }
}

fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension("schema.json")
}

fn load(args: &DataArgs) -> Result<Dataset> {
    load_named(&args.data, &args.schema, &args.class, &args.missing)
}

fn load_named(
    data: &Path,
    schema: &Option<PathBuf>,
    class: &Option<String>,
    missing: &str,
) -> Result<Dataset> {
    let sidecar = match schema {
        Some(p) => Some(SchemaSidecar::from_path(p).with_context(|| format!("{}", p.display()))?),
        None => {
            let p = sidecar_path(data);
            if p.exists() {
                Some(SchemaSidecar::from_path(&p).with_context(|| format!("{}", p.display()))?)
            } else {
                None
            }
        }
    };
    let options = LoadOptions {
        class: match class {
            Some(name) => ClassColumn::Named(name.clone()),
            None => ClassColumn::Last,
        },
        missing_marker: Some(missing.to_string()),
        schema: sidecar,
    };
    load_csv_path(data, &options).with_context(|| format!("{}", data.display()))
}

fn cmd_prep(args: PrepArgs) -> Result<()> {
    let mut dataset = load(&args.data)?;
    if args.impute {
        dataset = impute_modal(&dataset)?;
    }
    for spec in &args.discretize {
        let (name, bins) = spec
            .rsplit_once(':')
            .with_context(|| format!("bad --discretize {spec:?}, expected NAME:BINS"))?;
        let bins: usize = bins
            .parse()
            .with_context(|| format!("bad bin count in --discretize {spec:?}"))?;
        dataset = discretize_equal_frequency(&dataset, name, bins, None)?;
        println!("discretize {name}: {bins} equal-frequency bins");
    }
    for name in &args.binarize {
        let (binarized, info) = binarize_by_gain_ratio(&dataset, name)?;
        dataset = binarized;
        println!(
            "binarize {name}: threshold={} gain_ratio={:.6}",
            info.threshold, info.gain_ratio
        );
        if info.information_gain <= GAIN_EPS {
            println!("warning: {name} has no information gain at any threshold");
        }
    }

    let file = fs::File::create(&args.out)
        .with_context(|| format!("{}", args.out.display()))?;
    dataset.write_csv(file, &args.data.missing)?;
    let sidecar = sidecar_path(&args.out);
    fs::write(
        &sidecar,
        serde_json::to_string_pretty(&dataset.schema_sidecar())? + "\n",
    )?;
    println!(
        "wrote {} ({} rows) and {}",
        args.out.display(),
        dataset.len(),
        sidecar.display()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let dataset = load(&args.data)?;
    let class = dataset
        .class_schema()
        .context("training data has no class column")?
        .clone();
    let params = BuildParams {
        min_split: args.min_split,
        algorithm: args.algo,
    };
    let tree = build(&dataset, &params)?;
    let model = ModelFile {
        version: VERSION.to_string(),
        algorithm: args.algo,
        min_split: args.min_split,
        trained_rows: dataset.len(),
        attributes: dataset.attributes().to_vec(),
        class,
        tree,
    };
    fs::write(&args.out, serde_json::to_string_pretty(&model)? + "\n")
        .with_context(|| format!("{}", args.out.display()))?;
    println!(
        "trained {} tree on {} rows: {} leaves, written to {}",
        args.algo,
        dataset.len(),
        model.tree.size(),
        args.out.display()
    );
    Ok(())
}

fn read_model(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
    let model: ModelFile =
        serde_json::from_str(&text).with_context(|| format!("{}", path.display()))?;
    Ok(model)
}

/// Cell as the string it had in the CSV, or None when missing.
fn cell_string(dataset: &Dataset, row: usize, column: usize) -> Option<String> {
    match dataset.value(row, column) {
        Value::Missing => None,
        Value::Cat(i) => Some(
            dataset.attributes()[column]
                .labels()
                .expect("categorical cell in categorical column")[*i]
                .clone(),
        ),
        Value::Num(x) => Some(format!("{x}")),
    }
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let model = read_model(&args.model)?;

    // The file is labeled when it has the model's class column (or one
    // named by --class). Attribute columns are matched by name and their
    // values by label text, so out-of-schema values fall through to each
    // node's fallback class instead of failing the load.
    let headers: Vec<String> = csv::Reader::from_path(&args.data)
        .with_context(|| format!("{}", args.data.display()))?
        .headers()?
        .iter()
        .map(str::to_string)
        .collect();
    let class_column = match &args.class {
        Some(name) => ClassColumn::Named(name.clone()),
        None if headers.iter().any(|h| *h == model.class.name) => {
            ClassColumn::Named(model.class.name.clone())
        }
        None => ClassColumn::Absent,
    };
    let labeled = !matches!(class_column, ClassColumn::Absent);
    let options = LoadOptions {
        class: class_column,
        missing_marker: Some(args.missing.clone()),
        schema: None,
    };
    let dataset =
        load_csv_path(&args.data, &options).with_context(|| format!("{}", args.data.display()))?;

    let columns: Vec<usize> = model
        .attributes
        .iter()
        .map(|a| dataset.attribute_index(&a.name))
        .collect::<Result<_, _>>()
        .context("data is missing a model attribute")?;

    let mut out = String::new();
    out.push_str(&format!(
        "# dnpi predict version={} model={} data={}\n",
        model.version,
        args.model.display(),
        args.data.display()
    ));
    out.push_str(if labeled {
        "row,predicted,actual\n"
    } else {
        "row,predicted\n"
    });

    let mut correct = 0u64;
    for row in 0..dataset.len() {
        let instance: Vec<Option<usize>> = columns
            .iter()
            .zip(&model.attributes)
            .map(|(&c, attr)| {
                let text = cell_string(&dataset, row, c)?;
                attr.labels()
                    .expect("model attributes are categorical")
                    .iter()
                    .position(|l| *l == text)
            })
            .collect();
        let predicted = model.tree.classify(&instance)?;
        let label = &model.class.labels[predicted];
        if labeled {
            let actual = dataset
                .class_of(row)
                .map(|i| dataset.class_schema().expect("labeled").labels[i].clone())
                .context("missing class label")?;
            if *label == actual {
                correct += 1;
            }
            out.push_str(&format!("{},{label},{actual}\n", row + 1));
        } else {
            out.push_str(&format!("{},{label}\n", row + 1));
        }
    }
    fs::write(&args.out, out).with_context(|| format!("{}", args.out.display()))?;

    println!("predicted {} rows to {}", dataset.len(), args.out.display());
    if labeled {
        println!(
            "accuracy: {:.2}% ({}/{})",
            100.0 * correct as f64 / dataset.len() as f64,
            correct,
            dataset.len()
        );
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    if args.algo.is_empty() {
        bail!("no algorithm given");
    }
    let config = CvConfig {
        folds: args.folds,
        repeats: args.repeats,
        seed: args.seed,
        stratified: args.stratified,
    };
    let mut reports = Vec::new();
    for path in &args.data {
        let dataset = load_named(path, &None, &args.class, &args.missing)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        for &algorithm in &args.algo {
            let params = BuildParams {
                min_split: args.min_split,
                algorithm,
            };
            reports.push(cross_validate(&dataset, &name, &params, &config)?);
        }
    }

    let report = report_table(&reports, args.format.into())?;
    match &args.out {
        Some(path) => {
            fs::write(path, &report).with_context(|| format!("{}", path.display()))?;
            println!("report written to {}", path.display());
        }
        None => print!("{report}"),
    }
    if let Some(path) = &args.raw_log {
        let header = serde_json::json!({
            "version": VERSION,
            "folds": args.folds,
            "repeats": args.repeats,
            "seed": args.seed,
            "stratified": args.stratified,
            "min_split": args.min_split,
            "algorithms": args.algo.iter().map(Algorithm::to_string).collect::<Vec<_>>(),
            "datasets": args.data.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        });
        fs::write(path, format!("{header}\n") + &raw_log(&reports))
            .with_context(|| format!("{}", path.display()))?;
        println!("raw log written to {}", path.display());
    }
    Ok(())
}

fn cmd_inspect_splits(args: InspectArgs) -> Result<()> {
    let dataset = load(&args.data)?;
    let inspection = inspect_root(&dataset)?;

    let (no_lo, no_hi) = inspection.no_attribute.to_f64();
    println!("root node, {} rows", dataset.len());
    println!("no-attribute interval: [{no_lo:.12}, {no_hi:.12}]");
    let name_width = dataset
        .attributes()
        .iter()
        .map(|a| a.name.len())
        .max()
        .unwrap_or(0)
        .max("attribute".len());
    println!(
        "{:<name_width$}  {:>14}  {:>14}  {:>6}  {:>6}  selected",
        "attribute", "ci lower", "ci upper", "lower", "upper"
    );
    for d in &inspection.diagnostics {
        let (lo, hi) = d.ci.interval().to_f64();
        println!(
            "{:<name_width$}  {:>14.12}  {:>14.12}  {:>6}  {:>6}  {}",
            dataset.attributes()[d.attribute].name,
            lo,
            hi,
            if d.passes_lower { "pass" } else { "fail" },
            if d.passes_upper { "pass" } else { "fail" },
            if inspection.selected == Some(d.attribute) {
                "*"
            } else {
                ""
            }
        );
    }
    if inspection.selected.is_none() {
        println!("no attribute passes both conditions: the root stays a leaf");
    }
    Ok(())
}

fn cmd_oracle_check(args: OracleArgs) -> Result<()> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    if !(3..=8).contains(&args.max_categories) {
        bail!("--max-categories must be in 3..=8");
    }
    if args.max_count == 0 {
        bail!("--max-count must be at least 1");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut mismatches = 0usize;
    for trial in 0..args.trials {
        let k = rng.random_range(3..=args.max_categories);
        let classes = rng.random_range(2..=4);
        let mut counts = vec![vec![0u64; classes]; k];
        for row in counts.iter_mut() {
            let total = rng.random_range(1..=args.max_count);
            for _ in 0..total {
                row[rng.random_range(0..classes)] += 1;
            }
        }
        let view = ContingencyView::new(0, (0..k).collect(), counts.clone())
            .expect("generated table is well formed");
        let link = view.majority_class_map();
        let score = ci_multinomial(&view, &link)?;
        let lo = ci_polytope_oracle(&view, &link, Direction::Min)?;
        let hi = ci_polytope_oracle(&view, &link, Direction::Max)?;
        if score.lower() != &lo || score.upper() != &hi {
            mismatches += 1;
            eprintln!(
                "mismatch at trial {trial}: counts={counts:?} greedy=[{}, {}] oracle=[{lo}, {hi}]",
                score.lower(),
                score.upper()
            );
        }
    }
    println!(
        "oracle-check: {} trials, k in 3..={}, counts <= {}, seed {}: {} mismatches",
        args.trials, args.max_categories, args.max_count, args.seed, mismatches
    );
    if mismatches > 0 {
        bail!("greedy and oracle disagree on {mismatches} tables");
    }
    Ok(())
}
