use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use uniprofile_core::profile::{parse_log, replay};
use uniprofile_core::recommend::{class_recommend, recommend, search, ClassBucket};
use uniprofile_core::stats::{all_distributions, distribution, render_table, summary};
use uniprofile_core::{
    emit_arff, ingest, load_dataset, parse_raw_bytes, write_canonical, Dataset, Lexicon, ProfileConfig,
    Recommendation, Severity, UserProfile,
};
use uniprofile_service::ServiceConfig;

#[derive(Parser)]
#[command(name = "uniprofile", version, about = "University profiling and recommendation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Jsonl,
}

#[derive(Args)]
struct DataArgs {
    /// Dataset: canonical .json, .arff, or a raw instance file.
    #[arg(long, env = "UNIPROFILE_DATA")]
    data: PathBuf,
}

#[derive(Args)]
struct UserArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Event log to replay.
    #[arg(long, env = "UNIPROFILE_EVENTS")]
    events: PathBuf,
    #[arg(long)]
    user: String,
    #[command(flatten)]
    weights: Weights,
}

#[derive(Args)]
struct Weights {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 5.0)]
    w_reg: f64,
    #[arg(long, default_value_t = 1.0)]
    w_search: f64,
    #[arg(long, default_value_t = 2.0)]
    w_click: f64,
    #[arg(long, default_value_t = 3.0)]
    w_import: f64,
}

impl Weights {
    fn config(&self) -> Result<ProfileConfig> {
        let config = ProfileConfig {
            alpha: self.alpha,
            w_reg: self.w_reg,
            w_search: self.w_search,
            w_click: self.w_click,
            w_import: self.w_import,
            ..ProfileConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a raw instance file and dump its records, one per line.
    Ingest {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
    },
    /// Deduplicate and project raw records into a canonical dataset file.
    Integrate {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a dataset as ARFF.
    Arff {
        #[command(flatten)]
        data: DataArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Class distributions.
    Stats {
        #[command(flatten)]
        data: DataArgs,
        /// A nominal attribute or `academic-emphasis`; all tables when absent.
        #[arg(long)]
        attribute: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Top-k universities for a user.
    Recommend {
        #[command(flatten)]
        user: UserArgs,
        #[arg(short, default_value_t = 10)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Top universities within each class of a nominal attribute.
    ClassRecommend {
        #[command(flatten)]
        user: UserArgs,
        #[arg(long)]
        attribute: String,
        #[arg(long, default_value_t = 3)]
        per_class: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Keyword search. Read-only: no profile is updated.
    Search {
        #[command(flatten)]
        data: DataArgs,
        query: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the HTTP service.
    Serve {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, env = "UNIPROFILE_EVENTS")]
        events: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "UNIPROFILE_PORT", default_value_t = 8080)]
        port: u16,
        #[command(flatten)]
        weights: Weights,
    },
}

fn load(data: &DataArgs) -> Result<Dataset> {
    let (dataset, report) =
        load_dataset(&data.data).with_context(|| format!("loading {}", data.data.display()))?;
    if let Some(report) = report {
        eprint!("{report}");
    }
    Ok(dataset)
}

fn write_out(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn user_profile(args: &UserArgs, dataset: &Dataset, lexicon: &Lexicon) -> Result<(UserProfile, ProfileConfig)> {
    let config = args.weights.config()?;
    let text = match std::fs::read_to_string(&args.events) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(e).with_context(|| format!("reading {}", args.events.display())),
    };
    let store = replay(&parse_log(&text)?, config, dataset, lexicon)?;
    match store.get(&args.user) {
        Some(p) => Ok((p.clone(), config)),
        None => bail!("unknown user `{}`", args.user),
    }
}

fn json_line(value: &impl serde::Serialize) -> String {
    serde_json::to_string(value).expect("serializable") + "\n"
}

fn render_recommendations(recs: &[Recommendation]) -> String {
    let width = recs.iter().map(|r| r.name.len()).max().unwrap_or(0).max(4);
    let mut out = String::new();
    writeln!(out, "{:>4}  {:<width$}  {:>10}  matched", "rank", "name", "score").unwrap();
    for (i, r) in recs.iter().enumerate() {
        let matched: Vec<String> = r.matched_features.iter().map(|m| m.feature.to_string()).collect();
        writeln!(out, "{:>4}  {:<width$}  {:>10.4}  {}", i + 1, r.name, r.score, matched.join(" ")).unwrap();
    }
    out
}

fn render_buckets(buckets: &[ClassBucket], format: Format) -> String {
    let mut out = String::new();
    for b in buckets {
        match format {
            Format::Jsonl => {
                for (i, r) in b.recommendations.iter().enumerate() {
                    out.push_str(&json_line(&serde_json::json!({
                        "class": b.class, "rank": i + 1, "name": r.name, "score": r.score,
                    })));
                }
            }
            Format::Text => {
                writeln!(out, "[{}]", b.class).unwrap();
                out.push_str(&render_recommendations(&b.recommendations));
                out.push('\n');
            }
        }
    }
    out
}

async fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Ingest { input, format } => {
            let bytes = std::fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let (records, diagnostics) = parse_raw_bytes(&bytes)?;
            for d in &diagnostics {
                eprintln!("{}: {d}", input.display());
            }
            let text = match format {
                Format::Jsonl => ingest::to_jsonl(&records),
                Format::Text => ingest::to_sexpr(&records),
            };
            write_out(None, &text)?;
            let failed = diagnostics.iter().any(|d| d.severity == Severity::Error);
            return Ok(if failed { ExitCode::from(2) } else { ExitCode::SUCCESS });
        }
        Command::Integrate { input, output } => {
            let dataset = load(&DataArgs { data: input })?;
            write_out(output.as_deref(), &write_canonical(&dataset))?;
        }
        Command::Arff { data, output } => {
            write_out(output.as_deref(), &emit_arff(&load(&data)?)?)?;
        }
        Command::Stats { data, attribute, format } => {
            let dataset = load(&data)?;
            let tables = match &attribute {
                Some(a) => vec![distribution(&dataset, a)?],
                None => all_distributions(&dataset),
            };
            let text = match (format, attribute) {
                (Format::Text, None) => summary(&dataset),
                (Format::Text, Some(_)) => tables.iter().map(render_table).collect(),
                (Format::Jsonl, _) => tables.iter().map(uniprofile_core::stats::to_jsonl).collect(),
            };
            write_out(None, &text)?;
        }
        Command::Recommend { user, k, format } => {
            let dataset = load(&user.data)?;
            let lexicon = Lexicon::from_dataset(&dataset);
            let (profile, config) = user_profile(&user, &dataset, &lexicon)?;
            let recs = recommend(&profile, &dataset, k, config.alpha)?;
            let text = match format {
                Format::Text => render_recommendations(&recs),
                Format::Jsonl => recs.iter().map(json_line).collect(),
            };
            write_out(None, &text)?;
        }
        Command::ClassRecommend { user, attribute, per_class, format } => {
            let dataset = load(&user.data)?;
            let lexicon = Lexicon::from_dataset(&dataset);
            let (profile, config) = user_profile(&user, &dataset, &lexicon)?;
            let buckets = class_recommend(&profile, &dataset, &attribute, per_class, config.alpha)?;
            write_out(None, &render_buckets(&buckets, format))?;
        }
        Command::Search { data, query, format } => {
            let dataset = load(&data)?;
            let hits = search(&dataset, &query, &Lexicon::from_dataset(&dataset));
            let text: String = match format {
                Format::Jsonl => hits.iter().map(json_line).collect(),
                Format::Text => hits.iter().map(|h| format!("{:>3}  {}\n", h.matches, h.name)).collect(),
            };
            write_out(None, &text)?;
        }
        Command::Serve { data, events, host, port, weights } => {
            let config = ServiceConfig { data: data.data, events, host, port, profile: weights.config()? };
            uniprofile_service::serve(config).await.map_err(|e| anyhow::anyhow!(e))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()).await {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
