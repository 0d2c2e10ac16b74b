//! `caremetrics`: ingest hospital event data, compute KPIs, manage alerts
//! and serve the HTTP API.
//!
//! Exit status is 0 on success, 1 when data or storage is at fault and 2
//! for usage errors.

mod output;

use std::fs::File;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use caremetrics_api::{AppState, TOKEN_ENV};
use caremetrics_core::ingest::{generate_synthetic, SynthConfig};
use caremetrics_core::query::{
    self, AlertParams, DashboardParams, FilterParams, IngestParams, Query, QueryError, RankParams,
    SeriesParams, ValueParams, Workspace,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Emit;

#[derive(Parser)]
#[command(name = "caremetrics", version, about = "Hospital KPI analytics")]
struct Cli {
    /// Directory holding caremetrics.toml, the record store and alert state.
    #[arg(long, env = "CAREMETRICS_DATA_DIR", default_value = ".", global = true)]
    data_dir: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Table, global = true)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Append records from a JSONL or CSV file (`-` reads stdin).
    Ingest {
        file: PathBuf,
        /// Input format: jsonl or csv. Defaults to the file extension.
        #[arg(long = "input-format")]
        input_format: Option<String>,
        /// Record type of every CSV row.
        #[arg(long = "type")]
        record_type: Option<String>,
    },
    /// Write a deterministic synthetic dataset as JSONL.
    Gen {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        months: u32,
        /// Mean daily admissions.
        #[arg(long)]
        mean: Option<f64>,
        /// Comma-separated department names.
        #[arg(long, value_delimiter = ',')]
        departments: Option<Vec<String>>,
        #[arg(long)]
        doctors: Option<u32>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the registered KPIs.
    Kpis,
    /// Compute one KPI for a period.
    Compute {
        kpi: String,
        #[arg(long)]
        period: String,
        /// month or ytd.
        #[arg(long, default_value = "month")]
        scope: String,
        #[command(flatten)]
        filter: FilterArgs,
        /// Break the value down along a dimension.
        #[arg(long)]
        drilldown: Option<String>,
    },
    /// Compute one KPI for every month in a range.
    Series {
        kpi: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value = "month")]
        scope: String,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Month and year-to-date values of a dashboard view.
    Report {
        /// executive, quality, operations or finance.
        view: String,
        #[arg(long)]
        period: String,
    },
    /// Rank DRGs by revenue or margin.
    Rank {
        #[arg(long)]
        period: String,
        #[arg(long, default_value = "revenue")]
        key: String,
        #[arg(long, default_value = "top")]
        order: String,
        #[arg(long, default_value_t = query::DEFAULT_RANK_N)]
        n: usize,
    },
    /// Inspect and act on alerts.
    Alerts {
        #[command(subcommand)]
        action: AlertCommand,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Bearer token required on every route except /health.
        #[arg(long, env = TOKEN_ENV, hide_env_values = true)]
        token: Option<String>,
    },
}

#[derive(Subcommand)]
enum AlertCommand {
    /// List alerts, optionally in one state.
    List {
        #[arg(long)]
        state: Option<String>,
    },
    /// Evaluate the rules against the stored data.
    Eval,
    Acknowledge {
        id: String,
    },
    Resolve {
        id: String,
    },
}

#[derive(Args, Clone, Default)]
struct FilterArgs {
    #[arg(long)]
    department: Option<String>,
    #[arg(long)]
    doctor: Option<String>,
    #[arg(long)]
    location: Option<String>,
    #[arg(long)]
    drg: Option<String>,
    #[arg(long)]
    organ: Option<String>,
}

impl From<FilterArgs> for FilterParams {
    fn from(a: FilterArgs) -> Self {
        FilterParams {
            department: a.department,
            doctor: a.doctor,
            location: a.location,
            drg: a.drg,
            organ: a.organ,
        }
    }
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn data(message: impl ToString) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }

    fn usage(message: impl ToString) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl From<QueryError> for Failure {
    fn from(e: QueryError) -> Self {
        let code = if e.is_usage() { 2 } else { 1 };
        Failure {
            code,
            message: format!("{} ({})", e.message, e.code),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let format = cli.format;
    if let Command::Gen {
        seed,
        months,
        mean,
        departments,
        doctors,
        out,
    } = cli.command
    {
        let defaults = SynthConfig::default();
        let config = SynthConfig {
            seed,
            months,
            daily_admissions_mean: mean.unwrap_or(defaults.daily_admissions_mean),
            departments: departments.unwrap_or(defaults.departments),
            doctors: doctors.unwrap_or(defaults.doctors),
            ..defaults
        };
        let batch = generate_synthetic(&config).map_err(Failure::usage)?;
        let text = batch.to_jsonl();
        return match out {
            Some(path) => std::fs::write(&path, text)
                .map_err(|e| Failure::data(format!("{}: {e}", path.display()))),
            None => write_stdout(&text),
        };
    }

    let ws = Workspace::load(&cli.data_dir).map_err(Failure::data)?;
    match cli.command {
        Command::Gen { .. } => unreachable!("handled above"),
        Command::Serve { addr, token } => serve(ws, addr, token),
        Command::Ingest {
            file,
            input_format,
            record_type,
        } => {
            let input_format = input_format.or_else(|| {
                (file.extension().and_then(|e| e.to_str()) == Some("csv")).then(|| "csv".into())
            });
            let params = IngestParams {
                format: input_format,
                record_type,
            };
            let mut store = ws.open_store().map_err(Failure::data)?;
            let source = file.display().to_string();
            let body = if source == "-" {
                query::ingest(&mut store, io::stdin().lock(), &params, "stdin")?
            } else {
                let f = File::open(&file).map_err(|e| Failure::data(format!("{source}: {e}")))?;
                query::ingest(&mut store, f, &params, &source)?
            };
            if body.accepted > 0 {
                let mut alerts = ws.open_alerts().map_err(Failure::data)?;
                query::evaluate_alerts(&ws, &store.snapshot(), &mut alerts, chrono::Utc::now())?;
            }
            emit(format, &body)?;
            if body.has_data_errors() {
                return Err(Failure::data(format!(
                    "{} line(s) failed to parse, {} record(s) invalid",
                    body.parse_errors.len(),
                    body.rejected_invalid
                )));
            }
            Ok(())
        }
        Command::Kpis => emit(format, &query::kpi_list(&ws)),
        Command::Alerts { action } => {
            let mut alerts = ws.open_alerts().map_err(Failure::data)?;
            let now = chrono::Utc::now();
            match action {
                AlertCommand::List { state } => {
                    let params = AlertParams { state };
                    emit(format, &query::alert_list(&alerts, &params.state)?)
                }
                AlertCommand::Eval => {
                    let store = ws.open_store().map_err(Failure::data)?;
                    query::evaluate_alerts(&ws, &store.snapshot(), &mut alerts, now)?;
                    emit(format, &query::alert_list(&alerts, &None)?)
                }
                AlertCommand::Acknowledge { id } => emit(
                    format,
                    &query::alert_action(&mut alerts, &id, "acknowledge", now)?,
                ),
                AlertCommand::Resolve { id } => emit(
                    format,
                    &query::alert_action(&mut alerts, &id, "resolve", now)?,
                ),
            }
        }
        command => {
            let store = ws.open_store().map_err(Failure::data)?;
            let data = store.snapshot();
            let q = Query::new(&ws, &data);
            match command {
                Command::Compute {
                    kpi,
                    period,
                    scope,
                    filter,
                    drilldown,
                } => {
                    let params = ValueParams {
                        period: Some(period),
                        scope: Some(scope),
                        filter: filter.into(),
                        drilldown,
                    };
                    emit(format, &q.kpi_value(&kpi, &params)?)
                }
                Command::Series {
                    kpi,
                    from,
                    to,
                    scope,
                    filter,
                } => {
                    let params = SeriesParams {
                        from: Some(from),
                        to: Some(to),
                        scope: Some(scope),
                        filter: filter.into(),
                    };
                    emit(format, &q.kpi_series(&kpi, &params)?)
                }
                Command::Report { view, period } => {
                    let alerts = ws.open_alerts().map_err(Failure::data)?;
                    let params = DashboardParams {
                        period: Some(period),
                    };
                    emit(format, &q.dashboard(&view, &params, &alerts)?)
                }
                Command::Rank {
                    period,
                    key,
                    order,
                    n,
                } => {
                    let params = RankParams {
                        period: Some(period),
                        key: Some(key),
                        order: Some(order),
                        n: Some(n.to_string()),
                    };
                    emit(format, &q.drg_rank(&params)?)
                }
                _ => unreachable!("handled above"),
            }
        }
    }
}

fn serve(ws: Workspace, addr: SocketAddr, token: Option<String>) -> Result<(), Failure> {
    let state = Arc::new(AppState::open(ws, token).map_err(Failure::data)?);
    let runtime = tokio::runtime::Runtime::new().map_err(Failure::data)?;
    runtime
        .block_on(caremetrics_api::serve(addr, state))
        .map_err(Failure::data)
}

fn emit<T: Emit>(format: OutputFormat, body: &T) -> Result<(), Failure> {
    let text = match format {
        OutputFormat::Json => query::render(body),
        OutputFormat::Table => body.table(),
        OutputFormat::Csv => output::csv_text(&body.rows()),
    };
    write_stdout(&text)
}

fn write_stdout(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(Failure::data(e)),
    }
}
