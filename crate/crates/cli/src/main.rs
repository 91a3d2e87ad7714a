mod client;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dvre_core::contracts::parse_time_bound;
use dvre_core::gas_report::run_gas_study;
use dvre_core::ledger::{read_log, GasSchedule, Ledger, LedgerConfig, Preset};
use dvre_core::wallet::{generate_wallet, Wallet};
use serde_json::{json, Value};

use client::{members_body, Remote};
use error::{CliError, USAGE_EXIT};

#[derive(Parser)]
#[command(name = "dvre", version, about = "Research data sharing client")]
struct Cli {
    /// API server base URL.
    #[arg(long, global = true, env = "DVRE_SERVER", default_value = "http://127.0.0.1:7878")]
    server: String,
    /// Hex private key file used for signing.
    #[arg(long, global = true, env = "DVRE_KEYFILE", default_value = "dvre.key")]
    keyfile: PathBuf,
    /// Reuse an existing session instead of logging in.
    #[arg(long, global = true, env = "DVRE_TOKEN")]
    token: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Output::Table)]
    output: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    #[command(subcommand)]
    Wallet(WalletCmd),
    /// Open a session and print its token.
    Login,
    /// Create the caller's user contract.
    Register {
        #[arg(long)]
        username: String,
        #[arg(long = "org")]
        organization: String,
        #[arg(long)]
        country: String,
    },
    #[command(subcommand)]
    Group(GroupCmd),
    #[command(subcommand)]
    Asset(AssetCmd),
    #[command(subcommand)]
    Gas(GasCmd),
    #[command(subcommand)]
    Ledger(LedgerCmd),
    /// Run the API server.
    Serve {
        /// TOML config file; `DVRE_*` variables override it.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum WalletCmd {
    /// Generate a key and write it to the key file.
    New {
        #[arg(long)]
        force: bool,
    },
    /// Print the key file's address.
    Address,
}

#[derive(Subcommand)]
enum GroupCmd {
    Create {
        #[arg(long)]
        name: String,
        #[arg(long)]
        permissions: String,
        #[arg(long, value_delimiter = ',')]
        orgs: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        countries: Vec<String>,
    },
    /// Grant one or more addresses a window (owner only).
    AddMember {
        group: String,
        #[arg(long = "user", required = true)]
        users: Vec<String>,
        #[command(flatten)]
        window: Window,
    },
    /// Record an already-pinned file in the group.
    ShareFile {
        group: String,
        #[arg(long)]
        hash: String,
        #[arg(long)]
        name: String,
    },
    List,
    Files {
        group: String,
    },
}

#[derive(Args)]
struct Window {
    /// YYYY-MM-DD (start of day) or RFC 3339.
    #[arg(long)]
    from: String,
    /// YYYY-MM-DD (end of day) or RFC 3339.
    #[arg(long)]
    to: String,
}

#[derive(Subcommand)]
enum AssetCmd {
    /// Encrypt, pin and share a local file with a group.
    Put {
        group: String,
        path: PathBuf,
        /// Access condition as JSON; defaults to group membership.
        #[arg(long)]
        acc: Option<String>,
    },
    /// Decrypt and save a shared file.
    Get {
        cid: String,
        /// Defaults to the original file name in the current directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GasCmd {
    /// Deploy every contract and call every function on a fresh ledger.
    Report {
        #[arg(long, default_value = "calibrated")]
        preset: String,
    },
}

#[derive(Subcommand)]
enum LedgerCmd {
    /// Rebuild state from a ledger log, checking every receipt digest.
    Replay {
        log: PathBuf,
        #[arg(long, default_value = "calibrated")]
        preset: String,
        #[arg(long)]
        paper_faithful_add_files: bool,
    },
}

struct Outcome {
    json: Value,
    table: String,
}

impl Outcome {
    fn new(json: Value, table: impl Into<String>) -> Self {
        Self {
            json,
            table: table.into(),
        }
    }
}

fn load_wallet(path: &Path) -> Result<Wallet, CliError> {
    Wallet::load_key_file(path).map_err(|e| CliError::Auth(format!("{}: {e}", path.display())))
}

fn bound(text: &str, end: bool) -> Result<u64, CliError> {
    parse_time_bound(text, end).map_err(|e| CliError::Other(e.to_string()))
}

fn preset(text: &str) -> Result<Preset, CliError> {
    text.parse()
        .map_err(|e: dvre_core::ledger::GasError| CliError::Other(e.to_string()))
}

fn receipt_line(v: &Value) -> String {
    let r = &v["receipt"];
    format!(
        "status {} gas_used {} block {}",
        r["status"].as_str().unwrap_or("?"),
        r["gas_used"],
        r["block_height"]
    )
}

fn remote(cli: &Cli) -> Result<Remote, CliError> {
    let mut r = Remote::new(&cli.server).with_token(cli.token.clone());
    r.ensure_session(&load_wallet(&cli.keyfile)?)?;
    Ok(r)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Wallet(WalletCmd::New { force }) => {
            if cli.keyfile.exists() && !force {
                return Err(CliError::Other(format!(
                    "{} exists; pass --force to replace it",
                    cli.keyfile.display()
                )));
            }
            let w = generate_wallet(None).map_err(|e| CliError::Other(e.to_string()))?;
            w.save_key_file(&cli.keyfile)
                .map_err(|e| CliError::Other(e.to_string()))?;
            Ok(Outcome::new(
                json!({ "address": w.address(), "keyfile": cli.keyfile }),
                format!("{}\n", w.address()),
            ))
        }
        Command::Wallet(WalletCmd::Address) => {
            let w = load_wallet(&cli.keyfile)?;
            Ok(Outcome::new(json!({ "address": w.address() }), format!("{}\n", w.address())))
        }
        Command::Login => {
            let mut r = Remote::new(&cli.server);
            let session = r.login(&load_wallet(&cli.keyfile)?)?;
            let table = format!("{}\n", session["token"].as_str().unwrap_or_default());
            Ok(Outcome::new(session, table))
        }
        Command::Register {
            username,
            organization,
            country,
        } => {
            let w = load_wallet(&cli.keyfile)?;
            let r = remote(cli)?;
            let v = r.post(
                "/users",
                &json!({
                    "public_address": w.address(),
                    "username": username,
                    "organization": organization,
                    "country": country,
                }),
            )?;
            let table = format!("user contract {}\n{}\n", v["contract"].as_str().unwrap_or("?"), receipt_line(&v));
            Ok(Outcome::new(v, table))
        }
        Command::Group(cmd) => group(cli, cmd),
        Command::Asset(cmd) => asset(cli, cmd),
        Command::Gas(GasCmd::Report { preset: p }) => {
            let report = run_gas_study(GasSchedule::preset(preset(p)?))
                .map_err(|e| CliError::Other(e.to_string()))?;
            let table = report.to_table();
            let json = serde_json::to_value(&report).map_err(|e| CliError::Other(e.to_string()))?;
            Ok(Outcome::new(json, table))
        }
        Command::Ledger(LedgerCmd::Replay {
            log,
            preset: p,
            paper_faithful_add_files,
        }) => {
            let entries = read_log(log).map_err(|e| CliError::Other(e.to_string()))?;
            let genesis = entries.first().map(|e| e.block_time).unwrap_or(0);
            let mut config = LedgerConfig::manual(GasSchedule::preset(preset(p)?), genesis);
            config.flags.paper_faithful_add_files = *paper_faithful_add_files;
            let ledger = Ledger::replay(config, &entries).map_err(|e| CliError::Other(e.to_string()))?;
            let root = format!("0x{}", hex::encode(ledger.state_root()));
            let json = json!({
                "entries": entries.len(),
                "height": ledger.state().height,
                "time": ledger.state().time,
                "state_root": root,
            });
            let table = format!(
                "replayed {} entries\nheight {}\nstate root {}\n",
                entries.len(),
                ledger.state().height,
                root
            );
            Ok(Outcome::new(json, table))
        }
        Command::Serve { config } => {
            let cfg = dvre_api::ApiConfig::load(config.as_deref())
                .map_err(|e| CliError::Other(e.to_string()))?;
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| "info".into()),
                )
                .init();
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Other(e.to_string()))?;
            rt.block_on(dvre_api::serve(cfg))
                .map_err(|e| CliError::Other(e.to_string()))?;
            Ok(Outcome::new(json!({ "stopped": true }), ""))
        }
    }
}

fn group(cli: &Cli, cmd: &GroupCmd) -> Result<Outcome, CliError> {
    let w = load_wallet(&cli.keyfile)?;
    let r = remote(cli)?;
    match cmd {
        GroupCmd::Create {
            name,
            permissions,
            orgs,
            countries,
        } => {
            let v = r.post(
                "/groups",
                &json!({
                    "group_name": name,
                    "group_owner_address": w.address(),
                    "permissions": permissions,
                    "organizations": orgs,
                    "countries": countries,
                }),
            )?;
            let table = format!("{}\n{}\n", v["group"].as_str().unwrap_or("?"), receipt_line(&v));
            Ok(Outcome::new(v, table))
        }
        GroupCmd::AddMember {
            group,
            users,
            window,
        } => {
            let body = members_body(users, bound(&window.from, false)?, bound(&window.to, true)?);
            let v = r.post(&format!("/groups/{group}/members"), &body)?;
            let table = format!("{}\n", receipt_line(&v));
            Ok(Outcome::new(v, table))
        }
        GroupCmd::ShareFile { group, hash, name } => {
            let v = r.post(
                &format!("/groups/{group}/files"),
                &json!({ "files": [{ "ipfs_hash": hash, "file_name": name }] }),
            )?;
            let table = format!("{}\n", receipt_line(&v));
            Ok(Outcome::new(v, table))
        }
        GroupCmd::List => {
            let v = r.get("/groups")?;
            let mut table = format!("{:<44} {:<20} {:>7} {:>6} access\n", "group", "name", "members", "files");
            for g in v.as_array().into_iter().flatten() {
                table.push_str(&format!(
                    "{:<44} {:<20} {:>7} {:>6} {}\n",
                    g["group"].as_str().unwrap_or("?"),
                    g["contract_details"]["group_name"].as_str().unwrap_or("?"),
                    g["members"].as_array().map(Vec::len).unwrap_or(0),
                    g["file_count"],
                    g["has_access"],
                ));
            }
            Ok(Outcome::new(v, table))
        }
        GroupCmd::Files { group } => {
            let v = r.get(&format!("/groups/{group}/files"))?;
            let mut table = String::new();
            for f in v.as_array().into_iter().flatten() {
                table.push_str(&format!(
                    "{}\t{}\t{}\n",
                    f["ipfs_hash"].as_str().unwrap_or("?"),
                    f["file_name"].as_str().unwrap_or("?"),
                    f["added_by"].as_str().unwrap_or("?"),
                ));
            }
            Ok(Outcome::new(v, table))
        }
    }
}

fn asset(cli: &Cli, cmd: &AssetCmd) -> Result<Outcome, CliError> {
    let r = remote(cli)?;
    match cmd {
        AssetCmd::Put { group, path, acc } => {
            let v = r.upload(group, path, acc.as_deref())?;
            let table = format!("{}\n{}\n", v["cid"].as_str().unwrap_or("?"), receipt_line(&v));
            Ok(Outcome::new(v, table))
        }
        AssetCmd::Get { cid, out } => {
            let (bytes, name) = r.download(cid)?;
            let path = match (out, &name) {
                (Some(p), _) => p.clone(),
                // never let a server-supplied name escape the working directory
                (None, Some(n)) => PathBuf::from(
                    Path::new(n)
                        .file_name()
                        .ok_or_else(|| CliError::Other(format!("unusable file name {n:?}")))?,
                ),
                (None, None) => PathBuf::from(cid),
            };
            std::fs::write(&path, &bytes).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
            let v = json!({ "cid": cid, "file_name": name, "path": path, "size": bytes.len() });
            let table = format!("wrote {} bytes to {}\n", bytes.len(), path.display());
            Ok(Outcome::new(v, table))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_EXIT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(out) => {
            match cli.output {
                Output::Json => println!("{}", out.json),
                Output::Table => print!("{}", out.table),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if cli.output == Output::Json {
                println!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            }
            eprintln!("dvre: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
