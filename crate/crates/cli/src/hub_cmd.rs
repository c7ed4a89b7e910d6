use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use serde_json::{json, Value};
use transparency_core::tilt::{self, canonical_json};
use transparency_hub::{parse_filter, HubError, QueryHit, ServerConfig, Store};

use crate::output::{emit, read, Failure, INVALID, IO, OK};
use crate::tilt_cmd::load;

#[derive(Debug, Subcommand)]
pub enum HubCommand {
    /// Serve the REST API until interrupted
    Serve {
        /// Port to bind; 0 picks a free one. Falls back to TILT_HUB_PORT, then 8080
        #[arg(long)]
        port: Option<u16>,
        /// Store directory. Falls back to TILT_HUB_DATA_DIR, then ./tilt-hub-data
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Static files served below /ui/
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
    /// Store a new document version
    Put {
        file: PathBuf,
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        json: bool,
    },
    /// Print a stored document, the latest version unless --version is given
    Get {
        id: String,
        #[arg(long)]
        version: Option<u64>,
        #[command(flatten)]
        target: Target,
    },
    /// Latest versions matching a filter such as 'controller/country eq "DE"'
    Query {
        #[arg(default_value = "")]
        filter: String,
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        json: bool,
    },
}

/// A running hub (`--url`) or a store directory opened in place.
#[derive(Debug, Args)]
pub struct Target {
    /// Base URL of a running hub, e.g. http://127.0.0.1:8080
    #[arg(long, conflicts_with = "data_dir")]
    url: Option<String>,
    /// Store directory used when no --url is given. Falls back to TILT_HUB_DATA_DIR
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

enum Hub {
    Remote(String, reqwest::blocking::Client),
    Local(Store),
}

fn hub_failure(e: HubError) -> Failure {
    let code = if matches!(e, HubError::Io(_)) { IO } else { INVALID };
    Failure::new(code, e)
}

impl Target {
    fn open(self) -> Result<Hub, Failure> {
        if let Some(url) = self.url {
            return Ok(Hub::Remote(url.trim_end_matches('/').to_string(), reqwest::blocking::Client::new()));
        }
        let config = ServerConfig::resolve(Some(0), self.data_dir, |k| std::env::var(k).ok()).map_err(Failure::usage)?;
        Store::open(config.data_dir).map(Hub::Local).map_err(hub_failure)
    }
}

impl Hub {
    /// Sends a request and returns the JSON body of a 2xx answer.
    fn call(&self, method: reqwest::Method, path: &str, body: Option<String>) -> Result<Value, Failure> {
        let Hub::Remote(base, client) = self else { unreachable!("remote call on a local store") };
        let url = format!("{base}{path}");
        let mut req = client.request(method, &url);
        if let Some(body) = body {
            req = req.header("content-type", "application/json").body(body);
        }
        let resp = req.send().map_err(|e| Failure::new(IO, format!("IoError: {url}: {e}")))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| Failure::new(IO, format!("IoError: {url}: {e}")))?;
        let value: Value = serde_json::from_str(&text).unwrap_or(Value::String(text));
        if status.is_success() {
            return Ok(value);
        }
        let name = value["error"].as_str().unwrap_or("HttpError");
        let message = value["message"].as_str().map(str::to_string).unwrap_or_else(|| status.to_string());
        let code = if name == "IoError" { IO } else { INVALID };
        Err(Failure::new(code, if message.starts_with(name) { message } else { format!("{name}: {message}") }))
    }
}

fn segment(s: &str) -> String {
    utf8_percent_encode(s, NON_ALPHANUMERIC).to_string()
}

pub fn run(command: HubCommand) -> Result<u8, Failure> {
    match command {
        HubCommand::Serve { port, data_dir, ui_dir } => {
            let mut config = ServerConfig::resolve(port, data_dir, |k| std::env::var(k).ok()).map_err(Failure::usage)?;
            config.ui_dir = ui_dir;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::new(IO, format!("IoError: {e}")))?;
            runtime.block_on(transparency_hub::serve(config)).map_err(hub_failure)?;
            Ok(OK)
        }
        HubCommand::Put { file, target, json } => {
            let text = read(&file)?;
            let doc = load(&file)?;
            let stored = match target.open()? {
                hub @ Hub::Remote(..) => hub.call(reqwest::Method::PUT, &format!("/documents/{}", segment(&doc.meta.id)), Some(text))?,
                Hub::Local(store) => {
                    let (id, version) = (doc.meta.id.clone(), doc.meta.version);
                    let etag = store.put(doc).map_err(hub_failure)?;
                    json!({ "id": id, "version": version, "etag": etag })
                }
            };
            emit(json, &stored, |s| format!("stored {} v{} {}\n", s["id"].as_str().unwrap_or(""), s["version"], s["etag"].as_str().unwrap_or("")));
            Ok(OK)
        }
        HubCommand::Get { id, version, target } => {
            let doc = match target.open()? {
                hub @ Hub::Remote(..) => {
                    let query = version.map(|v| format!("?version={v}")).unwrap_or_default();
                    hub.call(reqwest::Method::GET, &format!("/documents/{}{query}", segment(&id)), None)?
                }
                Hub::Local(store) => tilt::to_value(&store.fetch(&id, version).map_err(hub_failure)?.doc),
            };
            println!("{}", canonical_json(&doc));
            Ok(OK)
        }
        HubCommand::Query { filter, target, json } => {
            let parsed = parse_filter(&filter).map_err(hub_failure)?;
            let hits: Vec<QueryHit> = match target.open()? {
                hub @ Hub::Remote(..) => {
                    let v = hub.call(reqwest::Method::GET, &format!("/documents?filter={}", segment(&filter)), None)?;
                    serde_json::from_value(v).map_err(|e| Failure::new(IO, format!("IoError: unexpected answer: {e}")))?
                }
                Hub::Local(store) => store.query(&parsed),
            };
            emit(json, &hits, |hits| {
                let mut out = String::new();
                for h in hits {
                    writeln!(out, "{} v{}  {}", h.id, h.version, h.matched_paths.join(", ")).unwrap();
                }
                out
            });
            Ok(OK)
        }
    }
}
