//! Snapshots of repositories hosted on a GitHub-compatible REST API.
//!
//! Requests go through a [`Transport`], so tests run against recorded
//! responses ([`ReplayTransport`]) and never touch the network.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use base64::Engine;
use serde::Deserialize;
use serde_json::Value;

use super::rules::build_globset;
use super::snapshot::{IndexedFile, PlatformMetadata, RepoSnapshot, SnapshotOptions};

/// Environment variable holding the hosting-platform token.
pub const TOKEN_ENV: &str = "RSMM_HOST_TOKEN";
pub const DEFAULT_API_BASE: &str = "https://api.github.com";

const CI_GLOBS: &[&str] = &[
    ".github/workflows/*.yml",
    ".github/workflows/*.yaml",
    ".gitlab-ci.yml",
    ".travis.yml",
    "azure-pipelines.yml",
    ".circleci/config.yml",
    "Jenkinsfile",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    /// Lower-cased header names.
    pub headers: BTreeMap<String, String>,
    pub body: Vec<u8>,
}

impl HttpResponse {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.get(&name.to_ascii_lowercase()).map(String::as_str)
    }
}

/// Connection-level failure: nothing came back.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct TransportError(pub String);

pub trait Transport: Send + Sync {
    fn get(&self, url: &str, headers: &[(String, String)]) -> Result<HttpResponse, TransportError>;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RemoteError {
    #[error("network failure: {0}")]
    Network(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited by hosting platform after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("repository not found: {0}")]
    NotFound(String),
    #[error("hosting platform returned HTTP {status} for {url}")]
    Upstream { status: u16, url: String },
    #[error("not a supported repository URL: {0}")]
    InvalidUrl(String),
    #[error("unexpected response from {url}: {message}")]
    Decode { url: String, message: String },
}

impl RemoteError {
    /// Stable machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            RemoteError::Network(_) => "network",
            RemoteError::Auth(_) => "auth",
            RemoteError::RateLimited { .. } => "rate_limited",
            RemoteError::NotFound(_) => "not_found",
            RemoteError::Upstream { .. } => "upstream",
            RemoteError::InvalidUrl(_) => "invalid_url",
            RemoteError::Decode { .. } => "decode",
        }
    }

    fn retryable(&self) -> bool {
        matches!(self, RemoteError::Network(_) | RemoteError::RateLimited { .. })
            || matches!(self, RemoteError::Upstream { status, .. } if *status >= 500)
    }
}

#[derive(Debug, Clone)]
pub struct RemoteOptions {
    pub api_base: String,
    pub token: Option<String>,
    /// Retries after the first attempt.
    pub max_retries: u32,
    /// Upper bound on simultaneous content requests.
    pub concurrency: usize,
    /// First retry delay; doubles each retry.
    pub backoff: Duration,
    pub snapshot: SnapshotOptions,
}

impl Default for RemoteOptions {
    fn default() -> Self {
        Self {
            api_base: DEFAULT_API_BASE.into(),
            token: None,
            max_retries: 3,
            concurrency: 4,
            backoff: Duration::from_millis(500),
            snapshot: SnapshotOptions::default(),
        }
    }
}

impl RemoteOptions {
    pub fn token_from_env(mut self) -> Self {
        self.token = std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty());
        self
    }
}

/// `owner/repo` from `https://github.com/owner/repo(.git)` or a bare
/// `owner/repo`.
pub fn parse_repo_locator(locator: &str) -> Result<(String, String), RemoteError> {
    let invalid = || RemoteError::InvalidUrl(locator.to_string());
    let rest = if let Some((scheme, tail)) = locator.split_once("://") {
        if !matches!(scheme, "http" | "https") {
            return Err(invalid());
        }
        // Drop the host, query and fragment.
        let path = tail.split_once('/').map_or("", |(_, p)| p);
        path.split(['?', '#'])
            .next()
            .unwrap_or("")
            .trim_matches('/')
            .to_string()
    } else {
        locator.trim_matches('/').to_string()
    };
    let mut parts = rest.split('/');
    let owner = parts.next().filter(|s| !s.is_empty()).ok_or_else(invalid)?;
    let repo = parts
        .next()
        .map(|r| r.trim_end_matches(".git"))
        .filter(|s| !s.is_empty())
        .ok_or_else(invalid)?;
    if parts.next().is_some() {
        return Err(invalid());
    }
    Ok((owner.to_string(), repo.to_string()))
}

/// True for locators that name a remote repository rather than a path.
pub fn is_remote_locator(locator: &str) -> bool {
    locator.starts_with("http://") || locator.starts_with("https://")
}

struct Client<'a> {
    transport: &'a dyn Transport,
    options: &'a RemoteOptions,
    headers: Vec<(String, String)>,
}

impl<'a> Client<'a> {
    fn new(transport: &'a dyn Transport, options: &'a RemoteOptions) -> Self {
        let mut headers = vec![
            ("Accept".to_string(), "application/vnd.github+json".to_string()),
            ("User-Agent".to_string(), "rsmm".to_string()),
        ];
        if let Some(token) = &options.token {
            headers.push(("Authorization".to_string(), format!("Bearer {token}")));
        }
        Self {
            transport,
            options,
            headers,
        }
    }

    fn classify(
        &self,
        url: &str,
        result: Result<HttpResponse, TransportError>,
        attempt: u32,
    ) -> Result<HttpResponse, RemoteError> {
        let resp = result.map_err(|e| RemoteError::Network(e.0))?;
        match resp.status {
            200..=299 => Ok(resp),
            404 => Err(RemoteError::NotFound(url.to_string())),
            401 => Err(RemoteError::Auth(format!("HTTP 401 for {url}"))),
            403 if resp.header("x-ratelimit-remaining") == Some("0")
                || String::from_utf8_lossy(&resp.body)
                    .to_ascii_lowercase()
                    .contains("rate limit") =>
            {
                Err(RemoteError::RateLimited { attempts: attempt + 1 })
            }
            403 => Err(RemoteError::Auth(format!("HTTP 403 for {url}"))),
            429 => Err(RemoteError::RateLimited { attempts: attempt + 1 }),
            status => Err(RemoteError::Upstream {
                status,
                url: url.to_string(),
            }),
        }
    }

    fn get(&self, url: &str) -> Result<HttpResponse, RemoteError> {
        let mut attempt = 0;
        loop {
            let result = self.transport.get(url, &self.headers);
            match self.classify(url, result, attempt) {
                Err(e) if e.retryable() && attempt < self.options.max_retries => {
                    let delay = self.options.backoff.saturating_mul(1 << attempt.min(16));
                    if !delay.is_zero() {
                        std::thread::sleep(delay);
                    }
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn get_json<T: for<'de> Deserialize<'de>>(&self, url: &str) -> Result<T, RemoteError> {
        let resp = self.get(url)?;
        serde_json::from_slice(&resp.body).map_err(|e| RemoteError::Decode {
            url: url.to_string(),
            message: e.to_string(),
        })
    }
}

#[derive(Deserialize)]
struct RepoInfo {
    default_branch: Option<String>,
    #[serde(default)]
    topics: Vec<String>,
    license: Option<LicenseInfo>,
}

#[derive(Deserialize)]
struct LicenseInfo {
    spdx_id: Option<String>,
    key: Option<String>,
}

#[derive(Deserialize)]
struct Tree {
    #[serde(default)]
    tree: Vec<TreeEntry>,
    #[serde(default)]
    truncated: bool,
}

#[derive(Deserialize)]
struct TreeEntry {
    path: String,
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    size: u64,
}

#[derive(Deserialize)]
struct Tag {
    name: String,
}

#[derive(Deserialize)]
struct Release {
    tag_name: String,
}

#[derive(Deserialize)]
struct Contents {
    content: Option<String>,
    encoding: Option<String>,
}

/// Fetches the file index, platform metadata and probe-relevant file
/// contents of a hosted repository.
pub fn snapshot_remote(
    locator: &str,
    transport: &dyn Transport,
    options: &RemoteOptions,
) -> Result<RepoSnapshot, RemoteError> {
    let (owner, repo) = parse_repo_locator(locator)?;
    let client = Client::new(transport, options);
    let base = format!("{}/repos/{owner}/{repo}", options.api_base.trim_end_matches('/'));

    let info: RepoInfo = client.get_json(&base)?;
    let branch = info.default_branch.clone().unwrap_or_else(|| "HEAD".into());
    let tree: Tree = client.get_json(&format!("{base}/git/trees/{branch}?recursive=1"))?;
    let tags: Vec<Tag> = client.get_json(&format!("{base}/tags?per_page=100"))?;
    let releases: Vec<Release> = client.get_json(&format!("{base}/releases?per_page=100"))?;

    let mut snapshot = RepoSnapshot::empty(locator);
    if tree.truncated {
        snapshot.truncated = true;
        snapshot.warnings.push("platform truncated the file tree".into());
    }
    let mut blobs: Vec<IndexedFile> = tree
        .tree
        .into_iter()
        .filter(|e| e.kind == "blob")
        .map(|e| IndexedFile {
            path: e.path,
            size: e.size,
        })
        .collect();
    blobs.sort_by(|a, b| a.path.cmp(&b.path));
    if blobs.len() > options.snapshot.max_files {
        blobs.truncate(options.snapshot.max_files);
        snapshot.truncated = true;
        snapshot
            .warnings
            .push(format!("file index truncated at {} files", options.snapshot.max_files));
    }

    let ci =
        build_globset(&CI_GLOBS.iter().map(|s| s.to_string()).collect::<Vec<_>>()).expect("static CI globs are valid");
    let license = info
        .license
        .and_then(|l| l.spdx_id.or(l.key))
        .filter(|id| !id.is_empty());
    snapshot.platform = Some(PlatformMetadata {
        default_branch: info.default_branch,
        tags: tags.into_iter().map(|t| t.name).collect(),
        releases: releases.into_iter().map(|r| r.tag_name).collect(),
        topics: info.topics,
        license,
        ci_configured: blobs.iter().any(|f| ci.is_match(&f.path)),
    });

    let wanted = options.snapshot.content_matcher();
    let mut queue = VecDeque::new();
    for file in &blobs {
        if !wanted.is_match(&file.path) {
            continue;
        }
        if file.size > options.snapshot.max_file_bytes {
            snapshot.warnings.push(format!(
                "{}: {} bytes exceeds the {} byte limit, content skipped",
                file.path, file.size, options.snapshot.max_file_bytes
            ));
        } else {
            queue.push_back(file.path.clone());
        }
    }
    snapshot.files = blobs;

    let fetched = fetch_contents(&client, &base, &branch, queue)?;
    for (path, outcome) in fetched {
        match outcome {
            Ok(text) => {
                snapshot.contents.insert(path, text);
            }
            Err(warning) => snapshot.warnings.push(warning),
        }
    }
    Ok(snapshot)
}

type Fetched = Vec<(String, Result<String, String>)>;

fn fetch_contents(
    client: &Client<'_>,
    base: &str,
    branch: &str,
    queue: VecDeque<String>,
) -> Result<Fetched, RemoteError> {
    let workers = client.options.concurrency.max(1).min(queue.len().max(1));
    let queue = Mutex::new(queue);
    let results = Mutex::new(Vec::new());
    let failure: Mutex<Option<RemoteError>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if failure.lock().unwrap().is_some() {
                    return;
                }
                let Some(path) = queue.lock().unwrap().pop_front() else {
                    return;
                };
                let url = format!("{base}/contents/{path}?ref={branch}");
                match client.get_json::<Contents>(&url) {
                    Ok(contents) => {
                        let decoded = decode_contents(&contents).map_err(|e| format!("{path}: {e}"));
                        results.lock().unwrap().push((path, decoded));
                    }
                    Err(RemoteError::NotFound(_)) => {
                        results
                            .lock()
                            .unwrap()
                            .push((path.clone(), Err(format!("{path}: listed but not retrievable"))));
                    }
                    Err(e) => {
                        failure.lock().unwrap().get_or_insert(e);
                        return;
                    }
                }
            });
        }
    });

    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let mut results = results.into_inner().unwrap();
    results.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(results)
}

fn decode_contents(contents: &Contents) -> Result<String, String> {
    let raw = contents.content.as_deref().unwrap_or("");
    match contents.encoding.as_deref() {
        Some("base64") => {
            let compact: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
            let bytes = base64::engine::general_purpose::STANDARD
                .decode(compact)
                .map_err(|e| e.to_string())?;
            Ok(String::from_utf8_lossy(&bytes).into_owned())
        }
        None | Some("") | Some("utf-8") => Ok(raw.to_string()),
        Some(other) => Err(format!("unsupported content encoding `{other}`")),
    }
}

/// Live HTTP transport.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| TransportError(e.to_string()))?;
        Ok(Self { client })
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str, headers: &[(String, String)]) -> Result<HttpResponse, TransportError> {
        let mut request = self.client.get(url);
        for (name, value) in headers {
            request = request.header(name.as_str(), value.as_str());
        }
        let response = request.send().map_err(|e| TransportError(e.to_string()))?;
        let status = response.status().as_u16();
        let headers = response
            .headers()
            .iter()
            .map(|(k, v)| (k.as_str().to_ascii_lowercase(), v.to_str().unwrap_or("").to_string()))
            .collect();
        let body = response.bytes().map_err(|e| TransportError(e.to_string()))?.to_vec();
        Ok(HttpResponse { status, headers, body })
    }
}

/// One recorded exchange. `error` simulates a connection failure.
#[derive(Debug, Clone, Deserialize)]
pub struct Interaction {
    #[serde(default = "default_method")]
    pub method: String,
    pub url: String,
    #[serde(default = "default_status")]
    pub status: u16,
    #[serde(default)]
    pub headers: BTreeMap<String, String>,
    #[serde(default)]
    pub body: Value,
    #[serde(default)]
    pub error: Option<String>,
}

fn default_method() -> String {
    "GET".into()
}

fn default_status() -> u16 {
    200
}

#[derive(Debug, Deserialize)]
struct ReplayFile {
    interactions: Vec<Interaction>,
}

/// Serves recorded responses. Several interactions for one URL play in
/// order and the last one repeats. Unrecorded URLs fail like an
/// unreachable host.
pub struct ReplayTransport {
    recorded: Mutex<HashMap<String, VecDeque<Interaction>>>,
    log: Mutex<Vec<String>>,
    latency: Duration,
    in_flight: AtomicUsize,
    peak: AtomicUsize,
}

impl ReplayTransport {
    pub fn new(interactions: Vec<Interaction>) -> Self {
        let mut recorded: HashMap<String, VecDeque<Interaction>> = HashMap::new();
        for i in interactions {
            recorded.entry(i.url.clone()).or_default().push_back(i);
        }
        Self {
            recorded: Mutex::new(recorded),
            log: Mutex::new(Vec::new()),
            latency: Duration::ZERO,
            in_flight: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
        }
    }

    pub fn from_json(input: &str) -> Result<Self, serde_json::Error> {
        let file: ReplayFile = serde_json::from_str(input)?;
        Ok(Self::new(file.interactions))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, String> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Delay each response, to make overlapping requests observable.
    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = latency;
        self
    }

    /// URLs requested so far, in order.
    pub fn requests(&self) -> Vec<String> {
        self.log.lock().unwrap().clone()
    }

    /// Most requests that were ever in flight at once.
    pub fn peak_concurrency(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }
}

impl Transport for ReplayTransport {
    fn get(&self, url: &str, _headers: &[(String, String)]) -> Result<HttpResponse, TransportError> {
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
        self.log.lock().unwrap().push(url.to_string());
        if !self.latency.is_zero() {
            std::thread::sleep(self.latency);
        }
        let interaction = {
            let mut recorded = self.recorded.lock().unwrap();
            recorded
                .get_mut(url)
                .and_then(|q| if q.len() > 1 { q.pop_front() } else { q.front().cloned() })
        };
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        let Some(i) = interaction else {
            return Err(TransportError(format!("no recorded response for {url}")));
        };
        if let Some(error) = i.error {
            return Err(TransportError(error));
        }
        let body = match i.body {
            Value::Null => Vec::new(),
            Value::String(s) => s.into_bytes(),
            other => serde_json::to_vec(&other).expect("JSON values serialize"),
        };
        Ok(HttpResponse {
            status: i.status,
            headers: i
                .headers
                .into_iter()
                .map(|(k, v)| (k.to_ascii_lowercase(), v))
                .collect(),
            body,
        })
    }
}

/// Shared handle so one transport can serve a whole process.
pub type SharedTransport = Arc<dyn Transport>;
