use super::{Attachment, IssueDocument, MinerError};
use base64::Engine as _;
use rayon::prelude::*;
use regex::Regex;
use serde_json::Value;
use std::path::Path;
use std::sync::{LazyLock, Mutex};
use std::time::{Duration, Instant};

/// Token for issues-API style trackers.
pub const ISSUES_TOKEN_ENV: &str = "ENTENTE_ISSUES_TOKEN";
/// API key for bug trackers with an attachment endpoint.
pub const BUG_TRACKER_KEY_ENV: &str = "ENTENTE_BUGTRACKER_KEY";

fn dump_error(path: &Path, message: impl Into<String>) -> MinerError {
    MinerError::Dump { path: path.to_path_buf(), message: message.into() }
}

fn id_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Reads `<root>/<tracker>/<id>.json` files and their
/// `<id>/attachments/*`. Issues come back sorted by id; a missing or empty
/// directory yields no issues.
pub fn load_dump(root: &Path, tracker: &str) -> Result<Vec<IssueDocument>, MinerError> {
    let dir = root.join(tracker);
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| MinerError::Io { path, source }
    };
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .map_err(io(&dir))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    let mut issues = Vec::with_capacity(files.len());
    for path in files {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let text = std::fs::read_to_string(&path).map_err(io(&path))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| dump_error(&path, e.to_string()))?;
        if let Some(declared) = v.get("issue_id").and_then(id_text) {
            if declared != stem {
                return Err(dump_error(&path, format!("issue_id {declared:?} does not match file name")));
            }
        }
        let body =
            v.get("body").and_then(Value::as_str).ok_or_else(|| dump_error(&path, "missing string field body"))?;
        let att_dir = dir.join(&stem).join("attachments");
        let mut attachments = Vec::new();
        if att_dir.is_dir() {
            let mut names: Vec<_> =
                std::fs::read_dir(&att_dir).map_err(io(&att_dir))?.filter_map(Result::ok).map(|e| e.path()).collect();
            names.sort();
            for p in names.into_iter().filter(|p| p.is_file()) {
                let bytes = std::fs::read(&p).map_err(io(&p))?;
                let filename = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                attachments.push(Attachment { filename, bytes });
            }
        }
        issues.push(IssueDocument {
            tracker: tracker.to_string(),
            issue_id: stem,
            body: body.to_string(),
            attachments,
        });
    }
    Ok(issues)
}

/// Spaces requests at least `delay` apart across threads.
#[derive(Debug)]
pub struct RateLimiter {
    delay: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(delay: Duration) -> Self {
        RateLimiter { delay, next: Mutex::new(None) }
    }

    pub fn wait(&self) {
        let mut next = self.next.lock().expect("rate limiter");
        let now = Instant::now();
        if let Some(t) = *next {
            if t > now {
                std::thread::sleep(t - now);
            }
        }
        *next = Some(Instant::now() + self.delay);
    }
}

pub trait TrackerClient: Sync {
    fn name(&self) -> &str;
    fn fetch_issues(&self, query: &str, limit: usize) -> Result<Vec<IssueDocument>, MinerError>;
}

struct Http {
    agent: ureq::Agent,
    limiter: RateLimiter,
}

impl Http {
    fn new(delay: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .user_agent("entente-miner")
            .build()
            .into();
        Http { agent, limiter: RateLimiter::new(delay) }
    }

    fn get(&self, url: &str, query: &[(&str, String)], auth: Option<(&str, String)>) -> Result<Vec<u8>, MinerError> {
        self.limiter.wait();
        let mut req = self.agent.get(url);
        for (k, v) in query {
            req = req.query(*k, v);
        }
        if let Some((name, value)) = auth {
            req = req.header(name, value);
        }
        let mut resp = req.call().map_err(|e| MinerError::NetworkFailure(format!("{url}: {e}")))?;
        let status = resp.status().as_u16();
        let header = |name: &str| resp.headers().get(name).and_then(|v| v.to_str().ok()).map(str::to_string);
        let retry_after = header("retry-after").and_then(|v| v.trim().parse().ok());
        let exhausted = header("x-ratelimit-remaining").is_some_and(|v| v.trim() == "0");
        match status {
            429 => return Err(MinerError::RateLimited { retry_after }),
            403 if exhausted => return Err(MinerError::RateLimited { retry_after }),
            401 | 403 => return Err(MinerError::AuthFailure(url.to_string())),
            200..=299 => {}
            _ => return Err(MinerError::NetworkFailure(format!("{url}: HTTP {status}"))),
        }
        resp.body_mut()
            .with_config()
            .limit(64 * 1024 * 1024)
            .read_to_vec()
            .map_err(|e| MinerError::NetworkFailure(format!("{url}: {e}")))
    }

    fn get_json(&self, url: &str, query: &[(&str, String)], auth: Option<(&str, String)>) -> Result<Value, MinerError> {
        let bytes = self.get(url, query, auth)?;
        serde_json::from_slice(&bytes).map_err(|e| MinerError::NetworkFailure(format!("{url}: bad JSON: {e}")))
    }
}

static JS_LINK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r#"https?://[^\s)\]>"']+\.js\b"#).expect("link regex"));

/// Trackers with an issues API: `GET <endpoint>/issues` returning an array
/// of `{number, body}`. `.js` links in the body are fetched as attachments.
pub struct IssuesApiClient {
    pub name: String,
    pub endpoint: String,
    pub token: Option<String>,
    http: Http,
}

impl IssuesApiClient {
    pub fn new(name: &str, endpoint: &str, token: Option<String>, delay: Duration) -> Self {
        IssuesApiClient {
            name: name.into(),
            endpoint: endpoint.trim_end_matches('/').into(),
            token,
            http: Http::new(delay),
        }
    }

    /// Token from `ENTENTE_ISSUES_TOKEN`.
    pub fn from_env(name: &str, endpoint: &str, delay: Duration) -> Self {
        Self::new(name, endpoint, std::env::var(ISSUES_TOKEN_ENV).ok(), delay)
    }

    fn auth(&self) -> Option<(&'static str, String)> {
        self.token.as_ref().map(|t| ("Authorization", format!("Bearer {t}")))
    }
}

impl TrackerClient for IssuesApiClient {
    fn name(&self) -> &str {
        &self.name
    }

    fn fetch_issues(&self, query: &str, limit: usize) -> Result<Vec<IssueDocument>, MinerError> {
        let mut params = vec![("state", "all".to_string()), ("per_page", limit.to_string())];
        if !query.is_empty() {
            params.push(("labels", query.to_string()));
        }
        let listing = self.http.get_json(&format!("{}/issues", self.endpoint), &params, self.auth())?;
        let items =
            listing.as_array().ok_or_else(|| MinerError::NetworkFailure("issue listing is not an array".into()))?;
        let issues: Vec<(String, String)> = items
            .iter()
            .filter(|i| i.get("pull_request").is_none())
            .filter_map(|i| {
                Some((id_text(i.get("number")?)?, i.get("body").and_then(Value::as_str).unwrap_or("").to_string()))
            })
            .take(limit)
            .collect();
        let docs: Result<Vec<IssueDocument>, MinerError> = issues
            .into_par_iter()
            .map(|(issue_id, body)| {
                let mut attachments = Vec::new();
                for link in JS_LINK.find_iter(&body) {
                    let url = link.as_str();
                    let bytes = self.http.get(url, &[], self.auth())?;
                    let filename = url.rsplit('/').next().unwrap_or("attachment.js").to_string();
                    attachments.push(Attachment { filename, bytes });
                }
                Ok(IssueDocument { tracker: self.name.clone(), issue_id, body, attachments })
            })
            .collect();
        let mut docs = docs?;
        docs.sort_by(|a, b| a.issue_id.cmp(&b.issue_id));
        Ok(docs)
    }
}

/// Bug trackers with a REST API of the `/bug`, `/bug/<id>/comment`,
/// `/bug/<id>/attachment` shape, attachments base64-encoded.
pub struct BugTrackerClient {
    pub name: String,
    pub endpoint: String,
    pub api_key: Option<String>,
    http: Http,
}

impl BugTrackerClient {
    pub fn new(name: &str, endpoint: &str, api_key: Option<String>, delay: Duration) -> Self {
        BugTrackerClient {
            name: name.into(),
            endpoint: endpoint.trim_end_matches('/').into(),
            api_key,
            http: Http::new(delay),
        }
    }

    /// Key from `ENTENTE_BUGTRACKER_KEY`.
    pub fn from_env(name: &str, endpoint: &str, delay: Duration) -> Self {
        Self::new(name, endpoint, std::env::var(BUG_TRACKER_KEY_ENV).ok(), delay)
    }

    fn auth(&self) -> Option<(&'static str, String)> {
        self.api_key.as_ref().map(|k| ("X-BUGZILLA-API-KEY", k.clone()))
    }

    fn fetch_one(&self, id: &str) -> Result<IssueDocument, MinerError> {
        let comments = self.http.get_json(&format!("{}/bug/{id}/comment", self.endpoint), &[], self.auth())?;
        let body =
            comments.pointer(&format!("/bugs/{id}/comments/0/text")).and_then(Value::as_str).unwrap_or("").to_string();
        let listing = self.http.get_json(&format!("{}/bug/{id}/attachment", self.endpoint), &[], self.auth())?;
        let mut attachments = Vec::new();
        for a in listing.pointer(&format!("/bugs/{id}")).and_then(Value::as_array).into_iter().flatten() {
            if a.get("is_obsolete").and_then(Value::as_i64).unwrap_or(0) != 0 {
                continue;
            }
            let (Some(filename), Some(data)) =
                (a.get("file_name").and_then(Value::as_str), a.get("data").and_then(Value::as_str))
            else {
                continue;
            };
            let bytes = base64::engine::general_purpose::STANDARD
                .decode(data.trim())
                .map_err(|e| MinerError::NetworkFailure(format!("attachment {filename} of {id}: {e}")))?;
            attachments.push(Attachment { filename: filename.to_string(), bytes });
        }
        Ok(IssueDocument { tracker: self.name.clone(), issue_id: id.to_string(), body, attachments })
    }
}

impl TrackerClient for BugTrackerClient {
    fn name(&self) -> &str {
        &self.name
    }

    fn fetch_issues(&self, query: &str, limit: usize) -> Result<Vec<IssueDocument>, MinerError> {
        let params =
            [("quicksearch", query.to_string()), ("limit", limit.to_string()), ("include_fields", "id".to_string())];
        let listing = self.http.get_json(&format!("{}/bug", self.endpoint), &params, self.auth())?;
        let ids: Vec<String> = listing
            .get("bugs")
            .and_then(Value::as_array)
            .into_iter()
            .flatten()
            .filter_map(|b| b.get("id").and_then(id_text))
            .take(limit)
            .collect();
        let mut docs = ids.par_iter().map(|id| self.fetch_one(id)).collect::<Result<Vec<_>, _>>()?;
        docs.sort_by(|a, b| a.issue_id.cmp(&b.issue_id));
        Ok(docs)
    }
}
