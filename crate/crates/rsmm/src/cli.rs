//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or data error, 3 network failure,
//! 4 authentication or rate limit, 5 cannot bind the service address.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::assessment::{
    check_consistency, Assessment, AssessmentId, AssessmentStore, EvidenceRecord, PracticeState, PracticeStatus,
    ProjectInfo, StoreError,
};
use crate::evidence::remote::{RemoteError, RemoteOptions, ReplayTransport, Transport};
use crate::evidence::{
    default_rules, parse_rules, scan_repository, validate_rules, ProbeOutcome, ProbeRule, ScanError,
};
use crate::model::{bundled_rsmm, MaturityModel, PracticeCode};
use crate::report::{self, ReportFormat, ReportOptions};
use crate::scoring::{self, Flip};
use crate::service::{self, ServiceConfig};

pub const DATA_DIR_ENV: &str = "RSMM_DATA_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NETWORK: i32 = 3;
pub const EXIT_AUTH: i32 = 4;
pub const EXIT_BIND: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "rsmm", version, about = "Research software maturity assessment")]
pub struct Cli {
    #[command(flatten)]
    pub config: CliConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CliConfig {
    /// Maturity model file (default: bundled RSMM v1.0)
    #[arg(long, global = true, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Directory holding assessment documents
    #[arg(long, global = true, env = DATA_DIR_ENV, default_value = "rsmm-data", value_name = "PATH")]
    pub data_dir: PathBuf,
    /// Probe rule file (default: bundled rules)
    #[arg(long, global = true, value_name = "PATH")]
    pub rules: Option<PathBuf>,
    /// text, markdown, html or structured
    #[arg(long, global = true, default_value = "text")]
    pub format: ReportFormat,
    /// Use this instant instead of the clock for new timestamps
    #[arg(long, global = true, value_name = "RFC3339")]
    pub frozen_time: Option<DateTime<Utc>>,
    /// Plain ASCII output
    #[arg(long, global = true)]
    pub ascii: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect the maturity model
    #[command(subcommand)]
    Model(ModelCommand),
    /// Create an assessment from an answers file or interactively
    Assess(AssessArgs),
    /// Probe a repository and merge the findings into an assessment
    Scan(ScanArgs),
    /// Print the maturity matrix and profile
    Score(ScoreArgs),
    /// List the practices blocking the next level
    Gaps { id: String },
    /// Score hypothetical changes without saving them
    Whatif(WhatIfArgs),
    /// Print a machine-readable bundle of assessment and profile
    Export {
        id: String,
        /// Write to a file instead of standard output
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Report dependency violations and unanswered blocking practices
    Check { id: String },
    /// Run the HTTP API
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
pub enum ModelCommand {
    /// Focus areas, capabilities and the level grid
    Show,
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    /// Project name (taken from the answers file when it has one)
    #[arg(long)]
    pub project: Option<String>,
    /// Assessment id (default: derived from the project name)
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long)]
    pub repo_url: Option<String>,
    /// JSON map of practice code to state, or an assessment document
    #[arg(long, value_name = "PATH")]
    pub answers: Option<PathBuf>,
    /// Replace an existing assessment with the same id
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    pub id: String,
    /// Local path or hosted-repository URL
    pub repo: String,
    /// Show what would change without writing
    #[arg(long)]
    pub dry_run: bool,
    /// Serve hosting-platform requests from a recorded fixture
    #[arg(long, value_name = "PATH")]
    pub replay: Option<PathBuf>,
    #[arg(long, value_name = "URL")]
    pub api_base: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    pub id: String,
    /// List evidence under the matrix
    #[arg(long)]
    pub evidence: bool,
    /// Append the gap report
    #[arg(long)]
    pub gaps: bool,
    /// Do not mark the achieved path
    #[arg(long)]
    pub no_shade: bool,
}

#[derive(Debug, Args)]
pub struct WhatIfArgs {
    pub id: String,
    #[arg(long, value_name = "CODE")]
    pub implement: Vec<PracticeCode>,
    #[arg(long, value_name = "CODE")]
    pub unimplement: Vec<PracticeCode>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080", value_name = "ADDR")]
    pub bind: String,
    /// Browser origin allowed to call the API (repeatable)
    #[arg(long, value_name = "ORIGIN")]
    pub cors: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Network(String),
    #[error("{0}")]
    Auth(String),
    #[error("{0}")]
    Bind(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Data(_) => EXIT_DATA,
            CliError::Network(_) => EXIT_NETWORK,
            CliError::Auth(_) => EXIT_AUTH,
            CliError::Bind(_) => EXIT_BIND,
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        data(e)
    }
}

impl From<ScanError> for CliError {
    fn from(e: ScanError) -> Self {
        let message = e.to_string();
        match e {
            ScanError::Snapshot(_) => CliError::Data(message),
            ScanError::Remote(r) => match r {
                RemoteError::Auth(_) | RemoteError::RateLimited { .. } => CliError::Auth(message),
                RemoteError::Network(_) | RemoteError::Upstream { .. } | RemoteError::Decode { .. } => {
                    CliError::Network(message)
                }
                RemoteError::NotFound(_) | RemoteError::InvalidUrl(_) => CliError::Data(message),
            },
        }
    }
}

struct Context {
    config: CliConfig,
    model: MaturityModel,
}

impl Context {
    fn load(config: &CliConfig) -> Result<Self, CliError> {
        let model = match &config.model {
            Some(path) => MaturityModel::load(path).map_err(|e| data(format!("{}: {e}", path.display())))?,
            None => bundled_rsmm(),
        };
        Ok(Self {
            config: config.clone(),
            model,
        })
    }

    fn now(&self) -> DateTime<Utc> {
        self.config.frozen_time.unwrap_or_else(Utc::now)
    }

    fn store(&self) -> Result<AssessmentStore, CliError> {
        Ok(AssessmentStore::open(&self.config.data_dir)?)
    }

    fn rules(&self) -> Result<Vec<ProbeRule>, CliError> {
        let rules = match &self.config.rules {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
                parse_rules(&text).map_err(|e| data(format!("{}: {e}", path.display())))?
            }
            None => default_rules(),
        };
        validate_rules(&rules, &self.model).map_err(data)?;
        Ok(rules)
    }

    fn options(&self) -> ReportOptions {
        ReportOptions {
            format: self.config.format,
            ascii: self.config.ascii,
            ..ReportOptions::default()
        }
    }

    fn load_assessment(&self, raw: &str) -> Result<(AssessmentStore, crate::assessment::StoredAssessment), CliError> {
        let id = AssessmentId::new(raw).map_err(data)?;
        let store = self.store()?;
        let stored = store.load(&id, &self.model)?;
        Ok((store, stored))
    }
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_DATA } else { EXIT_OK };
            let rendered = e.render();
            let _ = if e.use_stderr() {
                write!(stderr, "{}", rendered.ansi())
            } else {
                write!(stdout, "{}", rendered.ansi())
            };
            return code;
        }
    };
    match execute(cli, stdin, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), CliError> {
    let ctx = Context::load(&cli.config)?;
    let io = |e: std::io::Error| data(format!("cannot write output: {e}"));
    match cli.command {
        Command::Model(ModelCommand::Show) => {
            out.write_all(report::render_model_summary(&ctx.model, &ctx.options()).as_bytes())
                .map_err(io)?;
        }
        Command::Assess(args) => cmd_assess(&ctx, args, stdin, out)?,
        Command::Scan(args) => cmd_scan(&ctx, args, out)?,
        Command::Score(args) => {
            let (_, stored) = ctx.load_assessment(&args.id)?;
            let profile = scoring::checked_profile(&ctx.model, &stored.assessment).map_err(data)?;
            let options = ReportOptions {
                include_evidence: args.evidence,
                include_gaps: args.gaps,
                shade_achieved_path: !args.no_shade,
                ..ctx.options()
            };
            let text = report::render_matrix(&ctx.model, &stored.assessment, &profile, &options).map_err(data)?;
            out.write_all(text.as_bytes()).map_err(io)?;
        }
        Command::Gaps { id } => {
            let (_, stored) = ctx.load_assessment(&id)?;
            let gaps = scoring::gap_analysis(&ctx.model, &stored.assessment);
            out.write_all(report::render_gap_report(&ctx.model, &gaps, &ctx.options()).as_bytes())
                .map_err(io)?;
        }
        Command::Whatif(args) => {
            let (_, stored) = ctx.load_assessment(&args.id)?;
            let flips: Vec<Flip> = args
                .implement
                .iter()
                .map(|&code| Flip::implement(code))
                .chain(args.unimplement.iter().map(|&code| Flip {
                    code,
                    state: PracticeState::NotImplemented,
                }))
                .collect();
            let result = scoring::what_if(&ctx.model, &stored.assessment, &flips).map_err(data)?;
            out.write_all(report::render_what_if(&result, &ctx.options()).as_bytes())
                .map_err(io)?;
        }
        Command::Export { id, output } => {
            let (_, stored) = ctx.load_assessment(&id)?;
            let profile = scoring::checked_profile(&ctx.model, &stored.assessment).map_err(data)?;
            let doc = report::export_structured(&ctx.model, &stored.assessment, &profile).map_err(data)?;
            match output {
                Some(path) => std::fs::write(&path, doc).map_err(|e| data(format!("{}: {e}", path.display())))?,
                None => out.write_all(doc.as_bytes()).map_err(io)?,
            }
        }
        Command::Check { id } => {
            let (_, stored) = ctx.load_assessment(&id)?;
            let findings = check_consistency(&ctx.model, &stored.assessment);
            if ctx.config.format == ReportFormat::Structured {
                let mut s = serde_json::to_string_pretty(&findings).expect("findings serialize");
                s.push('\n');
                out.write_all(s.as_bytes()).map_err(io)?;
            } else if findings.is_empty() {
                writeln!(out, "no findings").map_err(io)?;
            } else {
                for f in findings {
                    writeln!(out, "{}", f.message).map_err(io)?;
                }
            }
        }
        Command::Serve(args) => cmd_serve(&ctx, args, out)?,
    }
    out.flush().map_err(io)
}

/// Project and id taken from a full document, plus the parsed statuses.
pub type Answers = (
    Option<ProjectInfo>,
    Option<String>,
    BTreeMap<PracticeCode, PracticeStatus>,
);

/// Reads an answers document: a map from practice code to a state string
/// or a status object, optionally wrapped as a full assessment document.
pub fn parse_answers(text: &str, model: &MaturityModel, source: &str, now: DateTime<Utc>) -> Result<Answers, CliError> {
    let mut statuses = BTreeMap::new();
    if text.trim().is_empty() {
        return Ok((None, None, statuses));
    }
    let root: Value = serde_json::from_str(text).map_err(|e| {
        data(format!(
            "{source}: syntax error at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    let Value::Object(mut root) = root else {
        return Err(data(format!("{source}: expected a JSON object")));
    };
    let (project, id, entries) = match root.remove("statuses") {
        Some(Value::Object(map)) => {
            let project = match root.remove("project") {
                Some(p) => Some(
                    serde_json::from_value::<ProjectInfo>(p).map_err(|e| data(format!("{source}: project: {e}")))?,
                ),
                None => None,
            };
            let id = root.get("id").and_then(Value::as_str).map(String::from);
            (project, id, map)
        }
        Some(_) => return Err(data(format!("{source}: `statuses` must be an object"))),
        None => (None, None, root),
    };
    for (key, value) in entries {
        let code: PracticeCode = key.parse().map_err(|e| data(format!("{source}: {e}")))?;
        if !model.contains(code) {
            return Err(data(format!(
                "{source}: practice {code} is not part of {}",
                model.model_ref()
            )));
        }
        let mut status = match value {
            Value::String(s) => {
                let state: PracticeState = s.parse().map_err(|e| data(format!("{source}: {code}: {e}")))?;
                PracticeStatus {
                    state,
                    ..PracticeStatus::unknown()
                }
            }
            Value::Null => PracticeStatus::unknown(),
            other => {
                serde_json::from_value::<PracticeStatus>(other).map_err(|e| data(format!("{source}: {code}: {e}")))?
            }
        };
        if status.state.is_determinate() && status.evidence.is_empty() {
            status
                .evidence
                .push(EvidenceRecord::manual(format!("answers file {source}"), now));
        }
        statuses.insert(code, status);
    }
    Ok((project, id, statuses))
}

fn cmd_assess(ctx: &Context, args: AssessArgs, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), CliError> {
    let now = ctx.now();
    let io = |e: std::io::Error| data(format!("terminal I/O: {e}"));
    let (file_project, file_id, statuses) = match &args.answers {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
            parse_answers(&text, &ctx.model, &path.display().to_string(), now)?
        }
        None => (None, None, BTreeMap::new()),
    };
    let mut project = match (&args.project, file_project) {
        (Some(name), Some(p)) => ProjectInfo {
            name: name.clone(),
            ..p
        },
        (Some(name), None) => ProjectInfo::named(name),
        (None, Some(p)) => p,
        (None, None) => return Err(data("--project is required unless the answers file names the project")),
    };
    if args.repo_url.is_some() {
        project.repository_url = args.repo_url.clone();
    }
    let id = match args.id.as_deref().or(if args.project.is_none() {
        file_id.as_deref()
    } else {
        None
    }) {
        Some(id) => AssessmentId::new(id).map_err(data)?,
        None => AssessmentId::slug(&project.name).map_err(data)?,
    };
    let mut assessment = Assessment::with_id(&ctx.model, id, project, now).map_err(data)?;
    assessment.statuses.extend(statuses);

    if args.answers.is_none() {
        assessment = interview(ctx, assessment, stdin, out, now).map_err(io)?;
    }
    assessment.validate(&ctx.model).map_err(data)?;

    let store = ctx.store()?;
    if store.exists(&assessment.id) && !args.force {
        return Err(data(format!(
            "assessment `{}` already exists in {}; use --force to replace it",
            assessment.id,
            store.dir().display()
        )));
    }
    store.save(&assessment, None)?;
    let profile = scoring::profile(&ctx.model, &assessment);
    writeln!(
        out,
        "saved {} ({} of {} practices answered), maturity {}",
        store.path_of(&assessment.id).display(),
        assessment.count(PracticeState::Implemented) + assessment.count(PracticeState::NotImplemented),
        ctx.model.practice_count(),
        profile.vector_text
    )
    .map_err(io)
}

/// Walks the matrix in reading order asking about each practice. `q` or
/// end of input stops early; the rest stay unknown.
fn interview(
    ctx: &Context,
    mut assessment: Assessment,
    stdin: &mut dyn BufRead,
    out: &mut dyn Write,
    now: DateTime<Utc>,
) -> std::io::Result<Assessment> {
    writeln!(
        out,
        "Answer y (implemented), n (not implemented), ? (unknown) or q (stop)."
    )?;
    for (fa, cap) in ctx.model.capabilities() {
        writeln!(out, "\n{}.{} {} ({})", fa.index, cap.index, cap.name, fa.name)?;
        for practice in cap.practices_by_level() {
            writeln!(out, "  [{}] {}", practice.code, practice.name)?;
            for c in practice.criteria_by_priority() {
                writeln!(out, "      ({}) {}", c.priority.letter(), c.text)?;
            }
            loop {
                write!(out, "  implemented? ")?;
                out.flush()?;
                let mut line = String::new();
                if stdin.read_line(&mut line)? == 0 || line.trim().eq_ignore_ascii_case("q") {
                    return Ok(assessment);
                }
                match line.parse::<PracticeState>() {
                    Ok(PracticeState::Unknown) => break,
                    Ok(state) => {
                        assessment = assessment
                            .set_status(
                                &ctx.model,
                                practice.code,
                                state,
                                Some(EvidenceRecord::manual("interactive answer", now)),
                                now,
                            )
                            .expect("practice comes from the model");
                        break;
                    }
                    Err(_) => writeln!(out, "  please answer y, n, ? or q")?,
                }
            }
        }
    }
    Ok(assessment)
}

fn cmd_scan(ctx: &Context, args: ScanArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let io = |e: std::io::Error| data(format!("cannot write output: {e}"));
    let (store, stored) = ctx.load_assessment(&args.id)?;
    let rules = ctx.rules()?;
    let mut remote = RemoteOptions::default().token_from_env();
    if let Some(base) = args.api_base {
        remote.api_base = base;
    }
    let replay = match &args.replay {
        Some(path) => Some(ReplayTransport::load(path).map_err(data)?),
        None => None,
    };
    if replay.is_some() {
        // Recorded fixtures answer instantly; no point in waiting.
        remote.backoff = std::time::Duration::ZERO;
    }
    let now = ctx.now();
    let report = scan_repository(
        &args.repo,
        &rules,
        &remote,
        replay.as_ref().map(|r| r as &dyn Transport),
        now,
    )?;
    let merged = stored
        .assessment
        .merge_probe_results(&ctx.model, &report.evidence.proposals, now)
        .map_err(data)?;

    if ctx.config.format == ReportFormat::Structured {
        let doc = serde_json::json!({
            "assessment_id": stored.assessment.id,
            "dry_run": args.dry_run,
            "report": report,
            "changed": merged.changed,
            "overridden": merged.overridden,
            "flagged": merged.flagged,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("scan output serializes");
        s.push('\n');
        out.write_all(s.as_bytes()).map_err(io)?;
    } else {
        writeln!(out, "scanned {} ({} files)", report.origin, report.file_count).map_err(io)?;
        for w in &report.warnings {
            writeln!(out, "warning: {w}").map_err(io)?;
        }
        for r in &report.results {
            let verdict = match r.outcome {
                ProbeOutcome::Detected => "detected",
                ProbeOutcome::NotDetected => "not detected",
                ProbeOutcome::Inapplicable => "inapplicable",
            };
            let at = r.locator.as_deref().map(|l| format!(" at {l}")).unwrap_or_default();
            writeln!(out, "  {:<20} {:<7} {verdict}{at}", r.rule_id, r.target.to_string()).map_err(io)?;
        }
        for p in &report.evidence.proposals {
            let fate = if merged.overridden.contains(&p.code) {
                "kept manual answer"
            } else if merged.changed.contains(&p.code) {
                "changed"
            } else {
                "already so"
            };
            writeln!(out, "proposal {} -> {} ({fate})", p.code, p.state).map_err(io)?;
        }
        for code in &merged.flagged {
            writeln!(out, "needs review: {code} (probes disagree)").map_err(io)?;
        }
        writeln!(
            out,
            "maturity {} -> {}",
            scoring::profile(&ctx.model, &stored.assessment).vector_text,
            scoring::profile(&ctx.model, &merged.assessment).vector_text
        )
        .map_err(io)?;
    }
    if args.dry_run {
        if ctx.config.format != ReportFormat::Structured {
            writeln!(out, "dry run: nothing written").map_err(io)?;
        }
    } else {
        store.save(&merged.assessment, Some(&stored.version))?;
    }
    Ok(())
}

fn cmd_serve(ctx: &Context, args: ServeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let listener = std::net::TcpListener::bind(&args.bind)
        .map_err(|e| CliError::Bind(format!("cannot bind {}: {e}", args.bind)))?;
    let addr = listener
        .local_addr()
        .map_err(|e| CliError::Bind(format!("cannot bind {}: {e}", args.bind)))?;
    listener
        .set_nonblocking(true)
        .map_err(|e| CliError::Bind(e.to_string()))?;

    let mut config = ServiceConfig::new(ctx.model.clone(), &ctx.config.data_dir, ctx.rules()?).with_env();
    if !args.cors.is_empty() {
        config.cors_origins = args.cors;
    }
    config.frozen_time = ctx.config.frozen_time;
    let app = service::router(config)?;

    writeln!(out, "listening on http://{addr}").map_err(data)?;
    out.flush().map_err(data)?;

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| data(format!("cannot start runtime: {e}")))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::from_std(listener).map_err(|e| CliError::Bind(e.to_string()))?;
        service::serve(listener, app, service::shutdown_signal())
            .await
            .map_err(|e| data(format!("server error: {e}")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn run_with(args: &[&str], input: &str) -> (i32, String, String) {
        let mut stdin = std::io::Cursor::new(input.as_bytes().to_vec());
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("rsmm").chain(args.iter().copied()),
            &mut stdin,
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn t() -> DateTime<Utc> {
        Utc.timestamp_opt(1_700_000_000, 0).unwrap()
    }

    #[test]
    fn answers_accept_strings_objects_and_documents() {
        let model = bundled_rsmm();
        let (_, _, s) = parse_answers(
            r#"{"2.3.5": "yes", "1.2.1": {"state": "not_implemented"}, "1.2.2": null}"#,
            &model,
            "a.json",
            t(),
        )
        .unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[&"2.3.5".parse().unwrap()].state, PracticeState::Implemented);
        assert_eq!(s[&"1.2.1".parse().unwrap()].evidence.len(), 1);
        assert_eq!(s[&"1.2.2".parse().unwrap()].state, PracticeState::Unknown);

        let (project, id, s) = parse_answers(&crate::case_study::ggir().to_json(), &model, "g", t()).unwrap();
        assert_eq!(project.unwrap().name, "GGIR");
        assert_eq!(id.as_deref(), Some("ggir"));
        assert_eq!(s.len(), 79);

        assert!(parse_answers("", &model, "e", t()).unwrap().2.is_empty());
        assert!(parse_answers("{}", &model, "e", t()).unwrap().2.is_empty());
    }

    #[test]
    fn answers_reject_unknown_codes() {
        let model = bundled_rsmm();
        let err = parse_answers(r#"{"1.1.1": "yes"}"#, &model, "a.json", t()).unwrap_err();
        assert!(err.to_string().contains("1.1.1"));
        assert_eq!(err.exit_code(), EXIT_DATA);
        assert!(parse_answers(r#"{"x": "yes"}"#, &model, "a", t()).is_err());
        assert!(parse_answers(r#"{"2.3.5": "maybe"}"#, &model, "a", t()).is_err());
    }

    #[test]
    fn interactive_assessment() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        // First capability is 1.1 with five practices.
        let (code, out, err) = run_with(
            &[
                "--data-dir",
                d,
                "--frozen-time",
                "2024-01-01T00:00:00Z",
                "assess",
                "--project",
                "Demo",
            ],
            "y\nmaybe\nn\n?\nq\n",
        );
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("please answer"));
        let a = AssessmentStore::open(d)
            .unwrap()
            .load(&AssessmentId::new("demo").unwrap(), &bundled_rsmm())
            .unwrap()
            .assessment;
        assert_eq!(a.state("1.1.2".parse().unwrap()), PracticeState::Implemented);
        assert_eq!(a.state("1.1.3".parse().unwrap()), PracticeState::NotImplemented);
        assert_eq!(a.state("1.1.7".parse().unwrap()), PracticeState::Unknown);
        assert_eq!(a.created, Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_with(&["frobnicate"], "").0, EXIT_DATA);
        assert_eq!(run_with(&["whatif", "x", "--implement", "1.x"], "").0, EXIT_DATA);
        assert_eq!(run_with(&["--help"], "").0, EXIT_OK);
    }
}
