//! Human-readable and structured renderings of models, assessments,
//! profiles, gap lists and what-if results.
//!
//! The matrix view lays capabilities out as rows and maturity levels as
//! columns. Cells with a practice show its state; cells without one stay
//! blank. Unanswered practices get their own glyph so they are never
//! mistaken for an empty cell.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assessment::{Assessment, AssessmentError, EvidenceSource, PracticeState};
use crate::model::{MaturityModel, ModelRef, PracticeCode};
use crate::scoring::{self, GapItem, MaturityProfile, ScoringError, WhatIfResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Text,
    Markdown,
    Html,
    Structured,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "plain-text" | "plain" => Ok(Self::Text),
            "markdown" | "md" => Ok(Self::Markdown),
            "html" => Ok(Self::Html),
            "structured" | "json" => Ok(Self::Structured),
            other => Err(format!(
                "unknown format `{other}` (expected text, markdown, html or structured)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportOptions {
    pub format: ReportFormat,
    pub include_evidence: bool,
    pub include_gaps: bool,
    pub shade_achieved_path: bool,
    /// Plain ASCII: `Y`/`N`/`.` instead of tick, cross and middle dot.
    pub ascii: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            format: ReportFormat::Text,
            include_evidence: false,
            include_gaps: false,
            shade_achieved_path: true,
            ascii: false,
        }
    }
}

impl ReportOptions {
    pub fn format(format: ReportFormat) -> Self {
        Self {
            format,
            ..Self::default()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("profile does not belong to this assessment: {0}")]
    Mismatch(String),
    #[error("malformed export: {0}")]
    Syntax(String),
    #[error(transparent)]
    Assessment(#[from] AssessmentError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    NoPractice,
    Practice(PracticeState),
}

struct Glyphs {
    implemented: &'static str,
    not_implemented: &'static str,
    unknown: &'static str,
}

const UNICODE: Glyphs = Glyphs {
    implemented: "✓",
    not_implemented: "✗",
    unknown: "·",
};

const ASCII: Glyphs = Glyphs {
    implemented: "Y",
    not_implemented: "N",
    unknown: ".",
};

impl Glyphs {
    fn of(&self, cell: Cell) -> &'static str {
        match cell {
            Cell::NoPractice => " ",
            Cell::Practice(PracticeState::Implemented) => self.implemented,
            Cell::Practice(PracticeState::NotImplemented) => self.not_implemented,
            Cell::Practice(PracticeState::Unknown) => self.unknown,
        }
    }
}

fn glyphs(options: &ReportOptions) -> &'static Glyphs {
    if options.ascii {
        &ASCII
    } else {
        &UNICODE
    }
}

struct Row {
    code: String,
    name: String,
    focus_area: u32,
    achieved: u32,
    cells: Vec<(Cell, Option<PracticeCode>)>,
}

fn rows(model: &MaturityModel, assessment: &Assessment, profile: &MaturityProfile) -> Vec<Row> {
    model
        .capabilities()
        .zip(&profile.capabilities)
        .map(|((fa, cap), score)| {
            let cells = (1..=model.max_level())
                .map(|level| match cap.practices.iter().find(|p| p.code.level == level) {
                    Some(p) => (Cell::Practice(assessment.state(p.code)), Some(p.code)),
                    None => (Cell::NoPractice, None),
                })
                .collect();
            Row {
                code: score.capability.to_string(),
                name: cap.name.clone(),
                focus_area: fa.index,
                achieved: score.achieved_level,
                cells,
            }
        })
        .collect()
}

fn check_profile(model: &MaturityModel, assessment: &Assessment, profile: &MaturityProfile) -> Result<(), ReportError> {
    if profile.assessment_id != assessment.id {
        return Err(ReportError::Mismatch(format!(
            "profile is for `{}`, assessment is `{}`",
            profile.assessment_id, assessment.id
        )));
    }
    let expected = scoring::checked_profile(model, assessment)?;
    if &expected != profile {
        return Err(ReportError::Mismatch(format!(
            "profile {} was not computed from this assessment (scores {})",
            profile.vector_text, expected.vector_text
        )));
    }
    Ok(())
}

fn truncate(name: &str, width: usize) -> String {
    if name.chars().count() <= width {
        name.to_string()
    } else {
        let mut s: String = name.chars().take(width - 3).collect();
        s.push_str("...");
        s
    }
}

fn legend(options: &ReportOptions) -> String {
    let mut text = if options.ascii {
        "Legend: Y implemented, N not implemented, . unknown, blank no practice at that level".to_string()
    } else {
        "Legend: tick implemented, cross not implemented, dot unknown, blank no practice at that level".to_string()
    };
    if options.shade_achieved_path {
        text.push_str(", [ ] achieved path");
    }
    text
}

fn html_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn title(model: &MaturityModel, assessment: &Assessment) -> String {
    format!(
        "{} assessment: {} ({})",
        model.model_ref(),
        assessment.project.name,
        assessment.id
    )
}

/// Capability-by-level matrix with the focus-area maturity vector.
pub fn render_matrix(
    model: &MaturityModel,
    assessment: &Assessment,
    profile: &MaturityProfile,
    options: &ReportOptions,
) -> Result<String, ReportError> {
    check_profile(model, assessment, profile)?;
    let mut out = match options.format {
        ReportFormat::Text => matrix_text(model, assessment, profile, options),
        ReportFormat::Markdown => matrix_markdown(model, assessment, profile, options),
        ReportFormat::Html => return Ok(matrix_html(model, assessment, profile, options)),
        ReportFormat::Structured => return export_structured(model, assessment, profile),
    };
    if options.include_evidence {
        out.push('\n');
        out.push_str(&evidence_section(model, assessment, options.format));
    }
    if options.include_gaps {
        out.push('\n');
        out.push_str(&render_gap_report(
            model,
            &scoring::gap_analysis(model, assessment),
            options,
        ));
    }
    Ok(out)
}

fn matrix_text(
    model: &MaturityModel,
    assessment: &Assessment,
    profile: &MaturityProfile,
    options: &ReportOptions,
) -> String {
    let g = glyphs(options);
    let rows = rows(model, assessment, profile);
    let name_width = rows
        .iter()
        .map(|r| r.name.chars().count())
        .max()
        .unwrap_or(0)
        .clamp(10, 36);
    let mut out = String::new();
    let _ = writeln!(out, "{}", title(model, assessment));
    let _ = writeln!(out, "Maturity profile: {}", profile.vector_text);
    out.push('\n');

    let mut header = format!("{:<6}{:<name_width$} ", "", "");
    for level in 1..=model.max_level() {
        let _ = write!(header, "{level:^3}");
    }
    header.push_str(" achieved");
    let _ = writeln!(out, "{}", header.trim_end());

    let mut current_fa = 0;
    for row in &rows {
        if row.focus_area != current_fa {
            current_fa = row.focus_area;
            let fa = model.focus_area(current_fa).expect("row focus area exists");
            let _ = writeln!(
                out,
                "FA{} {} (maturity {})",
                fa.index,
                fa.name,
                profile.focus_area_maturity(fa.index).unwrap_or(0)
            );
        }
        let mut line = format!("{:<6}{:<name_width$} ", row.code, truncate(&row.name, name_width));
        for (i, (cell, _)) in row.cells.iter().enumerate() {
            let glyph = g.of(*cell);
            if options.shade_achieved_path && (i as u32) < row.achieved {
                let _ = write!(line, "[{glyph}]");
            } else {
                let _ = write!(line, " {glyph} ");
            }
        }
        let _ = write!(line, " {:>2}", row.achieved);
        let _ = writeln!(out, "{line}");
    }
    out.push('\n');
    let _ = writeln!(out, "{}", legend(options));
    out
}

fn matrix_markdown(
    model: &MaturityModel,
    assessment: &Assessment,
    profile: &MaturityProfile,
    options: &ReportOptions,
) -> String {
    let g = glyphs(options);
    let mut out = String::new();
    let _ = writeln!(out, "# {}", title(model, assessment));
    out.push('\n');
    let _ = writeln!(out, "Maturity profile: **{}**", profile.vector_text);
    out.push('\n');
    let mut header = "| Capability |".to_string();
    let mut rule = "|---|".to_string();
    for level in 1..=model.max_level() {
        let _ = write!(header, " {level} |");
        rule.push_str(":-:|");
    }
    header.push_str(" Achieved |");
    rule.push_str("--:|");
    let _ = writeln!(out, "{header}\n{rule}");
    for row in rows(model, assessment, profile) {
        let mut line = format!("| {} {} |", row.code, row.name.replace('|', "\\|"));
        for (i, (cell, _)) in row.cells.iter().enumerate() {
            let glyph = g.of(*cell);
            if options.shade_achieved_path && (i as u32) < row.achieved {
                let _ = write!(line, " [{glyph}] |");
            } else {
                let _ = write!(line, " {glyph} |");
            }
        }
        let _ = write!(line, " {} |", row.achieved);
        let _ = writeln!(out, "{line}");
    }
    out.push('\n');
    for fa in model.focus_areas() {
        let _ = writeln!(
            out,
            "- FA{} {}: {}",
            fa.index,
            fa.name,
            profile.focus_area_maturity(fa.index).unwrap_or(0)
        );
    }
    out.push('\n');
    let _ = writeln!(out, "{}", legend(options));
    out
}

const HTML_STYLE_PATH: &str = "background:#d9d9d9;";
const HTML_STYLE_CELL: &str = "border:1px solid #999;width:2em;height:1.6em;text-align:center;";

fn matrix_html(
    model: &MaturityModel,
    assessment: &Assessment,
    profile: &MaturityProfile,
    options: &ReportOptions,
) -> String {
    let g = glyphs(options);
    let mut out = String::new();
    let t = html_escape(&title(model, assessment));
    let _ = write!(
        out,
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>{t}</title>\n</head>\n\
         <body style=\"font-family:sans-serif;\">\n<h1 style=\"font-size:1.3em;\">{t}</h1>\n\
         <p>Maturity profile: <strong data-vector=\"{v}\">{v}</strong></p>\n\
         <table style=\"border-collapse:collapse;\">\n<tr><th style=\"text-align:left;\">Capability</th>",
        v = profile.vector_text
    );
    for level in 1..=model.max_level() {
        let _ = write!(out, "<th style=\"{HTML_STYLE_CELL}\">{level}</th>");
    }
    out.push_str("<th>Achieved</th></tr>\n");
    for row in rows(model, assessment, profile) {
        let _ = write!(
            out,
            "<tr><td style=\"padding-right:1em;\">{} {}</td>",
            row.code,
            html_escape(&row.name)
        );
        for (i, (cell, code)) in row.cells.iter().enumerate() {
            let mut style = HTML_STYLE_CELL.to_string();
            if options.shade_achieved_path && (i as u32) < row.achieved {
                style.push_str(HTML_STYLE_PATH);
            }
            let (class, extra) = match cell {
                Cell::NoPractice => ("none", "background:#f4f4f4;"),
                Cell::Practice(PracticeState::Implemented) => ("implemented", "color:#1a7f37;"),
                Cell::Practice(PracticeState::NotImplemented) => ("not-implemented", "color:#c62828;"),
                Cell::Practice(PracticeState::Unknown) => {
                    ("unknown", "color:#777;font-style:italic;outline:1px dashed #777;")
                }
            };
            if !(options.shade_achieved_path && (i as u32) < row.achieved && *cell == Cell::NoPractice) {
                style.push_str(extra);
            }
            let title_attr = code.map(|c| format!(" title=\"{c}\"")).unwrap_or_default();
            let glyph = match cell {
                Cell::NoPractice => "",
                _ => g.of(*cell),
            };
            let _ = write!(out, "<td class=\"{class}\" style=\"{style}\"{title_attr}>{glyph}</td>");
        }
        let _ = writeln!(out, "<td style=\"text-align:right;\">{}</td></tr>", row.achieved);
    }
    out.push_str("</table>\n<ul>\n");
    for fa in model.focus_areas() {
        let _ = writeln!(
            out,
            "<li>FA{} {}: {}</li>",
            fa.index,
            html_escape(&fa.name),
            profile.focus_area_maturity(fa.index).unwrap_or(0)
        );
    }
    out.push_str("</ul>\n");
    let _ = writeln!(out, "<p style=\"color:#555;\">{}</p>", html_escape(&legend(options)));
    if options.include_evidence {
        out.push_str(&evidence_section(model, assessment, ReportFormat::Html));
    }
    if options.include_gaps {
        out.push_str(&gap_html(model, &scoring::gap_analysis(model, assessment)));
    }
    out.push_str("</body>\n</html>\n");
    out
}

fn source_label(source: EvidenceSource) -> &'static str {
    match source {
        EvidenceSource::Manual => "manual",
        EvidenceSource::Probe => "probe",
    }
}

fn evidence_section(model: &MaturityModel, assessment: &Assessment, format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Html => out.push_str("<h2 style=\"font-size:1.1em;\">Evidence</h2>\n<ul>\n"),
        ReportFormat::Markdown => out.push_str("## Evidence\n\n"),
        _ => out.push_str("Evidence\n"),
    }
    for (code, status) in &assessment.statuses {
        if status.evidence.is_empty() {
            continue;
        }
        let name = model.lookup(*code).map(|p| p.name.as_str()).unwrap_or("");
        let review = if status.needs_review { " (needs review)" } else { "" };
        let head = format!("{code} {name}: {}{review}", status.state);
        let items: Vec<String> = status
            .evidence
            .iter()
            .map(|e| {
                let mut s = format!(
                    "[{}, {}] {}",
                    source_label(e.source),
                    match e.confidence {
                        crate::assessment::Confidence::Certain => "certain",
                        crate::assessment::Confidence::Heuristic => "heuristic",
                    },
                    e.note
                );
                if let Some(loc) = &e.locator {
                    let _ = write!(s, " <{loc}>");
                }
                let _ = write!(
                    s,
                    " at {}",
                    e.observed_at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
                );
                s
            })
            .collect();
        match format {
            ReportFormat::Html => {
                let _ = write!(out, "<li>{}<ul>", html_escape(&head));
                for i in items {
                    let _ = write!(out, "<li>{}</li>", html_escape(&i));
                }
                out.push_str("</ul></li>\n");
            }
            ReportFormat::Markdown => {
                let _ = writeln!(out, "- {head}");
                for i in items {
                    let _ = writeln!(out, "  - {i}");
                }
            }
            _ => {
                let _ = writeln!(out, "  {head}");
                for i in items {
                    let _ = writeln!(out, "    {i}");
                }
            }
        }
    }
    if format == ReportFormat::Html {
        out.push_str("</ul>\n");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct GapEntry {
    focus_area: u32,
    code: PracticeCode,
    name: String,
    current_level: u32,
    unlocked_level: u32,
    lift: u32,
}

fn gap_entries(model: &MaturityModel, gaps: &[GapItem]) -> Vec<GapEntry> {
    gaps.iter()
        .map(|g| GapEntry {
            focus_area: g.focus_area,
            code: g.code,
            name: model.lookup(g.code).map(|p| p.name.clone()).unwrap_or_default(),
            current_level: g.current_level,
            unlocked_level: g.unlocked_level,
            lift: g.lift(),
        })
        .collect()
}

fn gap_html(model: &MaturityModel, gaps: &[GapItem]) -> String {
    let mut out = String::from("<h2 style=\"font-size:1.1em;\">Next steps</h2>\n");
    if gaps.is_empty() {
        out.push_str("<p>no gaps</p>\n");
        return out;
    }
    out.push_str("<ol>\n");
    for e in gap_entries(model, gaps) {
        let _ = writeln!(
            out,
            "<li>{} {}: FA{} {} &rarr; {}</li>",
            e.code,
            html_escape(&e.name),
            e.focus_area,
            e.current_level,
            e.unlocked_level
        );
    }
    out.push_str("</ol>\n");
    out
}

/// Blocking practices in the order given (normally from
/// [`scoring::gap_analysis`]), each with the focus-area level it unlocks.
pub fn render_gap_report(model: &MaturityModel, gaps: &[GapItem], options: &ReportOptions) -> String {
    match options.format {
        ReportFormat::Structured => {
            let doc = serde_json::json!({ "gaps": gap_entries(model, gaps) });
            let mut s = serde_json::to_string_pretty(&doc).expect("gap entries serialize");
            s.push('\n');
            s
        }
        ReportFormat::Html => {
            format!(
                "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>Next steps</title>\n</head>\n<body style=\"font-family:sans-serif;\">\n{}</body>\n</html>\n",
                gap_html(model, gaps)
            )
        }
        ReportFormat::Markdown => {
            let mut out = String::from("## Next steps\n\n");
            if gaps.is_empty() {
                out.push_str("no gaps\n");
            }
            for (i, e) in gap_entries(model, gaps).iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{}. `{}` {}: FA{} {} -> {}",
                    i + 1,
                    e.code,
                    e.name,
                    e.focus_area,
                    e.current_level,
                    e.unlocked_level
                );
            }
            out
        }
        ReportFormat::Text => {
            if gaps.is_empty() {
                return "no gaps\n".into();
            }
            let mut out = String::from("Next steps (implementing one practice; largest gain first)\n");
            for (i, e) in gap_entries(model, gaps).iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{:>3}. {:<7} FA{} {:>2} -> {:<2} {}",
                    i + 1,
                    e.code.to_string(),
                    e.focus_area,
                    e.current_level,
                    e.unlocked_level,
                    e.name
                );
            }
            out
        }
    }
}

/// Before/after vectors of a simulation.
pub fn render_what_if(result: &WhatIfResult, options: &ReportOptions) -> String {
    let flips: Vec<String> = result
        .flipped
        .iter()
        .map(|f| format!("{} -> {}", f.code, f.state))
        .collect();
    let delta: Vec<String> = result.delta().iter().map(|d| format!("{d:+}")).collect();
    match options.format {
        ReportFormat::Structured => {
            let mut s = serde_json::to_string_pretty(result).expect("what-if results serialize");
            s.push('\n');
            s
        }
        ReportFormat::Html => format!(
            "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>What if</title>\n</head>\n\
             <body style=\"font-family:sans-serif;\">\n<table>\n<tr><th>before</th><td>{}</td></tr>\n\
             <tr><th>after</th><td>{}</td></tr>\n<tr><th>change</th><td>{}</td></tr>\n</table>\n<p>{}</p>\n</body>\n</html>\n",
            result.before.vector_text,
            result.after.vector_text,
            delta.join(" "),
            html_escape(&flips.join(", "))
        ),
        ReportFormat::Markdown => format!(
            "## What if\n\n| | profile |\n|---|---|\n| before | {} |\n| after | {} |\n| change | {} |\n\nFlips: {}\n",
            result.before.vector_text,
            result.after.vector_text,
            delta.join(" "),
            if flips.is_empty() { "none".into() } else { flips.join(", ") }
        ),
        ReportFormat::Text => format!(
            "flips:  {}\nbefore: {}\nafter:  {}\nchange: {}\n",
            if flips.is_empty() { "none".into() } else { flips.join(", ") },
            result.before.vector_text,
            result.after.vector_text,
            delta.join(" ")
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model_ref: ModelRef,
    pub max_level: u32,
    pub focus_area_count: usize,
    pub capability_count: usize,
    pub practice_count: usize,
    pub focus_areas: Vec<FocusAreaSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FocusAreaSummary {
    pub index: u32,
    pub name: String,
    pub practice_count: usize,
    pub capabilities: Vec<CapabilitySummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapabilitySummary {
    pub code: String,
    pub name: String,
    pub levels: Vec<u32>,
}

pub fn model_summary(model: &MaturityModel) -> ModelSummary {
    ModelSummary {
        model_ref: model.model_ref(),
        max_level: model.max_level(),
        focus_area_count: model.focus_areas().len(),
        capability_count: model.capability_count(),
        practice_count: model.practice_count(),
        focus_areas: model
            .focus_areas()
            .iter()
            .map(|fa| FocusAreaSummary {
                index: fa.index,
                name: fa.name.clone(),
                practice_count: fa.practice_count(),
                capabilities: fa
                    .capabilities
                    .iter()
                    .map(|c| CapabilitySummary {
                        code: format!("{}.{}", fa.index, c.index),
                        name: c.name.clone(),
                        levels: c.levels().into_iter().collect(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Focus areas, capabilities and the level grid of a model.
pub fn render_model_summary(model: &MaturityModel, options: &ReportOptions) -> String {
    let summary = model_summary(model);
    if options.format == ReportFormat::Structured {
        let mut s = serde_json::to_string_pretty(&summary).expect("summaries serialize");
        s.push('\n');
        return s;
    }
    let mark = if options.ascii { "#" } else { "■" };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}: {} focus areas, {} capabilities, {} practices, levels 1-{}",
        summary.model_ref,
        summary.focus_area_count,
        summary.capability_count,
        summary.practice_count,
        summary.max_level
    );
    let body = {
        let mut body = String::new();
        for fa in &summary.focus_areas {
            let _ = writeln!(body, "\nFA{} {} ({} practices)", fa.index, fa.name, fa.practice_count);
            for cap in &fa.capabilities {
                let grid: String = (1..=summary.max_level)
                    .map(|l| {
                        if cap.levels.contains(&l) {
                            format!("{mark:^3}")
                        } else {
                            " - ".to_string()
                        }
                    })
                    .collect();
                let _ = writeln!(
                    body,
                    "  {:<5}{:<36}{}",
                    cap.code,
                    truncate(&cap.name, 35),
                    grid.trim_end()
                );
            }
        }
        body
    };
    match options.format {
        ReportFormat::Html => format!(
            "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>{t}</title>\n</head>\n<body>\n<pre>{t}\n{b}</pre>\n</body>\n</html>\n",
            t = html_escape(out.trim_end()),
            b = html_escape(&body)
        ),
        ReportFormat::Markdown => format!("# {}\n```\n{}```\n", out.trim_end(), body.trim_start()),
        _ => out + &body,
    }
}

/// Machine-readable bundle of an assessment and its profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportBundle {
    pub model_ref: ModelRef,
    pub assessment: Assessment,
    pub profile: MaturityProfile,
}

impl ExportBundle {
    /// Parses an export and checks the assessment against `model`.
    pub fn parse(input: &str, model: &MaturityModel) -> Result<Self, ReportError> {
        let bundle: Self = serde_json::from_str(input).map_err(|e| ReportError::Syntax(e.to_string()))?;
        bundle.assessment.validate(model)?;
        if bundle.model_ref != model.model_ref() {
            return Err(ReportError::Mismatch(format!(
                "export is for {}, model is {}",
                bundle.model_ref,
                model.model_ref()
            )));
        }
        Ok(bundle)
    }
}

/// Byte-stable JSON export; re-parsing and re-scoring reproduces `profile`.
pub fn export_structured(
    model: &MaturityModel,
    assessment: &Assessment,
    profile: &MaturityProfile,
) -> Result<String, ReportError> {
    check_profile(model, assessment, profile)?;
    let bundle = ExportBundle {
        model_ref: model.model_ref(),
        assessment: assessment.clone(),
        profile: profile.clone(),
    };
    let mut s = serde_json::to_string_pretty(&bundle).expect("bundles serialize");
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assessment::{EvidenceRecord, ProjectInfo};
    use crate::case_study;
    use crate::model::bundled_rsmm;
    use crate::scoring::{profile, Flip};
    use chrono::{TimeZone, Utc};

    fn fresh(model: &MaturityModel) -> Assessment {
        Assessment::new(model, ProjectInfo::named("Fresh"), Utc.timestamp_opt(0, 0).unwrap()).unwrap()
    }

    fn matrix_lines(text: &str) -> Vec<&str> {
        text.lines()
            .filter(|l| {
                l.split_whitespace()
                    .next()
                    .is_some_and(|w| w.len() == 3 && w.as_bytes()[1] == b'.')
            })
            .collect()
    }

    #[test]
    fn ggir_text_matrix() {
        let model = bundled_rsmm();
        let a = case_study::ggir();
        let p = profile(&model, &a);
        let text = render_matrix(&model, &a, &p, &ReportOptions::default()).unwrap();
        assert!(text.contains("Maturity profile: 4-3-6-7"));
        assert_eq!(matrix_lines(&text).len(), 17);
        assert_eq!(text.matches('✓').count(), a.count(PracticeState::Implemented));
        assert_eq!(text.matches('✗').count(), a.count(PracticeState::NotImplemented));
        assert_eq!(text.matches('·').count(), 0);
    }

    #[test]
    fn achieved_path_is_bracketed() {
        let model = bundled_rsmm();
        let a = case_study::ggir();
        let p = profile(&model, &a);
        let text = render_matrix(&model, &a, &p, &ReportOptions::default()).unwrap();
        for (line, score) in matrix_lines(&text).iter().zip(&p.capabilities) {
            let shaded = line.matches('[').count() as u32;
            assert_eq!(shaded, score.achieved_level, "{line}");
        }
        let plain = ReportOptions {
            shade_achieved_path: false,
            ..ReportOptions::default()
        };
        assert!(!render_matrix(&model, &a, &p, &plain).unwrap().contains('['));
    }

    #[test]
    fn fresh_matrix_shows_unknowns_not_marks() {
        let model = bundled_rsmm();
        let a = fresh(&model);
        let p = profile(&model, &a);
        let text = render_matrix(&model, &a, &p, &ReportOptions::default()).unwrap();
        assert_eq!(text.matches('·').count(), 79);
        assert_eq!(text.matches('✓').count() + text.matches('✗').count(), 0);
        assert!(text.contains(&format!("Maturity profile: {}", p.vector_text)));
    }

    #[test]
    fn ascii_mode_has_no_unicode() {
        let model = bundled_rsmm();
        let a = case_study::esmvaltool();
        let p = profile(&model, &a);
        let opts = ReportOptions {
            ascii: true,
            ..ReportOptions::default()
        };
        let text = render_matrix(&model, &a, &p, &opts).unwrap();
        assert!(text.is_ascii());
        assert!(text.contains("5-4-8-8"));
    }

    #[test]
    fn single_practice_model() {
        let model = MaturityModel::from_json(
            r#"{"metadata": {"model_name": "Mini", "version": "1"}, "max_level": 3,
                "focus_areas": [{"index": 1, "name": "F", "capabilities": [{"index": 1, "name": "C",
                "practices": [{"code": "1.1.2", "name": "P", "placeholder": true}]}]}]}"#,
        )
        .unwrap();
        let now = Utc.timestamp_opt(0, 0).unwrap();
        let a = Assessment::new(&model, ProjectInfo::named("x"), now)
            .unwrap()
            .set_status(
                &model,
                "1.1.2".parse().unwrap(),
                PracticeState::Implemented,
                Some(EvidenceRecord::manual("yes", now)),
                now,
            )
            .unwrap();
        let p = profile(&model, &a);
        let text = render_matrix(&model, &a, &p, &ReportOptions::default()).unwrap();
        assert_eq!(matrix_lines(&text).len(), 1);
        assert_eq!(text.matches('✓').count(), 1);
        assert!(text.contains("Maturity profile: 3"));
    }

    #[test]
    fn mismatched_profile_is_rejected() {
        let model = bundled_rsmm();
        let ggir = case_study::ggir();
        let esm = case_study::esmvaltool();
        let p = profile(&model, &esm);
        assert!(matches!(
            render_matrix(&model, &ggir, &p, &ReportOptions::default()),
            Err(ReportError::Mismatch(_))
        ));
        let mut forged = profile(&model, &ggir);
        forged.vector[0] = 9;
        assert!(render_matrix(&model, &ggir, &forged, &ReportOptions::default()).is_err());
    }

    #[test]
    fn html_is_self_contained() {
        let model = bundled_rsmm();
        let a = case_study::ggir();
        let p = profile(&model, &a);
        let opts = ReportOptions {
            format: ReportFormat::Html,
            include_evidence: true,
            include_gaps: true,
            ..ReportOptions::default()
        };
        let html = render_matrix(&model, &a, &p, &opts).unwrap();
        assert!(html.starts_with("<!DOCTYPE html>"));
        assert!(html.trim_end().ends_with("</html>"));
        assert!(!html.contains("<link") && !html.contains("<script") && !html.contains("src="));
        assert!(html.contains("data-vector=\"4-3-6-7\""));
        assert_eq!(
            html.matches("class=\"implemented\"").count(),
            a.count(PracticeState::Implemented)
        );
        let unknown = render_matrix(&model, &fresh(&model), &profile(&model, &fresh(&model)), &opts).unwrap();
        assert_eq!(unknown.matches("class=\"unknown\"").count(), 79);
    }

    #[test]
    fn markdown_matrix() {
        let model = bundled_rsmm();
        let a = case_study::ggir();
        let p = profile(&model, &a);
        let md = render_matrix(&model, &a, &p, &ReportOptions::format(ReportFormat::Markdown)).unwrap();
        assert!(md.contains("**4-3-6-7**"));
        assert_eq!(
            md.lines()
                .filter(|l| l.starts_with("| ") && l.as_bytes()[3] == b'.')
                .count(),
            17
        );
    }

    #[test]
    fn gap_reports() {
        let model = bundled_rsmm();
        let a = case_study::ggir();
        let gaps = scoring::gap_analysis(&model, &a);
        let text = render_gap_report(&model, &gaps, &ReportOptions::default());
        let first = text.lines().nth(1).unwrap();
        assert!(first.contains("1.2.5") && first.contains("FA1  4 -> 5"), "{first}");
        assert_eq!(render_gap_report(&model, &[], &ReportOptions::default()), "no gaps\n");
        let json = render_gap_report(&model, &gaps, &ReportOptions::format(ReportFormat::Structured));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["gaps"][0]["code"], "1.2.5");
        assert_eq!(v["gaps"].as_array().unwrap().len(), gaps.len());
    }

    #[test]
    fn what_if_text() {
        let model = bundled_rsmm();
        let a = case_study::ggir();
        let flips = [
            Flip::implement("1.2.5".parse().unwrap()),
            Flip::implement("1.2.6".parse().unwrap()),
        ];
        let r = scoring::what_if(&model, &a, &flips).unwrap();
        let text = render_what_if(&r, &ReportOptions::default());
        assert!(text.contains("before: 4-3-6-7"));
        assert!(text.contains("after:  7-3-6-7"));
        assert!(text.contains("change: +3 +0 +0 +0"));
    }

    #[test]
    fn model_summary_counts() {
        let model = bundled_rsmm();
        let text = render_model_summary(&model, &ReportOptions::default());
        assert!(text.starts_with("RSMM v1.0: 4 focus areas, 17 capabilities, 79 practices"));
        let s = model_summary(&model);
        let per_fa: Vec<usize> = s.focus_areas.iter().map(|f| f.practice_count).collect();
        assert_eq!(per_fa, [19, 22, 16, 22]);
        let json = render_model_summary(&model, &ReportOptions::format(ReportFormat::Structured));
        let back: ModelSummary = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn structured_export_round_trips_and_is_stable() {
        let model = bundled_rsmm();
        for a in [case_study::ggir(), case_study::esmvaltool(), fresh(&model)] {
            let p = profile(&model, &a);
            let doc = export_structured(&model, &a, &p).unwrap();
            assert_eq!(doc, export_structured(&model, &a, &p).unwrap());
            let back = ExportBundle::parse(&doc, &model).unwrap();
            assert_eq!(back.assessment, a);
            assert_eq!(profile(&model, &back.assessment), p);
            assert_eq!(back.profile, p);
        }
    }

    #[test]
    fn format_names() {
        assert_eq!("plain-text".parse::<ReportFormat>().unwrap(), ReportFormat::Text);
        assert_eq!("JSON".parse::<ReportFormat>().unwrap(), ReportFormat::Structured);
        assert!("pdf".parse::<ReportFormat>().is_err());
    }
}
