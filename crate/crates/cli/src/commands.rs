use std::path::Path;

use chrono::DateTime;
use precise_core::analysis::{analyze as build_bundle, read_bundle, read_scores_csv, score_pairs, write_bundle, write_scores_csv, GradingSection};
use precise_core::error::SimplifyError;
use precise_core::grading::complete_study_results;
use precise_core::grading::log::replay_log;
use precise_core::ingest::{filter_reports, load_reports, write_jsonl, write_rejections, CorpusFormat, FilterConfig, RejectReason};
use precise_core::report::{available_figures, render_outputs, Figure, MANIFEST_FILE};
use precise_core::simplify::{batch_simplify, read_pairs, BackendConfig, BackendKind, Simplifier, ENV_API_KEY};

use crate::{AnalyzeArgs, BackendArg, CliError, FormatArg, IngestArgs, ReportArgs, ScoreArgs, SimplifyArgs};

pub(crate) fn require_file(path: &Path, flag: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{flag} {}: no such file", path.display())))
    }
}

pub(crate) fn require_parent(path: &Path, flag: &str) -> Result<(), CliError> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => {
            Err(CliError::Usage(format!("{flag} {}: directory {} does not exist", path.display(), p.display())))
        }
        _ => Ok(()),
    }
}

fn corpus_format(path: &Path, explicit: Option<FormatArg>) -> Result<CorpusFormat, CliError> {
    if let Some(f) = explicit {
        return Ok(f.into());
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(CorpusFormat::Csv),
        Some("jsonl" | "json" | "ndjson") => Ok(CorpusFormat::Jsonl),
        _ => Err(CliError::Usage(format!("cannot infer the format of {}; pass --format", path.display()))),
    }
}

pub(crate) fn ingest(a: IngestArgs) -> Result<(), CliError> {
    require_file(&a.input, "--input")?;
    require_parent(&a.out, "--out")?;
    if let Some(r) = &a.rejects {
        require_parent(r, "--rejects")?;
    }
    let format = corpus_format(&a.input, a.format)?;
    let config = FilterConfig { min_words: a.min_words as usize, ..FilterConfig::default() };

    let reports = load_reports(&a.input, format).map_err(CliError::data)?;
    let total = reports.len();
    let outcome = filter_reports(reports, &config);
    write_jsonl(&a.out, &outcome.kept).map_err(|e| CliError::Data(format!("{}: {e}", a.out.display())))?;
    if let Some(path) = &a.rejects {
        write_rejections(path, &outcome.rejected).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    }
    let count = |r: RejectReason| outcome.rejected.iter().filter(|x| x.reason == r).count();
    eprintln!(
        "read {total} reports: kept {}, rejected {} (empty {}, too short {}, invalid characters {})",
        outcome.kept.len(),
        outcome.rejected.len(),
        count(RejectReason::Empty),
        count(RejectReason::TooShort),
        count(RejectReason::InvalidChars),
    );
    Ok(())
}

fn simplify_error(e: SimplifyError) -> CliError {
    match e {
        SimplifyError::Config(m) => CliError::Usage(m),
        other => CliError::data(other),
    }
}

fn backend_config(a: &SimplifyArgs) -> Result<BackendConfig, CliError> {
    let mut config = match a.backend {
        BackendArg::Mock => BackendConfig::mock(),
        BackendArg::Http => {
            let endpoint = a.endpoint.clone().ok_or_else(|| CliError::Usage("--backend http needs --endpoint or PRECISE_API_URL".into()))?;
            let model = a.model.clone().ok_or_else(|| CliError::Usage("--backend http needs --model or PRECISE_MODEL".into()))?;
            BackendConfig::http(endpoint, model)
        }
    };
    if let Some(rpm) = a.rpm {
        config.requests_per_minute = (rpm != 0.0).then_some(rpm);
    }
    if let Some(n) = a.max_retries {
        config.max_retries = n;
    }
    if let Some(n) = a.concurrency {
        config.concurrency = n;
    }
    if let Some(t) = a.timeout_secs {
        config.timeout_secs = t;
    }
    config.validate().map_err(simplify_error)?;
    Ok(config)
}

/// `SOURCE_DATE_EPOCH`, when set, pins every `created_at`.
fn fixed_time() -> Result<Option<DateTime<chrono::Utc>>, CliError> {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Err(_) => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<i64>()
            .ok()
            .and_then(|s| DateTime::from_timestamp(s, 0))
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("SOURCE_DATE_EPOCH={v:?} is not a unix timestamp"))),
    }
}

pub(crate) fn simplify(a: SimplifyArgs) -> Result<(), CliError> {
    require_file(&a.corpus, "--corpus")?;
    require_parent(&a.out, "--out")?;
    let format = corpus_format(&a.corpus, a.format)?;
    let config = backend_config(&a)?;
    let at = fixed_time()?;
    let key = match config.kind {
        BackendKind::HttpChat => std::env::var(ENV_API_KEY).ok().filter(|k| !k.is_empty()),
        BackendKind::Mock => None,
    };
    let backend = config.build(key).map_err(simplify_error)?;

    let corpus = load_reports(&a.corpus, format).map_err(CliError::data)?;
    let mut simplifier = Simplifier::new(backend.as_ref(), &config).map_err(simplify_error)?;
    if let Some(at) = at {
        simplifier = simplifier.with_fixed_time(at);
    }
    let summary = batch_simplify(&simplifier, &corpus, &a.out, a.resume).map_err(simplify_error)?;
    eprintln!(
        "simplified {} reports with {} ({} skipped as already done, {} failed)",
        summary.succeeded,
        backend.backend_id(),
        summary.skipped,
        summary.failed
    );
    for f in &summary.failures {
        eprintln!("  {}: {}", f.report_id, f.message);
    }
    if summary.failed > 0 {
        return Err(CliError::Data(format!("{} reports failed; rerun with --resume to retry them", summary.failed)));
    }
    Ok(())
}

pub(crate) fn score(a: ScoreArgs) -> Result<(), CliError> {
    require_file(&a.pairs, "--pairs")?;
    require_parent(&a.out, "--out")?;
    let pairs = read_pairs(&a.pairs).map_err(CliError::data)?;
    let rows = score_pairs(&pairs).map_err(CliError::data)?;
    write_scores_csv(&a.out, &rows).map_err(CliError::data)?;
    eprintln!("scored {} pairs into {} rows", pairs.len(), rows.len());
    Ok(())
}

pub(crate) fn analyze(a: AnalyzeArgs) -> Result<(), CliError> {
    require_file(&a.scores, "--scores")?;
    if let Some(p) = &a.grading_events {
        require_file(p, "--grading-events")?;
    }
    require_parent(&a.out, "--out")?;

    let rows = read_scores_csv(&a.scores).map_err(CliError::data)?;
    let grading = match &a.grading_events {
        None => None,
        Some(path) => {
            let replay = replay_log(path).map_err(CliError::data)?;
            if let Some(c) = &replay.corruption {
                if !c.is_last_line {
                    return Err(CliError::Data(format!("{}:{}: {}", path.display(), c.line, c.message)));
                }
                eprintln!("warning: ignoring torn final line {} of {}", c.line, path.display());
            }
            let studies = complete_study_results(&replay.state).map_err(CliError::data)?;
            if studies.is_empty() {
                eprintln!("warning: {} holds no complete study", path.display());
            }
            Some(GradingSection { studies })
        }
    };
    let bundle = build_bundle(&rows, grading).map_err(CliError::data)?;
    write_bundle(&a.out, &bundle).map_err(CliError::data)?;
    eprintln!("analyzed {} reports", bundle.n_reports);
    Ok(())
}

fn parse_figures(spec: &str) -> Result<Option<Vec<Figure>>, CliError> {
    if spec == "auto" {
        return Ok(None);
    }
    spec.split(',').map(|s| s.trim().parse::<Figure>().map_err(CliError::Usage)).collect::<Result<Vec<_>, _>>().map(Some)
}

pub(crate) fn report(a: ReportArgs) -> Result<(), CliError> {
    require_file(&a.analysis, "--analysis")?;
    let requested = parse_figures(&a.figures)?;
    let bundle = read_bundle(&a.analysis).map_err(CliError::data)?;
    let figures = match requested {
        Some(f) => f,
        None => {
            let f = available_figures(&bundle);
            for missing in Figure::ALL.iter().filter(|x| !f.contains(x)) {
                if let Err(e) = missing.check(&bundle) {
                    eprintln!("skipping {missing}: {e}");
                }
            }
            f
        }
    };
    let manifest = render_outputs(&bundle, &a.out_dir, &figures).map_err(CliError::data)?;
    eprintln!("wrote {} files and {}", manifest.files.len(), a.out_dir.join(MANIFEST_FILE).display());
    Ok(())
}
