//! Training-time metrics and effort-saved reports.
//!
//! Minutes are the canonical unit. Percentages are rounded half-up to one
//! decimal place. Objectives are judged on the arithmetic mean of the
//! per-installation savings: at least 30% less training time and at least 25%
//! less task time.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::session::{EventKind, ModuleId, SessionEvent};

pub const TRAINING_OBJECTIVE_PCT: f64 = 30.0;
pub const TASK_OBJECTIVE_PCT: f64 = 25.0;
/// Expected percentages further than this from the computed value are
/// reported as discrepancies.
pub const DISCREPANCY_TOLERANCE_PCT: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("baseline must be positive")]
    NonPositiveBaseline,
    #[error("new time must be non-negative")]
    NegativeMinutes,
    #[error("malformed session log: {0}")]
    MalformedLog(String),
    #[error("installation names differ: {0}")]
    NameMismatch(String),
    #[error("cannot read duration {0:?}")]
    BadDuration(String),
}

fn floor(x: f64) -> f64 {
    let t = x as i64 as f64;
    if t > x {
        t - 1.0
    } else {
        t
    }
}

/// Rounds half-up to one decimal. The small bias absorbs binary
/// representation error on exact halves such as 12.25.
pub fn round_tenth(x: f64) -> f64 {
    floor(x * 10.0 + 0.5 + 1e-9) / 10.0
}

/// `100 × (baseline − new) / baseline`, rounded half-up to one decimal.
pub fn percent_saved(baseline_minutes: f64, new_minutes: f64) -> Result<f64, MetricsError> {
    if !(baseline_minutes > 0.0 && baseline_minutes.is_finite()) {
        return Err(MetricsError::NonPositiveBaseline);
    }
    if !(new_minutes >= 0.0 && new_minutes.is_finite()) {
        return Err(MetricsError::NegativeMinutes);
    }
    Ok(round_tenth(100.0 * (baseline_minutes - new_minutes) / baseline_minutes))
}

/// Reads durations written like `"2 hours 15 minutes"`, `"1 hour"`,
/// `"45 min"` or a bare number of minutes.
pub fn parse_duration_minutes(text: &str) -> Result<f64, MetricsError> {
    let bad = || MetricsError::BadDuration(text.to_string());
    let mut words = text.split_whitespace().peekable();
    let mut total = 0.0;
    let mut any = false;
    while let Some(word) = words.next() {
        let value: f64 = word.parse().map_err(|_| bad())?;
        let scale = match words.peek().map(|w| w.to_ascii_lowercase()) {
            Some(unit) if matches!(unit.as_str(), "h" | "hr" | "hrs" | "hour" | "hours") => 60.0,
            Some(unit) if matches!(unit.as_str(), "m" | "min" | "mins" | "minute" | "minutes") => 1.0,
            Some(_) => return Err(bad()),
            None if !any => 1.0,
            None => return Err(bad()),
        };
        if words.peek().is_some() {
            words.next();
        }
        total += value * scale;
        any = true;
    }
    if !any || total < 0.0 {
        return Err(bad());
    }
    Ok(total)
}

fn minutes<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }
    match Repr::deserialize(deserializer)? {
        Repr::Number(n) => Ok(n),
        Repr::Text(t) => parse_duration_minutes(&t).map_err(serde::de::Error::custom),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionMetrics {
    /// Time in Part Familiarization plus Procedure.
    pub training_minutes: f64,
    /// Time in Practice; absent until Practice is complete.
    pub task_minutes: Option<f64>,
    pub wrong_attempts: u32,
    pub replays: u32,
}

/// Sums enter-to-complete intervals per module. A re-entry that is never
/// completed adds nothing.
pub fn session_metrics(log: &[SessionEvent]) -> Result<SessionMetrics, MetricsError> {
    let mut open: BTreeMap<ModuleId, u64> = BTreeMap::new();
    let mut spent: BTreeMap<ModuleId, u64> = BTreeMap::new();
    let mut completed = BTreeSet::new();
    let mut wrong_attempts = 0;
    let mut replays = 0;
    let mut last = 0;
    let mut module_events = 0;

    for event in log {
        if event.timestamp_ms < last {
            return Err(MetricsError::MalformedLog(format!(
                "timestamp {} ms follows {} ms",
                event.timestamp_ms, last
            )));
        }
        last = event.timestamp_ms;
        match &event.kind {
            EventKind::ModuleEnter(m) => {
                module_events += 1;
                open.insert(*m, event.timestamp_ms);
            }
            EventKind::ModuleComplete(m) => {
                module_events += 1;
                let start = open
                    .remove(m)
                    .ok_or_else(|| MetricsError::MalformedLog(format!("{m} completed without being entered")))?;
                *spent.entry(*m).or_default() += event.timestamp_ms - start;
                completed.insert(*m);
            }
            EventKind::AttemptRejected(_) => wrong_attempts += 1,
            EventKind::StepReplayed(_) => replays += 1,
            _ => {}
        }
    }
    if module_events == 0 {
        return Err(MetricsError::MalformedLog("no module events".into()));
    }
    let minutes = |m: ModuleId| spent.get(&m).copied().unwrap_or(0) as f64 / 60_000.0;
    Ok(SessionMetrics {
        training_minutes: minutes(ModuleId::Familiarization) + minutes(ModuleId::Procedure),
        task_minutes: completed.contains(&ModuleId::Practice).then(|| minutes(ModuleId::Practice)),
        wrong_attempts,
        replays,
    })
}

/// Training and task time for one installation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstallationTimes {
    pub name: String,
    #[serde(deserialize_with = "minutes")]
    pub training_minutes: f64,
    #[serde(deserialize_with = "minutes")]
    pub task_minutes: f64,
}

impl InstallationTimes {
    pub fn new(name: impl Into<String>, training_minutes: f64, task_minutes: f64) -> Self {
        Self { name: name.into(), training_minutes, task_minutes }
    }
}

/// Published or otherwise expected savings to check a report against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedSavings {
    pub name: String,
    pub training_saved_pct: f64,
    pub task_saved_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectivenessRow {
    pub installation_name: String,
    pub baseline_training_minutes: f64,
    pub new_training_minutes: f64,
    pub baseline_task_minutes: f64,
    pub new_task_minutes: f64,
    pub training_saved_pct: f64,
    pub task_saved_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectivenessReport {
    pub rows: Vec<EffectivenessRow>,
    pub mean_training_saved_pct: f64,
    pub mean_task_saved_pct: f64,
    pub training_objective_met: bool,
    pub task_objective_met: bool,
    pub discrepancies: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Column {
    Training,
    Task,
}

impl Column {
    fn label(self) -> &'static str {
        match self {
            Column::Training => "training time saved",
            Column::Task => "task time saved",
        }
    }
}

/// Builds one row per baseline installation, in baseline order.
///
/// When `expected` is given, every expected value more than
/// [`DISCREPANCY_TOLERANCE_PCT`] from the computed one is reported. Notes are
/// grouped per column and (printed, computed) pair, so the same misprint on
/// several rows yields one note naming all of them.
pub fn effectiveness_report(
    baseline: &[InstallationTimes],
    observed: &[InstallationTimes],
    expected: &[ExpectedSavings],
) -> Result<EffectivenessReport, MetricsError> {
    check_names(baseline.iter().map(|b| b.name.as_str()), observed.iter().map(|o| o.name.as_str()), "observed")?;
    if !expected.is_empty() {
        check_names(baseline.iter().map(|b| b.name.as_str()), expected.iter().map(|e| e.name.as_str()), "expected")?;
    }

    let rows = baseline
        .iter()
        .map(|base| {
            let new = observed.iter().find(|o| o.name == base.name).expect("names checked");
            Ok(EffectivenessRow {
                installation_name: base.name.clone(),
                baseline_training_minutes: base.training_minutes,
                new_training_minutes: new.training_minutes,
                baseline_task_minutes: base.task_minutes,
                new_task_minutes: new.task_minutes,
                training_saved_pct: percent_saved(base.training_minutes, new.training_minutes)?,
                task_saved_pct: percent_saved(base.task_minutes, new.task_minutes)?,
            })
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;

    let mean = |f: fn(&EffectivenessRow) -> f64| {
        if rows.is_empty() {
            0.0
        } else {
            rows.iter().map(f).sum::<f64>() / rows.len() as f64
        }
    };
    let mean_training = mean(|r| r.training_saved_pct);
    let mean_task = mean(|r| r.task_saved_pct);

    // (column, printed, computed) -> installations
    let mut groups: Vec<(Column, f64, f64, Vec<&str>)> = Vec::new();
    for row in &rows {
        let Some(exp) = expected.iter().find(|e| e.name == row.installation_name) else { continue };
        for (column, printed, computed) in [
            (Column::Training, exp.training_saved_pct, row.training_saved_pct),
            (Column::Task, exp.task_saved_pct, row.task_saved_pct),
        ] {
            if (printed - computed).abs() <= DISCREPANCY_TOLERANCE_PCT {
                continue;
            }
            match groups.iter_mut().find(|g| g.0 == column && g.1 == printed && g.2 == computed) {
                Some(group) => group.3.push(&row.installation_name),
                None => groups.push((column, printed, computed, alloc::vec![row.installation_name.as_str()])),
            }
        }
    }
    let discrepancies = groups
        .into_iter()
        .map(|(column, printed, computed, names)| {
            format!(
                "{}: expected {:.1}% for {}, computed {:.1}%",
                column.label(),
                printed,
                names.join(", "),
                computed
            )
        })
        .collect();

    Ok(EffectivenessReport {
        rows,
        mean_training_saved_pct: round_tenth(mean_training),
        mean_task_saved_pct: round_tenth(mean_task),
        training_objective_met: !baseline.is_empty() && mean_training >= TRAINING_OBJECTIVE_PCT,
        task_objective_met: !baseline.is_empty() && mean_task >= TASK_OBJECTIVE_PCT,
        discrepancies,
    })
}

fn check_names<'a>(
    reference: impl Iterator<Item = &'a str>,
    other: impl Iterator<Item = &'a str>,
    what: &str,
) -> Result<(), MetricsError> {
    let reference: Vec<&str> = reference.collect();
    let other: Vec<&str> = other.collect();
    let ref_set: BTreeSet<&str> = reference.iter().copied().collect();
    let other_set: BTreeSet<&str> = other.iter().copied().collect();
    if ref_set.len() != reference.len() || other_set.len() != other.len() {
        return Err(MetricsError::NameMismatch("duplicate installation name".into()));
    }
    if ref_set != other_set {
        let missing: Vec<&str> = ref_set.difference(&other_set).copied().collect();
        let extra: Vec<&str> = other_set.difference(&ref_set).copied().collect();
        return Err(MetricsError::NameMismatch(format!(
            "missing from {what}: [{}]; only in {what}: [{}]",
            missing.join(", "),
            extra.join(", ")
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn percent_saved_examples() {
        assert_eq!(percent_saved(180.0, 120.0), Ok(33.3));
        assert_eq!(percent_saved(60.0, 60.0), Ok(0.0));
        assert_eq!(percent_saved(135.0, 90.0), Ok(33.3));
        assert_eq!(percent_saved(60.0, 45.0), Ok(25.0));
        assert_eq!(percent_saved(8.0, 7.0), Ok(12.5));
        assert_eq!(percent_saved(0.0, 1.0), Err(MetricsError::NonPositiveBaseline));
        assert_eq!(percent_saved(-5.0, 1.0), Err(MetricsError::NonPositiveBaseline));
        assert_eq!(percent_saved(5.0, -1.0), Err(MetricsError::NegativeMinutes));
    }

    #[test]
    fn rounding_is_half_up() {
        // 100 * 1/1600 = 0.0625 -> 0.1; 100 * 1/2000 = 0.05 -> 0.1; 100 * 1/2001 -> 0.0
        assert_eq!(percent_saved(1600.0, 1599.0), Ok(0.1));
        assert_eq!(percent_saved(2000.0, 1999.0), Ok(0.1));
        assert_eq!(percent_saved(2001.0, 2000.0), Ok(0.0));
        assert_eq!(percent_saved(100.0, 150.0), Ok(-50.0));
        assert_eq!(round_tenth(-0.04), 0.0);
        assert_eq!(round_tenth(-0.06), -0.1);
    }

    #[test]
    fn durations() {
        assert_eq!(parse_duration_minutes("2 hours 15 minutes"), Ok(135.0));
        assert_eq!(parse_duration_minutes("1 hours 30 minutes"), Ok(90.0));
        assert_eq!(parse_duration_minutes("4 hours 30 minutes"), Ok(270.0));
        assert_eq!(parse_duration_minutes("1 hour"), Ok(60.0));
        assert_eq!(parse_duration_minutes("45 min"), Ok(45.0));
        assert_eq!(parse_duration_minutes("20"), Ok(20.0));
        assert!(parse_duration_minutes("").is_err());
        assert!(parse_duration_minutes("two hours").is_err());
        assert!(parse_duration_minutes("3 fortnights").is_err());
        assert!(parse_duration_minutes("3 hours 4").is_err());
    }

    fn ev(t_min: u64, kind: EventKind) -> SessionEvent {
        SessionEvent::new(t_min * 60_000, kind)
    }

    #[test]
    fn session_metrics_sums_module_time() {
        use EventKind::*;
        use ModuleId::*;
        let log = vec![
            ev(0, ModuleEnter(Familiarization)),
            ev(40, ModuleComplete(Familiarization)),
            ev(40, ModuleEnter(Procedure)),
            ev(50, StepReplayed(0)),
            ev(120, ModuleComplete(Procedure)),
            ev(120, ModuleEnter(Practice)),
            ev(125, AttemptRejected("P2".into())),
            ev(130, AttemptRejected("P3".into())),
            ev(140, ModuleComplete(Practice)),
        ];
        let m = session_metrics(&log).unwrap();
        assert_eq!(m, SessionMetrics { training_minutes: 120.0, task_minutes: Some(20.0), wrong_attempts: 2, replays: 1 });

        let partial = session_metrics(&log[..7]).unwrap();
        assert_eq!(partial.task_minutes, None);
        assert_eq!(partial.training_minutes, 120.0);
    }

    #[test]
    fn session_metrics_rejects_bad_logs() {
        assert!(matches!(session_metrics(&[]), Err(MetricsError::MalformedLog(_))));
        let orphan = [ev(3, EventKind::ModuleComplete(ModuleId::Procedure))];
        assert!(matches!(session_metrics(&orphan), Err(MetricsError::MalformedLog(_))));
        let backwards = [ev(3, EventKind::ModuleEnter(ModuleId::Familiarization)), ev(2, EventKind::AlertAcknowledged)];
        assert!(matches!(session_metrics(&backwards), Err(MetricsError::MalformedLog(_))));
    }

    #[test]
    fn identical_inputs_meet_no_objective() {
        let data = vec![InstallationTimes::new("A", 60.0, 10.0), InstallationTimes::new("B", 30.0, 5.0)];
        let report = effectiveness_report(&data, &data, &[]).unwrap();
        assert!(report.rows.iter().all(|r| r.training_saved_pct == 0.0 && r.task_saved_pct == 0.0));
        assert!(!report.training_objective_met && !report.task_objective_met);
        assert!(report.discrepancies.is_empty());
    }

    #[test]
    fn names_must_match() {
        let a = vec![InstallationTimes::new("A", 60.0, 10.0)];
        let b = vec![InstallationTimes::new("B", 60.0, 10.0)];
        assert!(matches!(effectiveness_report(&a, &b, &[]), Err(MetricsError::NameMismatch(_))));
        let dup = vec![InstallationTimes::new("A", 60.0, 10.0), InstallationTimes::new("A", 60.0, 10.0)];
        assert!(matches!(effectiveness_report(&dup, &a, &[]), Err(MetricsError::NameMismatch(_))));
    }

    #[test]
    fn times_accept_duration_strings() {
        let t: InstallationTimes =
            serde_json::from_str(r#"{"name":"Hydraulic Reservoir","training_minutes":"4 hours 30 minutes","task_minutes":60}"#)
                .unwrap();
        assert_eq!(t, InstallationTimes::new("Hydraulic Reservoir", 270.0, 60.0));
    }

    proptest! {
        #[test]
        fn percent_saved_laws(base in 0.1f64..10_000.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assert_eq!(percent_saved(base, base).unwrap(), 0.0);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let p_lo = percent_saved(base, base * lo).unwrap();
            let p_hi = percent_saved(base, base * hi).unwrap();
            // Rounded output is non-increasing in new time.
            prop_assert!(p_lo >= p_hi);
            prop_assert!(p_lo <= 100.0);
            prop_assert_eq!(percent_saved(base, 0.0).unwrap(), 100.0);
            if hi > 0.0 {
                prop_assert!(percent_saved(base, base * hi * 0.999 + 1e-6).unwrap() <= 100.0);
            }
        }

        #[test]
        fn report_is_pure(rows in proptest::collection::vec((1.0f64..500.0, 1.0f64..500.0, 0.0f64..1.0, 0.0f64..1.0), 1..8)) {
            let base: Vec<_> = rows.iter().enumerate().map(|(i, r)| InstallationTimes::new(format!("I{i}"), r.0, r.1)).collect();
            let new: Vec<_> = rows.iter().enumerate().map(|(i, r)| InstallationTimes::new(format!("I{i}"), r.0 * r.2, r.1 * r.3)).collect();
            let a = effectiveness_report(&base, &new, &[]).unwrap();
            let b = effectiveness_report(&base, &new, &[]).unwrap();
            prop_assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
            for row in &a.rows {
                prop_assert!((row.training_saved_pct - percent_saved(row.baseline_training_minutes, row.new_training_minutes).unwrap()).abs() < 0.1);
            }
        }
    }
}
