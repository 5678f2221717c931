//! Reported quantities (per-class serving delay, energy, training curves)
//! and the CSV files they are written to.
//!
//! Schemas:
//! - trace: `step,node_id,priority,t_s_s,distance_m,energy_J,revenue,clock_s`
//! - delay report: `class,count,mean_delay_s`, then a `total_energy_J` footer
//!   row whose value sits in the last column
//! - training curve: `episode,accumulated_revenue,total_energy_J,epsilon`,
//!   plus `accumulated_revenue_ma,total_energy_J_ma` when smoothing is on

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{EpisodeTrace, Scenario, MAX_PRIORITY};
use crate::error::{Error, Result};
use crate::learner::{CurvePoint, TrainingCurve};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassDelay {
    pub class: u8,
    pub count: usize,
    /// None when the scenario has no node of this class.
    pub mean_delay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayReport {
    /// Classes 1..=4 in order.
    pub classes: Vec<ClassDelay>,
    pub total_energy: f64,
}

impl DelayReport {
    pub fn class(&self, class: u8) -> Option<&ClassDelay> {
        self.classes.iter().find(|c| c.class == class)
    }
}

/// Mean serving delay per priority class, measured from episode start.
pub fn delay_report(trace: &EpisodeTrace, scenario: &Scenario) -> Result<DelayReport> {
    if !trace.is_complete() || trace.steps.len() != scenario.node_count() {
        return Err(Error::Contract(format!(
            "delay report needs a complete trace: {} of {} nodes served",
            trace.steps.len(),
            scenario.node_count()
        )));
    }
    let mut sums = [0.0f64; MAX_PRIORITY as usize];
    let mut counts = [0usize; MAX_PRIORITY as usize];
    for t in &trace.steps {
        let class = scenario.nodes()[t.action].priority as usize - 1;
        sums[class] += t.next_state.clock;
        counts[class] += 1;
    }
    let classes = (0..MAX_PRIORITY as usize)
        .map(|i| ClassDelay {
            class: i as u8 + 1,
            count: counts[i],
            mean_delay: (counts[i] > 0).then(|| sums[i] / counts[i] as f64),
        })
        .collect();
    Ok(DelayReport {
        classes,
        total_energy: trace.total_energy(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct TraceRow {
    pub step: usize,
    pub node_id: usize,
    pub priority: u8,
    pub t_s_s: f64,
    pub distance_m: f64,
    pub energy_J: f64,
    pub revenue: f64,
    pub clock_s: f64,
}

pub fn trace_rows(trace: &EpisodeTrace) -> Vec<TraceRow> {
    trace
        .steps
        .iter()
        .enumerate()
        .map(|(step, t)| TraceRow {
            step,
            node_id: t.action,
            priority: t.priority,
            t_s_s: t.t_s,
            distance_m: t.distance,
            energy_J: t.energy,
            revenue: t.revenue,
            clock_s: t.next_state.clock,
        })
        .collect()
}

pub fn write_trace_csv<W: Write>(trace: &EpisodeTrace, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in trace_rows(trace) {
        w.serialize(row)?;
    }
    if trace.steps.is_empty() {
        w.write_record([
            "step",
            "node_id",
            "priority",
            "t_s_s",
            "distance_m",
            "energy_J",
            "revenue",
            "clock_s",
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> csv::Result<Vec<TraceRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn write_delay_report_csv<W: Write>(report: &DelayReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["class", "count", "mean_delay_s"])?;
    for c in &report.classes {
        let mean = c.mean_delay.map(|m| m.to_string()).unwrap_or_default();
        w.write_record([c.class.to_string(), c.count.to_string(), mean])?;
    }
    w.write_record([
        "total_energy_J".to_string(),
        String::new(),
        report.total_energy.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct CurveRow {
    pub episode: usize,
    pub accumulated_revenue: f64,
    pub total_energy_J: f64,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accumulated_revenue_ma: Option<Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_energy_J_ma: Option<Option<f64>>,
}

/// Trailing mean over full windows; the first `window - 1` entries are None.
pub fn moving_average(values: &[f64], window: usize) -> Vec<Option<f64>> {
    assert!(window >= 1, "window must be at least 1");
    let mut out = Vec::with_capacity(values.len());
    for i in 0..values.len() {
        if i + 1 < window {
            out.push(None);
        } else {
            let sum: f64 = values[i + 1 - window..=i].iter().sum();
            out.push(Some(sum / window as f64));
        }
    }
    out
}

pub fn curve_rows(curve: &TrainingCurve, smoothing: Option<usize>) -> Vec<CurveRow> {
    let (rev_ma, energy_ma) = match smoothing {
        Some(w) => {
            let rev: Vec<f64> = curve.points.iter().map(|p| p.accumulated_revenue).collect();
            let en: Vec<f64> = curve.points.iter().map(|p| p.total_energy).collect();
            (Some(moving_average(&rev, w)), Some(moving_average(&en, w)))
        }
        None => (None, None),
    };
    curve
        .points
        .iter()
        .enumerate()
        .map(|(i, p): (usize, &CurvePoint)| CurveRow {
            episode: p.episode,
            accumulated_revenue: p.accumulated_revenue,
            total_energy_J: p.total_energy,
            epsilon: p.epsilon,
            accumulated_revenue_ma: rev_ma.as_ref().map(|v| v[i]),
            total_energy_J_ma: energy_ma.as_ref().map(|v| v[i]),
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(
    curve: &TrainingCurve,
    smoothing: Option<usize>,
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let rows = curve_rows(curve, smoothing);
    if rows.is_empty() {
        let mut header = vec![
            "episode",
            "accumulated_revenue",
            "total_energy_J",
            "epsilon",
        ];
        if smoothing.is_some() {
            header.extend(["accumulated_revenue_ma", "total_energy_J_ma"]);
        }
        w.write_record(header)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve_csv<R: Read>(input: R) -> csv::Result<Vec<CurveRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

fn write_file(path: &Path, f: impl FnOnce(std::fs::File) -> csv::Result<()>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f(file).map_err(|e| Error::csv(path, e))
}

pub fn training_curve_csv(
    curve: &TrainingCurve,
    smoothing: Option<usize>,
    path: &Path,
) -> Result<()> {
    write_file(path, |f| write_curve_csv(curve, smoothing, f))
}

pub fn trace_csv(trace: &EpisodeTrace, path: &Path) -> Result<()> {
    write_file(path, |f| write_trace_csv(trace, f))
}

pub fn delay_report_csv(report: &DelayReport, path: &Path) -> Result<()> {
    write_file(path, |f| write_delay_report_csv(report, f))
}
