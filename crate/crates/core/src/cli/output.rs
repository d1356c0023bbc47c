use std::io::Write;

use serde::Serialize;

use crate::analyze::{PhysicalProfile, PhysicalScaling, SuiteOutcome};
use crate::classify::ClassificationRecord;
use crate::model::OdeState;
use crate::shoot::GroundStateSummary;

use super::{Format, RunConfig};

pub const VERSION: &str = concat!("choquard ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum Artifact {
    Solve {
        summary: GroundStateSummary,
        trajectory: Vec<OdeState>,
    },
    Classify {
        record: ClassificationRecord,
    },
    Sweep {
        #[serde(serialize_with = "records_json")]
        records: Vec<Result<ClassificationRecord, (f64, String)>>,
    },
    Verify {
        outcome: SuiteOutcome,
    },
    Transform {
        summary: GroundStateSummary,
        scaling: PhysicalScaling,
        profile: PhysicalProfile,
    },
}

impl Artifact {
    fn command(&self) -> &'static str {
        match self {
            Artifact::Solve { .. } => "solve",
            Artifact::Classify { .. } => "classify",
            Artifact::Sweep { .. } => "sweep",
            Artifact::Verify { .. } => "verify",
            Artifact::Transform { .. } => "transform",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Artifact::Sweep { .. } | Artifact::Transform { .. } => Format::Csv,
            Artifact::Solve { .. } | Artifact::Classify { .. } | Artifact::Verify { .. } => Format::Json,
        }
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum RecordJson<'a> {
    Ok(&'a ClassificationRecord),
    Err { u0: f64, error: &'a str },
}

fn records_json<S: serde::Serializer>(
    records: &[Result<ClassificationRecord, (f64, String)>],
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_seq(records.iter().map(|r| match r {
        Ok(c) => RecordJson::Ok(c),
        Err((u0, e)) => RecordJson::Err { u0: *u0, error: e },
    }))
}

#[derive(Serialize)]
struct Envelope<'a> {
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: &'a Artifact,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn summary_lines(s: &GroundStateSummary) -> Vec<(String, String)> {
    vec![
        ("u0_star".into(), num(s.u0_star)),
        ("bracket_lo".into(), num(s.bracket_lo)),
        ("bracket_hi".into(), num(s.bracket_hi)),
        ("bracket_width".into(), num(s.bracket_width)),
        ("iterations".into(), s.iterations.to_string()),
        ("tracking_radius".into(), num(s.tracking_radius)),
        (
            "v_inf".into(),
            s.v_inf.map(num).unwrap_or_else(|| if s.far_field.is_some() { "inf".into() } else { String::new() }),
        ),
        ("mass".into(), opt(s.far_field.map(|f| f.mass()))),
        ("decay_k".into(), opt(s.decay_k)),
        ("z_limit".into(), opt(s.decay.map(|d| d.z_limit))),
        ("tail_note".into(), s.tail_note.clone().unwrap_or_default()),
    ]
}

fn csv_body(artifact: &Artifact) -> csv::Result<(Vec<(String, String)>, Vec<u8>)> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut meta = Vec::new();
    match artifact {
        Artifact::Solve { summary, trajectory } => {
            meta = summary_lines(summary);
            w.write_record(["r", "u", "up", "v", "vp"])?;
            for s in trajectory {
                w.write_record([num(s.r), num(s.u), num(s.up), num(s.v), num(s.vp)])?;
            }
        }
        Artifact::Classify { record: c } => {
            if let Some(note) = &c.note {
                meta.push(("note".into(), note.clone()));
            }
            w.write_record(["u0", "tag", "r_event", "r_explored", "v_event"])?;
            w.write_record([num(c.u0), c.tag.to_string(), opt(c.r_event), num(c.r_explored), opt(c.v_event)])?;
        }
        Artifact::Sweep { records } => {
            w.write_record(["u0", "tag", "r_event"])?;
            for r in records {
                match r {
                    Ok(c) => w.write_record([num(c.u0), c.tag.to_string(), opt(c.r_event)])?,
                    Err((u0, e)) => {
                        meta.push((format!("error at u0 = {}", num(*u0)), e.clone()));
                        w.write_record([num(*u0), "Error".into(), String::new()])?
                    }
                }
            }
        }
        Artifact::Verify { outcome } => {
            if let Some(g) = &outcome.ground {
                meta = summary_lines(g);
            }
            w.write_record(["name", "status", "worst_violation", "location", "tolerance", "details"])?;
            for e in &outcome.entries {
                let status =
                    serde_json::to_value(e.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                match &e.report {
                    Some(r) => w.write_record([
                        r.name.clone(),
                        status,
                        num(r.worst_violation),
                        opt(r.location),
                        num(r.tolerance),
                        r.details.clone(),
                    ])?,
                    None => w.write_record([
                        e.name.clone(),
                        status,
                        String::new(),
                        String::new(),
                        String::new(),
                        e.note.clone().unwrap_or_default(),
                    ])?,
                }
            }
        }
        Artifact::Transform { summary, scaling, profile } => {
            meta = summary_lines(summary);
            for (k, v) in [
                ("lambda", scaling.lambda),
                ("gamma", scaling.gamma),
                ("sigma", scaling.sigma),
                ("a_scale", scaling.a_scale),
                ("b_scale", scaling.b_scale),
                ("v_lambda_0", scaling.v_lambda_0),
            ] {
                meta.push((k.into(), num(v)));
            }
            w.write_record(["r", "u_lambda", "v_lambda"])?;
            for i in 0..profile.r.len() {
                w.write_record([num(profile.r[i]), num(profile.u[i]), num(profile.v[i])])?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok((meta, bytes))
}

/// Renders the artifact in the configured format.
pub fn render(cfg: &RunConfig, artifact: &Artifact) -> std::io::Result<Vec<u8>> {
    match cfg.format.unwrap_or_else(|| artifact.default_format()) {
        Format::Json => {
            let env = Envelope { version: VERSION, command: artifact.command(), config: cfg, body: artifact };
            let mut out = serde_json::to_vec_pretty(&env).map_err(std::io::Error::other)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let (meta, body) = csv_body(artifact).map_err(std::io::Error::other)?;
            let mut out = Vec::new();
            writeln!(out, "# {VERSION}")?;
            writeln!(out, "# command = {}", artifact.command())?;
            for line in cfg.to_key_values().lines() {
                writeln!(out, "# {line}")?;
            }
            for (k, v) in meta {
                writeln!(out, "# {k} = {}", v.replace('\n', " "))?;
            }
            out.extend(body);
            Ok(out)
        }
    }
}

pub fn write(cfg: &RunConfig, artifact: &Artifact) -> std::io::Result<()> {
    let bytes = render(cfg, artifact)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, bytes),
        None => std::io::stdout().lock().write_all(&bytes),
    }
}
