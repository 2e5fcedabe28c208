//! The protocol file format: human-readable structured text with a
//! version key, unit declaration, segment list, kick list, predicted
//! final state, and a provenance block recording the design formulas.
//! Parsing a written file reproduces the `ProtocolSpec` field by field.

use std::collections::BTreeMap;

use trapctl_core::ermakov::{FrequencySchedule, ScalingState, SegmentKind, SegmentLaw};
use trapctl_core::protocol::{ProtocolFamily, ProtocolSpec};

use crate::format::{float, parse_float};
use crate::CliError;

pub const HEADER: &str = "trapctl-protocol v1";

pub fn to_text(spec: &ProtocolSpec) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    out.push_str(&format!("family: {}\n", spec.family));
    out.push_str(&format!("omega0: {}\n", float(spec.schedule.omega0)));
    out.push_str(&format!(
        "omega_final_sq: {}\n",
        float(spec.schedule.omega_final_sq)
    ));
    out.push_str(&format!("predicted_b: {}\n", float(spec.predicted_final.b)));
    out.push_str(&format!(
        "predicted_b_dot: {}\n",
        float(spec.predicted_final.b_dot)
    ));
    out.push_str(&format!("predicted_t: {}\n", float(spec.predicted_final.t)));
    for (key, value) in &spec.design_params {
        out.push_str(&format!("param {key}: {}\n", float(*value)));
    }
    for seg in &spec.schedule.segments {
        match seg.kind {
            SegmentKind::Constant { omega_sq } => {
                out.push_str(&format!(
                    "segment constant: omega_sq={} duration={}\n",
                    float(omega_sq),
                    float(seg.duration)
                ));
            }
            SegmentKind::PolynomialSta {
                b_target,
                exponent,
                t_k,
            } => {
                out.push_str(&format!(
                    "segment polynomial_sta: b_target={} exponent={exponent} t_k={} duration={}\n",
                    float(b_target),
                    float(t_k),
                    float(seg.duration)
                ));
            }
            SegmentKind::ConstantMu { freq_ratio, t_f } => {
                out.push_str(&format!(
                    "segment constant_mu: freq_ratio={} t_f={} duration={}\n",
                    float(freq_ratio),
                    float(t_f),
                    float(seg.duration)
                ));
            }
        }
    }
    for &(t, kick) in &spec.schedule.kicks {
        out.push_str(&format!(
            "kick: t={} kappa={}\n",
            float(t),
            float(kick.kappa)
        ));
    }
    for line in &spec.provenance {
        out.push_str(&format!("provenance: {line}\n"));
    }
    out.push_str("end\n");
    out
}

fn bad(line_no: usize, line: &str, what: &str) -> CliError {
    CliError::Input(format!("protocol file line {line_no}: {what}: `{line}`"))
}

fn field<'a>(pairs: &'a [(&str, &str)], key: &str) -> Option<&'a str> {
    pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

/// Split "k1=v1 k2=v2 ..." into pairs.
fn kv_pairs(s: &str) -> Vec<(&str, &str)> {
    s.split_whitespace()
        .filter_map(|tok| tok.split_once('='))
        .collect()
}

pub fn from_text(text: &str) -> Result<ProtocolSpec, CliError> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| CliError::Input("protocol file is empty".into()))?;
    if first.trim() != HEADER {
        return Err(CliError::Input(format!(
            "unrecognized protocol header `{first}` (expected `{HEADER}`)"
        )));
    }

    let mut family: Option<ProtocolFamily> = None;
    let mut omega0: Option<f64> = None;
    let mut omega_final_sq: Option<f64> = None;
    let mut predicted_b: Option<f64> = None;
    let mut predicted_b_dot: Option<f64> = None;
    let mut predicted_t: Option<f64> = None;
    let mut design_params: BTreeMap<String, f64> = BTreeMap::new();
    let mut segments: Vec<SegmentLaw> = Vec::new();
    let mut kicks: Vec<(f64, f64)> = Vec::new();
    let mut provenance: Vec<String> = Vec::new();
    let mut saw_end = false;

    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "end" {
            saw_end = true;
            break;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| bad(line_no, line, "expected `key: value`"))?;
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| -> Result<f64, CliError> {
            parse_float(v).ok_or_else(|| bad(line_no, line, "malformed number"))
        };
        match key {
            "family" => {
                family = Some(
                    value
                        .parse()
                        .map_err(|e: String| bad(line_no, line, &e))?,
                );
            }
            "omega0" => omega0 = Some(num(value)?),
            "omega_final_sq" => omega_final_sq = Some(num(value)?),
            "predicted_b" => predicted_b = Some(num(value)?),
            "predicted_b_dot" => predicted_b_dot = Some(num(value)?),
            "predicted_t" => predicted_t = Some(num(value)?),
            "segment constant" => {
                let pairs = kv_pairs(value);
                let omega_sq = num(field(&pairs, "omega_sq")
                    .ok_or_else(|| bad(line_no, line, "missing omega_sq"))?)?;
                let duration = num(field(&pairs, "duration")
                    .ok_or_else(|| bad(line_no, line, "missing duration"))?)?;
                segments.push(SegmentLaw::constant(omega_sq, duration));
            }
            "segment polynomial_sta" => {
                let pairs = kv_pairs(value);
                let b_target = num(field(&pairs, "b_target")
                    .ok_or_else(|| bad(line_no, line, "missing b_target"))?)?;
                let exponent: u32 = field(&pairs, "exponent")
                    .ok_or_else(|| bad(line_no, line, "missing exponent"))?
                    .parse()
                    .map_err(|_| bad(line_no, line, "malformed exponent"))?;
                let t_k = num(field(&pairs, "t_k")
                    .ok_or_else(|| bad(line_no, line, "missing t_k"))?)?;
                let duration = num(field(&pairs, "duration")
                    .ok_or_else(|| bad(line_no, line, "missing duration"))?)?;
                segments.push(SegmentLaw {
                    duration,
                    kind: SegmentKind::PolynomialSta {
                        b_target,
                        exponent,
                        t_k,
                    },
                });
            }
            "segment constant_mu" => {
                let pairs = kv_pairs(value);
                let freq_ratio = num(field(&pairs, "freq_ratio")
                    .ok_or_else(|| bad(line_no, line, "missing freq_ratio"))?)?;
                let t_f = num(field(&pairs, "t_f")
                    .ok_or_else(|| bad(line_no, line, "missing t_f"))?)?;
                let duration = num(field(&pairs, "duration")
                    .ok_or_else(|| bad(line_no, line, "missing duration"))?)?;
                segments.push(SegmentLaw {
                    duration,
                    kind: SegmentKind::ConstantMu { freq_ratio, t_f },
                });
            }
            "kick" => {
                let pairs = kv_pairs(value);
                let t = num(field(&pairs, "t")
                    .ok_or_else(|| bad(line_no, line, "missing t"))?)?;
                let kappa = num(field(&pairs, "kappa")
                    .ok_or_else(|| bad(line_no, line, "missing kappa"))?)?;
                kicks.push((t, kappa));
            }
            "provenance" => provenance.push(value.to_string()),
            _ if key.starts_with("param ") => {
                let name = key.trim_start_matches("param ").trim();
                if name.is_empty() {
                    return Err(bad(line_no, line, "empty parameter name"));
                }
                design_params.insert(name.to_string(), num(value)?);
            }
            _ => return Err(bad(line_no, line, "unknown key")),
        }
    }

    if !saw_end {
        return Err(CliError::Input(
            "protocol file is truncated: missing `end` line".into(),
        ));
    }

    let missing = |what: &str| CliError::Input(format!("protocol file missing `{what}`"));
    let mut schedule = FrequencySchedule::new(
        omega0.ok_or_else(|| missing("omega0"))?,
        omega_final_sq.ok_or_else(|| missing("omega_final_sq"))?,
    );
    schedule.segments = segments;
    for (t, kappa) in kicks {
        schedule.push_kick(t, kappa);
    }
    schedule.validate()?;

    Ok(ProtocolSpec {
        family: family.ok_or_else(|| missing("family"))?,
        schedule,
        design_params,
        predicted_final: ScalingState {
            b: predicted_b.ok_or_else(|| missing("predicted_b"))?,
            b_dot: predicted_b_dot.ok_or_else(|| missing("predicted_b_dot"))?,
            t: predicted_t.ok_or_else(|| missing("predicted_t"))?,
        },
        provenance,
    })
}
