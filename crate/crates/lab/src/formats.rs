//! Text formats for traces, oracle scripts, relocation maps and projection
//! reports.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use pglb_core::analyzer::{AnalysisError, MidResult};
use pglb_core::projector::{ProjectionReport, RelocationMap};
use pglb_core::vm::{Status, Trace, TraceEvent};
use pglb_core::Instruction;

pub fn parse_status(s: &str) -> Result<Status> {
    Ok(match s {
        "Terminated" => Status::Terminated,
        "Deadlocked" => Status::Deadlocked,
        "StepLimit" => Status::StepLimit,
        _ => bail!("unknown status {s:?}"),
    })
}

fn reply_char(r: bool) -> char {
    if r {
        'T'
    } else {
        'F'
    }
}

/// One line per event, `<position> <instruction> [reply=T|F]`, then
/// `status=<status>`.
pub fn render_trace(t: &Trace) -> String {
    let mut out = String::new();
    for e in &t.events {
        let _ = write!(out, "{} {}", e.position, e.instruction);
        if let Some(r) = e.reply {
            let _ = write!(out, " reply={}", reply_char(r));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "status={}", t.status);
    out
}

pub fn parse_trace(text: &str) -> Result<Trace> {
    let mut events = Vec::new();
    let mut status = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let at = || format!("trace line {}", i + 1);
        if status.is_some() {
            bail!("{}: event after the status line", at());
        }
        if let Some(s) = line.strip_prefix("status=") {
            status = Some(parse_status(s).with_context(at)?);
            continue;
        }
        let (position, rest) = line
            .split_once(' ')
            .with_context(|| format!("{}: expected an event", at()))?;
        let position: usize = position.parse().with_context(|| format!("{}: bad position", at()))?;
        let (instruction, reply) = match rest.rsplit_once(" reply=") {
            Some((u, "T")) => (u, Some(true)),
            Some((u, "F")) => (u, Some(false)),
            Some(_) => bail!("{}: reply must be T or F", at()),
            None => (rest, None),
        };
        let instruction: Instruction = instruction.trim().parse().with_context(at)?;
        events.push(TraceEvent {
            position,
            instruction,
            reply,
        });
    }
    Ok(Trace {
        events,
        status: status.context("trace has no status line")?,
    })
}

/// One `T` or `F` per line; blank lines and `//` comments are skipped.
pub fn parse_oracle_script(text: &str) -> Result<Vec<bool>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, l)| {
            let l = l.split("//").next().unwrap_or("").trim();
            (!l.is_empty()).then_some((i, l))
        })
        .map(|(i, l)| match l {
            "T" => Ok(true),
            "F" => Ok(false),
            _ => bail!("oracle script line {}: expected T or F, got {l:?}", i + 1),
        })
        .collect()
}

/// CSV with header `old_key,new_start,new_len`.
pub fn render_map(map: &RelocationMap) -> String {
    let mut out = String::from("old_key,new_start,new_len\n");
    for (key, block) in map.entries() {
        let _ = writeln!(out, "{key},{},{}", block.start, block.len);
    }
    out
}

/// Rows of a map CSV as `(key, start, len)`.
pub fn parse_map(text: &str) -> Result<Vec<(String, usize, usize)>> {
    let mut lines = text.lines();
    if lines.next() != Some("old_key,new_start,new_len") {
        bail!("map CSV must start with the header old_key,new_start,new_len");
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut fields = l.split(',');
            let (Some(k), Some(s), Some(n), None) = (fields.next(), fields.next(), fields.next(), fields.next()) else {
                bail!("map row {l:?} does not have three fields");
            };
            Ok((k.to_string(), s.parse()?, n.parse()?))
        })
        .collect()
}

fn mid_text(m: &Result<MidResult, AnalysisError>) -> String {
    match m {
        Ok(r) => r.value.to_string(),
        Err(AnalysisError::StateLimitExceeded { .. }) => "state-limit".into(),
        Err(_) => "error".into(),
    }
}

/// Human-readable summary, a blank line, then `key=value` lines.
pub fn render_report(mode: &str, threaded: bool, r: &ProjectionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "projection: {mode}{}",
        if threaded { " + jump threading" } else { "" }
    );
    let _ = writeln!(out, "length: {} -> {}", r.length_before, r.length_after);
    let _ = writeln!(out, "MID: {} -> {}", mid_text(&r.mid_before), mid_text(&r.mid_after));
    if let Err(e) = &r.mid_after {
        let _ = writeln!(out, "output analysis failed: {e}");
    }
    let _ = writeln!(out, "blocks: {}", r.map.len());
    let _ = writeln!(out, "auxiliary instructions introduced: {}", r.aux_introduced.len());
    out.push('\n');
    let aux: Vec<String> = r.aux_introduced.iter().map(|b| b.to_string()).collect();
    let _ = writeln!(out, "mode={mode}");
    let _ = writeln!(out, "threaded={threaded}");
    let _ = writeln!(out, "length_before={}", r.length_before);
    let _ = writeln!(out, "length_after={}", r.length_after);
    let _ = writeln!(out, "mid_before={}", mid_text(&r.mid_before));
    let _ = writeln!(out, "mid_after={}", mid_text(&r.mid_after));
    let _ = writeln!(out, "blocks={}", r.map.len());
    let _ = writeln!(out, "aux_introduced={}", aux.join(","));
    out
}

/// The `key=value` block of a report.
pub fn report_values(text: &str) -> Vec<(String, String)> {
    let block = text.split_once("\n\n").map_or(text, |(_, b)| b);
    block
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use pglb_core::parse_program;
    use pglb_core::projector::dispatch_project;
    use pglb_core::vm::{run, ReplyOracle};
    use pglb_core::ToolParams;

    #[test]
    fn trace_round_trip() {
        let p = parse_program("bool1.set:T ; +bool1.get ; #2 ; ! ; f.m ; \\#2").unwrap();
        let t = run(&p, &ToolParams::new(1, 1), ReplyOracle::scripted(vec![true])).unwrap();
        let text = render_trace(&t);
        assert_eq!(
            text,
            "1 bool1.set:T reply=T\n2 +bool1.get reply=T\n3 #2\n5 f.m reply=T\n6 \\#2\n4 !\nstatus=Terminated\n"
        );
        assert_eq!(parse_trace(&text).unwrap(), t);
    }

    #[test]
    fn trace_errors() {
        assert!(parse_trace("1 !\n").is_err());
        assert!(parse_trace("1 f.m reply=X\nstatus=Deadlocked").is_err());
        assert!(parse_trace("status=Terminated\n1 !").is_err());
        assert!(parse_trace("status=Stuck").is_err());
    }

    #[test]
    fn oracle_scripts() {
        assert_eq!(
            parse_oracle_script("T\nF\n\n// x\nT\n").unwrap(),
            vec![true, false, true]
        );
        assert!(parse_oracle_script("T\nyes\n").is_err());
    }

    #[test]
    fn map_and_report() {
        let p = parse_program("set:1:1 ; i#1 ; ! ; !").unwrap();
        let r = dispatch_project(&p, &ToolParams::new(1, 1)).unwrap();
        let csv = render_map(&r.map);
        assert_eq!(csv, "old_key,new_start,new_len\n1,1,1\n2,2,3\n3,5,1\n4,6,1\n");
        assert_eq!(parse_map(&csv).unwrap()[1], ("2".to_string(), 2, 3));
        let report = render_report("dispatch", false, &r);
        let values = report_values(&report);
        assert!(values.contains(&("length_after".into(), "6".into())));
        assert!(values.contains(&("mid_before".into(), "0".into())));
        assert!(values.contains(&("aux_introduced".into(), "r1b0.get,r1b0.set:T".into())));
    }
}
