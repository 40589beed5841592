use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::Value;

use crate::{Failure, Format};

/// A command's result: the JSON document and its CSV rendering.
pub struct Report {
    pub json: Value,
    pub csv: String,
}

impl Report {
    pub fn new<T: serde::Serialize>(command: &str, body: &T, csv: String) -> Result<Self, Failure> {
        let mut json = serde_json::to_value(body).map_err(|e| Failure::Usage(format!("cannot serialize report: {e}")))?;
        if let Value::Object(map) = &mut json {
            map.insert("command".into(), Value::String(command.into()));
        }
        Ok(Self { json, csv })
    }
}

fn strip_wall_time(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("wall_time_secs");
            map.values_mut().for_each(strip_wall_time);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_wall_time),
        _ => {}
    }
}

pub fn emit(report: &Report, format: Format, timestamp: bool, path: Option<&Path>) -> Result<(), Failure> {
    let text = match format {
        Format::Csv => report.csv.clone(),
        Format::Json => {
            let mut json = report.json.clone();
            if timestamp {
                let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
                if let Value::Object(map) = &mut json {
                    map.insert("timestamp".into(), Value::from(secs));
                }
            } else {
                strip_wall_time(&mut json);
            }
            let mut s = serde_json::to_string_pretty(&json).map_err(|e| Failure::Usage(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(format!("cannot write to stdout: {e}"))),
    }
}
