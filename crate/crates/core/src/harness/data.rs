//! Two-column score files.
//!
//! The format is CSV with header `score,group`, one subject per row, and
//! `group` either `1` (scores `U`) or `0` (scores `V`). The canonical form
//! written by [`write_csv`] lists group 1 first, then group 0, each in
//! input order, with scores in shortest round-trip decimal form.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::auc::ScoreData;
use crate::error::{Error, Result};

pub fn parse_csv(input: impl Read) -> Result<ScoreData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers().map_err(|e| parse_error(1, e))?.clone();
    if headers.len() != 2 || &headers[0] != "score" || &headers[1] != "group" {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `score,group`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let (mut u, mut v) = (Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let score: f64 = record[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("score `{}` is not a number", &record[0]),
        })?;
        if !score.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("score `{}` is not finite", &record[0]),
            });
        }
        match &record[1] {
            "1" => u.push(score),
            "0" => v.push(score),
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("group `{other}` must be 0 or 1"),
                })
            }
        }
    }
    ScoreData::new(u, v)
}

pub fn read_data_file(path: impl AsRef<Path>) -> Result<ScoreData> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_csv(file)
}

/// Writes the canonical form of `data`.
pub fn write_csv(data: &ScoreData, mut out: impl Write) -> Result<()> {
    writeln!(out, "score,group")?;
    for x in data.u() {
        writeln!(out, "{x},1")?;
    }
    for x in data.v() {
        writeln!(out, "{x},0")?;
    }
    Ok(())
}

fn parse_error(line: usize, e: csv::Error) -> Error {
    Error::Parse {
        line,
        message: e.to_string(),
    }
}
