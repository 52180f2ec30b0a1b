//! TREC run and qrels files.
//!
//! Run lines are `qid Q0 sent_id rank score tag`, optionally followed by
//! `match=0|1`. Qrels lines are `qid 0 sent_id relevance`. Blank lines and
//! lines starting with `#` are ignored in both.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunLine {
    pub qid: String,
    pub sent_id: String,
    pub rank: usize,
    pub score: f64,
    pub tag: String,
    pub matched: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrelLine {
    pub qid: String,
    pub sent_id: String,
    pub relevance: i32,
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

fn content_lines(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, l)| match l {
        Err(e) => Some(Err(format_err(i + 1, e.to_string()))),
        Ok(l) => {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.to_string())))
            }
        }
    })
}

pub fn parse_run_line(line: &str, lineno: usize) -> Result<RunLine> {
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != 6 && f.len() != 7 {
        return Err(format_err(
            lineno,
            format!("expected 6 or 7 columns, found {}", f.len()),
        ));
    }
    let rank = f[3]
        .parse()
        .map_err(|_| format_err(lineno, format!("bad rank `{}`", f[3])))?;
    let score: f64 = f[4]
        .parse()
        .map_err(|_| format_err(lineno, format!("bad score `{}`", f[4])))?;
    if !score.is_finite() {
        return Err(format_err(lineno, "score is not finite"));
    }
    let matched = match f.get(6) {
        None => None,
        Some(&"match=1") => Some(true),
        Some(&"match=0") => Some(false),
        Some(other) => return Err(format_err(lineno, format!("bad match flag `{other}`"))),
    };
    Ok(RunLine {
        qid: f[0].to_string(),
        sent_id: f[2].to_string(),
        rank,
        score,
        tag: f[5].to_string(),
        matched,
    })
}

pub type Run = BTreeMap<String, Vec<RunLine>>;

/// Run lines grouped by query, each list ordered by rank (file order on
/// equal ranks). Duplicate sentence ids within a query are an error.
pub fn read_run(reader: impl BufRead) -> Result<Run> {
    let mut out: Run = BTreeMap::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for item in content_lines(reader) {
        let (n, line) = item?;
        let r = parse_run_line(&line, n)?;
        if !seen.insert((r.qid.clone(), r.sent_id.clone())) {
            return Err(format_err(
                n,
                format!(
                    "sentence `{}` listed twice for query `{}`",
                    r.sent_id, r.qid
                ),
            ));
        }
        out.entry(r.qid.clone()).or_default().push(r);
    }
    for list in out.values_mut() {
        list.sort_by_key(|r| r.rank);
    }
    Ok(out)
}

pub fn write_run_line(w: &mut impl Write, line: &RunLine) -> std::io::Result<()> {
    write!(
        w,
        "{} Q0 {} {} {} {}",
        line.qid, line.sent_id, line.rank, line.score, line.tag
    )?;
    match line.matched {
        Some(m) => writeln!(w, " match={}", u8::from(m)),
        None => writeln!(w),
    }
}

pub fn read_qrels(reader: impl BufRead) -> Result<Vec<QrelLine>> {
    let mut out = Vec::new();
    for item in content_lines(reader) {
        let (n, line) = item?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(format_err(
                n,
                format!("expected 4 columns, found {}", f.len()),
            ));
        }
        let relevance = f[3]
            .parse()
            .map_err(|_| format_err(n, format!("bad relevance `{}`", f[3])))?;
        out.push(QrelLine {
            qid: f[0].to_string(),
            sent_id: f[2].to_string(),
            relevance,
        });
    }
    Ok(out)
}

pub fn write_qrel_line(w: &mut impl Write, line: &QrelLine) -> std::io::Result<()> {
    writeln!(w, "{} 0 {} {}", line.qid, line.sent_id, line.relevance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_roundtrip_with_flags() {
        let lines = vec![
            RunLine {
                qid: "q1".into(),
                sent_id: "d#0".into(),
                rank: 1,
                score: 1.25,
                tag: "qbm25".into(),
                matched: Some(true),
            },
            RunLine {
                qid: "q1".into(),
                sent_id: "d#1".into(),
                rank: 2,
                score: 0.5,
                tag: "qbm25".into(),
                matched: None,
            },
        ];
        let mut buf = Vec::new();
        buf.extend_from_slice(b"# alpha=1\n");
        for l in &lines {
            write_run_line(&mut buf, l).unwrap();
        }
        let back = read_run(buf.as_slice()).unwrap();
        assert_eq!(back["q1"], lines);
    }

    #[test]
    fn sorted_by_rank() {
        let run = read_run("q 0 b 2 1 t\nq 0 a 1 2 t\n".as_bytes()).unwrap();
        assert_eq!(run["q"][0].sent_id, "a");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_run("q Q0 a 1 nan t\n".as_bytes()).is_err());
        assert!(read_run("q Q0 a 1 1 t\nq Q0 a 2 1 t\n".as_bytes()).is_err());
        assert!(read_run("q Q0 a 1 1 t match=2\n".as_bytes()).is_err());
        let err = read_qrels("q 0 a 1\nq 0 b\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }));
    }
}
