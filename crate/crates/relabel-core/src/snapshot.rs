//! Text snapshot of a [`LabelStore`].
//!
//! The container is line oriented and self-describing:
//!
//! ```text
//! format_version 1
//! k 4
//! step 2
//! records 3
//! <sample_id> <stored_label> <eval_count> <vote_counts> <posterior> <last_prediction>
//! ...
//! ```
//!
//! `vote_counts` and `posterior` are comma-joined; posterior floats are
//! written with round-trip precision so `restore(snapshot(s)) == s`
//! bit-exactly. `last_prediction` is a class index or `-` when the sample
//! has never been evaluated. Record lines appear in ascending id order.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::bayes;
use crate::error::{Error, Result};
use crate::store::{LabelStore, PosteriorRecord};
use crate::types::{ClassId, SampleId};

pub const FORMAT_VERSION: u64 = 1;

/// Serialize a store to its text form.
pub fn snapshot(store: &LabelStore) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format_version {FORMAT_VERSION}");
    let _ = writeln!(out, "k {}", store.k());
    let _ = writeln!(out, "step {}", store.step());
    let _ = writeln!(out, "records {}", store.len());
    for (id, rec) in store.records() {
        let _ = write!(out, "{id} {} {} ", rec.stored_label, rec.eval_count);
        push_joined_ints(&mut out, &rec.vote_counts);
        out.push(' ');
        push_joined_floats(&mut out, &rec.posterior);
        match rec.last_prediction {
            Some(c) => {
                let _ = writeln!(out, " {c}");
            }
            None => out.push_str(" -\n"),
        }
    }
    out
}

fn push_joined_ints(out: &mut String, xs: &[u64]) {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{x}");
    }
}

fn push_joined_floats(out: &mut String, xs: &[f64]) {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{x}");
    }
}

/// Parse a snapshot back into a store.
pub fn restore(text: &str) -> Result<LabelStore> {
    let mut lines = text.lines();
    let version = header_value(lines.next(), "format_version")?;
    if version != FORMAT_VERSION {
        return Err(Error::SnapshotVersion { found: version });
    }
    let k = header_value(lines.next(), "k")? as usize;
    let step = header_value(lines.next(), "step")?;
    let n = header_value(lines.next(), "records")? as usize;
    if k < 2 {
        return Err(Error::InvalidClassCount(k));
    }

    let mut records = BTreeMap::new();
    for _ in 0..n {
        let line = lines.next().ok_or(Error::SnapshotTruncated)?;
        let (id, rec) = parse_record(line, k)?;
        if records.insert(id.clone(), rec).is_some() {
            return Err(Error::DuplicateSample(id.to_string()));
        }
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(Error::SnapshotFormat("trailing data after records".into()));
    }
    Ok(LabelStore::from_parts(k, step, records))
}

fn header_value(line: Option<&str>, key: &str) -> Result<u64> {
    let line = line.ok_or(Error::SnapshotTruncated)?;
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(found), Some(value), None) if found == key => value
            .parse()
            .map_err(|_| Error::SnapshotFormat(alloc::format!("bad value for {key}: {value}"))),
        _ => Err(Error::SnapshotFormat(alloc::format!(
            "expected `{key} <value>`, got {line:?}"
        ))),
    }
}

fn parse_record(line: &str, k: usize) -> Result<(SampleId, PosteriorRecord)> {
    let mut parts = line.split_whitespace();
    let mut next = |what: &str| {
        parts
            .next()
            .ok_or_else(|| Error::SnapshotFormat(alloc::format!("record missing {what}")))
    };
    let id = SampleId::new(next("sample_id")?)?;
    let stored: usize = parse_field(next("stored_label")?, "stored_label")?;
    let eval_count: u64 = parse_field(next("eval_count")?, "eval_count")?;
    let votes_raw = next("vote_counts")?;
    let posterior_raw = next("posterior")?;
    let last_raw = next("last_prediction")?;
    if parts.next().is_some() {
        return Err(Error::SnapshotFormat(alloc::format!(
            "record for {id} has extra fields"
        )));
    }

    if stored >= k {
        return Err(Error::ClassOutOfRange { class: stored, k });
    }
    let vote_counts: Vec<u64> = split_parse(votes_raw, "vote_counts")?;
    let posterior: Vec<f64> = split_parse(posterior_raw, "posterior")?;
    if vote_counts.len() != k || posterior.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: if vote_counts.len() != k {
                vote_counts.len()
            } else {
                posterior.len()
            },
        });
    }
    if vote_counts.iter().sum::<u64>() != eval_count {
        return Err(Error::SnapshotFormat(alloc::format!(
            "vote counts of {id} do not sum to eval_count"
        )));
    }
    let last_prediction = match last_raw {
        "-" => None,
        s => {
            let c: usize = parse_field(s, "last_prediction")?;
            if c >= k {
                return Err(Error::ClassOutOfRange { class: c, k });
            }
            Some(ClassId(c))
        }
    };
    let entropy = bayes::entropy(&posterior);
    Ok((
        id,
        PosteriorRecord {
            posterior,
            stored_label: ClassId(stored),
            entropy,
            last_prediction,
            vote_counts,
            eval_count,
        },
    ))
}

fn parse_field<T: core::str::FromStr>(raw: &str, what: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::SnapshotFormat(alloc::format!("bad {what}: {raw:?}")))
}

fn split_parse<T: core::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>> {
    raw.split(',').map(|s| parse_field(s, what)).collect()
}
