//! Text formats for corpora and score tables.
//!
//! Corpus files are plain text, one routine per line, with an optional
//! `name:` prefix and `#` comments. Score tables are CSV with the fixed
//! header `dance,mean_score,std,energy_cm`.

use super::{DanceSequence, Error, ScoreEntry, ScoreTable};

/// Parses a corpus file body. Line numbers in errors are 1-based.
pub fn parse_corpus_str(text: &str) -> Result<Vec<DanceSequence>, Error> {
    let mut corpus = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (id, body) = match line.split_once(':') {
            Some((name, rest)) => (Some(name.trim().to_string()), rest),
            None => (None, line),
        };
        let seq = DanceSequence::parse(body).map_err(|e| Error::Format {
            file_kind: "corpus",
            line: lineno + 1,
            message: e.to_string(),
        })?;
        corpus.push(match id {
            Some(name) => seq.with_id(name),
            None => seq,
        });
    }
    if corpus.is_empty() {
        return Err(Error::Format {
            file_kind: "corpus",
            line: 0,
            message: "no sequences found".to_string(),
        });
    }
    Ok(corpus)
}

/// Parses a scores CSV body into the score table and the energy column.
pub fn parse_scores_csv(text: &str) -> Result<(ScoreTable, Vec<(String, f64)>), Error> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Format {
        file_kind: "scores",
        line: 0,
        message: "empty file".to_string(),
    })?;
    let expected = "dance,mean_score,std,energy_cm";
    if header.trim() != expected {
        return Err(Error::Format {
            file_kind: "scores",
            line: 1,
            message: format!("expected header '{expected}', got '{}'", header.trim()),
        });
    }
    let mut table = ScoreTable::default();
    let mut energies = Vec::new();
    for (lineno, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::Format {
                file_kind: "scores",
                line: lineno + 1,
                message: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let parse_num = |field: &str, what: &str| -> Result<f64, Error> {
            field.parse::<f64>().map_err(|_| Error::Format {
                file_kind: "scores",
                line: lineno + 1,
                message: format!("invalid {what} '{field}'"),
            })
        };
        let mean = parse_num(fields[1], "mean score")?;
        let std = parse_num(fields[2], "standard deviation")?;
        let energy = parse_num(fields[3], "energy")?;
        if std < 0.0 {
            return Err(Error::Format {
                file_kind: "scores",
                line: lineno + 1,
                message: format!("negative standard deviation {std}"),
            });
        }
        table.entries.push(ScoreEntry {
            id: fields[0].to_string(),
            mean,
            std,
        });
        energies.push((fields[0].to_string(), energy));
    }
    Ok((table, energies))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_comments_and_names() {
        let text = "# header\n\nfoo: ABCD # trailing note\nBBBB\n";
        let corpus = parse_corpus_str(text).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus[0].id(), Some("foo"));
        assert_eq!(corpus[0].to_string(), "ABCD");
        assert_eq!(corpus[1].id(), None);
    }

    #[test]
    fn corpus_error_carries_line() {
        let text = "ABCD\nABXE\n";
        match parse_corpus_str(text) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn scores_round_trip() {
        let text = "dance,mean_score,std,energy_cm\nfoo,3.5,1.0,123\nbar,7,0.5,456\n";
        let (table, energies) = parse_scores_csv(text).unwrap();
        assert_eq!(table.entries.len(), 2);
        assert_eq!(table.entries[1].id, "bar");
        assert_eq!(energies[0].1, 123.0);
    }

    #[test]
    fn scores_reject_bad_header_and_fields() {
        assert!(matches!(
            parse_scores_csv("wrong,header\n"),
            Err(Error::Format { line: 1, .. })
        ));
        let text = "dance,mean_score,std,energy_cm\nfoo,oops,1.0,123\n";
        match parse_scores_csv(text) {
            Err(Error::Format { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("mean score"));
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }
}
