use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{Dataset, Label, Provenance, Sample, FEATURE_COUNT, GSR_FEATURES, PD_FEATURES, ST_FEATURES};
use crate::error::{Error, Result};

/// `participant,label,gsr_00..gsr_22,pd_00..pd_38,st_00..st_22`
pub fn csv_header() -> Vec<String> {
    let mut cols = vec!["participant".to_string(), "label".to_string()];
    for (prefix, n) in [("gsr", GSR_FEATURES), ("pd", PD_FEATURES), ("st", ST_FEATURES)] {
        cols.extend((0..n).map(|i| format!("{prefix}_{i:02}")));
    }
    cols
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .quoting(false)
        .flexible(true)
        .from_reader(file);

    let expected = csv_header();
    let mut samples = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut line = 0usize;
    let mut index = 0usize;
    loop {
        match reader.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => {
                let message = e.to_string();
                return Err(match e.into_kind() {
                    csv::ErrorKind::Io(io) => Error::io(path, io),
                    _ => Error::format(Some(line + 1), message),
                });
            }
        }
        index += 1;
        line = record.position().map_or(line + 1, |p| p.line() as usize).max(line + 1);

        if record.len() != expected.len() {
            return Err(Error::format(
                Some(line),
                format!(
                    "expected {} columns (participant, label and {FEATURE_COUNT} features), found {} ({} features)",
                    expected.len(),
                    record.len(),
                    record.len().saturating_sub(2)
                ),
            ));
        }

        if index == 1 {
            for (got, want) in record.iter().zip(&expected) {
                if got.trim() != want {
                    return Err(Error::format(
                        Some(1),
                        format!("header column {got:?} should be {want:?}"),
                    ));
                }
            }
            continue;
        }

        let participant_id = record[0].trim().parse::<u32>().map_err(|e| Error::Parse {
            row: line,
            column: expected[0].clone(),
            message: format!("{:?}: {e}", &record[0]),
        })?;
        let label = record[1].trim().parse::<Label>().map_err(|_| Error::Parse {
            row: line,
            column: expected[1].clone(),
            message: format!("unknown label token {:?}", &record[1]),
        })?;
        let mut features = Vec::with_capacity(FEATURE_COUNT);
        for (col, field) in record.iter().enumerate().skip(2) {
            let value = field.trim().parse::<f64>().map_err(|e| Error::Parse {
                row: line,
                column: expected[col].clone(),
                message: format!("{field:?}: {e}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    column: expected[col].clone(),
                    message: format!("non-finite value {field:?}"),
                });
            }
            features.push(value);
        }
        samples.push(Sample::new(participant_id, features, label)?);
    }

    if line == 0 {
        return Err(Error::format(None, "file is empty, expected a header row"));
    }
    Dataset::new(
        samples,
        Provenance::Csv {
            path: path.display().to_string(),
        },
    )
}

/// Writes `dataset` in the format read by [`load_csv`]. Floats use the
/// shortest representation that parses back to the same value.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "{}", csv_header().join(",")).map_err(io)?;
    for s in dataset.samples() {
        write!(out, "{},{}", s.participant_id, s.label).map_err(io)?;
        for v in &s.features {
            write!(out, ",{v}").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthesize_dataset, SyntheticSpec};
    use std::fs;

    fn row(participant: &str, label: &str, features: usize) -> String {
        let mut r = format!("{participant},{label}");
        for i in 0..features {
            r.push_str(&format!(",{}", i as f64 * 0.5));
        }
        r
    }

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn header_has_87_columns() {
        let h = csv_header();
        assert_eq!(h.len(), 87);
        assert_eq!(h[2], "gsr_00");
        assert_eq!(h[24], "gsr_22");
        assert_eq!(h[25], "pd_00");
        assert_eq!(h[63], "pd_38");
        assert_eq!(h[64], "st_00");
        assert_eq!(h[86], "st_22");
    }

    #[test]
    fn reads_named_and_numeric_labels_with_crlf() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!(
            "{}\r\n{}\r\n{}\r\n",
            csv_header().join(","),
            row("3", "Mild", 85),
            row("4", "2", 85)
        );
        let ds = load_csv(write(&dir, "a.csv", &text)).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.samples()[0].label, Label::Mild);
        assert_eq!(ds.samples()[0].participant_id, 3);
        assert_eq!(ds.samples()[1].label, Label::Moderate);
        assert_eq!(ds.samples()[1].features[2], 1.0);
    }

    #[test]
    fn short_rows_are_format_errors() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!("{}\n{}\n", csv_header().join(","), row("1", "None", 84));
        let err = load_csv(write(&dir, "b.csv", &text)).unwrap_err();
        match &err {
            Error::Format { row, message } => {
                assert_eq!(*row, Some(2));
                assert!(message.contains("85"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_tokens_are_parse_errors() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!("{}\n{}\n", csv_header().join(","), row("1", "Extreme", 85));
        match load_csv(write(&dir, "c.csv", &text)).unwrap_err() {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "label");
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut bad = row("1", "None", 85);
        bad = bad.replacen(",0.5,", ",abc,", 1);
        let text = format!("{}\n{}\n", csv_header().join(","), bad);
        match load_csv(write(&dir, "d.csv", &text)).unwrap_err() {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "gsr_01");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut header = csv_header();
        header[5] = "foo".into();
        let text = format!("{}\n{}\n", header.join(","), row("1", "None", 85));
        assert!(matches!(
            load_csv(write(&dir, "e.csv", &text)),
            Err(Error::Format { row: Some(1), .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_csv("/nonexistent/definitely/missing.csv"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn synthetic_round_trips_through_csv() {
        let ds = synthesize_dataset(&SyntheticSpec::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("synth.csv");
        write_csv(&ds, &p).unwrap();
        let back = load_csv(&p).unwrap();
        assert_eq!(back.len(), 192);
        assert_eq!(back.samples(), ds.samples());
    }
}
