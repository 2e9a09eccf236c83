//! Challenge submission and ground-truth text formats.
//!
//! One record per line, fields separated by whitespace or commas on
//! input and by single spaces on output:
//!
//! ```text
//! video_id frame bb_left bb_top bb_width bb_height class confidence
//! ```
//!
//! Ground truth uses the same layout without the confidence column.
//! The writer is canonical (bare integers, shortest float form,
//! confidence to at most six decimals, trailing newline), so a parsed
//! canonical file re-emits byte for byte.

use crate::bbox::{BoundingBox, FrameDims, GeometryError};
use crate::detection::{ClassId, Detection, FrameAddress, GroundTruthRecord, RecordError};
use std::fmt::Write as _;
use thiserror::Error;

const SUBMISSION_FIELDS: usize = 8;
const GROUND_TRUTH_FIELDS: usize = 7;

#[derive(Debug, Error, PartialEq)]
pub enum SubmissionError {
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: found {SUBMISSION_FIELDS} fields; ground truth has {GROUND_TRUTH_FIELDS} (is this a submission file?)")]
    ConfidenceInGroundTruth { line: usize },
    #[error("line {line}: {name} is not a number: {value:?}")]
    NotANumber {
        line: usize,
        name: &'static str,
        value: String,
    },
    #[error("line {line}: {source}")]
    Record {
        line: usize,
        #[source]
        source: RecordError,
    },
    #[error("line {line}: {source}")]
    Geometry {
        line: usize,
        #[source]
        source: GeometryError,
    },
}

/// One parsed detection plus the 1-based source line it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubmissionRecord {
    pub line: usize,
    pub detection: Detection,
}

/// An ordered detection list that remembers where each record came
/// from, so findings can point back into the source text.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubmissionFile {
    records: Vec<SubmissionRecord>,
}

impl SubmissionFile {
    /// Wraps a detection list produced in memory; records are numbered
    /// as the lines a canonical emit would give them.
    pub fn from_detections(detections: Vec<Detection>) -> Self {
        let records = detections
            .into_iter()
            .enumerate()
            .map(|(i, detection)| SubmissionRecord {
                line: i + 1,
                detection,
            })
            .collect();
        Self { records }
    }

    pub fn records(&self) -> &[SubmissionRecord] {
        &self.records
    }

    pub fn detections(&self) -> Vec<Detection> {
        self.records.iter().map(|r| r.detection).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_count(value: &str, name: &'static str, line: usize) -> Result<i64, SubmissionError> {
    value.parse().map_err(|_| SubmissionError::NotANumber {
        line,
        name,
        value: value.to_string(),
    })
}

fn parse_real(value: &str, name: &'static str, line: usize) -> Result<f64, SubmissionError> {
    value.parse().map_err(|_| SubmissionError::NotANumber {
        line,
        name,
        value: value.to_string(),
    })
}

fn parse_addr(video: i64, frame: i64, line: usize) -> Result<FrameAddress, SubmissionError> {
    let video = u32::try_from(video).map_err(|_| SubmissionError::Record {
        line,
        source: RecordError::VideoIdOutOfRange,
    })?;
    let frame = u32::try_from(frame).map_err(|_| SubmissionError::Record {
        line,
        source: RecordError::FrameOutOfRange,
    })?;
    FrameAddress::new(video, frame).map_err(|source| SubmissionError::Record { line, source })
}

fn parse_box(fields: &[&str], line: usize) -> Result<BoundingBox, SubmissionError> {
    let left = parse_real(fields[0], "bb_left", line)?;
    let top = parse_real(fields[1], "bb_top", line)?;
    let width = parse_real(fields[2], "bb_width", line)?;
    let height = parse_real(fields[3], "bb_height", line)?;
    BoundingBox::new(left, top, width, height)
        .map_err(|source| SubmissionError::Geometry { line, source })
}

/// Parses submission text. Blank lines are skipped; every malformed
/// line fails with its 1-based line number.
pub fn parse_submission(text: &str) -> Result<SubmissionFile, SubmissionError> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let fields = split_fields(raw);
        if fields.is_empty() {
            continue;
        }
        if fields.len() != SUBMISSION_FIELDS {
            return Err(SubmissionError::FieldCount {
                line,
                expected: SUBMISSION_FIELDS,
                found: fields.len(),
            });
        }
        let video = parse_count(fields[0], "video_id", line)?;
        let frame = parse_count(fields[1], "frame", line)?;
        let addr = parse_addr(video, frame, line)?;
        let bbox = parse_box(&fields[2..6], line)?;
        let class_id = parse_count(fields[6], "class", line)?;
        let class = ClassId::from_id(class_id)
            .map_err(|source| SubmissionError::Record { line, source })?;
        let confidence = parse_real(fields[7], "confidence", line)?;
        let detection = Detection::new(addr, bbox, class, confidence)
            .map_err(|source| SubmissionError::Record { line, source })?;
        records.push(SubmissionRecord { line, detection });
    }
    Ok(SubmissionFile { records })
}

/// Parses ground-truth text: the submission layout minus confidence.
pub fn parse_ground_truth(text: &str) -> Result<Vec<GroundTruthRecord>, SubmissionError> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let fields = split_fields(raw);
        if fields.is_empty() {
            continue;
        }
        if fields.len() == SUBMISSION_FIELDS {
            return Err(SubmissionError::ConfidenceInGroundTruth { line });
        }
        if fields.len() != GROUND_TRUTH_FIELDS {
            return Err(SubmissionError::FieldCount {
                line,
                expected: GROUND_TRUTH_FIELDS,
                found: fields.len(),
            });
        }
        let video = parse_count(fields[0], "video_id", line)?;
        let frame = parse_count(fields[1], "frame", line)?;
        let addr = parse_addr(video, frame, line)?;
        let bbox = parse_box(&fields[2..6], line)?;
        let class_id = parse_count(fields[6], "class", line)?;
        let class = ClassId::from_id(class_id)
            .map_err(|source| SubmissionError::Record { line, source })?;
        records.push(GroundTruthRecord::new(addr, bbox, class));
    }
    Ok(records)
}

/// Confidence in canonical form: at most six decimals, trailing zeros
/// and a bare trailing point trimmed.
fn format_confidence(confidence: f64) -> String {
    let mut s = format!("{confidence:.6}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn push_box_fields(out: &mut String, bbox: &BoundingBox) {
    let _ = write!(
        out,
        "{} {} {} {}",
        bbox.left(),
        bbox.top(),
        bbox.width(),
        bbox.height()
    );
}

/// Canonical submission text: one line per record, single spaces,
/// trailing newline. Record order is preserved.
pub fn emit_submission(file: &SubmissionFile) -> String {
    let mut out = String::new();
    for record in &file.records {
        let d = &record.detection;
        let _ = write!(out, "{} {} ", d.addr.video_id(), d.addr.frame());
        push_box_fields(&mut out, &d.bbox);
        let _ = writeln!(
            out,
            " {} {}",
            d.class.id(),
            format_confidence(d.confidence())
        );
    }
    out
}

/// Canonical ground-truth text, same layout minus confidence.
pub fn emit_ground_truth(records: &[GroundTruthRecord]) -> String {
    let mut out = String::new();
    for gt in records {
        let _ = write!(out, "{} {} ", gt.addr.video_id(), gt.addr.frame());
        push_box_fields(&mut out, &gt.bbox);
        let _ = writeln!(out, " {}", gt.class.id());
    }
    out
}

/// One violated rule at one source line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub line: usize,
    pub field: &'static str,
    pub rule: String,
}

/// All findings for one file; empty findings means the file conforms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    findings: Vec<Finding>,
    records_checked: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn findings(&self) -> &[Finding] {
        &self.findings
    }

    pub fn records_checked(&self) -> usize {
        self.records_checked
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.findings {
            let _ = writeln!(out, "line {}: {}: {}", f.line, f.field, f.rule);
        }
        let _ = writeln!(
            out,
            "{} finding(s) in {} record(s)",
            self.findings.len(),
            self.records_checked
        );
        out
    }
}

/// Checks every record against the challenge rules: video and frame
/// numbering starts at 1, frames stay at or below `max_frame`, classes
/// stay in the 7-class schema, confidence stays in [0, 1], boxes have
/// positive size and lie inside the frame. Violations come back as
/// findings, never as errors. Rules the parser already enforces are
/// re-checked so the report stands on its own.
pub fn validate_submission(
    file: &SubmissionFile,
    dims: FrameDims,
    max_frame: u32,
) -> ValidationReport {
    let mut findings = Vec::new();
    let mut fail = |line: usize, field: &'static str, rule: String| {
        findings.push(Finding { line, field, rule });
    };
    for record in &file.records {
        let d = &record.detection;
        let line = record.line;
        if d.addr.video_id() < 1 {
            fail(line, "video_id", "video id must be at least 1".to_string());
        }
        if d.addr.frame() < 1 {
            fail(line, "frame", "frame number must be at least 1".to_string());
        } else if d.addr.frame() > max_frame {
            fail(
                line,
                "frame",
                format!(
                    "frame {} exceeds the video's {} frames",
                    d.addr.frame(),
                    max_frame
                ),
            );
        }
        if !(1..=7).contains(&d.class.id()) {
            fail(
                line,
                "class",
                format!("class {} outside 1..=7", d.class.id()),
            );
        }
        if !(0.0..=1.0).contains(&d.confidence()) {
            fail(
                line,
                "confidence",
                format!("confidence {} outside [0, 1]", d.confidence()),
            );
        }
        let b = &d.bbox;
        if !(b.width() > 0.0 && b.height() > 0.0) {
            fail(
                line,
                "bb_width",
                "box width and height must be positive".to_string(),
            );
        }
        let (w, h) = (dims.width() as f64, dims.height() as f64);
        if b.left() < 0.0 || b.top() < 0.0 || b.right() > w || b.bottom() > h {
            fail(
                line,
                "bb_left",
                format!(
                    "box ({},{}) {}x{} not inside the {}x{} frame",
                    b.left(),
                    b.top(),
                    b.width(),
                    b.height(),
                    dims.width(),
                    dims.height()
                ),
            );
        }
    }
    ValidationReport {
        findings,
        records_checked: file.records.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_line() -> &'static str {
        "3 57 1772 830 141 285 2 0.83\n"
    }

    #[test]
    fn parses_a_canonical_line() {
        let file = parse_submission(sample_line()).unwrap();
        assert_eq!(file.len(), 1);
        let d = file.records()[0].detection;
        assert_eq!(d.addr.video_id(), 3);
        assert_eq!(d.addr.frame(), 57);
        assert_eq!(d.bbox.left(), 1772.0);
        assert_eq!(d.bbox.height(), 285.0);
        assert_eq!(d.class, ClassId::DriverWithHelmet);
        assert_eq!(d.confidence(), 0.83);
    }

    #[test]
    fn accepts_commas_and_mixed_whitespace() {
        let by_comma = parse_submission("3,57,1772,830,141,285,2,0.83\n").unwrap();
        let by_tab = parse_submission("3\t57  1772, 830 141 285\t2 0.83\n").unwrap();
        assert_eq!(by_comma.detections(), by_tab.detections());
        assert_eq!(
            by_comma.detections(),
            parse_submission(sample_line()).unwrap().detections()
        );
    }

    #[test]
    fn skips_blank_lines_and_keeps_line_numbers() {
        let text = "\n3 57 1772 830 141 285 2 0.83\n\n1 1 0 0 5 5 1 1\n";
        let file = parse_submission(text).unwrap();
        assert_eq!(file.len(), 2);
        assert_eq!(file.records()[0].line, 2);
        assert_eq!(file.records()[1].line, 4);
    }

    #[test]
    fn rejects_wrong_field_count() {
        let err = parse_submission("3 57 1772 830 141 285 2\n").unwrap_err();
        assert_eq!(
            err,
            SubmissionError::FieldCount {
                line: 1,
                expected: 8,
                found: 7
            }
        );
    }

    #[test]
    fn rejects_non_numeric_field() {
        let err = parse_submission("3 57 x 830 141 285 2 0.83\n").unwrap_err();
        assert!(matches!(
            err,
            SubmissionError::NotANumber {
                line: 1,
                name: "bb_left",
                ..
            }
        ));
    }

    #[test]
    fn rejects_class_out_of_range() {
        let err = parse_submission("3 57 1772 830 141 285 8 0.83\n").unwrap_err();
        assert!(matches!(
            err,
            SubmissionError::Record {
                line: 1,
                source: RecordError::ClassOutOfRange(8)
            }
        ));
    }

    #[test]
    fn rejects_confidence_out_of_range() {
        let err = parse_submission("3 57 1772 830 141 285 2 1.2\n").unwrap_err();
        assert!(matches!(
            err,
            SubmissionError::Record {
                line: 1,
                source: RecordError::ConfidenceOutOfRange(_)
            }
        ));
    }

    #[test]
    fn rejects_zero_video_and_frame() {
        assert!(matches!(
            parse_submission("0 57 1772 830 141 285 2 0.8\n").unwrap_err(),
            SubmissionError::Record {
                source: RecordError::VideoIdOutOfRange,
                ..
            }
        ));
        assert!(matches!(
            parse_submission("3 0 1772 830 141 285 2 0.8\n").unwrap_err(),
            SubmissionError::Record {
                source: RecordError::FrameOutOfRange,
                ..
            }
        ));
        assert!(matches!(
            parse_submission("-3 57 1772 830 141 285 2 0.8\n").unwrap_err(),
            SubmissionError::Record {
                source: RecordError::VideoIdOutOfRange,
                ..
            }
        ));
    }

    #[test]
    fn rejects_degenerate_box() {
        let err = parse_submission("3 57 1772 830 0 285 2 0.83\n").unwrap_err();
        assert!(matches!(err, SubmissionError::Geometry { line: 1, .. }));
    }

    #[test]
    fn emit_is_canonical() {
        let file = parse_submission("3,57 1772  830 141 285 2 0.830000\n").unwrap();
        assert_eq!(emit_submission(&file), "3 57 1772 830 141 285 2 0.83\n");
    }

    #[test]
    fn emit_trims_confidence_zeros() {
        assert_eq!(format_confidence(1.0), "1");
        assert_eq!(format_confidence(0.5), "0.5");
        assert_eq!(format_confidence(0.123456), "0.123456");
        assert_eq!(format_confidence(0.25), "0.25");
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let text = "1 1 0.5 2.25 10.125 4 1 0.999999\n2 200 1900 1000 20 80 7 0.000001\n";
        let file = parse_submission(text).unwrap();
        let emitted = emit_submission(&file);
        assert_eq!(emitted, text);
        assert_eq!(
            emit_submission(&parse_submission(&emitted).unwrap()),
            emitted
        );
    }

    #[test]
    fn ground_truth_parses_and_emits() {
        let text = "3 57 1772 830 141 285 2\n";
        let records = parse_ground_truth(text).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].class, ClassId::DriverWithHelmet);
        assert_eq!(emit_ground_truth(&records), text);
        assert_eq!(parse_ground_truth("").unwrap(), vec![]);
    }

    #[test]
    fn ground_truth_rejects_confidence_column() {
        let err = parse_ground_truth(sample_line()).unwrap_err();
        assert_eq!(err, SubmissionError::ConfidenceInGroundTruth { line: 1 });
    }

    fn challenge_dims() -> FrameDims {
        FrameDims::challenge_default()
    }

    #[test]
    fn conformant_file_has_no_findings() {
        let file = parse_submission("1 200 0 0 1920 1080 1 0.5\n").unwrap();
        let report = validate_submission(&file, challenge_dims(), 200);
        assert!(report.is_valid());
        assert_eq!(report.records_checked(), 1);
    }

    #[test]
    fn finds_frame_beyond_ceiling() {
        let file = parse_submission("1 201 0 0 10 10 1 0.5\n").unwrap();
        let report = validate_submission(&file, challenge_dims(), 200);
        assert_eq!(report.findings().len(), 1);
        assert_eq!(report.findings()[0].field, "frame");
    }

    #[test]
    fn finds_box_leaving_the_frame() {
        // left + width = 1920 exactly touches the border and conforms
        let file = parse_submission("1 1 1870 0 50 50 1 0.5\n").unwrap();
        let ok = validate_submission(&file, challenge_dims(), 200);
        assert!(ok.is_valid());
        // left + width = 1921 leaves the 1920-wide frame
        let file = parse_submission("1 1 1871 0 50 50 1 0.5\n").unwrap();
        let report = validate_submission(&file, challenge_dims(), 200);
        assert_eq!(report.findings().len(), 1);
        assert_eq!(report.findings()[0].field, "bb_left");
        let text = report.to_text();
        assert!(text.contains("line 1"));
        assert!(text.contains("1 finding(s) in 1 record(s)"));
    }

    #[test]
    fn finds_negative_origin() {
        let file = parse_submission("1 1 -1 0 10 10 1 0.5\n").unwrap();
        let report = validate_submission(&file, challenge_dims(), 200);
        assert_eq!(report.findings().len(), 1);
    }

    #[test]
    fn findings_reference_source_lines() {
        let text = "1 1 0 0 10 10 1 0.5\n1 500 0 0 10 10 1 0.5\n";
        let file = parse_submission(text).unwrap();
        let report = validate_submission(&file, challenge_dims(), 200);
        assert_eq!(report.findings().len(), 1);
        assert_eq!(report.findings()[0].line, 2);
    }
}
