//! A subset of the UNIPEN text format.
//!
//! Lines whose first token starts with `.` followed by a letter are
//! declarations; every other non-blank line is a coordinate line of
//! whitespace-separated numbers (only the first two are used). Recognized
//! declarations:
//!
//! * `.SEGMENT <level> <range> [quality] "<label>"` starts a new sample whose
//!   label is the last token with surrounding quotes removed;
//! * `.PEN_DOWN` starts a new stroke of the current sample;
//! * `.PEN_UP` ends it; coordinates that follow are pen-up motion and are
//!   discarded.
//!
//! All other declarations are ignored.

use crate::error::{Error, Result};
use crate::trajectory::Point;

use super::RawSample;

#[derive(Debug, Clone, PartialEq)]
pub struct UnipenParse {
    pub samples: Vec<RawSample>,
    /// Segments without any pen-down point.
    pub skipped_segments: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Pen {
    /// No pen block seen since the segment started.
    Idle,
    Down,
    Up,
}

struct Segment {
    id: String,
    label: String,
    strokes: Vec<Vec<Point>>,
}

fn is_declaration(line: &str) -> bool {
    let mut chars = line.chars();
    chars.next() == Some('.') && chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
}

fn segment_label(rest: &[&str]) -> String {
    rest.last()
        .map(|t| t.trim_matches('"').to_string())
        .unwrap_or_default()
}

pub fn parse_unipen_subset(text: &str) -> Result<UnipenParse> {
    let mut samples = Vec::new();
    let mut skipped = 0;
    let mut current: Option<Segment> = None;
    let mut pen = Pen::Idle;

    let mut finish = |seg: Option<Segment>, samples: &mut Vec<RawSample>| {
        if let Some(seg) = seg {
            let strokes: Vec<Vec<Point>> = seg.strokes.into_iter().filter(|s| !s.is_empty()).collect();
            if strokes.is_empty() {
                skipped += 1;
            } else {
                samples.push(RawSample {
                    id: seg.id,
                    label: seg.label,
                    strokes,
                });
            }
        }
    };

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Format {
            line: line_no,
            message,
        };
        if is_declaration(line) {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                ".SEGMENT" => {
                    finish(current.take(), &mut samples);
                    let n = samples.len();
                    let range = tokens.get(2).copied().unwrap_or("");
                    current = Some(Segment {
                        id: if range.is_empty() {
                            format!("seg{n}")
                        } else {
                            format!("seg{n}:{range}")
                        },
                        label: segment_label(&tokens[1..]),
                        strokes: Vec::new(),
                    });
                    pen = Pen::Idle;
                }
                ".PEN_DOWN" => {
                    let seg = current
                        .as_mut()
                        .ok_or_else(|| err(".PEN_DOWN before any .SEGMENT".into()))?;
                    seg.strokes.push(Vec::new());
                    pen = Pen::Down;
                }
                ".PEN_UP" => {
                    if current.is_some() {
                        pen = Pen::Up;
                    }
                }
                _ => {}
            }
            continue;
        }

        let mut fields = line.split_whitespace();
        let mut coord = || -> Result<f64> {
            let tok = fields
                .next()
                .ok_or_else(|| err("coordinate line needs at least two values".into()))?;
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("non-numeric coordinate `{tok}`")))
        };
        let (x, y) = (coord()?, coord()?);
        match pen {
            Pen::Down => current
                .as_mut()
                .and_then(|s| s.strokes.last_mut())
                .expect("pen down implies an open stroke")
                .push(Point::new(x, y)),
            Pen::Up => {}
            Pen::Idle => {
                return Err(err("coordinate line outside any .PEN_DOWN block".into()));
            }
        }
    }
    finish(current.take(), &mut samples);
    Ok(UnipenParse {
        samples,
        skipped_segments: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let text = ".VERSION 1.0\n.SEGMENT CHARACTER 0-1 ? \"3\"\n.PEN_DOWN\n10 20\n11 22\n.PEN_UP\n";
        let out = parse_unipen_subset(text).unwrap();
        assert_eq!(out.samples.len(), 1);
        let s = &out.samples[0];
        assert_eq!(s.label, "3");
        assert_eq!(s.strokes, vec![vec![Point::new(10.0, 20.0), Point::new(11.0, 22.0)]]);
    }

    #[test]
    fn pen_up_separates_strokes() {
        let text = ".SEGMENT CHARACTER 0 ? \"4\"\n.PEN_DOWN\n1 1\n2 2\n.PEN_UP\n5 5\n6 6\n.PEN_DOWN\n3 3\n.PEN_UP\n";
        let out = parse_unipen_subset(text).unwrap();
        let s = &out.samples[0];
        assert_eq!(s.strokes.len(), 2);
        assert_eq!(s.strokes[1], vec![Point::new(3.0, 3.0)]);
        assert_eq!(s.concatenated().len(), 3);
    }

    #[test]
    fn coordinate_before_pen_down_is_an_error() {
        let text = ".SEGMENT CHARACTER 0 ? \"1\"\n5 5\n";
        match parse_unipen_subset(text) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_unipen_subset("1 2\n"),
            Err(Error::Format { line: 1, .. })
        ));
    }

    #[test]
    fn non_numeric_coordinate() {
        let text = ".SEGMENT C 0 ? \"1\"\n.PEN_DOWN\n5 x\n";
        assert!(matches!(
            parse_unipen_subset(text),
            Err(Error::Format { line: 3, .. })
        ));
    }

    #[test]
    fn empty_segments_are_counted() {
        let text = ".SEGMENT C 0 ? \"1\"\n.PEN_DOWN\n.PEN_UP\n.SEGMENT C 1 ? \"2\"\n.PEN_DOWN\n1 1\n";
        let out = parse_unipen_subset(text).unwrap();
        assert_eq!(out.skipped_segments, 1);
        assert_eq!(out.samples.len(), 1);
        assert_eq!(out.samples[0].label, "2");
    }

    #[test]
    fn unknown_keywords_and_reals() {
        let text = ".COMMENT hello\n.SEGMENT C 0 ? \"a\"\n.X_DIM 1000\n.PEN_DOWN\n.5 -1.25 99\n";
        let out = parse_unipen_subset(text).unwrap();
        assert_eq!(out.samples[0].strokes[0], vec![Point::new(0.5, -1.25)]);
    }
}
