//! Line-delimited JSON files for raw samples and fixed-length datasets.
//!
//! Raw sample file, one record per line:
//! `{"id":"...","label":"...","strokes":[[[x,y],...],...]}`
//!
//! Dataset file: a header record
//! `{"horizon":T,"count":N,"split":"train","seed":S}` followed by N records
//! `{"id":"...","label":"...","points":[[x,y],...]}`.
//!
//! Keys are written in that fixed order and every coordinate with exactly six
//! fractional digits, so identical input always produces identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::trajectory::{Point, Trajectory};

use super::{Dataset, RawSample, Split};

fn push_point(out: &mut String, p: &Point) -> Result<()> {
    if !p.is_finite() {
        return Err(Error::invalid(format!(
            "cannot serialize non-finite point ({}, {})",
            p.x, p.y
        )));
    }
    let _ = write!(out, "[{:.6},{:.6}]", p.x, p.y);
    Ok(())
}

fn push_points(out: &mut String, points: &[Point]) -> Result<()> {
    out.push('[');
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_point(out, p)?;
    }
    out.push(']');
    Ok(())
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

pub fn raw_to_string(samples: &[RawSample]) -> Result<String> {
    let mut out = String::new();
    for s in samples {
        let _ = write!(out, "{{\"id\":{},\"label\":{},\"strokes\":[", json_str(&s.id), json_str(&s.label));
        for (i, stroke) in s.strokes.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            push_points(&mut out, stroke)?;
        }
        out.push_str("]}\n");
    }
    Ok(out)
}

pub fn dataset_to_string(ds: &Dataset) -> Result<String> {
    let mut out = format!(
        "{{\"horizon\":{},\"count\":{},\"split\":\"{}\",\"seed\":{}}}\n",
        ds.horizon,
        ds.samples.len(),
        ds.split,
        ds.seed
    );
    for (i, t) in ds.samples.iter().enumerate() {
        let id = t.id.clone().unwrap_or_else(|| format!("{}-{i}", ds.split));
        let label = t.label.clone().unwrap_or_default();
        let _ = write!(out, "{{\"id\":{},\"label\":{},\"points\":", json_str(&id), json_str(&label));
        push_points(&mut out, &t.points)?;
        out.push_str("}\n");
    }
    Ok(out)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes raw samples in the canonical line-delimited format.
pub fn write_canonical(samples: &[RawSample], path: &Path) -> Result<()> {
    write_file(path, &raw_to_string(samples)?)
}

pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    write_file(path, &dataset_to_string(ds)?)
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_canonical(path: &Path) -> Result<Vec<RawSample>> {
    parse_canonical(&read_file(path)?)
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset(&read_file(path)?)
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

fn parse_object(line_no: usize, line: &str) -> Result<Map<String, Value>> {
    match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(format_err(line_no, "record is not a JSON object")),
        Err(e) => Err(format_err(line_no, e.to_string())),
    }
}

fn field<'a>(map: &'a Map<String, Value>, key: &str, line: usize) -> Result<&'a Value> {
    map.get(key).ok_or_else(|| Error::MissingKey {
        line,
        key: key.to_string(),
    })
}

fn string_field(map: &Map<String, Value>, key: &str, line: usize) -> Result<String> {
    field(map, key, line)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| format_err(line, format!("`{key}` must be a string")))
}

fn uint_field(map: &Map<String, Value>, key: &str, line: usize) -> Result<u64> {
    field(map, key, line)?
        .as_u64()
        .ok_or_else(|| format_err(line, format!("`{key}` must be a nonnegative integer")))
}

fn parse_point(v: &Value, line: usize) -> Result<Point> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| format_err(line, "point must be an [x, y] pair"))?;
    let coord = |c: &Value| {
        c.as_f64()
            .ok_or_else(|| format_err(line, "coordinate must be a number"))
    };
    Ok(Point::new(coord(&pair[0])?, coord(&pair[1])?))
}

fn parse_points(v: &Value, line: usize) -> Result<Vec<Point>> {
    v.as_array()
        .ok_or_else(|| format_err(line, "expected an array of points"))?
        .iter()
        .map(|p| parse_point(p, line))
        .collect()
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Parses a raw-sample file's contents.
pub fn parse_canonical(text: &str) -> Result<Vec<RawSample>> {
    lines(text)
        .map(|(no, line)| {
            let map = parse_object(no, line)?;
            let strokes = field(&map, "strokes", no)?
                .as_array()
                .ok_or_else(|| format_err(no, "`strokes` must be an array"))?
                .iter()
                .map(|s| parse_points(s, no))
                .collect::<Result<Vec<_>>>()?;
            Ok(RawSample {
                id: string_field(&map, "id", no)?,
                label: string_field(&map, "label", no)?,
                strokes,
            })
        })
        .collect()
}

/// Parses a dataset file's contents, checking the header against the records.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let mut it = lines(text);
    let (hno, header) = it.next().ok_or_else(|| format_err(1, "missing dataset header"))?;
    let head = parse_object(hno, header)?;
    let horizon = uint_field(&head, "horizon", hno)? as usize;
    let count = uint_field(&head, "count", hno)? as usize;
    let seed = uint_field(&head, "seed", hno)?;
    let split = match string_field(&head, "split", hno)?.as_str() {
        "train" => Split::Train,
        "test" => Split::Test,
        other => return Err(format_err(hno, format!("unknown split `{other}`"))),
    };
    let mut samples = Vec::with_capacity(count);
    for (no, line) in it {
        let map = parse_object(no, line)?;
        let points = parse_points(field(&map, "points", no)?, no)?;
        if points.len() != horizon {
            return Err(format_err(
                no,
                format!("{} points, header horizon is {horizon}", points.len()),
            ));
        }
        if points.iter().any(|p| !p.in_unit_square()) {
            return Err(format_err(no, "point outside the unit square"));
        }
        samples.push(Trajectory {
            points,
            label: Some(string_field(&map, "label", no)?),
            id: Some(string_field(&map, "id", no)?),
        });
    }
    if samples.len() != count {
        return Err(format_err(
            hno,
            format!("header count {count} but {} records", samples.len()),
        ));
    }
    Dataset::new(horizon, split, seed, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RawSample {
        RawSample {
            id: "a\"1".into(),
            label: "7".into(),
            strokes: vec![
                vec![Point::new(1.0, 2.5), Point::new(-3.25, 4.0)],
                vec![Point::new(0.1234567, 9.0)],
            ],
        }
    }

    #[test]
    fn fixed_formatting() {
        let text = raw_to_string(&[sample()]).unwrap();
        assert_eq!(
            text,
            "{\"id\":\"a\\\"1\",\"label\":\"7\",\"strokes\":[[[1.000000,2.500000],[-3.250000,4.000000]],[[0.123457,9.000000]]]}\n"
        );
    }

    #[test]
    fn empty_list_is_empty_file() {
        assert_eq!(raw_to_string(&[]).unwrap(), "");
        assert!(parse_canonical("").unwrap().is_empty());
    }

    #[test]
    fn round_trip_within_format_precision() {
        let back = parse_canonical(&raw_to_string(&[sample()]).unwrap()).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].id, "a\"1");
        for (s, t) in sample().strokes.iter().zip(&back[0].strokes) {
            for (p, q) in s.iter().zip(t) {
                assert!((p.x - q.x).abs() <= 1e-6 && (p.y - q.y).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn trailing_garbage_reports_line() {
        let good = raw_to_string(&[sample()]).unwrap();
        let text = format!("{good}{} xyz\n", good.trim_end());
        match parse_canonical(&text) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_key_is_named() {
        match parse_canonical("{\"id\":\"x\",\"strokes\":[]}") {
            Err(Error::MissingKey { line: 1, key }) => assert_eq!(key, "label"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dataset_header_must_match() {
        let ds = Dataset::new(
            2,
            Split::Test,
            5,
            vec![Trajectory::new(vec![Point::new(0.0, 0.5), Point::new(1.0, 0.5)])],
        )
        .unwrap();
        let text = dataset_to_string(&ds).unwrap();
        let back = parse_dataset(&text).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back.split, Split::Test);
        assert_eq!(back.seed, 5);
        let bad = text.replace("\"count\":1", "\"count\":2");
        assert!(parse_dataset(&bad).is_err());
        let bad = text.replace("[1.000000,0.500000]", "[1.500000,0.500000]");
        assert!(matches!(parse_dataset(&bad), Err(Error::Format { line: 2, .. })));
    }
}
