use std::fmt::Write as _;

use vissm::MultivariateSeries;

use crate::error::{CliError, CliResult};

/// A series read from CSV: rows are time steps, columns are variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSeries {
    pub names: Vec<String>,
    pub series: MultivariateSeries,
}

fn parse_err(source: &str, line: u64, message: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{source}:{line}: {message}"))
}

/// Raw table: optional header plus string cells, with the source line of every row.
pub fn read_table(text: &str, source: &str) -> CliResult<(Option<Vec<String>>, Vec<(u64, Vec<String>)>)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(source, line, e)
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let cells: Vec<String> = rec.iter().map(|c| c.trim().to_owned()).collect();
        if cells.len() == 1 && cells[0].is_empty() {
            continue;
        }
        rows.push((line, cells));
    }
    let Some((_, first)) = rows.first() else {
        return Err(parse_err(source, 1, "no data rows"));
    };
    let header = if first.iter().any(|c| c.parse::<f64>().is_err()) {
        Some(rows.remove(0).1)
    } else {
        None
    };
    Ok((header, rows))
}

pub fn parse_series(text: &str, source: &str) -> CliResult<CsvSeries> {
    let (header, rows) = read_table(text, source)?;
    let width = header.as_ref().map(Vec::len).or_else(|| rows.first().map(|r| r.1.len())).unwrap_or(0);
    if rows.is_empty() {
        return Err(parse_err(source, 1, "header but no data rows"));
    }
    let steps = rows.len();
    let mut data = vec![0.0; width * steps];
    for (t, (line, cells)) in rows.iter().enumerate() {
        if cells.len() != width {
            return Err(parse_err(source, *line, format!("expected {width} columns, found {}", cells.len())));
        }
        for (c, cell) in cells.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(source, *line, format!("column {}: {cell:?} is not a number", c + 1)))?;
            if !v.is_finite() {
                return Err(parse_err(source, *line, format!("column {}: non-finite value", c + 1)));
            }
            data[c * steps + t] = v;
        }
    }
    let names = header.unwrap_or_else(|| (0..width).map(|c| format!("x{c}")).collect());
    Ok(CsvSeries { names, series: MultivariateSeries::new(width, steps, data)? })
}

pub fn load_series(path: &std::path::Path) -> CliResult<CsvSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_series(&text, &path.display().to_string())
}

/// `step,<names…>` then one row per step; numbers use the shortest round-trip form.
pub fn format_series(names: &[String], series: &MultivariateSeries, first_step: usize) -> String {
    let mut out = String::from("step");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for t in 0..series.steps() {
        let _ = write!(out, "{}", first_step + t);
        for c in 0..series.vars() {
            let _ = write!(out, ",{}", series.get(c, t));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_detection_and_layout() {
        let s = parse_series("a,b\n1,2\n3,4\n5,6\n", "t").unwrap();
        assert_eq!(s.names, vec!["a", "b"]);
        assert_eq!(s.series.row(1), &[2.0, 4.0, 6.0]);
        let s = parse_series("1,2\n3,4\n", "t").unwrap();
        assert_eq!(s.names, vec!["x0", "x1"]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_series("a,b\n1,2\n3,oops\n", "data.csv").unwrap_err();
        assert!(e.to_string().contains("data.csv:3"), "{e}");
        let e = parse_series("1,2\n3\n", "d").unwrap_err();
        assert!(e.to_string().contains("d:2"), "{e}");
        assert!(parse_series("", "d").is_err());
        assert!(parse_series("1,inf\n", "d").is_err());
    }

    #[test]
    fn lossless_round_trip() {
        let series = MultivariateSeries::from_fn(2, 3, |c, t| (c as f64 + 0.1) / (t as f64 + 3.0) * 1e-7);
        let names = vec!["p".to_owned(), "q".to_owned()];
        let text = format_series(&names, &series, 0);
        let (_, rows) = read_table(&text, "t").unwrap();
        for (t, (_, cells)) in rows.iter().enumerate() {
            for c in 0..2 {
                assert_eq!(cells[c + 1].parse::<f64>().unwrap(), series.get(c, t));
            }
        }
    }
}
