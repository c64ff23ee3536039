use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{is_missing, observed_range, ColumnKind, ColumnSchema, Dataset, Schema, MISSING};
use crate::error::{Error, Result};

/// How the label column is identified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    /// Header name. If no header matches and the text is an integer, it is
    /// taken as a zero-based column index.
    Name(String),
    Index(usize),
}

impl From<&str> for LabelColumn {
    fn from(s: &str) -> Self {
        LabelColumn::Name(s.to_string())
    }
}

impl LabelColumn {
    fn resolve(&self, headers: &[String]) -> Result<usize> {
        match self {
            LabelColumn::Index(i) if *i < headers.len() => Ok(*i),
            LabelColumn::Index(i) => Err(Error::LabelColumnNotFound(i.to_string())),
            LabelColumn::Name(name) => headers
                .iter()
                .position(|h| h == name)
                .or_else(|| name.parse::<usize>().ok().filter(|i| *i < headers.len()))
                .ok_or_else(|| Error::LabelColumnNotFound(name.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOptions {
    pub delimiter: u8,
    /// Encode a feature column as categorical when some cell is not a number.
    /// When false such a column is an error.
    pub categorical_fallback: bool,
    /// Columns always treated as categorical, even if every cell is numeric.
    pub categorical_columns: Vec<String>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            categorical_fallback: true,
            categorical_columns: Vec::new(),
        }
    }
}

struct RawTable {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path, delimiter: u8) -> Result<RawTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        rows.push(record?.iter().map(str::to_string).collect());
    }
    Ok(RawTable { headers, rows })
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Loads a CSV file with a header row.
///
/// Empty cells become [`MISSING`]. Labels and categorical features are coded
/// in order of first appearance.
pub fn load_csv(
    path: impl AsRef<Path>,
    label: &LabelColumn,
    options: &ParseOptions,
) -> Result<Dataset> {
    let path = path.as_ref();
    let table = read_table(path, options.delimiter)?;
    let label_pos = label.resolve(&table.headers)?;
    let n = table.rows.len();
    if table.headers.len() < 2 {
        return Err(Error::NoFeatures);
    }
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            found: n,
        });
    }

    let mut columns = Vec::with_capacity(table.headers.len());
    let mut feature_cols: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::with_capacity(n);
    for (j, name) in table.headers.iter().enumerate() {
        let cells = table.rows.iter().map(|r| r[j].as_str());
        if j == label_pos {
            let mut categories: Vec<String> = Vec::new();
            for (i, cell) in cells.enumerate() {
                if cell.is_empty() {
                    return Err(Error::MissingLabel { row: i + 1 });
                }
                let code = match categories.iter().position(|c| c == cell) {
                    Some(code) => code,
                    None => {
                        categories.push(cell.to_string());
                        categories.len() - 1
                    }
                };
                labels.push(code);
            }
            if categories.len() < 2 {
                return Err(Error::SingleClass {
                    column: name.clone(),
                    found: categories.len(),
                });
            }
            columns.push(ColumnSchema {
                name: name.clone(),
                kind: ColumnKind::Label,
                observed_min: 0.0,
                observed_max: (categories.len() - 1) as f64,
                categories,
            });
            continue;
        }

        let forced = options.categorical_columns.iter().any(|c| c == name);
        let first_bad = table
            .rows
            .iter()
            .enumerate()
            .find(|(_, r)| !r[j].is_empty() && parse_number(&r[j]).is_none());
        let categorical = match first_bad {
            _ if forced => true,
            None => false,
            Some(_) if options.categorical_fallback => true,
            Some((i, r)) => {
                return Err(Error::UnparseableCell {
                    row: i + 1,
                    column: name.clone(),
                    value: r[j].clone(),
                })
            }
        };

        let (values, categories) = if categorical {
            let mut categories: Vec<String> = Vec::new();
            let values = cells
                .map(|cell| {
                    if cell.is_empty() {
                        return MISSING;
                    }
                    let code = categories
                        .iter()
                        .position(|c| c == cell)
                        .unwrap_or_else(|| {
                            categories.push(cell.to_string());
                            categories.len() - 1
                        });
                    code as f64
                })
                .collect::<Vec<_>>();
            (values, categories)
        } else {
            let values = cells
                .map(|cell| parse_number(cell).unwrap_or(MISSING))
                .collect::<Vec<_>>();
            (values, Vec::new())
        };
        let (lo, hi) = observed_range(values.iter().copied());
        columns.push(ColumnSchema {
            name: name.clone(),
            kind: if categorical {
                ColumnKind::Categorical
            } else {
                ColumnKind::Numeric
            },
            observed_min: lo,
            observed_max: hi,
            categories,
        });
        feature_cols.push(values);
    }

    let class_count = columns[label_pos].categories.len();
    let d = feature_cols.len();
    let mut features = Vec::with_capacity(n * d);
    for i in 0..n {
        features.extend(feature_cols.iter().map(|col| col[i]));
    }
    Dataset::new(features, labels, Schema::new(columns)?, class_count)
}

/// Loads a CSV laid out like `reference` (same header, same encodings).
///
/// Used for held-out test files: labels and categories are coded with the
/// reference maps so that class indices agree.
pub fn load_csv_like(
    path: impl AsRef<Path>,
    reference: &Dataset,
    delimiter: u8,
) -> Result<Dataset> {
    let path = path.as_ref();
    let table = read_table(path, delimiter)?;
    let schema = reference.schema();
    let expected: Vec<&str> = schema.columns().iter().map(|c| c.name.as_str()).collect();
    if table.headers != expected {
        return Err(Error::SchemaMismatch(format!(
            "header {:?} differs from {:?}",
            table.headers, expected
        )));
    }
    if table.rows.is_empty() {
        return Err(Error::TooFewRows {
            required: 1,
            found: 0,
        });
    }
    let mut features = Vec::with_capacity(table.rows.len() * schema.n_features());
    let mut labels = Vec::with_capacity(table.rows.len());
    for (i, row) in table.rows.iter().enumerate() {
        for (col, cell) in schema.columns().iter().zip(row) {
            match col.kind {
                ColumnKind::Label => {
                    if cell.is_empty() {
                        return Err(Error::MissingLabel { row: i + 1 });
                    }
                    labels.push(col.code_of(cell).ok_or_else(|| Error::UnknownCategory {
                        column: col.name.clone(),
                        value: cell.clone(),
                    })?);
                }
                _ if cell.is_empty() => features.push(MISSING),
                ColumnKind::Categorical => {
                    let code = col.code_of(cell).ok_or_else(|| Error::UnknownCategory {
                        column: col.name.clone(),
                        value: cell.clone(),
                    })?;
                    features.push(code as f64);
                }
                ColumnKind::Numeric => {
                    features.push(parse_number(cell).ok_or_else(|| Error::UnparseableCell {
                        row: i + 1,
                        column: col.name.clone(),
                        value: cell.clone(),
                    })?);
                }
            }
        }
    }
    Dataset::new(features, labels, schema.clone(), reference.class_count())
}

fn format_cell(col: &ColumnSchema, value: f64) -> String {
    if is_missing(value) {
        return String::new();
    }
    if col.kind == ColumnKind::Categorical && value.fract() == 0.0 && value >= 0.0 {
        if let Some(text) = col.decode(value as usize) {
            return text.to_string();
        }
    }
    // `Display` for f64 prints the shortest string that parses back exactly.
    value.to_string()
}

/// Writes `d` as CSV in its original column order; missing cells are empty.
pub fn write_csv_to<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    let schema = d.schema();
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(schema.columns().iter().map(|c| c.name.as_str()))?;
    let label_pos = schema.label_position();
    for (i, row) in d.rows().enumerate() {
        let mut record = Vec::with_capacity(row.len() + 1);
        let mut features = row.iter();
        for (pos, col) in schema.columns().iter().enumerate() {
            if pos == label_pos {
                record.push(col.decode(d.labels()[i]).unwrap_or_default().to_string());
            } else {
                let v = *features.next().expect("row width matches schema");
                record.push(format_cell(col, v));
            }
        }
        out.write_record(&record)?;
    }
    out.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(d, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    fn load(text: &str) -> Result<Dataset> {
        let f = csv_file(text);
        load_csv(f.path(), &"y".into(), &ParseOptions::default())
    }

    #[test]
    fn labels_coded_by_first_appearance() {
        let d = load("x,y\n1,a\n2,b\n3,a\n").unwrap();
        assert_eq!(d.class_count(), 2);
        assert_eq!(d.labels(), &[0, 1, 0]);
        assert_eq!(d.schema().label().categories, vec!["a", "b"]);
    }

    #[test]
    fn empty_cell_is_missing_and_ignored_by_range() {
        let d = load("x,z,y\n1,,a\n-4,2,b\n3,7,a\n").unwrap();
        assert!(is_missing(d.value(0, 1)));
        let z = d.schema().feature(1);
        assert_eq!((z.observed_min, z.observed_max), (2.0, 7.0));
        let x = d.schema().feature(0);
        assert_eq!((x.observed_min, x.observed_max), (-4.0, 3.0));
    }

    #[test]
    fn single_class_rejected() {
        let err = load("x,y\n1,a\n2,a\n").unwrap_err();
        assert!(matches!(err, Error::SingleClass { found: 1, .. }), "{err}");
    }

    #[test]
    fn missing_label_rejected() {
        let err = load("x,y\n1,a\n2,\n3,b\n").unwrap_err();
        assert!(matches!(err, Error::MissingLabel { row: 2 }));
    }

    #[test]
    fn file_not_found() {
        let err = load_csv(
            "/nonexistent/data.csv",
            &"y".into(),
            &ParseOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.is_user_error());
    }

    #[test]
    fn text_column_falls_back_to_categorical() {
        let d = load("color,y\nred,a\nblue,b\nred,a\n,b\n").unwrap();
        let col = d.schema().feature(0);
        assert_eq!(col.kind, ColumnKind::Categorical);
        assert_eq!(col.categories, vec!["red", "blue"]);
        assert_eq!(&d.cells()[..3], &[0.0, 1.0, 0.0]);
        assert!(is_missing(d.cells()[3]));
    }

    #[test]
    fn strict_parsing_rejects_text() {
        let f = csv_file("x,y\n1,a\nfoo,b\n");
        let opts = ParseOptions {
            categorical_fallback: false,
            ..ParseOptions::default()
        };
        let err = load_csv(f.path(), &"y".into(), &opts).unwrap_err();
        assert!(matches!(err, Error::UnparseableCell { row: 2, .. }));
    }

    #[test]
    fn label_by_index() {
        let f = csv_file("y,x\na,1\nb,2\n");
        let d = load_csv(f.path(), &LabelColumn::Index(0), &ParseOptions::default()).unwrap();
        assert_eq!(d.schema().label().name, "y");
        let d = load_csv(f.path(), &"0".into(), &ParseOptions::default()).unwrap();
        assert_eq!(d.schema().label_position(), 0);
    }

    #[test]
    fn write_then_reload_preserves_values() {
        let text = "a,y,c\n0.1,u,red\n,v,blue\n-3.25e-7,u,\n";
        let d = load(text).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&d, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "a,y,c\n0.1,u,red\n,v,blue\n-0.000000325,u,\n"
        );
        let f = csv_file(std::str::from_utf8(&buf).unwrap());
        let back = load_csv(f.path(), &"y".into(), &ParseOptions::default()).unwrap();
        assert_eq!(back.labels(), d.labels());
        for (x, y) in back.cells().iter().zip(d.cells()) {
            assert!(x == y || (is_missing(*x) && is_missing(*y)));
        }
    }

    #[test]
    fn like_reference_uses_reference_codes() {
        let train = load("x,y\n1,a\n2,b\n").unwrap();
        let f = csv_file("x,y\n5,b\n6,a\n");
        let test = load_csv_like(f.path(), &train, b',').unwrap();
        assert_eq!(test.labels(), &[1, 0]);
        let f = csv_file("x,y\n5,c\n");
        assert!(matches!(
            load_csv_like(f.path(), &train, b',').unwrap_err(),
            Error::UnknownCategory { .. }
        ));
    }
}
