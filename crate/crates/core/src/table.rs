//! Delimited-table reading helpers shared by the loaders.
//!
//! Every input table is UTF-8 with a header row. The delimiter is taken from
//! the header line: a tab anywhere in it selects TSV, otherwise comma.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) struct Table {
    name: String,
    headers: Vec<String>,
    reader: csv::Reader<Box<dyn Read>>,
}

pub(crate) struct Row {
    pub line: u64,
    record: csv::StringRecord,
}

impl Table {
    pub fn open(path: &Path) -> Result<Table> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Table::from_reader(path.display().to_string(), file)
    }

    pub fn from_reader<R: Read + 'static>(name: String, reader: R) -> Result<Table> {
        let mut buffered = BufReader::new(reader);
        let delimiter = {
            let peek = buffered.fill_buf().map_err(|e| Error::io(&name, e))?;
            let first_line = peek.split(|&b| b == b'\n').next().unwrap_or(&[]);
            if first_line.contains(&b'\t') {
                b'\t'
            } else {
                b','
            }
        };
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .has_headers(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(Box::new(buffered) as Box<dyn Read>);
        let headers = reader
            .headers()
            .map_err(|source| Error::Csv {
                path: name.clone(),
                source,
            })?
            .iter()
            .map(|h| h.to_ascii_lowercase())
            .collect();
        Ok(Table {
            name,
            headers,
            reader,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Position of a required column.
    pub fn column(&self, name: &str) -> Result<usize> {
        self.optional_column(name).ok_or_else(|| Error::Malformed {
            path: self.name.clone(),
            line: 1,
            message: format!("missing column `{name}`"),
        })
    }

    pub fn optional_column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn rows(&mut self) -> impl Iterator<Item = Result<Row>> + '_ {
        let name = self.name.clone();
        self.reader.records().map(move |rec| {
            let record = rec.map_err(|source| Error::Csv {
                path: name.clone(),
                source,
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            Ok(Row { line, record })
        })
    }

}

impl Row {
    pub fn get(&self, col: usize) -> &str {
        self.record.get(col).unwrap_or("")
    }

    pub fn parse<T: std::str::FromStr>(&self, table: &str, col: usize, what: &str) -> Result<T> {
        let raw = self.get(col);
        raw.parse().map_err(|_| Error::Malformed {
            path: table.to_string(),
            line: self.line,
            message: format!("cannot parse {what} from `{raw}`"),
        })
    }
}
