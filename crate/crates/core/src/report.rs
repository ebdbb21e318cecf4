//! Shared CSV plumbing. Numbers are written in shortest round-trip form so
//! re-parsing a report reproduces the exact doubles.

use crate::error::{Error, Result};
use std::io::Write;

pub fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

pub(crate) fn csv_writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io_err)?;
    Ok(w)
}

pub(crate) fn write_row<W: Write>(w: &mut csv::Writer<W>, row: &[f64]) -> Result<()> {
    w.write_record(row.iter().map(|x| fmt_num(*x))).map_err(io_err)
}

pub(crate) fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::Numerical(format!("write failed: {e}")))
}

pub(crate) fn io_err(e: csv::Error) -> Error {
    Error::Numerical(format!("write failed: {e}"))
}
