//! CSV tables of functions of `k`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::radial::RadialFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub k: f64,
    pub value: f64,
    pub error: f64,
}

/// Values of `f` on a grid, with zero error.
pub fn tabulate(f: &RadialFunction, ks: &[f64]) -> Vec<TableRow> {
    ks.iter().map(|&k| TableRow { k, value: f.eval(k), error: 0.0 }).collect()
}

/// `k,value,error` rows.
pub fn table_csv<W: Write>(rows: &[TableRow], mut w: W) -> io::Result<()> {
    writeln!(w, "k,value,error")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.k, r.value, r.error)?;
    }
    Ok(())
}
