//! CSV and JSON output of estimator results.

use std::io::{self, Write};

use serde::Serialize;

use super::{EstimatorResult, TauProfile};

/// `radius,value,stderr,replicas,censored` rows for a profile.
pub fn profile_csv<W: Write>(p: &TauProfile, mut w: W) -> io::Result<()> {
    writeln!(w, "radius,value,stderr,replicas,censored")?;
    for (r, v) in p.radii.iter().zip(&p.values) {
        writeln!(w, "{r},{},{},{},{}", v.value, v.stderr, v.replicas, v.censored_fraction)?;
    }
    Ok(())
}

/// Rows of results keyed by a leading column (an intensity, a box side...).
pub fn results_csv<W: Write>(key: &str, keys: &[f64], results: &[EstimatorResult], mut w: W) -> io::Result<()> {
    writeln!(w, "{key},value,stderr,replicas,censored")?;
    for (k, v) in keys.iter().zip(results) {
        writeln!(w, "{k},{},{},{},{}", v.value, v.stderr, v.replicas, v.censored_fraction)?;
    }
    Ok(())
}

/// Pretty JSON of any result together with the configuration that made it.
pub fn write_json<W: Write, C: Serialize, R: Serialize>(config: &C, result: &R, w: W) -> io::Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, C, R> {
        config: &'a C,
        result: &'a R,
    }
    serde_json::to_writer_pretty(w, &Doc { config, result }).map_err(io::Error::from)
}
