//! CSV output.

use std::io::Write;
use std::path::Path;

use super::run::ResultRow;
use super::HarnessError;

pub const CSV_HEADER: [&str; 16] = [
    "scenario", "N", "K", "q", "Q", "theta", "S", "L", "ell", "beta", "M", "snr_db", "metric",
    "value", "stderr", "trials",
];

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the header and `rows` in canonical order. Floats use the
/// shortest representation that round-trips.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<(), HarnessError> {
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.canonical_cmp(b));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in sorted {
        let a = &r.axes;
        w.write_record([
            r.scenario.name().to_string(),
            cell(a.sites),
            cell(a.users),
            cell(a.q),
            cell(a.pilots),
            cell(a.theta),
            cell(a.sectors),
            cell(a.ones),
            cell(a.ell),
            cell(a.beta),
            cell(a.antennas),
            cell(a.snr_db),
            r.metric.to_string(),
            r.value.to_string(),
            r.stderr.to_string(),
            r.trials.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    write_csv(rows, std::io::BufWriter::new(file))
}
