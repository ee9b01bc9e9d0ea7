//! Deterministic CSV writing.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use mfpa_core::{Field, Grid};

/// Shortest round-trip decimal form; exponent notation outside `[1e-4, 1e15)`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v == 0.0 || (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(file)))
}

pub fn finish<W: Write>(w: csv::Writer<W>, path: &Path) -> Result<()> {
    let mut inner = w.into_inner().map_err(|e| e.into_error()).with_context(|| format!("writing {}", path.display()))?;
    inner.flush().with_context(|| format!("writing {}", path.display()))
}

/// Long-format dump of a lattice field: one `t,e,value` row per node.
pub fn write_field(path: &Path, field: &Field, g: &Grid) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["t", "e", "value"])?;
    for n in 0..g.time_nodes() {
        for i in 0..g.energy_nodes() {
            w.write_record([fmt_f64(g.time(n)), fmt_f64(g.energy(i)), fmt_f64(field.get(n, i))])?;
        }
    }
    finish(w, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(1e-23), "1e-23");
        assert_eq!(fmt_f64(3.3333333333333335e-5), "3.3333333333333335e-5");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        for v in [1e-23, 0.1 + 0.2, 123456.789, 2.5e-5] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
