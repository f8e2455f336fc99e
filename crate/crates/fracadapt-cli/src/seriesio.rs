//! Plain-text series files: one observation per line, 17 significant
//! digits (round-trip exact for f64), `#` lines are comments.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

pub fn write_series(path: &Path, values: &[f64], header: &str) -> Result<()> {
    let mut out = String::new();
    if !header.is_empty() {
        for line in header.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    for v in values {
        out.push_str(&format!("{v:.16e}\n"));
    }
    fs::write(path, out).with_context(|| format!("writing series file {}", path.display()))?;
    Ok(())
}

pub fn read_series(path: &Path) -> Result<Vec<f64>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading series file {}", path.display()))?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v: f64 = trimmed
            .parse()
            .with_context(|| format!("{}:{}: not a number: '{trimmed}'", path.display(), lineno + 1))?;
        values.push(v);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = std::env::temp_dir().join("fracadapt-seriesio-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("x.csv");
        let values = vec![1.0, -0.123456789123456789, 3.5e-12, 2.0_f64.sqrt()];
        write_series(&path, &values, "demo").unwrap();
        let back = read_series(&path).unwrap();
        assert_eq!(values.len(), back.len());
        for (a, b) in values.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
