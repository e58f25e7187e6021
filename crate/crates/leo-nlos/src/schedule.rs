//! Reading an elevation-to-delay-spread schedule from CSV.

use std::path::Path;

use leo_nlos_core::delay_stats::DelaySpreadSchedule;

use crate::CliError;

/// Reads `elevation_deg,rms_delay_ns` rows; `#` lines are comments.
pub fn read_schedule(path: &Path) -> Result<DelaySpreadSchedule, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read schedule {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Usage(format!("bad schedule header: {e}")))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("schedule lacks a `{name}` column")))
    };
    let (ie, is) = (col("elevation_deg")?, col("rms_delay_ns")?);
    let mut knots = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Usage(format!("bad schedule row: {e}")))?;
        let parse = |i: usize| {
            record
                .get(i)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| CliError::Usage(format!("schedule row {} is not numeric", line + 1)))
        };
        knots.push((parse(ie)?, parse(is)?));
    }
    Ok(DelaySpreadSchedule::new(knots)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn reads_and_validates() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# custom\nelevation_deg,rms_delay_ns\n0,100\n45, 60\n90,20").unwrap();
        let s = read_schedule(f.path()).unwrap();
        assert_eq!(s.knots(), &[(0.0, 100.0), (45.0, 60.0), (90.0, 20.0)]);

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "elevation_deg,rms_delay_ns\n0,100\n80,20").unwrap();
        assert!(read_schedule(bad.path()).is_err());
        assert!(read_schedule(Path::new("/nonexistent/schedule.csv")).is_err());
    }
}
