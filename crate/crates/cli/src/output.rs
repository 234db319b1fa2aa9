//! CSV rendering and atomic file output.

use std::io::Write;
use std::path::Path;

use wishart_core::exact::to_literal;
use wishart_core::pep::PepCurve;

use crate::CliError;

pub const CSV_HEADER: [&str; 8] = ["gamma_db", "value", "stderr", "source", "n", "m", "alpha", "predicted_exponent"];

/// Weights as space-separated exact literals, e.g. `1/10 0 1`.
pub fn alpha_label(curve: &PepCurve) -> String {
    curve.alpha.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ")
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn slope_text(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        "nan".into()
    }
}

/// One row per grid point, then a `# fitted_slope=...` summary line.
pub fn render_csv(curve: &PepCurve, exact_column: bool) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if exact_column {
        header.push("exact");
    }
    w.write_record(&header)?;
    let alpha = alpha_label(curve);
    for p in &curve.points {
        let mut row = vec![
            format!("{}", p.gamma_db),
            sci(p.value),
            p.stderr.map(sci).unwrap_or_default(),
            curve.source.name().to_string(),
            curve.dims.n().to_string(),
            curve.dims.m().to_string(),
            alpha.clone(),
            curve.predicted_exponent.to_string(),
        ];
        if exact_column {
            row.push(p.exact.as_ref().map(to_literal).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    let mut text =
        String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.into_error()))?).expect("csv output is utf-8");
    text.push_str(&format!(
        "# fitted_slope={},predicted_exponent={}\n",
        slope_text(curve.fitted_slope),
        curve.predicted_exponent
    ));
    Ok(text)
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so an interrupted run never leaves a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}
