use std::path::Path;

use crate::error::{CtError, Result};

pub const RESULTS_HEADER: &str = "n_angles,p_noise,filter,seed,mse,ssim,wall_time_ms";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub n_angles: usize,
    pub p_noise: f64,
    pub filter: String,
    pub seed: u64,
    pub mse: f64,
    pub ssim: f64,
    pub wall_time_ms: f64,
}

/// Results table with LF line endings; reals use 17 significant digits so
/// they parse back bit-exactly.
pub fn emit_results(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:.16e},{},{},{:.16e},{:.16e},{:.16e}\n",
            r.n_angles, r.p_noise, r.filter, r.seed, r.mse, r.ssim, r.wall_time_ms
        ));
    }
    out
}

pub fn write_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    std::fs::write(path, emit_results(rows)).map_err(|e| CtError::io(path, e))
}

pub fn parse_results(text: &str, origin: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines().enumerate();
    let err = |line: usize, msg: String| CtError::Parse {
        path: origin.to_string(),
        line,
        msg,
    };
    match lines.next() {
        Some((_, h)) if h.trim_end() == RESULTS_HEADER => {}
        _ => return Err(err(1, format!("expected header {RESULTS_HEADER:?}"))),
    }
    let mut rows = Vec::new();
    for (k, line) in lines {
        let lineno = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(err(lineno, format!("expected 7 fields, found {}", fields.len())));
        }
        let real = |s: &str, name: &str| {
            s.parse::<f64>()
                .map_err(|_| err(lineno, format!("bad {name} {s:?}")))
        };
        rows.push(ResultRow {
            n_angles: fields[0]
                .parse()
                .map_err(|_| err(lineno, format!("bad n_angles {:?}", fields[0])))?,
            p_noise: real(fields[1], "p_noise")?,
            filter: fields[2].to_string(),
            seed: fields[3]
                .parse()
                .map_err(|_| err(lineno, format!("bad seed {:?}", fields[3])))?,
            mse: real(fields[4], "mse")?,
            ssim: real(fields[5], "ssim")?,
            wall_time_ms: real(fields[6], "wall_time_ms")?,
        });
    }
    Ok(rows)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| CtError::io(path, e))?;
    parse_results(&text, &path.display().to_string())
}
