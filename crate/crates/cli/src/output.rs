//! CSV tables with a `#`-prefixed metadata block.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::config::ExperimentSpec;
use crate::error::{CliError, CliResult};

pub const TOOL: &str = concat!("mvoac ", env!("CARGO_PKG_VERSION"));

pub const CER_HEADER: &[&str] = &[
    "experiment", "channel", "m", "K", "p", "q", "z", "alpha", "snr_db", "trials", "cer", "ci_low",
    "ci_high",
];

pub const GEN_HEADER: &[&str] = &["index", "re", "im"];

pub const UAV_HEADER: &[&str] = &[
    "round", "t_seconds", "wp_index", "pos_x", "pos_y", "pos_z", "vel_x", "vel_y", "vel_z", "f_x",
    "f_y", "f_z", "mv_true_x", "mv_true_y", "mv_true_z", "mv_hat_x", "mv_hat_y", "mv_hat_z",
];

pub const PMEPR_HEADER: &[&str] = &[
    "experiment", "m", "K", "p", "q", "z", "alpha", "samples", "pmepr_db", "ccdf",
];

pub const LEMMA1_HEADER: &[&str] = &[
    "experiment", "channel", "m", "index", "K_plus", "K_minus", "K_zero", "alpha", "sigma2",
    "trials", "metric", "expected", "mean", "std_err", "z_score",
];

/// `x` with 9 significant digits, trailing zeros dropped.
pub fn fmt_sig(x: f64) -> String {
    fmt_digits(x, 9)
}

/// `x` with `digits` significant digits (1 to 17), trailing zeros dropped.
pub fn fmt_digits(x: f64, digits: usize) -> String {
    let digits = digits.clamp(1, 17);
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{x:.prec$e}", prec = digits - 1);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let fixed = format!("{x:.decimals$}");
    if fixed.contains('.') {
        fixed.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        fixed
    }
}

/// An output table under construction.
pub struct Table {
    meta: Vec<(String, String)>,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(spec: &ExperimentSpec, header: &[&str]) -> CliResult<Self> {
        let meta = vec![
            ("tool".to_string(), TOOL.to_string()),
            ("command".to_string(), spec.command().name().to_string()),
            ("seed".to_string(), spec.seed.to_string()),
            ("config_sha256".to_string(), spec.config_hash()),
        ];
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Self { meta, writer })
    }

    /// Extra `# key: value` line, after the standard ones.
    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn row<I, S>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn into_bytes(self) -> CliResult<Vec<u8>> {
        let body = self
            .writer
            .into_inner()
            .map_err(|e| CliError::Csv(e.into_error().into()))?;
        let mut out = Vec::with_capacity(body.len() + 256);
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {v}").expect("writing to a Vec");
        }
        out.extend_from_slice(&body);
        Ok(out)
    }

    /// Writes to `path`, or to stdout when there is none.
    pub fn emit(self, path: Option<&Path>) -> CliResult<()> {
        let bytes = self.into_bytes()?;
        match path {
            Some(p) => fs::write(p, bytes).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            }),
            None => std::io::stdout()
                .write_all(&bytes)
                .map_err(|source| CliError::Io {
                    path: "<stdout>".to_string(),
                    source,
                }),
        }
    }
}
