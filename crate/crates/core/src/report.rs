//! Stable text output: JSON with 17 significant digits, CSV with 12.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::inner_solver::TableRow;

/// Compact JSON formatter that writes every float as `d.dddddddddddddddde±x`
/// and non-finite floats as `null`.
#[derive(Debug, Default, Clone, Copy)]
pub struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` on one line followed by a newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// `%.12g`.
pub fn csv_number(value: f64) -> String {
    const DIGITS: i32 = 12;
    if value == 0.0 {
        return "0".into();
    }
    if value.is_nan() {
        return "nan".into();
    }
    if value.is_infinite() {
        return if value > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, value);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{value:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv_line(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| csv_number(*v))
        .collect::<Vec<_>>()
        .join(",")
}

/// Header plus one line per row.
pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(TableRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.n.to_string());
        out.push(',');
        out.push_str(&csv_line(&r.values()));
        out.push('\n');
    }
    out
}
