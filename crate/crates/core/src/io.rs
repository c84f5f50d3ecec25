//! JSON and CSV input/output. Floats are written with 17 significant digits.

use std::io::Write;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::algebra::BracketJson;
use crate::almost_abelian::{AaDiagnostics, AlmostAbelianJson};
use crate::catalog::Entry;
use crate::error::{Error, Result};
use crate::hermitian::HermitianFrame;
use crate::linalg;
use crate::nilpotent::NilDiagnostics;

/// `x` with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

struct SigFormatter;

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with 17-digit floats; non-finite values become `null`.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFormatter);
    value.serialize(&mut ser)?;
    // serde_json writes valid UTF-8
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}

/// Parses an input document: almost-abelian data (has key `"a"`) or a bracket
/// (has key `"entries"`). Errors carry the line and column of the problem.
pub fn parse_input(text: &str) -> Result<Entry> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::InvalidData("top-level JSON value must be an object".into()))?;
    if obj.contains_key("entries") {
        let doc: BracketJson = serde_json::from_str(text)?;
        let mu = doc.to_bracket()?;
        let frame = match &doc.j {
            Some(rows) => HermitianFrame::from_matrix(linalg::from_rows(rows)?)?,
            None => HermitianFrame::standard(doc.dim)?,
        };
        Ok(Entry::Nilpotent(mu, frame))
    } else if obj.contains_key("a") {
        let doc: AlmostAbelianJson = serde_json::from_str(text)?;
        Ok(Entry::AlmostAbelian(doc.to_data()?))
    } else {
        Err(Error::InvalidData("expected almost-abelian data (key \"a\") or a bracket (key \"entries\")".into()))
    }
}

pub fn read_input(path: &std::path::Path) -> Result<Entry> {
    parse_input(&std::fs::read_to_string(path)?)
}

/// Serializes an entry in the matching input schema.
pub fn entry_to_json(entry: &Entry) -> Result<String> {
    match entry {
        Entry::AlmostAbelian(d) => to_json_string(&AlmostAbelianJson::from_data(d)),
        Entry::Nilpotent(mu, frame) => {
            let mut doc = BracketJson::from_bracket(mu);
            doc.j = Some(linalg::to_rows(frame.j()));
            to_json_string(&doc)
        }
    }
}

fn write_table<W: Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(row.iter().map(|&x| fmt_f64(x)))?;
    }
    out.flush()?;
    Ok(())
}

pub const AA_HEADER: [&str; 7] = ["t", "a", "v_norm", "A_norm", "c", "skt_residual", "normality_defect"];

/// Reduced-flow trajectory CSV.
pub fn write_aa_csv<W: Write>(w: W, diags: &[AaDiagnostics]) -> Result<()> {
    write_table(
        w,
        &AA_HEADER,
        diags.iter().map(|d| vec![d.t, d.a, d.v_norm, d.a_norm, d.c, d.skt_residual, d.normality_defect]),
    )
}

pub const NIL_HEADER: [&str; 6] = ["t", "norm", "F", "tr_P", "center_drift", "skt_residual"];

/// Nilpotent-flow trajectory CSV.
pub fn write_nil_csv<W: Write>(w: W, diags: &[NilDiagnostics]) -> Result<()> {
    write_table(
        w,
        &NIL_HEADER,
        diags.iter().map(|d| vec![d.t, d.norm, d.f, d.tr_p, d.center_drift, d.skt_residual]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        let x = std::f64::consts::PI;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        let j = to_json_string(&serde_json::json!({"x": 0.5, "n": f64::NAN})).unwrap();
        assert_eq!(j, r#"{"n":null,"x":5.0000000000000000e-1}"#);
    }

    #[test]
    fn input_roundtrip() {
        for name in catalog::NAMES {
            let entry = catalog::by_name(name).unwrap();
            let text = entry_to_json(&entry).unwrap();
            let back = parse_input(&text).unwrap();
            match (entry, back) {
                (Entry::AlmostAbelian(a), Entry::AlmostAbelian(b)) => assert_eq!(a, b),
                (Entry::Nilpotent(m1, f1), Entry::Nilpotent(m2, f2)) => {
                    assert_eq!(m1, m2);
                    assert_eq!(f1.j(), f2.j());
                }
                _ => panic!("kind changed for {name}"),
            }
        }
    }

    #[test]
    fn schema_errors_carry_position() {
        let err = parse_input("{\n  \"a\": 1,\n  \"v\": [0, 0],\n  \"A\": [[0, 0], [0, 0]],\n  \"oops\": 3\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 5"), "{msg}");
        assert!(parse_input("[1, 2]").is_err());
        assert!(parse_input("{\"b\": 1}").is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let d = catalog::steady10();
        let cfg = crate::almost_abelian::reduced_config(1.0);
        let tr = crate::almost_abelian::integrate_reduced_flow(&d, Default::default(), &cfg).unwrap();
        let mut buf = Vec::new();
        write_aa_csv(&mut buf, &tr.diagnostics).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,a,v_norm,A_norm,c,skt_residual,normality_defect");
        assert_eq!(text.lines().count(), tr.diagnostics.len() + 1);
    }
}
