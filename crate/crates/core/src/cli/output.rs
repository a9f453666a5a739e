use std::str::FromStr;

use serde_json::{Number, Value};

/// Fixed scientific notation with 17 significant digits.
pub(crate) fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rewrites every non-integer number in `v` with [`format_float`].
pub(crate) fn normalize_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().filter(|x| x.is_finite()) {
                *n = Number::from_str(&format_float(x)).expect("formatted floats parse");
            }
        }
        Value::Array(items) => items.iter_mut().for_each(normalize_floats),
        Value::Object(map) => map.values_mut().for_each(normalize_floats),
        _ => {}
    }
}

/// A numeric table with a header row.
pub(crate) struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Csv {
    pub(crate) fn new(header: Vec<String>) -> Self {
        Csv { header, rows: Vec::new() }
    }

    pub(crate) fn push(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row.to_vec());
    }

    pub(crate) fn render(&self) -> Result<String, String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| e.to_string())?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| format_float(x))).map_err(|e| e.to_string())?;
        }
        let bytes = w.into_inner().map_err(|e| e.to_string())?;
        String::from_utf8(bytes).map_err(|e| e.to_string())
    }
}
