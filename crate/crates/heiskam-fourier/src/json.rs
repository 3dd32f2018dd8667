//! JSON form of a [`TorusField`].

use num_complex::Complex64;
use serde_json::Value;

use crate::{FourierError, Result, TorusField};

/// Float with 17 significant digits, valid as a JSON number.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0.0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub(crate) fn field_to_json(f: &TorusField) -> String {
    let dim = f.dim();
    let mut s = format!(
        "{{\"n\":{},\"cutoff\":{},\"real_valued\":{},\"entries\":[",
        f.n(),
        f.cutoff(),
        f.is_real_valued()
    );
    for (i, (m, c)) in f.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let ms: Vec<String> = m[..dim].iter().map(|x| x.to_string()).collect();
        s.push_str(&format!(
            "[[{}],{},{}]",
            ms.join(","),
            fmt_f64(c.re),
            fmt_f64(c.im)
        ));
    }
    s.push_str("]}");
    s
}

fn bad(msg: &str) -> FourierError {
    FourierError::Json(msg.to_string())
}

pub(crate) fn field_from_json(s: &str) -> Result<TorusField> {
    let v: Value = serde_json::from_str(s).map_err(|e| FourierError::Json(e.to_string()))?;
    field_from_value(&v)
}

/// Parse an already-decoded JSON value.
pub fn field_from_value(v: &Value) -> Result<TorusField> {
    let n = v
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("missing n"))? as usize;
    if n == 0 || 2 * n > crate::MAX_DIM {
        return Err(bad("n out of range"));
    }
    let cutoff = v
        .get("cutoff")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("missing cutoff"))? as usize;
    let real = v
        .get("real_valued")
        .and_then(Value::as_bool)
        .unwrap_or(false);
    let entries = v
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing entries"))?;
    let mut f = TorusField::zero(n, cutoff, false);
    for e in entries {
        let arr = e
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| bad("entry must be [m, re, im]"))?;
        let m: Vec<i32> = arr[0]
            .as_array()
            .ok_or_else(|| bad("mode must be an array"))?
            .iter()
            .map(|x| {
                x.as_i64()
                    .map(|k| k as i32)
                    .ok_or_else(|| bad("mode entries must be integers"))
            })
            .collect::<Result<_>>()?;
        let re = arr[1].as_f64().ok_or_else(|| bad("re must be a number"))?;
        let im = arr[2].as_f64().ok_or_else(|| bad("im must be a number"))?;
        f.add_at(&m, Complex64::new(re, im))?;
    }
    if real {
        f.symmetrize_real();
    }
    Ok(f)
}
