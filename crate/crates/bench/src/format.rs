//! CSV cell formatting.

use std::fmt::Write;

/// Ten significant digits, trailing zeros dropped; scientific notation
/// outside `[1e-5, 1e15)`.
pub fn float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    let a = v.abs();
    if (1e-5..1e15).contains(&a) {
        let exp = a.log10().floor() as i32;
        let decimals = (9 - exp).max(0) as usize;
        trim(format!("{v:.decimals$}"))
    } else {
        let s = format!("{v:.9e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent");
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

/// Empty cell for `None`.
pub fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

fn trim(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Accumulates rows into an LF-terminated CSV document.
#[derive(Debug, Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Csv::default();
        c.row(header.iter().copied());
        c
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for (i, cell) in cells.into_iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            write!(self.buf, "{}", cell.as_ref()).unwrap();
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats() {
        assert_eq!(float(0.0), "0");
        assert_eq!(float(0.5), "0.5");
        assert_eq!(float(1.0), "1");
        assert_eq!(float(0.999), "0.999");
        assert_eq!(float(1.0 / 3.0), "0.3333333333");
        assert_eq!(float(123456.789), "123456.789");
        assert_eq!(float(-2.5), "-2.5");
        assert_eq!(float(2.5e-7), "2.5e-7");
        assert_eq!(float(1e20), "1e20");
        assert_eq!(float(0.91), "0.91");
        assert_eq!(float(f64::NAN), "nan");
        assert_eq!(opt_float(None), "");
    }

    #[test]
    fn ten_significant_digits_round_trip() {
        for v in [0.123456789012, 98765.4321012, 3.0e-5, 7.77e14] {
            let back: f64 = float(v).parse().unwrap();
            assert!(((back - v) / v).abs() < 1e-9, "{v} -> {}", float(v));
        }
    }

    #[test]
    fn csv_rows() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(["1", "2"]);
        assert_eq!(c.finish(), "a,b\n1,2\n");
    }
}
