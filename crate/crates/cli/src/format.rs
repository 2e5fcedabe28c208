//! Deterministic text formatting: floats at 17 significant digits so
//! every emitted number round-trips losslessly.

/// 17-significant-digit scientific notation; parses back bit-exact.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_float(s: &str) -> Option<f64> {
    let v: f64 = s.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// Minimal CSV writer: caller supplies header once, then rows of cells.
pub struct Csv {
    out: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            out: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trips_bit_exact() {
        for x in [
            0.0,
            1.0,
            -1.5,
            std::f64::consts::PI,
            2.0f64.sqrt(),
            1e-300,
            -3.141592653589793e250,
            f64::MIN_POSITIVE,
        ] {
            let s = float(x);
            let back = parse_float(&s).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn csv_shape() {
        let mut csv = Csv::new(&["a", "b"]);
        csv.row(&["1".into(), "2".into()]);
        assert_eq!(csv.finish(), "a,b\n1,2\n");
    }
}
