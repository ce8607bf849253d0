//! Fixed-format CSV so that reruns are byte-identical.

use std::fmt::Write;

/// A CSV cell. Floats always carry 17 significant digits.
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Csv {
    text: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: header.join(",") + "\n", width: header.len() }
    }

    pub fn row(&mut self, cells: impl IntoIterator<Item = Cell>) {
        let mut n = 0;
        for c in cells {
            if n > 0 {
                self.text.push(',');
            }
            match c {
                Cell::Int(i) => write!(self.text, "{i}").unwrap(),
                Cell::Float(v) => self.text.push_str(&float(v)),
                Cell::Bool(b) => self.text.push_str(if b { "true" } else { "false" }),
            }
            n += 1;
        }
        debug_assert_eq!(n, self.width, "row width");
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}
