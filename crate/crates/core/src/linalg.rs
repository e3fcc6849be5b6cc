//! Dense matrices and row reduction over a [`Field`].

use std::fmt;

use serde::ser::SerializeSeq;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, Value};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Value>,
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Matrix {
        Matrix { field: field.clone(), rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: &Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: &Field, rows: Vec<Vec<Value>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch { expected: c, found: rows.iter().map(Vec::len).find(|&l| l != c).unwrap() });
        }
        Ok(Matrix { field: field.clone(), rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64(field: &Field, rows: &[&[i64]]) -> Matrix {
        let rows = rows.iter().map(|r| r.iter().map(|&v| field.from_i64(v)).collect()).collect();
        Matrix::from_rows(field, rows).expect("ragged matrix literal")
    }

    /// Parses `[[a,b],[c,d]]` with entries in the scalar format of `field`.
    pub fn parse(field: &Field, text: &str) -> Result<Matrix> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Syntax { pos: 0, msg: format!("bad matrix literal `{text}`") };
        let inner = s.strip_prefix("[[").and_then(|r| r.strip_suffix("]]")).ok_or_else(bad)?;
        let mut rows = Vec::new();
        for row in inner.split("],[") {
            rows.push(split_entries(row).iter().map(|e| field.parse_value(e)).collect::<Result<Vec<_>>>()?);
        }
        Matrix::from_rows(field, rows)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Value {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Value) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Value] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Matrix::identity(&self.field, self.rows)
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let f = &self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = f.zero();
                for k in 0..self.cols {
                    f.add_assign(&mut acc, &f.mul(self.get(i, k), other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[Value]) -> Vec<Value> {
        let f = &self.field;
        (0..self.rows)
            .map(|i| {
                let mut acc = f.zero();
                for (k, x) in v.iter().enumerate() {
                    f.add_assign(&mut acc, &f.mul(self.get(i, k), x));
                }
                acc
            })
            .collect()
    }

    /// Determinant by Gaussian elimination.
    pub fn det(&self) -> Value {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let f = &self.field;
        let n = self.rows;
        let mut a = self.clone();
        let mut det = f.one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !f.is_zero(a.get(r, c))) else {
                return f.zero();
            };
            if p != c {
                a.swap_rows(p, c);
                det = f.neg(&det);
            }
            let pivot = a.get(c, c).clone();
            det = f.mul(&det, &pivot);
            let inv = f.inv(&pivot).unwrap();
            for r in c + 1..n {
                let factor = f.mul(a.get(r, c), &inv);
                if !f.is_zero(&factor) {
                    a.axpy_row(r, c, &f.neg(&factor));
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        let f = &self.field;
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(f, n);
        for c in 0..n {
            let p = (c..n).find(|&r| !f.is_zero(a.get(r, c))).ok_or(Error::SingularMatrix)?;
            a.swap_rows(p, c);
            inv.swap_rows(p, c);
            let s = f.inv(a.get(c, c))?;
            a.scale_row(c, &s);
            inv.scale_row(c, &s);
            for r in 0..n {
                if r != c && !f.is_zero(a.get(r, c)) {
                    let factor = f.neg(a.get(r, c));
                    a.axpy_row(r, c, &factor);
                    inv.axpy_row(r, c, &factor);
                }
            }
        }
        Ok(inv)
    }

    pub fn rank(&self) -> usize {
        let mut ech = Echelon::new(&self.field, self.cols, 0);
        (0..self.rows).filter(|&i| ech.insert(self.row(i).to_vec(), Vec::new())).count()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn scale_row(&mut self, r: usize, s: &Value) {
        for j in 0..self.cols {
            let v = self.field.mul(self.get(r, j), s);
            self.set(r, j, v);
        }
    }

    // row[dst] += s * row[src]
    fn axpy_row(&mut self, dst: usize, src: usize, s: &Value) {
        for j in 0..self.cols {
            let v = self.field.add(self.get(dst, j), &self.field.mul(s, self.get(src, j)));
            self.set(dst, j, v);
        }
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|v| self.field.format_value(v)).collect()).collect()
    }
}

fn split_entries(row: &str) -> Vec<String> {
    // Commas inside bracketed extension-field literals do not separate entries.
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in row.chars() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur);
    out
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.to_strings().into_iter().map(|r| format!("[{}]", r.join(","))).collect();
        write!(f, "[{}]", rows.join(","))
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} over {}", self.field)
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = self.to_strings();
        let mut seq = s.serialize_seq(Some(rows.len()))?;
        for r in &rows {
            seq.serialize_element(r)?;
        }
        seq.end()
    }
}

/// Incrementally built reduced row echelon form.
///
/// Pivots are the highest nonzero column of each row, and every stored row
/// is zero in all other pivot columns, so [`Echelon::reduce`] returns a
/// canonical remainder. Each stored row optionally carries the combination
/// of inserted generators it equals.
#[derive(Clone, Debug)]
pub struct Echelon {
    field: Field,
    width: usize,
    ngens: usize,
    rows: Vec<EchelonRow>,
}

#[derive(Clone, Debug)]
struct EchelonRow {
    pivot: usize,
    row: Vec<Value>,
    combo: Vec<Value>,
}

impl Echelon {
    /// `ngens` is the length of combination vectors (0 disables tracking).
    pub fn new(field: &Field, width: usize, ngens: usize) -> Echelon {
        Echelon { field: field.clone(), width, ngens, rows: Vec::new() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.pivot).collect()
    }

    /// Reduces `v`, returning the canonical remainder and the combination of
    /// stored rows (in generator coordinates) that was subtracted.
    pub fn reduce(&self, v: &[Value]) -> (Vec<Value>, Vec<Value>) {
        assert_eq!(v.len(), self.width);
        let f = &self.field;
        let mut rem = v.to_vec();
        let mut combo = vec![f.zero(); self.ngens];
        for r in &self.rows {
            let c = rem[r.pivot].clone();
            if f.is_zero(&c) {
                continue;
            }
            let neg = f.neg(&c);
            for (x, y) in rem.iter_mut().zip(&r.row) {
                if !f.is_zero(y) {
                    f.add_assign(x, &f.mul(&neg, y));
                }
            }
            for (x, y) in combo.iter_mut().zip(&r.combo) {
                if !f.is_zero(y) {
                    f.add_assign(x, &f.mul(&c, y));
                }
            }
        }
        (rem, combo)
    }

    /// Adds a generator; returns whether it enlarged the span.
    /// `gen_combo` is its expression in generator coordinates.
    pub fn insert(&mut self, v: Vec<Value>, gen_combo: Vec<Value>) -> bool {
        let f = self.field.clone();
        let (mut rem, sub) = self.reduce(&v);
        let Some(pivot) = rem.iter().rposition(|x| !f.is_zero(x)) else {
            return false;
        };
        let mut combo: Vec<Value> = if self.ngens > 0 {
            gen_combo.iter().zip(&sub).map(|(g, s)| f.sub(g, s)).collect()
        } else {
            Vec::new()
        };
        let inv = f.inv(&rem[pivot]).unwrap();
        for x in rem.iter_mut().chain(combo.iter_mut()) {
            *x = f.mul(x, &inv);
        }
        for r in &mut self.rows {
            let c = r.row[pivot].clone();
            if f.is_zero(&c) {
                continue;
            }
            let neg = f.neg(&c);
            for (x, y) in r.row.iter_mut().zip(&rem) {
                f.add_assign(x, &f.mul(&neg, y));
            }
            for (x, y) in r.combo.iter_mut().zip(&combo) {
                f.add_assign(x, &f.mul(&neg, y));
            }
        }
        self.rows.push(EchelonRow { pivot, row: rem, combo });
        true
    }
}
