use std::io::Write;
use std::path::Path;

use crate::matrix::ComplexMatrix;

/// Dense matrix as `row,col,re,im` lines (0-based indices).
pub fn matrix_csv(m: &ComplexMatrix) -> String {
    let mut s = String::from("row,col,re,im\n");
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            s.push_str(&format!("{i},{j},{:.16e},{:.16e}\n", z.re, z.im));
        }
    }
    s
}

pub fn write_matrix_csv(path: &Path, m: &ComplexMatrix) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(matrix_csv(m).as_bytes())
}
