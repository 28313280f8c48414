//! alist interchange format for sparse parity-check matrices.
//!
//! Layout (all tokens space-separated, one group per line):
//!
//! ```text
//! N M
//! max_col_degree max_row_degree
//! col degrees (N entries)
//! row degrees (M entries)
//! N lines: 1-based row indices adjacent to each column
//! M lines: 1-based column indices adjacent to each row
//! ```
//!
//! The reader also accepts the zero-padded variant (adjacency lines padded
//! to the maximum degree with `0` entries) and verifies that the column
//! and row adjacency lists describe the same edge set.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{LdpcError, ParityCheckMatrix};

pub fn write_alist(h: &ParityCheckMatrix, path: &Path) -> Result<(), LdpcError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_alist_to(h, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_alist_to(h: &ParityCheckMatrix, out: &mut impl Write) -> Result<(), LdpcError> {
    let col_degrees = h.col_degrees();
    let row_degrees = h.row_degrees();
    writeln!(out, "{} {}", h.num_cols(), h.num_rows())?;
    writeln!(
        out,
        "{} {}",
        col_degrees.iter().max().copied().unwrap_or(0),
        row_degrees.iter().max().copied().unwrap_or(0)
    )?;
    writeln!(out, "{}", join(col_degrees.iter()))?;
    writeln!(out, "{}", join(row_degrees.iter()))?;
    for col in 0..h.num_cols() {
        writeln!(out, "{}", join(h.rows_of_col(col).iter().map(|r| r + 1)))?;
    }
    for row in 0..h.num_rows() {
        writeln!(out, "{}", join(h.cols_of_row(row).iter().map(|c| c + 1)))?;
    }
    Ok(())
}

pub fn read_alist(path: &Path) -> Result<ParityCheckMatrix, LdpcError> {
    read_alist_from(BufReader::new(File::open(path)?))
}

pub fn read_alist_from(reader: impl Read) -> Result<ParityCheckMatrix, LdpcError> {
    let mut lines = BufReader::new(reader).lines();
    let mut next_numbers = |label: &str| -> Result<Vec<usize>, LdpcError> {
        loop {
            let line = lines
                .next()
                .ok_or_else(|| LdpcError::AlistFormat(format!("missing {label} line")))??;
            if line.trim().is_empty() {
                continue;
            }
            return line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| {
                        LdpcError::AlistFormat(format!("bad token {tok:?} in {label} line"))
                    })
                })
                .collect();
        }
    };

    let dims = next_numbers("dimension")?;
    let [num_cols, num_rows] = dims[..] else {
        return Err(LdpcError::AlistFormat(format!(
            "dimension line needs two entries, got {}",
            dims.len()
        )));
    };
    let _max_degrees = next_numbers("max degree")?;
    let col_degrees = next_numbers("column degree")?;
    let row_degrees = next_numbers("row degree")?;
    if col_degrees.len() != num_cols || row_degrees.len() != num_rows {
        return Err(LdpcError::AlistFormat(
            "degree list length does not match declared dimensions".into(),
        ));
    }

    let mut read_adjacency = |count: usize,
                              degrees: &[usize],
                              limit: usize,
                              label: &str|
     -> Result<Vec<Vec<usize>>, LdpcError> {
        let mut lists = Vec::with_capacity(count);
        for (node, &degree) in degrees.iter().enumerate().take(count) {
            let entries = next_numbers(label)?;
            // Zero entries are padding; real indices are 1-based.
            let list: Vec<usize> = entries.into_iter().filter(|&e| e != 0).collect();
            if list.len() != degree {
                return Err(LdpcError::AlistFormat(format!(
                    "{label} {node}: {} entries but degree {degree}",
                    list.len()
                )));
            }
            if let Some(&bad) = list.iter().find(|&&e| e > limit) {
                return Err(LdpcError::AlistFormat(format!(
                    "{label} {node}: index {bad} exceeds {limit}"
                )));
            }
            lists.push(list.into_iter().map(|e| e - 1).collect());
        }
        Ok(lists)
    };

    let col_lists = read_adjacency(num_cols, &col_degrees, num_rows, "column list")?;
    let row_lists = read_adjacency(num_rows, &row_degrees, num_cols, "row list")?;

    let mut edges: Vec<(usize, usize)> = col_lists
        .iter()
        .enumerate()
        .flat_map(|(c, rows)| rows.iter().map(move |&r| (r, c)))
        .collect();
    let mut from_rows: Vec<(usize, usize)> = row_lists
        .iter()
        .enumerate()
        .flat_map(|(r, cols)| cols.iter().map(move |&c| (r, c)))
        .collect();
    edges.sort_unstable();
    from_rows.sort_unstable();
    if edges != from_rows {
        return Err(LdpcError::AlistFormat(
            "column and row adjacency lists disagree".into(),
        ));
    }
    ParityCheckMatrix::from_edges(num_rows, num_cols, &edges)
}

fn join(items: impl Iterator<Item = impl std::fmt::Display>) -> String {
    items
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}
