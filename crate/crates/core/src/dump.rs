//! Plain-text field dumps.
//!
//! ```text
//! pflab-fields 1
//! time 12.5
//! extents 64 64
//! spacing 1
//! boundaries periodic periodic
//! fields phi0 phi1 c
//! data
//! <one row per cell, first axis fastest, one column per field>
//! ```
//!
//! Values use the shortest representation that parses back to the same
//! `f64`, so a dump round-trips bit for bit.

use crate::grid::{Boundary, Grid, GridError};
use crate::model::State;
use std::io::{self, BufRead, Write};
use thiserror::Error;

const MAGIC: &str = "pflab-fields 1";

#[derive(Debug, Error)]
pub enum DumpError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub time: f64,
    pub extents: Vec<usize>,
    pub spacing: f64,
    pub boundaries: Vec<Boundary>,
    pub names: Vec<String>,
    /// One vector per field, indexed by cell.
    pub data: Vec<Vec<f64>>,
}

impl FieldDump {
    /// Dense phase fractions `phi<id>` followed by `c` when present.
    pub fn from_state(state: &State) -> Self {
        let grid = state.grid();
        let mut names = Vec::new();
        let mut data = Vec::new();
        for id in 0..state.phases.n_phases() {
            names.push(format!("phi{id}"));
            data.push(state.phases.phase(id as u16).into_values());
        }
        if let Some(c) = &state.concentration {
            names.push("c".into());
            data.push(c.values().to_vec());
        }
        FieldDump {
            time: state.time,
            extents: grid.extents().to_vec(),
            spacing: grid.spacing(),
            boundaries: grid.boundaries().to_vec(),
            names,
            data,
        }
    }

    pub fn grid(&self) -> Result<Grid, GridError> {
        Grid::new(&self.extents, self.spacing, &self.boundaries)
    }

    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.data[i].as_slice())
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "time {:?}", self.time)?;
        writeln!(w, "extents {}", join(self.extents.iter()))?;
        writeln!(w, "spacing {:?}", self.spacing)?;
        writeln!(w, "boundaries {}", join(self.boundaries.iter().map(|b| b.name())))?;
        writeln!(w, "fields {}", self.names.join(" "))?;
        writeln!(w, "data")?;
        let cells = self.data.first().map_or(0, |d| d.len());
        let mut line = String::new();
        for cell in 0..cells {
            line.clear();
            for (k, field) in self.data.iter().enumerate() {
                if k > 0 {
                    line.push(' ');
                }
                line.push_str(&format!("{:?}", field[cell]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self, DumpError> {
        let mut lines = r.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String), DumpError> {
            match lines.next() {
                Some((i, l)) => Ok((i + 1, l?)),
                None => Err(DumpError::Parse { line: 0, msg: format!("missing {what}") }),
            }
        };
        let (n, magic) = next("header")?;
        if magic.trim() != MAGIC {
            return Err(DumpError::Parse { line: n, msg: format!("expected `{MAGIC}`") });
        }
        let mut header = |key: &str| -> Result<(usize, Vec<String>), DumpError> {
            let (n, l) = next(key)?;
            let mut it = l.split_whitespace();
            if it.next() != Some(key) {
                return Err(DumpError::Parse { line: n, msg: format!("expected `{key}`") });
            }
            Ok((n, it.map(str::to_string).collect()))
        };
        let (n, t) = header("time")?;
        let time = parse_one(n, &t)?;
        let (n, e) = header("extents")?;
        let extents = e
            .iter()
            .map(|s| s.parse::<usize>().map_err(|err| DumpError::Parse { line: n, msg: err.to_string() }))
            .collect::<Result<Vec<_>, _>>()?;
        let (n, s) = header("spacing")?;
        let spacing = parse_one(n, &s)?;
        let (n, b) = header("boundaries")?;
        let boundaries = b
            .iter()
            .map(|s| Boundary::parse(s).ok_or_else(|| DumpError::Parse { line: n, msg: format!("unknown boundary `{s}`") }))
            .collect::<Result<Vec<_>, _>>()?;
        let (_, names) = header("fields")?;
        header("data")?;
        let grid = Grid::new(&extents, spacing, &boundaries)?;
        let mut data = vec![Vec::with_capacity(grid.cell_count()); names.len()];
        for _ in 0..grid.cell_count() {
            let (n, l) = next("data row")?;
            let mut count = 0;
            for (k, tok) in l.split_whitespace().enumerate() {
                let v: f64 = tok.parse().map_err(|_| DumpError::Parse { line: n, msg: format!("bad number `{tok}`") })?;
                if k >= names.len() {
                    return Err(DumpError::Parse { line: n, msg: "too many columns".into() });
                }
                data[k].push(v);
                count += 1;
            }
            if count != names.len() {
                return Err(DumpError::Parse { line: n, msg: format!("expected {} columns, got {count}", names.len()) });
            }
        }
        Ok(FieldDump { time, extents, spacing, boundaries, names, data })
    }
}

fn join<T: ToString>(it: impl Iterator<Item = T>) -> String {
    it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_one(line: usize, toks: &[String]) -> Result<f64, DumpError> {
    match toks {
        [one] => one.parse().map_err(|_| DumpError::Parse { line, msg: format!("bad number `{one}`") }),
        _ => Err(DumpError::Parse { line, msg: "expected one value".into() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::EmbeddingSpec;

    #[test]
    fn round_trip_is_bitwise() {
        let spec = EmbeddingSpec { length: 32.0, radius: 8.0, ..Default::default() };
        let state = spec.build().unwrap();
        let dump = FieldDump::from_state(&state);
        assert_eq!(dump.names, ["phi0", "phi1", "c"]);
        let mut buf = Vec::new();
        dump.write(&mut buf).unwrap();
        let back = FieldDump::read(buf.as_slice()).unwrap();
        assert_eq!(back.extents, dump.extents);
        for (a, b) in back.data.iter().zip(&dump.data) {
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        assert_eq!(back.grid().unwrap(), *state.grid());
    }

    #[test]
    fn truncated_dump_is_rejected() {
        let text = "pflab-fields 1\ntime 0.0\nextents 3 3\nspacing 1.0\nboundaries periodic periodic\nfields a\ndata\n1.0\n";
        assert!(matches!(FieldDump::read(text.as_bytes()), Err(DumpError::Parse { .. })));
    }
}
