//! Plain-text CSV form of a grid function.
//!
//! ```text
//! # grid-function v1
//! nx,ny,nt,Lx,Ly,T,x0,y0,t0,levels,gamma
//! 4,4,2,1,1,0.5,0,0,0,3,left;right;bottom;top
//! <one line of nx+1 values per (level, row)>
//! ```
//!
//! Levels are written in order, rows bottom to top, values left to right.
//! Numbers use the shortest representation that reads back exactly.

use std::fmt::Write as _;
use std::path::Path;

use super::{EdgeSet, GridFunction, SpaceTimeGrid};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "# grid-function v1";
const COLUMNS: &str = "nx,ny,nt,Lx,Ly,T,x0,y0,t0,levels,gamma";

impl GridFunction {
    pub fn to_csv_string(&self) -> String {
        let g = self.grid();
        let mut s = String::new();
        let _ = writeln!(s, "{CSV_HEADER}");
        let _ = writeln!(s, "{COLUMNS}");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            g.nx,
            g.ny,
            g.nt,
            g.lx,
            g.ly,
            g.t_final,
            g.x0,
            g.y0,
            g.t0,
            self.n_levels(),
            g.gamma.to_list()
        );
        for row in self.values().chunks(g.nx + 1) {
            let mut first = true;
            for v in row {
                if !first {
                    s.push(',');
                }
                first = false;
                let _ = write!(s, "{v}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let perr = |line: usize, message: &str| Error::Parse {
            line: line + 1,
            message: message.to_string(),
        };
        match lines.next() {
            Some((_, l)) if l.trim() == CSV_HEADER => {}
            _ => return Err(perr(0, "missing grid-function header")),
        }
        match lines.next() {
            Some((_, l)) if l.trim() == COLUMNS => {}
            _ => return Err(perr(1, "missing column line")),
        }
        let (ln, meta) = lines.next().ok_or_else(|| perr(2, "missing grid line"))?;
        let f: Vec<&str> = meta.split(',').map(str::trim).collect();
        if f.len() != 11 {
            return Err(perr(ln, "grid line needs 11 fields"));
        }
        let us = |k: usize| f[k].parse::<usize>().map_err(|_| perr(ln, "bad integer"));
        let fl = |k: usize| f[k].parse::<f64>().map_err(|_| perr(ln, "bad number"));
        let gamma = EdgeSet::parse(f[10]).ok_or_else(|| perr(ln, "bad edge list"))?;
        let grid = SpaceTimeGrid {
            nx: us(0)?,
            ny: us(1)?,
            nt: us(2)?,
            lx: fl(3)?,
            ly: fl(4)?,
            t_final: fl(5)?,
            x0: fl(6)?,
            y0: fl(7)?,
            t0: fl(8)?,
            gamma,
        };
        let levels = us(9)?;
        grid.validate()?;
        let mut values = Vec::with_capacity(grid.space_len() * levels);
        for (ln, l) in lines {
            if l.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = l
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| perr(ln, "bad value"))?;
            if row.len() != grid.nx + 1 {
                return Err(perr(ln, "row length does not match nx + 1"));
            }
            values.extend(row);
        }
        if levels == 1 {
            GridFunction::space(grid, values)
        } else if levels == grid.levels() {
            GridFunction::space_time(grid, values)
        } else {
            Err(Error::shape(format!("level count {levels} does not match nt")))
        }
    }
}

pub fn write_csv(path: &Path, u: &GridFunction) -> Result<()> {
    std::fs::write(path, u.to_csv_string()).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<GridFunction> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    GridFunction::from_csv_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let g = SpaceTimeGrid::unit_square(3, 0.7, 2).unwrap();
        let u = GridFunction::space_time_from_fn(g, |x, y, t| (x * 1.1).sin() + y / 3.0 - t.exp()).unwrap();
        let back = GridFunction::from_csv_str(&u.to_csv_string()).unwrap();
        assert_eq!(back, u);
        let s = u.level(1);
        assert_eq!(GridFunction::from_csv_str(&s.to_csv_string()).unwrap(), s);
    }

    #[test]
    fn malformed_rejected() {
        assert!(GridFunction::from_csv_str("nonsense").is_err());
        let g = SpaceTimeGrid::unit_square(1, 1.0, 1).unwrap();
        let u = GridFunction::space_from_fn(g, |_, _| 1.0).unwrap();
        let bad = u.to_csv_string().replace("1,1\n", "1,x\n");
        assert!(matches!(GridFunction::from_csv_str(&bad), Err(Error::Parse { .. })));
    }
}
