//! Plain-text problem dump.
//!
//! ```text
//! v2rdm-sdp 1
//! block <name> <dim>                  one per block, in order
//! c <block> <i> <j> <value>           upper-triangle objective nonzeros
//! row <row> <rhs> <tag>               tag: plain | trace | spin | def:<block>:<entry>
//! a <row> <block> <i> <j> <value>     constraint nonzeros
//! ```
//!
//! Values are written in shortest round-trip form, so a dump reloads bit-exactly.

use std::io::{BufRead, Write};

use super::problem::{BlockLayout, ConstraintEntry, ConstraintRow, ConstraintSystem, RowTag, SdpProblem};
use crate::error::{Error, Result};

const MAGIC: &str = "v2rdm-sdp 1";

fn tag_str(tag: RowTag) -> String {
    match tag {
        RowTag::Plain => "plain".into(),
        RowTag::Trace => "trace".into(),
        RowTag::Spin => "spin".into(),
        RowTag::Definition { block, entry } => format!("def:{block}:{entry}"),
    }
}

fn parse_tag(s: &str) -> Option<RowTag> {
    Some(match s {
        "plain" => RowTag::Plain,
        "trace" => RowTag::Trace,
        "spin" => RowTag::Spin,
        _ => {
            let mut it = s.strip_prefix("def:")?.split(':');
            let block = it.next()?.parse().ok()?;
            let entry = it.next()?.parse().ok()?;
            RowTag::Definition { block, entry }
        }
    })
}

pub fn write_problem<W: Write>(problem: &SdpProblem, mut w: W) -> Result<()> {
    writeln!(w, "{MAGIC}")?;
    let layout = problem.layout();
    for b in 0..layout.len() {
        writeln!(w, "block {} {}", layout.name(b), layout.dim(b))?;
    }
    for (b, c) in problem.objective.iter().enumerate() {
        for j in 0..c.ncols() {
            for i in 0..=j {
                if c[(i, j)] != 0.0 {
                    writeln!(w, "c {b} {i} {j} {}", c[(i, j)])?;
                }
            }
        }
    }
    for (n, row) in problem.constraints.rows.iter().enumerate() {
        writeln!(w, "row {n} {} {}", row.rhs, tag_str(row.tag))?;
        for e in &row.entries {
            writeln!(w, "a {n} {} {} {} {}", e.block, e.i, e.j, e.coef)?;
        }
    }
    Ok(())
}

pub fn read_problem<R: BufRead>(r: R) -> Result<SdpProblem> {
    let mut layout = BlockLayout::new();
    let mut objective_entries = Vec::new();
    let mut rows: Vec<ConstraintRow> = Vec::new();
    let mut saw_magic = false;

    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        let err = |message: &str| Error::Parse { line: lineno, message: message.to_string() };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_magic {
            if line != MAGIC {
                return Err(err("missing 'v2rdm-sdp 1' header"));
            }
            saw_magic = true;
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| err(&format!("bad integer '{s}'")));
        let real = |s: &str| s.parse::<f64>().map_err(|_| err(&format!("bad number '{s}'")));
        match (f[0], f.len()) {
            ("block", 3) => {
                layout.push(f[1], num(f[2])?);
            }
            ("c", 5) => objective_entries.push((num(f[1])?, num(f[2])?, num(f[3])?, real(f[4])?)),
            ("row", 4) => {
                if num(f[1])? != rows.len() {
                    return Err(err("rows must be numbered consecutively from 0"));
                }
                let tag = parse_tag(f[3]).ok_or_else(|| err(&format!("bad row tag '{}'", f[3])))?;
                rows.push(ConstraintRow::new(Vec::new(), real(f[2])?, tag));
            }
            ("a", 6) => {
                let n = num(f[1])?;
                let row = rows.get_mut(n).ok_or_else(|| err("entry for an undeclared row"))?;
                row.entries.push(ConstraintEntry {
                    block: num(f[2])?,
                    i: num(f[3])?,
                    j: num(f[4])?,
                    coef: real(f[5])?,
                });
            }
            _ => return Err(err(&format!("unrecognized record '{line}'"))),
        }
    }
    if !saw_magic {
        return Err(Error::Parse { line: 0, message: "empty input".into() });
    }

    let mut objective = layout.zeros();
    for (b, i, j, v) in objective_entries {
        if b >= layout.len() || i > j || j >= layout.dim(b) {
            return Err(Error::MalformedProblem(format!("objective entry ({b}, {i}, {j}) out of range")));
        }
        objective[b][(i, j)] = v;
        objective[b][(j, i)] = v;
    }
    let mut cs = ConstraintSystem::new(layout);
    for row in rows {
        cs.push(row);
    }
    SdpProblem::new(objective, cs)
}
