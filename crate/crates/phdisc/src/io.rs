//! Matrix triplet files and the simulation CSV.
//!
//! Triplet files hold one `row col value` entry per line, 0-based, with the
//! value in 17 significant digits. A leading `# rows cols nnz` line records
//! the shape.

use std::io::{self, BufRead, Write};

use phdisc_core::simulate::SimulationResult;
use phdisc_core::sparse::CsrMatrix;

pub const CSV_HEADER: [&str; 8] = ["t", "H", "dHdt", "power", "u1", "u2", "y1", "y2"];

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_triplets<W: Write>(mut out: W, m: &CsrMatrix) -> io::Result<()> {
    writeln!(out, "# {} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for (i, j, v) in m.triplets() {
        writeln!(out, "{i} {j} {}", sci(v))?;
    }
    Ok(())
}

/// Shape and entries of a triplet file.
pub type Triplets = ((usize, usize), Vec<(usize, usize, f64)>);

pub fn read_triplets<R: BufRead>(input: R) -> io::Result<Triplets> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut shape = None;
    let mut entries = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let fields: Vec<&str> = line.trim_start_matches('#').split_whitespace().collect();
        if line.starts_with('#') {
            if let [r, c, _] = fields[..] {
                let bad_shape = || bad(format!("line {}: bad shape", n + 1));
                shape = Some((r.parse().map_err(|_| bad_shape())?, c.parse().map_err(|_| bad_shape())?));
            }
            continue;
        }
        match fields[..] {
            [] => continue,
            [i, j, v] => {
                let malformed = || bad(format!("line {}: malformed entry", n + 1));
                let i = i.parse().map_err(|_| malformed())?;
                let j = j.parse().map_err(|_| malformed())?;
                let v = v.parse().map_err(|_| malformed())?;
                entries.push((i, j, v));
            }
            _ => return Err(bad(format!("line {}: expected `row col value`", n + 1))),
        }
    }
    let shape = shape.ok_or_else(|| bad("missing `# rows cols nnz` header".into()))?;
    Ok((shape, entries))
}

/// One row per grid point: `t,H,dHdt,power,u1,u2,y1,y2`.
pub fn write_csv<W: Write>(out: W, r: &SimulationResult) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for k in 0..r.len() {
        let (u, y) = (r.inputs[k], r.outputs[k]);
        let row = [
            r.times[k],
            r.hamiltonian[k],
            r.dh_dt[k],
            r.power[k],
            u[0],
            u[1],
            y[0],
            y[1],
        ];
        w.write_record(row.iter().map(|v| sci(*v)))?;
    }
    w.flush()?;
    Ok(())
}
