//! Report serialization: CSV tables, a binary strip-field format and the
//! sparse triplet export.
//!
//! Floats are written with 17 significant digits so that values survive a
//! text round trip bit for bit.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::mellin::{Half, StripField, StripGrid};
use crate::scalar::{Cplx, Real};
use crate::singular::SobolevScan;
use crate::torus::heat::GrowthReport;
use crate::torus::{DiscreteOperator, HeatRun, RegularityProbeReport};

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt<T: Real>(x: T) -> String {
    fmt_f64(x.as_f64())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Generic numeric table: a header and rows of preformatted cells.
pub fn write_table<W: Write>(w: W, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = writer(w);
    out.write_record(header).map_err(csv_err)?;
    for r in rows {
        out.write_record(&r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// A CSV table read back as its header and numeric columns. Non-numeric
/// cells are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn read_numeric_table<R: Read>(r: R) -> Result<NumericTable> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|c| c.parse::<f64>().map_err(|_| Error::Format(format!("row {}: '{c}' is not a number", line + 2))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(NumericTable { header, rows })
}

pub fn write_strip_field_csv<W: Write, T: Real>(w: W, field: &StripField<T>) -> Result<()> {
    let g = &field.grid;
    let header: Vec<String> = ["half", "x", "u", "t", "re", "im"].iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::with_capacity(2 * g.len());
    for (h, sign) in [(Half::Positive, 1.0), (Half::Negative, -1.0)] {
        for i in 0..g.nx {
            for k in 0..g.n_tau {
                let v = field.at(h, i, k);
                rows.push(vec![
                    fmt_f64(sign),
                    fmt(g.x(i)),
                    fmt(g.u(k)),
                    fmt_f64(sign * g.t(k).as_f64()),
                    fmt(v.re),
                    fmt(v.im),
                ]);
            }
        }
    }
    write_table(w, &header, rows)
}

const STRIP_MAGIC: &[u8; 8] = b"DGLSTRP1";

/// Little-endian layout: magic, `nx: u64`, `n_tau: u64`, `u_min: f64`,
/// `u_max: f64`, then `(re, im)` pairs for the positive half followed by the
/// negative half, each row-major with `t` fastest.
pub fn write_strip_field_bin<W: Write, T: Real>(mut w: W, field: &StripField<T>) -> Result<()> {
    let g = &field.grid;
    w.write_all(STRIP_MAGIC)?;
    w.write_all(&(g.nx as u64).to_le_bytes())?;
    w.write_all(&(g.n_tau as u64).to_le_bytes())?;
    w.write_all(&g.u_min.as_f64().to_le_bytes())?;
    w.write_all(&g.u_max.as_f64().to_le_bytes())?;
    for v in field.pos.iter().chain(&field.neg) {
        w.write_all(&v.re.as_f64().to_le_bytes())?;
        w.write_all(&v.im.as_f64().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_strip_field_bin<R: Read>(mut r: R) -> Result<StripField<f64>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != STRIP_MAGIC {
        return Err(Error::Format("not a strip-field file (bad magic)".into()));
    }
    let mut b8 = [0u8; 8];
    let mut next_u64 = |r: &mut R| -> Result<u64> {
        r.read_exact(&mut b8)?;
        Ok(u64::from_le_bytes(b8))
    };
    let nx = next_u64(&mut r)? as usize;
    let n_tau = next_u64(&mut r)? as usize;
    let u_min = f64::from_bits(next_u64(&mut r)?);
    let u_max = f64::from_bits(next_u64(&mut r)?);
    let grid = StripGrid::new(nx, u_min, u_max, n_tau)?;
    let n = grid.len();
    let mut values = Vec::with_capacity(2 * n);
    for _ in 0..2 * n {
        let re = f64::from_bits(next_u64(&mut r)?);
        let im = f64::from_bits(next_u64(&mut r)?);
        values.push(Cplx::new(re, im));
    }
    let neg = values.split_off(n);
    Ok(StripField { grid, pos: values, neg })
}

fn s_label<T: Real>(s: T) -> String {
    format!("h{}", s.as_f64())
}

/// Columns `tau, mean, mean_zero_l2, h<s>...`.
pub fn write_heat_run_csv<W: Write, T: Real>(w: W, run: &HeatRun<T>) -> Result<()> {
    let mut header: Vec<String> = vec!["tau".into(), "mean".into(), "mean_zero_l2".into()];
    header.extend(run.s_values.iter().map(|&s| s_label(s)));
    let rows = (0..run.tau.len()).map(|n| {
        let mut r = vec![fmt(run.tau[n]), fmt(run.mean[n]), fmt(run.mean_zero_l2[n])];
        r.extend(run.norms.iter().map(|series| fmt(series[n])));
        r
    });
    write_table(w, &header, rows)
}

/// Long format `s, tau, slope`.
pub fn write_growth_csv<W: Write, T: Real>(w: W, reports: &[GrowthReport<T>]) -> Result<()> {
    let header: Vec<String> = ["s", "tau", "slope"].iter().map(|s| s.to_string()).collect();
    let rows = reports
        .iter()
        .flat_map(|r| r.slope_tau.iter().zip(&r.slopes).map(move |(&t, &v)| vec![fmt(r.s), fmt(t), fmt(v)]));
    write_table(w, &header, rows)
}

/// Long format `s, eps, input_norm, output_norm, ratio`.
pub fn write_probe_csv<W: Write, T: Real>(w: W, rep: &RegularityProbeReport<T>) -> Result<()> {
    let header: Vec<String> =
        ["s", "eps", "input_norm", "output_norm", "ratio"].iter().map(|s| s.to_string()).collect();
    let rows = rep.s_values.iter().enumerate().flat_map(|(k, &s)| {
        rep.eps.iter().enumerate().map(move |(e, &eps)| {
            vec![fmt(s), fmt(eps), fmt(rep.input_norms[k][e]), fmt(rep.output_norms[k][e]), fmt(rep.ratios[k][e])]
        })
    });
    write_table(w, &header, rows)
}

/// Long format `r, cutoff, norm`.
pub fn write_sobolev_scan_csv<W: Write>(w: W, scan: &SobolevScan) -> Result<()> {
    let header: Vec<String> = ["r", "cutoff", "norm"].iter().map(|s| s.to_string()).collect();
    let rows = scan.r_values.iter().enumerate().flat_map(|(i, &r)| {
        scan.cutoffs.iter().enumerate().map(move |(k, &c)| vec![fmt_f64(r), fmt_f64(c), fmt_f64(scan.norms[i][k])])
    });
    write_table(w, &header, rows)
}

/// Plain-text sparse export: comment lines start with `#`, then a line
/// `rows cols nnz`, then one `row col value` line per entry (0-based).
pub fn write_triplets<W: Write, T: Real>(mut w: W, op: &DiscreteOperator<T>) -> Result<()> {
    let trip = op.triplets();
    let n = op.grid.len();
    writeln!(w, "# sparse triplets, 0-based, row-major; flat index = i * nt + j")?;
    writeln!(w, "# grid nx = {} nt = {}", op.grid.nx, op.grid.nt)?;
    writeln!(w, "{n} {n} {}", trip.len())?;
    for (r, c, v) in trip {
        writeln!(w, "{r} {c} {}", fmt(v))?;
    }
    w.flush()?;
    Ok(())
}

/// `(rows, cols, entries)` as read back from a triplet file.
pub type TripletMatrix = (usize, usize, Vec<(usize, usize, f64)>);

/// Reads [`write_triplets`] output.
pub fn read_triplets<R: Read>(mut r: R) -> Result<TripletMatrix> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let head = lines.next().ok_or_else(|| Error::Format("missing size line".into()))?;
    let dims: Vec<usize> = head
        .split_whitespace()
        .map(|v| v.parse().map_err(|_| Error::Format(format!("bad size line '{head}'"))))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(Error::Format(format!("bad size line '{head}'")));
    }
    let mut out = Vec::with_capacity(dims[2]);
    for l in lines {
        let p: Vec<&str> = l.split_whitespace().collect();
        let bad = || Error::Format(format!("bad entry line '{l}'"));
        if p.len() != 3 {
            return Err(bad());
        }
        out.push((
            p[0].parse().map_err(|_| bad())?,
            p[1].parse().map_err(|_| bad())?,
            p[2].parse().map_err(|_| bad())?,
        ));
    }
    if out.len() != dims[2] {
        return Err(Error::Format(format!("expected {} entries, found {}", dims[2], out.len())));
    }
    Ok((dims[0], dims[1], out))
}
