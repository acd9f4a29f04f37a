//! File emission: ledger CSV, per-step field snapshots and the run manifest.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::diagnostics::{order_parameters, LedgerRow, LEDGER_HEADER};
use crate::driver::SimulationState;
use crate::error::{Error, Result};
use crate::grid::DomainGrid;
use crate::params::Problem;
use crate::sphere::moments;

pub const LEDGER_FILE: &str = "ledger.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const SNAPSHOT_DIR: &str = "snapshots";

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Streams ledger rows to `ledger.csv`, flushing after every row.
pub struct LedgerWriter {
    path: PathBuf,
    inner: csv::Writer<File>,
}

impl LedgerWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        inner.write_record(LEDGER_HEADER).map_err(|e| csv_error(&path, e))?;
        Ok(LedgerWriter { path, inner })
    }

    pub fn write(&mut self, row: &LedgerRow) -> Result<()> {
        self.inner.serialize(row).map_err(|e| csv_error(&self.path, e))?;
        self.inner.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Writes a whole ledger in one go.
pub fn write_ledger(path: impl AsRef<Path>, rows: &[LedgerRow]) -> Result<()> {
    let mut w = LedgerWriter::create(path)?;
    rows.iter().try_for_each(|r| w.write(r))
}

/// Reads a ledger CSV, checking the header.
pub fn read_ledger(path: impl AsRef<Path>) -> Result<Vec<LedgerRow>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(LEDGER_HEADER) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("unexpected ledger header {:?}", header.as_slice()),
        });
    }
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Ordered `key = value` pairs describing a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = String::from("# active-doi run manifest\n");
        for (k, v) in &self.entries {
            text.push_str(&format!("{k} = {v}\n"));
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Blank lines and lines starting with `#` are skipped.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut out = Manifest::default();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: format!("expected key = value, found {line:?}"),
            })?;
            out.set(k.trim(), v.trim());
        }
        Ok(out)
    }
}

fn snapshot_writer(path: &Path, problem: &Problem, state: &SimulationState, field: &str) -> Result<BufWriter<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let g = &problem.grid;
    writeln!(
        w,
        "# field = {field}\n# step = {}\n# t = {}\n# nx = {}\n# ny = {}\n# lx = {}\n# ly = {}\n# bc_mode = {}",
        state.step,
        state.t,
        g.nx,
        g.ny,
        g.lx,
        g.ly,
        g.bc.as_str()
    )
    .map_err(|e| Error::io(path, e))?;
    Ok(w)
}

fn write_cells(w: &mut BufWriter<File>, g: &DomainGrid, values: &[&[f64]]) -> std::io::Result<()> {
    for j in 0..g.ny {
        for i in 0..g.nx {
            let (x, y) = g.center(i, j);
            let c = g.cell(i, j);
            write!(w, "{i},{j},{x},{y}")?;
            for v in values {
                write!(w, ",{}", v[c])?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Writes cell-centred snapshots (`omega`, `order`, `director`, `velocity`,
/// `pressure`) and, if `full_psi`, the whole density. Returns the paths.
pub fn write_snapshot(
    dir: impl AsRef<Path>,
    problem: &Problem,
    state: &SimulationState,
    full_psi: bool,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let g = &problem.grid;
    let (omega, s) = moments(g, &problem.orient, &state.psi);
    let (order, director) = order_parameters(&omega, &s);
    let (ux, uy) = state.flow.u.centered(g);
    let mut paths = Vec::new();
    let mut emit = |name: &str, columns: &str, rows: &mut dyn FnMut(&mut BufWriter<File>) -> std::io::Result<()>| -> Result<()> {
        let path = dir.join(format!("{name}_{:06}.csv", state.step));
        let mut w = snapshot_writer(&path, problem, state, name)?;
        writeln!(w, "{columns}").and_then(|_| rows(&mut w)).and_then(|_| w.flush())
            .map_err(|e| Error::io(&path, e))?;
        paths.push(path);
        Ok(())
    };
    emit("omega", "i,j,x,y,omega", &mut |w| write_cells(w, g, &[&omega.data]))?;
    emit("order", "i,j,x,y,order", &mut |w| write_cells(w, g, &[&order.data]))?;
    emit("director", "i,j,x,y,director", &mut |w| write_cells(w, g, &[&director.data]))?;
    emit("velocity", "i,j,x,y,ux,uy", &mut |w| write_cells(w, g, &[&ux.data, &uy.data]))?;
    emit("pressure", "i,j,x,y,pressure", &mut |w| write_cells(w, g, &[&state.flow.p.data]))?;
    if full_psi {
        let o = &problem.orient;
        emit("psi", "i,j,k,phi,psi", &mut |w: &mut BufWriter<File>| {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let cell = state.psi.cell(g.cell(i, j));
                    for (k, v) in cell.iter().enumerate() {
                        writeln!(w, "{i},{j},{k},{},{v}", o.angle(k))?;
                    }
                }
            }
            Ok(())
        })?;
    }
    Ok(paths)
}

/// Reads the metadata comments and numeric columns of a snapshot.
pub fn read_snapshot(path: impl AsRef<Path>) -> Result<(Manifest, Vec<String>, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut meta = Manifest::default();
    let mut header = None;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let bad = |message: String| Error::Parse { path: path.to_path_buf(), line: n + 1, message };
        if let Some(c) = line.strip_prefix('#') {
            if let Some((k, v)) = c.split_once('=') {
                meta.set(k.trim(), v.trim());
            }
        } else if header.is_none() {
            header = Some(line.split(',').map(str::to_string).collect::<Vec<_>>());
        } else if !line.is_empty() {
            let row = line
                .split(',')
                .map(|s| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
    }
    let header = header.ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: "missing header row".into(),
    })?;
    Ok((meta, header, rows))
}
