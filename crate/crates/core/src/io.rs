//! CSV files for IMU streams (`t,fx,fy,wz`) and ground truth (`t,x,y,vx,vy,psi`).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{ImuSample, NavState, Trajectory};

pub const IMU_HEADER: [&str; 4] = ["t", "fx", "fy", "wz"];
pub const GT_HEADER: [&str; 6] = ["t", "x", "y", "vx", "vy", "psi"];

fn read_rows<const N: usize>(path: &Path, header: [&str; N]) -> Result<Vec<[f64; N]>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let csv_err = |line: u64, message: String| Error::Csv {
        path: path.to_path_buf(),
        line,
        message,
    };

    let found = reader.headers().map_err(|e| csv_err(1, e.to_string()))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(csv_err(
            1,
            format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            csv_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != N {
            return Err(csv_err(line, format!("expected {N} fields, found {}", record.len())));
        }
        let mut row = [0.0; N];
        for (k, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| csv_err(line, format!("column `{}`: cannot parse `{field}`", header[k])))?;
            if !v.is_finite() {
                return Err(csv_err(line, format!("column `{}` is not finite", header[k])));
            }
            row[k] = v;
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_imu_csv(path: impl AsRef<Path>) -> Result<Vec<ImuSample>> {
    let path = path.as_ref();
    read_rows(path, IMU_HEADER)?
        .into_iter()
        .enumerate()
        .map(|(i, [t, fx, fy, omega_z])| {
            ImuSample::new(t, fx, fy, omega_z).map_err(|e| Error::Csv {
                path: path.to_path_buf(),
                line: i as u64 + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_gt_csv(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    let states = read_rows(path, GT_HEADER)?
        .into_iter()
        .map(|[t, x, y, vx, vy, psi]| NavState { t, x, y, vx, vy, psi })
        .collect();
    Trajectory::from_states(states).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })
}

fn write_rows<const N: usize>(path: &Path, header: [&str; N], rows: impl Iterator<Item = [f64; N]>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                w.write_all(b",").map_err(io)?;
            }
            write!(w, "{v}").map_err(io)?;
            first = false;
        }
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_imu_csv(path: impl AsRef<Path>, imu: &[ImuSample]) -> Result<()> {
    write_rows(
        path.as_ref(),
        IMU_HEADER,
        imu.iter().map(|s| [s.t, s.fx, s.fy, s.omega_z]),
    )
}

pub fn write_gt_csv(path: impl AsRef<Path>, traj: &Trajectory) -> Result<()> {
    write_rows(
        path.as_ref(),
        GT_HEADER,
        traj.states().iter().map(|s| [s.t, s.x, s.y, s.vx, s.vy, s.psi]),
    )
}
