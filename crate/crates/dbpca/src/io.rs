//! CSV serialization: dense matrices (rows = dimensions, columns = samples),
//! 0/1 observation masks in the same layout, convergence traces, and the
//! point-track loader (rows = points, interleaved x/y columns per frame,
//! empty fields marking missing observations).

use crate::error::{Error, Result};
use crate::model::Mask;
use crate::trace::ConvergenceTrace;
use nalgebra::DMatrix;
use std::path::Path;

/// Reads a headerless numeric CSV into a dense matrix.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row: Vec<f64> = record
            .iter()
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| Error::Io(format!(
                    "unparsable numeric field `{f}` in {}",
                    path.display()
                )))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Io(format!("ragged rows in {}", path.display())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Io(format!("{} is empty", path.display())));
    }
    let (nr, nc) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(nr, nc, |r, c| rows[r][c]))
}

/// Reads a 0/1 mask CSV matching a D×N data layout.
pub fn read_mask_csv(path: &Path, dim: usize, len: usize) -> Result<Mask> {
    let m = read_matrix_csv(path)?;
    if m.nrows() != dim || m.ncols() != len {
        return Err(Error::Io(format!(
            "mask {} is {}x{}, expected {}x{}",
            path.display(),
            m.nrows(),
            m.ncols(),
            dim,
            len
        )));
    }
    let mut flags = vec![false; dim * len];
    for n in 0..len {
        for d in 0..dim {
            flags[n * dim + d] = match m[(d, n)] {
                v if v == 0.0 => false,
                v if v == 1.0 => true,
                v => {
                    return Err(Error::Io(format!(
                        "mask entry ({d},{n}) must be 0 or 1, got {v}"
                    )))
                }
            };
        }
    }
    Mask::from_flags(dim, len, flags)
}

pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{}", m[(r, c)])).collect();
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_mask_csv(path: &Path, mask: &Mask) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for d in 0..mask.dim() {
        let row: Vec<&str> = (0..mask.len())
            .map(|n| if mask.is_observed(d, n) { "1" } else { "0" })
            .collect();
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes a convergence trace with the resolved config hash on every row.
pub fn write_trace_csv(path: &Path, trace: &ConvergenceTrace, config_hash: &str) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().from_path(path)?;
    writer.write_record([
        "iteration",
        "objective",
        "primal_residual",
        "max_edge_gap",
        "wall_ms",
        "config_hash",
    ])?;
    for row in &trace.rows {
        writer.write_record([
            row.iteration.to_string(),
            format!("{}", row.objective),
            format!("{}", row.primal_residual),
            format!("{}", row.max_edge_gap),
            format!("{}", row.wall_ms),
            config_hash.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// A loaded point-track matrix: data (P × 2F), its observation mask, and
/// the number of frames dropped for having no observed points.
#[derive(Debug, Clone)]
pub struct TrackData {
    pub data: DMatrix<f64>,
    pub mask: Mask,
    pub dropped_frames: usize,
}

/// Loads point tracks: rows are points, columns interleave x/y per frame,
/// empty fields mean missing. A point missing either coordinate of a frame
/// loses both; frames observed by no point are dropped.
pub fn load_tracks(path: &Path) -> Result<TrackData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_path(path)?;
    let mut values: Vec<Vec<Option<f64>>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row: Vec<Option<f64>> = record
            .iter()
            .map(|f| {
                let t = f.trim();
                if t.is_empty() {
                    Ok(None)
                } else {
                    t.parse::<f64>().map(Some).map_err(|_| {
                        Error::Io(format!("unparsable field `{t}` in {}", path.display()))
                    })
                }
            })
            .collect::<Result<_>>()?;
        if let Some(first) = values.first() {
            if first.len() != row.len() {
                return Err(Error::Io(format!("ragged rows in {}", path.display())));
            }
        }
        values.push(row);
    }
    if values.is_empty() {
        return Err(Error::Io(format!("{} is empty", path.display())));
    }
    let cols = values[0].len();
    if cols == 0 || cols % 2 != 0 {
        return Err(Error::Io(format!(
            "track file must have an even, positive column count, got {cols}"
        )));
    }
    let points = values.len();
    let frames = cols / 2;

    // joint (x, y) missingness per point-frame pair
    let mut kept_frames = Vec::new();
    for f in 0..frames {
        let any = (0..points).any(|p| values[p][2 * f].is_some() && values[p][2 * f + 1].is_some());
        if any {
            kept_frames.push(f);
        }
    }
    if kept_frames.is_empty() {
        return Err(Error::DegenerateData("no observed frames in track file".into()));
    }
    let dropped_frames = frames - kept_frames.len();

    let mut data = DMatrix::zeros(points, 2 * kept_frames.len());
    let mut flags = vec![false; points * 2 * kept_frames.len()];
    for (k, &f) in kept_frames.iter().enumerate() {
        for p in 0..points {
            let (x, y) = (values[p][2 * f], values[p][2 * f + 1]);
            if let (Some(x), Some(y)) = (x, y) {
                data[(p, 2 * k)] = x;
                data[(p, 2 * k + 1)] = y;
                flags[(2 * k) * points + p] = true;
                flags[(2 * k + 1) * points + p] = true;
            }
        }
    }
    let mask = Mask::from_flags(points, 2 * kept_frames.len(), flags)?;
    Ok(TrackData {
        data,
        mask,
        dropped_frames,
    })
}
