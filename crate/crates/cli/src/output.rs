//! CSV emission. Floats are written in shortest round-trip form.

use std::io::Write;
use std::path::Path;

use rydphon_core::dynamics::TrajectoryRecord;
use rydphon_core::{SparseHermitian, C64};

use crate::CliError;

pub type CsvWriter = csv::Writer<Box<dyn Write>>;

pub fn writer(dir: Option<&Path>, file: &str) -> Result<CsvWriter, CliError> {
    let sink: Box<dyn Write> = match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            Box::new(std::io::BufWriter::new(std::fs::File::create(d.join(file))?))
        }
        None => Box::new(std::io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn row<const K: usize>(w: &mut CsvWriter, cells: [String; K]) -> Result<(), CliError> {
    w.write_record(cells)?;
    Ok(())
}

pub fn density(w: &mut CsvWriter, rec: &TrajectoryRecord) -> Result<(), CliError> {
    row(w, ["t", "site", "value"].map(String::from))?;
    for (t, rho) in rec.times.iter().zip(&rec.density) {
        for (j, v) in rho.iter().enumerate() {
            row(w, [num(*t), (j + 1).to_string(), num(*v)])?;
        }
    }
    Ok(w.flush()?)
}

pub fn variance(w: &mut CsvWriter, rec: &TrajectoryRecord) -> Result<(), CliError> {
    row(w, ["t", "sigma", "delta_sigma", "norm", "energy"].map(String::from))?;
    for i in 0..rec.times.len() {
        row(w, [rec.times[i], rec.sigma[i], rec.delta_sigma[i], rec.norm[i], rec.energy[i]].map(num))?;
    }
    Ok(w.flush()?)
}

pub fn beta(w: &mut CsvWriter, rec: &TrajectoryRecord, windows: &[[f64; 2]]) -> Result<(), CliError> {
    row(w, ["window_lo", "window_hi", "beta", "r_squared"].map(String::from))?;
    for &[lo, hi] in windows {
        match rec.fit_beta((lo, hi)) {
            Ok(f) => row(w, [lo, hi, f.beta, f.r_squared].map(num))?,
            Err(e) => eprintln!("warning: no fit for window [{lo}, {hi}]: {e}"),
        }
    }
    Ok(w.flush()?)
}

pub fn asymmetry(w: &mut CsvWriter, rec: &TrajectoryRecord) -> Result<(), CliError> {
    let dn = rec.asymmetry()?;
    row(w, ["t", "j", "delta_n"].map(String::from))?;
    for (t, d) in rec.times.iter().zip(&dn) {
        for (j, v) in d.iter().enumerate() {
            row(w, [num(*t), j.to_string(), num(*v)])?;
        }
    }
    Ok(w.flush()?)
}

pub fn sector_weight(w: &mut CsvWriter, rec: &TrajectoryRecord, weight: &[f64]) -> Result<(), CliError> {
    row(w, ["t", "weight"].map(String::from))?;
    for (t, v) in rec.times.iter().zip(weight) {
        row(w, [num(*t), num(*v)])?;
    }
    Ok(w.flush()?)
}

/// Upper-triangle entries as `row, col, re, im`.
pub fn triplets(w: &mut CsvWriter, h: &SparseHermitian) -> Result<(), CliError> {
    row(w, ["row", "col", "re", "im"].map(String::from))?;
    for (i, j, v) in h.upper_triplets() {
        let C64 { re, im } = v;
        row(w, [i.to_string(), j.to_string(), num(re), num(im)])?;
    }
    Ok(w.flush()?)
}
