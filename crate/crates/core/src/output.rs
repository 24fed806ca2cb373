//! Plain CSV writers for ensemble curves and figure bundles.
//!
//! Floats use Rust's shortest round-trip formatting, so identical results
//! give byte-identical files.

use std::io::{self, Write};

use crate::trajectory::{CurvePoint, EnsembleCurve};

pub const CURVE_HEADER: &str = "x,mean,stderr,n";
pub const SERIES_HEADER: &str = "series,x,mean,stderr,n";

/// A named curve inside a figure bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<CurvePoint>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<CurvePoint>) -> Self {
        Self {
            name: name.into(),
            points,
        }
    }

    /// Deterministic curve: stderr 0 and no sample count.
    pub fn exact(name: impl Into<String>, xy: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let points = xy
            .into_iter()
            .map(|(x, mean)| CurvePoint {
                x,
                mean,
                standard_error: 0.0,
                n_samples: 0,
            })
            .collect();
        Self::new(name, points)
    }
}

fn row(p: &CurvePoint) -> String {
    format!("{},{},{},{}", p.x, p.mean, p.standard_error, p.n_samples)
}

pub fn write_curve_csv<W: Write>(mut w: W, curve: &EnsembleCurve) -> io::Result<()> {
    writeln!(w, "{CURVE_HEADER}")?;
    for p in &curve.points {
        writeln!(w, "{}", row(p))?;
    }
    Ok(())
}

pub fn write_series_csv<W: Write>(mut w: W, series: &[Series]) -> io::Result<()> {
    writeln!(w, "{SERIES_HEADER}")?;
    for s in series {
        if s.name.contains([',', '"', '\n']) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("series name {:?} needs quoting", s.name),
            ));
        }
        for p in &s.points {
            writeln!(w, "{},{}", s.name, row(p))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{Axis, Observable};

    #[test]
    fn curve_layout() {
        let curve = EnsembleCurve {
            observable: Observable::Beta,
            axis: Axis::DetectionCount,
            points: vec![CurvePoint {
                x: 1.0,
                mean: 0.5,
                standard_error: 0.25,
                n_samples: 4,
            }],
        };
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &curve).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,mean,stderr,n\n1,0.5,0.25,4\n");
    }

    #[test]
    fn series_layout() {
        let s = [Series::exact("approx", [(2.0, 0.1)]), Series::exact("b", [])];
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &s).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "series,x,mean,stderr,n\napprox,2,0.1,0,0\n");
        assert!(write_series_csv(Vec::new(), &[Series::exact("a,b", [])]).is_err());
    }
}
