//! File formats: coefficient JSON, arc-sample and curve CSV.
//!
//! Floats are written with 17 significant digits so that every file
//! round-trips bit-exactly.

use std::io::{Read, Write};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::corner::CornerConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{HarmonicCornerMap, SeriesCoefficients};
use crate::tracer::{CurveKind, TracedCurve};

/// Formats a float so that parsing it back gives the same bits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A corner map on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub beta: f64,
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    #[serde(default = "one")]
    pub radius: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

impl MapFile {
    pub fn from_map<T: Scalar>(map: &HarmonicCornerMap<T>) -> Self {
        let c = map.config();
        Self {
            beta: c.beta().as_f64(),
            sigma_plus: c.sigma_plus().as_f64(),
            sigma_minus: c.sigma_minus().as_f64(),
            radius: c.radius().as_f64(),
            a: map.coeffs().a().iter().map(|v| v.as_f64()).collect(),
            b: map.coeffs().b().iter().map(|v| v.as_f64()).collect(),
        }
    }

    pub fn config<T: Scalar>(&self) -> Result<CornerConfig<T>> {
        CornerConfig::new(
            T::lit(self.beta),
            T::lit(self.sigma_plus),
            T::lit(self.sigma_minus),
            T::lit(self.radius),
        )
    }

    pub fn to_map<T: Scalar>(&self) -> Result<HarmonicCornerMap<T>> {
        let cfg = self.config()?;
        let coeffs = SeriesCoefficients::new(
            self.a.iter().map(|&v| T::lit(v)).collect(),
            self.b.iter().map(|&v| T::lit(v)).collect(),
        )?;
        Ok(HarmonicCornerMap::new(cfg, coeffs))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn parse_field(rec: &csv::StringRecord, k: usize) -> Result<f64> {
    rec.get(k)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::InvalidConfig(format!("bad numeric field {k} in row {rec:?}")))
}

/// Reads `phi,re,im` arc samples (header required).
pub fn read_arc_csv<T: Scalar, R: Read>(r: R) -> Result<Vec<(T, Complex<T>)>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        out.push((
            T::lit(parse_field(&rec, 0)?),
            Complex::new(T::lit(parse_field(&rec, 1)?), T::lit(parse_field(&rec, 2)?)),
        ));
    }
    Ok(out)
}

pub fn write_arc_csv<T: Scalar, W: Write>(w: W, samples: &[(T, Complex<T>)]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["phi", "re", "im"])?;
    for (phi, z) in samples {
        wr.write_record([fmt_float(phi.as_f64()), fmt_float(z.re.as_f64()), fmt_float(z.im.as_f64())])?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes `r,phi` for inverse curves and `rho,theta,u,v` for forward curves.
pub fn write_curve_csv<T: Scalar, W: Write>(w: W, curve: &TracedCurve<T>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    match curve.kind {
        CurveKind::InverseLevel => {
            wr.write_record(["r", "phi"])?;
            for (r, phi) in curve.params.iter().zip(&curve.ordinates) {
                wr.write_record([fmt_float(r.as_f64()), fmt_float(phi.as_f64())])?;
            }
        }
        CurveKind::ForwardRay => {
            wr.write_record(["rho", "theta", "u", "v"])?;
            for k in 0..curve.len() {
                let p = curve.points[k];
                wr.write_record([
                    fmt_float(curve.params[k].as_f64()),
                    fmt_float(curve.ordinates[k].as_f64()),
                    fmt_float(p.re.as_f64()),
                    fmt_float(p.im.as_f64()),
                ])?;
            }
        }
    }
    wr.flush()?;
    Ok(())
}

/// Reads any numeric CSV with a header into columns.
pub fn read_columns<R: Read>(r: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    let mut cols = vec![Vec::new(); header.len()];
    for rec in rd.records() {
        let rec = rec?;
        for (k, col) in cols.iter_mut().enumerate() {
            col.push(parse_field(&rec, k)?);
        }
    }
    Ok((header, cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn map_file_round_trip() {
        let f = MapFile {
            beta: 1.5,
            sigma_plus: 1.0,
            sigma_minus: 0.5,
            radius: 2.0,
            a: vec![1.0, 0.1],
            b: vec![2.0, -0.3],
        };
        let g = MapFile::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(f, g);
        let m = g.to_map::<f64>().unwrap();
        assert_eq!(MapFile::from_map(&m), f);
    }

    #[test]
    fn negative_b1_rejected() {
        let f = MapFile::from_json(r#"{"beta":0.5,"sigma_plus":1,"sigma_minus":1,"a":[1,0],"b":[-1,0]}"#).unwrap();
        assert!(matches!(f.to_map::<f64>(), Err(Error::Constraint { .. })));
    }
}
