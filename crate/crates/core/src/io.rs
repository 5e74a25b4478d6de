//! CSV formats for far-field data, boundary curves and reconstruction traces.
//!
//! Far-field files carry their run metadata as `# key = value` lines ahead
//! of the column header. Floats are written with `Display`, which is the
//! shortest representation that parses back to the same value.

use std::io::{BufRead, Write};

use crate::direct::FarFieldPattern;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, RadialFunction};
use crate::inverse::ReconstructionHistory;
use crate::Complex64;

/// Header records of a far-field data file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarFieldMeta {
    pub omega: f64,
    pub theta: f64,
    pub phi: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub seed: u64,
    /// Quadrature parameter of the direct solve that produced the data.
    pub n: usize,
}

const FARFIELD_COLUMNS: [&str; 5] = ["obs_angle", "re_e", "im_e", "re_h", "im_h"];

pub fn write_far_field<W: Write>(mut out: W, meta: &FarFieldMeta, pattern: &FarFieldPattern) -> Result<()> {
    writeln!(out, "# omega = {}", meta.omega)?;
    writeln!(out, "# theta = {}", meta.theta)?;
    writeln!(out, "# phi = {}", meta.phi)?;
    writeln!(out, "# delta1 = {}", meta.delta1)?;
    writeln!(out, "# delta2 = {}", meta.delta2)?;
    writeln!(out, "# seed = {}", meta.seed)?;
    writeln!(out, "# n = {}", meta.n)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FARFIELD_COLUMNS)?;
    for ((a, e), h) in pattern.obs_angles.iter().zip(&pattern.e_inf).zip(&pattern.h_inf) {
        w.write_record([a, &e.re, &e.im, &h.re, &h.im].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Data(format!("cannot parse header `{key}` value `{}`", value.trim())))
}

pub fn read_far_field<R: BufRead>(input: R) -> Result<(FarFieldMeta, FarFieldPattern)> {
    let mut header = std::collections::HashMap::new();
    let mut body = String::new();
    for line in input.lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                header.insert(k.trim().to_string(), v.to_string());
            }
        } else if !line.trim().is_empty() {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let get = |key: &str| {
        header.get(key).ok_or_else(|| Error::Data(format!("far-field file lacks `# {key} = ...`")))
    };
    let meta = FarFieldMeta {
        omega: parse("omega", get("omega")?)?,
        theta: parse("theta", get("theta")?)?,
        phi: parse("phi", get("phi")?)?,
        delta1: parse("delta1", get("delta1")?)?,
        delta2: parse("delta2", get("delta2")?)?,
        seed: parse("seed", get("seed")?)?,
        n: parse("n", get("n")?)?,
    };

    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let cols: Vec<String> = reader.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if cols != FARFIELD_COLUMNS {
        return Err(Error::Data(format!("unexpected far-field columns {cols:?}")));
    }
    let mut pattern = FarFieldPattern { obs_angles: Vec::new(), e_inf: Vec::new(), h_inf: Vec::new() };
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let v: Vec<f64> = record
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Data(format!("non-numeric far-field value on data row {}", line + 1)))?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Data(format!("non-finite far-field value on data row {}", line + 1)));
        }
        pattern.obs_angles.push(v[0]);
        pattern.e_inf.push(Complex64::new(v[1], v[2]));
        pattern.h_inf.push(Complex64::new(v[3], v[4]));
    }
    if pattern.obs_angles.is_empty() {
        return Err(Error::Data("far-field file has no samples".into()));
    }
    Ok((meta, pattern))
}

/// Columns `t, r, x, y, nx, ny` for every node of the curve.
pub fn write_curve<W: Write>(out: W, curve: &BoundaryCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "r", "x", "y", "nx", "ny"])?;
    for j in 0..curve.len() {
        let [x, y] = curve.z[j];
        let [nx, ny] = curve.normal[j];
        w.write_record([curve.t[j], curve.r[j], x, y, nx, ny].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// One row `(iteration, t, r)` per sample point and iterate; iteration 0 is
/// the initial guess.
pub fn write_trace<W: Write>(out: W, history: &ReconstructionHistory, samples: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "t", "r"])?;
    let iterates = std::iter::once((0, &history.initial)).chain(history.steps.iter().map(|s| (s.k, &s.radial)));
    for (k, radial) in iterates {
        for j in 0..samples {
            let t = 2.0 * std::f64::consts::PI * j as f64 / samples as f64;
            w.write_record([k.to_string(), t.to_string(), radial.radius(t).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direct::equidistant_angles;
    use crate::geometry::{Shape, TrigPolynomial};
    use crate::inverse::StepRecord;

    fn sample_pattern() -> FarFieldPattern {
        let angles = equidistant_angles(8);
        FarFieldPattern {
            e_inf: angles.iter().map(|a| Complex64::new(a.sin() / 3.0, 1e-17 * a)).collect(),
            h_inf: angles.iter().map(|a| Complex64::new(0.1 + a, -a.cos() / 7.0)).collect(),
            obs_angles: angles,
        }
    }

    #[test]
    fn far_field_round_trip_is_exact() {
        let meta = FarFieldMeta {
            omega: 2.5,
            theta: std::f64::consts::FRAC_PI_3,
            phi: 0.1,
            delta1: 0.05,
            delta2: 0.0,
            seed: 42,
            n: 64,
        };
        let pattern = sample_pattern();
        let mut buf = Vec::new();
        write_far_field(&mut buf, &meta, &pattern).unwrap();
        let (m, p) = read_far_field(buf.as_slice()).unwrap();
        assert_eq!(m, meta);
        assert_eq!(p, pattern);
    }

    #[test]
    fn malformed_far_field_is_rejected() {
        let missing = "obs_angle,re_e,im_e,re_h,im_h\n0,1,2,3,4\n";
        assert!(matches!(read_far_field(missing.as_bytes()), Err(Error::Data(_))));
        let mut buf = Vec::new();
        let meta = FarFieldMeta { omega: 1.0, theta: 1.0, phi: 0.0, delta1: 0.0, delta2: 0.0, seed: 0, n: 8 };
        write_far_field(&mut buf, &meta, &sample_pattern()).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("0.1,", "zero,", 1);
        assert!(read_far_field(text.as_bytes()).is_err());
    }

    #[test]
    fn curve_and_trace_layout() {
        let c = BoundaryCurve::from_radial(&Shape::Peanut, 4).unwrap();
        let mut buf = Vec::new();
        write_curve(&mut buf, &c).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(text.starts_with("t,r,x,y,nx,ny\n"));

        let r1 = TrigPolynomial::constant(0.7);
        let history = ReconstructionHistory {
            initial: TrigPolynomial::constant(0.6),
            steps: vec![StepRecord {
                k: 1,
                lambda: 0.65,
                misfit: 0.3,
                relative_update: 0.1,
                halvings: 0,
                radial: r1,
            }],
        };
        let mut buf = Vec::new();
        write_trace(&mut buf, &history, 4).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[1], "0,0,0.6");
        assert_eq!(lines[5], "1,0,0.7");
    }
}
