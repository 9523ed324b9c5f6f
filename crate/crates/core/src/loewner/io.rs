//! Plain-text curve and driver files.
//!
//! One `re im` (curve) or `t W` (driver) pair per line, after a header
//! `# capacity=<T> kappa=<kappa> seed=<seed>`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::{Curve, DrivingFunction};
use crate::error::{Error, Result};

/// Header metadata.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Header {
    pub capacity: f64,
    pub kappa: f64,
    pub seed: u64,
}

impl Header {
    fn render(&self) -> String {
        format!("# capacity={} kappa={} seed={}\n", self.capacity, self.kappa, self.seed)
    }

    fn parse(line: &str) -> Result<Header> {
        let body = line.trim_start_matches('#').trim();
        let (mut capacity, mut kappa, mut seed) = (None, None, None);
        for item in body.split_whitespace() {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("bad header field '{item}'")))?;
            let bad = || Error::invalid(format!("bad header value '{item}'"));
            match k {
                "capacity" => capacity = Some(v.parse::<f64>().map_err(|_| bad())?),
                "kappa" => kappa = Some(v.parse::<f64>().map_err(|_| bad())?),
                "seed" => seed = Some(v.parse::<u64>().map_err(|_| bad())?),
                _ => return Err(Error::invalid(format!("unknown header field '{k}'"))),
            }
        }
        match (capacity, kappa, seed) {
            (Some(capacity), Some(kappa), Some(seed)) => Ok(Header { capacity, kappa, seed }),
            _ => Err(Error::invalid(format!("incomplete header '{line}'"))),
        }
    }
}

fn render_pairs(header: &Header, pairs: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = header.render();
    for (a, b) in pairs {
        s.push_str(&format!("{a} {b}\n"));
    }
    s
}

fn parse_pairs(text: &str) -> Result<(Header, Vec<(f64, f64)>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = Header::parse(lines.next().ok_or_else(|| Error::invalid("empty file"))?)?;
    let mut out = Vec::new();
    for line in lines {
        let mut it = line.split_whitespace();
        let parse = |t: Option<&str>| -> Result<f64> {
            t.and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::invalid(format!("bad data line '{line}'")))
        };
        let a = parse(it.next())?;
        let b = parse(it.next())?;
        if it.next().is_some() {
            return Err(Error::invalid(format!("extra fields in '{line}'")));
        }
        out.push((a, b));
    }
    Ok((header, out))
}

pub fn curve_to_string(curve: &Curve, header: &Header) -> String {
    render_pairs(header, curve.points.iter().map(|p| (p.re, p.im)))
}

pub fn curve_from_str(text: &str) -> Result<(Curve, Header)> {
    let (h, pairs) = parse_pairs(text)?;
    Ok((Curve::new(pairs.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())?, h))
}

pub fn driver_to_string(driver: &DrivingFunction, header: &Header) -> String {
    render_pairs(header, driver.times.iter().copied().zip(driver.values.iter().copied()))
}

pub fn driver_from_str(text: &str) -> Result<(DrivingFunction, Header)> {
    let (h, pairs) = parse_pairs(text)?;
    let (t, w) = pairs.into_iter().unzip();
    Ok((DrivingFunction::new(t, w)?, h))
}

pub fn write_curve(path: &Path, curve: &Curve, header: &Header) -> Result<()> {
    Ok(fs::write(path, curve_to_string(curve, header))?)
}

pub fn read_curve(path: &Path) -> Result<(Curve, Header)> {
    curve_from_str(&fs::read_to_string(path)?)
}

pub fn write_driver(path: &Path, driver: &DrivingFunction, header: &Header) -> Result<()> {
    Ok(fs::write(path, driver_to_string(driver, header))?)
}

pub fn read_driver(path: &Path) -> Result<(DrivingFunction, Header)> {
    driver_from_str(&fs::read_to_string(path)?)
}
