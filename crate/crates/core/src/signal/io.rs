//! CSV and WAV signal files.
//!
//! CSV files carry a `x,value` header and one pair per line. WAV files must
//! be 16-bit integer PCM mono; amplitudes map onto `[0, 1]` through the fixed
//! affine `(v + 32768) / 65535`, which [`unit_to_pcm`] inverts exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Interpolation, Signal};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalFormat {
    Csv,
    Wav,
}

impl SignalFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("csv") => Ok(SignalFormat::Csv),
            Some("wav") => Ok(SignalFormat::Wav),
            _ => Err(Error::UnsupportedFormat(format!(
                "cannot infer signal format of {}",
                path.display()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavData {
    pub sample_rate: u32,
    pub samples: Vec<i16>,
}

#[inline]
pub fn pcm_to_unit(v: i16) -> f64 {
    (v as f64 + 32768.0) / 65535.0
}

#[inline]
pub fn unit_to_pcm(u: f64) -> i16 {
    (u.clamp(0.0, 1.0) * 65535.0 - 32768.0)
        .round()
        .clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

fn wav_err(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(e) => Error::Io(e),
        hound::Error::Unsupported => Error::UnsupportedFormat("unsupported WAV encoding".into()),
        other => Error::Parse(format!("WAV: {other}")),
    }
}

pub fn read_wav(path: &Path) -> Result<WavData> {
    let reader = hound::WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::UnsupportedFormat(format!(
            "WAV has {} channels, only mono is supported",
            spec.channels
        )));
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedFormat(format!(
            "WAV must be 16-bit integer PCM, got {} bit {:?}",
            spec.bits_per_sample, spec.sample_format
        )));
    }
    let samples = reader
        .into_samples::<i16>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(wav_err)?;
    Ok(WavData {
        sample_rate: spec.sample_rate,
        samples,
    })
}

pub fn write_wav(path: &Path, data: &WavData) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: data.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(wav_err)?;
    for &s in &data.samples {
        w.write_sample(s).map_err(wav_err)?;
    }
    w.finalize().map_err(wav_err)
}

/// Reads `x,value` pairs.
pub fn read_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    let mut lines = reader.lines();
    match lines.next() {
        Some(header) => {
            let header = header?;
            if header.trim() != "x,value" {
                return Err(Error::Parse(format!("expected header `x,value`, got `{header}`")));
            }
        }
        None => return Err(Error::Parse("empty CSV file".into())),
    }
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: bad number `{s}`", lineno + 2)))
        };
        let (x, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected two columns", lineno + 2)))?;
        xs.push(parse(x)?);
        vs.push(parse(v)?);
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parse("CSV x column must be strictly increasing".into()));
    }
    Ok((xs, vs))
}

/// Writes `x,value` pairs using the shortest representation that parses
/// back to the same `f64`.
pub fn write_csv(path: &Path, xs: &[f64], values: &[f64]) -> Result<()> {
    if xs.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            got: values.len(),
        });
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,value")?;
    for (x, v) in xs.iter().zip(values) {
        writeln!(w, "{x:?},{v:?}")?;
    }
    w.flush()?;
    Ok(())
}

/// Loads a signal; WAV samples are placed on a uniform grid of `[0, 1]`.
pub fn load_signal(path: &Path, format: SignalFormat) -> Result<Signal> {
    match format {
        SignalFormat::Csv => {
            let (xs, vs) = read_csv(path)?;
            Signal::sampled(xs, vs, Interpolation::Step)
        }
        SignalFormat::Wav => {
            let data = read_wav(path)?;
            let unit = data.samples.iter().map(|&v| pcm_to_unit(v)).collect();
            Signal::sampled_uniform(0.0, 1.0, unit, Interpolation::Step)
        }
    }
}

/// Saves unit-range samples taken at `xs`. For WAV the nodes are dropped and
/// `sample_rate` is written to the header.
pub fn save_signal(
    path: &Path,
    format: SignalFormat,
    xs: &[f64],
    values: &[f64],
    sample_rate: u32,
) -> Result<()> {
    match format {
        SignalFormat::Csv => write_csv(path, xs, values),
        SignalFormat::Wav => write_wav(
            path,
            &WavData {
                sample_rate,
                samples: values.iter().map(|&u| unit_to_pcm(u)).collect(),
            },
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcm_mapping() {
        assert!((pcm_to_unit(0) - 32768.0 / 65535.0).abs() < 1e-16);
        assert!((pcm_to_unit(0) - 0.500_007_6).abs() < 1e-7);
        assert_eq!(pcm_to_unit(i16::MIN), 0.0);
        assert_eq!(pcm_to_unit(i16::MAX), 1.0);
        for v in i16::MIN..=i16::MAX {
            assert_eq!(unit_to_pcm(pcm_to_unit(v)), v);
        }
    }

    #[test]
    fn csv_parse() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(&p, "x,value\n0.0,0.25\n0.5,0.75\n").unwrap();
        let (xs, vs) = read_csv(&p).unwrap();
        assert_eq!(xs, vec![0.0, 0.5]);
        assert_eq!(vs, vec![0.25, 0.75]);
        std::fs::write(&p, "t,v\n0,1\n").unwrap();
        assert!(matches!(read_csv(&p), Err(Error::Parse(_))));
        std::fs::write(&p, "x,value\n0.5,0.1\n0.2,0.3\n").unwrap();
        assert!(matches!(read_csv(&p), Err(Error::Parse(_))));
        std::fs::write(&p, "x,value\n0.0,abc\n").unwrap();
        assert!(matches!(read_csv(&p), Err(Error::Parse(_))));
    }

    #[test]
    fn csv_round_trip_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let xs: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        let vs: Vec<f64> = xs.iter().map(|x| (x * 7.3f64).sin().abs() / 3.0).collect();
        write_csv(&p, &xs, &vs).unwrap();
        let (x2, v2) = read_csv(&p).unwrap();
        assert_eq!(xs, x2);
        assert_eq!(vs, v2);
    }

    #[test]
    fn rejects_stereo_and_float() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("st.wav");
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&p, spec).unwrap();
        w.write_sample(1i16).unwrap();
        w.write_sample(2i16).unwrap();
        w.finalize().unwrap();
        assert!(matches!(read_wav(&p), Err(Error::UnsupportedFormat(_))));

        let p = dir.path().join("fl.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let mut w = hound::WavWriter::create(&p, spec).unwrap();
        w.write_sample(0.5f32).unwrap();
        w.finalize().unwrap();
        assert!(matches!(read_wav(&p), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(SignalFormat::from_path(Path::new("a/b.WAV")).unwrap(), SignalFormat::Wav);
        assert_eq!(SignalFormat::from_path(Path::new("b.csv")).unwrap(), SignalFormat::Csv);
        assert!(SignalFormat::from_path(Path::new("b.flac")).is_err());
    }
}
