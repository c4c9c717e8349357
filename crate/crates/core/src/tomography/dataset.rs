use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::io::fmt_f64;
use crate::{Error, Result};

/// Name of the pseudo-random generator recorded in dataset metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.10), per-job seeds via SplitMix64";

/// Which optical mode a homodyne record belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeLabel {
    A,
    B,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeLabel::A => "A",
            ModeLabel::B => "B",
            ModeLabel::Plus => "+",
            ModeLabel::Minus => "-",
        })
    }
}

impl FromStr for ModeLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" => Ok(ModeLabel::A),
            "B" => Ok(ModeLabel::B),
            "+" => Ok(ModeLabel::Plus),
            "-" => Ok(ModeLabel::Minus),
            other => Err(Error::Parse(format!("unknown mode label {other:?}"))),
        }
    }
}

/// One quadrature outcome `x` at local-oscillator phase `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSample {
    pub x: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    seed: u64,
    #[serde(rename = "N")]
    n: usize,
    state_description: String,
    #[serde(default)]
    mode: Option<ModeLabel>,
    #[serde(default)]
    rng: Option<String>,
}

/// Homodyne record of a single mode.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureDataset {
    pub samples: Vec<QuadratureSample>,
    pub mode: ModeLabel,
    pub seed: u64,
    pub state_description: String,
}

impl QuadratureDataset {
    pub fn new(mode: ModeLabel, seed: u64, state_description: impl Into<String>) -> Self {
        QuadratureDataset {
            samples: Vec::new(),
            mode,
            seed,
            state_description: state_description.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Distinct phases in order of first appearance, with their samples.
    pub fn by_phase(&self) -> Vec<(f64, Vec<f64>)> {
        let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
        for s in &self.samples {
            match groups
                .iter_mut()
                .find(|(th, _)| (th - s.theta).abs() < 1e-12)
            {
                Some((_, xs)) => xs.push(s.x),
                None => groups.push((s.theta, vec![s.x])),
            }
        }
        groups
    }

    pub fn phases(&self) -> Vec<f64> {
        self.by_phase().into_iter().map(|(th, _)| th).collect()
    }

    /// Splits into `parts` disjoint subsets, each receiving a contiguous
    /// share of every phase so that all subsets keep the phase balance.
    pub fn stratified_split(&self, parts: usize) -> Result<Vec<QuadratureDataset>> {
        if parts == 0 || parts > self.len() {
            return Err(Error::InvalidParameter(format!(
                "cannot split {} samples into {parts} parts",
                self.len()
            )));
        }
        let mut out: Vec<QuadratureDataset> = (0..parts)
            .map(|k| QuadratureDataset {
                samples: Vec::new(),
                mode: self.mode,
                seed: self.seed,
                state_description: format!("{} [part {}/{}]", self.state_description, k + 1, parts),
            })
            .collect();
        for (theta, xs) in self.by_phase() {
            let n = xs.len();
            for (k, part) in out.iter_mut().enumerate() {
                let (lo, hi) = (k * n / parts, (k + 1) * n / parts);
                part.samples
                    .extend(xs[lo..hi].iter().map(|&x| QuadratureSample { x, theta }));
            }
        }
        Ok(out)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(48 * (self.len() + 1));
        s.push_str("x,theta,mode\n");
        for q in &self.samples {
            s.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(q.x),
                fmt_f64(q.theta),
                self.mode
            ));
        }
        s
    }

    pub fn sidecar_json(&self) -> Result<String> {
        let side = Sidecar {
            seed: self.seed,
            n: self.len(),
            state_description: self.state_description.clone(),
            mode: Some(self.mode),
            rng: Some(RNG_ALGORITHM.to_string()),
        };
        Ok(serde_json::to_string_pretty(&side)?)
    }

    /// Parses the CSV body and its JSON sidecar.
    pub fn from_csv(csv: &str, sidecar: &str) -> Result<Self> {
        let side: Sidecar = serde_json::from_str(sidecar)?;
        let mut lines = csv.lines();
        match lines.next().map(str::trim) {
            Some("x,theta,mode") => {}
            other => return Err(Error::Parse(format!("bad dataset header {other:?}"))),
        }
        let mut samples = Vec::new();
        let mut mode = side.mode;
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 fields", i + 2)));
            }
            let num = |f: &str| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", i + 2)))
            };
            let label: ModeLabel = fields[2].parse()?;
            match mode {
                None => mode = Some(label),
                Some(m) if m != label => {
                    return Err(Error::Parse(format!(
                        "line {}: mixed mode labels {m} and {label}",
                        i + 2
                    )))
                }
                _ => {}
            }
            samples.push(QuadratureSample {
                x: num(fields[0])?,
                theta: num(fields[1])?,
            });
        }
        if samples.len() != side.n {
            return Err(Error::Parse(format!(
                "sidecar declares N = {} but CSV has {} rows",
                side.n,
                samples.len()
            )));
        }
        Ok(QuadratureDataset {
            samples,
            mode: mode.unwrap_or(ModeLabel::A),
            seed: side.seed,
            state_description: side.state_description,
        })
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        crate::io::write_atomic(&dir.join(format!("{stem}.csv")), self.to_csv().as_bytes())?;
        crate::io::write_atomic(
            &dir.join(format!("{stem}.json")),
            self.sidecar_json()?.as_bytes(),
        )
    }

    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        let csv = std::fs::read_to_string(dir.join(format!("{stem}.csv")))?;
        let side = std::fs::read_to_string(dir.join(format!("{stem}.json")))?;
        Self::from_csv(&csv, &side)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> QuadratureDataset {
        let mut d = QuadratureDataset::new(ModeLabel::Minus, 7, "toy");
        for k in 0..12 {
            d.samples.push(QuadratureSample {
                x: (k as f64).sin() * 1e-3 + 0.1,
                theta: (k % 3) as f64 * 0.5,
            });
        }
        d
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let d = toy();
        let back = QuadratureDataset::from_csv(&d.to_csv(), &d.sidecar_json().unwrap()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn stratified_split_keeps_phase_balance() {
        let d = toy();
        let parts = d.stratified_split(2).unwrap();
        assert_eq!(parts.len(), 2);
        for p in &parts {
            assert_eq!(p.len(), 6);
            assert_eq!(p.phases().len(), 3);
        }
        assert!(d.stratified_split(0).is_err());
    }

    #[test]
    fn rejects_inconsistent_files() {
        let d = toy();
        let side = d.sidecar_json().unwrap();
        assert!(QuadratureDataset::from_csv("a,b,c\n", &side).is_err());
        let short: String = d
            .to_csv()
            .lines()
            .take(5)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(QuadratureDataset::from_csv(&short, &side).is_err());
        assert!(QuadratureDataset::from_csv(&d.to_csv(), "{\"seed\":1}").is_err());
    }
}
