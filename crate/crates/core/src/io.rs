//! JSON forms of states and detector sets.
//!
//! A detector file is either explicit,
//! `{"parties":["B","C"],"n":2,"bases":[[[[re,im],...],...],...]}`, or the
//! qubit shorthand `{"angles":[{"theta":t,"phi":p},...]}` with an optional
//! `"parties"` list (default `B, C, ...`). An object carrying either form
//! under a `"detectors"` key, such as an optimizer result, is accepted too.

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::basis::{
    party_label, parse_party_label, BlochAngles, DetectorSet, LocalBasis, INPUT_ORTHO_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::state::StateVector;

impl Serialize for DetectorSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let parties: Vec<String> = self.parties().iter().map(|&p| party_label(p)).collect();
        let bases: Vec<&[Vec<Complex64>]> = self.bases().iter().map(LocalBasis::vectors).collect();
        let mut s = serializer.serialize_struct("DetectorSet", 3)?;
        s.serialize_field("parties", &parties)?;
        s.serialize_field("n", &self.n())?;
        s.serialize_field("bases", &bases)?;
        s.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitDetectors {
    parties: Vec<String>,
    n: Option<usize>,
    bases: Vec<Vec<Vec<Complex64>>>,
}

#[derive(Deserialize)]
struct AngleEntry {
    theta: f64,
    phi: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AngleDetectors {
    angles: Vec<AngleEntry>,
    parties: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawDetectors {
    Explicit(ExplicitDetectors),
    Angles(AngleDetectors),
}

#[derive(Deserialize)]
struct Wrapped {
    detectors: RawDetectors,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DetectorFile {
    Direct(RawDetectors),
    Wrapped(Wrapped),
}

fn parse_parties(labels: &[String]) -> Result<Vec<usize>> {
    labels.iter().map(|l| parse_party_label(l)).collect()
}

impl RawDetectors {
    fn build(self) -> Result<DetectorSet> {
        match self {
            RawDetectors::Explicit(e) => {
                let parties = parse_parties(&e.parties)?;
                let bases = e
                    .bases
                    .into_iter()
                    .map(|b| LocalBasis::new(b, INPUT_ORTHO_TOLERANCE))
                    .collect::<Result<Vec<_>>>()?;
                let set = DetectorSet::new(parties, bases)?;
                if let Some(n) = e.n {
                    if n != set.n() {
                        return Err(Error::Shape(format!(
                            "declared n = {n} but bases hold {} vectors",
                            set.n()
                        )));
                    }
                }
                Ok(set)
            }
            RawDetectors::Angles(a) => {
                let angles = a
                    .angles
                    .iter()
                    .map(|e| BlochAngles::new(e.theta, e.phi))
                    .collect::<Result<Vec<_>>>()?;
                let parties = match a.parties {
                    Some(labels) => parse_parties(&labels)?,
                    None => (1..=angles.len()).collect(),
                };
                DetectorSet::from_angles(parties, &angles)
            }
        }
    }
}

impl<'de> Deserialize<'de> for DetectorSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        RawDetectors::deserialize(deserializer)?
            .build()
            .map_err(serde::de::Error::custom)
    }
}

/// Parses any accepted detector-file form.
pub fn parse_detectors(text: &str) -> Result<DetectorSet> {
    let file: DetectorFile = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("unrecognized detector JSON: {e}")))?;
    match file {
        DetectorFile::Direct(raw) | DetectorFile::Wrapped(Wrapped { detectors: raw }) => raw.build(),
    }
}

/// Parses `{"dims":[...],"amplitudes":[[re,im],...]}`.
pub fn parse_state(text: &str) -> Result<StateVector> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad state JSON: {e}")))
}
