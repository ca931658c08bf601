//! File formats: room JSON, echo CSV, waveform binary and wave-audio
//! export, solution JSON.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acoustic::{AcousticError, Waveform};
use crate::forward::{EchoSet, ForwardError, WallSequence};
use crate::geometry::{ConvexRoom, GeometryError, Point2, Wall};
use crate::reconstruct::{CandidateSolution, SignPair};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Acoustic(#[from] AcousticError),
}

type Result<T> = std::result::Result<T, FormatError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallSpec {
    pub normal_angle_deg: f64,
    pub offset_m: f64,
}

/// A room given either by its walls or by its vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RoomSpec {
    Walls { walls: Vec<WallSpec> },
    Vertices { vertices: Vec<[f64; 2]> },
}

impl RoomSpec {
    pub fn from_room(room: &ConvexRoom) -> Self {
        RoomSpec::Walls {
            walls: room
                .walls()
                .iter()
                .map(|w| WallSpec { normal_angle_deg: w.normal_angle.to_degrees(), offset_m: w.offset })
                .collect(),
        }
    }

    pub fn to_room(&self) -> std::result::Result<ConvexRoom, GeometryError> {
        match self {
            RoomSpec::Walls { walls } => {
                let walls: Vec<Wall> =
                    walls.iter().map(|w| Wall::new(w.normal_angle_deg.to_radians(), w.offset_m)).collect();
                ConvexRoom::from_walls(&walls)
            }
            RoomSpec::Vertices { vertices } => {
                let v: Vec<Point2> = vertices.iter().map(|&p| p.into()).collect();
                ConvexRoom::from_vertices(&v)
            }
        }
    }
}

pub fn read_room_json(r: impl Read) -> Result<ConvexRoom> {
    let spec: RoomSpec = serde_json::from_reader(r)?;
    Ok(spec.to_room()?)
}

pub fn write_room_json(w: impl Write, room: &ConvexRoom) -> Result<()> {
    serde_json::to_writer_pretty(w, &RoomSpec::from_room(room))?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct EchoRow {
    point_id: usize,
    distance_m: f64,
    #[serde(default)]
    label: Option<String>,
}

/// Writes one row per echo; labels are included when the set has them.
pub fn write_echo_csv(w: impl Write, sets: &[(usize, &EchoSet)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for &(point_id, set) in sets {
        for (i, &d) in set.distances().iter().enumerate() {
            out.serialize(EchoRow { point_id, distance_m: d, label: set.labels().get(i).map(|l| l.to_string()) })?;
        }
    }
    // an empty file still gets its header
    if sets.iter().all(|(_, s)| s.is_empty()) {
        out.write_record(["point_id", "distance_m", "label"])?;
    }
    out.flush()?;
    Ok(())
}

/// Echo sets keyed by point id. A set keeps labels only if every row has one.
pub fn read_echo_csv(r: impl Read) -> Result<BTreeMap<usize, EchoSet>> {
    let mut rows: BTreeMap<usize, Vec<(f64, Option<String>)>> = BTreeMap::new();
    let mut input = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    for row in input.deserialize() {
        let row: EchoRow = row?;
        let label = row.label.filter(|l| !l.is_empty());
        rows.entry(row.point_id).or_default().push((row.distance_m, label));
    }
    rows.into_iter()
        .map(|(id, entries)| {
            let distances: Vec<f64> = entries.iter().map(|e| e.0).collect();
            let set = if entries.iter().all(|e| e.1.is_some()) {
                let labels: Vec<WallSequence> = entries
                    .iter()
                    .map(|e| e.1.as_deref().unwrap_or_default().parse())
                    .collect::<std::result::Result<_, _>>()?;
                EchoSet::with_labels(distances, labels)?
            } else {
                EchoSet::new(distances)?
            };
            Ok((id, set))
        })
        .collect()
}

/// All echoes of a file as one set, whatever the point ids.
pub fn read_echo_csv_single(r: impl Read) -> Result<EchoSet> {
    let sets = read_echo_csv(r)?;
    match sets.len() {
        0 => Ok(EchoSet::default()),
        1 => Ok(sets.into_values().next().unwrap_or_default()),
        n => Err(FormatError::Invalid(format!("expected one point per file, found {n}"))),
    }
}

const MAGIC: &[u8; 4] = b"ESLM";

/// 16-byte header (`ESLM`, sample rate, sample count, 4 reserved zero
/// bytes) followed by little-endian `f32` samples.
pub fn write_waveform(mut w: impl Write, wave: &Waveform) -> Result<()> {
    let rate = wave.sample_rate();
    if rate.fract() != 0.0 || rate < 1.0 || rate > u32::MAX as f64 {
        return Err(FormatError::Invalid(format!("sample rate {rate} is not a positive integer")));
    }
    let n = u32::try_from(wave.len()).map_err(|_| FormatError::Invalid("waveform too long".into()))?;
    let mut buf = Vec::with_capacity(16 + 4 * wave.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(rate as u32).to_le_bytes());
    buf.extend_from_slice(&n.to_le_bytes());
    buf.extend_from_slice(&[0; 4]);
    for &x in wave.samples() {
        buf.extend_from_slice(&(x as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_waveform(mut r: impl Read) -> Result<Waveform> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[..4] != MAGIC {
        return Err(FormatError::Invalid("not a waveform file (bad magic)".into()));
    }
    let rate = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
    let n = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) as usize;
    let mut body = Vec::with_capacity(4 * n);
    r.read_to_end(&mut body)?;
    if body.len() != 4 * n {
        return Err(FormatError::Invalid(format!("header announces {n} samples, body holds {} bytes", body.len())));
    }
    let samples = body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64).collect();
    Ok(Waveform::new(samples, rate as f64)?)
}

/// Mono 32-bit float wave-audio file.
pub fn write_wav(mut w: impl Write, wave: &Waveform) -> Result<()> {
    let rate = wave.sample_rate() as u32;
    let data_len = u32::try_from(4 * wave.len()).map_err(|_| FormatError::Invalid("waveform too long".into()))?;
    let mut buf = Vec::with_capacity(44 + data_len as usize);
    buf.extend_from_slice(b"RIFF");
    buf.extend_from_slice(&(36 + data_len).to_le_bytes());
    buf.extend_from_slice(b"WAVEfmt ");
    buf.extend_from_slice(&16u32.to_le_bytes());
    buf.extend_from_slice(&3u16.to_le_bytes()); // IEEE float
    buf.extend_from_slice(&1u16.to_le_bytes());
    buf.extend_from_slice(&rate.to_le_bytes());
    buf.extend_from_slice(&(rate * 4).to_le_bytes());
    buf.extend_from_slice(&4u16.to_le_bytes());
    buf.extend_from_slice(&32u16.to_le_bytes());
    buf.extend_from_slice(b"data");
    buf.extend_from_slice(&data_len.to_le_bytes());
    for &x in wave.samples() {
        buf.extend_from_slice(&(x as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads mono wave-audio files with 32-bit float or 16-bit integer samples.
pub fn read_wav(mut r: impl Read) -> Result<Waveform> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let bad = |m: &str| FormatError::Invalid(format!("wave file: {m}"));
    if bytes.len() < 12 || &bytes[..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(bad("missing RIFF/WAVE header"));
    }
    let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
    let u32_at = |i: usize| u32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]);
    let mut pos = 12;
    let mut format: Option<(u16, u16, u32, u16)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let len = u32_at(pos + 4) as usize;
        let body = pos + 8;
        if body + len > bytes.len() {
            return Err(bad("truncated chunk"));
        }
        match id {
            b"fmt " if len >= 16 => {
                format = Some((u16_at(body), u16_at(body + 2), u32_at(body + 4), u16_at(body + 14)));
            }
            b"data" => {
                let (tag, channels, rate, bits) = format.ok_or_else(|| bad("data before fmt"))?;
                if channels != 1 {
                    return Err(bad("only mono files are supported"));
                }
                let data = &bytes[body..body + len];
                let samples: Vec<f64> = match (tag, bits) {
                    (3, 32) => {
                        data.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64).collect()
                    }
                    (1, 16) => {
                        data.chunks_exact(2).map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32768.0).collect()
                    }
                    _ => return Err(bad("unsupported sample format")),
                };
                return Ok(Waveform::new(samples, rate as f64)?);
            }
            _ => {}
        }
        pos = body + len + (len & 1);
    }
    Err(bad("no data chunk"))
}

/// Reads either waveform format, told apart by the first four bytes.
pub fn read_any_waveform(mut r: impl Read) -> Result<Waveform> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.starts_with(b"RIFF") {
        read_wav(bytes.as_slice())
    } else {
        read_waveform(bytes.as_slice())
    }
}

/// Serialized reconstruction result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    #[serde(rename = "K")]
    pub k: usize,
    pub phi_rad: f64,
    pub var_phi: f64,
    pub d12: f64,
    pub d23: f64,
    pub walls: Vec<WallSpec>,
    pub vertices: Vec<[f64; 2]>,
    pub o2: [f64; 2],
    pub o3: [f64; 2],
    pub assignment: Vec<[usize; 3]>,
    pub signs: Vec<SignPair>,
}

impl SolutionJson {
    pub fn from_solution(sol: &CandidateSolution) -> Self {
        let RoomSpec::Walls { walls } = RoomSpec::from_room(&sol.room) else { unreachable!("from_room emits walls") };
        Self {
            k: sol.k(),
            phi_rad: sol.phi,
            var_phi: sol.var_phi,
            d12: sol.geometry.d12,
            d23: sol.geometry.d23,
            walls,
            vertices: sol.room.vertices().iter().map(|&v| v.into()).collect(),
            o2: sol.o2().into(),
            o3: sol.o3().into(),
            assignment: sol.assignment.slots.clone(),
            signs: sol.signs.clone(),
        }
    }

    pub fn room(&self) -> std::result::Result<ConvexRoom, GeometryError> {
        RoomSpec::Walls { walls: self.walls.clone() }.to_room()
    }
}

pub fn write_solution_json(w: impl Write, sol: &SolutionJson) -> Result<()> {
    serde_json::to_writer_pretty(w, sol)?;
    Ok(())
}

pub fn read_solution_json(r: impl Read) -> Result<SolutionJson> {
    Ok(serde_json::from_reader(r)?)
}
