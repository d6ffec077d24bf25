//! Images, cost volumes and CSV output.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageReader};
use lifting_core::image::Image;
use lifting_core::lifting::CostVolume;

use crate::error::{CliError, CliResult};

fn read_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Read {
        path: path.to_path_buf(),
        source,
    }
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a PGM, PPM or PNG file; gray images get one channel, all others
/// three. Values are scaled to `[0, 1]`.
pub fn read_image(path: &Path) -> CliResult<Image> {
    let bad = |message: String| CliError::Image {
        path: path.to_path_buf(),
        message,
    };
    let reader = ImageReader::open(path)
        .map_err(read_err(path))?
        .with_guessed_format()
        .map_err(read_err(path))?;
    let decoded = reader.decode().map_err(|e| bad(e.to_string()))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let (channels, data): (usize, Vec<f64>) = if decoded.color().has_color() {
        let rgb = decoded.to_rgb32f();
        (3, rgb.into_raw().into_iter().map(f64::from).collect())
    } else {
        let gray = decoded.to_luma32f();
        (1, gray.into_raw().into_iter().map(f64::from).collect())
    };
    Image::new(w, h, channels, data).map_err(|e| bad(e.to_string()))
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes a binary PGM (one channel) or PPM (three channels).
pub fn write_image(path: &Path, image: &Image) -> CliResult<()> {
    let (subtype, color) = match image.channels {
        1 => (PnmSubtype::Graymap(SampleEncoding::Binary), ExtendedColorType::L8),
        3 => (PnmSubtype::Pixmap(SampleEncoding::Binary), ExtendedColorType::Rgb8),
        c => {
            return Err(CliError::Image {
                path: path.to_path_buf(),
                message: format!("cannot write {c} channels"),
            })
        }
    };
    let bytes: Vec<u8> = image.data.iter().map(|&v| to_byte(v)).collect();
    let file = File::create(path).map_err(write_err(path))?;
    let mut out = BufWriter::new(file);
    PnmEncoder::new(&mut out)
        .with_subtype(subtype)
        .write_image(&bytes, image.width as u32, image.height as u32, color)
        .map_err(|e| CliError::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    out.flush().map_err(write_err(path))
}

const MAGIC: &str = "CVOL";

/// `CVOL <nx> <ny> <nlabels>\n` followed by little-endian `f32`, x fastest.
pub fn read_cost_volume(path: &Path) -> CliResult<CostVolume> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(read_err(path))?;
    parse_cost_volume(&bytes).map_err(|message| CliError::Volume {
        path: path.to_path_buf(),
        message,
    })
}

pub fn parse_cost_volume(bytes: &[u8]) -> Result<CostVolume, String> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or("missing header line")?;
    let header = std::str::from_utf8(&bytes[..newline]).map_err(|_| "header is not text")?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&MAGIC) {
        return Err(format!("bad magic, expected {MAGIC}"));
    }
    if fields.len() != 4 {
        return Err(format!("header needs three dimensions, got {:?}", &fields[1..]));
    }
    let dims: Vec<usize> = fields[1..]
        .iter()
        .map(|f| f.parse().map_err(|_| format!("bad dimension {f:?}")))
        .collect::<Result<_, _>>()?;
    let payload = &bytes[newline + 1..];
    let count = dims[0]
        .checked_mul(dims[1])
        .and_then(|v| v.checked_mul(dims[2]))
        .ok_or("dimensions overflow")?;
    if payload.len() != count * 4 {
        return Err(format!(
            "payload size mismatch: {} bytes for {} values",
            payload.len(),
            count
        ));
    }
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    CostVolume::new(dims[0], dims[1], dims[2], data).map_err(|e| e.to_string())
}

pub fn encode_cost_volume(volume: &CostVolume) -> Vec<u8> {
    let mut out = format!("{MAGIC} {} {} {}\n", volume.nx, volume.ny, volume.nlabels).into_bytes();
    for v in &volume.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_cost_volume(path: &Path, volume: &CostVolume) -> CliResult<()> {
    std::fs::write(path, encode_cost_volume(volume)).map_err(write_err(path))
}

/// Writes a CSV file with a header row.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let csv_err = |e: csv::Error| CliError::Write {
        path: path.to_path_buf(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(write_err(path))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(write_err(path))
}
