//! Readers and writers for the on-disk formats.
//!
//! * `FEB1`: `"FEB1 <width> <height> <bands> f32\n"` then little-endian f32,
//!   band-sequential, row-major within each band.
//! * `FEL1`: `"FEL1 <width> <height>\n"` then little-endian u32, row-major.
//! * Binary PGM (`P5`) / PPM (`P6`), maxval up to 65535 (16-bit samples are big-endian).
//!
//! Ground truth is an 8-bit PGM with 0 = forest, 255 = deforestation, 128 = excluded.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{GroundTruth, GtClass, LabelMap, Raster};

const FEB1_MAGIC: &str = "FEB1";
const FEL1_MAGIC: &str = "FEL1";

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Splits off the first `\n`-terminated ASCII line.
fn header_line(bytes: &[u8]) -> Result<(&str, &[u8])> {
    let end = bytes
        .iter()
        .take(256)
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::MalformedHeader("missing header line terminator".into()))?;
    let line = std::str::from_utf8(&bytes[..end])
        .map_err(|_| Error::MalformedHeader("header is not ASCII".into()))?;
    Ok((line, &bytes[end + 1..]))
}

fn parse_dim(tok: Option<&str>, what: &str) -> Result<usize> {
    let v: usize = tok
        .ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("invalid {what}")))?;
    if v == 0 {
        return Err(Error::MalformedHeader(format!("{what} must be positive")));
    }
    Ok(v)
}

fn payload_len(dims: &[usize], elem: usize) -> Result<usize> {
    dims.iter()
        .try_fold(elem, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::MalformedHeader("declared size overflows".into()))
}

pub fn load_raster(path: impl AsRef<Path>) -> Result<Raster> {
    let bytes = read_bytes(path.as_ref())?;
    decode_raster(&bytes)
}

pub fn decode_raster(bytes: &[u8]) -> Result<Raster> {
    if bytes.starts_with(FEB1_MAGIC.as_bytes()) {
        decode_feb1(bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        let pnm = decode_pnm(bytes)?;
        let n = pnm.width * pnm.height;
        let mut data = vec![0f32; n * pnm.channels];
        for (i, &v) in pnm.samples.iter().enumerate() {
            let (p, c) = (i / pnm.channels, i % pnm.channels);
            data[c * n + p] = v as f32;
        }
        Raster::new(pnm.width, pnm.height, pnm.channels, data)
    } else {
        Err(Error::MalformedHeader(
            "expected FEB1 or binary PGM/PPM magic".into(),
        ))
    }
}

fn decode_feb1(bytes: &[u8]) -> Result<Raster> {
    let (line, payload) = header_line(bytes)?;
    let mut toks = line.split(' ');
    if toks.next() != Some(FEB1_MAGIC) {
        return Err(Error::MalformedHeader("bad FEB1 magic".into()));
    }
    let w = parse_dim(toks.next(), "width")?;
    let h = parse_dim(toks.next(), "height")?;
    let b = parse_dim(toks.next(), "bands")?;
    if toks.next() != Some("f32") || toks.next().is_some() {
        return Err(Error::MalformedHeader("FEB1 sample type must be f32".into()));
    }
    let expected = payload_len(&[w, h, b], 4)?;
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    let data: Vec<f32> = payload[..expected]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Raster::new(w, h, b, data)
}

pub fn encode_raster(raster: &Raster) -> Vec<u8> {
    let header = format!(
        "{FEB1_MAGIC} {} {} {} f32\n",
        raster.width(),
        raster.height(),
        raster.bands()
    );
    let mut out = Vec::with_capacity(header.len() + raster.data().len() * 4);
    out.extend_from_slice(header.as_bytes());
    for v in raster.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn save_raster(path: impl AsRef<Path>, raster: &Raster) -> Result<()> {
    write_bytes(path.as_ref(), &encode_raster(raster))
}

pub fn load_label_map(path: impl AsRef<Path>) -> Result<LabelMap> {
    let bytes = read_bytes(path.as_ref())?;
    decode_label_map(&bytes)
}

pub fn decode_label_map(bytes: &[u8]) -> Result<LabelMap> {
    let (line, payload) = header_line(bytes)?;
    let mut toks = line.split(' ');
    if toks.next() != Some(FEL1_MAGIC) {
        return Err(Error::MalformedHeader("bad FEL1 magic".into()));
    }
    let w = parse_dim(toks.next(), "width")?;
    let h = parse_dim(toks.next(), "height")?;
    if toks.next().is_some() {
        return Err(Error::MalformedHeader("trailing FEL1 header fields".into()));
    }
    let expected = payload_len(&[w, h], 4)?;
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    let labels = payload[..expected]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    LabelMap::from_raw(w, h, labels)
}

pub fn encode_label_map(labels: &LabelMap) -> Vec<u8> {
    let header = format!("{FEL1_MAGIC} {} {}\n", labels.width(), labels.height());
    let mut out = Vec::with_capacity(header.len() + labels.len() * 4);
    out.extend_from_slice(header.as_bytes());
    for l in labels.labels() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out
}

pub fn save_label_map(path: impl AsRef<Path>, labels: &LabelMap) -> Result<()> {
    write_bytes(path.as_ref(), &encode_label_map(labels))
}

pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let bytes = read_bytes(path.as_ref())?;
    decode_ground_truth(&bytes)
}

pub fn decode_ground_truth(bytes: &[u8]) -> Result<GroundTruth> {
    if !bytes.starts_with(b"P5") {
        return Err(Error::MalformedHeader(
            "ground truth must be a binary PGM (P5)".into(),
        ));
    }
    let pnm = decode_pnm(bytes)?;
    if pnm.maxval > 255 {
        return Err(Error::MalformedHeader(
            "ground truth must be an 8-bit PGM".into(),
        ));
    }
    let classes = pnm
        .samples
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            u8::try_from(v)
                .ok()
                .and_then(GtClass::from_byte)
                .ok_or(Error::IllegalPixelValue { value: v, index })
        })
        .collect::<Result<Vec<_>>>()?;
    GroundTruth::new(pnm.width, pnm.height, classes)
}

pub fn encode_ground_truth(gt: &GroundTruth) -> Vec<u8> {
    let bytes: Vec<u8> = gt.classes().iter().map(|c| c.to_byte()).collect();
    encode_pgm(gt.width(), gt.height(), &bytes)
}

pub fn save_ground_truth(path: impl AsRef<Path>, gt: &GroundTruth) -> Result<()> {
    write_bytes(path.as_ref(), &encode_ground_truth(gt))
}

pub fn encode_pgm(width: usize, height: usize, bytes: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(bytes);
    out
}

struct Pnm {
    width: usize,
    height: usize,
    channels: usize,
    maxval: u16,
    samples: Vec<u16>,
}

fn decode_pnm(bytes: &[u8]) -> Result<Pnm> {
    let channels = match &bytes[..2.min(bytes.len())] {
        b"P5" => 1,
        b"P6" => 3,
        _ => return Err(Error::MalformedHeader("bad PNM magic".into())),
    };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and '#' comments may precede every header token
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(Error::MalformedHeader("PNM header ended early".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        let tok = std::str::from_utf8(&bytes[start..pos]).unwrap_or("");
        *field = parse_dim(Some(tok), "PNM header field")?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::MalformedHeader("PNM header not terminated".into())),
    }
    let [width, height, maxval] = fields;
    if maxval > 65535 {
        return Err(Error::MalformedHeader("PNM maxval exceeds 65535".into()));
    }
    let sample_bytes = if maxval > 255 { 2 } else { 1 };
    let expected = payload_len(&[width, height, channels], sample_bytes)?;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    let samples = if sample_bytes == 1 {
        payload[..expected].iter().map(|&b| b as u16).collect()
    } else {
        payload[..expected]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    Ok(Pnm {
        width,
        height,
        channels,
        maxval: maxval as u16,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn feb1(w: usize, h: usize, b: usize, vals: &[f32]) -> Vec<u8> {
        let mut out = format!("FEB1 {w} {h} {b} f32\n").into_bytes();
        for v in vals {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    #[test]
    fn feb1_small_round_trip() {
        let r = decode_raster(&feb1(2, 2, 1, &[0.0, 1.0, 2.0, 3.0])).unwrap();
        assert_eq!(r.data(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!((r.width(), r.height(), r.bands()), (2, 2, 1));
    }

    #[test]
    fn feb1_study_area_dimensions() {
        let (w, h, b) = (1230, 843, 3);
        let vals: Vec<f32> = (0..w * h * b).map(|i| (i % 1000) as f32).collect();
        let r = decode_raster(&feb1(w, h, b, &vals)).unwrap();
        assert_eq!(r.data().len(), 1230 * 843 * 3);
        assert_eq!(r.data(), &vals[..]);
    }

    #[test]
    fn feb1_errors() {
        let mut bytes = feb1(2, 2, 1, &[0.0, 1.0, 2.0]);
        assert!(matches!(
            decode_raster(&bytes),
            Err(Error::TruncatedPayload {
                expected: 16,
                found: 12
            })
        ));
        bytes = feb1(1, 1, 1, &[f32::INFINITY]);
        assert!(matches!(
            decode_raster(&bytes),
            Err(Error::NonFiniteValue { .. })
        ));
        assert!(matches!(
            decode_raster(b"FEB1 2 x 1 f32\n"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            decode_raster(b"FEB1 1 1 1 f64\n\0\0\0\0\0\0\0\0"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            decode_raster(b"GIF89a"),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn pgm_is_widened_without_rescaling() {
        let mut bytes = b"P5\n3 1\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 128, 255]);
        let r = decode_raster(&bytes).unwrap();
        assert_eq!(r.bands(), 1);
        assert_eq!(r.data(), &[0.0, 128.0, 255.0]);
    }

    #[test]
    fn ppm_is_deinterleaved_and_comments_skipped() {
        let mut bytes = b"P6\n# made by hand\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 4, 5, 6]);
        let r = decode_raster(&bytes).unwrap();
        assert_eq!(r.bands(), 3);
        assert_eq!(r.band(0), &[1.0, 4.0]);
        assert_eq!(r.band(1), &[2.0, 5.0]);
        assert_eq!(r.band(2), &[3.0, 6.0]);
    }

    #[test]
    fn ground_truth_encoding() {
        let gt = decode_ground_truth(&encode_pgm(3, 1, &[0, 255, 128])).unwrap();
        assert_eq!(
            gt.classes(),
            &[GtClass::Forest, GtClass::Deforest, GtClass::Excluded]
        );
        let gt = decode_ground_truth(&encode_pgm(2, 2, &[0; 4])).unwrap();
        assert!(gt.classes().iter().all(|&c| c == GtClass::Forest));
        assert!(matches!(
            decode_ground_truth(&encode_pgm(2, 1, &[0, 7])),
            Err(Error::IllegalPixelValue { value: 7, index: 1 })
        ));
        assert!(matches!(
            decode_ground_truth(b"P2\n1 1\n255\n0"),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn fel1_truncated() {
        let mut bytes = b"FEL1 2 2\n".to_vec();
        bytes.extend_from_slice(&[0u8; 12]);
        assert!(matches!(
            decode_label_map(&bytes),
            Err(Error::TruncatedPayload { .. })
        ));
    }

    proptest! {
        #[test]
        fn raster_round_trip_is_bit_exact(
            w in 1usize..6, h in 1usize..6, b in 1usize..4,
            seed in proptest::collection::vec(-1e6f32..1e6, 150)
        ) {
            let data: Vec<f32> = (0..w * h * b).map(|i| seed[i % seed.len()]).collect();
            let r = Raster::new(w, h, b, data).unwrap();
            let back = decode_raster(&encode_raster(&r)).unwrap();
            prop_assert_eq!(r.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                            back.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }

        #[test]
        fn label_round_trip(w in 1usize..8, h in 1usize..8, raw in proptest::collection::vec(0u32..10_000, 64)) {
            let m = LabelMap::from_raw(w, h, raw[..w * h].to_vec()).unwrap();
            let back = decode_label_map(&encode_label_map(&m)).unwrap();
            prop_assert_eq!(m, back);
        }
    }
}
