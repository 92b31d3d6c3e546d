//! NLIR: binary container for an impulse response.
//!
//! | bytes | content |
//! |---|---|
//! | 4 | magic `NLIR` |
//! | 4 | `u32` version, currently 1 |
//! | 12 | `u32` laser count `K_p`, SPAD count `K_i`, bin count |
//! | 16 | `f64` bin width and time origin, seconds |
//! | 24 | `f64` wall normal |
//! | `24 K_p` | `f64` laser positions |
//! | `24 K_i` | `f64` SPAD positions |
//! | `4 K_p K_i bins` | `f32` histogram, laser-major, then SPAD, then time |
//!
//! Everything is little-endian. Samples are rounded to binary32 on write.

use std::path::Path;

use super::bytes::{sized, Reader, Writer};
use crate::error::{Error, FormatError, Result};
use crate::sim::{ImpulseResponse, RelayTopology, TimeAxis};

pub const MAGIC: [u8; 4] = *b"NLIR";

pub fn encode_nlir(h: &ImpulseResponse) -> Vec<u8> {
    let topo = &h.topology;
    let mut w = Writer::default();
    w.header(&MAGIC);
    w.u32(topo.laser_count() as u32);
    w.u32(topo.spad_count() as u32);
    w.u32(h.time_axis.bin_count as u32);
    w.f64(h.time_axis.bin_width);
    w.f64(h.time_axis.origin);
    w.vec3(topo.wall_normal);
    for &p in topo.laser_points.iter().chain(&topo.spad_points) {
        w.vec3(p);
    }
    for &v in &h.data {
        w.f32(v as f32);
    }
    w.buf
}

pub fn decode_nlir(bytes: &[u8]) -> Result<ImpulseResponse, FormatError> {
    let mut r = Reader::new(bytes);
    r.header(&MAGIC)?;
    let kp = r.u32()? as usize;
    let ki = r.u32()? as usize;
    let bins = r.u32()? as usize;
    let bin_width = r.f64()?;
    let origin = r.f64()?;
    let wall_normal = r.vec3()?;

    let laser_bytes = sized(&[kp], 24)?;
    let spad_bytes = sized(&[ki], 24)?;
    if r.remaining() < laser_bytes.saturating_add(spad_bytes) {
        return Err(FormatError::TruncatedHeader {
            needed: bytes.len() - r.remaining() + laser_bytes + spad_bytes,
            found: bytes.len(),
        });
    }
    let laser_points = (0..kp).map(|_| r.vec3()).collect::<Result<Vec<_>, _>>()?;
    let spad_points = (0..ki).map(|_| r.vec3()).collect::<Result<Vec<_>, _>>()?;

    let payload = r.payload(sized(&[kp, ki, bins], 4)?)?;
    let mut data = Vec::with_capacity(payload.len() / 4);
    for (i, c) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
        if !v.is_finite() {
            return Err(FormatError::NonFinite(i));
        }
        if v < 0.0 {
            return Err(FormatError::Negative(i));
        }
        data.push(f64::from(v));
    }

    let topology = RelayTopology {
        laser_points,
        spad_points,
        wall_normal,
    };
    let time_axis = TimeAxis {
        bin_width,
        bin_count: bins,
        origin,
    };
    topology
        .validate()
        .and_then(|_| time_axis.validate())
        .map_err(|e| FormatError::Malformed(e.to_string()))?;
    Ok(ImpulseResponse {
        topology,
        time_axis,
        data,
    })
}

pub fn write_nlir(h: &ImpulseResponse, path: &Path) -> Result<()> {
    super::write_file(path, &encode_nlir(h))
}

pub fn read_nlir(path: &Path) -> Result<ImpulseResponse> {
    let bytes = super::read_file(path)?;
    decode_nlir(&bytes).map_err(|e| Error::format(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use proptest::prelude::*;

    fn fixture() -> ImpulseResponse {
        let topology = RelayTopology {
            laser_points: vec![Vec3::new(0.1, 0.0, -0.2)],
            spad_points: vec![Vec3::new(-0.3, 0.0, 0.4)],
            wall_normal: Vec3::new(0.0, 1.0, 0.0),
        };
        let axis = TimeAxis::new(85e-12, 4, 0.0).unwrap();
        ImpulseResponse::new(topology, axis, vec![0.0, 1.5, 0.25, 3.0]).unwrap()
    }

    #[test]
    fn fixture_is_124_bytes() {
        let bytes = encode_nlir(&fixture());
        // magic, version, three counts, dt + origin, normal, one laser, one spad, four samples
        assert_eq!(bytes.len(), 4 + 4 + 3 * 4 + 2 * 8 + 3 * 8 + 3 * 8 + 3 * 8 + 4 * 4);
        assert_eq!(bytes.len(), 124);
        assert_eq!(&bytes[..4], b"NLIR");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[108..112], &0.0f32.to_le_bytes());
        assert_eq!(&bytes[112..116], &1.5f32.to_le_bytes());
    }

    #[test]
    fn samples_are_stored_as_binary32() {
        let mut h = fixture();
        h.data[1] = 0.1;
        let back = decode_nlir(&encode_nlir(&h)).unwrap();
        assert_eq!(back.data[1], 0.1f32 as f64);
    }

    #[test]
    fn bad_magic_names_the_bytes() {
        let mut bytes = encode_nlir(&fixture());
        bytes[..4].copy_from_slice(b"NLIX");
        let err = decode_nlir(&bytes).unwrap_err();
        assert_eq!(
            err,
            FormatError::BadMagic {
                found: *b"NLIX",
                expected: MAGIC
            }
        );
        assert!(err.to_string().contains("[78, 76, 73, 88]"));
    }

    #[test]
    fn version_two_is_rejected() {
        let mut bytes = encode_nlir(&fixture());
        bytes[4] = 2;
        assert_eq!(decode_nlir(&bytes), Err(FormatError::UnsupportedVersion(2)));
    }

    #[test]
    fn truncated_payload() {
        let bytes = encode_nlir(&fixture());
        assert_eq!(
            decode_nlir(&bytes[..122]),
            Err(FormatError::PayloadSize {
                expected: 16,
                found: 14
            })
        );
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(matches!(
            decode_nlir(&longer),
            Err(FormatError::PayloadSize { .. })
        ));
    }

    #[test]
    fn truncated_header() {
        let bytes = encode_nlir(&fixture());
        assert!(matches!(
            decode_nlir(&bytes[..30]),
            Err(FormatError::TruncatedHeader { .. })
        ));
        assert!(matches!(
            decode_nlir(&bytes[..70]),
            Err(FormatError::TruncatedHeader { needed: 108, found: 70 })
        ));
    }

    #[test]
    fn rejects_nan_and_negative_samples() {
        let mut bytes = encode_nlir(&fixture());
        bytes[116..120].copy_from_slice(&f32::NAN.to_le_bytes());
        assert_eq!(decode_nlir(&bytes), Err(FormatError::NonFinite(2)));
        bytes[116..120].copy_from_slice(&(-1.0f32).to_le_bytes());
        assert_eq!(decode_nlir(&bytes), Err(FormatError::Negative(2)));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.nlir");
        write_nlir(&fixture(), &path).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 124);
        assert_eq!(read_nlir(&path).unwrap(), fixture());
        let missing = read_nlir(&dir.path().join("nope.nlir")).unwrap_err();
        assert!(matches!(missing, Error::Io { .. }));
    }

    fn coord() -> impl Strategy<Value = f64> {
        -2.0..2.0f64
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_identical(
            lasers in prop::collection::vec((coord(), coord()), 1..4),
            spads in prop::collection::vec((coord(), coord()), 1..4),
            bins in 1usize..6,
            dt in 1e-12..1e-9f64,
            origin in -1e-9..1e-9f64,
            seed in any::<u64>(),
        ) {
            let topology = RelayTopology {
                laser_points: lasers.iter().map(|&(x, z)| Vec3::new(x, 0.0, z)).collect(),
                spad_points: spads.iter().map(|&(x, z)| Vec3::new(x, 0.0, z)).collect(),
                wall_normal: Vec3::new(0.0, 1.0, 0.0),
            };
            let n = lasers.len() * spads.len() * bins;
            let data: Vec<f64> = (0..n)
                .map(|i| ((seed.rotate_left(i as u32 % 64) % 10_000) as f32 / 7.0) as f64)
                .collect();
            let h = ImpulseResponse::new(topology, TimeAxis::new(dt, bins, origin).unwrap(), data).unwrap();
            let bytes = encode_nlir(&h);
            let back = decode_nlir(&bytes).unwrap();
            prop_assert_eq!(encode_nlir(&back), bytes);
            prop_assert_eq!(back, h);
        }
    }
}
