use crate::error::FormatError;
use crate::geometry::Vec3;

pub(crate) const VERSION: u32 = 1;

#[derive(Default)]
pub(crate) struct Writer {
    pub buf: Vec<u8>,
}

impl Writer {
    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f32(&mut self, v: f32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn vec3(&mut self, v: Vec3) {
        self.f64(v.x);
        self.f64(v.y);
        self.f64(v.z);
    }

    pub fn header(&mut self, magic: &[u8; 4]) {
        self.buf.extend_from_slice(magic);
        self.u32(VERSION);
    }
}

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.remaining() < n {
            return Err(FormatError::TruncatedHeader {
                needed: self.pos + n,
                found: self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u32(&mut self) -> Result<u32, FormatError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub fn f64(&mut self) -> Result<f64, FormatError> {
        let b = self.take(8)?;
        let mut a = [0u8; 8];
        a.copy_from_slice(b);
        Ok(f64::from_le_bytes(a))
    }

    pub fn vec3(&mut self) -> Result<Vec3, FormatError> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }

    /// Check the magic bytes and version.
    pub fn header(&mut self, magic: &[u8; 4]) -> Result<(), FormatError> {
        let m = self.take(4)?;
        if m != magic {
            return Err(FormatError::BadMagic {
                found: [m[0], m[1], m[2], m[3]],
                expected: *magic,
            });
        }
        let version = self.u32()?;
        if version != VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        Ok(())
    }

    /// The rest of the file must be exactly `expected` bytes.
    pub fn payload(&mut self, expected: usize) -> Result<&'a [u8], FormatError> {
        let found = self.remaining();
        if found != expected {
            return Err(FormatError::PayloadSize { expected, found });
        }
        self.take(expected)
    }
}

/// `a * b * c` in bytes of `width`, or a malformed-header error on overflow.
pub(crate) fn sized(counts: &[usize], width: usize) -> Result<usize, FormatError> {
    counts
        .iter()
        .try_fold(width, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| FormatError::Malformed(format!("sample count {counts:?} overflows")))
}
