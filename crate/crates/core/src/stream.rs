//! Binary sample streams.
//!
//! All integers little-endian:
//!
//! | field        | type                      |
//! |--------------|---------------------------|
//! | magic        | `b"LGTS"`                 |
//! | version      | u16 (= 1)                 |
//! | dim          | u8                        |
//! | ranges       | dim × (i32 lo, i32 hi)    |
//! | group name   | u16 length + UTF-8 bytes  |
//! | beta         | f64                       |
//! | seed         | u64                       |
//! | edge count   | u32                       |
//! | element width| u8 (1 or 2 bytes)         |
//!
//! followed by zero or more records, each `edge count` element indices of
//! `element width` bytes, until end of file.

use std::io::{self, Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use crate::gibbs::EdgeConfig;
use crate::group::Element;

const MAGIC: &[u8; 4] = b"LGTS";
const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("not a sample stream (bad magic)")]
    BadMagic,
    #[error("unsupported stream version {0}")]
    BadVersion(u16),
    #[error("malformed header: {0}")]
    Malformed(String),
    #[error("record has {got} edges, header says {expected}")]
    WrongLength { got: usize, expected: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StreamHeader {
    pub ranges: Vec<(i32, i32)>,
    pub group: String,
    pub beta: f64,
    pub seed: u64,
    pub num_edges: usize,
    pub element_width: u8,
}

impl StreamHeader {
    pub fn new(ranges: Vec<(i32, i32)>, group: impl Into<String>, beta: f64, seed: u64, num_edges: usize, order: usize) -> Self {
        let element_width = if order <= 256 { 1 } else { 2 };
        StreamHeader { ranges, group: group.into(), beta, seed, num_edges, element_width }
    }

    fn write_to<W: Write>(&self, w: &mut W) -> Result<(), StreamError> {
        w.write_all(MAGIC)?;
        w.write_u16::<LittleEndian>(VERSION)?;
        w.write_u8(self.ranges.len() as u8)?;
        for &(lo, hi) in &self.ranges {
            w.write_i32::<LittleEndian>(lo)?;
            w.write_i32::<LittleEndian>(hi)?;
        }
        let name = self.group.as_bytes();
        let len = u16::try_from(name.len()).map_err(|_| StreamError::Malformed("group name too long".into()))?;
        w.write_u16::<LittleEndian>(len)?;
        w.write_all(name)?;
        w.write_f64::<LittleEndian>(self.beta)?;
        w.write_u64::<LittleEndian>(self.seed)?;
        w.write_u32::<LittleEndian>(self.num_edges as u32)?;
        w.write_u8(self.element_width)?;
        Ok(())
    }

    fn read_from<R: Read>(r: &mut R) -> Result<Self, StreamError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(StreamError::BadMagic);
        }
        let version = r.read_u16::<LittleEndian>()?;
        if version != VERSION {
            return Err(StreamError::BadVersion(version));
        }
        let dim = r.read_u8()? as usize;
        let ranges = (0..dim)
            .map(|_| Ok((r.read_i32::<LittleEndian>()?, r.read_i32::<LittleEndian>()?)))
            .collect::<Result<Vec<_>, io::Error>>()?;
        let len = r.read_u16::<LittleEndian>()? as usize;
        let mut name = vec![0u8; len];
        r.read_exact(&mut name)?;
        let group = String::from_utf8(name).map_err(|e| StreamError::Malformed(e.to_string()))?;
        let beta = r.read_f64::<LittleEndian>()?;
        let seed = r.read_u64::<LittleEndian>()?;
        let num_edges = r.read_u32::<LittleEndian>()? as usize;
        let element_width = r.read_u8()?;
        if element_width != 1 && element_width != 2 {
            return Err(StreamError::Malformed(format!("element width {element_width}")));
        }
        Ok(StreamHeader { ranges, group, beta, seed, num_edges, element_width })
    }
}

pub struct SampleWriter<W: Write> {
    inner: W,
    header: StreamHeader,
}

impl<W: Write> SampleWriter<W> {
    pub fn new(mut inner: W, header: StreamHeader) -> Result<Self, StreamError> {
        header.write_to(&mut inner)?;
        Ok(SampleWriter { inner, header })
    }

    pub fn write(&mut self, sigma: &EdgeConfig) -> Result<(), StreamError> {
        if sigma.len() != self.header.num_edges {
            return Err(StreamError::WrongLength { got: sigma.len(), expected: self.header.num_edges });
        }
        for g in sigma.values() {
            if self.header.element_width == 1 {
                self.inner.write_u8(g.0 as u8)?;
            } else {
                self.inner.write_u16::<LittleEndian>(g.0)?;
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, StreamError> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub struct SampleReader<R: Read> {
    inner: R,
    header: StreamHeader,
}

impl<R: Read> SampleReader<R> {
    pub fn new(mut inner: R) -> Result<Self, StreamError> {
        let header = StreamHeader::read_from(&mut inner)?;
        Ok(SampleReader { inner, header })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    /// Next record, `None` at a clean end of file.
    pub fn next_sample(&mut self) -> Result<Option<EdgeConfig>, StreamError> {
        let width = self.header.element_width as usize;
        let mut buf = vec![0u8; self.header.num_edges * width];
        let mut filled = 0;
        while filled < buf.len() {
            let n = self.inner.read(&mut buf[filled..])?;
            if n == 0 {
                if filled == 0 {
                    return Ok(None);
                }
                return Err(StreamError::Malformed("truncated record".into()));
            }
            filled += n;
        }
        let values = buf
            .chunks(width)
            .map(|c| Element(if width == 1 { c[0] as u16 } else { u16::from_le_bytes([c[0], c[1]]) }))
            .collect();
        Ok(Some(EdgeConfig::from_values(values)))
    }

    pub fn read_all(mut self) -> Result<Vec<EdgeConfig>, StreamError> {
        let mut out = Vec::new();
        while let Some(s) = self.next_sample()? {
            out.push(s);
        }
        Ok(out)
    }
}
