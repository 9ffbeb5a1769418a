//! `.pcmf` model files.
//!
//! Layout, all integers `u32` little-endian and all reals `f32` little-endian:
//!
//! ```text
//! magic      b"PCMF"
//! version    1
//! N          vertex count
//! K_shape    K_color    K_expression
//! T          triangle count
//! shape:      mean[3N]  basis[3N * K_shape] (column-major)  stddevs[K_shape]
//! color:      mean[3N]  basis[3N * K_color]                 stddevs[K_color]
//! expression: mean[3N]  basis[3N * K_expression]            stddevs[K_expression]
//! triangles[3T]
//! ```
//!
//! The file length must match the header exactly.

use std::fs;
use std::path::Path;

use super::face::MorphableFaceModel;
use super::mesh::TriangleTopology;
use super::pca::PrincipalComponentModel;
use super::ModelError;

pub const MAGIC: &[u8; 4] = b"PCMF";
pub const VERSION: u32 = 1;
const HEADER_WORDS: usize = 7;

pub fn encode_model(model: &MorphableFaceModel) -> Vec<u8> {
    let parts = [model.shape(), model.color(), model.expression()];
    let n = model.vertex_count();
    let mut out = Vec::with_capacity(expected_len(
        n,
        parts.map(|p| p.component_count()),
        model.topology().len(),
    ));
    out.extend_from_slice(MAGIC);
    let put_u32 = |out: &mut Vec<u8>, v: usize| out.extend_from_slice(&(v as u32).to_le_bytes());
    put_u32(&mut out, VERSION as usize);
    put_u32(&mut out, n);
    for p in parts {
        put_u32(&mut out, p.component_count());
    }
    put_u32(&mut out, model.topology().len());
    for p in parts {
        for v in p.mean().iter().chain(p.basis()).chain(p.stddevs()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    for t in model.topology().triangles() {
        for v in t {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn expected_len(n: usize, ks: [usize; 3], triangles: usize) -> usize {
    let floats: usize = ks.iter().map(|k| 3 * n + 3 * n * k + k).sum();
    4 * HEADER_WORDS + 4 * floats + 12 * triangles
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, len: usize) -> &[u8] {
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        s
    }

    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take(4).try_into().unwrap())
    }

    fn f32s(&mut self, count: usize) -> Vec<f32> {
        self.take(4 * count)
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect()
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<MorphableFaceModel, ModelError> {
    let header_len = 4 * HEADER_WORDS;
    if bytes.len() < header_len {
        return Err(ModelError::Truncated {
            expected: header_len,
            actual: bytes.len(),
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(ModelError::BadMagic);
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = r.u32();
    if version != VERSION {
        return Err(ModelError::UnsupportedVersion(version));
    }
    let n = r.u32() as usize;
    let ks = [r.u32() as usize, r.u32() as usize, r.u32() as usize];
    let t = r.u32() as usize;
    let expected = ks
        .iter()
        .try_fold(0usize, |acc, &k| {
            (3 * n).checked_mul(k + 1)?.checked_add(k)?.checked_add(acc)
        })
        .and_then(|floats| {
            floats
                .checked_mul(4)?
                .checked_add(header_len)?
                .checked_add(t.checked_mul(12)?)
        });
    match expected {
        Some(e) if e == bytes.len() => {}
        Some(e) if e > bytes.len() => {
            return Err(ModelError::Truncated {
                expected: e,
                actual: bytes.len(),
            })
        }
        Some(e) => {
            return Err(ModelError::TrailingBytes {
                expected: e,
                actual: bytes.len(),
            })
        }
        None => return Err(ModelError::HeaderOverflow),
    }

    let names = ["shape", "color", "expression"];
    let mut parts = Vec::with_capacity(3);
    for (attribute, k) in names.into_iter().zip(ks) {
        let mean = r.f32s(3 * n);
        let basis = r.f32s(3 * n * k);
        let stddevs = r.f32s(k);
        parts.push(PrincipalComponentModel::new(
            attribute, n, mean, basis, stddevs,
        )?);
    }
    let triangles = (0..t).map(|_| [r.u32(), r.u32(), r.u32()]).collect();
    let topology = TriangleTopology::new(triangles, n)?;
    let expression = parts.pop().unwrap();
    let color = parts.pop().unwrap();
    let shape = parts.pop().unwrap();
    MorphableFaceModel::new(shape, color, expression, topology)
}

pub fn save_model(model: &MorphableFaceModel, path: &Path) -> Result<(), ModelError> {
    crate::fsutil::write_atomic(path, &encode_model(model)).map_err(|source| ModelError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<MorphableFaceModel, ModelError> {
    let bytes = fs::read(path).map_err(|source| ModelError::Io {
        path: path.to_owned(),
        source,
    })?;
    decode_model(&bytes)
}
