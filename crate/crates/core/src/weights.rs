//! `.igw` weight files: a text manifest followed by a little-endian `f32` blob.
//!
//! ```text
//! IGW1
//! crc32 <8 lowercase hex digits, CRC-32 (IEEE) of the blob>
//! blob_bytes <decimal byte length of the blob>
//! tensor <name> <byte offset> <dim0>x<dim1>x...
//! ...
//! end
//! <blob>
//! ```
//!
//! Every header line ends with `\n`. Tensors appear in blob order, packed
//! without gaps, values row-major (convolutions `[out][in][kh][kw]`).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::latent::{box_muller, coordinate_hash, unit_open};
use crate::network::{weight_layout, NetworkSpec};

const MAGIC: &str = "IGW1";
/// Site ids at or above this are reserved for weight initialization draws.
const WEIGHT_SITE_BASE: u32 = 0x8000_0000;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightStore {
    tensors: Vec<NamedTensor>,
}

fn gaussian(seed: u64, site: u32, index: usize) -> f64 {
    let w0 = coordinate_hash(seed, site, index as i64, 0, 0, 0);
    let w1 = coordinate_hash(seed, site, index as i64, 0, 0, 1);
    box_muller(unit_open(w0), unit_open(w1))
}

impl WeightStore {
    pub fn new() -> WeightStore {
        WeightStore::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, shape: Vec<usize>, values: Vec<f32>) -> Result<()> {
        let name = name.into();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::Manifest(format!("invalid tensor name {name:?}")));
        }
        if shape.iter().product::<usize>() != values.len() {
            return Err(Error::Shape(format!(
                "tensor `{name}`: shape {shape:?} does not hold {} values",
                values.len()
            )));
        }
        if self.get(&name).is_some() {
            return Err(Error::Manifest(format!("duplicate tensor `{name}`")));
        }
        self.tensors.push(NamedTensor {
            name,
            shape,
            values,
        });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&NamedTensor> {
        self.tensors.iter().find(|t| t.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.iter().map(|t| t.name.as_str())
    }

    pub fn tensors(&self) -> &[NamedTensor] {
        &self.tensors
    }

    /// Reproducible weights for `spec`: convolutions `N(0, 2 / fan_in)` with
    /// zero bias; ada-norm `beta ~ 1 + 0.2 N`, `gamma ~ 0.2 N`, noise weights
    /// `N(0, 1)`. Draws come from the coordinate hash keyed by tensor index.
    pub fn init_random(spec: &NetworkSpec, seed: u64) -> Result<WeightStore> {
        spec.validate()?;
        let mut store = WeightStore::new();
        for (t, (name, shape)) in weight_layout(spec).into_iter().enumerate() {
            let site = WEIGHT_SITE_BASE + t as u32;
            let n: usize = shape.iter().product();
            let draw = |scale: f64, offset: f64| -> Vec<f32> {
                (0..n)
                    .map(|i| (offset + scale * gaussian(seed, site, i)) as f32)
                    .collect()
            };
            let values = if name.ends_with(".weight") {
                let fan_in = shape[1] * shape[2] * shape[3];
                draw((2.0 / fan_in as f64).sqrt(), 0.0)
            } else if name.ends_with(".bias") {
                vec![0.0; n]
            } else if name.ends_with(".beta") {
                draw(0.2, 1.0)
            } else if name.ends_with(".gamma") {
                draw(0.2, 0.0)
            } else {
                draw(1.0, 0.0)
            };
            store.insert(name, shape, values)?;
        }
        Ok(store)
    }

    /// Serializes to the `.igw` byte layout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut blob = Vec::new();
        let mut manifest = String::new();
        for t in &self.tensors {
            let dims: Vec<String> = t.shape.iter().map(usize::to_string).collect();
            manifest.push_str(&format!("tensor {} {} {}\n", t.name, blob.len(), dims.join("x")));
            for v in &t.values {
                blob.extend_from_slice(&v.to_le_bytes());
            }
        }
        let mut out = format!(
            "{MAGIC}\ncrc32 {:08x}\nblob_bytes {}\n{manifest}end\n",
            crc32fast::hash(&blob),
            blob.len()
        )
        .into_bytes();
        out.extend_from_slice(&blob);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<WeightStore> {
        let mut pos = 0;
        let mut next_line = |what: &str| -> Result<&str> {
            let rest = &bytes[pos..];
            let end = rest
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| Error::Manifest(format!("unterminated header while reading {what}")))?;
            pos += end + 1;
            std::str::from_utf8(&rest[..end])
                .map_err(|_| Error::Manifest(format!("{what} is not UTF-8")))
        };
        let field = |line: &str, key: &str| -> Result<String> {
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| Error::Manifest(format!("expected `{key} ...`, found {line:?}")))
        };

        if next_line("magic")? != MAGIC {
            return Err(Error::Manifest("missing IGW1 magic".into()));
        }
        let crc_text = field(next_line("crc32")?, "crc32")?;
        let expected_crc = u32::from_str_radix(&crc_text, 16)
            .map_err(|_| Error::Manifest(format!("bad crc32 {crc_text:?}")))?;
        let len_text = field(next_line("blob_bytes")?, "blob_bytes")?;
        let blob_bytes: usize = len_text
            .parse()
            .map_err(|_| Error::Manifest(format!("bad blob_bytes {len_text:?}")))?;

        let mut entries = Vec::new();
        loop {
            let line = next_line("manifest")?;
            if line == "end" {
                break;
            }
            let rest = field(line, "tensor")?;
            let parts: Vec<&str> = rest.split(' ').collect();
            let [name, offset, dims] = parts[..] else {
                return Err(Error::Manifest(format!("malformed tensor line {line:?}")));
            };
            let offset: usize = offset
                .parse()
                .map_err(|_| Error::Manifest(format!("bad offset in {line:?}")))?;
            let shape = dims
                .split('x')
                .map(|d| d.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Manifest(format!("bad shape in {line:?}")))?;
            entries.push((name.to_string(), offset, shape));
        }

        let blob = &bytes[pos..];
        if blob.len() != blob_bytes {
            return Err(Error::Manifest(format!(
                "blob has {} bytes, manifest declares {blob_bytes}",
                blob.len()
            )));
        }
        let actual_crc = crc32fast::hash(blob);
        if actual_crc != expected_crc {
            return Err(Error::Checksum {
                expected: expected_crc,
                actual: actual_crc,
            });
        }

        let mut store = WeightStore::new();
        let mut cursor = 0;
        for (name, offset, shape) in entries {
            if offset != cursor {
                return Err(Error::Manifest(format!(
                    "tensor `{name}` at offset {offset}, expected {cursor}"
                )));
            }
            let n: usize = shape.iter().product();
            let end = offset + 4 * n;
            if end > blob.len() {
                return Err(Error::Manifest(format!("tensor `{name}` runs past the blob")));
            }
            let values = blob[offset..end]
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            store.insert(name, shape, values)?;
            cursor = end;
        }
        if cursor != blob.len() {
            return Err(Error::Manifest(format!(
                "{} trailing blob bytes not described by the manifest",
                blob.len() - cursor
            )));
        }
        Ok(store)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<WeightStore> {
        WeightStore::from_bytes(&fs::read(path)?)
    }
}

/// Parameter count of a spec (for reports).
pub fn parameter_count(spec: &NetworkSpec) -> usize {
    weight_layout(spec)
        .iter()
        .map(|(_, s)| s.iter().product::<usize>())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{g0_with_widths, reference_g0, Generator};

    #[test]
    fn init_is_reproducible() {
        let spec = g0_with_widths(8, 4);
        let a = WeightStore::init_random(&spec, 3).unwrap();
        let b = WeightStore::init_random(&spec, 3).unwrap();
        let c = WeightStore::init_random(&spec, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn init_scale_follows_fan_in() {
        let store = WeightStore::init_random(&reference_g0(), 1).unwrap();
        let w = store.get("layers.02.weight").unwrap();
        let n = w.values.len() as f64;
        let var = w.values.iter().map(|&v| (v as f64).powi(2)).sum::<f64>() / n;
        let expected = 2.0 / (128.0 * 9.0);
        assert!((var / expected - 1.0).abs() < 0.02, "var {var} vs {expected}");
    }

    #[test]
    fn byte_round_trip() {
        let spec = g0_with_widths(8, 4);
        let store = WeightStore::init_random(&spec, 9).unwrap();
        let back = WeightStore::from_bytes(&store.to_bytes()).unwrap();
        assert_eq!(back, store);
        for (a, b) in back.tensors().iter().zip(store.tensors()) {
            let bits_a: Vec<u32> = a.values.iter().map(|v| v.to_bits()).collect();
            let bits_b: Vec<u32> = b.values.iter().map(|v| v.to_bits()).collect();
            assert_eq!(bits_a, bits_b);
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.igw");
        let store = WeightStore::init_random(&g0_with_widths(4, 2), 1).unwrap();
        store.save(&path).unwrap();
        assert_eq!(WeightStore::load(&path).unwrap(), store);
    }

    #[test]
    fn truncated_blob_is_an_error() {
        let bytes = WeightStore::init_random(&g0_with_widths(4, 2), 1).unwrap().to_bytes();
        for cut in [bytes.len() - 1, bytes.len() / 2, 10, 0] {
            assert!(WeightStore::from_bytes(&bytes[..cut]).is_err(), "cut at {cut}");
        }
    }

    #[test]
    fn corrupted_blob_fails_checksum() {
        let mut bytes = WeightStore::init_random(&g0_with_widths(4, 2), 1).unwrap().to_bytes();
        let last = bytes.len() - 1;
        bytes[last] ^= 0x40;
        assert!(matches!(WeightStore::from_bytes(&bytes), Err(Error::Checksum { .. })));
    }

    #[test]
    fn manifest_inconsistency() {
        let mut store = WeightStore::new();
        store.insert("a", vec![2], vec![1.0, 2.0]).unwrap();
        let text = String::from_utf8_lossy(&store.to_bytes()).into_owned();
        let tampered = text.replace("tensor a 0 2", "tensor a 0 3");
        assert!(matches!(
            WeightStore::from_bytes(tampered.as_bytes()),
            Err(Error::Manifest(_))
        ));
    }

    #[test]
    fn unknown_and_missing_tensors() {
        let spec = g0_with_widths(4, 2);
        let mut store = WeightStore::init_random(&spec, 1).unwrap();
        store.insert("bogus", vec![1], vec![0.0]).unwrap();
        assert!(matches!(
            Generator::from_store(spec.clone(), &store),
            Err(Error::UnknownTensor(n)) if n == "bogus"
        ));
        assert!(matches!(
            Generator::from_store(spec, &WeightStore::new()),
            Err(Error::MissingTensor(_))
        ));
    }
}
