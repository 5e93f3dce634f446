//! Versioned binary vocabulary format.
//!
//! Layout, all little-endian:
//! - magic `"SLVOC"` plus one version byte (`'1'`)
//! - u32 branching, u32 depth, u32 word count
//! - nodes in breadth-first order: 32-byte centroid, u32 child count,
//!   u32 child ids (BFS positions)
//! - one f64 idf weight per word
//!
//! The node table needs no explicit length: breadth-first order allocates
//! children contiguously, so reading stops when every announced child has
//! been consumed. Word ids are implicit: leaves numbered in breadth-first
//! order.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::features::BinaryDescriptor;
use crate::vocab::{Node, VocabularyTree};

const MAGIC: &[u8; 5] = b"SLVOC";
const VERSION: u8 = b'1';

#[derive(Debug, Error)]
pub enum VocabIoError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: not a vocabulary file")]
    BadMagic,
    #[error("unsupported vocabulary version {found}, expected {expected}")]
    VersionMismatch { found: u8, expected: u8 },
    #[error("file truncated")]
    Truncated,
    #[error("malformed vocabulary: {0}")]
    Malformed(String),
}

fn read_exact(reader: &mut impl Read, buf: &mut [u8]) -> Result<(), VocabIoError> {
    reader.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            VocabIoError::Truncated
        } else {
            VocabIoError::Io(e)
        }
    })
}

fn read_u32(reader: &mut impl Read) -> Result<u32, VocabIoError> {
    let mut buf = [0u8; 4];
    read_exact(reader, &mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(reader: &mut impl Read) -> Result<f64, VocabIoError> {
    let mut buf = [0u8; 8];
    read_exact(reader, &mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

impl VocabularyTree {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), VocabIoError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let (branching, depth, nodes, idf) = self.parts();
        out.write_all(MAGIC)?;
        out.write_all(&[VERSION])?;
        out.write_all(&branching.to_le_bytes())?;
        out.write_all(&depth.to_le_bytes())?;
        out.write_all(&(idf.len() as u32).to_le_bytes())?;
        for node in nodes {
            out.write_all(&node.centroid.to_bytes())?;
            out.write_all(&(node.children.len() as u32).to_le_bytes())?;
            for child in &node.children {
                out.write_all(&child.to_le_bytes())?;
            }
        }
        for weight in idf {
            out.write_all(&weight.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, VocabIoError> {
        let mut input = std::io::BufReader::new(std::fs::File::open(path)?);

        let mut magic = [0u8; 5];
        read_exact(&mut input, &mut magic)?;
        if &magic != MAGIC {
            return Err(VocabIoError::BadMagic);
        }
        let mut version = [0u8; 1];
        read_exact(&mut input, &mut version)?;
        if version[0] != VERSION {
            return Err(VocabIoError::VersionMismatch {
                found: version[0],
                expected: VERSION,
            });
        }

        let branching = read_u32(&mut input)?;
        let depth = read_u32(&mut input)?;
        let word_count = read_u32(&mut input)?;

        // Stream the BFS node table: children are allocated contiguously,
        // so node `i`'s child ids must be exactly the next unseen indices
        // and the table ends when all announced children have been read.
        let mut nodes: Vec<Node> = Vec::new();
        let mut announced = 1usize;
        let mut next_word = 0u32;
        while nodes.len() < announced {
            let idx = nodes.len();
            let mut centroid = [0u8; 32];
            read_exact(&mut input, &mut centroid)?;
            let child_count = read_u32(&mut input)? as usize;
            let mut children = Vec::with_capacity(child_count);
            for _ in 0..child_count {
                let child = read_u32(&mut input)?;
                if child as usize != announced + children.len() {
                    return Err(VocabIoError::Malformed(format!(
                        "node {idx} references child {child} outside BFS order"
                    )));
                }
                children.push(child);
            }
            announced += child_count;
            let word = if children.is_empty() {
                let w = next_word;
                next_word += 1;
                Some(w)
            } else {
                None
            };
            nodes.push(Node {
                centroid: BinaryDescriptor::from_bytes(&centroid),
                children,
                word,
            });
        }
        if next_word != word_count {
            return Err(VocabIoError::Malformed(format!(
                "{next_word} leaves but header declares {word_count} words"
            )));
        }
        let mut idf = Vec::with_capacity(word_count as usize);
        for _ in 0..word_count {
            idf.push(read_f64(&mut input)?);
        }

        Ok(VocabularyTree::from_parts(branching, depth, nodes, idf))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn trained_tree() -> (VocabularyTree, Vec<BinaryDescriptor>) {
        let mut rng = StdRng::seed_from_u64(31);
        let corpus: Vec<BinaryDescriptor> = (0..200)
            .map(|_| BinaryDescriptor([rng.random(), rng.random(), rng.random(), rng.random()]))
            .collect();
        let tree = VocabularyTree::train(&corpus, 3, 3, 77).unwrap();
        (tree, corpus)
    }

    #[test]
    fn round_trip_preserves_structure_and_transforms() {
        let (tree, corpus) = trained_tree();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("test.voc");
        tree.save(&path).unwrap();
        let loaded = VocabularyTree::load(&path).unwrap();
        assert_eq!(tree, loaded);

        let mut rng = StdRng::seed_from_u64(32);
        for _ in 0..100 {
            let sample: Vec<BinaryDescriptor> = (0..20)
                .map(|_| corpus[rng.random_range(0..corpus.len())])
                .collect();
            assert_eq!(tree.transform(&sample), loaded.transform(&sample));
        }
    }

    #[test]
    fn truncated_file_is_detected() {
        let (tree, _) = trained_tree();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("test.voc");
        tree.save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let cut = dir.path().join("cut.voc");
        std::fs::write(&cut, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(
            VocabularyTree::load(&cut),
            Err(VocabIoError::Truncated)
        ));
    }

    #[test]
    fn wrong_magic_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bogus.voc");
        std::fs::write(&path, b"NOTVOC-DEFINITELY-NOT").unwrap();
        assert!(matches!(
            VocabularyTree::load(&path),
            Err(VocabIoError::BadMagic)
        ));
    }

    #[test]
    fn non_bfs_child_id_is_malformed() {
        let (tree, _) = trained_tree();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("test.voc");
        tree.save(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        // First child id of the root lives right after the 18-byte header,
        // the 32-byte centroid and the 4-byte child count.
        bytes[54] = 99;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            VocabularyTree::load(&path),
            Err(VocabIoError::Malformed(_))
        ));
    }

    #[test]
    fn wrong_version_is_detected() {
        let (tree, _) = trained_tree();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("test.voc");
        tree.save(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[5] = b'9';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            VocabularyTree::load(&path),
            Err(VocabIoError::VersionMismatch { found: b'9', .. })
        ));
    }
}
