//! Binary file formats for instances, dense matrices and query embeddings.
//!
//! All integers and floats are little-endian.
//!
//! Instance files (`PQTK`):
//! magic `PQTK` | version u32 | num_items u64 | num_splits u64 |
//! num_sub_ids u64 | embed_dim u64 | codes (num_items*num_splits u16) |
//! table (num_splits*num_sub_ids*(embed_dim/num_splits) f32)
//!
//! Dense matrices (`DENS`):
//! magic `DENS` | version u32 | num_items u64 | dim u64 |
//! data (num_items*dim f32, row-major)
//!
//! Query embeddings: a bare f32 array, length = embedding dimension.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::codebook::Codebook;
use crate::config::PQConfig;
use crate::embedding::{SequenceEmbedding, SubItemEmbeddings};
use crate::error::{Error, Result};
use crate::scoring::DenseEmbeddingMatrix;
use crate::synthetic::check_budget;

pub const INSTANCE_MAGIC: [u8; 4] = *b"PQTK";
pub const INSTANCE_VERSION: u32 = 1;
pub const DENSE_MAGIC: [u8; 4] = *b"DENS";
pub const DENSE_VERSION: u32 = 1;

// reject obviously corrupt headers before any sizing arithmetic
const MAX_FILE_ITEMS: u64 = 1 << 48;
const MAX_FILE_DIM: u64 = 1 << 32;

pub fn write_instance(
    path: &Path,
    codebook: &Codebook,
    embeddings: &SubItemEmbeddings,
) -> Result<()> {
    crate::validate_instance(codebook, embeddings)?;
    let config = codebook.config();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&INSTANCE_MAGIC)?;
    w.write_u32::<LittleEndian>(INSTANCE_VERSION)?;
    w.write_u64::<LittleEndian>(config.num_items)?;
    w.write_u64::<LittleEndian>(config.num_splits as u64)?;
    w.write_u64::<LittleEndian>(config.num_sub_ids as u64)?;
    w.write_u64::<LittleEndian>(config.embed_dim as u64)?;
    for &code in codebook.codes() {
        w.write_u16::<LittleEndian>(code)?;
    }
    for &value in embeddings.table() {
        w.write_f32::<LittleEndian>(value)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_instance(path: &Path, budget_bytes: u64) -> Result<(Codebook, SubItemEmbeddings)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_fully(&mut r, &mut magic, "magic")?;
    if magic != INSTANCE_MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            magic, INSTANCE_MAGIC
        )));
    }
    let version = r.read_u32::<LittleEndian>().map_err(truncated("version"))?;
    if version != INSTANCE_VERSION {
        return Err(Error::Format(format!(
            "unsupported instance version {version}"
        )));
    }
    let num_items = r.read_u64::<LittleEndian>().map_err(truncated("header"))?;
    let num_splits = r.read_u64::<LittleEndian>().map_err(truncated("header"))?;
    let num_sub_ids = r.read_u64::<LittleEndian>().map_err(truncated("header"))?;
    let embed_dim = r.read_u64::<LittleEndian>().map_err(truncated("header"))?;
    if num_items > MAX_FILE_ITEMS || num_splits > MAX_FILE_DIM || embed_dim > MAX_FILE_DIM {
        return Err(Error::Format(format!(
            "implausible header: {num_items} items, {num_splits} splits, dim {embed_dim}"
        )));
    }
    let config = PQConfig::new(
        num_items,
        usize::try_from(num_splits).map_err(|_| Error::Format("num_splits overflow".into()))?,
        usize::try_from(num_sub_ids).map_err(|_| Error::Format("num_sub_ids overflow".into()))?,
        usize::try_from(embed_dim).map_err(|_| Error::Format("embed_dim overflow".into()))?,
    )?;
    check_budget(config.instance_bytes(), budget_bytes)?;

    let num_codes = config.num_items as usize * config.num_splits;
    let mut codes = vec![0u16; num_codes];
    r.read_u16_into::<LittleEndian>(&mut codes)
        .map_err(truncated("code table"))?;

    let table_len = config.num_splits * config.num_sub_ids * config.sub_dim();
    let mut table = vec![0.0f32; table_len];
    r.read_f32_into::<LittleEndian>(&mut table)
        .map_err(truncated("embedding table"))?;

    expect_eof(&mut r)?;
    Ok((
        Codebook::new(config, codes)?,
        SubItemEmbeddings::new(config, table)?,
    ))
}

pub fn write_dense_matrix(path: &Path, matrix: &DenseEmbeddingMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&DENSE_MAGIC)?;
    w.write_u32::<LittleEndian>(DENSE_VERSION)?;
    w.write_u64::<LittleEndian>(matrix.num_items())?;
    w.write_u64::<LittleEndian>(matrix.dim() as u64)?;
    for &value in matrix.data() {
        w.write_f32::<LittleEndian>(value)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dense_matrix(path: &Path, budget_bytes: u64) -> Result<DenseEmbeddingMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_fully(&mut r, &mut magic, "magic")?;
    if magic != DENSE_MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            magic, DENSE_MAGIC
        )));
    }
    let version = r.read_u32::<LittleEndian>().map_err(truncated("version"))?;
    if version != DENSE_VERSION {
        return Err(Error::Format(format!("unsupported dense version {version}")));
    }
    let num_items = r.read_u64::<LittleEndian>().map_err(truncated("header"))?;
    let dim_raw = r.read_u64::<LittleEndian>().map_err(truncated("header"))?;
    if num_items == 0 || dim_raw == 0 {
        return Err(Error::Format("empty dense matrix".into()));
    }
    if num_items > MAX_FILE_ITEMS || dim_raw > MAX_FILE_DIM {
        return Err(Error::Format(format!(
            "implausible header: {num_items} rows of dim {dim_raw}"
        )));
    }
    let dim = dim_raw as usize;
    let bytes = (num_items as u128 * dim as u128 * 4).min(u64::MAX as u128) as u64;
    check_budget(bytes, budget_bytes)?;

    let mut data = vec![0.0f32; num_items as usize * dim];
    r.read_f32_into::<LittleEndian>(&mut data)
        .map_err(truncated("matrix data"))?;
    expect_eof(&mut r)?;
    DenseEmbeddingMatrix::new(num_items, dim, data)
}

/// Read a bare little-endian f32 array as a query embedding, checking the
/// dimension against the instance it will be scored with.
pub fn read_query_embedding(path: &Path, expected_dim: usize) -> Result<SequenceEmbedding> {
    let bytes = std::fs::read(path)?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Format(format!(
            "query embedding file has {} bytes, not a multiple of 4",
            bytes.len()
        )));
    }
    let values: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    if values.len() != expected_dim {
        return Err(Error::DimensionMismatch {
            what: "query embedding dim",
            expected: expected_dim,
            actual: values.len(),
        });
    }
    SequenceEmbedding::new(values)
}

pub fn write_query_embedding(path: &Path, phi: &SequenceEmbedding) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for &value in phi.values() {
        w.write_f32::<LittleEndian>(value)?;
    }
    w.flush()?;
    Ok(())
}

fn read_fully(r: &mut impl Read, buf: &mut [u8], what: &'static str) -> Result<()> {
    r.read_exact(buf).map_err(truncated(what))?;
    Ok(())
}

fn truncated(what: &'static str) -> impl Fn(std::io::Error) -> Error {
    move |e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Format(format!("file truncated while reading {what}"))
        } else {
            Error::Io(e)
        }
    }
}

fn expect_eof(r: &mut impl Read) -> Result<()> {
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(()),
        _ => Err(Error::Format("trailing bytes after expected end".into())),
    }
}
