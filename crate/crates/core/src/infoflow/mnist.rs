//! MNIST IDX ingestion: big-endian magics, pixels scaled to [0,1],
//! optional centre crop.

use std::io::Read;
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt};

use crate::mi::LabeledSamples;
use crate::{Error, Mat, Real, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

fn read_file(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    Ok(buf)
}

fn read_u32_at(buf: &[u8], offset: usize, what: &str) -> Result<u32> {
    let mut slice = buf
        .get(offset..offset + 4)
        .ok_or_else(|| Error::Format(format!("{what}: file truncated at offset {offset}")))?;
    Ok(slice.read_u32::<BigEndian>().expect("4 bytes checked"))
}

/// Load an MNIST-style image/label file pair. `crop` trims each image to
/// a centred crop x crop window (the stored images are rows x cols).
pub fn load_mnist_idx(
    images_path: &Path,
    labels_path: &Path,
    crop: Option<usize>,
) -> Result<LabeledSamples<Real>> {
    let images = read_file(images_path)?;
    let labels = read_file(labels_path)?;

    let magic = read_u32_at(&images, 0, "images")?;
    if magic != IMAGES_MAGIC {
        return Err(Error::Format(format!(
            "images: bad magic {magic:#010x} at offset 0, expected {IMAGES_MAGIC:#010x}"
        )));
    }
    let n_images = read_u32_at(&images, 4, "images")? as usize;
    let rows = read_u32_at(&images, 8, "images")? as usize;
    let cols = read_u32_at(&images, 12, "images")? as usize;
    let payload = &images[16..];
    if payload.len() != n_images * rows * cols {
        return Err(Error::Format(format!(
            "images: payload is {} bytes, header promises {} ({} x {}x{})",
            payload.len(),
            n_images * rows * cols,
            n_images,
            rows,
            cols
        )));
    }

    let lmagic = read_u32_at(&labels, 0, "labels")?;
    if lmagic != LABELS_MAGIC {
        return Err(Error::Format(format!(
            "labels: bad magic {lmagic:#010x} at offset 0, expected {LABELS_MAGIC:#010x}"
        )));
    }
    let n_labels = read_u32_at(&labels, 4, "labels")? as usize;
    if labels.len() - 8 != n_labels {
        return Err(Error::Format(format!(
            "labels: payload is {} bytes, header promises {n_labels}",
            labels.len() - 8
        )));
    }
    if n_labels != n_images {
        return Err(Error::Format(format!(
            "count mismatch: {n_images} images vs {n_labels} labels"
        )));
    }

    let (out_rows, out_cols, r0, c0) = match crop {
        Some(side) => {
            if side == 0 || side > rows || side > cols {
                return Err(Error::Config(format!(
                    "crop {side} out of range for {rows}x{cols} images"
                )));
            }
            (side, side, (rows - side) / 2, (cols - side) / 2)
        }
        None => (rows, cols, 0, 0),
    };

    let mut features = Mat::zeros(n_images, out_rows * out_cols);
    for img in 0..n_images {
        let base = img * rows * cols;
        let out = features.row_mut(img);
        for r in 0..out_rows {
            for c in 0..out_cols {
                let px = payload[base + (r0 + r) * cols + (c0 + c)];
                out[r * out_cols + c] = px as Real / 255.0;
            }
        }
    }
    let label_vec: Vec<usize> = labels[8..].iter().map(|&b| b as usize).collect();
    LabeledSamples::new(features, label_vec)
}
