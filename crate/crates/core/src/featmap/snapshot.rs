//! Binary map snapshots: a fixed header followed by dense little-endian arrays.
//!
//! Layout: `b"EIFMAP01"`, width u32, height u32, dim u32, cell_size f64,
//! features `f32 * W*H*dim`, hit counts `u32 * W*H`, occupancy `u8 * W*H`,
//! last blend weight `f32 * W*H`.

use super::map::{FeatureMap, Occupancy};
use crate::geom::Cell;
use std::io::{self, Read, Write};
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"EIFMAP01";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a map snapshot")]
    BadMagic,
    #[error("bad occupancy code {0}")]
    BadOccupancy(u8),
}

/// Decoded snapshot, independent of the live map type.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSnapshot {
    pub width: i32,
    pub height: i32,
    pub dim: usize,
    pub cell_size: f64,
    pub features: Vec<f32>,
    pub hit_count: Vec<u32>,
    pub occupancy: Vec<Occupancy>,
    pub last_weight: Vec<f32>,
}

impl MapSnapshot {
    pub fn of(map: &FeatureMap) -> Self {
        let cells = (0..map.width * map.height).map(|i| map.cell_at(i as usize));
        let (mut hit_count, mut last_weight) = (Vec::new(), Vec::new());
        for c in cells {
            hit_count.push(map.hit_count(c));
            last_weight.push(map.last_weight(c));
        }
        MapSnapshot {
            width: map.width,
            height: map.height,
            dim: map.dim,
            cell_size: map.cell_size,
            features: map.features_raw().to_vec(),
            hit_count,
            occupancy: map.occupancy_raw().to_vec(),
            last_weight,
        }
    }

    pub fn index(&self, c: Cell) -> usize {
        (c.row * self.width + c.col) as usize
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.width as u32).to_le_bytes())?;
        w.write_all(&(self.height as u32).to_le_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&self.cell_size.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.features.len() * 4);
        self.features.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes()));
        self.hit_count.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes()));
        self.occupancy.iter().for_each(|&o| buf.push(o as u8));
        self.last_weight.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes()));
        w.write_all(&buf)
    }

    pub fn read_from(mut r: impl Read) -> Result<Self, SnapshotError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        let mut u32b = [0u8; 4];
        let mut next_u32 = |r: &mut dyn Read| -> io::Result<u32> {
            r.read_exact(&mut u32b)?;
            Ok(u32::from_le_bytes(u32b))
        };
        let width = next_u32(&mut r)? as i32;
        let height = next_u32(&mut r)? as i32;
        let dim = next_u32(&mut r)? as usize;
        let mut f64b = [0u8; 8];
        r.read_exact(&mut f64b)?;
        let cell_size = f64::from_le_bytes(f64b);
        let n = (width as usize) * (height as usize);
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        let need = n * dim * 4 + n * 4 + n + n * 4;
        if body.len() != need {
            return Err(SnapshotError::Io(io::Error::new(io::ErrorKind::UnexpectedEof, "truncated snapshot")));
        }
        let (feat, rest) = body.split_at(n * dim * 4);
        let (hits, rest) = rest.split_at(n * 4);
        let (occ, weights) = rest.split_at(n);
        let f32s = |b: &[u8]| b.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect::<Vec<_>>();
        let occupancy = occ
            .iter()
            .map(|&o| match o {
                0 => Ok(Occupancy::Unknown),
                1 => Ok(Occupancy::Free),
                2 => Ok(Occupancy::Obstacle),
                x => Err(SnapshotError::BadOccupancy(x)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MapSnapshot {
            width,
            height,
            dim,
            cell_size,
            features: f32s(feat),
            hit_count: hits.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect(),
            occupancy,
            last_weight: f32s(weights),
        })
    }
}
