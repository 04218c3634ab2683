//! Field serialization.
//!
//! Binary container, little-endian, one or more records back to back:
//!
//! ```text
//! magic    4 bytes  "F3RM"
//! version  u32      1
//! n        u32      points per axis
//! rank     u32      0..=3 for k-forms, 255 for a vector field
//! count    u32      number of component grids
//! body     count × n³ f64, each component in row-major (x, y, z) order
//! ```

use std::io::{Read, Write};

use super::form::{component_count, Form};
use super::grid::{Grid, ScalarField};
use super::vector::VectorField;
use super::FormsError;

pub const MAGIC: &[u8; 4] = b"F3RM";
pub const VERSION: u32 = 1;
/// Rank tag used for vector fields.
pub const VECTOR_RANK: u32 = 255;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldRecord {
    Form(Form),
    Vector(VectorField),
}

impl FieldRecord {
    fn rank_tag(&self) -> u32 {
        match self {
            FieldRecord::Form(f) => f.rank() as u32,
            FieldRecord::Vector(_) => VECTOR_RANK,
        }
    }

    pub fn components(&self) -> &[ScalarField] {
        match self {
            FieldRecord::Form(f) => f.components(),
            FieldRecord::Vector(v) => v.components(),
        }
    }

    pub fn grid(&self) -> Grid {
        self.components()[0].grid()
    }
}

pub fn write_records<W: Write>(mut w: W, records: &[FieldRecord]) -> Result<(), FormsError> {
    for rec in records {
        let comps = rec.components();
        w.write_all(MAGIC)?;
        for v in [VERSION, rec.grid().n() as u32, rec.rank_tag(), comps.len() as u32] {
            w.write_all(&v.to_le_bytes())?;
        }
        for c in comps {
            for v in c.values() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, FormsError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Read every record until end of input.
pub fn read_records<R: Read>(mut r: R) -> Result<Vec<FieldRecord>, FormsError> {
    let mut out = Vec::new();
    loop {
        let mut magic = [0u8; 4];
        match r.read(&mut magic[..1])? {
            0 => break,
            _ => r.read_exact(&mut magic[1..])?,
        }
        if &magic != MAGIC {
            return Err(FormsError::Format(format!("bad magic {magic:?}")));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(FormsError::Format(format!("unsupported version {version}")));
        }
        let grid = Grid::new(read_u32(&mut r)? as usize)?;
        let rank = read_u32(&mut r)?;
        let count = read_u32(&mut r)? as usize;
        let expected = if rank == VECTOR_RANK {
            3
        } else if rank <= 3 {
            component_count(rank as usize)
        } else {
            return Err(FormsError::Format(format!("unknown rank tag {rank}")));
        };
        if count != expected {
            return Err(FormsError::Format(format!(
                "rank {rank} needs {expected} components, header says {count}"
            )));
        }
        let mut comps = Vec::with_capacity(count);
        let mut buf = vec![0u8; grid.len() * 8];
        for _ in 0..count {
            r.read_exact(&mut buf)?;
            let vals = buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            comps.push(ScalarField::from_vec(grid, vals)?);
        }
        out.push(if rank == VECTOR_RANK {
            let [a, b, c]: [ScalarField; 3] = comps.try_into().expect("three components");
            FieldRecord::Vector(VectorField::new(a, b, c)?)
        } else {
            FieldRecord::Form(Form::new(rank as usize, comps)?)
        });
    }
    Ok(out)
}

/// CSV rendering for small grids: `i,j,k,x,y,z,c0[,c1,c2]`.
pub fn to_csv(record: &FieldRecord) -> String {
    let g = record.grid();
    let comps = record.components();
    let mut s = String::from("i,j,k,x,y,z");
    for a in 0..comps.len() {
        s.push_str(&format!(",c{a}"));
    }
    s.push('\n');
    for idx in 0..g.len() {
        let (i, j, k) = g.unindex(idx);
        let [x, y, z] = g.point(idx);
        s.push_str(&format!("{i},{j},{k},{x},{y},{z}"));
        for c in comps {
            s.push_str(&format!(",{}", c.values()[idx]));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let g = Grid::new(4).unwrap();
        let rec = FieldRecord::Form(Form::volume(g));
        let mut bytes = Vec::new();
        write_records(&mut bytes, &[rec]).unwrap();
        assert_eq!(&bytes[..4], b"F3RM");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 4);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 1);
        assert_eq!(bytes.len(), 20 + 64 * 8);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        assert!(read_records(&b"XXXX\x01\x00\x00\x00"[..]).is_err());
        let g = Grid::new(4).unwrap();
        let mut bytes = Vec::new();
        write_records(&mut bytes, &[FieldRecord::Vector(VectorField::zeros(g))]).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(read_records(&bytes[..]).is_err());
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let g = Grid::new(4).unwrap();
        let csv = to_csv(&FieldRecord::Form(Form::coordinate_one_form(g, 1)));
        assert_eq!(csv.lines().count(), 65);
        assert!(csv.starts_with("i,j,k,x,y,z,c0,c1,c2\n0,0,0,0,0,0,0,1,0"));
    }
}
