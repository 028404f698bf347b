//! Line-oriented text dump of the stored voxels.
//!
//! ```text
//! # volsem-map resolution=0.4 min=-0.4,-0.4,-0.4 max=10.4,6.4,3.6 classes=5 names=Sky|Floor|Ship|Harbor wall|Unknown
//! 0 0 0 0.029312231 0.200000000 0.200000000 0.200000000 0.200000000 0.200000000
//! ```
//!
//! One line per stored voxel, `ix iy iz occ_prob p_1 .. p_K`, sorted by key.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::Aabb;

use super::octree::OctreeMap;
use super::params::VoxelKey;

const MAGIC: &str = "# volsem-map";

pub fn write_dump<W: Write>(map: &OctreeMap, class_names: &[String], mut out: W) -> Result<()> {
    let p = map.params();
    let b = &p.bounds;
    writeln!(
        out,
        "{MAGIC} resolution={} min={},{},{} max={},{},{} classes={} names={}",
        p.resolution,
        b.min[0],
        b.min[1],
        b.min[2],
        b.max[0],
        b.max[1],
        b.max[2],
        p.num_classes,
        class_names.join("|")
    )?;
    let mut keys = map.known_keys().to_vec();
    keys.sort_unstable();
    let mut probs = vec![0.0; p.num_classes];
    for key in keys {
        map.class_probs_into(key, &mut probs);
        write!(out, "{} {} {} {:.9}", key.ix, key.iy, key.iz, map.occupancy_prob(key))?;
        for v in &probs {
            write!(out, " {v:.9}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DumpHeader {
    pub resolution: f64,
    pub bounds: Aabb,
    pub num_classes: usize,
    pub class_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DumpRecord {
    pub key: VoxelKey,
    pub occupancy: f64,
    pub class_probs: Vec<f64>,
}

pub fn read_dump<R: BufRead>(input: R) -> Result<(DumpHeader, Vec<DumpRecord>)> {
    let bad = |m: &str| Error::Domain(format!("malformed map dump: {m}"));
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| bad("empty input"))??;
    let rest = header.strip_prefix(MAGIC).ok_or_else(|| bad("missing header"))?;

    let field = |name: &str| -> Result<&str> {
        let tag = format!(" {name}=");
        let start = rest.find(&tag).ok_or_else(|| bad(name))? + tag.len();
        let tail = &rest[start..];
        Ok(if name == "names" { tail } else { tail.split(' ').next().unwrap_or("") })
    };
    let triple = |s: &str| -> Result<[f64; 3]> {
        let v: Vec<f64> = s.split(',').map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad("bounds"))?;
        v.try_into().map_err(|_| bad("bounds"))
    };
    let header = DumpHeader {
        resolution: field("resolution")?.parse().map_err(|_| bad("resolution"))?,
        bounds: Aabb::new(triple(field("min")?)?, triple(field("max")?)?),
        num_classes: field("classes")?.parse().map_err(|_| bad("classes"))?,
        class_names: field("names")?.split('|').map(String::from).collect(),
    };

    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(' ').collect();
        if cols.len() != 4 + header.num_classes {
            return Err(bad("wrong column count"));
        }
        let idx = |i: usize| cols[i].parse::<u32>().map_err(|_| bad("key"));
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad("value"));
        records.push(DumpRecord {
            key: VoxelKey::new(idx(0)?, idx(1)?, idx(2)?),
            occupancy: num(cols[3])?,
            class_probs: cols[4..].iter().map(|s| num(s)).collect::<Result<_>>()?,
        });
    }
    Ok((header, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::MapParams;

    #[test]
    fn dump_is_sorted_and_parses_back() {
        let mut map = OctreeMap::new(MapParams {
            bounds: Aabb::new([-0.4, 0.0, 0.0], [4.0, 4.0, 2.0]),
            ..MapParams::default()
        })
        .unwrap();
        map.update_occupancy(VoxelKey::new(3, 0, 1), 0.7).unwrap();
        map.update_occupancy(VoxelKey::new(1, 2, 0), 0.3).unwrap();
        map.update_semantics(VoxelKey::new(1, 2, 0), &[0.6, 0.1, 0.1, 0.1, 0.1]).unwrap();
        let names: Vec<String> = ["Sky", "Floor", "Ship", "Harbor wall", "Unknown"].map(String::from).to_vec();
        let mut buf = Vec::new();
        write_dump(&map, &names, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().starts_with("1 2 0 0.300000000 0.600000000"));

        let (header, records) = read_dump(&buf[..]).unwrap();
        assert_eq!(header.class_names, names);
        assert_eq!(header.bounds, map.params().bounds);
        assert_eq!(header.resolution, 0.4);
        assert_eq!(records[0].key, VoxelKey::new(1, 2, 0));
        assert_eq!(records[1].key, VoxelKey::new(3, 0, 1));
        assert!((records[1].occupancy - 0.7).abs() < 1e-9);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_dump(&b"hello\n"[..]).is_err());
    }
}
