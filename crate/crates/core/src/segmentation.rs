//! Object instances from a semantic label map.
//!
//! Class labels come from an offline segmentation of the ERI (0 is
//! background). Pixels of the same class that touch under 4-adjacency form one
//! object; the left and right ERI borders are adjacent.

use std::io::Write;

use crate::imaging::{render_labels, LabelMap, RenderError};
use crate::projections::{Projection, ViewportSpec};

/// Axis-aligned pixel bounds, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectRegion {
    /// Positive object id; 0 is background.
    pub id: u32,
    pub class_label: u32,
    pub pixel_count: usize,
    pub bbox: BoundingBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMap {
    /// Class labels as ingested.
    pub classes: LabelMap,
    /// Object id per pixel, 0 for background.
    pub objects: LabelMap,
    pub regions: Vec<ObjectRegion>,
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        Self { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Two-pass 4-connected component labeling with horizontal wrap-around.
///
/// Object ids are assigned in raster order of each component's first pixel.
pub fn connected_components(classes: &LabelMap) -> SegmentationMap {
    let (w, h) = (classes.width(), classes.height());
    let mut provisional = vec![0u32; w * h];
    let mut sets = DisjointSet::new();

    for y in 0..h {
        for x in 0..w {
            let class = classes.get(x, y);
            if class == 0 {
                continue;
            }
            let left = (x > 0 && classes.get(x - 1, y) == class).then(|| provisional[y * w + x - 1]);
            let up = (y > 0 && classes.get(x, y - 1) == class).then(|| provisional[(y - 1) * w + x]);
            provisional[y * w + x] = match (left, up) {
                (Some(a), Some(b)) => {
                    sets.union(a, b);
                    a.min(b)
                }
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => sets.make(),
            };
        }
        // seam: last column touches first column
        if w > 1 {
            let class = classes.get(0, y);
            if class != 0 && classes.get(w - 1, y) == class {
                sets.union(provisional[y * w], provisional[y * w + w - 1]);
            }
        }
    }

    let mut final_id = vec![0u32; sets.parent.len()];
    let mut regions: Vec<ObjectRegion> = Vec::new();
    let mut objects = vec![0u32; w * h];
    for y in 0..h {
        for x in 0..w {
            let p = provisional[y * w + x];
            if p == 0 {
                continue;
            }
            let root = sets.find(p) as usize;
            if final_id[root] == 0 {
                regions.push(ObjectRegion {
                    id: regions.len() as u32 + 1,
                    class_label: classes.get(x, y),
                    pixel_count: 0,
                    bbox: BoundingBox {
                        x_min: x,
                        y_min: y,
                        x_max: x,
                        y_max: y,
                    },
                });
                final_id[root] = regions.len() as u32;
            }
            let id = final_id[root];
            objects[y * w + x] = id;
            let r = &mut regions[id as usize - 1];
            r.pixel_count += 1;
            r.bbox.x_min = r.bbox.x_min.min(x);
            r.bbox.x_max = r.bbox.x_max.max(x);
            r.bbox.y_max = y;
        }
    }

    SegmentationMap {
        classes: classes.clone(),
        objects: LabelMap::new(w, h, objects).expect("same size"),
        regions,
    }
}

impl SegmentationMap {
    pub fn object_count(&self) -> usize {
        self.regions.len()
    }

    /// Object table as CSV: `id,class,pixel_count,x_min,y_min,x_max,y_max`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["id", "class", "pixel_count", "x_min", "y_min", "x_max", "y_max"])?;
        for r in &self.regions {
            wtr.write_record([
                r.id.to_string(),
                r.class_label.to_string(),
                r.pixel_count.to_string(),
                r.bbox.x_min.to_string(),
                r.bbox.y_min.to_string(),
                r.bbox.x_max.to_string(),
                r.bbox.y_max.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Object-id viewport rendered with nearest sampling through the same
/// geometry as the color viewport.
pub fn render_seg_viewport(
    seg: &SegmentationMap,
    spec: &ViewportSpec,
    projection: &Projection,
) -> Result<LabelMap, RenderError> {
    render_labels(&seg.objects, spec, projection)
}

/// Drops object ids covering fewer than `min_px` pixels of a rendered label
/// map (set to background) and renumbers the survivors consecutively.
pub fn filter_small_objects(labels: &LabelMap, min_px: usize) -> LabelMap {
    let max = labels.pixels().iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0usize; max + 1];
    for &l in labels.pixels() {
        counts[l as usize] += 1;
    }
    let mut remap = vec![0u32; max + 1];
    let mut next = 0;
    for (id, &count) in counts.iter().enumerate().skip(1) {
        if count > 0 && count >= min_px {
            next += 1;
            remap[id] = next;
        }
    }
    labels.map(|l| remap[l as usize])
}

/// Minimum object size as a fraction of viewport pixels.
pub const MIN_OBJECT_FRACTION: f64 = 0.0005;

pub fn min_object_px(width: usize, height: usize, fraction: f64) -> usize {
    (fraction * (width * height) as f64).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(rows: &[&str]) -> LabelMap {
        let h = rows.len();
        let w = rows[0].len();
        LabelMap::from_fn(w, h, |x, y| rows[y].as_bytes()[x].wrapping_sub(b'0') as u32)
    }

    #[test]
    fn empty_map_has_no_objects() {
        let seg = connected_components(&LabelMap::filled(10, 5, 0));
        assert_eq!(seg.object_count(), 0);
        assert!(seg.objects.pixels().iter().all(|&o| o == 0));
    }

    #[test]
    fn diagonal_touch_is_two_objects() {
        let seg = connected_components(&labels(&["1000", "0100", "0000"]));
        assert_eq!(seg.object_count(), 2);
    }

    #[test]
    fn seam_blob_is_one_object() {
        let seg = connected_components(&labels(&["1001", "1001", "0000"]));
        assert_eq!(seg.object_count(), 1);
        assert_eq!(seg.regions[0].pixel_count, 4);
        assert_eq!(seg.regions[0].bbox, BoundingBox { x_min: 0, y_min: 0, x_max: 3, y_max: 1 });
    }

    #[test]
    fn classes_never_merge() {
        let seg = connected_components(&labels(&["1122", "1122"]));
        assert_eq!(seg.object_count(), 2);
        assert_eq!(seg.regions[0].class_label, 1);
        assert_eq!(seg.regions[1].class_label, 2);
    }

    #[test]
    fn u_shape_merges_late() {
        // the two arms only meet on the last row
        let seg = connected_components(&labels(&["10100", "10100", "11100"]));
        assert_eq!(seg.object_count(), 1);
        assert_eq!(seg.objects.get(0, 0), seg.objects.get(2, 0));
    }

    #[test]
    fn csv_export() {
        let seg = connected_components(&labels(&["1100", "0002"]));
        let mut buf = Vec::new();
        seg.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "id,class,pixel_count,x_min,y_min,x_max,y_max\n1,1,2,0,0,1,0\n2,2,1,3,1,3,1\n"
        );
    }

    #[test]
    fn small_objects_are_dropped_and_renumbered() {
        let l = labels(&["1102", "3300", "3300"]);
        let f = filter_small_objects(&l, 2);
        assert_eq!(f.pixels(), &[1, 1, 0, 0, 2, 2, 0, 0, 2, 2, 0, 0]);
        assert_eq!(min_object_px(1816, 1020, MIN_OBJECT_FRACTION), 927);
    }
}
