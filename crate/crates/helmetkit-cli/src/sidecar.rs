//! Per-image label sidecar: one line per box, `class cx cy w h`, with
//! center coordinates and sides normalized to the image dimensions.

use anyhow::{bail, Context, Result};
use helmetkit::bbox::{from_normalized_center, to_normalized_center, BoundingBox, FrameDims};
use helmetkit::detection::ClassId;

pub fn parse_labels(text: &str, dims: FrameDims) -> Result<Vec<(BoundingBox, ClassId)>> {
    let mut boxes = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            bail!(
                "line {line_no}: expected 5 fields (class cx cy w h), found {}",
                fields.len()
            );
        }
        let class_id: i64 = fields[0]
            .parse()
            .with_context(|| format!("line {line_no}: class is not a number: {:?}", fields[0]))?;
        let class = ClassId::from_id(class_id).with_context(|| format!("line {line_no}"))?;
        let mut nums = [0.0f64; 4];
        for (slot, (name, raw)) in nums
            .iter_mut()
            .zip(["cx", "cy", "w", "h"].iter().zip(&fields[1..]))
        {
            *slot = raw
                .parse()
                .with_context(|| format!("line {line_no}: {name} is not a number: {raw:?}"))?;
        }
        let rect = from_normalized_center(nums[0], nums[1], nums[2], nums[3], dims)
            .with_context(|| format!("line {line_no}"))?;
        boxes.push((rect, class));
    }
    Ok(boxes)
}

pub fn emit_labels(boxes: &[(BoundingBox, ClassId)], dims: FrameDims) -> String {
    let mut out = String::new();
    for (rect, class) in boxes {
        let (cx, cy, w, h) = to_normalized_center(rect, dims);
        out.push_str(&format!("{} {} {} {} {}\n", class.id(), cx, cy, w, h));
    }
    out
}
