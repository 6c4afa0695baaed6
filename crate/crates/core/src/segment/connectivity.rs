use crate::raster::LabelMap;

/// Labels 4-connected components of equal input label, numbered in
/// row-major order of their first pixel. Returns `(component ids, count)`.
pub fn connected_components(labels: &LabelMap) -> (Vec<u32>, usize) {
    let (w, h) = (labels.width(), labels.height());
    let src = labels.labels();
    let mut out = vec![u32::MAX; src.len()];
    let mut stack = Vec::new();
    let mut next = 0u32;
    for start in 0..src.len() {
        if out[start] != u32::MAX {
            continue;
        }
        let l = src[start];
        out[start] = next;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (x, y) = (p % w, p / w);
            let mut visit = |q: usize| {
                if out[q] == u32::MAX && src[q] == l {
                    out[q] = next;
                    stack.push(q);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
        }
        next += 1;
    }
    (out, next as usize)
}

/// Splits every label into its 4-connected components, each getting its own label.
pub fn enforce_connectivity(labels: &LabelMap) -> LabelMap {
    let (comps, k) = connected_components(labels);
    LabelMap::from_normalized(labels.width(), labels.height(), comps, k)
}

/// True when every label forms exactly one 4-connected component.
pub fn is_connected_partition(labels: &LabelMap) -> bool {
    connected_components(labels).1 == labels.k()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(w: usize, h: usize, l: &[u32]) -> LabelMap {
        LabelMap::from_raw(w, h, l.to_vec()).unwrap()
    }

    #[test]
    fn diagonal_blobs_split() {
        let m = map(2, 2, &[0, 1, 1, 0]);
        let out = enforce_connectivity(&m);
        assert_eq!(out.k(), 4);
        let m = map(4, 2, &[0, 0, 1, 1, 1, 1, 0, 0]);
        assert_eq!(enforce_connectivity(&m).k(), 4);
    }

    #[test]
    fn connected_map_is_unchanged() {
        let m = map(3, 2, &[0, 0, 1, 2, 2, 1]);
        assert_eq!(enforce_connectivity(&m), m);
        assert!(is_connected_partition(&m));
    }

    #[test]
    fn checkerboard_has_sixteen_components() {
        let l: Vec<u32> = (0..16).map(|i| ((i % 4 + i / 4) % 2) as u32).collect();
        let m = map(4, 4, &l);
        assert_eq!(m.k(), 2);
        assert_eq!(enforce_connectivity(&m).k(), 16);
    }
}
