//! Partitioning of a region's grid points into rectangular sub-regions.

use std::collections::BTreeSet;

/// Grid point by (latitude index, longitude index).
pub type GridPoint = (usize, usize);

/// Rectangular block of index space and the region points inside it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tile {
    /// Inclusive latitude index range.
    pub rows: (usize, usize),
    /// Inclusive longitude index range.
    pub cols: (usize, usize),
    pub points: Vec<GridPoint>,
}

impl Tile {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: GridPoint) -> bool {
        (self.rows.0..=self.rows.1).contains(&p.0) && (self.cols.0..=self.cols.1).contains(&p.1)
    }
}

/// Splits `0..n` into `parts` contiguous bands whose lengths differ by at most one.
fn bands(start: usize, n: usize, parts: usize) -> Vec<(usize, usize)> {
    let (base, extra) = (n / parts, n % parts);
    let mut out = Vec::with_capacity(parts);
    let mut at = start;
    for p in 0..parts {
        let len = base + usize::from(p < extra);
        out.push((at, at + len - 1));
        at += len;
    }
    out
}

fn layout(points: &BTreeSet<GridPoint>, rows: (usize, usize), cols: (usize, usize), a: usize, b: usize) -> Vec<Vec<Tile>> {
    let rb = bands(rows.0, rows.1 - rows.0 + 1, a);
    let cb = bands(cols.0, cols.1 - cols.0 + 1, b);
    rb.iter()
        .map(|&r| {
            cb.iter()
                .map(|&c| {
                    let mut t = Tile { rows: r, cols: c, points: Vec::new() };
                    t.points = points.iter().copied().filter(|p| t.contains(*p)).collect();
                    t
                })
                .collect()
        })
        .collect()
}

/// Partitions `points` into contiguous rectangular tiles of `min..=max` points.
///
/// Tries every banding of the bounding box into `a × b` blocks and keeps the
/// one with the fewest tiles whose non-empty blocks all fit the size range,
/// preferring near-square blocks. When no banding fits, the fewest-tile
/// banding under `max` is used and undersized tiles are merged into a
/// neighbor in the same row band. Deterministic for a given point set.
pub fn partition_subregions(points: &[GridPoint], min: usize, max: usize) -> Vec<Tile> {
    let set: BTreeSet<GridPoint> = points.iter().copied().collect();
    if set.is_empty() {
        return Vec::new();
    }
    let rows = (set.iter().map(|p| p.0).min().unwrap(), set.iter().map(|p| p.0).max().unwrap());
    let cols = (set.iter().map(|p| p.1).min().unwrap(), set.iter().map(|p| p.1).max().unwrap());
    if set.len() <= max {
        return vec![Tile { rows, cols, points: set.into_iter().collect() }];
    }
    let (nr, nc) = (rows.1 - rows.0 + 1, cols.1 - cols.0 + 1);

    // (tile count, squareness penalty, a, b, fits range)
    let mut best: Option<(usize, usize, usize, usize)> = None;
    let mut fallback: Option<(usize, usize, usize, usize)> = None;
    for a in 1..=nr {
        for b in 1..=nc {
            let grid = layout(&set, rows, cols, a, b);
            let sizes: Vec<usize> = grid.iter().flatten().map(Tile::len).filter(|&n| n > 0).collect();
            if sizes.iter().any(|&n| n > max) {
                continue;
            }
            let count = sizes.len();
            let penalty = (nr / a).abs_diff(nc / b);
            let key = (count, penalty, a, b);
            if sizes.iter().all(|&n| n >= min) {
                if best.is_none_or(|k| key < k) {
                    best = Some(key);
                }
            } else if fallback.is_none_or(|k| key < k) {
                fallback = Some(key);
            }
        }
    }
    let (_, _, a, b) = best.or(fallback).expect("single-cell banding always fits");
    let grid = layout(&set, rows, cols, a, b);
    let mut tiles: Vec<Tile> = Vec::new();
    for row in grid {
        let mut band: Vec<Tile> = row.into_iter().filter(|t| !t.is_empty()).collect();
        merge_small(&mut band, min);
        tiles.extend(band);
    }
    tiles
}

fn merge_small(band: &mut Vec<Tile>, min: usize) {
    while band.len() > 1 {
        let Some(i) = band.iter().position(|t| t.len() < min) else { break };
        // merge with the smaller adjacent tile
        let j = match (i.checked_sub(1), (i + 1 < band.len()).then_some(i + 1)) {
            (Some(l), Some(r)) => {
                if band[l].len() <= band[r].len() {
                    l
                } else {
                    r
                }
            }
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => break,
        };
        let (lo, hi) = (i.min(j), i.max(j));
        let right = band.remove(hi);
        let left = &mut band[lo];
        left.cols = (left.cols.0.min(right.cols.0), left.cols.1.max(right.cols.1));
        left.rows = (left.rows.0.min(right.rows.0), left.rows.1.max(right.rows.1));
        left.points.extend(right.points);
        left.points.sort_unstable();
    }
}
