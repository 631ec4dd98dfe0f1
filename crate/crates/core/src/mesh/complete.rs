//! Mesh completion over [`CompletionRegion`]s.
//!
//! Background regions are filled row by row with vertices linearly
//! distributed between the nearest live vertices left and right of each
//! missing run. Foreground regions grow breadth-first from slots bordering
//! the object's persisting mesh, each new vertex taking the mean depth of its
//! live neighbors. Both passes then add the lattice faces that the new
//! vertices make available.

use std::collections::{HashSet, VecDeque};

use super::regions::{neighbors4, CompletionRegion, RegionKind};
use super::sheet::{cell_triangles, MeshSheet, SheetVertex, SlotState};

/// What a completion pass did, including rows or regions it had to improvise on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CompletionReport {
    pub filled: usize,
    pub faces_added: usize,
    pub warnings: Vec<String>,
}

impl CompletionReport {
    pub fn merge(&mut self, other: CompletionReport) {
        self.filled += other.filled;
        self.faces_added += other.faces_added;
        self.warnings.extend(other.warnings);
    }
}

pub(crate) fn foreground_table(foreground: &[u8]) -> [bool; 256] {
    let mut t = [false; 256];
    for &c in foreground {
        t[c as usize] = true;
    }
    t
}

fn lerp_vertex(a: &SheetVertex, b: &SheetVertex, wa: f64, wb: f64, den: f64) -> SheetVertex {
    let mut position = [0.0; 3];
    let mut color = [0.0; 3];
    for k in 0..3 {
        position[k] = (a.position[k] * wa + b.position[k] * wb) / den;
        color[k] = (a.color[k] * wa + b.color[k] * wb) / den;
    }
    SheetVertex { position, color }
}

pub fn complete_background(
    mut sheet: MeshSheet,
    regions: &[CompletionRegion],
    foreground: &[u8],
) -> (MeshSheet, CompletionReport) {
    let fg = foreground_table(foreground);
    let mut report = CompletionReport::default();
    let mut inserted = vec![false; sheet.slot_count()];
    let (rows, cols) = (sheet.rows(), sheet.cols());

    for region in regions.iter().filter(|r| r.kind == RegionKind::Background) {
        for i in 0..rows {
            let mut j = 0;
            while j < cols {
                let s = sheet.slot(i, j);
                if !(region.mask[s] && !sheet.state(s).is_live()) {
                    j += 1;
                    continue;
                }
                let jl = j;
                while j < cols && region.mask[sheet.slot(i, j)] && !sheet.state(sheet.slot(i, j)).is_live() {
                    j += 1;
                }
                let jr = j - 1;
                fill_run(&mut sheet, &fg, i, jl, jr, &mut inserted, &mut report);
            }
        }
    }

    report.faces_added += stitch(&mut sheet, &inserted, |s: &MeshSheet, t: &[usize; 3]| {
        t.iter().all(|&v| !fg[s.label(v) as usize])
    });
    (sheet, report)
}

fn fill_run(
    sheet: &mut MeshSheet,
    fg: &[bool; 256],
    i: usize,
    jl: usize,
    jr: usize,
    inserted: &mut [bool],
    report: &mut CompletionReport,
) {
    let anchor = |sheet: &MeshSheet, r: usize, c: usize| -> Option<SheetVertex> {
        let s = sheet.slot(r, c);
        (sheet.state(s).is_live() && !fg[sheet.label(s) as usize]).then(|| *sheet.vertex(s))
    };
    let left = if jl > 0 { anchor(sheet, i, jl - 1) } else { None };
    let right = if jr + 1 < sheet.cols() { anchor(sheet, i, jr + 1) } else { None };

    match (left, right) {
        (Some(gl), Some(gr)) => {
            let den = (jr - jl + 2) as f64;
            for j in jl..=jr {
                let v = lerp_vertex(&gl, &gr, (jr - j + 1) as f64, (j - jl + 1) as f64, den);
                let s = sheet.slot(i, j);
                sheet.set_vertex(s, v, SlotState::Inserted);
                inserted[s] = true;
                report.filled += 1;
            }
        }
        (Some(g), None) | (None, Some(g)) => {
            let side = if left.is_some() { "left" } else { "right" };
            report.warnings.push(format!(
                "row {i}, cols {jl}..={jr}: only the {side} boundary exists, depth replicated"
            ));
            for j in jl..=jr {
                let v = SheetVertex {
                    position: sheet.warp(i, j, g.position[2]),
                    color: g.color,
                };
                let s = sheet.slot(i, j);
                sheet.set_vertex(s, v, SlotState::Inserted);
                inserted[s] = true;
                report.filled += 1;
            }
        }
        (None, None) => {
            for j in jl..=jr {
                let up = if i > 0 { anchor(sheet, i - 1, j) } else { None };
                let down = if i + 1 < sheet.rows() { anchor(sheet, i + 1, j) } else { None };
                match up.or(down) {
                    Some(g) => {
                        let v = SheetVertex {
                            position: sheet.warp(i, j, g.position[2]),
                            color: g.color,
                        };
                        let s = sheet.slot(i, j);
                        sheet.set_vertex(s, v, SlotState::Inserted);
                        inserted[s] = true;
                        report.filled += 1;
                    }
                    None => report.warnings.push(format!(
                        "row {i}, col {j}: no boundary vertex in any direction, left empty"
                    )),
                }
            }
            report.warnings.push(format!(
                "row {i}, cols {jl}..={jr}: no left/right boundary, filled from vertical neighbors"
            ));
        }
    }
}

pub fn complete_foreground(mut sheet: MeshSheet, region: &CompletionRegion) -> (MeshSheet, CompletionReport) {
    let mut report = CompletionReport::default();
    if !matches!(region.kind, RegionKind::Foreground { .. }) {
        report.warnings.push("foreground completion given a background region, skipped".into());
        return (sheet, report);
    }
    let (rows, cols) = (sheet.rows(), sheet.cols());
    let n = rows * cols;
    let missing = |sheet: &MeshSheet, s: usize| region.mask[s] && !sheet.state(s).is_live();
    if !(0..n).any(|s| missing(&sheet, s)) {
        return (sheet, report);
    }

    let mut queued = vec![false; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        if missing(&sheet, s)
            && neighbors4(s, cols, rows).any(|t| region.mask[t] && sheet.state(t) == SlotState::Present)
        {
            queued[s] = true;
            queue.push_back(s);
        }
    }
    if queue.is_empty() {
        report
            .warnings
            .push(format!("foreground region of {} slots has no seed, skipped", region.len()));
        return (sheet, report);
    }

    let mut inserted = vec![false; n];
    while let Some(s) = queue.pop_front() {
        let mut depth = 0.0;
        let mut color = [0.0; 3];
        let mut count = 0usize;
        for t in neighbors4(s, cols, rows) {
            if region.mask[t] && sheet.state(t).is_live() {
                let v = sheet.vertex(t);
                depth += v.position[2];
                for k in 0..3 {
                    color[k] += v.color[k];
                }
                count += 1;
            }
        }
        if count == 0 {
            continue;
        }
        let inv = 1.0 / count as f64;
        let (r, c) = sheet.slot_coords(s);
        let v = SheetVertex {
            position: sheet.warp(r, c, depth * inv),
            color: color.map(|x| x * inv),
        };
        sheet.set_vertex(s, v, SlotState::Inserted);
        inserted[s] = true;
        report.filled += 1;
        for t in neighbors4(s, cols, rows) {
            if !queued[t] && missing(&sheet, t) {
                queued[t] = true;
                queue.push_back(t);
            }
        }
    }
    let left = (0..n).filter(|&s| missing(&sheet, s)).count();
    if left > 0 {
        report
            .warnings
            .push(format!("{left} foreground slots unreachable from any seed"));
    }

    report.faces_added += stitch(&mut sheet, &inserted, |_: &MeshSheet, t: &[usize; 3]| {
        t.iter().all(|&v| region.mask[v])
    });
    (sheet, report)
}

/// Adds every lattice triangle that touches a newly inserted slot, has three
/// live vertices, passes `accept`, and is not already present.
fn stitch(
    sheet: &mut MeshSheet,
    inserted: &[bool],
    accept: impl Fn(&MeshSheet, &[usize; 3]) -> bool,
) -> usize {
    if !inserted.iter().any(|&b| b) {
        return 0;
    }
    let existing: HashSet<[usize; 3]> = sheet.faces().iter().copied().collect();
    let mut added = Vec::new();
    for r in 0..sheet.rows() - 1 {
        for c in 0..sheet.cols() - 1 {
            for t in cell_triangles(r, c, sheet.cols()) {
                if t.iter().any(|&v| inserted[v])
                    && t.iter().all(|&v| sheet.state(v).is_live())
                    && !existing.contains(&t)
                    && accept(sheet, &t)
                {
                    added.push(t);
                }
            }
        }
    }
    let count = added.len();
    sheet.faces_mut().extend(added);
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::CameraModel;
    use crate::classes::label;
    use crate::filters::UncertainMap;
    use crate::grid::PixelGrid;
    use crate::mesh::{audit_completion, build_mesh, delete_uncertain_faces};

    fn sheet_from(depth: PixelGrid, sem: PixelGrid<u8>) -> MeshSheet {
        let (w, h) = (depth.width(), depth.height());
        let rgb = PixelGrid::filled(w, h, 3, 0.5);
        let cam = CameraModel::from_fov(w, h, std::f64::consts::FRAC_PI_2).unwrap();
        build_mesh(&depth, &rgb, &sem, &cam, None, 1).unwrap()
    }

    fn bg_region(rows: usize, cols: usize, cells: &[(usize, usize)]) -> CompletionRegion {
        let mut mask = vec![false; rows * cols];
        for &(r, c) in cells {
            mask[r * cols + c] = true;
        }
        CompletionRegion { kind: RegionKind::Background, rows, cols, mask }
    }

    #[test]
    fn single_gap_is_midpoint() {
        let sheet = sheet_from(
            PixelGrid::from_fn(5, 3, |_, c| 2.0 + c as f64),
            PixelGrid::filled(5, 3, 1, label::ROAD),
        );
        let mut u = UncertainMap::zeros(5, 3);
        u.set(1, 2, true);
        let sheet = delete_uncertain_faces(sheet, &u);
        let gl = sheet.vertex(sheet.slot(1, 1)).position;
        let gr = sheet.vertex(sheet.slot(1, 3)).position;
        let (sheet, rep) = complete_background(sheet, &[bg_region(3, 5, &[(1, 2)])], &[]);
        assert_eq!(rep.filled, 1);
        let v = sheet.vertex(sheet.slot(1, 2)).position;
        for k in 0..3 {
            assert!((v[k] - (gl[k] + gr[k]) / 2.0).abs() < 1e-12);
        }
        assert_eq!(sheet.faces().len(), 16);
    }

    #[test]
    fn two_slot_gap_thirds() {
        // Hand-placed anchors G_l = (0,0,3), G_r = (3,0,6).
        let sheet = sheet_from(PixelGrid::filled(4, 3, 1, 3.0), PixelGrid::filled(4, 3, 1, label::ROAD));
        let mut u = UncertainMap::zeros(4, 3);
        u.set(1, 1, true);
        u.set(1, 2, true);
        let mut sheet = delete_uncertain_faces(sheet, &u);
        let l = sheet.slot(1, 0);
        let r = sheet.slot(1, 3);
        sheet.set_vertex(l, SheetVertex { position: [0.0, 0.0, 3.0], color: [0.0; 3] }, SlotState::Present);
        sheet.set_vertex(r, SheetVertex { position: [3.0, 0.0, 6.0], color: [0.0; 3] }, SlotState::Present);
        let (sheet, _) = complete_background(sheet, &[bg_region(3, 4, &[(1, 1), (1, 2)])], &[]);
        let a = sheet.vertex(sheet.slot(1, 1)).position;
        let b = sheet.vertex(sheet.slot(1, 2)).position;
        for (got, want) in [(a, [1.0, 0.0, 4.0]), (b, [2.0, 0.0, 5.0])] {
            for k in 0..3 {
                assert!((got[k] - want[k]).abs() < 1e-12, "{got:?}");
            }
        }
    }

    #[test]
    fn one_sided_row_replicates_depth() {
        let sheet = sheet_from(PixelGrid::from_fn(4, 3, |_, c| 2.0 + c as f64), PixelGrid::filled(4, 3, 1, label::ROAD));
        let mut u = UncertainMap::zeros(4, 3);
        u.set(1, 0, true);
        u.set(1, 1, true);
        let sheet = delete_uncertain_faces(sheet, &u);
        let (sheet, rep) = complete_background(sheet, &[bg_region(3, 4, &[(1, 0), (1, 1)])], &[]);
        assert_eq!(rep.warnings.len(), 1);
        assert_eq!(sheet.vertex(sheet.slot(1, 0)).position[2], 4.0);
        assert_eq!(sheet.vertex(sheet.slot(1, 1)).position[2], 4.0);
    }

    #[test]
    fn background_fill_is_watertight() {
        let sheet = sheet_from(PixelGrid::from_fn(10, 8, |r, c| 3.0 + 0.1 * (r + c) as f64), PixelGrid::filled(10, 8, 1, label::ROAD));
        let mut u = UncertainMap::zeros(10, 8);
        let mut cells = Vec::new();
        for r in 2..6 {
            for c in 3..7 {
                u.set(r, c, true);
                cells.push((r, c));
            }
        }
        let full = sheet.faces().len();
        let sheet = delete_uncertain_faces(sheet, &u);
        let regions = vec![bg_region(8, 10, &cells)];
        let (sheet, _) = complete_background(sheet, &regions, &[]);
        assert_eq!(sheet.faces().len(), full);
        let audit = audit_completion(&sheet, &regions, &[]);
        assert_eq!(audit.unmatched_interior_edges, 0);
        assert_eq!(audit.unfilled_slots, 0);
        // every filled row is collinear between its anchors
        for r in 2..6 {
            let a = sheet.vertex(sheet.slot(r, 2)).position;
            let b = sheet.vertex(sheet.slot(r, 7)).position;
            for c in 3..7 {
                let p = sheet.vertex(sheet.slot(r, c)).position;
                let t = (c - 2) as f64 / 5.0;
                for k in 0..3 {
                    assert!((p[k] - (a[k] + (b[k] - a[k]) * t)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn foreground_mean_of_two_neighbors() {
        // 3x3 lattice; car in the middle row; slot (1,1) deleted between depths 4 and 6.
        let depth = PixelGrid::from_fn(3, 3, |_, c| [4.0, 5.5, 6.0][c]);
        let sem = PixelGrid::from_fn(3, 3, |r, _| if r == 1 { label::CAR } else { label::ROAD });
        let mut sheet = sheet_from(depth, sem);
        let mut u = UncertainMap::zeros(3, 3);
        u.set(1, 1, true);
        sheet = delete_uncertain_faces(sheet, &u);
        let mut mask = vec![false; 9];
        mask[3..6].iter_mut().for_each(|m| *m = true);
        let region = CompletionRegion { kind: RegionKind::Foreground { class: label::CAR }, rows: 3, cols: 3, mask };
        let (sheet, rep) = complete_foreground(sheet, &region);
        assert_eq!(rep.filled, 1);
        assert_eq!(sheet.vertex(4).position[2], 5.0);
    }

    #[test]
    fn empty_or_seedless_regions() {
        let sheet = sheet_from(PixelGrid::filled(4, 4, 1, 2.0), PixelGrid::filled(4, 4, 1, label::CAR));
        let region = CompletionRegion {
            kind: RegionKind::Foreground { class: label::CAR },
            rows: 4,
            cols: 4,
            mask: vec![false; 16],
        };
        let before = sheet.faces().to_vec();
        let (same, rep) = complete_foreground(sheet.clone(), &region);
        assert_eq!(same.faces(), &before[..]);
        assert!(rep.warnings.is_empty());

        let gone = delete_uncertain_faces(sheet, &UncertainMap::ones(4, 4));
        let all = CompletionRegion { mask: vec![true; 16], ..region };
        let (_, rep) = complete_foreground(gone, &all);
        assert_eq!(rep.filled, 0);
        assert_eq!(rep.warnings.len(), 1);
    }

    #[test]
    fn strip_propagation_matches_sequential_simulation() {
        // Persistent car block in columns 0..=1, a one-slot-wide strip along row 2
        // in columns 2..=7 that was deleted.
        let (w, h) = (8, 5);
        let depth = PixelGrid::from_fn(w, h, |r, c| 3.0 + 0.25 * r as f64 + 0.1 * c as f64);
        let sem = PixelGrid::from_fn(w, h, |r, c| if c <= 1 || r == 2 { label::CAR } else { label::BUILDING });
        let sheet = sheet_from(depth.clone(), sem);
        let mut u = UncertainMap::zeros(w, h);
        for c in 2..w {
            u.set(2, c, true);
        }
        let sheet = delete_uncertain_faces(sheet, &u);
        let mut mask = vec![false; w * h];
        for r in 0..h {
            for c in 0..w {
                mask[r * w + c] = c <= 1 || r == 2;
            }
        }
        let region = CompletionRegion { kind: RegionKind::Foreground { class: label::CAR }, rows: h, cols: w, mask };
        let (sheet, rep) = complete_foreground(sheet, &region);
        assert_eq!(rep.filled, 6);

        // Oracle: the strip fills left to right; each slot averages the
        // live region neighbors at that moment.
        let mut z = vec![None; w];
        z[1] = Some(depth.get(2, 1));
        for c in 2..w {
            let mut vals = vec![z[c - 1].unwrap()];
            if c + 1 < w {
                if let Some(v) = z[c + 1] {
                    vals.push(v);
                }
            }
            z[c] = Some(vals.iter().sum::<f64>() / vals.len() as f64);
        }
        for c in 2..w {
            assert_eq!(sheet.vertex(sheet.slot(2, c)).position[2], z[c].unwrap());
        }
    }
}
