//! Watertightness checks after completion.

use std::collections::{BTreeSet, HashMap};

use super::complete::foreground_table;
use super::regions::{CompletionRegion, RegionKind};
use super::sheet::{cell_triangles, MeshSheet};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditReport {
    /// Edges inside a region whose two lattice triangles could both be faces
    /// but which do not have exactly two incident faces.
    pub unmatched_interior_edges: usize,
    /// Edges with more than two incident faces, anywhere in the mesh.
    pub nonmanifold_edges: usize,
    /// Region slots left without a live vertex.
    pub unfilled_slots: usize,
    /// Foreground regions whose boundary does not close into loops.
    pub open_foreground_boundaries: usize,
}

impl AuditReport {
    pub fn is_watertight(&self) -> bool {
        self.unmatched_interior_edges == 0
            && self.nonmanifold_edges == 0
            && self.unfilled_slots == 0
            && self.open_foreground_boundaries == 0
    }
}

/// Edge incidence counts of any triangle mesh.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeStats {
    /// Edges with one incident face.
    pub boundary: usize,
    /// Edges with two incident faces.
    pub interior: usize,
    /// Edges with more than two incident faces.
    pub nonmanifold: usize,
}

pub fn edge_stats(faces: &[[usize; 3]]) -> EdgeStats {
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for f in faces {
        for k in 0..3 {
            *counts.entry(edge(f[k], f[(k + 1) % 3])).or_default() += 1;
        }
    }
    let mut s = EdgeStats::default();
    for c in counts.into_values() {
        match c {
            1 => s.boundary += 1,
            2 => s.interior += 1,
            _ => s.nonmanifold += 1,
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layer {
    Background,
    Region(usize),
    Object(u8),
}

fn edge(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn audit_completion(sheet: &MeshSheet, regions: &[CompletionRegion], foreground: &[u8]) -> AuditReport {
    let fg = foreground_table(foreground);
    let n = sheet.slot_count();
    let mut layer: Vec<Layer> = (0..n)
        .map(|s| {
            let l = sheet.label(s);
            if fg[l as usize] {
                Layer::Object(l)
            } else {
                Layer::Background
            }
        })
        .collect();
    for (ri, r) in regions.iter().enumerate() {
        if matches!(r.kind, RegionKind::Foreground { .. }) {
            for s in r.slots() {
                layer[s] = Layer::Region(ri);
            }
        }
    }

    let mut face_edges: HashMap<(usize, usize), usize> = HashMap::new();
    for f in sheet.faces() {
        for k in 0..3 {
            *face_edges.entry(edge(f[k], f[(k + 1) % 3])).or_default() += 1;
        }
    }
    let mut report = AuditReport {
        nonmanifold_edges: face_edges.values().filter(|&&c| c > 2).count(),
        ..Default::default()
    };

    // Lattice edges and the lattice triangles on each side.
    let eligible = |t: &[usize; 3]| {
        t.iter().all(|&v| sheet.state(v).is_live()) && t.iter().all(|&v| layer[v] == layer[t[0]])
    };
    let mut lattice_edges: HashMap<(usize, usize), Vec<bool>> = HashMap::new();
    for r in 0..sheet.rows() - 1 {
        for c in 0..sheet.cols() - 1 {
            for t in cell_triangles(r, c, sheet.cols()) {
                let ok = eligible(&t);
                for k in 0..3 {
                    lattice_edges.entry(edge(t[k], t[(k + 1) % 3])).or_default().push(ok);
                }
            }
        }
    }
    let mut in_region = vec![false; n];
    for r in regions {
        for s in r.slots() {
            in_region[s] = true;
        }
        report.unfilled_slots += r.slots().filter(|&s| !sheet.state(s).is_live()).count();
    }
    let mut bad: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (&(a, b), sides) in &lattice_edges {
        if sides.len() == 2
            && sides.iter().all(|&ok| ok)
            && (in_region[a] || in_region[b])
            && face_edges.get(&(a, b)).copied().unwrap_or(0) != 2
        {
            bad.insert((a, b));
        }
    }
    report.unmatched_interior_edges = bad.len();

    for r in regions {
        if !matches!(r.kind, RegionKind::Foreground { .. }) {
            continue;
        }
        let faces: Vec<&[usize; 3]> = sheet.faces().iter().filter(|f| f.iter().all(|&v| r.mask[v])).collect();
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &faces {
            for k in 0..3 {
                *counts.entry(edge(f[k], f[(k + 1) % 3])).or_default() += 1;
            }
        }
        let mut degree: HashMap<usize, usize> = HashMap::new();
        for (&(a, b), &c) in &counts {
            if c == 1 {
                *degree.entry(a).or_default() += 1;
                *degree.entry(b).or_default() += 1;
            }
        }
        if degree.values().any(|d| d % 2 == 1) {
            report.open_foreground_boundaries += 1;
        }
    }
    report
}
