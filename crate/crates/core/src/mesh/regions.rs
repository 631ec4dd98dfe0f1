//! Completion regions: where the deleted mesh must be filled back in.
//!
//! The uncertain map is widened by every foreground segment it touches.
//! Non-foreground slots of that union form background regions; foreground
//! slots form one region per touched object.

use std::collections::VecDeque;

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::filters::UncertainMap;
use crate::grid::LabelGrid;

use super::sheet::source_pixel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Background,
    /// A foreground object of the given semantic class.
    Foreground { class: u8 },
}

/// A connected set of lattice slots to complete.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRegion {
    pub kind: RegionKind,
    pub rows: usize,
    pub cols: usize,
    /// Row-major lattice mask.
    pub mask: Vec<bool>,
}

impl CompletionRegion {
    #[inline]
    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.cols + col]
    }

    pub fn slots(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

const NEIGHBORS: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];

/// 4-neighbors of `i` on a `w x h` raster, in up/left/right/down order.
pub(crate) fn neighbors4(i: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (r, c) = ((i / w) as isize, (i % w) as isize);
    NEIGHBORS.iter().filter_map(move |&(dr, dc)| {
        let (nr, nc) = (r + dr, c + dc);
        (nr >= 0 && nc >= 0 && (nr as usize) < h && (nc as usize) < w)
            .then(|| nr as usize * w + nc as usize)
    })
}

/// Labels connected components of cells where `same(a, b)` links neighbors.
/// Returns the component id per cell (`u32::MAX` for excluded cells).
pub(crate) fn components(
    w: usize,
    h: usize,
    include: impl Fn(usize) -> bool,
    same: impl Fn(usize, usize) -> bool,
) -> (Vec<u32>, u32) {
    let mut comp = vec![u32::MAX; w * h];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if comp[start] != u32::MAX || !include(start) {
            continue;
        }
        comp[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for j in neighbors4(i, w, h) {
                if comp[j] == u32::MAX && include(j) && same(i, j) {
                    comp[j] = next;
                    queue.push_back(j);
                }
            }
        }
        next += 1;
    }
    (comp, next)
}

pub fn expand_uncertain_region(
    uncertain: &UncertainMap,
    semantic: &LabelGrid,
    cfg: &PipelineConfig,
) -> Result<Vec<CompletionRegion>> {
    semantic.check_same_size(uncertain.grid(), "uncertainty map")?;
    cfg.validate_resolution(semantic.width(), semantic.height())?;
    let (w, h) = (semantic.width(), semantic.height());
    let fg = cfg.foreground_table();
    let labels = semantic.data();
    let u = uncertain.grid().data();

    // Foreground segments touched by (or adjacent to) an uncertain pixel.
    let (seg, nseg) = components(w, h, |i| fg[labels[i] as usize], |a, b| labels[a] == labels[b]);
    let mut touched = vec![false; nseg as usize];
    for i in 0..w * h {
        if seg[i] != u32::MAX
            && (u[i] != 0 || neighbors4(i, w, h).any(|j| u[j] != 0))
        {
            touched[seg[i] as usize] = true;
        }
    }
    let expanded: Vec<bool> = (0..w * h)
        .map(|i| u[i] != 0 || (seg[i] != u32::MAX && touched[seg[i] as usize]))
        .collect();

    // Down to the lattice.
    let k = cfg.mesh.grid_downsample;
    let (rows, cols) = (h / k, w / k);
    let mut lat_in = vec![false; rows * cols];
    let mut lat_label = vec![0u8; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let (pr, pc) = source_pixel(r, c, k);
            lat_in[r * cols + c] = expanded[pr * w + pc];
            lat_label[r * cols + c] = labels[pr * w + pc];
        }
    }
    let is_fg = |i: usize| fg[lat_label[i] as usize];

    let mut regions = Vec::new();
    let (bg, nbg) = components(cols, rows, |i| lat_in[i] && !is_fg(i), |_, _| true);
    for id in 0..nbg {
        regions.push(CompletionRegion {
            kind: RegionKind::Background,
            rows,
            cols,
            mask: bg.iter().map(|&c| c == id).collect(),
        });
    }
    let (fgc, nfg) = components(
        cols,
        rows,
        |i| lat_in[i] && is_fg(i),
        |a, b| lat_label[a] == lat_label[b],
    );
    for id in 0..nfg {
        let first = fgc.iter().position(|&c| c == id).expect("component has a cell");
        regions.push(CompletionRegion {
            kind: RegionKind::Foreground {
                class: lat_label[first],
            },
            rows,
            cols,
            mask: fgc.iter().map(|&c| c == id).collect(),
        });
    }
    Ok(regions)
}
