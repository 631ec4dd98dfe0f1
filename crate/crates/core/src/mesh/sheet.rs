//! The grid-sheet mesh: a lattice of vertices warped onto the scene by depth.

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::filters::UncertainMap;
use crate::grid::{LabelGrid, PixelGrid};

/// Lifecycle of one lattice slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotState {
    /// Never held a vertex.
    Empty,
    /// Built from depth and still trusted.
    Present,
    /// Flagged uncertain; the old position is kept as an inert point.
    Deleted,
    /// Added by mesh completion.
    Inserted,
}

impl SlotState {
    /// Whether the slot holds a vertex that faces may use.
    #[inline]
    pub fn is_live(self) -> bool {
        matches!(self, SlotState::Present | SlotState::Inserted)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SheetVertex {
    /// Camera-space position in meters.
    pub position: [f64; 3],
    /// sRGB color in [0, 1].
    pub color: [f64; 3],
}

/// Per-slot offsets added to the normalized lattice coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOffsets {
    pub dx: PixelGrid,
    pub dy: PixelGrid,
}

/// Image pixel a lattice slot was sampled from.
#[inline]
pub fn source_pixel(row: usize, col: usize, downsample: usize) -> (usize, usize) {
    (row * downsample + downsample / 2, col * downsample + downsample / 2)
}

/// The two triangles of lattice cell `(row, col)`, split along the
/// top-left to bottom-right diagonal, wound toward the camera.
#[inline]
pub fn cell_triangles(row: usize, col: usize, cols: usize) -> [[usize; 3]; 2] {
    let tl = row * cols + col;
    let tr = tl + 1;
    let bl = tl + cols;
    let br = bl + 1;
    [[tl, bl, br], [tl, br, tr]]
}

#[derive(Debug, Clone)]
pub struct MeshSheet {
    rows: usize,
    cols: usize,
    downsample: usize,
    camera: CameraModel,
    offsets: Option<GridOffsets>,
    states: Vec<SlotState>,
    vertices: Vec<SheetVertex>,
    labels: Vec<u8>,
    /// Triangles as slot-index triples.
    faces: Vec<[usize; 3]>,
}

impl MeshSheet {
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn downsample(&self) -> usize {
        self.downsample
    }
    pub fn camera(&self) -> &CameraModel {
        &self.camera
    }
    #[inline]
    pub fn slot(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }
    #[inline]
    pub fn slot_coords(&self, slot: usize) -> (usize, usize) {
        (slot / self.cols, slot % self.cols)
    }
    #[inline]
    pub fn state(&self, slot: usize) -> SlotState {
        self.states[slot]
    }
    #[inline]
    pub fn vertex(&self, slot: usize) -> &SheetVertex {
        &self.vertices[slot]
    }
    /// Semantic label of the slot's source pixel.
    #[inline]
    pub fn label(&self, slot: usize) -> u8 {
        self.labels[slot]
    }
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }
    pub fn slot_count(&self) -> usize {
        self.states.len()
    }
    pub fn source_pixel(&self, slot: usize) -> (usize, usize) {
        let (r, c) = self.slot_coords(slot);
        source_pixel(r, c, self.downsample)
    }

    pub(crate) fn set_vertex(&mut self, slot: usize, v: SheetVertex, state: SlotState) {
        self.vertices[slot] = v;
        self.states[slot] = state;
    }

    pub(crate) fn faces_mut(&mut self) -> &mut Vec<[usize; 3]> {
        &mut self.faces
    }

    /// Normalized lattice coordinates in [-1, 1], plus any offsets.
    pub fn lattice_coords(&self, row: usize, col: usize) -> (f64, f64) {
        let mut xh = -1.0 + 2.0 * col as f64 / (self.cols - 1) as f64;
        let mut yh = -1.0 + 2.0 * row as f64 / (self.rows - 1) as f64;
        if let Some(o) = &self.offsets {
            xh += o.dx.get(row, col);
            yh += o.dy.get(row, col);
        }
        (xh, yh)
    }

    /// Places a vertex of depth `d` on the slot's lattice ray.
    pub fn warp(&self, row: usize, col: usize, d: f64) -> [f64; 3] {
        let (xh, yh) = self.lattice_coords(row, col);
        let (tx, ty) = self.camera.half_tan();
        [d * xh * tx, d * yh * ty, d]
    }

    pub fn live_count(&self) -> usize {
        self.states.iter().filter(|s| s.is_live()).count()
    }

    /// Slots in the given state.
    pub fn count_state(&self, state: SlotState) -> usize {
        self.states.iter().filter(|&&s| s == state).count()
    }
}

/// Warps a lattice over `depth`: each slot samples its source pixel and
/// becomes `(d (x + dx) tan(fx/2), d (y + dy) tan(fy/2), d)`; every cell is
/// split into two triangles.
pub fn build_mesh(
    depth: &PixelGrid,
    rgb: &PixelGrid,
    semantic: &LabelGrid,
    camera: &CameraModel,
    offsets: Option<GridOffsets>,
    downsample: usize,
) -> Result<MeshSheet> {
    depth.check_channels(1, "depth map")?;
    rgb.check_channels(3, "rgb image")?;
    depth.check_same_size(rgb, "rgb image")?;
    depth.check_same_size(semantic, "semantic map")?;
    if downsample == 0 || depth.width() % downsample != 0 || depth.height() % downsample != 0 {
        return Err(Error::Config(format!(
            "grid_downsample {downsample} does not divide {}x{}",
            depth.width(),
            depth.height()
        )));
    }
    let rows = depth.height() / downsample;
    let cols = depth.width() / downsample;
    if rows < 2 || cols < 2 {
        return Err(Error::Mesh(format!("lattice {cols}x{rows} is smaller than 2x2")));
    }
    if let Some(o) = &offsets {
        if o.dx.width() != cols || o.dx.height() != rows || !o.dx.same_size(&o.dy) {
            return Err(Error::DimensionMismatch {
                what: "grid offsets".into(),
                got_w: o.dx.width(),
                got_h: o.dx.height(),
                want_w: cols,
                want_h: rows,
            });
        }
    }

    let n = rows * cols;
    let mut sheet = MeshSheet {
        rows,
        cols,
        downsample,
        camera: *camera,
        offsets,
        states: vec![SlotState::Present; n],
        vertices: Vec::with_capacity(n),
        labels: Vec::with_capacity(n),
        faces: Vec::with_capacity(2 * (rows - 1) * (cols - 1)),
    };
    for r in 0..rows {
        for c in 0..cols {
            let (pr, pc) = source_pixel(r, c, downsample);
            let d = depth.get(pr, pc);
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::NonPositiveDepth { row: pr, col: pc, value: d });
            }
            let mut color = [0.0; 3];
            rgb.sample_bilinear(pr as f64, pc as f64, &mut color);
            let position = sheet.warp(r, c, d);
            sheet.vertices.push(SheetVertex { position, color });
            sheet.labels.push(semantic.get(pr, pc));
        }
    }
    for r in 0..rows - 1 {
        for c in 0..cols - 1 {
            sheet.faces.extend(cell_triangles(r, c, cols));
        }
    }
    Ok(sheet)
}

/// Removes every face touching a vertex whose source pixel is uncertain.
///
/// Uncertain vertices become [`SlotState::Deleted`] points.
pub fn delete_uncertain_faces(mut sheet: MeshSheet, uncertain: &UncertainMap) -> MeshSheet {
    let flagged: Vec<bool> = (0..sheet.slot_count())
        .map(|s| {
            let (pr, pc) = sheet.source_pixel(s);
            pr < uncertain.height() && pc < uncertain.width() && uncertain.is_set(pr, pc)
        })
        .collect();
    for (s, &f) in flagged.iter().enumerate() {
        if f && sheet.states[s].is_live() {
            sheet.states[s] = SlotState::Deleted;
        }
    }
    sheet
        .faces
        .retain(|t| !t.iter().any(|&v| flagged[v]));
    sheet
}
