//! Bounding volume hierarchy over mesh triangles.

use super::vec3::{cross, dot, sub, Vec3};
use crate::mesh::SceneMesh;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Node {
    lo: Vec3,
    hi: Vec3,
    /// Leaf: first index into `order`; inner: index of the left child.
    start: u32,
    /// Triangles in a leaf, 0 for inner nodes.
    count: u32,
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    v0: Vec3,
    e1: Vec3,
    e2: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Hit {
    pub t: f64,
    pub face: usize,
    /// Barycentric weights of vertices 1 and 2.
    pub u: f64,
    pub v: f64,
}

pub(crate) struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
    tris: Vec<Tri>,
}

fn bounds(tris: &[Tri], ids: &[u32]) -> (Vec3, Vec3) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in ids {
        let t = &tris[i as usize];
        for p in [t.v0, add3(t.v0, t.e1), add3(t.v0, t.e2)] {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
    }
    (lo, hi)
}

fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn centroid(t: &Tri, k: usize) -> f64 {
    t.v0[k] + (t.e1[k] + t.e2[k]) / 3.0
}

impl Bvh {
    pub fn build(mesh: &SceneMesh) -> Self {
        let tris: Vec<Tri> = mesh
            .faces
            .iter()
            .map(|f| {
                let v0 = mesh.vertices[f[0]];
                Tri {
                    v0,
                    e1: sub(mesh.vertices[f[1]], v0),
                    e2: sub(mesh.vertices[f[2]], v0),
                }
            })
            .collect();
        let mut bvh = Bvh {
            nodes: Vec::with_capacity(2 * tris.len() / LEAF_SIZE + 1),
            order: (0..tris.len() as u32).collect(),
            tris,
        };
        if !bvh.tris.is_empty() {
            bvh.nodes.push(Node { lo: [0.0; 3], hi: [0.0; 3], start: 0, count: 0 });
            bvh.split(0, 0, bvh.order.len());
        }
        bvh
    }

    fn split(&mut self, node: usize, start: usize, end: usize) {
        let (lo, hi) = bounds(&self.tris, &self.order[start..end]);
        self.nodes[node].lo = lo;
        self.nodes[node].hi = hi;
        let n = end - start;
        if n <= LEAF_SIZE {
            self.nodes[node].start = start as u32;
            self.nodes[node].count = n as u32;
            return;
        }
        let ext = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
        let axis = (0..3).max_by(|&a, &b| ext[a].total_cmp(&ext[b])).unwrap_or(0);
        let mid = n / 2;
        let tris = &self.tris;
        self.order[start..end].select_nth_unstable_by(mid, |&a, &b| {
            centroid(&tris[a as usize], axis)
                .total_cmp(&centroid(&tris[b as usize], axis))
                .then(a.cmp(&b))
        });
        let left = self.nodes.len();
        self.nodes.push(Node { lo, hi, start: 0, count: 0 });
        self.nodes.push(Node { lo, hi, start: 0, count: 0 });
        self.nodes[node].start = left as u32;
        self.nodes[node].count = 0;
        self.split(left, start, start + mid);
        self.split(left + 1, start + mid, end);
    }

    fn slab(node: &Node, o: Vec3, inv: Vec3, tmax: f64) -> bool {
        let mut t0 = 0.0f64;
        let mut t1 = tmax;
        for k in 0..3 {
            let a = (node.lo[k] - o[k]) * inv[k];
            let b = (node.hi[k] - o[k]) * inv[k];
            let (near, far) = if a < b { (a, b) } else { (b, a) };
            // NaN from 0 * inf leaves the bound untouched
            if near > t0 {
                t0 = near;
            }
            if far < t1 {
                t1 = far;
            }
            if t0 > t1 {
                return false;
            }
        }
        true
    }

    fn tri_hit(t: &Tri, o: Vec3, d: Vec3, tmin: f64, tmax: f64) -> Option<(f64, f64, f64)> {
        let p = cross(d, t.e2);
        let det = dot(t.e1, p);
        if det.abs() < 1e-14 {
            return None;
        }
        let inv = 1.0 / det;
        let s = sub(o, t.v0);
        let u = dot(s, p) * inv;
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        let q = cross(s, t.e1);
        let v = dot(d, q) * inv;
        if v < 0.0 || u + v > 1.0 {
            return None;
        }
        let dist = dot(t.e2, q) * inv;
        (dist > tmin && dist < tmax).then_some((dist, u, v))
    }

    /// Closest hit with `tmin < t < tmax`.
    pub fn intersect(&self, o: Vec3, d: Vec3, tmin: f64, tmax: f64) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = [1.0 / d[0], 1.0 / d[1], 1.0 / d[2]];
        let mut best: Option<Hit> = None;
        let mut limit = tmax;
        let mut stack = [0u32; 64];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if !Self::slab(node, o, inv, limit) {
                continue;
            }
            if node.count > 0 {
                for &i in &self.order[node.start as usize..(node.start + node.count) as usize] {
                    if let Some((t, u, v)) = Self::tri_hit(&self.tris[i as usize], o, d, tmin, limit) {
                        // ties go to the lower face index
                        if best.is_none_or(|b| t < b.t || (t == b.t && (i as usize) < b.face)) {
                            limit = t;
                            best = Some(Hit { t, face: i as usize, u, v });
                        }
                    }
                }
            } else {
                stack[sp] = node.start;
                stack[sp + 1] = node.start + 1;
                sp += 2;
            }
        }
        best
    }

    /// Whether anything lies strictly between `tmin` and `tmax`.
    pub fn occluded(&self, o: Vec3, d: Vec3, tmin: f64, tmax: f64) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let inv = [1.0 / d[0], 1.0 / d[1], 1.0 / d[2]];
        let mut stack = [0u32; 64];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if !Self::slab(node, o, inv, tmax) {
                continue;
            }
            if node.count > 0 {
                for &i in &self.order[node.start as usize..(node.start + node.count) as usize] {
                    if Self::tri_hit(&self.tris[i as usize], o, d, tmin, tmax).is_some() {
                        return true;
                    }
                }
            } else {
                stack[sp] = node.start;
                stack[sp + 1] = node.start + 1;
                sp += 2;
            }
        }
        false
    }
}
