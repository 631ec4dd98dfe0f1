//! Path tracer with next-event estimation over emissive faces.

use std::f64::consts::{FRAC_1_PI, TAU};

use rayon::prelude::*;

use super::bvh::Bvh;
use super::vec3::{add, basis, cross, dot, length, mul, normalize, scale, sub, Vec3};
use crate::camera::CameraModel;
use crate::config::RenderConfig;
use crate::error::{Error, Result};
use crate::grid::PixelGrid;
use crate::mesh::SceneMesh;
use crate::rng::KeyedRng;

const TAG_RENDER: u64 = 2;
const RAY_EPS: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSettings {
    pub samples_per_pixel: u32,
    /// Indirect bounces after the first hit.
    pub max_bounces: u32,
    /// Radiance returned by rays that leave the scene.
    pub ambient: [f64; 3],
    pub seed: u64,
}

impl RenderSettings {
    pub fn from_config(cfg: &RenderConfig, seed: u64) -> Self {
        Self {
            samples_per_pixel: cfg.samples_per_pixel,
            max_bounces: cfg.max_bounces,
            ambient: cfg.ambient_radiance,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_pixel == 0 {
            return Err(Error::Config("samples_per_pixel must be at least 1".into()));
        }
        if !self.ambient.iter().all(|a| *a >= 0.0 && a.is_finite()) {
            return Err(Error::Config(format!("ambient radiance {:?} must be >= 0", self.ambient)));
        }
        Ok(())
    }
}

struct Emitters {
    faces: Vec<usize>,
    cdf: Vec<f64>,
    total_area: f64,
}

impl Emitters {
    fn collect(mesh: &SceneMesh) -> Self {
        let mut faces = Vec::new();
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        for (i, e) in mesh.emission.iter().enumerate() {
            if e.is_none() {
                continue;
            }
            let area = face_area(mesh, i);
            if area > 0.0 {
                acc += area;
                faces.push(i);
                cdf.push(acc);
            }
        }
        Self { faces, cdf, total_area: acc }
    }

    fn pick(&self, u: f64) -> usize {
        let x = u * self.total_area;
        let i = self.cdf.partition_point(|&c| c <= x).min(self.faces.len() - 1);
        self.faces[i]
    }
}

fn corners(mesh: &SceneMesh, f: usize) -> [Vec3; 3] {
    mesh.faces[f].map(|v| mesh.vertices[v])
}

fn face_area(mesh: &SceneMesh, f: usize) -> f64 {
    let [a, b, c] = corners(mesh, f);
    0.5 * length(cross(sub(b, a), sub(c, a)))
}

fn face_normal(mesh: &SceneMesh, f: usize) -> Vec3 {
    let [a, b, c] = corners(mesh, f);
    normalize(cross(sub(b, a), sub(c, a)))
}

struct Tracer<'a> {
    mesh: &'a SceneMesh,
    bvh: Bvh,
    emitters: Emitters,
    settings: &'a RenderSettings,
}

impl Tracer<'_> {
    fn albedo(&self, face: usize, u: f64, v: f64) -> Vec3 {
        let [i0, i1, i2] = self.mesh.faces[face];
        let m = &self.mesh.material;
        let w0 = 1.0 - u - v;
        std::array::from_fn(|k| w0 * m[i0].albedo[k] + u * m[i1].albedo[k] + v * m[i2].albedo[k])
    }

    /// Direct light arriving at `p` (shading normal `n`) from one sampled
    /// emitter point, already divided by the sampling pdf.
    fn direct(&self, p: Vec3, n: Vec3, rng: &mut KeyedRng) -> Vec3 {
        if self.emitters.faces.is_empty() {
            return [0.0; 3];
        }
        let f = self.emitters.pick(rng.uniform());
        let (u1, u2) = (rng.uniform(), rng.uniform());
        let su = u1.sqrt();
        let (b0, b1) = (1.0 - su, u2 * su);
        let [a, b, c] = corners(self.mesh, f);
        let q = [0, 1, 2].map(|k| b0 * a[k] + b1 * b[k] + (1.0 - b0 - b1) * c[k]);
        let to = sub(q, p);
        let dist2 = dot(to, to);
        let dist = dist2.sqrt();
        if dist <= RAY_EPS {
            return [0.0; 3];
        }
        let wi = scale(to, 1.0 / dist);
        let cos_s = dot(n, wi);
        let cos_l = dot(face_normal(self.mesh, f), wi).abs();
        if cos_s <= 0.0 || cos_l <= 0.0 {
            return [0.0; 3];
        }
        let eps = RAY_EPS * (1.0 + dist);
        if self.bvh.occluded(p, wi, eps, dist - eps) {
            return [0.0; 3];
        }
        let le = self.mesh.emission[f].expect("emitter");
        scale(le, cos_s * cos_l / dist2 * self.emitters.total_area)
    }

    fn radiance(&self, mut o: Vec3, mut d: Vec3, rng: &mut KeyedRng) -> Vec3 {
        let mut l = [0.0; 3];
        let mut beta = [1.0; 3];
        for depth in 0..=self.settings.max_bounces {
            let Some(hit) = self.bvh.intersect(o, d, RAY_EPS, f64::INFINITY) else {
                l = add(l, mul(beta, self.settings.ambient));
                break;
            };
            if depth == 0 {
                if let Some(le) = self.mesh.emission[hit.face] {
                    l = add(l, le);
                }
            }
            let p = add(o, scale(d, hit.t));
            let mut n = face_normal(self.mesh, hit.face);
            if dot(n, d) > 0.0 {
                n = scale(n, -1.0);
            }
            let albedo = self.albedo(hit.face, hit.u, hit.v);
            let p_off = add(p, scale(n, RAY_EPS * (1.0 + length(p))));
            let brdf = scale(albedo, FRAC_1_PI);
            l = add(l, mul(beta, mul(brdf, self.direct(p_off, n, rng))));
            if depth == self.settings.max_bounces {
                break;
            }
            // cosine-weighted: brdf * cos / pdf = albedo
            let (u1, u2) = (rng.uniform(), rng.uniform());
            let r = u1.sqrt();
            let phi = TAU * u2;
            let (t, b) = basis(n);
            let (x, y, z) = (r * phi.cos(), r * phi.sin(), (1.0 - u1).max(0.0).sqrt());
            d = normalize(add(add(scale(t, x), scale(b, y)), scale(n, z)));
            o = p_off;
            beta = mul(beta, albedo);
            if beta.iter().all(|&x| x == 0.0) {
                break;
            }
        }
        l
    }
}

/// Renders linear RGB radiance. Every sample draws from its own stream
/// keyed by `(seed, pixel, sample)`, so the image does not depend on the
/// number of threads.
pub fn render(scene: &SceneMesh, cam: &CameraModel, settings: &RenderSettings) -> Result<PixelGrid> {
    settings.validate()?;
    scene.validate()?;
    let tracer = Tracer {
        mesh: scene,
        bvh: Bvh::build(scene),
        emitters: Emitters::collect(scene),
        settings,
    };
    let (w, h) = (cam.width(), cam.height());
    let spp = settings.samples_per_pixel;
    let mut data = vec![0.0; w * h * 3];
    let rows: Vec<Result<()>> = data
        .par_chunks_mut(w * 3)
        .enumerate()
        .map(|(r, row)| {
            for c in 0..w {
                let pixel = (r * w + c) as u64;
                let mut acc = [0.0; 3];
                for s in 0..spp {
                    let mut rng = KeyedRng::new(settings.seed, &[TAG_RENDER, pixel, s as u64]);
                    let (jx, jy) = (rng.uniform(), rng.uniform());
                    let d = normalize(cam.ray_dir(c as f64 + jx, r as f64 + jy));
                    let l = tracer.radiance([0.0; 3], d, &mut rng);
                    if !l.iter().all(|x| x.is_finite()) {
                        return Err(Error::NonFiniteRadiance { row: r, col: c, sample: s });
                    }
                    acc = add(acc, l);
                }
                let inv = 1.0 / spp as f64;
                row[c * 3..c * 3 + 3].copy_from_slice(&acc.map(|x| (x * inv).max(0.0)));
            }
            Ok(())
        })
        .collect();
    rows.into_iter().collect::<Result<()>>()?;
    PixelGrid::new(w, h, 3, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Material, VertexOrigin};

    fn quad(z: f64, half: f64, albedo: f64, emission: Option<[f64; 3]>) -> SceneMesh {
        let vertices = vec![[-half, -half, z], [half, -half, z], [half, half, z], [-half, half, z]];
        SceneMesh {
            vertices,
            origin: vec![VertexOrigin::Free; 4],
            faces: vec![[0, 1, 2], [0, 2, 3]],
            vertex_color: vec![[albedo; 3]; 4],
            material: vec![Material { albedo: [albedo; 3], roughness: 1.0 }; 4],
            emission: vec![emission; 2],
        }
    }

    fn settings(spp: u32, bounces: u32, ambient: f64) -> RenderSettings {
        RenderSettings { samples_per_pixel: spp, max_bounces: bounces, ambient: [ambient; 3], seed: 1 }
    }

    #[test]
    fn dark_without_lights() {
        let cam = CameraModel::from_fov(8, 8, 1.0).unwrap();
        let img = render(&quad(2.0, 5.0, 0.8, None), &cam, &settings(4, 2, 0.0)).unwrap();
        assert!(img.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn escaping_rays_see_ambient() {
        let cam = CameraModel::from_fov(4, 4, 1.0).unwrap();
        let mut empty = quad(2.0, 1.0, 0.5, None);
        empty.faces.clear();
        empty.emission.clear();
        let img = render(&empty, &cam, &settings(2, 2, 0.25)).unwrap();
        assert!(img.data().iter().all(|&x| x == 0.25));
    }

    #[test]
    fn visible_emitter_and_linearity() {
        let cam = CameraModel::from_fov(6, 6, 0.5).unwrap();
        let one = render(&quad(3.0, 5.0, 0.5, Some([1.0, 0.5, 0.25])), &cam, &settings(4, 1, 0.0)).unwrap();
        let two = render(&quad(3.0, 5.0, 0.5, Some([2.0, 1.0, 0.5])), &cam, &settings(4, 1, 0.0)).unwrap();
        assert_eq!(one.pixel(3, 3), &[1.0, 0.5, 0.25]);
        for (a, b) in one.data().iter().zip(two.data()) {
            assert_eq!(2.0 * a, *b);
        }
    }
}
