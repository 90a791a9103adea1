//! Domain adaptation to residual-distribution-style targets.
//!
//! Synthetic labeled patches are built from imposed analytic fields on
//! small Cartesian or triangular meshes, mapped into the Cartesian feature
//! schema, and used for lambda-mixed retraining that balances new-domain
//! accuracy against forgetting the source domain.

use crate::dataset::{Dataset, Provenance, Sample};
use crate::error::{Error, Result};
use crate::features::{extract_features_2d, remap_features_triangle, SchemaId, TrianglePatch};
use crate::mesh::{Boundary, Mesh2D};
use crate::mlp::{Hyperparams, Network, TrainHistory};
use crate::solution::project_scalar_2d;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Cartesian,
    Triangular,
}

impl MeshKind {
    pub fn name(&self) -> &'static str {
        match self {
            MeshKind::Cartesian => "cartesian",
            MeshKind::Triangular => "triangular",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cartesian" => Ok(MeshKind::Cartesian),
            "triangular" => Ok(MeshKind::Triangular),
            other => Err(Error::InvalidArgument(format!(
                "unknown mesh kind `{other}` (cartesian|triangular)"
            ))),
        }
    }
}

/// One imposed analytic field: smooth (label 0) or a plane discontinuity.
enum Field {
    Smooth(Box<dyn Fn(f64, f64) -> f64>),
    /// `u = left + (right-left) * [n . (x - x0) > 0]`
    Jump {
        normal: [f64; 2],
        origin: [f64; 2],
        left: f64,
        right: f64,
    },
}

impl Field {
    fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Field::Smooth(f) => f(x, y),
            Field::Jump {
                normal,
                origin,
                left,
                right,
            } => {
                let s = normal[0] * (x - origin[0]) + normal[1] * (y - origin[1]);
                if s > 0.0 {
                    *right
                } else {
                    *left
                }
            }
        }
    }
}

/// Draw a random field centered near `(cx, cy)` at patch scale `h`.
fn sample_field(rng: &mut ChaCha8Rng, cx: f64, cy: f64, h: f64) -> (Field, bool) {
    let discontinuous = rng.gen_bool(0.5);
    if discontinuous {
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let normal = [angle.cos(), angle.sin()];
        // offset inside the center element
        let origin = [
            cx + rng.gen_range(-0.5..0.5) * h,
            cy + rng.gen_range(-0.5..0.5) * h,
        ];
        let left = rng.gen_range(-2.0..2.0);
        let magnitude = 10f64.powf(rng.gen_range(0.05f64.log10()..10f64.log10()));
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let right = left + sign * magnitude;
        (
            Field::Jump {
                normal,
                origin,
                left,
                right,
            },
            true,
        )
    } else {
        let kind = rng.gen_range(0..4);
        let a = rng.gen_range(-2.0..2.0);
        let b = rng.gen_range(-2.0..2.0);
        let c = rng.gen_range(-2.0..2.0);
        let amp = rng.gen_range(0.1..3.0);
        let f: Box<dyn Fn(f64, f64) -> f64> = match kind {
            0 => Box::new(move |x, y| a + b * x + c * y),
            1 => Box::new(move |x, y| a + b * x + c * y + amp * (x * x - 0.5 * y * y + x * y)),
            2 => {
                // gaussian bump wider than the patch so it stays smooth
                let w = 4.0 * h * (1.0 + amp);
                let (bx, by) = (cx + b * h, cy + c * h);
                Box::new(move |x, y| {
                    a + amp * (-((x - bx) * (x - bx) + (y - by) * (y - by)) / (w * w)).exp()
                })
            }
            _ => {
                let freq = rng.gen_range(0.2..1.5) / (4.0 * h);
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                Box::new(move |x, y| a + amp * (freq * (x + 0.7 * y) + phase).sin())
            }
        };
        (Field::Smooth(f), false)
    }
}

/// Does the discontinuity line cross the axis-aligned box?
fn line_hits_box(normal: [f64; 2], origin: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> bool {
    let corners = [
        [lo[0], lo[1]],
        [hi[0], lo[1]],
        [lo[0], hi[1]],
        [hi[0], hi[1]],
    ];
    let mut has_pos = false;
    let mut has_neg = false;
    for c in corners {
        let s = normal[0] * (c[0] - origin[0]) + normal[1] * (c[1] - origin[1]);
        if s > 0.0 {
            has_pos = true;
        } else {
            has_neg = true;
        }
    }
    has_pos && has_neg
}

fn line_hits_triangle(normal: [f64; 2], origin: [f64; 2], v: &[[f64; 2]; 3]) -> bool {
    let mut has_pos = false;
    let mut has_neg = false;
    for c in v {
        let s = normal[0] * (c[0] - origin[0]) + normal[1] * (c[1] - origin[1]);
        if s > 0.0 {
            has_pos = true;
        } else {
            has_neg = true;
        }
    }
    has_pos && has_neg
}

/// Triangle average by uniform refinement and centroid sampling; exact
/// enough for feature purposes on both smooth and jump fields.
fn triangle_average(v: &[[f64; 2]; 3], field: &Field, levels: usize) -> f64 {
    let n = 1 << levels; // n^2 congruent subtriangles per barycentric row
    let mut sum = 0.0;
    let mut count = 0usize;
    let n_f = n as f64;
    // barycentric subdivision: upright and inverted small triangles
    for i in 0..n {
        for j in 0..(n - i) {
            // upright triangle centroid
            let l0 = (i as f64 + 1.0 / 3.0) / n_f;
            let l1 = (j as f64 + 1.0 / 3.0) / n_f;
            sum += eval_bary(v, field, l0, l1);
            count += 1;
            if j < n - i - 1 {
                let l0 = (i as f64 + 2.0 / 3.0) / n_f;
                let l1 = (j as f64 + 2.0 / 3.0) / n_f;
                sum += eval_bary(v, field, l0, l1);
                count += 1;
            }
        }
    }
    sum / count as f64
}

fn eval_bary(v: &[[f64; 2]; 3], field: &Field, l0: f64, l1: f64) -> f64 {
    let l2 = 1.0 - l0 - l1;
    let x = l0 * v[0][0] + l1 * v[1][0] + l2 * v[2][0];
    let y = l0 * v[0][1] + l1 * v[1][1] + l2 * v[2][1];
    field.eval(x, y)
}

fn triangle_area(v: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
        .abs()
}

/// One Cartesian RD sample: a 3x3 patch projected at degree 1, features
/// from the Cartesian extractor.
fn cartesian_sample(rng: &mut ChaCha8Rng) -> Result<Sample> {
    let h = 10f64.powf(rng.gen_range(-2.0..-0.3));
    let (cx, cy) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let (field, discontinuous) = sample_field(rng, cx, cy, h);
    let mesh = Mesh2D::new(
        cx - 1.5 * h,
        cx + 1.5 * h,
        cy - 1.5 * h,
        cy + 1.5 * h,
        3,
        3,
        Boundary::GradientFree,
    )?;
    let sol = project_scalar_2d(&mesh, 1, |x, y| field.eval(x, y))?;
    let features = extract_features_2d(&sol, 1, 1, 0)?;
    let label = if discontinuous {
        let lo = [cx - 0.5 * h, cy - 0.5 * h];
        let hi = [cx + 0.5 * h, cy + 0.5 * h];
        match &field {
            Field::Jump { normal, origin, .. } => line_hits_box(*normal, *origin, lo, hi) as u8,
            _ => unreachable!(),
        }
    } else {
        0
    };
    Ok(Sample { features, label })
}

/// One triangular RD sample: a center triangle with its three edge
/// reflections, remapped into the Cartesian schema.
fn triangular_sample(rng: &mut ChaCha8Rng) -> Result<Sample> {
    let scale = 10f64.powf(rng.gen_range(-2.0..-0.3));
    let (cx, cy) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    // jittered triangle around the center point
    let mut verts = [[0.0; 2]; 3];
    for (k, v) in verts.iter_mut().enumerate() {
        let theta = std::f64::consts::TAU * (k as f64 / 3.0 + rng.gen_range(-0.08..0.08));
        let r = scale * rng.gen_range(0.8..1.2);
        *v = [cx + r * theta.cos(), cy + r * theta.sin()];
    }
    let (field, discontinuous) = sample_field(rng, cx, cy, scale);

    // neighbors: reflect the opposite vertex across each edge
    let reflect = |p: [f64; 2], a: [f64; 2], b: [f64; 2]| -> [f64; 2] {
        let ab = [b[0] - a[0], b[1] - a[1]];
        let len2 = ab[0] * ab[0] + ab[1] * ab[1];
        let t = ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2;
        let proj = [a[0] + t * ab[0], a[1] + t * ab[1]];
        [2.0 * proj[0] - p[0], 2.0 * proj[1] - p[1]]
    };
    // neighbor k shares the edge opposite vertex k, ordered by that index
    let levels = 5;
    let center_avg = triangle_average(&verts, &field, levels);
    let mut neighbor_avgs = [0.0; 3];
    let mut edge_midpoints = [0.0; 3];
    for k in 0..3 {
        let (a, b, p) = (verts[(k + 1) % 3], verts[(k + 2) % 3], verts[k]);
        let ghost = reflect(p, a, b);
        let tri = [a, b, ghost];
        neighbor_avgs[k] = triangle_average(&tri, &field, levels);
        edge_midpoints[k] = field.eval(0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]));
    }
    let patch = TrianglePatch {
        area: triangle_area(&verts),
        center_avg,
        neighbor_avgs,
        edge_midpoint_values: edge_midpoints,
    };
    let features = remap_features_triangle(&patch)?;
    let label = if discontinuous {
        match &field {
            Field::Jump { normal, origin, .. } => line_hits_triangle(*normal, *origin, &verts) as u8,
            _ => unreachable!(),
        }
    } else {
        0
    };
    Ok(Sample { features, label })
}

/// Synthetic labeled dataset in the Cartesian 2D schema.
pub fn generate_rd_dataset(mesh_kind: MeshKind, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    let mut samples = Vec::with_capacity(n);
    for index in 0..n {
        // per-sample stream derived from (seed, index)
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ mix(index as u64));
        let sample = match mesh_kind {
            MeshKind::Cartesian => cartesian_sample(&mut rng)?,
            MeshKind::Triangular => triangular_sample(&mut rng)?,
        };
        samples.push(sample);
    }
    Ok(Dataset {
        schema: SchemaId::F2dV1,
        samples,
        provenance: Provenance {
            zeta: 0.0,
            seed,
            stride: 0,
            mesh: Some(mesh_kind.name().to_string()),
            n: Some(n),
        },
    })
}

fn mix(x: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = x.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy)]
pub struct MixSpec {
    /// Fraction of samples drawn from the target dataset.
    pub lambda: f64,
    pub total: usize,
    pub seed: u64,
}

/// Seeded sample-without-replacement blend of two datasets.
pub fn mix_datasets(source: &Dataset, target: &Dataset, spec: MixSpec) -> Result<Dataset> {
    if source.schema != target.schema {
        return Err(Error::SchemaMismatch {
            expected: source.schema.name().into(),
            got: target.schema.name().into(),
        });
    }
    if !(0.0..=1.0).contains(&spec.lambda) {
        return Err(Error::InvalidArgument(format!(
            "lambda = {} outside [0, 1]",
            spec.lambda
        )));
    }
    let n_target = (spec.lambda * spec.total as f64).ceil() as usize;
    let n_source = spec.total - n_target.min(spec.total);
    if n_target > target.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {n_target} target samples, only {} available",
            target.len()
        )));
    }
    if n_source > source.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {n_source} source samples, only {} available",
            source.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut pick = |ds: &Dataset, k: usize| -> Vec<Sample> {
        let mut idx: Vec<usize> = (0..ds.len()).collect();
        for i in (1..idx.len()).rev() {
            let j = rng.gen_range(0..=i);
            idx.swap(i, j);
        }
        idx[..k].iter().map(|&i| ds.samples[i].clone()).collect()
    };
    let mut samples = pick(target, n_target);
    samples.extend(pick(source, n_source));
    for i in (1..samples.len()).rev() {
        let j = rng.gen_range(0..=i);
        samples.swap(i, j);
    }
    Ok(Dataset {
        schema: source.schema,
        samples,
        provenance: Provenance {
            zeta: 0.0,
            seed: spec.seed,
            stride: 0,
            mesh: target.provenance.mesh.clone(),
            n: Some(spec.total),
        },
    })
}

/// Accuracy of the net on a dataset at threshold 0.5.
pub fn dataset_accuracy(net: &Network, ds: &Dataset) -> Result<f64> {
    let mut pred = Vec::with_capacity(ds.len());
    let mut truth = Vec::with_capacity(ds.len());
    for s in &ds.samples {
        pred.push(net.predict(&s.features.values, 0.5)?);
        truth.push(s.label);
    }
    let c = crate::metrics::confusion(&pred, &truth)?;
    Ok(crate::metrics::accuracy(&c).value)
}

/// Retrain a source-domain model on a lambda-mixed dataset. Returns the
/// adapted network and its training history; target features are expected
/// to be remapped already (they are generated in the common schema).
pub fn retrain(
    net: Network,
    source: &Dataset,
    target: &Dataset,
    lambda: f64,
    hyper: &Hyperparams,
    mix_total: usize,
    mix_seed: u64,
) -> Result<(Network, TrainHistory)> {
    if net.schema != SchemaId::F2dV1 {
        return Err(Error::SchemaMismatch {
            expected: SchemaId::F2dV1.name().into(),
            got: net.schema.name().into(),
        });
    }
    let mixed = mix_datasets(
        source,
        target,
        MixSpec {
            lambda,
            total: mix_total,
            seed: mix_seed,
        },
    )?;
    // hold out a slice of the mix for the early-stopping loss
    let spec = crate::dataset::SplitSpec::new(0.85, 0.1, 0.05, mix_seed)?;
    let (train_part, val_part, _) = crate::dataset::split(&mixed, spec)?;
    crate::mlp::train(net, &train_part, &val_part, hyper)
}
