//! Labeled dataset generation from DG runs.
//!
//! Probes the forward-Euler preview of the running state every `stride`
//! steps and labels each cell by whether one hierarchical-limiter
//! application would move its reconstruction by more than the threshold.
//! The probe is the pre-limit stage state a production limiter faces, so
//! features and labels describe exactly the detector's operating regime.
//!
//! The 1D matrix runs unlimited: the dispersive wake behind each front
//! supplies the oscillation-pattern positives behind the published
//! positive-label rate. The 2D matrix runs with the hierarchical limiter
//! active, which keeps positives hugging genuine fronts instead of the
//! much larger 2D wake (the relative 2D threshold exists for the same
//! reason: smooth features must not drown the labels).

use crate::error::{Error, Result};
use crate::features::{extract_features_1d, extract_features_2d, FeatureVector, SchemaId};
use crate::limiters::{apply_hio_1d, apply_hio_2d, HioLimiter, Limiter2D};
use crate::mesh::{Mesh1D, Mesh2D};
use crate::solution::{project_scalar_1d, project_scalar_2d, ModalSolution1D, ModalSolution2D};
use crate::solvers::ic::{make_ic, Ic};
use crate::solvers::rhs::{rhs_advection_1d, rhs_advection_2d, DgTables};
use crate::solvers::run::{ssp_step_1d, ssp_step_2d};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{BufRead, Write};
use std::path::Path;

pub const DEFAULT_ZETA_1D: f64 = 0.01;
pub const DEFAULT_ZETA_REL_2D: f64 = 0.0025;
pub const DEFAULT_STRIDE: usize = 10;

pub const MESH_SIZES_1D: [usize; 5] = [8, 16, 32, 64, 128];
pub const MESH_SIZES_2D: [usize; 4] = [16, 32, 64, 128];
pub const DATASET_ICS_1D: [&str; 3] = ["sine1d", "square1d", "halfsine1d"];
pub const DATASET_ICS_2D: [&str; 2] = ["ring2d", "gaussian2d"];
pub const SPEEDS_1D: [f64; 2] = [-1.0, 1.0];
pub const SPEEDS_2D: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: FeatureVector,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub zeta: f64,
    pub seed: u64,
    pub stride: usize,
    /// RD datasets: mesh kind and sample count.
    pub mesh: Option<String>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: SchemaId,
    pub samples: Vec<Sample>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn positive_fraction(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().filter(|s| s.label == 1).count() as f64 / self.samples.len() as f64
    }
}

/// Per-cell labels: 1 where one hierarchical-limiter application deviates
/// beyond the absolute threshold `zeta`.
pub fn label_cells_1d(sol: &ModalSolution1D, zeta: f64) -> Vec<u8> {
    let mut limited = sol.clone();
    let outcome = apply_hio_1d(&mut limited);
    outcome
        .max_deviation
        .iter()
        .map(|&d| (d > zeta) as u8)
        .collect()
}

/// 2D labels with a relative threshold: `zeta_rel` times the global range
/// of cell averages.
pub fn label_cells_2d(sol: &ModalSolution2D, zeta_rel: f64) -> Vec<u8> {
    let mut range: f64 = 0.0;
    for var in 0..sol.n_vars {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for iy in 0..sol.mesh.n_y {
            for ix in 0..sol.mesh.n_x {
                let a = sol.average(ix, iy, var);
                lo = lo.min(a);
                hi = hi.max(a);
            }
        }
        range = range.max(hi - lo);
    }
    let threshold = zeta_rel * range;
    let mut limited = sol.clone();
    let outcome = apply_hio_2d(&mut limited);
    outcome
        .max_deviation
        .iter()
        .map(|&d| (d > threshold) as u8)
        .collect()
}

/// One probe snapshot of a generation run: time, the pre-limit state, and
/// its labels.
pub struct ProbeState1D {
    pub time: f64,
    pub state: ModalSolution1D,
    pub labels: Vec<u8>,
}

/// Walk one unlimited advection run and collect the forward-Euler probe
/// every `stride` steps.
pub fn probe_states_1d(
    ic_name: &str,
    a: f64,
    n: usize,
    order: usize,
    zeta: f64,
    stride: usize,
) -> Result<Vec<ProbeState1D>> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be >= 1".into()));
    }
    let ic = make_ic(ic_name)?;
    let f = match &ic {
        Ic::Scalar1d { f, .. } => f,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "`{ic_name}` is not a 1D scalar initial condition"
            )))
        }
    };
    let degree = order - 1;
    let mesh = Mesh1D::unit(n, ic.boundary())?;
    let mut sol = project_scalar_1d(&mesh, degree, f)?;
    let tables = DgTables::new(degree);
    let t_end = 1.0;
    let dt0 = 0.1 * mesh.h / a.abs();

    let mut probes = Vec::new();
    let mut t = 0.0;
    let mut step = 0usize;
    loop {
        if step % stride == 0 {
            let dt = dt0.min(t_end - t).max(0.0);
            let mut probe = sol.clone();
            let mut k = vec![0.0; probe.coeffs.len()];
            rhs_advection_1d(&probe, a, &tables, &mut k);
            for (v, kv) in probe.coeffs.iter_mut().zip(&k) {
                *v += dt * kv;
            }
            let labels = label_cells_1d(&probe, zeta);
            probes.push(ProbeState1D {
                time: t,
                state: probe,
                labels,
            });
        }
        if t >= t_end - 1e-12 {
            break;
        }
        let dt = dt0.min(t_end - t);
        ssp_step_1d(
            &mut sol,
            dt,
            order,
            &mut |s, k| {
                rhs_advection_1d(s, a, &tables, k);
                Ok(())
            },
            &mut |_| Ok(None),
        )?;
        t += dt;
        step += 1;
    }
    Ok(probes)
}

fn samples_from_probe_1d(probe: &ProbeState1D) -> Result<Vec<Sample>> {
    let n = probe.state.mesh.n_cells;
    let mut out = Vec::with_capacity(n);
    for cell in 0..n {
        out.push(Sample {
            features: extract_features_1d(&probe.state, cell, 0)?,
            label: probe.labels[cell],
        });
    }
    Ok(out)
}

/// The full 1D run matrix: ICs x speeds x mesh sizes x orders.
pub fn generate_dataset_1d(zeta: f64, stride: usize, seed: u64) -> Result<Dataset> {
    let mut configs = Vec::new();
    for ic in DATASET_ICS_1D {
        for a in SPEEDS_1D {
            for n in MESH_SIZES_1D {
                for order in [2usize, 3] {
                    configs.push((ic, a, n, order));
                }
            }
        }
    }
    let results = run_parallel(configs.len(), |idx| {
        let (ic, a, n, order) = configs[idx];
        let probes = probe_states_1d(ic, a, n, order, zeta, stride)?;
        let mut samples = Vec::new();
        for p in &probes {
            samples.extend(samples_from_probe_1d(p)?);
        }
        Ok(samples)
    })?;
    Ok(Dataset {
        schema: SchemaId::F1dV1,
        samples: results.into_iter().flatten().collect(),
        provenance: Provenance {
            zeta,
            seed,
            stride,
            mesh: None,
            n: None,
        },
    })
}

pub struct ProbeState2D {
    pub time: f64,
    pub state: ModalSolution2D,
    pub labels: Vec<u8>,
}

pub fn probe_states_2d(
    ic_name: &str,
    a: [f64; 2],
    n: usize,
    order: usize,
    zeta_rel: f64,
    stride: usize,
) -> Result<Vec<ProbeState2D>> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be >= 1".into()));
    }
    let ic = make_ic(ic_name)?;
    let f = match &ic {
        Ic::Scalar2d { f, .. } => f,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "`{ic_name}` is not a 2D scalar initial condition"
            )))
        }
    };
    let degree = order - 1;
    let mesh = Mesh2D::unit(n, ic.boundary())?;
    let mut sol = project_scalar_2d(&mesh, degree, f)?;
    let tables = DgTables::new(degree);
    let t_end = 1.0;
    let speed = a[0].abs() + a[1].abs();
    let dt0 = 0.1 * mesh.dx.min(mesh.dy) / speed;

    let mut probes = Vec::new();
    let mut t = 0.0;
    let mut step = 0usize;
    loop {
        if step % stride == 0 {
            let dt = dt0.min(t_end - t).max(0.0);
            let mut probe = sol.clone();
            let mut k = vec![0.0; probe.coeffs.len()];
            rhs_advection_2d(&probe, a, &tables, &mut k);
            for (v, kv) in probe.coeffs.iter_mut().zip(&k) {
                *v += dt * kv;
            }
            let labels = label_cells_2d(&probe, zeta_rel);
            probes.push(ProbeState2D {
                time: t,
                state: probe,
                labels,
            });
        }
        if t >= t_end - 1e-12 {
            break;
        }
        let dt = dt0.min(t_end - t);
        ssp_step_2d(
            &mut sol,
            dt,
            order,
            &mut |s, k| {
                rhs_advection_2d(s, a, &tables, k);
                Ok(())
            },
            &mut |s| Ok(Some(Limiter2D::apply(&HioLimiter, s))),
        )?;
        t += dt;
        step += 1;
    }
    Ok(probes)
}

fn samples_from_probe_2d(probe: &ProbeState2D) -> Result<Vec<Sample>> {
    let (nx, ny) = (probe.state.mesh.n_x, probe.state.mesh.n_y);
    let mut out = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            out.push(Sample {
                features: extract_features_2d(&probe.state, ix, iy, 0)?,
                label: probe.labels[iy * nx + ix],
            });
        }
    }
    Ok(out)
}

/// The full 2D run matrix over the given mesh sizes.
pub fn generate_dataset_2d_sizes(
    zeta_rel: f64,
    stride: usize,
    seed: u64,
    sizes: &[usize],
) -> Result<Dataset> {
    let mut configs = Vec::new();
    for ic in DATASET_ICS_2D {
        for a in SPEEDS_2D {
            for &n in sizes {
                for order in [2usize, 3] {
                    configs.push((ic, a, n, order));
                }
            }
        }
    }
    let results = run_parallel(configs.len(), |idx| {
        let (ic, a, n, order) = configs[idx];
        let probes = probe_states_2d(ic, a, n, order, zeta_rel, stride)?;
        let mut samples = Vec::new();
        for p in &probes {
            samples.extend(samples_from_probe_2d(p)?);
        }
        Ok(samples)
    })?;
    Ok(Dataset {
        schema: SchemaId::F2dV1,
        samples: results.into_iter().flatten().collect(),
        provenance: Provenance {
            zeta: zeta_rel,
            seed,
            stride,
            mesh: None,
            n: None,
        },
    })
}

pub fn generate_dataset_2d(zeta_rel: f64, stride: usize, seed: u64) -> Result<Dataset> {
    generate_dataset_2d_sizes(zeta_rel, stride, seed, &MESH_SIZES_2D)
}

/// Independent tasks with a deterministic ordered merge.
fn run_parallel<T: Send>(
    count: usize,
    task: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let threads = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
        .min(count.max(1))
        .min(8);
    let mut slots: Vec<Option<Result<T>>> = (0..count).map(|_| None).collect();
    if threads <= 1 {
        for (i, slot) in slots.iter_mut().enumerate() {
            *slot = Some(task(i));
        }
    } else {
        let task = &task;
        std::thread::scope(|scope| {
            let mut chunks: Vec<&mut [Option<Result<T>>]> = Vec::new();
            let mut rest = slots.as_mut_slice();
            let base = count / threads;
            let extra = count % threads;
            for t in 0..threads {
                let take = base + usize::from(t < extra);
                let (head, tail) = rest.split_at_mut(take);
                chunks.push(head);
                rest = tail;
            }
            let mut offset = 0;
            for chunk in chunks {
                let start = offset;
                offset += chunk.len();
                scope.spawn(move || {
                    for (k, slot) in chunk.iter_mut().enumerate() {
                        *slot = Some(task(start + k));
                    }
                });
            }
        });
    }
    slots
        .into_iter()
        .map(|s| s.expect("task completed"))
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct SplitSpec {
    pub ratios: (f64, f64, f64),
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, validation: f64, test: f64, seed: u64) -> Result<Self> {
        if train <= 0.0 || validation <= 0.0 || test <= 0.0 {
            return Err(Error::InvalidArgument("split ratios must be positive".into()));
        }
        if ((train + validation + test) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("split ratios must sum to 1".into()));
        }
        Ok(Self {
            ratios: (train, validation, test),
            seed,
        })
    }
}

/// Seeded shuffle followed by a contiguous partition.
pub fn split(ds: &Dataset, spec: SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    if ds.samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = ds.samples.len();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
    let n_train = (spec.ratios.0 * n as f64).floor() as usize;
    let n_val = (spec.ratios.1 * n as f64).floor() as usize;
    let part = |range: &[usize]| Dataset {
        schema: ds.schema,
        samples: range.iter().map(|&i| ds.samples[i].clone()).collect(),
        provenance: ds.provenance.clone(),
    };
    Ok((
        part(&indices[..n_train]),
        part(&indices[n_train..n_train + n_val]),
        part(&indices[n_train + n_val..]),
    ))
}

// ---------------------------------------------------------------------------
// CSV persistence
// ---------------------------------------------------------------------------

pub fn save_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_csv(ds, &mut w)
}

pub fn write_csv(ds: &Dataset, w: &mut impl Write) -> Result<()> {
    let p = &ds.provenance;
    let mut header = format!(
        "# nnlim-dataset v1 schema={} zeta={} seed={} stride={}",
        ds.schema.name(),
        p.zeta,
        p.seed,
        p.stride
    );
    if let Some(mesh) = &p.mesh {
        header.push_str(&format!(" mesh={mesh}"));
    }
    if let Some(n) = p.n {
        header.push_str(&format!(" n={n}"));
    }
    writeln!(w, "{header}")?;
    let d = ds.schema.dim();
    let cols: Vec<String> = (1..=d).map(|k| format!("f{k}")).collect();
    writeln!(w, "{},label", cols.join(","))?;
    for s in &ds.samples {
        let vals: Vec<String> = s.features.values.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{},{}", vals.join(","), s.label)?;
    }
    Ok(())
}

pub fn load_csv(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    read_csv(std::io::BufReader::new(file))
}

pub fn read_csv(r: impl BufRead) -> Result<Dataset> {
    let mut lines = r.lines().enumerate();
    let (ln, header) = match lines.next() {
        Some((i, Ok(l))) => (i + 1, l),
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "missing header".into(),
            })
        }
    };
    if !header.starts_with("# nnlim-dataset v1") {
        return Err(Error::Parse {
            line: ln,
            msg: format!("bad header `{header}`"),
        });
    }
    let mut schema = None;
    let mut prov = Provenance {
        zeta: 0.0,
        seed: 0,
        stride: 0,
        mesh: None,
        n: None,
    };
    for tok in header.trim_start_matches('#').split_whitespace() {
        if let Some((key, val)) = tok.split_once('=') {
            match key {
                "schema" => schema = Some(SchemaId::parse(val)?),
                "zeta" => prov.zeta = parse(val, ln)?,
                "seed" => prov.seed = parse(val, ln)?,
                "stride" => prov.stride = parse(val, ln)?,
                "mesh" => prov.mesh = Some(val.to_string()),
                "n" => prov.n = Some(parse(val, ln)?),
                _ => {}
            }
        }
    }
    let schema = schema.ok_or(Error::Parse {
        line: ln,
        msg: "header lacks schema=".into(),
    })?;
    let d = schema.dim();

    // column-name line
    match lines.next() {
        Some((_, Ok(_))) => {}
        _ => {
            return Err(Error::Parse {
                line: 2,
                msg: "missing column line".into(),
            })
        }
    }

    let mut samples = Vec::new();
    for (i, line) in lines {
        let ln = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: ln,
            msg: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 1 {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected {} fields, found {}", d + 1, fields.len()),
            });
        }
        let values: Vec<f64> = fields[..d]
            .iter()
            .map(|t| parse::<f64>(t, ln))
            .collect::<Result<_>>()?;
        let label: u8 = parse(fields[d], ln)?;
        if label > 1 {
            return Err(Error::Parse {
                line: ln,
                msg: format!("label must be 0 or 1, found {label}"),
            });
        }
        samples.push(Sample {
            features: FeatureVector { schema, values },
            label,
        });
    }
    Ok(Dataset {
        schema,
        samples,
        provenance: prov,
    })
}

fn parse<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value `{s}`"),
    })
}
