//! Compact-set descriptions and their discretization into weighted node
//! clouds.
//!
//! Discretization schemes:
//! - `grid`: volume nodes. Intervals and boxes use cell-midpoint lattices.
//!   Balls in 2 and 3 dimensions use concentric rings / shells whose outer
//!   layer sits on the boundary sphere, so measures that concentrate at the
//!   boundary stay representable; balls in higher dimension use a cubic
//!   lattice clipped to the ball.
//! - `boundary`: surface nodes. Equal-angle points on circles, a Fibonacci
//!   lattice on 2-spheres, Chebyshev–Lobatto points on intervals.
//! - `native`: boundary for sphere specs, grid otherwise.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::ball_volume;
use crate::error::{invalid, Error, Result};

/// Declarative compact set in R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SetSpec {
    Ball {
        dim: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        center: Vec<f64>,
        radius: f64,
    },
    Sphere {
        dim: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        center: Vec<f64>,
        radius: f64,
    },
    Interval {
        a: f64,
        b: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Points {
        coords: Vec<Vec<f64>>,
    },
    Union {
        parts: Vec<SetSpec>,
    },
}

impl SetSpec {
    pub fn unit_ball(dim: usize) -> Self {
        SetSpec::Ball {
            dim,
            center: vec![0.0; dim],
            radius: 1.0,
        }
    }

    pub fn unit_sphere(dim: usize) -> Self {
        SetSpec::Sphere {
            dim,
            center: vec![0.0; dim],
            radius: 1.0,
        }
    }

    pub fn interval(a: f64, b: f64) -> Self {
        SetSpec::Interval { a, b }
    }

    /// Parse and validate a JSON set description.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SetSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SetSpec::Ball {
                dim,
                center,
                radius,
            }
            | SetSpec::Sphere {
                dim,
                center,
                radius,
            } => {
                if *dim == 0 {
                    return invalid("dimension must be positive");
                }
                if !center.is_empty() && center.len() != *dim {
                    return invalid(format!(
                        "center has {} coordinates, expected {dim}",
                        center.len()
                    ));
                }
                if !(*radius > 0.0) || !radius.is_finite() {
                    return invalid(format!("radius must be positive, got {radius}"));
                }
                check_finite(center)
            }
            SetSpec::Interval { a, b } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return invalid(format!("interval needs finite a < b, got [{a}, {b}]"));
                }
                Ok(())
            }
            SetSpec::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return invalid("box corners must be nonempty and of equal length");
                }
                check_finite(lo)?;
                check_finite(hi)?;
                if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                    return invalid("box corners must satisfy lo < hi componentwise");
                }
                Ok(())
            }
            SetSpec::Points { coords } => {
                let Some(first) = coords.first() else {
                    return invalid("point set is empty");
                };
                if first.is_empty() || coords.iter().any(|c| c.len() != first.len()) {
                    return invalid("points must share a positive dimension");
                }
                coords.iter().try_for_each(|c| check_finite(c))
            }
            SetSpec::Union { parts } => {
                let Some(first) = parts.first() else {
                    return invalid("union has no parts");
                };
                let dim = first.ambient_dim();
                for part in parts {
                    part.validate()?;
                    if part.ambient_dim() != dim {
                        return invalid("union parts must share the ambient dimension");
                    }
                }
                Ok(())
            }
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            SetSpec::Ball { dim, .. } | SetSpec::Sphere { dim, .. } => *dim,
            SetSpec::Interval { .. } => 1,
            SetSpec::Box { lo, .. } => lo.len(),
            SetSpec::Points { coords } => coords.first().map_or(0, Vec::len),
            SetSpec::Union { parts } => parts.first().map_or(0, SetSpec::ambient_dim),
        }
    }

    /// n-dimensional Lebesgue measure where it is known exactly.
    pub fn lebesgue_measure(&self) -> Option<f64> {
        match self {
            SetSpec::Ball { dim, radius, .. } => {
                Some(ball_volume(*dim).ok()? * radius.powi(*dim as i32))
            }
            SetSpec::Sphere { dim, .. } if *dim >= 2 => Some(0.0),
            SetSpec::Interval { a, b } => Some(b - a),
            SetSpec::Box { lo, hi } => Some(lo.iter().zip(hi).map(|(l, h)| h - l).product()),
            SetSpec::Points { coords } if !coords[0].is_empty() => Some(0.0),
            _ => None,
        }
    }

    /// Exact diameter where it is known in closed form.
    pub fn diameter(&self) -> Option<f64> {
        match self {
            SetSpec::Ball { radius, .. } | SetSpec::Sphere { radius, .. } => Some(2.0 * radius),
            SetSpec::Interval { a, b } => Some(b - a),
            SetSpec::Box { lo, hi } => Some(
                lo.iter()
                    .zip(hi)
                    .map(|(l, h)| (h - l) * (h - l))
                    .sum::<f64>()
                    .sqrt(),
            ),
            SetSpec::Points { coords } => {
                let mut best = 0.0f64;
                for (i, x) in coords.iter().enumerate() {
                    for y in &coords[i + 1..] {
                        best = best.max(dist(x, y));
                    }
                }
                Some(best)
            }
            SetSpec::Union { .. } => None,
        }
    }

    /// The image of the set under x ↦ s·x.
    pub fn scaled(&self, s: f64) -> SetSpec {
        let sc = |v: &[f64]| v.iter().map(|x| s * x).collect::<Vec<_>>();
        match self {
            SetSpec::Ball {
                dim,
                center,
                radius,
            } => SetSpec::Ball {
                dim: *dim,
                center: sc(center),
                radius: s * radius,
            },
            SetSpec::Sphere {
                dim,
                center,
                radius,
            } => SetSpec::Sphere {
                dim: *dim,
                center: sc(center),
                radius: s * radius,
            },
            SetSpec::Interval { a, b } => SetSpec::Interval { a: s * a, b: s * b },
            SetSpec::Box { lo, hi } => SetSpec::Box {
                lo: sc(lo),
                hi: sc(hi),
            },
            SetSpec::Points { coords } => SetSpec::Points {
                coords: coords.iter().map(|c| sc(c)).collect(),
            },
            SetSpec::Union { parts } => SetSpec::Union {
                parts: parts.iter().map(|p| p.scaled(s)).collect(),
            },
        }
    }

    /// Dimension and radius of a ball spec; `None` otherwise.
    pub fn ball_radius(&self) -> Option<(usize, f64)> {
        match self {
            SetSpec::Ball { dim, radius, .. } => Some((*dim, *radius)),
            _ => None,
        }
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        invalid("coordinates must be finite")
    }
}

#[inline]
pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Discretization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Grid,
    Boundary,
    Native,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Grid => "grid",
            Scheme::Boundary => "boundary",
            Scheme::Native => "native",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Scheme::Grid),
            "boundary" => Ok(Scheme::Boundary),
            "native" => Ok(Scheme::Native),
            other => invalid(format!("unknown scheme '{other}'")),
        }
    }
}

/// Nodes with cell measures. Immutable once built; the pairwise distance
/// matrix is computed on first use and cached.
#[derive(Debug, Clone)]
pub struct NodeCloud {
    dim: usize,
    native_dim: usize,
    coords: Vec<f64>,
    cell_measures: Vec<f64>,
    mesh_size: f64,
    distances: OnceLock<Vec<f64>>,
}

impl NodeCloud {
    /// `coords` is row-major with `dim` entries per node. `native_dim` is the
    /// dimension in which `cell_measures` are measured (0 for atoms).
    pub fn new(
        dim: usize,
        coords: Vec<f64>,
        cell_measures: Vec<f64>,
        mesh_size: f64,
        native_dim: usize,
    ) -> Result<Self> {
        if dim == 0 {
            return invalid("node dimension must be positive");
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return invalid("coordinate buffer is empty or not a multiple of the dimension");
        }
        let n = coords.len() / dim;
        if cell_measures.len() != n {
            return invalid(format!(
                "{} cell measures for {n} nodes",
                cell_measures.len()
            ));
        }
        if cell_measures.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            return invalid("cell measures must be finite and positive");
        }
        if !(mesh_size > 0.0) || !mesh_size.is_finite() {
            return invalid(format!("mesh size must be positive, got {mesh_size}"));
        }
        check_finite(&coords)?;
        let cloud = Self {
            dim,
            native_dim,
            coords,
            cell_measures,
            mesh_size,
            distances: OnceLock::new(),
        };
        if let Some((i, j)) = cloud.find_duplicate() {
            return invalid(format!("nodes {i} and {j} coincide"));
        }
        Ok(cloud)
    }

    /// Atoms at the given points with unit cell measures.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = points.first() else {
            return invalid("point set is empty");
        };
        let dim = first.len();
        if points.iter().any(|p| p.len() != dim) {
            return invalid("points must share a dimension");
        }
        let coords: Vec<f64> = points.iter().flatten().copied().collect();
        let n = points.len();
        let mut min_sep = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                min_sep = min_sep.min(dist(&points[i], &points[j]));
            }
        }
        let mesh = if min_sep.is_finite() && min_sep > 0.0 {
            0.5 * min_sep
        } else {
            1.0
        };
        Self::new(dim, coords, vec![1.0; n], mesh, 0)
    }

    fn find_duplicate(&self) -> Option<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.node(a)
                .iter()
                .zip(self.node(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        order
            .windows(2)
            .find(|w| self.node(w[0]) == self.node(w[1]))
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cell_measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_measures.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn native_dim(&self) -> usize {
        self.native_dim
    }

    #[inline]
    pub fn node(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn cell_measures(&self) -> &[f64] {
        &self.cell_measures
    }

    pub fn mesh_size(&self) -> f64 {
        self.mesh_size
    }

    /// Radius of the native-dimensional ball with the same measure as cell i.
    pub fn cell_radius(&self, i: usize) -> f64 {
        if self.native_dim == 0 {
            return self.mesh_size;
        }
        let d = self.native_dim;
        let unit = ball_volume(d).expect("positive dimension");
        (self.cell_measures[i] / unit).powf(1.0 / d as f64)
    }

    /// Row-major N×N Euclidean distance matrix, computed once.
    pub fn distances(&self) -> &[f64] {
        self.distances.get_or_init(|| {
            let n = self.len();
            let mut d = vec![0.0; n * n];
            d.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
                let xi = self.node(i);
                for (j, slot) in row.iter_mut().enumerate() {
                    if j != i {
                        *slot = dist(xi, self.node(j));
                    }
                }
            });
            d
        })
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances()[i * self.len() + j]
    }

    /// Maximum pairwise distance; 0 for a single node.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = self.node(i);
                (i + 1..n)
                    .map(|j| dist(xi, self.node(j)))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// The image under x ↦ s·x, with cell measures scaled by s^native_dim.
    pub fn scaled(&self, s: f64) -> Result<NodeCloud> {
        if !(s > 0.0) {
            return invalid(format!("scale factor must be positive, got {s}"));
        }
        let factor = s.powi(self.native_dim as i32);
        let mesh = self.mesh_size * s;
        NodeCloud::new(
            self.dim,
            self.coords.iter().map(|x| s * x).collect(),
            self.cell_measures.iter().map(|m| m * factor).collect(),
            mesh,
            self.native_dim,
        )
    }

    /// A cloud with the nodes reordered: node k of the result is node
    /// `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<NodeCloud> {
        if perm.len() != self.len() {
            return invalid("permutation length mismatch");
        }
        let mut coords = Vec::with_capacity(self.coords.len());
        let mut measures = Vec::with_capacity(self.len());
        for &k in perm {
            coords.extend_from_slice(self.node(k));
            measures.push(self.cell_measures[k]);
        }
        NodeCloud::new(self.dim, coords, measures, self.mesh_size, self.native_dim)
    }
}

/// Maximum pairwise Euclidean distance of a cloud.
pub fn diameter(cloud: &NodeCloud) -> f64 {
    cloud.diameter()
}

/// Discretize `spec` with roughly `target` nodes (within a factor of two,
/// except for sets that are finite by nature).
pub fn discretize(spec: &SetSpec, target: usize, scheme: Scheme) -> Result<NodeCloud> {
    if target < 2 {
        return invalid(format!(
            "target node count must be at least 2, got {target}"
        ));
    }
    spec.validate()?;
    let raw = build(spec, target, scheme)?;
    raw.into_cloud()
}

struct Raw {
    dim: usize,
    native_dim: usize,
    coords: Vec<f64>,
    measures: Vec<f64>,
    mesh: f64,
}

impl Raw {
    fn into_cloud(self) -> Result<NodeCloud> {
        NodeCloud::new(
            self.dim,
            self.coords,
            self.measures,
            self.mesh,
            self.native_dim,
        )
    }
}

fn unsupported<T>(spec: &SetSpec, scheme: Scheme) -> Result<T> {
    let kind = match spec {
        SetSpec::Ball { dim, .. } => format!("{dim}-ball"),
        SetSpec::Sphere { dim, .. } => format!("sphere in R^{dim}"),
        SetSpec::Interval { .. } => "interval".into(),
        SetSpec::Box { lo, .. } => format!("{}-box", lo.len()),
        SetSpec::Points { .. } => "point set".into(),
        SetSpec::Union { .. } => "union".into(),
    };
    Err(Error::Unsupported(format!(
        "scheme '{scheme}' is not available for a {kind}"
    )))
}

fn build(spec: &SetSpec, target: usize, scheme: Scheme) -> Result<Raw> {
    match (spec, scheme) {
        (SetSpec::Points { coords }, _) => {
            let cloud = NodeCloud::from_points(coords)?;
            Ok(Raw {
                dim: cloud.dim,
                native_dim: 0,
                mesh: cloud.mesh_size,
                coords: cloud.coords,
                measures: cloud.cell_measures,
            })
        }
        (SetSpec::Interval { a, b }, Scheme::Grid | Scheme::Native) => {
            Ok(interval_midpoints(*a, *b, target))
        }
        (SetSpec::Interval { a, b }, Scheme::Boundary) => Ok(interval_lobatto(*a, *b, target)),
        (
            SetSpec::Ball {
                dim,
                center,
                radius,
            },
            Scheme::Grid | Scheme::Native,
        ) => {
            let unit = match dim {
                1 => interval_midpoints(-1.0, 1.0, target),
                2 => disk_rings(target),
                3 => ball_shells(target),
                _ => clipped_lattice(*dim, target),
            };
            Ok(place(unit, center, *radius))
        }
        (
            SetSpec::Ball {
                dim,
                center,
                radius,
            }
            | SetSpec::Sphere {
                dim,
                center,
                radius,
            },
            Scheme::Boundary,
        )
        | (
            SetSpec::Sphere {
                dim,
                center,
                radius,
            },
            Scheme::Native,
        ) => {
            let unit = match dim {
                1 => Raw {
                    dim: 1,
                    native_dim: 0,
                    coords: vec![-1.0, 1.0],
                    measures: vec![1.0, 1.0],
                    mesh: 1.0,
                },
                2 => circle_points(target),
                3 => fibonacci_sphere(target),
                _ => return unsupported(spec, scheme),
            };
            Ok(place(unit, center, *radius))
        }
        (SetSpec::Box { lo, hi }, Scheme::Grid | Scheme::Native) => Ok(box_lattice(lo, hi, target)),
        (SetSpec::Union { parts }, _) => union(parts, target, scheme),
        _ => unsupported(spec, scheme),
    }
}

/// Map a unit-ball discretization centered at the origin to center + R·u.
fn place(mut unit: Raw, center: &[f64], radius: f64) -> Raw {
    let dim = unit.dim;
    for node in unit.coords.chunks_exact_mut(dim) {
        for (k, x) in node.iter_mut().enumerate() {
            let c = center.get(k).copied().unwrap_or(0.0);
            *x = c + radius * *x;
        }
    }
    let factor = radius.powi(unit.native_dim as i32);
    for m in &mut unit.measures {
        *m *= factor;
    }
    unit.mesh *= radius;
    unit
}

fn interval_midpoints(a: f64, b: f64, n: usize) -> Raw {
    let len = b - a;
    let coords = (0..n)
        .map(|k| a + (k as f64 + 0.5) * len / n as f64)
        .collect();
    Raw {
        dim: 1,
        native_dim: 1,
        coords,
        measures: vec![len / n as f64; n],
        mesh: len / (2 * n) as f64,
    }
}

fn interval_lobatto(a: f64, b: f64, n: usize) -> Raw {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut coords: Vec<f64> = (0..n)
        .map(|k| mid - half * (PI * k as f64 / (n - 1) as f64).cos())
        .collect();
    coords[0] = a;
    coords[n - 1] = b;
    let mut measures = Vec::with_capacity(n);
    let mut mesh = 0.0f64;
    for k in 0..n {
        let left = if k == 0 {
            0.0
        } else {
            0.5 * (coords[k] - coords[k - 1])
        };
        let right = if k == n - 1 {
            0.0
        } else {
            0.5 * (coords[k + 1] - coords[k])
        };
        measures.push(left + right);
        mesh = mesh.max(left.max(right));
    }
    Raw {
        dim: 1,
        native_dim: 1,
        coords,
        measures,
        mesh,
    }
}

/// Concentric rings in the unit disk: a center node plus rings at radii
/// k/M, k = 1..M, each cell an annular sector.
fn disk_rings(target: usize) -> Raw {
    let rings = ((target as f64 / PI).sqrt().round() as usize).max(1);
    let dr = 1.0 / rings as f64;
    let mut coords = vec![0.0, 0.0];
    let mut measures = vec![PI * 0.25 * dr * dr];
    let mut mesh = 0.5 * dr;
    for k in 1..=rings {
        let r = k as f64 * dr;
        let r_in = r - 0.5 * dr;
        let r_out = (r + 0.5 * dr).min(1.0);
        let count = ((2.0 * PI * r / dr).round() as usize).max(1);
        let area = PI * (r_out * r_out - r_in * r_in) / count as f64;
        let phase = if k % 2 == 1 { 0.5 } else { 0.0 };
        for j in 0..count {
            let t = 2.0 * PI * (j as f64 + phase) / count as f64;
            coords.push(r * t.cos());
            coords.push(r * t.sin());
            measures.push(area);
        }
        let half_arc = PI * r / count as f64;
        mesh = mesh.max((0.25 * dr * dr + half_arc * half_arc).sqrt());
    }
    Raw {
        dim: 2,
        native_dim: 2,
        coords,
        measures,
        mesh,
    }
}

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653_3; // π(3 − √5)

fn fibonacci_unit(count: usize, phase: f64, out: &mut Vec<f64>) {
    for i in 0..count {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let phi = GOLDEN_ANGLE * i as f64 + phase;
        out.extend_from_slice(&[rho * phi.cos(), rho * phi.sin(), z]);
    }
}

/// Concentric Fibonacci shells in the unit 3-ball, outer shell on the sphere.
fn ball_shells(target: usize) -> Raw {
    let shells = ((3.0 * target as f64 / (4.0 * PI)).cbrt().round() as usize).max(1);
    let dr = 1.0 / shells as f64;
    let mut coords = vec![0.0, 0.0, 0.0];
    let mut measures = vec![4.0 / 3.0 * PI * (0.5 * dr).powi(3)];
    let mut mesh = 0.5 * dr;
    for k in 1..=shells {
        let r = k as f64 * dr;
        let r_in = r - 0.5 * dr;
        let r_out = (r + 0.5 * dr).min(1.0);
        let vol = 4.0 / 3.0 * PI * (r_out.powi(3) - r_in.powi(3));
        let count = ((vol / dr.powi(3)).round() as usize).max(1);
        let start = coords.len();
        fibonacci_unit(count, k as f64, &mut coords);
        for x in &mut coords[start..] {
            *x *= r;
        }
        measures.extend(std::iter::repeat_n(vol / count as f64, count));
        let tangential = 2.0 * r / (count as f64).sqrt();
        mesh = mesh.max((0.25 * dr * dr + tangential * tangential).sqrt());
    }
    Raw {
        dim: 3,
        native_dim: 3,
        coords,
        measures,
        mesh,
    }
}

/// Cubic lattice of cell midpoints clipped to the unit ball in R^dim.
fn clipped_lattice(dim: usize, target: usize) -> Raw {
    let vol = ball_volume(dim).expect("positive dimension");
    let per_axis = ((target as f64 * 2f64.powi(dim as i32) / vol)
        .powf(1.0 / dim as f64)
        .round() as usize)
        .max(2);
    let a = 2.0 / per_axis as f64;
    let mut coords = Vec::new();
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    'outer: loop {
        for (x, &k) in point.iter_mut().zip(&idx) {
            *x = -1.0 + a * (k as f64 + 0.5);
        }
        if point.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            coords.extend_from_slice(&point);
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < per_axis {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    let n = coords.len() / dim;
    Raw {
        dim,
        native_dim: dim,
        coords,
        measures: vec![a.powi(dim as i32); n],
        mesh: 0.5 * a * (dim as f64).sqrt(),
    }
}

fn circle_points(n: usize) -> Raw {
    let mut coords = Vec::with_capacity(2 * n);
    for k in 0..n {
        let t = 2.0 * PI * k as f64 / n as f64;
        coords.push(t.cos());
        coords.push(t.sin());
    }
    Raw {
        dim: 2,
        native_dim: 1,
        coords,
        measures: vec![2.0 * PI / n as f64; n],
        mesh: PI / n as f64,
    }
}

fn fibonacci_sphere(n: usize) -> Raw {
    let mut coords = Vec::with_capacity(3 * n);
    fibonacci_unit(n, 0.0, &mut coords);
    let area = 4.0 * PI / n as f64;
    Raw {
        dim: 3,
        native_dim: 2,
        coords,
        measures: vec![area; n],
        mesh: 2.0 * (area / PI).sqrt(),
    }
}

fn box_lattice(lo: &[f64], hi: &[f64], target: usize) -> Raw {
    let dim = lo.len();
    let lens: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
    let vol: f64 = lens.iter().product();
    let a = (vol / target as f64).powf(1.0 / dim as f64);
    let counts: Vec<usize> = lens
        .iter()
        .map(|l| ((l / a).round() as usize).max(1))
        .collect();
    let steps: Vec<f64> = lens
        .iter()
        .zip(&counts)
        .map(|(l, &c)| l / c as f64)
        .collect();
    let cell: f64 = steps.iter().product();
    let mut coords = Vec::new();
    let mut idx = vec![0usize; dim];
    'outer: loop {
        for k in 0..dim {
            coords.push(lo[k] + steps[k] * (idx[k] as f64 + 0.5));
        }
        for k in 0..dim {
            idx[k] += 1;
            if idx[k] < counts[k] {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    let n = coords.len() / dim;
    Raw {
        dim,
        native_dim: dim,
        coords,
        measures: vec![cell; n],
        mesh: 0.5 * steps.iter().map(|s| s * s).sum::<f64>().sqrt(),
    }
}

fn union(parts: &[SetSpec], target: usize, scheme: Scheme) -> Result<Raw> {
    let resolved: Vec<Scheme> = parts
        .iter()
        .map(|p| match (p, scheme) {
            (SetSpec::Sphere { .. }, Scheme::Native) => Scheme::Boundary,
            (_, Scheme::Native) => Scheme::Grid,
            (_, s) => s,
        })
        .collect();
    // Probe native dimensions with tiny discretizations to decide budgets.
    let probes: Vec<Raw> = parts
        .iter()
        .zip(&resolved)
        .map(|(p, &s)| build(p, 2, s))
        .collect::<Result<_>>()?;
    let native = probes[0].native_dim;
    if probes.iter().any(|r| r.native_dim != native) {
        return Err(Error::Unsupported(
            "union parts discretize to cells of different dimension".into(),
        ));
    }
    let sizes: Vec<f64> = probes.iter().map(|r| r.measures.iter().sum()).collect();
    let total: f64 = sizes.iter().sum();
    let mut pieces = Vec::with_capacity(parts.len());
    for ((part, &s), size) in parts.iter().zip(&resolved).zip(&sizes) {
        let share = ((target as f64 * size / total).round() as usize).max(2);
        pieces.push(build(part, share, s)?);
    }
    let dim = pieces[0].dim;
    let mesh = pieces.iter().map(|r| r.mesh).fold(0.0, f64::max);
    let tol = mesh / 10.0;
    let mut coords: Vec<f64> = Vec::new();
    let mut measures = Vec::new();
    for piece in pieces {
        for (node, m) in piece.coords.chunks_exact(dim).zip(piece.measures) {
            let duplicate = coords
                .chunks_exact(dim)
                .any(|other| dist(node, other) <= tol);
            if !duplicate {
                coords.extend_from_slice(node);
                measures.push(m);
            }
        }
    }
    Ok(Raw {
        dim,
        native_dim: native,
        coords,
        measures,
        mesh,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn interval_grid_example() {
        let c = discretize(&SetSpec::interval(-1.0, 1.0), 4, Scheme::Grid).unwrap();
        assert_eq!(c.coords(), &[-0.75, -0.25, 0.25, 0.75]);
        assert_eq!(c.cell_measures(), &[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(c.native_dim(), 1);
    }

    #[test]
    fn circle_boundary_example() {
        let c = discretize(&SetSpec::unit_sphere(2), 4, Scheme::Boundary).unwrap();
        let want = [1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0];
        assert!(close(c.coords(), &want, 1e-15));
        let total: f64 = c.cell_measures().iter().sum();
        assert!((total - 2.0 * PI).abs() < 1e-14);
        assert!(c.cell_measures().windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn points_passthrough() {
        let spec = SetSpec::Points {
            coords: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
        };
        for scheme in [Scheme::Grid, Scheme::Boundary, Scheme::Native] {
            let c = discretize(&spec, 100, scheme).unwrap();
            assert_eq!(c.coords(), &[0.0, 0.0, 1.0, 0.0]);
            assert_eq!(c.cell_measures(), &[1.0, 1.0]);
        }
    }

    #[test]
    fn diameter_examples() {
        let c = NodeCloud::from_points(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(diameter(&c), 5.0);
        let single = NodeCloud::from_points(&[vec![1.0, 2.0]]).unwrap();
        assert_eq!(diameter(&single), 0.0);
        let square = NodeCloud::from_points(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        assert!((diameter(&square) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn node_counts_within_factor_two() {
        let specs = [
            (SetSpec::interval(0.0, 3.0), Scheme::Grid),
            (SetSpec::interval(0.0, 3.0), Scheme::Boundary),
            (SetSpec::unit_ball(2), Scheme::Grid),
            (SetSpec::unit_ball(3), Scheme::Grid),
            (SetSpec::unit_ball(4), Scheme::Grid),
            (SetSpec::unit_ball(2), Scheme::Boundary),
            (SetSpec::unit_ball(3), Scheme::Boundary),
            (
                SetSpec::Box {
                    lo: vec![0.0, 0.0],
                    hi: vec![1.0, 2.0],
                },
                Scheme::Grid,
            ),
        ];
        for (spec, scheme) in specs {
            for target in [50usize, 300, 1000] {
                let n = discretize(&spec, target, scheme).unwrap().len();
                assert!(
                    n * 2 >= target && n <= 2 * target,
                    "{spec:?} {scheme}: {n} nodes for target {target}"
                );
            }
        }
    }

    #[test]
    fn cell_measures_sum_to_set_measure() {
        let disk = discretize(&SetSpec::unit_ball(2), 500, Scheme::Grid).unwrap();
        let total: f64 = disk.cell_measures().iter().sum();
        assert!((total - PI).abs() < 1e-12);
        let ball = discretize(&SetSpec::unit_ball(3), 800, Scheme::Grid).unwrap();
        let total: f64 = ball.cell_measures().iter().sum();
        assert!((total - 4.0 / 3.0 * PI).abs() < 1e-12);
        let sphere = discretize(&SetSpec::unit_sphere(3), 700, Scheme::Native).unwrap();
        let total: f64 = sphere.cell_measures().iter().sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
        let lob = discretize(&SetSpec::interval(-2.0, 5.0), 33, Scheme::Boundary).unwrap();
        let total: f64 = lob.cell_measures().iter().sum();
        assert!((total - 7.0).abs() < 1e-12);
    }

    #[test]
    fn nodes_lie_in_the_set() {
        let spec = SetSpec::Ball {
            dim: 2,
            center: vec![1.0, -2.0],
            radius: 0.5,
        };
        let c = discretize(&spec, 400, Scheme::Grid).unwrap();
        for x in c.nodes() {
            let r = dist(x, &[1.0, -2.0]);
            assert!(r <= 0.5 + 1e-12);
        }
        let shell = discretize(&SetSpec::unit_ball(3), 400, Scheme::Grid).unwrap();
        assert!(shell.nodes().all(|x| dist(x, &[0.0; 3]) <= 1.0 + 1e-12));
        let lat = discretize(&SetSpec::unit_ball(4), 400, Scheme::Grid).unwrap();
        assert!(lat.nodes().all(|x| dist(x, &[0.0; 4]) <= 1.0));
    }

    #[test]
    fn unsupported_pairs() {
        assert!(matches!(
            discretize(&SetSpec::unit_sphere(3), 10, Scheme::Grid),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            discretize(&SetSpec::unit_ball(4), 10, Scheme::Boundary),
            Err(Error::Unsupported(_))
        ));
        let b = SetSpec::Box {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
        };
        assert!(matches!(
            discretize(&b, 10, Scheme::Boundary),
            Err(Error::Unsupported(_))
        ));
        assert!(discretize(&SetSpec::interval(0.0, 1.0), 1, Scheme::Grid).is_err());
    }

    #[test]
    fn scaling_is_exact_for_powers_of_two() {
        let specs = [
            (SetSpec::interval(-1.0, 3.0), Scheme::Grid),
            (SetSpec::interval(-1.0, 3.0), Scheme::Boundary),
            (
                SetSpec::Ball {
                    dim: 2,
                    center: vec![0.25, 1.0],
                    radius: 1.5,
                },
                Scheme::Grid,
            ),
            (SetSpec::unit_ball(3), Scheme::Grid),
            (SetSpec::unit_sphere(2), Scheme::Boundary),
            (SetSpec::unit_sphere(3), Scheme::Boundary),
        ];
        for (spec, scheme) in specs {
            let base = discretize(&spec, 200, scheme).unwrap();
            for s in [0.5, 2.0, 8.0] {
                let scaled = discretize(&spec.scaled(s), 200, scheme).unwrap();
                let want = base.scaled(s).unwrap();
                assert_eq!(scaled.coords(), want.coords());
                assert_eq!(scaled.cell_measures(), want.cell_measures());
            }
            let scaled = discretize(&spec.scaled(10.0), 200, scheme).unwrap();
            let want = base.scaled(10.0).unwrap();
            assert!(close(scaled.coords(), want.coords(), 1e-13));
            assert!(close(scaled.cell_measures(), want.cell_measures(), 1e-11));
        }
    }

    #[test]
    fn diameter_scales_exactly() {
        let c = discretize(&SetSpec::unit_ball(2), 100, Scheme::Grid).unwrap();
        let d = diameter(&c);
        assert_eq!(diameter(&c.scaled(4.0).unwrap()), 4.0 * d);
    }

    #[test]
    fn deterministic() {
        let spec = SetSpec::unit_ball(3);
        let a = discretize(&spec, 500, Scheme::Grid).unwrap();
        let b = discretize(&spec, 500, Scheme::Grid).unwrap();
        assert_eq!(a.coords(), b.coords());
        assert_eq!(a.cell_measures(), b.cell_measures());
    }

    #[test]
    fn union_deduplicates() {
        let spec = SetSpec::Union {
            parts: vec![SetSpec::interval(0.0, 1.0), SetSpec::interval(0.0, 1.0)],
        };
        let c = discretize(&spec, 20, Scheme::Grid).unwrap();
        assert_eq!(c.len(), 10);
        let spec = SetSpec::Union {
            parts: vec![SetSpec::interval(0.0, 1.0), SetSpec::interval(2.0, 4.0)],
        };
        let c = discretize(&spec, 30, Scheme::Grid).unwrap();
        assert_eq!(c.len(), 30);
    }

    #[test]
    fn json_schema() {
        let ball =
            SetSpec::from_json(r#"{"type":"ball","dim":3,"center":[0,0,0],"radius":1.0}"#).unwrap();
        assert_eq!(ball, SetSpec::unit_ball(3));
        let iv = SetSpec::from_json(r#"{"type":"interval","a":-1,"b":1}"#).unwrap();
        assert_eq!(iv, SetSpec::interval(-1.0, 1.0));
        let pts = SetSpec::from_json(r#"{"type":"points","coords":[[0,0],[1,0]]}"#).unwrap();
        assert_eq!(pts.ambient_dim(), 2);
        let bx = SetSpec::from_json(r#"{"type":"box","lo":[0,0],"hi":[1,1]}"#).unwrap();
        assert_eq!(bx.lebesgue_measure(), Some(1.0));
        let un = SetSpec::from_json(
            r#"{"type":"union","parts":[{"type":"interval","a":0,"b":1},{"type":"interval","a":2,"b":3}]}"#,
        )
        .unwrap();
        assert_eq!(un.ambient_dim(), 1);
        assert!(SetSpec::from_json(r#"{"type":"interval","a":1,"b":1}"#).is_err());
        assert!(SetSpec::from_json(r#"{"type":"ball","dim":2,"center":[0],"radius":1}"#).is_err());
        assert!(SetSpec::from_json(r#"{"type":"ball","dim":2,"radius":-1}"#).is_err());
        assert!(SetSpec::from_json(r#"{"type":"blob"}"#).is_err());
        let round = serde_json::to_string(&ball).unwrap();
        assert_eq!(SetSpec::from_json(&round).unwrap(), ball);
    }

    #[test]
    fn duplicate_nodes_rejected() {
        assert!(NodeCloud::from_points(&[vec![0.0, 1.0], vec![0.0, 1.0]]).is_err());
    }
}
