//! Dyadic cubes, digital sets and box counting.
//!
//! Everything lives in the ambient domain `[0,1)^d`. A [`DigitalSet`] is a
//! finite union of half-open dyadic cubes of one common depth `D`; it is the
//! finite-resolution stand-in for a compact set. Cubes are stored as Morton
//! codes (bits interleaved level by level, axis 0 most significant), so the
//! cubes below any coarser cube form one contiguous run of the sorted code
//! list. This caps `d * D` at 63.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fit::least_squares_slope;

pub const MAX_CODE_BITS: u32 = 63;

/// A point of the ambient space.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("point with no coordinates".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite coordinate in {coords:?}"
            )));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point(vec![x])
    }
}

/// Euclidean distance between two points of equal dimension.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() == 1 {
        return (a[0] - b[0]).abs();
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Half-open binary cube `prod_i [m_i 2^-k, (m_i + 1) 2^-k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    depth: u32,
    coords: Vec<u64>,
}

impl DyadicCube {
    pub fn new(depth: u32, coords: Vec<u64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidCube("cube with no coordinates".into()));
        }
        check_depth(coords.len(), depth)?;
        let limit = 1u64 << depth;
        if let Some(c) = coords.iter().find(|&&c| c >= limit) {
            return Err(Error::InvalidCube(format!(
                "coordinate {c} outside the depth-{depth} grid"
            )));
        }
        Ok(DyadicCube { depth, coords })
    }

    /// The unit cube `[0,1)^dim`.
    pub fn unit(dim: usize) -> Self {
        DyadicCube {
            depth: 0,
            coords: vec![0; dim],
        }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Side length `2^-depth`; this is the size `|B|` used by the net measures.
    pub fn side(&self) -> f64 {
        side(self.depth)
    }

    pub fn lower_corner(&self) -> Vec<f64> {
        let h = self.side();
        self.coords.iter().map(|&m| m as f64 * h).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        let h = self.side();
        self.coords.iter().map(|&m| (m as f64 + 0.5) * h).collect()
    }

    /// The unique ancestor of depth `j <= self.depth`.
    pub fn ancestor(&self, j: u32) -> DyadicCube {
        assert!(j <= self.depth, "ancestor depth {j} below cube depth {}", self.depth);
        let shift = self.depth - j;
        DyadicCube {
            depth: j,
            coords: self.coords.iter().map(|&m| m >> shift).collect(),
        }
    }

    /// Whether `other` is contained in `self`.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.dim() == self.dim() && other.depth >= self.depth && other.ancestor(self.depth) == *self
    }

    pub fn children(&self) -> Vec<DyadicCube> {
        let d = self.dim();
        (0..1u64 << d)
            .map(|child| DyadicCube {
                depth: self.depth + 1,
                coords: self
                    .coords
                    .iter()
                    .enumerate()
                    .map(|(axis, &m)| 2 * m + ((child >> (d - 1 - axis)) & 1))
                    .collect(),
            })
            .collect()
    }

    pub(crate) fn code(&self) -> u64 {
        interleave(&self.coords, self.depth)
    }

    pub(crate) fn from_code(code: u64, depth: u32, dim: usize) -> Self {
        DyadicCube {
            depth,
            coords: deinterleave(code, depth, dim),
        }
    }
}

pub(crate) fn side(depth: u32) -> f64 {
    0.5f64.powi(depth as i32)
}

fn check_depth(dim: usize, depth: u32) -> Result<()> {
    if dim as u64 * depth as u64 > MAX_CODE_BITS as u64 {
        Err(Error::DepthTooLargeForDim { depth, dim })
    } else {
        Ok(())
    }
}

pub(crate) fn interleave(coords: &[u64], depth: u32) -> u64 {
    let mut code = 0u64;
    for level in (0..depth).rev() {
        for &c in coords {
            code = (code << 1) | ((c >> level) & 1);
        }
    }
    code
}

pub(crate) fn deinterleave(code: u64, depth: u32, dim: usize) -> Vec<u64> {
    let mut coords = vec![0u64; dim];
    for level in 0..depth {
        for (axis, c) in coords.iter_mut().enumerate() {
            let bit = (code >> (level as usize * dim + (dim - 1 - axis))) & 1;
            *c |= bit << level;
        }
    }
    coords
}

/// Coordinate of one axis of a Morton code.
pub(crate) fn axis_coord(code: u64, axis: usize, depth: u32, dim: usize) -> u64 {
    let mut c = 0u64;
    for level in 0..depth {
        c |= ((code >> (level as usize * dim + (dim - 1 - axis))) & 1) << level;
    }
    c
}

/// Finite union of same-depth dyadic cubes in `[0,1)^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitalSet {
    dim: usize,
    depth: u32,
    codes: Vec<u64>,
}

impl DigitalSet {
    pub fn empty(dim: usize, depth: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        check_depth(dim, depth)?;
        Ok(DigitalSet {
            dim,
            depth,
            codes: Vec::new(),
        })
    }

    /// All `2^(d*depth)` cubes of the unit cube.
    pub fn full(dim: usize, depth: u32) -> Result<Self> {
        let mut set = Self::empty(dim, depth)?;
        let bits = dim as u32 * depth;
        if bits > 28 {
            return Err(Error::InvalidArgument(format!(
                "full set with 2^{bits} cubes is too large to materialise"
            )));
        }
        set.codes = (0..1u64 << bits).collect();
        Ok(set)
    }

    pub fn new(dim: usize, depth: u32, cubes: impl IntoIterator<Item = DyadicCube>) -> Result<Self> {
        let mut set = Self::empty(dim, depth)?;
        for cube in cubes {
            if cube.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: cube.dim(),
                });
            }
            if cube.depth != depth {
                return Err(Error::InvalidCube(format!(
                    "cube depth {} differs from set depth {depth}",
                    cube.depth
                )));
            }
            set.codes.push(cube.code());
        }
        set.codes.sort_unstable();
        set.codes.dedup();
        Ok(set)
    }

    pub(crate) fn from_sorted_codes(dim: usize, depth: u32, codes: Vec<u64>) -> Self {
        debug_assert!(codes.windows(2).all(|w| w[0] < w[1]));
        DigitalSet { dim, depth, codes }
    }

    pub(crate) fn from_codes(dim: usize, depth: u32, mut codes: Vec<u64>) -> Self {
        codes.sort_unstable();
        codes.dedup();
        DigitalSet { dim, depth, codes }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub(crate) fn codes(&self) -> &[u64] {
        &self.codes
    }

    pub fn cubes(&self) -> impl Iterator<Item = DyadicCube> + '_ {
        self.codes
            .iter()
            .map(move |&c| DyadicCube::from_code(c, self.depth, self.dim))
    }

    /// Cube centers, in storage order.
    pub fn centers(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.cubes().map(|c| c.center())
    }

    pub fn contains_cube(&self, cube: &DyadicCube) -> bool {
        cube.depth == self.depth && cube.dim() == self.dim && self.codes.binary_search(&cube.code()).is_ok()
    }

    /// Whether the point lies in the union of the cubes.
    pub fn contains_point(&self, x: &[f64]) -> bool {
        match cell_coords(x, self.depth) {
            Some(coords) if coords.len() == self.dim => self
                .codes
                .binary_search(&interleave(&coords, self.depth))
                .is_ok(),
            _ => false,
        }
    }

    fn check_compatible(&self, other: &DigitalSet) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.depth != other.depth {
            return Err(Error::InvalidArgument(format!(
                "sets have different depths {} and {}",
                self.depth, other.depth
            )));
        }
        Ok(())
    }

    pub fn is_subset(&self, other: &DigitalSet) -> bool {
        self.dim == other.dim
            && self.depth == other.depth
            && self.codes.iter().all(|c| other.codes.binary_search(c).is_ok())
    }

    pub fn union(&self, other: &DigitalSet) -> Result<DigitalSet> {
        self.check_compatible(other)?;
        let mut codes = self.codes.clone();
        codes.extend_from_slice(&other.codes);
        Ok(Self::from_codes(self.dim, self.depth, codes))
    }

    pub fn intersection(&self, other: &DigitalSet) -> Result<DigitalSet> {
        self.check_compatible(other)?;
        let codes = self
            .codes
            .iter()
            .copied()
            .filter(|c| other.codes.binary_search(c).is_ok())
            .collect();
        Ok(Self::from_sorted_codes(self.dim, self.depth, codes))
    }

    /// Index range of the cubes lying inside a coarser cube.
    pub(crate) fn range_within(&self, cube: &DyadicCube) -> std::ops::Range<usize> {
        debug_assert!(cube.depth <= self.depth);
        let shift = self.dim as u32 * (self.depth - cube.depth);
        let lo = cube.code() << shift;
        let hi = lo + (1u64 << shift);
        let a = self.codes.partition_point(|&c| c < lo);
        let b = self.codes.partition_point(|&c| c < hi);
        a..b
    }

    /// `self ∩ cube` for a cube of depth at most `self.depth`.
    pub fn restrict_to(&self, cube: &DyadicCube) -> Result<DigitalSet> {
        if cube.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: cube.dim(),
            });
        }
        if cube.depth > self.depth {
            return Err(Error::ResolutionExceeded {
                requested: cube.depth,
                available: self.depth,
            });
        }
        let range = self.range_within(cube);
        Ok(Self::from_sorted_codes(
            self.dim,
            self.depth,
            self.codes[range].to_vec(),
        ))
    }

    /// The depth-`j` cubes meeting the set.
    pub fn coarsen(&self, j: u32) -> Result<DigitalSet> {
        if j > self.depth {
            return Err(Error::ResolutionExceeded {
                requested: j,
                available: self.depth,
            });
        }
        let shift = self.dim as u32 * (self.depth - j);
        let mut codes: Vec<u64> = self.codes.iter().map(|c| c >> shift).collect();
        codes.dedup();
        Ok(Self::from_sorted_codes(self.dim, j, codes))
    }

    /// The same set represented at a finer depth.
    pub fn refine(&self, depth: u32) -> Result<DigitalSet> {
        if depth < self.depth {
            return Err(Error::InvalidArgument(format!(
                "cannot refine depth {} to {depth}",
                self.depth
            )));
        }
        check_depth(self.dim, depth)?;
        let shift = self.dim as u32 * (depth - self.depth);
        let per = 1u64 << shift;
        let codes = self
            .codes
            .iter()
            .flat_map(|&c| (0..per).map(move |k| (c << shift) | k))
            .collect();
        Ok(Self::from_sorted_codes(self.dim, depth, codes))
    }

    /// Cartesian product, with the coordinates of `self` first.
    pub fn product(&self, other: &DigitalSet) -> Result<DigitalSet> {
        if self.depth != other.depth {
            return Err(Error::InvalidArgument(
                "product factors must share a depth".into(),
            ));
        }
        let dim = self.dim + other.dim;
        check_depth(dim, self.depth)?;
        let left: Vec<Vec<u64>> = self.cubes().map(|c| c.coords).collect();
        let right: Vec<Vec<u64>> = other.cubes().map(|c| c.coords).collect();
        let mut codes = Vec::with_capacity(left.len() * right.len());
        let mut buf = Vec::with_capacity(dim);
        for a in &left {
            for b in &right {
                buf.clear();
                buf.extend_from_slice(a);
                buf.extend_from_slice(b);
                codes.push(interleave(&buf, self.depth));
            }
        }
        Ok(Self::from_codes(dim, self.depth, codes))
    }

    /// Number of depth-`j` cubes meeting the set.
    pub fn count_at(&self, j: u32) -> usize {
        count_distinct_prefixes(&self.codes, self.dim as u32 * (self.depth - j))
    }

    /// Text form: a `dim=<d> depth=<D>` header, then one `depth m_1 ... m_d`
    /// line per cube in lexicographic coordinate order.
    pub fn to_text(&self) -> String {
        let mut out = format!("dim={} depth={}\n", self.dim, self.depth);
        write_cube_lines(&mut out, self.cubes().collect());
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (dim, depth, cubes, _) = parse_cube_text(text)?;
        if let Some(c) = cubes.iter().find(|c| c.depth != depth) {
            return Err(Error::InvalidCube(format!(
                "cube at depth {} in a depth-{depth} set",
                c.depth
            )));
        }
        DigitalSet::new(dim, depth, cubes)
    }
}

pub(crate) fn write_cube_lines(out: &mut String, mut cubes: Vec<DyadicCube>) {
    cubes.sort_by(|a, b| (a.depth, &a.coords).cmp(&(b.depth, &b.coords)));
    for cube in cubes {
        let _ = write!(out, "{}", cube.depth);
        for m in &cube.coords {
            let _ = write!(out, " {m}");
        }
        out.push('\n');
    }
}

/// Header dimension and depth, cubes, and `key=value` trailers.
pub(crate) type CubeText = (usize, u32, Vec<DyadicCube>, Vec<(String, String)>);

/// Parses the shared cube-list format. Returns the header dimension and
/// depth, the cubes, and any `key=value` trailer lines.
pub(crate) fn parse_cube_text(text: &str) -> Result<CubeText> {
    let mut header: Option<(usize, u32)> = None;
    let mut cubes = Vec::new();
    let mut trailers = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((dim, _)) = header else {
            let mut dim = None;
            let mut depth = None;
            for field in line.split_whitespace() {
                match field.split_once('=') {
                    Some(("dim", v)) => dim = v.parse::<usize>().ok(),
                    Some(("depth", v)) => depth = v.parse::<u32>().ok(),
                    _ => return Err(Error::parse(line_no, format!("bad header field `{field}`"))),
                }
            }
            match (dim, depth) {
                (Some(d), Some(k)) if d > 0 => {
                    check_depth(d, k)?;
                    header = Some((d, k));
                }
                _ => return Err(Error::parse(line_no, "header must be `dim=<d> depth=<D>`")),
            }
            continue;
        };
        if let Some((k, v)) = line.split_once('=') {
            trailers.push((k.trim().to_string(), v.trim().to_string()));
            continue;
        }
        let nums: std::result::Result<Vec<u64>, _> =
            line.split_whitespace().map(str::parse::<u64>).collect();
        let nums = nums.map_err(|e| Error::parse(line_no, e.to_string()))?;
        if nums.len() != dim + 1 {
            return Err(Error::parse(
                line_no,
                format!("expected {} fields, found {}", dim + 1, nums.len()),
            ));
        }
        let depth = u32::try_from(nums[0]).map_err(|e| Error::parse(line_no, e.to_string()))?;
        cubes.push(
            DyadicCube::new(depth, nums[1..].to_vec())
                .map_err(|e| Error::parse(line_no, e.to_string()))?,
        );
    }
    let (dim, depth) = header.ok_or_else(|| Error::parse(0, "missing header"))?;
    Ok((dim, depth, cubes, trailers))
}

fn count_distinct_prefixes(codes: &[u64], shift: u32) -> usize {
    let mut count = 0;
    let mut last = None;
    for &c in codes {
        let p = c >> shift;
        if last != Some(p) {
            count += 1;
            last = Some(p);
        }
    }
    count
}

fn cell_coords(x: &[f64], depth: u32) -> Option<Vec<u64>> {
    let scale = (1u64 << depth) as f64;
    x.iter()
        .map(|&c| {
            if (0.0..1.0).contains(&c) {
                Some(((c * scale).floor() as u64).min((1u64 << depth) - 1))
            } else {
                None
            }
        })
        .collect()
}

/// The set of depth-`depth` cubes containing at least one of the points.
pub fn rasterize_points(points: &[Point], depth: u32) -> Result<DigitalSet> {
    let first = points.first().ok_or(Error::EmptyPointList)?;
    let dim = first.dim();
    check_depth(dim, depth)?;
    let mut codes = Vec::with_capacity(points.len());
    for p in points {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        let coords = cell_coords(p, depth).ok_or_else(|| Error::OutsideAmbient(p.to_vec()))?;
        codes.push(interleave(&coords, depth));
    }
    Ok(DigitalSet::from_codes(dim, depth, codes))
}

/// Distance from a point to the closure of a cube given by its lower corner
/// and side.
fn distance_to_cube(x: &[f64], lower: &[f64], side: f64) -> f64 {
    let sq: f64 = x
        .iter()
        .zip(lower)
        .map(|(&c, &a)| {
            let gap = if c < a {
                a - c
            } else if c > a + side {
                c - a - side
            } else {
                0.0
            };
            gap * gap
        })
        .sum();
    sq.sqrt()
}

/// Outer approximation of `E(γ) = {x : dist(x, E) < γ}` at the resolution of
/// `e`: every grid cube whose center is within `γ + √d·2^(-D-1)` of some cube
/// of `e`.
pub fn enlargement(e: &DigitalSet, gamma: f64) -> Result<DigitalSet> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let d = e.dim;
    let h = side(e.depth);
    let half_diag = (d as f64).sqrt() * h / 2.0;
    let reach = gamma + half_diag;
    let radius = (reach / h).ceil() as i64 + 1;
    let grid = 1i64 << e.depth;
    let mut found: HashSet<u64> = HashSet::with_capacity(e.len() * 3);
    let mut offset = vec![0i64; d];
    let mut coords = vec![0u64; d];
    let mut center = vec![0.0; d];
    for cube in e.cubes() {
        let lower = cube.lower_corner();
        offset.iter_mut().for_each(|o| *o = -radius);
        'scan: loop {
            let mut inside = true;
            for axis in 0..d {
                let c = cube.coords[axis] as i64 + offset[axis];
                if c < 0 || c >= grid {
                    inside = false;
                    break;
                }
                coords[axis] = c as u64;
                center[axis] = (c as f64 + 0.5) * h;
            }
            if inside && distance_to_cube(&center, &lower, h) <= reach {
                found.insert(interleave(&coords, e.depth));
            }
            // odometer over the offset box
            for axis in (0..d).rev() {
                offset[axis] += 1;
                if offset[axis] <= radius {
                    continue 'scan;
                }
                offset[axis] = -radius;
            }
            break;
        }
    }
    Ok(DigitalSet::from_codes(d, e.depth, found.into_iter().collect()))
}

/// `N_j` for `j = 0..=j_max`: the number of depth-`j` cubes meeting `e`.
pub fn box_counts(e: &DigitalSet, j_max: u32) -> Result<Vec<(u32, usize)>> {
    if j_max > e.depth {
        return Err(Error::ResolutionExceeded {
            requested: j_max,
            available: e.depth,
        });
    }
    Ok((0..=j_max).map(|j| (j, e.count_at(j))).collect())
}

/// Box-dimension estimate over a window of depths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxDimEstimate {
    /// Least-squares slope of `log2 N_j` against `j`.
    pub slope: f64,
    /// `max log2(N_j)/j` over the window (`j >= 1`), a limsup proxy.
    pub limsup: f64,
}

fn check_window(depth: u32, j_lo: u32, j_hi: u32) -> Result<()> {
    if j_hi > depth {
        return Err(Error::ResolutionExceeded {
            requested: j_hi,
            available: depth,
        });
    }
    if j_lo >= j_hi {
        return Err(Error::WindowTooSmall { lo: j_lo, hi: j_hi });
    }
    Ok(())
}

fn estimate_from_codes(codes: &[u64], dim: u32, depth: u32, j_lo: u32, j_hi: u32) -> BoxDimEstimate {
    if codes.is_empty() {
        return BoxDimEstimate {
            slope: f64::NEG_INFINITY,
            limsup: f64::NEG_INFINITY,
        };
    }
    let js: Vec<f64> = (j_lo..=j_hi).map(f64::from).collect();
    let logs: Vec<f64> = (j_lo..=j_hi)
        .map(|j| (count_distinct_prefixes(codes, dim * (depth - j)) as f64).log2())
        .collect();
    let slope = least_squares_slope(&js, &logs).unwrap_or(0.0);
    let limsup = js
        .iter()
        .zip(&logs)
        .filter(|(j, _)| **j >= 1.0)
        .map(|(j, l)| l / j)
        .fold(f64::NEG_INFINITY, f64::max);
    BoxDimEstimate { slope, limsup }
}

/// Upper box dimension estimate of `e` over depths `j_lo..=j_hi`.
///
/// An empty set yields `-inf` in both fields.
pub fn upper_box_dim_estimate(e: &DigitalSet, j_lo: u32, j_hi: u32) -> Result<BoxDimEstimate> {
    check_window(e.depth, j_lo, j_hi)?;
    Ok(estimate_from_codes(&e.codes, e.dim as u32, e.depth, j_lo, j_hi))
}

/// Local upper box dimension estimate: the minimum, over all depth
/// `probe_depth` cubes `C` meeting `k`, of the box-dimension slope of
/// `k ∩ C` on the (absolute) window `j_lo..=j_hi`.
pub fn local_upper_box_dim_estimate(k: &DigitalSet, probe_depth: u32, j_lo: u32, j_hi: u32) -> Result<f64> {
    check_window(k.depth, j_lo, j_hi)?;
    if probe_depth >= k.depth {
        return Err(Error::ResolutionExceeded {
            requested: probe_depth,
            available: k.depth,
        });
    }
    let probes = k.coarsen(probe_depth)?;
    let mut best = f64::INFINITY;
    for cube in probes.cubes() {
        let range = k.range_within(&cube);
        let est = estimate_from_codes(&k.codes[range], k.dim as u32, k.depth, j_lo, j_hi);
        best = best.min(est.slope);
    }
    Ok(best)
}

/// Dyadic Cantor set keeping the first and third quarters at every level
/// (similarity dimension 1/2). `depth` must be even.
pub fn dyadic_cantor_set(depth: u32) -> Result<DigitalSet> {
    if !depth.is_multiple_of(2) {
        return Err(Error::InvalidArgument("dyadic Cantor set needs an even depth".into()));
    }
    check_depth(1, depth)?;
    let mut codes = vec![0u64];
    for _ in 0..depth / 2 {
        codes = codes.iter().flat_map(|&c| [4 * c, 4 * c + 2]).collect();
    }
    Ok(DigitalSet::from_sorted_codes(1, depth, codes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(lo: u64, hi: u64, depth: u32) -> DigitalSet {
        DigitalSet::new(1, depth, (lo..hi).map(|m| DyadicCube::new(depth, vec![m]).unwrap())).unwrap()
    }

    #[test]
    fn morton_roundtrip() {
        let coords = vec![5u64, 3, 6];
        let code = interleave(&coords, 3);
        assert_eq!(deinterleave(code, 3, 3), coords);
        for (axis, &c) in coords.iter().enumerate() {
            assert_eq!(axis_coord(code, axis, 3, 3), c);
        }
    }

    #[test]
    fn morton_children_are_contiguous() {
        let cube = DyadicCube::new(2, vec![1, 2]).unwrap();
        let mut codes: Vec<u64> = cube.children().iter().map(|c| c.code()).collect();
        codes.sort();
        assert_eq!(codes, (cube.code() * 4..cube.code() * 4 + 4).collect::<Vec<_>>());
    }

    #[test]
    fn cube_nesting() {
        let c = DyadicCube::new(5, vec![19]).unwrap();
        for j in 0..5 {
            let a = c.ancestor(j);
            assert!(a.contains(&c));
            assert_eq!(a.coords()[0], 19 >> (5 - j));
        }
        assert!(!DyadicCube::new(1, vec![0]).unwrap().contains(&c));
    }

    #[test]
    fn rasterize_examples() {
        let s = rasterize_points(&[Point::from(0.0)], 2).unwrap();
        assert_eq!(s.cubes().collect::<Vec<_>>(), vec![DyadicCube::new(2, vec![0]).unwrap()]);

        let s = rasterize_points(&[Point::from(0.0), Point::from(0.26)], 2).unwrap();
        assert_eq!(s, interval(0, 2, 2));

        let s = rasterize_points(&[Point::new(vec![0.9, 0.9]).unwrap()], 1).unwrap();
        assert_eq!(s.cubes().next().unwrap().coords(), &[1, 1]);
    }

    #[test]
    fn rasterize_errors() {
        assert_eq!(rasterize_points(&[], 3), Err(Error::EmptyPointList));
        assert!(matches!(
            rasterize_points(&[Point::from(1.0)], 3),
            Err(Error::OutsideAmbient(_))
        ));
        assert!(matches!(
            rasterize_points(&[Point::from(-0.1)], 3),
            Err(Error::OutsideAmbient(_))
        ));
    }

    #[test]
    fn enlargement_of_single_cube() {
        let e = interval(0, 1, 2);
        let big = enlargement(&e, 0.3).unwrap();
        // cubes meeting [0, 0.55)
        assert_eq!(big, interval(0, 3, 2));
    }

    #[test]
    fn enlargement_small_gamma_adds_touching_neighbors() {
        let e = interval(5, 6, 4);
        assert_eq!(enlargement(&e, 1e-9).unwrap(), interval(4, 7, 4));
        let sq = DigitalSet::new(2, 3, [DyadicCube::new(3, vec![3, 3]).unwrap()]).unwrap();
        assert_eq!(enlargement(&sq, 1e-9).unwrap().len(), 9);
    }

    #[test]
    fn enlargement_of_full_set_is_idempotent() {
        let full = DigitalSet::full(2, 3).unwrap();
        assert_eq!(enlargement(&full, 0.7).unwrap(), full);
    }

    #[test]
    fn box_counts_examples() {
        let unit = DigitalSet::full(1, 8).unwrap();
        for (j, n) in box_counts(&unit, 8).unwrap() {
            assert_eq!(n, 1 << j);
        }
        let cantor = dyadic_cantor_set(8).unwrap();
        let counts = box_counts(&cantor, 8).unwrap();
        for j in 0..=4 {
            assert_eq!(counts[2 * j].1, 1 << j);
        }
        let point = rasterize_points(&[Point::from(0.3)], 8).unwrap();
        assert!(box_counts(&point, 8).unwrap().iter().all(|&(_, n)| n == 1));
        assert!(matches!(box_counts(&point, 9), Err(Error::ResolutionExceeded { .. })));
    }

    #[test]
    fn box_dimension_examples() {
        let unit = DigitalSet::full(1, 12).unwrap();
        let est = upper_box_dim_estimate(&unit, 4, 12).unwrap();
        assert!((est.slope - 1.0).abs() < 1e-9);
        assert!((est.limsup - 1.0).abs() < 1e-9);

        let cantor = dyadic_cantor_set(16).unwrap();
        let est = upper_box_dim_estimate(&cantor, 4, 16).unwrap();
        assert!((est.slope - 0.5).abs() < 0.01, "{est:?}");

        let point = rasterize_points(&[Point::from(0.7)], 10).unwrap();
        assert_eq!(upper_box_dim_estimate(&point, 2, 10).unwrap().slope, 0.0);

        assert_eq!(
            upper_box_dim_estimate(&unit, 5, 5),
            Err(Error::WindowTooSmall { lo: 5, hi: 5 })
        );
    }

    #[test]
    fn local_box_dimension_examples() {
        let unit = DigitalSet::full(1, 12).unwrap();
        let v = local_upper_box_dim_estimate(&unit, 2, 4, 12).unwrap();
        assert!((v - 1.0).abs() < 1e-9);

        let cantor = dyadic_cantor_set(16).unwrap();
        let v = local_upper_box_dim_estimate(&cantor, 2, 4, 16).unwrap();
        assert!((v - 0.5).abs() < 0.02, "{v}");

        // half interval plus an isolated cube: the isolated cell has N_j = 1
        let depth = 12;
        let mut cubes: Vec<_> = (0..1u64 << (depth - 1))
            .map(|m| DyadicCube::new(depth, vec![m]).unwrap())
            .collect();
        cubes.push(DyadicCube::new(depth, vec![(1 << depth) - 10]).unwrap());
        let k = DigitalSet::new(1, depth, cubes).unwrap();
        let v = local_upper_box_dim_estimate(&k, 3, 4, 12).unwrap();
        assert_eq!(v, 0.0);
        assert!(v <= upper_box_dim_estimate(&k, 4, 12).unwrap().slope);
    }

    #[test]
    fn text_format_roundtrip_and_order() {
        let s = DigitalSet::new(
            2,
            2,
            [
                DyadicCube::new(2, vec![3, 0]).unwrap(),
                DyadicCube::new(2, vec![0, 2]).unwrap(),
                DyadicCube::new(2, vec![0, 1]).unwrap(),
            ],
        )
        .unwrap();
        let text = s.to_text();
        assert_eq!(text, "dim=2 depth=2\n2 0 1\n2 0 2\n2 3 0\n");
        assert_eq!(DigitalSet::from_text(&text).unwrap(), s);
    }

    #[test]
    fn text_format_errors() {
        assert!(DigitalSet::from_text("dim=1 depth=2\n2 7\n").is_err());
        assert!(DigitalSet::from_text("dim=1 depth=2\n3 1\n").is_err());
        assert!(DigitalSet::from_text("2 1\n").is_err());
        assert!(DigitalSet::from_text("dim=1 depth=2\n2 1 1\n").is_err());
    }

    #[test]
    fn set_algebra() {
        let a = interval(0, 4, 3);
        let b = interval(2, 6, 3);
        assert_eq!(a.union(&b).unwrap(), interval(0, 6, 3));
        assert_eq!(a.intersection(&b).unwrap(), interval(2, 4, 3));
        assert!(interval(1, 3, 3).is_subset(&a));
        assert_eq!(a.coarsen(1).unwrap(), interval(0, 1, 1));
        assert_eq!(interval(1, 2, 2).refine(3).unwrap(), interval(2, 4, 3));
        let half = DyadicCube::new(1, vec![0]).unwrap();
        assert_eq!(b.restrict_to(&half).unwrap(), interval(2, 4, 3));
        assert!(a.contains_point(&[0.49]));
        assert!(!a.contains_point(&[0.5]));
    }
}
