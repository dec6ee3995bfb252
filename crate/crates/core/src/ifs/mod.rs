//! Self-similar iterated function systems on `[0,1)^d`.

pub mod coding;
pub mod entropy;

pub use coding::{bernoulli_cylinder_mass, digit_frequency, sample_frequency_codes, Code};
pub use entropy::{
    entropy_dim, f_of_lambda, f_of_lambda_argmax, f_of_lambda_checked, g_of_alpha, grid_max, similarity_dimension,
    CheckedF, ProbVector,
};

use crate::error::{Error, Result};
use crate::geometry::{interleave, DigitalSet, MAX_CODE_BITS};

/// Leaves the rasteriser may visit before giving up.
pub const EXPANSION_BUDGET: usize = 1 << 22;

const ORTHOGONALITY_TOLERANCE: f64 = 1e-9;
const AMBIENT_SLACK: f64 = 1e-12;

/// `x ↦ ratio · R x + t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Similarity {
    pub ratio: f64,
    /// Row-major `d × d` orthogonal matrix; `None` is the identity.
    pub rotation: Option<Vec<f64>>,
    pub translation: Vec<f64>,
}

impl Similarity {
    pub fn homothety(ratio: f64, translation: Vec<f64>) -> Self {
        Similarity {
            ratio,
            rotation: None,
            translation,
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let rx = rotate(self.rotation.as_deref(), x);
        rx.iter().zip(&self.translation).map(|(v, t)| self.ratio * v + t).collect()
    }
}

fn rotate(rotation: Option<&[f64]>, x: &[f64]) -> Vec<f64> {
    match rotation {
        None => x.to_vec(),
        Some(r) => {
            let d = x.len();
            (0..d).map(|i| (0..d).map(|j| r[i * d + j] * x[j]).sum()).collect()
        }
    }
}

fn matmul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                out[i * d + j] += a[i * d + k] * b[k * d + j];
            }
        }
    }
    out
}

fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

/// Corners of `[0,1]^d`.
fn unit_corners(d: usize) -> impl Iterator<Item = Vec<f64>> {
    (0..1usize << d).map(move |mask| (0..d).map(|i| ((mask >> i) & 1) as f64).collect())
}

/// A system of at least two contracting similarities.
#[derive(Clone, Debug, PartialEq)]
pub struct IFSystem {
    dim: usize,
    maps: Vec<Similarity>,
    osc_declared: bool,
}

impl IFSystem {
    pub fn new(maps: Vec<Similarity>, osc_declared: bool) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::InvalidSystem(format!("need at least two maps, got {}", maps.len())));
        }
        let dim = maps[0].dim();
        if dim == 0 {
            return Err(Error::InvalidSystem("zero-dimensional translation".into()));
        }
        for (i, s) in maps.iter().enumerate() {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            if !(s.ratio > 0.0 && s.ratio < 1.0) {
                return Err(Error::InvalidSystem(format!("map {} has ratio {} outside (0,1)", i + 1, s.ratio)));
            }
            if let Some(r) = &s.rotation {
                if r.len() != dim * dim {
                    return Err(Error::InvalidSystem(format!("map {} rotation has {} entries", i + 1, r.len())));
                }
                let mut rt = vec![0.0; dim * dim];
                for a in 0..dim {
                    for b in 0..dim {
                        rt[a * dim + b] = r[b * dim + a];
                    }
                }
                let prod = matmul(r, &rt, dim);
                let id = identity(dim);
                if prod.iter().zip(&id).any(|(x, y)| (x - y).abs() > ORTHOGONALITY_TOLERANCE) {
                    return Err(Error::InvalidSystem(format!("map {} rotation is not orthogonal", i + 1)));
                }
            }
            for corner in unit_corners(dim) {
                if s.apply(&corner).iter().any(|&c| !(-AMBIENT_SLACK..=1.0 + AMBIENT_SLACK).contains(&c)) {
                    return Err(Error::InvalidSystem(format!("map {} sends the unit cube outside [0,1]^{dim}", i + 1)));
                }
            }
        }
        let sys = IFSystem {
            dim,
            maps,
            osc_declared,
        };
        if osc_declared && sys.is_homothety_system() && !sys.open_images_disjoint() {
            return Err(Error::InvalidSystem("open set condition declared but open cube images overlap".into()));
        }
        Ok(sys)
    }

    /// Homotheties `x ↦ r x + t_i` from ratios and translations.
    pub fn homotheties(ratios: &[f64], translations: &[Vec<f64>], osc_declared: bool) -> Result<Self> {
        if ratios.len() != translations.len() {
            return Err(Error::InvalidSystem("ratio and translation counts differ".into()));
        }
        Self::new(
            ratios
                .iter()
                .zip(translations)
                .map(|(&r, t)| Similarity::homothety(r, t.clone()))
                .collect(),
            osc_declared,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn maps(&self) -> &[Similarity] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn osc_declared(&self) -> bool {
        self.osc_declared
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(|s| s.ratio).collect()
    }

    pub fn similarity_dimension(&self) -> f64 {
        similarity_dimension(&self.ratios()).expect("ratios validated on construction")
    }

    fn is_homothety_system(&self) -> bool {
        self.maps.iter().all(|s| s.rotation.is_none())
    }

    fn open_images_disjoint(&self) -> bool {
        let boxes: Vec<(Vec<f64>, f64)> = self.maps.iter().map(|s| (s.translation.clone(), s.ratio)).collect();
        for a in 0..boxes.len() {
            for b in a + 1..boxes.len() {
                let (ta, ra) = &boxes[a];
                let (tb, rb) = &boxes[b];
                let overlap = (0..self.dim).all(|i| ta[i] < tb[i] + rb && tb[i] < ta[i] + ra);
                if overlap {
                    return false;
                }
            }
        }
        true
    }

    /// Text form: header `m=<count> dim=<d> [osc=true|false]`, then one map
    /// per line `ratio t_1 ... t_d [rotation entries row-major]`.
    pub fn to_text(&self) -> String {
        let mut out = format!("m={} dim={} osc={}\n", self.maps.len(), self.dim, self.osc_declared);
        for s in &self.maps {
            let mut fields = vec![s.ratio.to_string()];
            fields.extend(s.translation.iter().map(f64::to_string));
            if let Some(r) = &s.rotation {
                fields.extend(r.iter().map(f64::to_string));
            }
            out.push_str(&fields.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize, bool)> = None;
        let mut maps = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((m, dim, _)) = header else {
                let (mut m, mut dim, mut osc) = (None, None, false);
                for field in line.split_whitespace() {
                    match field.split_once('=') {
                        Some(("m", v)) => m = v.parse().ok(),
                        Some(("dim", v)) => dim = v.parse().ok(),
                        Some(("osc", v)) => {
                            osc = v.parse().map_err(|_| Error::parse(line_no, format!("bad osc flag `{v}`")))?
                        }
                        _ => return Err(Error::parse(line_no, format!("bad header field `{field}`"))),
                    }
                }
                match (m, dim) {
                    (Some(m), Some(d)) if d > 0 => header = Some((m, d, osc)),
                    _ => return Err(Error::parse(line_no, "header must be `m=<count> dim=<d>`")),
                }
                continue;
            };
            let nums: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
            let nums = nums.map_err(|e| Error::parse(line_no, e.to_string()))?;
            let rotation = if nums.len() == 1 + dim {
                None
            } else if nums.len() == 1 + dim + dim * dim {
                Some(nums[1 + dim..].to_vec())
            } else {
                return Err(Error::parse(line_no, format!("expected {} or {} fields", 1 + dim, 1 + dim + dim * dim)));
            };
            maps.push(Similarity {
                ratio: nums[0],
                rotation,
                translation: nums[1..1 + dim].to_vec(),
            });
            if maps.len() > m {
                return Err(Error::parse(line_no, format!("more than m={m} maps")));
            }
        }
        let (m, _, osc) = header.ok_or_else(|| Error::parse(0, "missing header"))?;
        if maps.len() != m {
            return Err(Error::parse(0, format!("header announces {m} maps, found {}", maps.len())));
        }
        IFSystem::new(maps, osc)
    }
}

/// Composite map `x ↦ a · M x + b`.
#[derive(Clone, Debug)]
struct Affine {
    scale: f64,
    matrix: Option<Vec<f64>>,
    offset: Vec<f64>,
}

impl Affine {
    fn identity(d: usize) -> Self {
        Affine {
            scale: 1.0,
            matrix: None,
            offset: vec![0.0; d],
        }
    }

    /// `self ∘ s`.
    fn then_inner(&self, s: &Similarity) -> Self {
        let d = self.offset.len();
        let mt = rotate(self.matrix.as_deref(), &s.translation);
        let offset = mt.iter().zip(&self.offset).map(|(v, b)| self.scale * v + b).collect();
        let matrix = match (&self.matrix, &s.rotation) {
            (None, None) => None,
            (Some(m), None) => Some(m.clone()),
            (None, Some(r)) => Some(r.clone()),
            (Some(m), Some(r)) => Some(matmul(m, r, d)),
        };
        Affine {
            scale: self.scale * s.ratio,
            matrix,
            offset,
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        rotate(self.matrix.as_deref(), x)
            .iter()
            .zip(&self.offset)
            .map(|(v, b)| self.scale * v + b)
            .collect()
    }

    /// Axis-aligned bounding box of the image of `[0,1]^d`.
    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.offset.len();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for corner in unit_corners(d) {
            for (i, v) in self.apply(&corner).into_iter().enumerate() {
                lo[i] = lo[i].min(v);
                hi[i] = hi[i].max(v);
            }
        }
        (lo, hi)
    }
}

/// Image point and size bound of a cylinder.
#[derive(Clone, Debug, PartialEq)]
pub struct CodePoint {
    /// `S_{i_1} ∘ ... ∘ S_{i_n}` applied to the center of the unit cube.
    pub point: Vec<f64>,
    /// `Π r_{i_j} · √d`, a diameter bound for the cylinder `K_{i_1...i_n}`.
    pub diameter_bound: f64,
}

pub fn code_point(ifs: &IFSystem, code: &Code) -> Result<CodePoint> {
    let m = ifs.len();
    let mut map = Affine::identity(ifs.dim());
    for &d in code.digits() {
        if d == 0 || d > m {
            return Err(Error::InvalidCode(format!("digit {d} outside 1..={m}")));
        }
        map = map.then_inner(&ifs.maps[d - 1]);
    }
    let center = vec![0.5; ifs.dim()];
    Ok(CodePoint {
        point: map.apply(&center),
        diameter_bound: map.scale * (ifs.dim() as f64).sqrt(),
    })
}

/// Outer digital approximation of the attractor at `depth`.
///
/// Codes are expanded until the cylinder scale `Π r_{i_j}` drops to
/// `2^-depth`; every grid cube meeting the closed bounding box of a cylinder
/// image of `[0,1]^d` is marked.
pub fn ifs_digital_set(ifs: &IFSystem, depth: u32) -> Result<DigitalSet> {
    let d = ifs.dim();
    if d as u64 * depth as u64 > MAX_CODE_BITS as u64 {
        return Err(Error::DepthTooLargeForDim { depth, dim: d });
    }
    let h = crate::geometry::side(depth);
    let grid = 1u64 << depth;
    let mut codes = Vec::new();
    let mut leaves = 0usize;
    let mut stack = vec![Affine::identity(d)];
    while let Some(map) = stack.pop() {
        if map.scale > h {
            for s in ifs.maps.iter().rev() {
                stack.push(map.then_inner(s));
            }
            continue;
        }
        leaves += 1;
        if leaves > EXPANSION_BUDGET {
            return Err(Error::ExpansionBudget(format!(
                "more than {EXPANSION_BUDGET} cylinders needed for depth {depth}"
            )));
        }
        let (lo, hi) = map.bounding_box();
        let ranges: Vec<(u64, u64)> = (0..d)
            .map(|i| {
                let a = ((lo[i].max(0.0) / h).floor() as u64).min(grid - 1);
                let b = ((hi[i].max(0.0) / h).floor() as u64).min(grid - 1);
                (a, b)
            })
            .collect();
        let mut coords: Vec<u64> = ranges.iter().map(|r| r.0).collect();
        'cells: loop {
            codes.push(interleave(&coords, depth));
            for i in (0..d).rev() {
                if coords[i] < ranges[i].1 {
                    coords[i] += 1;
                    continue 'cells;
                }
                coords[i] = ranges[i].0;
            }
            break;
        }
    }
    codes.sort_unstable();
    codes.dedup();
    Ok(DigitalSet::from_sorted_codes(d, depth, codes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{box_counts, upper_box_dim_estimate};

    fn binary() -> IFSystem {
        IFSystem::homotheties(&[0.5, 0.5], &[vec![0.0], vec![0.5]], true).unwrap()
    }

    fn cantor() -> IFSystem {
        IFSystem::homotheties(&[1.0 / 3.0, 1.0 / 3.0], &[vec![0.0], vec![2.0 / 3.0]], true).unwrap()
    }

    #[test]
    fn code_point_examples() {
        let n = 20;
        let cp = code_point(&binary(), &Code::new(vec![1; n], 2).unwrap()).unwrap();
        assert!(cp.point[0] < 2f64.powi(-(n as i32)));
        assert_eq!(cp.diameter_bound, 2f64.powi(-(n as i32)));

        let mut digits = vec![2];
        digits.extend(vec![1; n - 1]);
        let cp = code_point(&binary(), &Code::new(digits, 2).unwrap()).unwrap();
        assert!(cp.point[0] >= 0.5 && cp.point[0] <= 0.5 + 2f64.powi(-(n as i32)));

        let cp = code_point(&cantor(), &Code::new(vec![2, 2], 2).unwrap()).unwrap();
        assert!(cp.point[0] >= 8.0 / 9.0 && cp.point[0] <= 1.0);
    }

    #[test]
    fn rasterisation_examples() {
        let full = ifs_digital_set(&binary(), 6).unwrap();
        assert_eq!(full, DigitalSet::full(1, 6).unwrap());

        // exact counts: cubes meeting the closed level-8 cylinders, in integers
        let c = ifs_digital_set(&cantor(), 8).unwrap();
        let n = 8u32;
        let lefts = (0..1u64 << n).map(|bits| (0..n).map(|i| ((bits >> i) & 1) * 2 * 3u64.pow(i)).sum::<u64>());
        let mut cells: Vec<u64> = lefts
            .flat_map(|k| {
                let scale = 3u64.pow(n);
                let lo = k * 256 / scale;
                let hi = ((k + 1) * 256 / scale).min(255);
                lo..=hi
            })
            .collect();
        cells.sort();
        cells.dedup();
        assert_eq!(c.cubes().map(|q| q.coords()[0]).collect::<Vec<_>>(), cells);
        assert_eq!(
            box_counts(&c, 8).unwrap().iter().map(|x| x.1).collect::<Vec<_>>(),
            vec![1, 2, 4, 6, 10, 16, 28, 42, 70]
        );

        let c = ifs_digital_set(&cantor(), 16).unwrap();
        let est = upper_box_dim_estimate(&c, 4, 16).unwrap();
        assert!((est.slope - 2f64.ln() / 3f64.ln()).abs() < 0.05, "{est:?}");
    }

    #[test]
    fn invalid_systems() {
        assert!(matches!(
            IFSystem::homotheties(&[0.5], &[vec![0.0]], false),
            Err(Error::InvalidSystem(_))
        ));
        assert!(IFSystem::homotheties(&[0.5, 0.6], &[vec![0.0], vec![0.5]], false).is_err());
        assert!(IFSystem::homotheties(&[0.6, 0.5], &[vec![0.0], vec![0.5]], true).is_err());
        assert!(IFSystem::homotheties(&[0.6, 0.5], &[vec![0.0], vec![0.5]], false).is_ok());
    }

    #[test]
    fn rotated_maps() {
        // quarter turn about the cube center, then shrink into the lower-left quadrant
        let rot = vec![0.0, -1.0, 1.0, 0.0];
        let s = Similarity {
            ratio: 0.5,
            rotation: Some(rot),
            translation: vec![0.5, 0.0],
        };
        let sys = IFSystem::new(vec![s, Similarity::homothety(0.5, vec![0.5, 0.5])], true).unwrap();
        let text = sys.to_text();
        assert_eq!(IFSystem::from_text(&text).unwrap(), sys);
        let set = ifs_digital_set(&sys, 4).unwrap();
        assert!(!set.is_empty());
        let bad = Similarity {
            ratio: 0.5,
            rotation: Some(vec![1.0, 1.0, 0.0, 1.0]),
            translation: vec![0.0, 0.0],
        };
        assert!(IFSystem::new(vec![bad, Similarity::homothety(0.5, vec![0.5, 0.5])], false).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let sys = cantor();
        assert_eq!(IFSystem::from_text(&sys.to_text()).unwrap(), sys);
        assert!(IFSystem::from_text("m=3 dim=1\n0.5 0\n0.5 0.5\n").is_err());
    }

    #[test]
    fn expansion_budget() {
        let sys = IFSystem::homotheties(&[0.5, 0.5, 0.5], &[vec![0.0], vec![0.25], vec![0.5]], false).unwrap();
        assert!(matches!(ifs_digital_set(&sys, 30), Err(Error::ExpansionBudget(_))));
    }
}
