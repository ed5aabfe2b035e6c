//! Minkowski differences of box unions and the Brunn–Minkowski ratio.
//!
//! In one dimension the difference set is computed exactly. In two and three
//! dimensions the window is rasterized over its bounding box: cells inside a
//! box give an inner set `I ⊆ W`, cells meeting a closed box give an outer set
//! `O ⊇ W`. Since `cell_c - cell_c'` is the cube of side `2h` centered at
//! `(c - c')h`, the unions of these cubes over `I - I` and `O - O` bracket
//! `W - W`, and their volumes are exact cell counts.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactnum::Rational;
use crate::modelsets::Window1D;

/// Bound on row pairs visited by the grid difference.
pub const DEFAULT_PAIR_CAP: u64 = 50_000_000;

/// Axis-aligned closed boxes in `ℝ^d` with pairwise disjoint interiors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BoxUnion {
    dim: usize,
    boxes: Vec<Vec<(Rational, Rational)>>,
}

impl BoxUnion {
    pub fn new(boxes: Vec<Vec<(Rational, Rational)>>) -> Result<Self> {
        let dim = boxes.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::pre("box union needs at least one box of dimension >= 1"));
        }
        if boxes.iter().any(|b| b.len() != dim) {
            return Err(Error::pre("all boxes must have the same dimension"));
        }
        if boxes.iter().flatten().any(|(lo, hi)| lo > hi) {
            return Err(Error::pre("box sides need lo <= hi"));
        }
        let boxes: Vec<_> = boxes.into_iter().filter(|b| b.iter().all(|(lo, hi)| lo < hi)).collect();
        if boxes.is_empty() {
            return Err(Error::pre("box union has zero volume"));
        }
        for (i, x) in boxes.iter().enumerate() {
            for y in &boxes[i + 1..] {
                if x.iter().zip(y).all(|((a, b), (c, d))| a < d && c < b) {
                    return Err(Error::pre("boxes must have disjoint interiors"));
                }
            }
        }
        Ok(BoxUnion { dim, boxes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[Vec<(Rational, Rational)>] {
        &self.boxes
    }

    pub fn volume(&self) -> Rational {
        self.boxes
            .iter()
            .map(|b| b.iter().map(|(lo, hi)| hi - lo).product::<Rational>())
            .sum()
    }

    pub fn bounding_box(&self) -> Vec<(Rational, Rational)> {
        (0..self.dim)
            .map(|k| {
                let lo = self.boxes.iter().map(|b| b[k].0.clone()).min().expect("nonempty");
                let hi = self.boxes.iter().map(|b| b[k].1.clone()).max().expect("nonempty");
                (lo, hi)
            })
            .collect()
    }

    /// The one-dimensional window, when `d = 1`.
    pub fn as_window(&self) -> Option<Window1D> {
        (self.dim == 1).then(|| {
            let pairs: Vec<_> = self.boxes.iter().map(|b| b[0].clone()).collect();
            Window1D::rational(&pairs).expect("positive-length intervals")
        })
    }
}

impl fmt::Display for BoxUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .boxes
            .iter()
            .map(|b| {
                b.iter()
                    .map(|(lo, hi)| format!("[{lo},{hi}]"))
                    .collect::<Vec<_>>()
                    .join("x")
            })
            .collect();
        f.write_str(&parts.join(";"))
    }
}

impl FromStr for BoxUnion {
    type Err = Error;

    /// `[0,1]x[0,1/2];[0,1/2]x[1/2,1]`.
    fn from_str(s: &str) -> Result<Self> {
        let mut boxes = Vec::new();
        let mut column = 1;
        for part in s.split(';') {
            let mut sides = Vec::new();
            let mut col = column;
            for side in part.split('x') {
                let body = side
                    .trim()
                    .strip_prefix('[')
                    .and_then(|t| t.strip_suffix(']'))
                    .ok_or_else(|| Error::parse(col, format!("expected [lo,hi], found {side:?}")))?;
                let (lo, hi) = body
                    .split_once(',')
                    .ok_or_else(|| Error::parse(col, "expected a comma between endpoints"))?;
                let lo: Rational = lo.trim().parse().map_err(|e: Error| e.shifted(col))?;
                let hi: Rational = hi
                    .trim()
                    .parse()
                    .map_err(|e: Error| e.shifted(col + body.find(',').unwrap() + 1))?;
                if lo > hi {
                    return Err(Error::parse(col, format!("empty side [{lo},{hi}]")));
                }
                sides.push((lo, hi));
                col += side.len() + 1;
            }
            boxes.push(sides);
            column += part.len() + 1;
        }
        BoxUnion::new(boxes)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiffVolume {
    pub lower: Rational,
    pub upper: Rational,
    /// Present in dimension one.
    pub exact: Option<Rational>,
}

impl DiffVolume {
    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }
}

type Key = [i32; 2];
type Rows = BTreeMap<Key, Vec<(i32, i32)>>;

fn merge_runs(mut runs: Vec<(i32, i32)>) -> Vec<(i32, i32)> {
    runs.sort_unstable();
    let mut out: Vec<(i32, i32)> = Vec::with_capacity(runs.len());
    for (a, b) in runs {
        match out.last_mut() {
            Some(last) if a <= last.1 + 1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn to_i32(x: BigInt) -> i32 {
    x.to_i32().expect("grid index fits in i32")
}

/// Inner and outer cell rows of the rasterized union.
fn rasterize(w: &BoxUnion, grid: u32, bbox: &[(Rational, Rational)]) -> (Rows, Rows) {
    let g = grid as i32;
    let mut inner: Rows = BTreeMap::new();
    let mut outer: Rows = BTreeMap::new();
    for b in &w.boxes {
        let mut inner_ranges = Vec::with_capacity(w.dim);
        let mut outer_ranges = Vec::with_capacity(w.dim);
        for (k, (lo, hi)) in b.iter().enumerate() {
            let (blo, bhi) = &bbox[k];
            let scale = &Rational::integer(grid) / &(bhi - blo);
            let u0 = &(lo - blo) * &scale;
            let u1 = &(hi - blo) * &scale;
            inner_ranges.push((to_i32(u0.ceil()), to_i32(u1.floor()) - 1));
            outer_ranges.push(((to_i32(u0.ceil()) - 1).max(0), to_i32(u1.floor()).min(g - 1)));
        }
        for (ranges, rows) in [(&inner_ranges, &mut inner), (&outer_ranges, &mut outer)] {
            let last = ranges[w.dim - 1];
            if last.0 > last.1 {
                continue;
            }
            let (r0, r1) = if w.dim >= 2 { ranges[0] } else { (0, 0) };
            let (s0, s1) = if w.dim == 3 { ranges[1] } else { (0, 0) };
            for p in r0..=r1 {
                for q in s0..=s1 {
                    rows.entry([p, q]).or_default().push(last);
                }
            }
        }
    }
    for rows in [&mut inner, &mut outer] {
        for runs in rows.values_mut() {
            *runs = merge_runs(std::mem::take(runs));
        }
    }
    (inner, outer)
}

/// `|(R - R) + {-1, 0}^d|` for a row-encoded cell set `R`.
fn dilated_difference_count(rows: &Rows, dim: usize, pair_cap: u64) -> Result<u64> {
    let list: Vec<(&Key, &Vec<(i32, i32)>)> = rows.iter().collect();
    let pairs = (list.len() as u64).saturating_mul(list.len() as u64);
    if pairs > pair_cap {
        return Err(Error::CapOverflow {
            needed: pairs.to_string(),
            cap: pair_cap,
        });
    }
    let mut diffs: Vec<(Key, i32, i32)> = list
        .par_iter()
        .flat_map_iter(|(k1, runs1)| {
            list.iter().flat_map(move |(k2, runs2)| {
                let key = [k1[0] - k2[0], k1[1] - k2[1]];
                runs1
                    .iter()
                    .flat_map(move |&(s1, e1)| runs2.iter().map(move |&(s2, e2)| (key, s1 - e2, e1 - s2)))
            })
        })
        .collect();
    diffs.par_sort_unstable();
    let shifts: Vec<Key> = match dim {
        2 => vec![[0, 0], [-1, 0]],
        3 => vec![[0, 0], [-1, 0], [0, -1], [-1, -1]],
        _ => vec![[0, 0]],
    };
    let mut grouped: Vec<(Key, Vec<(i32, i32)>)> = Vec::new();
    for (key, a, b) in diffs {
        match grouped.last_mut() {
            Some((k, runs)) if *k == key => runs.push((a, b)),
            _ => grouped.push((key, vec![(a, b)])),
        }
    }
    let mut dilated: BTreeMap<Key, Vec<(i32, i32)>> = BTreeMap::new();
    for (key, runs) in grouped {
        let runs = merge_runs(runs);
        for s in &shifts {
            dilated
                .entry([key[0] + s[0], key[1] + s[1]])
                .or_default()
                .extend(runs.iter().map(|&(a, b)| (a - 1, b)));
        }
    }
    Ok(dilated
        .into_values()
        .map(|runs| merge_runs(runs).iter().map(|(a, b)| (b - a + 1) as u64).sum::<u64>())
        .sum())
}

/// Volume of `W - W`: exact for `d = 1`, certified bounds for `d ∈ {2, 3}`.
pub fn box_difference_volume(w: &BoxUnion, grid: u32) -> Result<DiffVolume> {
    box_difference_volume_capped(w, grid, DEFAULT_PAIR_CAP)
}

pub fn box_difference_volume_capped(w: &BoxUnion, grid: u32, pair_cap: u64) -> Result<DiffVolume> {
    match w.dim {
        1 => {
            let v = w.as_window().expect("d = 1").difference().measure();
            let v = v.as_rational().expect("rational endpoints").clone();
            Ok(DiffVolume {
                lower: v.clone(),
                upper: v.clone(),
                exact: Some(v),
            })
        }
        2 | 3 => {
            if grid < 64 {
                return Err(Error::pre("grid must be at least 64 in dimension >= 2"));
            }
            let bbox = w.bounding_box();
            let (inner, outer) = rasterize(w, grid, &bbox);
            let cell: Rational = bbox
                .iter()
                .map(|(lo, hi)| &(hi - lo) / &Rational::integer(grid))
                .product();
            let lower = &Rational::integer(dilated_difference_count(&inner, w.dim, pair_cap)?) * &cell;
            let upper = &Rational::integer(dilated_difference_count(&outer, w.dim, pair_cap)?) * &cell;
            Ok(DiffVolume {
                lower,
                upper,
                exact: None,
            })
        }
        d => Err(Error::pre(format!("dimension {d} exceeds the supported maximum of 3"))),
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BmCheck {
    /// `vol(W - W)/vol(W)`, bracketed.
    pub ratio_lower: Rational,
    pub ratio_upper: Rational,
    pub exact: Option<Rational>,
    /// `2^d`.
    pub bound: Rational,
    /// The ratio is not certified to fall below `2^d`.
    pub holds: bool,
    pub equality: bool,
}

/// Brunn–Minkowski check `vol(W - W) >= 2^d·vol(W)`. In dimension one the
/// equality flag is exact; otherwise it is set when the upper ratio is within
/// relative `tolerance` of `2^d`.
pub fn bm_check(w: &BoxUnion, grid: u32, tolerance: &Rational) -> Result<BmCheck> {
    let dv = box_difference_volume(w, grid)?;
    let vol = w.volume();
    let bound = Rational::integer(1i64 << w.dim);
    let ratio_lower = &dv.lower / &vol;
    let ratio_upper = &dv.upper / &vol;
    let exact = dv.exact.as_ref().map(|e| e / &vol);
    let holds = ratio_upper >= bound;
    let equality = match &exact {
        Some(e) => *e == bound,
        None => ratio_upper <= &bound * &(&Rational::one() + tolerance),
    };
    Ok(BmCheck {
        ratio_lower,
        ratio_upper,
        exact,
        bound,
        holds,
        equality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn bu(s: &str) -> BoxUnion {
        s.parse().unwrap()
    }

    #[test]
    fn one_dimensional_examples() {
        let d = box_difference_volume(&bu("[0,2]"), 64).unwrap();
        assert_eq!(d.exact, Some(r("4")));
        assert_eq!(
            box_difference_volume(&bu("[0,1];[2,3]"), 64).unwrap().exact,
            Some(r("6"))
        );
        let c = bm_check(&bu("[0,1]"), 64, &r("1/50")).unwrap();
        assert_eq!((c.exact.clone(), c.holds, c.equality), (Some(r("2")), true, true));
        let c = bm_check(&bu("[0,1];[2,3]"), 64, &r("1/50")).unwrap();
        assert_eq!((c.exact.clone(), c.holds, c.equality), (Some(r("3")), true, false));
    }

    #[test]
    fn unit_square() {
        let d = box_difference_volume(&bu("[0,1]x[0,1]"), 512).unwrap();
        assert!(d.lower <= r("4") && r("4") <= d.upper);
        assert!(d.width() < &r("4") * &r("1/50"));
        let c = bm_check(&bu("[0,1]x[0,1]"), 512, &r("1/50")).unwrap();
        assert!(c.holds && c.equality);
    }

    #[test]
    fn l_shape() {
        let l = bu("[0,1]x[0,1/2];[0,1/2]x[1/2,1]");
        assert_eq!(l.volume(), r("3/4"));
        let d = box_difference_volume(&l, 128).unwrap();
        assert!(d.lower <= r("7/2") && r("7/2") <= d.upper, "{d:?}");
        let c = bm_check(&l, 128, &r("1/50")).unwrap();
        assert!(&c.ratio_lower - &r("4") > &c.ratio_upper - &c.ratio_lower);
        assert!(!c.equality);
    }

    #[test]
    fn offset_rectangles_in_three_dimensions() {
        let w = bu("[0,1]x[0,1]x[0,1];[2,3]x[0,1]x[0,1]");
        let d = box_difference_volume(&w, 64).unwrap();
        // (W - W) = ([-1,1] ∪ [1,3] ∪ [-3,-1]) x [-1,1]^2, volume 6·4
        assert!(d.lower <= r("24") && r("24") <= d.upper, "{d:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            box_difference_volume(&bu("[0,1]x[0,1]"), 32),
            Err(Error::Precondition(_))
        ));
        assert!(box_difference_volume(&bu("[0,1]x[0,1]x[0,1]x[0,1]"), 64).is_err());
        assert!("[0,1]x[0,1];[1/2,2]x[1/2,2]".parse::<BoxUnion>().is_err());
        assert!("[0,1]x[0,1];[1,2]x[0,1]".parse::<BoxUnion>().is_ok());
        assert!(matches!("[1,0]".parse::<BoxUnion>(), Err(Error::Parse { .. })));
        assert!("[0,0]x[0,1]".parse::<BoxUnion>().is_err());
    }

    #[test]
    fn text_round_trip() {
        let s = "[0,1]x[0,1/2];[0,1/2]x[1/2,1]";
        assert_eq!(bu(s).to_string(), s);
    }
}
