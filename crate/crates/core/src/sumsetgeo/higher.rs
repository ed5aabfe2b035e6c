//! Higher-order sumsets `W^[r] = {h ∈ ℝ^{r-1} : W ∩ (W - h₁) ∩ ⋯ ∩ (W - h_{r-1}) ≠ ∅}`.
//!
//! For a choice of intervals `I_{i_0}, …, I_{i_{r-1}}` of `W`, the set of `h`
//! admitting a common `x` with `x + h_k ∈ I_{i_k}` (and `h_0 = 0`) is the
//! polytope `h_k - h_j <= b_{i_k} - a_{i_j}`. A grid cell is inner when it
//! lies in one polytope and outer when it meets one; meeting is decided by a
//! negative-cycle test on the difference constraints, in exact arithmetic.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactnum::{QuadExtReal, Rational};
use crate::modelsets::Window1D;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SumsetVolume {
    pub lower: QuadExtReal,
    pub upper: QuadExtReal,
    /// Present for `r = 2`.
    pub exact: Option<QuadExtReal>,
}

impl SumsetVolume {
    pub fn width(&self) -> QuadExtReal {
        self.upper.checked_sub(&self.lower).expect("same field")
    }

    pub fn brackets(&self, v: &Rational) -> bool {
        self.lower.cmp_rational(v) != Ordering::Greater && self.upper.cmp_rational(v) != Ordering::Less
    }
}

/// A simple cycle over nodes `0..=d`, as its edge list `(from, to)`.
fn simple_cycles(nodes: usize) -> Vec<Vec<(usize, usize)>> {
    fn extend(path: &mut Vec<usize>, nodes: usize, out: &mut Vec<Vec<(usize, usize)>>) {
        let start = path[0];
        for next in 0..nodes {
            if next == start && path.len() >= 2 {
                let mut edges: Vec<(usize, usize)> = path.windows(2).map(|w| (w[0], w[1])).collect();
                edges.push((*path.last().unwrap(), start));
                out.push(edges);
            } else if next > start && !path.contains(&next) {
                path.push(next);
                extend(path, nodes, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    for s in 0..nodes {
        extend(&mut vec![s], nodes, &mut out);
    }
    out
}

/// Precomputed integer data for one choice of intervals, in grid units where
/// `H_k = (h_k + L)/step` and `H_0 = g/2`.
struct Choice {
    /// `floor(w[k][j])` for the constraint `H_k - H_j <= w[k][j]`.
    floors: Vec<Vec<i64>>,
    /// Per cycle and per mask of edges carried by their constraint weight:
    /// floor of the sum of those weights.
    cycle_floors: Vec<Vec<i64>>,
}

fn qfloor(x: &QuadExtReal) -> i64 {
    x.floor().to_i64().expect("grid coordinates fit in i64")
}

fn build_choice(window: &Window1D, pick: &[usize], inv_step: &QuadExtReal, cycles: &[Vec<(usize, usize)>]) -> Choice {
    let ivs = window.intervals();
    let n = pick.len();
    // weight of edge j -> k is the bound on H_k - H_j
    let weights: Vec<Vec<QuadExtReal>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let c = ivs[pick[k]].hi.checked_sub(&ivs[pick[j]].lo).expect("same field");
                    c.checked_mul(inv_step).expect("same field")
                })
                .collect()
        })
        .collect();
    let floors = (0..n)
        .map(|k| (0..n).map(|j| qfloor(&weights[j][k])).collect())
        .collect();
    let cycle_floors = cycles
        .iter()
        .map(|edges| {
            (0..1usize << edges.len())
                .map(|mask| {
                    let sum = edges
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .fold(QuadExtReal::from(Rational::zero()), |acc, (_, &(a, b))| {
                            acc.checked_add(&weights[a][b]).expect("same field")
                        });
                    qfloor(&sum)
                })
                .collect()
        })
        .collect();
    Choice { floors, cycle_floors }
}

/// Edge `from -> to` bound from the cell box, if the edge touches node 0.
fn box_bound(from: usize, to: usize, cell: &[i64], half: i64) -> Option<i64> {
    match (from, to) {
        (0, k) => Some(cell[k - 1] + 1 - half),
        (k, 0) => Some(half - cell[k - 1]),
        _ => None,
    }
}

fn cell_is_inner(choice: &Choice, cell: &[i64], half: i64) -> bool {
    let n = cell.len() + 1;
    let lo = |k: usize| if k == 0 { half } else { cell[k - 1] };
    let hi = |k: usize| if k == 0 { half } else { cell[k - 1] + 1 };
    (0..n).all(|k| (0..n).all(|j| j == k || hi(k) - lo(j) <= choice.floors[k][j]))
}

fn cell_meets(choice: &Choice, cell: &[i64], half: i64, cycles: &[Vec<(usize, usize)>]) -> bool {
    for (ci, edges) in cycles.iter().enumerate() {
        let mut mask = 0usize;
        let mut ints = 0i64;
        for (i, &(a, b)) in edges.iter().enumerate() {
            match box_bound(a, b, cell, half) {
                // the integer bound n is the smaller one iff n <= floor(w)
                Some(nb) if nb <= choice.floors[b][a] => ints += nb,
                _ => mask |= 1 << i,
            }
        }
        // cycle weight = ints + (sum of masked weights) < 0
        if choice.cycle_floors[ci][mask] < -ints {
            return false;
        }
    }
    true
}

/// Volume of `W^[r]` for `2 <= r <= 4`: exact for `r = 2`, certified grid
/// bounds on the cube `[-L, L]^{r-1}` (`L = sup W - inf W`, `grid` cells per
/// side, rounded up to even) otherwise.
pub fn higher_order_sumset_volume(w: &Window1D, r: usize, grid: u32) -> Result<SumsetVolume> {
    if !(2..=4).contains(&r) {
        return Err(Error::pre(format!("sumset order r = {r} is outside 2..=4")));
    }
    if r == 2 {
        let v = w.difference().measure();
        return Ok(SumsetVolume {
            lower: v.clone(),
            upper: v.clone(),
            exact: Some(v),
        });
    }
    if grid < 2 {
        return Err(Error::pre("grid must be at least 2"));
    }
    let g = (grid + grid % 2) as i64;
    let d = r - 1;
    let cells_total = (g as u64).pow(d as u32);
    if cells_total > 2_000_000_000 {
        return Err(Error::CapOverflow {
            needed: cells_total.to_string(),
            cap: 2_000_000_000,
        });
    }
    let span = w.sup().checked_sub(w.inf()).expect("same field");
    // step = 2L/g
    let step = span.scale(&Rational::frac(2, g));
    let inv_step = QuadExtReal::from(Rational::one()).checked_div(&step)?;
    let cycles = simple_cycles(r);
    let n_iv = w.interval_count();
    let picks: Vec<Vec<usize>> = (0..n_iv.pow(r as u32))
        .map(|mut code| {
            (0..r)
                .map(|_| {
                    let v = code % n_iv;
                    code /= n_iv;
                    v
                })
                .collect()
        })
        .collect();
    let choices: Vec<Choice> = picks.iter().map(|p| build_choice(w, p, &inv_step, &cycles)).collect();
    let half = g / 2;
    let (inner, outer) = (0..g)
        .into_par_iter()
        .map(|first| {
            let mut inner = 0u64;
            let mut outer = 0u64;
            let mut cell = vec![0i64; d];
            cell[0] = first;
            let rest = (g as u64).pow(d as u32 - 1);
            for code in 0..rest {
                let mut c = code as i64;
                for slot in cell.iter_mut().skip(1) {
                    *slot = c % g;
                    c /= g;
                }
                if choices.iter().any(|ch| cell_is_inner(ch, &cell, half)) {
                    inner += 1;
                    outer += 1;
                } else if choices.iter().any(|ch| cell_meets(ch, &cell, half, &cycles)) {
                    outer += 1;
                }
            }
            (inner, outer)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let mut cell_volume = QuadExtReal::from(Rational::one());
    for _ in 0..d {
        cell_volume = cell_volume.checked_mul(&step)?;
    }
    let times = |n: u64| cell_volume.scale(&Rational::integer(BigInt::from(n)));
    Ok(SumsetVolume {
        lower: times(inner),
        upper: times(outer),
        exact: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Window1D {
        s.parse().unwrap()
    }

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn cycles_on_three_and_four_nodes() {
        assert_eq!(simple_cycles(3).len(), 5);
        assert_eq!(simple_cycles(4).len(), 20);
    }

    #[test]
    fn order_two_is_the_difference_set() {
        let v = higher_order_sumset_volume(&w("[0,1]"), 2, 8).unwrap();
        assert_eq!(v.exact, Some(QuadExtReal::from(r("2"))));
        let v = higher_order_sumset_volume(&w("[0,1/4];[1/2,3/4]"), 2, 8).unwrap();
        assert_eq!(v.exact, Some(QuadExtReal::from(r("3/2"))));
    }

    #[test]
    fn order_three_unit_interval() {
        let v = higher_order_sumset_volume(&w("[0,1]"), 3, 256).unwrap();
        assert!(v.brackets(&r("3")), "{v:?}");
        assert!(v.width().cmp_rational(&r("3/50")) == Ordering::Less);
    }

    #[test]
    fn bounds_tighten_with_the_grid() {
        let coarse = higher_order_sumset_volume(&w("[0,1]"), 3, 64).unwrap().width();
        let fine = higher_order_sumset_volume(&w("[0,1]"), 3, 128).unwrap().width();
        let half = coarse.scale(&r("17/32"));
        assert!(fine.try_cmp(&half).unwrap() != Ordering::Greater, "{coarse} {fine}");
    }

    #[test]
    fn order_four_unit_interval_fixture() {
        let v = higher_order_sumset_volume(&w("[0,1]"), 4, 48).unwrap();
        assert!(v.brackets(&r("4")), "{v:?}");
    }

    #[test]
    fn two_intervals_order_three() {
        // brute-force oracle: sample cell centers and test intersections directly
        let win = w("[0,1];[3/2,2]");
        let v = higher_order_sumset_volume(&win, 3, 64).unwrap();
        let g = 64i64;
        let span = r("2");
        let mut hits = 0u64;
        for i in 0..g {
            for j in 0..g {
                let h1 = &(&Rational::frac(2 * i + 1, 2 * g) * &(&span * &r("2"))) - &span;
                let h2 = &(&Rational::frac(2 * j + 1, 2 * g) * &(&span * &r("2"))) - &span;
                let a = win.clone();
                let b = win.translate(&-&h1);
                let c = win.translate(&-&h2);
                let meets = a.intervals().iter().any(|x| {
                    b.intervals().iter().any(|y| {
                        c.intervals().iter().any(|z| {
                            let lo = [&x.lo, &y.lo, &z.lo]
                                .into_iter()
                                .max_by(|p, q| p.try_cmp(q).unwrap())
                                .unwrap();
                            let hi = [&x.hi, &y.hi, &z.hi]
                                .into_iter()
                                .min_by(|p, q| p.try_cmp(q).unwrap())
                                .unwrap();
                            lo.try_cmp(hi).unwrap() != Ordering::Greater
                        })
                    })
                });
                hits += u64::from(meets);
            }
        }
        let cell = &(&span * &r("2")) / &Rational::integer(g);
        let estimate = QuadExtReal::from(&(&cell * &cell) * &Rational::integer(hits));
        assert!(v.lower.try_cmp(&estimate).unwrap() != Ordering::Greater);
        assert!(estimate.try_cmp(&v.upper).unwrap() != Ordering::Greater);
    }

    #[test]
    fn irrational_window() {
        let v = higher_order_sumset_volume(&w("[0,√2]"), 3, 64).unwrap();
        // scaling: volume is 3·(√2)² = 6
        assert!(v.brackets(&r("6")), "{v:?}");
    }

    #[test]
    fn order_out_of_range() {
        assert!(higher_order_sumset_volume(&w("[0,1]"), 5, 16).is_err());
        assert!(higher_order_sumset_volume(&w("[0,1]"), 1, 16).is_err());
    }
}
