use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::coarea::regular_level;
use crate::par;
use crate::solver::{DiscreteField, Tag};

/// Components of the level set `{u = t}` and whether each touches the
/// truncation surface.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LevelComponents {
    /// The level actually used, after moving off node values.
    pub level: f64,
    pub touches_outer: Vec<bool>,
}

impl LevelComponents {
    pub fn components(&self) -> usize {
        self.touches_outer.len()
    }

    /// True for a single component meeting the truncation surface.
    pub fn is_single_lateral(&self) -> bool {
        self.touches_outer == [true]
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Connected components of the cells crossed by each level, joined across
/// shared faces.
pub fn level_connectedness(u: &DiscreteField, levels: &[f64]) -> Vec<LevelComponents> {
    let d = &u.domain;
    let (lo, hi) = (0..d.len())
        .filter(|&p| d.tags[p].is_active())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(u.values[p]), b.max(u.values[p]))
        });
    let range = (hi - lo).max(0.0);
    par::map(levels.len(), |k| components_at(u, regular_level(u, levels[k], range)))
}

fn components_at(u: &DiscreteField, t: f64) -> LevelComponents {
    let d = &u.domain;
    let ranges = [d.cell_range(0), d.cell_range(1), d.cell_range(2)];
    let dims = ranges.clone().map(|r| r.len());
    let id = |c: [isize; 3]| -> usize {
        let r = [0, 1, 2].map(|a| (c[a] - ranges[a].start) as usize);
        (r[0] * dims[1] + r[1]) * dims[2] + r[2]
    };
    let n = dims[0] * dims[1] * dims[2];
    let mut crossed = alloc::vec![false; n];
    let mut outer = alloc::vec![false; n];
    for i in ranges[0].clone() {
        for j in ranges[1].clone() {
            for l in ranges[2].clone() {
                let c = [i, j, l];
                let Some(cs) = d.cell_corners(c) else { continue };
                if !cs.iter().all(|&p| d.tags[p].is_active()) {
                    continue;
                }
                let below = cs.iter().any(|&p| u.values[p] < t);
                let above = cs.iter().any(|&p| u.values[p] > t);
                if below && above {
                    crossed[id(c)] = true;
                    outer[id(c)] = cs.iter().any(|&p| d.tags[p] == Tag::Outer);
                }
            }
        }
    }
    let mut uf = UnionFind((0..n).collect());
    for i in ranges[0].clone() {
        for j in ranges[1].clone() {
            for l in ranges[2].clone() {
                let c = [i, j, l];
                if !crossed[id(c)] {
                    continue;
                }
                for a in 0..3 {
                    let mut nb = c;
                    nb[a] += 1;
                    if nb[a] >= ranges[a].end {
                        if !d.axes[a].periodic {
                            continue;
                        }
                        nb[a] = ranges[a].start;
                    }
                    if crossed[id(nb)] {
                        uf.union(id(c), id(nb));
                    }
                }
            }
        }
    }
    let mut roots: BTreeMap<usize, bool> = BTreeMap::new();
    for c in 0..n {
        if crossed[c] {
            *roots.entry(uf.find(c)).or_insert(false) |= outer[c];
        }
    }
    LevelComponents {
        level: t,
        touches_outer: roots.into_values().collect(),
    }
}
