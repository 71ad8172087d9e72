//! Keyboard layouts: the phoneme keyboard built from a similarity space,
//! and plain alphabetic grids.

mod mds;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::lexicon::{CreatureSpec, KeyGroup, Phoneme};

pub use mds::{canonicalize, mds_2d, raw_stress, MdsConfig, MdsMethod, MdsResult};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LayoutError {
    #[error("invalid similarity matrix: {0}")]
    InvalidMatrix(String),
    #[error("grid {cols}x{rows} has {cells} cells but {needed} are needed")]
    Capacity {
        cols: usize,
        rows: usize,
        cells: usize,
        needed: usize,
    },
    #[error("invalid grid spec {0:?}, expected COLSxROWS")]
    GridSpec(String),
}

/// Symmetric dissimilarities between named symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub symbols: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn new(symbols: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self, LayoutError> {
        let m = Self { symbols, values };
        m.validate()?;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        let bad = |m: String| Err(LayoutError::InvalidMatrix(m));
        let n = self.symbols.len();
        if self.values.len() != n || self.values.iter().any(|r| r.len() != n) {
            return bad(format!("expected a {n}x{n} matrix"));
        }
        for i in 0..n {
            if self.values[i][i] != 0.0 {
                return bad(format!("nonzero diagonal at {i}"));
            }
            for j in 0..n {
                let v = self.values[i][j];
                if !v.is_finite() || v < 0.0 {
                    return bad(format!("entry ({i}, {j}) is {v}"));
                }
                if (v - self.values[j][i]).abs() > 1e-12 {
                    return bad(format!("asymmetric at ({i}, {j})"));
                }
            }
        }
        Ok(())
    }
}

/// Euclidean distances between unit-scaled articulatory feature vectors.
pub fn similarity(phonemes: &[Phoneme]) -> SimilarityMatrix {
    SimilarityMatrix {
        symbols: phonemes.iter().map(|p| p.symbol().to_string()).collect(),
        values: phonemes
            .iter()
            .map(|a| phonemes.iter().map(|&b| a.feature_distance(b)).collect())
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GridConfig {
    pub cols: usize,
    pub rows: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { cols: 8, rows: 6 }
    }
}

impl std::str::FromStr for GridConfig {
    type Err = LayoutError;

    /// Parses `COLSxROWS`, e.g. `8x6`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || LayoutError::GridSpec(s.to_string());
        let (c, r) = s.trim().split_once(['x', 'X']).ok_or_else(err)?;
        Ok(Self {
            cols: c.trim().parse().map_err(|_| err())?,
            rows: r.trim().parse().map_err(|_| err())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Cell {
    pub symbol: String,
    pub row: usize,
    pub col: usize,
    /// Consonant group id 1-3; absent for vowels and alphabetic keyboards.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutGrid {
    pub cols: usize,
    pub rows: usize,
    pub cells: Vec<Cell>,
}

impl LayoutGrid {
    pub fn position(&self, symbol: &str) -> Option<(usize, usize)> {
        self.cells
            .iter()
            .find(|c| c.symbol == symbol)
            .map(|c| (c.row, c.col))
    }

    pub fn group_of(&self) -> BTreeMap<&str, u8> {
        self.cells
            .iter()
            .filter_map(|c| c.group.map(|g| (c.symbol.as_str(), g)))
            .collect()
    }

    pub fn is_injective(&self) -> bool {
        let mut seen: Vec<(usize, usize)> = self.cells.iter().map(|c| (c.row, c.col)).collect();
        seen.sort_unstable();
        let n = seen.len();
        seen.dedup();
        seen.len() == n && self.cells.iter().all(|c| c.row < self.rows && c.col < self.cols)
    }

    /// Whether every consonant group occupies a 4-connected set of cells.
    pub fn groups_connected(&self) -> bool {
        let mut by_group: BTreeMap<u8, Vec<(usize, usize)>> = BTreeMap::new();
        for c in &self.cells {
            if let Some(g) = c.group {
                by_group.entry(g).or_default().push((c.row, c.col));
            }
        }
        by_group.values().all(|cells| is_connected(cells))
    }
}

/// Breadth-first check of 4-neighbour connectivity.
pub fn is_connected(cells: &[(usize, usize)]) -> bool {
    let Some(&first) = cells.first() else {
        return true;
    };
    let mut seen = vec![false; cells.len()];
    seen[0] = true;
    let mut queue = VecDeque::from([first]);
    let mut count = 1;
    while let Some((r, c)) = queue.pop_front() {
        for (i, &(r2, c2)) in cells.iter().enumerate() {
            if !seen[i] && r.abs_diff(r2) + c.abs_diff(c2) == 1 {
                seen[i] = true;
                count += 1;
                queue.push_back((r2, c2));
            }
        }
    }
    count == cells.len()
}

pub fn group_id(group: KeyGroup) -> Option<u8> {
    match group {
        KeyGroup::Fricatives => Some(1),
        KeyGroup::Plosives => Some(2),
        KeyGroup::Sonorants => Some(3),
        KeyGroup::Vowels => None,
    }
}

/// Places phonemes on a grid.
///
/// The grid is walked column by column in alternating direction and each
/// consonant group takes the next run of cells along that walk, so every
/// group is a connected strip; vowels get all remaining cells. Within a
/// region the group's coordinates are stretched over the region's bounding
/// box and members, most isolated first, take the nearest free cell.
pub fn compose_layout(
    coords: &[(Phoneme, [f64; 2])],
    grid: GridConfig,
) -> Result<LayoutGrid, LayoutError> {
    let cells = grid.cols * grid.rows;
    if coords.len() > cells {
        return Err(LayoutError::Capacity {
            cols: grid.cols,
            rows: grid.rows,
            cells,
            needed: coords.len(),
        });
    }
    let walk: Vec<(usize, usize)> = (0..grid.cols)
        .flat_map(|c| {
            let rows: Vec<usize> = if c % 2 == 0 {
                (0..grid.rows).collect()
            } else {
                (0..grid.rows).rev().collect()
            };
            rows.into_iter().map(move |r| (r, c))
        })
        .collect();
    let mut out = Vec::with_capacity(coords.len());
    let mut next = 0;
    for group in KeyGroup::CONSONANTS.into_iter().chain([KeyGroup::Vowels]) {
        let members: Vec<(Phoneme, [f64; 2])> = coords
            .iter()
            .copied()
            .filter(|(p, _)| p.group() == group)
            .collect();
        let region: Vec<(usize, usize)> = if group == KeyGroup::Vowels {
            walk[next..].to_vec()
        } else {
            walk[next..next + members.len()].to_vec()
        };
        next += members.len();
        for (p, (r, c)) in snap(&members, &region) {
            out.push(Cell {
                symbol: p.symbol().to_string(),
                row: r,
                col: c,
                group: group_id(group),
            });
        }
    }
    out.sort_by_key(|c| (c.row, c.col));
    Ok(LayoutGrid {
        cols: grid.cols,
        rows: grid.rows,
        cells: out,
    })
}

fn snap(members: &[(Phoneme, [f64; 2])], region: &[(usize, usize)]) -> Vec<(Phoneme, (usize, usize))> {
    if members.is_empty() {
        return Vec::new();
    }
    let bounds = |v: &mut dyn Iterator<Item = f64>| {
        v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
    };
    let (x0, x1) = bounds(&mut members.iter().map(|m| m.1[0]));
    let (y0, y1) = bounds(&mut members.iter().map(|m| m.1[1]));
    let (c0, c1) = bounds(&mut region.iter().map(|c| c.1 as f64));
    let (r0, r1) = bounds(&mut region.iter().map(|c| c.0 as f64));
    let stretch = |v: f64, lo: f64, hi: f64, a: f64, b: f64| {
        if hi - lo > 1e-12 {
            a + (v - lo) / (hi - lo) * (b - a)
        } else {
            (a + b) / 2.0
        }
    };
    // x runs along columns, y down rows.
    let target: Vec<[f64; 2]> = members
        .iter()
        .map(|m| [stretch(m.1[1], y0, y1, r0, r1), stretch(m.1[0], x0, x1, c0, c1)])
        .collect();
    let isolation: Vec<f64> = (0..members.len())
        .map(|i| {
            (0..members.len())
                .filter(|&j| j != i)
                .map(|j| sq(members[i].1, members[j].1))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| isolation[b].total_cmp(&isolation[a]).then(members[a].0.cmp(&members[b].0)));
    let mut free = vec![true; region.len()];
    let mut out = Vec::with_capacity(members.len());
    for i in order {
        let k = (0..region.len())
            .filter(|&k| free[k])
            .min_by(|&a, &b| {
                let da = sq(target[i], [region[a].0 as f64, region[a].1 as f64]);
                let db = sq(target[i], [region[b].0 as f64, region[b].1 as f64]);
                da.total_cmp(&db).then(region[a].cmp(&region[b]))
            })
            .expect("region has room for every member");
        free[k] = false;
        out.push((members[i].0, region[k]));
    }
    out
}

fn sq(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PhonemeKeyboard {
    pub grid: LayoutGrid,
    pub mds: MdsResult,
}

/// The full phoneme keyboard: scaling of all 39 phonemes, then placement.
pub fn phoneme_keyboard(mds_cfg: &MdsConfig, grid: GridConfig) -> Result<PhonemeKeyboard, LayoutError> {
    let m = similarity(&Phoneme::ALL);
    let mds = mds_2d(&m, mds_cfg)?;
    let coords: Vec<(Phoneme, [f64; 2])> = Phoneme::ALL.into_iter().zip(mds.coords.iter().copied()).collect();
    let grid = compose_layout(&coords, grid)?;
    Ok(PhonemeKeyboard { grid, mds })
}

/// Row-major fill in the given order.
pub fn alphabetic_layout(symbols: &[String], width: usize) -> LayoutGrid {
    let width = width.max(1);
    let cells: Vec<Cell> = symbols
        .iter()
        .enumerate()
        .map(|(i, s)| Cell {
            symbol: s.clone(),
            row: i / width,
            col: i % width,
            group: None,
        })
        .collect();
    LayoutGrid {
        cols: if symbols.is_empty() { 0 } else { width },
        rows: symbols.len().div_ceil(width),
        cells,
    }
}

pub fn letters() -> Vec<String> {
    ('A'..='Z').map(String::from).collect()
}

/// Creature glyph ids ordered by canonical grapheme, then phoneme.
pub fn creature_order(creatures: &[CreatureSpec]) -> Vec<String> {
    let mut keyed: Vec<(&str, Phoneme, &str)> = creatures
        .iter()
        .map(|c| (c.canonical_grapheme(), c.phoneme, c.glyph_id.as_str()))
        .collect();
    keyed.sort();
    keyed.into_iter().map(|k| k.2.to_string()).collect()
}
