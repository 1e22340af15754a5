//! Set systems, their duals and incidence matrices, design classification,
//! and the built-in catalog.
//!
//! A [`SetSystem`] is a list of blocks (subsets of a point set), the
//! combinatorial substrate behind every protocol in this crate. Points are
//! 0-based everywhere in the library; only human-readable CLI output renders
//! 1-based labels.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::rational::{int_u, Rat};
use num_traits::Zero;

/// A family of blocks over points `0..point_count`.
///
/// Blocks are stored with indices sorted ascending; block order is preserved
/// from construction (transition-matrix rows follow it). Repeated blocks are
/// allowed, and two systems compare equal when their block multisets match.
#[derive(Debug, Clone, Eq, Serialize, Deserialize)]
pub struct SetSystem {
    point_count: usize,
    blocks: Vec<Vec<usize>>,
}

impl PartialEq for SetSystem {
    fn eq(&self, other: &Self) -> bool {
        if self.point_count != other.point_count || self.blocks.len() != other.blocks.len() {
            return false;
        }
        let mut a = self.blocks.clone();
        let mut b = other.blocks.clone();
        a.sort();
        b.sort();
        a == b
    }
}

impl SetSystem {
    /// Validates raw input and returns the canonicalised system.
    ///
    /// Rejects empty blocks, blocks equal to the whole point set (they leave
    /// no low-probability outputs for the randomiser), out-of-range or
    /// duplicated indices, and uncovered points.
    pub fn new(point_count: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let sys = Self::from_parts(point_count, blocks)?;
        for (bi, block) in sys.blocks.iter().enumerate() {
            if block.len() == point_count {
                return Err(Error::FullBlock { block: bi });
            }
        }
        Ok(sys)
    }

    /// Canonicalises and checks everything except the full-block rule.
    ///
    /// Duals and point deletions can legitimately produce blocks equal to the
    /// whole point set; protocol construction rejects those later.
    fn from_parts(point_count: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::EmptyBlock { block: 0 });
        }
        let mut canonical = Vec::with_capacity(blocks.len());
        let mut covered = vec![false; point_count];
        for (bi, mut block) in blocks.into_iter().enumerate() {
            if block.is_empty() {
                return Err(Error::EmptyBlock { block: bi });
            }
            block.sort_unstable();
            for pair in block.windows(2) {
                if pair[0] == pair[1] {
                    return Err(Error::DuplicateIndexInBlock {
                        block: bi,
                        index: pair[0],
                    });
                }
            }
            for &p in &block {
                if p >= point_count {
                    return Err(Error::IndexOutOfRange {
                        block: bi,
                        index: p,
                        points: point_count,
                    });
                }
                covered[p] = true;
            }
            canonical.push(block);
        }
        if let Some(point) = covered.iter().position(|c| !c) {
            return Err(Error::UncoveredPoint { point });
        }
        Ok(Self {
            point_count,
            blocks: canonical,
        })
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks containing each point.
    pub fn replication_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.point_count];
        for block in &self.blocks {
            for &p in block {
                counts[p] += 1;
            }
        }
        counts
    }

    /// For each point `x`, the sorted list of blocks containing `x`.
    ///
    /// These are exactly the blocks of the dual system, i.e. the sets `Y_x`
    /// when the system plays the role of the protocol's input design.
    pub fn dual_blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.point_count];
        for (bi, block) in self.blocks.iter().enumerate() {
            for &p in block {
                out[p].push(bi);
            }
        }
        out
    }

    /// The dual system: points and blocks swap roles (incidence transposed).
    pub fn dual(&self) -> SetSystem {
        SetSystem {
            point_count: self.blocks.len(),
            blocks: self.dual_blocks(),
        }
    }

    /// Removes point `p`, compacting the remaining indices.
    pub fn delete_point(&self, p: usize) -> Result<SetSystem> {
        if p >= self.point_count {
            return Err(Error::IndexOutOfRange {
                block: 0,
                index: p,
                points: self.point_count,
            });
        }
        for (bi, block) in self.blocks.iter().enumerate() {
            if block.len() == 1 && block[0] == p {
                return Err(Error::WouldCreateEmptyBlock { block: bi });
            }
        }
        let shrunk = self
            .blocks
            .iter()
            .map(|block| {
                block
                    .iter()
                    .filter(|&&x| x != p)
                    .map(|&x| if x > p { x - 1 } else { x })
                    .collect()
            })
            .collect();
        Self::from_parts(self.point_count - 1, shrunk)
    }

    /// The b-by-v 0/1 incidence matrix: entry (i, j) = 1 iff point j is in
    /// block i.
    pub fn incidence_matrix(&self) -> IncidenceMatrix {
        let b = self.blocks.len();
        let v = self.point_count;
        let matrix = RationalMatrix::from_fn(b, v, |i, j| {
            if self.blocks[i].binary_search(&j).is_ok() {
                int_u(1)
            } else {
                Rat::zero()
            }
        });
        IncidenceMatrix { matrix }
    }

    /// Counts replication per point and index per pair, and reports the
    /// design class the counts support.
    pub fn classify(&self) -> DesignProfile {
        let v = self.point_count;
        let b = self.blocks.len();
        let repl = self.replication_counts();
        let replication = if repl.iter().all_equal() {
            Some(repl[0])
        } else {
            None
        };

        let mut pair_counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for i in 0..v {
            for j in (i + 1)..v {
                pair_counts.insert((i, j), 0);
            }
        }
        for block in &self.blocks {
            for pair in block.iter().combinations(2) {
                *pair_counts.get_mut(&(*pair[0], *pair[1])).unwrap() += 1;
            }
        }
        let index = if pair_counts.values().all_equal() {
            pair_counts.values().next().copied()
        } else {
            None
        };

        let block_size = if self.blocks.iter().map(Vec::len).all_equal() {
            Some(self.blocks[0].len())
        } else {
            None
        };

        let kind = match (replication, index, block_size) {
            (Some(_), Some(_), Some(_)) => DesignKind::Bibd,
            (Some(_), Some(_), None) => DesignKind::RLambdaDesign,
            _ => DesignKind::General,
        };

        DesignProfile {
            v,
            b,
            replication,
            index,
            block_size,
            kind,
        }
    }
}

/// Design class supported by a system's incidence counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DesignKind {
    General,
    RLambdaDesign,
    Bibd,
}

/// Classification result: counts that are constant across the system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignProfile {
    /// Point count of the system.
    pub v: usize,
    /// Block count of the system.
    pub b: usize,
    /// Present iff every point occurs in the same number of blocks.
    pub replication: Option<usize>,
    /// Present iff every point pair occurs in the same number of blocks.
    pub index: Option<usize>,
    /// Present iff all blocks have equal size.
    pub block_size: Option<usize>,
    pub kind: DesignKind,
}

impl DesignProfile {
    pub fn is_pure(&self) -> bool {
        matches!(self.kind, DesignKind::RLambdaDesign | DesignKind::Bibd)
    }

    /// (r, lambda) when the profile is pure.
    pub fn r_lambda(&self) -> Result<(usize, usize)> {
        match (self.replication, self.index) {
            (Some(r), Some(l)) if self.is_pure() => Ok((r, l)),
            _ => Err(Error::NotPureDesign),
        }
    }
}

/// 0/1 incidence matrix of a set system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    matrix: RationalMatrix,
}

impl IncidenceMatrix {
    pub fn as_matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> RationalMatrix {
        self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    /// Row sums, i.e. block sizes.
    pub fn row_sums(&self) -> Vec<usize> {
        (0..self.matrix.rows())
            .map(|i| self.matrix.row(i).iter().filter(|e| !e.is_zero()).count())
            .collect()
    }

    /// Column sums, i.e. point replication counts.
    pub fn column_sums(&self) -> Vec<usize> {
        (0..self.matrix.cols())
            .map(|j| {
                (0..self.matrix.rows())
                    .filter(|&i| !self.matrix.get(i, j).is_zero())
                    .count()
            })
            .collect()
    }
}

/// All `C(v, k)` k-subsets of `0..v` in lexicographic order.
///
/// Classifies as the trivial `(v, C(v,k), C(v-1,k-1), k, C(v-2,k-2))`-BIBD.
pub fn k_subset_design(v: usize, k: usize) -> Result<SetSystem> {
    if k == 0 || k >= v {
        return Err(Error::InvalidK { k, v });
    }
    let blocks: Vec<Vec<usize>> = (0..v).combinations(k).collect();
    SetSystem::new(v, blocks)
}

/// Names of the built-in designs.
pub fn catalog_names() -> Vec<&'static str> {
    CATALOG.iter().map(|e| e.name).collect()
}

/// Short human descriptions of the built-in designs, keyed by name.
pub fn catalog_descriptions() -> Vec<(&'static str, &'static str)> {
    CATALOG.iter().map(|e| (e.name, e.description)).collect()
}

/// Looks up a built-in design by name.
pub fn catalog_lookup(name: &str) -> Result<SetSystem> {
    let entry = CATALOG
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownName {
            name: name.to_string(),
        })?;
    (entry.build)()
}

struct CatalogEntry {
    name: &'static str,
    description: &'static str,
    build: fn() -> Result<SetSystem>,
}

static CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "warner",
        description: "two-point randomised response, the (2,2,1,1,0)-BIBD",
        build: || SetSystem::new(2, vec![vec![0], vec![1]]),
    },
    CatalogEntry {
        name: "pairs-4",
        description: "all pairs from four points, the (4,6,3,2,1)-BIBD",
        build: || k_subset_design(4, 2),
    },
    CatalogEntry {
        name: "fano",
        description: "cyclic Fano plane, the (7,7,3,3,1)-BIBD",
        build: || {
            // base block {0,1,3} developed mod 7
            let blocks = (0..7)
                .map(|t| vec![t % 7, (1 + t) % 7, (3 + t) % 7])
                .collect();
            SetSystem::new(7, blocks)
        },
    },
    CatalogEntry {
        name: "fano-minus-point",
        description: "Fano plane with its last point deleted, a (3,1)-design on 6 points",
        build: || {
            SetSystem::new(
                6,
                vec![
                    vec![0, 1, 3],
                    vec![1, 2, 4],
                    vec![2, 3, 5],
                    vec![3, 4],
                    vec![4, 5, 0],
                    vec![5, 1],
                    vec![0, 2],
                ],
            )
        },
    },
    CatalogEntry {
        name: "ag23",
        description: "affine plane of order 3, the (9,12,4,3,1)-BIBD",
        build: || {
            SetSystem::new(
                9,
                vec![
                    vec![0, 1, 2],
                    vec![3, 4, 5],
                    vec![6, 7, 8],
                    vec![0, 3, 6],
                    vec![1, 4, 7],
                    vec![2, 5, 8],
                    vec![0, 4, 8],
                    vec![1, 5, 6],
                    vec![2, 3, 7],
                    vec![0, 5, 7],
                    vec![1, 3, 8],
                    vec![2, 4, 6],
                ],
            )
        },
    },
    CatalogEntry {
        name: "steiner25",
        description: "Steiner system S(2,4,25), the (25,50,8,4,1)-BIBD",
        build: build_steiner25,
    },
];

/// Develops the difference family {0,1,5,12}, {0,2,8,17} over Z5 x Z5
/// (points encoded 5a+b) and sorts the 50 blocks lexicographically.
fn build_steiner25() -> Result<SetSystem> {
    let add = |x: usize, t: usize| 5 * ((x / 5 + t / 5) % 5) + (x % 5 + t % 5) % 5;
    let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(50);
    for base in [[0usize, 1, 5, 12], [0, 2, 8, 17]] {
        for t in 0..25 {
            let mut block: Vec<usize> = base.iter().map(|&x| add(x, t)).collect();
            block.sort_unstable();
            blocks.push(block);
        }
    }
    blocks.sort();
    SetSystem::new(25, blocks)
}
