//! Work splits between the two executors.
//!
//! CG splits the block rows once: rows `[0, r)` go to executor B, rows `[r, N)`
//! to executor A. Cholesky moves a border down the trailing matrix so that B
//! keeps roughly a fixed share of the Step-3 block updates in every column.

use std::ops::Range;

use crate::error::{Result, SolverError};
use crate::executor::ExecutorId;

fn check_fraction(f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        return Err(SolverError::Config(format!(
            "split fraction must lie in [0, 1], got {f}"
        )));
    }
    Ok(())
}

/// Row split for CG.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Partition {
    pub split_row: usize,
    pub fraction: f64,
    pub blocks: usize,
}

impl Partition {
    /// Block rows computed by executor B (the upper part).
    pub fn b_rows(&self) -> Range<usize> {
        0..self.split_row
    }

    /// Block rows computed by executor A (the lower part).
    pub fn a_rows(&self) -> Range<usize> {
        self.split_row..self.blocks
    }

    pub fn rows_of(&self, e: ExecutorId) -> Range<usize> {
        match e {
            ExecutorId::A => self.a_rows(),
            ExecutorId::B => self.b_rows(),
        }
    }

    pub fn owner(&self, block_row: usize) -> ExecutorId {
        if block_row < self.split_row {
            ExecutorId::B
        } else {
            ExecutorId::A
        }
    }
}

/// Split row `round(f·N)`, ties rounded up.
pub fn partition_for_fraction(f: f64, blocks: usize) -> Result<Partition> {
    check_fraction(f)?;
    if blocks == 0 {
        return Err(SolverError::Config("partition needs at least one block row".into()));
    }
    let split_row = ((f * blocks as f64) + 0.5).floor() as usize;
    Ok(Partition {
        split_row: split_row.min(blocks),
        fraction: f,
        blocks,
    })
}

/// Step-3 blocks in column `j`: targets `(i, k)` with `j < k <= i < N`.
pub fn step3_blocks(j: usize, blocks: usize) -> usize {
    let t = blocks - 1 - j;
    t * (t + 1) / 2
}

/// Step-3 blocks of column `j` lying in rows `[border, N)`.
pub fn step3_blocks_below(j: usize, border: usize, blocks: usize) -> usize {
    (border.max(j + 1)..blocks).map(|i| i - j).sum()
}

/// Border for column `j`: the smallest `β` in `[j+1, N]` whose rows `[β, N)` hold at most
/// `f·T` of the column's `T` Step-3 blocks.
pub fn cholesky_border(f: f64, j: usize, blocks: usize) -> Result<usize> {
    check_fraction(f)?;
    if j >= blocks {
        return Err(SolverError::BlockOutOfRange {
            row: j,
            col: j,
            blocks,
        });
    }
    // relative slack absorbs decimal fractions like 0.35 that land just under an integer
    let budget = f * step3_blocks(j, blocks) as f64 * (1.0 + 1e-12);
    let mut border = blocks;
    let mut below = 0usize;
    while border > j + 1 {
        let row = border - 1;
        let next = below + (row - j);
        if next as f64 > budget {
            break;
        }
        below = next;
        border = row;
    }
    Ok(border)
}

/// Per-column borders and the resulting border shifts for one factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct CholeskyPlan {
    pub fraction: f64,
    pub blocks: usize,
    /// `borders[j]` = β_j.
    pub borders: Vec<usize>,
    pub shifts: Vec<ShiftEvent>,
}

/// Rows `[from, to)` cross from B to A before column `column` is processed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftEvent {
    pub column: usize,
    pub from: usize,
    pub to: usize,
}

impl ShiftEvent {
    pub fn rows_moved(&self) -> usize {
        self.to - self.from
    }

    pub fn rows(&self) -> Range<usize> {
        self.from..self.to
    }
}

impl CholeskyPlan {
    pub fn new(f: f64, blocks: usize) -> Result<Self> {
        check_fraction(f)?;
        let mut borders = Vec::with_capacity(blocks);
        let mut shifts = Vec::new();
        let mut prev: Option<usize> = None;
        for j in 0..blocks {
            let raw = cholesky_border(f, j, blocks)?;
            // a border never moves up; that would need A→B block-row traffic
            let border = prev.map_or(raw, |p| p.max(raw));
            if let Some(p) = prev {
                if border > p {
                    shifts.push(ShiftEvent {
                        column: j,
                        from: p,
                        to: border,
                    });
                }
            }
            borders.push(border);
            prev = Some(border);
        }
        Ok(Self {
            fraction: f,
            blocks,
            borders,
            shifts,
        })
    }

    pub fn border(&self, j: usize) -> usize {
        self.borders[j]
    }

    pub fn shift_before(&self, j: usize) -> Option<ShiftEvent> {
        self.shifts.iter().copied().find(|s| s.column == j)
    }

    /// Total Step-3 blocks over the whole factorization.
    pub fn total_step3(&self) -> usize {
        (0..self.blocks).map(|j| step3_blocks(j, self.blocks)).sum()
    }

    /// Step-3 blocks assigned to executor B over the whole factorization.
    pub fn step3_on_b(&self) -> usize {
        (0..self.blocks)
            .map(|j| step3_blocks_below(j, self.borders[j], self.blocks))
            .sum()
    }

    /// Realized share of Step-3 blocks on B (0 when there are no Step-3 blocks).
    pub fn realized_fraction(&self) -> f64 {
        let total = self.total_step3();
        if total == 0 {
            0.0
        } else {
            self.step3_on_b() as f64 / total as f64
        }
    }

    /// Upper bound on `|realized_fraction - f|`: one trailing row of slack per column.
    pub fn realization_bound(&self) -> f64 {
        let total = self.total_step3();
        if total == 0 {
            return 0.0;
        }
        let slack: usize = (0..self.blocks).map(|j| self.blocks - 1 - j).sum();
        slack as f64 / total as f64
    }
}
