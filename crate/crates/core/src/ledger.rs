//! Append-only record of every transfer between the two memory spaces.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransferKind {
    Scalar,
    Subvector,
    Block,
    BlockRow,
    InitialMatrix,
    Result,
}

impl TransferKind {
    pub const ALL: [TransferKind; 6] = [
        TransferKind::Scalar,
        TransferKind::Subvector,
        TransferKind::Block,
        TransferKind::BlockRow,
        TransferKind::InitialMatrix,
        TransferKind::Result,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransferKind::Scalar => "scalar",
            TransferKind::Subvector => "subvector",
            TransferKind::Block => "block",
            TransferKind::BlockRow => "block_row",
            TransferKind::InitialMatrix => "initial_matrix",
            TransferKind::Result => "result",
        }
    }
}

impl fmt::Display for TransferKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    AtoB,
    BtoA,
    /// A paired exchange logged as one event (the CG `s` exchange).
    Both,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::AtoB => "A->B",
            Direction::BtoA => "B->A",
            Direction::Both => "A<->B",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransferEntry {
    pub kind: TransferKind,
    pub direction: Direction,
    pub bytes: u64,
    /// Solver step (CG iteration or Cholesky column) the transfer belongs to.
    pub step: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransferLedger {
    entries: Vec<TransferEntry>,
}

impl TransferLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, kind: TransferKind, direction: Direction, bytes: u64, step: usize) {
        self.entries.push(TransferEntry {
            kind,
            direction,
            bytes,
            step,
        });
    }

    pub fn entries(&self) -> &[TransferEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_bytes(&self) -> u64 {
        self.entries.iter().map(|e| e.bytes).sum()
    }

    pub fn count(&self, kind: TransferKind) -> usize {
        self.entries.iter().filter(|e| e.kind == kind).count()
    }

    pub fn count_directed(&self, kind: TransferKind, direction: Direction) -> usize {
        self.entries
            .iter()
            .filter(|e| e.kind == kind && e.direction == direction)
            .count()
    }

    pub fn bytes(&self, kind: TransferKind) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.kind == kind)
            .map(|e| e.bytes)
            .sum()
    }

    pub fn at_step(&self, step: usize) -> impl Iterator<Item = &TransferEntry> {
        self.entries.iter().filter(move |e| e.step == step)
    }

    pub fn summary(&self) -> LedgerSummary {
        LedgerSummary {
            bytes_total: self.total_bytes(),
            bytes_scalar: self.bytes(TransferKind::Scalar),
            bytes_subvector: self.bytes(TransferKind::Subvector),
            bytes_block: self.bytes(TransferKind::Block),
            bytes_block_row: self.bytes(TransferKind::BlockRow),
            bytes_initial: self.bytes(TransferKind::InitialMatrix),
            bytes_result: self.bytes(TransferKind::Result),
            scalar_transfers: self.count(TransferKind::Scalar),
            subvector_events: self.count(TransferKind::Subvector),
            block_transfers: self.count(TransferKind::Block),
            block_row_transfers: self.count(TransferKind::BlockRow),
        }
    }
}

/// Byte and event totals per transfer kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LedgerSummary {
    pub bytes_total: u64,
    pub bytes_scalar: u64,
    pub bytes_subvector: u64,
    pub bytes_block: u64,
    pub bytes_block_row: u64,
    pub bytes_initial: u64,
    pub bytes_result: u64,
    pub scalar_transfers: usize,
    pub subvector_events: usize,
    pub block_transfers: usize,
    pub block_row_transfers: usize,
}

impl LedgerSummary {
    /// Bytes moved while the solver iterates (everything but setup and result).
    pub fn per_step_bytes(&self) -> u64 {
        self.bytes_total - self.bytes_initial - self.bytes_result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_and_queries() {
        let mut l = TransferLedger::new();
        l.record(TransferKind::Scalar, Direction::BtoA, 8, 1);
        l.record(TransferKind::Subvector, Direction::Both, 800, 1);
        l.record(TransferKind::Scalar, Direction::BtoA, 8, 2);
        assert_eq!(l.total_bytes(), 816);
        assert_eq!(l.count(TransferKind::Scalar), 2);
        assert_eq!(l.count_directed(TransferKind::Scalar, Direction::AtoB), 0);
        assert_eq!(l.bytes(TransferKind::Subvector), 800);
        assert_eq!(l.at_step(1).count(), 2);
        let s = l.summary();
        assert_eq!(s.bytes_total, 816);
        assert_eq!(s.per_step_bytes(), 816);
        assert_eq!(TransferKind::BlockRow.to_string(), "block_row");
    }
}
