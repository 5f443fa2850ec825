use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsystemKind {
    Qumode,
    Qubit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subsystem {
    pub kind: SubsystemKind,
    pub dim: usize,
}

impl Subsystem {
    pub fn qumode(cutoff: usize) -> Self {
        Subsystem {
            kind: SubsystemKind::Qumode,
            dim: cutoff,
        }
    }

    pub fn qubit() -> Self {
        Subsystem {
            kind: SubsystemKind::Qubit,
            dim: 2,
        }
    }
}

/// Ordered tensor-product structure of qumodes and qubits.
///
/// Basis index ordering is row-major (Kronecker): the first entry is the most
/// significant digit. The layout is immutable once built and cheap to clone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemLayout {
    entries: Arc<[Subsystem]>,
    strides: Arc<[usize]>,
    total: usize,
}

impl SubsystemLayout {
    pub fn new(entries: Vec<Subsystem>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Shape("layout needs at least one subsystem".into()));
        }
        for e in &entries {
            match e.kind {
                SubsystemKind::Qubit if e.dim != 2 => {
                    return Err(Error::Shape(format!("qubit dimension must be 2, got {}", e.dim)))
                }
                SubsystemKind::Qumode if e.dim < 2 => return Err(Error::InvalidCutoff(e.dim)),
                _ => {}
            }
        }
        let mut strides = vec![1usize; entries.len()];
        for i in (0..entries.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * entries[i + 1].dim;
        }
        let total = strides[0] * entries[0].dim;
        Ok(SubsystemLayout {
            entries: entries.into(),
            strides: strides.into(),
            total,
        })
    }

    /// `modes` qumodes at a common cutoff followed by `qubits` qubits.
    pub fn modes_then_qubits(modes: usize, cutoff: usize, qubits: usize) -> Result<Self> {
        let mut entries = vec![Subsystem::qumode(cutoff); modes];
        entries.extend(std::iter::repeat(Subsystem::qubit()).take(qubits));
        Self::new(entries)
    }

    pub fn single_mode(cutoff: usize) -> Result<Self> {
        Self::new(vec![Subsystem::qumode(cutoff)])
    }

    pub fn dim(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Subsystem] {
        &self.entries
    }

    pub fn entry(&self, index: usize) -> Result<Subsystem> {
        self.entries
            .get(index)
            .copied()
            .ok_or_else(|| Error::Shape(format!("subsystem {index} out of range ({})", self.len())))
    }

    pub fn stride(&self, index: usize) -> usize {
        self.strides[index]
    }

    pub fn qumodes(&self) -> Vec<usize> {
        self.indices_of(SubsystemKind::Qumode)
    }

    pub fn qubits(&self) -> Vec<usize> {
        self.indices_of(SubsystemKind::Qubit)
    }

    fn indices_of(&self, kind: SubsystemKind) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.kind == kind)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn expect_qumode(&self, index: usize) -> Result<usize> {
        let e = self.entry(index)?;
        if e.kind != SubsystemKind::Qumode {
            return Err(Error::Shape(format!("subsystem {index} is not a qumode")));
        }
        Ok(e.dim)
    }

    pub fn expect_qubit(&self, index: usize) -> Result<()> {
        let e = self.entry(index)?;
        if e.kind != SubsystemKind::Qubit {
            return Err(Error::Shape(format!("subsystem {index} is not a qubit")));
        }
        Ok(())
    }

    /// Digit of subsystem `index` in the basis label `flat`.
    #[inline]
    pub fn digit(&self, flat: usize, index: usize) -> usize {
        (flat / self.strides[index]) % self.entries[index].dim
    }

    /// Base offsets of every fibre along subsystem `index`: each fibre is
    /// `base + j * stride(index)` for `j < dim(index)`.
    pub fn fibre_bases(&self, index: usize) -> Vec<usize> {
        let stride = self.strides[index];
        let block = stride * self.entries[index].dim;
        let outer = self.total / block;
        let mut bases = Vec::with_capacity(outer * stride);
        for o in 0..outer {
            for i in 0..stride {
                bases.push(o * block + i);
            }
        }
        bases
    }

    /// Base offsets with digit zero on both `a` and `b`.
    pub fn pair_bases(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.total)
            .filter(|&f| self.digit(f, a) == 0 && self.digit(f, b) == 0)
            .collect()
    }

    /// Same layout with every qumode cutoff replaced by `cutoff`.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<Self> {
        Self::new(
            self.entries
                .iter()
                .map(|e| match e.kind {
                    SubsystemKind::Qumode => Subsystem::qumode(cutoff),
                    SubsystemKind::Qubit => *e,
                })
                .collect(),
        )
    }

    /// Sub-layout keeping the listed subsystems in their original order.
    pub fn sub_layout(&self, keep: &[usize]) -> Result<Self> {
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        Self::new(sorted.iter().map(|&i| self.entry(i)).collect::<Result<Vec<_>>>()?)
    }
}
