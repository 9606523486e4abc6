use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BlockMatrix, SdpError, SdpProblem};
use crate::mpla::MpScalar;

/// Descriptive metadata carried alongside a family in manifests.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilyMeta {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Linear family `A_k(t) = A_k + t·D_k`, `b(t) = b + t·Δb`.
#[derive(Clone, Debug)]
pub struct PerturbedFamily {
    pub base: SdpProblem,
    pub deltas: BTreeMap<usize, BlockMatrix>,
    pub b_delta: Option<Vec<MpScalar>>,
    pub meta: FamilyMeta,
}

impl PerturbedFamily {
    pub fn new(
        base: SdpProblem,
        deltas: BTreeMap<usize, BlockMatrix>,
        b_delta: Option<Vec<MpScalar>>,
        meta: FamilyMeta,
    ) -> Result<Self, SdpError> {
        for (k, d) in &deltas {
            if *k > base.m {
                return Err(SdpError::Invalid(format!("delta index {k} exceeds m")));
            }
            if d.dims() != base.block_dims || !d.is_symmetric() {
                return Err(SdpError::Invalid(format!(
                    "delta {k} does not match the block structure"
                )));
            }
        }
        if let Some(db) = &b_delta {
            if db.len() != base.m {
                return Err(SdpError::Invalid("b delta has wrong length".into()));
            }
        }
        Ok(PerturbedFamily {
            base,
            deltas,
            b_delta,
            meta,
        })
    }

    /// The family that never moves.
    pub fn zero(base: SdpProblem) -> Self {
        PerturbedFamily {
            base,
            deltas: BTreeMap::new(),
            b_delta: None,
            meta: FamilyMeta {
                name: "zero".into(),
                ..FamilyMeta::default()
            },
        }
    }

    /// The segment from `base` (`t = 0`) to `target` (`t = 1`).
    pub fn between(
        base: SdpProblem,
        target: &SdpProblem,
        meta: FamilyMeta,
    ) -> Result<Self, SdpError> {
        if target.block_dims != base.block_dims || target.m != base.m {
            return Err(SdpError::Invalid("target has a different shape".into()));
        }
        let target = target.with_prec(base.prec());
        let deltas = (0..=base.m)
            .map(|k| (k, target.a[k].sub(&base.a[k])))
            .filter(|(_, d)| !d.is_zero())
            .collect();
        let db: Vec<MpScalar> = target.b.iter().zip(&base.b).map(|(x, y)| x - y).collect();
        let b_delta = if db.iter().all(|x| x.is_zero()) {
            None
        } else {
            Some(db)
        };
        Self::new(base, deltas, b_delta, meta)
    }

    /// Direction `D_k` (zero when absent).
    pub fn delta(&self, k: usize) -> BlockMatrix {
        self.deltas
            .get(&k)
            .cloned()
            .unwrap_or_else(|| BlockMatrix::zeros(self.base.prec(), &self.base.block_dims))
    }

    /// `−D_k`, the change of the written LMI coefficient of `y_k`.
    pub fn lmi_delta(&self, k: usize) -> BlockMatrix {
        self.delta(k).neg()
    }

    /// Indices `k ≥ 1` whose constraint matrix moves.
    pub fn perturbed_indices(&self) -> Vec<usize> {
        self.deltas
            .iter()
            .filter(|(k, d)| **k >= 1 && !d.is_zero())
            .map(|(k, _)| *k)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.deltas.values().all(|d| d.is_zero())
            && self
                .b_delta
                .as_ref()
                .is_none_or(|v| v.iter().all(|x| x.is_zero()))
    }

    /// Same family with every direction multiplied by `s`.
    pub fn scaled(&self, s: &MpScalar) -> Self {
        PerturbedFamily {
            base: self.base.clone(),
            deltas: self.deltas.iter().map(|(k, d)| (*k, d.scale(s))).collect(),
            b_delta: self
                .b_delta
                .as_ref()
                .map(|v| v.iter().map(|x| x * s).collect()),
            meta: self.meta.clone(),
        }
    }

    /// Concrete instance at parameter `t`; `t = 0` returns the base exactly.
    pub fn apply(&self, t: &MpScalar) -> SdpProblem {
        if t.is_zero() {
            return self.base.clone();
        }
        let mut p = self.base.clone();
        for (k, d) in &self.deltas {
            p.a[*k].axpy(t, d);
        }
        if let Some(db) = &self.b_delta {
            for (bk, dk) in p.b.iter_mut().zip(db) {
                bk.add_mul(t, dk);
            }
        }
        p
    }
}
