/// Level `(m, k)` of the non-symmetric product `U ▷ F`, the component
/// `U_m ⊕ F_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DoubleScaleIndex {
    pub m: usize,
    pub k: usize,
}

impl DoubleScaleIndex {
    pub fn new(m: usize, k: usize) -> Self {
        Self { m, k }
    }
}

/// `0 ≤ k ≤ m + 1`.
pub fn validate_double_index(idx: DoubleScaleIndex) -> bool {
    idx.k <= idx.m + 1
}
