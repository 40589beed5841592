//! Numerical tolerances shared by every validator in the crate.

/// All tolerance thresholds in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed deviation of a state vector's norm from one.
    pub norm: f64,
    /// Allowed max-entry deviation of `M - M^dag`.
    pub hermitian: f64,
    /// Most negative eigenvalue still accepted (as `-psd`); clamped to zero afterwards.
    pub psd: f64,
    /// Allowed deviation of the trace from one.
    pub trace: f64,
    /// Allowed max-entry deviation of `sum K^dag K` from the identity.
    pub cptp: f64,
    /// Allowed max-entry deviation of `V^dag V` from the identity.
    pub isometry: f64,
    /// Eigenvalues at or below this count as zero when computing ranks.
    pub rank_cutoff: f64,
    /// Eigenvalues at or below this are dropped from entropy sums.
    pub entropy_cutoff: f64,
    /// Eigenvalues closer than this are treated as one degenerate block.
    pub degeneracy: f64,
    /// Slack for non-strict rate-region membership.
    pub membership_slack: f64,
    /// Allowed deviation of a probability vector's sum from one.
    pub distribution: f64,
    /// Stricter sum check for the letter distributions behind typical sets.
    pub letter_distribution: f64,
    /// Most sequences a typical-set or codebook enumeration may visit.
    pub max_sequences: usize,
    /// Largest total Hilbert-space dimension handled densely.
    pub max_dim: usize,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        norm: 1e-9,
        hermitian: 1e-9,
        psd: 1e-9,
        trace: 1e-9,
        cptp: 1e-8,
        isometry: 1e-8,
        rank_cutoff: 1e-10,
        entropy_cutoff: 1e-12,
        degeneracy: 1e-9,
        membership_slack: 1e-9,
        distribution: 1e-9,
        letter_distribution: 1e-12,
        max_sequences: 10_000_000,
        max_dim: 4096,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// The crate-wide default tolerances.
pub const TOL: Tolerances = Tolerances::DEFAULT;
